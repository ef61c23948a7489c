//! Interferometer geometry, slit-to-screen amplitudes and screen grids.
//!
//! The half-angle is fixed as `θ = d / (2L)`, which makes the far-field path
//! lengths `L ∓ θ y` reproduce the usual two-slit path difference `d·y/L`.
//! Slit 1 takes the minus sign; swapping the convention mirrors the pattern.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Above this `d/L` the far-field approximation is flagged.
pub const PARAXIAL_WARN_RATIO: f64 = 0.1;
/// Above this `d/L` a geometry is rejected.
pub const PARAXIAL_MAX_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slit {
    One,
    Two,
}

impl Slit {
    pub const BOTH: [Slit; 2] = [Slit::One, Slit::Two];

    pub fn index(self) -> usize {
        match self {
            Slit::One => 0,
            Slit::Two => 1,
        }
    }
}

/// How a slit wave is evaluated on the screen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeMode {
    /// `e^{ikr}/r` with the linearized path length `r`.
    Spherical,
    /// `e^{ik(L∓θy)}/(L∓θy)`.
    FraunhoferFull,
    /// `e^{ik(L∓θy)}`, denominators dropped.
    #[default]
    FraunhoferFlat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry<T> {
    slit_separation: T,
    screen_distance: T,
    wavenumber: T,
}

impl<T: Real> Geometry<T> {
    pub fn new(slit_separation: T, screen_distance: T, wavenumber: T) -> Result<Self> {
        for (name, v) in [
            ("slit_separation", slit_separation),
            ("screen_distance", screen_distance),
            ("wavenumber", wavenumber),
        ] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::Validation(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let ratio = slit_separation / screen_distance;
        if ratio > T::lit(PARAXIAL_MAX_RATIO) {
            return Err(Error::Validation(format!(
                "d/L = {ratio} exceeds {PARAXIAL_MAX_RATIO}; far-field approximation invalid"
            )));
        }
        Ok(Self { slit_separation, screen_distance, wavenumber })
    }

    /// Wavenumber derived as `2π/λ`.
    pub fn from_wavelength(slit_separation: T, screen_distance: T, wavelength: T) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > T::zero()) {
            return Err(Error::Validation(format!("wavelength must be positive, got {wavelength}")));
        }
        Self::new(slit_separation, screen_distance, T::TAU() / wavelength)
    }

    pub fn slit_separation(&self) -> T {
        self.slit_separation
    }

    pub fn screen_distance(&self) -> T {
        self.screen_distance
    }

    pub fn wavenumber(&self) -> T {
        self.wavenumber
    }

    pub fn wavelength(&self) -> T {
        T::TAU() / self.wavenumber
    }

    pub fn theta(&self) -> T {
        self.slit_separation / (self.screen_distance + self.screen_distance)
    }

    /// Spatial angular frequency `2kθ` of the coincidence fringes in `y_a − y_b`.
    pub fn fringe_frequency(&self) -> T {
        let two = T::lit(2.0);
        two * self.wavenumber * self.theta()
    }

    /// Fringe period `2π / (2kθ)` in `y_a − y_b`.
    pub fn fringe_period(&self) -> T {
        T::TAU() / self.fringe_frequency()
    }

    /// Non-fatal diagnostics, e.g. a slit separation too large for the far field.
    pub fn warnings(&self) -> Vec<String> {
        let ratio = self.slit_separation / self.screen_distance;
        if ratio > T::lit(PARAXIAL_WARN_RATIO) {
            vec![format!("d/L = {ratio} exceeds {PARAXIAL_WARN_RATIO}; far-field approximation is rough")]
        } else {
            Vec::new()
        }
    }

    pub fn path_length(&self, slit: Slit, y: T) -> T {
        let shift = self.theta() * y;
        match slit {
            Slit::One => self.screen_distance - shift,
            Slit::Two => self.screen_distance + shift,
        }
    }

    pub fn slit_amplitude(&self, mode: AmplitudeMode, slit: Slit, y: T) -> Result<C<T>> {
        let r = self.path_length(slit, y);
        // k·r = kL ∓ kθy. The large common phase kL is evaluated once so it
        // cancels exactly between slits; only kθy carries relative phase.
        let shift = self.wavenumber * self.theta() * y;
        let local = match slit {
            Slit::One => -shift,
            Slit::Two => shift,
        };
        let wave = C::from_polar(T::one(), self.common_phase()) * C::from_polar(T::one(), local);
        match mode {
            AmplitudeMode::FraunhoferFlat => Ok(wave),
            AmplitudeMode::Spherical | AmplitudeMode::FraunhoferFull => {
                if r.abs() < T::lit(1e-9) * self.screen_distance {
                    return Err(Error::Singularity(format!(
                        "path length {r} vanishes at y = {y} for slit {slit:?}"
                    )));
                }
                Ok(wave / r)
            }
        }
    }

    /// `kL` reduced modulo `2π`.
    pub fn common_phase(&self) -> T {
        (self.wavenumber * self.screen_distance) % T::TAU()
    }

    /// Amplitudes of both slits at `y`, indexed by [`Slit::index`].
    pub fn slit_pair(&self, mode: AmplitudeMode, y: T) -> Result<[C<T>; 2]> {
        Ok([
            self.slit_amplitude(mode, Slit::One, y)?,
            self.slit_amplitude(mode, Slit::Two, y)?,
        ])
    }
}

/// Uniform detector coordinates, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenGrid<T> {
    y_min: T,
    y_max: T,
    points: usize,
}

impl<T: Real> ScreenGrid<T> {
    pub fn new(y_min: T, y_max: T, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Validation(format!("grid needs at least 2 points, got {points}")));
        }
        if !(y_min.is_finite() && y_max.is_finite() && y_min < y_max) {
            return Err(Error::Validation(format!("grid bounds [{y_min}, {y_max}] not increasing")));
        }
        Ok(Self { y_min, y_max, points })
    }

    /// Grid symmetric about zero.
    pub fn symmetric(half_width: T, points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, points)
    }

    pub fn y_min(&self) -> T {
        self.y_min
    }

    pub fn y_max(&self) -> T {
        self.y_max
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> T {
        (self.y_max - self.y_min) / T::lit((self.points - 1) as f64)
    }

    pub fn coordinate(&self, i: usize) -> T {
        let last = self.points - 1;
        if i == last {
            return self.y_max;
        }
        self.y_min + (self.y_max - self.y_min) * T::lit(i as f64) / T::lit(last as f64)
    }

    pub fn coordinates(&self) -> Vec<T> {
        (0..self.points).map(|i| self.coordinate(i)).collect()
    }
}

pub fn grid_coordinates<T: Real>(grid: &ScreenGrid<T>) -> Vec<T> {
    grid.coordinates()
}
