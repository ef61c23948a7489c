//! Screen-space densities, closed-form references and fringe visibility.

use rayon::prelude::*;

use crate::channels::{EnvironmentModel, ScatterModel};
use crate::error::{Error, Result};
use crate::geometry::{AmplitudeMode, Geometry, ScreenGrid};
use crate::linalg::DensityOperator;
use crate::scalar::{compensated_sum, czero, Real, C};

/// Relative imaginary residue tolerated when projecting a Hermitian operator.
const IMAG_TOL: f64 = 1e-12;
/// Relative negativity that is clipped; anything below is an error.
const NEGATIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    Raw,
    UnitSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap1D<T: Real> {
    pub grid: ScreenGrid<T>,
    pub values: Vec<T>,
    pub normalization: Normalization,
}

/// Values are row-major: `values[i * points_b + j]` is at `(y_a[i], y_b[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap2D<T: Real> {
    pub grid_a: ScreenGrid<T>,
    pub grid_b: ScreenGrid<T>,
    pub values: Vec<T>,
    pub normalization: Normalization,
}

impl<T: Real> DensityMap2D<T> {
    pub fn shape(&self) -> (usize, usize) {
        (self.grid_a.points(), self.grid_b.points())
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[i * self.grid_b.points() + j]
    }

    /// `(y_a, y_b, value)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        let ya = self.grid_a.coordinates();
        let yb = self.grid_b.coordinates();
        let nb = yb.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(idx, &v)| (ya[idx / nb], yb[idx % nb], v))
    }
}

/// Sum normalization, shared by both map kinds.
pub trait Normalize: Sized {
    fn normalize(&self) -> Result<Self>;
}

fn unit_sum<T: Real>(values: &[T]) -> Result<Vec<T>> {
    let total = compensated_sum(values.iter().copied());
    if !(total > T::zero()) {
        return Err(Error::Validation("cannot normalize a map with zero total".into()));
    }
    Ok(values.iter().map(|&v| v / total).collect())
}

impl<T: Real> Normalize for DensityMap1D<T> {
    fn normalize(&self) -> Result<Self> {
        Ok(Self { values: unit_sum(&self.values)?, normalization: Normalization::UnitSum, ..self.clone() })
    }
}

impl<T: Real> Normalize for DensityMap2D<T> {
    fn normalize(&self) -> Result<Self> {
        Ok(Self { values: unit_sum(&self.values)?, normalization: Normalization::UnitSum, ..self.clone() })
    }
}

pub fn normalize<M: Normalize>(map: &M) -> Result<M> {
    map.normalize()
}

/// Checks the imaginary residue, clips round-off negatives.
fn to_real<T: Real>(raw: Vec<C<T>>) -> Result<Vec<T>> {
    let scale = raw.iter().map(|z| z.norm()).fold(T::zero(), T::max).max(T::min_positive_value());
    let imag_tol = T::tol(IMAG_TOL) * scale;
    let neg_tol = T::lit(NEGATIVE_TOL) * scale;
    raw.into_iter()
        .map(|z| {
            if z.im.abs() > imag_tol {
                return Err(Error::Validation(format!("density has imaginary residue {}", z.im)));
            }
            if z.re < -neg_tol {
                return Err(Error::Validation(format!("density is negative ({})", z.re)));
            }
            Ok(z.re.max(T::zero()))
        })
        .collect()
}

fn amplitudes_on<T: Real>(g: &Geometry<T>, mode: AmplitudeMode, grid: &ScreenGrid<T>) -> Result<Vec<[C<T>; 2]>> {
    grid.coordinates().into_iter().map(|y| g.slit_pair(mode, y)).collect()
}

/// `⟨u|ρ|u⟩` for an unnormalized vector `u`.
fn expectation<T: Real>(rho: &DensityOperator<T>, u: &[C<T>]) -> C<T> {
    let d = u.len();
    let mut acc = czero();
    for r in 0..d {
        let mut row = czero();
        for c in 0..d {
            row += rho.get(r, c) * u[c].conj();
        }
        acc += u[r] * row;
    }
    acc
}

/// `⟨y|ρ_a|y⟩ = Σ ρ_ij ψ_i(y) ψ_j*(y)` on a single-particle operator.
pub fn single_particle_density<T: Real>(
    rho_a: &DensityOperator<T>,
    g: &Geometry<T>,
    mode: AmplitudeMode,
    grid: &ScreenGrid<T>,
) -> Result<DensityMap1D<T>> {
    if rho_a.dim() != 2 {
        return Err(Error::Layout(format!("single-particle operator must be 2x2, got dim {}", rho_a.dim())));
    }
    let amps = amplitudes_on(g, mode, grid)?;
    let raw = amps.iter().map(|psi| expectation(rho_a, psi)).collect();
    Ok(DensityMap1D { grid: *grid, values: to_real(raw)?, normalization: Normalization::Raw })
}

/// `⟨y_a|⟨y_b|ρ_ab|y_b⟩|y_a⟩` over the product of two grids.
pub fn joint_density<T: Real>(
    rho_ab: &DensityOperator<T>,
    g: &Geometry<T>,
    mode: AmplitudeMode,
    grid_a: &ScreenGrid<T>,
    grid_b: &ScreenGrid<T>,
) -> Result<DensityMap2D<T>> {
    if rho_ab.dim() != 4 {
        return Err(Error::Layout(format!("two-particle operator must be 4x4, got dim {}", rho_ab.dim())));
    }
    let amps_a = amplitudes_on(g, mode, grid_a)?;
    let amps_b = amplitudes_on(g, mode, grid_b)?;
    let raw: Vec<C<T>> = amps_a
        .par_iter()
        .flat_map_iter(|pa| {
            amps_b.iter().map(move |pb| {
                let u = [pa[0] * pb[0], pa[0] * pb[1], pa[1] * pb[0], pa[1] * pb[1]];
                expectation(rho_ab, &u)
            })
        })
        .collect();
    Ok(DensityMap2D {
        grid_a: *grid_a,
        grid_b: *grid_b,
        values: to_real(raw)?,
        normalization: Normalization::Raw,
    })
}

/// Joint density along the anti-diagonal `y_a = Δ/2, y_b = −Δ/2`.
pub fn delta_profile<T: Real>(
    rho_ab: &DensityOperator<T>,
    g: &Geometry<T>,
    mode: AmplitudeMode,
    deltas: &[T],
) -> Result<Vec<T>> {
    let half = T::lit(0.5);
    let raw = deltas
        .iter()
        .map(|&dy| {
            let pa = g.slit_pair(mode, dy * half)?;
            let pb = g.slit_pair(mode, -dy * half)?;
            let u = [pa[0] * pb[0], pa[0] * pb[1], pa[1] * pb[0], pa[1] * pb[1]];
            Ok(expectation(rho_ab, &u))
        })
        .collect::<Result<Vec<_>>>()?;
    to_real(raw)
}

/// Literal closed-form coincidence profiles, each defined up to a constant factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm<T: Real> {
    /// `cos²(kθΔy)`
    Isolated,
    /// `1`
    Flat,
    /// `|n|² + |m|² + (nm* + mn*) cos(2kθΔy)`
    PartialWhichPath { n: C<T>, m: C<T> },
    /// `w1 + 2 w2 cos²(kθΔy)`
    IntensityMixture { w1: T },
    /// `w1 · [partial form] + w2 · cos²(kθΔy)`; both terms carry the same scale.
    MixedPartial { w1: T, n: C<T>, m: C<T> },
}

impl<T: Real> ClosedForm<T> {
    pub fn for_model(model: &EnvironmentModel<T>) -> Result<Self> {
        Ok(match *model {
            EnvironmentModel::Isolated => ClosedForm::Isolated,
            EnvironmentModel::Full => ClosedForm::Flat,
            EnvironmentModel::Partial(p) => ClosedForm::PartialWhichPath { n: p.n(), m: p.m() },
            EnvironmentModel::Mixed(_) | EnvironmentModel::TwoSided { .. } => {
                let mix = model.as_mixture()?;
                match mix.inner() {
                    ScatterModel::Full => ClosedForm::IntensityMixture { w1: mix.w1() },
                    ScatterModel::Partial(p) => ClosedForm::MixedPartial { w1: mix.w1(), n: p.n(), m: p.m() },
                }
            }
        })
    }

    /// `(mean, amplitude)` with the profile written as `mean + amplitude · cos(2kθΔy)`.
    pub fn harmonic(&self) -> (T, T) {
        let half = T::lit(0.5);
        let partial = |n: C<T>, m: C<T>| (n.norm_sqr() + m.norm_sqr(), (n * m.conj() + m * n.conj()).re);
        match *self {
            ClosedForm::Isolated => (half, half),
            ClosedForm::Flat => (T::one(), T::zero()),
            ClosedForm::PartialWhichPath { n, m } => partial(n, m),
            ClosedForm::IntensityMixture { w1 } => (T::one(), T::one() - w1),
            ClosedForm::MixedPartial { w1, n, m } => {
                let (p0, p1) = partial(n, m);
                let w2 = T::one() - w1;
                (w1 * p0 + w2 * half, w1 * p1 + w2 * half)
            }
        }
    }

    /// Visibility implied by the closed form.
    pub fn expected_visibility(&self) -> T {
        let (mean, amp) = self.harmonic();
        amp.abs() / mean
    }
}

/// Evaluates a closed form at separation `Δy = y_a − y_b`.
pub fn closed_form<T: Real>(kind: &ClosedForm<T>, g: &Geometry<T>, dy: T) -> T {
    let phase = g.wavenumber() * g.theta() * dy;
    let cos2 = phase.cos().powi(2);
    let two = T::lit(2.0);
    match *kind {
        ClosedForm::Isolated => cos2,
        ClosedForm::Flat => T::one(),
        ClosedForm::PartialWhichPath { n, m } => {
            n.norm_sqr() + m.norm_sqr() + (n * m.conj() + m * n.conj()).re * (two * phase).cos()
        }
        ClosedForm::IntensityMixture { w1 } => w1 + two * (T::one() - w1) * cos2,
        ClosedForm::MixedPartial { w1, n, m } => {
            let partial = closed_form(&ClosedForm::PartialWhichPath { n, m }, g, dy);
            w1 * partial + (T::one() - w1) * cos2
        }
    }
}

/// Result of comparing two profiles up to one global scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComparison<T> {
    /// Least-squares factor `s` minimizing `Σ (s·engine − reference)²`.
    pub scale: T,
    /// `max |s·engine − reference| / max |reference|`.
    pub max_relative_deviation: T,
}

pub fn compare_up_to_scale<T: Real>(engine: &[T], reference: &[T]) -> Result<ScaledComparison<T>> {
    if engine.len() != reference.len() || engine.is_empty() {
        return Err(Error::Validation("profiles must be nonempty and of equal length".into()));
    }
    let num = compensated_sum(engine.iter().zip(reference).map(|(&e, &r)| e * r));
    let den = compensated_sum(engine.iter().map(|&e| e * e));
    if !(den > T::zero()) {
        return Err(Error::Validation("engine profile is identically zero".into()));
    }
    let scale = num / den;
    let peak = reference.iter().map(|r| r.abs()).fold(T::zero(), T::max);
    let worst = engine
        .iter()
        .zip(reference)
        .map(|(&e, &r)| (scale * e - r).abs())
        .fold(T::zero(), T::max);
    Ok(ScaledComparison { scale, max_relative_deviation: worst / peak.max(T::min_positive_value()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VisibilityMethod {
    MinMax,
    #[default]
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityReport<T> {
    pub v: T,
    pub max_density: T,
    pub min_density: T,
    pub method: VisibilityMethod,
}

/// Least-squares fit of `c0 + a cos(ωx) + b sin(ωx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFit<T> {
    pub mean: T,
    pub cos: T,
    pub sin: T,
}

impl<T: Real> HarmonicFit<T> {
    /// `|a + i b|`, twice the modulus of the complex Fourier coefficient.
    pub fn amplitude(&self) -> T {
        self.cos.hypot(self.sin)
    }
}

/// Fits mean and first harmonic at angular frequency `omega` by modified Gram–Schmidt QR.
pub fn fit_harmonic<T: Real>(xs: &[T], values: &[T], omega: T) -> Result<HarmonicFit<T>> {
    if xs.len() != values.len() || xs.len() < 3 {
        return Err(Error::Validation("harmonic fit needs at least 3 matching samples".into()));
    }
    let mut cols: Vec<Vec<T>> = vec![
        vec![T::one(); xs.len()],
        xs.iter().map(|&x| (omega * x).cos()).collect(),
        xs.iter().map(|&x| (omega * x).sin()).collect(),
    ];
    let dot = |a: &[T], b: &[T]| compensated_sum(a.iter().zip(b).map(|(&x, &y)| x * y));
    let mut r = [[T::zero(); 3]; 3];
    for j in 0..3 {
        let original = dot(&cols[j], &cols[j]).sqrt();
        for i in 0..j {
            let proj = dot(&cols[i], &cols[j]);
            r[i][j] = proj;
            let (head, tail) = cols.split_at_mut(j);
            for (t, &q) in tail[0].iter_mut().zip(&head[i]) {
                *t -= proj * q;
            }
        }
        let norm = dot(&cols[j], &cols[j]).sqrt();
        if !(norm > T::lit(1e-10) * original) {
            return Err(Error::InsufficientSpan(
                "samples cannot resolve a full harmonic at this frequency".into(),
            ));
        }
        r[j][j] = norm;
        cols[j].iter_mut().for_each(|q| *q /= norm);
    }
    let qty: Vec<T> = cols.iter().map(|q| dot(q, values)).collect();
    let mut coef = [T::zero(); 3];
    for i in (0..3).rev() {
        let mut s = qty[i];
        for j in (i + 1)..3 {
            s -= r[i][j] * coef[j];
        }
        coef[i] = s / r[i][i];
    }
    Ok(HarmonicFit { mean: coef[0], cos: coef[1], sin: coef[2] })
}

/// Fringe visibility of a coincidence map along `Δy = y_a − y_b`.
///
/// `MinMax` needs the map to span at least one fringe period in `Δy`.
/// `Fourier` fits `c0 + c1 e^{i 2kθ Δy} + c.c.` over every cell and reports `2|c1|/c0`.
pub fn visibility<T: Real>(map: &DensityMap2D<T>, g: &Geometry<T>, method: VisibilityMethod) -> Result<VisibilityReport<T>> {
    match method {
        VisibilityMethod::MinMax => {
            let span = (map.grid_a.y_max() - map.grid_b.y_min()) - (map.grid_a.y_min() - map.grid_b.y_max());
            if span < g.fringe_period() {
                return Err(Error::InsufficientSpan(format!(
                    "map covers Δy span {span}, one fringe period is {}",
                    g.fringe_period()
                )));
            }
            let max = map.values.iter().copied().fold(T::neg_infinity(), T::max);
            let min = map.values.iter().copied().fold(T::infinity(), T::min);
            let v = if max + min > T::zero() { (max - min) / (max + min) } else { T::zero() };
            Ok(VisibilityReport { v, max_density: max, min_density: min, method })
        }
        VisibilityMethod::Fourier => {
            let (xs, vals): (Vec<T>, Vec<T>) = map.cells().map(|(a, b, v)| (a - b, v)).unzip();
            let fit = fit_harmonic(&xs, &vals, g.fringe_frequency())?;
            let amp = fit.amplitude();
            if !(fit.mean > T::zero()) {
                return Err(Error::Validation("fitted mean density is not positive".into()));
            }
            Ok(VisibilityReport {
                v: amp / fit.mean,
                max_density: fit.mean + amp,
                min_density: fit.mean - amp,
                method,
            })
        }
    }
}

/// `|c1| / c0` of a single-particle map at the coincidence fringe frequency `2kθ`.
pub fn single_particle_fringe_ratio<T: Real>(map: &DensityMap1D<T>, g: &Geometry<T>) -> Result<T> {
    let xs = map.grid.coordinates();
    let fit = fit_harmonic(&xs, &map.values, g.fringe_frequency())?;
    Ok(fit.amplitude() / fit.mean)
}
