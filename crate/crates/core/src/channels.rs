//! Initial two-particle state and the environment-coupling models.
//!
//! Environment records `ε₀, ε₁, ε₂` are orthonormal basis vectors of the
//! `env` factor. The channels act on the two populated slit pairs
//! `R₁L₂` and `R₂L₁`; the other pairs keep the ready record `ε₀`.

use crate::error::{Error, Result};
use crate::linalg::{dm_from_state, kron, partial_trace, DensityOperator, HilbertLayout, StateVector, A_SLIT, B_SLIT, ENV};
use crate::scalar::{creal, czero, Real, C};

/// Basis index of `|R₁L₂⟩` on the two-particle layout.
pub const R1L2: usize = 1;
/// Basis index of `|R₂L₁⟩` on the two-particle layout.
pub const R2L1: usize = 2;
/// Number of environment record states.
pub const ENV_DIM: usize = 3;

/// Amplitudes for a scattered photon to reach the nearer (`n`) or farther (`m`) detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialWhichPath<T: Real> {
    n: C<T>,
    m: C<T>,
}

impl<T: Real> PartialWhichPath<T> {
    /// Requires `|n|² + |m|² = 1/2` within `1e-12`.
    pub fn new(n: C<T>, m: C<T>) -> Result<Self> {
        let pop = n.norm_sqr() + m.norm_sqr();
        if !(pop - T::lit(0.5)).abs().le(&T::tol(1e-12)) {
            return Err(Error::Validation(format!("|n|² + |m|² = {pop}, expected 1/2")));
        }
        Ok(Self { n, m })
    }

    /// Real parametrization with `m = √(1/2 − n²)`; needs `n ∈ [0, 1/√2]`.
    pub fn from_real_n(n: T) -> Result<Self> {
        let rem = T::lit(0.5) - n * n;
        if n < T::zero() || rem < -T::tol(1e-15) {
            return Err(Error::Validation(format!("n = {n} outside [0, 1/√2]")));
        }
        Self::new(creal(n), creal(rem.max(T::zero()).sqrt()))
    }

    /// Short wavelength: every photon reaches the nearer detector.
    pub fn small_wavelength() -> Self {
        Self { n: creal(T::FRAC_1_SQRT_2()), m: czero() }
    }

    /// Long wavelength: both detectors equally likely.
    pub fn large_wavelength() -> Self {
        let h = T::lit(0.5);
        Self { n: creal(h), m: creal(h) }
    }

    pub fn n(&self) -> C<T> {
        self.n
    }

    pub fn m(&self) -> C<T> {
        self.m
    }

    /// Weight of the diagonal block, `|n|² + |m|²`.
    pub fn population(&self) -> T {
        self.n.norm_sqr() + self.m.norm_sqr()
    }

    /// Weight of the coherence block, `n m* + n* m = 2 Re(n m*)`.
    pub fn coherence(&self) -> T {
        (self.n * self.m.conj() + self.n.conj() * self.m).re
    }
}

/// What happens when particle `a` scatters a photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScatterModel<T: Real> {
    /// Perfect which-path record.
    Full,
    Partial(PartialWhichPath<T>),
}

impl<T: Real> ScatterModel<T> {
    pub fn apply(&self, v: &StateVector<T>) -> Result<StateVector<T>> {
        match self {
            ScatterModel::Full => apply_full_decoherence(v),
            ScatterModel::Partial(p) => apply_partial_decoherence(v, p),
        }
    }

    pub fn which_path(&self) -> PartialWhichPath<T> {
        match self {
            ScatterModel::Full => PartialWhichPath::small_wavelength(),
            ScatterModel::Partial(p) => *p,
        }
    }
}

/// Scattering happens with probability `w1`, otherwise the environment stays in `ε₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityMixture<T: Real> {
    w1: T,
    inner: ScatterModel<T>,
}

impl<T: Real> IntensityMixture<T> {
    pub fn new(w1: T, inner: ScatterModel<T>) -> Result<Self> {
        check_probability("w1", w1)?;
        Ok(Self { w1, inner })
    }

    pub fn w1(&self) -> T {
        self.w1
    }

    pub fn w2(&self) -> T {
        T::one() - self.w1
    }

    pub fn inner(&self) -> ScatterModel<T> {
        self.inner
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvironmentModel<T: Real> {
    Isolated,
    Full,
    Partial(PartialWhichPath<T>),
    Mixed(IntensityMixture<T>),
    /// Light sources behind both screens, scattering with `p_a` and `p_b` independently.
    TwoSided { p_a: T, p_b: T, inner: ScatterModel<T> },
}

impl<T: Real> EnvironmentModel<T> {
    pub fn two_sided(p_a: T, p_b: T, inner: ScatterModel<T>) -> Result<Self> {
        check_probability("p_a", p_a)?;
        check_probability("p_b", p_b)?;
        Ok(Self::TwoSided { p_a, p_b, inner })
    }

    /// Equivalent single mixture: scattering probability plus what a scatter does.
    pub fn as_mixture(&self) -> Result<IntensityMixture<T>> {
        match *self {
            EnvironmentModel::Isolated => IntensityMixture::new(T::zero(), ScatterModel::Full),
            EnvironmentModel::Full => IntensityMixture::new(T::one(), ScatterModel::Full),
            EnvironmentModel::Partial(p) => IntensityMixture::new(T::one(), ScatterModel::Partial(p)),
            EnvironmentModel::Mixed(mix) => Ok(mix),
            EnvironmentModel::TwoSided { p_a, p_b, inner } => {
                IntensityMixture::new(two_sided_scatter_probability(p_a, p_b)?, inner)
            }
        }
    }

    /// System plus environment density operator on the 12-dimensional layout.
    pub fn density(&self) -> Result<DensityOperator<T>> {
        match self {
            EnvironmentModel::Isolated => dm_from_state(&attach_environment(&initial_state())?),
            EnvironmentModel::Full => {
                dm_from_state(&apply_full_decoherence(&attach_environment(&initial_state())?)?)
            }
            EnvironmentModel::Partial(p) => {
                dm_from_state(&apply_partial_decoherence(&attach_environment(&initial_state())?, p)?)
            }
            _ => mixed_density(&self.as_mixture()?),
        }
    }

    /// Two-particle density operator after tracing out the environment.
    pub fn reduced(&self) -> Result<DensityOperator<T>> {
        reduced_two_particle(&self.density()?)
    }

    /// Coefficients `(population, coherence)` of the reduced operator
    /// `population · D + coherence · X`, where `D` and `X` are the diagonal and
    /// coherence blocks on `{R₁L₂, R₂L₁}`.
    pub fn block_weights(&self) -> Result<(T, T)> {
        let mix = self.as_mixture()?;
        let p = mix.inner().which_path();
        let w1 = mix.w1();
        let w2 = mix.w2();
        let half = T::lit(0.5);
        Ok((w1 * p.population() + w2 * half, w1 * p.coherence() + w2 * half))
    }
}

fn check_probability<T: Real>(name: &str, p: T) -> Result<()> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::Validation(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

/// `(|R₁L₂⟩ + |R₂L₁⟩)/√2` on `[a-slit:2, b-slit:2]`.
pub fn initial_state<T: Real>() -> StateVector<T> {
    let h = creal(T::FRAC_1_SQRT_2());
    let mut amps = vec![czero(); 4];
    amps[R1L2] = h;
    amps[R2L1] = h;
    StateVector::new(HilbertLayout::two_particle(), amps).expect("static state")
}

/// Environment record `ε_index` on the `env` factor.
pub fn env_record<T: Real>(index: usize) -> Result<StateVector<T>> {
    StateVector::basis(HilbertLayout::single(ENV, ENV_DIM)?, index)
}

/// `v ⊗ |ε₀⟩`.
pub fn attach_environment<T: Real>(v: &StateVector<T>) -> Result<StateVector<T>> {
    if v.layout() != &HilbertLayout::two_particle() {
        return Err(Error::Layout(format!("expected two-particle layout, got {:?}", v.layout())));
    }
    kron(v, &env_record(0)?)
}

fn require_ready_environment<T: Real>(v: &StateVector<T>) -> Result<()> {
    if v.layout() != &HilbertLayout::with_environment() {
        return Err(Error::Layout(format!("expected [a-slit, b-slit, env] layout, got {:?}", v.layout())));
    }
    let stray: T = v
        .amps()
        .iter()
        .enumerate()
        .filter(|(i, _)| i % ENV_DIM != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if stray > T::tol(1e-24) {
        return Err(Error::Precondition(format!(
            "environment is not in the ready state ε₀ (weight {stray} elsewhere)"
        )));
    }
    Ok(())
}

/// Applies `|pair⟩|ε₀⟩ → |pair⟩ Σ_e map[e] |ε_e⟩` to the two populated pairs.
fn couple<T: Real>(v: &StateVector<T>, on_r1l2: [C<T>; 3], on_r2l1: [C<T>; 3]) -> Result<StateVector<T>> {
    require_ready_environment(v)?;
    let mut out = vec![czero(); v.dim()];
    for pair in 0..4 {
        let amp = v.amps()[pair * ENV_DIM];
        let map = match pair {
            R1L2 => on_r1l2,
            R2L1 => on_r2l1,
            _ => [creal(T::one()), czero(), czero()],
        };
        for (e, coeff) in map.iter().enumerate() {
            out[pair * ENV_DIM + e] = amp * coeff;
        }
    }
    StateVector::unchecked(v.layout().clone(), out)
}

/// Perfect which-path record: `R₁L₂ε₀ → R₁L₂ε₁`, `R₂L₁ε₀ → R₂L₁ε₂`.
pub fn apply_full_decoherence<T: Real>(v: &StateVector<T>) -> Result<StateVector<T>> {
    let (z, one) = (czero(), creal(T::one()));
    couple(v, [z, one, z], [z, z, one])
}

/// Partial record: `R₁L₂ε₀ → R₁L₂ √2(n ε₁ + m ε₂)`, `R₂L₁ε₀ → R₂L₁ √2(n ε₂ + m ε₁)`.
///
/// On the initial state this yields the four-term state with amplitudes
/// `n, m, n, m`.
pub fn apply_partial_decoherence<T: Real>(v: &StateVector<T>, p: &PartialWhichPath<T>) -> Result<StateVector<T>> {
    let s = T::SQRT_2();
    let (n, m) = (p.n().scale(s), p.m().scale(s));
    couple(v, [czero(), n, m], [czero(), m, n])
}

/// Traces the environment out of a 12-dimensional operator.
pub fn reduced_two_particle<T: Real>(rho: &DensityOperator<T>) -> Result<DensityOperator<T>> {
    if rho.layout() != &HilbertLayout::with_environment() {
        return Err(Error::Layout(format!("expected [a-slit, b-slit, env] layout, got {:?}", rho.layout())));
    }
    partial_trace(rho, &[A_SLIT, B_SLIT])
}

/// [`reduced_two_particle`] of a pure system-environment state.
pub fn reduced_from_state<T: Real>(v: &StateVector<T>) -> Result<DensityOperator<T>> {
    reduced_two_particle(&dm_from_state(v)?)
}

/// `population · Σ|RᵢLⱼ⟩⟨LⱼRᵢ| + coherence · Σ|RᵢLⱼ⟩⟨LᵢRⱼ|` (i ≠ j), built entry by entry.
pub fn block_operator<T: Real>(population: T, coherence: T) -> Result<DensityOperator<T>> {
    let mut mat = vec![czero(); 16];
    mat[R1L2 * 4 + R1L2] = creal(population);
    mat[R2L1 * 4 + R2L1] = creal(population);
    mat[R1L2 * 4 + R2L1] = creal(coherence);
    mat[R2L1 * 4 + R1L2] = creal(coherence);
    DensityOperator::from_matrix(HilbertLayout::two_particle(), mat)
}

/// `w1 |φ⟩⟨φ| + w2 |α⟩⟨α|` with `|α⟩ = |ψ⟩|ε₀⟩` and `|φ⟩` the scattered state.
pub fn mixed_density<T: Real>(mix: &IntensityMixture<T>) -> Result<DensityOperator<T>> {
    let alpha = attach_environment(&initial_state())?;
    let phi = mix.inner().apply(&alpha)?;
    dm_from_state(&phi)?.mix(&dm_from_state(&alpha)?, mix.w1())
}

/// Probability that at least one of two independent sources scatters: `1 − (1−p_a)(1−p_b)`.
///
/// For `p_a = p_b = p ≪ 1` this is `2p − p²`, i.e. twice the one-sided value to first order.
pub fn two_sided_scatter_probability<T: Real>(p_a: T, p_b: T) -> Result<T> {
    check_probability("p_a", p_a)?;
    check_probability("p_b", p_b)?;
    // Written as p_a + p_b(1 − p_a) so both boundary cases are exact.
    Ok(p_a + p_b * (T::one() - p_a))
}
