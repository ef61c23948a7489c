use super::{eig_hermitian, HilbertLayout, Kron, StateVector, HERMITIAN_TOL, NORM_TOL, POSITIVITY_TOL, TRACE_TOL};
use crate::error::{Error, Result};
use crate::scalar::{czero, is_finite, Real, C};

/// Density operator stored as a dense row-major `dim × dim` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T: Real> {
    layout: HilbertLayout,
    mat: Vec<C<T>>,
}

impl<T: Real> DensityOperator<T> {
    /// Validated constructor: Hermitian, unit trace and positive semidefinite.
    pub fn from_matrix(layout: HilbertLayout, mat: Vec<C<T>>) -> Result<Self> {
        let rho = Self::raw(layout, mat)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Shape and finiteness only. Used for intermediates built from valid operators.
    pub(crate) fn raw(layout: HilbertLayout, mat: Vec<C<T>>) -> Result<Self> {
        let dim = layout.dim();
        if mat.len() != dim * dim {
            return Err(Error::Validation(format!(
                "matrix has {} entries, layout needs {}",
                mat.len(),
                dim * dim
            )));
        }
        if !mat.iter().all(is_finite) {
            return Err(Error::Validation("non-finite matrix entry".into()));
        }
        Ok(Self { layout, mat })
    }

    /// `I / dim`
    pub fn maximally_mixed(layout: HilbertLayout) -> Self {
        let dim = layout.dim();
        let w = T::one() / T::lit(dim as f64);
        let mut mat = vec![czero(); dim * dim];
        for i in 0..dim {
            mat[i * dim + i] = C::new(w, T::zero());
        }
        Self { layout, mat }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C<T> {
        self.mat[row * self.dim() + col]
    }

    /// Largest entry of `|M − M†|`.
    pub fn hermiticity_error(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn trace_complex(&self) -> C<T> {
        (0..self.dim()).fold(czero(), |acc, i| acc + self.get(i, i))
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        let ev = eig_hermitian(self)?;
        Ok(ev.first().copied().unwrap_or_else(T::zero))
    }

    /// Checks the three density-operator invariants.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > T::tol(HERMITIAN_TOL) {
            return Err(Error::Validation(format!("not Hermitian: max |M - M†| = {herm}")));
        }
        let tr = self.trace_complex();
        if (tr.re - T::one()).abs() > T::tol(TRACE_TOL) || tr.im.abs() > T::tol(TRACE_TOL) {
            return Err(Error::Validation(format!("trace {tr} is not 1")));
        }
        let min = self.min_eigenvalue()?;
        if min < -T::tol(-POSITIVITY_TOL) {
            return Err(Error::Validation(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    /// Convex combination `w·self + (1 − w)·other`.
    pub fn mix(&self, other: &Self, w: T) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::Layout("mixing operators on different layouts".into()));
        }
        if !(T::zero()..=T::one()).contains(&w) {
            return Err(Error::Validation(format!("mixing weight {w} outside [0, 1]")));
        }
        let v = T::one() - w;
        let mat = self
            .mat
            .iter()
            .zip(&other.mat)
            .map(|(a, b)| a.scale(w) + b.scale(v))
            .collect();
        Ok(Self { layout: self.layout.clone(), mat })
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.layout != other.layout {
            return Err(Error::Layout("comparing operators on different layouts".into()));
        }
        Ok(self
            .mat
            .iter()
            .zip(&other.mat)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max))
    }
}

impl<T: Real> Kron for DensityOperator<T> {
    fn kron(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut mat = vec![czero(); dim * dim];
        for i1 in 0..da {
            for j1 in 0..da {
                let a = self.get(i1, j1);
                for i2 in 0..db {
                    for j2 in 0..db {
                        mat[(i1 * db + i2) * dim + (j1 * db + j2)] = a * other.get(i2, j2);
                    }
                }
            }
        }
        Ok(Self { layout, mat })
    }
}

/// `|v⟩⟨v|` for a normalized state.
pub fn dm_from_state<T: Real>(v: &StateVector<T>) -> Result<DensityOperator<T>> {
    let n2 = v.norm_sqr();
    if (n2 - T::one()).abs() > T::tol(NORM_TOL) {
        return Err(Error::Validation(format!("state norm² = {n2}, expected 1")));
    }
    let amps = v.amps();
    let mat = amps
        .iter()
        .flat_map(|a| amps.iter().map(move |b| a * b.conj()))
        .collect();
    DensityOperator::raw(v.layout().clone(), mat)
}

/// Traces out every factor not named in `keep`.
pub fn partial_trace<T: Real>(rho: &DensityOperator<T>, keep: &[&str]) -> Result<DensityOperator<T>> {
    let layout = rho.layout();
    let kept = layout.restrict(keep)?;
    let keep_mask: Vec<bool> = layout
        .factors()
        .iter()
        .map(|f| keep.contains(&f.label.as_str()))
        .collect();

    // Composite index -> (kept index, traced index).
    let dim = layout.dim();
    let split: Vec<(usize, usize)> = (0..dim)
        .map(|i| {
            let digits = layout.digits(i);
            let (mut k, mut t) = (0, 0);
            for ((&d, f), &is_kept) in digits.iter().zip(layout.factors()).zip(&keep_mask) {
                if is_kept {
                    k = k * f.dim + d;
                } else {
                    t = t * f.dim + d;
                }
            }
            (k, t)
        })
        .collect();

    let kd = kept.dim();
    let mut mat = vec![czero(); kd * kd];
    for (i, &(ki, ti)) in split.iter().enumerate() {
        for (j, &(kj, tj)) in split.iter().enumerate() {
            if ti == tj {
                mat[ki * kd + kj] += rho.get(i, j);
            }
        }
    }
    DensityOperator::raw(kept, mat)
}

/// Real part of the trace.
pub fn trace<T: Real>(rho: &DensityOperator<T>) -> T {
    rho.trace_complex().re
}

/// `Tr(ρ²)`
pub fn purity<T: Real>(rho: &DensityOperator<T>) -> T {
    let d = rho.dim();
    let mut acc = T::zero();
    for i in 0..d {
        for j in 0..d {
            acc += (rho.get(i, j) * rho.get(j, i)).re;
        }
    }
    acc
}
