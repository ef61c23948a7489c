use super::{HilbertLayout, Kron, NORM_TOL};
use crate::error::{Error, Result};
use crate::scalar::{creal, czero, is_finite, Real, C};

/// Normalized pure state over a labeled layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    layout: HilbertLayout,
    amps: Vec<C<T>>,
}

impl<T: Real> StateVector<T> {
    /// Builds a state, rejecting non-finite entries or a norm off by more than `NORM_TOL`.
    pub fn new(layout: HilbertLayout, amps: Vec<C<T>>) -> Result<Self> {
        let v = Self::unchecked(layout, amps)?;
        let n2 = v.norm_sqr();
        if (n2 - T::one()).abs() > T::tol(NORM_TOL) {
            return Err(Error::Validation(format!("state norm² = {n2}, expected 1")));
        }
        Ok(v)
    }

    /// Builds a state and rescales it to unit norm.
    pub fn normalized(layout: HilbertLayout, amps: Vec<C<T>>) -> Result<Self> {
        let mut v = Self::unchecked(layout, amps)?;
        let n = v.norm_sqr().sqrt();
        if n <= T::min_positive_value() {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        v.amps.iter_mut().for_each(|a| *a /= n);
        Ok(v)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(layout: HilbertLayout, index: usize) -> Result<Self> {
        let dim = layout.dim();
        if index >= dim {
            return Err(Error::Validation(format!("basis index {index} out of range {dim}")));
        }
        let mut amps = vec![czero(); dim];
        amps[index] = creal(T::one());
        Ok(Self { layout, amps })
    }

    /// Only length and finiteness are checked; used for intermediate results.
    pub(crate) fn unchecked(layout: HilbertLayout, amps: Vec<C<T>>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::Validation(format!(
                "amplitude count {} does not match layout dimension {}",
                amps.len(),
                layout.dim()
            )));
        }
        if !amps.iter().all(is_finite) {
            return Err(Error::Validation("non-finite amplitude".into()));
        }
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn amps(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        if self.layout != other.layout {
            return Err(Error::Layout("inner product across different layouts".into()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * b))
    }
}

impl<T: Real> Kron for StateVector<T> {
    fn kron(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(Self { layout, amps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;

    fn qubit(label: &str, a: [f64; 2]) -> StateVector<f64> {
        StateVector::new(
            HilbertLayout::single(label, 2).unwrap(),
            a.iter().map(|&x| creal(x)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn kron_basis_vectors() {
        let v = kron(&qubit("x", [1.0, 0.0]), &qubit("y", [0.0, 1.0])).unwrap();
        let re: Vec<f64> = v.amps().iter().map(|a| a.re).collect();
        assert_eq!(re, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(v.layout().labels().collect::<Vec<_>>(), vec!["x", "y"]);
    }

    #[test]
    fn kron_plus_plus() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = kron(&qubit("x", [h, h]), &qubit("y", [h, h])).unwrap();
        for a in v.amps() {
            assert!((a.re - 0.5).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn kron_duplicate_label() {
        let x = qubit("x", [1.0, 0.0]);
        assert!(matches!(kron(&x, &x), Err(Error::LayoutConflict(_))));
    }

    #[test]
    fn unnormalized_rejected() {
        let l = HilbertLayout::single("x", 2).unwrap();
        assert!(StateVector::<f64>::new(l.clone(), vec![creal(1.0), creal(1.0)]).is_err());
        let v = StateVector::<f64>::normalized(l, vec![creal(1.0), creal(1.0)]).unwrap();
        assert!((v.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_rejected() {
        let l = HilbertLayout::single("x", 2).unwrap();
        assert!(StateVector::<f64>::normalized(l, vec![creal(f64::NAN), creal(1.0)]).is_err());
    }
}
