use super::DensityOperator;
use crate::error::{Error, Result};
use crate::scalar::{c, Real, C};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues of the Hermitian part of `rho`, ascending.
///
/// Cyclic complex Jacobi: each pivot `(p, q)` is first rotated to a real
/// off-diagonal entry by a diagonal phase, then annihilated by a real plane
/// rotation. Iterates until the off-diagonal Frobenius norm drops below
/// `1e-14 · max(1, ‖A‖_F)`.
pub fn eig_hermitian<T: Real>(rho: &DensityOperator<T>) -> Result<Vec<T>> {
    let n = rho.dim();
    if rho.hermiticity_error() > T::tol(1e-8) {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (max |M - M†| = {})",
            rho.hermiticity_error()
        )));
    }
    let half = T::lit(0.5);
    let mut a: Vec<C<T>> = vec![c(T::zero(), T::zero()); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (rho.get(i, j) + rho.get(j, i).conj()).scale(half);
        }
    }
    Ok(jacobi_eigenvalues(&mut a, n))
}

fn off_norm<T: Real>(a: &[C<T>], n: usize) -> T {
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

pub(crate) fn jacobi_eigenvalues<T: Real>(a: &mut [C<T>], n: usize) -> Vec<T> {
    let total: T = a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let threshold = T::tol(1e-14) * total.max(T::one());

    for _ in 0..MAX_SWEEPS {
        if off_norm(a, n) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(a, n, p, q);
            }
        }
    }

    let mut ev: Vec<T> = (0..n).map(|i| a[i * n + i].re).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    ev
}

fn rotate<T: Real>(a: &mut [C<T>], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let r = apq.norm();
    if r == T::zero() {
        return;
    }
    // Phase making the pivot real: (D† A D)_pq = r with D = diag(.., 1, .., e^{-iφ}, ..).
    let phase = apq.conj() / r;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let tau = (aqq - app) / (r + r);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let cs = T::one() / (T::one() + t * t).sqrt();
    let sn = t * cs;

    // U = D R restricted to the (p, q) plane.
    let u_pp = c(cs, T::zero());
    let u_pq = c(sn, T::zero());
    let u_qp = phase.scale(-sn);
    let u_qq = phase.scale(cs);

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * u_pp + akq * u_qp;
        a[k * n + q] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[q * n + k] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[p * n + q] = c(T::zero(), T::zero());
    a[q * n + p] = c(T::zero(), T::zero());
    a[p * n + p].im = T::zero();
    a[q * n + q].im = T::zero();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dm_from_state, HilbertLayout, StateVector};
    use crate::scalar::creal;

    #[test]
    fn mixed_qubit() {
        let rho = DensityOperator::<f64>::maximally_mixed(HilbertLayout::single("x", 2).unwrap());
        let ev = eig_hermitian(&rho).unwrap();
        assert!((ev[0] - 0.5).abs() < 1e-15 && (ev[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn projector_sorted() {
        let v = StateVector::<f64>::basis(HilbertLayout::single("x", 2).unwrap(), 0).unwrap();
        let ev = eig_hermitian(&dm_from_state(&v).unwrap()).unwrap();
        assert_eq!(ev, vec![0.0, 1.0]);
    }

    #[test]
    fn complex_two_by_two_closed_form() {
        // [[a, z], [z*, b]] has eigenvalues (a+b)/2 ± sqrt(((a-b)/2)² + |z|²).
        let (a, b, z) = (0.7, 0.3, C::new(0.1, -0.2));
        let rho = DensityOperator::raw(
            HilbertLayout::single("x", 2).unwrap(),
            vec![creal(a), z, z.conj(), creal(b)],
        )
        .unwrap();
        let ev = eig_hermitian(&rho).unwrap();
        let disc = (((a - b) / 2.0f64).powi(2) + z.norm_sqr()).sqrt();
        assert!((ev[0] - ((a + b) / 2.0 - disc)).abs() < 1e-14);
        assert!((ev[1] - ((a + b) / 2.0 + disc)).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let rho = DensityOperator::<f64>::raw(
            HilbertLayout::single("x", 2).unwrap(),
            vec![creal(0.5), creal(0.3), creal(0.0), creal(0.5)],
        )
        .unwrap();
        assert!(matches!(eig_hermitian(&rho), Err(Error::Validation(_))));
    }
}
