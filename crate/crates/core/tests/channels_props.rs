use num_complex::Complex64;
use proptest::prelude::*;
use tcd_core::channels::{
    apply_full_decoherence, apply_partial_decoherence, attach_environment, initial_state, reduced_from_state,
    EnvironmentModel, IntensityMixture, PartialWhichPath, ScatterModel,
};
use tcd_core::linalg::{dm_from_state, partial_trace, A_SLIT, B_SLIT};

fn which_path() -> impl Strategy<Value = PartialWhichPath<f64>> {
    ((-1.0f64..1.0, -1.0f64..1.0), (-1.0f64..1.0, -1.0f64..1.0))
        .prop_filter("nonzero", |((a, b), (c, d))| a * a + b * b + c * c + d * d > 1e-3)
        .prop_map(|((a, b), (c, d))| {
            let s = (0.5 / (a * a + b * b + c * c + d * d)).sqrt();
            PartialWhichPath::new(Complex64::new(a * s, b * s), Complex64::new(c * s, d * s)).unwrap()
        })
}

proptest! {
    #[test]
    fn partial_channel_keeps_norm_and_populations(p in which_path()) {
        let v = apply_partial_decoherence(&attach_environment(&initial_state()).unwrap(), &p).unwrap();
        prop_assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
        let rho = reduced_from_state(&v).unwrap();
        prop_assert!(rho.validate().is_ok());
        prop_assert!((rho.get(1, 1).re - 0.5).abs() < 1e-12);
        prop_assert!((rho.get(2, 2).re - 0.5).abs() < 1e-12);
        prop_assert!((rho.get(1, 2).re - p.coherence()).abs() < 1e-12);
        prop_assert!(rho.get(1, 2).im.abs() < 1e-12);
    }

    #[test]
    fn mixture_is_affine_in_weight(p in which_path(), w1 in 0.0f64..=1.0) {
        let inner = ScatterModel::Partial(p);
        let rho = |w| EnvironmentModel::Mixed(IntensityMixture::new(w, inner).unwrap()).reduced().unwrap();
        let expected = rho(0.0).mix(&rho(1.0), 1.0 - w1).unwrap();
        prop_assert!(rho(w1).max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn two_sided_reduces_to_mixture(p_a in 0.0f64..=1.0, p_b in 0.0f64..=1.0) {
        let model = EnvironmentModel::two_sided(p_a, p_b, ScatterModel::Full).unwrap();
        let w1 = model.as_mixture().unwrap().w1();
        prop_assert!((w1 - (1.0 - (1.0 - p_a) * (1.0 - p_b))).abs() < 1e-15);
        prop_assert!(model.density().unwrap().validate().is_ok());
    }
}

#[test]
fn mixture_affinity_at_reference_weights() {
    let full = EnvironmentModel::Full.reduced().unwrap();
    let iso = EnvironmentModel::Isolated.reduced().unwrap();
    for w1 in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let rho = EnvironmentModel::Mixed(IntensityMixture::new(w1, ScatterModel::Full).unwrap()).reduced().unwrap();
        assert!(rho.max_abs_diff(&full.mix(&iso, w1).unwrap()).unwrap() < 1e-15, "w1 = {w1}");
    }
}

#[test]
fn full_decoherence_equals_partial_with_full_which_path() {
    let v = attach_environment(&initial_state::<f64>()).unwrap();
    let a = reduced_from_state(&apply_full_decoherence(&v).unwrap()).unwrap();
    let b = reduced_from_state(&apply_partial_decoherence(&v, &PartialWhichPath::small_wavelength()).unwrap()).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() < 1e-15);
}

#[test]
fn large_wavelength_restores_the_isolated_operator() {
    let v = attach_environment(&initial_state()).unwrap();
    let rho = reduced_from_state(&apply_partial_decoherence(&v, &PartialWhichPath::large_wavelength()).unwrap()).unwrap();
    let iso = dm_from_state(&initial_state::<f64>()).unwrap();
    assert!(rho.max_abs_diff(&iso).unwrap() < 1e-15);
}

#[test]
fn decoherence_requires_fresh_environment() {
    let scattered = apply_full_decoherence(&attach_environment(&initial_state::<f64>()).unwrap()).unwrap();
    assert!(apply_full_decoherence(&scattered).is_err());
}

#[test]
fn single_slit_marginals_are_maximally_mixed() {
    for model in [EnvironmentModel::<f64>::Isolated, EnvironmentModel::Full] {
        let rho = model.density().unwrap();
        for label in [A_SLIT, B_SLIT] {
            let r = partial_trace(&rho, &[label]).unwrap();
            assert!((r.get(0, 0).re - 0.5).abs() < 1e-15);
            assert!(r.get(0, 1).norm() < 1e-15);
        }
    }
}
