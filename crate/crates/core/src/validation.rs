//! Self-check suite run by `tcd-sim validate`.
//!
//! Each check recomputes a known closed-form result or invariant for the
//! supplied geometry and reports pass/fail with the measured figure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{
    apply_full_decoherence, attach_environment, initial_state, reduced_from_state, EnvironmentModel,
    IntensityMixture, PartialWhichPath, ScatterModel, two_sided_scatter_probability,
};
use crate::error::Result;
use crate::geometry::{AmplitudeMode, Geometry, ScreenGrid};
use crate::linalg::{dm_from_state, partial_trace, DensityOperator, HilbertLayout, StateVector, A_SLIT, B_SLIT, ENV};
use crate::montecarlo::{analytic_delta_distribution, sample_events, tv_distance, SampleConfig, DEFAULT_SAMPLING_POINTS};
use crate::observables::{
    closed_form, compare_up_to_scale, joint_density, single_particle_density, single_particle_fringe_ratio,
    visibility, ClosedForm, VisibilityMethod,
};
use crate::scalar::C;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn bound(name: &'static str, measured: f64, limit: f64) -> Self {
        Self { name, passed: measured <= limit, detail: format!("measured {measured:.3e}, limit {limit:.0e}") }
    }

    fn from_result(name: &'static str, r: Result<Check>) -> Self {
        r.unwrap_or_else(|e| Self { name, passed: false, detail: format!("error: {e}") })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    pub random_runs: usize,
    pub mc_samples: u64,
    pub mc_bins: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 0x5eed, random_runs: 1000, mc_samples: 1_000_000, mc_bins: 64 }
    }
}

/// Presets exercised by the per-model checks.
pub fn presets() -> Vec<(&'static str, EnvironmentModel<f64>)> {
    vec![
        ("isolated", EnvironmentModel::Isolated),
        ("full", EnvironmentModel::Full),
        ("small-wavelength", EnvironmentModel::Partial(PartialWhichPath::small_wavelength())),
        ("large-wavelength", EnvironmentModel::Partial(PartialWhichPath::large_wavelength())),
        ("partial(n=0.6)", EnvironmentModel::Partial(PartialWhichPath::from_real_n(0.6).expect("valid n"))),
        ("mixed(w1=0.3)", EnvironmentModel::Mixed(IntensityMixture::new(0.3, ScatterModel::Full).expect("valid w1"))),
    ]
}

pub fn run_suite(g: &Geometry<f64>, grid: &ScreenGrid<f64>, opts: &SuiteOptions) -> Vec<Check> {
    vec![
        Check::from_result("isolated coincidence map matches cos²", isolated_matches_closed_form(g, grid)),
        Check::from_result("full decoherence gives a flat coincidence map", full_is_flat(g, grid)),
        Check::from_result("partial which-path visibility equals 4nm", partial_visibility_law(g, grid)),
        Check::from_result("intensity mixture visibility equals 1 - w1", mixture_visibility_law(g, grid)),
        Check::from_result("no single-particle fringes for any preset", single_particle_fringe_free(g, grid)),
        Check::from_result("density operator invariants on random inputs", random_invariants(opts)),
        Check::from_result("partial trace matches index summation", partial_trace_oracle(opts)),
        Check::from_result("Monte Carlo histograms match prediction", monte_carlo_agreement(g, grid, opts)),
        Check::from_result("two-sided scatter probability", two_sided_check()),
    ]
}

fn flat_map(g: &Geometry<f64>, grid: &ScreenGrid<f64>, rho: &DensityOperator<f64>) -> Result<crate::observables::DensityMap2D<f64>> {
    joint_density(rho, g, AmplitudeMode::FraunhoferFlat, grid, grid)
}

fn isolated_matches_closed_form(g: &Geometry<f64>, grid: &ScreenGrid<f64>) -> Result<Check> {
    let map = flat_map(g, grid, &dm_from_state(&initial_state())?)?;
    let reference: Vec<f64> = map.cells().map(|(a, b, _)| closed_form(&ClosedForm::Isolated, g, a - b)).collect();
    let cmp = compare_up_to_scale(&map.values, &reference)?;
    Ok(Check::bound("isolated coincidence map matches cos²", cmp.max_relative_deviation, 1e-9))
}

fn full_is_flat(g: &Geometry<f64>, grid: &ScreenGrid<f64>) -> Result<Check> {
    let rho = reduced_from_state(&apply_full_decoherence(&attach_environment(&initial_state())?)?)?;
    let map = flat_map(g, grid, &rho)?;
    let max = map.values.iter().copied().fold(f64::MIN, f64::max);
    let min = map.values.iter().copied().fold(f64::MAX, f64::min);
    let mean = map.values.iter().sum::<f64>() / map.values.len() as f64;
    Ok(Check::bound("full decoherence gives a flat coincidence map", (max - min) / mean, 1e-12))
}

fn partial_visibility_law(g: &Geometry<f64>, grid: &ScreenGrid<f64>) -> Result<Check> {
    let (lo, hi) = (0.5, std::f64::consts::FRAC_1_SQRT_2);
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        let n = if i == 10 { hi } else { lo + (hi - lo) * i as f64 / 10.0 };
        let p = PartialWhichPath::from_real_n(n)?;
        let map = flat_map(g, grid, &EnvironmentModel::Partial(p).reduced()?)?;
        let v = visibility(&map, g, VisibilityMethod::Fourier)?.v;
        worst = worst.max((v - 4.0 * p.n().re * p.m().re).abs());
    }
    Ok(Check::bound("partial which-path visibility equals 4nm", worst, 1e-9))
}

fn mixture_visibility_law(g: &Geometry<f64>, grid: &ScreenGrid<f64>) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for w1 in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let model = EnvironmentModel::Mixed(IntensityMixture::new(w1, ScatterModel::Full)?);
        let v = visibility(&flat_map(g, grid, &model.reduced()?)?, g, VisibilityMethod::Fourier)?.v;
        worst = worst.max((v - (1.0 - w1)).abs());
    }
    Ok(Check::bound("intensity mixture visibility equals 1 - w1", worst, 1e-9))
}

fn single_particle_fringe_free(g: &Geometry<f64>, grid: &ScreenGrid<f64>) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for (_, model) in presets() {
        let rho_a = partial_trace(&model.density()?, &[A_SLIT])?;
        let map = single_particle_density(&rho_a, g, AmplitudeMode::FraunhoferFlat, grid)?;
        worst = worst.max(single_particle_fringe_ratio(&map, g)?);
    }
    Ok(Check::bound("no single-particle fringes for any preset", worst, 1e-9))
}

fn random_partial(rng: &mut ChaCha8Rng) -> Result<PartialWhichPath<f64>> {
    let raw: [C<f64>; 2] = [
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    ];
    let scale = (0.5 / (raw[0].norm_sqr() + raw[1].norm_sqr())).sqrt();
    PartialWhichPath::new(raw[0] * scale, raw[1] * scale)
}

/// Worst (hermiticity, trace error, −min eigenvalue) over one operator.
fn invariant_errors(rho: &DensityOperator<f64>) -> Result<[f64; 3]> {
    Ok([rho.hermiticity_error(), (rho.trace_complex() - C::new(1.0, 0.0)).norm(), -rho.min_eigenvalue()?])
}

fn random_invariants(opts: &SuiteOptions) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = [0.0f64; 3];
    for _ in 0..opts.random_runs {
        let p = random_partial(&mut rng)?;
        let w1 = rng.gen_range(0.0..=1.0);
        let inner = if rng.gen_bool(0.5) { ScatterModel::Partial(p) } else { ScatterModel::Full };
        let model = EnvironmentModel::Mixed(IntensityMixture::new(w1, inner)?);
        let g = Geometry::from_wavelength(rng.gen_range(1e-6..1e-2), rng.gen_range(0.1..10.0), rng.gen_range(1e-7..1e-5))?;
        let full = model.density()?;
        let reduced = partial_trace(&full, &[A_SLIT, B_SLIT])?;
        let single = partial_trace(&full, &[A_SLIT])?;
        for rho in [&full, &reduced, &single] {
            let e = invariant_errors(rho)?;
            for k in 0..3 {
                worst[k] = worst[k].max(e[k]);
            }
        }
        // Projected densities must stay nonnegative on any geometry.
        let grid = ScreenGrid::symmetric(g.fringe_period(), 9)?;
        joint_density(&reduced, &g, AmplitudeMode::Spherical, &grid, &grid)?;
    }
    let passed = worst[0] <= 1e-12 && worst[1] <= 1e-12 && worst[2] <= 1e-10;
    Ok(Check {
        name: "density operator invariants on random inputs",
        passed,
        detail: format!(
            "{} runs: max |M-M†| {:.1e}, max |Tr-1| {:.1e}, most negative eigenvalue {:.1e}",
            opts.random_runs, worst[0], worst[1], -worst[2]
        ),
    })
}

/// Explicit `(a, b, e)` loops on the canonical 2×2×3 layout.
pub fn brute_force_trace(rho: &DensityOperator<f64>, keep: &[&str]) -> Vec<C<f64>> {
    let (ka, kb, ke) = (keep.contains(&A_SLIT), keep.contains(&B_SLIT), keep.contains(&ENV));
    let dims = [2usize, 2, 3];
    let kd: usize = [ka, kb, ke].iter().zip(dims).map(|(&k, d)| if k { d } else { 1 }).product();
    let sub = |a: usize, b: usize, e: usize| {
        let mut idx = 0;
        if ka {
            idx = idx * 2 + a;
        }
        if kb {
            idx = idx * 2 + b;
        }
        if ke {
            idx = idx * 3 + e;
        }
        idx
    };
    let mut out = vec![C::new(0.0, 0.0); kd * kd];
    for a in 0..2 {
        for b in 0..2 {
            for e in 0..3 {
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        for e2 in 0..3 {
                            let same_traced = (ka || a == a2) && (kb || b == b2) && (ke || e == e2);
                            if same_traced {
                                out[sub(a, b, e) * kd + sub(a2, b2, e2)] += rho.get(a * 6 + b * 3 + e, a2 * 6 + b2 * 3 + e2);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Random dim-12 state: a product `a ⊗ b ⊗ env` when `product`, otherwise generic.
pub fn random_state(rng: &mut ChaCha8Rng, product: bool) -> Result<StateVector<f64>> {
    let mut draw = |n: usize| -> Vec<C<f64>> {
        (0..n).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    };
    if product {
        let a = StateVector::normalized(HilbertLayout::single(A_SLIT, 2)?, draw(2))?;
        let b = StateVector::normalized(HilbertLayout::single(B_SLIT, 2)?, draw(2))?;
        let e = StateVector::normalized(HilbertLayout::single(ENV, 3)?, draw(3))?;
        crate::linalg::kron(&crate::linalg::kron(&a, &b)?, &e)
    } else {
        StateVector::normalized(HilbertLayout::with_environment(), draw(12))
    }
}

fn partial_trace_oracle(opts: &SuiteOptions) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7ace);
    let keeps: [&[&str]; 6] = [&[A_SLIT], &[B_SLIT], &[ENV], &[A_SLIT, B_SLIT], &[A_SLIT, ENV], &[B_SLIT, ENV]];
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let rho = dm_from_state(&random_state(&mut rng, i % 2 == 0)?)?;
        for keep in keeps {
            let fast = partial_trace(&rho, keep)?;
            let slow = brute_force_trace(&rho, keep);
            for (x, y) in fast.as_slice().iter().zip(&slow) {
                worst = worst.max((x - y).norm());
            }
        }
    }
    Ok(Check::bound("partial trace matches index summation", worst, 1e-13))
}

fn monte_carlo_agreement(g: &Geometry<f64>, grid: &ScreenGrid<f64>, opts: &SuiteOptions) -> Result<Check> {
    let sampling = ScreenGrid::new(grid.y_min(), grid.y_max(), DEFAULT_SAMPLING_POINTS)?;
    let cfg = SampleConfig::spanning(&sampling, opts.mc_samples, opts.seed, opts.mc_bins)?;
    let mut worst: f64 = 0.0;
    for (_, model) in presets() {
        let run = sample_events(&model, g, AmplitudeMode::FraunhoferFlat, &sampling, &cfg)?;
        let prediction = analytic_delta_distribution(&model, g, AmplitudeMode::FraunhoferFlat, &sampling, &cfg)?;
        worst = worst.max(tv_distance(&run.histogram, &prediction)?);
    }
    Ok(Check::bound("Monte Carlo histograms match prediction", worst, 0.01))
}

fn two_sided_check() -> Result<Check> {
    let p = two_sided_scatter_probability(0.1, 0.1)?;
    Ok(Check {
        name: "two-sided scatter probability",
        // 2p - p_two = p², exactly 0.01 in real arithmetic; allow the f64 rounding of that boundary.
        passed: p == 0.19 && (p - 0.2f64).abs() <= 0.01 + 4.0 * f64::EPSILON,
        detail: format!("p(0.1, 0.1) = {p}, first-order value 0.2"),
    })
}
