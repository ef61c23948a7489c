use tcd_core::geometry::ScreenGrid;
use tcd_core::linalg::{partial_trace, A_SLIT};
use tcd_core::montecarlo::{analytic_delta_distribution, chi2_statistic, sample_events, tv_distance, Chi2, Histogram, SampleConfig};
use tcd_core::observables::{
    closed_form, compare_up_to_scale, delta_profile, joint_density, single_particle_density, visibility, ClosedForm,
    DensityMap1D, DensityMap2D, VisibilityReport,
};

use crate::config::{Resolved, ScenarioConfig};
use crate::CliError;

/// Coincidence density along `Δy`, engine rescaled onto the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub dy: Vec<f64>,
    pub engine: Vec<f64>,
    pub closed_form: Vec<f64>,
    pub scale: f64,
    pub max_relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub config: SampleConfig<f64>,
    pub histogram: Histogram<f64>,
    pub expected: Vec<f64>,
    pub tv: f64,
    pub chi2: Chi2<f64>,
    pub scattered: u64,
    pub records: [u64; 3],
    pub dropped: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub config: ScenarioConfig,
    pub single_particle: DensityMap1D<f64>,
    pub coincidence: DensityMap2D<f64>,
    pub profile: Profile,
    pub visibility: VisibilityReport<f64>,
    pub expected_visibility: f64,
    pub montecarlo: Option<MonteCarloSummary>,
    pub warnings: Vec<String>,
}

/// `2·points − 1` separations covering `±(y_max − y_min)`.
pub fn profile_deltas(grid: &ScreenGrid<f64>) -> Vec<f64> {
    let span = grid.y_max() - grid.y_min();
    let n = 2 * grid.points() - 1;
    ScreenGrid::new(-span, span, n).expect("valid span").coordinates()
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Bundle, CliError> {
    let Resolved { geometry: g, grid, model, montecarlo } = cfg.resolve()?;
    let mode = cfg.mode;

    let full = model.density()?;
    let rho_a = partial_trace(&full, &[A_SLIT])?;
    let rho_ab = model.reduced()?;

    let single_particle = single_particle_density(&rho_a, &g, mode, &grid)?;
    let coincidence = joint_density(&rho_ab, &g, mode, &grid, &grid)?;

    let kind = ClosedForm::for_model(&model)?;
    let dy = profile_deltas(&grid);
    let raw = delta_profile(&rho_ab, &g, mode, &dy)?;
    let reference: Vec<f64> = dy.iter().map(|&d| closed_form(&kind, &g, d)).collect();
    let cmp = compare_up_to_scale(&raw, &reference)?;
    let profile = Profile {
        engine: raw.iter().map(|v| v * cmp.scale).collect(),
        dy,
        closed_form: reference,
        scale: cmp.scale,
        max_relative_deviation: cmp.max_relative_deviation,
    };

    let visibility = visibility(&coincidence, &g, cfg.visibility_method.into())?;

    let montecarlo = match montecarlo {
        None => None,
        Some((sampling, sc)) => {
            let run = sample_events(&model, &g, mode, &sampling, &sc)?;
            let prediction = analytic_delta_distribution(&model, &g, mode, &sampling, &sc)?;
            let tv = tv_distance(&run.histogram, &prediction)?;
            let chi2 = chi2_statistic(&run.histogram, &prediction)?;
            Some(MonteCarloSummary {
                config: sc,
                expected: prediction.probs.iter().map(|q| q * run.histogram.total as f64).collect(),
                histogram: run.histogram,
                tv,
                chi2,
                scattered: run.scattered,
                records: run.records,
                dropped: run.dropped,
            })
        }
    };

    Ok(Bundle {
        config: cfg.clone(),
        single_particle,
        coincidence,
        profile,
        visibility,
        expected_visibility: kind.expected_visibility(),
        montecarlo,
        warnings: g.warnings(),
    })
}
