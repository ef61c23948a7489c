use rayon::prelude::*;
use tcd_core::channels::{two_sided_scatter_probability, EnvironmentModel, IntensityMixture, PartialWhichPath};
use tcd_core::observables::{joint_density, visibility, ClosedForm};

use crate::config::{ScenarioConfig, ScatterSpec};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    /// Real `n` with `m = √(1/2 − n²)`.
    N,
    /// Scattering probability of a one-sided source.
    W1,
    /// Per-side probability of a two-sided source.
    P2,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::N => "n",
            SweepParam::W1 => "w1",
            SweepParam::P2 => "p2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn new(parameter: SweepParam, start: f64, stop: f64, steps: usize) -> Result<Self, CliError> {
        if steps == 0 {
            return Err(CliError::config("steps", "must be at least 1"));
        }
        if !(start.is_finite() && stop.is_finite() && start <= stop) {
            return Err(CliError::config("start/stop", format!("need start <= stop, got {start} > {stop}")));
        }
        Ok(Self { parameter, start, stop, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.stop } else { self.start + (self.stop - self.start) * i as f64 / last })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// `None` when the value leaves the parameter domain.
    pub result: Option<SweepPoint>,
    pub status: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub effective_w1: f64,
    pub engine: f64,
    pub expected: f64,
}

impl SweepPoint {
    pub fn abs_diff(&self) -> f64 {
        (self.engine - self.expected).abs()
    }
}

fn model_at(cfg: &ScenarioConfig, p: SweepParam, v: f64) -> Result<(EnvironmentModel<f64>, f64), tcd_core::Error> {
    let inner = || match cfg.environment.scatter() {
        ScatterSpec::Full => Ok(tcd_core::channels::ScatterModel::Full),
        ScatterSpec::Partial { n, m } => {
            PartialWhichPath::new(n.value(), m.value()).map(tcd_core::channels::ScatterModel::Partial)
        }
    };
    Ok(match p {
        SweepParam::N => (EnvironmentModel::Partial(PartialWhichPath::from_real_n(v)?), 1.0),
        SweepParam::W1 => (EnvironmentModel::Mixed(IntensityMixture::new(v, inner()?)?), v),
        SweepParam::P2 => (EnvironmentModel::two_sided(v, v, inner()?)?, two_sided_scatter_probability(v, v)?),
    })
}

/// Visibility at each sweep value; rows come back in sweep order.
pub fn run_sweep(cfg: &ScenarioConfig, sweep: &SweepSpec) -> Result<Vec<SweepRow>, CliError> {
    let resolved = cfg.resolve()?;
    let (g, grid, mode) = (resolved.geometry, resolved.grid, cfg.mode);
    let method = cfg.visibility_method.into();
    let values = sweep.values();
    let rows = values
        .par_iter()
        .map(|&v| {
            let point = model_at(cfg, sweep.parameter, v).and_then(|(model, effective_w1)| {
                let map = joint_density(&model.reduced()?, &g, mode, &grid, &grid)?;
                let engine = visibility(&map, &g, method)?.v;
                let expected = ClosedForm::for_model(&model)?.expected_visibility();
                Ok(SweepPoint { effective_w1, engine, expected })
            });
            match point {
                Ok(p) => SweepRow { value: v, result: Some(p), status: "ok".into() },
                Err(tcd_core::Error::Validation(msg)) => {
                    SweepRow { value: v, result: None, status: format!("out_of_domain: {msg}") }
                }
                Err(e) => SweepRow { value: v, result: None, status: format!("error: {e}") },
            }
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_values_hit_endpoints() {
        let s = SweepSpec::new(SweepParam::W1, 0.0, 1.0, 5).unwrap();
        assert_eq!(s.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(SweepSpec::new(SweepParam::W1, 0.3, 0.3, 1).unwrap().values(), vec![0.3]);
        assert!(SweepSpec::new(SweepParam::W1, 1.0, 0.0, 3).is_err());
        assert!(SweepSpec::new(SweepParam::W1, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn out_of_domain_rows_are_flagged() {
        let rows = run_sweep(&ScenarioConfig::default(), &SweepSpec::new(SweepParam::W1, 0.5, 1.5, 3).unwrap()).unwrap();
        assert!(rows[0].result.is_some() && rows[1].result.is_some());
        assert!(rows[2].result.is_none() && rows[2].status.starts_with("out_of_domain"));
    }

    #[test]
    fn w1_sweep_visibility() {
        let rows = run_sweep(&ScenarioConfig::default(), &SweepSpec::new(SweepParam::W1, 0.0, 1.0, 3).unwrap()).unwrap();
        for (row, v) in rows.iter().zip([1.0, 0.5, 0.0]) {
            let p = row.result.unwrap();
            assert!((p.engine - v).abs() < 1e-9, "{row:?}");
            assert!((p.expected - v).abs() < 1e-12);
        }
    }

    #[test]
    fn n_sweep_endpoints() {
        let hi = std::f64::consts::FRAC_1_SQRT_2;
        let rows = run_sweep(&ScenarioConfig::default(), &SweepSpec::new(SweepParam::N, 0.5, hi, 2).unwrap()).unwrap();
        assert!((rows[0].result.unwrap().engine - 1.0).abs() < 1e-9);
        assert!(rows[1].result.unwrap().engine.abs() < 1e-9);
    }

    #[test]
    fn p2_effective_probability() {
        let rows = run_sweep(&ScenarioConfig::default(), &SweepSpec::new(SweepParam::P2, 0.1, 0.1, 1).unwrap()).unwrap();
        let p = rows[0].result.unwrap();
        assert_eq!(p.effective_w1, 0.19);
        assert!((p.engine - 0.81).abs() < 1e-9);
    }
}
