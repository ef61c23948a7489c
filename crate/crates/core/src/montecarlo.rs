//! Stochastic oracle for the coincidence statistics.
//!
//! Events are drawn directly from the branch structure of the
//! system-environment state: first the classical scatter / no-scatter choice,
//! then the environment record by the Born rule, then a position pair from
//! the conditional two-particle wavefunction `|Σ c_ij ψ_i(y_a) ψ_j(y_b)|²`
//! discretized on the sampling grid. No density operator is involved, so the
//! histograms are an independent check on the reduced-density pipeline.
//!
//! Randomness comes from ChaCha8 with one stream per event block, so results
//! do not depend on how blocks are scheduled across worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{attach_environment, initial_state, EnvironmentModel, ENV_DIM};
use crate::error::{Error, Result};
use crate::geometry::{AmplitudeMode, Geometry, ScreenGrid};
use crate::linalg::StateVector;
use crate::observables::joint_density;
use crate::scalar::{compensated_sum, czero, Real, C};

/// Default number of sampling-grid points per axis.
pub const DEFAULT_SAMPLING_POINTS: usize = 512;
/// Events drawn from one RNG stream.
pub const DEFAULT_BLOCK_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig<T> {
    pub samples: u64,
    pub seed: u64,
    pub bins: usize,
    pub delta_y_range: (T, T),
    /// Worker threads; `0` uses the global rayon pool.
    pub workers: usize,
    pub block_size: u64,
}

impl<T: Real> SampleConfig<T> {
    pub fn new(samples: u64, seed: u64, bins: usize, delta_y_range: (T, T)) -> Result<Self> {
        let cfg = Self { samples, seed, bins, delta_y_range, workers: 0, block_size: DEFAULT_BLOCK_SIZE };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Full `Δy` range reachable on `grid`, i.e. `±(y_max − y_min)`.
    pub fn spanning(grid: &ScreenGrid<T>, samples: u64, seed: u64, bins: usize) -> Result<Self> {
        let span = grid.y_max() - grid.y_min();
        Self::new(samples, seed, bins, (-span, span))
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Validation("samples must be at least 1".into()));
        }
        if self.bins < 2 {
            return Err(Error::Validation(format!("bins must be at least 2, got {}", self.bins)));
        }
        if self.block_size < 1 {
            return Err(Error::Validation("block_size must be at least 1".into()));
        }
        let (lo, hi) = self.delta_y_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Validation(format!("delta_y_range ({lo}, {hi}) not increasing")));
        }
        Ok(())
    }

    pub fn edges(&self) -> Vec<T> {
        let (lo, hi) = self.delta_y_range;
        (0..=self.bins)
            .map(|i| {
                if i == self.bins {
                    hi
                } else {
                    lo + (hi - lo) * T::lit(i as f64) / T::lit(self.bins as f64)
                }
            })
            .collect()
    }

    /// Uniform bin holding `x`; the upper edge belongs to the last bin.
    fn bin_of(&self, x: T) -> Option<usize> {
        let (lo, hi) = self.delta_y_range;
        if x < lo || x > hi {
            return None;
        }
        let idx = ((x - lo) / (hi - lo) * T::lit(self.bins as f64)).floor().to_usize()?;
        Some(idx.min(self.bins - 1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    pub edges: Vec<T>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl<T: Real> Histogram<T> {
    pub fn new(edges: Vec<T>, counts: Vec<u64>) -> Result<Self> {
        if edges.len() != counts.len() + 1 || counts.is_empty() {
            return Err(Error::Validation("histogram needs bins + 1 edges".into()));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Validation("histogram edges must be strictly increasing".into()));
        }
        let total = counts.iter().sum();
        Ok(Self { edges, counts, total })
    }

    pub fn frequencies(&self) -> Vec<T> {
        let total = T::lit(self.total as f64);
        self.counts.iter().map(|&c| T::lit(c as f64) / total).collect()
    }
}

/// Probability mass per bin, on explicit edges.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDistribution<T> {
    pub edges: Vec<T>,
    pub probs: Vec<T>,
}

/// Event counts on the sampling grid, `counts[i * points + j]` at `(y_a[i], y_b[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointHistogram<T> {
    pub grid: ScreenGrid<T>,
    pub counts: Vec<u64>,
}

/// Histogram plus branch tallies of one sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRun<T> {
    pub histogram: Histogram<T>,
    pub scattered: u64,
    /// Events per environment record `ε₀, ε₁, ε₂`.
    pub records: [u64; ENV_DIM],
    /// Events whose `Δy` fell outside the histogram range.
    pub dropped: u64,
}

/// One environment outcome: its probability and the conditional particle density.
struct Outcome<T> {
    record: usize,
    probability: T,
    cdf: Vec<T>,
}

struct Sampler<T> {
    w1: T,
    unscattered: Outcome<T>,
    scattered: Vec<Outcome<T>>,
    points: usize,
}

/// `⟨ε_record|v⟩` as an unnormalized two-particle amplitude vector.
fn project_record<T: Real>(v: &StateVector<T>, record: usize) -> [C<T>; 4] {
    let mut out = [czero(); 4];
    for (pair, slot) in out.iter_mut().enumerate() {
        *slot = v.amps()[pair * ENV_DIM + record];
    }
    out
}

fn conditional_cdf<T: Real>(
    amps: &[C<T>; 4],
    g: &Geometry<T>,
    mode: AmplitudeMode,
    grid: &ScreenGrid<T>,
) -> Result<Vec<T>> {
    let psi: Vec<[C<T>; 2]> = grid
        .coordinates()
        .into_iter()
        .map(|y| g.slit_pair(mode, y))
        .collect::<Result<_>>()?;
    let mut cdf = Vec::with_capacity(psi.len() * psi.len());
    let mut acc = T::zero();
    for pa in &psi {
        for pb in &psi {
            let w = amps[0] * pa[0] * pb[0] + amps[1] * pa[0] * pb[1] + amps[2] * pa[1] * pb[0] + amps[3] * pa[1] * pb[1];
            acc += w.norm_sqr();
            cdf.push(acc);
        }
    }
    if !(acc > T::zero()) {
        return Err(Error::Sampling("conditional density vanishes on the sampling grid".into()));
    }
    Ok(cdf)
}

impl<T: Real> Sampler<T> {
    fn new(model: &EnvironmentModel<T>, g: &Geometry<T>, mode: AmplitudeMode, grid: &ScreenGrid<T>) -> Result<Self> {
        let mix = model.as_mixture()?;
        let alpha = attach_environment(&initial_state())?;
        let phi = mix.inner().apply(&alpha)?;

        let unscattered = Outcome {
            record: 0,
            probability: T::one(),
            cdf: conditional_cdf(&project_record(&alpha, 0), g, mode, grid)?,
        };
        let mut scattered = Vec::new();
        for record in 0..ENV_DIM {
            let amps = project_record(&phi, record);
            let probability: T = amps.iter().map(|a| a.norm_sqr()).sum();
            if probability > T::zero() {
                scattered.push(Outcome { record, probability, cdf: conditional_cdf(&amps, g, mode, grid)? });
            }
        }
        Ok(Self { w1: mix.w1(), unscattered, scattered, points: grid.points() })
    }

    fn pick_record(&self, u: T) -> &Outcome<T> {
        let total = compensated_sum(self.scattered.iter().map(|o| o.probability));
        let target = u * total;
        let mut acc = T::zero();
        for o in &self.scattered {
            acc += o.probability;
            if target < acc {
                return o;
            }
        }
        self.scattered.last().expect("scattered branch has a record")
    }

    /// Returns `(scattered, record, cell index)`.
    fn draw(&self, rng: &mut ChaCha8Rng) -> (bool, usize, usize) {
        let u_scatter = T::lit(rng.gen::<f64>());
        let scattered = u_scatter < self.w1;
        let outcome = if scattered {
            self.pick_record(T::lit(rng.gen::<f64>()))
        } else {
            &self.unscattered
        };
        let cdf = &outcome.cdf;
        let target = T::lit(rng.gen::<f64>()) * *cdf.last().expect("nonempty cdf");
        let cell = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
        (scattered, outcome.record, cell)
    }
}

struct BlockTally {
    counts: Vec<u64>,
    scattered: u64,
    records: [u64; ENV_DIM],
    dropped: u64,
}

fn run_blocks<T: Real, F>(sampler: &Sampler<T>, cfg: &SampleConfig<T>, slots: usize, bin: F) -> Result<BlockTally>
where
    F: Fn(usize) -> Option<usize> + Sync,
{
    let blocks = cfg.samples.div_ceil(cfg.block_size);
    let work = || {
        (0..blocks)
            .into_par_iter()
            .map(|block| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(block);
                let start = block * cfg.block_size;
                let n = cfg.block_size.min(cfg.samples - start);
                let mut tally = BlockTally { counts: vec![0; slots], scattered: 0, records: [0; ENV_DIM], dropped: 0 };
                for _ in 0..n {
                    let (scattered, record, cell) = sampler.draw(&mut rng);
                    tally.scattered += scattered as u64;
                    tally.records[record] += 1;
                    match bin(cell) {
                        Some(b) => tally.counts[b] += 1,
                        None => tally.dropped += 1,
                    }
                }
                tally
            })
            .reduce(
                || BlockTally { counts: vec![0; slots], scattered: 0, records: [0; ENV_DIM], dropped: 0 },
                |mut a, b| {
                    a.counts.iter_mut().zip(&b.counts).for_each(|(x, y)| *x += y);
                    a.scattered += b.scattered;
                    a.records.iter_mut().zip(&b.records).for_each(|(x, y)| *x += y);
                    a.dropped += b.dropped;
                    a
                },
            )
    };
    if cfg.workers == 0 {
        Ok(work())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Sampling(format!("cannot build worker pool: {e}")))?;
        Ok(pool.install(work))
    }
}

/// Samples coincidence events and histograms `Δy = y_a − y_b`.
pub fn sample_events<T: Real>(
    model: &EnvironmentModel<T>,
    g: &Geometry<T>,
    mode: AmplitudeMode,
    grid: &ScreenGrid<T>,
    cfg: &SampleConfig<T>,
) -> Result<SampleRun<T>> {
    cfg.validate()?;
    let sampler = Sampler::new(model, g, mode, grid)?;
    let ys = grid.coordinates();
    let p = sampler.points;
    let tally = run_blocks(&sampler, cfg, cfg.bins, |cell| cfg.bin_of(ys[cell / p] - ys[cell % p]))?;
    Ok(SampleRun {
        histogram: Histogram::new(cfg.edges(), tally.counts)?,
        scattered: tally.scattered,
        records: tally.records,
        dropped: tally.dropped,
    })
}

/// Samples coincidence events into a 2D histogram on the sampling grid.
pub fn sample_joint<T: Real>(
    model: &EnvironmentModel<T>,
    g: &Geometry<T>,
    mode: AmplitudeMode,
    grid: &ScreenGrid<T>,
    cfg: &SampleConfig<T>,
) -> Result<JointHistogram<T>> {
    cfg.validate()?;
    let sampler = Sampler::new(model, g, mode, grid)?;
    let cells = grid.points() * grid.points();
    let tally = run_blocks(&sampler, cfg, cells, Some)?;
    Ok(JointHistogram { grid: *grid, counts: tally.counts })
}

/// Bin probabilities of `Δy` implied by the reduced two-particle operator on the sampling grid.
pub fn analytic_delta_distribution<T: Real>(
    model: &EnvironmentModel<T>,
    g: &Geometry<T>,
    mode: AmplitudeMode,
    grid: &ScreenGrid<T>,
    cfg: &SampleConfig<T>,
) -> Result<BinnedDistribution<T>> {
    cfg.validate()?;
    let map = joint_density(&model.reduced()?, g, mode, grid, grid)?;
    let mut mass: Vec<Vec<T>> = vec![Vec::new(); cfg.bins];
    for (ya, yb, v) in map.cells() {
        if let Some(b) = cfg.bin_of(ya - yb) {
            mass[b].push(v);
        }
    }
    let per_bin: Vec<T> = mass.into_iter().map(compensated_sum).collect();
    let total = compensated_sum(per_bin.iter().copied());
    if !(total > T::zero()) {
        return Err(Error::Sampling("analytic density vanishes inside the histogram range".into()));
    }
    Ok(BinnedDistribution { edges: cfg.edges(), probs: per_bin.into_iter().map(|m| m / total).collect() })
}

fn check_edges<T: Real>(a: &[T], b: &[T]) -> Result<()> {
    let width = (a[a.len() - 1] - a[0]).abs();
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| (*x - *y).abs() > T::tol(1e-12) * width) {
        return Err(Error::BinMismatch("histogram and prediction use different bin edges".into()));
    }
    Ok(())
}

/// Total variation distance `½ Σ |p_i − q_i|` between the empirical and predicted bin masses.
pub fn tv_distance<T: Real>(h: &Histogram<T>, analytic: &BinnedDistribution<T>) -> Result<T> {
    check_edges(&h.edges, &analytic.edges)?;
    if h.total == 0 {
        return Err(Error::TooFewCounts("empty histogram".into()));
    }
    let p = h.frequencies();
    Ok(T::lit(0.5) * compensated_sum(p.iter().zip(&analytic.probs).map(|(a, b)| (*a - *b).abs())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2<T> {
    pub statistic: T,
    pub dof: usize,
    /// Set when merging left a single group, so no test is possible.
    pub degenerate: bool,
}

/// Minimum expected count per group after merging.
pub const CHI2_MIN_EXPECTED: f64 = 5.0;

/// Pearson χ² against `total · q_i`, merging adjacent bins until each group expects at least 5.
pub fn chi2_statistic<T: Real>(h: &Histogram<T>, analytic: &BinnedDistribution<T>) -> Result<Chi2<T>> {
    check_edges(&h.edges, &analytic.edges)?;
    let total = T::lit(h.total as f64);
    let min = T::lit(CHI2_MIN_EXPECTED);
    if total * compensated_sum(analytic.probs.iter().copied()) < min {
        return Err(Error::TooFewCounts(format!("{} events cannot fill one group of {min}", h.total)));
    }
    let mut groups: Vec<(T, T)> = Vec::new();
    let (mut obs, mut exp) = (T::zero(), T::zero());
    for (&c, &q) in h.counts.iter().zip(&analytic.probs) {
        obs += T::lit(c as f64);
        exp += total * q;
        if exp >= min {
            groups.push((obs, exp));
            obs = T::zero();
            exp = T::zero();
        }
    }
    if exp > T::zero() || obs > T::zero() {
        match groups.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => groups.push((obs, exp)),
        }
    }
    if groups.len() == 1 {
        return Ok(Chi2 { statistic: T::zero(), dof: 0, degenerate: true });
    }
    let statistic = compensated_sum(groups.iter().map(|&(o, e)| (o - e) * (o - e) / e));
    Ok(Chi2 { statistic, dof: groups.len() - 1, degenerate: false })
}
