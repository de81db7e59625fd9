//! Long-orbit estimates of the first two Lyapunov exponents and of the
//! uniform approximation exponent, plus empirical monitors.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::{burn_in_f64, AlgorithmId, AlgorithmKind};
use crate::cocycle::{CocycleState, WedgeReport, WedgeTracker, DEFAULT_RENORM};
use crate::error::{Error, Result};
use crate::geometry::sample_point;
use crate::numeric;

/// Resampling attempts per orbit before the orbit is given up.
const MAX_ATTEMPTS: usize = 64;
/// Coordinates (JP) or quotients (Garrity) beyond this are float starvation.
const STARVATION: f64 = 1e-15;

#[derive(Clone, Debug, Serialize)]
pub struct EstimatorConfig {
    pub algorithm: AlgorithmKind,
    pub dim: usize,
    pub steps: u64,
    pub renorm: u64,
    pub orbits: usize,
    pub seed: u64,
    pub burn_in_cap: usize,
    /// Worker threads; `None` uses the global pool.
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Record wall time. Off by default so reports are reproducible bit for bit.
    #[serde(skip)]
    pub timing: bool,
}

impl EstimatorConfig {
    pub fn new(algorithm: AlgorithmKind, dim: usize) -> Self {
        EstimatorConfig {
            algorithm,
            dim,
            steps: 100_000_000,
            renorm: DEFAULT_RENORM,
            orbits: 10,
            seed: 0,
            burn_in_cap: 10_000,
            threads: None,
            timing: false,
        }
    }

    pub fn with_steps(mut self, steps: u64) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_orbits(mut self, orbits: usize) -> Self {
        self.orbits = orbits;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn alg(&self) -> Result<AlgorithmId> {
        AlgorithmId::new(self.algorithm, self.dim)
    }

    pub fn validate(&self) -> Result<AlgorithmId> {
        let alg = self.alg()?;
        if self.steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        if self.renorm == 0 {
            return Err(Error::Config("renormalization interval must be positive".into()));
        }
        if self.orbits == 0 {
            return Err(Error::Config("at least one orbit is required".into()));
        }
        Ok(alg)
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OrbitEstimate {
    pub index: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub eta: f64,
    /// Samples discarded before this orbit succeeded.
    pub discarded: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimatorReport {
    pub config: EstimatorConfig,
    pub orbits: Vec<OrbitEstimate>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub eta: f64,
    pub lambda1_sd: f64,
    pub lambda2_sd: f64,
    pub eta_sd: f64,
    /// `1 + 1/d`.
    pub dirichlet: f64,
    pub discarded: usize,
    /// Orbits that exhausted their resampling budget.
    pub failed_orbits: usize,
    pub elapsed_s: f64,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Deterministic generator for orbit `index` of a run seeded with `seed`.
pub fn orbit_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Draws a start point (after Selmer burn-in); `None` when burn-in fails.
fn draw_start(alg: AlgorithmId, rng: &mut ChaCha8Rng, cap: usize) -> Option<Vec<f64>> {
    let mut x = sample_point(alg.domain(), alg.point_len(), rng).coords;
    if alg.kind == AlgorithmKind::Selmer && burn_in_f64(&mut x, cap).is_err() {
        return None;
    }
    Some(x)
}

#[inline]
fn starved(state: &CocycleState) -> bool {
    let alg = state.alg();
    match alg.kind {
        AlgorithmKind::JacobiPerron => state.point()[0] < STARVATION,
        AlgorithmKind::Garrity => state.stepper().last_quotient_max() * STARVATION > 1.0,
        _ => false,
    }
}

/// Runs `steps` steps; `None` if the orbit terminates or starves.
fn run_orbit(alg: AlgorithmId, x: Vec<f64>, steps: u64, renorm: u64) -> Result<Option<CocycleState>> {
    let mut state = CocycleState::new(alg, x, renorm)?;
    for _ in 0..steps {
        if starved(&state) {
            return Ok(None);
        }
        match state.step() {
            Ok(()) => {}
            Err(Error::Terminates) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    if starved(&state) || !state.log_norm_a().is_finite() || !state.log_norm_d().is_finite() {
        return Ok(None);
    }
    Ok(Some(state))
}

fn one_orbit(alg: AlgorithmId, cfg: &EstimatorConfig, index: usize) -> Result<(Option<OrbitEstimate>, usize)> {
    let mut rng = orbit_rng(cfg.seed, index);
    let mut discarded = 0;
    for _ in 0..MAX_ATTEMPTS {
        let Some(x) = draw_start(alg, &mut rng, cfg.burn_in_cap) else {
            discarded += 1;
            continue;
        };
        match run_orbit(alg, x, cfg.steps, cfg.renorm)? {
            Some(state) => {
                let n = cfg.steps as f64;
                let lambda1 = state.log_norm_a() / n;
                let lambda2 = state.log_norm_d() / n;
                let est = OrbitEstimate { index, lambda1, lambda2, eta: 1.0 - lambda2 / lambda1, discarded };
                return Ok((Some(est), discarded));
            }
            None => {
                discarded += 1;
                log::debug!("{alg}: orbit {index} discarded (termination or float starvation)");
            }
        }
    }
    Ok((None, discarded))
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Independent renormalized orbits from fresh samples, pooled by orbit index.
pub fn estimate(cfg: &EstimatorConfig) -> Result<EstimatorReport> {
    let alg = cfg.validate()?;
    let start = Instant::now();
    let results: Vec<Result<(Option<OrbitEstimate>, usize)>> =
        with_pool(cfg.threads, || (0..cfg.orbits).into_par_iter().map(|i| one_orbit(alg, cfg, i)).collect())?;
    let mut orbits = Vec::new();
    let mut discarded = 0;
    let mut failed = 0;
    for r in results {
        let (est, disc) = r?;
        discarded += disc;
        match est {
            Some(e) => orbits.push(e),
            None => failed += 1,
        }
    }
    if orbits.is_empty() {
        return Err(Error::AllOrbitsDiscarded(discarded));
    }
    if discarded > 0 {
        log::info!("{alg}: {discarded} samples discarded and resampled");
    }
    let l1: Vec<f64> = orbits.iter().map(|o| o.lambda1).collect();
    let l2: Vec<f64> = orbits.iter().map(|o| o.lambda2).collect();
    let et: Vec<f64> = orbits.iter().map(|o| o.eta).collect();
    let (lambda1, lambda1_sd) = mean_sd(&l1);
    let (lambda2, lambda2_sd) = mean_sd(&l2);
    let (_, eta_sd) = mean_sd(&et);
    if !(lambda1 > lambda2) {
        return Err(Error::Consistency(format!("lambda1 = {lambda1} is not above lambda2 = {lambda2}")));
    }
    Ok(EstimatorReport {
        config: cfg.clone(),
        orbits,
        lambda1,
        lambda2,
        eta: 1.0 - lambda2 / lambda1,
        lambda1_sd,
        lambda2_sd,
        eta_sd,
        dirichlet: 1.0 + 1.0 / cfg.dim as f64,
        discarded,
        failed_orbits: failed,
        elapsed_s: if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub table: u8,
    pub algorithm: AlgorithmKind,
    pub dim: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub eta: f64,
    pub lambda2_sd: f64,
    pub eta_sd: f64,
    pub dirichlet: f64,
}

pub const TABLE_CSV_HEADER: &str = "table,algorithm,d,lambda1,lambda2,eta,lambda2_sd,eta_sd,dirichlet";

impl TableRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.table,
            self.algorithm,
            self.dim,
            self.lambda1,
            self.lambda2,
            self.eta,
            self.lambda2_sd,
            self.eta_sd,
            self.dirichlet
        )
    }
}

/// `(algorithm, dimensions)` covered by a table.
pub fn table_layout(table: u8) -> Result<Vec<(AlgorithmKind, Vec<usize>)>> {
    let all: Vec<usize> = (2..=11).collect();
    Ok(match table {
        1 => vec![(AlgorithmKind::Selmer, (2..=5).collect())],
        2 => vec![(AlgorithmKind::Brun, all)],
        3 => vec![(AlgorithmKind::JacobiPerron, all)],
        4 => vec![(AlgorithmKind::Intermediate, all)],
        5 => vec![(AlgorithmKind::Garrity, all)],
        6 => [
            AlgorithmKind::Selmer,
            AlgorithmKind::Brun,
            AlgorithmKind::JacobiPerron,
            AlgorithmKind::Intermediate,
            AlgorithmKind::Garrity,
        ]
        .into_iter()
        .map(|k| (k, all.clone()))
        .collect(),
        t => return Err(Error::Config(format!("unknown table {t}; expected 1..6"))),
    })
}

/// Minimum per-orbit step budget for [`table`].
pub const TABLE_MIN_BUDGET: u64 = 10_000_000;

/// Reproduces one of the exponent grids at `budget` steps per orbit.
/// `only_dims` restricts the grid (all rows when empty).
pub fn table(t: u8, budget: u64, orbits: usize, seed: u64, only_dims: &[usize]) -> Result<Vec<TableRow>> {
    if budget < TABLE_MIN_BUDGET {
        return Err(Error::Config(format!("table budget must be at least {TABLE_MIN_BUDGET} steps")));
    }
    let mut rows = Vec::new();
    for (kind, dims) in table_layout(t)? {
        for d in dims {
            if !only_dims.is_empty() && !only_dims.contains(&d) {
                continue;
            }
            let cfg = EstimatorConfig::new(kind, d).with_steps(budget).with_orbits(orbits).with_seed(seed);
            let r = estimate(&cfg)?;
            rows.push(TableRow {
                table: t,
                algorithm: kind,
                dim: d,
                lambda1: r.lambda1,
                lambda2: r.lambda2,
                eta: r.eta,
                lambda2_sd: r.lambda2_sd,
                eta_sd: r.eta_sd,
                dirichlet: r.dirichlet,
            });
        }
    }
    Ok(rows)
}

/// Start point of a single monitored orbit.
fn monitor_start(alg: AlgorithmId, seed: u64) -> Result<Vec<f64>> {
    let mut rng = orbit_rng(seed, 0);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(x) = draw_start(alg, &mut rng, 10_000) {
            return Ok(x);
        }
    }
    Err(Error::AllOrbitsDiscarded(MAX_ATTEMPTS))
}

/// Wedge-ratio, Paley-Ursell and singular-value monitor on one orbit.
pub fn wedge_monitor(kind: AlgorithmKind, dim: usize, steps: u64, seed: u64) -> Result<WedgeReport> {
    let alg = AlgorithmId::new(kind, dim)?;
    if steps == 0 {
        return Err(Error::Config("steps must be positive".into()));
    }
    let mut rng = orbit_rng(seed, 0);
    for _ in 0..MAX_ATTEMPTS {
        let Some(x) = draw_start(alg, &mut rng, 10_000) else { continue };
        let mut t = WedgeTracker::new(alg, x, DEFAULT_RENORM)?;
        let mut ok = true;
        for _ in 0..steps {
            if starved(t.state()) {
                ok = false;
                break;
            }
            match t.step() {
                Ok(()) => {}
                Err(Error::Terminates) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            return Ok(t.into_report());
        }
    }
    Err(Error::AllOrbitsDiscarded(MAX_ATTEMPTS))
}

#[derive(Clone, Debug, Serialize)]
pub struct BalancednessReport {
    pub steps: u64,
    /// Smallest `min row norm / max row norm` of `A^(n)` over the checkpoints.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `(n, ratio)` at n = 0 and at powers of two.
    pub checkpoints: Vec<(u64, f64)>,
}

fn row_ratio(a: &[f64], m: usize) -> f64 {
    let rows: Vec<f64> = (0..m).map(|i| a[i * m..(i + 1) * m].iter().map(|v| v.abs()).sum()).collect();
    let lo = rows.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rows.iter().cloned().fold(0.0, f64::max);
    lo / hi
}

/// Empirical balancedness constant of `A^(n)` along one orbit.
pub fn balancedness_monitor(kind: AlgorithmKind, dim: usize, steps: u64, seed: u64) -> Result<BalancednessReport> {
    let alg = AlgorithmId::new(kind, dim)?;
    let m = alg.matrix_dim();
    let x = monitor_start(alg, seed)?;
    let mut state = CocycleState::new(alg, x, DEFAULT_RENORM)?;
    let mut checkpoints = vec![(0, row_ratio(state.a_work(), m))];
    for _ in 0..steps {
        if starved(&state) {
            break;
        }
        match state.step() {
            Ok(()) => {}
            Err(Error::Terminates) => break,
            Err(e) => return Err(e),
        }
        let n = state.steps();
        if n.is_power_of_two() {
            checkpoints.push((n, row_ratio(state.a_work(), m)));
        }
    }
    let min_ratio = checkpoints.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let max_ratio = checkpoints.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(BalancednessReport { steps: state.steps(), min_ratio, max_ratio, checkpoints })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugacyReport {
    pub selmer: EstimatorReport,
    pub cassaigne: EstimatorReport,
    pub delta_lambda1: f64,
    pub delta_lambda2: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Tolerance on the exponent differences at a given budget.
pub fn conjugacy_tolerance(steps: u64) -> f64 {
    if steps >= 100_000_000 {
        0.005
    } else {
        0.02
    }
}

/// Selmer d = 2 against Cassaigne with the same budget and seed.
pub fn conjugacy_check(steps: u64, orbits: usize, seed: u64, tolerance: f64) -> Result<ConjugacyReport> {
    let cfg = |k| EstimatorConfig::new(k, 2).with_steps(steps).with_orbits(orbits).with_seed(seed);
    let selmer = estimate(&cfg(AlgorithmKind::Selmer))?;
    let cassaigne = estimate(&cfg(AlgorithmKind::Cassaigne))?;
    let delta_lambda1 = (selmer.lambda1 - cassaigne.lambda1).abs();
    let delta_lambda2 = (selmer.lambda2 - cassaigne.lambda2).abs();
    Ok(ConjugacyReport {
        pass: delta_lambda1 < tolerance && delta_lambda2 < tolerance,
        selmer,
        cassaigne,
        delta_lambda1,
        delta_lambda2,
        tolerance,
    })
}

/// `(1/n) ln ||D^(n)||_inf` of the float path started at `x`, for comparison
/// against exact evaluation.
pub fn float_log_norm_d(alg: AlgorithmId, x: Vec<f64>, n: u64) -> Result<f64> {
    let mut s = CocycleState::new(alg, x, DEFAULT_RENORM)?;
    s.run(n)?;
    Ok(s.log_norm_d() / n as f64)
}

/// `ln ||M||_inf` for a float matrix stored row-major.
pub fn ln_norm(data: &[f64], rows: usize, cols: usize) -> f64 {
    numeric::norm_inf_f64(data, rows, cols).ln()
}
