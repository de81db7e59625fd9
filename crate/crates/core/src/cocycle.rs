//! The cocycles `A^(n)` and `D^(n)` and their renormalized binary64 iteration.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::algorithms::{self, AlgorithmId, BranchId, FloatStepper};
use crate::error::{Error, Result};
use crate::geometry::ExactPoint;
use crate::numeric::{self, FloatMatrix, IntMatrix, Rational, RationalMatrix};

/// Default renormalization interval.
pub const DEFAULT_RENORM: u64 = 1024;

/// `H(x)`: first row `(-x_1, ..., -x_d)` above the d x d identity.
pub fn h_matrix(x: &[Rational]) -> RationalMatrix {
    let d = x.len();
    let mut h = RationalMatrix::zeros(d + 1, d);
    for (j, v) in x.iter().enumerate() {
        h.set(0, j, -v.clone());
        h.set(j + 1, j, Rational::one());
    }
    h
}

/// `Pi`: drops the first coordinate, as a d x (d+1) matrix.
pub fn pi_matrix(d: usize) -> RationalMatrix {
    let mut p = RationalMatrix::zeros(d, d + 1);
    for i in 0..d {
        p.set(i, i + 1, Rational::one());
    }
    p
}

/// Exact orbit segment: `A^(n)(x)`, the branch word and `T^n x`.
#[derive(Clone, Debug)]
pub struct ExactOrbit {
    pub matrix: IntMatrix,
    pub word: Vec<BranchId>,
    pub end: ExactPoint,
}

pub fn orbit_exact(alg: AlgorithmId, x: &ExactPoint, n: usize) -> Result<ExactOrbit> {
    let mut matrix = IntMatrix::identity(alg.matrix_dim());
    let mut word = Vec::with_capacity(n);
    let mut cur = x.clone();
    for _ in 0..n {
        let s = algorithms::step(alg, &cur)?;
        matrix = &s.matrix * &matrix;
        word.push(s.branch);
        cur = s.next;
    }
    Ok(ExactOrbit { matrix, word, end: cur })
}

/// `A^(n)(x) = A(T^{n-1} x) ... A(x)`.
pub fn accumulate_a(alg: AlgorithmId, x: &ExactPoint, n: usize) -> Result<IntMatrix> {
    Ok(orbit_exact(alg, x, n)?.matrix)
}

/// `D = Pi A H(y)`, where `y` are the chart coordinates of the start point.
pub fn d_matrix(a: &IntMatrix, y: &[Rational]) -> Result<RationalMatrix> {
    let d = y.len();
    if a.dim() != d + 1 {
        return Err(Error::Shape(format!("{}x{} matrix with a point of dimension {d}", a.dim(), a.dim())));
    }
    pi_matrix(d).mul(&RationalMatrix::from_int(a))?.mul(&h_matrix(y))
}

/// `D^(n)(x)` along the exact orbit of `x`.
pub fn d_matrix_at(alg: AlgorithmId, x: &ExactPoint, n: usize) -> Result<RationalMatrix> {
    let a = accumulate_a(alg, x, n)?;
    d_matrix(&a, &algorithms::chart(alg, &x.coords)?)
}

pub fn wedge2(m: &IntMatrix) -> Result<IntMatrix> {
    numeric::wedge2_int(m)
}

/// Renormalized binary64 iteration of `A^(n)` and `D^(n)` along one orbit.
///
/// Every `k` steps both working matrices are divided by their top-left entry
/// (the largest-magnitude entry when that is zero) and `ln|t|` is added to the
/// matching ledger, so `ln ||M^(n)|| = ln ||M_work|| + ledger`. A working
/// matrix whose entries leave `[2^-256, 2^256]` in between is renormalized the
/// same way immediately; multiplicative algorithms need this.
#[derive(Clone, Debug)]
pub struct CocycleState {
    stepper: FloatStepper,
    x: Vec<f64>,
    a: Vec<f64>,
    dm: Vec<f64>,
    ledger_a: f64,
    ledger_d: f64,
    n: u64,
    k: u64,
    renormalize: bool,
    y: Vec<f64>,
    g: Vec<f64>,
    tmp_a: Vec<f64>,
    tmp_d: Vec<f64>,
    renorm_events: u64,
}

const GUARD_HI: f64 = 1.157_920_892_373_162e77; // 2^256
const GUARD_LO: f64 = 8.636_168_555_094_445e-78; // 2^-256

fn renorm_factor(m: &[f64]) -> Result<f64> {
    if m[0] != 0.0 && m[0].is_finite() {
        return Ok(m[0]);
    }
    let big = m.iter().cloned().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
    if big == 0.0 || !big.is_finite() {
        return Err(Error::Consistency("working matrix is zero or not finite".into()));
    }
    Ok(big)
}

fn max_abs(m: &[f64]) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

impl CocycleState {
    pub fn new(alg: AlgorithmId, x: Vec<f64>, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("renormalization interval must be positive".into()));
        }
        if x.len() != alg.point_len() {
            return Err(Error::Shape(format!("{alg} needs {} coordinates", alg.point_len())));
        }
        let d = alg.dim;
        let m = d + 1;
        Ok(CocycleState {
            stepper: FloatStepper::new(alg),
            x,
            a: FloatMatrix::identity(m).data,
            dm: FloatMatrix::identity(d).data,
            ledger_a: 0.0,
            ledger_d: 0.0,
            n: 0,
            k,
            renormalize: true,
            y: vec![0.0; d],
            g: vec![0.0; m * d],
            tmp_a: vec![0.0; m * m],
            tmp_d: vec![0.0; d * d],
            renorm_events: 0,
        })
    }

    /// Plain product without any renormalization.
    pub fn unnormalized(alg: AlgorithmId, x: Vec<f64>) -> Result<Self> {
        let mut s = CocycleState::new(alg, x, u64::MAX)?;
        s.renormalize = false;
        Ok(s)
    }

    pub fn alg(&self) -> AlgorithmId {
        self.stepper.alg()
    }

    pub fn point(&self) -> &[f64] {
        &self.x
    }

    pub fn steps(&self) -> u64 {
        self.n
    }

    pub fn interval(&self) -> u64 {
        self.k
    }

    pub fn ledger_a(&self) -> f64 {
        self.ledger_a
    }

    pub fn ledger_d(&self) -> f64 {
        self.ledger_d
    }

    pub fn renorm_events(&self) -> u64 {
        self.renorm_events
    }

    pub fn stepper(&self) -> &FloatStepper {
        &self.stepper
    }

    /// Working (scaled) A matrix, row-major.
    pub fn a_work(&self) -> &[f64] {
        &self.a
    }

    /// Working (scaled) D matrix, row-major.
    pub fn d_work(&self) -> &[f64] {
        &self.dm
    }

    pub fn log_norm_a(&self) -> f64 {
        let m = self.alg().matrix_dim();
        numeric::norm_inf_f64(&self.a, m, m).ln() + self.ledger_a
    }

    pub fn log_norm_d(&self) -> f64 {
        let d = self.alg().dim;
        numeric::norm_inf_f64(&self.dm, d, d).ln() + self.ledger_d
    }

    /// `ln max_{i,j} |p_ij - q_i x_j|`.
    pub fn log_max_entry_d(&self) -> f64 {
        max_abs(&self.dm).ln() + self.ledger_d
    }

    /// Advances the orbit by one step.
    #[inline]
    pub fn step(&mut self) -> Result<()> {
        let alg = self.stepper.alg();
        let d = alg.dim;
        let m = d + 1;
        self.stepper.chart(&self.x, &mut self.y);
        self.stepper.step(&mut self.x)?;

        // A <- A(x) A
        self.tmp_a.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, v) in &self.stepper.entries {
            let (dst, src) = (&mut self.tmp_a[i * m..(i + 1) * m], &self.a[j * m..(j + 1) * m]);
            for c in 0..m {
                dst[c] += v * src[c];
            }
        }
        std::mem::swap(&mut self.a, &mut self.tmp_a);

        // D <- Pi A(x) H(y) D; rows 1..d of H(y) D are D, row 0 is -sum y_j D_j.
        for c in 0..d {
            let mut s = 0.0;
            for j in 0..d {
                s += self.y[j] * self.dm[j * d + c];
            }
            self.g[c] = -s;
        }
        self.g[d..].copy_from_slice(&self.dm);
        self.tmp_d.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, v) in &self.stepper.entries {
            if i == 0 {
                continue;
            }
            let (dst, src) = (&mut self.tmp_d[(i - 1) * d..i * d], &self.g[j * d..(j + 1) * d]);
            for c in 0..d {
                dst[c] += v * src[c];
            }
        }
        std::mem::swap(&mut self.dm, &mut self.tmp_d);

        self.n += 1;
        if self.renormalize {
            let scheduled = self.n % self.k == 0;
            if scheduled || out_of_guard(&self.a) {
                self.ledger_a += renorm(&mut self.a)?;
                self.renorm_events += 1;
            }
            if scheduled || out_of_guard(&self.dm) {
                self.ledger_d += renorm(&mut self.dm)?;
                self.renorm_events += 1;
            }
        }
        Ok(())
    }

    pub fn run(&mut self, steps: u64) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }
}

#[inline]
fn out_of_guard(m: &[f64]) -> bool {
    let big = max_abs(m);
    !(GUARD_LO..=GUARD_HI).contains(&big)
}

fn renorm(m: &mut [f64]) -> Result<f64> {
    let t = renorm_factor(m)?;
    m.iter_mut().for_each(|v| *v /= t);
    Ok(t.abs().ln())
}

/// Advances `state` by `steps` steps.
pub fn renorm_iterate(mut state: CocycleState, steps: u64) -> Result<CocycleState> {
    state.run(steps)?;
    Ok(state)
}

/// Running monitor of `||wedge^2 A^(n)|| / ||A^(n)||`, `||D^(n)||` and the
/// two leading singular values of `A^(n)`.
#[derive(Clone, Debug, Serialize)]
pub struct WedgeReport {
    pub steps: u64,
    pub max_wedge_ratio: f64,
    pub max_d_norm: f64,
    /// Largest `|p_ij - q_i x_j|` seen.
    pub max_d_entry: f64,
    pub checkpoints: Vec<WedgeCheckpoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WedgeCheckpoint {
    pub n: u64,
    pub wedge_ratio: f64,
    pub d_norm: f64,
    /// `(1/n) ln sigma_1(A^(n))`.
    pub delta1: f64,
    /// `(1/n) ln sigma_2(A^(n))`.
    pub delta2: f64,
}

/// Drives a [`CocycleState`] and carries `wedge^2 A^(n)` as a separately
/// renormalized cocycle, which avoids the cancellation of forming minors of
/// the scaled A matrix.
#[derive(Clone, Debug)]
pub struct WedgeTracker {
    state: CocycleState,
    w: Vec<f64>,
    tmp: Vec<f64>,
    ledger_w: f64,
    step_dense: Vec<f64>,
    report: WedgeReport,
}

impl WedgeTracker {
    pub fn new(alg: AlgorithmId, x: Vec<f64>, k: u64) -> Result<Self> {
        let m = alg.matrix_dim();
        let p = m * (m - 1) / 2;
        Ok(WedgeTracker {
            state: CocycleState::new(alg, x, k)?,
            w: FloatMatrix::identity(p).data,
            tmp: vec![0.0; p * p],
            ledger_w: 0.0,
            step_dense: vec![0.0; m * m],
            report: WedgeReport {
                steps: 0,
                max_wedge_ratio: 0.0,
                max_d_norm: 0.0,
                max_d_entry: 0.0,
                checkpoints: Vec::new(),
            },
        })
    }

    pub fn state(&self) -> &CocycleState {
        &self.state
    }

    pub fn log_norm_wedge(&self) -> f64 {
        let p = (self.w.len() as f64).sqrt() as usize;
        numeric::norm_inf_f64(&self.w, p, p).ln() + self.ledger_w
    }

    pub fn step(&mut self) -> Result<()> {
        self.state.step()?;
        let m = self.state.alg().matrix_dim();
        let p = m * (m - 1) / 2;
        self.step_dense.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, v) in &self.state.stepper().entries {
            self.step_dense[i * m + j] += v;
        }
        let ws = numeric::wedge2_entries(&self.step_dense, m)?;
        for i in 0..p {
            for c in 0..p {
                let mut s = 0.0;
                for j in 0..p {
                    s += ws[i * p + j] * self.w[j * p + c];
                }
                self.tmp[i * p + c] = s;
            }
        }
        std::mem::swap(&mut self.w, &mut self.tmp);
        if self.state.steps() % self.state.interval() == 0 || out_of_guard(&self.w) {
            self.ledger_w += renorm(&mut self.w)?;
        }

        let n = self.state.steps();
        let ratio = (self.log_norm_wedge() - self.state.log_norm_a()).exp();
        let dn = self.state.log_norm_d().exp();
        let de = self.state.log_max_entry_d().exp();
        let r = &mut self.report;
        r.steps = n;
        r.max_wedge_ratio = r.max_wedge_ratio.max(ratio);
        r.max_d_norm = r.max_d_norm.max(dn);
        r.max_d_entry = r.max_d_entry.max(de);
        if n.is_power_of_two() {
            let sa = numeric::singular_values(&FloatMatrix { rows: m, cols: m, data: self.state.a_work().to_vec() });
            let sw = numeric::singular_values(&FloatMatrix { rows: p, cols: p, data: self.w.clone() });
            let l1 = sa[0].ln() + self.state.ledger_a();
            let l2 = sw[0].ln() + self.ledger_w - l1;
            self.report.checkpoints.push(WedgeCheckpoint {
                n,
                wedge_ratio: ratio,
                d_norm: dn,
                delta1: l1 / n as f64,
                delta2: l2 / n as f64,
            });
        }
        Ok(())
    }

    pub fn run(&mut self, steps: u64) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    pub fn report(&self) -> &WedgeReport {
        &self.report
    }

    pub fn into_report(self) -> WedgeReport {
        self.report
    }
}

/// `ln ||M||_inf` of an exact rational matrix, accurate to about 1e-15
/// relative even when the entries are far outside the binary64 range.
pub fn ln_norm_exact(m: &RationalMatrix) -> f64 {
    let n = m.norm_inf();
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    numeric::ln_rational_approx(&n.abs())
}
