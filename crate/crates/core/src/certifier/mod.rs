//! Certified upper bounds on the second Lyapunov exponent of the Selmer
//! algorithm in dimensions 2 and 3, by exact enumeration of cylinders.
//!
//! A cylinder of depth n is indexed by a word `b_0 ... b_{n-1}` over the two
//! Selmer branches. With `P = M_{b_{n-1}} ... M_{b_0}` its vertices are
//! `kappa(v P)` for the homogeneous base vertices `v`, and
//!
//! ```text
//! lambda_2 <= (1/n) sum_cyl mu(cyl) * max_{vertices} ln ||D^(n)||_inf.
//! ```

pub mod directed;
mod fast;
mod oracle;

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algorithms::{branch_matrix, AlgorithmId, AlgorithmKind, BranchId, Letter};
use crate::cocycle::d_matrix;
use crate::error::{Error, Result};
use crate::geometry::{iota, kappa, simplex_volume, ExactPoint, Simplex, SimplexPoint};
use crate::numeric::{rat, IntMatrix, Rational, RationalMatrix};

pub use directed::{DirectedFloat, Direction, Interval};
pub use oracle::{oracle_recompute, volume_sum, OracleReport, ORACLE_BITS};

/// Default prefix depth at which the word tree is split into tasks.
pub const DEFAULT_SPLIT_DEPTH: usize = 8;
/// Depth limit of the high-precision oracle.
pub const ORACLE_MAX_DEPTH: usize = 16;

pub(crate) fn selmer(dim: usize) -> Result<AlgorithmId> {
    if !(2..=3).contains(&dim) {
        return Err(Error::Config(format!("certification is implemented for d = 2, 3, not d = {dim}")));
    }
    AlgorithmId::new(AlgorithmKind::Selmer, dim)
}

/// Homogeneous integer representatives of the base simplex vertices.
pub(crate) fn base_rows(dim: usize) -> Result<Vec<Vec<i64>>> {
    selmer(dim)?;
    Ok(match dim {
        2 => vec![vec![1, 1, 1], vec![1, 1, 0], vec![2, 1, 1]],
        _ => vec![vec![1, 1, 1, 1], vec![1, 1, 1, 0], vec![2, 2, 1, 1], vec![2, 1, 1, 1]],
    })
}

/// Hull of the Selmer absorbing set.
pub fn base_simplex(dim: usize) -> Result<Simplex> {
    let rows = base_rows(dim)?;
    let verts = rows
        .iter()
        .map(|r| kappa(&r.iter().map(|&v| rat(v, 1)).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Simplex::new(verts))
}

pub(crate) fn letter_matrix(dim: usize, l: Letter) -> Result<IntMatrix> {
    branch_matrix(selmer(dim)?, &BranchId::Selmer(l))
}

/// Cylinder of a word over the Selmer branches.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder {
    pub word: Vec<Letter>,
    /// `M_{b_{n-1}} ... M_{b_0}`.
    pub matrix: IntMatrix,
    pub vertices: Vec<ExactPoint>,
    pub volume: Rational,
    /// Some vertex has a zero coordinate.
    pub singular: bool,
}

impl Cylinder {
    pub fn from_word(dim: usize, word: &[Letter]) -> Result<Cylinder> {
        let alg = selmer(dim)?;
        let mats = [letter_matrix(dim, Letter::A)?, letter_matrix(dim, Letter::B)?];
        let mut p = IntMatrix::identity(dim + 1);
        for &l in word {
            p = &mats[l as usize] * &p;
        }
        Self::from_matrix(alg, word.to_vec(), p)
    }

    fn from_matrix(alg: AlgorithmId, word: Vec<Letter>, matrix: IntMatrix) -> Result<Cylinder> {
        let base = base_simplex(alg.dim)?;
        let pm = RationalMatrix::from_int(&matrix);
        let vertices = base
            .vertices
            .iter()
            .map(|v| Ok(SimplexPoint::new(kappa(&pm.left_apply(&iota(v))?)?, alg.domain())))
            .collect::<Result<Vec<_>>>()?;
        let simplex = Simplex::new(vertices.iter().map(|p| p.coords.clone()).collect());
        let volume = simplex_volume(&simplex)?;
        let singular = vertices.iter().any(|p| p.coords.iter().any(|c| c.is_zero()));
        Ok(Cylinder { word, matrix, vertices, volume, singular })
    }

    pub fn simplex(&self) -> Simplex {
        Simplex::new(self.vertices.iter().map(|p| p.coords.clone()).collect())
    }

    pub fn word_string(&self) -> String {
        self.word.iter().map(|l| l.to_string()).collect()
    }
}

/// Depth-first stream of all cylinders of a given depth, words in
/// lexicographic order (`a < b`).
pub struct CylinderIter {
    alg: AlgorithmId,
    depth: usize,
    mats: [IntMatrix; 2],
    stack: Vec<(Vec<Letter>, IntMatrix)>,
}

impl Iterator for CylinderIter {
    type Item = Result<Cylinder>;

    fn next(&mut self) -> Option<Self::Item> {
        while let Some((word, p)) = self.stack.pop() {
            if word.len() == self.depth {
                return Some(Cylinder::from_matrix(self.alg, word, p));
            }
            for l in [Letter::B, Letter::A] {
                let mut w = word.clone();
                w.push(l);
                self.stack.push((w, &self.mats[l as usize] * &p));
            }
        }
        None
    }
}

pub fn enumerate_cylinders(dim: usize, depth: usize) -> Result<CylinderIter> {
    let alg = selmer(dim)?;
    if depth == 0 {
        return Err(Error::Config("cylinder depth must be at least 1".into()));
    }
    Ok(CylinderIter {
        alg,
        depth,
        mats: [letter_matrix(dim, Letter::A)?, letter_matrix(dim, Letter::B)?],
        stack: vec![(Vec::new(), IntMatrix::identity(dim + 1))],
    })
}

/// Maximum over the vertices of `||D^(n)||_inf`, and its logarithm rounded up.
pub fn cylinder_weight(c: &Cylinder) -> Result<(Rational, DirectedFloat)> {
    let mut best: Option<Rational> = None;
    for v in &c.vertices {
        let n = d_matrix(&c.matrix, &v.coords)?.norm_inf();
        if best.as_ref().map_or(true, |b| n > *b) {
            best = Some(n);
        }
    }
    let best = best.ok_or_else(|| Error::Shape("cylinder without vertices".into()))?;
    if !best.is_positive() {
        return Err(Error::Consistency(format!("zero D-norm on cylinder {}", c.word_string())));
    }
    let ln = directed::ln_ratio_big(best.numer(), best.denom())?;
    Ok((best, DirectedFloat::up(ln.hi)))
}

/// Density constant `c_d`, enclosed.
pub fn density_constant(dim: usize) -> Result<Interval> {
    match dim {
        2 => Ok(directed::C2),
        3 => Ok(directed::C3),
        _ => Err(Error::Config(format!("no invariant density for d = {dim}"))),
    }
}

/// Exact factors `prod_i 1/max_k x_i` and `prod_i 1/min_k x_i` (None if some
/// minimum is zero).
pub(crate) fn density_extremes(vertices: &[ExactPoint]) -> (Rational, Option<Rational>) {
    let d = vertices[0].coords.len();
    let mut lo = Rational::one();
    let mut hi = Some(Rational::one());
    for i in 0..d {
        let col = vertices.iter().map(|v| &v.coords[i]);
        let max = col.clone().max().expect("vertices").clone();
        let min = col.min().expect("vertices").clone();
        lo /= max;
        hi = hi.and_then(|h| if min.is_zero() { None } else { Some(h / min) });
    }
    (lo, hi)
}

/// Bounds on the invariant measure of a cylinder from the density
/// `c_d / (x_1 ... x_d)` on the base simplex.
pub fn measure_bounds(c: &Cylinder, dim: usize) -> Result<(DirectedFloat, DirectedFloat)> {
    let cd = density_constant(dim)?;
    let (lo, hi) = density_extremes(&c.vertices);
    let lo_iv = rational_interval(&(lo * &c.volume));
    let lower = directed::mul_dir(cd.lo, lo_iv.lo, Direction::Down);
    let upper = match hi {
        Some(h) => directed::mul_dir(cd.hi, rational_interval(&(h * &c.volume)).hi, Direction::Up),
        None => f64::INFINITY,
    };
    Ok((DirectedFloat::down(lower), DirectedFloat::up(upper)))
}

/// Enclosure of a nonnegative rational.
pub(crate) fn rational_interval(r: &Rational) -> Interval {
    directed::bigint_interval(r.numer()).div_pos(directed::bigint_interval(r.denom()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermClass {
    /// Weight >= 0, nonsingular.
    SigmaPlus,
    /// Weight < 0.
    SigmaMinus,
    /// Weight >= 0 and singular.
    SingularPlus,
}

pub fn classify(weight_is_negative: bool, singular: bool) -> TermClass {
    match (weight_is_negative, singular) {
        (true, _) => TermClass::SigmaMinus,
        (false, false) => TermClass::SigmaPlus,
        (false, true) => TermClass::SingularPlus,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub sigma_plus: u64,
    pub sigma_minus: u64,
    pub singular_plus: u64,
    /// Subtrees closed by aggregation.
    pub aggregated: u64,
}

impl ClassCounts {
    pub(crate) fn record(&mut self, c: TermClass) {
        match c {
            TermClass::SigmaPlus => self.sigma_plus += 1,
            TermClass::SigmaMinus => self.sigma_minus += 1,
            TermClass::SingularPlus => self.singular_plus += 1,
        }
    }

    pub(crate) fn merge(&mut self, o: &ClassCounts) {
        self.sigma_plus += o.sigma_plus;
        self.sigma_minus += o.sigma_minus;
        self.singular_plus += o.singular_plus;
        self.aggregated += o.aggregated;
    }
}

/// Treatment of nonnegative-weight cylinders whose density is unbounded.
#[derive(Clone, Debug, PartialEq)]
pub enum SingularPolicy {
    /// Pooled measure bounded by `1 - sum of lower bounds of all other terms`.
    Complement,
    /// Externally certified bound on the pooled measure.
    External { measure: f64, provenance: String },
}

impl SingularPolicy {
    pub fn external(measure: &str, provenance: &str) -> Result<Self> {
        if provenance.trim().is_empty() {
            return Err(Error::Config("an external singular measure needs a provenance".into()));
        }
        let m = directed::parse_decimal_up(measure)?;
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::Config(format!("singular measure {measure} is not in [0, 1]")));
        }
        Ok(SingularPolicy::External { measure: m, provenance: provenance.to_string() })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            SingularPolicy::Complement => "complement-bound",
            SingularPolicy::External { .. } => "external-value",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub split_depth: usize,
    /// Worker threads; None uses the global pool.
    pub threads: Option<usize>,
    /// Close subtrees whose density-weighted volume bound is below this.
    pub aggregate: Option<f64>,
    pub singular: SingularPolicy,
    pub timing: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            split_depth: DEFAULT_SPLIT_DEPTH,
            threads: None,
            aggregate: None,
            singular: SingularPolicy::Complement,
            timing: false,
        }
    }
}

pub const ROUNDING_TAG: &str = "binary64 round-to-nearest with error-free residual and one-step outward correction";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub algorithm: String,
    pub dim: usize,
    pub depth: usize,
    /// Proven upper bound on lambda_2.
    pub bound: f64,
    /// `depth * bound` before the final division, rounded up.
    pub inner_sum: f64,
    pub sigma_minus_sum: f64,
    pub sigma_plus_sum: f64,
    pub singular_sum: f64,
    pub class_counts: ClassCounts,
    pub singular_policy: String,
    pub singular_measure: f64,
    pub provenance: String,
    pub density: String,
    pub aggregate_threshold: Option<f64>,
    pub rounding: String,
    pub checksum_num: String,
    pub checksum_den: String,
    pub elapsed_s: f64,
    pub tasks: usize,
}

/// Checks the depth/dimension preconditions shared by `certify` and the oracle.
pub(crate) fn check_request(dim: usize, depth: usize) -> Result<()> {
    selmer(dim)?;
    if depth == 0 || depth % 2 != 0 {
        return Err(Error::Config(format!("depth must be even and positive, got {depth}")));
    }
    Ok(())
}

/// Exact maximum of `||D^(1)||_inf` over the base simplex.
pub fn step_growth(dim: usize) -> Result<Rational> {
    let mut best = Rational::zero();
    for c in enumerate_cylinders(dim, 1)? {
        let (n, _) = cylinder_weight(&c?)?;
        best = best.max(n);
    }
    Ok(best)
}

pub fn certify(dim: usize, depth: usize, opts: &CertifyOptions) -> Result<Certificate> {
    check_request(dim, depth)?;
    let start = Instant::now();
    let run = || fast::run(dim, depth, opts);
    let out = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let checksum = base_simplex(dim)?.volume()?;
    let (measure, provenance) = match &opts.singular {
        SingularPolicy::Complement => (out.pool_measure, String::new()),
        SingularPolicy::External { measure, provenance } => (*measure, provenance.clone()),
    };
    Ok(Certificate {
        algorithm: "selmer".into(),
        dim,
        depth,
        bound: out.bound,
        inner_sum: out.inner,
        sigma_minus_sum: out.neg,
        sigma_plus_sum: out.pos,
        singular_sum: out.singular,
        class_counts: out.counts,
        singular_policy: opts.singular.tag().into(),
        singular_measure: measure,
        provenance,
        density: format!("c_{dim} / (x_1 ... x_{dim}) with all {dim} factors"),
        aggregate_threshold: opts.aggregate,
        rounding: ROUNDING_TAG.into(),
        checksum_num: checksum.numer().to_string(),
        checksum_den: checksum.denom().to_string(),
        elapsed_s: if opts.timing { start.elapsed().as_secs_f64() } else { 0.0 },
        tasks: out.tasks,
    })
}

/// `true` if the f64 value is at least the rational `num / 2^bits`.
pub(crate) fn f64_at_least_fixed(v: f64, num: &BigInt, bits: u64) -> bool {
    let r = crate::numeric::rat_from_f64(v);
    r >= Rational::new(num.clone(), BigInt::one() << bits)
}

/// Aggregation rule shared by the fast path and the oracle: the
/// nonsingular node with homogeneous vertex rows `w` is closed when
/// `prod_i max_k(w_k0 / w_ki) * volume` is below `tau`.
pub(crate) fn aggregate_closes(w: &[[i128; 4]], n: usize, det_v: i128, fact: i128, tau: f64) -> bool {
    let mut r = det_v as f64 / fact as f64;
    for row in w.iter().take(n) {
        r /= row[0] as f64;
    }
    for i in 1..n {
        let mut m = 0.0f64;
        for row in w.iter().take(n) {
            if row[i] == 0 {
                return false;
            }
            m = m.max(row[0] as f64 / row[i] as f64);
        }
        r *= m;
    }
    r < tau
}

pub(crate) fn to_i128(v: &BigInt) -> Result<i128> {
    v.to_i128().ok_or(Error::Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_from_f64;
    use Letter::{A, B};

    fn pt(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    #[test]
    fn base_simplex_volumes() {
        let b2 = base_simplex(2).unwrap();
        assert_eq!(b2.vertices, vec![pt(&[(1, 1), (1, 1)]), pt(&[(1, 1), (0, 1)]), pt(&[(1, 2), (1, 2)])]);
        assert_eq!(b2.volume().unwrap(), rat(1, 4));
        let b3 = base_simplex(3).unwrap();
        assert_eq!(b3.vertices[2], pt(&[(1, 1), (1, 2), (1, 2)]));
        assert_eq!(b3.vertices[3], pt(&[(1, 2), (1, 2), (1, 2)]));
        // Depth-1 cylinders are the two halves of the absorbing set.
        for d in [2, 3] {
            let cyl: Vec<Cylinder> = enumerate_cylinders(d, 1).unwrap().map(|c| c.unwrap()).collect();
            assert_eq!(cyl.len(), 2);
            let total: Rational = cyl.iter().map(|c| c.volume.clone()).sum();
            assert_eq!(total, base_simplex(d).unwrap().volume().unwrap());
        }
        let cyl: Vec<Cylinder> = enumerate_cylinders(2, 1).unwrap().map(|c| c.unwrap()).collect();
        assert_eq!(cyl[0].volume, rat(1, 8));
        assert_eq!(cyl[1].volume, rat(1, 8));
        assert!(base_simplex(4).is_err());
    }

    #[test]
    fn depth_one_cylinders_are_branch_regions() {
        let alg = selmer(2).unwrap();
        for c in enumerate_cylinders(2, 1).unwrap() {
            let c = c.unwrap();
            // Centroid lies in the open cylinder; its branch is the word letter.
            let mut g = vec![Rational::zero(); 2];
            for v in &c.vertices {
                for (gi, vi) in g.iter_mut().zip(&v.coords) {
                    *gi += vi / rat(3, 1);
                }
            }
            let b = crate::algorithms::branch(alg, &SimplexPoint::new(g, alg.domain())).unwrap();
            assert_eq!(b, BranchId::Selmer(c.word[0]));
        }
    }

    #[test]
    fn worked_cylinder() {
        let c = Cylinder::from_word(2, &[B, A, B, A]).unwrap();
        assert_eq!(c.matrix, IntMatrix::from_rows(&[vec![1, 0, 0], vec![2, 2, 1], vec![1, 1, 1]]));
        let mut verts: Vec<Vec<Rational>> = c.vertices.iter().map(|v| v.coords.clone()).collect();
        verts.sort();
        assert_eq!(verts, vec![pt(&[(3, 5), (2, 5)]), pt(&[(2, 3), (1, 3)]), pt(&[(3, 4), (1, 2)])]);
        let n = d_matrix(&c.matrix, &verts[2]).unwrap().norm_inf();
        assert_eq!(n, rat(3, 4));
        // The other two corners have norm 1, which is the vertex maximum.
        let others: Vec<Rational> = verts[..2].iter().map(|v| d_matrix(&c.matrix, v).unwrap().norm_inf()).collect();
        assert_eq!(others, vec![Rational::one(), Rational::one()]);
        let (w, ln) = cylinder_weight(&c).unwrap();
        assert_eq!(w, Rational::one());
        assert_eq!(ln.value, 0.0);
        let (w, ln) = cylinder_weight(&Cylinder::from_word(2, &[A, A, A, A]).unwrap()).unwrap();
        assert_eq!(w, Rational::one());
        assert_eq!(ln.value, 0.0);
        assert_eq!(c.word_string(), "baba");
        assert!(!c.singular);
    }

    #[test]
    fn depth_two_weights_vanish() {
        for c in enumerate_cylinders(2, 2).unwrap() {
            let (w, ln) = cylinder_weight(&c.unwrap()).unwrap();
            assert_eq!(w, Rational::one());
            assert_eq!(ln.value, 0.0);
        }
    }

    #[test]
    fn measure_bounds_examples() {
        let c = Cylinder::from_word(2, &[A]).unwrap();
        let (lo, hi) = measure_bounds(&c, 2).unwrap();
        // The a-half has vertices (1,1), (1,0), (1/2,1/2) or a subset thereof;
        // both factors 1/max x_i equal 1.
        let (f, _) = density_extremes(&c.vertices);
        assert_eq!(f, Rational::one());
        assert!(rat_from_f64(lo.value) <= rat_from_f64(directed::C2.lo) * &c.volume);
        assert!(lo.value > directed::C2.lo / 8.0 * (1.0 - 1e-15));
        assert!(lo.value <= hi.value);
        let sb = Cylinder::from_word(3, &[B; 6]).unwrap();
        assert!(sb.singular);
        let (_, hi) = measure_bounds(&sb, 3).unwrap();
        assert_eq!(hi.value, f64::INFINITY);
        for c in enumerate_cylinders(3, 4).unwrap() {
            let c = c.unwrap();
            let (lo, hi) = measure_bounds(&c, 3).unwrap();
            assert!(lo.value <= hi.value);
        }
    }

    #[test]
    fn grid_oracle_convexity() {
        // Interior rational points never exceed the vertex maximum.
        for c in enumerate_cylinders(2, 6).unwrap().step_by(5) {
            let c = c.unwrap();
            let (wmax, _) = cylinder_weight(&c).unwrap();
            let m = 10i64;
            for i in 0..=m {
                for j in 0..=(m - i) {
                    let l = [rat(i, m), rat(j, m), rat(m - i - j, m)];
                    let mut p = vec![Rational::zero(); 2];
                    for (lk, v) in l.iter().zip(&c.vertices) {
                        for (pi, vi) in p.iter_mut().zip(&v.coords) {
                            *pi += lk * vi;
                        }
                    }
                    assert!(d_matrix(&c.matrix, &p).unwrap().norm_inf() <= wmax);
                }
            }
        }
    }

    #[test]
    fn step_growth_values() {
        assert_eq!(step_growth(2).unwrap(), rat(2, 1));
        assert_eq!(step_growth(3).unwrap(), rat(3, 1));
    }

    #[test]
    fn request_validation() {
        assert!(check_request(2, 3).is_err());
        assert!(check_request(2, 0).is_err());
        assert!(check_request(4, 2).is_err());
        assert!(check_request(3, 4).is_ok());
        assert!(SingularPolicy::external("0.1", "").is_err());
        assert!(SingularPolicy::external("2", "x").is_err());
        assert!(classify(true, true) == TermClass::SigmaMinus);
    }

    fn opts() -> CertifyOptions {
        CertifyOptions::default()
    }

    #[test]
    fn shallow_certificates() {
        let c2 = certify(2, 2, &opts()).unwrap();
        assert_eq!(c2.bound, 0.0);
        let o2 = oracle_recompute(2, 2, &opts()).unwrap();
        assert_eq!((o2.bound_lo, o2.bound_hi), (0.0, 0.0));
        o2.check(&c2, 1e-6).unwrap();
        // Every depth-4 cylinder has a vertex with norm 1, so the vertex
        // maximum is 1 throughout and the bound is exactly 0.
        let c4 = certify(2, 4, &opts()).unwrap();
        assert_eq!(c4.bound, 0.0);
        assert_eq!(c4.class_counts.sigma_minus, 0);
        assert_eq!(c4.checksum_num, "1");
        assert_eq!(c4.checksum_den, "4");
        assert!(certify(2, 3, &opts()).is_err());
        assert!(certify(4, 2, &opts()).is_err());
    }

    #[test]
    fn fast_path_against_oracle() {
        for (d, depth) in [(2, 8), (3, 4), (3, 6)] {
            let c = certify(d, depth, &opts()).unwrap();
            let o = oracle_recompute(d, depth, &opts()).unwrap();
            o.check(&c, 1e-6).unwrap();
            assert!(rat_from_f64(c.bound) >= o.bound_hi_exact());
        }
        let c = certify(2, 8, &opts()).unwrap();
        assert!(c.bound < -0.01);
        assert_eq!(c.class_counts.sigma_minus + c.class_counts.sigma_plus + c.class_counts.singular_plus, 256);
    }

    #[test]
    fn aggregation_against_oracle() {
        let o = CertifyOptions { aggregate: Some(1e-3), ..opts() };
        let c = certify(3, 10, &o).unwrap();
        assert!(c.class_counts.aggregated > 0);
        oracle_recompute(3, 10, &o).unwrap().check(&c, 1e-6).unwrap();
        // Aggregation only loosens the bound.
        let full = certify(3, 10, &opts()).unwrap();
        assert!(c.bound >= full.bound);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let one = certify(2, 12, &CertifyOptions { threads: Some(1), ..opts() }).unwrap();
        let three = certify(2, 12, &CertifyOptions { threads: Some(3), ..opts() }).unwrap();
        assert_eq!(one, three);
        assert_eq!(one.tasks, 256);
        assert_eq!(one.elapsed_s, 0.0);
    }

    #[test]
    fn external_singular_measure() {
        let ext = SingularPolicy::external("0.25", "test").unwrap();
        let o = CertifyOptions { singular: ext, ..opts() };
        let c = certify(3, 4, &o).unwrap();
        assert_eq!(c.singular_policy, "external-value");
        assert_eq!(c.provenance, "test");
        assert_eq!(c.singular_measure, 0.25);
        // The all-b cylinder has weight ln 3.
        assert!(c.singular_sum >= 0.25 * 3f64.ln() && c.singular_sum < 0.25 * 3f64.ln() + 1e-15);
        oracle_recompute(3, 4, &o).unwrap().check(&c, 1e-6).unwrap();
    }
}
