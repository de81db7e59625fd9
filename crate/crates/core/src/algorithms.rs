//! Branch selection, branch matrices and one projective step for the
//! Selmer, Cassaigne, Brun, Jacobi-Perron, intermediate and Garrity maps.
//!
//! Every map here is written as `x ∝ T(x) · A(x)` on homogeneous row vectors.
//! The branch logic is generic over [`Scalar`] so that the exact rational path
//! and the binary64 path of the estimator share one implementation.
//!
//! Boundary ties resolve to the lexicographically smaller branch label.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{iota, Domain, ExactPoint, SimplexPoint};
use crate::numeric::{IntMatrix, Rational};

/// Number types the branch logic runs on.
pub trait Scalar:
    Clone + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn floor(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Scalar for f64 {
    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    #[inline]
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn floor(&self) -> Self {
        Rational::floor(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Selmer,
    Cassaigne,
    Brun,
    JacobiPerron,
    Intermediate,
    Garrity,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 6] = [
        AlgorithmKind::Selmer,
        AlgorithmKind::Cassaigne,
        AlgorithmKind::Brun,
        AlgorithmKind::JacobiPerron,
        AlgorithmKind::Intermediate,
        AlgorithmKind::Garrity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Selmer => "selmer",
            AlgorithmKind::Cassaigne => "cassaigne",
            AlgorithmKind::Brun => "brun",
            AlgorithmKind::JacobiPerron => "jacobi_perron",
            AlgorithmKind::Intermediate => "intermediate",
            AlgorithmKind::Garrity => "garrity",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "selmer" => Ok(AlgorithmKind::Selmer),
            "cassaigne" => Ok(AlgorithmKind::Cassaigne),
            "brun" => Ok(AlgorithmKind::Brun),
            "jacobi_perron" | "jp" => Ok(AlgorithmKind::JacobiPerron),
            "intermediate" => Ok(AlgorithmKind::Intermediate),
            "garrity" | "triangle" => Ok(AlgorithmKind::Garrity),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// An algorithm together with its dimension d (the number of projective
/// coordinates; matrices are (d+1)x(d+1)).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgorithmId {
    pub kind: AlgorithmKind,
    pub dim: usize,
}

impl AlgorithmId {
    pub fn new(kind: AlgorithmKind, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Config(format!("dimension must be at least 2, got {dim}")));
        }
        if kind == AlgorithmKind::Cassaigne && dim != 2 {
            return Err(Error::Config("the Cassaigne algorithm is only defined for d = 2".into()));
        }
        Ok(AlgorithmId { kind, dim })
    }

    pub fn domain(&self) -> Domain {
        match self.kind {
            AlgorithmKind::JacobiPerron => Domain::UnitCube,
            AlgorithmKind::Cassaigne => Domain::CassaigneTriangle,
            _ => Domain::OrderedSimplex,
        }
    }

    /// Number of coordinates of a domain point.
    pub fn point_len(&self) -> usize {
        match self.kind {
            AlgorithmKind::Cassaigne => self.dim + 1,
            _ => self.dim,
        }
    }

    pub fn matrix_dim(&self) -> usize {
        self.dim + 1
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (d={})", self.kind, self.dim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Letter {
    A,
    B,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::A => "a",
            Letter::B => "b",
        })
    }
}

/// Algorithm-specific branch label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BranchId {
    Selmer(Letter),
    Cassaigne(Letter),
    /// Position k of `1 - x_1` in the reordered vector.
    Brun(usize),
    /// Partial quotients `(a_0; a_2, ..., a_d)`.
    JacobiPerron { a0: BigInt, rest: Vec<BigInt> },
    Intermediate { k: usize, l: usize },
    /// `k <= d - 2` reuses the intermediate branches; `k = d - 1` is the
    /// division branch with unbounded `l`.
    Garrity { k: usize, l: BigInt },
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchId::Selmer(l) | BranchId::Cassaigne(l) => write!(f, "{l}"),
            BranchId::Brun(k) => write!(f, "{k}"),
            BranchId::JacobiPerron { a0, rest } => {
                let r: Vec<String> = rest.iter().map(|v| v.to_string()).collect();
                write!(f, "({a0}; {})", r.join(", "))
            }
            BranchId::Intermediate { k, l } => write!(f, "({k},{l})"),
            BranchId::Garrity { k, l } => write!(f, "({k},{l})"),
        }
    }
}

/// Result of one exact step.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchStep {
    pub branch: BranchId,
    pub matrix: IntMatrix,
    pub next: ExactPoint,
}

/// Shape of a branch, independent of the number type. Quotients (JP partial
/// quotients, the Garrity multiplier) live in a side buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Move {
    /// `r = 1 - (x_lo + ... + x_hi)` is inserted into the ordered list at
    /// homogeneous index `pos` (index 0 is the new leading coordinate).
    Insert { lo: usize, hi: usize, pos: usize },
    /// `(x_1, ..., x_d, 1 - x_1 - ... - x_{d-1} - l x_d)`, `l = quot[0]`.
    GarrityTail,
    /// Partial quotients in `quot`: `[a_0, a_2, ..., a_d]`.
    JacobiPerron,
    Cassaigne(Letter),
}

/// Coefficient emitted for a matrix entry.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Coef {
    One,
    Quot(usize),
}

#[inline]
fn insert_index(j: usize, pos: usize) -> usize {
    if j <= pos {
        j - 1
    } else {
        j
    }
}

/// Calls `f(row, col, coef)` for every nonzero entry of the branch matrix.
#[inline]
pub(crate) fn emit_entries(d: usize, mv: Move, mut f: impl FnMut(usize, usize, Coef)) {
    match mv {
        Move::Insert { lo, hi, pos } => {
            f(pos, 0, Coef::One);
            for j in lo..=hi {
                f(insert_index(j, pos), 0, Coef::One);
            }
            for j in 1..=d {
                f(insert_index(j, pos), j, Coef::One);
            }
        }
        Move::GarrityTail => {
            for i in 0..d - 1 {
                f(i, 0, Coef::One);
            }
            f(d - 1, 0, Coef::Quot(0));
            f(d, 0, Coef::One);
            for j in 1..=d {
                f(j - 1, j, Coef::One);
            }
        }
        Move::JacobiPerron => {
            f(0, 0, Coef::Quot(0));
            f(0, 1, Coef::One);
            for j in 2..=d {
                f(0, j, Coef::Quot(j - 1));
            }
            for i in 1..d {
                f(i, i + 1, Coef::One);
            }
            f(d, 0, Coef::One);
        }
        Move::Cassaigne(Letter::A) => {
            f(0, 0, Coef::One);
            f(1, 0, Coef::One);
            f(1, 2, Coef::One);
            f(2, 1, Coef::One);
        }
        Move::Cassaigne(Letter::B) => {
            f(0, 1, Coef::One);
            f(1, 0, Coef::One);
            f(1, 2, Coef::One);
            f(2, 2, Coef::One);
        }
    }
}

/// Decides the branch at `x`. `strict` enables the exact-mode checks that the
/// binary64 path skips (Selmer absorbing-set membership).
pub(crate) fn select_move<T: Scalar>(
    alg: AlgorithmId,
    x: &[T],
    quot: &mut Vec<T>,
    strict: bool,
) -> Result<Move> {
    let d = alg.dim;
    quot.clear();
    match alg.kind {
        AlgorithmKind::Selmer => {
            let xd = x[d - 1].clone();
            let xd1 = x[d - 2].clone();
            if strict && xd1 + xd.clone() < T::one() {
                return Err(Error::NotAbsorbing);
            }
            let pos = if xd.clone() + xd >= T::one() { d } else { d - 1 };
            Ok(Move::Insert { lo: d, hi: d, pos })
        }
        AlgorithmKind::Brun => {
            let r = T::one() - x[0].clone();
            let pos = x.iter().filter(|v| **v > r).count();
            Ok(Move::Insert { lo: 1, hi: 1, pos })
        }
        AlgorithmKind::Intermediate | AlgorithmKind::Garrity => {
            // k = number of prefix sums strictly below 1.
            let mut s = T::zero();
            let mut k = 0;
            for v in x.iter() {
                let t = s.clone() + v.clone();
                if t < T::one() {
                    s = t;
                    k += 1;
                } else {
                    break;
                }
            }
            if k == 0 {
                // x_1 = 1: the remainder is zero; treat as k = 1.
                k = 1;
                s = x[0].clone();
            }
            if alg.kind == AlgorithmKind::Garrity && k >= d - 1 {
                let head: T = x[..d - 1].iter().cloned().fold(T::zero(), |a, b| a + b);
                let xd = x[d - 1].clone();
                if xd.is_zero() {
                    return Err(Error::Terminates);
                }
                quot.push(((T::one() - head) / xd).floor());
                return Ok(Move::GarrityTail);
            }
            let r = T::one() - s;
            let pos = x.iter().filter(|v| **v > r).count();
            Ok(Move::Insert { lo: 1, hi: k, pos })
        }
        AlgorithmKind::JacobiPerron => {
            let x1 = x[0].clone();
            if x1.is_zero() {
                return Err(Error::Terminates);
            }
            quot.push((T::one() / x1.clone()).floor());
            for v in &x[1..] {
                quot.push((v.clone() / x1.clone()).floor());
            }
            Ok(Move::JacobiPerron)
        }
        AlgorithmKind::Cassaigne => {
            let letter = if x[0] >= x[2] { Letter::A } else { Letter::B };
            Ok(Move::Cassaigne(letter))
        }
    }
}

/// Writes `T(x)` into `out` for a previously selected move.
#[inline]
pub(crate) fn apply_move<T: Scalar>(d: usize, mv: Move, quot: &[T], x: &[T], out: &mut [T]) {
    match mv {
        Move::Insert { lo, hi, pos } => {
            let mut r = T::one();
            for v in &x[lo - 1..hi] {
                r = r - v.clone();
            }
            // z_0: the new leading coordinate.
            let z0 = if pos == 0 { r.clone() } else { x[0].clone() };
            for i in 1..=d {
                let zi = if i < pos {
                    x[i].clone()
                } else if i == pos {
                    r.clone()
                } else {
                    x[i - 1].clone()
                };
                out[i - 1] = zi / z0.clone();
            }
        }
        Move::GarrityTail => {
            let x1 = x[0].clone();
            let mut r = T::one();
            for v in &x[..d - 1] {
                r = r - v.clone();
            }
            r = r - quot[0].clone() * x[d - 1].clone();
            for i in 0..d - 1 {
                out[i] = x[i + 1].clone() / x1.clone();
            }
            out[d - 1] = r / x1;
        }
        Move::JacobiPerron => {
            let x1 = x[0].clone();
            for i in 0..d - 1 {
                out[i] = x[i + 1].clone() / x1.clone() - quot[i + 1].clone();
            }
            out[d - 1] = T::one() / x1 - quot[0].clone();
        }
        Move::Cassaigne(letter) => {
            let (y0, y1, y2) = match letter {
                Letter::A => (x[0].clone() - x[2].clone(), x[2].clone(), x[1].clone()),
                Letter::B => (x[1].clone(), x[0].clone(), x[2].clone() - x[0].clone()),
            };
            let s = y0.clone() + y1.clone() + y2.clone();
            out[0] = y0 / s.clone();
            out[1] = y1 / s.clone();
            out[2] = y2 / s;
        }
    }
}

fn to_bigint(v: &Rational) -> BigInt {
    v.to_integer()
}

fn move_to_branch(alg: AlgorithmId, mv: Move, quot: &[Rational]) -> BranchId {
    let d = alg.dim;
    match (alg.kind, mv) {
        (AlgorithmKind::Selmer, Move::Insert { pos, .. }) => {
            BranchId::Selmer(if pos == d { Letter::A } else { Letter::B })
        }
        (AlgorithmKind::Brun, Move::Insert { pos, .. }) => BranchId::Brun(pos),
        (AlgorithmKind::Intermediate, Move::Insert { hi, pos, .. }) => BranchId::Intermediate { k: hi, l: pos },
        (AlgorithmKind::Garrity, Move::Insert { hi, pos, .. }) => BranchId::Garrity { k: hi, l: BigInt::from(pos) },
        (AlgorithmKind::Garrity, Move::GarrityTail) => BranchId::Garrity { k: d - 1, l: to_bigint(&quot[0]) },
        (AlgorithmKind::JacobiPerron, Move::JacobiPerron) => BranchId::JacobiPerron {
            a0: to_bigint(&quot[0]),
            rest: quot[1..].iter().map(to_bigint).collect(),
        },
        (AlgorithmKind::Cassaigne, Move::Cassaigne(l)) => BranchId::Cassaigne(l),
        _ => unreachable!("move does not belong to {alg}"),
    }
}

fn invalid(alg: AlgorithmId, b: &BranchId) -> Error {
    Error::InvalidBranch(format!("{b} for {alg}"))
}

/// Recovers the move shape and quotients of a branch label, validating ranges.
pub(crate) fn branch_to_move(alg: AlgorithmId, b: &BranchId) -> Result<(Move, Vec<BigInt>)> {
    let d = alg.dim;
    let bad = || invalid(alg, b);
    let out = match (alg.kind, b) {
        (AlgorithmKind::Selmer, BranchId::Selmer(l)) => {
            let pos = if *l == Letter::A { d } else { d - 1 };
            (Move::Insert { lo: d, hi: d, pos }, vec![])
        }
        (AlgorithmKind::Cassaigne, BranchId::Cassaigne(l)) => (Move::Cassaigne(*l), vec![]),
        (AlgorithmKind::Brun, BranchId::Brun(k)) if *k <= d => (Move::Insert { lo: 1, hi: 1, pos: *k }, vec![]),
        (AlgorithmKind::Intermediate, BranchId::Intermediate { k, l }) => {
            let ok = (1..d).contains(k) && (*k..=d).contains(l) || *k == d && *l <= d;
            if !ok {
                return Err(bad());
            }
            (Move::Insert { lo: 1, hi: *k, pos: *l }, vec![])
        }
        (AlgorithmKind::Garrity, BranchId::Garrity { k, l }) => {
            if l.is_negative() {
                return Err(bad());
            }
            if *k >= 1 && *k + 2 <= d {
                let l = l.to_usize().filter(|l| (*k..=d).contains(l)).ok_or_else(bad)?;
                (Move::Insert { lo: 1, hi: *k, pos: l }, vec![])
            } else if *k == d - 1 {
                (Move::GarrityTail, vec![l.clone()])
            } else {
                return Err(bad());
            }
        }
        (AlgorithmKind::JacobiPerron, BranchId::JacobiPerron { a0, rest }) => {
            if *a0 < BigInt::one() || rest.len() != d - 1 || rest.iter().any(|v| v.is_negative()) {
                return Err(bad());
            }
            let mut q = vec![a0.clone()];
            q.extend(rest.iter().cloned());
            (Move::JacobiPerron, q)
        }
        _ => return Err(bad()),
    };
    Ok(out)
}

fn move_matrix(d: usize, mv: Move, quot: &[BigInt]) -> IntMatrix {
    let mut m = IntMatrix::zeros(d + 1);
    emit_entries(d, mv, |i, j, c| {
        let v = match c {
            Coef::One => BigInt::one(),
            Coef::Quot(q) => quot[q].clone(),
        };
        let cur = m.get(i, j).clone();
        m.set(i, j, cur + v);
    });
    m
}

fn check_point(alg: AlgorithmId, x: &ExactPoint) -> Result<()> {
    if x.domain != alg.domain() || x.dim() != alg.point_len() {
        return Err(Error::Domain(format!(
            "{alg} needs a point of {:?} with {} coordinates",
            alg.domain(),
            alg.point_len()
        )));
    }
    x.validate()
}

/// Branch label at `x`.
pub fn branch(alg: AlgorithmId, x: &ExactPoint) -> Result<BranchId> {
    check_point(alg, x)?;
    let mut quot = Vec::new();
    let mv = select_move(alg, &x.coords, &mut quot, true)?;
    Ok(move_to_branch(alg, mv, &quot))
}

/// The unimodular matrix of a branch.
pub fn branch_matrix(alg: AlgorithmId, b: &BranchId) -> Result<IntMatrix> {
    let (mv, quot) = branch_to_move(alg, b)?;
    Ok(move_matrix(alg.dim, mv, &quot))
}

/// One exact step: branch label, matrix and `T x`.
pub fn step(alg: AlgorithmId, x: &ExactPoint) -> Result<BranchStep> {
    check_point(alg, x)?;
    let mut quot = Vec::new();
    let mv = select_move(alg, &x.coords, &mut quot, true)?;
    let mut out = vec![<Rational as Zero>::zero(); x.dim()];
    apply_move(alg.dim, mv, &quot, &x.coords, &mut out);
    let qi: Vec<BigInt> = quot.iter().map(to_bigint).collect();
    Ok(BranchStep {
        branch: move_to_branch(alg, mv, &quot),
        matrix: move_matrix(alg.dim, mv, &qi),
        next: SimplexPoint::new(out, x.domain),
    })
}

/// Homogeneous representative of a domain point: `iota(x)` on the simplex and
/// the cube, the point itself on the Cassaigne triangle.
pub fn lift<T: Clone + One>(alg: AlgorithmId, x: &[T]) -> Vec<T> {
    match alg.kind {
        AlgorithmKind::Cassaigne => x.to_vec(),
        _ => iota(x),
    }
}

/// Coordinates of the point in the chart `kappa(lift(x))`, which is what the
/// D-cocycle is built on.
pub fn chart(alg: AlgorithmId, x: &[Rational]) -> Result<Vec<Rational>> {
    match alg.kind {
        AlgorithmKind::Cassaigne => crate::geometry::kappa(x),
        _ => Ok(x.to_vec()),
    }
}

/// Iterates the everywhere-defined Selmer map until the point lies in the
/// absorbing set; returns that point.
pub fn burn_in(alg: AlgorithmId, x: &ExactPoint, cap: usize) -> Result<ExactPoint> {
    if alg.kind != AlgorithmKind::Selmer {
        return Err(Error::Config("burn-in is only defined for the Selmer algorithm".into()));
    }
    check_point(alg, x)?;
    let mut cur = x.coords.clone();
    let mut next = cur.clone();
    for _ in 0..=cap {
        if in_selmer_absorbing(&cur) {
            return Ok(SimplexPoint::new(cur, x.domain));
        }
        selmer_total_step(alg.dim, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Err(Error::BurnInFailed(cap))
}

pub fn in_selmer_absorbing<T: Scalar>(x: &[T]) -> bool {
    let d = x.len();
    x[d - 2].clone() + x[d - 1].clone() >= T::one()
}

/// `kappa(ord(1 - x_d, x_1, ..., x_d))` on all of the ordered simplex.
pub fn selmer_total_step<T: Scalar>(d: usize, x: &[T], out: &mut [T]) {
    let r = T::one() - x[d - 1].clone();
    let pos = x.iter().filter(|v| **v > r).count();
    apply_move(d, Move::Insert { lo: d, hi: d, pos }, &[], x, out);
}

/// Binary64 stepping used by the estimator. Reuses its buffers; no allocation
/// per step.
#[derive(Clone, Debug)]
pub struct FloatStepper {
    alg: AlgorithmId,
    quot: Vec<f64>,
    next: Vec<f64>,
    /// Sparse branch matrix of the last step: (row, col, value).
    pub entries: Vec<(usize, usize, f64)>,
    last_quotient_max: f64,
}

impl FloatStepper {
    pub fn new(alg: AlgorithmId) -> Self {
        FloatStepper {
            alg,
            quot: Vec::with_capacity(alg.dim + 1),
            next: vec![0.0; alg.point_len()],
            entries: Vec::with_capacity(3 * (alg.dim + 1)),
            last_quotient_max: 0.0,
        }
    }

    pub fn alg(&self) -> AlgorithmId {
        self.alg
    }

    /// Largest partial quotient used by the last step (0 for additive maps).
    pub fn last_quotient_max(&self) -> f64 {
        self.last_quotient_max
    }

    /// Replaces `x` by `T x` and records the branch matrix in `entries`.
    #[inline]
    pub fn step(&mut self, x: &mut [f64]) -> Result<()> {
        let d = self.alg.dim;
        let mv = select_move(self.alg, x, &mut self.quot, false)?;
        apply_move(d, mv, &self.quot, x, &mut self.next);
        x.copy_from_slice(&self.next);
        self.entries.clear();
        let quot = &self.quot;
        let entries = &mut self.entries;
        emit_entries(d, mv, |i, j, c| {
            let v = match c {
                Coef::One => 1.0,
                Coef::Quot(q) => quot[q],
            };
            entries.push((i, j, v));
        });
        self.last_quotient_max = quot.iter().cloned().fold(0.0, f64::max);
        Ok(())
    }

    /// Chart coordinates of `x` written into `out` (length d).
    #[inline]
    pub fn chart(&self, x: &[f64], out: &mut [f64]) {
        match self.alg.kind {
            AlgorithmKind::Cassaigne => {
                out[0] = x[1] / x[0];
                out[1] = x[2] / x[0];
            }
            _ => out.copy_from_slice(x),
        }
    }
}

/// Selmer burn-in in binary64.
pub fn burn_in_f64(x: &mut [f64], cap: usize) -> Result<()> {
    let d = x.len();
    let mut next = vec![0.0; d];
    for _ in 0..=cap {
        if in_selmer_absorbing(x) {
            return Ok(());
        }
        selmer_total_step(d, x, &mut next);
        x.copy_from_slice(&next);
    }
    Err(Error::BurnInFailed(cap))
}
