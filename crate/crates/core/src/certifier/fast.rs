//! Fixed-width enumeration engine with directed binary64 accumulation.

use num_bigint::BigInt;
use rayon::prelude::*;

use super::directed::{add_dir, i128_interval, ln_ratio_big, ln_ratio_i128, mul_dir, sub_dir, Direction, Interval};
use super::{aggregate_closes, base_rows, classify, density_constant, letter_matrix, step_growth, to_i128};
use super::{CertifyOptions, ClassCounts, SingularPolicy, TermClass};
use crate::algorithms::Letter;
use crate::error::{Error, Result};
use crate::numeric::IntMatrix;

use Direction::{Down, Up};

const N: usize = 4;
type Mat = [[i64; N]; N];

pub(super) struct Outcome {
    pub bound: f64,
    pub inner: f64,
    pub neg: f64,
    pub pos: f64,
    pub singular: f64,
    pub pool_measure: f64,
    pub counts: ClassCounts,
    pub tasks: usize,
}

#[derive(Clone, Copy)]
struct Node {
    /// Word product.
    p: Mat,
    /// Homogeneous vertex rows `V P`.
    w: Mat,
    len: usize,
}

#[derive(Clone, Copy)]
struct Partial {
    neg: f64,
    pos: f64,
    /// Sum of measure lower bounds of all terms outside the singular pool.
    lower: f64,
    pool_w: f64,
    pool_any: bool,
    counts: ClassCounts,
}

impl Partial {
    fn new() -> Self {
        Partial { neg: 0.0, pos: 0.0, lower: 0.0, pool_w: 0.0, pool_any: false, counts: ClassCounts::default() }
    }

    fn merge(&mut self, o: &Partial) {
        self.neg = add_dir(self.neg, o.neg, Up);
        self.pos = add_dir(self.pos, o.pos, Up);
        self.lower = add_dir(self.lower, o.lower, Down);
        self.pool_w = self.pool_w.max(o.pool_w);
        self.pool_any |= o.pool_any;
        self.counts.merge(&o.counts);
    }
}

fn to_mat(m: &IntMatrix) -> Result<Mat> {
    let rows = m.to_i64_rows().ok_or(Error::Overflow)?;
    let mut out = [[0i64; N]; N];
    for (i, r) in rows.iter().enumerate() {
        out[i][..r.len()].copy_from_slice(r);
    }
    Ok(out)
}

struct Ctx {
    n: usize,
    depth: usize,
    m: [Mat; 2],
    v: Mat,
    det_v: i128,
    fact: i128,
    c: Interval,
    ln_b: Interval,
    tau: Option<f64>,
}

/// Max-vertex D-norm as an unreduced fraction, and the node's measure bounds.
struct Eval {
    num: i128,
    den: i128,
    lower: f64,
    upper: f64,
    singular: bool,
}

impl Ctx {
    fn new(dim: usize, depth: usize, tau: Option<f64>) -> Result<Ctx> {
        let v = IntMatrix::from_rows(&base_rows(dim)?);
        let g = step_growth(dim)?;
        Ok(Ctx {
            n: dim + 1,
            depth,
            m: [to_mat(&letter_matrix(dim, Letter::A)?)?, to_mat(&letter_matrix(dim, Letter::B)?)?],
            v: to_mat(&v)?,
            det_v: to_i128(&v.determinant())?.abs(),
            fact: (1..=dim as i128).product(),
            c: density_constant(dim)?,
            ln_b: ln_ratio_big(g.numer(), g.denom())?,
            tau,
        })
    }

    fn root(&self) -> Node {
        let mut p = [[0i64; N]; N];
        for (i, row) in p.iter_mut().enumerate().take(self.n) {
            row[i] = 1;
        }
        Node { p, w: self.v, len: 0 }
    }

    fn mul(&self, a: &Mat, b: &Mat) -> Result<Mat> {
        let mut out = [[0i64; N]; N];
        for i in 0..self.n {
            for j in 0..self.n {
                let mut s = 0i64;
                for k in 0..self.n {
                    if a[i][k] != 0 {
                        s = a[i][k].checked_mul(b[k][j]).and_then(|t| s.checked_add(t)).ok_or(Error::Overflow)?;
                    }
                }
                out[i][j] = s;
            }
        }
        Ok(out)
    }

    fn child(&self, node: &Node, l: usize) -> Result<Node> {
        let p = self.mul(&self.m[l], &node.p)?;
        let w = self.mul(&self.v, &p)?;
        Ok(Node { p, w, len: node.len + 1 })
    }

    fn denominator(&self, w: &Mat) -> Result<i128> {
        let mut prod = 1i128;
        for row in w.iter().take(self.n) {
            if row[0] <= 0 {
                return Err(Error::Consistency(format!("nonpositive homogeneous coordinate {}", row[0])));
            }
            prod = prod.checked_mul(row[0] as i128).ok_or(Error::Overflow)?;
        }
        Ok(prod)
    }

    /// Exact local tiling identity: the children's volumes add up to the
    /// parent's.
    fn check_tiling(&self, parent: &Node, a: &Node, b: &Node) -> Result<()> {
        let (pp, pa, pb) = (self.denominator(&parent.w)?, self.denominator(&a.w)?, self.denominator(&b.w)?);
        let ok = match (pa.checked_add(pb).and_then(|s| s.checked_mul(pp)), pa.checked_mul(pb)) {
            (Some(l), Some(r)) => l == r,
            _ => BigInt::from(pp) * (BigInt::from(pa) + BigInt::from(pb)) == BigInt::from(pa) * BigInt::from(pb),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Consistency(format!("cylinder tiling fails at depth {}", parent.len + 1)))
        }
    }

    fn eval(&self, node: &Node) -> Result<Eval> {
        let (n, p, w) = (self.n, &node.p, &node.w);
        let (mut num, mut den) = (0i128, 1i128);
        for row in w.iter().take(n) {
            let w0 = row[0] as i128;
            let mut best_row = 0i128;
            for pi in p.iter().take(n).skip(1) {
                let mut s = 0i128;
                for j in 1..n {
                    let t = (pi[j] as i128)
                        .checked_mul(w0)
                        .zip((pi[0] as i128).checked_mul(row[j] as i128))
                        .and_then(|(x, y)| x.checked_sub(y))
                        .ok_or(Error::Overflow)?;
                    s = s.checked_add(t.abs()).ok_or(Error::Overflow)?;
                }
                best_row = best_row.max(s);
            }
            let lhs = best_row.checked_mul(den).ok_or(Error::Overflow)?;
            let rhs = num.checked_mul(w0).ok_or(Error::Overflow)?;
            if lhs > rhs {
                num = best_row;
                den = w0;
            }
        }
        if num == 0 {
            return Err(Error::Consistency("zero D-norm".into()));
        }
        let singular = (0..n).any(|k| (1..n).any(|i| w[k][i] == 0));
        let vol = i128_interval(self.det_v)
            .div_pos(i128_interval(self.fact.checked_mul(self.denominator(w)?).ok_or(Error::Overflow)?));
        let mut lo_f = self.c.lo;
        let mut hi_f = self.c.hi;
        for i in 1..n {
            // Vertices maximizing and minimizing x_i = w_ki / w_k0.
            let (mut kmax, mut kmin) = (0, 0);
            for k in 1..n {
                let gt = |a: usize, b: usize| (w[a][i] as i128) * (w[b][0] as i128) > (w[b][i] as i128) * (w[a][0] as i128);
                if gt(k, kmax) {
                    kmax = k;
                }
                if gt(kmin, k) {
                    kmin = k;
                }
            }
            let f = i128_interval(w[kmax][0] as i128).div_pos(i128_interval(w[kmax][i] as i128));
            lo_f = mul_dir(lo_f, f.lo, Down);
            if !singular {
                let g = i128_interval(w[kmin][0] as i128).div_pos(i128_interval(w[kmin][i] as i128));
                hi_f = mul_dir(hi_f, g.hi, Up);
            }
        }
        let lower = mul_dir(lo_f, vol.lo, Down);
        let upper = if singular { f64::INFINITY } else { mul_dir(hi_f, vol.hi, Up) };
        Ok(Eval { num, den, lower, upper, singular })
    }

    fn leaf(&self, node: &Node, part: &mut Partial) -> Result<()> {
        let e = self.eval(node)?;
        let class = classify(e.num < e.den, e.singular);
        part.counts.record(class);
        if e.num == e.den {
            // Weight exactly zero.
            if class == TermClass::SingularPlus {
                part.pool_any = true;
            } else {
                part.lower = add_dir(part.lower, e.lower, Down);
            }
            return Ok(());
        }
        let w_hi = ln_ratio_i128(e.num, e.den)?.hi;
        match class {
            TermClass::SigmaMinus => {
                if w_hi < 0.0 {
                    part.neg = add_dir(part.neg, mul_dir(e.lower, w_hi, Up), Up);
                }
                part.lower = add_dir(part.lower, e.lower, Down);
            }
            TermClass::SigmaPlus => {
                part.pos = add_dir(part.pos, mul_dir(e.upper, w_hi, Up), Up);
                part.lower = add_dir(part.lower, e.lower, Down);
            }
            TermClass::SingularPlus => {
                part.pool_any = true;
                part.pool_w = part.pool_w.max(w_hi);
            }
        }
        Ok(())
    }

    fn try_aggregate(&self, node: &Node, part: &mut Partial) -> Result<bool> {
        let Some(tau) = self.tau else { return Ok(false) };
        if node.len == 0 || node.len >= self.depth {
            return Ok(false);
        }
        let mut rows = [[0i128; 4]; 4];
        for (r, w) in rows.iter_mut().zip(node.w.iter()) {
            for (a, b) in r.iter_mut().zip(w.iter()) {
                *a = *b as i128;
            }
        }
        if !aggregate_closes(&rows, self.n, self.det_v, self.fact, tau) {
            return Ok(false);
        }
        let e = self.eval(node)?;
        let r = (self.depth - node.len) as f64;
        let w_hi = ln_ratio_i128(e.num, e.den)?.hi;
        let m_hi = add_dir(w_hi, mul_dir(r, self.ln_b.hi, Up), Up);
        if m_hi < 0.0 {
            part.neg = add_dir(part.neg, mul_dir(e.lower, m_hi, Up), Up);
        } else {
            part.pos = add_dir(part.pos, mul_dir(e.upper, m_hi, Up), Up);
        }
        part.lower = add_dir(part.lower, e.lower, Down);
        part.counts.aggregated += 1;
        Ok(true)
    }

    /// Depth-first walk below `root`; nodes reaching `stop` (short of the
    /// full depth) are handed back as tasks.
    fn walk(&self, root: Node, stop: usize, part: &mut Partial, tasks: &mut Vec<Node>) -> Result<()> {
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            if node.len == self.depth {
                self.leaf(&node, part)?;
                continue;
            }
            if self.try_aggregate(&node, part)? {
                continue;
            }
            if node.len == stop {
                tasks.push(node);
                continue;
            }
            let a = self.child(&node, 0)?;
            let b = self.child(&node, 1)?;
            self.check_tiling(&node, &a, &b)?;
            stack.push(b);
            stack.push(a);
        }
        Ok(())
    }
}

pub(super) fn run(dim: usize, depth: usize, opts: &CertifyOptions) -> Result<Outcome> {
    let ctx = Ctx::new(dim, depth, opts.aggregate)?;
    let split = opts.split_depth.min(depth);
    let mut total = Partial::new();
    let mut roots = Vec::new();
    ctx.walk(ctx.root(), split, &mut total, &mut roots)?;
    let parts: Vec<Result<Partial>> = roots
        .par_iter()
        .map(|root| {
            let mut part = Partial::new();
            let mut none = Vec::new();
            ctx.walk(*root, usize::MAX, &mut part, &mut none)?;
            Ok(part)
        })
        .collect();
    for p in parts {
        total.merge(&p?);
    }
    if total.lower > 1.0 {
        return Err(Error::Consistency(format!("measure lower bounds sum to {} > 1", total.lower)));
    }
    let (pool_measure, singular) = if total.pool_any {
        let m = match &opts.singular {
            SingularPolicy::Complement => sub_dir(1.0, total.lower, Up),
            SingularPolicy::External { measure, .. } => *measure,
        };
        (m, mul_dir(m, total.pool_w, Up))
    } else {
        (0.0, 0.0)
    };
    let inner = add_dir(add_dir(total.neg, total.pos, Up), singular, Up);
    let bound = super::directed::div_dir(inner, depth as f64, Up);
    if !bound.is_finite() {
        return Err(Error::Consistency("non-finite certified bound".into()));
    }
    Ok(Outcome {
        bound,
        inner,
        neg: total.neg,
        pos: total.pos,
        singular,
        pool_measure,
        counts: total.counts,
        tasks: roots.len(),
    })
}
