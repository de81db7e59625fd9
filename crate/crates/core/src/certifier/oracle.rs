//! High-precision recomputation of the certified sum.
//!
//! Values are enclosed in fixed-point intervals `[lo, hi] * 2^-256` over
//! arbitrary-precision integers. The route is independent of the fast
//! engine: word products are `IntMatrix` products, vertices come from
//! `kappa`, volumes from `simplex_volume`, norms from `d_matrix`, and the
//! transcendental constants are computed from their series here.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::directed::bigint_interval;
use super::{
    aggregate_closes, base_rows, check_request, classify, cylinder_weight, density_extremes, enumerate_cylinders,
    f64_at_least_fixed, letter_matrix, selmer, step_growth, to_i128, Certificate, CertifyOptions, ClassCounts, Cylinder,
    SingularPolicy, TermClass, ORACLE_MAX_DEPTH,
};
use crate::algorithms::Letter;
use crate::error::{Error, Result};
use crate::numeric::{rat_from_f64, IntMatrix, Rational};

pub const ORACLE_BITS: u64 = 256;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Fx {
    lo: BigInt,
    hi: BigInt,
}

fn unit() -> BigInt {
    BigInt::one() << ORACLE_BITS
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl Fx {
    pub(crate) fn zero() -> Fx {
        Fx { lo: BigInt::zero(), hi: BigInt::zero() }
    }

    pub(crate) fn from_rat(r: &Rational) -> Fx {
        let n = r.numer() << ORACLE_BITS;
        Fx { lo: n.div_floor(r.denom()), hi: ceil_div(&n, r.denom()) }
    }

    fn int(v: i64) -> Fx {
        let x = BigInt::from(v) << ORACLE_BITS;
        Fx { lo: x.clone(), hi: x }
    }

    fn add(&self, o: &Fx) -> Fx {
        Fx { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    fn sub(&self, o: &Fx) -> Fx {
        Fx { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    fn mul(&self, o: &Fx) -> Fx {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let min = c.iter().min().expect("nonempty");
        let max = c.iter().max().expect("nonempty");
        let u = unit();
        Fx { lo: min.div_floor(&u), hi: ceil_div(max, &u) }
    }

    /// Division by an interval of positive numbers.
    fn div_pos(&self, o: &Fx) -> Fx {
        assert!(o.lo.is_positive(), "division by a non-positive interval");
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for a in [&self.lo, &self.hi] {
            for b in [&o.lo, &o.hi] {
                let n = a << ORACLE_BITS;
                let f = n.div_floor(b);
                let c = ceil_div(&n, b);
                lo = Some(lo.map_or(f.clone(), |v| v.min(f)));
                hi = Some(hi.map_or(c.clone(), |v| v.max(c)));
            }
        }
        Fx { lo: lo.expect("set"), hi: hi.expect("set") }
    }

    fn div_int(&self, k: u64) -> Fx {
        let k = BigInt::from(k);
        Fx { lo: self.lo.div_floor(&k), hi: ceil_div(&self.hi, &k) }
    }

    fn scale(&self, k: i64) -> Fx {
        let k = BigInt::from(k);
        let (a, b) = (&self.lo * &k, &self.hi * &k);
        if k.is_negative() {
            Fx { lo: b, hi: a }
        } else {
            Fx { lo: a, hi: b }
        }
    }

    fn widen(&self, units: &BigInt) -> Fx {
        Fx { lo: &self.lo - units, hi: &self.hi + units }
    }

    fn hull(&self, o: &Fx) -> Fx {
        Fx { lo: self.lo.clone().min(o.lo.clone()), hi: self.hi.clone().max(o.hi.clone()) }
    }

    pub(crate) fn lo_f64(&self) -> f64 {
        bigint_interval(&self.lo).lo * 2f64.powi(-(ORACLE_BITS as i32))
    }

    pub(crate) fn hi_f64(&self) -> f64 {
        bigint_interval(&self.hi).hi * 2f64.powi(-(ORACLE_BITS as i32))
    }

    fn width_units(&self) -> BigInt {
        &self.hi - &self.lo
    }
}

/// `sum_{k<terms} z^(2k+1)/(2k+1)` plus a tail bound valid for `|z| <= zmax < 1`.
fn atanh_series(z: &Rational, zmax: &Rational, terms: u32) -> Fx {
    let zf = Fx::from_rat(z);
    let z2 = zf.mul(&zf);
    let mut pow = zf;
    let mut sum = Fx::zero();
    for k in 0..terms {
        sum = sum.add(&pow.div_int(2 * k as u64 + 1));
        pow = pow.mul(&z2);
    }
    let n = 2 * terms as i32 + 1;
    let tail = num_traits::pow(zmax.clone(), n as usize)
        / (Rational::from_integer(BigInt::from(n)) * (Rational::one() - zmax * zmax));
    sum.widen(&Fx::from_rat(&tail).hi)
}

/// `ln 2 = 2 atanh(1/3)`.
pub(crate) fn ln2() -> Fx {
    let third = Rational::new(BigInt::from(1), BigInt::from(3));
    atanh_series(&third, &third, 100).scale(2)
}

/// `ln(p/q)` for positive integers.
pub(crate) fn ln_ratio(p: &BigInt, q: &BigInt, ln2: &Fx) -> Fx {
    assert!(p.is_positive() && q.is_positive());
    if p == q {
        return Fx::zero();
    }
    let mut e = p.bits() as i64 - q.bits() as i64;
    // Reduce to p / (q 2^e) in [1/sqrt 2, sqrt 2).
    let parts = |e: i64| if e >= 0 { (p.clone(), q << (e as u64)) } else { (p << ((-e) as u64), q.clone()) };
    let (a, b) = loop {
        let (a, b) = parts(e);
        let (a2, b2) = (&a * &a, &b * &b);
        if BigInt::from(2) * &a2 < b2 {
            e -= 1;
        } else if a2 >= BigInt::from(2) * &b2 {
            e += 1;
        } else {
            break (a, b);
        }
    };
    let z = Rational::new(&a - &b, &a + &b);
    let zmax = Rational::new(BigInt::from(3), BigInt::from(17));
    atanh_series(&z, &zmax, 64).scale(2).add(&ln2.scale(e))
}

fn atan_inv(m: i64) -> Fx {
    // Alternating series with decreasing terms; the first omitted term
    // bounds the tail.
    let mut sum = Fx::zero();
    let mut k = 0u64;
    loop {
        let den = BigInt::from(2 * k + 1) * num_traits::pow(BigInt::from(m), 2 * k as usize + 1);
        if den.bits() > ORACLE_BITS + 40 {
            return sum.widen(&BigInt::one());
        }
        let t = Fx::from_rat(&Rational::new(BigInt::one(), den));
        sum = if k % 2 == 0 { sum.add(&t) } else { sum.sub(&t) };
        k += 1;
    }
}

/// Machin's formula.
pub(crate) fn pi() -> Fx {
    atan_inv(5).scale(16).sub(&atan_inv(239).scale(4))
}

/// `zeta(3) = (5/2) sum_{k>=1} (-1)^(k+1) / (k^3 C(2k, k))`.
pub(crate) fn zeta3() -> Fx {
    let mut sum = Fx::zero();
    let mut binom = BigInt::one();
    let mut k = 1u64;
    loop {
        // C(2k, k) = C(2k-2, k-1) * (2k)(2k-1) / k^2.
        binom = binom * BigInt::from(2 * k) * BigInt::from(2 * k - 1) / BigInt::from(k * k);
        let den = BigInt::from(k * k * k) * &binom;
        if den.bits() > ORACLE_BITS + 40 {
            break;
        }
        let t = Fx::from_rat(&Rational::new(BigInt::one(), den));
        sum = if k % 2 == 1 { sum.add(&t) } else { sum.sub(&t) };
        k += 1;
    }
    sum.widen(&BigInt::one()).scale(5).div_int(2)
}

pub(crate) fn density_constant_fx(dim: usize) -> Fx {
    match dim {
        2 => {
            let p = pi();
            Fx::int(12).div_pos(&p.mul(&p))
        }
        _ => Fx::int(8).div_pos(&zeta3()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub dim: usize,
    pub depth: usize,
    pub bits: u64,
    /// Enclosure of the exact bound value, rounded outward.
    pub bound_lo: f64,
    pub bound_hi: f64,
    pub inner_lo: f64,
    pub inner_hi: f64,
    pub class_counts: ClassCounts,
    #[serde(skip)]
    bound_hi_fixed: BigInt,
}

impl OracleReport {
    /// The certificate is never tighter than the exact value, and agrees
    /// with it to `tol`.
    pub fn check(&self, cert: &Certificate, tol: f64) -> Result<()> {
        if cert.dim != self.dim || cert.depth != self.depth {
            return Err(Error::Config("oracle and certificate describe different sums".into()));
        }
        if !f64_at_least_fixed(cert.bound, &self.bound_hi_fixed, ORACLE_BITS) {
            return Err(Error::Consistency(format!(
                "certificate bound {} is below the oracle upper endpoint {}",
                cert.bound, self.bound_hi
            )));
        }
        let gap = (cert.bound - self.bound_lo).abs().max((cert.bound - self.bound_hi).abs());
        if !(gap < tol) {
            return Err(Error::Consistency(format!("certificate and oracle differ by {gap}")));
        }
        if cert.class_counts != self.class_counts {
            return Err(Error::Consistency("term census differs from the oracle".into()));
        }
        Ok(())
    }

    pub fn bound_hi_exact(&self) -> Rational {
        Rational::new(self.bound_hi_fixed.clone(), BigInt::one() << ORACLE_BITS)
    }
}

struct Acc {
    neg: Fx,
    pos: Fx,
    lower: Fx,
    pool_w: Option<Rational>,
    pool_any: bool,
    counts: ClassCounts,
}

pub fn oracle_recompute(dim: usize, depth: usize, opts: &CertifyOptions) -> Result<OracleReport> {
    check_request(dim, depth)?;
    if depth > ORACLE_MAX_DEPTH {
        return Err(Error::Config(format!("oracle depth is limited to {ORACLE_MAX_DEPTH}")));
    }
    let alg = selmer(dim)?;
    let l2 = ln2();
    let c = density_constant_fx(dim);
    let growth = step_growth(dim)?;
    let ln_b = ln_ratio(growth.numer(), growth.denom(), &l2);
    let v = IntMatrix::from_rows(&base_rows(dim)?);
    let det_v = to_i128(&v.determinant())?.abs();
    let fact: i128 = (1..=dim as i128).product();
    let mats = [letter_matrix(dim, Letter::A)?, letter_matrix(dim, Letter::B)?];
    let n = dim + 1;
    let mut acc = Acc {
        neg: Fx::zero(),
        pos: Fx::zero(),
        lower: Fx::zero(),
        pool_w: None,
        pool_any: false,
        counts: ClassCounts::default(),
    };

    let mut stack = vec![(Vec::<Letter>::new(), IntMatrix::identity(n))];
    while let Some((word, p)) = stack.pop() {
        let len = word.len();
        if len == depth {
            let cyl = Cylinder::from_matrix(alg, word, p)?;
            leaf(&cyl, &c, &l2, &mut acc)?;
            continue;
        }
        if let (Some(tau), true) = (opts.aggregate, len > 0) {
            let w = &v * &p;
            let mut rows = [[0i128; 4]; 4];
            for (k, row) in rows.iter_mut().enumerate().take(n) {
                for (j, e) in row.iter_mut().enumerate().take(n) {
                    *e = to_i128(w.get(k, j))?;
                }
            }
            if aggregate_closes(&rows, n, det_v, fact, tau) {
                let cyl = Cylinder::from_matrix(alg, word, p)?;
                aggregated(&cyl, depth - len, &c, &l2, &ln_b, &mut acc)?;
                continue;
            }
        }
        for l in [Letter::B, Letter::A] {
            let mut w = word.clone();
            w.push(l);
            stack.push((w, &mats[l as usize] * &p));
        }
    }

    let singular = if acc.pool_any {
        let measure = match &opts.singular {
            SingularPolicy::Complement => Fx::int(1).sub(&acc.lower),
            SingularPolicy::External { measure, .. } => Fx::from_rat(&rat_from_f64(*measure)),
        };
        let w = acc.pool_w.clone().unwrap_or_else(Rational::one);
        measure.mul(&ln_ratio(w.numer(), w.denom(), &l2))
    } else {
        Fx::zero()
    };
    let inner = acc.neg.add(&acc.pos).add(&singular);
    let bound = inner.div_int(depth as u64);
    debug_assert!(bound.width_units().bits() < ORACLE_BITS - 180);
    Ok(OracleReport {
        dim,
        depth,
        bits: ORACLE_BITS,
        bound_lo: bound.lo_f64(),
        bound_hi: bound.hi_f64(),
        inner_lo: inner.lo_f64(),
        inner_hi: inner.hi_f64(),
        class_counts: acc.counts,
        bound_hi_fixed: bound.hi,
    })
}

/// Exact lower and upper measure bounds as enclosures.
fn measures(cyl: &Cylinder, c: &Fx) -> (Fx, Option<Fx>) {
    let (lo, hi) = density_extremes(&cyl.vertices);
    let lower = c.mul(&Fx::from_rat(&(lo * &cyl.volume)));
    let upper = hi.map(|h| c.mul(&Fx::from_rat(&(h * &cyl.volume))));
    (lower, upper)
}

fn leaf(cyl: &Cylinder, c: &Fx, l2: &Fx, acc: &mut Acc) -> Result<()> {
    let (w, _) = cylinder_weight(cyl)?;
    let class = classify(w < Rational::one(), cyl.singular);
    acc.counts.record(class);
    let (lower, upper) = measures(cyl, c);
    if class == TermClass::SingularPlus {
        acc.pool_any = true;
        if acc.pool_w.as_ref().map_or(true, |m| w > *m) {
            acc.pool_w = Some(w);
        }
        return Ok(());
    }
    acc.lower = acc.lower.add(&lower);
    if w.is_one() {
        return Ok(());
    }
    let ln = ln_ratio(w.numer(), w.denom(), l2);
    match class {
        TermClass::SigmaMinus => acc.neg = acc.neg.add(&lower.mul(&ln)),
        _ => {
            let upper = upper.ok_or_else(|| Error::Consistency("unbounded measure outside the pool".into()))?;
            acc.pos = acc.pos.add(&upper.mul(&ln));
        }
    }
    Ok(())
}

fn aggregated(cyl: &Cylinder, remaining: usize, c: &Fx, l2: &Fx, ln_b: &Fx, acc: &mut Acc) -> Result<()> {
    let (w, _) = cylinder_weight(cyl)?;
    let m = ln_ratio(w.numer(), w.denom(), l2).add(&ln_b.scale(remaining as i64));
    let (lower, upper) = measures(cyl, c);
    let upper = upper.ok_or_else(|| Error::Consistency("aggregated a singular subtree".into()))?;
    // f(m) = lower m for m < 0, upper m otherwise; monotone in m.
    let term = if m.hi.is_negative() {
        lower.mul(&m)
    } else if !m.lo.is_negative() {
        upper.mul(&m)
    } else {
        lower.mul(&m).hull(&upper.mul(&m))
    };
    if term.hi.is_negative() {
        acc.neg = acc.neg.add(&term);
    } else {
        acc.pos = acc.pos.add(&term);
    }
    acc.lower = acc.lower.add(&lower);
    acc.counts.aggregated += 1;
    Ok(())
}

/// Sum of exact cylinder volumes at a depth.
pub fn volume_sum(dim: usize, depth: usize) -> Result<Rational> {
    let mut s = Rational::zero();
    for c in enumerate_cylinders(dim, depth)? {
        s += c?.volume;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::directed::{C2, C3, LN2};

    fn contains(outer: &super::super::Interval, inner: &Fx) {
        assert!(outer.lo <= inner.lo_f64() && inner.hi_f64() <= outer.hi, "{outer:?} vs [{}, {}]", inner.lo_f64(), inner.hi_f64());
    }

    #[test]
    fn constants_agree_with_binary64_brackets() {
        let l = ln2();
        assert!(l.width_units().bits() < 16);
        contains(&LN2, &l);
        contains(&C2, &density_constant_fx(2));
        contains(&C3, &density_constant_fx(3));
        let p = pi();
        assert!(p.lo_f64() <= std::f64::consts::PI && std::f64::consts::PI <= p.hi_f64() + 1e-15);
        let z = zeta3();
        assert!((z.lo_f64() - 1.2020569031595942).abs() < 1e-15);
    }

    #[test]
    fn logarithms() {
        let l2 = ln2();
        for (p, q) in [(3i64, 4i64), (1, 1), (1000, 7), (1, 1 << 40), (17, 16)] {
            let r = ln_ratio(&BigInt::from(p), &BigInt::from(q), &l2);
            let f = (p as f64 / q as f64).ln();
            assert!((r.lo_f64() - f).abs() < 1e-14 * f.abs().max(1.0));
            assert!(r.width_units().bits() < 24);
        }
        // ln 2 itself reduces to e = 1, z = 0.
        let r = ln_ratio(&BigInt::from(2), &BigInt::from(1), &l2);
        assert!(r.lo <= l2.lo && l2.hi <= r.hi);
        assert!(r.width_units().bits() < 24);
    }

    #[test]
    fn volume_sums_tile_base() {
        for d in [2, 3] {
            let base = super::super::base_simplex(d).unwrap().volume().unwrap();
            for depth in 1..=4 {
                assert_eq!(volume_sum(d, depth).unwrap(), base);
            }
        }
    }
}
