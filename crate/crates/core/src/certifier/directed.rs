//! Binary64 arithmetic with results bounded in a chosen direction.
//!
//! Each operation computes the round-to-nearest result and recovers the sign
//! of its rounding error with an error-free transformation (TwoSum, FMA
//! residual). When the exact result lies beyond the computed one in the
//! requested direction, the result is moved one representable step. Exact
//! results are therefore kept as they are, and every result bounds the real
//! value in the requested direction.

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

/// A float together with the direction in which it bounds an exact value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DirectedFloat {
    pub value: f64,
    pub direction: Direction,
}

impl DirectedFloat {
    pub fn up(value: f64) -> Self {
        DirectedFloat { value, direction: Direction::Up }
    }

    pub fn down(value: f64) -> Self {
        DirectedFloat { value, direction: Direction::Down }
    }

    pub fn add(self, rhs: f64) -> Self {
        DirectedFloat { value: add_dir(self.value, rhs, self.direction), direction: self.direction }
    }

    pub fn mul(self, rhs: f64) -> Self {
        DirectedFloat { value: mul_dir(self.value, rhs, self.direction), direction: self.direction }
    }

    pub fn div(self, rhs: f64) -> Self {
        DirectedFloat { value: div_dir(self.value, rhs, self.direction), direction: self.direction }
    }
}

#[inline]
fn settle(computed: f64, exact_minus_computed_sign: f64, dir: Direction) -> f64 {
    match dir {
        Direction::Up if exact_minus_computed_sign > 0.0 => computed.next_up(),
        Direction::Down if exact_minus_computed_sign < 0.0 => computed.next_down(),
        _ => computed,
    }
}

/// Below this magnitude the rounding residual may itself be rounded.
const RESIDUAL_SAFE: f64 = f64::MIN_POSITIVE * 9007199254740992.0;

#[inline]
fn tiny(v: f64) -> bool {
    v.abs() < RESIDUAL_SAFE
}

/// Overflow of finite operands: the infinity on the wrong side becomes the
/// largest finite value.
#[inline]
fn overflowed(v: f64, dir: Direction) -> f64 {
    match dir {
        Direction::Up if v == f64::NEG_INFINITY => f64::MIN,
        Direction::Down if v == f64::INFINITY => f64::MAX,
        _ => v,
    }
}

#[inline]
pub fn add_dir(a: f64, b: f64, dir: Direction) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if a.is_finite() && b.is_finite() { overflowed(s, dir) } else { s };
    }
    // TwoSum: a + b = s + e exactly.
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    settle(s, e, dir)
}

#[inline]
pub fn sub_dir(a: f64, b: f64, dir: Direction) -> f64 {
    add_dir(a, -b, dir)
}

#[inline]
pub fn mul_dir(a: f64, b: f64, dir: Direction) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return if a.is_finite() && b.is_finite() { overflowed(p, dir) } else { p };
    }
    if tiny(p) && a != 0.0 && b != 0.0 {
        // The residual is unreliable under underflow; step unconditionally.
        return match dir {
            Direction::Up => p.next_up(),
            Direction::Down => p.next_down(),
        };
    }
    let e = a.mul_add(b, -p);
    settle(p, e, dir)
}

#[inline]
pub fn div_dir(a: f64, b: f64, dir: Direction) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return if a.is_finite() && b != 0.0 { overflowed(q, dir) } else { q };
    }
    if (tiny(q) || tiny(a)) && a != 0.0 {
        return match dir {
            Direction::Up => q.next_up(),
            Direction::Down => q.next_down(),
        };
    }
    // a - q b exactly; the exact quotient is q + r / b.
    let r = (-q).mul_add(b, a);
    let sign = if b > 0.0 { r } else { -r };
    settle(q, sign, dir)
}

/// Closed interval `[lo, hi]` with outward-directed operations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "{lo} > {hi}");
        Interval { lo, hi }
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval { lo: add_dir(self.lo, o.lo, Direction::Down), hi: add_dir(self.hi, o.hi, Direction::Up) }
    }

    pub fn sub(self, o: Interval) -> Interval {
        Interval { lo: sub_dir(self.lo, o.hi, Direction::Down), hi: sub_dir(self.hi, o.lo, Direction::Up) }
    }

    pub fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(self, o: Interval) -> Interval {
        let c = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let lo = c.iter().map(|&(a, b)| mul_dir(a, b, Direction::Down)).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&(a, b)| mul_dir(a, b, Direction::Up)).fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }

    /// Division by an interval of strictly positive numbers.
    pub fn div_pos(self, o: Interval) -> Interval {
        debug_assert!(o.lo > 0.0);
        let lo = if self.lo >= 0.0 { div_dir(self.lo, o.hi, Direction::Down) } else { div_dir(self.lo, o.lo, Direction::Down) };
        let hi = if self.hi >= 0.0 { div_dir(self.hi, o.lo, Direction::Up) } else { div_dir(self.hi, o.hi, Direction::Up) };
        Interval { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Enclosure of an integer.
pub fn i128_interval(v: i128) -> Interval {
    let f = v as f64;
    // `as` rounds to nearest; compare back exactly (|v| < 2^127 never saturates
    // except at the extremes, where the comparison is still monotone).
    let back = f as i128;
    if back == v && f.abs() < 1.7e38 {
        Interval::point(f)
    } else if back > v {
        Interval::new(f.next_down(), f)
    } else {
        Interval::new(f, f.next_up())
    }
}

/// Enclosure of an arbitrary-precision integer.
pub fn bigint_interval(v: &BigInt) -> Interval {
    if let Some(i) = v.to_i128() {
        return i128_interval(i);
    }
    let neg = v.sign() == Sign::Minus;
    let mag = v.abs();
    let bits = mag.bits();
    let shift = bits - 53;
    let top: BigInt = &mag >> shift;
    let exact = (&top << shift) == mag;
    let t = top.to_f64().expect("53-bit value");
    let scale = 2f64.powi(shift as i32);
    let down = t * scale;
    let up = if exact { down } else { (t + 1.0) * scale };
    if neg {
        Interval::new(-up, -down)
    } else {
        Interval::new(down, up)
    }
}

/// `ln 2` enclosure: the nearest double lies below ln 2.
pub const LN2: Interval = Interval { lo: f64::from_bits(0x3FE6_2E42_FEFA_39EF), hi: f64::from_bits(0x3FE6_2E42_FEFA_39F0) };
/// `12 / pi^2` enclosure.
pub const C2: Interval = Interval { lo: f64::from_bits(0x3FF3_7423_899A_1557), hi: f64::from_bits(0x3FF3_7423_899A_1558) };
/// `8 / zeta(3)` enclosure.
pub const C3: Interval = Interval { lo: f64::from_bits(0x401A_9EFC_35D1_2235), hi: f64::from_bits(0x401A_9EFC_35D1_2236) };

/// Number of atanh series terms; with |z| <= 0.18 the tail is below 2^-90.
const ATANH_TERMS: i32 = 16;

/// Enclosure of `2 atanh(z) = ln((1 + z) / (1 - z))` for `z` in a given
/// interval with `|z| < 1/2`.
fn two_atanh(z: Interval) -> Interval {
    let z2 = z.mul(z);
    let mut pow = z;
    let mut sum = Interval::point(0.0);
    for k in 0..ATANH_TERMS {
        let term = pow.div_pos(Interval::point((2 * k + 1) as f64));
        sum = sum.add(term);
        pow = pow.mul(z2);
    }
    // Tail: sum_{k >= K} |z|^(2k+1) / (2k+1) <= |z|^(2K+1) / ((2K+1)(1 - z^2)).
    let amax = z.lo.abs().max(z.hi.abs());
    let pk = mul_dir(amax, 1.0, Direction::Up);
    let mut p = pk;
    for _ in 0..2 * ATANH_TERMS {
        p = mul_dir(p, amax, Direction::Up);
    }
    let one_minus = sub_dir(1.0, mul_dir(amax, amax, Direction::Up), Direction::Down);
    let tail = div_dir(p, mul_dir((2 * ATANH_TERMS + 1) as f64, one_minus, Direction::Down), Direction::Up);
    let sum = Interval::new(sub_dir(sum.lo, tail, Direction::Down), add_dir(sum.hi, tail, Direction::Up));
    sum.mul(Interval::point(2.0))
}

/// Enclosure of `ln(p / q)` for positive integers.
pub fn ln_ratio_i128(p: i128, q: i128) -> Result<Interval> {
    if p <= 0 || q <= 0 {
        return Err(Error::Domain(format!("logarithm of {p}/{q}")));
    }
    if p == q {
        return Ok(Interval::point(0.0));
    }
    // e with p / (q 2^e) close to 1; any e is valid, this one keeps |z| small.
    let approx = (p as f64).log2() - (q as f64).log2();
    let e = approx.round() as i32;
    let (a, b) = if e >= 0 {
        let qs = q.checked_mul(1i128.checked_shl(e as u32).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
        (p.checked_sub(qs).ok_or(Error::Overflow)?, p.checked_add(qs).ok_or(Error::Overflow)?)
    } else {
        let ps = p.checked_mul(1i128.checked_shl((-e) as u32).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
        (ps.checked_sub(q).ok_or(Error::Overflow)?, ps.checked_add(q).ok_or(Error::Overflow)?)
    };
    Ok(ln_from_parts(i128_interval(a), i128_interval(b), e))
}

/// Enclosure of `ln(p / q)` for positive arbitrary-precision integers.
pub fn ln_ratio_big(p: &BigInt, q: &BigInt) -> Result<Interval> {
    if !p.is_positive() || !q.is_positive() {
        return Err(Error::Domain(format!("logarithm of {p}/{q}")));
    }
    if p == q {
        return Ok(Interval::point(0.0));
    }
    let e = p.bits() as i64 - q.bits() as i64;
    // Refine by one using the leading bits.
    let pf = bigint_interval(&(p >> (p.bits().saturating_sub(60)))).lo.log2() + p.bits().saturating_sub(60) as f64;
    let qf = bigint_interval(&(q >> (q.bits().saturating_sub(60)))).lo.log2() + q.bits().saturating_sub(60) as f64;
    let e = if (pf - qf).is_finite() { (pf - qf).round() as i64 } else { e };
    let (a, b) = if e >= 0 {
        let qs = q << (e as u64);
        (p - &qs, p + &qs)
    } else {
        let ps = p << ((-e) as u64);
        (&ps - q, &ps + q)
    };
    Ok(ln_from_parts(bigint_interval(&a), bigint_interval(&b), e as i32))
}

fn ln_from_parts(a: Interval, b: Interval, e: i32) -> Interval {
    let z = a.div_pos(b);
    let m = two_atanh(z);
    let e_iv = Interval::point(e as f64);
    LN2.mul(e_iv).add(m)
}

/// `ln` of a positive enclosure... bounded above only: `ln(hi)` rounded up.
pub fn ln_up_f64(v: f64) -> Result<f64> {
    let (m, e) = frexp_exact(v)?;
    Ok(ln_ratio_i128(m, 1i128 << 52)?.add(LN2.mul(Interval::point(e as f64))).hi)
}

/// `v = m 2^(e - 52)` with integer m.
fn frexp_exact(v: f64) -> Result<(i128, i32)> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("logarithm of {v}")));
    }
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i128;
    if exp == 0 {
        Ok((frac, -1022))
    } else {
        Ok((frac | (1i128 << 52), exp - 1023))
    }
}

/// Parses a decimal string to the smallest double not below its value.
pub fn parse_decimal_up(s: &str) -> Result<f64> {
    let r = parse_decimal_rational(s)?;
    let (n, d) = (r.numer().clone(), r.denom().clone());
    let v = bigint_interval(&n).div_pos(bigint_interval(&d));
    // Tighten using the exact rational: the largest double <= value is lo' etc.
    let mut hi = v.hi;
    while hi.next_down() >= v.lo && crate::numeric::rat_from_f64(hi.next_down()) >= r {
        hi = hi.next_down();
    }
    Ok(hi)
}

pub(crate) fn parse_decimal_rational(s: &str) -> Result<crate::numeric::Rational> {
    let t = s.trim();
    let bad = || Error::Config(format!("not a decimal number: '{s}'"));
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches(['+', '-']);
    let (ip, fp) = match mant.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mant, ""),
    };
    if ip.is_empty() && fp.is_empty() || !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{ip}{fp}0").parse::<BigInt>().map_err(|_| bad())? / 10;
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut r = crate::numeric::Rational::from_integer(digits);
    if scale >= 0 {
        r *= crate::numeric::Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= crate::numeric::Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    if neg && !r.is_zero() {
        r = -r;
    }
    Ok(r)
}
