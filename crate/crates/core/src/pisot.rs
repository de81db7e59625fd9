//! Primitivity and Pisot property of Selmer products in dimension 2.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::Letter;
use crate::certifier::letter_matrix;
use crate::error::{Error, Result};
use crate::numeric::IntMatrix;

/// Monic characteristic polynomial, coefficients from the leading one down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly(pub Vec<BigInt>);

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(|c| c.to_i64()).collect()
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let mut first = true;
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let p = n - i;
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let coef = if mag.is_one() && p > 0 { String::new() } else { mag.to_string() };
            match p {
                0 => write!(f, "{mag}")?,
                1 => write!(f, "{coef}λ")?,
                _ => write!(f, "{coef}λ^{p}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Faddeev-LeVerrier recursion; every division is exact.
pub fn char_poly(m: &IntMatrix) -> CharPoly {
    let n = m.dim();
    let mut coeffs = vec![BigInt::one()];
    let mut mk = IntMatrix::zeros(n);
    for k in 1..=n {
        // M_k = M (M_{k-1} + c_{k-1} I)
        let mut shifted = mk.clone();
        let c_prev = coeffs[k - 1].clone();
        for i in 0..n {
            let v = shifted.get(i, i) + &c_prev;
            shifted.set(i, i, v);
        }
        mk = m * &shifted;
        let trace: BigInt = (0..n).map(|i| mk.get(i, i).clone()).sum();
        coeffs.push(-trace / BigInt::from(k as u64));
    }
    CharPoly(coeffs)
}

/// Some power up to `(n-1)^2 + 1` is entrywise positive.
pub fn is_primitive(m: &IntMatrix) -> Result<bool> {
    if !m.is_nonnegative() {
        return Err(Error::Domain("primitivity is defined for nonnegative matrices".into()));
    }
    let n = m.dim();
    let pattern: Vec<bool> = m.entries().iter().map(|v| v.is_positive()).collect();
    let mut cur = pattern.clone();
    for _ in 0..(n - 1) * (n - 1) + 1 {
        if cur.iter().all(|&b| b) {
            return Ok(true);
        }
        let mut next = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                next[i * n + j] = (0..n).any(|k| cur[i * n + k] && pattern[k * n + j]);
            }
        }
        cur = next;
    }
    Ok(false)
}

/// Sign changes in a coefficient sequence, zeros skipped.
fn sign_changes(c: &[BigInt]) -> usize {
    let signs: Vec<bool> = c.iter().filter(|v| !v.is_zero()).map(|v| v.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Coefficients of `p(s x + t)` for s = +-1, by Horner-style Taylor shift.
fn substitute(p: &[BigInt], s: i64, t: i64) -> Vec<BigInt> {
    let n = p.len() - 1;
    // Coefficients in ascending order.
    let mut asc: Vec<BigInt> = p.iter().rev().cloned().collect();
    if s < 0 {
        for (i, c) in asc.iter_mut().enumerate() {
            if i % 2 == 1 {
                *c = -c.clone();
            }
        }
    }
    // p(s x) -> p(s (x + t/s)) = p(s x + t)
    let shift = BigInt::from(t * s);
    for i in 0..n {
        for j in (i..n).rev() {
            let add = &asc[j + 1] * &shift;
            asc[j] += add;
        }
    }
    asc.into_iter().rev().collect()
}

/// Pisot decision for a unimodular 3x3 integer matrix, in exact arithmetic.
pub fn is_pisot(m: &IntMatrix) -> Result<bool> {
    if m.dim() != 3 {
        return Err(Error::Shape(format!("Pisot test expects a 3x3 matrix, got {0}x{0}", m.dim())));
    }
    if !m.determinant().abs().is_one() {
        return Err(Error::Domain("Pisot test expects a unimodular matrix".into()));
    }
    let p = char_poly(m);
    let (one, minus_one) = (BigInt::one(), -BigInt::one());
    // With |constant term| = 1, any root of modulus 1 forces a root at +-1.
    if p.eval(&one).is_zero() || p.eval(&minus_one).is_zero() {
        return Ok(false);
    }
    let (a, b, c) = (&p.0[1], &p.0[2], &p.0[3]);
    let disc = BigInt::from(18) * a * b * c - BigInt::from(4) * a * a * a * c + a * a * b * b
        - BigInt::from(4) * b * b * b
        - BigInt::from(27) * c * c;
    if disc.is_negative() {
        // One real root r; the complex pair has modulus^2 = 1/|r|.
        return Ok(p.eval(&one).is_negative());
    }
    if disc.is_zero() {
        // A repeated root of a monic integer cubic is an integer, here +-1.
        return Ok(false);
    }
    // Three distinct real roots; Descartes' rule counts them exactly.
    let above = sign_changes(&substitute(&p.0, 1, 1));
    let below = sign_changes(&substitute(&p.0, -1, -1));
    Ok(above == 1 && below == 0)
}

pub fn word_string(word: &[Letter]) -> String {
    word.iter().map(|l| l.to_string()).collect()
}

pub fn parse_word(s: &str) -> Result<Vec<Letter>> {
    s.chars()
        .map(|c| match c {
            'a' => Ok(Letter::A),
            'b' => Ok(Letter::B),
            _ => Err(Error::InvalidBranch(format!("'{c}' in word '{s}'"))),
        })
        .collect()
}

/// `M_{b_{n-1}} ... M_{b_0}` for d = 2.
pub fn word_matrix(word: &[Letter]) -> Result<IntMatrix> {
    let mats = [letter_matrix(2, Letter::A)?, letter_matrix(2, Letter::B)?];
    let mut p = IntMatrix::identity(3);
    for &l in word {
        p = &mats[l as usize] * &p;
    }
    Ok(p)
}

/// Condition (3) on strings: the doubled word does not split into blocks
/// `ab`/`bb`, nor into blocks `ba`/`bb`.
pub fn condition3(word: &[Letter]) -> bool {
    let sq: Vec<Letter> = word.iter().chain(word.iter()).copied().collect();
    let all_b = |off: usize| sq.iter().skip(off).step_by(2).all(|&l| l == Letter::B);
    !(all_b(1) || all_b(0))
}

/// Condition (3) on matrices: `M^2` is not a product of n factors from
/// `{S_a S_b, S_b^2}` or from `{S_b S_a, S_b^2}`.
pub struct Condition3Sets {
    sets: Vec<HashSet<Vec<BigInt>>>,
}

impl Condition3Sets {
    pub fn new(max_len: usize) -> Result<Self> {
        let sa = letter_matrix(2, Letter::A)?;
        let sb = letter_matrix(2, Letter::B)?;
        let fam1 = [&sa * &sb, &sb * &sb];
        let fam2 = [&sb * &sa, &sb * &sb];
        let mut sets = vec![HashSet::new()];
        let mut layer: Vec<IntMatrix> = vec![IntMatrix::identity(3)];
        let mut layer2 = layer.clone();
        sets[0].insert(IntMatrix::identity(3).entries().to_vec());
        for _ in 1..=max_len {
            layer = layer.iter().flat_map(|m| fam1.iter().map(move |f| m * f)).collect();
            layer2 = layer2.iter().flat_map(|m| fam2.iter().map(move |f| m * f)).collect();
            sets.push(layer.iter().chain(layer2.iter()).map(|m| m.entries().to_vec()).collect());
        }
        Ok(Condition3Sets { sets })
    }

    pub fn holds(&self, word: &[Letter]) -> Result<bool> {
        let n = word.len();
        let set = self.sets.get(n).ok_or_else(|| Error::Config(format!("word length {n} beyond table")))?;
        let m = word_matrix(word)?;
        Ok(!set.contains((&m * &m).entries()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WordClassification {
    pub word: String,
    pub primitive: bool,
    pub pisot: bool,
    pub condition3: bool,
    pub char_poly: Vec<i64>,
}

impl WordClassification {
    pub fn consistent(&self) -> bool {
        self.primitive == self.pisot && self.pisot == self.condition3
    }

    pub fn csv(&self) -> String {
        let poly: Vec<String> = self.char_poly.iter().map(|c| c.to_string()).collect();
        format!("{},{},{},{},{}", self.word, self.primitive, self.pisot, self.condition3, poly.join(" "))
    }
}

pub const CLASSIFICATION_CSV_HEADER: &str = "word,primitive,pisot,condition3,char_poly";

pub fn classify_word(word: &[Letter]) -> Result<WordClassification> {
    let m = word_matrix(word)?;
    Ok(WordClassification {
        word: word_string(word),
        primitive: is_primitive(&m)?,
        pisot: is_pisot(&m)?,
        condition3: condition3(word),
        char_poly: char_poly(&m).to_i64().ok_or(Error::Overflow)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub max_len: usize,
    pub words: usize,
    pub primitive: usize,
    /// String and matrix forms of condition (3) disagree.
    pub condition3_mismatches: usize,
    pub counterexamples: Vec<WordClassification>,
    #[serde(skip)]
    pub rows: Vec<WordClassification>,
}

pub const MAX_THEOREM_LEN: usize = 14;

/// All words of lengths 1..=max_len in length-then-lexicographic order.
pub fn all_words(max_len: usize) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    for n in 1..=max_len {
        for bits in 0u32..(1 << n) {
            out.push((0..n).map(|i| if bits >> (n - 1 - i) & 1 == 0 { Letter::A } else { Letter::B }).collect());
        }
    }
    out
}

pub fn verify_theorem(max_len: usize) -> Result<TheoremReport> {
    if max_len == 0 || max_len > MAX_THEOREM_LEN {
        return Err(Error::Config(format!("max_len must be in 1..={MAX_THEOREM_LEN}")));
    }
    let sets = Condition3Sets::new(max_len)?;
    let words = all_words(max_len);
    let rows: Vec<(WordClassification, bool)> = words
        .par_iter()
        .map(|w| {
            let c = classify_word(w)?;
            let agree = sets.holds(w)? == c.condition3;
            Ok((c, agree))
        })
        .collect::<Result<_>>()?;
    let condition3_mismatches = rows.iter().filter(|(_, a)| !a).count();
    let rows: Vec<WordClassification> = rows.into_iter().map(|(c, _)| c).collect();
    Ok(TheoremReport {
        max_len,
        words: rows.len(),
        primitive: rows.iter().filter(|r| r.primitive).count(),
        condition3_mismatches,
        counterexamples: rows.iter().filter(|r| !r.consistent()).cloned().collect(),
        rows,
    })
}
