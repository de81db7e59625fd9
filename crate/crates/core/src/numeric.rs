//! Exact integer/rational matrices and small dense float matrices.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Reduced fraction of arbitrary-precision integers with positive denominator.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Exact value of a finite float.
pub fn rat_from_f64(v: f64) -> Rational {
    Rational::from_float(v).expect("finite float")
}

/// Nearest binary64 value of a rational.
pub fn rat_to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: fall back through the logarithm.
        let sign = if v.is_negative() { -1.0 } else { 1.0 };
        sign * ln_rational_approx(&v.abs()).exp()
    })
}

/// Natural logarithm of a positive rational, accurate to about 1e-15 relative
/// even when numerator and denominator have thousands of bits.
pub fn ln_rational_approx(v: &Rational) -> f64 {
    ln_bigint_approx(v.numer()) - ln_bigint_approx(v.denom())
}

/// Natural logarithm of a positive integer from its top 64 bits.
pub fn ln_bigint_approx(v: &BigInt) -> f64 {
    assert!(v.is_positive(), "logarithm of a non-positive integer");
    let bits = v.bits();
    if bits <= 64 {
        return v.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = v >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Descending stable sort. Ties keep their input order.
pub fn ord<T: PartialOrd + Clone>(v: &[T]) -> Vec<T> {
    let mut out = v.to_vec();
    // `sort_by` is stable; comparing b against a gives descending order.
    out.sort_by(|a, b| b.partial_cmp(a).expect("ord requires comparable entries"));
    out
}

/// Square matrix of arbitrary-precision integers, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix { n, data: vec![BigInt::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "IntMatrix::from_rows needs a square matrix");
            data.extend(r.iter().map(|&v| BigInt::from(v)));
        }
        IntMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.to_i64()).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].clone();
            }
        }
        out
    }

    pub fn determinant(&self) -> BigInt {
        let r = RationalMatrix::from_int(self);
        let d = r.determinant().expect("square");
        d.to_integer()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> BigInt {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<BigInt>())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|v| !v.is_negative())
    }

    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|v| v.is_positive())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(self.n);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Fixed-width product that reports overflow instead of wrapping.
    pub fn checked_mul_i64(a: &[i64], b: &[i64], n: usize) -> Result<Vec<i64>> {
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i * n + k];
                if aik == 0 {
                    continue;
                }
                for j in 0..n {
                    let t = aik.checked_mul(b[k * n + j]).ok_or(Error::Overflow)?;
                    out[i * n + j] = out[i * n + j].checked_add(t).ok_or(Error::Overflow)?;
                }
            }
        }
        Ok(out)
    }
}

impl<'a> Mul<&'a IntMatrix> for &'a IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &'a IntMatrix) -> IntMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in IntMatrix product");
        let n = self.n;
        let mut out = IntMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = &self.data[i * n + k];
                if aik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &rhs.data[k * n + j];
                    if !b.is_zero() {
                        out.data[i * n + j] += aik * b;
                    }
                }
            }
        }
        out
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Dense rectangular matrix of exact rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_int(m: &IntMatrix) -> Self {
        RationalMatrix {
            rows: m.n,
            cols: m.n,
            data: m.data.iter().cloned().map(Rational::from_integer).collect(),
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        RationalMatrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, rhs: &RationalMatrix) -> Result<RationalMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = RationalMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs.data[k * rhs.cols + j];
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.rows {
            return Err(Error::Shape(format!("vector of length {} times {}x{}", v.len(), self.rows, self.cols)));
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += vi * &self.data[i * self.cols + j];
            }
        }
        Ok(out)
    }

    pub fn norm_inf(&self) -> Rational {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).fold(Rational::zero(), |a, b| a + b))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Determinant by fraction-exact Gaussian elimination.
    pub fn determinant(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return Err(Error::Shape(format!("determinant of {}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != col {
                for j in 0..n {
                    a.swap(p * n + j, col * n + j);
                }
                det = -det;
            }
            let pivot = a[col * n + col].clone();
            det *= &pivot;
            for r in col + 1..n {
                let f = &a[r * n + col] / &pivot;
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let t = &f * &a[col * n + j];
                    a[r * n + j] -= t;
                }
            }
        }
        Ok(det)
    }

    pub fn to_f64(&self) -> FloatMatrix {
        FloatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(rat_to_f64).collect(),
        }
    }
}

/// Small dense binary64 matrix, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct FloatMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl FloatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FloatMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_int(m: &IntMatrix) -> Self {
        FloatMatrix {
            rows: m.n,
            cols: m.n,
            data: m.data.iter().map(|v| v.to_f64().unwrap_or(f64::INFINITY)).collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn mul(&self, rhs: &FloatMatrix) -> FloatMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = FloatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn norm_inf(&self) -> f64 {
        norm_inf_f64(&self.data, self.rows, self.cols)
    }

    pub fn transpose(&self) -> FloatMatrix {
        let mut out = FloatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }
}

pub fn norm_inf_f64(data: &[f64], rows: usize, cols: usize) -> f64 {
    (0..rows)
        .map(|i| data[i * cols..(i + 1) * cols].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Lexicographically ordered index pairs (i < j) of an n-element basis.
pub fn wedge_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// Second exterior power of a square matrix given row-major: the matrix of
/// 2x2 minors indexed by lexicographically ordered row and column pairs.
pub fn wedge2_entries<T>(data: &[T], n: usize) -> Result<Vec<T>>
where
    T: Clone + std::ops::Sub<Output = T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    if n < 2 {
        return Err(Error::Shape(format!("second exterior power of a {n}x{n} matrix")));
    }
    assert_eq!(data.len(), n * n);
    let pairs = wedge_pairs(n);
    let m = pairs.len();
    let mut out = Vec::with_capacity(m * m);
    for &(r1, r2) in &pairs {
        for &(c1, c2) in &pairs {
            let a = &data[r1 * n + c1] * &data[r2 * n + c2];
            let b = &data[r1 * n + c2] * &data[r2 * n + c1];
            out.push(a - b);
        }
    }
    Ok(out)
}

pub fn wedge2_int(m: &IntMatrix) -> Result<IntMatrix> {
    let data = wedge2_entries(&m.data, m.n)?;
    let k = m.n * (m.n - 1) / 2;
    Ok(IntMatrix { n: k, data })
}

pub fn wedge2_f64(m: &FloatMatrix) -> Result<FloatMatrix> {
    if m.rows != m.cols {
        return Err(Error::Shape(format!("wedge of {}x{}", m.rows, m.cols)));
    }
    let data = wedge2_entries(&m.data, m.rows)?;
    let k = m.rows * (m.rows.saturating_sub(1)) / 2;
    Ok(FloatMatrix { rows: k, cols: k, data })
}

/// Singular values (descending) by one-sided Jacobi rotations.
pub fn singular_values(m: &FloatMatrix) -> Vec<f64> {
    // Work on columns of A (or of A^T when wide).
    let a = if m.rows >= m.cols { m.clone() } else { m.transpose() };
    let (rows, cols) = (a.rows, a.cols);
    let mut u = a.data;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    let up = u[i * cols + p];
                    let uq = u[i * cols + q];
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 {
                    continue;
                }
                let scale = (alpha * beta).sqrt();
                if scale > 0.0 {
                    off = off.max(gamma.abs() / scale);
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let up = u[i * cols + p];
                    let uq = u[i * cols + q];
                    u[i * cols + p] = c * up - s * uq;
                    u[i * cols + q] = s * up + c * uq;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|i| u[i * cols + j].powi(2)).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}
