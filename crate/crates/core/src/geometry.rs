//! Points of the ordered simplex, the unit cube and the Cassaigne triangle,
//! the projective chart maps, simplex volumes and uniform sampling.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{Rational, RationalMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    /// 1 >= x_1 >= ... >= x_d >= 0.
    OrderedSimplex,
    /// [0, 1]^d.
    UnitCube,
    /// Nonnegative triples summing to one.
    CassaigneTriangle,
}

/// A point of one of the algorithm domains, exact or binary64.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint<T> {
    pub coords: Vec<T>,
    pub domain: Domain,
}

pub type ExactPoint = SimplexPoint<Rational>;
pub type FloatPoint = SimplexPoint<f64>;

impl<T> SimplexPoint<T> {
    pub fn new(coords: Vec<T>, domain: Domain) -> Self {
        SimplexPoint { coords, domain }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl ExactPoint {
    pub fn from_ints(num: &[i64], den: i64, domain: Domain) -> Self {
        let coords = num.iter().map(|&n| Rational::new(BigInt::from(n), BigInt::from(den))).collect();
        SimplexPoint { coords, domain }
    }

    pub fn to_f64(&self) -> FloatPoint {
        SimplexPoint { coords: self.coords.iter().map(crate::numeric::rat_to_f64).collect(), domain: self.domain }
    }

    /// Checks the invariant of the point's domain exactly.
    pub fn validate(&self) -> Result<()> {
        let c = &self.coords;
        let ok = match self.domain {
            Domain::OrderedSimplex => {
                !c.is_empty()
                    && c[0] <= Rational::one()
                    && c.windows(2).all(|w| w[0] >= w[1])
                    && !c[c.len() - 1].is_negative()
            }
            Domain::UnitCube => c.iter().all(|v| !v.is_negative() && *v <= Rational::one()),
            Domain::CassaigneTriangle => {
                c.iter().all(|v| !v.is_negative()) && c.iter().fold(Rational::zero(), |a, b| a + b) == Rational::one()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {:?} violates {:?}", self.coords, self.domain)))
        }
    }
}

impl FloatPoint {
    /// Exact conversion; every binary64 value is a dyadic rational.
    pub fn to_exact(&self) -> ExactPoint {
        SimplexPoint { coords: self.coords.iter().map(|&v| crate::numeric::rat_from_f64(v)).collect(), domain: self.domain }
    }

    pub fn satisfies_domain(&self) -> bool {
        let c = &self.coords;
        match self.domain {
            Domain::OrderedSimplex => {
                c[0] <= 1.0 && c.windows(2).all(|w| w[0] >= w[1]) && c[c.len() - 1] >= 0.0
            }
            Domain::UnitCube => c.iter().all(|&v| (0.0..=1.0).contains(&v)),
            Domain::CassaigneTriangle => {
                c.iter().all(|&v| v >= 0.0) && (c.iter().sum::<f64>() - 1.0).abs() < 1e-12
            }
        }
    }
}

/// (x_1, ..., x_d) -> (1, x_1, ..., x_d).
pub fn iota<T: Clone + One>(x: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(T::one());
    out.extend_from_slice(x);
    out
}

/// (y_0, ..., y_d) -> (y_1 / y_0, ..., y_d / y_0).
pub fn kappa(y: &[Rational]) -> Result<Vec<Rational>> {
    let (head, tail) = y.split_first().ok_or_else(|| Error::Shape("empty vector".into()))?;
    if head.is_zero() {
        return Err(Error::ChartUndefined);
    }
    Ok(tail.iter().map(|v| v / head).collect())
}

pub fn kappa_f64(y: &[f64]) -> Result<Vec<f64>> {
    let (&head, tail) = y.split_first().ok_or_else(|| Error::Shape("empty vector".into()))?;
    if head == 0.0 {
        return Err(Error::ChartUndefined);
    }
    Ok(tail.iter().map(|v| v / head).collect())
}

/// A d-simplex given by d+1 vertices with rational coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<Vec<Rational>>,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<Rational>>) -> Self {
        Simplex { vertices }
    }

    pub fn from_ints(vertices: &[&[(i64, i64)]]) -> Self {
        Simplex {
            vertices: vertices
                .iter()
                .map(|v| v.iter().map(|&(n, d)| Rational::new(n.into(), d.into())).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices.first().map_or(0, |v| v.len())
    }

    pub fn volume(&self) -> Result<Rational> {
        simplex_volume(self)
    }

    pub fn is_degenerate(&self) -> Result<bool> {
        Ok(self.volume()?.is_zero())
    }

    /// Exact membership test via barycentric coordinates (closed simplex).
    pub fn contains(&self, p: &[Rational]) -> Result<bool> {
        Ok(self.barycentric(p)?.iter().all(|l| !l.is_negative()))
    }

    /// Barycentric coordinates of p; fails on degenerate simplices.
    pub fn barycentric(&self, p: &[Rational]) -> Result<Vec<Rational>> {
        let d = self.dim();
        if p.len() != d {
            return Err(Error::Shape(format!("point of dimension {} in {d}-simplex", p.len())));
        }
        // Solve sum_k l_k (1, v_k) = (1, p) by Cramer's rule.
        let mut cols: Vec<Vec<Rational>> = self.vertices.iter().map(|v| iota(v)).collect();
        let rhs = iota(p);
        let base = det_of_rows(&cols)?;
        if base.is_zero() {
            return Err(Error::Domain("degenerate simplex".into()));
        }
        let mut out = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let saved = std::mem::replace(&mut cols[k], rhs.clone());
            out.push(det_of_rows(&cols)? / &base);
            cols[k] = saved;
        }
        Ok(out)
    }
}

fn det_of_rows(rows: &[Vec<Rational>]) -> Result<Rational> {
    RationalMatrix::from_rows(rows.to_vec()).determinant()
}

/// |det(p_1 - p_0, ..., p_d - p_0)| / d!.
pub fn simplex_volume(s: &Simplex) -> Result<Rational> {
    let d = s.dim();
    if s.vertices.len() != d + 1 || s.vertices.iter().any(|v| v.len() != d) {
        return Err(Error::Shape(format!(
            "{} vertices of dimension {d}; need {} vertices",
            s.vertices.len(),
            d + 1
        )));
    }
    let p0 = &s.vertices[0];
    let rows: Vec<Vec<Rational>> = s.vertices[1..]
        .iter()
        .map(|v| v.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let det = if d == 0 { Rational::one() } else { det_of_rows(&rows)? };
    let fact: BigInt = (1..=d as u64).map(BigInt::from).product();
    Ok(det.abs() / Rational::from_integer(fact))
}

/// Uniform sample (w.r.t. Lebesgue measure) of the given domain.
pub fn sample_point<R: Rng + ?Sized>(domain: Domain, dim: usize, rng: &mut R) -> FloatPoint {
    let coords = match domain {
        Domain::OrderedSimplex => {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            v
        }
        Domain::UnitCube => (0..dim).map(|_| rng.gen::<f64>()).collect(),
        Domain::CassaigneTriangle => {
            // Normalized exponentials are uniform on the standard simplex.
            let e: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let s: f64 = e.iter().sum();
            e.iter().map(|v| v / s).collect()
        }
    };
    SimplexPoint { coords, domain }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn iota_kappa_examples() {
        assert_eq!(iota(&[rat(1, 2), rat(1, 3)]), vec![rat(1, 1), rat(1, 2), rat(1, 3)]);
        assert_eq!(iota(&[rat(0, 1), rat(0, 1)]), vec![rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(kappa(&[rat(2, 1), rat(1, 1), rat(1, 1)]).unwrap(), vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(
            kappa(&[rat(4, 1), rat(3, 1), rat(2, 1), rat(1, 1)]).unwrap(),
            vec![rat(3, 4), rat(1, 2), rat(1, 4)]
        );
        assert_eq!(kappa(&[rat(0, 1), rat(1, 1)]), Err(Error::ChartUndefined));
    }

    #[test]
    fn selmer_branch_triangles_have_area_one_eighth() {
        let sa = Simplex::from_ints(&[&[(1, 1), (1, 1)], &[(1, 1), (1, 2)], &[(1, 2), (1, 2)]]);
        let sb = Simplex::from_ints(&[&[(1, 1), (0, 1)], &[(1, 1), (1, 2)], &[(1, 2), (1, 2)]]);
        assert_eq!(simplex_volume(&sa).unwrap(), rat(1, 8));
        assert_eq!(simplex_volume(&sb).unwrap(), rat(1, 8));
        let degenerate = Simplex::from_ints(&[&[(1, 1), (0, 1)], &[(1, 1), (0, 1)], &[(1, 2), (1, 2)]]);
        assert_eq!(simplex_volume(&degenerate).unwrap(), rat(0, 1));
    }

    #[test]
    fn volume_rejects_bad_shapes() {
        let s = Simplex::from_ints(&[&[(1, 1), (0, 1)], &[(1, 2), (1, 2)]]);
        assert!(simplex_volume(&s).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_in_domain() {
        for domain in [Domain::OrderedSimplex, Domain::UnitCube, Domain::CassaigneTriangle] {
            let dim = if domain == Domain::CassaigneTriangle { 3 } else { 4 };
            let a = sample_point(domain, dim, &mut ChaCha8Rng::seed_from_u64(11));
            let b = sample_point(domain, dim, &mut ChaCha8Rng::seed_from_u64(11));
            assert_eq!(a, b);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..1000 {
                assert!(sample_point(domain, dim, &mut rng).satisfies_domain());
            }
        }
    }

    #[test]
    fn sampled_fraction_in_selmer_absorbing_set() {
        // Area of the absorbing set is 1/4 out of 1/2.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| {
                let p = sample_point(Domain::OrderedSimplex, 2, &mut rng);
                p.coords[0] + p.coords[1] >= 1.0
            })
            .count();
        let frac = hits as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.02, "fraction {frac}");
    }

    #[test]
    fn barycentric_membership() {
        let s = Simplex::from_ints(&[&[(1, 1), (1, 1)], &[(1, 1), (0, 1)], &[(1, 2), (1, 2)]]);
        assert!(s.contains(&[rat(3, 4), rat(1, 2)]).unwrap());
        assert!(!s.contains(&[rat(1, 4), rat(1, 8)]).unwrap());
    }
}
