// shared by the integration tests through `mod common;`
#![allow(dead_code)]

use mcf_core::algorithms::{self, AlgorithmId, AlgorithmKind, FloatStepper};
use mcf_core::certifier;
use mcf_core::cocycle::{self, CocycleState};
use mcf_core::geometry::{simplex_volume, Domain, Simplex, SimplexPoint};
use mcf_core::numeric::{ln_bigint_approx, rat, IntMatrix, Rational, RationalMatrix};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = std::result::Result<String, String>;

/// Uniform rational `p/q` in [0, 1] with `q <= max_den`.
pub fn small_rational<R: Rng>(rng: &mut R, max_den: i64) -> Rational {
    let q = rng.gen_range(1..=max_den);
    rat(rng.gen_range(0..=q), q)
}

/// Rational point of the d = 2 Selmer absorbing set: 1 >= x1 >= x2, x1 + x2 >= 1.
pub fn absorbing_point_d2<R: Rng>(rng: &mut R) -> Vec<Rational> {
    let q = rng.gen_range(2..=1000i64);
    let x1 = rat(rng.gen_range((q + 1) / 2..=q), q);
    let t = small_rational(rng, 1000);
    let one = rat(1, 1);
    let x2 = (&one - &x1) + t * (&x1 * rat(2, 1) - &one);
    vec![x1, x2]
}

/// Float point of the algorithm's domain, exactly representable as an
/// exact domain point: Cassaigne points are put on a 2^-40 grid so the
/// coordinates sum to 1 exactly; Selmer points are moved into the absorbing
/// set (resampling the rare starts that need more than 10^4 steps).
pub fn domain_point_f64<R: Rng>(alg: mcf_core::algorithms::AlgorithmId, rng: &mut R) -> Vec<f64> {
    use mcf_core::algorithms::AlgorithmKind;
    loop {
        let mut x = mcf_core::geometry::sample_point(alg.domain(), alg.point_len(), rng).coords;
        match alg.kind {
            AlgorithmKind::Cassaigne => {
                let grid = (1u64 << 40) as f64;
                x[0] = (x[0] * grid).floor() / grid;
                x[1] = (x[1] * grid).floor() / grid;
                x[2] = 1.0 - x[0] - x[1];
            }
            AlgorithmKind::Selmer => {
                if mcf_core::algorithms::burn_in_f64(&mut x, 10_000).is_err() {
                    continue;
                }
            }
            _ => {}
        }
        return x;
    }
}

/// Exact version of [`domain_point_f64`].
pub fn domain_point<R: Rng>(alg: mcf_core::algorithms::AlgorithmId, rng: &mut R) -> mcf_core::geometry::ExactPoint {
    let x = domain_point_f64(alg, rng);
    mcf_core::geometry::SimplexPoint::new(x.iter().map(|&v| mcf_core::numeric::rat_from_f64(v)).collect(), alg.domain())
}

pub fn dims(kind: AlgorithmKind) -> Vec<usize> {
    match kind {
        AlgorithmKind::Cassaigne => vec![2],
        _ => vec![2, 3, 4, 5],
    }
}

/// `lift(T x) * A(x)` must be a positive multiple of `lift(x)`.
pub fn consistent(alg: AlgorithmId, x: &[Rational]) -> bool {
    let p = SimplexPoint::new(x.to_vec(), alg.domain());
    let s = algorithms::step(alg, &p).unwrap();
    let lx = algorithms::lift(alg, x);
    let v = RationalMatrix::from_int(&s.matrix).left_apply(&algorithms::lift(alg, &s.next.coords)).unwrap();
    let k = lx.iter().position(|c| !c.is_zero()).unwrap();
    let c = &v[k] / &lx[k];
    c.is_positive() && v.iter().zip(&lx).all(|(a, b)| *a == &c * b)
}

/// `points` exact points per algorithm, spread over its dimensions.
pub fn check_matrix_map(points: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for kind in AlgorithmKind::ALL {
        let ds = dims(kind);
        for &d in ds.iter().cycle().take(points) {
            let alg = AlgorithmId::new(kind, d).unwrap();
            let x = domain_point(alg, &mut rng);
            if !consistent(alg, &x.coords) {
                return Err(format!("{alg} at {:?}", x.to_f64().coords));
            }
        }
    }
    Ok(format!("{points} points x 6 algorithms"))
}

fn random_alg<R: Rng>(rng: &mut R) -> AlgorithmId {
    let kind = AlgorithmKind::ALL[rng.gen_range(0..6)];
    let d = if kind == AlgorithmKind::Cassaigne { 2 } else { rng.gen_range(2..=4) };
    AlgorithmId::new(kind, d).unwrap()
}

/// A^(m+n)(x) = A^(m)(T^n x) A^(n)(x) and the same for D, exactly.
pub fn check_cocycle_laws(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let alg = random_alg(&mut rng);
        let (m, n) = (rng.gen_range(0..=5), rng.gen_range(0..=5));
        let x = domain_point(alg, &mut rng);
        let first = cocycle::orbit_exact(alg, &x, n).unwrap();
        let a = cocycle::accumulate_a(alg, &x, m + n).unwrap();
        if a != &cocycle::accumulate_a(alg, &first.end, m).unwrap() * &first.matrix {
            return Err(format!("A law, {alg}, m={m} n={n}"));
        }
        let dn = cocycle::d_matrix_at(alg, &x, n).unwrap();
        let dm = cocycle::d_matrix_at(alg, &first.end, m).unwrap();
        if cocycle::d_matrix_at(alg, &x, m + n).unwrap() != dm.mul(&dn).unwrap() {
            return Err(format!("D law, {alg}, m={m} n={n}"));
        }
    }
    Ok(format!("{cases} random (algorithm, x, m, n)"))
}

/// 2x2 minors by direct expansion, pairs in lexicographic order.
pub fn brute_wedge(m: &IntMatrix) -> IntMatrix {
    let n = m.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut w = IntMatrix::zeros(pairs.len());
    for (r, &(i, j)) in pairs.iter().enumerate() {
        for (c, &(k, l)) in pairs.iter().enumerate() {
            w.set(r, c, m.get(i, k) * m.get(j, l) - m.get(i, l) * m.get(j, k));
        }
    }
    w
}

pub fn check_wedge_multiplicative(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let n = rng.gen_range(2..=5);
        let mut random = || {
            IntMatrix::from_rows(&(0..n).map(|_| (0..n).map(|_| rng.gen_range(-9..=9)).collect()).collect::<Vec<_>>())
        };
        let (a, b) = (random(), random());
        let wa = cocycle::wedge2(&a).unwrap();
        if wa != brute_wedge(&a) || cocycle::wedge2(&(&a * &b)).unwrap() != &wa * &cocycle::wedge2(&b).unwrap() {
            return Err(format!("{a:?} {b:?}"));
        }
    }
    Ok(format!("{cases} random pairs, sizes 2..5"))
}

pub fn check_selmer_square_norm(points: usize, seed: u64) -> Check {
    let alg = AlgorithmId::new(AlgorithmKind::Selmer, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..points {
        let x = SimplexPoint::new(absorbing_point_d2(&mut rng), Domain::OrderedSimplex);
        let norm = cocycle::d_matrix_at(alg, &x, 2).unwrap().norm_inf();
        if norm != rat(1, 1) {
            return Err(format!("norm {norm} at {:?}", x.coords));
        }
    }
    Ok(format!("{points} rational points"))
}

/// Leb of the absorbing set, from its vertices written out by hand.
pub fn base_volume(dim: usize) -> Rational {
    let v = |c: &[(i64, i64)]| c.iter().map(|&(p, q)| rat(p, q)).collect::<Vec<_>>();
    let verts = match dim {
        2 => vec![v(&[(1, 1), (1, 1)]), v(&[(1, 1), (0, 1)]), v(&[(1, 2), (1, 2)])],
        _ => vec![
            v(&[(1, 1), (1, 1), (1, 1)]),
            v(&[(1, 1), (1, 1), (0, 1)]),
            v(&[(1, 1), (1, 2), (1, 2)]),
            v(&[(1, 2), (1, 2), (1, 2)]),
        ],
    };
    simplex_volume(&Simplex::new(verts)).unwrap()
}

/// Sum of cylinder volumes equals Leb(base) at every depth up to `max_depth`.
pub fn check_tiling(dim: usize, max_depth: usize) -> Check {
    let leb = base_volume(dim);
    for depth in 1..=max_depth {
        let mut total = Rational::zero();
        let mut count = 0u64;
        for c in certifier::enumerate_cylinders(dim, depth).unwrap() {
            let c = c.map_err(|e| e.to_string())?;
            if c.volume <= Rational::zero() || c.word.len() != depth {
                return Err(format!("cylinder {}", c.word_string()));
            }
            total += &c.volume;
            count += 1;
        }
        if count != 1u64 << depth || total != leb {
            return Err(format!("d={dim} depth {depth}: {count} cylinders, total {total}"));
        }
    }
    Ok(format!("d={dim}, depths 1..{max_depth}, total {leb}"))
}

/// Exact replay of the float orbit: the D factors `Pi A(x_k) H(y_k)` are
/// multiplied in integers with the dyadic chart coordinates scaled by a
/// power of two. Returns `ln ||D^(n)||_inf`.
pub fn exact_replay_log_norm_d(alg: AlgorithmId, x0: &[f64], n: u64) -> f64 {
    let d = alg.dim;
    let mut stepper = FloatStepper::new(alg);
    let mut x = x0.to_vec();
    let mut y = vec![0.0; d];
    let mut m: Vec<BigInt> = (0..d * d).map(|k| if k % (d + 1) == 0 { BigInt::one() } else { BigInt::zero() }).collect();
    let mut scale: u64 = 0;
    for _ in 0..n {
        stepper.chart(&x, &mut y);
        let ys: Vec<Rational> = y.iter().map(|&v| Rational::from_float(v).unwrap()).collect();
        let s = ys.iter().map(|v| v.denom().bits() - 1).max().unwrap();
        let num: Vec<BigInt> = ys.iter().map(|v| v.numer() << (s - (v.denom().bits() - 1))).collect();
        stepper.step(&mut x).unwrap();
        // G = 2^s H(y) D
        let mut g = vec![BigInt::zero(); (d + 1) * d];
        for c in 0..d {
            let mut acc = BigInt::zero();
            for j in 0..d {
                acc += &num[j] * &m[j * d + c];
            }
            g[c] = -acc;
        }
        for k in 0..d * d {
            g[d + k] = &m[k] << s;
        }
        let mut next = vec![BigInt::zero(); d * d];
        for &(i, j, v) in &stepper.entries {
            if i == 0 {
                continue;
            }
            let v = BigInt::from(v as i64);
            for c in 0..d {
                next[(i - 1) * d + c] += &v * &g[j * d + c];
            }
        }
        m = next;
        scale += s;
    }
    let norm = (0..d)
        .map(|i| m[i * d..(i + 1) * d].iter().map(|v| v.abs()).sum::<BigInt>())
        .max()
        .unwrap();
    ln_bigint_approx(&norm) - scale as f64 * std::f64::consts::LN_2
}

/// Ledger-reconstructed `ln ||D^(n)||` of Selmer d = 2 against the exact replay.
pub fn check_ledger(n: u64, seed: u64) -> Check {
    let alg = AlgorithmId::new(AlgorithmKind::Selmer, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = domain_point_f64(alg, &mut rng);
    let mut state = CocycleState::new(alg, x.clone(), cocycle::DEFAULT_RENORM).unwrap();
    state.run(n).unwrap();
    let exact = exact_replay_log_norm_d(alg, &x, n);
    let diff = (state.log_norm_d() - exact).abs();
    let msg = format!("n={n}, ledger {:.9}, exact {exact:.9}, diff {diff:.2e}", state.log_norm_d());
    if diff < 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}
