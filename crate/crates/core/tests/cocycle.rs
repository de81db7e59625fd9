mod common;

use mcf_core::algorithms::{self, AlgorithmId, AlgorithmKind};
use mcf_core::cocycle::{self, CocycleState};
use mcf_core::geometry::SimplexPoint;
use mcf_core::numeric::{IntMatrix, Rational, RationalMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn alg_strategy() -> impl Strategy<Value = AlgorithmId> {
    (0usize..6, 2usize..=4).prop_map(|(k, d)| {
        let kind = AlgorithmKind::ALL[k];
        let d = if kind == AlgorithmKind::Cassaigne { 2 } else { d };
        AlgorithmId::new(kind, d).unwrap()
    })
}

fn start(alg: AlgorithmId, seed: u64) -> SimplexPoint<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    common::domain_point(alg, &mut rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn a_cocycle_law(alg in alg_strategy(), seed in any::<u64>(), m in 0usize..=6, n in 0usize..=6) {
        let x = start(alg, seed);
        let first = cocycle::orbit_exact(alg, &x, n).unwrap();
        let second = cocycle::accumulate_a(alg, &first.end, m).unwrap();
        prop_assert_eq!(cocycle::accumulate_a(alg, &x, m + n).unwrap(), &second * &first.matrix);
    }

    #[test]
    fn d_cocycle_law(alg in alg_strategy(), seed in any::<u64>(), m in 0usize..=5, n in 0usize..=5) {
        let x = start(alg, seed);
        let first = cocycle::orbit_exact(alg, &x, n).unwrap();
        let dn = cocycle::d_matrix_at(alg, &x, n).unwrap();
        let dm = cocycle::d_matrix_at(alg, &first.end, m).unwrap();
        prop_assert_eq!(cocycle::d_matrix_at(alg, &x, m + n).unwrap(), dm.mul(&dn).unwrap());
    }

    #[test]
    fn d_entries_are_p_minus_q_x(alg in alg_strategy(), seed in any::<u64>(), n in 0usize..=8) {
        let x = start(alg, seed);
        let a = cocycle::accumulate_a(alg, &x, n).unwrap();
        let y = algorithms::chart(alg, &x.coords).unwrap();
        let dm = cocycle::d_matrix(&a, &y).unwrap();
        for i in 0..alg.dim {
            for j in 0..alg.dim {
                let p = Rational::from_integer(a.get(i + 1, j + 1).clone());
                let q = Rational::from_integer(a.get(i + 1, 0).clone());
                prop_assert_eq!(dm.get(i, j), &(p - q * &y[j]));
            }
        }
    }

    #[test]
    fn wedge_square_is_multiplicative(
        (n, a, b) in (2usize..=5).prop_flat_map(|n| (
            Just(n),
            proptest::collection::vec(-9i64..=9, n * n),
            proptest::collection::vec(-9i64..=9, n * n),
        ))
    ) {
        let rows = |v: &[i64]| v.chunks(n).map(|r| r.to_vec()).collect::<Vec<_>>();
        let (ma, mb) = (IntMatrix::from_rows(&rows(&a)), IntMatrix::from_rows(&rows(&b)));
        let wa = cocycle::wedge2(&ma).unwrap();
        prop_assert_eq!(&wa, &common::brute_wedge(&ma));
        prop_assert_eq!(cocycle::wedge2(&(&ma * &mb)).unwrap(), &wa * &cocycle::wedge2(&mb).unwrap());
    }
}

#[test]
fn selmer_square_has_unit_norm_on_absorbing_set() {
    common::check_selmer_square_norm(10_000, 21).unwrap();
}

#[test]
fn ledger_reconstruction_matches_exact_replay() {
    common::check_ledger(10_000, 22).unwrap();
    // slope close to the second exponent
    let alg = AlgorithmId::new(AlgorithmKind::Selmer, 2).unwrap();
    let x = common::domain_point_f64(alg, &mut ChaCha8Rng::seed_from_u64(22));
    let mut state = CocycleState::new(alg, x, cocycle::DEFAULT_RENORM).unwrap();
    state.run(10_000).unwrap();
    assert!(state.renorm_events() >= 10_000 / cocycle::DEFAULT_RENORM);
    let slope = state.log_norm_d() / 10_000.0;
    assert!((slope + 0.0707).abs() < 0.01, "{slope}");
}

#[test]
fn fixed_seed_cocycle_laws() {
    common::check_cocycle_laws(200, 24).unwrap();
    common::check_wedge_multiplicative(200, 25).unwrap();
}

#[test]
fn float_orbit_matches_exact_orbit_over_twenty_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    // Jacobi-Perron expands rounding errors fast enough that its float
    // itinerary leaves the exact one within 20 steps.
    for kind in AlgorithmKind::ALL.into_iter().filter(|k| *k != AlgorithmKind::JacobiPerron) {
        let d = if kind == AlgorithmKind::Cassaigne { 2 } else { 3 };
        let alg = AlgorithmId::new(kind, d).unwrap();
        let x = common::domain_point_f64(alg, &mut rng);
        let xe = SimplexPoint::new(x.iter().map(|&v| mcf_core::numeric::rat_from_f64(v)).collect(), alg.domain());
        let exact = cocycle::ln_norm_exact(&cocycle::d_matrix_at(alg, &xe, 20).unwrap()) / 20.0;
        let float = mcf_core::estimator::float_log_norm_d(alg, x, 20).unwrap();
        assert!((exact - float).abs() < 1e-10, "{alg}: exact {exact} float {float}");
    }
}

#[test]
fn identity_d_at_time_zero() {
    let alg = AlgorithmId::new(AlgorithmKind::Brun, 3).unwrap();
    let x = start(alg, 5);
    assert_eq!(cocycle::d_matrix_at(alg, &x, 0).unwrap(), RationalMatrix::identity(3));
}
