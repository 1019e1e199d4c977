use std::f64::consts::PI;

use mqc_magic::compiler::invested_magic;
use mqc_magic::pattern::{builtin, Graph, BUILTIN_NAMES};
use mqc_magic::pauli::MagicValue;
use mqc_magic::qft::{build_qft, qft_profile};
use mqc_magic::qstate::MeasBasis;
use mqc_magic::resources::{
    builtin_potential, canonical_angles, ledger, potential_objective, potential_search,
    PotentialOpts, PotentialSource, Route,
};
use proptest::prelude::*;

#[test]
fn profile_matches_compiler_up_to_ten() {
    for n in 1..=10 {
        let p = qft_profile(n, None).unwrap();
        let c = invested_magic(&build_qft(n, None).unwrap(), 2.0).unwrap();
        assert!((p.total.bits - c.total.bits).abs() < 1e-9, "n={n}");
        assert_eq!(p.j_count, c.j_count);
    }
}

#[test]
fn per_frequency_totals_fall_with_k() {
    for n in 3..=64 {
        let p = qft_profile(n, None).unwrap();
        let tail: Vec<f64> = p.per_frequency.iter().filter(|e| e.k >= 3).map(|e| e.total.bits).collect();
        for w in tail.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "n={n}");
        }
    }
}

#[test]
fn ledgers_never_waste_negative_or_overshoot() {
    for name in BUILTIN_NAMES {
        let params = match name {
            "j_pattern" => vec![PI / 4.0],
            "rotation_pattern" => vec![PI / 4.0, 0.0, 0.0],
            "arbitrary_prep" => vec![0.4, 1.3],
            _ => vec![],
        };
        let p = builtin(name, &params).unwrap();
        let open = p.graph().open_inputs.len();
        let input = (open > 0).then(|| mqc_magic::qstate::init_state(open, "plus-all").unwrap());
        let pot = builtin_potential(name).unwrap();
        let rep = ledger(&p, &Route::FromPattern, input.as_ref(), &PotentialSource::Analytic(pot)).unwrap();
        assert!(rep.wasted.bits >= 0.0, "{name}");
        assert!(rep.reserved_final().bits <= pot.bits + 1e-6, "{name}");
    }
}

#[test]
fn linear_ceiling_over_many_restarts() {
    for n in 3..=5 {
        let opts = PotentialOpts { restarts: 50, grid_seeds: 12, ..Default::default() };
        let g = Graph::path(n).unwrap();
        let measured: Vec<usize> = (0..n - 1).collect();
        let r = potential_search(&g, &measured, None, &opts).unwrap();
        let ceiling = MagicValue::from_bits(2.0, mqc_magic::T_UNIT_BITS).unwrap();
        assert!(r.restart_best.iter().all(|b| *b <= ceiling.bits * (1.0 + 1e-3) + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn argmax_reproduces_value(seed in any::<u64>(), which in 0usize..3) {
        let (g, measured) = match which {
            0 => (Graph::path(4).unwrap(), vec![0, 1]),
            1 => (Graph::star(4).unwrap(), vec![1, 2]),
            _ => (Graph::cycle(5).unwrap(), vec![0, 2]),
        };
        let opts = PotentialOpts { restarts: 2, grid_seeds: 8, seed, ..Default::default() };
        let r = potential_search(&g, &measured, None, &opts).unwrap();
        let again = potential_objective(&g, &r.argmax, None).unwrap();
        prop_assert!((again - r.value.bits).abs() < 1e-8);
    }

    #[test]
    fn canonical_angles_keep_the_state(theta in -10.0..10.0f64, phi in -10.0..10.0f64) {
        let (t, f) = canonical_angles(theta, phi);
        prop_assert!((0.0..=PI / 2.0).contains(&t));
        prop_assert!((0.0..2.0 * PI).contains(&f));
        let a = MeasBasis::new(theta, phi).vector(0);
        let b = MeasBasis::new(t, f).vector(0);
        let overlap = (a[0].conj() * b[0] + a[1].conj() * b[1]).norm();
        prop_assert!((overlap - 1.0).abs() < 1e-9);
    }
}
