use std::f64::consts::PI;

use mqc_magic::compiler::{
    circuit_to_pattern, invested_magic, j_decompose, random_circuit, random_clifford_circuit, Circuit,
};
use mqc_magic::pattern::{
    build_graph_state, builtin, enumerate_branches, j_pattern, rotation_pattern, Graph, Pattern,
    BUILTIN_NAMES,
};
use mqc_magic::pauli::{pauli_expectation, PauliString};
use mqc_magic::qstate::{fidelity, init_state, j_matrix, mat2_mul, Gate};
use mqc_magic::resources::{ledger, PotentialSource, Route};
use mqc_magic::rng::{haar_state, stream};
use mqc_magic::MagicValue;
use proptest::prelude::*;
use rand::Rng;

fn default_params(name: &str) -> Vec<f64> {
    match name {
        "j_pattern" => vec![0.3],
        "rotation_pattern" => vec![0.3, 1.1, -0.7],
        "arbitrary_prep" => vec![0.4, 1.3],
        _ => vec![],
    }
}

#[test]
fn builtin_traces_are_branch_invariant() {
    for name in BUILTIN_NAMES {
        let p = builtin(name, &default_params(name)).unwrap();
        let open = p.graph().open_inputs.len();
        let input = if open > 0 { Some(init_state(open, "plus-all").unwrap()) } else { None };
        let runs = enumerate_branches(&p, input.as_ref()).unwrap();
        let first = &runs[0].run.reserved_trace;
        for r in &runs {
            for (a, b) in r.run.reserved_trace.iter().zip(first) {
                assert!((a.bits - b.bits).abs() < 1e-9, "{name}");
            }
        }
    }
}

/// Step-wise invested magic against reserved magic on 100 random 2-wire
/// circuits from `|++⟩`. The bound is not a theorem, so violations are
/// reported; with a single non-Clifford J item it must hold.
#[test]
fn invested_versus_reserved_survey() {
    let mut rng = stream(11, "bound", 0);
    let mut violations = Vec::new();
    for i in 0..100 {
        let c = random_circuit(2, rng.gen_range(1..=3), &mut rng);
        let p = circuit_to_pattern(&c).unwrap();
        let input = init_state(2, "plus-all").unwrap();
        let zero = PotentialSource::Analytic(MagicValue::zero(2.0));
        let rep = ledger(&p, &Route::FromPattern, Some(&input), &zero).unwrap();
        let non_clifford = invested_magic(&c, 2.0).unwrap().non_clifford_count();
        for s in &rep.steps {
            let gap = s.reserved.bits - s.invested_accumulated.bits;
            if gap > 1e-9 {
                assert!(non_clifford > 1, "circuit {i}: single non-Clifford item violates the bound");
                violations.push((i, s.label.clone(), gap / mqc_magic::T_UNIT_BITS));
                break;
            }
        }
    }
    println!("{} of 100 circuits have reserved > invested at some step", violations.len());
    for (i, label, gap) in &violations {
        println!("  circuit {i} at {label}: excess {gap:.4} T");
    }
}

#[test]
fn reserved_can_exceed_invested() {
    use mqc_magic::C64;
    let u = [
        C64::new(-0.46223360697489274, 0.1716126295767812),
        C64::new(-0.8612459727815445, 0.12306328583413573),
        C64::new(-0.49980930003086027, -0.7120954020041026),
        C64::new(0.19129182374362932, 0.4544427799141641),
    ];
    let c = Circuit::new(2, vec![Gate::crk(4, 0, 1), Gate::u2(0, u)]).unwrap();
    let p = circuit_to_pattern(&c).unwrap();
    let input = init_state(2, "plus-all").unwrap();
    let zero = PotentialSource::Analytic(MagicValue::zero(2.0));
    let rep = ledger(&p, &Route::FromPattern, Some(&input), &zero).unwrap();
    let s = rep.steps.iter().find(|s| s.label == "M7").unwrap();
    assert!((s.invested_accumulated.t_units - 0.384119).abs() < 1e-6);
    assert!((s.reserved.t_units - 0.537123).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn j_pattern_equals_gate(seed in any::<u64>(), alpha in -PI..PI) {
        let mut rng = stream(seed, "jpat", 0);
        let input = haar_state(1, &mut rng);
        let mut want = input.clone();
        want.apply(&Gate::j(0, alpha)).unwrap();
        for b in enumerate_branches(&j_pattern(alpha), Some(&input)).unwrap() {
            prop_assert!(fidelity(&b.run.final_state, &want).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn rotation_pattern_equals_chain(seed in any::<u64>(), a in -PI..PI, b in -PI..PI, g in -PI..PI) {
        let mut rng = stream(seed, "rot", 0);
        let input = haar_state(1, &mut rng);
        let u = mat2_mul(&j_matrix(0.0), &mat2_mul(&j_matrix(-a), &mat2_mul(&j_matrix(-b), &j_matrix(-g))));
        let mut want = input.clone();
        want.apply(&Gate::u2(0, u)).unwrap();
        for br in enumerate_branches(&rotation_pattern(a, b, g), Some(&input)).unwrap() {
            prop_assert!(fidelity(&br.run.final_state, &want).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn graph_state_stabilizers(seed in any::<u64>(), n in 2usize..=7) {
        let mut rng = stream(seed, "graph", 0);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.4) {
                    edges.push((a, b));
                }
            }
        }
        let g = Graph::new(n, &edges).unwrap();
        let s = build_graph_state(&g, None).unwrap();
        let bit = |q: usize| 1u64 << (n - 1 - q);
        for j in 0..n {
            let z = g.neighbors(j).iter().fold(0, |m, &i| m | bit(i));
            let k = PauliString::new(n, bit(j), z).unwrap();
            prop_assert!((pauli_expectation(&s, &k).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn compiled_pattern_matches_circuit(seed in any::<u64>(), n in 1usize..=2, len in 1usize..=3) {
        let mut rng = stream(seed, "comp", 0);
        let c = random_circuit(n, len, &mut rng);
        let p = circuit_to_pattern(&c).unwrap();
        prop_assume!(p.num_measurements() <= 10);
        let input = haar_state(n, &mut rng);
        let want = c.run(&input).unwrap();
        for b in enumerate_branches(&p, Some(&input)).unwrap() {
            prop_assert!(fidelity(&b.run.final_state, &want).unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn invested_zero_iff_clifford_angles(seed in any::<u64>(), n in 1usize..=3, len in 1usize..8) {
        let mut rng = stream(seed, "faith", 0);
        let c = if rng.gen_bool(0.5) {
            random_clifford_circuit(n, len, &mut rng)
        } else {
            random_circuit(n, len, &mut rng)
        };
        let seq = j_decompose(&c).unwrap();
        let clifford = seq.j_angles().iter().all(|a| {
            let r = (a / (PI / 2.0)).round();
            (a - r * PI / 2.0).abs() < 1e-12
        });
        let inv = invested_magic(&c, 2.0).unwrap().total.bits;
        prop_assert_eq!(inv == 0.0, clifford);
    }

    #[test]
    fn clifford_wrapping_keeps_invested(seed in any::<u64>(), n in 1usize..=3, len in 1usize..8) {
        let mut rng = stream(seed, "wrap", 0);
        let c = random_circuit(n, len, &mut rng);
        let l = random_clifford_circuit(n, len, &mut rng);
        let r = random_clifford_circuit(n, len, &mut rng);
        let w = l.then(&c).unwrap().then(&r).unwrap();
        let a = invested_magic(&c, 2.0).unwrap().total.bits;
        let b = invested_magic(&w, 2.0).unwrap().total.bits;
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn invested_is_additive(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = stream(seed, "add", 0);
        let a = random_circuit(n, 5, &mut rng);
        let b = random_circuit(n, 5, &mut rng);
        let ia = invested_magic(&a, 2.0).unwrap().total.bits;
        let ib = invested_magic(&b, 2.0).unwrap().total.bits;
        let iab = invested_magic(&a.then(&b).unwrap(), 2.0).unwrap().total.bits;
        prop_assert!((iab - ia - ib).abs() < 1e-12);
    }

    #[test]
    fn circuit_json_round_trip(seed in any::<u64>(), n in 1usize..=4, len in 0usize..10) {
        let mut rng = stream(seed, "json", 0);
        let c = random_circuit(n, len, &mut rng);
        prop_assert_eq!(Circuit::from_json(&c.to_json()).unwrap(), c.clone());
        let p = circuit_to_pattern(&c).unwrap();
        prop_assert_eq!(Pattern::from_json(&p.to_json()).unwrap(), p);
    }
}
