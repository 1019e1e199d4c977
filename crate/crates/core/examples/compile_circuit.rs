//! J-decompose a small circuit, compile it to a pattern and check every
//! branch against direct simulation.

use mqc_magic::compiler::{circuit_to_pattern, invested_magic, j_decompose, Circuit};
use mqc_magic::pattern::enumerate_branches;
use mqc_magic::qstate::{fidelity, states, Gate};

pub fn run_example() -> mqc_magic::Result<f64> {
    let c = Circuit::new(2, vec![Gate::h(0), Gate::t(0), Gate::cnot(0, 1), Gate::crk(2, 1, 0)])?;
    println!("{}", c.to_json());
    let seq = j_decompose(&c)?;
    let inv = invested_magic(&c, 2.0)?;
    println!(
        "{} J items ({} non-Clifford), invested {:.6} T",
        seq.j_count(),
        inv.non_clifford_count(),
        inv.total.t_units
    );

    let input = states::bloch_half_angle(0.7, 1.9).tensor(&states::bloch_half_angle(2.1, 0.4))?;
    let expected = c.run(&input)?;
    let p = circuit_to_pattern(&c)?;
    let branches = enumerate_branches(&p, Some(&input))?;
    let mut worst = 1.0f64;
    for b in &branches {
        worst = worst.min(fidelity(&b.run.final_state, &expected)?);
    }
    println!("{} branches, worst fidelity {worst:.12}", branches.len());
    Ok(worst)
}

fn main() -> mqc_magic::Result<()> {
    run_example().map(|_| ())
}
