//! The four-qubit box pattern that prepares |CS⟩, and the same state from a
//! compiled two-qubit QFT.

use mqc_magic::compiler::circuit_to_pattern;
use mqc_magic::pattern::{builtin, enumerate_branches};
use mqc_magic::pauli::sre;
use mqc_magic::qft::build_qft;
use mqc_magic::qstate::{fidelity, init_state, states};
use mqc_magic::resources::{builtin_potential, ledger, PotentialSource, Route};

pub fn run_example() -> mqc_magic::Result<(f64, f64)> {
    let cs = states::cs();
    let p = builtin("cs_box", &[])?;
    let mut worst = 1.0f64;
    for b in enumerate_branches(&p, None)? {
        let fid = fidelity(&b.run.final_state, &cs)?;
        println!("outcomes {:?}: fidelity {fid:.12}", b.run.outcomes);
        worst = worst.min(fid);
    }
    let rep = ledger(&p, &Route::FromPattern, None, &PotentialSource::Analytic(builtin_potential("cs_box")?))?;
    let trace: Vec<String> = rep.steps.iter().map(|s| format!("{:.4}", s.reserved.t_units)).collect();
    println!("reserved trace [{}] T, wasted {:.4} T", trace.join(", "), rep.wasted.t_units);

    let qft = build_qft(2, None)?;
    let input = init_state(1, "0")?.tensor(&states::plus())?;
    let out = qft.run(&input)?;
    let m2 = sre(&out, 2.0)?;
    let pattern = circuit_to_pattern(&qft)?;
    println!(
        "QFT2 |0+>: M2 = {:.4} T, compiled pattern has {} vertices and {} measurements",
        m2.t_units,
        pattern.graph().n,
        pattern.num_measurements()
    );
    Ok((worst, m2.t_units))
}

fn main() -> mqc_magic::Result<()> {
    run_example().map(|_| ())
}
