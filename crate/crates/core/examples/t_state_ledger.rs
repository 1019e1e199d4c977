//! Invested / reserved / wasted magic for the 1D T-state preparation.

use mqc_magic::pattern::{builtin, enumerate_branches};
use mqc_magic::resources::{builtin_potential, ledger, PotentialSource, ResourceReport, Route};

pub fn run_example() -> mqc_magic::Result<ResourceReport> {
    let p = builtin("t_state_1d", &[])?;
    let pot = PotentialSource::Analytic(builtin_potential("t_state_1d")?);
    let rep = ledger(&p, &Route::FromPattern, None, &pot)?;
    for (i, s) in rep.steps.iter().enumerate() {
        println!(
            "step {} {:>4}: invested {:.4} T  reserved {:.4} T",
            i + 1,
            s.label,
            s.invested_accumulated.t_units,
            s.reserved.t_units
        );
    }
    println!("wasted {:.4} T", rep.wasted.t_units);
    let branches = enumerate_branches(&p, None)?;
    let worst = branches.iter().map(|b| b.fidelity_to_first).fold(1.0, f64::min);
    println!("{} branches, worst fidelity to first {worst:.12}", branches.len());
    Ok(rep)
}

fn main() -> mqc_magic::Result<()> {
    run_example().map(|_| ())
}
