//! Few-shot randomized-measurement estimate of M₂ against the exact value.

use mqc_magic::estimator::{estimate_m2, estimate_m2_analytic, sample_shots, StateRef};
use mqc_magic::qstate::states;
use mqc_magic::rng::stream;

pub fn run_example() -> mqc_magic::Result<Vec<(f64, f64, f64)>> {
    let mut rows = Vec::new();
    for name in ["tbk", "cs", "cluster"] {
        let s = states::named(name)?;
        let st = StateRef::Pure(&s);
        let exact = estimate_m2_analytic(st)?;
        let mut rng = stream(7, name, 0);
        let shots = sample_shots(st, 81, 80, &mut rng)?;
        let est = estimate_m2(&shots)?;
        println!(
            "{name:>8}: exact {:.4} T, estimate {:.4} ± {:.4} T, purity {:.3}",
            exact.m2.t_units, est.m2.t_units, est.stderr, est.purity
        );
        rows.push((exact.m2.t_units, est.m2.t_units, est.stderr));
    }
    Ok(rows)
}

fn main() -> mqc_magic::Result<()> {
    run_example().map(|_| ())
}
