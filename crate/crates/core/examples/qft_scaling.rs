//! Per-frequency magic of the QFT, the linear fit of total magic against
//! qubit count, and the fidelity cost of dropping small rotations.

use mqc_magic::qft::{imr_crk, qft_profile, scaling_fit, truncation_fidelity};
use mqc_magic::rng::stream;

pub fn run_example() -> mqc_magic::Result<(f64, f64)> {
    for k in 2..=6 {
        println!("CR_{k}: {:.6} T", imr_crk(k)?.t_units);
    }
    let p = qft_profile(8, None)?;
    println!("QFT8: total {:.4} T over {} J items", p.total.t_units, p.j_count);
    let fit = scaling_fit(8, 32)?;
    println!(
        "fit over [8, 32]: {:.4} n {:+.4}  (n -> inf line {:.4} n {:+.4})",
        fit.slope, fit.intercept, fit.analytic_slope, fit.analytic_intercept
    );
    let mut rng = stream(0, "example-trunc", 0);
    for m in 2..=5 {
        let r = truncation_fidelity(6, m, 200, &mut rng)?;
        println!("n=6 m={m}: min fidelity {:.4}, mean {:.4}", r.min, r.mean);
    }
    Ok((fit.slope, fit.intercept))
}

fn main() -> mqc_magic::Result<()> {
    run_example().map(|_| ())
}
