//! Preparing a single-qubit state with one general measurement versus the
//! planar J route.

use std::f64::consts::PI;

use mqc_magic::resources::compare_arbitrary_vs_standard;

pub fn run_example() -> mqc_magic::Result<Vec<f64>> {
    let t_theta = (1.0f64 / 3.0f64.sqrt()).acos() / 2.0;
    let targets = [(PI / 8.0, 0.0), (t_theta, PI / 4.0), (PI / 4.0, PI / 3.0), (0.0, 1.0)];
    let rows = compare_arbitrary_vs_standard(&targets)?;
    for r in &rows {
        println!(
            "theta {:.4} phi {:.4}: arbitrary {:.4} T, standard {:.4} T, extra {:.4} T",
            r.theta, r.phi, r.arbitrary.t_units, r.standard.t_units, r.difference
        );
    }
    Ok(rows.iter().map(|r| r.difference).collect())
}

fn main() -> mqc_magic::Result<()> {
    run_example().map(|_| ())
}
