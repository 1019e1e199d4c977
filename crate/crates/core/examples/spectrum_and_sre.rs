//! Pauli spectrum and stabilizer Rényi entropy of a few named states.

use mqc_magic::pauli::{nullity, pauli_spectrum, sre};
use mqc_magic::qstate::states;

pub fn run_example() -> mqc_magic::Result<Vec<(String, f64)>> {
    let mut rows = Vec::new();
    for name in ["zero:2", "tbk", "cs", "cluster", "ghz:3"] {
        let s = states::named(name)?;
        let spec = pauli_spectrum(&s)?;
        let m2 = sre(&s, 2.0)?;
        println!(
            "{name:>8}: sum Xi = {:.6}  M2 = {:.6} bits = {:.6} T  nullity = {}",
            spec.sum(),
            m2.bits,
            m2.t_units,
            nullity(&s)?
        );
        rows.push((name.to_string(), m2.t_units));
    }
    Ok(rows)
}

fn main() -> mqc_magic::Result<()> {
    run_example().map(|_| ())
}
