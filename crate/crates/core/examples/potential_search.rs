//! Potential magic: the best reserved magic reachable by measuring part of a
//! graph state.

use mqc_magic::pattern::Graph;
use mqc_magic::resources::{potential_search, PotentialOpts};

pub fn run_example() -> mqc_magic::Result<Vec<f64>> {
    let opts = PotentialOpts::default();
    let cases = [
        ("linear:3", Graph::path(3)?, vec![0, 1]),
        ("linear:4", Graph::path(4)?, vec![0, 1, 2]),
        ("ghz:4", Graph::ghz(4)?, vec![1, 2, 3]),
        ("cycle:4 adjacent", Graph::cycle(4)?, vec![0, 3]),
    ];
    let mut out = Vec::new();
    for (name, g, measured) in cases {
        let r = potential_search(&g, &measured, None, &opts)?;
        println!("{name:>16} measure {measured:?}: {:.4} T", r.value.t_units);
        for s in &r.argmax {
            println!("{:>20} q{} theta {:.4} phi {:.4}", "", s.qubit, s.theta, s.phi);
        }
        out.push(r.value.t_units);
    }
    Ok(out)
}

fn main() -> mqc_magic::Result<()> {
    run_example().map(|_| ())
}
