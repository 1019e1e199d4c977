//! QFT circuits, per-frequency invested magic, scaling fits and truncation.

use std::f64::consts::PI;
use std::io::Write;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::{invested_magic, j_decompose, unitary_columns, Circuit};
use crate::error::{Error, Result};
use crate::pauli::{csv_err, meas_magic, MagicValue};
use crate::qstate::{fidelity, Gate};
use crate::rng::{child_seed, haar_state, stream};

pub const MAX_FIDELITY_QUBITS: usize = 10;

fn check_cutoff(n: usize, m: Option<usize>) -> Result<usize> {
    if n == 0 {
        return Err(Error::input("QFT needs at least one qubit"));
    }
    match m {
        None => Ok(n),
        Some(m) if m >= 2 && m <= n => Ok(m),
        Some(m) => Err(Error::input(format!("cutoff m = {m} must satisfy 2 <= m <= n = {n}"))),
    }
}

/// H on wire `j`, then `CR_k` controlled by wire `j+k−1` for each k, for every
/// `j`. Gates with `k > m` are dropped; the final wire reversal is omitted.
pub fn build_qft(n: usize, m: Option<usize>) -> Result<Circuit> {
    let m = check_cutoff(n, m)?;
    let mut gates = Vec::new();
    for j in 0..n {
        gates.push(Gate::h(j));
        for i in j + 1..n {
            let k = (i - j + 1) as u32;
            if k as usize <= m {
                gates.push(Gate::crk(k, i, j));
            }
        }
    }
    Circuit::new(n, gates)
}

/// Invested M₂ of one `CR_k`: three J angles of magnitude π/2^k.
pub fn imr_crk(k: u32) -> Result<MagicValue> {
    if k < 2 {
        return Err(Error::input(format!("CR_k cost needs k >= 2, got {k}")));
    }
    let per = meas_magic(PI / 2f64.powi(k as i32));
    MagicValue::from_bits(2.0, 3.0 * per.bits)
}

fn crk_bits(k: usize) -> f64 {
    3.0 * meas_magic(PI / 2f64.powi(k as i32)).bits
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEntry {
    pub k: u32,
    pub gate_count: usize,
    pub per_gate: MagicValue,
    pub total: MagicValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QftProfile {
    pub n: usize,
    pub cutoff: Option<usize>,
    pub per_frequency: Vec<FrequencyEntry>,
    pub total: MagicValue,
    /// J items after the peephole.
    pub j_count: usize,
    /// Count without peephole cancellation between gates: `9(n²−n)/2`, or
    /// `3(m²+2mn−2n−m)/2` with a cutoff.
    pub ladder_j_count: usize,
    /// Number of wire swaps left out of the circuit.
    pub omitted_swaps: usize,
}

/// Per-frequency profile; `j_count` comes from compiling the circuit, so `n`
/// is limited by memory only.
pub fn qft_profile(n: usize, m: Option<usize>) -> Result<QftProfile> {
    let top = check_cutoff(n, m)?;
    let mut per_frequency = Vec::new();
    let mut bits = 0.0;
    for k in 2..=top {
        let per_gate = imr_crk(k as u32)?;
        let count = n - k + 1;
        let total = MagicValue::from_bits(2.0, count as f64 * per_gate.bits)?;
        bits += total.bits;
        per_frequency.push(FrequencyEntry {
            k: k as u32,
            gate_count: count,
            per_gate,
            total,
        });
    }
    let j_count = j_decompose(&build_qft(n, m)?)?.j_count();
    let ladder_j_count = match m {
        None => 9 * (n * n - n) / 2,
        Some(m) => 3 * (m * m + 2 * m * n - 2 * n - m) / 2,
    };
    Ok(QftProfile {
        n,
        cutoff: m,
        per_frequency,
        total: MagicValue::from_bits(2.0, bits)?,
        j_count,
        ladder_j_count,
        omitted_swaps: n / 2,
    })
}

/// Total invested magic of the full QFT for every `n` in `lo..=hi`, in T
/// units, using running sums: `total(n) = (n+1)Σc_k − Σk·c_k` over `k ≤ n`.
pub fn qft_totals(lo: usize, hi: usize) -> Vec<(usize, f64)> {
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut out = Vec::with_capacity(hi.saturating_sub(lo) + 1);
    for n in 1..=hi {
        if n >= 2 {
            let c = crk_bits(n);
            s0 += c;
            s1 += n as f64 * c;
        }
        if n >= lo {
            let bits = (n as f64 + 1.0) * s0 - s1;
            out.push((n, bits.max(0.0) / crate::pauli::T_UNIT_BITS));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// T units per qubit.
    pub slope: f64,
    pub intercept: f64,
    pub n_range: (usize, usize),
    pub residual: f64,
    pub analytic_slope: f64,
    pub analytic_intercept: f64,
}

/// Analytic large-n line: slope `Σ_{k≥2} c_k`, intercept `−Σ (k−1) c_k`.
pub fn analytic_line() -> (f64, f64) {
    let mut slope = 0.0;
    let mut icpt = 0.0;
    for k in 2..=200 {
        let c = crk_bits(k) / crate::pauli::T_UNIT_BITS;
        slope += c;
        icpt -= (k as f64 - 1.0) * c;
    }
    (slope, icpt)
}

/// Least-squares line through the closed-form totals.
pub fn scaling_fit(lo: usize, hi: usize) -> Result<FitResult> {
    if lo < 6 || hi <= lo {
        return Err(Error::input(format!(
            "fit range [{lo}, {hi}] needs 6 <= lo < hi"
        )));
    }
    if hi > 100_000 {
        return Err(Error::limit("fit range limited to n <= 100000"));
    }
    let pts = qft_totals(lo, hi);
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0 as f64).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 as f64 - intercept).abs())
        .fold(0.0, f64::max);
    let (analytic_slope, analytic_intercept) = analytic_line();
    Ok(FitResult {
        slope,
        intercept,
        n_range: (lo, hi),
        residual,
        analytic_slope,
        analytic_intercept,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationResult {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub min: f64,
    pub mean: f64,
}

/// Fidelity between full and truncated QFT outputs on Haar-random inputs.
pub fn truncation_fidelity(
    n: usize,
    m: usize,
    trials: usize,
    rng: &mut dyn RngCore,
) -> Result<TruncationResult> {
    if n > MAX_FIDELITY_QUBITS {
        return Err(Error::limit(format!(
            "truncation fidelity limited to n <= {MAX_FIDELITY_QUBITS}"
        )));
    }
    if trials == 0 {
        return Err(Error::input("need at least one trial"));
    }
    let full = build_qft(n, None)?;
    let trunc = build_qft(n, Some(m))?;
    let seed = child_seed(rng);
    let fids: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = stream(seed, "truncation", t as u64);
            let psi = haar_state(n, &mut r);
            fidelity(&full.run(&psi)?, &trunc.run(&psi)?)
        })
        .collect::<Result<_>>()?;
    Ok(TruncationResult {
        n,
        m,
        trials,
        min: fids.iter().copied().fold(f64::INFINITY, f64::min),
        mean: fids.iter().sum::<f64>() / trials as f64,
    })
}

/// Haar average of the truncation fidelity, `(|tr A|² + d)/(d(d+1))` with
/// `A = F† F_m`.
pub fn truncation_fidelity_mean_exact(n: usize, m: usize) -> Result<f64> {
    if n > 8 {
        return Err(Error::limit("exact truncation mean limited to n <= 8"));
    }
    let full = build_qft(n, None)?;
    let trunc = build_qft(n, Some(m))?;
    let a = unitary_columns(n, |s| full.apply(s))?;
    let b = unitary_columns(n, |s| trunc.apply(s))?;
    let mut tr = num_complex::Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        tr += x.inner(y)?;
    }
    let d = (1usize << n) as f64;
    Ok((tr.norm_sqr() + d) / (d * (d + 1.0)))
}

/// Cross-check of the profile against the compiled circuit.
pub fn profile_matches_compiler(n: usize, m: Option<usize>) -> Result<f64> {
    let p = qft_profile(n, m)?;
    let inv = invested_magic(&build_qft(n, m)?, 2.0)?;
    Ok((p.total.bits - inv.total.bits).abs())
}

// ---- CSV ----

pub fn write_histogram_csv<W: Write>(profiles: &[QftProfile], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["n", "k", "count", "T"]).map_err(csv_err)?;
    for p in profiles {
        for e in &p.per_frequency {
            wr.write_record([
                p.n.to_string(),
                e.k.to_string(),
                e.gate_count.to_string(),
                format!("{:.12}", e.total.t_units),
            ])
            .map_err(csv_err)?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn write_totals_csv<W: Write>(rows: &[(usize, f64)], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["n", "total_T"]).map_err(csv_err)?;
    for (n, t) in rows {
        wr.write_record([n.to_string(), format!("{t:.12}")])
            .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_fidelity_csv<W: Write>(rows: &[TruncationResult], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["n", "m", "min", "mean"]).map_err(csv_err)?;
    for r in rows {
        wr.write_record([
            r.n.to_string(),
            r.m.to_string(),
            format!("{:.12}", r.min),
            format!("{:.12}", r.mean),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::circuit_to_pattern;
    use crate::pattern::{run_pattern, Policy};
    use crate::qstate::{init_state, states, GateKind};
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_circuits() {
        assert_eq!(build_qft(1, None).unwrap().gates, vec![Gate::h(0)]);
        assert_eq!(
            build_qft(2, None).unwrap().gates,
            vec![Gate::h(0), Gate::crk(2, 1, 0), Gate::h(1)]
        );
        let c = build_qft(4, Some(2)).unwrap();
        let ks: Vec<u32> = c
            .gates
            .iter()
            .filter_map(|g| match g.kind {
                GateKind::CRk(k) => Some(k),
                _ => None,
            })
            .collect();
        assert_eq!(ks, vec![2, 2, 2]);
        assert!(build_qft(4, Some(1)).is_err());
        assert!(build_qft(4, Some(5)).is_err());
        assert!(build_qft(0, None).is_err());
    }

    #[test]
    fn crk_costs() {
        assert_abs_diff_eq!(imr_crk(2).unwrap().bits, 1.245_112_497_836_531_6, epsilon = 1e-12);
        assert_abs_diff_eq!(imr_crk(2).unwrap().t_units, 2.128_533_874_054_975, epsilon = 1e-9);
        assert_abs_diff_eq!(imr_crk(3).unwrap().bits, 3.0 * -(7.0f64 / 8.0).log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(imr_crk(10).unwrap().bits, 4.0737e-5, epsilon = 1e-8);
        assert!(imr_crk(1).is_err());
        for k in 2..=12u32 {
            let c = Circuit::new(2, vec![Gate::crk(k, 0, 1)]).unwrap();
            let inv = invested_magic(&c, 2.0).unwrap().total.bits;
            assert_abs_diff_eq!(inv, imr_crk(k).unwrap().bits, epsilon = 1e-12);
        }
        // large k: 3 (π/2^k)² log₂e
        let x = PI / 2f64.powi(30);
        let asym = 3.0 * x * x * std::f64::consts::LOG2_E;
        assert!((imr_crk(30).unwrap().bits / asym - 1.0).abs() < 1e-9);
    }

    #[test]
    fn profile_values() {
        let p = qft_profile(2, None).unwrap();
        assert_eq!(p.per_frequency.len(), 1);
        assert_eq!(p.per_frequency[0].gate_count, 1);
        assert_abs_diff_eq!(p.total.t_units, 2.128534, epsilon = 1e-6);
        let want = [2.128534, 5.245055, 8.637545, 12.100773, 15.581794];
        for (i, w) in want.iter().enumerate() {
            assert_abs_diff_eq!(qft_profile(i + 2, None).unwrap().total.t_units, w, epsilon = 1e-6);
        }
        let p8 = qft_profile(8, None).unwrap();
        let per = [14.8997, 5.9279, 1.3798, 0.28295, 0.053377, 0.0089096, 0.0011141];
        for (e, w) in p8.per_frequency.iter().zip(per) {
            assert!((e.total.t_units / w - 1.0).abs() < 1e-4, "k={} {}", e.k, e.total.t_units);
        }
        let t5 = qft_profile(8, Some(5)).unwrap();
        assert_abs_diff_eq!(p8.total.t_units - t5.total.t_units, 0.06340, epsilon = 1e-5);
    }

    #[test]
    fn profile_agrees_with_compiler() {
        for n in 1..=10 {
            assert!(profile_matches_compiler(n, None).unwrap() < 1e-9);
        }
        assert!(profile_matches_compiler(7, Some(3)).unwrap() < 1e-9);
    }

    #[test]
    fn j_counts() {
        let p = qft_profile(5, None).unwrap();
        assert_eq!(p.ladder_j_count, 90);
        for n in 1..=12 {
            assert_eq!(qft_profile(n, None).unwrap().j_count, 3 * n * n + 2 - 4 * n);
        }
    }

    #[test]
    fn totals_match_profiles() {
        for (n, t) in qft_totals(2, 40) {
            assert_abs_diff_eq!(t, qft_profile(n, None).unwrap().total.t_units, epsilon = 1e-9);
        }
    }

    #[test]
    fn fits() {
        let f = scaling_fit(8, 32).unwrap();
        assert_abs_diff_eq!(f.slope, 3.486960, epsilon = 1e-5);
        assert_abs_diff_eq!(f.intercept, -5.341917, epsilon = 1e-4);
        assert_abs_diff_eq!(f.analytic_slope, 3.486961, epsilon = 1e-5);
        assert_abs_diff_eq!(f.analytic_intercept, -5.341954, epsilon = 1e-5);
        assert!(f.residual < 0.05);
        let g = scaling_fit(100, 200).unwrap();
        assert!((g.slope - g.analytic_slope).abs() < 1e-4);
        assert!(scaling_fit(5, 10).is_err());
        assert!(scaling_fit(10, 10).is_err());
        assert!(scaling_fit(9000, 10000).is_ok());
    }

    #[test]
    fn truncation() {
        let mut rng = stream(1, "test", 0);
        let r = truncation_fidelity(5, 5, 10, &mut rng).unwrap();
        assert_abs_diff_eq!(r.min, 1.0, epsilon = 1e-12);
        let m2 = truncation_fidelity(6, 2, 200, &mut rng).unwrap();
        let m3 = truncation_fidelity(6, 3, 200, &mut rng).unwrap();
        assert!(m2.mean < m3.mean);
        let e2 = truncation_fidelity_mean_exact(6, 2).unwrap();
        let e3 = truncation_fidelity_mean_exact(6, 3).unwrap();
        assert_abs_diff_eq!(e2, 0.409_104_483_951_164_7, epsilon = 1e-9);
        assert_abs_diff_eq!(e3, 0.858_262_883_977_676_4, epsilon = 1e-9);
        assert!((m2.mean - e2).abs() < 0.05 && (m3.mean - e3).abs() < 0.03);
    }

    #[test]
    fn qft2_compiled_reaches_cs() {
        let c = build_qft(2, None).unwrap();
        let inp = init_state(1, "0").unwrap().tensor(&states::plus()).unwrap();
        let r = run_pattern(&circuit_to_pattern(&c).unwrap(), Some(&inp), Policy::FirstFeasible).unwrap();
        let last = *r.reserved_trace.last().unwrap();
        assert_abs_diff_eq!(last.t_units, 2.038_840_227_317_261, epsilon = 1e-6);
    }
}
