//! Randomized Pauli-measurement estimators of M₂ and purity.
//!
//! Each shot measures every qubit in the X, Y or Z eigenbasis of its basis
//! letter. Per basis, `K₄ = (−2)^{−D₄}` is averaged over all 4-subsets of
//! shots (D₄ = weight of the XOR of the four outcomes) and `K₂ = (−2)^{−D₂}`
//! over all pairs. Then `M̂₂ = −log₂ mean K₄ + log₂ mean K₂` and
//! `purity = d · mean K₂`.
//!
//! The U-statistics are computed exactly from the outcome histogram: the
//! kernel is a product over bits, so sums over all ordered tuples are
//! Walsh–Hadamard convolutions, and tuples with repeated indices are removed
//! by inclusion–exclusion.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{Read, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{csv_err, m2_mixed, sre, MagicValue};
use crate::qstate::{apply_1q, c, MixedState, PureState, C64};
use crate::rng::{child_seed, stream};

pub const MAX_SHOT_QUBITS_PURE: usize = 10;
pub const MAX_SHOT_QUBITS_MIXED: usize = 6;
pub const MAX_ANALYTIC_QUBITS: usize = 8;

#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a PureState),
    Mixed(&'a MixedState),
}

impl<'a> From<&'a PureState> for StateRef<'a> {
    fn from(s: &'a PureState) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a MixedState> for StateRef<'a> {
    fn from(s: &'a MixedState) -> Self {
        StateRef::Mixed(s)
    }
}

impl StateRef<'_> {
    pub fn n(&self) -> usize {
        match self {
            StateRef::Pure(s) => s.n(),
            StateRef::Mixed(s) => s.n(),
        }
    }

    /// Exact M₂ (mixed states use the purity-corrected form).
    pub fn m2(&self) -> Result<MagicValue> {
        match self {
            StateRef::Pure(s) => sre(s, 2.0),
            StateRef::Mixed(s) => m2_mixed(s),
        }
    }

    fn check(&self) -> Result<()> {
        let (n, cap) = match self {
            StateRef::Pure(s) => (s.n(), MAX_SHOT_QUBITS_PURE),
            StateRef::Mixed(s) => (s.n(), MAX_SHOT_QUBITS_MIXED),
        };
        if n > cap {
            return Err(Error::limit(format!("shot sampling limited to {cap} qubits")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    /// One letter from `XYZ` per qubit.
    pub basis: String,
    /// Outcome bit strings as integers, qubit 0 in the most significant bit.
    pub outcomes: Vec<u64>,
}

impl ShotRecord {
    pub fn n(&self) -> usize {
        self.basis.len()
    }

    pub fn outcome_string(&self, i: usize) -> String {
        let n = self.n();
        format!("{:0n$b}", self.outcomes[i])
    }
}

/// Rotation taking the eigenbasis of a letter to the computational basis.
fn basis_change(letter: u8) -> Option<[C64; 4]> {
    let h = FRAC_1_SQRT_2;
    match letter {
        b'X' => Some([c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]),
        // H · S†
        b'Y' => Some([c(h, 0.0), c(0.0, -h), c(h, 0.0), c(0.0, h)]),
        _ => None,
    }
}

fn check_basis(basis: &str, n: usize) -> Result<()> {
    if basis.len() != n || !basis.bytes().all(|b| matches!(b, b'X' | b'Y' | b'Z')) {
        return Err(Error::input(format!(
            "basis {basis:?} is not a length-{n} string over XYZ"
        )));
    }
    Ok(())
}

/// Born distribution of measuring every qubit in its basis letter.
pub fn basis_distribution(state: StateRef<'_>, basis: &str) -> Result<Vec<f64>> {
    let n = state.n();
    check_basis(basis, n)?;
    match state {
        StateRef::Pure(s) => {
            let mut amps = s.amps().to_vec();
            for (q, l) in basis.bytes().enumerate() {
                if let Some(m) = basis_change(l) {
                    apply_1q(&mut amps, n, q, &m);
                }
            }
            Ok(amps.iter().map(|a| a.norm_sqr()).collect())
        }
        StateRef::Mixed(r) => {
            let mut r = r.clone();
            for (q, l) in basis.bytes().enumerate() {
                if let Some(m) = basis_change(l) {
                    r.conjugate_1q(q, &m);
                }
            }
            Ok(r.diagonal().into_iter().map(|p| p.max(0.0)).collect())
        }
    }
}

/// Every basis in `{X, Y, Z}^n`, lexicographic.
pub fn all_bases(n: usize) -> Vec<String> {
    let count = 3usize.pow(n as u32);
    (0..count)
        .map(|mut i| {
            let mut b = vec![b'X'; n];
            for q in (0..n).rev() {
                b[q] = b"XYZ"[i % 3];
                i /= 3;
            }
            String::from_utf8(b).expect("ascii")
        })
        .collect()
}

fn sample_basis(basis: &str, probs: &[f64], shots: usize, rng: &mut dyn RngCore) -> Result<ShotRecord> {
    let dist = WeightedIndex::new(probs)
        .map_err(|e| Error::numerical(format!("outcome distribution: {e}")))?;
    Ok(ShotRecord {
        basis: basis.to_string(),
        outcomes: (0..shots).map(|_| dist.sample(rng) as u64).collect(),
    })
}

/// Draws `n_bases` uniform random bases and `shots_per_basis` outcomes for
/// each. Basis `b` samples from its own stream, so results do not depend on
/// thread count.
pub fn sample_shots(
    state: StateRef<'_>,
    n_bases: usize,
    shots_per_basis: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<ShotRecord>> {
    state.check()?;
    let n = state.n();
    let seed = child_seed(rng);
    let mut brng = stream(seed, "bases", 0);
    let bases: Vec<String> = (0..n_bases)
        .map(|_| {
            (0..n)
                .map(|_| ['X', 'Y', 'Z'][brng.gen_range(0..3)])
                .collect()
        })
        .collect();
    bases
        .par_iter()
        .enumerate()
        .map(|(b, basis)| {
            let probs = basis_distribution(state, basis)?;
            let mut r = stream(seed, "shots", b as u64);
            sample_basis(basis, &probs, shots_per_basis, &mut r)
        })
        .collect()
}

/// Every basis of `{X,Y,Z}^n` once, `shots` outcomes each.
pub fn sample_all_bases(state: StateRef<'_>, shots: usize, rng: &mut dyn RngCore) -> Result<Vec<ShotRecord>> {
    state.check()?;
    let seed = child_seed(rng);
    all_bases(state.n())
        .par_iter()
        .enumerate()
        .map(|(b, basis)| {
            let probs = basis_distribution(state, basis)?;
            let mut r = stream(seed, "shots", b as u64);
            sample_basis(basis, &probs, shots, &mut r)
        })
        .collect()
}

fn fwht(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Transform of the kernel `(−1/2)^{|y|}`: a product of 1/2 and 3/2 factors.
fn kernel_hat(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|s| {
            let ones = s.count_ones() as i32;
            1.5f64.powi(ones) * 0.5f64.powi(n as i32 - ones)
        })
        .collect()
}

/// `(Σ_y (f*f)(y) k(y), Σ_y (f*f*f*f)(y) k(y))` over ordered tuples with
/// repetition.
fn power_sums(f: &[f64], khat: &[f64]) -> (f64, f64) {
    let mut g = f.to_vec();
    fwht(&mut g);
    let d = f.len() as f64;
    let mut p2 = 0.0;
    let mut p4 = 0.0;
    for (x, k) in g.iter().zip(khat) {
        let x2 = x * x;
        p2 += x2 * k;
        p4 += x2 * x2 * k;
    }
    (p2 / d, p4 / d)
}

/// Per-basis U-statistic means `(mean K₄, mean K₂)`.
pub fn basis_kernels(record: &ShotRecord) -> Result<(f64, f64)> {
    let n = record.n();
    let big_n = record.outcomes.len();
    if big_n < 4 {
        return Err(Error::input(format!(
            "basis {} has {big_n} shots; the K4 kernel needs at least 4",
            record.basis
        )));
    }
    let mut hist = vec![0.0; 1 << n];
    for &o in &record.outcomes {
        hist[o as usize] += 1.0;
    }
    let (p2, p4) = power_sums(&hist, &kernel_hat(n));
    let nn = big_n as f64;
    // distinct ordered pairs / quadruples by inclusion–exclusion
    let d2 = p2 - nn;
    let d4 = p4 - 6.0 * nn * p2 + 3.0 * nn * nn + 8.0 * p2 - 6.0 * nn;
    let pairs = nn * (nn - 1.0);
    let quads = pairs * (nn - 2.0) * (nn - 3.0);
    Ok((d4 / quads, d2 / pairs))
}

/// Exact per-basis expectations `(E K₄, E K₂)` for a distribution.
pub fn basis_expectations(probs: &[f64]) -> (f64, f64) {
    let n = probs.len().trailing_zeros() as usize;
    let (p2, p4) = power_sums(probs, &kernel_hat(n));
    (p4, p2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub m2: MagicValue,
    pub purity: f64,
    /// T units; leave-one-basis-out jackknife unless replaced by a bootstrap.
    pub stderr: f64,
    pub n_bases: usize,
    /// Smallest shot count over the bases.
    pub shots_per_basis: usize,
    /// 4-subsets contributing to the K₄ means (all of them).
    pub tuples_used: u64,
    pub mean_k4: f64,
    pub mean_k2: f64,
}

impl EstimateResult {
    /// `{m2_bits, m2_T, purity, stderr_T, n_bases, shots_per_basis}`.
    pub fn to_json(&self) -> String {
        let v = serde_json::json!({
            "m2_bits": self.m2.bits,
            "m2_T": self.m2.t_units,
            "purity": self.purity,
            "stderr_T": self.stderr,
            "n_bases": self.n_bases,
            "shots_per_basis": self.shots_per_basis,
        });
        serde_json::to_string_pretty(&v).expect("serializable")
    }
}

fn combine(k4: f64, k2: f64, n: usize) -> Result<(MagicValue, f64)> {
    if !(k4 > 0.0) || !(k2 > 0.0) {
        return Err(Error::Estimator {
            mean_k4: k4,
            mean_k2: k2,
        });
    }
    let bits = -k4.log2() + k2.log2();
    Ok((MagicValue::unclamped(2.0, bits), (1u64 << n) as f64 * k2))
}

fn validate_records(records: &[ShotRecord]) -> Result<usize> {
    let first = records
        .first()
        .ok_or_else(|| Error::input("no shot records"))?;
    let n = first.n();
    if n == 0 || n > MAX_SHOT_QUBITS_PURE {
        return Err(Error::limit(format!("records must cover 1..={MAX_SHOT_QUBITS_PURE} qubits")));
    }
    for (i, r) in records.iter().enumerate() {
        check_basis(&r.basis, n).map_err(|e| Error::input(format!("record {i}: {e}")))?;
        if let Some(o) = r.outcomes.iter().find(|&&o| o >> n != 0) {
            return Err(Error::input(format!("record {i}: outcome {o} exceeds {n} bits")));
        }
    }
    Ok(n)
}

fn estimate_from_kernels(kernels: &[(f64, f64)], n: usize) -> Result<(MagicValue, f64)> {
    let b = kernels.len() as f64;
    let k4 = kernels.iter().map(|k| k.0).sum::<f64>() / b;
    let k2 = kernels.iter().map(|k| k.1).sum::<f64>() / b;
    combine(k4, k2, n)
}

/// Few-shot estimate of M₂ and purity from shot records.
pub fn estimate_m2(records: &[ShotRecord]) -> Result<EstimateResult> {
    let n = validate_records(records)?;
    let kernels: Vec<(f64, f64)> = records
        .par_iter()
        .map(basis_kernels)
        .collect::<Result<_>>()?;
    let b = kernels.len();
    let k4s: f64 = kernels.iter().map(|k| k.0).sum();
    let k2s: f64 = kernels.iter().map(|k| k.1).sum();
    let (m2, purity) = combine(k4s / b as f64, k2s / b as f64, n)?;
    let stderr = if b < 2 {
        f64::NAN
    } else {
        let loo: Vec<f64> = kernels
            .iter()
            .filter_map(|k| {
                let k4 = (k4s - k.0) / (b - 1) as f64;
                let k2 = (k2s - k.1) / (b - 1) as f64;
                combine(k4, k2, n).ok().map(|r| r.0.t_units)
            })
            .collect();
        if loo.len() < b {
            f64::NAN
        } else {
            let mean = loo.iter().sum::<f64>() / b as f64;
            let ss: f64 = loo.iter().map(|x| (x - mean).powi(2)).sum();
            (ss * (b - 1) as f64 / b as f64).sqrt()
        }
    };
    let tuples_used = records
        .iter()
        .map(|r| {
            let m = r.outcomes.len() as u64;
            m * (m - 1) / 2 * (m - 2) / 3 * (m - 3) / 4
        })
        .sum();
    Ok(EstimateResult {
        m2,
        purity,
        stderr,
        n_bases: b,
        shots_per_basis: records.iter().map(|r| r.outcomes.len()).min().unwrap_or(0),
        tuples_used,
        mean_k4: k4s / b as f64,
        mean_k2: k2s / b as f64,
    })
}

/// Exact expectation of the estimator: every basis of `{X,Y,Z}^n` with its
/// exact outcome distribution in place of samples.
pub fn estimate_m2_analytic(state: StateRef<'_>) -> Result<EstimateResult> {
    let n = state.n();
    if n > MAX_ANALYTIC_QUBITS {
        return Err(Error::limit(format!(
            "analytic mode limited to {MAX_ANALYTIC_QUBITS} qubits"
        )));
    }
    let bases = all_bases(n);
    let kernels: Vec<(f64, f64)> = bases
        .par_iter()
        .map(|b| Ok(basis_expectations(&basis_distribution(state, b)?)))
        .collect::<Result<_>>()?;
    let (m2, purity) = estimate_from_kernels(&kernels, n)?;
    let b = kernels.len() as f64;
    Ok(EstimateResult {
        m2,
        purity,
        stderr: 0.0,
        n_bases: kernels.len(),
        shots_per_basis: 0,
        tuples_used: 0,
        mean_k4: kernels.iter().map(|k| k.0).sum::<f64>() / b,
        mean_k2: kernels.iter().map(|k| k.1).sum::<f64>() / b,
    })
}

/// Standard deviation (T units) of the estimate over basis records resampled
/// with replacement. Resamples whose means are not positive are skipped.
pub fn bootstrap_stderr(records: &[ShotRecord], resamples: usize, rng: &mut dyn RngCore) -> Result<f64> {
    if resamples < 100 {
        return Err(Error::input("bootstrap needs at least 100 resamples"));
    }
    if records.len() < 2 {
        return Err(Error::input("bootstrap needs at least 2 basis records"));
    }
    let n = validate_records(records)?;
    let kernels: Vec<(f64, f64)> = records
        .par_iter()
        .map(basis_kernels)
        .collect::<Result<_>>()?;
    let seed = child_seed(rng);
    let b = kernels.len();
    let vals: Vec<f64> = (0..resamples)
        .into_par_iter()
        .filter_map(|r| {
            let mut g = stream(seed, "bootstrap", r as u64);
            let pick: Vec<(f64, f64)> = (0..b).map(|_| kernels[g.gen_range(0..b)]).collect();
            estimate_from_kernels(&pick, n).ok().map(|m| m.0.t_units)
        })
        .collect();
    if vals.len() < 2 {
        return Err(Error::numerical("too few bootstrap resamples gave a finite estimate"));
    }
    if vals.iter().all(|v| *v == vals[0]) {
        return Ok(0.0);
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
    Ok(var.sqrt())
}

// ---- error scaling ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    /// Total shots over all bases.
    pub total_shots: usize,
    pub shots_per_basis: usize,
    /// Mean |M̂₂ − M₂| in T units over the successful repeats.
    pub mean_abs_error: f64,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub exact: MagicValue,
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of log error against log N.
    pub slope: f64,
    /// Slope between the last two grid points.
    pub tail_slope: f64,
}

/// Error of the estimate against total shot count `N`. Every repeat measures
/// all `3^n` bases with `N / 3^n` shots each.
pub fn scaling_study(
    state: StateRef<'_>,
    total_shot_grid: &[usize],
    repeats: usize,
    rng: &mut dyn RngCore,
) -> Result<ScalingResult> {
    if total_shot_grid.len() < 2 || total_shot_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("shot grid must be strictly ascending with at least 2 points"));
    }
    if repeats == 0 {
        return Err(Error::input("need at least one repeat"));
    }
    state.check()?;
    let n = state.n();
    let nb = 3usize.pow(n as u32);
    let exact = state.m2()?;
    let bases = all_bases(n);
    let probs: Vec<Vec<f64>> = bases
        .iter()
        .map(|b| basis_distribution(state, b))
        .collect::<Result<_>>()?;
    let dists: Vec<WeightedIndex<f64>> = probs
        .iter()
        .map(|p| WeightedIndex::new(p).map_err(|e| Error::numerical(e.to_string())))
        .collect::<Result<_>>()?;
    let seed = child_seed(rng);
    let mut points = Vec::with_capacity(total_shot_grid.len());
    for (gi, &total) in total_shot_grid.iter().enumerate() {
        let spb = total / nb;
        if spb < 4 {
            return Err(Error::input(format!(
                "N = {total} gives {spb} shots per basis over {nb} bases; need at least 4"
            )));
        }
        let errs: Vec<Option<f64>> = (0..repeats)
            .into_par_iter()
            .map(|r| {
                let mut g = stream(seed, "scaling", ((gi as u64) << 32) | r as u64);
                let recs: Vec<ShotRecord> = bases
                    .iter()
                    .zip(&dists)
                    .map(|(b, d)| ShotRecord {
                        basis: b.clone(),
                        outcomes: (0..spb).map(|_| d.sample(&mut g) as u64).collect(),
                    })
                    .collect();
                let ks: Result<Vec<(f64, f64)>> = recs.iter().map(basis_kernels).collect();
                ks.ok()
                    .and_then(|ks| estimate_from_kernels(&ks, n).ok())
                    .map(|(m, _)| (m.t_units - exact.t_units).abs())
            })
            .collect();
        let ok: Vec<f64> = errs.iter().flatten().copied().collect();
        if ok.is_empty() {
            return Err(Error::numerical(format!("every repeat failed at N = {total}")));
        }
        points.push(ScalingPoint {
            total_shots: spb * nb,
            shots_per_basis: spb,
            mean_abs_error: ok.iter().sum::<f64>() / ok.len() as f64,
            failures: repeats - ok.len(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.total_shots as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_abs_error.ln()).collect();
    let slope = loglog_slope(&xs, &ys);
    let k = xs.len();
    let tail_slope = (ys[k - 1] - ys[k - 2]) / (xs[k - 1] - xs[k - 2]);
    Ok(ScalingResult {
        exact,
        points,
        slope,
        tail_slope,
    })
}

pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

// ---- shot files ----

/// CSV with header `basis,outcome`, one row per shot. Consecutive rows with
/// the same basis form one record.
pub fn write_shots_csv<W: Write>(records: &[ShotRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["basis", "outcome"]).map_err(csv_err)?;
    for r in records {
        for i in 0..r.outcomes.len() {
            wr.write_record([r.basis.as_str(), r.outcome_string(i).as_str()])
                .map_err(csv_err)?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn read_shots_csv<R: Read>(rd: R) -> Result<Vec<ShotRecord>> {
    let mut rdr = csv::Reader::from_reader(rd);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["basis", "outcome"] {
        return Err(Error::parse("header", "expected \"basis,outcome\""));
    }
    let mut out: Vec<ShotRecord> = Vec::new();
    let mut n = None;
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse(format!("row {line}"), e.to_string()))?;
        if row.len() != 2 {
            return Err(Error::parse(format!("row {line}"), "expected 2 fields"));
        }
        let (basis, bits) = (&row[0], &row[1]);
        let width = *n.get_or_insert(basis.len());
        check_basis(basis, width).map_err(|e| Error::parse(format!("row {line}.basis"), e.to_string()))?;
        if bits.len() != width || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::parse(
                format!("row {line}.outcome"),
                format!("{bits:?} is not a {width}-bit string"),
            ));
        }
        if width > 64 {
            return Err(Error::limit("outcomes wider than 64 bits"));
        }
        let v = u64::from_str_radix(bits, 2).expect("validated");
        match out.last_mut() {
            Some(r) if r.basis == basis => r.outcomes.push(v),
            _ => out.push(ShotRecord {
                basis: basis.to_string(),
                outcomes: vec![v],
            }),
        }
    }
    if out.is_empty() {
        return Err(Error::parse("rows", "no shots"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{init_state, states, to_density};
    use approx::assert_abs_diff_eq;

    fn k_direct(rec: &ShotRecord) -> (f64, f64) {
        let o = &rec.outcomes;
        let k = |x: u64| (-2f64).powi(-(x.count_ones() as i32));
        let (mut s4, mut c4, mut s2, mut c2) = (0.0, 0.0, 0.0, 0.0);
        for a in 0..o.len() {
            for b in a + 1..o.len() {
                s2 += k(o[a] ^ o[b]);
                c2 += 1.0;
                for cc in b + 1..o.len() {
                    for d in cc + 1..o.len() {
                        s4 += k(o[a] ^ o[b] ^ o[cc] ^ o[d]);
                        c4 += 1.0;
                    }
                }
            }
        }
        (s4 / c4, s2 / c2)
    }

    #[test]
    fn kernels_match_brute_force() {
        let mut rng = stream(2, "k", 0);
        for n in 1..=4 {
            for shots in [4, 5, 9, 17] {
                let rec = ShotRecord {
                    basis: "Z".repeat(n),
                    outcomes: (0..shots).map(|_| rng.gen_range(0..1u64 << n)).collect(),
                };
                let (a, b) = basis_kernels(&rec).unwrap();
                let (x, y) = k_direct(&rec);
                assert_abs_diff_eq!(a, x, epsilon = 1e-12);
                assert_abs_diff_eq!(b, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn exact_expectations() {
        let t = states::t_bk();
        let r = estimate_m2_analytic(StateRef::Pure(&t)).unwrap();
        assert_abs_diff_eq!(r.mean_k4, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.mean_k2, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.m2.t_units, 1.0, epsilon = 1e-12);
        let z = init_state(1, "0").unwrap();
        let r = estimate_m2_analytic(StateRef::Pure(&z)).unwrap();
        assert_abs_diff_eq!(r.mean_k4, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.m2.bits, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.purity, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn analytic_matches_sre() {
        let mut rng = stream(8, "an", 0);
        for n in 1..=4 {
            let s = crate::rng::haar_state(n, &mut rng);
            let r = estimate_m2_analytic(StateRef::Pure(&s)).unwrap();
            assert_abs_diff_eq!(r.m2.bits, sre(&s, 2.0).unwrap().bits, epsilon = 1e-10);
        }
        let rho = to_density(&states::cs(), Some(0.2)).unwrap();
        let r = estimate_m2_analytic(StateRef::Mixed(&rho)).unwrap();
        assert_abs_diff_eq!(r.m2.bits, m2_mixed(&rho).unwrap().bits, epsilon = 1e-10);
        assert_abs_diff_eq!(r.purity, rho.purity(), epsilon = 1e-10);
    }

    #[test]
    fn sampling_examples() {
        let mut rng = stream(5, "s", 0);
        let z = init_state(1, "0").unwrap();
        let probs = basis_distribution(StateRef::Pure(&z), "Z").unwrap();
        let rec = sample_basis("Z", &probs, 100, &mut rng).unwrap();
        assert!(rec.outcomes.iter().all(|&o| o == 0));
        let probs = basis_distribution(StateRef::Pure(&z), "X").unwrap();
        let rec = sample_basis("X", &probs, 10_000, &mut rng).unwrap();
        let ones = rec.outcomes.iter().sum::<u64>() as f64;
        assert!((ones - 5000.0).abs() < 5.0 * 50.0);
        let cl = states::cluster4();
        let probs = basis_distribution(StateRef::Pure(&cl), "ZZZZ").unwrap();
        for (i, p) in probs.iter().enumerate() {
            if ![0b0000, 0b0011, 0b1100, 0b1111].contains(&i) {
                assert!(*p < 1e-15);
            }
        }
        let y = states::bloch_half_angle(std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2);
        let probs = basis_distribution(StateRef::Pure(&y), "Y").unwrap();
        assert_abs_diff_eq!(probs[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn permutation_invariance_and_duplicates() {
        let mut rng = stream(6, "p", 0);
        let cs = states::cs();
        let recs = sample_shots(StateRef::Pure(&cs), 20, 12, &mut rng).unwrap();
        let a = estimate_m2(&recs).unwrap();
        let mut shuffled = recs.clone();
        for r in &mut shuffled {
            r.outcomes.reverse();
            r.outcomes.rotate_left(3);
        }
        let b = estimate_m2(&shuffled).unwrap();
        assert_eq!(a.m2.bits.to_bits(), b.m2.bits.to_bits());
        let dup = vec![recs[0].clone(); 10];
        if estimate_m2(&dup).is_ok() {
            assert_eq!(bootstrap_stderr(&dup, 100, &mut rng).unwrap(), 0.0);
        }
        assert!(bootstrap_stderr(&recs, 50, &mut rng).is_err());
    }

    #[test]
    fn too_few_shots() {
        let rec = ShotRecord {
            basis: "Z".into(),
            outcomes: vec![0, 1, 0],
        };
        assert!(estimate_m2(&[rec]).is_err());
    }

    #[test]
    fn failure_is_flagged() {
        // all four-tuples with odd XOR weight give a negative K4 mean
        let rec = ShotRecord {
            basis: "Z".into(),
            outcomes: vec![0, 0, 0, 1],
        };
        match estimate_m2(&[rec]) {
            Err(Error::Estimator { mean_k4, .. }) => assert!(mean_k4 < 0.0),
            other => panic!("expected a flagged failure, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let mut rng = stream(7, "csv", 0);
        let cs = states::cs();
        let recs = sample_shots(StateRef::Pure(&cs), 5, 6, &mut rng).unwrap();
        let mut buf = Vec::new();
        write_shots_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("basis,outcome\n"));
        let back = read_shots_csv(text.as_bytes()).unwrap();
        // adjacent equal bases merge on reading
        let flat = |rs: &[ShotRecord]| -> Vec<(String, u64)> {
            rs.iter().flat_map(|r| r.outcomes.iter().map(|&o| (r.basis.clone(), o))).collect()
        };
        assert_eq!(flat(&back), flat(&recs));
        let bad = "basis,outcome\nXZ,01\nXZ,011\n";
        let e = read_shots_csv(bad.as_bytes()).unwrap_err();
        assert!(e.to_string().contains("row 3"), "{e}");
    }

    #[test]
    fn all_bases_order() {
        assert_eq!(all_bases(1), vec!["X", "Y", "Z"]);
        assert_eq!(all_bases(2)[5], "YZ");
        assert_eq!(all_bases(3).len(), 27);
    }
}
