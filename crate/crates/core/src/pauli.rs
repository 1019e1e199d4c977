//! Pauli spectra and stabilizer Rényi entropies.
//!
//! Pauli strings are phase-free `(x_mask, z_mask)` pairs. Mask bits follow the
//! amplitude index convention: qubit `q` sits at bit `n - 1 - q`, so the string
//! label `"XIZ"` has `x_mask = 0b100`, `z_mask = 0b001`.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{c, MixedState, PureState, C64, MAX_MIXED_QUBITS};

/// `log₂(3/2)`: M₂ of the Bloch (1,1,1)/√3 state, the reporting unit "T".
pub const T_UNIT_BITS: f64 = 0.584_962_500_721_156_2;

pub const MAX_SPECTRUM_QUBITS: usize = 10;

const CLAMP_TOL: f64 = 1e-9;
const ZERO_XI: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub n: usize,
    pub x_mask: u64,
    pub z_mask: u64,
}

impl PauliString {
    pub fn new(n: usize, x_mask: u64, z_mask: u64) -> Result<Self> {
        let lim = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        if n == 0 || n > 32 || x_mask & !lim != 0 || z_mask & !lim != 0 {
            return Err(Error::input("Pauli masks exceed the qubit count"));
        }
        Ok(PauliString { n, x_mask, z_mask })
    }

    pub fn identity(n: usize) -> Self {
        PauliString {
            n,
            x_mask: 0,
            z_mask: 0,
        }
    }

    /// Parses a label over `IXYZ`, qubit 0 first.
    pub fn parse(label: &str) -> Result<Self> {
        let n = label.len();
        let (mut x, mut z) = (0u64, 0u64);
        for (q, ch) in label.chars().enumerate() {
            let b = 1u64 << (n - 1 - q);
            match ch {
                'I' => {}
                'X' => x |= b,
                'Z' => z |= b,
                'Y' => {
                    x |= b;
                    z |= b
                }
                _ => return Err(Error::input(format!("bad Pauli letter {ch:?}"))),
            }
        }
        PauliString::new(n, x, z)
    }

    /// Single-qubit Pauli `letter` on qubit `q`.
    pub fn single(n: usize, q: usize, letter: char) -> Result<Self> {
        let mut s = vec!['I'; n];
        if q >= n {
            return Err(Error::QubitRange { qubit: q, n });
        }
        s[q] = letter;
        Self::parse(&s.into_iter().collect::<String>())
    }

    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    /// Dense index into a [`SpectrumVector`].
    pub fn index(&self) -> usize {
        ((self.x_mask as usize) << self.n) | self.z_mask as usize
    }

    pub fn from_index(n: usize, idx: usize) -> Self {
        PauliString {
            n,
            x_mask: (idx >> n) as u64,
            z_mask: (idx & ((1 << n) - 1)) as u64,
        }
    }

    /// Amplitude action: `P|i⟩ = phase(i)|i ⊕ x⟩`.
    #[inline]
    fn phase(&self, i: usize) -> C64 {
        let y = (self.x_mask & self.z_mask).count_ones();
        let sign = (i as u64 & self.z_mask).count_ones();
        let k = (y + 2 * sign) % 4;
        [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][k as usize]
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            let b = 1u64 << (self.n - 1 - q);
            let ch = match (self.x_mask & b != 0, self.z_mask & b != 0) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

/// Anything a Pauli expectation can be taken on.
pub trait PauliObservable {
    fn num_qubits(&self) -> usize;
    fn expectation(&self, p: &PauliString) -> f64;
}

impl PauliObservable for PureState {
    fn num_qubits(&self) -> usize {
        self.n()
    }

    fn expectation(&self, p: &PauliString) -> f64 {
        let a = self.amps();
        let x = p.x_mask as usize;
        let v: C64 = (0..a.len()).map(|i| a[i ^ x].conj() * p.phase(i) * a[i]).sum();
        v.re
    }
}

impl PauliObservable for MixedState {
    fn num_qubits(&self) -> usize {
        self.n()
    }

    fn expectation(&self, p: &PauliString) -> f64 {
        let d = self.dim();
        let r = self.rho();
        let x = p.x_mask as usize;
        let v: C64 = (0..d).map(|j| p.phase(j) * r[j * d + (j ^ x)]).sum();
        v.re
    }
}

/// `⟨ψ|P|ψ⟩` or `tr(Pρ)`.
pub fn pauli_expectation<S: PauliObservable + ?Sized>(state: &S, p: &PauliString) -> Result<f64> {
    if state.num_qubits() != p.n {
        return Err(Error::input(format!(
            "Pauli string on {} qubits applied to {}-qubit state",
            p.n,
            state.num_qubits()
        )));
    }
    Ok(state.expectation(p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumVector {
    pub n: usize,
    /// `Ξ_P = tr(Pρ)²/d`, indexed by `(x_mask << n) | z_mask`.
    pub xi: Vec<f64>,
    pub purity: f64,
}

impl SpectrumVector {
    pub fn get(&self, p: &PauliString) -> f64 {
        self.xi[p.index()]
    }

    pub fn sum(&self) -> f64 {
        self.xi.iter().sum()
    }

    /// `Σ Ξ^α`, dropping numerically zero entries.
    pub fn power_sum(&self, alpha: f64) -> f64 {
        if alpha == 2.0 {
            return self.xi.iter().map(|x| x * x).sum();
        }
        self.xi
            .iter()
            .filter(|&&x| x > ZERO_XI)
            .map(|&x| x.powf(alpha))
            .sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x_mask", "z_mask", "xi"]).map_err(csv_err)?;
        for (idx, xi) in self.xi.iter().enumerate() {
            let p = PauliString::from_index(self.n, idx);
            wr.write_record([
                p.x_mask.to_string(),
                p.z_mask.to_string(),
                format!("{xi:.17e}"),
            ])
            .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn check_spectrum_n(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::limit(format!(
            "Pauli spectrum limited to {limit} qubits, got {n}"
        )));
    }
    Ok(())
}

/// In-place transform of a `d×d` row-major operator into `tr(P·ρ)` values
/// laid out as `[x_mask * d + z_mask]`, one qubit at a time.
fn pauli_transform(n: usize, buf: &mut [C64]) {
    let d = 1usize << n;
    for p in 0..n {
        let row_half = d << p;
        let col = 1usize << p;
        buf.par_chunks_mut(2 * row_half).for_each(|chunk| {
            let (r0, r1) = chunk.split_at_mut(row_half);
            for j in 0..row_half {
                if j & col != 0 {
                    continue;
                }
                let (a00, a01) = (r0[j], r0[j | col]);
                let (a10, a11) = (r1[j], r1[j | col]);
                r0[j] = a00 + a11;
                r0[j | col] = a00 - a11;
                r1[j] = a01 + a10;
                r1[j | col] = c(0.0, 1.0) * (a01 - a10);
            }
        });
    }
}

fn spectrum_from_operator(n: usize, mut buf: Vec<C64>, purity: f64) -> SpectrumVector {
    pauli_transform(n, &mut buf);
    let d = (1usize << n) as f64;
    let xi = buf.iter().map(|t| t.re * t.re / d).collect();
    SpectrumVector { n, xi, purity }
}

/// Full Pauli spectrum via the per-qubit transform, `O(4^n n)`.
pub fn pauli_spectrum(state: &PureState) -> Result<SpectrumVector> {
    check_spectrum_n(state.n(), MAX_SPECTRUM_QUBITS)?;
    let a = state.amps();
    let d = a.len();
    let mut rho = vec![c(0.0, 0.0); d * d];
    rho.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
        for (j, r) in row.iter_mut().enumerate() {
            *r = a[i] * a[j].conj();
        }
    });
    Ok(spectrum_from_operator(state.n(), rho, 1.0))
}

pub fn pauli_spectrum_mixed(rho: &MixedState) -> Result<SpectrumVector> {
    check_spectrum_n(rho.n(), MAX_MIXED_QUBITS)?;
    Ok(spectrum_from_operator(rho.n(), rho.rho().to_vec(), rho.purity()))
}

/// Reference path: one expectation per Pauli string.
pub fn pauli_spectrum_naive<S: PauliObservable + Sync + ?Sized>(state: &S) -> Result<SpectrumVector> {
    let n = state.num_qubits();
    check_spectrum_n(n, MAX_SPECTRUM_QUBITS)?;
    let d = (1usize << n) as f64;
    let xi: Vec<f64> = (0..1usize << (2 * n))
        .into_par_iter()
        .map(|idx| {
            let e = state.expectation(&PauliString::from_index(n, idx));
            e * e / d
        })
        .collect();
    let purity = xi.iter().sum();
    Ok(SpectrumVector { n, xi, purity })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagicValue {
    pub alpha: f64,
    pub bits: f64,
    pub t_units: f64,
}

impl MagicValue {
    pub fn zero(alpha: f64) -> Self {
        MagicValue {
            alpha,
            bits: 0.0,
            t_units: 0.0,
        }
    }

    /// Clamps tiny negatives to zero and rejects larger ones.
    pub fn from_bits(alpha: f64, bits: f64) -> Result<Self> {
        if !bits.is_finite() {
            return Err(Error::numerical(format!("magic value {bits} is not finite")));
        }
        if bits < -CLAMP_TOL {
            return Err(Error::numerical(format!(
                "magic value {bits:.3e} bits is negative beyond tolerance"
            )));
        }
        let bits = bits.max(0.0);
        Ok(MagicValue {
            alpha,
            bits,
            t_units: bits / T_UNIT_BITS,
        })
    }

    /// No clamping; for estimates, which may be negative.
    pub fn unclamped(alpha: f64, bits: f64) -> Self {
        MagicValue {
            alpha,
            bits,
            t_units: bits / T_UNIT_BITS,
        }
    }

    /// Exact sum, without clamping.
    pub fn add(&self, other: &MagicValue) -> MagicValue {
        let bits = self.bits + other.bits;
        MagicValue {
            alpha: self.alpha,
            bits,
            t_units: bits / T_UNIT_BITS,
        }
    }
}

fn renyi_from_spectrum(spec: &SpectrumVector, alpha: f64) -> Result<MagicValue> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::input(format!("Renyi order {alpha} must be >= 0")));
    }
    let logd = spec.n as f64;
    let h = if (alpha - 1.0).abs() < 1e-12 {
        -spec
            .xi
            .iter()
            .filter(|&&x| x > ZERO_XI)
            .map(|&x| x * x.log2())
            .sum::<f64>()
    } else {
        spec.power_sum(alpha).log2() / (1.0 - alpha)
    };
    MagicValue::from_bits(alpha, h - logd)
}

/// Stabilizer Rényi entropy `M_α` of a pure state.
pub fn sre(state: &PureState, alpha: f64) -> Result<MagicValue> {
    if !(alpha >= 0.0) {
        return Err(Error::input(format!("Renyi order {alpha} must be >= 0")));
    }
    renyi_from_spectrum(&pauli_spectrum(state)?, alpha)
}

/// `M₂(ρ) = −log₂ ΣΞ² − log₂ d + log₂ tr ρ²`.
pub fn m2_mixed(rho: &MixedState) -> Result<MagicValue> {
    let spec = pauli_spectrum_mixed(rho)?;
    let bits = -spec.power_sum(2.0).log2() - rho.n() as f64 + spec.purity.log2();
    MagicValue::from_bits(2.0, bits)
}

/// Single-qubit spectrum from a Bloch vector.
fn bloch_renyi(v: [f64; 3], alpha: f64) -> Result<MagicValue> {
    let spec = SpectrumVector {
        n: 1,
        xi: vec![0.5, 0.5 * v[2] * v[2], 0.5 * v[0] * v[0], 0.5 * v[1] * v[1]],
        purity: 1.0,
    };
    renyi_from_spectrum(&spec, alpha)
}

/// M₂ of `(|0⟩ + e^{iθ}|1⟩)/√2`: `−log₂(½ + ½cos⁴θ + ½sin⁴θ)`.
pub fn meas_magic(theta: f64) -> MagicValue {
    // ½ + ½cos⁴θ + ½sin⁴θ = 1 − ¼sin²2θ
    let mut s2 = (2.0 * theta).sin();
    if s2.abs() < 1e-14 {
        s2 = 0.0;
    }
    let bits = -(-0.25 * s2 * s2).ln_1p() / std::f64::consts::LN_2;
    MagicValue::from_bits(2.0, bits).expect("closed form is nonnegative")
}

/// `M_α` of the planar-angle state, for any order.
pub fn meas_magic_alpha(theta: f64, alpha: f64) -> Result<MagicValue> {
    if (alpha - 2.0).abs() < 1e-15 {
        return Ok(meas_magic(theta));
    }
    let (s, co) = theta.sin_cos();
    bloch_renyi([co, s, 0.0], alpha)
}

/// M₂ of `cosθ|0⟩ + e^{iφ} sinθ|1⟩`.
pub fn meas_magic_general(theta: f64, phi: f64) -> MagicValue {
    let v = bloch_vector(theta, phi);
    let s4: f64 = v.iter().map(|x| x.powi(4)).sum();
    MagicValue::from_bits(2.0, -((1.0 + s4) / 2.0).log2()).expect("closed form is nonnegative")
}

pub fn meas_magic_general_alpha(theta: f64, phi: f64, alpha: f64) -> Result<MagicValue> {
    bloch_renyi(bloch_vector(theta, phi), alpha)
}

pub fn bloch_vector(theta: f64, phi: f64) -> [f64; 3] {
    let (s2, c2) = (2.0 * theta).sin_cos();
    [s2 * phi.cos(), s2 * phi.sin(), c2]
}

/// Stabilizer nullity: `n − log₂ |{P : |⟨P⟩| = 1}|`.
pub fn nullity(state: &PureState) -> Result<usize> {
    let n = state.n();
    check_spectrum_n(n, MAX_SPECTRUM_QUBITS)?;
    let count = (0..1usize << (2 * n))
        .into_par_iter()
        .filter(|&idx| {
            let e = state.expectation(&PauliString::from_index(n, idx));
            (e.abs() - 1.0).abs() < 1e-9
        })
        .count();
    if !count.is_power_of_two() {
        return Err(Error::numerical(format!(
            "stabilizer group size {count} is not a power of two"
        )));
    }
    Ok(n - count.trailing_zeros() as usize)
}
