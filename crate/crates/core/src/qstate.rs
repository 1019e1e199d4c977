//! Dense state-vector and density-matrix simulation.
//!
//! Index convention: qubit 0 is the most significant bit of a basis index, so
//! qubit `q` of an `n`-qubit register lives at bit `n - 1 - q`. The label
//! `"0110"` reads left to right as qubits 0, 1, 2, 3. Every module uses this.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MAX_PURE_QUBITS: usize = 14;
pub const MAX_MIXED_QUBITS: usize = 6;

const NORM_TOL: f64 = 1e-10;
const FORCED_MIN_PROB: f64 = 1e-12;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub(crate) fn bit_of(n: usize, q: usize) -> usize {
    n - 1 - q
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    n: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Checked constructor: length must be `2^n` and the norm 1 within 1e-10.
    pub fn new(n: usize, amps: Vec<C64>) -> Result<Self> {
        check_pure_n(n)?;
        if amps.len() != 1 << n {
            return Err(Error::input(format!(
                "amplitude vector has length {}, expected {}",
                amps.len(),
                1usize << n
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::input(format!("state norm {norm} is not 1")));
        }
        Ok(PureState { n, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(n: usize, mut amps: Vec<C64>) -> Result<Self> {
        check_pure_n(n)?;
        if amps.len() != 1 << n {
            return Err(Error::input("amplitude vector length is not a power of two"));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::numerical("cannot normalize a zero vector"));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(PureState { n, amps })
    }

    pub fn from_real(n: usize, re: &[f64]) -> Result<Self> {
        Self::normalized(n, re.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.n != other.n {
            return Err(Error::input(format!(
                "size mismatch: {} vs {} qubits",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        check_pure_n(self.n + other.n)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(PureState {
            n: self.n + other.n,
            amps,
        })
    }

    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        g.validate(self.n)?;
        apply_gate_raw(&mut self.amps, self.n, g);
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Reorders qubits: qubit `i` of the result is qubit `order[i]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<PureState> {
        let n = self.n;
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::input("permutation length mismatch"));
        }
        for &q in order {
            if q >= n || seen[q] {
                return Err(Error::input("invalid qubit permutation"));
            }
            seen[q] = true;
        }
        let mut out = vec![c(0.0, 0.0); self.dim()];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut src = 0usize;
            for (i, &q) in order.iter().enumerate() {
                if j >> bit_of(n, i) & 1 == 1 {
                    src |= 1 << bit_of(n, q);
                }
            }
            *slot = self.amps[src];
        }
        Ok(PureState { n, amps: out })
    }
}

fn check_pure_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PURE_QUBITS {
        return Err(Error::limit(format!(
            "pure state needs 1..={MAX_PURE_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// `spec` is either a bit string of length `n` or `"plus-all"`.
pub fn init_state(n: usize, spec: &str) -> Result<PureState> {
    check_pure_n(n)?;
    let d = 1usize << n;
    if spec == "plus-all" {
        let a = (d as f64).sqrt().recip();
        return Ok(PureState {
            n,
            amps: vec![c(a, 0.0); d],
        });
    }
    if spec.len() != n || !spec.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::input(format!(
            "basis label {spec:?} is not a {n}-bit string"
        )));
    }
    let idx = usize::from_str_radix(spec, 2).expect("validated bit string");
    let mut amps = vec![c(0.0, 0.0); d];
    amps[idx] = c(1.0, 0.0);
    Ok(PureState { n, amps })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    Rz(f64),
    Rx(f64),
    J(f64),
    CZ,
    CNOT,
    CRk(u32),
    /// Row-major 2×2 unitary.
    U2([C64; 4]),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::CZ | GateKind::CNOT | GateKind::CRk(_) => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::Rz(_) => "Rz",
            GateKind::Rx(_) => "Rx",
            GateKind::J(_) => "J",
            GateKind::CZ => "CZ",
            GateKind::CNOT => "CNOT",
            GateKind::CRk(_) => "CRk",
            GateKind::U2(_) => "U2",
        }
    }
}

/// A gate with its target qubits. Two-qubit gates take `[control, target]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Gate { kind, targets }
    }
    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q])
    }
    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![q])
    }
    pub fn y(q: usize) -> Self {
        Self::new(GateKind::Y, vec![q])
    }
    pub fn z(q: usize) -> Self {
        Self::new(GateKind::Z, vec![q])
    }
    pub fn s(q: usize) -> Self {
        Self::new(GateKind::S, vec![q])
    }
    pub fn t(q: usize) -> Self {
        Self::new(GateKind::T, vec![q])
    }
    pub fn rz(q: usize, a: f64) -> Self {
        Self::new(GateKind::Rz(a), vec![q])
    }
    pub fn rx(q: usize, a: f64) -> Self {
        Self::new(GateKind::Rx(a), vec![q])
    }
    pub fn j(q: usize, a: f64) -> Self {
        Self::new(GateKind::J(a), vec![q])
    }
    pub fn u2(q: usize, m: [C64; 4]) -> Self {
        Self::new(GateKind::U2(m), vec![q])
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::CZ, vec![a, b])
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::CNOT, vec![control, target])
    }
    pub fn crk(k: u32, control: usize, target: usize) -> Self {
        Self::new(GateKind::CRk(k), vec![control, target])
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(Error::input(format!(
                "{} takes {} target(s), got {}",
                self.kind.name(),
                self.kind.arity(),
                self.targets.len()
            )));
        }
        for &q in &self.targets {
            if q >= n {
                return Err(Error::QubitRange { qubit: q, n });
            }
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::input("two-qubit gate targets must be distinct"));
        }
        match self.kind {
            GateKind::CRk(k) if k < 1 => Err(Error::input("CRk requires k >= 1")),
            GateKind::Rz(a) | GateKind::Rx(a) | GateKind::J(a) if !a.is_finite() => {
                Err(Error::input("gate angle is not finite"))
            }
            GateKind::U2(m) => check_unitary2(&m),
            _ => Ok(()),
        }
    }

    /// Row-major matrix; 2×2 for one-qubit gates, 4×4 on `[first, second]`
    /// target order for two-qubit gates.
    pub fn matrix(&self) -> Vec<C64> {
        match self.kind {
            GateKind::CZ => diag4(c(-1.0, 0.0)),
            GateKind::CRk(k) => diag4(C64::from_polar(1.0, 2.0 * PI / 2f64.powi(k as i32))),
            GateKind::CNOT => {
                let mut m = vec![c(0.0, 0.0); 16];
                m[0] = c(1.0, 0.0);
                m[5] = c(1.0, 0.0);
                m[11] = c(1.0, 0.0);
                m[14] = c(1.0, 0.0);
                m
            }
            _ => single_matrix(&self.kind).to_vec(),
        }
    }
}

fn diag4(last: C64) -> Vec<C64> {
    let mut m = vec![c(0.0, 0.0); 16];
    m[0] = c(1.0, 0.0);
    m[5] = c(1.0, 0.0);
    m[10] = c(1.0, 0.0);
    m[15] = last;
    m
}

pub(crate) fn phase_matrix(a: f64) -> [C64; 4] {
    [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, a)]
}

pub(crate) const H_MATRIX: [C64; 4] = [
    C64::new(FRAC_1_SQRT_2, 0.0),
    C64::new(FRAC_1_SQRT_2, 0.0),
    C64::new(FRAC_1_SQRT_2, 0.0),
    C64::new(-FRAC_1_SQRT_2, 0.0),
];

/// `J(a) = H·P(a)`.
pub fn j_matrix(a: f64) -> [C64; 4] {
    let e = C64::from_polar(FRAC_1_SQRT_2, a);
    [c(FRAC_1_SQRT_2, 0.0), e, c(FRAC_1_SQRT_2, 0.0), -e]
}

pub fn mat2_mul(a: &[C64; 4], b: &[C64; 4]) -> [C64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub fn mat2_adjoint(a: &[C64; 4]) -> [C64; 4] {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

fn single_matrix(kind: &GateKind) -> [C64; 4] {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    match *kind {
        GateKind::H => H_MATRIX,
        GateKind::X => [o, l, l, o],
        GateKind::Y => [o, c(0.0, -1.0), c(0.0, 1.0), o],
        GateKind::Z => [l, o, o, -l],
        GateKind::S => [l, o, o, c(0.0, 1.0)],
        GateKind::T => phase_matrix(PI / 4.0),
        GateKind::Rz(a) => phase_matrix(a),
        GateKind::Rx(a) => mat2_mul(&H_MATRIX, &mat2_mul(&phase_matrix(a), &H_MATRIX)),
        GateKind::J(a) => j_matrix(a),
        GateKind::U2(m) => m,
        GateKind::CZ | GateKind::CNOT | GateKind::CRk(_) => unreachable!("two-qubit gate"),
    }
}

pub(crate) fn check_unitary2(m: &[C64; 4]) -> Result<()> {
    let p = mat2_mul(&mat2_adjoint(m), m);
    let err = (p[0] - 1.0).norm() + p[1].norm() + p[2].norm() + (p[3] - 1.0).norm();
    if err > 1e-10 || m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::input(format!(
            "U2 payload is not unitary (deviation {err:.3e})"
        )));
    }
    Ok(())
}

/// Applies a 2×2 matrix to qubit `q` of a raw amplitude slice.
pub(crate) fn apply_1q(amps: &mut [C64], n: usize, q: usize, m: &[C64; 4]) {
    let stride = 1usize << bit_of(n, q);
    let block = stride << 1;
    for base in (0..amps.len()).step_by(block) {
        for i in base..base + stride {
            let a0 = amps[i];
            let a1 = amps[i + stride];
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[i + stride] = m[2] * a0 + m[3] * a1;
        }
    }
}

fn apply_gate_raw(amps: &mut [C64], n: usize, g: &Gate) {
    match g.kind {
        GateKind::CZ | GateKind::CRk(_) => {
            let phase = if let GateKind::CRk(k) = g.kind {
                C64::from_polar(1.0, 2.0 * PI / 2f64.powi(k as i32))
            } else {
                c(-1.0, 0.0)
            };
            let mask = (1usize << bit_of(n, g.targets[0])) | (1usize << bit_of(n, g.targets[1]));
            for (i, a) in amps.iter_mut().enumerate() {
                if i & mask == mask {
                    *a *= phase;
                }
            }
        }
        GateKind::CNOT => {
            let cm = 1usize << bit_of(n, g.targets[0]);
            let tm = 1usize << bit_of(n, g.targets[1]);
            for i in 0..amps.len() {
                if i & cm != 0 && i & tm == 0 {
                    amps.swap(i, i | tm);
                }
            }
        }
        _ => apply_1q(amps, n, g.targets[0], &single_matrix(&g.kind)),
    }
}

pub fn apply_gate(state: &PureState, g: &Gate) -> Result<PureState> {
    let mut out = state.clone();
    out.apply(g)?;
    Ok(out)
}

/// Measurement basis: outcome 0 is `cosθ|0⟩ + e^{iφ} sinθ|1⟩`, outcome 1 is
/// `sinθ|0⟩ − e^{iφ} cosθ|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasBasis {
    pub fn new(theta: f64, phi: f64) -> Self {
        MeasBasis { theta, phi }
    }

    /// Planar `M^β`: `(|0⟩ ± e^{iβ}|1⟩)/√2`.
    pub fn planar(beta: f64) -> Self {
        MeasBasis {
            theta: PI / 4.0,
            phi: beta,
        }
    }

    pub fn z() -> Self {
        MeasBasis {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn x() -> Self {
        Self::planar(0.0)
    }

    pub fn vector(&self, outcome: u8) -> [C64; 2] {
        let (s, co) = self.theta.sin_cos();
        let e = C64::from_polar(1.0, self.phi);
        if outcome == 0 {
            [c(co, 0.0), e * s]
        } else {
            [c(s, 0.0), -e * co]
        }
    }
}

pub enum MeasureMode<'a> {
    Sample(&'a mut dyn RngCore),
    Forced(u8),
}

#[derive(Clone, Debug)]
pub struct MeasureResult {
    pub outcome: u8,
    pub prob: f64,
    pub reduced: Option<PureState>,
}

/// Unnormalized projection with the measured qubit removed.
fn project_raw(state: &PureState, qubit: usize, v: &[C64; 2]) -> Vec<C64> {
    let n = state.n;
    let p = bit_of(n, qubit);
    let low_mask = (1usize << p) - 1;
    let (b0, b1) = (v[0].conj(), v[1].conj());
    (0..state.dim() >> 1)
        .map(|r| {
            let full = ((r & !low_mask) << 1) | (r & low_mask);
            b0 * state.amps[full] + b1 * state.amps[full | (1 << p)]
        })
        .collect()
}

/// Born probabilities of both outcomes.
pub fn branch_probs(state: &PureState, qubit: usize, basis: MeasBasis) -> Result<[f64; 2]> {
    if qubit >= state.n {
        return Err(Error::QubitRange {
            qubit,
            n: state.n,
        });
    }
    let v = basis.vector(0);
    let p0: f64 = project_raw(state, qubit, &v).iter().map(|a| a.norm_sqr()).sum();
    let p0 = p0.clamp(0.0, 1.0);
    Ok([p0, 1.0 - p0])
}

/// Projects `qubit` onto the given branch. `reduced` is `None` when the last
/// qubit was measured.
pub fn project_measure(
    state: &PureState,
    qubit: usize,
    basis: MeasBasis,
    mode: MeasureMode<'_>,
) -> Result<MeasureResult> {
    let probs = branch_probs(state, qubit, basis)?;
    let outcome = match mode {
        MeasureMode::Forced(o) => {
            if o > 1 {
                return Err(Error::input("outcome must be 0 or 1"));
            }
            if probs[o as usize] < FORCED_MIN_PROB {
                return Err(Error::ZeroProbability {
                    qubit,
                    outcome: o,
                    prob: probs[o as usize],
                });
            }
            o
        }
        MeasureMode::Sample(rng) => {
            let u: f64 = rng.gen();
            if u < probs[0] {
                0
            } else {
                1
            }
        }
    };
    let raw = project_raw(state, qubit, &basis.vector(outcome));
    let prob = probs[outcome as usize];
    let reduced = if state.n == 1 {
        None
    } else {
        let s = prob.sqrt();
        let amps = raw.into_iter().map(|a| a / s).collect();
        Some(PureState {
            n: state.n - 1,
            amps,
        })
    };
    Ok(MeasureResult {
        outcome,
        prob,
        reduced,
    })
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedState {
    n: usize,
    rho: Vec<C64>,
}

impl MixedState {
    /// Checked constructor: Hermitian, unit trace and PSD within tolerance.
    pub fn new(n: usize, rho: Vec<C64>) -> Result<Self> {
        check_mixed_n(n)?;
        let d = 1usize << n;
        if rho.len() != d * d {
            return Err(Error::input("density matrix has wrong size"));
        }
        for i in 0..d {
            for j in 0..d {
                if (rho[i * d + j] - rho[j * d + i].conj()).norm() > NORM_TOL {
                    return Err(Error::input("density matrix is not Hermitian"));
                }
            }
        }
        let tr: C64 = (0..d).map(|i| rho[i * d + i]).sum();
        if (tr - 1.0).norm() > NORM_TOL {
            return Err(Error::input(format!("density matrix trace {tr} is not 1")));
        }
        let m = DMatrix::from_row_slice(d, d, &rho);
        let eig = m.symmetric_eigenvalues();
        if let Some(min) = eig.iter().cloned().reduce(f64::min) {
            if min < -1e-9 {
                return Err(Error::input(format!(
                    "density matrix has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(MixedState { n, rho })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Row-major entries.
    pub fn rho(&self) -> &[C64] {
        &self.rho
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `ρ → UρU†` for a one-qubit `U`.
    pub fn conjugate_1q(&mut self, q: usize, m: &[C64; 4]) {
        // vec(ρ) as a 2n-qubit vector: row index on qubits 0..n, column on n..2n.
        let n2 = 2 * self.n;
        apply_1q(&mut self.rho, n2, q, m);
        let mc = [m[0].conj(), m[1].conj(), m[2].conj(), m[3].conj()];
        apply_1q(&mut self.rho, n2, self.n + q, &mc);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.rho[i * d + i].re).collect()
    }
}

fn check_mixed_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_MIXED_QUBITS {
        return Err(Error::limit(format!(
            "density matrix needs 1..={MAX_MIXED_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// `|ψ⟩⟨ψ|`, optionally depolarized to `(1−p)|ψ⟩⟨ψ| + p·I/d`.
pub fn to_density(state: &PureState, depolarizing: Option<f64>) -> Result<MixedState> {
    check_mixed_n(state.n)?;
    let p = depolarizing.unwrap_or(0.0);
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("depolarizing p={p} outside [0,1]")));
    }
    let d = state.dim();
    let mut rho = vec![c(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            rho[i * d + j] = state.amps[i] * state.amps[j].conj() * (1.0 - p);
        }
        rho[i * d + i] += p / d as f64;
    }
    Ok(MixedState { n: state.n, rho })
}

/// Frequently used states.
pub mod states {
    use super::*;

    pub fn plus() -> PureState {
        init_state(1, "plus-all").expect("valid")
    }

    /// `cosθ|0⟩ + e^{iφ} sinθ|1⟩`.
    pub fn bloch_half_angle(theta: f64, phi: f64) -> PureState {
        let (s, co) = theta.sin_cos();
        PureState {
            n: 1,
            amps: vec![c(co, 0.0), C64::from_polar(s, phi)],
        }
    }

    /// Maximal-magic single-qubit state with Bloch vector (1,1,1)/√3.
    pub fn t_bk() -> PureState {
        let theta = 0.5 * (1.0 / 3f64.sqrt()).acos();
        bloch_half_angle(theta, PI / 4.0)
    }

    /// `(|00⟩+|01⟩+|10⟩+i|11⟩)/2`.
    pub fn cs() -> PureState {
        PureState {
            n: 2,
            amps: vec![c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.5)],
        }
    }

    /// `(|0000⟩+|0011⟩+|1100⟩−|1111⟩)/2`.
    pub fn cluster4() -> PureState {
        let mut amps = vec![c(0.0, 0.0); 16];
        amps[0b0000] = c(0.5, 0.0);
        amps[0b0011] = c(0.5, 0.0);
        amps[0b1100] = c(0.5, 0.0);
        amps[0b1111] = c(-0.5, 0.0);
        PureState { n: 4, amps }
    }

    pub fn ghz(n: usize) -> PureState {
        let d = 1usize << n;
        let mut amps = vec![c(0.0, 0.0); d];
        amps[0] = c(FRAC_1_SQRT_2, 0.0);
        amps[d - 1] = c(FRAC_1_SQRT_2, 0.0);
        PureState { n, amps }
    }

    /// Look up a state by name: `zero:N`, `plus:N`, `tbk`, `cs`, `cluster`,
    /// `ghz:N`.
    pub fn named(name: &str) -> Result<PureState> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let count = |default: usize| -> Result<usize> {
            match arg {
                None => Ok(default),
                Some(a) => a
                    .parse()
                    .map_err(|_| Error::input(format!("bad qubit count in {name:?}"))),
            }
        };
        match head {
            "zero" => init_state(count(1)?, &"0".repeat(count(1)?)),
            "plus" => init_state(count(1)?, "plus-all"),
            "tbk" | "t" => Ok(t_bk()),
            "cs" => Ok(cs()),
            "cluster" => Ok(cluster4()),
            "ghz" => {
                let n = count(3)?;
                check_pure_n(n)?;
                Ok(ghz(n))
            }
            _ => Err(Error::input(format!("unknown state name {name:?}"))),
        }
    }
}
