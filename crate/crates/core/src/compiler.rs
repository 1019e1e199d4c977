//! J-decomposition, circuit-to-pattern compilation and invested magic.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{
    json_err, Command, CorrOp, CorrectionCommand, Graph, MeasurementCommand, Pattern,
};
use crate::pauli::{meas_magic_alpha, MagicValue};
use crate::qstate::{
    c, check_unitary2, init_state, j_matrix, mat2_mul, Gate, GateKind, PureState, C64,
};

/// Circuits compile to one vertex per J item plus one per wire.
pub const MAX_PATTERN_VERTICES: usize = 4096;

const SNAP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let c = Circuit { n, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::input("circuit needs at least one qubit"));
        }
        for (i, g) in self.gates.iter().enumerate() {
            g.validate(self.n)
                .map_err(|e| Error::input(format!("gates[{i}]: {e}")))?;
        }
        Ok(())
    }

    pub fn apply(&self, state: &mut PureState) -> Result<()> {
        state.apply_all(&self.gates)
    }

    pub fn run(&self, input: &PureState) -> Result<PureState> {
        let mut s = input.clone();
        self.apply(&mut s)?;
        Ok(s)
    }

    /// Sequential composition on the same register.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        if self.n != other.n {
            return Err(Error::input("circuit widths differ"));
        }
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().cloned());
        Circuit::new(self.n, gates)
    }

    /// `self ⊗ other`, with `other` shifted onto the trailing wires.
    pub fn tensor(&self, other: &Circuit) -> Result<Circuit> {
        let mut gates = self.gates.clone();
        for g in &other.gates {
            let t = g.targets.iter().map(|q| q + self.n).collect();
            gates.push(Gate::new(g.kind, t));
        }
        Circuit::new(self.n + other.n, gates)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum JItem {
    J { wire: usize, theta: f64 },
    CZ { a: usize, b: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JSequence {
    pub n: usize,
    pub items: Vec<JItem>,
}

impl JSequence {
    pub fn j_count(&self) -> usize {
        self.items
            .iter()
            .filter(|i| matches!(i, JItem::J { .. }))
            .count()
    }

    pub fn j_angles(&self) -> Vec<f64> {
        self.items
            .iter()
            .filter_map(|i| match i {
                JItem::J { theta, .. } => Some(*theta),
                _ => None,
            })
            .collect()
    }

    pub fn apply(&self, state: &mut PureState) -> Result<()> {
        for it in &self.items {
            match *it {
                JItem::J { wire, theta } => state.apply(&Gate::j(wire, theta))?,
                JItem::CZ { a, b } => state.apply(&Gate::cz(a, b))?,
            }
        }
        Ok(())
    }

    pub fn as_circuit(&self) -> Circuit {
        let gates = self
            .items
            .iter()
            .map(|it| match *it {
                JItem::J { wire, theta } => Gate::j(wire, theta),
                JItem::CZ { a, b } => Gate::cz(a, b),
            })
            .collect();
        Circuit { n: self.n, gates }
    }
}

/// Maps an angle into `(−π, π]`, snapping values within 1e-12 of 0 or π.
pub fn normalize_angle(a: f64) -> f64 {
    let mut x = a;
    if !(x > -PI && x <= PI) {
        x = a.rem_euclid(2.0 * PI);
        if x > PI {
            x -= 2.0 * PI;
        }
    }
    if x.abs() < SNAP {
        0.0
    } else if (x - PI).abs() < SNAP || (x + PI).abs() < SNAP {
        PI
    } else {
        x
    }
}

/// Angles `(α, β, γ)` with `U ∝ J(0)J(−α)J(−β)J(−γ)`, each in `(−π, π]`.
/// When `β ∈ {0, π}` the split is not unique; `γ = 0` is returned.
pub fn euler_zxz(u: &[C64; 4]) -> Result<(f64, f64, f64)> {
    check_unitary2(u)?;
    // ZYZ angles of U/√det: U ∝ Rz(φ1) Ry(θ) Rz(φ2)
    let det = u[0] * u[3] - u[1] * u[2];
    let s = det.sqrt();
    let v: Vec<C64> = u.iter().map(|z| z / s).collect();
    let theta = 2.0 * v[2].norm().atan2(v[0].norm());
    let tiny = 1e-12;
    let (phi1, phi2) = if v[2].norm() < tiny {
        let sum = 2.0 * v[3].arg();
        let p2 = PI / 2.0;
        (sum - p2, p2)
    } else if v[0].norm() < tiny {
        let diff = 2.0 * v[2].arg();
        let p2 = PI / 2.0;
        (diff + p2, p2)
    } else {
        let sum = 2.0 * v[3].arg();
        let diff = 2.0 * v[2].arg();
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    };
    // Rz(a) Rx(b) Rz(c) = Rz(a − π/2) Ry(b) Rz(c + π/2)
    let (a, b, cc) = (phi1 + PI / 2.0, theta, phi2 - PI / 2.0);
    let out = (normalize_angle(-a), normalize_angle(-b), normalize_angle(-cc));
    let rec = zxz_matrix(out.0, out.1, out.2);
    let overlap: C64 = (0..4).map(|i| rec[i].conj() * u[i]).sum::<C64>() / 2.0;
    if (1.0 - overlap.norm_sqr()).abs() > 1e-10 {
        return Err(Error::numerical(format!(
            "Euler reconstruction failed (fidelity {})",
            overlap.norm_sqr()
        )));
    }
    Ok(out)
}

/// `J(0)J(−α)J(−β)J(−γ)`.
pub fn zxz_matrix(alpha: f64, beta: f64, gamma: f64) -> [C64; 4] {
    let m = mat2_mul(&j_matrix(-beta), &j_matrix(-gamma));
    let m = mat2_mul(&j_matrix(-alpha), &m);
    mat2_mul(&j_matrix(0.0), &m)
}

fn push_j(items: &mut Vec<JItem>, wire: usize, theta: f64) {
    items.push(JItem::J {
        wire,
        theta: normalize_angle(theta),
    });
}

fn expand_gate(g: &Gate, items: &mut Vec<JItem>) -> Result<()> {
    let t = &g.targets;
    match g.kind {
        GateKind::H => push_j(items, t[0], 0.0),
        GateKind::X => {
            push_j(items, t[0], 0.0);
            push_j(items, t[0], PI);
        }
        GateKind::Z => {
            push_j(items, t[0], PI);
            push_j(items, t[0], 0.0);
        }
        GateKind::Y => {
            // Z then X
            for a in [PI, 0.0, 0.0, PI] {
                push_j(items, t[0], a);
            }
        }
        GateKind::S => rz(items, t[0], PI / 2.0),
        GateKind::T => rz(items, t[0], PI / 4.0),
        GateKind::Rz(a) => rz(items, t[0], a),
        GateKind::Rx(a) => {
            push_j(items, t[0], 0.0);
            push_j(items, t[0], a);
        }
        GateKind::J(a) => push_j(items, t[0], a),
        GateKind::CZ => items.push(JItem::CZ { a: t[0], b: t[1] }),
        GateKind::CNOT => cnot(items, t[0], t[1]),
        GateKind::CRk(k) => {
            let a = PI / 2f64.powi(k as i32);
            let (ctl, tgt) = (t[0], t[1]);
            rz(items, tgt, a);
            cnot(items, ctl, tgt);
            rz(items, tgt, -a);
            cnot(items, ctl, tgt);
            rz(items, ctl, a);
        }
        GateKind::U2(m) => {
            let (al, be, ga) = euler_zxz(&m)?;
            for a in [-ga, -be, -al, 0.0] {
                push_j(items, t[0], a);
            }
        }
    }
    Ok(())
}

fn rz(items: &mut Vec<JItem>, w: usize, a: f64) {
    push_j(items, w, a);
    push_j(items, w, 0.0);
}

fn cnot(items: &mut Vec<JItem>, ctl: usize, tgt: usize) {
    push_j(items, tgt, 0.0);
    items.push(JItem::CZ { a: ctl, b: tgt });
    push_j(items, tgt, 0.0);
}

/// Cancels adjacent `J(0)J(0)` pairs on each wire; a CZ touching the wire
/// blocks cancellation.
pub fn peephole(seq: &JSequence) -> JSequence {
    let mut out: Vec<Option<JItem>> = Vec::with_capacity(seq.items.len());
    let mut stacks: Vec<Vec<usize>> = vec![Vec::new(); seq.n];
    for it in &seq.items {
        match *it {
            JItem::J { wire, theta } if theta == 0.0 => {
                let top = stacks[wire].last().copied();
                if let Some(i) = top {
                    if matches!(out[i], Some(JItem::J { theta, .. }) if theta == 0.0) {
                        out[i] = None;
                        stacks[wire].pop();
                        continue;
                    }
                }
                stacks[wire].push(out.len());
                out.push(Some(*it));
            }
            JItem::J { wire, .. } => {
                stacks[wire].push(out.len());
                out.push(Some(*it));
            }
            JItem::CZ { a, b } => {
                stacks[a].push(out.len());
                stacks[b].push(out.len());
                out.push(Some(*it));
            }
        }
    }
    JSequence {
        n: seq.n,
        items: out.into_iter().flatten().collect(),
    }
}

/// Expands every gate into J and CZ items, then applies [`peephole`].
pub fn j_decompose(c: &Circuit) -> Result<JSequence> {
    c.validate()?;
    let mut items = Vec::new();
    for g in &c.gates {
        expand_gate(g, &mut items)?;
    }
    Ok(peephole(&JSequence { n: c.n, items }))
}

/// Compiles a circuit into a measurement pattern; wire `i` enters on vertex
/// `i` and the output lists the final vertex of each wire in wire order.
pub fn circuit_to_pattern(c: &Circuit) -> Result<Pattern> {
    jsequence_to_pattern(&j_decompose(c)?)
}

/// One new vertex per J item; byproducts are tracked as GF(2) sets of signals.
pub fn jsequence_to_pattern(seq: &JSequence) -> Result<Pattern> {
    let n_vertices = seq.n + seq.j_count();
    if n_vertices > MAX_PATTERN_VERTICES {
        return Err(Error::limit(format!(
            "pattern would need {n_vertices} vertices"
        )));
    }
    let mut cur: Vec<usize> = (0..seq.n).collect();
    let mut xdom: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_vertices];
    let mut zdom: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_vertices];
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut commands = Vec::new();
    let mut next = seq.n;
    let toggle = |edges: &mut BTreeSet<(usize, usize)>, a: usize, b: usize| {
        let e = (a.min(b), a.max(b));
        if !edges.remove(&e) {
            edges.insert(e);
        }
    };
    let sym = |a: &mut BTreeSet<usize>, b: &BTreeSet<usize>| {
        for x in b {
            if !a.remove(x) {
                a.insert(*x);
            }
        }
    };
    for it in &seq.items {
        match *it {
            JItem::J { wire, theta } => {
                let u = cur[wire];
                let v = next;
                next += 1;
                toggle(&mut edges, u, v);
                commands.push(Command::Measure(
                    MeasurementCommand::planar(u, normalize_angle(-theta), &Vec::from_iter(xdom[u].iter().copied()))
                        .labelled(&format!("M{u}")),
                ));
                let mut xv = BTreeSet::from([u]);
                sym(&mut xv, &zdom[u]);
                xdom[v] = xv;
                zdom[v] = xdom[u].clone();
                cur[wire] = v;
            }
            JItem::CZ { a, b } => {
                let (ua, ub) = (cur[a], cur[b]);
                toggle(&mut edges, ua, ub);
                let (xa, xb) = (xdom[ua].clone(), xdom[ub].clone());
                sym(&mut zdom[ub], &xa);
                sym(&mut zdom[ua], &xb);
            }
        }
    }
    for &v in &cur {
        if !xdom[v].is_empty() {
            let cond: Vec<usize> = xdom[v].iter().copied().collect();
            commands.push(Command::Correct(CorrectionCommand::new(v, CorrOp::X, &cond)));
        }
        if !zdom[v].is_empty() {
            let cond: Vec<usize> = zdom[v].iter().copied().collect();
            commands.push(Command::Correct(CorrectionCommand::new(v, CorrOp::Z, &cond)));
        }
    }
    let e: Vec<_> = edges.into_iter().collect();
    let graph = Graph::new(n_vertices, &e)?.with_inputs(&(0..seq.n).collect::<Vec<_>>())?;
    Pattern::new(graph, commands, cur)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvestedReport {
    pub alpha: f64,
    pub total: MagicValue,
    /// `(J angle, M_α of that angle)` in sequence order.
    pub per_item: Vec<(f64, MagicValue)>,
    pub j_count: usize,
}

impl InvestedReport {
    pub fn non_clifford_count(&self) -> usize {
        self.per_item.iter().filter(|(_, m)| m.bits > 1e-12).count()
    }
}

/// Sum of `M_α(θ)` over the J items of a sequence.
pub fn invested_magic_seq(seq: &JSequence, alpha: f64) -> Result<InvestedReport> {
    let mut per_item = Vec::with_capacity(seq.items.len());
    let mut bits = 0.0;
    for th in seq.j_angles() {
        let m = meas_magic_alpha(th, alpha)?;
        bits += m.bits;
        per_item.push((th, m));
    }
    Ok(InvestedReport {
        alpha,
        total: MagicValue::from_bits(alpha, bits)?,
        j_count: per_item.len(),
        per_item,
    })
}

/// Invested magic of a circuit under the default J-decomposition.
pub fn invested_magic(c: &Circuit, alpha: f64) -> Result<InvestedReport> {
    invested_magic_seq(&j_decompose(c)?, alpha)
}

/// Columns `U|i⟩` for every basis state `i`.
pub fn unitary_columns(
    n: usize,
    apply: impl Fn(&mut PureState) -> Result<()>,
) -> Result<Vec<PureState>> {
    if n > 8 {
        return Err(Error::limit("unitary reconstruction limited to 8 qubits"));
    }
    (0..1usize << n)
        .map(|i| {
            let label = format!("{i:0n$b}");
            let mut s = init_state(n, &label)?;
            apply(&mut s)?;
            Ok(s)
        })
        .collect()
}

/// `|tr(A†B)| / d` for two operators given by their columns.
pub fn unitary_overlap(a: &[PureState], b: &[PureState]) -> Result<f64> {
    let mut t = c(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        t += x.inner(y)?;
    }
    Ok(t.norm() / a.len() as f64)
}

// ---- random circuit generators for test suites ----

/// Haar-random 2×2 unitary.
pub fn random_u2(rng: &mut dyn RngCore) -> [C64; 4] {
    let col = crate::rng::haar_state(1, rng);
    let (a, b) = (col.amps()[0], col.amps()[1]);
    let ph = C64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
    [a, -b.conj() * ph, b, a.conj() * ph]
}

/// Random circuit over `{H, S, CZ}`.
pub fn random_clifford_circuit(n: usize, len: usize, rng: &mut dyn RngCore) -> Circuit {
    let gates = (0..len)
        .map(|_| {
            let q = rng.gen_range(0..n);
            match rng.gen_range(0..if n > 1 { 3 } else { 2 }) {
                0 => Gate::h(q),
                1 => Gate::s(q),
                _ => {
                    let mut r = rng.gen_range(0..n - 1);
                    if r >= q {
                        r += 1;
                    }
                    Gate::cz(q, r)
                }
            }
        })
        .collect();
    Circuit { n, gates }
}

/// Random circuit over `{H, X, Y, Z, S, CZ, CNOT}`.
pub fn random_clifford_circuit_wide(n: usize, len: usize, rng: &mut dyn RngCore) -> Circuit {
    let gates = (0..len)
        .map(|_| {
            let q = rng.gen_range(0..n);
            let pick = rng.gen_range(0..if n > 1 { 7 } else { 5 });
            let other = |rng: &mut dyn RngCore| {
                let mut r = rng.gen_range(0..n - 1);
                if r >= q {
                    r += 1;
                }
                r
            };
            match pick {
                0 => Gate::h(q),
                1 => Gate::x(q),
                2 => Gate::y(q),
                3 => Gate::z(q),
                4 => Gate::s(q),
                5 => Gate::cz(q, other(rng)),
                _ => Gate::cnot(q, other(rng)),
            }
        })
        .collect();
    Circuit { n, gates }
}

/// Random circuit over every gate kind, with random angles.
pub fn random_circuit(n: usize, len: usize, rng: &mut dyn RngCore) -> Circuit {
    let gates = (0..len)
        .map(|_| {
            let q = rng.gen_range(0..n);
            let a = rng.gen_range(-PI..PI);
            let kinds = if n > 1 { 13 } else { 10 };
            let other = |rng: &mut dyn RngCore| {
                let mut r = rng.gen_range(0..n - 1);
                if r >= q {
                    r += 1;
                }
                r
            };
            match rng.gen_range(0..kinds) {
                0 => Gate::h(q),
                1 => Gate::x(q),
                2 => Gate::y(q),
                3 => Gate::z(q),
                4 => Gate::s(q),
                5 => Gate::t(q),
                6 => Gate::rz(q, a),
                7 => Gate::rx(q, a),
                8 => Gate::j(q, a),
                9 => Gate::u2(q, random_u2(rng)),
                10 => Gate::cz(q, other(rng)),
                11 => Gate::cnot(q, other(rng)),
                _ => Gate::crk(rng.gen_range(1..5), q, other(rng)),
            }
        })
        .collect();
    Circuit { n, gates }
}

// ---- file format ----

#[derive(Serialize, Deserialize)]
struct GateFile {
    kind: String,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct CircuitFile {
    n: usize,
    gates: Vec<GateFile>,
}

impl Circuit {
    pub fn to_json(&self) -> String {
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let mut f = GateFile {
                    kind: g.kind.name().to_string(),
                    targets: g.targets.clone(),
                    alpha: None,
                    k: None,
                    matrix: None,
                };
                match g.kind {
                    GateKind::Rz(a) | GateKind::Rx(a) | GateKind::J(a) => f.alpha = Some(a),
                    GateKind::CRk(k) => f.k = Some(k),
                    GateKind::U2(m) => f.matrix = Some(m.iter().map(|z| [z.re, z.im]).collect()),
                    _ => {}
                }
                f
            })
            .collect();
        serde_json::to_string_pretty(&CircuitFile { n: self.n, gates }).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let f: CircuitFile = serde_json::from_str(text).map_err(json_err)?;
        let mut gates = Vec::with_capacity(f.gates.len());
        for (i, g) in f.gates.into_iter().enumerate() {
            let need_alpha = || {
                g.alpha
                    .filter(|a| a.is_finite())
                    .ok_or_else(|| Error::parse(format!("gates[{i}].alpha"), "missing or non-finite angle"))
            };
            let kind = match g.kind.as_str() {
                "H" => GateKind::H,
                "X" => GateKind::X,
                "Y" => GateKind::Y,
                "Z" => GateKind::Z,
                "S" => GateKind::S,
                "T" => GateKind::T,
                "Rz" => GateKind::Rz(need_alpha()?),
                "Rx" => GateKind::Rx(need_alpha()?),
                "J" => GateKind::J(need_alpha()?),
                "CZ" => GateKind::CZ,
                "CNOT" => GateKind::CNOT,
                "CRk" => GateKind::CRk(
                    g.k.ok_or_else(|| Error::parse(format!("gates[{i}].k"), "missing k"))?,
                ),
                "U2" => {
                    let m = g.matrix.as_ref().filter(|m| m.len() == 4).ok_or_else(|| {
                        Error::parse(format!("gates[{i}].matrix"), "need four [re, im] entries")
                    })?;
                    GateKind::U2([
                        c(m[0][0], m[0][1]),
                        c(m[1][0], m[1][1]),
                        c(m[2][0], m[2][1]),
                        c(m[3][0], m[3][1]),
                    ])
                }
                other => {
                    return Err(Error::parse(
                        format!("gates[{i}].kind"),
                        format!("unknown gate kind {other:?}"),
                    ))
                }
            };
            let gate = Gate::new(kind, g.targets);
            gate.validate(f.n)
                .map_err(|e| Error::parse(format!("gates[{i}]"), e.to_string()))?;
            gates.push(gate);
        }
        Circuit::new(f.n, gates).map_err(|e| Error::parse("circuit", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{enumerate_branches, rotation_pattern, run_pattern, Policy};
    use crate::pauli::T_UNIT_BITS;
    use crate::qstate::{fidelity, states, H_MATRIX};
    use crate::rng::{haar_state, stream};
    use approx::assert_abs_diff_eq;

    fn assert_equiv(u: &[C64; 4], v: &[C64; 4]) {
        let ov: C64 = (0..4).map(|i| u[i].conj() * v[i]).sum::<C64>() / 2.0;
        assert_abs_diff_eq!(ov.norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_angle(-PI), PI);
        assert_eq!(normalize_angle(3.0 * PI), PI);
        assert_eq!(normalize_angle(2.0 * PI + 1e-14), 0.0);
        assert_abs_diff_eq!(normalize_angle(1.5 * PI), -0.5 * PI, epsilon = 1e-15);
    }

    #[test]
    fn euler_hadamard() {
        let (a, b, g) = euler_zxz(&H_MATRIX).unwrap();
        assert_abs_diff_eq!(a, -PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, -PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g, -PI / 2.0, epsilon = 1e-12);
        assert_equiv(&zxz_matrix(a, b, g), &H_MATRIX);
    }

    #[test]
    fn euler_rz_quarter() {
        let m = Gate::rz(0, PI / 4.0).matrix();
        let u = [m[0], m[1], m[2], m[3]];
        let (a, b, g) = euler_zxz(&u).unwrap();
        assert_abs_diff_eq!(a, -PI / 4.0, epsilon = 1e-12);
        assert_eq!((b, g), (0.0, 0.0));
    }

    #[test]
    fn euler_degenerate_pi() {
        let x = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let (a, b, g) = euler_zxz(&x).unwrap();
        assert_eq!(g, 0.0);
        assert_eq!(b.abs(), PI);
        assert_equiv(&zxz_matrix(a, b, g), &x);
    }

    #[test]
    fn euler_random_reconstructs() {
        let mut rng = stream(11, "euler", 0);
        for _ in 0..200 {
            let u = random_u2(&mut rng);
            let (a, b, g) = euler_zxz(&u).unwrap();
            for x in [a, b, g] {
                assert!(x > -PI && x <= PI);
            }
            assert_equiv(&zxz_matrix(a, b, g), &u);
        }
        let bad = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(euler_zxz(&bad).is_err());
    }

    fn angles(c: &Circuit) -> Vec<f64> {
        j_decompose(c).unwrap().j_angles()
    }

    #[test]
    fn decomposition_table() {
        let one = |g: Gate| angles(&Circuit::new(1, vec![g]).unwrap());
        assert_eq!(one(Gate::h(0)), vec![0.0]);
        assert_eq!(one(Gate::x(0)), vec![0.0, PI]);
        assert_eq!(one(Gate::z(0)), vec![PI, 0.0]);
        assert_eq!(one(Gate::y(0)), vec![PI, PI]);
        assert_eq!(one(Gate::s(0)), vec![PI / 2.0, 0.0]);
        assert_eq!(one(Gate::t(0)), vec![PI / 4.0, 0.0]);
        assert_eq!(one(Gate::rx(0, 0.3)), vec![0.0, 0.3]);
        let cn = j_decompose(&Circuit::new(2, vec![Gate::cnot(0, 1)]).unwrap()).unwrap();
        assert_eq!(
            cn.items,
            vec![
                JItem::J { wire: 1, theta: 0.0 },
                JItem::CZ { a: 0, b: 1 },
                JItem::J { wire: 1, theta: 0.0 }
            ]
        );
    }

    #[test]
    fn cr2_has_three_quarter_angles() {
        let a = angles(&Circuit::new(2, vec![Gate::crk(2, 0, 1)]).unwrap());
        let nc: Vec<_> = a.iter().filter(|x| x.abs() > 1e-12 && (x.abs() - PI).abs() > 1e-12).collect();
        assert_eq!(nc.len(), 3);
        assert!(nc.iter().all(|x| (x.abs() - PI / 4.0).abs() < 1e-12));
        assert_eq!(a.len(), 6);
    }

    #[test]
    fn peephole_respects_cz() {
        let seq = JSequence {
            n: 2,
            items: vec![
                JItem::J { wire: 0, theta: 0.0 },
                JItem::CZ { a: 0, b: 1 },
                JItem::J { wire: 0, theta: 0.0 },
                JItem::J { wire: 1, theta: 0.0 },
                JItem::J { wire: 1, theta: 0.0 },
            ],
        };
        assert_eq!(peephole(&seq).items.len(), 3);
    }

    #[test]
    fn decomposition_preserves_unitary() {
        let mut rng = stream(5, "decomp", 0);
        for n in 1..=3 {
            for _ in 0..30 {
                let c = random_circuit(n, 8, &mut rng);
                let seq = j_decompose(&c).unwrap();
                let a = unitary_columns(n, |s| c.apply(s)).unwrap();
                let b = unitary_columns(n, |s| seq.apply(s)).unwrap();
                assert_abs_diff_eq!(unitary_overlap(&a, &b).unwrap(), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn rotation_compiles_to_builtin() {
        let (al, be, ga) = (0.3, -1.1, 2.0);
        let seq = JSequence {
            n: 1,
            items: [-ga, -be, -al, 0.0]
                .iter()
                .map(|&t| JItem::J { wire: 0, theta: t })
                .collect(),
        };
        let p = jsequence_to_pattern(&seq).unwrap();
        assert_eq!(p, rotation_pattern(al, be, ga));
    }

    #[test]
    fn h_compiles_to_j_pattern() {
        let p = circuit_to_pattern(&Circuit::new(1, vec![Gate::h(0)]).unwrap()).unwrap();
        assert_eq!(p, crate::pattern::j_pattern(0.0));
    }

    #[test]
    fn compiled_patterns_match_circuits() {
        let mut rng = stream(9, "compile", 0);
        for n in 1..=2 {
            for _ in 0..10 {
                let c = random_circuit(n, 3, &mut rng);
                let p = circuit_to_pattern(&c).unwrap();
                if p.num_measurements() > 10 {
                    continue;
                }
                let inp = haar_state(n, &mut rng);
                let want = c.run(&inp).unwrap();
                for b in enumerate_branches(&p, Some(&inp)).unwrap() {
                    let f = fidelity(&b.run.final_state, &want).unwrap();
                    assert!(f > 1.0 - 1e-9, "fidelity {f} for {c:?}");
                }
            }
        }
    }

    #[test]
    fn invested_examples() {
        let cr2 = Circuit::new(2, vec![Gate::crk(2, 0, 1)]).unwrap();
        let r = invested_magic(&cr2, 2.0).unwrap();
        assert_abs_diff_eq!(r.total.bits, 3.0 * (4.0f64 / 3.0).log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.total.t_units, 3.0 * (4.0f64 / 3.0).log2() / T_UNIT_BITS, epsilon = 1e-12);
        assert_eq!(r.non_clifford_count(), 3);
        let cliff = Circuit::new(
            2,
            vec![Gate::h(0), Gate::s(1), Gate::cz(0, 1), Gate::cnot(1, 0), Gate::x(0), Gate::z(1)],
        )
        .unwrap();
        assert_eq!(invested_magic(&cliff, 2.0).unwrap().total.bits, 0.0);
    }

    #[test]
    fn qft2_pattern_yields_cs_class() {
        let c = Circuit::new(2, vec![Gate::h(0), Gate::crk(2, 1, 0), Gate::h(1)]).unwrap();
        let inp = init_state(1, "0").unwrap().tensor(&states::plus()).unwrap();
        let want = c.run(&inp).unwrap();
        let r = run_pattern(&circuit_to_pattern(&c).unwrap(), Some(&inp), Policy::FirstFeasible).unwrap();
        assert_abs_diff_eq!(fidelity(&r.final_state, &want).unwrap(), 1.0, epsilon = 1e-9);
        let m = crate::pauli::sre(&want, 2.0).unwrap();
        assert_abs_diff_eq!(m.t_units, 2.038_840_227_317_261, epsilon = 1e-6);
        assert_abs_diff_eq!(m.bits, crate::pauli::sre(&states::cs(), 2.0).unwrap().bits, epsilon = 1e-12);
    }

    #[test]
    fn circuit_json_round_trip_and_errors() {
        let mut rng = stream(3, "json", 0);
        let c = random_circuit(3, 20, &mut rng);
        assert_eq!(Circuit::from_json(&c.to_json()).unwrap(), c);
        let bad = r#"{"n": 1, "gates": [{"kind": "Foo", "targets": [0]}]}"#;
        let e = Circuit::from_json(bad).unwrap_err();
        assert!(e.to_string().contains("Foo"));
        let bad = r#"{"n": 1, "gates": [{"kind": "Rz", "targets": [0]}]}"#;
        assert!(Circuit::from_json(bad).is_err());
    }
}
