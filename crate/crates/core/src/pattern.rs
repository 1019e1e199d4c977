//! Graph states and measurement patterns (entangle, measure, correct).
//!
//! Signals are named by the id of the measured qubit: `s_domain: [0, 2]` means
//! "flip the angle sign when `s0 ⊕ s2 = 1`". Planar measurements flip `β → −β`;
//! general measurements flip `φ → −φ`.
//!
//! Execution adds graph vertices lazily, just before a qubit or one of its
//! neighbours is needed. Every pending vertex is a `|+⟩` attached by CZs, so the
//! live register differs from the full remaining graph state by a Clifford and
//! a stabilizer ancilla; reserved magic is therefore exact while the simulated
//! register stays small.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{sre, MagicValue};
use crate::qstate::{
    fidelity, init_state, project_measure, states, Gate, MeasBasis, MeasureMode, PureState,
    MAX_PURE_QUBITS,
};

pub const MAX_BRANCH_MEASUREMENTS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    /// Vertices that receive the caller's input state instead of `|+⟩`.
    #[serde(default)]
    pub open_inputs: Vec<usize>,
    /// Optional local Clifford per vertex, letters from `HSXZ` applied left to
    /// right after all CZs. Empty means no frame.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frame: Vec<String>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let g = Graph {
            n,
            edges: edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect(),
            open_inputs: Vec::new(),
            frame: Vec::new(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_inputs(mut self, inputs: &[usize]) -> Result<Self> {
        self.open_inputs = inputs.to_vec();
        self.validate()?;
        Ok(self)
    }

    pub fn with_frame(mut self, frame: &[&str]) -> Result<Self> {
        self.frame = frame.iter().map(|s| s.to_string()).collect();
        self.validate()?;
        Ok(self)
    }

    /// Path `0 – 1 – … – n-1`.
    pub fn path(n: usize) -> Result<Self> {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &e)
    }

    /// Cycle `0 – 1 – … – n-1 – 0`.
    pub fn cycle(n: usize) -> Result<Self> {
        let mut e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        e.push((n - 1, 0));
        Self::new(n, &e)
    }

    /// Star with centre 0.
    pub fn star(n: usize) -> Result<Self> {
        let e: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Self::new(n, &e)
    }

    /// Four-vertex box with edges 0–1, 0–2, 1–3, 2–3.
    pub fn box4() -> Self {
        Self::new(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).expect("valid")
    }

    /// Star on `n` vertices with `H` on every leaf: the GHZ state.
    pub fn ghz(n: usize) -> Result<Self> {
        let mut frame = vec!["H"; n];
        frame[0] = "";
        Self::star(n)?.with_frame(&frame)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::input("graph.n must be positive"));
        }
        let mut seen = BTreeSet::new();
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if a >= self.n || b >= self.n {
                return Err(Error::input(format!(
                    "graph.edges[{i}]: vertex out of range 0..{}",
                    self.n
                )));
            }
            if a == b {
                return Err(Error::input(format!("graph.edges[{i}]: self-loop on {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::input(format!("graph.edges[{i}]: duplicate edge ({a},{b})")));
            }
        }
        let mut inp = BTreeSet::new();
        for (i, &v) in self.open_inputs.iter().enumerate() {
            if v >= self.n || !inp.insert(v) {
                return Err(Error::input(format!(
                    "graph.open_inputs[{i}]: invalid or repeated vertex {v}"
                )));
            }
        }
        if !self.frame.is_empty() {
            if self.frame.len() != self.n {
                return Err(Error::input("graph.frame must list one entry per vertex"));
            }
            for (i, f) in self.frame.iter().enumerate() {
                if let Some(ch) = f.chars().find(|c| !"HSXZ".contains(*c)) {
                    return Err(Error::input(format!(
                        "graph.frame[{i}]: unsupported local gate {ch:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    fn frame_gates(&self, v: usize, pos: usize) -> Vec<Gate> {
        match self.frame.get(v) {
            None => Vec::new(),
            Some(f) => f
                .chars()
                .map(|ch| match ch {
                    'H' => Gate::h(pos),
                    'S' => Gate::s(pos),
                    'X' => Gate::x(pos),
                    _ => Gate::z(pos),
                })
                .collect(),
        }
    }
}

/// `|+⟩` on every non-input vertex, `input` on `open_inputs`, CZ along every
/// edge, then the local frame.
pub fn build_graph_state(g: &Graph, input: Option<&PureState>) -> Result<PureState> {
    g.validate()?;
    if g.n > MAX_PURE_QUBITS {
        return Err(Error::limit(format!("graph has {} vertices", g.n)));
    }
    let k = g.open_inputs.len();
    let mut order: Vec<usize> = g.open_inputs.clone();
    order.extend((0..g.n).filter(|v| !g.open_inputs.contains(v)));
    let mut st = match input {
        Some(inp) => {
            if inp.n() != k {
                return Err(Error::input(format!(
                    "input has {} qubits but the graph has {k} open inputs",
                    inp.n()
                )));
            }
            if k == g.n {
                inp.clone()
            } else {
                inp.tensor(&init_state(g.n - k, "plus-all")?)?
            }
        }
        None => init_state(g.n, "plus-all")?,
    };
    // position p holds vertex order[p]; bring vertex v to position v
    let mut pos_of = vec![0; g.n];
    for (p, &v) in order.iter().enumerate() {
        pos_of[v] = p;
    }
    st = st.permute(&pos_of)?;
    for &(a, b) in &g.edges {
        st.apply(&Gate::cz(a, b))?;
    }
    for v in 0..g.n {
        for gate in g.frame_gates(v, v) {
            st.apply(&gate)?;
        }
    }
    Ok(st)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MeasKind {
    /// `M^θ`: `(|0⟩ ± e^{iθ}|1⟩)/√2`.
    Planar { theta: f64 },
    /// `cosθ|0⟩ + e^{iφ} sinθ|1⟩` and its complement.
    General { theta: f64, phi: f64 },
}

impl MeasKind {
    pub fn basis(&self, flip: bool) -> MeasBasis {
        let sgn = if flip { -1.0 } else { 1.0 };
        match *self {
            MeasKind::Planar { theta } => MeasBasis::planar(sgn * theta),
            MeasKind::General { theta, phi } => MeasBasis::new(theta, sgn * phi),
        }
    }

    /// M₂ of the outcome-0 basis state, the magic this measurement injects.
    pub fn magic(&self) -> MagicValue {
        match *self {
            MeasKind::Planar { theta } => crate::pauli::meas_magic(theta),
            MeasKind::General { theta, phi } => crate::pauli::meas_magic_general(theta, phi),
        }
    }

    fn finite(&self) -> bool {
        match *self {
            MeasKind::Planar { theta } => theta.is_finite(),
            MeasKind::General { theta, phi } => theta.is_finite() && phi.is_finite(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementCommand {
    pub qubit: usize,
    pub kind: MeasKind,
    pub s_domain: Vec<usize>,
    pub label: String,
}

impl MeasurementCommand {
    pub fn planar(qubit: usize, theta: f64, s_domain: &[usize]) -> Self {
        MeasurementCommand {
            qubit,
            kind: MeasKind::Planar { theta },
            s_domain: s_domain.to_vec(),
            label: format!("M{qubit}"),
        }
    }

    pub fn general(qubit: usize, theta: f64, phi: f64, s_domain: &[usize]) -> Self {
        MeasurementCommand {
            qubit,
            kind: MeasKind::General { theta, phi },
            s_domain: s_domain.to_vec(),
            label: format!("M{qubit}"),
        }
    }

    pub fn labelled(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrOp {
    X,
    Z,
    T,
}

impl CorrOp {
    fn gate(&self, pos: usize) -> Gate {
        match self {
            CorrOp::X => Gate::x(pos),
            CorrOp::Z => Gate::z(pos),
            CorrOp::T => Gate::t(pos),
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, CorrOp::T)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionCommand {
    pub qubit: usize,
    pub op: CorrOp,
    /// Applied iff the parity of these signals is 1; empty means always.
    pub condition: Vec<usize>,
}

impl CorrectionCommand {
    pub fn new(qubit: usize, op: CorrOp, condition: &[usize]) -> Self {
        CorrectionCommand {
            qubit,
            op,
            condition: condition.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Command {
    Measure(MeasurementCommand),
    Correct(CorrectionCommand),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    graph: Graph,
    commands: Vec<Command>,
    output: Vec<usize>,
}

impl Pattern {
    pub fn new(graph: Graph, commands: Vec<Command>, output: Vec<usize>) -> Result<Self> {
        let p = Pattern {
            graph,
            commands,
            output,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn output(&self) -> &[usize] {
        &self.output
    }

    pub fn measurements(&self) -> impl Iterator<Item = &MeasurementCommand> {
        self.commands.iter().filter_map(|c| match c {
            Command::Measure(m) => Some(m),
            _ => None,
        })
    }

    pub fn num_measurements(&self) -> usize {
        self.measurements().count()
    }

    pub fn num_corrections(&self) -> usize {
        self.commands.len() - self.num_measurements()
    }

    fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        let n = self.graph.n;
        let mut measured = vec![false; n];
        let check_signals = |set: &[usize], measured: &[bool], what: &str, i: usize| -> Result<()> {
            for &s in set {
                if s >= n || !measured[s] {
                    return Err(Error::input(format!(
                        "commands[{i}].{what}: signal {s} is not an earlier measurement"
                    )));
                }
            }
            Ok(())
        };
        for (i, cmd) in self.commands.iter().enumerate() {
            match cmd {
                Command::Measure(m) => {
                    if m.qubit >= n {
                        return Err(Error::input(format!(
                            "commands[{i}].qubit: {} out of range",
                            m.qubit
                        )));
                    }
                    if measured[m.qubit] {
                        return Err(Error::input(format!(
                            "commands[{i}].qubit: duplicate measurement of qubit {}",
                            m.qubit
                        )));
                    }
                    if !m.kind.finite() {
                        return Err(Error::input(format!("commands[{i}].theta: angle not finite")));
                    }
                    check_signals(&m.s_domain, &measured, "s_domain", i)?;
                    measured[m.qubit] = true;
                }
                Command::Correct(cc) => {
                    if cc.qubit >= n || measured[cc.qubit] {
                        return Err(Error::input(format!(
                            "commands[{i}].qubit: correction target {} is not an unmeasured qubit",
                            cc.qubit
                        )));
                    }
                    check_signals(&cc.condition, &measured, "condition", i)?;
                }
            }
        }
        let mut out_seen = vec![false; n];
        for (i, &q) in self.output.iter().enumerate() {
            if q >= n || measured[q] || out_seen[q] {
                return Err(Error::input(format!(
                    "output[{i}]: {q} is not a distinct unmeasured qubit"
                )));
            }
            out_seen[q] = true;
        }
        let unmeasured = measured.iter().filter(|m| !**m).count();
        if self.output.len() != unmeasured || self.output.is_empty() {
            return Err(Error::input(
                "output must list every unmeasured qubit, and at least one",
            ));
        }
        Ok(())
    }
}

pub enum Policy<'a> {
    Sample(&'a mut dyn RngCore),
    /// One bit per measurement command, in command order; errors on a
    /// zero-probability branch.
    Forced(Vec<u8>),
    /// Same as `Forced`; used by branch enumeration.
    Branch(Vec<u8>),
    /// Outcome 0 unless it has zero probability.
    FirstFeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepKind {
    Measure { qubit: usize },
    Correct { qubit: usize, op: CorrOp },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStep {
    pub label: String,
    pub kind: StepKind,
    /// M₂ of the remaining unmeasured state after this step.
    pub reserved: MagicValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternRun {
    /// One bit per measurement command, in command order.
    pub outcomes: Vec<u8>,
    pub final_state: PureState,
    /// Reserved magic after each measurement.
    pub reserved_trace: Vec<MagicValue>,
    /// Measurements plus non-Clifford corrections, each with its reserve.
    pub steps: Vec<RunStep>,
    pub branch_prob: f64,
}

struct Live<'g> {
    graph: &'g Graph,
    adj: Vec<Vec<usize>>,
    state: Option<PureState>,
    /// position -> vertex
    order: Vec<usize>,
    present: Vec<bool>,
    framed: Vec<bool>,
    measured: Vec<bool>,
}

impl<'g> Live<'g> {
    fn new(graph: &'g Graph, input: Option<&PureState>) -> Result<Self> {
        let n = graph.n;
        let adj = (0..n).map(|v| graph.neighbors(v)).collect();
        let mut live = Live {
            graph,
            adj,
            state: None,
            order: Vec::new(),
            present: vec![false; n],
            framed: vec![false; n],
            measured: vec![false; n],
        };
        match input {
            Some(inp) => {
                if inp.n() != graph.open_inputs.len() {
                    return Err(Error::input(format!(
                        "input has {} qubits but the pattern has {} open inputs",
                        inp.n(),
                        graph.open_inputs.len()
                    )));
                }
                live.state = Some(inp.clone());
                for &v in &graph.open_inputs {
                    live.order.push(v);
                    live.present[v] = true;
                }
                for &v in &graph.open_inputs {
                    for u in live.adj[v].clone() {
                        if live.present[u] && u < v {
                            live.cz(u, v)?;
                        }
                    }
                }
            }
            None => {
                for &v in &graph.open_inputs.clone() {
                    live.add(v)?;
                }
            }
        }
        Ok(live)
    }

    fn pos(&self, v: usize) -> usize {
        self.order.iter().position(|&u| u == v).expect("vertex is live")
    }

    fn cz(&mut self, a: usize, b: usize) -> Result<()> {
        let (pa, pb) = (self.pos(a), self.pos(b));
        self.state.as_mut().expect("live").apply(&Gate::cz(pa, pb))
    }

    fn add(&mut self, v: usize) -> Result<()> {
        if self.present[v] {
            return Ok(());
        }
        if self.order.len() + 1 > MAX_PURE_QUBITS {
            return Err(Error::limit("live register exceeds the simulator limit"));
        }
        let plus = states::plus();
        self.state = Some(match self.state.take() {
            None => plus,
            Some(s) => s.tensor(&plus)?,
        });
        self.order.push(v);
        self.present[v] = true;
        for u in self.adj[v].clone() {
            if self.present[u] {
                debug_assert!(!self.measured[u]);
                self.cz(u, v)?;
            }
        }
        Ok(())
    }

    /// Adds `v` and all its neighbours, then applies its frame.
    fn complete(&mut self, v: usize) -> Result<()> {
        self.add(v)?;
        for u in self.adj[v].clone() {
            self.add(u)?;
        }
        if !self.framed[v] {
            let gates = self.graph.frame_gates(v, self.pos(v));
            let st = self.state.as_mut().expect("live");
            for g in &gates {
                st.apply(g)?;
            }
            self.framed[v] = true;
        }
        Ok(())
    }

    fn reserved(&self) -> Result<MagicValue> {
        match &self.state {
            None => Ok(MagicValue::zero(2.0)),
            Some(s) => sre(s, 2.0),
        }
    }
}

fn parity(set: &[usize], signal: &[Option<u8>]) -> u8 {
    set.iter()
        .map(|&s| signal[s].expect("validated signal"))
        .fold(0, |a, b| a ^ b)
}

/// Executes the pattern on one branch.
pub fn run_pattern(p: &Pattern, input: Option<&PureState>, policy: Policy<'_>) -> Result<PatternRun> {
    let g = &p.graph;
    let m = p.num_measurements();
    let mut policy = policy;
    if let Policy::Forced(bits) | Policy::Branch(bits) = &policy {
        if bits.len() != m {
            return Err(Error::input(format!(
                "forced outcome vector has {} bits, pattern has {m} measurements",
                bits.len()
            )));
        }
    }
    let mut live = Live::new(g, input)?;
    let mut signal: Vec<Option<u8>> = vec![None; g.n];
    let mut outcomes = Vec::with_capacity(m);
    let mut reserved_trace = Vec::with_capacity(m);
    let mut steps = Vec::new();
    let mut prob = 1.0;

    for cmd in &p.commands {
        match cmd {
            Command::Measure(mc) => {
                live.complete(mc.qubit)?;
                let flip = parity(&mc.s_domain, &signal) == 1;
                let basis = mc.kind.basis(flip);
                let pos = live.pos(mc.qubit);
                let st = live.state.take().expect("live");
                let k = outcomes.len();
                let mode = match &mut policy {
                    Policy::Sample(rng) => MeasureMode::Sample(&mut **rng),
                    Policy::Forced(bits) | Policy::Branch(bits) => MeasureMode::Forced(bits[k]),
                    Policy::FirstFeasible => {
                        let pr = crate::qstate::branch_probs(&st, pos, basis)?;
                        MeasureMode::Forced(if pr[0] >= 1e-12 { 0 } else { 1 })
                    }
                };
                let r = project_measure(&st, pos, basis, mode)?;
                prob *= r.prob;
                live.state = r.reduced;
                live.order.remove(pos);
                live.measured[mc.qubit] = true;
                signal[mc.qubit] = Some(r.outcome);
                outcomes.push(r.outcome);
                let res = live.reserved()?;
                reserved_trace.push(res);
                steps.push(RunStep {
                    label: mc.label.clone(),
                    kind: StepKind::Measure { qubit: mc.qubit },
                    reserved: res,
                });
            }
            Command::Correct(cc) => {
                live.complete(cc.qubit)?;
                if parity(&cc.condition, &signal) == 1 || cc.condition.is_empty() {
                    let pos = live.pos(cc.qubit);
                    live.state.as_mut().expect("live").apply(&cc.op.gate(pos))?;
                }
                if !cc.op.is_clifford() {
                    steps.push(RunStep {
                        label: format!("{:?}{}", cc.op, cc.qubit),
                        kind: StepKind::Correct {
                            qubit: cc.qubit,
                            op: cc.op,
                        },
                        reserved: live.reserved()?,
                    });
                }
            }
        }
    }
    for &q in &p.output {
        live.complete(q)?;
    }
    let st = live.state.take().expect("output is nonempty");
    let perm: Vec<usize> = p.output.iter().map(|&q| live.pos(q)).collect();
    let final_state = st.permute(&perm)?;
    Ok(PatternRun {
        outcomes,
        final_state,
        reserved_trace,
        steps,
        branch_prob: prob,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRun {
    pub run: PatternRun,
    /// Fidelity of this branch's output to the first feasible branch's output.
    pub fidelity_to_first: f64,
}

/// Runs every feasible branch. Branch `b` forces measurement `k` to bit
/// `m-1-k` of `b`, so branches are listed in lexicographic outcome order.
pub fn enumerate_branches(p: &Pattern, input: Option<&PureState>) -> Result<Vec<BranchRun>> {
    let m = p.num_measurements();
    if m > MAX_BRANCH_MEASUREMENTS {
        return Err(Error::limit(format!(
            "{m} measurements exceed the branch enumeration limit {MAX_BRANCH_MEASUREMENTS}"
        )));
    }
    let runs: Vec<Result<Option<PatternRun>>> = (0..1usize << m)
        .into_par_iter()
        .map(|b| {
            let bits = (0..m).map(|k| ((b >> (m - 1 - k)) & 1) as u8).collect();
            match run_pattern(p, input, Policy::Branch(bits)) {
                Ok(r) => Ok(Some(r)),
                Err(Error::ZeroProbability { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut out = Vec::new();
    for r in runs {
        if let Some(run) = r? {
            out.push(run);
        }
    }
    let first = out
        .first()
        .map(|r| r.final_state.clone())
        .ok_or_else(|| Error::numerical("no feasible branch"))?;
    out.into_iter()
        .map(|run| {
            Ok(BranchRun {
                fidelity_to_first: fidelity(&first, &run.final_state)?,
                run,
            })
        })
        .collect()
}

/// `E₁₂ M₁^{−α} X₂^{s₁}` on input qubit 0: realizes `J(α)` on qubit 1.
pub fn j_pattern(alpha: f64) -> Pattern {
    let g = Graph::new(2, &[(0, 1)]).and_then(|g| g.with_inputs(&[0])).expect("valid");
    Pattern::new(
        g,
        vec![
            Command::Measure(MeasurementCommand::planar(0, -alpha, &[])),
            Command::Correct(CorrectionCommand::new(1, CorrOp::X, &[0])),
        ],
        vec![1],
    )
    .expect("valid")
}

/// Five-qubit chain realizing `J(0)J(−α)J(−β)J(−γ)` on input qubit 0.
pub fn rotation_pattern(alpha: f64, beta: f64, gamma: f64) -> Pattern {
    let g = Graph::path(5).and_then(|g| g.with_inputs(&[0])).expect("valid");
    Pattern::new(
        g,
        vec![
            Command::Measure(MeasurementCommand::planar(0, gamma, &[])),
            Command::Measure(MeasurementCommand::planar(1, beta, &[0])),
            Command::Measure(MeasurementCommand::planar(2, alpha, &[1])),
            Command::Measure(MeasurementCommand::planar(3, 0.0, &[0, 2])),
            Command::Correct(CorrectionCommand::new(4, CorrOp::X, &[1, 3])),
            Command::Correct(CorrectionCommand::new(4, CorrOp::Z, &[0, 2])),
        ],
        vec![4],
    )
    .expect("valid")
}

/// Default `θ_m = arctan √2` for [`t_state_1d`].
pub fn default_theta_m() -> f64 {
    2f64.sqrt().atan()
}

/// Four-qubit cluster `(|0000⟩+|0011⟩+|1100⟩−|1111⟩)/2` measured at angles
/// `{0, θ_m, π/4}`, leaving a magic state on qubit 3. The cluster is the path
/// 1–0–2–3 with `H` on qubits 1 and 3.
pub fn t_state_1d(theta_m: f64) -> Pattern {
    let g = Graph::new(4, &[(0, 1), (0, 2), (2, 3)])
        .and_then(|g| g.with_frame(&["", "H", "", "H"]))
        .expect("valid");
    Pattern::new(
        g,
        vec![
            Command::Measure(MeasurementCommand::planar(0, 0.0, &[]).labelled("M0")),
            Command::Measure(MeasurementCommand::planar(1, theta_m, &[0]).labelled("M1")),
            Command::Measure(MeasurementCommand::planar(2, PI / 4.0, &[0, 1]).labelled("M2")),
            Command::Correct(CorrectionCommand::new(3, CorrOp::X, &[0, 1])),
            Command::Correct(CorrectionCommand::new(3, CorrOp::Z, &[0, 2])),
        ],
        vec![3],
    )
    .expect("valid")
}

/// Box resource with one planar and one general measurement followed by `T`
/// on both remaining qubits; outputs `|CS⟩` on qubits (1, 2).
pub fn cs_box() -> Pattern {
    let g = Graph::box4().with_frame(&["H", "", "", "S"]).expect("valid");
    Pattern::new(
        g,
        vec![
            Command::Measure(MeasurementCommand::planar(0, 0.0, &[]).labelled("M0")),
            Command::Measure(MeasurementCommand::general(3, PI / 8.0, 0.0, &[]).labelled("M3")),
            Command::Correct(CorrectionCommand::new(1, CorrOp::T, &[])),
            Command::Correct(CorrectionCommand::new(2, CorrOp::T, &[])),
            Command::Correct(CorrectionCommand::new(1, CorrOp::Z, &[0, 3])),
            Command::Correct(CorrectionCommand::new(2, CorrOp::Z, &[0, 3])),
        ],
        vec![1, 2],
    )
    .expect("valid")
}

/// One auxiliary qubit measured in a general basis; branch 0 leaves
/// `cosθ|0⟩ + e^{iφ} sinθ|1⟩` on qubit 1.
pub fn arbitrary_prep(theta: f64, phi: f64) -> Pattern {
    let g = Graph::new(2, &[(0, 1)]).and_then(|g| g.with_frame(&["", "H"])).expect("valid");
    Pattern::new(
        g,
        vec![Command::Measure(MeasurementCommand::general(0, theta, -phi, &[]))],
        vec![1],
    )
    .expect("valid")
}

/// Builtin by name with positional parameters; missing parameters use
/// defaults (`t_state_1d` defaults to `θ_m = arctan √2`).
pub fn builtin(name: &str, params: &[f64]) -> Result<Pattern> {
    let p = |i: usize, d: f64| params.get(i).copied().unwrap_or(d);
    match name {
        "j_pattern" => Ok(j_pattern(p(0, 0.0))),
        "rotation_pattern" => Ok(rotation_pattern(p(0, 0.0), p(1, 0.0), p(2, 0.0))),
        "t_state_1d" => Ok(t_state_1d(p(0, default_theta_m()))),
        "cs_box" => Ok(cs_box()),
        "arbitrary_prep" => Ok(arbitrary_prep(p(0, 0.0), p(1, 0.0))),
        _ => Err(Error::input(format!("unknown builtin pattern {name:?}"))),
    }
}

pub const BUILTIN_NAMES: [&str; 5] = [
    "j_pattern",
    "rotation_pattern",
    "t_state_1d",
    "cs_box",
    "arbitrary_prep",
];

// ---- file format ----

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    open_inputs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    frame: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum CommandFile {
    M {
        qubit: usize,
        kind: String,
        theta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi: Option<f64>,
        #[serde(default)]
        s_domain: Vec<usize>,
        #[serde(default)]
        label: String,
    },
    C {
        qubit: usize,
        op: String,
        #[serde(default)]
        condition: Vec<usize>,
    },
}

#[derive(Serialize, Deserialize)]
struct PatternFile {
    graph: GraphFile,
    commands: Vec<CommandFile>,
    output: Vec<usize>,
}

pub(crate) fn json_err(e: serde_json::Error) -> Error {
    Error::parse(
        format!("line {} column {}", e.line(), e.column()),
        e.to_string(),
    )
}

pub(crate) fn located(e: Error) -> Error {
    match e {
        Error::Input(msg) => match msg.split_once(": ") {
            Some((loc, rest)) if !loc.contains(' ') => Error::parse(loc, rest),
            _ => Error::parse("(pattern)", msg),
        },
        other => other,
    }
}

impl Pattern {
    pub fn to_json(&self) -> String {
        let f = PatternFile {
            graph: GraphFile {
                n: self.graph.n,
                edges: self.graph.edges.iter().map(|&(a, b)| [a, b]).collect(),
                open_inputs: self.graph.open_inputs.clone(),
                frame: self.graph.frame.clone(),
            },
            commands: self
                .commands
                .iter()
                .map(|c| match c {
                    Command::Measure(m) => {
                        let (kind, theta, phi) = match m.kind {
                            MeasKind::Planar { theta } => ("planar", theta, None),
                            MeasKind::General { theta, phi } => ("general", theta, Some(phi)),
                        };
                        CommandFile::M {
                            qubit: m.qubit,
                            kind: kind.into(),
                            theta,
                            phi,
                            s_domain: m.s_domain.clone(),
                            label: m.label.clone(),
                        }
                    }
                    Command::Correct(cc) => CommandFile::C {
                        qubit: cc.qubit,
                        op: format!("{:?}", cc.op),
                        condition: cc.condition.clone(),
                    },
                })
                .collect(),
            output: self.output.clone(),
        };
        serde_json::to_string_pretty(&f).expect("serializable")
    }

    /// Parses and validates the JSON pattern format. Errors carry a location:
    /// line/column for syntax, a field path for schema violations.
    pub fn from_json(text: &str) -> Result<Pattern> {
        let f: PatternFile = serde_json::from_str(text).map_err(json_err)?;
        let graph = Graph {
            n: f.graph.n,
            edges: f
                .graph
                .edges
                .iter()
                .map(|&[a, b]| (a.min(b), a.max(b)))
                .collect(),
            open_inputs: f.graph.open_inputs,
            frame: f.graph.frame,
        };
        let mut commands = Vec::with_capacity(f.commands.len());
        for (i, c) in f.commands.into_iter().enumerate() {
            commands.push(match c {
                CommandFile::M {
                    qubit,
                    kind,
                    theta,
                    phi,
                    s_domain,
                    label,
                } => {
                    let kind = match kind.as_str() {
                        "planar" => MeasKind::Planar { theta },
                        "general" => MeasKind::General {
                            theta,
                            phi: phi.unwrap_or(0.0),
                        },
                        other => {
                            return Err(Error::parse(
                                format!("commands[{i}].kind"),
                                format!("unknown measurement kind {other:?}"),
                            ))
                        }
                    };
                    let label = if label.is_empty() {
                        format!("M{qubit}")
                    } else {
                        label
                    };
                    Command::Measure(MeasurementCommand {
                        qubit,
                        kind,
                        s_domain,
                        label,
                    })
                }
                CommandFile::C {
                    qubit,
                    op,
                    condition,
                } => {
                    let op = match op.as_str() {
                        "X" => CorrOp::X,
                        "Z" => CorrOp::Z,
                        "T" => CorrOp::T,
                        other => {
                            return Err(Error::parse(
                                format!("commands[{i}].op"),
                                format!("unknown correction {other:?}"),
                            ))
                        }
                    };
                    Command::Correct(CorrectionCommand {
                        qubit,
                        op,
                        condition,
                    })
                }
            });
        }
        Pattern::new(graph, commands, f.output).map_err(located)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{pauli_expectation, PauliString};
    use crate::qstate::C64;
    use approx::assert_abs_diff_eq;

    fn stabilizer(g: &Graph, j: usize) -> PauliString {
        let mut s = vec!['I'; g.n];
        s[j] = 'X';
        for u in g.neighbors(j) {
            s[u] = 'Z';
        }
        PauliString::parse(&s.into_iter().collect::<String>()).unwrap()
    }

    #[test]
    fn two_vertex_graph_state() {
        let st = build_graph_state(&Graph::path(2).unwrap(), None).unwrap();
        let want = [0.5, 0.5, 0.5, -0.5];
        for (a, w) in st.amps().iter().zip(want) {
            assert_abs_diff_eq!((a - C64::new(w, 0.0)).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn graph_stabilizers_hold() {
        for g in [Graph::path(5).unwrap(), Graph::cycle(4).unwrap(), Graph::star(4).unwrap()] {
            let st = build_graph_state(&g, None).unwrap();
            for j in 0..g.n {
                let e = pauli_expectation(&st, &stabilizer(&g, j)).unwrap();
                assert_abs_diff_eq!(e, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn t_state_resource_is_the_literal_cluster() {
        let p = t_state_1d(default_theta_m());
        let st = build_graph_state(p.graph(), None).unwrap();
        for (a, b) in st.amps().iter().zip(states::cluster4().amps()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn star_with_hadamard_leaves_is_ghz() {
        let st = build_graph_state(&Graph::ghz(3).unwrap(), None).unwrap();
        assert_abs_diff_eq!(fidelity(&st, &states::ghz(3)).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn box_is_locally_equivalent_to_cluster() {
        // the path 1-0-2-3 is the box minus edge 1-3; box4 has 0-1,0-2,1-3,2-3
        let st = build_graph_state(&Graph::cycle(4).unwrap(), None).unwrap();
        assert_abs_diff_eq!(sre(&st, 2.0).unwrap().bits, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(2, &[(0, 0)]).is_err());
        assert!(Graph::new(2, &[(0, 2)]).is_err());
        assert!(Graph::new(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::path(2).unwrap().with_frame(&["Q", ""]).is_err());
    }

    #[test]
    fn input_placed_on_open_vertex() {
        let g = Graph::new(2, &[]).unwrap().with_inputs(&[1]).unwrap();
        let inp = init_state(1, "1").unwrap();
        let st = build_graph_state(&g, Some(&inp)).unwrap();
        // |+⟩ ⊗ |1⟩
        assert_abs_diff_eq!(st.amps()[0b01].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(st.amps()[0b10].norm(), 0.0, epsilon = 1e-12);
        assert!(build_graph_state(&g, Some(&states::cs())).is_err());
    }

    #[test]
    fn j_pattern_zero_on_plus_gives_zero() {
        let runs = enumerate_branches(&j_pattern(0.0), Some(&states::plus())).unwrap();
        assert_eq!(runs.len(), 2);
        let zero = init_state(1, "0").unwrap();
        for b in &runs {
            assert_abs_diff_eq!(fidelity(&b.run.final_state, &zero).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn j_pattern_quarter_branches() {
        let runs = enumerate_branches(&j_pattern(PI / 4.0), Some(&states::t_bk())).unwrap();
        assert_eq!(runs.len(), 2);
        for b in &runs {
            assert_abs_diff_eq!(b.run.branch_prob, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(b.fidelity_to_first, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn t_state_traces() {
        let p = t_state_1d(default_theta_m());
        let runs = enumerate_branches(&p, None).unwrap();
        assert_eq!(runs.len(), 8);
        let want = [0.0, -(7.0f64 / 9.0).log2(), 1.5f64.log2()];
        for b in &runs {
            assert_abs_diff_eq!(b.run.branch_prob, 0.125, epsilon = 1e-12);
            assert_abs_diff_eq!(b.fidelity_to_first, 1.0, epsilon = 1e-10);
            for (r, w) in b.run.reserved_trace.iter().zip(want) {
                assert_abs_diff_eq!(r.bits, w, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn cs_box_outputs_cs() {
        let runs = enumerate_branches(&cs_box(), None).unwrap();
        assert_eq!(runs.len(), 4);
        for b in &runs {
            assert_abs_diff_eq!(b.run.branch_prob, 0.25, epsilon = 1e-12);
            let f = fidelity(&b.run.final_state, &states::cs()).unwrap();
            assert!(f >= 1.0 - 1e-10, "fidelity {f}");
            assert_eq!(b.run.steps.len(), 4);
            assert_eq!(b.run.reserved_trace.len(), 2);
        }
    }

    #[test]
    fn arbitrary_prep_branch_zero_is_target() {
        let (th, ph) = (0.4, 1.3);
        let r = run_pattern(&arbitrary_prep(th, ph), None, Policy::Forced(vec![0])).unwrap();
        let f = fidelity(&r.final_state, &states::bloch_half_angle(th, ph)).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pattern_validation_errors() {
        let g = Graph::path(2).unwrap();
        let dup = Pattern::new(
            g.clone(),
            vec![
                Command::Measure(MeasurementCommand::planar(0, 0.0, &[])),
                Command::Measure(MeasurementCommand::planar(0, 0.0, &[])),
            ],
            vec![1],
        );
        assert!(matches!(dup, Err(Error::Input(m)) if m.contains("duplicate")));
        let late = Pattern::new(
            g.clone(),
            vec![Command::Measure(MeasurementCommand::planar(0, 0.0, &[1]))],
            vec![1],
        );
        assert!(late.is_err());
        let measured_target = Pattern::new(
            g.clone(),
            vec![
                Command::Measure(MeasurementCommand::planar(0, 0.0, &[])),
                Command::Correct(CorrectionCommand::new(0, CorrOp::X, &[0])),
            ],
            vec![1],
        );
        assert!(measured_target.is_err());
        let bad_out = Pattern::new(g, vec![], vec![0]);
        assert!(bad_out.is_err());
    }

    #[test]
    fn json_round_trip() {
        for name in BUILTIN_NAMES {
            let p = builtin(name, &[0.3, 0.7, 1.1]).unwrap();
            let q = Pattern::from_json(&p.to_json()).unwrap();
            assert_eq!(p, q, "{name}");
        }
    }

    #[test]
    fn json_errors_are_located() {
        let e = Pattern::from_json("{\"graph\": {\"n\": 2, \"edges\": [[0,1]]},\n \"commands\": [}").unwrap_err();
        assert!(matches!(e, Error::Parse { ref location, .. } if location.contains("line 2")));
        let text = cs_box().to_json().replace("\"op\": \"T\"", "\"op\": \"W\"");
        let e = Pattern::from_json(&text).unwrap_err();
        assert!(matches!(e, Error::Parse { ref location, .. } if location.starts_with("commands[")));
    }

    #[test]
    fn cs_box_counts() {
        let p = cs_box();
        assert_eq!(p.num_measurements(), 2);
        assert_eq!(p.num_corrections(), 4);
    }

    #[test]
    fn unknown_builtin() {
        assert!(builtin("nope", &[]).is_err());
    }
}
