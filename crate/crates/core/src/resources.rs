//! Invested / reserved / potential / wasted magic accounting.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::{invested_magic, Circuit, JSequence};
use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NmOptions};
use crate::pattern::{build_graph_state, run_pattern, Command, CorrOp, Graph, Pattern, Policy, StepKind};
use crate::pauli::{csv_err, meas_magic, meas_magic_general, sre, MagicValue};
use crate::qstate::{c, mat2_mul, states, Gate, MeasBasis, PureState, C64, H_MATRIX};
use crate::rng::stream;

pub const MAX_POTENTIAL_MEASURED: usize = 6;
pub const MAX_POTENTIAL_REMAINING: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerStep {
    pub label: String,
    pub invested_increment: MagicValue,
    pub invested_accumulated: MagicValue,
    pub reserved: MagicValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub steps: Vec<LedgerStep>,
    pub potential: MagicValue,
    pub wasted: MagicValue,
    /// One T per output qubit.
    pub msi_bound: MagicValue,
    /// Outcomes of the branch the reserved trace was taken on.
    pub outcomes: Vec<u8>,
}

impl ResourceReport {
    pub fn invested(&self) -> MagicValue {
        self.steps
            .last()
            .map(|s| s.invested_accumulated)
            .unwrap_or(MagicValue::zero(2.0))
    }

    pub fn reserved_final(&self) -> MagicValue {
        self.steps
            .last()
            .map(|s| s.reserved)
            .unwrap_or(MagicValue::zero(2.0))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Columns `step,invested_T,reserved_T`, steps numbered from 1.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["step", "invested_T", "reserved_T"]).map_err(csv_err)?;
        for (i, s) in self.steps.iter().enumerate() {
            wr.write_record([
                (i + 1).to_string(),
                format!("{:.12}", s.invested_accumulated.t_units),
                format!("{:.12}", s.reserved.t_units),
            ])
            .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Where invested increments come from.
#[derive(Clone, Debug, PartialEq)]
pub enum Route {
    /// Each measurement's own angle; non-Clifford corrections at their J cost.
    FromPattern,
    /// One increment per J item; the pattern must have one step per item.
    JSequence(JSequence),
    Explicit(Vec<MagicValue>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSource {
    Analytic(MagicValue),
    Search {
        measured: Vec<usize>,
        opts: PotentialOpts,
    },
}

/// Invested cost of a non-Clifford correction (T̂ is one J(π/4)).
pub fn correction_cost(op: CorrOp) -> MagicValue {
    match op {
        CorrOp::T => meas_magic(PI / 4.0),
        _ => MagicValue::zero(2.0),
    }
}

/// Runs the first feasible branch and lines up invested, reserved and
/// potential magic step by step.
pub fn ledger(
    p: &Pattern,
    route: &Route,
    input: Option<&PureState>,
    potential: &PotentialSource,
) -> Result<ResourceReport> {
    let run = run_pattern(p, input, Policy::FirstFeasible)?;
    let increments: Vec<MagicValue> = match route {
        Route::FromPattern => run
            .steps
            .iter()
            .map(|s| match &s.kind {
                StepKind::Measure { qubit } => p
                    .commands()
                    .iter()
                    .find_map(|c| match c {
                        Command::Measure(m) if m.qubit == *qubit => Some(m.kind.magic()),
                        _ => None,
                    })
                    .expect("measured qubit has a command"),
                StepKind::Correct { op, .. } => correction_cost(*op),
            })
            .collect(),
        Route::JSequence(seq) => {
            if seq.j_count() != run.steps.len()
                || run.steps.iter().any(|s| !matches!(s.kind, StepKind::Measure { .. }))
            {
                return Err(Error::input(format!(
                    "route/pattern mismatch: {} J items for {} pattern steps",
                    seq.j_count(),
                    run.steps.len()
                )));
            }
            seq.j_angles().into_iter().map(meas_magic).collect()
        }
        Route::Explicit(v) => {
            if v.len() != run.steps.len() {
                return Err(Error::input(format!(
                    "route/pattern mismatch: {} increments for {} pattern steps",
                    v.len(),
                    run.steps.len()
                )));
            }
            v.clone()
        }
    };
    let mut acc = MagicValue::zero(2.0);
    let steps: Vec<LedgerStep> = run
        .steps
        .iter()
        .zip(&increments)
        .map(|(s, inc)| {
            acc = acc.add(inc);
            LedgerStep {
                label: s.label.clone(),
                invested_increment: *inc,
                invested_accumulated: acc,
                reserved: s.reserved,
            }
        })
        .collect();
    let potential = match potential {
        PotentialSource::Analytic(v) => *v,
        PotentialSource::Search { measured, opts } => {
            potential_search(p.graph(), measured, input, opts)?.value
        }
    };
    let wasted = MagicValue::from_bits(2.0, (acc.bits - potential.bits).max(0.0))?;
    let msi_bound = MagicValue::from_bits(2.0, p.output().len() as f64 * crate::pauli::T_UNIT_BITS)?;
    Ok(ResourceReport {
        steps,
        potential,
        wasted,
        msi_bound,
        outcomes: run.outcomes,
    })
}

/// Potential used for the builtin patterns: the one-qubit ceiling of 1T for
/// single-output patterns, and M₂ of the target for `cs_box`.
pub fn builtin_potential(name: &str) -> Result<MagicValue> {
    match name {
        "cs_box" => sre(&states::cs(), 2.0),
        "j_pattern" | "rotation_pattern" | "t_state_1d" | "arbitrary_prep" => Ok(MagicValue::from_bits(
            2.0,
            crate::pauli::T_UNIT_BITS,
        )?),
        other => Err(Error::input(format!("no stored potential for {other:?}"))),
    }
}

// ---- potential search ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialOpts {
    /// Random grid points tried per restart before local refinement.
    pub grid_seeds: usize,
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for PotentialOpts {
    fn default() -> Self {
        PotentialOpts {
            grid_seeds: 48,
            restarts: 8,
            tol: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub qubit: usize,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialResult {
    pub value: MagicValue,
    pub argmax: Vec<MeasurementSetting>,
    /// Best objective (bits) per restart.
    pub restart_best: Vec<f64>,
    /// False when some restart hit the iteration cap.
    pub converged: bool,
}

const GRID: usize = 12;

/// Maps any angle pair onto θ ∈ [0, π/2], φ ∈ [0, 2π) describing the same
/// outcome-0 vector up to phase.
pub fn canonical_angles(theta: f64, phi: f64) -> (f64, f64) {
    let mut t = theta.rem_euclid(2.0 * PI);
    let mut f = phi;
    if t >= PI {
        // (θ+π) flips the overall sign only
        t -= PI;
    }
    if t > PI / 2.0 {
        t = PI - t;
        f += PI;
    }
    (t, f.rem_euclid(2.0 * PI))
}

struct Objective {
    state: PureState,
    measured: Vec<usize>,
    baseline: f64,
}

impl Objective {
    fn new(g: &Graph, measured: &[usize], input: Option<&PureState>) -> Result<Self> {
        g.validate()?;
        let mut m = measured.to_vec();
        m.sort_unstable();
        m.dedup();
        if m.len() != measured.len() {
            return Err(Error::input("measured set has duplicates"));
        }
        if let Some(&q) = m.iter().find(|&&q| q >= g.n) {
            return Err(Error::QubitRange { qubit: q, n: g.n });
        }
        if m.len() > MAX_POTENTIAL_MEASURED {
            return Err(Error::limit(format!(
                "potential search measures at most {MAX_POTENTIAL_MEASURED} qubits"
            )));
        }
        let rem = g.n - m.len();
        if rem == 0 || rem > MAX_POTENTIAL_REMAINING {
            return Err(Error::limit(format!(
                "potential search needs 1..={MAX_POTENTIAL_REMAINING} unmeasured qubits, got {rem}"
            )));
        }
        let baseline = match input {
            Some(inp) => sre(inp, 2.0)?.bits,
            None => 0.0,
        };
        Ok(Objective {
            state: build_graph_state(g, input)?,
            measured: m,
            baseline,
        })
    }

    /// Outcome-0 post-measurement state on the unmeasured qubits.
    fn project(&self, x: &[f64]) -> Option<PureState> {
        let n = self.state.n();
        let vecs: Vec<[C64; 2]> = x
            .chunks(2)
            .map(|a| MeasBasis::new(a[0], a[1]).vector(0))
            .collect();
        let kept: Vec<usize> = (0..n).filter(|q| !self.measured.contains(q)).collect();
        let r = kept.len();
        let mut out = vec![c(0.0, 0.0); 1 << r];
        for (idx, amp) in self.state.amps().iter().enumerate() {
            let mut w = *amp;
            for (j, &q) in self.measured.iter().enumerate() {
                let b = (idx >> (n - 1 - q)) & 1;
                w *= vecs[j][b].conj();
            }
            let mut o = 0;
            for &q in &kept {
                o = (o << 1) | ((idx >> (n - 1 - q)) & 1);
            }
            out[o] += w;
        }
        let norm: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        if norm < 1e-14 {
            return None;
        }
        PureState::normalized(r, out).ok()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self.project(x) {
            Some(s) => sre(&s, 2.0).map(|m| m.bits).unwrap_or(0.0) - self.baseline,
            None => f64::NEG_INFINITY,
        }
    }
}

/// Maximizes the M₂ left on the unmeasured qubits over general measurement
/// angles of `measured`, on the all-zero outcome branch. Since the outcome-1
/// vector of `(θ, φ)` is the outcome-0 vector of `(π/2−θ, φ+π)`, the branch
/// choice loses nothing. With an input, the increment over `M₂(input)` is
/// returned.
pub fn potential_search(
    g: &Graph,
    measured: &[usize],
    input: Option<&PureState>,
    opts: &PotentialOpts,
) -> Result<PotentialResult> {
    if opts.restarts == 0 || opts.grid_seeds == 0 {
        return Err(Error::input("potential search needs at least one restart and seed"));
    }
    let obj = Objective::new(g, measured, input)?;
    let dim = 2 * obj.measured.len();
    let canon = |x: &[f64]| -> Vec<f64> {
        x.chunks(2)
            .flat_map(|a| {
                let (t, f) = canonical_angles(a[0], a[1]);
                [t, f]
            })
            .collect()
    };
    let runs: Vec<(Vec<f64>, f64, bool)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(opts.seed, "potential", r as u64);
            let mut best_x = vec![0.0; dim];
            let mut best_f = f64::NEG_INFINITY;
            for _ in 0..opts.grid_seeds {
                let x: Vec<f64> = (0..dim)
                    .map(|i| {
                        let g = rng.gen_range(0..GRID) as f64;
                        if i % 2 == 0 {
                            g * (PI / 2.0) / (GRID - 1) as f64
                        } else {
                            g * 2.0 * PI / GRID as f64
                        }
                    })
                    .collect();
                let f = obj.eval(&x);
                if f > best_f {
                    best_f = f;
                    best_x = x;
                }
            }
            let nm = nelder_mead(
                |x| {
                    let v = obj.eval(x);
                    if v.is_finite() {
                        -v
                    } else {
                        1e3
                    }
                },
                &best_x,
                &NmOptions {
                    step: 0.3,
                    tol: opts.tol,
                    max_iter: 4000,
                },
            );
            let x = canon(&nm.x);
            let f = obj.eval(&x);
            if f >= best_f {
                (x, f, nm.converged)
            } else {
                (canon(&best_x), best_f, nm.converged)
            }
        })
        .collect();
    let (bi, _) = runs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("at least one restart");
    let (x, f, _) = &runs[bi];
    if !f.is_finite() {
        return Err(Error::numerical("every restart landed on a zero-probability branch"));
    }
    let value = if input.is_some() {
        // increments may be negative
        MagicValue::unclamped(2.0, *f)
    } else {
        MagicValue::from_bits(2.0, *f)?
    };
    Ok(PotentialResult {
        value,
        argmax: obj
            .measured
            .iter()
            .zip(x.chunks(2))
            .map(|(&q, a)| MeasurementSetting {
                qubit: q,
                theta: a[0],
                phi: a[1],
            })
            .collect(),
        restart_best: runs.iter().map(|r| r.1).collect(),
        converged: runs.iter().all(|r| r.2),
    })
}

/// Re-evaluates the objective at given settings.
pub fn potential_objective(
    g: &Graph,
    settings: &[MeasurementSetting],
    input: Option<&PureState>,
) -> Result<f64> {
    let mut s = settings.to_vec();
    s.sort_by_key(|m| m.qubit);
    let measured: Vec<usize> = s.iter().map(|m| m.qubit).collect();
    let obj = Objective::new(g, &measured, input)?;
    let x: Vec<f64> = s.iter().flat_map(|m| [m.theta, m.phi]).collect();
    Ok(obj.eval(&x))
}

// ---- arbitrary vs standard preparation ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArbitraryComparison {
    pub theta: f64,
    pub phi: f64,
    /// One general measurement: M₂ of the target.
    pub arbitrary: MagicValue,
    /// Planar J route of the preparing unitary.
    pub standard: MagicValue,
    pub difference: f64,
}

/// `U` with `U|+⟩ ∝ cosθ|0⟩ + e^{iφ} sinθ|1⟩`: `P(φ+π/2)·H·P(2θ)`.
pub fn preparation_unitary(theta: f64, phi: f64) -> [C64; 4] {
    let p = |a: f64| [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, a)];
    mat2_mul(&p(phi + PI / 2.0), &mat2_mul(&H_MATRIX, &p(2.0 * theta)))
}

/// Invested magic of one general measurement versus the J-compiled
/// preparation of the same state from `|+⟩`, in T units for the difference.
pub fn compare_arbitrary_vs_standard(targets: &[(f64, f64)]) -> Result<Vec<ArbitraryComparison>> {
    targets
        .iter()
        .map(|&(theta, phi)| {
            let (s, co) = theta.sin_cos();
            // the relative phase is meaningless at the poles
            let phi_eff = if s.abs() < 1e-12 || co.abs() < 1e-12 { 0.0 } else { phi };
            let arbitrary = meas_magic_general(theta, phi_eff);
            let circ = Circuit::new(1, vec![Gate::u2(0, preparation_unitary(theta, phi_eff))])?;
            let standard = invested_magic(&circ, 2.0)?.total;
            Ok(ArbitraryComparison {
                theta,
                phi,
                arbitrary,
                standard,
                difference: standard.t_units - arbitrary.t_units,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{cs_box, default_theta_m, t_state_1d};
    use crate::qstate::fidelity;
    use approx::assert_abs_diff_eq;

    fn ts(r: &ResourceReport) -> (Vec<f64>, Vec<f64>) {
        (
            r.steps.iter().map(|s| s.invested_accumulated.t_units).collect(),
            r.steps.iter().map(|s| s.reserved.t_units).collect(),
        )
    }

    #[test]
    fn t_state_ledger() {
        let pot = PotentialSource::Analytic(builtin_potential("t_state_1d").unwrap());
        let r = ledger(&t_state_1d(default_theta_m()), &Route::FromPattern, None, &pot).unwrap();
        let (inv, res) = ts(&r);
        for (a, b) in inv.iter().zip([0.0, 0.619_822, 1.329_333]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-5);
        }
        for (a, b) in res.iter().zip([0.0, 0.619_822, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-5);
        }
        assert_abs_diff_eq!(r.wasted.t_units, 0.329_333, epsilon = 1e-5);
        assert_abs_diff_eq!(r.msi_bound.t_units, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cs_box_ledger() {
        let pot = PotentialSource::Analytic(builtin_potential("cs_box").unwrap());
        let r = ledger(&cs_box(), &Route::FromPattern, None, &pot).unwrap();
        let (inv, res) = ts(&r);
        for (a, b) in inv.iter().zip([0.0, 0.709_511, 1.419_023, 2.128_534]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-5);
        }
        for (a, b) in res.iter().zip([0.0, 0.709_511, 1.419_023, 2.038_840]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-5);
        }
        assert_abs_diff_eq!(r.wasted.t_units, 0.089_694, epsilon = 1e-5);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("step,invested_T,reserved_T\n1,"));
    }

    #[test]
    fn route_mismatch() {
        let pot = PotentialSource::Analytic(MagicValue::zero(2.0));
        let e = ledger(&cs_box(), &Route::Explicit(vec![MagicValue::zero(2.0)]), None, &pot);
        assert!(e.is_err());
    }

    fn quick() -> PotentialOpts {
        PotentialOpts {
            grid_seeds: 32,
            restarts: 8,
            tol: 1e-9,
            seed: 4,
        }
    }

    #[test]
    fn linear_ceiling() {
        let r = potential_search(&Graph::path(4).unwrap(), &[0, 1, 2], None, &quick()).unwrap();
        assert_abs_diff_eq!(r.value.t_units, 1.0, epsilon = 1e-3);
        let again = potential_objective(&Graph::path(4).unwrap(), &r.argmax, None).unwrap();
        assert_abs_diff_eq!(again, r.value.bits, epsilon = 1e-8);
        assert!(r.restart_best.iter().all(|b| *b <= r.value.bits));
    }

    #[test]
    fn ghz_ceiling() {
        let r = potential_search(&Graph::ghz(4).unwrap(), &[1, 2, 3], None, &quick()).unwrap();
        assert_abs_diff_eq!(r.value.t_units, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn box_potentials() {
        let cyc = potential_search(&Graph::cycle(4).unwrap(), &[0, 3], None, &quick()).unwrap();
        assert_abs_diff_eq!(cyc.value.t_units, 2.0, epsilon = 1e-3);
        let opp = potential_search(&Graph::box4(), &[0, 3], None, &quick()).unwrap();
        assert_abs_diff_eq!(opp.value.t_units, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn search_limits() {
        assert!(potential_search(&Graph::path(4).unwrap(), &[0, 1, 2, 3], None, &quick()).is_err());
        assert!(potential_search(&Graph::path(4).unwrap(), &[0, 0], None, &quick()).is_err());
        assert!(potential_search(&Graph::path(4).unwrap(), &[7], None, &quick()).is_err());
    }

    #[test]
    fn canonical_angle_equivalence() {
        for &(t, f) in &[(2.0, 0.3), (-0.4, 5.0), (4.0, -1.0), (1.2, 7.0)] {
            let (ct, cf) = canonical_angles(t, f);
            assert!((0.0..=PI / 2.0).contains(&ct) && (0.0..2.0 * PI).contains(&cf));
            let a = PureState::new(1, MeasBasis::new(t, f).vector(0).to_vec()).unwrap();
            let b = PureState::new(1, MeasBasis::new(ct, cf).vector(0).to_vec()).unwrap();
            assert_abs_diff_eq!(fidelity(&a, &b).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn arbitrary_vs_standard() {
        let tbk = (0.5 * (1.0 / 3f64.sqrt()).acos(), PI / 4.0);
        let rows = compare_arbitrary_vs_standard(&[(PI / 8.0, 0.0), tbk, (0.0, 1.3)]).unwrap();
        assert_abs_diff_eq!(rows[0].arbitrary.t_units, 0.709_511, epsilon = 1e-5);
        assert_abs_diff_eq!(rows[0].difference, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rows[1].arbitrary.t_units, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rows[1].standard.t_units, 1.329_333, epsilon = 1e-5);
        assert_eq!(rows[2].arbitrary.bits, 0.0);
        assert_eq!(rows[2].standard.bits, 0.0);
        for &(t, f) in &[(0.3, 1.0), (1.0, 2.0), (0.7, 0.0)] {
            let u = preparation_unitary(t, f);
            let plus = states::plus();
            let mut s = plus.clone();
            s.apply(&Gate::u2(0, u)).unwrap();
            let want = states::bloch_half_angle(t, f);
            assert_abs_diff_eq!(fidelity(&s, &want).unwrap(), 1.0, epsilon = 1e-12);
        }
    }
}
