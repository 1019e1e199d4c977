//! Command-line front end. `run` takes the argument list and returns the exit
//! code plus captured output, so the binary and the tests share one path.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::compiler::{circuit_to_pattern, invested_magic, j_decompose, Circuit, JItem};
use crate::error::{Error, Result};
use crate::estimator::{
    bootstrap_stderr, estimate_m2, estimate_m2_analytic, read_shots_csv, sample_shots,
    scaling_study, write_shots_csv, ScalingResult, ShotRecord, StateRef,
};
use crate::pattern::{builtin, enumerate_branches, run_pattern, Graph, Pattern, Policy};
use crate::pauli::MagicValue;
use crate::qft::{
    imr_crk, qft_profile, qft_totals, scaling_fit, truncation_fidelity, write_fidelity_csv,
    write_histogram_csv, write_totals_csv,
};
use crate::qstate::{states, to_density, MixedState, PureState};
use crate::resources::{
    builtin_potential, compare_arbitrary_vs_standard, ledger, potential_search, PotentialOpts,
    PotentialSource, ResourceReport, Route,
};
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Threads: a positive count or `auto`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Threads(pub Option<usize>);

fn parse_threads(s: &str) -> std::result::Result<Threads, String> {
    if s == "auto" {
        return Ok(Threads(None));
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive count or \"auto\", got {s:?}")),
        Ok(n) => Ok(Threads(Some(n))),
    }
}

#[derive(Clone, Debug, Args)]
pub struct RunConfig {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads, or `auto`.
    #[arg(long, global = true, value_parser = parse_threads, default_value = "auto")]
    pub threads: Threads,
    /// Output file (or directory for `replicate`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "mqc-magic", version, about = "Magic accounting for measurement-based quantum computation")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a measurement pattern.
    #[command(subcommand)]
    Pattern(PatternCmd),
    /// J-decompose a circuit, compile it to a pattern and report invested magic.
    Compile {
        circuit: PathBuf,
        /// Also print the compiled pattern JSON.
        #[arg(long)]
        emit_pattern: bool,
    },
    /// Invested magic of CR_k gates.
    Imr {
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Report every k up to this value.
        #[arg(long)]
        k_max: Option<u32>,
    },
    /// QFT resource analysis.
    #[command(subcommand)]
    Qft(QftCmd),
    /// Maximize reserved magic over measurement settings of a graph state.
    Potential(PotentialArgs),
    /// Randomized-measurement estimate of M₂.
    Estimate(EstimateArgs),
    /// Regenerate the data behind one figure.
    Replicate {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(Debug, Args)]
pub struct PatternSource {
    /// Pattern JSON file.
    #[arg(long, conflicts_with = "builtin")]
    pub pattern: Option<PathBuf>,
    /// Builtin pattern name.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Builtin parameters, in order.
    #[arg(long = "param", allow_negative_numbers = true)]
    pub params: Vec<f64>,
    /// Named input state for the open inputs (e.g. `plus:1`, `tbk`).
    #[arg(long)]
    pub input: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum PatternCmd {
    /// Run one branch: sampled, or forced with `--outcomes`.
    Run {
        #[command(flatten)]
        source: PatternSource,
        /// Forced outcome bits, one per measurement in command order.
        #[arg(long)]
        outcomes: Option<String>,
    },
    /// Run every feasible branch.
    Branches {
        #[command(flatten)]
        source: PatternSource,
    },
    /// Invested / reserved / potential ledger.
    Ledger {
        #[command(flatten)]
        source: PatternSource,
    },
}

#[derive(Debug, Subcommand)]
pub enum QftCmd {
    Profile {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: Option<usize>,
    },
    Fit {
        #[arg(long, default_value_t = 8)]
        lo: usize,
        #[arg(long, default_value_t = 32)]
        hi: usize,
    },
    Fidelity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Debug, Args)]
pub struct PotentialArgs {
    /// Graph JSON file, or a family: `linear:N`, `cycle:N`, `star:N`, `ghz:N`, `box`.
    #[arg(long)]
    pub graph: String,
    /// Comma-separated qubits to measure.
    #[arg(long, value_delimiter = ',')]
    pub measure: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 48)]
    pub grid_seeds: usize,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Shot records CSV (`basis,outcome`).
    #[arg(long, conflicts_with = "state")]
    pub shots: Option<PathBuf>,
    /// Named state to simulate.
    #[arg(long)]
    pub state: Option<String>,
    /// Depolarizing probability applied to the named state.
    #[arg(long)]
    pub depolarize: Option<f64>,
    #[arg(long, default_value_t = 81)]
    pub bases: usize,
    #[arg(long, default_value_t = 80)]
    pub shots_per_basis: usize,
    /// Exact expectations over all bases instead of sampling.
    #[arg(long)]
    pub analytic: bool,
    /// Replace the jackknife error by a bootstrap with this many resamples.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Write the simulated shot records here.
    #[arg(long)]
    pub save_shots: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig5,
    Fig6,
    Fig4e,
    Fig9,
    Fig10,
}

/// Captured result of one invocation.
#[derive(Clone, Debug, Default)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

/// Input kinds accepted by [`parse_inputs`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Pattern,
    Circuit,
    Shots,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Parsed {
    Pattern(Pattern),
    Circuit(Circuit),
    Shots(Vec<ShotRecord>),
}

/// Reads and validates a pattern JSON, circuit JSON or shots CSV file.
pub fn parse_inputs(path: &Path, kind: InputKind) -> Result<Parsed> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    match kind {
        InputKind::Pattern => Ok(Parsed::Pattern(Pattern::from_json(&text)?)),
        InputKind::Circuit => Ok(Parsed::Circuit(Circuit::from_json(&text)?)),
        InputKind::Shots => Ok(Parsed::Shots(read_shots_csv(text.as_bytes())?)),
    }
}

/// Parses arguments and runs one command.
pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let rendered = e.render().to_string();
            return if code == 0 {
                CliOutput {
                    code,
                    stdout: rendered.into_bytes(),
                    stderr: String::new(),
                }
            } else {
                CliOutput {
                    code,
                    stdout: Vec::new(),
                    stderr: rendered,
                }
            };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.config.threads.0 {
        builder = builder.num_threads(t);
    }
    let result = match builder.build() {
        Ok(pool) => pool.install(|| dispatch(&cli)),
        Err(e) => Err(Error::limit(format!("cannot start thread pool: {e}"))),
    };
    match result.and_then(|out| deliver(&cli.config, out)) {
        Ok(stdout) => CliOutput {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => CliOutput {
            code: e.exit_code(),
            stdout: Vec::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

/// What a command produced: the main document plus extra files for `--out`
/// directories.
struct Output {
    main: Vec<u8>,
    files: Vec<(String, Vec<u8>)>,
}

impl Output {
    fn single(main: Vec<u8>) -> Self {
        Output {
            main,
            files: Vec::new(),
        }
    }
}

fn deliver(cfg: &RunConfig, out: Output) -> Result<Vec<u8>> {
    match &cfg.out {
        None => Ok(out.main),
        Some(path) if !out.files.is_empty() => {
            fs::create_dir_all(path)?;
            for (name, bytes) in &out.files {
                fs::write(path.join(name), bytes)?;
            }
            Ok(out.main)
        }
        Some(path) => {
            fs::write(path, &out.main)?;
            Ok(Vec::new())
        }
    }
}

fn to_json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(header).map_err(crate::pauli::csv_err)?;
    for r in rows {
        wr.write_record(&r).map_err(crate::pauli::csv_err)?;
    }
    wr.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn f(x: f64) -> String {
    let x = if x.abs() < 5e-13 { 0.0 } else { x };
    format!("{x:.12}")
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Pattern(p) => pattern_cmd(cfg, p),
        Command::Compile {
            circuit,
            emit_pattern,
        } => compile_cmd(cfg, circuit, *emit_pattern),
        Command::Imr { k, k_max } => imr_cmd(cfg, *k, *k_max),
        Command::Qft(q) => qft_cmd(cfg, q),
        Command::Potential(a) => potential_cmd(cfg, a),
        Command::Estimate(a) => estimate_cmd(cfg, a),
        Command::Replicate { figure } => replicate(cfg, *figure),
    }
}

// ---- pattern ----

fn load_pattern(src: &PatternSource) -> Result<(Pattern, Option<String>)> {
    match (&src.pattern, &src.builtin) {
        (Some(path), _) => match parse_inputs(path, InputKind::Pattern)? {
            Parsed::Pattern(p) => Ok((p, None)),
            _ => unreachable!(),
        },
        (None, Some(name)) => Ok((builtin(name, &src.params)?, Some(name.clone()))),
        (None, None) => Err(Error::input("give --pattern FILE or --builtin NAME")),
    }
}

fn load_input(src: &PatternSource) -> Result<Option<PureState>> {
    src.input.as_deref().map(states::named).transpose()
}

fn amps_json(s: &PureState) -> Value {
    Value::Array(s.amps().iter().map(|a| json!([a.re, a.im])).collect())
}

fn pattern_cmd(cfg: &RunConfig, cmd: &PatternCmd) -> Result<Output> {
    match cmd {
        PatternCmd::Run { source, outcomes } => {
            let (p, _) = load_pattern(source)?;
            let input = load_input(source)?;
            let mut rng = stream(cfg.seed, "pattern-run", 0);
            let policy = match outcomes {
                Some(bits) => {
                    let v: Vec<u8> = bits
                        .chars()
                        .map(|ch| match ch {
                            '0' => Ok(0),
                            '1' => Ok(1),
                            _ => Err(Error::input(format!("outcome string {bits:?} is not binary"))),
                        })
                        .collect::<Result<_>>()?;
                    Policy::Forced(v)
                }
                None => Policy::Sample(&mut rng),
            };
            let r = run_pattern(&p, input.as_ref(), policy)?;
            match cfg.format {
                Format::Json => Ok(Output::single(to_json_bytes(&json!({
                    "outcomes": r.outcomes,
                    "branch_prob": r.branch_prob,
                    "steps": r.steps.iter().map(|s| json!({"label": s.label, "reserved_T": s.reserved.t_units})).collect::<Vec<_>>(),
                    "final_state": amps_json(&r.final_state),
                })))),
                Format::Csv => Ok(Output::single(csv_bytes(
                    &["step", "label", "reserved_T"],
                    r.steps
                        .iter()
                        .enumerate()
                        .map(|(i, s)| vec![(i + 1).to_string(), s.label.clone(), f(s.reserved.t_units)])
                        .collect(),
                )?)),
            }
        }
        PatternCmd::Branches { source } => {
            let (p, _) = load_pattern(source)?;
            let input = load_input(source)?;
            let runs = enumerate_branches(&p, input.as_ref())?;
            let bits = |o: &[u8]| o.iter().map(|b| char::from(b'0' + b)).collect::<String>();
            match cfg.format {
                Format::Json => Ok(Output::single(to_json_bytes(&Value::Array(
                    runs.iter()
                        .map(|b| {
                            json!({
                                "outcomes": bits(&b.run.outcomes),
                                "prob": b.run.branch_prob,
                                "fidelity_to_first": b.fidelity_to_first,
                                "reserved_T": b.run.reserved_trace.iter().map(|m| m.t_units).collect::<Vec<_>>(),
                            })
                        })
                        .collect(),
                )))),
                Format::Csv => Ok(Output::single(csv_bytes(
                    &["outcomes", "prob", "fidelity_to_first", "final_reserved_T"],
                    runs.iter()
                        .map(|b| {
                            vec![
                                bits(&b.run.outcomes),
                                f(b.run.branch_prob),
                                f(b.fidelity_to_first),
                                f(b.run.reserved_trace.last().map(|m| m.t_units).unwrap_or(0.0)),
                            ]
                        })
                        .collect(),
                )?)),
            }
        }
        PatternCmd::Ledger { source } => {
            let (p, name) = load_pattern(source)?;
            let input = load_input(source)?;
            let pot = match name.as_deref().map(builtin_potential) {
                Some(Ok(v)) => PotentialSource::Analytic(v),
                _ => PotentialSource::Analytic(MagicValue::from_bits(
                    2.0,
                    p.output().len() as f64 * crate::pauli::T_UNIT_BITS,
                )?),
            };
            let rep = ledger(&p, &Route::FromPattern, input.as_ref(), &pot)?;
            report_output(cfg, &rep, "ledger")
        }
    }
}

fn report_output(cfg: &RunConfig, rep: &ResourceReport, stem: &str) -> Result<Output> {
    let mut csv = Vec::new();
    rep.write_csv(&mut csv)?;
    let mut js = rep.to_json();
    js.push('\n');
    let main = match cfg.format {
        Format::Json => js.clone().into_bytes(),
        Format::Csv => csv.clone(),
    };
    Ok(Output {
        main,
        files: vec![(format!("{stem}.csv"), csv), (format!("{stem}.json"), js.into_bytes())],
    })
}

// ---- compile ----

fn compile_cmd(cfg: &RunConfig, path: &Path, emit_pattern: bool) -> Result<Output> {
    let c = match parse_inputs(path, InputKind::Circuit)? {
        Parsed::Circuit(c) => c,
        _ => unreachable!(),
    };
    let seq = j_decompose(&c)?;
    let inv = invested_magic(&c, 2.0)?;
    let pattern = circuit_to_pattern(&c)?;
    match cfg.format {
        Format::Json => {
            let items: Vec<Value> = seq
                .items
                .iter()
                .map(|it| match *it {
                    JItem::J { wire, theta } => json!({"J": {"wire": wire, "theta": theta}}),
                    JItem::CZ { a, b } => json!({"CZ": [a, b]}),
                })
                .collect();
            let mut v = json!({
                "n": c.n,
                "j_count": inv.j_count,
                "non_clifford": inv.non_clifford_count(),
                "invested_bits": inv.total.bits,
                "invested_T": inv.total.t_units,
                "pattern_vertices": pattern.graph().n,
                "items": items,
            });
            if emit_pattern {
                v["pattern"] = serde_json::from_str(&pattern.to_json()).expect("valid json");
            }
            Ok(Output::single(to_json_bytes(&v)))
        }
        Format::Csv => Ok(Output::single(csv_bytes(
            &["index", "theta", "m2_T"],
            inv.per_item
                .iter()
                .enumerate()
                .map(|(i, (t, m))| vec![i.to_string(), f(*t), f(m.t_units)])
                .collect(),
        )?)),
    }
}

// ---- imr / qft ----

fn imr_cmd(cfg: &RunConfig, k: u32, k_max: Option<u32>) -> Result<Output> {
    let hi = k_max.unwrap_or(k);
    if hi < k {
        return Err(Error::input("--k-max must be >= --k"));
    }
    let rows: Vec<(u32, MagicValue)> = (k..=hi).map(|k| Ok((k, imr_crk(k)?))).collect::<Result<_>>()?;
    match cfg.format {
        Format::Json => Ok(Output::single(to_json_bytes(&Value::Array(
            rows.iter()
                .map(|(k, m)| json!({"k": k, "bits": m.bits, "T": m.t_units}))
                .collect(),
        )))),
        Format::Csv => Ok(Output::single(csv_bytes(
            &["k", "bits", "T"],
            rows.iter()
                .map(|(k, m)| vec![k.to_string(), format!("{:.15e}", m.bits), format!("{:.15e}", m.t_units)])
                .collect(),
        )?)),
    }
}

fn qft_cmd(cfg: &RunConfig, cmd: &QftCmd) -> Result<Output> {
    match cmd {
        QftCmd::Profile { n, m } => {
            let p = qft_profile(*n, *m)?;
            match cfg.format {
                Format::Json => Ok(Output::single(to_json_bytes(&serde_json::to_value(&p).expect("serializable")))),
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_histogram_csv(&[p], &mut buf)?;
                    Ok(Output::single(buf))
                }
            }
        }
        QftCmd::Fit { lo, hi } => {
            let fit = scaling_fit(*lo, *hi)?;
            match cfg.format {
                Format::Json => Ok(Output::single(to_json_bytes(&serde_json::to_value(&fit).expect("serializable")))),
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_totals_csv(&qft_totals(*lo, *hi), &mut buf)?;
                    Ok(Output::single(buf))
                }
            }
        }
        QftCmd::Fidelity { n, m, trials } => {
            let mut rng = stream(cfg.seed, "qft-fidelity", 0);
            let r = truncation_fidelity(*n, *m, *trials, &mut rng)?;
            match cfg.format {
                Format::Json => Ok(Output::single(to_json_bytes(&serde_json::to_value(&r).expect("serializable")))),
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_fidelity_csv(&[r], &mut buf)?;
                    Ok(Output::single(buf))
                }
            }
        }
    }
}

// ---- potential ----

/// `linear:N`, `cycle:N`, `star:N`, `ghz:N`, `box`, or a graph JSON path.
pub fn parse_graph(spec: &str) -> Result<Graph> {
    let (head, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let num = || -> Result<usize> {
        arg.parse()
            .map_err(|_| Error::input(format!("bad vertex count in graph spec {spec:?}")))
    };
    match head {
        "linear" | "path" => Graph::path(num()?),
        "cycle" => Graph::cycle(num()?),
        "star" => Graph::star(num()?),
        "ghz" => Graph::ghz(num()?),
        "box" => Ok(Graph::box4()),
        _ => {
            let text = fs::read_to_string(spec)
                .map_err(|e| Error::input(format!("graph {spec:?} is neither a family nor a readable file: {e}")))?;
            let g: Graph = serde_json::from_str(&text).map_err(crate::pattern::json_err)?;
            g.validate()?;
            Ok(g)
        }
    }
}

fn potential_cmd(cfg: &RunConfig, a: &PotentialArgs) -> Result<Output> {
    let g = parse_graph(&a.graph)?;
    let opts = PotentialOpts {
        grid_seeds: a.grid_seeds,
        restarts: a.restarts,
        tol: 1e-8,
        seed: cfg.seed,
    };
    let r = potential_search(&g, &a.measure, None, &opts)?;
    match cfg.format {
        Format::Json => Ok(Output::single(to_json_bytes(&serde_json::to_value(&r).expect("serializable")))),
        Format::Csv => Ok(Output::single(csv_bytes(
            &["qubit", "theta", "phi", "value_T"],
            r.argmax
                .iter()
                .map(|s| vec![s.qubit.to_string(), f(s.theta), f(s.phi), f(r.value.t_units)])
                .collect(),
        )?)),
    }
}

// ---- estimate ----

enum Owned {
    Pure(PureState),
    Mixed(MixedState),
}

impl Owned {
    fn as_ref(&self) -> StateRef<'_> {
        match self {
            Owned::Pure(s) => StateRef::Pure(s),
            Owned::Mixed(s) => StateRef::Mixed(s),
        }
    }
}

fn estimate_cmd(cfg: &RunConfig, a: &EstimateArgs) -> Result<Output> {
    let owned = match &a.state {
        Some(name) => {
            let s = states::named(name)?;
            Some(match a.depolarize {
                Some(p) => Owned::Mixed(to_density(&s, Some(p))?),
                None => Owned::Pure(s),
            })
        }
        None => None,
    };
    let mut rng = stream(cfg.seed, "estimate", 0);
    let (result, records) = match (&a.shots, &owned) {
        (Some(path), _) => {
            let recs = match parse_inputs(path, InputKind::Shots)? {
                Parsed::Shots(r) => r,
                _ => unreachable!(),
            };
            (estimate_m2(&recs)?, Some(recs))
        }
        (None, Some(st)) if a.analytic => (estimate_m2_analytic(st.as_ref())?, None),
        (None, Some(st)) => {
            let recs = sample_shots(st.as_ref(), a.bases, a.shots_per_basis, &mut rng)?;
            (estimate_m2(&recs)?, Some(recs))
        }
        (None, None) => return Err(Error::input("give --shots FILE or --state NAME")),
    };
    let mut result = result;
    if let (Some(r), Some(recs)) = (a.bootstrap, &records) {
        let mut brng = stream(cfg.seed, "bootstrap", 0);
        result.stderr = bootstrap_stderr(recs, r, &mut brng)?;
    }
    if let (Some(path), Some(recs)) = (&a.save_shots, &records) {
        let mut buf = Vec::new();
        write_shots_csv(recs, &mut buf)?;
        fs::write(path, buf)?;
    }
    let exact = owned.as_ref().map(|o| o.as_ref().m2()).transpose()?;
    match cfg.format {
        Format::Json => {
            let mut v: Value = serde_json::from_str(&result.to_json()).expect("valid json");
            if let Some(e) = exact {
                v["exact_T"] = json!(e.t_units);
            }
            Ok(Output::single(to_json_bytes(&v)))
        }
        Format::Csv => Ok(Output::single(csv_bytes(
            &["m2_bits", "m2_T", "purity", "stderr_T", "n_bases", "shots_per_basis"],
            vec![vec![
                f(result.m2.bits),
                f(result.m2.t_units),
                f(result.purity),
                f(result.stderr),
                result.n_bases.to_string(),
                result.shots_per_basis.to_string(),
            ]],
        )?)),
    }
}

// ---- replicate ----

/// Shots per basis for the few-shot part of the error-scaling figure.
pub const FIG9_FEW_SHOT: [usize; 8] = [5, 6, 8, 10, 12, 16, 24, 32];

fn scaling_output(cfg: &RunConfig, r: &ScalingResult, stem: &str) -> Result<Output> {
    let csv = csv_bytes(
        &["N", "shots_per_basis", "mean_abs_error_T", "failures"],
        r.points
            .iter()
            .map(|p| {
                vec![
                    p.total_shots.to_string(),
                    p.shots_per_basis.to_string(),
                    f(p.mean_abs_error),
                    p.failures.to_string(),
                ]
            })
            .collect(),
    )?;
    let js = to_json_bytes(&serde_json::to_value(r).expect("serializable"));
    Ok(Output {
        main: if cfg.format == Format::Json { js.clone() } else { csv.clone() },
        files: vec![(format!("{stem}.csv"), csv), (format!("{stem}.json"), js)],
    })
}

fn replicate(cfg: &RunConfig, fig: Figure) -> Result<Output> {
    match fig {
        Figure::Fig5 => {
            let p = builtin("t_state_1d", &[])?;
            let pot = PotentialSource::Analytic(builtin_potential("t_state_1d")?);
            report_output(cfg, &ledger(&p, &Route::FromPattern, None, &pot)?, "fig5_ledger")
        }
        Figure::Fig6 => {
            let p = builtin("cs_box", &[])?;
            let pot = PotentialSource::Analytic(builtin_potential("cs_box")?);
            report_output(cfg, &ledger(&p, &Route::FromPattern, None, &pot)?, "fig6_ledger")
        }
        Figure::Fig4e => {
            let rows = qft_totals(2, 64);
            let fit = scaling_fit(8, 32)?;
            let mut csv = Vec::new();
            write_totals_csv(&rows, &mut csv)?;
            let profiles: Vec<_> = (2..=64).map(|n| qft_profile(n, None)).collect::<Result<_>>()?;
            let mut hist = Vec::new();
            write_histogram_csv(&profiles, &mut hist)?;
            let js = to_json_bytes(&json!({
                "totals": rows.iter().map(|(n, t)| json!({"n": n, "total_T": t})).collect::<Vec<_>>(),
                "fit": fit,
            }));
            Ok(Output {
                main: if cfg.format == Format::Json { js.clone() } else { csv.clone() },
                files: vec![
                    ("fig4e_totals.csv".into(), csv),
                    ("fig4e_histogram.csv".into(), hist),
                    ("fig4e_fit.json".into(), js),
                ],
            })
        }
        Figure::Fig9 => {
            let cl = states::cluster4();
            let nb = 81;
            let grid: Vec<usize> = FIG9_FEW_SHOT.iter().map(|s| s * nb).collect();
            let mut rng = stream(cfg.seed, "fig9", 0);
            let r = scaling_study(StateRef::Pure(&cl), &grid, 100, &mut rng)?;
            scaling_output(cfg, &r, "fig9_scaling")
        }
        Figure::Fig10 => {
            let mut targets = Vec::new();
            for i in 0..=8 {
                for j in 0..8 {
                    targets.push((i as f64 * PI / 16.0, j as f64 * PI / 4.0));
                }
            }
            let rows = compare_arbitrary_vs_standard(&targets)?;
            let csv = csv_bytes(
                &["theta", "phi", "arbitrary_T", "standard_T", "difference_T"],
                rows.iter()
                    .map(|r| {
                        vec![
                            f(r.theta),
                            f(r.phi),
                            f(r.arbitrary.t_units),
                            f(r.standard.t_units),
                            f(r.difference),
                        ]
                    })
                    .collect(),
            )?;
            let js = to_json_bytes(&serde_json::to_value(&rows).expect("serializable"));
            Ok(Output {
                main: if cfg.format == Format::Json { js.clone() } else { csv.clone() },
                files: vec![("fig10_surface.csv".into(), csv), ("fig10_surface.json".into(), js)],
            })
        }
    }
}
