//! Command-line front-end of the `nebit` toolkit.
//!
//! [`run`] parses arguments, dispatches to the library and writes results to
//! `out` and diagnostics to `err`. Exit codes: 0 on success, 1 on invalid
//! input (bad arguments, unreadable or malformed files, domain and size
//! errors), 2 on numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use nebit::decomp::{self, NegativityMode, QuasiStochasticMatrix, SignedBvnDecomposition};
use nebit::dist::{self, DistributionFile, QuasiDistribution, Var};
use nebit::format::{round12, sig12};
use nebit::frames::{self, Circuit, TetrahedronFrame};
use nebit::upgrade::{self, PositivityConstraint};
use nebit::{twoqubit, Error};

/// Tolerance on the normalisation of distributions read from files.
pub const FILE_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "nebit", version, about = "Local upgrades of Bell correlations with negative bits")]
struct Cli {
    /// Emit machine-readable JSON instead of `key=value` lines.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Upgrade the local-realistic CHSH box by rescaling with ETA at Alice.
    ChshUpgrade {
        #[arg(long)]
        eta: f64,
    },
    /// Upgrade the N-party Mermin box to the quantum bound.
    Mermin {
        #[arg(long)]
        n: usize,
        /// Party applying the upgrade (1-based).
        #[arg(long, default_value_t = 1)]
        party: usize,
        /// Also report the cost when every party shares the upgrade.
        #[arg(long)]
        shared: bool,
    },
    /// Signed Birkhoff-von Neumann decomposition of a quasi-bistochastic matrix.
    Bvn {
        #[arg(long = "in")]
        input: PathBuf,
        /// Minimal-negativity decomposition instead of the shifted construction.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = decomp::DEFAULT_EXACT_DIM)]
        cap: usize,
    },
    /// Minimal nebit negativity of a quasi-bistochastic matrix.
    MinNeg {
        #[arg(long = "in")]
        input: PathBuf,
        /// Largest dimension solved exactly; larger matrices get the heuristic bound.
        #[arg(long, default_value_t = decomp::DEFAULT_EXACT_DIM)]
        cap: usize,
    },
    /// Optimise the correction coefficients of the M-input process.
    OptimizeS {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eta: f64,
    },
    /// Per-gate nebit negativity of a qubit circuit in the SIC frame.
    FrameCircuit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Exact minimal negativity for gates up to the cap.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = decomp::DEFAULT_EXACT_DIM)]
        cap: usize,
    },
    /// Quantum and upgraded CHSH bounds of α|01⟩ − β|10⟩ over α ∈ [0, 1] as CSV.
    TwoQubitSweep {
        #[arg(long)]
        steps: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Marginals and correlations of a distribution.
    Dist {
        #[arg(long, value_enum)]
        op: DistOp,
        /// Distribution file `{"parties":[…], "weights":[…]}`.
        #[arg(long = "in", conflicts_with = "preset")]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Rescaling for the `chsh-quasi` preset.
        #[arg(long)]
        eta: Option<f64>,
        /// Party count for the `mermin` preset.
        #[arg(long)]
        n: Option<usize>,
        /// Variables as `party:setting`, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        vars: Vec<String>,
    },
    /// Random quasi-bistochastic matrix as JSON.
    RandomMatrix {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistOp {
    Marginal,
    Correlation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    ChshLhv,
    ChshQuasi,
    Mermin,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Input(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Lib(Error::Numerical(_)) => 2,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let mut printer = Printer { json: cli.json, out };
    match dispatch(cli.command, &mut printer, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

struct Printer<'a> {
    json: bool,
    out: &'a mut dyn Write,
}

impl Printer<'_> {
    fn raw(&mut self, text: &str) -> Outcome {
        self.out.write_all(text.as_bytes()).map_err(|e| Failure::Input(format!("cannot write output: {e}")))
    }

    fn json(&mut self, value: &Value) -> Outcome {
        let text = serde_json::to_string_pretty(value).expect("values serialise");
        self.raw(&format!("{text}\n"))
    }

    /// `key=value` lines in human mode, `json` otherwise.
    fn emit(&mut self, lines: &[(&str, String)], json: Value) -> Outcome {
        if self.json {
            return self.json(&json);
        }
        let text: String = lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        self.raw(&text)
    }
}

fn num(x: f64) -> Value {
    json!(round12(x))
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|&x| sig12(x)).collect::<Vec<_>>().join(",")
}

fn mode_name(mode: NegativityMode) -> &'static str {
    match mode {
        NegativityMode::Exact => "exact",
        NegativityMode::Heuristic => "heuristic",
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: nebit::Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Domain(m) => Failure::Input(format!("{}: {m}", path.display())),
        other => Failure::Lib(other),
    })
}

/// Reads a matrix file; both matrix commands need row and column sums of one.
fn read_matrix(path: &Path) -> std::result::Result<QuasiStochasticMatrix, Failure> {
    let w = in_file(path, QuasiStochasticMatrix::from_file(read_json(path)?))?;
    if !w.is_bistochastic(decomp::BISTOCHASTIC_TOL) {
        return Err(Failure::Input(format!(
            "{}: field `rows`: matrix is not bistochastic (row/column sum off by {:e})",
            path.display(),
            w.stochasticity_error()
        )));
    }
    Ok(w)
}

fn decomposition_json(dec: &SignedBvnDecomposition) -> Value {
    let file = dec.to_file();
    json!({
        "delta": num(file.delta),
        "terms": file.terms.iter().map(|t| json!({"weight": num(t.weight), "perm": t.perm})).collect::<Vec<_>>(),
    })
}

fn dispatch(command: Command, p: &mut Printer, err: &mut dyn Write) -> Outcome {
    match command {
        Command::ChshUpgrade { eta } => chsh_upgrade(p, eta),
        Command::Mermin { n, party, shared } => mermin(p, n, party, shared),
        Command::Bvn { input, exact, cap } => bvn(p, &input, exact, cap),
        Command::MinNeg { input, cap } => min_neg(p, &input, cap),
        Command::OptimizeS { m, eta } => optimize_s(p, m, eta),
        Command::FrameCircuit { input, exact, cap } => frame_circuit(p, &input, exact, cap),
        Command::TwoQubitSweep { steps, out } => two_qubit_sweep(p, err, steps, out.as_deref()),
        Command::Dist { op, input, preset, eta, n, vars } => dist_op(p, op, input.as_deref(), preset, eta, n, &vars),
        Command::RandomMatrix { d, seed } => random_matrix(p, d, seed),
    }
}

fn chsh_upgrade(p: &mut Printer, eta: f64) -> Outcome {
    let up = upgrade::chsh_upgrade(eta)?;
    let shared = upgrade::shared_cost(2, eta.max(1.0))?;
    p.emit(
        &[
            ("eta", sig12(up.eta)),
            ("chsh", sig12(up.value)),
            ("delta", sig12(up.delta)),
            ("lower_bound", sig12(up.lower_bound)),
            ("shared_delta_per_observer", sig12(shared.per_observer_delta)),
            ("shared_delta_total", sig12(shared.total)),
        ],
        json!({
            "eta": num(up.eta),
            "chsh": num(up.value),
            "delta": num(up.delta),
            "lower_bound": num(up.lower_bound),
            "shared_delta_per_observer": num(shared.per_observer_delta),
            "shared_delta_total": num(shared.total),
        }),
    )
}

fn mermin(p: &mut Printer, n: usize, party: usize, shared: bool) -> Outcome {
    let up = upgrade::mermin_upgrade(n, party)?;
    let mut lines = vec![
        ("N", n.to_string()),
        ("party", party.to_string()),
        ("C", sig12(up.classical)),
        ("Q", sig12(up.quantum)),
        ("eta", sig12(up.eta)),
        ("delta", sig12(up.delta)),
        ("upgraded_value", sig12(up.value)),
    ];
    let mut doc = json!({
        "N": n,
        "party": party,
        "C": num(up.classical),
        "Q": num(up.quantum),
        "eta": num(up.eta),
        "delta": num(up.delta),
        "upgraded_value": num(up.value),
    });
    if shared {
        let costs = upgrade::mermin_shared_costs(n)?;
        lines.extend([
            ("shared_eta_per_observer", sig12(costs.required.per_observer_eta)),
            ("shared_delta_per_observer", sig12(costs.required.per_observer_delta)),
            ("shared_total", sig12(costs.required.total)),
            ("sqrt2_shared_delta_per_observer", sig12(costs.sqrt2.per_observer_delta)),
            ("sqrt2_shared_total", sig12(costs.sqrt2.total)),
        ]);
        doc["shared"] = json!({
            "eta_per_observer": num(costs.required.per_observer_eta),
            "delta_per_observer": num(costs.required.per_observer_delta),
            "total": num(costs.required.total),
            "sqrt2_delta_per_observer": num(costs.sqrt2.per_observer_delta),
            "sqrt2_total": num(costs.sqrt2.total),
        });
    }
    p.emit(&lines, doc)
}

fn bvn(p: &mut Printer, input: &Path, exact: bool, cap: usize) -> Outcome {
    let w = read_matrix(input)?;
    let dec = if exact {
        in_file(input, decomp::minimal_negativity_capped(&w, NegativityMode::Exact, cap))?.decomposition
    } else {
        in_file(input, decomp::generalized_bvn(&w))?
    };
    if p.json {
        return p.json(&decomposition_json(&dec));
    }
    let mut lines = vec![
        ("delta", sig12(dec.delta())),
        ("terms", dec.terms().len().to_string()),
        ("reconstruction_error", sig12(dec.reconstruction_error(&w))),
    ];
    for t in dec.terms() {
        let perm = t.perm.image().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        lines.push(("term", format!("{} [{perm}]", sig12(t.weight))));
    }
    p.emit(&lines, Value::Null)
}

fn min_neg(p: &mut Printer, input: &Path, cap: usize) -> Outcome {
    let w = read_matrix(input)?;
    let mode = if w.dim() <= cap { NegativityMode::Exact } else { NegativityMode::Heuristic };
    let m = in_file(input, decomp::minimal_negativity_capped(&w, mode, cap))?;
    p.emit(
        &[
            ("d", w.dim().to_string()),
            ("lower_bound", sig12(m.lower_bound)),
            ("delta", sig12(m.delta)),
            ("mode", mode_name(m.mode).to_string()),
        ],
        json!({
            "d": w.dim(),
            "lower_bound": num(m.lower_bound),
            "delta": num(m.delta),
            "mode": mode_name(m.mode),
            "decomposition": decomposition_json(&m.decomposition),
        }),
    )
}

fn optimize_s(p: &mut Printer, m: usize, eta: f64) -> Outcome {
    let opt = upgrade::optimize_ansatz(m, eta)?;
    let positivity = match opt.positivity {
        PositivityConstraint::EtaZeroAndOne => "eta_0_and_1",
        PositivityConstraint::EtaOneOnly => "eta_1_only",
    };
    let monomials: Vec<String> = upgrade::ansatz_monomials(m).iter().map(|mono| mono.label()).collect();
    p.emit(
        &[
            ("m", m.to_string()),
            ("eta", sig12(eta)),
            ("t", list(opt.coeffs.t())),
            ("delta", sig12(opt.delta)),
            ("positivity", positivity.to_string()),
        ],
        json!({
            "m": m,
            "eta": num(eta),
            "monomials": monomials,
            "t": nums(opt.coeffs.t()),
            "delta": num(opt.delta),
            "positivity": positivity,
        }),
    )
}

fn frame_circuit(p: &mut Printer, input: &Path, exact: bool, cap: usize) -> Outcome {
    let circuit = in_file(input, Circuit::from_file(read_json(input)?))?;
    let mode = if exact { NegativityMode::Exact } else { NegativityMode::Heuristic };
    let rep = frames::circuit_negativity(&circuit, &TetrahedronFrame::canonical(), mode, cap)?;
    let targets = |t: &[usize]| t.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
    let mut lines = vec![("n_qubits", circuit.n_qubits().to_string())];
    for g in &rep.gates {
        lines.push((
            "gate",
            format!(
                "{} [{}] d={} lower_bound={} delta={} mode={}",
                g.name,
                targets(&g.targets),
                g.dim,
                sig12(g.lower_bound),
                sig12(g.delta),
                mode_name(g.mode)
            ),
        ));
    }
    lines.push(("total_lower_bound", sig12(rep.total_lower_bound)));
    lines.push(("total", sig12(rep.total)));
    let gates: Vec<Value> = rep
        .gates
        .iter()
        .map(|g| {
            json!({
                "name": g.name,
                "targets": g.targets,
                "dim": g.dim,
                "lower_bound": num(g.lower_bound),
                "delta": num(g.delta),
                "mode": mode_name(g.mode),
            })
        })
        .collect();
    p.emit(
        &lines,
        json!({
            "n_qubits": circuit.n_qubits(),
            "gates": gates,
            "total_lower_bound": num(rep.total_lower_bound),
            "total": num(rep.total),
        }),
    )
}

fn two_qubit_sweep(p: &mut Printer, err: &mut dyn Write, steps: usize, out: Option<&Path>) -> Outcome {
    let rows = twoqubit::sweep(steps)?;
    let csv = twoqubit::sweep_csv(&rows);
    match out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
            let _ = writeln!(err, "wrote {} rows to {}", rows.len(), path.display());
            Ok(())
        }
        None => p.raw(&csv),
    }
}

fn parse_var(text: &str) -> std::result::Result<Var, Failure> {
    let bad = || Failure::Input(format!("--vars: `{text}` is not party:setting"));
    let (party, setting) = text.trim().split_once(':').ok_or_else(bad)?;
    Ok(Var::new(party.parse().map_err(|_| bad())?, setting.parse().map_err(|_| bad())?))
}

fn load_distribution(
    input: Option<&Path>,
    preset: Option<Preset>,
    eta: Option<f64>,
    n: Option<usize>,
) -> std::result::Result<QuasiDistribution, Failure> {
    if let Some(path) = input {
        let file: DistributionFile = read_json(path)?;
        return in_file(path, QuasiDistribution::from_file(file, FILE_TOL));
    }
    let unused = |flag: &str| Failure::Input(format!("{flag} does not apply to this preset"));
    Ok(match preset {
        None => return Err(Failure::Input("one of --in or --preset is required".into())),
        Some(Preset::ChshLhv) => {
            if eta.is_some() || n.is_some() {
                return Err(unused(if eta.is_some() { "--eta" } else { "--n" }));
            }
            dist::chsh_lhv_jpd()
        }
        Some(Preset::ChshQuasi) => {
            if n.is_some() {
                return Err(unused("--n"));
            }
            dist::chsh_quasi_jpd(eta.ok_or_else(|| Failure::Input("preset chsh-quasi needs --eta".into()))?)?
        }
        Some(Preset::Mermin) => {
            if eta.is_some() {
                return Err(unused("--eta"));
            }
            dist::mermin_jpd(n.ok_or_else(|| Failure::Input("preset mermin needs --n".into()))?)?
        }
    })
}

fn dist_op(
    p: &mut Printer,
    op: DistOp,
    input: Option<&Path>,
    preset: Option<Preset>,
    eta: Option<f64>,
    n: Option<usize>,
    vars: &[String],
) -> Outcome {
    let dist = load_distribution(input, preset, eta, n)?;
    let vars = vars.iter().map(|v| parse_var(v)).collect::<std::result::Result<Vec<_>, _>>()?;
    match op {
        DistOp::Correlation => {
            let value = dist.correlation(&vars)?;
            p.emit(&[("correlation", sig12(value))], json!({ "correlation": num(value) }))
        }
        DistOp::Marginal => {
            let m = dist.marginal(&vars)?;
            if p.json {
                let mut file = serde_json::to_value(m.to_file()).expect("serialisable");
                file["weights"] = nums(m.weights());
                return p.json(&file);
            }
            let kept: Vec<String> = m.vars().iter().map(|v| format!("{}:{}", v.party, v.setting)).collect();
            let mut lines = vec![("vars", kept.join(" "))];
            for (idx, w) in m.weights().iter().enumerate() {
                let values: Vec<&str> = (0..m.vars().len())
                    .map(|bit| if idx >> bit & 1 == 0 { "+1" } else { "-1" })
                    .collect();
                lines.push(("p", format!("{} {}", values.join(" "), sig12(*w))));
            }
            lines.push(("min", sig12(m.min_weight())));
            p.emit(&lines, Value::Null)
        }
    }
}

fn random_matrix(p: &mut Printer, d: usize, seed: u64) -> Outcome {
    if d == 0 || d > decomp::MAX_DIM {
        return Err(Failure::Input(format!("--d must be in 1..={}", decomp::MAX_DIM)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = decomp::random_quasi_bistochastic(d, &mut rng);
    let rows: Vec<Value> = w.rows().iter().map(|r| nums(r)).collect();
    // always JSON: the output is meant to be fed back through --in
    p.json(&json!({ "d": d, "rows": rows }))
}
