//! `clinr`: command-line front end for building trees, compiling,
//! simulating, bounding and sweeping recursive CliNR implementations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use clinr_core::bounds::{
    bounded_error_bound, bounded_gate_bound, recursive_error_bound, recursive_gate_bound,
    theorem_parameters,
};
use clinr_core::clifford::{random_clifford, CliffordCircuit};
use clinr_core::compiler::{compile, qubit_count};
use clinr_core::estimate::EstimateResult;
use clinr_core::markov::estimate_tree;
use clinr_core::sim::{run_shots, summarize, SimOptions};
use clinr_core::sweep::{self, SweepConfig, SweepPoint, TreeShape};
use clinr_core::tree::{bounded_tree, CliNRTree, ImplConstants};

#[derive(Parser, Debug)]
#[command(
    name = "clinr",
    version,
    about = "Recursive Clifford noise reduction toolkit"
)]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Flat `key = value` file; its settings override flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build, validate or inspect trees.
    #[command(subcommand)]
    Tree(TreeCommand),
    /// Compile a circuit against a tree and report the layout.
    Compile {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        tree: TreeArgs,
        /// Circuit file; a random Clifford of size `s` otherwise.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Print the full block program.
        #[arg(long)]
        dump: bool,
    },
    /// Monte Carlo estimate of one tree.
    Simulate {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
    /// Closed-form bounds and the vanishing-error parameters.
    Bound {
        #[command(flatten)]
        params: Params,
        /// Tree to evaluate the recursive bounds on.
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// Markov-model estimate of one tree.
    Markov {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// Markov grid search and Pareto frontiers.
    Sweep {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        grid: GridArgs,
        /// Emit every grid point, not only the frontiers.
        #[arg(long)]
        all: bool,
    },
    /// Monte Carlo confirmation of sweep points.
    Confirm {
        #[command(flatten)]
        params: Params,
        /// Sweep CSV to confirm.
        #[arg(long)]
        input: PathBuf,
        /// Only confirm points with Markov overhead at most this.
        #[arg(long)]
        confirm_cap: Option<f64>,
    },
    /// Markov against Monte Carlo on the points of a sweep CSV.
    Compare {
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum TreeCommand {
    /// Construct a tree and print it in the tree text format.
    Build {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// Check a tree file; exits nonzero when invariants fail.
    Validate { file: PathBuf },
    /// Summarise a tree level by level.
    Show {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        tree: TreeArgs,
    },
}

/// Physical parameters shared by most commands.
#[derive(Args, Debug, Clone)]
struct Params {
    /// Logical qubits.
    #[arg(long)]
    n: Option<usize>,
    /// Circuit size (default `n²`, or the tree's root size).
    #[arg(long)]
    s: Option<usize>,
    /// Two-qubit error rate; single-qubit and measurement rates are `p/10`.
    #[arg(long)]
    p: Option<f64>,
    /// Idle noise at `p/1000`.
    #[arg(long)]
    idle: bool,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    circuits: Option<u64>,
    #[arg(long)]
    attempt_cap: Option<u64>,
}

#[derive(Args, Debug, Clone)]
struct TreeArgs {
    /// `fig2a`, `direct`, `clinr1`, `uniform`, `bounded` or a tree file.
    #[arg(long)]
    tree: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    t1: Option<usize>,
    #[arg(long)]
    children: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Comma-separated depths.
    #[arg(long)]
    depths: Option<String>,
    /// Range `a..b` of level-1 vertex counts.
    #[arg(long)]
    t1: Option<String>,
    #[arg(long)]
    children: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    omega_cap: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => match emit(&cli, &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn config(cli: &Cli, params: &Params) -> Result<SweepConfig> {
    config_with(cli, params, |_| Ok(()))
}

/// Flags first (`extra` for command-specific ones), then the config file
/// on top.
fn config_with<F>(cli: &Cli, params: &Params, extra: F) -> Result<SweepConfig>
where
    F: FnOnce(&mut SweepConfig) -> Result<()>,
{
    let mut c = SweepConfig {
        seed: cli.seed,
        ..SweepConfig::default()
    };
    if let Some(n) = params.n {
        c.n = n;
    }
    c.s = params.s.or(c.s);
    if let Some(p) = params.p {
        c.p = p;
    }
    c.idle |= params.idle;
    if let Some(v) = params.shots {
        c.shots = v;
    }
    if let Some(v) = params.circuits {
        c.circuits = v;
    }
    if let Some(v) = params.attempt_cap {
        c.attempt_cap = v;
    }
    extra(&mut c)?;
    if let Some(path) = &cli.config {
        let text = read(path)?;
        c.apply_text(&text)
            .with_context(|| format!("config {}", path.display()))?;
    }
    Ok(c)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Resolves the tree argument; the circuit size comes from the tree file
/// when one is given.
fn build_tree(args: &TreeArgs, c: &SweepConfig) -> Result<CliNRTree> {
    let kind = args.tree.as_deref().unwrap_or("fig2a");
    let s = c.size();
    let r = args.r.unwrap_or(1);
    let tree = match kind {
        "fig2a" => CliNRTree::fig2a(s),
        "direct" => CliNRTree::direct(s),
        "clinr1" => CliNRTree::clinr1(s, r),
        "uniform" => {
            let t1 = args.t1.unwrap_or(1);
            let children = match args.depth.unwrap_or(1) {
                1 => None,
                2 => Some(args.children.unwrap_or(2)),
                d => bail!("uniform trees have depth 1 or 2, got {d}"),
            };
            CliNRTree::uniform(s, t1, children, r)?
        }
        "bounded" => bounded_tree(
            s,
            c.p,
            c.n,
            args.depth.unwrap_or(1),
            &ImplConstants::default(),
        )?,
        path => read(Path::new(path))?
            .parse()
            .with_context(|| format!("tree file {path}"))?,
    };
    Ok(tree)
}

/// Config with `s` taken from the tree when the tree fixes it.
fn sized(mut c: SweepConfig, tree: &CliNRTree) -> SweepConfig {
    c.s = Some(tree.root_size());
    c
}

fn load_circuit(path: Option<&PathBuf>, c: &SweepConfig) -> Result<CliffordCircuit> {
    match path {
        Some(p) => {
            let circuit: CliffordCircuit = read(p)?
                .parse()
                .with_context(|| format!("circuit {}", p.display()))?;
            if circuit.num_qubits() != c.n {
                bail!(
                    "circuit has {} qubits, expected n = {}",
                    circuit.num_qubits(),
                    c.n
                );
            }
            Ok(circuit)
        }
        None => Ok(random_clifford(
            c.n,
            c.size(),
            sweep::circuit_seed(c.seed, 0),
        )?),
    }
}

/// Key/value report rendered as `key = value` lines or two-column CSV.
fn pairs(cli: &Cli, rows: &[(&str, String)]) -> String {
    let mut out = String::new();
    match cli.format {
        Format::Text => {
            for (k, v) in rows {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        Format::Csv => {
            out.push_str("key,value\n");
            for (k, v) in rows {
                out.push_str(&format!("{k},{v}\n"));
            }
        }
    }
    out
}

fn estimate_rows(e: &EstimateResult) -> Vec<(&'static str, String)> {
    vec![
        ("provenance", e.provenance.to_string()),
        ("p_log", e.p_log.to_string()),
        ("p_log_err", e.p_log_err.to_string()),
        ("omega_time", e.omega_time.to_string()),
        ("omega_time_err", e.omega_time_err.to_string()),
        ("omega_space", e.omega_space.to_string()),
        ("shots", e.shots.to_string()),
        ("circuits", e.circuits.to_string()),
        ("aborted", e.aborted.to_string()),
    ]
}

fn points_out(cli: &Cli, points: &[SweepPoint]) -> String {
    match cli.format {
        Format::Csv => sweep::to_csv(points),
        Format::Text => sweep::to_jsonl(points),
    }
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Tree(TreeCommand::Build { params, tree }) => {
            let c = config(cli, params)?;
            Ok(build_tree(tree, &c)?.to_string())
        }
        Command::Tree(TreeCommand::Validate { file }) => {
            let text = read(file)?;
            let tree = parse_unchecked(&text)?;
            let violations = tree.validate();
            if violations.is_empty() {
                Ok(pairs(
                    cli,
                    &[
                        ("valid", "true".into()),
                        ("depth", tree.depth().to_string()),
                    ],
                ))
            } else {
                let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                bail!("invalid tree:\n  {}", list.join("\n  "))
            }
        }
        Command::Tree(TreeCommand::Show { params, tree }) => {
            let c = config(cli, params)?;
            let t = build_tree(tree, &c)?;
            let mut rows = vec![
                ("depth", t.depth().to_string()),
                ("vertices", t.num_vertices().to_string()),
                ("s", t.root_size().to_string()),
                ("qubits", qubit_count(&t, c.n).to_string()),
            ];
            let mut level_rows = Vec::new();
            for (l, level) in t.levels().iter().enumerate() {
                let sizes: Vec<String> = level.iter().map(|v| v.s.to_string()).collect();
                let checks: Vec<String> = level.iter().map(|v| v.r.to_string()).collect();
                level_rows.push((
                    format!("level{l}"),
                    format!("s=[{}] r=[{}]", sizes.join(" "), checks.join(" ")),
                ));
            }
            rows.extend(level_rows.iter().map(|(k, v)| (k.as_str(), v.clone())));
            Ok(pairs(cli, &rows))
        }
        Command::Compile {
            params,
            tree,
            circuit,
            dump,
        } => {
            let c = config(cli, params)?;
            let t = build_tree(tree, &c)?;
            let c = sized(c, &t);
            let circ = load_circuit(circuit.as_ref(), &c)?;
            let program = compile(&circ, &t, c.seed)?;
            if *dump {
                return Ok(program.to_string());
            }
            Ok(pairs(
                cli,
                &[
                    ("n", c.n.to_string()),
                    ("s", circ.size().to_string()),
                    ("depth", t.depth().to_string()),
                    ("qubits", program.total_qubits.to_string()),
                    ("blocks", program.blocks.len().to_string()),
                    (
                        "single_pass_gates",
                        program.expected_single_pass_gates().to_string(),
                    ),
                ],
            ))
        }
        Command::Simulate {
            params,
            tree,
            circuit,
        } => {
            let c = config(cli, params)?;
            let t = build_tree(tree, &c)?;
            let c = sized(c, &t);
            let est = match circuit {
                Some(_) => {
                    let circ = load_circuit(circuit.as_ref(), &c)?;
                    let program = compile(&circ, &t, c.seed)?;
                    let options = SimOptions {
                        attempt_cap: c.attempt_cap,
                        inject: None,
                    };
                    let results = run_shots(&program, &c.noise(), &options, c.shots, c.seed)?;
                    summarize(&program, &results)
                }
                None => sweep::monte_carlo_tree(&t, 0, &c)?,
            };
            Ok(pairs(cli, &estimate_rows(&est)))
        }
        Command::Bound { params, tree } => {
            let c = config(cli, params)?;
            let k = ImplConstants::default();
            let s = c.size();
            let mut rows = Vec::new();
            if let Ok(th) = theorem_parameters(s, c.p, c.n) {
                rows.push(("D", th.depth.to_string()));
                rows.push(("qubits", th.qubit_cap.to_string()));
                rows.push(("omega_cap", th.omega_cap.to_string()));
                let b = bounded_error_bound(s, c.p, c.n, th.depth, &k);
                rows.push(("bounded_error_bound", b.bound.value.to_string()));
                rows.push(("bounded_vacuous", b.bound.vacuous.to_string()));
                rows.push(("bounded_precondition", b.precondition.to_string()));
                rows.push((
                    "bounded_gate_bound",
                    bounded_gate_bound(th.depth).to_string(),
                ));
            } else {
                bail!("theorem parameters need s, n ≥ 1 and 0 < p < 1");
            }
            if tree.tree.is_some() {
                let t = build_tree(tree, &c)?;
                let e = recursive_error_bound(&t, c.p, c.n, &k);
                let g = recursive_gate_bound(&t, c.p, c.n, &k);
                rows.push(("tree_error_bound", e.value.to_string()));
                rows.push(("tree_error_vacuous", e.vacuous.to_string()));
                rows.push(("tree_gate_bound", g.value.to_string()));
                rows.push(("tree_gate_vacuous", g.vacuous.to_string()));
            }
            Ok(pairs(cli, &rows))
        }
        Command::Markov { params, tree } => {
            let c = config(cli, params)?;
            let t = build_tree(tree, &c)?;
            let est = estimate_tree(&t, c.n, &c.noise())?;
            Ok(pairs(cli, &estimate_rows(&est)))
        }
        Command::Sweep { params, grid, all } => {
            let c = config_with(cli, params, |c| grid_overrides(c, grid))?;
            let points = sweep::grid(&c)?;
            let out = if *all { points } else { frontiers(&points, &c) };
            Ok(points_out(cli, &out))
        }
        Command::Confirm {
            params,
            input,
            confirm_cap,
        } => {
            let c = config_with(cli, params, |c| {
                if let Some(cap) = confirm_cap {
                    c.confirm_cap = *cap;
                }
                Ok(())
            })?;
            let points = sweep::from_csv(&read(input)?, c.n)?;
            Ok(points_out(cli, &sweep::confirm(&points, &c)?))
        }
        Command::Compare { params, input } => {
            let c = config(cli, params)?;
            let shapes: Vec<TreeShape> = sweep::from_csv(&read(input)?, c.n)?
                .iter()
                .map(|p| p.shape)
                .collect();
            let cmp = sweep::compare(&shapes, &c)?;
            match cli.format {
                Format::Csv => Ok(sweep::to_csv(&cmp.points)),
                Format::Text => {
                    let mut out = sweep::to_jsonl(&cmp.points);
                    out.push_str(&serde_json_line(&cmp));
                    Ok(out)
                }
            }
        }
    }
}

fn serde_json_line(cmp: &sweep::Comparison) -> String {
    format!(
        "{{\"within_factor_two\":{},\"ordering_agreement\":{}}}\n",
        cmp.within_factor_two, cmp.ordering_agreement
    )
}

/// Per-depth frontiers, concatenated in depth order.
fn frontiers(points: &[SweepPoint], c: &SweepConfig) -> Vec<SweepPoint> {
    let mut depths = c.depths.clone();
    depths.sort_unstable();
    depths.dedup();
    depths
        .iter()
        .flat_map(|&d| {
            let sub: Vec<SweepPoint> = points
                .iter()
                .filter(|p| p.shape.depth == d)
                .cloned()
                .collect();
            sweep::pareto(&sub, c.omega_cap)
        })
        .collect()
}

fn grid_overrides(c: &mut SweepConfig, g: &GridArgs) -> Result<()> {
    for (key, value) in [
        ("depths", g.depths.clone()),
        ("t1", g.t1.clone()),
        ("children", g.children.clone()),
        ("r", g.r.clone()),
        ("omega_cap", g.omega_cap.map(|v| v.to_string())),
    ] {
        if let Some(v) = value {
            c.set(key, &v)?;
        }
    }
    Ok(())
}

/// Parses a tree without rejecting invariant violations, so `validate`
/// can list them.
fn parse_unchecked(text: &str) -> Result<CliNRTree> {
    match text.parse::<CliNRTree>() {
        Ok(t) => Ok(t),
        Err(clinr_core::Error::InvalidTree(msg)) => bail!("invalid tree: {msg}"),
        Err(e) => Err(e.into()),
    }
}
