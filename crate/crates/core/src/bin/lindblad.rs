use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lindblad_structure::corpus;
use lindblad_structure::dynamics::{asymptotic_state, check_rank_bound, trajectory_with_blocks};
use lindblad_structure::error::{Error, Result};
use lindblad_structure::generator::{DensityMatrix, LindbladGenerator};
use lindblad_structure::json::{matrix_from_json, SCHEMA_VERSION};
use lindblad_structure::linop::Tolerance;
use lindblad_structure::perturbation::{
    expand_degenerate, expand_unique, structure_continuity_probe, PerturbedGenerator, DEFAULT_ORDER,
};
use lindblad_structure::spectral::{decompose, stationary_states};
use lindblad_structure::structure::{analyze_with_seed, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "lindblad", version, about = "Structure analysis of Lindblad generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Matrix equality threshold.
    #[arg(long, global = true)]
    tol_match: Option<f64>,
    /// Eigenvalue clustering threshold.
    #[arg(long, global = true)]
    tol_eig: Option<f64>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check hermiticity, trace preservation and complete positivity.
    Validate { input: PathBuf },
    /// Eigenvalues of the generator with path classes.
    Spectrum { input: PathBuf },
    /// Cascade, basins, intertwiners and dephasing classes.
    Structure { input: PathBuf },
    /// Sampled trajectory with eigenvalue and rank monitors.
    Evolve {
        input: PathBuf,
        /// Initial state as a JSON matrix; maximally mixed if omitted.
        #[arg(long)]
        rho: Option<PathBuf>,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Long-time block form of the evolved state.
    Asymptotics {
        input: PathBuf,
        #[arg(long)]
        rho: Option<PathBuf>,
    },
    /// Stationary-state series of a perturbed generator.
    Perturb {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
        /// Coupling values for residuals and structure probes.
        #[arg(long = "lambda", allow_negative_numbers = true)]
        lambdas: Vec<f64>,
    },
    /// Run, list or print the bundled fixtures.
    Corpus {
        #[arg(value_enum, default_value_t = CorpusAction::Run)]
        action: CorpusAction,
        names: Vec<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CorpusAction {
    Run,
    List,
    Show,
}

/// A report plus whether every certificate in it passed.
struct Outcome {
    body: String,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli.opts, &out.body) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}

fn emit(opts: &Opts, body: &str) -> Result<()> {
    match &opts.out {
        Some(p) => std::fs::write(p, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn tolerance(opts: &Opts) -> Result<Tolerance> {
    let mut t = Tolerance::default();
    if let Some(v) = opts.tol_rank {
        t.rank_tol = v;
    }
    if let Some(v) = opts.tol_match {
        t.match_tol = v;
    }
    if let Some(v) = opts.tol_eig {
        t.eig_group_tol = v;
    }
    t.validate()?;
    Ok(t)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load_generator(path: &Path) -> Result<LindbladGenerator> {
    LindbladGenerator::from_json_str(&read(path)?)
}

/// Generator for the analysis verbs, which assume the Lindblad form.
fn load_valid_generator(path: &Path, tol: &Tolerance) -> Result<LindbladGenerator> {
    let g = load_generator(path)?;
    require_valid(&g, tol)?;
    Ok(g)
}

fn require_valid(g: &LindbladGenerator, tol: &Tolerance) -> Result<()> {
    let rep = g.validate(tol);
    if rep.passed() {
        return Ok(());
    }
    let mut failed = Vec::new();
    if !rep.hermitian {
        failed.push(format!("hamiltonian not Hermitian (defect {:.3e})", rep.hermiticity_defect));
    }
    if !rep.trace_preserving {
        failed.push(format!("not trace preserving (defect {:.3e})", rep.trace_preservation_defect));
    }
    if !rep.completely_positive {
        failed.push(format!("not completely positive (min Choi eigenvalue {:.3e})", rep.min_choi_eigenvalue));
    }
    Err(Error::InvalidInput(format!("generator fails validation: {}", failed.join("; "))))
}

fn load_state(path: Option<&Path>, d: usize, tol: &Tolerance) -> Result<DensityMatrix> {
    match path {
        None => Ok(DensityMatrix::maximally_mixed(d)),
        Some(p) => {
            let v: Value = serde_json::from_str(&read(p)?)?;
            let m = matrix_from_json(&v)?;
            if m.nrows() != d {
                return Err(Error::Dimension(format!("state is {}x{}, generator has dimension {d}", m.nrows(), m.ncols())));
            }
            DensityMatrix::new(m, tol)
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn unsupported(verb: &str, f: Format) -> Error {
    let name = match f {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Text => "text",
    };
    Error::InvalidInput(format!("{verb} does not support --format {name}"))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let opts = &cli.opts;
    let tol = tolerance(opts)?;
    let format = opts.format;
    match &cli.command {
        Command::Validate { input } => {
            let g = load_generator(input)?;
            let rep = g.validate(&tol);
            let ok = rep.passed();
            let body = match format.unwrap_or(Format::Json) {
                Format::Json => {
                    let mut v = serde_json::to_value(&rep)?;
                    v["schema_version"] = json!(SCHEMA_VERSION);
                    v["passed"] = json!(ok);
                    pretty(&v)
                }
                Format::Text => format!(
                    "hermitian: {} ({:.3e})\ntrace preserving: {} ({:.3e})\ncompletely positive: {} (min Choi eigenvalue {:.3e})\n",
                    rep.hermitian,
                    rep.hermiticity_defect,
                    rep.trace_preserving,
                    rep.trace_preservation_defect,
                    rep.completely_positive,
                    rep.min_choi_eigenvalue
                ),
                f => return Err(unsupported("validate", f)),
            };
            Ok(Outcome { body, ok })
        }
        Command::Spectrum { input } => {
            let g = load_generator(input)?;
            let sd = decompose(&g, &tol)?;
            let body = match format.unwrap_or(Format::Json) {
                Format::Json => pretty(&sd.to_json()),
                Format::Csv => sd.to_csv_string()?,
                Format::Text => sd.to_text(),
            };
            Ok(Outcome { body, ok: true })
        }
        Command::Structure { input } => {
            let g = load_valid_generator(input, &tol)?;
            let rep = analyze_with_seed(&g, &tol, opts.seed)?;
            let body = match format.unwrap_or(Format::Json) {
                Format::Json => pretty(&rep.to_json()),
                Format::Text => rep.to_text(),
                f => return Err(unsupported("structure", f)),
            };
            Ok(Outcome { body, ok: rep.passed() })
        }
        Command::Evolve { input, rho, t_max, steps } => {
            let g = load_valid_generator(input, &tol)?;
            let rho0 = load_state(rho.as_deref(), g.dim(), &tol)?;
            let traj = trajectory_with_blocks(&g, &rho0, *t_max, *steps, &[])?;
            let mon = check_rank_bound(&g, &traj)?;
            let body = match format.unwrap_or(Format::Csv) {
                Format::Csv => traj.to_csv_string()?,
                Format::Json => {
                    let mut v = traj.to_json();
                    v["rank_bound"] = serde_json::to_value(&mon)?;
                    pretty(&v)
                }
                Format::Text => format!(
                    "{} samples up to t = {t_max}\nfinal min eigenvalue {:.3e}\nrank bound: {} (worst margin {:.3e})\n",
                    traj.times.len(),
                    traj.monitors.last().map_or(f64::NAN, |m| m.min_eigenvalue),
                    if mon.pass { "holds" } else { "violated" },
                    mon.worst_margin
                ),
            };
            Ok(Outcome { body, ok: mon.pass })
        }
        Command::Asymptotics { input, rho } => {
            let g = load_valid_generator(input, &tol)?;
            let rho0 = load_state(rho.as_deref(), g.dim(), &tol)?;
            let rep = analyze_with_seed(&g, &tol, opts.seed)?;
            let form = asymptotic_state(&g, &rho0, &rep, &tol)?;
            let ok = form.check_error <= 1e-6;
            let body = match format.unwrap_or(Format::Json) {
                Format::Json => pretty(&form.to_json()),
                Format::Text => {
                    let mut s = String::new();
                    for (k, c) in form.components.iter().enumerate() {
                        s.push_str(&format!("class {k}: weight {:.9}\n", c.weight));
                    }
                    s.push_str(&format!("check at t = {:.3}: error {:.3e}\n", form.t_check, form.check_error));
                    s
                }
                f => return Err(unsupported("asymptotics", f)),
            };
            Ok(Outcome { body, ok })
        }
        Command::Perturb { input, order, lambdas } => {
            let pg = PerturbedGenerator::from_json_str(&read(input)?)?;
            require_valid(pg.base(), &tol)?;
            let ss = stationary_states(&decompose(pg.base(), &tol)?, &tol)?;
            let mut series = if ss.kernel_dim() == 1 {
                expand_unique(&pg, *order, &tol)?
            } else {
                expand_degenerate(&pg, *order, &tol)?
            };
            series.evaluate(&pg, lambdas)?;
            let probe = (!lambdas.is_empty()).then(|| structure_continuity_probe(&pg, lambdas, &tol));
            let ok = probe.as_ref().is_none_or(|p| p.violations.is_empty());
            let body = match format.unwrap_or(Format::Json) {
                Format::Json => {
                    let mut v = series.to_json();
                    if let Some(p) = &probe {
                        v["continuity"] = p.to_json();
                    }
                    pretty(&v)
                }
                Format::Text => {
                    let mut s = format!("order {}, lookahead {}\n", series.order, series.lookahead);
                    s.push_str(&format!("alpha0 = {:?}\n", series.alphas[0]));
                    if let Some(r) = series.radius_estimate() {
                        s.push_str(&format!("estimated radius {r:.6}\n"));
                    }
                    for (l, r) in &series.residual_at {
                        s.push_str(&format!("lambda {l:e}: residual {r:.3e}\n"));
                    }
                    for w in &series.warnings {
                        s.push_str(&format!("warning: {w}\n"));
                    }
                    if let Some(p) = &probe {
                        for t in &p.transitions {
                            s.push_str(&format!("transition: {t:?}\n"));
                        }
                        for v in &p.violations {
                            s.push_str(&format!("violation: {v}\n"));
                        }
                    }
                    s
                }
                f => return Err(unsupported("perturb", f)),
            };
            Ok(Outcome { body, ok })
        }
        Command::Corpus { action, names } => {
            let selected: Vec<&str> = if names.is_empty() {
                corpus::names()
            } else {
                names.iter().map(String::as_str).collect()
            };
            match action {
                CorpusAction::List => {
                    let mut s = String::new();
                    for n in &selected {
                        let f = corpus::load(n)?;
                        s.push_str(&format!("{n}\t{}\n", f.title));
                    }
                    Ok(Outcome { body: s, ok: true })
                }
                CorpusAction::Show => {
                    let mut s = String::new();
                    for n in &selected {
                        s.push_str(corpus::load(n)?.source());
                    }
                    Ok(Outcome { body: s, ok: true })
                }
                CorpusAction::Run => {
                    for n in &selected {
                        corpus::load(n)?;
                    }
                    let rep = corpus::run_named(&selected, &tol);
                    let body = match format.unwrap_or(Format::Text) {
                        Format::Json => pretty(&rep.to_json()),
                        Format::Text => rep.to_text(),
                        f => return Err(unsupported("corpus", f)),
                    };
                    Ok(Outcome { body, ok: rep.passed() })
                }
            }
        }
    }
}
