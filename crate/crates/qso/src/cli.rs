//! Command-line surface: model loading, analyses, simulations, and the
//! bundled example models.
//!
//! Exit status is 0 on success, 1 on domain errors (invalid tensors,
//! dimension mismatches, failed validation) and 2 on usage errors
//! (unparseable arguments, missing model source, unknown builtin).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{arr3, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::contraction::{analyze, zeta, ContractionReport, ZetaTerm};
use crate::dynamics::{
    classify, empirical_lipschitz, find_fixed_points, sample_state, trajectory, Verdict,
    DEFAULT_MAX_PERIOD, DEFAULT_MAX_STEPS, DEFAULT_TOL,
};
use crate::error::{QsoError, Result};
use crate::model::{parse_model, serialize_model, BisexualModel, PopulationState};

/// Construct one of the bundled models.
///
/// Known names: `example1`, `example2`, `example3`, and `uniform:N,NU`
/// for the constant operator with `N` female and `NU` male types.
pub fn builtin_model(name: &str) -> Result<BisexualModel> {
    match name {
        "example1" => {
            let f = arr3(&[
                [[3.0 / 7.0, 4.0 / 7.0], [0.5, 0.5]],
                [[0.5, 0.5], [4.0 / 7.0, 3.0 / 7.0]],
            ]);
            let m = arr3(&[
                [[4.0 / 7.0, 3.0 / 7.0], [0.5, 0.5]],
                [[0.5, 0.5], [3.0 / 7.0, 4.0 / 7.0]],
            ]);
            BisexualModel::new(f, m)
        }
        // The 0/1 tensors factoring x2 as x2*(y1+y2) and x1 as x1*(y1+y2),
        // so that x' = (x1 y1, x1 y2 + x2) and y' = (x2 y2, x1 + x2 y1).
        "example2" => {
            let f = arr3(&[[[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [0.0, 1.0]]]);
            let m = arr3(&[[[0.0, 1.0], [0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]]]);
            BisexualModel::new(f, m)
        }
        // x' = (x2/2, x1 + x2/2) and y' = (y2/2, y1 + y2/2).
        "example3" => {
            let f = arr3(&[[[0.0, 1.0], [0.0, 1.0]], [[0.5, 0.5], [0.5, 0.5]]]);
            let m = arr3(&[[[0.0, 1.0], [0.5, 0.5]], [[0.0, 1.0], [0.5, 0.5]]]);
            BisexualModel::new(f, m)
        }
        other => match other.strip_prefix("uniform:") {
            Some(dims) => {
                let parsed = dims.split_once(',').and_then(|(a, b)| {
                    Some((
                        a.trim().parse::<usize>().ok()?,
                        b.trim().parse::<usize>().ok()?,
                    ))
                });
                match parsed {
                    Some((n, nu)) if n >= 1 && nu >= 1 => uniform_model(n, nu),
                    _ => Err(QsoError::UnknownBuiltin(other.to_string())),
                }
            }
            None => Err(QsoError::UnknownBuiltin(other.to_string())),
        },
    }
}

/// The constant operator: every row uniform, every state maps to the
/// barycenter.
pub fn uniform_model(n: usize, nu: usize) -> Result<BisexualModel> {
    BisexualModel::new(
        Array3::from_elem((n, nu, n), 1.0 / n as f64),
        Array3::from_elem((n, nu, nu), 1.0 / nu as f64),
    )
}

const BUILTIN_NAMES: [&str; 3] = ["example1", "example2", "example3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    JsonLines,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "qso",
    version,
    about = "Quadratic evolution operators of bisexual populations: \
             contraction analysis, trajectories, fixed points"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ModelSource {
    /// Path to a model file.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Builtin model: example1, example2, example3, or uniform:N,NU.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
}

#[derive(Debug, Args)]
struct OutputOpts {
    /// Output format.
    #[arg(long, value_enum, default_value = "table")]
    format: OutputFormat,
    /// Write output to a file instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a model, reporting its dimensions.
    Validate {
        #[command(flatten)]
        source: ModelSource,
    },
    /// Compute the full contraction report.
    Analyze {
        #[command(flatten)]
        source: ModelSource,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Iterate the operator and stream the trajectory.
    Simulate {
        #[command(flatten)]
        source: ModelSource,
        /// Initial state, e.g. `0.5,0.5:0.5,0.5` (`:` separates female/male).
        #[arg(long, value_name = "STATE")]
        state: String,
        /// Number of steps to iterate.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Classify a trajectory as converged, periodic, or undecided.
    Classify {
        #[command(flatten)]
        source: ModelSource,
        /// Initial state, e.g. `0.5,0.5:0.5,0.5`.
        #[arg(long, value_name = "STATE")]
        state: String,
        /// Iteration budget.
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        steps: usize,
        /// Distance tolerance for convergence and period detection.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Largest period to scan for.
        #[arg(long = "max-period", default_value_t = DEFAULT_MAX_PERIOD)]
        max_period: usize,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Search for fixed points from random starts.
    FixedPoints {
        #[command(flatten)]
        source: ModelSource,
        /// Number of random starts.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Iteration budget per start.
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        steps: usize,
        /// Distance tolerance.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// RNG seed; defaults to QSO_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Estimate the Lipschitz constant by pair sampling and print it
    /// next to the zeta upper bound.
    Lipschitz {
        #[command(flatten)]
        source: ModelSource,
        /// Number of sampled pairs.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// RNG seed; defaults to QSO_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = library default). Results do not depend
        /// on this.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// List the bundled models, or write them out as model files.
    Examples {
        /// Directory to write example1.qso, example2.qso, example3.qso into.
        #[arg(long, value_name = "DIR")]
        output: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Domain(QsoError),
}

impl From<QsoError> for CliError {
    fn from(e: QsoError) -> Self {
        match e {
            QsoError::UnknownBuiltin(_) => CliError::Usage(e.to_string()),
            other => CliError::Domain(other),
        }
    }
}

/// Parse arguments and run. Returns the process exit code; output goes
/// to `out`, diagnostics to standard error.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: &Command, out: &mut dyn Write) -> std::result::Result<(), CliError> {
    match command {
        Command::Validate { source } => {
            let model = source.load()?;
            emit(
                out,
                None,
                &format!("ok: n={} nu={}\n", model.n(), model.nu()),
            )
        }
        Command::Analyze { source, out: opts } => {
            let model = source.load()?;
            let report = analyze(&model);
            emit(
                out,
                opts.output.as_deref(),
                &render_report(&report, opts.format),
            )
        }
        Command::Simulate {
            source,
            state,
            steps,
            out: opts,
        } => {
            let model = source.load()?;
            let z0 = parse_state_literal(state, &model)?;
            let traj = trajectory(&model, &z0, *steps).map_err(CliError::Domain)?;
            emit(
                out,
                opts.output.as_deref(),
                &render_trajectory(traj.points(), opts.format),
            )
        }
        Command::Classify {
            source,
            state,
            steps,
            tol,
            max_period,
            out: opts,
        } => {
            if *steps < 1 || tol.is_nan() || *tol <= 0.0 || *max_period < 1 {
                return Err(CliError::Usage(
                    "need --steps >= 1, --tol > 0 and --max-period >= 1".into(),
                ));
            }
            let model = source.load()?;
            let z0 = parse_state_literal(state, &model)?;
            let outcome =
                classify(&model, &z0, *steps, *tol, *max_period).map_err(CliError::Domain)?;
            emit(
                out,
                opts.output.as_deref(),
                &render_classification(&outcome.verdict, *tol, *steps, *max_period, opts.format),
            )
        }
        Command::FixedPoints {
            source,
            samples,
            steps,
            tol,
            seed,
            out: opts,
        } => {
            let model = source.load()?;
            if *samples < 1 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            let seed = resolve_seed(*seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let starts: Vec<PopulationState> = (0..*samples)
                .map(|_| sample_state(model.n(), model.nu(), &mut rng))
                .collect();
            let points =
                find_fixed_points(&model, &starts, *steps, *tol).map_err(CliError::Domain)?;
            emit(
                out,
                opts.output.as_deref(),
                &render_fixed_points(&points, opts.format),
            )
        }
        Command::Lipschitz {
            source,
            samples,
            seed,
            threads,
            out: opts,
        } => {
            if *samples < 1 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            let model = source.load()?;
            let seed = resolve_seed(*seed)?;
            let run = || -> Result<_> {
                let est = empirical_lipschitz(&model, *samples, seed)?;
                Ok(est)
            };
            let est = if *threads > 0 {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(*threads)
                    .build()
                    .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
                pool.install(run)
            } else {
                run()
            }
            .map_err(CliError::Domain)?;
            let upper = zeta(&model).value;
            emit(
                out,
                opts.output.as_deref(),
                &render_lipschitz(
                    est.lower_bound,
                    upper,
                    &est.witness,
                    est.samples,
                    est.seed,
                    opts.format,
                ),
            )
        }
        Command::Examples { output } => match output {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| CliError::Domain(e.into()))?;
                let mut text = String::new();
                for name in BUILTIN_NAMES {
                    let path = dir.join(format!("{name}.qso"));
                    let model = builtin_model(name)?;
                    fs::write(&path, serialize_model(&model))
                        .map_err(|e| CliError::Domain(e.into()))?;
                    text.push_str(&format!("wrote {}\n", path.display()));
                }
                emit(out, None, &text)
            }
            None => {
                let mut text = String::new();
                text.push_str("example1      2x2  strict contraction, unique fixed point\n");
                text.push_str("example2      2x2  period-2 orbits on the boundary\n");
                text.push_str(
                    "example3      2x2  converges although the scatter bound exceeds 1\n",
                );
                text.push_str("uniform:N,NU  NxNU constant operator\n");
                emit(out, None, &text)
            }
        },
    }
}

impl ModelSource {
    fn load(&self) -> std::result::Result<BisexualModel, CliError> {
        if let Some(path) = &self.model {
            let text = fs::read_to_string(path).map_err(|e| CliError::Domain(e.into()))?;
            return parse_model(&text).map_err(CliError::Domain);
        }
        if let Some(name) = &self.builtin {
            return builtin_model(name).map_err(CliError::from);
        }
        // clap's group(required) prevents this.
        Err(CliError::Usage(
            "pass --model <PATH> or --builtin <NAME>".into(),
        ))
    }
}

fn resolve_seed(flag: Option<u64>) -> std::result::Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("QSO_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "QSO_SEED must be an unsigned integer, got `{text}`"
            ))
        }),
        Err(_) => Ok(0),
    }
}

fn parse_state_literal(
    literal: &str,
    model: &BisexualModel,
) -> std::result::Result<PopulationState, CliError> {
    let Some((xs, ys)) = literal.split_once(':') else {
        return Err(CliError::Usage(format!(
            "state literal must be `x1,..,xn:y1,..,ynu`, got `{literal}`"
        )));
    };
    let parse_part = |part: &str| -> std::result::Result<Vec<f64>, CliError> {
        part.split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    CliError::Usage(format!("invalid number `{tok}` in state literal"))
                })
            })
            .collect()
    };
    let x = parse_part(xs)?;
    let y = parse_part(ys)?;
    if x.len() != model.n() || y.len() != model.nu() {
        return Err(CliError::Domain(QsoError::DimensionMismatch {
            model_n: model.n(),
            model_nu: model.nu(),
            state_n: x.len(),
            state_nu: y.len(),
        }));
    }
    PopulationState::from_slices(&x, &y).map_err(CliError::Domain)
}

fn emit(
    out: &mut dyn Write,
    path: Option<&std::path::Path>,
    text: &str,
) -> std::result::Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Domain(e.into())),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Domain(e.into())),
    }
}

// ---------------------------------------------------------------------
// rendering

/// Human tables print 6 decimals; machine formats use shortest
/// round-trip formatting so values re-read exactly.
fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

fn opt6(v: Option<f64>) -> String {
    v.map(fmt6).unwrap_or_else(|| "undefined".into())
}

fn opt_json(v: Option<f64>) -> Value {
    match v {
        Some(x) => json!(x),
        None => json!("undefined"),
    }
}

fn opt_csv(v: Option<f64>) -> String {
    v.map(|x| x.to_string())
        .unwrap_or_else(|| "undefined".into())
}

fn term_json(term: &ZetaTerm) -> Value {
    json!({
        "value": term.value,
        "argmax": term.argmax.map(|(a, b, c)| json!([a, b, c])).unwrap_or(Value::Null),
    })
}

fn argmax_str(term: &ZetaTerm, labels: (&str, &str, &str)) -> String {
    match term.argmax {
        Some((a, b, c)) => format!("{}={a} {}={b} {}={c}", labels.0, labels.1, labels.2),
        None => "-".into(),
    }
}

fn state_tuple(z: &PopulationState) -> String {
    let xs: Vec<String> = z.x().iter().map(|v| fmt6(*v)).collect();
    let ys: Vec<String> = z.y().iter().map(|v| fmt6(*v)).collect();
    format!("({} : {})", xs.join(", "), ys.join(", "))
}

fn state_json(z: &PopulationState) -> Value {
    json!({ "x": z.x().to_vec(), "y": z.y().to_vec() })
}

/// Render a contraction report. Every field appears in every format.
pub fn render_report(report: &ContractionReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => {
            let mut s = String::new();
            s.push_str(&format!(
                "zeta                        {}\n",
                fmt6(report.zeta)
            ));
            s.push_str(&format!(
                "  female term               {}  argmax {}\n",
                fmt6(report.female_term.value),
                argmax_str(&report.female_term, ("i1", "i2", "j")),
            ));
            s.push_str(&format!(
                "  male term                 {}  argmax {}\n",
                fmt6(report.male_term.value),
                argmax_str(&report.male_term, ("j1", "j2", "i")),
            ));
            s.push_str(&format!(
                "strict contraction (zeta<1) {}\n",
                if report.strict_by_zeta { "yes" } else { "no" }
            ));
            s.push_str(&format!(
                "mu_f                        {}\n",
                opt6(report.mu_f)
            ));
            s.push_str(&format!(
                "mu_m                        {}\n",
                opt6(report.mu_m)
            ));
            s.push_str(&format!(
                "mu sum bound                {}\n",
                opt6(report.mu_sum_bound)
            ));
            s.push_str(&format!(
                "mu product criterion        {}\n",
                report.mu_product_criterion
            ));
            s.push_str(&format!(
                "mu max bound                {}\n",
                opt6(report.mu_max_bound)
            ));
            s.push_str(&format!(
                "mu max criterion (mu<9/7)   {}\n",
                report.mu_max_criterion
            ));
            s
        }
        OutputFormat::JsonLines => {
            let value = json!({
                "zeta": report.zeta,
                "zeta_term_female": term_json(&report.female_term),
                "zeta_term_male": term_json(&report.male_term),
                "mu_f": opt_json(report.mu_f),
                "mu_m": opt_json(report.mu_m),
                "mu_sum_bound": opt_json(report.mu_sum_bound),
                "mu_product_criterion": report.mu_product_criterion.to_string(),
                "mu_max_bound": opt_json(report.mu_max_bound),
                "mu_max_criterion": report.mu_max_criterion.to_string(),
                "strict_by_zeta": report.strict_by_zeta,
            });
            format!("{value}\n")
        }
        OutputFormat::Csv => {
            let argmax_cell = |term: &ZetaTerm| match term.argmax {
                Some((a, b, c)) => format!("\"({a},{b},{c})\""),
                None => "-".into(),
            };
            let mut s = String::from("field,value\n");
            s.push_str(&format!("zeta,{}\n", report.zeta));
            s.push_str(&format!("zeta_term_female,{}\n", report.female_term.value));
            s.push_str(&format!(
                "zeta_argmax_female,{}\n",
                argmax_cell(&report.female_term)
            ));
            s.push_str(&format!("zeta_term_male,{}\n", report.male_term.value));
            s.push_str(&format!(
                "zeta_argmax_male,{}\n",
                argmax_cell(&report.male_term)
            ));
            s.push_str(&format!("mu_f,{}\n", opt_csv(report.mu_f)));
            s.push_str(&format!("mu_m,{}\n", opt_csv(report.mu_m)));
            s.push_str(&format!("mu_sum_bound,{}\n", opt_csv(report.mu_sum_bound)));
            s.push_str(&format!(
                "mu_product_criterion,{}\n",
                report.mu_product_criterion
            ));
            s.push_str(&format!("mu_max_bound,{}\n", opt_csv(report.mu_max_bound)));
            s.push_str(&format!("mu_max_criterion,{}\n", report.mu_max_criterion));
            s.push_str(&format!("strict_by_zeta,{}\n", report.strict_by_zeta));
            s
        }
    }
}

fn render_trajectory(points: &[PopulationState], format: OutputFormat) -> String {
    let (n, nu) = (points[0].n(), points[0].nu());
    match format {
        OutputFormat::Table => {
            let mut s = String::from("t");
            for k in 1..=n {
                s.push_str(&format!(" {:>10}", format!("x{k}")));
            }
            for l in 1..=nu {
                s.push_str(&format!(" {:>10}", format!("y{l}")));
            }
            s.push('\n');
            for (t, z) in points.iter().enumerate() {
                s.push_str(&t.to_string());
                for v in z.x().iter().chain(z.y().iter()) {
                    s.push_str(&format!(" {:>10}", fmt6(*v)));
                }
                s.push('\n');
            }
            s
        }
        OutputFormat::JsonLines => {
            let mut s = String::new();
            for (t, z) in points.iter().enumerate() {
                let value = json!({ "t": t, "x": z.x().to_vec(), "y": z.y().to_vec() });
                s.push_str(&format!("{value}\n"));
            }
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from("t");
            for k in 1..=n {
                s.push_str(&format!(",x{k}"));
            }
            for l in 1..=nu {
                s.push_str(&format!(",y{l}"));
            }
            s.push('\n');
            for (t, z) in points.iter().enumerate() {
                s.push_str(&t.to_string());
                for v in z.x().iter().chain(z.y().iter()) {
                    s.push_str(&format!(",{v}"));
                }
                s.push('\n');
            }
            s
        }
    }
}

fn render_classification(
    verdict: &Verdict,
    tol: f64,
    max_steps: usize,
    max_period: usize,
    format: OutputFormat,
) -> String {
    match format {
        OutputFormat::Table => match verdict {
            Verdict::Converged { limit, steps } => {
                format!("converged {} steps={steps}\n", state_tuple(limit))
            }
            Verdict::Periodic { period, cycle } => {
                let mut s = format!("periodic period={period}\n");
                for (idx, z) in cycle.iter().enumerate() {
                    s.push_str(&format!("  cycle[{idx}] = {}\n", state_tuple(z)));
                }
                s
            }
            Verdict::Undecided { last } => {
                format!(
                    "undecided after {max_steps} steps, last = {}\n",
                    state_tuple(last)
                )
            }
        },
        OutputFormat::JsonLines => {
            let value = match verdict {
                Verdict::Converged { limit, steps } => json!({
                    "verdict": "converged",
                    "limit": state_json(limit),
                    "steps": steps,
                    "tol": tol, "max_steps": max_steps, "max_period": max_period,
                }),
                Verdict::Periodic { period, cycle } => json!({
                    "verdict": "periodic",
                    "period": period,
                    "cycle": cycle.iter().map(state_json).collect::<Vec<_>>(),
                    "tol": tol, "max_steps": max_steps, "max_period": max_period,
                }),
                Verdict::Undecided { last } => json!({
                    "verdict": "undecided",
                    "last": state_json(last),
                    "tol": tol, "max_steps": max_steps, "max_period": max_period,
                }),
            };
            format!("{value}\n")
        }
        OutputFormat::Csv => {
            let mut s = String::from("field,value\n");
            match verdict {
                Verdict::Converged { limit, steps } => {
                    s.push_str("verdict,converged\n");
                    s.push_str(&format!("steps,{steps}\n"));
                    s.push_str(&format!("limit,\"{}\"\n", coord_list(limit)));
                }
                Verdict::Periodic { period, cycle } => {
                    s.push_str("verdict,periodic\n");
                    s.push_str(&format!("period,{period}\n"));
                    for (idx, z) in cycle.iter().enumerate() {
                        s.push_str(&format!("cycle{idx},\"{}\"\n", coord_list(z)));
                    }
                }
                Verdict::Undecided { last } => {
                    s.push_str("verdict,undecided\n");
                    s.push_str(&format!("last,\"{}\"\n", coord_list(last)));
                }
            }
            s.push_str(&format!(
                "tol,{tol}\nmax_steps,{max_steps}\nmax_period,{max_period}\n"
            ));
            s
        }
    }
}

fn coord_list(z: &PopulationState) -> String {
    z.coords()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn render_fixed_points(points: &[PopulationState], format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => {
            let mut s = format!("found {} fixed point(s)\n", points.len());
            for z in points {
                s.push_str(&format!("  {}\n", state_tuple(z)));
            }
            s
        }
        OutputFormat::JsonLines => {
            let mut s = String::new();
            for (idx, z) in points.iter().enumerate() {
                let value = json!({ "index": idx, "x": z.x().to_vec(), "y": z.y().to_vec() });
                s.push_str(&format!("{value}\n"));
            }
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from("index,coordinates\n");
            for (idx, z) in points.iter().enumerate() {
                s.push_str(&format!("{idx},\"{}\"\n", coord_list(z)));
            }
            s
        }
    }
}

fn render_lipschitz(
    lower: f64,
    zeta_upper: f64,
    witness: &(PopulationState, PopulationState),
    samples: usize,
    seed: u64,
    format: OutputFormat,
) -> String {
    match format {
        OutputFormat::Table => {
            let mut s = String::new();
            s.push_str(&format!(
                "empirical lower bound  {}   zeta upper bound  {}\n",
                fmt6(lower),
                fmt6(zeta_upper)
            ));
            s.push_str(&format!("samples                {samples}\n"));
            s.push_str(&format!("seed                   {seed}\n"));
            s.push_str(&format!(
                "witness z              {}\n",
                state_tuple(&witness.0)
            ));
            s.push_str(&format!(
                "witness t              {}\n",
                state_tuple(&witness.1)
            ));
            s
        }
        OutputFormat::JsonLines => {
            let value = json!({
                "lower_bound": lower,
                "zeta_upper_bound": zeta_upper,
                "samples": samples,
                "seed": seed,
                "witness_z": state_json(&witness.0),
                "witness_t": state_json(&witness.1),
            });
            format!("{value}\n")
        }
        OutputFormat::Csv => {
            let mut s = String::from("field,value\n");
            s.push_str(&format!("lower_bound,{lower}\n"));
            s.push_str(&format!("zeta_upper_bound,{zeta_upper}\n"));
            s.push_str(&format!("samples,{samples}\n"));
            s.push_str(&format!("seed,{seed}\n"));
            s.push_str(&format!("witness_z,\"{}\"\n", coord_list(&witness.0)));
            s.push_str(&format!("witness_t,\"{}\"\n", coord_list(&witness.1)));
            s
        }
    }
}
