use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mgtheta::theta::{gls_theta_with, moment_theta_with, theta_tolerances};
use mgtheta::hierarchy::{label_consistency_check, mtheta_bound, BoundOptions, BoundReport, LevelFamily};
use mgtheta::verify::{parse_suite, run_suite, suite, VerifyOutcome};
use mgtheta::{
    alpha, build_multigraph, build_sequences, build_skeleton, instances, parse_expression, ExclusivityMultigraph,
    LevelSpec, NormalizationMode, Tolerances,
};

const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] mgtheta::Error),
    #[error("{failed} of {total} entries failed")]
    Verification { failed: usize, total: usize },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(mgtheta::Error::Solver(_)) => EXIT_SOLVER,
            CliError::Verification { .. } => EXIT_VERIFY,
            _ => EXIT_INPUT,
        }
    }
}

#[derive(Parser)]
#[command(name = "mgtheta", version, about = "Classical, Lovász and multigraph-Lovász bounds for Bell-type expressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, Default, PartialEq)]
enum Format {
    Json,
    #[default]
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sub,
    Strict,
}

impl From<Mode> for NormalizationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Sub => NormalizationMode::Subnormalized,
            Mode::Strict => NormalizationMode::Strict,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    Alpha,
    Theta,
    Mtheta,
}

#[derive(clap::Args)]
struct LevelArgs {
    /// Hierarchy level: 1, 1.x, 1+AB, or an integer k >= 2.
    #[arg(long, default_value = "1+AB")]
    level: String,
    /// Subset size for level 1.x (also accepted as --level 1.N).
    #[arg(long)]
    x: Option<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Sub)]
    mode: Mode,
    /// Use one subset for both parties at level 1.x.
    #[arg(long)]
    equal_subsets: bool,
}

impl LevelArgs {
    fn options(&self) -> Result<BoundOptions, CliError> {
        let (level, x) = match self.level.strip_prefix("1.") {
            Some(rest) if rest != "x" && rest != "X" => {
                let x: usize = rest
                    .parse()
                    .map_err(|_| CliError::Input(format!("bad level {:?}", self.level)))?;
                if self.x.is_some_and(|y| y != x) {
                    return Err(CliError::Input("--x disagrees with --level".into()));
                }
                (LevelFamily::OneX, x)
            }
            _ => {
                let level: LevelFamily = self.level.parse()?;
                if level == LevelFamily::OneX && self.x.is_none() {
                    return Err(CliError::Input("level 1.x needs --x".into()));
                }
                (level, self.x.unwrap_or(0))
            }
        };
        Ok(BoundOptions {
            level,
            x,
            trials: self.trials,
            seed: self.seed,
            mode: self.mode.into(),
            equal_subsets: self.equal_subsets,
            ..BoundOptions::default()
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the bundled instances.
    Instances,
    /// Build the exclusivity multigraph of an expression file or bundled instance.
    Ingest {
        input: String,
        /// Write the multigraph document here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compute alpha, theta of the flattened graph, or the hierarchy bound.
    Bounds {
        #[arg(value_enum)]
        quantity: Quantity,
        /// Multigraph document, expression file, or bundled instance name.
        input: String,
        #[command(flatten)]
        level: LevelArgs,
        /// Interior-point iteration budget per solve.
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the moment-matrix skeleton at a deterministic level.
    Skeleton {
        input: String,
        #[arg(long, default_value = "1")]
        level: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute a reference suite (`quick`, `table5`) or a suite file.
    Verify {
        suite: Option<String>,
        #[arg(long, conflicts_with = "suite")]
        suite_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Scalar result of `bounds alpha` and `bounds theta`.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct ScalarReport {
    instance: String,
    quantity: String,
    value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<usize>>,
    /// Second-formulation value, for theta.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cross_check: Option<f64>,
    tool_version: String,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn instance_id(input: &str) -> String {
    Path::new(input)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(input)
        .to_string()
}

fn parse_input_text(text: &str) -> Result<ExclusivityMultigraph, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
    if value.get("terms").is_some() {
        Ok(build_multigraph(&parse_expression(text)?).0)
    } else {
        Ok(ExclusivityMultigraph::from_json(text)?)
    }
}

/// A path to a multigraph or expression document, or a bundled instance name.
fn load(input: &str) -> Result<ExclusivityMultigraph, CliError> {
    let path = Path::new(input);
    if path.exists() {
        return parse_input_text(&read(path)?);
    }
    match instances::source(input) {
        Some(_) => Ok(instances::multigraph(input)?),
        None => Err(CliError::Input(format!(
            "{input:?} is neither a readable file nor a bundled instance ({})",
            instances::NAMES.join(", ")
        ))),
    }
}

fn cmd_ingest(input: &str, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let path = Path::new(input);
    let expr = if path.exists() {
        parse_expression(&read(path)?)?
    } else if instances::source(input).is_some() {
        instances::expression(input)?
    } else {
        return Err(CliError::Input(format!("cannot read {input:?}")));
    };
    let (mg, table) = build_multigraph(&expr);
    match (format, out) {
        (Format::Json, None) => emit(None, &mg.to_json()),
        (Format::Json, Some(p)) => emit(Some(p), &mg.to_json()),
        (Format::Text, p) => {
            if let Some(p) = p {
                emit(Some(p), &mg.to_json())?;
            }
            let edges: Vec<String> = mg
                .parties()
                .iter()
                .zip(mg.factors())
                .map(|(party, f)| format!("{party}: {} edges", f.edges().len()))
                .collect();
            emit(
                None,
                &format!("{}{} vertices; {}\n", table.render(), mg.vertex_count(), edges.join(", ")),
            )
        }
    }
}

fn render_report(r: &BoundReport, mg: &ExclusivityMultigraph) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<14}{v}\n"));
    line("instance", r.instance.clone());
    line("level", r.level.clone());
    line("mode", r.mode.name().into());
    line("seed", r.seed.to_string());
    line("bound", format!("{:.7}", r.bound));
    line("alpha", format!("{}", r.alpha));
    line("theta", format!("{:.7}", r.theta_flatten));
    if r.per_trial.len() > 1 {
        line("mean", format!("{:.7}", r.mean));
        line("median", format!("{:.7}", r.median));
    }
    for (i, t) in r.per_trial.iter().enumerate() {
        let v = t.value.map_or("-".to_string(), |v| format!("{v:.7}"));
        line(
            &format!("trial {}", i + 1),
            format!(
                "{:<10} {v}  size {}  iters {}  {} ms",
                t.status.name(),
                t.diagnostics.matrix_size,
                t.diagnostics.iterations,
                t.wall_ms
            ),
        );
    }
    let diags = label_consistency_check(r, mg);
    let flagged = diags.iter().filter(|d| d.flagged).count();
    line("labels", format!("{} pairs compared, {flagged} above tolerance", diags.len()));
    s
}

fn cmd_bounds(
    quantity: Quantity,
    input: &str,
    level: &LevelArgs,
    max_iterations: Option<usize>,
    out: Option<&Path>,
    format: Format,
) -> Result<(), CliError> {
    let mg = load(input)?;
    let budget = |mut t: Tolerances| {
        if let Some(k) = max_iterations {
            t.max_iterations = k;
        }
        t
    };
    let id = instance_id(input);
    let scalar = |quantity: &str, value, witness, cross_check| ScalarReport {
        instance: id.clone(),
        quantity: quantity.into(),
        value,
        witness,
        cross_check,
        tool_version: mgtheta::hierarchy::TOOL_VERSION.into(),
    };
    let text = match quantity {
        Quantity::Alpha => {
            let a = alpha(&mg.flatten());
            let r = scalar("alpha", a.value, Some(a.witness.clone()), None);
            match format {
                Format::Json => serde_json::to_string_pretty(&r).expect("serializable"),
                Format::Text => {
                    let w: Vec<String> = a.witness.iter().map(|v| (v + 1).to_string()).collect();
                    format!("alpha {}  witness {{{}}}\n", a.value, w.join(","))
                }
            }
        }
        Quantity::Theta => {
            let flat = mg.flatten();
            let tol = budget(theta_tolerances());
            let m = moment_theta_with(&flat, &tol)?;
            let g = gls_theta_with(&flat, &tol)?;
            let r = scalar("theta", m.value, None, Some(g.value));
            match format {
                Format::Json => serde_json::to_string_pretty(&r).expect("serializable"),
                Format::Text => format!("theta {:.7}  (second formulation {:.7})\n", m.value, g.value),
            }
        }
        Quantity::Mtheta => {
            let mut opts = level.options()?;
            opts.tolerances = budget(opts.tolerances);
            let r = mtheta_bound(&mg, &opts, &id)?;
            match format {
                Format::Json => r.to_json(),
                Format::Text => render_report(&r, &mg),
            }
        }
    };
    emit(out, &text)
}

fn cmd_skeleton(input: &str, level: &str, out: Option<&Path>) -> Result<(), CliError> {
    let mg = load(input)?;
    let spec = match level.parse::<LevelFamily>()? {
        LevelFamily::One => LevelSpec::L1,
        LevelFamily::OnePlusAB => LevelSpec::L1plusAB,
        LevelFamily::K(k) => LevelSpec::Lk(k),
        LevelFamily::OneX => return Err(CliError::Input("skeleton needs a deterministic level".into())),
    };
    let seqs = build_sequences(&mg, &spec).map_err(mgtheta::Error::from)?;
    emit(out, &build_skeleton(&seqs, &mg).dump())
}

fn cmd_verify(id: Option<&str>, file: Option<&Path>, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let entries = match (id, file) {
        (_, Some(f)) => parse_suite(&read(f)?)?,
        (Some(id), None) => suite(id)?,
        (None, None) => return Err(CliError::Input("name a suite or pass --suite-file".into())),
    };
    let live = format == Format::Text && out.is_none();
    let outcomes: Vec<VerifyOutcome> = run_suite(&entries, |o| {
        if live {
            println!("{}", o.line());
        }
    });
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    let summary = format!("{} passed, {failed} failed", outcomes.len() - failed);
    match format {
        Format::Json => emit(out, &serde_json::to_string_pretty(&outcomes).expect("serializable"))?,
        Format::Text if live => println!("{summary}"),
        Format::Text => {
            let lines: Vec<String> = outcomes.iter().map(VerifyOutcome::line).collect();
            emit(out, &format!("{}\n{summary}\n", lines.join("\n")))?;
        }
    }
    if failed > 0 {
        return Err(CliError::Verification {
            failed,
            total: outcomes.len(),
        });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Instances => {
            for name in instances::NAMES {
                let mg = instances::multigraph(name)?;
                println!("{name:<10} {} vertices", mg.vertex_count());
            }
            Ok(())
        }
        Command::Ingest { input, out, format } => cmd_ingest(&input, out.as_deref(), format),
        Command::Bounds {
            quantity,
            input,
            level,
            max_iterations,
            out,
            format,
        } => cmd_bounds(quantity, &input, &level, max_iterations, out.as_deref(), format),
        Command::Skeleton { input, level, out } => cmd_skeleton(&input, &level, out.as_deref()),
        Command::Verify {
            suite,
            suite_file,
            out,
            format,
        } => cmd_verify(suite.as_deref(), suite_file.as_deref(), out.as_deref(), format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mgtheta: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
