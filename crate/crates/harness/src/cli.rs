//! Command-line front end: `sweep`, `trace` and `ellipse`.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use varfilt_core::filters::{CorrectionForm, FilterKind, HinfConfig};
use varfilt_core::model::{generate, ProblemConfig};

use crate::ellipse::ellipse_experiment;
use crate::error::HarnessError;
use crate::metrics::run_filter;
use crate::svg::{ellipse_svg, sweep_svg_pair};
use crate::sweep::{sweep, to_csv, SweepConfig};

pub const THREADS_ENV: &str = "VARFILT_THREADS";

/// Exit code for usage errors and unwritable outputs.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for failures during a run.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "varfilt", version, about = "Variational and robust filtering experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seeded sweep over dimensions and filters, written as CSV.
    Sweep(SweepArgs),
    /// Per-step error series of a single run.
    Trace(TraceArgs),
    /// Confidence ellipses of a 2-D posterior and its projections.
    Ellipse(EllipseArgs),
}

#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<List<T>, String>
where
    T::Err: std::fmt::Display,
{
    let items = s
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(List(items))
}

fn parse_dims(s: &str) -> std::result::Result<List<usize>, String> {
    let dims = parse_list::<usize>(s)?;
    if dims.0.contains(&0) {
        return Err("dimensions must be positive".into());
    }
    Ok(dims)
}

fn parse_filters(s: &str) -> std::result::Result<List<FilterKind>, String> {
    parse_list(s)
}

fn parse_correction(s: &str) -> std::result::Result<CorrectionForm, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, Args)]
pub struct HinfArgs {
    /// Correction applied to the next prior by the robust filters.
    #[arg(long = "corr-x", value_name = "literal|next|inflate", value_parser = parse_correction, default_value = "inflate")]
    pub correction: CorrectionForm,
    /// Keep the corrected covariance in low-rank form instead of its diagonal.
    #[arg(long)]
    pub keep_rank: bool,
    /// Margin kept below the feasibility bound of the robustness level.
    #[arg(long, default_value_t = 1e-3)]
    pub gamma_eps: f64,
}

impl HinfArgs {
    fn config(&self) -> HinfConfig<f64> {
        HinfConfig { gamma_eps: self.gamma_eps, correction: self.correction, diagonalize_posterior: !self.keep_rank }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated dimensions.
    #[arg(long, value_parser = parse_dims, default_value = "2,4,8,16,32,64")]
    pub dims: List<usize>,
    #[arg(long, default_value_t = 32)]
    pub problems: usize,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Comma-separated filters among kf, viep, l2, vih, l2h.
    #[arg(long, value_parser = parse_filters, default_value = "kf,viep,l2,vih,l2h")]
    pub filters: List<FilterKind>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional log-log plot of both metrics.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    pub hinf: HinfArgs,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, default_value = "viep")]
    pub filter: FilterKind,
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub hinf: HinfArgs,
}

#[derive(Debug, Args)]
pub struct EllipseArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Observations assimilated before projecting.
    #[arg(long, default_value_t = 3)]
    pub obs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

/// Parses a `VARFILT_THREADS` value; `0` and empty mean the default.
pub fn parse_threads(value: Option<&str>) -> std::result::Result<Option<usize>, String> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(t) => Ok(Some(t)),
            Err(e) => Err(format!("{THREADS_ENV}=`{v}`: {e}")),
        },
    }
}

enum Failure {
    Usage(String),
    Run(HarnessError),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Run(e)
    }
}

impl From<varfilt_core::Error> for Failure {
    fn from(e: varfilt_core::Error) -> Self {
        Failure::Run(e.into())
    }
}

/// Destination opened before any work so unwritable paths fail fast.
enum Sink {
    File(PathBuf, File),
    Stdout,
}

impl Sink {
    fn open(path: Option<&Path>) -> std::result::Result<Sink, Failure> {
        match path {
            None => Ok(Sink::Stdout),
            Some(p) => File::create(p)
                .map(|f| Sink::File(p.to_path_buf(), f))
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        }
    }

    fn write(self, text: &str, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
        let (path, res) = match self {
            Sink::File(p, mut f) => {
                let r = f.write_all(text.as_bytes()).and_then(|_| f.flush());
                (p.display().to_string(), r)
            }
            Sink::Stdout => ("<stdout>".to_string(), stdout.write_all(text.as_bytes())),
        };
        res.map_err(|source| Failure::Run(HarnessError::Io { path, source }))
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, S>(args: I, threads_env: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, threads_env, stdout) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}

fn dispatch(cli: Cli, threads_env: Option<&str>, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Sweep(a) => {
            let threads = parse_threads(threads_env).map_err(Failure::Usage)?;
            let hinf = a.hinf.config();
            hinf.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let out = Sink::open(a.out.as_deref())?;
            let svg = a.svg.as_deref().map(|p| Sink::open(Some(p))).transpose()?;
            let cfg = SweepConfig {
                dims: a.dims.0,
                problems: a.problems,
                steps: a.steps,
                kinds: a.filters.0,
                master_seed: a.seed,
                hinf,
                threads,
            };
            let records = sweep(&cfg)?;
            out.write(&to_csv(&records), stdout)?;
            if let Some(svg) = svg {
                svg.write(&sweep_svg_pair(&records), stdout)?;
            }
        }
        Command::Trace(a) => {
            let hinf = a.hinf.config();
            hinf.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            if a.dim == 0 {
                return Err(Failure::Usage("--dim must be positive".into()));
            }
            let out = Sink::open(a.out.as_deref())?;
            let (spec, truth) = generate::<f64>(&ProblemConfig::new(a.dim, a.seed).horizon(a.steps))?;
            let m = run_filter(&spec, &truth, a.filter, &hinf)?;
            out.write(&trace_csv(&m.per_step_wcse, &m.per_step_mse), stdout)?;
        }
        Command::Ellipse(a) => {
            let out = Sink::open(a.out.as_deref())?;
            let svg = a.svg.as_deref().map(|p| Sink::open(Some(p))).transpose()?;
            let exp = ellipse_experiment(a.seed, a.obs)?;
            out.write(&exp.to_csv(), stdout)?;
            if let Some(svg) = svg {
                svg.write(&ellipse_svg(&exp), stdout)?;
            }
        }
    }
    Ok(())
}

/// `step,wcse,mse` rows with 1-based steps.
pub fn trace_csv(wcse: &[f64], mse: &[f64]) -> String {
    use std::fmt::Write as _;
    let mut s = String::from("step,wcse,mse\n");
    for (t, (w, m)) in wcse.iter().zip(mse).enumerate() {
        let _ = writeln!(s, "{},{w:.16e},{m:.16e}", t + 1);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsing() {
        assert_eq!(parse_dims("2,4, 8").unwrap().0, vec![2, 4, 8]);
        assert!(parse_dims("2,,4").is_err());
        assert!(parse_dims("2,x").is_err());
        assert!(parse_dims("0").is_err());
        assert_eq!(parse_filters("kf,l2h").unwrap().0, vec![FilterKind::KalmanDense, FilterKind::L2Hinf]);
    }

    #[test]
    fn thread_env() {
        assert_eq!(parse_threads(None).unwrap(), None);
        assert_eq!(parse_threads(Some("0")).unwrap(), None);
        assert_eq!(parse_threads(Some("4")).unwrap(), Some(4));
        assert!(parse_threads(Some("four")).is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["varfilt", "sweep", "--bogus"], None, &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run(["varfilt", "sweep", "--dims", "2,a"], None, &mut o, &mut e), EXIT_USAGE);
        assert_eq!(
            run(["varfilt", "sweep", "--dims", "2", "--out", "/nonexistent-dir/x.csv"], None, &mut o, &mut e),
            EXIT_USAGE
        );
        assert!(!e.is_empty());
    }
}
