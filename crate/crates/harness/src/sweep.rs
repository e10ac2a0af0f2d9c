//! Seeded sweeps over dimensions and filters with quantile intervals.

use std::fmt::Write as _;

use rayon::prelude::*;
use varfilt_core::filters::{FilterKind, HinfConfig};
use varfilt_core::model::{generate, mix_seed, ProblemConfig};

use crate::error::{HarnessError, Result};
use crate::metrics::run_filter;

/// Lower and upper quantile levels of the reported 93% interval.
pub const INTERVAL: (f64, f64) = (0.035, 0.965);

pub const CSV_HEADER: &str = "dim,filter,problems,steps,seed,mse_mean,mse_lo,mse_hi,wcse_mean,wcse_lo,wcse_hi";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub problems: usize,
    pub steps: usize,
    pub kinds: Vec<FilterKind>,
    pub master_seed: u64,
    pub hinf: HinfConfig<f64>,
    /// Worker threads; `None` or `Some(0)` uses the rayon default.
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn new(dims: Vec<usize>, problems: usize, steps: usize, kinds: Vec<FilterKind>, master_seed: u64) -> Self {
        Self { dims, problems, steps, kinds, master_seed, hinf: HinfConfig::default(), threads: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub dim: usize,
    pub filter: FilterKind,
    pub problems: usize,
    pub steps: usize,
    pub seed: u64,
    pub mse_mean: f64,
    pub mse_lo: f64,
    pub mse_hi: f64,
    pub wcse_mean: f64,
    pub wcse_lo: f64,
    pub wcse_hi: f64,
}

/// Seed of problem `problem` at dimension `dim`; shared by every filter.
pub fn problem_seed(master_seed: u64, dim: usize, problem: usize) -> u64 {
    mix_seed(mix_seed(master_seed, dim as u64), problem as u64)
}

/// Linear-interpolation empirical quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean and 93% interval; the interval is widened to contain the mean when a
/// single outlier pulls the mean past the outer quantile.
pub fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = quantile(&sorted, INTERVAL.0).min(mean);
    let hi = quantile(&sorted, INTERVAL.1).max(mean);
    (mean, lo, hi)
}

struct CellResult {
    mse: f64,
    wcse: f64,
}

pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    if cfg.dims.is_empty() || cfg.kinds.is_empty() || cfg.problems == 0 {
        return Err(
            varfilt_core::Error::InvalidArgument("sweep needs dims, filters, and at least one problem".into()).into()
        );
    }
    cfg.hinf.validate()?;
    let mut dims = cfg.dims.clone();
    dims.sort_unstable();
    dims.dedup();
    let mut kinds = cfg.kinds.clone();
    kinds.sort_unstable();
    kinds.dedup();

    let cells: Vec<(usize, FilterKind, usize)> =
        dims.iter().flat_map(|&d| kinds.iter().flat_map(move |&k| (0..cfg.problems).map(move |p| (d, k, p)))).collect();

    let run_cell = |&(dim, kind, problem): &(usize, FilterKind, usize)| -> Result<CellResult> {
        let wrap = |e: HarnessError| HarnessError::Cell { dim, kind, problem, source: Box::new(e) };
        let pcfg = ProblemConfig::new(dim, problem_seed(cfg.master_seed, dim, problem)).horizon(cfg.steps);
        let (spec, truth) = generate(&pcfg).map_err(|e| wrap(e.into()))?;
        let m = run_filter(&spec, &truth, kind, &cfg.hinf).map_err(wrap)?;
        Ok(CellResult { mse: m.final_mse, wcse: m.final_wcse })
    };

    let results: Vec<Result<CellResult>> = match cfg.threads {
        Some(t) if t > 0 => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build()?;
            pool.install(|| cells.par_iter().map(run_cell).collect())
        }
        _ => cells.par_iter().map(run_cell).collect(),
    };
    let results: Vec<CellResult> = results.into_iter().collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(dims.len() * kinds.len());
    for (chunk, (&dim, &kind)) in
        results.chunks(cfg.problems).zip(dims.iter().flat_map(|d| kinds.iter().map(move |k| (d, k))))
    {
        let mses: Vec<f64> = chunk.iter().map(|c| c.mse).collect();
        let wcses: Vec<f64> = chunk.iter().map(|c| c.wcse).collect();
        let (mse_mean, mse_lo, mse_hi) = summarize(&mses);
        let (wcse_mean, wcse_lo, wcse_hi) = summarize(&wcses);
        out.push(SweepRecord {
            dim,
            filter: kind,
            problems: cfg.problems,
            steps: cfg.steps,
            seed: cfg.master_seed,
            mse_mean,
            mse_lo,
            mse_hi,
            wcse_mean,
            wcse_lo,
            wcse_hi,
        });
    }
    Ok(out)
}

/// CSV text with 17 significant digits per float.
pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.dim,
            r.filter,
            r.problems,
            r.steps,
            r.seed,
            r.mse_mean,
            r.mse_lo,
            r.mse_hi,
            r.wcse_mean,
            r.wcse_lo,
            r.wcse_hi
        );
    }
    s
}

/// Inverse of [`to_csv`].
pub fn parse_csv(text: &str) -> std::result::Result<Vec<SweepRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 11 {
                return Err(format!("expected 11 fields, got {}: {line}", f.len()));
            }
            let num = |i: usize| f[i].parse::<f64>().map_err(|e| format!("field {i}: {e}"));
            let int = |i: usize| f[i].parse::<u64>().map_err(|e| format!("field {i}: {e}"));
            Ok(SweepRecord {
                dim: int(0)? as usize,
                filter: f[1].parse().map_err(|e| format!("{e}"))?,
                problems: int(2)? as usize,
                steps: int(3)? as usize,
                seed: int(4)?,
                mse_mean: num(5)?,
                mse_lo: num(6)?,
                mse_hi: num(7)?,
                wcse_mean: num(8)?,
                wcse_lo: num(9)?,
                wcse_hi: num(10)?,
            })
        })
        .collect()
}
