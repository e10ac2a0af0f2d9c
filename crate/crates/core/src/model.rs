//! Linear-Gaussian parameter-estimation problems and their seeded observation streams.
//!
//! The measurement model is `y_t = x_tᵀθ + η_t` with a static parameter
//! (identity dynamics, no process noise). Inputs are drawn as
//! `x_t ~ N(x̄, input_var·I)` with `x̄ ~ N(0, I)` per problem, `η_t ~ N(0, R)`,
//! and the true parameter is sampled from the filter prior.
//!
//! Every random quantity comes from a ChaCha stream keyed by the problem seed,
//! a domain tag, and the step index, so [`stream`] is a pure function and
//! observations can be produced in any order.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::Scalar;

pub const DEFAULT_HORIZON: usize = 1000;
pub const DEFAULT_INPUT_VAR: f64 = 0.5;
pub const DEFAULT_MEAS_VAR: f64 = 0.1;
pub const DEFAULT_PRIOR_VAR: f64 = 1.0;

const DOMAIN_SETUP: u64 = 0x0001;
const DOMAIN_INPUT: u64 = 0x0002;
const DOMAIN_NOISE: u64 = 0x0003;

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derived_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, domain));
    rng.set_stream(index);
    rng
}

fn normal<T: Scalar>(rng: &mut ChaCha8Rng) -> T {
    let z: f64 = rng.sample(StandardNormal);
    T::lit(z)
}

/// Parameters for [`generate`]. Construct with [`ProblemConfig::new`] and
/// override defaults with the builder methods.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig<T> {
    pub n: usize,
    pub horizon: usize,
    pub input_var: T,
    pub meas_var: T,
    pub prior_var: T,
    pub seed: u64,
}

impl<T: Scalar> ProblemConfig<T> {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            horizon: DEFAULT_HORIZON,
            input_var: T::lit(DEFAULT_INPUT_VAR),
            meas_var: T::lit(DEFAULT_MEAS_VAR),
            prior_var: T::lit(DEFAULT_PRIOR_VAR),
            seed,
        }
    }

    pub fn horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn input_var(mut self, v: T) -> Self {
        self.input_var = v;
        self
    }

    pub fn meas_var(mut self, v: T) -> Self {
        self.meas_var = v;
        self
    }

    pub fn prior_var(mut self, v: T) -> Self {
        self.prior_var = v;
        self
    }
}

/// One randomized estimation problem. Immutable once generated.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec<T> {
    pub n: usize,
    pub horizon: usize,
    /// Mean of the input distribution.
    pub xbar: Vec<T>,
    pub input_var: T,
    /// Measurement noise variance `R`.
    pub meas_var: T,
    pub prior_mean: Vec<T>,
    pub prior_var: T,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    pub x: Vec<T>,
    pub y: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T> {
    pub theta: Vec<T>,
    /// `η_t` for each step.
    pub noise_draws: Vec<T>,
}

impl<T: Scalar> ProblemSpec<T> {
    /// Observation dimension; only scalar observations are supported.
    pub const M: usize = 1;

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("state dimension must be at least 1".into()));
        }
        if self.xbar.len() != self.n || self.prior_mean.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: if self.xbar.len() != self.n { self.xbar.len() } else { self.prior_mean.len() },
            });
        }
        for (name, v) in [("input_var", self.input_var), ("meas_var", self.meas_var), ("prior_var", self.prior_var)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// `key = value` lines, one per field; vectors are comma separated.
    pub fn to_kv(&self) -> String {
        let join = |v: &[T]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "m = {}", Self::M);
        let _ = writeln!(s, "horizon = {}", self.horizon);
        let _ = writeln!(s, "input_var = {}", self.input_var);
        let _ = writeln!(s, "meas_var = {}", self.meas_var);
        let _ = writeln!(s, "prior_var = {}", self.prior_var);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "xbar = {}", join(&self.xbar));
        let _ = writeln!(s, "prior_mean = {}", join(&self.prior_mean));
        s
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidArgument(msg);
        let mut fields = std::collections::HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| bad(format!("line {}: expected `key = value`", lineno + 1)))?;
            fields.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| fields.get(k).ok_or_else(|| bad(format!("missing key `{k}`")));
        let scalar =
            |k: &str| -> Result<T> { get(k)?.parse::<f64>().map(T::lit).map_err(|e| bad(format!("`{k}`: {e}"))) };
        let count = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|e| bad(format!("`{k}`: {e}"))) };
        let vector = |k: &str| -> Result<Vec<T>> {
            let raw = get(k)?;
            if raw.is_empty() {
                return Ok(Vec::new());
            }
            raw.split(',')
                .map(|p| p.trim().parse::<f64>().map(T::lit).map_err(|e| bad(format!("`{k}`: {e}"))))
                .collect()
        };
        if let Some(m) = fields.get("m") {
            if m != "1" {
                return Err(bad(format!("only m = 1 is supported, got {m}")));
            }
        }
        let spec = Self {
            n: count("n")?,
            horizon: count("horizon")?,
            xbar: vector("xbar")?,
            input_var: scalar("input_var")?,
            meas_var: scalar("meas_var")?,
            prior_mean: vector("prior_mean")?,
            prior_var: scalar("prior_var")?,
            seed: get("seed")?.parse().map_err(|e| bad(format!("`seed`: {e}")))?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Problem with all defaults: horizon 1000, input variance 0.5, `R = 0.1`,
/// prior `N(0, I)`.
pub fn generate_problem<T: Scalar>(n: usize, seed: u64) -> Result<(ProblemSpec<T>, GroundTruth<T>)> {
    generate(&ProblemConfig::new(n, seed))
}

pub fn generate<T: Scalar>(cfg: &ProblemConfig<T>) -> Result<(ProblemSpec<T>, GroundTruth<T>)> {
    if cfg.n == 0 {
        return Err(Error::InvalidArgument("state dimension must be at least 1".into()));
    }
    let mut rng = derived_rng(cfg.seed, DOMAIN_SETUP, 0);
    let xbar: Vec<T> = (0..cfg.n).map(|_| normal(&mut rng)).collect();
    let prior_mean = vec![T::zero(); cfg.n];
    let prior_sd = cfg.prior_var.sqrt();
    let theta: Vec<T> = prior_mean.iter().map(|&m| m + prior_sd * normal::<T>(&mut rng)).collect();

    let spec = ProblemSpec {
        n: cfg.n,
        horizon: cfg.horizon,
        xbar,
        input_var: cfg.input_var,
        meas_var: cfg.meas_var,
        prior_mean,
        prior_var: cfg.prior_var,
        seed: cfg.seed,
    };
    spec.validate()?;

    let noise_sd = cfg.meas_var.sqrt();
    let noise_draws =
        (0..cfg.horizon).map(|t| noise_sd * normal::<T>(&mut derived_rng(cfg.seed, DOMAIN_NOISE, t as u64))).collect();
    Ok((spec, GroundTruth { theta, noise_draws }))
}

/// Observation at step `t`; identical for identical `(spec, truth, t)`.
pub fn stream<T: Scalar>(spec: &ProblemSpec<T>, truth: &GroundTruth<T>, t: usize) -> Result<Observation<T>> {
    if t >= spec.horizon || t >= truth.noise_draws.len() {
        return Err(Error::InvalidArgument(format!(
            "step {t} out of range for horizon {}",
            spec.horizon.min(truth.noise_draws.len())
        )));
    }
    if truth.theta.len() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, actual: truth.theta.len() });
    }
    let mut rng = derived_rng(spec.seed, DOMAIN_INPUT, t as u64);
    let sd = spec.input_var.sqrt();
    let x: Vec<T> = spec.xbar.iter().map(|&m| m + sd * normal::<T>(&mut rng)).collect();
    let y = crate::vector::dot(&x, &truth.theta) + truth.noise_draws[t];
    Ok(Observation { x, y })
}

/// All observations in order.
pub fn observations<'a, T: Scalar>(
    spec: &'a ProblemSpec<T>,
    truth: &'a GroundTruth<T>,
) -> impl Iterator<Item = Result<Observation<T>>> + 'a {
    (0..spec.horizon).map(move |t| stream(spec, truth, t))
}
