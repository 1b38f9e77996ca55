//! Reproducible Monte Carlo experiments.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{build_profile, ChannelProfile};
use crate::capacity::erasure_parameter;
use crate::channel::{load_channel, Channel, ChannelSampler, Histogram, Order};
use crate::coding::{
    decode_erasure_symmetrized, decode_permutation_channel, decode_threshold, encode_composition, encode_randomized,
    CodeConfig, MessageLattice, MlTable,
};
use crate::channel::empirical_distribution;
use crate::error::{Error, Result};
use crate::oracle::analytic_error_bounds;

/// Two-sided 97.5% standard normal quantile.
pub const WILSON_Z: f64 = 1.959964;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Threshold,
    Ml,
    Permutation,
    ErasureSymmetrized,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Threshold => "threshold",
            Scheme::Ml => "ml",
            Scheme::Permutation => "permutation",
            Scheme::ErasureSymmetrized => "erasure_symmetrized",
        }
    }
}

fn default_order() -> Order {
    Order::DmcThenPermute
}

/// Experiment description (JSON). A relative `channel` path is resolved
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: PathBuf,
    pub scheme: Scheme,
    pub epsilon: f64,
    pub n_grid: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Fixed lattice denominator instead of `⌊n^(1/2-ε)⌋`.
    #[serde(default)]
    pub k: Option<u64>,
    /// 1-based inputs carrying the message (ML scheme only).
    #[serde(default)]
    pub input_subset: Option<Vec<usize>>,
    #[serde(default = "default_order")]
    pub order: Order,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config and resolves its paths relative to the file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        if cfg.channel.is_relative() {
            cfg.channel = base.join(&cfg.channel);
        }
        if let Some(out) = &cfg.output {
            if out.is_relative() {
                cfg.output = Some(base.join(out));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::ParameterOutOfRange(format!("epsilon = {} is not in (0, 1/2)", self.epsilon)));
        }
        if self.trials == 0 {
            return Err(Error::ParameterOutOfRange("trials must be at least 1".into()));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return Err(Error::ParameterOutOfRange("n_grid must be non-empty with positive entries".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::ParameterOutOfRange("n_grid must be strictly increasing".into()));
        }
        if self.k == Some(0) {
            return Err(Error::ParameterOutOfRange("k must be at least 1".into()));
        }
        if let Some(subset) = &self.input_subset {
            if self.scheme != Scheme::Ml {
                return Err(Error::ConfigMismatch("input_subset is only supported by the ml scheme".into()));
            }
            if subset.is_empty() || subset.contains(&0) {
                return Err(Error::ConfigMismatch("input_subset must list 1-based inputs".into()));
            }
        }
        Ok(())
    }
}

/// Error estimate at one blocklength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub n: usize,
    pub k: u64,
    pub message_count: u64,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub analytic_bound: f64,
    pub seed: u64,
    pub scheme: Scheme,
    pub wall_time_secs: f64,
}

impl SimResult {
    /// Half-width of the Wilson interval.
    pub fn wilson_radius(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

/// 95% Wilson score interval for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    let t = trials as f64;
    let p = errors as f64 / t;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / t;
    let center = (p + z2 / (2.0 * t)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    ((center - half).min(p).max(0.0), (center + half).max(p).min(1.0))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of trial `t` at blocklength `n`; independent of scheduling.
pub fn trial_seed(master: u64, n: usize, t: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n as u64) ^ t)
}

pub fn trial_rng(master: u64, n: usize, t: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, n, t))
}

/// Loads the channel named by the config and runs it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<SimResult>> {
    config.validate()?;
    let channel = load_channel(&config.channel)?;
    run_experiment_on(config, &channel)
}

/// Runs every blocklength of the grid. Trials run on the current rayon pool.
pub fn run_experiment_on(config: &ExperimentConfig, channel: &Channel<f64>) -> Result<Vec<SimResult>> {
    config.validate()?;
    let runner = Runner::new(config, channel)?;
    config.n_grid.iter().map(|&n| runner.run_n(n)).collect()
}

struct Runner<'a> {
    config: &'a ExperimentConfig,
    channel: &'a Channel<f64>,
    sampler: ChannelSampler,
    /// Profile driving the lattice code (the symmetric stand-in for the
    /// erasure scheme).
    profile: Option<ChannelProfile<f64>>,
    erasure_q: usize,
    inputs: Option<Vec<usize>>,
}

impl<'a> Runner<'a> {
    fn new(config: &'a ExperimentConfig, channel: &'a Channel<f64>) -> Result<Self> {
        let sampler = ChannelSampler::new(channel);
        let mut erasure_q = 0;
        let profile = match config.scheme {
            Scheme::Permutation => {
                if !channel.is_permutation_matrix() {
                    return Err(Error::SchemeChannelMismatch("the permutation scheme needs a permutation matrix".into()));
                }
                None
            }
            Scheme::ErasureSymmetrized => {
                let q = channel.input_size();
                let eta = match erasure_parameter(channel) {
                    Some(eta) if eta < 1.0 => eta,
                    _ => {
                        return Err(Error::SchemeChannelMismatch(
                            "the erasure_symmetrized scheme needs an erasure channel with eta < 1".into(),
                        ))
                    }
                };
                let canonical = Channel::erasure(q, eta)?;
                if canonical.matrix().max_abs_diff(channel.matrix()) > 1e-12 {
                    return Err(Error::SchemeChannelMismatch(
                        "the erasure_symmetrized scheme needs the erasure symbol in the last column".into(),
                    ));
                }
                erasure_q = q;
                Some(build_profile(&Channel::symmetric(q, eta * (q - 1) as f64 / q as f64)?)?)
            }
            Scheme::Threshold | Scheme::Ml => Some(build_profile(channel)?),
        };
        let inputs = match &config.input_subset {
            Some(subset) => {
                if subset.iter().any(|&x| x > channel.input_size()) {
                    return Err(Error::ConfigMismatch(format!("input_subset {subset:?} exceeds the input alphabet")));
                }
                Some(subset.iter().map(|x| x - 1).collect())
            }
            None => None,
        };
        Ok(Self { config, channel, sampler, profile, erasure_q, inputs })
    }

    fn run_n(&self, n: usize) -> Result<SimResult> {
        let start = Instant::now();
        let cfg = self.config;
        let (k, message_count, bound, errors) = match cfg.scheme {
            Scheme::Permutation => {
                let types = MessageLattice::new(self.channel.input_size(), n as u64)?;
                let errors = self.count_errors(n, |rng| {
                    let msg = types.unrank(rng.gen_range(0..types.len()))?;
                    let hist = Histogram::from_counts(msg.numerators().to_vec())?;
                    let x = encode_composition(&hist)?;
                    let y = self.sampler.transmit(&x, rng, cfg.order)?;
                    Ok(decode_permutation_channel(&y, self.channel)? != hist)
                })?;
                (n as u64, types.len(), 0.0, errors)
            }
            _ => {
                let profile = self.profile.clone().expect("lattice schemes carry a profile");
                let code = CodeConfig::with_overrides(profile, n, cfg.epsilon, cfg.k, self.inputs.clone())?;
                let bounds = analytic_error_bounds(&code.profile, n, cfg.epsilon)?;
                let bound = bounds.rank2.map_or(bounds.general, |b| b.min(bounds.general));
                let lattice = *code.lattice();
                let table = if cfg.scheme == Scheme::Ml { Some(MlTable::new(self.channel, &code)?) } else { None };
                let errors = self.count_errors(n, |rng| {
                    let msg = lattice.unrank(rng.gen_range(0..lattice.len()))?;
                    let x = encode_randomized(&msg, &code, rng)?;
                    let y = self.sampler.transmit(&x, rng, cfg.order)?;
                    let ok = match cfg.scheme {
                        Scheme::Threshold => decode_threshold(&y, &code, rng)?.is(&msg),
                        Scheme::Ml => {
                            let table = table.as_ref().expect("built for ml");
                            table.decode(&empirical_distribution(&y))?.message == msg
                        }
                        Scheme::ErasureSymmetrized => decode_erasure_symmetrized(&y, self.erasure_q, &code, rng)?.is(&msg),
                        Scheme::Permutation => unreachable!(),
                    };
                    Ok(!ok)
                })?;
                (code.k, lattice.len(), bound, errors)
            }
        };
        let (ci_low, ci_high) = wilson_interval(errors, cfg.trials);
        Ok(SimResult {
            n,
            k,
            message_count,
            trials: cfg.trials,
            errors,
            error_rate: errors as f64 / cfg.trials as f64,
            ci_low,
            ci_high,
            analytic_bound: bound,
            seed: cfg.seed,
            scheme: cfg.scheme,
            wall_time_secs: start.elapsed().as_secs_f64(),
        })
    }

    fn count_errors<F>(&self, n: usize, trial: F) -> Result<u64>
    where
        F: Fn(&mut ChaCha8Rng) -> Result<bool> + Sync,
    {
        let seed = self.config.seed;
        (0..self.config.trials)
            .into_par_iter()
            .map(|t| trial(&mut trial_rng(seed, n, t)).map(u64::from))
            .try_reduce(|| 0, |a, b| Ok(a + b))
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    n: usize,
    k: u64,
    message_count: u64,
    trials: u64,
    errors: u64,
    error_rate: f64,
    ci_low: f64,
    ci_high: f64,
    analytic_bound: f64,
    seed: u64,
    scheme: &'a str,
}

/// Writes results as CSV with a header row. Wall times are left out so the
/// bytes depend only on the config.
pub fn write_csv<W: Write>(results: &[SimResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(CsvRow {
            n: r.n,
            k: r.k,
            message_count: r.message_count,
            trials: r.trials,
            errors: r.errors,
            error_rate: r.error_rate,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            analytic_bound: r.analytic_bound,
            seed: r.seed,
            scheme: r.scheme.name(),
        })
        .map_err(|e| Error::InvalidFile(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(results: &[SimResult]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(results, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Channel64;

    fn config(scheme: Scheme, n_grid: Vec<usize>, trials: u64) -> ExperimentConfig {
        ExperimentConfig {
            channel: PathBuf::from("unused.json"),
            scheme,
            epsilon: 0.1,
            n_grid,
            trials,
            seed: 7,
            output: None,
            k: None,
            input_subset: None,
            order: Order::DmcThenPermute,
        }
    }

    #[test]
    fn wilson_contains_estimate() {
        for (e, t) in [(0, 10), (10, 10), (3, 100), (5000, 10000)] {
            let (lo, hi) = wilson_interval(e, t);
            let p = e as f64 / t as f64;
            assert!(lo <= p && p <= hi && 0.0 <= lo && hi <= 1.0);
        }
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_995).abs() < 1e-5);
    }

    #[test]
    fn config_validation() {
        let mut c = config(Scheme::Threshold, vec![10, 20], 5);
        assert!(c.validate().is_ok());
        c.n_grid = vec![20, 10];
        assert!(c.validate().is_err());
        c.n_grid = vec![10];
        c.epsilon = 0.5;
        assert!(c.validate().is_err());
        c.epsilon = 0.1;
        c.trials = 0;
        assert!(c.validate().is_err());
        c.trials = 1;
        c.input_subset = Some(vec![1, 2]);
        assert!(matches!(c.validate(), Err(Error::ConfigMismatch(_))));
    }

    #[test]
    fn parse_rejects_unknown_fields() {
        let text = r#"{"channel": "c.json", "scheme": "ml", "epsilon": 0.1, "n_grid": [4], "trials": 3, "seed": 1, "bogus": 2}"#;
        assert!(ExperimentConfig::parse(text).is_err());
    }

    #[test]
    fn identity_permutation_scheme_is_error_free() {
        let c = Channel64::identity(3).unwrap();
        let res = run_experiment_on(&config(Scheme::Permutation, vec![1, 5, 40], 200), &c).unwrap();
        assert!(res.iter().all(|r| r.errors == 0));
        assert_eq!(res[1].message_count, 21);
    }

    #[test]
    fn scheme_mismatch_is_reported() {
        let bsc = Channel64::bsc(0.2).unwrap();
        assert!(matches!(
            run_experiment_on(&config(Scheme::Permutation, vec![4], 2), &bsc),
            Err(Error::SchemeChannelMismatch(_))
        ));
        assert!(matches!(
            run_experiment_on(&config(Scheme::ErasureSymmetrized, vec![4], 2), &bsc),
            Err(Error::SchemeChannelMismatch(_))
        ));
    }

    #[test]
    fn useless_channel_ml_is_a_coin_flip() {
        let c = Channel64::bsc(0.5).unwrap();
        let mut cfg = config(Scheme::Ml, vec![100], 10_000);
        cfg.k = Some(1);
        cfg.input_subset = Some(vec![1, 2]);
        let r = &run_experiment_on(&cfg, &c).unwrap()[0];
        assert_eq!(r.message_count, 2);
        assert!(r.ci_low <= 0.5 && 0.5 <= r.ci_high, "{r:?}");
    }

    #[test]
    fn reruns_are_byte_identical() {
        let c = Channel64::bsc(0.2).unwrap();
        let cfg = config(Scheme::Threshold, vec![400, 1600], 300);
        let a = csv_string(&run_experiment_on(&cfg, &c).unwrap()).unwrap();
        let b = csv_string(&run_experiment_on(&cfg, &c).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("n,k,message_count,trials,errors,error_rate,ci_low,ci_high,analytic_bound,seed,scheme\n"));
    }

    #[test]
    fn erasure_scheme_runs() {
        let c = Channel64::erasure(2, 0.3).unwrap();
        let r = &run_experiment_on(&config(Scheme::ErasureSymmetrized, vec![2000], 200), &c).unwrap()[0];
        assert!(r.error_rate < 0.2, "{r:?}");
    }
}
