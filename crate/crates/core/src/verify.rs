//! The `verify` suite: oracle and bound checks over shipped fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{build_profile, doeblin_coefficient};
use crate::capacity::capacity_bounds;
use crate::channel::{Channel, ChannelFile, ChannelSampler, DistVector};
use crate::coding::{CodeConfig, LatticeMessage};
use crate::degradation::{
    check_witness, extremal_erasure_probability, symmetric_dominator, symmetric_matrix, DEFAULT_FEASIBILITY_TOL,
};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::oracle::{
    binomial_entropy_check, hoeffding_tail, ml_optimality, permutation_code_exact_error, test_bounds,
    verify_equivalent_model,
};
use crate::sim::{run_experiment_on, ExperimentConfig, Scheme};
use num_rational::Rational64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scope: Scope,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// A claimed degradation witness to be re-checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFixture {
    pub name: String,
    pub dominator: ChannelFile,
    pub degraded: ChannelFile,
    pub witness: Vec<Vec<f64>>,
}

impl WitnessFixture {
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Random channel with entries drawn from `(floor, 1]` before normalizing.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, floor: f64) -> Channel<f64> {
    let m: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            let r: Vec<f64> = (0..cols).map(|_| floor + (1.0 - floor) * rng.gen::<f64>()).collect();
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
        .collect();
    Channel::validate(&m).expect("normalized rows")
}

pub fn random_dist<R: Rng + ?Sized>(rng: &mut R, size: usize) -> DistVector<f64> {
    // Occasionally zero out a coordinate so disjoint supports get exercised.
    let mut v: Vec<f64> = (0..size).map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen::<f64>() }).collect();
    if v.iter().all(|&x| x == 0.0) {
        v[rng.gen_range(0..size)] = 1.0;
    }
    let s: f64 = v.iter().sum();
    DistVector::new(v.into_iter().map(|x| x / s).collect()).expect("normalized")
}

/// The strictly positive 3×2 channel used throughout the checks.
pub fn fixed_three_by_two() -> Channel<f64> {
    Channel::validate(&[[0.7, 0.3], [0.25, 0.75], [0.6, 0.4]]).expect("valid")
}

struct Suite {
    checks: Vec<CheckResult>,
}

impl Suite {
    fn record(&mut self, name: &str, outcome: Result<std::result::Result<String, String>>) {
        let (passed, detail) = match outcome {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(CheckResult { name: name.to_string(), passed, detail });
    }
}

type Outcome = Result<std::result::Result<String, String>>;

pub fn check_equivalent_model(max_n: usize) -> Outcome {
    let channels = [
        ("bsc(0.2)", Channel::bsc(0.2)?),
        ("erasure(2,0.3)", Channel::erasure(2, 0.3)?),
        ("fixed 3x2", fixed_three_by_two()),
    ];
    let mut worst = 0.0f64;
    for (name, c) in &channels {
        for n in 1..=max_n {
            let d = verify_equivalent_model(c, n)?;
            if d > 1e-12 {
                return Ok(Err(format!("{name}, n = {n}: discrepancy {d:e}")));
            }
            worst = worst.max(d);
        }
    }
    Ok(Ok(format!("max discrepancy {worst:e}")))
}

pub fn check_test_bounds_sandwich(pairs: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut premise_count = 0;
    for i in 0..pairs {
        let size = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=6);
        let p = random_dist(&mut rng, size);
        let q = random_dist(&mut rng, size);
        let r = test_bounds(&p, &q, n)?;
        if (r.exact_ml_error - (1.0 - r.exact_tv) / 2.0).abs() > 1e-12 {
            return Ok(Err(format!("pair {i}: ML error {} vs (1 - TV)/2 = {}", r.exact_ml_error, (1.0 - r.exact_tv) / 2.0)));
        }
        if r.second_moment_lower > r.exact_tv + 1e-12 {
            return Ok(Err(format!("pair {i}: second moment bound {} above TV {}", r.second_moment_lower, r.exact_tv)));
        }
        if r.lemma5_premise_holds {
            premise_count += 1;
            let up = r.lemma5_upper.expect("premise implies a bound");
            if r.exact_ml_error > up + 1e-12 {
                return Ok(Err(format!("pair {i}: ML error {} above upper bound {up}", r.exact_ml_error)));
            }
        }
    }
    Ok(Ok(format!("{pairs} pairs, upper-bound premise held on {premise_count}")))
}

pub fn check_capacity_table() -> Outcome {
    let r = |a: i64, b: i64| Rational64::new(a, b);
    let mut cases: Vec<(String, Channel<f64>, Rational64, Rational64)> = vec![
        ("bsc(0)".into(), Channel::bsc(0.0)?, r(1, 1), r(1, 1)),
        ("bsc(0.3)".into(), Channel::bsc(0.3)?, r(1, 2), r(1, 2)),
        ("bsc(0.5)".into(), Channel::bsc(0.5)?, r(0, 1), r(0, 1)),
        ("equal rows".into(), Channel::validate(&[[0.2, 0.5, 0.3], [0.2, 0.5, 0.3]])?, r(0, 1), r(0, 1)),
        ("3-sc(0.1)".into(), Channel::symmetric(3, 0.1)?, r(1, 1), r(1, 1)),
    ];
    for k in 2..=4 {
        cases.push((format!("identity({k})"), Channel::identity(k)?, r(k as i64 - 1, 1), r(k as i64 - 1, 1)));
    }
    for q in 2..=3 {
        cases.push((format!("erasure({q},0.5)"), Channel::erasure(q, 0.5)?, r(q as i64 - 1, 2), r(q as i64 - 1, 1)));
    }
    for (name, c, lo, hi) in &cases {
        let b = capacity_bounds(c, &build_profile(c)?);
        if b.lower != *lo || b.upper != *hi || b.exact != (lo == hi) {
            return Ok(Err(format!("{name}: got [{}, {}] exact = {}, want [{lo}, {hi}]", b.lower, b.upper, b.exact)));
        }
    }
    Ok(Ok(format!("{} channels", cases.len())))
}

pub fn check_symmetric_dominators(count: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..count {
        let q = rng.gen_range(2..=4);
        let cols = rng.gen_range(2..=5);
        let c = random_channel(&mut rng, q, cols, 0.02);
        let (delta, w) = symmetric_dominator(&c)?;
        let wm = w.intermediate.matrix();
        if let Some(bad) = wm.as_slice().iter().find(|&&v| v < -1e-12) {
            return Ok(Err(format!("channel {i}: witness entry {bad}")));
        }
        for (x, row) in wm.rows_iter().enumerate() {
            if (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Ok(Err(format!("channel {i}: witness row {} does not sum to 1", x + 1)));
            }
        }
        let err = symmetric_matrix(q, delta).matmul(wm).max_abs_diff(c.matrix());
        if err > 1e-9 {
            return Ok(Err(format!("channel {i}: reconstruction error {err:e}")));
        }
        worst = worst.max(err);
    }
    Ok(Ok(format!("{count} channels, max reconstruction error {worst:e}")))
}

pub fn check_doeblin_extremality(count: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..count {
        let q = rng.gen_range(2..=4);
        let cols = rng.gen_range(2..=5);
        let c = random_channel(&mut rng, q, cols, 0.02);
        let found = extremal_erasure_probability(&c, 1e-9, DEFAULT_FEASIBILITY_TOL)?;
        let want = doeblin_coefficient(&c);
        let gap = (found - want).abs();
        if gap > 1e-6 {
            return Ok(Err(format!("channel {i}: bisection {found} vs coefficient {want}")));
        }
        worst = worst.max(gap);
    }
    Ok(Ok(format!("{count} channels, max gap {worst:e}")))
}

pub fn check_permutation_zero_error(max_q: usize, max_n: usize) -> Outcome {
    let mut cases = 0;
    for q in 2..=max_q {
        // The identity and a cyclic shift.
        let shift = Channel::validate(
            &(0..q).map(|i| (0..q).map(|j| if j == (i + 1) % q { 1.0 } else { 0.0 }).collect::<Vec<_>>()).collect::<Vec<_>>(),
        )?;
        for c in [Channel::identity(q)?, shift] {
            for n in 1..=max_n {
                let e = permutation_code_exact_error(&c, n)?;
                if e != 0.0 {
                    return Ok(Err(format!("q = {q}, n = {n}: error probability {e}")));
                }
                cases += 1;
            }
        }
    }
    Ok(Ok(format!("{cases} (channel, n) cases, all types recovered")))
}

/// Channels and settings for the ML optimality comparison.
pub fn ml_optimality_channels() -> Result<Vec<(String, Channel<f64>)>> {
    Ok(vec![
        ("bsc(0.2)".into(), Channel::bsc(0.2)?),
        ("bsc(0.45)".into(), Channel::bsc(0.45)?),
        ("erasure(2,0.3)".into(), Channel::erasure(2, 0.3)?),
        ("identity(2)".into(), Channel::identity(2)?),
        ("z-channel".into(), Channel::validate(&[[1.0, 0.0], [0.3, 0.7]])?),
        ("2x3".into(), Channel::validate(&[[0.6, 0.3, 0.1], [0.1, 0.2, 0.7]])?),
    ])
}

pub fn check_ml_optimality(max_n: usize) -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (name, c) in ml_optimality_channels()? {
        let profile = build_profile(&c)?;
        for n in 1..=max_n {
            for k in 1..=2 {
                let cfg = CodeConfig::with_overrides(profile.clone(), n, 0.25, Some(k), None)?;
                let r = ml_optimality(&c, &cfg)?;
                let gap = (r.ml_error - r.bayes_error).abs();
                if gap > 1e-12 {
                    return Ok(Err(format!("{name}, n = {n}, k = {k}: ML {} vs Bayes {}", r.ml_error, r.bayes_error)));
                }
                worst = worst.max(gap);
                cases += 1;
            }
        }
    }
    Ok(Ok(format!("{cases} instances, max gap {worst:e}")))
}

pub fn check_witness_fixture(f: &WitnessFixture) -> Outcome {
    let dom = f.dominator.to_channel()?;
    let deg = f.degraded.to_channel()?;
    let w = Matrix::from_rows(&f.witness);
    if w.as_slice().len() != dom.output_size() * deg.output_size() || f.witness.iter().any(|r| r.len() != deg.output_size()) {
        return Ok(Err(format!(
            "witness shape: expected {}x{}",
            dom.output_size(),
            deg.output_size()
        )));
    }
    Ok(check_witness(&dom, &deg, &w, 1e-9).map(|()| "witness reproduces the degraded channel".to_string()))
}

/// Tail frequencies of the decoder statistic against the concentration bound.
pub fn check_hoeffding(reps: usize, seed: u64) -> Outcome {
    let c = Channel::bsc(0.2)?;
    let profile = build_profile(&c)?;
    let n = 200;
    let cfg = CodeConfig::with_overrides(profile.clone(), n, 0.1, Some(3), None)?;
    let msg = LatticeMessage::new(vec![2, 1], 3)?;
    let pz = crate::channel::push_forward(&cfg.input_distribution(&msg), &c)?;
    let out = Channel::validate(&[pz.probs().to_vec(), pz.probs().to_vec()])?;
    let sampler = ChannelSampler::new(&out);
    let sigma = profile.sigma;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Vec::new();
    for j in 0..profile.rank_r {
        let mean = msg.numerators()[j] as f64 / 3.0;
        let stats: Vec<f64> = (0..reps)
            .map(|_| (0..n).map(|_| profile.right_pinv[(sampler.sample(0, &mut rng), j)]).sum::<f64>() / n as f64)
            .collect();
        for gamma in [0.05, 0.1, 0.2, 0.3] {
            let bound = hoeffding_tail(gamma, sigma, n);
            let slack = 3.0 * (bound * (1.0 - bound) / reps as f64).sqrt();
            let upper = stats.iter().filter(|&&s| s - mean >= gamma).count() as f64 / reps as f64;
            let lower = stats.iter().filter(|&&s| s - mean <= -gamma).count() as f64 / reps as f64;
            if upper > bound + slack || lower > bound + slack {
                return Ok(Err(format!(
                    "coordinate {}, gamma {gamma}: tails {upper}/{lower} exceed {bound}",
                    j + 1
                )));
            }
            report.push(format!("{gamma}:{upper:.3}/{lower:.3}<= {bound:.3}"));
        }
    }
    Ok(Ok(report.join(", ")))
}

/// `gap · n` must stay bounded: at most one bit for the fair coin, at most
/// two bits otherwise, and no growth between `n = 100` and `n = 1000`.
pub fn check_binomial_entropy() -> Outcome {
    let mut lines = Vec::new();
    for p in [0.1, 0.3, 0.5] {
        let scaled: Vec<f64> = [10u64, 30, 100, 300, 1000]
            .iter()
            .map(|&n| binomial_entropy_check(n, p).map(|b| b.gap * n as f64))
            .collect::<Result<_>>()?;
        let worst = scaled.iter().copied().fold(0.0, f64::max);
        let cap = if p == 0.5 { 1.0 } else { 2.0 };
        if worst > cap {
            return Ok(Err(format!("p = {p}: gap * n reached {worst:.4} bits")));
        }
        if scaled[4] > scaled[2] + 0.01 {
            return Ok(Err(format!("p = {p}: gap * n grows from {:.4} to {:.4}", scaled[2], scaled[4])));
        }
        lines.push(format!("p={p}: max gap*n {worst:.4}"));
    }
    Ok(Ok(lines.join(", ")))
}

/// Threshold decoder error against the closed-form bound plus three Wilson
/// radii, wherever that bound is below one.
pub fn check_error_bounds(trials: u64) -> Outcome {
    let mut lines = Vec::new();
    let runs = [
        (Channel::bsc(0.2)?, 0.1, vec![400, 1600, 6400]),
        (Channel::symmetric(3, 0.1)?, 0.15, vec![2_000_000]),
    ];
    for (c, eps, grid) in runs {
        let cfg = ExperimentConfig {
            channel: "builtin".into(),
            scheme: Scheme::Threshold,
            epsilon: eps,
            n_grid: grid,
            trials,
            seed: 20_240_601,
            output: None,
            k: None,
            input_subset: None,
            order: crate::channel::Order::DmcThenPermute,
        };
        for r in run_experiment_on(&cfg, &c)? {
            if r.analytic_bound < 1.0 && r.error_rate > r.analytic_bound + 3.0 * r.wilson_radius() {
                return Ok(Err(format!("n = {}: error rate {} above bound {}", r.n, r.error_rate, r.analytic_bound)));
            }
            lines.push(format!("n={} rate={:.4} bound={:.3}", r.n, r.error_rate, r.analytic_bound));
        }
    }
    Ok(Ok(lines.join(", ")))
}

pub fn verify_suite(scope: Scope) -> VerifyReport {
    verify_suite_with(scope, &[])
}

pub fn verify_suite_with(scope: Scope, fixtures: &[WitnessFixture]) -> VerifyReport {
    let full = scope == Scope::Full;
    let mut s = Suite { checks: Vec::new() };
    s.record("equivalent_model", check_equivalent_model(3));
    s.record("le_cam_sandwich", check_test_bounds_sandwich(if full { 500 } else { 100 }, 11));
    s.record("capacity_table", check_capacity_table());
    s.record("symmetric_dominator", check_symmetric_dominators(if full { 100 } else { 20 }, 12));
    s.record("doeblin_extremality", check_doeblin_extremality(if full { 50 } else { 5 }, 13));
    s.record("permutation_zero_error", check_permutation_zero_error(3, if full { 5 } else { 4 }));
    s.record("ml_optimality", check_ml_optimality(if full { 4 } else { 3 }));
    for f in fixtures {
        s.record(&format!("witness:{}", f.name), check_witness_fixture(f));
    }
    if full {
        s.record("hoeffding_tail", check_hoeffding(2000, 14));
        s.record("binomial_entropy", check_binomial_entropy());
        s.record("error_bounds", check_error_bounds(2000));
    }
    let passed = s.checks.iter().all(|c| c.passed);
    VerifyReport { scope, passed, checks: s.checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes() {
        let report = verify_suite(Scope::Fast);
        for c in &report.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn broken_witness_fails_by_name() {
        let fixture = WitnessFixture {
            name: "broken".into(),
            dominator: ChannelFile::from_channel(&Channel::erasure(2, 0.4).unwrap()),
            degraded: ChannelFile::from_channel(&Channel::bsc(0.2).unwrap()),
            witness: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]],
        };
        let report = verify_suite_with(Scope::Fast, &[fixture]);
        assert!(!report.passed);
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].name, "witness:broken");
    }

    #[test]
    fn hoeffding_and_entropy_hold() {
        assert!(check_hoeffding(500, 3).unwrap().is_ok());
        assert!(check_binomial_entropy().unwrap().is_ok());
    }
}
