//! Exact small-`n` oracles and closed-form error bounds.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analysis::ChannelProfile;
use crate::channel::{empirical_distribution, Channel, Codeword, DistVector, Histogram};
use crate::coding::{decode_permutation_channel, encode_composition, CodeConfig, LatticeMessage, MessageLattice, MlTable};
use crate::error::{Error, Result};
use crate::linalg::l2_norm;
use crate::scalar::Scalar;

/// Largest enumeration the oracles accept.
pub const ORACLE_CAP: u64 = 1_000_000;

/// Exact law of the output type of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeLaw {
    output_size: usize,
    n: usize,
    probs: BTreeMap<Vec<u64>, f64>,
}

impl TypeLaw {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    /// Types with positive probability, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u64], f64)> + '_ {
        self.probs.iter().map(|(t, &p)| (t.as_slice(), p))
    }

    pub fn prob(&self, hist: &Histogram) -> f64 {
        self.probs.get(hist.counts()).copied().unwrap_or(0.0)
    }

    /// Probability of one output sequence: its type's mass spread evenly
    /// over the sequences of that type.
    pub fn sequence_prob(&self, y: &Codeword) -> f64 {
        let h = empirical_distribution(y);
        let p = self.prob(&h);
        if p == 0.0 {
            0.0
        } else {
            p / h.multinomial().expect("small n") as f64
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    fn mix(&mut self, other: &TypeLaw, weight: f64) {
        for (t, &p) in &other.probs {
            *self.probs.entry(t.clone()).or_insert(0.0) += weight * p;
        }
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<u64> {
    (base as u64).checked_pow(u32::try_from(exp).ok()?)
}

fn too_large(what: &str) -> Error {
    Error::InstanceTooLarge(format!("{what} exceeds the oracle cap of {ORACLE_CAP}"))
}

/// Exact law of the output type when `x` is sent, tallied symbol by symbol
/// over every noise outcome.
pub fn exact_output_law<T: Scalar>(channel: &Channel<T>, x: &Codeword) -> Result<TypeLaw> {
    if x.alphabet_size() != channel.input_size() {
        return Err(Error::AlphabetMismatch { expected: channel.input_size(), found: x.alphabet_size() });
    }
    let ny = channel.output_size();
    match checked_pow(ny, x.len()) {
        Some(c) if c <= ORACLE_CAP => {}
        _ => return Err(too_large("|Y|^n")),
    }
    let mut law: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    law.insert(vec![0; ny], 1.0);
    for &xi in x.symbols() {
        let mut next = BTreeMap::new();
        for (t, p) in &law {
            for y in 0..ny {
                let py = channel.prob(xi, y).as_f64();
                if py == 0.0 {
                    continue;
                }
                let mut t2 = t.clone();
                t2[y] += 1;
                *next.entry(t2).or_insert(0.0) += p * py;
            }
        }
        law = next;
    }
    Ok(TypeLaw { output_size: ny, n: x.len(), probs: law })
}

/// Output-type law of a message under the randomized encoder: the mixture
/// of [`exact_output_law`] over every codeword, weighted by its i.i.d.
/// probability.
pub fn message_output_law<T: Scalar>(
    channel: &Channel<T>,
    config: &CodeConfig<T>,
    msg: &LatticeMessage,
) -> Result<TypeLaw> {
    let nx = channel.input_size();
    let n = config.n;
    let total = match checked_pow(nx, n) {
        Some(c) if c <= ORACLE_CAP => c,
        _ => return Err(too_large("|X|^n")),
    };
    let px: Vec<f64> = config.input_distribution(msg).probs().iter().map(|p| p.as_f64()).collect();
    let mut law = TypeLaw { output_size: channel.output_size(), n, probs: BTreeMap::new() };
    let mut symbols = vec![0usize; n];
    for mut idx in 0..total {
        for s in symbols.iter_mut() {
            *s = (idx % nx as u64) as usize;
            idx /= nx as u64;
        }
        let w: f64 = symbols.iter().map(|&s| px[s]).product();
        if w == 0.0 {
            continue;
        }
        let x = Codeword::new(symbols.clone(), nx)?;
        law.mix(&exact_output_law(channel, &x)?, w);
    }
    Ok(law)
}

/// Exact error probability of the ML lattice decoder and of the
/// Bayes-optimal rule, both under a uniform message prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlOptimality {
    pub ml_error: f64,
    pub bayes_error: f64,
}

pub fn ml_optimality<T: Scalar>(channel: &Channel<T>, config: &CodeConfig<T>) -> Result<MlOptimality> {
    let table = MlTable::new(channel, config)?;
    let laws: Vec<TypeLaw> =
        table.messages().iter().map(|m| message_output_law(channel, config, m)).collect::<Result<_>>()?;
    let m = laws.len() as f64;
    let types = MessageLattice::new(channel.output_size(), config.n as u64)?;
    let mut ml_correct = 0.0;
    let mut bayes_correct = 0.0;
    for t in types.iter() {
        let hist = Histogram::from_counts(t.numerators().to_vec())?;
        let decided = table.decode(&hist)?.message;
        let idx = table.messages().iter().position(|x| *x == decided).expect("decoder returns a lattice point");
        ml_correct += laws[idx].prob(&hist);
        bayes_correct += laws.iter().map(|l| l.prob(&hist)).fold(0.0, f64::max);
    }
    Ok(MlOptimality { ml_error: 1.0 - ml_correct / m, bayes_error: 1.0 - bayes_correct / m })
}

/// Largest exact error probability of the composition code over a
/// permutation-matrix channel, taken over every input type of length `n`.
pub fn permutation_code_exact_error<T: Scalar>(channel: &Channel<T>, n: usize) -> Result<f64> {
    let types = MessageLattice::new(channel.input_size(), n as u64)?;
    let mut worst = 0.0f64;
    for t in types.iter() {
        let sent = Histogram::from_counts(t.numerators().to_vec())?;
        let law = exact_output_law(channel, &encode_composition(&sent)?)?;
        let mut correct = 0.0;
        for (out, p) in law.iter() {
            let y = encode_composition(&Histogram::from_counts(out.to_vec())?)?;
            if decode_permutation_channel(&y, channel)? == sent {
                correct += p;
            }
        }
        worst = worst.max(1.0 - correct);
    }
    Ok(worst)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // Next permutation in lexicographic order.
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

fn decode_index(mut idx: usize, base: usize, out: &mut [usize]) {
    for s in out.iter_mut() {
        *s = idx % base;
        idx /= base;
    }
}

fn encode_index(seq: &[usize], base: usize) -> usize {
    seq.iter().rev().fold(0, |acc, &s| acc * base + s)
}

/// Compares the two stage orderings sequence by sequence, with every noise
/// outcome and every permutation spelled out. Returns the largest absolute
/// difference between the conditional laws.
pub fn verify_equivalent_model<T: Scalar>(channel: &Channel<T>, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("blocklength must be positive".into()));
    }
    let nx = channel.input_size();
    let ny = channel.output_size();
    let nfact: u64 = (1..=n as u64).product();
    let work = checked_pow(nx, n)
        .and_then(|a| checked_pow(ny, n).and_then(|b| a.checked_mul(b)))
        .and_then(|c| c.checked_mul(nfact));
    match work {
        Some(c) if c <= 100 * ORACLE_CAP => {}
        _ => return Err(too_large("|X|^n |Y|^n n!")),
    }
    let perms = permutations(n);
    let inv_nfact = 1.0 / nfact as f64;
    let p = |x: usize, y: usize| channel.prob(x, y).as_f64();
    let ny_n = ny.pow(n as u32);
    let mut x = vec![0usize; n];
    let mut z = vec![0usize; n];
    let mut y = vec![0usize; n];
    let mut worst = 0.0f64;
    for xi in 0..nx.pow(n as u32) {
        decode_index(xi, nx, &mut x);

        // Memoryless noise, then a uniform shuffle y_i = z_{σ(i)}.
        let mut first = vec![0.0; ny_n];
        for zi in 0..ny_n {
            decode_index(zi, ny, &mut z);
            let pz: f64 = x.iter().zip(&z).map(|(&a, &b)| p(a, b)).product();
            if pz == 0.0 {
                continue;
            }
            for s in &perms {
                for i in 0..n {
                    y[i] = z[s[i]];
                }
                first[encode_index(&y, ny)] += pz * inv_nfact;
            }
        }

        // Uniform shuffle w_i = x_{σ(i)}, then memoryless noise.
        let mut second = vec![0.0; ny_n];
        for s in &perms {
            for (yi, slot) in second.iter_mut().enumerate() {
                decode_index(yi, ny, &mut y);
                let py: f64 = (0..n).map(|i| p(x[s[i]], y[i])).product();
                *slot += py * inv_nfact;
            }
        }

        for (a, b) in first.iter().zip(&second) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Exact binary hypothesis test between `p^⊗n` and `q^⊗n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestBoundsReport {
    pub exact_tv: f64,
    /// Bayes error under equal priors, `Σ_t min(P(t), Q(t))`.
    pub exact_ml_error: f64,
    pub second_moment_lower: f64,
    pub lemma5_upper: Option<f64>,
    pub lemma5_premise_holds: bool,
    pub epsilon_n: Option<f64>,
}

fn ln_type_prob(counts: &[u64], ln_p: &[f64], ln_mult: f64) -> f64 {
    let mut s = ln_mult;
    for (&c, &lp) in counts.iter().zip(ln_p) {
        if c > 0 {
            s += c as f64 * lp;
        }
    }
    s
}

pub fn test_bounds<T: Scalar>(p: &DistVector<T>, q: &DistVector<T>, n: usize) -> Result<TestBoundsReport> {
    if p.len() != q.len() {
        return Err(Error::AlphabetMismatch { expected: p.len(), found: q.len() });
    }
    if n == 0 {
        return Err(Error::ParameterOutOfRange("sample count must be positive".into()));
    }
    let types = MessageLattice::new(p.len(), n as u64)?;
    if types.len() > ORACLE_CAP {
        return Err(too_large("number of types"));
    }
    let pf: Vec<f64> = p.probs().iter().map(|v| v.as_f64()).collect();
    let qf: Vec<f64> = q.probs().iter().map(|v| v.as_f64()).collect();
    let ln_p: Vec<f64> = pf.iter().map(|v| v.ln()).collect();
    let ln_q: Vec<f64> = qf.iter().map(|v| v.ln()).collect();

    let mut tv = crate::scalar::Neumaier::default();
    let mut err = crate::scalar::Neumaier::default();
    for t in types.iter() {
        let hist = Histogram::from_counts(t.numerators().to_vec())?;
        let ln_mult = hist.ln_multinomial();
        let a = ln_type_prob(hist.counts(), &ln_p, ln_mult).exp();
        let b = ln_type_prob(hist.counts(), &ln_q, ln_mult).exp();
        tv.add((a - b).abs());
        err.add(a.min(b));
    }
    let exact_tv = (0.5 * tv.total()).clamp(0.0, 1.0);
    let exact_ml_error = 0.5 * err.total();

    let nf = n as f64;
    let diff: Vec<f64> = pf.iter().zip(&qf).map(|(a, b)| a - b).collect();
    let dist2: f64 = diff.iter().map(|d| d * d).sum();
    let var_sum: f64 = pf
        .iter()
        .zip(&qf)
        .map(|(&a, &b)| a * (1.0 - a) / (2.0 * nf) + b * (1.0 - b) / (2.0 * nf) + (a - b).powi(2) / 4.0)
        .sum();
    let second_moment_lower = if dist2 == 0.0 { 0.0 } else { dist2 / (4.0 * var_sum) };

    let dist = l2_norm(&diff);
    let card = p.len() as f64;
    let (premise, epsilon_n, upper) = if n == 1 {
        // n^(1/2-ε) = 1 for every ε, so the premise no longer involves ε.
        let holds = dist >= 1.0;
        (holds, None, holds.then(|| card / (2.0 * card + 2.0)))
    } else if dist == 0.0 {
        (false, None, None)
    } else {
        let eps = (dist * nf.sqrt()).ln() / nf.ln();
        if eps > 0.0 {
            // Beyond 1/2 every ε in (0, 1/2) qualifies; report the limit.
            let eps = eps.min(0.5);
            (true, Some(eps), Some(card / (2.0 * card + 2.0 * nf.powf(2.0 * eps))))
        } else {
            (false, Some(eps), None)
        }
    };
    Ok(TestBoundsReport {
        exact_tv,
        exact_ml_error,
        second_moment_lower,
        lemma5_upper: upper,
        lemma5_premise_holds: premise,
        epsilon_n,
    })
}

/// Closed-form error bounds for the lattice code at blocklength `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBounds {
    /// `r · n^(1/2-ε) · exp(-n^(2ε) / (8σ²))`.
    pub general: f64,
    /// `|Y| π² / (6 σ_min² n^(2ε))`, rank 2 only.
    pub rank2: Option<f64>,
}

pub fn analytic_error_bounds<T: Scalar>(profile: &ChannelProfile<T>, n: usize, epsilon: f64) -> Result<AnalyticBounds> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::ParameterOutOfRange(format!("epsilon = {epsilon} is not in (0, 1/2)")));
    }
    let nf = n as f64;
    let r = profile.rank_r as f64;
    let sigma = profile.sigma.as_f64();
    let general = r * nf.powf(0.5 - epsilon) * (-nf.powf(2.0 * epsilon) / (8.0 * sigma * sigma)).exp();
    let rank2 = (profile.rank_r == 2).then(|| {
        let smin = profile.sigma_min.as_f64();
        profile.output_size as f64 * PI * PI / (6.0 * smin * smin * nf.powf(2.0 * epsilon))
    });
    Ok(AnalyticBounds { general, rank2 })
}

/// `exp(-n γ² / (2σ²))`.
pub fn hoeffding_tail(gamma: f64, sigma: f64, n: usize) -> f64 {
    (-(n as f64) * gamma * gamma / (2.0 * sigma * sigma)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialEntropy {
    pub exact_bits: f64,
    pub approx_bits: f64,
    pub gap: f64,
}

/// Entropy of `Bin(n, p)` against `½ log2(2πe n p (1-p))`.
pub fn binomial_entropy_check(n: u64, p: f64) -> Result<BinomialEntropy> {
    if n == 0 || !(p > 0.0 && p < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("need n >= 1 and p in (0, 1), got n = {n}, p = {p}")));
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut ln_choose = 0.0;
    let mut h = crate::scalar::Neumaier::default();
    for k in 0..=n {
        if k > 0 {
            ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        let lpk = ln_choose + k as f64 * lp + (n - k) as f64 * lq;
        h.add(-lpk.exp() * lpk);
    }
    let exact_bits = h.total() / std::f64::consts::LN_2;
    let approx_bits = 0.5 * (2.0 * PI * std::f64::consts::E * n as f64 * p * (1.0 - p)).log2();
    Ok(BinomialEntropy { exact_bits, approx_bits, gap: (exact_bits - approx_bits).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_profile;
    use crate::Channel64;

    fn cw(s: &[usize], q: usize) -> Codeword {
        Codeword::from_one_based(s, q).unwrap()
    }

    fn dist(p: &[f64]) -> DistVector<f64> {
        DistVector::new(p.to_vec()).unwrap()
    }

    #[test]
    fn output_law_examples() {
        let id = Channel64::identity(2).unwrap();
        let law = exact_output_law(&id, &cw(&[1, 2], 2)).unwrap();
        assert_eq!(law.iter().collect::<Vec<_>>(), vec![(&[1u64, 1][..], 1.0)]);
        assert_eq!(law.sequence_prob(&cw(&[2, 1], 2)), 0.5);
        assert_eq!(law.sequence_prob(&cw(&[1, 2], 2)), 0.5);

        let law = exact_output_law(&Channel64::bsc(0.0).unwrap(), &cw(&[1, 1], 2)).unwrap();
        assert_eq!(law.sequence_prob(&cw(&[1, 1], 2)), 1.0);

        let law = exact_output_law(&Channel64::bsc(0.2).unwrap(), &cw(&[1], 2)).unwrap();
        assert_eq!(law.sequence_prob(&cw(&[1], 2)), 0.8);
        assert_eq!(law.sequence_prob(&cw(&[2], 2)), 0.2);

        let big = Codeword::new(vec![0; 21], 2).unwrap();
        assert!(matches!(exact_output_law(&Channel64::bsc(0.2).unwrap(), &big), Err(Error::InstanceTooLarge(_))));
    }

    #[test]
    fn equivalent_model_examples() {
        assert!(verify_equivalent_model(&Channel64::bsc(0.2).unwrap(), 2).unwrap() <= 1e-12);
        assert!(verify_equivalent_model(&Channel64::erasure(2, 0.3).unwrap(), 2).unwrap() <= 1e-12);
        let c = Channel64::validate(&[[0.7, 0.3], [0.25, 0.75], [0.6, 0.4]]).unwrap();
        assert!(verify_equivalent_model(&c, 3).unwrap() <= 1e-12);
    }

    #[test]
    fn permutations_are_complete() {
        let p = permutations(4);
        assert_eq!(p.len(), 24);
        let set: std::collections::BTreeSet<_> = p.into_iter().collect();
        assert_eq!(set.len(), 24);
    }

    #[test]
    fn test_bounds_examples() {
        let r = test_bounds(&dist(&[0.3, 0.7]), &dist(&[0.3, 0.7]), 5).unwrap();
        assert!(r.exact_tv.abs() < 1e-15 && (r.exact_ml_error - 0.5).abs() < 1e-15);
        assert!(!r.lemma5_premise_holds);

        let r = test_bounds(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0]), 1).unwrap();
        assert_eq!((r.exact_tv, r.exact_ml_error), (1.0, 0.0));
        assert!(r.lemma5_premise_holds && r.epsilon_n.is_none());

        let r = test_bounds(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0]), 2).unwrap();
        assert!((r.exact_tv - 0.75).abs() < 1e-15);
        assert!((r.exact_ml_error - 0.125).abs() < 1e-15);
        assert!(r.second_moment_lower <= r.exact_tv);
        assert!(r.lemma5_upper.unwrap() >= r.exact_ml_error);
    }

    #[test]
    fn analytic_examples() {
        assert_eq!(hoeffding_tail(0.0, 1.0, 100), 1.0);
        let p = build_profile(&Channel64::bsc(0.2).unwrap()).unwrap();
        let b = analytic_error_bounds(&p, 10_000, 0.1).unwrap();
        let want = PI * PI / (3.0 * 0.36 * 10f64.powf(0.8));
        assert!((b.rank2.unwrap() - want).abs() < 1e-9);
        assert!((b.rank2.unwrap() - 1.448).abs() < 1e-3);
    }

    #[test]
    fn general_bound_with_unit_sigma() {
        // A profile with σ = 1 and r = 2: the identity on two symbols.
        let p = build_profile(&Channel64::identity(2).unwrap()).unwrap();
        assert!((p.sigma - 1.0).abs() < 1e-12);
        let b = analytic_error_bounds(&p, 1_000_000, 0.25).unwrap();
        let want = 2.0 * 10f64.powf(1.5) * (-125.0f64).exp();
        assert!((b.general - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn binomial_entropy_examples() {
        let b = binomial_entropy_check(1, 0.5).unwrap();
        assert!((b.exact_bits - 1.0).abs() < 1e-14);
        assert!((b.approx_bits - 0.5 * (2.0 * PI * std::f64::consts::E * 0.25).log2()).abs() < 1e-14);
        assert!((b.approx_bits - 1.047).abs() < 1e-3);
        for n in [10, 100, 1000] {
            let b = binomial_entropy_check(n, 0.5).unwrap();
            assert!(b.gap * n as f64 <= 1.0, "n = {n}: {}", b.gap * n as f64);
        }
    }
}
