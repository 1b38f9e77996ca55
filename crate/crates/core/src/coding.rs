//! Lattice message sets, the randomized i.i.d. encoder and its decoders.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::ChannelProfile;
use crate::channel::{empirical_distribution, push_forward, Channel, Codeword, DistVector, Histogram};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest message set the ML decoder will enumerate.
pub const ML_MESSAGE_CAP: u64 = 1_000_000;

/// A point `(p_1/k, …, p_r/k)` of the scaled simplex lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeMessage {
    numerators: Vec<u64>,
    k: u64,
}

impl LatticeMessage {
    pub fn new(numerators: Vec<u64>, k: u64) -> Result<Self> {
        if numerators.is_empty() {
            return Err(Error::DegenerateShape("lattice message needs r >= 1".into()));
        }
        if numerators.iter().sum::<u64>() != k {
            return Err(Error::ParameterOutOfRange(format!("numerators {numerators:?} do not sum to {k}")));
        }
        Ok(Self { numerators, k })
    }

    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn r(&self) -> usize {
        self.numerators.len()
    }

    pub fn probs<T: Scalar>(&self) -> Vec<T> {
        let k = T::of(self.k as f64);
        self.numerators.iter().map(|&p| T::of(p as f64) / k).collect()
    }
}

/// `C(a, b)` with overflow detection.
pub fn binomial(a: u64, b: u64) -> Option<u128> {
    if b > a {
        return Some(0);
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 1..=b as u128 {
        acc = acc.checked_mul(a as u128 - b as u128 + i)? / i;
    }
    Some(acc)
}

/// Number of ways to write `s` as an ordered sum of `m` non-negative parts.
fn compositions(s: u64, m: usize) -> Option<u128> {
    if m == 0 {
        return Some(u128::from(s == 0));
    }
    binomial(s + m as u64 - 1, m as u64 - 1)
}

/// The message set `P_{r,k}`, indexed in lexicographic order of the
/// numerator vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageLattice {
    r: usize,
    k: u64,
    count: u64,
}

impl MessageLattice {
    pub fn new(r: usize, k: u64) -> Result<Self> {
        if r == 0 || k == 0 {
            return Err(Error::ParameterOutOfRange(format!("lattice needs r >= 1 and k >= 1, got r = {r}, k = {k}")));
        }
        let count = compositions(k, r).ok_or(Error::Overflow)?;
        let count = u64::try_from(count).map_err(|_| Error::Overflow)?;
        Ok(Self { r, k, count })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn unrank(&self, mut index: u64) -> Result<LatticeMessage> {
        if index >= self.count {
            return Err(Error::ParameterOutOfRange(format!("message index {index} >= {}", self.count)));
        }
        let mut remaining = self.k;
        let mut nums = Vec::with_capacity(self.r);
        for pos in 0..self.r - 1 {
            let slots = self.r - pos - 1;
            let mut v = 0;
            loop {
                let block = compositions(remaining - v, slots).expect("bounded by count") as u64;
                if index < block {
                    break;
                }
                index -= block;
                v += 1;
            }
            nums.push(v);
            remaining -= v;
        }
        nums.push(remaining);
        Ok(LatticeMessage { numerators: nums, k: self.k })
    }

    pub fn rank(&self, msg: &LatticeMessage) -> Result<u64> {
        if msg.r() != self.r || msg.k != self.k {
            return Err(Error::ConfigMismatch(format!(
                "message has r = {}, k = {}, lattice has r = {}, k = {}",
                msg.r(),
                msg.k,
                self.r,
                self.k
            )));
        }
        let mut index = 0u64;
        let mut remaining = self.k;
        for (pos, &p) in msg.numerators[..self.r - 1].iter().enumerate() {
            let slots = self.r - pos - 1;
            for v in 0..p {
                index += compositions(remaining - v, slots).expect("bounded by count") as u64;
            }
            remaining -= p;
        }
        Ok(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = LatticeMessage> + '_ {
        (0..self.count).map(|i| self.unrank(i).expect("index in range"))
    }
}

/// Parameters shared by the encoder and the decoders at one blocklength.
#[derive(Debug, Clone)]
pub struct CodeConfig<T = f64> {
    pub profile: ChannelProfile<T>,
    pub n: usize,
    pub epsilon: T,
    pub k: u64,
    /// Inputs carrying the message coordinates, 0-based. Defaults to the
    /// profile's independent row subset.
    pub inputs: Vec<usize>,
    lattice: MessageLattice,
}

/// `⌊n^(1/2−ε)⌋`, nudged so exact powers are not lost to rounding.
pub fn lattice_denominator<T: Scalar>(n: usize, epsilon: T) -> u64 {
    let x = (n as f64).powf(0.5 - epsilon.as_f64());
    (x * (1.0 + 1e-12)).floor() as u64
}

impl<T: Scalar> CodeConfig<T> {
    pub fn new(profile: ChannelProfile<T>, n: usize, epsilon: T) -> Result<Self> {
        check_epsilon(epsilon)?;
        let k = lattice_denominator(n, epsilon);
        if k == 0 {
            return Err(Error::ParameterOutOfRange(format!("n = {n} gives k = 0")));
        }
        let inputs = profile.row_subset.clone();
        Self::build(profile, n, epsilon, k, inputs)
    }

    /// Like [`CodeConfig::new`] with an explicit `k` and message inputs.
    pub fn with_overrides(
        profile: ChannelProfile<T>,
        n: usize,
        epsilon: T,
        k: Option<u64>,
        inputs: Option<Vec<usize>>,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        let k = k.unwrap_or_else(|| lattice_denominator(n, epsilon));
        if k == 0 {
            return Err(Error::ParameterOutOfRange(format!("n = {n} gives k = 0")));
        }
        let inputs = inputs.unwrap_or_else(|| profile.row_subset.clone());
        Self::build(profile, n, epsilon, k, inputs)
    }

    fn build(profile: ChannelProfile<T>, n: usize, epsilon: T, k: u64, inputs: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ParameterOutOfRange("blocklength must be positive".into()));
        }
        if inputs.is_empty() || inputs.iter().any(|&x| x >= profile.input_size) {
            return Err(Error::ConfigMismatch(format!("message inputs {inputs:?} are not valid channel inputs")));
        }
        let lattice = MessageLattice::new(inputs.len(), k)?;
        Ok(Self { profile, n, epsilon, k, inputs, lattice })
    }

    pub fn lattice(&self) -> &MessageLattice {
        &self.lattice
    }

    pub fn message_count(&self) -> u64 {
        self.lattice.len()
    }

    /// Input distribution induced by a message.
    pub fn input_distribution(&self, msg: &LatticeMessage) -> DistVector<T> {
        let mut probs = vec![T::zero(); self.profile.input_size];
        for (&x, p) in self.inputs.iter().zip(msg.probs::<T>()) {
            probs[x] = p;
        }
        DistVector::new(probs).expect("lattice point is a distribution")
    }

    fn check_message(&self, msg: &LatticeMessage) -> Result<()> {
        if msg.r() != self.inputs.len() || msg.k != self.k {
            return Err(Error::ConfigMismatch(format!(
                "message has r = {}, k = {}, config expects r = {}, k = {}",
                msg.r(),
                msg.k,
                self.inputs.len(),
                self.k
            )));
        }
        Ok(())
    }
}

fn check_epsilon<T: Scalar>(epsilon: T) -> Result<()> {
    if !(epsilon > T::zero() && epsilon < T::of(0.5)) {
        return Err(Error::ParameterOutOfRange(format!("epsilon = {epsilon} is not in (0, 1/2)")));
    }
    Ok(())
}

/// Decoder output: a message or the error symbol `e`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Message(LatticeMessage),
    Erasure,
}

impl Decision {
    pub fn message(&self) -> Option<&LatticeMessage> {
        match self {
            Decision::Message(m) => Some(m),
            Decision::Erasure => None,
        }
    }

    pub fn is(&self, msg: &LatticeMessage) -> bool {
        self.message() == Some(msg)
    }
}

/// Draws `n` i.i.d. inputs with `P(inputs[i]) = p_i / k`.
pub fn encode_randomized<T: Scalar, R: Rng + ?Sized>(
    msg: &LatticeMessage,
    config: &CodeConfig<T>,
    rng: &mut R,
) -> Result<Codeword> {
    config.check_message(msg)?;
    let mut cumulative = Vec::with_capacity(msg.r());
    let mut acc = 0u64;
    for &p in &msg.numerators {
        acc += p;
        cumulative.push(acc);
    }
    let symbols = (0..config.n)
        .map(|_| {
            let u = rng.gen_range(0..msg.k);
            let i = cumulative.partition_point(|&c| c <= u);
            config.inputs[i]
        })
        .collect();
    Codeword::new(symbols, config.profile.input_size)
}

/// Nearest `j ∈ {0..k}` to `s = t·k`, ties split uniformly.
fn round_to_lattice<R: Rng + ?Sized>(s: f64, k: u64, rng: &mut R) -> u64 {
    if s.is_nan() || s <= 0.0 {
        return 0;
    }
    if s >= k as f64 {
        return k;
    }
    let lo = s.floor();
    let hi = lo + 1.0;
    let (dl, dh) = (s - lo, hi - s);
    let pick = if dl < dh {
        lo
    } else if dh < dl {
        hi
    } else if rng.gen_bool(0.5) {
        lo
    } else {
        hi
    };
    pick as u64
}

/// Element-wise thresholding decoder on the right pseudoinverse statistic.
pub fn decode_threshold<T: Scalar, R: Rng + ?Sized>(
    received: &Codeword,
    config: &CodeConfig<T>,
    rng: &mut R,
) -> Result<Decision> {
    decode_threshold_hist(&empirical_distribution(received), config, rng)
}

/// [`decode_threshold`] on an already tallied output type.
pub fn decode_threshold_hist<T: Scalar, R: Rng + ?Sized>(
    hist: &Histogram,
    config: &CodeConfig<T>,
    rng: &mut R,
) -> Result<Decision> {
    let profile = &config.profile;
    if hist.alphabet_size() != profile.output_size {
        return Err(Error::AlphabetMismatch { expected: profile.output_size, found: hist.alphabet_size() });
    }
    if config.inputs != profile.row_subset {
        return Err(Error::ConfigMismatch("thresholding needs the profile's independent row subset".into()));
    }
    let n = hist.n() as f64;
    let pinv = &profile.right_pinv;
    let mut nums = Vec::with_capacity(profile.rank_r);
    for x in 0..profile.rank_r {
        let t: f64 = hist.counts().iter().enumerate().map(|(y, &c)| c as f64 / n * pinv[(y, x)].as_f64()).sum();
        nums.push(round_to_lattice(t * config.k as f64, config.k, rng));
    }
    if nums.iter().sum::<u64>() == config.k {
        Ok(Decision::Message(LatticeMessage { numerators: nums, k: config.k }))
    } else {
        Ok(Decision::Erasure)
    }
}

/// Result of ML decoding. `flagged` is set when every message assigns zero
/// probability to the observation and the smallest message was returned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlDecision {
    pub message: LatticeMessage,
    pub flagged: bool,
}

/// Per-message output laws for repeated ML decoding.
#[derive(Debug, Clone)]
pub struct MlTable {
    messages: Vec<LatticeMessage>,
    log_laws: Vec<Vec<f64>>,
}

impl MlTable {
    pub fn new<T: Scalar>(channel: &Channel<T>, config: &CodeConfig<T>) -> Result<Self> {
        if config.message_count() > ML_MESSAGE_CAP {
            return Err(Error::InstanceTooLarge(format!(
                "{} messages exceed the ML cap of {ML_MESSAGE_CAP}; use the thresholding decoder",
                config.message_count()
            )));
        }
        if channel.input_size() != config.profile.input_size {
            return Err(Error::AlphabetMismatch { expected: config.profile.input_size, found: channel.input_size() });
        }
        let messages: Vec<LatticeMessage> = config.lattice().iter().collect();
        let log_laws = messages
            .iter()
            .map(|m| {
                let pz = push_forward(&config.input_distribution(m), channel)?;
                Ok(pz.probs().iter().map(|p| p.as_f64().ln()).collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self { messages, log_laws })
    }

    pub fn messages(&self) -> &[LatticeMessage] {
        &self.messages
    }

    pub fn log_likelihood(&self, index: usize, hist: &Histogram) -> f64 {
        let law = &self.log_laws[index];
        let mut s = 0.0;
        for (y, &c) in hist.counts().iter().enumerate() {
            if c > 0 {
                s += c as f64 * law[y];
            }
        }
        s
    }

    pub fn decode(&self, hist: &Histogram) -> Result<MlDecision> {
        if let Some(law) = self.log_laws.first() {
            if law.len() != hist.alphabet_size() {
                return Err(Error::AlphabetMismatch { expected: law.len(), found: hist.alphabet_size() });
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.messages.len() {
            let s = self.log_likelihood(i, hist);
            if s == f64::NEG_INFINITY {
                continue;
            }
            let better = match best {
                None => true,
                Some((_, b)) => s > b + 1e-12 * b.abs().max(1.0),
            };
            if better {
                best = Some((i, s));
            }
        }
        Ok(match best {
            Some((i, _)) => MlDecision { message: self.messages[i].clone(), flagged: false },
            None => MlDecision { message: self.messages[0].clone(), flagged: true },
        })
    }
}

/// Maximum-likelihood decoding over the lattice. Near-equal likelihoods
/// resolve to the lexicographically smallest message.
pub fn decode_ml_lattice<T: Scalar>(
    received: &Codeword,
    channel: &Channel<T>,
    config: &CodeConfig<T>,
) -> Result<MlDecision> {
    MlTable::new(channel, config)?.decode(&empirical_distribution(received))
}

/// Sorted block with the given composition.
pub fn encode_composition(hist: &Histogram) -> Result<Codeword> {
    let symbols = hist
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(a, &c)| std::iter::repeat_n(a, c as usize))
        .collect();
    Codeword::new(symbols, hist.alphabet_size())
}

/// Recovers the input type through a permutation-matrix channel.
pub fn decode_permutation_channel<T: Scalar>(received: &Codeword, channel: &Channel<T>) -> Result<Histogram> {
    let image = channel.permutation_map().ok_or(Error::NotPermutationMatrix)?;
    if received.alphabet_size() != channel.output_size() {
        return Err(Error::AlphabetMismatch { expected: channel.output_size(), found: received.alphabet_size() });
    }
    let out = empirical_distribution(received);
    Histogram::from_counts(image.iter().map(|&z| out.counts()[z]).collect())
}

/// Replaces each erasure (symbol `q`) by a uniform symbol and threshold
/// decodes against the `q`-ary symmetric profile in `config`.
pub fn decode_erasure_symmetrized<T: Scalar, R: Rng + ?Sized>(
    received: &Codeword,
    q: usize,
    config: &CodeConfig<T>,
    rng: &mut R,
) -> Result<Decision> {
    if received.alphabet_size() != q + 1 {
        return Err(Error::AlphabetMismatch { expected: q + 1, found: received.alphabet_size() });
    }
    if config.profile.output_size != q {
        return Err(Error::ConfigMismatch(format!(
            "symmetrized decoding needs a {q}-ary profile, got output size {}",
            config.profile.output_size
        )));
    }
    let mut counts = vec![0u64; q];
    for &s in received.symbols() {
        let s = if s == q { rng.gen_range(0..q) } else { s };
        counts[s] += 1;
    }
    decode_threshold_hist(&Histogram::from_counts(counts)?, config, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_profile;
    use crate::channel::{transmit, Order};
    use crate::Channel64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn msg(nums: &[u64]) -> LatticeMessage {
        LatticeMessage::new(nums.to_vec(), nums.iter().sum()).unwrap()
    }

    fn config(c: &Channel64, n: usize, k: u64) -> CodeConfig {
        CodeConfig::with_overrides(build_profile(c).unwrap(), n, 0.1, Some(k), None).unwrap()
    }

    #[test]
    fn lattice_examples() {
        let l = MessageLattice::new(2, 3).unwrap();
        let all: Vec<_> = l.iter().map(|m| m.numerators().to_vec()).collect();
        assert_eq!(all, vec![vec![0, 3], vec![1, 2], vec![2, 1], vec![3, 0]]);
        assert_eq!(MessageLattice::new(3, 2).unwrap().len(), 6);
        let one = MessageLattice::new(1, 5).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.unrank(0).unwrap().numerators(), &[5]);
        assert!(matches!(MessageLattice::new(40, 1 << 40), Err(Error::Overflow)));
    }

    #[test]
    fn lattice_rank_round_trip() {
        let l = MessageLattice::new(4, 5).unwrap();
        let mut prev: Option<LatticeMessage> = None;
        for i in 0..l.len() {
            let m = l.unrank(i).unwrap();
            assert_eq!(l.rank(&m).unwrap(), i);
            if let Some(p) = prev {
                assert!(p < m);
            }
            prev = Some(m);
        }
    }

    #[test]
    fn denominator_survives_exact_powers() {
        assert_eq!(lattice_denominator(100_000, 0.1), 100);
        assert_eq!(lattice_denominator(1_000_000, 0.1), 251);
        assert_eq!(lattice_denominator(10_000, 0.1), 39);
    }

    #[test]
    fn degenerate_message_repeats_first_input() {
        let c = Channel64::bsc(0.2).unwrap();
        let cfg = config(&c, 50, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = encode_randomized(&msg(&[3, 0]), &cfg, &mut rng).unwrap();
        assert!(x.symbols().iter().all(|&s| s == cfg.profile.row_subset[0]));
        assert!(encode_randomized(&msg(&[1, 1]), &cfg, &mut rng).is_err());
    }

    #[test]
    fn encoder_type_concentrates() {
        let c = Channel64::bsc(0.2).unwrap();
        let cfg = config(&c, 10_000, 2);
        let x = encode_randomized(&msg(&[1, 1]), &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let h = empirical_distribution(&x);
        assert!((h.counts()[0] as f64 / 1e4 - 0.5).abs() < 0.05);
        let again = encode_randomized(&msg(&[1, 1]), &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(x, again);
    }

    #[test]
    fn threshold_on_identity() {
        let c = Channel64::identity(2).unwrap();
        let cfg = config(&c, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = Codeword::from_one_based(&[1, 1, 2, 2], 2).unwrap();
        assert_eq!(decode_threshold(&y, &cfg, &mut rng).unwrap(), Decision::Message(msg(&[1, 1])));
        let tied = Codeword::from_one_based(&[1, 1, 1, 2], 2).unwrap();
        let mut seen_message = false;
        let mut seen_erasure = false;
        for seed in 0..64 {
            match decode_threshold(&tied, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap() {
                Decision::Message(m) => {
                    assert_eq!(m.numerators().iter().sum::<u64>(), 2);
                    seen_message = true;
                }
                Decision::Erasure => seen_erasure = true,
            }
        }
        assert!(seen_message && seen_erasure);
    }

    #[test]
    fn threshold_decodes_bsc_at_large_n() {
        let c = Channel64::bsc(0.2).unwrap();
        let cfg = config(&c, 100_000, 3);
        let m = msg(&[2, 1]);
        let mut ok = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = encode_randomized(&m, &cfg, &mut rng).unwrap();
            let y = transmit(&c, &x, &mut rng, Order::DmcThenPermute).unwrap();
            if decode_threshold(&y, &cfg, &mut rng).unwrap().is(&m) {
                ok += 1;
            }
        }
        assert!(ok >= 99, "{ok}");
    }

    #[test]
    fn ml_examples() {
        let id = Channel64::identity(2).unwrap();
        let cfg = config(&id, 2, 1);
        let d = decode_ml_lattice(&Codeword::from_one_based(&[1, 2], 2).unwrap(), &id, &cfg).unwrap();
        assert!(d.flagged);
        assert_eq!(d.message, msg(&[0, 1]));

        let bsc = Channel64::bsc(0.2).unwrap();
        let cfg = config(&bsc, 1, 1);
        let d = decode_ml_lattice(&Codeword::from_one_based(&[1], 2).unwrap(), &bsc, &cfg).unwrap();
        assert_eq!(d, MlDecision { message: msg(&[1, 0]), flagged: false });

        let cfg = config(&bsc, 2, 1);
        let d = decode_ml_lattice(&Codeword::from_one_based(&[1, 2], 2).unwrap(), &bsc, &cfg).unwrap();
        assert_eq!(d.message, msg(&[0, 1]));
        assert!(!d.flagged);
    }

    #[test]
    fn composition_examples() {
        let enc = |c: &[u64]| encode_composition(&Histogram::from_counts(c.to_vec()).unwrap()).unwrap().one_based();
        assert_eq!(enc(&[2, 1]), vec![1, 1, 2]);
        assert_eq!(enc(&[0, 3]), vec![2, 2, 2]);
        assert_eq!(enc(&[1, 1, 1]), vec![1, 2, 3]);
    }

    #[test]
    fn permutation_decoder_examples() {
        let id2 = Channel64::identity(2).unwrap();
        let h = decode_permutation_channel(&Codeword::from_one_based(&[2, 1, 1], 2).unwrap(), &id2).unwrap();
        assert_eq!(h.counts(), &[2, 1]);
        let swap = Channel64::validate(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let h = decode_permutation_channel(&Codeword::from_one_based(&[2, 2, 1], 2).unwrap(), &swap).unwrap();
        assert_eq!(h.counts(), &[2, 1]);
        let id3 = Channel64::identity(3).unwrap();
        let h = decode_permutation_channel(&Codeword::from_one_based(&[3, 3, 3], 3).unwrap(), &id3).unwrap();
        assert_eq!(h.counts(), &[0, 0, 3]);
        let bsc = Channel64::bsc(0.1).unwrap();
        assert!(matches!(
            decode_permutation_channel(&Codeword::from_one_based(&[1], 2).unwrap(), &bsc),
            Err(Error::NotPermutationMatrix)
        ));
    }

    #[test]
    fn symmetrized_without_erasures_matches_threshold() {
        let sc = Channel64::bsc(0.15).unwrap();
        let cfg = config(&sc, 6, 3);
        let plain = Codeword::from_one_based(&[1, 1, 2, 1, 2, 2], 2).unwrap();
        let lifted = Codeword::new(plain.symbols().to_vec(), 3).unwrap();
        for seed in 0..8 {
            let a = decode_threshold(&plain, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = decode_erasure_symmetrized(&lifted, 2, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn symmetrized_decodes_erasure_channel() {
        let ec = Channel64::erasure(2, 0.3).unwrap();
        let sc = Channel64::bsc(0.15).unwrap();
        let cfg = config(&sc, 100_000, 3);
        let m = msg(&[2, 1]);
        let mut ok = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = encode_randomized(&m, &cfg, &mut rng).unwrap();
            let y = transmit(&ec, &x, &mut rng, Order::DmcThenPermute).unwrap();
            if decode_erasure_symmetrized(&y, 2, &cfg, &mut rng).unwrap().is(&m) {
                ok += 1;
            }
        }
        assert!(ok >= 99, "{ok}");
    }

    #[test]
    fn fully_erased_block_gives_uniform_decisions() {
        let sc = Channel64::bsc(0.15).unwrap();
        let cfg = config(&sc, 5, 1);
        let y = Codeword::new(vec![2; 5], 3).unwrap();
        let trials = 10_000;
        let mut first = 0u32;
        let mut second = 0u32;
        for seed in 0..trials {
            match decode_erasure_symmetrized(&y, 2, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap() {
                Decision::Message(m) if m.numerators() == [1, 0] => first += 1,
                Decision::Message(_) => second += 1,
                Decision::Erasure => {}
            }
        }
        // Chi-square with one degree of freedom at p = 0.01 has critical value 6.635.
        let total = f64::from(first + second);
        let e = total / 2.0;
        let chi2 = (f64::from(first) - e).powi(2) / e + (f64::from(second) - e).powi(2) / e;
        assert!(chi2 < 6.635, "chi2 = {chi2}");
    }
}
