//! Discrete memoryless channels, codewords, types and the noisy permutation
//! transmission model.
//!
//! Symbols are 0-based indices internally. The erasure symbol of an erasure
//! channel is always the last output index.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{compensated_sum, Scalar};

/// A row-stochastic transition matrix `P(z|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<T = f64> {
    matrix: Matrix<T>,
}

impl<T: Scalar> Channel<T> {
    /// Validates a transmission channel (both alphabets of size at least 2).
    pub fn validate<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        Self::validate_with_min(rows, 2)
    }

    /// Validates an auxiliary channel such as a degradation witness, where
    /// alphabets of size 1 are allowed.
    pub fn validate_witness<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        Self::validate_with_min(rows, 1)
    }

    fn validate_with_min<R: AsRef<[T]>>(rows: &[R], min: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::DegenerateShape("no rows".into()));
        }
        let width = rows[0].as_ref().len();
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::DegenerateShape("rows have different lengths".into()));
        }
        if rows.len() < min || width < min {
            return Err(Error::DegenerateShape(format!(
                "{}x{} matrix, each alphabet needs at least {min} symbols",
                rows.len(),
                width
            )));
        }
        let tol = T::stochastic_tol();
        let mut clean: Vec<Vec<T>> = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let mut out = Vec::with_capacity(width);
            for (j, &v) in row.as_ref().iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::ParameterOutOfRange(format!("non-finite entry at row {i}, column {j}")));
                }
                if v < -tol {
                    return Err(Error::NegativeEntry { row: i, col: j, value: v.as_f64() });
                }
                out.push(v.max(T::zero()));
            }
            let sum = compensated_sum(out.iter().copied());
            let deviation = sum - T::one();
            if deviation.abs() > tol {
                return Err(Error::RowSumMismatch { row: i, deviation: deviation.as_f64() });
            }
            if deviation != T::zero() {
                for v in &mut out {
                    *v = (*v / sum).min(T::one());
                }
            }
            clean.push(out);
        }
        Ok(Self { matrix: Matrix::from_rows(&clean) })
    }

    /// Wraps a matrix that is already known to be stochastic.
    pub(crate) fn from_matrix_unchecked(matrix: Matrix<T>) -> Self {
        Self { matrix }
    }

    pub fn from_matrix(matrix: &Matrix<T>) -> Result<Self> {
        Self::validate_witness(&matrix.to_rows())
    }

    pub fn bsc(delta: T) -> Result<Self> {
        Self::symmetric(2, delta)
    }

    /// The q-ary symmetric channel: `1-δ` on the diagonal, `δ/(q-1)` elsewhere.
    pub fn symmetric(q: usize, delta: T) -> Result<Self> {
        if q < 2 {
            return Err(Error::ParameterOutOfRange(format!("q = {q} must be at least 2")));
        }
        check_probability("delta", delta)?;
        let off = delta / T::of_usize(q - 1);
        let m = Matrix::from_fn(q, q, |i, j| if i == j { T::one() - delta } else { off });
        Ok(Self { matrix: m })
    }

    /// The q-ary erasure channel; output `q` (0-based) is the erasure symbol.
    pub fn erasure(q: usize, eta: T) -> Result<Self> {
        if q < 2 {
            return Err(Error::ParameterOutOfRange(format!("q = {q} must be at least 2")));
        }
        check_probability("eta", eta)?;
        let m = Matrix::from_fn(q, q + 1, |i, j| {
            if j == q {
                eta
            } else if i == j {
                T::one() - eta
            } else {
                T::zero()
            }
        });
        Ok(Self { matrix: m })
    }

    pub fn identity(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::ParameterOutOfRange(format!("q = {q} must be at least 2")));
        }
        Ok(Self { matrix: Matrix::identity(q) })
    }

    pub fn canonical(kind: CanonicalKind<T>) -> Result<Self> {
        match kind {
            CanonicalKind::Symmetric { q, delta } => Self::symmetric(q, delta),
            CanonicalKind::Erasure { q, eta } => Self::erasure(q, eta),
            CanonicalKind::Identity { q } => Self::identity(q),
        }
    }

    #[inline]
    pub fn input_size(&self) -> usize {
        self.matrix.n_rows()
    }

    #[inline]
    pub fn output_size(&self) -> usize {
        self.matrix.n_cols()
    }

    #[inline]
    pub fn row(&self, x: usize) -> &[T] {
        self.matrix.row(x)
    }

    #[inline]
    pub fn prob(&self, x: usize, z: usize) -> T {
        self.matrix[(x, z)]
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.matrix.to_rows()
    }

    /// Minimum entry.
    pub fn nu(&self) -> T {
        self.matrix.min_entry()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.nu() > T::zero()
    }

    /// Square 0/1 matrix with exactly one unit entry per row and column,
    /// entries compared within the stochastic tolerance.
    pub fn permutation_map(&self) -> Option<Vec<usize>> {
        let q = self.input_size();
        if q != self.output_size() {
            return None;
        }
        let tol = T::stochastic_tol();
        let mut image = Vec::with_capacity(q);
        let mut hit = vec![false; q];
        for x in 0..q {
            let mut target = None;
            for (z, &p) in self.row(x).iter().enumerate() {
                if (p - T::one()).abs() <= tol {
                    if target.is_some() {
                        return None;
                    }
                    target = Some(z);
                } else if p.abs() > tol {
                    return None;
                }
            }
            let z = target?;
            if hit[z] {
                return None;
            }
            hit[z] = true;
            image.push(z);
        }
        Some(image)
    }

    pub fn is_permutation_matrix(&self) -> bool {
        self.permutation_map().is_some()
    }

    /// Channel obtained by permuting input rows and output columns:
    /// new row `i` is old row `row_perm[i]`, new column `j` is old column
    /// `col_perm[j]`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let m = Matrix::from_fn(self.input_size(), self.output_size(), |i, j| self.matrix[(row_perm[i], col_perm[j])]);
        Self { matrix: m }
    }

    /// Serial composition `self · next` (output of `self` feeds `next`).
    pub fn compose(&self, next: &Channel<T>) -> Result<Channel<T>> {
        if self.output_size() != next.input_size() {
            return Err(Error::AlphabetMismatch { expected: self.output_size(), found: next.input_size() });
        }
        Ok(Self { matrix: self.matrix.matmul(&next.matrix) })
    }
}

fn check_probability<T: Scalar>(name: &str, v: T) -> Result<()> {
    if !(v >= T::zero() && v <= T::one()) {
        return Err(Error::ParameterOutOfRange(format!("{name} = {v} is not in [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalKind<T> {
    Symmetric { q: usize, delta: T },
    Erasure { q: usize, eta: T },
    Identity { q: usize },
}

/// A block of symbols over `{0, .., alphabet_size-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword {
    symbols: Vec<usize>,
    alphabet_size: usize,
}

impl Codeword {
    pub fn new(symbols: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::DegenerateShape("empty codeword".into()));
        }
        if alphabet_size == 0 {
            return Err(Error::DegenerateShape("empty alphabet".into()));
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::AlphabetMismatch { expected: alphabet_size, found: bad + 1 });
        }
        Ok(Self { symbols, alphabet_size })
    }

    /// Builds a codeword from 1-based symbol labels.
    pub fn from_one_based(symbols: &[usize], alphabet_size: usize) -> Result<Self> {
        if symbols.contains(&0) {
            return Err(Error::ParameterOutOfRange("1-based symbol 0".into()));
        }
        Self::new(symbols.iter().map(|s| s - 1).collect(), alphabet_size)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.symbols.iter().map(|s| s + 1).collect()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn into_symbols(self) -> Vec<usize> {
        self.symbols
    }
}

/// Type (empirical histogram) of a block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Histogram {
    counts: Vec<u64>,
    n: u64,
}

impl Histogram {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::DegenerateShape("empty alphabet".into()));
        }
        let n = counts.iter().try_fold(0u64, |acc, &c| acc.checked_add(c)).ok_or(Error::Overflow)?;
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn to_dist<T: Scalar>(&self) -> Option<DistVector<T>> {
        if self.n == 0 {
            return None;
        }
        let n = T::of(self.n as f64);
        Some(DistVector { probs: self.counts.iter().map(|&c| T::of(c as f64) / n).collect() })
    }

    /// `ln (n choose counts)`.
    pub fn ln_multinomial(&self) -> f64 {
        ln_factorial(self.n) - self.counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
    }

    /// Exact multinomial coefficient, `None` on overflow.
    pub fn multinomial(&self) -> Option<u128> {
        let mut acc: u128 = 1;
        let mut total: u64 = 0;
        for &c in &self.counts {
            for i in 1..=c {
                total += 1;
                // acc * total / i stays integral at every step.
                acc = acc.checked_mul(total as u128)? / i as u128;
            }
        }
        Some(acc)
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// A probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistVector<T = f64> {
    probs: Vec<T>,
}

impl<T: Scalar> DistVector<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::DegenerateShape("empty distribution".into()));
        }
        let tol = T::stochastic_tol();
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < -tol {
                return Err(Error::NegativeEntry { row: 0, col: i, value: p.as_f64() });
            }
        }
        let mut probs: Vec<T> = probs.into_iter().map(|p| p.max(T::zero())).collect();
        let sum = compensated_sum(probs.iter().copied());
        if (sum - T::one()).abs() > tol {
            return Err(Error::RowSumMismatch { row: 0, deviation: (sum - T::one()).as_f64() });
        }
        if sum != T::one() {
            probs.iter_mut().for_each(|p| *p = *p / sum);
        }
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Self {
        let p = T::one() / T::of_usize(size);
        Self { probs: vec![p; size] }
    }

    pub fn point(size: usize, at: usize) -> Self {
        let mut probs = vec![T::zero(); size];
        probs[at] = T::one();
        Self { probs }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Pushes an input distribution through a channel: `P_Z = P_X · P_{Z|X}`.
pub fn push_forward<T: Scalar>(dist: &DistVector<T>, channel: &Channel<T>) -> Result<DistVector<T>> {
    if dist.len() != channel.input_size() {
        return Err(Error::AlphabetMismatch { expected: channel.input_size(), found: dist.len() });
    }
    let out = channel.matrix().left_mul_vec(dist.probs());
    DistVector::new(out)
}

pub fn empirical_distribution(codeword: &Codeword) -> Histogram {
    let mut counts = vec![0u64; codeword.alphabet_size()];
    for &s in codeword.symbols() {
        counts[s] += 1;
    }
    Histogram { n: codeword.len() as u64, counts }
}

/// Order of the two stages of the noisy permutation channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    DmcThenPermute,
    PermuteThenDmc,
}

/// Per-row cumulative tables for repeated sampling from one channel.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    cumulative: Vec<Vec<f64>>,
    last_positive: Vec<usize>,
    input_size: usize,
    output_size: usize,
}

impl ChannelSampler {
    pub fn new<T: Scalar>(channel: &Channel<T>) -> Self {
        let mut cumulative = Vec::with_capacity(channel.input_size());
        let mut last_positive = Vec::with_capacity(channel.input_size());
        for x in 0..channel.input_size() {
            let mut acc = 0.0;
            let mut cum = Vec::with_capacity(channel.output_size());
            let mut last = 0;
            for (z, &p) in channel.row(x).iter().enumerate() {
                let p = p.as_f64();
                if p > 0.0 {
                    last = z;
                }
                acc += p;
                cum.push(acc);
            }
            cumulative.push(cum);
            last_positive.push(last);
        }
        Self { cumulative, last_positive, input_size: channel.input_size(), output_size: channel.output_size() }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let cum = &self.cumulative[x];
        cum.iter().position(|&c| u < c).unwrap_or(self.last_positive[x])
    }

    pub fn transmit<R: Rng + ?Sized>(&self, input: &Codeword, rng: &mut R, order: Order) -> Result<Codeword> {
        if input.alphabet_size() != self.input_size {
            return Err(Error::AlphabetMismatch { expected: self.input_size, found: input.alphabet_size() });
        }
        let symbols = match order {
            Order::DmcThenPermute => {
                let mut z: Vec<usize> = input.symbols().iter().map(|&x| self.sample(x, rng)).collect();
                z.shuffle(rng);
                z
            }
            Order::PermuteThenDmc => {
                let mut v = input.symbols().to_vec();
                v.shuffle(rng);
                v.iter().map(|&x| self.sample(x, rng)).collect()
            }
        };
        Ok(Codeword { symbols, alphabet_size: self.output_size })
    }
}

/// Sends a codeword through the DMC and a uniform random permutation.
pub fn transmit<T: Scalar, R: Rng + ?Sized>(
    channel: &Channel<T>,
    input: &Codeword,
    rng: &mut R,
    order: Order,
) -> Result<Codeword> {
    ChannelSampler::new(channel).transmit(input, rng, order)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelLabels {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Text(String),
}

impl Entry {
    fn value(&self) -> Result<f64> {
        match self {
            Entry::Number(v) => Ok(*v),
            Entry::Text(s) => parse_exact(s.trim()),
        }
    }
}

fn parse_exact(s: &str) -> Result<f64> {
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| Error::InvalidFile(format!("bad fraction {s:?}")))?;
        let den: f64 = den.trim().parse().map_err(|_| Error::InvalidFile(format!("bad fraction {s:?}")))?;
        if den == 0.0 {
            return Err(Error::InvalidFile(format!("zero denominator in {s:?}")));
        }
        return Ok(num / den);
    }
    s.parse().map_err(|_| Error::InvalidFile(format!("bad decimal {s:?}")))
}

/// On-disk channel description (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub input_size: usize,
    pub output_size: usize,
    pub rows: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<ChannelLabels>,
}

impl ChannelFile {
    pub fn from_channel(channel: &Channel<f64>) -> Self {
        Self {
            input_size: channel.input_size(),
            output_size: channel.output_size(),
            rows: channel.rows().into_iter().map(|r| r.into_iter().map(Entry::Number).collect()).collect(),
            labels: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_channel(&self) -> Result<Channel<f64>> {
        if self.rows.len() != self.input_size {
            return Err(Error::InvalidFile(format!(
                "input_size is {} but {} rows are given",
                self.input_size,
                self.rows.len()
            )));
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.output_size {
                return Err(Error::InvalidFile(format!(
                    "row {i} has {} entries, output_size is {}",
                    row.len(),
                    self.output_size
                )));
            }
            rows.push(row.iter().map(Entry::value).collect::<Result<Vec<f64>>>()?);
        }
        Channel::validate(&rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel file serializes")
    }
}

pub fn load_channel(path: impl AsRef<std::path::Path>) -> Result<Channel<f64>> {
    ChannelFile::load(path)?.to_channel()
}
