//! Bounds on the noisy permutation channel capacity.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::analysis::ChannelProfile;
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which rule of the cascade produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// All rows equal: nothing gets through.
    UnitRank,
    /// Noiseless up to relabeling: every composition is recoverable.
    PermutationMatrix,
    /// Achievability from the rank, `(r-1)/2`.
    RankAchievability,
    /// Converse for strictly positive channels, `(min{ext,|Y|}-1)/2`.
    StrictlyPositiveConverse,
    /// Converse for arbitrary channels, `min{ext,|Y|}-1`.
    GeneralConverse,
    /// Rank matches the strictly positive converse.
    TightStrictlyPositive,
    /// Recognized `q`-ary erasure channel.
    Erasure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityBounds {
    pub lower: Rational64,
    pub upper: Rational64,
    pub exact: bool,
    pub rules: Vec<Rule>,
    /// Unproven conjectures. Never used to set a bound.
    pub annotations: Vec<String>,
}

impl CapacityBounds {
    fn exact(value: Rational64, rule: Rule) -> Self {
        Self { lower: value, upper: value, exact: true, rules: vec![rule], annotations: Vec::new() }
    }

    pub fn lower_f64(&self) -> f64 {
        self.lower.to_f64().expect("small rational")
    }

    pub fn upper_f64(&self) -> f64 {
        self.upper.to_f64().expect("small rational")
    }

    pub fn report(&self) -> CapacityReport {
        CapacityReport {
            lower: self.lower_f64(),
            upper: self.upper_f64(),
            lower_exact: self.lower.to_string(),
            upper_exact: self.upper.to_string(),
            exact: self.exact,
            rules: self.rules.clone(),
            annotations: self.annotations.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub lower: f64,
    pub upper: f64,
    pub lower_exact: String,
    pub upper_exact: String,
    pub exact: bool,
    pub rules: Vec<Rule>,
    pub annotations: Vec<String>,
}

fn int(v: usize) -> Rational64 {
    Rational64::from_integer(v as i64)
}

fn half(v: usize) -> Rational64 {
    Rational64::new(v as i64, 2)
}

/// Erasure probability if the channel is `q-EC(η)` up to a permutation of
/// the output columns.
pub fn erasure_parameter<T: Scalar>(channel: &Channel<T>) -> Option<T> {
    let q = channel.input_size();
    if channel.output_size() != q + 1 {
        return None;
    }
    let tol = T::stochastic_tol();
    'column: for e in 0..=q {
        let eta = channel.prob(0, e);
        if (0..q).any(|x| (channel.prob(x, e) - eta).abs() > tol) {
            continue;
        }
        let keep = T::one() - eta;
        let mut used = vec![false; q + 1];
        used[e] = true;
        for x in 0..q {
            let mut hit = None;
            for z in (0..=q).filter(|&z| z != e) {
                let p = channel.prob(x, z);
                if p.abs() <= tol {
                    continue;
                }
                if hit.is_some() || (p - keep).abs() > tol || used[z] {
                    continue 'column;
                }
                hit = Some(z);
            }
            match hit {
                Some(z) => used[z] = true,
                // η = 1: every row sits on the erasure column alone.
                None if keep.abs() <= tol => {}
                None => continue 'column,
            }
        }
        return Some(eta);
    }
    None
}

/// Runs the bound cascade on a channel and its profile.
pub fn capacity_bounds<T: Scalar>(channel: &Channel<T>, profile: &ChannelProfile<T>) -> CapacityBounds {
    let r = profile.rank_r;
    let q = channel.input_size();
    if r == 1 {
        return CapacityBounds::exact(int(0), Rule::UnitRank);
    }
    if channel.is_permutation_matrix() {
        return CapacityBounds::exact(int(q - 1), Rule::PermutationMatrix);
    }
    let m = profile.ext_count.min(channel.output_size());
    let mut bounds = if profile.strictly_positive {
        let exact = r == m;
        let mut b = CapacityBounds {
            lower: half(r - 1),
            upper: half(m - 1),
            exact,
            rules: vec![Rule::RankAchievability, Rule::StrictlyPositiveConverse],
            annotations: Vec::new(),
        };
        if exact {
            b.rules.push(Rule::TightStrictlyPositive);
        } else {
            b.annotations.push(format!(
                "conjectured: capacity equals (rank - 1)/2 = {} for every strictly positive channel",
                half(r - 1)
            ));
        }
        b
    } else {
        CapacityBounds {
            lower: half(r - 1),
            upper: int(m - 1),
            exact: false,
            rules: vec![Rule::RankAchievability, Rule::GeneralConverse],
            annotations: Vec::new(),
        }
    };
    if let Some(eta) = erasure_parameter(channel) {
        if eta <= T::stochastic_tol() {
            // Nothing is ever erased: the identity on q symbols.
            return CapacityBounds::exact(int(q - 1), Rule::Erasure);
        }
        bounds.lower = half(q - 1);
        bounds.upper = int(q - 1);
        bounds.exact = false;
        bounds.rules.push(Rule::Erasure);
        if q == 2 {
            bounds.annotations.push("conjectured: the binary erasure channel has capacity 1/2".into());
        }
        bounds.annotations.push(format!("conjectured: capacity is at most q/2 = {}", half(q)));
    }
    bounds
}

/// `log2(message_count) / log2(n)`.
pub fn rate_of(message_count: u64, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::ParameterOutOfRange(format!("rate needs n >= 2, got {n}")));
    }
    if message_count == 0 {
        return Err(Error::ParameterOutOfRange("message set is empty".into()));
    }
    Ok((message_count as f64).log2() / (n as f64).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_profile;
    use crate::coding::{lattice_denominator, MessageLattice};
    use crate::Channel64;

    fn bounds(c: &Channel64) -> CapacityBounds {
        capacity_bounds(c, &build_profile(c).unwrap())
    }

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn bsc_table() {
        let b = bounds(&Channel64::bsc(0.3).unwrap());
        assert!(b.exact && b.lower == r(1, 2));
        let b = bounds(&Channel64::bsc(0.0).unwrap());
        assert!(b.exact && b.lower == r(1, 1));
        assert_eq!(b.rules, vec![Rule::PermutationMatrix]);
        let b = bounds(&Channel64::bsc(1.0).unwrap());
        assert!(b.exact && b.lower == r(1, 1));
        let b = bounds(&Channel64::bsc(0.5).unwrap());
        assert!(b.exact && b.upper == r(0, 1));
    }

    #[test]
    fn identity_and_erasure() {
        for k in 2..=4 {
            let b = bounds(&Channel64::identity(k).unwrap());
            assert!(b.exact && b.lower == r(k as i64 - 1, 1));
        }
        let b = bounds(&Channel64::erasure(3, 0.5).unwrap());
        assert_eq!((b.lower, b.upper, b.exact), (r(1, 1), r(2, 1), false));
        assert!(b.rules.contains(&Rule::Erasure));
        let b = bounds(&Channel64::erasure(2, 0.0).unwrap());
        assert!(b.exact && b.lower == r(1, 1));
        let b = bounds(&Channel64::erasure(2, 1.0).unwrap());
        assert!(b.exact && b.lower == r(0, 1));
    }

    #[test]
    fn erasure_detection_ignores_column_order() {
        let c = Channel64::erasure(3, 0.25).unwrap().permuted(&[2, 0, 1], &[3, 1, 0, 2]);
        assert_eq!(erasure_parameter(&c), Some(0.25));
        assert_eq!(erasure_parameter(&Channel64::bsc(0.2).unwrap()), None);
        let b = bounds(&c);
        assert_eq!((b.lower, b.upper), (r(1, 1), r(2, 1)));
    }

    #[test]
    fn symmetric_three_is_tight() {
        let b = bounds(&Channel64::symmetric(3, 0.1).unwrap());
        assert!(b.exact && b.lower == r(1, 1));
        assert!(b.rules.contains(&Rule::TightStrictlyPositive));
    }

    #[test]
    fn strictly_positive_gap() {
        let c = Channel64::validate(&[[0.8, 0.2], [0.2, 0.8], [0.5, 0.5]]).unwrap();
        let b = bounds(&c);
        assert!(b.exact && b.lower == r(1, 2));
        // Four corners of a square in a plane of the simplex: rank 3, ext 4.
        let c = Channel64::validate(&[
            [0.35, 0.15, 0.35, 0.15],
            [0.35, 0.15, 0.15, 0.35],
            [0.15, 0.35, 0.35, 0.15],
            [0.15, 0.35, 0.15, 0.35],
        ])
        .unwrap();
        let p = build_profile(&c).unwrap();
        let b = capacity_bounds(&c, &p);
        assert_eq!((p.rank_r, p.ext_count), (3, 4));
        assert_eq!((b.lower, b.upper, b.exact), (r(1, 1), r(3, 2), false));
        assert!(!b.annotations.is_empty());
    }

    #[test]
    fn rate_examples() {
        assert!((rate_of(100, 10).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(rate_of(1, 17).unwrap(), 0.0);
        let n = 1_000_000u64;
        let k = lattice_denominator(n as usize, 0.1);
        let m = MessageLattice::new(2, k).unwrap().len();
        assert!((rate_of(m, n).unwrap() - 0.4).abs() < 0.02);
        assert!(rate_of(4, 1).is_err());
    }

    #[test]
    fn report_keeps_exact_strings() {
        let rep = bounds(&Channel64::erasure(3, 0.5).unwrap()).report();
        assert_eq!((rep.lower_exact.as_str(), rep.upper_exact.as_str()), ("1", "2"));
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"erasure\""));
    }
}
