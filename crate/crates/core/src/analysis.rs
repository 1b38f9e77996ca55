//! Numerical analytics of a channel matrix.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::lp::{Feasibility, FeasibilityProblem};
use crate::scalar::Scalar;

/// Number of singular values above `rel_tol` times the largest.
pub fn numerical_rank<T: Scalar>(channel: &Channel<T>, rel_tol: T) -> usize {
    channel.matrix().rank(rel_tol)
}

/// Convex weights expressing each non-extreme input row through the extreme
/// rows. Weight vectors are aligned with `extreme_rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeRowDecomposition<T = f64> {
    pub extreme_rows: Vec<usize>,
    pub weights: Vec<(usize, Vec<T>)>,
}

impl<T: Scalar> ExtremeRowDecomposition<T> {
    pub fn weights_for(&self, input: usize) -> Option<&[T]> {
        self.weights.iter().find(|(x, _)| *x == input).map(|(_, w)| w.as_slice())
    }

    /// Largest deviation between a row and its reconstruction.
    pub fn reconstruction_error(&self, channel: &Channel<T>) -> T {
        let mut worst = T::zero();
        for (x, w) in &self.weights {
            for z in 0..channel.output_size() {
                let mix = self.extreme_rows.iter().zip(w).map(|(&e, &l)| l * channel.prob(e, z)).sum::<T>();
                worst = worst.max((mix - channel.prob(*x, z)).abs());
            }
        }
        worst
    }
}

/// Solves for `λ ≥ 0`, `Σλ = 1`, `Σ λ_j · rows[j] = target`.
fn convex_weights<T: Scalar>(target: &[T], rows: &[&[T]]) -> Result<Option<Vec<T>>> {
    if rows.is_empty() {
        return Ok(None);
    }
    let mut lp = FeasibilityProblem::new(rows.len());
    for (z, &t) in target.iter().enumerate() {
        lp.add_eq(rows.iter().map(|r| r[z]).collect(), t);
    }
    lp.add_eq(vec![T::one(); rows.len()], T::one());
    match lp.solve(T::lp_tol())? {
        Feasibility::Feasible { x, .. } => {
            let s = x.iter().copied().sum::<T>();
            Ok(Some(x.into_iter().map(|v| v / s).collect()))
        }
        Feasibility::Infeasible { .. } => Ok(None),
    }
}

fn same_row<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| (x - y).abs() <= T::lp_tol())
}

/// Extreme points of the convex hull of the rows. Duplicate rows keep only
/// their first index. Every other input gets convex weights over the
/// extremes.
pub fn extreme_rows<T: Scalar>(channel: &Channel<T>) -> Result<(Vec<usize>, ExtremeRowDecomposition<T>)> {
    let q = channel.input_size();
    let mut reps: Vec<usize> = Vec::new();
    let mut rep_of = vec![0usize; q];
    for x in 0..q {
        match reps.iter().find(|&&r| same_row(channel.row(r), channel.row(x))) {
            Some(&r) => rep_of[x] = r,
            None => {
                reps.push(x);
                rep_of[x] = x;
            }
        }
    }

    let mut extremes = Vec::new();
    for &r in &reps {
        let others: Vec<&[T]> = reps.iter().filter(|&&o| o != r).map(|&o| channel.row(o)).collect();
        if convex_weights(channel.row(r), &others)?.is_none() {
            extremes.push(r);
        }
    }

    let ext_rows: Vec<&[T]> = extremes.iter().map(|&e| channel.row(e)).collect();
    let mut weights = Vec::new();
    for x in 0..q {
        if extremes.contains(&x) {
            continue;
        }
        let w = if let Some(pos) = extremes.iter().position(|&e| e == rep_of[x]) {
            let mut w = vec![T::zero(); extremes.len()];
            w[pos] = T::one();
            w
        } else {
            convex_weights(channel.row(x), &ext_rows)?
                .ok_or_else(|| Error::SolverFailure(format!("row {x} is neither extreme nor a mixture of extremes")))?
        };
        weights.push((x, w));
    }
    Ok((extremes.clone(), ExtremeRowDecomposition { extreme_rows: extremes, weights }))
}

/// `Σ_z min_x P(z|x)`.
pub fn doeblin_coefficient<T: Scalar>(channel: &Channel<T>) -> T {
    let coeff = (0..channel.output_size())
        .map(|z| (0..channel.input_size()).map(|x| channel.prob(x, z)).fold(T::infinity(), T::min))
        .sum::<T>();
    coeff.min(T::one())
}

/// Derived analytics of a channel.
#[derive(Debug, Clone)]
pub struct ChannelProfile<T = f64> {
    pub input_size: usize,
    pub output_size: usize,
    pub rank_tol: T,
    pub rank_r: usize,
    /// Inputs whose rows are linearly independent (0-based, ascending).
    pub row_subset: Vec<usize>,
    /// `r × |Y|` rows of the channel restricted to `row_subset`.
    pub reduced_matrix: Matrix<T>,
    /// `|Y| × r` right inverse `P̃ᵀ(P̃P̃ᵀ)⁻¹`.
    pub right_pinv: Matrix<T>,
    pub sigma: T,
    pub sigma_min: T,
    pub ext_count: usize,
    pub extreme_rows: Vec<usize>,
    pub decomposition: ExtremeRowDecomposition<T>,
    pub nu: T,
    pub strictly_positive: bool,
    pub doeblin_eta: T,
}

pub fn build_profile<T: Scalar>(channel: &Channel<T>) -> Result<ChannelProfile<T>> {
    build_profile_with(channel, T::rank_tol())
}

pub fn build_profile_with<T: Scalar>(channel: &Channel<T>, rank_tol: T) -> Result<ChannelProfile<T>> {
    if !(rank_tol > T::zero() && rank_tol < T::one()) {
        return Err(Error::ParameterOutOfRange(format!("rank tolerance {rank_tol} is not in (0, 1)")));
    }
    let p = channel.matrix();
    let rank = p.rank(rank_tol);

    let mut subset: Vec<usize> = Vec::with_capacity(rank);
    for x in 0..channel.input_size() {
        if subset.len() == rank {
            break;
        }
        subset.push(x);
        if p.select_rows(&subset).rank(rank_tol) < subset.len() {
            subset.pop();
        }
    }
    if subset.len() != rank || rank == 0 {
        return Err(Error::RankDeficientSubset);
    }

    let reduced = p.select_rows(&subset);
    let right_pinv = reduced.right_pseudo_inverse().ok_or(Error::RankDeficientSubset)?;
    if reduced.matmul(&right_pinv).max_abs_diff(&Matrix::identity(rank)) > T::identity_tol() {
        return Err(Error::RankDeficientSubset);
    }
    let sigma = right_pinv.op_norm();
    let sigma_min = *reduced.singular_values().last().expect("rank >= 1");

    let (extremes, decomposition) = extreme_rows(channel)?;
    let nu = channel.nu();
    Ok(ChannelProfile {
        input_size: channel.input_size(),
        output_size: channel.output_size(),
        rank_tol,
        rank_r: rank,
        row_subset: subset,
        reduced_matrix: reduced,
        right_pinv,
        sigma,
        sigma_min,
        ext_count: extremes.len(),
        extreme_rows: extremes,
        decomposition,
        nu,
        strictly_positive: nu > T::zero(),
        doeblin_eta: doeblin_coefficient(channel),
    })
}

/// JSON view of a profile. Symbol indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub input_size: usize,
    pub output_size: usize,
    pub rank_tol: f64,
    pub rank_r: usize,
    pub row_subset: Vec<usize>,
    pub reduced_matrix: Vec<Vec<f64>>,
    pub right_pinv: Vec<Vec<f64>>,
    pub sigma: f64,
    pub sigma_min: f64,
    pub ext_count: usize,
    pub extreme_rows: Vec<usize>,
    pub convex_weights: Vec<ConvexWeights>,
    pub nu: f64,
    pub strictly_positive: bool,
    pub doeblin_eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexWeights {
    pub input: usize,
    pub weights: Vec<f64>,
}

fn to_f64_rows<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<f64>> {
    m.rows_iter().map(|r| r.iter().map(|v| v.as_f64()).collect()).collect()
}

impl<T: Scalar> ChannelProfile<T> {
    pub fn report(&self) -> ProfileReport {
        ProfileReport {
            input_size: self.input_size,
            output_size: self.output_size,
            rank_tol: self.rank_tol.as_f64(),
            rank_r: self.rank_r,
            row_subset: self.row_subset.iter().map(|x| x + 1).collect(),
            reduced_matrix: to_f64_rows(&self.reduced_matrix),
            right_pinv: to_f64_rows(&self.right_pinv),
            sigma: self.sigma.as_f64(),
            sigma_min: self.sigma_min.as_f64(),
            ext_count: self.ext_count,
            extreme_rows: self.extreme_rows.iter().map(|x| x + 1).collect(),
            convex_weights: self
                .decomposition
                .weights
                .iter()
                .map(|(x, w)| ConvexWeights { input: x + 1, weights: w.iter().map(|v| v.as_f64()).collect() })
                .collect(),
            nu: self.nu.as_f64(),
            strictly_positive: self.strictly_positive,
            doeblin_eta: self.doeblin_eta.as_f64(),
        }
    }
}
