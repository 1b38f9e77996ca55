//! The degradation preorder: symmetric dominators, Doeblin witnesses and a
//! general LP test for `degraded = dominator · W`.

use crate::channel::{Channel, DistVector};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::lp::{Feasibility, FeasibilityProblem};
use crate::scalar::Scalar;

/// Default equality tolerance for [`degradation_feasibility`].
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-8;

/// A stochastic `W` with `degraded = dominator · W`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationWitness<T = f64> {
    pub intermediate: Channel<T>,
    /// Max-abs error of the reconstruction.
    pub residual: T,
}

/// `q × q` matrix with `1-t` on the diagonal and `t/(q-1)` elsewhere. `t`
/// may lie outside `[0, 1]`, in which case the result is not stochastic.
pub fn symmetric_matrix<T: Scalar>(q: usize, t: T) -> Matrix<T> {
    let off = t / T::of_usize(q - 1);
    Matrix::from_fn(q, q, |i, j| if i == j { T::one() - t } else { off })
}

/// The parameter `τ` with `S_δ⁻¹ = S_τ`.
pub fn symmetric_inverse_parameter<T: Scalar>(q: usize, delta: T) -> Result<T> {
    if q < 2 {
        return Err(Error::ParameterOutOfRange(format!("q = {q} must be at least 2")));
    }
    let qm1 = T::of_usize(q - 1);
    let singular = qm1 / T::of_usize(q);
    if (delta - singular).abs() <= T::stochastic_tol() {
        return Err(Error::SingularChannel);
    }
    Ok(-delta / (T::one() - delta - delta / qm1))
}

/// Largest `δ` for which the channel is a degraded version of `q-SC(δ)`,
/// `q = |X|`, together with the witness at that `δ`.
pub fn symmetric_dominator<T: Scalar>(channel: &Channel<T>) -> Result<(T, DegradationWitness<T>)> {
    let q = channel.input_size();
    let qm1 = T::of_usize(q - 1);
    let nu = channel.nu();
    let half = T::of(0.5);
    if (nu - half).abs() <= T::stochastic_tol() {
        // Every row is (1/2, 1/2), which any symmetric channel fixes.
        let delta = qm1 / T::of_usize(q);
        return Ok((delta, DegradationWitness { intermediate: channel.clone(), residual: T::zero() }));
    }
    if nu <= T::zero() {
        return Err(Error::NotStrictlyPositive);
    }
    let delta = nu / (T::one() - nu + nu / qm1);
    let tau = symmetric_inverse_parameter(q, delta)?;
    let raw = symmetric_matrix(q, tau).matmul(channel.matrix());
    let w = clamp_rows(&raw)?;
    let residual = symmetric_matrix(q, delta).matmul(&w).max_abs_diff(channel.matrix());
    Ok((delta, DegradationWitness { intermediate: Channel::from_matrix_unchecked(w), residual }))
}

/// Clamps entries in `[-tol, 0)` to zero and renormalizes rows.
fn clamp_rows<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let tol = T::stochastic_tol();
    let mut out = m.clone();
    for i in 0..out.n_rows() {
        let row = out.row_mut(i);
        for (j, v) in row.iter_mut().enumerate() {
            if *v < -tol {
                return Err(Error::NegativeEntry { row: i, col: j, value: v.as_f64() });
            }
            *v = v.max(T::zero());
        }
        let s = row.iter().copied().sum::<T>();
        row.iter_mut().for_each(|v| *v = *v / s);
    }
    Ok(out)
}

/// The channel `W` over inputs `X ∪ {E}` with `erasure(|X|, η) · W = P`,
/// which exists iff `P(z|x) ≥ η·Q(z)` everywhere.
pub fn doeblin_witness<T: Scalar>(channel: &Channel<T>, eta: T, q_z: &DistVector<T>) -> Result<Channel<T>> {
    if !(eta > T::zero() && eta < T::one()) {
        return Err(Error::ParameterOutOfRange(format!("eta = {eta} is not in (0, 1)")));
    }
    if q_z.len() != channel.output_size() {
        return Err(Error::AlphabetMismatch { expected: channel.output_size(), found: q_z.len() });
    }
    let tol = T::stochastic_tol();
    let qz = q_z.probs();
    let mut rows = Vec::with_capacity(channel.input_size() + 1);
    for x in 0..channel.input_size() {
        let mut row = Vec::with_capacity(channel.output_size());
        for (z, &q) in qz.iter().enumerate() {
            let v = channel.prob(x, z) - eta * q;
            if v < -tol {
                return Err(Error::MinorizationViolated { input: x, output: z });
            }
            row.push(v.max(T::zero()) / (T::one() - eta));
        }
        rows.push(row);
    }
    rows.push(qz.to_vec());
    let m = clamp_rows(&Matrix::from_rows(&rows))?;
    Ok(Channel::from_matrix_unchecked(m))
}

/// Searches for a stochastic `W` with `dominator · W = degraded`. Returns
/// `None` when the smallest achievable L1 equality violation exceeds `tol`.
pub fn degradation_feasibility<T: Scalar>(
    dominator: &Channel<T>,
    degraded: &Channel<T>,
    tol: T,
) -> Result<Option<DegradationWitness<T>>> {
    if dominator.input_size() != degraded.input_size() {
        return Err(Error::AlphabetMismatch { expected: dominator.input_size(), found: degraded.input_size() });
    }
    let a = dominator.output_size();
    let b = degraded.output_size();
    let var = |i: usize, j: usize| i * b + j;
    let mut lp = FeasibilityProblem::new(a * b);
    for x in 0..dominator.input_size() {
        for j in 0..b {
            let mut coeffs = vec![T::zero(); a * b];
            for i in 0..a {
                coeffs[var(i, j)] = dominator.prob(x, i);
            }
            lp.add_eq(coeffs, degraded.prob(x, j));
        }
    }
    for i in 0..a {
        let mut coeffs = vec![T::zero(); a * b];
        for j in 0..b {
            coeffs[var(i, j)] = T::one();
        }
        lp.add_eq(coeffs, T::one());
    }
    let x = match lp.solve(tol)? {
        Feasibility::Feasible { x, .. } => x,
        Feasibility::Infeasible { .. } => return Ok(None),
    };
    let w = clamp_rows(&Matrix::from_fn(a, b, |i, j| x[var(i, j)]))?;
    let residual = witness_residual(dominator, degraded, &w)?;
    Ok(Some(DegradationWitness { intermediate: Channel::from_matrix_unchecked(w), residual }))
}

/// `max |dominator · W − degraded|`.
pub fn witness_residual<T: Scalar>(dominator: &Channel<T>, degraded: &Channel<T>, w: &Matrix<T>) -> Result<T> {
    if w.n_rows() != dominator.output_size() || w.n_cols() != degraded.output_size() {
        return Err(Error::AlphabetMismatch { expected: dominator.output_size(), found: w.n_rows() });
    }
    Ok(dominator.matrix().matmul(w).max_abs_diff(degraded.matrix()))
}

/// Checks that `w` is stochastic and reproduces `degraded` within `tol`.
/// The error names the first violated property.
pub fn check_witness<T: Scalar>(
    dominator: &Channel<T>,
    degraded: &Channel<T>,
    w: &Matrix<T>,
    tol: T,
) -> std::result::Result<(), String> {
    for (i, row) in w.rows_iter().enumerate() {
        if let Some(j) = row.iter().position(|&v| v < -T::stochastic_tol()) {
            return Err(format!("witness entry ({}, {}) is negative", i + 1, j + 1));
        }
        if (row.iter().copied().sum::<T>() - T::one()).abs() > tol {
            return Err(format!("witness row {} does not sum to 1", i + 1));
        }
    }
    let r = witness_residual(dominator, degraded, w).map_err(|e| e.to_string())?;
    if r > tol {
        return Err(format!("dominator times witness misses the degraded channel by {r}"));
    }
    Ok(())
}

/// Largest `η` for which the channel is a degraded version of
/// `erasure(|X|, η)`, found by bisection on [`degradation_feasibility`].
pub fn extremal_erasure_probability<T: Scalar>(channel: &Channel<T>, precision: T, tol: T) -> Result<T> {
    let q = channel.input_size();
    let feasible = |eta: T| -> Result<bool> {
        Ok(degradation_feasibility(&Channel::erasure(q, eta)?, channel, tol)?.is_some())
    };
    if feasible(T::one())? {
        return Ok(T::one());
    }
    let (mut lo, mut hi) = (T::zero(), T::one());
    while hi - lo > precision {
        let mid = (lo + hi) / (T::one() + T::one());
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::doeblin_coefficient;
    use crate::Channel64;

    fn ch(rows: &[&[f64]]) -> Channel64 {
        Channel::validate(rows).unwrap()
    }

    #[test]
    fn inverse_parameter_examples() {
        let tau: f64 = symmetric_inverse_parameter(2, 0.2).unwrap();
        assert!((tau + 1.0 / 3.0).abs() < 1e-15);
        let prod = symmetric_matrix(2, 0.2).matmul(&symmetric_matrix(2, tau));
        assert!(prod.max_abs_diff(&Matrix::identity(2)) < 1e-9);
        assert_eq!(symmetric_inverse_parameter(2, 0.0).unwrap(), 0.0);
        assert!(matches!(symmetric_inverse_parameter(2, 0.5), Err(Error::SingularChannel)));
        assert!(matches!(symmetric_inverse_parameter(3, 2.0 / 3.0), Err(Error::SingularChannel)));
    }

    #[test]
    fn dominator_of_bsc() {
        let (d, w) = symmetric_dominator(&Channel64::bsc(0.1).unwrap()).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
        assert!(w.intermediate.matrix().max_abs_diff(&Matrix::identity(2)) < 1e-12);
    }

    #[test]
    fn dominator_degenerate_half() {
        let c = ch(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let (d, w) = symmetric_dominator(&c).unwrap();
        assert_eq!(d, 0.5);
        assert_eq!(w.intermediate, c);
        for delta in [0.0, 0.3, 1.0] {
            assert!(symmetric_matrix(2, delta).matmul(c.matrix()).max_abs_diff(c.matrix()) < 1e-15);
        }
    }

    #[test]
    fn dominator_of_rectangular_channel() {
        let c = ch(&[&[0.5, 0.3, 0.2], &[0.2, 0.3, 0.5]]);
        let (d, w) = symmetric_dominator(&c).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
        for x in 0..2 {
            assert!((w.intermediate.row(x).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(w.residual < 1e-9);
        assert!(matches!(symmetric_dominator(&Channel64::identity(2).unwrap()), Err(Error::NotStrictlyPositive)));
    }

    #[test]
    fn doeblin_witness_examples() {
        let w = doeblin_witness(&Channel64::bsc(0.25).unwrap(), 0.5, &DistVector::uniform(2)).unwrap();
        assert_eq!(w.rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]);
        assert!(matches!(
            doeblin_witness(&Channel64::bsc(0.25).unwrap(), 0.6, &DistVector::uniform(2)),
            Err(Error::MinorizationViolated { .. })
        ));
    }

    #[test]
    fn symmetric_channel_splits_into_erasure_then_uniform_fill() {
        for (q, eta) in [(2, 0.4), (3, 0.3), (4, 0.8)] {
            let delta = eta * (q - 1) as f64 / q as f64;
            let sc = Channel64::symmetric(q, delta).unwrap();
            let w = doeblin_witness(&sc, eta, &DistVector::uniform(q)).unwrap();
            for x in 0..q {
                for z in 0..q {
                    let want = if x == z { 1.0 } else { 0.0 };
                    assert!((w.prob(x, z) - want).abs() < 1e-12);
                }
            }
            assert!(w.row(q).iter().all(|&p| (p - 1.0 / q as f64).abs() < 1e-12));
            let back = Channel64::erasure(q, eta).unwrap().compose(&w).unwrap();
            assert!(back.matrix().max_abs_diff(sc.matrix()) < 1e-9);
        }
    }

    #[test]
    fn feasibility_examples() {
        let tol = DEFAULT_FEASIBILITY_TOL;
        let bsc = Channel64::bsc(0.2).unwrap();
        let w = degradation_feasibility(&Channel64::erasure(2, 0.4).unwrap(), &bsc, tol).unwrap().unwrap();
        assert!(w.residual < 1e-9);
        assert!(degradation_feasibility(&Channel64::bsc(0.3).unwrap(), &Channel64::identity(2).unwrap(), tol)
            .unwrap()
            .is_none());
        let c = ch(&[&[0.5, 0.3, 0.2], &[0.2, 0.3, 0.5], &[0.1, 0.1, 0.8]]);
        let w = degradation_feasibility(&c, &c, tol).unwrap().unwrap();
        assert!(w.residual < 1e-9);
    }

    #[test]
    fn extremal_erasure_matches_doeblin() {
        let c = ch(&[&[0.5, 0.3, 0.2], &[0.2, 0.3, 0.5]]);
        let eta = extremal_erasure_probability(&c, 1e-9, DEFAULT_FEASIBILITY_TOL).unwrap();
        assert!((eta - doeblin_coefficient(&c)).abs() < 1e-6, "{eta}");
        let eta = extremal_erasure_probability(&Channel64::bsc(0.2).unwrap(), 1e-9, DEFAULT_FEASIBILITY_TOL).unwrap();
        assert!((eta - 0.4).abs() < 1e-6);
    }

    #[test]
    fn broken_witness_is_named() {
        let dom = Channel64::erasure(2, 0.4).unwrap();
        let deg = Channel64::bsc(0.2).unwrap();
        let bad = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]);
        let err = check_witness(&dom, &deg, &bad, 1e-9).unwrap_err();
        assert!(err.contains("misses"), "{err}");
        let good = doeblin_witness(&deg, 0.4, &DistVector::uniform(2)).unwrap();
        assert!(check_witness(&dom, &deg, good.matrix(), 1e-9).is_ok());
    }
}
