//! Dense phase-one simplex for feasibility problems of the form
//!
//! ```text
//! A_eq x = b_eq,  A_le x <= b_le,  x >= 0
//! ```
//!
//! The solver minimizes the total artificial mass (the L1 constraint
//! violation). An instance is reported feasible when that minimum is within
//! the caller's tolerance. Bland's rule is used for both the entering and the
//! leaving variable, so degenerate instances cannot cycle.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct FeasibilityProblem<T> {
    n_vars: usize,
    eq: Vec<(Vec<T>, T)>,
    le: Vec<(Vec<T>, T)>,
}

#[derive(Debug, Clone)]
pub enum Feasibility<T> {
    /// A point satisfying all constraints up to `violation` (L1 total).
    Feasible { x: Vec<T>, violation: T },
    Infeasible { violation: T },
}

impl<T> Feasibility<T> {
    pub fn point(&self) -> Option<&[T]> {
        match self {
            Feasibility::Feasible { x, .. } => Some(x),
            Feasibility::Infeasible { .. } => None,
        }
    }
}

impl<T: Scalar> FeasibilityProblem<T> {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, eq: Vec::new(), le: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn add_eq(&mut self, coeffs: Vec<T>, rhs: T) {
        assert_eq!(coeffs.len(), self.n_vars);
        self.eq.push((coeffs, rhs));
    }

    pub fn add_le(&mut self, coeffs: Vec<T>, rhs: T) {
        assert_eq!(coeffs.len(), self.n_vars);
        self.le.push((coeffs, rhs));
    }

    pub fn solve(&self, tol: T) -> Result<Feasibility<T>> {
        let n = self.n_vars;
        let n_slack = self.le.len();
        let m = self.eq.len() + self.le.len();
        if m == 0 {
            return Ok(Feasibility::Feasible { x: vec![T::zero(); n], violation: T::zero() });
        }

        // Column layout: structural | slack | artificial | rhs.
        let mut needs_art = Vec::with_capacity(m);
        let mut rows: Vec<Vec<T>> = Vec::with_capacity(m);
        for (coeffs, rhs) in &self.eq {
            let flip = *rhs < T::zero();
            let mut row = vec![T::zero(); n + n_slack];
            for (dst, &c) in row.iter_mut().zip(coeffs) {
                *dst = if flip { -c } else { c };
            }
            row.push(if flip { -*rhs } else { *rhs });
            rows.push(row);
            needs_art.push(true);
        }
        for (s, (coeffs, rhs)) in self.le.iter().enumerate() {
            let flip = *rhs < T::zero();
            let mut row = vec![T::zero(); n + n_slack];
            for (dst, &c) in row.iter_mut().zip(coeffs) {
                *dst = if flip { -c } else { c };
            }
            row[n + s] = if flip { -T::one() } else { T::one() };
            row.push(if flip { -*rhs } else { *rhs });
            rows.push(row);
            needs_art.push(flip);
        }
        let n_art = needs_art.iter().filter(|&&a| a).count();
        let width = n + n_slack + n_art;
        let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut art = 0;
        for (i, mut row) in rows.into_iter().enumerate() {
            let rhs = row.pop().expect("rhs present");
            row.resize(width, T::zero());
            if needs_art[i] {
                row[n + n_slack + art] = T::one();
                basis.push(n + n_slack + art);
                art += 1;
            } else {
                basis.push(n + (i - self.eq.len()));
            }
            row.push(rhs);
            tab.push(row);
        }
        let is_art = |j: usize| j >= n + n_slack && j < width;

        // Reduced costs of the phase-one objective.
        let mut cost = vec![T::zero(); width + 1];
        for (i, row) in tab.iter().enumerate() {
            if is_art(basis[i]) {
                for (c, &a) in cost.iter_mut().zip(row) {
                    *c = *c - a;
                }
            }
        }
        for j in (n + n_slack)..width {
            cost[j] = cost[j] + T::one();
        }

        let eps = T::pivot_tol();
        let mut pivots = 0;
        loop {
            let Some(enter) = (0..width).find(|&j| cost[j] < -eps) else { break };
            let mut leave: Option<usize> = None;
            let mut best = T::infinity();
            for i in 0..m {
                let a = tab[i][enter];
                if a > eps {
                    let ratio = tab[i][width] / a;
                    let better = match leave {
                        None => true,
                        Some(l) => ratio < best - eps || (ratio <= best + eps && basis[i] < basis[l]),
                    };
                    if better {
                        best = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(leave) = leave else {
                return Err(Error::SolverFailure("phase-one objective unbounded".into()));
            };
            pivot(&mut tab, &mut cost, leave, enter);
            basis[leave] = enter;
            pivots += 1;
            if pivots > MAX_PIVOTS {
                return Err(Error::SolverFailure("pivot limit exceeded".into()));
            }
        }

        let violation = (-cost[width]).max(T::zero());
        if !violation.is_finite() {
            return Err(Error::SolverFailure("non-finite objective".into()));
        }
        if violation > tol {
            return Ok(Feasibility::Infeasible { violation });
        }
        let mut x = vec![T::zero(); n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = tab[i][width].max(T::zero());
            }
        }
        Ok(Feasibility::Feasible { x, violation })
    }
}

fn pivot<T: Scalar>(tab: &mut [Vec<T>], cost: &mut [T], row: usize, col: usize) {
    let p = tab[row][col];
    for v in tab[row].iter_mut() {
        *v = *v / p;
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != T::zero() {
            for (v, &pv) in r.iter_mut().zip(&pivot_row) {
                *v = *v - f * pv;
            }
        }
    }
    let f = cost[col];
    if f != T::zero() {
        for (v, &pv) in cost.iter_mut().zip(&pivot_row) {
            *v = *v - f * pv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_feasible_system() {
        // x + y = 1, x - y = 0.5
        let mut lp = FeasibilityProblem::<f64>::new(2);
        lp.add_eq(vec![1.0, 1.0], 1.0);
        lp.add_eq(vec![1.0, -1.0], 0.5);
        let out = lp.solve(1e-9).unwrap();
        let x = out.point().unwrap();
        assert!((x[0] - 0.75).abs() < 1e-12 && (x[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn nonnegativity_makes_system_infeasible() {
        // x + y = 1, x - y = 2 forces y = -0.5
        let mut lp = FeasibilityProblem::<f64>::new(2);
        lp.add_eq(vec![1.0, 1.0], 1.0);
        lp.add_eq(vec![1.0, -1.0], 2.0);
        match lp.solve(1e-9).unwrap() {
            Feasibility::Infeasible { violation } => assert!(violation > 0.1),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn inequalities_with_negative_rhs() {
        // x >= 0.3 written as -x <= -0.3, x <= 0.4
        let mut lp = FeasibilityProblem::<f64>::new(1);
        lp.add_le(vec![-1.0], -0.3);
        lp.add_le(vec![1.0], 0.4);
        let x = lp.solve(1e-9).unwrap().point().unwrap().to_vec();
        assert!(x[0] >= 0.3 - 1e-12 && x[0] <= 0.4 + 1e-12);

        let mut bad = FeasibilityProblem::<f64>::new(1);
        bad.add_le(vec![-1.0], -0.5);
        bad.add_le(vec![1.0], 0.4);
        assert!(bad.solve(1e-9).unwrap().point().is_none());
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = FeasibilityProblem::<f64>::new(3);
        lp.add_eq(vec![1.0, 1.0, 1.0], 1.0);
        lp.add_eq(vec![2.0, 2.0, 2.0], 2.0);
        lp.add_eq(vec![1.0, 0.0, 0.0], 0.2);
        let x = lp.solve(1e-9).unwrap().point().unwrap().to_vec();
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((x[0] - 0.2).abs() < 1e-12);
    }
}
