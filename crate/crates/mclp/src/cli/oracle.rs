/*!
Independent time-discretization oracle: a finite LP over an impulse at 0,
constant control rates on the grid intervals (as cumulative amounts
z^i = u^i·Δ_i), and an impulse at T. Because the state is affine on each
interval, enforcing the constraints at the grid points is exact, so the
oracle value is a true lower bound on the optimum and equals it whenever
the grid contains the structural breakpoints.
*/

use crate::exact::{frac, RatMatrix, RatVector, Rational};
use crate::lpcore::{solve_lp, LpInstance, LpStatus, Relation, Sense, SignClass};
use crate::model::{BoundaryParams, ProblemData};
use num::Zero;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("grid must start at 0, end at T, and strictly increase")]
    BadGrid,
    #[error("discretized problem is infeasible")]
    Infeasible,
    #[error("discretized problem is unbounded")]
    Unbounded,
}

/// The uniform grid 0 = g₀ < … < g_n = T.
pub fn uniform_grid(horizon: &Rational, n: usize) -> Vec<Rational> {
    assert!(n >= 1);
    (0..=n).map(|i| horizon * frac(i as i64, n as i64)).collect()
}

/// Sorted union of two grids.
pub fn merge_grids(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let set: BTreeSet<Rational> = a.iter().chain(b.iter()).cloned().collect();
    set.into_iter().collect()
}

/// Exact optimal value of the discretized LP on the given grid.
pub fn oracle_value(
    data: &ProblemData,
    rho: &BoundaryParams,
    grid: &[Rational],
) -> Result<Rational, OracleError> {
    let m = grid.len().saturating_sub(1);
    if m == 0
        || !grid[0].is_zero()
        || grid[m] != rho.t
        || grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(OracleError::BadGrid);
    }
    let (k, j) = (data.k, data.j);
    // Variables: u0 (J), z^1..z^m (J each), uN (J).
    let ncols = (m + 2) * j;
    // Rows: state nonnegativity at each grid point (m+1 blocks of K) plus
    // the horizon constraint with lambda (K).
    let nrows = (m + 2) * k;
    let mut a = RatMatrix::zeros(nrows, ncols);
    let mut rhs = RatVector::with_capacity(nrows);
    for i in 0..=m {
        for r in 0..k {
            // A(u0 + sum_{l<=i} z^l) <= beta + b g_i.
            for c in 0..j {
                for blk in 0..=i {
                    a[(i * k + r, blk * j + c)] = data.a[(r, c)].clone();
                }
            }
            rhs.push(&rho.beta[r] + &data.b[r] * &grid[i]);
        }
    }
    for r in 0..k {
        // A(u0 + sum z + uN) <= beta + bT + lambda.
        for c in 0..j {
            for blk in 0..=m + 1 {
                a[((m + 1) * k + r, blk * j + c)] = data.a[(r, c)].clone();
            }
        }
        rhs.push(&rho.beta[r] + &data.b[r] * &rho.t + &rho.lambda[r]);
    }

    // Objective: (mu + gamma + cT)'u0 + sum_i z^i'(gamma + c(T - mid_i))
    // + gamma' uN.
    let mut objective = RatVector::with_capacity(ncols);
    for c in 0..j {
        objective.push(&rho.mu[c] + &rho.gamma[c] + &data.c[c] * &rho.t);
    }
    for i in 1..=m {
        let mid = (&grid[i - 1] + &grid[i]) / frac(2, 1);
        for c in 0..j {
            objective.push(&rho.gamma[c] + &data.c[c] * (&rho.t - &mid));
        }
    }
    for c in 0..j {
        objective.push(rho.gamma[c].clone());
    }

    let inst = LpInstance {
        sense: Sense::Max,
        objective,
        a,
        relations: vec![Relation::Le; nrows],
        rhs,
        classes: vec![SignClass::P; ncols],
    };
    let out = solve_lp(&inst);
    match out.status {
        LpStatus::Optimal => Ok(out.objective),
        LpStatus::Infeasible => Err(OracleError::Infeasible),
        LpStatus::Unbounded => Err(OracleError::Unbounded),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::solve;
    use crate::exact::frac;
    use crate::model::{golden_data, golden_goal};
    use crate::structural::golden_rho0;

    #[test]
    fn golden_oracle_sandwich() {
        let data = golden_data();
        let goal = golden_goal();
        let structural = frac(349, 12);
        let mut last = None;
        for n in [4usize, 8, 16] {
            let v = oracle_value(&data, &goal, &uniform_grid(&goal.t, n)).unwrap();
            assert!(v <= structural);
            if let Some(prev) = last {
                assert!(v >= prev, "refinement must not decrease the value");
            }
            last = Some(v);
        }
    }

    #[test]
    fn breakpoint_grid_is_exact() {
        let data = golden_data();
        let goal = golden_goal();
        let res = solve(&data, &goal, Some(golden_rho0())).unwrap();
        let bps: Vec<Rational> = res.final_h.as_ref().unwrap().breakpoints().to_vec();
        let grid = merge_grids(&bps, &uniform_grid(&goal.t, 2));
        let v = oracle_value(&data, &goal, &grid).unwrap();
        assert_eq!(v, frac(349, 12));
    }

    #[test]
    fn bad_grids_are_rejected() {
        let data = golden_data();
        let goal = golden_goal();
        assert_eq!(
            oracle_value(&data, &goal, &[frac(0, 1)]),
            Err(OracleError::BadGrid)
        );
        assert_eq!(
            oracle_value(&data, &goal, &[frac(0, 1), frac(1, 1)]),
            Err(OracleError::BadGrid)
        );
        assert_eq!(
            oracle_value(&data, &goal, &[frac(1, 2), frac(2, 1)]),
            Err(OracleError::BadGrid)
        );
    }
}
