//! Dense tableau simplex for maximization over Ax <= b, x >= 0 with b >= 0.
//! The slack basis is always feasible, so no phase-one is needed. Bland's
//! rule (lowest eligible index for both entering and leaving choices)
//! guarantees termination without cycling.

use crate::error::Error;
use crate::scalar::Real;
use crate::Result;

#[derive(Debug, Clone)]
pub struct SimplexSolution<F> {
    pub value: F,
    pub x: Vec<F>,
    /// One dual multiplier per constraint row.
    pub duals: Vec<F>,
    pub basis: Vec<usize>,
    pub iterations: usize,
}

/// Maximize `c.x` subject to `rows[k].x <= rhs[k]` and `x >= 0`.
pub fn solve_simplex<F: Real>(
    c: &[F],
    rows: &[Vec<F>],
    rhs: &[F],
    iteration_cap: usize,
) -> Result<SimplexSolution<F>> {
    let nv = c.len();
    let m = rows.len();
    if rhs.len() != m || rows.iter().any(|r| r.len() != nv) {
        return Err(Error::invalid("rows", "constraint dimensions disagree"));
    }
    if rhs.iter().any(|&b| b < F::zero()) {
        return Err(Error::invalid("rhs", "slack basis needs rhs >= 0"));
    }
    let eps = F::epsilon().sqrt() * F::of(0.01);
    let width = nv + m + 1;
    let mut tab: Vec<Vec<F>> = Vec::with_capacity(m + 1);
    for (k, row) in rows.iter().enumerate() {
        let mut r = vec![F::zero(); width];
        r[..nv].copy_from_slice(row);
        r[nv + k] = F::one();
        r[width - 1] = rhs[k];
        tab.push(r);
    }
    let mut cost = vec![F::zero(); width];
    for (j, &cj) in c.iter().enumerate() {
        cost[j] = -cj;
    }
    tab.push(cost);

    let mut basis: Vec<usize> = (nv..nv + m).collect();
    let mut iterations = 0usize;
    loop {
        let entering = (0..nv + m).find(|&j| tab[m][j] < -eps);
        let Some(col) = entering else { break };
        let mut leave: Option<usize> = None;
        let mut best_ratio = F::infinity();
        for r in 0..m {
            let a = tab[r][col];
            if a > eps {
                let ratio = tab[r][width - 1] / a;
                let better = match leave {
                    None => true,
                    // Bland tie-break on the basis variable index
                    Some(lr) => {
                        ratio < best_ratio
                            || (ratio == best_ratio && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some(r);
                    best_ratio = ratio;
                }
            }
        }
        let Some(row) = leave else {
            return Err(Error::invalid("lp", "objective unbounded above"));
        };
        iterations += 1;
        if iterations > iteration_cap {
            return Err(Error::SimplexIterationCap { cap: iteration_cap, basis });
        }
        let pivot = tab[row][col];
        for v in tab[row].iter_mut() {
            *v = *v / pivot;
        }
        for r in 0..=m {
            if r == row {
                continue;
            }
            let factor = tab[r][col];
            if factor != F::zero() {
                for j in 0..width {
                    let delta = factor * tab[row][j];
                    tab[r][j] = tab[r][j] - delta;
                }
            }
        }
        basis[row] = col;
    }

    let mut x = vec![F::zero(); nv];
    for (r, &bv) in basis.iter().enumerate() {
        if bv < nv {
            x[bv] = tab[r][width - 1];
        }
    }
    let duals: Vec<F> = (0..m).map(|k| tab[m][nv + k]).collect();
    Ok(SimplexSolution { value: tab[m][width - 1], x, duals, basis, iterations })
}
