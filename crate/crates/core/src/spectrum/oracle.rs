//! Finite-difference check on the shooting eigenvalues.
//!
//! Half-cell grid: `n` cells of width `h = L/n` with nodes at `(i + 1/2) h`.
//! Reflecting the ghost values across the cell faces at 0 and `L` gives the
//! Neumann rows `(u_0 - u_1)/h^2` and `(u_{n-1} - u_{n-2})/h^2`, so the matrix is
//! symmetric tridiagonal and second-order accurate.

use super::{check_length, eigenvalue_count};
use crate::error::{Error, Result};
use crate::potential::PearsonPotential;

struct Tridiagonal {
    diag: Vec<f64>,
    /// Constant off-diagonal entry.
    off: f64,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `sigma` (Sturm sequence of LDL^T pivots).
    fn count_below(&self, sigma: f64) -> usize {
        let off2 = self.off * self.off;
        let mut count = 0;
        let mut d = 1.0;
        for (i, &a) in self.diag.iter().enumerate() {
            d = a - sigma - if i == 0 { 0.0 } else { off2 / d };
            if d == 0.0 {
                d = f64::MIN_POSITIVE;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin_lower(&self) -> f64 {
        self.diag.iter().fold(f64::INFINITY, |m, &a| m.min(a)) - 2.0 * self.off.abs()
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection on the count.
    fn eigenvalue(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        while hi - lo > 2.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn neumann_matrix(v: &PearsonPotential, length: f64, cells: usize) -> Result<Tridiagonal> {
    let h = length / cells as f64;
    let inv_h2 = 1.0 / (h * h);
    let diag = (0..cells)
        .map(|i| {
            let boundary = i == 0 || i + 1 == cells;
            let kinetic = if boundary { inv_h2 } else { 2.0 * inv_h2 };
            v.evaluate((i as f64 + 0.5) * h).map(|p| kinetic + p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Tridiagonal { diag, off: -inv_h2 })
}

/// All eigenvalues of the finite-difference matrix below `cutoff`, without
/// cross-checking against the phase count.
pub fn oracle_matrix_eigenvalues(
    v: &PearsonPotential,
    length: f64,
    grid_points: usize,
    cutoff: f64,
) -> Result<Vec<f64>> {
    check_length(length)?;
    if grid_points < 100 {
        return Err(Error::InvalidArgument(format!(
            "grid_points {grid_points} < 100"
        )));
    }
    let m = neumann_matrix(v, length, grid_points)?;
    let n = m.count_below(cutoff);
    let lower = m.gershgorin_lower();
    Ok((0..n).map(|k| m.eigenvalue(k, lower, cutoff)).collect())
}

/// Finite-difference eigenvalues below `cutoff`; rejects grids whose count
/// disagrees with the phase count at the cutoff.
pub fn oracle_eigenvalues(
    v: &PearsonPotential,
    length: f64,
    grid_points: usize,
    cutoff: f64,
) -> Result<Vec<f64>> {
    let values = oracle_matrix_eigenvalues(v, length, grid_points, cutoff)?;
    let phase = eigenvalue_count(v, cutoff, length)?;
    if values.len() != phase {
        return Err(Error::InsufficientResolution {
            oracle: values.len(),
            phase,
            cutoff,
        });
    }
    Ok(values)
}
