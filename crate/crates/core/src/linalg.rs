use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest admissible ratio between the extreme pivots of the LU factor.
const PIVOT_RATIO_TOL: f64 = 1e-14;

/// Solve a dense square system given row-wise.
pub(crate) fn solve(rows: &[Vec<f64>], rhs: &[f64], what: &str) -> Result<Vec<f64>> {
    let n = rhs.len();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DegenerateSystem(format!(
            "{what}: {} equations for {} unknowns",
            rows.len(),
            rows.first().map_or(0, Vec::len)
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let lu = a.lu();
    let pivots = lu.u().diagonal();
    let (min, max) = pivots
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.abs()), hi.max(p.abs())));
    if !(min > PIVOT_RATIO_TOL * max) {
        return Err(Error::DegenerateSystem(format!("{what}: singular matrix (pivot ratio {:e})", min / max)));
    }
    let x = lu
        .solve(&DVector::from_column_slice(rhs))
        .ok_or_else(|| Error::DegenerateSystem(format!("{what}: singular matrix")))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSystem(format!("{what}: non-finite solution")));
    }
    Ok(x.iter().copied().collect())
}
