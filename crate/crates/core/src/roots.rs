//! Real solutions of `Psi(theta) = q` for rational Laplace exponents.
//!
//! The rational continuation of `Psi` has simple poles at the up rates
//! `eta_j` and at `-vs_j`. Between consecutive poles it runs from one
//! infinity to the other and crosses the level `q` exactly once; on the
//! interval containing the origin (the domain proper) it is strictly convex
//! and crosses a positive level twice. Every interval is handled by a
//! bracketed search, so no root can be missed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::LevyModel;

/// Level-set tolerance used to flag tangencies.
const TANGENCY_TOL: f64 = 1e-14;
const MAX_ITER: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: f64,
    /// Tangency of `Psi` with the level (multiplicity two).
    pub double: bool,
}

/// All real roots of `Psi(theta) = q`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    q: f64,
    roots: Vec<Root>,
    domain: (f64, f64),
}

impl RootSet {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value).collect()
    }

    /// The root in `(0, min eta_j)`, i.e. `sup{theta : Psi(theta) = q}` over the domain.
    pub fn positive_root(&self) -> Option<f64> {
        self.roots
            .iter()
            .map(|r| r.value)
            .filter(|&v| v > 0.0 && v < self.domain.1)
            .last()
    }

    /// Roots strictly below zero, ascending.
    pub fn negative_roots(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value).filter(|&v| v < 0.0).collect()
    }

    /// Roots strictly above zero, ascending (including those beyond the up poles).
    pub fn positive_roots(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value).filter(|&v| v > 0.0).collect()
    }

    /// Location of the first tangency, if any.
    pub fn double_root(&self) -> Option<f64> {
        self.roots.iter().find(|r| r.double).map(|r| r.value)
    }

    /// Error if any root is a tangency.
    pub fn require_simple(&self) -> Result<&Self> {
        match self.double_root() {
            Some(root) => Err(Error::DoubleRoot { q: self.q, root }),
            None => Ok(self),
        }
    }
}

/// Every real root of `Psi(theta) = q`.
///
/// For `q = 0` the net profit condition `Psi'(0) > 0` is required.
pub fn real_roots(model: &LevyModel, q: f64) -> Result<RootSet> {
    if q == 0.0 {
        check_net_profit(model)?;
    }
    all_roots(model, q)
}

pub(crate) fn check_net_profit(model: &LevyModel) -> Result<()> {
    let mean = model.mean();
    if mean > 0.0 {
        Ok(())
    } else {
        Err(Error::NetProfit { mean })
    }
}

/// `rho(delta) = sup{theta : Psi(theta) = delta}`.
pub fn rho(model: &LevyModel, delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument(format!("discount rate must be > 0, got {delta}")));
    }
    all_roots(model, delta)?.positive_root().ok_or(Error::RhoUndefined { delta })
}

/// Lundberg coefficient: the `R > 0` with `Psi(-R) = 0`.
pub fn lundberg_r(model: &LevyModel) -> Result<f64> {
    check_net_profit(model)?;
    let lo = model.domain().0;
    all_roots(model, 0.0)?
        .negative_roots()
        .into_iter()
        .filter(|&v| v > lo)
        .next_back()
        .map(|v| -v)
        .ok_or(Error::CramerFails)
}

/// Interior minimiser of `Psi` over its domain, if one exists.
pub fn exponent_minimizer(model: &LevyModel) -> Option<f64> {
    let (lo, hi) = model.domain();
    let (dlo, dhi) = (derivative_end_sign(model, lo, true), derivative_end_sign(model, hi, false));
    if dlo < 0.0 && dhi > 0.0 {
        let (a, b) = finite_bracket(|t| model.exponent_extended_deriv(t, 1), lo, hi, dlo, dhi).ok()?;
        Some(safeguarded_root(
            |t| model.exponent_extended_deriv(t, 1),
            |t| model.exponent_extended_deriv(t, 2),
            a,
            b,
            dlo,
        ))
    } else {
        None
    }
}

/// Roots without the net-profit precondition (used by the barrier transforms).
pub(crate) fn all_roots(model: &LevyModel, q: f64) -> Result<RootSet> {
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::InvalidArgument(format!("level q must be finite and >= 0, got {q}")));
    }
    if model.sigma() == 0.0 && model.drift() == 0.0 && model.lambda() == 0.0 {
        return Err(Error::InvalidModel("degenerate model: Psi is identically zero".into()));
    }
    let f = |t: f64| model.exponent_extended(t) - q;
    let df = |t: f64| model.exponent_extended_deriv(t, 1);

    let mut bounds = vec![f64::NEG_INFINITY];
    bounds.extend(model.poles());
    bounds.push(f64::INFINITY);

    let mut roots = Vec::new();
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (sa, sb) = (value_end_sign(model, q, a, true), value_end_sign(model, q, b, false));
        if a < 0.0 && b > 0.0 {
            domain_roots(model, q, (a, b), (sa, sb), &mut roots)?;
        } else if sa != sb {
            let (lo, hi) = finite_bracket(f, a, b, sa, sb)?;
            roots.push(Root { value: safeguarded_root(f, df, lo, hi, sa), double: false });
        }
    }
    Ok(RootSet { q, roots, domain: model.domain() })
}

fn domain_roots(
    model: &LevyModel,
    q: f64,
    (a, b): (f64, f64),
    (sa, sb): (f64, f64),
    out: &mut Vec<Root>,
) -> Result<()> {
    let f = |t: f64| model.exponent_extended(t) - q;
    let df = |t: f64| model.exponent_extended_deriv(t, 1);

    // Psi is convex here: split at the minimiser, if it is interior.
    let (dsa, dsb) = (derivative_end_sign(model, a, true), derivative_end_sign(model, b, false));
    let split = if dsa < 0.0 && dsb > 0.0 {
        let (lo, hi) = finite_bracket(df, a, b, dsa, dsb)?;
        Some(safeguarded_root(df, |t| model.exponent_extended_deriv(t, 2), lo, hi, dsa))
    } else {
        None
    };

    match split {
        Some(m) => {
            let fm = f(m);
            if fm.abs() <= TANGENCY_TOL * (1.0 + q.abs()) {
                out.push(Root { value: if q == 0.0 { 0.0 } else { m }, double: true });
                return Ok(());
            }
            if fm > 0.0 {
                return Ok(());
            }
            if sa > 0.0 {
                let value = if q == 0.0 && m > 0.0 {
                    0.0
                } else {
                    let (lo, hi) = finite_bracket(f, a, m, sa, -1.0)?;
                    safeguarded_root(f, df, lo, hi, sa)
                };
                out.push(Root { value, double: false });
            }
            if sb > 0.0 {
                let value = if q == 0.0 && m < 0.0 {
                    0.0
                } else {
                    let (lo, hi) = finite_bracket(f, m, b, -1.0, sb)?;
                    safeguarded_root(f, df, lo, hi, -1.0)
                };
                out.push(Root { value, double: false });
            }
        }
        None if sa != sb => {
            let value = if q == 0.0 {
                0.0
            } else {
                let (lo, hi) = finite_bracket(f, a, b, sa, sb)?;
                safeguarded_root(f, df, lo, hi, sa)
            };
            out.push(Root { value, double: false });
        }
        None => {}
    }
    Ok(())
}

/// Sign of `Psi - q` next to an interval end (`from_right`: approaching `end` from above).
fn value_end_sign(model: &LevyModel, q: f64, end: f64, from_right: bool) -> f64 {
    if end.is_finite() {
        // Down poles (negative) blow up to +inf from the right, up poles from the left.
        return if (end < 0.0) == from_right { 1.0 } else { -1.0 };
    }
    let (c, sigma) = (model.drift(), model.sigma());
    if sigma > 0.0 {
        1.0
    } else if c != 0.0 {
        if (end > 0.0) == (c > 0.0) {
            1.0
        } else {
            -1.0
        }
    } else {
        // Psi tends to -lambda, strictly below any q >= 0.
        let _ = q;
        -1.0
    }
}

/// Sign of `Psi'` next to an end of the domain.
fn derivative_end_sign(model: &LevyModel, end: f64, from_right: bool) -> f64 {
    if end.is_finite() {
        return if from_right { -1.0 } else { 1.0 };
    }
    if model.sigma() > 0.0 {
        return if end > 0.0 { 1.0 } else { -1.0 };
    }
    // Psi' -> c, approached from above by the jump terms.
    if model.drift() >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Replace infinite ends by finite points carrying the asymptotic sign.
fn finite_bracket<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, sa: f64, sb: f64) -> Result<(f64, f64)> {
    let extend = |anchor: f64, dir: f64, want: f64| -> Result<f64> {
        let mut step = 1.0 + anchor.abs();
        for _ in 0..MAX_ITER {
            let t = anchor + dir * step;
            if !t.is_finite() {
                break;
            }
            if f(t).signum() == want {
                return Ok(t);
            }
            step *= 2.0;
        }
        Err(Error::InvalidModel("could not bracket a root of the Laplace exponent".into()))
    };
    let lo = if a.is_finite() { a } else { extend(if b.is_finite() { b } else { 0.0 }, -1.0, sa)? };
    let hi = if b.is_finite() { b } else { extend(if a.is_finite() { a } else { 0.0 }, 1.0, sb)? };
    Ok((lo, hi))
}

/// Newton iteration safeguarded by bisection on the open bracket `(lo, hi)`.
///
/// `sign_lo` is the sign of `f` just inside `lo`; the ends themselves are
/// never evaluated, so they may be poles.
pub(crate) fn safeguarded_root<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, sign_lo: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = lo + 0.5 * (hi - lo);
    let mut fx = f(x);
    let (mut best, mut best_abs) = (x, fx.abs());
    let mut prev_abs = f64::INFINITY;
    for _ in 0..MAX_ITER {
        if fx == 0.0 {
            return x;
        }
        if fx.signum() == sign_lo {
            lo = x;
        } else {
            hi = x;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let newton = x - fx / df(x);
        let next = if newton.is_finite() && newton > lo && newton < hi && fx.abs() < 0.5 * prev_abs {
            newton
        } else {
            mid
        };
        if next == x {
            break;
        }
        prev_abs = fx.abs();
        x = next;
        fx = f(x);
        if fx.abs() < best_abs {
            best = x;
            best_abs = fx.abs();
        }
    }
    best
}
