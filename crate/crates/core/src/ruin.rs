//! Wiener–Hopf factors, ruin probabilities and barrier-reflected ruin
//! transforms for mixed-exponential models.
//!
//! With a completely monotone jump density every Wiener–Hopf factor is a
//! mixture of exponentials whose rates are the roots of `Psi(theta) = q`.
//! Weights are fixed by requiring the candidate to solve the generator
//! equation: each downward phase `vs_j` contributes a term
//! `exp(-vs_j x)` that must cancel, and a process that creeps downward
//! forces the tail to equal one at zero.

use serde::Serialize;

use crate::dividend::{ExpSum, Piece, PiecewiseFn};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::LevyModel;
use crate::roots::{all_roots, lundberg_r, real_roots};

/// Weights below this magnitude (relative to the total) count as zero in
/// the complete-monotonicity sign test.
const CM_WEIGHT_TOL: f64 = 1e-14;

/// Law of a nonnegative variable `Y` with
/// `P(Y > x) = sum_k w_k exp(-s_k x)` for `x >= 0` and an atom `atom0` at zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpMixture {
    atom0: f64,
    rates: Vec<f64>,
    weights: Vec<f64>,
}

impl ExpMixture {
    /// Rates must be positive and distinct; terms are sorted by rate.
    pub fn new(atom0: f64, rates: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if rates.len() != weights.len() {
            return Err(Error::InvalidArgument("rates and weights differ in length".into()));
        }
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidArgument("mixture rates must be finite and > 0".into()));
        }
        let mut pairs: Vec<(f64, f64)> = rates.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("mixture rates must be distinct".into()));
        }
        let (rates, weights) = pairs.into_iter().unzip();
        Ok(Self { atom0, rates, weights })
    }

    pub fn atom0(&self) -> f64 {
        self.atom0
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `P(Y > x)`; equals one for `x < 0` and the right limit at `x = 0`.
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        self.rates.iter().zip(&self.weights).map(|(s, w)| w * (-s * x).exp()).sum()
    }

    /// `n`-th derivative of the tail on `x >= 0`.
    pub fn derivative(&self, x: f64, n: u32) -> f64 {
        self.rates
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| w * (-s).powi(n as i32) * (-s * x).exp())
            .sum()
    }

    /// `exp(r x) P(Y > x)` evaluated without overflow.
    pub fn scaled_tail(&self, x: f64, r: f64) -> f64 {
        self.rates.iter().zip(&self.weights).map(|(s, w)| w * (-(s - r) * x).exp()).sum()
    }

    /// `E exp(-theta Y)` for `theta > -min rate`.
    pub fn laplace(&self, theta: f64) -> f64 {
        self.atom0 + self.rates.iter().zip(&self.weights).map(|(s, w)| w * s / (s + theta)).sum::<f64>()
    }

    pub fn total_mass(&self) -> f64 {
        self.atom0 + self.weights.iter().sum::<f64>()
    }

    /// `(rate, weight)` of the slowest-decaying component.
    pub fn slowest(&self) -> Option<(f64, f64)> {
        self.rates.first().copied().zip(self.weights.first().copied())
    }

    /// The tail on `x >= 0` as an exponential sum with exponents `-s_k`.
    pub fn to_exp_sum(&self) -> ExpSum {
        ExpSum::new(self.rates.iter().zip(&self.weights).map(|(s, w)| (*w, -s)))
    }
}

/// Law of `-inf_{t <= e_q} X_t`, `e_q` an independent Exp(q) time (`q = 0`: the all-time infimum).
pub fn wiener_hopf_minus(model: &LevyModel, q: f64) -> Result<ExpMixture> {
    let roots = real_roots(model, q)?;
    roots.require_simple()?;
    let betas: Vec<f64> = roots.negative_roots().iter().rev().map(|r| -r).collect();
    factor_from_roots(&betas, &model.down_rates(), model.creeps_down(), "downward factor")
}

/// Law of `sup_{t <= e_q} X_t` for `q > 0`.
pub fn wiener_hopf_plus(model: &LevyModel, q: f64) -> Result<ExpMixture> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InvalidArgument(format!("upward factor needs q > 0, got {q}")));
    }
    let roots = all_roots(model, q)?;
    roots.require_simple()?;
    factor_from_roots(&roots.positive_roots(), &model.up_rates(), model.creeps_up(), "upward factor")
}

/// Mixture weights for roots `betas` (as positive decay rates) against
/// the jump rates on the same side.
fn factor_from_roots(betas: &[f64], jump_rates: &[f64], creeps: bool, what: &str) -> Result<ExpMixture> {
    let mut rows: Vec<Vec<f64>> = jump_rates
        .iter()
        .map(|&r| betas.iter().map(|&b| r / (r - b)).collect())
        .collect();
    if creeps {
        rows.push(vec![1.0; betas.len()]);
    }
    let rhs = vec![1.0; rows.len()];
    let weights = linalg::solve(&rows, &rhs, what)?;
    let atom0 = if creeps { 0.0 } else { 1.0 - weights.iter().sum::<f64>() };
    ExpMixture::new(atom0, betas.to_vec(), weights)
}

/// Ruin probability `psi(x) = P(inf_t (x + X_t) <= 0)`.
pub fn ruin_probability(model: &LevyModel) -> Result<ExpMixture> {
    wiener_hopf_minus(model, 0.0)
}

/// Complete monotonicity of the tail: all weights nonnegative, confirmed by
/// sign checks of exact derivatives up to `max_order` on a log-spaced grid.
pub fn check_complete_monotonicity(mix: &ExpMixture, max_order: u32) -> bool {
    let scale: f64 = mix.weights.iter().map(|w| w.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    if mix.weights.iter().any(|&w| w < -CM_WEIGHT_TOL * scale) {
        return false;
    }
    let (Some(&s_min), Some(&s_max)) = (mix.rates.first(), mix.rates.last()) else {
        return true;
    };
    let (x_lo, x_hi) = (1e-3 / s_max, 50.0 / s_min);
    let n_grid = 200;
    (0..=max_order.max(1)).all(|n| {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        (0..n_grid).all(|i| {
            let x = x_lo * (x_hi / x_lo).powf(i as f64 / (n_grid - 1) as f64);
            let d = sign * mix.derivative(x, n);
            let mag = mix.rates.iter().zip(&mix.weights).map(|(s, w)| (w * s.powi(n as i32)).abs()).sum::<f64>();
            d >= -1e-12 * mag
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CramerReport {
    pub lundberg_r: f64,
    pub grid: Vec<f64>,
    /// `exp(R x) psi(x)` on the grid.
    pub scaled: Vec<f64>,
    /// `(max - min) / |mean|` of `scaled` over the top half of the grid.
    pub relative_variation: f64,
    /// Weight of the mixture component with rate `R`, the limit of `scaled`.
    pub limit: Option<f64>,
}

/// Exponential decay check `exp(R x) psi(x) -> const`.
pub fn cramer_check(model: &LevyModel, grid: &[f64]) -> Result<CramerReport> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) || grid[0] <= 0.0 {
        return Err(Error::InvalidArgument("grid must be nonempty, positive and increasing".into()));
    }
    let r = lundberg_r(model)?;
    let psi = ruin_probability(model)?;
    let scaled: Vec<f64> = grid.iter().map(|&x| psi.scaled_tail(x, r)).collect();
    let top = &scaled[scaled.len() / 2..];
    let (lo, hi) = top.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mean = top.iter().sum::<f64>() / top.len() as f64;
    let limit = psi
        .rates
        .iter()
        .zip(&psi.weights)
        .find(|(s, _)| (*s - r).abs() <= 1e-9 * r)
        .map(|(_, w)| *w);
    Ok(CramerReport { lundberg_r: r, grid: grid.to_vec(), scaled, relative_variation: (hi - lo) / mean.abs(), limit })
}

/// `g(x) = E_x exp(-q tau_b)` for the process reflected at `b` from above.
///
/// On `[0, b]` `g` is an exponential sum over every real root of
/// `Psi(gamma) = q`; below zero it is one and above `b` it equals `g(b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierRuinTransform {
    b: f64,
    q: f64,
    body: ExpSum,
}

impl BarrierRuinTransform {
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn body(&self) -> &ExpSum {
        &self.body
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            1.0
        } else {
            self.body.eval(x.min(self.b))
        }
    }

    pub fn to_piecewise(&self) -> PiecewiseFn {
        PiecewiseFn::new(
            vec![0.0, self.b],
            vec![Piece::constant(1.0), Piece::exp_sum(self.body.clone()), Piece::constant(self.body.eval(self.b))],
        )
        .expect("0 < b")
    }
}

/// Solve for the barrier ruin transform.
///
/// Boundary conditions: matching into `(-inf, 0]` for each down phase,
/// matching into `[b, inf)` for each up phase, `g(0) = 1` when the process
/// creeps down and `g'(b) = 0` when it creeps up.
pub fn barrier_ruin_laplace(model: &LevyModel, b: f64, q: f64) -> Result<BarrierRuinTransform> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidArgument(format!("barrier must be > 0, got {b}")));
    }
    let roots = all_roots(model, q)?;
    roots.require_simple()?;
    let rs = roots.values();
    // basis exp(r (x - anchor)) keeps every matrix entry bounded
    let anchor = |r: f64| if r > 0.0 { b } else { 0.0 };
    let at0: Vec<f64> = rs.iter().map(|&r| (-r * anchor(r)).exp()).collect();
    let atb: Vec<f64> = rs.iter().map(|&r| (r * (b - anchor(r))).exp()).collect();

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for vs in model.down_rates() {
        rows.push(rs.iter().zip(&at0).map(|(&r, e)| e * vs / (vs + r)).collect());
        rhs.push(1.0);
    }
    for eta in model.up_rates() {
        rows.push(rs.iter().zip(&atb).map(|(&r, e)| e * r / (eta - r)).collect());
        rhs.push(0.0);
    }
    if model.creeps_down() {
        rows.push(at0.clone());
        rhs.push(1.0);
    }
    if model.creeps_up() {
        rows.push(rs.iter().zip(&atb).map(|(&r, e)| e * r).collect());
        rhs.push(0.0);
    }
    let scaled = linalg::solve(&rows, &rhs, "barrier ruin boundary system")?;
    let body = ExpSum::new(rs.iter().zip(scaled.iter().zip(&at0)).map(|(&r, (d, e))| (d * e, r)));
    Ok(BarrierRuinTransform { b, q, body })
}
