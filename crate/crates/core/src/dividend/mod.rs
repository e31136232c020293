//! The harmonic function `h`, the optimal barrier `b*`, barrier value
//! functions and the verification conditions for barrier optimality.
//!
//! With `rho = rho(delta)` and `psi~` the ruin probability of the model
//! tilted by `rho`, `h(x) = (1 - psi~(x)) exp(rho x)` solves
//! `(Gamma - delta) h = 0` on `(0, inf)` with `h = 0` below zero. The value
//! of paying out everything above `b` is `h(x) / h'(b)` up to `b` and grows
//! linearly beyond it.

mod expsum;
mod generator;

use serde::Serialize;

pub use expsum::{ExpSum, ExpTerm};
pub use generator::{down_expectation, generator, generator_residual, up_expectation, Piece, PiecewiseFn, Residual};

use crate::error::{Error, Result};
use crate::model::LevyModel;
use crate::roots::{rho, safeguarded_root};
use crate::ruin::{ruin_probability, ExpMixture};

/// Tolerance on `|(Gamma - delta) V|` below the barrier and on its positive part above.
pub const HJB_RESIDUAL_TOL: f64 = 1e-8;
/// Tolerance on `1 - V'`.
pub const HJB_SLOPE_TOL: f64 = 1e-12;

/// Grid size of the coarse search for the minimiser of `h'`.
const B_STAR_GRID: usize = 4_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DividendSolution {
    delta: f64,
    rho: f64,
    model: LevyModel,
    tilted: LevyModel,
    tilted_ruin: ExpMixture,
    h: ExpSum,
    b_star: f64,
    b_star_warning: bool,
}

/// Solve the barrier problem for discount rate `delta`.
pub fn build_h(model: &LevyModel, delta: f64) -> Result<DividendSolution> {
    DividendSolution::new(model, delta)
}

impl DividendSolution {
    pub fn new(model: &LevyModel, delta: f64) -> Result<Self> {
        let rho = rho(model, delta)?;
        let tilted = model.tilt(rho)?;
        let tilted_ruin = ruin_probability(&tilted)?;
        let mut terms = vec![(1.0, rho)];
        terms.extend(tilted_ruin.rates().iter().zip(tilted_ruin.weights()).map(|(s, w)| (-w, rho - s)));
        let h = ExpSum::new(terms);
        let (b_star, b_star_warning) = find_b_star(&h, rho);
        Ok(Self { delta, rho, model: model.clone(), tilted, tilted_ruin, h, b_star, b_star_warning })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn tilted(&self) -> &LevyModel {
        &self.tilted
    }

    pub fn tilted_ruin(&self) -> &ExpMixture {
        &self.tilted_ruin
    }

    /// `h` on `[0, inf)`.
    pub fn h(&self) -> &ExpSum {
        &self.h
    }

    pub fn b_star(&self) -> f64 {
        self.b_star
    }

    /// Set when `h'` showed more than one local minimum on the search grid.
    pub fn b_star_warning(&self) -> bool {
        self.b_star_warning
    }

    /// `h^(n)(x)`, with `h = 0` on `(-inf, 0)`.
    pub fn h_deriv(&self, x: f64, n: u32) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.h.eval_deriv(x, n)
        }
    }

    /// `h` as a piecewise function (zero below the origin).
    pub fn h_piecewise(&self) -> PiecewiseFn {
        PiecewiseFn::new(vec![0.0], vec![Piece::zero(), Piece::exp_sum(self.h.clone())]).expect("one breakpoint")
    }

    pub fn barrier_value(&self, b: f64) -> Result<BarrierValue> {
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidArgument(format!("barrier must be finite and >= 0, got {b}")));
        }
        let slope = self.h.eval_deriv(b, 1);
        if !(slope > 0.0) {
            return Err(Error::InvalidArgument(format!("h'({b}) = {slope} is not positive")));
        }
        Ok(BarrierValue { b, body: self.h.scale(1.0 / slope), top: self.h.eval(b) / slope })
    }
}

/// Global minimiser of `h'` on `[0, inf)` and a flag for multiple local minima.
fn find_b_star(h: &ExpSum, rho: f64) -> (f64, bool) {
    let d1 = |x: f64| h.eval_deriv(x, 1);
    let d2 = |x: f64| h.eval_deriv(x, 2);
    let d3 = |x: f64| h.eval_deriv(x, 3);
    let top = 60.0 / rho;
    let first = top * 1e-7;
    let mut grid = vec![0.0];
    grid.extend((0..B_STAR_GRID).map(|i| first * (top / first).powf(i as f64 / (B_STAR_GRID - 1) as f64)));
    let vals: Vec<f64> = grid.iter().map(|&x| d1(x)).collect();

    let mut local_minima = usize::from(vals[0] <= vals[1]);
    local_minima += (1..vals.len() - 1).filter(|&i| vals[i] < vals[i - 1] && vals[i] <= vals[i + 1]).count();
    let warning = local_minima > 1;

    // last index attaining the minimum: b* is the sup of the minimisers
    let best = (0..vals.len()).fold(0, |k, i| if vals[i] <= vals[k] { i } else { k });
    if best == 0 && d2(0.0) >= 0.0 {
        return (0.0, warning);
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (s_lo, s_hi) = (d2(lo), d2(hi));
    if s_lo < 0.0 && s_hi > 0.0 {
        (safeguarded_root(d2, d3, lo, hi, -1.0), warning)
    } else if s_lo == 0.0 {
        (lo, warning)
    } else if s_hi == 0.0 {
        (hi, warning)
    } else {
        // no sign change bracketed: keep the grid minimiser
        (grid[best], true)
    }
}

/// `V_b(x)`: `h(x) / h'(b)` on `[0, b]`, `x - b + h(b) / h'(b)` above, zero below.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierValue {
    b: f64,
    body: ExpSum,
    top: f64,
}

impl BarrierValue {
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if x <= self.b {
            self.body.eval(x)
        } else {
            x - self.b + self.top
        }
    }

    /// Right derivative of order `n`.
    pub fn eval_deriv(&self, x: f64, n: u32) -> f64 {
        if n == 0 {
            self.eval(x)
        } else if x < 0.0 {
            0.0
        } else if x < self.b {
            self.body.eval_deriv(x, n)
        } else if n == 1 {
            1.0
        } else {
            0.0
        }
    }

    pub fn to_piecewise(&self) -> PiecewiseFn {
        let upper = Piece::affine(self.top - self.b, 1.0);
        if self.b > 0.0 {
            PiecewiseFn::new(vec![0.0, self.b], vec![Piece::zero(), Piece::exp_sum(self.body.clone()), upper])
        } else {
            PiecewiseFn::new(vec![0.0], vec![Piece::zero(), upper])
        }
        .expect("0 < b")
    }
}

/// `V_b(x)` for the solution's `h`.
pub fn value_barrier(solution: &DividendSolution, b: f64, x: f64) -> Result<f64> {
    Ok(solution.barrier_value(b)?.eval(x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HjbReport {
    pub b: f64,
    pub grid: Vec<f64>,
    pub value: Vec<f64>,
    pub vprime: Vec<f64>,
    /// `(Gamma - delta) V_b(x)`.
    pub residual: Vec<f64>,
    pub vprime_minus_one: Vec<f64>,
    /// Derivatives taken from the right at a breakpoint.
    pub one_sided: Vec<bool>,
    /// Grid indices breaking one of the conditions.
    pub violations: Vec<usize>,
    /// `max |residual|` over grid points in `(0, b)`.
    pub max_abs_residual_below: f64,
    /// `max residual` over grid points at or above `b`.
    pub max_residual_above: f64,
    pub min_vprime_minus_one: f64,
    /// The model has upward jumps, which may overshoot the barrier.
    pub two_sided: bool,
    pub pass: bool,
}

/// Check `(Gamma - delta) V_b = 0` on `(0, b)`, `(Gamma - delta) V_b <= 0`
/// above `b` and `V_b' >= 1` on the grid.
pub fn hjb_verify(solution: &DividendSolution, b: f64, grid: &[f64]) -> Result<HjbReport> {
    if grid.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(Error::InvalidArgument("verification grid must lie in (0, inf)".into()));
    }
    let v = solution.barrier_value(b)?;
    let pw = v.to_piecewise();
    let n = grid.len();
    let mut report = HjbReport {
        b,
        grid: grid.to_vec(),
        value: Vec::with_capacity(n),
        vprime: Vec::with_capacity(n),
        residual: Vec::with_capacity(n),
        vprime_minus_one: Vec::with_capacity(n),
        one_sided: Vec::with_capacity(n),
        violations: Vec::new(),
        max_abs_residual_below: 0.0,
        max_residual_above: f64::NEG_INFINITY,
        min_vprime_minus_one: f64::INFINITY,
        two_sided: !solution.model.is_spectrally_negative(),
        pass: true,
    };
    for (i, &x) in grid.iter().enumerate() {
        let r = generator_residual(&solution.model, &pw, solution.delta, x)?;
        let dv = v.eval_deriv(x, 1);
        let bad = if x < b {
            report.max_abs_residual_below = report.max_abs_residual_below.max(r.value.abs());
            r.value.abs() > HJB_RESIDUAL_TOL
        } else {
            report.max_residual_above = report.max_residual_above.max(r.value);
            r.value > HJB_RESIDUAL_TOL
        };
        report.min_vprime_minus_one = report.min_vprime_minus_one.min(dv - 1.0);
        if bad || dv - 1.0 < -HJB_SLOPE_TOL {
            report.violations.push(i);
        }
        report.value.push(v.eval(x));
        report.vprime.push(dv);
        report.residual.push(r.value);
        report.vprime_minus_one.push(dv - 1.0);
        report.one_sided.push(r.one_sided);
    }
    report.pass = report.violations.is_empty();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub b_grid: Vec<f64>,
    pub x_eval: Vec<f64>,
    /// `values[i][j] = V_{b_grid[i]}(x_eval[j])`.
    pub values: Vec<Vec<f64>>,
    /// Maximising barrier for each `x_eval[j]` (first one on ties).
    pub argmax: Vec<f64>,
}

/// Tabulate `V_b(x)` over a barrier grid.
pub fn barrier_sweep(solution: &DividendSolution, x_eval: &[f64], b_grid: &[f64]) -> Result<SweepTable> {
    if x_eval.is_empty() || b_grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grids must be nonempty".into()));
    }
    let values = b_grid
        .iter()
        .map(|&b| {
            let v = solution.barrier_value(b)?;
            Ok(x_eval.iter().map(|&x| v.eval(x)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let argmax = (0..x_eval.len())
        .map(|j| {
            let best = (0..b_grid.len()).fold(0, |k, i| if values[i][j] > values[k][j] { i } else { k });
            b_grid[best]
        })
        .collect();
    Ok(SweepTable { b_grid: b_grid.to_vec(), x_eval: x_eval.to_vec(), values, argmax })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleCheckReport {
    pub thetas: Vec<f64>,
    /// `int_0^inf exp(-theta x) h(x) dx`.
    pub transforms: Vec<f64>,
    /// `transform * (Psi(theta) - delta)`.
    pub k_values: Vec<f64>,
    /// `(max K - min K) / |mean K|`.
    pub relative_spread: f64,
}

/// Check that `h` is proportional to the `delta`-scale function through its Laplace transform.
pub fn scale_laplace_check(solution: &DividendSolution, thetas: &[f64]) -> Result<ScaleCheckReport> {
    if !solution.model.is_spectrally_negative() {
        return Err(Error::NotSpectrallyNegative);
    }
    if thetas.is_empty() {
        return Err(Error::InvalidArgument("no theta values".into()));
    }
    let mut transforms = Vec::with_capacity(thetas.len());
    let mut k_values = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let t = solution
            .h
            .laplace(theta)
            .filter(|_| theta > solution.rho)
            .ok_or_else(|| Error::InvalidArgument(format!("theta = {theta} must exceed rho = {}", solution.rho)))?;
        transforms.push(t);
        k_values.push(t * (solution.model.laplace_exponent(theta)? - solution.delta));
    }
    let (lo, hi) = k_values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| (a.min(k), b.max(k)));
    let mean = k_values.iter().sum::<f64>() / k_values.len() as f64;
    Ok(ScaleCheckReport { thetas: thetas.to_vec(), transforms, k_values, relative_spread: (hi - lo) / mean.abs() })
}
