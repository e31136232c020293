//! Piecewise exponential-plus-affine functions and the generator of a
//! mixed-exponential Lévy model applied to them in closed form.

use serde::Serialize;

use super::ExpSum;
use crate::error::{Error, Result};
use crate::model::LevyModel;

/// `exp(x) sum + intercept + slope * x` on one interval.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Piece {
    pub exp: ExpSum,
    pub intercept: f64,
    pub slope: f64,
}

impl Piece {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self { exp: ExpSum::default(), intercept: value, slope: 0.0 }
    }

    pub fn affine(intercept: f64, slope: f64) -> Self {
        Self { exp: ExpSum::default(), intercept, slope }
    }

    pub fn exp_sum(exp: ExpSum) -> Self {
        Self { exp, intercept: 0.0, slope: 0.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.exp.eval(x) + self.intercept + self.slope * x
    }

    pub fn eval_deriv(&self, x: f64, n: u32) -> f64 {
        let affine = match n {
            0 => self.intercept + self.slope * x,
            1 => self.slope,
            _ => 0.0,
        };
        self.exp.eval_deriv(x, n) + affine
    }
}

/// Right-continuous piecewise function: `pieces[i]` lives on
/// `[breaks[i-1], breaks[i])` with `breaks[-1] = -inf`, `breaks[len] = +inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFn {
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
}

impl PiecewiseFn {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.len() != breaks.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} pieces need {} breakpoints, got {}",
                pieces.len(),
                pieces.len().saturating_sub(1),
                breaks.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("breakpoints must be finite and strictly increasing".into()));
        }
        Ok(Self { breaks, pieces })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn index(&self, x: f64) -> usize {
        self.breaks.partition_point(|&b| b <= x)
    }

    /// Interval `[lo, hi)` of piece `i`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { f64::NEG_INFINITY } else { self.breaks[i - 1] };
        let hi = self.breaks.get(i).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.index(x)].eval(x)
    }

    /// Right derivative of order `n`.
    pub fn eval_deriv(&self, x: f64, n: u32) -> f64 {
        self.pieces[self.index(x)].eval_deriv(x, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    /// `(Gamma - delta) f (x)`.
    pub value: f64,
    /// `x` sits on a breakpoint and derivatives were taken from the right.
    pub one_sided: bool,
}

/// `(Gamma f)(x) - delta f(x)` with the jump integrals done in closed form.
pub fn generator_residual(model: &LevyModel, f: &PiecewiseFn, delta: f64, x: f64) -> Result<Residual> {
    let value = generator(model, f, x)? - delta * f.eval(x);
    Ok(Residual { value, one_sided: f.breaks.contains(&x) })
}

/// `(Gamma f)(x) = sigma^2/2 f'' + c f' + lambda int [f(x+y) - f(x)] F(dy)`.
pub fn generator(model: &LevyModel, f: &PiecewiseFn, x: f64) -> Result<f64> {
    let s2 = model.sigma() * model.sigma();
    let fx = f.eval(x);
    let mut total = 0.5 * s2 * f.eval_deriv(x, 2) + model.drift() * f.eval_deriv(x, 1);
    for (rate, m) in model.up_intensities() {
        total += m * (up_expectation(f, x, rate)? - fx);
    }
    for (rate, m) in model.down_intensities() {
        total += m * (down_expectation(f, x, rate)? - fx);
    }
    Ok(total)
}

/// `expm1(t) / t`, continuous at zero.
fn exprel(t: f64) -> f64 {
    if t.abs() < 1e-300 {
        1.0
    } else {
        t.exp_m1() / t
    }
}

/// `int_0^inf f(x + u) r exp(-r u) du`.
pub fn up_expectation(f: &PiecewiseFn, x: f64, rate: f64) -> Result<f64> {
    let mut total = 0.0;
    for (i, piece) in f.pieces.iter().enumerate() {
        let (lo, hi) = f.interval(i);
        let z1 = lo.max(x);
        if z1 >= hi {
            continue;
        }
        let (u1, u2) = (z1 - x, hi - x);
        for t in piece.exp.terms() {
            let g = t.exponent;
            total += if u2.is_infinite() {
                if g >= rate {
                    return Err(Error::DivergentIntegral { exponent: g, rate });
                }
                t.coefficient * rate * (g * z1 - rate * u1).exp() / (rate - g)
            } else {
                // anchor at the end where the integrand is largest
                let k = (g - rate) * (u2 - u1);
                let (z, u) = if k <= 0.0 { (z1, u1) } else { (hi, u2) };
                t.coefficient * rate * (g * z - rate * u).exp() * (u2 - u1) * exprel(-k.abs())
            };
        }
        let a = piece.intercept + piece.slope * x;
        let b = piece.slope;
        let prim = |u: f64| (-rate * u).exp() * (a + b * u + b / rate);
        total += prim(u1) - if u2.is_infinite() { 0.0 } else { prim(u2) };
    }
    Ok(total)
}

/// `int_0^inf f(x - u) r exp(-r u) du`.
pub fn down_expectation(f: &PiecewiseFn, x: f64, rate: f64) -> Result<f64> {
    let mut total = 0.0;
    for (i, piece) in f.pieces.iter().enumerate() {
        let (lo, hi) = f.interval(i);
        let z_hi = hi.min(x);
        if lo >= z_hi {
            continue;
        }
        let (u1, u2) = (x - z_hi, x - lo);
        for t in piece.exp.terms() {
            let g = t.exponent;
            total += if u2.is_infinite() {
                if g + rate <= 0.0 {
                    return Err(Error::DivergentIntegral { exponent: g, rate: -rate });
                }
                t.coefficient * rate * (g * z_hi - rate * u1).exp() / (g + rate)
            } else {
                let k = -(g + rate) * (u2 - u1);
                let (z, u) = if k <= 0.0 { (z_hi, u1) } else { (lo, u2) };
                t.coefficient * rate * (g * z - rate * u).exp() * (u2 - u1) * exprel(-k.abs())
            };
        }
        let a = piece.intercept + piece.slope * x;
        let b = piece.slope;
        let prim = |u: f64| (-rate * u).exp() * (a - b * u - b / rate);
        total += prim(u1) - if u2.is_infinite() { 0.0 } else { prim(u2) };
    }
    Ok(total)
}
