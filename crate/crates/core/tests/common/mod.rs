//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use levy_dividend::dividend::PiecewiseFn;
use levy_dividend::model::{presets, LevyModel};

/// The three reference models with a short label.
pub fn instances() -> Vec<(&'static str, LevyModel)> {
    vec![
        ("brownian", presets::brownian_unit()),
        ("exp-claims", presets::exponential_claims()),
        ("double-exp", presets::double_exponential()),
    ]
}

const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XK[i];
        let s = f(c - dx) + f(c + dx);
        k += WK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature on a finite interval, to an
/// absolute tolerance or a relative accuracy of 1e-15.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || err <= 1e-15 * v.abs() || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    rec(f, a, b, tol, 30)
}

/// Integral over `[a, inf)` of an integrand decaying at least like `exp(-decay x)`.
pub fn integrate_tail(f: &dyn Fn(f64) -> f64, a: f64, decay: f64, tol: f64) -> f64 {
    let len = 50.0 / decay;
    (0..8).map(|i| integrate(f, a + i as f64 * len / 8.0, a + (i + 1) as f64 * len / 8.0, tol / 8.0)).sum()
}

/// Plain bisection on a sign change of `f` in `[a, b]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    assert!(fa * f(b) < 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Natural-drift Laplace exponent evaluated from the definition with the jump
/// transform done by quadrature.
pub fn laplace_exponent_quadrature(model: &LevyModel, theta: f64) -> f64 {
    let s = model.sigma();
    let mut v = model.drift() * theta + 0.5 * s * s * theta * theta;
    if let Some(j) = model.jumps() {
        let lam = j.lambda();
        let (lo, hi) = model.domain();
        let up = |y: f64| ((theta * y).exp() - 1.0) * j.density(y);
        let down = |y: f64| ((-theta * y).exp() - 1.0) * j.density(-y);
        if hi.is_finite() {
            v += lam * integrate_tail(&up, 0.0, (hi - theta).min(hi), 1e-14);
        }
        if lo.is_finite() {
            v += lam * integrate_tail(&down, 0.0, (theta - lo).min(-lo), 1e-14);
        }
    }
    v
}

/// `E exp(-theta Y)` from the Wiener–Hopf product formula, `Y` the
/// negated infimum: `prod (1 + theta/vs_j) / prod (1 + theta/beta_k)`.
pub fn minus_factor_product(down_rates: &[f64], betas: &[f64], theta: f64) -> f64 {
    let num: f64 = down_rates.iter().map(|r| 1.0 + theta / r).product();
    let den: f64 = betas.iter().map(|b| 1.0 + theta / b).product();
    num / den
}

/// Generator `(Gamma - delta) f (x)` with the jump integrals done by quadrature,
/// split at the breakpoints of `f`; local terms use right derivatives.
pub fn generator_quadrature(model: &LevyModel, f: &PiecewiseFn, delta: f64, x: f64) -> f64 {
    let s2 = model.sigma().powi(2);
    let fx = f.eval(x);
    let mut total = 0.5 * s2 * f.eval_deriv(x, 2) + model.drift() * f.eval_deriv(x, 1) - delta * fx;
    let Some(j) = model.jumps() else { return total };
    // only the unbounded top piece matters for the decay of the upward tail
    let growth = f.pieces().last().map_or(0.0, |p| p.exp.terms().iter().map(|t| t.exponent).fold(0.0f64, f64::max));
    for (sign, rates) in [(1.0, model.up_rates()), (-1.0, model.down_rates())] {
        let Some(&slowest) = rates.first() else { continue };
        let side = |y: f64| (f.eval(x + sign * y) - fx) * j.density(sign * y);
        // split at the points where x + sign*y crosses a breakpoint
        let mut cuts: Vec<f64> = f.breaks().iter().map(|b| sign * (b - x)).filter(|&u| u > 0.0).collect();
        cuts.sort_by(f64::total_cmp);
        let mut lo = 0.0;
        let mut acc = 0.0;
        for c in cuts {
            acc += integrate(&side, lo, c, 1e-15);
            lo = c;
        }
        let decay = if sign > 0.0 { slowest - growth } else { slowest };
        acc += integrate_tail(&side, lo, decay.max(1e-3), 1e-15);
        total += j.lambda() * acc;
    }
    total
}

/// Log-spaced points in `(lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

use levy_dividend::model::{JumpMixtureSpec, Phase};
use proptest::prelude::*;

fn phases(max: usize) -> impl Strategy<Value = Vec<Phase>> {
    proptest::collection::vec((0.05f64..1.0, 0.3f64..8.0), 0..=max).prop_map(|raw| {
        // spread rates so they stay distinct after sorting
        let total: f64 = raw.iter().map(|p| p.0).sum();
        raw.iter().enumerate().map(|(i, &(w, r))| Phase::new(w / total, r + 1.3 * i as f64)).collect()
    })
}

/// Random mixed-exponential jump diffusion; `sigma` may be zero.
pub fn arb_model() -> impl Strategy<Value = LevyModel> {
    (-1.0f64..3.0, prop_oneof![Just(0.0), 0.05f64..1.5], 0.1f64..3.0, 0.0f64..1.0, phases(3), phases(3))
        .prop_filter_map("degenerate", |(c, s, lam, p, up, down)| {
            let p = if up.is_empty() { 0.0 } else if down.is_empty() { 1.0 } else { p };
            let jumps = if up.is_empty() && down.is_empty() {
                None
            } else {
                Some(JumpMixtureSpec::new(lam, p, up, down).ok()?)
            };
            let m = LevyModel::new(c, s, jumps).ok()?;
            (m.sigma() > 0.0 || m.drift() != 0.0).then_some(m)
        })
}

/// Random model satisfying the net profit condition.
pub fn arb_profitable_model() -> impl Strategy<Value = LevyModel> {
    arb_model().prop_filter("net profit", |m| m.mean() > 0.05)
}
