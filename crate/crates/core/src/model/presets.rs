//! Canonical models used throughout the tests, examples and CLI fixtures.

use super::{JumpMixtureSpec, LevyModel, Phase};

/// Brownian motion with unit drift and unit volatility.
pub fn brownian_unit() -> LevyModel {
    LevyModel::brownian(1.0, 1.0).expect("valid preset")
}

/// Cramér–Lundberg model: premium rate 2, Poisson(1) claims of size Exp(1).
pub fn exponential_claims() -> LevyModel {
    let jumps = JumpMixtureSpec::new(1.0, 0.0, vec![], vec![Phase::new(1.0, 1.0)]).expect("valid preset");
    LevyModel::new(2.0, 0.0, Some(jumps)).expect("valid preset")
}

/// Double-exponential jump diffusion: c = 1, sigma = 0.3, lambda = 2,
/// up jumps Exp(3) with probability 0.4, down jumps Exp(2) with probability 0.6.
pub fn double_exponential() -> LevyModel {
    kou(1.0, 0.3, 2.0, 0.4, 3.0, 2.0)
}

/// Double-exponential (Kou) jump diffusion in natural-drift form.
///
/// Panics on invalid parameters; use [`LevyModel::new`] for fallible input.
pub fn kou(drift: f64, sigma: f64, lambda: f64, p: f64, up_rate: f64, down_rate: f64) -> LevyModel {
    let up = if p > 0.0 { vec![Phase::new(1.0, up_rate)] } else { vec![] };
    let down = if p < 1.0 { vec![Phase::new(1.0, down_rate)] } else { vec![] };
    let jumps = JumpMixtureSpec::new(lambda, p, up, down).expect("valid kou parameters");
    LevyModel::new(drift, sigma, Some(jumps)).expect("valid kou parameters")
}
