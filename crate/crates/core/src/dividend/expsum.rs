use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub coefficient: f64,
    pub exponent: f64,
}

/// Finite sum `sum_i c_i exp(gamma_i x)` with distinct, ascending exponents.
///
/// Closed under differentiation, which maps `(c_i, gamma_i)` to
/// `(c_i gamma_i, gamma_i)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExpSum {
    terms: Vec<ExpTerm>,
}

impl ExpSum {
    /// Build from `(coefficient, exponent)` pairs; equal exponents are merged
    /// and zero coefficients dropped.
    pub fn new(terms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut raw: Vec<ExpTerm> = terms
            .into_iter()
            .map(|(coefficient, exponent)| ExpTerm { coefficient, exponent })
            .collect();
        raw.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
        let mut terms: Vec<ExpTerm> = Vec::with_capacity(raw.len());
        for t in raw {
            match terms.last_mut() {
                Some(last) if last.exponent == t.exponent => last.coefficient += t.coefficient,
                _ => terms.push(t),
            }
        }
        terms.retain(|t| t.coefficient != 0.0);
        Self { terms }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.coefficient * (t.exponent * x).exp()).sum()
    }

    /// `n`-th derivative at `x`.
    pub fn eval_deriv(&self, x: f64, n: u32) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * t.exponent.powi(n as i32) * (t.exponent * x).exp())
            .sum()
    }

    pub fn derivative(&self) -> ExpSum {
        self.nth_derivative(1)
    }

    pub fn nth_derivative(&self, n: u32) -> ExpSum {
        ExpSum::new(self.terms.iter().map(|t| (t.coefficient * t.exponent.powi(n as i32), t.exponent)))
    }

    pub fn scale(&self, factor: f64) -> ExpSum {
        ExpSum::new(self.terms.iter().map(|t| (t.coefficient * factor, t.exponent)))
    }

    /// Term with the largest exponent.
    pub fn leading(&self) -> Option<ExpTerm> {
        self.terms.last().copied()
    }

    /// `int_0^inf exp(-theta x) f(x) dx = sum_i c_i / (theta - gamma_i)`,
    /// defined for `theta` above every exponent.
    pub fn laplace(&self, theta: f64) -> Option<f64> {
        if self.terms.iter().any(|t| theta <= t.exponent) {
            return None;
        }
        Some(self.terms.iter().map(|t| t.coefficient / (theta - t.exponent)).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_and_sorts() {
        let s = ExpSum::new([(1.0, 2.0), (3.0, -1.0), (0.5, 2.0), (0.0, 5.0)]);
        assert_eq!(
            s.terms(),
            &[ExpTerm { coefficient: 3.0, exponent: -1.0 }, ExpTerm { coefficient: 1.5, exponent: 2.0 }]
        );
    }

    #[test]
    fn derivative_closure() {
        let s = ExpSum::new([(2.0, 0.5), (-1.0, -3.0), (4.0, 0.0)]);
        let d = s.derivative();
        assert_eq!(d.terms().len(), 2);
        for x in [0.0, 0.3, 2.0] {
            assert!((d.eval(x) - s.eval_deriv(x, 1)).abs() < 1e-14);
            assert!((s.nth_derivative(3).eval(x) - s.eval_deriv(x, 3)).abs() < 1e-13);
        }
    }

    #[test]
    fn laplace_needs_theta_above_exponents() {
        let s = ExpSum::new([(1.0, 0.5)]);
        assert_eq!(s.laplace(0.5), None);
        assert!((s.laplace(1.5).unwrap() - 1.0).abs() < 1e-15);
    }
}
