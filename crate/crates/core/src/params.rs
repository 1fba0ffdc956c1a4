use serde::Serialize;

use crate::error::{NlsError, Result};

/// Dimension, exponent, mass level and coupling of one problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams {
    pub dim: usize,
    pub q: f64,
    pub a: f64,
    pub mu: f64,
    pub two_star: f64,
    pub gamma_q: f64,
}

/// Exponents within this distance of 2 + 4/N are snapped onto it.
const CRITICAL_SNAP: f64 = 1e-12;

pub fn two_star(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * n / (n - 2.0)
}

pub fn gamma_q(dim: usize, q: f64) -> f64 {
    let n = dim as f64;
    n * (q - 2.0) / (2.0 * q)
}

pub fn mass_critical_exponent(dim: usize) -> f64 {
    2.0 + 4.0 / dim as f64
}

impl ProblemParams {
    pub fn new(dim: usize, q: f64, a: f64, mu: f64) -> Result<Self> {
        if dim < 3 {
            return Err(NlsError::InvalidArgument(format!("N = {dim} must be at least 3")));
        }
        let ts = two_star(dim);
        if !(q > 2.0 && q < ts) {
            return Err(NlsError::InvalidArgument(format!("q = {q} must lie in (2, {ts})")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(NlsError::InvalidArgument(format!("a = {a} must be positive")));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(NlsError::InvalidArgument(format!("mu = {mu} must be nonnegative")));
        }
        let qc = mass_critical_exponent(dim);
        let q = if (q - qc).abs() <= CRITICAL_SNAP { qc } else { q };
        let gamma = if q == qc { 2.0 / qc } else { gamma_q(dim, q) };
        Ok(Self { dim, q, a, mu, two_star: ts, gamma_q: gamma })
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..*self }
    }

    pub fn with_a(&self, a: f64) -> Self {
        Self { a, ..*self }
    }

    pub fn n(&self) -> f64 {
        self.dim as f64
    }

    pub fn is_mass_critical(&self) -> bool {
        self.q == mass_critical_exponent(self.dim)
    }

    /// Below 2 + 4/N.
    pub fn is_mass_subcritical(&self) -> bool {
        !self.is_mass_critical() && self.q < mass_critical_exponent(self.dim)
    }

    pub fn is_mass_supercritical(&self) -> bool {
        !self.is_mass_critical() && self.q > mass_critical_exponent(self.dim)
    }

    /// q·γ_q, equal to 2 at the mass-critical exponent.
    pub fn q_gamma(&self) -> f64 {
        if self.is_mass_critical() {
            2.0
        } else {
            self.q * self.gamma_q
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_exponents() {
        let p = ProblemParams::new(3, 2.5, 1.0, 1e-4).unwrap();
        assert_eq!(p.two_star, 6.0);
        assert!((p.gamma_q - 0.3).abs() < 1e-15);
        assert!((p.q_gamma() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn mass_critical_snaps() {
        let p = ProblemParams::new(3, 10.0 / 3.0, 1.0, 1.0).unwrap();
        assert!(p.is_mass_critical());
        assert_eq!(p.q_gamma(), 2.0);
        assert!((p.gamma_q - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ProblemParams::new(3, 7.0, 1.0, 1.0).is_err());
        assert!(ProblemParams::new(3, 2.0, 1.0, 1.0).is_err());
        assert!(ProblemParams::new(2, 3.0, 1.0, 1.0).is_err());
        assert!(ProblemParams::new(3, 3.0, 0.0, 1.0).is_err());
        assert!(ProblemParams::new(3, 3.0, 1.0, -1.0).is_err());
    }
}
