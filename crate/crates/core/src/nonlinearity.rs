use crate::params::ProblemParams;

/// One term `coef·|u|^{p−2}u` of the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coef: f64,
    pub p: f64,
    int_pow: Option<i32>,
}

impl PowerTerm {
    pub fn new(coef: f64, p: f64) -> Self {
        let e = p - 1.0;
        let int_pow = if e.fract() == 0.0 && e.abs() < 64.0 { Some(e as i32) } else { None };
        Self { coef, p, int_pow }
    }

    /// `|u|^{p−1}` for u ≥ 0.
    #[inline]
    fn pow(&self, u: f64) -> f64 {
        match self.int_pow {
            Some(k) => u.powi(k),
            None => u.powf(self.p - 1.0),
        }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if u >= 0.0 {
            self.coef * self.pow(u)
        } else {
            -self.coef * self.pow(-u)
        }
    }
}

/// Right-hand side `F(u) = λu + Σ coef·|u|^{p−2}u` of the radial equation `−Δu = F(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub lambda: f64,
    pub terms: Vec<PowerTerm>,
}

impl Nonlinearity {
    pub fn new(lambda: f64, terms: &[(f64, f64)]) -> Self {
        let terms = terms.iter().filter(|(c, _)| *c != 0.0).map(|&(c, p)| PowerTerm::new(c, p)).collect();
        Self { lambda, terms }
    }

    /// `λu + μ|u|^{q−2}u + |u|^{2*−2}u`.
    pub fn from_params(params: &ProblemParams, lambda: f64) -> Self {
        Self::new(lambda, &[(params.mu, params.q), (1.0, params.two_star)])
    }

    /// `λu + σ|u|^{q−2}u`, the scalar-field equation of the soliton family.
    pub fn scalar_field(lambda: f64, sigma: f64, q: f64) -> Self {
        Self::new(lambda, &[(sigma, q)])
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let mut s = self.lambda * u;
        for t in &self.terms {
            s += t.eval(u);
        }
        s
    }

    /// `F′(u)` for u > 0.
    pub fn derivative(&self, u: f64) -> f64 {
        let mut s = self.lambda;
        for t in &self.terms {
            s += t.coef * (t.p - 1.0) * u.abs().powf(t.p - 2.0);
        }
        s
    }

    /// Magnitude of the highest-power term, used to normalize residuals.
    pub fn leading_term(&self, u: f64) -> f64 {
        self.terms.iter().max_by(|a, b| a.p.total_cmp(&b.p)).map(|t| t.eval(u.abs()).abs()).unwrap_or(0.0)
    }

    /// Smallest positive zero of F, below which no positive decaying solution can start.
    pub fn positive_zero(&self) -> Option<f64> {
        if self.lambda >= 0.0 {
            return Some(0.0);
        }
        let g = |u: f64| self.eval(u);
        let mut hi = 1.0;
        let mut guard = 0;
        while g(hi) <= 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 2000 {
                return None;
            }
        }
        let mut lo = hi;
        while g(lo) > 0.0 {
            lo *= 0.5;
            guard += 1;
            if guard > 4000 || lo == 0.0 {
                return Some(0.0);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_extension() {
        let f = Nonlinearity::new(-1.0, &[(1.0, 2.5)]);
        assert!((f.eval(-0.3) + f.eval(0.3)).abs() < 1e-15);
    }

    #[test]
    fn zero_of_soliton_rhs() {
        let f = Nonlinearity::scalar_field(-1.0, 1.0, 4.0);
        let z = f.positive_zero().unwrap();
        assert!((z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_difference() {
        let f = Nonlinearity::new(-0.7, &[(0.3, 2.5), (1.0, 6.0)]);
        let u = 0.8;
        let h = 1e-6;
        let fd = (f.eval(u + h) - f.eval(u - h)) / (2.0 * h);
        assert!((fd - f.derivative(u)).abs() < 1e-7);
    }
}
