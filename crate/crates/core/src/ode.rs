//! Adaptive Dormand–Prince 5(4) integration of the radial equation
//! `u″ + (N−1)/r·u′ + F(u) = 0` written as a first-order system in `(u, u′)`.
//!
//! When `F` contains the Sobolev-critical term `u^{2*−1}` with unit
//! coefficient, the integration can instead follow the deviation
//! `w = u − U_ε` from the bubble with the same center height, so that the
//! error is controlled relative to `w`. It switches back to `u` once `w` is
//! no longer small against `U_ε`.

use crate::error::{NlsError, Result};
use crate::nonlinearity::Nonlinearity;
use crate::special::{bubble_eps_for_peak, bubble_slope, bubble_value};

/// One accepted step endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub r: f64,
    pub u: f64,
    pub v: f64,
    /// `(w, w′)` while the bubble deviation is being integrated.
    pub dev: Option<(f64, f64)>,
}

impl Sample {
    pub fn plain(r: f64, u: f64, v: f64) -> Self {
        Self { r, u, v, dev: None }
    }
}

/// Bubble `U_ε` subtracted from the solution near the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub dim: usize,
    pub eps: f64,
    /// Index of the critical term in the right-hand side.
    critical: usize,
    /// `2* − 1`.
    pub power: f64,
}

/// `|w| > SWITCH_RATIO·U_ε` ends deviation tracking.
const SWITCH_RATIO: f64 = 0.5;

impl Reference {
    /// Bubble through `(0, peak)` when `rhs` carries `u^{2*−1}` with unit coefficient.
    pub fn for_peak(dim: usize, rhs: &Nonlinearity, peak: f64) -> Option<Self> {
        if dim < 3 || !(peak > 0.0) {
            return None;
        }
        let n = dim as f64;
        let ts = 2.0 * n / (n - 2.0);
        let critical = rhs.terms.iter().position(|t| t.coef == 1.0 && (t.p - ts).abs() < 1e-12)?;
        Some(Self { dim, eps: bubble_eps_for_peak(dim, peak), critical, power: ts - 1.0 })
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        bubble_value(self.dim, self.eps, r)
    }

    #[inline]
    pub fn slope(&self, r: f64) -> f64 {
        bubble_slope(self.dim, self.eps, r)
    }

    /// `F(u) − u^{2*−1}` and its derivative.
    pub fn rest_at(&self, rhs: &Nonlinearity, u: f64) -> (f64, f64) {
        let mut f = rhs.lambda * u;
        let mut df = rhs.lambda;
        for (i, t) in rhs.terms.iter().enumerate() {
            if i != self.critical {
                f += t.eval(u);
                df += t.coef * (t.p - 1.0) * u.abs().powf(t.p - 2.0);
            }
        }
        (f, df)
    }

    /// `F(U+w) − U^{2*−1}` without cancellation for small `w/U`.
    #[inline]
    fn forcing(&self, rhs: &Nonlinearity, big_u: f64, w: f64) -> f64 {
        let u = big_u + w;
        let mut s = rhs.lambda * u;
        for (i, t) in rhs.terms.iter().enumerate() {
            if i != self.critical {
                s += t.eval(u);
            }
        }
        let x = w / big_u;
        if x.abs() < SWITCH_RATIO {
            s += big_u.powf(self.power) * (self.power * x.ln_1p()).exp_m1();
        } else {
            s += rhs.terms[self.critical].eval(u) - big_u.powf(self.power);
        }
        s
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// `u` reached zero at this radius.
    Crossing(f64),
    /// `u′` became nonnegative with `u > 0`.
    Floating(f64),
    /// `u` fell below the tail floor while still decreasing.
    TailFloor(f64),
    /// Reached the end radius.
    Reached(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    /// Absolute floor for the error scale of `u`.
    pub atol: f64,
    /// Stop once `u` drops below this value.
    pub tail_floor: f64,
}

pub struct RadialIvp<'a> {
    pub dim: f64,
    pub rhs: &'a Nonlinearity,
    pub reference: Option<Reference>,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl RadialIvp<'_> {
    #[inline]
    fn f(&self, dev: Option<&Reference>, r: f64, u: f64, v: f64) -> (f64, f64) {
        let force = match dev {
            None => self.rhs.eval(u),
            Some(b) => b.forcing(self.rhs, b.value(r), u),
        };
        (v, -(self.dim - 1.0) / r * v - force)
    }

    /// Integrates from `start` until an event or `r_end`; in deviation form
    /// when `start.dev` is set and a reference is available. Accepted steps
    /// are appended to `record` when given.
    pub fn integrate(
        &self,
        start: Sample,
        r_end: f64,
        ctl: StepControl,
        mut record: Option<&mut Vec<Sample>>,
    ) -> Result<Stop> {
        let mut dev = self.reference.as_ref().filter(|_| start.dev.is_some());
        let mut r = start.r;
        // (u, v) holds (w, w′) while `dev` is set.
        let (mut u, mut v) = match (dev, start.dev) {
            (Some(_), Some(d)) => d,
            _ => (start.u, start.v),
        };
        if let Some(rec) = record.as_deref_mut() {
            rec.push(Sample { dev: dev.and(start.dev), ..start });
        }
        let mut h = (0.01 * r).min(r_end - r);
        let (mut ku, mut kv) = self.f(dev, r, u, v);
        let mut steps = 0usize;
        while r < r_end {
            steps += 1;
            if steps > 5_000_000 {
                return Err(NlsError::NumericFailure("step budget exhausted".into()));
            }
            if r + h > r_end {
                h = r_end - r;
            }
            let (k1u, k1v) = (ku, kv);
            let (k2u, k2v) = self.f(dev, r + C2 * h, u + h * A21 * k1u, v + h * A21 * k1v);
            let (k3u, k3v) = self.f(dev, r + C3 * h, u + h * (A31 * k1u + A32 * k2u), v + h * (A31 * k1v + A32 * k2v));
            let (k4u, k4v) = self.f(
                dev,
                r + C4 * h,
                u + h * (A41 * k1u + A42 * k2u + A43 * k3u),
                v + h * (A41 * k1v + A42 * k2v + A43 * k3v),
            );
            let (k5u, k5v) = self.f(
                dev,
                r + C5 * h,
                u + h * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u),
                v + h * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v),
            );
            let (k6u, k6v) = self.f(
                dev,
                r + h,
                u + h * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u),
                v + h * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v),
            );
            let un = u + h * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u);
            let vn = v + h * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v);
            let (k7u, k7v) = self.f(dev, r + h, un, vn);
            let eu = h * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u);
            let ev = h * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v);
            let su = ctl.atol + ctl.rtol * u.abs().max(un.abs());
            // Slope errors are measured against the local rate u/r.
            let sv = ctl.atol / r + ctl.rtol * v.abs().max(vn.abs());
            let err = (eu / su).abs().max((ev / sv).abs());
            if !err.is_finite() {
                h *= 0.1;
                if h < 1e-15 * r {
                    return Err(NlsError::NumericFailure(format!("step size underflow at r = {r:e}")));
                }
                continue;
            }
            if err <= 1.0 {
                r += h;
                u = un;
                v = vn;
                ku = k7u;
                kv = k7v;
                let (uu, vv, big_u) = match dev {
                    Some(b) => {
                        let big_u = b.value(r);
                        (big_u + u, b.slope(r) + v, big_u)
                    }
                    None => (u, v, 0.0),
                };
                if let Some(rec) = record.as_deref_mut() {
                    rec.push(Sample { r, u: uu, v: vv, dev: dev.map(|_| (u, v)) });
                }
                if uu <= 0.0 {
                    return Ok(Stop::Crossing(r));
                }
                if vv >= 0.0 {
                    return Ok(Stop::Floating(r));
                }
                if uu < ctl.tail_floor {
                    return Ok(Stop::TailFloor(r));
                }
                if dev.is_some() && u.abs() > SWITCH_RATIO * big_u {
                    dev = None;
                    u = uu;
                    v = vv;
                    (ku, kv) = self.f(None, r, u, v);
                }
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
            if h < 1e-15 * r {
                return Err(NlsError::NumericFailure(format!("step size underflow at r = {r:e}")));
            }
        }
        Ok(Stop::Reached(r))
    }
}

/// Cubic Hermite evaluation of recorded samples at `x` (samples sorted by r).
pub fn hermite_at(samples: &[Sample], x: f64) -> Option<(f64, f64)> {
    let n = samples.len();
    if n == 0 || x < samples[0].r || x > samples[n - 1].r {
        return None;
    }
    let i = match samples.binary_search_by(|s| s.r.total_cmp(&x)) {
        Ok(i) => return Some((samples[i].u, samples[i].v)),
        Err(i) => i - 1,
    };
    let (a, b) = (samples[i], samples[i + 1]);
    let h = b.r - a.r;
    let t = (x - a.r) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let u = (2.0 * t3 - 3.0 * t2 + 1.0) * a.u
        + (t3 - 2.0 * t2 + t) * h * a.v
        + (-2.0 * t3 + 3.0 * t2) * b.u
        + (t3 - t2) * h * b.v;
    let du = ((6.0 * t2 - 6.0 * t) * a.u
        + (3.0 * t2 - 4.0 * t + 1.0) * h * a.v
        + (-6.0 * t2 + 6.0 * t) * b.u
        + (3.0 * t2 - 2.0 * t) * h * b.v)
        / h;
    Some((u, du))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_decay_in_three_dimensions() {
        // u = sinh(r)/r solves u″ + 2u′/r − u = 0.
        let rhs = Nonlinearity::new(-1.0, &[]);
        let ivp = RadialIvp { dim: 3.0, rhs: &rhs, reference: None };
        let r0: f64 = 1e-3;
        let u0 = r0.sinh() / r0;
        let v0 = (r0 * r0.cosh() - r0.sinh()) / (r0 * r0);
        let ctl = StepControl { rtol: 1e-12, atol: 1e-300, tail_floor: 0.0 };
        let mut rec = Vec::new();
        let stop = ivp.integrate(Sample::plain(r0, u0, v0), 5.0, ctl, Some(&mut rec)).unwrap();
        // sinh(r)/r is increasing, so the first step floats.
        assert!(matches!(stop, Stop::Floating(_)));
    }

    #[test]
    fn exponential_solution_accuracy() {
        // u = e^{−r}/r solves the same equation and decreases.
        let rhs = Nonlinearity::new(-1.0, &[]);
        let ivp = RadialIvp { dim: 3.0, rhs: &rhs, reference: None };
        let r0: f64 = 0.5;
        let u0 = (-r0).exp() / r0;
        let v0 = -(-r0).exp() * (1.0 / r0 + 1.0 / (r0 * r0));
        let ctl = StepControl { rtol: 1e-12, atol: 1e-300, tail_floor: 0.0 };
        let mut rec = Vec::new();
        ivp.integrate(Sample::plain(r0, u0, v0), 3.0, ctl, Some(&mut rec)).unwrap();
        let (u, _) = hermite_at(&rec, 2.0).unwrap();
        assert!((u / ((-2.0f64).exp() / 2.0) - 1.0).abs() < 1e-8);
    }
}
