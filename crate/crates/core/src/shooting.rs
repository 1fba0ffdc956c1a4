//! Shooting in the center height for positive decaying radial solutions of
//! `−Δu = F(u)` with `F(u) = λu + …` and `λ < 0`.
//!
//! Every trajectory either crosses zero or turns upward ("floats"); the
//! decaying solution sits on the boundary between the two. The boundary is
//! bracketed by bisection in the center height. Past the radius where the
//! bracketing trajectories separate, the decaying branch is continued by
//! re-bisecting in the slope from the last radius where both still agree.

use std::sync::Arc;

use crate::error::{NlsError, Result};
use crate::grid::{RadialFn, RadialGrid, Tail};
use crate::nonlinearity::Nonlinearity;
use crate::ode::{hermite_at, RadialIvp, Reference, Sample, StepControl, Stop};

/// Outcome of a single shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Crossing,
    Floating,
    /// Neither event before the end radius: numerically on the separatrix.
    Undecided,
}

impl From<Stop> for Class {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Crossing(_) => Class::Crossing,
            Stop::Floating(_) => Class::Floating,
            Stop::TailFloor(_) | Stop::Reached(_) => Class::Undecided,
        }
    }
}

/// Relative disagreement beyond which two bracketing trajectories have split.
const SPLIT_TOL: f64 = 1e-8;
/// Cap on continuation segments per traced profile.
const MAX_SEGMENTS: usize = 400;
/// Profile grid: end radius in decay lengths.
pub const DECAY_LENGTHS: f64 = 40.0;
/// Shots run a little past the profile grid.
const SHOT_DECAY_LENGTHS: f64 = 46.0;

#[derive(Debug, Clone)]
pub struct Shooter {
    pub dim: usize,
    pub rhs: Nonlinearity,
    pub r_end: f64,
    pub ctl: StepControl,
}

/// A traced decaying solution: its center height and step samples.
#[derive(Debug, Clone)]
pub struct Trace {
    pub center: f64,
    pub samples: Vec<Sample>,
    pub lambda: f64,
    pub dim: usize,
    /// Curvature of the series start: `u ≈ b + a2 r² + a4 r⁴`.
    a2: f64,
    a4: f64,
}

impl Shooter {
    pub fn new(dim: usize, rhs: Nonlinearity) -> Result<Self> {
        if !(rhs.lambda < 0.0) {
            return Err(NlsError::InvalidArgument(format!("lambda = {} must be negative", rhs.lambda)));
        }
        let r_end = SHOT_DECAY_LENGTHS / (-rhs.lambda).sqrt();
        Ok(Self { dim, rhs, r_end, ctl: StepControl { rtol: 1e-12, atol: 0.0, tail_floor: 0.0 } })
    }

    pub fn decay_rate(&self) -> f64 {
        (-self.rhs.lambda).sqrt()
    }

    /// Lower bound for center heights of positive decaying solutions: F must
    /// be positive at the maximum.
    pub fn min_center(&self) -> f64 {
        self.rhs.positive_zero().unwrap_or(0.0)
    }

    fn series_coeffs(&self, b: f64) -> (f64, f64) {
        let nn = self.dim as f64;
        let a2 = -self.rhs.eval(b) / (2.0 * nn);
        let a4 = -self.rhs.derivative(b) * a2 / (4.0 * (nn + 2.0));
        (a2, a4)
    }

    /// Radius over which the center curvature changes the profile by O(1).
    pub fn core_width(&self, b: f64) -> f64 {
        let f = self.rhs.eval(b).abs();
        let k = self.decay_rate();
        let w = (2.0 * self.dim as f64 * b / f).sqrt();
        if w.is_finite() && w > 0.0 {
            w.min(1.0 / k)
        } else {
            1.0 / k
        }
    }

    fn reference(&self, b: f64) -> Option<Reference> {
        Reference::for_peak(self.dim, &self.rhs, b)
    }

    /// Series start near the origin, carrying the bubble deviation when a
    /// reference exists.
    fn start(&self, b: f64, reference: Option<&Reference>) -> Sample {
        let (a2, a4) = self.series_coeffs(b);
        let r0 = 1e-4 * self.core_width(b);
        let r2 = r0 * r0;
        let mut s = Sample::plain(r0, b + a2 * r2 + a4 * r2 * r2, 2.0 * a2 * r0 + 4.0 * a4 * r2 * r0);
        if let Some(bref) = reference {
            let nn = self.dim as f64;
            let (f, df) = bref.rest_at(&self.rhs, b);
            let d2 = -f / (2.0 * nn);
            let pw = bref.power * b.powf(bref.power - 1.0);
            let d4 = -(df * a2 + pw * d2) / (4.0 * (nn + 2.0));
            let w = (b - bref.value(0.0)) + d2 * r2 + d4 * r2 * r2;
            let wp = 2.0 * d2 * r0 + 4.0 * d4 * r2 * r0;
            s.dev = Some((w, wp));
        }
        s
    }

    fn control(&self, b: f64) -> StepControl {
        StepControl { atol: 1e-32 * b, tail_floor: 1e-28 * b, ..self.ctl }
    }

    fn ivp(&self, reference: Option<Reference>) -> RadialIvp<'_> {
        RadialIvp { dim: self.dim as f64, rhs: &self.rhs, reference }
    }

    /// Full shot from the center.
    pub fn shoot(&self, b: f64, record: Option<&mut Vec<Sample>>) -> Result<Stop> {
        let bref = self.reference(b);
        self.ivp(bref).integrate(self.start(b, bref.as_ref()), self.r_end, self.control(b), record)
    }

    /// Single shot that stops once `u` falls below `floor`, returned as a
    /// trace whenever it got there before crossing or floating.
    pub fn shoot_to_floor(&self, b: f64, floor: f64) -> Result<(Stop, Trace)> {
        let bref = self.reference(b);
        let (a2, a4) = self.series_coeffs(b);
        let ctl = StepControl { tail_floor: floor, ..self.control(b) };
        let mut samples = Vec::new();
        let stop = self.ivp(bref).integrate(self.start(b, bref.as_ref()), self.r_end, ctl, Some(&mut samples))?;
        Ok((stop, Trace { center: b, samples, lambda: self.rhs.lambda, dim: self.dim, a2, a4 }))
    }

    pub fn classify(&self, b: f64) -> Result<Class> {
        Ok(self.shoot(b, None)?.into())
    }

    /// Classes on a geometric scan of `points` heights in `[lo, hi]`.
    pub fn scan(&self, lo: f64, hi: f64, points: usize) -> Result<Vec<(f64, Class)>> {
        let ratio = (hi / lo).ln() / (points.max(2) - 1) as f64;
        (0..points.max(2))
            .map(|i| {
                let b = lo * (ratio * i as f64).exp();
                Ok((b, self.classify(b)?))
            })
            .collect()
    }

    /// Adjacent scan pairs with different classes (or an undecided point).
    pub fn transitions(scan: &[(f64, Class)]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for w in scan.windows(2) {
            let ((b0, c0), (b1, c1)) = (w[0], w[1]);
            if c0 == Class::Undecided {
                out.push((b0, b0));
            } else if c0 != c1 && c1 != Class::Undecided {
                out.push((b0, b1));
            }
        }
        if let Some(&(b, Class::Undecided)) = scan.last() {
            out.push((b, b));
        }
        out
    }

    /// Bisects a class-changing bracket of center heights until its relative
    /// width is below `rel` (or a shot lands on the separatrix).
    pub fn refine(&self, lo: f64, hi: f64, rel: f64) -> Result<(f64, f64)> {
        self.refine_with(lo, hi, rel, |b| self.classify(b))
    }

    fn refine_with(
        &self,
        mut lo: f64,
        mut hi: f64,
        rel: f64,
        class: impl Fn(f64) -> Result<Class>,
    ) -> Result<(f64, f64)> {
        if lo == hi {
            return Ok((lo, hi));
        }
        let c_lo = class(lo)?;
        let c_hi = class(hi)?;
        if c_lo == Class::Undecided {
            return Ok((lo, lo));
        }
        if c_hi == Class::Undecided {
            return Ok((hi, hi));
        }
        if c_lo == c_hi {
            return Err(NlsError::SearchFailure { lo, hi });
        }
        for _ in 0..400 {
            if (hi - lo).abs() <= rel * lo.abs().max(hi.abs()) {
                break;
            }
            let mid = if lo > 0.0 && hi > 0.0 && hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if mid == lo || mid == hi {
                break;
            }
            match class(mid)? {
                Class::Undecided => return Ok((mid, mid)),
                c if c == c_lo => lo = mid,
                _ => hi = mid,
            }
        }
        Ok((lo, hi))
    }

    /// Traces the decaying solution on the separatrix bracketed by `[lo, hi]`.
    pub fn trace(&self, lo: f64, hi: f64) -> Result<Trace> {
        let (lo, hi) = self.refine(lo, hi, 0.0)?;
        let b = 0.5 * (lo + hi);
        let (a2, a4) = self.series_coeffs(b);
        let ctl = self.control(b);
        // Continuations restart from samples of the lower shot, so they keep its reference.
        let ivp = self.ivp(self.reference(lo));
        let mut samples: Vec<Sample> = Vec::new();

        let mut seg_a = Vec::new();
        let mut seg_b = Vec::new();
        let stop_a = self.shoot(lo, Some(&mut seg_a))?;
        let stop_b = if hi != lo { Some(self.shoot(hi, Some(&mut seg_b))?) } else { None };
        let mut pending = (seg_a, stop_a, seg_b, stop_b);

        for _ in 0..MAX_SEGMENTS {
            let (sa, stop_a, sb, stop_b) = pending;
            let (accepted, done) = accept_prefix(&sa, stop_a, &sb, stop_b);
            if accepted.len() < 2 {
                return Err(NlsError::NumericFailure("separatrix continuation stalled".into()));
            }
            let start = if samples.is_empty() { 0 } else { 1 };
            samples.extend_from_slice(&accepted[start..]);
            if done {
                return Ok(Trace { center: b, samples, lambda: self.rhs.lambda, dim: self.dim, a2, a4 });
            }
            let last = *samples.last().unwrap();
            if last.r >= self.r_end * (1.0 - 1e-12) || last.u <= ctl.tail_floor {
                return Ok(Trace { center: b, samples, lambda: self.rhs.lambda, dim: self.dim, a2, a4 });
            }
            // The slope parameter is w′ while the deviation is tracked, u′ otherwise.
            let from = |p: f64, rec: Option<&mut Vec<Sample>>| {
                let start = match (last.dev, ivp.reference) {
                    (Some((w, _)), Some(bref)) => {
                        Sample { r: last.r, u: last.u, v: bref.slope(last.r) + p, dev: Some((w, p)) }
                    }
                    _ => Sample::plain(last.r, last.u, p),
                };
                ivp.integrate(start, self.r_end, ctl, rec)
            };
            let class = |p: f64| -> Result<Class> { Ok(from(p, None)?.into()) };
            let p0 = last.dev.map(|d| d.1).unwrap_or(last.v);
            let (plo, phi) = slope_bracket(p0, last.v.abs(), &class)?;
            let (plo, phi) = self.refine_with(plo, phi, 0.0, class)?;
            let mut ra = Vec::new();
            let mut rb = Vec::new();
            let sa = from(plo, Some(&mut ra))?;
            let sb = if phi != plo { Some(from(phi, Some(&mut rb))?) } else { None };
            pending = (ra, sa, rb, sb);
        }
        Err(NlsError::NumericFailure("separatrix continuation did not reach the tail".into()))
    }
}

/// Opens a bracket `p0 ∓ d·scale` of slope parameters with opposite classes.
fn slope_bracket(p0: f64, scale: f64, class: &impl Fn(f64) -> Result<Class>) -> Result<(f64, f64)> {
    let mut d = 1e-14;
    while d < 0.5 {
        let steep = p0 - d * scale;
        let flat = p0 + d * scale;
        let (cs, cf) = (class(steep)?, class(flat)?);
        if cs == Class::Undecided {
            return Ok((steep, steep));
        }
        if cf == Class::Undecided {
            return Ok((flat, flat));
        }
        if cs != cf {
            return Ok((steep, flat));
        }
        d *= 10.0;
    }
    Err(NlsError::SearchFailure { lo: p0 - 0.5 * scale, hi: p0 + 0.5 * scale })
}

/// Longest prefix of `a` on which `b` agrees to [`SPLIT_TOL`]. Returns the
/// prefix and whether the trajectories never split.
fn accept_prefix(a: &[Sample], stop_a: Stop, b: &[Sample], stop_b: Option<Stop>) -> (Vec<Sample>, bool) {
    let undecided = |s: Stop| Class::from(s) == Class::Undecided;
    let Some(stop_b) = stop_b else {
        // Single trajectory that landed on the separatrix.
        if undecided(stop_a) {
            return (a.to_vec(), true);
        }
        let keep = a.len().saturating_sub(1).max(2).min(a.len());
        return (a[..keep].to_vec(), false);
    };
    let mut last_ok = 0;
    for (i, s) in a.iter().enumerate() {
        let Some((ub, _)) = hermite_at(b, s.r) else { break };
        let scale = s.u.abs().max(ub.abs());
        if (s.u - ub).abs() > SPLIT_TOL * scale || s.u <= 0.0 || s.v >= 0.0 {
            break;
        }
        last_ok = i;
    }
    let both_undecided = undecided(stop_a) && undecided(stop_b);
    if both_undecided && last_ok + 1 == a.len() {
        return (a.to_vec(), true);
    }
    // Step back a little so the restart is well inside the agreeing region.
    let keep = (last_ok.saturating_sub(2)).max(1) + 1;
    (a[..keep.min(a.len())].to_vec(), false)
}

impl Trace {
    pub fn last_radius(&self) -> f64 {
        self.samples.last().map(|s| s.r).unwrap_or(0.0)
    }

    pub fn decay_rate(&self) -> f64 {
        (-self.lambda).sqrt()
    }

    /// Value at radius `r`, using the series near the origin and the linear
    /// decay model past the last sample.
    pub fn value_at(&self, r: f64) -> f64 {
        let first = self.samples[0].r;
        if r < first {
            let r2 = r * r;
            return self.center + self.a2 * r2 + self.a4 * r2 * r2;
        }
        if let Some((u, _)) = hermite_at(&self.samples, r) {
            return u;
        }
        let last = *self.samples.last().unwrap();
        let nn = self.dim as f64;
        last.u * (-self.decay_rate() * (r - last.r)).exp() * (last.r / r).powf(0.5 * (nn - 1.0))
    }

    /// Grid adapted to this profile: first spacing well inside the core,
    /// outer radius [`DECAY_LENGTHS`] decay lengths.
    pub fn natural_grid(&self, core_width: f64, n: usize) -> Result<Arc<RadialGrid>> {
        let r_max = DECAY_LENGTHS / self.decay_rate();
        RadialGrid::geometric(self.dim, 2e-3 * core_width, r_max, n)
    }

    pub fn to_profile(&self, grid: &Arc<RadialGrid>) -> RadialFn {
        let values = grid.nodes.iter().map(|&r| self.value_at(r)).collect();
        RadialFn { grid: grid.clone(), values, center: self.center, tail: Tail::Exponential { k: self.decay_rate() } }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soliton_height_three_dimensional_cubic() {
        // Known ground state of −Δw + w = w³ in R³ has w(0) ≈ 4.3373.
        let sh = Shooter::new(3, Nonlinearity::scalar_field(-1.0, 1.0, 4.0)).unwrap();
        let sc = sh.scan(1.0 + 1e-9, 100.0, 60).unwrap();
        let tr = Shooter::transitions(&sc);
        assert_eq!(tr.len(), 1);
        let t = sh.trace(tr[0].0, tr[0].1).unwrap();
        assert!((t.center - 4.3373).abs() < 1e-3, "{}", t.center);
        assert!(t.last_radius() > 30.0);
    }
}
