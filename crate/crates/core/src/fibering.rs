//! Energy, Pohozaev functional, mass-preserving dilations and their fibers.
//!
//! Along `u_t(r) = t^{N/2} u(tr)` the three norms scale as
//! `‖∇u_t‖² = t²G`, `‖u_t‖_q^q = t^{qγ_q}L`, `‖u_t‖^{2*}_{2*} = t^{2*}K`,
//! so the fiber `Ψ_u(t) = E_μ(u_t)` depends on `u` only through `(G, L, K)`.

use serde::Serialize;

use crate::error::{NlsError, Result};
use crate::grid::{grad_norm_sq, RadialFn, Tail};
use crate::params::ProblemParams;

/// Relative band inside which the Pohozaev second variation counts as zero.
pub const ZERO_CLASS_BAND: f64 = 1e-8;

/// The three norms the energy depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    /// `‖∇u‖₂²`
    pub grad_sq: f64,
    /// `‖u‖_q^q`
    pub lq_q: f64,
    /// `‖u‖^{2*}_{2*}`
    pub l2s: f64,
}

impl Norms {
    pub fn of(u: &RadialFn, params: &ProblemParams) -> Self {
        Self { grad_sq: grad_norm_sq(u), lq_q: u.lp_pow(params.q), l2s: u.lp_pow(params.two_star) }
    }

    /// Norms of `c·u`.
    pub fn scaled(&self, c: f64, params: &ProblemParams) -> Self {
        Self {
            grad_sq: c * c * self.grad_sq,
            lq_q: c.abs().powf(params.q) * self.lq_q,
            l2s: c.abs().powf(params.two_star) * self.l2s,
        }
    }

    /// Norms of `u_t`.
    pub fn dilated(&self, t: f64, params: &ProblemParams) -> Self {
        Self {
            grad_sq: t * t * self.grad_sq,
            lq_q: t.powf(params.q_gamma()) * self.lq_q,
            l2s: t.powf(params.two_star) * self.l2s,
        }
    }

    pub fn energy(&self, params: &ProblemParams) -> f64 {
        0.5 * self.grad_sq - params.mu / params.q * self.lq_q - self.l2s / params.two_star
    }

    pub fn pohozaev(&self, params: &ProblemParams) -> f64 {
        self.grad_sq - params.mu * params.gamma_q * self.lq_q - self.l2s
    }

    /// `2‖∇u‖² − μqγ_q²‖u‖_q^q − 2*‖u‖^{2*}_{2*}`.
    pub fn second_variation(&self, params: &ProblemParams) -> f64 {
        let g = params.gamma_q;
        2.0 * self.grad_sq - params.mu * params.q * g * g * self.lq_q - params.two_star * self.l2s
    }

    pub fn class(&self, params: &ProblemParams) -> PohozaevClass {
        let g = params.gamma_q;
        let d = self.second_variation(params);
        let scale = 2.0 * self.grad_sq + params.mu * params.q * g * g * self.lq_q + params.two_star * self.l2s;
        if d.abs() <= ZERO_CLASS_BAND * scale {
            PohozaevClass::Zero
        } else if d > 0.0 {
            PohozaevClass::Plus
        } else {
            PohozaevClass::Minus
        }
    }

    /// `Ψ_u(t)`.
    pub fn fiber(&self, params: &ProblemParams, t: f64) -> f64 {
        self.dilated(t, params).energy(params)
    }

    /// `Ψ′_u(t) = tG − μγ_q t^{qγ_q−1}L − t^{2*−1}K`.
    pub fn fiber_slope(&self, params: &ProblemParams, t: f64) -> f64 {
        let qg = params.q_gamma();
        t * self.grad_sq
            - params.mu * params.gamma_q * t.powf(qg - 1.0) * self.lq_q
            - t.powf(params.two_star - 1.0) * self.l2s
    }

    /// `Ψ″_u(t)`.
    pub fn fiber_curvature(&self, params: &ProblemParams, t: f64) -> f64 {
        let qg = params.q_gamma();
        let ts = params.two_star;
        self.grad_sq
            - params.mu * params.gamma_q * (qg - 1.0) * t.powf(qg - 2.0) * self.lq_q
            - (ts - 1.0) * t.powf(ts - 2.0) * self.l2s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PohozaevClass {
    Plus,
    Zero,
    Minus,
}

pub fn energy(u: &RadialFn, params: &ProblemParams) -> f64 {
    Norms::of(u, params).energy(params)
}

pub fn pohozaev(u: &RadialFn, params: &ProblemParams) -> f64 {
    Norms::of(u, params).pohozaev(params)
}

pub fn classify(u: &RadialFn, params: &ProblemParams) -> PohozaevClass {
    Norms::of(u, params).class(params)
}

/// `u_t(r) = t^{N/2} u(tr)` resampled on the grid of `u`.
pub fn fibering_scale(u: &RadialFn, t: f64) -> Result<RadialFn> {
    if !(t > 0.0) {
        return Err(NlsError::InvalidArgument(format!("t = {t} must be positive")));
    }
    if t == 1.0 {
        return Ok(u.clone());
    }
    let g = &u.grid;
    if t > 1.0 && u.tail == Tail::Zero {
        let peak = u.center.abs().max(u.values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        if u.values.last().unwrap().abs() > 1e-12 * peak {
            return Err(NlsError::DomainError(format!(
                "t·r_max = {:e} leaves the grid and the profile has no tail model",
                t * g.r_max
            )));
        }
    }
    let slopes = u.derivative();
    let amp = t.powf(0.5 * u.dim() as f64);
    let mut values = Vec::with_capacity(g.len());
    for &r in &g.nodes {
        values.push(amp * u.eval(t * r, &slopes)?);
    }
    let tail = match u.tail {
        Tail::Exponential { k } => Tail::Exponential { k: k * t },
        other => other,
    };
    RadialFn::new(g.clone(), amp * u.center, values, tail)
}

/// Critical points of the fiber through `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberingProjection {
    /// Local-minimum root of `Ψ′_u`.
    pub t_plus: Option<f64>,
    /// Local-maximum root of `Ψ′_u`.
    pub t_minus: Option<f64>,
    pub psi_plus: Option<f64>,
    pub psi_minus: Option<f64>,
}

/// Root search window beyond which `Ψ′_u` keeps its sign.
pub fn search_window(n: &Norms, params: &ProblemParams) -> f64 {
    10.0 * (n.grad_sq / n.l2s).powf(1.0 / (params.two_star - 2.0))
}

pub fn project(u: &RadialFn, params: &ProblemParams) -> Result<FiberingProjection> {
    project_norms(&Norms::of(u, params), params)
}

pub fn project_norms(n: &Norms, params: &ProblemParams) -> Result<FiberingProjection> {
    if !(n.grad_sq > 0.0 && n.l2s > 0.0) {
        return Err(NlsError::InvalidArgument("projection of the zero function".into()));
    }
    let qg = params.q_gamma();
    // Ψ′_u(t)/t^{qγ−1}: same sign, bounded near 0.
    let h = |t: f64| {
        n.grad_sq * t.powf(2.0 - qg) - params.mu * params.gamma_q * n.lq_q - n.l2s * t.powf(params.two_star - qg)
    };
    let t_hi = search_window(n, params);
    let points = 800;
    let decades = 60.0;
    let ts: Vec<f64> = (0..=points).map(|i| t_hi * 10f64.powf(-decades * (1.0 - i as f64 / points as f64))).collect();
    let mut roots = Vec::new();
    let mut prev = (ts[0], h(ts[0]));
    for &t in &ts[1..] {
        let cur = (t, h(t));
        if prev.1 == 0.0 {
            roots.push(prev.0);
        } else if prev.1 * cur.1 < 0.0 {
            roots.push(bisect(&h, prev.0, cur.0));
        }
        prev = cur;
    }
    if roots.len() > 2 {
        return Err(NlsError::NumericFailure(format!("{} sign changes of the fiber slope", roots.len())));
    }
    let mut out = FiberingProjection { t_plus: None, t_minus: None, psi_plus: None, psi_minus: None };
    for t in roots {
        if n.fiber_curvature(params, t) > 0.0 {
            out.t_plus = Some(t);
            out.psi_plus = Some(n.fiber(params, t));
        } else {
            out.t_minus = Some(t);
            out.psi_minus = Some(n.fiber(params, t));
        }
    }
    Ok(out)
}

fn bisect(h: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let s_lo = h(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smaller root `s` of `s²G − μγ_q s^{qγ_q}L − s^{2*}K = 0` on `ψ_a`, where the
/// second variation is positive.
pub fn s_mu_solve(psi_a: &RadialFn, mu: f64, params: &ProblemParams) -> Result<f64> {
    s_mu_from_norms(&Norms::of(psi_a, params), mu, params)
}

pub fn s_mu_from_norms(n: &Norms, mu: f64, params: &ProblemParams) -> Result<f64> {
    if !params.is_mass_subcritical() {
        return Err(NlsError::InvalidArgument("s_mu requires 2 < q < 2 + 4/N".into()));
    }
    let p = params.with_mu(mu);
    let proj = project_norms(n, &p)?;
    let s = proj.t_plus.ok_or_else(|| NlsError::ThresholdExceeded(format!("no local-minimum root at mu = {mu:e}")))?;
    if !(n.dilated(s, &p).second_variation(&p) > 0.0) {
        return Err(NlsError::ThresholdExceeded(format!("inequality fails at mu = {mu:e}")));
    }
    Ok(s)
}

/// Largest μ for which the fiber through `u` still has two critical points.
pub fn empirical_threshold(n: &Norms, params: &ProblemParams) -> Result<f64> {
    if !params.is_mass_subcritical() {
        return Err(NlsError::InvalidArgument("two fiber roots only occur for 2 < q < 2 + 4/N".into()));
    }
    let two = |mu: f64| -> Result<bool> {
        let pr = project_norms(n, &params.with_mu(mu))?;
        Ok(pr.t_plus.is_some() && pr.t_minus.is_some())
    };
    let mut lo = 1e-12;
    let mut hi = 1.0;
    while two(hi)? {
        lo = hi;
        hi *= 10.0;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if (hi - lo) <= 1e-13 * hi {
            break;
        }
        if two(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Projection parameter of `v_b = (b/c)u` onto the same part of the Pohozaev set as `u`.
pub fn tau_of_mass(u: &RadialFn, c: f64, b: f64, params: &ProblemParams) -> Result<f64> {
    tau_from_norms(&Norms::of(u, params), c, b, params)
}

pub fn tau_from_norms(n: &Norms, c: f64, b: f64, params: &ProblemParams) -> Result<f64> {
    if !(b > 0.0 && c > 0.0) {
        return Err(NlsError::InvalidArgument("masses must be positive".into()));
    }
    let class = n.class(params);
    let nb = n.scaled(b / c, params);
    let proj = project_norms(&nb, params)?;
    let pick = match class {
        PohozaevClass::Plus => proj.t_plus,
        PohozaevClass::Minus => proj.t_minus,
        PohozaevClass::Zero => return Err(NlsError::DegeneratePoint),
    };
    pick.ok_or_else(|| NlsError::ThresholdExceeded(format!("empty projection at b = {b:e}")))
}

/// `τ′(c) = [μqγ_qL + 2*K − 2G] / [c(2G − μqγ_q²L − 2*K)]`.
pub fn tau_prime(u: &RadialFn, c: f64, params: &ProblemParams) -> Result<f64> {
    tau_prime_from_norms(&Norms::of(u, params), c, params)
}

pub fn tau_prime_from_norms(n: &Norms, c: f64, params: &ProblemParams) -> Result<f64> {
    if n.class(params) == PohozaevClass::Zero {
        return Err(NlsError::DegeneratePoint);
    }
    let num = params.mu * params.q * params.gamma_q * n.lq_q + params.two_star * n.l2s - 2.0 * n.grad_sq;
    Ok(num / (c * n.second_variation(params)))
}

/// `E_μ((v_b)_{τ(b)})` for the mass-scaling path through `u`.
pub fn mass_path_energy(n: &Norms, c: f64, b: f64, params: &ProblemParams) -> Result<f64> {
    let tau = tau_from_norms(n, c, b, params)?;
    Ok(n.scaled(b / c, params).fiber(params, tau))
}

/// Energy on the Pohozaev set written without the gradient term.
pub fn on_manifold_energy(n: &Norms, params: &ProblemParams) -> f64 {
    params.mu / params.q * (0.5 * params.q_gamma() - 1.0) * n.lq_q + n.l2s / params.n()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Norms {
        Norms { grad_sq: 1.0, lq_q: 1.0, l2s: 1.0 }
    }

    #[test]
    fn free_problem_single_root() {
        let p = ProblemParams::new(3, 2.5, 1.0, 0.0).unwrap();
        let pr = project_norms(&unit(), &p).unwrap();
        assert!(pr.t_plus.is_none());
        assert!((pr.t_minus.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(unit().class(&p), PohozaevClass::Minus);
    }

    #[test]
    fn mass_critical_no_roots_when_q_term_dominates() {
        let p = ProblemParams::new(3, 10.0 / 3.0, 1.0, 3.0).unwrap();
        let n = Norms { grad_sq: 1.0, lq_q: 1.0, l2s: 1.0 };
        assert!(n.grad_sq <= p.mu * p.gamma_q * n.lq_q);
        let pr = project_norms(&n, &p).unwrap();
        assert!(pr.t_plus.is_none() && pr.t_minus.is_none());
    }

    #[test]
    fn subcritical_two_roots_ordered() {
        let p = ProblemParams::new(3, 2.5, 1.0, 0.01).unwrap();
        let pr = project_norms(&unit(), &p).unwrap();
        let (tp, tm) = (pr.t_plus.unwrap(), pr.t_minus.unwrap());
        assert!(tp < tm);
        assert!(pr.psi_minus.unwrap() > pr.psi_plus.unwrap());
        assert_eq!(unit().dilated(tp, &p).class(&p), PohozaevClass::Plus);
        assert_eq!(unit().dilated(tm, &p).class(&p), PohozaevClass::Minus);
    }

    #[test]
    fn tau_free_closed_form() {
        let p = ProblemParams::new(3, 3.0, 1.0, 0.0).unwrap();
        let n = Norms { grad_sq: 2.0, lq_q: 0.7, l2s: 2.0 };
        for b in [0.5, 2.0, 3.0] {
            let t = tau_from_norms(&n, 1.0, b, &p).unwrap();
            assert!((t - 1.0 / b).abs() < 1e-10);
        }
        assert!((tau_prime_from_norms(&n, 1.3, &p).unwrap() + 1.0 / 1.3).abs() < 1e-12);
    }
}
