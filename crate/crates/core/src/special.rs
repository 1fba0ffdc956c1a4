//! Bubbles, the scalar-field soliton, Gagliardo–Nirenberg constants and the
//! rescaling family of GN minimizers.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{NlsError, Result};
use crate::grid::{grad_norm_sq, RadialFn, RadialGrid, Tail};
use crate::nonlinearity::Nonlinearity;
use crate::params::ProblemParams;
use crate::shooting::Shooter;

/// Default node count for soliton and bubble grids.
pub const DEFAULT_NODES: usize = 20_000;

/// Bubble amplitude constant `[N(N−2)]^{(N−2)/4}`.
pub fn bubble_amplitude(dim: usize) -> f64 {
    let n = dim as f64;
    (n * (n - 2.0)).powf((n - 2.0) / 4.0)
}

/// `U_ε(r) = [N(N−2)]^{(N−2)/4} (ε/(ε²+r²))^{(N−2)/2}`.
pub fn bubble_value(dim: usize, eps: f64, r: f64) -> f64 {
    let n = dim as f64;
    bubble_amplitude(dim) * (eps / (eps * eps + r * r)).powf(0.5 * (n - 2.0))
}

/// `dU_ε/dr`.
pub fn bubble_slope(dim: usize, eps: f64, r: f64) -> f64 {
    let n = dim as f64;
    -(n - 2.0) * r / (eps * eps + r * r) * bubble_value(dim, eps, r)
}

/// Concentration scale whose bubble has peak height `peak`.
pub fn bubble_eps_for_peak(dim: usize, peak: f64) -> f64 {
    let n = dim as f64;
    (bubble_amplitude(dim) / peak).powf(2.0 / (n - 2.0))
}

pub fn bubble(eps: f64, grid: &Arc<RadialGrid>) -> Result<RadialFn> {
    if !(eps > 0.0) {
        return Err(NlsError::InvalidArgument(format!("eps = {eps} must be positive")));
    }
    let dim = grid.dim;
    Ok(RadialFn::from_fn(grid, Tail::Power { p: dim as f64 - 2.0 }, |r| bubble_value(dim, eps, r)))
}

/// Grid resolving a bubble of scale `eps` out to `r_max`.
pub fn bubble_grid(dim: usize, eps: f64, r_max: f64, n: usize) -> Result<Arc<RadialGrid>> {
    RadialGrid::geometric(dim, 1e-3 * eps, r_max, n)
}

/// Sobolev quotient `‖∇f‖₂² / ‖f‖²_{2*}` of a sampled profile.
pub fn sobolev_quotient(f: &RadialFn) -> f64 {
    let n = f.dim() as f64;
    let ts = 2.0 * n / (n - 2.0);
    grad_norm_sq(f) / f.lp_pow(ts).powf(2.0 / ts)
}

/// Sharp Sobolev constant from truncated bubble norms, extrapolated in the
/// truncation radius (tails decay as `R^{2−N}` and `R^{−N}`).
pub fn sobolev_constant(dim: usize) -> Result<f64> {
    if dim < 3 {
        return Err(NlsError::InvalidArgument(format!("N = {dim} must be at least 3")));
    }
    let n = dim as f64;
    let ts = 2.0 * n / (n - 2.0);
    let norms = |r_max: f64| -> Result<(f64, f64)> {
        let g = bubble_grid(dim, 1.0, r_max, DEFAULT_NODES)?;
        let u = bubble(1.0, &g)?;
        Ok((grad_norm_sq(&u), u.lp_pow(ts)))
    };
    let extrapolate = |r: f64| -> Result<f64> {
        let (g1, l1) = norms(r)?;
        let (g2, l2) = norms(2.0 * r)?;
        let fg = 2f64.powf(n - 2.0);
        let fl = 2f64.powf(n);
        let g = (fg * g2 - g1) / (fg - 1.0);
        let l = (fl * l2 - l1) / (fl - 1.0);
        Ok(g / l.powf(2.0 / ts))
    };
    let s1 = extrapolate(1e3)?;
    let s2 = extrapolate(2e3)?;
    if !((s1 - s2).abs() <= 1e-6 * s2) {
        return Err(NlsError::NumericFailure(format!("Sobolev extrapolation unstable: {s1} vs {s2}")));
    }
    Ok(s2)
}

/// Coefficient `ν₀` of the GN-minimizer equation `−Δφ + ν₀φ = σ₀φ^{q−1}`.
pub fn nu0(dim: usize, q: f64) -> f64 {
    let n = dim as f64;
    4.0 / (n * (q - 2.0)) * (1.0 - (q - 2.0) * (n - 2.0) / 4.0)
}

/// Coefficient `σ₀` of the GN-minimizer equation.
pub fn sigma0(dim: usize, q: f64) -> f64 {
    4.0 / (dim as f64 * (q - 2.0))
}

/// Positive ground state `w` of `−Δw + w = w^{q−1}` with cached norms.
#[derive(Debug, Clone)]
pub struct Soliton {
    pub profile: RadialFn,
    pub q: f64,
    pub mass_sq: f64,
    pub lq_q: f64,
    pub grad_sq: f64,
    /// Relative equation residual on its own grid; reference for rescalings.
    pub residual: f64,
}

impl Soliton {
    pub fn center(&self) -> f64 {
        self.profile.center
    }
}

/// Residual relative to the size of the individual equation terms.
pub fn relative_residual(f: &RadialFn, rhs: &Nonlinearity) -> f64 {
    let d1 = f.derivative();
    let d2 = f.second_derivative();
    let nn = f.dim() as f64;
    let r = &f.grid.nodes;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..r.len() - 1 {
        let a = -d2[i];
        let b = -(nn - 1.0) / r[i] * d1[i];
        let c = rhs.eval(f.values[i]);
        worst = worst.max((a + b - c).abs());
        scale = scale.max(a.abs()).max(b.abs()).max(c.abs());
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

/// Shoots for the soliton. `tol` is the relative width at which the center
/// bisection stops before the separatrix is traced.
pub fn soliton(params: &ProblemParams, tol: f64) -> Result<Soliton> {
    soliton_with_nodes(params, tol, DEFAULT_NODES)
}

pub fn soliton_with_nodes(params: &ProblemParams, tol: f64, nodes: usize) -> Result<Soliton> {
    let rhs = Nonlinearity::scalar_field(-1.0, 1.0, params.q);
    let sh = Shooter::new(params.dim, rhs.clone())?;
    let (lo, hi) = (sh.min_center() * (1.0 + 1e-9), 1e6);
    let scan = sh.scan(lo, hi, 90)?;
    let tr = Shooter::transitions(&scan);
    if tr.len() != 1 {
        return Err(NlsError::SearchFailure { lo, hi });
    }
    let (blo, bhi) = sh.refine(tr[0].0, tr[0].1, tol)?;
    let trace = sh.trace(blo, bhi)?;
    let grid = trace.natural_grid(sh.core_width(trace.center), nodes)?;
    let profile = trace.to_profile(&grid);
    if !profile.is_positive_decreasing() {
        return Err(NlsError::NumericFailure("soliton profile is not positive and decreasing".into()));
    }
    Ok(Soliton {
        q: params.q,
        mass_sq: profile.mass_sq(),
        lq_q: profile.lp_pow(params.q),
        grad_sq: grad_norm_sq(&profile),
        residual: relative_residual(&profile, &rhs),
        profile,
    })
}

/// `‖f‖_q / (‖f‖₂^{1−γ_q} ‖∇f‖₂^{γ_q})`.
pub fn gn_quotient(f: &RadialFn, params: &ProblemParams) -> f64 {
    let g = params.gamma_q;
    f.lp_pow(params.q).powf(1.0 / params.q) / (f.mass_sq().powf(0.5 * (1.0 - g)) * grad_norm_sq(f).powf(0.5 * g))
}

/// Best GN constant, attained by the soliton.
pub fn gn_constant(params: &ProblemParams, sol: &Soliton) -> f64 {
    let g = params.gamma_q;
    sol.lq_q.powf(1.0 / params.q) / (sol.mass_sq.powf(0.5 * (1.0 - g)) * sol.grad_sq.powf(0.5 * g))
}

/// `amplitude · f(k r)` on the node set `r_i / k`, exact for every sample.
pub fn dilate(f: &RadialFn, amplitude: f64, k: f64) -> Result<RadialFn> {
    let nodes: Vec<f64> = f.grid.nodes.iter().map(|r| r / k).collect();
    let grid = RadialGrid::from_nodes(f.dim(), nodes)?;
    let tail = match f.tail {
        Tail::Exponential { k: kk } => Tail::Exponential { k: kk * k },
        t => t,
    };
    RadialFn::new(grid, amplitude * f.center, f.values.iter().map(|v| amplitude * v).collect(), tail)
}

fn check_equation(f: &RadialFn, rhs: &Nonlinearity, reference: f64) -> Result<()> {
    let res = relative_residual(f, rhs);
    if res > 10.0 * reference.max(1e-7) {
        return Err(NlsError::CoefficientMismatch { residual: res });
    }
    Ok(())
}

/// `φ₀(x) = (ν₀/σ₀)^{1/(q−2)} w(√ν₀ x)`, checked against `−Δφ₀ + ν₀φ₀ = σ₀φ₀^{q−1}`.
pub fn gn_minimizer_phi0(params: &ProblemParams, sol: &Soliton) -> Result<RadialFn> {
    let (n0, s0) = (nu0(params.dim, params.q), sigma0(params.dim, params.q));
    let phi = dilate(&sol.profile, (n0 / s0).powf(1.0 / (params.q - 2.0)), n0.sqrt())?;
    check_equation(&phi, &Nonlinearity::scalar_field(-n0, s0, params.q), sol.residual)?;
    Ok(phi)
}

/// Member of the GN-minimizer family solving `−Δψ + νψ = σψ^{q−1}`:
/// `ψ(x) = (σ₀ν/(σν₀))^{1/(q−2)} φ₀(√(ν/ν₀) x)`.
pub fn gn_rescale(phi0: &RadialFn, nu: f64, sigma: f64, params: &ProblemParams) -> Result<RadialFn> {
    if !(nu > 0.0 && sigma > 0.0) {
        return Err(NlsError::InvalidArgument(format!("nu = {nu}, sigma = {sigma} must be positive")));
    }
    let (n0, s0) = (nu0(params.dim, params.q), sigma0(params.dim, params.q));
    if nu == n0 && sigma == s0 {
        return Ok(phi0.clone());
    }
    let amp = (s0 * nu / (sigma * n0)).powf(1.0 / (params.q - 2.0));
    let psi = dilate(phi0, amp, (nu / n0).sqrt())?;
    let reference = relative_residual(phi0, &Nonlinearity::scalar_field(-n0, s0, params.q));
    check_equation(&psi, &Nonlinearity::scalar_field(-nu, sigma, params.q), reference)?;
    Ok(psi)
}

/// Family indexed as `ψ_{ν,σ}(x) = (ν/σ)^{1/(q−2)} φ₀(√(ν/σ) x)`, which solves
/// `−Δψ + (ν₀ν/σ)ψ = σ₀ψ^{q−1}`.
pub fn psi_family(phi0: &RadialFn, nu: f64, sigma: f64, params: &ProblemParams) -> Result<RadialFn> {
    let (n0, s0) = (nu0(params.dim, params.q), sigma0(params.dim, params.q));
    gn_rescale(phi0, n0 * nu / sigma, s0, params)
}

/// Mass-matching parameter: `ψ_{ν_a,1}` of [`psi_family`] has mass `a²`.
pub fn nu_a(a: f64, phi0: &RadialFn, params: &ProblemParams) -> Result<f64> {
    if params.is_mass_critical() {
        return Err(NlsError::MassCriticalDegenerate);
    }
    let (n, q) = (params.n(), params.q);
    Ok((a * a / phi0.mass_sq()).powf(2.0 * (q - 2.0) / (4.0 - n * (q - 2.0))))
}

/// `ψ_a = ψ_{ν_a,1}`, the mass-`a²` GN minimizer with coefficient `σ₀`.
pub fn psi_a(phi0: &RadialFn, params: &ProblemParams) -> Result<RadialFn> {
    psi_family(phi0, nu_a(params.a, phi0, params)?, 1.0, params)
}

/// The `ν` for which [`gn_rescale`]`(φ₀, ν, σ)` has mass `a²`.
pub fn nu_for_mass(phi0: &RadialFn, sigma: f64, a: f64, params: &ProblemParams) -> Result<f64> {
    if params.is_mass_critical() {
        return Err(NlsError::MassCriticalDegenerate);
    }
    let (n0, s0) = (nu0(params.dim, params.q), sigma0(params.dim, params.q));
    let e = 2.0 / (params.q - 2.0);
    let x = e - 0.5 * params.n();
    // mass = (σ₀/(σν₀))^e ν₀^{N/2} ν^x M₀
    let m0 = phi0.mass_sq() * (s0 / (sigma * n0)).powf(e) * n0.powf(0.5 * params.n());
    Ok((a * a / m0).powf(1.0 / x))
}

/// Mass-critical threshold `α_{N,q} = C^{−q}(1 + 2/N) = 1/(C^q γ_q)`.
pub fn alpha_crit(params: &ProblemParams, c: f64) -> Result<f64> {
    if !params.is_mass_critical() {
        return Err(NlsError::InvalidArgument(format!("alpha_crit needs q = 2 + 4/N, got q = {}", params.q)));
    }
    let first = c.powf(-params.q) * (1.0 + 2.0 / params.n());
    let second = 1.0 / (c.powf(params.q) * params.gamma_q);
    if (first - second).abs() > 1e-12 * first {
        return Err(NlsError::NumericFailure(format!("threshold forms disagree: {first} vs {second}")));
    }
    Ok(first)
}

/// Named constants for one `(N, q, a)`.
#[derive(Debug, Clone, Serialize)]
pub struct Constants {
    pub dim: usize,
    pub q: f64,
    pub sobolev: f64,
    pub c_nq: f64,
    pub nu0: f64,
    pub sigma0: f64,
    pub alpha_crit: Option<f64>,
    pub nu_a: Option<f64>,
    pub soliton_center: f64,
    pub soliton_mass_sq: f64,
    pub soliton_lq_q: f64,
    pub soliton_grad_sq: f64,
}

/// Everything derived from `(N, q)`: the soliton, `φ₀` and the constants.
#[derive(Debug, Clone)]
pub struct SpecialSet {
    pub constants: Constants,
    pub soliton: Soliton,
    pub phi0: RadialFn,
}

pub fn compute_constants(params: &ProblemParams) -> Result<SpecialSet> {
    let sol = soliton(params, 0.0)?;
    let c = gn_constant(params, &sol);
    let phi0 = gn_minimizer_phi0(params, &sol)?;
    let alpha = if params.is_mass_critical() { Some(alpha_crit(params, c)?) } else { None };
    let na = if params.is_mass_critical() { None } else { Some(nu_a(params.a, &phi0, params)?) };
    Ok(SpecialSet {
        constants: Constants {
            dim: params.dim,
            q: params.q,
            sobolev: sobolev_constant(params.dim)?,
            c_nq: c,
            nu0: nu0(params.dim, params.q),
            sigma0: sigma0(params.dim, params.q),
            alpha_crit: alpha,
            nu_a: na,
            soliton_center: sol.center(),
            soliton_mass_sq: sol.mass_sq,
            soliton_lq_q: sol.lq_q,
            soliton_grad_sq: sol.grad_sq,
        },
        soliton: sol,
        phi0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use libm::tgamma;
    use std::f64::consts::PI;

    /// Closed-form sharp Sobolev constant, used only as a test oracle.
    fn sobolev_closed_form(dim: usize) -> f64 {
        let n = dim as f64;
        let area = 2.0 * PI.powf(0.5 * (n + 1.0)) / tgamma(0.5 * (n + 1.0));
        n * (n - 2.0) / 4.0 * area.powf(2.0 / n)
    }

    #[test]
    fn bubble_center_values() {
        assert!((bubble_value(3, 1.0, 0.0) - 3f64.powf(0.25)).abs() < 1e-15);
        let e: f64 = 0.37;
        assert!((bubble_value(5, e, 0.0) - 15f64.powf(0.75) * e.powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn bubble_scale_covariance() {
        let e: f64 = 0.013;
        for &r in &[0.0, 0.3, 2.0, 40.0] {
            let lhs = e.powf(0.5) * bubble_value(3, e, e * r);
            assert!((lhs / bubble_value(3, 1.0, r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sobolev_matches_closed_form() {
        for dim in [3usize, 4, 5] {
            let s = sobolev_constant(dim).unwrap();
            assert!((s / sobolev_closed_form(dim) - 1.0).abs() < 1e-5, "N={dim}: {s}");
        }
    }

    #[test]
    fn soliton_identities() {
        let p = ProblemParams::new(3, 4.0, 1.0, 0.0).unwrap();
        let s = soliton(&p, 0.0).unwrap();
        assert!((s.grad_sq + s.mass_sq - s.lq_q).abs() < 1e-6 * s.lq_q);
        assert!((s.grad_sq - p.gamma_q * s.lq_q).abs() < 1e-6 * s.lq_q);
    }
}
