//! Parameter sweeps, power-law fits and the quantitative checks of the
//! small-μ, large-μ and near-threshold regimes.
//!
//! Every predicted exponent is derived from `(N, q)` by the functions in this
//! module at run time.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bvp::{solve_all, SolutionBranch};
use crate::error::{NlsError, Result};
use crate::fibering::{s_mu_solve, Norms, PohozaevClass};
use crate::grid::{grad_norm_sq, h1_dist, h1_norm, RadialFn, RadialGrid, Tail};
use crate::params::ProblemParams;
use crate::special::{
    bubble_amplitude, bubble_eps_for_peak, bubble_slope, bubble_value, compute_constants, dilate, gn_rescale,
    nu_for_mass, psi_a, psi_family, sobolev_constant, SpecialSet, DEFAULT_NODES,
};

/// Nodes of the grids carrying the cut-off bubble.
const TESTFN_NODES: usize = 20_000;
/// Panels of the composite Simpson rule used away from the bubble core.
const SIMPSON_PANELS: usize = 20_000;

// ---------------------------------------------------------------------------
// Predicted exponents.

/// `2/(2 − qγ_q)`: growth of `−λ` and `‖∇u‖₂²` on the Plus branch.
pub fn small_mu_exponent(params: &ProblemParams) -> f64 {
    2.0 / (2.0 - params.q_gamma())
}

/// `−1/(2 − qγ_q)`: exponent of `s_μ μ^{−1/(2−qγ_q)} → σ₀^{−1/(2−qγ_q)}`.
pub fn s_mu_exponent(params: &ProblemParams) -> f64 {
    1.0 / (2.0 - params.q_gamma())
}

/// `−2/(qγ_q − 2)`: decay of `‖∇u‖₂²` on the Minus branch as μ → ∞.
pub fn large_mu_exponent(params: &ProblemParams) -> f64 {
    -2.0 / (params.q_gamma() - 2.0)
}

/// Relation between μ and the concentration scale ε on the Minus branch as μ → 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ConcentrationLaw {
    /// `μ ∼ ε^e`.
    Power(f64),
    /// `μ ∼ ε^e / ln(1/ε)`.
    LogCorrected(f64),
    /// `μ ∼ ε^{poly} e^{rate·ε^{−2}}`.
    Exponential { poly: f64, rate: f64 },
}

impl ConcentrationLaw {
    pub fn formula(&self) -> String {
        match self {
            ConcentrationLaw::Power(e) => format!("mu ~ eps^{e}"),
            ConcentrationLaw::LogCorrected(e) => format!("mu ~ eps^{e} / ln(1/eps)"),
            ConcentrationLaw::Exponential { poly, rate } => format!("mu ~ eps^{poly} exp({rate} eps^-2)"),
        }
    }
}

pub fn concentration_law(params: &ProblemParams) -> Result<ConcentrationLaw> {
    let q = params.q;
    match params.dim {
        3 if q > 3.0 => Ok(ConcentrationLaw::Power(q / 2.0 - 1.0)),
        3 if q < 3.0 => Ok(ConcentrationLaw::Power(5.0 - 1.5 * q)),
        3 => Ok(ConcentrationLaw::LogCorrected(0.5)),
        4 => Ok(ConcentrationLaw::Exponential { poly: 6.0 - q, rate: -2.0 }),
        n => Err(NlsError::InvalidArgument(format!("no concentration law for N = {n}"))),
    }
}

/// Order of `‖χU_ε‖_p^p` as ε → 0 and whether it carries a `ln(1/ε)` factor.
pub fn lp_order(dim: usize, p: f64) -> (f64, bool) {
    let n = dim as f64;
    let border = n / (n - 2.0);
    if p > border {
        (n - (n - 2.0) * p / 2.0, false)
    } else if p == border {
        (n / 2.0, true)
    } else if dim == 3 {
        (p / 2.0, false)
    } else {
        // Only p = 2 at N = 4 reaches this arm.
        (2.0, dim == 4)
    }
}

/// Order of `‖∇(χU_ε)‖₂² − S^{N/2}`.
pub fn grad_deficit_order(dim: usize) -> f64 {
    dim as f64 - 2.0
}

/// Order of `S^{N/2} − ‖χU_ε‖^{2*}_{2*}`.
pub fn critical_deficit_order(dim: usize) -> f64 {
    dim as f64
}

/// Order of `∫ u χU_ε` for a fixed profile `u` that is positive at the origin.
pub fn cross_term_order(dim: usize) -> f64 {
    0.5 * (dim as f64 - 2.0)
}

/// `2/(2*−2)`, the exponent in the near-threshold gradient bound that follows
/// from the Sobolev and Gagliardo–Nirenberg inequalities.
pub fn sandwich_exponent(params: &ProblemParams) -> f64 {
    2.0 / (params.two_star - 2.0)
}

/// `2*/(2*−2)`, the exponent as printed next to the near-threshold bound.
pub fn sandwich_exponent_printed(params: &ProblemParams) -> f64 {
    params.two_star / (params.two_star - 2.0)
}

// ---------------------------------------------------------------------------
// Fits.

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub predicted_slope: Option<f64>,
    pub rel_slope_err: Option<f64>,
}

impl ScalingFit {
    pub fn with_prediction(mut self, predicted: f64) -> Self {
        self.predicted_slope = Some(predicted);
        self.rel_slope_err = Some(((self.slope - predicted) / predicted).abs());
        self
    }

    /// Whether the slope lies within `tol` (relative) of the prediction.
    pub fn within(&self, tol: f64) -> bool {
        self.rel_slope_err.is_some_and(|e| e <= tol)
    }
}

/// Least-squares line through `(x, y)`.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(NlsError::InvalidArgument(format!("{} abscissae for {} ordinates", xs.len(), ys.len())));
    }
    if xs.len() < 5 {
        return Err(NlsError::InvalidArgument(format!("need at least 5 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(NlsError::InvalidArgument("non-finite data".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(NlsError::InvalidArgument("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(ScalingFit { slope, intercept, r_squared, predicted_slope: None, rel_slope_err: None })
}

/// Least-squares line through `(ln x, ln y)`; needs five points spanning two decades.
pub fn fit_power(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(NlsError::InvalidArgument("power fits need positive data".into()));
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(0.0, f64::max);
    if (hi / lo).log10() < 2.0 - 1e-9 {
        return Err(NlsError::InvalidArgument(format!("abscissae span {:.3} decades, need 2", (hi / lo).log10())));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    fit_linear(&lx, &ly)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

// ---------------------------------------------------------------------------
// Sweeps.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepBranch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub mu: f64,
    pub lambda: f64,
    pub grad_sq: f64,
    pub lq_q: f64,
    pub l2star: f64,
    pub energy: f64,
    pub center: f64,
    /// Fibering scale of `ψ_a` at this μ (Plus records below the mass-critical exponent).
    pub s_mu: Option<f64>,
    /// ε with `U_ε(0) = u(0)` (Minus records).
    pub eps_mu: Option<f64>,
    /// Relative distance of the rescaled profile to its small-μ limit.
    pub profile_err: Option<f64>,
    /// Constant `C` in `v ≤ C(1+r²)^{−(N−2)/2}` for the peak-rescaled Minus profile,
    /// or for the profile itself on Plus records.
    pub decay_bound: f64,
    pub certified: bool,
    #[serde(skip)]
    pub profile: RadialFn,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub mu: f64,
    pub plus: Option<SweepRecord>,
    pub minus: Option<SweepRecord>,
}

impl SweepPoint {
    pub fn get(&self, branch: SweepBranch) -> Option<&SweepRecord> {
        match branch {
            SweepBranch::Plus => self.plus.as_ref(),
            SweepBranch::Minus => self.minus.as_ref(),
        }
    }
}

fn check_mu_grid(mu_grid: &[f64]) -> Result<()> {
    if mu_grid.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(NlsError::InvalidArgument("mu grid must be positive".into()));
    }
    if mu_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NlsError::InvalidArgument("mu grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Solves every point of `mu_grid` once and keeps the least-energy solution of
/// each class. Points where a class is missing or the solver fails are absent.
pub fn sweep_both(params: &ProblemParams, mu_grid: &[f64]) -> Result<Vec<SweepPoint>> {
    check_mu_grid(mu_grid)?;
    let psi = if params.is_mass_subcritical() && !mu_grid.is_empty() {
        let set = compute_constants(params)?;
        Some(psi_a(&set.phi0, params)?)
    } else {
        None
    };
    let points = mu_grid
        .par_iter()
        .map(|&mu| {
            let p = params.with_mu(mu);
            let sols = solve_all(&p).unwrap_or_default();
            let pick = |class| sols.iter().filter(|s| s.p_class == class).min_by(|a, b| a.energy.total_cmp(&b.energy));
            SweepPoint {
                mu,
                plus: pick(PohozaevClass::Plus).map(|s| plus_record(s, &p, psi.as_ref())),
                minus: pick(PohozaevClass::Minus).map(|s| minus_record(s, &p)),
            }
        })
        .collect();
    Ok(points)
}

/// Records of one class along `mu_grid`, in μ order.
pub fn sweep(params: &ProblemParams, mu_grid: &[f64], branch: SweepBranch) -> Result<Vec<SweepRecord>> {
    Ok(sweep_both(params, mu_grid)?.iter().filter_map(|p| p.get(branch).cloned()).collect())
}

fn base_record(sol: &SolutionBranch, params: &ProblemParams) -> SweepRecord {
    SweepRecord {
        mu: params.mu,
        lambda: sol.lambda,
        grad_sq: sol.norms.grad_sq,
        lq_q: sol.norms.lq_q,
        l2star: sol.norms.l2s,
        energy: sol.energy,
        center: sol.center,
        s_mu: None,
        eps_mu: None,
        profile_err: None,
        decay_bound: sol.cert.decay_bound,
        certified: sol.cert.passed,
        profile: sol.profile.clone(),
    }
}

fn plus_record(sol: &SolutionBranch, params: &ProblemParams, psi: Option<&RadialFn>) -> SweepRecord {
    let mut rec = base_record(sol, params);
    if let Some(psi) = psi {
        if let Ok(s) = s_mu_solve(psi, params.mu, params) {
            rec.s_mu = Some(s);
            rec.profile_err = small_mu_profile(&sol.profile, s, psi).ok().map(|p| p.0);
        }
    }
    rec
}

fn minus_record(sol: &SolutionBranch, params: &ProblemParams) -> SweepRecord {
    let mut rec = base_record(sol, params);
    let eps = bubble_eps_for_peak(params.dim, sol.center);
    rec.eps_mu = Some(eps);
    if let Ok(v) = peak_rescaled(&sol.profile, eps) {
        rec.decay_bound = decay_constant(&v);
        rec.profile_err = if params.dim >= 5 {
            mass_matched_bubble_distance(&sol.profile, params).ok().map(|d| d.1)
        } else {
            d12_distance_to_unit_bubble(&v).ok()
        };
    }
    rec
}

// ---------------------------------------------------------------------------
// Small-μ Plus branch.

#[derive(Debug, Clone, Serialize)]
pub struct SmallMuScalingReport {
    pub lambda_fit: ScalingFit,
    pub grad_fit: ScalingFit,
    /// Extremes of `−λ/‖∇u‖₂²` across the sweep.
    pub ratio_min: f64,
    pub ratio_max: f64,
}

pub fn check_small_mu_scaling(records: &[SweepRecord], params: &ProblemParams) -> Result<SmallMuScalingReport> {
    if !params.is_mass_subcritical() {
        return Err(NlsError::InvalidArgument("the Plus-branch scaling needs q < 2 + 4/N".into()));
    }
    let predicted = small_mu_exponent(params);
    let mus: Vec<f64> = records.iter().map(|r| r.mu).collect();
    let lam: Vec<f64> = records.iter().map(|r| -r.lambda).collect();
    let grad: Vec<f64> = records.iter().map(|r| r.grad_sq).collect();
    let ratios: Vec<f64> = lam.iter().zip(&grad).map(|(l, g)| l / g).collect();
    Ok(SmallMuScalingReport {
        lambda_fit: fit_power(&mus, &lam)?.with_prediction(predicted),
        grad_fit: fit_power(&mus, &grad)?.with_prediction(predicted),
        ratio_min: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        ratio_max: ratios.iter().cloned().fold(0.0, f64::max),
    })
}

/// `w = s^{−N/2} u(·/s)` compared with `ψ_a` on the grid of `ψ_a`:
/// returns the relative H¹ distance and `‖w‖₂²`.
pub fn small_mu_profile(u: &RadialFn, s: f64, psi_a: &RadialFn) -> Result<(f64, f64)> {
    let n = u.dim() as f64;
    let w = dilate(u, s.powf(-0.5 * n), 1.0 / s)?;
    let mass = w.mass_sq();
    let on = w.resample(&psi_a.grid)?;
    Ok((h1_dist(&on, psi_a)? / h1_norm(psi_a), mass))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub mu: f64,
    pub s_mu: f64,
    pub profile_err: f64,
    pub rescaled_mass_sq: f64,
    /// `s_μ μ^{−1/(2−qγ_q)}`.
    pub s_prefactor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub rows: Vec<ProfileRow>,
    /// `σ₀^{−1/(2−qγ_q)}`.
    pub predicted_prefactor: f64,
    pub strictly_decreasing: bool,
}

pub fn check_small_mu_profile(records: &[SweepRecord], params: &ProblemParams, psi_a: &RadialFn) -> Result<ProfileReport> {
    let e = s_mu_exponent(params);
    let mut rows = Vec::new();
    for rec in records {
        let p = params.with_mu(rec.mu);
        let s = match rec.s_mu {
            Some(s) => s,
            None => s_mu_solve(psi_a, rec.mu, &p)?,
        };
        let (err, mass) = small_mu_profile(&rec.profile, s, psi_a)?;
        rows.push(ProfileRow {
            mu: rec.mu,
            s_mu: s,
            profile_err: err,
            rescaled_mass_sq: mass,
            s_prefactor: s * rec.mu.powf(-e),
        });
    }
    rows.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    // Errors must shrink as μ decreases, i.e. grow along increasing μ.
    let strictly_decreasing = rows.windows(2).all(|w| w[0].profile_err < w[1].profile_err);
    let sigma0 = crate::special::sigma0(params.dim, params.q);
    Ok(ProfileReport { rows, predicted_prefactor: sigma0.powf(-e), strictly_decreasing })
}

// ---------------------------------------------------------------------------
// Small-μ Minus branch.

/// `ε^{(N−2)/2} u(ε r)`, which has the peak of `U_1`.
pub fn peak_rescaled(u: &RadialFn, eps: f64) -> Result<RadialFn> {
    let n = u.dim() as f64;
    dilate(u, eps.powf(0.5 * (n - 2.0)), eps)
}

/// `max v(r)(1+r²)^{(N−2)/2}`.
pub fn decay_constant(v: &RadialFn) -> f64 {
    let half = 0.5 * (v.dim() as f64 - 2.0);
    v.grid.nodes.iter().zip(&v.values).fold(v.center, |c, (&r, &x)| c.max(x * (1.0 + r * r).powf(half)))
}

/// `‖∇(v − U_1)‖₂ / ‖∇U_1‖₂` on the grid of `v`.
pub fn d12_distance_to_unit_bubble(v: &RadialFn) -> Result<f64> {
    let dim = v.dim();
    let n = dim as f64;
    let u1 = RadialFn::from_fn(&v.grid, Tail::Power { p: n - 2.0 }, |r| bubble_value(dim, 1.0, r));
    let d = v.sub(&u1)?;
    let s = sobolev_constant(dim)?;
    Ok((grad_norm_sq(&d) / s.powf(0.5 * n)).sqrt())
}

/// `‖U_1‖₂²` for `N ≥ 5`: `|S^{N−1}| A² ½B(N/2, N/2−2)`.
pub fn unit_bubble_mass_sq(dim: usize) -> Result<f64> {
    if dim < 5 {
        return Err(NlsError::InvalidArgument(format!("U_1 is not square integrable for N = {dim}")));
    }
    let n = dim as f64;
    let beta = libm::tgamma(n / 2.0) * libm::tgamma(n / 2.0 - 2.0) / libm::tgamma(n - 2.0);
    Ok(crate::grid::sphere_area(dim) * bubble_amplitude(dim).powi(2) * 0.5 * beta)
}

/// `ε₀` with `‖U_{ε₀}‖₂² = a²` and the relative H¹ distance of `u` to `U_{ε₀}`.
pub fn mass_matched_bubble_distance(u: &RadialFn, params: &ProblemParams) -> Result<(f64, f64)> {
    let dim = params.dim;
    let n = dim as f64;
    let eps0 = params.a / unit_bubble_mass_sq(dim)?.sqrt();
    let b = RadialFn::from_fn(&u.grid, Tail::Power { p: n - 2.0 }, |r| bubble_value(dim, eps0, r));
    Ok((eps0, h1_dist(u, &b)? / h1_norm(&b)))
}

#[derive(Debug, Clone, Serialize)]
pub struct BubbleRow {
    pub mu: f64,
    pub eps_mu: f64,
    /// D^{1,2} distance to `U_1` (N = 3, 4) or H¹ distance to `U_{ε₀}` (N ≥ 5), relative.
    pub distance: f64,
    pub decay_constant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BubbleReport {
    pub sobolev_level: f64,
    /// `|‖∇u‖₂²/S^{N/2} − 1|` at the smallest μ.
    pub grad_dev: f64,
    /// `|‖u‖^{2*}_{2*}/S^{N/2} − 1|` at the smallest μ.
    pub l2star_dev: f64,
    pub eps0: Option<f64>,
    pub rows: Vec<BubbleRow>,
    pub decay_constant_max: f64,
    pub decay_constant_min: f64,
}

pub fn check_bubble_limit(records: &[SweepRecord], params: &ProblemParams) -> Result<BubbleReport> {
    let first = records
        .iter()
        .min_by(|a, b| a.mu.total_cmp(&b.mu))
        .ok_or_else(|| NlsError::InvalidArgument("empty sweep".into()))?;
    let level = sobolev_constant(params.dim)?.powf(0.5 * params.n());
    let mut rows = Vec::new();
    let mut eps0 = None;
    for rec in records {
        let eps = bubble_eps_for_peak(params.dim, rec.center);
        let v = peak_rescaled(&rec.profile, eps)?;
        let distance = if params.dim >= 5 {
            let (e0, d) = mass_matched_bubble_distance(&rec.profile, params)?;
            eps0 = Some(e0);
            d
        } else {
            d12_distance_to_unit_bubble(&v)?
        };
        rows.push(BubbleRow { mu: rec.mu, eps_mu: eps, distance, decay_constant: decay_constant(&v) });
    }
    rows.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    Ok(BubbleReport {
        sobolev_level: level,
        grad_dev: (first.grad_sq / level - 1.0).abs(),
        l2star_dev: (first.l2star / level - 1.0).abs(),
        eps0,
        decay_constant_max: rows.iter().map(|r| r.decay_constant).fold(0.0, f64::max),
        decay_constant_min: rows.iter().map(|r| r.decay_constant).fold(f64::INFINITY, f64::min),
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub law: ConcentrationLaw,
    pub formula: String,
    pub fit: ScalingFit,
}

/// Fits μ against the peak-matched concentration scale.
pub fn check_concentration_rate(records: &[SweepRecord], params: &ProblemParams) -> Result<ConcentrationReport> {
    let law = concentration_law(params)?;
    let eps: Vec<f64> = records.iter().map(|r| bubble_eps_for_peak(params.dim, r.center)).collect();
    let mus: Vec<f64> = records.iter().map(|r| r.mu).collect();
    let fit = match law {
        ConcentrationLaw::Power(e) => fit_power(&eps, &mus)?.with_prediction(e),
        ConcentrationLaw::LogCorrected(e) => {
            let ys: Vec<f64> = mus.iter().zip(&eps).map(|(m, e)| m * (1.0 / e).ln()).collect();
            fit_power(&eps, &ys)?.with_prediction(e)
        }
        ConcentrationLaw::Exponential { poly, rate } => {
            let xs: Vec<f64> = eps.iter().map(|e| e.powi(-2)).collect();
            let ys: Vec<f64> = mus.iter().zip(&eps).map(|(m, e)| m.ln() - poly * e.ln()).collect();
            fit_linear(&xs, &ys)?.with_prediction(rate)
        }
    };
    Ok(ConcentrationReport { law, formula: law.formula(), fit })
}

// ---------------------------------------------------------------------------
// Large-μ Minus branch.

/// `(γ_q a^{q−qγ_q} C^q)^{−2/(qγ_q−2)}`, so that `‖∇u‖₂² ≈ prefactor · μ^{−2/(qγ_q−2)}`.
pub fn large_mu_grad_prefactor(params: &ProblemParams, c_nq: f64) -> f64 {
    let (q, g) = (params.q, params.gamma_q);
    (g * params.a.powf(q - q * g) * c_nq.powf(q)).powf(large_mu_exponent(params))
}

/// `((1−γ_q)/a²)` times [`large_mu_grad_prefactor`], the printed form of the
/// `−λ` asymptotics.
pub fn large_mu_lambda_prefactor(params: &ProblemParams, c_nq: f64) -> f64 {
    (1.0 - params.gamma_q) / (params.a * params.a) * large_mu_grad_prefactor(params, c_nq)
}

/// `((1−γ_q)/(γ_q a²))` times [`large_mu_grad_prefactor`]: the `−λ` prefactor
/// implied by `−λa² = (1−γ_q)μ‖u‖_q^q` and `‖∇u‖₂² ≈ γ_q μ‖u‖_q^q`.
pub fn large_mu_lambda_prefactor_identity(params: &ProblemParams, c_nq: f64) -> f64 {
    large_mu_lambda_prefactor(params, c_nq) / params.gamma_q
}

#[derive(Debug, Clone, Serialize)]
pub struct LargeMuRow {
    pub mu: f64,
    /// `‖∇u‖₂² μ^{2/(qγ_q−2)}`.
    pub grad_prefactor: f64,
    /// `−λ μ^{2/(qγ_q−2)}`.
    pub lambda_prefactor: f64,
    /// Relative H¹ distance of `s^{N/2}u(s·)` to the mass-`a²` solution of `−Δψ + νψ = ψ^{q−1}`.
    pub profile_err: f64,
    /// The same distance measured against `ψ_{ν_a,1}` of the σ₀-normalized family.
    pub profile_err_sigma0_member: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LargeMuReport {
    pub grad_fit: ScalingFit,
    pub predicted_grad_prefactor: f64,
    pub predicted_lambda_prefactor: f64,
    pub identity_lambda_prefactor: f64,
    /// Relative errors of the prefactors at the largest μ.
    pub grad_prefactor_err: f64,
    pub lambda_prefactor_err: f64,
    pub identity_lambda_prefactor_err: f64,
    pub rows: Vec<LargeMuRow>,
}

pub fn check_large_mu(records: &[SweepRecord], params: &ProblemParams, set: &SpecialSet) -> Result<LargeMuReport> {
    if !params.is_mass_supercritical() {
        return Err(NlsError::InvalidArgument("the large-mu scaling needs q > 2 + 4/N".into()));
    }
    let e = large_mu_exponent(params);
    let c = set.constants.c_nq;
    let pg = large_mu_grad_prefactor(params, c);
    let pl = large_mu_lambda_prefactor(params, c);
    let pi = large_mu_lambda_prefactor_identity(params, c);
    let limit = gn_rescale(&set.phi0, nu_for_mass(&set.phi0, 1.0, params.a, params)?, 1.0, params)?;
    let sigma0_member = psi_a(&set.phi0, params)?;
    let n = params.n();
    let mut rows = Vec::new();
    for rec in records {
        let s = rec.mu.powf(1.0 / (params.q_gamma() - 2.0));
        let v = dilate(&rec.profile, s.powf(0.5 * n), s)?;
        let dist =
            |target: &RadialFn| -> Result<f64> { Ok(h1_dist(&target.resample(&v.grid)?, &v)? / h1_norm(target)) };
        rows.push(LargeMuRow {
            mu: rec.mu,
            grad_prefactor: rec.grad_sq * rec.mu.powf(-e),
            lambda_prefactor: -rec.lambda * rec.mu.powf(-e),
            profile_err: dist(&limit)?,
            profile_err_sigma0_member: dist(&sigma0_member)?,
        });
    }
    rows.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    let last = rows.last().ok_or_else(|| NlsError::InvalidArgument("empty sweep".into()))?;
    let mus: Vec<f64> = rows.iter().map(|r| r.mu).collect();
    let grads: Vec<f64> = rows.iter().map(|r| r.grad_prefactor * r.mu.powf(e)).collect();
    Ok(LargeMuReport {
        grad_fit: fit_power(&mus, &grads)?.with_prediction(e),
        predicted_grad_prefactor: pg,
        predicted_lambda_prefactor: pl,
        identity_lambda_prefactor: pi,
        grad_prefactor_err: (last.grad_prefactor / pg - 1.0).abs(),
        lambda_prefactor_err: (last.lambda_prefactor / pl - 1.0).abs(),
        identity_lambda_prefactor_err: (last.lambda_prefactor / pi - 1.0).abs(),
        rows,
    })
}

// ---------------------------------------------------------------------------
// Mass-critical exponent.

/// `a^{qγ_q−q} α_{N,q}`.
pub fn critical_threshold(params: &ProblemParams, set: &SpecialSet) -> Result<f64> {
    let alpha =
        set.constants.alpha_crit.ok_or_else(|| NlsError::InvalidArgument("threshold needs q = 2 + 4/N".into()))?;
    Ok(params.a.powf(params.q_gamma() - params.q) * alpha)
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalRow {
    pub mu: f64,
    pub lambda: f64,
    pub grad_sq: f64,
    pub mass_sq: f64,
    /// `‖∇u‖₂² / (1 − μ/α)^{2/(2*−2)}`.
    pub ratio: f64,
    /// `‖∇u‖₂² / (1 − μ/α)^{2*/(2*−2)}`.
    pub ratio_printed: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub lower_ok_printed: bool,
    pub upper_ok_printed: bool,
    pub rescaled_mass_sq: f64,
    pub rescaled_h1_norm: f64,
    /// Best-matching member `ν^{1/(q−2)}φ₀(√ν ·)` and its relative H¹ distance.
    pub gn_nu: f64,
    pub gn_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalReport {
    pub threshold: f64,
    pub lower_bound: f64,
    /// `(‖∇φ₀‖₂/‖φ₀‖_{2*})^N`.
    pub upper_bound: f64,
    /// Mass of every rescaled profile: `‖φ₀‖₂²`.
    pub rescaled_mass_expected: f64,
    pub rows: Vec<CriticalRow>,
}

/// Minimizes the relative H¹ distance from `v` to `ν^{1/(q−2)}φ₀(√ν ·)` over `ln ν`.
fn nearest_gn_member(v: &RadialFn, phi0: &RadialFn, params: &ProblemParams) -> Result<(f64, f64)> {
    let guess = (v.center / phi0.center).powf(params.q - 2.0).ln();
    let dist = |x: f64| -> f64 {
        psi_family(phi0, x.exp(), 1.0, params)
            .and_then(|m| {
                let on = m.resample(&v.grid)?;
                Ok(h1_dist(&on, v)? / h1_norm(&on))
            })
            .unwrap_or(f64::INFINITY)
    };
    let (x, d) = golden_min(dist, guess - 3.0, guess + 3.0, 1e-6);
    Ok((x.exp(), d))
}

/// Golden-section minimum of a unimodal `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

pub fn check_critical_bound(params: &ProblemParams, mu_grid: &[f64], set: &SpecialSet) -> Result<CriticalReport> {
    check_mu_grid(mu_grid)?;
    let alpha = critical_threshold(params, set)?;
    if mu_grid.iter().any(|&m| m >= alpha) {
        return Err(NlsError::InvalidArgument(format!("grid must stay below the threshold {alpha}")));
    }
    let n = params.n();
    let ts = params.two_star;
    let phi0 = &set.phi0;
    let lower = sobolev_constant(params.dim)?.powf(0.5 * n);
    let upper = (grad_norm_sq(phi0).sqrt() / phi0.lp_pow(ts).powf(1.0 / ts)).powf(n);
    let c = params.a / phi0.mass_sq().sqrt();
    let (e, e_printed) = (sandwich_exponent(params), sandwich_exponent_printed(params));
    let rows: Vec<Result<Option<CriticalRow>>> = mu_grid
        .par_iter()
        .map(|&mu| {
            let p = params.with_mu(mu);
            let Some(sol) = solve_all(&p)?.into_iter().find(|s| s.p_class == PohozaevClass::Minus) else {
                return Ok(None);
            };
            let gap = 1.0 - mu / alpha;
            let g = sol.norms.grad_sq;
            let (ratio, ratio_printed) = (g / gap.powf(e), g / gap.powf(e_printed));
            let s = gap.powf(-(n - 2.0) / 4.0);
            let v = dilate(&sol.profile, c.powf(0.5 * (n - 2.0)) * s.powf(0.5 * n), c * s)?;
            let (gn_nu, gn_distance) = nearest_gn_member(&v, phi0, params)?;
            Ok(Some(CriticalRow {
                mu,
                lambda: sol.lambda,
                grad_sq: g,
                mass_sq: sol.mass_sq,
                ratio,
                ratio_printed,
                lower_ok: ratio > lower,
                upper_ok: ratio < upper,
                lower_ok_printed: ratio_printed > lower,
                upper_ok_printed: ratio_printed < upper,
                rescaled_mass_sq: v.mass_sq(),
                rescaled_h1_norm: h1_norm(&v),
                gn_nu,
                gn_distance,
            }))
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        if let Some(row) = r? {
            out.push(row);
        }
    }
    Ok(CriticalReport {
        threshold: alpha,
        lower_bound: lower,
        upper_bound: upper,
        rescaled_mass_expected: phi0.mass_sq(),
        rows: out,
    })
}

/// Family `u_θ ∝ φ₀(1 + θ cos(κ r))` normalized to mass `a²`; `θ = 0` is the
/// GN optimizer and the GN quotient grows continuously with θ.
fn perturbed_optimizer(phi0: &RadialFn, theta: f64, a: f64, kappa: f64) -> RadialFn {
    let nodes = phi0.grid.nodes.clone();
    let mut f = phi0.clone();
    for (v, r) in f.values.iter_mut().zip(&nodes) {
        *v *= 1.0 + theta * (kappa * r).cos();
    }
    f.center *= 1.0 + theta;
    let m = f.mass_sq();
    f.scaled(a / m.sqrt())
}

const MAX_KAPPA_DOUBLINGS: usize = 6;

#[derive(Debug, Clone, Serialize)]
pub struct FamilyPoint {
    /// Relative excess `G/(γ_q μ L) − 1` of the family member.
    pub excess: f64,
    pub theta: f64,
    pub t: f64,
    /// `(1/N)‖φ‖^{2*}_{2*} t^{2*}`.
    pub energy: f64,
    /// Energy of the dilated member computed from its norms directly.
    pub energy_direct: f64,
}

/// Projected energies of GN-near-optimal members at μ above the threshold.
pub fn family_energies(params: &ProblemParams, set: &SpecialSet, excesses: &[f64]) -> Result<Vec<FamilyPoint>> {
    if !params.is_mass_critical() {
        return Err(NlsError::InvalidArgument("family energies need q = 2 + 4/N".into()));
    }
    let (mu, g, ts, n) = (params.mu, params.gamma_q, params.two_star, params.n());
    let quotient = |theta: f64, kappa: f64| {
        let nm = Norms::of(&perturbed_optimizer(&set.phi0, theta, params.a, kappa), params);
        nm.grad_sq / (g * nm.lq_q)
    };
    // The quotient at θ = 0.9 grows with κ; widen until it clears every target.
    let top = mu * (1.0 + excesses.iter().cloned().fold(0.0, f64::max));
    let mut kappa = 4.0 * set.constants.nu0.sqrt();
    for _ in 0..MAX_KAPPA_DOUBLINGS {
        if quotient(0.9, kappa) > top {
            break;
        }
        kappa *= 2.0;
    }
    let quotient = |theta: f64| quotient(theta, kappa);
    let mut out = Vec::new();
    for &x in excesses {
        let target = mu * (1.0 + x);
        let (mut lo, mut hi) = (0.0, 0.9);
        if quotient(hi) <= target {
            return Err(NlsError::SearchFailure { lo, hi });
        }
        if quotient(lo) > target {
            return Err(NlsError::InvalidArgument(format!("mu = {mu} lies below the GN threshold")));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if quotient(mid) > target {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let u = perturbed_optimizer(&set.phi0, hi, params.a, kappa);
        let nm = Norms::of(&u, params);
        let t = ((nm.grad_sq - mu * g * nm.lq_q) / nm.l2s).powf(1.0 / (ts - 2.0));
        out.push(FamilyPoint {
            excess: nm.grad_sq / (g * mu * nm.lq_q) - 1.0,
            theta: hi,
            t,
            energy: nm.l2s * t.powf(ts) / n,
            energy_direct: nm.dilated(t, params).energy(params),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalMassReport {
    pub threshold: f64,
    /// Least Minus-class energy at each μ below the threshold.
    pub below: Vec<(f64, f64)>,
    pub strictly_decreasing: bool,
    pub above_mu: f64,
    pub family: Vec<FamilyPoint>,
    pub family_inf: f64,
    /// No normalized solution was found at `above_mu`.
    pub nonexistence_confirmed: bool,
}

/// Energies below the threshold, the projected family above it and a solve
/// at `above_mu` that must find nothing.
pub fn critical_mass_sweep(
    params: &ProblemParams,
    below: &[f64],
    above_mu: f64,
    set: &SpecialSet,
) -> Result<CriticalMassReport> {
    check_mu_grid(below)?;
    let threshold = critical_threshold(params, set)?;
    if above_mu < threshold {
        return Err(NlsError::InvalidArgument(format!("mu = {above_mu} lies below the threshold {threshold}")));
    }
    let energies: Vec<Result<Option<f64>>> = below
        .par_iter()
        .map(|&mu| {
            let sols = solve_all(&params.with_mu(mu))?;
            Ok(sols.iter().filter(|s| s.p_class == PohozaevClass::Minus).map(|s| s.energy).reduce(f64::min))
        })
        .collect();
    let mut below_pts = Vec::new();
    for (mu, e) in below.iter().zip(energies) {
        if let Some(e) = e? {
            below_pts.push((*mu, e));
        }
    }
    let strictly_decreasing = below_pts.len() == below.len() && below_pts.windows(2).all(|w| w[1].1 < w[0].1);
    let above = params.with_mu(above_mu);
    let excesses: Vec<f64> = (1..=8).map(|k| 10f64.powi(-k)).collect();
    let family = family_energies(&above, set, &excesses)?;
    let family_inf = family.iter().map(|f| f.energy).fold(f64::INFINITY, f64::min);
    let nonexistence_confirmed = solve_all(&above)?.is_empty();
    Ok(CriticalMassReport {
        threshold,
        below: below_pts,
        strictly_decreasing,
        above_mu,
        family,
        family_inf,
        nonexistence_confirmed,
    })
}

/// Bisects μ between a value where a solution exists and one where none is
/// found, until the bracket is narrower than `rel_width · hi`.
pub fn existence_frontier(params: &ProblemParams, mut lo: f64, mut hi: f64, rel_width: f64) -> Result<(f64, f64)> {
    let exists = |mu: f64| -> Result<bool> { Ok(!solve_all(&params.with_mu(mu))?.is_empty()) };
    if !exists(lo)? || exists(hi)? {
        return Err(NlsError::SearchFailure { lo, hi });
    }
    while hi - lo > rel_width * hi {
        let mid = 0.5 * (lo + hi);
        if exists(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------------------
// Cut-off bubbles.

/// Smooth cut-off: 1 on `[0, 1]`, 0 on `[2, ∞)`.
pub fn unit_cutoff(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let s = r - 1.0;
    f(1.0 - s) / (f(1.0 - s) + f(s))
}

fn unit_cutoff_slope(r: f64) -> f64 {
    if r <= 1.0 || r >= 2.0 {
        return 0.0;
    }
    let f = |x: f64| (-1.0 / x).exp();
    let df = |x: f64| (-1.0 / x).exp() / (x * x);
    let s = r - 1.0;
    let (a, b) = (f(1.0 - s), f(s));
    // d/ds [a/(a+b)] with a' = −f'(1−s), b' = f'(s)
    let (da, db) = (-df(1.0 - s), df(s));
    (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
}

/// `W_ε = χ U_ε` sampled on `grid`.
pub fn cutoff_bubble(eps: f64, grid: &Arc<RadialGrid>) -> RadialFn {
    let dim = grid.dim;
    RadialFn::from_fn(grid, Tail::Zero, |r| unit_cutoff(r) * bubble_value(dim, eps, r))
}

fn testfn_grid(dim: usize, eps: f64) -> Result<Arc<RadialGrid>> {
    RadialGrid::geometric(dim, 1e-3 * eps, 2.0, TESTFN_NODES)
}

/// Composite Simpson rule for `∫_a^b f`.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = SIMPSON_PANELS;
    let h = (b - a) / (2 * m) as f64;
    let mut s = f(a) + f(b);
    for i in 1..2 * m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `∫_1^∞ g(r) dr` as Simpson on `[1, 2]` plus `∫_0^{1/2} g(1/x)/x² dx`.
fn outer_integral(g: impl Fn(f64) -> f64) -> f64 {
    let tail = |x: f64| if x == 0.0 { 0.0 } else { g(1.0 / x) / (x * x) };
    simpson(&g, 1.0, 2.0) + simpson(tail, 0.0, 0.5)
}

/// `(‖∇W_ε‖₂² − S^{N/2}, S^{N/2} − ‖W_ε‖^{2*}_{2*})`, both evaluated on `r ≥ 1`
/// where the bubble is smooth, so the O(1) core never enters.
pub fn cutoff_deficits(dim: usize, eps: f64) -> (f64, f64) {
    let n = dim as f64;
    let ts = 2.0 * n / (n - 2.0);
    let area = crate::grid::sphere_area(dim);
    let grad = outer_integral(|r| {
        let (u, du) = (bubble_value(dim, eps, r), bubble_slope(dim, eps, r));
        let dw = unit_cutoff(r) * du + unit_cutoff_slope(r) * u;
        (dw * dw - du * du) * r.powf(n - 1.0)
    });
    let crit = outer_integral(|r| {
        let u = bubble_value(dim, eps, r);
        (u.powf(ts) - (unit_cutoff(r) * u).powf(ts)) * r.powf(n - 1.0)
    });
    (area * grad, area * crit)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderFit {
    pub label: String,
    pub fit: ScalingFit,
    /// The fitted data, `(ε, quantity)`.
    pub data: Vec<(f64, f64)>,
}

impl OrderFit {
    fn new(label: String, eps: &[f64], ys: Vec<f64>, order: f64) -> Result<Self> {
        let fit = fit_power(eps, &ys)?.with_prediction(order);
        Ok(Self { label, fit, data: eps.iter().copied().zip(ys).collect() })
    }
}

/// ε-orders of the cut-off bubble norms. `ps` lists the Lebesgue exponents.
pub fn testfn_orders(eps_grid: &[f64], dim: usize, ps: &[f64]) -> Result<Vec<OrderFit>> {
    let deficits: Vec<(f64, f64)> = eps_grid.iter().map(|&e| cutoff_deficits(dim, e)).collect();
    let mut out = vec![
        OrderFit::new(
            "grad deficit".into(),
            eps_grid,
            deficits.iter().map(|d| d.0.abs()).collect(),
            grad_deficit_order(dim),
        )?,
        OrderFit::new(
            "critical-norm deficit".into(),
            eps_grid,
            deficits.iter().map(|d| d.1.abs()).collect(),
            critical_deficit_order(dim),
        )?,
    ];
    let ws: Vec<RadialFn> =
        eps_grid.iter().map(|&e| Ok(cutoff_bubble(e, &testfn_grid(dim, e)?))).collect::<Result<_>>()?;
    for &p in ps {
        let (order, log) = lp_order(dim, p);
        let ys: Vec<f64> = ws
            .iter()
            .zip(eps_grid)
            .map(|(w, e)| if log { w.lp_pow(p) / (1.0 / e).ln() } else { w.lp_pow(p) })
            .collect();
        let label = if log { format!("L^{p} norm / ln(1/eps)") } else { format!("L^{p} norm") };
        out.push(OrderFit::new(label, eps_grid, ys, order)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Energy along the two-bump path.

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub eps: f64,
    pub t_star: f64,
    pub sup_energy: f64,
    /// `sup_t E − (m⁺ + S^{N/2}/N)`.
    pub margin: f64,
    /// `∫ u₊ W_ε`.
    pub cross: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub m_plus: f64,
    pub bubble_level: f64,
    pub rows: Vec<GapRow>,
    pub cross_fit: Option<ScalingFit>,
    pub minus_energy: Option<f64>,
    /// Minus energy is at most every `sup_t` (within 1e−6).
    pub minus_consistent: Option<bool>,
}

impl GapReport {
    /// Fails with `EstimateFailed` when no tested ε gives a negative margin.
    pub fn verdict(&self) -> Result<()> {
        if self.rows.iter().any(|r| r.margin < 0.0) {
            Ok(())
        } else {
            let best = self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
            Err(NlsError::EstimateFailed(format!("smallest margin {best:e} is not negative")))
        }
    }
}

/// Energy of `s^{(N−2)/2} Ŵ(s·)`, `s = ‖Ŵ‖₂/a`, from the norms of `Ŵ`.
fn normalized_energy(w: &RadialFn, params: &ProblemParams) -> f64 {
    let nm = Norms::of(w, params);
    let s = w.mass_sq().sqrt() / params.a;
    let q = params.q;
    0.5 * nm.grad_sq - params.mu / q * s.powf(params.q_gamma() - q) * nm.lq_q - nm.l2s / params.two_star
}

/// Sup over `t ≥ 0` of the mass-normalized energy of `u₊ + tW_ε` for each ε.
pub fn energy_gap_from(
    params: &ProblemParams,
    eps_grid: &[f64],
    plus: &SolutionBranch,
    minus: Option<&SolutionBranch>,
) -> Result<GapReport> {
    let dim = params.dim;
    let level = sobolev_constant(dim)?.powf(0.5 * params.n()) / params.n();
    let rows: Vec<Result<GapRow>> = eps_grid
        .par_iter()
        .map(|&eps| {
            let grid = RadialGrid::geometric(dim, 1e-3 * eps, plus.profile.grid.r_max, DEFAULT_NODES)?;
            let u = plus.profile.resample(&grid)?;
            let w = cutoff_bubble(eps, &grid);
            let cross = u.inner(&w)?;
            let e = |t: f64| u.axpy(t, &w).map(|f| normalized_energy(&f, params)).unwrap_or(f64::NEG_INFINITY);
            let ts: Vec<f64> = (0..=60).map(|i| 0.05 * i as f64).collect();
            let (ib, _) =
                ts.iter().map(|&t| e(t)).enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty t grid");
            let lo = ts[ib.saturating_sub(1)];
            let hi = ts[(ib + 1).min(ts.len() - 1)];
            let (t_star, neg) = golden_min(|t| -e(t), lo, hi, 1e-9);
            let sup = -neg;
            Ok(GapRow { eps, t_star, sup_energy: sup, margin: sup - (plus.energy + level), cross })
        })
        .collect();
    let rows: Vec<GapRow> = rows.into_iter().collect::<Result<_>>()?;
    let cross_fit = if rows.len() >= 5 {
        let xs: Vec<f64> = rows.iter().map(|r| r.eps).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.cross).collect();
        fit_power(&xs, &ys).ok().map(|f| f.with_prediction(cross_term_order(dim)))
    } else {
        None
    };
    let minus_energy = minus.map(|m| m.energy);
    let minus_consistent = minus_energy.map(|em| rows.iter().all(|r| em <= r.sup_energy + 1e-6));
    Ok(GapReport { m_plus: plus.energy, bubble_level: level, rows, cross_fit, minus_energy, minus_consistent })
}

/// Solves for both classes at `params` and runs [`energy_gap_from`].
pub fn energy_gap_check(params: &ProblemParams, eps_grid: &[f64]) -> Result<GapReport> {
    if params.dim != 3 || !params.is_mass_subcritical() {
        return Err(NlsError::InvalidArgument("the two-bump estimate needs N = 3 and q < 2 + 4/N".into()));
    }
    let sols = solve_all(params)?;
    let plus = sols
        .iter()
        .find(|s| s.p_class == PohozaevClass::Plus)
        .ok_or_else(|| NlsError::Nonexistence(format!("no Plus-class solution at mu = {}", params.mu)))?;
    let minus = sols.iter().find(|s| s.p_class == PohozaevClass::Minus);
    energy_gap_from(params, eps_grid, plus, minus)
}
