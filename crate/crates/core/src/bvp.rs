//! Normalized solutions by two-parameter shooting: the center height picks
//! the decaying solution at fixed `λ`, and `λ` is then tuned until the mass
//! equals `a²`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NlsError, Result};
use crate::fibering::{Norms, PohozaevClass};
use crate::grid::{RadialFn, RadialGrid};
use crate::nonlinearity::Nonlinearity;
use crate::ode::Stop;
use crate::params::ProblemParams;
use crate::shooting::{Class, Shooter};
use crate::special::{relative_residual, DEFAULT_NODES};

/// Relative mass tolerance for the `λ` search.
pub const MASS_TOL: f64 = 1e-8;
/// Relative tolerance for every certification residual.
pub const CERT_TOL: f64 = 1e-5;
/// Default number of center heights in a branch scan.
pub const SCAN_POINTS: usize = 80;
/// Decades above the smallest admissible center covered by a branch scan.
pub const SCAN_DECADES: f64 = 14.0;
/// A single shot counts as decaying once `u` drops below this fraction of `u(0)`.
pub const DECAY_THRESHOLD: f64 = 1e-6;
/// Half-width in decades of the initial `λ` window.
pub const WINDOW_DECADES: f64 = 3.0;
/// Coarse `λ` samples per decade.
const LAMBDA_POINTS_PER_DECADE: f64 = 3.0;
/// Number of times the `λ` window is widened by [`WINDOW_DECADES`] on each side.
const MAX_WIDENINGS: usize = 2;
/// Halvings of a coarse `λ` step allowed while following a branch.
const MAX_SUBDIVISIONS: i32 = 8;
/// Only branches whose mass is within this factor of `a²` trigger subdivision.
const SUBDIVIDE_MASS_RATIO: f64 = 1e12;
/// Largest `|ln(c₁/c₀)|` between center heights identified as one branch.
const MATCH_LOG_RATIO: f64 = 4.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ShotOutcome {
    Crossing(f64),
    Floating,
    Decaying,
}

#[derive(Debug, Clone)]
pub struct ShotResult {
    pub outcome: ShotOutcome,
    /// Present exactly when the outcome is `Decaying`.
    pub profile: Option<RadialFn>,
}

/// One shot from `u(0) = center` at fixed `λ`, sampled on `grid` when it decays.
pub fn shoot(lambda: f64, center: f64, params: &ProblemParams, grid: &Arc<RadialGrid>) -> Result<ShotResult> {
    if !(center > 0.0) {
        return Err(NlsError::InvalidArgument(format!("center = {center} must be positive")));
    }
    let sh = shooter(lambda, params)?;
    let (stop, trace) = sh.shoot_to_floor(center, DECAY_THRESHOLD * center)?;
    Ok(match stop {
        Stop::Crossing(r) => ShotResult { outcome: ShotOutcome::Crossing(r), profile: None },
        Stop::Floating(_) => ShotResult { outcome: ShotOutcome::Floating, profile: None },
        Stop::TailFloor(_) | Stop::Reached(_) => {
            ShotResult { outcome: ShotOutcome::Decaying, profile: Some(trace.to_profile(grid)) }
        }
    })
}

fn shooter(lambda: f64, params: &ProblemParams) -> Result<Shooter> {
    Shooter::new(params.dim, Nonlinearity::from_params(params, lambda))
}

/// A separatrix in the center height at fixed `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch {
    pub branch_id: usize,
    pub center: f64,
    pub bracket: (f64, f64),
}

/// All crossing/floating transitions on a geometric center scan, refined to
/// relative width `1e-12` and ordered by center height.
pub fn find_branches(lambda: f64, params: &ProblemParams, scan: usize) -> Result<Vec<Branch>> {
    let sh = shooter(lambda, params)?;
    let b0 = sh.min_center();
    let lo = if b0 > 0.0 { b0 * (1.0 + 1e-9) } else { 1e-12 };
    let hi = lo * 10f64.powf(SCAN_DECADES);
    let pts = sh.scan(lo, hi, scan)?;
    let mut out: Vec<Branch> = Vec::new();
    for (l, h) in Shooter::transitions(&pts) {
        let (bl, bh) = sh.refine(l, h, 1e-12)?;
        let center = 0.5 * (bl + bh);
        if let Some(prev) = out.last() {
            if center <= prev.center * (1.0 + 1e-6) {
                continue;
            }
        }
        out.push(Branch { branch_id: out.len(), center, bracket: (bl, bh) });
    }
    Ok(out)
}

/// Decaying profile on a separatrix bracket, on its natural grid.
pub fn branch_profile(lambda: f64, bracket: (f64, f64), params: &ProblemParams) -> Result<RadialFn> {
    let sh = shooter(lambda, params)?;
    let trace = sh.trace(bracket.0, bracket.1)?;
    let grid = trace.natural_grid(sh.core_width(trace.center), DEFAULT_NODES)?;
    Ok(trace.to_profile(&grid))
}

/// `‖u‖₂²` of the decaying solution on branch `branch_id` at `λ`.
pub fn mass_of(lambda: f64, branch_id: usize, params: &ProblemParams) -> Result<f64> {
    let branches = find_branches(lambda, params, SCAN_POINTS)?;
    if let Some(b) = branches.get(branch_id) {
        return Ok(branch_profile(lambda, b.bracket, params)?.mass_sq());
    }
    for k in 1..=8 {
        for f in [2f64.powi(k), 2f64.powi(-k)] {
            let l = lambda * f;
            if find_branches(l, params, SCAN_POINTS)?.len() > branch_id {
                return Err(NlsError::BranchLost { branch_id, nearest_lambda: l });
            }
        }
    }
    Err(NlsError::BranchLost { branch_id, nearest_lambda: f64::NAN })
}

/// Certification of a computed solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertReport {
    /// Equation residual relative to the largest equation term.
    pub ode_residual: f64,
    /// `|P(u)| / ‖∇u‖₂²`.
    pub pohozaev_res: f64,
    /// `|λ‖u‖₂² − μ(γ_q−1)‖u‖_q^q| / |λ‖u‖₂²|`.
    pub lagrange_res: f64,
    /// Fitted exponential decay rate of `r^{(N−1)/2}u` in the far field.
    pub decay_rate_fit: f64,
    /// `√|λ|`.
    pub decay_rate_expected: f64,
    pub monotone: bool,
    /// Smallest `C` with `u ≤ C(1+r²)^{−(N−2)/2}`.
    pub decay_bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionBranch {
    pub lambda: f64,
    pub center: f64,
    #[serde(skip)]
    pub profile: RadialFn,
    pub mass_sq: f64,
    pub energy: f64,
    pub norms: Norms,
    pub pohozaev_res: f64,
    pub p_class: PohozaevClass,
    pub branch_id: usize,
    pub cert: CertReport,
}

impl SolutionBranch {
    pub fn from_profile(lambda: f64, branch_id: usize, profile: RadialFn, params: &ProblemParams) -> Self {
        let norms = Norms::of(&profile, params);
        let mut sol = SolutionBranch {
            lambda,
            center: profile.center,
            mass_sq: profile.mass_sq(),
            energy: norms.energy(params),
            pohozaev_res: norms.pohozaev(params).abs() / norms.grad_sq,
            p_class: norms.class(params),
            norms,
            branch_id,
            cert: CertReport {
                ode_residual: f64::NAN,
                pohozaev_res: f64::NAN,
                lagrange_res: f64::NAN,
                decay_rate_fit: f64::NAN,
                decay_rate_expected: f64::NAN,
                monotone: false,
                decay_bound: f64::NAN,
                passed: false,
            },
            profile,
        };
        sol.cert = verify_solution(&sol, params);
        sol
    }
}

pub fn verify_solution(sol: &SolutionBranch, params: &ProblemParams) -> CertReport {
    let u = &sol.profile;
    let rhs = Nonlinearity::from_params(params, sol.lambda);
    let norms = Norms::of(u, params);
    let mass = u.mass_sq();
    let ode_residual = relative_residual(u, &rhs);
    let pohozaev_res = norms.pohozaev(params).abs() / norms.grad_sq;
    let lm = sol.lambda * mass;
    let lagrange_res = (lm - params.mu * (params.gamma_q - 1.0) * norms.lq_q).abs() / lm.abs();
    let k = (-sol.lambda).sqrt();
    let decay_rate_fit = fit_decay_rate(u, k);
    let monotone = u.is_positive_decreasing();
    let half = 0.5 * (params.n() - 2.0);
    let mut decay_bound = u.center;
    for (&r, &v) in u.grid.nodes.iter().zip(&u.values) {
        decay_bound = decay_bound.max(v * (1.0 + r * r).powf(half));
    }
    let passed = ode_residual < CERT_TOL && pohozaev_res < CERT_TOL && lagrange_res < CERT_TOL && monotone;
    CertReport {
        ode_residual,
        pohozaev_res,
        lagrange_res,
        decay_rate_fit,
        decay_rate_expected: k,
        monotone,
        decay_bound,
        passed,
    }
}

/// Least-squares slope of `−ln(r^{(N−1)/2}u)` over `kr ∈ [20, 35]`.
fn fit_decay_rate(u: &RadialFn, k: f64) -> f64 {
    let h = 0.5 * (u.dim() as f64 - 1.0);
    let pts: Vec<(f64, f64)> = u
        .grid
        .nodes
        .iter()
        .zip(&u.values)
        .filter(|(&r, &v)| (20.0..=35.0).contains(&(k * r)) && v > 0.0)
        .map(|(&r, &v)| (r, v.ln() + h * r.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    -sxy / sxx
}

/// Center of the `λ` window: `μ^{2/(2−qγ_q)}` below the mass-critical
/// exponent and above it for `μ > 1`; `μ` for small `μ` above it, where the
/// solution is bubble-like and the Lagrange identity makes `|λ| ∝ μ`.
pub fn lambda_scale(params: &ProblemParams) -> f64 {
    let a2 = params.a * params.a;
    if params.is_mass_critical() || params.mu == 0.0 {
        1.0 / a2
    } else if params.is_mass_supercritical() && params.mu < 1.0 {
        params.mu / a2
    } else {
        params.mu.powf(2.0 / (2.0 - params.q_gamma()))
    }
}

#[derive(Debug, Clone)]
struct Probe {
    /// `ln|λ|`
    x: f64,
    branches: Vec<(Branch, f64)>,
}

fn probe(x: f64, params: &ProblemParams) -> Result<Probe> {
    let lambda = -x.exp();
    let mut branches = Vec::new();
    for b in find_branches(lambda, params, SCAN_POINTS)? {
        match branch_profile(lambda, b.bracket, params) {
            Ok(p) => branches.push((b, p.mass_sq())),
            Err(NlsError::NumericFailure(_)) | Err(NlsError::SearchFailure { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Probe { x, branches })
}

/// A sign change of `mass − a²` between two coarse samples of one branch.
#[derive(Debug, Clone, Copy)]
struct Bracket {
    branch_id: usize,
    xa: f64,
    fa: f64,
    ca: f64,
    xb: f64,
    fb: f64,
    cb: f64,
}

/// Nearest branch to `ln_center` within [`MATCH_LOG_RATIO`].
fn nearest(branches: &[(Branch, f64)], ln_center: f64) -> Option<&(Branch, f64)> {
    branches
        .iter()
        .map(|p| (p, (p.0.center.ln() - ln_center).abs()))
        .filter(|(_, d)| *d < MATCH_LOG_RATIO)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(p, _)| p)
}

fn brackets(probes: &[Probe], target: f64) -> Vec<Bracket> {
    let mut out = Vec::new();
    for w in probes.windows(2) {
        for (ba, ma) in &w[0].branches {
            let Some((bb, mb)) = nearest(&w[1].branches, ba.center.ln()) else { continue };
            // Mutual nearest neighbours only.
            if nearest(&w[0].branches, bb.center.ln()).map(|p| p.0.branch_id) != Some(ba.branch_id) {
                continue;
            }
            let (fa, fb) = ((ma / target).ln(), (mb / target).ln());
            if fa == 0.0 || fa * fb < 0.0 {
                out.push(Bracket {
                    branch_id: ba.branch_id,
                    xa: w[0].x,
                    fa,
                    ca: ba.center,
                    xb: w[1].x,
                    fb,
                    cb: bb.center,
                });
            }
        }
    }
    out
}

fn coarse_grid(lo: f64, hi: f64) -> Vec<f64> {
    let n = ((hi - lo) / std::f64::consts::LN_10 * LAMBDA_POINTS_PER_DECADE).ceil() as usize;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Whether some branch with mass within [`SUBDIVIDE_MASS_RATIO`] of the
/// target lacks a partner in the neighbouring probe.
fn unmatched(p: &Probe, other: &Probe, target: f64) -> bool {
    p.branches.iter().any(|(b, m)| {
        (m / target).ln().abs() < SUBDIVIDE_MASS_RATIO.ln() && {
            let partner = nearest(&other.branches, b.center.ln());
            partner.is_none_or(|(q, _)| nearest(&p.branches, q.center.ln()).map(|r| r.0.branch_id) != Some(b.branch_id))
        }
    })
}

/// Inserts probes between neighbours whose branches cannot be matched.
fn subdivide(probes: &mut Vec<Probe>, params: &ProblemParams) -> Result<()> {
    let target = params.a * params.a;
    let min_gap = std::f64::consts::LN_10 / LAMBDA_POINTS_PER_DECADE / 2f64.powi(MAX_SUBDIVISIONS);
    loop {
        let mids: Vec<f64> = probes
            .windows(2)
            .filter(|w| {
                w[1].x - w[0].x > min_gap && (unmatched(&w[0], &w[1], target) || unmatched(&w[1], &w[0], target))
            })
            .map(|w| 0.5 * (w[0].x + w[1].x))
            .collect();
        if mids.is_empty() {
            return Ok(());
        }
        let extra: Vec<Probe> = mids.into_par_iter().map(|x| probe(x, params)).collect::<Result<_>>()?;
        probes.extend(extra);
        probes.sort_by(|a, b| a.x.total_cmp(&b.x));
    }
}

/// A branch end found by the `λ` scan: the branch is present at `x0` with
/// mass ratio `f0` but has no partner at the neighbouring probe `x1`, and the
/// gap between them cannot be subdivided further.
#[derive(Debug, Clone, Copy)]
struct BranchEnd {
    branch_id: usize,
    x0: f64,
    c0: f64,
    f0: f64,
    x1: f64,
}

#[derive(Debug, Clone, Copy)]
enum Candidate {
    Lambda(Bracket),
    Center(BranchEnd),
}

impl Candidate {
    fn branch_id(&self) -> usize {
        match self {
            Candidate::Lambda(b) => b.branch_id,
            Candidate::Center(e) => e.branch_id,
        }
    }
}

fn branch_ends(probes: &[Probe], target: f64) -> Vec<BranchEnd> {
    let min_gap = std::f64::consts::LN_10 / LAMBDA_POINTS_PER_DECADE / 2f64.powi(MAX_SUBDIVISIONS);
    let mut out = Vec::new();
    for w in probes.windows(2) {
        if w[1].x - w[0].x > min_gap * (1.0 + 1e-9) {
            continue;
        }
        for (p, other) in [(&w[0], &w[1]), (&w[1], &w[0])] {
            for (b, m) in &p.branches {
                let f = (m / target).ln();
                if f.abs() >= SUBDIVIDE_MASS_RATIO.ln() {
                    continue;
                }
                let matched = nearest(&other.branches, b.center.ln()).is_some_and(|(q, _)| {
                    nearest(&p.branches, q.center.ln()).map(|r| r.0.branch_id) == Some(b.branch_id)
                });
                if !matched {
                    out.push(BranchEnd { branch_id: b.branch_id, x0: p.x, c0: b.center, f0: f, x1: other.x });
                }
            }
        }
    }
    out
}

/// Coarse `λ` scan, widened until some branch brackets the target mass.
/// Branch ends found on the way are returned as well.
fn scan_lambda(params: &ProblemParams, want: impl Fn(&Candidate) -> bool) -> Result<Vec<Candidate>> {
    let target = params.a * params.a;
    let x0 = lambda_scale(params).ln();
    let w = WINDOW_DECADES * std::f64::consts::LN_10;
    let collect = |probes: &[Probe]| -> Vec<Candidate> {
        brackets(probes, target)
            .into_iter()
            .map(Candidate::Lambda)
            .chain(branch_ends(probes, target).into_iter().map(Candidate::Center))
            .filter(&want)
            .collect()
    };
    let mut probes: Vec<Probe> =
        coarse_grid(x0 - w, x0 + w).into_par_iter().map(|x| probe(x, params)).collect::<Result<_>>()?;
    subdivide(&mut probes, params)?;
    for widening in 1..=MAX_WIDENINGS {
        let found = collect(&probes);
        if found.iter().any(|c| matches!(c, Candidate::Lambda(_))) {
            return Ok(found);
        }
        let (lo, hi) = (x0 - w * widening as f64, x0 + w * widening as f64);
        let mut xs = coarse_grid(lo - w, lo);
        xs.pop();
        let mut upper = coarse_grid(hi, hi + w);
        upper.remove(0);
        xs.extend(upper);
        let extra: Vec<Probe> = xs.into_par_iter().map(|x| probe(x, params)).collect::<Result<_>>()?;
        probes.extend(extra);
        probes.sort_by(|a, b| a.x.total_cmp(&b.x));
        subdivide(&mut probes, params)?;
    }
    Ok(collect(&probes))
}

/// Decaying solution with center height close to `b`: bisects `ln|λ|` in
/// `(xa, xb)` until the shot from `b` sits on the separatrix, then brackets
/// the separatrix in the center height at that `λ`. `None` when the shot from
/// `b` has the same class at both ends.
fn solution_at_center(b: f64, xa: f64, xb: f64, params: &ProblemParams) -> Result<Option<(f64, RadialFn)>> {
    let class = |x: f64| -> Result<Class> { shooter(-x.exp(), params)?.classify(b) };
    let (mut lo, mut hi) = (xa, xb);
    let c_lo = class(lo)?;
    let c_hi = class(hi)?;
    if c_lo == c_hi || c_lo == Class::Undecided || c_hi == Class::Undecided {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        match class(mid)? {
            Class::Undecided => {
                lo = mid;
                hi = mid;
                break;
            }
            c if c == c_lo => lo = mid,
            _ => hi = mid,
        }
    }
    let lambda = -(0.5 * (lo + hi)).exp();
    let sh = shooter(lambda, params)?;
    let mut delta = 1e-10;
    while delta < 0.1 {
        let (bl, bh) = (b / (1.0 + delta), b * (1.0 + delta));
        let (cl, ch) = (sh.classify(bl)?, sh.classify(bh)?);
        if cl != ch || cl == Class::Undecided {
            let bracket = sh.refine(bl, bh, 1e-12)?;
            return Ok(Some((lambda, branch_profile(lambda, bracket, params)?)));
        }
        delta *= 10.0;
    }
    Ok(None)
}

/// Growth factor of the center height per continuation step.
const CENTER_STEP: f64 = 1.5;
/// Continuation steps before a branch end is abandoned.
const MAX_CENTER_STEPS: usize = 60;

/// Follows a branch past the end of the `λ` scan with the center height as
/// parameter, then solves the mass equation in `ln b` by Illinois iteration.
fn refine_in_center(end: BranchEnd, params: &ProblemParams) -> Result<SolutionBranch> {
    let target = params.a * params.a;
    let lost = || NlsError::BranchLost { branch_id: end.branch_id, nearest_lambda: -end.x0.exp() };
    let eval = |lb: f64| -> Result<Option<(f64, f64, RadialFn)>> {
        Ok(solution_at_center(lb.exp(), end.x0, end.x1, params)?.map(|(l, p)| ((p.mass_sq() / target).ln(), l, p)))
    };
    let (mut xa, mut fa) = (end.c0.ln(), end.f0);
    let mut hit = None;
    for _ in 0..MAX_CENTER_STEPS {
        let xb = xa + CENTER_STEP.ln();
        let Some((fb, l, p)) = eval(xb)? else { return Err(lost()) };
        if fb.abs() < MASS_TOL {
            hit = Some((l, p));
            break;
        }
        if fa * fb < 0.0 {
            let (mut xl, mut fl, mut xh, mut fh) = (xa, fa, xb, fb);
            let mut side = 0i32;
            for _ in 0..200 {
                let x = xh - fh * (xh - xl) / (fh - fl);
                let Some((f, l, p)) = eval(x)? else { return Err(lost()) };
                if f.abs() < MASS_TOL {
                    hit = Some((l, p));
                    break;
                }
                if f * fh < 0.0 {
                    xl = xh;
                    fl = fh;
                    side = 0;
                } else if side == 1 {
                    fl *= 0.5;
                } else {
                    side = 1;
                }
                xh = x;
                fh = f;
            }
            break;
        }
        xa = xb;
        fa = fb;
    }
    let (lambda, profile) = hit.ok_or_else(lost)?;
    let sol = SolutionBranch::from_profile(lambda, end.branch_id, profile, params);
    if !sol.cert.passed {
        return Err(NlsError::NumericFailure(format!("certification failed: {:?}", sol.cert)));
    }
    Ok(sol)
}

fn solve_candidate(c: Candidate, params: &ProblemParams) -> Result<SolutionBranch> {
    match c {
        Candidate::Lambda(b) => refine(b, params),
        Candidate::Center(e) => refine_in_center(e, params),
    }
}

/// Illinois iteration in `ln|λ|` on `ln(mass/a²)`, following the branch by
/// nearest center height to the log-interpolated prediction.
fn refine(br: Bracket, params: &ProblemParams) -> Result<SolutionBranch> {
    let target = params.a * params.a;
    let Bracket { branch_id, mut xa, mut fa, mut ca, mut xb, mut fb, mut cb } = br;
    let mut side = 0i32;
    for _ in 0..200 {
        let mut x = xb - fb * (xb - xa) / (fb - fa);
        if !(x > xa.min(xb) && x < xa.max(xb)) {
            x = 0.5 * (xa + xb);
        }
        let pred = ca.ln() + (cb.ln() - ca.ln()) * (x - xa) / (xb - xa);
        let lambda = -x.exp();
        let found: Vec<(Branch, f64)> =
            find_branches(lambda, params, SCAN_POINTS)?.into_iter().map(|b| (b, 0.0)).collect();
        let Some((b, _)) = nearest(&found, pred) else {
            return Err(NlsError::BranchLost { branch_id, nearest_lambda: -xa.exp() });
        };
        let profile = branch_profile(lambda, b.bracket, params)?;
        let f = (profile.mass_sq() / target).ln();
        if f.abs() < MASS_TOL {
            let sol = SolutionBranch::from_profile(lambda, branch_id, profile, params);
            if !sol.cert.passed {
                return Err(NlsError::NumericFailure(format!("certification failed: {:?}", sol.cert)));
            }
            return Ok(sol);
        }
        if f * fb < 0.0 {
            xa = xb;
            fa = fb;
            ca = cb;
            side = 0;
        } else if side == 1 {
            fa *= 0.5;
        } else {
            side = 1;
        }
        xb = x;
        fb = f;
        cb = b.center;
        if (xb - xa).abs() < 1e-15 * xb.abs().max(1.0) {
            break;
        }
    }
    Err(NlsError::NumericFailure(format!("mass iteration on branch {branch_id} did not converge")))
}

/// Normalized solution with `‖u‖₂² = a²` on the given branch.
pub fn solve_mass(params: &ProblemParams, branch_id: usize) -> Result<SolutionBranch> {
    let found = scan_lambda(params, |c| c.branch_id() == branch_id)?;
    let mut last = NlsError::NoSolutionOnBranch { branch_id };
    for c in found {
        match solve_candidate(c, params) {
            Ok(sol) => return Ok(sol),
            Err(e @ NlsError::BranchLost { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Every normalized solution found on any branch, ordered by energy.
pub fn solve_all(params: &ProblemParams) -> Result<Vec<SolutionBranch>> {
    let found = scan_lambda(params, |_| true)?;
    let mut sols: Vec<SolutionBranch> = Vec::new();
    for c in found {
        let sol = match solve_candidate(c, params) {
            Ok(s) => s,
            Err(NlsError::BranchLost { .. }) => continue,
            Err(e) => return Err(e),
        };
        let dup = sols.iter().any(|s| {
            ((s.lambda - sol.lambda) / sol.lambda).abs() < 1e-6 && ((s.center - sol.center) / sol.center).abs() < 1e-6
        });
        if !dup {
            sols.push(sol);
        }
    }
    sols.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(sols)
}

/// Solution of least energy at mass `a²`.
pub fn ground_state(params: &ProblemParams) -> Result<SolutionBranch> {
    solve_all(params)?.into_iter().next().ok_or_else(|| {
        NlsError::Nonexistence(format!("no normalized solution at a = {}, mu = {}", params.a, params.mu))
    })
}

/// The solution of class Minus with least energy.
pub fn mountain_pass(params: &ProblemParams) -> Result<SolutionBranch> {
    solve_all(params)?.into_iter().find(|s| s.p_class == PohozaevClass::Minus).ok_or_else(|| {
        NlsError::Nonexistence(format!("no Minus-class solution at a = {}, mu = {}", params.a, params.mu))
    })
}
