//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use normsol::grid::{RadialFn, RadialGrid, Tail};
use normsol::ProblemParams;
use std::sync::Arc;

/// Result of [`gradient_flow`]: the profile on a uniform grid and the
/// Lagrange multiplier read off the last step.
pub struct FlowResult {
    pub profile: RadialFn,
    pub lambda: f64,
    pub steps: usize,
    pub last_change: f64,
}

/// Normalized gradient flow on the mass sphere, discretized with a
/// second-order finite-volume Laplacian on `n + 1` uniform nodes in `[0, r_max]`
/// (Dirichlet at `r_max`). Each step solves
/// `(1/τ − Δ)ũ = u/τ + f(u) + λ(u)u` with `f(u) = μ|u|^{q−2}u + |u|^{2*−2}u`
/// and `λ(u) = (‖∇u‖² − ∫f(u)u)/a²`, then rescales `ũ` to mass `a²`. Fixed
/// points solve the discrete equation `−Δu = λu + f(u)` exactly.
pub fn gradient_flow(
    start: &RadialFn,
    params: &ProblemParams,
    r_max: f64,
    n: usize,
    tau: f64,
    max_steps: usize,
    tol: f64,
) -> FlowResult {
    let dim = params.dim as f64;
    let h = r_max / n as f64;
    let omega = normsol::grid::sphere_area(params.dim);
    let r: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    // Cell volumes and face areas of the radial finite-volume scheme.
    let vol: Vec<f64> = (0..=n)
        .map(|i| {
            let lo = (r[i] - 0.5 * h).max(0.0);
            let hi = r[i] + 0.5 * h;
            omega * (hi.powf(dim) - lo.powf(dim)) / dim
        })
        .collect();
    let face: Vec<f64> = (0..n).map(|i| omega * (r[i] + 0.5 * h).powf(dim - 1.0) / h).collect();

    let slopes = start.derivative();
    let mut u: Vec<f64> = r
        .iter()
        .map(|&x| {
            if x == 0.0 {
                start.center
            } else if x >= start.grid.r_max {
                0.0
            } else {
                start.eval(x, &slopes).unwrap()
            }
        })
        .collect();
    u[n] = 0.0;
    let target = params.a * params.a;
    let mass = |u: &[f64]| u.iter().zip(&vol).map(|(v, w)| v * v * w).sum::<f64>();
    let m = mass(&u);
    u.iter_mut().for_each(|v| *v *= (target / m).sqrt());

    let (q, p2) = (params.q, params.two_star);
    // Tridiagonal (V/τ + A) where A is the symmetric FV stiffness matrix.
    let diag: Vec<f64> = (0..n).map(|i| vol[i] / tau + face[i] + if i > 0 { face[i - 1] } else { 0.0 }).collect();
    let off: Vec<f64> = (0..n - 1).map(|i| -face[i]).collect();

    let mut steps = 0;
    let mut change = f64::INFINITY;
    let mut lambda = 0.0;
    let f = |v: f64| params.mu * v.abs().powf(q - 2.0) * v + v.abs().powf(p2 - 2.0) * v;
    while steps < max_steps && change > tol {
        let grad: f64 = (0..n).map(|i| face[i] * (u[i + 1] - u[i]).powi(2)).sum();
        let work: f64 = (0..n).map(|i| vol[i] * f(u[i]) * u[i]).sum();
        lambda = (grad - work) / target;
        let rhs: Vec<f64> = (0..n).map(|i| vol[i] * (u[i] / tau + f(u[i]) + lambda * u[i])).collect();
        let mut next = thomas(&off, &diag, &off, &rhs);
        next.push(0.0);
        let scale = (target / mass(&next)).sqrt();
        next.iter_mut().for_each(|v| *v *= scale);
        let peak = next.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        change = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / peak;
        u = next;
        steps += 1;
    }
    let grid: Arc<RadialGrid> = RadialGrid::from_nodes(params.dim, r[1..].to_vec()).unwrap();
    let profile = RadialFn::new(grid, u[0], u[1..].to_vec(), Tail::Zero).unwrap();
    FlowResult { profile, lambda, steps, last_change: change }
}

/// Solves a tridiagonal system with sub-, main and super-diagonals `a`, `b`, `c`.
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = if n > 1 { c[0] / b[0] } else { 0.0 };
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i - 1] * cp[i - 1];
        if i < n - 1 {
            cp[i] = c[i] / m;
        }
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}
