//! Worked examples for the special-solution, fibering and solver layers.

use std::f64::consts::PI;

use normsol::bvp::{mass_of, solve_all};
use normsol::fibering::{self, mass_path_energy, tau_from_norms, tau_prime_from_norms, Norms, PohozaevClass};
use normsol::grid::{grad_norm_sq, ode_residual, RadialFn, RadialGrid, Tail};
use normsol::special::*;
use normsol::ProblemParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// Adaptive Simpson on `[a, b]`, the reference for grid quadrature.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[test]
fn quadrature_matches_adaptive_reference() {
    let g = RadialGrid::stretched(3, 50.0, 20_000, 1.002).unwrap();
    let grid_value = g.integrate_fn(|r| (-r).exp() / (1.0 + r));
    let reference = adaptive_simpson(&|r| 4.0 * PI * r * r * (-r).exp() / (1.0 + r), 0.0, 50.0, 1e-14);
    assert!(rel(grid_value, reference) < 1e-8, "{grid_value} vs {reference}");
}

#[test]
fn smooth_random_profile_is_not_a_solution() {
    let p = ProblemParams::new(3, 2.5, 1.0, 1e-4).unwrap();
    let g = RadialGrid::stretched(3, 30.0, 4000, 1.001).unwrap();
    let f = RadialFn::from_fn(&g, Tail::Zero, |r| (1.0 + 0.3 * (2.0 * r).sin()) * (-r * r / 4.0).exp());
    assert!(ode_residual(&f, -1.0, &p) > 0.1);
}

#[test]
fn bubble_is_a_free_minus_critical_point() {
    let p = ProblemParams::new(3, 2.5, 1.0, 0.0).unwrap();
    let g = bubble_grid(3, 1.0, 1e5, 40_000).unwrap();
    let u = bubble(1.0, &g).unwrap();
    let n = Norms::of(&u, &p);
    let level = sobolev_constant(3).unwrap().powf(1.5);
    assert!(rel(n.energy(&p), level / 3.0) < 5e-3);
    assert!(n.pohozaev(&p).abs() < 5e-3 * level);
    assert_eq!(n.class(&p), PohozaevClass::Minus);
}

#[test]
fn gn_quotient_never_beats_the_soliton() {
    let p = ProblemParams::new(3, 4.0, 1.0, 1.0).unwrap();
    let set = compute_constants(&p).unwrap();
    let c = set.constants.c_nq;
    let g = RadialGrid::stretched(3, 60.0, 6000, 1.001).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let (a1, w1, a2, w2, k) = (
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.3..3.0),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(0.3..3.0),
            rng.gen_range(0.0..2.0),
        );
        let f = RadialFn::from_fn(&g, Tail::Zero, |r| {
            a1 * (-(r / w1).powi(2)).exp() + a2 * (-(r / w2).powi(2)).exp() * (k * r).cos()
        });
        assert!(gn_quotient(&f, &p) <= c * (1.0 + 1e-3));
    }
}

#[test]
fn phi0_rescalings() {
    let p = ProblemParams::new(3, 2.5, 1.0, 1e-4).unwrap();
    let set = compute_constants(&p).unwrap();
    let (phi0, c) = (&set.phi0, set.constants.c_nq);
    let (n0, s0) = (set.constants.nu0, set.constants.sigma0);

    let same = gn_rescale(phi0, n0, s0, &p).unwrap();
    assert_eq!(same.values, phi0.values);
    assert!(rel(phi0.center, (n0 / s0).powf(1.0 / (p.q - 2.0)) * set.soliton.center()) < 1e-12);

    for (nu, sigma) in [(2.0, 1.0), (1.0, 3.0)] {
        let psi = gn_rescale(phi0, nu, sigma, &p).unwrap();
        assert!(rel(gn_quotient(&psi, &p), c) < 1e-6);
    }

    let pohozaev_lhs = grad_norm_sq(phi0) / p.n();
    let pohozaev_rhs = (p.q - 2.0) * s0 / (2.0 * p.q) * phi0.lp_pow(p.q);
    assert!(rel(pohozaev_lhs, pohozaev_rhs) < 1e-5);

    // Mass of ψ_{ν,1} moves with ν in the direction of 4 − N(q − 2).
    let masses: Vec<f64> =
        [0.5, 0.8, 1.0, 1.5, 2.0].iter().map(|&nu| psi_family(phi0, nu, 1.0, &p).unwrap().mass_sq()).collect();
    let sign = (4.0 - p.n() * (p.q - 2.0)).signum();
    assert!(masses.windows(2).all(|w| (w[1] - w[0]).signum() == sign));
}

#[test]
fn mass_matching() {
    let p = ProblemParams::new(3, 2.5, 1.0, 1e-4).unwrap();
    let set = compute_constants(&p).unwrap();
    let phi0 = &set.phi0;
    let own = phi0.mass_sq().sqrt();
    assert!((nu_a(own, phi0, &p).unwrap() - 1.0).abs() < 1e-12);
    let psi = psi_a(phi0, &p).unwrap();
    assert!((psi.mass_sq() - 1.0).abs() < 1e-4);
}

#[test]
fn critical_threshold_forms() {
    let p = ProblemParams::new(3, 10.0 / 3.0, 1.0, 0.1).unwrap();
    let set = compute_constants(&p).unwrap();
    let c = set.constants.c_nq;
    let alpha = alpha_crit(&p, c).unwrap();
    assert!(rel(alpha, 1.0 / (c.powf(p.q) * p.gamma_q)) < 1e-12);
    assert!(alpha.is_finite() && alpha > 0.0);
    assert!((p.q - p.q_gamma() - (p.q - 2.0)).abs() < 1e-12);
    assert!(alpha_crit(&p.with_a(2.0), c).is_ok());
    assert!(alpha_crit(&ProblemParams::new(3, 3.0, 1.0, 0.1).unwrap(), c).is_err());
}

#[test]
fn mass_path_through_a_minus_point() {
    let p = ProblemParams::new(3, 2.5, 1.0, 0.5).unwrap();
    let c = 1.0;
    let g = RadialGrid::stretched(3, 40.0, 6000, 1.0008).unwrap();
    let raw = RadialFn::from_fn(&g, Tail::Zero, |r| (-r * r).exp());
    let u0 = raw.scaled(c / raw.mass_sq().sqrt());
    let n0 = Norms::of(&u0, &p);
    let t = fibering::project_norms(&n0, &p).unwrap().t_minus.unwrap();
    let n = n0.dilated(t, &p);
    assert_eq!(n.class(&p), PohozaevClass::Minus);

    let h = 1e-5;
    let fd = (tau_from_norms(&n, c, c + h, &p).unwrap() - tau_from_norms(&n, c, c - h, &p).unwrap()) / (2.0 * h);
    assert!(rel(fd, tau_prime_from_norms(&n, c, &p).unwrap()) < 1e-4);

    let de = (mass_path_energy(&n, c, c + h, &p).unwrap() - mass_path_energy(&n, c, c - h, &p).unwrap()) / (2.0 * h);
    let predicted = -p.mu * (1.0 - p.gamma_q) * n.lq_q / c;
    assert!(rel(de, predicted) < 1e-4);

    let energies: Vec<f64> =
        (1..=10).map(|k| mass_path_energy(&n, c, c * (1.0 + 0.05 * k as f64), &p).unwrap()).collect();
    assert!(energies.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn two_branches_with_ordered_energies() {
    let p = ProblemParams::new(3, 2.5, 1.0, 1e-4).unwrap();
    let sols = solve_all(&p).unwrap();
    assert_eq!(sols.len(), 2);
    let plus = sols.iter().find(|s| s.p_class == PohozaevClass::Plus).unwrap();
    let minus = sols.iter().find(|s| s.p_class == PohozaevClass::Minus).unwrap();
    assert!(plus.energy < 0.0);
    assert!(plus.energy < minus.energy);
    let level = sobolev_constant(3).unwrap().powf(1.5) / 3.0;
    assert!(minus.energy > 0.0 && minus.energy < level);
    for s in &sols {
        assert!(s.cert.passed);
        let m = mass_of(s.lambda, s.branch_id, &p).unwrap();
        assert!(rel(m, p.a * p.a) < 1e-6, "mass round trip {m}");
    }
}
