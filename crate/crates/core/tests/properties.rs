//! Property tests over randomized inputs.

use std::sync::Arc;

use normsol::asymptotics::fit_power;
use normsol::fibering::{
    self, fibering_scale, on_manifold_energy, project_norms, tau_from_norms, Norms, PohozaevClass,
};
use normsol::grid::{grad_norm_sq, RadialFn, RadialGrid, Tail};
use normsol::special::{bubble_value, dilate, gn_quotient};
use normsol::ProblemParams;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn gaussian(dim: usize, width: f64) -> RadialFn {
    let g: Arc<RadialGrid> = RadialGrid::stretched(dim, 40.0, 6000, 1.0008).unwrap();
    RadialFn::from_fn(&g, Tail::Zero, |r| (-(r / width).powi(2)).exp())
}

fn subcritical_q(dim: usize, frac: f64) -> f64 {
    let ts = normsol::params::two_star(dim);
    2.0 + frac * (ts - 2.0)
}

fn arb_norms() -> impl Strategy<Value = Norms> {
    (0.1f64..10.0, 0.1f64..10.0, 0.1f64..10.0).prop_map(|(grad_sq, lq_q, l2s)| Norms { grad_sq, lq_q, l2s })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dilation_scales_norms(dim in 3usize..=5, frac in 0.1f64..0.9, t in 0.5f64..2.0, width in 0.7f64..1.5) {
        let q = subcritical_q(dim, frac);
        let p = ProblemParams::new(dim, q, 1.0, 1.0).unwrap();
        let u = gaussian(dim, width);
        let ut = fibering_scale(&u, t).unwrap();
        prop_assert!(rel(ut.mass_sq(), u.mass_sq()) < 1e-6);
        prop_assert!(rel(grad_norm_sq(&ut), t * t * grad_norm_sq(&u)) < 1e-6);
        prop_assert!(rel(ut.lp_pow(q), t.powf(p.q_gamma()) * u.lp_pow(q)) < 1e-6);
    }

    #[test]
    fn energy_of_dilation_is_fiber(dim in 3usize..=5, frac in 0.1f64..0.9, t in 0.5f64..2.0, mu in 1e-3f64..10.0) {
        let p = ProblemParams::new(dim, subcritical_q(dim, frac), 1.0, mu).unwrap();
        let u = gaussian(dim, 1.0);
        let n = Norms::of(&u, &p);
        let direct = fibering::energy(&fibering_scale(&u, t).unwrap(), &p);
        let fiber = n.fiber(&p, t);
        prop_assert!((direct - fiber).abs() < 1e-6 * (n.dilated(t, &p).grad_sq + fiber.abs()));
    }

    #[test]
    fn gn_quotient_is_dilation_and_amplitude_invariant(dim in 3usize..=5, frac in 0.1f64..0.9, k in 0.5f64..2.0, amp in 0.2f64..5.0) {
        let p = ProblemParams::new(dim, subcritical_q(dim, frac), 1.0, 1.0).unwrap();
        let u = gaussian(dim, 1.0);
        let v = dilate(&u, amp, k).unwrap();
        prop_assert!(rel(gn_quotient(&v, &p), gn_quotient(&u, &p)) < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bubble_scale_covariance(dim in 3usize..=7, eps in 1e-3f64..1e3, r in 0.0f64..100.0) {
        let e = 0.5 * (dim as f64 - 2.0);
        let lhs = eps.powf(e) * bubble_value(dim, eps, eps * r);
        prop_assert!(rel(lhs, bubble_value(dim, 1.0, r)) < 1e-12);
    }

    #[test]
    fn pohozaev_is_scaled_fiber_slope(n in arb_norms(), dim in 3usize..=5, frac in 0.05f64..0.95, mu in 0.0f64..5.0, t in 0.1f64..10.0) {
        let p = ProblemParams::new(dim, subcritical_q(dim, frac), 1.0, mu).unwrap();
        let lhs = n.dilated(t, &p).pohozaev(&p);
        let rhs = t * n.fiber_slope(&p, t);
        let scale = n.dilated(t, &p);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (scale.grad_sq + mu * scale.lq_q + scale.l2s));
    }

    #[test]
    fn projections_land_on_their_class(n in arb_norms(), dim in 3usize..=5, frac in 0.05f64..0.95, mu in 0.0f64..5.0) {
        let p = ProblemParams::new(dim, subcritical_q(dim, frac), 1.0, mu).unwrap();
        let proj = project_norms(&n, &p).unwrap();
        for (t, class) in [(proj.t_plus, PohozaevClass::Plus), (proj.t_minus, PohozaevClass::Minus)] {
            if let Some(t) = t {
                let m = n.dilated(t, &p);
                let scale = m.grad_sq + mu * m.lq_q + m.l2s;
                prop_assert!(m.pohozaev(&p).abs() < 1e-9 * scale);
                let c = m.class(&p);
                prop_assert!(c == class || c == PohozaevClass::Zero);
                prop_assert!(rel(on_manifold_energy(&m, &p), m.energy(&p)) < 1e-6 || m.energy(&p).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn tau_is_one_at_own_mass(n in arb_norms(), dim in 3usize..=5, frac in 0.05f64..0.95, mu in 0.0f64..5.0, c in 0.2f64..5.0) {
        let p = ProblemParams::new(dim, subcritical_q(dim, frac), c, mu).unwrap();
        let proj = project_norms(&n, &p).unwrap();
        if let Some(t) = proj.t_minus {
            let m = n.dilated(t, &p);
            prop_assume!(m.class(&p) == PohozaevClass::Minus);
            let tau = tau_from_norms(&m, c, c, &p).unwrap();
            prop_assert!((tau - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn power_fit_recovers_exact_law(slope in -3.0f64..3.0, pref in 1e-3f64..1e3, lo in -6.0f64..0.0, span in 2.0f64..4.0) {
        let xs: Vec<f64> = (0..7).map(|i| 10f64.powf(lo + span * i as f64 / 6.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| pref * x.powf(slope)).collect();
        let f = fit_power(&xs, &ys).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-9);
        prop_assert!((f.intercept - pref.ln()).abs() < 1e-8);
        prop_assert!(f.r_squared > 1.0 - 1e-12 || slope.abs() < 1e-6);
    }

    #[test]
    fn power_fit_rejects_short_span(lo in -6.0f64..0.0, span in 0.1f64..1.9) {
        let xs: Vec<f64> = (0..7).map(|i| 10f64.powf(lo + span * i as f64 / 6.0)).collect();
        prop_assert!(fit_power(&xs, &xs).is_err());
    }
}

#[test]
fn mass_critical_manifold_energy_is_nonnegative() {
    let p = ProblemParams::new(3, 10.0 / 3.0, 1.0, 0.5).unwrap();
    let n = Norms::of(&gaussian(3, 1.0), &p);
    let t = project_norms(&n, &p).unwrap().t_minus.expect("one root below the threshold");
    let m = n.dilated(t, &p);
    let e = m.energy(&p);
    assert!(e >= 0.0);
    assert!(rel(e, m.l2s / p.n()) < 1e-6);
}
