//! Property tests over random admissible parameter sets.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use common::{c, fd_jacobian, simpson};
use tumordde::chareq::{self, CrossingOptions, DiracDirac, DiracWeak};
use tumordde::model::{self, Kernel, ModelParams};
use tumordde::normalform::{self, CVec, ExpProfile};
use tumordde::roots::ComplexFn;

/// Admissible sets built from the ordered ratios `b2/b1 < b4/b3 < a1/a2`.
fn admissible() -> impl Strategy<Value = ModelParams> {
    (0.3f64..3.0, 0.3f64..3.0, 0.3f64..3.0, 0.05f64..1.0, 0.05f64..2.0, 0.05f64..2.0).prop_map(|(a2, b1, b3, lo, g1, g2)| {
        let mid = lo * (1.0 + g1);
        let hi = mid * (1.0 + g2);
        ModelParams::new(hi * a2, a2, b1, lo * b1, b3, mid * b3)
    })
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -4.0f64..4.0).prop_map(|(re, im)| c(re, im))
}

fn cvec2() -> impl Strategy<Value = CVec> {
    (complex(), complex()).prop_map(|(a, b)| CVec::from_vec(vec![a, b]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn equilibria_are_positive_and_stationary(p in admissible()) {
        let (l0, l1) = model::equilibria(&p).unwrap();
        prop_assert!(l0.x > 0.0 && l0.y > 0.0 && l1.y > 0.0);
        for e in [l0, l1] {
            let f = model::rhs_original(&p, e.x, e.y, e.x, e.y);
            prop_assert!(f[0].abs() < 1e-9 * (1.0 + e.y) && f[1].abs() < 1e-9 * (1.0 + p.b4));
        }
    }

    #[test]
    fn translated_system_matches_original(
        p in admissible(),
        u in prop::array::uniform4(-0.5f64..0.5),
    ) {
        let l0 = model::equilibria(&p).unwrap().0;
        let orig = model::rhs_original(&p, l0.x + u[0], l0.y + u[1], l0.x + u[2], l0.y + u[3]);
        let tr = model::rhs_translated(&p, &l0, u[0], u[1], u[2], u[3]);
        for i in 0..2 {
            prop_assert!((orig[i] - tr[i]).abs() < 1e-10 * (1.0 + orig[i].abs()));
        }
    }

    #[test]
    fn linear_part_matches_finite_differences(p in admissible()) {
        let l0 = model::equilibria(&p).unwrap().0;
        let (a, b1, b2) = model::linear_part(&p, &l0);
        let jac = fd_jacobian(|u: [f64; 4]| model::rhs_translated(&p, &l0, u[0], u[1], u[2], u[3]), [0.0; 4], 1e-6);
        for i in 0..2 {
            prop_assert!((jac[i][0] - a[i][0]).abs() < 1e-6);
            prop_assert!((jac[i][1] - a[i][1]).abs() < 1e-6);
            prop_assert!((jac[i][2] - b1[i][0]).abs() < 1e-6);
            prop_assert!((jac[i][3] - b2[i][1]).abs() < 1e-6);
            prop_assert!(b1[i][1] == 0.0 && b2[i][0] == 0.0);
        }
    }

    #[test]
    fn characteristic_functions_are_conjugate_symmetric(
        p in admissible(),
        z in complex(),
        tau1 in 0.0f64..6.0,
        tau2 in 0.0f64..3.0,
        q2 in 0.05f64..4.0,
    ) {
        let dd = DiracDirac::new(&p, tau1, tau2).unwrap();
        let dw = DiracWeak::new(&p, tau1, q2).unwrap();
        for f in [&dd as &dyn ComplexFn, &dw] {
            let (a, b) = (f.value(z.conj()), f.value(z).conj());
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn analytic_derivatives_match_differences(
        p in admissible(),
        z in complex(),
        tau1 in 0.0f64..6.0,
        q2 in 0.05f64..4.0,
    ) {
        let dd = DiracDirac::new(&p, tau1, 0.3).unwrap();
        let dw = DiracWeak::new(&p, tau1, q2).unwrap();
        let h = 1e-6;
        for f in [&dd as &dyn ComplexFn, &dw] {
            let fd = (f.value(z + h) - f.value(z - h)) / (2.0 * h);
            let an = f.derivative(z);
            prop_assert!((fd - an).norm() <= 1e-5 * (1.0 + an.norm()));
        }
    }

    #[test]
    fn certified_crossings_are_roots(p in admissible(), tau2 in 0.0f64..1.0, q2 in 0.05f64..3.0) {
        let opts = CrossingOptions::default();
        if let Ok(hp) = chareq::hopf_point_dd(&p, tau2, 1, &opts) {
            let f = DiracDirac::new(&p, hp.tau_crit, tau2).unwrap();
            prop_assert!(f.value(hp.lambda()).norm() < 1e-9);
            prop_assert!(hp.tau_crit > 0.0 && hp.omega > 0.0);
        }
        if let Ok(hp) = chareq::hopf_point_dw(&p, q2, &opts) {
            let f = DiracWeak::new(&p, hp.tau_crit, q2).unwrap();
            prop_assert!(f.value(hp.lambda()).norm() < 1e-9);
        }
    }

    #[test]
    fn bilinear_form_is_sesquilinear(
        p in admissible(),
        psi in cvec2(),
        phi in cvec2(),
        r1 in complex(),
        r2 in complex(),
        a in complex(),
        b in complex(),
    ) {
        let m = normalform::measure_dd(&p, 1.3, 0.4).unwrap();
        let (psi, phi) = (ExpProfile::new(psi, r1), ExpProfile::new(phi, r2));
        let base = normalform::bilinear(&psi, &phi, &m);
        let scaled = normalform::bilinear(&psi.scaled(a), &phi.scaled(b), &m);
        prop_assert!((scaled - a.conj() * b * base).norm() <= 1e-10 * (1.0 + scaled.norm()));
    }

    #[test]
    fn bilinear_form_matches_quadrature(
        p in admissible(),
        psi in cvec2(),
        phi in cvec2(),
        r1 in complex(),
        r2 in complex(),
    ) {
        let (t1, t2) = (1.3, 0.4);
        let m = normalform::measure_dd(&p, t1, t2).unwrap();
        let (psi, phi) = (ExpProfile::new(psi, r1), ExpProfile::new(phi, r2));
        let direct = normalform::bilinear(&psi, &phi, &m);
        let pair = |u: &CVec, v: &CVec| u.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>();
        let mut want = pair(&psi.eval(0.0), &phi.eval(0.0));
        for (tau, bm) in &m.lagged {
            let integrand = |xi: f64| pair(&psi.eval(xi + tau), &(bm * phi.eval(xi)));
            let re = simpson(|x| integrand(x).re, -tau, 0.0, 2000);
            let im = simpson(|x| integrand(x).im, -tau, 0.0, 2000);
            want += c(re, im);
        }
        prop_assert!((direct - want).norm() <= 1e-8 * (1.0 + want.norm()));
    }

    #[test]
    fn gamma_kernels_are_normalized(order in 0u32..6, rate in 0.1f64..5.0) {
        let k = Kernel::Gamma { order, rate };
        let upper = (order as f64 + 40.0) / rate;
        let mass = simpson(|s| k.density(s).unwrap(), 0.0, upper, 40_000);
        prop_assert!((mass - 1.0).abs() < 1e-8);
        let mean = simpson(|s| s * k.density(s).unwrap(), 0.0, upper, 40_000);
        prop_assert!((mean - k.mean_lag()).abs() < 1e-6 * k.mean_lag());
    }

    #[test]
    fn gamma_laplace_matches_quadrature(order in 0u32..4, rate in 0.2f64..4.0, z in complex()) {
        let z = c(z.re.abs(), z.im);
        let k = Kernel::Gamma { order, rate };
        let upper = (order as f64 + 40.0) / rate;
        let re = simpson(|s| k.density(s).unwrap() * (-z * s).exp().re, 0.0, upper, 40_000);
        let im = simpson(|s| k.density(s).unwrap() * (-z * s).exp().im, 0.0, upper, 40_000);
        prop_assert!((k.laplace(z) - c(re, im)).norm() < 1e-7);
    }

    #[test]
    fn admissibility_is_exactly_the_ratio_order(
        v in prop::array::uniform6(0.05f64..4.0),
    ) {
        let p = ModelParams::new(v[0], v[1], v[2], v[3], v[4], v[5]);
        let expected = p.b2 / p.b1 < p.b4 / p.b3 && p.b4 / p.b3 < p.a1 / p.a2;
        prop_assert_eq!(p.check_admissible().unwrap(), expected);
        prop_assert_eq!(model::equilibria(&p).is_ok(), expected);
    }
}
