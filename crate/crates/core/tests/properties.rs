//! Property-based tests of the structural invariants: quadrature
//! consistency, positivity and scaling of the quadratic forms, eigenpair
//! quality on random domains, nonlinearity bounds, rate-fit exactness on
//! synthetic exponentials, and order preservation of the implicit scheme.

use std::sync::Arc;

use fde_lab::{
    assemble_laplacian, build_interval, build_radial_ball, distance_to_boundary, eigenpairs,
    f_nonlinearity, f_prime, f_second, fit_decay_rate, integrate, mean_minimality_gap, norm_lq,
    scalar_inequality_check, solve_lane_emden, step_implicit, weighted_dirichlet_form,
    weighted_mean, BoundaryExtension, Domain, Field,
};
use proptest::prelude::*;

fn cosine_field(dom: &Arc<Domain>, coeffs: &[f64]) -> Field {
    let extent = dom.extent;
    Field::from_fn(dom, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| a * ((k + 1) as f64 * std::f64::consts::PI * x / extent).cos())
            .sum()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // |∫_h f - ∫ f| = O(h²): halving h shrinks the error ~4x on analytic
    // integrands vanishing at the boundary
    #[test]
    fn quadrature_error_is_second_order(k in 1usize..4, length in 1.0f64..5.0) {
        let exact = length / 2.0; // ∫₀^L sin²(kπx/L) dx
        let mut errs = Vec::new();
        for n in [100usize, 200] {
            let dom = build_interval(length, n).unwrap();
            let f = Field::from_fn(&dom, |x| {
                let s = (k as f64 * std::f64::consts::PI * x / length).sin();
                s * s
            });
            errs.push((integrate(&f, None).unwrap() - exact).abs());
        }
        // ratio ≈ 4 unless both errors are already at roundoff
        prop_assert!(errs[1] < errs[0] / 2.5 || errs[0] < 1e-12 * length);
    }

    #[test]
    fn distance_to_boundary_is_one_lipschitz(
        n in 16usize..128,
        length in 0.5f64..10.0,
        ball in proptest::bool::ANY,
        d in 2u32..4,
    ) {
        let dom = if ball {
            build_radial_ball(d, length, n).unwrap()
        } else {
            build_interval(length, n).unwrap()
        };
        let dist = distance_to_boundary(&dom);
        let v = dist.values();
        for i in 1..v.len() {
            prop_assert!((v[i] - v[i - 1]).abs() <= dom.h * (1.0 + 1e-12));
        }
        // also 1-Lipschitz against the implicit zero boundary
        prop_assert!(v[0] <= dom.h * (1.0 + 1e-12) || ball);
        prop_assert!(*v.last().unwrap() <= dom.h * (1.0 + 1e-12));
    }

    #[test]
    fn dirichlet_form_nonnegative_and_quadratic(
        coeffs in proptest::collection::vec(-2.0f64..2.0, 1..5),
        wexp in 0.0f64..2.0,
        scale in -3.0f64..3.0,
        n in 16usize..96,
    ) {
        let dom = build_interval(std::f64::consts::PI, n).unwrap();
        let g = cosine_field(&dom, &coeffs);
        let w = Field::from_fn(&dom, |x| (1.0 + x).powf(wexp));
        for bc in [BoundaryExtension::Zero, BoundaryExtension::Extend] {
            let q = weighted_dirichlet_form(&g, &w, bc).unwrap();
            prop_assert!(q >= 0.0);
            let qs = weighted_dirichlet_form(&g.scale(scale), &w, bc).unwrap();
            prop_assert!((qs - scale * scale * q).abs() <= 1e-10 * (1.0 + q));
        }
        // constants carry no Dirichlet energy when extended at the boundary
        let c = Field::constant(&dom, 1.37);
        prop_assert!(
            weighted_dirichlet_form(&c, &w, BoundaryExtension::Extend).unwrap() <= 1e-14
        );
    }

    #[test]
    fn norm_lq_homogeneous_and_monotone(
        vals in proptest::collection::vec(-5.0f64..5.0, 32),
        q in 1.0f64..4.0,
        kappa in -4.0f64..4.0,
    ) {
        let dom = build_interval(1.0, 32).unwrap();
        let f = Field::new(dom.clone(), vals.clone()).unwrap();
        let nf = norm_lq(&f, q).unwrap();
        let nk = norm_lq(&f.scale(kappa), q).unwrap();
        prop_assert!((nk - kappa.abs() * nf).abs() <= 1e-10 * (1.0 + nf));
        // enlarging |f| node-wise cannot shrink the norm
        let g = f.map(|v| 1.5 * v.abs() + 0.1);
        prop_assert!(norm_lq(&g, q).unwrap() >= nf);
    }

    #[test]
    fn weighted_mean_of_centered_field_vanishes(
        coeffs in proptest::collection::vec(-3.0f64..3.0, 1..5),
        c in -5.0f64..5.0,
    ) {
        let dom = build_interval(std::f64::consts::PI, 64).unwrap();
        let w = Field::from_fn(&dom, |x| 0.5 + x.sin().abs());
        let constant = Field::constant(&dom, c);
        prop_assert!((weighted_mean(&constant, &w).unwrap() - c).abs() <= 1e-13 * (1.0 + c.abs()));
        let g = cosine_field(&dom, &coeffs);
        let gbar = weighted_mean(&g, &w).unwrap();
        let centered = g.map(|v| v - gbar);
        let scale = g.values().iter().fold(1.0_f64, |a, &b| a.max(b.abs()));
        prop_assert!(weighted_mean(&centered, &w).unwrap().abs() <= 1e-13 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn eigenpairs_are_ordered_orthogonal_and_resolved(
        n in 64usize..256,
        length in 1.0f64..6.0,
        ball in proptest::bool::ANY,
        d in 2u32..4,
    ) {
        let dom = if ball {
            build_radial_ball(d, length, n).unwrap()
        } else {
            build_interval(length, n).unwrap()
        };
        let op = assemble_laplacian(&dom);
        let pairs = eigenpairs(&op, 3).unwrap();
        prop_assert!(pairs[0].lambda > 0.0);
        prop_assert!(pairs[0].lambda < pairs[1].lambda);
        prop_assert!(pairs[1].lambda < pairs[2].lambda);
        prop_assert!(pairs[0].phi.values().iter().all(|&v| v > 0.0));
        for p in &pairs {
            let residual = op
                .apply(&p.phi)
                .unwrap()
                .zip_map(&p.phi, |a, f| a - p.lambda * f)
                .unwrap();
            let r = norm_lq(&residual, 2.0).unwrap();
            prop_assert!(r <= 1e-10 * p.lambda.max(1.0));
        }
        let cross = integrate(
            &pairs[0].phi.zip_map(&pairs[1].phi, |a, b| a * b).unwrap(),
            None,
        )
        .unwrap();
        prop_assert!(cross.abs() <= 1e-10);
    }

    // energy identity |∫|∇U|² - λ_p| <= 1e-6 λ_p and exact normalization
    #[test]
    fn lane_emden_energy_identity(p in 1.05f64..2.5, length in 2.0f64..5.0) {
        let dom = build_interval(length, 200).unwrap();
        let sol = solve_lane_emden(&dom, p, None).unwrap();
        prop_assert!((norm_lq(&sol.u, p + 1.0).unwrap() - 1.0).abs() <= 1e-8);
        prop_assert!(sol.u.values().iter().all(|&v| v > 0.0));
        let energy =
            weighted_dirichlet_form(&sol.u, &Field::constant(&dom, 1.0), BoundaryExtension::Zero)
                .unwrap();
        prop_assert!((energy - sol.lambda_p).abs() <= 1e-6 * sol.lambda_p);
    }

    // u0 <= w0 node-wise is preserved by the monotone implicit scheme
    #[test]
    fn implicit_step_preserves_ordering(
        m in 0.4f64..1.6,
        gap in 0.0f64..0.5,
        coeffs in proptest::collection::vec(0.05f64..0.6, 2),
    ) {
        let dom = build_interval(std::f64::consts::PI, 48).unwrap();
        let extent = dom.extent;
        let mut u = Field::from_fn(&dom, |x| {
            0.2 + coeffs[0] * (std::f64::consts::PI * x / extent).sin()
        });
        let mut w = u.map(|v| v + gap + 0.01 * coeffs[1]);
        for _ in 0..10 {
            u = step_implicit(&u, 1e-2, m, 0.0).unwrap();
            w = step_implicit(&w, 1e-2, m, 0.0).unwrap();
            for (a, b) in u.values().iter().zip(w.values()) {
                prop_assert!(*a <= b + 1e-9);
            }
            // maximum principle: the sup norm cannot grow without a source
            prop_assert!(u.values().iter().all(|&v| v >= 0.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn nonlinearity_tangent_and_curvature_bounds(m in 0.05f64..0.95, theta in -0.5f64..2.0) {
        prop_assert!(f_nonlinearity(0.0, m).unwrap().abs() == 0.0);
        prop_assert!((f_prime(0.0, m).unwrap() - (1.0 - m)).abs() <= 1e-14);
        // f lies above its tangent at the origin
        let f = f_nonlinearity(theta, m).unwrap();
        prop_assert!(f >= (1.0 - m) * theta - 1e-12);
        // curvature bounds on |θ| < 1/2
        if theta.abs() < 0.5 {
            let fpp = f_second(theta, m).unwrap();
            let lo = m * (1.0 - m) * (2.0f64 / 3.0).powf(2.0 - m);
            let hi = m * (1.0 - m) * 2.0f64.powf(2.0 - m);
            prop_assert!(fpp >= lo * (1.0 - 1e-12));
            prop_assert!(fpp <= hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn scalar_inequality_has_no_violations(
        a in 1e-6f64..10.0,
        b in 1e-6f64..5.0,
        frac in 0.0f64..1.0,
    ) {
        prop_assert!(scalar_inequality_check(a, frac * b, b).unwrap());
    }

    // recovered γ from y = A e^{-γt} is exact and amplitude-invariant
    #[test]
    fn rate_fit_recovers_exponentials(gamma in 0.1f64..5.0, amp in 0.1f64..10.0) {
        let series: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.1;
                (t, amp * (-gamma * t).exp())
            })
            .collect();
        let (g, r2) = fit_decay_rate(&series, (0.0, 5.0)).unwrap();
        prop_assert!((g - gamma).abs() <= 1e-8 * gamma);
        prop_assert!((r2 - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn mean_minimality(
        coeffs in proptest::collection::vec(-2.0f64..2.0, 1..5),
        c in -5.0f64..5.0,
    ) {
        let dom = build_interval(std::f64::consts::PI, 64).unwrap();
        let w = Field::from_fn(&dom, |x| 0.1 + x * (std::f64::consts::PI - x));
        let g = cosine_field(&dom, &coeffs);
        let gap = mean_minimality_gap(&g, &w, c).unwrap();
        prop_assert!(gap >= -1e-12);
        // the gap is exactly (c - ḡ)² ∫w
        let gbar = weighted_mean(&g, &w).unwrap();
        let wint = integrate(&Field::constant(&dom, 1.0), Some(&w)).unwrap();
        prop_assert!((gap - (c - gbar) * (c - gbar) * wint).abs() <= 1e-8 * (1.0 + gap));
    }
}
