use std::f64::consts::{E, PI};

use magdirac::dirac::{apply_d, apply_dirac, apply_dstar, Stencil};
use magdirac::fields::{lift_to_2d, PlanarField, Point, RadialFieldSpec};
use magdirac::quadrature::{poisson_tail, GaussLegendre};
use magdirac::quasimodes::{
    check_gauge, choose_centers, cutoff, gauge_function, gauge_function_l_path, ladder_state, norm_bounds_check,
    residual_sequence, residual_terms, thin_centers, Center, CenterSearch, QuasimodeParams, Variant, CUTOFF_PROFILE,
};
use magdirac::Error;
use proptest::prelude::*;

/// Polar Gauss–Legendre × trapezoid rule on the disc of radius `rmax`.
fn polar_integral<F: Fn(Point) -> f64>(f: F, rmax: f64, panels: usize) -> f64 {
    let gl = GaussLegendre::new(16);
    let (rs, ws) = gl.composite_points(0.0, rmax, panels);
    let nt = 128;
    let dt = 2.0 * PI / nt as f64;
    let mut total = 0.0;
    for (r, w) in rs.iter().zip(&ws) {
        for k in 0..nt {
            let t = k as f64 * dt;
            total += w * r * dt * f([r * t.cos(), r * t.sin()]);
        }
    }
    total
}

fn landau_potential(b: f64) -> impl Fn(Point) -> Point {
    move |y: Point| [-0.5 * b * y[1], 0.5 * b * y[0]]
}

fn constant_field(v: f64) -> magdirac::RotationalField {
    lift_to_2d(&RadialFieldSpec::power_law(v, 1.0, 0.0, 0.0).unwrap())
}

fn single_center(field: &dyn PlanarField, p: u32, x: Point, radius: f64) -> QuasimodeParams {
    let mut params = QuasimodeParams::at_points(field, Variant::thm3a(p), &[x]).unwrap();
    params.centers[0].radius = radius;
    params
}

#[test]
fn ladder_relation_gives_landau_levels() {
    // <g, d d* g>/|g|² = 2kB for g = (d*)^{k-1} G.
    let b = 2.0;
    let a = landau_potential(b);
    let h = 1e-3;
    for k in 1..=2u32 {
        let s = ladder_state(b, k, 0.0, [0.0, 0.0]).unwrap();
        let g = move |y: Point| s.ladder_power(k - 1, y);
        let dstar_g = |y: Point| apply_dstar(&g, a(y), y, h, Stencil::Fourth);
        let num = polar_integral(|y| (g(y).conj() * apply_d(&dstar_g, a(y), y, h, Stencil::Fourth)).re, 12.0 / b.sqrt(), 24);
        let den = polar_integral(|y| g(y).norm_sqr(), 12.0 / b.sqrt(), 24);
        let ratio = num / den;
        assert!((ratio / (2.0 * k as f64 * b) - 1.0).abs() < 1e-6, "k={k}: {ratio}");
    }
}

#[test]
fn dstar_raises_the_ladder() {
    let b = 1.5;
    let s = ladder_state(b, 3, 0.0, [0.0, 0.0]).unwrap();
    let a = landau_potential(b);
    for y in [[0.3, -0.2], [1.1, 0.7], [-0.5, 1.4]] {
        let g = |x: Point| s.ladder_power(1, x);
        let up = apply_dstar(&g, a(y), y, 1e-3, Stencil::Fourth);
        assert!((up - s.ladder_power(2, y)).norm() < 1e-9 * (1.0 + up.norm()));
    }
}

#[test]
fn ladder_states_are_orthogonal() {
    let b = 1.0;
    let s = ladder_state(b, 1, 0.0, [0.0, 0.0]).unwrap();
    for (p, q) in [(0u32, 1u32), (1, 3), (2, 5)] {
        let cross = |y: Point| s.ladder_power(p, y).conj() * s.ladder_power(q, y);
        let re = polar_integral(|y| cross(y).re, 14.0, 32);
        let im = polar_integral(|y| cross(y).im, 14.0, 32);
        let np = polar_integral(|y| s.ladder_power(p, y).norm_sqr(), 14.0, 32);
        let nq = polar_integral(|y| s.ladder_power(q, y).norm_sqr(), 14.0, 32);
        assert!(re.hypot(im) < 1e-10 * (np * nq).sqrt(), "({p},{q})");
    }
}

#[test]
fn phi_norm_matches_closed_form_by_polar_quadrature() {
    let (b, p, v) = (1.0, 1u32, 2f64.sqrt());
    let s = ladder_state(b, p, v, [0.0, 0.0]).unwrap();
    let n = polar_integral(|y| s.at_offset(y).iter().map(|c| c.norm_sqr()).sum(), 16.0, 32);
    assert!((n - 8.0 * PI).abs() < 1e-9);
    assert!((s.ln_norm_sq().exp() - 8.0 * PI).abs() < 1e-12);
}

#[test]
fn choose_centers_solves_level_crossing() {
    // V = |x|, B = 1: V² = 2n at |x| = √(2n).
    let field = lift_to_2d(&RadialFieldSpec::power_law(1.0, 1.0, 1.0, 0.0).unwrap());
    let chosen = choose_centers(&field, [1.0, 0.0], Variant::thm3(), 4, &CenterSearch::default()).unwrap();
    assert!(!chosen.degenerate);
    for (n, x) in chosen.points.iter().enumerate() {
        let expect = (2.0 * (n + 1) as f64).sqrt();
        assert!((x[0] / expect - 1.0).abs() < 1e-11, "{x:?}");
        assert_eq!(x[1], 0.0);
    }
    let chosen = choose_centers(&field, [0.0, -3.0], Variant::thm3(), 2, &CenterSearch::default()).unwrap();
    assert!((chosen.points[1][1] + 2.0).abs() < 1e-11);
}

#[test]
fn choose_centers_flags_identity_as_degenerate() {
    let field = lift_to_2d(&RadialFieldSpec::power_law(2f64.sqrt(), 1.0, 1.0, 2.0).unwrap());
    let chosen = choose_centers(&field, [1.0, 1.0], Variant::thm3a(1), 3, &CenterSearch::default()).unwrap();
    assert!(chosen.degenerate);
    let radii: Vec<f64> = chosen.points.iter().map(|x| x[0].hypot(x[1])).collect();
    for (r, e) in radii.iter().zip([10.0, 20.0, 40.0]) {
        assert!((r - e).abs() < 1e-12);
    }
}

#[test]
fn bounded_potential_has_no_crossing() {
    let field = lift_to_2d(&RadialFieldSpec::regularized(1.0, 1.0, 0.0, 0.0).unwrap());
    let err = choose_centers(&field, [1.0, 0.0], Variant::thm3(), 3, &CenterSearch::default()).unwrap_err();
    assert!(matches!(err, Error::NoCrossing { n: 1, .. }));
    assert_eq!(err.code(), "E_NO_CROSSING");
}

#[test]
fn thinned_ray_centers_have_disjoint_patches() {
    // V = |x|^{1/4}, B = 1: centers at 4n², spaced faster than the radii grow.
    let field = lift_to_2d(&RadialFieldSpec::power_law(1.0, 1.0, 0.25, 0.0).unwrap());
    let params = QuasimodeParams::on_ray(&field, [1.0, 0.0], Variant::thm3(), 40).unwrap();
    assert!(params.centers.len() >= 30, "{}", params.centers.len());
    for w in params.centers.windows(2) {
        let d = (w[1].x[0] - w[0].x[0]).hypot(w[1].x[1] - w[0].x[1]);
        assert!(d > 2.0 * (w[0].radius + w[1].radius));
        assert!(w[1].n > w[0].n && w[1].p as usize == w[1].n);
    }
}

#[test]
fn gauge_function_examples() {
    let landau = lift_to_2d(&RadialFieldSpec::magnetic_only(1.0, 0.0).unwrap());
    assert!((gauge_function(&landau, [2.0, 0.0], [0.0, 1.0]) - 1.0).abs() < 1e-10);
    assert_eq!(gauge_function(&landau, [2.0, 0.0], [2.0, 0.0]), 0.0);

    let quadratic = lift_to_2d(&RadialFieldSpec::magnetic_only(1.0, 2.0).unwrap());
    let xn = [3.0, 1.0];
    for x in [[3.5, 0.2], [2.1, 1.9], [4.0, 2.5]] {
        let s = gauge_function(&quadratic, xn, x);
        let l = gauge_function_l_path(&quadratic, xn, x);
        assert!((s - l).abs() < 1e-7 * (1.0 + s.abs()), "{s} vs {l}");
    }
    assert!(check_gauge(&quadratic, xn, 1.0).unwrap() < 1e-7);
}

/// B = 1 but A = (0, 2x₁), whose curl is 2.
struct BrokenPairing;

impl PlanarField for BrokenPairing {
    fn magnetic(&self, _: Point) -> f64 {
        1.0
    }
    fn potential(&self, _: Point) -> f64 {
        2f64.sqrt()
    }
    fn potential_gradient(&self, _: Point) -> Point {
        [0.0, 0.0]
    }
    fn vector_potential(&self, x: Point) -> Point {
        [0.0, 2.0 * x[0]]
    }
    fn magnetic_gradient(&self, _: Point) -> Point {
        [0.0, 0.0]
    }
}

#[test]
fn broken_field_pairing_is_a_gauge_error() {
    let err = check_gauge(&BrokenPairing, [1.0, 1.0], 1.0).unwrap_err();
    assert_eq!(err.code(), "E_GAUGE");
    let params = QuasimodeParams::at_points(&BrokenPairing, Variant::thm3a(1), &[[1.0, 1.0]]).unwrap();
    assert!(matches!(residual_terms(&BrokenPairing, &params, 0), Err(Error::Gauge { .. })));
}

#[test]
fn matched_constant_field_leaves_only_the_cutoff_term() {
    let field = constant_field(2f64.sqrt());
    let params = single_center(&field, 1, [3.0, -2.0], 10.0);
    let q = residual_terms(&field, &params, 0).unwrap();
    assert!(q.terms[0] < 1e-14, "{:?}", q.terms);
    assert!(q.terms[2] < 1e-12, "{:?}", q.terms);
    assert_eq!(q.terms[3], 0.0);
    assert!(q.terms[1] > 0.0 && q.terms[1] < 1e-8, "{:?}", q.terms);
    assert!(q.ratio_fd < 1e-5, "{}", q.ratio_fd);
    assert_eq!(q.cutoff, CUTOFF_PROFILE);
    assert!(q.norm_psi() <= q.norm_phi() * (1.0 + 1e-10));
}

#[test]
fn mismatched_level_term_matches_closed_form() {
    // V_n = √2 + 0.1 against the first level at B = 1.
    let v = 2f64.sqrt() + 0.1;
    let field = constant_field(v);
    let params = single_center(&field, 1, [0.0, 0.0], 10.0);
    let q = residual_terms(&field, &params, 0).unwrap();
    let gap = (v * v - 2.0).abs();
    // ‖ψ‖² → 4π + 2πV² and ‖χG‖² → 2π as the cutoff radius grows.
    let exact = gap / (2.0 + v * v).sqrt();
    assert!((q.terms[0] / exact - 1.0).abs() < 1e-8, "{} vs {exact}", q.terms[0]);
    // Bound |V² - 2B|/|V| · ‖φ₂‖.
    let phi2 = v * (2.0 * PI).sqrt();
    assert!(q.terms[0] * q.norm_psi() <= gap / v * phi2 * (1.0 + 1e-10));
    // The whole residual is the Landau term; the FD route sees it too.
    assert!((q.ratio_fd / q.ratio_coherent - 1.0).abs() < 1e-5);
}

#[test]
fn landau_term_is_exact_against_finite_differences() {
    // ‖χ(D_{A_n} + V_n)φ̂‖ computed by FD equals |2pB - V²|·‖χ(d*)^{p-1}G‖.
    for (b, p, v) in [(1.0, 1u32, 1.2), (2.0, 2, 3.1), (0.7, 3, 2.0)] {
        let r = 3.0 / f64::sqrt(b);
        let field = constant_field(v);
        let mut params = QuasimodeParams::at_points(&field, Variant::thm3a(p), &[[0.0, 0.0]]).unwrap();
        params.centers[0] = Center { b, radius: r, ..params.centers[0] };
        let q = residual_terms(&lift_to_2d(&RadialFieldSpec::power_law(v, b, 0.0, 0.0).unwrap()), &params, 0).unwrap();
        let t1 = q.terms[0] * q.norm_psi();

        let s = ladder_state(b, p, v, [0.0, 0.0]).unwrap();
        let a = landau_potential(b);
        let h = 1e-3 / b.sqrt();
        let up = |y: Point| s.at_offset(y)[0];
        let lo = |y: Point| s.at_offset(y)[1];
        let fd = polar_integral(
            |y| {
                let c = cutoff(y[0].hypot(y[1]) / r);
                let (u, w) = apply_dirac(&up, &lo, a(y), v, y, h, Stencil::Fourth);
                c * c * (u.norm_sqr() + w.norm_sqr())
            },
            2.0 * r,
            48,
        )
        .sqrt();
        assert!((fd / t1 - 1.0).abs() < 1e-8, "b={b} p={p}: {fd} vs {t1}");
    }
}

#[test]
fn growing_field_family_residual_decays() {
    // B = |x|², V = √2|x|: V² ≡ 2B, centers on the diagonal.
    let field = lift_to_2d(&RadialFieldSpec::power_law(2f64.sqrt(), 1.0, 1.0, 2.0).unwrap());
    let params = QuasimodeParams::on_ray(&field, [1.0, 1.0], Variant::thm3a(1), 4).unwrap();
    assert!(params.degenerate);
    assert_eq!(params.centers.len(), 4);
    let qs = residual_sequence(&field, &params).unwrap();
    for w in qs.windows(2) {
        assert!(w[1].ratio_sum < w[0].ratio_sum);
        assert!(w[1].ratio_fd < w[0].ratio_fd);
    }
    for q in &qs {
        assert!(q.terms[0] < 1e-12);
        // Pointwise sum of the four terms is the operator itself.
        assert!((q.ratio_fd / q.ratio_coherent - 1.0).abs() < 1e-4, "{} {}", q.ratio_fd, q.ratio_coherent);
        // Removing the phase does not change the norm.
        assert!((q.ratio_fd / q.ratio_fd_gauge - 1.0).abs() < 1e-4, "{} {}", q.ratio_fd, q.ratio_fd_gauge);
        assert!(q.ratio_coherent <= q.ratio_sum * (1.0 + 1e-12));
        assert!(q.norm_lb_margin >= 1.0);
        assert!(q.gauge_gap < 1e-7);
    }
}

#[test]
fn norm_bound_examples() {
    let nb = norm_bounds_check(1.0, 2f64.sqrt(), 1, 10.0).unwrap();
    assert!((nb.phi_sq - 8.0 * PI).abs() < 1e-9);
    assert!((nb.phi_lower - 4.0 * PI).abs() < 1e-12);
    assert!(nb.tail < 1e-20);
    assert!(nb.psi_sq >= 2.0 * PI - 1e-9);
    assert!(nb.pass);

    let nb = norm_bounds_check(4.0, 24f64.sqrt(), 3, 2.0).unwrap();
    assert!(nb.pass);
    assert!((1.0..=4.0).contains(&nb.phi_margin));
    assert!((nb.phi_sq / nb.phi_closed - 1.0).abs() < 1e-10);

    assert!((poisson_tail(2, 1.0) - 5.0 / (2.0 * E)).abs() < 1e-15);
}

#[test]
fn thinning_is_greedy() {
    let mk = |n, x: f64, r| Center { n, x: [x, 0.0], p: 1, radius: r, b: 1.0, v: 1.0 };
    let kept = thin_centers(&[mk(1, 0.0, 0.5), mk(2, 1.5, 0.5), mk(3, 2.5, 0.5)]);
    assert_eq!(kept.iter().map(|c| c.n).collect::<Vec<_>>(), vec![1, 3]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_bounds_hold_near_the_level(p in 1u32..16, b in 0.5f64..20.0, rel in -0.2f64..0.2, rs in 2.0f64..10.0) {
        let v = (2.0 * p as f64 * b).sqrt() * (1.0 + rel);
        let r = rs * ((p as f64 + 1.0) / b).sqrt();
        let nb = norm_bounds_check(b, v, p, r).unwrap();
        prop_assert!(nb.pass, "{:?}", nb);
        prop_assert!(nb.psi_sq <= nb.phi_sq * (1.0 + 1e-10));
        prop_assert!((nb.phi_sq / nb.phi_closed - 1.0).abs() < 1e-9);
    }
}
