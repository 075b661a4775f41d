use approx::assert_relative_eq;
use magdirac::fields::{eval_flux_phi, eval_radial_a, numerical_curl};
use magdirac::{lift_to_2d, PlanarField, RadialFieldSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<RadialFieldSpec> {
    vec![
        RadialFieldSpec::power_law(1.0, 1.0, 1.0, 0.0).unwrap(),
        RadialFieldSpec::power_law(1.0, 1.0, 1.0, 3.0).unwrap(),
        RadialFieldSpec::power_law(2.0, 0.5, 0.6, 1.0).unwrap(),
        RadialFieldSpec::power_law(1.0, 2.0, 2.5, 1.5).unwrap(),
        RadialFieldSpec::regularized(2f64.sqrt(), 1.0, 1.0, 2.0).unwrap(),
    ]
}

#[test]
fn lifted_potential_has_the_right_curl() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for spec in families() {
        let field = lift_to_2d(&spec);
        for _ in 0..100 {
            let x = [rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)];
            let r = f64::hypot(x[0], x[1]);
            let b = field.magnetic(x);
            let curl = numerical_curl(&field, x, 1e-4 * (1.0 + r));
            assert!((curl - b).abs() <= 1e-6 * (1.0 + b.abs()), "{spec:?} at {x:?}: {curl} vs {b}");
        }
    }
}

#[test]
fn flux_derivative_is_the_radial_potential() {
    for spec in families() {
        for r in [0.5, 1.0, 2.0, 5.0] {
            let h = 1e-5 * r;
            let dphi = (eval_flux_phi(&spec, r + h).unwrap() - eval_flux_phi(&spec, r - h).unwrap()) / (2.0 * h);
            let a = eval_radial_a(&spec, r).unwrap();
            assert_relative_eq!(dphi, a, max_relative = 1e-6);
        }
    }
}

#[test]
fn closed_form_examples() {
    let constant = RadialFieldSpec::magnetic_only(1.0, 0.0).unwrap();
    assert_relative_eq!(eval_radial_a(&constant, 3.0).unwrap(), 1.5, max_relative = 1e-14);
    assert_relative_eq!(eval_flux_phi(&constant, 2.0).unwrap(), 1.0, max_relative = 1e-14);
    let linear = RadialFieldSpec::magnetic_only(2.0, 1.0).unwrap();
    assert_relative_eq!(eval_flux_phi(&linear, 3.0).unwrap(), 6.0, max_relative = 1e-14);
    assert_eq!(eval_radial_a(&linear, 0.0).unwrap(), 0.0);
}

#[test]
fn lift_examples() {
    let constant = lift_to_2d(&RadialFieldSpec::magnetic_only(1.0, 0.0).unwrap());
    let a = constant.vector_potential([1.0, 0.0]);
    assert_relative_eq!(a[0], 0.0);
    assert_relative_eq!(a[1], 0.5, max_relative = 1e-14);
    let quad = lift_to_2d(&RadialFieldSpec::power_law(1.0, 1.0, 2.0, 0.0).unwrap());
    assert_relative_eq!(quad.potential([1.0, 1.0]), 2.0, max_relative = 1e-14);
    let g = quad.potential_gradient([1.0, 1.0]);
    assert_relative_eq!(g[0], 2.0, max_relative = 1e-14);
    assert_relative_eq!(g[1], 2.0, max_relative = 1e-14);
}

#[test]
fn ratio_of_potentials_follows_the_exponents() {
    // A(r)/V(r) = B₀ r^{s+1-t} / ((s+2) V₀).
    for (v0, b0, t, s) in [(1.0, 1.0, 2.0, 1.0), (0.5, 3.0, 4.0, 2.0), (2.0, 1.0, 0.6, 1.0)] {
        let spec = RadialFieldSpec::power_law(v0, b0, t, s).unwrap();
        for r in [0.5f64, 3.0, 40.0] {
            let ratio = spec.radial_a(r).unwrap() / spec.v(r);
            assert_relative_eq!(ratio, b0 * r.powf(s + 1.0 - t) / ((s + 2.0) * v0), max_relative = 1e-12);
        }
    }
}

#[test]
fn energy_shift_moves_the_potential_only() {
    let spec = RadialFieldSpec::power_law(1.0, 1.0, 1.0, 0.0).unwrap().with_energy_shift(0.5);
    assert_relative_eq!(spec.v(2.0), 1.5);
    assert_relative_eq!(spec.b(2.0), 1.0);
    let back = RadialFieldSpec::from_json(&spec.to_json()).unwrap();
    assert_eq!(back, spec);
}
