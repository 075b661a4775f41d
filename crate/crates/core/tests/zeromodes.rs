use magdirac::fields::RadialFieldSpec;
use magdirac::radial::RadialGrid;
use magdirac::zeromodes::*;

fn landau() -> RadialFieldSpec {
    RadialFieldSpec::magnetic_only(1.0, 0.0).unwrap()
}

// V = √(2B) with B = 1 + r²
fn matched() -> RadialFieldSpec {
    // V0 (1+r²)^{1/2} with V0 = √2 equals √(2(1+r²))
    let mut spec = RadialFieldSpec::regularized(2f64.sqrt(), 1.0, 1.0, 2.0).unwrap();
    spec.energy_shift = 0.0;
    spec
}

#[test]
fn dstar_identity_holds_for_all_degrees() {
    let grid = RadialGrid::new(20.0, 100).unwrap();
    for m in 0..=10 {
        let mode = build_zero_mode(&landau(), m, &grid).unwrap();
        let r = dstar_on_zero_mode(&mode);
        assert!(r.rel_err < 1e-8, "m={m}: {}", r.rel_err);
    }
}

#[test]
fn dstar_identity_for_growing_field() {
    // independent oracle: both sides by a different (trapezoid, log-space) rule
    let spec = RadialFieldSpec::regularized(1.0, 1.0, 0.0, 2.0).unwrap();
    let grid = RadialGrid::new(6.0, 100).unwrap();
    let mode = build_zero_mode(&spec, 0, &grid).unwrap();
    let r = dstar_on_zero_mode(&mode);
    let n = 400_000;
    let h = 6.0 / n as f64;
    let (mut lhs, mut rhs, mut norm) = (0.0, 0.0, 0.0);
    for i in 1..n {
        let x = i as f64 * h;
        let a = x / 2.0 + x.powi(3) / 4.0;
        let phi = x * x / 4.0 + x.powi(4) / 16.0;
        let w = x * (-2.0 * phi).exp();
        lhs += 4.0 * a * a * w;
        rhs += 2.0 * (1.0 + x * x) * w;
        norm += w;
    }
    assert!((lhs / rhs - 1.0).abs() < 1e-8);
    assert!((r.dstar_norm_sq / (lhs / norm) - 1.0).abs() < 1e-8);
    assert!((r.field_norm_sq / (rhs / norm) - 1.0).abs() < 1e-8);
}

#[test]
fn commutator_matches_twice_the_field() {
    let grid = RadialGrid::new(10.0, 100).unwrap();
    for spec in [landau(), matched(), RadialFieldSpec::regularized(1.0, 1.0, 0.0, 2.0).unwrap()] {
        for m in [0, 1, 3] {
            let mode = build_zero_mode(&spec, m, &grid).unwrap();
            let (dd, rhs) = commutator_check(&mode);
            assert!((dd / rhs - 1.0).abs() < 1e-6, "m={m}: {dd} vs {rhs}");
        }
    }
}

#[test]
fn d_residual_is_second_order() {
    let grid = RadialGrid::new(20.0, 100).unwrap();
    for m in [0, 4, 10] {
        let mode = build_zero_mode(&landau(), m, &grid).unwrap();
        let r1 = residual_d(&mode, &landau(), 1e-3);
        let r2 = residual_d(&mode, &landau(), 5e-4);
        println!("m={m} {r1:e} {r2:e} order {}", (r1 / r2).log2());
        assert!(r1 < 1e-3);
        assert!((r1 / r2).log2() >= 1.8);
    }
}

#[test]
fn flipped_gauge_is_caught() {
    let grid = RadialGrid::new(20.0, 100).unwrap();
    let mode = build_zero_mode(&landau(), 0, &grid).unwrap();
    let r = residual_d_signed(&mode, &landau(), 1e-3, -1.0);
    // ‖2 A Ω‖ / ‖Ω‖ with A = r/2: (∫ r² r e^{-r²/2} / ∫ r e^{-r²/2})^{1/2} = √2
    assert!((r - 2f64.sqrt()).abs() < 1e-3, "{r}");
}

#[test]
fn bounded_subspace() {
    let grid = RadialGrid::new(12.0, 100).unwrap();
    let spec = matched();
    let report = thm2_bound_check(&spec, &(0..=10).collect::<Vec<_>>(), &grid).unwrap();
    assert!((report.grad_term - 0.5).abs() < 1e-6);
    assert!(report.mismatch_term < 1e-12);
    for row in &report.rows {
        println!("{row:?}");
        assert!(row.ratio <= row.bound + 1e-6);
        assert!(row.psi_over_omega >= row.psi_lower_bound);
    }
    let mode = build_zero_mode(&spec, 2, &grid).unwrap();
    let fd = thm2_ratio_fd(&spec, &mode, 1e-3);
    println!("fd {fd} quad {}", report.rows[2].ratio);
    assert!((fd / report.rows[2].ratio - 1.0).abs() < 1e-4);
}

#[test]
fn bounded_subspace_with_shift() {
    let grid = RadialGrid::new(12.0, 100).unwrap();
    let spec = matched().with_energy_shift(-1.0);
    let report = thm2_bound_check(&spec, &(0..=5).collect::<Vec<_>>(), &grid).unwrap();
    assert!(report.mismatch_term > 0.0);
    for row in &report.rows {
        assert!(row.ratio <= row.bound * (1.0 + 1e-6));
    }
}

#[test]
fn degenerate_matched_constant_field() {
    let grid = RadialGrid::new(20.0, 100).unwrap();
    let spec = RadialFieldSpec::power_law(2f64.sqrt(), 1.0, 0.0, 0.0).unwrap();
    let report = thm2_bound_check(&spec, &[0, 1, 2], &grid).unwrap();
    for row in &report.rows {
        // only the rounding of √2² - 2 survives
        assert!(row.ratio < 1e-12);
    }
}
