//! Aharonov–Casher zero modes `Ω_m = z^m e^{-φ}` of a radial field, the
//! bounded-energy vectors `ψ_m = (d*Ω_m, -VΩ_m)`, and the identities they
//! satisfy.
//!
//! All radial integrals are computed on `[0, R]` with a composite
//! Gauss–Legendre rule; the angular integral contributes `2π`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::dirac::{apply_d, apply_dirac, apply_dstar, Stencil, C64};
use crate::error::{Error, Result};
use crate::fields::{lift_to_2d, MonotoneCubic, PlanarField, Point, RadialFieldSpec};
use crate::quadrature::GaussLegendre;
use crate::radial::RadialGrid;

/// Accepted modes keep less than this fraction of `‖Ω‖²` beyond `0.9 R`.
pub const TAIL_LIMIT: f64 = 1e-6;

const GL_NODES: usize = 16;
const BASE_PANELS: usize = 512;

/// Field quantities sampled on a radial Gauss–Legendre rule over `[0, R]`.
#[derive(Debug, Clone)]
pub struct RadialSamples {
    pub radius: f64,
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub phi: Vec<f64>,
    phi_table: std::sync::Arc<MonotoneCubic>,
}

impl RadialSamples {
    pub fn new(spec: &RadialFieldSpec, radius: f64, panels: usize) -> Result<Self> {
        Self::with_flux(spec, radius, panels, None)
    }

    fn with_flux(
        spec: &RadialFieldSpec,
        radius: f64,
        panels: usize,
        flux: Option<&dyn Fn(f64) -> f64>,
    ) -> Result<Self> {
        if radius > spec.max_radius() {
            return Err(Error::Extrapolation { r: radius, end: spec.max_radius() });
        }
        let (r, w) = GaussLegendre::new(GL_NODES).composite_points(0.0, radius, panels);
        let a = spec.radial_a_on(&r);
        let phi = match flux {
            Some(f) => r.iter().map(|&x| f(x)).collect(),
            None => spec.flux_phi_on(&r),
        };
        let mut xs = vec![0.0];
        xs.extend(&r);
        let mut ys = vec![0.0];
        ys.extend(&phi);
        // φ' = A gives exact Hermite slopes; a custom flux has none.
        let phi_table = std::sync::Arc::new(match flux {
            Some(_) => MonotoneCubic::new(&xs, &ys)?,
            None => {
                let mut slopes = vec![0.0];
                slopes.extend(&a);
                MonotoneCubic::hermite(&xs, &ys, &slopes)?
            }
        });
        Ok(RadialSamples {
            phi_table,
            radius,
            b: r.iter().map(|&x| spec.b(x)).collect(),
            v: r.iter().map(|&x| spec.v(x)).collect(),
            dv: r.iter().map(|&x| spec.dv(x)).collect(),
            r,
            w,
            a,
            phi,
        })
    }

    /// `ln ∫ e^{g(r)} dr` for a log-integrand, stably.
    fn log_integral(&self, log_f: impl Fn(usize) -> f64, range: std::ops::Range<f64>) -> f64 {
        let logs: Vec<f64> = (0..self.r.len())
            .map(|i| if range.contains(&self.r[i]) { log_f(i) + self.w[i].ln() } else { f64::NEG_INFINITY })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
    }

    // ln of the weight r^{2m+1} e^{-2φ} at node i.
    fn log_weight(&self, m: u32, i: usize) -> f64 {
        (2 * m + 1) as f64 * self.r[i].ln() - 2.0 * self.phi[i]
    }

    /// `∫ g(r) r^{2m+1} e^{-2φ} dr / ∫ r^{2m+1} e^{-2φ} dr`.
    pub fn weighted_mean(&self, m: u32, g: impl Fn(usize) -> f64) -> f64 {
        let ln_norm = self.log_integral(|i| self.log_weight(m, i), 0.0..f64::INFINITY);
        (0..self.r.len())
            .map(|i| g(i) * self.w[i] * (self.log_weight(m, i) - ln_norm).exp())
            .sum()
    }
}

/// A zero mode `Ω_m(r, θ) = r^m e^{-φ(r)} e^{imθ}` truncated to `[0, R]`.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroMode {
    pub m: u32,
    pub radius: f64,
    /// `ln ‖Ω_m‖²` over the disc of radius `R`.
    pub ln_norm_sq: f64,
    /// Fraction of `‖Ω_m‖²` carried by `0.9 R < r < R`.
    pub mass_tail: f64,
    #[serde(skip)]
    samples: std::sync::Arc<RadialSamples>,
    #[serde(skip)]
    phi_table: std::sync::Arc<MonotoneCubic>,
}

impl ZeroMode {
    pub fn norm_sq(&self) -> f64 {
        self.ln_norm_sq.exp()
    }

    pub fn samples(&self) -> &RadialSamples {
        &self.samples
    }

    /// `Ω_m(x) / ‖Ω_m‖` evaluated pointwise (`φ` from a Hermite table).
    pub fn normalized_value(&self, x: Point) -> C64 {
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            return if self.m == 0 { C64::new((-0.5 * self.ln_norm_sq).exp(), 0.0) } else { C64::new(0.0, 0.0) };
        }
        let theta = x[1].atan2(x[0]);
        let modulus = (self.m as f64 * r.ln() - self.phi_table.eval(r) - 0.5 * self.ln_norm_sq).exp();
        C64::from_polar(modulus, self.m as f64 * theta)
    }
}

fn mode_from_samples(m: u32, samples: std::sync::Arc<RadialSamples>) -> Result<ZeroMode> {
    let ln_total = samples.log_integral(|i| samples.log_weight(m, i), 0.0..f64::INFINITY);
    let ln_tail = samples.log_integral(|i| samples.log_weight(m, i), 0.9 * samples.radius..f64::INFINITY);
    let mass_tail = (ln_tail - ln_total).exp();
    if !(mass_tail < TAIL_LIMIT) {
        return Err(Error::NotNormalizable { m, tail: mass_tail });
    }
    let phi_table = samples.phi_table.clone();
    Ok(ZeroMode { m, radius: samples.radius, ln_norm_sq: (2.0 * PI).ln() + ln_total, mass_tail, samples, phi_table })
}

/// Zero mode of degree `m` on the disc of radius `grid.radius`.
pub fn build_zero_mode(spec: &RadialFieldSpec, m: u32, grid: &RadialGrid) -> Result<ZeroMode> {
    let samples = RadialSamples::new(spec, grid.radius, BASE_PANELS)?;
    mode_from_samples(m, std::sync::Arc::new(samples))
}

/// As [`build_zero_mode`] with a caller-supplied flux function in place of `φ`.
pub fn build_zero_mode_with_flux(
    spec: &RadialFieldSpec,
    m: u32,
    grid: &RadialGrid,
    flux: &dyn Fn(f64) -> f64,
) -> Result<ZeroMode> {
    let samples = RadialSamples::with_flux(spec, grid.radius, BASE_PANELS, Some(flux))?;
    mode_from_samples(m, std::sync::Arc::new(samples))
}

/// Largest degree whose mode is accepted on the grid, if any.
pub fn max_accepted_degree(spec: &RadialFieldSpec, grid: &RadialGrid) -> Result<Option<u32>> {
    let samples = std::sync::Arc::new(RadialSamples::new(spec, grid.radius, BASE_PANELS)?);
    let mut best = None;
    for m in 0..10_000u32 {
        match mode_from_samples(m, samples.clone()) {
            Ok(_) => best = Some(m),
            Err(Error::NotNormalizable { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

/// `d*Ω_m = -i e^{i(m-1)θ} q(r)` with `q(r) = 2 r^{m-1} (m - rA) e^{-φ}`.
#[derive(Debug, Clone, Serialize)]
pub struct DStarReport {
    pub m: u32,
    /// Sample radii and `q(r) / ‖Ω_m‖` there.
    pub radii: Vec<f64>,
    pub q: Vec<f64>,
    /// `‖d*Ω_m‖² / ‖Ω_m‖²`.
    pub dstar_norm_sq: f64,
    /// `‖√(2B) Ω_m‖² / ‖Ω_m‖²`.
    pub field_norm_sq: f64,
    pub rel_err: f64,
}

/// Closed-form `d*` applied to a zero mode, with the norm identity
/// `‖d*Ω‖ = ‖√(2B) Ω‖`.
pub fn dstar_on_zero_mode(mode: &ZeroMode) -> DStarReport {
    let s = mode.samples();
    let m = mode.m as f64;
    // |q|² r = 4 r^{2m+1} (m/r - A)² e^{-2φ}
    let dstar = s.weighted_mean(mode.m, |i| 4.0 * (m / s.r[i] - s.a[i]).powi(2));
    let field = s.weighted_mean(mode.m, |i| 2.0 * s.b[i]);
    let half = 0.5 * mode.ln_norm_sq;
    let q = s
        .r
        .iter()
        .zip(&s.a)
        .zip(&s.phi)
        .map(|((&r, &a), &phi)| {
            let sign = (m - r * a).signum();
            sign * (2f64.ln() + (m - 1.0) * r.ln() + (m - r * a).abs().ln() - phi - half).exp()
        })
        .collect();
    DStarReport {
        m: mode.m,
        radii: s.r.clone(),
        q,
        dstar_norm_sq: dstar,
        field_norm_sq: field,
        rel_err: (dstar - field).abs() / field,
    }
}

/// `⟨Ω, d d* Ω⟩ / ‖Ω‖²` from the closed form of `d d*Ω`, to compare with
/// `⟨Ω, 2B Ω⟩ / ‖Ω‖²` (the commutator identity with `dΩ = 0`).
pub fn commutator_check(mode: &ZeroMode) -> (f64, f64) {
    let s = mode.samples();
    let m = mode.m as f64;
    // With q = 2 e^{-φ} (m r^{m-1} - r^m A) and A' = B - A/r,
    // d d* Ω = -e^{imθ} (q' - (m-1) q / r + A q), so
    // ⟨Ω, d d*Ω⟩ = -2π ∫ r^{m+1} e^{-φ} (q' - (m-1) q / r + A q) dr.
    // Dividing by r^{2m+1} e^{-2φ} leaves the bracket below.
    let dd = s.weighted_mean(mode.m, |i| {
        let r = s.r[i];
        let a = s.a[i];
        let da = s.b[i] - a / r;
        // q / (r^{m} e^{-φ}) and q' / (r^{m} e^{-φ})
        let q = 2.0 * (m / r - a);
        let dq = 2.0 * (-a * (m / r - a) + m * (m - 1.0) / (r * r) - m * a / r - da);
        -(dq - (m - 1.0) * q / r + a * q)
    });
    let rhs = s.weighted_mean(mode.m, |i| 2.0 * s.b[i]);
    (dd, rhs)
}

/// Polar quadrature patch `[0, R] × [0, 2π)`.
struct Patch {
    points: Vec<Point>,
    weights: Vec<f64>,
}

fn polar_patch(radius: f64, radial_panels: usize, angles: usize) -> Patch {
    let (rs, ws) = GaussLegendre::new(8).composite_points(0.0, radius, radial_panels);
    let mut points = Vec::with_capacity(rs.len() * angles);
    let mut weights = Vec::with_capacity(rs.len() * angles);
    let dt = 2.0 * PI / angles as f64;
    for (r, w) in rs.iter().zip(&ws) {
        for k in 0..angles {
            let t = k as f64 * dt;
            points.push([r * t.cos(), r * t.sin()]);
            weights.push(w * r * dt);
        }
    }
    Patch { points, weights }
}

/// `‖dΩ‖ / ‖Ω‖` by central differences with step `fd_step` on a polar
/// patch; `gauge_sign = -1` flips `A` as a negative control.
pub fn residual_d_signed(mode: &ZeroMode, spec: &RadialFieldSpec, fd_step: f64, gauge_sign: f64) -> f64 {
    let field = lift_to_2d(spec);
    let patch = polar_patch(mode.radius, 64, 64 + 4 * mode.m as usize);
    let omega = |x: Point| mode.normalized_value(x);
    let (num, den) = patch
        .points
        .par_iter()
        .zip(&patch.weights)
        .map(|(&x, &w)| {
            let a = field.vector_potential(x);
            let r = apply_d(&omega, [gauge_sign * a[0], gauge_sign * a[1]], x, fd_step, Stencil::Second);
            (w * r.norm_sqr(), w * omega(x).norm_sqr())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    (num / den).sqrt()
}

/// `‖dΩ‖ / ‖Ω‖` by central differences.
pub fn residual_d(mode: &ZeroMode, spec: &RadialFieldSpec, fd_step: f64) -> f64 {
    residual_d_signed(mode, spec, fd_step, 1.0)
}

/// One row of the bounded-subspace check.
#[derive(Debug, Clone, Serialize)]
pub struct Thm2Row {
    pub m: u32,
    /// `‖Hψ_m‖ / ‖ψ_m‖` by radial quadrature.
    pub ratio: f64,
    /// `sup|∇V/V| + sup|(2B - V²)/V|`.
    pub bound: f64,
    /// `‖ψ_m‖ / ‖Ω_m‖`.
    pub psi_over_omega: f64,
    /// `√(2 inf B)`.
    pub psi_lower_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Thm2Report {
    pub grad_term: f64,
    pub mismatch_term: f64,
    pub rows: Vec<Thm2Row>,
}

/// `sup |v'/v|` and `sup |(2B - v²)/v|` on `[0, R]`, sampled; fails when
/// `v` is not bounded away from zero or `v'` blows up.
pub fn thm2_constants(spec: &RadialFieldSpec, radius: f64) -> Result<(f64, f64)> {
    let n = 200_000;
    let mut grad = 0.0f64;
    let mut mismatch = 0.0f64;
    for i in 0..=n {
        // include a point very close to the origin to expose r^{t-1} growth
        let r = if i == 0 { 1e-12 } else { radius * i as f64 / n as f64 };
        let v = spec.v(r);
        let dv = spec.dv(r);
        if !(v.abs() > 0.0) || !dv.is_finite() {
            return Err(Error::Precondition(format!(
                "‖∇V/V‖∞ is not finite on [0, {radius}] (v = {v}, v' = {dv} at r = {r})"
            )));
        }
        grad = grad.max((dv / v).abs());
        mismatch = mismatch.max(((2.0 * spec.b(r) - v * v) / v).abs());
    }
    if grad > 1e6 {
        return Err(Error::Precondition(format!("‖∇V/V‖∞ is effectively unbounded ({grad:.3e})")));
    }
    Ok((grad, mismatch))
}

/// `‖Hψ_m‖ / ‖ψ_m‖` against the analytic bound for each requested degree,
/// where `Hψ = ((i∂₁V + ∂₂V) Ω, (2B - V²) Ω)`.
pub fn thm2_bound_check(spec: &RadialFieldSpec, degrees: &[u32], grid: &RadialGrid) -> Result<Thm2Report> {
    let (grad_term, mismatch_term) = thm2_constants(spec, grid.radius)?;
    let samples = std::sync::Arc::new(RadialSamples::new(spec, grid.radius, BASE_PANELS)?);
    let b_min = spec.min_b_on(grid.radius);
    let rows: Result<Vec<Thm2Row>> = degrees
        .par_iter()
        .map(|&m| {
            let mode = mode_from_samples(m, samples.clone())?;
            let s = mode.samples();
            let mf = m as f64;
            let h_sq = s.weighted_mean(m, |i| s.dv[i].powi(2) + (2.0 * s.b[i] - s.v[i].powi(2)).powi(2));
            let dstar = s.weighted_mean(m, |i| 4.0 * (mf / s.r[i] - s.a[i]).powi(2));
            let v_sq = s.weighted_mean(m, |i| s.v[i].powi(2));
            let psi_sq = dstar + v_sq;
            Ok(Thm2Row {
                m,
                ratio: (h_sq / psi_sq).sqrt(),
                bound: grad_term + mismatch_term,
                psi_over_omega: psi_sq.sqrt(),
                psi_lower_bound: (2.0 * b_min).sqrt(),
            })
        })
        .collect();
    Ok(Thm2Report { grad_term, mismatch_term, rows: rows? })
}

/// `‖Hψ_m‖ / ‖ψ_m‖` with `H = D_A + V` applied by finite differences to
/// `ψ_m = (d*Ω_m, -VΩ_m)`, where `d*Ω_m` itself is taken by differences.
pub fn thm2_ratio_fd(spec: &RadialFieldSpec, mode: &ZeroMode, fd_step: f64) -> f64 {
    let field = lift_to_2d(spec);
    let omega = |x: Point| mode.normalized_value(x);
    let upper = |x: Point| apply_dstar(&omega, field.vector_potential(x), x, fd_step, Stencil::Fourth);
    let lower = |x: Point| -field.potential(x) * omega(x);
    // stay off the origin where the nested stencil would straddle r = 0
    let patch = polar_patch(mode.radius, 64, 64 + 4 * mode.m as usize);
    let (num, den) = patch
        .points
        .par_iter()
        .zip(&patch.weights)
        .map(|(&x, &w)| {
            let (hu, hl) = apply_dirac(
                &upper,
                &lower,
                field.vector_potential(x),
                field.potential(x),
                x,
                fd_step,
                Stencil::Fourth,
            );
            (w * (hu.norm_sqr() + hl.norm_sqr()), w * (upper(x).norm_sqr() + lower(x).norm_sqr()))
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    (num / den).sqrt()
}
