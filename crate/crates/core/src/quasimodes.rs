//! Localized Landau ladder states and the Weyl-sequence residuals
//! `ψ_n = e^{i g_n} χ_n φ̂_n` for potentials that cross Landau levels.
//!
//! Around a center `x_n` with `B_n = B(x_n)`, `V_n = V(x_n)` the state is
//! `φ̂ = ((iB_n z̄)^p G, -V_n (iB_n z̄)^{p-1} G)` with `y = x - x_n`,
//! `z̄ = y₁ - i y₂` and `G = exp(-B_n |y|²/4)`. The residual
//! `(D_A + V)ψ_n` splits into four terms: the Landau mismatch `T₁`, the
//! cutoff gradient `T₂`, the gauge mismatch `T₃` and the potential
//! mismatch `T₄`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::dirac::{C64, I};
use crate::error::{Error, Result};
use crate::fields::{PlanarField, Point};
use crate::quadrature::{adaptive_simpson, ln_factorial, poisson_tail, GaussLegendre};

/// Name of the cutoff profile, written to every output.
pub const CUTOFF_PROFILE: &str = "bump:exp(1-1/(1-(rho-1)^2))";

/// Angular trapezoid nodes on the patch.
pub const ANGULAR_NODES: usize = 256;

const RADIAL_ORDER: usize = 16;
const SEGMENT_ORDER: usize = 24;
const MAX_PANELS: usize = 512;
const GAUGE_TOL: f64 = 1e-7;
const GAUGE_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Variant {
    /// Fixed ladder index `k`; centers where `V² ≈ 2kB`.
    Thm3a { k: u32, eps: f64 },
    /// Ladder index `p_n = n`; centers where `V² = 2nB`.
    Thm3 { eps: f64, alpha: f64, kappa: f64, b0: f64 },
}

impl Variant {
    pub fn thm3a(k: u32) -> Self {
        Variant::Thm3a { k, eps: 0.5 }
    }

    pub fn thm3() -> Self {
        Variant::Thm3 { eps: 0.2, alpha: 1.0, kappa: 1.0, b0: 1.0 }
    }

    pub fn eps(&self) -> f64 {
        match *self {
            Variant::Thm3a { eps, .. } | Variant::Thm3 { eps, .. } => eps,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Thm3a { .. } => "thm3a",
            Variant::Thm3 { .. } => "thm3",
        }
    }

    /// Ladder index of the `n`-th center (1-based).
    pub fn level(&self, n: usize) -> u32 {
        match *self {
            Variant::Thm3a { k, .. } => k,
            Variant::Thm3 { .. } => n as u32,
        }
    }

    /// Cutoff radius at a center with field `b` and ladder index `p`.
    pub fn cutoff_radius(&self, b: f64, p: u32) -> f64 {
        match *self {
            Variant::Thm3a { eps, .. } => b.powf(0.5 * (eps - 1.0)),
            Variant::Thm3 { eps, .. } => (2.0 * (p as f64).powf(1.0 + eps) / b).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Variant::Thm3a { k, eps } => k >= 1 && eps > 0.0 && eps < 1.0,
            Variant::Thm3 { eps, alpha, kappa, b0 } => eps > 0.0 && alpha > 0.0 && kappa > 0.0 && b0 > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid quasimode variant {self:?}")))
        }
    }
}

/// One center of the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Center {
    /// 1-based position in the sequence before thinning.
    pub n: usize,
    pub x: Point,
    pub p: u32,
    pub radius: f64,
    pub b: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasimodeParams {
    pub variant: Variant,
    pub centers: Vec<Center>,
    pub cutoff: &'static str,
    /// Centers came from an identity `V² ≡ 2kB` rather than isolated roots.
    pub degenerate: bool,
}

impl QuasimodeParams {
    /// Parameters at explicitly given centers, numbered `1..`.
    pub fn at_points<F: PlanarField + ?Sized>(field: &F, variant: Variant, points: &[Point]) -> Result<Self> {
        variant.validate()?;
        let centers = points
            .iter()
            .enumerate()
            .map(|(i, &x)| make_center(field, &variant, i + 1, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { variant, centers, cutoff: CUTOFF_PROFILE, degenerate: false })
    }

    /// Centers found on a ray by [`choose_centers`], thinned to disjoint
    /// supports.
    pub fn on_ray<F: PlanarField + ?Sized>(field: &F, direction: Point, variant: Variant, count: usize) -> Result<Self> {
        let chosen = choose_centers(field, direction, variant, count, &CenterSearch::default())?;
        let mut params = Self::at_points(field, variant, &chosen.points)?;
        params.degenerate = chosen.degenerate;
        params.centers = thin_centers(&params.centers);
        Ok(params)
    }
}

fn make_center<F: PlanarField + ?Sized>(field: &F, variant: &Variant, n: usize, x: Point) -> Result<Center> {
    let b = field.magnetic(x);
    let v = field.potential(x);
    if !(b > 0.0) || !v.is_finite() {
        return Err(Error::Precondition(format!("center {x:?} needs B > 0 and finite V, got B={b}, V={v}")));
    }
    let p = variant.level(n);
    Ok(Center { n, x, p, radius: variant.cutoff_radius(b, p), b, v })
}

/// Greedy thinning: keep a center when its patch does not meet the last
/// kept one, `|x_{n+1} - x_n| > 2(r_n + r_{n+1})`.
pub fn thin_centers(centers: &[Center]) -> Vec<Center> {
    let mut kept: Vec<Center> = Vec::new();
    for c in centers {
        let disjoint = kept.iter().all(|k| dist(k.x, c.x) > 2.0 * (k.radius + c.radius));
        if disjoint {
            kept.push(*c);
        }
    }
    kept
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Smooth cutoff: 1 on `ρ ≤ 1`, `exp(1 - 1/(1 - (ρ-1)²))` on `(1, 2)`, 0 beyond.
pub fn cutoff(rho: f64) -> f64 {
    cutoff_with_derivative(rho).0
}

pub fn cutoff_with_derivative(rho: f64) -> (f64, f64) {
    if rho <= 1.0 {
        (1.0, 0.0)
    } else if rho >= 2.0 {
        (0.0, 0.0)
    } else {
        let u = rho - 1.0;
        let q = 1.0 - u * u;
        let c = (1.0 - 1.0 / q).exp();
        (c, -c * 2.0 * u / (q * q))
    }
}

/// `(iB z̄)^p G` and its lower partner, centered at `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderState {
    pub b: f64,
    pub p: u32,
    pub v: f64,
    pub center: Point,
    /// `p = 0`: only the upper component survives (a zero mode of `d`).
    pub zero_mode: bool,
    ln_scale: f64,
}

/// Closed-form ladder state with field `b`, index `p` and lower weight `v`.
pub fn ladder_state(b: f64, p: u32, v: f64, center: Point) -> Result<LadderState> {
    if !(b > 0.0) {
        return Err(Error::Precondition(format!("ladder state needs B > 0, got {b}")));
    }
    Ok(LadderState { b, p, v, center, zero_mode: p == 0, ln_scale: 0.0 })
}

impl LadderState {
    /// Same state divided by a constant so that the peak of the upper
    /// component is O(1); used for large `p`.
    fn rescaled(mut self) -> Self {
        if self.p > 0 {
            let p = self.p as f64;
            self.ln_scale = 0.5 * p * (2.0 * p * self.b).ln() - 0.5 * p;
        }
        self
    }

    /// `(iB z̄)^q G` at offset `y`, divided by the scale.
    fn power(&self, q: u32, y: Point) -> C64 {
        let r2 = y[0] * y[0] + y[1] * y[1];
        let gauss = -0.25 * self.b * r2 - self.ln_scale;
        if q == 0 {
            return C64::new(gauss.exp(), 0.0);
        }
        if r2 == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let rho = r2.sqrt();
        let theta = y[1].atan2(y[0]);
        let q_f = q as f64;
        let mag = (q_f * (self.b * rho).ln() + gauss).exp();
        // (i z̄)^q = i^q ρ^q e^{-iqθ}
        let phase = q_f * (0.5 * PI - theta);
        C64::from_polar(mag, phase)
    }

    /// Both components at offset `y = x - center`.
    pub fn at_offset(&self, y: Point) -> [C64; 2] {
        let upper = self.power(self.p, y);
        let lower = if self.zero_mode { C64::new(0.0, 0.0) } else { -self.v * self.power(self.p - 1, y) };
        [upper, lower]
    }

    pub fn eval(&self, x: Point) -> [C64; 2] {
        self.at_offset([x[0] - self.center[0], x[1] - self.center[1]])
    }

    /// `(d_n*)^{q} G` at offset `y` (equal to `(iB z̄)^q G`).
    pub fn ladder_power(&self, q: u32, y: Point) -> C64 {
        self.power(q, y)
    }

    /// Closed form `‖φ‖² = 2^{p+1} π B^{p-1} p! (1 + V²/(2Bp))`, as a log.
    pub fn ln_norm_sq(&self) -> f64 {
        let p = self.p;
        if p == 0 {
            return (2.0 * PI / self.b).ln();
        }
        let base = (p as f64 + 1.0) * 2f64.ln() + PI.ln() + (p as f64 - 1.0) * self.b.ln() + ln_factorial(p);
        base + (1.0 + self.v * self.v / (2.0 * self.b * p as f64)).ln()
    }

    /// `ln(2^{p+1} π B^{p-1} p!)`, the lower bound on `‖φ‖²`.
    pub fn ln_lower_bound(&self) -> f64 {
        let p = self.p as f64;
        (p + 1.0) * 2f64.ln() + PI.ln() + (p - 1.0) * self.b.ln() + ln_factorial(self.p)
    }
}

/// Search settings for [`choose_centers`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterSearch {
    pub limit: f64,
    pub scan_points: usize,
    /// First radius and ratio of the geometric spacing used when
    /// `V² - 2kB` vanishes identically.
    pub degenerate_start: f64,
    pub degenerate_ratio: f64,
}

impl Default for CenterSearch {
    fn default() -> Self {
        Self { limit: 1e4, scan_points: 20_000, degenerate_start: 10.0, degenerate_ratio: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChosenCenters {
    pub points: Vec<Point>,
    pub degenerate: bool,
}

/// Points on the ray `ρ ω̂` where the potential meets a Landau level,
/// `V(x)² = 2 p B(x)` with `p = n` (thm3) or `p = k` (thm3a).
pub fn choose_centers<F: PlanarField + ?Sized>(
    field: &F,
    direction: Point,
    variant: Variant,
    count: usize,
    search: &CenterSearch,
) -> Result<ChosenCenters> {
    variant.validate()?;
    let len = direction[0].hypot(direction[1]);
    if !(len > 0.0) {
        return Err(Error::Precondition("ray direction must be nonzero".into()));
    }
    let dir = [direction[0] / len, direction[1] / len];
    let at = |rho: f64| [rho * dir[0], rho * dir[1]];
    let mismatch = |rho: f64, p: u32| {
        let x = at(rho);
        let v = field.potential(x);
        let b = field.magnetic(x);
        (v * v - 2.0 * p as f64 * b, v * v + 2.0 * p as f64 * b)
    };
    // Geometric scan from 1e-6 to the limit.
    let lo = 1e-6f64;
    let ratio = (search.limit / lo).ln() / (search.scan_points - 1) as f64;
    let grid: Vec<f64> = (0..search.scan_points).map(|i| lo * (ratio * i as f64).exp()).collect();

    let roots_of = |p: u32| -> Vec<f64> {
        let values: Vec<f64> = grid.iter().map(|&r| mismatch(r, p).0).collect();
        let mut roots = Vec::new();
        for i in 1..grid.len() {
            let (f0, f1) = (values[i - 1], values[i]);
            if f1 == 0.0 {
                roots.push(grid[i]);
            } else if f0 != 0.0 && f0.signum() != f1.signum() {
                roots.push(bisect(|r| mismatch(r, p).0, grid[i - 1], grid[i]));
            }
        }
        roots
    };

    match variant {
        Variant::Thm3a { k, .. } => {
            let identically_zero = grid.iter().all(|&r| {
                let (f, scale) = mismatch(r, k);
                f.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)
            });
            if identically_zero {
                let points = (0..count)
                    .map(|i| at(search.degenerate_start * search.degenerate_ratio.powi(i as i32)))
                    .collect();
                return Ok(ChosenCenters { points, degenerate: true });
            }
            let roots = roots_of(k);
            if roots.len() < count {
                return Err(Error::NoCrossing { n: roots.len() + 1, limit: search.limit });
            }
            Ok(ChosenCenters { points: roots[..count].iter().map(|&r| at(r)).collect(), degenerate: false })
        }
        Variant::Thm3 { .. } => {
            let results: Vec<Result<f64>> = (1..=count)
                .into_par_iter()
                .map(|n| {
                    roots_of(n as u32)
                        .first()
                        .copied()
                        .ok_or(Error::NoCrossing { n, limit: search.limit })
                })
                .collect();
            let radii = results.into_iter().collect::<Result<Vec<_>>>()?;
            Ok(ChosenCenters { points: radii.iter().map(|&r| at(r)).collect(), degenerate: false })
        }
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
        if (b - a) <= 1e-12 * b.abs() {
            break;
        }
    }
    0.5 * (a + b)
}

/// `∫₀¹ B(x_n + s y) s ds`, so that `Ã_n(x) = I(y) (-y₂, y₁)`.
fn tilde_coefficient<F: PlanarField + ?Sized>(field: &F, gl: &GaussLegendre, xn: Point, y: Point) -> f64 {
    gl.integrate(|s| s * field.magnetic([xn[0] + s * y[0], xn[1] + s * y[1]]), 0.0, 1.0)
}

/// `Ã_n(x) = ∫₀¹ B(x_n + s(x - x_n)) s ds ∧ (x - x_n)`.
pub fn tilde_potential<F: PlanarField + ?Sized>(field: &F, xn: Point, x: Point) -> Point {
    let gl = GaussLegendre::new(SEGMENT_ORDER);
    let y = [x[0] - xn[0], x[1] - xn[1]];
    let c = tilde_coefficient(field, &gl, xn, y);
    [-c * y[1], c * y[0]]
}

/// `g_n(x)`, the line integral of `A - Ã_n` along the segment from `x_n`
/// to `x`. On that segment `Ã_n` is orthogonal to the path, so only `A`
/// contributes.
pub fn gauge_function<F: PlanarField + ?Sized>(field: &F, xn: Point, x: Point) -> f64 {
    let y = [x[0] - xn[0], x[1] - xn[1]];
    let integrand = |t: f64| {
        let a = field.vector_potential([xn[0] + t * y[0], xn[1] + t * y[1]]);
        a[0] * y[0] + a[1] * y[1]
    };
    adaptive_simpson(integrand, 0.0, 1.0, 1e-10, 1e-14)
}

/// `g_n(x) - A(x_n)·(x - x_n)` by fixed Gauss–Legendre, the phase used by
/// the finite-difference residual.
fn reduced_gauge<F: PlanarField + ?Sized>(field: &F, gl: &GaussLegendre, xn: Point, a_n: Point, y: Point) -> f64 {
    gl.integrate(
        |t| {
            let a = field.vector_potential([xn[0] + t * y[0], xn[1] + t * y[1]]);
            (a[0] - a_n[0]) * y[0] + (a[1] - a_n[1]) * y[1]
        },
        0.0,
        1.0,
    )
}

/// `g_n(x)` along the L-shaped path `x_n → (x₁, x_{n,2}) → x`, integrating
/// `A - Ã_n` with both pieces.
pub fn gauge_function_l_path<F: PlanarField + ?Sized>(field: &F, xn: Point, x: Point) -> f64 {
    let corner = [x[0], xn[1]];
    let diff = |p: Point| {
        let a = field.vector_potential(p);
        let at = tilde_potential(field, xn, p);
        [a[0] - at[0], a[1] - at[1]]
    };
    let leg1 = adaptive_simpson(|t| diff([xn[0] + t * (corner[0] - xn[0]), xn[1]])[0] * (corner[0] - xn[0]), 0.0, 1.0, 1e-10, 1e-14);
    let leg2 = adaptive_simpson(|t| diff([x[0], corner[1] + t * (x[1] - corner[1])])[1] * (x[1] - corner[1]), 0.0, 1.0, 1e-10, 1e-14);
    leg1 + leg2
}

/// Compares straight and L-shaped paths at 20 deterministic points in the
/// disc of radius `radius` about `x_n`. Returns the largest relative gap.
pub fn check_gauge<F: PlanarField + ?Sized>(field: &F, xn: Point, radius: f64) -> Result<f64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut worst = 0.0f64;
    for i in 0..GAUGE_SAMPLES {
        let rho = radius * ((i as f64 + 0.5) / GAUGE_SAMPLES as f64).sqrt();
        let theta = golden * i as f64;
        let x = [xn[0] + rho * theta.cos(), xn[1] + rho * theta.sin()];
        let straight = gauge_function(field, xn, x);
        let l_path = gauge_function_l_path(field, xn, x);
        let gap = (straight - l_path).abs() / (1.0 + straight.abs());
        if !(gap < GAUGE_TOL) {
            return Err(Error::Gauge { straight, l_path });
        }
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Polar patch of radius `2r` about a center: Gauss–Legendre in `ρ` split
/// at `r`, trapezoid in angle.
#[derive(Debug, Clone)]
struct PolarPatch {
    rho: Vec<f64>,
    /// `w_ρ ρ · 2π/n_θ`.
    weight: Vec<f64>,
    angles: Vec<(f64, f64)>,
}

impl PolarPatch {
    fn new(r: f64, b: f64, panels_scale: f64) -> Self {
        let gl = GaussLegendre::new(RADIAL_ORDER);
        // Panels no wider than one Gaussian length 1/√B.
        let panels = ((r * b.sqrt() * panels_scale).ceil() as usize).clamp(4, MAX_PANELS);
        let (mut rho, mut w) = gl.composite_points(0.0, r, panels);
        let (r2, w2) = gl.composite_points(r, 2.0 * r, panels);
        rho.extend(r2);
        w.extend(w2);
        let dtheta = 2.0 * PI / ANGULAR_NODES as f64;
        let weight = rho.iter().zip(&w).map(|(r, w)| r * w * dtheta).collect();
        let angles = (0..ANGULAR_NODES).map(|k| (k as f64 * dtheta).sin_cos()).map(|(s, c)| (c, s)).collect();
        Self { rho, weight, angles }
    }

    /// Sum over the patch of `f(ρ, (cos θ, sin θ))` weighted by area.
    fn integrate<T, F>(&self, f: F) -> T
    where
        T: Send + std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
        F: Fn(f64, f64, f64) -> T + Sync,
    {
        (0..self.rho.len())
            .into_par_iter()
            .map(|i| {
                let rho = self.rho[i];
                let inner: T = self.angles.iter().map(|&(c, s)| f(rho, c, s)).sum();
                inner * self.weight[i]
            })
            .sum()
    }
}

/// Squared norms accumulated over the patch.
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    psi: f64,
    terms: [f64; 4],
    coherent: f64,
    fd: f64,
    fd_gauge: f64,
}

impl std::iter::Sum for Sums {
    fn sum<It: Iterator<Item = Sums>>(iter: It) -> Sums {
        iter.fold(Sums::default(), |a, b| Sums {
            psi: a.psi + b.psi,
            terms: [a.terms[0] + b.terms[0], a.terms[1] + b.terms[1], a.terms[2] + b.terms[2], a.terms[3] + b.terms[3]],
            coherent: a.coherent + b.coherent,
            fd: a.fd + b.fd,
            fd_gauge: a.fd_gauge + b.fd_gauge,
        })
    }
}

impl std::ops::Mul<f64> for Sums {
    type Output = Sums;
    fn mul(self, w: f64) -> Sums {
        Sums {
            psi: self.psi * w,
            terms: self.terms.map(|t| t * w),
            coherent: self.coherent * w,
            fd: self.fd * w,
            fd_gauge: self.fd_gauge * w,
        }
    }
}

fn norm2(v: [C64; 2]) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// Measured residual of one member of the sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quasimode {
    pub center: Center,
    pub cutoff: &'static str,
    /// `‖T_i‖/‖ψ_n‖` for the Landau, cutoff, gauge and potential terms.
    pub terms: [f64; 4],
    /// `(T₁ + T₂ + T₃ + T₄)/‖ψ_n‖`, the triangle-inequality residual.
    pub ratio_sum: f64,
    /// `‖T₁ + T₂ + T₃ + T₄‖/‖ψ_n‖` with the term vectors added pointwise.
    pub ratio_coherent: f64,
    /// `‖(D_A + V)ψ_n‖/‖ψ_n‖` by central differences on `ψ_n` itself.
    pub ratio_fd: f64,
    /// `‖(D_{Ã_n} + V)χ_nφ̂_n‖/‖ψ_n‖` by central differences, without the phase.
    pub ratio_fd_gauge: f64,
    pub ln_norm_psi_sq: f64,
    pub ln_norm_phi_sq: f64,
    /// `‖ψ‖² / (¼‖φ‖²(1 - tail))`; at least 1 when the lower bound holds.
    pub norm_lb_margin: f64,
    /// Largest straight-vs-L-path gap of `g_n` on the patch.
    pub gauge_gap: f64,
    pub fd_step: f64,
    pub diagnostics: Diagnostics,
}

impl Quasimode {
    pub fn norm_psi(&self) -> f64 {
        (0.5 * self.ln_norm_psi_sq).exp()
    }

    pub fn norm_phi(&self) -> f64 {
        (0.5 * self.ln_norm_phi_sq).exp()
    }
}

/// Hypothesis quantities evaluated at the center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `(V_n² - 2p_nB_n)/V_n`.
    pub level_mismatch: f64,
    /// thm3a: `|∇B|/B^{1-ε}`; thm3: `|∇B|/B · (V²/2B)^{1+ε}`.
    pub grad_b: f64,
    /// thm3a: `|∇V|/|V|^{1-ε}`; thm3: `|∇V|/|V| · (V²/2B)^{1+ε}`.
    pub grad_v: f64,
    /// thm3 only: `B_0 ≤ B_n ≤ α (V²/2B)^κ`.
    pub field_bounds_hold: Option<bool>,
}

fn diagnostics<F: PlanarField + ?Sized>(field: &F, variant: &Variant, c: &Center) -> Diagnostics {
    let gb = field.magnetic_gradient(c.x);
    let gv = field.potential_gradient(c.x);
    let gb = gb[0].hypot(gb[1]);
    let gv = gv[0].hypot(gv[1]);
    let level_mismatch = (c.v * c.v - 2.0 * c.p as f64 * c.b) / c.v;
    match *variant {
        Variant::Thm3a { eps, .. } => Diagnostics {
            level_mismatch,
            grad_b: gb / c.b.powf(1.0 - eps),
            grad_v: gv / c.v.abs().powf(1.0 - eps),
            field_bounds_hold: None,
        },
        Variant::Thm3 { eps, alpha, kappa, b0 } => {
            let q = c.v * c.v / (2.0 * c.b);
            Diagnostics {
                level_mismatch,
                grad_b: gb / c.b * q.powf(1.0 + eps),
                grad_v: gv / c.v.abs() * q.powf(1.0 + eps),
                field_bounds_hold: Some(b0 <= c.b && c.b <= alpha * q.powf(kappa)),
            }
        }
    }
}

/// Builds `ψ_n` for the `index`-th center of `params` and measures its
/// residual four ways: each term separately, their pointwise sum, and two
/// finite-difference evaluations of the full operator.
pub fn residual_terms<F: PlanarField + ?Sized>(field: &F, params: &QuasimodeParams, index: usize) -> Result<Quasimode> {
    let center = *params
        .centers
        .get(index)
        .ok_or_else(|| Error::Precondition(format!("center index {index} out of range")))?;
    if center.p == 0 {
        return Err(Error::Precondition("quasimodes need ladder index p ≥ 1".into()));
    }
    let xn = center.x;
    let (b, v, p, r) = (center.b, center.v, center.p, center.radius);
    let state = ladder_state(b, p, v, [0.0, 0.0])?.rescaled();
    let gauge_gap = check_gauge(field, xn, 2.0 * r)?;

    let a_n = field.vector_potential(xn);
    if !(a_n[0].is_finite() && a_n[1].is_finite()) {
        return Err(Error::Precondition(format!("vector potential undefined at {xn:?}")));
    }
    let gl = GaussLegendre::new(SEGMENT_ORDER);
    let step = 1e-3 / b.sqrt();
    let landau = 2.0 * p as f64 * b - v * v;

    // χ φ̂ at offset y.
    let cut_state = |y: Point| -> [C64; 2] {
        let c = cutoff(y[0].hypot(y[1]) / r);
        if c == 0.0 {
            return [C64::new(0.0, 0.0); 2];
        }
        let s = state.at_offset(y);
        [s[0] * c, s[1] * c]
    };
    // e^{i(g_n - L)} χ φ̂ with L = A(x_n)·y.
    let phased = |y: Point| -> [C64; 2] {
        let s = cut_state(y);
        if s[0] == C64::new(0.0, 0.0) && s[1] == C64::new(0.0, 0.0) {
            return s;
        }
        let ph = C64::from_polar(1.0, reduced_gauge(field, &gl, xn, a_n, y));
        [s[0] * ph, s[1] * ph]
    };
    // (upper, lower) = (d* u₂ + V u₁, d u₁ + V u₂) with potential `a`.
    let dirac_fd = |u: &dyn Fn(Point) -> [C64; 2], y: Point, a: Point, vv: f64| -> [C64; 2] {
        let c0 = u(y);
        let xp = u([y[0] + step, y[1]]);
        let xm = u([y[0] - step, y[1]]);
        let yp = u([y[0], y[1] + step]);
        let ym = u([y[0], y[1] - step]);
        let d1 = [(xp[0] - xm[0]) / (2.0 * step), (xp[1] - xm[1]) / (2.0 * step)];
        let d2 = [(yp[0] - ym[0]) / (2.0 * step), (yp[1] - ym[1]) / (2.0 * step)];
        let upper = -I * d1[1] - d2[1] - C64::new(a[0], -a[1]) * c0[1] + vv * c0[0];
        let lower = -I * d1[0] + d2[0] - C64::new(a[0], a[1]) * c0[0] + vv * c0[1];
        [upper, lower]
    };

    let sample = |rho: f64, cos: f64, sin: f64| -> Sums {
        let y = [rho * cos, rho * sin];
        let x = [xn[0] + y[0], xn[1] + y[1]];
        let (c, dc) = cutoff_with_derivative(rho / r);
        if c == 0.0 && dc == 0.0 {
            return Sums::default();
        }
        let phi = state.at_offset(y);
        let psi = [phi[0] * c, phi[1] * c];
        let lower_power = if p >= 1 { state.ladder_power(p - 1, y) } else { C64::new(0.0, 0.0) };

        let t1 = [C64::new(0.0, 0.0), c * landau * lower_power];
        let (gx, gy) = (dc / r * cos, dc / r * sin);
        let t2 = [-I * C64::new(gx, -gy) * phi[1], -I * C64::new(gx, gy) * phi[0]];
        let coef = 0.5 * b - tilde_coefficient(field, &gl, xn, y);
        let (a1, a2) = (-coef * y[1], coef * y[0]);
        let t3 = [C64::new(a1, -a2) * psi[1], C64::new(a1, a2) * psi[0]];
        let dv = field.potential(x) - v;
        let t4 = [psi[0] * dv, psi[1] * dv];
        let total = [t1[0] + t2[0] + t3[0] + t4[0], t1[1] + t2[1] + t3[1] + t4[1]];

        let vx = field.potential(x);
        let a = field.vector_potential(x);
        let fd = dirac_fd(&phased, y, [a[0] - a_n[0], a[1] - a_n[1]], vx);
        let ic = tilde_coefficient(field, &gl, xn, y);
        let fd_gauge = dirac_fd(&cut_state, y, [-ic * y[1], ic * y[0]], vx);

        Sums {
            psi: norm2(psi),
            terms: [norm2(t1), norm2(t2), norm2(t3), norm2(t4)],
            coherent: norm2(total),
            fd: norm2(fd),
            fd_gauge: norm2(fd_gauge),
        }
    };

    let patch = PolarPatch::new(r, b, 1.0);
    let sums: Sums = patch.integrate(sample);
    let psi_sq = sums.psi;
    // Halving the radial resolution must leave the norm unchanged.
    let coarse = PolarPatch::new(r, b, 0.5).integrate(|rho, c, s| {
        let y = [rho * c, rho * s];
        let k = cutoff(rho / r);
        k * k * norm2(state.at_offset(y))
    });
    if !(psi_sq > 0.0) || ((coarse - psi_sq) / psi_sq).abs() > 1e-6 {
        let panels = ((2.0 * r * b.sqrt()).ceil() as usize).min(MAX_PANELS);
        return Err(Error::Resolution(format!(
            "patch norm unresolved at center {xn:?} (coarse {coarse:.6e}, fine {psi_sq:.6e}); use at least {panels} radial panels"
        )));
    }
    let norm_psi = psi_sq.sqrt();
    let terms = sums.terms.map(|t| t.sqrt() / norm_psi);
    let ln_norm_psi_sq = psi_sq.ln() + 2.0 * state.ln_scale;
    let ln_norm_phi_sq = state.ln_norm_sq();
    let tail = poisson_tail(p, 0.5 * b * r * r);
    let ln_bound = ln_norm_phi_sq + (0.25 * (1.0 - tail)).ln();
    Ok(Quasimode {
        center,
        cutoff: params.cutoff,
        terms,
        ratio_sum: terms.iter().sum(),
        ratio_coherent: sums.coherent.sqrt() / norm_psi,
        ratio_fd: sums.fd.sqrt() / norm_psi,
        ratio_fd_gauge: sums.fd_gauge.sqrt() / norm_psi,
        ln_norm_psi_sq,
        ln_norm_phi_sq,
        norm_lb_margin: (ln_norm_psi_sq - ln_bound).exp(),
        gauge_gap,
        fd_step: step,
        diagnostics: diagnostics(field, &params.variant, &center),
    })
}

/// [`residual_terms`] for every center, in order.
pub fn residual_sequence<F: PlanarField + ?Sized>(field: &F, params: &QuasimodeParams) -> Result<Vec<Quasimode>> {
    (0..params.centers.len())
        .into_par_iter()
        .map(|i| residual_terms(field, params, i))
        .collect()
}

/// Quadrature check of the norm bounds for `φ` and the cut-off `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormBounds {
    pub phi_sq: f64,
    /// `2^{p+1} π B^{p-1} p!`.
    pub phi_lower: f64,
    /// `2^{p+3} π B^{p-1} p!`.
    pub phi_upper: f64,
    /// Closed form `2^{p+1} π B^{p-1} p! (1 + V²/(2Bp))`.
    pub phi_closed: f64,
    pub psi_sq: f64,
    /// `¼ ‖φ‖² (1 - tail)`.
    pub psi_lower: f64,
    /// `(1/p!) ∫_{B r²/2}^∞ s^p e^{-s} ds`.
    pub tail: f64,
    pub phi_margin: f64,
    pub psi_margin: f64,
    pub pass: bool,
}

/// Radial quadrature of `‖φ‖²` and `‖χ(·/r) φ‖²`, compared with the
/// printed lower bounds. Logs are used throughout so large `p` is safe.
pub fn norm_bounds_check(b: f64, v: f64, p: u32, r: f64) -> Result<NormBounds> {
    if p == 0 {
        return Err(Error::Precondition("norm bounds need p ≥ 1".into()));
    }
    let state = ladder_state(b, p, v, [0.0, 0.0])?;
    let pf = p as f64;
    // |φ|² = (B ρ)^{2p} e^{-Bρ²/2} + V² (Bρ)^{2p-2} e^{-Bρ²/2}; the upper
    // part peaks at ρ² = 2p/B.
    let ln_peak = pf * (2.0 * pf * b).ln() - pf;
    let density = |rho: f64| -> f64 {
        if rho == 0.0 {
            return if p == 1 { v * v * (-ln_peak).exp() } else { 0.0 };
        }
        let lb = (b * rho).ln();
        let e = -0.5 * b * rho * rho - ln_peak;
        (2.0 * pf * lb + e).exp() + v * v * (2.0 * (pf - 1.0) * lb + e).exp()
    };
    let width = 1.0 / b.sqrt();
    let rho_max = (2.0 * (pf + 1.0) / b).sqrt() + 40.0 * width;
    let gl = GaussLegendre::new(32);
    let panels = ((rho_max / width).ceil() as usize).clamp(16, 4096);
    let phi_scaled = 2.0 * PI * gl.composite(|rho| density(rho) * rho, 0.0, rho_max, panels);
    let cut_panels = ((2.0 * r / width).ceil() as usize).clamp(16, 4096);
    let psi_scaled = 2.0 * PI
        * (gl.composite(|rho| density(rho) * rho, 0.0, r.min(rho_max), cut_panels)
            + if r < rho_max {
                gl.composite(|rho| cutoff(rho / r).powi(2) * density(rho) * rho, r, 2.0 * r, cut_panels)
            } else {
                0.0
            });
    let ln_phi = phi_scaled.ln() + ln_peak;
    let ln_psi = psi_scaled.ln() + ln_peak;
    let ln_lower = state.ln_lower_bound();
    let tail = poisson_tail(p, 0.5 * b * r * r);
    let ln_psi_lower = ln_phi + (0.25 * (1.0 - tail)).ln();
    let phi_margin = (ln_phi - ln_lower).exp();
    let psi_margin = (ln_psi - ln_psi_lower).exp();
    Ok(NormBounds {
        phi_sq: ln_phi.exp(),
        phi_lower: ln_lower.exp(),
        phi_upper: (ln_lower + 4f64.ln()).exp(),
        phi_closed: state.ln_norm_sq().exp(),
        psi_sq: ln_psi.exp(),
        psi_lower: ln_psi_lower.exp(),
        tail,
        phi_margin,
        psi_margin,
        pass: (1.0..=4.0).contains(&phi_margin) && psi_margin >= 1.0 && ln_psi <= ln_phi + 1e-10,
    })
}
