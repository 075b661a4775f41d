//! Radially symmetric electromagnetic field families and the derived
//! quantities used by every probe: the rotational-gauge vector potential
//! modulus `A(r) = (1/r) ∫₀ʳ B(u) u du`, the flux function `φ(r) = ∫₀ʳ A`
//! (so that `Δφ = B`), and the lift to a planar field.
//!
//! Field documents are JSON objects of the form
//! `{"kind": ..., "V0": .., "B0": .., "t": .., "s": .., "E": .., "table": {..}}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, GaussLegendre};

const QUAD_REL_TOL: f64 = 1e-10;
const QUAD_ABS_FLOOR: f64 = 1e-14;

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::SpecTable(format!(
                "mesh has {} points but values have {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::SpecTable("mesh needs at least 2 points".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::SpecTable("mesh must be strictly increasing".into()));
        }
        if xs.iter().chain(ys).any(|v| !v.is_finite()) {
            return Err(Error::SpecTable("non-finite table entry".into()));
        }
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = secants[0];
            slopes[1] = secants[0];
        } else {
            for i in 1..n - 1 {
                let (d0, d1) = (secants[i - 1], secants[i]);
                if d0 * d1 > 0.0 {
                    let h0 = xs[i] - xs[i - 1];
                    let h1 = xs[i + 1] - xs[i];
                    let w0 = 2.0 * h1 + h0;
                    let w1 = h1 + 2.0 * h0;
                    slopes[i] = (w0 + w1) / (w0 / d0 + w1 / d1);
                }
            }
            slopes[0] = end_slope(xs[1] - xs[0], xs[2] - xs[1], secants[0], secants[1]);
            slopes[n - 1] = end_slope(
                xs[n - 1] - xs[n - 2],
                xs[n - 2] - xs[n - 3],
                secants[n - 2],
                secants[n - 3],
            );
        }
        Ok(MonotoneCubic { xs: xs.to_vec(), ys: ys.to_vec(), slopes })
    }

    /// Cubic Hermite interpolant with prescribed slopes.
    pub fn hermite(xs: &[f64], ys: &[f64], slopes: &[f64]) -> Result<Self> {
        let mut out = Self::new(xs, ys)?;
        if slopes.len() != xs.len() {
            return Err(Error::SpecTable("slope count does not match the mesh".into()));
        }
        out.slopes = slopes.to_vec();
        Ok(out)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn locate(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Value and derivative at `x` (caller guarantees `x` in the domain).
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let deriv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (value, deriv)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }
}

// Three-point end slope, limited so the end interval stays monotone.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Sampled `v(r)` and `B(r)` on a shared monotone mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTable {
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub b: Vec<f64>,
    v_interp: MonotoneCubic,
    b_interp: MonotoneCubic,
}

impl RadialTable {
    pub fn new(r: Vec<f64>, v: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let v_interp = MonotoneCubic::new(&r, &v)?;
        let b_interp = MonotoneCubic::new(&r, &b)?;
        if r[0] != 0.0 {
            return Err(Error::SpecTable("mesh must start at r = 0".into()));
        }
        if let Some(bad) = b.iter().find(|&&x| x <= 0.0) {
            return Err(Error::SpecTable(format!("B must stay positive on the mesh, found {bad}")));
        }
        Ok(RadialTable { r, v, b, v_interp, b_interp })
    }

    pub fn end(&self) -> f64 {
        self.v_interp.domain().1
    }
}

/// The supported radial field families.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldProfile {
    /// `V = V0 r^t`, `B = B0 r^s`.
    PowerLaw { v0: f64, b0: f64, t: f64, s: f64 },
    /// `V = V0 (1+r²)^{t/2}`, `B = B0 (1+r²)^{s/2}`: same growth at infinity
    /// as the power law, smooth and bounded below at the origin.
    Regularized { v0: f64, b0: f64, t: f64, s: f64 },
    /// Interpolated samples on `[0, R_max]`.
    Tabulated(RadialTable),
}

/// A validated radial field together with the energy shift `E`
/// (the operator sees `v(r) = V(r) - E`).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFieldSpec {
    pub profile: FieldProfile,
    pub energy_shift: f64,
}

fn check_amplitudes(v0: f64, b0: f64, t: f64, s: f64) -> Result<()> {
    if !(v0 >= 0.0) || !v0.is_finite() {
        return Err(Error::SpecV0Nonpositive(v0));
    }
    if !(b0 > 0.0) || !b0.is_finite() {
        return Err(Error::SpecB0Nonpositive(b0));
    }
    for (name, value) in [("t", t), ("s", s)] {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::SpecExponent { name, value });
        }
    }
    Ok(())
}

impl RadialFieldSpec {
    pub fn power_law(v0: f64, b0: f64, t: f64, s: f64) -> Result<Self> {
        check_amplitudes(v0, b0, t, s)?;
        Ok(RadialFieldSpec { profile: FieldProfile::PowerLaw { v0, b0, t, s }, energy_shift: 0.0 })
    }

    pub fn regularized(v0: f64, b0: f64, t: f64, s: f64) -> Result<Self> {
        check_amplitudes(v0, b0, t, s)?;
        Ok(RadialFieldSpec { profile: FieldProfile::Regularized { v0, b0, t, s }, energy_shift: 0.0 })
    }

    pub fn tabulated(table: RadialTable) -> Self {
        RadialFieldSpec { profile: FieldProfile::Tabulated(table), energy_shift: 0.0 }
    }

    /// Pure magnetic field `B0 r^s` with no electric potential.
    pub fn magnetic_only(b0: f64, s: f64) -> Result<Self> {
        Self::power_law(0.0, b0, 0.0, s)
    }

    pub fn with_energy_shift(mut self, e: f64) -> Self {
        self.energy_shift = e;
        self
    }

    /// Largest radius at which the field is defined.
    pub fn max_radius(&self) -> f64 {
        match &self.profile {
            FieldProfile::Tabulated(t) => t.end(),
            _ => f64::INFINITY,
        }
    }

    /// True when `v(r) = V(r) - E` vanishes identically.
    pub fn is_field_only(&self) -> bool {
        let bare = match &self.profile {
            FieldProfile::PowerLaw { v0, t, .. } => {
                if *v0 == 0.0 {
                    Some(0.0)
                } else if *t == 0.0 {
                    Some(*v0)
                } else {
                    None
                }
            }
            FieldProfile::Regularized { v0, t, .. } => {
                if *v0 == 0.0 {
                    Some(0.0)
                } else if *t == 0.0 {
                    Some(*v0)
                } else {
                    None
                }
            }
            FieldProfile::Tabulated(table) => {
                let first = table.v[0];
                table.v.iter().all(|&x| x == first).then_some(first)
            }
        };
        bare.is_some_and(|c| c == self.energy_shift)
    }

    /// Power-law parameters `(V0, B0, t, s)` when the family carries them.
    pub fn power_parameters(&self) -> Option<(f64, f64, f64, f64)> {
        match self.profile {
            FieldProfile::PowerLaw { v0, b0, t, s } | FieldProfile::Regularized { v0, b0, t, s } => {
                Some((v0, b0, t, s))
            }
            FieldProfile::Tabulated(_) => None,
        }
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::NegativeRadius(r));
        }
        let end = self.max_radius();
        if r > end {
            return Err(Error::Extrapolation { r, end });
        }
        Ok(())
    }

    /// Magnetic field `B(r)`.
    pub fn b(&self, r: f64) -> f64 {
        match &self.profile {
            FieldProfile::PowerLaw { b0, s, .. } => b0 * r.powf(*s),
            FieldProfile::Regularized { b0, s, .. } => b0 * (1.0 + r * r).powf(0.5 * s),
            FieldProfile::Tabulated(t) => t.b_interp.eval(r),
        }
    }

    /// `dB/dr`.
    pub fn db(&self, r: f64) -> f64 {
        match &self.profile {
            FieldProfile::PowerLaw { b0, s, .. } => {
                if *s == 0.0 {
                    0.0
                } else {
                    b0 * s * r.powf(s - 1.0)
                }
            }
            FieldProfile::Regularized { b0, s, .. } => b0 * s * r * (1.0 + r * r).powf(0.5 * s - 1.0),
            FieldProfile::Tabulated(t) => t.b_interp.eval_with_derivative(r).1,
        }
    }

    /// Shifted potential `v(r) = V(r) - E`.
    pub fn v(&self, r: f64) -> f64 {
        let bare = match &self.profile {
            FieldProfile::PowerLaw { v0, t, .. } => v0 * r.powf(*t),
            FieldProfile::Regularized { v0, t, .. } => v0 * (1.0 + r * r).powf(0.5 * t),
            FieldProfile::Tabulated(t) => t.v_interp.eval(r),
        };
        bare - self.energy_shift
    }

    /// `dv/dr`.
    pub fn dv(&self, r: f64) -> f64 {
        match &self.profile {
            FieldProfile::PowerLaw { v0, t, .. } => {
                if *t == 0.0 || *v0 == 0.0 {
                    0.0
                } else {
                    v0 * t * r.powf(t - 1.0)
                }
            }
            FieldProfile::Regularized { v0, t, .. } => v0 * t * r * (1.0 + r * r).powf(0.5 * t - 1.0),
            FieldProfile::Tabulated(t) => t.v_interp.eval_with_derivative(r).1,
        }
    }

    /// Rotational-gauge potential modulus `A(r)`.
    pub fn radial_a(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.radial_a_unchecked(r))
    }

    pub(crate) fn radial_a_unchecked(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        match &self.profile {
            FieldProfile::PowerLaw { b0, s, .. } => b0 * r.powf(s + 1.0) / (s + 2.0),
            FieldProfile::Regularized { b0, s, .. } => {
                let a = 0.5 * s + 1.0;
                b0 * (a * (r * r).ln_1p()).exp_m1() / ((s + 2.0) * r)
            }
            FieldProfile::Tabulated(t) => {
                let integral =
                    adaptive_simpson(|u| t.b_interp.eval(u) * u, 0.0, r, QUAD_REL_TOL, QUAD_ABS_FLOOR);
                integral / r
            }
        }
    }

    /// Flux function `φ(r) = ∫₀ʳ A(u) du`, so `φ(0) = 0`, `φ' = A`, `Δφ = B`.
    pub fn flux_phi(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.flux_phi_unchecked(r))
    }

    pub(crate) fn flux_phi_unchecked(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        match &self.profile {
            FieldProfile::PowerLaw { b0, s, .. } => b0 * r.powf(s + 2.0) / ((s + 2.0) * (s + 2.0)),
            FieldProfile::Regularized { .. } => {
                adaptive_simpson(|u| self.radial_a_unchecked(u), 0.0, r, QUAD_REL_TOL, QUAD_ABS_FLOOR)
            }
            // Swapping the order of the nested integral leaves the single
            // kernel ∫₀ʳ B(u) u ln(r/u) du.
            FieldProfile::Tabulated(t) => adaptive_simpson(
                |u| if u == 0.0 { 0.0 } else { t.b_interp.eval(u) * u * (r / u).ln() },
                0.0,
                r,
                QUAD_REL_TOL,
                QUAD_ABS_FLOOR,
            ),
        }
    }

    /// `A` at sorted radii inside the domain, integrating cumulatively
    /// where no closed form exists.
    pub fn radial_a_on(&self, sorted: &[f64]) -> Vec<f64> {
        match &self.profile {
            FieldProfile::Tabulated(t) => {
                let rule = GaussLegendre::new(8);
                let mut q = 0.0;
                let mut prev = 0.0;
                sorted
                    .iter()
                    .map(|&r| {
                        q += rule.integrate(|u| t.b_interp.eval(u) * u, prev, r);
                        prev = r;
                        if r == 0.0 {
                            0.0
                        } else {
                            q / r
                        }
                    })
                    .collect()
            }
            _ => sorted.iter().map(|&r| self.radial_a_unchecked(r)).collect(),
        }
    }

    /// `φ` at sorted radii inside the domain.
    pub fn flux_phi_on(&self, sorted: &[f64]) -> Vec<f64> {
        match &self.profile {
            FieldProfile::PowerLaw { .. } => sorted.iter().map(|&r| self.flux_phi_unchecked(r)).collect(),
            _ => {
                let rule = GaussLegendre::new(8);
                let mut phi = 0.0;
                let mut prev = 0.0;
                sorted
                    .iter()
                    .map(|&r| {
                        // A is smooth, so one panel per gap is enough.
                        let (xs, ws) = rule.composite_points(prev, r, 1);
                        let a: Vec<f64> = xs.iter().map(|&x| self.radial_a_unchecked(x)).collect();
                        phi += a.iter().zip(&ws).map(|(a, w)| a * w).sum::<f64>();
                        prev = r;
                        phi
                    })
                    .collect()
            }
        }
    }

    /// Infimum of `B` over `[0, r_max]`, sampled.
    pub fn min_b_on(&self, r_max: f64) -> f64 {
        let r_max = r_max.min(self.max_radius());
        (0..=2000)
            .map(|i| self.b(r_max * i as f64 / 2000.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Parse and validate a JSON field document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FieldDocument = serde_json::from_str(text).map_err(|e| Error::SpecParse(e.to_string()))?;
        doc.into_spec()
    }

    pub fn to_document(&self) -> FieldDocument {
        match &self.profile {
            FieldProfile::PowerLaw { v0, b0, t, s } | FieldProfile::Regularized { v0, b0, t, s } => {
                FieldDocument {
                    kind: if matches!(self.profile, FieldProfile::PowerLaw { .. }) {
                        FieldKind::PowerLaw
                    } else {
                        FieldKind::Regularized
                    },
                    v0: Some(*v0),
                    b0: Some(*b0),
                    t: Some(*t),
                    s: Some(*s),
                    e: self.energy_shift,
                    table: None,
                }
            }
            FieldProfile::Tabulated(table) => FieldDocument {
                kind: FieldKind::Tabulated,
                v0: None,
                b0: None,
                t: None,
                s: None,
                e: self.energy_shift,
                table: Some(TableDocument { r: table.r.clone(), v: table.v.clone(), b: table.b.clone() }),
            },
        }
    }

    /// Normalized JSON echo of the validated spec.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("field documents always serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    PowerLaw,
    Regularized,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDocument {
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
}

/// On-disk form of a field spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDocument {
    pub kind: FieldKind,
    #[serde(rename = "V0", default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    #[serde(rename = "B0", default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(rename = "E", default)]
    pub e: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableDocument>,
}

impl FieldDocument {
    pub fn into_spec(self) -> Result<RadialFieldSpec> {
        if !self.e.is_finite() {
            return Err(Error::SpecParse(format!("energy shift E must be finite, got {}", self.e)));
        }
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::SpecParse(format!("field `{name}` is required for kind {:?}", self.kind)))
        };
        let spec = match self.kind {
            FieldKind::PowerLaw | FieldKind::Regularized => {
                if self.table.is_some() {
                    return Err(Error::SpecParse("`table` is only valid for kind tabulated".into()));
                }
                let v0 = need("V0", self.v0)?;
                let b0 = need("B0", self.b0)?;
                let t = need("t", self.t)?;
                let s = need("s", self.s)?;
                if self.kind == FieldKind::PowerLaw {
                    RadialFieldSpec::power_law(v0, b0, t, s)?
                } else {
                    RadialFieldSpec::regularized(v0, b0, t, s)?
                }
            }
            FieldKind::Tabulated => {
                let table = self.table.ok_or_else(|| Error::SpecParse("kind tabulated needs `table`".into()))?;
                RadialFieldSpec::tabulated(RadialTable::new(table.r, table.v, table.b)?)
            }
        };
        Ok(spec.with_energy_shift(self.e))
    }
}

/// `A(r)` for a validated spec.
pub fn eval_radial_a(spec: &RadialFieldSpec, r: f64) -> Result<f64> {
    spec.radial_a(r)
}

/// `φ(r)` for a validated spec.
pub fn eval_flux_phi(spec: &RadialFieldSpec, r: f64) -> Result<f64> {
    spec.flux_phi(r)
}

pub type Point = [f64; 2];

/// A field on the plane: `B = curl A`, potential `V` with its gradient.
pub trait PlanarField: Sync {
    fn magnetic(&self, x: Point) -> f64;
    fn potential(&self, x: Point) -> f64;
    fn potential_gradient(&self, x: Point) -> Point;
    fn vector_potential(&self, x: Point) -> Point;
    /// `|∇B|`, used only for reporting hypothesis diagnostics.
    fn magnetic_gradient(&self, x: Point) -> Point;
}

/// Radial field lifted to the plane in the rotational gauge
/// `A(x) = A(r)/r · (-x₂, x₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationalField {
    pub spec: RadialFieldSpec,
}

/// Lift a radial spec to a planar field.
pub fn lift_to_2d(spec: &RadialFieldSpec) -> RotationalField {
    RotationalField { spec: spec.clone() }
}

fn norm(x: Point) -> f64 {
    x[0].hypot(x[1])
}

impl PlanarField for RotationalField {
    fn magnetic(&self, x: Point) -> f64 {
        self.spec.b(norm(x))
    }

    fn potential(&self, x: Point) -> f64 {
        self.spec.v(norm(x))
    }

    fn potential_gradient(&self, x: Point) -> Point {
        let r = norm(x);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let dv = self.spec.dv(r);
        [dv * x[0] / r, dv * x[1] / r]
    }

    /// NaN outside a tabulated mesh.
    fn vector_potential(&self, x: Point) -> Point {
        let r = norm(x);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        if r > self.spec.max_radius() {
            return [f64::NAN, f64::NAN];
        }
        let k = self.spec.radial_a_unchecked(r) / r;
        [-k * x[1], k * x[0]]
    }

    fn magnetic_gradient(&self, x: Point) -> Point {
        let r = norm(x);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let db = self.spec.db(r);
        [db * x[0] / r, db * x[1] / r]
    }
}

/// Central-difference curl of the vector potential at `x`.
pub fn numerical_curl<F: PlanarField + ?Sized>(field: &F, x: Point, step: f64) -> f64 {
    let a_xp = field.vector_potential([x[0] + step, x[1]]);
    let a_xm = field.vector_potential([x[0] - step, x[1]]);
    let a_yp = field.vector_potential([x[0], x[1] + step]);
    let a_ym = field.vector_potential([x[0], x[1] - step]);
    (a_xp[1] - a_xm[1]) / (2.0 * step) - (a_yp[0] - a_ym[0]) / (2.0 * step)
}
