//! Regime classification for power-law fields and the numeric probes that
//! back it: eigenvalue-count growth under domain enlargement, and the
//! spectral gap around zero for purely magnetic fields.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{count_eigs_below, WINDOW_LIMIT};
use crate::error::{Error, Result};
use crate::fields::RadialFieldSpec;
use crate::radial::{sector_tridiagonal, RadialGrid, SectorIndex};

const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegimeLabel {
    /// (c): empty essential spectrum.
    DiscreteSpectrum,
    /// (d): zero lies in the essential spectrum.
    EssentialAtZero,
    /// (e): dense pure point spectrum filling the real line.
    DensePurePoint,
    /// (a): pure point, not further subclassified.
    PurePoint,
    /// (b): purely absolutely continuous, equal to the real line.
    AbsolutelyContinuous,
    /// Equality cases the case split leaves open.
    Boundary,
}

impl RegimeLabel {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeLabel::DiscreteSpectrum => "DiscreteSpectrum",
            RegimeLabel::EssentialAtZero => "EssentialAtZero",
            RegimeLabel::DensePurePoint => "DensePurePoint",
            RegimeLabel::PurePoint => "PurePoint",
            RegimeLabel::AbsolutelyContinuous => "AbsolutelyContinuous",
            RegimeLabel::Boundary => "Boundary",
        }
    }

    /// Item letter of the regime table, if any.
    pub fn item(&self) -> Option<char> {
        match self {
            RegimeLabel::PurePoint => Some('a'),
            RegimeLabel::AbsolutelyContinuous => Some('b'),
            RegimeLabel::DiscreteSpectrum => Some('c'),
            RegimeLabel::EssentialAtZero => Some('d'),
            RegimeLabel::DensePurePoint => Some('e'),
            RegimeLabel::Boundary => None,
        }
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A label with the clause that fired.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Regime {
    pub label: RegimeLabel,
    pub clause: &'static str,
    /// Landau index for (d).
    pub k: Option<u64>,
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

// Three-way comparison with relative tolerance.
fn cmp(a: f64, b: f64) -> std::cmp::Ordering {
    if rel_eq(a, b) {
        std::cmp::Ordering::Equal
    } else if a < b {
        std::cmp::Ordering::Less
    } else {
        std::cmp::Ordering::Greater
    }
}

/// Regime of `V = V0 r^t`, `B = B0 r^s` from the exact inequalities.
pub fn predict_regime(v0: f64, b0: f64, t: f64, s: f64) -> Result<Regime> {
    use std::cmp::Ordering::*;
    if !(v0 > 0.0) {
        return Err(Error::SpecV0Nonpositive(v0));
    }
    if !(b0 > 0.0) {
        return Err(Error::SpecB0Nonpositive(b0));
    }
    for (name, value) in [("t", t), ("s", s)] {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::SpecExponent { name, value });
        }
    }
    let r = |label, clause| Ok(Regime { label, clause, k: None });
    match cmp(t, s + 1.0) {
        Greater => return r(RegimeLabel::AbsolutelyContinuous, "(b):t>s+1"),
        Equal => {
            return match cmp(v0, b0 / (s + 2.0)) {
                Greater => r(RegimeLabel::AbsolutelyContinuous, "(b):t=s+1,V0>B0/(s+2)"),
                Less => r(RegimeLabel::PurePoint, "(a):t=s+1,V0<B0/(s+2)"),
                Equal => r(RegimeLabel::Boundary, "boundary:t=s+1,V0=B0/(s+2)"),
            }
        }
        Less => {}
    }
    match cmp(t, 0.5 * s) {
        Less => return r(RegimeLabel::DiscreteSpectrum, "(c):t<s/2"),
        Equal => {
            let ratio = v0 * v0 / (2.0 * b0);
            if cmp(ratio, 1.0) == Less {
                return r(RegimeLabel::DiscreteSpectrum, "(c):t=s/2,V0^2<2B0");
            }
            let k = ratio.round();
            return if rel_eq(ratio, k) {
                Ok(Regime { label: RegimeLabel::EssentialAtZero, clause: "(d):t=s/2,V0^2=2kB0", k: Some(k as u64) })
            } else {
                r(RegimeLabel::Boundary, "boundary:t=s/2,V0^2/(2B0) not an integer")
            };
        }
        Greater => {}
    }
    match cmp(t, 0.5 * (s + 1.0)) {
        Less => r(RegimeLabel::DensePurePoint, "(e):s/2<t<(s+1)/2"),
        Equal => r(RegimeLabel::Boundary, "boundary:t=(s+1)/2"),
        Greater => r(RegimeLabel::PurePoint, "(a):(s+1)/2<t<s+1"),
    }
}

/// Regime of a validated spec; only power-law fields carry a label.
pub fn predict_regime_for(spec: &RadialFieldSpec) -> Result<Regime> {
    match spec.profile {
        crate::fields::FieldProfile::PowerLaw { v0, b0, t, s } => predict_regime(v0, b0, t, s),
        _ => Err(Error::Precondition("the regime table applies to power-law fields only".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Counts constant over the upper half of the radii.
    Stable,
    /// Counts strictly increasing with slope above the threshold.
    Growing,
    Inconclusive,
}

/// Sectors to scan for a probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorRange {
    /// Explicit inclusive range.
    Fixed(i64, i64),
    /// Scan outward from `j = 0` and `j = -1` until `quiet` consecutive
    /// sectors contribute nothing, bounded by `ceil(A(R) R) + quiet`.
    Adaptive { quiet: usize },
}

impl Default for SectorRange {
    fn default() -> Self {
        SectorRange::Adaptive { quiet: 16 }
    }
}

/// Growth threshold (counts per unit radius) for the Growing verdict.
pub const GROWTH_SLOPE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccumulationReport {
    pub window: (f64, f64),
    pub density: f64,
    pub radii: Vec<f64>,
    /// Eigenvalues in the window with `|λ| > ZERO_CUTOFF`, summed over sectors.
    pub counts: Vec<usize>,
    /// Eigenvalues with `|λ| <= ZERO_CUTOFF` in the scanned sectors.
    pub zero_modes: Vec<usize>,
    /// Outermost sectors reached on each side, per radius.
    pub sector_span: Vec<(i64, i64)>,
    /// Least-squares slope of counts against radius.
    pub slope: f64,
    pub verdict: Verdict,
}

// (eigenvalues in the window away from zero, eigenvalues with |λ| <= ZERO_CUTOFF in the window)
fn sector_count(spec: &RadialFieldSpec, grid: &RadialGrid, j: i64, lo: f64, hi: f64) -> Result<WindowCount> {
    let t = sector_tridiagonal(spec, grid, SectorIndex::new(j))?;
    let total = count_eigs_below(&t, hi) - count_eigs_below(&t, lo);
    let z_lo = lo.max(-ZERO_CUTOFF);
    let z_hi = hi.min(ZERO_CUTOFF);
    let zeros = if z_lo < z_hi { count_eigs_below(&t, z_hi) - count_eigs_below(&t, z_lo) } else { 0 };
    Ok(WindowCount { nonzero: total - zeros, zero: zeros })
}

/// Window count split into eigenvalues away from zero and (near-)zero modes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WindowCount {
    pub nonzero: usize,
    pub zero: usize,
}

impl std::ops::Add for WindowCount {
    type Output = WindowCount;
    fn add(self, o: WindowCount) -> WindowCount {
        WindowCount { nonzero: self.nonzero + o.nonzero, zero: self.zero + o.zero }
    }
}

impl std::iter::Sum for WindowCount {
    fn sum<I: Iterator<Item = WindowCount>>(iter: I) -> WindowCount {
        iter.fold(WindowCount::default(), |a, b| a + b)
    }
}

/// Eigenvalue count in `[lo, hi)` summed over sectors, with the sector span.
///
/// In adaptive mode a sector counts as empty when it has no eigenvalue in
/// the window away from zero.
pub fn window_count(
    spec: &RadialFieldSpec,
    grid: &RadialGrid,
    window: (f64, f64),
    sectors: SectorRange,
) -> Result<(WindowCount, (i64, i64))> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvalidWindow { lo, hi });
    }
    match sectors {
        SectorRange::Fixed(a, b) => {
            let counts: Result<Vec<WindowCount>> =
                (a..=b).into_par_iter().map(|j| sector_count(spec, grid, j, lo, hi)).collect();
            Ok((counts?.into_iter().sum(), (a, b)))
        }
        SectorRange::Adaptive { quiet } => {
            let bound = (spec.radial_a(grid.radius)? * grid.radius).ceil() as i64 + quiet as i64;
            let scan = |start: i64, step: i64| -> Result<(WindowCount, i64)> {
                // Blocks of `quiet` sectors are counted in parallel.
                let mut total = WindowCount::default();
                let mut empty = 0;
                let mut j = start;
                let mut last = start;
                while j.abs() <= bound {
                    let block: Vec<i64> =
                        (0..quiet as i64).map(|k| j + step * k).take_while(|x| x.abs() <= bound).collect();
                    let counts: Result<Vec<WindowCount>> =
                        block.par_iter().map(|&jj| sector_count(spec, grid, jj, lo, hi)).collect();
                    for (&jj, c) in block.iter().zip(counts?) {
                        if empty >= quiet {
                            break;
                        }
                        total = total + c;
                        last = jj;
                        empty = if c.nonzero == 0 { empty + 1 } else { 0 };
                    }
                    if empty >= quiet || total.nonzero + total.zero > WINDOW_LIMIT {
                        break;
                    }
                    j += step * quiet as i64;
                }
                if total.nonzero + total.zero > WINDOW_LIMIT {
                    return Err(Error::WindowTooLarge { count: total.nonzero + total.zero, limit: WINDOW_LIMIT });
                }
                Ok((total, last))
            };
            let (up, top) = scan(0, 1)?;
            let (down, bottom) = scan(-1, -1)?;
            Ok((up + down, (bottom, top)))
        }
    }
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Verdict from a count sequence over increasing radii.
pub fn accumulation_verdict(radii: &[f64], counts: &[usize]) -> (f64, Verdict) {
    let y: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let slope = least_squares_slope(radii, &y);
    let top = &counts[counts.len() / 2..];
    let verdict = if top.windows(2).all(|w| w[0] == w[1]) {
        Verdict::Stable
    } else if counts.windows(2).all(|w| w[1] > w[0]) && slope > GROWTH_SLOPE {
        Verdict::Growing
    } else {
        Verdict::Inconclusive
    };
    (slope, verdict)
}

/// Window counts summed over sectors for growing radii at fixed density.
pub fn probe_accumulation(
    spec: &RadialFieldSpec,
    energy: f64,
    radii: &[f64],
    sectors: SectorRange,
    density: f64,
) -> Result<AccumulationReport> {
    if radii.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 radii, got {}", radii.len())));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("radii must be strictly increasing".into()));
    }
    if !(energy > 0.0) {
        return Err(Error::InvalidWindow { lo: -energy, hi: energy });
    }
    let mut counts = Vec::with_capacity(radii.len());
    let mut zero_modes = Vec::with_capacity(radii.len());
    let mut spans = Vec::with_capacity(radii.len());
    for &r in radii {
        let grid = RadialGrid::with_density(r, density)?;
        let (c, span) = window_count(spec, &grid, (-energy, energy), sectors)?;
        counts.push(c.nonzero);
        zero_modes.push(c.zero);
        spans.push(span);
    }
    let (slope, verdict) = accumulation_verdict(radii, &counts);
    Ok(AccumulationReport {
        window: (-energy, energy),
        density,
        radii: radii.to_vec(),
        counts,
        zero_modes,
        sector_span: spans,
        slope,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub radii: Vec<f64>,
    /// Half-gap per radius: smallest `|λ|` above the zero-mode cutoff.
    pub half_gaps: Vec<f64>,
    /// Minimum over radii.
    pub half_gap: f64,
    /// `√(2 inf B)` sampled on the largest radius.
    pub lower_bound: f64,
}

/// Eigenvalues with `|λ|` at most this are taken as zero modes.
pub const ZERO_CUTOFF: f64 = 1e-6;

// Smallest eigenvalue strictly above `floor`, to `tol`.
fn first_above(t: &crate::eigen::TridiagonalMatrix, floor: f64, tol: f64) -> Option<f64> {
    let below = count_eigs_below(t, floor);
    if below == t.dim() {
        return None;
    }
    let (_, g_hi) = t.gershgorin();
    let (mut a, mut b) = (floor, g_hi + 1.0);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if count_eigs_below(t, mid) > below {
            b = mid;
        } else {
            a = mid;
        }
    }
    Some(0.5 * (a + b))
}

/// Largest symmetric eigenvalue-free interval around zero (excluding the
/// zero-mode neighbourhood), per radius.
pub fn probe_gap(spec: &RadialFieldSpec, radii: &[f64], cells_per_unit: f64, sectors: (i64, i64)) -> Result<GapReport> {
    if !spec.is_field_only() {
        return Err(Error::Precondition("gap probe requires V - E to vanish identically".into()));
    }
    if radii.is_empty() {
        return Err(Error::Precondition("need at least one radius".into()));
    }
    let mut half_gaps = Vec::with_capacity(radii.len());
    for &r in radii {
        let grid = RadialGrid::with_density(r, cells_per_unit)?;
        let per_sector: Result<Vec<f64>> = (sectors.0..=sectors.1)
            .into_par_iter()
            .map(|j| {
                let t = sector_tridiagonal(spec, &grid, SectorIndex::new(j))?;
                // With V = 0 the spectrum is symmetric, so the positive side suffices;
                // the negative side is checked too for robustness.
                let pos = first_above(&t, ZERO_CUTOFF, 1e-10).unwrap_or(f64::INFINITY);
                let neg_t = crate::eigen::TridiagonalMatrix::new(
                    t.diag.iter().map(|d| -d).collect(),
                    t.offdiag.iter().map(|e| -e).collect(),
                );
                let neg = first_above(&neg_t, ZERO_CUTOFF, 1e-10).unwrap_or(f64::INFINITY);
                Ok(pos.min(neg))
            })
            .collect();
        half_gaps.push(per_sector?.into_iter().fold(f64::INFINITY, f64::min));
    }
    let half_gap = half_gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let lower_bound = (2.0 * spec.min_b_on(r_max)).sqrt();
    Ok(GapReport { radii: radii.to_vec(), half_gaps, half_gap, lower_bound })
}
