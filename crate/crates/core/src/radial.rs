//! Staggered discretisation of the radial sector operators
//!
//! `h_j = -iσ₂ ∂_r + σ₁ (A(r) - m_j/r) + v(r)`,  `m_j = j + 1/2`,
//!
//! acting on `(f, g)` as `f ↦ v f + (-∂_r + W) g`, `g ↦ (∂_r + W) f + v g`
//! with `W = A - m_j/r`.
//!
//! The component carrying the regular solution near the origin
//! (`f ~ r^{m_j}` for `j >= 0`, `g ~ r^{-m_j}` for `j < 0`) lives on the
//! half nodes `(i - 1/2)h`; the other component lives on the integer nodes.
//! Interleaving the two gives a symmetric tridiagonal matrix.

use serde::Serialize;

use crate::banded::BandedSymMatrix;
use crate::eigen::{self, tridiagonalize, TridiagonalMatrix};
use crate::error::{Error, Result};
use crate::fields::RadialFieldSpec;

pub const MIN_CELLS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGrid {
    pub radius: f64,
    pub cells: usize,
    pub h: f64,
}

impl RadialGrid {
    pub fn new(radius: f64, cells: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::GridRadius(radius));
        }
        if cells < MIN_CELLS {
            return Err(Error::GridCells(cells));
        }
        Ok(RadialGrid { radius, cells, h: radius / cells as f64 })
    }

    /// Grid with `round(density · radius)` cells.
    pub fn with_density(radius: f64, density: f64) -> Result<Self> {
        Self::new(radius, (density * radius).round() as usize)
    }

    /// `(i - 1/2) h` for `i = 1..=N`.
    pub fn upper_nodes(&self) -> Vec<f64> {
        (1..=self.cells).map(|i| (i as f64 - 0.5) * self.h).collect()
    }

    /// `i h` for `i = 1..N`.
    pub fn lower_nodes(&self) -> Vec<f64> {
        (1..self.cells).map(|i| i as f64 * self.h).collect()
    }
}

/// Same as [`RadialGrid::new`].
pub fn build_radial_grid(radius: f64, cells: usize) -> Result<RadialGrid> {
    RadialGrid::new(radius, cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SectorIndex {
    pub j: i64,
}

impl SectorIndex {
    pub fn new(j: i64) -> Self {
        SectorIndex { j }
    }

    pub fn m(&self) -> f64 {
        self.j as f64 + 0.5
    }
}

/// Radial coefficients entering `h_j`.
pub trait RadialCoefficients: Sync {
    fn radial_a(&self, r: f64) -> f64;
    fn potential(&self, r: f64) -> f64;
    /// Largest radius at which the coefficients are defined.
    fn max_radius(&self) -> f64 {
        f64::INFINITY
    }
}

impl RadialCoefficients for RadialFieldSpec {
    fn radial_a(&self, r: f64) -> f64 {
        self.radial_a_unchecked(r)
    }

    fn potential(&self, r: f64) -> f64 {
        self.v(r)
    }

    fn max_radius(&self) -> f64 {
        RadialFieldSpec::max_radius(self)
    }
}

/// Where each matrix row lives: component (0 = f, 1 = g) and radius.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorLayout {
    pub component: Vec<u8>,
    pub radius: Vec<f64>,
}

/// Node layout for a sector: `f1, g1, f2, ...` for `j >= 0`,
/// `g1, f1, g2, ...` for `j < 0`.
pub fn sector_layout(grid: &RadialGrid, sector: SectorIndex) -> SectorLayout {
    let n = grid.cells;
    let h = grid.h;
    let mut component = Vec::new();
    let mut radius = Vec::new();
    if sector.j >= 0 {
        for i in 1..=n {
            component.push(0);
            radius.push((i as f64 - 0.5) * h);
            if i < n {
                component.push(1);
                radius.push(i as f64 * h);
            }
        }
    } else {
        for i in 1..=n {
            component.push(1);
            radius.push((i as f64 - 0.5) * h);
            component.push(0);
            radius.push(i as f64 * h);
        }
    }
    SectorLayout { component, radius }
}

/// Symmetric tridiagonal (bandwidth 1) matrix of `h_j`.
///
/// Dimension `2N - 1` for `j >= 0` and `2N` for `j < 0`.
pub fn assemble_h_j<C: RadialCoefficients + ?Sized>(
    field: &C,
    grid: &RadialGrid,
    sector: SectorIndex,
) -> Result<BandedSymMatrix> {
    if grid.radius > field.max_radius() {
        return Err(Error::Extrapolation { r: grid.radius, end: field.max_radius() });
    }
    let n = grid.cells;
    let h = grid.h;
    let m = sector.m();
    let w = |r: f64| field.radial_a(r) - m / r;
    let half = |i: usize| (i as f64 - 0.5) * h;
    let int = |i: usize| i as f64 * h;
    let (diag, off) = if sector.j >= 0 {
        let mut diag = Vec::with_capacity(2 * n - 1);
        let mut off = Vec::with_capacity(2 * n - 2);
        for i in 1..=n {
            diag.push(field.potential(half(i)));
            if i < n {
                let r = int(i);
                let wk = w(r);
                diag.push(field.potential(r));
                // (f_i, g_i) then (g_i, f_{i+1})
                off.push(-1.0 / h + 0.5 * wk);
                off.push(1.0 / h + 0.5 * wk);
            }
        }
        (diag, off)
    } else {
        let mut diag = Vec::with_capacity(2 * n);
        let mut off = Vec::with_capacity(2 * n - 1);
        for i in 1..=n {
            let wk = w(half(i));
            if i > 1 {
                // (f_{i-1}, g_i)
                off.push(-1.0 / h + 0.5 * wk);
            }
            diag.push(field.potential(half(i)));
            diag.push(field.potential(int(i)));
            // (g_i, f_i)
            off.push(1.0 / h + 0.5 * wk);
        }
        (diag, off)
    };
    Ok(BandedSymMatrix::from_bands(diag, vec![off]))
}

/// Tridiagonal form of `h_j`, ready for counting.
pub fn sector_tridiagonal<C: RadialCoefficients + ?Sized>(
    field: &C,
    grid: &RadialGrid,
    sector: SectorIndex,
) -> Result<TridiagonalMatrix> {
    Ok(tridiagonalize(&assemble_h_j(field, grid, sector)?))
}

/// `min ‖h_j ψ‖ / ‖v ψ‖` over the discrete sector space.
///
/// With `D = diag(v) > 0` this is the square root of the smallest
/// eigenvalue of `D⁻¹ h_jᵀ h_j D⁻¹`.
pub fn coercivity_ratio<C: RadialCoefficients + ?Sized>(
    field: &C,
    grid: &RadialGrid,
    sector: SectorIndex,
) -> Result<f64> {
    let h = assemble_h_j(field, grid, sector)?;
    let layout = sector_layout(grid, sector);
    let v: Vec<f64> = layout.radius.iter().map(|&r| field.potential(r)).collect();
    let v_min = v.iter().copied().fold(f64::INFINITY, f64::min);
    if !(v_min > 0.0) {
        return Err(Error::Precondition(format!(
            "coercivity needs v bounded below by a positive constant; min v on the grid is {v_min}"
        )));
    }
    let inv: Vec<f64> = v.iter().map(|x| 1.0 / x).collect();
    let k = h.scaled_square(&inv);
    let t = tridiagonalize(&k);
    Ok(eigen::smallest_eigenvalue(&t).max(0.0).sqrt())
}
