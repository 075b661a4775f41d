//! Numerical laboratory for the two-dimensional massless Dirac operator
//! `H = σ·(-i∇ - A) + V` with radial magnetic field `B = curl A` and
//! electric potential `V`.
//!
//! The crate computes radial-sector spectra on a staggered grid, classifies
//! power-law fields by the growth of `V²/2B`, builds Aharonov–Casher zero
//! modes and localised Landau-level quasimodes, and measures the
//! corresponding residuals.

pub mod banded;
pub mod classify;
pub mod dirac;
pub mod eigen;
pub mod error;
pub mod fields;
pub mod quadrature;
pub mod quasimodes;
pub mod radial;
pub mod zeromodes;

pub use banded::BandedSymMatrix;
pub use classify::{predict_regime, probe_accumulation, probe_gap, AccumulationReport, GapReport, Regime, RegimeLabel, SectorRange, Verdict};

pub use eigen::{count_eigs_below, eigs_in_window, tridiagonalize, SpectrumReport, TridiagonalMatrix};
pub use error::{Error, Result};
pub use fields::{lift_to_2d, FieldProfile, PlanarField, RadialFieldSpec, RadialTable, RotationalField};
pub use radial::{assemble_h_j, coercivity_ratio, RadialGrid, SectorIndex};
pub use quasimodes::{choose_centers, ladder_state, norm_bounds_check, residual_sequence, residual_terms, Quasimode, QuasimodeParams, Variant};
