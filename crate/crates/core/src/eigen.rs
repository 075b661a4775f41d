//! Symmetric eigensolver: band reduction by Givens rotations, Sturm
//! counting, bisection and inverse iteration.

use rayon::prelude::*;
use serde::Serialize;

use crate::banded::BandedSymMatrix;
use crate::error::{Error, Result};

/// Windows holding more eigenvalues than this are refused.
pub const WINDOW_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Self {
        assert!(
            offdiag.len() + 1 == diag.len() || (diag.is_empty() && offdiag.is_empty()),
            "off-diagonal must have length n - 1"
        );
        TridiagonalMatrix { diag, offdiag }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.offdiag[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.offdiag[i] * x[i + 1];
                }
                y
            })
            .collect()
    }
}

impl From<&BandedSymMatrix> for TridiagonalMatrix {
    fn from(m: &BandedSymMatrix) -> Self {
        tridiagonalize(m)
    }
}

// Working storage for band reduction: lower band of width b+1 so that the
// single bulge created by each rotation fits.
struct BandWork {
    n: usize,
    width: usize,
    // a[k][j] = M[j + k][j]
    a: Vec<Vec<f64>>,
}

impl BandWork {
    fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.width {
            0.0
        } else {
            self.a[k][lo]
        }
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.width {
            debug_assert!(v.abs() < 1e-300 || v == 0.0, "fill outside working band");
            return;
        }
        self.a[k][lo] = v;
    }

    // Rotate rows/columns (q-1, q) so that entry (q, col) vanishes.
    fn annihilate(&mut self, q: usize, col: usize) {
        let p = q - 1;
        let x = self.get(p, col);
        let y = self.get(q, col);
        if y == 0.0 {
            return;
        }
        let r = x.hypot(y);
        let (c, s) = (x / r, y / r);
        let lo = q.saturating_sub(self.width);
        let hi = (p + self.width).min(self.n - 1);
        for l in lo..=hi {
            if l == p || l == q {
                continue;
            }
            let u = self.get(p, l);
            let w = self.get(q, l);
            if u == 0.0 && w == 0.0 {
                continue;
            }
            self.set(p, l, c * u + s * w);
            self.set(q, l, -s * u + c * w);
        }
        let app = self.get(p, p);
        let aqq = self.get(q, q);
        let apq = self.get(p, q);
        self.set(p, p, c * c * app + 2.0 * c * s * apq + s * s * aqq);
        self.set(q, q, s * s * app - 2.0 * c * s * apq + c * c * aqq);
        self.set(p, q, c * s * (aqq - app) + (c * c - s * s) * apq);
        self.set(q, col, 0.0);
    }
}

/// Orthogonal reduction of a symmetric band matrix to tridiagonal form.
///
/// Each sub-diagonal entry outside the tridiagonal is removed by a Givens
/// rotation of two adjacent rows; the bulge this creates one band further
/// out is chased to the bottom of the matrix.
pub fn tridiagonalize(m: &BandedSymMatrix) -> TridiagonalMatrix {
    let n = m.dim();
    let b = m.bandwidth();
    if b <= 1 {
        let offdiag = if b == 1 { m.band(1).to_vec() } else { vec![0.0; n.saturating_sub(1)] };
        return TridiagonalMatrix::new(m.band(0).to_vec(), offdiag);
    }
    let width = b + 1;
    let mut work = BandWork {
        n,
        width,
        a: (0..=width)
            .map(|k| if k <= b { m.band(k).to_vec() } else { vec![0.0; n.saturating_sub(k)] })
            .collect(),
    };
    for k in 0..n.saturating_sub(2) {
        for d in (2..=b).rev() {
            let mut row = k + d;
            let mut col = k;
            while row < n {
                work.annihilate(row, col);
                col = row - 1;
                row += b;
            }
        }
    }
    TridiagonalMatrix::new(work.a[0].clone(), work.a[1].clone())
}

/// Number of eigenvalues strictly below `e` (Sylvester inertia of `T - e`).
pub fn count_eigs_below(t: &TridiagonalMatrix, e: f64) -> usize {
    let n = t.dim();
    if n == 0 {
        return 0;
    }
    let pivmin = f64::EPSILON * t.norm_inf().max(f64::MIN_POSITIVE);
    let mut count = 0;
    let mut q = t.diag[0] - e;
    for i in 0..n {
        if i > 0 {
            let off = t.offdiag[i - 1];
            q = t.diag[i] - e - off * off / q;
        }
        // A zero pivot is treated as positive, which keeps the count of
        // eigenvalues strictly below `e`.
        if q.abs() < pivmin {
            q = if q < 0.0 { -pivmin } else { pivmin };
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues found in a window, with optional eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub window: (f64, f64),
    pub tol: f64,
    pub count: usize,
    pub eigenvalues: Vec<f64>,
    /// `‖Tx - λx‖ / ‖x‖`, one per returned vector.
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
}

/// Bisect for the `index`-th eigenvalue (0-based) inside `(lo, hi]`, where
/// `count(lo) <= index < count(hi)`, until the bracket is below `tol`.
fn bisect_index(t: &TridiagonalMatrix, index: usize, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        if count_eigs_below(t, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn validate_window(lo: f64, hi: f64) -> Result<()> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidWindow { lo, hi });
    }
    Ok(())
}

/// Number of eigenvalues in `[lo, hi)`.
pub fn count_in_window(t: &TridiagonalMatrix, lo: f64, hi: f64) -> Result<usize> {
    validate_window(lo, hi)?;
    Ok(count_eigs_below(t, hi) - count_eigs_below(t, lo))
}

/// All eigenvalues in the window, each bracketed to `±tol`.
pub fn eigs_in_window(t: &TridiagonalMatrix, lo: f64, hi: f64, tol: f64) -> Result<SpectrumReport> {
    solve_window(t, lo, hi, tol, false)
}

/// As [`eigs_in_window`], also returning unit eigenvectors by inverse iteration.
pub fn eigpairs_in_window(t: &TridiagonalMatrix, lo: f64, hi: f64, tol: f64) -> Result<SpectrumReport> {
    solve_window(t, lo, hi, tol, true)
}

fn solve_window(t: &TridiagonalMatrix, lo: f64, hi: f64, tol: f64, vectors: bool) -> Result<SpectrumReport> {
    validate_window(lo, hi)?;
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let below_lo = count_eigs_below(t, lo);
    let below_hi = count_eigs_below(t, hi);
    let count = below_hi - below_lo;
    if count > WINDOW_LIMIT {
        return Err(Error::WindowTooLarge { count, limit: WINDOW_LIMIT });
    }
    let (g_lo, g_hi) = t.gershgorin();
    let a = lo.max(g_lo - 1.0);
    let b = hi.min(g_hi + 1.0);
    // With vectors the eigenvalues are refined to working precision first,
    // so inverse iteration converges in one or two steps.
    let bisect_tol = if vectors { 0.0 } else { tol };
    let eigenvalues: Vec<f64> =
        (below_lo..below_hi).into_par_iter().map(|k| bisect_index(t, k, a, b, bisect_tol)).collect();
    let (eigenvectors, residuals) = if vectors {
        let vecs = inverse_iteration(t, &eigenvalues, tol);
        let res = vecs.iter().zip(&eigenvalues).map(|(x, &lam)| residual(t, x, lam)).collect();
        (vecs, res)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(SpectrumReport { window: (lo, hi), tol, count, eigenvalues, residuals, eigenvectors })
}

/// Smallest eigenvalue to working precision.
pub fn smallest_eigenvalue(t: &TridiagonalMatrix) -> f64 {
    let (g_lo, g_hi) = t.gershgorin();
    bisect_index(t, 0, g_lo - 1.0, g_hi + 1.0, 0.0)
}

/// `‖Tx - λx‖ / ‖x‖`.
pub fn residual(t: &TridiagonalMatrix, x: &[f64], lambda: f64) -> f64 {
    let tx = t.matvec(x);
    let num: f64 = tx.iter().zip(x).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    num / den
}

// LU factorisation of T - λI with partial pivoting (two super-diagonals of fill).
struct TridiagonalLu {
    l: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(t: &TridiagonalMatrix, shift: f64) -> Self {
        let n = t.dim();
        let eps = f64::EPSILON * t.norm_inf().max(f64::MIN_POSITIVE);
        let mut u0: Vec<f64> = t.diag.iter().map(|d| d - shift).collect();
        let mut u1 = t.offdiag.clone();
        u1.push(0.0);
        let mut lower = t.offdiag.clone();
        let mut u2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swapped = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if lower[i].abs() > u0[i].abs() {
                // swap rows i and i+1
                swapped[i] = true;
                let factor = u0[i] / lower[i];
                l[i] = factor;
                u0[i] = lower[i];
                let t1 = u1[i];
                u1[i] = u0[i + 1];
                u0[i + 1] = t1 - factor * u0[i + 1];
                if i + 2 <= n - 1 {
                    u2[i] = u1[i + 1];
                    u1[i + 1] = -factor * u1[i + 1];
                }
            } else {
                let pivot = if u0[i] == 0.0 { eps } else { u0[i] };
                u0[i] = pivot;
                let factor = lower[i] / pivot;
                l[i] = factor;
                u0[i + 1] -= factor * u1[i];
            }
            lower[i] = 0.0;
        }
        if n > 0 && u0[n - 1] == 0.0 {
            u0[n - 1] = eps;
        }
        TridiagonalLu { l, u0, u1, u2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.l[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                v -= self.u2[i] * b[i + 2];
            }
            b[i] = v / self.u0[i];
        }
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn start_vector(n: usize, seed: usize) -> Vec<f64> {
    // Deterministic, non-degenerate in every coordinate.
    (0..n)
        .map(|i| 1.0 + 0.5 * (((i + 1) * (2 * seed + 3)) as f64 * 0.618_033_988_75).fract())
        .collect()
}

/// Unit eigenvectors for sorted eigenvalues, with eigenvalues closer than
/// `1e3 · tol` sharing a reorthogonalisation group.
pub fn inverse_iteration(t: &TridiagonalMatrix, eigenvalues: &[f64], tol: f64) -> Vec<Vec<f64>> {
    let n = t.dim();
    let scale = t.norm_inf().max(f64::MIN_POSITIVE);
    let cluster_gap = 1e3 * tol;
    let mut groups: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] > cluster_gap {
            groups.push(start..i);
            start = i;
        }
    }
    let solved: Vec<Vec<Vec<f64>>> = groups
        .into_par_iter()
        .map(|range| {
            let mut basis: Vec<Vec<f64>> = Vec::with_capacity(range.len());
            for (offset, idx) in range.clone().enumerate() {
                let lambda = eigenvalues[idx];
                // Nudge repeated shifts apart so each solve is distinct.
                let shift = lambda + offset as f64 * 10.0 * f64::EPSILON * scale;
                let lu = TridiagonalLu::factor(t, shift);
                let mut x = start_vector(n, idx);
                normalize(&mut x);
                for _ in 0..5 {
                    lu.solve(&mut x);
                    for q in &basis {
                        let dot: f64 = q.iter().zip(&x).map(|(a, b)| a * b).sum();
                        x.iter_mut().zip(q).for_each(|(v, qv)| *v -= dot * qv);
                    }
                    normalize(&mut x);
                    if residual(t, &x, lambda) <= 1e-3 * f64::EPSILON.sqrt() * (lambda.abs() + scale) {
                        break;
                    }
                }
                basis.push(x);
            }
            basis
        })
        .collect();
    solved.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn counts_on_simple_matrices() {
        let id = TridiagonalMatrix::new(vec![1.0; 5], vec![0.0; 4]);
        assert_eq!(count_eigs_below(&id, 0.0), 0);
        assert_eq!(count_eigs_below(&id, 2.0), 5);
        let d = TridiagonalMatrix::new(vec![1.0, 2.0, 3.0], vec![0.0; 2]);
        assert_eq!(count_eigs_below(&d, 2.5), 2);
        // strict: an eigenvalue exactly at the shift is not counted
        assert_eq!(count_eigs_below(&d, 2.0), 1);
    }

    #[test]
    fn window_on_diagonal() {
        let t = TridiagonalMatrix::new(vec![0.0, 1.0, 4.0], vec![0.0; 2]);
        let r = eigs_in_window(&t, 0.5, 5.0, 1e-12).unwrap();
        assert_eq!(r.count, 2);
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((r.eigenvalues[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn window_errors() {
        let t = TridiagonalMatrix::new(vec![0.0, 1.0], vec![0.0]);
        assert!(matches!(eigs_in_window(&t, 1.0, 1.0, 1e-8), Err(Error::InvalidWindow { .. })));
        let big = TridiagonalMatrix::new(vec![0.0; WINDOW_LIMIT + 1], vec![0.0; WINDOW_LIMIT]);
        assert!(matches!(eigs_in_window(&big, -1.0, 1.0, 1e-8), Err(Error::WindowTooLarge { .. })));
    }

    #[test]
    fn tridiagonalize_keeps_diagonal_input() {
        let m = BandedSymMatrix::from_bands(vec![3.0, 1.0, 2.0], vec![vec![0.0; 2], vec![0.0]]);
        let t = tridiagonalize(&m);
        assert_eq!(t.diag, vec![3.0, 1.0, 2.0]);
        assert!(t.offdiag.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn tridiagonalize_three_by_three() {
        // characteristic polynomial (λ-1)²(λ-4)
        let m = BandedSymMatrix::from_dense(
            &[vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 2.0]],
            2,
        );
        let t = tridiagonalize(&m);
        let r = eigs_in_window(&t, -10.0, 10.0, 1e-13).unwrap();
        assert_eq!(r.count, 3);
        assert_relative_eq!(r.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.eigenvalues[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.eigenvalues[2], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn inverse_iteration_separates_a_degenerate_pair() {
        // Block diagonal: two identical 2x2 blocks joined by a zero coupling.
        let t = TridiagonalMatrix::new(vec![1.0, 1.0, 1.0, 1.0], vec![0.5, 0.0, 0.5]);
        let r = eigpairs_in_window(&t, 0.0, 2.0, 1e-10).unwrap();
        assert_eq!(r.count, 4);
        for (i, x) in r.eigenvectors.iter().enumerate() {
            assert!(r.residuals[i] <= 1e-8 * (r.eigenvalues[i].abs() + t.norm_inf()));
            for y in &r.eigenvectors[..i] {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-8);
            }
        }
    }
}
