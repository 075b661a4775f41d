//! Symmetric banded matrices stored by lower diagonals.

/// Symmetric matrix with `bands[k][i] = M[i + k][i]` for `k = 0..=bandwidth`.
///
/// Only the lower triangle is stored, so symmetry holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymMatrix {
    dim: usize,
    bandwidth: usize,
    bands: Vec<Vec<f64>>,
}

impl BandedSymMatrix {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        let bands = (0..=bandwidth).map(|k| vec![0.0; dim.saturating_sub(k)]).collect();
        BandedSymMatrix { dim, bandwidth, bands }
    }

    /// Build from a diagonal and sub-diagonals (`lower[k-1]` is the `k`-th).
    pub fn from_bands(diag: Vec<f64>, lower: Vec<Vec<f64>>) -> Self {
        let dim = diag.len();
        let mut bands = vec![diag];
        for (k, band) in lower.into_iter().enumerate() {
            assert_eq!(band.len(), dim.saturating_sub(k + 1), "band {} has the wrong length", k + 1);
            bands.push(band);
        }
        BandedSymMatrix { dim, bandwidth: bands.len() - 1, bands }
    }

    pub fn from_dense(rows: &[Vec<f64>], bandwidth: usize) -> Self {
        let mut m = Self::zeros(rows.len(), bandwidth);
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate().take(i + 1) {
                if i - j <= bandwidth {
                    m.set(i, j, x);
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// The `k`-th lower diagonal.
    pub fn band(&self, k: usize) -> &[f64] {
        &self.bands[k]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.bandwidth {
            0.0
        } else {
            self.bands[k][lo]
        }
    }

    /// Set `M[i][j]` and `M[j][i]`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        assert!(k <= self.bandwidth, "entry ({i}, {j}) lies outside the band");
        self.bands[k][lo] = value;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y: Vec<f64> = self.bands[0].iter().zip(x).map(|(d, xi)| d * xi).collect();
        for k in 1..=self.bandwidth {
            for (i, &a) in self.bands[k].iter().enumerate() {
                y[i + k] += a * x[i];
                y[i] += a * x[i + k];
            }
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let mut rows: Vec<f64> = self.bands[0].iter().map(|d| d.abs()).collect();
        for k in 1..=self.bandwidth {
            for (i, &a) in self.bands[k].iter().enumerate() {
                rows[i] += a.abs();
                rows[i + k] += a.abs();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// `Dᵀ Mᵀ M D` for a symmetric tridiagonal `M` and diagonal `D`, a
    /// pentadiagonal matrix.
    pub fn scaled_square(&self, scale: &[f64]) -> BandedSymMatrix {
        assert_eq!(self.bandwidth, 1, "scaled_square expects a tridiagonal matrix");
        assert_eq!(scale.len(), self.dim);
        let n = self.dim;
        let d = &self.bands[0];
        let e = &self.bands[1];
        let e_at = |i: usize| if i < n.saturating_sub(1) { e[i] } else { 0.0 };
        let mut out = BandedSymMatrix::zeros(n, 2);
        for i in 0..n {
            let left = if i > 0 { e[i - 1] * e[i - 1] } else { 0.0 };
            out.bands[0][i] = (d[i] * d[i] + left + e_at(i) * e_at(i)) * scale[i] * scale[i];
        }
        for i in 0..n.saturating_sub(1) {
            out.bands[1][i] = e[i] * (d[i] + d[i + 1]) * scale[i] * scale[i + 1];
        }
        for i in 0..n.saturating_sub(2) {
            out.bands[2][i] = e[i] * e[i + 1] * scale[i] * scale[i + 2];
        }
        out
    }
}
