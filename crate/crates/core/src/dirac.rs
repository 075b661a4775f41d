//! Finite-difference action of `d`, `d*` and `D_A + V` on planar
//! complex-valued functions, with `D_A = [[0, d*], [d, 0]]`,
//! `d = -i∂₁ + ∂₂ - (A₁ + iA₂)` and `d* = -i∂₁ - ∂₂ - (A₁ - iA₂)`.

use num_complex::Complex64;

use crate::fields::Point;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Three-point central difference, error `O(h²)`.
    Second,
    /// Five-point central difference, error `O(h⁴)`.
    Fourth,
}

/// Central-difference gradient of `f` at `x`.
pub fn gradient<F: Fn(Point) -> C64 + ?Sized>(f: &F, x: Point, h: f64, stencil: Stencil) -> (C64, C64) {
    let along = |dir: usize| {
        let shift = |k: f64| {
            let mut y = x;
            y[dir] += k * h;
            f(y)
        };
        match stencil {
            Stencil::Second => (shift(1.0) - shift(-1.0)) / (2.0 * h),
            Stencil::Fourth => {
                (shift(-2.0) - 8.0 * shift(-1.0) + 8.0 * shift(1.0) - shift(2.0)) / (12.0 * h)
            }
        }
    };
    (along(0), along(1))
}

/// `(d f)(x)` given the vector potential `a = A(x)`.
pub fn apply_d<F: Fn(Point) -> C64 + ?Sized>(f: &F, a: Point, x: Point, h: f64, stencil: Stencil) -> C64 {
    let (d1, d2) = gradient(f, x, h, stencil);
    -I * d1 + d2 - C64::new(a[0], a[1]) * f(x)
}

/// `(d* f)(x)` given the vector potential `a = A(x)`.
pub fn apply_dstar<F: Fn(Point) -> C64 + ?Sized>(f: &F, a: Point, x: Point, h: f64, stencil: Stencil) -> C64 {
    let (d1, d2) = gradient(f, x, h, stencil);
    -I * d1 - d2 - C64::new(a[0], -a[1]) * f(x)
}

/// `((D_A + V)(u, w))(x)` given `a = A(x)` and `v = V(x)`.
pub fn apply_dirac<U, W>(u: &U, w: &W, a: Point, v: f64, x: Point, h: f64, stencil: Stencil) -> (C64, C64)
where
    U: Fn(Point) -> C64 + ?Sized,
    W: Fn(Point) -> C64 + ?Sized,
{
    let upper = apply_dstar(w, a, x, h, stencil) + v * u(x);
    let lower = apply_d(u, a, x, h, stencil) + v * w(x);
    (upper, lower)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_differentiate_polynomials() {
        let f = |x: Point| C64::new(x[0].powi(3), x[0] * x[1]);
        let (g1, g2) = gradient(&f, [1.5, -2.0], 1e-3, Stencil::Fourth);
        assert!((g1 - C64::new(3.0 * 2.25, -2.0)).norm() < 1e-10);
        assert!((g2 - C64::new(0.0, 1.5)).norm() < 1e-10);
        let (g1, _) = gradient(&f, [1.5, -2.0], 1e-3, Stencil::Second);
        assert!((g1.re - 6.75).abs() < 1e-5);
    }

    #[test]
    fn d_annihilates_free_antiholomorphic_functions() {
        // A = 0: d = -2i ∂_z̄ kills holomorphic functions.
        let f = |x: Point| {
            let z = C64::new(x[0], x[1]);
            z * z * z
        };
        let r = apply_d(&f, [0.0, 0.0], [0.3, 0.7], 1e-3, Stencil::Fourth);
        assert!(r.norm() < 1e-9);
        let r = apply_dstar(&f, [0.0, 0.0], [0.3, 0.7], 1e-3, Stencil::Fourth);
        // d* = -2i ∂_z gives -6i z²
        let z = C64::new(0.3, 0.7);
        assert!((r - (-6.0) * I * z * z).norm() < 1e-9);
    }
}
