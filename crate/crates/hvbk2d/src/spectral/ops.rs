//! Spectral differential operators, Leray projection, Biot-Savart inversion,
//! and two-thirds dealiasing.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::field::{ScalarField, VectorField};
use crate::spectral::grid::Grid;

/// Relative mean-mode tolerance for the zero-mean gauge checks.
const MEAN_GAUGE_TOL: f64 = 1e-10;

#[inline]
fn i_times<T: Real>(k: T, c: Complex<T>) -> Complex<T> {
    // i * k * c
    Complex::new(-k * c.im, k * c.re)
}

// ---------------------------------------------------------------------------
// Raw-slice kernels. All assume full-spectrum layout `data[ix * n + iy]`.
// ---------------------------------------------------------------------------

pub(crate) fn ddx_hat<T: Real>(grid: &Grid<T>, src: &[Complex<T>], dst: &mut [Complex<T>]) {
    let n = grid.n();
    let kx = grid.kx();
    for ix in 0..n {
        let k = kx[ix];
        for iy in 0..n {
            dst[ix * n + iy] = i_times(k, src[ix * n + iy]);
        }
    }
}

pub(crate) fn ddy_hat<T: Real>(grid: &Grid<T>, src: &[Complex<T>], dst: &mut [Complex<T>]) {
    let n = grid.n();
    let ky = grid.ky();
    for ix in 0..n {
        for iy in 0..n {
            dst[ix * n + iy] = i_times(ky[iy], src[ix * n + iy]);
        }
    }
}

pub(crate) fn laplacian_hat<T: Real>(grid: &Grid<T>, src: &[Complex<T>], dst: &mut [Complex<T>]) {
    let n = grid.n();
    for ix in 0..n {
        for iy in 0..n {
            let k2 = grid.k_squared(ix, iy);
            dst[ix * n + iy] = -src[ix * n + iy].scale(k2);
        }
    }
}

/// Solves `laplacian(g) = -f` mode-wise; the mean mode of `g` is exactly zero.
pub(crate) fn inv_laplacian_hat<T: Real>(
    grid: &Grid<T>,
    src: &[Complex<T>],
    dst: &mut [Complex<T>],
) {
    let n = grid.n();
    for ix in 0..n {
        for iy in 0..n {
            let idx = ix * n + iy;
            let k2 = grid.k_squared(ix, iy);
            dst[idx] = if k2 > T::zero() {
                src[idx].scale(T::one() / k2)
            } else {
                Complex::default()
            };
        }
    }
}

/// `(d/dy psi, -d/dx psi)` written into the two output slices.
pub(crate) fn perp_grad_hat<T: Real>(
    grid: &Grid<T>,
    psi: &[Complex<T>],
    out_x: &mut [Complex<T>],
    out_y: &mut [Complex<T>],
) {
    let n = grid.n();
    let kx = grid.kx();
    let ky = grid.ky();
    for ix in 0..n {
        for iy in 0..n {
            let idx = ix * n + iy;
            out_x[idx] = i_times(ky[iy], psi[idx]);
            out_y[idx] = -i_times(kx[ix], psi[idx]);
        }
    }
}

/// `curl(v) = d/dx v_y - d/dy v_x`.
pub(crate) fn curl_hat<T: Real>(
    grid: &Grid<T>,
    vx: &[Complex<T>],
    vy: &[Complex<T>],
    dst: &mut [Complex<T>],
) {
    let n = grid.n();
    let kx = grid.kx();
    let ky = grid.ky();
    for ix in 0..n {
        for iy in 0..n {
            let idx = ix * n + iy;
            dst[idx] = i_times(kx[ix], vy[idx]) - i_times(ky[iy], vx[idx]);
        }
    }
}

pub(crate) fn divergence_hat<T: Real>(
    grid: &Grid<T>,
    vx: &[Complex<T>],
    vy: &[Complex<T>],
    dst: &mut [Complex<T>],
) {
    let n = grid.n();
    let kx = grid.kx();
    let ky = grid.ky();
    for ix in 0..n {
        for iy in 0..n {
            let idx = ix * n + iy;
            dst[idx] = i_times(kx[ix], vx[idx]) + i_times(ky[iy], vy[idx]);
        }
    }
}

/// In-place mode-wise Leray projection `v - grad inv_laplacian(div v)`.
/// The mean mode is untouched.
pub(crate) fn leray_hat<T: Real>(grid: &Grid<T>, vx: &mut [Complex<T>], vy: &mut [Complex<T>]) {
    let n = grid.n();
    let kx = grid.kx();
    let ky = grid.ky();
    for ix in 0..n {
        for iy in 0..n {
            let k2 = grid.k_squared(ix, iy);
            if k2 == T::zero() {
                continue;
            }
            let idx = ix * n + iy;
            let s = (vx[idx].scale(kx[ix]) + vy[idx].scale(ky[iy])).scale(T::one() / k2);
            vx[idx] -= s.scale(kx[ix]);
            vy[idx] -= s.scale(ky[iy]);
        }
    }
}

/// `u = perp_grad(inv_laplacian(omega))`; mean mode zero.
pub(crate) fn biot_savart_hat<T: Real>(
    grid: &Grid<T>,
    omega: &[Complex<T>],
    out_x: &mut [Complex<T>],
    out_y: &mut [Complex<T>],
) {
    let n = grid.n();
    let kx = grid.kx();
    let ky = grid.ky();
    for ix in 0..n {
        for iy in 0..n {
            let idx = ix * n + iy;
            let k2 = grid.k_squared(ix, iy);
            if k2 > T::zero() {
                let psi = omega[idx].scale(T::one() / k2);
                out_x[idx] = i_times(ky[iy], psi);
                out_y[idx] = -i_times(kx[ix], psi);
            } else {
                out_x[idx] = Complex::default();
                out_y[idx] = Complex::default();
            }
        }
    }
}

/// Zero every mode outside the two-thirds mask, in place.
pub(crate) fn dealias_hat<T: Real>(grid: &Grid<T>, data: &mut [Complex<T>]) {
    for (c, &keep) in data.iter_mut().zip(grid.dealias_mask()) {
        if !keep {
            *c = Complex::default();
        }
    }
}

// ---------------------------------------------------------------------------
// Public operations on fields.
// ---------------------------------------------------------------------------

fn unary_spectral<T: Real>(
    f: &ScalarField<T>,
    kernel: impl Fn(&Grid<T>, &[Complex<T>], &mut [Complex<T>]),
) -> Result<ScalarField<T>> {
    let spec = f.spectral_data()?;
    let mut out = vec![Complex::default(); spec.len()];
    kernel(f.grid(), spec, &mut out);
    ScalarField::from_spectral(f.grid(), out)
}

/// `d/dx f`, exact spectral differentiation.
pub fn ddx<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    unary_spectral(f, ddx_hat)
}

/// `d/dy f`.
pub fn ddy<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    unary_spectral(f, ddy_hat)
}

/// `laplacian(f)`.
pub fn laplacian<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    unary_spectral(f, laplacian_hat)
}

/// Perpendicular gradient `(d/dy f, -d/dx f)`, so that
/// `curl(perp_grad(f)) = -laplacian(f)`.
pub fn perp_grad<T: Real>(f: &ScalarField<T>) -> Result<VectorField<T>> {
    let spec = f.spectral_data()?;
    let mut ox = vec![Complex::default(); spec.len()];
    let mut oy = vec![Complex::default(); spec.len()];
    perp_grad_hat(f.grid(), spec, &mut ox, &mut oy);
    VectorField::new(
        ScalarField::from_spectral(f.grid(), ox)?,
        ScalarField::from_spectral(f.grid(), oy)?,
    )
}

/// Gradient `(d/dx f, d/dy f)`.
pub fn grad<T: Real>(f: &ScalarField<T>) -> Result<VectorField<T>> {
    VectorField::new(ddx(f)?, ddy(f)?)
}

/// `curl(v) = d/dx v_y - d/dy v_x`.
pub fn curl<T: Real>(v: &VectorField<T>) -> Result<ScalarField<T>> {
    let vx = v.x.spectral_data()?;
    let vy = v.y.spectral_data()?;
    let mut out = vec![Complex::default(); vx.len()];
    curl_hat(v.grid(), vx, vy, &mut out);
    ScalarField::from_spectral(v.grid(), out)
}

/// `div(v)`.
pub fn divergence<T: Real>(v: &VectorField<T>) -> Result<ScalarField<T>> {
    let vx = v.x.spectral_data()?;
    let vy = v.y.spectral_data()?;
    let mut out = vec![Complex::default(); vx.len()];
    divergence_hat(v.grid(), vx, vy, &mut out);
    ScalarField::from_spectral(v.grid(), out)
}

/// Returns `g` with `laplacian(g) = -f` and exactly zero mean.
///
/// Errors if the mean mode of `f` exceeds `1e-10` of the coefficient norm
/// (zero-mean gauge violation).
pub fn inv_laplacian<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    let fraction = f.mean_fraction()?;
    if fraction > T::lit(MEAN_GAUGE_TOL) {
        return Err(Error::NonzeroMean {
            fraction: fraction.as_f64(),
            tol: MEAN_GAUGE_TOL,
        });
    }
    unary_spectral(f, inv_laplacian_hat)
}

/// Velocity from vorticity: `u = perp_grad(inv_laplacian(omega))`, so that
/// `curl(u) = omega` and `div(u) = 0`.
///
/// Errors on nonzero-mean vorticity: no periodic velocity exists.
pub fn biot_savart<T: Real>(omega: &ScalarField<T>) -> Result<VectorField<T>> {
    let fraction = omega.mean_fraction()?;
    if fraction > T::lit(MEAN_GAUGE_TOL) {
        return Err(Error::NonzeroMeanVorticity {
            fraction: fraction.as_f64(),
        });
    }
    let spec = omega.spectral_data()?;
    let mut ox = vec![Complex::default(); spec.len()];
    let mut oy = vec![Complex::default(); spec.len()];
    biot_savart_hat(omega.grid(), spec, &mut ox, &mut oy);
    VectorField::new(
        ScalarField::from_spectral(omega.grid(), ox)?,
        ScalarField::from_spectral(omega.grid(), oy)?,
    )
}

/// Leray projection onto divergence-free fields; idempotent, and the mean
/// (constant) mode passes through untouched.
pub fn leray_project<T: Real>(v: &VectorField<T>) -> Result<VectorField<T>> {
    let mut vx = v.x.spectral_data()?.to_vec();
    let mut vy = v.y.spectral_data()?.to_vec();
    leray_hat(v.grid(), &mut vx, &mut vy);
    VectorField::new(
        ScalarField::from_spectral(v.grid(), vx)?,
        ScalarField::from_spectral(v.grid(), vy)?,
    )
}

/// Two-thirds-rule dealiasing: modes outside the mask are zeroed.
pub fn dealias<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    let mut spec = f.spectral_data()?.to_vec();
    dealias_hat(f.grid(), &mut spec);
    ScalarField::from_spectral(f.grid(), spec)
}

/// Largest violation of `coef(-k) = conj(coef(k))`, for symmetry checks.
pub fn max_conjugate_asymmetry<T: Real>(f: &ScalarField<T>) -> Result<T> {
    let spec = f.spectral_data()?;
    let n = f.grid().n();
    let mut worst = T::zero();
    for ix in 0..n {
        for iy in 0..n {
            let jx = (n - ix) % n;
            let jy = (n - iy) % n;
            let diff = (spec[ix * n + iy] - spec[jx * n + jy].conj()).norm();
            worst = worst.max(diff);
        }
    }
    Ok(worst)
}

/// Symmetrize a raw spectrum so the inverse transform is exactly real-valued.
pub(crate) fn enforce_conjugate_symmetry<T: Real>(data: &mut [Complex<T>], n: usize) {
    let half = T::lit(0.5);
    for ix in 0..n {
        for iy in 0..n {
            let jx = (n - ix) % n;
            let jy = (n - iy) % n;
            let (a, b) = (data[ix * n + iy], data[jx * n + jy]);
            if (ix, iy) <= (jx, jy) {
                let sym = (a + b.conj()).scale(half);
                data[ix * n + iy] = sym;
                data[jx * n + jy] = sym.conj();
            }
        }
    }
    data[0] = Complex::new(data[0].re, T::zero());
}
