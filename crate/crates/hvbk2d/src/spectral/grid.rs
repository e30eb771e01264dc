//! Periodic square grid with wavenumber tables and the dealiasing mask.

use std::sync::Arc;


use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::fft::FftPair;

/// Uniform periodic grid on `[0, L)^2` with `n` points per side.
///
/// Wavenumber tables follow standard transform ordering (index `j` maps to
/// `j` for `j < n/2` and to `j - n` otherwise) and carry the `2*pi/L` scale.
#[derive(Debug)]
pub struct Grid<T: Real> {
    n: usize,
    length: T,
    kx: Vec<T>,
    ky: Vec<T>,
    dealias_mask: Vec<bool>,
    fft: FftPair<T>,
}

impl<T: Real> Grid<T> {
    /// Build a grid; `n` must be even and at least 8 (powers of two give the
    /// fastest transforms), `length` positive.
    pub fn new(n: usize, length: T) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::invalid(
                "grid.n",
                format!("must be even and >= 8, got {n}"),
            ));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::invalid(
                "grid.length",
                format!("must be positive and finite, got {length}"),
            ));
        }
        let two_pi_over_l = T::lit(2.0) * T::PI() / length;
        let table: Vec<T> = (0..n)
            .map(|j| {
                let jj = if j < n / 2 {
                    j as i64
                } else {
                    j as i64 - n as i64
                };
                T::lit(jj as f64) * two_pi_over_l
            })
            .collect();

        // Two-thirds rule: keep |k| strictly below (n/3) * (2*pi/L) per axis.
        let cutoff = T::from_count(n) / T::lit(3.0) * two_pi_over_l;
        let keep: Vec<bool> = table.iter().map(|k| k.abs() < cutoff).collect();
        let mut dealias_mask = vec![false; n * n];
        for ix in 0..n {
            for iy in 0..n {
                dealias_mask[ix * n + iy] = keep[ix] && keep[iy];
            }
        }

        Ok(Self {
            n,
            length,
            kx: table.clone(),
            ky: table,
            dealias_mask,
            fft: FftPair::new(n),
        })
    }

    /// Convenience constructor returning the shared handle fields hold.
    pub fn shared(n: usize, length: T) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::new(n, length)?))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Number of grid points (and spectral modes).
    pub fn size(&self) -> usize {
        self.n * self.n
    }

    pub fn kx(&self) -> &[T] {
        &self.kx
    }

    pub fn ky(&self) -> &[T] {
        &self.ky
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias_mask
    }

    /// Grid spacing `L/n`.
    pub fn dx(&self) -> T {
        self.length / T::from_count(self.n)
    }

    /// Quadrature weight of one grid cell, `(L/n)^2`.
    pub fn cell_area(&self) -> T {
        self.dx() * self.dx()
    }

    /// Physical coordinate of grid index `(ix, iy)`.
    pub fn point(&self, ix: usize, iy: usize) -> (T, T) {
        (
            T::from_count(ix) * self.dx(),
            T::from_count(iy) * self.dx(),
        )
    }

    /// `|k|^2` at mode `(ix, iy)`.
    #[inline]
    pub fn k_squared(&self, ix: usize, iy: usize) -> T {
        let kx = self.kx[ix];
        let ky = self.ky[iy];
        kx * kx + ky * ky
    }

    /// Grid-compatibility check used by every multi-field operation.
    pub fn same_as(&self, other: &Grid<T>) -> bool {
        self.n == other.n && self.length == other.length
    }

    pub(crate) fn check_same(&self, other: &Grid<T>) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_n: self.n,
                left_len: self.length.as_f64(),
                right_n: other.n,
                right_len: other.length.as_f64(),
            })
        }
    }

    pub(crate) fn fft(&self) -> &FftPair<T> {
        &self.fft
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_ordering() {
        let g = Grid::<f64>::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let expect = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (k, e) in g.kx().iter().zip(expect.iter()) {
            assert!((k - e).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::<f64>::new(6, 1.0).is_err());
        assert!(Grid::<f64>::new(9, 1.0).is_err());
        assert!(Grid::<f64>::new(8, 0.0).is_err());
        assert!(Grid::<f64>::new(8, -1.0).is_err());
    }

    #[test]
    fn dealias_mask_two_thirds() {
        let n = 64;
        let g = Grid::<f64>::new(n, 2.0 * std::f64::consts::PI).unwrap();
        let mask = g.dealias_mask();
        // |j| <= 21 kept, |j| >= 22 dropped (n/3 = 21.33).
        assert!(mask[21 * n + 21]);
        assert!(!mask[22 * n]);
        assert!(!mask[(n / 2) * n]); // Nyquist
        assert!(mask[(n - 21) * n + 21]); // j = -21
        assert!(!mask[(n - 22) * n]); // j = -22
    }

    #[test]
    fn mask_independent_of_length() {
        let a = Grid::<f64>::new(32, 2.0 * std::f64::consts::PI).unwrap();
        let b = Grid::<f64>::new(32, 10.0).unwrap();
        assert_eq!(a.dealias_mask(), b.dealias_mask());
    }
}
