//! Two-dimensional FFT engine for square periodic grids.
//!
//! Layout convention everywhere in this crate: `data[ix * n + iy]`, the y
//! index varying fastest. The forward transform carries the `1/n^2`
//! normalization so spectral entries are Fourier-series coefficients:
//! `f(x) = sum_k fhat_k exp(i k.x)`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::real::Real;

pub(crate) struct FftPair<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for FftPair<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("n", &self.n).finish()
    }
}

impl<T: Real> FftPair<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Physical samples -> Fourier coefficients, in place.
    pub fn forward2d(&self, data: &mut [Complex<T>]) {
        self.pass2d(&self.forward, data);
        let scale = T::one() / T::from_count(self.n * self.n);
        for v in data.iter_mut() {
            *v = v.scale(scale);
        }
    }

    /// Fourier coefficients -> physical samples, in place.
    pub fn inverse2d(&self, data: &mut [Complex<T>]) {
        self.pass2d(&self.inverse, data);
    }

    fn pass2d(&self, plan: &Arc<dyn Fft<T>>, data: &mut [Complex<T>]) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        let mut scratch = vec![Complex::default(); plan.get_inplace_scratch_len()];
        // Rows (y direction): contiguous chunks of length n.
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
        // Columns (x direction), now contiguous.
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
    }
}

fn transpose_square<T: Copy>(data: &mut [T], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}
