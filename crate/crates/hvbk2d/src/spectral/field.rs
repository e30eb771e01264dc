//! Scalar and vector fields on a periodic grid, in physical or spectral form.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Spectral,
}

#[derive(Clone, Debug)]
enum FieldData<T: Real> {
    Physical(Vec<T>),
    Spectral(Vec<Complex<T>>),
}

/// A real scalar field stored either as point samples or as the full complex
/// spectrum of its trigonometric interpolant.
#[derive(Clone, Debug)]
pub struct ScalarField<T: Real> {
    grid: Arc<Grid<T>>,
    data: FieldData<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: &Arc<Grid<T>>, repr: Representation) -> Self {
        let data = match repr {
            Representation::Physical => FieldData::Physical(vec![T::zero(); grid.size()]),
            Representation::Spectral => {
                FieldData::Spectral(vec![Complex::default(); grid.size()])
            }
        };
        Self {
            grid: Arc::clone(grid),
            data,
        }
    }

    pub fn from_physical(grid: &Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::invalid(
                "field data",
                format!("expected {} samples, got {}", grid.size(), values.len()),
            ));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            data: FieldData::Physical(values),
        })
    }

    pub fn from_spectral(grid: &Arc<Grid<T>>, coefficients: Vec<Complex<T>>) -> Result<Self> {
        if coefficients.len() != grid.size() {
            return Err(Error::invalid(
                "field data",
                format!(
                    "expected {} coefficients, got {}",
                    grid.size(),
                    coefficients.len()
                ),
            ));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            data: FieldData::Spectral(coefficients),
        })
    }

    /// Sample `f(x, y)` at the grid points (physical representation).
    pub fn from_fn(grid: &Arc<Grid<T>>, f: impl Fn(T, T) -> T) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.size());
        for ix in 0..n {
            for iy in 0..n {
                let (x, y) = grid.point(ix, iy);
                values.push(f(x, y));
            }
        }
        Self {
            grid: Arc::clone(grid),
            data: FieldData::Physical(values),
        }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        match self.data {
            FieldData::Physical(_) => Representation::Physical,
            FieldData::Spectral(_) => Representation::Spectral,
        }
    }

    pub fn is_spectral(&self) -> bool {
        self.representation() == Representation::Spectral
    }

    /// Borrow the spectral coefficients; error if the field is physical.
    pub fn spectral_data(&self) -> Result<&[Complex<T>]> {
        match &self.data {
            FieldData::Spectral(v) => Ok(v),
            FieldData::Physical(_) => Err(Error::Representation {
                expected: Representation::Spectral,
                found: Representation::Physical,
            }),
        }
    }

    /// Borrow the point samples; error if the field is spectral.
    pub fn physical_data(&self) -> Result<&[T]> {
        match &self.data {
            FieldData::Physical(v) => Ok(v),
            FieldData::Spectral(_) => Err(Error::Representation {
                expected: Representation::Physical,
                found: Representation::Spectral,
            }),
        }
    }

    pub(crate) fn spectral_data_mut(&mut self) -> Result<&mut [Complex<T>]> {
        match &mut self.data {
            FieldData::Spectral(v) => Ok(v),
            FieldData::Physical(_) => Err(Error::Representation {
                expected: Representation::Spectral,
                found: Representation::Physical,
            }),
        }
    }

    /// Transform to spectral representation (no-op clone if already there).
    pub fn to_spectral(&self) -> Self {
        self.clone().into_spectral()
    }

    pub fn into_spectral(self) -> Self {
        match self.data {
            FieldData::Spectral(_) => self,
            FieldData::Physical(values) => {
                let mut buf: Vec<Complex<T>> =
                    values.into_iter().map(|v| Complex::new(v, T::zero())).collect();
                self.grid.fft().forward2d(&mut buf);
                Self {
                    grid: self.grid,
                    data: FieldData::Spectral(buf),
                }
            }
        }
    }

    /// Transform to physical representation (no-op clone if already there).
    pub fn to_physical(&self) -> Self {
        self.clone().into_physical()
    }

    pub fn into_physical(self) -> Self {
        match self.data {
            FieldData::Physical(_) => self,
            FieldData::Spectral(mut buf) => {
                self.grid.fft().inverse2d(&mut buf);
                let values: Vec<T> = buf.iter().map(|c| c.re).collect();
                Self {
                    grid: self.grid,
                    data: FieldData::Physical(values),
                }
            }
        }
    }

    /// Point samples, transforming if needed.
    pub(crate) fn physical_values(&self) -> Vec<T> {
        match &self.data {
            FieldData::Physical(v) => v.clone(),
            FieldData::Spectral(_) => self
                .to_physical()
                .physical_data()
                .expect("just transformed")
                .to_vec(),
        }
    }

    /// Spectral coefficients, transforming if needed.
    pub(crate) fn spectral_values(&self) -> Vec<Complex<T>> {
        match &self.data {
            FieldData::Spectral(v) => v.clone(),
            FieldData::Physical(_) => self
                .to_spectral()
                .spectral_data()
                .expect("just transformed")
                .to_vec(),
        }
    }

    /// L2 norm with Parseval scaling: spectral and physical routes agree.
    pub fn l2_norm(&self) -> T {
        match &self.data {
            FieldData::Physical(v) => {
                let sum: T = v.iter().map(|&x| x * x).sum();
                (sum * self.grid.cell_area()).sqrt()
            }
            FieldData::Spectral(v) => {
                let sum: T = v.iter().map(|c| c.norm_sqr()).sum();
                self.grid.length() * sum.sqrt()
            }
        }
    }

    /// Sup norm evaluated on the collocation grid.
    pub fn linf_norm(&self) -> T {
        let vals = self.physical_values();
        vals.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Torus average of the field.
    pub fn mean(&self) -> T {
        match &self.data {
            FieldData::Physical(v) => {
                v.iter().copied().sum::<T>() / T::from_count(v.len())
            }
            FieldData::Spectral(v) => v[0].re,
        }
    }

    /// Force the mean mode to exactly zero (spectral fields only).
    pub(crate) fn zero_mean_mode(&mut self) -> Result<()> {
        self.spectral_data_mut()?[0] = Complex::default();
        Ok(())
    }

    /// `|mean mode| / ||coefficients||` for gauge checks; zero for the zero field.
    pub(crate) fn mean_fraction(&self) -> Result<T> {
        let spec = self.spectral_data()?;
        let norm: T = spec.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() {
            return Ok(T::zero());
        }
        Ok(spec[0].norm() / norm)
    }

    pub(crate) fn map_spectral(&self, f: impl Fn(usize, Complex<T>) -> Complex<T>) -> Result<Self> {
        let spec = self.spectral_data()?;
        let out: Vec<Complex<T>> = spec.iter().enumerate().map(|(i, &c)| f(i, c)).collect();
        Ok(Self {
            grid: Arc::clone(&self.grid),
            data: FieldData::Spectral(out),
        })
    }
}

/// Two-component vector field; both components share one grid.
#[derive(Clone, Debug)]
pub struct VectorField<T: Real> {
    pub x: ScalarField<T>,
    pub y: ScalarField<T>,
}

impl<T: Real> VectorField<T> {
    pub fn new(x: ScalarField<T>, y: ScalarField<T>) -> Result<Self> {
        x.grid().check_same(y.grid())?;
        Ok(Self { x, y })
    }

    pub fn zeros(grid: &Arc<Grid<T>>, repr: Representation) -> Self {
        Self {
            x: ScalarField::zeros(grid, repr),
            y: ScalarField::zeros(grid, repr),
        }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.x.grid()
    }

    pub fn to_spectral(&self) -> Self {
        Self {
            x: self.x.to_spectral(),
            y: self.y.to_spectral(),
        }
    }

    pub fn to_physical(&self) -> Self {
        Self {
            x: self.x.to_physical(),
            y: self.y.to_physical(),
        }
    }

    pub fn l2_norm(&self) -> T {
        let nx = self.x.l2_norm();
        let ny = self.y.l2_norm();
        (nx * nx + ny * ny).sqrt()
    }

    /// Largest pointwise vector magnitude on the collocation grid.
    pub fn linf_norm(&self) -> T {
        let vx = self.x.physical_values();
        let vy = self.y.physical_values();
        vx.iter()
            .zip(vy.iter())
            .fold(T::zero(), |m, (&a, &b)| m.max((a * a + b * b).sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<Grid<f64>> {
        Grid::shared(16, 2.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn representation_errors() {
        let g = grid();
        let phys = ScalarField::from_fn(&g, |x, _| x.sin());
        assert!(phys.spectral_data().is_err());
        assert!(phys.to_spectral().physical_data().is_err());
    }

    #[test]
    fn parseval_two_routes() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x, y| x.sin() + 0.3 * (2.0 * y).cos());
        let phys_norm = f.l2_norm();
        let spec_norm = f.to_spectral().l2_norm();
        assert!((phys_norm - spec_norm).abs() < 1e-12 * phys_norm);
    }

    #[test]
    fn mean_matches_mode_zero() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x, _| 1.5 + x.sin());
        assert!((f.mean() - 1.5).abs() < 1e-13);
        assert!((f.to_spectral().mean() - 1.5).abs() < 1e-13);
    }

    #[test]
    fn vector_components_must_share_grid() {
        let g = grid();
        let h = Grid::shared(32, 2.0 * std::f64::consts::PI).unwrap();
        let a = ScalarField::zeros(&g, Representation::Spectral);
        let b = ScalarField::zeros(&h, Representation::Spectral);
        assert!(VectorField::new(a, b).is_err());
    }
}
