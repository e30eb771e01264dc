//! Physical parameters and the two-fluid right-hand sides, in velocity form
//! and in vorticity form, with the mutual-friction force and torque.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{
    biot_savart, biot_savart_hat, curl, curl_hat, ddx_hat, ddy_hat, dealias_hat, divergence,
    laplacian_hat, leray_hat, Grid, Representation, ScalarField, VectorField,
};

/// Relative tolerances for the state/velocity preconditions.
const STATE_MEAN_TOL: f64 = 1e-10;
const DIVERGENCE_TOL: f64 = 1e-8;

/// Densities, viscosities and friction coefficients of the two-fluid system.
///
/// The mutual-friction force is
/// `F = -(B/2)|w_s|(u_n - u_s) + (B'/2) w_s x (u_n - u_s)`,
/// where the scalar vorticity acts as the out-of-plane component:
/// `w x v = w * (-v_y, v_x)`.
#[derive(Clone, Copy, Debug)]
pub struct PhysParams<T: Real> {
    pub rho_n: T,
    pub rho_s: T,
    pub nu_n: T,
    pub nu_s: T,
    pub b: T,
    pub b_prime: T,
    /// Optional smoothing of the non-differentiable `|w_s|` factor:
    /// `|w|_eps = sqrt(w^2 + eps^2)`. Zero (the default) keeps the exact
    /// absolute value with `sign(0) = 0` for its gradient.
    pub abs_smoothing_eps: T,
}

impl<T: Real> PhysParams<T> {
    pub fn new(rho_n: T, rho_s: T, nu_n: T, nu_s: T, b: T, b_prime: T) -> Result<Self> {
        let check_pos = |name: &str, v: T| -> Result<()> {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive, got {v}")))
            }
        };
        let check_nonneg = |name: &str, v: T| -> Result<()> {
            if v >= T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be >= 0, got {v}")))
            }
        };
        check_pos("rho_n", rho_n)?;
        check_pos("rho_s", rho_s)?;
        check_pos("nu_n", nu_n)?;
        check_pos("nu_s", nu_s)?;
        check_nonneg("b", b)?;
        check_nonneg("b_prime", b_prime)?;
        Ok(Self {
            rho_n,
            rho_s,
            nu_n,
            nu_s,
            b,
            b_prime,
            abs_smoothing_eps: T::zero(),
        })
    }

    pub fn with_smoothing(mut self, eps: T) -> Result<Self> {
        if eps < T::zero() || !eps.is_finite() {
            return Err(Error::invalid(
                "abs_smoothing_eps",
                format!("must be >= 0, got {eps}"),
            ));
        }
        self.abs_smoothing_eps = eps;
        Ok(self)
    }

    /// Total density `rho = rho_n + rho_s`.
    #[inline]
    pub fn rho(&self) -> T {
        self.rho_n + self.rho_s
    }

    #[inline]
    pub fn beta_n(&self) -> T {
        self.rho_s / self.rho() * self.b / T::lit(2.0)
    }

    #[inline]
    pub fn beta_n_prime(&self) -> T {
        self.rho_s / self.rho() * self.b_prime / T::lit(2.0)
    }

    #[inline]
    pub fn beta_s(&self) -> T {
        self.rho_n / self.rho() * self.b / T::lit(2.0)
    }

    #[inline]
    pub fn beta_s_prime(&self) -> T {
        self.rho_n / self.rho() * self.b_prime / T::lit(2.0)
    }

    /// `|w|` or its smoothed variant `sqrt(w^2 + eps^2)`.
    #[inline]
    pub fn smooth_abs(&self, w: T) -> T {
        let eps = self.abs_smoothing_eps;
        if eps == T::zero() {
            w.abs()
        } else {
            (w * w + eps * eps).sqrt()
        }
    }

    /// Derivative factor of `|w|_eps`: `sign(w)` with `sign(0) = 0`, or
    /// `w / sqrt(w^2 + eps^2)` when smoothing is on.
    #[inline]
    pub fn smooth_sign(&self, w: T) -> T {
        let eps = self.abs_smoothing_eps;
        if eps == T::zero() {
            if w > T::zero() {
                T::one()
            } else if w < T::zero() {
                -T::one()
            } else {
                T::zero()
            }
        } else {
            w / (w * w + eps * eps).sqrt()
        }
    }
}

/// Spectral vorticity pair `(w_n, w_s)` at one time instant. Both fields are
/// kept with an exactly zero mean mode, so the derived velocities exist and
/// are divergence-free by construction.
#[derive(Clone, Debug)]
pub struct TwoFluidState<T: Real> {
    t: T,
    omega_n: ScalarField<T>,
    omega_s: ScalarField<T>,
}

impl<T: Real> TwoFluidState<T> {
    pub fn new(t: T, omega_n: ScalarField<T>, omega_s: ScalarField<T>) -> Result<Self> {
        omega_n.grid().check_same(omega_s.grid())?;
        let mut omega_n = omega_n;
        let mut omega_s = omega_s;
        for w in [&mut omega_n, &mut omega_s] {
            if !w.is_spectral() {
                return Err(Error::Representation {
                    expected: Representation::Spectral,
                    found: Representation::Physical,
                });
            }
            let fraction = w.mean_fraction()?;
            if fraction > T::lit(STATE_MEAN_TOL) {
                return Err(Error::NonzeroMeanVorticity {
                    fraction: fraction.as_f64(),
                });
            }
            w.zero_mean_mode()?;
        }
        Ok(Self {
            t,
            omega_n,
            omega_s,
        })
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.omega_n.grid()
    }

    pub fn omega_n(&self) -> &ScalarField<T> {
        &self.omega_n
    }

    pub fn omega_s(&self) -> &ScalarField<T> {
        &self.omega_s
    }

    /// Velocities recovered from the vorticities.
    pub fn velocities(&self) -> Result<(VectorField<T>, VectorField<T>)> {
        Ok((biot_savart(&self.omega_n)?, biot_savart(&self.omega_s)?))
    }

    pub(crate) fn from_raw(
        t: T,
        grid: &Arc<Grid<T>>,
        omega_n: Vec<Complex<T>>,
        omega_s: Vec<Complex<T>>,
    ) -> Result<Self> {
        Self::new(
            t,
            ScalarField::from_spectral(grid, omega_n)?,
            ScalarField::from_spectral(grid, omega_s)?,
        )
    }
}

// ---------------------------------------------------------------------------
// Shared physical-space scratch.
// ---------------------------------------------------------------------------

pub(crate) fn ifft_to_real<T: Real>(grid: &Grid<T>, hat: &[Complex<T>]) -> Vec<T> {
    let mut buf = hat.to_vec();
    grid.fft().inverse2d(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

pub(crate) fn fft_from_real<T: Real>(grid: &Grid<T>, vals: &[T]) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = vals.iter().map(|&v| Complex::new(v, T::zero())).collect();
    grid.fft().forward2d(&mut buf);
    buf
}

/// Point values of velocities, vorticities and vorticity gradients derived
/// from a spectral vorticity pair. Everything downstream (friction, torque,
/// advection, diagnostics quadratures) reads from here so that all consumers
/// see the same grid products.
pub(crate) struct PhysicalState<T: Real> {
    pub u_n_x: Vec<T>,
    pub u_n_y: Vec<T>,
    pub u_s_x: Vec<T>,
    pub u_s_y: Vec<T>,
    pub w_n: Vec<T>,
    pub w_s: Vec<T>,
    pub grad_w_s: (Vec<T>, Vec<T>),
}

impl<T: Real> PhysicalState<T> {
    pub fn from_spectra(
        grid: &Grid<T>,
        omega_n_hat: &[Complex<T>],
        omega_s_hat: &[Complex<T>],
    ) -> Self {
        let size = grid.size();
        let mut ux = vec![Complex::default(); size];
        let mut uy = vec![Complex::default(); size];

        biot_savart_hat(grid, omega_n_hat, &mut ux, &mut uy);
        let u_n_x = ifft_to_real(grid, &ux);
        let u_n_y = ifft_to_real(grid, &uy);
        biot_savart_hat(grid, omega_s_hat, &mut ux, &mut uy);
        let u_s_x = ifft_to_real(grid, &ux);
        let u_s_y = ifft_to_real(grid, &uy);

        let w_n = ifft_to_real(grid, omega_n_hat);
        let w_s = ifft_to_real(grid, omega_s_hat);

        let mut tmp = vec![Complex::default(); size];
        ddx_hat(grid, omega_s_hat, &mut tmp);
        let gws_x = ifft_to_real(grid, &tmp);
        ddy_hat(grid, omega_s_hat, &mut tmp);
        let gws_y = ifft_to_real(grid, &tmp);

        Self {
            u_n_x,
            u_n_y,
            u_s_x,
            u_s_y,
            w_n,
            w_s,
            grad_w_s: (gws_x, gws_y),
        }
    }

    pub fn from_state(state: &TwoFluidState<T>) -> Result<Self> {
        Ok(Self::from_spectra(
            state.grid(),
            state.omega_n().spectral_data()?,
            state.omega_s().spectral_data()?,
        ))
    }

    /// Relative-velocity components `u_n - u_s` at the nodes.
    pub fn slip(&self) -> (Vec<T>, Vec<T>) {
        let vx = self
            .u_n_x
            .iter()
            .zip(&self.u_s_x)
            .map(|(&a, &b)| a - b)
            .collect();
        let vy = self
            .u_n_y
            .iter()
            .zip(&self.u_s_y)
            .map(|(&a, &b)| a - b)
            .collect();
        (vx, vy)
    }
}

/// Dealiased spectrum of the grid product `|w_s|_eps * (u_n - u_s)`, the
/// common building block of the friction force and torque.
fn drag_product_hat<T: Real>(
    grid: &Grid<T>,
    phys: &PhysicalState<T>,
    params: &PhysParams<T>,
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let (vx, vy) = phys.slip();
    let gx: Vec<T> = phys
        .w_s
        .iter()
        .zip(&vx)
        .map(|(&w, &v)| params.smooth_abs(w) * v)
        .collect();
    let gy: Vec<T> = phys
        .w_s
        .iter()
        .zip(&vy)
        .map(|(&w, &v)| params.smooth_abs(w) * v)
        .collect();
    let mut gx_hat = fft_from_real(grid, &gx);
    let mut gy_hat = fft_from_real(grid, &gy);
    dealias_hat(grid, &mut gx_hat);
    dealias_hat(grid, &mut gy_hat);
    (gx_hat, gy_hat)
}

/// Dealiased spectral friction torque
/// `T = -(B/2) curl[|w_s|(u_n - u_s)] + (B'/2)(u_n - u_s).grad(w_s)`.
pub(crate) fn torque_hat<T: Real>(
    grid: &Grid<T>,
    phys: &PhysicalState<T>,
    params: &PhysParams<T>,
) -> Vec<Complex<T>> {
    let size = grid.size();
    let (gx_hat, gy_hat) = drag_product_hat(grid, phys, params);
    let mut torque = vec![Complex::default(); size];
    curl_hat(grid, &gx_hat, &gy_hat, &mut torque);
    let half_b = params.b / T::lit(2.0);
    for c in torque.iter_mut() {
        *c = -c.scale(half_b);
    }

    if params.b_prime != T::zero() {
        let (vx, vy) = phys.slip();
        let transport: Vec<T> = (0..size)
            .map(|i| vx[i] * phys.grad_w_s.0[i] + vy[i] * phys.grad_w_s.1[i])
            .collect();
        let mut transport_hat = fft_from_real(grid, &transport);
        dealias_hat(grid, &mut transport_hat);
        let half_bp = params.b_prime / T::lit(2.0);
        for (t, c) in torque.iter_mut().zip(&transport_hat) {
            *t += c.scale(half_bp);
        }
    }
    torque[0] = Complex::default();
    torque
}

/// Advection spectrum `(u.grad) f` from physical-space factors, dealiased.
fn advection_hat<T: Real>(
    grid: &Grid<T>,
    ux: &[T],
    uy: &[T],
    f_hat: &[Complex<T>],
) -> Vec<Complex<T>> {
    let size = grid.size();
    let mut tmp = vec![Complex::default(); size];
    ddx_hat(grid, f_hat, &mut tmp);
    let fx = ifft_to_real(grid, &tmp);
    ddy_hat(grid, f_hat, &mut tmp);
    let fy = ifft_to_real(grid, &tmp);
    let prod: Vec<T> = (0..size).map(|i| ux[i] * fx[i] + uy[i] * fy[i]).collect();
    let mut prod_hat = fft_from_real(grid, &prod);
    dealias_hat(grid, &mut prod_hat);
    prod_hat
}

/// Nonlinear (advection + friction-torque) part of the vorticity equations,
/// with the viscous term left out; both outputs have exactly zero mean.
/// This is what the integrating-factor time stepper advances.
pub(crate) fn nonlinear_vorticity_rhs<T: Real>(
    grid: &Grid<T>,
    omega_n_hat: &[Complex<T>],
    omega_s_hat: &[Complex<T>],
    params: &PhysParams<T>,
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let phys = PhysicalState::from_spectra(grid, omega_n_hat, omega_s_hat);

    let adv_n = advection_hat(grid, &phys.u_n_x, &phys.u_n_y, omega_n_hat);
    let adv_s = advection_hat(grid, &phys.u_s_x, &phys.u_s_y, omega_s_hat);

    let friction_on = params.b != T::zero() || params.b_prime != T::zero();
    let torque = if friction_on {
        torque_hat(grid, &phys, params)
    } else {
        vec![Complex::default(); grid.size()]
    };

    let rho = params.rho();
    let cn = params.rho_s / rho;
    let cs = params.rho_n / rho;
    let mut rhs_n = Vec::with_capacity(grid.size());
    let mut rhs_s = Vec::with_capacity(grid.size());
    for i in 0..grid.size() {
        rhs_n.push(-adv_n[i] + torque[i].scale(cn));
        rhs_s.push(-adv_s[i] - torque[i].scale(cs));
    }
    rhs_n[0] = Complex::default();
    rhs_s[0] = Complex::default();
    (rhs_n, rhs_s)
}

// ---------------------------------------------------------------------------
// Public operations.
// ---------------------------------------------------------------------------

fn check_grids<T: Real>(grid: &Grid<T>, others: &[&Grid<T>]) -> Result<()> {
    for g in others {
        grid.check_same(g)?;
    }
    Ok(())
}

/// Mutual friction force
/// `F = -(B/2)|w_s|(u_n - u_s) + (B'/2) w_s x (u_n - u_s)`,
/// computed pointwise in physical space and returned as a dealiased spectral
/// vector field. In 2D `w_s x v` means `w_s * (-v_y, v_x)`.
pub fn mutual_friction<T: Real>(
    omega_s: &ScalarField<T>,
    u_n: &VectorField<T>,
    u_s: &VectorField<T>,
    params: &PhysParams<T>,
) -> Result<VectorField<T>> {
    check_grids(omega_s.grid(), &[u_n.grid(), u_s.grid()])?;
    let grid = omega_s.grid();
    let ws = omega_s.physical_values();
    let unx = u_n.x.physical_values();
    let uny = u_n.y.physical_values();
    let usx = u_s.x.physical_values();
    let usy = u_s.y.physical_values();

    let half_b = params.b / T::lit(2.0);
    let half_bp = params.b_prime / T::lit(2.0);
    let size = grid.size();
    let mut fx = vec![T::zero(); size];
    let mut fy = vec![T::zero(); size];
    for i in 0..size {
        let vx = unx[i] - usx[i];
        let vy = uny[i] - usy[i];
        let drag = half_b * params.smooth_abs(ws[i]);
        fx[i] = -drag * vx + half_bp * ws[i] * -vy;
        fy[i] = -drag * vy + half_bp * ws[i] * vx;
    }
    let mut fx_hat = fft_from_real(grid, &fx);
    let mut fy_hat = fft_from_real(grid, &fy);
    dealias_hat(grid, &mut fx_hat);
    dealias_hat(grid, &mut fy_hat);
    VectorField::new(
        ScalarField::from_spectral(grid, fx_hat)?,
        ScalarField::from_spectral(grid, fy_hat)?,
    )
}

/// Friction torque (curl of the mutual friction):
/// `T = -(B/2) curl[|w_s|(u_n - u_s)] + (B'/2)(u_n - u_s).grad(w_s)`.
/// The curl is taken spectrally from the physical-space product.
pub fn friction_torque<T: Real>(
    omega_s: &ScalarField<T>,
    u_n: &VectorField<T>,
    u_s: &VectorField<T>,
    params: &PhysParams<T>,
) -> Result<ScalarField<T>> {
    check_grids(omega_s.grid(), &[u_n.grid(), u_s.grid()])?;
    let grid = omega_s.grid();

    // Rebuild the shared scratch from the provided fields.
    let size = grid.size();
    let mut tmp = vec![Complex::default(); size];
    let ws_hat = omega_s.spectral_values();
    ddx_hat(grid, &ws_hat, &mut tmp);
    let gws_x = ifft_to_real(grid, &tmp);
    ddy_hat(grid, &ws_hat, &mut tmp);
    let gws_y = ifft_to_real(grid, &tmp);

    let phys = PhysicalState {
        u_n_x: u_n.x.physical_values(),
        u_n_y: u_n.y.physical_values(),
        u_s_x: u_s.x.physical_values(),
        u_s_y: u_s.y.physical_values(),
        w_n: Vec::new(),
        w_s: omega_s.physical_values(),
        grad_w_s: (gws_x, gws_y),
    };
    ScalarField::from_spectral(grid, torque_hat(grid, &phys, params))
}

/// Transport term `(u.grad) f` via physical-space products of spectral
/// derivatives, dealiased. `u` is expected divergence-free.
pub fn advection<T: Real>(u: &VectorField<T>, f: &ScalarField<T>) -> Result<ScalarField<T>> {
    check_grids(f.grid(), &[u.grid()])?;
    let grid = f.grid();
    let ux = u.x.physical_values();
    let uy = u.y.physical_values();
    let f_hat = f.spectral_values();
    ScalarField::from_spectral(grid, advection_hat(grid, &ux, &uy, &f_hat))
}

/// Vorticity-form right-hand sides:
/// `(dw_n/dt, dw_s/dt) = (-adv_n + nu_n lap w_n + (rho_s/rho) T,
///                        -adv_s + nu_s lap w_s - (rho_n/rho) T)`.
/// Both outputs have exactly zero mean mode.
pub fn rhs_vorticity<T: Real>(
    state: &TwoFluidState<T>,
    params: &PhysParams<T>,
) -> Result<(ScalarField<T>, ScalarField<T>)> {
    let grid = state.grid();
    let wn_hat = state.omega_n().spectral_data()?;
    let ws_hat = state.omega_s().spectral_data()?;
    let (mut rhs_n, mut rhs_s) = nonlinear_vorticity_rhs(grid, wn_hat, ws_hat, params);

    let size = grid.size();
    let mut lap = vec![Complex::default(); size];
    laplacian_hat(grid, wn_hat, &mut lap);
    for (r, l) in rhs_n.iter_mut().zip(&lap) {
        *r += l.scale(params.nu_n);
    }
    laplacian_hat(grid, ws_hat, &mut lap);
    for (r, l) in rhs_s.iter_mut().zip(&lap) {
        *r += l.scale(params.nu_s);
    }
    rhs_n[0] = Complex::default();
    rhs_s[0] = Complex::default();
    Ok((
        ScalarField::from_spectral(grid, rhs_n)?,
        ScalarField::from_spectral(grid, rhs_s)?,
    ))
}

/// Velocity-form right-hand sides
/// `P[-(u_i.grad)u_i + nu_i lap u_i +- (rho_j/rho) F]`, Leray-projected and
/// divergence-free. Errors if either input has relative divergence beyond
/// `1e-8`.
pub fn rhs_velocity<T: Real>(
    u_n: &VectorField<T>,
    u_s: &VectorField<T>,
    params: &PhysParams<T>,
) -> Result<(VectorField<T>, VectorField<T>)> {
    check_grids(u_n.grid(), &[u_s.grid()])?;
    let grid = u_n.grid();
    for u in [u_n, u_s] {
        let norm = u.l2_norm();
        if norm > T::zero() {
            let div_fraction = divergence(&u.to_spectral())?.l2_norm() / norm;
            if div_fraction > T::lit(DIVERGENCE_TOL) {
                return Err(Error::NotDivergenceFree {
                    fraction: div_fraction.as_f64(),
                    tol: DIVERGENCE_TOL,
                });
            }
        }
    }

    let friction = mutual_friction(&curl(&u_s.to_spectral())?, u_n, u_s, params)?;
    let rho = params.rho();
    let cn = params.rho_s / rho;
    let cs = params.rho_n / rho;

    let assemble = |u: &VectorField<T>,
                    nu: T,
                    fric_coeff: T|
     -> Result<VectorField<T>> {
        let u_spec = u.to_spectral();
        let ux = u.x.physical_values();
        let uy = u.y.physical_values();
        let size = grid.size();

        let adv_x = advection_hat(grid, &ux, &uy, u_spec.x.spectral_data()?);
        let adv_y = advection_hat(grid, &ux, &uy, u_spec.y.spectral_data()?);

        let mut lap = vec![Complex::default(); size];
        let mut out_x = Vec::with_capacity(size);
        laplacian_hat(grid, u_spec.x.spectral_data()?, &mut lap);
        for i in 0..size {
            out_x.push(
                -adv_x[i] + lap[i].scale(nu)
                    + friction.x.spectral_data()?[i].scale(fric_coeff),
            );
        }
        let mut out_y = Vec::with_capacity(size);
        laplacian_hat(grid, u_spec.y.spectral_data()?, &mut lap);
        for i in 0..size {
            out_y.push(
                -adv_y[i] + lap[i].scale(nu)
                    + friction.y.spectral_data()?[i].scale(fric_coeff),
            );
        }
        leray_hat(grid, &mut out_x, &mut out_y);
        VectorField::new(
            ScalarField::from_spectral(grid, out_x)?,
            ScalarField::from_spectral(grid, out_y)?,
        )
    };

    Ok((
        assemble(u_n, params.nu_n, cn)?,
        assemble(u_s, params.nu_s, -cs)?,
    ))
}
