//! Monitored scalars and residuals of the exact identities: energy and
//! enstrophy budgets, blowup-criterion integrand, Sobolev norms, potential
//! estimate, Groenwall envelope, and the spectral smoothing monitor.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{
    ifft_to_real, torque_hat, PhysParams, PhysicalState, TwoFluidState,
};
use crate::real::Real;
use crate::spectral::{ScalarField, VectorField};

/// Calibrated constant of the potential estimate
/// `||grad u||_inf <= C (||w||_2 + ||w||_inf (1 + log(1 + ||u||_Hm)))`.
///
/// Fit-and-freeze protocol: largest observed ratio over 100 seeded random
/// band-limited fields (seed 2024, n = 64, m = 3, mixed bands/slopes/
/// amplitudes; see `calibrate_bkm_constant`), 1.9854876434076e-1, times a
/// 1.25 safety margin. Tests hold a fresh 50-field corpus against this
/// frozen value.
pub const BKM_POTENTIAL_C: f64 = 0.24818595542595;

/// All monitored scalars at one time instant. The first twenty fields are
/// the diagnostics CSV schema, in column order; the trailing fields are
/// internal bookkeeping for the budget residuals.
#[derive(Clone, Copy, Debug)]
pub struct DiagnosticsRecord<T: Real> {
    pub t: T,
    /// `E = 1/2 rho_n ||u_n||^2 + 1/2 rho_s ||u_s||^2`.
    pub energy: T,
    /// `rho_n nu_n ||grad u_n||^2`.
    pub diss_n: T,
    pub diss_s: T,
    /// `(rho_n rho_s / rho)(B/2) int |w_s| |u_n - u_s|^2`.
    pub fric_diss: T,
    /// `Z = 1/2 rho_n ||w_n||^2 + 1/2 rho_s ||w_s||^2`.
    pub enstrophy: T,
    /// `||grad w_n||^2`.
    pub palinstrophy_n: T,
    pub palinstrophy_s: T,
    /// Right side of the exact enstrophy balance (see `enstrophy_residual`).
    pub enstrophy_rhs: T,
    pub residual_energy: T,
    pub residual_enstrophy: T,
    /// `1 + ||u_n - u_s||_inf^2 + ||w_n||_inf + ||w_s||_inf`.
    pub bkm_integrand: T,
    /// Running time integral of the integrand (trapezoid over records).
    pub bkm_integral: T,
    /// `H^m` norms of the velocities.
    pub hm_n: T,
    pub hm_s: T,
    pub linf_wn: T,
    pub linf_ws: T,
    pub linf_du: T,
    pub momentum_x: T,
    pub momentum_y: T,

    /// `(rho_n rho_s / rho)(B/2) int |w_s| (w_n - w_s)^2` (not in the CSV).
    pub fric_enstrophy: T,
    /// `rho_i nu_i * palinstrophy_i` (not in the CSV).
    pub visc_enstrophy_n: T,
    pub visc_enstrophy_s: T,
    /// `||grad u_i||^2`, for the Groenwall exponent (not in the CSV).
    pub grad_u_sq_n: T,
    pub grad_u_sq_s: T,
}

impl<T: Real> DiagnosticsRecord<T> {
    /// Compute every instantaneous quantity from a state. The residual and
    /// running-integral fields are zero; [`DiagnosticsRecord::chain`] fills
    /// them from the previous record.
    pub fn compute(
        state: &TwoFluidState<T>,
        params: &PhysParams<T>,
        sobolev_m: T,
    ) -> Result<Self> {
        let grid = state.grid();
        let n = grid.n();
        let length = grid.length();
        let wn_hat = state.omega_n().spectral_data()?;
        let ws_hat = state.omega_s().spectral_data()?;

        // Spectral sums: velocity energy, enstrophy, palinstrophy, H^m.
        let l2sq = length * length;
        let mut usq_n = T::zero();
        let mut usq_s = T::zero();
        let mut wsq_n = T::zero();
        let mut wsq_s = T::zero();
        let mut pal_n = T::zero();
        let mut pal_s = T::zero();
        let mut hm_n_sq = T::zero();
        let mut hm_s_sq = T::zero();
        for ix in 0..n {
            for iy in 0..n {
                let idx = ix * n + iy;
                let k2 = grid.k_squared(ix, iy);
                let an = wn_hat[idx].norm_sqr();
                let as_ = ws_hat[idx].norm_sqr();
                wsq_n += an;
                wsq_s += as_;
                pal_n += k2 * an;
                pal_s += k2 * as_;
                if k2 > T::zero() {
                    let weight = (T::one() + k2).powf(sobolev_m) / k2;
                    usq_n += an / k2;
                    usq_s += as_ / k2;
                    hm_n_sq += weight * an;
                    hm_s_sq += weight * as_;
                }
            }
        }
        let energy = T::lit(0.5) * (params.rho_n * usq_n + params.rho_s * usq_s) * l2sq;
        let enstrophy = T::lit(0.5) * (params.rho_n * wsq_n + params.rho_s * wsq_s) * l2sq;
        let diss_n = params.rho_n * params.nu_n * wsq_n * l2sq; // ||grad u|| = ||w||
        let diss_s = params.rho_s * params.nu_s * wsq_s * l2sq;
        let palinstrophy_n = pal_n * l2sq;
        let palinstrophy_s = pal_s * l2sq;

        // Physical-space quadratures share the exact grid products the
        // dynamics use.
        let phys = PhysicalState::from_state(state)?;
        let (vx, vy) = phys.slip();
        let area = grid.cell_area();
        let size = grid.size();

        let mut fric_diss_q = T::zero();
        let mut fric_enst_q = T::zero();
        let mut linf_du = T::zero();
        let mut linf_wn = T::zero();
        let mut linf_ws = T::zero();
        let mut mom_x = T::zero();
        let mut mom_y = T::zero();
        for i in 0..size {
            let slip_sq = vx[i] * vx[i] + vy[i] * vy[i];
            let aws = params.smooth_abs(phys.w_s[i]);
            let dw = phys.w_n[i] - phys.w_s[i];
            fric_diss_q += aws * slip_sq;
            fric_enst_q += aws * dw * dw;
            linf_du = linf_du.max(slip_sq.sqrt());
            linf_wn = linf_wn.max(phys.w_n[i].abs());
            linf_ws = linf_ws.max(phys.w_s[i].abs());
            mom_x += params.rho_n * phys.u_n_x[i] + params.rho_s * phys.u_s_x[i];
            mom_y += params.rho_n * phys.u_n_y[i] + params.rho_s * phys.u_s_y[i];
        }
        let fric_coeff = params.rho_n * params.rho_s / params.rho() * params.b / T::lit(2.0);
        let fric_diss = fric_coeff * fric_diss_q * area;
        let fric_enstrophy = fric_coeff * fric_enst_q * area;

        // Exact discrete enstrophy exchange: the inner product of the
        // vorticity difference with the torque the dynamics actually apply,
        // plus the (sign-definite) drag part. Continuum equivalent:
        // (rho_n rho_s / 2 rho) int (w_n - w_s)(u_n - u_s).(B' grad w_s + B perp_grad |w_s|).
        let friction_on = params.b != T::zero() || params.b_prime != T::zero();
        let enstrophy_rhs = if friction_on {
            let torque = torque_hat(grid, &phys, params);
            let t_phys = ifft_to_real(grid, &torque);
            let mut flux = T::zero();
            for i in 0..size {
                flux += (phys.w_n[i] - phys.w_s[i]) * t_phys[i];
            }
            params.rho_n * params.rho_s / params.rho() * flux * area + fric_enstrophy
        } else {
            T::zero()
        };

        let bkm_integrand = T::one() + linf_du * linf_du + linf_wn + linf_ws;

        Ok(Self {
            t: state.t(),
            energy,
            diss_n,
            diss_s,
            fric_diss,
            enstrophy,
            palinstrophy_n,
            palinstrophy_s,
            enstrophy_rhs,
            residual_energy: T::zero(),
            residual_enstrophy: T::zero(),
            bkm_integrand,
            bkm_integral: T::zero(),
            hm_n: length * hm_n_sq.sqrt(),
            hm_s: length * hm_s_sq.sqrt(),
            linf_wn,
            linf_ws,
            linf_du,
            momentum_x: mom_x * area,
            momentum_y: mom_y * area,
            fric_enstrophy,
            visc_enstrophy_n: params.rho_n * params.nu_n * palinstrophy_n,
            visc_enstrophy_s: params.rho_s * params.nu_s * palinstrophy_s,
            grad_u_sq_n: wsq_n * l2sq,
            grad_u_sq_s: wsq_s * l2sq,
        })
    }

    /// Fill the budget residuals and the running integral from the
    /// predecessor record. `dt` is the time between the two records.
    pub fn chain(prev: &Self, mut next: Self, dt: T) -> Result<Self> {
        next.residual_energy = energy_residual(prev, &next, dt)?;
        next.residual_enstrophy = enstrophy_residual(prev, &next, dt)?;
        next.bkm_integral = prev.bkm_integral
            + T::lit(0.5) * dt * (prev.bkm_integrand + next.bkm_integrand);
        Ok(next)
    }

    /// The values of the twenty CSV columns, in schema order.
    pub fn csv_values(&self) -> [T; 20] {
        [
            self.t,
            self.energy,
            self.diss_n,
            self.diss_s,
            self.fric_diss,
            self.enstrophy,
            self.palinstrophy_n,
            self.palinstrophy_s,
            self.enstrophy_rhs,
            self.residual_energy,
            self.residual_enstrophy,
            self.bkm_integrand,
            self.bkm_integral,
            self.hm_n,
            self.hm_s,
            self.linf_wn,
            self.linf_ws,
            self.linf_du,
            self.momentum_x,
            self.momentum_y,
        ]
    }
}

/// CSV column names, in the exported order.
pub const CSV_COLUMNS: [&str; 20] = [
    "t",
    "energy",
    "diss_n",
    "diss_s",
    "fric_diss",
    "enstrophy",
    "palinstrophy_n",
    "palinstrophy_s",
    "enstrophy_rhs",
    "residual_energy",
    "residual_enstrophy",
    "bkm_integrand",
    "bkm_integral",
    "hm_n",
    "hm_s",
    "linf_wn",
    "linf_ws",
    "linf_du",
    "momentum_x",
    "momentum_y",
];

fn check_dt<T: Real>(dt: T) -> Result<()> {
    if dt > T::zero() && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("dt", format!("must be positive, got {dt}")))
    }
}

/// Normalized residual of the energy balance between consecutive records:
/// `|(E2 - E1)/dt + mean(diss_n + diss_s + fric_diss)| / max(1, mean diss)`.
pub fn energy_residual<T: Real>(
    prev: &DiagnosticsRecord<T>,
    next: &DiagnosticsRecord<T>,
    dt: T,
) -> Result<T> {
    check_dt(dt)?;
    let half = T::lit(0.5);
    let diss_prev = prev.diss_n + prev.diss_s + prev.fric_diss;
    let diss_next = next.diss_n + next.diss_s + next.fric_diss;
    let mean_diss = half * (diss_prev + diss_next);
    let raw = (next.energy - prev.energy) / dt + mean_diss;
    Ok(raw.abs() / T::one().max(mean_diss))
}

/// Normalized residual of the exact enstrophy balance:
/// `|dZ/dt + visc_n + visc_s + fric_enstrophy - enstrophy_rhs|` with all
/// right-side terms averaged over the two records, normalized by
/// `max(1, mean viscous palinstrophy sum)`.
pub fn enstrophy_residual<T: Real>(
    prev: &DiagnosticsRecord<T>,
    next: &DiagnosticsRecord<T>,
    dt: T,
) -> Result<T> {
    check_dt(dt)?;
    let half = T::lit(0.5);
    let visc = half
        * (prev.visc_enstrophy_n + prev.visc_enstrophy_s + next.visc_enstrophy_n
            + next.visc_enstrophy_s);
    let fric = half * (prev.fric_enstrophy + next.fric_enstrophy);
    let rhs = half * (prev.enstrophy_rhs + next.enstrophy_rhs);
    let raw = (next.enstrophy - prev.enstrophy) / dt + visc + fric - rhs;
    Ok(raw.abs() / T::one().max(visc))
}

/// Pointwise-gradient quadrature of the enstrophy-exchange term,
/// `(rho_n rho_s / 2 rho) int (w_n - w_s)(u_n - u_s).(B' grad w_s + B perp_grad |w_s|)`,
/// with `grad |w_s| = sign(w_s) grad w_s`. Agrees with the record's
/// `enstrophy_rhs` up to the (measured) aliasing of the non-band-limited
/// `|w_s|` factor; kept as an independent cross-check of the identity.
pub fn enstrophy_rhs_pointwise<T: Real>(
    state: &TwoFluidState<T>,
    params: &PhysParams<T>,
) -> Result<T> {
    let grid = state.grid();
    let phys = PhysicalState::from_state(state)?;
    let (vx, vy) = phys.slip();
    let mut sum = T::zero();
    for i in 0..grid.size() {
        let w = phys.w_n[i] - phys.w_s[i];
        let sgn = params.smooth_sign(phys.w_s[i]);
        // perp_grad |w_s| = sign(w_s) * (d/dy w_s, -d/dx w_s)
        let pgx = sgn * phys.grad_w_s.1[i];
        let pgy = -sgn * phys.grad_w_s.0[i];
        sum += w
            * (vx[i] * (params.b_prime * phys.grad_w_s.0[i] + params.b * pgx)
                + vy[i] * (params.b_prime * phys.grad_w_s.1[i] + params.b * pgy));
    }
    Ok(params.rho_n * params.rho_s / params.rho() / T::lit(2.0) * sum * grid.cell_area())
}

/// Scalar monitored by the blowup criterion:
/// `1 + ||u_n - u_s||_inf^2 + ||w_n||_inf + ||w_s||_inf`.
pub fn bkm_integrand<T: Real>(state: &TwoFluidState<T>) -> Result<T> {
    let phys = PhysicalState::from_state(state)?;
    let (vx, vy) = phys.slip();
    let mut du = T::zero();
    let mut wn = T::zero();
    let mut ws = T::zero();
    for i in 0..vx.len() {
        du = du.max(vx[i] * vx[i] + vy[i] * vy[i]);
        wn = wn.max(phys.w_n[i].abs());
        ws = ws.max(phys.w_s[i].abs());
    }
    Ok(T::one() + du + wn + ws)
}

/// Inhomogeneous Sobolev norm `(sum_k (1 + |k|^2)^m |fhat_k|^2)^(1/2)` with
/// the Parseval scaling that matches the physical L2 norm at `m = 0`.
pub fn sobolev_norm<T: Real>(f: &ScalarField<T>, m: T) -> Result<T> {
    let spec = f.spectral_data()?;
    let grid = f.grid();
    let n = grid.n();
    let mut sum = T::zero();
    for ix in 0..n {
        for iy in 0..n {
            let k2 = grid.k_squared(ix, iy);
            sum += (T::one() + k2).powf(m) * spec[ix * n + iy].norm_sqr();
        }
    }
    Ok(grid.length() * sum.sqrt())
}

/// Sobolev norm of a vector field (root of the component sum of squares).
pub fn sobolev_norm_vec<T: Real>(v: &VectorField<T>, m: T) -> Result<T> {
    let nx = sobolev_norm(&v.x, m)?;
    let ny = sobolev_norm(&v.y, m)?;
    Ok((nx * nx + ny * ny).sqrt())
}

/// One side of the potential estimate for a single fluid.
#[derive(Clone, Copy, Debug)]
pub struct PotentialEstimate<T: Real> {
    /// `||grad u||_inf` (largest Frobenius norm of the velocity gradient).
    pub lhs: T,
    /// `C (||w||_2 + ||w||_inf (1 + log(1 + ||u||_Hm)))` with the frozen `C`.
    pub rhs: T,
    pub satisfied: bool,
}

/// Potential estimate checked for both fluids of a state.
#[derive(Clone, Copy, Debug)]
pub struct BkmPotentialCheck<T: Real> {
    pub normal: PotentialEstimate<T>,
    pub superfluid: PotentialEstimate<T>,
}

/// Ratio `||grad u||_inf / (||w||_2 + ||w||_inf (1 + log(1 + ||u||_Hm)))`
/// for one vorticity field; the calibration target.
pub fn bkm_potential_ratio<T: Real>(omega: &ScalarField<T>, m: T) -> Result<T> {
    let u = crate::spectral::biot_savart(omega)?;
    let grid = omega.grid();
    let n = grid.n();
    let uxh = u.x.spectral_data()?;
    let uyh = u.y.spectral_data()?;
    let size = grid.size();
    let mut dxux = vec![Complex::default(); size];
    let mut dyux = vec![Complex::default(); size];
    let mut dxuy = vec![Complex::default(); size];
    let mut dyuy = vec![Complex::default(); size];
    crate::spectral::ddx_hat(grid, uxh, &mut dxux);
    crate::spectral::ddy_hat(grid, uxh, &mut dyux);
    crate::spectral::ddx_hat(grid, uyh, &mut dxuy);
    crate::spectral::ddy_hat(grid, uyh, &mut dyuy);
    let a = ifft_to_real(grid, &dxux);
    let b = ifft_to_real(grid, &dyux);
    let c = ifft_to_real(grid, &dxuy);
    let d = ifft_to_real(grid, &dyuy);
    let mut lhs = T::zero();
    for i in 0..size {
        let frob = (a[i] * a[i] + b[i] * b[i] + c[i] * c[i] + d[i] * d[i]).sqrt();
        lhs = lhs.max(frob);
    }
    let _ = n;

    let w_l2 = omega.l2_norm();
    let w_inf = omega.linf_norm();
    let u_hm = sobolev_norm_vec(&u, m)?;
    let denom = w_l2 + w_inf * (T::one() + (T::one() + u_hm).ln());
    if denom == T::zero() {
        return Ok(T::zero());
    }
    Ok(lhs / denom)
}

fn potential_estimate<T: Real>(omega: &ScalarField<T>, m: T) -> Result<PotentialEstimate<T>> {
    let c = T::lit(BKM_POTENTIAL_C);
    let ratio = bkm_potential_ratio(omega, m)?;
    let w_l2 = omega.l2_norm();
    let w_inf = omega.linf_norm();
    let u = crate::spectral::biot_savart(omega)?;
    let u_hm = sobolev_norm_vec(&u, m)?;
    let denom = w_l2 + w_inf * (T::one() + (T::one() + u_hm).ln());
    let lhs = ratio * denom;
    let rhs = c * denom;
    Ok(PotentialEstimate {
        lhs,
        rhs,
        satisfied: lhs <= rhs,
    })
}

/// Check the potential estimate with the frozen constant on both fluids.
pub fn bkm_potential_check<T: Real>(
    state: &TwoFluidState<T>,
    m: T,
) -> Result<BkmPotentialCheck<T>> {
    Ok(BkmPotentialCheck {
        normal: potential_estimate(state.omega_n(), m)?,
        superfluid: potential_estimate(state.omega_s(), m)?,
    })
}

/// Largest potential-estimate ratio over a seeded corpus of random
/// band-limited fields; the frozen `BKM_POTENTIAL_C` is this value (for the
/// calibration corpus) times a 1.25 margin.
pub fn calibrate_bkm_constant<T: Real>(
    n: usize,
    count: usize,
    seed: u64,
    m: T,
) -> Result<T> {
    use rand::{Rng, SeedableRng};
    let grid = crate::spectral::Grid::shared(n, T::lit(2.0) * T::PI())?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::zero();
    for _ in 0..count {
        let k_max = rng.gen_range(2..=(n / 4));
        let slope = rng.gen_range(0.5..4.0);
        let amplitude = 10.0_f64.powf(rng.gen_range(-1.0..1.0));
        let field = crate::init::random_band_vorticity(
            &grid,
            T::lit(amplitude),
            k_max,
            T::lit(slope),
            &mut rng,
        )?;
        worst = worst.max(bkm_potential_ratio(&field, m)?);
    }
    Ok(worst)
}

/// Groenwall envelope fitted to an enstrophy history.
#[derive(Clone, Debug)]
pub struct GronwallReport<T: Real> {
    /// Smallest constant making `Z(t) <= Z(0) exp(C I(t))` hold at all
    /// record times, with `I(t) = int (||grad u_n||^2 + ||grad u_s||^2) dt`.
    pub c_fit: T,
    /// The fitted bound evaluated at each record time.
    pub bound_curve: Vec<T>,
    /// Enstrophy finite and below the curve everywhere.
    pub satisfied: bool,
}

/// Fit the smallest Groenwall constant to a run history.
pub fn gronwall_enstrophy_bound<T: Real>(
    history: &[DiagnosticsRecord<T>],
) -> Result<GronwallReport<T>> {
    if history.is_empty() {
        return Err(Error::invalid("history", "no records"));
    }
    let z0 = history[0].enstrophy;
    let mut integral = T::zero();
    let mut integrals = Vec::with_capacity(history.len());
    integrals.push(T::zero());
    for pair in history.windows(2) {
        let dt = pair[1].t - pair[0].t;
        let a = pair[0].grad_u_sq_n + pair[0].grad_u_sq_s;
        let b = pair[1].grad_u_sq_n + pair[1].grad_u_sq_s;
        integral += T::lit(0.5) * dt * (a + b);
        integrals.push(integral);
    }

    let mut c_fit = T::zero();
    if z0 > T::zero() {
        for (rec, &i_t) in history.iter().zip(&integrals) {
            if i_t > T::zero() && rec.enstrophy > z0 {
                c_fit = c_fit.max((rec.enstrophy / z0).ln() / i_t);
            }
        }
    }
    let bound_curve: Vec<T> = integrals.iter().map(|&i| z0 * (c_fit * i).exp()).collect();
    let slack = T::one() + T::lit(1e-12);
    let satisfied = history
        .iter()
        .zip(&bound_curve)
        .all(|(rec, &b)| rec.enstrophy.is_finite() && rec.enstrophy <= b * slack);
    Ok(GronwallReport {
        c_fit,
        bound_curve,
        satisfied,
    })
}

/// Per-snapshot spectral decay data from the smoothing monitor.
#[derive(Clone, Debug)]
pub struct SpectralDecayReport<T: Real> {
    pub times: Vec<T>,
    /// Kinetic-energy fraction above `|k| = n/4`, per fluid.
    pub high_band_fraction_n: Vec<T>,
    pub high_band_fraction_s: Vec<T>,
    /// Fractions decay monotonically after the start, within `1e-3` of
    /// their initial scale.
    pub monotone_after_start: bool,
    /// Input had (numerically) no energy; the monitor has nothing to say.
    pub degenerate: bool,
}

/// Kinetic-energy fraction carried by modes with `|k| > (n/4)(2 pi / L)`,
/// for each fluid of a state.
pub fn high_band_fraction<T: Real>(state: &TwoFluidState<T>) -> Result<(T, T)> {
    let grid = state.grid();
    let n = grid.n();
    let cutoff = T::from_count(n) / T::lit(4.0) * T::lit(2.0) * T::PI() / grid.length();
    let cutoff_sq = cutoff * cutoff;
    let fraction = |w_hat: &[Complex<T>]| -> T {
        let mut total = T::zero();
        let mut high = T::zero();
        for ix in 0..n {
            for iy in 0..n {
                let k2 = grid.k_squared(ix, iy);
                if k2 == T::zero() {
                    continue;
                }
                let e = w_hat[ix * n + iy].norm_sqr() / k2;
                total += e;
                if k2 > cutoff_sq {
                    high += e;
                }
            }
        }
        if total > T::zero() {
            high / total
        } else {
            T::zero()
        }
    };
    Ok((
        fraction(state.omega_n().spectral_data()?),
        fraction(state.omega_s().spectral_data()?),
    ))
}

/// Track the high-band energy fraction across state snapshots and verify it
/// decays monotonically after the initial time.
pub fn smoothing_monitor<T: Real>(
    states: &[TwoFluidState<T>],
) -> Result<SpectralDecayReport<T>> {
    if states.is_empty() {
        return Err(Error::invalid("states", "no snapshots"));
    }
    let mut times = Vec::with_capacity(states.len());
    let mut fn_ = Vec::with_capacity(states.len());
    let mut fs_ = Vec::with_capacity(states.len());
    for st in states {
        let (a, b) = high_band_fraction(st)?;
        times.push(st.t());
        fn_.push(a);
        fs_.push(b);
    }
    let degenerate = states[0].omega_n().l2_norm() == T::zero()
        && states[0].omega_s().l2_norm() == T::zero();
    let tol_n = T::lit(1e-3) * fn_[0].max(T::lit(1e-300));
    let tol_s = T::lit(1e-3) * fs_[0].max(T::lit(1e-300));
    let monotone = fn_.windows(2).all(|w| w[1] <= w[0] + tol_n)
        && fs_.windows(2).all(|w| w[1] <= w[0] + tol_s);
    Ok(SpectralDecayReport {
        times,
        high_band_fraction_n: fn_,
        high_band_fraction_s: fs_,
        monotone_after_start: monotone && !degenerate,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{make_initial_condition, taylor_green_vorticity, InitialCondition};
    use crate::spectral::{Grid, Representation};
    use std::sync::Arc;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn params(b: f64, b_prime: f64) -> PhysParams<f64> {
        PhysParams::new(1.0, 1.0, 0.01, 0.01, b, b_prime).unwrap()
    }

    fn random_state(n: usize, k_max: usize, amplitude: f64, seed: u64) -> TwoFluidState<f64> {
        let g = Grid::shared(n, TAU).unwrap();
        make_initial_condition(
            &InitialCondition::RandomBand {
                amplitude,
                k_max,
                spectral_slope: 2.0,
                seed,
            },
            &g,
        )
        .unwrap()
    }

    fn rest_state(n: usize) -> TwoFluidState<f64> {
        let g = Grid::shared(n, TAU).unwrap();
        let z = crate::spectral::ScalarField::zeros(&g, Representation::Spectral);
        TwoFluidState::new(0.0, z.clone(), z).unwrap()
    }

    #[test]
    fn rest_state_record_is_trivial() {
        let rec = DiagnosticsRecord::compute(&rest_state(16), &params(1.0, 1.0), 3.0).unwrap();
        assert_eq!(rec.energy, 0.0);
        assert_eq!(rec.enstrophy, 0.0);
        assert_eq!(rec.fric_diss, 0.0);
        assert_eq!(rec.bkm_integrand, 1.0);
        let res = energy_residual(&rec, &rec, 1e-3).unwrap();
        assert_eq!(res, 0.0);
        let res = enstrophy_residual(&rec, &rec, 1e-3).unwrap();
        assert_eq!(res, 0.0);
    }

    #[test]
    fn residuals_reject_bad_dt() {
        let rec = DiagnosticsRecord::compute(&rest_state(16), &params(0.0, 0.0), 3.0).unwrap();
        assert!(energy_residual(&rec, &rec, 0.0).is_err());
        assert!(enstrophy_residual(&rec, &rec, -1.0).is_err());
    }

    #[test]
    fn taylor_green_arithmetic_of_integrand() {
        // u_n = u_s, w = 2 cos x cos y: 1 + 0 + 2 + 2 = 5.
        let g = Grid::shared(64, TAU).unwrap();
        let w = taylor_green_vorticity(&g, 1.0);
        let st = TwoFluidState::new(0.0, w.clone(), w).unwrap();
        let v = bkm_integrand(&st).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
    }

    #[test]
    fn energy_components_match_taylor_green_closed_form() {
        let g = Grid::shared(64, TAU).unwrap();
        let w = taylor_green_vorticity(&g, 1.0);
        let st = TwoFluidState::new(0.0, w.clone(), w).unwrap();
        let p = params(0.0, 0.0);
        let rec = DiagnosticsRecord::compute(&st, &p, 3.0).unwrap();
        // ||w||^2 = 4 pi^2, |k|^2 = 2 -> ||u||^2 = 2 pi^2 per fluid, and
        // E = 1/2 (2 pi^2) + 1/2 (2 pi^2) = 2 pi^2.
        let expect_energy = TAU.powi(2) / 2.0;
        assert!((rec.energy - expect_energy).abs() < 1e-10 * expect_energy);
        let expect_z = 0.5 * (TAU.powi(2) + TAU.powi(2));
        assert!((rec.enstrophy - expect_z).abs() < 1e-10 * expect_z);
        // diss = rho nu ||w||^2.
        assert!((rec.diss_n - 0.01 * TAU.powi(2)).abs() < 1e-10);
        assert!((rec.linf_wn - 2.0).abs() < 1e-12);
        assert!(rec.momentum_x.abs() < 1e-13 && rec.momentum_y.abs() < 1e-13);
    }

    #[test]
    fn norms_two_routes_agree() {
        let st = random_state(48, 7, 1.3, 5);
        let w = st.omega_n();
        let spec_route = w.l2_norm();
        let phys_route = w.to_physical().l2_norm();
        assert!((spec_route - phys_route).abs() <= 1e-10 * spec_route);
        // m = 0 Sobolev matches L2.
        let s0 = sobolev_norm(w, 0.0).unwrap();
        assert!((s0 - spec_route).abs() <= 1e-12 * spec_route);
    }

    #[test]
    fn sobolev_single_mode_and_monotonicity() {
        let g = Grid::shared(32, TAU).unwrap();
        let f = crate::spectral::ScalarField::from_fn(&g, |x, _| x.sin()).into_spectral();
        let l2 = f.l2_norm();
        let h1 = sobolev_norm(&f, 1.0).unwrap();
        assert!((h1 - 2.0_f64.sqrt() * l2).abs() < 1e-12);
        let h2 = sobolev_norm(&f, 2.0).unwrap();
        let h3 = sobolev_norm(&f, 3.0).unwrap();
        assert!(h1 < h2 && h2 < h3);
    }

    #[test]
    fn fric_diss_exactly_zero_without_drag_or_slip() {
        let st = random_state(32, 5, 1.0, 9);
        // B = 0.
        let rec = DiagnosticsRecord::compute(&st, &params(0.0, 2.0), 3.0).unwrap();
        assert_eq!(rec.fric_diss, 0.0);
        // u_n = u_s.
        let g = st.grid().clone();
        let w = st.omega_n().clone();
        let sym = TwoFluidState::new(0.0, w.clone(), w).unwrap();
        let rec = DiagnosticsRecord::compute(&sym, &params(1.5, 0.5), 3.0).unwrap();
        assert_eq!(rec.fric_diss, 0.0);
        assert_eq!(rec.enstrophy_rhs, 0.0);
        let _ = g;
    }

    #[test]
    fn pointwise_enstrophy_rhs_tracks_consistent_route() {
        // Both routes discretize the same continuum functional; they may
        // only differ by the |w_s| aliasing, near 1e-2 relative at n = 64.
        let st = random_state(64, 8, 1.0, 21);
        let p = PhysParams::new(1.0, 1.5, 0.02, 0.015, 1.3, 0.8).unwrap();
        let rec = DiagnosticsRecord::compute(&st, &p, 3.0).unwrap();
        let pointwise = enstrophy_rhs_pointwise(&st, &p).unwrap();
        let scale = rec.enstrophy_rhs.abs().max(rec.fric_enstrophy).max(1e-30);
        assert!(
            (rec.enstrophy_rhs - pointwise).abs() <= 0.05 * scale,
            "routes diverged: consistent {:.6e}, pointwise {pointwise:.6e}",
            rec.enstrophy_rhs
        );
    }

    #[test]
    fn gronwall_decoupled_fit_is_zero() {
        // Z nonincreasing -> fitted C = 0 and the bound is the constant Z(0).
        let p = params(0.0, 0.0);
        let st = random_state(32, 5, 1.0, 3);
        let mut recs = Vec::new();
        let mut rec = DiagnosticsRecord::compute(&st, &p, 3.0).unwrap();
        rec.t = 0.0;
        recs.push(rec);
        for i in 1..5 {
            let mut r = rec;
            r.t = i as f64 * 0.1;
            r.enstrophy = rec.enstrophy * (1.0 - 0.05 * i as f64);
            recs.push(r);
        }
        let report = gronwall_enstrophy_bound(&recs).unwrap();
        assert_eq!(report.c_fit, 0.0);
        assert!(report.satisfied);
    }

    #[test]
    fn gronwall_bounds_growing_enstrophy() {
        let p = params(1.0, 1.0);
        let st = random_state(32, 5, 1.0, 3);
        let base = DiagnosticsRecord::compute(&st, &p, 3.0).unwrap();
        let mut recs = Vec::new();
        for i in 0..6 {
            let mut r = base;
            r.t = i as f64 * 0.1;
            r.enstrophy = base.enstrophy * (1.0 + 0.1 * i as f64);
            recs.push(r);
        }
        let report = gronwall_enstrophy_bound(&recs).unwrap();
        assert!(report.c_fit > 0.0);
        assert!(report.satisfied);
        for (r, b) in recs.iter().zip(&report.bound_curve) {
            assert!(r.enstrophy <= b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn high_band_fraction_heat_envelope() {
        // Pure heat flow: each mode decays like exp(-2 nu |k|^2 t), so the
        // high-band fraction must shrink; compare snapshots of the exact
        // semigroup.
        let g = Grid::shared(64, TAU).unwrap();
        let st0 = random_state(64, 20, 1.0, 13);
        let nu = 0.05;
        let make = |t: f64| -> TwoFluidState<f64> {
            let decay = |w: &crate::spectral::ScalarField<f64>| {
                let grid = w.grid();
                let n = grid.n();
                w.map_spectral(|idx, c| {
                    let (ix, iy) = (idx / n, idx % n);
                    c.scale((-nu * grid.k_squared(ix, iy) * t).exp())
                })
                .unwrap()
            };
            TwoFluidState::new(t, decay(st0.omega_n()), decay(st0.omega_s())).unwrap()
        };
        let states: Vec<_> = [0.0, 0.05, 0.1, 0.2].iter().map(|&t| make(t)).collect();
        let report = smoothing_monitor(&states).unwrap();
        assert!(report.monotone_after_start);
        assert!(!report.degenerate);
        assert!(report.high_band_fraction_n[3] < report.high_band_fraction_n[0]);
        let _ = g;
    }

    #[test]
    fn smoothing_monitor_flags_zero_data() {
        let states = vec![rest_state(16)];
        let report = smoothing_monitor(&states).unwrap();
        assert!(report.degenerate);
    }

    #[test]
    fn potential_estimate_zero_field_is_equality() {
        let st = rest_state(16);
        let check = bkm_potential_check(&st, 3.0).unwrap();
        assert_eq!(check.normal.lhs, 0.0);
        assert!(check.normal.satisfied);
    }

    #[test]
    fn potential_estimate_single_mode() {
        // w = sin x: lhs = ||grad u||_inf = 1, denominators O(1), so the
        // ratio is far below the frozen constant.
        let g = Grid::shared(64, TAU).unwrap();
        let w = crate::spectral::ScalarField::from_fn(&g, |x, _| x.sin()).into_spectral();
        let ratio = bkm_potential_ratio(&w, 3.0).unwrap();
        assert!(ratio > 0.0 && ratio < BKM_POTENTIAL_C);
        let st = TwoFluidState::new(0.0, w.clone(), w).unwrap();
        let check = bkm_potential_check(&st, 3.0).unwrap();
        assert!((check.normal.lhs - 1.0).abs() < 1e-12);
        assert!(check.normal.satisfied);
    }

    #[test]
    fn potential_holdout_corpus_satisfied_with_frozen_constant() {
        // 50 fresh fields (different master seed from calibration).
        use rand::{Rng, SeedableRng};
        let g = Grid::shared(64, TAU).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let k_max = rng.gen_range(2..=16);
            let slope = rng.gen_range(0.5..4.0);
            let amplitude = 10.0_f64.powf(rng.gen_range(-1.0..1.0));
            let field =
                crate::init::random_band_vorticity(&g, amplitude, k_max, slope, &mut rng)
                    .unwrap();
            worst = worst.max(bkm_potential_ratio(&field, 3.0).unwrap());
        }
        assert!(
            worst <= BKM_POTENTIAL_C,
            "holdout ratio {worst} exceeds frozen constant {BKM_POTENTIAL_C}"
        );
    }
}
