//! Long-time integration of the vorticity system: integrating-factor RK4
//! with the exact viscous semigroup, CFL step control, and the run loop.

use std::time::Instant;

use num_complex::Complex;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::model::{nonlinear_vorticity_rhs, PhysParams, TwoFluidState};
use crate::real::Real;
use crate::spectral::Grid;

/// Time integration scheme. The nonlinear and friction parts advance with
/// classical RK4; the stiff viscous part is applied exactly through the
/// diagonal spectral semigroup.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    #[default]
    IfRk4,
}

/// Step control: either a fixed `dt` or a CFL target.
#[derive(Clone, Copy, Debug)]
pub enum StepControl<T: Real> {
    FixedDt(T),
    Cfl(T),
}

#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig<T: Real> {
    pub step: StepControl<T>,
    pub t_end: T,
    pub scheme: Scheme,
    /// Steps between emitted diagnostics records (>= 1).
    pub output_every: usize,
    /// Steps between state snapshots handed to the sink; 0 disables them.
    pub checkpoint_every: usize,
    /// Sobolev index for the `hm_n`, `hm_s` diagnostics columns.
    pub sobolev_m: T,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn fixed_dt(dt: T, t_end: T) -> Self {
        Self {
            step: StepControl::FixedDt(dt),
            t_end,
            scheme: Scheme::IfRk4,
            output_every: 1,
            checkpoint_every: 0,
            sobolev_m: T::lit(3.0),
        }
    }

    pub fn cfl(cfl: T, t_end: T) -> Self {
        Self {
            step: StepControl::Cfl(cfl),
            ..Self::fixed_dt(T::one(), t_end)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.step {
            StepControl::FixedDt(dt) => {
                if !(dt > T::zero()) || !dt.is_finite() {
                    return Err(Error::invalid("time.dt", format!("must be > 0, got {dt}")));
                }
            }
            StepControl::Cfl(c) => {
                if !(c > T::zero() && c <= T::one()) {
                    return Err(Error::invalid(
                        "time.cfl",
                        format!("must be in (0, 1], got {c}"),
                    ));
                }
            }
        }
        if self.t_end < T::zero() || !self.t_end.is_finite() {
            return Err(Error::invalid(
                "time.t_end",
                format!("must be >= 0, got {}", self.t_end),
            ));
        }
        if self.output_every == 0 {
            return Err(Error::invalid("time.output_every", "must be >= 1"));
        }
        Ok(())
    }
}

/// Receives diagnostics records (and, at the checkpoint cadence, state
/// snapshots) as immutable views during a run.
pub trait DiagnosticsSink<T: Real> {
    fn record(&mut self, record: &DiagnosticsRecord<T>);
    fn snapshot(&mut self, _state: &TwoFluidState<T>) {}
}

/// In-memory sink; the default consumer for tests and the CLI.
#[derive(Default)]
pub struct MemorySink<T: Real> {
    pub records: Vec<DiagnosticsRecord<T>>,
    pub snapshots: Vec<TwoFluidState<T>>,
    pub keep_snapshots: bool,
}

impl<T: Real> MemorySink<T> {
    pub fn new() -> Self {
        Self {
            records: Vec::new(),
            snapshots: Vec::new(),
            keep_snapshots: false,
        }
    }

    pub fn with_snapshots() -> Self {
        Self {
            keep_snapshots: true,
            ..Self::new()
        }
    }
}

impl<T: Real> DiagnosticsSink<T> for MemorySink<T> {
    fn record(&mut self, record: &DiagnosticsRecord<T>) {
        self.records.push(*record);
    }

    fn snapshot(&mut self, state: &TwoFluidState<T>) {
        if self.keep_snapshots {
            self.snapshots.push(state.clone());
        }
    }
}

/// Summary of a completed integration.
#[derive(Clone, Debug)]
pub struct RunReport<T: Real> {
    pub final_state: TwoFluidState<T>,
    pub steps: usize,
    pub records_emitted: usize,
    pub wall_seconds: f64,
    pub max_residual_energy: T,
    pub max_residual_enstrophy: T,
}

/// Precomputed half-step viscous semigroup factors for one (grid, params,
/// dt) combination.
struct StepKernel<T: Real> {
    dt: T,
    half_n: Vec<T>,
    half_s: Vec<T>,
}

impl<T: Real> StepKernel<T> {
    fn new(grid: &Grid<T>, params: &PhysParams<T>, dt: T) -> Self {
        let n = grid.n();
        let half_dt = dt / T::lit(2.0);
        let mut half_n = Vec::with_capacity(grid.size());
        let mut half_s = Vec::with_capacity(grid.size());
        for ix in 0..n {
            for iy in 0..n {
                let k2 = grid.k_squared(ix, iy);
                half_n.push((-params.nu_n * k2 * half_dt).exp());
                half_s.push((-params.nu_s * k2 * half_dt).exp());
            }
        }
        Self { dt, half_n, half_s }
    }
}

fn apply_factor<T: Real>(factor: &[T], data: &[Complex<T>]) -> Vec<Complex<T>> {
    factor
        .iter()
        .zip(data)
        .map(|(&e, c)| c.scale(e))
        .collect()
}

fn axpy<T: Real>(y: &mut [Complex<T>], a: T, x: &[Complex<T>]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi.scale(a);
    }
}

/// One integrating-factor RK4 step of size `kernel.dt`.
fn step_kernel<T: Real>(
    state: &TwoFluidState<T>,
    params: &PhysParams<T>,
    kernel: &StepKernel<T>,
) -> Result<TwoFluidState<T>> {
    let grid = state.grid();
    let dt = kernel.dt;
    let half_dt = dt / T::lit(2.0);
    let sixth = dt / T::lit(6.0);

    let wn = state.omega_n().spectral_data()?;
    let ws = state.omega_s().spectral_data()?;

    let nl = |an: &[Complex<T>], as_: &[Complex<T>]| {
        nonlinear_vorticity_rhs(grid, an, as_, params)
    };

    // Stage 1.
    let (k1n, k1s) = nl(wn, ws);

    // Stage 2: E (w + dt/2 k1).
    let mut tn = wn.to_vec();
    let mut ts = ws.to_vec();
    axpy(&mut tn, half_dt, &k1n);
    axpy(&mut ts, half_dt, &k1s);
    let sn2 = apply_factor(&kernel.half_n, &tn);
    let ss2 = apply_factor(&kernel.half_s, &ts);
    let (k2n, k2s) = nl(&sn2, &ss2);

    // Stage 3: E w + dt/2 k2.
    let ew_n = apply_factor(&kernel.half_n, wn);
    let ew_s = apply_factor(&kernel.half_s, ws);
    let mut sn3 = ew_n.clone();
    let mut ss3 = ew_s.clone();
    axpy(&mut sn3, half_dt, &k2n);
    axpy(&mut ss3, half_dt, &k2s);
    let (k3n, k3s) = nl(&sn3, &ss3);

    // Stage 4: E^2 w + dt E k3.
    let mut sn4 = apply_factor(&kernel.half_n, &ew_n);
    let mut ss4 = apply_factor(&kernel.half_s, &ew_s);
    let ek3n = apply_factor(&kernel.half_n, &k3n);
    let ek3s = apply_factor(&kernel.half_s, &k3s);
    axpy(&mut sn4, dt, &ek3n);
    axpy(&mut ss4, dt, &ek3s);
    let (k4n, k4s) = nl(&sn4, &ss4);

    // Combine: E^2 w + dt/6 (E^2 k1 + 2 E (k2 + k3) + k4).
    let assemble = |half: &[T],
                    w: &[Complex<T>],
                    k1: &[Complex<T>],
                    k2: &[Complex<T>],
                    k3: &[Complex<T>],
                    k4: &[Complex<T>]| {
        let two = T::lit(2.0);
        let mut out = Vec::with_capacity(w.len());
        for i in 0..w.len() {
            let e = half[i];
            let e2 = e * e;
            let acc = (w[i].scale(e2))
                + (k1[i].scale(e2) + (k2[i] + k3[i]).scale(two * e) + k4[i]).scale(sixth);
            out.push(acc);
        }
        out
    };
    let mut new_n = assemble(&kernel.half_n, wn, &k1n, &k2n, &k3n, &k4n);
    let mut new_s = assemble(&kernel.half_s, ws, &k1s, &k2s, &k3s, &k4s);
    new_n[0] = Complex::default();
    new_s[0] = Complex::default();

    for buf in [&new_n, &new_s] {
        for c in buf.iter() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::Blowup {
                    t: state.t().as_f64(),
                    what: "non-finite spectral coefficient after step".into(),
                });
            }
        }
    }

    TwoFluidState::from_raw(state.t() + dt, grid, new_n, new_s)
}

/// Advance one step of size `dt`. On NaN/Inf the error carries the last
/// valid time.
pub fn step<T: Real>(
    state: &TwoFluidState<T>,
    params: &PhysParams<T>,
    dt: T,
) -> Result<TwoFluidState<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    let kernel = StepKernel::new(state.grid(), params, dt);
    step_kernel(state, params, &kernel)
}

/// CFL-limited step: `cfl * dx / max(||u_n||_inf, ||u_s||_inf, 1e-8)`.
pub fn cfl_dt<T: Real>(state: &TwoFluidState<T>, cfl: T) -> Result<T> {
    let (u_n, u_s) = state.velocities()?;
    let speed = u_n
        .linf_norm()
        .max(u_s.linf_norm())
        .max(T::lit(1e-8));
    Ok(cfl * state.grid().dx() / speed)
}

/// Blowup guard thresholds: beyond this the run is treated as a
/// discretization failure (the theory says no blowup occurs).
const BLOWUP_LINF: f64 = 1e12;

/// Integrate to `cfg.t_end`, emitting records and snapshots to the sink.
/// On blowup the error propagates; everything already emitted stays with
/// the sink.
pub fn run<T: Real, S: DiagnosticsSink<T>>(
    initial: &TwoFluidState<T>,
    params: &PhysParams<T>,
    cfg: &IntegratorConfig<T>,
    sink: &mut S,
) -> Result<RunReport<T>> {
    cfg.validate()?;
    let started = Instant::now();
    let mut state = initial.clone();
    let mut prev_record = DiagnosticsRecord::compute(&state, params, cfg.sobolev_m)?;
    sink.record(&prev_record);
    if cfg.checkpoint_every > 0 {
        sink.snapshot(&state);
    }
    let mut records_emitted = 1usize;
    let mut max_res_e = T::zero();
    let mut max_res_z = T::zero();
    let mut steps = 0usize;

    let mut kernel: Option<StepKernel<T>> = None;
    let snap = T::lit(1e-9);

    while state.t() < cfg.t_end {
        let remaining = cfg.t_end - state.t();
        let nominal = match cfg.step {
            StepControl::FixedDt(dt) => dt,
            StepControl::Cfl(c) => cfl_dt(&state, c)?,
        };
        let dt = if remaining <= nominal * (T::one() + snap) {
            remaining
        } else {
            nominal
        };

        let reuse = matches!(&kernel, Some(k) if k.dt == dt);
        if !reuse {
            kernel = Some(StepKernel::new(state.grid(), params, dt));
        }
        state = step_kernel(&state, params, kernel.as_ref().expect("just built"))?;
        steps += 1;

        let w_inf = state
            .omega_n()
            .linf_norm()
            .max(state.omega_s().linf_norm());
        if w_inf > T::lit(BLOWUP_LINF) {
            return Err(Error::Blowup {
                t: state.t().as_f64(),
                what: format!("vorticity sup norm {w_inf:e} beyond the blowup guard"),
            });
        }

        let at_end = state.t() >= cfg.t_end;
        if steps % cfg.output_every == 0 || at_end {
            let rec = DiagnosticsRecord::compute(&state, params, cfg.sobolev_m)?;
            let dt_records = rec.t - prev_record.t;
            let rec = DiagnosticsRecord::chain(&prev_record, rec, dt_records)?;
            sink.record(&rec);
            records_emitted += 1;
            max_res_e = max_res_e.max(rec.residual_energy);
            max_res_z = max_res_z.max(rec.residual_enstrophy);
            prev_record = rec;
        }
        if cfg.checkpoint_every > 0 && steps % cfg.checkpoint_every == 0 {
            sink.snapshot(&state);
        }
    }

    Ok(RunReport {
        final_state: state,
        steps,
        records_emitted,
        wall_seconds: started.elapsed().as_secs_f64(),
        max_residual_energy: max_res_e,
        max_residual_enstrophy: max_res_z,
    })
}
