//! Picard fixed-point machinery for the mild-solution form: the alternating
//! contraction maps, their measured contraction factor, the existence-time
//! probe, and Lipschitz dependence on initial data.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{PhysParams, TwoFluidState};
use crate::real::Real;
use crate::spectral::{curl, divergence, leray_project, Grid, ScalarField, VectorField};
use crate::timestepping::{cfl_dt, step};

/// Configuration of the fixed-point mode.
#[derive(Clone, Copy, Debug)]
pub struct PicardConfig<T: Real> {
    /// Horizon `T` of the trajectory space.
    pub horizon: T,
    /// Picard iterations to attempt (>= 2).
    pub max_iters: usize,
    /// Iteration stops once successive iterates differ by no more than this
    /// in the trajectory norm (absolute).
    pub tol: T,
    /// Uniform sample times for the Duhamel integral, endpoints included
    /// (>= 2; trapezoidal rule).
    pub quadrature_steps: usize,
    /// Sobolev index of the trajectory norm (the theory needs m > 2).
    pub sobolev_m: T,
}

impl<T: Real> PicardConfig<T> {
    pub fn new(horizon: T) -> Self {
        Self {
            horizon,
            max_iters: 12,
            tol: T::lit(1e-10),
            quadrature_steps: 64,
            sobolev_m: T::lit(3.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(Error::invalid(
                "picard.horizon",
                format!("must be > 0, got {}", self.horizon),
            ));
        }
        if self.max_iters < 2 {
            return Err(Error::invalid("picard.max_iters", "must be >= 2"));
        }
        if self.quadrature_steps < 2 {
            return Err(Error::invalid("picard.quadrature_steps", "must be >= 2"));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::invalid("picard.tol", "must be > 0"));
        }
        Ok(())
    }
}

/// A divergence-free velocity pair (the contraction's initial data).
#[derive(Clone, Debug)]
pub struct VelocityPair<T: Real> {
    pub u_n: VectorField<T>,
    pub u_s: VectorField<T>,
}

const DATA_DIV_TOL: f64 = 1e-8;

impl<T: Real> VelocityPair<T> {
    pub fn new(u_n: VectorField<T>, u_s: VectorField<T>) -> Result<Self> {
        u_n.grid().check_same(u_s.grid())?;
        for u in [&u_n, &u_s] {
            let norm = u.l2_norm();
            if norm > T::zero() {
                let fraction = divergence(u)?.l2_norm() / norm;
                if fraction > T::lit(DATA_DIV_TOL) {
                    return Err(Error::NotDivergenceFree {
                        fraction: fraction.as_f64(),
                        tol: DATA_DIV_TOL,
                    });
                }
            }
        }
        Ok(Self { u_n, u_s })
    }

    pub fn from_state(state: &TwoFluidState<T>) -> Result<Self> {
        let (u_n, u_s) = state.velocities()?;
        Self::new(u_n, u_s)
    }

    pub fn grid(&self) -> &std::sync::Arc<Grid<T>> {
        self.u_n.grid()
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        let scale = |v: &VectorField<T>| -> Result<VectorField<T>> {
            VectorField::new(
                v.x.map_spectral(|_, c| c.scale(factor))?,
                v.y.map_spectral(|_, c| c.scale(factor))?,
            )
        };
        Self::new(scale(&self.u_n)?, scale(&self.u_s)?)
    }

    /// `||u_n||_Hm + ||u_s||_Hm`.
    pub fn sobolev_norm(&self, m: T) -> Result<T> {
        Ok(crate::diagnostics::sobolev_norm_vec(&self.u_n, m)?
            + crate::diagnostics::sobolev_norm_vec(&self.u_s, m)?)
    }
}

/// Velocity-pair trajectory sampled at uniform times on `[0, horizon]`.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub horizon: T,
    pub samples: Vec<VelocityPair<T>>,
}

impl<T: Real> Trajectory<T> {
    fn sample_dt(&self) -> T {
        self.horizon / T::from_count(self.samples.len() - 1)
    }
}

/// Raw spectral copy of one velocity pair.
struct PairSpec<T: Real> {
    nx: Vec<Complex<T>>,
    ny: Vec<Complex<T>>,
    sx: Vec<Complex<T>>,
    sy: Vec<Complex<T>>,
}

fn pair_spec<T: Real>(p: &VelocityPair<T>) -> Result<PairSpec<T>> {
    Ok(PairSpec {
        nx: p.u_n.x.spectral_data()?.to_vec(),
        ny: p.u_n.y.spectral_data()?.to_vec(),
        sx: p.u_s.x.spectral_data()?.to_vec(),
        sy: p.u_s.y.spectral_data()?.to_vec(),
    })
}

/// Heat-semigroup decay factors `exp(-nu k^2 d h)` for every lag `d` of the
/// sample grid.
struct SemigroupTable<T: Real> {
    factors: Vec<Vec<T>>, // [lag][mode]
}

impl<T: Real> SemigroupTable<T> {
    fn new(grid: &Grid<T>, nu: T, h: T, lags: usize) -> Self {
        let n = grid.n();
        let mut factors = Vec::with_capacity(lags);
        for d in 0..lags {
            let t = h * T::from_count(d);
            let mut row = Vec::with_capacity(grid.size());
            for ix in 0..n {
                for iy in 0..n {
                    row.push((-nu * grid.k_squared(ix, iy) * t).exp());
                }
            }
            factors.push(row);
        }
        Self { factors }
    }

    fn apply(&self, lag: usize, data: &[Complex<T>]) -> Vec<Complex<T>> {
        self.factors[lag]
            .iter()
            .zip(data)
            .map(|(&e, c)| c.scale(e))
            .collect()
    }
}

/// The integrand of the Duhamel integral at one sample:
/// `G_n = P[(u_n.grad)u_n - (rho_s/rho) F]`,
/// `G_s = P[(u_s.grad)u_s + (rho_n/rho) F]`.
fn integrands<T: Real>(
    pair: &VelocityPair<T>,
    params: &PhysParams<T>,
) -> Result<(VectorField<T>, VectorField<T>)> {
    let omega_s = curl(&pair.u_s)?;
    let friction = crate::model::mutual_friction(&omega_s, &pair.u_n, &pair.u_s, params)?;
    let rho = params.rho();
    let cn = params.rho_s / rho;
    let cs = params.rho_n / rho;

    let advect = |u: &VectorField<T>| -> Result<VectorField<T>> {
        VectorField::new(
            crate::model::advection(u, &u.x)?,
            crate::model::advection(u, &u.y)?,
        )
    };
    let adv_n = advect(&pair.u_n)?;
    let adv_s = advect(&pair.u_s)?;

    let combine = |adv: &VectorField<T>, coeff: T| -> Result<VectorField<T>> {
        let comp = |a: &ScalarField<T>, f: &ScalarField<T>| -> Result<ScalarField<T>> {
            let fa = f.spectral_data()?;
            a.map_spectral(|i, c| c - fa[i].scale(coeff))
        };
        leray_project(&VectorField::new(
            comp(&adv.x, &friction.x)?,
            comp(&adv.y, &friction.y)?,
        )?)
    };
    Ok((combine(&adv_n, cn)?, combine(&adv_s, -cs)?))
}

/// One application of the pair of contraction maps: exact heat semigroups
/// plus a trapezoidal Duhamel integral of the guess trajectory's integrand.
pub fn picard_apply<T: Real>(
    guess: &Trajectory<T>,
    data: &VelocityPair<T>,
    params: &PhysParams<T>,
    cfg: &PicardConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    if guess.samples.len() != cfg.quadrature_steps {
        return Err(Error::invalid(
            "guess trajectory",
            format!(
                "expected {} samples, got {}",
                cfg.quadrature_steps,
                guess.samples.len()
            ),
        ));
    }
    let grid = data.grid();
    grid.check_same(guess.samples[0].grid())?;

    let qs = cfg.quadrature_steps;
    let h = guess.sample_dt();
    let table_n = SemigroupTable::new(grid, params.nu_n, h, qs);
    let table_s = SemigroupTable::new(grid, params.nu_s, h, qs);
    let data_spec = pair_spec(data)?;

    // Integrand samples, computed once.
    let mut g_samples = Vec::with_capacity(qs);
    for sample in &guess.samples {
        let (gn, gs) = integrands(sample, params)?;
        g_samples.push(pair_spec(&VelocityPair { u_n: gn, u_s: gs })?);
    }

    let half = T::lit(0.5);
    let mut samples = Vec::with_capacity(qs);
    for j in 0..qs {
        // Heat flow of the data.
        let mut nx = table_n.apply(j, &data_spec.nx);
        let mut ny = table_n.apply(j, &data_spec.ny);
        let mut sx = table_s.apply(j, &data_spec.sx);
        let mut sy = table_s.apply(j, &data_spec.sy);

        // Trapezoidal Duhamel integral over [0, t_j].
        if j > 0 {
            for (l, g) in g_samples.iter().take(j + 1).enumerate() {
                let w = if l == 0 || l == j { half * h } else { h };
                let lag = j - l;
                let en = table_n.apply(lag, &g.nx);
                let en_y = table_n.apply(lag, &g.ny);
                let es = table_s.apply(lag, &g.sx);
                let es_y = table_s.apply(lag, &g.sy);
                for i in 0..nx.len() {
                    nx[i] -= en[i].scale(w);
                    ny[i] -= en_y[i].scale(w);
                    sx[i] -= es[i].scale(w);
                    sy[i] -= es_y[i].scale(w);
                }
            }
        }

        let u_n = VectorField::new(
            ScalarField::from_spectral(grid, nx)?,
            ScalarField::from_spectral(grid, ny)?,
        )?;
        let u_s = VectorField::new(
            ScalarField::from_spectral(grid, sx)?,
            ScalarField::from_spectral(grid, sy)?,
        )?;
        samples.push(VelocityPair { u_n, u_s });
    }

    Ok(Trajectory {
        horizon: guess.horizon,
        samples,
    })
}

/// Heat-flow trajectory `t -> (e^{nu_n t lap} u_n0, e^{nu_s t lap} u_s0)`,
/// the iteration's starting guess.
pub fn heat_flow_trajectory<T: Real>(
    data: &VelocityPair<T>,
    params: &PhysParams<T>,
    cfg: &PicardConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let grid = data.grid();
    let qs = cfg.quadrature_steps;
    let h = cfg.horizon / T::from_count(qs - 1);
    let table_n = SemigroupTable::new(grid, params.nu_n, h, qs);
    let table_s = SemigroupTable::new(grid, params.nu_s, h, qs);
    let spec = pair_spec(data)?;
    let mut samples = Vec::with_capacity(qs);
    for j in 0..qs {
        samples.push(VelocityPair {
            u_n: VectorField::new(
                ScalarField::from_spectral(grid, table_n.apply(j, &spec.nx))?,
                ScalarField::from_spectral(grid, table_n.apply(j, &spec.ny))?,
            )?,
            u_s: VectorField::new(
                ScalarField::from_spectral(grid, table_s.apply(j, &spec.sx))?,
                ScalarField::from_spectral(grid, table_s.apply(j, &spec.sy))?,
            )?,
        });
    }
    Ok(Trajectory {
        horizon: cfg.horizon,
        samples,
    })
}

/// Weighted spectral sums of a trajectory difference, per fluid, combined
/// into the discrete contraction-space norm
/// `||u||_X = max_t ||u||_Hm + nu^(1/2) (int ||grad u||_Hm^2 dt)^(1/2)`,
/// summed over the two fluids.
pub fn trajectory_distance<T: Real>(
    a: &Trajectory<T>,
    b: &Trajectory<T>,
    params: &PhysParams<T>,
    m: T,
) -> Result<T> {
    if a.samples.len() != b.samples.len() {
        return Err(Error::invalid("trajectories", "sample counts differ"));
    }
    let grid = a.samples[0].grid();
    let n = grid.n();
    let l = grid.length();
    let h = a.sample_dt();
    let qs = a.samples.len();
    let half = T::lit(0.5);

    let mut sup_n = T::zero();
    let mut sup_s = T::zero();
    let mut diss_n = T::zero();
    let mut diss_s = T::zero();
    for j in 0..qs {
        let pa = &a.samples[j];
        let pb = &b.samples[j];
        let mut hm_n = T::zero();
        let mut hm_s = T::zero();
        let mut gr_n = T::zero();
        let mut gr_s = T::zero();
        let anx = pa.u_n.x.spectral_data()?;
        let any = pa.u_n.y.spectral_data()?;
        let asx = pa.u_s.x.spectral_data()?;
        let asy = pa.u_s.y.spectral_data()?;
        let bnx = pb.u_n.x.spectral_data()?;
        let bny = pb.u_n.y.spectral_data()?;
        let bsx = pb.u_s.x.spectral_data()?;
        let bsy = pb.u_s.y.spectral_data()?;
        for ix in 0..n {
            for iy in 0..n {
                let idx = ix * n + iy;
                let k2 = grid.k_squared(ix, iy);
                let w = (T::one() + k2).powf(m);
                let dn = (anx[idx] - bnx[idx]).norm_sqr() + (any[idx] - bny[idx]).norm_sqr();
                let ds = (asx[idx] - bsx[idx]).norm_sqr() + (asy[idx] - bsy[idx]).norm_sqr();
                hm_n += w * dn;
                hm_s += w * ds;
                gr_n += w * k2 * dn;
                gr_s += w * k2 * ds;
            }
        }
        sup_n = sup_n.max(hm_n);
        sup_s = sup_s.max(hm_s);
        let trap = if j == 0 || j == qs - 1 { half * h } else { h };
        diss_n += trap * gr_n;
        diss_s += trap * gr_s;
    }
    let l2 = l * l;
    Ok((sup_n * l2).sqrt()
        + (params.nu_n * diss_n * l2).sqrt()
        + (sup_s * l2).sqrt()
        + (params.nu_s * diss_s * l2).sqrt())
}

/// Outcome of a contraction-factor measurement.
#[derive(Clone, Debug)]
pub struct ContractionReport<T: Real> {
    /// `sup_j ||x_{j+1} - x_j|| / ||x_j - x_{j-1}||`; zero for degenerate
    /// (zero-data) input.
    pub factor: T,
    /// Successive-iterate distances.
    pub residuals: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Zero data: the fixed point is reached immediately and no factor can
    /// be measured.
    pub degenerate: bool,
    /// Iteration failed to contract within `max_iters` (factor >= 1). This
    /// is reported, not raised.
    pub non_contractive: bool,
}

/// Iterate the maps from the heat-flow guess and measure the contraction
/// factor in the trajectory norm.
pub fn contraction_factor<T: Real>(
    data: &VelocityPair<T>,
    params: &PhysParams<T>,
    cfg: &PicardConfig<T>,
) -> Result<ContractionReport<T>> {
    cfg.validate()?;
    let m = cfg.sobolev_m;
    if data.sobolev_norm(m)? == T::zero() {
        return Ok(ContractionReport {
            factor: T::zero(),
            residuals: Vec::new(),
            iterations: 0,
            converged: true,
            degenerate: true,
            non_contractive: false,
        });
    }

    let mut current = heat_flow_trajectory(data, params, cfg)?;
    let mut residuals: Vec<T> = Vec::new();
    let mut factor = T::zero();
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        let next = picard_apply(&current, data, params, cfg)?;
        let d = trajectory_distance(&next, &current, params, m)?;
        iterations += 1;
        if let Some(&d_prev) = residuals.last() {
            if d_prev > T::zero() {
                factor = factor.max(d / d_prev);
            }
        }
        residuals.push(d);
        current = next;
        if !d.is_finite() {
            factor = T::infinity();
            break;
        }
        if d <= cfg.tol {
            converged = true;
            break;
        }
    }
    let non_contractive = !converged && factor >= T::one();
    Ok(ContractionReport {
        factor,
        residuals,
        iterations,
        converged,
        degenerate: false,
        non_contractive,
    })
}

/// Existence-time probe: bisection on the horizon for `factor < 1`, plus
/// the measured scaling of the probed horizon against data amplitude.
#[derive(Clone, Debug)]
pub struct ExistenceProbe<T: Real> {
    /// Largest horizon (within the configured maximum) with factor < 1.
    pub t_max: T,
    /// `(largest contractive, smallest non-contractive)` horizons seen;
    /// equal when the configured maximum was contractive outright.
    pub bracket: (T, T),
    /// Probe repeated with the data amplitude doubled.
    pub t_max_doubled: T,
    /// `log2(t_max_doubled / t_max)`: near -2 when the existence time
    /// scales like the inverse square of the data norm.
    pub amplitude_exponent: T,
    /// Zero data: both probes return the configured maximum.
    pub degenerate: bool,
}

fn probe_one<T: Real>(
    data: &VelocityPair<T>,
    params: &PhysParams<T>,
    cfg: &PicardConfig<T>,
) -> Result<(T, (T, T))> {
    let contractive = |horizon: T| -> Result<bool> {
        let mut c = *cfg;
        c.horizon = horizon;
        let report = contraction_factor(data, params, &c)?;
        Ok(report.factor < T::one() && report.factor.is_finite())
    };
    if contractive(cfg.horizon)? {
        return Ok((cfg.horizon, (cfg.horizon, cfg.horizon)));
    }
    let mut lo = T::zero();
    let mut hi = cfg.horizon;
    for _ in 0..10 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid == lo || mid == hi {
            break;
        }
        if contractive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, (lo, hi)))
}

pub fn existence_time_probe<T: Real>(
    data: &VelocityPair<T>,
    params: &PhysParams<T>,
    cfg: &PicardConfig<T>,
) -> Result<ExistenceProbe<T>> {
    cfg.validate()?;
    if data.sobolev_norm(cfg.sobolev_m)? == T::zero() {
        return Ok(ExistenceProbe {
            t_max: cfg.horizon,
            bracket: (cfg.horizon, cfg.horizon),
            t_max_doubled: cfg.horizon,
            amplitude_exponent: T::zero(),
            degenerate: true,
        });
    }
    let (t_max, bracket) = probe_one(data, params, cfg)?;
    let doubled = data.scaled(T::lit(2.0))?;
    let (t_max_doubled, _) = probe_one(&doubled, params, cfg)?;
    let amplitude_exponent = if t_max > T::zero() && t_max_doubled > T::zero() {
        (t_max_doubled / t_max).log2()
    } else {
        T::nan()
    };
    Ok(ExistenceProbe {
        t_max,
        bracket,
        t_max_doubled,
        amplitude_exponent,
        degenerate: false,
    })
}

/// Lipschitz dependence of the solution map on initial data.
#[derive(Clone, Debug)]
pub struct LipschitzReport<T: Real> {
    /// `sup_t ||sol1 - sol2||_Hm / ||data1 - data2||_Hm` over `[0, T]`.
    pub sup_ratio: T,
    /// `(t, ratio)` samples along the run.
    pub samples: Vec<(T, T)>,
    /// Identical data; the ratio is reported as zero.
    pub identical: bool,
}

/// Integrate both data to time `t_end` and track the normalized solution
/// distance in `H^m` (on velocities).
pub fn lipschitz_data_probe<T: Real>(
    data1: &VelocityPair<T>,
    data2: &VelocityPair<T>,
    params: &PhysParams<T>,
    t_end: T,
    m: T,
) -> Result<LipschitzReport<T>> {
    data1.grid().check_same(data2.grid())?;
    if !(t_end > T::zero()) {
        return Err(Error::invalid("t_end", "must be > 0"));
    }
    let state_of = |d: &VelocityPair<T>| -> Result<TwoFluidState<T>> {
        TwoFluidState::new(T::zero(), curl(&d.u_n)?, curl(&d.u_s)?)
    };
    let mut s1 = state_of(data1)?;
    let mut s2 = state_of(data2)?;

    let dist = |a: &TwoFluidState<T>, b: &TwoFluidState<T>| -> Result<T> {
        let (an, as_) = a.velocities()?;
        let (bn, bs) = b.velocities()?;
        let dn = VectorField::new(
            an.x.map_spectral(|i, c| c - bn.x.spectral_data().unwrap()[i])?,
            an.y.map_spectral(|i, c| c - bn.y.spectral_data().unwrap()[i])?,
        )?;
        let ds = VectorField::new(
            as_.x.map_spectral(|i, c| c - bs.x.spectral_data().unwrap()[i])?,
            as_.y.map_spectral(|i, c| c - bs.y.spectral_data().unwrap()[i])?,
        )?;
        Ok(crate::diagnostics::sobolev_norm_vec(&dn, m)?
            + crate::diagnostics::sobolev_norm_vec(&ds, m)?)
    };

    let d0 = dist(&s1, &s2)?;
    if d0 == T::zero() {
        return Ok(LipschitzReport {
            sup_ratio: T::zero(),
            samples: vec![(T::zero(), T::zero())],
            identical: true,
        });
    }

    let quarter = T::lit(0.25);
    let dt_raw = cfl_dt(&s1, quarter)?
        .min(cfl_dt(&s2, quarter)?)
        .min(t_end / T::lit(16.0));
    let steps = (t_end / dt_raw).ceil().as_f64() as usize;
    let dt = t_end / T::from_count(steps.max(1));

    let mut sup_ratio = T::one();
    let mut samples = vec![(T::zero(), T::one())];
    for _ in 0..steps.max(1) {
        s1 = step(&s1, params, dt)?;
        s2 = step(&s2, params, dt)?;
        let ratio = dist(&s1, &s2)? / d0;
        sup_ratio = sup_ratio.max(ratio);
        samples.push((s1.t(), ratio));
    }
    Ok(LipschitzReport {
        sup_ratio,
        samples,
        identical: false,
    })
}
