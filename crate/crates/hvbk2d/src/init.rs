//! Built-in initial conditions.

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::TwoFluidState;
use crate::real::Real;
use crate::spectral::{enforce_conjugate_symmetry, Grid, ScalarField};

/// Kinds accepted by config files and the `ic` subcommand.
pub const REGISTERED_KINDS: &[&str] = &[
    "taylor_green",
    "random_band",
    "gaussian_dipole",
    "counterflow",
];

/// Which fluid(s) a single-field initial condition populates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluidTarget {
    Both,
    NormalOnly,
    SuperfluidOnly,
}

/// A fully parameterized initial condition. String-keyed construction (for
/// configs) goes through [`InitialCondition::from_kind`].
#[derive(Clone, Debug)]
pub enum InitialCondition<T: Real> {
    /// `w = 2 A cos(2 pi x / L) cos(2 pi y / L)` on the chosen fluid(s);
    /// the advection term vanishes identically on this state.
    TaylorGreen { amplitude: T, fluids: FluidTarget },
    /// Zero-mean field with modes `1 <= |k| <= k_max`, unit-variance complex
    /// Gaussian coefficients shaped by `|k|^-slope`, then rescaled so each
    /// vorticity has L2 norm `amplitude`. The two fluids get independent
    /// draws from one seeded stream.
    RandomBand {
        amplitude: T,
        k_max: usize,
        spectral_slope: T,
        seed: u64,
    },
    /// `w = -2 A (y - y0) exp(-r^2 / sigma^2)`, zero mean by odd symmetry,
    /// placed at the box center unless given.
    GaussianDipole {
        amplitude: T,
        sigma: T,
        center: Option<(T, T)>,
    },
    /// Band-limited random field with `w_n = -w_s` (opposed rotation, the
    /// configuration that maximizes mutual friction).
    Counterflow {
        amplitude: T,
        k_max: usize,
        spectral_slope: T,
        seed: u64,
    },
}

impl<T: Real> InitialCondition<T> {
    /// Keys looked up in `params`: `amplitude`, `seed`, `k_max`,
    /// `spectral_slope`, `sigma`, `fluids`, `x0`, `y0` (kind-dependent).
    pub fn from_kind(
        kind: &str,
        params: &std::collections::BTreeMap<String, String>,
        default_seed: u64,
    ) -> Result<Self> {
        let get_f = |key: &str, default: f64| -> Result<T> {
            match params.get(key) {
                None => Ok(T::lit(default)),
                Some(raw) => raw.parse::<f64>().map(T::lit).map_err(|_| {
                    Error::config(format!("init.{key}"), format!("not a number: '{raw}'"))
                }),
            }
        };
        let get_usize = |key: &str, default: usize| -> Result<usize> {
            match params.get(key) {
                None => Ok(default),
                Some(raw) => raw.parse::<usize>().map_err(|_| {
                    Error::config(format!("init.{key}"), format!("not an integer: '{raw}'"))
                }),
            }
        };
        let seed = match params.get("seed") {
            None => default_seed,
            Some(raw) => raw.parse::<u64>().map_err(|_| {
                Error::config("init.seed", format!("not an integer: '{raw}'"))
            })?,
        };

        match kind {
            "taylor_green" => {
                let fluids = match params.get("fluids").map(String::as_str) {
                    None | Some("both") => FluidTarget::Both,
                    Some("normal") => FluidTarget::NormalOnly,
                    Some("superfluid") => FluidTarget::SuperfluidOnly,
                    Some(other) => {
                        return Err(Error::config(
                            "init.fluids",
                            format!("expected both|normal|superfluid, got '{other}'"),
                        ))
                    }
                };
                Ok(Self::TaylorGreen {
                    amplitude: get_f("amplitude", 1.0)?,
                    fluids,
                })
            }
            "random_band" => Ok(Self::RandomBand {
                amplitude: get_f("amplitude", 1.0)?,
                k_max: get_usize("k_max", 8)?,
                spectral_slope: get_f("spectral_slope", 3.0)?,
                seed,
            }),
            "gaussian_dipole" => Ok(Self::GaussianDipole {
                amplitude: get_f("amplitude", 1.0)?,
                sigma: get_f("sigma", 0.0)?, // 0 -> L/20 at build time
                center: match (params.get("x0"), params.get("y0")) {
                    (None, None) => None,
                    _ => Some((get_f("x0", 0.0)?, get_f("y0", 0.0)?)),
                },
            }),
            "counterflow" => Ok(Self::Counterflow {
                amplitude: get_f("amplitude", 1.0)?,
                k_max: get_usize("k_max", 8)?,
                spectral_slope: get_f("spectral_slope", 3.0)?,
                seed,
            }),
            other => Err(Error::UnknownInitKind {
                kind: other.to_string(),
                registered: REGISTERED_KINDS.join(", "),
            }),
        }
    }
}

/// Build the two-fluid state at `t = 0` for an initial condition.
pub fn make_initial_condition<T: Real>(
    ic: &InitialCondition<T>,
    grid: &Arc<Grid<T>>,
) -> Result<TwoFluidState<T>> {
    match ic {
        InitialCondition::TaylorGreen { amplitude, fluids } => {
            let w = taylor_green_vorticity(grid, *amplitude);
            let zero = ScalarField::zeros(grid, crate::spectral::Representation::Spectral);
            let (wn, ws) = match fluids {
                FluidTarget::Both => (w.clone(), w),
                FluidTarget::NormalOnly => (w, zero),
                FluidTarget::SuperfluidOnly => (zero, w),
            };
            TwoFluidState::new(T::zero(), wn, ws)
        }
        InitialCondition::RandomBand {
            amplitude,
            k_max,
            spectral_slope,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let wn = random_band_vorticity(grid, *amplitude, *k_max, *spectral_slope, &mut rng)?;
            let ws = random_band_vorticity(grid, *amplitude, *k_max, *spectral_slope, &mut rng)?;
            TwoFluidState::new(T::zero(), wn, ws)
        }
        InitialCondition::GaussianDipole {
            amplitude,
            sigma,
            center,
        } => {
            let w = gaussian_dipole_vorticity(grid, *amplitude, *sigma, *center);
            TwoFluidState::new(T::zero(), w.clone(), w)
        }
        InitialCondition::Counterflow {
            amplitude,
            k_max,
            spectral_slope,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let ws = random_band_vorticity(grid, *amplitude, *k_max, *spectral_slope, &mut rng)?;
            let wn = ws.map_spectral(|_, c| -c)?;
            TwoFluidState::new(T::zero(), wn, ws)
        }
    }
}

/// `w = 2 A cos(2 pi x / L) cos(2 pi y / L)` as a spectral field: four modes
/// at `(+-1, +-1)` with coefficient `A/2` each.
pub fn taylor_green_vorticity<T: Real>(grid: &Arc<Grid<T>>, amplitude: T) -> ScalarField<T> {
    let n = grid.n();
    let mut spec = vec![Complex::default(); grid.size()];
    let c = Complex::new(amplitude / T::lit(2.0), T::zero());
    for ix in [1, n - 1] {
        for iy in [1, n - 1] {
            spec[ix * n + iy] = c;
        }
    }
    ScalarField::from_spectral(grid, spec).expect("sized to grid")
}

/// Band-limited random vorticity, exactly zero-mean and normalized to
/// `||w||_L2 = amplitude` (unless every coefficient in the band vanished).
pub fn random_band_vorticity<T: Real>(
    grid: &Arc<Grid<T>>,
    amplitude: T,
    k_max: usize,
    spectral_slope: T,
    rng: &mut impl Rng,
) -> Result<ScalarField<T>> {
    if k_max < 1 {
        return Err(Error::config("init.k_max", "must be >= 1"));
    }
    let band_limit = (grid.n() / 2).saturating_sub(1);
    if k_max > band_limit {
        return Err(Error::config(
            "init.k_max",
            format!("must be <= n/2 - 1 = {band_limit}"),
        ));
    }
    let n = grid.n();
    let mut spec = vec![Complex::default(); grid.size()];
    // Deterministic draw order: all modes in (ix, iy) order. Normals are
    // drawn in f64 and narrowed, so f32 and f64 builds see the same field.
    for ix in 0..n {
        for iy in 0..n {
            let jx = if ix < n / 2 { ix as i64 } else { ix as i64 - n as i64 };
            let jy = if iy < n / 2 { iy as i64 } else { iy as i64 - n as i64 };
            let k2 = (jx * jx + jy * jy) as f64;
            if k2 < 1.0 || k2 > (k_max * k_max) as f64 {
                continue;
            }
            let (g1, g2) = gaussian_pair(rng);
            let shape = T::lit(k2.sqrt()).powf(-spectral_slope);
            spec[ix * n + iy] = Complex::new(
                T::lit(g1) * shape,
                T::lit(g2) * shape,
            );
        }
    }
    enforce_conjugate_symmetry(&mut spec, n);
    spec[0] = Complex::default();

    let mut field = ScalarField::from_spectral(grid, spec)?;
    let norm = field.l2_norm();
    if norm > T::zero() {
        let scale = amplitude / norm;
        field = field.map_spectral(|_, c| c.scale(scale))?;
    }
    Ok(field)
}

/// Box-Muller pair of standard normals, drawn in f64.
fn gaussian_pair(rng: &mut impl Rng) -> (f64, f64) {
    let u1: f64 = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// `w = -2 A (y - y0) exp(-r^2 / sigma^2)`, spectral with exact zero mean.
/// `sigma <= 0` selects the default `L/20`.
pub fn gaussian_dipole_vorticity<T: Real>(
    grid: &Arc<Grid<T>>,
    amplitude: T,
    sigma: T,
    center: Option<(T, T)>,
) -> ScalarField<T> {
    let length = grid.length();
    let sigma = if sigma > T::zero() {
        sigma
    } else {
        length / T::lit(20.0)
    };
    let half = length / T::lit(2.0);
    let (x0, y0) = center.unwrap_or((half, half));
    let two = T::lit(2.0);
    let mut field = ScalarField::from_fn(grid, |x, y| {
        let dx = x - x0;
        let dy = y - y0;
        let r2 = dx * dx + dy * dy;
        -two * amplitude * dy * (-r2 / (sigma * sigma)).exp()
    })
    .into_spectral();
    field
        .zero_mean_mode()
        .expect("spectral representation just built");
    field
}
