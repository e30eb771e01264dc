//! Binary checkpoint container.
//!
//! Little-endian layout, fixed field order:
//! magic `"HVBK"` (4 bytes), version (u32), n (u32), length (f64), t (f64),
//! rho_n, rho_s, nu_n, nu_s, b, b_prime (f64 each), section flags (u32),
//! then the payload: `w_n`, `w_s` as real-space f64 arrays (n^2 entries
//! each, row-major, y fastest), plus `p_n`, `p_s` when flag bit 0 is set.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{PhysParams, TwoFluidState};
use crate::pressure::PressurePair;
use crate::real::Real;
use crate::spectral::{Grid, ScalarField};

pub const MAGIC: [u8; 4] = *b"HVBK";
pub const VERSION: u32 = 1;

const FLAG_PRESSURES: u32 = 1;

/// A checkpoint read back from disk. The smoothing epsilon is not part of
/// the container and comes back as zero; runs restore it from their config.
#[derive(Clone, Debug)]
pub struct LoadedCheckpoint<T: Real> {
    pub state: TwoFluidState<T>,
    pub params: PhysParams<T>,
    pub pressures: Option<PressurePair<T>>,
}

fn field_to_f64_samples<T: Real>(field: &ScalarField<T>) -> Result<Vec<f64>> {
    let physical = field.to_physical();
    Ok(physical
        .physical_data()?
        .iter()
        .map(|v| v.as_f64())
        .collect())
}

/// Serialize a state (and optionally its pressure fields) to `path`.
/// The write is atomic: a temporary file in the same directory is renamed
/// over the target.
pub fn save_checkpoint<T: Real>(
    state: &TwoFluidState<T>,
    params: &PhysParams<T>,
    pressures: Option<&PressurePair<T>>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let grid = state.grid();
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    buf.extend_from_slice(&grid.length().as_f64().to_le_bytes());
    buf.extend_from_slice(&state.t().as_f64().to_le_bytes());
    for v in [
        params.rho_n,
        params.rho_s,
        params.nu_n,
        params.nu_s,
        params.b,
        params.b_prime,
    ] {
        buf.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    let flags = if pressures.is_some() { FLAG_PRESSURES } else { 0 };
    buf.extend_from_slice(&flags.to_le_bytes());

    let mut write_field = |field: &ScalarField<T>| -> Result<()> {
        for v in field_to_f64_samples(field)? {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        Ok(())
    };
    write_field(state.omega_n())?;
    write_field(state.omega_s())?;
    if let Some(p) = pressures {
        write_field(&p.p_n)?;
        write_field(&p.p_s)?;
    }

    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp-write");
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(&buf)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn chunk(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.at + len > self.bytes.len() {
            return Err(Error::CheckpointTruncated {
                expected: self.at + len - self.bytes.len(),
                found: 0,
            });
        }
        let out = &self.bytes[self.at..self.at + len];
        self.at += len;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.chunk(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.chunk(8)?.try_into().unwrap()))
    }

    fn f64_array(&mut self, count: usize) -> Result<Vec<f64>> {
        let raw = self.chunk(count * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Read a checkpoint back. Magic, version, header sanity and payload sizes
/// are all validated with distinct errors.
pub fn load_checkpoint<T: Real>(path: impl AsRef<Path>) -> Result<LoadedCheckpoint<T>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path.as_ref())?.read_to_end(&mut bytes)?;
    let mut r = Reader {
        bytes: &bytes,
        at: 0,
    };

    let magic = r.chunk(4).map_err(|_| Error::CheckpointBadMagic)?;
    if magic != MAGIC {
        return Err(Error::CheckpointBadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::CheckpointVersion {
            found: version,
            expected: VERSION,
        });
    }
    let n = r.u32()? as usize;
    let length = r.f64()?;
    let t = r.f64()?;
    let rho_n = r.f64()?;
    let rho_s = r.f64()?;
    let nu_n = r.f64()?;
    let nu_s = r.f64()?;
    let b = r.f64()?;
    let b_prime = r.f64()?;
    let flags = r.u32()?;

    if !(8..=1 << 20).contains(&n) || n % 2 != 0 || !length.is_finite() || length <= 0.0 {
        return Err(Error::CheckpointHeader(format!(
            "implausible grid: n = {n}, length = {length}"
        )));
    }
    let grid = Grid::shared(n, T::lit(length))
        .map_err(|e| Error::CheckpointHeader(e.to_string()))?;
    let params = PhysParams::new(
        T::lit(rho_n),
        T::lit(rho_s),
        T::lit(nu_n),
        T::lit(nu_s),
        T::lit(b),
        T::lit(b_prime),
    )
    .map_err(|e| Error::CheckpointHeader(e.to_string()))?;

    let read_field = |r: &mut Reader| -> Result<ScalarField<T>> {
        let raw = r.f64_array(n * n)?;
        let values: Vec<T> = raw.into_iter().map(T::lit).collect();
        Ok(ScalarField::from_physical(&grid, values)?.into_spectral())
    };
    let omega_n = read_field(&mut r)?;
    let omega_s = read_field(&mut r)?;
    let pressures = if flags & FLAG_PRESSURES != 0 {
        let p_n = read_field(&mut r)?;
        let p_s = read_field(&mut r)?;
        Some(PressurePair { p_n, p_s })
    } else {
        None
    };

    let state = TwoFluidState::new(T::lit(t), omega_n, omega_s)?;
    Ok(LoadedCheckpoint {
        state,
        params,
        pressures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{make_initial_condition, InitialCondition};

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn sample_state() -> (TwoFluidState<f64>, PhysParams<f64>) {
        let g = Grid::shared(32, TAU).unwrap();
        let st = make_initial_condition(
            &InitialCondition::RandomBand {
                amplitude: 1.0,
                k_max: 6,
                spectral_slope: 2.0,
                seed: 5,
            },
            &g,
        )
        .unwrap();
        let p = PhysParams::new(1.0, 1.2, 0.01, 0.02, 1.0, 0.5).unwrap();
        (st, p)
    }

    #[test]
    fn round_trip_preserves_state_and_params() {
        let (st, p) = sample_state();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.hvbk");
        save_checkpoint(&st, &p, None, &path).unwrap();
        let loaded: LoadedCheckpoint<f64> = load_checkpoint(&path).unwrap();

        assert_eq!(loaded.params.rho_s, 1.2);
        assert_eq!(loaded.params.b_prime, 0.5);
        assert_eq!(loaded.state.t(), st.t());
        let worst: f64 = st
            .omega_n()
            .spectral_data()
            .unwrap()
            .iter()
            .zip(loaded.state.omega_n().spectral_data().unwrap())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = st.omega_n().l2_norm();
        assert!(
            worst <= 1e-13 * scale,
            "spectra drifted through the container: {worst:.3e}"
        );

        // Saving the loaded state reproduces the payload to a few ulps per
        // sample (exactly bitwise is out of reach: the payload is real-space
        // while the state is spectral, and a float FFT round trip is not the
        // identity map).
        let path2 = dir.path().join("state2.hvbk");
        save_checkpoint(&loaded.state, &loaded.params, None, &path2).unwrap();
        let (a, b) = (
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap(),
        );
        assert_eq!(a.len(), b.len());
        let header = 4 + 4 + 4 + 8 + 8 + 6 * 8 + 4;
        assert_eq!(a[..header], b[..header], "header must be bitwise stable");
        let samples = |bytes: &[u8]| -> Vec<f64> {
            bytes[header..]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect()
        };
        let max_abs = samples(&a).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let worst_sample = samples(&a)
            .iter()
            .zip(samples(&b).iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        assert!(
            worst_sample <= 1e-14 * max_abs,
            "payload unstable under save/load/save: {worst_sample:.3e} vs scale {max_abs:.3e}"
        );
    }

    #[test]
    fn pressures_section_round_trips() {
        let (st, p) = sample_state();
        let pressures = crate::pressure::solve_pressure(&st, &p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("with_p.hvbk");
        save_checkpoint(&st, &p, Some(&pressures), &path).unwrap();
        let loaded: LoadedCheckpoint<f64> = load_checkpoint(&path).unwrap();
        let lp = loaded.pressures.expect("pressure section present");
        let scale = pressures.p_n.l2_norm().max(1e-300);
        assert!((lp.p_n.l2_norm() - pressures.p_n.l2_norm()).abs() <= 1e-12 * scale);
    }

    #[test]
    fn truncated_payload_is_detected() {
        let (st, p) = sample_state();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.hvbk");
        save_checkpoint(&st, &p, None, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 100);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_checkpoint::<f64>(&path),
            Err(Error::CheckpointTruncated { .. })
        ));
    }

    #[test]
    fn version_mismatch_is_detected() {
        let (st, p) = sample_state();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ver.hvbk");
        save_checkpoint(&st, &p, None, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_checkpoint::<f64>(&path),
            Err(Error::CheckpointVersion { found: 2, .. })
        ));
    }

    #[test]
    fn bad_magic_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.hvbk");
        std::fs::write(&path, b"NOPE-and-then-some-junk").unwrap();
        assert!(matches!(
            load_checkpoint::<f64>(&path),
            Err(Error::CheckpointBadMagic)
        ));
    }
}
