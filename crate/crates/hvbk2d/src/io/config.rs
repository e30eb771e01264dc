//! Run configuration: flat dotted-key text files, validated with defaults.
//!
//! Grammar: TOML-compatible dotted keys, one assignment per line, `#`
//! comments. Example:
//!
//! ```text
//! grid.n = 64
//! fluid.rho_n = 1.0
//! fluid.rho_s = 1.0
//! fluid.nu_n = 0.01
//! fluid.nu_s = 0.01
//! friction.b = 1.0
//! friction.b_prime = 1.0
//! time.dt = 1e-3
//! time.t_end = 2.0
//! init.kind = "random_band"
//! init.seed = 42
//! output.diag_path = "diag.csv"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::init::InitialCondition;
use crate::model::PhysParams;
use crate::real::Real;
use crate::timestepping::{IntegratorConfig, StepControl};

/// Picard section of a config file.
#[derive(Clone, Copy, Debug)]
pub struct PicardSettings<T: Real> {
    pub horizon: T,
    pub max_iters: usize,
    pub tol: T,
    pub quadrature_steps: usize,
}

impl<T: Real> Default for PicardSettings<T> {
    fn default() -> Self {
        Self {
            horizon: T::lit(0.1),
            max_iters: 12,
            tol: T::lit(1e-10),
            quadrature_steps: 64,
        }
    }
}

/// A fully validated run configuration with every default applied.
#[derive(Clone, Debug)]
pub struct RunConfig<T: Real> {
    pub grid_n: usize,
    pub grid_length: T,
    pub params: PhysParams<T>,
    pub dt: Option<T>,
    pub cfl: Option<T>,
    pub t_end: T,
    pub output_every: usize,
    pub checkpoint_every: usize,
    pub init_kind: String,
    pub init_params: BTreeMap<String, String>,
    pub seed: u64,
    pub sobolev_m: T,
    pub diag_path: Option<PathBuf>,
    pub checkpoint_dir: Option<PathBuf>,
    pub picard: PicardSettings<T>,
}

impl<T: Real> RunConfig<T> {
    /// The time-stepping configuration this run uses.
    pub fn integrator(&self) -> IntegratorConfig<T> {
        let step = match (self.dt, self.cfl) {
            (Some(dt), _) => StepControl::FixedDt(dt),
            (None, Some(c)) => StepControl::Cfl(c),
            (None, None) => unreachable!("validated: dt or cfl present"),
        };
        let mut cfg = IntegratorConfig::fixed_dt(T::one(), self.t_end);
        cfg.step = step;
        cfg.output_every = self.output_every;
        cfg.checkpoint_every = self.checkpoint_every;
        cfg.sobolev_m = self.sobolev_m;
        cfg
    }

    /// The parsed initial condition.
    pub fn initial_condition(&self) -> Result<InitialCondition<T>> {
        InitialCondition::from_kind(&self.init_kind, &self.init_params, self.seed)
    }

    /// Echo every effective parameter back in config syntax; parsing the
    /// echo reproduces this configuration exactly (no silent defaults).
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("grid.n", self.grid_n.to_string());
        push("grid.length", format!("{:.17e}", self.grid_length.as_f64()));
        push("fluid.rho_n", format!("{:.17e}", self.params.rho_n.as_f64()));
        push("fluid.rho_s", format!("{:.17e}", self.params.rho_s.as_f64()));
        push("fluid.nu_n", format!("{:.17e}", self.params.nu_n.as_f64()));
        push("fluid.nu_s", format!("{:.17e}", self.params.nu_s.as_f64()));
        push("friction.b", format!("{:.17e}", self.params.b.as_f64()));
        push(
            "friction.b_prime",
            format!("{:.17e}", self.params.b_prime.as_f64()),
        );
        push(
            "friction.abs_smoothing_eps",
            format!("{:.17e}", self.params.abs_smoothing_eps.as_f64()),
        );
        if let Some(dt) = self.dt {
            push("time.dt", format!("{:.17e}", dt.as_f64()));
        }
        if let Some(cfl) = self.cfl {
            push("time.cfl", format!("{:.17e}", cfl.as_f64()));
        }
        push("time.t_end", format!("{:.17e}", self.t_end.as_f64()));
        push("time.output_every", self.output_every.to_string());
        push("time.checkpoint_every", self.checkpoint_every.to_string());
        push("init.kind", format!("\"{}\"", self.init_kind));
        for (k, v) in &self.init_params {
            push(&format!("init.{k}"), format!("\"{v}\""));
        }
        push("init.seed", self.seed.to_string());
        push("sobolev_m", format!("{:.17e}", self.sobolev_m.as_f64()));
        if let Some(p) = &self.diag_path {
            push("output.diag_path", format!("\"{}\"", p.display()));
        }
        if let Some(p) = &self.checkpoint_dir {
            push("output.checkpoint_dir", format!("\"{}\"", p.display()));
        }
        push("picard.horizon", format!("{:.17e}", self.picard.horizon.as_f64()));
        push("picard.max_iters", self.picard.max_iters.to_string());
        push("picard.tol", format!("{:.17e}", self.picard.tol.as_f64()));
        push(
            "picard.quadrature_steps",
            self.picard.quadrature_steps.to_string(),
        );
        out
    }
}

/// Flatten a parsed TOML table into dotted keys.
fn flatten(prefix: &str, value: &toml::Value, out: &mut BTreeMap<String, toml::Value>) {
    match value {
        toml::Value::Table(table) => {
            for (k, v) in table {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

struct Keys {
    map: BTreeMap<String, toml::Value>,
    used: std::collections::BTreeSet<String>,
}

impl Keys {
    fn take(&mut self, key: &str) -> Option<&toml::Value> {
        if self.map.contains_key(key) {
            self.used.insert(key.to_string());
            self.map.get(key)
        } else {
            None
        }
    }

    fn float<T: Real>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(T::lit(*f))),
            Some(toml::Value::Integer(i)) => Ok(Some(T::lit(*i as f64))),
            Some(other) => Err(Error::config(key, format!("expected a number, got {other}"))),
        }
    }

    fn float_required<T: Real>(&mut self, key: &str) -> Result<T> {
        self.float(key)?
            .ok_or_else(|| Error::config(key, "missing (no default)"))
    }

    fn integer(&mut self, key: &str) -> Result<Option<i64>> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => Ok(Some(*i)),
            Some(other) => {
                Err(Error::config(key, format!("expected an integer, got {other}")))
            }
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(Error::config(key, format!("expected a string, got {other}"))),
        }
    }
}

/// Parse and validate a configuration from text.
pub fn parse_config<T: Real>(text: &str) -> Result<RunConfig<T>> {
    let table: toml::Value = text
        .parse()
        .map_err(|e| Error::config("<file>", format!("parse error: {e}")))?;
    let mut flat = BTreeMap::new();
    flatten("", &table, &mut flat);
    let mut keys = Keys {
        map: flat,
        used: Default::default(),
    };

    let grid_n = match keys.integer("grid.n")? {
        Some(n) if n >= 8 && n % 2 == 0 => n as usize,
        Some(n) => {
            return Err(Error::config(
                "grid.n",
                format!("must be even and >= 8, got {n}"),
            ))
        }
        None => return Err(Error::config("grid.n", "missing (no default)")),
    };
    let grid_length = keys
        .float("grid.length")?
        .unwrap_or_else(|| T::lit(2.0) * T::PI());
    if !(grid_length > T::zero()) {
        return Err(Error::config("grid.length", "must be positive"));
    }

    let rho_n: T = keys.float_required("fluid.rho_n")?;
    let rho_s: T = keys.float_required("fluid.rho_s")?;
    let nu_n: T = keys.float_required("fluid.nu_n")?;
    let nu_s: T = keys.float_required("fluid.nu_s")?;
    let b = keys.float("friction.b")?.unwrap_or_else(T::zero);
    let b_prime = keys.float("friction.b_prime")?.unwrap_or_else(T::zero);
    let eps = keys
        .float("friction.abs_smoothing_eps")?
        .unwrap_or_else(T::zero);
    let params = PhysParams::new(rho_n, rho_s, nu_n, nu_s, b, b_prime)
        .and_then(|p| p.with_smoothing(eps))
        .map_err(|e| match e {
            Error::InvalidParameter { name, reason } => {
                let section = if name.starts_with("rho") || name.starts_with("nu") {
                    "fluid"
                } else {
                    "friction"
                };
                Error::config(format!("{section}.{name}"), reason)
            }
            other => other,
        })?;

    let dt = keys.float("time.dt")?;
    let cfl = keys.float("time.cfl")?;
    match (dt, cfl) {
        (Some(_), Some(_)) => {
            return Err(Error::config("time.dt", "give either time.dt or time.cfl, not both"))
        }
        (Some(d), None) if !(d > T::zero()) => {
            return Err(Error::config("time.dt", "must be positive"))
        }
        (None, Some(c)) if !(c > T::zero() && c <= T::one()) => {
            return Err(Error::config("time.cfl", "must be in (0, 1]"))
        }
        _ => {}
    }
    let t_end: T = keys.float_required("time.t_end")?;
    if t_end < T::zero() {
        return Err(Error::config("time.t_end", "must be >= 0"));
    }
    let output_every = match keys.integer("time.output_every")? {
        None => 1,
        Some(v) if v >= 1 => v as usize,
        Some(v) => {
            return Err(Error::config(
                "time.output_every",
                format!("must be >= 1, got {v}"),
            ))
        }
    };
    let checkpoint_every = match keys.integer("time.checkpoint_every")? {
        None => 0,
        Some(v) if v >= 0 => v as usize,
        Some(v) => {
            return Err(Error::config(
                "time.checkpoint_every",
                format!("must be >= 0, got {v}"),
            ))
        }
    };

    let init_kind = keys
        .string("init.kind")?
        .unwrap_or_else(|| "taylor_green".to_string());
    let seed = match keys.integer("init.seed")? {
        None => 0,
        Some(v) if v >= 0 => v as u64,
        Some(v) => return Err(Error::config("init.seed", format!("must be >= 0, got {v}"))),
    };
    // Kind-specific init parameters pass through as strings and are
    // validated by the initial-condition registry.
    let mut init_params = BTreeMap::new();
    let passthrough: Vec<String> = keys
        .map
        .keys()
        .filter(|k| k.starts_with("init.") && *k != "init.kind" && *k != "init.seed")
        .cloned()
        .collect();
    for key in passthrough {
        let value = keys.map.get(&key).expect("listed above");
        let rendered = match value {
            toml::Value::String(s) => s.clone(),
            toml::Value::Float(f) => format!("{f}"),
            toml::Value::Integer(i) => format!("{i}"),
            other => {
                return Err(Error::config(&key, format!("unsupported value: {other}")))
            }
        };
        init_params.insert(key.trim_start_matches("init.").to_string(), rendered);
        keys.used.insert(key);
    }

    let sobolev_m = keys.float("sobolev_m")?.unwrap_or_else(|| T::lit(3.0));
    if !(sobolev_m > T::lit(2.0)) {
        return Err(Error::config("sobolev_m", "the theory needs m > 2"));
    }

    let diag_path = keys.string("output.diag_path")?.map(PathBuf::from);
    let checkpoint_dir = keys.string("output.checkpoint_dir")?.map(PathBuf::from);

    let mut picard = PicardSettings::default();
    if let Some(h) = keys.float("picard.horizon")? {
        if !(h > T::zero()) {
            return Err(Error::config("picard.horizon", "must be positive"));
        }
        picard.horizon = h;
    }
    if let Some(v) = keys.integer("picard.max_iters")? {
        if v < 2 {
            return Err(Error::config("picard.max_iters", "must be >= 2"));
        }
        picard.max_iters = v as usize;
    }
    if let Some(t) = keys.float("picard.tol")? {
        if !(t > T::zero()) {
            return Err(Error::config("picard.tol", "must be positive"));
        }
        picard.tol = t;
    }
    if let Some(v) = keys.integer("picard.quadrature_steps")? {
        if v < 2 {
            return Err(Error::config("picard.quadrature_steps", "must be >= 2"));
        }
        picard.quadrature_steps = v as usize;
    }

    // Reject unknown keys: typos must not silently change a run.
    if let Some(unknown) = keys.map.keys().find(|k| !keys.used.contains(*k)) {
        return Err(Error::config(unknown, "unknown key"));
    }

    let config = RunConfig {
        grid_n,
        grid_length,
        params,
        dt,
        cfl: if dt.is_none() && cfl.is_none() {
            Some(T::lit(0.5)) // default step control
        } else {
            cfl
        },
        t_end,
        output_every,
        checkpoint_every,
        init_kind,
        init_params,
        seed,
        sobolev_m,
        diag_path,
        checkpoint_dir,
        picard,
    };
    // The initial condition must construct (unknown kinds error here).
    config.initial_condition()?;
    Ok(config)
}

/// Load and validate a configuration file.
pub fn load_config<T: Real>(path: impl AsRef<Path>) -> Result<RunConfig<T>> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_config(&text)
}
