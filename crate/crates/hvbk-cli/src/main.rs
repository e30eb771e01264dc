//! `hvbk`: drive two-fluid runs, fixed-point probes, and the bound checkers
//! from configuration files and checkpoints.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use hvbk2d::diagnostics::{DiagnosticsRecord, CSV_COLUMNS};
use hvbk2d::energybound::{energy_bound_check, MomentReport};
use hvbk2d::init::{make_initial_condition, InitialCondition, REGISTERED_KINDS};
use hvbk2d::io::{load_checkpoint, load_config, save_checkpoint, write_diagnostics_csv, RunConfig};
use hvbk2d::model::{PhysParams, TwoFluidState};
use hvbk2d::picard::{contraction_factor, existence_time_probe, PicardConfig, VelocityPair};
use hvbk2d::spectral::Grid;
use hvbk2d::timestepping::{run, DiagnosticsSink};

#[derive(Parser)]
#[command(
    name = "hvbk",
    about = "Pseudo-spectral solver and verification harness for the 2D incompressible two-fluid equations",
    version
)]
struct Cli {
    /// Override the initial-condition seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker-thread cap for parallel sections. The reference kernels are
    /// single-threaded and bitwise deterministic; values above 1 are
    /// accepted and ignored.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Suppress progress output (results still print).
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured run, writing diagnostics and checkpoints.
    Run { config: PathBuf },
    /// Measure the Picard contraction factor for the configured data.
    Picard { config: PathBuf },
    /// Bisect the largest contractive horizon and its amplitude scaling.
    ProbeExistence { config: PathBuf },
    /// Check the finite-kinetic-energy bound on a checkpoint file or a
    /// built-in initial-condition name.
    CheckEnergyBound { source: String },
    /// Generate an initial condition and save it as a checkpoint.
    Ic {
        kind: String,
        out: PathBuf,
        /// Grid resolution per side.
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Field amplitude.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
    },
    /// Print the diagnostics record of a checkpoint.
    Diag { checkpoint: PathBuf },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if cli.threads == 0 {
        bail!("--threads must be at least 1");
    }
    match &cli.command {
        Command::Run { config } => cmd_run(&cli, config),
        Command::Picard { config } => cmd_picard(&cli, config),
        Command::ProbeExistence { config } => cmd_probe(&cli, config),
        Command::CheckEnergyBound { source } => cmd_energy_bound(&cli, source),
        Command::Ic {
            kind,
            out,
            n,
            amplitude,
        } => cmd_ic(&cli, kind, out, *n, *amplitude),
        Command::Diag { checkpoint } => cmd_diag(checkpoint),
    }
}

fn load_run_config(cli: &Cli, path: &Path) -> anyhow::Result<RunConfig<f64>> {
    let mut cfg =
        load_config::<f64>(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn build_state(cfg: &RunConfig<f64>) -> anyhow::Result<TwoFluidState<f64>> {
    let grid = Grid::shared(cfg.grid_n, cfg.grid_length)?;
    Ok(make_initial_condition(&cfg.initial_condition()?, &grid)?)
}

/// Sink that buffers records and writes checkpoints as the run produces
/// snapshots.
struct RunSink {
    records: Vec<DiagnosticsRecord<f64>>,
    checkpoint_dir: Option<PathBuf>,
    params: PhysParams<f64>,
    written: usize,
    failure: Option<hvbk2d::Error>,
}

impl DiagnosticsSink<f64> for RunSink {
    fn record(&mut self, record: &DiagnosticsRecord<f64>) {
        self.records.push(*record);
    }

    fn snapshot(&mut self, state: &TwoFluidState<f64>) {
        if let Some(dir) = &self.checkpoint_dir {
            let path = dir.join(format!("checkpoint_{:08}.hvbk", self.written));
            if let Err(err) = save_checkpoint(state, &self.params, None, &path) {
                if self.failure.is_none() {
                    self.failure = Some(err);
                }
            }
            self.written += 1;
        }
    }
}

fn cmd_run(cli: &Cli, config_path: &Path) -> anyhow::Result<()> {
    let cfg = load_run_config(cli, config_path)?;
    if !cli.quiet {
        print!("effective configuration:\n{}", cfg.echo());
    }
    let state = build_state(&cfg)?;
    let mut sink = RunSink {
        records: Vec::new(),
        checkpoint_dir: cfg.checkpoint_dir.clone(),
        params: cfg.params,
        written: 0,
        failure: None,
    };
    let report = run(&state, &cfg.params, &cfg.integrator(), &mut sink);

    // Keep whatever diagnostics a failed run produced.
    let diag_path = cfg
        .diag_path
        .clone()
        .unwrap_or_else(|| PathBuf::from("diagnostics.csv"));
    if !sink.records.is_empty() {
        write_diagnostics_csv(&sink.records, &diag_path)?;
    }
    if let Some(err) = sink.failure.take() {
        return Err(err.into());
    }
    let report = report?;

    let final_path = cfg
        .checkpoint_dir
        .as_ref()
        .map(|d| d.join("final.hvbk"));
    if let Some(path) = &final_path {
        save_checkpoint(&report.final_state, &cfg.params, None, path)?;
    }

    if !cli.quiet {
        println!("steps: {}", report.steps);
        println!("records: {} -> {}", report.records_emitted, diag_path.display());
        if let Some(path) = &final_path {
            println!("final checkpoint: {}", path.display());
        }
        println!("wall seconds: {:.3}", report.wall_seconds);
    }
    println!(
        "max residuals: energy {:.3e}, enstrophy {:.3e}",
        report.max_residual_energy, report.max_residual_enstrophy
    );
    Ok(())
}

fn picard_config(cfg: &RunConfig<f64>) -> PicardConfig<f64> {
    let mut pc = PicardConfig::new(cfg.picard.horizon);
    pc.max_iters = cfg.picard.max_iters;
    pc.tol = cfg.picard.tol;
    pc.quadrature_steps = cfg.picard.quadrature_steps;
    pc.sobolev_m = cfg.sobolev_m;
    pc
}

fn cmd_picard(cli: &Cli, config_path: &Path) -> anyhow::Result<()> {
    let cfg = load_run_config(cli, config_path)?;
    let state = build_state(&cfg)?;
    let data = VelocityPair::from_state(&state)?;
    let report = contraction_factor(&data, &cfg.params, &picard_config(&cfg))?;
    println!("horizon: {:.6e}", cfg.picard.horizon);
    println!("iterations: {}", report.iterations);
    println!("converged: {}", report.converged);
    println!("degenerate: {}", report.degenerate);
    println!("non_contractive: {}", report.non_contractive);
    for (i, r) in report.residuals.iter().enumerate() {
        println!("residual[{i}]: {r:.6e}");
    }
    println!("contraction factor: {:.6e}", report.factor);
    Ok(())
}

fn cmd_probe(cli: &Cli, config_path: &Path) -> anyhow::Result<()> {
    let cfg = load_run_config(cli, config_path)?;
    let state = build_state(&cfg)?;
    let data = VelocityPair::from_state(&state)?;
    let probe = existence_time_probe(&data, &cfg.params, &picard_config(&cfg))?;
    println!("max horizon searched: {:.6e}", cfg.picard.horizon);
    println!("largest contractive horizon: {:.6e}", probe.t_max);
    println!(
        "bracket: [{:.6e}, {:.6e}]",
        probe.bracket.0, probe.bracket.1
    );
    println!("doubled-amplitude horizon: {:.6e}", probe.t_max_doubled);
    println!("amplitude exponent: {:+.4}", probe.amplitude_exponent);
    println!("degenerate: {}", probe.degenerate);
    Ok(())
}

fn print_moment_report(label: &str, report: &MomentReport<f64>) {
    println!("energy-bound check ({label})");
    println!("  ||w||_L2           : {:.10e}", report.l2_omega);
    println!("  int |x||w| (center): {:.10e}", report.moment1);
    println!("  int |x||w| (centroid): {:.10e}", report.moment1_centroid);
    println!("  ||u||_L2           : {:.10e}", report.l2_u);
    println!("  bound sqrt(.)      : {:.10e}", report.bound);
    println!("  cutoff K           : {:.10e}", report.cutoff_k);
    println!("  split low/high     : {:.10e} / {:.10e}", report.low_term, report.high_term);
    println!("  spill fraction     : {:.3e}", report.spill_fraction);
    println!("  satisfied          : {}", report.satisfied);
    println!(
        "row,{label},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
        report.l2_omega,
        report.moment1,
        report.l2_u,
        report.bound,
        report.cutoff_k,
        report.spill_fraction,
        report.satisfied
    );
}

fn cmd_energy_bound(cli: &Cli, source: &str) -> anyhow::Result<()> {
    if Path::new(source).exists() {
        let loaded = load_checkpoint::<f64>(source)?;
        print_moment_report("omega_n", &energy_bound_check(loaded.state.omega_n())?);
        print_moment_report("omega_s", &energy_bound_check(loaded.state.omega_s())?);
    } else if REGISTERED_KINDS.contains(&source) {
        let grid = Grid::shared(256, 2.0 * std::f64::consts::PI)?;
        let params = std::collections::BTreeMap::new();
        let ic = InitialCondition::<f64>::from_kind(source, &params, cli.seed.unwrap_or(0))?;
        let state = make_initial_condition(&ic, &grid)?;
        print_moment_report("omega_n", &energy_bound_check(state.omega_n())?);
    } else {
        bail!(
            "'{source}' is neither an existing checkpoint file nor a registered \
             initial-condition name ({})",
            REGISTERED_KINDS.join(", ")
        );
    }
    Ok(())
}

fn cmd_ic(cli: &Cli, kind: &str, out: &Path, n: usize, amplitude: f64) -> anyhow::Result<()> {
    let grid = Grid::shared(n, 2.0 * std::f64::consts::PI)?;
    let mut params = std::collections::BTreeMap::new();
    params.insert("amplitude".to_string(), amplitude.to_string());
    let ic = InitialCondition::<f64>::from_kind(kind, &params, cli.seed.unwrap_or(0))?;
    let state = make_initial_condition(&ic, &grid)?;
    // Neutral fluid parameters: the checkpoint format carries them, and a
    // consuming run overrides from its own config.
    let phys = PhysParams::new(1.0, 1.0, 0.01, 0.01, 0.0, 0.0)?;
    save_checkpoint(&state, &phys, None, out)?;
    if !cli.quiet {
        println!("wrote {kind} at n = {n} to {}", out.display());
    }
    Ok(())
}

fn cmd_diag(checkpoint: &Path) -> anyhow::Result<()> {
    let loaded = load_checkpoint::<f64>(checkpoint)?;
    let record = DiagnosticsRecord::compute(&loaded.state, &loaded.params, 3.0)?;
    let values = record.csv_values();
    for (name, value) in CSV_COLUMNS.iter().zip(values.iter()) {
        println!("{name:>20}: {value:.10e}");
    }
    println!("{}", CSV_COLUMNS.join(","));
    let row: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    println!("{}", row.join(","));
    Ok(())
}
