//! Command-line front end: one subcommand per protocol plus
//! figure-reproduction and validation commands. Every run writes CSV
//! series files and a `run.json` manifest embedding the fully resolved
//! configuration, the seed and all scalar results, so any number in any
//! CSV can be regenerated from the manifest alone.
//!
//! Exit codes: 0 success, 2 configuration errors (unknown key, bad
//! value), 3 integrator invariant breaches (step too coarse, conserved
//! quantity drifting), 1 anything else.

pub mod config;
mod figures;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::dynamics::{evolve_schrodinger, IntegratorConfig};
use crate::error::Error;
use crate::protocols::{
    detection_scan, initialize_ensemble, memory_transfer, rotate_spin, tomography, validate_rwa,
    DetectionConfig, DetectionScan, RotationSpec, ShotMode, TransferEngine,
};
use crate::qstate::Qubit2State;

use config::{ConfigError, RunConfig};
use output::{write_csv, Manifest};

/// Acceptance threshold on the exact-vs-effective population deviation.
pub const RWA_DEVIATION_THRESHOLD: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "fluxspin", version, about = "Dressed flux-qubit / NV-spin coupling simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Configuration file (flat `key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Inline overrides, repeatable: --set key=value.
    #[arg(long, global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Override the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for scans and ensembles (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan the drive amplitude and locate the dressed resonance.
    Detect,
    /// Initialize the spin into |0⟩, Haar-averaged over inputs.
    Init,
    /// Store a flux-qubit state in the spin and report the fidelity.
    Memory,
    /// Rotate an arbitrary spin state through the flux qubit.
    Rotate,
    /// Reconstruct a spin state by flux-qubit tomography.
    Tomo,
    /// Compare the exact and secular generators at fixed detunings.
    ValidateRwa,
    /// Reproduce one of the registered figures (fig2 … fig9b).
    Figure {
        key: String,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Sim(Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Sim(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Sim(Error::StepTooLarge { .. } | Error::IntegrationBreach { .. }) => 3,
            CliError::Sim(_) => 1,
            CliError::Io(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Sim(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)?;
        cfg.apply_text(&text)?;
    }
    for assignment in &cli.set {
        let Some((k, v)) = assignment.split_once('=') else {
            return Err(ConfigError(format!("--set expects key=value, got `{assignment}`")).into());
        };
        cfg.set(k.trim(), v)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn engine_from(cfg: &RunConfig) -> Result<TransferEngine, CliError> {
    Ok(TransferEngine::new(
        cfg.system_params(),
        cfg.bridge(),
        cfg.model,
        cfg.decoherence()?,
    ))
}

fn spin_init_state(cfg: &RunConfig) -> Qubit2State {
    match cfg.spin_init {
        0 => Qubit2State::ground(),
        _ => Qubit2State::excited(),
    }
}

/// File-name fragment for a detuning value ("0.5" → "0p5").
fn offset_tag(offset: f64) -> String {
    format!("{offset}").replace('.', "p").replace('-', "m")
}

/// Run one CLI invocation end to end.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        // Ignore failure: the pool may already exist in-process (tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let cfg = load_config(&cli)?;
    std::fs::create_dir_all(&cli.out)?;
    // The manifest embeds the fully resolved configuration; in particular
    // the drive amplitude default Ω = −δ is materialized.
    let mut resolved = cfg.clone();
    resolved.rabi = Some(cfg.resolved_rabi());
    let mut manifest = Manifest::new(
        command_name(&cli.command),
        resolved.serialize(),
        cfg.seed,
        cli.workers,
    );
    match &cli.command {
        Command::Detect => cmd_detect(&cfg, &cli.out, &mut manifest)?,
        Command::Init => cmd_init(&cfg, &cli.out, &mut manifest)?,
        Command::Memory => cmd_memory(&cfg, &cli.out, &mut manifest)?,
        Command::Rotate => cmd_rotate(&cfg, &mut manifest)?,
        Command::Tomo => cmd_tomo(&cfg, &mut manifest)?,
        Command::ValidateRwa => cmd_validate_rwa(&cfg, &cli.out, &mut manifest)?,
        Command::Figure { key } => figures::run_figure(key, &cfg, &cli.out, &mut manifest)?,
    }
    let path = manifest.write(&cli.out)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Detect => "detect",
        Command::Init => "init",
        Command::Memory => "memory",
        Command::Rotate => "rotate",
        Command::Tomo => "tomo",
        Command::ValidateRwa => "validate-rwa",
        Command::Figure { .. } => "figure",
    }
}

/// Thin a dense series for serialization (keeps every n-th point).
fn thin(series: &[f64], stride: usize) -> Vec<f64> {
    series.iter().step_by(stride.max(1)).cloned().collect()
}

/// Write the scan's dense traces plus one envelope file per detuning;
/// shared helper for `detect` and the detection figures.
fn write_detection_outputs(
    scan: &DetectionScan,
    g: f64,
    stem: &str,
    out: &std::path::Path,
    manifest: &mut Manifest,
    with_baseline_columns: bool,
) -> Result<(), CliError> {
    let thin_stride = 4;
    let mut headers: Vec<String> = vec!["t_in_coupling_periods".into()];
    let mut columns: Vec<Vec<f64>> = vec![thin(&scan.traces[0].times_in_periods(g), thin_stride)];
    for tr in &scan.traces {
        headers.push(format!("p1_det_{}", tr.offset));
        columns.push(thin(&tr.p1, thin_stride));
        if with_baseline_columns {
            headers.push(format!("p1_baseline_det_{}", tr.offset));
            columns.push(thin(&tr.baseline_p1, thin_stride));
        }
    }
    let name = format!("{stem}.csv");
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let column_refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    write_csv(&out.join(&name), &header_refs, &column_refs)?;
    manifest.push_file(&name);

    for tr in &scan.traces {
        let name = format!("{stem}_envelope_det_{}.csv", offset_tag(tr.offset));
        write_csv(
            &out.join(&name),
            &["t_in_coupling_periods", "upper", "lower", "baseline_upper", "baseline_lower"],
            &[
                &tr.envelope_times_in_periods(g),
                &tr.envelope.upper,
                &tr.envelope.lower,
                &tr.baseline_envelope.upper,
                &tr.baseline_envelope.lower,
            ],
        )?;
        manifest.push_file(&name);

        let tag = offset_tag(tr.offset);
        manifest.push_scalar(&format!("visibility_det_{tag}"), tr.visibility);
        manifest.push_scalar(&format!("min_upper_envelope_det_{tag}"), tr.min_upper);
        manifest.push_scalar(
            &format!("crosses_half_det_{tag}"),
            if tr.crosses_half { 1.0 } else { 0.0 },
        );
        manifest.push_scalar(&format!("baseline_separation_det_{tag}"), tr.baseline_separation);
    }
    match scan.resonant_offset {
        Some(off) => manifest.push_scalar("resonant_offset", off),
        None => manifest.push_value("resonant_offset", serde_json::Value::Null),
    }
    Ok(())
}

fn cmd_detect(
    cfg: &RunConfig,
    out: &std::path::Path,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let sp = cfg.system_params();
    let dcfg = DetectionConfig {
        offsets: cfg.detunings.clone(),
        spin_init: spin_init_state(cfg),
        model: cfg.model,
        periods: cfg.t_max.unwrap_or(4.0),
        ..DetectionConfig::default()
    };
    let scan = detection_scan(&dcfg, &sp, cfg.decoherence()?.as_ref(), &cfg.bridge())?;
    write_detection_outputs(&scan, sp.g, "detect", out, manifest, cfg.decoherence()?.is_some())?;
    match scan.resonant_offset {
        Some(off) => println!("detect: resonance at offset {off} (in units of g)"),
        None => println!("detect: no unique resonance in the scanned offsets"),
    }
    Ok(())
}

fn cmd_init(
    cfg: &RunConfig,
    out: &std::path::Path,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let engine = engine_from(cfg)?;
    let ens = initialize_ensemble(cfg.samples, cfg.iterations, cfg.seed, &engine)?;
    let rounds: Vec<f64> = (1..=ens.mean.len()).map(|k| k as f64).collect();
    write_csv(
        &out.join("init.csv"),
        &["iteration", "mean_fidelity", "std_error"],
        &[&rounds, &ens.mean, &ens.std_err],
    )?;
    manifest.push_file("init.csv");
    manifest.push_scalar("samples", ens.samples as f64);
    manifest.push_scalar("average_fidelity", ens.mean[0]);
    manifest.push_scalar("average_fidelity_std_error", ens.std_err[0]);
    manifest.push_scalar("average_fidelity_final", *ens.mean.last().unwrap());
    manifest
        .push_scalar("average_fidelity_final_std_error", *ens.std_err.last().unwrap());
    println!(
        "init: mean fidelity {:.4} ± {:.4} after 1 iteration, {:.4} ± {:.4} after {} ({} samples)",
        ens.mean[0],
        ens.std_err[0],
        ens.mean.last().unwrap(),
        ens.std_err.last().unwrap(),
        ens.mean.len(),
        ens.samples
    );
    Ok(())
}

fn cmd_memory(
    cfg: &RunConfig,
    out: &std::path::Path,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let engine = engine_from(cfg)?;
    let run = memory_transfer(cfg.alpha, cfg.phi, &engine)?;
    // Transfer trajectory for reference plotting.
    let rho0 = crate::qstate::JointDensityMatrix::new(crate::qstate::tensor(
        &Qubit2State::ground().density(),
        &Qubit2State::from_angles(cfg.alpha, cfg.phi).density(),
    ))
    .expect("valid product state");
    let traj = engine.half_period_trajectory(&rho0, 1)?;
    let p1 = traj.p1_series();
    let p_spin = traj.expectation_series(&crate::qstate::tensor(
        &(crate::qstate::pauli::id() + crate::qstate::pauli::sz()).scale(0.5),
        &crate::qstate::pauli::id(),
    ));
    write_csv(
        &out.join("memory.csv"),
        &["t_in_coupling_periods", "p1_flux_excited", "p_spin_excited"],
        &[&traj.times_in_periods(engine.sp.g), &p1, &p_spin],
    )?;
    manifest.push_file("memory.csv");
    manifest.push_scalar("memory_fidelity", run.fidelity);
    println!("memory: fidelity {:.6} at alpha = {}, phi = {}", run.fidelity, cfg.alpha, cfg.phi);
    Ok(())
}

fn cmd_rotate(cfg: &RunConfig, manifest: &mut Manifest) -> Result<(), CliError> {
    let engine = engine_from(cfg)?;
    let spin = Qubit2State::from_angles(cfg.theta, cfg.varphi);
    let run = rotate_spin(&spin, &RotationSpec::new(cfg.beta, cfg.chi), cfg.idle_us, &engine)?;
    let bloch = crate::qstate::bloch_vector(&run.final_spin);
    manifest.push_scalar("rotation_fidelity", run.fidelity);
    manifest.push_scalar("final_bloch_x", bloch[0]);
    manifest.push_scalar("final_bloch_y", bloch[1]);
    manifest.push_scalar("final_bloch_z", bloch[2]);
    println!("rotate: fidelity {:.6} for beta = {}, chi = {}", run.fidelity, cfg.beta, cfg.chi);
    Ok(())
}

fn cmd_tomo(cfg: &RunConfig, manifest: &mut Manifest) -> Result<(), CliError> {
    let engine = engine_from(cfg)?;
    let spin = Qubit2State::from_angles(cfg.theta, cfg.varphi);
    let mode = match cfg.shots {
        None => ShotMode::Exact,
        Some(n) => ShotMode::Shots(n),
    };
    let run = tomography(&spin, mode, cfg.seed, &engine)?;
    manifest.push_scalar("theta_hat", run.theta_hat);
    manifest.push_scalar("phi_hat", run.phi_hat);
    for (name, v) in [("spin_bloch", run.spin_bloch), ("flux_bloch", run.flux_bloch)] {
        manifest.push_scalar(&format!("{name}_x"), v[0]);
        manifest.push_scalar(&format!("{name}_y"), v[1]);
        manifest.push_scalar(&format!("{name}_z"), v[2]);
    }
    manifest.push_scalar("reconstruction_fidelity", run.reconstruction_fidelity);
    manifest.push_scalar("spin_reset_fidelity", run.spin_reset_fidelity);
    manifest.push_scalar("projected", if run.projected { 1.0 } else { 0.0 });
    if run.low_shot_warning {
        manifest.push_warning("shot count below 100: high-variance estimate");
    }
    println!(
        "tomo: theta_hat {:.6}, phi_hat {:.6}, reconstruction fidelity {:.6}",
        run.theta_hat, run.phi_hat, run.reconstruction_fidelity
    );
    Ok(())
}

fn cmd_validate_rwa(
    cfg: &RunConfig,
    out: &std::path::Path,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let sp = cfg.system_params();
    let t_max = cfg.t_max_sim(2.0);
    let offsets = [0.0, sp.g];
    let comparisons = validate_rwa(&sp, &offsets, t_max, 2048)?;
    let mut headers: Vec<String> = vec!["t_in_coupling_periods".into()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    columns.push(
        comparisons[0]
            .times
            .iter()
            .map(|t| t * sp.g / std::f64::consts::TAU)
            .collect(),
    );
    for cmp in &comparisons {
        headers.push(format!("p1plus_exact_det_{}", cmp.offset));
        columns.push(cmp.exact.clone());
        headers.push(format!("p1plus_effective_det_{}", cmp.offset));
        columns.push(cmp.effective.clone());
    }
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let column_refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    write_csv(&out.join("rwa.csv"), &header_refs, &column_refs)?;
    manifest.push_file("rwa.csv");
    manifest.push_scalar("deviation_threshold", RWA_DEVIATION_THRESHOLD);
    for cmp in &comparisons {
        let tag = offset_tag(cmp.offset);
        manifest.push_scalar(&format!("max_deviation_det_{tag}"), cmp.max_deviation);
        manifest.push_scalar(
            &format!("within_threshold_det_{tag}"),
            if cmp.max_deviation <= RWA_DEVIATION_THRESHOLD { 1.0 } else { 0.0 },
        );
        println!(
            "validate-rwa: offset {} -> max deviation {:.4} (threshold {})",
            cmp.offset, cmp.max_deviation, RWA_DEVIATION_THRESHOLD
        );
    }
    Ok(())
}

/// Closed-system doubly-excited population trace used by the slow/fast
/// time-scale figure.
pub(crate) fn doubly_excited_trace(
    cfg: &RunConfig,
    periods: f64,
) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    use crate::hamiltonians::build_rotating_full;
    use crate::qstate::{JointState, Ket4};
    use num_complex::Complex64 as C64;

    let sp = cfg.system_params();
    let h = build_rotating_full(&sp);
    let t_max = periods * sp.coupling_period();
    let base = IntegratorConfig::for_model(&h, t_max);
    // Record ~32 points per fast Rabi period so the inset stays resolved.
    let samples_per_rabi = std::f64::consts::TAU / sp.rabi.abs() / base.dt / 32.0;
    let icfg = base.with_stride(samples_per_rabi.floor().max(1.0) as usize);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi0 = JointState::new(Ket4::new(
        C64::from(0.0),
        C64::from(0.0),
        C64::new(s, 0.0),
        C64::new(s, 0.0),
    ))
    .expect("normalized");
    let traj = evolve_schrodinger(&h, &psi0, &icfg)?;
    let p11 = match &traj.states {
        crate::dynamics::States::Pure(v) => {
            v.iter().map(|st| st.overlap(&psi0)).collect::<Vec<f64>>()
        }
        _ => unreachable!(),
    };
    Ok((traj.times_in_periods(sp.g), p11))
}
