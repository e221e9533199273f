//! Figure registry: canned runs that regenerate the reference plots'
//! data. Each key pins its own protocol settings (detunings, decoherence
//! times, initial states); the run configuration only supplies the
//! system parameters, unit bridge and seed.
//!
//! Keys: fig2, fig3-left, fig3-right, fig4, fig5, fig6, fig7, fig8,
//! fig9a, fig9b.

use std::path::Path;

use crate::dynamics::rates_from_times;
use crate::protocols::{
    detection_scan, memory_transfer, rwa_comparison, DetectionConfig, ModelKind, TransferEngine,
};
use crate::qstate::Qubit2State;

use super::config::{ConfigError, RunConfig};
use super::output::{write_csv, Manifest};
use super::{doubly_excited_trace, write_detection_outputs, CliError};

pub const FIGURE_KEYS: [&str; 10] = [
    "fig2",
    "fig3-left",
    "fig3-right",
    "fig4",
    "fig5",
    "fig6",
    "fig7",
    "fig8",
    "fig9a",
    "fig9b",
];

pub fn run_figure(
    key: &str,
    cfg: &RunConfig,
    out: &Path,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    match key {
        "fig2" => fig2(cfg, out, manifest),
        "fig3-left" => fig3(cfg, out, manifest, 0.0, "fig3-left"),
        "fig3-right" => fig3(cfg, out, manifest, cfg.system_params().g, "fig3-right"),
        "fig4" => fig4(cfg, out, manifest),
        "fig5" => fig_detection(cfg, out, manifest, "fig5", None, 0),
        "fig6" => fig_detection(cfg, out, manifest, "fig6", Some((20.0, 15.0)), 0),
        "fig7" => fig7(cfg, out, manifest),
        "fig8" => fig8(cfg, out, manifest),
        "fig9a" => fig9a(cfg, out, manifest),
        "fig9b" => fig9b(cfg, out, manifest),
        _ => Err(ConfigError(format!(
            "unknown figure key `{key}` (expected one of {})",
            FIGURE_KEYS.join(", ")
        ))
        .into()),
    }
}

/// Slow collapse-revival of the doubly excited population with the fast
/// Rabi oscillation riding on top.
fn fig2(cfg: &RunConfig, out: &Path, manifest: &mut Manifest) -> Result<(), CliError> {
    let (times, p11) = doubly_excited_trace(cfg, 2.0)?;
    write_csv(&out.join("fig2.csv"), &["t_in_coupling_periods", "p_11"], &[&times, &p11])?;
    manifest.push_file("fig2.csv");
    let min = p11.iter().cloned().fold(f64::INFINITY, f64::min);
    manifest.push_scalar("p11_min", min);
    println!("figure fig2: {} samples, deepest collapse {:.4}", times.len(), min);
    Ok(())
}

/// Exact vs secular populations of |1,+⟩ at one detuning.
fn fig3(
    cfg: &RunConfig,
    out: &Path,
    manifest: &mut Manifest,
    offset: f64,
    stem: &str,
) -> Result<(), CliError> {
    let sp = cfg.system_params();
    let cmp = rwa_comparison(&sp, offset, cfg.t_max_sim(2.0), 2048)?;
    let times: Vec<f64> = cmp.times.iter().map(|t| t * sp.g / std::f64::consts::TAU).collect();
    let name = format!("{stem}.csv");
    write_csv(
        &out.join(&name),
        &["t_in_coupling_periods", "p1plus_exact", "p1plus_effective"],
        &[&times, &cmp.exact, &cmp.effective],
    )?;
    manifest.push_file(&name);
    manifest.push_scalar("max_deviation", cmp.max_deviation);
    println!("figure {stem}: max deviation {:.4}", cmp.max_deviation);
    Ok(())
}

/// Damped dressed-frame P₁ at resonance for a spin prepared in |1⟩.
fn fig4(cfg: &RunConfig, out: &Path, manifest: &mut Manifest) -> Result<(), CliError> {
    fig_detection_impl(cfg, out, manifest, "fig4", Some((20.0, 15.0)), 1, vec![0.0])
}

fn fig_detection(
    cfg: &RunConfig,
    out: &Path,
    manifest: &mut Manifest,
    stem: &str,
    dec: Option<(f64, f64)>,
    spin_init: u8,
) -> Result<(), CliError> {
    fig_detection_impl(cfg, out, manifest, stem, dec, spin_init, vec![0.0, 0.5, 1.0, 2.0])
}

fn fig_detection_impl(
    cfg: &RunConfig,
    out: &Path,
    manifest: &mut Manifest,
    stem: &str,
    dec: Option<(f64, f64)>,
    spin_init: u8,
    offsets: Vec<f64>,
) -> Result<(), CliError> {
    let sp = cfg.system_params();
    let dec = match dec {
        Some((t1, tnu)) => Some(rates_from_times(t1, tnu)?),
        None => None,
    };
    let dcfg = DetectionConfig {
        offsets,
        spin_init: if spin_init == 0 { Qubit2State::ground() } else { Qubit2State::excited() },
        model: cfg.model,
        periods: cfg.t_max.unwrap_or(4.0),
        ..DetectionConfig::default()
    };
    let scan = detection_scan(&dcfg, &sp, dec.as_ref(), &cfg.bridge())?;
    write_detection_outputs(&scan, sp.g, stem, out, manifest, dec.is_some())?;
    println!("figure {stem}: {} detuning(s), verdict {:?}", scan.traces.len(), scan.resonant_offset);
    Ok(())
}

/// Resonant detection for decreasing T₁ at fixed T_ν = 15 μs.
fn fig7(cfg: &RunConfig, out: &Path, manifest: &mut Manifest) -> Result<(), CliError> {
    let sp = cfg.system_params();
    let mut headers: Vec<String> = vec!["t_in_coupling_periods".into()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (k, t1) in [20.0, 10.0, 5.0, 2.0].into_iter().enumerate() {
        let dec = rates_from_times(t1, 15.0)?;
        let dcfg = DetectionConfig {
            offsets: vec![0.0],
            spin_init: Qubit2State::ground(),
            model: cfg.model,
            periods: cfg.t_max.unwrap_or(4.0),
            ..DetectionConfig::default()
        };
        let scan = detection_scan(&dcfg, &sp, Some(&dec), &cfg.bridge())?;
        let tr = &scan.traces[0];
        if k == 0 {
            columns.push(
                tr.times_in_periods(sp.g).iter().step_by(4).cloned().collect(),
            );
        }
        headers.push(format!("p1_t1_{t1}us"));
        columns.push(tr.p1.iter().step_by(4).cloned().collect());
        headers.push(format!("p1_baseline_t1_{t1}us"));
        columns.push(tr.baseline_p1.iter().step_by(4).cloned().collect());

        let name = format!("fig7_envelope_t1_{t1}us.csv");
        write_csv(
            &out.join(&name),
            &["t_in_coupling_periods", "upper", "lower", "baseline_upper", "baseline_lower"],
            &[
                &tr.envelope_times_in_periods(sp.g),
                &tr.envelope.upper,
                &tr.envelope.lower,
                &tr.baseline_envelope.upper,
                &tr.baseline_envelope.lower,
            ],
        )?;
        manifest.push_file(&name);
        manifest.push_scalar(&format!("baseline_separation_t1_{t1}us"), tr.baseline_separation);
    }
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let column_refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    write_csv(&out.join("fig7.csv"), &header_refs, &column_refs)?;
    manifest.push_file("fig7.csv");
    println!("figure fig7: four T1 settings written");
    Ok(())
}

/// Spin |0⟩ vs |1⟩ initial states under the asymmetric damping.
fn fig8(cfg: &RunConfig, out: &Path, manifest: &mut Manifest) -> Result<(), CliError> {
    let sp = cfg.system_params();
    let dec = rates_from_times(20.0, 15.0)?;
    let mut headers: Vec<String> = vec!["t_in_coupling_periods".into()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut curves: Vec<Vec<f64>> = Vec::new();
    for (k, spin) in [Qubit2State::ground(), Qubit2State::excited()].into_iter().enumerate() {
        let dcfg = DetectionConfig {
            offsets: vec![0.0],
            spin_init: spin,
            model: cfg.model,
            periods: cfg.t_max.unwrap_or(4.0),
            ..DetectionConfig::default()
        };
        let scan = detection_scan(&dcfg, &sp, Some(&dec), &cfg.bridge())?;
        let tr = &scan.traces[0];
        if k == 0 {
            columns.push(tr.times_in_periods(sp.g).iter().step_by(4).cloned().collect());
        }
        headers.push(format!("p1_spin_{k}"));
        columns.push(tr.p1.iter().step_by(4).cloned().collect());
        if k == 0 {
            headers.push("p1_baseline".into());
            columns.push(tr.baseline_p1.iter().step_by(4).cloned().collect());
        }
        curves.push(tr.p1.clone());
    }
    let max_sep = curves[0]
        .iter()
        .zip(&curves[1])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let column_refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    write_csv(&out.join("fig8.csv"), &header_refs, &column_refs)?;
    manifest.push_file("fig8.csv");
    manifest.push_scalar("max_state_separation", max_sep);
    println!("figure fig8: max |0⟩-vs-|1⟩ separation {:.4}", max_sep);
    Ok(())
}

/// Memory fidelity over the (α, φ) preparation grid at (20, 15) μs.
fn fig9a(cfg: &RunConfig, out: &Path, manifest: &mut Manifest) -> Result<(), CliError> {
    let engine = TransferEngine::new(
        cfg.system_params(),
        cfg.bridge(),
        ModelKind::Effective,
        Some(rates_from_times(20.0, 15.0)?),
    );
    let mut alphas = Vec::new();
    let mut phis = Vec::new();
    let mut fidelities = Vec::new();
    let (na, np) = (17, 16);
    for i in 0..na {
        let alpha = std::f64::consts::FRAC_PI_2 * i as f64 / (na - 1) as f64;
        for j in 0..np {
            let phi = std::f64::consts::TAU * j as f64 / np as f64;
            let run = memory_transfer(alpha, phi, &engine)?;
            alphas.push(alpha);
            phis.push(phi);
            fidelities.push(run.fidelity);
        }
    }
    write_csv(
        &out.join("fig9a.csv"),
        &["alpha_rad", "phi_rad", "fidelity"],
        &[&alphas, &phis, &fidelities],
    )?;
    manifest.push_file("fig9a.csv");
    // Spread over φ at fixed α quantifies the phase independence.
    let mut max_phi_spread = 0.0_f64;
    for i in 0..na {
        let row = &fidelities[i * np..(i + 1) * np];
        let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max_phi_spread = max_phi_spread.max(hi - lo);
    }
    manifest.push_scalar("max_phi_spread", max_phi_spread);
    println!("figure fig9a: max fidelity spread over phi {:.2e}", max_phi_spread);
    Ok(())
}

/// Memory fidelity against α for both decoherence settings.
fn fig9b(cfg: &RunConfig, out: &Path, manifest: &mut Manifest) -> Result<(), CliError> {
    let n = 33;
    let alphas: Vec<f64> =
        (0..n).map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / (n - 1) as f64).collect();
    let mut columns: Vec<Vec<f64>> = vec![alphas.clone()];
    let mut headers: Vec<String> = vec!["alpha_rad".into()];
    for (t1, tnu) in [(10.0, 10.0), (20.0, 15.0)] {
        let engine = TransferEngine::new(
            cfg.system_params(),
            cfg.bridge(),
            ModelKind::Effective,
            Some(rates_from_times(t1, tnu)?),
        );
        let fid: Result<Vec<f64>, CliError> = alphas
            .iter()
            .map(|&a| Ok(memory_transfer(a, 0.0, &engine)?.fidelity))
            .collect();
        let fid = fid?;
        manifest.push_scalar(&format!("fidelity_alpha0_t1_{t1}us"), fid[0]);
        manifest.push_scalar(&format!("fidelity_alpha_half_pi_t1_{t1}us"), *fid.last().unwrap());
        headers.push(format!("fidelity_t1_{t1}_tnu_{tnu}"));
        columns.push(fid);
    }
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let column_refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    write_csv(&out.join("fig9b.csv"), &header_refs, &column_refs)?;
    manifest.push_file("fig9b.csv");
    println!("figure fig9b: fidelity-vs-alpha for both decoherence settings");
    Ok(())
}
