//! Secular-approximation audit: propagate |1,+⟩ under the full
//! interaction-picture coupling and under its secular branch, and compare
//! the |1,+⟩ population. The population of |1,+⟩ is invariant under the
//! H₀ rotation (it is an H₀ eigenstate), so the comparison is
//! frame-clean.

use rayon::prelude::*;

use crate::dynamics::{evolve_schrodinger, IntegratorConfig};
use crate::error::Result;
use crate::hamiltonians::{build_effective, build_interaction, Branch, SystemParams};
use crate::qstate::JointState;

/// Exact vs secular populations at one detuning.
#[derive(Debug, Clone)]
pub struct RwaComparison {
    /// Ω + δ in units of g.
    pub offset: f64,
    /// Shared record grid, units of 1/g.
    pub times: Vec<f64>,
    pub exact: Vec<f64>,
    pub effective: Vec<f64>,
    pub max_deviation: f64,
}

/// Compare the two generators at one resonance offset over [0, t_max]
/// (time in units of 1/g), on an `n_records`-point grid.
pub fn rwa_comparison(
    sp: &SystemParams,
    offset: f64,
    t_max: f64,
    n_records: usize,
) -> Result<RwaComparison> {
    let sp_run = sp.with_resonance_offset(offset);
    let psi0 = JointState::basis(2); // |1,+⟩

    let h_exact = build_interaction(&sp_run);
    let cfg_exact = {
        let base = IntegratorConfig::for_model(&h_exact, t_max);
        IntegratorConfig::aligned(t_max, n_records, base.dt)
    };
    let exact = evolve_schrodinger(&h_exact, &psi0, &cfg_exact)?;

    let h_eff = build_effective(&sp_run, Branch::Plus);
    let cfg_eff = {
        let base = IntegratorConfig::for_model(&h_eff, t_max);
        IntegratorConfig::aligned(t_max, n_records, base.dt)
    };
    let effective = evolve_schrodinger(&h_eff, &psi0, &cfg_eff)?;

    let pe = exact.population_series(2);
    let pf = effective.population_series(2);
    let max_deviation =
        pe.iter().zip(&pf).map(|(a, b)| (a - b).abs()).fold(0.0_f64, f64::max);
    Ok(RwaComparison {
        offset,
        times: exact.times,
        exact: pe,
        effective: pf,
        max_deviation,
    })
}

/// Run the comparison at several offsets (independently, in parallel).
pub fn validate_rwa(
    sp: &SystemParams,
    offsets: &[f64],
    t_max: f64,
    n_records: usize,
) -> Result<Vec<RwaComparison>> {
    offsets
        .par_iter()
        .map(|&off| rwa_comparison(sp, off, t_max, n_records))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_system_shows_no_deviation() {
        let base = SystemParams::default();
        let t_max = 0.5 * base.coupling_period();
        let cmp = rwa_comparison(&base.without_coupling(), 0.0, t_max, 64).unwrap();
        for (a, b) in cmp.exact.iter().zip(&cmp.effective) {
            assert!((a - 1.0).abs() < 1e-9);
            assert!((b - 1.0).abs() < 1e-9);
        }
        assert!(cmp.max_deviation < 1e-9);
    }

    #[test]
    fn record_grids_of_both_models_line_up() {
        let sp = SystemParams::default();
        let cmp = rwa_comparison(&sp, 0.0, 0.05 * sp.coupling_period(), 16).unwrap();
        assert_eq!(cmp.times.len(), 17);
        assert_eq!(cmp.exact.len(), cmp.effective.len());
        let spacing = cmp.times[1] - cmp.times[0];
        for w in cmp.times.windows(2) {
            assert!((w[1] - w[0] - spacing).abs() < 1e-9);
        }
    }
}
