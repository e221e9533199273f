//! Spin-state tomography by proxy: transfer the unknown spin state onto
//! the measurable flux qubit, take the flux qubit's three Pauli
//! expectations, and invert back to the spin Bloch vector by linear
//! inversion.
//!
//! The transfer map (a, b) ↦ flux (a, −ib) turns the spin expectations
//! into a fixed permutation of the flux ones:
//!   ⟨σ_x⟩_s = ⟨σ_y⟩_fq, ⟨σ_y⟩_s = −⟨σ_z⟩_fq, ⟨σ_z⟩_s = −⟨σ_x⟩_fq,
//! which is what the reconstruction undoes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::qstate::{fidelity, partial_trace, pauli, tensor, JointDensityMatrix, Op2, Party, Qubit2State};

use super::transfer::TransferEngine;

/// How the flux-qubit expectations are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotMode {
    /// Use the exact expectations of the reduced state.
    Exact,
    /// Sample each Pauli with the given number of projective shots.
    Shots(u64),
}

/// Below this shot count the variance of a Pauli estimate exceeds 0.1 and
/// the report carries a warning flag.
pub const LOW_SHOT_THRESHOLD: u64 = 100;

#[derive(Debug, Clone)]
pub struct TomographyRun {
    /// Measured flux-qubit expectations (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩).
    pub flux_bloch: [f64; 3],
    /// Reconstructed spin Bloch vector after undoing the transfer map.
    pub spin_bloch: [f64; 3],
    /// Reconstructed angles of cos θ|0⟩ + e^{iφ} sin θ|1⟩.
    pub theta_hat: f64,
    pub phi_hat: f64,
    /// Fidelity of the reconstructed (generally mixed) state against the
    /// true input.
    pub reconstruction_fidelity: f64,
    /// Fidelity of the spin marginal to |0⟩ after the transfer. The
    /// tomography transfer doubles as the initialization protocol, so the
    /// statistics of this number are those of a one-round initialization.
    pub spin_reset_fidelity: f64,
    /// Whether the Bloch vector had to be scaled back into the unit ball.
    pub projected: bool,
    /// Set in shot mode when the count is below `LOW_SHOT_THRESHOLD`.
    pub low_shot_warning: bool,
}

fn sampled_expectation<R: Rng>(exact: f64, shots: u64, rng: &mut R) -> f64 {
    let p_plus = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
    let mut sum = 0i64;
    for _ in 0..shots {
        sum += if rng.gen_bool(p_plus) { 1 } else { -1 };
    }
    sum as f64 / shots as f64
}

/// Reconstruct a spin state (given here as its preparation, which the
/// procedure itself never reads) through the flux qubit.
pub fn tomography(
    spin: &Qubit2State,
    mode: ShotMode,
    seed: u64,
    engine: &TransferEngine,
) -> Result<TomographyRun> {
    // Flux prepared in |+⟩ (α = 0, φ = 0); transfer for π/g.
    let rho0 = JointDensityMatrix::new(tensor(&spin.density(), &pauli::xrep::plus_projector()))
        .expect("valid product state");
    let evolved = engine.half_period(&rho0)?;
    let flux = partial_trace(evolved.matrix(), Party::Spin);
    let spin_after = partial_trace(evolved.matrix(), Party::FluxQubit);
    let spin_reset_fidelity = fidelity(&spin_after, &Qubit2State::ground());

    let exact = [
        (flux * pauli::xrep::sx()).trace().re,
        (flux * pauli::xrep::sy()).trace().re,
        (flux * pauli::xrep::sz()).trace().re,
    ];
    let (flux_bloch, low_shot_warning) = match mode {
        ShotMode::Exact => (exact, false),
        ShotMode::Shots(n) => {
            let n = n.max(1);
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let sampled = [
                sampled_expectation(exact[0], n, &mut rng),
                sampled_expectation(exact[1], n, &mut rng),
                sampled_expectation(exact[2], n, &mut rng),
            ];
            (sampled, n < LOW_SHOT_THRESHOLD)
        }
    };

    // Undo the transfer map.
    let mut spin_bloch = [flux_bloch[1], -flux_bloch[2], -flux_bloch[0]];
    let r = spin_bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
    let projected = r > 1.0;
    if projected {
        for x in &mut spin_bloch {
            *x /= r;
        }
    }

    let theta_hat = 0.5 * (-spin_bloch[2]).clamp(-1.0, 1.0).acos();
    let mut phi_hat = (-spin_bloch[1]).atan2(spin_bloch[0]);
    if phi_hat < 0.0 {
        phi_hat += std::f64::consts::TAU;
    }

    let reconstructed: Op2 = (Op2::identity()
        + pauli::sx().scale(spin_bloch[0])
        + pauli::sy().scale(spin_bloch[1])
        + pauli::sz().scale(spin_bloch[2]))
    .scale(0.5);
    let reconstruction_fidelity = fidelity(&reconstructed, spin);

    Ok(TomographyRun {
        flux_bloch,
        spin_bloch,
        theta_hat,
        phi_hat,
        reconstruction_fidelity,
        spin_reset_fidelity,
        projected,
        low_shot_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rates_from_times;
    use crate::hamiltonians::{SystemParams, UnitBridge};
    use crate::protocols::ModelKind;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn engine(dec: Option<(f64, f64)>) -> TransferEngine {
        TransferEngine::new(
            SystemParams::default(),
            UnitBridge::default(),
            ModelKind::Effective,
            dec.map(|(t1, tnu)| rates_from_times(t1, tnu).unwrap()),
        )
    }

    #[test]
    fn ground_state_reconstructs_to_the_south_pole() {
        let run = tomography(&Qubit2State::ground(), ShotMode::Exact, 0, &engine(None)).unwrap();
        assert!(run.spin_bloch[0].abs() < 1e-9);
        assert!(run.spin_bloch[1].abs() < 1e-9);
        assert_relative_eq!(run.spin_bloch[2], -1.0, epsilon = 1e-9);
        assert!(run.theta_hat.abs() < 1e-7);
        assert!(run.reconstruction_fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn exact_mode_recovers_the_preparation_angles() {
        let (theta, phi) = (FRAC_PI_4, FRAC_PI_3);
        let spin = Qubit2State::from_angles(theta, phi);
        let run = tomography(&spin, ShotMode::Exact, 0, &engine(None)).unwrap();
        assert_relative_eq!(run.theta_hat, theta, epsilon = 1e-8);
        assert_relative_eq!(run.phi_hat, phi, epsilon = 1e-8);
        assert!(run.reconstruction_fidelity > 1.0 - 1e-10);
        // Consistency of the inversion with the state's own Bloch vector.
        let b = spin.bloch();
        for k in 0..3 {
            assert_relative_eq!(run.spin_bloch[k], b[k], epsilon = 1e-9);
        }
    }

    #[test]
    fn shot_mode_is_deterministic_and_flags_low_counts() {
        let spin = Qubit2State::from_angles(0.8, 1.1);
        let e = engine(None);
        let a = tomography(&spin, ShotMode::Shots(50), 7, &e).unwrap();
        let b = tomography(&spin, ShotMode::Shots(50), 7, &e).unwrap();
        assert_eq!(a.spin_bloch, b.spin_bloch);
        assert!(a.low_shot_warning);
        let c = tomography(&spin, ShotMode::Shots(20_000), 7, &e).unwrap();
        assert!(!c.low_shot_warning);
        assert!(c.reconstruction_fidelity > 0.99, "{}", c.reconstruction_fidelity);
    }

    #[test]
    fn decoherence_degrades_but_does_not_break_reconstruction() {
        let spin = Qubit2State::from_angles(1.2, 0.4);
        let run = tomography(&spin, ShotMode::Exact, 0, &engine(Some((20.0, 15.0)))).unwrap();
        assert!(run.reconstruction_fidelity > 0.8, "{}", run.reconstruction_fidelity);
        assert!(run.reconstruction_fidelity < 1.0 - 1e-4);
        assert!(!run.projected);
        // The reconstructed direction stays close even though the state
        // has mixed: the estimated angles remain near the preparation.
        let est = Qubit2State::from_angles(run.theta_hat, run.phi_hat);
        assert!(est.ket().dotc(spin.ket()).norm_sqr() > 0.95);
        // Tighter decoherence hurts more.
        let worse = tomography(&spin, ShotMode::Exact, 0, &engine(Some((10.0, 10.0)))).unwrap();
        assert!(worse.reconstruction_fidelity < run.reconstruction_fidelity);
    }

    #[test]
    fn tomography_transfer_doubles_as_initialization() {
        // The spin-reset fidelity of the tomography transfer is the
        // one-round initialization fidelity of the same input.
        use crate::protocols::initialize_spin;
        let e = engine(Some((20.0, 15.0)));
        for (theta, varphi) in [(0.3, 0.9), (1.2, 4.1), (std::f64::consts::FRAC_PI_2, 0.0)] {
            let spin = Qubit2State::from_angles(theta, varphi);
            let tomo = tomography(&spin, ShotMode::Exact, 0, &e).unwrap();
            let init = initialize_spin(&spin.density(), 1, &e).unwrap();
            assert_relative_eq!(
                tomo.spin_reset_fidelity,
                init.round_fidelities[0],
                epsilon = 1e-12
            );
        }
    }
}
