//! State-transfer protocols: spin initialization, quantum memory, and
//! arbitrary spin rotations, all built on the half-period transfer
//! t = π/g of the resonant exchange coupling.
//!
//! The transfer carries a fixed, known phase: with the flux qubit in |+⟩,
//! a spin a|0⟩ + b|1⟩ ends as the flux state a|+⟩ − ib|−⟩ (and
//! symmetrically on the way back). All fidelities are defined after
//! undoing that deterministic map, and the mid-protocol flux pulse of the
//! rotation protocol is conjugated by it so the net spin map equals the
//! requested rotation exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::dynamics::{
    evolve_lindblad, DecoherenceModel, IntegratorConfig, Method, Trajectory,
};
use crate::error::Result;
use crate::hamiltonians::{
    build_effective, build_interaction, build_zero, Branch, HamiltonianModel, SystemParams,
    UnitBridge,
};
use crate::qstate::{
    fidelity, haar_random_angles, partial_trace, pauli, tensor, JointDensityMatrix, Op2, Op4,
    Party, Qubit2State,
};

use super::{ModelKind, RotationSpec};

/// Shared machinery for the transfer-based protocols: parameters, picture
/// and decoherence setting, plus the half-period evolution they are all
/// made of.
#[derive(Debug, Clone, Copy)]
pub struct TransferEngine {
    pub sp: SystemParams,
    pub bridge: UnitBridge,
    pub model: ModelKind,
    pub dec: Option<DecoherenceModel>,
}

impl TransferEngine {
    pub fn new(
        sp: SystemParams,
        bridge: UnitBridge,
        model: ModelKind,
        dec: Option<DecoherenceModel>,
    ) -> Self {
        Self { sp, bridge, model, dec }
    }

    fn generator(&self) -> HamiltonianModel {
        match self.model {
            ModelKind::Effective => build_effective(&self.sp, Branch::Plus),
            ModelKind::Exact => build_interaction(&self.sp),
        }
    }

    pub fn decoherence_tag(&self) -> Option<(f64, f64)> {
        self.dec.map(|d| (d.t1_us(), d.tnu_us()))
    }

    /// Evolve a joint density matrix for the transfer time t = π/g.
    pub fn half_period(&self, rho: &JointDensityMatrix) -> Result<JointDensityMatrix> {
        let h = self.generator();
        let t_max = std::f64::consts::PI / self.sp.g;
        let cfg = IntegratorConfig::for_model(&h, t_max).with_stride(usize::MAX);
        let traj = evolve_lindblad(&h, self.dec.as_ref(), &self.bridge, rho, &cfg)?;
        Ok(traj.last_density().expect("density trajectory").clone())
    }

    /// Same evolution but recording the whole trajectory.
    pub fn half_period_trajectory(&self, rho: &JointDensityMatrix, stride: usize) -> Result<Trajectory> {
        let h = self.generator();
        let t_max = std::f64::consts::PI / self.sp.g;
        let cfg = IntegratorConfig::for_model(&h, t_max).with_stride(stride);
        evolve_lindblad(&h, self.dec.as_ref(), &self.bridge, rho, &cfg)
    }

    /// Dissipator-only evolution (drive and coupling off) for `us`
    /// microseconds; models the decoupled wait while the flux qubit is
    /// being pulsed.
    pub fn idle(&self, rho: &JointDensityMatrix, us: f64) -> Result<JointDensityMatrix> {
        if us <= 0.0 || self.dec.is_none() {
            return Ok(rho.clone());
        }
        let h = build_zero(&self.sp);
        let t_max = self.bridge.time_to_sim(us);
        let cfg = IntegratorConfig {
            dt: (t_max / 64.0).min(0.02 / self.sp.g),
            t_max,
            record_stride: usize::MAX,
            method: Method::Rk4,
        };
        let traj = evolve_lindblad(&h, self.dec.as_ref(), &self.bridge, rho, &cfg)?;
        Ok(traj.last_density().expect("density trajectory").clone())
    }
}

fn plus_state() -> Op2 {
    pauli::xrep::plus_projector()
}

fn with_fresh_flux(spin: &Op2) -> JointDensityMatrix {
    JointDensityMatrix::new(tensor(spin, &plus_state())).expect("valid product state")
}

/// Result of one initialization run.
#[derive(Debug, Clone)]
pub struct InitializationRun {
    /// Fidelity of the reduced spin state to |0⟩ after each round.
    pub round_fidelities: Vec<f64>,
}

/// Repeatedly drive an arbitrary spin state into |0⟩.
///
/// Each round tensors the current spin state with a fresh flux |+⟩, lets
/// the coupling act for π/g, then measures the flux qubit disregarding the
/// outcome — i.e. traces it out. Closed-system, a single round is exact;
/// with decoherence, iterating improves the preparation toward an
/// asymptote.
pub fn initialize_spin(
    spin: &Op2,
    iterations: usize,
    engine: &TransferEngine,
) -> Result<InitializationRun> {
    let mut current = *spin;
    let mut round_fidelities = Vec::with_capacity(iterations);
    let ground = Qubit2State::ground();
    for _ in 0..iterations.max(1) {
        let rho = with_fresh_flux(&current);
        let evolved = engine.half_period(&rho)?;
        current = partial_trace(evolved.matrix(), Party::FluxQubit);
        round_fidelities.push(fidelity(&current, &ground));
    }
    Ok(InitializationRun { round_fidelities })
}

/// Haar-ensemble statistics of the initialization protocol.
#[derive(Debug, Clone)]
pub struct InitializationEnsemble {
    pub samples: usize,
    /// Mean fidelity to |0⟩ after round k (index k−1).
    pub mean: Vec<f64>,
    /// Monte-Carlo standard error of each mean.
    pub std_err: Vec<f64>,
}

/// Average the initialization fidelity over Haar-random pure spin inputs.
///
/// Sample i draws its angles from an independent, deterministic stream of
/// the seed, so the ensemble is reproducible and independent of how the
/// samples are scheduled across threads.
pub fn initialize_ensemble(
    samples: usize,
    iterations: usize,
    seed: u64,
    engine: &TransferEngine,
) -> Result<InitializationEnsemble> {
    let runs: Result<Vec<Vec<f64>>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (theta, varphi) = haar_random_angles(&mut rng);
            let spin = Qubit2State::from_angles(theta, varphi).density();
            Ok(initialize_spin(&spin, iterations, engine)?.round_fidelities)
        })
        .collect();
    let runs = runs?;
    let n = samples.max(1) as f64;
    let rounds = iterations.max(1);
    let mut mean = vec![0.0; rounds];
    let mut var = vec![0.0; rounds];
    for run in &runs {
        for (k, f) in run.iter().enumerate() {
            mean[k] += f;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    for run in &runs {
        for (k, f) in run.iter().enumerate() {
            var[k] += (f - mean[k]).powi(2);
        }
    }
    let std_err = var
        .iter()
        .map(|v| if samples > 1 { (v / (n - 1.0)).sqrt() / n.sqrt() } else { 0.0 })
        .collect();
    Ok(InitializationEnsemble { samples, mean, std_err })
}

/// Result of one memory-transfer run.
#[derive(Debug, Clone)]
pub struct MemoryRun {
    pub alpha: f64,
    pub phi: f64,
    /// Fidelity of the final reduced spin state to the transferred target
    /// (after undoing the fixed −i transfer phase).
    pub fidelity: f64,
}

/// Store an arbitrary flux-qubit state in the long-lived spin.
///
/// The spin starts in |0⟩ and the flux qubit in cos α|+⟩ + e^{iφ} sin α|−⟩;
/// after t = π/g the spin holds cos α|0⟩ − i e^{iφ} sin α|1⟩.
pub fn memory_transfer(alpha: f64, phi: f64, engine: &TransferEngine) -> Result<MemoryRun> {
    let flux = Qubit2State::from_angles(alpha, phi);
    let rho = JointDensityMatrix::new(tensor(&Qubit2State::ground().density(), &flux.density()))
        .expect("valid product state");
    let evolved = engine.half_period(&rho)?;
    let spin = partial_trace(evolved.matrix(), Party::FluxQubit);
    let target = transfer_image(&flux);
    Ok(MemoryRun { alpha, phi, fidelity: fidelity(&spin, &target) })
}

/// The deterministic image of a transferred state: (a, b) ↦ (a, −ib).
fn transfer_image(state: &Qubit2State) -> Qubit2State {
    let v = state.ket();
    Qubit2State::new(v[0], v[1] * (-num_complex::Complex64::i()))
        .expect("phase map preserves the norm")
}

/// Result of one rotation run.
#[derive(Debug, Clone)]
pub struct RotationRun {
    /// Reduced spin state after the full transfer–pulse–transfer cycle.
    pub final_spin: Op2,
    /// Fidelity against the requested rotation applied directly to the
    /// input.
    pub fidelity: f64,
}

/// Rotate an arbitrary (possibly unknown) spin state through the flux
/// qubit: transfer the spin onto the flux qubit, pulse the flux qubit with
/// the coupling switched off, transfer back.
///
/// The applied pulse is the requested rotation conjugated by the known
/// transfer phase map, so closed-system the net spin map equals
/// `rot.matrix()` exactly (up to global phase). `idle_us` models a
/// non-instantaneous pulse: the flux qubit keeps decohering for that long
/// while decoupled.
pub fn rotate_spin(
    spin: &Qubit2State,
    rot: &RotationSpec,
    idle_us: f64,
    engine: &TransferEngine,
) -> Result<RotationRun> {
    let rho = with_fresh_flux(&spin.density());
    let after_forward = engine.half_period(&rho)?;
    let after_idle = engine.idle(&after_forward, idle_us)?;

    // Conjugate the pulse by the transfer map D = diag(1, −i):
    // D · (D⁻¹ T D⁻¹) · D = T.
    let i = num_complex::Complex64::i();
    let d_inv = Op2::new(1.0.into(), 0.0.into(), 0.0.into(), i);
    let pulse = d_inv * rot.matrix() * d_inv;
    let joint_pulse: Op4 = tensor(&pauli::id(), &pulse);
    let pulsed = JointDensityMatrix::new_checked(
        joint_pulse * after_idle.matrix() * joint_pulse.adjoint(),
        1e-8,
        1e-8,
        -1e-8,
    )?;

    let back = engine.half_period(&pulsed)?;
    let final_spin = partial_trace(back.matrix(), Party::FluxQubit);

    let target_vec = rot.matrix() * spin.ket();
    let target = Qubit2State::new(target_vec[0], target_vec[1]).expect("unitary image");
    Ok(RotationRun { fidelity: fidelity(&final_spin, &target), final_spin })
}
