//! The five coupling-enabled procedures, each built from the same
//! ingredients: prepare a product state, let the dressed exchange coupling
//! act for half a coupling period (t = π/g, a full population transfer),
//! and read one party out.
//!
//! Protocol dynamics run in the interaction picture of the dressed free
//! Hamiltonian H₀. This is exact bookkeeping, not an approximation: H₀
//! commutes with the resonant exchange coupling, the flux-qubit
//! dissipators are invariant under the H₀ rotation, and the residual
//! single-party phases e^{−iH₀t} at the readout time are deterministic
//! (for the default δ = 3000 g they vanish outright, δ·π/g being a
//! multiple of 2π). Observables that need the dressed-frame fast
//! oscillations (the detection protocol's P₁ traces) reconstruct them
//! from the interaction-picture state exactly.
//!
//! Protocol runs are pure functions of (parameters, seed); ensembles fan
//! out over worker threads and are merged in sample order, so results do
//! not depend on the pool size.

mod detection;
mod tomography;
mod transfer;
mod validate;

pub use detection::{
    detection_interaction_trajectory, detection_scan, DetectionConfig, DetectionScan,
    DetectionTrace, Envelope,
};
pub use tomography::{tomography, ShotMode, TomographyRun};
pub use transfer::{
    initialize_ensemble, initialize_spin, memory_transfer, rotate_spin, InitializationEnsemble,
    InitializationRun, MemoryRun, RotationRun, TransferEngine,
};
pub use validate::{rwa_comparison, validate_rwa, RwaComparison};

use num_complex::Complex64 as C64;

use crate::qstate::{JointState, Ket4, Qubit2State};

/// Which generator drives a protocol simulation: the full interaction-
/// picture coupling (`Exact`) or its secular part (`Effective`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Exact,
    Effective,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Exact => "exact",
            ModelKind::Effective => "effective",
        }
    }
}

/// Product initial state (cos θ|0⟩ + e^{iφ_s} sin θ|1⟩) ⊗
/// (cos α|+⟩ + e^{iφ} sin α|−⟩). The spin angles (θ, varphi) are the
/// unknowns of the protocols; the flux angles (α, phi) are the
/// experimenter's knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialStateSpec {
    pub theta: f64,
    pub varphi: f64,
    pub alpha: f64,
    pub phi: f64,
}

impl InitialStateSpec {
    pub fn new(theta: f64, varphi: f64, alpha: f64, phi: f64) -> Self {
        Self { theta, varphi, alpha, phi }
    }

    pub fn spin(&self) -> Qubit2State {
        Qubit2State::from_angles(self.theta, self.varphi)
    }

    pub fn flux(&self) -> Qubit2State {
        Qubit2State::from_angles(self.alpha, self.phi)
    }

    pub fn joint(&self) -> JointState {
        JointState::from_product(&self.spin(), &self.flux())
    }
}

/// Target single-qubit rotation |0⟩ → cos β|0⟩ + e^{iχ} sin β|1⟩,
/// |1⟩ → cos β|1⟩ − e^{−iχ} sin β|0⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSpec {
    pub beta: f64,
    pub chi: f64,
}

impl RotationSpec {
    pub fn new(beta: f64, chi: f64) -> Self {
        Self { beta, chi }
    }

    /// The rotation as a 2×2 matrix in the basis it is stated in.
    pub fn matrix(&self) -> crate::qstate::Op2 {
        let c = C64::from(self.beta.cos());
        let s = self.beta.sin();
        crate::qstate::Op2::new(
            c,
            -C64::from_polar(s, -self.chi),
            C64::from_polar(s, self.chi),
            c,
        )
    }
}

/// The flux qubit's energy eigenstate |1⟩ written on the (|+⟩, |−⟩) axis:
/// α = π/4, φ = 0.
pub fn flux_excited() -> Qubit2State {
    Qubit2State::from_angles(std::f64::consts::FRAC_PI_4, 0.0)
}

/// Closed-form evolution of a product initial state under the resonant
/// static exchange coupling (Ω = −δ). The pair {|0,−⟩, |1,+⟩} Rabi-flops
/// at g/2 while |0,+⟩ and |1,−⟩ are stationary:
///
/// ψ(t) = cos θ cos α |0,+⟩ + e^{i(φ+φ_s)} sin θ sin α |1,−⟩
///      + e^{iφ_s} sin θ cos α (−i sin(gt/2)|0,−⟩ + cos(gt/2)|1,+⟩)
///      + e^{iφ}  cos θ sin α (cos(gt/2)|0,−⟩ − i sin(gt/2)|1,+⟩).
pub fn analytic_evolution(spec: &InitialStateSpec, g: f64, t: f64) -> JointState {
    let (ct, st) = (spec.theta.cos(), spec.theta.sin());
    let (ca, sa) = (spec.alpha.cos(), spec.alpha.sin());
    let es = C64::from_polar(1.0, spec.varphi);
    let ef = C64::from_polar(1.0, spec.phi);
    let (half_c, half_s) = ((g * t / 2.0).cos(), (g * t / 2.0).sin());
    let mi = -C64::i();

    let c0 = C64::from(ct * ca);
    let c1 = es * (st * ca * half_s) * mi + ef * C64::from(ct * sa * half_c);
    let c2 = es * C64::from(st * ca * half_c) + ef * (ct * sa * half_s) * mi;
    let c3 = es * ef * (st * sa);
    JointState::new(Ket4::new(c0, c1, c2, c3)).expect("closed-form state is normalized")
}

/// Interaction-picture probability of the flux qubit's excited state under
/// the resonant coupling, P₁ⁱ(t) = ½(1 + sin 2α cos φ cos(gt/2)).
///
/// This is the standard closed form for the detection protocol. It is
/// exact whenever cos 2α · sin 2θ · sin φ_s = 0 — in particular at the
/// protocol's working point α = π/4 and for spin states on the polar axis
/// or with a real relative phase. Away from that set the full trace of
/// [`analytic_evolution`] carries an extra
/// ½ cos 2α sin 2θ sin φ_s sin(gt/2) cross term that this formula omits;
/// only then does P₁ⁱ pick up a spin-state dependence.
pub fn analytic_p1_interaction(alpha: f64, phi: f64, g: f64, t: f64) -> f64 {
    0.5 * (1.0 + (2.0 * alpha).sin() * phi.cos() * (g * t / 2.0).cos())
}

/// Scalar results of one protocol invocation, tagged with the generator
/// and decoherence setting that produced them.
#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub protocol: &'static str,
    pub model: ModelKind,
    /// (T₁, T_ν) in μs when decoherence was active.
    pub decoherence: Option<(f64, f64)>,
    pub scalars: Vec<(String, f64)>,
}

impl ProtocolReport {
    pub fn new(protocol: &'static str, model: ModelKind, dec: Option<(f64, f64)>) -> Self {
        Self { protocol, model, decoherence: dec, scalars: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.scalars.push((name.into(), value));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{partial_trace, Party};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

    #[test]
    fn stationary_state_stays_put() {
        // θ = 0, α = 0 is the zero-eigenvalue eigenstate |0,+⟩.
        let spec = InitialStateSpec::new(0.0, 0.0, 0.0, 0.0);
        for t in [0.0, 0.3, PI, 5.0 * PI] {
            let psi = analytic_evolution(&spec, 1.0, t);
            assert!(psi.overlap(&JointState::basis(0)) > 1.0 - 1e-14);
        }
    }

    #[test]
    fn spin_excitation_transfers_in_half_a_coupling_period() {
        // θ = π/2, φ_s = 0, α = 0: |1,+⟩ → −i|0,−⟩ at t = π/g.
        let spec = InitialStateSpec::new(FRAC_PI_2, 0.0, 0.0, 0.0);
        let psi = analytic_evolution(&spec, 1.0, PI);
        let amp = psi.ket()[1];
        assert_relative_eq!(amp.im, -1.0, epsilon = 1e-14);
        assert!(amp.re.abs() < 1e-14);
        assert!(psi.population(1) > 1.0 - 1e-14);
    }

    #[test]
    fn flux_excitation_transfers_to_the_spin() {
        // θ = 0, α = π/2, φ = 0: |0,−⟩ → −i|1,+⟩ at t = π/g; the
        // superconducting state moves onto the spin completely.
        let spec = InitialStateSpec::new(0.0, 0.0, FRAC_PI_2, 0.0);
        let psi = analytic_evolution(&spec, 1.0, PI);
        let amp = psi.ket()[2];
        assert_relative_eq!(amp.im, -1.0, epsilon = 1e-14);
        assert!(psi.population(2) > 1.0 - 1e-14);
    }

    #[test]
    fn interaction_p1_reference_values() {
        assert_relative_eq!(analytic_p1_interaction(FRAC_PI_4, 0.0, 1.0, 0.0), 1.0);
        assert_relative_eq!(analytic_p1_interaction(FRAC_PI_4, 0.0, 1.0, TAU), 0.0);
        for phi in [0.0, 1.0, 2.0] {
            for t in [0.0, 1.0, 4.0] {
                assert_relative_eq!(analytic_p1_interaction(0.0, phi, 1.0, t), 0.5);
            }
        }
    }

    fn angle_grid(n: usize, max: f64) -> Vec<f64> {
        (0..n).map(|k| max * k as f64 / (n - 1) as f64).collect()
    }

    fn traced_p1(spec: &InitialStateSpec, t: f64) -> f64 {
        let proj =
            crate::hamiltonians::flux_operator(&crate::qstate::pauli::xrep::excited_projector());
        let psi = analytic_evolution(spec, 1.0, t);
        psi.ket().dotc(&(proj * psi.ket())).re
    }

    #[test]
    fn closed_form_p1_identity_on_the_angle_grid() {
        // The traced flux-excited population of the closed-form state
        // equals ½(1 + sin 2α cos φ cos(gt/2)) plus a cross term
        // ½ cos 2α sin 2θ sin φ_s sin(gt/2); the compact formula is the
        // cross-term-free part and is exact on its domain (α = π/4, polar
        // spin states, real spin phases). Both facts are pinned here.
        let thetas = angle_grid(5, FRAC_PI_2);
        let varphis = angle_grid(5, TAU * 0.999);
        let alphas = angle_grid(5, FRAC_PI_2);
        let phis = angle_grid(5, TAU * 0.999);
        for &theta in &thetas {
            for &varphi in &varphis {
                for &alpha in &alphas {
                    for &phi in &phis {
                        for t in [0.0, PI / 4.0, PI / 2.0, PI, TAU] {
                            let spec = InitialStateSpec::new(theta, varphi, alpha, phi);
                            let p1 = traced_p1(&spec, t);
                            let formula = analytic_p1_interaction(alpha, phi, 1.0, t);
                            let cross = 0.5
                                * (2.0 * alpha).cos()
                                * (2.0 * theta).sin()
                                * varphi.sin()
                                * (t / 2.0).sin();
                            assert!(
                                (p1 - formula - cross).abs() < 1e-12,
                                "identity broken at θ={theta} φs={varphi} α={alpha} φ={phi} t={t}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn interaction_p1_does_not_depend_on_the_spin_state_at_the_working_point() {
        // At the detection setting α = π/4 the cross term vanishes and the
        // traced population is exactly spin-independent.
        let (alpha, phi, t) = (FRAC_PI_4, 2.1, 1.7);
        let reference = traced_p1(&InitialStateSpec::new(0.0, 0.0, alpha, phi), t);
        assert!((reference - analytic_p1_interaction(alpha, phi, 1.0, t)).abs() < 1e-12);
        for &theta in &angle_grid(5, FRAC_PI_2) {
            for &varphi in &angle_grid(5, TAU * 0.999) {
                let spec = InitialStateSpec::new(theta, varphi, alpha, phi);
                assert!((traced_p1(&spec, t) - reference).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transfer_leaves_the_spin_reduced_state_in_ground() {
        // α = 0 inputs end with the spin exactly in |0⟩ at t = π/g.
        for &theta in &angle_grid(4, FRAC_PI_2) {
            let spec = InitialStateSpec::new(theta, 1.3, 0.0, 0.0);
            let psi = analytic_evolution(&spec, 1.0, PI);
            let spin = partial_trace(&psi.density(), Party::FluxQubit);
            assert!((spin[(0, 0)].re - 1.0).abs() < 1e-13);
        }
    }
}
