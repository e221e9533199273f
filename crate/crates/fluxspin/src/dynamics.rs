//! Numerical propagation: the time-dependent Schrödinger equation for pure
//! states and the Lindblad master equation for density matrices, with
//! invariant monitoring at every recorded point.
//!
//! Integration works directly on the 4-dimensional state (or the 4×4
//! density matrix); at this dimension a vectorized superoperator buys
//! nothing. The default method is fixed-step classical fourth-order
//! Runge–Kutta, which makes every trajectory a deterministic function of
//! (generator, initial state, config); a step-doubling adaptive variant is
//! available. States are never renormalized, so norm and trace drift stay
//! observable and are checked against tolerances when recorded.
//!
//! Each integration is a single sequential task over its own state;
//! distinct trajectories are independent and may run on worker threads
//! concurrently.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonians::{flux_operator, HamiltonianModel, UnitBridge};
use crate::qstate::{pauli, JointDensityMatrix, JointState, Ket4, Op4};

/// Hermiticity/trace tolerance for recorded density matrices.
pub const RECORD_TOL: f64 = 1e-8;
/// Norm tolerance for recorded pure states.
pub const NORM_RECORD_TOL: f64 = 1e-6;
/// Eigenvalue floor for recorded density matrices.
pub const POSITIVITY_RECORD_FLOOR: f64 = -1e-8;

/// Flux-qubit damping model. The jump operators are fixed to
/// (σ_x^fq, σ_{−,x}^fq, σ_{+,x}^fq), each extended by the identity on the
/// spin; the spin itself is treated as noiseless. The rates derive from
/// the measured energy-relaxation time T₁ and Rabi-decay time T_ν as
///
/// Γ_x = 1/(4T₁),  Γ₋ = 1/(4T₁),  Γ₊ = 1/(4T₁) + 1/T_ν,
///
/// and are stored in μs⁻¹. The Γ₊/Γ₋ asymmetry is physical: the drive
/// rotates the decoherence basis and effectively heats the bath even at
/// zero environment temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceModel {
    t1_us: f64,
    tnu_us: f64,
    gamma_x: f64,
    gamma_minus: f64,
    gamma_plus: f64,
}

impl DecoherenceModel {
    pub fn from_times(t1_us: f64, tnu_us: f64) -> Result<Self> {
        if !(t1_us > 0.0) || t1_us.is_nan() {
            return Err(Error::Domain(format!("T1 must be positive, got {t1_us} μs")));
        }
        if !(tnu_us > 0.0) || tnu_us.is_nan() {
            return Err(Error::Domain(format!("Tν must be positive, got {tnu_us} μs")));
        }
        let quarter = 0.25 / t1_us;
        Ok(Self {
            t1_us,
            tnu_us,
            gamma_x: quarter,
            gamma_minus: quarter,
            gamma_plus: quarter + 1.0 / tnu_us,
        })
    }

    pub fn t1_us(&self) -> f64 {
        self.t1_us
    }

    pub fn tnu_us(&self) -> f64 {
        self.tnu_us
    }

    /// Dephasing rate Γ_x in μs⁻¹.
    pub fn gamma_x_per_us(&self) -> f64 {
        self.gamma_x
    }

    /// x-basis lowering rate Γ₋ in μs⁻¹.
    pub fn gamma_minus_per_us(&self) -> f64 {
        self.gamma_minus
    }

    /// x-basis raising rate Γ₊ in μs⁻¹.
    pub fn gamma_plus_per_us(&self) -> f64 {
        self.gamma_plus
    }

    /// The same model with the pumping asymmetry removed (Γ₊ forced equal
    /// to Γ₋). Diagnostic knob, not a physical setting.
    pub fn with_symmetric_pumping(mut self) -> Self {
        self.gamma_plus = self.gamma_minus;
        self
    }

    /// Rates (Γ_x, Γ₋, Γ₊) converted to simulation units through `bridge`.
    pub fn sim_rates(&self, bridge: &UnitBridge) -> [f64; 3] {
        [
            bridge.rate_to_sim(self.gamma_x),
            bridge.rate_to_sim(self.gamma_minus),
            bridge.rate_to_sim(self.gamma_plus),
        ]
    }
}

/// Rates from (T₁, T_ν); thin named wrapper over the constructor.
pub fn rates_from_times(t1_us: f64, tnu_us: f64) -> Result<DecoherenceModel> {
    DecoherenceModel::from_times(t1_us, tnu_us)
}

/// Integration method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fixed-step fourth-order Runge–Kutta (default).
    Rk4,
    /// Step-doubling RK4 with the given local error tolerance. Steps only
    /// subdivide the fixed recording grid, so recorded times match the
    /// fixed-step method exactly.
    Rk4Adaptive { tol: f64 },
}

/// Step size, horizon and recording cadence for one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Step, in units of 1/g.
    pub dt: f64,
    /// Horizon, in units of 1/g.
    pub t_max: f64,
    /// A state is recorded every `record_stride` steps (plus the endpoint).
    pub record_stride: usize,
    pub method: Method,
}

impl IntegratorConfig {
    /// Default configuration for a model: the step resolves the model's
    /// fastest frequency with a frame-dependent number of points per
    /// period. Lab-frame spectra are by far the widest and need the finest
    /// relative resolution to hold the norm budget over long runs; the
    /// slow effective models are cheap enough to oversample for accuracy.
    pub fn for_model(h: &HamiltonianModel, t_max: f64) -> Self {
        use crate::hamiltonians::Frame;
        let points = match h.frame() {
            Frame::Lab => 220.0,
            Frame::Rotating | Frame::Interaction => 40.0,
            Frame::Effective => 400.0,
        };
        // Never step past a sixteenth of the horizon, whatever the model's
        // frequency content claims (a zero generator has none).
        let dt = (std::f64::consts::TAU / (h.fastest_frequency() * points)).min(t_max / 16.0);
        Self { dt, t_max, record_stride: 1, method: Method::Rk4 }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride.max(1);
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Configuration whose recorded times land exactly on an n-point grid
    /// of [0, t_max], with dt no coarser than `dt_target`. Lets runs of
    /// different models share comparison grids.
    pub fn aligned(t_max: f64, n_records: usize, dt_target: f64) -> Self {
        let spacing = t_max / n_records as f64;
        let per_record = (spacing / dt_target).ceil().max(1.0) as usize;
        Self {
            dt: spacing / per_record as f64,
            t_max,
            record_stride: per_record,
            method: Method::Rk4,
        }
    }

    /// The step must give at least 20 points per period of the model's
    /// fastest frequency.
    pub fn validate_for(&self, h: &HamiltonianModel) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_max > 0.0) {
            return Err(Error::Domain(format!(
                "dt and t_max must be positive (dt = {}, t_max = {})",
                self.dt, self.t_max
            )));
        }
        let max_dt = std::f64::consts::TAU / h.fastest_frequency() / 20.0;
        if self.dt > max_dt * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dt: self.dt, max: max_dt, frame: h.frame().name() });
        }
        Ok(())
    }
}

/// Recorded states of a trajectory.
#[derive(Debug, Clone)]
pub enum States {
    Pure(Vec<JointState>),
    Density(Vec<JointDensityMatrix>),
}

impl States {
    pub fn len(&self) -> usize {
        match self {
            States::Pure(v) => v.len(),
            States::Density(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A time-indexed series of recorded states plus named derived series.
///
/// Times are strictly increasing, in the integrator's units of 1/g;
/// `times_in_periods` rescales to coupling periods 2π/g for reporting.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: States,
    pub observables: BTreeMap<String, Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times_in_periods(&self, g: f64) -> Vec<f64> {
        self.times.iter().map(|t| t * g / std::f64::consts::TAU).collect()
    }

    /// Real expectation ⟨A⟩ along the trajectory.
    pub fn expectation_series(&self, op: &Op4) -> Vec<f64> {
        match &self.states {
            States::Density(v) => v.iter().map(|r| (r.matrix() * op).trace().re).collect(),
            States::Pure(v) => v.iter().map(|s| s.ket().dotc(&(op * s.ket())).re).collect(),
        }
    }

    /// Probability of the flux qubit's excited state |1⟩ (expectation of
    /// I ⊗ |1⟩⟨1|).
    pub fn p1_series(&self) -> Vec<f64> {
        self.expectation_series(&flux_operator(&pauli::xrep::excited_projector()))
    }

    /// Population of one joint basis state along the trajectory.
    pub fn population_series(&self, index: usize) -> Vec<f64> {
        match &self.states {
            States::Pure(v) => v.iter().map(|s| s.population(index)).collect(),
            States::Density(v) => v.iter().map(|r| r.matrix()[(index, index)].re).collect(),
        }
    }

    pub fn insert_observable(&mut self, name: &str, series: Vec<f64>) {
        self.observables.insert(name.to_string(), series);
    }

    pub fn last_density(&self) -> Option<&JointDensityMatrix> {
        match &self.states {
            States::Density(v) => v.last(),
            States::Pure(_) => None,
        }
    }

    pub fn last_pure(&self) -> Option<&JointState> {
        match &self.states {
            States::Pure(v) => v.last(),
            States::Density(_) => None,
        }
    }
}

/// Precomputed dissipation channels: (a, a†, a†a, rate), rates in
/// simulation units.
struct Channels {
    ops: Vec<(Op4, Op4, Op4, f64)>,
}

impl Channels {
    fn build(dec: Option<&DecoherenceModel>, bridge: &UnitBridge) -> Self {
        let mut ops = Vec::new();
        if let Some(d) = dec {
            let [gx, gm, gp] = d.sim_rates(bridge);
            for (op2, rate) in [
                (pauli::xrep::sx(), gx),
                (pauli::xrep::sminus_x(), gm),
                (pauli::xrep::splus_x(), gp),
            ] {
                if rate > 0.0 {
                    let a = flux_operator(&op2);
                    let ad = a.adjoint();
                    ops.push((a, ad, ad * a, rate));
                }
            }
        }
        Self { ops }
    }
}

/// One RK4 step of either equation, generic over the state representation.
trait Stepper {
    type State: Clone;
    fn step(&self, t: f64, dt: f64, s: &Self::State) -> Self::State;
    fn diff(a: &Self::State, b: &Self::State) -> f64;
}

struct SchrodingerStepper<'a> {
    h: &'a HamiltonianModel,
}

impl Stepper for SchrodingerStepper<'_> {
    type State = Ket4;

    fn step(&self, t: f64, dt: f64, psi: &Ket4) -> Ket4 {
        let rhs = |h: &Op4, s: &Ket4| -> Ket4 { -(h * s) * C64::i() };
        let h0 = self.h.at(t);
        let h1 = self.h.at(t + dt / 2.0);
        let h2 = self.h.at(t + dt);
        let k1 = rhs(&h0, psi);
        let k2 = rhs(&h1, &(psi + k1.scale(dt / 2.0)));
        let k3 = rhs(&h1, &(psi + k2.scale(dt / 2.0)));
        let k4 = rhs(&h2, &(psi + k3.scale(dt)));
        psi + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0)
    }

    fn diff(a: &Ket4, b: &Ket4) -> f64 {
        (a - b).norm()
    }
}

struct LindbladStepper<'a> {
    h: &'a HamiltonianModel,
    channels: Channels,
}

impl LindbladStepper<'_> {
    fn rhs(&self, h: &Op4, rho: &Op4) -> Op4 {
        let mut d = (h * rho - rho * h) * (-C64::i());
        for (a, ad, ada, rate) in &self.channels.ops {
            d += ((a * rho * ad) - (ada * rho + rho * ada).scale(0.5)).scale(*rate);
        }
        d
    }
}

impl Stepper for LindbladStepper<'_> {
    type State = Op4;

    fn step(&self, t: f64, dt: f64, rho: &Op4) -> Op4 {
        let h0 = self.h.at(t);
        let h1 = self.h.at(t + dt / 2.0);
        let h2 = self.h.at(t + dt);
        let k1 = self.rhs(&h0, rho);
        let k2 = self.rhs(&h1, &(rho + k1.scale(dt / 2.0)));
        let k3 = self.rhs(&h1, &(rho + k2.scale(dt / 2.0)));
        let k4 = self.rhs(&h2, &(rho + k3.scale(dt)));
        rho + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0)
    }

    fn diff(a: &Op4, b: &Op4) -> f64 {
        (a - b).norm()
    }
}

/// Fixed steps of `dt`, final step clipped to land exactly on `t_max`.
struct StepPlan {
    dt: f64,
    n_steps: usize,
    t_max: f64,
    stride: usize,
}

impl StepPlan {
    fn new(cfg: &IntegratorConfig) -> Self {
        let n_steps = (cfg.t_max / cfg.dt - 1e-9).ceil().max(1.0) as usize;
        Self { dt: cfg.dt, n_steps, t_max: cfg.t_max, stride: cfg.record_stride }
    }

    fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_max
        } else {
            self.dt * k as f64
        }
    }

    fn records(&self, k: usize) -> bool {
        k == self.n_steps || k % self.stride == 0
    }
}

fn drive<S, R>(stepper: &S, cfg: &IntegratorConfig, state0: S::State, mut record: R) -> Result<()>
where
    S: Stepper,
    R: FnMut(f64, &S::State) -> Result<()>,
{
    let plan = StepPlan::new(cfg);
    let mut state = state0;
    record(0.0, &state)?;
    match cfg.method {
        Method::Rk4 => {
            for k in 0..plan.n_steps {
                let t = plan.time(k);
                state = stepper.step(t, plan.time(k + 1) - t, &state);
                if plan.records(k + 1) {
                    record(plan.time(k + 1), &state)?;
                }
            }
        }
        Method::Rk4Adaptive { tol } => {
            for k in 0..plan.n_steps {
                let t0 = plan.time(k);
                let t1 = plan.time(k + 1);
                state = adaptive_span(stepper, t0, t1, tol, state);
                if plan.records(k + 1) {
                    record(t1, &state)?;
                }
            }
        }
    }
    Ok(())
}

/// Advance across (t0, t1) with step-doubling error control: a candidate
/// step is accepted when one full step and two half steps agree within
/// `tol`; the more accurate two-half-step result is kept.
fn adaptive_span<S: Stepper>(stepper: &S, t0: f64, t1: f64, tol: f64, mut state: S::State) -> S::State {
    let mut t = t0;
    let mut h = t1 - t0;
    while t < t1 - 1e-15 * t1.abs().max(1.0) {
        let dt = h.min(t1 - t);
        let full = stepper.step(t, dt, &state);
        let half = stepper.step(t, dt / 2.0, &state);
        let halves = stepper.step(t + dt / 2.0, dt / 2.0, &half);
        let err = S::diff(&full, &halves);
        if err <= tol || dt <= (t1 - t0) / (1 << 16) as f64 {
            state = halves;
            t += dt;
            if err < tol / 32.0 {
                h = (h * 2.0).min(t1 - t0);
            }
        } else {
            h = dt / 2.0;
        }
    }
    state
}

fn record_pure(out: &mut Vec<JointState>, times: &mut Vec<f64>, t: f64, psi: &Ket4) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_RECORD_TOL {
        return Err(Error::IntegrationBreach {
            time: t,
            what: format!("state norm {norm} drifted beyond {NORM_RECORD_TOL:.0e}"),
        });
    }
    // Construction tolerance is tighter than the drift budget; store a
    // normalized copy without touching the integrator state.
    let state = JointState::new(psi.unscale(norm)).expect("normalized state");
    times.push(t);
    out.push(state);
    Ok(())
}

fn record_density(
    out: &mut Vec<JointDensityMatrix>,
    times: &mut Vec<f64>,
    t: f64,
    rho: &Op4,
) -> Result<()> {
    let state =
        JointDensityMatrix::new_checked(*rho, RECORD_TOL, RECORD_TOL, POSITIVITY_RECORD_FLOOR)
            .map_err(|e| Error::IntegrationBreach { time: t, what: e.to_string() })?;
    times.push(t);
    out.push(state);
    Ok(())
}

/// Integrate the Schrödinger equation i dψ/dt = H(t) ψ.
///
/// Every recorded state must keep its norm within 1e−6 of one; a breach
/// aborts with the first offending time.
pub fn evolve_schrodinger(
    h: &HamiltonianModel,
    psi0: &JointState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate_for(h)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let stepper = SchrodingerStepper { h };
    drive(&stepper, cfg, *psi0.ket(), |t, psi| record_pure(&mut states, &mut times, t, psi))?;
    Ok(Trajectory { times, states: States::Pure(states), observables: BTreeMap::new() })
}

/// Integrate the Lindblad master equation
/// dρ/dt = −i[H(t), ρ] + Σ_k Γ_k (a_k ρ a_k† − ½{a_k†a_k, ρ})
/// with the flux-qubit jump operators of `dec`; `dec = None` integrates the
/// closed von Neumann equation.
///
/// Recorded matrices must stay Hermitian and unit-trace within 1e−8 and
/// positive within −1e−8.
pub fn evolve_lindblad(
    h: &HamiltonianModel,
    dec: Option<&DecoherenceModel>,
    bridge: &UnitBridge,
    rho0: &JointDensityMatrix,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate_for(h)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let stepper = LindbladStepper { h, channels: Channels::build(dec, bridge) };
    drive(&stepper, cfg, *rho0.matrix(), |t, rho| record_density(&mut states, &mut times, t, rho))?;
    Ok(Trajectory { times, states: States::Density(states), observables: BTreeMap::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{
        build_effective, build_rotating, build_rotating_full, build_zero, Branch, SystemParams,
    };
    use crate::qstate::{partial_trace, Op2, Party, Qubit2State};
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn bridge() -> UnitBridge {
        UnitBridge::default()
    }

    #[test]
    fn rate_mapping_reference_values() {
        let d = rates_from_times(20.0, 15.0).unwrap();
        assert_relative_eq!(d.gamma_x_per_us(), 0.0125, max_relative = 1e-12);
        assert_relative_eq!(d.gamma_minus_per_us(), 0.0125, max_relative = 1e-12);
        assert_relative_eq!(d.gamma_plus_per_us(), 0.0125 + 1.0 / 15.0, max_relative = 1e-12);

        let d = rates_from_times(10.0, 10.0).unwrap();
        assert_relative_eq!(d.gamma_x_per_us(), 0.025, max_relative = 1e-12);
        assert_relative_eq!(d.gamma_plus_per_us(), 0.125, max_relative = 1e-12);
    }

    #[test]
    fn infinite_rabi_decay_time_makes_pumping_symmetric() {
        let d = rates_from_times(20.0, f64::INFINITY).unwrap();
        assert_eq!(d.gamma_plus_per_us(), d.gamma_minus_per_us());
    }

    #[test]
    fn nonpositive_times_are_rejected() {
        assert!(rates_from_times(0.0, 10.0).is_err());
        assert!(rates_from_times(10.0, -1.0).is_err());
    }

    #[test]
    fn zero_hamiltonian_keeps_the_state_constant() {
        let sp = SystemParams::default();
        let h = build_zero(&sp);
        let psi0 = JointState::basis(2);
        let cfg = IntegratorConfig::for_model(&h, 3.0).with_stride(50);
        let traj = evolve_schrodinger(&h, &psi0, &cfg).unwrap();
        match &traj.states {
            States::Pure(v) => {
                for s in v {
                    assert!(s.overlap(&psi0) > 1.0 - 1e-12);
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn bare_dressing_drive_gives_textbook_rabi_oscillations() {
        // Under H₀ alone a flux qubit starting in |1⟩ Rabi-flops at Ω:
        // P₁(t) = cos²(Ωt/2); the spin factor only contributes a phase.
        let sp = SystemParams::default();
        let (h0, _) = build_rotating(&sp);
        // Flux |1⟩ = (|+⟩ + |−⟩)/√2, i.e. x-basis angles (π/4, 0).
        let flux_excited = Qubit2State::from_angles(std::f64::consts::FRAC_PI_4, 0.0);
        let psi0 = JointState::from_product(&Qubit2State::excited(), &flux_excited);
        let t_max = 3.0 * TAU / sp.rabi.abs();
        let dt = TAU / (sp.rabi.abs() * 400.0);
        let cfg = IntegratorConfig::for_model(&h0, t_max).with_dt(dt).with_stride(13);
        let traj = evolve_schrodinger(&h0, &psi0, &cfg).unwrap();
        for (t, p) in traj.times.iter().zip(traj.p1_series()) {
            let expect = (sp.rabi * t / 2.0).cos().powi(2);
            assert_relative_eq!(p, expect, epsilon = 1e-6);
        }
    }

    #[test]
    fn coupled_rotating_frame_shows_one_collapse_revival_over_two_periods() {
        // Slow envelope of the doubly-excited population closes one
        // collapse-revival cycle over two coupling periods; checked at two
        // step sizes.
        let sp = SystemParams::default();
        let h = build_rotating_full(&sp);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi0 = JointState::new(Ket4::new(
            C64::from(0.0),
            C64::from(0.0),
            C64::new(s, 0.0),
            C64::new(s, 0.0),
        ))
        .unwrap();
        let t_max = 2.0 * sp.coupling_period();
        let mut collapse_minima = Vec::new();
        for points in [20.0, 40.0] {
            let dt = TAU / (h.fastest_frequency() * points);
            let cfg = IntegratorConfig { dt, t_max, record_stride: 2_000, method: Method::Rk4 };
            let traj = evolve_schrodinger(&h, &psi0, &cfg).unwrap();
            let p11: Vec<f64> = match &traj.states {
                States::Pure(v) => v.iter().map(|st| st.overlap(&psi0)).collect(),
                _ => unreachable!(),
            };
            let n = p11.len();
            let min_mid = p11[n / 3..2 * n / 3].iter().cloned().fold(f64::INFINITY, f64::min);
            let tail_max = p11[8 * n / 10..].iter().cloned().fold(0.0_f64, f64::max);
            assert!(min_mid < 0.1, "collapse did not empty the population: {min_mid}");
            assert!(tail_max > 0.8, "revival missing: {tail_max}");
            collapse_minima.push(min_mid);
        }
        assert!((collapse_minima[0] - collapse_minima[1]).abs() < 1e-2);
    }

    #[test]
    fn closed_lindblad_matches_schrodinger_projector() {
        let sp = SystemParams::default();
        let h = build_effective(&sp, Branch::Plus);
        let psi0 = JointState::from_product(&Qubit2State::ground(), &Qubit2State::excited());
        let cfg = IntegratorConfig::for_model(&h, sp.coupling_period()).with_stride(40);
        let pure = evolve_schrodinger(&h, &psi0, &cfg).unwrap();
        let mixed =
            evolve_lindblad(&h, None, &bridge(), &JointDensityMatrix::from_pure(&psi0), &cfg)
                .unwrap();
        let (pures, densities) = match (&pure.states, &mixed.states) {
            (States::Pure(a), States::Density(b)) => (a, b),
            _ => unreachable!(),
        };
        for (s, r) in pures.iter().zip(densities) {
            assert!((s.density() - r.matrix()).norm() < 1e-8);
        }
    }

    #[test]
    fn dissipator_steady_state_matches_the_rate_equation() {
        // With H = 0 the x-basis populations obey
        // dp₊/dt = Γ₊(1 − p₊) − Γ₋ p₊, so
        // p₊(t) = p∞ + (p₊(0) − p∞)e^{−(Γ₊+Γ₋)t}, p∞ = Γ₊/(Γ₊+Γ₋).
        let sp = SystemParams::default();
        let h = build_zero(&sp);
        let dec = rates_from_times(5.0, 10.0).unwrap();
        let [_, gm, gp] = dec.sim_rates(&bridge());
        let rho0 = JointDensityMatrix::from_pure(&JointState::from_product(
            &Qubit2State::excited(),
            &Qubit2State::ground(), // flux |+⟩
        ));
        let cfg = IntegratorConfig::for_model(&h, 3.0 * TAU).with_stride(100);
        let traj = evolve_lindblad(&h, Some(&dec), &bridge(), &rho0, &cfg).unwrap();
        let plus = flux_operator(&pauli::xrep::plus_projector());
        let series = traj.expectation_series(&plus);
        let p_inf = gp / (gp + gm);
        for (t, p) in traj.times.iter().zip(&series) {
            let expect = p_inf + (1.0 - p_inf) * (-(gp + gm) * t).exp();
            assert_relative_eq!(*p, expect, epsilon = 1e-8);
        }

        // Equal rates relax the flux qubit toward the maximally mixed state.
        let sym = dec.with_symmetric_pumping();
        let long = IntegratorConfig::for_model(&h, 40.0 * TAU).with_stride(4_000);
        let traj = evolve_lindblad(&h, Some(&sym), &bridge(), &rho0, &long).unwrap();
        let reduced = partial_trace(traj.last_density().unwrap().matrix(), Party::Spin);
        assert!((reduced - Op2::identity().scale(0.5)).norm() < 1e-4);
    }

    #[test]
    fn damped_resonant_oscillation_loses_amplitude() {
        let sp = SystemParams::default();
        let h = build_effective(&sp, Branch::Plus);
        let dec = rates_from_times(20.0, 15.0).unwrap();
        let flux_excited = Qubit2State::from_angles(std::f64::consts::FRAC_PI_4, 0.0);
        let rho0 = JointDensityMatrix::from_pure(&JointState::from_product(
            &Qubit2State::ground(),
            &flux_excited,
        ));
        let cfg = IntegratorConfig::for_model(&h, 4.0 * sp.coupling_period()).with_stride(10);
        let traj = evolve_lindblad(&h, Some(&dec), &bridge(), &rho0, &cfg).unwrap();
        let p1 = traj.p1_series();
        let n = p1.len();
        let first_max = p1[..n / 4].iter().cloned().fold(0.0_f64, f64::max);
        let last_max = p1[3 * n / 4..].iter().cloned().fold(0.0_f64, f64::max);
        assert!(last_max < first_max - 0.05, "no damping: {first_max} -> {last_max}");
        assert!((traj.last_density().unwrap().matrix().trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn step_halving_convergence_on_the_default_model() {
        let sp = SystemParams::default();
        let h = build_effective(&sp, Branch::Plus);
        let psi0 = JointState::from_product(&Qubit2State::excited(), &Qubit2State::ground());
        let t_max = 2.0 * sp.coupling_period();
        let base = IntegratorConfig::for_model(&h, t_max).with_stride(100);
        let halved = IntegratorConfig { dt: base.dt / 2.0, record_stride: 200, ..base };
        let a = evolve_schrodinger(&h, &psi0, &base).unwrap();
        let b = evolve_schrodinger(&h, &psi0, &halved).unwrap();
        for (x, y) in a.p1_series().iter().zip(b.p1_series()) {
            assert!((x - y).abs() < 1e-6, "closed-system step halving moved P₁ by {}", x - y);
        }

        let dec = rates_from_times(20.0, 15.0).unwrap();
        let rho0 = JointDensityMatrix::from_pure(&psi0);
        let a = evolve_lindblad(&h, Some(&dec), &bridge(), &rho0, &base).unwrap();
        let b = evolve_lindblad(&h, Some(&dec), &bridge(), &rho0, &halved).unwrap();
        for (x, y) in a.p1_series().iter().zip(b.p1_series()) {
            assert!((x - y).abs() < 1e-5, "Lindblad step halving moved P₁ by {}", x - y);
        }
    }

    #[test]
    fn asymmetric_pumping_separates_spin_initial_states_and_nulling_collapses_them() {
        // P₁(t) depends on whether the spin starts in |0⟩ or |1⟩ only
        // through the Γ₊/Γ₋ asymmetry; forcing Γ₊ = Γ₋ makes the curves
        // coincide.
        let sp = SystemParams::default();
        let h = build_effective(&sp, Branch::Plus);
        let dec = rates_from_times(20.0, 15.0).unwrap();
        let cfg = IntegratorConfig::for_model(&h, 4.0 * sp.coupling_period()).with_stride(20);
        let flux_excited = Qubit2State::from_angles(std::f64::consts::FRAC_PI_4, 0.0);
        let run = |spin: Qubit2State, d: DecoherenceModel| -> Vec<f64> {
            let rho0 =
                JointDensityMatrix::from_pure(&JointState::from_product(&spin, &flux_excited));
            evolve_lindblad(&h, Some(&d), &bridge(), &rho0, &cfg).unwrap().p1_series()
        };
        let p0 = run(Qubit2State::ground(), dec);
        let p1 = run(Qubit2State::excited(), dec);
        let max_sep = p0.iter().zip(&p1).map(|(a, b)| (a - b).abs()).fold(0.0_f64, f64::max);
        assert!(max_sep > 0.01, "asymmetric damping left no spin dependence: {max_sep}");

        let sym = dec.with_symmetric_pumping();
        let q0 = run(Qubit2State::ground(), sym);
        let q1 = run(Qubit2State::excited(), sym);
        let max_null = q0.iter().zip(&q1).map(|(a, b)| (a - b).abs()).fold(0.0_f64, f64::max);
        assert!(max_null < 1e-6, "symmetric rates should null the spin dependence: {max_null}");
    }

    #[test]
    fn oversized_steps_are_rejected() {
        let sp = SystemParams::default();
        let (h0, _) = build_rotating(&sp);
        let cfg = IntegratorConfig { dt: 1.0, t_max: 10.0, record_stride: 1, method: Method::Rk4 };
        let err = evolve_schrodinger(&h0, &JointState::basis(0), &cfg).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge { .. }));
    }

    #[test]
    fn adaptive_variant_agrees_with_fixed_step() {
        let sp = SystemParams::default();
        let h = build_effective(&sp, Branch::Plus);
        let psi0 = JointState::from_product(&Qubit2State::excited(), &Qubit2State::ground());
        let cfg = IntegratorConfig::for_model(&h, sp.coupling_period()).with_stride(50);
        let adaptive = IntegratorConfig { method: Method::Rk4Adaptive { tol: 1e-10 }, ..cfg };
        let a = evolve_schrodinger(&h, &psi0, &cfg).unwrap();
        let b = evolve_schrodinger(&h, &psi0, &adaptive).unwrap();
        assert_eq!(a.times, b.times);
        for (x, y) in a.p1_series().iter().zip(b.p1_series()) {
            assert!((x - y).abs() < 1e-7);
        }
    }
}
