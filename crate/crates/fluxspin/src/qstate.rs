//! Complex linear algebra on the 2- and 4-dimensional Hilbert spaces of the
//! spin ⊗ flux-qubit system: Pauli operators, tensor products, partial
//! traces, fidelities, and Haar-random state sampling.
//!
//! Basis conventions, fixed once and used everywhere downstream:
//! * single spin: σ_z eigenbasis (|0⟩, |1⟩) with σ_z = |1⟩⟨1| − |0⟩⟨0|;
//! * single flux qubit: σ_x eigenbasis (|+⟩, |−⟩), |±⟩ = (|1⟩ ± |0⟩)/√2;
//! * joint space: (|0,+⟩, |0,−⟩, |1,+⟩, |1,−⟩), spin factor first.
//!
//! Everything here is immutable after construction and every operation is
//! pure; values can be shared freely across worker threads. Randomness only
//! enters through an explicitly passed RNG.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};

pub type Op2 = Matrix2<C64>;
pub type Op4 = Matrix4<C64>;
pub type Ket2 = Vector2<C64>;
pub type Ket4 = Vector4<C64>;

/// Squared-norm tolerance for pure states after construction.
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity tolerance for density matrices at construction.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices at construction.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor for density-matrix positivity; fourth-order integrators
/// introduce O(dt⁴) violations, so the check cannot be exact.
pub const POSITIVITY_FLOOR: f64 = -1e-8;

/// Pauli and ladder operators in the two bases used by the model.
pub mod pauli {
    use super::{C64, Op2};

    const O: C64 = C64::new(0.0, 0.0);
    const L: C64 = C64::new(1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);

    /// 2×2 identity.
    pub fn id() -> Op2 {
        Op2::identity()
    }

    // ---- σ_z eigenbasis (|0⟩, |1⟩), with σ_z = |1⟩⟨1| − |0⟩⟨0| ----

    pub fn sz() -> Op2 {
        Op2::new(-L, O, O, L)
    }

    pub fn sx() -> Op2 {
        Op2::new(O, L, L, O)
    }

    /// σ_y fixed by σ_± = (σ_x ± iσ_y)/2 with σ_+ = |1⟩⟨0|.
    pub fn sy() -> Op2 {
        Op2::new(O, I, -I, O)
    }

    /// Raising operator |1⟩⟨0|.
    pub fn splus() -> Op2 {
        Op2::new(O, O, L, O)
    }

    /// Lowering operator |0⟩⟨1|.
    pub fn sminus() -> Op2 {
        Op2::new(O, L, O, O)
    }

    /// The same operators written in the σ_x eigenbasis (|+⟩, |−⟩).
    ///
    /// These are the representations to use for the flux-qubit factor of the
    /// joint basis. σ_{±,x} are the ladder operators of that basis:
    /// σ_{+,x} = |+⟩⟨−| = (σ_z − iσ_y)/2 and σ_{−,x} = |−⟩⟨+| = (σ_z + iσ_y)/2.
    pub mod xrep {
        use super::{C64, L, O, Op2};
        const H: C64 = C64::new(0.5, 0.0);
        const I: C64 = C64::new(0.0, 1.0);

        pub fn sx() -> Op2 {
            Op2::new(L, O, O, -L)
        }

        pub fn sz() -> Op2 {
            Op2::new(O, L, L, O)
        }

        pub fn sy() -> Op2 {
            Op2::new(O, I, -I, O)
        }

        pub fn splus() -> Op2 {
            Op2::new(H, -H, H, -H)
        }

        pub fn sminus() -> Op2 {
            Op2::new(H, H, -H, -H)
        }

        /// σ_{+,x} = |+⟩⟨−|.
        pub fn splus_x() -> Op2 {
            Op2::new(O, L, O, O)
        }

        /// σ_{−,x} = |−⟩⟨+|.
        pub fn sminus_x() -> Op2 {
            Op2::new(O, O, L, O)
        }

        /// Projector on the excited state |1⟩ = (|+⟩ + |−⟩)/√2.
        pub fn excited_projector() -> Op2 {
            Op2::new(H, H, H, H)
        }

        /// Projector on |+⟩.
        pub fn plus_projector() -> Op2 {
            Op2::new(L, O, O, O)
        }
    }
}

/// Kronecker product in the fixed ordering spin ⊗ flux-qubit.
///
/// Both factors must be supplied in the basis their party uses (spin: σ_z
/// eigenbasis, flux qubit: σ_x eigenbasis); the result then acts on the
/// joint basis (|0,+⟩, |0,−⟩, |1,+⟩, |1,−⟩). Dimensions are enforced by the
/// types, so no runtime dimension error is possible.
pub fn tensor(a: &Op2, b: &Op2) -> Op4 {
    let mut out = Op4::zeros();
    a.kronecker(b).clone_into(&mut out);
    out
}

/// Which party of the joint system to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Spin,
    FluxQubit,
}

/// Partial trace over one party; returns the reduced state of the other.
///
/// The result is expressed in the remaining party's own basis (σ_z for the
/// spin, σ_x for the flux qubit). Works on arbitrary 4×4 inputs and is
/// linear and trace-preserving.
pub fn partial_trace(rho: &Op4, traced: Party) -> Op2 {
    let mut out = Op2::zeros();
    match traced {
        Party::Spin => {
            for i in 0..2 {
                for j in 0..2 {
                    out[(i, j)] = rho[(i, j)] + rho[(2 + i, 2 + j)];
                }
            }
        }
        Party::FluxQubit => {
            for s in 0..2 {
                for t in 0..2 {
                    out[(s, t)] = rho[(2 * s, 2 * t)] + rho[(2 * s + 1, 2 * t + 1)];
                }
            }
        }
    }
    out
}

/// Maximum element-wise deviation of `m` from its conjugate transpose.
pub fn hermiticity_error<const N: usize>(
    m: &nalgebra::SMatrix<C64, N, N>,
) -> f64 {
    let adj = m.adjoint();
    let mut worst = 0.0_f64;
    for i in 0..N {
        for j in 0..N {
            worst = worst.max((m[(i, j)] - adj[(i, j)]).norm());
        }
    }
    worst
}

/// Pure-target fidelity ⟨ψ|ρ|ψ⟩ of a 2×2 density matrix.
pub fn fidelity(rho: &Op2, psi: &Qubit2State) -> f64 {
    let v = psi.ket();
    v.dotc(&(rho * v)).re
}

/// Expectation values (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩) of a 2×2 density matrix, taken
/// with the operators of the basis the matrix is written in.
pub fn bloch_vector(rho: &Op2) -> [f64; 3] {
    [
        (rho * pauli::sx()).trace().re,
        (rho * pauli::sy()).trace().re,
        (rho * pauli::sz()).trace().re,
    ]
}

/// A normalized pure state of a single two-level system.
///
/// The amplitudes are basis-agnostic: for the spin they are read in the σ_z
/// eigenbasis (|0⟩, |1⟩), for the flux qubit in the σ_x eigenbasis
/// (|+⟩, |−⟩), matching the global convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubit2State {
    amps: Ket2,
}

impl Qubit2State {
    /// Build from raw amplitudes; fails unless the squared norm is within
    /// `NORM_TOL` of one.
    pub fn new(a: C64, b: C64) -> Result<Self> {
        let amps = Ket2::new(a, b);
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Invariant(format!(
                "qubit state squared norm {n2} deviates from 1 beyond {NORM_TOL}"
            )));
        }
        Ok(Self { amps })
    }

    /// Build from raw amplitudes, renormalizing. Fails on the zero vector.
    pub fn renormalized(a: C64, b: C64) -> Result<Self> {
        let amps = Ket2::new(a, b);
        let n = amps.norm();
        if n == 0.0 {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        Ok(Self { amps: amps.unscale(n) })
    }

    /// The (θ, φ) parameterization cos θ|g⟩ + e^{iφ} sin θ|e⟩, where (g, e)
    /// are the two basis states of whichever party the value describes.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let amps = Ket2::new(
            C64::new(theta.cos(), 0.0),
            C64::from_polar(theta.sin(), phi),
        );
        Self { amps }
    }

    pub fn ground() -> Self {
        Self::from_angles(0.0, 0.0)
    }

    pub fn excited() -> Self {
        Self::from_angles(std::f64::consts::FRAC_PI_2, 0.0)
    }

    pub fn ket(&self) -> &Ket2 {
        &self.amps
    }

    /// Projector |ψ⟩⟨ψ|.
    pub fn density(&self) -> Op2 {
        self.amps * self.amps.adjoint()
    }

    pub fn bloch(&self) -> [f64; 3] {
        bloch_vector(&self.density())
    }
}

/// A normalized pure state of the joint spin ⊗ flux-qubit system in the
/// ordered basis (|0,+⟩, |0,−⟩, |1,+⟩, |1,−⟩).
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    amps: Ket4,
}

impl JointState {
    pub fn new(amps: Ket4) -> Result<Self> {
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Invariant(format!(
                "joint state squared norm {n2} deviates from 1 beyond {NORM_TOL}"
            )));
        }
        Ok(Self { amps })
    }

    /// Basis state by joint index (0 = |0,+⟩, 1 = |0,−⟩, 2 = |1,+⟩, 3 = |1,−⟩).
    pub fn basis(index: usize) -> Self {
        let mut amps = Ket4::zeros();
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// Product state spin ⊗ flux; each factor in its own basis.
    pub fn from_product(spin: &Qubit2State, flux: &Qubit2State) -> Self {
        let s = spin.ket();
        let f = flux.ket();
        let amps = Ket4::new(s[0] * f[0], s[0] * f[1], s[1] * f[0], s[1] * f[1]);
        Self { amps }
    }

    pub fn ket(&self) -> &Ket4 {
        &self.amps
    }

    pub fn density(&self) -> Op4 {
        self.amps * self.amps.adjoint()
    }

    /// |⟨other|self⟩|².
    pub fn overlap(&self, other: &JointState) -> f64 {
        self.amps.dotc(&other.amps).norm_sqr()
    }

    /// Population of the given joint basis state.
    pub fn population(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }
}

/// A validated 4×4 density operator on the joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDensityMatrix {
    m: Op4,
}

impl JointDensityMatrix {
    /// Validate with the construction tolerances (Hermiticity 1e−10, trace
    /// 1e−10, eigenvalue floor −1e−8).
    pub fn new(m: Op4) -> Result<Self> {
        Self::new_checked(m, HERMITICITY_TOL, TRACE_TOL, POSITIVITY_FLOOR)
    }

    /// Validate with caller-supplied tolerances. Trajectory recording uses
    /// looser (1e−8) Hermiticity and trace bounds than construction.
    pub fn new_checked(m: Op4, herm_tol: f64, trace_tol: f64, eig_floor: f64) -> Result<Self> {
        let herm = hermiticity_error(&m);
        if herm > herm_tol {
            return Err(Error::Invariant(format!(
                "density matrix Hermiticity deviation {herm:.3e} exceeds {herm_tol:.1e}"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::Invariant(format!(
                "density matrix trace {tr} deviates from 1 beyond {trace_tol:.1e}"
            )));
        }
        let min_eig = min_eigenvalue(&m);
        if min_eig < eig_floor {
            return Err(Error::Invariant(format!(
                "density matrix eigenvalue {min_eig:.3e} below the positivity floor {eig_floor:.1e}"
            )));
        }
        Ok(Self { m })
    }

    pub fn from_pure(psi: &JointState) -> Self {
        Self { m: psi.density() }
    }

    pub fn matrix(&self) -> &Op4 {
        &self.m
    }
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &Op4) -> f64 {
    let herm = (m + m.adjoint()).scale(0.5);
    herm.symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Haar angles (θ, φ) with cos 2θ uniform on [−1, 1] and φ uniform on
/// [0, 2π). Because the state parameterization uses cos θ/sin θ without
/// half angles, the Bloch polar angle is 2θ; sampling cos 2θ uniformly is
/// what makes the Bloch vector uniform on the sphere.
pub fn haar_random_angles<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u: f64 = rng.gen_range(-1.0..=1.0);
    let theta = 0.5 * u.acos();
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    (theta, phi)
}

/// A pure qubit state drawn uniformly from the Bloch sphere.
pub fn haar_random_state<R: Rng + ?Sized>(rng: &mut R) -> Qubit2State {
    let (theta, phi) = haar_random_angles(rng);
    Qubit2State::from_angles(theta, phi)
}
