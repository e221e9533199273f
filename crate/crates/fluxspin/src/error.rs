use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A state or operator failed its structural invariant on construction.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// The requested step size cannot resolve the fastest frequency of the
    /// selected Hamiltonian model (at least 20 points per fastest period).
    #[error("time step {dt} exceeds the bound {max} for the {frame} frame")]
    StepTooLarge { dt: f64, max: f64, frame: &'static str },

    /// A conserved quantity drifted past tolerance during integration.
    /// `time` is the first offending time, in the integrator's time units.
    #[error("integration invariant breached at t = {time}: {what}")]
    IntegrationBreach { time: f64, what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
