use thiserror::Error;

/// Failure modes shared by the representation, Hamiltonian, spectral and
/// oracle layers.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degenerate representation: hbar - B*theta = {gap:.3e} (planar representation collapses onto the line)")]
    DegenerateRepresentation { gap: f64 },

    #[error(
        "inadmissible gauge r = {r}: pole of the Pi_x coefficient at r = hbar/(B*theta) = {pole}"
    )]
    InadmissibleGauge { r: f64, pole: f64 },

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error(
        "forbidden cross term G[{row}][{col}] = {value:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    NonCanonicalForm {
        row: usize,
        col: usize,
        value: f64,
        tolerance: f64,
    },

    #[error("singular mass M{index}: momentum-squared coefficient {value:.3e} is not positive")]
    SingularMass { index: usize, value: f64 },

    #[error("negative squared frequency Omega{index}^2 = {value:.3e}")]
    NegativeStiffness { index: usize, value: f64 },

    #[error("zero mode: {0}")]
    ZeroModeUnsupported(&'static str),

    #[error("dynamically unstable: S = {s:.6e}, P = {p:.6e} give complex normal-mode frequencies")]
    DynamicallyUnstable { s: f64, p: f64 },

    #[error(
        "characteristic polynomial is not biquadratic: cubic {cubic:.3e}, linear {linear:.3e}"
    )]
    NonBiquadratic { cubic: f64, linear: f64 },

    #[error("eigensolver failed to converge (LAPACK info = {info})")]
    ConvergenceFailure { info: i32 },

    #[error("Fock truncation not converged at N_max = {n_max}: last relative change {change:.3e}")]
    NotConverged { n_max: usize, change: f64 },

    #[error("oracle disagreement: {0}")]
    OracleDisagreement(String),
}

pub type Result<T> = std::result::Result<T, Error>;
