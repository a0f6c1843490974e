use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HopfieldError {
    #[error("frequency {omega} lies on the transverse resonance {omega_t} (|ω²-ω_T²| below guard)")]
    PoleAtResonance { omega: f64, omega_t: f64 },

    #[error("dielectric function vanishes at ω = {omega} (longitudinal frequency)")]
    ZeroEpsilon { omega: f64 },

    #[error("ω = {omega} is outside the surface window (ε = {epsilon} ≥ -1)")]
    OutsideSurfaceWindow { omega: f64, epsilon: f64 },

    #[error("c·k_par = {k_par} is below the light-line edge ω_T = {omega_t}")]
    BelowLightLineEdge { k_par: f64, omega_t: f64 },

    #[error("grazing propagation: radicand {radicand} is within tolerance of zero")]
    EvanescentBranchAmbiguity { radicand: f64 },

    #[error("closed-form normalization {closed} disagrees with quadrature {quadrature} (relative {relative:e})")]
    QuadratureDisagreement {
        closed: f64,
        quadrature: f64,
        relative: f64,
    },

    #[error("adaptive quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    QuadratureFailed { estimate: f64, error: f64 },

    #[error("grid spacing {h} is coarser than the resolution limit {limit}")]
    ResolutionTooCoarse { h: f64, limit: f64 },

    #[error("eigenvector {index} has near-null Kreĭn norm {norm:e}")]
    DegenerateKreinNorm { index: usize, norm: f64 },

    #[error("spectrum holds {found} eigenpairs but the operator dimension is {dim}")]
    IncompleteSpectrum { found: usize, dim: usize },

    #[error("bath renormalization integral diverges")]
    DivergentBathIntegral,

    #[error("ω = {omega} coincides with a bath support endpoint")]
    SingularEndpoint { omega: f64 },

    #[error("transfer-matrix solve failed: {0}")]
    NonConvergentTransfer(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, HopfieldError>;
