use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("multiplier is not in the normal cone of the PSD cone at Y")]
    NotInNormalCone,

    #[error("direction is not in the tangent cone of the PSD cone at Y")]
    NotInTangentCone,

    #[error("pivot block M_pp + t V_pp is not positive definite (smallest eigenvalue {min_eigenvalue:e}); t is too large")]
    PivotNotPositiveDefinite { min_eigenvalue: f64 },

    #[error("<Y*, V> = {inner:e} > 0 with V tangent; the -infinity branch is unreachable for Y* in the normal cone")]
    MinusInfinityAnomaly { inner: f64 },

    #[error("second subderivative is +infinity while the closed-form curvature term is finite ({detail})")]
    MarginAnomaly { detail: String },

    #[error("no feasible sample found on the t-grid")]
    NoFeasibleSample,

    #[error("candidate point is infeasible: dist(F(x), PSD cone) = {dist:e}")]
    InfeasiblePoint { dist: f64 },

    #[error("malformed input: {0}")]
    Input(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable snake_case name of the variant, used in JSON reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::EigenNoConvergence { .. } => "eigen_no_convergence",
            Error::NotPsd { .. } => "not_psd",
            Error::NotInNormalCone => "not_in_normal_cone",
            Error::NotInTangentCone => "not_in_tangent_cone",
            Error::PivotNotPositiveDefinite { .. } => "pivot_not_positive_definite",
            Error::MinusInfinityAnomaly { .. } => "minus_infinity_anomaly",
            Error::MarginAnomaly { .. } => "margin_anomaly",
            Error::NoFeasibleSample => "no_feasible_sample",
            Error::InfeasiblePoint { .. } => "infeasible_point",
            Error::Input(_) => "input",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
