use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("basis of size {basis_size} cannot resolve {requested} levels ({detail})")]
    Truncation {
        basis_size: usize,
        requested: usize,
        detail: String,
    },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix within {max_iterations} sweeps")]
    EigenNonConvergence { dim: usize, max_iterations: usize },

    #[error("steady state is not unique: {null_dim} near-zero singular values (expected 1)")]
    DegenerateSteadyState { null_dim: usize },

    #[error("steady-state residual {residual:.3e} exceeds tolerance")]
    SteadyStateResidual { residual: f64 },

    #[error("time step {step:.3e} us too large: step * max_rate = {product:.3e} >= 0.1")]
    StepSize { step: f64, product: f64 },

    #[error("drive envelope is not finite at t = {t} us")]
    NonFiniteEnvelope { t: f64 },

    #[error("probe Rabi amplitude must be positive to define a transmission coefficient")]
    ZeroProbe,

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("record has zero energy")]
    ZeroEnergy,

    #[error("window [{start}, {end}] us exceeds the simulation grid [{grid_start}, {grid_end}] us")]
    WindowOutsideGrid {
        start: f64,
        end: f64,
        grid_start: f64,
        grid_end: f64,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("config: {0}")]
    Config(#[from] crate::config::ConfigError),

    #[error("no EIT/ATS weight crossing in [{oc_min}, {oc_max}] MHz")]
    NoCrossing {
        oc_min: f64,
        oc_max: f64,
        /// (Ω_c MHz, averaged w̄_EIT) pairs for inspection.
        curve: Vec<(f64, f64)>,
    },

    #[error("at flux {flux}: {source}")]
    AtFlux {
        flux: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("at probe detuning {delta_p} MHz: {source}")]
    AtDetuning {
        delta_p: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Innermost error, with flux/detuning context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtFlux { source, .. } | Error::AtDetuning { source, .. } => source.root(),
            other => other,
        }
    }
}
