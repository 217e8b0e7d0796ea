use crate::solver::IterationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("invalid boundary specification: {0}")]
    InvalidBoundarySpec(String),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The fixed-stress iteration on a slab hit its iteration cap or blew up.
    #[error("fixed-stress iteration did not converge on slab {slab} ({} iterations, {:?})", report.iterations, report.termination)]
    Divergence {
        slab: usize,
        report: Box<IterationReport>,
    },

    #[error("slab {slab}: {source}")]
    AtSlab {
        slab: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_slab(self, slab: usize) -> Self {
        match self {
            e @ (Error::Divergence { .. } | Error::AtSlab { .. }) => e,
            other => Error::AtSlab {
                slab,
                source: Box::new(other),
            },
        }
    }
}
