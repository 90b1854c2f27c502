use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("half-space system is unbounded or empty")]
    Unbounded,
    #[error("origin lies on the boundary after recentering")]
    OriginOnBoundary,
    #[error("polytope is not symplectic: Lagrangian 2-faces {0:?}")]
    NonSymplectic(Vec<usize>),
    #[error("2-face {0} is Lagrangian")]
    LagrangianFace(usize),
    #[error("Reeb cone of {dim}-face {face} is not a single ray")]
    NotWellPosed { dim: usize, face: usize },
    #[error("face lattice inconsistent: {0}")]
    Lattice(String),
    #[error("classification ambiguous at trace {trace}")]
    AmbiguousClassification { trace: f64 },
    #[error("matrix is not positive elliptic (trace {trace})")]
    NotElliptic { trace: f64 },
    #[error("no rotation bracket is consistent with the product")]
    BracketConflict,
    #[error("no closed orbit found")]
    NoOrbit,
    #[error("perturbation did not produce a symplectic polytope after {0} attempts")]
    PerturbationFailed(u32),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
    }
}
