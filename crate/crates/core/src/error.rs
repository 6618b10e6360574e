use thiserror::Error;

/// Errors raised by mesh construction, assembly, factorization and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mesh size must be positive")]
    EmptyMesh,

    #[error("interface at x = {interface_x} does not fall on a grid line of an n = {n} mesh")]
    InterfaceNotGridAligned { n: usize, interface_x: f64 },

    #[error("displacement Dirichlet boundary is empty; rigid body modes are not removed")]
    EmptyDirichletBoundary,

    #[error("unsupported polynomial degree {0} (only Taylor-Hood P2/P1 is available)")]
    UnsupportedDegree(usize),

    #[error("spaces live on different subdomains or have different layouts")]
    SubdomainMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric positive definite (pivot {pivot} = {value:e}){}", block_suffix(.block))]
    NotSpd {
        pivot: usize,
        value: f64,
        block: Option<String>,
    },

    #[error("Sherman-Morrison-Woodbury denominator vanished ({denominator:e})")]
    SmwBreakdown { denominator: f64 },

    #[error("preconditioner is not positive definite at iteration {iteration} (<Bv, v> = {value:e})")]
    IndefinitePreconditioner { iteration: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn block_suffix(block: &Option<String>) -> String {
    match block {
        Some(b) => format!(" in block {b}"),
        None => String::new(),
    }
}

impl Error {
    /// Attaches a block name to a `NotSpd` error; other variants pass through.
    pub fn in_block(self, name: &str) -> Self {
        match self {
            Error::NotSpd { pivot, value, .. } => Error::NotSpd {
                pivot,
                value,
                block: Some(name.to_string()),
            },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
