use thiserror::Error;

/// Errors raised across the index, oracle and orbit modules.
///
/// Index values are discrete, so anything that would force a guess
/// (near-zero eigenvalues, singular blocks, ill-conditioned solves) is
/// reported here instead of being rounded away.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("symmetric form is degenerate: {n_zero} eigenvalue(s) within the zero threshold {tol:e}")]
    DegenerateForm { n_zero: usize, tol: f64 },
    #[error("dimension {0} is odd; a symplectic splitting needs an even dimension")]
    OddDimension(usize),
    #[error("matrix is not symplectic (residual {residual:e} > {tol:e})")]
    NotSymplectic { residual: f64, tol: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("linear system is ill-conditioned (condition estimate {cond:e})")]
    IllConditioned { cond: f64 },
    #[error("block C is singular (|det C| = {det:e})")]
    CSingular { det: f64 },
    #[error("U_{{k-1}}(A) is singular at iterate k = {k}")]
    IterateDegenerate { k: usize },
    #[error("sign matrix asymmetry {asymmetry:e} exceeds {tol:e}; input blocks are not a valid return map")]
    AsymmetryTooLarge { asymmetry: f64, tol: f64 },
    #[error("blocks violate the return-map identities: {0}")]
    InvalidBlocks(String),
    #[error("alpha is degenerate (|sin alpha| = {sin_alpha:e})")]
    AlphaDegenerate { sin_alpha: f64 },
    #[error("diagonal and graph are not transverse (det(Phi - I) = {det:e})")]
    NotTransverse { det: f64 },
    #[error("quadratic form is not symmetric (asymmetry {asymmetry:e})")]
    QNotSymmetric { asymmetry: f64 },
    #[error("unresolved crossing near t = {t}: {reason}")]
    UnresolvedCrossing { t: f64, reason: String },
    #[error("path endpoint is degenerate: {0}")]
    DegenerateEndpoint(String),
    #[error("paths to the same endpoint disagree: {first} vs {second}")]
    PathDependence { first: i64, second: i64 },
    #[error("integration failed: {0}")]
    StepFailure(String),
    #[error("energy drift {drift:e} exceeds {limit:e}")]
    EnergyDriftExceeded { drift: f64, limit: f64 },
    #[error("shooting did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("gradient of H vanishes at the seed point")]
    CriticalPoint,
    #[error("seed point is not fixed by the involution (|rho(x) - x| = {0:e})")]
    NotOnFixedSet(f64),
    #[error("no transversal vector with dH(x)v bounded away from zero")]
    DegenerateTransversal,
    #[error("involution eigenspaces on V have unequal dimensions ({plus} vs {minus})")]
    UnequalEigenspaces { plus: usize, minus: usize },
    #[error("projection onto the transverse section is ill-conditioned ({0:e})")]
    ProjectionIllConditioned(f64),
    #[error("malformed input: {0}")]
    MalformedInput(String),
}

impl Error {
    /// Stable variant name used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonSquare { .. } => "NonSquare",
            Error::NonFinite => "NonFinite",
            Error::DegenerateForm { .. } => "DegenerateForm",
            Error::OddDimension(_) => "OddDimension",
            Error::NotSymplectic { .. } => "NotSymplectic",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::CSingular { .. } => "CSingular",
            Error::IterateDegenerate { .. } => "IterateDegenerate",
            Error::AsymmetryTooLarge { .. } => "AsymmetryTooLarge",
            Error::InvalidBlocks(_) => "InvalidBlocks",
            Error::AlphaDegenerate { .. } => "AlphaDegenerate",
            Error::NotTransverse { .. } => "NotTransverse",
            Error::QNotSymmetric { .. } => "QNotSymmetric",
            Error::UnresolvedCrossing { .. } => "UnresolvedCrossing",
            Error::DegenerateEndpoint(_) => "DegenerateEndpoint",
            Error::PathDependence { .. } => "PathDependence",
            Error::StepFailure(_) => "StepFailure",
            Error::EnergyDriftExceeded { .. } => "EnergyDriftExceeded",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::CriticalPoint => "CriticalPoint",
            Error::NotOnFixedSet(_) => "NotOnFixedSet",
            Error::DegenerateTransversal => "DegenerateTransversal",
            Error::UnequalEigenspaces { .. } => "UnequalEigenspaces",
            Error::ProjectionIllConditioned(_) => "ProjectionIllConditioned",
            Error::MalformedInput(_) => "MalformedInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
