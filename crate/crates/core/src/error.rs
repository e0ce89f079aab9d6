use thiserror::Error;

use crate::fan::FanViolation;
use crate::solve::SolutionSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library reports. Each variant carries a stable code
/// (see [`Error::code`]) that the command-line front end prints verbatim.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("variable index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("matrix is not square: {rows} rows, row {row} has {cols} entries")]
    NonSquare { rows: usize, row: usize, cols: usize },

    #[error("invalid fan: {}", display_violations(.0))]
    InvalidFan(Vec<FanViolation>),
    #[error("class group has torsion (invariant factors {0:?})")]
    TorsionClassGroup(Vec<i64>),
    #[error("no unimodular curve basis containing the Mori cone with -K >= 0")]
    NoValidBasis,
    #[error("coordinate {0} of z is zero")]
    ZeroCoordinate(usize),

    #[error("deformation matrix for class {class} has shape mismatch: {detail}")]
    MatrixShapeMismatch { class: usize, detail: String },
    #[error("deformation entry couples rays {row} and {col} from different classes")]
    CrossClassEntry { row: usize, col: usize },
    #[error("q_{0} is zero")]
    ZeroQ(usize),

    #[error("xi lies on a chamber wall (flag {flag}, coefficient {lambda:e})")]
    XiOnWall { flag: usize, lambda: f64 },
    #[error("xi is not in the interior of the Kahler cone (wall value {0})")]
    XiNotAmple(f64),
    #[error("cycle touches a discriminant hypersurface: {0}")]
    CycleTouchesDiscriminant(String),

    #[error("solver found {found} solutions, expected {expected}")]
    DeficientCount {
        found: usize,
        expected: usize,
        solutions: Box<SolutionSet>,
    },
    #[error("elimination broke down: {0}")]
    EliminationBreakdown(String),
    #[error("path tracking failed at t = {t}: {reason}")]
    PathFailure { t: f64, reason: String },
    #[error("systems of rank {0} are not supported")]
    UnsupportedRank(usize),

    #[error("solution set has near-multiple points; residue sum refused")]
    DegenerateSolutionSet,
    #[error("quadrature did not converge by {nodes} nodes per circle (last change {change:e})")]
    QuadratureStall { nodes: usize, change: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("fiber solve failed at node {node}: {reason}")]
    FiberSolveFailure { node: usize, reason: String },
    #[error("trmc mode requires the undeformed tangent bundle")]
    NotTangentBundle,
    #[error("1 - kappa vanishes at a solution (|1-kappa| = {0:e})")]
    KappaPole(f64),
    #[error("intersection oracle supports surfaces and projective spaces only")]
    UnsupportedVariety,
    #[error("ambient dimension {0} exceeds the mixed volume limit of 8")]
    DimensionTooLarge(usize),

    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

fn display_violations(v: &[FanViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ArityMismatch { .. } => "ArityMismatch",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::NonSquare { .. } => "NonSquare",
            Error::InvalidFan(v) => v.first().map(|x| x.code()).unwrap_or("InvalidFan"),
            Error::TorsionClassGroup(_) => "TorsionClassGroup",
            Error::NoValidBasis => "NoValidBasis",
            Error::ZeroCoordinate(_) => "ZeroCoordinate",
            Error::MatrixShapeMismatch { .. } => "MatrixShapeMismatch",
            Error::CrossClassEntry { .. } => "CrossClassEntry",
            Error::ZeroQ(_) => "ZeroQ",
            Error::XiOnWall { .. } => "XiOnWall",
            Error::XiNotAmple(_) => "XiNotAmple",
            Error::CycleTouchesDiscriminant(_) => "CycleTouchesDiscriminant",
            Error::DeficientCount { .. } => "DeficientCount",
            Error::EliminationBreakdown(_) => "EliminationBreakdown",
            Error::PathFailure { .. } => "PathFailure",
            Error::UnsupportedRank(_) => "UnsupportedRank",
            Error::DegenerateSolutionSet => "DegenerateSolutionSet",
            Error::QuadratureStall { .. } => "QuadratureStall",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::FiberSolveFailure { .. } => "FiberSolveFailure",
            Error::NotTangentBundle => "NotTangentBundle",
            Error::KappaPole(_) => "KappaPole",
            Error::UnsupportedVariety => "UnsupportedVariety",
            Error::DimensionTooLarge(_) => "DimensionTooLarge",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }

    /// Process exit status: 2 for input that cannot be parsed or validated,
    /// 1 for everything that fails a mathematical precondition.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_)
            | Error::Io(_)
            | Error::InvalidFan(_)
            | Error::ArityMismatch { .. }
            | Error::IndexOutOfRange { .. }
            | Error::NonSquare { .. }
            | Error::MatrixShapeMismatch { .. }
            | Error::CrossClassEntry { .. }
            | Error::TorsionClassGroup(_) => 2,
            _ => 1,
        }
    }
}
