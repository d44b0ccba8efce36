use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // algebra
    #[error("structure constants are not associative: (e{i}·e{j})·e{k} != e{i}·(e{j}·e{k}) in coordinate {l}")]
    AssociativityViolation { i: usize, j: usize, k: usize, l: usize },
    #[error("unit law fails against basis element {basis}")]
    UnitViolation { basis: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    // forms
    #[error("degree {degree} lies outside the window 0..={n_max}")]
    DegreeOutOfWindow { degree: usize, n_max: usize },
    #[error("degree {degree} has dimension {dim}, above the cap {cap}")]
    WindowTooLarge { degree: usize, dim: usize, cap: usize },

    // spectral
    #[error("(k^n - 1)(k^(n+1) - 1) != 0 in degree {degree} (residual {residual:e})")]
    PolynomialRelationViolated { degree: usize, residual: f64 },
    #[error("eigenvalue {eigenvalue} is too close to 1 to classify (distance {distance:e})")]
    NumericalRankAmbiguous { eigenvalue: String, distance: f64 },
    #[error("1 - k is singular on the non-harmonic part of degree {degree}")]
    SingularOnComplement { degree: usize },
    #[error("eigenvalue {eigenvalue} of k in degree {degree} is not a root of unity of order dividing {degree} or {}", degree + 1)]
    NonUnitRootEigenvalue { degree: usize, eigenvalue: String },

    // hodge-classical
    #[error("not a cochain complex: D_{}·D_{degree} has residual {residual:e}", degree + 1)]
    NotAComplex { degree: usize, residual: f64 },
    #[error("Gram matrix in degree {degree} is not Hermitian positive definite")]
    BadGram { degree: usize },
    #[error("operator has negative eigenvalue {eigenvalue:e}")]
    NegativeEigenvalue { eigenvalue: f64 },

    // tangential
    #[error("transversal weights must be positive and sum to 1: {0}")]
    BadWeights(String),
    #[error("leaf discretization needs at least 3 points per direction, got {0}")]
    LeafTooSmall(usize),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("plane field is not integrable: sup |ω∧dω| = {residual:e}")]
    NotIntegrable { residual: f64 },
    #[error("defining 1-form vanishes on the grid (min |ω| = {min_norm:e})")]
    VanishingOmega { min_norm: f64 },

    // plumbing
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Module-qualified code used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::AssociativityViolation { .. } => "algebra/AssociativityViolation",
            Error::UnitViolation { .. } => "algebra/UnitViolation",
            Error::ShapeMismatch(_) => "algebra/ShapeMismatch",
            Error::DimMismatch { .. } => "algebra/DimMismatch",
            Error::DegreeOutOfWindow { .. } => "forms/DegreeOutOfWindow",
            Error::WindowTooLarge { .. } => "forms/WindowTooLarge",
            Error::PolynomialRelationViolated { .. } => "spectral/PolynomialRelationViolated",
            Error::NumericalRankAmbiguous { .. } => "spectral/NumericalRankAmbiguous",
            Error::SingularOnComplement { .. } => "spectral/SingularOnComplement",
            Error::NonUnitRootEigenvalue { .. } => "spectral/NonUnitRootEigenvalue",
            Error::NotAComplex { .. } => "hodge/NotAComplex",
            Error::BadGram { .. } => "hodge/BadGram",
            Error::NegativeEigenvalue { .. } => "hodge/NegativeEigenvalue",
            Error::BadWeights(_) => "tangential/BadWeights",
            Error::LeafTooSmall(_) => "tangential/LeafTooSmall",
            Error::GridTooCoarse(_) => "tangential/GridTooCoarse",
            Error::NotIntegrable { .. } => "tangential/NotIntegrable",
            Error::VanishingOmega { .. } => "tangential/VanishingOmega",
            Error::Parse(_) => "io/Parse",
            Error::Io(_) => "io/Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
