use thiserror::Error;

pub type Result<T> = std::result::Result<T, QcaError>;

#[derive(Debug, Error)]
pub enum QcaError {
    #[error("cell count must be at least {min}, got {cells}")]
    TooFewCells { cells: u32, min: u32 },

    #[error("cell position {k} out of range for {cells} cells")]
    CellOutOfRange { k: u32, cells: u32 },

    #[error("configuration index {index} out of range for {cells} cells")]
    IndexOutOfRange { index: u64, cells: u32 },

    /// The rule-150 map is not a bijection when K is a multiple of 3, so the
    /// evolution matrix is not unitary.
    #[error("K mod 3 rule violated: {cells} cells is a multiple of 3, evolution operator is not unitary")]
    NonUnitaryConfiguration { cells: u32 },

    #[error("{what} needs {cells} cells but the cap is {cap}")]
    CapExceeded {
        what: &'static str,
        cells: u32,
        cap: u32,
    },

    #[error("mixing angle {theta} outside {range}")]
    AngleOutOfRange { theta: f64, range: &'static str },

    #[error("state vector has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("state vector length {len} does not match 2^{cells}")]
    DimensionMismatch { len: usize, cells: u32 },

    #[error("ambiguous eigenvalue degeneracy: phases {a} and {b} differ by {gap:e}, inside the guard band ({tol:e}, {guard:e})")]
    AmbiguousDegeneracy {
        a: f64,
        b: f64,
        gap: f64,
        tol: f64,
        guard: f64,
    },

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    #[error("construction inconsistency: {0}")]
    ConstructionInconsistency(String),

    #[error("no reversal within {limit} steps")]
    NotFound { limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
