use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("row widths must be nonincreasing (row {row} is wider than row {})", row - 1)]
    NonMonotone { row: usize },
    #[error("minimal counts are not realized by any Young diagram: {0}")]
    Inconsistent(String),
    #[error("zero-set height {height} exceeds range {rho}")]
    HeightExceedsRange { height: usize, rho: u32 },
    #[error("zero-set width {width} exceeds range {rho}")]
    WidthExceedsRange { width: u32, rho: u32 },
    #[error("operation requires a zero-set of finite width")]
    InfiniteWidth,
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("cannot parse zero-set: {0}")]
    Parse(String),
    #[error("periodic box of side {n} is too small for range {rho} (need n >= {})", 2 * rho + 1)]
    TorusTooSmall { n: usize, rho: u32 },
    #[error("periodic boundary requires a square box, got {width}x{height}")]
    NonSquareTorus { width: usize, height: usize },
    #[error("site ({x}, {y}) lies outside the {width}x{height} box")]
    OutOfBounds { x: usize, y: usize, width: usize, height: usize },
    #[error("pattern does not fit in a box of side {0}")]
    PatternTooLarge(usize),
    #[error("saturated-line dynamics requires a rectangular zero-set")]
    NotRectangular,
    #[error("box of {cells} cells needs {bytes} bytes, over the {budget}-byte budget")]
    MemoryBudgetExceeded { cells: u64, bytes: u64, budget: u64 },
    #[error("spanning probability never reached 1/2 on [{n_min}, {n_max}]")]
    NotBracketed { n_min: usize, n_max: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("critical power is not determined for this parameter combination: {0}")]
    Unsupported(String),
    #[error("malformed dump: {0}")]
    Dump(String),
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
