use thiserror::Error;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("elevation grid is empty")]
    Empty,
    #[error("row {row} has {found} cells, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("invalid terrain parameter: {0}")]
    Parameter(String),
    #[error("region {index} out of range for {n} regions")]
    RegionOutOfRange { index: usize, n: usize },
    #[error("heightmap line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("exposure cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("no traversable path between regions {start} and {goal}")]
    NoPath { start: usize, goal: usize },
    #[error("search budget of {budget} expansions exhausted")]
    BudgetExceeded { budget: usize },
    #[error("region {index} out of range for {n} regions")]
    RegionOutOfRange { index: usize, n: usize },
    #[error("invalid planner parameter: {0}")]
    Parameter(String),
    #[error("path is empty")]
    EmptyPath,
    #[error("path step {step} moves from region {from} to non-adjacent or untraversable region {to}")]
    Untraversable { step: usize, from: usize, to: usize },
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("map of size {0} is too small, need at least 10 cells per side")]
    TooSmall(usize),
    #[error("no box could be placed on a {0}x{0} map")]
    NoBoxes(usize),
    #[error("enumeration limit of {limit} partial paths exceeded")]
    EnumerationOverflow { limit: usize },
    #[error("optimality gap is negative ({gap}); the exact planner was beaten")]
    OracleViolation { gap: f64 },
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
