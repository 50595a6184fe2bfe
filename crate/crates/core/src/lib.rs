//! Path planning over gridded terrain that minimizes how much of the map can
//! see the traveller.

pub mod bench;
pub mod bitset;
pub mod corridor;
pub mod error;
pub mod exposure;
pub mod search;
pub mod terrain;

pub use bitset::RegionSet;
pub use corridor::{Corridor, CorridorRecord};
pub use error::{BenchError, SearchError, TerrainError};
pub use exposure::{Execution, ExposureField};
pub use search::{Algorithm, Path, Plan, PlannerSpec, SearchSpace};
pub use terrain::{Connectivity, GridEnvironment, Heightmap, TerrainParams};
