//! Equal-exposure corridors.
//!
//! Given a seed path that exposes the set `K`, the corridor is every region
//! whose own exposure set lies inside `K`. Any walk that stays in the
//! corridor exposes nothing the seed path has not already exposed.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bitset::RegionSet;
use crate::error::SearchError;
use crate::exposure::ExposureField;
use crate::search::{Path, SearchSpace};

/// `K`: every region that sees some step of the path.
pub fn exposed_set(field: &ExposureField, regions: &[usize]) -> Result<RegionSet, SearchError> {
    if regions.is_empty() {
        return Err(SearchError::EmptyPath);
    }
    if let Some(&index) = regions.iter().find(|&&r| r >= field.len()) {
        return Err(SearchError::RegionOutOfRange { index, n: field.len() });
    }
    Ok(field.exposed_by(regions.iter().copied()))
}

/// Regions that share line-of-sight with nothing outside `exposed`.
pub fn corridor(field: &ExposureField, exposed: &RegionSet) -> RegionSet {
    let n = field.len();
    RegionSet::from_indices(n, (0..n).filter(|&i| field.row(i).is_subset(exposed)))
}

/// The part of `corridor` reachable from `seeds` by moves that stay inside it.
pub fn reachable_part<S: SearchSpace + ?Sized>(space: &S, corridor: &RegionSet, seeds: &[usize]) -> RegionSet {
    let mut reached = RegionSet::new(corridor.universe());
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in seeds {
        if corridor.contains(s) && reached.insert(s) {
            queue.push_back(s);
        }
    }
    while let Some(r) = queue.pop_front() {
        for &nb in space.neighbors(r) {
            if corridor.contains(nb) && reached.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    reached
}

/// Corridor cells per seed-path step.
pub fn average_width(corridor: &RegionSet, path_len: usize) -> Result<f64, SearchError> {
    if path_len == 0 {
        return Err(SearchError::EmptyPath);
    }
    Ok(corridor.count() as f64 / path_len as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corridor {
    pub seed_path: Path,
    pub exposed: RegionSet,
    pub corridor: RegionSet,
    pub avg_width: f64,
}

impl Corridor {
    pub fn build(field: &ExposureField, seed_path: Path) -> Result<Self, SearchError> {
        let exposed = exposed_set(field, seed_path.regions())?;
        let corridor = corridor(field, &exposed);
        let avg_width = average_width(&corridor, seed_path.len())?;
        Ok(Self {
            seed_path,
            exposed,
            corridor,
            avg_width,
        })
    }

    /// Like [`Corridor::build`], but drops corridor regions that cannot be
    /// reached from the seed path without leaving the corridor.
    pub fn build_reachable<S: SearchSpace + ?Sized>(
        space: &S,
        field: &ExposureField,
        seed_path: Path,
    ) -> Result<Self, SearchError> {
        let mut built = Self::build(field, seed_path)?;
        built.corridor = reachable_part(space, &built.corridor, built.seed_path.regions());
        built.avg_width = average_width(&built.corridor, built.seed_path.len())?;
        Ok(built)
    }

    pub fn record(&self) -> CorridorRecord {
        CorridorRecord {
            seed_path: self.seed_path.regions().to_vec(),
            exposed: self.exposed.to_vec(),
            corridor: self.corridor.to_vec(),
            avg_width: self.avg_width,
        }
    }
}

/// Export form: sorted region lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorridorRecord {
    pub seed_path: Vec<usize>,
    pub exposed: Vec<usize>,
    pub corridor: Vec<usize>,
    pub avg_width: f64,
}
