//! Exposure-aware planners.
//!
//! Four planners share a region-keyed A* engine and differ only in the node
//! payload they carry:
//!
//! | planner | payload | transition cost | heuristic |
//! |---|---|---|---|
//! | [`plan_shortest`] | none | 1 | grid step bound |
//! | [`plan_ess`] | none | exposure score of the target | 3D Manhattan × min score |
//! | [`plan_binary`] | exposed-region bitset | newly exposed regions + `m` | goal regions not yet exposed |
//! | [`plan_saturation`] | per-region exposure counts | change in clamped log-risk | 3D Manhattan × τ × −log₁₀ p |
//!
//! Keeping only the best node per region is what makes the last two
//! approximate: the objective depends on the whole path. [`plan_exact`]
//! searches over path-history states instead and is optimal, at exponential
//! cost.

mod astar;
mod exact;
mod objective;
mod record;

use serde::{Deserialize, Serialize};

use crate::error::SearchError;
use crate::exposure::ExposureField;
use crate::terrain::{Connectivity, GridEnvironment};

pub use astar::{plan_binary, plan_ess, plan_saturation, plan_shortest, BinaryParams, SaturationParams};
pub use exact::plan_exact;
pub use objective::{
    binary_transition_cost, obj_acc, obj_bin, path_counts, saturation_child_counts, saturation_root_counts,
    saturation_transition_cost,
};
pub use record::PlanRecord;

/// Default probability of continued success after one exposure.
pub const DEFAULT_P_SUCCESS: f64 = 0.95;

/// Default saturation thresholds swept by the experiment harness.
pub const DEFAULT_TAU_SWEEP: [u32; 12] = [1, 2, 3, 4, 5, 10, 15, 20, 25, 50, 100, 200];

/// The graph a planner walks: regions, traversable moves and geometry for
/// the distance heuristics.
pub trait SearchSpace {
    fn region_count(&self) -> usize;

    /// Regions reachable from `region` in one move.
    fn neighbors(&self, region: usize) -> &[usize];

    /// Representative point of the region.
    fn point(&self, region: usize) -> [f64; 3];

    /// Lower bound on the number of moves from `a` to `b`.
    fn step_lower_bound(&self, a: usize, b: usize) -> f64;

    fn check_region(&self, region: usize) -> Result<(), SearchError> {
        let n = self.region_count();
        if region < n {
            Ok(())
        } else {
            Err(SearchError::RegionOutOfRange { index: region, n })
        }
    }
}

impl SearchSpace for GridEnvironment {
    fn region_count(&self) -> usize {
        self.len()
    }

    fn neighbors(&self, region: usize) -> &[usize] {
        GridEnvironment::neighbors(self, region)
    }

    fn point(&self, region: usize) -> [f64; 3] {
        GridEnvironment::point(self, region)
    }

    fn step_lower_bound(&self, a: usize, b: usize) -> f64 {
        let (ra, ca) = self.cell(a);
        let (rb, cb) = self.cell(b);
        let (dr, dc) = (ra.abs_diff(rb), ca.abs_diff(cb));
        match self.params().connectivity {
            Connectivity::Four => (dr + dc) as f64,
            Connectivity::Eight => dr.max(dc) as f64,
        }
    }
}

/// Manhattan distance between the representative points of two regions.
pub fn manhattan_3d<S: SearchSpace + ?Sized>(space: &S, a: usize, b: usize) -> f64 {
    let (pa, pb) = (space.point(a), space.point(b));
    (pa[0] - pb[0]).abs() + (pa[1] - pb[1]).abs() + (pa[2] - pb[2]).abs()
}

/// A traversable sequence of regions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(Vec<usize>);

impl Path {
    /// Validates that every consecutive pair of regions is a traversable move.
    pub fn new<S: SearchSpace + ?Sized>(space: &S, regions: Vec<usize>) -> Result<Self, SearchError> {
        if regions.is_empty() {
            return Err(SearchError::EmptyPath);
        }
        for &r in &regions {
            space.check_region(r)?;
        }
        for (step, pair) in regions.windows(2).enumerate() {
            if !space.neighbors(pair[0]).contains(&pair[1]) {
                return Err(SearchError::Untraversable {
                    step,
                    from: pair[0],
                    to: pair[1],
                });
            }
        }
        Ok(Self(regions))
    }

    pub(crate) fn from_trusted(regions: Vec<usize>) -> Self {
        debug_assert!(!regions.is_empty());
        Self(regions)
    }

    pub fn regions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn start(&self) -> usize {
        self.0[0]
    }

    pub fn goal(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

/// A planner's answer.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub path: Path,
    /// Accumulated search cost `g` at the goal, in the planner's own units.
    pub cost: f64,
    /// Number of nodes expanded.
    pub expanded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Shortest,
    #[serde(rename = "ess")]
    ExposureScore,
    Binary,
    Saturation,
    Exact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Shortest,
        Algorithm::ExposureScore,
        Algorithm::Binary,
        Algorithm::Saturation,
        Algorithm::Exact,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Shortest => "shortest",
            Algorithm::ExposureScore => "ess",
            Algorithm::Binary => "binary",
            Algorithm::Saturation => "saturation",
            Algorithm::Exact => "exact",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| SearchError::Parameter(format!("unknown algorithm {s:?}")))
    }
}

/// A planner together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlannerSpec {
    Shortest,
    ExposureScore,
    Binary(BinaryParams),
    Saturation(SaturationParams),
    Exact { budget: usize },
}

impl PlannerSpec {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            PlannerSpec::Shortest => Algorithm::Shortest,
            PlannerSpec::ExposureScore => Algorithm::ExposureScore,
            PlannerSpec::Binary(_) => Algorithm::Binary,
            PlannerSpec::Saturation(_) => Algorithm::Saturation,
            PlannerSpec::Exact { .. } => Algorithm::Exact,
        }
    }

    pub fn plan<S: SearchSpace + ?Sized>(
        &self,
        space: &S,
        field: &ExposureField,
        start: usize,
        goal: usize,
    ) -> Result<Plan, SearchError> {
        match *self {
            PlannerSpec::Shortest => plan_shortest(space, field, start, goal),
            PlannerSpec::ExposureScore => plan_ess(space, field, start, goal),
            PlannerSpec::Binary(params) => plan_binary(space, field, start, goal, params),
            PlannerSpec::Saturation(params) => plan_saturation(space, field, start, goal, params),
            PlannerSpec::Exact { budget } => plan_exact(space, field, start, goal, budget),
        }
    }
}

pub(crate) fn check_query<S: SearchSpace + ?Sized>(
    space: &S,
    field: &ExposureField,
    start: usize,
    goal: usize,
) -> Result<(), SearchError> {
    if field.len() != space.region_count() {
        return Err(SearchError::Parameter(format!(
            "exposure field covers {} regions but the environment has {}",
            field.len(),
            space.region_count()
        )));
    }
    space.check_region(start)?;
    space.check_region(goal)
}
