//! Batch experiments: every planner on randomized start/goal queries over
//! generated maps, scored against the exact planner and timed against the
//! exposure-agnostic baseline.

use std::collections::VecDeque;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corridor::Corridor;
use crate::error::{BenchError, SearchError};
use crate::exposure::ExposureField;
use crate::search::{
    obj_acc, obj_bin, path_counts, Algorithm, BinaryParams, Plan, PlannerSpec, SaturationParams, SearchSpace,
    DEFAULT_P_SUCCESS, DEFAULT_TAU_SWEEP,
};
use crate::terrain::{Connectivity, GridEnvironment, TerrainParams};

use super::generate::MapKind;

pub const RECORD_FORMAT: &str = "losplan-experiment";
pub const RECORD_VERSION: u32 = 1;

/// Extra share of the map exposed by `exposed_alg` over the optimum, in
/// percentage points.
pub fn optimality_gap(exposed_alg: usize, exposed_exact: usize, n: usize) -> f64 {
    100.0 * (exposed_alg as f64 - exposed_exact as f64) / n as f64
}

/// [`optimality_gap`], rejecting a planner that beat the exact optimum.
pub fn checked_optimality_gap(exposed_alg: usize, exposed_exact: usize, n: usize) -> Result<f64, BenchError> {
    let gap = optimality_gap(exposed_alg, exposed_exact, n);
    if gap < 0.0 {
        Err(BenchError::OracleViolation { gap })
    } else {
        Ok(gap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub maps: Vec<MapKind>,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Start/goal queries per generated map.
    pub queries: usize,
    pub algorithms: Vec<Algorithm>,
    pub taus: Vec<u32>,
    pub p_success: f64,
    /// Expansion budget for the exact planner.
    pub budget: usize,
    pub offset: f64,
    pub connectivity: Connectivity,
    /// Overrides each map family's own step limit.
    pub max_step: Option<f64>,
    pub query_seed: u64,
    /// Upper bound on the grid step distance between start and goal.
    pub max_query_distance: Option<usize>,
    /// Run cells one at a time so that timings do not compete for cores.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            maps: vec![MapKind::Boxes, MapKind::Hills],
            sizes: vec![50],
            seeds: vec![1],
            queries: 20,
            algorithms: Algorithm::ALL.to_vec(),
            taus: DEFAULT_TAU_SWEEP.to_vec(),
            p_success: DEFAULT_P_SUCCESS,
            budget: 5_000_000,
            offset: TerrainParams::default().offset,
            connectivity: Connectivity::default(),
            max_step: None,
            query_seed: 0,
            max_query_distance: None,
            timing: true,
        }
    }
}

fn config_err(key: &str, message: impl ToString) -> BenchError {
    BenchError::Config {
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, BenchError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<T>().map_err(|e| config_err(key, format!("{v:?}: {e}"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T, BenchError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| config_err(key, format!("{value:?}: {e}")))
}

impl ExperimentConfig {
    /// Parses flat `key = value` text on top of the defaults. Lists are
    /// comma-separated; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut config = Self::default();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "maps" => config.maps = parse_list(key, value)?,
                "sizes" => config.sizes = parse_list(key, value)?,
                "seeds" => config.seeds = parse_list(key, value)?,
                "queries" => config.queries = parse_one(key, value)?,
                "algorithms" => config.algorithms = parse_list(key, value)?,
                "taus" => config.taus = parse_list(key, value)?,
                "p_success" => config.p_success = parse_one(key, value)?,
                "budget" => config.budget = parse_one(key, value)?,
                "max_step" => {
                    config.max_step = match value {
                        "auto" | "" => None,
                        v => Some(parse_one(key, v)?),
                    }
                }
                "offset" => config.offset = parse_one(key, value)?,
                "connectivity" => config.connectivity = parse_one::<Connectivity>(key, value)?,
                "query_seed" => config.query_seed = parse_one(key, value)?,
                "max_query_distance" => {
                    config.max_query_distance = match value {
                        "none" | "" => None,
                        v => Some(parse_one(key, v)?),
                    }
                }
                "timing" => config.timing = parse_one(key, value)?,
                other => return Err(config_err(other, "unknown key")),
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if !(self.p_success > 0.0 && self.p_success < 1.0) {
            return Err(config_err("p_success", "must lie strictly between 0 and 1"));
        }
        if self.taus.contains(&0) {
            return Err(config_err("taus", "saturation thresholds must be at least 1"));
        }
        if self.algorithms.contains(&Algorithm::Saturation) && self.taus.is_empty() {
            return Err(config_err("taus", "saturation needs at least one threshold"));
        }
        if self.budget == 0 {
            return Err(config_err("budget", "must be positive"));
        }
        if let Some(&bad) = self.sizes.iter().find(|&&s| s < 10) {
            return Err(config_err(
                "sizes",
                format!("map size {bad} is below the minimum of 10"),
            ));
        }
        Ok(())
    }

    /// Terrain parameters used for maps of `kind`.
    pub fn terrain(&self, kind: MapKind) -> TerrainParams {
        let base = kind.terrain();
        TerrainParams {
            offset: self.offset,
            connectivity: self.connectivity,
            max_step: self.max_step.unwrap_or(base.max_step),
        }
    }

    /// Planner cells run for every query, in output order.
    pub fn cells(&self) -> Vec<PlannerSpec> {
        let mut cells = Vec::new();
        for &alg in &self.algorithms {
            match alg {
                Algorithm::Shortest => cells.push(PlannerSpec::Shortest),
                Algorithm::ExposureScore => cells.push(PlannerSpec::ExposureScore),
                Algorithm::Binary => cells.push(PlannerSpec::Binary(BinaryParams::default())),
                Algorithm::Saturation => cells.extend(self.taus.iter().map(|&tau| {
                    PlannerSpec::Saturation(SaturationParams {
                        tau,
                        p_success: self.p_success,
                    })
                })),
                Algorithm::Exact => cells.push(PlannerSpec::Exact { budget: self.budget }),
            }
        }
        cells
    }

    pub fn instances(&self) -> Vec<MapInstance> {
        let mut out = Vec::new();
        for &kind in &self.maps {
            for &size in &self.sizes {
                for &seed in &self.seeds {
                    out.push(MapInstance { kind, size, seed });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MapInstance {
    pub kind: MapKind,
    pub size: usize,
    pub seed: u64,
}

/// A generated map with its precomputed exposure field.
pub struct PreparedMap {
    pub instance: MapInstance,
    pub env: GridEnvironment,
    pub field: ExposureField,
}

impl PreparedMap {
    pub fn generate(instance: MapInstance, terrain: TerrainParams) -> Result<Self, BenchError> {
        let map = instance.kind.generate(instance.seed, instance.size)?;
        let env = GridEnvironment::new(map, terrain)?;
        let field = ExposureField::compute(&env);
        Ok(Self { instance, env, field })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    NoPath,
    BudgetExceeded,
    OracleViolation,
    Error,
}

/// One (query, planner) cell of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub map: MapKind,
    pub map_seed: u64,
    pub size: usize,
    pub query: usize,
    pub algorithm: Algorithm,
    pub tau: Option<u32>,
    pub p_success: Option<f64>,
    pub m: Option<f64>,
    pub start: usize,
    pub goal: usize,
    pub status: RunStatus,
    pub message: Option<String>,
    pub path_len: Option<usize>,
    pub obj_bin: Option<usize>,
    pub obj_acc: Option<f64>,
    /// Percentage points of the map exposed beyond the exact optimum.
    pub optimality_gap: Option<f64>,
    /// Planner time over exposure-agnostic A* time on the same query.
    pub runtime_ratio: Option<f64>,
    pub avg_width: Option<f64>,
    pub expanded: Option<usize>,
    pub duration_ns: u64,
}

impl ExperimentRecord {
    /// The record with wall-clock fields cleared, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            runtime_ratio: None,
            duration_ns: 0,
            ..self.clone()
        }
    }
}

/// Connected components of the traversability graph; returns the members
/// of the largest one (lowest region index wins ties).
pub fn largest_component<S: SearchSpace + ?Sized>(space: &S) -> Vec<usize> {
    let n = space.region_count();
    let mut label = vec![usize::MAX; n];
    let mut best: Vec<usize> = Vec::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        let mut members = vec![root];
        label[root] = root;
        let mut queue = VecDeque::from([root]);
        while let Some(r) = queue.pop_front() {
            for &nb in space.neighbors(r) {
                if label[nb] == usize::MAX {
                    label[nb] = root;
                    members.push(nb);
                    queue.push_back(nb);
                }
            }
        }
        if members.len() > best.len() {
            best = members;
        }
    }
    best.sort_unstable();
    best
}

/// Draws distinct, mutually reachable start/goal pairs from the largest
/// traversable component. Pairs farther apart than `max_distance` grid steps
/// are redrawn.
pub fn sample_queries<S: SearchSpace + ?Sized>(
    space: &S,
    count: usize,
    seed: u64,
    max_distance: Option<usize>,
) -> Vec<(usize, usize)> {
    let eligible = largest_component(space);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = Vec::with_capacity(count);
    if eligible.len() < 2 {
        return queries;
    }
    let mut attempts = 0usize;
    while queries.len() < count && attempts < count.saturating_mul(10_000).max(10_000) {
        attempts += 1;
        let s = eligible[rng.random_range(0..eligible.len())];
        let g = eligible[rng.random_range(0..eligible.len())];
        if s == g {
            continue;
        }
        if let Some(max) = max_distance {
            if space.step_lower_bound(s, g) > max as f64 {
                continue;
            }
        }
        queries.push((s, g));
    }
    queries
}

fn query_seed(config: &ExperimentConfig, instance: &MapInstance) -> u64 {
    let kind = match instance.kind {
        MapKind::Boxes => 0x9e37_79b9_7f4a_7c15u64,
        MapKind::Hills => 0xc2b2_ae3d_27d4_eb4fu64,
    };
    config.query_seed ^ kind ^ instance.seed.rotate_left(29) ^ (instance.size as u64).rotate_left(47)
}

struct Outcome {
    result: Result<Plan, SearchError>,
    duration: Duration,
}

fn timed(spec: &PlannerSpec, map: &PreparedMap, start: usize, goal: usize) -> Outcome {
    let begin = Instant::now();
    let result = spec.plan(&map.env, &map.field, start, goal);
    Outcome {
        result,
        duration: begin.elapsed(),
    }
}

fn run_query(
    config: &ExperimentConfig,
    cells: &[PlannerSpec],
    map: &PreparedMap,
    query: usize,
    (start, goal): (usize, usize),
) -> Vec<ExperimentRecord> {
    let baseline = timed(&PlannerSpec::Shortest, map, start, goal);
    let exact_spec = cells.iter().find(|c| matches!(c, PlannerSpec::Exact { .. }));
    let exact = exact_spec.map(|spec| timed(spec, map, start, goal));
    let exact_objective = exact
        .as_ref()
        .and_then(|o| o.result.as_ref().ok())
        .and_then(|plan| obj_bin(&map.field, plan.path.regions()).ok());

    cells
        .iter()
        .map(|spec| {
            let fresh;
            let outcome = match spec {
                PlannerSpec::Shortest => &baseline,
                PlannerSpec::Exact { .. } => exact.as_ref().expect("exact cell implies exact run"),
                _ => {
                    fresh = timed(spec, map, start, goal);
                    &fresh
                }
            };
            build_record(
                config,
                map,
                query,
                start,
                goal,
                spec,
                outcome,
                &baseline,
                exact_objective,
            )
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn build_record(
    config: &ExperimentConfig,
    map: &PreparedMap,
    query: usize,
    start: usize,
    goal: usize,
    spec: &PlannerSpec,
    outcome: &Outcome,
    baseline: &Outcome,
    exact_objective: Option<usize>,
) -> ExperimentRecord {
    let n = map.field.len();
    let (tau, p_success, m) = match spec {
        PlannerSpec::Saturation(p) => (Some(p.tau), Some(p.p_success), None),
        PlannerSpec::Binary(p) => (None, None, p.resolve(n).ok()),
        _ => (None, None, None),
    };
    let baseline_ns = baseline.duration.as_nanos().max(1) as f64;
    let mut record = ExperimentRecord {
        map: map.instance.kind,
        map_seed: map.instance.seed,
        size: map.instance.size,
        query,
        algorithm: spec.algorithm(),
        tau,
        p_success,
        m,
        start,
        goal,
        status: RunStatus::Ok,
        message: None,
        path_len: None,
        obj_bin: None,
        obj_acc: None,
        optimality_gap: None,
        runtime_ratio: Some(outcome.duration.as_nanos().max(1) as f64 / baseline_ns),
        avg_width: None,
        expanded: None,
        duration_ns: u64::try_from(outcome.duration.as_nanos()).unwrap_or(u64::MAX),
    };
    let plan = match &outcome.result {
        Ok(plan) => plan,
        Err(err) => {
            record.status = match err {
                SearchError::NoPath { .. } => RunStatus::NoPath,
                SearchError::BudgetExceeded { budget } => {
                    record.expanded = Some(*budget);
                    RunStatus::BudgetExceeded
                }
                _ => RunStatus::Error,
            };
            record.message = Some(err.to_string());
            return record;
        }
    };
    let regions = plan.path.regions();
    record.path_len = Some(regions.len());
    record.expanded = Some(plan.expanded);
    let scored = obj_bin(&map.field, regions).and_then(|exposed| {
        let counts = path_counts(&map.field, regions, tau.unwrap_or(1))?;
        let acc = obj_acc(&counts, p_success.unwrap_or(config.p_success), tau.unwrap_or(1))?;
        let width = Corridor::build(&map.field, plan.path.clone())?.avg_width;
        Ok((exposed, acc, width))
    });
    match scored {
        Ok((exposed, acc, width)) => {
            record.obj_bin = Some(exposed);
            record.obj_acc = Some(acc);
            record.avg_width = Some(width);
            if let Some(best) = exact_objective {
                match checked_optimality_gap(exposed, best, n) {
                    Ok(gap) => record.optimality_gap = Some(gap),
                    Err(err) => {
                        record.optimality_gap = Some(optimality_gap(exposed, best, n));
                        record.status = RunStatus::OracleViolation;
                        record.message = Some(err.to_string());
                    }
                }
            }
        }
        Err(err) => {
            record.status = RunStatus::Error;
            record.message = Some(err.to_string());
        }
    }
    record
}

/// Runs every query and cell on one prepared map. Records come back in
/// query order, then cell order, regardless of scheduling.
pub fn run_on_map(config: &ExperimentConfig, map: &PreparedMap) -> Vec<ExperimentRecord> {
    let cells = config.cells();
    let queries = sample_queries(
        &map.env,
        config.queries,
        query_seed(config, &map.instance),
        config.max_query_distance,
    );
    let run = |(i, q): (usize, &(usize, usize))| run_query(config, &cells, map, i, *q);
    let per_query: Vec<Vec<ExperimentRecord>> = if config.timing {
        queries.iter().enumerate().map(run).collect()
    } else {
        #[cfg(feature = "parallel")]
        {
            queries.par_iter().enumerate().map(run).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            queries.iter().enumerate().map(run).collect()
        }
    };
    per_query.into_iter().flatten().collect()
}

/// Generates every configured map and runs the full protocol on it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, BenchError> {
    config.validate()?;
    let mut records = Vec::new();
    for instance in config.instances() {
        let map = PreparedMap::generate(instance, config.terrain(instance.kind))?;
        records.extend(run_on_map(config, &map));
    }
    Ok(records)
}

/// JSON-lines output: a version header, then one record per line.
pub fn write_jsonl<W: Write>(records: &[ExperimentRecord], mut out: W) -> Result<(), BenchError> {
    let header = serde_json::json!({ "format": RECORD_FORMAT, "version": RECORD_VERSION });
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Parses output of [`write_jsonl`], checking the header.
pub fn read_jsonl(text: &str) -> Result<Vec<ExperimentRecord>, BenchError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap_or("null"))?;
    if header["format"] != RECORD_FORMAT || header["version"] != RECORD_VERSION {
        return Err(config_err("header", format!("unsupported record header {header}")));
    }
    lines.map(|l| Ok(serde_json::from_str(l)?)).collect()
}
