use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::bitset::RegionSet;
use crate::error::SearchError;
use crate::exposure::ExposureField;

use super::objective::{
    binary_transition_cost, check_saturation, saturation_child_counts, saturation_root_counts,
    saturation_transition_cost,
};
use super::{check_query, manhattan_3d, Path, Plan, SearchSpace, DEFAULT_P_SUCCESS};

/// What a node carries and how it prices moves.
trait NodeModel {
    type Payload;

    fn root(&self, start: usize) -> Self::Payload;
    fn cost(&self, from: &Self::Payload, to: usize) -> f64;
    fn child(&self, from: &Self::Payload, to: usize) -> Self::Payload;
    fn heuristic(&self, payload: &Self::Payload, region: usize) -> f64;
}

/// Open-list entry. Pops lowest `f`, then lowest `h`, then lowest region.
struct Entry {
    f: f64,
    h: f64,
    region: usize,
    node: usize,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.region.cmp(&self.region))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

struct Node {
    region: usize,
    parent: Option<usize>,
    g: f64,
}

/// A* with one live node per region and a closed list over regions.
fn region_astar<S, M>(space: &S, model: &M, start: usize, goal: usize) -> Result<Plan, SearchError>
where
    S: SearchSpace + ?Sized,
    M: NodeModel,
{
    let n = space.region_count();
    let mut best_g = vec![f64::INFINITY; n];
    let mut best_node = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut nodes: Vec<Node> = Vec::new();
    let mut payloads: Vec<Option<M::Payload>> = Vec::new();
    let mut open = BinaryHeap::new();

    let root = model.root(start);
    let h = model.heuristic(&root, start);
    nodes.push(Node {
        region: start,
        parent: None,
        g: 0.0,
    });
    payloads.push(Some(root));
    best_g[start] = 0.0;
    best_node[start] = 0;
    open.push(Entry {
        f: h,
        h,
        region: start,
        node: 0,
    });

    let mut expanded = 0;
    while let Some(Entry { region, node, .. }) = open.pop() {
        if closed[region] || best_node[region] != node {
            continue;
        }
        closed[region] = true;
        expanded += 1;
        let g = nodes[node].g;
        if region == goal {
            return Ok(Plan {
                path: reconstruct(&nodes, node),
                cost: g,
                expanded,
            });
        }
        let payload = payloads[node].take().expect("live node keeps its payload");
        for &next in space.neighbors(region) {
            if closed[next] {
                continue;
            }
            let g_next = g + model.cost(&payload, next);
            if g_next >= best_g[next] {
                continue;
            }
            if let Some(old) = payloads.get_mut(best_node[next]) {
                *old = None;
            }
            let child = model.child(&payload, next);
            let h = model.heuristic(&child, next);
            let id = nodes.len();
            nodes.push(Node {
                region: next,
                parent: Some(node),
                g: g_next,
            });
            payloads.push(Some(child));
            best_g[next] = g_next;
            best_node[next] = id;
            open.push(Entry {
                f: g_next + h,
                h,
                region: next,
                node: id,
            });
        }
    }
    Err(SearchError::NoPath { start, goal })
}

fn reconstruct(nodes: &[Node], mut id: usize) -> Path {
    let mut regions = vec![nodes[id].region];
    while let Some(parent) = nodes[id].parent {
        regions.push(nodes[parent].region);
        id = parent;
    }
    regions.reverse();
    Path::from_trusted(regions)
}

struct Shortest<'a, S: ?Sized> {
    space: &'a S,
    goal: usize,
}

impl<S: SearchSpace + ?Sized> NodeModel for Shortest<'_, S> {
    type Payload = ();

    fn root(&self, _: usize) {}

    fn cost(&self, _: &(), _: usize) -> f64 {
        1.0
    }

    fn child(&self, _: &(), _: usize) {}

    fn heuristic(&self, _: &(), region: usize) -> f64 {
        self.space.step_lower_bound(region, self.goal)
    }
}

/// Exposure-agnostic baseline: fewest moves, unit cost.
pub fn plan_shortest<S: SearchSpace + ?Sized>(
    space: &S,
    field: &ExposureField,
    start: usize,
    goal: usize,
) -> Result<Plan, SearchError> {
    check_query(space, field, start, goal)?;
    region_astar(space, &Shortest { space, goal }, start, goal)
}

struct ExposureScore<'a, S: ?Sized> {
    space: &'a S,
    field: &'a ExposureField,
    goal: usize,
    min_score: f64,
}

impl<S: SearchSpace + ?Sized> NodeModel for ExposureScore<'_, S> {
    type Payload = ();

    fn root(&self, _: usize) {}

    fn cost(&self, _: &(), to: usize) -> f64 {
        self.field.score(to)
    }

    fn child(&self, _: &(), _: usize) {}

    fn heuristic(&self, _: &(), region: usize) -> f64 {
        manhattan_3d(self.space, region, self.goal) * self.min_score
    }
}

/// A* Exposure Score: each move costs the exposure score of the region
/// entered.
pub fn plan_ess<S: SearchSpace + ?Sized>(
    space: &S,
    field: &ExposureField,
    start: usize,
    goal: usize,
) -> Result<Plan, SearchError> {
    check_query(space, field, start, goal)?;
    let model = ExposureScore {
        space,
        field,
        goal,
        min_score: field.min_exposure_score(),
    };
    region_astar(space, &model, start, goal)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BinaryParams {
    /// Per-move cost `m`; `None` uses `1 / (2n)`.
    pub movement_cost: Option<f64>,
}

impl BinaryParams {
    pub fn resolve(&self, n: usize) -> Result<f64, SearchError> {
        let limit = 1.0 / n as f64;
        match self.movement_cost {
            None => Ok(0.5 * limit),
            Some(m) if m > 0.0 && m < limit => Ok(m),
            Some(m) => Err(SearchError::Parameter(format!(
                "movement cost must lie in (0, 1/n) = (0, {limit}), got {m}"
            ))),
        }
    }
}

struct Binary<'a> {
    field: &'a ExposureField,
    goal: usize,
    m: f64,
}

impl NodeModel for Binary<'_> {
    type Payload = RegionSet;

    fn root(&self, start: usize) -> RegionSet {
        self.field.row(start).clone()
    }

    fn cost(&self, exposed: &RegionSet, to: usize) -> f64 {
        binary_transition_cost(self.field, exposed, to, self.m)
    }

    fn child(&self, exposed: &RegionSet, to: usize) -> RegionSet {
        exposed.union(self.field.row(to))
    }

    fn heuristic(&self, exposed: &RegionSet, _: usize) -> f64 {
        self.field.row(self.goal).difference_count(exposed) as f64
    }
}

/// A* Binary: nodes carry the set of regions exposed so far and each move
/// costs the regions it newly exposes.
pub fn plan_binary<S: SearchSpace + ?Sized>(
    space: &S,
    field: &ExposureField,
    start: usize,
    goal: usize,
    params: BinaryParams,
) -> Result<Plan, SearchError> {
    check_query(space, field, start, goal)?;
    let m = params.resolve(field.len())?;
    region_astar(space, &Binary { field, goal, m }, start, goal)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationParams {
    /// Sightings after which a region stops adding risk.
    pub tau: u32,
    pub p_success: f64,
}

impl Default for SaturationParams {
    fn default() -> Self {
        Self {
            tau: 1,
            p_success: DEFAULT_P_SUCCESS,
        }
    }
}

struct Saturation<'a, S: ?Sized> {
    space: &'a S,
    field: &'a ExposureField,
    goal: usize,
    params: SaturationParams,
    per_step: f64,
}

impl<S: SearchSpace + ?Sized> NodeModel for Saturation<'_, S> {
    type Payload = Box<[u16]>;

    fn root(&self, start: usize) -> Box<[u16]> {
        saturation_root_counts(self.field, start, self.params.tau).into_boxed_slice()
    }

    fn cost(&self, counts: &Box<[u16]>, to: usize) -> f64 {
        saturation_transition_cost(self.field, counts, to, self.params.tau, self.params.p_success)
    }

    fn child(&self, counts: &Box<[u16]>, to: usize) -> Box<[u16]> {
        saturation_child_counts(self.field, counts, to, self.params.tau).into_boxed_slice()
    }

    fn heuristic(&self, _: &Box<[u16]>, region: usize) -> f64 {
        manhattan_3d(self.space, region, self.goal) * self.per_step
    }
}

/// A* Saturation: nodes carry per-region sighting counts; moves cost the
/// increase in clamped accumulative exposure.
pub fn plan_saturation<S: SearchSpace + ?Sized>(
    space: &S,
    field: &ExposureField,
    start: usize,
    goal: usize,
    params: SaturationParams,
) -> Result<Plan, SearchError> {
    check_saturation(params.tau, params.p_success)?;
    check_query(space, field, start, goal)?;
    let model = Saturation {
        space,
        field,
        goal,
        params,
        per_step: -f64::from(params.tau) * params.p_success.log10(),
    };
    region_astar(space, &model, start, goal)
}

#[cfg(test)]
mod tests {
    use super::super::testing::*;
    use super::super::{obj_bin, SearchSpace};
    use super::*;
    use crate::terrain::{Heightmap, TerrainParams};
    use crate::GridEnvironment;
    use proptest::prelude::*;
    use std::collections::VecDeque;

    fn bfs_distance(env: &GridEnvironment, s: usize, g: usize) -> Option<usize> {
        let mut dist = vec![usize::MAX; env.len()];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(r) = queue.pop_front() {
            for &nb in env.neighbors(r) {
                if dist[nb] == usize::MAX {
                    dist[nb] = dist[r] + 1;
                    queue.push_back(nb);
                }
            }
        }
        (dist[g] != usize::MAX).then_some(dist[g])
    }

    #[test]
    fn start_equals_goal_is_single_region() {
        let (env, field) = flat(3, 3);
        for plan in [
            plan_shortest(&env, &field, 4, 4),
            plan_ess(&env, &field, 4, 4),
            plan_binary(&env, &field, 4, 4, BinaryParams::default()),
            plan_saturation(&env, &field, 4, 4, SaturationParams { tau: 3, p_success: 0.9 }),
        ] {
            let plan = plan.unwrap();
            assert_eq!(plan.path.regions(), &[4]);
            assert_eq!(plan.cost, 0.0);
        }
    }

    #[test]
    fn flat_corner_to_corner_takes_five_regions() {
        let (env, field) = flat(3, 3);
        assert_eq!(plan_shortest(&env, &field, 0, 8).unwrap().path.len(), 5);
        // Every score is 1 and the heuristic is plain Manhattan distance.
        let ess = plan_ess(&env, &field, 0, 8).unwrap();
        assert_eq!(ess.path.len(), 5);
        assert_eq!(ess.cost, 4.0);
    }

    #[test]
    fn disconnected_queries_report_no_path() {
        let (env, field) = world(&[vec![0.0, 9.0, 0.0]], 1.0);
        assert_eq!(
            plan_shortest(&env, &field, 0, 2),
            Err(SearchError::NoPath { start: 0, goal: 2 })
        );
        assert!(matches!(plan_ess(&env, &field, 0, 2), Err(SearchError::NoPath { .. })));
        assert!(matches!(
            plan_binary(&env, &field, 0, 2, BinaryParams::default()),
            Err(SearchError::NoPath { .. })
        ));
        assert!(matches!(
            plan_saturation(&env, &field, 0, 2, SaturationParams::default()),
            Err(SearchError::NoPath { .. })
        ));
        assert!(matches!(
            plan_shortest(&env, &field, 0, 3),
            Err(SearchError::RegionOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let (env, field) = flat(3, 3);
        let sat = |tau, p_success| plan_saturation(&env, &field, 0, 8, SaturationParams { tau, p_success });
        assert!(matches!(sat(0, 0.9), Err(SearchError::Parameter(_))));
        assert!(matches!(sat(1, 1.0), Err(SearchError::Parameter(_))));
        let m = |m| plan_binary(&env, &field, 0, 8, BinaryParams { movement_cost: Some(m) });
        assert!(matches!(m(0.2), Err(SearchError::Parameter(_))));
        assert!(m(0.05).is_ok());
        assert_eq!(BinaryParams::default().resolve(10).unwrap(), 0.05);
    }

    #[test]
    fn binary_prefers_the_hidden_valley() {
        // A trench along row 2 between two ridges hides the walker from the
        // plain to the north.
        let rows = vec![
            vec![0.0; 7],
            vec![0.0; 7],
            vec![0.0, 0.0, 4.0, 4.0, 4.0, 0.0, 0.0],
            vec![0.0, -3.0, -3.0, -3.0, -3.0, -3.0, 0.0],
            vec![0.0, 0.0, 4.0, 4.0, 4.0, 0.0, 0.0],
        ];
        let (env, field) = world(&rows, f64::INFINITY);
        let (s, g) = (env.index(3, 0).unwrap(), env.index(3, 6).unwrap());
        let binary = plan_binary(&env, &field, s, g, BinaryParams::default()).unwrap();
        let shortest = plan_shortest(&env, &field, s, g).unwrap();
        assert!(obj_bin(&field, binary.path.regions()).unwrap() <= obj_bin(&field, shortest.path.regions()).unwrap());
    }

    fn random_walls() -> impl Strategy<Value = (Vec<f64>, usize, usize)> {
        (
            proptest::collection::vec(prop_oneof![4 => Just(0.0), 1 => Just(5.0)], 100),
            0usize..100,
            0usize..100,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn shortest_matches_bfs((elev, s, g) in random_walls()) {
            let env = GridEnvironment::new(
                Heightmap::new(10, 10, 1.0, elev).unwrap(),
                TerrainParams { max_step: 1.0, ..Default::default() },
            ).unwrap();
            let field = ExposureField::compute(&env);
            match (bfs_distance(&env, s, g), plan_shortest(&env, &field, s, g)) {
                (Some(d), Ok(plan)) => {
                    prop_assert_eq!(plan.path.len(), d + 1);
                    prop_assert!(Path::new(&env, plan.path.into_inner()).is_ok());
                }
                (None, Err(SearchError::NoPath { .. })) => {}
                (d, p) => prop_assert!(false, "bfs {:?} vs planner {:?}", d, p),
            }
        }

        #[test]
        fn planners_return_feasible_deterministic_paths(
            elev in proptest::collection::vec(0.0f64..3.0, 36),
            s in 0usize..36,
            g in 0usize..36,
            tau in 1u32..5,
        ) {
            let env = GridEnvironment::new(
                Heightmap::new(6, 6, 1.0, elev).unwrap(),
                TerrainParams::default(),
            ).unwrap();
            let field = ExposureField::compute(&env);
            let sat = SaturationParams { tau, p_success: 0.9 };
            for _ in 0..2 {
                let plans = [
                    plan_ess(&env, &field, s, g).unwrap(),
                    plan_binary(&env, &field, s, g, BinaryParams::default()).unwrap(),
                    plan_saturation(&env, &field, s, g, sat).unwrap(),
                ];
                for plan in &plans {
                    prop_assert_eq!(plan.path.start(), s);
                    prop_assert_eq!(plan.path.goal(), g);
                    prop_assert!(Path::new(&env, plan.path.regions().to_vec()).is_ok());
                }
                prop_assert_eq!(&plans[1], &plan_binary(&env, &field, s, g, BinaryParams::default()).unwrap());
                // Binary cost is new exposure plus m per move.
                let m = BinaryParams::default().resolve(36).unwrap();
                let exposed = obj_bin(&field, plans[1].path.regions()).unwrap() - field.row(s).count();
                let expected = exposed as f64 + m * (plans[1].path.len() - 1) as f64;
                prop_assert!((plans[1].cost - expected).abs() < 1e-9);
                prop_assert!(env.region_count() == 36);
            }
        }
    }
}
