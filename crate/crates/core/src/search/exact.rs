//! Optimal binary-exposure search over path-history states.
//!
//! The objective of a path depends only on which regions it has exposed, so
//! a state is the current region together with the union of the exposure
//! sets of every region visited so far. Two histories that exposed the same
//! regions and stand in the same place have identical futures; collapsing
//! them loses nothing. A state's cost is the size of its exposed set, so it
//! is the same however the state is reached and a state never needs to be
//! reopened.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::rc::Rc;

use crate::bitset::RegionSet;
use crate::error::SearchError;
use crate::exposure::ExposureField;

use super::{check_query, Path, Plan, SearchSpace};

#[derive(PartialEq)]
struct Entry {
    f: usize,
    h: usize,
    dist: f64,
    region: usize,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .cmp(&self.f)
            .then_with(|| other.h.cmp(&self.h))
            .then_with(|| other.dist.total_cmp(&self.dist))
            .then_with(|| other.region.cmp(&self.region))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct ExactNode {
    region: usize,
    parent: Option<usize>,
    exposed: Rc<RegionSet>,
}

/// Exposure-optimal path from `start` to `goal`, or
/// [`SearchError::BudgetExceeded`] once `node_budget` states have been
/// expanded without reaching the goal.
///
/// The heuristic counts regions seen from the goal that the path has not yet
/// exposed; any completion must expose them, so the first goal state popped
/// is optimal.
pub fn plan_exact<S: SearchSpace + ?Sized>(
    space: &S,
    field: &ExposureField,
    start: usize,
    goal: usize,
    node_budget: usize,
) -> Result<Plan, SearchError> {
    check_query(space, field, start, goal)?;
    if node_budget == 0 {
        return Err(SearchError::Parameter("node budget must be positive".into()));
    }
    let goal_row = field.row(goal);
    let heuristic = |exposed: &RegionSet| goal_row.difference_count(exposed);

    let root = Rc::new(field.row(start).clone());
    let mut seen: HashSet<(usize, Rc<RegionSet>)> = HashSet::new();
    seen.insert((start, Rc::clone(&root)));
    let h = heuristic(&root);
    let mut open = BinaryHeap::from([Entry {
        f: root.count() + h,
        h,
        dist: space.step_lower_bound(start, goal),
        region: start,
        node: 0,
    }]);
    let mut nodes = vec![ExactNode {
        region: start,
        parent: None,
        exposed: root,
    }];

    let mut expanded = 0;
    while let Some(Entry { region, node, .. }) = open.pop() {
        if expanded == node_budget {
            return Err(SearchError::BudgetExceeded { budget: node_budget });
        }
        expanded += 1;
        let exposed = Rc::clone(&nodes[node].exposed);
        if region == goal {
            return Ok(Plan {
                path: loop_erased(&nodes, node),
                cost: exposed.count() as f64,
                expanded,
            });
        }
        for &next in space.neighbors(region) {
            let row = field.row(next);
            let child = if row.is_subset(&exposed) {
                Rc::clone(&exposed)
            } else {
                Rc::new(exposed.union(row))
            };
            if !seen.insert((next, Rc::clone(&child))) {
                continue;
            }
            let h = heuristic(&child);
            let id = nodes.len();
            open.push(Entry {
                f: child.count() + h,
                h,
                dist: space.step_lower_bound(next, goal),
                region: next,
                node: id,
            });
            nodes.push(ExactNode {
                region: next,
                parent: Some(node),
                exposed: child,
            });
        }
    }
    Err(SearchError::NoPath { start, goal })
}

/// Walks may revisit regions for free; cutting the loops out leaves a simple
/// path over a subset of the same regions, which exposes no more.
fn loop_erased(nodes: &[ExactNode], mut id: usize) -> Path {
    let mut walk = vec![nodes[id].region];
    while let Some(parent) = nodes[id].parent {
        walk.push(nodes[parent].region);
        id = parent;
    }
    walk.reverse();
    let mut path: Vec<usize> = Vec::with_capacity(walk.len());
    for region in walk {
        if let Some(pos) = path.iter().position(|&r| r == region) {
            path.truncate(pos + 1);
        } else {
            path.push(region);
        }
    }
    Path::from_trusted(path)
}
