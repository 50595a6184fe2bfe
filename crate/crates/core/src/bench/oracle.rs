//! Exhaustive enumeration of simple paths, used to check the exact planner.

use crate::error::{BenchError, SearchError};
use crate::exposure::ExposureField;
use crate::search::SearchSpace;

/// Enumeration limits for [`brute_force_min_exposure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    /// Longest path considered, in regions.
    pub max_path_len: usize,
    /// Partial paths visited before giving up.
    pub max_partial_paths: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            max_path_len: usize::MAX,
            max_partial_paths: 50_000_000,
        }
    }
}

struct Dfs<'a, S: ?Sized> {
    space: &'a S,
    members: Vec<Vec<usize>>,
    goal: usize,
    limits: EnumerationLimits,
    on_path: Vec<bool>,
    /// How many path regions see each region.
    seen_by: Vec<u32>,
    exposed: usize,
    visited: usize,
    best: Option<usize>,
}

impl<S: SearchSpace + ?Sized> Dfs<'_, S> {
    fn enter(&mut self, region: usize) {
        self.on_path[region] = true;
        for &i in &self.members[region] {
            if self.seen_by[i] == 0 {
                self.exposed += 1;
            }
            self.seen_by[i] += 1;
        }
    }

    fn leave(&mut self, region: usize) {
        self.on_path[region] = false;
        for &i in &self.members[region] {
            self.seen_by[i] -= 1;
            if self.seen_by[i] == 0 {
                self.exposed -= 1;
            }
        }
    }

    fn search(&mut self, here: usize, depth: usize) -> Result<(), BenchError> {
        self.visited += 1;
        if self.visited > self.limits.max_partial_paths {
            return Err(BenchError::EnumerationOverflow {
                limit: self.limits.max_partial_paths,
            });
        }
        if here == self.goal {
            self.best = Some(self.best.map_or(self.exposed, |b| b.min(self.exposed)));
            return Ok(());
        }
        if depth == self.limits.max_path_len {
            return Ok(());
        }
        for &next in self.space.neighbors(here) {
            if self.on_path[next] {
                continue;
            }
            self.enter(next);
            let result = self.search(next, depth + 1);
            self.leave(next);
            result?;
        }
        Ok(())
    }
}

/// Smallest binary exposure over every simple traversable path from
/// `start` to `goal`, or `None` when no such path exists within the limits.
pub fn brute_force_min_exposure<S: SearchSpace + ?Sized>(
    space: &S,
    field: &ExposureField,
    start: usize,
    goal: usize,
    limits: EnumerationLimits,
) -> Result<Option<usize>, BenchError> {
    let n = space.region_count();
    for r in [start, goal] {
        if r >= n {
            return Err(SearchError::RegionOutOfRange { index: r, n }.into());
        }
    }
    let members = (0..n)
        .map(|i| Ok(field.exposure_set(i)?.iter().collect()))
        .collect::<Result<Vec<Vec<usize>>, BenchError>>()?;
    let mut dfs = Dfs {
        space,
        members,
        goal,
        limits,
        on_path: vec![false; n],
        seen_by: vec![0; n],
        exposed: 0,
        visited: 0,
        best: None,
    };
    dfs.enter(start);
    dfs.search(start, 1)?;
    Ok(dfs.best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::fixture::{lemma1_fixture, region};
    use crate::search::testing::{flat, world};

    #[test]
    fn start_is_goal() {
        let (env, field) = flat(3, 3);
        assert_eq!(
            brute_force_min_exposure(&env, &field, 4, 4, EnumerationLimits::default()).unwrap(),
            Some(9)
        );
    }

    #[test]
    fn fixture_optimum() {
        let fx = lemma1_fixture();
        let (f, h, e) = (region('F').unwrap(), region('H').unwrap(), region('E').unwrap());
        let limits = EnumerationLimits::default();
        assert_eq!(
            brute_force_min_exposure(&fx, fx.field(), f, h, limits).unwrap(),
            Some(12)
        );
        assert_eq!(
            brute_force_min_exposure(&fx, fx.field(), f, e, limits).unwrap(),
            Some(9)
        );
    }

    #[test]
    fn limits_are_enforced() {
        let (env, field) = flat(4, 4);
        let tight = EnumerationLimits {
            max_partial_paths: 10,
            ..Default::default()
        };
        assert!(matches!(
            brute_force_min_exposure(&env, &field, 0, 15, tight),
            Err(BenchError::EnumerationOverflow { limit: 10 })
        ));
        let short = EnumerationLimits {
            max_path_len: 3,
            ..Default::default()
        };
        assert_eq!(brute_force_min_exposure(&env, &field, 0, 15, short).unwrap(), None);
        let (env, field) = world(&[vec![0.0, 9.0, 0.0]], 1.0);
        assert_eq!(
            brute_force_min_exposure(&env, &field, 0, 2, EnumerationLimits::default()).unwrap(),
            None
        );
    }
}
