//! Thirteen-position environment on which the best exposure path from F to
//! H does not contain the best exposure path from F to E.
//!
//! Layout (x to the right, y down); `#` blocks movement only:
//!
//! ```text
//!     x=0 x=1 x=2 x=3 x=4
//! y=0  F   J   I   L   G
//! y=1  C   #   E   M   K
//! y=2  B   A   D   H
//! ```
//!
//! Movement follows the ring F-J-I-E-D-A-B-C-F plus the spur D-H; G, K, L
//! and M are observers that cannot be entered. Sight lines are listed in
//! [`SIGHT_LINES`].

use crate::error::SearchError;
use crate::exposure::ExposureField;
use crate::search::{Path, SearchSpace};

pub const NAMES: [char; 13] = ['A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J', 'K', 'L', 'M'];

const LAYOUT: [(char, f64, f64); 13] = [
    ('A', 1.0, 2.0),
    ('B', 0.0, 2.0),
    ('C', 0.0, 1.0),
    ('D', 2.0, 2.0),
    ('E', 2.0, 1.0),
    ('F', 0.0, 0.0),
    ('G', 4.0, 0.0),
    ('H', 3.0, 2.0),
    ('I', 2.0, 0.0),
    ('J', 1.0, 0.0),
    ('K', 4.0, 1.0),
    ('L', 3.0, 0.0),
    ('M', 3.0, 1.0),
];

const MOVES: [(char, char); 9] = [
    ('F', 'J'),
    ('J', 'I'),
    ('I', 'E'),
    ('E', 'D'),
    ('D', 'H'),
    ('F', 'C'),
    ('C', 'B'),
    ('B', 'A'),
    ('A', 'D'),
];

/// Pairs of positions with mutual line-of-sight (besides each position
/// seeing itself).
pub const SIGHT_LINES: [(char, char); 18] = [
    ('A', 'B'),
    ('A', 'D'),
    ('B', 'C'),
    ('C', 'F'),
    ('D', 'E'),
    ('D', 'H'),
    ('E', 'I'),
    ('F', 'I'),
    ('F', 'J'),
    ('H', 'G'),
    ('H', 'J'),
    ('H', 'K'),
    ('H', 'L'),
    ('H', 'M'),
    ('J', 'G'),
    ('J', 'K'),
    ('I', 'L'),
    ('I', 'M'),
];

/// Explicit movement and sight graphs over named positions.
#[derive(Debug, Clone)]
pub struct FixtureGraph {
    adjacency: Vec<Vec<usize>>,
    points: Vec<[f64; 3]>,
    field: ExposureField,
}

/// Index of a named position.
pub fn region(name: char) -> Option<usize> {
    NAMES.iter().position(|&c| c == name)
}

fn idx(name: char) -> usize {
    region(name).expect("fixture names are static")
}

pub fn lemma1_fixture() -> FixtureGraph {
    let mut adjacency = vec![Vec::new(); NAMES.len()];
    for (a, b) in MOVES {
        let (a, b) = (idx(a), idx(b));
        if !adjacency[a].contains(&b) {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    let points = LAYOUT.iter().map(|&(_, x, y)| [x, y, 0.0]).collect();
    let field = ExposureField::from_pairs(NAMES.len(), SIGHT_LINES.iter().map(|&(a, b)| (idx(a), idx(b))))
        .expect("fixture sight lines are in range");
    FixtureGraph {
        adjacency,
        points,
        field,
    }
}

impl FixtureGraph {
    pub fn field(&self) -> &ExposureField {
        &self.field
    }

    pub fn name(&self, region: usize) -> char {
        NAMES[region]
    }

    /// Parses position names separated by commas, arrows or whitespace,
    /// e.g. `"F,J,I"` or `"F -> J -> I"`.
    pub fn regions(&self, text: &str) -> Result<Vec<usize>, SearchError> {
        text.split(|c: char| c == ',' || c == '-' || c == '>' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                let mut chars = t.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => region(c.to_ascii_uppercase())
                        .ok_or_else(|| SearchError::Parameter(format!("unknown fixture position {t:?}"))),
                    _ => Err(SearchError::Parameter(format!("unknown fixture position {t:?}"))),
                }
            })
            .collect()
    }

    /// A validated path through named positions.
    pub fn path(&self, text: &str) -> Result<Path, SearchError> {
        Path::new(self, self.regions(text)?)
    }

    pub fn names_of(&self, regions: impl IntoIterator<Item = usize>) -> String {
        regions.into_iter().map(|r| self.name(r)).collect()
    }
}

impl SearchSpace for FixtureGraph {
    fn region_count(&self) -> usize {
        NAMES.len()
    }

    fn neighbors(&self, region: usize) -> &[usize] {
        &self.adjacency[region]
    }

    fn point(&self, region: usize) -> [f64; 3] {
        self.points[region]
    }

    fn step_lower_bound(&self, a: usize, b: usize) -> f64 {
        let (pa, pb) = (self.points[a], self.points[b]);
        (pa[0] - pb[0]).abs() + (pa[1] - pb[1]).abs()
    }
}
