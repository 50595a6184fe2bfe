//! Gridded terrain: heightmaps, representative points, traversability and
//! line-of-sight between regions.
//!
//! Region `i` is the cell at `(i / width, i % width)`; row 0 is the northern
//! edge of the map. The representative point of a region sits at the cell
//! center, `offset` above the cell's (maximum) surface elevation.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::TerrainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

impl FromStr for Connectivity {
    type Err = TerrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "4" | "four" => Ok(Connectivity::Four),
            "8" | "eight" => Ok(Connectivity::Eight),
            other => Err(TerrainError::Parameter(format!(
                "connectivity must be 4 or 8, got {other:?}"
            ))),
        }
    }
}

/// How a heightmap is turned into a planning environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerrainParams {
    /// Height of representative points above the cell surface.
    pub offset: f64,
    /// Largest elevation change the robot can climb between adjacent cells.
    pub max_step: f64,
    pub connectivity: Connectivity,
}

impl Default for TerrainParams {
    fn default() -> Self {
        Self {
            offset: 1.0,
            max_step: f64::INFINITY,
            connectivity: Connectivity::Four,
        }
    }
}

impl TerrainParams {
    fn validate(&self) -> Result<(), TerrainError> {
        if !(self.offset.is_finite() && self.offset >= 0.0) {
            return Err(TerrainError::Parameter(format!(
                "offset must be finite and non-negative, got {}",
                self.offset
            )));
        }
        if self.max_step.is_nan() || self.max_step < 0.0 {
            return Err(TerrainError::Parameter(format!(
                "max_step must be non-negative, got {}",
                self.max_step
            )));
        }
        Ok(())
    }
}

/// A rectangular elevation grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Heightmap {
    width: usize,
    height: usize,
    cell_size: f64,
    elevations: Vec<f64>,
}

impl Heightmap {
    pub fn new(width: usize, height: usize, cell_size: f64, elevations: Vec<f64>) -> Result<Self, TerrainError> {
        if width == 0 || height == 0 {
            return Err(TerrainError::Empty);
        }
        if elevations.len() != width * height {
            return Err(TerrainError::Parameter(format!(
                "expected {} elevations for a {width}x{height} grid, got {}",
                width * height,
                elevations.len()
            )));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(TerrainError::Parameter(format!(
                "cell_size must be finite and positive, got {cell_size}"
            )));
        }
        if let Some(bad) = elevations.iter().find(|e| !e.is_finite()) {
            return Err(TerrainError::Parameter(format!("elevations must be finite, got {bad}")));
        }
        Ok(Self {
            width,
            height,
            cell_size,
            elevations,
        })
    }

    /// Builds a heightmap from rows, northernmost first.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], cell_size: f64) -> Result<Self, TerrainError> {
        let width = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if width == 0 {
            return Err(TerrainError::Empty);
        }
        let mut elevations = Vec::with_capacity(width * rows.len());
        for (row, cells) in rows.iter().enumerate() {
            let cells = cells.as_ref();
            if cells.len() != width {
                return Err(TerrainError::Ragged {
                    row,
                    found: cells.len(),
                    expected: width,
                });
            }
            elevations.extend_from_slice(cells);
        }
        Self::new(width, rows.len(), cell_size, elevations)
    }

    pub fn flat(width: usize, height: usize, elevation: f64) -> Result<Self, TerrainError> {
        Self::new(width, height, 1.0, vec![elevation; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn elevations(&self) -> &[f64] {
        &self.elevations
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.elevations[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, elevation: f64) {
        self.elevations[row * self.width + col] = elevation;
    }

    /// Parses the plain-text heightmap format: a `width height cell_size`
    /// header followed by `height` rows of `width` elevations.
    pub fn parse(text: &str) -> Result<Self, TerrainError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (header_line, header) = lines.next().ok_or(TerrainError::Empty)?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let parse_err = |line: usize, message: String| TerrainError::Parse { line, message };
        if parts.len() != 3 {
            return Err(parse_err(
                header_line,
                format!("expected `width height cell_size`, got {header:?}"),
            ));
        }
        let width: usize = parts[0]
            .parse()
            .map_err(|e| parse_err(header_line, format!("width: {e}")))?;
        let height: usize = parts[1]
            .parse()
            .map_err(|e| parse_err(header_line, format!("height: {e}")))?;
        let cell_size: f64 = parts[2]
            .parse()
            .map_err(|e| parse_err(header_line, format!("cell_size: {e}")))?;

        let mut elevations = Vec::with_capacity(width.saturating_mul(height));
        let mut rows = 0;
        for (line, content) in lines {
            if rows == height {
                return Err(parse_err(line, format!("more than {height} rows")));
            }
            let before = elevations.len();
            for token in content.split_whitespace() {
                let value: f64 = token
                    .parse()
                    .map_err(|e| parse_err(line, format!("elevation {token:?}: {e}")))?;
                elevations.push(value);
            }
            let found = elevations.len() - before;
            if found != width {
                return Err(TerrainError::Ragged {
                    row: rows,
                    found,
                    expected: width,
                });
            }
            rows += 1;
        }
        if rows != height {
            return Err(parse_err(
                header_line,
                format!("header declares {height} rows, found {rows}"),
            ));
        }
        Self::new(width, height, cell_size, elevations)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.width, self.height, self.cell_size);
        for row in self.elevations.chunks(self.width) {
            let mut first = true;
            for value in row {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{value}");
            }
            out.push('\n');
        }
        out
    }
}

/// The discretized planning environment.
#[derive(Debug, Clone)]
pub struct GridEnvironment {
    map: Heightmap,
    params: TerrainParams,
    adjacency: Vec<Vec<usize>>,
    max_elevation: f64,
}

impl GridEnvironment {
    pub fn new(map: Heightmap, params: TerrainParams) -> Result<Self, TerrainError> {
        params.validate()?;
        let max_elevation = map.elevations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut env = Self {
            map,
            params,
            adjacency: Vec::new(),
            max_elevation,
        };
        env.adjacency = (0..env.len())
            .map(|i| env.grid_neighbors(i).filter(|&j| env.climbable(i, j)).collect())
            .collect();
        Ok(env)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], cell_size: f64, params: TerrainParams) -> Result<Self, TerrainError> {
        Self::new(Heightmap::from_rows(rows, cell_size)?, params)
    }

    /// Number of regions.
    #[inline]
    pub fn len(&self) -> usize {
        self.map.width * self.map.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> usize {
        self.map.width
    }

    pub fn height(&self) -> usize {
        self.map.height
    }

    pub fn cell_size(&self) -> f64 {
        self.map.cell_size
    }

    pub fn params(&self) -> &TerrainParams {
        &self.params
    }

    pub fn heightmap(&self) -> &Heightmap {
        &self.map
    }

    #[inline]
    pub fn elevation(&self, i: usize) -> f64 {
        self.map.elevations[i]
    }

    #[inline]
    pub fn cell(&self, i: usize) -> (usize, usize) {
        (i / self.map.width, i % self.map.width)
    }

    pub fn index(&self, row: usize, col: usize) -> Result<usize, TerrainError> {
        if row >= self.map.height || col >= self.map.width {
            return Err(TerrainError::Parameter(format!(
                "cell ({row}, {col}) outside {}x{} grid",
                self.map.height, self.map.width
            )));
        }
        Ok(row * self.map.width + col)
    }

    pub fn check_region(&self, i: usize) -> Result<(), TerrainError> {
        if i < self.len() {
            Ok(())
        } else {
            Err(TerrainError::RegionOutOfRange {
                index: i,
                n: self.len(),
            })
        }
    }

    /// Representative point `(x, y, z)` of region `i`.
    #[inline]
    pub fn point(&self, i: usize) -> [f64; 3] {
        let (row, col) = self.cell(i);
        let cs = self.map.cell_size;
        [
            (col as f64 + 0.5) * cs,
            (row as f64 + 0.5) * cs,
            self.map.elevations[i] + self.params.offset,
        ]
    }

    /// Traversable neighbours of region `i`.
    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn traversable(&self, a: usize, b: usize) -> Result<bool, TerrainError> {
        self.check_region(a)?;
        self.check_region(b)?;
        Ok(self.is_adjacent(a, b) && self.climbable(a, b))
    }

    fn is_adjacent(&self, a: usize, b: usize) -> bool {
        let (ra, ca) = self.cell(a);
        let (rb, cb) = self.cell(b);
        let (dr, dc) = (ra.abs_diff(rb), ca.abs_diff(cb));
        match self.params.connectivity {
            Connectivity::Four => dr + dc == 1,
            Connectivity::Eight => dr.max(dc) == 1,
        }
    }

    fn climbable(&self, a: usize, b: usize) -> bool {
        (self.elevation(a) - self.elevation(b)).abs() <= self.params.max_step
    }

    fn grid_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        const FOUR: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        const EIGHT: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
        let offsets: &[(isize, isize)] = match self.params.connectivity {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        };
        let (row, col) = self.cell(i);
        offsets.iter().filter_map(move |&(dr, dc)| {
            let r = row.checked_add_signed(dr)?;
            let c = col.checked_add_signed(dc)?;
            (r < self.map.height && c < self.map.width).then(|| r * self.map.width + c)
        })
    }

    /// Whether the segment between the representative points of `a` and `b`
    /// clears the terrain.
    ///
    /// The segment is sampled every quarter cell of horizontal distance. A
    /// sample is blocked when the elevation of the cell containing it is
    /// strictly above the segment there; samples inside `a` or `b` are
    /// ignored. The pair is evaluated in index order so the relation is
    /// symmetric by construction.
    pub fn line_of_sight(&self, a: usize, b: usize) -> Result<bool, TerrainError> {
        self.check_region(a)?;
        self.check_region(b)?;
        Ok(self.line_of_sight_unchecked(a, b))
    }

    pub(crate) fn line_of_sight_unchecked(&self, a: usize, b: usize) -> bool {
        if a == b {
            return true;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let pa = self.point(a);
        let pb = self.point(b);
        // Nothing can rise strictly above a ray that starts and ends above every cell.
        if pa[2].min(pb[2]) >= self.max_elevation {
            return true;
        }
        let cs = self.map.cell_size;
        let (dx, dy, dz) = (pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]);
        let dist = dx.hypot(dy);
        let step = cs / 4.0;
        let (w, h) = (self.map.width, self.map.height);
        let mut k = 1usize;
        loop {
            let along = k as f64 * step;
            if along >= dist {
                return true;
            }
            k += 1;
            let t = along / dist;
            let col = ((pa[0] + t * dx) / cs).floor().clamp(0.0, (w - 1) as f64) as usize;
            let row = ((pa[1] + t * dy) / cs).floor().clamp(0.0, (h - 1) as f64) as usize;
            let cell = row * w + col;
            if cell == a || cell == b {
                continue;
            }
            if self.map.elevations[cell] > pa[2] + t * dz {
                return false;
            }
        }
    }
}
