//! Procedural stand-ins for the two benchmark environment families.
//!
//! Boxes: a mostly open flat plain with scattered rectangular blocks too
//! tall to climb or see over. Hills: a smooth sum of Gaussian bumps with no
//! movement limits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::BenchError;
use crate::terrain::{Heightmap, TerrainParams};

/// Climbable step on Boxes maps; every box wall exceeds it.
pub const BOXES_MAX_STEP: f64 = 1.0;

const MIN_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Boxes,
    Hills,
}

impl MapKind {
    pub fn id(self) -> &'static str {
        match self {
            MapKind::Boxes => "boxes",
            MapKind::Hills => "hills",
        }
    }

    /// Terrain parameters the map family is designed for.
    pub fn terrain(self) -> TerrainParams {
        match self {
            MapKind::Boxes => TerrainParams {
                max_step: BOXES_MAX_STEP,
                ..TerrainParams::default()
            },
            MapKind::Hills => TerrainParams::default(),
        }
    }

    pub fn generate(self, seed: u64, size: usize) -> Result<Heightmap, BenchError> {
        match self {
            MapKind::Boxes => gen_boxes(seed, size),
            MapKind::Hills => gen_hills(seed, size),
        }
    }
}

impl std::str::FromStr for MapKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "boxes" => Ok(MapKind::Boxes),
            "hills" => Ok(MapKind::Hills),
            other => Err(format!("unknown map kind {other:?}, expected boxes or hills")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    row: usize,
    col: usize,
    rows: usize,
    cols: usize,
}

impl Rect {
    /// True when the rectangles overlap or touch, including diagonally.
    fn crowds(&self, other: &Rect) -> bool {
        self.row <= other.row + other.rows
            && other.row <= self.row + self.rows
            && self.col <= other.col + other.cols
            && other.col <= self.col + self.cols
    }
}

/// Flat plain with non-touching rectangular boxes kept off the border, so
/// the ground stays connected around them. Boxes cover roughly a tenth of
/// the map.
pub fn gen_boxes(seed: u64, size: usize) -> Result<Heightmap, BenchError> {
    if size < MIN_SIZE {
        return Err(BenchError::TooSmall(size));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = (size * size / 250).max(1);
    let max_side = (size / 6).max(2);
    let mut boxes: Vec<Rect> = Vec::new();
    for _ in 0..target * 50 {
        if boxes.len() == target {
            break;
        }
        let rows = rng.random_range(2..=max_side);
        let cols = rng.random_range(2..=max_side);
        let candidate = Rect {
            row: rng.random_range(1..size - rows),
            col: rng.random_range(1..size - cols),
            rows,
            cols,
        };
        if boxes.iter().all(|b| !b.crowds(&candidate)) {
            boxes.push(candidate);
        }
    }
    if boxes.is_empty() {
        return Err(BenchError::NoBoxes(size));
    }
    let mut map = Heightmap::flat(size, size, 0.0)?;
    for b in &boxes {
        let height = f64::from(rng.random_range(3u8..=8));
        for r in b.row..b.row + b.rows {
            for c in b.col..b.col + b.cols {
                map.set(r, c, height);
            }
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillsParams {
    pub bumps: usize,
    /// Peak height scale before slope limiting.
    pub amplitude: f64,
    /// Bump width scale, in cells.
    pub sigma: f64,
}

impl HillsParams {
    pub fn for_size(size: usize) -> Self {
        Self {
            bumps: (size * size / 150).max(4),
            amplitude: size as f64 / 6.0,
            sigma: size as f64 / 8.0,
        }
    }
}

pub fn gen_hills(seed: u64, size: usize) -> Result<Heightmap, BenchError> {
    gen_hills_with(seed, size, HillsParams::for_size(size))
}

/// Sum of Gaussian bumps, rounded to millimetres.
pub fn gen_hills_with(seed: u64, size: usize, params: HillsParams) -> Result<Heightmap, BenchError> {
    if size < MIN_SIZE {
        return Err(BenchError::TooSmall(size));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64, f64)> = (0..params.bumps)
        .map(|_| {
            (
                rng.random_range(0.0..size as f64),
                rng.random_range(0.0..size as f64),
                params.amplitude * rng.random_range(0.3..1.0),
                params.sigma.max(0.5) * rng.random_range(0.5..1.0),
            )
        })
        .collect();
    let mut elevations = vec![0.0; size * size];
    for (i, e) in elevations.iter_mut().enumerate() {
        let (r, c) = ((i / size) as f64 + 0.5, (i % size) as f64 + 0.5);
        *e = bumps
            .iter()
            .map(|&(br, bc, a, s)| a * (-((r - br).powi(2) + (c - bc).powi(2)) / (2.0 * s * s)).exp())
            .sum();
    }
    for e in &mut elevations {
        *e = (*e * 1000.0).round() / 1000.0;
    }
    Ok(Heightmap::new(size, size, 1.0, elevations)?)
}
