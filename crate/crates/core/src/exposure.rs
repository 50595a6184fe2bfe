//! The exposure graph: which regions share line-of-sight.

use std::io::{Read, Write};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bitset::RegionSet;
use crate::error::TerrainError;
use crate::terrain::GridEnvironment;

const CACHE_MAGIC: &[u8; 4] = b"EXPF";

/// How to schedule all-pairs line-of-sight evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

/// Symmetric, reflexive visibility relation, one [`RegionSet`] row per region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExposureField {
    rows: Vec<RegionSet>,
    sizes: Vec<usize>,
}

impl ExposureField {
    fn from_valid_rows(rows: Vec<RegionSet>) -> Self {
        let sizes = rows.iter().map(RegionSet::count).collect();
        Self { rows, sizes }
    }

    /// Builds a field from explicit rows, checking reflexivity and symmetry.
    pub fn from_rows(rows: Vec<RegionSet>) -> Result<Self, TerrainError> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.universe() != n {
                return Err(TerrainError::Cache(format!(
                    "row {i} spans {} regions, expected {n}",
                    row.universe()
                )));
            }
            if !row.contains(i) {
                return Err(TerrainError::Cache(format!("region {i} is not exposed to itself")));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if let Some(j) = row.iter().find(|&j| !rows[j].contains(i)) {
                return Err(TerrainError::Cache(format!(
                    "asymmetric exposure between regions {i} and {j}"
                )));
            }
        }
        Ok(Self::from_valid_rows(rows))
    }

    /// Builds a field from unordered visible pairs; every region sees itself.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, TerrainError> {
        let mut rows: Vec<RegionSet> = (0..n).map(|i| RegionSet::from_indices(n, [i])).collect();
        for (a, b) in pairs {
            for i in [a, b] {
                if i >= n {
                    return Err(TerrainError::RegionOutOfRange { index: i, n });
                }
            }
            rows[a].insert(b);
            rows[b].insert(a);
        }
        Ok(Self::from_valid_rows(rows))
    }

    pub fn compute(env: &GridEnvironment) -> Self {
        Self::compute_with(env, Execution::default())
    }

    /// All-pairs line-of-sight. Each unordered pair is evaluated once and
    /// mirrored, so the result is identical under either schedule.
    pub fn compute_with(env: &GridEnvironment, execution: Execution) -> Self {
        let n = env.len();
        // Upper triangle, row i holds j > i.
        let upper = |i: usize| -> Vec<usize> { (i + 1..n).filter(|&j| env.line_of_sight_unchecked(i, j)).collect() };
        let triangle: Vec<Vec<usize>> = match execution {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(upper).collect(),
            _ => (0..n).map(upper).collect(),
        };
        let mut rows: Vec<RegionSet> = (0..n).map(|i| RegionSet::from_indices(n, [i])).collect();
        for (i, visible) in triangle.iter().enumerate() {
            for &j in visible {
                rows[i].insert(j);
                rows[j].insert(i);
            }
        }
        Self::from_valid_rows(rows)
    }

    /// Number of regions.
    #[inline]
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `E(x)`: every region sharing line-of-sight with `x`, including `x`.
    pub fn exposure_set(&self, x: usize) -> Result<&RegionSet, TerrainError> {
        self.rows.get(x).ok_or(TerrainError::RegionOutOfRange {
            index: x,
            n: self.len(),
        })
    }

    /// Unchecked row access for the planners' inner loops.
    #[inline]
    pub(crate) fn row(&self, x: usize) -> &RegionSet {
        &self.rows[x]
    }

    #[inline]
    pub fn visible(&self, a: usize, b: usize) -> bool {
        self.rows[a].contains(b)
    }

    /// Fraction of the environment visible from region `i`.
    pub fn exposure_score(&self, i: usize) -> Result<f64, TerrainError> {
        self.exposure_set(i)?;
        Ok(self.score(i))
    }

    #[inline]
    pub(crate) fn score(&self, i: usize) -> f64 {
        self.sizes[i] as f64 / self.len() as f64
    }

    pub fn exposure_scores(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.score(i)).collect()
    }

    /// Smallest exposure score over all regions.
    pub fn min_exposure_score(&self) -> f64 {
        self.sizes.iter().min().map_or(0.0, |&m| m as f64 / self.len() as f64)
    }

    /// `|E(i)|` for every region.
    pub fn exposure_set_sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Union of the exposure sets of `regions`.
    pub fn exposed_by(&self, regions: impl IntoIterator<Item = usize>) -> RegionSet {
        let mut acc = RegionSet::new(self.len());
        for r in regions {
            acc.union_with(&self.rows[r]);
        }
        acc
    }

    /// Writes the binary cache: `EXPF`, little-endian `u32` region count,
    /// then one `ceil(n/8)`-byte bitset row per region.
    pub fn write_cache<W: Write>(&self, mut out: W) -> Result<(), TerrainError> {
        let n =
            u32::try_from(self.len()).map_err(|_| TerrainError::Cache("too many regions for a u32 count".into()))?;
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&n.to_le_bytes())?;
        for row in &self.rows {
            out.write_all(&row.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_cache_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(8 + self.len() * self.len().div_ceil(8));
        self.write_cache(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    /// Reads and validates a cache written by [`ExposureField::write_cache`].
    pub fn read_cache<R: Read>(mut input: R) -> Result<Self, TerrainError> {
        let mut header = [0u8; 8];
        input
            .read_exact(&mut header)
            .map_err(|_| TerrainError::Cache("truncated header".into()))?;
        if &header[..4] != CACHE_MAGIC {
            return Err(TerrainError::Cache("bad magic bytes".into()));
        }
        let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let row_bytes = n.div_ceil(8);
        let mut buf = vec![0u8; row_bytes];
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            input
                .read_exact(&mut buf)
                .map_err(|_| TerrainError::Cache(format!("truncated at row {i}")))?;
            let row = RegionSet::from_le_bytes(n, &buf)
                .ok_or_else(|| TerrainError::Cache(format!("row {i} sets bits beyond {n}")))?;
            rows.push(row);
        }
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(TerrainError::Cache("trailing bytes after last row".into()));
        }
        Self::from_rows(rows)
    }
}
