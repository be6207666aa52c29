//! Precomputed pair geometry of a region: the full pair list sorted by
//! distance (drives the piecewise-exact Besov sweeps) and per-point neighbor
//! lists with cumulative masses (drive ball means at breakpoint radii).

use rayon::prelude::*;

use crate::space::{PointCloudSpace, Region};

/// All unordered pairs of a region, sorted by distance (ties by indices).
/// Indices are slots into `space.ids(region)`.
#[derive(Debug)]
pub struct SortedPairs {
    pub n: usize,
    pub dist: Vec<f64>,
    pub a: Vec<u32>,
    pub b: Vec<u32>,
}

impl SortedPairs {
    pub(crate) fn build(space: &PointCloudSpace, region: Region) -> Self {
        let ids = space.ids(region);
        let n = ids.len();
        let mut entries: Vec<(f64, u32, u32)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let ids = ids;
                (i + 1..n).map(move |j| (space.dist(ids[i], ids[j]), i as u32, j as u32))
            })
            .collect();
        entries.par_sort_unstable_by(|x, y| {
            x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2))
        });
        SortedPairs {
            n,
            dist: entries.iter().map(|e| e.0).collect(),
            a: entries.iter().map(|e| e.1).collect(),
            b: entries.iter().map(|e| e.2).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    /// Smallest positive pairwise distance.
    pub fn min_distance(&self) -> Option<f64> {
        self.dist.iter().copied().find(|&d| d > 0.0)
    }
}

/// Per-point sorted neighbor lists of a region, self first at distance zero.
#[derive(Debug)]
pub struct NeighborLists {
    pub n: usize,
    offsets: Vec<usize>,
    slot: Vec<u32>,
    dist: Vec<f64>,
    /// Cumulative region weight along the sorted order (inclusive).
    cum_w: Vec<f64>,
}

impl NeighborLists {
    pub(crate) fn build(space: &PointCloudSpace, region: Region) -> Self {
        let ids = space.ids(region);
        let n = ids.len();
        let rows: Vec<(Vec<u32>, Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row: Vec<(f64, u32)> = (0..n)
                    .map(|j| (space.dist(ids[i], ids[j]), j as u32))
                    .collect();
                row.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                let mut slots = Vec::with_capacity(n);
                let mut dists = Vec::with_capacity(n);
                let mut cums = Vec::with_capacity(n);
                let mut acc = 0.0;
                for (d, j) in row {
                    acc += space.weight(ids[j as usize]);
                    slots.push(j);
                    dists.push(d);
                    cums.push(acc);
                }
                (slots, dists, cums)
            })
            .collect();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut slot = Vec::with_capacity(n * n);
        let mut dist = Vec::with_capacity(n * n);
        let mut cum_w = Vec::with_capacity(n * n);
        for (s, d, c) in rows {
            slot.extend_from_slice(&s);
            dist.extend_from_slice(&d);
            cum_w.extend_from_slice(&c);
            offsets.push(slot.len());
        }
        NeighborLists {
            n,
            offsets,
            slot,
            dist,
            cum_w,
        }
    }

    pub fn row(&self, i: usize) -> NeighborRow<'_> {
        let r = self.offsets[i]..self.offsets[i + 1];
        NeighborRow {
            slot: &self.slot[r.clone()],
            dist: &self.dist[r.clone()],
            cum_w: &self.cum_w[r],
        }
    }
}

pub struct NeighborRow<'a> {
    pub slot: &'a [u32],
    pub dist: &'a [f64],
    pub cum_w: &'a [f64],
}

impl NeighborRow<'_> {
    /// Mass of the open ball of radius `r` around the row's point.
    pub fn open_ball_mass(&self, r: f64) -> f64 {
        let k = self.dist.partition_point(|&d| d < r);
        if k == 0 {
            0.0
        } else {
            self.cum_w[k - 1]
        }
    }

    /// Number of entries with distance strictly below `r`.
    pub fn open_ball_len(&self, r: f64) -> usize {
        self.dist.partition_point(|&d| d < r)
    }
}
