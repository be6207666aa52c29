//! Whitney-type covers of the interior: balls with radius one eighth of the
//! distance to the boundary set, organized in dyadic levels, each carrying a
//! nearest boundary anchor, plus a tent-function partition of unity.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::space::{ball_members, Ball, PointCloudSpace, PointId, Region};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitneyBall {
    pub center: PointId,
    pub radius: f64,
    pub level: i32,
    pub anchor: PointId,
}

#[derive(Debug)]
pub struct WhitneyCover {
    pub balls: Vec<WhitneyBall>,
    pub j0: i32,
    /// Measured: max over interior points of the number of doubled balls
    /// containing it.
    pub overlap_bound: usize,
    /// Ball indices whose doubled ball contains the interior point, per
    /// interior slot.
    support: Vec<Vec<u32>>,
    /// Boundary patch at expansion 1 per ball.
    patches1: Vec<Vec<PointId>>,
}

fn level_of(radius: f64) -> i32 {
    let mut j = radius.log2().ceil() as i32;
    while exp2i(j - 1) >= radius {
        j -= 1;
    }
    while radius > exp2i(j) {
        j += 1;
    }
    j
}

fn exp2i(j: i32) -> f64 {
    (2.0f64).powi(j)
}

/// Greedy per-level construction: levels are processed from the coarsest
/// down; within a level, a point spawns a ball unless an earlier ball of the
/// same level already covers it. Every interior point therefore ends up in
/// some ball of its own level.
pub fn build_cover(space: &PointCloudSpace) -> Result<WhitneyCover> {
    let interior = space.ids(Region::Interior);
    if interior.is_empty() {
        return Err(Error::EmptyInterior);
    }
    if space.ids(Region::Boundary).is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let mut by_level: BTreeMap<i32, Vec<PointId>> = BTreeMap::new();
    for &id in interior {
        let d = space.dist_to_boundary(id);
        if d <= 0.0 {
            return Err(Error::ZeroDistanceToBoundary(id));
        }
        by_level.entry(level_of(d / 8.0)).or_default().push(id);
    }
    let j0 = *by_level.keys().next_back().unwrap();

    let mut balls = Vec::new();
    for (&level, pts) in by_level.iter().rev() {
        let mut selected: Vec<(PointId, f64)> = Vec::new();
        for &p in pts {
            let covered = selected
                .iter()
                .any(|&(c, r)| space.dist(p, c) < r);
            if !covered {
                let radius = space.dist_to_boundary(p) / 8.0;
                selected.push((p, radius));
                balls.push(WhitneyBall {
                    center: p,
                    radius,
                    level,
                    anchor: space.nearest_boundary(p),
                });
            }
        }
    }

    let (support, overlap_bound) = index_support(space, &balls)?;
    let patches1 = index_patches(space, &balls)?;
    Ok(WhitneyCover {
        balls,
        j0,
        overlap_bound,
        support,
        patches1,
    })
}

fn index_support(
    space: &PointCloudSpace,
    balls: &[WhitneyBall],
) -> Result<(Vec<Vec<u32>>, usize)> {
    let n = space.ids(Region::Interior).len();
    let mut support: Vec<Vec<u32>> = vec![Vec::new(); n];
    let members: Vec<Vec<PointId>> = balls
        .par_iter()
        .map(|b| {
            ball_members(
                space,
                &Ball::at_point(b.center, 2.0 * b.radius),
                Region::Interior,
            )
            .expect("cover ball")
        })
        .collect();
    for (bi, ids) in members.iter().enumerate() {
        for &id in ids {
            support[space.region_slot(id)].push(bi as u32);
        }
    }
    let overlap = support.iter().map(Vec::len).max().unwrap_or(0);
    Ok((support, overlap))
}

fn index_patches(space: &PointCloudSpace, balls: &[WhitneyBall]) -> Result<Vec<Vec<PointId>>> {
    balls
        .par_iter()
        .map(|b| {
            let patch = ball_members(
                space,
                &Ball::at_point(b.anchor, b.radius),
                Region::Boundary,
            )?;
            if patch.is_empty() {
                return Err(Error::EmptyBoundaryPatch);
            }
            Ok(patch)
        })
        .collect()
}

impl WhitneyCover {
    pub fn n_balls(&self) -> usize {
        self.balls.len()
    }

    /// Ball indices whose doubled ball contains the interior point `x`.
    pub fn support_of(&self, space: &PointCloudSpace, x: PointId) -> &[u32] {
        &self.support[space.region_slot(x)]
    }

    /// Boundary patch of a ball at expansion 1 (precomputed).
    pub fn patch1(&self, ball: usize) -> &[PointId] {
        &self.patches1[ball]
    }
}

/// Tent weights of the partition of unity at an interior point: the tents
/// `clamp((2r - d)/r, 0, 1)` over all balls whose doubled ball contains the
/// point, normalized to unit sum. Returns `(ball index, weight)` pairs.
pub fn partition_of_unity(
    space: &PointCloudSpace,
    cover: &WhitneyCover,
    x: PointId,
) -> Result<Vec<(usize, f64)>> {
    if space.region_of(x) != Region::Interior {
        return Err(Error::InvalidParameter("partition is defined on the interior".into()));
    }
    let mut weights: Vec<(usize, f64)> = Vec::new();
    let mut sum = 0.0;
    for &bi in cover.support_of(space, x) {
        let b = &cover.balls[bi as usize];
        let d = space.dist(x, b.center);
        let tent = ((2.0 * b.radius - d) / b.radius).clamp(0.0, 1.0);
        if tent > 0.0 {
            weights.push((bi as usize, tent));
            sum += tent;
        }
    }
    if sum <= 0.0 {
        // Cannot happen for a cover satisfying its invariants.
        return Err(Error::InvalidParameter(format!("point {x} is not covered")));
    }
    for w in &mut weights {
        w.1 /= sum;
    }
    Ok(weights)
}

/// Boundary points within `expansion * radius` of the ball's anchor.
/// Expansion 1 is the patch averaged by the extension; 64 is the expanded
/// patch used by the oscillation estimates.
pub fn boundary_patch(
    space: &PointCloudSpace,
    cover: &WhitneyCover,
    ball: usize,
    expansion: f64,
) -> Result<Vec<PointId>> {
    if !(expansion == 1.0 || expansion == 64.0) {
        return Err(Error::InvalidParameter("expansion must be 1 or 64".into()));
    }
    let b = cover
        .balls
        .get(ball)
        .ok_or(Error::InvalidParameter(format!("no ball {ball}")))?;
    if expansion == 1.0 {
        return Ok(cover.patch1(ball).to_vec());
    }
    let patch = ball_members(
        space,
        &Ball::at_point(b.anchor, expansion * b.radius),
        Region::Boundary,
    )?;
    if patch.is_empty() {
        return Err(Error::EmptyBoundaryPatch);
    }
    Ok(patch)
}

/// Independent checker report; `violations` is empty iff every cover
/// invariant holds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverCheck {
    pub n_balls: usize,
    pub max_overlap: usize,
    pub max_radius_rel_err: f64,
    pub max_partition_deviation: f64,
    pub violations: Vec<String>,
}

/// Re-verifies every invariant from the ball records alone, without trusting
/// the builder's bookkeeping: radii against brute-force boundary distances,
/// level bounds, coverage, overlap, anchor minimality, level disjointness two
/// levels apart, and partition sums.
pub fn check_cover(space: &PointCloudSpace, cover: &WhitneyCover) -> Result<CoverCheck> {
    let mut violations = Vec::new();
    let boundary = space.ids(Region::Boundary);
    let interior = space.ids(Region::Interior);

    // Radii, levels and anchors, against a linear scan over the boundary.
    let radius_errs: Vec<(f64, Option<String>)> = cover
        .balls
        .par_iter()
        .enumerate()
        .map(|(bi, b)| {
            let mut best = (f64::INFINITY, usize::MAX);
            for &q in boundary {
                let d = space.dist(b.center, q);
                if d < best.0 || (d == best.0 && q < best.1) {
                    best = (d, q);
                }
            }
            let want = best.0 / 8.0;
            let rel = (b.radius - want).abs() / want;
            let mut v = None;
            if rel > 1e-12 {
                v = Some(format!("ball {bi}: radius {} != dist/8 {}", b.radius, want));
            } else if !(exp2i(b.level - 1) < b.radius && b.radius <= exp2i(b.level)) {
                v = Some(format!("ball {bi}: radius outside its level bracket"));
            } else if b.anchor != best.1 {
                v = Some(format!("ball {bi}: anchor {} is not the nearest boundary point {}", b.anchor, best.1));
            }
            (rel, v)
        })
        .collect();
    let max_radius_rel_err = radius_errs.iter().fold(0.0f64, |a, (r, _)| a.max(*r));
    violations.extend(radius_errs.into_iter().filter_map(|(_, v)| v));

    // Coverage and overlap, recounted from scratch.
    let mut covered = vec![false; interior.len()];
    let mut overlap = vec![0usize; interior.len()];
    let mut tent_sum = vec![0.0f64; interior.len()];
    let doubled: Vec<Vec<PointId>> = cover
        .balls
        .par_iter()
        .map(|b| {
            ball_members(space, &Ball::at_point(b.center, 2.0 * b.radius), Region::Interior)
                .expect("cover ball")
        })
        .collect();
    for b in &cover.balls {
        for id in ball_members(space, &Ball::at_point(b.center, b.radius), Region::Interior)? {
            covered[space.region_slot(id)] = true;
        }
    }
    for (b, ids) in cover.balls.iter().zip(&doubled) {
        for &id in ids {
            let slot = space.region_slot(id);
            overlap[slot] += 1;
            let d = space.dist(id, b.center);
            tent_sum[slot] += ((2.0 * b.radius - d) / b.radius).clamp(0.0, 1.0);
        }
    }
    if let Some(k) = covered.iter().position(|&c| !c) {
        violations.push(format!("interior point {} is uncovered", interior[k]));
    }
    let max_overlap = overlap.iter().copied().max().unwrap_or(0);
    if max_overlap > cover.overlap_bound {
        violations.push(format!(
            "overlap {} exceeds the recorded bound {}",
            max_overlap, cover.overlap_bound
        ));
    }

    // Partition sums recomputed from the tent definition alone.
    let mut part_total = vec![0.0f64; interior.len()];
    for (b, ids) in cover.balls.iter().zip(&doubled) {
        for &id in ids {
            let slot = space.region_slot(id);
            if tent_sum[slot] > 0.0 {
                let d = space.dist(id, b.center);
                part_total[slot] +=
                    ((2.0 * b.radius - d) / b.radius).clamp(0.0, 1.0) / tent_sum[slot];
            }
        }
    }
    let mut max_partition_deviation = 0.0f64;
    for (slot, &s) in tent_sum.iter().enumerate() {
        if s <= 0.0 {
            violations.push(format!(
                "interior point {} has empty partition support",
                interior[slot]
            ));
            continue;
        }
        max_partition_deviation = max_partition_deviation.max((part_total[slot] - 1.0).abs());
    }
    if max_partition_deviation > 1e-12 {
        violations.push(format!(
            "partition sums deviate from 1 by {max_partition_deviation}"
        ));
    }

    // No ball of level j may intersect one of level j+2.
    let mut by_level: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (bi, b) in cover.balls.iter().enumerate() {
        by_level.entry(b.level).or_default().push(bi);
    }
    for (&j, low) in &by_level {
        if let Some(high) = by_level.get(&(j + 2)) {
            for &a in low {
                for &b in high {
                    let (ba, bb) = (&cover.balls[a], &cover.balls[b]);
                    let d = space.dist(ba.center, bb.center);
                    if d < ba.radius + bb.radius {
                        violations.push(format!(
                            "balls {a} (level {j}) and {b} (level {}) intersect",
                            j + 2
                        ));
                    }
                }
            }
        }
    }

    Ok(CoverCheck {
        n_balls: cover.balls.len(),
        max_overlap,
        max_radius_rel_err,
        max_partition_deviation,
        violations,
    })
}

/// Serialized form of a cover.
#[derive(Debug, Serialize, Deserialize)]
pub struct CoverFile {
    pub schema: u32,
    pub j0: i32,
    pub overlap_bound: usize,
    pub balls: Vec<WhitneyBall>,
}

pub fn save_cover(cover: &WhitneyCover, path: &std::path::Path) -> Result<()> {
    let file = CoverFile {
        schema: 1,
        j0: cover.j0,
        overlap_bound: cover.overlap_bound,
        balls: cover.balls.clone(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn load_cover(space: &PointCloudSpace, path: &std::path::Path) -> Result<WhitneyCover> {
    let file: CoverFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if file.schema != 1 {
        return Err(Error::Format(format!("unsupported cover schema {}", file.schema)));
    }
    let (support, overlap) = index_support(space, &file.balls)?;
    let patches1 = index_patches(space, &file.balls)?;
    Ok(WhitneyCover {
        balls: file.balls,
        j0: file.j0,
        overlap_bound: overlap.max(file.overlap_bound),
        support,
        patches1,
    })
}
