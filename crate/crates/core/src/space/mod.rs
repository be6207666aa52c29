//! Discretized metric measure spaces: weighted point clouds with an
//! interior/boundary split, ball queries and mass-profile estimators.

mod kdtree;
mod pairs;
pub mod io;

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};
use kdtree::KdTree;
pub use pairs::{NeighborLists, SortedPairs};

/// Index of a point in the cloud.
pub type PointId = usize;

/// Region a point belongs to. Interior points carry the measure `mu`,
/// boundary points carry the boundary measure `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Interior,
    Boundary,
}

impl Region {
    pub(crate) fn idx(self) -> usize {
        match self {
            Region::Interior => 0,
            Region::Boundary => 1,
        }
    }
}

/// One input point.
#[derive(Debug, Clone)]
pub struct PointRecord {
    pub coords: Vec<f64>,
    pub region: Region,
    pub weight: f64,
}

/// Distance oracle. The default is the Euclidean distance on the stored
/// coordinates; non-Euclidean spaces are supplied as an explicit matrix.
#[derive(Debug, Clone)]
pub enum MetricSpec {
    Euclidean,
    /// Row-major `n x n` distances.
    Matrix(Vec<f64>),
}

/// A ball, open by convention: membership means distance strictly below the
/// radius.
#[derive(Debug, Clone)]
pub struct Ball {
    pub center: BallCenter,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub enum BallCenter {
    Point(PointId),
    Coords(Vec<f64>),
}

impl Ball {
    pub fn at_point(id: PointId, radius: f64) -> Self {
        Ball {
            center: BallCenter::Point(id),
            radius,
        }
    }

    pub fn at_coords(coords: Vec<f64>, radius: f64) -> Self {
        Ball {
            center: BallCenter::Coords(coords),
            radius,
        }
    }
}

/// Doubling constant and lower mass-bound exponent of a region's measure.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MassExponents {
    /// Dimension exponent in `mass(B(x,r)) >= c_s r^s`.
    pub s: f64,
    pub c_s: f64,
    /// `mass(B(x,2r)) <= c_dbl mass(B(x,r))` over the probes.
    pub c_dbl: f64,
}

/// Codimension bracket of the boundary measure against the interior measure:
/// `c_vartheta mu(B)/r^vartheta <= H(B) <= c_theta mu(B)/r^theta` over the
/// probed boundary-centered balls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CodimBounds {
    pub vartheta: f64,
    pub c_vartheta: f64,
    pub theta: f64,
    pub c_theta: f64,
}

#[derive(Debug)]
pub struct PointCloudSpace {
    dim: usize,
    coords: Vec<f64>,
    region: Vec<Region>,
    weight: Vec<f64>,
    metric: MetricSpec,
    interior: Vec<PointId>,
    boundary: Vec<PointId>,
    region_pos: Vec<usize>,
    total_mass: [f64; 2],
    diam: [f64; 2],
    trees: [Option<KdTree>; 2],
    /// For interior points (aligned with `interior`): distance to the
    /// boundary point set and the nearest boundary point (lowest id on ties).
    dist_bd: Vec<f64>,
    nearest_bd: Vec<PointId>,
    shell_profile: OnceLock<(Vec<f64>, Vec<f64>)>,
    pairs_cache: [OnceLock<Arc<SortedPairs>>; 2],
    nbrs_cache: [OnceLock<Arc<NeighborLists>>; 2],
    min_spacing: [OnceLock<f64>; 2],
}

impl PointCloudSpace {
    pub fn new(records: Vec<PointRecord>, metric: MetricSpec) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InsufficientGeometry("no points".into()));
        }
        let dim = records[0].coords.len();
        if dim == 0 {
            return Err(Error::Format("points need at least one coordinate".into()));
        }
        let n = records.len();
        let mut coords = Vec::with_capacity(n * dim);
        let mut region = Vec::with_capacity(n);
        let mut weight = Vec::with_capacity(n);
        for (i, rec) in records.iter().enumerate() {
            if rec.coords.len() != dim {
                return Err(Error::Format(format!(
                    "point {i}: expected {dim} coordinates, got {}",
                    rec.coords.len()
                )));
            }
            if !(rec.weight > 0.0) || !rec.weight.is_finite() {
                return Err(Error::Format(format!(
                    "point {i}: weight must be positive and finite"
                )));
            }
            coords.extend_from_slice(&rec.coords);
            region.push(rec.region);
            weight.push(rec.weight);
        }
        if let MetricSpec::Matrix(m) = &metric {
            if m.len() != n * n {
                return Err(Error::Format(format!(
                    "distance matrix has {} entries, expected {}",
                    m.len(),
                    n * n
                )));
            }
        }
        let interior: Vec<PointId> = (0..n).filter(|&i| region[i] == Region::Interior).collect();
        let boundary: Vec<PointId> = (0..n).filter(|&i| region[i] == Region::Boundary).collect();
        let mut region_pos = vec![0usize; n];
        for (k, &id) in interior.iter().enumerate() {
            region_pos[id] = k;
        }
        for (k, &id) in boundary.iter().enumerate() {
            region_pos[id] = k;
        }
        let total_mass = [
            interior.iter().map(|&i| weight[i]).sum(),
            boundary.iter().map(|&i| weight[i]).sum(),
        ];

        let mut space = PointCloudSpace {
            dim,
            coords,
            region,
            weight,
            metric,
            interior,
            boundary,
            region_pos,
            total_mass,
            diam: [0.0; 2],
            trees: [None, None],
            dist_bd: Vec::new(),
            nearest_bd: Vec::new(),
            shell_profile: OnceLock::new(),
            pairs_cache: [OnceLock::new(), OnceLock::new()],
            nbrs_cache: [OnceLock::new(), OnceLock::new()],
            min_spacing: [OnceLock::new(), OnceLock::new()],
        };
        space.check_metric_sanity()?;
        if matches!(space.metric, MetricSpec::Euclidean) {
            space.trees = [
                Some(space.build_tree(&space.interior)),
                Some(space.build_tree(&space.boundary)),
            ];
        }
        space.diam = [
            space.exact_diameter(Region::Interior),
            space.exact_diameter(Region::Boundary),
        ];
        space.index_boundary_distances();
        Ok(space)
    }

    fn build_tree(&self, ids: &[PointId]) -> KdTree {
        let mut c = Vec::with_capacity(ids.len() * self.dim);
        for &id in ids {
            c.extend_from_slice(self.point(id));
        }
        KdTree::build(self.dim, ids.to_vec(), c)
    }

    /// Symmetry, zero-diagonal and triangle inequality on sampled triples;
    /// only matrix oracles can violate these.
    fn check_metric_sanity(&self) -> Result<()> {
        let MetricSpec::Matrix(m) = &self.metric else {
            return Ok(());
        };
        let n = self.n_points();
        for i in 0..n {
            if m[i * n + i] != 0.0 {
                return Err(Error::Format(format!("distance matrix: d({i},{i}) != 0")));
            }
        }
        let step = (n / 64).max(1);
        let sample: Vec<usize> = (0..n).step_by(step).collect();
        for &i in &sample {
            for &j in &sample {
                if (m[i * n + j] - m[j * n + i]).abs() > 1e-12 {
                    return Err(Error::Format(format!("distance matrix not symmetric at ({i},{j})")));
                }
                if i != j && m[i * n + j] <= 0.0 {
                    return Err(Error::Format(format!("distance matrix: d({i},{j}) <= 0")));
                }
                for &k in sample.iter().take(8) {
                    if m[i * n + j] > m[i * n + k] + m[k * n + j] + 1e-9 {
                        return Err(Error::Format(format!(
                            "distance matrix violates the triangle inequality on ({i},{k},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn exact_diameter(&self, region: Region) -> f64 {
        let ids = self.ids(region);
        if ids.len() < 2 {
            return 0.0;
        }
        match &self.metric {
            MetricSpec::Euclidean if self.dim == 2 => {
                // Diameter of the point set equals the diameter of its convex
                // hull vertices; the hull is small for our domains.
                let hull = convex_hull_2d(ids, |id| {
                    let p = self.point(id);
                    (p[0], p[1])
                });
                let mut best = 0.0f64;
                for a in 0..hull.len() {
                    for b in (a + 1)..hull.len() {
                        best = best.max(self.dist(hull[a], hull[b]));
                    }
                }
                best
            }
            _ => {
                let mut best = 0.0f64;
                for a in 0..ids.len() {
                    for b in (a + 1)..ids.len() {
                        best = best.max(self.dist(ids[a], ids[b]));
                    }
                }
                best
            }
        }
    }

    fn index_boundary_distances(&mut self) {
        let mut dist_bd = Vec::with_capacity(self.interior.len());
        let mut nearest_bd = Vec::with_capacity(self.interior.len());
        for &id in &self.interior {
            match self.nearest_in_region(id, Region::Boundary) {
                Some((nb, d)) => {
                    dist_bd.push(d);
                    nearest_bd.push(nb);
                }
                None => {
                    dist_bd.push(f64::INFINITY);
                    nearest_bd.push(usize::MAX);
                }
            }
        }
        self.dist_bd = dist_bd;
        self.nearest_bd = nearest_bd;
    }

    pub fn n_points(&self) -> usize {
        self.region.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, id: PointId) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn region_of(&self, id: PointId) -> Region {
        self.region[id]
    }

    pub fn weight(&self, id: PointId) -> f64 {
        self.weight[id]
    }

    pub fn ids(&self, region: Region) -> &[PointId] {
        match region {
            Region::Interior => &self.interior,
            Region::Boundary => &self.boundary,
        }
    }

    /// Position of `id` within its region's id list.
    pub fn region_slot(&self, id: PointId) -> usize {
        self.region_pos[id]
    }

    pub fn total_mass(&self, region: Region) -> f64 {
        self.total_mass[region.idx()]
    }

    /// Exact max pairwise distance within the region.
    pub fn diam(&self, region: Region) -> f64 {
        self.diam[region.idx()]
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    pub fn dist(&self, i: PointId, j: PointId) -> f64 {
        match &self.metric {
            MetricSpec::Euclidean => euclid(self.point(i), self.point(j)),
            MetricSpec::Matrix(m) => m[i * self.n_points() + j],
        }
    }

    /// Distance from a point to free coordinates (Euclidean oracles only).
    pub fn dist_to_coords(&self, id: PointId, coords: &[f64]) -> Result<f64> {
        match &self.metric {
            MetricSpec::Euclidean => Ok(euclid(self.point(id), coords)),
            MetricSpec::Matrix(_) => Err(Error::InvalidParameter(
                "coordinate ball centers need the Euclidean metric".into(),
            )),
        }
    }

    /// Distance from an interior point to the boundary point set.
    pub fn dist_to_boundary(&self, id: PointId) -> f64 {
        debug_assert_eq!(self.region[id], Region::Interior);
        self.dist_bd[self.region_pos[id]]
    }

    /// Nearest boundary point to an interior point (lowest id on ties).
    pub fn nearest_boundary(&self, id: PointId) -> PointId {
        debug_assert_eq!(self.region[id], Region::Interior);
        self.nearest_bd[self.region_pos[id]]
    }

    pub fn nearest_in_region(&self, id: PointId, region: Region) -> Option<(PointId, f64)> {
        let ids = self.ids(region);
        if ids.is_empty() {
            return None;
        }
        match (&self.metric, &self.trees[region.idx()]) {
            (MetricSpec::Euclidean, Some(tree)) => {
                let q = self.point(id);
                tree.nearest(q, &|cand| self.dist(id, cand))
            }
            _ => {
                let mut best: Option<(PointId, f64)> = None;
                for &cand in ids {
                    let d = self.dist(id, cand);
                    let better = match best {
                        None => true,
                        Some((bid, bd)) => d < bd || (d == bd && cand < bid),
                    };
                    if better {
                        best = Some((cand, d));
                    }
                }
                best
            }
        }
    }

    /// Smallest nearest-neighbor distance within the region.
    pub fn min_spacing(&self, region: Region) -> f64 {
        *self.min_spacing[region.idx()].get_or_init(|| {
            let ids = self.ids(region);
            if ids.len() < 2 {
                return f64::INFINITY;
            }
            match (&self.metric, &self.trees[region.idx()]) {
                (MetricSpec::Euclidean, Some(tree)) => ids
                    .iter()
                    .map(|&id| {
                        let q = self.point(id);
                        tree.nearest(q, &|cand| {
                            if cand == id {
                                f64::INFINITY
                            } else {
                                self.dist(id, cand)
                            }
                        })
                        .map(|(_, d)| d)
                        .unwrap_or(f64::INFINITY)
                    })
                    .fold(f64::INFINITY, f64::min),
                _ => {
                    let mut best = f64::INFINITY;
                    for a in 0..ids.len() {
                        for b in (a + 1)..ids.len() {
                            best = best.min(self.dist(ids[a], ids[b]));
                        }
                    }
                    best
                }
            }
        })
    }

    /// Pair list of a region sorted by distance; built once, shared.
    pub fn sorted_pairs(&self, region: Region) -> Arc<SortedPairs> {
        self.pairs_cache[region.idx()]
            .get_or_init(|| Arc::new(SortedPairs::build(self, region)))
            .clone()
    }

    /// Per-point neighbor lists of a region sorted by distance.
    pub fn neighbor_lists(&self, region: Region) -> Arc<NeighborLists> {
        self.nbrs_cache[region.idx()]
            .get_or_init(|| Arc::new(NeighborLists::build(self, region)))
            .clone()
    }

    fn resolve_center<'a>(&self, ball: &'a Ball) -> Result<CenterRef<'a>> {
        match &ball.center {
            BallCenter::Point(id) => {
                if *id >= self.n_points() {
                    return Err(Error::NoSuchPoint(*id));
                }
                Ok(CenterRef::Point(*id))
            }
            BallCenter::Coords(c) => {
                if c.len() != self.dim {
                    return Err(Error::InvalidParameter(format!(
                        "ball center has {} coordinates, space has {}",
                        c.len(),
                        self.dim
                    )));
                }
                if matches!(self.metric, MetricSpec::Matrix(_)) {
                    return Err(Error::InvalidParameter(
                        "coordinate ball centers need the Euclidean metric".into(),
                    ));
                }
                Ok(CenterRef::Coords(c))
            }
        }
    }

    fn center_dist(&self, center: &CenterRef<'_>, id: PointId) -> f64 {
        match center {
            CenterRef::Point(c) => self.dist(*c, id),
            CenterRef::Coords(c) => euclid(self.point(id), c),
        }
    }
}

enum CenterRef<'a> {
    Point(PointId),
    Coords(&'a [f64]),
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s.sqrt()
}

/// Andrew monotone chain; strict turns, so collinear points are dropped.
fn convex_hull_2d(ids: &[PointId], xy: impl Fn(PointId) -> (f64, f64)) -> Vec<PointId> {
    let mut pts: Vec<PointId> = ids.to_vec();
    pts.sort_unstable_by(|&a, &b| {
        let (ax, ay) = xy(a);
        let (bx, by) = xy(b);
        ax.total_cmp(&bx).then(ay.total_cmp(&by))
    });
    pts.dedup_by(|a, b| xy(*a) == xy(*b));
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: PointId, a: PointId, b: PointId| {
        let (ox, oy) = xy(o);
        let (ax, ay) = xy(a);
        let (bx, by) = xy(b);
        (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)
    };
    let mut hull: Vec<PointId> = Vec::new();
    for &p in pts.iter().chain(pts.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() < 2 {
        // Collinear input: the lexicographic extremes realize the diameter.
        return vec![pts[0], pts[pts.len() - 1]];
    }
    hull
}

/// Points of `region` at distance strictly less than the radius from the
/// ball's center, in increasing id order.
pub fn ball_members(space: &PointCloudSpace, ball: &Ball, region: Region) -> Result<Vec<PointId>> {
    if !(ball.radius > 0.0) {
        return Err(Error::InvalidParameter("ball radius must be positive".into()));
    }
    let center = space.resolve_center(ball)?;
    match (&space.metric, &space.trees[region.idx()]) {
        (MetricSpec::Euclidean, Some(tree)) => {
            let q: Vec<f64> = match &center {
                CenterRef::Point(id) => space.point(*id).to_vec(),
                CenterRef::Coords(c) => c.to_vec(),
            };
            Ok(tree.query_radius(&q, ball.radius, &|id| space.center_dist(&center, id)))
        }
        _ => Ok(space
            .ids(region)
            .iter()
            .copied()
            .filter(|&id| space.center_dist(&center, id) < ball.radius)
            .collect()),
    }
}

/// Mass of `B cap region`: the sum of the region weights over
/// [`ball_members`]. Zero for an empty intersection.
pub fn ball_mass(space: &PointCloudSpace, ball: &Ball, region: Region) -> Result<f64> {
    Ok(ball_members(space, ball, region)?
        .iter()
        .map(|&id| space.weight(id))
        .sum())
}

/// `mu`-mass of the interior points within distance `rho` of the boundary
/// point set.
pub fn shell_mass(space: &PointCloudSpace, rho: f64) -> f64 {
    let (dists, cum) = space.shell_profile.get_or_init(|| {
        let mut order: Vec<usize> = (0..space.interior.len()).collect();
        order.sort_unstable_by(|&a, &b| space.dist_bd[a].total_cmp(&space.dist_bd[b]));
        let dists: Vec<f64> = order.iter().map(|&k| space.dist_bd[k]).collect();
        let mut cum = Vec::with_capacity(order.len());
        let mut acc = 0.0;
        for &k in &order {
            acc += space.weight(space.interior[k]);
            cum.push(acc);
        }
        (dists, cum)
    });
    let k = dists.partition_point(|&d| d < rho);
    if k == 0 {
        0.0
    } else {
        cum[k - 1]
    }
}

/// Geometric radius schedule over the resolvable scaling window: from four
/// grid spacings up to a quarter of the region diameter. Radii below the
/// spacing see quantization, radii near the diameter see saturation; both
/// corrupt exponent fits. The floor takes the coarser of the two regions'
/// spacings, since codimension probes relate the masses of both.
pub fn default_probe_schedule(space: &PointCloudSpace, region: Region) -> Vec<f64> {
    let diam = space.diam(region);
    let mut spacing = space.min_spacing(region);
    for other in [Region::Interior, Region::Boundary] {
        let s = space.min_spacing(other);
        if s.is_finite() {
            spacing = if spacing.is_finite() { spacing.max(s) } else { s };
        }
    }
    let lo = (4.0 * spacing).min(diam / 8.0);
    let hi = (diam / 4.0).max(lo * 1.5);
    let steps = 12usize;
    (0..=steps)
        .map(|k| lo * (hi / lo).powf(k as f64 / steps as f64))
        .collect()
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn probe_centers(ids: &[PointId], cap: usize) -> Vec<PointId> {
    if ids.len() <= cap {
        return ids.to_vec();
    }
    let step = ids.len().div_ceil(cap);
    ids.iter().copied().step_by(step).collect()
}

/// Lower mass-bound exponent and doubling constant of a region's measure,
/// probed on balls centered at a closure sample.
///
/// The exponent starts from a pooled log-log regression of mass against
/// radius and is then raised until every probe satisfies
/// `mass(B(x,r)) >= c_s r^s` with the scale-free normalization
/// `c_s = mass(region)/(2 diam)^s`; the reported constants are re-checked
/// against all probes before returning.
pub fn estimate_mass_exponents(
    space: &PointCloudSpace,
    region: Region,
    probe_schedule: &[f64],
) -> Result<MassExponents> {
    if probe_schedule.is_empty() {
        return Err(Error::InvalidParameter("empty probe schedule".into()));
    }
    let diam = space.diam(region);
    if space.ids(region).len() < 4 || diam <= 0.0 {
        return Err(Error::InsufficientGeometry(
            "mass exponent estimation needs at least 4 points with positive diameter".into(),
        ));
    }
    let mut centers = probe_centers(space.ids(Region::Interior), 128);
    centers.extend(probe_centers(space.ids(Region::Boundary), 128));
    if region == Region::Boundary {
        centers = probe_centers(space.ids(Region::Boundary), 256);
    }

    let mut probes: Vec<(f64, f64)> = Vec::new(); // (r, mass)
    let mut c_dbl = 1.0f64;
    for &x in &centers {
        for &r in probe_schedule {
            if !(r > 0.0) || r > 2.0 * diam {
                continue;
            }
            let m = ball_mass(space, &Ball::at_point(x, r), region)?;
            if m <= 0.0 {
                continue;
            }
            probes.push((r, m));
            let m2 = ball_mass(space, &Ball::at_point(x, 2.0 * r), region)?;
            if m2 > 0.0 {
                c_dbl = c_dbl.max(m2 / m);
            }
        }
    }
    if probes.len() < 2 {
        return Err(Error::InsufficientGeometry(
            "no resolvable probes for the mass profile".into(),
        ));
    }
    let xs: Vec<f64> = probes.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = probes.iter().map(|p| p.1.ln()).collect();
    let s_fit = ols_slope(&xs, &ys).max(0.0);
    let total = space.total_mass(region);
    let big = 2.0 * diam;
    // Smallest s >= s_fit with mass >= (total/big^s) r^s on every probe.
    let mut s_req = 0.0f64;
    for &(r, m) in &probes {
        if r < big {
            let need = (total.ln() - m.ln()) / (big.ln() - r.ln());
            s_req = s_req.max(need);
        }
    }
    let s = s_fit.max(s_req);
    let c_s = total / big.powf(s);
    for &(r, m) in &probes {
        debug_assert!(m >= c_s * r.powf(s) * (1.0 - 1e-9));
    }
    Ok(MassExponents { s, c_s, c_dbl })
}

/// Codimension bracket of the boundary measure, probed on boundary-centered
/// balls.
///
/// Writing `q(x, r) = mu(B(x,r))/H(B(x,r))`, a lower exponent admits a
/// positive constant over all probes iff `r^vartheta / max_x q(x,r)` stays
/// bounded below as `r` shrinks, and an upper exponent admits a finite
/// constant iff `r^theta / min_x q(x,r)` stays bounded above. The bracket
/// therefore fits the envelope slopes of `q` and snaps them to a 0.05 grid
/// (largest admissible lower exponent, smallest admissible upper exponent);
/// the stored constants are the extremal probe ratios.
pub fn estimate_codim_bounds(
    space: &PointCloudSpace,
    probe_schedule: &[f64],
) -> Result<CodimBounds> {
    if space.ids(Region::Boundary).is_empty() {
        return Err(Error::EmptyBoundary);
    }
    if space.ids(Region::Interior).is_empty() {
        return Err(Error::EmptyInterior);
    }
    if probe_schedule.is_empty() {
        return Err(Error::InvalidParameter("empty probe schedule".into()));
    }
    let diam_bd = space.diam(Region::Boundary);
    let centers = {
        let mut c = probe_centers(space.ids(Region::Boundary), 192);
        // Extremal coordinates catch distinguished points such as cusp tips.
        for axis in 0..space.dim() {
            for pick_min in [true, false] {
                let id = space
                    .ids(Region::Boundary)
                    .iter()
                    .copied()
                    .min_by(|&a, &b| {
                        let (pa, pb) = (space.point(a)[axis], space.point(b)[axis]);
                        if pick_min { pa.total_cmp(&pb) } else { pb.total_cmp(&pa) }
                    })
                    .unwrap();
                c.push(id);
            }
        }
        c.sort_unstable();
        c.dedup();
        c
    };

    let mut probes: Vec<(f64, f64)> = Vec::new(); // (r, q = mu/H)
    let mut env: Vec<(f64, f64, f64, usize)> = Vec::new(); // (r, qmin, qmax, resolved)
    let mut active = 0usize;
    for &r in probe_schedule {
        if !(r > 0.0) || r >= 2.0 * diam_bd {
            continue;
        }
        let mut qmin = f64::INFINITY;
        let mut qmax = 0.0f64;
        let mut resolved = 0usize;
        for &z in &centers {
            let int_members = ball_members(space, &Ball::at_point(z, r), Region::Interior)?;
            if int_members.len() < 4 {
                // One or two grid cells cannot resolve a mass ratio.
                continue;
            }
            let mu: f64 = int_members.iter().map(|&id| space.weight(id)).sum();
            let h = ball_mass(space, &Ball::at_point(z, r), Region::Boundary)?;
            if mu <= 0.0 || h <= 0.0 {
                continue;
            }
            let q = mu / h;
            qmin = qmin.min(q);
            qmax = qmax.max(q);
            resolved += 1;
            probes.push((r, q));
        }
        if qmax > 0.0 {
            env.push((r, qmin, qmax, resolved));
            active = active.max(resolved);
        }
    }
    if env.len() < 2 {
        return Err(Error::InsufficientGeometry(
            "fewer than two resolvable probe radii".into(),
        ));
    }
    // Fit envelope slopes only over radii at which every active center
    // resolves; below that the minimum envelope mixes geometric regimes with
    // quantization dropouts.
    let full: Vec<&(f64, f64, f64, usize)> =
        env.iter().filter(|e| e.3 == active).collect();
    let fit = if full.len() >= 2 { full } else { env.iter().collect() };
    let xs: Vec<f64> = fit.iter().map(|e| e.0.ln()).collect();
    let lo_env: Vec<f64> = fit.iter().map(|e| e.1.ln()).collect();
    let hi_env: Vec<f64> = fit.iter().map(|e| e.2.ln()).collect();
    let kappa_hi = ols_slope(&xs, &hi_env); // admissibility ceiling for vartheta
    let kappa_lo = ols_slope(&xs, &lo_env); // admissibility floor for theta
    let grid = 0.05;
    let mut vartheta = (((kappa_hi + grid / 2.0) / grid).floor() * grid).max(grid);
    let theta = (((kappa_lo - grid / 2.0) / grid).ceil() * grid).max(vartheta);
    vartheta = vartheta.min(theta);
    let mut c_vartheta = f64::INFINITY;
    let mut c_theta = 0.0f64;
    for &(r, q) in &probes {
        c_vartheta = c_vartheta.min(r.powf(vartheta) / q);
        c_theta = c_theta.max(r.powf(theta) / q);
    }
    Ok(CodimBounds {
        vartheta,
        c_vartheta,
        theta,
        c_theta,
    })
}

/// Greedy upper estimate of the codimension-`theta` Hausdorff measure of a
/// boundary subset: repeatedly pick the farthest-from-covered point and
/// cover it with the cheapest admissible ball from a dyadic radius menu.
/// The result over-estimates the true infimum by construction.
pub fn codim_hausdorff(
    space: &PointCloudSpace,
    subset: &[PointId],
    theta: f64,
    delta: f64,
) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("empty subset".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    for &id in subset {
        if id >= space.n_points() || space.region_of(id) != Region::Boundary {
            return Err(Error::NoSuchPoint(id));
        }
    }
    // Minimal spacing within the subset (infinite for singletons, which any
    // single ball resolves).
    let mut spacing = f64::INFINITY;
    for a in 0..subset.len() {
        for b in (a + 1)..subset.len() {
            spacing = spacing.min(space.dist(subset[a], subset[b]));
        }
    }
    if spacing.is_finite() && delta < spacing {
        return Err(Error::UnresolvableScale { delta, spacing });
    }

    // Dyadic radius menu below delta (open covers need radius < delta).
    let floor = if spacing.is_finite() { spacing } else { delta / 16.0 };
    let mut menu = Vec::new();
    let mut r = delta * 0.5;
    while r >= floor / 2.0 && menu.len() < 24 {
        menu.push(r);
        r *= 0.5;
    }
    if menu.is_empty() {
        menu.push(delta * 0.5);
    }

    let centroid: Vec<f64> = {
        let mut c = vec![0.0; space.dim()];
        for &id in subset {
            for (k, v) in space.point(id).iter().enumerate() {
                c[k] += v / subset.len() as f64;
            }
        }
        c
    };

    let mut uncovered: Vec<PointId> = subset.to_vec();
    let mut chosen_centers: Vec<PointId> = Vec::new();
    let mut total = 0.0f64;
    while !uncovered.is_empty() {
        // Farthest-first: max distance to the chosen centers (to the subset
        // centroid for the first pick), ties towards the lowest id.
        let z = *uncovered
            .iter()
            .max_by(|&&a, &&b| {
                let da = farness(space, a, &chosen_centers, &centroid);
                let db = farness(space, b, &chosen_centers, &centroid);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap();
        // Cheapest admissible ball per newly covered point. Balls whose
        // interior intersection is empty sit below the resolution of the
        // discretized measure and are used only as a last resort.
        let mut best: Option<(f64, f64, f64)> = None; // (score, cost, radius)
        let mut fallback = menu[menu.len() - 1];
        for &r in &menu {
            let covered = uncovered
                .iter()
                .filter(|&&id| space.dist(z, id) < r)
                .count()
                .max(1);
            let mu = ball_mass(space, &Ball::at_point(z, r), Region::Interior)?;
            if mu <= 0.0 {
                fallback = fallback.min(r);
                continue;
            }
            let cost = mu / r.powf(theta);
            let score = cost / covered as f64;
            if best.map(|(s, _, _)| score < s).unwrap_or(true) {
                best = Some((score, cost, r));
            }
        }
        let (_, cost, r) = best.unwrap_or((0.0, 0.0, fallback));
        total += cost;
        chosen_centers.push(z);
        uncovered.retain(|&id| space.dist(z, id) >= r);
    }
    Ok(total)
}

fn farness(space: &PointCloudSpace, id: PointId, centers: &[PointId], centroid: &[f64]) -> f64 {
    if centers.is_empty() {
        match space.metric() {
            MetricSpec::Euclidean => euclid(space.point(id), centroid),
            // Matrix metric has no centroid; fall back to the id order.
            MetricSpec::Matrix(_) => -(id as f64),
        }
    } else {
        centers
            .iter()
            .map(|&c| space.dist(c, id))
            .fold(f64::INFINITY, f64::min)
    }
}
