//! Example domain generators and John/uniform geometry: interior grids with
//! density weights, arclength-sampled boundaries, graph-based curve checks
//! and the chain/carrot construction between boundary points.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::space::{ball_members, Ball, MetricSpec, PointCloudSpace, PointId, PointRecord, Region};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    /// Region under the parabola: `0 < y < x^2 < x`, Lebesgue weights.
    CuspParabola,
    /// Unit square with density `|x|`.
    WeightedSquare,
    /// Unit disc with density `dist(x, boundary)`; `eps` parametrizes the
    /// fields run on it, not the geometry.
    WeightedDisc { eps: f64 },
    /// Unit disc with density `dist^(n-1)`, the sharpness example.
    SharpnessDisc { n: u32, eps: f64 },
    /// Unit square with Lebesgue weights.
    UnitSquareLebesgue,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// Grid points per unit length.
    pub resolution: u32,
    /// Boundary samples per unit arclength.
    pub boundary_resolution: u32,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, resolution: u32) -> Self {
        DomainSpec {
            kind,
            resolution,
            boundary_resolution: resolution,
        }
    }
}

/// Interior points on a grid restricted to the domain with cell-area times
/// density weights; boundary points sampled by arclength with 1-D Hausdorff
/// weights. Deterministic for a given spec.
pub fn generate(spec: &DomainSpec) -> Result<PointCloudSpace> {
    if spec.resolution < 8 {
        return Err(Error::ResolutionTooLow(format!(
            "resolution {} below 8",
            spec.resolution
        )));
    }
    if spec.boundary_resolution < 8 {
        return Err(Error::ResolutionTooLow("boundary resolution below 8".into()));
    }
    let res = spec.resolution as usize;
    let bres = spec.boundary_resolution as f64;
    let cell = 1.0 / res as f64;
    let area = cell * cell;
    let mut records = Vec::new();

    match spec.kind {
        DomainKind::UnitSquareLebesgue | DomainKind::WeightedSquare => {
            for i in 0..res {
                for j in 0..res {
                    let x = (i as f64 + 0.5) * cell;
                    let y = (j as f64 + 0.5) * cell;
                    let density = match spec.kind {
                        DomainKind::WeightedSquare => (x * x + y * y).sqrt(),
                        _ => 1.0,
                    };
                    records.push(PointRecord {
                        coords: vec![x, y],
                        region: Region::Interior,
                        weight: density * area,
                    });
                }
            }
            // Perimeter of length 4, sampled uniformly by arclength.
            let n_b = (4.0 * bres).round() as usize;
            let step = 4.0 / n_b as f64;
            for m in 0..n_b {
                let t = (m as f64 + 0.5) * step;
                let p = square_perimeter_point(t);
                records.push(PointRecord {
                    coords: vec![p. 0, p.1],
                    region: Region::Boundary,
                    weight: step,
                });
            }
        }
        DomainKind::CuspParabola => {
            let mut min_x = f64::INFINITY;
            for i in 0..res {
                for j in 0..res {
                    let x = (i as f64 + 0.5) * cell;
                    let y = (j as f64 + 0.5) * cell;
                    if y < x * x && x < 1.0 {
                        min_x = min_x.min(x);
                        records.push(PointRecord {
                            coords: vec![x, y],
                            region: Region::Interior,
                            weight: area,
                        });
                    }
                }
            }
            if !(min_x <= 0.25) {
                return Err(Error::ResolutionTooLow(format!(
                    "resolution {} does not resolve the cusp tip (first interior column at x = {min_x})",
                    spec.resolution
                )));
            }
            // Bottom edge, right edge, and the parabola arc, each sampled by
            // arclength.
            sample_segment(&mut records, (0.0, 0.0), (1.0, 0.0), bres);
            sample_segment(&mut records, (1.0, 0.0), (1.0, 1.0), bres);
            sample_parabola(&mut records, bres);
        }
        DomainKind::WeightedDisc { .. } | DomainKind::SharpnessDisc { .. } => {
            let exponent = match spec.kind {
                DomainKind::SharpnessDisc { n, .. } => {
                    if n < 2 {
                        return Err(Error::InvalidParameter("sharpness disc needs n >= 2".into()));
                    }
                    (n - 1) as f64
                }
                _ => 1.0,
            };
            for i in 0..(2 * res) {
                for j in 0..(2 * res) {
                    let x = (i as f64 + 0.5) * cell - 1.0;
                    let y = (j as f64 + 0.5) * cell - 1.0;
                    let r = (x * x + y * y).sqrt();
                    if r < 1.0 {
                        records.push(PointRecord {
                            coords: vec![x, y],
                            region: Region::Interior,
                            weight: (1.0 - r).powf(exponent) * area,
                        });
                    }
                }
            }
            let n_c = (std::f64::consts::TAU * bres).round() as usize;
            let step = std::f64::consts::TAU / n_c as f64;
            for m in 0..n_c {
                let t = (m as f64 + 0.5) * step;
                records.push(PointRecord {
                    coords: vec![t.cos(), t.sin()],
                    region: Region::Boundary,
                    weight: step,
                });
            }
        }
    }
    PointCloudSpace::new(records, MetricSpec::Euclidean)
}

fn square_perimeter_point(t: f64) -> (f64, f64) {
    match t {
        t if t < 1.0 => (t, 0.0),
        t if t < 2.0 => (1.0, t - 1.0),
        t if t < 3.0 => (3.0 - t, 1.0),
        t => (0.0, 4.0 - t),
    }
}

fn sample_segment(records: &mut Vec<PointRecord>, a: (f64, f64), b: (f64, f64), bres: f64) {
    let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    let n = (len * bres).round().max(1.0) as usize;
    let step = len / n as f64;
    for m in 0..n {
        let t = (m as f64 + 0.5) / n as f64;
        records.push(PointRecord {
            coords: vec![a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)],
            region: Region::Boundary,
            weight: step,
        });
    }
}

fn parabola_arclength(x: f64) -> f64 {
    // Length of y = t^2 from 0 to x.
    let u = 2.0 * x;
    (x * (1.0 + u * u).sqrt() + u.asinh() / 2.0) / 2.0
}

fn sample_parabola(records: &mut Vec<PointRecord>, bres: f64) {
    let total = parabola_arclength(1.0);
    let n = (total * bres).round().max(1.0) as usize;
    let step = total / n as f64;
    for m in 0..n {
        let s = (m as f64 + 0.5) * step;
        // Invert the arclength by bisection.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if parabola_arclength(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        records.push(PointRecord {
            coords: vec![x, x * x],
            region: Region::Boundary,
            weight: step,
        });
    }
}

/// Interior adjacency graph with edges below twice the grid spacing, the
/// discrete surrogate for rectifiable curves.
///
/// Curves are found as geodesics of the clearance-penalized cost
/// `length / clearance`; plain metric geodesics hug concave boundary arcs at
/// grid-level clearance and certify nothing, while penalized ones track the
/// medial axis. Certificates always re-measure true arclength along the
/// found polyline, so any returned constant is a witnessed lower bound.
pub struct InteriorGraph {
    ids: Vec<PointId>,
    adj: Vec<Vec<(u32, f64)>>,
    clearance: Vec<f64>,
}

impl InteriorGraph {
    pub fn build(space: &PointCloudSpace) -> Result<Self> {
        let ids = space.ids(Region::Interior).to_vec();
        let rho = 2.0 * space.min_spacing(Region::Interior);
        let adj: Vec<Vec<(u32, f64)>> = ids
            .iter()
            .map(|&id| {
                let mut nbrs = Vec::new();
                for other in
                    ball_members(space, &Ball::at_point(id, rho), Region::Interior).expect("ball")
                {
                    if other != id {
                        nbrs.push((space.region_slot(other) as u32, space.dist(id, other)));
                    }
                }
                nbrs
            })
            .collect();
        let clearance = ids.iter().map(|&id| space.dist_to_boundary(id)).collect();
        Ok(InteriorGraph {
            ids,
            adj,
            clearance,
        })
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn id(&self, slot: usize) -> PointId {
        self.ids[slot]
    }

    pub fn clearance(&self, slot: usize) -> f64 {
        self.clearance[slot]
    }

    /// Clearance-penalized geodesic tree from a source slot. Returns the
    /// true arclengths along the tree and the parents.
    pub fn penalized_tree(&self, source: usize) -> (Vec<f64>, Vec<u32>) {
        let n = self.ids.len();
        let mut cost = vec![f64::INFINITY; n];
        let mut arc = vec![f64::INFINITY; n];
        let mut parent = vec![u32::MAX; n];
        let mut heap: BinaryHeap<(std::cmp::Reverse<ordered::OrdF64>, u32)> = BinaryHeap::new();
        cost[source] = 0.0;
        arc[source] = 0.0;
        heap.push((std::cmp::Reverse(ordered::OrdF64(0.0)), source as u32));
        while let Some((std::cmp::Reverse(ordered::OrdF64(d)), v)) = heap.pop() {
            if d > cost[v as usize] {
                continue;
            }
            for &(w, len) in &self.adj[v as usize] {
                let clear = self.clearance[v as usize].min(self.clearance[w as usize]);
                let cand = d + len / clear.max(1e-300);
                if cand < cost[w as usize] {
                    cost[w as usize] = cand;
                    arc[w as usize] = arc[v as usize] + len;
                    parent[w as usize] = v;
                    heap.push((std::cmp::Reverse(ordered::OrdF64(cand)), w));
                }
            }
        }
        (arc, parent)
    }

    /// Slot path `from -> to` along a parent array, inclusive.
    pub fn walk(&self, parent: &[u32], from: usize) -> Vec<u32> {
        let mut p = vec![from as u32];
        let mut v = from as u32;
        while parent[v as usize] != u32::MAX {
            v = parent[v as usize];
            p.push(v);
        }
        p
    }
}

mod ordered {
    #[derive(PartialEq, PartialOrd)]
    pub struct OrdF64(pub f64);
    impl Eq for OrdF64 {}
    #[allow(clippy::derive_ord_xor_partial_ord)]
    impl Ord for OrdF64 {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }
}

/// Interior point with the largest clearance, the default curve hub.
pub fn deepest_interior_point(space: &PointCloudSpace) -> Result<PointId> {
    space
        .ids(Region::Interior)
        .iter()
        .copied()
        .max_by(|&a, &b| {
            space
                .dist_to_boundary(a)
                .total_cmp(&space.dist_to_boundary(b))
                .then(b.cmp(&a))
        })
        .ok_or(Error::EmptyInterior)
}

pub fn default_c_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

/// Checks the carrot condition `dist(curve(t), boundary) >= c t` along
/// penalized-geodesic-tree curves from every interior point to the center
/// and returns the largest passing candidate.
pub fn john_check(
    space: &PointCloudSpace,
    center: PointId,
    c_grid: &[f64],
) -> Result<(bool, f64)> {
    if space.region_of(center) != Region::Interior {
        return Err(Error::InvalidParameter("John center must be interior".into()));
    }
    let graph = InteriorGraph::build(space)?;
    let source = space.region_slot(center);
    let (arc, parent) = graph.penalized_tree(source);
    if arc.iter().any(|d| !d.is_finite()) {
        return Err(Error::NotConnected);
    }
    // c_max(x) = min over tree ancestors v of clearance(v)/(arc(x)-arc(v)).
    // The curve runs from x to the center, so t at v equals arc(x) - arc(v).
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); graph.n()];
    for (v, &p) in parent.iter().enumerate() {
        if p != u32::MAX {
            children[p as usize].push(v as u32);
        }
    }
    let clearance: Vec<f64> = (0..graph.n())
        .map(|slot| space.dist_to_boundary(graph.id(slot)))
        .collect();
    let mut overall = f64::INFINITY;
    let mut stack: Vec<(u32, usize)> = vec![(source as u32, 0)];
    let mut path: Vec<u32> = Vec::new();
    while let Some((v, stage)) = stack.pop() {
        if stage == 0 {
            path.push(v);
            let mut c_max = f64::INFINITY;
            for &anc in path.iter() {
                let t = arc[v as usize] - arc[anc as usize];
                if t > 0.0 {
                    c_max = c_max.min(clearance[anc as usize] / t);
                }
            }
            overall = overall.min(c_max);
            stack.push((v, 1));
            for &c in &children[v as usize] {
                stack.push((c, 0));
            }
        } else {
            path.pop();
        }
    }
    let best = c_grid
        .iter()
        .copied()
        .filter(|&c| c <= overall)
        .fold(f64::NAN, f64::max);
    Ok((best.is_finite(), best))
}

/// Largest constant certified by one polyline of graph slots for the cigar
/// and length conditions of the pair at its ends.
fn cigar_constant(space: &PointCloudSpace, graph: &InteriorGraph, slots: &[u32], d: f64) -> f64 {
    let mut total = 0.0;
    for w in slots.windows(2) {
        total += space.dist(graph.id(w[0] as usize), graph.id(w[1] as usize));
    }
    if total <= 0.0 {
        return f64::INFINITY;
    }
    let mut c = d / total;
    let mut t = 0.0;
    for (k, &v) in slots.iter().enumerate() {
        if k > 0 {
            t += space.dist(graph.id(slots[k - 1] as usize), graph.id(v as usize));
        }
        let m = t.min(total - t);
        if m > 0.0 {
            c = c.min(graph.clearance(v as usize) / m);
        }
    }
    c
}

/// Cigar condition on sampled interior pairs. Each pair is certified by the
/// better of two explicit curves: the direct penalized geodesic between the
/// endpoints, and the join of the two penalized tree paths toward the
/// deepest-point hub at their first common vertex.
pub fn uniform_check(
    space: &PointCloudSpace,
    pair_sample: &[(PointId, PointId)],
) -> Result<(bool, f64)> {
    let graph = InteriorGraph::build(space)?;
    let hub = space.region_slot(deepest_interior_point(space)?);
    let (arc, parent) = graph.penalized_tree(hub);
    if arc.iter().any(|d| !d.is_finite()) {
        return Err(Error::NotConnected);
    }

    let mut overall = f64::INFINITY;
    let mut any_pair = false;
    for &(x, y) in pair_sample {
        if x == y {
            continue; // vacuous
        }
        any_pair = true;
        let (sx, sy) = (space.region_slot(x), space.region_slot(y));
        let d = space.dist(x, y);

        // Tree-join curve.
        let px = graph.walk(&parent, sx);
        let py = graph.walk(&parent, sy);
        let mut on_x = vec![false; graph.n()];
        for &v in &px {
            on_x[v as usize] = true;
        }
        let join = *py.iter().find(|&&v| on_x[v as usize]).unwrap_or(&(hub as u32));
        let mut composite: Vec<u32> = px.iter().copied().take_while(|&v| v != join).collect();
        composite.push(join);
        let back: Vec<u32> = py.iter().copied().take_while(|&v| v != join).collect();
        composite.extend(back.iter().rev());
        let mut c_pair = cigar_constant(space, &graph, &composite, d);

        // Direct penalized geodesic.
        let (_, dparent) = graph.penalized_tree(sx);
        if sx == sy || dparent[sy] != u32::MAX {
            let mut direct = graph.walk(&dparent, sy);
            direct.reverse();
            c_pair = c_pair.max(cigar_constant(space, &graph, &direct, d));
        }
        overall = overall.min(c_pair);
    }
    if !any_pair {
        // Identical-point sample: vacuously uniform.
        return Ok((true, f64::INFINITY));
    }
    let grid = default_c_grid();
    let best = grid
        .iter()
        .copied()
        .filter(|&c| c <= overall)
        .fold(f64::NAN, f64::max);
    Ok((best.is_finite(), best))
}

/// One ball of a chain: interpolated center coordinates, radius and the
/// curve parameter it sits at.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainBall {
    pub coords: Vec<f64>,
    pub radius: f64,
    pub t: f64,
    /// Signed index: positive toward `z`, negative toward `y`, zero for the
    /// joining ball.
    pub k: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Chain {
    pub balls: Vec<ChainBall>,
    pub endpoints: (PointId, PointId),
    pub john_constant: f64,
    pub dilation: f64,
}

impl Chain {
    pub fn alpha(&self) -> f64 {
        2.0 - self.john_constant / (2.0 * self.dilation)
    }

    pub fn beta(&self) -> f64 {
        let alpha = self.alpha();
        self.john_constant / (2.0 * self.dilation * (alpha + 2.0 / self.john_constant))
    }
}

struct Polyline {
    pts: Vec<Vec<f64>>,
    cum: Vec<f64>,
}

impl Polyline {
    fn at(&self, t: f64) -> Vec<f64> {
        let total = *self.cum.last().unwrap();
        let t = t.clamp(0.0, total);
        let k = self.cum.partition_point(|&c| c < t).min(self.pts.len() - 1);
        if k == 0 {
            return self.pts[0].clone();
        }
        let seg = self.cum[k] - self.cum[k - 1];
        let frac = if seg > 0.0 { (t - self.cum[k - 1]) / seg } else { 0.0 };
        self.pts[k - 1]
            .iter()
            .zip(&self.pts[k])
            .map(|(a, b)| a + frac * (b - a))
            .collect()
    }
}

/// Curve from a boundary point to the hub: the boundary point prepended to
/// the tree path of its nearest interior neighbor.
fn boundary_curve(
    space: &PointCloudSpace,
    graph: &InteriorGraph,
    arc: &[f64],
    parent: &[u32],
    z: PointId,
) -> Result<Polyline> {
    let (first, gap) = space
        .nearest_in_region(z, Region::Interior)
        .ok_or(Error::EmptyInterior)?;
    let mut slots = vec![space.region_slot(first) as u32];
    while parent[*slots.last().unwrap() as usize] != u32::MAX {
        slots.push(parent[*slots.last().unwrap() as usize]);
    }
    if !arc[space.region_slot(first)].is_finite() {
        return Err(Error::NotConnected);
    }
    let mut pts = vec![space.point(z).to_vec()];
    let mut cum = vec![0.0];
    let mut acc = gap;
    pts.push(space.point(graph.id(slots[0] as usize)).to_vec());
    cum.push(acc);
    for w in slots.windows(2) {
        acc += arc[w[0] as usize] - arc[w[1] as usize];
        pts.push(space.point(graph.id(w[1] as usize)).to_vec());
        cum.push(acc);
    }
    Ok(Polyline { pts, cum })
}

/// Chain of balls along the John curves from two boundary points, shrinking
/// geometrically toward each endpoint, joined by `B(z, 3 d(y,z))`.
pub fn build_chain(
    space: &PointCloudSpace,
    z: PointId,
    y: PointId,
    c_j: f64,
    lambda: f64,
) -> Result<Chain> {
    if z == y {
        return Err(Error::InvalidParameter("chain endpoints coincide".into()));
    }
    if !(c_j > 0.0 && c_j <= 1.0) || !(lambda >= 1.0) {
        return Err(Error::InvalidParameter("need c_j in (0,1] and lambda >= 1".into()));
    }
    if space.region_of(z) != Region::Boundary || space.region_of(y) != Region::Boundary {
        return Err(Error::InvalidParameter("chain endpoints must be boundary points".into()));
    }
    let graph = InteriorGraph::build(space)?;
    let hub = space.region_slot(deepest_interior_point(space)?);
    let (arc, parent) = graph.penalized_tree(hub);
    let curve_z = boundary_curve(space, &graph, &arc, &parent, z)?;
    let curve_y = boundary_curve(space, &graph, &arc, &parent, y)?;

    let d = space.dist(z, y);
    let shrink = 1.0 - c_j / (2.0 * lambda);
    let floor = 2.0 * space.min_spacing(Region::Interior);
    let mut balls = vec![ChainBall {
        coords: space.point(z).to_vec(),
        radius: 3.0 * d,
        t: 0.0,
        k: 0,
    }];
    for (curve, sign) in [(&curve_z, 1i32), (&curve_y, -1i32)] {
        let mut t = d;
        let mut k = 1;
        loop {
            t *= shrink;
            let r = c_j / (2.0 * lambda) * t;
            if r < floor || k > 200 {
                break;
            }
            balls.push(ChainBall {
                coords: curve.at(t),
                radius: r,
                t,
                k: sign * k,
            });
            k += 1;
        }
    }
    Ok(Chain {
        balls,
        endpoints: (z, y),
        john_constant: c_j,
        dilation: lambda,
    })
}

/// Chain invariants re-checked on the discrete point set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainCheck {
    pub containment_ok: bool,
    pub sandwich_ok: bool,
    pub carrot_ok: bool,
}

pub fn verify_chain(space: &PointCloudSpace, chain: &Chain) -> Result<ChainCheck> {
    let alpha = chain.alpha();
    let beta = chain.beta();
    let lambda = chain.dilation;
    let c_j = chain.john_constant;
    let (z, y) = chain.endpoints;
    let d_zy = space.dist(z, y);

    let members = |coords: &[f64], r: f64| -> Result<Vec<PointId>> {
        ball_members(space, &Ball::at_coords(coords.to_vec(), r), Region::Interior)
    };

    // Consecutive containment per side, on the discrete point set.
    let mut containment_ok = true;
    for sign in [1i32, -1] {
        let mut side: Vec<&ChainBall> = chain
            .balls
            .iter()
            .filter(|b| b.k == 0 || b.k.signum() == sign)
            .collect();
        side.sort_by_key(|b| b.k.abs());
        for w in side.windows(2) {
            let inner = members(&w[1].coords, w[1].radius)?;
            let outer = members(&w[0].coords, alpha * w[0].radius)?;
            if inner.iter().any(|id| !outer.contains(id)) {
                containment_ok = false;
            }
        }
    }

    // Radius sandwich and carrot membership for the inflated balls.
    let mut sandwich_ok = true;
    let mut carrot_ok = true;
    for b in chain.balls.iter().filter(|b| b.k != 0) {
        let tip = if b.k > 0 { z } else { y };
        for id in members(&b.coords, alpha * lambda * b.radius)? {
            let dx = space.dist(tip, id);
            if !(dx / (lambda * (alpha + 2.0 / c_j)) <= b.radius * (1.0 + 1e-9)
                && b.radius <= 2.0 * dx / c_j * (1.0 + 1e-9))
            {
                sandwich_ok = false;
            }
            let clearance = space.dist_to_boundary(id);
            if !(beta * dx <= clearance * (1.0 + 1e-9) && clearance <= 2.0 * d_zy * (1.0 + 1e-9)) {
                carrot_ok = false;
            }
        }
    }
    Ok(ChainCheck {
        containment_ok,
        sandwich_ok,
        carrot_ok,
    })
}
