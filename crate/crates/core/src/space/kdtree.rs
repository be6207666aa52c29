//! Small static kd-tree over a subset of points.
//!
//! The tree only prunes; every reported candidate is re-checked with the
//! caller's exact distance function, so query results are bit-identical to a
//! naive scan regardless of how the splitting planes round.

use crate::space::PointId;

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct KdTree {
    dim: usize,
    ids: Vec<PointId>,
    coords: Vec<f64>,
    nodes: Vec<Node>,
    root: usize,
}

impl KdTree {
    /// `coords[k*dim..(k+1)*dim]` are the coordinates of `ids[k]`.
    pub fn build(dim: usize, ids: Vec<PointId>, coords: Vec<f64>) -> Self {
        assert_eq!(ids.len() * dim, coords.len());
        let n = ids.len();
        let mut tree = KdTree {
            dim,
            ids,
            coords,
            nodes: Vec::new(),
            root: 0,
        };
        if n > 0 {
            tree.root = tree.build_range(0, n);
        }
        tree
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn coord(&self, k: usize, axis: usize) -> f64 {
        self.coords[k * self.dim + axis]
    }

    fn build_range(&mut self, start: usize, end: usize) -> usize {
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return self.nodes.len() - 1;
        }
        // Split on the axis with the widest extent.
        let mut best_axis = 0;
        let mut best_spread = -1.0;
        for axis in 0..self.dim {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for k in start..end {
                let c = self.coord(k, axis);
                lo = lo.min(c);
                hi = hi.max(c);
            }
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_axis = axis;
            }
        }
        let mid = (start + end) / 2;
        self.select_nth(start, end, mid, best_axis);
        let value = self.coord(mid, best_axis);
        let left = self.build_range(start, mid);
        let right = self.build_range(mid, end);
        self.nodes.push(Node::Split {
            axis: best_axis,
            value,
            left,
            right,
        });
        self.nodes.len() - 1
    }

    /// Reorder `start..end` so it is sorted along `axis` (median split then
    /// recurses on both halves, so a full sort of the range is fine).
    fn select_nth(&mut self, start: usize, end: usize, _nth: usize, axis: usize) {
        let mut order: Vec<usize> = (start..end).collect();
        order.sort_unstable_by(|&a, &b| self.coord(a, axis).total_cmp(&self.coord(b, axis)));
        let ids: Vec<PointId> = order.iter().map(|&k| self.ids[k]).collect();
        let coords: Vec<f64> = order
            .iter()
            .flat_map(|&k| self.coords[k * self.dim..(k + 1) * self.dim].to_vec())
            .collect();
        self.ids[start..end].copy_from_slice(&ids);
        self.coords[start * self.dim..end * self.dim].copy_from_slice(&coords);
    }

    /// All stored points whose exact distance (per `dist`) to the query is
    /// strictly less than `radius`. `dist` receives the candidate id.
    pub fn query_radius(
        &self,
        query: &[f64],
        radius: f64,
        dist: &dyn Fn(PointId) -> f64,
    ) -> Vec<PointId> {
        let mut out = Vec::new();
        if !self.is_empty() {
            self.query_radius_rec(self.root, query, radius, dist, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn query_radius_rec(
        &self,
        node: usize,
        query: &[f64],
        radius: f64,
        dist: &dyn Fn(PointId) -> f64,
        out: &mut Vec<PointId>,
    ) {
        match &self.nodes[node] {
            Node::Leaf { start, end } => {
                for k in *start..*end {
                    let id = self.ids[k];
                    if dist(id) < radius {
                        out.push(id);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[*axis] - value;
                // The axis gap lower-bounds the Euclidean distance, so a
                // subtree is skipped only when nothing in it can qualify.
                if delta < radius {
                    self.query_radius_rec(*left, query, radius, dist, out);
                }
                if -delta < radius {
                    self.query_radius_rec(*right, query, radius, dist, out);
                }
            }
        }
    }

    /// Nearest stored point; ties broken towards the lowest id.
    pub fn nearest(&self, query: &[f64], dist: &dyn Fn(PointId) -> f64) -> Option<(PointId, f64)> {
        if self.is_empty() {
            return None;
        }
        let mut best: Option<(f64, PointId)> = None;
        self.nearest_rec(self.root, query, dist, &mut best);
        best.map(|(d, id)| (id, d))
    }

    fn nearest_rec(
        &self,
        node: usize,
        query: &[f64],
        dist: &dyn Fn(PointId) -> f64,
        best: &mut Option<(f64, PointId)>,
    ) {
        match &self.nodes[node] {
            Node::Leaf { start, end } => {
                for k in *start..*end {
                    let id = self.ids[k];
                    let d = dist(id);
                    let better = match best {
                        None => true,
                        Some((bd, bid)) => d < *bd || (d == *bd && id < *bid),
                    };
                    if better {
                        *best = Some((d, id));
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[*axis] - value;
                let (near, far) = if delta < 0.0 { (*left, *right) } else { (*right, *left) };
                self.nearest_rec(near, query, dist, best);
                // Visit the far side on exact ties as well, so tie-breaking by
                // id sees every candidate.
                let cutoff = best.map(|(d, _)| d).unwrap_or(f64::INFINITY);
                if delta.abs() <= cutoff {
                    self.nearest_rec(far, query, dist, best);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn radius_query_matches_scan() {
        let mut pts = Vec::new();
        let mut state = 0x243f6a88u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..300 {
            pts.push([next(), next()]);
        }
        let coords: Vec<f64> = pts.iter().flat_map(|p| p.to_vec()).collect();
        let tree = KdTree::build(2, (0..pts.len()).collect(), coords);
        for qi in 0..20 {
            let q = [next(), next()];
            let r = 0.05 + 0.3 * next();
            let got = tree.query_radius(&q, r, &|id| euclid(&pts[id], &q));
            let mut want: Vec<usize> = (0..pts.len()).filter(|&i| euclid(&pts[i], &q) < r).collect();
            want.sort_unstable();
            assert_eq!(got, want, "query {qi}");
        }
    }

    #[test]
    fn nearest_breaks_ties_by_lowest_id() {
        // Four symmetric points at equal distance from the origin.
        let pts = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        let coords: Vec<f64> = pts.iter().flat_map(|p| p.to_vec()).collect();
        let tree = KdTree::build(2, vec![0, 1, 2, 3], coords);
        let q = [0.0, 0.0];
        let (id, d) = tree.nearest(&q, &|id| euclid(&pts[id], &q)).unwrap();
        // ids 0..3 are all at distance 1; the lowest id must win.
        assert_eq!(id, 0);
        assert_eq!(d, 1.0);
    }
}
