//! Static 2-d tree for exact nearest-neighbor queries.
//!
//! Ties in distance are broken toward the lowest point index, matching the
//! brute-force reference search used in the tests.

#[derive(Clone, Copy)]
struct Entry {
    x: f64,
    y: f64,
    id: u32,
}

impl Entry {
    #[inline]
    fn coord(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.x
        } else {
            self.y
        }
    }
}

pub(crate) struct KdTree {
    entries: Vec<Entry>,
}

impl KdTree {
    pub fn build(points: &[(f64, f64)]) -> KdTree {
        let mut entries: Vec<Entry> = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Entry { x, y, id: i as u32 })
            .collect();
        build_rec(&mut entries, 0);
        KdTree { entries }
    }

    /// Exact nearest neighbor of `(qx, qy)` among all stored points except
    /// `skip`. Returns `(point index, distance)`.
    pub fn nearest_excluding(&self, qx: f64, qy: f64, skip: usize) -> (usize, f64) {
        debug_assert!(self.entries.len() >= 2);
        let mut best_d2 = f64::INFINITY;
        let mut best_id = u32::MAX;
        self.search(0, self.entries.len(), 0, qx, qy, skip as u32, &mut best_d2, &mut best_id);
        (best_id as usize, best_d2.sqrt())
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        lo: usize,
        hi: usize,
        axis: usize,
        qx: f64,
        qy: f64,
        skip: u32,
        best_d2: &mut f64,
        best_id: &mut u32,
    ) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let e = self.entries[mid];
        if e.id != skip {
            let dx = qx - e.x;
            let dy = qy - e.y;
            let d2 = dx * dx + dy * dy;
            if d2 < *best_d2 || (d2 == *best_d2 && e.id < *best_id) {
                *best_d2 = d2;
                *best_id = e.id;
            }
        }
        let q = if axis == 0 { qx } else { qy };
        let delta = q - e.coord(axis);
        let (near, far) = if delta < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, axis ^ 1, qx, qy, skip, best_d2, best_id);
        // The far half-plane can still hold an equidistant point with a lower
        // index, so recurse on equality as well.
        if delta * delta <= *best_d2 {
            self.search(far.0, far.1, axis ^ 1, qx, qy, skip, best_d2, best_id);
        }
    }
}

fn build_rec(entries: &mut [Entry], axis: usize) {
    if entries.len() <= 1 {
        return;
    }
    let mid = entries.len() / 2;
    entries.select_nth_unstable_by(mid, |a, b| {
        a.coord(axis).total_cmp(&b.coord(axis)).then(a.id.cmp(&b.id))
    });
    let (left, right) = entries.split_at_mut(mid);
    build_rec(left, axis ^ 1);
    build_rec(&mut right[1..], axis ^ 1);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn brute_force(points: &[(f64, f64)], i: usize) -> (usize, f64) {
        let (qx, qy) = points[i];
        let mut best = (usize::MAX, f64::INFINITY);
        for (j, &(x, y)) in points.iter().enumerate() {
            if j == i {
                continue;
            }
            let d2 = (qx - x) * (qx - x) + (qy - y) * (qy - y);
            if d2 < best.1 || (d2 == best.1 && j < best.0) {
                best = (j, d2);
            }
        }
        (best.0, best.1.sqrt())
    }

    #[test]
    fn matches_brute_force_on_random_points() {
        let mut rng = seeded_rng(60);
        for _ in 0..50 {
            let n = rng.random_range(2..150);
            let points: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
                .collect();
            let tree = KdTree::build(&points);
            for i in 0..n {
                let (j, d) = tree.nearest_excluding(points[i].0, points[i].1, i);
                let (bj, bd) = brute_force(&points, i);
                assert_eq!(j, bj, "point {i} of {n}");
                assert_eq!(d, bd);
            }
        }
    }

    #[test]
    fn ties_break_to_lowest_index() {
        // Grid layout with many equidistant neighbors.
        let mut points = Vec::new();
        for gx in 0..5 {
            for gy in 0..5 {
                points.push((gx as f64, gy as f64));
            }
        }
        let tree = KdTree::build(&points);
        for i in 0..points.len() {
            let got = tree.nearest_excluding(points[i].0, points[i].1, i);
            let want = brute_force(&points, i);
            assert_eq!(got, want, "grid point {i}");
        }
    }

    #[test]
    fn duplicate_points_allowed() {
        let points = vec![(0.3, 0.3), (0.3, 0.3), (0.3, 0.3), (0.9, 0.9)];
        let tree = KdTree::build(&points);
        assert_eq!(tree.nearest_excluding(0.3, 0.3, 0), (1, 0.0));
        assert_eq!(tree.nearest_excluding(0.3, 0.3, 1), (0, 0.0));
        assert_eq!(tree.nearest_excluding(0.3, 0.3, 2), (0, 0.0));
    }
}
