use rayon::prelude::*;

use super::Point;

const LEAF: usize = 8;

/// Exact nearest-neighbour queries over a fixed cloud of points in `ℝᴰ`.
///
/// An implicit kd-tree: the points are permuted in place so that every
/// subslice is split at its median along cycling axes.
#[derive(Clone, Debug)]
pub struct KdTree<const D: usize> {
    points: Vec<[f64; D]>,
}

fn dist_sqr<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn build<const D: usize>(points: &mut [[f64; D]], axis: usize) {
    if points.len() <= LEAF {
        return;
    }
    let mid = points.len() / 2;
    points.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    let (left, right) = points.split_at_mut(mid);
    let next = (axis + 1) % D;
    build(left, next);
    build(&mut right[1..], next);
}

/// `off[i]` is the offset from `q` to the current cell along axis `i` and
/// `cell` the squared distance from `q` to the cell.
fn search<const D: usize>(
    points: &[[f64; D]],
    axis: usize,
    q: &[f64; D],
    off: &mut [f64; D],
    cell: f64,
    best: &mut f64,
) {
    if points.len() <= LEAF {
        for p in points {
            let d = dist_sqr(p, q);
            if d < *best {
                *best = d;
            }
        }
        return;
    }
    let mid = points.len() / 2;
    let p = &points[mid];
    let d = dist_sqr(p, q);
    if d < *best {
        *best = d;
    }
    let diff = q[axis] - p[axis];
    let (near, far) = if diff < 0.0 {
        (&points[..mid], &points[mid + 1..])
    } else {
        (&points[mid + 1..], &points[..mid])
    };
    let next = (axis + 1) % D;
    search(near, next, q, off, cell, best);
    let old = off[axis];
    let far_cell = cell - old * old + diff * diff;
    if far_cell < *best {
        off[axis] = diff;
        search(far, next, q, off, far_cell, best);
        off[axis] = old;
    }
}

impl<const D: usize> KdTree<D> {
    pub fn new(mut points: Vec<[f64; D]>) -> Self {
        build(&mut points, 0);
        KdTree { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; D]] {
        &self.points
    }

    /// Distance from `q` to the closest indexed point, `None` when empty.
    pub fn nearest_distance(&self, q: &[f64; D]) -> Option<f64> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = f64::INFINITY;
        search(&self.points, 0, q, &mut [0.0; D], 0.0, &mut best);
        Some(best.sqrt())
    }

    /// `sup_{a ∈ queries} d(a, self)`; 0 for no queries, ∞ for an empty tree.
    pub fn directed_from(&self, queries: &[[f64; D]]) -> f64 {
        if queries.is_empty() {
            return 0.0;
        }
        if self.points.is_empty() {
            return f64::INFINITY;
        }
        queries
            .par_iter()
            .map(|q| self.nearest_distance(q).unwrap_or(f64::INFINITY))
            .reduce(|| 0.0, f64::max)
    }
}

/// [`KdTree`] over plane points.
#[derive(Clone, Debug)]
pub struct NearestIndex {
    tree: KdTree<2>,
}

fn coords(p: &Point) -> [f64; 2] {
    [p.x, p.y]
}

impl NearestIndex {
    pub fn new(points: Vec<Point>) -> Self {
        NearestIndex {
            tree: KdTree::new(points.iter().map(coords).collect()),
        }
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    pub fn nearest_distance(&self, q: Point) -> Option<f64> {
        self.tree.nearest_distance(&coords(&q))
    }

    /// `sup_{a ∈ queries} d(a, self)`; 0 for no queries, ∞ for an empty index.
    pub fn directed_from(&self, queries: &[Point]) -> f64 {
        let q: Vec<[f64; 2]> = queries.iter().map(coords).collect();
        self.tree.directed_from(&q)
    }

    /// `inf_{a ∈ queries} d(a, self)`.
    pub fn min_distance_from(&self, queries: &[Point]) -> Option<f64> {
        if queries.is_empty() || self.tree.is_empty() {
            return None;
        }
        Some(
            queries
                .par_iter()
                .map(|q| self.nearest_distance(*q).unwrap_or(f64::INFINITY))
                .reduce(|| f64::INFINITY, f64::min),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_linear_scan(pts in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 1..200), q in (-80.0..80.0f64, -80.0..80.0f64)) {
            let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
            let q = Point::new(q.0, q.1);
            let brute = pts.iter().map(|p| p.distance(q)).fold(f64::INFINITY, f64::min);
            let index = NearestIndex::new(pts);
            prop_assert!((index.nearest_distance(q).unwrap() - brute).abs() <= 1e-12 * brute.max(1.0));
        }

        #[test]
        fn matches_linear_scan_in_space(pts in prop::collection::vec(prop::array::uniform3(-5.0..5.0f64), 1..200), q in prop::array::uniform3(-8.0..8.0f64)) {
            let brute = pts.iter().map(|p| dist_sqr(p, &q).sqrt()).fold(f64::INFINITY, f64::min);
            let tree = KdTree::new(pts);
            prop_assert!((tree.nearest_distance(&q).unwrap() - brute).abs() <= 1e-12 * brute.max(1.0));
        }
    }
}
