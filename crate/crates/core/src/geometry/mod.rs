//! Points, exact lattice coordinates, deduplicated point sets and the
//! Hausdorff metric.
//!
//! All distances are Euclidean on the line or the plane. One-dimensional
//! sets are stored as planar points with `y == 0`.

mod lattice;
mod nearest;
mod pointset;

pub use lattice::{Basis, LatticePoint};
pub use nearest::{KdTree, NearestIndex};
pub use pointset::{DedupPolicy, OrbitPoint, PointSet, Tag};

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// A point of the real line or plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// A point of the real line.
    pub const fn real(x: f64) -> Self {
        Point { x, y: 0.0 }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sqr(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Point { x: z.re, y: z.im }
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::from_complex(z)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Euclidean distance between two points.
pub fn point_distance(p: Point, q: Point) -> f64 {
    p.distance(q)
}

/// A non-negative real number or `+∞`.
///
/// The Hausdorff distance between an empty and a non-empty set is infinite;
/// that case is carried by [`Extended::Infinite`] rather than by a float
/// overflow.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }

    pub fn max(self, other: Extended) -> Extended {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a.max(b)),
            _ => Extended::Infinite,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

/// Distance from `p` to the nearest point of `set`.
pub fn set_distance(p: Point, set: &[Point]) -> Result<f64> {
    set.iter()
        .map(|q| p.distance(*q))
        .reduce(f64::min)
        .ok_or(Error::EmptySet)
}

/// `sup_{a ∈ A} d(a, B)`, with the conventions `sup ∅ = 0` and
/// `d(a, ∅) = ∞`.
pub fn directed_hausdorff(a: &[Point], b: &[Point]) -> Extended {
    if a.is_empty() {
        return Extended::Finite(0.0);
    }
    if b.is_empty() {
        return Extended::Infinite;
    }
    let index = NearestIndex::new(b.to_vec());
    Extended::Finite(index.directed_from(a))
}

/// Hausdorff distance `max{sup_a d(a,B), sup_b d(b,A)}`.
///
/// Zero for two empty sets and infinite when exactly one set is empty.
/// Uses a kd-tree for the inner minimum; [`hausdorff_brute`] is the
/// quadratic reference.
pub fn hausdorff(a: &[Point], b: &[Point]) -> Extended {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Quadratic-time Hausdorff distance, used as an independent check.
pub fn hausdorff_brute(a: &[Point], b: &[Point]) -> Extended {
    fn directed(a: &[Point], b: &[Point]) -> Extended {
        if a.is_empty() {
            return Extended::Finite(0.0);
        }
        if b.is_empty() {
            return Extended::Infinite;
        }
        let sup = a
            .par_iter()
            .map(|p| b.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max);
        Extended::Finite(sup)
    }
    directed(a, b).max(directed(b, a))
}

/// Axis-aligned rectangle `[xmin, xmax] × [ymin, ymax]`.
///
/// Degenerate rectangles (`ymin == ymax`) describe intervals of the line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let all_finite = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite());
        if !all_finite || xmax < xmin || ymax < ymin {
            return Err(Error::InvalidArgument(format!(
                "bad rectangle [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Rect { xmin, xmax, ymin, ymax })
    }

    /// The interval `[xmin, xmax]` of the real line.
    pub fn interval(xmin: f64, xmax: f64) -> Result<Self> {
        Rect::new(xmin, xmax, 0.0, 0.0)
    }

    /// Smallest rectangle containing all `points`.
    pub fn bounding(points: &[Point]) -> Option<Self> {
        let first = points.first()?;
        let mut r = Rect {
            xmin: first.x,
            xmax: first.x,
            ymin: first.y,
            ymax: first.y,
        };
        for p in &points[1..] {
            r.xmin = r.xmin.min(p.x);
            r.xmax = r.xmax.max(p.x);
            r.ymin = r.ymin.min(p.y);
            r.ymax = r.ymax.max(p.y);
        }
        Some(r)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.width().hypot(self.height())
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.xmin, self.ymin),
            Point::new(self.xmax, self.ymin),
            Point::new(self.xmin, self.ymax),
            Point::new(self.xmax, self.ymax),
        ]
    }

    /// Splits along every non-degenerate axis (four pieces in the plane,
    /// two on the line).
    pub fn split(&self) -> Vec<Rect> {
        let c = self.center();
        let xs: &[(f64, f64)] = &[(self.xmin, c.x), (c.x, self.xmax)];
        let ys: Vec<(f64, f64)> = if self.height() > 0.0 {
            vec![(self.ymin, c.y), (c.y, self.ymax)]
        } else {
            vec![(self.ymin, self.ymax)]
        };
        let mut out = Vec::with_capacity(4);
        for &(x0, x1) in xs {
            for &(y0, y1) in &ys {
                out.push(Rect {
                    xmin: x0,
                    xmax: x1,
                    ymin: y0,
                    ymax: y1,
                });
            }
        }
        out
    }

    /// Grows the rectangle about its centre by `factor` on each side.
    pub fn padded(&self, factor: f64) -> Rect {
        let dx = self.width() * factor;
        let dy = self.height() * factor;
        Rect {
            xmin: self.xmin - dx,
            xmax: self.xmax + dx,
            ymin: self.ymin - dy,
            ymax: self.ymax + dy,
        }
    }

    /// Expands the shorter side so that `width / height == aspect`,
    /// keeping the centre. Degenerate sides are inflated as well.
    pub fn with_aspect(&self, aspect: f64) -> Rect {
        let c = self.center();
        let mut w = self.width();
        let mut h = self.height();
        if w <= 0.0 && h <= 0.0 {
            w = 2.0;
            h = 2.0;
        }
        if w < h * aspect {
            w = h * aspect;
        } else {
            h = w / aspect;
        }
        Rect {
            xmin: c.x - 0.5 * w,
            xmax: c.x + 0.5 * w,
            ymin: c.y - 0.5 * h,
            ymax: c.y + 0.5 * h,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        assert_eq!(point_distance(Point::ORIGIN, Point::ORIGIN), 0.0);
        assert_eq!(point_distance(Point::ORIGIN, Point::new(3.0, 4.0)), 5.0);
        assert_eq!(point_distance(Point::ORIGIN, Point::new(1.0, 0.0)), 1.0);
    }

    #[test]
    fn hausdorff_examples() {
        let origin = [Point::ORIGIN];
        assert_eq!(hausdorff(&origin, &origin), Extended::Finite(0.0));
        let b = [Point::real(0.0), Point::real(3.0)];
        assert_eq!(hausdorff(&[Point::real(0.0)], &b), Extended::Finite(3.0));
        assert_eq!(hausdorff(&[], &[Point::real(0.0)]), Extended::Infinite);
        assert_eq!(hausdorff(&[Point::real(0.0)], &[]), Extended::Infinite);
        assert_eq!(hausdorff(&[], &[]), Extended::Finite(0.0));
    }

    #[test]
    fn set_distance_examples() {
        let a = [Point::new(1.0, 0.0), Point::new(5.0, 0.0)];
        assert_eq!(set_distance(Point::ORIGIN, &a).unwrap(), 1.0);
        assert_eq!(set_distance(a[1], &a).unwrap(), 0.0);
        assert!(matches!(set_distance(Point::ORIGIN, &[]), Err(Error::EmptySet)));
    }

    #[test]
    fn rect_split_line_and_plane() {
        let line = Rect::interval(-1.0, 1.0).unwrap();
        assert_eq!(line.split().len(), 2);
        let square = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let pieces = square.split();
        assert_eq!(pieces.len(), 4);
        assert!(pieces.iter().all(|r| (r.width() - 1.0).abs() < 1e-15));
        assert!(Rect::new(1.0, 0.0, 0.0, 1.0).is_err());
    }

    fn small_set() -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..12)
            .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
    }

    proptest! {
        #[test]
        fn hausdorff_is_a_metric(a in small_set(), b in small_set(), c in small_set()) {
            let ab = hausdorff(&a, &b).finite().unwrap();
            let ba = hausdorff(&b, &a).finite().unwrap();
            let bc = hausdorff(&b, &c).finite().unwrap();
            let ac = hausdorff(&a, &c).finite().unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(hausdorff(&a, &a).finite().unwrap(), 0.0);
            prop_assert!(ac <= ab + bc + 1e-12);
        }

        #[test]
        fn kd_and_brute_agree(a in small_set(), b in small_set()) {
            let kd = hausdorff(&a, &b).finite().unwrap();
            let brute = hausdorff_brute(&a, &b).finite().unwrap();
            prop_assert!((kd - brute).abs() <= 1e-12 * brute.max(1.0));
        }

        #[test]
        fn adding_a_point_moves_by_its_distance(a in small_set(), x in -20.0..20.0f64, y in -20.0..20.0f64) {
            let p = Point::new(x, y);
            let mut with_p = a.clone();
            with_p.push(p);
            let expected = set_distance(p, &a).unwrap();
            let got = hausdorff(&a, &with_p).finite().unwrap();
            prop_assert!((got - expected).abs() <= 1e-12);
        }
    }
}
