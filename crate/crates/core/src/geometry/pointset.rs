use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use num_rational::Ratio;

use super::{LatticePoint, Point};

/// Colour index of a point: the position of the fixed point whose orbit
/// produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Tag(pub u32);

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// When two stored points count as the same point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DedupPolicy {
    /// Bitwise equality (floats) or exact equality (lattice, rational).
    Exact,
    /// Floats snapped to a square grid of the given cell size.
    Snap(f64),
}

/// A point type that can live in a [`PointSet`].
pub trait OrbitPoint: Clone + Send + Sync + fmt::Debug {
    type Key: Hash + Eq + Ord + Clone + Send + Sync + fmt::Debug;

    fn dedup_key(&self, policy: DedupPolicy) -> Self::Key;

    fn to_point(&self) -> Point;
}

fn canonical_bits(v: f64) -> i64 {
    // +0.0 and -0.0 are the same coordinate
    if v == 0.0 {
        0
    } else {
        v.to_bits() as i64
    }
}

impl OrbitPoint for Point {
    type Key = (i64, i64);

    fn dedup_key(&self, policy: DedupPolicy) -> (i64, i64) {
        match policy {
            DedupPolicy::Exact => (canonical_bits(self.x), canonical_bits(self.y)),
            DedupPolicy::Snap(eps) => ((self.x / eps).round() as i64, (self.y / eps).round() as i64),
        }
    }

    fn to_point(&self) -> Point {
        *self
    }
}

impl OrbitPoint for LatticePoint {
    type Key = LatticePoint;

    fn dedup_key(&self, _: DedupPolicy) -> LatticePoint {
        *self
    }

    fn to_point(&self) -> Point {
        LatticePoint::to_point(self)
    }
}

impl OrbitPoint for Ratio<i128> {
    type Key = Ratio<i128>;

    fn dedup_key(&self, _: DedupPolicy) -> Ratio<i128> {
        *self
    }

    fn to_point(&self) -> Point {
        Point::real(*self.numer() as f64 / *self.denom() as f64)
    }
}

/// A finite set of points, deduplicated under a [`DedupPolicy`], with one
/// [`Tag`] per point.
///
/// Points are kept in insertion order, so any deterministic construction
/// yields a deterministic iteration order. When an inserted point collides
/// with a stored one, the stored point keeps the smaller of the two tags.
#[derive(Clone)]
pub struct PointSet<P: OrbitPoint> {
    policy: DedupPolicy,
    points: Vec<P>,
    tags: Vec<Tag>,
    index: HashMap<P::Key, usize>,
}

impl<P: OrbitPoint> fmt::Debug for PointSet<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.points.iter().zip(&self.tags)).finish()
    }
}

impl<P: OrbitPoint> PointSet<P> {
    pub fn new(policy: DedupPolicy) -> Self {
        PointSet {
            policy,
            points: Vec::new(),
            tags: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn with_capacity(policy: DedupPolicy, capacity: usize) -> Self {
        PointSet {
            policy,
            points: Vec::with_capacity(capacity),
            tags: Vec::with_capacity(capacity),
            index: HashMap::with_capacity(capacity),
        }
    }

    pub fn from_tagged(policy: DedupPolicy, items: impl IntoIterator<Item = (P, Tag)>) -> Self {
        let mut set = PointSet::new(policy);
        for (p, t) in items {
            set.insert(p, t);
        }
        set
    }

    /// All points get tag 0.
    pub fn from_points(policy: DedupPolicy, items: impl IntoIterator<Item = P>) -> Self {
        Self::from_tagged(policy, items.into_iter().map(|p| (p, Tag(0))))
    }

    pub fn policy(&self) -> DedupPolicy {
        self.policy
    }

    /// Inserts `p`; returns `true` when the point was not yet present.
    pub fn insert(&mut self, p: P, tag: Tag) -> bool {
        let key = p.dedup_key(self.policy);
        match self.index.get(&key) {
            Some(&i) => {
                if tag < self.tags[i] {
                    self.tags[i] = tag;
                }
                false
            }
            None => {
                self.index.insert(key, self.points.len());
                self.points.push(p);
                self.tags.push(tag);
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, Tag)> + '_ {
        self.points.iter().zip(self.tags.iter().copied())
    }

    pub fn contains(&self, p: &P) -> bool {
        self.index.contains_key(&p.dedup_key(self.policy))
    }

    pub fn tag_of(&self, p: &P) -> Option<Tag> {
        self.index.get(&p.dedup_key(self.policy)).map(|&i| self.tags[i])
    }

    /// Floating-point coordinates of every point, in set order.
    pub fn to_points(&self) -> Vec<Point> {
        self.points.iter().map(OrbitPoint::to_point).collect()
    }

    /// Floating-point coordinates paired with their tags.
    pub fn to_tagged_points(&self) -> Vec<(Point, Tag)> {
        self.iter().map(|(p, t)| (p.to_point(), t)).collect()
    }

    pub fn is_subset_of(&self, other: &PointSet<P>) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }

    /// Set equality under the dedup policy (tags are ignored).
    pub fn same_points(&self, other: &PointSet<P>) -> bool {
        self.len() == other.len() && self.is_subset_of(other)
    }

    /// Points of `self` that are not in `other`.
    pub fn difference(&self, other: &PointSet<P>) -> PointSet<P> {
        PointSet::from_tagged(
            self.policy,
            self.iter()
                .filter(|(p, _)| !other.contains(p))
                .map(|(p, t)| (p.clone(), t)),
        )
    }

    pub fn extend_from(&mut self, other: &PointSet<P>) {
        for (p, t) in other.iter() {
            self.insert(p.clone(), t);
        }
    }

    pub fn filter(&self, mut keep: impl FnMut(&P, Tag) -> bool) -> PointSet<P> {
        PointSet::from_tagged(
            self.policy,
            self.iter().filter(|(p, t)| keep(p, *t)).map(|(p, t)| (p.clone(), t)),
        )
    }

    /// Dedup keys in ascending order; a canonical, order-free summary.
    pub fn sorted_keys(&self) -> Vec<P::Key> {
        let mut keys: Vec<P::Key> = self.index.keys().cloned().collect();
        keys.sort();
        keys
    }

    pub fn distinct_tags(&self) -> Vec<Tag> {
        let mut t = self.tags.clone();
        t.sort();
        t.dedup();
        t
    }
}
