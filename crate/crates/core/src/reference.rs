//! Evaluators for orbit distances at depths where the orbits themselves
//! are far too large to enumerate.
//!
//! [`Homothety`] systems `z ↦ c + s(z − c)` (integer `s`, lattice centers)
//! are self-similar enough that distances between deep orbits reduce to a
//! small number of neighbourhood configurations, all in exact lattice
//! arithmetic. The brute-force variants work for any multi-function and
//! serve both as the fallback and as a cross-check.

use std::collections::{HashMap, HashSet};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Basis, KdTree, LatticePoint, NearestIndex, Point};
use crate::micro::{centroid, invariant_disk};
use crate::multifunc::{BranchKind, BranchMap, MultiFunction, MultiMap};
use crate::project::Embedding;

/// An expanding family `z ↦ c + s(z − c)`, one branch per center `c`.
#[derive(Clone, Debug)]
pub struct Homothety {
    scale: i64,
    centers: Vec<LatticePoint>,
    /// Disk `(c₀, ρ)` containing the attractor of the contracting dual.
    disk: (Point, f64),
}

impl Homothety {
    /// Recognises an expanding multi-function of this shape, using its
    /// lattice hint.
    pub fn from_map(map: &MultiFunction) -> Option<Self> {
        let basis = map.lattice()?;
        let first = map.branches().first()?.a();
        let scale = first.re.round();
        if scale < 2.0 || (first.re - scale).abs() > 1e-12 || first.im.abs() > 1e-12 {
            return None;
        }
        let mut centers = Vec::new();
        for (branch, fixed) in map.branches().iter().zip(map.branch_fixed_points()) {
            let a = branch.a();
            if branch.kind() != BranchKind::Affine || (a.re - scale).abs() > 1e-12 || a.im.abs() > 1e-12 {
                return None;
            }
            centers.push(LatticePoint::from_point(basis, fixed.ok()?, 1e-9)?);
        }
        // every contracting branch maps the hull of C into itself, and so
        // does the smallest disk about the centroid containing C
        let pts: Vec<Point> = centers.iter().map(LatticePoint::to_point).collect();
        let c0 = centroid(&pts);
        let disk = (c0, pts.iter().map(|p| p.distance(c0)).fold(0.0, f64::max));
        Some(Homothety {
            scale: scale as i64,
            centers,
            disk,
        })
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn centers(&self) -> &[LatticePoint] {
        &self.centers
    }

    pub fn basis(&self) -> Basis {
        self.centers[0].basis()
    }

    /// `c + s(z − c) = s·z − (s − 1)·c`.
    pub fn expand(&self, z: &LatticePoint, c: &LatticePoint) -> Result<LatticePoint> {
        z.checked_scale(self.scale)?
            .checked_sub(&c.checked_scale(self.scale - 1)?)
    }

    pub fn lambda(&self) -> f64 {
        1.0 / self.scale as f64
    }

    /// Exact orbit gaps of the contracting dual `Ψ`.
    pub fn micro_gaps(&self) -> MicroGaps<'_> {
        MicroGaps { system: self }
    }
}

type Config = Vec<LatticePoint>;

fn sorted(mut v: Config) -> Config {
    v.sort_unstable();
    v.dedup();
    v
}

/// Two-sided enclosure of a distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Enclosure {
    pub lower: f64,
    pub upper: f64,
}

const SPREAD_TOLERANCE: f64 = 1e-13;
const SPREAD_MAX_NODES: usize = 4_000_000;

struct Cell {
    upper: f64,
    depth: usize,
    /// `Ψ_u(0)`; `Ψ_u(v) = λ^depth·v + shift`.
    shift: Point,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.upper.total_cmp(&other.upper).is_eq()
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

/// `d_H(Ψⁿ(C), Ψᴺ(C))` for the contracting dual `Ψ` of a [`Homothety`],
/// where `C` is the set of centers.
///
/// Write `Ψ_w` for the composite along a word `w`. A point of `Ψᴺ(C)` is
/// `Ψ_w(z)` with `|w| = n` and `z ∈ Ψ^{N−n}(C)`; its distance to
/// `Ψⁿ(C) = {Ψ_{w'}(c)}` is `λⁿ·d(z, C + O_w)` where the offsets
/// `O_w = sⁿ(Ψ_{w'}(0) − Ψ_w(0))` are lattice points. Only offsets near
/// the attractor matter, and extending `w` by a letter `a` maps them by
/// `o ↦ s·o + (s − 1)(b − a)` over all letters `b`, so the reachable
/// offset sets form a small finite family. For each of them the farthest
/// point of `Ψ^{N−n}(C)` is found by best-first search over the cells
/// `Ψ_u(D)` of the invariant disk `D`.
pub struct MicroGaps<'a> {
    system: &'a Homothety,
}

impl MicroGaps<'_> {
    /// Offset configurations of all words of length `n`.
    pub fn offset_types(&self, n: usize) -> Result<HashSet<Config>> {
        let h = self.system;
        let rho = h.disk.1;
        // c + o with |o| > 4ρ is farther from D(c₀, ρ) than C itself, and so
        // are all offsets derived from it
        let limit = 4.0 * rho + 1e-9;
        let zero = LatticePoint::zero(h.basis());
        let mut types: HashSet<Config> = HashSet::from([vec![zero]]);
        for _ in 0..n {
            let mut next = HashSet::new();
            for t in &types {
                for a in &h.centers {
                    let mut child = Vec::with_capacity(t.len() * h.centers.len());
                    for o in t {
                        let so = o.checked_scale(h.scale)?;
                        for b in &h.centers {
                            let v = so.checked_add(&b.checked_sub(a)?.checked_scale(h.scale - 1)?)?;
                            if v.to_point().norm() <= limit {
                                child.push(v);
                            }
                        }
                    }
                    next.insert(sorted(child));
                }
            }
            types = next;
        }
        Ok(types)
    }

    /// `max_{z ∈ Ψᵐ(C)} d(z, S)`.
    fn spread(&self, s: &[Point], m: usize) -> Enclosure {
        let h = self.system;
        let (c0, rho) = h.disk;
        let lambda = h.lambda();
        let centers: Vec<Point> = h.centers.iter().map(LatticePoint::to_point).collect();
        let dist = |p: Point| s.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min);
        let image = |scale: f64, shift: Point, v: Point| Point::new(scale * v.x + shift.x, scale * v.y + shift.y);
        let mut lower = centers.iter().map(|c| dist(*c)).fold(0.0, f64::max);
        if m == 0 {
            return Enclosure { lower, upper: lower };
        }
        let mut heap = std::collections::BinaryHeap::new();
        heap.push(Cell {
            upper: dist(c0) + rho,
            depth: 0,
            shift: Point::ORIGIN,
        });
        let mut nodes = 0;
        while let Some(cell) = heap.pop() {
            if cell.upper <= lower + SPREAD_TOLERANCE || nodes >= SPREAD_MAX_NODES {
                return Enclosure {
                    lower,
                    upper: cell.upper.max(lower),
                };
            }
            nodes += 1;
            let scale = lambda.powi(cell.depth as i32);
            let child_scale = scale * lambda;
            for c in &centers {
                // Ψ_{u c}(v) = Ψ_u(λv + (1 − λ)c)
                let shift = image(
                    scale,
                    cell.shift,
                    Point::new((1.0 - lambda) * c.x, (1.0 - lambda) * c.y),
                );
                let exact = centers
                    .iter()
                    .map(|p| dist(image(child_scale, shift, *p)))
                    .fold(0.0, f64::max);
                lower = lower.max(exact);
                if cell.depth + 1 < m {
                    heap.push(Cell {
                        upper: dist(image(child_scale, shift, c0)) + child_scale * rho,
                        depth: cell.depth + 1,
                        shift,
                    });
                }
            }
        }
        Enclosure { lower, upper: lower }
    }

    /// `d_H(Ψⁿ(C), Ψᴺ(C))` for `n ≤ N`.
    pub fn gap(&self, n: usize, big_n: usize) -> Result<Enclosure> {
        if n > big_n {
            return Err(Error::InvalidArgument(format!("need n ≤ N, got {n} > {big_n}")));
        }
        let h = self.system;
        let mut configs = Vec::new();
        for t in self.offset_types(n)? {
            let mut config = Vec::with_capacity(t.len() * h.centers.len());
            for o in &t {
                for c in &h.centers {
                    config.push(o.checked_add(c)?.to_point());
                }
            }
            configs.push(config);
        }
        let scale = h.lambda().powi(n as i32);
        let worst = configs.par_iter().map(|s| self.spread(s, big_n - n)).reduce(
            || Enclosure { lower: 0.0, upper: 0.0 },
            |a, b| Enclosure {
                lower: a.lower.max(b.lower),
                upper: a.upper.max(b.upper),
            },
        );
        Ok(Enclosure {
            lower: scale * worst.lower,
            upper: scale * worst.upper,
        })
    }
}

/// `X₀ = Fix`, `X_{i+1} = ⋃_b f_b(X_i)` without deduplication. When every
/// fixed point is one of the seeds, `X_i` equals `Φⁱ(Fix)` as a set.
pub fn orbit_levels(map: &MultiFunction, depth: usize, max_points: usize) -> Result<Vec<Vec<Point>>> {
    let fix: Vec<Point> = map.branch_fixed_points().into_iter().flatten().collect();
    if fix.is_empty() {
        return Err(Error::NoFixedPoints("no branch has a fixed point".into()));
    }
    let mut levels = vec![fix];
    for step in 0..depth {
        let last = levels.last().expect("non-empty");
        let needed = last.len().saturating_mul(map.branches().len());
        if needed > max_points {
            return Err(Error::Budget {
                budget: max_points,
                depth: step + 1,
                needed,
            });
        }
        let next: Vec<Point> = last
            .par_iter()
            .flat_map_iter(|p| map.branches().iter().map(move |b| b.eval(*p)))
            .collect();
        levels.push(next);
    }
    Ok(levels)
}

/// `d_H(Φⁿ(Fix), Φᴺ(Fix))` by enumeration, for a contracting `map`.
pub fn micro_gap_brute(map: &MultiFunction, n: usize, big_n: usize, max_points: usize) -> Result<f64> {
    let levels = orbit_levels(map, big_n, max_points)?;
    let index = NearestIndex::new(levels[n].clone());
    Ok(index.directed_from(&levels[big_n]))
}

/// `d_H(Φ(Fix), Fix)` computed directly.
pub fn seed_gap(map: &MultiFunction) -> Result<f64> {
    let levels = orbit_levels(map, 1, usize::MAX)?;
    Ok(NearestIndex::new(levels[0].clone()).directed_from(&levels[1]))
}

/// `z ↦ a·z + b` or `z ↦ a·z̄ + b`.
#[derive(Clone, Copy, Debug)]
struct Composite {
    a: Complex64,
    b: Complex64,
    conjugate: bool,
}

impl Composite {
    const IDENTITY: Composite = Composite {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        conjugate: false,
    };

    fn eval(&self, p: Point) -> Point {
        let z = p.to_complex();
        let z = if self.conjugate { z.conj() } else { z };
        Point::from_complex(self.a * z + self.b)
    }

    /// `self ∘ g`.
    fn then_inner(&self, g: &BranchMap) -> Composite {
        let flip = |v: Complex64| if self.conjugate { v.conj() } else { v };
        Composite {
            a: self.a * flip(g.a()),
            b: self.a * flip(g.b()) + self.b,
            conjugate: self.conjugate != (g.kind() == BranchKind::ConjugateAffine),
        }
    }
}

struct Probe {
    lower: f64,
    depth: usize,
    map: Composite,
}

impl PartialEq for Probe {
    fn eq(&self, other: &Self) -> bool {
        self.lower.total_cmp(&other.lower).is_eq()
    }
}

impl Eq for Probe {}

impl PartialOrd for Probe {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Probe {
    // smallest lower bound first
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.lower.total_cmp(&self.lower)
    }
}

/// `d(y, Ψⁿ(Fix))` for a contracting `map`, without enumerating the orbit.
///
/// Best-first search over composites `Ψ_u`: the points of `Ψⁿ(Fix)` below
/// `u` lie in `Ψ_u(D)` for the invariant disk `D`.
pub fn orbit_distance(map: &MultiFunction, y: Point, n: usize) -> Result<f64> {
    let (c0, rho) = invariant_disk(map)?;
    let fix = map.fixed_points()?.to_points();
    let lambda = map.lipschitz();
    let leaf = |m: &Composite| fix.iter().map(|p| m.eval(*p).distance(y)).fold(f64::INFINITY, f64::min);
    let mut best = leaf(&Composite::IDENTITY);
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(Probe {
        lower: (Composite::IDENTITY.eval(c0).distance(y) - rho).max(0.0),
        depth: 0,
        map: Composite::IDENTITY,
    });
    while let Some(probe) = heap.pop() {
        if probe.lower >= best || probe.depth == n {
            if probe.lower >= best {
                break;
            }
            continue;
        }
        let radius = lambda.powi(probe.depth as i32 + 1) * rho;
        for branch in map.branches() {
            let child = probe.map.then_inner(branch);
            // Ψ_u(Fix) ⊆ Ψ_u(Ψ(Fix)) ⊆ Ψⁿ(Fix) for |u| ≤ n
            best = best.min(leaf(&child));
            let lower = (child.eval(c0).distance(y) - radius).max(0.0);
            if lower < best {
                heap.push(Probe {
                    lower,
                    depth: probe.depth + 1,
                    map: child,
                });
            }
        }
    }
    Ok(best)
}

fn screen_coords(embedding: Embedding, p: Point, r: f64) -> [f64; 3] {
    embedding.sphere_point(p, r).coords
}

fn screen_distance(embedding: Embedding, a: Point, b: Point, r: f64) -> f64 {
    let (x, y) = (embedding.sphere_point(a, r), embedding.sphere_point(b, r));
    match embedding {
        Embedding::Projective(_) => x.distance(&y).min(x.distance(&y.antipode())),
        _ => x.distance(&y),
    }
}

/// Index of `i(A)` in the metric of the screen: chordal on the sphere and
/// semi-sphere, `min(‖a − b‖, ‖a + b‖)` on the projective plane.
fn screen_index(embedding: Embedding, points: &[Point], r: f64) -> KdTree<3> {
    let mut coords: Vec<[f64; 3]> = points.iter().map(|p| screen_coords(embedding, *p, r)).collect();
    if let Embedding::Projective(_) = embedding {
        let flipped: Vec<[f64; 3]> = coords.iter().map(|c| c.map(|v| -v)).collect();
        coords.extend(flipped);
    }
    KdTree::new(coords)
}

/// `ρ_H(i(Φᴺ(Fix)), i(Φ^{N+extra}(Fix)))` by enumeration, for an
/// expanding `map`.
pub fn screen_gap_brute(
    map: &MultiFunction,
    embedding: Embedding,
    r: f64,
    big_n: usize,
    extra: usize,
    max_points: usize,
) -> Result<f64> {
    let levels = orbit_levels(map, big_n + extra, max_points)?;
    let index = screen_index(embedding, &levels[big_n], r);
    let queries: Vec<[f64; 3]> = levels[big_n + extra]
        .par_iter()
        .map(|p| screen_coords(embedding, *p, r))
        .collect();
    Ok(index.directed_from(&queries))
}

/// Upper bound on `sup` of the screen distance between `i(y)` and `i(z)`
/// over all descendants `z` of a point `y` outside the window.
fn subtree_spread(embedding: Embedding, y: Point, r: f64, c0: Point, q: f64) -> f64 {
    let ny = y.norm();
    match embedding {
        // descendants stay at least ‖y‖ − 2‖c₀‖ from the origin, and the
        // chord from s∞(x) to the pole is 2r²/√(r² + ‖x‖²)
        Embedding::Spherical(_) => {
            let far = (ny - 2.0 * c0.norm()).max(0.0);
            2.0 * r * r / (r * r + ny * ny).sqrt() + 2.0 * r * r / (r * r + far * far).sqrt()
        }
        // a descendant is q + t(y − q) with t ≥ 1 and ‖q‖ ≤ Q; the ray from
        // (y, −r) towards the horizon direction of y − q bounds the arc
        Embedding::Semispherical | Embedding::Projective(_) => {
            if ny <= q {
                return 2.0 * r;
            }
            r * ((r / ny).atan() + (q / ny).asin())
        }
    }
}

/// Outcome of [`screen_gap_window`].
#[derive(Clone, Debug)]
pub struct ScreenGap {
    /// Upper bound on `ρ_H(i(Φᴺ(Fix)), i(Φ^{N+extra}(Fix)))`.
    pub bound: f64,
    /// Orbit points visited inside the window.
    pub visited: usize,
}

/// Rigorous upper bound on the screen gap for a [`Homothety`] system.
///
/// The orbit is enumerated exactly inside the window disk `D(c₀, R)`.
/// Outside, distances to `c₀` grow along every branch, so a point that
/// leaves never returns, and all of its descendants stay within
/// [`subtree_spread`] of it on the screen.
pub fn screen_gap_window(
    h: &Homothety,
    embedding: Embedding,
    r: f64,
    big_n: usize,
    extra: usize,
    window: f64,
) -> Result<ScreenGap> {
    let (c0, rho) = h.disk;
    let q = c0.norm() + rho;
    let window = window.max(2.0 * rho);
    let inside = |p: &LatticePoint| p.to_point().distance(c0) <= window;
    let mut level: HashMap<LatticePoint, usize> = HashMap::new();
    let mut frontier: Vec<LatticePoint> = Vec::new();
    for c in &h.centers {
        if level.insert(*c, 0).is_none() {
            frontier.push(*c);
        }
    }
    // (parent, child, child level)
    let mut exits: Vec<(LatticePoint, Point, usize)> = Vec::new();
    let total = big_n + extra;
    for l in 1..=total {
        let mut next = Vec::new();
        for p in &frontier {
            for c in &h.centers {
                let y = h.expand(p, c)?;
                if !inside(&y) {
                    exits.push((*p, y.to_point(), l));
                } else if let std::collections::hash_map::Entry::Vacant(e) = level.entry(y) {
                    e.insert(l);
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    let stored: Vec<Point> = level
        .iter()
        .filter(|(_, &l)| l <= big_n)
        .map(|(p, _)| p.to_point())
        .collect();
    let index = screen_index(embedding, &stored, r);
    let error_of = |p: &Point, l: usize| {
        if l <= big_n {
            0.0
        } else {
            index
                .nearest_distance(&screen_coords(embedding, *p, r))
                .unwrap_or(f64::INFINITY)
        }
    };
    let late: Vec<(Point, usize)> = level
        .iter()
        .filter(|(_, &l)| l > big_n)
        .map(|(p, &l)| (p.to_point(), l))
        .collect();
    let inner = late.par_iter().map(|(p, l)| error_of(p, *l)).reduce(|| 0.0, f64::max);
    let outer = exits
        .par_iter()
        .map(|(parent, y, l)| {
            let spread = subtree_spread(embedding, *y, r, c0, q);
            if *l <= big_n {
                return spread;
            }
            let p = parent.to_point();
            let hop = screen_distance(embedding, p, *y, r);
            error_of(&p, level[parent]) + hop + spread
        })
        .reduce(|| 0.0, f64::max);
    Ok(ScreenGap {
        bound: inner.max(outer),
        visited: level.len(),
    })
}

/// Window radius at which a leaving point's subtree spread drops below
/// `target`.
pub fn window_for(h: &Homothety, embedding: Embedding, r: f64, target: f64) -> f64 {
    let (c0, rho) = h.disk;
    let q = c0.norm() + rho;
    let mut radius = 2.0 * rho + 2.0 * c0.norm() + r;
    while subtree_spread(embedding, Point::new(radius - c0.norm(), 0.0), r, c0, q) > target {
        radius *= 1.25;
    }
    radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;
    use crate::project::{ProjectiveChart, SphereView};

    #[test]
    fn recognises_homotheties() {
        for name in [
            "cantor",
            "cross",
            "sierpinski-triangle",
            "snowflake6",
            "snowflake7",
            "carpet",
        ] {
            assert!(Homothety::from_map(&preset(name).unwrap().map).is_some(), "{name}");
        }
        assert!(Homothety::from_map(&preset("koch").unwrap().map).is_none());
    }

    #[test]
    fn exact_gaps_match_enumeration() {
        for name in ["cross", "sierpinski-triangle", "snowflake6", "carpet"] {
            let p = preset(name).unwrap();
            let h = Homothety::from_map(&p.map).unwrap();
            let gaps = h.micro_gaps();
            for big_n in [3, 5] {
                for n in 0..=big_n {
                    let exact = gaps.gap(n, big_n).unwrap();
                    let brute = micro_gap_brute(&p.inverse, n, big_n, 1 << 24).unwrap();
                    assert!(
                        exact.lower <= brute + 1e-12 && brute <= exact.upper + 1e-12,
                        "{name} n={n} N={big_n}: {exact:?} vs {brute}"
                    );
                    assert!(exact.upper - exact.lower <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn window_bound_dominates_enumeration() {
        let embeddings = [
            Embedding::Spherical(SphereView::Side),
            Embedding::Semispherical,
            Embedding::Projective(ProjectiveChart::Disk),
        ];
        for name in ["cantor", "cross", "sierpinski-triangle"] {
            let p = preset(name).unwrap();
            let h = Homothety::from_map(&p.map).unwrap();
            for e in embeddings {
                for big_n in [2, 4] {
                    let brute = screen_gap_brute(&p.map, e, 1.0, big_n, 3, 1 << 24).unwrap();
                    for window in [5.0, 50.0] {
                        let bound = screen_gap_window(&h, e, 1.0, big_n, 3, window).unwrap().bound;
                        assert!(
                            bound >= brute - 1e-12,
                            "{name} {e:?} N={big_n} R={window}: {bound} < {brute}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn orbit_distance_matches_enumeration() {
        for p in crate::presets::all_presets() {
            let levels = orbit_levels(&p.inverse, 4, 1 << 20).unwrap();
            let index = NearestIndex::new(levels[4].clone());
            for (i, q) in [(0.3, 0.1), (-2.0, 0.7), (0.01, -0.02), (5.0, 5.0)]
                .into_iter()
                .enumerate()
            {
                let q = Point::new(q.0, q.1);
                let d = orbit_distance(&p.inverse, q, 4).unwrap();
                let brute = index.nearest_distance(q).unwrap();
                assert!((d - brute).abs() < 1e-12, "{} probe {i}: {d} vs {brute}", p.name);
            }
            for y in &levels[3] {
                assert!(orbit_distance(&p.inverse, *y, 4).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn huge_window_is_tight_on_the_sphere() {
        // with every point inside the window nothing is estimated
        let p = preset("cantor").unwrap();
        let h = Homothety::from_map(&p.map).unwrap();
        let e = Embedding::Spherical(SphereView::Side);
        let brute = screen_gap_brute(&p.map, e, 1.0, 3, 2, 1 << 20).unwrap();
        let bound = screen_gap_window(&h, e, 1.0, 3, 2, 1e6).unwrap().bound;
        assert!((bound - brute).abs() < 1e-12);
    }
}
