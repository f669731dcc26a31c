//! Macro-fractals: orbits of expanding multi-functions.
//!
//! An expanding `Φ` pushes points away from the micro-fractal `F[Φ⁻¹]`:
//! whenever `y ∈ Φ(x)`, `d(y, F[Φ⁻¹]) ≥ d(x, F[Φ⁻¹])/λ` with `λ = Lip(Φ⁻¹)`.
//! Once some orbit layer keeps a distance `δ > 0` from `F[Φ⁻¹]`, the window
//! `Eₙ = {x : d(x, F[Φ⁻¹]) ≤ δ/λⁿ}` sees no new points after depth `k + n`.
//! [`cut_zoom`] uses this to draw a screen exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{Basis, LatticePoint, NearestIndex, OrbitPoint, Point, PointSet, Rect, Tag};
use crate::micro::{render_to_precision, sample_chains};
use crate::multifunc::MultiMap;

/// Layers `A₀ = Fix[Φ]`, `A_{i+1} = Φ(A_i) ∖ A_i`.
#[derive(Clone, Debug)]
pub struct LayeredOrbit<P: OrbitPoint> {
    layers: Vec<PointSet<P>>,
}

impl<P: OrbitPoint> LayeredOrbit<P> {
    pub fn layers(&self) -> &[PointSet<P>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// `⋃ A_i`, which equals `Φᵐ(Fix[Φ])`.
    pub fn union(&self) -> PointSet<P> {
        let total = self.layers.iter().map(PointSet::len).sum();
        let mut out = PointSet::with_capacity(self.layers[0].policy(), total);
        for layer in &self.layers {
            out.extend_from(layer);
        }
        out
    }

    /// `Φᵏ(Fix) ∖ Φᵏ⁻¹(Fix)`: points of `A_k` absent from every earlier layer.
    pub fn fresh(&self, k: usize) -> PointSet<P> {
        let layer = &self.layers[k];
        layer.filter(|p, _| !self.layers[..k].iter().any(|l| l.contains(p)))
    }
}

/// `Lip(Φ⁻¹)`, which has to be below 1.
pub fn expansion_constant<M: MultiMap>(map: &M) -> Result<f64> {
    let lambda = map.float_form().inverse().lipschitz();
    if lambda < 1.0 {
        Ok(lambda)
    } else {
        Err(Error::NotExpanding(lambda))
    }
}

/// Layered orbit of depth `m`.
pub fn expand<M: MultiMap>(map: &M, m: usize, budget: usize) -> Result<LayeredOrbit<M::Point>> {
    expand_pruned(map, m, |_| true, budget)
}

/// Layered orbit of depth `m` that drops every point failing `keep`.
///
/// When `keep` holds on a set `G` that contains every predecessor of its
/// own points, the union still contains `Φᵐ(Fix) ∩ G`. Sublevel sets of
/// the distance to `F[Φ⁻¹]` have this property.
pub fn expand_pruned<M, K>(map: &M, m: usize, keep: K, budget: usize) -> Result<LayeredOrbit<M::Point>>
where
    M: MultiMap,
    K: Fn(&M::Point) -> bool,
{
    expansion_constant(map)?;
    let mut layers = vec![map.fixed_points()?.filter(|p, _| keep(p))];
    for step in 0..m {
        let last = layers.last().expect("at least one layer");
        let needed = last.len().saturating_mul(map.branch_count());
        if needed > budget {
            return Err(Error::Budget {
                budget,
                depth: step + 1,
                needed,
            });
        }
        let image = map.apply(last)?;
        let next = image.filter(|p, _| keep(p) && !last.contains(p));
        layers.push(next);
    }
    Ok(LayeredOrbit { layers })
}

/// The micro-fractal approximation a certificate was measured against.
#[derive(Clone, Debug)]
pub struct MicroSummary {
    pub points: Vec<Point>,
    pub depth: usize,
    /// Certified Hausdorff distance to `F[Φ⁻¹]`.
    pub bound: f64,
    /// Disk containing `F[Φ⁻¹]`.
    pub center: Point,
    pub radius: f64,
}

/// Certified lower bound `δ` on the distance from the `k`-th fresh layer
/// to `F[Φ⁻¹]`.
#[derive(Clone, Debug)]
pub struct RepellingCertificate {
    pub k: usize,
    pub delta: f64,
    /// Distance to the micro approximation; at least the true distance.
    pub measured: f64,
    pub lambda: f64,
    pub micro_precision: f64,
    pub micro: MicroSummary,
}

#[derive(Clone, Debug)]
pub enum RepellingOutcome {
    Certified(RepellingCertificate),
    /// `Φᵏ(Fix) = Φᵏ⁻¹(Fix)`: the orbit is finite and equals its first
    /// `k − 1` iterates.
    FiniteOrbit {
        k: usize,
    },
}

impl RepellingOutcome {
    pub fn certificate(self) -> Option<RepellingCertificate> {
        match self {
            RepellingOutcome::Certified(c) => Some(c),
            RepellingOutcome::FiniteOrbit { .. } => None,
        }
    }
}

/// The micro-fractal of `Φ⁻¹` to precision `epsilon`.
pub fn dual_micro<M: MultiMap>(map: &M, epsilon: f64, budget: usize) -> Result<MicroSummary> {
    let approx = render_to_precision(&map.float_form().inverse(), epsilon, budget)?;
    let (center, radius) = approx.enclosing_disk();
    Ok(MicroSummary {
        points: approx.points.to_points(),
        depth: approx.depth,
        bound: approx.bound,
        center,
        radius,
    })
}

fn min_distance(set: &[Point], micro: &[Point]) -> f64 {
    NearestIndex::new(micro.to_vec())
        .min_distance_from(set)
        .expect("both sets are non-empty")
}

/// `δ = d(A_k, F̃) − ε`, where `F̃ ⊆ F[Φ⁻¹]` is the micro orbit of the
/// fixed points to precision `ε`. Since `F̃ ⊆ F[Φ⁻¹]` and `F[Φ⁻¹]` lies in
/// the `ε`-neighbourhood of `F̃`, `δ` never exceeds the true distance.
pub fn certify_repelling<M: MultiMap>(
    map: &M,
    k: usize,
    micro_precision: f64,
    budget: usize,
) -> Result<RepellingOutcome> {
    if k == 0 {
        return Err(Error::InvalidArgument("layer index k starts at 1".into()));
    }
    if micro_precision.is_nan() || micro_precision <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "micro precision must be positive, got {micro_precision}"
        )));
    }
    let lambda = expansion_constant(map)?;
    let fresh = expand(map, k, budget)?.fresh(k);
    if fresh.is_empty() {
        return Ok(RepellingOutcome::FiniteOrbit { k });
    }
    let micro = dual_micro(map, micro_precision, budget)?;
    let measured = min_distance(&fresh.to_points(), &micro.points);
    let delta = measured - micro_precision;
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::CertificationFailed {
            k,
            measured,
            precision: micro_precision,
        });
    }
    Ok(RepellingOutcome::Certified(RepellingCertificate {
        k,
        delta,
        measured,
        lambda,
        micro_precision,
        micro,
    }))
}

const MAX_DEFAULT_K: usize = 8;

/// Certificate at the smallest `k` that certifies.
///
/// The micro precision starts at `10⁻²` of a coarse measurement of the
/// layer distance and is refined tenfold once if that fails.
pub fn certify_default<M: MultiMap>(map: &M, budget: usize) -> Result<RepellingOutcome> {
    let mut last_err = None;
    for k in 1..=MAX_DEFAULT_K {
        let fresh = expand(map, k, budget)?.fresh(k);
        if fresh.is_empty() {
            return Ok(RepellingOutcome::FiniteOrbit { k });
        }
        let coarse = dual_micro(map, 0.05 * map.float_form().scene_scale(), budget)?;
        let rough = min_distance(&fresh.to_points(), &coarse.points);
        let mut precision = 1e-2 * rough;
        if precision.is_nan() || precision <= 0.0 {
            continue;
        }
        for _ in 0..2 {
            match certify_repelling(map, k, precision, budget) {
                Ok(outcome) => return Ok(outcome),
                Err(e @ Error::CertificationFailed { .. }) => {
                    last_err = Some(e);
                    precision /= 10.0;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Err(last_err.unwrap_or(Error::CertificationFailed {
        k: MAX_DEFAULT_K,
        measured: 0.0,
        precision: 0.0,
    }))
}

/// Smallest `n` with `δ/λⁿ ≥ radius`.
pub fn window_depth(delta: f64, lambda: f64, radius: f64) -> usize {
    assert!(delta > 0.0 && lambda > 0.0 && lambda < 1.0);
    let target = radius * (1.0 - 1e-12);
    let mut n = 0;
    while delta / lambda.powi(n as i32) < target {
        n += 1;
    }
    n
}

struct Cell {
    upper: f64,
    rect: Rect,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.upper.total_cmp(&other.upper) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

const RADIUS_REL_TOL: f64 = 1e-9;
const RADIUS_MAX_CELLS: usize = 1_000_000;

/// Upper bound on `sup_{x ∈ screen} d(x, micro)`.
///
/// Branch and bound over sub-rectangles: a rectangle with center `c` and
/// half-diagonal `h` has `sup d(x, ·) ≤ d(c, ·) + h`.
pub fn screen_radius(micro: &[Point], screen: Rect) -> f64 {
    let index = NearestIndex::new(micro.to_vec());
    let dist = |p: Point| index.nearest_distance(p).expect("micro approximation is non-empty");
    let mut lower = screen.corners().into_iter().map(dist).fold(0.0, f64::max);
    let mut heap = BinaryHeap::new();
    let c = dist(screen.center());
    lower = lower.max(c);
    heap.push(Cell {
        upper: c + screen.half_diagonal(),
        rect: screen,
    });
    let mut processed = 0;
    while let Some(cell) = heap.pop() {
        if cell.upper <= lower * (1.0 + RADIUS_REL_TOL) + f64::MIN_POSITIVE || processed >= RADIUS_MAX_CELLS {
            return cell.upper;
        }
        processed += 1;
        for sub in cell.rect.split() {
            let d = dist(sub.center());
            lower = lower.max(d);
            heap.push(Cell {
                upper: d + sub.half_diagonal(),
                rect: sub,
            });
        }
    }
    lower
}

fn keep_within<P: OrbitPoint>(center: Point, disk_radius: f64, reach: f64) -> impl Fn(&P) -> bool {
    let limit = disk_radius + reach * (1.0 + 1e-9) + 1e-9;
    move |p: &P| p.to_point().distance(center) <= limit
}

/// `F[Φ] ∩ screen` with the depth that certifies it.
#[derive(Clone, Debug)]
pub struct CutZoom<P: OrbitPoint> {
    pub points: PointSet<P>,
    pub k: usize,
    pub n: usize,
    pub depth: usize,
    /// Upper bound on the distance from the screen to `F[Φ⁻¹]`.
    pub radius_bound: f64,
}

/// `Φ^{k+n}(Fix[Φ]) ∩ screen`, which equals `F[Φ] ∩ screen`.
///
/// Points whose distance to `F[Φ⁻¹]` provably exceeds the screen radius
/// are pruned during expansion; none of their descendants can return.
pub fn cut_zoom<M: MultiMap>(
    map: &M,
    cert: &RepellingCertificate,
    screen: Rect,
    budget: usize,
) -> Result<CutZoom<M::Point>> {
    let radius_bound = screen_radius(&cert.micro.points, screen);
    let n = window_depth(cert.delta, cert.lambda, radius_bound);
    let depth = cert.k + n;
    let keep = keep_within(cert.micro.center, cert.micro.radius, radius_bound);
    let orbit = expand_pruned(map, depth, keep, budget).map_err(|e| match e {
        Error::Budget { budget, needed, .. } => Error::Budget { budget, depth, needed },
        other => other,
    })?;
    let points = orbit.union().filter(|p, _| screen.contains(p.to_point()));
    Ok(CutZoom {
        points,
        k: cert.k,
        n,
        depth,
        radius_bound,
    })
}

/// `Φⁿ(Fix)` plus `samples_per_point` random chains of length `m` from each
/// of its points. Always a subset of `Φ^{n+m}(Fix)`.
pub fn random_expand<M: MultiMap>(
    map: &M,
    m: usize,
    n: usize,
    samples_per_point: usize,
    seed: u64,
    budget: usize,
) -> Result<PointSet<M::Point>> {
    let mut base = expand(map, n, budget)?.union();
    if samples_per_point == 0 || m == 0 {
        return Ok(base);
    }
    let chains = base.len().saturating_mul(samples_per_point);
    let sampled = sample_chains(map, &base, chains, m, seed, |j, _| j / samples_per_point)?;
    base.extend_from(&sampled);
    Ok(base)
}

/// `Φⁿ({0, 1})` for `Φ(x) = {3x, 3x − 2}` in closed form: `−M_n` (the orbit
/// of 0, tag 0) and `M_n + 1` (the orbit of 1, tag 1), where `M_n` holds
/// the sums `Σ_{i<n} 2x_i 3^i`.
pub fn macro_cantor_oracle(n: usize) -> Result<PointSet<LatticePoint>> {
    if n > 39 {
        return Err(Error::LatticeOverflow);
    }
    let mut sums = vec![0i64];
    for i in 0..n {
        let w = 2 * 3i64.pow(i as u32);
        let shifted: Vec<i64> = sums.iter().map(|s| s + w).collect();
        sums.extend(shifted);
    }
    sums.sort_unstable();
    let mut set = PointSet::with_capacity(crate::geometry::DedupPolicy::Exact, 2 * sums.len());
    for s in &sums {
        set.insert(LatticePoint::integer(-s), Tag(0));
    }
    for s in &sums {
        set.insert(LatticePoint::new(Basis::Integer, 1 + s, 0)?, Tag(1));
    }
    Ok(set)
}
