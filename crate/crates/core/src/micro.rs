//! Micro-fractals: the attractors of contracting multi-functions.
//!
//! [`iterate`] applies `Φ` to a seed set `n` times and attaches the Banach
//! bound `λⁿ/(1−λ)·d_H(Φ(B), B)` on the Hausdorff distance to the attractor.
//! [`render_to_precision`] picks the smallest `n` whose bound is below a
//! target. [`chaos_game`] samples random branch sequences instead of
//! enumerating all of them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{hausdorff, OrbitPoint, Point, PointSet, Tag};
use crate::multifunc::{orbit, MultiFunction, MultiMap};

/// Default cap on the number of candidate points of one orbit step.
pub const DEFAULT_BUDGET: usize = 10_000_000;

const CHAIN_CHUNK: usize = 1024;

/// `Φⁿ(B)` together with its certified distance to the attractor.
#[derive(Clone, Debug)]
pub struct MicroApprox<P: OrbitPoint> {
    pub points: PointSet<P>,
    pub depth: usize,
    /// Upper bound on `d_H(F[Φ], Φⁿ(B))`.
    pub bound: f64,
    pub lambda: f64,
    /// `d_H(Φ(B), B)`.
    pub seed_gap: f64,
    pub seed: PointSet<P>,
}

impl<P: OrbitPoint> MicroApprox<P> {
    /// A disk `(center, radius)` that contains the attractor.
    pub fn enclosing_disk(&self) -> (Point, f64) {
        let pts = self.points.to_points();
        let center = centroid(&pts);
        let radius = pts.iter().map(|p| p.distance(center)).fold(0.0, f64::max);
        (center, radius + self.bound)
    }
}

/// `λⁿ/(1−λ)·gap`.
pub fn certified_bound(lambda: f64, gap: f64, n: usize) -> f64 {
    lambda.powi(n as i32) / (1.0 - lambda) * gap
}

fn contraction_constant<M: MultiMap>(map: &M) -> Result<f64> {
    let lambda = map.lipschitz();
    if lambda < 1.0 {
        Ok(lambda)
    } else {
        Err(Error::NotContracting(lambda))
    }
}

fn seed_gap<M: MultiMap>(map: &M, seed: &PointSet<M::Point>) -> Result<f64> {
    let image = map.apply(seed)?;
    Ok(hausdorff(&image.to_points(), &seed.to_points())
        .finite()
        .expect("both sets are non-empty"))
}

/// `Φⁿ(B)` with its Banach bound.
pub fn iterate<M: MultiMap>(
    map: &M,
    seed: &PointSet<M::Point>,
    n: usize,
    budget: usize,
) -> Result<MicroApprox<M::Point>> {
    let lambda = contraction_constant(map)?;
    if seed.is_empty() {
        return Err(Error::EmptySet);
    }
    let gap = seed_gap(map, seed)?;
    let points = orbit(map, seed, n, budget)?;
    Ok(MicroApprox {
        points,
        depth: n,
        bound: certified_bound(lambda, gap, n),
        lambda,
        seed_gap: gap,
        seed: seed.clone(),
    })
}

/// Smallest `n` with `λⁿ/(1−λ)·gap < ε`.
pub fn depth_for_precision(lambda: f64, gap: f64, epsilon: f64) -> usize {
    let mut n = 0;
    while certified_bound(lambda, gap, n) >= epsilon {
        n += 1;
    }
    n
}

/// `Φⁿ(Fix[Φ])` for the smallest `n` whose bound is below `epsilon`.
pub fn render_to_precision<M: MultiMap>(map: &M, epsilon: f64, budget: usize) -> Result<MicroApprox<M::Point>> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "precision must be positive, got {epsilon}"
        )));
    }
    let lambda = contraction_constant(map)?;
    let seed = map.fixed_points()?;
    let gap = seed_gap(map, &seed)?;
    iterate(map, &seed, depth_for_precision(lambda, gap, epsilon), budget)
}

/// Mean of a non-empty point list.
pub fn centroid(points: &[Point]) -> Point {
    let n = points.len().max(1) as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(x, y), p| (x + p.x, y + p.y));
    Point::new(sx / n, sy / n)
}

/// A disk `(center, radius)` mapped into itself by every branch, hence
/// containing the attractor. Centered at the mean of the fixed points.
pub fn invariant_disk(map: &MultiFunction) -> Result<(Point, f64)> {
    let lambda = contraction_constant(map)?;
    let fixed: Vec<Point> = map.branch_fixed_points().into_iter().flatten().collect();
    if fixed.len() != map.branches().len() {
        return Err(Error::NoFixedPoints("every branch of a contraction has one".into()));
    }
    let center = centroid(&fixed);
    // |f(z) − c| ≤ |p − c| + λ(ρ + |p − c|) ≤ ρ  ⇔  ρ ≥ (1+λ)/(1−λ)·|p − c|
    let radius = fixed
        .iter()
        .map(|p| (1.0 + lambda) / (1.0 - lambda) * p.distance(center))
        .fold(0.0, f64::max);
    Ok((center, radius))
}

/// Random orbit chains `x₀, x₁, …, x_n` with `x_{i+1}` drawn uniformly from
/// the branch images of `x_i`. `start(j, rng)` picks the start index of
/// chain `j` in `starts`.
///
/// Chains are generated in fixed-size chunks; chunk `c` uses ChaCha8 seeded
/// with `seed` on stream `c`, so the output is the same for every thread
/// count.
pub(crate) fn sample_chains<M, S>(
    map: &M,
    starts: &PointSet<M::Point>,
    chains: usize,
    length: usize,
    seed: u64,
    start: S,
) -> Result<PointSet<M::Point>>
where
    M: MultiMap,
    S: Fn(usize, &mut ChaCha8Rng) -> usize + Sync,
{
    let branches = map.branch_count();
    let chunk_count = chains.div_ceil(CHAIN_CHUNK);
    let chunks: Vec<Vec<(M::Point, Tag)>> = (0..chunk_count)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let lo = c * CHAIN_CHUNK;
            let hi = chains.min(lo + CHAIN_CHUNK);
            let mut out = Vec::with_capacity((hi - lo) * (length + 1));
            for j in lo..hi {
                let i = start(j, &mut rng);
                let tag = starts.tags()[i];
                let mut x = starts.points()[i].clone();
                out.push((x.clone(), tag));
                for _ in 0..length {
                    x = map.branch_image(rng.random_range(0..branches), &x)?;
                    out.push((x.clone(), tag));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut set = PointSet::new(map.dedup_policy());
    for chunk in chunks {
        for (p, t) in chunk {
            set.insert(p, t);
        }
    }
    Ok(set)
}

/// Union of `samples` random chains of length `n` started at uniformly
/// chosen fixed points. Always a subset of `Φⁿ(Fix[Φ])`.
pub fn chaos_game<M: MultiMap>(map: &M, n: usize, samples: usize, seed: u64) -> Result<PointSet<M::Point>> {
    contraction_constant(map)?;
    let fix = map.fixed_points()?;
    let count = fix.len();
    sample_chains(map, &fix, samples, n, seed, |_, rng| rng.random_range(0..count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{directed_hausdorff, DedupPolicy};
    use crate::presets::{all_presets, cantor_exact_inverse, preset, rational};
    use proptest::prelude::*;

    #[test]
    fn cantor_two_steps_from_zero() {
        let inv = cantor_exact_inverse();
        let seed = PointSet::from_points(DedupPolicy::Exact, [rational(0, 1)]);
        let approx = iterate(&inv, &seed, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(
            approx.points.sorted_keys(),
            vec![rational(0, 1), rational(2, 9), rational(2, 3), rational(8, 9)]
        );
        assert!((approx.seed_gap - 2.0 / 3.0).abs() < 1e-15);
        assert!((approx.bound - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn depth_zero_keeps_the_seed() {
        let p = preset("cross").unwrap();
        let fix = p.inverse.fixed_points().unwrap();
        let approx = iterate(&p.inverse, &fix, 0, DEFAULT_BUDGET).unwrap();
        assert!(approx.points.same_points(&fix));
        assert!((approx.bound - approx.seed_gap / (1.0 - 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn one_step_is_apply() {
        for p in all_presets() {
            let fix = p.inverse.fixed_points().unwrap();
            let approx = iterate(&p.inverse, &fix, 1, DEFAULT_BUDGET).unwrap();
            assert!(approx.points.same_points(&p.inverse.apply(&fix).unwrap()));
        }
    }

    #[test]
    fn expanding_map_is_rejected() {
        let p = preset("cross").unwrap();
        let fix = p.map.fixed_points().unwrap();
        assert!(matches!(
            iterate(&p.map, &fix, 1, DEFAULT_BUDGET),
            Err(Error::NotContracting(_))
        ));
    }

    #[test]
    fn cantor_precision_depth() {
        let approx = render_to_precision(&cantor_exact_inverse(), 0.01, DEFAULT_BUDGET).unwrap();
        assert!((approx.seed_gap - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(approx.depth, 4);
        assert!(approx.bound < 0.01);
        assert!(certified_bound(1.0 / 3.0, 1.0 / 3.0, 3) >= 0.01);
    }

    #[test]
    fn coarse_precision_needs_no_iteration() {
        let p = preset("cross").unwrap();
        let approx = render_to_precision(&p.inverse, 100.0, DEFAULT_BUDGET).unwrap();
        assert_eq!(approx.depth, 0);
        assert!(approx.points.same_points(&p.inverse.fixed_points().unwrap()));
        let half = render_to_precision(&p.inverse, 0.5, DEFAULT_BUDGET).unwrap();
        assert!(half.bound < 0.5);
    }

    #[test]
    fn chaos_game_edge_cases() {
        let p = preset("cross").unwrap();
        assert!(chaos_game(&p.inverse, 4, 0, 1).unwrap().is_empty());
        let fix = p.inverse.fixed_points().unwrap();
        assert!(near_subset(&chaos_game(&p.inverse, 0, 50, 1).unwrap(), &fix));
    }

    #[test]
    fn chaos_game_covers_small_cantor_orbit() {
        let inv = cantor_exact_inverse();
        let fix = inv.fixed_points().unwrap();
        let full = iterate(&inv, &fix, 3, DEFAULT_BUDGET).unwrap().points;
        let sampled = chaos_game(&inv, 3, 10 * 8 * 3, 7).unwrap();
        assert!(sampled.is_subset_of(&full));
        assert!(sampled.same_points(&full));
    }

    #[test]
    fn chaos_game_is_reproducible() {
        let p = preset("koch").unwrap();
        let a = chaos_game(&p.inverse, 12, 5000, 42).unwrap();
        let b = chaos_game(&p.inverse, 12, 5000, 42).unwrap();
        assert_eq!(a.to_tagged_points(), b.to_tagged_points());
        let c = chaos_game(&p.inverse, 12, 5000, 43).unwrap();
        assert_ne!(a.sorted_keys(), c.sorted_keys());
    }

    #[test]
    fn invariant_disk_contains_the_orbit() {
        for p in all_presets() {
            let (c, r) = invariant_disk(&p.inverse).unwrap();
            let fix = p.inverse.fixed_points().unwrap();
            let approx = iterate(&p.inverse, &fix, 4, DEFAULT_BUDGET).unwrap();
            assert!(
                approx.points.points().iter().all(|q| q.distance(c) <= r + 1e-12),
                "{}",
                p.name
            );
        }
    }

    #[test]
    fn orbit_grows_monotonically() {
        for p in all_presets() {
            let fix = p.inverse.fixed_points().unwrap();
            let mut prev = fix.clone();
            for n in 1..=4 {
                let next = iterate(&p.inverse, &fix, n, DEFAULT_BUDGET).unwrap().points;
                assert!(near_subset(&prev, &next), "{} at {n}", p.name);
                prev = next;
            }
        }
    }

    #[test]
    fn approximate_invariance_at_depth_ten() {
        for p in all_presets().into_iter().filter(|p| p.inverse.branches().len() <= 3) {
            let fix = p.inverse.fixed_points().unwrap();
            let approx = iterate(&p.inverse, &fix, 10, DEFAULT_BUDGET).unwrap();
            let image = p.inverse.apply(&approx.points).unwrap();
            let d = hausdorff(&image.to_points(), &approx.points.to_points())
                .finite()
                .unwrap();
            assert!(d <= 2.0 * approx.bound, "{}", p.name);
        }
    }

    #[test]
    fn cantor_points_have_even_ternary_digits() {
        let inv = cantor_exact_inverse();
        let seed = inv.fixed_points().unwrap();
        for n in 0..=8 {
            let approx = iterate(&inv, &seed, n, DEFAULT_BUDGET).unwrap();
            let denom = 3i128.pow(n as u32);
            for x in approx.points.points() {
                let scaled = *x * rational(denom, 1);
                assert!(scaled.is_integer());
                // x = Σ_{k≤n} 2x_k 3^{−k} + e·3^{−n} with e ∈ {0, 1}; the
                // e = 1 tail is 0.0…0222…₃, the orbit of the seed 1
                let v = scaled.to_integer();
                assert!(even_digits(v) || even_digits(v - 1), "{x} at depth {n}");
            }
        }
    }

    fn even_digits(mut v: i128) -> bool {
        while v > 0 {
            if v % 3 == 1 {
                return false;
            }
            v /= 3;
        }
        v == 0
    }

    fn near_subset(a: &PointSet<Point>, b: &PointSet<Point>) -> bool {
        directed_hausdorff(&a.to_points(), &b.to_points()).finite().unwrap() <= 1e-9
    }

    fn small_set() -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Point::new(x, y)), 1..6)
    }

    proptest! {
        #[test]
        fn set_map_contracts(a in small_set(), b in small_set()) {
            for p in all_presets() {
                let policy = p.inverse.dedup_policy();
                let sa = PointSet::from_points(policy, a.clone());
                let sb = PointSet::from_points(policy, b.clone());
                let before = hausdorff(&sa.to_points(), &sb.to_points()).finite().unwrap();
                let ia = p.inverse.apply(&sa).unwrap();
                let ib = p.inverse.apply(&sb).unwrap();
                let after = hausdorff(&ia.to_points(), &ib.to_points()).finite().unwrap();
                prop_assert!(after <= p.expected_lambda * before + 1e-9);
            }
        }

        #[test]
        fn chaos_game_stays_in_the_orbit(seed in any::<u64>(), n in 0usize..6) {
            for p in all_presets() {
                let fix = p.inverse.fixed_points().unwrap();
                let full = iterate(&p.inverse, &fix, n, DEFAULT_BUDGET).unwrap().points;
                prop_assert!(near_subset(&chaos_game(&p.inverse, n, 200, seed).unwrap(), &full));
            }
        }
    }
}
