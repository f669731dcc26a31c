//! The desk-scale check suite behind `dualfractal verify`.
//!
//! Each check compares an engine against an independent oracle or a
//! closed-form value and reports one pass/fail line.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, ErrorCategory, Result};
use crate::geometry::{directed_hausdorff, hausdorff, DedupPolicy, OrbitPoint, Point, PointSet};
use crate::job::{golden_jobs, render};
use crate::macro_fractal::{certify_repelling, expand, macro_cantor_oracle, RepellingOutcome};
use crate::micro::{chaos_game, iterate, DEFAULT_BUDGET};
use crate::multifunc::MultiMap;
use crate::presets::{all_presets, cantor_exact_inverse, cantor_micro_oracle, Preset};
use crate::project::{
    semispherical_embed, semispherical_image, spherical_embed, stereographic_project, Embedding, ProjectiveChart,
    SphereView,
};
use crate::reference::{orbit_distance, screen_gap_brute, screen_gap_window, seed_gap, window_for, Homothety};

/// Depth of the reference orbit in the Banach-rate check.
pub const RATE_REFERENCE_DEPTH: usize = 18;
pub const RATE_MAX_N: usize = 12;
pub const RATE_SLACK: f64 = 1e-9;
/// Extra levels in the screen-approximation check.
pub const SCREEN_EXTRA: usize = 5;
/// Required screen accuracy, in units of `r`.
pub const SCREEN_TOLERANCE: f64 = 0.01;

/// Lipschitz constants of the contracting duals.
pub const EXPECTED_LAMBDA: [(&str, f64); 7] = [
    ("cantor", 1.0 / 3.0),
    ("cross", 1.0 / 3.0),
    ("sierpinski-triangle", 0.5),
    ("koch", 0.577_350_269_189_625_8),
    ("snowflake6", 1.0 / 3.0),
    ("snowflake7", 1.0 / 3.0),
    ("carpet", 1.0 / 3.0),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckInfo {
    pub id: u32,
    pub group: &'static str,
    pub title: &'static str,
}

pub const CHECKS: [CheckInfo; 12] = [
    CheckInfo {
        id: 1,
        group: "cantor",
        title: "macro Cantor orbit equals (-M) u (M+1), n <= 12",
    },
    CheckInfo {
        id: 2,
        group: "cantor",
        title: "micro Cantor orbit equals the ternary sums, n <= 12",
    },
    CheckInfo {
        id: 3,
        group: "micro",
        title: "Banach rate bound against a depth-18 orbit, n <= 12",
    },
    CheckInfo {
        id: 4,
        group: "macro",
        title: "cross layer distance delta in (0.999, 1]",
    },
    CheckInfo {
        id: 5,
        group: "macro",
        title: "window E_n sees nothing new after depth k + n",
    },
    CheckInfo {
        id: 6,
        group: "macro",
        title: "layered expansion equals naive iteration, m <= 6",
    },
    CheckInfo {
        id: 7,
        group: "presets",
        title: "Lipschitz constants match their closed forms",
    },
    CheckInfo {
        id: 8,
        group: "macro",
        title: "cross orbit of depth 6 is 1-discrete with <= 5^7 points",
    },
    CheckInfo {
        id: 9,
        group: "micro",
        title: "chaos game stays inside the deterministic orbit, n <= 8",
    },
    CheckInfo {
        id: 10,
        group: "project",
        title: "projection round trips and sphere equations on 10^4 points",
    },
    CheckInfo {
        id: 11,
        group: "project",
        title: "screen gap between depths N and N+5 below 0.01 r",
    },
    CheckInfo {
        id: 12,
        group: "determinism",
        title: "renders are byte-identical and match the golden files",
    },
];

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub info: CheckInfo,
    pub passed: bool,
    pub detail: String,
    pub category: Option<ErrorCategory>,
    pub seconds: f64,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let category = self.category.map(|c| format!(" [{}]", c.as_str())).unwrap_or_default();
        format!(
            "{status} {:>2} {:<11} {} ({:.2} s){category}: {}",
            self.info.id, self.info.group, self.info.title, self.seconds, self.detail
        )
    }
}

/// A failed check: its message and, when an engine error caused it, the
/// error class.
struct Failure {
    message: String,
    category: Option<ErrorCategory>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            category: Some(e.category()),
            message: e.to_string(),
        }
    }
}

fn fail(message: String) -> Failure {
    Failure {
        message,
        category: None,
    }
}

type CheckResult = std::result::Result<String, Failure>;

pub struct Verifier {
    presets: Vec<Preset>,
    golden_dir: Option<PathBuf>,
}

impl Default for Verifier {
    fn default() -> Self {
        Verifier::new()
    }
}

impl Verifier {
    /// All presets; golden files from the crate's test directory when it
    /// is present.
    pub fn new() -> Self {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden");
        Verifier {
            presets: all_presets(),
            golden_dir: dir.is_dir().then_some(dir),
        }
    }

    pub fn with_presets(mut self, presets: Vec<Preset>) -> Self {
        self.presets = presets;
        self
    }

    pub fn with_golden_dir(mut self, dir: Option<PathBuf>) -> Self {
        self.golden_dir = dir;
        self
    }

    fn preset(&self, name: &str) -> std::result::Result<&Preset, Failure> {
        self.presets
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| fail(format!("preset {name} is not in the list")))
    }

    /// Checks whose group or number equals `only` (all when `None`).
    pub fn selected(only: Option<&str>) -> Vec<CheckInfo> {
        CHECKS
            .into_iter()
            .filter(|c| only.is_none_or(|o| o == c.group || o == c.id.to_string()))
            .collect()
    }

    pub fn run(&self, id: u32) -> CheckOutcome {
        let info = *CHECKS.iter().find(|c| c.id == id).expect("known check id");
        let started = Instant::now();
        let result = match id {
            1 => self.macro_cantor(),
            2 => self.micro_cantor(),
            3 => self.banach_rate(),
            4 => self.cross_delta(),
            5 => self.window(),
            6 => self.layered(),
            7 => self.lipschitz(),
            8 => self.discrete(),
            9 => self.chaos(),
            10 => self.projections(),
            11 => self.screen(),
            12 => self.determinism(),
            _ => unreachable!("check ids are 1..=12"),
        };
        let seconds = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => CheckOutcome {
                info,
                passed: true,
                detail,
                category: None,
                seconds,
            },
            Err(f) => CheckOutcome {
                info,
                passed: false,
                detail: f.message,
                category: f.category,
                seconds,
            },
        }
    }

    pub fn run_selected(&self, only: Option<&str>) -> Vec<CheckOutcome> {
        Verifier::selected(only).into_iter().map(|c| self.run(c.id)).collect()
    }

    fn macro_cantor(&self) -> CheckResult {
        let map = self.preset("cantor")?.map.to_lattice()?;
        for n in 0..=12 {
            let orbit = expand(&map, n, DEFAULT_BUDGET)?.union();
            let oracle = macro_cantor_oracle(n)?;
            if orbit.sorted_keys() != oracle.sorted_keys() {
                return Err(fail(format!("orbit differs from the closed form at n = {n}")));
            }
            for (p, t) in oracle.iter() {
                if orbit.tag_of(p) != Some(t) {
                    return Err(fail(format!("colour of {p} differs at n = {n}")));
                }
            }
            let from_zero = orbit.iter().filter(|(_, t)| t.0 == 0).count();
            if from_zero != 1 << n {
                return Err(fail(format!("|Φ^{n}(0)| = {from_zero}, expected {}", 1 << n)));
            }
        }
        Ok("13 depths equal as integer sets".into())
    }

    fn micro_cantor(&self) -> CheckResult {
        let map = cantor_exact_inverse();
        let seed = PointSet::from_points(DedupPolicy::Exact, [crate::presets::rational(0, 1)]);
        for n in 0..=12 {
            let orbit = iterate(&map, &seed, n, DEFAULT_BUDGET)?.points;
            if orbit.sorted_keys() != cantor_micro_oracle(n)? {
                return Err(fail(format!("orbit differs from the ternary sums at n = {n}")));
            }
        }
        Ok("13 depths equal as exact rationals".into())
    }

    fn banach_rate(&self) -> CheckResult {
        let mut worst_ratio: f64 = 0.0;
        let mut count = 0;
        for p in self.presets.iter().filter(|p| p.dimension == 2) {
            let lambda = p.inverse.lipschitz();
            let gap = seed_gap(&p.inverse)?;
            let measure: Box<dyn Fn(usize) -> Result<f64>> = match Homothety::from_map(&p.map) {
                Some(h) => Box::new(move |n| Ok(h.micro_gaps().gap(n, RATE_REFERENCE_DEPTH)?.upper)),
                None => {
                    let levels = crate::reference::orbit_levels(&p.inverse, RATE_REFERENCE_DEPTH, 1 << 22)?;
                    let deep = levels[RATE_REFERENCE_DEPTH].clone();
                    Box::new(move |n| Ok(crate::geometry::NearestIndex::new(levels[n].clone()).directed_from(&deep)))
                }
            };
            for n in 0..=RATE_MAX_N {
                let measured = measure(n)?;
                let bound = crate::micro::certified_bound(lambda, gap, n);
                if measured > bound + RATE_SLACK {
                    return Err(fail(format!("{} n = {n}: {measured:e} > {bound:e}", p.name)));
                }
                if bound > 0.0 {
                    worst_ratio = worst_ratio.max(measured / bound);
                }
            }
            count += 1;
        }
        Ok(format!("{count} presets, largest measured/bound = {worst_ratio:.3}"))
    }

    fn cross_delta(&self) -> CheckResult {
        let p = self.preset("cross")?;
        let precision = 1e-4;
        let outcome = certify_repelling(&p.map.to_lattice()?, 1, precision, DEFAULT_BUDGET)?;
        let RepellingOutcome::Certified(cert) = outcome else {
            return Err(fail("cross orbit is finite".into()));
        };
        if let Some(documented) = p.documented_delta {
            // the true distance lies in [δ, measured]
            if documented < cert.delta - 1e-12 || documented > cert.measured + 1e-12 {
                return Err(Failure {
                    message: format!(
                        "documented δ = {documented} is outside the certified range [{}, {}]",
                        cert.delta, cert.measured
                    ),
                    category: Some(ErrorCategory::CertificationFailed),
                });
            }
        }
        if !(cert.delta > 0.999 && cert.delta <= 1.0) {
            return Err(fail(format!("δ = {} outside (0.999, 1]", cert.delta)));
        }
        Ok(format!("δ = {:.6} (measured {:.6})", cert.delta, cert.measured))
    }

    fn window(&self) -> CheckResult {
        let mut summary = Vec::new();
        for name in ["cantor", "cross"] {
            let p = self.preset(name)?;
            let map = p.map.to_lattice()?;
            let RepellingOutcome::Certified(cert) = certify_repelling(&map, 1, 1e-3, DEFAULT_BUDGET)? else {
                return Err(fail(format!("{name} orbit is finite")));
            };
            let micro = crate::geometry::NearestIndex::new(cert.micro.points.clone());
            let eps = cert.micro.bound;
            let orbit = expand(&map, cert.k + 2 + 4, DEFAULT_BUDGET)?;
            for n in 0..=2usize {
                let radius = cert.delta / cert.lambda.powi(n as i32);
                let shallow = orbit_union(&orbit, cert.k + n);
                let fresh = orbit_union(&orbit, cert.k + n + 4).difference(&shallow);
                // d(x, F[Φ⁻¹]) ≥ d(x, F̃) − ε ≥ |x − c| − ρ − ε
                let near = |x: Point| {
                    x.distance(cert.micro.center) - cert.micro.radius - eps <= radius
                        && micro.nearest_distance(x).expect("non-empty") - eps <= radius
                };
                let points = fresh.to_points();
                let offenders = points.par_iter().filter(|x| near(**x)).count();
                if offenders > 0 {
                    return Err(fail(format!(
                        "{name} n = {n}: {offenders} deeper points may lie in E_n"
                    )));
                }
                summary.push(format!("{name} n={n}: {} deeper points outside", points.len()));
            }
        }
        Ok(summary.join(", "))
    }

    fn layered(&self) -> CheckResult {
        for p in &self.presets {
            let depth = 6;
            match p.map.to_lattice() {
                Ok(map) => {
                    let layered = expand(&map, depth, DEFAULT_BUDGET)?.union();
                    let naive = naive_orbit(&map, depth)?;
                    if !layered.same_points(&naive) {
                        return Err(fail(format!("{}: layered and naive orbits differ", p.name)));
                    }
                }
                Err(Error::NotLatticePreserving(..)) => {
                    let layered = expand(&p.map, depth, DEFAULT_BUDGET)?.union().to_points();
                    let naive = naive_orbit(&p.map, depth)?.to_points();
                    let tol = 2.0 * crate::multifunc::SNAP_RELATIVE * p.map.scene_scale();
                    let d = hausdorff(&layered, &naive).finite().unwrap_or(f64::INFINITY);
                    if d > tol {
                        return Err(fail(format!("{}: orbits differ by {d:e}", p.name)));
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok(format!("{} presets at m = 0..6", self.presets.len()))
    }

    fn lipschitz(&self) -> CheckResult {
        let mut worst: f64 = 0.0;
        for (name, expected) in EXPECTED_LAMBDA {
            let lambda = self.preset(name)?.inverse.lipschitz();
            let err = (lambda - expected).abs();
            if err > 1e-12 {
                return Err(fail(format!("{name}: {lambda} vs {expected}")));
            }
            worst = worst.max(err);
        }
        Ok(format!("largest deviation {worst:.1e}"))
    }

    fn discrete(&self) -> CheckResult {
        let map = self.preset("cross")?.map.to_lattice()?;
        let orbit = expand(&map, 6, DEFAULT_BUDGET)?.union();
        let pts = orbit.to_points();
        let min = min_pairwise_distance(&pts);
        if pts.len() > 5usize.pow(7) {
            return Err(fail(format!("{} points exceed 5^7", pts.len())));
        }
        if min < 1.0 {
            return Err(fail(format!("two points at distance {min}")));
        }
        Ok(format!("{} points, minimal distance {min}", pts.len()))
    }

    fn chaos(&self) -> CheckResult {
        let samples = 2000;
        let mut probes = 0;
        for p in &self.presets {
            for n in 0..=8usize {
                let exact_size = p.inverse.branches().len().pow(n as u32 + 1);
                let full = (exact_size <= 2_000_000)
                    .then(|| iterate(&p.inverse, &p.inverse.fixed_points()?, n, DEFAULT_BUDGET))
                    .transpose()?;
                for seed in 0..8u64 {
                    let sample = chaos_game(&p.inverse, n, samples, seed)?.to_points();
                    let tol = 1e-9 * p.inverse.scene_scale();
                    let d = match &full {
                        Some(orbit) => directed_hausdorff(&sample, &orbit.points.to_points())
                            .finite()
                            .unwrap_or(f64::INFINITY),
                        None => sample
                            .iter()
                            .map(|y| orbit_distance(&p.inverse, *y, n))
                            .collect::<Result<Vec<f64>>>()?
                            .into_iter()
                            .fold(0.0, f64::max),
                    };
                    if d > tol {
                        return Err(fail(format!("{} n = {n} seed {seed}: a sample is {d:e} away", p.name)));
                    }
                    probes += sample.len();
                }
            }
        }
        Ok(format!("{probes} sampled points inside their orbits"))
    }

    fn projections(&self) -> CheckResult {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut round_trip: f64 = 0.0;
        let mut residual: f64 = 0.0;
        for i in 0..10_000 {
            let r = [0.5, 1.0, 3.0][i % 3];
            let norm = 10f64.powf(rng.random_range(-3.0..5.0));
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let p = Point::new(norm * angle.cos(), norm * angle.sin());
            let s = spherical_embed(p, r);
            let back = stereographic_project(&s)?;
            round_trip = round_trip.max(back.distance(p) / p.norm().max(1.0));
            residual = residual
                .max(s.sphere_residual())
                .max(semispherical_embed(p, r).sphere_residual());
            if semispherical_image(p, r).norm() >= 2.0 * r {
                return Err(fail(format!("semi-spherical image of {p:?} leaves the disk")));
            }
        }
        if round_trip > 1e-12 || residual > 1e-12 {
            return Err(fail(format!("round trip {round_trip:e}, sphere residual {residual:e}")));
        }
        Ok(format!("round trip {round_trip:.1e}, sphere residual {residual:.1e}"))
    }

    fn screen(&self) -> CheckResult {
        let r = 1.0;
        let embeddings = [
            Embedding::Spherical(SphereView::Side),
            Embedding::Semispherical,
            Embedding::Projective(ProjectiveChart::Disk),
        ];
        let mut worst: f64 = 0.0;
        let mut depths = Vec::new();
        for p in &self.presets {
            for e in embeddings {
                let (n, gap) = screen_gap(p, e, r)?;
                let label = format!("{} {} N={n}", p.name, embedding_name(e));
                if gap >= SCREEN_TOLERANCE * r {
                    return Err(fail(format!("{label}: gap {gap:.3e} ≥ {}", SCREEN_TOLERANCE * r)));
                }
                worst = worst.max(gap);
                depths.push(label);
            }
        }
        Ok(format!("largest bound {worst:.2e}; {}", depths.join(", ")))
    }

    fn determinism(&self) -> CheckResult {
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| fail(e.to_string()))?;
        let mut compared = 0;
        let mut missing = 0;
        for (file, job) in golden_jobs() {
            let first = render(&job)?.image.to_ppm();
            let second = single.install(|| render(&job))?.image.to_ppm();
            if first != second {
                return Err(fail(format!("{file}: two runs differ")));
            }
            if let Some(dir) = &self.golden_dir {
                match fs::read(dir.join(&file)) {
                    Ok(golden) if golden == first => compared += 1,
                    Ok(_) => return Err(fail(format!("{file} differs from its golden file"))),
                    Err(_) => missing += 1,
                }
            }
        }
        if missing > 0 || self.golden_dir.is_none() {
            return Err(fail(format!("{missing} golden files missing (compared {compared})")));
        }
        Ok(format!("{compared} renders repeat and match their golden files"))
    }
}

fn embedding_name(e: Embedding) -> &'static str {
    match e {
        Embedding::Spherical(_) => "sphere",
        Embedding::Semispherical => "semisphere",
        Embedding::Projective(_) => "projective",
    }
}

const SCREEN_DEPTHS: [usize; 6] = [4, 6, 8, 10, 12, 14];
const SCREEN_MAX_POINTS: usize = 1 << 22;

/// `(N, bound)` at the first depth whose bound passes, or at the deepest
/// affordable one.
fn screen_gap(p: &Preset, e: Embedding, r: f64) -> Result<(usize, f64)> {
    let target = SCREEN_TOLERANCE * r;
    let mut last = None;
    match Homothety::from_map(&p.map) {
        Some(h) => {
            let window = window_for(&h, e, r, 0.4 * target);
            for n in SCREEN_DEPTHS {
                let gap = screen_gap_window(&h, e, r, n, SCREEN_EXTRA, window)?.bound;
                last = Some((n, gap));
                if gap < target {
                    break;
                }
            }
        }
        None => {
            for n in SCREEN_DEPTHS {
                match screen_gap_brute(&p.map, e, r, n, SCREEN_EXTRA, SCREEN_MAX_POINTS) {
                    Ok(gap) => {
                        last = Some((n, gap));
                        if gap < target {
                            break;
                        }
                    }
                    Err(Error::Budget { .. }) if last.is_some() => break,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(last.expect("at least one depth"))
}

fn orbit_union<P: OrbitPoint>(orbit: &crate::macro_fractal::LayeredOrbit<P>, depth: usize) -> PointSet<P> {
    let layers = &orbit.layers()[..=depth];
    let mut out = PointSet::new(layers[0].policy());
    for l in layers {
        out.extend_from(l);
    }
    out
}

/// `Φᵐ(Fix)` by applying `Φ` to the whole set `m` times.
fn naive_orbit<M: MultiMap>(map: &M, m: usize) -> Result<PointSet<M::Point>> {
    let mut set = map.fixed_points()?;
    for _ in 0..m {
        set = map.apply(&set)?;
    }
    Ok(set)
}

/// Smallest distance between two points of a list, capped at 1.
fn min_pairwise_distance(points: &[Point]) -> f64 {
    use std::collections::HashMap;
    let cell = |p: &Point| (p.x.floor() as i64, p.y.floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<Point>> = HashMap::new();
    for p in points {
        grid.entry(cell(p)).or_default().push(*p);
    }
    let mut best = f64::INFINITY;
    for p in points {
        let (cx, cy) = cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for q in grid.get(&(cx + dx, cy + dy)).into_iter().flatten() {
                    if q != p {
                        best = best.min(p.distance(*q));
                    }
                }
            }
        }
    }
    // pairs in non-adjacent cells are at least 1 apart
    best.min(1.0)
}

/// A preset with its documented layer distance replaced.
pub fn preset_with_delta(name: &str, delta: Option<f64>) -> Result<Preset> {
    Ok(crate::presets::preset(name)?.with_documented_delta(delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters() {
        assert_eq!(Verifier::selected(Some("cantor")).len(), 2);
        assert_eq!(Verifier::selected(Some("7")).len(), 1);
        assert_eq!(Verifier::selected(None).len(), 12);
        assert!(Verifier::selected(Some("nothing")).is_empty());
    }

    #[test]
    fn cantor_group_passes() {
        for outcome in Verifier::new().run_selected(Some("cantor")) {
            assert!(outcome.passed, "{}", outcome.line());
        }
    }

    #[test]
    fn wrong_documented_delta_is_a_certification_failure() {
        let mut presets = all_presets();
        for p in &mut presets {
            if p.name == "cross" {
                *p = preset_with_delta("cross", Some(1.5)).unwrap();
            }
        }
        let outcome = Verifier::new().with_presets(presets).run(4);
        assert!(!outcome.passed);
        assert_eq!(outcome.category, Some(ErrorCategory::CertificationFailed));
    }

    #[test]
    fn pairwise_distance() {
        let pts = [Point::new(0.0, 0.0), Point::new(0.5, 0.2), Point::new(3.0, 0.0)];
        assert!((min_pairwise_distance(&pts) - 0.5385164807134504).abs() < 1e-15);
        let far = [Point::new(0.0, 0.0), Point::new(7.0, 0.0)];
        assert_eq!(min_pairwise_distance(&far), 1.0);
    }
}
