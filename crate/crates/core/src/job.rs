//! End-to-end renders: a multi-function, a drawing mode and a raster make
//! an image plus a JSON record of the depth and bounds that were used.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect, Tag};
use crate::macro_fractal::{
    certify_default, certify_repelling, cut_zoom, expand, random_expand, screen_radius, window_depth,
    RepellingCertificate, RepellingOutcome,
};
use crate::micro::{chaos_game, render_to_precision, DEFAULT_BUDGET};
use crate::multifunc::{MultiFunction, MultiMap};
use crate::presets::preset;
use crate::project::{Embedding, ProjectiveChart, SphereView};
use crate::raster::{rasterize_tagged, write_image, ColorMode, Image, OutputFormat, RasterSpec};

pub const SIDECAR_SCHEMA: u32 = 1;
pub const DEFAULT_EPSILON: f64 = 0.01;
/// Default screen precision of the sphere modes, in units of `r`.
pub const DEFAULT_PRECISION: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Preset(String),
    /// JSON description of an expanding multi-function.
    Config(PathBuf),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Preset(name) => write!(f, "{name}"),
            Source::Config(path) => write!(f, "{}", path.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// The micro-fractal `F[Φ⁻¹]`.
    Micro,
    /// `F[Φ]` inside a screen rectangle.
    MacroCut,
    MacroSphere,
    MacroSemisphere,
    MacroProjective,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Micro,
        Mode::MacroCut,
        Mode::MacroSphere,
        Mode::MacroSemisphere,
        Mode::MacroProjective,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Micro => "micro",
            Mode::MacroCut => "macro-cut",
            Mode::MacroSphere => "macro-sphere",
            Mode::MacroSemisphere => "macro-semisphere",
            Mode::MacroProjective => "macro-projective",
        }
    }

    fn is_compact_screen(self) -> bool {
        matches!(self, Mode::MacroSphere | Mode::MacroSemisphere | Mode::MacroProjective)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown mode `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderJob {
    pub source: Source,
    pub mode: Mode,
    /// Target Hausdorff error of the micro mode.
    pub epsilon: Option<f64>,
    /// Required by the cut mode.
    pub screen: Option<Rect>,
    /// Screen precision of the sphere modes.
    pub precision: Option<f64>,
    /// Overrides the computed depth.
    pub depth: Option<usize>,
    pub radius: f64,
    pub chart: Option<ProjectiveChart>,
    pub view: Option<SphereView>,
    pub width: u32,
    pub height: u32,
    pub point_radius: u32,
    pub color: ColorMode,
    pub format: OutputFormat,
    pub out: PathBuf,
    pub seed: u64,
    /// Random chains per start point instead of full enumeration.
    pub random: Option<usize>,
    pub budget: usize,
    pub k: Option<usize>,
    pub micro_precision: Option<f64>,
}

impl RenderJob {
    pub fn new(source: Source, mode: Mode, out: impl Into<PathBuf>) -> Self {
        let out = out.into();
        RenderJob {
            source,
            mode,
            epsilon: None,
            screen: None,
            precision: None,
            depth: None,
            radius: 1.0,
            chart: None,
            view: None,
            width: 512,
            height: 512,
            point_radius: 0,
            color: ColorMode::Color,
            format: OutputFormat::from_path(&out),
            out,
            seed: 0,
            random: None,
            budget: DEFAULT_BUDGET,
            k: None,
            micro_precision: None,
        }
    }

    pub fn preset(name: &str, mode: Mode, out: impl Into<PathBuf>) -> Self {
        RenderJob::new(Source::Preset(name.to_string()), mode, out)
    }

    /// Rejects parameters that make no sense for the mode.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("{msg} (mode {})", self.mode)));
        let micro = self.mode == Mode::Micro;
        if self.epsilon.is_some() && !micro {
            return bad("--epsilon applies to the micro mode only");
        }
        if let Some(e) = self.epsilon {
            if e.is_nan() || e <= 0.0 {
                return bad("--epsilon must be positive");
            }
        }
        match (self.mode, self.screen) {
            (Mode::MacroCut, None) => return bad("--screen is required"),
            (Mode::MacroCut, Some(_)) | (_, None) => {}
            (_, Some(_)) => return bad("--screen applies to the macro-cut mode only"),
        }
        if self.precision.is_some() && !self.mode.is_compact_screen() {
            return bad("--precision applies to the sphere modes only");
        }
        if let Some(p) = self.precision {
            if p.is_nan() || p <= 0.0 {
                return bad("--precision must be positive");
            }
        }
        if self.chart.is_some() && self.mode != Mode::MacroProjective {
            return bad("--chart applies to the macro-projective mode only");
        }
        if self.view.is_some() && self.mode != Mode::MacroSphere {
            return bad("--view applies to the macro-sphere mode only");
        }
        if micro && (self.k.is_some() || self.micro_precision.is_some()) {
            return bad("--k and --micro-precision apply to the macro modes only");
        }
        if self.k == Some(0) {
            return bad("--k starts at 1");
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("--radius must be positive");
        }
        if self.width == 0 || self.height == 0 {
            return bad("image dimensions must be at least 1");
        }
        Ok(())
    }

    fn embedding(&self) -> Option<Embedding> {
        match self.mode {
            Mode::MacroSphere => Some(Embedding::Spherical(self.view.unwrap_or_default())),
            Mode::MacroSemisphere => Some(Embedding::Semispherical),
            Mode::MacroProjective => Some(Embedding::Projective(self.chart.unwrap_or_default())),
            _ => None,
        }
    }

    pub fn sidecar_path(&self) -> PathBuf {
        sidecar_path(&self.out)
    }
}

/// `<out>.json`, next to the image.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

/// What a render computed, written next to the image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema: u32,
    pub source: String,
    pub mode: Mode,
    /// Size of the computed point set, before clipping to the image.
    pub points: usize,
    pub depth: usize,
    /// `Lip(Φ⁻¹)`.
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Certified Hausdorff distance to the micro-fractal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micro_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micro_precision: Option<f64>,
    /// Upper bound on the distance from the covered region to `F[Φ⁻¹]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    /// Radius of the plane disk drawn exactly in the sphere modes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_radius: Option<f64>,
    /// The depth meets the requirement of the bounds above.
    pub certified: bool,
    pub finite_orbit: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_samples: Option<usize>,
    /// `[xmin, ymin, xmax, ymax]` of the image.
    pub world: [f64; 4],
    pub width: u32,
    pub height: u32,
    pub format: OutputFormat,
    pub wall_time_s: f64,
}

impl Sidecar {
    fn new(job: &RenderJob, lambda: f64) -> Self {
        Sidecar {
            schema: SIDECAR_SCHEMA,
            source: job.source.to_string(),
            mode: job.mode,
            points: 0,
            depth: 0,
            lambda,
            epsilon: None,
            micro_bound: None,
            delta: None,
            k: None,
            n: None,
            micro_precision: None,
            radius_bound: None,
            precision: None,
            window_radius: None,
            certified: true,
            finite_orbit: false,
            seed: job.seed,
            random_samples: job.random,
            world: [0.0; 4],
            width: job.width,
            height: job.height,
            format: job.format,
            wall_time_s: 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RenderOutput {
    pub image: Image,
    pub sidecar: Sidecar,
}

pub fn load_source(source: &Source) -> Result<MultiFunction> {
    match source {
        Source::Preset(name) => Ok(preset(name)?.map),
        Source::Config(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            MultiFunction::from_json(&text)
        }
    }
}

/// Computes the image and its record without touching the file system
/// (apart from reading a config source).
pub fn render(job: &RenderJob) -> Result<RenderOutput> {
    let started = Instant::now();
    job.validate()?;
    let map = load_source(&job.source)?;
    let lambda = map.inverse().lipschitz();
    let mut record = Sidecar::new(job, lambda);
    let plane = match job.mode {
        Mode::Micro => render_micro(&map, job, &mut record)?,
        _ => match map.to_lattice() {
            Ok(lattice) => render_macro(&lattice, job, &mut record)?,
            Err(Error::NotLatticePreserving(..)) if map.lattice().is_none() => render_macro(&map, job, &mut record)?,
            Err(e) => return Err(e),
        },
    };
    let (screen, world) = match job.embedding() {
        None => {
            let world = match job.screen {
                Some(s) => fit_world(s, job),
                None => {
                    let pts: Vec<Point> = plane.iter().map(|p| p.0).collect();
                    let bounds = Rect::bounding(&pts).ok_or(Error::EmptySet)?;
                    fit_world(bounds.padded(0.04), job)
                }
            };
            (plane, world)
        }
        Some(embedding) => {
            let r = job.radius;
            let mut screen: Vec<(Point, Tag)> = plane
                .par_iter()
                .filter_map(|(p, t)| embedding.screen_point(*p, r).map(|q| (q, *t)))
                .collect();
            if let Some(inf) = embedding.infinity_point(r) {
                screen.push((inf, Tag(0)));
            }
            (screen, fit_world(compact_world(embedding, r), job))
        }
    };
    let spec = RasterSpec::new(world, job.width, job.height)?
        .with_point_radius(job.point_radius)
        .with_mode(job.color);
    let image = rasterize_tagged(&screen, &spec);
    record.world = [world.xmin, world.ymin, world.xmax, world.ymax];
    record.wall_time_s = started.elapsed().as_secs_f64();
    Ok(RenderOutput { image, sidecar: record })
}

/// Renders and writes the image and `<out>.json`.
pub fn run(job: &RenderJob) -> Result<Sidecar> {
    let output = render(job)?;
    write_image(&output.image, &job.out, job.format)?;
    let path = job.sidecar_path();
    let text = serde_json::to_string_pretty(&output.sidecar).expect("sidecar serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(output.sidecar)
}

fn fit_world(rect: Rect, job: &RenderJob) -> Rect {
    if rect.width() > 0.0 && rect.height() > 0.0 {
        rect
    } else {
        rect.with_aspect(job.width as f64 / job.height as f64)
    }
}

fn compact_world(embedding: Embedding, r: f64) -> Rect {
    let m = 1.02 * r;
    match embedding {
        Embedding::Projective(ProjectiveChart::Affine) => Rect {
            xmin: -2.0 * r,
            xmax: 2.0 * r,
            ymin: -2.5 * r,
            ymax: 1.5 * r,
        },
        _ => Rect {
            xmin: -m,
            xmax: m,
            ymin: -m,
            ymax: m,
        },
    }
}

fn render_micro(map: &MultiFunction, job: &RenderJob, record: &mut Sidecar) -> Result<Vec<(Point, Tag)>> {
    let dual = map.inverse();
    let epsilon = job.epsilon.unwrap_or(DEFAULT_EPSILON);
    let approx = match job.depth {
        Some(n) => crate::micro::iterate(&dual, &dual.fixed_points()?, n, job.budget)?,
        None => render_to_precision(&dual, epsilon, job.budget)?,
    };
    record.epsilon = Some(epsilon);
    record.micro_bound = Some(approx.bound);
    record.depth = approx.depth;
    record.certified = approx.bound < epsilon;
    let points = match job.random {
        Some(samples) => chaos_game(&dual, approx.depth, samples, job.seed)?,
        None => approx.points,
    };
    record.points = points.len();
    Ok(points.to_tagged_points())
}

fn certificate<M: MultiMap>(map: &M, job: &RenderJob) -> Result<RepellingOutcome> {
    match (job.k, job.micro_precision) {
        (None, None) => certify_default(map, job.budget),
        (k, precision) => certify_repelling(
            map,
            k.unwrap_or(1),
            precision.unwrap_or(1e-3 * map.float_form().scene_scale()),
            job.budget,
        ),
    }
}

/// Plane radius `R` beyond which every point is within `precision` of
/// the part of the screen at infinity (the north pole, or the horizon).
pub fn window_radius(embedding: Embedding, r: f64, precision: f64) -> f64 {
    match embedding {
        // chord from s∞(x) to the pole is 2r²/√(r² + ‖x‖²)
        Embedding::Spherical(_) => {
            if precision >= 2.0 * r {
                0.0
            } else {
                (4.0 * r.powi(4) / (precision * precision) - r * r).sqrt()
            }
        }
        // s₀(x) sits at angle φ above the horizon with ‖x‖ = r·cot φ; its
        // chord to the horizon is 2r·sin(φ/2)
        Embedding::Semispherical | Embedding::Projective(_) => {
            let phi = 2.0 * (precision / (2.0 * r)).min(1.0).asin();
            if phi >= std::f64::consts::FRAC_PI_2 {
                0.0
            } else {
                r / phi.tan()
            }
        }
    }
}

fn render_macro<M: MultiMap>(map: &M, job: &RenderJob, record: &mut Sidecar) -> Result<Vec<(Point, Tag)>> {
    let cert = match certificate(map, job)? {
        RepellingOutcome::Certified(cert) => cert,
        RepellingOutcome::FiniteOrbit { k } => {
            // the orbit stops growing at Φ^{k−1}(Fix)
            let depth = job.depth.unwrap_or(k - 1);
            let set = expand(map, depth, job.budget)?.union();
            record.finite_orbit = true;
            record.k = Some(k);
            record.depth = depth;
            record.certified = depth + 1 >= k;
            record.points = set.len();
            return Ok(clip(set.to_tagged_points(), job.screen));
        }
    };
    record_certificate(record, &cert);
    let radius = match (job.mode, job.screen) {
        (Mode::MacroCut, Some(screen)) => screen_radius(&cert.micro.points, screen),
        _ => {
            let embedding = job.embedding().expect("compact modes have an embedding");
            let precision = job.precision.unwrap_or(DEFAULT_PRECISION * job.radius);
            let plane = window_radius(embedding, job.radius, precision);
            record.precision = Some(precision);
            record.window_radius = Some(plane);
            // every x with ‖x‖ ≤ R is within R + ‖c‖ + ρ of F[Φ⁻¹]
            plane + cert.micro.center.norm() + cert.micro.radius
        }
    };
    let n = window_depth(cert.delta, cert.lambda, radius);
    let needed = cert.k + n;
    record.radius_bound = Some(radius);
    record.n = Some(n);
    let depth = job.depth.unwrap_or(needed);
    record.depth = depth;
    record.certified = depth >= needed;
    // semi-sphere and projective screens have no single point at infinity,
    // so the window there is drawn exactly but the rim is not certified
    if matches!(job.mode, Mode::MacroSemisphere | Mode::MacroProjective) {
        record.certified = false;
    }
    let set = match (job.random, job.mode, job.depth) {
        (None, Mode::MacroCut, None) => {
            let screen = job.screen.expect("validated");
            cut_zoom(map, &cert, screen, job.budget)?.points
        }
        (None, _, _) => expand(map, depth, job.budget)?.union(),
        (Some(samples), _, _) => {
            let exact = depth / 2;
            random_expand(map, depth - exact, exact, samples, job.seed, job.budget)?
        }
    };
    record.points = set.len();
    Ok(clip(set.to_tagged_points(), job.screen))
}

fn record_certificate(record: &mut Sidecar, cert: &RepellingCertificate) {
    record.delta = Some(cert.delta);
    record.k = Some(cert.k);
    record.micro_precision = Some(cert.micro_precision);
    record.micro_bound = Some(cert.micro.bound);
}

fn clip(points: Vec<(Point, Tag)>, screen: Option<Rect>) -> Vec<(Point, Tag)> {
    match screen {
        Some(s) => points.into_iter().filter(|(p, _)| s.contains(*p)).collect(),
        None => points,
    }
}

/// Screen of the cut-mode reference renders.
pub const GOLDEN_SCREEN: [f64; 4] = [-30.0, -30.0, 30.0, 30.0];
pub const GOLDEN_SIZE: u32 = 64;

/// The reference renders: every preset in every mode at 64×64, as
/// `(file name, job)`.
pub fn golden_jobs() -> Vec<(String, RenderJob)> {
    let [xmin, ymin, xmax, ymax] = GOLDEN_SCREEN;
    let screen = Rect::new(xmin, xmax, ymin, ymax).expect("valid screen");
    let mut jobs = Vec::new();
    for name in crate::presets::PRESET_NAMES {
        for mode in Mode::ALL {
            let file = format!("{name}-{mode}.ppm");
            let mut job = RenderJob::preset(name, mode, &file);
            job.width = GOLDEN_SIZE;
            job.height = GOLDEN_SIZE;
            if mode == Mode::MacroCut {
                job.screen = Some(screen);
            }
            jobs.push((file, job));
        }
    }
    jobs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cut(name: &str, screen: Rect) -> RenderJob {
        let mut job = RenderJob::preset(name, Mode::MacroCut, "unused.ppm");
        job.screen = Some(screen);
        job.width = 32;
        job.height = 32;
        job
    }

    #[test]
    fn cross_cut_depth() {
        let out = render(&cut("cross", Rect::new(-81.0, 81.0, -81.0, 81.0).unwrap())).unwrap();
        // the corners are about 81·√2 away from F[Φ⁻¹], so n = 5, not 4
        let s = out.sidecar;
        assert_eq!(s.k, Some(1));
        let (delta, r) = (s.delta.unwrap(), s.radius_bound.unwrap());
        assert!(delta * 3f64.powi(5) >= r && delta * 3f64.powi(4) < r);
        assert_eq!(s.depth, 6);
        assert!(s.certified);
    }

    #[test]
    fn cantor_micro_depth() {
        let mut job = RenderJob::preset("cantor", Mode::Micro, "unused.ppm");
        job.epsilon = Some(0.01);
        let out = render(&job).unwrap();
        assert_eq!(out.sidecar.depth, 4);
        assert!(out.sidecar.micro_bound.unwrap() < 0.01);
    }

    #[test]
    fn incompatible_parameters() {
        let mut job = RenderJob::preset("cross", Mode::MacroSphere, "unused.ppm");
        job.epsilon = Some(0.1);
        assert!(matches!(render(&job), Err(Error::InvalidArgument(_))));
        let job = RenderJob::preset("cross", Mode::MacroCut, "unused.ppm");
        assert!(matches!(render(&job), Err(Error::InvalidArgument(_))));
        let job = RenderJob::preset("nosuch", Mode::Micro, "unused.ppm");
        assert_eq!(render(&job).unwrap_err().category(), crate::ErrorCategory::BadConfig);
    }

    #[test]
    fn sphere_window_radius() {
        let e = Embedding::Spherical(SphereView::Side);
        let r = window_radius(e, 1.0, 0.02);
        let chord = 2.0 / (1.0 + r * r).sqrt();
        assert!((chord - 0.02).abs() < 1e-12);
        assert_eq!(window_radius(e, 1.0, 3.0), 0.0);
        let s = window_radius(Embedding::Semispherical, 1.0, 0.02);
        let y = crate::project::semispherical_embed(Point::new(s, 0.0), 1.0);
        let horizon = crate::project::SpherePoint {
            coords: [1.0, 0.0, 0.0],
            radius: 1.0,
        };
        assert!((y.distance(&horizon) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn budget_reports_required_depth() {
        let mut job = RenderJob::preset("carpet", Mode::MacroSphere, "unused.ppm");
        job.budget = 1000;
        match render(&job) {
            Err(Error::Budget { depth, .. }) => assert!(depth >= 1),
            other => panic!("expected a budget error, got {other:?}"),
        }
    }

    #[test]
    fn sidecar_next_to_image() {
        assert_eq!(
            sidecar_path(Path::new("a/cross.ppm")),
            PathBuf::from("a/cross.ppm.json")
        );
    }
}
