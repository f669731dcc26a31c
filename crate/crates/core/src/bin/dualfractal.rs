use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dualfractal::geometry::Rect;
use dualfractal::job::{run, Mode, RenderJob, Source};
use dualfractal::micro::DEFAULT_BUDGET;
use dualfractal::project::{ProjectiveChart, SphereView};
use dualfractal::raster::{ColorMode, OutputFormat};
use dualfractal::verify::Verifier;
use dualfractal::{Error, ErrorCategory};

/// Environment variable overriding the number of worker threads.
const THREADS_VAR: &str = "DUALFRACTAL_THREADS";

#[derive(Parser)]
#[command(
    name = "dualfractal",
    version,
    about = "Render and verify dual pairs of micro- and macro-fractals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render one fractal to an image plus a JSON sidecar.
    Render(Box<RenderArgs>),
    /// Run the acceptance checks and print one line per check.
    Verify {
        /// Run only this group (cantor, micro, macro, presets, project,
        /// determinism) or check number.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Args)]
struct RenderArgs {
    /// Built-in multi-function.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// JSON file describing an expanding multi-function.
    #[arg(long)]
    config: Option<PathBuf>,
    /// micro, macro-cut, macro-sphere, macro-semisphere or macro-projective.
    #[arg(long)]
    mode: Mode,
    /// Hausdorff error of the micro mode.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Screen rectangle `xmin,ymin,xmax,ymax` of the cut mode.
    #[arg(long, allow_hyphen_values = true)]
    screen: Option<String>,
    /// Screen precision of the sphere modes, in units of the radius.
    #[arg(long)]
    precision: Option<f64>,
    /// Fixed iteration depth instead of the computed one.
    #[arg(long)]
    depth: Option<usize>,
    /// Sphere radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Projective chart: disk or affine.
    #[arg(long)]
    chart: Option<String>,
    /// Sphere view: side, north or south.
    #[arg(long)]
    view: Option<String>,
    #[arg(long, default_value_t = 512)]
    width: u32,
    #[arg(long, default_value_t = 512)]
    height: u32,
    /// Radius of a drawn point in pixels.
    #[arg(long, default_value_t = 0)]
    point_radius: u32,
    /// Black points on white instead of one colour per fixed point.
    #[arg(long)]
    bw: bool,
    /// ppm or png; taken from the output extension by default.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Seed of the random modes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw this many random chains per start point.
    #[arg(long)]
    random: Option<usize>,
    /// Largest number of points any stage may hold.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Layer used for the repelling certificate.
    #[arg(long)]
    k: Option<usize>,
    /// Precision of the micro-fractal behind the certificate.
    #[arg(long)]
    micro_precision: Option<f64>,
}

fn bad(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

fn parse_screen(s: &str) -> Result<Rect, Error> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| bad(format!("screen `{s}`: {e}")))?;
    let [xmin, ymin, xmax, ymax] = v[..] else {
        return Err(bad(format!("screen `{s}` needs four numbers xmin,ymin,xmax,ymax")));
    };
    Rect::new(xmin, xmax, ymin, ymax)
}

fn parse_choice<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> Result<T, Error> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| bad(format!("unknown {what} `{s}`")))
}

impl RenderArgs {
    fn job(self) -> Result<RenderJob, Error> {
        let source = match (self.preset, self.config) {
            (Some(name), _) => Source::Preset(name),
            (None, Some(path)) => Source::Config(path),
            (None, None) => return Err(bad("--preset or --config is required".into())),
        };
        let mut job = RenderJob::new(source, self.mode, self.out);
        job.epsilon = self.epsilon;
        job.screen = self.screen.as_deref().map(parse_screen).transpose()?;
        job.precision = self.precision;
        job.depth = self.depth;
        job.radius = self.radius;
        job.chart = self
            .chart
            .map(|c| parse_choice::<ProjectiveChart>("chart", &c))
            .transpose()?;
        job.view = self.view.map(|v| parse_choice::<SphereView>("view", &v)).transpose()?;
        job.width = self.width;
        job.height = self.height;
        job.point_radius = self.point_radius;
        job.color = if self.bw { ColorMode::Bw } else { ColorMode::Color };
        if let Some(f) = self.format {
            job.format = parse_choice::<OutputFormat>("format", &f)?;
        }
        job.seed = self.seed;
        job.random = self.random;
        job.budget = self.budget;
        job.k = self.k;
        job.micro_precision = self.micro_precision;
        job.validate()?;
        Ok(job)
    }
}

fn report(category: ErrorCategory, message: &str) -> ExitCode {
    let line = serde_json::json!({ "error": category.as_str(), "message": message });
    eprintln!("{line}");
    ExitCode::from(category.exit_code())
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| bad(format!("{THREADS_VAR} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| bad(e.to_string()))
}

fn verify(only: Option<&str>) -> ExitCode {
    if Verifier::selected(only).is_empty() {
        return report(
            ErrorCategory::BadConfig,
            &format!("no check matches `{}`", only.unwrap_or("")),
        );
    }
    let outcomes = Verifier::new().run_selected(only);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).collect();
    println!("{} of {} checks passed", outcomes.len() - failed.len(), outcomes.len());
    match failed.first() {
        None => ExitCode::SUCCESS,
        Some(_) => match failed.iter().find_map(|o| o.category) {
            Some(category) => report(category, &format!("{} checks failed", failed.len())),
            None => ExitCode::FAILURE,
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(ErrorCategory::BadConfig, e.to_string().trim()),
    };
    if let Err(e) = configure_threads() {
        return report(e.category(), &e.to_string());
    }
    match cli.command {
        Command::Render(args) => match args.job().and_then(|job| run(&job)) {
            Ok(sidecar) => {
                println!("{}", serde_json::to_string(&sidecar).expect("sidecar serializes"));
                ExitCode::SUCCESS
            }
            Err(e) => report(e.category(), &e.to_string()),
        },
        Command::Verify { only } => verify(only.as_deref()),
    }
}
