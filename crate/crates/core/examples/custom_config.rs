//! A multi-function read from JSON: two doublings of the Gaussian integers
//! and one doubling followed by a reflection.
//!
//! cargo run --release --example custom_config

use dualfractal::geometry::Rect;
use dualfractal::job::{run, Mode, RenderJob, Source};

const CONFIG: &str = r#"{
  "branches": [
    { "kind": "affine", "a": [2, 0], "b": [0, 0] },
    { "kind": "affine", "a": [2, 0], "b": [-1, 0] },
    { "kind": "conjugate-affine", "a": [2, 0], "b": [0, 3] }
  ],
  "lattice": "gaussian"
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("dualfractal-custom");
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("custom.json");
    std::fs::write(&config, CONFIG)?;

    for (mode, file) in [
        (Mode::Micro, "custom-micro.png"),
        (Mode::MacroCut, "custom-cut.png"),
        (Mode::MacroSphere, "custom-sphere.png"),
    ] {
        let mut job = RenderJob::new(Source::Config(config.clone()), mode, file);
        if mode == Mode::MacroCut {
            job.screen = Some(Rect::new(-24.0, 24.0, -24.0, 24.0)?);
        }
        let sidecar = run(&job)?;
        println!(
            "{file}: λ = {:.4}, depth {}, {} points",
            sidecar.lambda, sidecar.depth, sidecar.points
        );
    }
    Ok(())
}
