//! The whole carpet macro-fractal on three compact screens: the sphere
//! seen from three sides, the semi-sphere and the projective plane.
//!
//! cargo run --release --example sphere_views

use dualfractal::job::{run, Mode, RenderJob};
use dualfractal::project::SphereView;

fn main() -> dualfractal::Result<()> {
    let mut jobs = Vec::new();
    for view in [SphereView::Side, SphereView::North, SphereView::South] {
        let mut job = RenderJob::preset(
            "carpet",
            Mode::MacroSphere,
            format!("carpet-sphere-{view:?}.png").to_lowercase(),
        );
        job.view = Some(view);
        jobs.push(job);
    }
    jobs.push(RenderJob::preset(
        "carpet",
        Mode::MacroSemisphere,
        "carpet-semisphere.png",
    ));
    jobs.push(RenderJob::preset(
        "carpet",
        Mode::MacroProjective,
        "carpet-projective.png",
    ));

    for mut job in jobs {
        job.point_radius = 1;
        let sidecar = run(&job)?;
        println!(
            "{}: depth {}, {} points, certified {}",
            job.out.display(),
            sidecar.depth,
            sidecar.points,
            sidecar.certified
        );
    }
    Ok(())
}
