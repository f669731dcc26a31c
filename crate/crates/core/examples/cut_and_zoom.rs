//! A window onto the unbounded cross macro-fractal. The repelling
//! certificate fixes the iteration depth after which nothing new appears
//! on screen.
//!
//! cargo run --release --example cut_and_zoom -- 200

use dualfractal::geometry::Rect;
use dualfractal::macro_fractal::{certify_default, cut_zoom};
use dualfractal::micro::DEFAULT_BUDGET;
use dualfractal::presets::preset;
use dualfractal::raster::{rasterize, write_image, OutputFormat, RasterSpec};

fn main() -> dualfractal::Result<()> {
    let half: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(81.0);
    let cross = preset("cross")?.map.to_lattice()?;
    let cert = certify_default(&cross, DEFAULT_BUDGET)?
        .certificate()
        .expect("the cross orbit is infinite");
    println!("k = {}, δ = {:.4}, λ = {:.4}", cert.k, cert.delta, cert.lambda);

    let screen = Rect::new(-half, half, -half, half)?;
    let cut = cut_zoom(&cross, &cert, screen, DEFAULT_BUDGET)?;
    println!(
        "screen radius {:.1} needs n = {} more levels: depth {}, {} points on screen",
        cut.radius_bound,
        cut.n,
        cut.depth,
        cut.points.len()
    );
    let spec = RasterSpec::new(screen, 800, 800)?.with_point_radius(1);
    write_image(
        &rasterize(&cut.points, &spec),
        "cross-cut.ppm".as_ref(),
        OutputFormat::Ppm,
    )?;
    println!("wrote cross-cut.ppm");
    Ok(())
}
