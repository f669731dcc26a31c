//! The Sierpinski triangle as the micro-fractal of its three contracting
//! branches, iterated until the Banach bound drops below 10⁻³.
//!
//! cargo run --release --example micro_render -- triangle.png

use dualfractal::geometry::Rect;
use dualfractal::micro::{render_to_precision, DEFAULT_BUDGET};
use dualfractal::presets::preset;
use dualfractal::raster::{rasterize, write_image, OutputFormat, RasterSpec};

fn main() -> dualfractal::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "triangle.png".into());
    let triangle = preset("sierpinski-triangle")?;
    let approx = render_to_precision(&triangle.inverse, 1e-3, DEFAULT_BUDGET)?;
    println!(
        "depth {} with {} points, Hausdorff error below {:.2e}",
        approx.depth,
        approx.points.len(),
        approx.bound
    );
    let world = Rect::bounding(&approx.points.to_points())
        .expect("non-empty")
        .padded(0.04);
    let spec = RasterSpec::new(world, 768, 768)?;
    let image = rasterize(&approx.points, &spec);
    write_image(&image, out.as_ref(), OutputFormat::from_path(out.as_ref()))?;
    println!("wrote {out}");
    Ok(())
}
