//! Random chains instead of full enumeration: every sampled point lies in
//! the deterministic orbit of the same depth.
//!
//! cargo run --release --example chaos_game -- 20000

use dualfractal::geometry::{directed_hausdorff, Rect};
use dualfractal::micro::{chaos_game, iterate, DEFAULT_BUDGET};
use dualfractal::multifunc::MultiMap;
use dualfractal::presets::preset;
use dualfractal::raster::{rasterize, write_image, OutputFormat, RasterSpec};

fn main() -> dualfractal::Result<()> {
    let samples: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let depth = 7;
    let snowflake = preset("snowflake6")?.inverse;

    let sampled = chaos_game(&snowflake, depth, samples, 42)?;
    let full = iterate(&snowflake, &snowflake.fixed_points()?, depth, DEFAULT_BUDGET)?;
    let outside = directed_hausdorff(&sampled.to_points(), &full.points.to_points());
    println!(
        "{} distinct samples out of {} orbit points; farthest from the orbit: {:.1e}",
        sampled.len(),
        full.points.len(),
        outside.finite().unwrap_or(f64::INFINITY)
    );

    let world = Rect::bounding(&full.points.to_points())
        .expect("non-empty")
        .padded(0.04);
    let spec = RasterSpec::new(world, 600, 600)?;
    write_image(
        &rasterize(&sampled, &spec),
        "snowflake-chaos.png".as_ref(),
        OutputFormat::Png,
    )?;
    println!("wrote snowflake-chaos.png");
    Ok(())
}
