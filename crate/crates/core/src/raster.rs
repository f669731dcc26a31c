//! Tagged point sets to pixels, and pixels to PPM or PNG files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU32, Ordering};

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{OrbitPoint, Point, PointSet, Rect, Tag};

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];
pub const BLACK: Rgb = [0, 0, 0];

/// Colours of the first twelve fixed-point orbits; later tags wrap around.
pub const DEFAULT_PALETTE: [Rgb; 12] = [
    [31, 119, 180],
    [214, 39, 40],
    [44, 160, 44],
    [255, 127, 14],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [127, 127, 127],
    [188, 189, 34],
    [23, 190, 207],
    [0, 0, 128],
    [128, 0, 0],
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorMode {
    #[default]
    Color,
    Bw,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Ppm,
    Png,
}

impl OutputFormat {
    /// Format implied by the file extension, PPM unless it says `png`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("png") => OutputFormat::Png,
            _ => OutputFormat::Ppm,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RasterSpec {
    pub world: Rect,
    pub width: u32,
    pub height: u32,
    pub point_radius: u32,
    pub background: Rgb,
    pub palette: Vec<Rgb>,
    pub mode: ColorMode,
}

impl RasterSpec {
    pub fn new(world: Rect, width: u32, height: u32) -> Result<Self> {
        let spec = RasterSpec {
            world,
            width,
            height,
            point_radius: 0,
            background: WHITE,
            palette: DEFAULT_PALETTE.to_vec(),
            mode: ColorMode::Color,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_point_radius(mut self, radius: u32) -> Self {
        self.point_radius = radius;
        self
    }

    pub fn with_mode(mut self, mode: ColorMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.world.width() > 0.0 && self.world.height() > 0.0) {
            return Err(Error::InvalidArgument("raster world rectangle has no area".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("raster dimensions must be at least 1".into()));
        }
        if self.palette.is_empty() && self.mode == ColorMode::Color {
            return Err(Error::InvalidArgument("empty palette".into()));
        }
        Ok(())
    }

    /// Pixel hit by `p`, `None` outside the world rectangle.
    pub fn pixel_of(&self, p: Point) -> Option<(u32, u32)> {
        if !self.world.contains(p) {
            return None;
        }
        let fx = (p.x - self.world.xmin) / self.world.width() * self.width as f64;
        let fy = (self.world.ymax - p.y) / self.world.height() * self.height as f64;
        let px = (fx.floor() as u32).min(self.width - 1);
        let py = (fy.floor() as u32).min(self.height - 1);
        Some((px, py))
    }

    fn color_of(&self, tag: u32) -> Rgb {
        match self.mode {
            ColorMode::Bw => BLACK,
            ColorMode::Color => self.palette[tag as usize % self.palette.len()],
        }
    }
}

/// An 8-bit RGB image stored row by row from the top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl Image {
    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        let data = color.repeat(width as usize * height as usize);
        Image { width, height, data }
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, color: Rgb) {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        self.data[i..i + 3].copy_from_slice(&color);
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn to_png(&self) -> std::result::Result<Vec<u8>, image::ImageError> {
        let mut out = Vec::new();
        PngEncoder::new(&mut out).write_image(&self.data, self.width, self.height, ExtendedColorType::Rgb8)?;
        Ok(out)
    }

    pub fn from_png(bytes: &[u8]) -> std::result::Result<Self, image::ImageError> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?.to_rgb8();
        Ok(Image {
            width: img.width(),
            height: img.height(),
            data: img.into_raw(),
        })
    }
}

/// Paints every tagged point inside the world rectangle. Where several
/// tags reach a pixel the smallest one is drawn.
pub fn rasterize_tagged(points: &[(Point, Tag)], spec: &RasterSpec) -> Image {
    let (w, h) = (spec.width as usize, spec.height as usize);
    let owner: Vec<AtomicU32> = (0..w * h).map(|_| AtomicU32::new(u32::MAX)).collect();
    let r = spec.point_radius as i64;
    points.par_iter().for_each(|(p, tag)| {
        let Some((px, py)) = spec.pixel_of(*p) else {
            return;
        };
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy > r * r {
                    continue;
                }
                let (x, y) = (px as i64 + dx, py as i64 + dy);
                if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                    continue;
                }
                owner[y as usize * w + x as usize].fetch_min(tag.0, Ordering::Relaxed);
            }
        }
    });
    let mut img = Image::filled(spec.width, spec.height, spec.background);
    for (i, cell) in owner.iter().enumerate() {
        let tag = cell.load(Ordering::Relaxed);
        if tag != u32::MAX {
            img.set_pixel((i % w) as u32, (i / w) as u32, spec.color_of(tag));
        }
    }
    img
}

pub fn rasterize<P: OrbitPoint>(points: &PointSet<P>, spec: &RasterSpec) -> Image {
    rasterize_tagged(&points.to_tagged_points(), spec)
}

pub fn write_image(img: &Image, path: &Path, format: OutputFormat) -> Result<()> {
    let bytes = match format {
        OutputFormat::Ppm => img.to_ppm(),
        OutputFormat::Png => img.to_png().map_err(|e| Error::Encode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?,
    };
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(&bytes)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square(w: u32) -> RasterSpec {
        RasterSpec::new(Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap(), w, w).unwrap()
    }

    #[test]
    fn empty_set_is_background() {
        let img = rasterize_tagged(&[], &square(4));
        assert_eq!(img, Image::filled(4, 4, WHITE));
    }

    #[test]
    fn midpoint_pixel() {
        let img = rasterize_tagged(&[(Point::ORIGIN, Tag(0))], &square(3));
        for y in 0..3 {
            for x in 0..3 {
                let expect = if (x, y) == (1, 1) { DEFAULT_PALETTE[0] } else { WHITE };
                assert_eq!(img.pixel(x, y), expect);
            }
        }
    }

    #[test]
    fn y_axis_points_down() {
        let spec = square(2);
        assert_eq!(spec.pixel_of(Point::new(-0.5, 0.5)), Some((0, 0)));
        assert_eq!(spec.pixel_of(Point::new(1.0, -1.0)), Some((1, 1)));
        assert_eq!(spec.pixel_of(Point::new(1.5, 0.0)), None);
    }

    #[test]
    fn smallest_tag_wins() {
        let pts = [(Point::ORIGIN, Tag(5)), (Point::new(0.01, 0.0), Tag(2))];
        let img = rasterize_tagged(&pts, &square(3));
        assert_eq!(img.pixel(1, 1), DEFAULT_PALETTE[2]);
    }

    #[test]
    fn bw_and_radius() {
        let spec = square(5).with_point_radius(1).with_mode(ColorMode::Bw);
        let img = rasterize_tagged(&[(Point::ORIGIN, Tag(3))], &spec);
        let painted: Vec<(u32, u32)> = (0..5)
            .flat_map(|y| (0..5).map(move |x| (x, y)))
            .filter(|&(x, y)| img.pixel(x, y) == BLACK)
            .collect();
        assert_eq!(painted, vec![(2, 1), (1, 2), (2, 2), (3, 2), (2, 3)]);
    }

    #[test]
    fn ppm_bytes() {
        let img = Image::filled(1, 1, WHITE);
        assert_eq!(img.to_ppm(), b"P6\n1 1\n255\n\xff\xff\xff".to_vec());
        let mut check = Image::filled(2, 2, WHITE);
        check.set_pixel(1, 0, BLACK);
        check.set_pixel(0, 1, BLACK);
        let bytes = check.to_ppm();
        let header = b"P6\n2 2\n255\n".len();
        assert_eq!(bytes.len(), header + 12);
        assert_eq!(&bytes[header..], &[255, 255, 255, 0, 0, 0, 0, 0, 0, 255, 255, 255]);
    }

    #[test]
    fn png_round_trip_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.png");
        let pts: Vec<(Point, Tag)> = (0..40)
            .map(|i| (Point::new((i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()), Tag(i % 7)))
            .collect();
        let img = rasterize_tagged(&pts, &square(17).with_point_radius(1));
        write_image(&img, &path, OutputFormat::from_path(&path)).unwrap();
        assert_eq!(Image::from_png(&fs::read(&path).unwrap()).unwrap(), img);
    }

    #[test]
    fn unwritable_path_reports_io() {
        let img = Image::filled(1, 1, WHITE);
        let err = write_image(&img, Path::new("/nonexistent/dir/x.ppm"), OutputFormat::Ppm).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    fn tagged_cloud() -> impl Strategy<Value = Vec<(Point, Tag)>> {
        prop::collection::vec((-1.2..1.2f64, -1.2..1.2f64, 0u32..4), 0..300)
            .prop_map(|v| v.into_iter().map(|(x, y, t)| (Point::new(x, y), Tag(t))).collect())
    }

    proptest! {
        #[test]
        fn order_does_not_matter(pts in tagged_cloud(), seed in any::<u64>()) {
            let spec = square(13).with_point_radius(1);
            let mut shuffled = pts.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(rasterize_tagged(&pts, &spec), rasterize_tagged(&shuffled, &spec));
        }

        #[test]
        fn per_tag_layers_compose(pts in tagged_cloud()) {
            let spec = square(11).with_point_radius(1);
            let full = rasterize_tagged(&pts, &spec);
            let mut composed = Image::filled(11, 11, WHITE);
            for t in (0..4).rev() {
                let layer: Vec<_> = pts.iter().copied().filter(|p| p.1 == Tag(t)).collect();
                let img = rasterize_tagged(&layer, &spec);
                for y in 0..11 {
                    for x in 0..11 {
                        if img.pixel(x, y) != WHITE {
                            composed.set_pixel(x, y, img.pixel(x, y));
                        }
                    }
                }
            }
            prop_assert_eq!(full, composed);
        }
    }
}
