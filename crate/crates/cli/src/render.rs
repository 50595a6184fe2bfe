//! Grayscale PGM rendering of exposure scores with path and corridor overlays.

use std::io::Write;

use losplan::{ExposureField, RegionSet};

/// Pixel value of corridor cells.
pub const CORRIDOR_VALUE: u8 = 255;
/// Pixel value of path cells.
pub const PATH_VALUE: u8 = 0;

/// Gray level of a region with exposure score `e`: darker is more exposed.
pub fn gray(e: f64) -> u8 {
    (255.0 * (1.0 - e)).round().clamp(0.0, 255.0) as u8
}

/// One pixel per region, row 0 first. Corridor cells are painted before
/// path cells so the path stays visible.
pub fn render_pixels(field: &ExposureField, path: Option<&[usize]>, corridor: Option<&RegionSet>) -> Vec<u8> {
    let mut pixels: Vec<u8> = field.exposure_scores().into_iter().map(gray).collect();
    if let Some(corridor) = corridor {
        for c in corridor.iter() {
            pixels[c] = CORRIDOR_VALUE;
        }
    }
    for &r in path.unwrap_or(&[]) {
        pixels[r] = PATH_VALUE;
    }
    pixels
}

/// Binary PGM, maxval 255.
pub fn write_pgm<W: Write>(mut out: W, width: usize, height: usize, pixels: &[u8]) -> std::io::Result<()> {
    assert_eq!(pixels.len(), width * height, "pixel count must match image size");
    write!(out, "P5\n{width} {height}\n255\n")?;
    out.write_all(pixels)?;
    out.flush()
}
