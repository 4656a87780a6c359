//! Grayscale images of maps, dataset pairs and episode trajectories.
//!
//! Grids render one pixel per cell using [`prob_to_gray`]: row 0 is the
//! robot's left and column 0 the robot, so the robot sits on the left edge
//! looking right. Episode images put world +y up.

use std::path::Path;

use crate::dataset::SamplePair;
use crate::geometry::Vec2;
use crate::occupancy::{prob_to_gray, ProbGrid};
use crate::worldgen::FloorPlan;
use crate::{Error, Result};

/// Gap between the two halves of a pair image.
const PAIR_GAP: usize = 2;
const TRAJECTORY_GRAY: u8 = 128;
const START_GRAY: u8 = 64;
const GOAL_GRAY: u8 = 192;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn filled(width: usize, height: usize, v: u8) -> Self {
        Self { width, height, pixels: vec![v; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        if x < self.width && y < self.height {
            self.pixels[y * self.width + x] = v;
        }
    }

    fn blit(&mut self, other: &GrayImage, x0: usize) {
        for y in 0..other.height {
            for x in 0..other.width {
                self.set(x0 + x, y, other.get(x, y));
            }
        }
    }
}

pub fn grid_image(p: &ProbGrid) -> GrayImage {
    let n = p.spec.resolution;
    GrayImage {
        width: n,
        height: n,
        pixels: p.values.iter().map(|&v| prob_to_gray(v)).collect(),
    }
}

/// Input on the left, target on the right, white gap between.
pub fn pair_image(pair: &SamplePair) -> GrayImage {
    let a = grid_image(&pair.input);
    let b = grid_image(&pair.target);
    let mut out = GrayImage::filled(a.width + PAIR_GAP + b.width, a.height.max(b.height), 255);
    out.blit(&a, 0);
    out.blit(&b, a.width + PAIR_GAP);
    out
}

/// Room at `px_per_m` pixels per meter: solids black, floor white, the path
/// mid-gray, start and goal as small squares.
pub fn episode_image(plan: &FloorPlan, path: &[Vec2], src: Vec2, dst: Vec2, px_per_m: f64) -> Result<GrayImage> {
    if !(px_per_m > 0.0) {
        return Err(Error::InvalidArgument("pixels per meter must be positive".into()));
    }
    let raster = plan.interior_raster(1.0 / px_per_m);
    let mut img = GrayImage::filled(raster.cols, raster.rows, 255);
    for r in 0..raster.rows {
        for c in 0..raster.cols {
            if raster.get(r, c) {
                img.set(c, raster.rows - 1 - r, 0);
            }
        }
    }
    let to_px = |p: Vec2| raster.cell_of(p).map(|(r, c)| (c, raster.rows - 1 - r));
    for w in path.windows(2) {
        let n = (w[0].dist(w[1]) * px_per_m * 2.0).ceil().max(1.0) as usize;
        for k in 0..=n {
            if let Some((x, y)) = to_px(w[0] + (w[1] - w[0]) * (k as f64 / n as f64)) {
                img.set(x, y, TRAJECTORY_GRAY);
            }
        }
    }
    for (p, v) in [(src, START_GRAY), (dst, GOAL_GRAY)] {
        if let Some((x, y)) = to_px(p) {
            for dy in 0..3 {
                for dx in 0..3 {
                    img.set((x + dx).saturating_sub(1), (y + dy).saturating_sub(1), v);
                }
            }
        }
    }
    Ok(img)
}

/// Binary PGM (P5), maxval 255.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Write as PGM or PNG, chosen by the file extension.
pub fn save_image(img: &GrayImage, path: &Path) -> Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("pgm") => std::fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e)),
        Some("png") => {
            let buf = image::GrayImage::from_raw(img.width as u32, img.height as u32, img.pixels.clone())
                .ok_or_else(|| Error::ShapeMismatch("pixel buffer does not match image size".into()))?;
            buf.save_with_format(path, image::ImageFormat::Png).map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(path, io),
                other => Error::Format(other.to_string()),
            })
        }
        _ => Err(Error::InvalidArgument(format!("{}: image must end in .pgm or .png", path.display()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::occupancy::GridSpec;

    #[test]
    fn unknown_grid_is_mid_gray() {
        let img = grid_image(&ProbGrid::unknown(GridSpec::desk()));
        assert_eq!((img.width, img.height), (64, 64));
        assert!(img.pixels.iter().all(|&v| v == 128));
    }

    #[test]
    fn pgm_header() {
        let img = GrayImage::filled(3, 2, 7);
        let bytes = encode_pgm(&img);
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(&bytes[bytes.len() - 6..], &[7; 6]);
    }

    #[test]
    fn episode_marks_path_and_solids() {
        let plan = FloorPlan::from_parts(0, Rect::new(0.0, 0.0, 2.0, 1.0), vec![]).unwrap();
        let path = [Vec2::new(0.5, 0.5), Vec2::new(1.5, 0.5)];
        let img = episode_image(&plan, &path, path[0], path[1], 10.0).unwrap();
        assert_eq!((img.width, img.height), (20, 10));
        assert_eq!(img.get(10, 4), TRAJECTORY_GRAY);
        assert_eq!(img.get(5, 4), START_GRAY);
        assert_eq!(img.get(15, 4), GOAL_GRAY);
        assert_eq!(img.get(10, 0), 255);
    }
}
