//! Per-pixel skin masks: file ingestion, a chrominance-based fallback
//! detector, coverage accounting, and the inclusion filter that drops images
//! whose skin region is too small to measure reliably.

use std::io::BufReader;
use std::path::{Path, PathBuf};

use image::ImageReader;
use thiserror::Error;

use crate::colorspace::SrgbColor;

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot decode {path}: {source}")]
    Decode {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error(
        "mask {path} is {got_w}x{got_h} but {want_w}x{want_h} was required \
         (no resample directive)"
    )]
    DimensionMismatch {
        path: PathBuf,
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("image dimensions {0}x{1} do not match pixel count {2}")]
    Inconsistent(u32, u32, usize),
    #[error("zero-sized image ({0}x{1})")]
    Empty(u32, u32),
}

/// Row-major RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    pixels: Vec<SrgbColor>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32, pixels: Vec<SrgbColor>) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::Empty(width, height));
        }
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(MaskError::Inconsistent(width, height, pixels.len()));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Decodes any supported image file to RGB8.
    pub fn from_path(path: &Path) -> Result<Self, MaskError> {
        let file = std::fs::File::open(path).map_err(|source| MaskError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let img = ImageReader::new(BufReader::new(file))
            .with_guessed_format()
            .map_err(|source| MaskError::Io {
                path: path.to_path_buf(),
                source,
            })?
            .decode()
            .map_err(|source| MaskError::Decode {
                path: path.to_path_buf(),
                source,
            })?
            .into_rgb8();
        let pixels = img
            .pixels()
            .map(|p| SrgbColor::new(p.0[0], p.0[1], p.0[2]))
            .collect();
        Self::new(img.width(), img.height(), pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[SrgbColor] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> SrgbColor {
        self.pixels[y as usize * self.width as usize + x as usize]
    }
}

/// Row-major boolean skin map; true = skin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkinMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

/// Outcome of the inclusion filter. `retained` ⇔ coverage ≥ threshold:
/// images are excluded only when skin covers strictly less than the
/// threshold fraction, so a coverage of exactly 0.10 is kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageVerdict {
    pub coverage: f64,
    pub retained: bool,
}

/// Default inclusion threshold: images under 10% skin coverage are dropped.
pub const DEFAULT_COVERAGE_MIN: f64 = 0.10;

/// Behavior of [`load_mask`] when file dimensions differ from the request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionPolicy {
    /// Mismatch is an error.
    RequireExact,
    /// Nearest-neighbor resample to the requested dimensions.
    ResampleNearest,
}

impl SkinMask {
    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::Empty(width, height));
        }
        if bits.len() != (width as usize) * (height as usize) {
            return Err(MaskError::Inconsistent(width, height, bits.len()));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn skin_pixel_count(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    /// Exact set-bit ratio.
    pub fn coverage(&self) -> f64 {
        self.skin_pixel_count() as f64 / (self.width as u64 * self.height as u64) as f64
    }

    pub fn verdict(&self, coverage_min: f64) -> CoverageVerdict {
        let coverage = self.coverage();
        CoverageVerdict {
            coverage,
            retained: coverage >= coverage_min,
        }
    }
}

/// Reads a single-channel mask file (PNG or PGM); any nonzero pixel is skin,
/// so both 0/1 and 0/255 encodings work. Color inputs are accepted by taking
/// the luma channel.
pub fn load_mask_native(path: &Path) -> Result<SkinMask, MaskError> {
    let file = std::fs::File::open(path).map_err(|source| MaskError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let img = ImageReader::new(BufReader::new(file))
        .with_guessed_format()
        .map_err(|source| MaskError::Io {
            path: path.to_path_buf(),
            source,
        })?
        .decode()
        .map_err(|source| MaskError::Decode {
            path: path.to_path_buf(),
            source,
        })?
        .into_luma8();
    let bits = img.pixels().map(|p| p.0[0] != 0).collect();
    SkinMask::from_bits(img.width(), img.height(), bits)
}

/// Reads a mask and reconciles it with the expected dimensions according to
/// `policy`.
pub fn load_mask(
    path: &Path,
    expected: (u32, u32),
    policy: DimensionPolicy,
) -> Result<SkinMask, MaskError> {
    let mask = load_mask_native(path)?;
    if (mask.width, mask.height) == expected {
        return Ok(mask);
    }
    match policy {
        DimensionPolicy::RequireExact => Err(MaskError::DimensionMismatch {
            path: path.to_path_buf(),
            got_w: mask.width,
            got_h: mask.height,
            want_w: expected.0,
            want_h: expected.1,
        }),
        DimensionPolicy::ResampleNearest => Ok(resample_mask_nearest(&mask, expected.0, expected.1)),
    }
}

/// Chrominance bounds for the fallback detector, inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChromaBounds {
    pub cb_min: f64,
    pub cb_max: f64,
    pub cr_min: f64,
    pub cr_max: f64,
}

impl Default for ChromaBounds {
    fn default() -> Self {
        Self {
            cb_min: 77.0,
            cb_max: 127.0,
            cr_min: 133.0,
            cr_max: 173.0,
        }
    }
}

/// Classifies pixels as skin by their YCbCr chrominance (full-range BT.601
/// as used by JFIF), then applies one 3×3 majority-smoothing pass.
///
/// This is a deliberately simple fallback for corpora that ship without
/// segmenter masks; supplied mask files always take precedence in the
/// pipeline.
pub fn heuristic_skin_detect(img: &ImageBuffer, bounds: ChromaBounds) -> SkinMask {
    let raw: Vec<bool> = img
        .pixels
        .iter()
        .map(|p| {
            let (r, g, b) = (p.r as f64, p.g as f64, p.b as f64);
            let cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
            let cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
            cb >= bounds.cb_min && cb <= bounds.cb_max && cr >= bounds.cr_min && cr <= bounds.cr_max
        })
        .collect();
    let (w, h) = (img.width as usize, img.height as usize);
    let mut smoothed = vec![false; raw.len()];
    for y in 0..h {
        let y0 = y.saturating_sub(1);
        let y1 = (y + 2).min(h);
        for x in 0..w {
            let x0 = x.saturating_sub(1);
            let x1 = (x + 2).min(w);
            let mut set = 0usize;
            let mut total = 0usize;
            for yy in y0..y1 {
                for xx in x0..x1 {
                    set += raw[yy * w + xx] as usize;
                    total += 1;
                }
            }
            // Strict majority of the clamped window, window cell included.
            smoothed[y * w + x] = set * 2 > total;
        }
    }
    SkinMask {
        width: img.width,
        height: img.height,
        bits: smoothed,
    }
}

/// Nearest-neighbor mask resampling. The source index for target index `i`
/// is `floor(i * src / dst)`, so resampling to the same size is the identity
/// and integer upscale factors replicate blocks exactly (coverage is
/// preserved bit for bit).
pub fn resample_mask_nearest(mask: &SkinMask, width: u32, height: u32) -> SkinMask {
    assert!(width >= 1 && height >= 1, "target dimensions must be >= 1");
    if (width, height) == (mask.width, mask.height) {
        return mask.clone();
    }
    let mut bits = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height as u64 {
        let sy = (y * mask.height as u64 / height as u64) as usize;
        let row = sy * mask.width as usize;
        for x in 0..width as u64 {
            let sx = (x * mask.width as u64 / width as u64) as usize;
            bits.push(mask.bits[row + sx]);
        }
    }
    SkinMask {
        width,
        height,
        bits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_image(w: u32, h: u32, c: SrgbColor) -> ImageBuffer {
        ImageBuffer::new(w, h, vec![c; (w * h) as usize]).unwrap()
    }

    #[test]
    fn uniform_blue_has_zero_coverage() {
        let img = uniform_image(8, 8, SrgbColor::new(0, 0, 255));
        let mask = heuristic_skin_detect(&img, ChromaBounds::default());
        assert_eq!(mask.coverage(), 0.0);
    }

    #[test]
    fn center_of_bounds_has_full_coverage() {
        // rgb(151, 114, 70) sits near Cb=100, Cr=150.
        let img = uniform_image(8, 8, SrgbColor::new(151, 114, 70));
        let mask = heuristic_skin_detect(&img, ChromaBounds::default());
        assert_eq!(mask.coverage(), 1.0);
    }

    #[test]
    fn verdict_boundary_is_inclusive() {
        let mut bits = vec![false; 100];
        bits.iter_mut().take(10).for_each(|b| *b = true);
        let mask = SkinMask::from_bits(10, 10, bits).unwrap();
        let v = mask.verdict(DEFAULT_COVERAGE_MIN);
        assert_eq!(v.coverage, 0.1);
        assert!(v.retained);
    }

    #[test]
    fn resample_identity_is_bit_identical() {
        let bits = vec![true, false, false, true];
        let mask = SkinMask::from_bits(2, 2, bits).unwrap();
        assert_eq!(resample_mask_nearest(&mask, 2, 2), mask);
    }

    #[test]
    fn resample_block_replicates() {
        let mask = SkinMask::from_bits(2, 2, vec![true, false, false, false]).unwrap();
        let up = resample_mask_nearest(&mask, 4, 4);
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(up.get(x, y), x < 2 && y < 2);
            }
        }
        assert_eq!(up.coverage(), mask.coverage());
    }
}
