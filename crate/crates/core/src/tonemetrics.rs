//! Reduction of an image's skin pixels to a single scalar tone: cluster the
//! pixels in Lab, then take the size-weighted mean of the three largest
//! clusters. Clustering on the full (L, a, b) vector and deriving the hue
//! angle from the averaged (a, b) avoids circular-mean artifacts that
//! averaging hue angles directly would introduce.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::colorspace::{hue_angle, lab_to_srgb, srgb_to_lab, LabColor, SrgbColor};
use crate::skinmask::{ImageBuffer, SkinMask};

/// Default cluster count. Three clusters carry the tone; two more absorb
/// minority artifacts such as shadows and lips.
pub const DEFAULT_K: usize = 5;
/// Default clustering seed, recorded in outputs.
pub const DEFAULT_SEED: u64 = 0;

const CONVERGENCE_EPS: f64 = 1e-6;
const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Error)]
pub enum ToneError {
    #[error("no skin samples to measure")]
    EmptySamples,
    #[error("cluster count k must be >= 1")]
    ZeroK,
    #[error("sample weights must be >= 1")]
    ZeroWeight,
    #[error("mask is {mask_w}x{mask_h} but image is {img_w}x{img_h}")]
    DimensionMismatch {
        mask_w: u32,
        mask_h: u32,
        img_w: u32,
        img_h: u32,
    },
}

/// One Lab sample with an integer multiplicity, so deduplicated pixel
/// histograms and raw per-pixel lists go through the same code path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelSample {
    pub lab: LabColor,
    pub weight: u64,
}

/// A cluster: mean Lab of its members and the summed member weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSummary {
    pub centroid: LabColor,
    pub size: u64,
}

/// Scalar tone of one image. `(l, h, c)` derive from `lab` via the hue
/// angle; `n_pixels` counts every skin pixel that entered clustering, not
/// only those in the three largest clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneMeasure {
    pub l: f64,
    pub h: f64,
    pub c: f64,
    pub lab: LabColor,
    pub preview: SrgbColor,
    pub n_pixels: u64,
}

/// Converts exactly the mask-positive pixels to Lab, in row-major order,
/// one sample of weight 1 per pixel. An all-false mask yields an empty list;
/// the coverage filter is the caller's job.
pub fn collect_skin_pixels(
    img: &ImageBuffer,
    mask: &SkinMask,
) -> Result<Vec<PixelSample>, ToneError> {
    if (img.width(), img.height()) != (mask.width(), mask.height()) {
        return Err(ToneError::DimensionMismatch {
            mask_w: mask.width(),
            mask_h: mask.height(),
            img_w: img.width(),
            img_h: img.height(),
        });
    }
    Ok(img
        .pixels()
        .iter()
        .zip(mask.bits())
        .filter(|(_, &m)| m)
        .map(|(&p, _)| PixelSample {
            lab: srgb_to_lab(p),
            weight: 1,
        })
        .collect())
}

/// Like [`collect_skin_pixels`] but deduplicates identical source colors
/// into weighted samples first, which makes clustering on large images much
/// cheaper. Tone results are identical because clustering canonicalizes its
/// input anyway.
pub fn collect_skin_histogram(
    img: &ImageBuffer,
    mask: &SkinMask,
) -> Result<Vec<PixelSample>, ToneError> {
    if (img.width(), img.height()) != (mask.width(), mask.height()) {
        return Err(ToneError::DimensionMismatch {
            mask_w: mask.width(),
            mask_h: mask.height(),
            img_w: img.width(),
            img_h: img.height(),
        });
    }
    let mut counts: std::collections::HashMap<SrgbColor, u64> = std::collections::HashMap::new();
    for (&p, _) in img.pixels().iter().zip(mask.bits()).filter(|(_, &m)| m) {
        *counts.entry(p).or_insert(0) += 1;
    }
    let mut hist: Vec<(SrgbColor, u64)> = counts.into_iter().collect();
    hist.sort_by_key(|(c, _)| (c.r, c.g, c.b));
    Ok(hist
        .into_iter()
        .map(|(c, weight)| PixelSample {
            lab: srgb_to_lab(c),
            weight,
        })
        .collect())
}

fn dist2(a: LabColor, b: LabColor) -> f64 {
    let dl = a.l - b.l;
    let da = a.a - b.a;
    let db = a.b - b.b;
    dl * dl + da * da + db * db
}

/// Sorts by (L, a, b) and merges equal Lab values, summing weights. The
/// clustering below sees only this canonical form, which makes its output
/// independent of sample order.
fn canonicalize(samples: &[PixelSample]) -> Result<Vec<PixelSample>, ToneError> {
    if samples.is_empty() {
        return Err(ToneError::EmptySamples);
    }
    if samples.iter().any(|s| s.weight == 0) {
        return Err(ToneError::ZeroWeight);
    }
    let mut pts: Vec<PixelSample> = samples.to_vec();
    pts.sort_by(|x, y| {
        (x.lab.l, x.lab.a, x.lab.b)
            .partial_cmp(&(y.lab.l, y.lab.a, y.lab.b))
            .expect("finite Lab values")
    });
    let mut merged: Vec<PixelSample> = Vec::with_capacity(pts.len());
    for s in pts {
        match merged.last_mut() {
            Some(last) if last.lab == s.lab => last.weight += s.weight,
            _ => merged.push(s),
        }
    }
    Ok(merged)
}

/// Walks the cumulative distribution of `weights` to the slot containing
/// `u ∈ [0, Σweights)`.
fn pick_weighted(weights: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cum += w;
        if u < cum {
            return i;
        }
    }
    weights.len() - 1
}

/// Weighted k-means in Lab: k-means++ initialization from a seeded ChaCha8
/// stream, then Lloyd iterations until the largest centroid movement drops
/// below 1e-6 or 100 iterations pass. If the input has no more than `k`
/// distinct values, each distinct value becomes its own cluster verbatim
/// (no arithmetic touches the coordinates). Deterministic for identical
/// (samples-as-multiset, k, seed).
pub fn kmeans_lab(
    samples: &[PixelSample],
    k: usize,
    seed: u64,
) -> Result<Vec<ClusterSummary>, ToneError> {
    if k == 0 {
        return Err(ToneError::ZeroK);
    }
    let pts = canonicalize(samples)?;
    if pts.len() <= k {
        return Ok(pts
            .into_iter()
            .map(|s| ClusterSummary {
                centroid: s.lab,
                size: s.weight,
            })
            .collect());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = pts.iter().map(|s| s.weight as f64).collect();
    let total_weight: f64 = weights.iter().sum();

    // k-means++: first center by weight, the rest by weight × squared
    // distance to the nearest chosen center.
    let mut centers: Vec<LabColor> = Vec::with_capacity(k);
    let first = pick_weighted(&weights, rng.gen::<f64>() * total_weight);
    centers.push(pts[first].lab);
    let mut d2: Vec<f64> = pts.iter().map(|s| dist2(s.lab, centers[0])).collect();
    while centers.len() < k {
        let scored: Vec<f64> = d2.iter().zip(&weights).map(|(d, w)| d * w).collect();
        let total: f64 = scored.iter().sum();
        let next = pick_weighted(&scored, rng.gen::<f64>() * total);
        centers.push(pts[next].lab);
        let c = pts[next].lab;
        for (d, s) in d2.iter_mut().zip(&pts) {
            *d = d.min(dist2(s.lab, c));
        }
    }

    let assign = |centers: &[LabColor]| -> Vec<usize> {
        pts.iter()
            .map(|s| {
                let mut best = 0usize;
                let mut best_d = dist2(s.lab, centers[0]);
                for (i, &c) in centers.iter().enumerate().skip(1) {
                    let d = dist2(s.lab, c);
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                best
            })
            .collect()
    };

    let mut assignment = assign(&centers);
    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![(0.0f64, 0.0f64, 0.0f64, 0u64); k];
        for (s, &a) in pts.iter().zip(&assignment) {
            let w = s.weight as f64;
            sums[a].0 += w * s.lab.l;
            sums[a].1 += w * s.lab.a;
            sums[a].2 += w * s.lab.b;
            sums[a].3 += s.weight;
        }
        let mut movement: f64 = 0.0;
        for (c, &(sl, sa, sb, sw)) in centers.iter_mut().zip(&sums) {
            if sw == 0 {
                continue; // empty cluster keeps its previous center
            }
            let w = sw as f64;
            let next = LabColor::new(sl / w, sa / w, sb / w);
            movement = movement.max(dist2(*c, next).sqrt());
            *c = next;
        }
        assignment = assign(&centers);
        if movement < CONVERGENCE_EPS {
            break;
        }
    }

    // Recompute centroids from the final assignment so each reported
    // centroid is exactly the mean of its members.
    let mut sums = vec![(0.0f64, 0.0f64, 0.0f64, 0u64); k];
    for (s, &a) in pts.iter().zip(&assignment) {
        let w = s.weight as f64;
        sums[a].0 += w * s.lab.l;
        sums[a].1 += w * s.lab.a;
        sums[a].2 += w * s.lab.b;
        sums[a].3 += s.weight;
    }
    Ok(sums
        .into_iter()
        .filter(|&(_, _, _, sw)| sw > 0)
        .map(|(sl, sa, sb, sw)| {
            let w = sw as f64;
            ClusterSummary {
                centroid: LabColor::new(sl / w, sa / w, sb / w),
                size: sw,
            }
        })
        .collect())
}

/// Clusters the samples, keeps the `min(3, available)` largest clusters
/// (ties broken toward lower L, then lower hue), and returns the
/// size-weighted mean of their centroids as the image's tone.
pub fn tone_of_image(samples: &[PixelSample], k: usize, seed: u64) -> Result<ToneMeasure, ToneError> {
    let mut clusters = kmeans_lab(samples, k, seed)?;
    clusters.sort_by(|x, y| {
        y.size.cmp(&x.size).then_with(|| {
            let hx = hue_angle(x.centroid).h;
            let hy = hue_angle(y.centroid).h;
            (x.centroid.l, hx)
                .partial_cmp(&(y.centroid.l, hy))
                .expect("finite centroid")
        })
    });
    clusters.truncate(3.min(k));

    let lab = if clusters.len() == 1 {
        clusters[0].centroid
    } else {
        let total: u64 = clusters.iter().map(|c| c.size).sum();
        let tw = total as f64;
        let (mut sl, mut sa, mut sb) = (0.0, 0.0, 0.0);
        for c in &clusters {
            let w = c.size as f64;
            sl += w * c.centroid.l;
            sa += w * c.centroid.a;
            sb += w * c.centroid.b;
        }
        LabColor::new(sl / tw, sa / tw, sb / tw)
    };
    let angle = hue_angle(lab);
    Ok(ToneMeasure {
        l: lab.l,
        h: angle.h,
        c: angle.c,
        lab,
        preview: lab_to_srgb(lab).color,
        n_pixels: samples.iter().map(|s| s.weight).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skinmask::SkinMask;

    fn sample(l: f64, a: f64, b: f64, w: u64) -> PixelSample {
        PixelSample {
            lab: LabColor::new(l, a, b),
            weight: w,
        }
    }

    #[test]
    fn uniform_input_is_exact_for_any_k() {
        let color = srgb_to_lab(SrgbColor::new(224, 172, 138));
        let samples = vec![PixelSample { lab: color, weight: 1 }; 40];
        for k in [1, 2, 3, 5, 9] {
            let tone = tone_of_image(&samples, k, 0).unwrap();
            assert_eq!(tone.lab, color);
            assert_eq!(tone.n_pixels, 40);
        }
    }

    #[test]
    fn two_color_split_is_the_weighted_mean() {
        let c1 = LabColor::new(60.0, 15.0, 20.0);
        let c2 = LabColor::new(40.0, 25.0, 10.0);
        let mut samples = vec![sample(c1.l, c1.a, c1.b, 1); 6];
        samples.extend(vec![sample(c2.l, c2.a, c2.b, 1); 4]);
        let tone = tone_of_image(&samples, 2, 7).unwrap();
        let expect = LabColor::new(
            (6.0 * c1.l + 4.0 * c2.l) / 10.0,
            (6.0 * c1.a + 4.0 * c2.a) / 10.0,
            (6.0 * c1.b + 4.0 * c2.b) / 10.0,
        );
        assert_eq!(tone.lab, expect);
    }

    #[test]
    fn empty_samples_are_an_error() {
        assert!(matches!(
            tone_of_image(&[], 5, 0),
            Err(ToneError::EmptySamples)
        ));
        assert!(matches!(
            kmeans_lab(&[sample(1.0, 0.0, 0.0, 1)], 0, 0),
            Err(ToneError::ZeroK)
        ));
        assert!(matches!(
            kmeans_lab(&[sample(1.0, 0.0, 0.0, 0)], 1, 0),
            Err(ToneError::ZeroWeight)
        ));
    }

    #[test]
    fn histogram_and_pixels_agree() {
        let px: Vec<SrgbColor> = (0..16)
            .map(|i| SrgbColor::new(200 - (i % 3) * 20, 150, 120))
            .collect();
        let img = ImageBuffer::new(4, 4, px).unwrap();
        let mask = SkinMask::from_bits(4, 4, vec![true; 16]).unwrap();
        let raw = collect_skin_pixels(&img, &mask).unwrap();
        let hist = collect_skin_histogram(&img, &mask).unwrap();
        assert_eq!(raw.len(), 16);
        assert_eq!(hist.iter().map(|s| s.weight).sum::<u64>(), 16);
        let ta = tone_of_image(&raw, 3, 1).unwrap();
        let tb = tone_of_image(&hist, 3, 1).unwrap();
        assert_eq!(ta.lab, tb.lab);
        assert_eq!(ta.n_pixels, tb.n_pixels);
    }

    #[test]
    fn mask_dimension_mismatch_is_an_error() {
        let img = ImageBuffer::new(2, 2, vec![SrgbColor::new(0, 0, 0); 4]).unwrap();
        let mask = SkinMask::from_bits(2, 3, vec![true; 6]).unwrap();
        assert!(matches!(
            collect_skin_pixels(&img, &mask),
            Err(ToneError::DimensionMismatch { .. })
        ));
    }
}
