//! Corpus-level mathematics: prompt centroids, ΔE diversity, threshold
//! classification, perceptibility fractions, percent change, weighted group
//! means, Welch t-tests, and ±2σ convex hulls.
//!
//! Means over collections are computed in a canonical (sorted) order with an
//! offset so that results are independent of input permutation and exact for
//! all-identical inputs. That keeps reports byte-stable regardless of how
//! work was scheduled and makes "diversity 0 iff all tones identical" hold
//! with equality, not a tolerance.

use thiserror::Error;

use crate::colorspace::{ciede2000, LabColor};
use crate::tonemetrics::ToneMeasure;

/// Lightness boundary: tones at or below are dark.
pub const DEFAULT_L_THRESHOLD: f64 = 60.0;
/// Hue boundary: tones at or below are reddish.
pub const DEFAULT_H_THRESHOLD: f64 = 55.0;
/// ΔE under this is near-indistinguishable between facial skin tones.
pub const DEFAULT_DE_THRESHOLD: f64 = 5.0;

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("empty input")]
    EmptyInput,
    #[error("need at least 2 samples per side, got {n_a} and {n_b}")]
    InsufficientSamples { n_a: usize, n_b: usize },
    #[error("percent change is undefined for a zero baseline")]
    ZeroBaseline,
    #[error("group sizes must be >= 1")]
    ZeroSize,
    #[error("bin width must be positive")]
    BadBinWidth,
}

/// Mean of `values` summed in ascending order, offset by the minimum:
/// permutation-independent and exactly `v` when every value equals `v`.
fn canonical_mean(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let x0 = sorted[0];
    let sum: f64 = sorted.iter().map(|v| v - x0).sum();
    x0 + sum / values.len() as f64
}

/// Component-wise arithmetic mean of the tones' Lab coordinates.
pub fn centroid(tones: &[ToneMeasure]) -> Result<LabColor, AggregateError> {
    if tones.is_empty() {
        return Err(AggregateError::EmptyInput);
    }
    let ls: Vec<f64> = tones.iter().map(|t| t.lab.l).collect();
    let aa: Vec<f64> = tones.iter().map(|t| t.lab.a).collect();
    let bs: Vec<f64> = tones.iter().map(|t| t.lab.b).collect();
    Ok(LabColor::new(
        canonical_mean(&ls),
        canonical_mean(&aa),
        canonical_mean(&bs),
    ))
}

/// ΔE of every tone against the group centroid, plus the mean of those
/// distances. The per-image list follows input order; the mean does not
/// depend on it.
pub fn delta_e_diversity(tones: &[ToneMeasure]) -> Result<(f64, Vec<f64>), AggregateError> {
    let center = centroid(tones)?;
    let per_image: Vec<f64> = tones.iter().map(|t| ciede2000(t.lab, center)).collect();
    Ok((canonical_mean(&per_image), per_image))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lightness {
    Light,
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HueBand {
    Reddish,
    Yellowish,
}

/// Two-axis tone class. Boundaries are inclusive on the dark and reddish
/// sides: L ≤ threshold is dark, h ≤ threshold is reddish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ToneClass {
    pub lightness: Lightness,
    pub hue: HueBand,
}

/// Classification thresholds; defaults split light/dark at 60 and
/// yellowish/reddish at 55°.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassThresholds {
    pub lightness: f64,
    pub hue: f64,
}

impl Default for ClassThresholds {
    fn default() -> Self {
        Self {
            lightness: DEFAULT_L_THRESHOLD,
            hue: DEFAULT_H_THRESHOLD,
        }
    }
}

pub fn classify_tone(tone: &ToneMeasure, thresholds: &ClassThresholds) -> ToneClass {
    ToneClass {
        lightness: if tone.l <= thresholds.lightness {
            Lightness::Dark
        } else {
            Lightness::Light
        },
        hue: if tone.h <= thresholds.hue {
            HueBand::Reddish
        } else {
            HueBand::Yellowish
        },
    }
}

/// Tone-class tally; the four cells always sum to the number of classified
/// tones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub dark_reddish: u64,
    pub dark_yellowish: u64,
    pub light_reddish: u64,
    pub light_yellowish: u64,
}

impl ClassCounts {
    pub fn add(&mut self, class: ToneClass) {
        match (class.lightness, class.hue) {
            (Lightness::Dark, HueBand::Reddish) => self.dark_reddish += 1,
            (Lightness::Dark, HueBand::Yellowish) => self.dark_yellowish += 1,
            (Lightness::Light, HueBand::Reddish) => self.light_reddish += 1,
            (Lightness::Light, HueBand::Yellowish) => self.light_yellowish += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.dark_reddish + self.dark_yellowish + self.light_reddish + self.light_yellowish
    }
}

/// Fraction of entries strictly below `threshold`.
pub fn frac_below(values: &[f64], threshold: f64) -> Result<f64, AggregateError> {
    if values.is_empty() {
        return Err(AggregateError::EmptyInput);
    }
    let n = values.iter().filter(|&&v| v < threshold).count();
    Ok(n as f64 / values.len() as f64)
}

/// Fraction of group means strictly below a baseline group's value.
pub fn frac_below_baseline(group_means: &[f64], baseline: f64) -> Result<f64, AggregateError> {
    frac_below(group_means, baseline)
}

/// Signed percentage 100·(new − old)/old.
pub fn percent_change(old: f64, new: f64) -> Result<f64, AggregateError> {
    if old == 0.0 {
        return Err(AggregateError::ZeroBaseline);
    }
    Ok(100.0 * (new - old) / old)
}

/// Σ size·value / Σ size over (size, value) pairs.
pub fn weighted_group_mean(groups: &[(u64, f64)]) -> Result<f64, AggregateError> {
    if groups.is_empty() {
        return Err(AggregateError::EmptyInput);
    }
    if groups.iter().any(|&(size, _)| size == 0) {
        return Err(AggregateError::ZeroSize);
    }
    let total: u64 = groups.iter().map(|&(s, _)| s).sum();
    let sum: f64 = groups.iter().map(|&(s, v)| s as f64 * v).sum();
    Ok(sum / total as f64)
}

/// Mean and sample standard deviation (n − 1 denominator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
    /// True when n = 1, where the sample deviation is undefined and
    /// reported as 0.
    pub single_sample: bool,
}

pub fn mean_std(values: &[f64]) -> Result<MeanStd, AggregateError> {
    if values.is_empty() {
        return Err(AggregateError::EmptyInput);
    }
    let n = values.len();
    let mean = canonical_mean(values);
    if n == 1 {
        return Ok(MeanStd {
            mean,
            std: 0.0,
            n,
            single_sample: true,
        });
    }
    let mut sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    sq.sort_by(f64::total_cmp);
    let var = sq.iter().sum::<f64>() / (n - 1) as f64;
    Ok(MeanStd {
        mean,
        std: var.sqrt(),
        n,
        single_sample: false,
    })
}

/// Welch's t-test outcome. `degenerate` marks the zero-variance shortcut
/// where the statistic is exact rather than estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub significant_05: bool,
    pub significant_001: bool,
    pub degenerate: bool,
}

impl TestResult {
    /// Star convention: * for p < 0.05, ** for p < 0.001.
    pub fn stars(&self) -> &'static str {
        if self.significant_001 {
            "**"
        } else if self.significant_05 {
            "*"
        } else {
            ""
        }
    }

    fn from_tp(t: f64, df: f64, p: f64, degenerate: bool) -> Self {
        Self {
            t_statistic: t,
            degrees_of_freedom: df,
            p_value: p,
            significant_05: p < 0.05,
            significant_001: p < 0.001,
            degenerate,
        }
    }
}

fn plain_mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sided Welch's unequal-variance t-test with Welch–Satterthwaite
/// degrees of freedom. When both samples have zero variance the sampling
/// model collapses; the result is flagged `degenerate` and reports t = 0,
/// p = 1 for equal means or t = ±∞, p = 0 otherwise.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult, AggregateError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(AggregateError::InsufficientSamples {
            n_a: a.len(),
            n_b: b.len(),
        });
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = plain_mean_var(a);
    let (mb, vb) = plain_mean_var(b);

    if va == 0.0 && vb == 0.0 {
        return Ok(if ma == mb {
            TestResult::from_tp(0.0, 0.0, 1.0, true)
        } else {
            let t = if ma > mb {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            TestResult::from_tp(t, 0.0, 0.0, true)
        });
    }

    let sa = va / na;
    let sb = vb / nb;
    let se2 = sa + sb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let p = if t == 0.0 {
        1.0
    } else {
        inc_beta(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
    };
    Ok(TestResult::from_tp(t, df, p, false))
}

// Lanczos approximation, g = 7, 9 coefficients. The published digits are
// kept verbatim even where they exceed f64 precision.
fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const G: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = G[0];
    for (i, &g) in G.iter().enumerate().skip(1) {
        acc += g / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

// Continued fraction for the incomplete beta function, evaluated with the
// modified Lentz method.
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    const EPS: f64 = 3e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m_f = m as f64;
        let m2 = 2.0 * m_f;
        let aa = m_f * (b - m_f) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m_f) * (qab + m_f) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_bt = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let bt = ln_bt.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        bt * betacf(a, b, x) / a
    } else {
        1.0 - bt * betacf(b, a, 1.0 - x) / b
    }
}

/// Convex polygon over (L, h) points, vertices in counterclockwise order
/// with no three consecutive collinear. `degenerate` marks inputs that
/// could not form a proper polygon (fewer than 3 distinct retained points,
/// or all collinear); `vertices` then holds what survived.
#[derive(Debug, Clone, PartialEq)]
pub struct HullPolygon {
    pub vertices: Vec<(f64, f64)>,
    pub degenerate: bool,
    /// Points that passed the ±2σ filter and entered the hull.
    pub retained: usize,
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Monotone-chain convex hull, counterclockwise, strict turns only.
pub fn convex_hull(points: &[(f64, f64)]) -> HullPolygon {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    pts.dedup();
    let retained = points.len();
    if pts.len() < 3 {
        return HullPolygon {
            vertices: pts,
            degenerate: true,
            retained,
        };
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    let degenerate = lower.len() < 3;
    HullPolygon {
        vertices: lower,
        degenerate,
        retained,
    }
}

/// Filters tones to those within 2 sample standard deviations of the mean
/// on both the L and h axes (an axis-aligned box), then returns the convex
/// hull of the surviving (L, h) points.
pub fn two_sigma_hull(tones: &[ToneMeasure]) -> HullPolygon {
    if tones.is_empty() {
        return HullPolygon {
            vertices: Vec::new(),
            degenerate: true,
            retained: 0,
        };
    }
    let ls: Vec<f64> = tones.iter().map(|t| t.l).collect();
    let hs: Vec<f64> = tones.iter().map(|t| t.h).collect();
    let sl = mean_std(&ls).expect("nonempty");
    let sh = mean_std(&hs).expect("nonempty");
    let pts: Vec<(f64, f64)> = tones
        .iter()
        .filter(|t| {
            (t.l - sl.mean).abs() <= 2.0 * sl.std && (t.h - sh.mean).abs() <= 2.0 * sh.std
        })
        .map(|t| (t.l, t.h))
        .collect();
    convex_hull(&pts)
}

/// Per-identity summary of one corpus slice.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptAggregate {
    pub identity_id: String,
    pub n_images: usize,
    pub centroid: LabColor,
    pub mean_l: f64,
    pub std_l: f64,
    pub mean_h: f64,
    pub std_h: f64,
    pub mean_delta_e: f64,
    /// Fraction of images whose ΔE to the centroid is strictly below the
    /// perceptibility threshold.
    pub frac_delta_e_below: f64,
    pub class_counts: ClassCounts,
}

pub fn aggregate_prompt(
    identity_id: &str,
    tones: &[ToneMeasure],
    thresholds: &ClassThresholds,
    de_threshold: f64,
) -> Result<PromptAggregate, AggregateError> {
    if tones.is_empty() {
        return Err(AggregateError::EmptyInput);
    }
    let center = centroid(tones)?;
    let (mean_delta_e, per_image) = delta_e_diversity(tones)?;
    let ls: Vec<f64> = tones.iter().map(|t| t.l).collect();
    let hs: Vec<f64> = tones.iter().map(|t| t.h).collect();
    let l_stats = mean_std(&ls)?;
    let h_stats = mean_std(&hs)?;
    let mut class_counts = ClassCounts::default();
    for t in tones {
        class_counts.add(classify_tone(t, thresholds));
    }
    Ok(PromptAggregate {
        identity_id: identity_id.to_string(),
        n_images: tones.len(),
        centroid: center,
        mean_l: l_stats.mean,
        std_l: l_stats.std,
        mean_h: h_stats.mean,
        std_h: h_stats.std,
        mean_delta_e,
        frac_delta_e_below: frac_below(&per_image, de_threshold)?,
        class_counts,
    })
}

/// Per-category summary: unweighted means over the member identities'
/// per-identity means (each identity counts once regardless of image
/// count). `significance` is filled by corpus comparison, not here.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub category: String,
    pub members: Vec<String>,
    pub size: usize,
    pub mean_l: f64,
    pub mean_h: f64,
    pub mean_delta_e: f64,
    pub significance: Option<TestResult>,
}

pub fn group_stats(
    category: &str,
    identities: &[&PromptAggregate],
) -> Result<GroupStats, AggregateError> {
    if identities.is_empty() {
        return Err(AggregateError::EmptyInput);
    }
    let ls: Vec<f64> = identities.iter().map(|p| p.mean_l).collect();
    let hs: Vec<f64> = identities.iter().map(|p| p.mean_h).collect();
    let ds: Vec<f64> = identities.iter().map(|p| p.mean_delta_e).collect();
    Ok(GroupStats {
        category: category.to_string(),
        members: identities.iter().map(|p| p.identity_id.clone()).collect(),
        size: identities.len(),
        mean_l: canonical_mean(&ls),
        mean_h: canonical_mean(&hs),
        mean_delta_e: canonical_mean(&ds),
        significance: None,
    })
}

/// Fixed-width histogram from 0 upward; returns (lo, hi, count) per bin.
/// Counts always sum to `values.len()`. Values land in bin
/// `floor(v / bin_width)`, so a boundary value opens the next bin.
pub fn histogram(values: &[f64], bin_width: f64) -> Result<Vec<(f64, f64, usize)>, AggregateError> {
    if bin_width <= 0.0 || bin_width.is_nan() {
        return Err(AggregateError::BadBinWidth);
    }
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let n_bins = (max / bin_width).floor() as usize + 1;
    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let idx = ((v / bin_width).floor() as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (i as f64 * bin_width, (i + 1) as f64 * bin_width, c))
        .collect())
}
