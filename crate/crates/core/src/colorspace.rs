//! sRGB ⇄ CIE L\*a\*b\* conversion, hue/chroma derivation, and the CIEDE2000
//! color-difference metric.
//!
//! Conventions: D65 white point, 2° standard observer, exact piecewise
//! IEC 61966-2-1 transfer curve. All math in f64.

/// 8-bit sRGB color, IEC 61966-2-1 encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SrgbColor {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl SrgbColor {
    pub fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    /// Lowercase `#rrggbb`.
    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }

    /// Parses `#rrggbb` (case-insensitive).
    pub fn from_hex(s: &str) -> Option<Self> {
        let s = s.strip_prefix('#')?;
        if s.len() != 6 {
            return None;
        }
        let v = u32::from_str_radix(s, 16).ok()?;
        Some(Self::new((v >> 16) as u8, (v >> 8) as u8, v as u8))
    }
}

/// A point in CIE L\*a\*b\*. For colors converted from valid sRGB,
/// `l` lies in [0, 100]; `a` and `b` are finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabColor {
    pub fn new(l: f64, a: f64, b: f64) -> Self {
        Self { l, a, b }
    }
}

/// Hue angle in degrees, [0, 360), and chroma `sqrt(a² + b²)`.
/// Zero chroma maps to hue 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneAngle {
    pub h: f64,
    pub c: f64,
}

/// `lab_to_srgb` result. `clamped` is set when the Lab point fell outside the
/// sRGB gamut and channels were clipped; deviations under 1e-9 in linear
/// space are treated as round-off, not as gamut excursions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GamutMapped {
    pub color: SrgbColor,
    pub clamped: bool,
}

// sRGB (D65) → XYZ, and back. High-precision values derived from the
// primaries; white point = row sums of the forward matrix.
const M_FWD: [[f64; 3]; 3] = [
    [0.4124564390896921, 0.357576077643909, 0.18043748326639894],
    [0.21267285140562253, 0.715152155287818, 0.07217499330655958],
    [0.019333895582329317, 0.11919202588130297, 0.9503040785363677],
];
const M_INV: [[f64; 3]; 3] = [
    [3.2404541621141045, -1.5371385127977166, -0.498531409556016],
    [-0.969266030505187, 1.8760108454466942, 0.04155601753034984],
    [0.05564343095911469, -0.20402591351675387, 1.0572251882231791],
];
const WHITE: [f64; 3] = [
    M_FWD[0][0] + M_FWD[0][1] + M_FWD[0][2],
    M_FWD[1][0] + M_FWD[1][1] + M_FWD[1][2],
    M_FWD[2][0] + M_FWD[2][1] + M_FWD[2][2],
];

// CIE constants, exact rationals.
const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

fn srgb_decode(c: u8) -> f64 {
    let v = c as f64 / 255.0;
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn srgb_encode(v: f64) -> f64 {
    if v <= 0.0031308 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.powf(1.0 / 3.0)
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

/// sRGB → L\*a\*b\* under D65/2°. Neutral inputs (r = g = b) produce
/// a = b = 0 exactly: grays stay on the lightness axis instead of picking up
/// round-off from the matrix product.
pub fn srgb_to_lab(c: SrgbColor) -> LabColor {
    if c.r == c.g && c.g == c.b {
        // Y/Yn reduces to the decoded channel; X/Xn and Z/Zn are identical.
        let fy = lab_f(srgb_decode(c.r));
        return LabColor::new(116.0 * fy - 16.0, 0.0, 0.0);
    }
    let (r, g, b) = (srgb_decode(c.r), srgb_decode(c.g), srgb_decode(c.b));
    let x = M_FWD[0][0] * r + M_FWD[0][1] * g + M_FWD[0][2] * b;
    let y = M_FWD[1][0] * r + M_FWD[1][1] * g + M_FWD[1][2] * b;
    let z = M_FWD[2][0] * r + M_FWD[2][1] * g + M_FWD[2][2] * b;
    let fx = lab_f(x / WHITE[0]);
    let fy = lab_f(y / WHITE[1]);
    let fz = lab_f(z / WHITE[2]);
    LabColor::new(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))
}

/// L\*a\*b\* → sRGB. Out-of-gamut channels are clamped and flagged.
/// Round trip with `srgb_to_lab` is identity within ±1 per channel.
pub fn lab_to_srgb(c: LabColor) -> GamutMapped {
    let fy = (c.l + 16.0) / 116.0;
    let fx = fy + c.a / 500.0;
    let fz = fy - c.b / 200.0;
    let x = finv(fx) * WHITE[0];
    let y = if c.l > KAPPA * EPSILON {
        fy * fy * fy
    } else {
        c.l / KAPPA
    } * WHITE[1];
    let z = finv(fz) * WHITE[2];

    let lin = [
        M_INV[0][0] * x + M_INV[0][1] * y + M_INV[0][2] * z,
        M_INV[1][0] * x + M_INV[1][1] * y + M_INV[1][2] * z,
        M_INV[2][0] * x + M_INV[2][1] * y + M_INV[2][2] * z,
    ];
    const GAMUT_EPS: f64 = 1e-9;
    let clamped = lin
        .iter()
        .any(|v| !(-GAMUT_EPS..=1.0 + GAMUT_EPS).contains(v));
    let quant = |v: f64| (srgb_encode(v.clamp(0.0, 1.0)) * 255.0).round() as u8;
    GamutMapped {
        color: SrgbColor::new(quant(lin[0]), quant(lin[1]), quant(lin[2])),
        clamped,
    }
}

fn finv(f: f64) -> f64 {
    let f3 = f * f * f;
    if f3 > EPSILON {
        f3
    } else {
        (116.0 * f - 16.0) / KAPPA
    }
}

/// Hue angle of the (a, b) vector in degrees, [0, 360), plus chroma.
/// a = b = 0 returns h = 0, C = 0.
pub fn hue_angle(c: LabColor) -> ToneAngle {
    if c.a == 0.0 && c.b == 0.0 {
        return ToneAngle { h: 0.0, c: 0.0 };
    }
    let mut h = c.b.atan2(c.a).to_degrees();
    if h < 0.0 {
        h += 360.0;
    }
    // atan2 may round to a tiny negative; +360 then lands on 360 exactly.
    if h >= 360.0 {
        h = 0.0;
    }
    ToneAngle {
        h,
        c: c.a.hypot(c.b),
    }
}

/// CIEDE2000 color difference. Symmetric, zero iff the inputs are identical.
///
/// The h̄′ and Δh′ case analysis follows the standard formulation, including
/// the zero-chroma branches; the published conformance pairs exercise every
/// branch.
pub fn ciede2000(x: LabColor, y: LabColor) -> f64 {
    const POW25_7: f64 = 6103515625.0; // 25^7

    let c1 = x.a.hypot(x.b);
    let c2 = y.a.hypot(y.b);
    let cbar = (c1 + c2) / 2.0;
    let cbar7 = cbar.powi(7);
    let g = 0.5 * (1.0 - (cbar7 / (cbar7 + POW25_7)).sqrt());

    let ap1 = (1.0 + g) * x.a;
    let ap2 = (1.0 + g) * y.a;
    let cp1 = ap1.hypot(x.b);
    let cp2 = ap2.hypot(y.b);

    let hp = |ap: f64, b: f64| -> f64 {
        if ap == 0.0 && b == 0.0 {
            return 0.0;
        }
        let h = b.atan2(ap).to_degrees();
        if h < 0.0 {
            h + 360.0
        } else {
            h
        }
    };
    let hp1 = hp(ap1, x.b);
    let hp2 = hp(ap2, y.b);

    let dl = y.l - x.l;
    let dc = cp2 - cp1;
    let dhp = if cp1 * cp2 == 0.0 {
        0.0
    } else {
        let d = hp2 - hp1;
        if d > 180.0 {
            d - 360.0
        } else if d < -180.0 {
            d + 360.0
        } else {
            d
        }
    };
    let dh_big = 2.0 * (cp1 * cp2).sqrt() * (dhp.to_radians() / 2.0).sin();

    let lbar = (x.l + y.l) / 2.0;
    let cpbar = (cp1 + cp2) / 2.0;
    let hbar = if cp1 * cp2 == 0.0 {
        hp1 + hp2
    } else {
        let mut hb = (hp1 + hp2) / 2.0;
        if (hp1 - hp2).abs() > 180.0 {
            if hb < 180.0 {
                hb += 180.0;
            } else {
                hb -= 180.0;
            }
        }
        hb
    };

    let t = 1.0 - 0.17 * (hbar - 30.0).to_radians().cos()
        + 0.24 * (2.0 * hbar).to_radians().cos()
        + 0.32 * (3.0 * hbar + 6.0).to_radians().cos()
        - 0.20 * (4.0 * hbar - 63.0).to_radians().cos();

    let dtheta = 30.0 * (-(((hbar - 275.0) / 25.0) * ((hbar - 275.0) / 25.0))).exp();
    let cpbar7 = cpbar.powi(7);
    let rc = 2.0 * (cpbar7 / (cpbar7 + POW25_7)).sqrt();
    let lm50sq = (lbar - 50.0) * (lbar - 50.0);
    let sl = 1.0 + 0.015 * lm50sq / (20.0 + lm50sq).sqrt();
    let sc = 1.0 + 0.045 * cpbar;
    let sh = 1.0 + 0.015 * cpbar * t;
    let rt = -(2.0 * dtheta).to_radians().sin() * rc;

    let (vl, vc, vh) = (dl / sl, dc / sc, dh_big / sh);
    (vl * vl + vc * vc + vh * vh + rt * vc * vh).sqrt()
}
