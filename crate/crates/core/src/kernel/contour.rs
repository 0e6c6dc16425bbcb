//! Velocity of a patch as a boundary integral.
//!
//! With `Γ_S = -ln D / 4π`, `D = cosh a - cos b`, the divergence theorem
//! turns the area integral into
//!
//! ```text
//! u(x) = 1/4π Σ_c s_c ∮_c ( (ln D_o - ln D_m) dy1 , (ln D_o + ln D_m) dy2 )
//! ```
//!
//! where `D_o` is evaluated at `(x1 - y1, x2 - y2)` and the image term `D_m`
//! at `(x1 + y1, x2 - y2)`. On each straight segment the mean of `ln D` is
//! taken at the midpoint far from the target and by two-point Gauss at
//! moderate distance. Close to the target `ln |x - y|²` is integrated
//! exactly and the smooth remainder `ln(D / |x - y|²)` by Gauss–Legendre. The image term is the direct term for the reflected
//! target `(-x1, x2)`, so on the wall both terms are computed identically
//! and `u1` vanishes exactly.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{cosh_minus_cos, CoverPoint, HalfAngle, Vec2, FOUR_PI};
use crate::error::{Error, Result};
use crate::patchgeom::Patch;

/// Near-field radius in units of the segment length.
const NEAR_FACTOR: f64 = 3.0;
/// Radius, in segment lengths, inside which the midpoint rule is replaced
/// by two-point Gauss.
const MID_FACTOR: f64 = 64.0;
const MIN_SEGMENT: f64 = 1e-12;

// 2-point Gauss–Legendre on [0, 1], equal weights
const GL2_X: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

// 4-point Gauss–Legendre on [0, 1]
const GL_X: [f64; 4] = [
    0.069_431_844_202_973_71,
    0.330_009_478_207_571_87,
    0.669_990_521_792_428_1,
    0.930_568_155_797_026_3,
];
const GL_W: [f64; 4] = [
    0.173_927_422_568_726_93,
    0.326_072_577_431_273_07,
    0.326_072_577_431_273_07,
    0.173_927_422_568_726_93,
];

#[derive(Clone, Copy, Debug)]
struct Segment {
    p: CoverPoint,
    d1: f64,
    d2: f64,
    len: f64,
    mid: HalfAngle,
    mid_x2: f64,
    /// `D` below which the near-field rule is used
    near_d: f64,
    /// `D` below which two-point Gauss is used
    mid_d: f64,
    strength: f64,
}

/// The segments of a patch, prepared for repeated velocity evaluation.
#[derive(Clone, Debug)]
pub struct SegmentCloud {
    segs: Vec<Segment>,
}

/// `∫ ln(v² + d²) dv`
fn log_antiderivative(v: f64, d: f64) -> f64 {
    let mut f = -2.0 * v;
    if v != 0.0 {
        f += v * (v * v + d * d).ln();
    }
    if d != 0.0 {
        f += 2.0 * d * (v / d).atan();
    }
    f
}

/// `sinh(z)/z`
fn sinhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z * z / 6.0
    } else {
        z.sinh() / z
    }
}

/// `sin(z)/z`
fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// `ln(D(a, b) / (a² + b²))`, smooth through the origin.
fn log_ratio(a: f64, b: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    let r2 = a2 + b2;
    if r2 == 0.0 {
        return (0.5f64).ln();
    }
    let sa = sinhc(0.5 * a);
    let sb = sinc(0.5 * b);
    ((a2 * sa * sa + b2 * sb * sb) / (2.0 * r2)).ln()
}

impl Segment {
    /// Mean of `ln D(x - y)` over the segment, singularity handled
    /// analytically. `x` may be a reflected target with `x1 < 0`.
    fn near_mean_log(&self, x1: f64, x2: f64) -> f64 {
        // the periodic copy of the segment closest to x
        let shift = 2.0 * PI * ((x2 - self.mid_x2) / (2.0 * PI)).round();
        let px = x1 - self.p.x1;
        let py = x2 - (self.p.x2 + shift);
        let (tx, ty) = (self.d1 / self.len, self.d2 / self.len);
        let u0 = px * tx + py * ty;
        let d = (px * ty - py * tx).abs();
        let singular =
            (log_antiderivative(self.len - u0, d) - log_antiderivative(-u0, d)) / self.len;
        let smooth: f64 = GL_X
            .iter()
            .zip(GL_W.iter())
            .map(|(&s, &w)| w * log_ratio(px - s * self.d1, py - s * self.d2))
            .sum();
        singular + smooth
    }

    /// Mean of `ln D(x - y)` by two-point Gauss.
    fn gauss2_mean_log(&self, x1: f64, x2: f64) -> f64 {
        let f = |s: f64| {
            cosh_minus_cos(
                x1 - (self.p.x1 + s * self.d1),
                x2 - (self.p.x2 + s * self.d2),
            )
            .ln()
        };
        0.5 * (f(GL2_X[0]) + f(GL2_X[1]))
    }

    #[inline]
    fn mean_log(&self, d: f64, x1: f64, x2: f64) -> f64 {
        if d >= self.mid_d {
            d.ln()
        } else if d >= self.near_d {
            self.gauss2_mean_log(x1, x2)
        } else {
            self.near_mean_log(x1, x2)
        }
    }
}

impl SegmentCloud {
    pub fn new(patch: &Patch) -> Result<Self> {
        let mut segs = Vec::with_capacity(patch.marker_count());
        for (ci, c) in patch.contours.iter().enumerate() {
            for (p, q) in c.segments() {
                let (d1, d2) = (q.x1 - p.x1, q.x2 - p.x2);
                let len = d1.hypot(d2);
                if !(len >= MIN_SEGMENT) {
                    return Err(Error::DegenerateSegment {
                        contour: ci,
                        length: len,
                    });
                }
                let (m1, m2) = (p.x1 + 0.5 * d1, p.x2 + 0.5 * d2);
                let near = NEAR_FACTOR * len;
                let mid = MID_FACTOR * len;
                segs.push(Segment {
                    p,
                    d1,
                    d2,
                    len,
                    mid: HalfAngle::new(m1, m2),
                    mid_x2: m2,
                    near_d: 0.5 * near * near,
                    mid_d: 0.5 * mid * mid,
                    strength: c.strength,
                });
            }
        }
        Ok(Self { segs })
    }

    pub fn len(&self) -> usize {
        self.segs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    /// Velocity induced at `x`.
    pub fn velocity(&self, x: CoverPoint) -> Vec2 {
        let hx = HalfAngle::new(x.x1, x.x2);
        let (mut a1, mut a2) = (0.0, 0.0);
        for s in &self.segs {
            let sd = hx.sinh_diff(&s.mid);
            let ss = hx.sinh_sum(&s.mid);
            let sn = hx.sin_diff(&s.mid);
            let sn2 = sn * sn;
            let d_o = 2.0 * (sd * sd + sn2);
            let d_m = 2.0 * (ss * ss + sn2);
            let l_o = s.mean_log(d_o, x.x1, x.x2);
            let l_m = s.mean_log(d_m, -x.x1, x.x2);
            a1 += s.strength * (l_o - l_m) * s.d1;
            a2 += s.strength * (l_o + l_m) * s.d2;
        }
        Vec2::new(a1 / FOUR_PI, a2 / FOUR_PI)
    }

    /// Velocities at many points, evaluated in parallel; the result does
    /// not depend on the number of worker threads.
    pub fn velocities(&self, xs: &[CoverPoint]) -> Vec<Vec2> {
        xs.par_iter().map(|&x| self.velocity(x)).collect()
    }
}

/// Velocity of `patch` at a single point.
pub fn velocity_from_contours(patch: &Patch, x: CoverPoint) -> Result<Vec2> {
    Ok(SegmentCloud::new(patch)?.velocity(x))
}

/// Velocities at every marker of `patch`, grouped by contour.
pub fn velocity_at_markers(patch: &Patch) -> Result<Vec<Vec<Vec2>>> {
    let cloud = SegmentCloud::new(patch)?;
    let flat: Vec<CoverPoint> = patch.markers().collect();
    let mut v = cloud.velocities(&flat).into_iter();
    Ok(patch
        .contours
        .iter()
        .map(|c| v.by_ref().take(c.len()).collect())
        .collect())
}
