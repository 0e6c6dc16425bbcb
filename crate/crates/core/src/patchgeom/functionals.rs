use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::contour::{Contour, Patch};
use crate::error::{Error, Result};
use crate::kernel::CoverPoint;

/// `∮ x1 dx2`, `∮ x1²/2 dx2`, `∮ x1 x2 dx2` over a closed chain, i.e. the
/// area and first moments of the enclosed region.
fn chain_integrals(segments: impl Iterator<Item = (CoverPoint, CoverPoint)>) -> PolygonMoments {
    let (mut area, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (p, q) in segments {
        let (a, b) = (p.x1, q.x1);
        let (c, d) = (p.x2, q.x2);
        let dx2 = d - c;
        area += 0.5 * (a + b) * dx2;
        m1 += dx2 * (a * a + a * b + b * b) / 6.0;
        m2 += dx2 * (2.0 * a * c + a * d + b * c + 2.0 * b * d) / 6.0;
    }
    PolygonMoments { area, m1, m2 }
}

fn closed_segments(poly: &[CoverPoint]) -> impl Iterator<Item = (CoverPoint, CoverPoint)> + '_ {
    let n = poly.len();
    (0..n).map(move |i| (poly[i], poly[(i + 1) % n]))
}

/// Signed area of a contour (positive for counterclockwise).
pub fn polygon_area(c: &Contour) -> Result<f64> {
    let area = chain_integrals(c.segments()).area;
    if area.abs() < 1e-12 {
        return Err(Error::DegeneratePolygon { area });
    }
    Ok(area)
}

pub fn polygon_perimeter(c: &Contour) -> f64 {
    c.segments().map(|(p, q)| p.dist(q)).sum()
}

/// `∫ x1 dA` over the region bounded by the contour.
pub fn polygon_moment_x1(c: &Contour) -> Result<f64> {
    polygon_area(c)?;
    Ok(chain_integrals(c.segments()).m1)
}

/// `∫ x2 dA` over the region bounded by the contour.
pub fn polygon_moment_x2(c: &Contour) -> Result<f64> {
    polygon_area(c)?;
    Ok(chain_integrals(c.segments()).m2)
}

/// Mass and first moments of a patch, strength weighted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolygonMoments {
    pub area: f64,
    /// `∫ x1 dA`, the horizontal impulse of the indicator.
    pub m1: f64,
    /// `∫ x2 dA` in the cover.
    pub m2: f64,
}

impl PolygonMoments {
    pub fn of_patch(patch: &Patch) -> Result<Self> {
        let mut out = PolygonMoments::default();
        for (poly, s) in patch.cover_polygons()? {
            let m = chain_integrals(closed_segments(&poly));
            out.area += s * m.area;
            out.m1 += s * m.m1;
            out.m2 += s * m.m2;
        }
        if out.area.abs() < 1e-12 {
            return Err(Error::DegeneratePolygon { area: out.area });
        }
        Ok(out)
    }

    /// Vertical center of mass `k`.
    pub fn vertical_center(&self) -> f64 {
        self.m2 / self.area
    }
}

impl Patch {
    pub fn moments(&self) -> Result<PolygonMoments> {
        PolygonMoments::of_patch(self)
    }

    /// Total boundary length in the cover, all contours.
    pub fn perimeter(&self) -> f64 {
        self.contours.iter().map(polygon_perimeter).sum()
    }
}

/// Functionals of `Ω △ {x1 < 1}` on the cylinder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StripSymDiff {
    /// `|Ω △ Ω̄|`
    pub area: f64,
    /// `∫_{Ω △ Ω̄} (1 + x1) dx`
    pub j1: f64,
    /// `∫_{Ω △ Ω̄} |1 - x1| dx`
    pub w: f64,
}

/// Clips a closed polygon to `x1 <= 1`.
///
/// Non-convex input can leave zero-width slivers along `x1 = 1`; they carry
/// no `∮ F(x1) dx2` contribution.
fn clip_left_of_one(poly: &[CoverPoint]) -> Vec<CoverPoint> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 8);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let p_in = p.x1 <= 1.0;
        let q_in = q.x1 <= 1.0;
        if p_in {
            out.push(p);
        }
        if p_in != q_in {
            let s = (1.0 - p.x1) / (q.x1 - p.x1);
            out.push(CoverPoint::new(1.0, p.x2 + s * (q.x2 - p.x2)));
        }
    }
    out
}

/// Symmetric-difference functionals against the strip `{0 < x1 < 1}`.
///
/// Exact for polygonal patches: the intersection with the strip is the
/// cover region clipped to `x1 <= 1`, and all three quantities follow from
/// area and `x1`-moment of the patch and of the clipped part. Assumes the
/// projection of the cover region to the cylinder is one-to-one, which
/// holds for any patch transported by the flow.
pub fn strip_sym_diff(patch: &Patch) -> Result<StripSymDiff> {
    let (mut a_t, mut m_t, mut a_in, mut m_in) = (0.0, 0.0, 0.0, 0.0);
    for (poly, s) in patch.cover_polygons()? {
        let all = chain_integrals(closed_segments(&poly));
        let clipped = clip_left_of_one(&poly);
        let inner = chain_integrals(closed_segments(&clipped));
        a_t += s * all.area;
        m_t += s * all.m1;
        a_in += s * inner.area;
        m_in += s * inner.m1;
    }
    // strip: area 2π, ∫x1 = π
    let area = a_t + 2.0 * PI - 2.0 * a_in;
    let j1 = (a_t + m_t) + 3.0 * PI - 2.0 * (a_in + m_in);
    let outside = (m_t - m_in) - (a_t - a_in);
    let uncovered = PI - (a_in - m_in);
    Ok(StripSymDiff {
        area,
        j1,
        w: outside + uncovered,
    })
}
