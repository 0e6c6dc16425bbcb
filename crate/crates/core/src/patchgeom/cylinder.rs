use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::contour::Patch;
use crate::error::Result;
use crate::kernel::{wrap_angle, CoverPoint, CylPoint};

/// Quotient map from the cover to the cylinder.
pub fn project_q(p: CoverPoint) -> CylPoint {
    CylPoint {
        x1: p.x1,
        x2: wrap_angle(p.x2),
    }
}

struct Polygon {
    points: Vec<CoverPoint>,
    strength: f64,
    lo: f64,
    hi: f64,
}

/// Projection of a patch onto the cylinder, as a membership oracle.
///
/// A point is inside when some vertical copy of it has positive total
/// winding with respect to the cover polygons. Edges follow the half-open
/// rule (lower endpoint included, upper excluded), so points on horizontal
/// boundaries resolve deterministically.
pub struct CylinderRegion {
    polys: Vec<Polygon>,
}

impl CylinderRegion {
    pub fn new(patch: &Patch) -> Result<Self> {
        let polys = patch
            .cover_polygons()?
            .into_iter()
            .map(|(points, strength)| {
                let lo = points.iter().map(|p| p.x2).fold(f64::INFINITY, f64::min);
                let hi = points
                    .iter()
                    .map(|p| p.x2)
                    .fold(f64::NEG_INFINITY, f64::max);
                Polygon {
                    points,
                    strength,
                    lo,
                    hi,
                }
            })
            .collect();
        Ok(Self { polys })
    }

    fn copy_range(&self, y: f64) -> std::ops::RangeInclusive<i64> {
        let lo = self
            .polys
            .iter()
            .map(|p| p.lo)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .polys
            .iter()
            .map(|p| p.hi)
            .fold(f64::NEG_INFINITY, f64::max);
        let two_pi = 2.0 * PI;
        ((lo - y) / two_pi).floor() as i64..=((hi - y) / two_pi).ceil() as i64
    }

    /// Signed crossings of the horizontal line `x2 = y`, as `(x1, weight)`.
    fn crossings(&self, y: f64, out: &mut Vec<(f64, f64)>) {
        out.clear();
        for poly in &self.polys {
            if y < poly.lo || y > poly.hi {
                continue;
            }
            let n = poly.points.len();
            for i in 0..n {
                let p = poly.points[i];
                let q = poly.points[(i + 1) % n];
                let sign = if p.x2 <= y && y < q.x2 {
                    1.0
                } else if q.x2 <= y && y < p.x2 {
                    -1.0
                } else {
                    continue;
                };
                let x = p.x1 + (y - p.x2) / (q.x2 - p.x2) * (q.x1 - p.x1);
                out.push((x, sign * poly.strength));
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    pub fn contains(&self, p: CylPoint) -> bool {
        let mut buf = Vec::new();
        self.copy_range(p.x2).any(|k| {
            self.crossings(p.x2 + 2.0 * PI * k as f64, &mut buf);
            // winding about a point counts the crossings to its right
            let w: f64 = buf.iter().filter(|c| c.0 > p.x1).map(|c| c.1).sum();
            w > 0.5
        })
    }

    /// Inside intervals of `x1` on the circle `x2 = y`, merged and sorted.
    pub fn row_intervals(&self, y: f64) -> Vec<(f64, f64)> {
        let mut buf = Vec::new();
        let mut spans = Vec::new();
        for k in self.copy_range(y) {
            self.crossings(y + 2.0 * PI * k as f64, &mut buf);
            let total: f64 = buf.iter().map(|c| c.1).sum();
            let mut w = total;
            let mut prev = f64::NEG_INFINITY;
            for &(x, s) in &buf {
                if w > 0.5 {
                    spans.push((prev.max(0.0), x));
                }
                w -= s;
                prev = x;
            }
        }
        merge(spans)
    }

    /// Fraction of each cell inside the region, averaged over `sub` scan
    /// lines per cell row and exact along `x1`. Rows are indexed by `x1`.
    pub fn coverage(&self, nx: usize, ny: usize, xmax: f64, sub: usize) -> Vec<f64> {
        let dx = xmax / nx as f64;
        let dy = 2.0 * PI / ny as f64;
        let mut out = vec![0.0; nx * ny];
        for j in 0..ny {
            for s in 0..sub {
                let y = -PI + dy * (j as f64 + (s as f64 + 0.5) / sub as f64);
                for (a, b) in self.row_intervals(y) {
                    let a = a.max(0.0);
                    let b = b.min(xmax);
                    if b <= a {
                        continue;
                    }
                    let i0 = (a / dx).floor() as usize;
                    let i1 = ((b / dx).ceil() as usize).min(nx);
                    for i in i0..i1 {
                        let lo = a.max(i as f64 * dx);
                        let hi = b.min((i + 1) as f64 * dx);
                        if hi > lo {
                            out[i * ny + j] += (hi - lo) / dx / sub as f64;
                        }
                    }
                }
            }
        }
        out
    }
}

fn merge(mut spans: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    spans.retain(|s| s.1 > s.0);
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
    for s in spans {
        match out.last_mut() {
            Some(last) if s.0 <= last.1 => last.1 = last.1.max(s.1),
            _ => out.push(s),
        }
    }
    out
}

/// Scan-line estimate of the strip symmetric-difference functionals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterSymDiff {
    pub area: f64,
    pub j1: f64,
    pub w: f64,
    /// `perimeter × line spacing`, a bound on the sampling error of `area`.
    pub error_bound: f64,
}

/// `∫ (c0 + c1 x) dx` over `[a, b]`
fn lin(a: f64, b: f64, c0: f64, c1: f64) -> f64 {
    c0 * (b - a) + 0.5 * c1 * (b * b - a * a)
}

/// Symmetric difference of the projected patch with `{0 < x1 < 1}`,
/// sampled on `rows` equally spaced circles `x2 = const` and integrated
/// exactly along each circle.
pub fn sym_diff_raster(patch: &Patch, rows: usize) -> Result<RasterSymDiff> {
    let region = CylinderRegion::new(patch)?;
    let dy = 2.0 * PI / rows as f64;
    let (mut area, mut j1, mut w) = (0.0, 0.0, 0.0);
    for j in 0..rows {
        let y = -PI + dy * (j as f64 + 0.5);
        // symmetric difference with [0, 1) on this circle
        let mut pieces = Vec::new();
        let mut cursor = 0.0;
        for (a, b) in region.row_intervals(y) {
            if a > cursor && cursor < 1.0 {
                pieces.push((cursor, a.min(1.0)));
            }
            if a < 1.0 {
                if b > 1.0 {
                    pieces.push((1.0, b));
                }
            } else {
                pieces.push((a, b));
            }
            cursor = cursor.max(b);
        }
        if cursor < 1.0 {
            pieces.push((cursor, 1.0));
        }
        for (a, b) in pieces {
            if b <= a {
                continue;
            }
            area += b - a;
            j1 += lin(a, b, 1.0, 1.0);
            w += if b <= 1.0 {
                lin(a, b, 1.0, -1.0)
            } else if a >= 1.0 {
                lin(a, b, -1.0, 1.0)
            } else {
                lin(a, 1.0, 1.0, -1.0) + lin(1.0, b, -1.0, 1.0)
            };
        }
    }
    Ok(RasterSymDiff {
        area: area * dy,
        j1: j1 * dy,
        w: w * dy,
        error_bound: patch.perimeter() * dy,
    })
}
