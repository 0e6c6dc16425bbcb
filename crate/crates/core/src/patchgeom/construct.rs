use std::f64::consts::{FRAC_PI_2, PI};

use super::contour::{Contour, Patch};
use super::functionals::polygon_area;
use crate::error::{Error, Result};
use crate::kernel::CoverPoint;

/// The steady strip `{0 < x1 < 1}` with `n` markers per boundary circle.
///
/// The circle `x1 = 1` runs upward from `x2 = -π`; the wall circle runs
/// downward from `x2 = π`. Together they bound `[0, 1] × [-π, π]` in the
/// cover.
pub fn make_strip(n: usize) -> Result<Patch> {
    if n < 3 {
        return Err(Error::Parameter(format!(
            "strip needs at least 3 markers, got {n}"
        )));
    }
    let step = 2.0 * PI / n as f64;
    let outer = (0..n)
        .map(|i| CoverPoint::new(1.0, -PI + step * i as f64))
        .collect();
    let wall = (0..n)
        .map(|i| CoverPoint::new(0.0, PI - step * i as f64))
        .collect();
    Ok(Patch::new(
        "strip",
        vec![
            Contour::new(outer, 1.0).with_winding(1),
            Contour::new(wall, 1.0).with_winding(-1),
        ],
    ))
}

/// The strip transported by its own steady flow for time `t`:
/// every marker moves by `(0, (1 - x1) t)`.
pub fn sheared_strip(n: usize, t: f64) -> Result<Patch> {
    let mut p = make_strip(n)?;
    for c in &mut p.contours {
        for m in &mut c.markers {
            m.x2 += (1.0 - m.x1) * t;
        }
    }
    p.label = format!("sheared strip t={t}");
    Ok(p)
}

/// Rounded rectangle `{0 < x1 < a, |x2| < π - h}` of area `2π`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectangleSpec {
    pub h: f64,
    pub r: f64,
}

impl RectangleSpec {
    pub fn new(h: f64, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 0.5 * h && 0.5 * h < PI / 8.0) {
            return Err(Error::Parameter(format!(
                "rectangle needs 0 < r <= h/2 < π/8, got h = {h}, r = {r}"
            )));
        }
        Ok(Self { h, r })
    }

    /// Width giving area `2π` for the exact rounded rectangle.
    pub fn width(&self) -> f64 {
        (2.0 * PI + (4.0 - PI) * self.r * self.r) / (2.0 * PI - 2.0 * self.h)
    }

    /// Boundary length of the exact rounded rectangle.
    pub fn perimeter(&self) -> f64 {
        let (a, h, r) = (self.width(), self.h, self.r);
        2.0 * (2.0 * PI - 2.0 * h) + 2.0 * a - (8.0 - 2.0 * PI) * r
    }

    fn pieces(&self, a: f64) -> [Piece; 9] {
        let (y0, r) = (PI - self.h, self.r);
        [
            Piece::Line(CoverPoint::new(0.0, 0.0), CoverPoint::new(0.0, -y0 + r)),
            Piece::Arc(CoverPoint::new(r, -y0 + r), PI),
            Piece::Line(CoverPoint::new(r, -y0), CoverPoint::new(a - r, -y0)),
            Piece::Arc(CoverPoint::new(a - r, -y0 + r), 3.0 * FRAC_PI_2),
            Piece::Line(CoverPoint::new(a, -y0 + r), CoverPoint::new(a, y0 - r)),
            Piece::Arc(CoverPoint::new(a - r, y0 - r), 0.0),
            Piece::Line(CoverPoint::new(a - r, y0), CoverPoint::new(r, y0)),
            Piece::Arc(CoverPoint::new(r, y0 - r), FRAC_PI_2),
            Piece::Line(CoverPoint::new(0.0, y0 - r), CoverPoint::new(0.0, 0.0)),
        ]
    }

    fn markers(&self, a: f64, counts: &[usize; 9]) -> Vec<CoverPoint> {
        let r = self.r;
        let mut out = Vec::new();
        for (piece, &k) in self.pieces(a).iter().zip(counts) {
            match *piece {
                Piece::Line(p, q) => {
                    for i in 0..k {
                        let s = i as f64 / k as f64;
                        out.push(CoverPoint::new(
                            p.x1 + s * (q.x1 - p.x1),
                            p.x2 + s * (q.x2 - p.x2),
                        ));
                    }
                }
                Piece::Arc(c, start) => {
                    for i in 0..k {
                        let th = start + FRAC_PI_2 * i as f64 / k as f64;
                        let mut p = CoverPoint::new(c.x1 + r * th.cos(), c.x2 + r * th.sin());
                        if i == 0 && start == PI {
                            p.x1 = 0.0;
                        }
                        out.push(p);
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy)]
enum Piece {
    Line(CoverPoint, CoverPoint),
    /// Quarter circle of radius `r` about the center, counterclockwise from
    /// the start angle.
    Arc(CoverPoint, f64),
}

impl Piece {
    fn length(&self, r: f64) -> f64 {
        match *self {
            Piece::Line(p, q) => p.dist(q),
            Piece::Arc(..) => FRAC_PI_2 * r,
        }
    }
}

/// Rounded rectangle initial patch with about `nodes` markers.
///
/// The contour starts at the wall point `(0, 0)`, which is marked as the
/// tracer, and runs counterclockwise. The width is corrected for the
/// polygonal discretization so the marker polygon itself has area `2π`.
pub fn make_rectangle(h: f64, r: f64, nodes: usize) -> Result<Patch> {
    let spec = RectangleSpec::new(h, r)?;
    if nodes < 16 {
        return Err(Error::Parameter(format!(
            "rectangle needs at least 16 markers, got {nodes}"
        )));
    }
    let a0 = spec.width();
    let ds = spec.perimeter() / nodes as f64;
    let mut counts = [0usize; 9];
    for (k, piece) in counts.iter_mut().zip(spec.pieces(a0).iter()) {
        let min = if matches!(piece, Piece::Arc(..)) {
            2
        } else {
            1
        };
        *k = ((piece.length(r) / ds).ceil() as usize).max(min);
    }
    // the polygon area is affine in a with slope 2π - 2h
    let trial = Contour::new(spec.markers(a0, &counts), 1.0);
    let a = a0 + (2.0 * PI - polygon_area(&trial)?) / (2.0 * PI - 2.0 * h);
    let contour = Contour::new(spec.markers(a, &counts), 1.0).with_tracer(0);
    Ok(Patch::new(format!("rectangle h={h} r={r}"), vec![contour]))
}

/// Star-shaped patch `r(θ) = r0 (1 + Σ amp cos(kθ + phase))` about `center`.
pub fn make_star(
    center: CoverPoint,
    r0: f64,
    harmonics: &[(u32, f64, f64)],
    nodes: usize,
) -> Result<Patch> {
    if nodes < 3 || r0 <= 0.0 {
        return Err(Error::Parameter(
            "star needs r0 > 0 and at least 3 markers".into(),
        ));
    }
    let markers: Vec<CoverPoint> = (0..nodes)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / nodes as f64;
            let rho = r0
                * (1.0
                    + harmonics
                        .iter()
                        .map(|&(k, amp, ph)| amp * (k as f64 * th + ph).cos())
                        .sum::<f64>());
            CoverPoint::new(center.x1 + rho * th.cos(), center.x2 + rho * th.sin())
        })
        .collect();
    if let Some(m) = markers.iter().find(|m| m.x1 < 0.0) {
        return Err(Error::BelowWall { x1: m.x1 });
    }
    Ok(Patch::new("star", vec![Contour::new(markers, 1.0)]))
}
