//! Brute-force Biot–Savart quadrature over a gridded vorticity field.

use super::{kernel_half, wrap_angle, CoverPoint, Vec2};
use crate::error::Result;
use crate::rearrange::GridField;

/// Refinement of the cell that contains the evaluation point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridQuadrature {
    /// Sub-cells per direction at each refinement level.
    pub subdiv: usize,
    pub depth: usize,
}

impl Default for GridQuadrature {
    fn default() -> Self {
        Self {
            subdiv: 4,
            depth: 3,
        }
    }
}

impl GridQuadrature {
    /// Midpoint sum over one rectangle `[x0, x0+w] × [y0, y0+h]`, refined
    /// recursively around `x` while depth remains.
    fn cell(&self, x: CoverPoint, x0: f64, y0: f64, w: f64, h: f64, level: usize) -> Result<Vec2> {
        let n = self.subdiv;
        let (sw, sh) = (w / n as f64, h / n as f64);
        let mut acc = Vec2::ZERO;
        for a in 0..n {
            for b in 0..n {
                let (cx0, cy0) = (x0 + a as f64 * sw, y0 + b as f64 * sh);
                let holds_x = x.x1 >= cx0 && x.x1 < cx0 + sw && x.x2 >= cy0 && x.x2 < cy0 + sh;
                if holds_x && level + 1 < self.depth {
                    acc += self.cell(x, cx0, cy0, sw, sh, level + 1)?;
                    continue;
                }
                let mut y = CoverPoint::new(cx0 + 0.5 * sw, cy0 + 0.5 * sh);
                if y.dist(x) < 1e-3 * sw.min(sh) {
                    y.x1 += 0.5 * sw;
                }
                acc += (sw * sh) * kernel_half(x, y)?;
            }
        }
        Ok(acc)
    }
}

/// Velocity at `x` from the vorticity `field` by cell-midpoint quadrature.
pub fn velocity_from_grid(field: &GridField, x: CoverPoint, quad: GridQuadrature) -> Result<Vec2> {
    let (dx, dy) = (field.dx(), field.dy());
    let area = field.cell_area();
    // the cell containing x, with x2 taken on the fundamental domain
    let xr = CoverPoint::new(x.x1, wrap_angle(x.x2));
    let own_i = (xr.x1 / dx).floor() as isize;
    let own_j = ((xr.x2 + std::f64::consts::PI) / dy).floor() as isize;
    let mut acc = Vec2::ZERO;
    for i in 0..field.nx {
        let row = field.row(i);
        for (j, &w) in row.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            if i as isize == own_i && j as isize == own_j {
                let x0 = i as f64 * dx;
                let y0 = field.x2_center(j) - 0.5 * dy;
                let sub = GridQuadrature {
                    depth: quad.depth.max(1),
                    ..quad
                };
                acc += w * sub.cell(xr, x0, y0, dx, dy, 0)?;
            } else {
                let y = CoverPoint::new(field.x1_center(i), field.x2_center(j));
                acc += (w * area) * kernel_half(xr, y)?;
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrange::GridField;

    #[test]
    fn zero_field_gives_zero() {
        let f = GridField::zeros(16, 16, 2.0).unwrap();
        let u =
            velocity_from_grid(&f, CoverPoint::new(0.3, 0.1), GridQuadrature::default()).unwrap();
        assert_eq!(u, Vec2::ZERO);
    }

    #[test]
    fn strip_field_matches_steady_profile() {
        let f = GridField::strip(256, 256, 2.0, 0.0, 1.0).unwrap();
        let q = GridQuadrature::default();
        let u = velocity_from_grid(&f, CoverPoint::new(0.5, 0.0), q).unwrap();
        assert!(u.u1.abs() < 5e-3 && (u.u2 - 0.5).abs() < 5e-3, "{u:?}");
        let u = velocity_from_grid(&f, CoverPoint::new(1.5, 1.0), q).unwrap();
        assert!(u.norm() < 5e-3, "{u:?}");
    }
}
