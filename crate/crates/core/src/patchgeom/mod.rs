//! Marker contours in the universal cover and their geometry.
//!
//! Contours live in the cover `[0, ∞) × ℝ`. A contour with `winding = w`
//! closes through a vertical shift of `2πw`, so a circle around the cylinder
//! is a single open chain of markers. Paired `+w`/`-w` contours bound a
//! region of the cover; [`Patch::cover_polygons`] stitches them into an
//! ordinary closed polygon for the moment functionals.

mod construct;
mod contour;
mod cylinder;
mod functionals;

pub use construct::{make_rectangle, make_star, make_strip, sheared_strip, RectangleSpec};
pub use contour::{read_patch, read_patch_csv, write_patch, write_patch_csv, Contour, Patch};
pub use cylinder::{project_q, sym_diff_raster, CylinderRegion, RasterSymDiff};
pub use functionals::{
    polygon_area, polygon_moment_x1, polygon_moment_x2, polygon_perimeter, strip_sym_diff,
    PolygonMoments, StripSymDiff,
};
