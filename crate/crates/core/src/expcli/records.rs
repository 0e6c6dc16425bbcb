use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::FlowState;
use crate::error::{Error, Result};
use crate::kernel::{strip_velocity, CoverPoint, SegmentCloud};
use crate::patchgeom::{strip_sym_diff, Patch};

pub const SERIES_HEADER: &str = "t,mass,impulse,k,perimeter,j1dist,wsymdiff,maxspeed";
pub const TRACKS_HEADER: &str = "t,wall_x1,wall_x2,min_x2,markers";

/// Diagnostics of one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub t: f64,
    pub mass: f64,
    pub impulse: f64,
    /// Vertical center of mass in the cover.
    pub k: f64,
    pub perimeter: f64,
    /// `∫ (1 + x1)` over the symmetric difference with the strip.
    pub j1dist: f64,
    /// `∫ |1 - x1|` over the symmetric difference with the strip.
    pub wsymdiff: f64,
    pub maxspeed: f64,
}

impl DiagRecord {
    fn fields(&self) -> [f64; 8] {
        [
            self.t,
            self.mass,
            self.impulse,
            self.k,
            self.perimeter,
            self.j1dist,
            self.wsymdiff,
            self.maxspeed,
        ]
    }
}

/// Wall tracer and lowest marker of one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub t: f64,
    pub wall_x1: f64,
    pub wall_x2: f64,
    pub min_x2: f64,
    pub markers: usize,
}

impl TrackRecord {
    pub fn of(state: &FlowState) -> Self {
        let wall = state
            .patch
            .tracer()
            .unwrap_or(CoverPoint::new(f64::NAN, f64::NAN));
        Self {
            t: state.t,
            wall_x1: wall.x1,
            wall_x2: wall.x2,
            min_x2: state
                .patch
                .markers()
                .map(|m| m.x2)
                .fold(f64::INFINITY, f64::min),
            markers: state.patch.marker_count(),
        }
    }
}

/// Mass, impulse and `k` from polygon moments in the cover; the strip
/// functionals from exact clipping of the projected patch.
pub fn diagnose(state: &FlowState) -> Result<DiagRecord> {
    let patch = &state.patch;
    let m = patch.moments()?;
    let sd = strip_sym_diff(patch)?;
    let cloud = SegmentCloud::new(patch)?;
    let markers: Vec<CoverPoint> = patch.markers().collect();
    let maxspeed = cloud
        .velocities(&markers)
        .into_iter()
        .map(|u| u.norm())
        .fold(0.0, f64::max);
    Ok(DiagRecord {
        t: state.t,
        mass: m.area,
        impulse: m.m1,
        k: m.vertical_center(),
        perimeter: patch.perimeter(),
        j1dist: sd.j1,
        wsymdiff: sd.w,
        maxspeed,
    })
}

/// Distance of the vertical velocity from the steady strip profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapProbe {
    /// `sup |u2 - (1 - x1)+|` over the sample points.
    pub gap: f64,
    /// `|Ω_t △ Ω̄|^(1/2)`
    pub sym_diff_sqrt: f64,
    /// `δ^(1/4)` for the initial symmetric difference `δ`.
    pub delta_quarter: f64,
}

impl GapProbe {
    pub fn ratio_sqrt(&self) -> f64 {
        self.gap / self.sym_diff_sqrt.max(1e-300)
    }

    pub fn ratio_quarter(&self) -> f64 {
        self.gap / self.delta_quarter.max(1e-300)
    }
}

/// Probes `samples` points of `[0, 2] × [-π, π)` on a deterministic
/// lattice (uniform in `x1`, golden-ratio stepping in `x2`).
pub fn velocity_gap_probe(patch: &Patch, samples: usize, delta0: f64) -> Result<GapProbe> {
    let cloud = SegmentCloud::new(patch)?;
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let points: Vec<CoverPoint> = (0..samples)
        .map(|i| {
            let x1 = 2.0 * (i as f64 + 0.5) / samples as f64;
            let x2 = -PI + 2.0 * PI * (i as f64 * golden).fract();
            CoverPoint::new(x1, x2)
        })
        .collect();
    let gap = cloud
        .velocities(&points)
        .iter()
        .zip(&points)
        .map(|(u, p)| (u.u2 - strip_velocity(p.x1)).abs())
        .fold(0.0, f64::max);
    let sd = strip_sym_diff(patch)?;
    Ok(GapProbe {
        gap,
        sym_diff_sqrt: sd.area.max(0.0).sqrt(),
        delta_quarter: delta0.max(0.0).powf(0.25),
    })
}

fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

/// One `series.csv` line, newline included.
pub(crate) fn series_row(r: &DiagRecord) -> String {
    let cells: Vec<String> = r.fields().iter().map(|&v| sig12(v)).collect();
    format!("{}\n", cells.join(","))
}

/// One `tracks.csv` line, newline included.
pub(crate) fn track_row(r: &TrackRecord) -> String {
    format!(
        "{},{},{},{},{}\n",
        sig12(r.t),
        sig12(r.wall_x1),
        sig12(r.wall_x2),
        sig12(r.min_x2),
        r.markers
    )
}

pub fn write_series_csv(path: &Path, series: &[DiagRecord]) -> Result<()> {
    let mut out = format!("{SERIES_HEADER}\n");
    out.extend(series.iter().map(series_row));
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn read_rows(path: &Path, header: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let what = path.display().to_string();
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(header) {
        return Err(Error::parse(what, format!("expected header `{header}`")));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let row = l
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(&what, e.to_string()))?;
            if row.len() != width {
                return Err(Error::parse(
                    &what,
                    format!("expected {width} columns in `{l}`"),
                ));
            }
            Ok(row)
        })
        .collect()
}

pub fn read_series_csv(path: &Path) -> Result<Vec<DiagRecord>> {
    Ok(read_rows(path, SERIES_HEADER, 8)?
        .into_iter()
        .map(|r| DiagRecord {
            t: r[0],
            mass: r[1],
            impulse: r[2],
            k: r[3],
            perimeter: r[4],
            j1dist: r[5],
            wsymdiff: r[6],
            maxspeed: r[7],
        })
        .collect())
}

pub fn write_tracks_csv(path: &Path, tracks: &[TrackRecord]) -> Result<()> {
    let mut out = format!("{TRACKS_HEADER}\n");
    out.extend(tracks.iter().map(track_row));
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_tracks_csv(path: &Path) -> Result<Vec<TrackRecord>> {
    Ok(read_rows(path, TRACKS_HEADER, 5)?
        .into_iter()
        .map(|r| TrackRecord {
            t: r[0],
            wall_x1: r[1],
            wall_x2: r[2],
            min_x2: r[3],
            markers: r[4] as usize,
        })
        .collect())
}
