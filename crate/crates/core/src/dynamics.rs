//! Lagrangian transport of marker contours.
//!
//! Markers stay in the cover and are never wrapped in `x2`. Each step is a
//! classical RK4 step with the contour-dynamics velocity of the stage
//! configuration, followed by a remesh that keeps the marker spacing in
//! `[dmin, dmax]`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernel::{wrap_angle, CoverPoint, SegmentCloud, Vec2};
use crate::patchgeom::{read_patch, write_patch, Contour, Patch};

/// Speed above which a run is declared unstable.
pub const MAX_SPEED: f64 = 100.0;
/// Allowed relative area change of one remesh.
pub const REMESH_AREA_TOL: f64 = 1e-4;
/// Largest turning angle, in radians, of one segment on a curved arc.
const ARC_ANGLE: f64 = 0.25;
/// Adaptive refinement never goes below `dmax / REFINE_FLOOR`.
const REFINE_FLOOR: f64 = 32.0;
/// Spacing near an opposite boundary, as a multiple of the gap.
const GAP_FRACTION: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub patch: Patch,
    pub step_count: u64,
}

impl FlowState {
    pub fn new(patch: Patch) -> Self {
        Self {
            t: 0.0,
            patch,
            step_count: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dt: f64,
    /// Final time.
    pub t_end: f64,
    /// Largest marker spacing; defaults to initial perimeter / `nodes0`.
    pub dmax: Option<f64>,
    /// Smallest marker spacing; defaults to `dmax / 4`.
    pub dmin: Option<f64>,
    pub nodes0: usize,
    /// Scan lines for raster cross-checks of the symmetric difference.
    pub raster_res: usize,
    pub output_every: u64,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            t_end: 20.0,
            dmax: None,
            dmin: None,
            nodes0: 512,
            raster_res: 512,
            output_every: 10,
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad(format!("T must be >= 0, got {}", self.t_end));
        }
        if self.nodes0 < 64 {
            return bad(format!("nodes0 must be >= 64, got {}", self.nodes0));
        }
        if self.output_every == 0 {
            return bad("output_every must be >= 1".into());
        }
        if self.raster_res < 128 {
            return bad(format!(
                "raster_res must be >= 128, got {}",
                self.raster_res
            ));
        }
        if let (Some(lo), Some(hi)) = (self.dmin, self.dmax) {
            if !(lo > 0.0 && lo < hi) {
                return bad(format!("need 0 < dmin < dmax, got {lo}, {hi}"));
            }
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`.
    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    /// Spacing bounds for a run starting from `initial`.
    pub fn spacing(&self, initial: &Patch) -> Spacing {
        let dmax = self
            .dmax
            .unwrap_or_else(|| initial.perimeter() / self.nodes0 as f64);
        let dmin = self.dmin.unwrap_or(0.25 * dmax);
        Spacing { dmax, dmin }
    }

    /// Hash of the parameters that determine the trajectory.
    pub fn hash(&self, spacing: Spacing) -> String {
        let key = format!(
            "dt={:?};dmax={:?};dmin={:?};nodes0={}",
            self.dt, spacing.dmax, spacing.dmin, self.nodes0
        );
        hex::encode(Sha256::digest(key.as_bytes()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spacing {
    pub dmax: f64,
    pub dmin: f64,
}

fn displaced(patch: &Patch, base: &[CoverPoint], vel: &[Vec2], h: f64) -> Patch {
    let mut out = patch.clone();
    let mut k = 0;
    for c in &mut out.contours {
        for m in &mut c.markers {
            *m = base[k] + h * vel[k];
            k += 1;
        }
    }
    out
}

fn stage_velocity(patch: &Patch, t: f64) -> Result<Vec<Vec2>> {
    let cloud = SegmentCloud::new(patch)?;
    let points: Vec<CoverPoint> = patch.markers().collect();
    let v = cloud.velocities(&points);
    if let Some(bad) = v.iter().find(|u| !u.is_finite() || u.norm() > MAX_SPEED) {
        return Err(Error::BlowUp {
            speed: bad.norm(),
            t,
        });
    }
    Ok(v)
}

/// One RK4 step of size `dt`.
pub fn step(state: &FlowState, dt: f64) -> Result<FlowState> {
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let base: Vec<CoverPoint> = state.patch.markers().collect();
    let t = state.t;
    let k1 = stage_velocity(&state.patch, t)?;
    let p2 = displaced(&state.patch, &base, &k1, 0.5 * dt);
    let k2 = stage_velocity(&p2, t + 0.5 * dt)?;
    let p3 = displaced(&state.patch, &base, &k2, 0.5 * dt);
    let k3 = stage_velocity(&p3, t + 0.5 * dt)?;
    let p4 = displaced(&state.patch, &base, &k3, dt);
    let k4 = stage_velocity(&p4, t + dt)?;
    let mut patch = state.patch.clone();
    let mut k = 0;
    for c in &mut patch.contours {
        for m in &mut c.markers {
            let u = (1.0 / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
            *m = base[k] + dt * u;
            if m.x1 < -1e-12 {
                return Err(Error::BelowWall { x1: m.x1 });
            }
            k += 1;
        }
    }
    Ok(FlowState {
        t: t + dt,
        patch,
        step_count: state.step_count + 1,
    })
}

fn contour_area(c: &Contour) -> f64 {
    c.segments()
        .map(|(p, q)| 0.5 * (p.x1 + q.x1) * (q.x2 - p.x2))
        .sum()
}

/// Catmull–Rom value at the middle of `p1 p2`.
fn cubic_midpoint(p0: CoverPoint, p1: CoverPoint, p2: CoverPoint, p3: CoverPoint) -> CoverPoint {
    let f = |a: f64, b: f64, c: f64, d: f64| (-a + 9.0 * b + 9.0 * c - d) / 16.0;
    CoverPoint::new(f(p0.x1, p1.x1, p2.x1, p3.x1), f(p0.x2, p1.x2, p2.x2, p3.x2))
}

/// Distance from every marker to the nearest marker across the patch,
/// counting only markers that are far along the contour compared to their
/// distance (the opposite side of a filament, or another contour). Gaps
/// beyond `reach` are reported as infinite.
fn opposite_gaps(patch: &Patch, reach: f64) -> Vec<Vec<f64>> {
    let ny = ((2.0 * std::f64::consts::PI / reach).floor() as i64).max(1);
    let bin_h = 2.0 * std::f64::consts::PI / ny as f64;
    let bin = |p: CoverPoint| {
        let y = wrap_angle(p.x2) + std::f64::consts::PI;
        (
            (p.x1 / reach).floor() as i64,
            ((y / bin_h).floor() as i64).rem_euclid(ny),
        )
    };
    let mut cells: HashMap<(i64, i64), Vec<(usize, usize)>> = HashMap::new();
    let mut arcs = Vec::with_capacity(patch.contours.len());
    for (ci, c) in patch.contours.iter().enumerate() {
        let mut s = Vec::with_capacity(c.len());
        let mut acc = 0.0;
        for (k, (p, q)) in c.segments().enumerate() {
            s.push(acc);
            acc += p.dist(q);
            cells.entry(bin(p)).or_default().push((ci, k));
        }
        arcs.push((s, acc));
    }
    let mut out: Vec<Vec<f64>> = patch
        .contours
        .iter()
        .map(|c| vec![f64::INFINITY; c.len()])
        .collect();
    for (ci, c) in patch.contours.iter().enumerate() {
        let (s, total) = &arcs[ci];
        for (k, &p) in c.markers.iter().enumerate() {
            let (b1, b2) = bin(p);
            let mut best = f64::INFINITY;
            for d1 in -1..=1 {
                for d2 in -1..=1 {
                    let Some(list) = cells.get(&(b1 + d1, (b2 + d2).rem_euclid(ny))) else {
                        continue;
                    };
                    for &(cj, kj) in list {
                        let q = patch.contours[cj].markers[kj];
                        let dx2 = wrap_angle(q.x2 - p.x2);
                        let d = (q.x1 - p.x1).hypot(dx2);
                        if d >= best || d > reach {
                            continue;
                        }
                        if cj == ci {
                            let along = (s[kj] - s[k]).abs();
                            if along.min(total - along) <= 3.0 * d {
                                continue;
                            }
                        }
                        best = d;
                    }
                }
            }
            out[ci][k] = best;
        }
    }
    out
}

/// Local spacing target at every marker: `dmax`, reduced on curved arcs so
/// that one segment turns by at most `ARC_ANGLE`, and near an opposite
/// boundary to twice the gap. Never below `dmax / REFINE_FLOOR`.
fn spacing_targets(c: &Contour, gaps: &[f64], dmax: f64) -> Vec<f64> {
    let n = c.len() as isize;
    let floor = dmax / REFINE_FLOOR;
    (0..n)
        .map(|i| {
            let (p0, p1, p2) = (c.marker_ext(i - 1), c.marker_ext(i), c.marker_ext(i + 1));
            let (a, b) = (p1 - p0, p2 - p1);
            let chord = p2.dist(p0);
            // Menger curvature of the three markers
            let kappa =
                2.0 * (a.u1 * b.u2 - a.u2 * b.u1).abs() / (a.norm() * b.norm() * chord).max(1e-300);
            (ARC_ANGLE / kappa)
                .min(GAP_FRACTION * gaps[i as usize])
                .clamp(floor, dmax)
        })
        .collect()
}

fn refine(c: &Contour, gaps: &[f64], dmax: f64) -> Option<Contour> {
    let n = c.len() as isize;
    let target = spacing_targets(c, gaps, dmax);
    let mut markers = Vec::with_capacity(c.len() + 16);
    let mut tracer = None;
    let mut changed = false;
    for i in 0..n {
        let p1 = c.markers[i as usize];
        if c.tracer == Some(i as usize) {
            tracer = Some(markers.len());
        }
        markers.push(p1);
        let p2 = c.marker_ext(i + 1);
        let limit = target[i as usize].min(target[((i + 1) % n) as usize]) * (1.0 + 1e-9);
        if p1.dist(p2) > limit {
            let mut mid = if p1.x1 == 0.0 && p2.x1 == 0.0 {
                CoverPoint::new(0.0, 0.5 * (p1.x2 + p2.x2))
            } else {
                cubic_midpoint(c.marker_ext(i - 1), p1, p2, c.marker_ext(i + 2))
            };
            mid.x1 = mid.x1.max(0.0);
            markers.push(mid);
            changed = true;
        }
    }
    changed.then(|| Contour {
        markers,
        tracer,
        ..c.clone()
    })
}

/// Drops every marker closer than `crowd` to the previous kept marker.
/// Markers squeezed together at a converging point carry no shape and
/// fold over each other if left in place.
fn thin_crowded(c: &Contour, crowd: f64) -> Option<Contour> {
    let n = c.len();
    let mut markers: Vec<CoverPoint> = Vec::with_capacity(n);
    let mut tracer = None;
    for (i, &m) in c.markers.iter().enumerate() {
        let is_tracer = c.tracer == Some(i);
        if let Some(&last) = markers.last() {
            let next_kept = if i + 1 == n {
                markers[0]
            } else {
                c.markers[i + 1]
            };
            if !is_tracer
                && markers.len() + (n - i) > 5
                && (last.dist(m) < crowd || (i + 1 == n && m.dist(next_kept) < crowd))
            {
                continue;
            }
        }
        if is_tracer {
            tracer = Some(markers.len());
        }
        markers.push(m);
    }
    (markers.len() < n).then(|| Contour {
        markers,
        tracer,
        ..c.clone()
    })
}

fn coarsen(c: &Contour, gaps: &[f64], spacing: Spacing) -> Option<Contour> {
    let n = c.len();
    if n <= 4 {
        return None;
    }
    let len: Vec<f64> = (0..n as isize)
        .map(|i| c.marker_ext(i).dist(c.marker_ext(i + 1)))
        .collect();
    let target = spacing_targets(c, gaps, spacing.dmax);
    let short = |i: isize| len[i.rem_euclid(n as isize) as usize] < spacing.dmin;
    let crowd = 0.5 * spacing.dmax / REFINE_FLOOR;
    let mut keep = vec![true; n];
    let mut removed = 0;
    let mut last_removed = false;
    for i in 1..n {
        let ii = i as isize;
        let smooth_run = short(ii - 1)
            && short(ii)
            && (short(ii - 2) || short(ii + 1))
            && len[i - 1] + len[i] <= target[i - 1].min(target[i]).min(target[(i + 1) % n]);
        // markers squeezed together at a converging point carry no shape
        let crowded = len[i - 1].min(len[i]) < crowd;
        let candidate = smooth_run || crowded;
        if candidate && !last_removed && c.tracer != Some(i) && n - removed > 4 {
            keep[i] = false;
            removed += 1;
            last_removed = true;
        } else {
            last_removed = false;
        }
    }
    if removed == 0 {
        return None;
    }
    let mut markers = Vec::with_capacity(n - removed);
    let mut tracer = None;
    for (i, m) in c.markers.iter().enumerate() {
        if keep[i] {
            if c.tracer == Some(i) {
                tracer = Some(markers.len());
            }
            markers.push(*m);
        }
    }
    Some(Contour {
        markers,
        tracer,
        ..c.clone()
    })
}

/// Restores marker spacing to `[dmin, dmax]` on every contour.
///
/// Segments longer than `dmax` are split at the Catmull–Rom midpoint.
/// On strongly curved arcs the upper bound tightens so that a segment
/// turns by at most a quarter radian, and near another part of the
/// boundary it tightens to twice the gap, down to `dmax / 32`; this keeps
/// thin filaments resolved. Runs of segments shorter than `dmin`
/// lose every other marker unless the arc is curved, and markers closer
/// than half the refinement floor are always thinned.
pub fn remesh(state: &FlowState, spacing: Spacing) -> Result<FlowState> {
    let total: f64 = state
        .patch
        .contours
        .iter()
        .map(|c| c.strength * contour_area(c))
        .sum();
    let scale = total.abs().max(1e-300);
    let mut patch = state.patch.clone();
    let before: Vec<f64> = patch.contours.iter().map(contour_area).collect();
    let reach = spacing.dmax / GAP_FRACTION;
    for _ in 0..8 {
        let gaps = opposite_gaps(&patch, reach);
        let mut changed = false;
        for (c, g) in patch.contours.iter_mut().zip(&gaps) {
            if let Some(r) = refine(c, g, spacing.dmax) {
                *c = r;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for c in &mut patch.contours {
        if let Some(r) = thin_crowded(c, 0.5 * spacing.dmax / REFINE_FLOOR) {
            *c = r;
        }
    }
    let gaps = opposite_gaps(&patch, reach);
    for (c, g) in patch.contours.iter_mut().zip(&gaps) {
        if let Some(r) = coarsen(c, g, spacing) {
            *c = r;
        }
    }
    for (ci, c) in patch.contours.iter().enumerate() {
        let relative = (contour_area(c) - before[ci]).abs() / scale;
        if relative > REMESH_AREA_TOL {
            return Err(Error::AreaDistortion {
                contour: ci,
                relative,
            });
        }
    }
    Ok(FlowState {
        patch,
        ..state.clone()
    })
}

/// Rejects proper crossings between any two segments of the projected
/// patch.
pub fn check_simple(patch: &Patch, t: f64) -> Result<()> {
    struct Seg {
        p: CoverPoint,
        q: CoverPoint,
        mid2: f64,
        half: f64,
        lo1: f64,
        hi1: f64,
        contour: usize,
        index: usize,
        n: usize,
    }
    let mut segs = Vec::with_capacity(patch.marker_count());
    for (ci, c) in patch.contours.iter().enumerate() {
        for (k, (p, q)) in c.segments().enumerate() {
            segs.push(Seg {
                p,
                q,
                mid2: 0.5 * (p.x2 + q.x2),
                half: 0.5 * (q.x2 - p.x2).abs(),
                lo1: p.x1.min(q.x1),
                hi1: p.x1.max(q.x1),
                contour: ci,
                index: k,
                n: c.len(),
            });
        }
    }
    let orient = |a: CoverPoint, b: CoverPoint, c: CoverPoint| {
        (b.x1 - a.x1) * (c.x2 - a.x2) - (b.x2 - a.x2) * (c.x1 - a.x1)
    };
    for (a_idx, a) in segs.iter().enumerate() {
        for (b_idx, b) in segs.iter().enumerate().skip(a_idx + 1) {
            if a.hi1 < b.lo1 || b.hi1 < a.lo1 {
                continue;
            }
            let gap = wrap_angle(b.mid2 - a.mid2);
            if gap.abs() > a.half + b.half {
                continue;
            }
            if a.contour == b.contour {
                let d = a.index.abs_diff(b.index);
                if d <= 1 || d == a.n - 1 {
                    continue;
                }
            }
            let shift = gap - (b.mid2 - a.mid2);
            let (bp, bq) = (
                CoverPoint::new(b.p.x1, b.p.x2 + shift),
                CoverPoint::new(b.q.x1, b.q.x2 + shift),
            );
            let o1 = orient(a.p, a.q, bp);
            let o2 = orient(a.p, a.q, bq);
            let o3 = orient(bp, bq, a.p);
            let o4 = orient(bp, bq, a.q);
            if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                return Err(Error::SelfIntersection {
                    first: a_idx,
                    second: b_idx,
                    t,
                });
            }
        }
    }
    Ok(())
}

/// JSON sidecar of a contour checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub t: f64,
    #[serde(rename = "stepCount")]
    pub step_count: u64,
    #[serde(rename = "cfgHash")]
    pub cfg_hash: String,
    pub dmax: f64,
    pub dmin: f64,
}

/// Abort manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureManifest {
    pub reason: String,
    pub t: f64,
    #[serde(rename = "stepCount")]
    pub step_count: u64,
}

fn checkpoint_stem(dir: &Path, step: u64) -> PathBuf {
    dir.join("checkpoints").join(format!("step_{step:08}"))
}

pub fn write_checkpoint(dir: &Path, state: &FlowState, meta: &CheckpointMeta) -> Result<()> {
    let stem = checkpoint_stem(dir, state.step_count);
    let parent = stem.parent().expect("checkpoint dir");
    std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    write_patch(&stem.with_extension("csv"), &state.patch)?;
    let json_path = stem.with_extension("json");
    std::fs::write(&json_path, serde_json::to_string_pretty(meta)?)
        .map_err(|e| Error::io(&json_path, e))
}

/// Most recent checkpoint in `dir`, if any.
pub fn read_latest_checkpoint(dir: &Path) -> Result<Option<(FlowState, CheckpointMeta)>> {
    let ck = dir.join("checkpoints");
    let Ok(entries) = std::fs::read_dir(&ck) else {
        return Ok(None);
    };
    let mut metas: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    metas.sort();
    let Some(last) = metas.pop() else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(&last).map_err(|e| Error::io(&last, e))?;
    let meta: CheckpointMeta = serde_json::from_str(&text)?;
    let patch = read_patch(&last.with_extension("csv"))?;
    let state = FlowState {
        t: meta.t,
        patch,
        step_count: meta.step_count,
    };
    Ok(Some((state, meta)))
}

pub fn write_failure(dir: &Path, err: &Error, state: &FlowState) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = FailureManifest {
        reason: err.to_string(),
        t: state.t,
        step_count: state.step_count,
    };
    let path = dir.join("failure.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))
}

/// Advances `start` to `cfg.t_end`.
///
/// Every `output_every` steps, and at the start and end, the state is
/// checked for self-intersection, checkpointed to `cfg.out_dir` when set,
/// and passed to `observe`. On a numerical error a failure manifest is
/// written next to the checkpoints and the error is returned.
pub fn run(
    cfg: &RunConfig,
    start: FlowState,
    spacing: Spacing,
    observe: &mut dyn FnMut(&FlowState) -> Result<()>,
) -> Result<FlowState> {
    cfg.validate()?;
    let hash = cfg.hash(spacing);
    let total = cfg.steps();
    let mut state = start;
    let mut emit = |state: &FlowState| -> Result<()> {
        check_simple(&state.patch, state.t)?;
        if let Some(dir) = &cfg.out_dir {
            let meta = CheckpointMeta {
                t: state.t,
                step_count: state.step_count,
                cfg_hash: hash.clone(),
                dmax: spacing.dmax,
                dmin: spacing.dmin,
            };
            write_checkpoint(dir, state, &meta)?;
        }
        observe(state)
    };
    let mut last = state.clone();
    let mut advance = || -> Result<()> {
        if state.step_count.is_multiple_of(cfg.output_every) {
            emit(&state)?;
        }
        while state.step_count < total {
            let next = step(&state, cfg.dt)?;
            state = remesh(&next, spacing)?;
            last = state.clone();
            if state.step_count.is_multiple_of(cfg.output_every) || state.step_count == total {
                emit(&state)?;
            }
        }
        Ok(())
    };
    match advance() {
        Ok(()) => Ok(state),
        Err(e) => {
            if let (Some(dir), true) = (&cfg.out_dir, e.is_numerical()) {
                write_failure(dir, &e, &last)?;
            }
            Err(e)
        }
    }
}
