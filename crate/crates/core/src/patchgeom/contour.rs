use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::CoverPoint;

/// Closed marker curve in the cover.
///
/// The last marker connects back to `markers[0]` shifted by `2π·winding`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub markers: Vec<CoverPoint>,
    /// Vorticity jump across the curve, `+1` or `-1`.
    pub strength: f64,
    pub winding: i32,
    /// Index of a Lagrangian marker that remeshing must keep.
    pub tracer: Option<usize>,
}

impl Contour {
    pub fn new(markers: Vec<CoverPoint>, strength: f64) -> Self {
        Self {
            markers,
            strength,
            winding: 0,
            tracer: None,
        }
    }

    pub fn with_winding(mut self, winding: i32) -> Self {
        self.winding = winding;
        self
    }

    pub fn with_tracer(mut self, index: usize) -> Self {
        self.tracer = Some(index);
        self
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    /// End point of the closing segment.
    pub fn closing_point(&self) -> CoverPoint {
        self.markers[0].shifted(self.winding as f64)
    }

    /// Marker `i`, with indices outside `0..len` continued periodically
    /// through the winding shift.
    pub fn marker_ext(&self, i: isize) -> CoverPoint {
        let n = self.markers.len() as isize;
        let wraps = i.div_euclid(n);
        let p = self.markers[i.rem_euclid(n) as usize];
        if wraps == 0 {
            p
        } else {
            p.shifted((wraps * self.winding as isize) as f64)
        }
    }

    /// Segments `(p_i, p_{i+1})`, the last one closing the curve.
    pub fn segments(&self) -> impl Iterator<Item = (CoverPoint, CoverPoint)> + '_ {
        let n = self.markers.len();
        (0..n).map(move |i| {
            let q = if i + 1 < n {
                self.markers[i + 1]
            } else {
                self.closing_point()
            };
            (self.markers[i], q)
        })
    }

    pub fn translate_x2(&mut self, dx2: f64) {
        for m in &mut self.markers {
            m.x2 += dx2;
        }
    }
}

/// A vortex patch: the union of regions bounded by its contours.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub contours: Vec<Contour>,
    pub label: String,
}

impl Patch {
    pub fn new(label: impl Into<String>, contours: Vec<Contour>) -> Self {
        Self {
            contours,
            label: label.into(),
        }
    }

    pub fn marker_count(&self) -> usize {
        self.contours.iter().map(Contour::len).sum()
    }

    pub fn markers(&self) -> impl Iterator<Item = CoverPoint> + '_ {
        self.contours.iter().flat_map(|c| c.markers.iter().copied())
    }

    /// Position of the first tracer marker, if any.
    pub fn tracer(&self) -> Option<CoverPoint> {
        self.contours
            .iter()
            .find_map(|c| c.tracer.map(|i| c.markers[i]))
    }

    /// Closed polygons of the cover region, each with its strength.
    ///
    /// Contours with zero winding are returned as they are. Each contour of
    /// winding `w ≠ 0` is paired with the next unpaired contour of winding
    /// `-w` and equal strength, and the two chains are joined by straight
    /// connectors into one closed polygon.
    pub fn cover_polygons(&self) -> Result<Vec<(Vec<CoverPoint>, f64)>> {
        let mut out = Vec::with_capacity(self.contours.len());
        let mut used = vec![false; self.contours.len()];
        for (i, c) in self.contours.iter().enumerate() {
            if used[i] {
                continue;
            }
            used[i] = true;
            if c.winding == 0 {
                out.push((c.markers.clone(), c.strength));
                continue;
            }
            let partner = (i + 1..self.contours.len()).find(|&j| {
                !used[j]
                    && self.contours[j].winding == -c.winding
                    && self.contours[j].strength == c.strength
            });
            let Some(j) = partner else {
                return Err(Error::Parameter(format!(
                    "contour {i} with winding {} has no partner",
                    c.winding
                )));
            };
            used[j] = true;
            let b = &self.contours[j];
            let mut poly = Vec::with_capacity(c.len() + b.len() + 2);
            poly.extend_from_slice(&c.markers);
            poly.push(c.closing_point());
            poly.extend_from_slice(&b.markers);
            poly.push(b.closing_point());
            out.push((poly, c.strength));
        }
        Ok(out)
    }
}

fn fmt_contour_header(c: &Contour) -> String {
    let tracer = c
        .tracer
        .map_or_else(|| "none".to_string(), |t| t.to_string());
    format!(
        "# contour strength={} winding={} tracer={}",
        c.strength, c.winding, tracer
    )
}

/// Serializes a patch as CSV blocks, one per contour.
///
/// Values use the shortest representation that parses back to the same
/// `f64`, so a write/read round trip is exact.
pub fn write_patch_csv(patch: &Patch) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# patch {}", patch.label);
    for c in &patch.contours {
        s.push_str(&fmt_contour_header(c));
        s.push('\n');
        s.push_str("x1,x2\n");
        for m in &c.markers {
            let _ = writeln!(s, "{},{}", m.x1, m.x2);
        }
    }
    s
}

pub fn read_patch_csv(text: &str) -> Result<Patch> {
    let what = "contour csv";
    let mut label = String::new();
    let mut contours: Vec<Contour> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line == "x1,x2" {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# patch") {
            label = rest.trim().to_string();
        } else if let Some(rest) = line.strip_prefix("# contour") {
            let mut c = Contour::new(Vec::new(), 1.0);
            for kv in rest.split_whitespace() {
                let (k, v) = kv.split_once('=').ok_or_else(|| {
                    Error::parse(what, format!("line {}: bad field {kv}", lineno + 1))
                })?;
                let bad = |e: &dyn std::fmt::Display| {
                    Error::parse(what, format!("line {}: {k}: {e}", lineno + 1))
                };
                match k {
                    "strength" => c.strength = v.parse().map_err(|e| bad(&e))?,
                    "winding" => c.winding = v.parse().map_err(|e| bad(&e))?,
                    "tracer" if v == "none" => c.tracer = None,
                    "tracer" => c.tracer = Some(v.parse().map_err(|e| bad(&e))?),
                    _ => return Err(bad(&"unknown field")),
                }
            }
            contours.push(c);
        } else {
            let c = contours
                .last_mut()
                .ok_or_else(|| Error::parse(what, "marker before contour header"))?;
            let (a, b) = line.split_once(',').ok_or_else(|| {
                Error::parse(what, format!("line {}: expected x1,x2", lineno + 1))
            })?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(what, format!("line {}: {e}", lineno + 1)))
            };
            c.markers.push(CoverPoint::new(parse(a)?, parse(b)?));
        }
    }
    for (i, c) in contours.iter().enumerate() {
        if c.markers.len() < 3 {
            return Err(Error::parse(
                what,
                format!("contour {i} has fewer than 3 markers"),
            ));
        }
        if let Some(t) = c.tracer {
            if t >= c.markers.len() {
                return Err(Error::parse(
                    what,
                    format!("contour {i}: tracer out of range"),
                ));
            }
        }
    }
    Ok(Patch { contours, label })
}

pub fn write_patch(path: &Path, patch: &Patch) -> Result<()> {
    std::fs::write(path, write_patch_csv(patch)).map_err(|e| Error::io(path, e))
}

pub fn read_patch(path: &Path) -> Result<Patch> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_patch_csv(&text)
}
