//! Leaf-shaped radiator outline: half-ellipse base plus an interpolating
//! Bézier tip, rotated and mirrored into a two-element pair.
//!
//! Local frame of one leaf (before rotation), lengths in mm:
//!
//! ```text
//!            y
//!            ^        upper tip curve (tip_samples)
//!            |   (a,b) ______
//!            |   .--'         `--._
//!  petiole   | /                   `-._
//!  (0,0) ----+(--------------------------> tip ----> x
//!            | \                  _.-'
//!            |   `--.______ _.--'
//!            |   (a,-b)     mirrored lower curve
//! ```
//!
//! The base is the half ellipse with semi-axes `a` (along the leaf axis)
//! and `b`, vertex at the petiole. `tip_samples` run from the junction
//! `(a, b)` to the tip; the lower edge is their reflection across the
//! leaf axis. The outline is then rotated CCW about the petiole. For a
//! pair, element A's petiole sits at `(+feed_gap/2, 0)` and element B is
//! its reflection across the feed axis `x = 0`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Points per curve segment unless the profile says otherwise.
pub const DEFAULT_SEGMENT_POINTS: usize = 128;

const MIN_SEGMENT_POINTS: usize = 8;
const JUNCTION_TOL_MM: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{name} must be positive and finite, got {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("need at least {min} points per segment, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("need at least 2 tip samples, got {0}")]
    TooFewSamples(usize),
    #[error("tip samples {0} and {1} coincide")]
    DuplicateSample(usize, usize),
    #[error("first tip sample ({x}, {y}) must sit on the ellipse junction ({a}, {b})")]
    DetachedTip { x: f64, y: f64, a: f64, b: f64 },
    #[error("outline segments {0} and {1} intersect")]
    SelfIntersection(usize, usize),
    #[error("closed outline needs at least 3 distinct points")]
    Degenerate,
    #[error("the two elements overlap (segment {0} of A crosses segment {1} of B)")]
    ElementsOverlap(usize, usize),
    #[error("outline is {width:.3} x {height:.3} mm, larger than the {max_width} x {max_height} mm envelope")]
    EnvelopeExceeded { width: f64, height: f64, max_width: f64, max_height: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    fn dist(self, o: Point2) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    fn rotated(self, cos: f64, sin: f64) -> Point2 {
        Point2::new(self.x * cos - self.y * sin, self.x * sin + self.y * cos)
    }

    /// Reflection across the line x = 0.
    pub fn mirrored(self) -> Point2 {
        Point2::new(-self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point2>,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub width: f64,
    pub height: f64,
}

impl Default for Envelope {
    /// The 10 cm × 8 cm predecessor board.
    fn default() -> Self {
        Envelope { width: 100.0, height: 80.0 }
    }
}

fn default_rotation() -> f64 {
    45.0
}

fn default_true() -> bool {
    true
}

fn default_segment_points() -> usize {
    DEFAULT_SEGMENT_POINTS
}

/// Outline parameters; JSON input, all lengths in mm and angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafProfile {
    pub semi_major: f64,
    pub semi_minor: f64,
    pub tip_samples: Vec<Point2>,
    #[serde(default = "default_rotation")]
    pub rotation_deg: f64,
    #[serde(default = "default_true")]
    pub mirrored_pair: bool,
    #[serde(default)]
    pub feed_gap: f64,
    #[serde(default)]
    pub envelope: Envelope,
    #[serde(default = "default_segment_points")]
    pub segment_points: usize,
}

impl Default for LeafProfile {
    /// A plausible leaf that fits the 100 × 80 mm board as a rotated pair.
    /// The shape is a fixture, not a measured leaf.
    fn default() -> Self {
        LeafProfile {
            semi_major: 14.0,
            semi_minor: 11.0,
            tip_samples: vec![
                Point2::new(14.0, 11.0),
                Point2::new(24.0, 10.0),
                Point2::new(33.0, 7.0),
                Point2::new(40.0, 3.5),
                Point2::new(45.0, 0.0),
            ],
            rotation_deg: 45.0,
            mirrored_pair: true,
            feed_gap: 8.0,
            envelope: Envelope::default(),
            segment_points: DEFAULT_SEGMENT_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafPair {
    pub element_a: Polyline,
    /// Mirror image of `element_a` across x = 0; absent for a single leaf.
    pub element_b: Option<Polyline>,
    pub feed_points: Vec<Point2>,
}

impl LeafPair {
    pub fn elements(&self) -> impl Iterator<Item = &Polyline> {
        std::iter::once(&self.element_a).chain(self.element_b.as_ref())
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, GeometryError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GeometryError::Domain { name, value })
    }
}

fn check_points(n: usize) -> Result<(), GeometryError> {
    if n < MIN_SEGMENT_POINTS {
        Err(GeometryError::TooFewPoints { min: MIN_SEGMENT_POINTS, got: n })
    } else {
        Ok(())
    }
}

/// Right half of the ellipse `(a·cosθ, b·sinθ)`, θ from −π/2 to π/2 in `n`
/// equal steps (`n + 1` points). Endpoints are exactly `(0, ∓b)`.
pub fn half_ellipse(a: f64, b: f64, n: usize) -> Result<Polyline, GeometryError> {
    positive("semi-major axis", a)?;
    positive("semi-minor axis", b)?;
    check_points(n)?;
    let mut points: Vec<Point2> = (0..=n)
        .map(|i| {
            let theta = -PI / 2.0 + PI * (i as f64) / (n as f64);
            Point2::new(a * theta.cos(), b * theta.sin())
        })
        .collect();
    points[0] = Point2::new(0.0, -b);
    points[n] = Point2::new(0.0, b);
    Ok(Polyline { points, closed: false })
}

fn bezier(p0: Point2, p1: Point2, p2: Point2, p3: Point2, t: f64) -> Point2 {
    let u = 1.0 - t;
    let (b0, b1, b2, b3) = (u * u * u, 3.0 * u * u * t, 3.0 * u * t * t, t * t * t);
    Point2::new(
        b0 * p0.x + b1 * p1.x + b2 * p2.x + b3 * p3.x,
        b0 * p0.y + b1 * p1.y + b2 * p2.y + b3 * p3.y,
    )
}

/// Composite cubic Bézier through every sample, tangents from
/// Catmull-Rom (one-sided at the ends), `n` points per segment plus the
/// final sample.
pub fn tip_curve(samples: &[Point2], n: usize) -> Result<Polyline, GeometryError> {
    if samples.len() < 2 {
        return Err(GeometryError::TooFewSamples(samples.len()));
    }
    check_points(n)?;
    for (i, w) in samples.windows(2).enumerate() {
        if !(w[0].x.is_finite() && w[0].y.is_finite() && w[1].x.is_finite() && w[1].y.is_finite()) {
            return Err(GeometryError::Domain { name: "tip sample", value: f64::NAN });
        }
        if w[0] == w[1] {
            return Err(GeometryError::DuplicateSample(i, i + 1));
        }
    }
    let last = samples.len() - 1;
    let tangent = |i: usize| -> Point2 {
        let (a, b, scale) = match i {
            0 => (samples[0], samples[1], 1.0),
            i if i == last => (samples[last - 1], samples[last], 1.0),
            i => (samples[i - 1], samples[i + 1], 0.5),
        };
        let d = b.sub(a);
        Point2::new(d.x * scale, d.y * scale)
    };
    let mut points = Vec::with_capacity(last * n + 1);
    for i in 0..last {
        let (p0, p3) = (samples[i], samples[i + 1]);
        let (m0, m1) = (tangent(i), tangent(i + 1));
        let p1 = Point2::new(p0.x + m0.x / 3.0, p0.y + m0.y / 3.0);
        let p2 = Point2::new(p3.x - m1.x / 3.0, p3.y - m1.y / 3.0);
        for j in 0..n {
            points.push(bezier(p0, p1, p2, p3, j as f64 / n as f64));
        }
    }
    points.push(samples[last]);
    Ok(Polyline { points, closed: false })
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn segments(pl: &Polyline) -> Vec<(Point2, Point2)> {
    let pts = &pl.points;
    let mut out: Vec<_> = pts.windows(2).map(|w| (w[0], w[1])).collect();
    if pl.closed && pts.len() > 2 {
        out.push((pts[pts.len() - 1], pts[0]));
    }
    out
}

fn bbox_of<'a>(pts: impl Iterator<Item = &'a Point2>) -> (Point2, Point2) {
    pts.fold(
        (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Point2::new(lo.x.min(p.x), lo.y.min(p.y)), Point2::new(hi.x.max(p.x), hi.y.max(p.y))),
    )
}

/// First pair of non-adjacent intersecting segments, if any.
pub fn find_self_intersection(pl: &Polyline) -> Option<(usize, usize)> {
    let segs = segments(pl);
    let n = segs.len();
    for i in 0..n {
        let (a, b) = segs[i];
        let (alo, ahi) = bbox_of([a, b].iter());
        for (j, &(c, d)) in segs.iter().enumerate().skip(i + 2) {
            if pl.closed && i == 0 && j == n - 1 {
                continue;
            }
            if c.x.max(d.x) < alo.x || c.x.min(d.x) > ahi.x || c.y.max(d.y) < alo.y || c.y.min(d.y) > ahi.y {
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

fn first_crossing(a: &Polyline, b: &Polyline) -> Option<(usize, usize)> {
    let sb = segments(b);
    for (i, (p, q)) in segments(a).into_iter().enumerate() {
        for (j, (r, s)) in sb.iter().enumerate() {
            if segments_intersect(p, q, *r, *s) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Drops consecutive duplicates and a repeated closing vertex.
fn dedup_closed(mut pts: Vec<Point2>) -> Vec<Point2> {
    pts.dedup_by(|b, a| a.dist(*b) < 1e-9);
    while pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) < 1e-9 {
        pts.pop();
    }
    pts
}

fn validate(p: &LeafProfile) -> Result<(), GeometryError> {
    let a = positive("semi_major", p.semi_major)?;
    let b = positive("semi_minor", p.semi_minor)?;
    if !(p.feed_gap.is_finite() && p.feed_gap >= 0.0) {
        return Err(GeometryError::Domain { name: "feed_gap", value: p.feed_gap });
    }
    if !p.rotation_deg.is_finite() {
        return Err(GeometryError::Domain { name: "rotation_deg", value: p.rotation_deg });
    }
    positive("envelope width", p.envelope.width)?;
    positive("envelope height", p.envelope.height)?;
    check_points(p.segment_points)?;
    let first = p.tip_samples.first().ok_or(GeometryError::TooFewSamples(0))?;
    if first.dist(Point2::new(a, b)) > JUNCTION_TOL_MM {
        return Err(GeometryError::DetachedTip { x: first.x, y: first.y, a, b });
    }
    Ok(())
}

/// Closed outline of one leaf in its local frame (no rotation).
pub fn leaf_outline(p: &LeafProfile) -> Result<Polyline, GeometryError> {
    validate(p)?;
    let (a, n) = (p.semi_major, p.segment_points);
    let base = half_ellipse(p.semi_major, p.semi_minor, n)?;
    let upper = tip_curve(&p.tip_samples, n)?;
    // base runs (a,-b) -> petiole -> (a,b)
    let mut pts: Vec<Point2> = base.points.iter().map(|q| Point2::new(a - q.x, q.y)).collect();
    pts.extend(upper.points.iter().skip(1));
    pts.extend(upper.points.iter().rev().map(|q| Point2::new(q.x, -q.y)));
    let pts = dedup_closed(pts);
    if pts.len() < 3 {
        return Err(GeometryError::Degenerate);
    }
    let outline = Polyline { points: pts, closed: true };
    if let Some((i, j)) = find_self_intersection(&outline) {
        return Err(GeometryError::SelfIntersection(i, j));
    }
    Ok(outline)
}

pub fn build_leaf_pair(p: &LeafProfile) -> Result<LeafPair, GeometryError> {
    let local = leaf_outline(p)?;
    let (sin, cos) = p.rotation_deg.to_radians().sin_cos();
    let offset = if p.mirrored_pair { p.feed_gap / 2.0 } else { 0.0 };
    let a_pts: Vec<Point2> = local
        .points
        .iter()
        .map(|q| {
            let r = q.rotated(cos, sin);
            Point2::new(r.x + offset, r.y)
        })
        .collect();
    let element_a = Polyline { points: a_pts, closed: true };
    let feed = Point2::new(offset, 0.0);
    let pair = if p.mirrored_pair {
        let element_b = Polyline { points: element_a.points.iter().map(|q| q.mirrored()).collect(), closed: true };
        if let Some((i, j)) = first_crossing(&element_a, &element_b) {
            return Err(GeometryError::ElementsOverlap(i, j));
        }
        LeafPair { element_a, element_b: Some(element_b), feed_points: vec![feed, feed.mirrored()] }
    } else {
        LeafPair { element_a, element_b: None, feed_points: vec![feed] }
    };
    let m = outline_metrics(&pair);
    if m.bbox_width > p.envelope.width || m.bbox_height > p.envelope.height {
        return Err(GeometryError::EnvelopeExceeded {
            width: m.bbox_width,
            height: m.bbox_height,
            max_width: p.envelope.width,
            max_height: p.envelope.height,
        });
    }
    Ok(pair)
}

/// Shoelace area (absolute) of a closed polyline.
pub fn polyline_area(pl: &Polyline) -> f64 {
    let pts = &pl.points;
    let n = pts.len();
    let twice: f64 = (0..n).map(|i| {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        p.x * q.y - q.x * p.y
    }).sum();
    twice.abs() / 2.0
}

pub fn polyline_perimeter(pl: &Polyline) -> f64 {
    segments(pl).iter().map(|(a, b)| a.dist(*b)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineMetrics {
    /// Summed over elements, mm².
    pub area: f64,
    pub perimeter: f64,
    pub element_areas: Vec<f64>,
    pub bbox_width: f64,
    pub bbox_height: f64,
}

pub fn outline_metrics(lp: &LeafPair) -> OutlineMetrics {
    let element_areas: Vec<f64> = lp.elements().map(polyline_area).collect();
    let perimeter = lp.elements().map(polyline_perimeter).sum();
    let (lo, hi) = bbox_of(lp.elements().flat_map(|e| e.points.iter()));
    OutlineMetrics {
        area: element_areas.iter().sum(),
        perimeter,
        element_areas,
        bbox_width: hi.x - lo.x,
        bbox_height: hi.y - lo.y,
    }
}

fn coord(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// ASCII DXF with a HEADER (`$INSUNITS` = 4, millimeters) and one closed
/// LWPOLYLINE per element on layers `LEAF_A` / `LEAF_B`. Output depends
/// only on the input.
pub fn export_dxf(lp: &LeafPair) -> String {
    let mut out = String::new();
    let mut pair = |code: i32, value: &str| {
        let _ = writeln!(out, "{code}\n{value}");
    };
    pair(0, "SECTION");
    pair(2, "HEADER");
    pair(9, "$INSUNITS");
    pair(70, "4");
    pair(0, "ENDSEC");
    pair(0, "SECTION");
    pair(2, "ENTITIES");
    for (layer, pl) in ["LEAF_A", "LEAF_B"].iter().zip(lp.elements()) {
        pair(0, "LWPOLYLINE");
        pair(8, layer);
        pair(90, &pl.points.len().to_string());
        pair(70, if pl.closed { "1" } else { "0" });
        for p in &pl.points {
            pair(10, &coord(p.x));
            pair(20, &coord(p.y));
        }
    }
    pair(0, "ENDSEC");
    pair(0, "EOF");
    out
}
