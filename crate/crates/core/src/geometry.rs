//! Planar primitives: angles, oriented rectangles, polygons and sectors.
//!
//! Boundaries are closed everywhere: a point on a polygon edge is inside, a
//! point on a sector's rim is inside, and rectangles that touch intersect.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("bearing between coincident points is undefined")]
    DegenerateCoincidentPoints,
    #[error("sector distance requires a finite radius")]
    InfiniteRadiusUnsupported,
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("non-finite coordinate")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// The point `r` away along direction `angle`.
    pub fn offset(self, angle: f64, r: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(self.x + r * c, self.y + r * s)
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }
}

/// Normalize an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    // rem_euclid can land exactly on TAU for tiny negative inputs
    if r <= -PI {
        r += TAU;
    }
    r
}

pub fn bearing(p: Point, q: Point) -> Result<f64, GeometryError> {
    if p == q {
        return Err(GeometryError::DegenerateCoincidentPoints);
    }
    Ok(wrap_angle((q.y - p.y).atan2(q.x - p.x)))
}

/// Absolute angle between two directions, in `[0, π]`.
pub fn angular_deviation(actual: f64, target: f64) -> f64 {
    wrap_angle(actual - target).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub center: Point,
    pub heading: f64,
    pub width: f64,
    pub length: f64,
}

impl OrientedRect {
    pub fn new(center: Point, heading: f64, width: f64, length: f64) -> OrientedRect {
        OrientedRect {
            center,
            heading: wrap_angle(heading),
            width,
            length,
        }
    }

    /// Corners in the order `(+L,+W), (+L,−W), (−L,+W), (−L,−W)` where `L` is
    /// half the length along the heading and `W` half the width across it.
    pub fn corners(&self) -> [Point; 4] {
        let (s, c) = self.heading.sin_cos();
        let hl = self.length / 2.0;
        let hw = self.width / 2.0;
        let at = |l: f64, w: f64| {
            Point::new(
                self.center.x + l * c - w * s,
                self.center.y + l * s + w * c,
            )
        };
        [at(hl, hw), at(hl, -hw), at(-hl, hw), at(-hl, -hw)]
    }

    /// Corners in boundary order, for edge iteration and drawing.
    pub fn outline(&self) -> [Point; 4] {
        let [a, b, c, d] = self.corners();
        [a, b, d, c]
    }

    fn axes(&self) -> [Point; 2] {
        let (s, c) = self.heading.sin_cos();
        [Point::new(c, s), Point::new(-s, c)]
    }
}

/// Separating-axis test over the two edge normals of each rectangle.
/// Touching rectangles intersect.
pub fn rects_intersect(a: &OrientedRect, b: &OrientedRect) -> bool {
    let ca = a.corners();
    let cb = b.corners();
    for axis in a.axes().into_iter().chain(b.axes()) {
        let project = |pts: &[Point; 4]| {
            pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let v = p.dot(axis);
                (lo.min(v), hi.max(v))
            })
        };
        let (alo, ahi) = project(&ca);
        let (blo, bhi) = project(&cb);
        if ahi < blo || bhi < alo {
            return false;
        }
    }
    true
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(Point::new(a.x + t * ab.x, a.y + t * ab.y))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Build a polygon, checking vertex count, finiteness and simplicity.
    pub fn new(vertices: Vec<Point>) -> Result<Polygon, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let poly = Polygon { vertices };
        if let Some((i, j)) = poly.first_self_intersection() {
            return Err(GeometryError::SelfIntersecting(i, j));
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    fn first_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        let e: Vec<(Point, Point)> = self.edges().collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // adjacent edges share one vertex; they only conflict when
                    // they fold back onto each other
                    let (a, b) = e[i];
                    let (_, c) = e[j];
                    let (p, q, r) = if j == i + 1 { (a, b, c) } else { (e[j].0, a, b) };
                    let d1 = q.sub(p);
                    let d2 = r.sub(q);
                    if d1.cross(d2) == 0.0 && d1.dot(d2) < 0.0 {
                        return Some((i, j));
                    }
                    continue;
                }
                if segments_intersect(e[i].0, e[i].1, e[j].0, e[j].1) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    /// Even-odd ray casting, with points on the boundary counted as inside.
    pub fn contains(&self, p: Point) -> bool {
        if self.on_boundary(p) {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn on_boundary(&self, p: Point) -> bool {
        self.edges().any(|(a, b)| {
            let ab = b.sub(a);
            let ap = p.sub(a);
            ab.cross(ap) == 0.0
                && p.x >= a.x.min(b.x)
                && p.x <= a.x.max(b.x)
                && p.y >= a.y.min(b.y)
                && p.y <= a.y.max(b.y)
        })
    }

    /// Distance from `p` to the nearest edge.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// 0 inside or on the boundary, else the distance to the nearest edge.
    pub fn distance(&self, p: Point) -> f64 {
        if self.contains(p) {
            0.0
        } else {
            self.boundary_distance(p)
        }
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

pub fn point_in_polygon(p: Point, poly: &Polygon) -> bool {
    poly.contains(p)
}

pub fn point_to_polygon_distance(p: Point, poly: &Polygon) -> f64 {
    poly.distance(p)
}

/// Circular sector: all points within `radius` of `apex` whose direction
/// deviates from `center_angle` by at most `half_angle`. The apex itself is
/// a member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub apex: Point,
    pub center_angle: f64,
    pub half_angle: f64,
    pub radius: f64,
}

impl Sector {
    pub fn new(apex: Point, center_angle: f64, half_angle: f64, radius: f64) -> Sector {
        Sector {
            apex,
            center_angle: wrap_angle(center_angle),
            half_angle: half_angle.min(PI),
            radius,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        if p == self.apex {
            return true;
        }
        let r = self.apex.dist(p);
        if r > self.radius {
            return false;
        }
        let dir = (p.y - self.apex.y).atan2(p.x - self.apex.x);
        angular_deviation(dir, self.center_angle) <= self.half_angle
    }

    /// End points of the two bounding radii.
    pub fn rim_points(&self) -> [Point; 2] {
        let at = |a: f64| {
            Point::new(
                self.apex.x + self.radius * a.cos(),
                self.apex.y + self.radius * a.sin(),
            )
        };
        [
            at(self.center_angle - self.half_angle),
            at(self.center_angle + self.half_angle),
        ]
    }

    /// Distance from `p` to the sector boundary (two radii plus the arc).
    pub fn boundary_distance(&self, p: Point) -> Result<f64, GeometryError> {
        if !self.radius.is_finite() {
            return Err(GeometryError::InfiniteRadiusUnsupported);
        }
        let [r1, r2] = self.rim_points();
        let mut d = point_segment_distance(p, self.apex, r1).min(point_segment_distance(p, self.apex, r2));
        let rp = self.apex.dist(p);
        let arc = if rp > 0.0 {
            let dir = (p.y - self.apex.y).atan2(p.x - self.apex.x);
            if angular_deviation(dir, self.center_angle) <= self.half_angle {
                (rp - self.radius).abs()
            } else {
                p.dist(r1).min(p.dist(r2))
            }
        } else {
            self.radius
        };
        d = d.min(arc);
        Ok(d)
    }

    /// 0 inside the closed sector, else the distance to it.
    pub fn distance(&self, p: Point) -> Result<f64, GeometryError> {
        if !self.radius.is_finite() {
            return Err(GeometryError::InfiniteRadiusUnsupported);
        }
        if self.contains(p) {
            return Ok(0.0);
        }
        self.boundary_distance(p)
    }
}

pub fn point_to_sector_distance(p: Point, s: &Sector) -> Result<f64, GeometryError> {
    s.distance(p)
}
