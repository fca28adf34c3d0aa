//! Road maps: drivable polygons inside a rectangular extent, with optional
//! constant lane headings.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_angle, GeometryError, Point, Polygon};

#[derive(Debug, Error)]
pub enum MapError {
    #[error("map schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Geometry {
        path: String,
        #[source]
        source: GeometryError,
    },
    #[error("{path}: vertex ({x}, {y}) lies outside the map extent")]
    OutOfBounds { path: String, x: f64, y: f64 },
    #[error("map has no roads")]
    NoRoads,
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("no road segment defines a heading")]
    NoHeadingsDefined,
    #[error("unknown bundled map `{0}`")]
    UnknownBundled(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadSegment {
    pub id: String,
    pub polygon: Polygon,
    /// Lane direction in radians, normalized to `(-π, π]`.
    pub heading: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadMap {
    pub width: f64,
    pub height: f64,
    pub roads: Vec<RoadSegment>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    #[default]
    Rad,
    Deg,
}

impl AngleUnit {
    pub fn to_radians(self, v: f64) -> f64 {
        match self {
            AngleUnit::Rad => v,
            AngleUnit::Deg => v * PI / 180.0,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDoc {
    width: f64,
    height: f64,
    #[serde(default)]
    heading_unit: AngleUnit,
    roads: Vec<RoadDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoadDoc {
    id: String,
    polygon: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    heading: Option<f64>,
}

const BUNDLED: [(&str, &str); 3] = [
    ("strip", include_str!("../maps/strip.json")),
    ("cross", include_str!("../maps/cross.json")),
    ("grid", include_str!("../maps/grid.json")),
];

impl RoadMap {
    pub fn bundled_names() -> impl Iterator<Item = &'static str> {
        BUNDLED.iter().map(|(n, _)| *n)
    }

    /// One of the maps shipped with the crate: `strip`, `cross` or `grid`.
    pub fn bundled(name: &str) -> Result<RoadMap, MapError> {
        let (_, text) = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| MapError::UnknownBundled(name.to_string()))?;
        RoadMap::load(text.as_bytes())
    }

    /// Parse and validate the JSON map format.
    pub fn load(bytes: &[u8]) -> Result<RoadMap, MapError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let doc: MapDoc = serde_path_to_error::deserialize(de).map_err(|e| MapError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        if !(doc.width > 0.0 && doc.width.is_finite()) {
            return Err(MapError::Invalid {
                path: "width".into(),
                message: "must be a positive number".into(),
            });
        }
        if !(doc.height > 0.0 && doc.height.is_finite()) {
            return Err(MapError::Invalid {
                path: "height".into(),
                message: "must be a positive number".into(),
            });
        }
        if doc.roads.is_empty() {
            return Err(MapError::NoRoads);
        }
        let mut roads = Vec::with_capacity(doc.roads.len());
        for (i, r) in doc.roads.into_iter().enumerate() {
            if roads.iter().any(|s: &RoadSegment| s.id == r.id) {
                return Err(MapError::Invalid {
                    path: format!("roads[{i}].id"),
                    message: format!("duplicate road id `{}`", r.id),
                });
            }
            for (k, [x, y]) in r.polygon.iter().copied().enumerate() {
                if !(0.0..=doc.width).contains(&x) || !(0.0..=doc.height).contains(&y) {
                    return Err(MapError::OutOfBounds {
                        path: format!("roads[{i}].polygon[{k}]"),
                        x,
                        y,
                    });
                }
            }
            let polygon = Polygon::new(r.polygon.iter().map(|[x, y]| Point::new(*x, *y)).collect())
                .map_err(|source| MapError::Geometry {
                    path: format!("roads[{i}].polygon"),
                    source,
                })?;
            let heading = match r.heading {
                Some(h) if !h.is_finite() => {
                    return Err(MapError::Invalid {
                        path: format!("roads[{i}].heading"),
                        message: "must be finite".into(),
                    })
                }
                Some(h) => Some(wrap_angle(doc.heading_unit.to_radians(h))),
                None => None,
            };
            roads.push(RoadSegment {
                id: r.id,
                polygon,
                heading,
            });
        }
        Ok(RoadMap {
            width: doc.width,
            height: doc.height,
            roads,
        })
    }

    /// Canonical JSON (headings in radians).
    pub fn to_json(&self) -> String {
        let doc = MapDoc {
            width: self.width,
            height: self.height,
            heading_unit: AngleUnit::Rad,
            roads: self
                .roads
                .iter()
                .map(|r| RoadDoc {
                    id: r.id.clone(),
                    polygon: r.polygon.vertices().iter().map(|p| [p.x, p.y]).collect(),
                    heading: r.heading,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("map serializes")
    }

    /// First segment, in list order, whose polygon contains `p`.
    pub fn contains_point(&self, p: Point) -> Option<&RoadSegment> {
        self.roads.iter().find(|r| r.polygon.contains(p))
    }

    pub fn nearest_road_distance(&self, p: Point) -> f64 {
        let mut best = f64::INFINITY;
        for r in &self.roads {
            let d = r.polygon.distance(p);
            if d == 0.0 {
                return 0.0;
            }
            best = best.min(d);
        }
        best
    }

    /// Deepest containment of `p`: the largest distance to the boundary of a
    /// segment containing it, or `None` when off-road.
    pub fn containment_depth(&self, p: Point) -> Option<f64> {
        self.roads
            .iter()
            .filter(|r| r.polygon.contains(p))
            .map(|r| r.polygon.boundary_distance(p))
            .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
    }

    pub fn has_headings(&self) -> bool {
        self.roads.iter().any(|r| r.heading.is_some())
    }

    /// Expected heading at `p`: the containing segment's heading if it has
    /// one, else the heading of the nearest heading-bearing segment (ties go
    /// to the lower index).
    pub fn derive_heading(&self, p: Point) -> Result<f64, MapError> {
        if let Some(h) = self.contains_point(p).and_then(|r| r.heading) {
            return Ok(h);
        }
        let mut best: Option<(f64, f64)> = None;
        for r in &self.roads {
            if let Some(h) = r.heading {
                let d = r.polygon.distance(p);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, h));
                }
            }
        }
        best.map(|(_, h)| h).ok_or(MapError::NoHeadingsDefined)
    }
}
