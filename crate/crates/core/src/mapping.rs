//! From partial models to numeric problems and back.
//!
//! [`fun_to_log`] turns every determined relation of a rule-closed partial
//! model into a polarity-tagged [`NumericConstraint`]. An [`Evaluator`] decides
//! constraints on concrete actor placements and measures how far a placement
//! is from satisfying each one; [`log_to_fun`] abstracts a concrete scene back
//! into a concrete partial model.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    angular_deviation, bearing, rects_intersect, OrientedRect, Point, Sector,
};
use crate::logic::{Atom, ModelError, PartialModel, Relation, TruthValue, Vocabulary};
use crate::roadmap::{AngleUnit, RoadMap};

/// Numeric semantics of a user-registered relation.
pub trait RelationSemantics: Send + Sync {
    fn holds(&self, src: &ActorTuple, tgt: &ActorTuple, params: &GeometryParams, map: &RoadMap) -> bool;
    /// Zero exactly when [`RelationSemantics::holds`] is true.
    fn distance(&self, src: &ActorTuple, tgt: &ActorTuple, params: &GeometryParams, map: &RoadMap) -> f64;
    /// Zero exactly when [`RelationSemantics::holds`] is false.
    fn negated_distance(
        &self,
        src: &ActorTuple,
        tgt: &ActorTuple,
        params: &GeometryParams,
        map: &RoadMap,
    ) -> f64;
}

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("the model contains inconsistent entries: {0}")]
    InconsistentInput(String),
    #[error("dimension pool is empty")]
    EmptyDimensionPool,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parameter file error at {path}: {message}")]
    ParamsSchema { path: String, message: String },
    #[error("scene error at {path}: {message}")]
    SceneSchema { path: String, message: String },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Customizable constants of the relation semantics. Angles are half-angles
/// of the sectors, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    pub theta_left: f64,
    pub theta_right: f64,
    pub theta_front: f64,
    pub theta_behind: f64,
    pub d_close: f64,
    pub d_far: f64,
    pub theta_vis: f64,
    pub d_vis: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        let front = (2.5f64 / 2.0).atan();
        let side = (2.0f64 / 2.5).atan();
        GeometryParams {
            theta_left: side,
            theta_right: side,
            theta_front: front,
            theta_behind: front,
            d_close: 10.0,
            d_far: 20.0,
            theta_vis: front,
            d_vis: 50.0,
        }
    }
}

impl GeometryParams {
    pub fn validate(&self) -> Result<(), MappingError> {
        let bad = |m: &str| Err(MappingError::InvalidParams(m.to_string()));
        for (name, t) in [
            ("theta_left", self.theta_left),
            ("theta_right", self.theta_right),
            ("theta_front", self.theta_front),
            ("theta_behind", self.theta_behind),
        ] {
            if !(t > 0.0 && t <= FRAC_PI_2) {
                return bad(&format!("{name} must lie in (0, pi/2]"));
            }
        }
        if !(self.theta_vis > 0.0 && self.theta_vis <= PI) {
            return bad("theta_vis must lie in (0, pi]");
        }
        if !(self.d_close > 0.0 && self.d_close < self.d_far && self.d_far.is_finite()) {
            return bad("need 0 < d_close < d_far");
        }
        if !(self.d_vis > 0.0 && self.d_vis.is_finite()) {
            return bad("d_vis must be positive");
        }
        Ok(())
    }

    fn sector_of(&self, rel: Relation) -> (f64, f64) {
        match rel {
            Relation::LeftOf => (FRAC_PI_2, self.theta_left),
            Relation::RightOf => (-FRAC_PI_2, self.theta_right),
            Relation::FrontOf => (0.0, self.theta_front),
            Relation::Behind => (PI, self.theta_behind),
            _ => unreachable!("not a positional relation"),
        }
    }

    fn band_of(&self, rel: Relation) -> (f64, f64) {
        match rel {
            Relation::Close => (0.0, self.d_close),
            Relation::Med => (self.d_close, self.d_far),
            Relation::Far => (self.d_far, f64::INFINITY),
            _ => unreachable!("not a distance relation"),
        }
    }
}

/// Actor footprint `(width, length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub w: f64,
    pub l: f64,
}

impl Default for Dims {
    fn default() -> Self {
        Dims { w: 2.0, l: 4.5 }
    }
}

/// Parameters plus dimension pool, as read from a parameter file.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingConfig {
    pub params: GeometryParams,
    pub dims: Vec<Dims>,
}

impl Default for MappingConfig {
    fn default() -> Self {
        MappingConfig {
            params: GeometryParams::default(),
            dims: vec![Dims::default()],
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    #[serde(default)]
    angle_unit: AngleUnit,
    theta_left: Option<f64>,
    theta_right: Option<f64>,
    theta_front: Option<f64>,
    theta_behind: Option<f64>,
    d_close: Option<f64>,
    d_far: Option<f64>,
    theta_vis: Option<f64>,
    d_vis: Option<f64>,
    dims: Option<Vec<Dims>>,
}

impl MappingConfig {
    /// Parse a JSON parameter file; every field is an optional override of
    /// the defaults. `angle_unit` (`"rad"` or `"deg"`) applies to the thetas.
    pub fn from_json(bytes: &[u8]) -> Result<MappingConfig, MappingError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let doc: ParamsDoc = serde_path_to_error::deserialize(de).map_err(|e| MappingError::ParamsSchema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        let mut p = GeometryParams::default();
        let u = doc.angle_unit;
        let set_angle = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = u.to_radians(v);
            }
        };
        set_angle(&mut p.theta_left, doc.theta_left);
        set_angle(&mut p.theta_right, doc.theta_right);
        set_angle(&mut p.theta_front, doc.theta_front);
        set_angle(&mut p.theta_behind, doc.theta_behind);
        set_angle(&mut p.theta_vis, doc.theta_vis);
        p.d_close = doc.d_close.unwrap_or(p.d_close);
        p.d_far = doc.d_far.unwrap_or(p.d_far);
        p.d_vis = doc.d_vis.unwrap_or(p.d_vis);
        p.validate()?;
        let dims = doc.dims.unwrap_or_else(|| vec![Dims::default()]);
        if dims.is_empty() {
            return Err(MappingError::EmptyDimensionPool);
        }
        if dims.iter().any(|d| !(d.w > 0.0 && d.l > 0.0 && d.w.is_finite() && d.l.is_finite())) {
            return Err(MappingError::InvalidParams("dimensions must be positive".into()));
        }
        Ok(MappingConfig { params: p, dims })
    }
}

/// One actor as an oriented rectangle `⟨x, y, h, w, l⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorTuple {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub w: f64,
    pub l: f64,
}

impl ActorTuple {
    pub fn center(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn rect(&self) -> OrientedRect {
        OrientedRect::new(self.center(), self.h, self.w, self.l)
    }

    pub fn corners(&self) -> [Point; 4] {
        self.rect().corners()
    }

    pub fn fov(&self, params: &GeometryParams) -> Sector {
        Sector {
            apex: self.center(),
            center_angle: self.h,
            half_angle: params.theta_vis,
            radius: params.d_vis,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteScene {
    pub map: String,
    pub actors: Vec<ActorTuple>,
}

impl ConcreteScene {
    pub fn from_json(bytes: &[u8]) -> Result<ConcreteScene, MappingError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let s: ConcreteScene = serde_path_to_error::deserialize(de).map_err(|e| MappingError::SceneSchema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        for (i, a) in s.actors.iter().enumerate() {
            if ![a.x, a.y, a.h].iter().all(|v| v.is_finite()) {
                return Err(MappingError::InvalidScene(format!("actors[{i}]: non-finite value")));
            }
            if !(a.w > 0.0 && a.l > 0.0 && a.w.is_finite() && a.l.is_finite()) {
                return Err(MappingError::InvalidScene(format!("actors[{i}]: w and l must be positive")));
            }
            if s.actors[..i].iter().any(|b| b.id == a.id) {
                return Err(MappingError::InvalidScene(format!("actors[{i}]: duplicate id `{}`", a.id)));
            }
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn actor(&self, id: &str) -> Option<&ActorTuple> {
        self.actors.iter().find(|a| a.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

/// A numeric constraint over actor indices of the problem (or scene).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NumericConstraint {
    pub relation: Relation,
    pub polarity: Polarity,
    pub src: usize,
    pub tgt: usize,
}

/// Actor of a numeric problem: identity and fixed footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorTemplate {
    pub id: String,
    pub dims: Dims,
}

#[derive(Debug, Clone)]
pub struct NumericProblem {
    pub actors: Vec<ActorTemplate>,
    pub constraints: Vec<NumericConstraint>,
    pub map_name: String,
    pub map: Arc<RoadMap>,
    pub dims: Vec<Dims>,
    pub params: GeometryParams,
    pub vocabulary: Arc<Vocabulary>,
}

impl NumericProblem {
    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator {
            params: &self.params,
            map: &self.map,
            vocab: &self.vocabulary,
        }
    }

    pub fn describe(&self, c: &NumericConstraint) -> String {
        describe_constraint(c, &self.vocabulary, |i| self.actors[i].id.as_str())
    }
}

pub fn describe_constraint<'a>(
    c: &NumericConstraint,
    vocab: &Vocabulary,
    id: impl Fn(usize) -> &'a str,
) -> String {
    let bang = if c.polarity == Polarity::Negative { "!" } else { "" };
    if c.src == c.tgt && c.relation == Relation::OnRoad {
        return format!("{bang}onRoad({})", id(c.src));
    }
    format!("{bang}{}({}, {})", vocab.name(c.relation), id(c.src), id(c.tgt))
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "+",
            Polarity::Negative => "-",
        })
    }
}

/// Derive the numeric problem of a rule-closed partial model.
///
/// Every `True` entry becomes a positive constraint and every grounded
/// `False` entry (explicitly asserted, or derived by a rule from other
/// entries) a negative one. Self-loops of symbols other than `onRoad` are
/// fixed to `False` by definition and produce no constraint. Actor `i` gets
/// footprint `dims[i % dims.len()]`.
pub fn fun_to_log(
    model: &PartialModel,
    map_name: &str,
    map: Arc<RoadMap>,
    dims: &[Dims],
    params: &GeometryParams,
) -> Result<NumericProblem, MappingError> {
    if model.has_errors() {
        let first = model
            .entries()
            .find(|(_, v)| *v == TruthValue::Error)
            .map(|(a, _)| model.describe(a))
            .unwrap_or_default();
        return Err(MappingError::InconsistentInput(first));
    }
    if dims.is_empty() {
        return Err(MappingError::EmptyDimensionPool);
    }
    let actors = model
        .objects()
        .iter()
        .enumerate()
        .map(|(i, id)| ActorTemplate {
            id: id.clone(),
            dims: dims[i % dims.len()],
        })
        .collect();
    let mut constraints = Vec::new();
    for (atom, v) in model.entries() {
        if atom.src == atom.tgt && atom.relation != Relation::OnRoad {
            continue;
        }
        let polarity = match v {
            TruthValue::True => Polarity::Positive,
            TruthValue::False if model.is_grounded(atom) => Polarity::Negative,
            _ => continue,
        };
        constraints.push(NumericConstraint {
            relation: atom.relation,
            polarity,
            src: atom.src,
            tgt: atom.tgt,
        });
    }
    Ok(NumericProblem {
        actors,
        constraints,
        map_name: map_name.to_string(),
        map,
        dims: dims.to_vec(),
        params: *params,
        vocabulary: model.vocabulary().clone(),
    })
}

/// Decides and measures constraints on concrete placements.
#[derive(Clone, Copy)]
pub struct Evaluator<'a> {
    pub params: &'a GeometryParams,
    pub map: &'a RoadMap,
    pub vocab: &'a Vocabulary,
}

impl<'a> Evaluator<'a> {
    pub fn new(params: &'a GeometryParams, map: &'a RoadMap, vocab: &'a Vocabulary) -> Self {
        Evaluator { params, map, vocab }
    }

    /// Truth of the positive reading of `rel(a, b)`.
    pub fn holds_positive(&self, rel: Relation, a: &ActorTuple, b: &ActorTuple, same: bool) -> bool {
        let p = self.params;
        match rel {
            Relation::OnRoad => a.corners().iter().all(|c| self.map.contains_point(*c).is_some()),
            _ if same => false,
            Relation::LeftOf | Relation::RightOf | Relation::FrontOf | Relation::Behind => {
                let (offset, theta) = p.sector_of(rel);
                match bearing(a.center(), b.center()) {
                    Ok(beta) => angular_deviation(beta, a.h + offset) <= theta,
                    Err(_) => false,
                }
            }
            Relation::Close | Relation::Med | Relation::Far => {
                let (lo, hi) = p.band_of(rel);
                let d = a.center().dist(b.center());
                lo <= d && d < hi
            }
            Relation::CanSee => {
                let fov = a.fov(p);
                b.corners().iter().any(|q| fov.contains(*q))
            }
            Relation::NoColl => !rects_intersect(&a.rect(), &b.rect()),
            Relation::Custom(_) => self
                .vocab
                .custom(rel)
                .expect("registered relation")
                .semantics
                .holds(a, b, p, self.map),
        }
    }

    /// Distance of `rel(a, b)` from holding (`Positive`) or from failing
    /// (`Negative`).
    pub fn distance_of(&self, rel: Relation, pol: Polarity, a: &ActorTuple, b: &ActorTuple, same: bool) -> f64 {
        let p = self.params;
        let pos = pol == Polarity::Positive;
        match rel {
            Relation::OnRoad => {
                let corners = a.corners();
                if pos {
                    corners
                        .iter()
                        .map(|c| self.map.nearest_road_distance(*c))
                        .fold(0.0, f64::max)
                } else {
                    let mut depth = f64::INFINITY;
                    for c in corners {
                        match self.map.containment_depth(c) {
                            Some(d) => depth = depth.min(d),
                            None => return 0.0,
                        }
                    }
                    depth
                }
            }
            _ if same => {
                if pos {
                    1.0
                } else {
                    0.0
                }
            }
            Relation::LeftOf | Relation::RightOf | Relation::FrontOf | Relation::Behind => {
                let (offset, theta) = p.sector_of(rel);
                match bearing(a.center(), b.center()) {
                    Ok(beta) => {
                        let dev = angular_deviation(beta, a.h + offset);
                        if pos {
                            (dev - theta).max(0.0)
                        } else {
                            (theta - dev).max(0.0)
                        }
                    }
                    Err(_) => {
                        if pos {
                            theta + PI
                        } else {
                            0.0
                        }
                    }
                }
            }
            Relation::Close | Relation::Med | Relation::Far => {
                let (lo, hi) = p.band_of(rel);
                let d = a.center().dist(b.center());
                if pos {
                    (lo - d).max(0.0) + (d - hi).max(0.0)
                } else if d < lo || d >= hi {
                    0.0
                } else {
                    (d - lo).min(hi - d)
                }
            }
            Relation::CanSee => {
                let fov = a.fov(p);
                let corners = b.corners();
                if pos {
                    corners
                        .iter()
                        .map(|q| fov.distance(*q).expect("finite radius"))
                        .fold(f64::INFINITY, f64::min)
                } else {
                    corners
                        .iter()
                        .filter(|q| fov.contains(**q))
                        .map(|q| fov.boundary_distance(*q).expect("finite radius"))
                        .sum()
                }
            }
            Relation::NoColl => {
                let hit = rects_intersect(&a.rect(), &b.rect());
                if hit == pos {
                    1.0
                } else {
                    0.0
                }
            }
            Relation::Custom(_) => {
                let sem = &self.vocab.custom(rel).expect("registered relation").semantics;
                if pos {
                    sem.distance(a, b, p, self.map)
                } else {
                    sem.negated_distance(a, b, p, self.map)
                }
            }
        }
    }

    pub fn holds(&self, c: &NumericConstraint, actors: &[ActorTuple]) -> bool {
        let v = self.holds_positive(c.relation, &actors[c.src], &actors[c.tgt], c.src == c.tgt);
        match c.polarity {
            Polarity::Positive => v,
            Polarity::Negative => !v,
        }
    }

    pub fn distance(&self, c: &NumericConstraint, actors: &[ActorTuple]) -> f64 {
        self.distance_of(c.relation, c.polarity, &actors[c.src], &actors[c.tgt], c.src == c.tgt)
    }
}

/// Abstract a concrete scene into a concrete partial model over the same
/// actors. Self-loops of symbols other than `onRoad` and `onRoad(a, b)` for
/// `a ≠ b` are `False`.
pub fn log_to_fun(scene: &ConcreteScene, ev: &Evaluator<'_>) -> Result<PartialModel, MappingError> {
    let vocab = Arc::new(ev.vocab.clone());
    let mut m = PartialModel::with_vocabulary(scene.actors.iter().map(|a| a.id.clone()), vocab)?;
    let atoms: Vec<Atom> = m.universe().collect();
    for atom in atoms {
        let a = &scene.actors[atom.src];
        let b = &scene.actors[atom.tgt];
        let v = match atom.relation {
            Relation::OnRoad if atom.src != atom.tgt => false,
            rel => ev.holds_positive(rel, a, b, atom.src == atom.tgt),
        };
        m.set_value(atom, TruthValue::from_bool(v));
    }
    Ok(m)
}

/// `P_in ⊑ log_to_fun(scene)`.
pub fn check_refinement(model: &PartialModel, scene: &ConcreteScene, ev: &Evaluator<'_>) -> Result<bool, MappingError> {
    let concrete = log_to_fun(scene, ev)?;
    Ok(PartialModel::refines(model, &concrete)?)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::fss::{build_model, parse};
    use crate::logic::{Assertion, Category};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) struct Parked;

    impl RelationSemantics for Parked {
        fn holds(&self, a: &ActorTuple, b: &ActorTuple, _: &GeometryParams, _: &RoadMap) -> bool {
            a.center().dist(b.center()) <= 6.0
        }
        fn distance(&self, a: &ActorTuple, b: &ActorTuple, _: &GeometryParams, _: &RoadMap) -> f64 {
            (a.center().dist(b.center()) - 6.0).max(0.0)
        }
        fn negated_distance(&self, a: &ActorTuple, b: &ActorTuple, _: &GeometryParams, _: &RoadMap) -> f64 {
            (6.0 - a.center().dist(b.center())).max(0.0)
        }
    }

    pub(crate) fn open_map() -> RoadMap {
        RoadMap::load(
            br#"{"width": 200, "height": 200,
                "roads": [{"id": "all", "polygon": [[0,0],[200,0],[200,200],[0,200]], "heading": 0}]}"#,
        )
        .unwrap()
    }

    pub(crate) fn actor(id: &str, x: f64, y: f64, h: f64) -> ActorTuple {
        ActorTuple {
            id: id.into(),
            x,
            y,
            h,
            w: 2.0,
            l: 4.5,
        }
    }

    fn c(relation: Relation, polarity: Polarity, src: usize, tgt: usize) -> NumericConstraint {
        NumericConstraint {
            relation,
            polarity,
            src,
            tgt,
        }
    }

    fn closed(text: &str) -> PartialModel {
        build_model(&parse(text).unwrap()).apply_validity_rules(&[]).0
    }

    #[test]
    fn default_params_tile_the_circle() {
        let p = GeometryParams::default();
        p.validate().unwrap();
        let total = 2.0 * (p.theta_left + p.theta_right + p.theta_front + p.theta_behind);
        assert!((total - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn params_file_overrides() {
        let cfg = MappingConfig::from_json(br#"{"angle_unit": "deg", "theta_front": 30, "d_far": 25,
            "dims": [{"w": 1.8, "l": 4.0}, {"w": 2.2, "l": 5.0}]}"#)
        .unwrap();
        assert!((cfg.params.theta_front - PI / 6.0).abs() < 1e-12);
        assert_eq!(cfg.params.d_far, 25.0);
        assert_eq!(cfg.params.d_close, 10.0);
        assert_eq!(cfg.dims.len(), 2);
        assert!(matches!(
            MappingConfig::from_json(br#"{"d_close": 30}"#),
            Err(MappingError::InvalidParams(_))
        ));
        match MappingConfig::from_json(br#"{"theta_lft": 1}"#) {
            Err(MappingError::ParamsSchema { message, .. }) => assert!(message.contains("theta_lft")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fun_to_log_scene_example() {
        let m = closed("r : Car. b : Car. frontOf(r, b). med(b, r). !rightOf(b, r).");
        let p = fun_to_log(&m, "open", Arc::new(open_map()), &[Dims::default()], &GeometryParams::default()).unwrap();
        let got: Vec<String> = p.constraints.iter().map(|c| p.describe(c)).collect();
        // the three asserted relations ...
        for want in ["frontOf(r, b)", "med(b, r)", "!rightOf(b, r)"] {
            assert!(got.contains(&want.to_string()), "{want} missing from {got:?}");
        }
        // ... plus what the rules derive from them
        assert!(got.contains(&"med(r, b)".to_string()));
        assert!(got.contains(&"!leftOf(r, b)".to_string()));
        let m0 = build_model(&parse("r : Car. b : Car. frontOf(r, b). med(b, r). !rightOf(b, r).").unwrap());
        let p0 = fun_to_log(&m0, "open", Arc::new(open_map()), &[Dims::default()], &GeometryParams::default()).unwrap();
        let got0: Vec<String> = p0.constraints.iter().map(|c| p0.describe(c)).collect();
        let mut got0 = got0;
        got0.sort();
        assert_eq!(got0, ["!rightOf(b, r)", "frontOf(r, b)", "med(b, r)"]);
    }

    #[test]
    fn fun_to_log_close_example() {
        let m = closed("a : Car. b : Car. close(a, b).");
        let p = fun_to_log(&m, "open", Arc::new(open_map()), &[Dims::default()], &GeometryParams::default()).unwrap();
        let pos = p.constraints.iter().filter(|c| c.polarity == Polarity::Positive).count();
        let neg = p.constraints.iter().filter(|c| c.polarity == Polarity::Negative).count();
        assert_eq!((pos, neg), (2, 4));
        let empty = closed("a : Car. b : Car.");
        let p = fun_to_log(&empty, "open", Arc::new(open_map()), &[Dims::default()], &GeometryParams::default()).unwrap();
        assert!(p.constraints.is_empty());
    }

    #[test]
    fn fun_to_log_rejects_errors_and_cycles_dims() {
        let bad = closed("a : Car. b : Car. close(a, b). far(a, b).");
        assert!(matches!(
            fun_to_log(&bad, "m", Arc::new(open_map()), &[Dims::default()], &GeometryParams::default()),
            Err(MappingError::InconsistentInput(_))
        ));
        let m = closed("a : Car. b : Car. c : Car.");
        let pool = [Dims { w: 1.0, l: 2.0 }, Dims { w: 3.0, l: 4.0 }];
        let p = fun_to_log(&m, "m", Arc::new(open_map()), &pool, &GeometryParams::default()).unwrap();
        assert_eq!(p.actors[2].dims, pool[0]);
        assert_eq!(p.actors[1].dims, pool[1]);
    }

    #[test]
    fn holds_examples() {
        let map = open_map();
        let params = GeometryParams::default();
        let vocab = Vocabulary::default();
        let ev = Evaluator::new(&params, &map, &vocab);
        let s = [actor("a", 50.0, 50.0, 0.0), actor("b", 65.0, 50.0, 0.0)];
        assert!(ev.holds(&c(Relation::Med, Polarity::Positive, 0, 1), &s));
        assert!(!ev.holds(&c(Relation::Close, Polarity::Positive, 0, 1), &s));
        assert!(!ev.holds(&c(Relation::Far, Polarity::Positive, 0, 1), &s));
        assert!(ev.holds(&c(Relation::FrontOf, Polarity::Positive, 0, 1), &s));
        let same = [actor("a", 50.0, 50.0, 0.0), actor("b", 50.0, 50.0, 0.0)];
        assert!(!ev.holds(&c(Relation::NoColl, Polarity::Positive, 0, 1), &same));
        assert!(!ev.holds(&c(Relation::FrontOf, Polarity::Positive, 0, 1), &same));
        assert!(ev.holds(&c(Relation::FrontOf, Polarity::Negative, 0, 1), &same));
    }

    #[test]
    fn distance_examples() {
        let map = open_map();
        let params = GeometryParams::default();
        let vocab = Vocabulary::default();
        let ev = Evaluator::new(&params, &map, &vocab);
        let s = [actor("a", 50.0, 50.0, 0.0), actor("b", 55.0, 50.0, 0.0)];
        assert_eq!(ev.distance(&c(Relation::Med, Polarity::Positive, 0, 1), &s), 5.0);
        assert_eq!(ev.distance(&c(Relation::FrontOf, Polarity::Positive, 0, 1), &s), 0.0);
        assert_eq!(ev.distance(&c(Relation::Close, Polarity::Negative, 0, 1), &s), 5.0);
        let same = [actor("a", 50.0, 50.0, 0.0), actor("b", 50.0, 50.0, 0.0)];
        assert_eq!(ev.distance(&c(Relation::NoColl, Polarity::Positive, 0, 1), &same), 1.0);
        assert_eq!(
            ev.distance(&c(Relation::FrontOf, Polarity::Positive, 0, 1), &same),
            params.theta_front + PI
        );
        // b straight to the left: frontOf misses by pi/2 - theta_front
        let left = [actor("a", 50.0, 50.0, 0.0), actor("b", 50.0, 60.0, 0.0)];
        let df = ev.distance(&c(Relation::FrontOf, Polarity::Positive, 0, 1), &left);
        assert!((df - (FRAC_PI_2 - params.theta_front)).abs() < 1e-12);
        assert!((ev.distance(&c(Relation::LeftOf, Polarity::Negative, 0, 1), &left) - params.theta_left).abs() < 1e-12);
        // med band middle: negative depth is 5
        let mid = [actor("a", 50.0, 50.0, 0.0), actor("b", 65.0, 50.0, 0.0)];
        assert_eq!(ev.distance(&c(Relation::Med, Polarity::Negative, 0, 1), &mid), 5.0);
    }

    #[test]
    fn road_distances() {
        let strip = crate::roadmap::RoadMap::bundled("strip").unwrap();
        let params = GeometryParams::default();
        let vocab = Vocabulary::default();
        let ev = Evaluator::new(&params, &strip, &vocab);
        // lanes cover y in [15, 25]; the lower corners of an actor at y = 10 sit at y = 9
        let s = [actor("a", 100.0, 10.0, 0.0)];
        let on = c(Relation::OnRoad, Polarity::Positive, 0, 0);
        assert!((ev.distance(&on, &s) - 6.0).abs() < 1e-12);
        let s = [actor("a", 100.0, 20.0, 0.0)];
        assert_eq!(ev.distance(&on, &s), 0.0);
        // straddling the lane seam: each corner is 1 from the edge of its lane
        let off = c(Relation::OnRoad, Polarity::Negative, 0, 0);
        assert!((ev.distance(&off, &s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_to_fun_example() {
        let map = open_map();
        let params = GeometryParams::default();
        let vocab = Vocabulary::default();
        let ev = Evaluator::new(&params, &map, &vocab);
        let scene = ConcreteScene {
            map: "open".into(),
            actors: vec![actor("a", 50.0, 50.0, 0.0), actor("b", 65.0, 50.0, 0.0)],
        };
        let m = log_to_fun(&scene, &ev).unwrap();
        assert!(m.is_concrete());
        use TruthValue::{False, True};
        assert_eq!(m.value(Relation::FrontOf, "a", "b"), True);
        assert_eq!(m.value(Relation::Behind, "b", "a"), True);
        for (s, t) in [("a", "b"), ("b", "a")] {
            assert_eq!(m.value(Relation::Med, s, t), True);
            assert_eq!(m.value(Relation::Close, s, t), False);
            assert_eq!(m.value(Relation::Far, s, t), False);
            assert_eq!(m.value(Relation::NoColl, s, t), True);
            assert_eq!(m.value(Relation::OnRoad, s, t), False);
        }
        assert_eq!(m.value(Relation::OnRoad, "a", "a"), True);
        assert_eq!(m.value(Relation::OnRoad, "b", "b"), True);
        assert_eq!(m.value(Relation::CanSee, "a", "b"), True);
        assert_eq!(m.value(Relation::CanSee, "b", "a"), False);

        let empty = ConcreteScene {
            map: "open".into(),
            actors: vec![],
        };
        assert!(log_to_fun(&empty, &ev).unwrap().objects().is_empty());
    }

    #[test]
    fn log_to_fun_is_rule_closed() {
        let map = open_map();
        let params = GeometryParams::default();
        let vocab = Vocabulary::default();
        let ev = Evaluator::new(&params, &map, &vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let scene = random_scene(&mut rng, 3, 200.0);
            let m = log_to_fun(&scene, &ev).unwrap();
            let (closed, _) = m.apply_validity_rules(&[]);
            // boundary coincidences aside, applying the rules adds nothing
            if !closed.has_errors() {
                assert_eq!(closed, m);
            }
        }
    }

    #[test]
    fn log_to_fun_ignores_actor_order() {
        let map = open_map();
        let params = GeometryParams::default();
        let vocab = Vocabulary::default();
        let ev = Evaluator::new(&params, &map, &vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let scene = random_scene(&mut rng, 3, 200.0);
            let mut rev = scene.clone();
            rev.actors.reverse();
            let a = log_to_fun(&scene, &ev).unwrap();
            let b = log_to_fun(&rev, &ev).unwrap();
            assert!(PartialModel::refines(&a, &b).unwrap());
            assert!(PartialModel::refines(&b, &a).unwrap());
        }
    }

    #[test]
    fn check_refinement_cases() {
        let map = open_map();
        let params = GeometryParams::default();
        let vocab = Vocabulary::default();
        let ev = Evaluator::new(&params, &map, &vocab);
        let scene = ConcreteScene {
            map: "open".into(),
            actors: vec![actor("a", 50.0, 50.0, 0.0), actor("b", 65.0, 50.0, 0.0)],
        };
        assert!(check_refinement(&closed("a : Car. b : Car."), &scene, &ev).unwrap());
        assert!(check_refinement(&closed("a : Car. b : Car. frontOf(a, b). med(a, b)."), &scene, &ev).unwrap());
        assert!(!check_refinement(&closed("a : Car. b : Car. close(a, b)."), &scene, &ev).unwrap());
        assert!(check_refinement(&closed("a : Car."), &scene, &ev).is_err());
    }

    #[test]
    fn custom_relation_semantics() {
        let mut v = Vocabulary::default();
        let rel = v.register("parkedNear", Category::Distance, Arc::new(Parked)).unwrap();
        let v = Arc::new(v);
        let m = PartialModel::with_vocabulary(["a", "b"], v.clone())
            .unwrap()
            .assert_relation(Assertion::new(rel, "a", "b", TruthValue::True))
            .unwrap();
        let p = fun_to_log(&m, "open", Arc::new(open_map()), &[Dims::default()], &GeometryParams::default()).unwrap();
        assert_eq!(p.constraints.len(), 1);
        let ev = p.evaluator();
        let s = [actor("a", 50.0, 50.0, 0.0), actor("b", 60.0, 50.0, 0.0)];
        assert_eq!(ev.distance(&p.constraints[0], &s), 4.0);
        assert!(!ev.holds(&p.constraints[0], &s));
        let scene = ConcreteScene {
            map: "open".into(),
            actors: s.to_vec(),
        };
        let concrete = log_to_fun(&scene, &ev).unwrap();
        assert_eq!(concrete.value(rel, "a", "b"), TruthValue::False);
        assert_eq!(concrete.value(rel, "a", "a"), TruthValue::False);
    }

    #[test]
    fn scene_json_round_trip() {
        let scene = ConcreteScene {
            map: "strip".into(),
            actors: vec![actor("r", 56.20, 188.48, 1.57), actor("b", 42.44, 188.48, 1.57)],
        };
        assert_eq!(ConcreteScene::from_json(scene.to_json().as_bytes()).unwrap(), scene);
        assert!(matches!(
            ConcreteScene::from_json(br#"{"map": "m", "actors": [{"id": "a", "x": 0, "y": 0, "h": 0, "w": 0, "l": 1}]}"#),
            Err(MappingError::InvalidScene(_))
        ));
        assert!(matches!(
            ConcreteScene::from_json(br#"{"map": "m", "actors": [{"id": "a", "x": 0}]}"#),
            Err(MappingError::SceneSchema { .. })
        ));
    }

    pub(crate) fn random_scene(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> ConcreteScene {
        let ids = ["a", "b", "c", "d", "e"];
        ConcreteScene {
            map: "test".into(),
            actors: (0..n)
                .map(|i| ActorTuple {
                    id: ids[i].into(),
                    x: rng.gen_range(0.0..extent),
                    y: rng.gen_range(0.0..extent),
                    h: rng.gen_range(-PI..PI),
                    w: rng.gen_range(1.0..3.0),
                    l: rng.gen_range(2.0..6.0),
                })
                .collect(),
        }
    }

    /// Random pair clustered so that every relation is exercised both ways.
    fn near_pair(rng: &mut ChaCha8Rng, center: Point) -> [ActorTuple; 2] {
        let a = ActorTuple {
            id: "a".into(),
            x: center.x + rng.gen_range(-3.0..3.0),
            y: center.y + rng.gen_range(-3.0..3.0),
            h: rng.gen_range(-PI..PI),
            w: 2.0,
            l: 4.5,
        };
        let r = rng.gen_range(0.0..60.0);
        let t = rng.gen_range(-PI..PI);
        let b = ActorTuple {
            id: "b".into(),
            x: a.x + r * t.cos(),
            y: a.y + r * t.sin(),
            h: rng.gen_range(-PI..PI),
            w: 2.0,
            l: 4.5,
        };
        [a, b]
    }

    #[test]
    fn zero_set_duality_sampled() {
        let map = RoadMap::bundled("cross").unwrap();
        let params = GeometryParams::default();
        let vocab = Vocabulary::default();
        let ev = Evaluator::new(&params, &map, &vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for rel in Relation::BUILTIN {
            for pol in [Polarity::Positive, Polarity::Negative] {
                let (src, tgt) = if rel == Relation::OnRoad { (0, 0) } else { (0, 1) };
                let con = c(rel, pol, src, tgt);
                let mut hits = 0;
                for _ in 0..1000 {
                    let s = near_pair(&mut rng, Point::new(68.0, 60.0));
                    let df = ev.distance(&con, &s);
                    assert!(df >= 0.0 && df.is_finite());
                    assert_eq!(df == 0.0, ev.holds(&con, &s), "{rel:?} {pol:?} {s:?}");
                    hits += ev.holds(&con, &s) as usize;
                }
                assert!(hits > 0 && hits < 1000, "{rel:?} {pol:?} never varies");
            }
        }
    }

    #[test]
    fn continuity_probes() {
        let map = RoadMap::bundled("cross").unwrap();
        let params = GeometryParams::default();
        let vocab = Vocabulary::default();
        let ev = Evaluator::new(&params, &map, &vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rels = [
            Relation::LeftOf,
            Relation::FrontOf,
            Relation::Close,
            Relation::Med,
            Relation::Far,
            Relation::CanSee,
            Relation::OnRoad,
        ];
        let step = 1e-5;
        for _ in 0..2000 {
            let s = near_pair(&mut rng, Point::new(75.0, 75.0));
            if s[0].center().dist(s[1].center()) < 1.0 {
                continue;
            }
            let mut t = s.clone();
            t[0].x += rng.gen_range(-step..step);
            t[0].y += rng.gen_range(-step..step);
            t[0].h += rng.gen_range(-step..step);
            t[1].x += rng.gen_range(-step..step);
            t[1].y += rng.gen_range(-step..step);
            for rel in rels {
                for pol in [Polarity::Positive, Polarity::Negative] {
                    let (src, tgt) = if rel == Relation::OnRoad { (0, 0) } else { (0, 1) };
                    let con = c(rel, pol, src, tgt);
                    let d = (ev.distance(&con, &s) - ev.distance(&con, &t)).abs();
                    // empirical Lipschitz bound: radius-50 sector rotating with the heading
                    assert!(d <= 200.0 * step, "{rel:?} {pol:?}: jump {d}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn polarity_duality(seed in any::<u64>(), r in 0usize..10) {
            let map = RoadMap::bundled("cross").unwrap();
            let params = GeometryParams::default();
            let vocab = Vocabulary::default();
            let ev = Evaluator::new(&params, &map, &vocab);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = near_pair(&mut rng, Point::new(75.0, 75.0));
            let rel = Relation::BUILTIN[r];
            let (src, tgt) = if rel == Relation::OnRoad { (0, 0) } else { (0, 1) };
            prop_assert_eq!(
                ev.holds(&c(rel, Polarity::Positive, src, tgt), &s),
                !ev.holds(&c(rel, Polarity::Negative, src, tgt), &s)
            );
        }
    }
}
