use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::Category;
use crate::mapping::{ActorTuple, ConcreteScene, NumericConstraint, NumericProblem};
use crate::par;

/// How numeric constraints are partitioned into objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// One objective over all constraints.
    #[serde(rename = "g")]
    Global,
    /// One objective per relation category.
    #[serde(rename = "c")]
    Category,
    /// One objective per source actor.
    #[serde(rename = "a")]
    Actor,
    /// Per category, road and collision cubed, the rest squared.
    #[serde(rename = "wc")]
    WeightedCategory,
    /// Road and collision together cubed; position, distance and visibility
    /// together squared.
    #[serde(rename = "wd")]
    WeightedDependency,
    /// One objective per constraint.
    #[serde(rename = "none")]
    None,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Global,
        Strategy::Category,
        Strategy::Actor,
        Strategy::WeightedCategory,
        Strategy::WeightedDependency,
        Strategy::None,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Strategy::Global => "g",
            Strategy::Category => "c",
            Strategy::Actor => "a",
            Strategy::WeightedCategory => "wc",
            Strategy::WeightedDependency => "wd",
            Strategy::None => "none",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.code() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown aggregation strategy `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadingMode {
    /// Two variables per actor; the heading follows the lane under it.
    Lane,
    /// Three variables per actor.
    Free,
}

impl FromStr for HeadingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lane" => Ok(HeadingMode::Lane),
            "free" => Ok(HeadingMode::Free),
            _ => Err(format!("unknown heading mode `{s}`")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("the problem has no constraints to aggregate")]
    NoConstraints,
    #[error("the problem has no actors")]
    NoActors,
    #[error("lane heading mode needs a map with lane headings")]
    NoHeadings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

/// Objective `(Σ DF)^weight_exponent` over `members` (indices into the
/// numeric problem's constraints).
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveGroup {
    pub label: String,
    pub members: Vec<usize>,
    pub weight_exponent: u32,
}

#[derive(Debug, Clone)]
pub struct MinimizationProblem {
    pub variables: Vec<Variable>,
    pub groups: Vec<ObjectiveGroup>,
    pub problem: NumericProblem,
    pub heading_mode: HeadingMode,
    pub strategy: Strategy,
}

/// Objective values together with the raw distance of every constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objectives: Vec<f64>,
    pub distances: Vec<f64>,
}

impl Evaluation {
    pub fn total(&self) -> f64 {
        self.distances.iter().sum()
    }

    pub fn is_solution(&self, epsilon: f64) -> bool {
        self.distances.iter().all(|d| *d < epsilon)
    }
}

pub fn build_problem(
    problem: NumericProblem,
    strategy: Strategy,
    heading_mode: HeadingMode,
) -> Result<MinimizationProblem, ProblemError> {
    if problem.actors.is_empty() {
        return Err(ProblemError::NoActors);
    }
    if heading_mode == HeadingMode::Lane && !problem.map.has_headings() {
        return Err(ProblemError::NoHeadings);
    }
    let n = problem.constraints.len();
    if n == 0 && strategy != Strategy::Global {
        return Err(ProblemError::NoConstraints);
    }
    let vocab = problem.vocabulary.clone();
    let category = |i: usize| vocab.category(problem.constraints[i].relation);
    let by_category = |cats: &[Category]| -> Vec<usize> { (0..n).filter(|i| cats.contains(&category(*i))).collect() };
    let group = |label: &str, members: Vec<usize>, k: u32| ObjectiveGroup {
        label: label.to_string(),
        members,
        weight_exponent: k,
    };
    let mut groups = match strategy {
        Strategy::Global => vec![group("global", (0..n).collect(), 1)],
        Strategy::Category | Strategy::WeightedCategory => Category::ALL
            .iter()
            .map(|c| {
                let k = match (strategy, c) {
                    (Strategy::Category, _) => 1,
                    (_, Category::RoadPlacement | Category::CollisionAvoidance) => 3,
                    _ => 2,
                };
                group(c.short(), by_category(&[*c]), k)
            })
            .collect(),
        Strategy::Actor => problem
            .actors
            .iter()
            .enumerate()
            .map(|(a, t)| group(&t.id, (0..n).filter(|i| problem.constraints[*i].src == a).collect(), 1))
            .collect(),
        Strategy::WeightedDependency => vec![
            group(
                "road+coll",
                by_category(&[Category::RoadPlacement, Category::CollisionAvoidance]),
                3,
            ),
            group(
                "pos+dist+vis",
                by_category(&[Category::Positional, Category::Distance, Category::Visibility]),
                2,
            ),
        ],
        Strategy::None => (0..n)
            .map(|i| group(&problem.describe(&problem.constraints[i]), vec![i], 1))
            .collect(),
    };
    if strategy != Strategy::Global {
        groups.retain(|g| !g.members.is_empty());
    }
    let mut variables = Vec::new();
    for a in &problem.actors {
        variables.push(Variable {
            name: format!("{}.x", a.id),
            lower: 0.0,
            upper: problem.map.width,
        });
        variables.push(Variable {
            name: format!("{}.y", a.id),
            lower: 0.0,
            upper: problem.map.height,
        });
        if heading_mode == HeadingMode::Free {
            variables.push(Variable {
                name: format!("{}.h", a.id),
                lower: -PI,
                upper: PI,
            });
        }
    }
    Ok(MinimizationProblem {
        variables,
        groups,
        problem,
        heading_mode,
        strategy,
    })
}

impl MinimizationProblem {
    pub fn n_var(&self) -> usize {
        self.variables.len()
    }

    pub fn n_obj(&self) -> usize {
        self.groups.len()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.variables.iter().map(|v| (v.lower, v.upper)).collect()
    }

    pub fn constraints(&self) -> &[NumericConstraint] {
        &self.problem.constraints
    }

    pub fn decode_actors(&self, genome: &[f64]) -> Vec<ActorTuple> {
        let per = match self.heading_mode {
            HeadingMode::Lane => 2,
            HeadingMode::Free => 3,
        };
        self.problem
            .actors
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let x = genome[i * per];
                let y = genome[i * per + 1];
                let h = match self.heading_mode {
                    HeadingMode::Free => crate::geometry::wrap_angle(genome[i * per + 2]),
                    HeadingMode::Lane => self
                        .problem
                        .map
                        .derive_heading(crate::geometry::Point::new(x, y))
                        .expect("checked when the problem was built"),
                };
                ActorTuple {
                    id: t.id.clone(),
                    x,
                    y,
                    h,
                    w: t.dims.w,
                    l: t.dims.l,
                }
            })
            .collect()
    }

    pub fn decode(&self, genome: &[f64]) -> ConcreteScene {
        ConcreteScene {
            map: self.problem.map_name.clone(),
            actors: self.decode_actors(genome),
        }
    }

    pub fn evaluate(&self, genome: &[f64]) -> Evaluation {
        let actors = self.decode_actors(genome);
        let ev = self.problem.evaluator();
        let distances: Vec<f64> = self.problem.constraints.iter().map(|c| ev.distance(c, &actors)).collect();
        let objectives = self
            .groups
            .iter()
            .map(|g| {
                let sum: f64 = g.members.iter().map(|i| distances[*i]).sum();
                sum.powi(g.weight_exponent as i32)
            })
            .collect();
        Evaluation {
            objectives,
            distances,
        }
    }

    pub fn objective_values(&self, genome: &[f64]) -> Vec<f64> {
        self.evaluate(genome).objectives
    }

    /// Every raw constraint distance is below `epsilon`.
    pub fn is_solution(&self, genome: &[f64], epsilon: f64) -> bool {
        self.evaluate(genome).is_solution(epsilon)
    }

    pub fn evaluate_batch(&self, genomes: &[Vec<f64>], execution: par::Execution) -> Vec<Evaluation> {
        par::map(genomes, execution, |g| self.evaluate(g))
    }
}

/// Base-2 exponent of the `(2^n)^(m(m-1))` over-approximation of the number
/// of functional scenes with `n` symbols and `m` actors.
pub fn estimate_search_space_exponent(n_symbols: u64, m_actors: u64) -> u64 {
    n_symbols * m_actors * m_actors.saturating_sub(1)
}
