//! Random feasible specifications, constraint staging and benchmark runs.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fss::{self, FssDocument};
use crate::logic::{Assertion, Category, ModelError, PartialModel, Relation, TruthValue};
use crate::mapping::{fun_to_log, log_to_fun, ConcreteScene, MappingConfig, MappingError};
use crate::par::{self, Execution};
use crate::roadmap::{MapError, RoadMap};
use crate::search::{build_problem, run, AlgoConfig, Algorithm, HeadingMode, RunResult, Status, Strategy};

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error("no witness scene found in {0} attempts")]
    GenerationBudgetExhausted(usize),
    #[error("invalid generation request: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("matrix config error at {path}: {message}")]
    MatrixSchema { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: fss::ParseError,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Request for a random specification with a known solution.
#[derive(Debug, Clone)]
pub struct GenSpec {
    pub n_actors: usize,
    pub map_name: String,
    pub map: Arc<RoadMap>,
    /// Upper bound on every pairwise center distance of the witness.
    pub max_pair_distance: f64,
    pub seed: u64,
    pub mapping: MappingConfig,
    pub max_attempts: usize,
    pub witness_evaluations: u64,
}

impl GenSpec {
    pub fn new(n_actors: usize, map_name: &str, map: Arc<RoadMap>, seed: u64) -> GenSpec {
        GenSpec {
            n_actors,
            map_name: map_name.to_string(),
            map,
            max_pair_distance: 50.0,
            seed,
            mapping: MappingConfig::default(),
            max_attempts: 200,
            witness_evaluations: 20_000,
        }
    }
}

/// Actor ids `a`, `b`, …, `z`, `a1`, `b1`, ….
pub fn actor_id(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    match i / 26 {
        0 => letter.to_string(),
        k => format!("{letter}{k}"),
    }
}

/// A random specification together with a scene that satisfies it.
///
/// Places the actors on the road without collisions by search, keeps the
/// first placement whose actors lie within `max_pair_distance` of each other,
/// and abstracts it: road placement, collision avoidance and every positional,
/// distance and visibility relation that holds in the placement.
pub fn generate_fss(spec: &GenSpec) -> Result<(FssDocument, ConcreteScene), WorkbenchError> {
    if spec.n_actors == 0 {
        return Err(WorkbenchError::InvalidSpec("need at least one actor".into()));
    }
    if spec.max_pair_distance.is_nan() || spec.max_pair_distance <= 0.0 {
        return Err(WorkbenchError::InvalidSpec("max pair distance must be positive".into()));
    }
    let ids: Vec<String> = (0..spec.n_actors).map(actor_id).collect();
    let mut pre = PartialModel::new(ids.clone()).expect("ids are distinct");
    for a in &ids {
        pre = pre.assert_relation(Assertion::new(Relation::OnRoad, a, a, TruthValue::True))?;
    }
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            pre = pre.assert_relation(Assertion::new(Relation::NoColl, &ids[i], &ids[j], TruthValue::True))?;
        }
    }
    let (pre_closed, _) = pre.apply_validity_rules(&[]);
    let n_pre = fun_to_log(
        &pre_closed,
        &spec.map_name,
        spec.map.clone(),
        &spec.mapping.dims,
        &spec.mapping.params,
    )?;
    let mp = build_problem(n_pre, Strategy::Actor, HeadingMode::Lane)
        .map_err(|e| WorkbenchError::InvalidSpec(e.to_string()))?;
    let ev = mp.problem.evaluator();
    for attempt in 0..spec.max_attempts {
        let cfg = AlgoConfig::new(Algorithm::Nsga2)
            .with_seed(spec.seed.wrapping_mul(1_000_003).wrapping_add(attempt as u64))
            .with_budget(Some(spec.witness_evaluations), None);
        let result = run(&mp, &cfg).expect("default configuration is valid");
        if result.status != Status::Solved || !result.per_constraint.iter().all(|c| c.holds) {
            continue;
        }
        let witness = result.scene.expect("solved runs carry a scene");
        let close_enough = witness.actors.iter().enumerate().all(|(i, a)| {
            witness.actors[i + 1..]
                .iter()
                .all(|b| a.center().dist(b.center()) <= spec.max_pair_distance)
        });
        if !close_enough {
            continue;
        }
        let concrete = log_to_fun(&witness, &ev)?;
        let mut p_in = PartialModel::new(ids.clone()).expect("ids are distinct");
        for (atom, v) in concrete.entries() {
            if v != TruthValue::True {
                continue;
            }
            let keep = match atom.relation {
                Relation::OnRoad => atom.src == atom.tgt,
                Relation::NoColl => atom.src < atom.tgt,
                r => atom.src != atom.tgt && r.builtin_category().is_some(),
            };
            if keep {
                p_in = p_in.assert_relation(Assertion::new(
                    atom.relation,
                    &ids[atom.src],
                    &ids[atom.tgt],
                    TruthValue::True,
                ))?;
            }
        }
        let doc = fss::parse(&fss::format(&p_in)).expect("formatted models parse");
        let (closed, _) = fss::build_model(&doc).apply_validity_rules(&[]);
        if !closed.find_inconsistencies().is_empty() {
            continue;
        }
        return Ok((doc, witness));
    }
    Err(WorkbenchError::GenerationBudgetExhausted(spec.max_attempts))
}

pub const STAGE_LABELS: [&str; 6] = ["∅", "R", "RC", "RCP", "RCPD", "RCPDV"];

const STAGE_ORDER: [Category; 5] = [
    Category::RoadPlacement,
    Category::CollisionAvoidance,
    Category::Positional,
    Category::Distance,
    Category::Visibility,
];

/// Cumulative sub-specifications: nothing, then road placement, collision
/// avoidance, position, distance and visibility added in turn. Each stage
/// keeps the assertions of its categories and is closed under the validity
/// rules.
pub fn stage_constraints(model: &PartialModel) -> Vec<(String, PartialModel)> {
    let vocab = model.vocabulary().clone();
    (0..=STAGE_ORDER.len())
        .map(|k| {
            let cats = &STAGE_ORDER[..k];
            let sub = model.restrict_assertions(|a| cats.contains(&vocab.category(a.relation)));
            (STAGE_LABELS[k].to_string(), sub.apply_validity_rules(&[]).0)
        })
        .collect()
}

/// One benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scene: String,
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub seed: u64,
    pub stage: String,
    pub status: Status,
    pub evaluations: u64,
    pub wall_seconds: f64,
    pub total_df: f64,
    pub constraints: usize,
}

pub const CSV_HEADER: [&str; 10] = [
    "scene",
    "algorithm",
    "strategy",
    "seed",
    "stage",
    "status",
    "evaluations",
    "wall_seconds",
    "total_df",
    "constraints",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub max_evaluations: Option<u64>,
    pub max_wall_seconds: Option<f64>,
}

/// A benchmark input: an id and an unclosed specification.
#[derive(Debug, Clone)]
pub struct BenchScene {
    pub id: String,
    pub model: PartialModel,
}

#[derive(Debug, Clone)]
pub struct BenchMatrix {
    pub scenes: Vec<BenchScene>,
    pub configs: Vec<(Algorithm, Strategy)>,
    pub seeds: Vec<u64>,
    /// Expand every scene into its six cumulative stages.
    pub stages: bool,
    pub budget: Budget,
    pub heading: HeadingMode,
    pub epsilon: f64,
    pub map_name: String,
    pub map: Arc<RoadMap>,
    pub mapping: MappingConfig,
}

struct Case<'a> {
    scene: &'a str,
    stage: String,
    model: PartialModel,
    algorithm: Algorithm,
    strategy: Strategy,
    seed: u64,
}

impl BenchMatrix {
    pub fn len(&self) -> usize {
        let stages = if self.stages { STAGE_LABELS.len() } else { 1 };
        self.scenes.len() * stages * self.configs.len() * self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cases(&self) -> Vec<Case<'_>> {
        let mut out = Vec::with_capacity(self.len());
        for s in &self.scenes {
            let stages: Vec<(String, PartialModel)> = if self.stages {
                stage_constraints(&s.model)
            } else {
                vec![("full".to_string(), s.model.apply_validity_rules(&[]).0)]
            };
            for (label, model) in stages {
                for (algorithm, strategy) in &self.configs {
                    for seed in &self.seeds {
                        out.push(Case {
                            scene: &s.id,
                            stage: label.clone(),
                            model: model.clone(),
                            algorithm: *algorithm,
                            strategy: *strategy,
                            seed: *seed,
                        });
                    }
                }
            }
        }
        out
    }

    fn run_case(&self, case: &Case<'_>) -> (BenchRow, Option<RunResult>) {
        let start = Instant::now();
        let row = |status, evaluations, total_df, constraints| BenchRow {
            scene: case.scene.to_string(),
            algorithm: case.algorithm,
            strategy: case.strategy,
            seed: case.seed,
            stage: case.stage.clone(),
            status,
            evaluations,
            wall_seconds: start.elapsed().as_secs_f64(),
            total_df,
            constraints,
        };
        if case.model.has_errors() {
            return (row(Status::StaticError, 0, f64::NAN, 0), None);
        }
        let n = match fun_to_log(
            &case.model,
            &self.map_name,
            self.map.clone(),
            &self.mapping.dims,
            &self.mapping.params,
        ) {
            Ok(n) => n,
            Err(_) => return (row(Status::StaticError, 0, f64::NAN, 0), None),
        };
        let constraints = n.constraints.len();
        // an empty constraint set has no per-group objectives; one global
        // objective (identically zero) stands in for the configured grouping
        let strategy = if constraints == 0 { Strategy::Global } else { case.strategy };
        let mp = match build_problem(n, strategy, self.heading) {
            Ok(mp) => mp,
            Err(_) => return (row(Status::StaticError, 0, f64::NAN, constraints), None),
        };
        let mut cfg = AlgoConfig::new(case.algorithm)
            .with_seed(case.seed)
            .with_budget(self.budget.max_evaluations, self.budget.max_wall_seconds);
        cfg.epsilon = self.epsilon;
        cfg.execution = Execution::Sequential;
        match run(&mp, &cfg) {
            Ok(r) => (row(r.status, r.evaluations_used, r.total_distance(), constraints), Some(r)),
            Err(_) => (row(Status::StaticError, 0, f64::NAN, constraints), None),
        }
    }

    /// Run every case; rows come back in matrix order (scene, stage, config,
    /// seed) regardless of scheduling.
    pub fn run(&self, execution: Execution) -> Vec<BenchRow> {
        self.run_detailed(execution).into_iter().map(|(r, _)| r).collect()
    }

    /// Like [`BenchMatrix::run`], also returning each search result.
    pub fn run_detailed(&self, execution: Execution) -> Vec<(BenchRow, Option<RunResult>)> {
        let cases = self.cases();
        par::map(&cases, execution, |c| self.run_case(c))
    }
}

/// Write rows as CSV with a header line.
pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<(), WorkbenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| WorkbenchError::Csv(e.into()))?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchRow>, WorkbenchError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    map: String,
    #[serde(default)]
    scenes: Vec<PathBuf>,
    generate: Option<GenerateDoc>,
    configs: Vec<ConfigDoc>,
    seeds: Vec<u64>,
    #[serde(default)]
    budget: BudgetDoc,
    #[serde(default)]
    stages: bool,
    #[serde(default = "default_heading")]
    heading: HeadingMode,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    params: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateDoc {
    count: usize,
    actors: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_r")]
    r: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    algo: Algorithm,
    agg: Strategy,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetDoc {
    max_evals: Option<u64>,
    timeout_s: Option<f64>,
}

impl Default for BudgetDoc {
    fn default() -> Self {
        BudgetDoc {
            max_evals: Some(100_000),
            timeout_s: Some(60.0),
        }
    }
}

fn default_heading() -> HeadingMode {
    HeadingMode::Lane
}

fn default_epsilon() -> f64 {
    crate::search::run::DEFAULT_EPSILON
}

fn default_r() -> f64 {
    50.0
}

/// Resolve a map argument: a bundled map name or a path to a map file.
pub fn load_map(spec: &str, base: &Path) -> Result<(String, RoadMap), WorkbenchError> {
    if RoadMap::bundled_names().any(|n| n == spec) {
        return Ok((spec.to_string(), RoadMap::bundled(spec)?));
    }
    let path = base.join(spec);
    let bytes = std::fs::read(&path).map_err(|source| WorkbenchError::Io {
        path: path.clone(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    Ok((name, RoadMap::load(&bytes)?))
}

/// Read a matrix config. Relative paths resolve against the config's folder;
/// generated scenes are named `gen<k>`.
pub fn load_matrix(path: &Path) -> Result<BenchMatrix, WorkbenchError> {
    let bytes = std::fs::read(path).map_err(|source| WorkbenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_matrix(&bytes, base)
}

pub fn parse_matrix(bytes: &[u8], base: &Path) -> Result<BenchMatrix, WorkbenchError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let doc: MatrixDoc = serde_path_to_error::deserialize(de).map_err(|e| WorkbenchError::MatrixSchema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let (map_name, map) = load_map(&doc.map, base)?;
    let map = Arc::new(map);
    let mapping = match &doc.params {
        Some(p) => {
            let path = base.join(p);
            let bytes = std::fs::read(&path).map_err(|source| WorkbenchError::Io { path, source })?;
            MappingConfig::from_json(&bytes)?
        }
        None => MappingConfig::default(),
    };
    let mut scenes = Vec::new();
    for p in &doc.scenes {
        let path = base.join(p);
        let text = std::fs::read_to_string(&path).map_err(|source| WorkbenchError::Io {
            path: path.clone(),
            source,
        })?;
        let parsed = fss::parse(&text).map_err(|source| WorkbenchError::Parse {
            path: path.clone(),
            source,
        })?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        scenes.push(BenchScene {
            id,
            model: fss::build_model(&parsed),
        });
    }
    if let Some(g) = &doc.generate {
        for k in 0..g.count {
            let mut spec = GenSpec::new(g.actors, &map_name, map.clone(), g.seed + k as u64);
            spec.max_pair_distance = g.r;
            spec.mapping = mapping.clone();
            let (d, _) = generate_fss(&spec)?;
            scenes.push(BenchScene {
                id: format!("gen{k}"),
                model: fss::build_model(&d),
            });
        }
    }
    Ok(BenchMatrix {
        scenes,
        configs: doc.configs.iter().map(|c| (c.algo, c.agg)).collect(),
        seeds: doc.seeds,
        stages: doc.stages,
        budget: Budget {
            max_evaluations: doc.budget.max_evals,
            max_wall_seconds: doc.budget.timeout_s,
        },
        heading: doc.heading,
        epsilon: doc.epsilon,
        map_name,
        map,
        mapping,
    })
}
