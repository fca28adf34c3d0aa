use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::nsga3;
use super::operators::{pm, sbx};
use super::problem::{Evaluation, MinimizationProblem, Strategy};
use super::sorting::{crowding_distance, das_dennis, dominates, fast_nondominated_sort};
use crate::mapping::{describe_constraint, ConcreteScene, Polarity};
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ga,
    Nsga2,
    Nsga3,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ga, Algorithm::Nsga2, Algorithm::Nsga3];

    pub fn code(self) -> &'static str {
        match self {
            Algorithm::Ga => "ga",
            Algorithm::Nsga2 => "nsga2",
            Algorithm::Nsga3 => "nsga3",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.code() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// Search settings. `None` sizes and mutation probability resolve per
/// algorithm when the run starts (see [`AlgoConfig::new`]).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoConfig {
    pub algorithm: Algorithm,
    pub pop_size: Option<usize>,
    pub n_offsprings: Option<usize>,
    pub sbx_prob: f64,
    pub sbx_eta: f64,
    /// Per-variable mutation probability; `None` means `1 / n_var`.
    pub pm_prob: Option<f64>,
    pub pm_eta: f64,
    pub ref_dir_partitions: usize,
    pub epsilon: f64,
    pub max_evaluations: Option<u64>,
    pub max_wall_seconds: Option<f64>,
    pub seed: u64,
    pub execution: Execution,
}

pub const DEFAULT_EPSILON: f64 = 1e-3;

impl AlgoConfig {
    /// Defaults per algorithm:
    ///
    /// | algorithm | pop | offsprings | SBX (p, η) | PM η |
    /// |-----------|-----|------------|------------|------|
    /// | GA        | 5   | 5          | 0.9, 3     | 5    |
    /// | NSGA-II   | 5   | 5          | 0.9, 15    | 20   |
    /// | NSGA-III  | #reference directions | = pop | 1.0, 30 | 20 |
    pub fn new(algorithm: Algorithm) -> AlgoConfig {
        let (pop, off, sbx_prob, sbx_eta, pm_eta) = match algorithm {
            Algorithm::Ga => (Some(5), Some(5), 0.9, 3.0, 5.0),
            Algorithm::Nsga2 => (Some(5), Some(5), 0.9, 15.0, 20.0),
            Algorithm::Nsga3 => (None, None, 1.0, 30.0, 20.0),
        };
        AlgoConfig {
            algorithm,
            pop_size: pop,
            n_offsprings: off,
            sbx_prob,
            sbx_eta,
            pm_prob: None,
            pm_eta,
            ref_dir_partitions: 1,
            epsilon: DEFAULT_EPSILON,
            max_evaluations: Some(200_000),
            max_wall_seconds: Some(600.0),
            seed: 0,
            execution: Execution::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, max_evaluations: Option<u64>, max_wall_seconds: Option<f64>) -> Self {
        self.max_evaluations = max_evaluations;
        self.max_wall_seconds = max_wall_seconds;
        self
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("GA needs exactly one objective, the problem has {0}")]
    GaNeedsSingleObjective(usize),
    #[error("NSGA-III population must equal the {expected} reference directions, got {got}")]
    Nsga3PopulationMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Solved,
    BestEffort,
    StaticError,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Solved => "Solved",
            Status::BestEffort => "BestEffort",
            Status::StaticError => "StaticError",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub constraint: String,
    pub relation: String,
    pub polarity: Polarity,
    pub src: String,
    pub tgt: String,
    pub distance: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub status: Status,
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub seed: u64,
    pub scene: Option<ConcreteScene>,
    pub per_constraint: Vec<ConstraintReport>,
    pub objective_values: Vec<f64>,
    pub evaluations_used: u64,
    pub generations: u64,
    pub wall_seconds: f64,
}

impl RunResult {
    /// Result of a run refused by the static check.
    pub fn static_error(algorithm: Algorithm, strategy: Strategy, seed: u64) -> RunResult {
        RunResult {
            status: Status::StaticError,
            algorithm,
            strategy,
            seed,
            scene: None,
            per_constraint: Vec::new(),
            objective_values: Vec::new(),
            evaluations_used: 0,
            generations: 0,
            wall_seconds: 0.0,
        }
    }

    pub fn total_distance(&self) -> f64 {
        self.per_constraint.iter().map(|c| c.distance).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// JSON without the wall-clock field, for reproducibility comparisons.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("result serializes");
        v.as_object_mut().expect("object").remove("wall_seconds");
        serde_json::to_string(&v).expect("value serializes")
    }
}

/// Per-generation snapshot passed to observers.
#[derive(Debug, Clone, PartialEq)]
pub struct Progress {
    pub generation: u64,
    pub evaluations: u64,
    /// Lowest total distance evaluated so far.
    pub best_total: f64,
    /// Lowest total distance in the current population.
    pub population_best_total: f64,
}

#[derive(Clone)]
struct Individual {
    genome: Vec<f64>,
    eval: Evaluation,
}

struct Resolved {
    pop_size: usize,
    n_offsprings: usize,
    pm_prob: f64,
    ref_dirs: Vec<Vec<f64>>,
}

fn resolve(mp: &MinimizationProblem, cfg: &AlgoConfig) -> Result<Resolved, ConfigError> {
    let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
    if cfg.epsilon.is_nan() || cfg.epsilon <= 0.0 {
        return invalid("epsilon must be positive");
    }
    if !(0.0..=1.0).contains(&cfg.sbx_prob) || cfg.pm_prob.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
        return invalid("probabilities must lie in [0, 1]");
    }
    if cfg.sbx_eta.is_nan() || cfg.pm_eta.is_nan() || cfg.sbx_eta < 0.0 || cfg.pm_eta < 0.0 {
        return invalid("distribution indices must be non-negative");
    }
    if cfg.max_evaluations.is_none() && cfg.max_wall_seconds.is_none() {
        return invalid("at least one budget must be set");
    }
    if cfg.max_wall_seconds.is_some_and(|s| s.is_nan() || s < 0.0) {
        return invalid("time budget must be non-negative");
    }
    let n_obj = mp.n_obj();
    let mut ref_dirs = Vec::new();
    let pop_size = match cfg.algorithm {
        Algorithm::Ga => {
            if n_obj != 1 {
                return Err(ConfigError::GaNeedsSingleObjective(n_obj));
            }
            cfg.pop_size.unwrap_or(5)
        }
        Algorithm::Nsga2 => cfg.pop_size.unwrap_or(5),
        Algorithm::Nsga3 => {
            if cfg.ref_dir_partitions == 0 {
                return invalid("reference direction partitions must be positive");
            }
            ref_dirs = das_dennis(n_obj, cfg.ref_dir_partitions);
            match cfg.pop_size {
                Some(p) if p != ref_dirs.len() => {
                    return Err(ConfigError::Nsga3PopulationMismatch {
                        expected: ref_dirs.len(),
                        got: p,
                    })
                }
                _ => ref_dirs.len(),
            }
        }
    };
    if pop_size == 0 {
        return invalid("population size must be positive");
    }
    let n_offsprings = cfg.n_offsprings.unwrap_or(pop_size);
    if n_offsprings == 0 {
        return invalid("offspring count must be positive");
    }
    let pm_prob = cfg.pm_prob.unwrap_or(1.0 / mp.n_var() as f64);
    Ok(Resolved {
        pop_size,
        n_offsprings,
        pm_prob,
        ref_dirs,
    })
}

/// Run the configured algorithm until a candidate with every constraint
/// distance below `epsilon` appears or the budget runs out.
pub fn run(mp: &MinimizationProblem, cfg: &AlgoConfig) -> Result<RunResult, ConfigError> {
    run_observed(mp, cfg, &mut |_| {})
}

pub fn run_observed(
    mp: &MinimizationProblem,
    cfg: &AlgoConfig,
    observer: &mut dyn FnMut(&Progress),
) -> Result<RunResult, ConfigError> {
    let r = resolve(mp, cfg)?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bounds = mp.bounds();

    let genomes: Vec<Vec<f64>> = (0..r.pop_size)
        .map(|_| bounds.iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi)).collect())
        .collect();
    let evals = mp.evaluate_batch(&genomes, cfg.execution);
    let mut used = genomes.len() as u64;
    let mut pop: Vec<Individual> = genomes
        .into_iter()
        .zip(evals)
        .map(|(genome, eval)| Individual { genome, eval })
        .collect();

    let mut best = pop[0].clone();
    let mut generation = 0u64;
    let finish = |status: Status, ind: &Individual, used: u64, generation: u64| {
        report(mp, cfg, status, ind, used, generation, start.elapsed().as_secs_f64())
    };

    for ind in &pop {
        if ind.eval.is_solution(cfg.epsilon) {
            return Ok(finish(Status::Solved, ind, used, generation));
        }
        if ind.eval.total() < best.eval.total() {
            best = ind.clone();
        }
    }
    let mut crowd = match cfg.algorithm {
        Algorithm::Nsga2 => {
            let objs: Vec<Vec<f64>> = pop.iter().map(|i| i.eval.objectives.clone()).collect();
            let (keep, crowd) = nsga2_survival(&objs, r.pop_size);
            // everything survives; restore population order
            let mut by_index = vec![0.0; pop.len()];
            for (k, i) in keep.into_iter().enumerate() {
                by_index[i] = crowd[k];
            }
            by_index
        }
        _ => Vec::new(),
    };
    observer(&progress(generation, used, &best, &pop));

    loop {
        if cfg.max_evaluations.is_some_and(|m| used >= m)
            || cfg.max_wall_seconds.is_some_and(|s| start.elapsed().as_secs_f64() >= s)
        {
            return Ok(finish(Status::BestEffort, &best, used, generation));
        }
        generation += 1;
        let n_off = match cfg.max_evaluations {
            Some(m) => (r.n_offsprings as u64).min(m - used) as usize,
            None => r.n_offsprings,
        };
        let mut children: Vec<Vec<f64>> = Vec::with_capacity(n_off + 1);
        while children.len() < n_off {
            let a = select(cfg.algorithm, &pop, &crowd, &mut rng);
            let b = select(cfg.algorithm, &pop, &crowd, &mut rng);
            let (mut c1, mut c2) = sbx(&pop[a].genome, &pop[b].genome, &bounds, cfg.sbx_prob, cfg.sbx_eta, &mut rng);
            pm(&mut c1, &bounds, r.pm_prob, cfg.pm_eta, &mut rng);
            pm(&mut c2, &bounds, r.pm_prob, cfg.pm_eta, &mut rng);
            children.push(c1);
            if children.len() < n_off {
                children.push(c2);
            }
        }
        let evals = mp.evaluate_batch(&children, cfg.execution);
        used += children.len() as u64;
        let offspring: Vec<Individual> = children
            .into_iter()
            .zip(evals)
            .map(|(genome, eval)| Individual { genome, eval })
            .collect();
        for ind in &offspring {
            if ind.eval.is_solution(cfg.epsilon) {
                return Ok(finish(Status::Solved, ind, used, generation));
            }
            if ind.eval.total() < best.eval.total() {
                best = ind.clone();
            }
        }

        let pool: Vec<Individual> = pop.into_iter().chain(offspring).collect();
        let objs: Vec<Vec<f64>> = pool.iter().map(|i| i.eval.objectives.clone()).collect();
        let keep = match cfg.algorithm {
            Algorithm::Ga => {
                let mut order: Vec<usize> = (0..pool.len()).collect();
                order.sort_by(|a, b| objs[*a][0].total_cmp(&objs[*b][0]).then(a.cmp(b)));
                order.truncate(r.pop_size);
                order
            }
            Algorithm::Nsga2 => {
                let (keep, cd) = nsga2_survival(&objs, r.pop_size);
                crowd = cd;
                keep
            }
            Algorithm::Nsga3 => nsga3::survival(&objs, &r.ref_dirs, r.pop_size, &mut rng),
        };
        pop = keep.into_iter().map(|i| pool[i].clone()).collect();
        observer(&progress(generation, used, &best, &pop));
    }
}

fn progress(generation: u64, evaluations: u64, best: &Individual, pop: &[Individual]) -> Progress {
    Progress {
        generation,
        evaluations,
        best_total: best.eval.total(),
        population_best_total: pop.iter().map(|i| i.eval.total()).fold(f64::INFINITY, f64::min),
    }
}

/// Rank-then-crowding truncation. Returns the kept indices together with the
/// crowding distance of each kept individual (in kept order).
fn nsga2_survival(objs: &[Vec<f64>], n_survive: usize) -> (Vec<usize>, Vec<f64>) {
    let fronts = fast_nondominated_sort(objs);
    let mut keep = Vec::new();
    let mut crowd = Vec::new();
    for front in &fronts {
        if keep.len() >= n_survive {
            break;
        }
        let pts: Vec<Vec<f64>> = front.iter().map(|i| objs[*i].clone()).collect();
        let cd = crowding_distance(&pts);
        let mut order: Vec<usize> = (0..front.len()).collect();
        if keep.len() + front.len() > n_survive {
            order.sort_by(|a, b| cd[*b].total_cmp(&cd[*a]).then(a.cmp(b)));
            order.truncate(n_survive - keep.len());
        }
        for k in order {
            keep.push(front[k]);
            crowd.push(cd[k]);
        }
    }
    (keep, crowd)
}

fn select(algorithm: Algorithm, pop: &[Individual], crowd: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let a = rng.gen_range(0..pop.len());
    let b = rng.gen_range(0..pop.len());
    match algorithm {
        Algorithm::Ga => {
            if pop[b].eval.objectives[0] < pop[a].eval.objectives[0] {
                b
            } else {
                a
            }
        }
        Algorithm::Nsga2 => {
            let (fa, fb) = (&pop[a].eval.objectives, &pop[b].eval.objectives);
            if dominates(fa, fb) {
                a
            } else if dominates(fb, fa) {
                b
            } else if crowd[a] > crowd[b] {
                a
            } else if crowd[b] > crowd[a] {
                b
            } else if rng.gen::<bool>() {
                a
            } else {
                b
            }
        }
        Algorithm::Nsga3 => {
            if rng.gen::<bool>() {
                a
            } else {
                b
            }
        }
    }
}

fn report(
    mp: &MinimizationProblem,
    cfg: &AlgoConfig,
    status: Status,
    ind: &Individual,
    used: u64,
    generations: u64,
    wall_seconds: f64,
) -> RunResult {
    let scene = mp.decode(&ind.genome);
    let ev = mp.problem.evaluator();
    let vocab = &mp.problem.vocabulary;
    let per_constraint = mp
        .constraints()
        .iter()
        .zip(&ind.eval.distances)
        .map(|(c, d)| ConstraintReport {
            constraint: describe_constraint(c, vocab, |i| scene.actors[i].id.as_str()),
            relation: vocab.name(c.relation).to_string(),
            polarity: c.polarity,
            src: scene.actors[c.src].id.clone(),
            tgt: scene.actors[c.tgt].id.clone(),
            distance: *d,
            holds: ev.holds(c, &scene.actors),
        })
        .collect();
    RunResult {
        status,
        algorithm: cfg.algorithm,
        strategy: mp.strategy,
        seed: cfg.seed,
        scene: Some(scene),
        per_constraint,
        objective_values: ind.eval.objectives.clone(),
        evaluations_used: used,
        generations,
        wall_seconds,
    }
}
