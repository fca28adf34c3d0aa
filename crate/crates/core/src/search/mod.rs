//! Metaheuristic search for concrete scenes.

pub mod nsga3;
pub mod operators;
pub mod problem;
pub mod run;
pub mod sorting;

pub use problem::{
    build_problem, estimate_search_space_exponent, Evaluation, HeadingMode, MinimizationProblem, ObjectiveGroup,
    ProblemError, Strategy, Variable,
};
pub use run::{run, run_observed, AlgoConfig, Algorithm, ConfigError, ConstraintReport, Progress, RunResult, Status};
