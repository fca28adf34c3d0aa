use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use scenegen_core::fss::{self, FormatOptions};
use scenegen_core::mapping::{fun_to_log, log_to_fun, ConcreteScene, MappingConfig};
use scenegen_core::par::Execution;
use scenegen_core::render::{render_svg, RenderOptions};
use scenegen_core::roadmap::RoadMap;
use scenegen_core::search::{build_problem, run, AlgoConfig, Algorithm, HeadingMode, RunResult, Status, Strategy};
use scenegen_core::workbench::{self, generate_fss, GenSpec};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_INCONSISTENT: u8 = 2;
const EXIT_BEST_EFFORT: u8 = 3;

#[derive(Parser)]
#[command(name = "scenegen", version, about = "Check, concretize and render abstract traffic scenes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report inconsistencies in a scene specification.
    Check { fss: PathBuf },
    /// Search for a concrete scene satisfying a specification.
    Concretize(ConcretizeArgs),
    /// Print the specification a concrete scene satisfies.
    Abstract(SceneArgs),
    /// Draw a concrete scene as SVG.
    Render {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long)]
        out: PathBuf,
        /// Draw field-of-view sectors.
        #[arg(long)]
        show_fov: bool,
        /// Label actors with their ids.
        #[arg(long)]
        show_ids: bool,
    },
    /// Generate a random specification together with a witness scene.
    Gen {
        #[arg(long)]
        actors: usize,
        #[arg(long, default_value = "cross")]
        map: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Upper bound on pairwise actor distances in the witness.
        #[arg(long, default_value_t = 50.0)]
        r: f64,
        #[arg(long)]
        params: Option<PathBuf>,
        /// Output prefix; writes `<out>.fss` and `<out>.scene.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark matrix and write one CSV row per run.
    Bench {
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run cases one after another.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Args)]
struct ConcretizeArgs {
    fss: PathBuf,
    /// Bundled map name or path to a map file.
    #[arg(long)]
    map: String,
    #[arg(long, default_value = "nsga2")]
    algo: Algorithm,
    #[arg(long, default_value = "a")]
    agg: Strategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = scenegen_core::search::run::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long)]
    max_evals: Option<u64>,
    #[arg(long)]
    timeout_s: Option<f64>,
    #[arg(long, default_value = "lane")]
    heading: HeadingMode,
    #[arg(long)]
    params: Option<PathBuf>,
    /// Scene output; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the full run result as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SceneArgs {
    scene: PathBuf,
    /// Map override; defaults to the map named in the scene.
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    params: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Check { fss } => check(&fss),
        Command::Concretize(args) => concretize(&args),
        Command::Abstract(args) => abstract_scene(&args),
        Command::Render {
            scene,
            out,
            show_fov,
            show_ids,
        } => render(&scene, &out, RenderOptions { fov: show_fov, labels: show_ids }),
        Command::Gen {
            actors,
            map,
            seed,
            r,
            params,
            out,
        } => gen(actors, &map, seed, r, params.as_deref(), &out),
        Command::Bench { matrix, out, sequential } => bench(&matrix, &out, sequential),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_doc(path: &Path) -> Result<fss::FssDocument> {
    let text = read_text(path)?;
    fss::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_map(spec: &str) -> Result<(String, RoadMap)> {
    workbench::load_map(spec, Path::new(".")).with_context(|| format!("loading map {spec}"))
}

fn load_params(path: Option<&Path>) -> Result<MappingConfig> {
    match path {
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            MappingConfig::from_json(&bytes).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(MappingConfig::default()),
    }
}

fn check(path: &Path) -> Result<u8> {
    let doc = load_doc(path)?;
    let (closed, _) = fss::build_model(&doc).apply_validity_rules(&[]);
    let diags = closed.find_inconsistencies();
    if diags.is_empty() {
        println!("{}: consistent", path.display());
        return Ok(EXIT_OK);
    }
    for d in &diags {
        eprint!("{}: {d}", path.display());
    }
    Ok(EXIT_INCONSISTENT)
}

fn concretize(args: &ConcretizeArgs) -> Result<u8> {
    let doc = load_doc(&args.fss)?;
    let (closed, _) = fss::build_model(&doc).apply_validity_rules(&[]);
    let diags = closed.find_inconsistencies();
    if !diags.is_empty() {
        for d in &diags {
            eprint!("{}: {d}", args.fss.display());
        }
        if let Some(p) = &args.report {
            write(p, &RunResult::static_error(args.algo, args.agg, args.seed).to_json())?;
        }
        return Ok(EXIT_INCONSISTENT);
    }
    let (map_name, map) = load_map(&args.map)?;
    let cfg = load_params(args.params.as_deref())?;
    let problem = fun_to_log(&closed, &map_name, Arc::new(map), &cfg.dims, &cfg.params)?;
    // no constraints leaves nothing to group; a single objective still runs
    let strategy = if problem.constraints.is_empty() { Strategy::Global } else { args.agg };
    let mp = build_problem(problem, strategy, args.heading)?;
    let mut algo = AlgoConfig::new(args.algo).with_seed(args.seed);
    algo.epsilon = args.epsilon;
    if args.max_evals.is_some() {
        algo.max_evaluations = args.max_evals;
    }
    if args.timeout_s.is_some() {
        algo.max_wall_seconds = args.timeout_s;
    }
    let result = run(&mp, &algo)?;
    for c in &result.per_constraint {
        let mark = if c.holds { "ok" } else { "--" };
        eprintln!("{mark} {:<28} {:.6}", c.constraint, c.distance);
    }
    eprintln!(
        "{}: {} evaluations, {} generations, total distance {:.6}",
        result.status,
        result.evaluations_used,
        result.generations,
        result.total_distance()
    );
    if let Some(p) = &args.report {
        write(p, &result.to_json())?;
    }
    let scene = result.scene.as_ref().context("search returned no scene")?;
    match &args.out {
        Some(p) => write(p, &scene.to_json())?,
        None => println!("{}", scene.to_json()),
    }
    Ok(match result.status {
        Status::Solved => EXIT_OK,
        Status::BestEffort => EXIT_BEST_EFFORT,
        Status::StaticError => EXIT_INCONSISTENT,
    })
}

fn load_scene(args: &SceneArgs) -> Result<(ConcreteScene, RoadMap, MappingConfig)> {
    let bytes = fs::read(&args.scene).with_context(|| format!("reading {}", args.scene.display()))?;
    let scene = ConcreteScene::from_json(&bytes).with_context(|| format!("parsing {}", args.scene.display()))?;
    let spec = args.map.clone().unwrap_or_else(|| scene.map.clone());
    if spec.is_empty() {
        bail!("scene names no map; pass --map");
    }
    let (_, map) = load_map(&spec)?;
    Ok((scene, map, load_params(args.params.as_deref())?))
}

fn abstract_scene(args: &SceneArgs) -> Result<u8> {
    let (scene, map, cfg) = load_scene(args)?;
    let vocab = scenegen_core::logic::Vocabulary::builtin();
    let ev = scenegen_core::mapping::Evaluator::new(&cfg.params, &map, &vocab);
    let model = log_to_fun(&scene, &ev)?;
    print!("{}", fss::format_with(&model, FormatOptions { omit_implied: true }));
    Ok(EXIT_OK)
}

fn render(args: &SceneArgs, out: &Path, opts: RenderOptions) -> Result<u8> {
    let (scene, map, cfg) = load_scene(args)?;
    write(out, &render_svg(&scene, &map, &cfg.params, opts))?;
    Ok(EXIT_OK)
}

fn gen(actors: usize, map: &str, seed: u64, r: f64, params: Option<&Path>, out: &Path) -> Result<u8> {
    let (name, m) = load_map(map)?;
    let mut spec = GenSpec::new(actors, &name, Arc::new(m), seed);
    spec.max_pair_distance = r;
    spec.mapping = load_params(params)?;
    let (doc, witness) = generate_fss(&spec)?;
    let fss_path = out.with_extension("fss");
    let scene_path = out.with_extension("scene.json");
    write(&fss_path, &fss::format(&fss::build_model(&doc)))?;
    write(&scene_path, &witness.to_json())?;
    println!("{}\n{}", fss_path.display(), scene_path.display());
    Ok(EXIT_OK)
}

fn bench(matrix: &Path, out: &Path, sequential: bool) -> Result<u8> {
    let m = workbench::load_matrix(matrix)?;
    let execution = if sequential { Execution::Sequential } else { Execution::Parallel };
    let rows = m.run(execution);
    let file = fs::File::create(out).with_context(|| format!("writing {}", out.display()))?;
    workbench::write_csv(&rows, std::io::BufWriter::new(file))?;
    let solved = rows.iter().filter(|r| r.status == Status::Solved).count();
    eprintln!("{} runs, {} solved", rows.len(), solved);
    Ok(EXIT_OK)
}
