//! `losplan`: generate terrain, precompute exposure fields, plan low-exposure
//! paths, extract equal-exposure corridors and run benchmark batches.

mod cache;
mod render;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use losplan::bench::experiment::{run_on_map, write_jsonl, ExperimentConfig, PreparedMap};
use losplan::bench::{lemma1_fixture, summarize, write_summary_csv, FixtureGraph, MapKind};
use losplan::search::{BinaryParams, PlanRecord, SaturationParams, DEFAULT_P_SUCCESS};
use losplan::{
    Algorithm, BenchError, Connectivity, Corridor, ExposureField, GridEnvironment, Heightmap, Path, PlannerSpec,
    SearchError, TerrainParams,
};
use serde_json::{json, Value};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NO_PATH: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "losplan", version, about = "Line-of-sight exposure minimizing path planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark heightmap.
    Gen {
        #[arg(value_parser = parse_map_kind)]
        kind: MapKind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        size: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Compute the exposure field of a map and cache it beside the map.
    Field {
        map: PathBuf,
        #[command(flatten)]
        terrain: TerrainArgs,
        /// Write the field here instead of the content-keyed cache path.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Plan a path and print its record as JSON.
    Plan {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = parse_algorithm)]
        alg: Algorithm,
        /// `row,col` on a map, or a position name on a fixture.
        #[arg(long)]
        start: String,
        #[arg(long)]
        goal: String,
        #[command(flatten)]
        planner: PlannerArgs,
    },
    /// Exposed set and equal-exposure corridor of a path.
    Corridor {
        #[command(flatten)]
        source: Source,
        /// Cells as `row,col;row,col;...`, or names as `F,J,I` on a fixture.
        #[arg(long, required_unless_present = "path_file", conflicts_with = "path_file")]
        path: Option<String>,
        #[arg(long)]
        path_file: Option<PathBuf>,
        /// Keep only corridor regions reachable from the path inside the corridor.
        #[arg(long)]
        reachable: bool,
        /// Also write a PGM overlay of the path and corridor.
        #[arg(long)]
        render: Option<PathBuf>,
    },
    /// Render exposure scores as a PGM image; darker pixels are more exposed,
    /// path cells are black and corridor cells white.
    Render {
        map: PathBuf,
        #[command(flatten)]
        terrain: TerrainArgs,
        /// Exposure field cache to use instead of the content-keyed one.
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long)]
        path: Option<String>,
        /// Overlay the corridor of `--path`.
        #[arg(long, requires = "path")]
        corridor: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run a benchmark batch from a `key = value` config file.
    Experiment {
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Worker threads for untimed batches.
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args)]
struct TerrainArgs {
    /// Observer height above the ground.
    #[arg(long, default_value_t = 1.0)]
    offset: f64,
    /// Largest climbable elevation step.
    #[arg(long, default_value_t = f64::INFINITY)]
    max_step: f64,
    #[arg(long, default_value = "4", value_parser = parse_connectivity)]
    connectivity: Connectivity,
}

impl TerrainArgs {
    fn params(&self) -> TerrainParams {
        TerrainParams {
            offset: self.offset,
            max_step: self.max_step,
            connectivity: self.connectivity,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureName {
    Lemma1,
}

#[derive(Args)]
struct Source {
    /// Heightmap file.
    #[arg(required_unless_present = "fixture")]
    map: Option<PathBuf>,
    /// Built-in fixture instead of a map.
    #[arg(long, conflicts_with = "map")]
    fixture: Option<FixtureName>,
    #[command(flatten)]
    terrain: TerrainArgs,
    /// Recompute the exposure field without touching the cache.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Args)]
struct PlannerArgs {
    /// Saturation threshold.
    #[arg(long, default_value_t = 1)]
    tau: u32,
    #[arg(long, default_value_t = DEFAULT_P_SUCCESS)]
    p_success: f64,
    /// Binary movement cost; defaults to 1/(2n).
    #[arg(long)]
    m: Option<f64>,
    /// Expansion budget of the exact planner.
    #[arg(long, default_value_t = 5_000_000)]
    budget: usize,
}

impl PlannerArgs {
    fn spec(&self, alg: Algorithm) -> PlannerSpec {
        match alg {
            Algorithm::Shortest => PlannerSpec::Shortest,
            Algorithm::ExposureScore => PlannerSpec::ExposureScore,
            Algorithm::Binary => PlannerSpec::Binary(BinaryParams { movement_cost: self.m }),
            Algorithm::Saturation => PlannerSpec::Saturation(SaturationParams {
                tau: self.tau,
                p_success: self.p_success,
            }),
            Algorithm::Exact => PlannerSpec::Exact { budget: self.budget },
        }
    }
}

fn parse_map_kind(s: &str) -> Result<MapKind, String> {
    s.parse()
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: SearchError| e.to_string())
}

fn parse_connectivity(s: &str) -> Result<Connectivity, String> {
    s.parse().map_err(|e: losplan::TerrainError| e.to_string())
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_FAILURE,
            error,
        }
    }
}

impl From<SearchError> for Failure {
    fn from(error: SearchError) -> Self {
        let code = match error {
            SearchError::NoPath { .. } => EXIT_NO_PATH,
            SearchError::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            error: error.into(),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(error: BenchError) -> Self {
        match error {
            BenchError::Config { .. } => Failure::usage(error),
            BenchError::Search(e) => e.into(),
            other => anyhow::Error::from(other).into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// A map with its exposure field, or a built-in fixture.
enum World {
    Grid { env: GridEnvironment, field: ExposureField },
    Fixture(FixtureGraph),
}

fn load_map(path: &FsPath, params: TerrainParams) -> Result<(GridEnvironment, Vec<u8>), Failure> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).with_context(|| format!("{} is not UTF-8 text", path.display()))?;
    let map = Heightmap::parse(text).with_context(|| format!("parsing {}", path.display()))?;
    let env = GridEnvironment::new(map, params).map_err(Failure::usage)?;
    Ok((env, bytes))
}

fn load_world(source: &Source) -> Result<World, Failure> {
    if let Some(FixtureName::Lemma1) = source.fixture {
        return Ok(World::Fixture(lemma1_fixture()));
    }
    let path = source
        .map
        .as_deref()
        .ok_or_else(|| Failure::usage(anyhow!("no map given")))?;
    let (env, bytes) = load_map(path, source.terrain.params())?;
    let field = if source.no_cache {
        ExposureField::compute(&env)
    } else {
        cache::load_or_compute(path, &bytes, &env)?.0
    };
    Ok(World::Grid { env, field })
}

fn parse_cell(env: &GridEnvironment, text: &str) -> Result<usize, Failure> {
    let bad = || Failure::usage(anyhow!("expected `row,col`, got {text:?}"));
    let (r, c) = text.trim().split_once(',').ok_or_else(bad)?;
    let row: usize = r.trim().parse().map_err(|_| bad())?;
    let col: usize = c.trim().parse().map_err(|_| bad())?;
    env.index(row, col).map_err(Failure::usage)
}

impl World {
    fn field(&self) -> &ExposureField {
        match self {
            World::Grid { field, .. } => field,
            World::Fixture(fx) => fx.field(),
        }
    }

    fn region(&self, text: &str) -> Result<usize, Failure> {
        match self {
            World::Grid { env, .. } => parse_cell(env, text),
            World::Fixture(fx) => {
                let regions = fx.regions(text)?;
                match regions.as_slice() {
                    [r] => Ok(*r),
                    _ => Err(Failure::usage(anyhow!("expected one position name, got {text:?}"))),
                }
            }
        }
    }

    fn path(&self, text: &str) -> Result<Path, Failure> {
        match self {
            World::Grid { env, .. } => {
                let cells = text
                    .split(|c: char| c == ';' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| parse_cell(env, t))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Path::new(env, cells)?)
            }
            World::Fixture(fx) => Ok(fx.path(text)?),
        }
    }

    fn label(&self, region: usize) -> Value {
        match self {
            World::Grid { env, .. } => {
                let (r, c) = env.cell(region);
                json!([r, c])
            }
            World::Fixture(fx) => json!(fx.name(region).to_string()),
        }
    }

    fn labels(&self, regions: impl IntoIterator<Item = usize>) -> Value {
        Value::Array(regions.into_iter().map(|r| self.label(r)).collect())
    }

    fn plan(&self, spec: &PlannerSpec, start: usize, goal: usize) -> Result<losplan::Plan, SearchError> {
        match self {
            World::Grid { env, field } => spec.plan(env, field, start, goal),
            World::Fixture(fx) => spec.plan(fx, fx.field(), start, goal),
        }
    }

    fn corridor(&self, path: Path, reachable: bool) -> Result<Corridor, SearchError> {
        match (self, reachable) {
            (_, false) => Corridor::build(self.field(), path),
            (World::Grid { env, field }, true) => Corridor::build_reachable(env, field, path),
            (World::Fixture(fx), true) => Corridor::build_reachable(fx, fx.field(), path),
        }
    }
}

fn print_json(value: &Value) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).context("writing output")?;
    writeln!(out).context("writing output")?;
    Ok(())
}

fn write_image(path: &FsPath, env: &GridEnvironment, pixels: &[u8]) -> Result<(), Failure> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    render::write_pgm(BufWriter::new(file), env.width(), env.height(), pixels)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_gen(kind: MapKind, seed: u64, size: usize, out: &FsPath) -> CmdResult {
    let map = kind.generate(seed, size).map_err(|e| match e {
        BenchError::TooSmall(_) => Failure::usage(e),
        other => Failure::from(other),
    })?;
    fs::write(out, map.to_text()).with_context(|| format!("writing {}", out.display()))?;
    print_json(&json!({
        "map": out,
        "kind": kind,
        "seed": seed,
        "width": map.width(),
        "height": map.height(),
    }))
}

fn cmd_field(map: &FsPath, terrain: &TerrainArgs, out: Option<&FsPath>) -> CmdResult {
    let (env, bytes) = load_map(map, terrain.params())?;
    let begin = Instant::now();
    let (field, path, cached) = match out {
        Some(out) => {
            let field = ExposureField::compute(&env);
            cache::write_field(out, &field)?;
            (field, out.to_path_buf(), false)
        }
        None => cache::load_or_compute(map, &bytes, &env)?,
    };
    let scores = field.exposure_scores();
    print_json(&json!({
        "cache": path,
        "cached": cached,
        "regions": field.len(),
        "mean_exposure_score": scores.iter().sum::<f64>() / scores.len() as f64,
        "min_exposure_score": field.min_exposure_score(),
        "seconds": begin.elapsed().as_secs_f64(),
    }))
}

fn cmd_plan(source: &Source, alg: Algorithm, start: &str, goal: &str, planner: &PlannerArgs) -> CmdResult {
    let world = load_world(source)?;
    let (s, g) = (world.region(start)?, world.region(goal)?);
    let spec = planner.spec(alg);
    let begin = Instant::now();
    let plan = world.plan(&spec, s, g)?;
    let record = PlanRecord::new(world.field(), &spec, &plan, begin.elapsed())?;
    let mut value = serde_json::to_value(&record).context("serializing record")?;
    value["cost"] = json!(plan.cost);
    value["cells"] = world.labels(record.path.iter().copied());
    print_json(&value)
}

fn cmd_corridor(
    source: &Source,
    path: Option<&str>,
    path_file: Option<&FsPath>,
    reachable: bool,
    render_to: Option<&FsPath>,
) -> CmdResult {
    let world = load_world(source)?;
    let text = match (path, path_file) {
        (Some(p), _) => p.to_string(),
        (None, Some(file)) => fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?,
        (None, None) => return Err(Failure::usage(anyhow!("no path given"))),
    };
    let seed = world.path(&text)?;
    let corridor = world.corridor(seed, reachable)?;
    if let Some(out) = render_to {
        match &world {
            World::Grid { env, field } => {
                let pixels = render::render_pixels(field, Some(corridor.seed_path.regions()), Some(&corridor.corridor));
                write_image(out, env, &pixels)?;
            }
            World::Fixture(_) => return Err(Failure::usage(anyhow!("fixtures cannot be rendered"))),
        }
    }
    let mut value = serde_json::to_value(corridor.record()).context("serializing corridor")?;
    value["exposed_count"] = json!(corridor.exposed.count());
    value["corridor_count"] = json!(corridor.corridor.count());
    value["seed_cells"] = world.labels(corridor.seed_path.regions().iter().copied());
    value["exposed_cells"] = world.labels(corridor.exposed.iter());
    value["corridor_cells"] = world.labels(corridor.corridor.iter());
    print_json(&value)
}

fn cmd_render(
    map: &FsPath,
    terrain: &TerrainArgs,
    field_path: Option<&FsPath>,
    path: Option<&str>,
    with_corridor: bool,
    out: &FsPath,
) -> CmdResult {
    let (env, bytes) = load_map(map, terrain.params())?;
    let field = match field_path {
        Some(p) => cache::read_field(p, &env).map_err(Failure::usage)?,
        None => cache::load_or_compute(map, &bytes, &env)?.0,
    };
    let world = World::Grid { env, field };
    let seed = path.map(|p| world.path(p)).transpose()?;
    let corridor = match (&seed, with_corridor) {
        (Some(seed), true) => Some(Corridor::build(world.field(), seed.clone())?.corridor),
        _ => None,
    };
    let World::Grid { env, field } = &world else {
        unreachable!("render always loads a grid")
    };
    let pixels = render::render_pixels(field, seed.as_ref().map(|p| p.regions()), corridor.as_ref());
    write_image(out, env, &pixels)?;
    print_json(&json!({ "image": out, "width": env.width(), "height": env.height() }))
}

fn cmd_experiment(config_path: &FsPath, out_dir: &FsPath, workers: Option<usize>) -> CmdResult {
    let text = fs::read_to_string(config_path).with_context(|| format!("reading {}", config_path.display()))?;
    let config = ExperimentConfig::parse(&text)?;
    if let Some(n) = workers {
        set_workers(n)?;
    }
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut records = Vec::new();
    let instances = config.instances();
    for (i, instance) in instances.iter().enumerate() {
        let begin = Instant::now();
        let map = PreparedMap::generate(*instance, config.terrain(instance.kind))?;
        let batch = run_on_map(&config, &map);
        eprintln!(
            "[{}/{}] {} size {} seed {}: {} records in {:.1}s",
            i + 1,
            instances.len(),
            instance.kind.id(),
            instance.size,
            instance.seed,
            batch.len(),
            begin.elapsed().as_secs_f64()
        );
        records.extend(batch);
    }
    let jsonl = out_dir.join("records.jsonl");
    let csv = out_dir.join("summary.csv");
    let file = File::create(&jsonl).with_context(|| format!("creating {}", jsonl.display()))?;
    write_jsonl(&records, BufWriter::new(file))?;
    let file = File::create(&csv).with_context(|| format!("creating {}", csv.display()))?;
    write_summary_csv(&summarize(&records), BufWriter::new(file))?;
    print_json(&json!({ "records": records.len(), "jsonl": jsonl, "summary": csv }))
}

#[cfg(feature = "parallel")]
fn set_workers(n: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::usage(anyhow!("--workers must be positive")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring worker pool")?;
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn set_workers(n: usize) -> Result<(), Failure> {
    if n != 1 {
        eprintln!("built without parallel support; ignoring --workers {n}");
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match &cli.command {
        Command::Gen { kind, seed, size, out } => cmd_gen(*kind, *seed, *size, out),
        Command::Field { map, terrain, out } => cmd_field(map, terrain, out.as_deref()),
        Command::Plan {
            source,
            alg,
            start,
            goal,
            planner,
        } => cmd_plan(source, *alg, start, goal, planner),
        Command::Corridor {
            source,
            path,
            path_file,
            reachable,
            render,
        } => cmd_corridor(
            source,
            path.as_deref(),
            path_file.as_deref(),
            *reachable,
            render.as_deref(),
        ),
        Command::Render {
            map,
            terrain,
            field,
            path,
            corridor,
            out,
        } => cmd_render(map, terrain, field.as_deref(), path.as_deref(), *corridor, out),
        Command::Experiment { config, out, workers } => cmd_experiment(config, out, *workers),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
