//! Acceptance checks. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use losplan::bench::experiment::{largest_component, run_on_map, ExperimentConfig, PreparedMap, RunStatus};
use losplan::bench::{
    brute_force_min_exposure, lemma1_fixture, median, sample_queries, EnumerationLimits, ExperimentRecord, MapInstance,
    MapKind,
};
use losplan::search::{
    binary_transition_cost, obj_acc, obj_bin, plan_binary, plan_exact, plan_shortest, saturation_child_counts,
    saturation_root_counts, saturation_transition_cost, BinaryParams,
};
use losplan::{Algorithm, Connectivity, Corridor, Execution, ExposureField, GridEnvironment, Heightmap, TerrainParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn criterion_1() -> Check {
    let begin = Instant::now();
    let fx = lemma1_fixture();
    let r = |text: &str| fx.regions(text).map_err(|e| e.to_string());
    let (f, h, e) = (r("F")?[0], r("H")?[0], r("E")?[0]);
    let fh = plan_exact(&fx, fx.field(), f, h, 100_000).map_err(|e| e.to_string())?;
    let fe = plan_exact(&fx, fx.field(), f, e, 100_000).map_err(|e| e.to_string())?;
    let fh_obj = obj_bin(fx.field(), fh.path.regions()).map_err(|e| e.to_string())?;
    let fe_obj = obj_bin(fx.field(), fe.path.regions()).map_err(|e| e.to_string())?;
    let fjie = obj_bin(fx.field(), &r("F,J,I,E")?).map_err(|e| e.to_string())?;
    let edh = obj_bin(fx.field(), &r("E,D,H")?).map_err(|e| e.to_string())?;
    let got = (fh_obj, fe_obj, fjie, edh);
    ensure(got == (12, 9, 11, 10), || {
        format!("objectives F→H, F→E, FJIE, EDH = {got:?}")
    })?;
    within(begin.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "F→H {} via {}, F→E {} via {}, FJIE {fjie}, EDH {edh}",
        fh_obj,
        fx.names_of(fh.path.regions().iter().copied()),
        fe_obj,
        fx.names_of(fe.path.regions().iter().copied()),
    ))
}

fn criterion_2() -> Check {
    let begin = Instant::now();
    let fx = lemma1_fixture();
    let r = |c: &str| fx.regions(c).map_err(|e| e.to_string()).map(|v| v[0]);
    let (f, h, e) = (r("F")?, r("H")?, r("E")?);
    let fh = plan_exact(&fx, fx.field(), f, h, 100_000).map_err(|e| e.to_string())?;
    let fe = plan_exact(&fx, fx.field(), f, e, 100_000).map_err(|e| e.to_string())?;
    let regions = fh.path.regions();
    let cut = regions
        .iter()
        .position(|&x| x == e)
        .ok_or_else(|| "optimal F→H path does not pass E".to_string())?;
    let prefix = obj_bin(fx.field(), &regions[..=cut]).map_err(|e| e.to_string())?;
    let best = fe.cost as usize;
    ensure(best == 9 && prefix == 11 && best < prefix, || {
        format!("optimal F→E {best}, prefix of optimal F→H {prefix}")
    })?;
    within(begin.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "optimal F→E exposes {best} < {prefix} exposed by prefix {}",
        fx.names_of(regions[..=cut].iter().copied())
    ))
}

fn random_small_grid(rng: &mut ChaCha8Rng) -> GridEnvironment {
    loop {
        let width = rng.random_range(1..=4);
        let height = rng.random_range(1..=16 / width);
        let elevations = (0..width * height)
            .map(|_| f64::from(rng.random_range(0u8..=4)))
            .collect();
        let map = Heightmap::new(width, height, 1.0, elevations).expect("dimensions are positive");
        let params = TerrainParams {
            offset: [0.5, 1.0, 2.0][rng.random_range(0..3)],
            max_step: [1.0, 2.0, f64::INFINITY][rng.random_range(0..3)],
            connectivity: if rng.random_bool(0.5) {
                Connectivity::Four
            } else {
                Connectivity::Eight
            },
        };
        let env = GridEnvironment::new(map, params).expect("parameters are valid");
        if largest_component(&env).len() == env.len() {
            return env;
        }
    }
}

fn criterion_3() -> Check {
    let begin = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let instances = 250;
    let mut total_paths_checked = 0usize;
    for k in 0..instances {
        let env = random_small_grid(&mut rng);
        let field = ExposureField::compute(&env);
        let (s, g) = (rng.random_range(0..env.len()), rng.random_range(0..env.len()));
        let exact = plan_exact(&env, &field, s, g, 10_000_000).map_err(|e| format!("instance {k}: {e}"))?;
        let oracle = brute_force_min_exposure(&env, &field, s, g, EnumerationLimits::default())
            .map_err(|e| format!("instance {k}: {e}"))?
            .ok_or_else(|| format!("instance {k}: oracle found no path"))?;
        let exact_obj = obj_bin(&field, exact.path.regions()).map_err(|e| e.to_string())?;
        ensure(exact_obj == oracle && exact.cost as usize == oracle, || {
            format!(
                "instance {k} ({}x{}, {s}→{g}): exact {exact_obj}, oracle {oracle}",
                env.width(),
                env.height()
            )
        })?;
        total_paths_checked += 1;
    }
    within(begin.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "{total_paths_checked} random grids of at most 16 regions agree"
    ))
}

const GAP_ORDER: [Algorithm; 4] = [
    Algorithm::Exact,
    Algorithm::Binary,
    Algorithm::ExposureScore,
    Algorithm::Shortest,
];

fn criterion_4() -> Check {
    let begin = Instant::now();
    let config = ExperimentConfig {
        sizes: vec![20],
        queries: 60,
        algorithms: Algorithm::ALL.to_vec(),
        taus: vec![1, 5, 50],
        budget: 2_000_000,
        query_seed: 4,
        timing: false,
        ..Default::default()
    };
    let mut records: Vec<ExperimentRecord> = Vec::new();
    let mut completed = [0usize; 2];
    for seed in 1..=4u64 {
        for (k, kind) in [MapKind::Boxes, MapKind::Hills].into_iter().enumerate() {
            let map = PreparedMap::generate(MapInstance { kind, size: 20, seed }, config.terrain(kind))
                .map_err(|e| e.to_string())?;
            let batch = run_on_map(&config, &map);
            completed[k] += batch
                .iter()
                .filter(|r| r.algorithm == Algorithm::Exact && r.status == RunStatus::Ok)
                .count();
            records.extend(batch.into_iter().map(|r| ExperimentRecord { map_seed: seed, ..r }));
        }
    }
    ensure(completed.iter().sum::<usize>() >= 100, || {
        format!("only {completed:?} exact completions")
    })?;
    if let Some(bad) = records
        .iter()
        .find(|r| r.status == RunStatus::OracleViolation || r.optimality_gap.is_some_and(|g| g < 0.0))
    {
        return Err(format!("negative gap: {bad:?}"));
    }
    let medians: Vec<f64> = GAP_ORDER
        .iter()
        .map(|&alg| {
            let gaps: Vec<f64> = records
                .iter()
                .filter(|r| r.algorithm == alg)
                .filter_map(|r| r.optimality_gap)
                .collect();
            median(&gaps).unwrap_or(f64::NAN)
        })
        .collect();
    ensure(medians.windows(2).all(|w| w[0] <= w[1]), || {
        format!("median gaps exact/binary/ess/shortest = {medians:?}")
    })?;
    within(begin.elapsed(), Duration::from_secs(1800))?;
    let means: Vec<f64> = GAP_ORDER
        .iter()
        .map(|&alg| {
            let gaps: Vec<f64> = records
                .iter()
                .filter(|r| r.algorithm == alg)
                .filter_map(|r| r.optimality_gap)
                .collect();
            gaps.iter().sum::<f64>() / gaps.len() as f64
        })
        .collect();
    Ok(format!(
        "{} boxes + {} hills completed queries; median gaps exact {:.3}, binary {:.3}, ess {:.3}, shortest {:.3}; \
         mean gaps {:.3}, {:.3}, {:.3}, {:.3}",
        completed[0],
        completed[1],
        medians[0],
        medians[1],
        medians[2],
        medians[3],
        means[0],
        means[1],
        means[2],
        means[3]
    ))
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut transitions = 0usize;
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let kind = if seed % 2 == 0 { MapKind::Boxes } else { MapKind::Hills };
        let map =
            PreparedMap::generate(MapInstance { kind, size: 12, seed }, kind.terrain()).map_err(|e| e.to_string())?;
        let (env, field) = (&map.env, &map.field);
        let n = field.len();
        for _ in 0..10 {
            let p = rng.random_range(0.01..0.999);
            let m = rng.random_range(1e-6..1.0) / n as f64;
            let mut region = largest_component(env)[0];
            let mut counts = saturation_root_counts(field, region, 1);
            let mut exposed = field.exposure_set(region).map_err(|e| e.to_string())?.clone();
            for _ in 0..10 {
                let next = env.neighbors(region)[rng.random_range(0..env.neighbors(region).len())];
                let t_sat = saturation_transition_cost(field, &counts, next, 1, p);
                let t_bin = binary_transition_cost(field, &exposed, next, m);
                let expected = -p.log10() * (t_bin - m);
                let err = relative_error(t_sat, expected);
                worst = worst.max(err);
                ensure(err <= 1e-10, || format!("t_sat {t_sat} vs {expected} (p {p}, m {m})"))?;
                transitions += 1;
                counts = saturation_child_counts(field, &counts, next, 1);
                exposed.union_with(field.exposure_set(next).map_err(|e| e.to_string())?);
                region = next;
            }
        }
    }
    ensure(transitions >= 1000, || format!("only {transitions} transitions"))?;
    Ok(format!("{transitions} transitions, worst relative error {worst:.1e}"))
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cases = 0usize;
    let mut worst: f64 = 0.0;
    for &p in &[0.5, 0.9, 0.99] {
        for &tau in &[1u32, 5, 200] {
            for _ in 0..200 {
                let len = rng.random_range(1..300);
                let counts: Vec<u32> = (0..len).map(|_| rng.random_range(0..400)).collect();
                let got = obj_acc(&counts, p, tau).map_err(|e| e.to_string())?;
                let clamped: u64 = counts.iter().map(|&c| u64::from(c.min(tau))).sum();
                let expected = -p.log10() * clamped as f64;
                let err = relative_error(got, expected);
                worst = worst.max(err);
                ensure(err <= 1e-12, || format!("p {p}, tau {tau}: {got} vs {expected}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} count vectors, worst relative error {worst:.1e}"))
}

fn criterion_7() -> Check {
    let begin = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut paths = 0usize;
    let mut walks = 0usize;
    for (kind, seed) in [
        (MapKind::Boxes, 1),
        (MapKind::Boxes, 2),
        (MapKind::Hills, 1),
        (MapKind::Hills, 2),
    ] {
        let map =
            PreparedMap::generate(MapInstance { kind, size: 50, seed }, kind.terrain()).map_err(|e| e.to_string())?;
        let (env, field) = (&map.env, &map.field);
        for (q, &(s, g)) in sample_queries(env, 30, seed * 31 + 7, None).iter().enumerate() {
            let plan = if q % 2 == 0 {
                plan_binary(env, field, s, g, BinaryParams::default())
            } else {
                plan_shortest(env, field, s, g)
            }
            .map_err(|e| e.to_string())?;
            let built = Corridor::build(field, plan.path).map_err(|e| e.to_string())?;
            let (k_set, c_set) = (&built.exposed, &built.corridor);
            for c in c_set.iter() {
                ensure(
                    field.exposure_set(c).map_err(|e| e.to_string())?.is_subset(k_set),
                    || format!("{kind:?}/{seed} query {q}: corridor region {c} sees outside K"),
                )?;
            }
            ensure(built.seed_path.regions().iter().all(|&r| c_set.contains(r)), || {
                format!("{kind:?}/{seed} query {q}: seed path leaves C")
            })?;
            for _ in 0..5 {
                let regions = built.seed_path.regions();
                let mut here = regions[rng.random_range(0..regions.len())];
                let mut walk_exposed = field.exposure_set(here).map_err(|e| e.to_string())?.clone();
                for _ in 0..200 {
                    let inside: Vec<usize> = env
                        .neighbors(here)
                        .iter()
                        .copied()
                        .filter(|&nb| c_set.contains(nb))
                        .collect();
                    if inside.is_empty() {
                        break;
                    }
                    here = inside[rng.random_range(0..inside.len())];
                    walk_exposed.union_with(field.exposure_set(here).map_err(|e| e.to_string())?);
                }
                ensure(walk_exposed.is_subset(k_set), || {
                    format!("{kind:?}/{seed} query {q}: confined walk exposed outside K")
                })?;
                walks += 1;
            }
            paths += 1;
        }
    }
    ensure(paths >= 100, || format!("only {paths} paths"))?;
    within(begin.elapsed(), Duration::from_secs(600))?;
    Ok(format!("{paths} seed paths, {walks} confined random walks"))
}

fn field_invariants(name: &str, env: Option<&GridEnvironment>, field: &ExposureField) -> Result<(), String> {
    let n = field.len();
    for i in 0..n {
        let row = field.exposure_set(i).map_err(|e| e.to_string())?;
        ensure(row.contains(i), || format!("{name}: region {i} does not see itself"))?;
        for j in row.iter() {
            ensure(field.visible(j, i), || {
                format!("{name}: {i} sees {j} but not the reverse")
            })?;
        }
    }
    if let Some(env) = env {
        let again = ExposureField::compute(env);
        ensure(&again == field, || format!("{name}: recomputation differs"))?;
        let sequential = ExposureField::compute_with(env, Execution::Sequential);
        ensure(&sequential == field, || {
            format!("{name}: sequential and parallel differ")
        })?;
    }
    let bytes = field.to_cache_bytes();
    let mut file = tempfile::tempfile().map_err(|e| e.to_string())?;
    field.write_cache(&mut file).map_err(|e| e.to_string())?;
    use std::io::{Read, Seek};
    file.rewind().map_err(|e| e.to_string())?;
    let mut on_disk = Vec::new();
    file.read_to_end(&mut on_disk).map_err(|e| e.to_string())?;
    ensure(on_disk == bytes, || {
        format!("{name}: written cache differs from in-memory bytes")
    })?;
    let loaded = ExposureField::read_cache(on_disk.as_slice()).map_err(|e| e.to_string())?;
    ensure(&loaded == field && loaded.to_cache_bytes() == bytes, || {
        format!("{name}: cache round-trip is not byte-identical")
    })
}

fn criterion_8() -> Check {
    let mut names = Vec::new();
    let fx = lemma1_fixture();
    field_invariants("lemma1 fixture", None, fx.field())?;
    names.push("fixture".to_string());
    let flat = GridEnvironment::new(
        Heightmap::flat(7, 5, 0.0).map_err(|e| e.to_string())?,
        TerrainParams::default(),
    )
    .map_err(|e| e.to_string())?;
    field_invariants("flat 7x5", Some(&flat), &ExposureField::compute(&flat))?;
    names.push("flat".to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..20 {
        let env = random_small_grid(&mut rng);
        field_invariants(&format!("random grid {k}"), Some(&env), &ExposureField::compute(&env))?;
    }
    names.push("20 random grids".to_string());
    for kind in [MapKind::Boxes, MapKind::Hills] {
        for size in [20, 50] {
            let map = PreparedMap::generate(MapInstance { kind, size, seed: 1 }, kind.terrain())
                .map_err(|e| e.to_string())?;
            field_invariants(&format!("{}{size}", kind.id()), Some(&map.env), &map.field)?;
            names.push(format!("{}{size}", kind.id()));
        }
    }
    Ok(format!(
        "reflexive, symmetric, deterministic, byte-identical cache on {}",
        names.join(", ")
    ))
}

fn median_ratio(records: &[ExperimentRecord], alg: Algorithm) -> f64 {
    let ratios: Vec<f64> = records
        .iter()
        .filter(|r| r.algorithm == alg && matches!(r.status, RunStatus::Ok | RunStatus::BudgetExceeded))
        .filter_map(|r| r.runtime_ratio)
        .collect();
    median(&ratios).unwrap_or(f64::NAN)
}

fn criterion_9() -> Check {
    let config = ExperimentConfig {
        sizes: vec![50],
        queries: 12,
        algorithms: vec![
            Algorithm::Shortest,
            Algorithm::ExposureScore,
            Algorithm::Binary,
            Algorithm::Exact,
        ],
        budget: 200_000,
        query_seed: 9,
        timing: true,
        ..Default::default()
    };
    let mut records = Vec::new();
    for kind in [MapKind::Boxes, MapKind::Hills] {
        for seed in 1..=2u64 {
            let map = PreparedMap::generate(MapInstance { kind, size: 50, seed }, config.terrain(kind))
                .map_err(|e| e.to_string())?;
            records.extend(run_on_map(&config, &map));
        }
    }
    let ess = median_ratio(&records, Algorithm::ExposureScore);
    let binary = median_ratio(&records, Algorithm::Binary);
    let exact = median_ratio(&records, Algorithm::Exact);
    let capped = records
        .iter()
        .filter(|r| r.algorithm == Algorithm::Exact && r.status == RunStatus::BudgetExceeded)
        .count();
    let expansions = |alg: Algorithm| {
        let counts: Vec<f64> = records
            .iter()
            .filter(|r| r.algorithm == alg)
            .filter_map(|r| r.expanded)
            .map(|e| e as f64)
            .collect();
        median(&counts).unwrap_or(f64::NAN)
    };
    let detail = format!(
        "median runtime ratios ess {ess:.2}, binary {binary:.2}, exact {exact:.2} ({capped} exact runs hit the budget); \
         median expansions shortest {:.0}, ess {:.0}, binary {:.0}",
        expansions(Algorithm::Shortest),
        expansions(Algorithm::ExposureScore),
        expansions(Algorithm::Binary),
    );
    ensure(ess <= 10.0 && binary > 1.0 && exact > binary, || detail.clone())?;
    Ok(detail)
}

fn criterion_10() -> Check {
    let config = ExperimentConfig {
        sizes: vec![50],
        queries: 40,
        algorithms: vec![
            Algorithm::Shortest,
            Algorithm::ExposureScore,
            Algorithm::Binary,
            Algorithm::Saturation,
        ],
        query_seed: 10,
        timing: false,
        ..Default::default()
    };
    let mut all: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut binary: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (k, kind) in [MapKind::Boxes, MapKind::Hills].into_iter().enumerate() {
        for seed in 1..=3u64 {
            let map = PreparedMap::generate(MapInstance { kind, size: 50, seed }, config.terrain(kind))
                .map_err(|e| e.to_string())?;
            for r in run_on_map(&config, &map).iter().filter(|r| r.status == RunStatus::Ok) {
                let width = r.avg_width.ok_or_else(|| format!("record without width: {r:?}"))?;
                all[k].push(width);
                if r.algorithm == Algorithm::Binary {
                    binary[k].push(width);
                }
            }
        }
    }
    ensure(all[0].len() == all[1].len(), || {
        format!("unmatched query sets: {} vs {}", all[0].len(), all[1].len())
    })?;
    let m = |v: &[f64]| median(v).unwrap_or(f64::NAN);
    let (boxes, hills) = (m(&all[0]), m(&all[1]));
    let detail = format!(
        "median corridor width boxes {boxes:.2} vs hills {hills:.2} over {} paths each (binary paths only: {:.2} vs {:.2})",
        all[0].len(),
        m(&binary[0]),
        m(&binary[1]),
    );
    ensure(boxes > hills, || detail.clone())?;
    Ok(detail)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "fixture optima and sub-path counts", criterion_1),
        (2, "optimal paths need not have optimal sub-paths", criterion_2),
        (3, "exact planner matches brute force", criterion_3),
        (4, "optimality gap sanity and ordering", criterion_4),
        (5, "saturation at tau 1 tracks binary cost", criterion_5),
        (6, "accumulative objective identity", criterion_6),
        (7, "corridor guarantees", criterion_7),
        (8, "exposure field invariants", criterion_8),
        (9, "runtime ratio ordering", criterion_9),
        (10, "corridor width boxes over hills", criterion_10),
    ];
    let only: Option<u32> = std::env::var("LOSPLAN_CRITERION").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (id, name, check) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let begin = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = begin.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {id}: {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {id}: {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
