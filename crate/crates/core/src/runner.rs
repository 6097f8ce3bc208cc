//! Batch orchestration: enumerate, construct, simulate and evaluate every
//! (design, scenario, replication) cell, with a resumable progress journal.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design_space::{deduplicate, enumerate, DesignConfiguration, DesignSpace, DesignSpaceFile};
use crate::error::{Error, Result};
use crate::evaluator::{first_meeting, pareto, rank_weighted, score, KpiVector, SimulationResult, Thresholds};
use crate::kernel::{derive_seed, mix64};
use crate::model::{scenario_violations, PlantModel, TraceRow};
use crate::scenario::{Scenario, WeightSource};

pub const RESULTS_FILE: &str = "results.csv";
pub const PARETO_FILE: &str = "pareto.json";
pub const PLOT_FILE: &str = "plot.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const JOURNAL_FILE: &str = "journal.jsonl";

/// Environment variable holding the default worker count.
pub const JOBS_ENV: &str = "FLOWDSE_JOBS";

/// Designs evaluated between stop-condition checks.
const CHUNK_DESIGNS: usize = 32;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum StopCondition {
    #[default]
    None,
    /// Halt after the first design (in enumeration order) meeting every threshold.
    FirstMeeting(Thresholds),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub space: PathBuf,
    pub scenarios: Vec<PathBuf>,
    pub seed: u64,
    pub replications: u32,
    pub jobs: usize,
    pub dedup: bool,
    pub stop: StopCondition,
    /// Post-Pareto minimum requirements, reported but not used to prune.
    pub minimum: Option<Thresholds>,
    /// Post-Pareto weighted-sum ranking, one weight per scenario.
    pub weights: Option<Vec<f64>>,
    pub clamp: bool,
    pub out_dir: PathBuf,
}

impl RunPlan {
    pub fn new(space: impl Into<PathBuf>, scenarios: Vec<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            space: space.into(),
            scenarios,
            seed: 0,
            replications: 1,
            jobs: default_jobs(),
            dedup: false,
            stop: StopCondition::None,
            minimum: None,
            weights: None,
            clamp: true,
            out_dir: out_dir.into(),
        }
    }
}

/// Worker count from the environment, else the number of CPUs.
pub fn default_jobs() -> usize {
    std::env::var(JOBS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Seed for one cell. The design index is deliberately not mixed in, so every
/// design faces the same fillet stream in a given (scenario, replication).
pub fn cell_seed(base: u64, _design: usize, scenario: usize, replication: u32) -> u64 {
    derive_seed(base, &[scenario as u64, replication as u64])
}

/// Parses `SCEN=VALUE` pairs into one value per scenario; unnamed scenarios
/// get `fill`.
pub fn per_scenario(pairs: &[String], scenarios: &[Scenario], fill: f64, what: &str) -> Result<Vec<f64>> {
    let mut out = vec![fill; scenarios.len()];
    for pair in pairs {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::invalid(what, pair, "expected SCENARIO=VALUE"))?;
        let idx = scenarios
            .iter()
            .position(|s| s.id == name)
            .ok_or_else(|| Error::invalid(what, pair, format!("unknown scenario id {name:?}")))?;
        out[idx] = value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::invalid(what, pair, format!("not a number: {value:?}")))?;
    }
    Ok(out)
}

/// Loaded, cross-checked inputs.
#[derive(Debug)]
pub struct Inputs {
    pub space: DesignSpace,
    pub scenarios: Vec<Scenario>,
    space_text: String,
}

impl Inputs {
    pub fn load(space: &Path, scenarios: &[PathBuf]) -> Result<Self> {
        let space_text = fs::read_to_string(space).map_err(|e| Error::read(space, e))?;
        let space = DesignSpace::load(space)?;
        let scenarios = scenarios
            .iter()
            .map(Scenario::load)
            .collect::<Result<Vec<_>>>()?;
        for (i, s) in scenarios.iter().enumerate() {
            if scenarios[..i].iter().any(|p| p.id == s.id) {
                return Err(Error::invalid(&s.id, "id", "duplicate scenario id"));
            }
            if let Some(v) = scenario_violations(&space, s).into_iter().next() {
                return Err(Error::invalid(&s.id, "scenario", v));
            }
        }
        Ok(Self {
            space,
            scenarios,
            space_text,
        })
    }
}

/// A design to evaluate: its representative configuration and every
/// enumeration index it stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub index: usize,
    pub config: DesignConfiguration,
    pub members: Vec<usize>,
}

pub fn designs(space: &DesignSpace, dedup: bool) -> Vec<Design> {
    if dedup {
        deduplicate(space, enumerate(space))
            .into_iter()
            .map(|c| Design {
                index: c.index,
                config: c.representative,
                members: c.members,
            })
            .collect()
    } else {
        enumerate(space)
            .enumerate()
            .map(|(index, config)| Design {
                index,
                config,
                members: vec![index],
            })
            .collect()
    }
}

type CellKey = (usize, usize, u32);

fn fnv(bytes: &[u8], mut h: u64) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Identifies everything that determines cell results.
fn fingerprint(plan: &RunPlan, inputs: &Inputs) -> String {
    let mut h = 0xcbf2_9ce4_8422_2325;
    h = fnv(inputs.space_text.as_bytes(), h);
    for s in &inputs.scenarios {
        h = fnv(s.to_json().as_bytes(), h);
        for lane in &s.inflow {
            if let WeightSource::Empirical { samples, .. } = &lane.weights {
                for w in samples.iter() {
                    h = fnv(&w.to_bits().to_le_bytes(), h);
                }
            }
        }
    }
    let settings = format!("{}|{}|{}|{}", plan.seed, plan.replications, plan.dedup, plan.clamp);
    h = fnv(settings.as_bytes(), h);
    format!("{:016x}", mix64(h))
}

#[derive(Debug, Serialize, Deserialize)]
struct JournalHeader {
    fingerprint: String,
}

struct Journal {
    writer: BufWriter<File>,
    path: PathBuf,
}

impl Journal {
    /// Opens the journal, returning results already recorded for this plan.
    fn open(path: &Path, fingerprint: &str) -> Result<(Self, Vec<SimulationResult>)> {
        let mut done = Vec::new();
        let mut valid_lines = Vec::new();
        if path.exists() {
            let file = File::open(path).map_err(|e| Error::read(path, e))?;
            let lines: Vec<String> = BufReader::new(file)
                .lines()
                .collect::<std::io::Result<_>>()
                .map_err(|e| Error::read(path, e))?;
            let ctx = path.display().to_string();
            if let Some(first) = lines.first() {
                let header: JournalHeader = serde_json::from_str(first)
                    .map_err(|_| Error::invalid(&ctx, "line 1", "not a journal header"))?;
                if header.fingerprint != fingerprint {
                    return Err(Error::invalid(
                        &ctx,
                        "fingerprint",
                        "journal was written for different inputs or settings; use a fresh output directory",
                    ));
                }
                for (i, line) in lines.iter().enumerate().skip(1) {
                    match serde_json::from_str::<SimulationResult>(line) {
                        Ok(r) => {
                            done.push(r);
                            valid_lines.push(line.clone());
                        }
                        // an interrupted write leaves at most one partial line at the end
                        Err(_) if i + 1 == lines.len() => warn!("{ctx}: ignoring truncated last line"),
                        Err(e) => return Err(Error::invalid(&ctx, format!("line {}", i + 1), e.to_string())),
                    }
                }
            }
        }
        // rewrite so that a dropped partial line cannot corrupt later appends
        let mut writer = BufWriter::new(File::create(path).map_err(|e| Error::write(path, e))?);
        let header = serde_json::to_string(&JournalHeader {
            fingerprint: fingerprint.to_string(),
        })
        .expect("header serializes");
        let io = |e| Error::write(path, e);
        writeln!(writer, "{header}").map_err(io)?;
        for line in &valid_lines {
            writeln!(writer, "{line}").map_err(io)?;
        }
        writer.flush().map_err(io)?;
        Ok((
            Self {
                writer,
                path: path.to_path_buf(),
            },
            done,
        ))
    }

    fn append(&mut self, result: &SimulationResult) -> Result<()> {
        let line = serde_json::to_string(result).expect("result serializes");
        let path = &self.path;
        writeln!(self.writer, "{line}")
            .and_then(|_| self.writer.flush())
            .map_err(|e| Error::write(path, e))
    }
}

pub fn journal_path(out_dir: &Path) -> PathBuf {
    out_dir.join(JOURNAL_FILE)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontEntry {
    pub design: usize,
    pub kpi: Vec<f64>,
    pub multiplicity: usize,
    pub members: Vec<usize>,
    pub wiring: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry {
    pub design: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoReport {
    pub space: String,
    pub scenarios: Vec<String>,
    pub clamp: bool,
    pub dedup: bool,
    pub designs_evaluated: usize,
    /// Configurations represented by the evaluated designs.
    pub configurations_evaluated: usize,
    pub stopped_at_design: Option<usize>,
    pub front: Vec<FrontEntry>,
    /// Configurations represented by the front (sum of multiplicities).
    pub front_configurations: usize,
    /// Functionally distinct designs on the front.
    pub front_distinct: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimum: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meets_minimum: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<RankEntry>>,
}

#[derive(Debug, Clone)]
pub struct ExploreReport {
    /// Evaluated designs in evaluation order.
    pub designs: Vec<Design>,
    /// Results ordered by (design, scenario, replication).
    pub results: Vec<SimulationResult>,
    pub vectors: Vec<KpiVector>,
    pub pareto: ParetoReport,
    /// Cells simulated in this invocation (the rest came from the journal).
    pub computed: usize,
    pub resumed: usize,
}

/// Mean KPI per scenario for one design.
fn kpi_vector(design: usize, n_scen: usize, reps: u32, results: &HashMap<CellKey, SimulationResult>) -> KpiVector {
    let values = (0..n_scen)
        .map(|s| (0..reps).map(|r| results[&(design, s, r)].kpi).sum::<f64>() / reps as f64)
        .collect();
    KpiVector { design, values }
}

/// Runs one cell. Panics inside the simulation propagate and abort the batch.
fn run_cell(inputs: &Inputs, design: &Design, scenario: usize, rep: u32, base_seed: u64, clamp: bool) -> SimulationResult {
    let sc = &inputs.scenarios[scenario];
    let seed = cell_seed(base_seed, design.index, scenario, rep);
    let model = PlantModel::build(&inputs.space, &design.config, sc).unwrap_or_else(|e| {
        panic!("design {} cannot be built for scenario {}: {e}", design.index, sc.id)
    });
    let out = model.run(seed, false);
    score(&inputs.space, sc, &out, design.index, rep, seed, clamp)
}

pub fn explore(plan: &RunPlan) -> Result<ExploreReport> {
    let inputs = Inputs::load(&plan.space, &plan.scenarios)?;
    explore_with(plan, &inputs)
}

pub fn explore_with(plan: &RunPlan, inputs: &Inputs) -> Result<ExploreReport> {
    if plan.replications == 0 {
        return Err(Error::invalid("plan", "replications", "must be at least 1"));
    }
    if plan.scenarios.is_empty() && inputs.scenarios.is_empty() {
        return Err(Error::invalid("plan", "scenarios", "at least one scenario is required"));
    }
    fs::create_dir_all(&plan.out_dir).map_err(|e| Error::write(&plan.out_dir, e))?;
    let all = designs(&inputs.space, plan.dedup);
    info!(
        "{} designs ({}), {} scenario(s), {} replication(s), {} worker(s)",
        all.len(),
        if plan.dedup { "deduplicated" } else { "all configurations" },
        inputs.scenarios.len(),
        plan.replications,
        plan.jobs
    );

    let fp = fingerprint(plan, inputs);
    let (journal, previous) = Journal::open(&journal_path(&plan.out_dir), &fp)?;
    let n_scen = inputs.scenarios.len();
    let mut results: HashMap<CellKey, SimulationResult> = HashMap::new();
    for r in previous {
        if let Some(s) = inputs.scenarios.iter().position(|s| s.id == r.scenario) {
            results.insert((r.design, s, r.replication), r);
        }
    }
    let resumed = results.len();
    let journal = Mutex::new(journal);
    let timings: Mutex<Vec<(CellKey, f64)>> = Mutex::new(Vec::new());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs.max(1))
        .build()
        .map_err(|e| Error::Runtime(e.to_string()))?;

    let mut evaluated = 0;
    let mut stopped_at = None;
    let mut computed = 0;
    for chunk in all.chunks(CHUNK_DESIGNS) {
        let todo: Vec<(&Design, usize, u32)> = chunk
            .iter()
            .flat_map(|d| (0..n_scen).flat_map(move |s| (0..plan.replications).map(move |r| (d, s, r))))
            .filter(|(d, s, r)| !results.contains_key(&(d.index, *s, *r)))
            .collect();
        let fresh: Vec<Result<SimulationResult>> = pool.install(|| {
            todo.par_iter()
                .map(|&(d, s, r)| {
                    let t0 = Instant::now();
                    let res = run_cell(inputs, d, s, r, plan.seed, plan.clamp);
                    let ms = t0.elapsed().as_secs_f64() * 1e3;
                    timings.lock().expect("timings lock").push(((d.index, s, r), ms));
                    journal.lock().expect("journal lock").append(&res)?;
                    Ok(res)
                })
                .collect()
        });
        computed += fresh.len();
        for (res, &(d, s, r)) in fresh.into_iter().zip(&todo) {
            results.insert((d.index, s, r), res?);
        }
        evaluated += chunk.len();
        if let StopCondition::FirstMeeting(t) = &plan.stop {
            let vs: Vec<KpiVector> = chunk
                .iter()
                .map(|d| kpi_vector(d.index, n_scen, plan.replications, &results))
                .collect();
            if let Some(p) = first_meeting(&vs, t) {
                evaluated = evaluated - chunk.len() + p + 1;
                stopped_at = Some(chunk[p].index);
                info!("stop condition met by design {}", chunk[p].index);
                break;
            }
        }
        info!("{evaluated}/{} designs evaluated", all.len());
    }

    let designs: Vec<Design> = all[..evaluated].to_vec();
    let vectors: Vec<KpiVector> = designs
        .iter()
        .map(|d| kpi_vector(d.index, n_scen, plan.replications, &results))
        .collect();
    let mut ordered = Vec::with_capacity(designs.len() * n_scen * plan.replications as usize);
    for d in &designs {
        for s in 0..n_scen {
            for r in 0..plan.replications {
                ordered.push(results[&(d.index, s, r)].clone());
            }
        }
    }

    let pareto = pareto_report(plan, inputs, &designs, &vectors, stopped_at);
    let by_design: BTreeMap<usize, usize> = designs.iter().map(|d| (d.index, d.members.len())).collect();
    write_results_csv(&plan.out_dir.join(RESULTS_FILE), &ordered, &by_design)?;
    write_plot_csv(&plan.out_dir.join(PLOT_FILE), inputs, &vectors, &by_design, &pareto)?;
    let text = serde_json::to_string_pretty(&pareto).expect("report serializes");
    let path = plan.out_dir.join(PARETO_FILE);
    fs::write(&path, text + "\n").map_err(|e| Error::write(&path, e))?;
    let mut timings = timings.into_inner().expect("timings lock");
    timings.sort_by_key(|a| a.0);
    write_timings_csv(&plan.out_dir.join(TIMINGS_FILE), inputs, &timings)?;

    Ok(ExploreReport {
        designs,
        results: ordered,
        vectors,
        pareto,
        computed,
        resumed,
    })
}

fn pareto_report(
    plan: &RunPlan,
    inputs: &Inputs,
    designs: &[Design],
    vectors: &[KpiVector],
    stopped_at: Option<usize>,
) -> ParetoReport {
    let front = pareto(vectors);
    let by_index: HashMap<usize, &Design> = designs.iter().map(|d| (d.index, d)).collect();
    let entries: Vec<FrontEntry> = front
        .iter()
        .map(|v| {
            let d = by_index[&v.design];
            FrontEntry {
                design: v.design,
                kpi: v.values.clone(),
                multiplicity: d.members.len(),
                members: d.members.clone(),
                wiring: inputs.space.wiring(&d.config),
            }
        })
        .collect();
    let mut keys: Vec<_> = front
        .iter()
        .map(|v| inputs.space.canonical_key(&by_index[&v.design].config))
        .collect();
    keys.sort();
    keys.dedup();
    let minimum = plan.minimum.clone();
    ParetoReport {
        space: inputs.space.name.clone(),
        scenarios: inputs.scenarios.iter().map(|s| s.id.clone()).collect(),
        clamp: plan.clamp,
        dedup: plan.dedup,
        designs_evaluated: designs.len(),
        configurations_evaluated: designs.iter().map(|d| d.members.len()).sum(),
        stopped_at_design: stopped_at,
        front_configurations: entries.iter().map(|e| e.multiplicity).sum(),
        front_distinct: keys.len(),
        front: entries,
        meets_minimum: minimum
            .as_ref()
            .map(|t| t.filter(&front).into_iter().map(|v| v.design).collect()),
        minimum: minimum.map(|t| t.0),
        ranking: plan.weights.as_ref().map(|w| {
            rank_weighted(&front, w)
                .into_iter()
                .map(|(design, score)| RankEntry { design, score })
                .collect()
        }),
        weights: plan.weights.clone(),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn joined<T, F: Fn(&T) -> String>(items: &[T], f: F) -> String {
    items.iter().map(f).collect::<Vec<_>>().join("|")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "*".to_string(), |x| x.to_string())
}

pub const RESULT_COLUMNS: [&str; 25] = [
    "design",
    "members",
    "scenario",
    "replication",
    "seed",
    "kpi",
    "injected",
    "injected_mass_g",
    "absorbed",
    "absorbed_mass_g",
    "trim_mass_g",
    "in_flight",
    "in_flight_mass_g",
    "band_violations",
    "events",
    "recipe",
    "recipe_destination",
    "recipe_absorbed",
    "recipe_achieved_per_min",
    "recipe_target_per_min",
    "recipe_attainment",
    "destination",
    "destination_tag",
    "destination_count",
    "destination_mass_g",
];

pub fn result_record(r: &SimulationResult, members: usize) -> Vec<String> {
    vec![
        r.design.to_string(),
        members.to_string(),
        r.scenario.clone(),
        r.replication.to_string(),
        r.seed.to_string(),
        r.kpi.to_string(),
        r.injected.to_string(),
        r.injected_mass_g.to_string(),
        r.absorbed.to_string(),
        r.absorbed_mass_g.to_string(),
        r.trim_mass_g.to_string(),
        r.in_flight.to_string(),
        r.in_flight_mass_g.to_string(),
        r.band_violations.to_string(),
        r.events.to_string(),
        joined(&r.recipes, |x| x.recipe.to_string()),
        joined(&r.recipes, |x| x.destination.to_string()),
        joined(&r.recipes, |x| x.absorbed.to_string()),
        joined(&r.recipes, |x| x.achieved_per_min.to_string()),
        joined(&r.recipes, |x| opt(x.target_per_min)),
        joined(&r.recipes, |x| opt(x.attainment)),
        joined(&r.destinations, |x| x.module.clone()),
        joined(&r.destinations, |x| x.tag.to_string()),
        joined(&r.destinations, |x| x.count.to_string()),
        joined(&r.destinations, |x| x.mass_g.to_string()),
    ]
}

pub fn write_results_csv(path: &Path, results: &[SimulationResult], members: &BTreeMap<usize, usize>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let e = csv_err(path);
    w.write_record(RESULT_COLUMNS).map_err(&e)?;
    for r in results {
        w.write_record(result_record(r, members.get(&r.design).copied().unwrap_or(1)))
            .map_err(&e)?;
    }
    w.flush().map_err(|io| Error::write(path, io))
}

fn write_plot_csv(
    path: &Path,
    inputs: &Inputs,
    vectors: &[KpiVector],
    members: &BTreeMap<usize, usize>,
    report: &ParetoReport,
) -> Result<()> {
    let mut w = csv_writer(path)?;
    let e = csv_err(path);
    let mut header = vec!["design".to_string(), "members".to_string()];
    header.extend(inputs.scenarios.iter().map(|s| format!("kpi_{}", s.id)));
    header.push("pareto".to_string());
    w.write_record(&header).map_err(&e)?;
    for v in vectors {
        let on_front = report.front.iter().any(|f| f.design == v.design);
        let mut row = vec![v.design.to_string(), members[&v.design].to_string()];
        row.extend(v.values.iter().map(f64::to_string));
        row.push(u8::from(on_front).to_string());
        w.write_record(&row).map_err(&e)?;
    }
    w.flush().map_err(|io| Error::write(path, io))
}

fn write_timings_csv(path: &Path, inputs: &Inputs, timings: &[(CellKey, f64)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let e = csv_err(path);
    w.write_record(["design", "scenario", "replication", "wall_ms"]).map_err(&e)?;
    for ((d, s, r), ms) in timings {
        w.write_record([
            d.to_string(),
            inputs.scenarios[*s].id.clone(),
            r.to_string(),
            format!("{ms:.3}"),
        ])
        .map_err(&e)?;
    }
    w.flush().map_err(|io| Error::write(path, io))
}

/// Which configuration `simulate_one` runs.
#[derive(Debug, Clone)]
pub enum DesignChoice {
    /// Index in enumeration order.
    Index(usize),
    /// A configuration file with explicit connections.
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct SingleRun {
    pub design: usize,
    pub wiring: Vec<(String, String)>,
    pub result: SimulationResult,
    pub trace: Option<Vec<TraceRow>>,
}

/// Runs one replication of one design; `seed` is used directly.
pub fn simulate_one(space: &DesignSpace, choice: &DesignChoice, scenario: &Scenario, seed: u64, trace: bool) -> Result<SingleRun> {
    let (design, config) = match choice {
        DesignChoice::Index(i) => {
            let config = enumerate(space).nth(*i).ok_or_else(|| {
                Error::invalid(
                    &space.name,
                    "design",
                    format!("index {i} out of range ({} configurations)", enumerate(space).count()),
                )
            })?;
            (*i, config)
        }
        DesignChoice::File(path) => {
            let config = space.load_configuration(path)?;
            let problems = space.check_configuration(&config);
            if !problems.is_empty() {
                return Err(Error::invalid(path.display().to_string(), "connections", problems.join("; ")));
            }
            let index = enumerate(space)
                .position(|c| c == config)
                .expect("every valid configuration is enumerated");
            (index, config)
        }
    };
    let model = PlantModel::build(space, &config, scenario)?;
    let out = model.run(seed, trace);
    let result = score(space, scenario, &out, design, 0, seed, true);
    Ok(SingleRun {
        design,
        wiring: space.wiring(&config),
        result,
        trace: out.trace,
    })
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let e = csv_err(path);
    for row in rows {
        w.serialize(row).map_err(&e)?;
    }
    w.flush().map_err(|io| Error::write(path, io))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub configurations: Option<usize>,
    pub distinct: Option<usize>,
    pub violations: Vec<String>,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        let n = |x: Option<usize>| x.map_or_else(|| "?".to_string(), |x| x.to_string());
        write!(
            f,
            "{} configurations, {} distinct, {} violations",
            n(self.configurations),
            n(self.distinct),
            self.violations.len()
        )
    }
}

/// Static checks only; problems are listed rather than returned as errors.
pub fn validate(space: &Path, scenarios: &[PathBuf]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let ctx = space.display().to_string();
    let built = match DesignSpaceFile::load(space) {
        Ok(file) => {
            let (built, violations) = file.build();
            report.violations.extend(violations.into_iter().map(|v| format!("{ctx}: {v}")));
            built
        }
        Err(e) => {
            report.violations.push(e.to_string());
            None
        }
    };
    if let Some(s) = &built {
        let classes = deduplicate(s, enumerate(s));
        report.configurations = Some(classes.iter().map(|c| c.multiplicity()).sum());
        report.distinct = Some(classes.len());
        if classes.is_empty() {
            report.violations.push(format!("{ctx}: design space admits no valid configuration"));
        }
    }
    let mut ids = Vec::new();
    for path in scenarios {
        let pctx = path.display().to_string();
        match Scenario::load_unchecked(path) {
            Ok(sc) => {
                if ids.contains(&sc.id) {
                    report.violations.push(format!("{pctx}: id: duplicate scenario id {:?}", sc.id));
                }
                ids.push(sc.id.clone());
                report
                    .violations
                    .extend(sc.violations().into_iter().map(|(f, m)| format!("{pctx}: {f}: {m}")));
                if let Some(s) = &built {
                    report
                        .violations
                        .extend(scenario_violations(s, &sc).into_iter().map(|m| format!("{pctx}: {m}")));
                }
            }
            Err(e) => report.violations.push(e.to_string()),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_scenario_parsing() {
        let sc = Scenario::from_json(
            r#"{"id": "a", "horizon_s": 60, "recipes": [
                {"recipe": 1, "destination": "fillet-strips", "priority": "*", "target_throughput_per_min": "*",
                 "min_fillet_weight_g": 0, "max_fillet_weight_g": 1000, "max_trim_weight_g": 0}],
               "inflow": [{"lane": 0, "rate_per_min": 10, "weights": {"uniform": {"min_g": 100, "max_g": 200}}}]}"#,
        )
        .unwrap();
        let mut b = sc.clone();
        b.id = "b".into();
        let scs = [sc, b];
        assert_eq!(per_scenario(&["b=0.6".into()], &scs, 0.0, "x").unwrap(), vec![0.0, 0.6]);
        assert!(per_scenario(&["c=0.6".into()], &scs, 0.0, "x").is_err());
        assert!(per_scenario(&["b0.6".into()], &scs, 0.0, "x").is_err());
        assert!(per_scenario(&["a=x".into()], &scs, 0.0, "x").is_err());
    }

    #[test]
    fn cell_seed_ignores_design() {
        assert_eq!(cell_seed(1, 0, 1, 0), cell_seed(1, 99, 1, 0));
        assert_ne!(cell_seed(1, 0, 0, 0), cell_seed(1, 0, 1, 0));
        assert_ne!(cell_seed(1, 0, 0, 0), cell_seed(1, 0, 0, 1));
        assert_ne!(cell_seed(1, 0, 0, 0), cell_seed(2, 0, 0, 0));
    }
}
