use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kgprobe_core::exam::{read_log, run_evaluation, JsonlLog, LogRecord, Roles, RunOutcome};
use kgprobe_core::gateway::SimulatorConfig;
use kgprobe_core::ingest::{
    build_topic_graph, parse_blocklist, parse_seeds, FilterConfig, FixtureEndpoint, HttpSparqlEndpoint,
    SparqlEndpoint, WalkConfig,
};
use kgprobe_core::metrics::{
    export_pkg_dot, group_metrics, heatmap, outcomes_from_log, outcomes_from_pkg, Dimension, EdgeOutcome, Rates,
    Side, Statistic,
};
use kgprobe_core::pkg::{init_pkg, read_pkg, read_records, write_pkg, ParameterizedKG, PkgOptions};
use kgprobe_core::question::Reference;
use kgprobe_core::registry::{BackendContext, Backends};
use kgprobe_core::synth::{synthetic_graph, uniform_error_probs, SynthConfig};
use serde::Serialize;

use crate::config::AppConfig;
use crate::failure::{Refused, Usage};
use crate::{BuildGraphArgs, ExportArgs, ExportFormat, ReportArgs, ReportFormat, RunArgs, RunFlags, SimulateArgs};

pub const PKG_FILE: &str = "pkg.jsonl";
pub const LOG_FILE: &str = "log.jsonl";
pub const HISTORY_FILE: &str = "history.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SNAPSHOT_FILE: &str = "config.toml";
pub const DOT_FILE: &str = "pkg.dot";
pub const HEATMAP_FILE: &str = "heatmap.csv";
pub const GROUPS_FILE: &str = "groups.csv";

fn load_config(file: Option<&Path>) -> Result<AppConfig> {
    if let Some(path) = file {
        require_input(path, "config file")?;
    }
    AppConfig::load(file, std::env::vars())
}

fn require_input(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Usage(format!("{what} {} not found", path.display())).into())
    }
}

fn guard_outputs(paths: &[PathBuf], force: bool) -> Result<()> {
    if force {
        return Ok(());
    }
    match paths.iter().find(|p| p.exists()) {
        Some(p) => Err(Refused(p.clone()).into()),
        None => Ok(()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {}", path.display()))
}

fn save_pkg(pkg: &ParameterizedKG, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_pkg(pkg, &mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush().with_context(|| format!("writing {}", path.display()))
}

fn open(path: &Path, what: &str) -> Result<BufReader<File>> {
    require_input(path, what)?;
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

pub fn load_pkg(path: &Path) -> Result<ParameterizedKG> {
    read_pkg(open(path, "graph file")?, PkgOptions::default()).with_context(|| format!("reading {}", path.display()))
}

fn load_log(path: &Path) -> Result<Vec<LogRecord>> {
    read_log(open(path, "log file")?).with_context(|| format!("reading {}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn build_graph(config: Option<&Path>, args: BuildGraphArgs) -> Result<()> {
    let mut cfg = load_config(config)?;
    let seeds_text = {
        require_input(&args.seeds, "seeds file")?;
        std::fs::read_to_string(&args.seeds).with_context(|| format!("reading {}", args.seeds.display()))?
    };
    if let Some(b) = &args.blocklist {
        cfg.filters.blocklist = Some(b.display().to_string());
    }
    if let Some(s) = args.steps {
        cfg.walk.steps = s;
    }
    if let Some(l) = args.limit {
        cfg.walk.limit = l;
    }
    if let Some(e) = args.endpoint {
        cfg.sparql.endpoint = e;
    }
    cfg.walk.seeds = parse_seeds(&seeds_text);
    if cfg.walk.seeds.is_empty() {
        return Err(Usage(format!("{} lists no seed entities", args.seeds.display())).into());
    }
    let blocklist = match &cfg.filters.blocklist {
        Some(path) => {
            let path = Path::new(path);
            require_input(path, "blocklist")?;
            parse_blocklist(&std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
        }
        None => Default::default(),
    };

    let report_path = with_suffix(&args.out, ".report.json");
    let snapshot_path = with_suffix(&args.out, ".config.toml");
    guard_outputs(&[args.out.clone(), report_path.clone(), snapshot_path.clone()], args.force)?;

    let endpoint: Box<dyn SparqlEndpoint> = match &args.fixture_dir {
        Some(dir) => {
            require_input(&dir.join("world.json"), "fixture world")?;
            Box::new(FixtureEndpoint::load(dir, cfg.run.seed)?)
        }
        None => Box::new(HttpSparqlEndpoint::new(cfg.sparql.clone())?),
    };
    let walk = WalkConfig {
        seeds: cfg.walk.seeds.clone(),
        ..cfg.walk.clone()
    };
    let filters = FilterConfig {
        min_language_count: cfg.filters.min_language_count,
        require_alias: cfg.filters.require_alias,
        min_mention_frequency: cfg.filters.min_mention_frequency,
        predicate_blocklist: blocklist,
    };
    let (source, report) = build_topic_graph(endpoint.as_ref(), &walk, &filters).context("building topic graph")?;
    let pkg = init_pkg(source).context("initializing graph")?;

    save_pkg(&pkg, &args.out)?;
    write_text(&report_path, &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
    write_text(&snapshot_path, &cfg.to_toml()?)?;
    log::info!(
        "wrote {}: {} entities, {} edges ({} active, {} dead)",
        args.out.display(),
        report.entities,
        report.edges,
        report.active_edges,
        report.dead_edges
    );
    Ok(())
}

fn apply_run_flags(cfg: &mut AppConfig, f: &RunFlags) -> Result<()> {
    if let Some(v) = f.seed {
        cfg.run.seed = v;
        cfg.simulator.seed = v;
    }
    if let Some(v) = f.iterations {
        cfg.run.iterations = v;
    }
    if let Some(v) = f.batch_size {
        cfg.run.batch_size = v;
    }
    if let Some(v) = f.mode {
        cfg.run.mode = v;
    }
    if let Some(v) = &f.examinee {
        cfg.roles.examinee = v.clone();
    }
    if let Some(v) = &f.writer {
        cfg.roles.writer = v.clone();
    }
    if let Some(v) = &f.judge {
        cfg.roles.judge = v.clone();
    }
    if f.no_propagation {
        cfg.run.propagation_enabled = false;
    }
    if let Some(v) = f.max_in_flight {
        cfg.run.max_in_flight = v;
    }
    if let Some(v) = f.epsilon {
        cfg.run.convergence.epsilon = v;
    }
    if f.wall_clock {
        cfg.run.wall_clock = true;
    }
    cfg.run
        .validate()
        .map_err(|e| Usage(format!("invalid run configuration: {e}")))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Summary {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    run_id: String,
    iterations_run: u64,
    stop: Option<kgprobe_core::exam::StopReason>,
    examined_edges: usize,
    win_rate: Option<f64>,
    zero_sense_rate: Option<f64>,
    /// Rates recomputed from the written log agree with the graph tallies.
    log_replay_matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulation: Option<SimulationSummary>,
}

#[derive(Debug, Serialize)]
struct SimulationSummary {
    edges: usize,
    /// Mean |posterior mean - true error probability| over examined edges.
    mean_abs_posterior_error: Option<f64>,
    /// Win rate expected from the true error probabilities of the examined edges.
    expected_win_rate: Option<f64>,
}

struct RunPaths {
    pkg: PathBuf,
    log: PathBuf,
    history: PathBuf,
    summary: PathBuf,
    snapshot: PathBuf,
}

impl RunPaths {
    fn new(dir: &Path) -> Self {
        Self {
            pkg: dir.join(PKG_FILE),
            log: dir.join(LOG_FILE),
            history: dir.join(HISTORY_FILE),
            summary: dir.join(SUMMARY_FILE),
            snapshot: dir.join(SNAPSHOT_FILE),
        }
    }

    fn all(&self) -> Vec<PathBuf> {
        vec![
            self.pkg.clone(),
            self.log.clone(),
            self.history.clone(),
            self.summary.clone(),
            self.snapshot.clone(),
        ]
    }
}

/// Runs the evaluation and writes every run artifact, also after an abort.
fn execute(
    cfg: &AppConfig,
    pkg: &mut ParameterizedKG,
    reference: &Reference,
    paths: &RunPaths,
    simulation: Option<&SimulatorConfig>,
) -> Result<()> {
    let backends = Backends::default();
    let ctx = BackendContext {
        examinee: cfg.examinee.clone(),
        generator: cfg.generator.clone(),
        judge: cfg.judge.clone(),
        simulator: cfg.simulator.clone(),
    };
    let examinee = backends.examinees.create(&cfg.roles.examinee, &ctx)?;
    let writer = backends.writers.create(&cfg.roles.writer, &ctx)?;
    let judge = backends.judges.create(&cfg.roles.judge, &ctx)?;
    let roles = Roles {
        examinee: examinee.as_ref(),
        writer: writer.as_ref(),
        judge: judge.as_ref(),
    };

    write_text(&paths.snapshot, &cfg.to_toml()?)?;
    let mut sink = JsonlLog::new(create(&paths.log)?);
    let result = run_evaluation(pkg, reference, cfg.run.clone(), roles, &mut sink);
    sink.into_inner()
        .flush()
        .with_context(|| format!("writing {}", paths.log.display()))?;
    let (outcome, error) = match result {
        Ok(o) => (o, None),
        Err(abort) => (abort.outcome, Some(abort.error)),
    };

    save_pkg(pkg, &paths.pkg)?;
    write_history(&outcome, &paths.history)?;

    let rates = kgprobe_core::metrics::pkg_rates(pkg);
    let log_outcomes = outcomes_from_log(load_log(&paths.log)?.iter().filter_map(LogRecord::as_exam));
    let replay = Rates::from_tallies(log_outcomes.iter().map(|o| &o.tally));
    let summary = Summary {
        status: if error.is_some() { "aborted" } else { "completed" },
        error: error.as_ref().map(|e| e.to_string()),
        run_id: outcome.run_id.clone(),
        iterations_run: outcome.iterations_run,
        stop: outcome.stop,
        examined_edges: rates.examined,
        win_rate: rates.win_rate().ok(),
        zero_sense_rate: rates.zero_sense_rate().ok(),
        log_replay_matches: replay == rates,
        simulation: simulation.map(|sim| simulation_summary(pkg, sim)),
    };
    write_text(&paths.summary, &format!("{}\n", serde_json::to_string_pretty(&summary)?))?;
    log::info!(
        "run {}: {} iterations, {} edges examined, win rate {}, zero-sense rate {}",
        outcome.run_id,
        outcome.iterations_run,
        rates.examined,
        fmt_rate(summary.win_rate),
        fmt_rate(summary.zero_sense_rate)
    );
    match error {
        Some(e) => Err(anyhow::Error::new(e).context("evaluation aborted; partial artifacts written")),
        None => Ok(()),
    }
}

fn fmt_rate(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into())
}

fn write_history(outcome: &RunOutcome, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    for point in &outcome.history {
        serde_json::to_writer(&mut w, point)?;
        w.write_all(b"\n")?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

fn simulation_summary(pkg: &ParameterizedKG, sim: &SimulatorConfig) -> SimulationSummary {
    let prob = |id: &kgprobe_core::pkg::EdgeId| sim.error_prob.get(id).copied().unwrap_or(sim.default_error_prob);
    let examined: Vec<_> = pkg.edges().filter(|e| e.examined()).collect();
    let n = examined.len() as f64;
    let mean = |f: &dyn Fn(&kgprobe_core::pkg::Edge) -> f64| {
        (!examined.is_empty()).then(|| examined.iter().map(|e| f(e)).sum::<f64>() / n)
    };
    SimulationSummary {
        edges: pkg.edge_count(),
        mean_abs_posterior_error: mean(&|e| (e.posterior_mean() - prob(&e.id)).abs()),
        expected_win_rate: mean(&|e| 1.0 - prob(&e.id)),
    }
}

pub fn run(config: Option<&Path>, args: RunArgs) -> Result<()> {
    let mut cfg = load_config(config)?;
    apply_run_flags(&mut cfg, &args.flags)?;
    let mut pkg = load_pkg(&args.pkg)?;
    if pkg.active_edge_count() == 0 {
        return Err(kgprobe_core::pkg::PkgError::NoActiveEdges).with_context(|| args.pkg.display().to_string());
    }
    let mut reference = Reference::from_pkg(&pkg);
    if let Some(path) = &args.supplement {
        let records = read_records(open(path, "supplement file")?)
            .with_context(|| format!("reading {}", path.display()))?;
        reference.add_supplement(&records);
    }
    let paths = RunPaths::new(&args.out_dir);
    guard_outputs(&paths.all(), args.force)?;
    execute(&cfg, &mut pkg, &reference, &paths, None)
}

pub fn simulate(config: Option<&Path>, args: SimulateArgs) -> Result<()> {
    let mut cfg = load_config(config)?;
    apply_run_flags(&mut cfg, &args.flags)?;
    if args.flags.examinee.as_deref().is_some_and(|e| e != "simulated") {
        return Err(Usage("simulate always uses the simulated examinee".into()).into());
    }
    cfg.roles.examinee = "simulated".into();
    if let Some(n) = args.edges {
        cfg.synth.edges = n;
    }
    if let Some(p) = args.error_prob {
        cfg.simulator.default_error_prob = p;
    }
    if args.uniform_errors {
        cfg.synth.uniform_errors = true;
    }
    let mut synth = SynthConfig::with_edges(cfg.synth.edges, cfg.run.seed);
    synth.predicates = cfg.synth.predicates;
    synth.years = cfg.synth.years;
    if let Some(n) = cfg.synth.entities {
        synth.entities = n;
    }
    if synth.edges == 0 || synth.entities < 2 || synth.edges > synth.entities * (synth.entities - 1) {
        return Err(Usage(format!(
            "cannot place {} edges among {} entities",
            synth.edges, synth.entities
        ))
        .into());
    }

    let paths = RunPaths::new(&args.out_dir);
    let dot_path = args.out_dir.join(DOT_FILE);
    let heatmap_path = args.out_dir.join(HEATMAP_FILE);
    let groups_path = args.out_dir.join(GROUPS_FILE);
    let mut outputs = paths.all();
    outputs.extend([dot_path.clone(), heatmap_path.clone(), groups_path.clone()]);
    guard_outputs(&outputs, args.force)?;

    let source = synthetic_graph(&synth);
    if cfg.synth.uniform_errors {
        let ids: Vec<_> = source.edges.iter().map(|e| e.id.clone()).collect();
        cfg.simulator.error_prob = uniform_error_probs(&ids, cfg.run.seed);
    }
    let mut pkg = init_pkg(source)?;
    let reference = Reference::from_pkg(&pkg);
    let sim = cfg.simulator.clone();
    let result = execute(&cfg, &mut pkg, &reference, &paths, Some(&sim));

    write_text(&dot_path, &export_pkg_dot(&pkg))?;
    let outcomes = outcomes_from_pkg(&pkg);
    let year = Dimension::resolve("year", Side::Subject, &pkg)?;
    write_text(&groups_path, &group_metrics(&pkg, &outcomes, &year).to_csv())?;
    write_text(&heatmap_path, &heatmap(&pkg, &outcomes, &year, Statistic::ZeroSense).to_csv())?;
    result
}

fn outcomes_for(pkg: &ParameterizedKG, log: Option<&Path>) -> Result<Vec<EdgeOutcome>> {
    match log {
        Some(path) => {
            let records = load_log(path)?;
            Ok(outcomes_from_log(records.iter().filter_map(LogRecord::as_exam)))
        }
        None => Ok(outcomes_from_pkg(pkg)),
    }
}

fn emit(out: Option<&Path>, force: bool, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            guard_outputs(&[path.to_path_buf()], force)?;
            write_text(path, text)
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("writing to standard output")
        }
    }
}

pub fn report(args: ReportArgs) -> Result<()> {
    let pkg = load_pkg(&args.pkg)?;
    if args.format == ReportFormat::Dot {
        return emit(args.out.as_deref(), args.force, &export_pkg_dot(&pkg));
    }
    let outcomes = outcomes_for(&pkg, args.log.as_deref())?;
    let dimension = Dimension::resolve(&args.group_by, args.side.into(), &pkg)?;
    let text = match args.format {
        ReportFormat::Csv => group_metrics(&pkg, &outcomes, &dimension).to_csv(),
        ReportFormat::Json => {
            let report = group_metrics(&pkg, &outcomes, &dimension);
            let overall = Rates::from_tallies(outcomes.iter().map(|o| &o.tally));
            let value = serde_json::json!({
                "overall": {
                    "examined": overall.examined,
                    "win_rate": overall.win_rate().ok(),
                    "zero_sense_rate": overall.zero_sense_rate().ok(),
                },
                "report": report,
            });
            format!("{}\n", serde_json::to_string_pretty(&value)?)
        }
        ReportFormat::Heatmap => heatmap(&pkg, &outcomes, &dimension, args.statistic.into()).to_csv(),
        ReportFormat::Dot => unreachable!("handled above"),
    };
    emit(args.out.as_deref(), args.force, &text)
}

fn edges_csv(pkg: &ParameterizedKG) -> String {
    let mut out = String::from("id,subject,predicate,object,active,alpha,beta,posterior_mean,n_correct,n_incorrect\n");
    for e in pkg.edges() {
        let field = |s: &str| {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.6},{},{}\n",
            field(e.id.as_str()),
            field(e.subject.as_str()),
            field(e.predicate.as_str()),
            field(e.object.as_str()),
            e.active,
            e.params.alpha,
            e.params.beta,
            e.posterior_mean(),
            e.n_correct,
            e.n_incorrect
        ));
    }
    out
}

pub fn export(args: ExportArgs) -> Result<()> {
    let pkg = load_pkg(&args.pkg)?;
    let text = match args.format {
        ExportFormat::Dot => export_pkg_dot(&pkg),
        ExportFormat::EdgesCsv => edges_csv(&pkg),
    };
    emit(args.out.as_deref(), args.force, &text)
}
