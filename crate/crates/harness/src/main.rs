use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sagsin_core::numeric::log_space;
use sagsin_core::routing::{range_violations, validate_spanning_tree, Network, RoutingGraph};
use sagsin_core::rrm::{allocate, kkt_verify};
use sagsin_core::secrecy::{calibrate, Calibration, FadingModel, SpscQuery};
use sagsin_core::testbed::{load_scenario, random_scenario, Scenario, ScenarioConfig};
use sagsin_harness::{export_geojson, run_method, run_sweep, write_csv, HarnessError, Method, Solvers, SweepSpec};
use serde::{Deserialize, Serialize};
use serde_json::json;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INVALID: u8 = 3;

#[derive(Parser)]
#[command(name = "sagsin", version, about = "Secure relay routing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// TOML or JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit SPSC calibration parameters from Monte-Carlo estimates.
    Calibrate(Common),
    /// Run a parameter sweep and write CSV rows.
    Sweep(Common),
    /// Route one scenario and write the solution as JSON.
    Route {
        #[command(flatten)]
        common: Common,
        /// Overrides the method in the config.
        #[arg(long)]
        method: Option<Method>,
        /// Also write the solution as GeoJSON.
        #[arg(long)]
        geojson: Option<PathBuf>,
    },
    /// Check a config file, or a routing solution against its scenario.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Solution JSON written by `route`.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
struct CalibrateSpec {
    distance_bands_km: Vec<f64>,
    lambda_grid: Vec<f64>,
    alpha: f64,
    fading: FadingModel,
    trials: usize,
    seed: u64,
}

impl Default for CalibrateSpec {
    fn default() -> Self {
        CalibrateSpec {
            distance_bands_km: vec![50.0, 100.0, 200.0, 400.0],
            lambda_grid: log_space(1e-7, 1e-4, 7),
            alpha: 2.8,
            fading: FadingModel::Rayleigh,
            trials: 20_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
struct RouteSpec {
    scenario: ScenarioConfig,
    /// Node snapshot; a random scenario from `scenario` when unset.
    nodes: Option<PathBuf>,
    method: Method,
    solvers: Solvers,
}

impl Default for RouteSpec {
    fn default() -> Self {
        RouteSpec { scenario: ScenarioConfig::default(), nodes: None, method: Method::Mcrr, solvers: Solvers::default() }
    }
}

struct Failure {
    code: u8,
    body: serde_json::Value,
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure { code: EXIT_FAILURE, body: e.to_json() }
    }
}

fn core_err(context: &str) -> impl FnOnce(sagsin_core::Error) -> Failure + '_ {
    move |e| HarnessError::core(context, e).into()
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e).into())
}

fn parse_doc<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, String> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| e.to_string())
    } else {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}

fn load_doc<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T, Failure> {
    match path {
        None => Ok(T::default()),
        Some(p) => parse_doc(&read(p)?).map_err(|m| HarnessError::Spec(format!("{}: {m}", p.display())).into()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
            }
            std::fs::write(p, text).map_err(|e| HarnessError::io(p, e).into())
        }
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes()).and_then(|_| o.flush()).map_err(|e| HarnessError::io(Path::new("<stdout>"), e).into())
        }
    }
}

fn cmd_calibrate(c: &Common) -> Result<(), Failure> {
    let mut spec: CalibrateSpec = load_doc(c.config.as_deref())?;
    spec.trials = c.trials.unwrap_or(spec.trials);
    spec.seed = c.seed.unwrap_or(spec.seed);
    let template = SpscQuery { distance_km: 1.0, alpha: spec.alpha, lambda_eve: 1.0, sigma: 0.0, gain_linear: 1.0, noise_psd: 1.0 };
    let cal = sagsin_harness::with_workers(|| {
        calibrate(&template, spec.fading, &spec.distance_bands_km, &spec.lambda_grid, spec.trials, spec.seed)
    })
    .map_err(core_err("calibrate"))?;
    emit(c.out.as_deref(), &(cal.to_json() + "\n"))
}

fn cmd_sweep(c: &Common) -> Result<(), Failure> {
    let path = c.config.as_deref().ok_or_else(|| Failure::from(HarnessError::Spec("sweep needs --config".into())))?;
    let mut spec = SweepSpec::load(path)?;
    if let Some(s) = c.seed {
        spec.seeds = vec![s];
    }
    if let Some(t) = c.trials {
        spec.trials = t;
    }
    if let Some(o) = &c.out {
        spec.output = Some(o.clone());
    }
    let rows = run_sweep(&spec)?;
    match &spec.output {
        Some(p) => println!("{}", json!({ "rows": rows.len(), "output": p.display().to_string() })),
        None => write_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn route_scenario(spec: &RouteSpec, base: Option<&Path>) -> Result<Scenario, Failure> {
    match &spec.nodes {
        Some(p) => {
            let p = match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p.clone(),
            };
            load_scenario(&p, &spec.scenario.layer_defaults()).map_err(core_err(&p.display().to_string()))
        }
        None => Ok(random_scenario(&spec.scenario)),
    }
}

fn load_route(c: &Common) -> Result<(RouteSpec, Network), Failure> {
    let mut spec: RouteSpec = load_doc(c.config.as_deref())?;
    if let Some(s) = c.seed {
        spec.scenario.seed = s;
    }
    if let Some(t) = c.trials {
        spec.solvers.bruteforce_trials = t;
    }
    spec.scenario.validate().map_err(core_err("scenario"))?;
    let scenario = route_scenario(&spec, c.config.as_deref().and_then(Path::parent))?;
    let net = Network::from_scenario(&scenario, &spec.scenario.eve_field, spec.scenario.tau).map_err(core_err("network"))?;
    Ok((spec, net))
}

fn cmd_route(c: &Common, method: Option<Method>, geojson: Option<&Path>) -> Result<(), Failure> {
    let (spec, net) = load_route(c)?;
    let method = method.unwrap_or(spec.method);
    let sol = sagsin_harness::with_workers(|| run_method(&net, method, &spec.solvers, spec.scenario.seed))
        .map_err(core_err(method.name()))?;
    let mut doc = sol.to_json(&net);
    doc["seed"] = json!(spec.scenario.seed);
    emit(c.out.as_deref(), &(serde_json::to_string_pretty(&doc).expect("solution serializes") + "\n"))?;
    if let Some(g) = geojson {
        emit(Some(g), &serde_json::to_string_pretty(&export_geojson(&sol, &net)).expect("geojson serializes"))?;
    }
    Ok(())
}

fn config_kind(text: &str) -> Option<&'static str> {
    if parse_doc::<serde_json::Value>(text).is_ok_and(|v| v.get("kind").is_some()) {
        return SweepSpec::parse(text).is_ok().then_some("sweep");
    }
    if text.trim_start().starts_with('{') && Calibration::from_json(text).is_ok() {
        return Some("calibration");
    }
    let scenario_ok = |s: &ScenarioConfig| s.validate().is_ok();
    if let Ok(r) = parse_doc::<RouteSpec>(text) {
        if scenario_ok(&r.scenario) {
            return Some("route");
        }
    }
    if parse_doc::<CalibrateSpec>(text).is_ok() {
        return Some("calibrate");
    }
    None
}

fn cmd_validate(c: &Common, solution: Option<&Path>) -> Result<(), Failure> {
    let Some(sol_path) = solution else {
        let path = c.config.as_deref().ok_or_else(|| Failure::from(HarnessError::Spec("validate needs --config".into())))?;
        let text = read(path)?;
        return match config_kind(&text) {
            Some(kind) => {
                println!("{}", json!({ "valid": true, "config": kind }));
                Ok(())
            }
            None => {
                let detail = SweepSpec::parse(&text).err().map(|e| e.to_string());
                Err(Failure { code: EXIT_INVALID, body: json!({ "error": "InvalidSpec", "message": detail, "context": path.display().to_string() }) })
            }
        };
    };
    let doc: serde_json::Value =
        serde_json::from_str(&read(sol_path)?).map_err(|e| Failure::from(HarnessError::Spec(e.to_string())))?;
    let mut common = c.clone();
    if common.seed.is_none() {
        common.seed = doc["seed"].as_u64();
    }
    let (_, net) = load_route(&common)?;
    let graph: RoutingGraph = serde_json::from_value(doc["graph"].clone())
        .map_err(|e| Failure::from(HarnessError::Spec(format!("solution graph: {e}"))))?;
    let tree = validate_spanning_tree(&graph);
    let range = range_violations(&net, &graph);
    let kkt = match tree.is_empty().then(|| allocate(&graph, &net)) {
        None => Err("skipped: not a tree".to_string()),
        Some(Ok(a)) => kkt_verify(&a, &graph, &net, 1e-6).map(|r| r.violations).map_err(|e| e.to_string()),
        Some(Err(e)) => Err(e.to_string()),
    };
    let clean = tree.is_empty() && range.is_empty() && kkt.as_ref().is_ok_and(|v| v.is_empty());
    let report = json!({
        "valid": clean,
        "tree_violations": tree,
        "range_violations": range,
        "kkt": match &kkt { Ok(v) => json!(v), Err(m) => json!({ "error": m }) },
    });
    println!("{report}");
    if clean {
        Ok(())
    } else {
        Err(Failure { code: EXIT_INVALID, body: json!({ "error": "InvalidSolution", "message": "solution failed validation", "context": sol_path.display().to_string() }) })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "Usage", "message": e.to_string().trim(), "context": null }));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match &cli.command {
        Command::Calibrate(c) => cmd_calibrate(c),
        Command::Sweep(c) => cmd_sweep(c),
        Command::Route { common, method, geojson } => cmd_route(common, *method, geojson.as_deref()),
        Command::Validate { common, solution } => cmd_validate(common, solution.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.body);
            ExitCode::from(f.code)
        }
    }
}
