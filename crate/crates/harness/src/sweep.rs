//! Sweep execution and CSV output.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use sagsin_core::channel::{link_budget, watts_to_dbm, GeoPosition, LayerKind};
use sagsin_core::routing::Network;
use sagsin_core::secrecy::{
    default_region_radius, min_jamming_calibrated, min_jamming_closed_form, min_jamming_monte_carlo,
    spsc_calibrated, spsc_closed_form, spsc_monte_carlo, EveField, SpscQuery,
};
use sagsin_core::testbed::{bundled_testbed, load_scenario, random_scenario, Scenario, ScenarioConfig};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::geojson::export_geojson;
use crate::method::run_method;
use crate::pool::{with_worker_count, worker_count};
use crate::spec::{ExperimentKind, SweepSpec};

/// One CSV row. `wall_ms` is the only column that varies between runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: String,
    /// Grid value.
    pub x: f64,
    /// Second coordinate: link distance for `spsc_vs_density`, Eve density
    /// for the distance sweeps, empty otherwise.
    pub aux: Option<f64>,
    pub seed: u64,
    pub method: String,
    /// SPSC probability, jamming power (dBm) or min-throughput (bit/s).
    pub value: f64,
    pub std_error: Option<f64>,
    pub unserved: Option<usize>,
    pub wall_ms: f64,
}

pub const WALL_COLUMN: &str = "wall_ms";

/// Runs every grid point and seed on the worker pool; rows come back in grid
/// order, then seed order, then method order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    run_sweep_with(spec, worker_count())
}

/// [`run_sweep`] with an explicit worker count (`None`: rayon default).
pub fn run_sweep_with(spec: &SweepSpec, workers: Option<usize>) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let jobs: Vec<(f64, u64)> = spec.grid.iter().flat_map(|&x| spec.seeds.iter().map(move |&s| (x, s))).collect();
    let testbed = if spec.kind == ExperimentKind::TestbedDemo { Some(load_testbed(spec)?) } else { None };
    let chunks: Vec<Result<Vec<SweepRow>>> = with_worker_count(workers, || {
        jobs.par_iter()
            .map(|&(x, seed)| match spec.kind {
                ExperimentKind::SpscVsDensity => spsc_rows(spec, x, seed),
                ExperimentKind::SpscVsDistance => spsc_rows(spec, x, seed),
                ExperimentKind::JammingVsDistance => jamming_rows(spec, x, seed),
                ExperimentKind::TestbedDemo => testbed_rows(spec, testbed.as_ref().expect("loaded above"), x, seed),
                _ => throughput_rows(spec, x, seed),
            })
            .collect()
    });
    let mut rows = Vec::new();
    for c in chunks {
        rows.extend(c?);
    }
    if let Some(path) = &spec.output {
        write_csv_file(path, &rows)?;
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush().map_err(|e| HarnessError::Csv(e.to_string()))?;
    Ok(())
}

pub fn write_csv_file(path: &Path, rows: &[SweepRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_csv(std::io::BufWriter::new(f), rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

fn context(spec: &SweepSpec, x: f64, seed: u64) -> String {
    format!("{} at x={x}, seed={seed}", spec.kind.name())
}

/// Ground-to-ground link template with the spec's exponent and no jamming.
pub fn spsc_template(spec: &SweepSpec, distance_km: f64, lambda_eve: f64) -> Result<SpscQuery> {
    let defaults = spec.scenario.layer_defaults();
    let origin = GeoPosition::new(0.0, 0.0, 0.0).expect("valid origin");
    let tx = defaults.node(0, LayerKind::Ground, origin);
    let far = GeoPosition::new(0.0, 1.0, 0.0).expect("valid position");
    let rx = defaults.node(1, LayerKind::Ground, far);
    let b = link_budget(&tx, &rx).map_err(|e| HarnessError::core("link template", e))?;
    Ok(SpscQuery {
        distance_km,
        alpha: spec.alpha,
        lambda_eve,
        sigma: 0.0,
        gain_linear: b.gain_linear,
        noise_psd: b.noise_psd,
    })
}

fn spsc_rows(spec: &SweepSpec, x: f64, seed: u64) -> Result<Vec<SweepRow>> {
    let points: Vec<(f64, f64)> = match spec.kind {
        ExperimentKind::SpscVsDensity => spec.distances_km.iter().map(|&d| (d, x)).collect(),
        _ => vec![(x, spec.lambda_eve)],
    };
    let ctx = context(spec, x, seed);
    let mut rows = Vec::new();
    for (d, lam) in points {
        let q = spsc_template(spec, d, lam)?;
        let aux = if spec.kind == ExperimentKind::SpscVsDensity { d } else { lam };
        let t0 = Instant::now();
        let mc = spsc_monte_carlo(&q, spec.fading, spec.trials, default_region_radius(d), seed)
            .map_err(|e| HarnessError::core(&ctx, e))?;
        let t_mc = ms(t0);
        let t0 = Instant::now();
        let cf = spsc_closed_form(&q).map_err(|e| HarnessError::core(&ctx, e))?;
        let t_cf = ms(t0);
        let t0 = Instant::now();
        let cal = spsc_calibrated(&q, &spec.scenario.eve_field).map_err(|e| HarnessError::core(&ctx, e))?;
        let t_cal = ms(t0);
        for (method, value, se, wall) in [
            ("monte_carlo", mc.probability, Some(mc.std_error), t_mc),
            ("closed_form", cf, None, t_cf),
            ("calibrated", cal, None, t_cal),
        ] {
            rows.push(row(spec, x, Some(aux), seed, method, value, se, None, wall));
        }
    }
    Ok(rows)
}

fn jamming_rows(spec: &SweepSpec, d: f64, seed: u64) -> Result<Vec<SweepRow>> {
    let ctx = context(spec, d, seed);
    let q = spsc_template(spec, d, spec.lambda_eve)?;
    let tau = spec.scenario.tau;
    let bandwidth = spec.scenario.bandwidth_hz.ground;
    let to_dbm = |sigma: f64| watts_to_dbm(sigma * bandwidth);
    let t0 = Instant::now();
    let cf = min_jamming_closed_form(d, q.alpha, q.lambda_eve, q.gain_linear, q.noise_psd, tau)
        .map_err(|e| HarnessError::core(&ctx, e))?;
    let t_cf = ms(t0);
    let t0 = Instant::now();
    let cal = min_jamming_calibrated(&q, &spec.scenario.eve_field, tau).map_err(|e| HarnessError::core(&ctx, e))?;
    let t_cal = ms(t0);
    let t0 = Instant::now();
    let mc = min_jamming_monte_carlo(&q, spec.fading, tau, spec.trials, default_region_radius(d), seed, spec.jamming_rel_tol)
        .map_err(|e| HarnessError::core(&ctx, e))?;
    let t_mc = ms(t0);
    Ok(vec![
        row(spec, d, Some(spec.lambda_eve), seed, "monte_carlo", to_dbm(mc), None, None, t_mc),
        row(spec, d, Some(spec.lambda_eve), seed, "closed_form", to_dbm(cf), None, None, t_cf),
        row(spec, d, Some(spec.lambda_eve), seed, "calibrated", to_dbm(cal), None, None, t_cal),
    ])
}

/// Scenario config of one throughput grid point.
pub fn grid_config(spec: &SweepSpec, x: f64, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig { seed, ..spec.scenario.clone() };
    match spec.kind {
        ExperimentKind::ThroughputVsTau => cfg.tau = x,
        ExperimentKind::ThroughputVsPmin => cfg.p_min_ratio = x,
        ExperimentKind::ThroughputVsDensity | ExperimentKind::TestbedDemo => cfg.eve_field = scale_field(&cfg.eve_field, spec.layer, x),
        _ => {}
    }
    cfg
}

pub fn scale_field(field: &EveField, layer: Option<LayerKind>, factor: f64) -> EveField {
    match layer {
        None => field.scaled(factor),
        Some(l) => {
            let mut f = field.clone();
            f.density_per_layer.set(l, f.density_per_layer.get(l) * factor);
            f
        }
    }
}

fn throughput_rows(spec: &SweepSpec, x: f64, seed: u64) -> Result<Vec<SweepRow>> {
    let cfg = grid_config(spec, x, seed);
    let scenario = random_scenario(&cfg);
    route_rows(spec, &scenario, &cfg, x, seed).map(|(rows, _)| rows)
}

fn load_testbed(spec: &SweepSpec) -> Result<Scenario> {
    let defaults = spec.scenario.layer_defaults();
    match &spec.nodes {
        Some(p) => load_scenario(p, &defaults).map_err(|e| HarnessError::core(p.display().to_string(), e)),
        None => bundled_testbed(&defaults).map_err(|e| HarnessError::core("bundled testbed", e)),
    }
}

fn testbed_rows(spec: &SweepSpec, scenario: &Scenario, x: f64, seed: u64) -> Result<Vec<SweepRow>> {
    let cfg = grid_config(spec, x, seed);
    let (rows, outputs) = route_rows(spec, scenario, &cfg, x, seed)?;
    if let Some(dir) = &spec.geojson_dir {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for (name, doc) in outputs {
            let path = dir.join(format!("{}_x{x}_seed{seed}_{name}.geojson", spec.kind.name()));
            let text = serde_json::to_string_pretty(&doc).expect("geojson serializes");
            std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
        }
    }
    Ok(rows)
}

type GeoOutputs = Vec<(String, serde_json::Value)>;

fn route_rows(
    spec: &SweepSpec,
    scenario: &Scenario,
    cfg: &ScenarioConfig,
    x: f64,
    seed: u64,
) -> Result<(Vec<SweepRow>, GeoOutputs)> {
    let ctx = context(spec, x, seed);
    let net = match Network::from_scenario(scenario, &cfg.eve_field, cfg.tau) {
        Ok(n) => n,
        Err(e) => return Err(HarnessError::core(&ctx, e)),
    };
    let mut rows = Vec::new();
    let mut docs = Vec::new();
    for &m in &spec.methods {
        let t0 = Instant::now();
        let (value, unserved) = match run_method(&net, m, &spec.solvers, seed) {
            Ok(sol) => {
                if spec.geojson_dir.is_some() {
                    docs.push((m.name().to_string(), export_geojson(&sol, &net)));
                }
                (sol.min_throughput_bps, sol.unserved.len())
            }
            // No relay tree reaches every user: the min-throughput is zero.
            Err(sagsin_core::Error::Unreachable(_)) | Err(sagsin_core::Error::NoFeasibleTree(_)) => {
                (0.0, net.disconnected_users().len())
            }
            Err(e) => return Err(HarnessError::core(format!("{ctx}, method {m}"), e)),
        };
        rows.push(row(spec, x, None, seed, m.name(), value, None, Some(unserved), ms(t0)));
    }
    Ok((rows, docs))
}

#[allow(clippy::too_many_arguments)]
fn row(
    spec: &SweepSpec,
    x: f64,
    aux: Option<f64>,
    seed: u64,
    method: &str,
    value: f64,
    std_error: Option<f64>,
    unserved: Option<usize>,
    wall_ms: f64,
) -> SweepRow {
    SweepRow { kind: spec.kind.name().into(), x, aux, seed, method: method.into(), value, std_error, unserved, wall_ms }
}

fn ms(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e3
}
