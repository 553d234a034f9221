//! Sweep specification files (TOML or JSON).

use std::path::{Path, PathBuf};

use sagsin_core::channel::LayerKind;
use sagsin_core::secrecy::{FadingModel, MIN_MC_TRIALS};
use sagsin_core::testbed::ScenarioConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::method::{Method, Solvers};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Grid: Eve density (km⁻²), one row group per entry of `distances_km`.
    SpscVsDensity,
    /// Grid: link distance (km) at `lambda_eve`.
    SpscVsDistance,
    /// Grid: link distance (km) at `lambda_eve` and the scenario τ.
    JammingVsDistance,
    /// Grid: τ.
    ThroughputVsTau,
    /// Grid: multiplier on the Eve density of `layer` (all layers if unset).
    ThroughputVsDensity,
    /// Grid: p_min / p_max.
    ThroughputVsPmin,
    /// Grid: Eve density multiplier on a node snapshot.
    TestbedDemo,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SpscVsDensity => "spsc_vs_density",
            ExperimentKind::SpscVsDistance => "spsc_vs_distance",
            ExperimentKind::JammingVsDistance => "jamming_vs_distance",
            ExperimentKind::ThroughputVsTau => "throughput_vs_tau",
            ExperimentKind::ThroughputVsDensity => "throughput_vs_density",
            ExperimentKind::ThroughputVsPmin => "throughput_vs_pmin",
            ExperimentKind::TestbedDemo => "testbed_demo",
        }
    }

    pub fn is_spsc(self) -> bool {
        matches!(
            self,
            ExperimentKind::SpscVsDensity | ExperimentKind::SpscVsDistance | ExperimentKind::JammingVsDistance
        )
    }
}

fn default_trials() -> usize {
    20_000
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_distances() -> Vec<f64> {
    vec![50.0, 100.0, 200.0, 400.0]
}

fn default_lambda() -> f64 {
    1e-5
}

fn default_alpha() -> f64 {
    2.8
}

fn default_fading() -> FadingModel {
    FadingModel::Rayleigh
}

fn default_rel_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: ExperimentKind,
    pub grid: Vec<f64>,
    /// Monte-Carlo trials per SPSC estimate.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Base scenario for throughput sweeps; its τ and Eve field also apply to
    /// the SPSC sweeps.
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default = "Method::defaults")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub solvers: Solvers,
    #[serde(default = "default_distances")]
    pub distances_km: Vec<f64>,
    #[serde(default = "default_lambda")]
    pub lambda_eve: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_fading")]
    pub fading: FadingModel,
    /// Relative bisection tolerance of the Monte-Carlo jamming inversion.
    #[serde(default = "default_rel_tol")]
    pub jamming_rel_tol: f64,
    #[serde(default)]
    pub layer: Option<LayerKind>,
    /// Node snapshot for `testbed_demo`; the bundled snapshot when unset.
    #[serde(default)]
    pub nodes: Option<PathBuf>,
    /// Writes one GeoJSON file per `testbed_demo` run into this directory.
    #[serde(default)]
    pub geojson_dir: Option<PathBuf>,
}

impl SweepSpec {
    pub fn new(kind: ExperimentKind, grid: Vec<f64>) -> Self {
        SweepSpec {
            kind,
            grid,
            trials: default_trials(),
            seeds: default_seeds(),
            output: None,
            scenario: ScenarioConfig::default(),
            methods: Method::defaults(),
            solvers: Solvers::default(),
            distances_km: default_distances(),
            lambda_eve: default_lambda(),
            alpha: default_alpha(),
            fading: default_fading(),
            jamming_rel_tol: default_rel_tol(),
            layer: None,
            nodes: None,
            geojson_dir: None,
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let spec: SweepSpec = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| HarnessError::Spec(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| HarnessError::Spec(e.to_string()))?
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut spec = Self::parse(&text)?;
        // Relative paths inside the file resolve against its directory.
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut spec.output, &mut spec.nodes, &mut spec.geojson_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Spec(m));
        if self.grid.is_empty() {
            return bad("grid is empty".into());
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return bad("grid values must be finite".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds is empty".into());
        }
        if self.kind.is_spsc() {
            if self.trials < MIN_MC_TRIALS {
                return bad(format!("SPSC sweeps need at least {MIN_MC_TRIALS} trials, got {}", self.trials));
            }
            if self.kind == ExperimentKind::SpscVsDensity && self.distances_km.is_empty() {
                return bad("distances_km is empty".into());
            }
        } else if self.methods.is_empty() {
            return bad("methods is empty".into());
        }
        self.scenario.validate().map_err(|e| HarnessError::Spec(e.to_string()))?;
        self.fading.validate().map_err(|e| HarnessError::Spec(e.to_string()))?;
        let positive = match self.kind {
            ExperimentKind::ThroughputVsTau => self.grid.iter().all(|&t| t > 0.0 && t < 1.0),
            ExperimentKind::ThroughputVsPmin => self.grid.iter().all(|&r| (0.0..=1.0).contains(&r)),
            _ => self.grid.iter().all(|&x| x > 0.0),
        };
        if !positive {
            return bad(format!("grid values out of range for {}", self.kind.name()));
        }
        Ok(())
    }
}
