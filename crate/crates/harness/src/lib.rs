//! Experiment sweeps, GeoJSON export and the `sagsin` command-line driver.

pub mod error;
pub mod geojson;
pub mod method;
pub mod pool;
pub mod spec;
pub mod sweep;

pub use error::{HarnessError, Result};
pub use geojson::{bottleneck_node, export_geojson, longest_path_user, node_rates};
pub use method::{run_method, Method, Solvers};
pub use pool::{with_worker_count, with_workers, worker_count, WORKERS_ENV};
pub use spec::{ExperimentKind, SweepSpec};
pub use sweep::{
    grid_config, read_csv, run_sweep, run_sweep_with, scale_field, spsc_template, write_csv, write_csv_file, SweepRow,
    WALL_COLUMN,
};
