//! Node snapshot files.
//!
//! CSV: header with `id,layer,lat,lon,alt_km` and optional `role`, `alpha`,
//! `p_max_dbm`, `p_min_dbm`, `bandwidth_hz`, and per-class overrides
//! `tx_gain_<class>`, `rx_gain_<class>`, `gt_<class>` where class is one of
//! `space`, `air`, `ground`, `sea`. JSON: an array of [`NodeRecord`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LayerDefaults, Scenario};
use crate::channel::{GeoPosition, LayerKind, NodeSpec, PerLayer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Root,
    #[default]
    Relay,
    User,
}

/// Sparse per-class override; absent classes keep the layer default.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub air: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sea: Option<f64>,
}

impl ClassOverride {
    fn full(v: &PerLayer<f64>) -> Self {
        ClassOverride { space: Some(v.space), air: Some(v.air), ground: Some(v.ground), sea: Some(v.sea) }
    }

    fn apply(&self, base: &mut PerLayer<f64>) {
        for (l, v) in [
            (LayerKind::Space, self.space),
            (LayerKind::Air, self.air),
            (LayerKind::Ground, self.ground),
            (LayerKind::Sea, self.sea),
        ] {
            if let Some(v) = v {
                base.set(l, v);
            }
        }
    }

    fn set(&mut self, layer: LayerKind, v: f64) {
        match layer {
            LayerKind::Space => self.space = Some(v),
            LayerKind::Air => self.air = Some(v),
            LayerKind::Ground => self.ground = Some(v),
            LayerKind::Sea => self.sea = Some(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub layer: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_km: f64,
    #[serde(default)]
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_gain_dbi: Option<ClassOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_gain_dbi: Option<ClassOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_to_noise_temp_dbk: Option<ClassOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_min_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
}

impl NodeRecord {
    pub fn to_spec(&self, defaults: &LayerDefaults) -> Result<NodeSpec> {
        let layer = LayerKind::parse(&self.layer)
            .ok_or_else(|| Error::InvalidInput(format!("unknown layer tag '{}'", self.layer)))?;
        let position = GeoPosition::new(self.latitude_deg, self.longitude_deg, self.altitude_km)?;
        let mut n = defaults.node(self.id, layer, position);
        if let Some(o) = &self.tx_gain_dbi {
            o.apply(&mut n.tx_gain_dbi);
        }
        if let Some(o) = &self.rx_gain_dbi {
            o.apply(&mut n.rx_gain_dbi);
        }
        if let Some(o) = &self.gain_to_noise_temp_dbk {
            o.apply(&mut n.gain_to_noise_temp_dbk);
        }
        if let Some(p) = self.p_max_dbm {
            let offset = n.p_min_dbm - n.p_max_dbm;
            n.p_max_dbm = p;
            n.p_min_dbm = p + offset;
        }
        n.alpha = self.alpha.unwrap_or(n.alpha);
        n.p_min_dbm = self.p_min_dbm.unwrap_or(n.p_min_dbm);
        n.bandwidth_hz = self.bandwidth_hz.unwrap_or(n.bandwidth_hz);
        n.validate()?;
        Ok(n)
    }

    /// Fully specified record for a node.
    pub fn from_spec(n: &NodeSpec, role: Role) -> Self {
        NodeRecord {
            id: n.id,
            layer: n.layer.tag().to_string(),
            latitude_deg: n.position.latitude_deg,
            longitude_deg: n.position.longitude_deg,
            altitude_km: n.position.altitude_km,
            role,
            tx_gain_dbi: Some(ClassOverride::full(&n.tx_gain_dbi)),
            rx_gain_dbi: Some(ClassOverride::full(&n.rx_gain_dbi)),
            gain_to_noise_temp_dbk: Some(ClassOverride::full(&n.gain_to_noise_temp_dbk)),
            alpha: Some(n.alpha),
            p_max_dbm: Some(n.p_max_dbm),
            p_min_dbm: Some(n.p_min_dbm),
            bandwidth_hz: Some(n.bandwidth_hz),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadReport {
    pub records: Vec<NodeRecord>,
    pub nodes: Vec<NodeSpec>,
    /// `row N: reason` for every rejected row (data rows count from 1).
    pub rejected: Vec<String>,
}

fn parse_csv(text: &str) -> (Vec<(usize, NodeRecord)>, Vec<String>) {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let headers = match reader.headers() {
        Ok(h) => h.iter().map(|s| s.to_ascii_lowercase()).collect::<Vec<_>>(),
        Err(e) => return (rows, vec![format!("header: {e}")]),
    };
    let col = |name: &str| headers.iter().position(|h| h == name);
    for required in ["id", "layer", "lat", "lon", "alt_km"] {
        if col(required).is_none() {
            errors.push(format!("header: missing column '{required}'"));
        }
    }
    if !errors.is_empty() {
        return (rows, errors);
    }
    for (k, rec) in reader.records().enumerate() {
        let row = k + 1;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                errors.push(format!("row {row}: {e}"));
                continue;
            }
        };
        let field = |name: &str| col(name).and_then(|i| rec.get(i)).filter(|s| !s.is_empty());
        let num = |name: &str| -> std::result::Result<Option<f64>, String> {
            field(name).map(|s| s.parse::<f64>().map_err(|_| format!("row {row}: bad {name} '{s}'"))).transpose()
        };
        let parsed = (|| -> std::result::Result<NodeRecord, String> {
            let id = field("id")
                .ok_or(format!("row {row}: missing id"))?
                .parse::<usize>()
                .map_err(|_| format!("row {row}: bad id"))?;
            let role = match field("role").map(|s| s.to_ascii_lowercase()) {
                None => Role::Relay,
                Some(s) if s == "root" => Role::Root,
                Some(s) if s == "relay" => Role::Relay,
                Some(s) if s == "user" => Role::User,
                Some(s) => return Err(format!("row {row}: unknown role '{s}'")),
            };
            let mut overrides = [ClassOverride::default(); 3];
            for (slot, prefix) in ["tx_gain_", "rx_gain_", "gt_"].iter().enumerate() {
                for l in LayerKind::ALL {
                    if let Some(v) = num(&format!("{prefix}{}", l.tag()))? {
                        overrides[slot].set(l, v);
                    }
                }
            }
            let opt = |o: ClassOverride| if o == ClassOverride::default() { None } else { Some(o) };
            Ok(NodeRecord {
                id,
                layer: field("layer").ok_or(format!("row {row}: missing layer"))?.to_string(),
                latitude_deg: num("lat")?.ok_or(format!("row {row}: missing lat"))?,
                longitude_deg: num("lon")?.ok_or(format!("row {row}: missing lon"))?,
                altitude_km: num("alt_km")?.ok_or(format!("row {row}: missing alt_km"))?,
                role,
                tx_gain_dbi: opt(overrides[0]),
                rx_gain_dbi: opt(overrides[1]),
                gain_to_noise_temp_dbk: opt(overrides[2]),
                alpha: num("alpha")?,
                p_max_dbm: num("p_max_dbm")?,
                p_min_dbm: num("p_min_dbm")?,
                bandwidth_hz: num("bandwidth_hz")?,
            })
        })();
        match parsed {
            Ok(r) => rows.push((row, r)),
            Err(e) => errors.push(e),
        }
    }
    (rows, errors)
}

fn parse_json(text: &str) -> (Vec<(usize, NodeRecord)>, Vec<String>) {
    let values: Vec<serde_json::Value> = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return (Vec::new(), vec![format!("document: {e}")]),
    };
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (k, v) in values.into_iter().enumerate() {
        match serde_json::from_value::<NodeRecord>(v) {
            Ok(r) => rows.push((k + 1, r)),
            Err(e) => errors.push(format!("row {}: {e}", k + 1)),
        }
    }
    (rows, errors)
}

/// Parses every row, keeping the valid ones and describing the rest.
pub fn load_nodes_report(path: &Path, defaults: &LayerDefaults) -> Result<LoadReport> {
    let text = std::fs::read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('[');
    nodes_report_from_text(&text, is_json, defaults)
}

/// [`load_nodes_report`] on in-memory CSV or JSON text.
pub fn nodes_report_from_text(text: &str, is_json: bool, defaults: &LayerDefaults) -> Result<LoadReport> {
    let (rows, mut rejected) = if text.trim().is_empty() {
        (Vec::new(), Vec::new())
    } else if is_json {
        parse_json(text)
    } else {
        parse_csv(text)
    };
    let mut records = Vec::new();
    let mut nodes = Vec::new();
    for (row, r) in rows {
        match r.to_spec(defaults) {
            Ok(n) => {
                nodes.push(n);
                records.push(r);
            }
            Err(e) => rejected.push(format!("row {row}: {e}")),
        }
    }
    if nodes.is_empty() && rejected.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(LoadReport { records, nodes, rejected })
}

/// Strict loader: any malformed row is a [`Error::ParseError`].
pub fn load_nodes(path: &Path, defaults: &LayerDefaults) -> Result<Vec<NodeSpec>> {
    let report = load_nodes_report(path, defaults)?;
    if !report.rejected.is_empty() {
        return Err(Error::ParseError(report.rejected));
    }
    Ok(report.nodes)
}

/// Loads a snapshot with roles. The root is the row marked `root`, else the
/// row with id 0; rows marked `user` become users. Ids are renumbered.
pub fn load_scenario(path: &Path, defaults: &LayerDefaults) -> Result<Scenario> {
    scenario_from_report(load_nodes_report(path, defaults)?)
}

/// [`load_scenario`] on in-memory CSV or JSON text.
pub fn scenario_from_text(text: &str, is_json: bool, defaults: &LayerDefaults) -> Result<Scenario> {
    scenario_from_report(nodes_report_from_text(text, is_json, defaults)?)
}

fn scenario_from_report(report: LoadReport) -> Result<Scenario> {
    if !report.rejected.is_empty() {
        return Err(Error::ParseError(report.rejected));
    }
    let mut relays = Vec::new();
    let mut users = Vec::new();
    let mut root = None;
    let mut fallback_root = None;
    for (rec, node) in report.records.iter().zip(report.nodes) {
        match rec.role {
            Role::User => users.push(node),
            role => {
                if role == Role::Root && root.is_none() {
                    root = Some(relays.len());
                }
                if rec.id == 0 {
                    fallback_root = Some(relays.len());
                }
                relays.push(node);
            }
        }
    }
    Ok(Scenario::assemble(relays, root.or(fallback_root), users))
}

fn role_of(s: &Scenario, id: usize) -> Role {
    if s.root == Some(id) {
        Role::Root
    } else if s.users.contains(&id) {
        Role::User
    } else {
        Role::Relay
    }
}

pub fn write_nodes_json(s: &Scenario) -> String {
    let records: Vec<NodeRecord> = s.nodes.iter().map(|n| NodeRecord::from_spec(n, role_of(s, n.id))).collect();
    serde_json::to_string_pretty(&records).expect("records serialize")
}

pub fn write_nodes_csv(s: &Scenario) -> String {
    let mut header = vec!["id", "layer", "lat", "lon", "alt_km", "role", "alpha", "p_max_dbm", "p_min_dbm", "bandwidth_hz"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    for prefix in ["tx_gain_", "rx_gain_", "gt_"] {
        for l in LayerKind::ALL {
            header.push(format!("{prefix}{}", l.tag()));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for n in &s.nodes {
        let role = match role_of(s, n.id) {
            Role::Root => "root",
            Role::Relay => "relay",
            Role::User => "user",
        };
        let mut row = vec![
            n.id.to_string(),
            n.layer.tag().to_string(),
            n.position.latitude_deg.to_string(),
            n.position.longitude_deg.to_string(),
            n.position.altitude_km.to_string(),
            role.to_string(),
            n.alpha.to_string(),
            n.p_max_dbm.to_string(),
            n.p_min_dbm.to_string(),
            n.bandwidth_hz.to_string(),
        ];
        for g in [&n.tx_gain_dbi, &n.rx_gain_dbi, &n.gain_to_noise_temp_dbk] {
            for l in LayerKind::ALL {
                row.push(g.get(l).to_string());
            }
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbed::{layer_defaults, random_scenario, ScenarioConfig};
    use std::io::Write;

    fn file(ext: &str, body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        let f = file(".csv", "");
        assert_eq!(load_nodes(f.path(), &layer_defaults()), Err(Error::EmptyDataset));
        let f = file(".csv", "id,layer,lat,lon,alt_km\n");
        assert_eq!(load_nodes(f.path(), &layer_defaults()), Err(Error::EmptyDataset));
    }

    #[test]
    fn ground_row_gets_table_defaults() {
        let f = file(".csv", "id,layer,lat,lon,alt_km\n0,ground,-25.9,32.6,0\n");
        let n = &load_nodes(f.path(), &layer_defaults()).unwrap()[0];
        assert_eq!((n.alpha, n.p_max_dbm, n.bandwidth_hz), (2.8, 30.0, 250e6));
    }

    #[test]
    fn leo_row_gets_table_defaults() {
        let f = file(".csv", "id,layer,lat,lon,alt_km\n3,leo,-20,40,550\n");
        let n = &load_nodes(f.path(), &layer_defaults()).unwrap()[0];
        assert_eq!((n.alpha, n.p_max_dbm, n.bandwidth_hz), (2.4, 21.5, 400e6));
    }

    #[test]
    fn malformed_rows_are_reported_by_number() {
        let f = file(".csv", "id,layer,lat,lon,alt_km\n0,ground,1,2,0\n1,moon,1,2,0\n2,sea,x,2,0\n");
        match load_nodes(f.path(), &layer_defaults()) {
            Err(Error::ParseError(rows)) => {
                assert_eq!(rows.len(), 2);
                assert!(rows.iter().any(|r| r.starts_with("row 2")));
                assert!(rows.iter().any(|r| r.starts_with("row 3")));
            }
            other => panic!("{other:?}"),
        }
        let report = load_nodes_report(f.path(), &layer_defaults()).unwrap();
        assert_eq!(report.nodes.len(), 1);
    }

    #[test]
    fn csv_overrides_apply_per_class() {
        let f = file(".csv", "id,layer,lat,lon,alt_km,tx_gain_space,alpha\n0,sea,1,2,0,40,3.1\n");
        let n = &load_nodes(f.path(), &layer_defaults()).unwrap()[0];
        assert_eq!((n.tx_gain_dbi.space, n.tx_gain_dbi.sea, n.alpha), (40.0, 25.0, 3.1));
    }

    #[test]
    fn json_and_csv_round_trips() {
        let s = random_scenario(&ScenarioConfig { seed: 5, ..Default::default() });
        let j = file(".json", &write_nodes_json(&s));
        assert_eq!(load_scenario(j.path(), &layer_defaults()).unwrap(), s);
        let c = file(".csv", &write_nodes_csv(&s));
        assert_eq!(load_scenario(c.path(), &layer_defaults()).unwrap(), s);
    }

    #[test]
    fn bundled_fixture_loads() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/mozambique_channel_sample.csv");
        let s = load_scenario(&path, &layer_defaults()).unwrap();
        assert_eq!(s.root, Some(0));
        assert!(!s.users.is_empty());
    }
}
