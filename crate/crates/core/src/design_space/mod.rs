//! Design spaces: module declarations plus the allowed-connection matrix over
//! module ports, and concrete wirings (configurations) drawn from it.
//!
//! A design-space file is JSON:
//!
//! ```json
//! {
//!   "name": "example",
//!   "default_latency_s": { "weighing": 1.0 },
//!   "modules": [
//!     { "id": "origin1", "kind": "origin", "lane": 0 },
//!     { "id": "weighing1", "kind": "weighing", "lane": 0 },
//!     { "id": "strips", "kind": "destination", "tag": "fillet-strips" }
//!   ],
//!   "connections": [["origin1.out", "weighing1.in"], ["weighing1.out", "strips.in"]]
//! }
//! ```
//!
//! Omitted port lists take the kind's defaults (`in`, `out`, `out1`/`out2`
//! for distributors). A trimming module may declare a second out-port named
//! `trim`; it carries removed trim mass and never fillets.

mod canonical;
mod enumerate;
mod routes;

pub use canonical::{deduplicate, CanonicalKey, DedupClass};
pub use enumerate::{enumerate, Enumerator};
pub use routes::{derive_routes, LaneRoutes, RouteCatalog};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::{DestinationTag, ModuleKind};

pub const DEFAULT_LATENCY_S: f64 = 1.0;
pub const TRIM_PORT: &str = "trim";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDecl {
    pub id: String,
    pub kind: ModuleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lane: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<DestinationTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_ports: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_ports: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_s: Option<f64>,
    /// Configurations that leave this module unconnected are invalid.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub required: bool,
}

/// Serialized form of a design space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpaceFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub default_latency_s: BTreeMap<ModuleKind, f64>,
    pub modules: Vec<ModuleDecl>,
    /// Allowed connections as `["module.out_port", "module.in_port"]` pairs.
    pub connections: Vec<(String, String)>,
}

/// A resolved module.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleSpec {
    pub id: String,
    pub kind: ModuleKind,
    pub lane: Option<usize>,
    pub tag: Option<DestinationTag>,
    pub in_ports: Vec<String>,
    pub out_ports: Vec<String>,
    pub latency_s: f64,
    pub required: bool,
}

impl ModuleSpec {
    /// Whether out-port `index` carries fillets (as opposed to trim mass).
    pub fn is_flow_port(&self, index: usize) -> bool {
        !(self.kind == ModuleKind::Trimming && self.out_ports[index] == TRIM_PORT)
    }

    pub fn trim_port(&self) -> Option<usize> {
        (self.kind == ModuleKind::Trimming)
            .then(|| self.out_ports.iter().position(|p| p == TRIM_PORT))
            .flatten()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Port {
    pub module: usize,
    pub index: usize,
}

/// Boolean matrix: element (i, j) allows out-port i to connect to in-port j.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpaceMatrix {
    pub out_ports: Vec<Port>,
    pub in_ports: Vec<Port>,
    rows: Vec<Vec<usize>>,
}

impl DesignSpaceMatrix {
    pub fn allowed(&self, out_port: usize, in_port: usize) -> bool {
        self.rows[out_port].binary_search(&in_port).is_ok()
    }

    /// Allowed in-ports for `out_port`, ascending.
    pub fn row(&self, out_port: usize) -> &[usize] {
        &self.rows[out_port]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.out_ports.len(), self.in_ports.len())
    }

    pub fn allowed_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpace {
    pub name: String,
    pub modules: Vec<ModuleSpec>,
    pub matrix: DesignSpaceMatrix,
    /// Module index of each lane's origin.
    pub origins: Vec<usize>,
    out_base: Vec<usize>,
    in_base: Vec<usize>,
    source: DesignSpaceFile,
}

fn default_ports(kind: ModuleKind) -> (Vec<String>, Vec<String>) {
    let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match kind {
        ModuleKind::Origin => (vec![], v(&["out"])),
        ModuleKind::Weighing | ModuleKind::Assignment | ModuleKind::Trimming => (v(&["in"]), v(&["out"])),
        ModuleKind::Distribution => (v(&["in"]), v(&["out1", "out2"])),
        ModuleKind::Destination => (v(&["in"]), vec![]),
    }
}

impl DesignSpaceFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Resolves the file into a design space, collecting every violation
    /// instead of stopping at the first one.
    pub fn build(&self) -> (Option<DesignSpace>, Vec<String>) {
        let mut violations = Vec::new();
        let mut modules = Vec::with_capacity(self.modules.len());
        let mut ids = HashMap::new();
        for (i, decl) in self.modules.iter().enumerate() {
            if ids.insert(decl.id.clone(), i).is_some() {
                violations.push(format!("modules[{i}]: duplicate module id {:?}", decl.id));
            }
            let (din, dout) = default_ports(decl.kind);
            let in_ports = decl.in_ports.clone().unwrap_or(din);
            let out_ports = decl.out_ports.clone().unwrap_or(dout);
            let latency_s = decl
                .latency_s
                .or_else(|| self.default_latency_s.get(&decl.kind).copied())
                .unwrap_or(if decl.kind == ModuleKind::Destination { 0.0 } else { DEFAULT_LATENCY_S });
            let spec = ModuleSpec {
                id: decl.id.clone(),
                kind: decl.kind,
                lane: decl.lane,
                tag: decl.tag,
                in_ports,
                out_ports,
                latency_s,
                required: decl.required || decl.kind == ModuleKind::Origin,
            };
            if let Err(msg) = check_module_shape(&spec) {
                violations.push(format!("module {}: {msg}", spec.id));
            }
            modules.push(spec);
        }

        let mut origins: Vec<(usize, usize)> = modules
            .iter()
            .enumerate()
            .filter(|(_, m)| m.kind == ModuleKind::Origin)
            .filter_map(|(i, m)| m.lane.map(|l| (l, i)))
            .collect();
        origins.sort_unstable();
        if origins.is_empty() {
            violations.push("no origin modules".into());
        }
        for (expect, (lane, _)) in origins.iter().enumerate() {
            if *lane != expect {
                violations.push(format!("origin lanes must be 0..{} with one origin each", origins.len()));
                break;
            }
        }
        let mut tags = BTreeSet::new();
        for m in modules.iter().filter(|m| m.kind == ModuleKind::Destination) {
            if let Some(tag) = m.tag {
                if !tags.insert(tag) {
                    violations.push(format!("module {}: destination tag {tag} used twice", m.id));
                }
            }
        }

        let mut out_base = Vec::with_capacity(modules.len());
        let mut in_base = Vec::with_capacity(modules.len());
        let (mut out_ports, mut in_ports) = (Vec::new(), Vec::new());
        let mut out_lookup = HashMap::new();
        let mut in_lookup = HashMap::new();
        for (mi, m) in modules.iter().enumerate() {
            out_base.push(out_ports.len());
            in_base.push(in_ports.len());
            for (pi, p) in m.out_ports.iter().enumerate() {
                out_lookup.insert(format!("{}.{p}", m.id), out_ports.len());
                out_ports.push(Port { module: mi, index: pi });
            }
            for (pi, p) in m.in_ports.iter().enumerate() {
                in_lookup.insert(format!("{}.{p}", m.id), in_ports.len());
                in_ports.push(Port { module: mi, index: pi });
            }
        }
        let mut rows = vec![Vec::new(); out_ports.len()];
        for (k, (from, to)) in self.connections.iter().enumerate() {
            match (out_lookup.get(from), in_lookup.get(to)) {
                (Some(&i), Some(&j)) => {
                    let (src, dst) = (&modules[out_ports[i].module], &modules[in_ports[j].module]);
                    if !src.is_flow_port(out_ports[i].index) && dst.tag != Some(DestinationTag::Trim) {
                        violations.push(format!("connections[{k}]: trim port {from} must feed a trim destination"));
                    }
                    if out_ports[i].module == in_ports[j].module {
                        violations.push(format!("connections[{k}]: self-loop {from} -> {to}"));
                    }
                    rows[i].push(j);
                }
                (None, _) => violations.push(format!("connections[{k}]: unknown out-port {from:?}")),
                (_, None) => violations.push(format!("connections[{k}]: unknown in-port {to:?}")),
            }
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        for (i, row) in rows.iter().enumerate() {
            if row.is_empty() {
                let p = out_ports[i];
                violations.push(format!(
                    "matrix row {}.{} has no allowed connection",
                    modules[p.module].id, modules[p.module].out_ports[p.index]
                ));
            }
        }

        if !violations.is_empty() {
            return (None, violations);
        }
        let space = DesignSpace {
            name: self.name.clone(),
            origins: origins.into_iter().map(|(_, i)| i).collect(),
            modules,
            matrix: DesignSpaceMatrix {
                out_ports,
                in_ports,
                rows,
            },
            out_base,
            in_base,
            source: self.clone(),
        };
        (Some(space), violations)
    }
}

fn check_module_shape(m: &ModuleSpec) -> std::result::Result<(), String> {
    let (ni, no) = (m.in_ports.len(), m.out_ports.len());
    let ok = match m.kind {
        ModuleKind::Origin => ni == 0 && no == 1,
        ModuleKind::Weighing | ModuleKind::Assignment => ni == 1 && no == 1,
        ModuleKind::Trimming => {
            ni == 1 && (no == 1 && m.out_ports[0] != TRIM_PORT || no == 2 && m.out_ports[0] != TRIM_PORT && m.out_ports[1] == TRIM_PORT)
        }
        ModuleKind::Distribution => ni == 1 && no == 2,
        ModuleKind::Destination => ni >= 1 && no == 0,
    };
    if !ok {
        return Err(format!("{} with {ni} in-ports and {no} out-ports", m.kind));
    }
    if m.kind == ModuleKind::Origin && m.lane.is_none() {
        return Err("origin without a lane".into());
    }
    if (m.kind == ModuleKind::Destination) != m.tag.is_some() {
        return Err("exactly destinations carry a tag".into());
    }
    if !(m.latency_s.is_finite() && m.latency_s >= 0.0) {
        return Err(format!("latency must be >= 0, got {}", m.latency_s));
    }
    let mut names = BTreeSet::new();
    if !m.in_ports.iter().all(|p| names.insert(("in", p))) || !m.out_ports.iter().all(|p| names.insert(("out", p))) {
        return Err("duplicate port name".into());
    }
    Ok(())
}

impl DesignSpace {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = DesignSpaceFile::load(path)?;
        Self::from_file(file, path)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DesignSpaceFile = serde_json::from_str(text).map_err(|source| Error::Json {
            path: PathBuf::from("<inline>"),
            source,
        })?;
        Self::from_file(file, Path::new("<inline>"))
    }

    fn from_file(file: DesignSpaceFile, path: &Path) -> Result<Self> {
        match file.build() {
            (Some(space), _) => Ok(space),
            (None, violations) => Err(Error::invalid(
                path.display().to_string(),
                "design space",
                violations.join("; "),
            )),
        }
    }

    pub fn file(&self) -> &DesignSpaceFile {
        &self.source
    }

    pub fn lane_count(&self) -> usize {
        self.origins.len()
    }

    pub fn out_port(&self, module: usize, index: usize) -> usize {
        self.out_base[module] + index
    }

    pub fn in_port(&self, module: usize, index: usize) -> usize {
        self.in_base[module] + index
    }

    pub fn module_index(&self, id: &str) -> Option<usize> {
        self.modules.iter().position(|m| m.id == id)
    }

    pub fn out_port_name(&self, out_port: usize) -> String {
        let p = self.matrix.out_ports[out_port];
        format!("{}.{}", self.modules[p.module].id, self.modules[p.module].out_ports[p.index])
    }

    pub fn in_port_name(&self, in_port: usize) -> String {
        let p = self.matrix.in_ports[in_port];
        format!("{}.{}", self.modules[p.module].id, self.modules[p.module].in_ports[p.index])
    }

    pub fn destination(&self, tag: DestinationTag) -> Option<usize> {
        self.modules
            .iter()
            .position(|m| m.kind == ModuleKind::Destination && m.tag == Some(tag))
    }

    pub fn destination_tags(&self) -> BTreeSet<DestinationTag> {
        self.modules.iter().filter_map(|m| m.tag).collect()
    }

    /// Parses a configuration file: `{"connections": [["a.out", "b.in"], ...]}`.
    pub fn load_configuration(&self, path: impl AsRef<Path>) -> Result<DesignConfiguration> {
        #[derive(Deserialize)]
        struct ConfigFile {
            connections: Vec<(String, String)>,
        }
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        let file: ConfigFile = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let ctx = path.display().to_string();
        let mut chosen = vec![None; self.matrix.out_ports.len()];
        for (k, (from, to)) in file.connections.iter().enumerate() {
            let i = (0..chosen.len())
                .find(|&i| self.out_port_name(i) == *from)
                .ok_or_else(|| Error::invalid(&ctx, format!("connections[{k}]"), format!("unknown out-port {from:?}")))?;
            let j = (0..self.matrix.in_ports.len())
                .find(|&j| self.in_port_name(j) == *to)
                .ok_or_else(|| Error::invalid(&ctx, format!("connections[{k}]"), format!("unknown in-port {to:?}")))?;
            if chosen[i].replace(j as u32).is_some() {
                return Err(Error::invalid(&ctx, format!("connections[{k}]"), format!("{from} connected twice")));
            }
        }
        let config = DesignConfiguration { chosen };
        let problems = self.check_configuration(&config);
        if !problems.is_empty() {
            return Err(Error::invalid(ctx, "connections", problems.join("; ")));
        }
        Ok(config)
    }

    /// Modules with at least one connected in-port, plus all origins.
    pub fn reached(&self, config: &DesignConfiguration) -> Vec<bool> {
        let mut reached = vec![false; self.modules.len()];
        for &o in &self.origins {
            reached[o] = true;
        }
        for j in config.chosen.iter().flatten() {
            reached[self.matrix.in_ports[*j as usize].module] = true;
        }
        reached
    }

    /// Every structural rule a configuration must satisfy; empty when valid.
    pub fn check_configuration(&self, config: &DesignConfiguration) -> Vec<String> {
        let mut problems = Vec::new();
        if config.chosen.len() != self.matrix.out_ports.len() {
            return vec!["configuration does not match the design space's ports".into()];
        }
        let reached = self.reached(config);
        let mut in_count = vec![0usize; self.matrix.in_ports.len()];
        for (i, choice) in config.chosen.iter().enumerate() {
            let module = self.matrix.out_ports[i].module;
            match choice {
                Some(j) => {
                    let j = *j as usize;
                    if !self.matrix.allowed(i, j) {
                        problems.push(format!("{} -> {} not allowed", self.out_port_name(i), self.in_port_name(j)));
                    }
                    in_count[j] += 1;
                    if !reached[module] {
                        problems.push(format!("{} connected on an unconnected module", self.out_port_name(i)));
                    }
                }
                None if reached[module] => {
                    problems.push(format!("{} left open on a connected module", self.out_port_name(i)))
                }
                None => {}
            }
        }
        for (mi, m) in self.modules.iter().enumerate() {
            if m.required && !reached[mi] {
                problems.push(format!("required module {} is not connected", m.id));
            }
            if m.kind == ModuleKind::Destination || !reached[mi] {
                continue;
            }
            for pi in 0..m.in_ports.len() {
                match in_count[self.in_port(mi, pi)] {
                    0 => problems.push(format!("{}.{} left open on a connected module", m.id, m.in_ports[pi])),
                    1 => {}
                    n => problems.push(format!("{n} flows merge into {}.{}", m.id, m.in_ports[pi])),
                }
            }
        }
        if let Some(m) = self.find_cycle(config) {
            problems.push(format!("cycle through {}", self.modules[m].id));
        }
        problems.extend(self.lane_conflicts(config));
        problems
    }

    /// Successor modules of `module` under `config`, one per connected out-port.
    pub fn successors<'a>(
        &'a self,
        config: &'a DesignConfiguration,
        module: usize,
    ) -> impl Iterator<Item = (usize, usize)> + 'a {
        (0..self.modules[module].out_ports.len()).filter_map(move |pi| {
            config.chosen[self.out_port(module, pi)].map(|j| (pi, self.matrix.in_ports[j as usize].module))
        })
    }

    fn find_cycle(&self, config: &DesignConfiguration) -> Option<usize> {
        let n = self.modules.len();
        let mut indeg = vec![0usize; n];
        for j in config.chosen.iter().flatten() {
            indeg[self.matrix.in_ports[*j as usize].module] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&m| indeg[m] == 0).collect();
        let mut seen = 0;
        while let Some(m) = stack.pop() {
            seen += 1;
            for (_, t) in self.successors(config, m) {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    stack.push(t);
                }
            }
        }
        (seen < n).then(|| (0..n).find(|&m| indeg[m] > 0).expect("cycle member"))
    }

    /// Lane-bound modules must only receive fillets from their own lane.
    fn lane_conflicts(&self, config: &DesignConfiguration) -> Vec<String> {
        let mut out = Vec::new();
        for (lane, &origin) in self.origins.iter().enumerate() {
            let mut seen = vec![false; self.modules.len()];
            let mut stack = vec![origin];
            while let Some(m) = stack.pop() {
                if std::mem::replace(&mut seen[m], true) {
                    continue;
                }
                if let Some(bound) = self.modules[m].lane {
                    if bound != lane {
                        out.push(format!("lane {lane} flows into {} (bound to lane {bound})", self.modules[m].id));
                    }
                }
                stack.extend(self.successors(config, m).map(|(_, t)| t));
            }
        }
        out
    }

    /// Human-readable wiring.
    pub fn wiring(&self, config: &DesignConfiguration) -> Vec<(String, String)> {
        config
            .edges()
            .map(|(i, j)| (self.out_port_name(i), self.in_port_name(j)))
            .collect()
    }
}

/// One concrete wiring: the chosen in-port for each connected out-port.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DesignConfiguration {
    pub chosen: Vec<Option<u32>>,
}

impl DesignConfiguration {
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.chosen
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|j| (i, j as usize)))
    }

    /// Raw encoding used to order configurations (-1 marks an open port).
    pub fn encoding(&self) -> Vec<i64> {
        self.chosen.iter().map(|c| c.map_or(-1, i64::from)).collect()
    }
}

#[cfg(test)]
pub(crate) mod test_spaces {
    //! Small spaces shared by unit tests.

    /// Two origins, each free to go to either of two destinations.
    pub const TWO_BY_TWO: &str = r#"{
        "name": "two-by-two",
        "modules": [
            {"id": "o1", "kind": "origin", "lane": 0},
            {"id": "o2", "kind": "origin", "lane": 1},
            {"id": "a", "kind": "destination", "tag": "fillet-strips"},
            {"id": "b", "kind": "destination", "tag": "burger"}
        ],
        "connections": [["o1.out", "a.in"], ["o1.out", "b.in"], ["o2.out", "a.in"], ["o2.out", "b.in"]]
    }"#;

    /// One lane: origin -> weighing -> assignment -> distributor -> {strips, schnitzel}.
    pub const LINEAR: &str = r#"{
        "name": "linear",
        "modules": [
            {"id": "o", "kind": "origin", "lane": 0},
            {"id": "w", "kind": "weighing", "lane": 0},
            {"id": "a", "kind": "assignment", "lane": 0},
            {"id": "d", "kind": "distribution", "lane": 0},
            {"id": "strips", "kind": "destination", "tag": "fillet-strips"},
            {"id": "schnitzel", "kind": "destination", "tag": "schnitzel"}
        ],
        "connections": [
            ["o.out", "w.in"], ["w.out", "a.in"], ["a.out", "d.in"],
            ["d.out1", "schnitzel.in"], ["d.out2", "strips.in"]
        ]
    }"#;
}

#[cfg(test)]
mod tests {
    use super::test_spaces::*;
    use super::*;

    #[test]
    fn builds_matrix_with_defaults() {
        let s = DesignSpace::from_json(LINEAR).unwrap();
        assert_eq!(s.matrix.shape(), (5, 5));
        assert_eq!(s.modules[1].latency_s, DEFAULT_LATENCY_S);
        assert_eq!(s.modules[4].latency_s, 0.0);
        assert_eq!(s.lane_count(), 1);
        assert!(s.matrix.allowed(s.out_port(3, 0), s.in_port(5, 0)));
        assert!(!s.matrix.allowed(s.out_port(3, 0), s.in_port(4, 0)));
    }

    #[test]
    fn empty_row_is_rejected() {
        let text = LINEAR.replace(r#"["d.out2", "strips.in"]"#, r#"["d.out1", "strips.in"]"#);
        let err = DesignSpace::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("d.out2 has no allowed connection"), "{err}");
    }

    #[test]
    fn unknown_ports_are_reported() {
        let text = LINEAR.replace(r#"["o.out", "w.in"]"#, r#"["o.out", "w.input"]"#);
        let file: DesignSpaceFile = serde_json::from_str(&text).unwrap();
        let (space, violations) = file.build();
        assert!(space.is_none());
        assert!(violations.iter().any(|v| v.contains("unknown in-port \"w.input\"")));
    }

    #[test]
    fn port_shape_mismatch_is_a_load_error() {
        let text = LINEAR.replace(
            r#"{"id": "d", "kind": "distribution", "lane": 0}"#,
            r#"{"id": "d", "kind": "distribution", "lane": 0, "out_ports": ["out1"]}"#,
        );
        assert!(DesignSpace::from_json(&text).is_err());
    }

    #[test]
    fn configuration_checks() {
        let s = DesignSpace::from_json(TWO_BY_TWO).unwrap();
        let ok = DesignConfiguration {
            chosen: vec![Some(0), Some(0)],
        };
        assert!(s.check_configuration(&ok).is_empty());
        let open = DesignConfiguration { chosen: vec![Some(0), None] };
        assert!(!s.check_configuration(&open).is_empty());
    }

    #[test]
    fn configuration_file_round_trip() {
        let s = DesignSpace::from_json(LINEAR).unwrap();
        let config = enumerate(&s).next().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let body = serde_json::json!({ "connections": s.wiring(&config) });
        fs::write(&path, body.to_string()).unwrap();
        assert_eq!(s.load_configuration(&path).unwrap(), config);
    }
}
