//! Canonical keys for functionally equivalent configurations.
//!
//! Trimming and distribution modules without a lane binding are free: two of
//! the same kind and latency are physically interchangeable. A free module is
//! renamed after what feeds it (its feeder's canonical name plus the feeding
//! out-port), so swapping two free modules between the same attachment
//! points yields the same key. Destinations are named by module, not port.

use std::collections::{BTreeMap, HashMap};

use super::{DesignConfiguration, DesignSpace};
use crate::plant::ModuleKind;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub String);

/// One equivalence class of configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct DedupClass {
    /// Enumeration index of the representative.
    pub index: usize,
    pub representative: DesignConfiguration,
    pub key: CanonicalKey,
    /// Enumeration indices of every member, ascending.
    pub members: Vec<usize>,
}

impl DedupClass {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

fn is_free(space: &DesignSpace, module: usize) -> bool {
    let m = &space.modules[module];
    m.lane.is_none() && matches!(m.kind, ModuleKind::Trimming | ModuleKind::Distribution)
}

impl DesignSpace {
    pub fn canonical_key(&self, config: &DesignConfiguration) -> CanonicalKey {
        let reached = self.reached(config);
        let mut feeders: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.modules.len()];
        for (i, j) in config.edges() {
            let src = self.matrix.out_ports[i];
            feeders[self.matrix.in_ports[j].module].push((src.module, src.index));
        }
        let mut names: HashMap<usize, String> = HashMap::new();
        fn name_of(
            space: &DesignSpace,
            m: usize,
            feeders: &[Vec<(usize, usize)>],
            names: &mut HashMap<usize, String>,
        ) -> String {
            if let Some(n) = names.get(&m) {
                return n.clone();
            }
            let spec = &space.modules[m];
            let name = if is_free(space, m) {
                let mut feeds: Vec<String> = feeders[m]
                    .iter()
                    .map(|&(src, port)| format!("{}#{port}", name_of(space, src, feeders, names)))
                    .collect();
                feeds.sort();
                format!(
                    "{}/{}/{}x{}<{}>",
                    spec.kind,
                    spec.latency_s.to_bits(),
                    spec.in_ports.len(),
                    spec.out_ports.len(),
                    feeds.join(",")
                )
            } else {
                spec.id.clone()
            };
            names.insert(m, name.clone());
            name
        }

        let mut parts = Vec::new();
        for (i, j) in config.edges() {
            let src = self.matrix.out_ports[i];
            if !reached[src.module] {
                continue;
            }
            let dst = self.matrix.in_ports[j];
            let target = if self.modules[dst.module].kind == ModuleKind::Destination {
                format!("dest:{}", self.modules[dst.module].id)
            } else {
                format!("{}@{}", name_of(self, dst.module, &feeders, &mut names), dst.index)
            };
            parts.push(format!("{}#{}->{target}", name_of(self, src.module, &feeders, &mut names), src.index));
        }
        parts.sort();
        CanonicalKey(parts.join(";"))
    }
}

/// Groups configurations by canonical key. Each class is represented by its
/// member with the lexicographically smallest raw encoding; classes come out
/// ordered by representative enumeration index.
pub fn deduplicate<I>(space: &DesignSpace, configs: I) -> Vec<DedupClass>
where
    I: IntoIterator<Item = DesignConfiguration>,
{
    let mut classes: BTreeMap<CanonicalKey, DedupClass> = BTreeMap::new();
    for (index, config) in configs.into_iter().enumerate() {
        let key = space.canonical_key(&config);
        match classes.get_mut(&key) {
            Some(class) => {
                class.members.push(index);
                if config.encoding() < class.representative.encoding() {
                    class.index = index;
                    class.representative = config;
                }
            }
            None => {
                classes.insert(
                    key.clone(),
                    DedupClass {
                        index,
                        representative: config,
                        key,
                        members: vec![index],
                    },
                );
            }
        }
    }
    let mut out: Vec<DedupClass> = classes.into_values().collect();
    out.sort_by_key(|c| c.index);
    out
}
