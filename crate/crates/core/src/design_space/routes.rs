//! Routing information derived from a configuration's connection graph.

use std::collections::BTreeSet;

use super::{DesignConfiguration, DesignSpace};
use crate::plant::{DestinationTag, ModuleKind};

/// What one lane can do downstream of its assignment point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaneRoutes {
    pub lane: usize,
    pub reachable: BTreeSet<DestinationTag>,
    /// Destinations whose route from the assignment point passes a trimmer.
    pub trimmed: BTreeSet<DestinationTag>,
}

impl LaneRoutes {
    pub fn new(
        lane: usize,
        reachable: impl IntoIterator<Item = DestinationTag>,
        trimmed: impl IntoIterator<Item = DestinationTag>,
    ) -> Self {
        let reachable: BTreeSet<_> = reachable.into_iter().collect();
        let trimmed: BTreeSet<_> = trimmed.into_iter().collect();
        debug_assert!(trimmed.is_subset(&reachable));
        Self {
            lane,
            reachable,
            trimmed,
        }
    }

    pub fn has_trimmer(&self) -> bool {
        !self.trimmed.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteCatalog {
    lanes: Vec<LaneRoutes>,
    /// Per module, per out-port: destination modules reachable through it.
    /// Trim ports map to empty sets.
    port_reach: Vec<Vec<BTreeSet<usize>>>,
    /// Module where each lane's fillets get their destination.
    entry: Vec<usize>,
}

impl RouteCatalog {
    /// A catalog with lane summaries only (no graph), for controller use.
    pub fn from_lanes(lanes: Vec<LaneRoutes>) -> Self {
        Self {
            lanes,
            port_reach: Vec::new(),
            entry: Vec::new(),
        }
    }

    pub fn lane_count(&self) -> usize {
        self.lanes.len()
    }

    pub fn lane(&self, lane: usize) -> &LaneRoutes {
        &self.lanes[lane]
    }

    pub fn lanes(&self) -> &[LaneRoutes] {
        &self.lanes
    }

    pub fn reaches(&self, lane: usize, tag: DestinationTag) -> bool {
        self.lanes[lane].reachable.contains(&tag)
    }

    pub fn trims_on_route(&self, lane: usize, tag: DestinationTag) -> bool {
        self.lanes[lane].trimmed.contains(&tag)
    }

    /// Reachable destination modules per out-port of `module`.
    pub fn port_reach(&self, module: usize) -> &[BTreeSet<usize>] {
        &self.port_reach[module]
    }

    /// The out-port a distributor forwards a fillet bound for `destination`
    /// on: the first one that reaches it.
    pub fn next_port(&self, module: usize, destination: usize) -> Option<usize> {
        self.port_reach[module].iter().position(|s| s.contains(&destination))
    }

    pub fn entry(&self, lane: usize) -> usize {
        self.entry[lane]
    }
}

/// Graph reachability over the configuration: which destinations each lane
/// can serve, whether that route passes a trimmer, and each out-port's
/// downstream destination set.
pub fn derive_routes(space: &DesignSpace, config: &DesignConfiguration) -> RouteCatalog {
    let n = space.modules.len();
    let mut memo: Vec<Option<BTreeSet<usize>>> = vec![None; n];

    fn reach(
        space: &DesignSpace,
        config: &DesignConfiguration,
        m: usize,
        memo: &mut Vec<Option<BTreeSet<usize>>>,
    ) -> BTreeSet<usize> {
        if let Some(r) = &memo[m] {
            return r.clone();
        }
        let spec = &space.modules[m];
        let mut out = BTreeSet::new();
        if spec.kind == ModuleKind::Destination {
            out.insert(m);
        } else {
            for (pi, t) in space.successors(config, m) {
                if spec.is_flow_port(pi) {
                    out.extend(reach(space, config, t, memo));
                }
            }
        }
        memo[m] = Some(out.clone());
        out
    }

    let reached = space.reached(config);
    let mut port_reach = vec![Vec::new(); n];
    for m in 0..n {
        let spec = &space.modules[m];
        let mut ports = vec![BTreeSet::new(); spec.out_ports.len()];
        if reached[m] {
            for (pi, t) in space.successors(config, m) {
                if spec.is_flow_port(pi) {
                    ports[pi] = reach(space, config, t, &mut memo);
                }
            }
        }
        port_reach[m] = ports;
    }

    let mut lanes = Vec::new();
    let mut entry = Vec::new();
    for (lane, &origin) in space.origins.iter().enumerate() {
        // Follow the single flow path from the origin to the first assignment
        // module (or to the first branching point when there is none).
        let mut start = origin;
        let mut cur = origin;
        loop {
            if space.modules[cur].kind == ModuleKind::Assignment {
                start = cur;
                break;
            }
            let next: Vec<usize> = space
                .successors(config, cur)
                .filter(|&(pi, _)| space.modules[cur].is_flow_port(pi))
                .map(|(_, t)| t)
                .collect();
            match next.as_slice() {
                [t] if space.modules[*t].kind != ModuleKind::Destination => cur = *t,
                _ => break,
            }
        }
        let dests = reach(space, config, start, &mut memo);
        let mut reachable = BTreeSet::new();
        let mut trimmed = BTreeSet::new();
        for &d in &dests {
            let tag = space.modules[d].tag.expect("destinations carry tags");
            reachable.insert(tag);
            // walk the deterministic route and look for a trimmer on it
            let mut m = start;
            let mut trims = false;
            while m != d {
                trims |= space.modules[m].kind == ModuleKind::Trimming;
                let port = port_reach[m]
                    .iter()
                    .position(|s| s.contains(&d))
                    .expect("destination reachable from every module on its route");
                m = space.matrix.in_ports[config.chosen[space.out_port(m, port)].expect("connected") as usize].module;
            }
            if trims {
                trimmed.insert(tag);
            }
        }
        lanes.push(LaneRoutes {
            lane,
            reachable,
            trimmed,
        });
        entry.push(start);
    }

    RouteCatalog {
        lanes,
        port_reach,
        entry,
    }
}
