//! Model construction and execution: turns a configuration plus scenario into
//! an executable plant driven by the event kernel, and runs one replication.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::controller::Controller;
use crate::design_space::{derive_routes, DesignConfiguration, DesignSpace, RouteCatalog};
use crate::error::{Error, Result};
use crate::kernel::{random_stream, SimTime, Simulation, StreamId};
use crate::plant::{ArrivalClock, DestinationTally, Fillet, ModuleKind, WeightSampler};
use crate::scenario::Scenario;

const NO_PORT: u8 = u8::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
enum SimEvent {
    Arrival { lane: u16 },
    Reach { fillet: u32, module: u16 },
    Recompute,
}

/// One row of the optional per-fillet trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub time: f64,
    pub module: String,
    pub fillet: u32,
    pub weight: f64,
    pub action: &'static str,
}

/// A configuration compiled against a scenario, ready to simulate.
#[derive(Debug, Clone)]
pub struct PlantModel<'a> {
    space: &'a DesignSpace,
    scenario: &'a Scenario,
    catalog: RouteCatalog,
    kind: Vec<ModuleKind>,
    latency: Vec<f64>,
    /// Target module of each flow out-port, indexed [module][port].
    next: Vec<Vec<Option<u16>>>,
    /// Destination module fed by each trimmer's trim port.
    trim_sink: Vec<Option<u16>>,
    /// Out-port to take at each module for each destination module.
    route: Vec<Vec<u8>>,
    recipe_destination: Vec<u16>,
    default_recipe: usize,
}

impl<'a> PlantModel<'a> {
    pub fn build(space: &'a DesignSpace, config: &DesignConfiguration, scenario: &'a Scenario) -> Result<Self> {
        let problems = space.check_configuration(config);
        if !problems.is_empty() {
            return Err(Error::invalid(&space.name, "configuration", problems.join("; ")));
        }
        check_compatible(space, scenario)?;
        let n = space.modules.len();
        if n > u16::MAX as usize {
            return Err(Error::invalid(&space.name, "modules", "too many modules"));
        }
        let catalog = derive_routes(space, config);
        let mut next = vec![Vec::new(); n];
        let mut trim_sink = vec![None; n];
        let mut route = vec![Vec::new(); n];
        for m in 0..n {
            let spec = &space.modules[m];
            next[m] = vec![None; spec.out_ports.len()];
            for (pi, t) in space.successors(config, m) {
                if spec.is_flow_port(pi) {
                    next[m][pi] = Some(t as u16);
                } else {
                    trim_sink[m] = Some(t as u16);
                }
            }
            if spec.kind == ModuleKind::Distribution {
                route[m] = (0..n)
                    .map(|d| catalog.next_port(m, d).map_or(NO_PORT, |p| p as u8))
                    .collect();
            }
        }
        let recipe_destination = scenario
            .recipes
            .iter()
            .map(|r| space.destination(r.destination).expect("checked") as u16)
            .collect();
        let default_recipe = scenario.default_recipe_index();
        let default_tag = scenario.recipes[default_recipe].destination;
        for lane in 0..space.lane_count() {
            if !catalog.reaches(lane, default_tag) {
                return Err(Error::invalid(
                    &space.name,
                    format!("lane {lane}"),
                    format!("default destination {default_tag} is unreachable"),
                ));
            }
        }
        Ok(Self {
            space,
            scenario,
            catalog,
            kind: space.modules.iter().map(|m| m.kind).collect(),
            latency: space.modules.iter().map(|m| m.latency_s).collect(),
            next,
            trim_sink,
            route,
            recipe_destination,
            default_recipe,
        })
    }

    pub fn catalog(&self) -> &RouteCatalog {
        &self.catalog
    }

    /// Runs one replication over the scenario horizon.
    pub fn run(&self, seed: u64, trace: bool) -> RunOutput {
        let mut run = Replication::new(self, seed, trace);
        run.execute();
        run.finish()
    }
}

/// Static checks between a scenario and a design space.
pub fn scenario_violations(space: &DesignSpace, scenario: &Scenario) -> Vec<String> {
    let mut out = Vec::new();
    if scenario.lane_count() != space.lane_count() {
        out.push(format!(
            "scenario {} has {} inflow lanes but the design space has {} origins",
            scenario.id,
            scenario.lane_count(),
            space.lane_count()
        ));
    }
    for (i, r) in scenario.recipes.iter().enumerate() {
        if space.destination(r.destination).is_none() {
            out.push(format!(
                "scenario {}: recipes[{i}] destination {} does not exist in design space {}",
                scenario.id, r.destination, space.name
            ));
        }
    }
    out
}

fn check_compatible(space: &DesignSpace, scenario: &Scenario) -> Result<()> {
    match scenario_violations(space, scenario).into_iter().next() {
        None => Ok(()),
        Some(msg) => Err(Error::invalid(&scenario.id, "scenario", msg)),
    }
}

/// Raw outcome of one replication.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub tally: DestinationTally,
    /// Fillets still in the plant at the horizon.
    pub in_flight: u64,
    pub in_flight_mass_g: f64,
    pub events: u64,
    pub recomputations: u64,
    pub horizon_s: f64,
    pub trace: Option<Vec<TraceRow>>,
}

struct LaneSource {
    weights: WeightSampler,
    weight_rng: ChaCha8Rng,
    arrivals: ArrivalClock,
    arrival_rng: ChaCha8Rng,
}

struct Replication<'m, 'a> {
    model: &'m PlantModel<'a>,
    sim: Simulation<SimEvent>,
    controller: Controller,
    lanes: Vec<LaneSource>,
    fillets: Vec<Fillet>,
    tally: DestinationTally,
    trace: Option<Vec<TraceRow>>,
}

impl<'m, 'a> Replication<'m, 'a> {
    fn new(model: &'m PlantModel<'a>, seed: u64, trace: bool) -> Self {
        let scenario = model.scenario;
        let horizon = scenario.horizon_s;
        let lanes = (0..model.space.lane_count())
            .map(|lane| {
                let inflow = scenario.lane(lane);
                LaneSource {
                    weights: WeightSampler::new(&inflow.weights),
                    weight_rng: random_stream(seed, StreamId::LaneWeights(lane as u32)),
                    arrivals: ArrivalClock::new(inflow),
                    arrival_rng: random_stream(seed, StreamId::LaneArrivals(lane as u32)),
                }
            })
            .collect();
        let controller = Controller::new(scenario.controller, scenario.recipes.clone(), model.catalog.clone());
        let expected = (scenario.inflow.iter().map(|l| l.rate_per_min).sum::<f64>() * horizon / 60.0) as usize;
        Self {
            model,
            sim: Simulation::new(horizon),
            controller,
            lanes,
            fillets: Vec::with_capacity(expected + 16),
            tally: DestinationTally::new(model.space.modules.len(), scenario.recipes.len()),
            trace: trace.then(Vec::new),
        }
    }

    fn schedule_arrival(&mut self, lane: usize) {
        let src = &mut self.lanes[lane];
        let t = src.arrivals.next_time(&mut src.arrival_rng);
        if t <= self.sim.clock().horizon() {
            self.sim.schedule(t, SimEvent::Arrival { lane: lane as u16 });
        }
    }

    fn execute(&mut self) {
        for lane in 0..self.lanes.len() {
            self.schedule_arrival(lane);
        }
        let warmup = self.controller.config().warmup_s;
        if warmup <= self.sim.clock().horizon() {
            self.sim.schedule(warmup, SimEvent::Recompute);
        }
        let horizon = self.sim.clock().horizon();
        while let Some(ev) = self.sim.next_event(horizon) {
            self.handle(ev.payload);
        }
    }

    fn record(&mut self, module: usize, fillet: u32, action: &'static str) {
        if let Some(trace) = &mut self.trace {
            trace.push(TraceRow {
                time: self.sim.now(),
                module: self.model.space.modules[module].id.clone(),
                fillet,
                weight: self.fillets[fillet as usize].weight,
                action,
            });
        }
    }

    fn forward(&mut self, fillet: u32, module: usize, port: usize) {
        let target = self.model.next[module][port].unwrap_or_else(|| {
            panic!("{} has no flow on out-port {port}", self.model.space.modules[module].id)
        });
        self.sim.schedule_in(
            self.model.latency[module],
            SimEvent::Reach {
                fillet,
                module: target,
            },
        );
    }

    fn handle(&mut self, ev: SimEvent) {
        let model = self.model;
        match ev {
            SimEvent::Recompute => {
                let now = self.sim.now();
                self.controller.recompute(now);
                let next = now + self.controller.config().recompute_interval_s;
                if next <= self.sim.clock().horizon() {
                    self.sim.schedule(next, SimEvent::Recompute);
                }
            }
            SimEvent::Arrival { lane } => {
                let lane = lane as usize;
                let src = &mut self.lanes[lane];
                let weight = src.weights.sample(&mut src.weight_rng);
                let id = self.fillets.len() as u32;
                self.fillets.push(Fillet::new(id, lane as u16, weight, self.sim.now()));
                self.tally.injected += 1;
                self.tally.injected_mass_g += weight;
                let origin = model.space.origins[lane];
                self.record(origin, id, "inject");
                self.forward(id, origin, 0);
                self.schedule_arrival(lane);
            }
            SimEvent::Reach { fillet, module } => {
                let m = module as usize;
                let f = fillet as usize;
                match model.kind[m] {
                    ModuleKind::Origin => unreachable!("origins have no in-ports"),
                    ModuleKind::Weighing => {
                        let (lane, weight) = (self.fillets[f].lane as usize, self.fillets[f].weight);
                        self.controller.record_weight(lane, weight, self.sim.now());
                        self.record(m, fillet, "weigh");
                        self.forward(fillet, m, 0);
                    }
                    ModuleKind::Assignment => {
                        let (lane, weight) = (self.fillets[f].lane as usize, self.fillets[f].weight);
                        let (recipe, trim) = self.controller.lookup(lane, weight);
                        let fl = &mut self.fillets[f];
                        fl.recipe = Some(recipe as u16);
                        fl.destination = Some(model.recipe_destination[recipe]);
                        fl.trim_instruction = trim;
                        self.record(m, fillet, "assign");
                        self.forward(fillet, m, 0);
                    }
                    ModuleKind::Trimming => {
                        let removed = self.fillets[f].trim();
                        if removed > 0.0 {
                            self.tally.trim_mass_g += removed;
                            if let Some(sink) = model.trim_sink[m] {
                                self.tally.destinations[sink as usize].mass_g += removed;
                            }
                        }
                        self.record(m, fillet, if removed > 0.0 { "trim" } else { "pass" });
                        self.forward(fillet, m, 0);
                    }
                    ModuleKind::Distribution => {
                        let dest = self.fillets[f]
                            .destination
                            .unwrap_or(model.recipe_destination[model.default_recipe])
                            as usize;
                        let port = model.route[m][dest];
                        assert!(
                            port != NO_PORT,
                            "routing table bug: {} cannot reach {}",
                            model.space.modules[m].id,
                            model.space.modules[dest].id
                        );
                        self.record(m, fillet, "distribute");
                        self.forward(fillet, m, port as usize);
                    }
                    ModuleKind::Destination => self.absorb(fillet, m),
                }
            }
        }
    }

    fn absorb(&mut self, fillet: u32, module: usize) {
        let model = self.model;
        let f = &mut self.fillets[fillet as usize];
        if let Some(d) = f.destination {
            assert_eq!(d as usize, module, "fillet {} reached the wrong destination", f.id);
        }
        debug_assert!(f.trim_instruction.is_none(), "unexecuted trim instruction");
        f.absorbed = true;
        let recipe = f.recipe.map_or(model.default_recipe, usize::from);
        let slot = &mut self.tally.destinations[module];
        slot.count += 1;
        slot.mass_g += f.weight;
        self.tally.absorbed += 1;
        self.tally.per_recipe[recipe] += 1;
        let r = &model.scenario.recipes[recipe];
        if !r.is_default() && !r.accepts(f.weight, f.trimmed) {
            self.tally.band_violations += 1;
        }
        self.record(module, fillet, "absorb");
    }

    fn finish(self) -> RunOutput {
        let (mut in_flight, mut in_flight_mass_g) = (0, 0.0);
        for f in self.fillets.iter().filter(|f| !f.absorbed) {
            in_flight += 1;
            in_flight_mass_g += f.weight;
        }
        RunOutput {
            in_flight,
            in_flight_mass_g,
            events: self.sim.executed(),
            recomputations: self.controller.recomputations(),
            horizon_s: self.sim.clock().horizon(),
            tally: self.tally,
            trace: self.trace,
        }
    }
}

/// Compiles and runs one replication in a single call.
pub fn simulate(
    space: &DesignSpace,
    config: &DesignConfiguration,
    scenario: &Scenario,
    seed: u64,
    trace: bool,
) -> Result<RunOutput> {
    Ok(PlantModel::build(space, config, scenario)?.run(seed, trace))
}

pub type Seconds = SimTime;
