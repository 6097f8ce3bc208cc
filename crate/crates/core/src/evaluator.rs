//! Performance indicators and Pareto analysis.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::design_space::DesignSpace;
use crate::model::RunOutput;
use crate::plant::{DestinationTag, ModuleKind};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeResult {
    pub recipe: u32,
    pub destination: DestinationTag,
    pub absorbed: u64,
    pub achieved_per_min: f64,
    /// `None` for the default recipe.
    pub target_per_min: Option<f64>,
    pub attainment: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DestinationResult {
    pub module: String,
    pub tag: DestinationTag,
    pub count: u64,
    pub mass_g: f64,
}

/// Scored outcome of one (design, scenario, replication) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub design: usize,
    pub scenario: String,
    pub replication: u32,
    pub seed: u64,
    pub recipes: Vec<RecipeResult>,
    pub destinations: Vec<DestinationResult>,
    /// Mean attainment over non-default recipes.
    pub kpi: f64,
    pub injected: u64,
    pub injected_mass_g: f64,
    pub absorbed: u64,
    /// Post-trim mass of absorbed fillets.
    pub absorbed_mass_g: f64,
    pub trim_mass_g: f64,
    pub in_flight: u64,
    pub in_flight_mass_g: f64,
    pub band_violations: u64,
    pub events: u64,
}

impl SimulationResult {
    /// Relative mass balance error: injected vs absorbed + trimmed + in flight.
    pub fn mass_balance_error(&self) -> f64 {
        let out = self.absorbed_mass_g + self.trim_mass_g + self.in_flight_mass_g;
        if self.injected_mass_g == 0.0 {
            out.abs()
        } else {
            (self.injected_mass_g - out).abs() / self.injected_mass_g
        }
    }
}

/// Attainment ratio of one recipe; clamped at 1 when `clamp` is set.
pub fn attainment(absorbed: u64, horizon_s: f64, target_per_min: f64, clamp: bool) -> f64 {
    let achieved = absorbed as f64 / (horizon_s / 60.0);
    let ratio = achieved / target_per_min;
    if clamp {
        ratio.min(1.0)
    } else {
        ratio
    }
}

/// Turns raw tallies into a scored result.
pub fn score(
    space: &DesignSpace,
    scenario: &Scenario,
    out: &RunOutput,
    design: usize,
    replication: u32,
    seed: u64,
    clamp: bool,
) -> SimulationResult {
    let minutes = out.horizon_s / 60.0;
    let recipes: Vec<RecipeResult> = scenario
        .recipes
        .iter()
        .zip(&out.tally.per_recipe)
        .map(|(r, &absorbed)| RecipeResult {
            recipe: r.recipe,
            destination: r.destination,
            absorbed,
            achieved_per_min: absorbed as f64 / minutes,
            target_per_min: r.target_throughput_per_min,
            attainment: r
                .target_throughput_per_min
                .filter(|_| !r.is_default())
                .map(|t| attainment(absorbed, out.horizon_s, t, clamp)),
        })
        .collect();
    let scored: Vec<f64> = recipes.iter().filter_map(|r| r.attainment).collect();
    let kpi = if scored.is_empty() {
        0.0
    } else {
        scored.iter().sum::<f64>() / scored.len() as f64
    };
    let mut destinations = Vec::new();
    let mut absorbed_mass_g = 0.0;
    for (m, spec) in space.modules.iter().enumerate() {
        if spec.kind != ModuleKind::Destination {
            continue;
        }
        let d = &out.tally.destinations[m];
        let tag = spec.tag.expect("destinations carry tags");
        destinations.push(DestinationResult {
            module: spec.id.clone(),
            tag,
            count: d.count,
            mass_g: d.mass_g,
        });
        if tag != DestinationTag::Trim {
            absorbed_mass_g += d.mass_g;
        }
    }
    SimulationResult {
        design,
        scenario: scenario.id.clone(),
        replication,
        seed,
        recipes,
        destinations,
        kpi,
        injected: out.tally.injected,
        injected_mass_g: out.tally.injected_mass_g,
        absorbed: out.tally.absorbed,
        absorbed_mass_g,
        trim_mass_g: out.tally.trim_mass_g,
        in_flight: out.in_flight,
        in_flight_mass_g: out.in_flight_mass_g,
        band_violations: out.tally.band_violations,
        events: out.events,
    }
}

/// One design's KPI per scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiVector {
    pub design: usize,
    pub values: Vec<f64>,
}

/// True when `a` is at least as good as `b` everywhere and better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut better = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        better |= x > y;
    }
    better
}

/// Non-dominated subset under maximization, in input order.
///
/// Vectors are visited by decreasing sum (lexicographically decreasing on
/// ties), so any dominator of a vector is visited before it and checking
/// against the front built so far suffices.
pub fn pareto(vectors: &[KpiVector]) -> Vec<KpiVector> {
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    let sums: Vec<f64> = vectors.iter().map(|v| v.values.iter().sum()).collect();
    order.sort_by(|&i, &j| {
        sums[j]
            .total_cmp(&sums[i])
            .then_with(|| lex_desc(&vectors[i].values, &vectors[j].values))
            .then(i.cmp(&j))
    });
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&f| dominates(&vectors[f].values, &vectors[i].values)) {
            front.push(i);
        }
    }
    front.sort_unstable();
    front.into_iter().map(|i| vectors[i].clone()).collect()
}

fn lex_desc(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match y.total_cmp(x) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Front of the union of two fronts, ordered by design.
pub fn merge_fronts(a: &[KpiVector], b: &[KpiVector]) -> Vec<KpiVector> {
    let mut all: Vec<KpiVector> = a.iter().chain(b).cloned().collect();
    all.sort_by_key(|v| v.design);
    pareto(&all)
}

/// Per-scenario minimum attainments; a vector qualifies when it meets all.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Thresholds(pub Vec<f64>);

impl Thresholds {
    pub fn is_met_by(&self, values: &[f64]) -> bool {
        self.0.iter().zip(values).all(|(t, v)| v >= t)
    }

    pub fn filter<'a>(&self, vectors: &'a [KpiVector]) -> Vec<&'a KpiVector> {
        vectors.iter().filter(|v| self.is_met_by(&v.values)).collect()
    }
}

/// Position of the first vector meeting `thresholds`, if any. Exploration
/// stops after it.
pub fn first_meeting(vectors: &[KpiVector], thresholds: &Thresholds) -> Option<usize> {
    vectors.iter().position(|v| thresholds.is_met_by(&v.values))
}

/// Weighted-sum ranking, best first; ties keep design order.
pub fn rank_weighted(vectors: &[KpiVector], weights: &[f64]) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = vectors
        .iter()
        .map(|v| (v.design, v.values.iter().zip(weights).map(|(x, w)| x * w).sum()))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kv(design: usize, values: &[f64]) -> KpiVector {
        KpiVector {
            design,
            values: values.to_vec(),
        }
    }

    fn brute_force(vs: &[KpiVector]) -> Vec<usize> {
        (0..vs.len())
            .filter(|&i| !(0..vs.len()).any(|j| dominates(&vs[j].values, &vs[i].values)))
            .map(|i| vs[i].design)
            .collect()
    }

    fn designs(vs: &[KpiVector]) -> Vec<usize> {
        vs.iter().map(|v| v.design).collect()
    }

    #[test]
    fn attainment_arithmetic() {
        assert_eq!(attainment(1800, 3600.0, 60.0, true), 0.5);
        assert_eq!(attainment(4000, 3600.0, 60.0, true), 1.0);
        assert!(attainment(4000, 3600.0, 60.0, false) > 1.1);
        assert_eq!(attainment(0, 3600.0, 60.0, true), 0.0);
    }

    #[test]
    fn small_fronts() {
        let v = [kv(0, &[1.0, 0.0]), kv(1, &[0.0, 1.0]), kv(2, &[0.5, 0.5])];
        assert_eq!(designs(&pareto(&v)), vec![0, 1, 2]);
        let v = [kv(0, &[1.0, 1.0]), kv(1, &[0.5, 0.5])];
        assert_eq!(designs(&pareto(&v)), vec![0]);
        let v = [kv(0, &[0.3, 0.3]), kv(1, &[0.3, 0.3])];
        assert_eq!(designs(&pareto(&v)), vec![0, 1]);
        assert!(pareto(&[]).is_empty());
    }

    #[test]
    fn stop_condition() {
        let v: Vec<_> = (0..50).map(|i| kv(i, &[i as f64 / 50.0, 0.7])).collect();
        let t = Thresholds(vec![0.8, 0.6]);
        // first with i/50 >= 0.8 is i = 40
        assert_eq!(first_meeting(&v, &t), Some(40));
        assert_eq!(first_meeting(&v, &Thresholds(vec![1.1, 0.0])), None);
        assert_eq!(first_meeting(&v, &Thresholds(vec![])), Some(0));
    }

    #[test]
    fn weighted_ranking() {
        let v = [kv(0, &[1.0, 0.0]), kv(1, &[0.0, 1.0]), kv(2, &[0.6, 0.6])];
        let r = rank_weighted(&v, &[0.5, 0.5]);
        assert_eq!(r.iter().map(|x| x.0).collect::<Vec<_>>(), vec![2, 0, 1]);
        let r = rank_weighted(&v, &[1.0, 0.0]);
        assert_eq!(r[0].0, 0);
    }

    fn arb_vectors(max: usize) -> impl Strategy<Value = Vec<KpiVector>> {
        (1usize..4).prop_flat_map(move |dim| {
            // coarse grid so ties and duplicates are common
            proptest::collection::vec(proptest::collection::vec(0u8..6, dim), 0..max).prop_map(|vs| {
                vs.into_iter()
                    .enumerate()
                    .map(|(i, v)| kv(i, &v.iter().map(|&x| x as f64 / 5.0).collect::<Vec<_>>()))
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn front_matches_brute_force(vs in arb_vectors(200)) {
            prop_assert_eq!(designs(&pareto(&vs)), brute_force(&vs));
        }

        #[test]
        fn merge_is_front_of_union(vs in arb_vectors(120), cut in 0usize..120) {
            let cut = cut.min(vs.len());
            let merged = merge_fronts(&pareto(&vs[..cut]), &pareto(&vs[cut..]));
            prop_assert_eq!(designs(&merged), designs(&pareto(&vs)));
        }

        #[test]
        fn dominated_addition_changes_nothing(vs in arb_vectors(60), pick in any::<prop::sample::Index>()) {
            prop_assume!(!vs.is_empty());
            let base = &vs[pick.index(vs.len())];
            if base.values.iter().all(|&x| x == 0.0) {
                return Ok(());
            }
            let mut extra = vs.clone();
            extra.push(kv(vs.len(), &base.values.iter().map(|x| (x - 0.1).max(0.0)).collect::<Vec<_>>()));
            prop_assert_eq!(designs(&pareto(&extra)), designs(&pareto(&vs)));
        }

        #[test]
        fn dominating_addition_removes_exactly_dominated(vs in arb_vectors(60), top in proptest::collection::vec(0u8..8, 3)) {
            prop_assume!(!vs.is_empty());
            let dim = vs[0].values.len();
            let new = kv(vs.len(), &top[..dim].iter().map(|&x| x as f64 / 5.0).collect::<Vec<_>>());
            let before = pareto(&vs);
            prop_assume!(!vs.iter().any(|v| dominates(&v.values, &new.values) || v.values == new.values));
            let mut extended = vs.clone();
            extended.push(new.clone());
            let mut expected: Vec<usize> = before
                .iter()
                .filter(|v| !dominates(&new.values, &v.values))
                .map(|v| v.design)
                .collect();
            expected.push(new.design);
            prop_assert_eq!(designs(&pareto(&extended)), expected);
        }
    }
}
