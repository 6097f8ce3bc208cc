//! Plant-layer vocabulary: module kinds, destinations, fillets, weight
//! sampling and destination tallies.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::scenario::{ArrivalProcess, LaneInflow, WeightSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModuleKind {
    Origin,
    Weighing,
    Assignment,
    Trimming,
    Distribution,
    Destination,
}

impl ModuleKind {
    pub const ALL: [ModuleKind; 6] = [
        ModuleKind::Origin,
        ModuleKind::Weighing,
        ModuleKind::Assignment,
        ModuleKind::Trimming,
        ModuleKind::Distribution,
        ModuleKind::Destination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModuleKind::Origin => "origin",
            ModuleKind::Weighing => "weighing",
            ModuleKind::Assignment => "assignment",
            ModuleKind::Trimming => "trimming",
            ModuleKind::Distribution => "distribution",
            ModuleKind::Destination => "destination",
        }
    }
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Downstream subsystem a destination feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DestinationTag {
    #[serde(rename = "batching1", alias = "Batching 1")]
    Batching1,
    #[serde(rename = "batching2", alias = "Batching 2")]
    Batching2,
    #[serde(rename = "burger", alias = "Burger")]
    Burger,
    #[serde(rename = "schnitzel", alias = "Schnitzel")]
    Schnitzel,
    #[serde(rename = "fillet-strips", alias = "Fillet strips")]
    FilletStrips,
    #[serde(rename = "trim", alias = "Trim")]
    Trim,
}

impl DestinationTag {
    pub fn name(self) -> &'static str {
        match self {
            DestinationTag::Batching1 => "batching1",
            DestinationTag::Batching2 => "batching2",
            DestinationTag::Burger => "burger",
            DestinationTag::Schnitzel => "schnitzel",
            DestinationTag::FilletStrips => "fillet-strips",
            DestinationTag::Trim => "trim",
        }
    }
}

impl fmt::Display for DestinationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One product unit in flight.
#[derive(Debug, Clone, PartialEq)]
pub struct Fillet {
    pub id: u32,
    pub lane: u16,
    /// Weight at injection, grams.
    pub original_weight: f64,
    /// Current (post-trim) weight, grams.
    pub weight: f64,
    /// Index of the destination module chosen at assignment.
    pub destination: Option<u16>,
    /// Recipe the fillet was assigned to (index into the scenario's recipes).
    pub recipe: Option<u16>,
    pub trim_instruction: Option<f64>,
    pub trimmed: f64,
    pub injected_at: f64,
    pub absorbed: bool,
}

impl Fillet {
    pub fn new(id: u32, lane: u16, weight: f64, time: f64) -> Self {
        assert!(weight > 0.0, "fillet weight must be positive, got {weight}");
        Self {
            id,
            lane,
            original_weight: weight,
            weight,
            destination: None,
            recipe: None,
            trim_instruction: None,
            trimmed: 0.0,
            injected_at: time,
            absorbed: false,
        }
    }

    /// Executes the pending trim instruction, if any, and returns the mass
    /// removed. Panics when the instruction would consume the whole fillet.
    pub fn trim(&mut self) -> f64 {
        let Some(amount) = self.trim_instruction.take() else {
            return 0.0;
        };
        assert!(
            amount >= 0.0 && amount < self.weight,
            "trim instruction {amount} g invalid for fillet {} of {} g",
            self.id,
            self.weight
        );
        self.weight -= amount;
        self.trimmed += amount;
        amount
    }
}

/// Samples fillet weights for one lane.
#[derive(Debug, Clone)]
pub enum WeightSampler {
    Empirical(std::sync::Arc<Vec<f64>>),
    TruncatedNormal { normal: Normal<f64>, min: f64, max: f64 },
    Uniform { min: f64, max: f64 },
}

impl WeightSampler {
    pub fn new(source: &WeightSource) -> Self {
        match source {
            WeightSource::Empirical { samples, .. } => {
                assert!(!samples.is_empty(), "empirical weight source without samples");
                WeightSampler::Empirical(samples.clone())
            }
            WeightSource::TruncatedNormal {
                mean_g,
                stddev_g,
                min_g,
                max_g,
            } => WeightSampler::TruncatedNormal {
                normal: Normal::new(*mean_g, *stddev_g).expect("validated normal parameters"),
                min: *min_g,
                max: *max_g,
            },
            WeightSource::Uniform { min_g, max_g } => WeightSampler::Uniform {
                min: *min_g,
                max: *max_g,
            },
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            WeightSampler::Empirical(samples) => samples[rng.random_range(0..samples.len())],
            WeightSampler::TruncatedNormal { normal, min, max } => {
                // Rejection; bounds are validated to keep acceptance reasonable.
                for _ in 0..10_000 {
                    let x = normal.sample(rng);
                    if x >= *min && x <= *max {
                        return x;
                    }
                }
                normal.mean().clamp(*min, *max)
            }
            WeightSampler::Uniform { min, max } => rng.random_range(*min..*max),
        }
    }
}

/// Inter-arrival generator for one lane.
#[derive(Debug, Clone)]
pub struct ArrivalClock {
    process: ArrivalProcess,
    rate_per_min: f64,
    exp: Exp<f64>,
    count: u64,
    last: f64,
}

impl ArrivalClock {
    pub fn new(inflow: &LaneInflow) -> Self {
        Self {
            process: inflow.arrivals,
            rate_per_min: inflow.rate_per_min,
            exp: Exp::new(inflow.rate_per_min / 60.0).expect("positive rate"),
            count: 0,
            last: 0.0,
        }
    }

    /// Time of the next arrival. Deterministic arrivals fall at k / rate for
    /// k = 1, 2, ...; computing each from k avoids accumulated rounding.
    pub fn next_time<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        self.count += 1;
        self.last = match self.process {
            ArrivalProcess::Deterministic => self.count as f64 * 60.0 / self.rate_per_min,
            ArrivalProcess::Poisson => self.last + self.exp.sample(rng),
        };
        self.last
    }
}

/// Per-destination totals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DestinationCount {
    pub count: u64,
    /// Post-trim fillet mass, or trim mass for the trim destination.
    pub mass_g: f64,
}

/// Everything a replication accumulates at its sinks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DestinationTally {
    /// Indexed like the design space's module list; non-destinations stay zero.
    pub destinations: Vec<DestinationCount>,
    /// Absorbed fillets per recipe (indexed like the scenario's recipes).
    pub per_recipe: Vec<u64>,
    /// Trim mass removed anywhere in the plant.
    pub trim_mass_g: f64,
    pub injected: u64,
    pub injected_mass_g: f64,
    pub absorbed: u64,
    /// Fillets attributed to a non-default recipe that ended outside its band
    /// or over its trim limit.
    pub band_violations: u64,
}

impl DestinationTally {
    pub fn new(modules: usize, recipes: usize) -> Self {
        Self {
            destinations: vec![DestinationCount::default(); modules],
            per_recipe: vec![0; recipes],
            ..Default::default()
        }
    }

    pub fn in_flight(&self) -> u64 {
        self.injected - self.absorbed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trim_reduces_weight() {
        let mut f = Fillet::new(0, 0, 280.0, 0.0);
        f.trim_instruction = Some(80.0);
        assert_eq!(f.trim(), 80.0);
        assert_eq!(f.weight, 200.0);
        assert_eq!(f.trimmed, 80.0);

        let mut g = Fillet::new(1, 0, 250.0, 0.0);
        g.trim_instruction = Some(50.0);
        assert_eq!(g.trim(), 50.0);
        assert_eq!(g.weight + g.trimmed, g.original_weight);
    }

    #[test]
    fn trim_without_instruction_is_identity() {
        let mut f = Fillet::new(0, 0, 280.0, 0.0);
        assert_eq!(f.trim(), 0.0);
        assert_eq!(f.weight, 280.0);
    }

    #[test]
    #[should_panic(expected = "invalid")]
    fn trimming_everything_is_a_bug() {
        let mut f = Fillet::new(0, 0, 80.0, 0.0);
        f.trim_instruction = Some(80.0);
        f.trim();
    }

    #[test]
    fn truncated_normal_respects_bounds() {
        let s = WeightSampler::new(&WeightSource::TruncatedNormal {
            mean_g: 300.0,
            stddev_g: 60.0,
            min_g: 50.0,
            max_g: 1000.0,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..20_000).all(|_| s.sample(&mut rng) >= 50.0));
    }

    #[test]
    fn deterministic_arrivals_hit_exact_count() {
        let inflow = LaneInflow {
            lane: 0,
            rate_per_min: 54.0,
            arrivals: ArrivalProcess::Deterministic,
            weights: WeightSource::Uniform { min_g: 1.0, max_g: 2.0 },
        };
        let mut clock = ArrivalClock::new(&inflow);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let first = clock.next_time(&mut rng);
        assert!((first - 60.0 / 54.0).abs() < 1e-12);
        let mut n = 1;
        while clock.next_time(&mut rng) <= 3600.0 {
            n += 1;
        }
        assert_eq!(n, 54 * 60);
    }

    #[test]
    fn tags_serialize_as_kebab_names() {
        assert_eq!(serde_json::to_string(&DestinationTag::FilletStrips).unwrap(), "\"fillet-strips\"");
        let t: DestinationTag = serde_json::from_str("\"Batching 1\"").unwrap();
        assert_eq!(t, DestinationTag::Batching1);
    }
}
