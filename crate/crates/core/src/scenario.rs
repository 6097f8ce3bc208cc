//! Production scenarios: recipe tables, per-lane inflow and run settings.
//!
//! Scenario files are JSON. Recipe columns mirror the usual recipe table
//! (destination, priority, target throughput, post-trim weight band, max
//! trim), with `"*"` marking the default recipe's priority and target.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::error::{Error, Result};
use crate::plant::DestinationTag;

/// Serde adapter for `Option<T>` fields written as either a value or `"*"`.
mod star {
    use serde::de::{self, Deserializer};
    use serde::{Deserialize, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw<T> {
        Value(T),
        Text(String),
    }

    pub fn serialize<T: Serialize, S: Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => v.serialize(s),
            None => s.serialize_str("*"),
        }
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Option<T>, D::Error>
    where
        T: Deserialize<'de>,
        D: Deserializer<'de>,
    {
        match Raw::<T>::deserialize(d)? {
            Raw::Value(v) => Ok(Some(v)),
            Raw::Text(t) if t == "*" => Ok(None),
            Raw::Text(t) => Err(de::Error::custom(format!("expected a number or \"*\", got {t:?}"))),
        }
    }
}

/// One row of a recipe table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub recipe: u32,
    pub destination: DestinationTag,
    /// 1 is the highest priority; `None` (`"*"`) marks the default recipe.
    #[serde(with = "star")]
    pub priority: Option<u32>,
    #[serde(with = "star")]
    pub target_throughput_per_min: Option<f64>,
    pub min_fillet_weight_g: f64,
    pub max_fillet_weight_g: f64,
    pub max_trim_weight_g: f64,
}

impl Recipe {
    pub fn is_default(&self) -> bool {
        self.priority.is_none()
    }

    /// Target throughput in fillets per second (0 for the default recipe).
    pub fn target_per_s(&self) -> f64 {
        self.target_throughput_per_min.unwrap_or(0.0) / 60.0
    }

    /// Whether a finished fillet satisfies this recipe's band and trim limit.
    pub fn accepts(&self, post_trim_weight: f64, trimmed: f64) -> bool {
        const EPS: f64 = 1e-9;
        post_trim_weight >= self.min_fillet_weight_g - EPS
            && post_trim_weight <= self.max_fillet_weight_g + EPS
            && trimmed <= self.max_trim_weight_g + EPS
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalProcess {
    /// Fixed inter-arrival time `60 / rate_per_min` seconds.
    #[default]
    Deterministic,
    /// Exponential inter-arrival times with the configured mean rate.
    Poisson,
}

/// Where a lane's fillet weights come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    /// Weights drawn with replacement from a sample file (one gram value per
    /// line). Relative paths resolve against the scenario file's directory.
    Empirical {
        file: PathBuf,
        #[serde(skip)]
        samples: Arc<Vec<f64>>,
    },
    TruncatedNormal {
        mean_g: f64,
        stddev_g: f64,
        min_g: f64,
        max_g: f64,
    },
    Uniform {
        min_g: f64,
        max_g: f64,
    },
}

impl WeightSource {
    pub fn empirical(file: impl Into<PathBuf>, samples: Vec<f64>) -> Self {
        WeightSource::Empirical {
            file: file.into(),
            samples: Arc::new(samples),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneInflow {
    pub lane: u32,
    pub rate_per_min: f64,
    #[serde(default)]
    pub arrivals: ArrivalProcess,
    pub weights: WeightSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub horizon_s: f64,
    pub recipes: Vec<Recipe>,
    pub inflow: Vec<LaneInflow>,
    #[serde(default)]
    pub controller: ControllerConfig,
}

/// Reads a weight sample file: one positive gram value per non-empty line.
pub fn read_weight_file(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
    let ctx = path.display().to_string();
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let w: f64 = line.parse().map_err(|_| {
            Error::invalid(&ctx, format!("line {}", lineno + 1), format!("not a number: {line:?}"))
        })?;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::invalid(
                &ctx,
                format!("line {}", lineno + 1),
                format!("weight must be a positive real, got {w}"),
            ));
        }
        out.push(w);
    }
    if out.is_empty() {
        return Err(Error::invalid(&ctx, "weights", "weight sample file is empty"));
    }
    Ok(out)
}

impl Scenario {
    /// Loads, resolves empirical weight files and validates a scenario file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let scenario = Self::load_unchecked(path)?;
        scenario.validate().map_err(|e| match e {
            Error::Invalid { field, message, .. } => Error::Invalid {
                context: path.display().to_string(),
                field,
                message,
            },
            other => other,
        })?;
        Ok(scenario)
    }

    /// Parses a scenario file and its weight files without checking recipe
    /// or inflow invariants.
    pub fn load_unchecked(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        let mut scenario: Scenario = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        scenario.resolve_weight_files(base)?;
        Ok(scenario)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|source| Error::Json {
            path: PathBuf::from("<inline>"),
            source,
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    fn resolve_weight_files(&mut self, base: &Path) -> Result<()> {
        for lane in &mut self.inflow {
            if let WeightSource::Empirical { file, samples } = &mut lane.weights {
                let full = if file.is_absolute() {
                    file.clone()
                } else {
                    base.join(&*file)
                };
                *samples = Arc::new(read_weight_file(&full)?);
            }
        }
        Ok(())
    }

    pub fn default_recipe(&self) -> &Recipe {
        self.recipes
            .iter()
            .find(|r| r.is_default())
            .expect("validated scenario has a default recipe")
    }

    pub fn default_recipe_index(&self) -> usize {
        self.recipes
            .iter()
            .position(|r| r.is_default())
            .expect("validated scenario has a default recipe")
    }

    /// Indices of the non-default recipes in processing order: ascending
    /// priority, declaration order among equal priorities.
    pub fn priority_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.recipes.len())
            .filter(|&i| !self.recipes[i].is_default())
            .collect();
        idx.sort_by_key(|&i| (self.recipes[i].priority, i));
        idx
    }

    pub fn lane_count(&self) -> usize {
        self.inflow.len()
    }

    /// Inflow spec for lane `lane`.
    pub fn lane(&self, lane: usize) -> &LaneInflow {
        self.inflow
            .iter()
            .find(|l| l.lane as usize == lane)
            .expect("validated scenario has contiguous lanes")
    }

    /// Checks every scenario invariant that does not depend on a design space.
    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.violations().into_iter().next() {
            return Err(Error::invalid(&self.id, v.0, v.1));
        }
        let mut seen = BTreeMap::new();
        for r in self.recipes.iter().filter(|r| !r.is_default()) {
            if let Some(prev) = seen.insert(r.priority, r.recipe) {
                warn!(
                    "scenario {}: recipes {prev} and {} share priority {:?}; declaration order breaks the tie",
                    self.id,
                    r.recipe,
                    r.priority.unwrap_or_default()
                );
            }
        }
        Ok(())
    }

    /// All invariant violations as (field, message) pairs.
    pub fn violations(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |field: String, msg: String| out.push((field, msg));
        if !(self.horizon_s.is_finite() && self.horizon_s > 0.0) {
            push("horizon_s".into(), format!("must be positive, got {}", self.horizon_s));
        }
        if self.recipes.is_empty() {
            push("recipes".into(), "recipe list is empty".into());
        }
        let defaults = self.recipes.iter().filter(|r| r.is_default()).count();
        if !self.recipes.is_empty() && defaults != 1 {
            push(
                "recipes".into(),
                format!("exactly one default recipe (priority \"*\") required, found {defaults}"),
            );
        }
        let mut ids = BTreeSet::new();
        for (i, r) in self.recipes.iter().enumerate() {
            let f = |name: &str| format!("recipes[{i}].{name}");
            if !ids.insert(r.recipe) {
                push(f("recipe"), format!("duplicate recipe id {}", r.recipe));
            }
            if !(r.min_fillet_weight_g >= 0.0 && r.min_fillet_weight_g < r.max_fillet_weight_g) {
                push(
                    f("min_fillet_weight_g"),
                    format!(
                        "need 0 <= min < max, got {}..{}",
                        r.min_fillet_weight_g, r.max_fillet_weight_g
                    ),
                );
            }
            if !(r.max_trim_weight_g >= 0.0 && r.max_trim_weight_g.is_finite()) {
                push(f("max_trim_weight_g"), format!("must be >= 0, got {}", r.max_trim_weight_g));
            }
            if r.is_default() {
                if r.max_trim_weight_g != 0.0 {
                    push(f("max_trim_weight_g"), "default recipe must not trim".into());
                }
                if r.target_throughput_per_min.is_some() {
                    push(f("target_throughput_per_min"), "default recipe target must be \"*\"".into());
                }
            } else {
                if r.priority == Some(0) {
                    push(f("priority"), "priorities start at 1".into());
                }
                match r.target_throughput_per_min {
                    Some(t) if t.is_finite() && t > 0.0 => {}
                    Some(t) => push(f("target_throughput_per_min"), format!("must be positive, got {t}")),
                    None => push(
                        f("target_throughput_per_min"),
                        "only the default recipe may use \"*\"".into(),
                    ),
                }
            }
        }
        let mut lanes: Vec<u32> = self.inflow.iter().map(|l| l.lane).collect();
        lanes.sort_unstable();
        if self.inflow.is_empty() {
            push("inflow".into(), "no inflow lanes".into());
        } else if lanes.iter().enumerate().any(|(i, &l)| l as usize != i) {
            push("inflow".into(), format!("lanes must be numbered 0..{} once each, got {lanes:?}", lanes.len()));
        }
        for (i, l) in self.inflow.iter().enumerate() {
            let f = |name: &str| format!("inflow[{i}].{name}");
            if !(l.rate_per_min.is_finite() && l.rate_per_min > 0.0) {
                push(f("rate_per_min"), format!("must be positive, got {}", l.rate_per_min));
            }
            match &l.weights {
                WeightSource::Empirical { samples, .. } => {
                    if samples.is_empty() {
                        push(f("weights.file"), "empirical weight source has no samples".into());
                    } else if samples.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                        push(f("weights.file"), "weights must be positive".into());
                    }
                }
                WeightSource::TruncatedNormal {
                    mean_g,
                    stddev_g,
                    min_g,
                    max_g,
                } => {
                    if !(*min_g > 0.0 && min_g < max_g) {
                        push(f("weights"), format!("need 0 < min_g < max_g, got {min_g}..{max_g}"));
                    }
                    if !(stddev_g.is_finite() && *stddev_g >= 0.0 && mean_g.is_finite()) {
                        push(f("weights"), "mean_g/stddev_g must be finite, stddev_g >= 0".into());
                    } else if *stddev_g == 0.0 && (mean_g < min_g || mean_g > max_g) {
                        push(f("weights"), "degenerate distribution outside its bounds".into());
                    }
                }
                WeightSource::Uniform { min_g, max_g } => {
                    if !(*min_g > 0.0 && min_g < max_g) {
                        push(f("weights"), format!("need 0 < min_g < max_g, got {min_g}..{max_g}"));
                    }
                }
            }
        }
        if let Err(msg) = self.controller.check() {
            push("controller".into(), msg);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{
            "id": "s",
            "horizon_s": 3600,
            "recipes": [
                {"recipe": 1, "destination": "batching1", "priority": 1, "target_throughput_per_min": 60,
                 "min_fillet_weight_g": 100, "max_fillet_weight_g": 200, "max_trim_weight_g": 50},
                {"recipe": 5, "destination": "fillet-strips", "priority": "*", "target_throughput_per_min": "*",
                 "min_fillet_weight_g": 0, "max_fillet_weight_g": 1000, "max_trim_weight_g": 0}
            ],
            "inflow": [{"lane": 0, "rate_per_min": 54, "weights": {"uniform": {"min_g": 100, "max_g": 300}}}]
        }"#
    }

    #[test]
    fn parses_stars_and_defaults() {
        let s = Scenario::from_json(minimal()).unwrap();
        assert!(s.recipes[1].is_default());
        assert_eq!(s.recipes[1].target_throughput_per_min, None);
        assert_eq!(s.controller, ControllerConfig::default());
        assert_eq!(s.inflow[0].arrivals, ArrivalProcess::Deterministic);
        assert_eq!(s.priority_order(), vec![0]);
    }

    #[test]
    fn round_trips() {
        let s = Scenario::from_json(minimal()).unwrap();
        let again = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(s, again);
        assert!(s.to_json().contains("\"priority\": \"*\""));
    }

    fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value = serde_json::from_str(minimal()).unwrap();
        f(&mut v);
        v.to_string()
    }

    #[test]
    fn rejects_empty_recipes() {
        let text = edit(|v| v["recipes"] = serde_json::json!([]));
        let err = Scenario::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("recipe list is empty"), "{err}");
    }

    #[test]
    fn rejects_missing_default() {
        let text = edit(|v| {
            v["recipes"][1]["priority"] = 2.into();
            v["recipes"][1]["target_throughput_per_min"] = 5.into();
        });
        let err = Scenario::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("default recipe"), "{err}");
    }

    #[test]
    fn rejects_bad_band() {
        let text = minimal().replace("\"min_fillet_weight_g\": 100", "\"min_fillet_weight_g\": 250");
        assert!(Scenario::from_json(&text).is_err());
    }

    #[test]
    fn unknown_star_text_is_a_parse_error() {
        let text = minimal().replace("\"priority\": \"*\"", "\"priority\": \"x\"");
        assert!(matches!(Scenario::from_json(&text), Err(Error::Json { .. })));
    }

    #[test]
    fn duplicate_priorities_tie_break_by_declaration() {
        let text = minimal().replace(
            "{\"recipe\": 5",
            "{\"recipe\": 2, \"destination\": \"burger\", \"priority\": 1, \"target_throughput_per_min\": 10,
              \"min_fillet_weight_g\": 200, \"max_fillet_weight_g\": 300, \"max_trim_weight_g\": 0},
             {\"recipe\": 5",
        );
        let s = Scenario::from_json(&text).unwrap();
        assert_eq!(s.priority_order(), vec![0, 1]);
    }

    #[test]
    fn weight_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.txt");
        fs::write(&empty, "\n\n").unwrap();
        assert!(read_weight_file(&empty).unwrap_err().to_string().contains("empty"));
        let neg = dir.path().join("neg.txt");
        fs::write(&neg, "200\n-3\n").unwrap();
        assert!(read_weight_file(&neg).is_err());
        let ok = dir.path().join("ok.txt");
        fs::write(&ok, "200\n 310.5 \n").unwrap();
        assert_eq!(read_weight_file(&ok).unwrap(), vec![200.0, 310.5]);
    }

    #[test]
    fn empirical_paths_resolve_relative_to_the_scenario() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("w.txt"), "250\n260\n").unwrap();
        let text = minimal().replace(
            "{\"uniform\": {\"min_g\": 100, \"max_g\": 300}}",
            "{\"empirical\": {\"file\": \"w.txt\"}}",
        );
        let path = dir.path().join("s.json");
        fs::write(&path, text).unwrap();
        let s = Scenario::load(&path).unwrap();
        match &s.inflow[0].weights {
            WeightSource::Empirical { samples, .. } => assert_eq!(**samples, vec![250.0, 260.0]),
            other => panic!("{other:?}"),
        }
    }
}
