//! Discrete-event simulation and design-space exploration for a poultry
//! fillet processing line.

pub mod controller;
pub mod design_space;
pub mod error;
pub mod evaluator;
pub mod kernel;
pub mod model;
pub mod plant;
pub mod runner;
pub mod scenario;

pub use design_space::{DesignConfiguration, DesignSpace};
pub use error::{Error, Result};
pub use evaluator::{pareto, KpiVector, SimulationResult};
pub use model::{simulate, PlantModel, RunOutput};
pub use runner::{explore, simulate_one, validate, RunPlan};
pub use scenario::Scenario;

/// The bundled four-lane case study.
pub mod case_study {
    use std::path::PathBuf;

    pub const SPACE_JSON: &str = include_str!("../data/case_study/space.json");
    pub const SCENARIO1_JSON: &str = include_str!("../data/case_study/scenario1.json");
    pub const SCENARIO2_JSON: &str = include_str!("../data/case_study/scenario2.json");

    /// Directory holding the case-study files in the source tree.
    pub fn dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join("case_study")
    }

    pub fn space_path() -> PathBuf {
        dir().join("space.json")
    }

    pub fn scenario_paths() -> Vec<PathBuf> {
        vec![dir().join("scenario1.json"), dir().join("scenario2.json")]
    }
}
