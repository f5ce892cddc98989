//! Scenario runner for the eqo engine: JSON scenarios, built-in presets,
//! CSV/JSON emission and an invariant check suite.

pub mod check;
pub mod emit;
pub mod error;
pub mod presets;
pub mod run;
pub mod scenario;

pub use error::ScenarioError;
pub use run::{run_scenario, RunOutput};
pub use scenario::Scenario;

/// A preset name or a path to a scenario file.
pub fn resolve_target(target: &str) -> Result<Scenario, ScenarioError> {
    if let Some(s) = presets::preset(target) {
        return Ok(s);
    }
    let path = std::path::Path::new(target);
    if path.is_file() {
        return Scenario::from_path(path);
    }
    Err(ScenarioError::UnknownTarget(target.to_string()))
}
