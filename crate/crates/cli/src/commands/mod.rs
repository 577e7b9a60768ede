//! The experiment commands.

pub mod attention;
pub mod ingest;
pub mod product;
pub mod resources;
pub mod train;

use vqt_core::noise::NoiseModel;
use vqt_core::par::ExecPolicy;
use vqt_core::vqdp::{Engine, Estimation, QuantumRuntime, ShotBudget};

use crate::error::{CliError, CliResult};
use crate::settings::Settings;

/// Keys shared by the circuit-running commands.
pub(crate) fn common_defaults(command: &str, engine: &'static str) -> Vec<(&'static str, String)> {
    vec![
        ("seed", "0".into()),
        ("mode", "sampled".into()),
        ("engine", engine.into()),
        ("noise_p2q", "0".into()),
        ("noise_ro", "0".into()),
        ("parallel", "false".into()),
        ("out", format!("results/{command}")),
        ("svg", "false".into()),
    ]
}

/// Builds the runtime from `mode`, `engine`, noise and `parallel` keys with
/// the given shot budget.
pub(crate) fn runtime(settings: &Settings, budget: ShotBudget) -> CliResult<QuantumRuntime> {
    let estimation = match settings.raw("mode") {
        "exact" => Estimation::Exact,
        "sampled" => Estimation::Sampled(budget),
        other => {
            return Err(CliError::Config(format!(
                "mode must be exact or sampled, got '{other}'"
            )))
        }
    };
    let engine = match settings.raw("engine") {
        "statevector" => Engine::Statevector,
        "analytic" => Engine::Analytic,
        other => {
            return Err(CliError::Config(format!(
                "engine must be statevector or analytic, got '{other}'"
            )))
        }
    };
    let noise = NoiseModel::new(settings.get("noise_p2q")?, settings.get("noise_ro")?)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let policy = if settings.get::<bool>("parallel")? {
        ExecPolicy::Parallel
    } else {
        ExecPolicy::Sequential
    };
    let rt = QuantumRuntime::new(estimation)
        .with_engine(engine)
        .with_noise(noise)
        .with_policy(policy);
    rt.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(rt)
}

pub(crate) fn with_defaults(command: &str, engine: &'static str, extra: &[(&str, &str)]) -> Settings {
    let mut all: Vec<(String, String)> = common_defaults(command, engine)
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    all.extend(extra.iter().map(|(k, v)| (k.to_string(), v.to_string())));
    let refs: Vec<(&str, &str)> = all.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    Settings::new(command, &refs)
}

/// Reads the corpus named by `corpus`, or the bundled toy corpus when empty.
pub(crate) fn load_corpus(settings: &Settings) -> CliResult<String> {
    match settings.raw("corpus") {
        "" => Ok(crate::corpus::TOY_CORPUS.to_string()),
        path => std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read corpus {path}: {e}"))),
    }
}

/// `metric,value` rows.
pub(crate) fn metrics_csv(rows: &[(&str, String)]) -> String {
    crate::output::csv("metric,value", rows.iter().map(|(k, v)| vec![k.to_string(), v.clone()]))
}
