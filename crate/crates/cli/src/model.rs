use qfim_core::linalg::c64;
use qfim_core::models::{
    builtin_qubit_model, CoherentKey, CoherentModel, DensityModel, EpsilonMixed, FockConfig, PureAsDensity, PureModel,
    QubitModel, QubitSpec,
};
use qfim_core::{ParamPoint, C64};

use crate::config::{Route, RunConfig};
use crate::error::CliError;

pub const MODEL_NAMES: [&str; 3] = ["coherent-1mode", "coherent-2mode", "qubit-test"];

pub fn default_qubit_spec() -> QubitSpec {
    QubitSpec {
        offset: [0.1, 0.0, 0.2],
        columns: vec![[0.3, 0.0, 0.1], [0.0, 0.25, -0.1]],
    }
}

pub enum Built {
    Coherent { model: CoherentModel, mixing: Option<f64>, route: Route },
    Qubit(QubitModel),
}

fn key_from(cfg: &[[[f64; 2]; 2]]) -> Result<CoherentKey, CliError> {
    let modes = cfg.iter().map(|[e, n]| (c64(e[0], e[1]), c64(n[0], n[1]))).collect();
    Ok(CoherentKey::new(modes)?)
}

/// Fills model defaults into `cfg` and builds the model.
pub fn build(cfg: &mut RunConfig) -> Result<Built, CliError> {
    let name = cfg.model.get_or_insert_with(|| "coherent-1mode".to_string()).clone();
    match name.as_str() {
        "coherent-1mode" | "coherent-2mode" => {
            let modes = if name == "coherent-1mode" { 1 } else { 2 };
            let default_key = if modes == 1 {
                vec![[[1.0, 0.0], [0.0, 0.0]]]
            } else {
                vec![[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
            };
            let key = cfg.key.get_or_insert(default_key);
            if key.len() != modes {
                return Err(CliError::Config(format!("{name} needs a key with {modes} mode(s), got {}", key.len())));
            }
            let key = key_from(key)?;
            let n = *cfg.truncation.get_or_insert(if modes == 1 { 40 } else { 20 });
            let fock = FockConfig::new(n)?;
            let route = *cfg.route.get_or_insert(Route::Pure);
            if cfg.qubit.is_some() {
                return Err(CliError::Config(format!("a qubit spec does not apply to {name}")));
            }
            Ok(Built::Coherent {
                model: CoherentModel::new(key, fock),
                mixing: cfg.mixing,
                route,
            })
        }
        "qubit-test" => {
            if cfg.key.is_some() || cfg.mixing.is_some() || cfg.truncation.is_some() {
                return Err(CliError::Config("qubit-test takes no key, truncation or mixing".into()));
            }
            let spec = cfg.qubit.get_or_insert_with(default_qubit_spec).clone();
            Ok(Built::Qubit(builtin_qubit_model(spec)?))
        }
        other => Err(CliError::Config(format!(
            "unknown model {other:?}; expected one of {}",
            MODEL_NAMES.join(", ")
        ))),
    }
}

pub fn point(cfg: &mut RunConfig) -> Result<ParamPoint, CliError> {
    let [re, im] = *cfg.z.get_or_insert([0.3, 0.0]);
    Ok(ParamPoint::scalar(C64::new(re, im))?)
}

impl Built {
    pub fn num_params(&self) -> usize {
        match self {
            Built::Coherent { model, .. } => model.num_params(),
            Built::Qubit(m) => m.num_params(),
        }
    }

    /// The pure model when the pure-state formulas apply.
    pub fn pure(&self) -> Option<&CoherentModel> {
        match self {
            Built::Coherent {
                model,
                mixing: None,
                route: Route::Pure,
            } => Some(model),
            _ => None,
        }
    }

    /// Any state model, as a pure state when possible.
    pub fn as_pure_model(&self) -> Option<&CoherentModel> {
        match self {
            Built::Coherent { model, .. } => Some(model),
            Built::Qubit(_) => None,
        }
    }

    /// Runs `f` on the density-matrix view; `None` on the pure route.
    pub fn with_density<R>(
        &self,
        f: impl FnOnce(&dyn DensityModel) -> qfim_core::Result<R>,
    ) -> Option<Result<R, CliError>> {
        match self {
            Built::Qubit(m) => Some(f(m).map_err(CliError::from)),
            Built::Coherent { model, mixing: Some(eps), .. } => {
                Some(EpsilonMixed::new(model, *eps).and_then(|m| f(&m)).map_err(CliError::from))
            }
            Built::Coherent {
                model,
                mixing: None,
                route: Route::Density,
            } => Some(f(&PureAsDensity::new(model)).map_err(CliError::from)),
            Built::Coherent { .. } => None,
        }
    }

    pub fn warnings(&self, p: &ParamPoint) -> Vec<String> {
        match self {
            Built::Coherent { model, .. } => model.warnings(p.theta()[0]).iter().map(|w| w.to_string()).collect(),
            Built::Qubit(_) => Vec::new(),
        }
    }
}
