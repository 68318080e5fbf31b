use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qfim_core::models::QubitSpec;
use qfim_core::qfim::Kind;
use qfim_core::NumericPolicy;

use crate::error::CliError;

/// How a pure model is differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Closed-form pure-state formulas.
    Pure,
    /// Treat `|ψ⟩⟨ψ|` as a density matrix.
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Complex,
    Real,
}

/// JSON run configuration. Every field is optional; command-line flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Per mode `[ε, η]`, each as `[re, im]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<Vec<[[f64; 2]; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubit: Option<QubitSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<Route>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub representation: Option<Representation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    /// Real symmetric `2k×2k` weight over `(Re θ, Im θ)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_real: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<NumericPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// Fills unset fields from `other`.
    pub fn or(self, other: RunConfig) -> RunConfig {
        RunConfig {
            model: self.model.or(other.model),
            key: self.key.or(other.key),
            truncation: self.truncation.or(other.truncation),
            mixing: self.mixing.or(other.mixing),
            qubit: self.qubit.or(other.qubit),
            route: self.route.or(other.route),
            z: self.z.or(other.z),
            kind: self.kind.or(other.kind),
            representation: self.representation.or(other.representation),
            weight: self.weight.or(other.weight),
            weight_real: self.weight_real.or(other.weight_real),
            trials: self.trials.or(other.trials),
            d: self.d.or(other.d),
            k: self.k.or(other.k),
            shots: self.shots.or(other.shots),
            seed: self.seed.or(other.seed),
            phases: self.phases.or(other.phases),
            variance: self.variance.or(other.variance),
            policy: self.policy.or(other.policy),
            out: self.out.or(other.out),
            csv: self.csv.or(other.csv),
        }
    }

    pub fn policy(&self) -> Result<NumericPolicy, CliError> {
        let p = self.policy.unwrap_or_default();
        p.fd.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }
}

/// Comma-separated flag value, kept as one clap argument.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

pub fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [re, im] = parts.as_slice() else {
        return Err(format!("expected \"re,im\", got {s:?}"));
    };
    let re: f64 = re.parse().map_err(|e| format!("bad real part {re:?}: {e}"))?;
    let im: f64 = im.parse().map_err(|e| format!("bad imaginary part {im:?}: {e}"))?;
    if re.is_finite() && im.is_finite() {
        Ok([re, im])
    } else {
        Err(format!("non-finite complex number {s:?}"))
    }
}

/// `"er,ei,nr,ni[,er,ei,nr,ni…]"`, four numbers per mode.
pub fn parse_key(s: &str) -> Result<List<[[f64; 2]; 2]>, String> {
    let xs = parse_list(s)?.0;
    if xs.is_empty() || xs.len() % 4 != 0 {
        return Err(format!("a key needs four numbers per mode, got {}", xs.len()));
    }
    Ok(List(xs.chunks(4).map(|c| [[c[0], c[1]], [c[2], c[3]]]).collect()))
}

pub fn parse_list(s: &str) -> Result<List<f64>, String> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            x.parse::<f64>()
                .map_err(|e| format!("bad number {x:?}: {e}"))
                .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("non-finite number {x:?}")) })
        })
        .collect::<Result<_, _>>()
        .map(List)
}

pub fn parse_kind(s: &str) -> Result<Kind, String> {
    match s {
        "symmetric" => Ok(Kind::Symmetric),
        "right" => Ok(Kind::Right),
        _ => Err(format!("kind must be symmetric or right, got {s:?}")),
    }
}
