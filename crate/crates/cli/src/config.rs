//! TOML run configuration: parsing, validation, default resolution, and
//! re-emission of the fully-resolved document.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qfc_core::control::{ControllerKind, ControllerParams};
use qfc_core::ensemble::{EnsembleConfig, InitScheme};
use qfc_core::model::ModelSpec;
use qfc_core::operators::{validate_density, Tolerances};
use qfc_core::systems::{build_heisenberg_preset, build_qutrit_preset, HeisenbergParams};

/// Configuration-layer error. Validation problems map to exit code 1;
/// everything downstream (simulation, IO) maps to exit code 2.
#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    /// Unknown key, type mismatch, or other syntax problem, with the
    /// deserializer's message.
    Parse(String),
    MissingRequired(&'static str),
    InvalidValue(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(msg) => write!(f, "config parse error: {msg}"),
            ConfigError::MissingRequired(key) => {
                write!(f, "config is missing required key: {key}")
            }
            ConfigError::InvalidValue(msg) => write!(f, "invalid config value: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<std::io::Error> for ConfigError {
    fn from(e: std::io::Error) -> Self {
        ConfigError::Io(e)
    }
}

/// On-disk document shape. All keys optional here; `resolve` applies the
/// documented defaults and reports what is genuinely missing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub controller: ControllerSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// "qutrit" or "heisenberg".
    pub preset: Option<String>,
    /// Heisenberg couplings; ignored for the qutrit preset.
    pub jx: Option<f64>,
    pub jy: Option<f64>,
    pub jz: Option<f64>,
    /// "default" or "zero" (replace the control Hamiltonian by zero).
    pub f0: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    /// "free", "ideal", "ergodic", or "windowed".
    pub kind: Option<String>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    pub tau_s_override: Option<f64>,
    /// Window length in samples; required for kind = "windowed".
    pub window_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_initial: Option<usize>,
    pub runs_per_initial: Option<usize>,
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    pub sample_every: Option<usize>,
    pub master_seed: Option<u64>,
    /// "haar_pure" or "ginibre_mixed"; ignored when `init_diag` is set.
    pub init: Option<String>,
    /// Fixed diagonal initial state (entries must sum to 1).
    pub init_diag: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub dump_trajectories: Option<bool>,
}

/// Parse a TOML document from disk.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

/// Parse a TOML document from a string.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Serialize a config back to TOML text.
pub fn emit_config(cfg: &RunConfig) -> String {
    toml::to_string_pretty(cfg).expect("config serialization cannot fail")
}

/// A config with every optional key filled in, ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub spec: ModelSpec,
    pub ensemble: EnsembleConfig,
    pub output_dir: String,
    pub dump_trajectories: bool,
    /// The fully-defaulted document, for the audit-trail echo.
    pub echo: RunConfig,
}

/// Build the model named by the `[model]` section.
pub fn build_model(model: &ModelSection) -> Result<ModelSpec, ConfigError> {
    let preset = model
        .preset
        .as_deref()
        .ok_or(ConfigError::MissingRequired("model.preset"))?;
    let spec = match preset {
        "qutrit" => build_qutrit_preset(),
        "heisenberg" => {
            let d = HeisenbergParams::default();
            let p = HeisenbergParams {
                jx: model.jx.unwrap_or(d.jx),
                jy: model.jy.unwrap_or(d.jy),
                jz: model.jz.unwrap_or(d.jz),
            };
            build_heisenberg_preset(p)
                .map_err(|e| ConfigError::InvalidValue(format!("heisenberg preset: {e}")))?
        }
        other => {
            return Err(ConfigError::InvalidValue(format!(
                "unknown preset '{other}' (expected qutrit or heisenberg)"
            )))
        }
    };
    match model.f0.as_deref() {
        None | Some("default") => Ok(spec),
        Some("zero") => {
            let n = spec.dim();
            let zero = qfc_core::operators::HermitianOperator::from_diagonal(&vec![0.0; n])
                .expect("zero operator is Hermitian");
            spec.with_f0(zero)
                .map_err(|e| ConfigError::InvalidValue(format!("f0 = zero: {e}")))
        }
        Some(other) => Err(ConfigError::InvalidValue(format!(
            "model.f0 must be 'default' or 'zero', got '{other}'"
        ))),
    }
}

fn parse_controller(
    c: &ControllerSection,
) -> Result<(ControllerKind, ControllerParams), ConfigError> {
    let kind = match c.kind.as_deref().unwrap_or("free") {
        "free" => ControllerKind::Free,
        "ideal" => ControllerKind::Ideal,
        "ergodic" => ControllerKind::Ergodic,
        "windowed" => {
            let k = c
                .window_k
                .ok_or(ConfigError::MissingRequired("controller.window_k"))?;
            ControllerKind::Windowed { window_k: k }
        }
        other => {
            return Err(ConfigError::InvalidValue(format!(
                "unknown controller kind '{other}'"
            )))
        }
    };
    let defaults = ControllerParams::default();
    let params = ControllerParams {
        gamma: c.gamma,
        beta: c.beta.unwrap_or(defaults.beta),
        epsilon: c.epsilon,
        tau_s_override: c.tau_s_override,
    };
    Ok((kind, params))
}

fn parse_init(e: &EnsembleSection, dim: usize) -> Result<InitScheme, ConfigError> {
    if let Some(diag) = &e.init_diag {
        if diag.len() != dim {
            return Err(ConfigError::InvalidValue(format!(
                "init_diag has {} entries, model dimension is {dim}",
                diag.len()
            )));
        }
        let sum: f64 = diag.iter().sum();
        if (sum - 1.0).abs() > 1e-10 || diag.iter().any(|&p| p < 0.0) {
            return Err(ConfigError::InvalidValue(
                "init_diag must be a probability vector".into(),
            ));
        }
        let mut m = qfc_core::Cm::zeros(dim, dim);
        for (i, &p) in diag.iter().enumerate() {
            m[(i, i)] = num_complex::Complex64::new(p, 0.0);
        }
        let rho = validate_density(&m, &Tolerances::default())
            .map_err(|e| ConfigError::InvalidValue(format!("init_diag: {e}")))?;
        return Ok(InitScheme::Fixed(rho));
    }
    match e.init.as_deref().unwrap_or("haar_pure") {
        "haar_pure" => Ok(InitScheme::HaarPure),
        "ginibre_mixed" => Ok(InitScheme::GinibreMixed),
        other => Err(ConfigError::InvalidValue(format!(
            "unknown init scheme '{other}'"
        ))),
    }
}

/// Apply defaults and validate the whole document.
pub fn resolve(cfg: &RunConfig) -> Result<ResolvedRun, ConfigError> {
    let spec = build_model(&cfg.model)?;
    let (kind, params) = parse_controller(&cfg.controller)?;
    let e = &cfg.ensemble;
    let init = parse_init(e, spec.dim())?;
    let ensemble = EnsembleConfig {
        n_initial: e.n_initial.unwrap_or(1000),
        runs_per_initial: e.runs_per_initial.unwrap_or(20),
        t_final: e.t_final.unwrap_or(20.0),
        dt: e.dt.unwrap_or(1e-4),
        controller: kind,
        params,
        master_seed: e.master_seed.unwrap_or(0),
        sample_every: e.sample_every.unwrap_or(1000),
        init,
    };
    ensemble
        .validate()
        .map_err(|err| ConfigError::InvalidValue(err.to_string()))?;
    // Construct a controller once up front so parameter problems (for
    // example gamma outside (0, delta)) surface as validation failures.
    qfc_core::control::make_controller(kind, &spec, &params)
        .map_err(|err| ConfigError::InvalidValue(err.to_string()))?;

    let echo = resolved_document(cfg, &ensemble);
    Ok(ResolvedRun {
        spec,
        ensemble,
        output_dir: cfg
            .output
            .dir
            .clone()
            .unwrap_or_else(|| "out".to_string()),
        dump_trajectories: cfg.output.dump_trajectories.unwrap_or(false),
        echo,
    })
}

/// The same document with every default spelled out, so the echoed file is a
/// complete record of the run.
pub fn resolved_document(cfg: &RunConfig, e: &EnsembleConfig) -> RunConfig {
    let mut out = cfg.clone();
    if out.model.f0.is_none() {
        out.model.f0 = Some("default".to_string());
    }
    if out.model.preset.as_deref() == Some("heisenberg") {
        let d = HeisenbergParams::default();
        out.model.jx.get_or_insert(d.jx);
        out.model.jy.get_or_insert(d.jy);
        out.model.jz.get_or_insert(d.jz);
    }
    out.controller.kind.get_or_insert_with(|| "free".to_string());
    out.controller.beta.get_or_insert(e.params.beta);
    out.ensemble.n_initial = Some(e.n_initial);
    out.ensemble.runs_per_initial = Some(e.runs_per_initial);
    out.ensemble.t_final = Some(e.t_final);
    out.ensemble.dt = Some(e.dt);
    out.ensemble.sample_every = Some(e.sample_every);
    out.ensemble.master_seed = Some(e.master_seed);
    if out.ensemble.init_diag.is_none() {
        out.ensemble
            .init
            .get_or_insert_with(|| "haar_pure".to_string());
    }
    out.output.dir.get_or_insert_with(|| "out".to_string());
    out.output.dump_trajectories.get_or_insert(false);
    out
}
