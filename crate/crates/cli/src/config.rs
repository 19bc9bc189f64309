use std::path::Path;

use psskit::families::{preset, FamilyConfig, FamilyKind, FamilyParams, ScalarConfig, ScalarValue};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Verify,
    Lemma21,
    MatchCh,
    Immerse,
    Certify,
    Reconstruct,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Verify => "verify",
            CommandName::Lemma21 => "lemma21",
            CommandName::MatchCh => "match-ch",
            CommandName::Immerse => "immerse",
            CommandName::Certify => "certify",
            CommandName::Reconstruct => "reconstruct",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Adaptive ODE tolerance (relative and absolute).
    pub ode: f64,
    /// Bound on `|ac − b² + 1|`.
    pub gauss: f64,
    /// Bound on the Codazzi residuals.
    pub codazzi: f64,
    /// Bound on frame orthonormality drift.
    pub drift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ode: 1e-10,
            gauss: 1e-8,
            codazzi: 1e-6,
            drift: 1e-6,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), Failure> {
        for (name, v) in [("ode", self.ode), ("gauss", self.gauss), ("codazzi", self.codazzi), ("drift", self.drift)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::Config(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// A preset name or an inline family table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    Preset(String),
    Inline(FamilyConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImmerseOptions {
    /// Case name; inferred from the family when absent.
    pub case: Option<String>,
    pub alpha: f64,
    pub beta: f64,
    pub root: i8,
    pub b0: f64,
    pub xi0: f64,
    pub xi_range: [f64; 2],
    pub points: usize,
    pub codazzi_samples: usize,
}

impl Default for ImmerseOptions {
    fn default() -> Self {
        ImmerseOptions {
            case: None,
            alpha: 2.5,
            beta: 1.0,
            root: 1,
            b0: 2.0,
            xi0: 0.0,
            xi_range: [0.0, 1.0],
            points: 1000,
            codazzi_samples: 200,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyOptions {
    /// Random sweep size; a single certificate for the family when absent.
    pub sweep: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solution {
    SgKink,
    TravelingWave,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructOptions {
    pub solution: Solution,
    /// Kink parameter.
    pub a: f64,
    /// Wave speed.
    pub c: f64,
    pub xi0: f64,
    /// `(U, U′, U″)` at `xi0`.
    pub initial: [f64; 3],
    pub x0: f64,
    pub t0: f64,
    pub h: f64,
    pub n: usize,
    /// Closed-form second fundamental form for traveling waves.
    pub case: Option<String>,
    pub alpha: f64,
    pub beta: f64,
    pub root: i8,
    pub reorthonormalize: bool,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            solution: Solution::SgKink,
            a: 1.0,
            c: 2.0,
            xi0: 0.0,
            initial: [0.1, 0.05, 0.0],
            x0: 0.25,
            t0: 0.25,
            h: 0.01,
            n: 101,
            case: None,
            alpha: 2.5,
            beta: 1.0,
            root: 1,
            reorthonormalize: false,
        }
    }
}

/// Everything a run depends on. Reports embed the resolved form, and
/// feeding that back through `psskit run` reproduces the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandName,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    /// Constant `δ` for the condition checker; solved when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub immerse: Option<ImmerseOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifyOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruct: Option<ReconstructOptions>,
}

impl RunConfig {
    pub fn new(command: CommandName) -> Self {
        RunConfig {
            command,
            seed: 0,
            tolerances: Tolerances::default(),
            family: None,
            delta: None,
            immerse: None,
            certify: None,
            reconstruct: None,
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.tolerances.validate()
    }

    /// Replace a preset or partial family with its fully spelled-out table.
    pub fn resolve(&mut self) -> Result<Option<FamilyParams>, Failure> {
        let Some(spec) = &self.family else {
            return Ok(None);
        };
        let params = match spec {
            FamilySpec::Preset(name) => preset(name)?,
            FamilySpec::Inline(cfg) => cfg.to_params()?,
        };
        self.family = Some(FamilySpec::Inline(FamilyConfig::from_params(&params)));
        Ok(Some(params))
    }
}

/// Parse TOML, or JSON when the file says so by extension or shape.
pub fn parse_text<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, Failure> {
    let json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    let bad = |e: String| Failure::Config(format!("{}: {e}", path.display()));
    if json {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))
    } else {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// A run config file, or a previous report whose `config` field is one.
pub fn load_run_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = read(path)?;
    let value: serde_json::Value = parse_text(path, &text)?;
    let inner = match value.get("config") {
        Some(c) if value.get("report_version").is_some() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// `--family` is a preset name unless a file of that name exists.
pub fn family_spec(arg: &str) -> Result<FamilySpec, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = read(path)?;
        return Ok(FamilySpec::Inline(parse_text(path, &text)?));
    }
    preset(arg).map_err(|_| Failure::Config(format!("`{arg}` is neither a preset nor a readable family file")))?;
    Ok(FamilySpec::Preset(arg.to_string()))
}

/// Family given by kind and scalar overrides on top of that kind's defaults.
pub fn family_from_kind(kind: FamilyKind, sign: i8, overrides: &ScalarConfig) -> FamilyConfig {
    let mut cfg = FamilyConfig::from_params(&FamilyParams::default_for(kind, sign));
    let s = &mut cfg.scalars;
    let pairs: [(&mut Option<ScalarValue>, &Option<ScalarValue>); 12] = [
        (&mut s.mu2, &overrides.mu2),
        (&mut s.mu3, &overrides.mu3),
        (&mut s.eta2, &overrides.eta2),
        (&mut s.eta3, &overrides.eta3),
        (&mut s.lambda, &overrides.lambda),
        (&mut s.c1, &overrides.c1),
        (&mut s.c2, &overrides.c2),
        (&mut s.theta, &overrides.theta),
        (&mut s.nu, &overrides.nu),
        (&mut s.sigma, &overrides.sigma),
        (&mut s.tau, &overrides.tau),
        (&mut s.eta, &overrides.eta),
    ];
    for (dst, src) in pairs {
        if src.is_some() {
            dst.clone_from(src);
        }
    }
    cfg
}
