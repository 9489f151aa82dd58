//! Run configuration: JSON parsing with defaults, validation and emission.
//!
//! Every key is optional; an empty object `{}` yields the standard 1D
//! moving-Gausson setup on `[-16, 16]` with `h = 1/64`.
//!
//! ```json
//! {
//!   "dim": 1,
//!   "lower": [-16.0], "upper": [16.0], "points": [2048],
//!   "lambda": -1.0,
//!   "reg": { "kind": "local_energy", "n": 2, "eps": 1e-4 },
//!   "scheme": "strang_bab",
//!   "tau": 1e-3, "T": 3.0,
//!   "initial": { "gaussons": [ { "amplitude": 0.7511, "velocity": [1.0], "center": [0.0] } ] },
//!   "observables": ["mass", "energy", "errors"],
//!   "record_every": 30,
//!   "out_dir": "out"
//! }
//! ```

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::analytic::GaussonSpec;
use crate::error::{Error, Result};
use crate::grid::DomainSpec;
use crate::integrators::{EvolveConfig, SplitScheme};
use crate::regularization::{RegKind, Regularization};

/// Relative tolerance for `T / tau` being an integer.
pub const STEP_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_LAMBDA: f64 = -1.0;
pub const DEFAULT_HALF_WIDTH: f64 = 16.0;
pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_ORDER: u32 = 2;
pub const DEFAULT_TAU: f64 = 1e-3;
pub const DEFAULT_FINAL_TIME: f64 = 3.0;

const TOP_KEYS: &[&str] = &[
    "dim",
    "lower",
    "upper",
    "points",
    "lambda",
    "reg",
    "scheme",
    "tau",
    "T",
    "initial",
    "observables",
    "record_every",
    "out_dir",
];
const REG_KEYS: &[&str] = &["kind", "n", "eps"];
const INITIAL_KEYS: &[&str] = &["gaussons"];
const GAUSSON_KEYS: &[&str] = &["amplitude", "velocity", "center"];
const OBSERVABLE_NAMES: &[&str] = &["mass", "energy", "errors"];

/// Which observables a run records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservableSet {
    pub mass: bool,
    pub energy: bool,
    pub errors: bool,
}

impl Default for ObservableSet {
    fn default() -> Self {
        Self {
            mass: true,
            energy: true,
            errors: true,
        }
    }
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub lambda: f64,
    pub reg: Regularization,
    pub scheme: SplitScheme,
    pub tau: f64,
    pub final_time: f64,
    /// Initial data: one Gausson (which then also serves as the oracle) or a
    /// superposition of several.
    pub gaussons: Vec<GaussonSpec>,
    pub observables: ObservableSet,
    /// Recording stride in steps; `None` records about 100 evenly spaced states.
    pub record_every: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut cfg = Self::from_value(&json!({})).expect("defaults are valid");
        cfg.out_dir = None;
        cfg
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn expand(self, dim: usize, field: &str) -> Result<Vec<T>> {
        match self {
            OneOrMany::One(v) => Ok(vec![v; dim]),
            OneOrMany::Many(v) if v.len() == dim => Ok(v),
            OneOrMany::Many(v) => Err(Error::Config(format!(
                "{field}: expected {dim} entries, got {}",
                v.len()
            ))),
        }
    }
}

#[derive(Deserialize)]
struct RegFile {
    kind: Option<String>,
    n: Option<i64>,
    eps: Option<f64>,
}

#[derive(Deserialize)]
struct GaussonFile {
    amplitude: Option<f64>,
    velocity: Option<OneOrMany<f64>>,
    center: Option<OneOrMany<f64>>,
}

#[derive(Deserialize)]
struct InitialFile {
    gaussons: Vec<GaussonFile>,
}

#[derive(Deserialize)]
struct ConfigFile {
    dim: Option<i64>,
    lower: Option<OneOrMany<f64>>,
    upper: Option<OneOrMany<f64>>,
    points: Option<OneOrMany<i64>>,
    lambda: Option<f64>,
    reg: Option<RegFile>,
    scheme: Option<String>,
    tau: Option<f64>,
    #[serde(rename = "T")]
    final_time: Option<f64>,
    initial: Option<InitialFile>,
    observables: Option<Vec<String>>,
    record_every: Option<i64>,
    out_dir: Option<PathBuf>,
}

fn unknown_keys(obj: &Map<String, Value>, allowed: &[&str], prefix: &str, found: &mut Vec<String>) {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            found.push(format!("{prefix}{key}"));
        }
    }
}

fn collect_unknown(root: &Value) -> Result<Vec<String>> {
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Config("configuration must be a JSON object".into()))?;
    let mut found = Vec::new();
    unknown_keys(obj, TOP_KEYS, "", &mut found);
    if let Some(Value::Object(reg)) = obj.get("reg") {
        unknown_keys(reg, REG_KEYS, "reg.", &mut found);
    }
    if let Some(Value::Object(init)) = obj.get("initial") {
        unknown_keys(init, INITIAL_KEYS, "initial.", &mut found);
        if let Some(Value::Array(list)) = init.get("gaussons") {
            for (i, g) in list.iter().enumerate() {
                if let Value::Object(g) = g {
                    unknown_keys(
                        g,
                        GAUSSON_KEYS,
                        &format!("initial.gaussons[{i}]."),
                        &mut found,
                    );
                }
            }
        }
    }
    Ok(found)
}

fn invalid(field: &str, constraint: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {constraint}"))
}

/// Number of steps `T / tau`, if it is an integer within [`STEP_TOLERANCE`].
pub fn integral_steps(final_time: f64, tau: f64) -> Option<usize> {
    let ratio = final_time / tau;
    let rounded = ratio.round();
    if rounded >= 0.0 && (ratio - rounded).abs() <= STEP_TOLERANCE * rounded.max(1.0) {
        Some(rounded as usize)
    } else {
        None
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        Self::from_value(&value)
    }

    pub fn from_value(value: &Value) -> Result<Self> {
        let unknown = collect_unknown(value)?;
        if !unknown.is_empty() {
            return Err(Error::Config(format!(
                "unknown keys: {}",
                unknown.join(", ")
            )));
        }
        let file: ConfigFile = serde_json::from_value(value.clone())
            .map_err(|e| Error::Config(format!("malformed configuration: {e}")))?;
        Self::resolve(file)
    }

    fn resolve(file: ConfigFile) -> Result<Self> {
        let dim = file.dim.unwrap_or(1);
        if !(1..=2).contains(&dim) {
            return Err(invalid("dim", format!("must be 1 or 2, got {dim}")));
        }
        let dim = dim as usize;
        let lower = match file.lower {
            Some(v) => v.expand(dim, "lower")?,
            None => vec![-DEFAULT_HALF_WIDTH; dim],
        };
        let upper = match file.upper {
            Some(v) => v.expand(dim, "upper")?,
            None => vec![DEFAULT_HALF_WIDTH; dim],
        };
        if let Some(j) = (0..dim).find(|&j| !(upper[j] > lower[j])) {
            return Err(invalid(
                "domain",
                format!(
                    "upper must exceed lower on axis {j}, got [{}, {}]",
                    lower[j], upper[j]
                ),
            ));
        }
        let points = match file.points {
            Some(v) => v.expand(dim, "points")?,
            // h = 1/64 in 1D and 1/16 in 2D
            None => {
                let per_unit = if dim == 1 { 64.0 } else { 16.0 };
                lower
                    .iter()
                    .zip(&upper)
                    .map(|(lo, hi)| ((hi - lo) * per_unit).round() as i64)
                    .collect()
            }
        };
        if let Some(p) = points.iter().find(|&&p| p < 4 || p % 2 != 0) {
            return Err(invalid(
                "points",
                format!("must be even and at least 4, got {p}"),
            ));
        }
        let points: Vec<usize> = points.into_iter().map(|p| p as usize).collect();
        let domain = DomainSpec::new(lower, upper, points).map_err(|e| invalid("domain", e))?;

        let lambda = file.lambda.unwrap_or(DEFAULT_LAMBDA);
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(invalid("lambda", "must be finite and non-zero"));
        }

        let reg_file = file.reg.unwrap_or(RegFile {
            kind: None,
            n: None,
            eps: None,
        });
        let n = reg_file.n.unwrap_or(DEFAULT_ORDER as i64);
        if n < 2 {
            return Err(invalid("reg.n", "n must be ≥ 2"));
        }
        let kind_name = reg_file.kind.as_deref().unwrap_or("local_energy");
        let kind = RegKind::parse(kind_name, n as u32).map_err(|e| invalid("reg.kind", e))?;
        let eps = reg_file.eps.unwrap_or(DEFAULT_EPSILON);
        let reg = Regularization::new(kind, eps).map_err(|e| invalid("reg.eps", e))?;

        let scheme = match file.scheme {
            Some(name) => SplitScheme::parse(&name).map_err(|e| invalid("scheme", e))?,
            None => SplitScheme::StrangBAB,
        };

        let tau = file.tau.unwrap_or(DEFAULT_TAU);
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(invalid("tau", format!("must be positive, got {tau}")));
        }
        let final_time = file.final_time.unwrap_or(DEFAULT_FINAL_TIME);
        if !(final_time >= 0.0) || !final_time.is_finite() {
            return Err(invalid(
                "T",
                format!("must be non-negative, got {final_time}"),
            ));
        }
        if integral_steps(final_time, tau).is_none() {
            return Err(invalid("T", "T/tau not integral"));
        }

        let gaussons = match file.initial {
            None => {
                vec![GaussonSpec::standard(dim, lambda, 1.0).map_err(|e| invalid("initial", e))?]
            }
            Some(init) => {
                if init.gaussons.is_empty() {
                    return Err(invalid(
                        "initial.gaussons",
                        "must list at least one Gausson",
                    ));
                }
                let default_b = (-lambda * PI).powf(-0.25);
                init.gaussons
                    .into_iter()
                    .enumerate()
                    .map(|(i, g)| {
                        let field = format!("initial.gaussons[{i}]");
                        let velocity = match g.velocity {
                            Some(v) => v.expand(dim, &format!("{field}.velocity"))?,
                            None => vec![0.0; dim],
                        };
                        let center = match g.center {
                            Some(v) => v.expand(dim, &format!("{field}.center"))?,
                            None => vec![0.0; dim],
                        };
                        GaussonSpec::new(lambda, g.amplitude.unwrap_or(default_b), velocity, center)
                            .map_err(|e| invalid(&field, e))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };

        let observables = match file.observables {
            None => ObservableSet::default(),
            Some(names) => {
                let mut set = ObservableSet {
                    mass: false,
                    energy: false,
                    errors: false,
                };
                for name in &names {
                    match name.as_str() {
                        "mass" => set.mass = true,
                        "energy" => set.energy = true,
                        "errors" => set.errors = true,
                        other => {
                            return Err(invalid(
                                "observables",
                                format!("unknown observable '{other}' (expected one of {OBSERVABLE_NAMES:?})"),
                            ))
                        }
                    }
                }
                set
            }
        };

        let record_every = match file.record_every {
            None => None,
            Some(k) if k >= 1 => Some(k as usize),
            Some(k) => {
                return Err(invalid(
                    "record_every",
                    format!("must be at least 1, got {k}"),
                ))
            }
        };

        Ok(Self {
            domain,
            lambda,
            reg,
            scheme,
            tau,
            final_time,
            gaussons,
            observables,
            record_every,
            out_dir: file.out_dir,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn steps(&self) -> usize {
        integral_steps(self.final_time, self.tau).expect("validated at construction")
    }

    /// Recording stride actually used.
    pub fn stride(&self) -> usize {
        self.record_every
            .unwrap_or_else(|| (self.steps() / 100).max(1))
    }

    /// The single Gausson of the initial data, if there is exactly one.
    pub fn oracle_spec(&self) -> Option<&GaussonSpec> {
        match self.gaussons.as_slice() {
            [single] => Some(single),
            _ => None,
        }
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        EvolveConfig {
            tau: self.tau,
            steps: self.steps(),
            lambda: self.lambda,
            reg: self.reg,
            scheme: self.scheme,
        }
    }

    /// Same run with another time step (and `T` unchanged).
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || integral_steps(self.final_time, tau).is_none() {
            return Err(Error::Argument(format!(
                "tau = {tau} does not divide T = {}",
                self.final_time
            )));
        }
        Ok(Self {
            tau,
            ..self.clone()
        })
    }

    /// JSON object in the input schema; `from_value(emit())` reproduces `self`.
    pub fn emit(&self) -> Value {
        let reg = match self.reg.kind() {
            RegKind::LocalEnergy(n) => {
                json!({"kind": "local_energy", "n": n, "eps": self.reg.epsilon()})
            }
            other => json!({"kind": other.name(), "eps": self.reg.epsilon()}),
        };
        let mut observables = Vec::new();
        if self.observables.mass {
            observables.push("mass");
        }
        if self.observables.energy {
            observables.push("energy");
        }
        if self.observables.errors {
            observables.push("errors");
        }
        let gaussons: Vec<Value> = self
            .gaussons
            .iter()
            .map(|g| json!({"amplitude": g.amplitude, "velocity": g.velocity, "center": g.center}))
            .collect();
        let mut obj = json!({
            "dim": self.dim(),
            "lower": self.domain.lower(),
            "upper": self.domain.upper(),
            "points": self.domain.points(),
            "lambda": self.lambda,
            "reg": reg,
            "scheme": self.scheme.name(),
            "tau": self.tau,
            "T": self.final_time,
            "initial": {"gaussons": gaussons},
            "observables": observables,
        });
        let map = obj.as_object_mut().expect("object literal");
        if let Some(k) = self.record_every {
            map.insert("record_every".into(), json!(k));
        }
        if let Some(dir) = &self.out_dir {
            map.insert("out_dir".into(), json!(dir));
        }
        obj
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_json_str(&text)
}

/// Keys accepted at the top level of a configuration file.
pub fn known_keys() -> BTreeSet<&'static str> {
    TOP_KEYS.iter().copied().collect()
}

/// Serializable snapshot written beside every output as `meta.json`.
#[derive(Debug, Serialize)]
pub struct Meta<'a> {
    pub version: &'a str,
    pub command: &'a str,
    pub config: Value,
    pub conventions: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<Value>,
}

/// Norm and transform conventions recorded in every `meta.json`.
pub fn conventions() -> Value {
    json!({
        "dft": "unnormalized forward, 1/prod(N) on inverse",
        "l2": "sqrt(prod(h) * sum |u|^2)",
        "h1": "sqrt(l2^2 + sum_axes l2(spectral derivative)^2)",
        "linf": "max |u|",
        "density_l1": "prod(h) * sum ||a|^2 - |b|^2|",
        "table_norm": "l2",
        "lnlse_reference": "analytic Gausson",
        "time": "t_k = k * tau",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let cfg = RunConfig::from_json_str("{}").unwrap();
        assert_eq!(cfg.dim(), 1);
        assert_eq!(cfg.domain.points(), &[2048]);
        assert_eq!(cfg.domain.spacing(0), 1.0 / 64.0);
        assert_eq!(cfg.lambda, -1.0);
        assert_eq!(cfg.scheme, SplitScheme::StrangBAB);
        assert_eq!(cfg.reg.kind(), RegKind::LocalEnergy(2));
        assert_eq!(cfg.steps(), 3000);
        let g = cfg.oracle_spec().unwrap();
        assert_eq!(g.velocity, vec![1.0]);
        assert!((g.amplitude - PI.powf(-0.25)).abs() < 1e-15);
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn two_dimensional_defaults() {
        let cfg = RunConfig::from_json_str(r#"{"dim": 2}"#).unwrap();
        assert_eq!(cfg.domain.points(), &[512, 512]);
        assert_eq!(cfg.gaussons[0].velocity, vec![1.0, 1.0]);
    }

    #[test]
    fn order_below_two_is_rejected() {
        let err = RunConfig::from_json_str(r#"{"reg":{"kind":"local_energy","n":1}}"#).unwrap_err();
        assert!(err.to_string().contains("n must be ≥ 2"), "{err}");
    }

    #[test]
    fn non_integral_step_count_is_rejected() {
        let err = RunConfig::from_json_str(r#"{"tau":0.07,"T":3.0}"#).unwrap_err();
        assert!(err.to_string().contains("T/tau not integral"), "{err}");
        assert!(RunConfig::from_json_str(r#"{"tau":0.1,"T":3.0}"#).is_ok());
        assert_eq!(integral_steps(3.0, 0.1 / 512.0), Some(15360));
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = RunConfig::from_json_str(r#"{"taw": 1, "reg": {"epsilon": 0.1}, "zzz": 2}"#)
            .unwrap_err();
        let msg = err.to_string();
        for key in ["taw", "reg.epsilon", "zzz"] {
            assert!(msg.contains(key), "{msg}");
        }
    }

    #[test]
    fn invariant_violations_name_the_field() {
        let cases = [
            (r#"{"points": 7}"#, "points"),
            (r#"{"lower": 1, "upper": 0}"#, "domain"),
            (r#"{"dim": 3}"#, "dim"),
            (r#"{"reg": {"kind": "sqrt_shift", "eps": 2}}"#, "reg.eps"),
            (r#"{"scheme": "rk4"}"#, "scheme"),
            (r#"{"tau": -1}"#, "tau"),
            (
                r#"{"initial": {"gaussons": [{"amplitude": -1}]}}"#,
                "initial.gaussons[0]",
            ),
            (r#"{"observables": ["momentum"]}"#, "observables"),
            (r#"{"lambda": 0}"#, "lambda"),
            (r#"{"dim": 2, "points": [64]}"#, "points"),
        ];
        for (text, field) in cases {
            let err = RunConfig::from_json_str(text).unwrap_err();
            assert!(err.to_string().contains(field), "{text}: {err}");
        }
        assert!(RunConfig::from_json_str("[1, 2]").is_err());
    }

    #[test]
    fn emit_round_trips() {
        let text = r#"{
            "dim": 2, "points": [64, 32], "lower": [-8, -4], "upper": 8,
            "reg": {"kind": "square_shift", "eps": 0.01},
            "scheme": "lie_ba", "tau": 0.01, "T": 0.5, "record_every": 5,
            "initial": {"gaussons": [{"velocity": [0, 0.85], "center": [2, 0]}, {"amplitude": 0.5}]},
            "observables": ["mass"], "out_dir": "somewhere"
        }"#;
        let cfg = RunConfig::from_json_str(text).unwrap();
        let back = RunConfig::from_value(&cfg.emit()).unwrap();
        assert_eq!(cfg, back);
        let default = RunConfig::default();
        assert_eq!(RunConfig::from_value(&default.emit()).unwrap(), default);
    }

    #[test]
    fn with_tau_checks_divisibility() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.with_tau(0.1).unwrap().steps(), 30);
        assert!(cfg.with_tau(0.07).is_err());
    }
}
