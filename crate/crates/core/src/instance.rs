//! Instance files: a JSON document describing two parametrized varieties.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::FieldSpec;
use crate::join::{JoinError, JoinInstance, OracleConfig, DEFAULT_TRIALS};
use crate::oracle::{DEFAULT_BUDGET, MAX_PRIME};
use crate::variety::{ParamVariety, VarietyError};

pub const INSTANCE_SCHEMA: u32 = 1;
/// Instance files are small; anything larger is rejected unread.
pub const MAX_INSTANCE_BYTES: usize = 1 << 20;
pub const MAX_TRIALS: usize = 50;
pub const MAX_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("instance is {0} bytes, the limit is {MAX_INSTANCE_BYTES}")]
    TooLarge(usize),
    #[error("invalid instance at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported schema version {0}, expected {INSTANCE_SCHEMA}")]
    SchemaVersion(u32),
    #[error("{name} has {got} components, P^{ambient} needs {need}")]
    ComponentCount {
        name: &'static str,
        got: usize,
        ambient: usize,
        need: usize,
    },
    #[error("{name}: {source}")]
    Variety {
        name: &'static str,
        #[source]
        source: VarietyError,
    },
    #[error("`{key}`: {message}")]
    Value { key: &'static str, message: String },
    #[error(transparent)]
    Join(#[from] JoinError),
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub source_dim: usize,
    /// One form in `s0..s{source_dim}` per ambient coordinate.
    pub components: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "default_primes")]
    pub primes: Vec<u64>,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_primes() -> Vec<u64> {
    OracleConfig::default().primes
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema: u32,
    pub ambient: usize,
    pub field: FieldSpec,
    #[serde(rename = "X")]
    pub x: VarietySpec,
    #[serde(rename = "Y")]
    pub y: VarietySpec,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
}

impl InstanceFile {
    /// Parses and checks the document shape. The varieties themselves are
    /// checked by [`InstanceFile::build`].
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        if text.len() > MAX_INSTANCE_BYTES {
            return Err(InstanceError::TooLarge(text.len()));
        }
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            InstanceError::Schema {
                path,
                message: e.into_inner().to_string(),
            }
        })?;
        file.check()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, InstanceError> {
        let io = |e: std::io::Error| InstanceError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let len = std::fs::metadata(path).map_err(io)?.len();
        if len > MAX_INSTANCE_BYTES as u64 {
            return Err(InstanceError::TooLarge(len as usize));
        }
        InstanceFile::from_json(&std::fs::read_to_string(path).map_err(io)?)
    }

    pub(crate) fn check(&self) -> Result<(), InstanceError> {
        if self.schema != INSTANCE_SCHEMA {
            return Err(InstanceError::SchemaVersion(self.schema));
        }
        if self.trials == 0 || self.trials > MAX_TRIALS {
            return Err(InstanceError::Value {
                key: "trials",
                message: format!("must be in 1..={MAX_TRIALS}, got {}", self.trials),
            });
        }
        for (name, v) in [("X", &self.x), ("Y", &self.y)] {
            if v.components.len() != self.ambient + 1 {
                return Err(InstanceError::ComponentCount {
                    name,
                    got: v.components.len(),
                    ambient: self.ambient,
                    need: self.ambient + 1,
                });
            }
        }
        if let Some(o) = &self.oracle {
            if o.primes.is_empty() {
                return Err(InstanceError::Value {
                    key: "oracle.primes",
                    message: "needs at least one prime".into(),
                });
            }
            for &p in &o.primes {
                FieldSpec::prime(p).map_err(|e| InstanceError::Value {
                    key: "oracle.primes",
                    message: e.to_string(),
                })?;
                if p > MAX_PRIME {
                    return Err(InstanceError::Value {
                        key: "oracle.primes",
                        message: format!("{p} exceeds the enumeration cap {MAX_PRIME}"),
                    });
                }
            }
            if o.budget == 0 || o.budget > MAX_BUDGET {
                return Err(InstanceError::Value {
                    key: "oracle.budget",
                    message: format!("must be in 1..={MAX_BUDGET}, got {}", o.budget),
                });
            }
        }
        Ok(())
    }

    pub fn oracle_config(&self) -> OracleConfig {
        self.oracle.as_ref().map_or_else(OracleConfig::default, |o| OracleConfig {
            primes: o.primes.clone(),
            budget: o.budget,
        })
    }

    /// The instance over its own field.
    pub fn build(&self) -> Result<JoinInstance, InstanceError> {
        self.build_over(self.field)
    }

    /// The instance with its components read over `field`.
    pub fn build_over(&self, field: FieldSpec) -> Result<JoinInstance, InstanceError> {
        let variety = |name: &'static str, v: &VarietySpec| {
            let label = v.label.clone().unwrap_or_else(|| name.to_string());
            ParamVariety::parse(label, v.source_dim, &v.components, field)
                .map_err(|source| InstanceError::Variety { name, source })
        };
        let inst = JoinInstance::new(variety("X", &self.x)?, variety("Y", &self.y)?, self.seed, self.trials)?;
        Ok(inst.with_oracle(self.oracle_config()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

/// Effective seed: an explicit flag, then the `JOINDEG_SEED` value, then
/// the file.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, file: u64) -> Result<u64, InstanceError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(file),
        Some(s) => s.parse().map_err(|_| InstanceError::Value {
            key: "JOINDEG_SEED",
            message: format!("not an unsigned 64-bit integer: {s:?}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SKEW: &str = r#"{
        "schema": 1, "ambient": 3, "field": "Q",
        "X": {"label": "L1", "source_dim": 1, "components": ["s0", "s1", "0", "0"]},
        "Y": {"source_dim": 1, "components": ["0", "0", "s0", "s1"]},
        "seed": 7
    }"#;

    #[test]
    fn parses_and_builds() {
        let f = InstanceFile::from_json(SKEW).unwrap();
        assert_eq!(f.trials, DEFAULT_TRIALS);
        let inst = f.build().unwrap();
        assert_eq!((inst.ambient(), inst.x.label(), inst.y.label()), (3, "L1", "Y"));
        assert_eq!(inst.oracle, OracleConfig::default());
        let back = InstanceFile::from_json(&f.to_json_pretty()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn unknown_key_is_named() {
        let bad = SKEW.replace("\"seed\": 7", "\"seed\": 7, \"colour\": 1");
        let e = InstanceFile::from_json(&bad).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let bad = SKEW.replace("\"source_dim\": 1, \"components\": [\"0\"", "\"source_dim\": 1, \"comps\": [\"0\"");
        let e = InstanceFile::from_json(&bad).unwrap_err();
        assert!(matches!(&e, InstanceError::Schema { path, .. } if path == "Y.comps"), "{e:?}");
    }

    #[test]
    fn shape_errors() {
        let e = InstanceFile::from_json(&SKEW.replace("\"ambient\": 3", "\"ambient\": 4")).unwrap_err();
        assert!(matches!(e, InstanceError::ComponentCount { name: "X", got: 4, .. }));
        let e = InstanceFile::from_json(&SKEW.replace("\"schema\": 1", "\"schema\": 2")).unwrap_err();
        assert_eq!(e, InstanceError::SchemaVersion(2));
        let e = InstanceFile::from_json(&SKEW.replace("\"field\": \"Q\"", "\"field\": {\"p\": 4}")).unwrap_err();
        assert!(matches!(&e, InstanceError::Schema { path, .. } if path == "field"), "{e:?}");
        let with_oracle = SKEW.replace("\"seed\": 7", "\"seed\": 7, \"oracle\": {\"primes\": [4]}");
        assert!(matches!(
            InstanceFile::from_json(&with_oracle),
            Err(InstanceError::Value { key: "oracle.primes", .. })
        ));
        let zero = SKEW.replace("\"seed\": 7", "\"seed\": 7, \"trials\": 0");
        assert!(matches!(InstanceFile::from_json(&zero), Err(InstanceError::Value { key: "trials", .. })));
        let garbage = SKEW.replace("\"s0\", \"s1\", \"0\", \"0\"", "\"s0\", \"s1^2\", \"0\", \"0\"");
        let f = InstanceFile::from_json(&garbage).unwrap();
        assert!(matches!(f.build(), Err(InstanceError::Variety { name: "X", .. })));
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some("2"), 3), Ok(1));
        assert_eq!(resolve_seed(None, Some(" 2 "), 3), Ok(2));
        assert_eq!(resolve_seed(None, Some(""), 3), Ok(3));
        assert_eq!(resolve_seed(None, None, 3), Ok(3));
        assert!(resolve_seed(None, Some("-1"), 3).is_err());
    }
}
