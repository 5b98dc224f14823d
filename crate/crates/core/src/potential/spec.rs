//! Plain-text (TOML) description of a potential.
//!
//! ```toml
//! profile = "canonical"          # only built-in profile
//! count = 4                      # required unless both rules are explicit
//! decay_from = 0                 # optional, 0-based index where |lambda| must stop growing
//! amplitudes = { rule = "power", scale = 1.0, exponent = 0.25 }
//! centers = { rule = "geometric", first = 10.0, ratio = 10.0 }
//! ```
//!
//! Explicit lists use `{ rule = "explicit", values = [..] }` for either field.

use serde::{Deserialize, Serialize};

use super::{geometric_centers, power_law_amplitudes, BumpProfile, PearsonPotential};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase", deny_unknown_fields)]
pub enum AmplitudeRule {
    Explicit {
        values: Vec<f64>,
    },
    /// `lambda_n = scale * n^(-exponent)`
    Power {
        scale: f64,
        exponent: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase", deny_unknown_fields)]
pub enum CenterRule {
    Explicit { values: Vec<f64> },
    Geometric { first: f64, ratio: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default)]
    pub decay_from: usize,
    pub amplitudes: AmplitudeRule,
    pub centers: CenterRule,
}

fn default_profile() -> String {
    "canonical".to_string()
}

impl PotentialSpec {
    pub fn zero() -> Self {
        Self {
            profile: default_profile(),
            count: None,
            decay_from: 0,
            amplitudes: AmplitudeRule::Explicit { values: Vec::new() },
            centers: CenterRule::Explicit { values: Vec::new() },
        }
    }

    pub fn canonical(count: usize) -> Self {
        Self {
            profile: default_profile(),
            count: Some(count),
            decay_from: 0,
            amplitudes: AmplitudeRule::Power {
                scale: 1.0,
                exponent: 0.25,
            },
            centers: CenterRule::Geometric {
                first: 10.0,
                ratio: super::DEFAULT_SPARSITY_RATIO,
            },
        }
    }

    fn config_err(key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            location: format!("potential.{key}"),
            message: message.into(),
        }
    }

    fn resolved_count(&self) -> Result<usize> {
        let a_len = match &self.amplitudes {
            AmplitudeRule::Explicit { values } => Some(values.len()),
            AmplitudeRule::Power { .. } => None,
        };
        let c_len = match &self.centers {
            CenterRule::Explicit { values } => Some(values.len()),
            CenterRule::Geometric { .. } => None,
        };
        let lens = [self.count, a_len, c_len];
        let mut known = lens.iter().flatten();
        let Some(&n) = known.next() else {
            return Err(Self::config_err(
                "count",
                "required when no explicit list fixes the bump count",
            ));
        };
        if known.any(|&m| m != n) {
            return Err(Self::config_err(
                "count",
                format!(
                    "inconsistent bump counts {:?} (count, amplitudes, centers)",
                    lens
                ),
            ));
        }
        Ok(n)
    }

    pub fn build(&self) -> Result<PearsonPotential> {
        let profile = match self.profile.as_str() {
            "canonical" => BumpProfile::Canonical,
            other => {
                return Err(Self::config_err(
                    "profile",
                    format!("unknown profile `{other}`"),
                ))
            }
        };
        let n = self.resolved_count()?;
        let amplitudes = match &self.amplitudes {
            AmplitudeRule::Explicit { values } => values.clone(),
            AmplitudeRule::Power { scale, exponent } => power_law_amplitudes(*scale, *exponent, n),
        };
        let centers = match &self.centers {
            CenterRule::Explicit { values } => values.clone(),
            CenterRule::Geometric { first, ratio } => geometric_centers(*first, *ratio, n)
                .map_err(|e| Self::config_err("centers", e.to_string()))?,
        };
        PearsonPotential::with_decay_from(profile, amplitudes, centers, self.decay_from)
            .map_err(|e| Self::config_err("amplitudes", e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config {
            location: e
                .span()
                .map(|s| format!("line {}", line_of(text, s.start)))
                .unwrap_or_else(|| "potential".into()),
            message: e.message().to_string(),
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("potential spec serializes")
    }
}

/// 1-based line number of a byte offset.
pub(crate) fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_canonical() {
        let text = r#"
profile = "canonical"
count = 3
amplitudes = { rule = "power", scale = 1.0, exponent = 0.25 }
centers = { rule = "geometric", first = 10.0, ratio = 10.0 }
"#;
        let spec = PotentialSpec::from_toml_str(text).unwrap();
        assert_eq!(spec, PotentialSpec::canonical(3));
        let v = spec.build().unwrap();
        assert_eq!(v.centers(), &[10.0, 100.0, 1000.0]);
    }

    #[test]
    fn explicit_lists_roundtrip() {
        let spec = PotentialSpec {
            profile: "canonical".into(),
            count: None,
            decay_from: 0,
            amplitudes: AmplitudeRule::Explicit {
                values: vec![0.5, 0.25],
            },
            centers: CenterRule::Explicit {
                values: vec![10.0, 100.0],
            },
        };
        let back = PotentialSpec::from_toml_str(&spec.to_toml_string()).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.build().unwrap().len(), 2);
        assert!(PotentialSpec::zero().build().unwrap().is_empty());
    }

    #[test]
    fn errors_name_line_or_key() {
        let err = PotentialSpec::from_toml_str("count = 2\n\namplitudes = { rule = \"bogus\" }\n")
            .unwrap_err();
        match err {
            Error::Config { location, .. } => assert_eq!(location, "line 3"),
            e => panic!("{e}"),
        }
        let spec = PotentialSpec {
            count: None,
            ..PotentialSpec::canonical(1)
        };
        assert!(
            matches!(spec.build(), Err(Error::Config { location, .. }) if location == "potential.count")
        );
        let bad_profile = PotentialSpec {
            profile: "gaussian".into(),
            ..PotentialSpec::canonical(1)
        };
        assert!(bad_profile.build().is_err());
    }
}
