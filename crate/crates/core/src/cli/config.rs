//! Experiment configuration file.
//!
//! ```toml
//! kind = "clock"                 # kernel-sweep | clock | dos | verify | hatn-search
//! out = "clock.csv"
//! workers = 4                    # optional
//!
//! [potential]                    # optional; omitted means V = 0
//! count = 4
//! amplitudes = { rule = "power", scale = 1.0, exponent = 0.25 }
//! centers = { rule = "geometric", first = 10.0, ratio = 10.0 }
//!
//! [integrator]                   # optional
//! steps_per_bump = 512
//! det_tolerance = 1e-10
//!
//! [grid]                         # every key optional
//! xi = [1.0]
//! lengths = [100.0, 1000.0]      # strictly increasing
//! a = [-1.0, 0.0, 1.0]
//! b = [-1.0, 0.0, 1.0]
//! ell = [0]
//! depth = 3
//! interval = [1.0, 4.0]
//! bins = 10
//! methods = ["ratio"]            # ratio | quadrature | cd_formula
//! tolerance = 0.1
//! ab_bound = 2.0
//! window = [0.5, 2.0]
//! max_length = 1e5
//!
//! [verify]                       # probes for kind = "verify"
//! probes = ["one_bump"]          # one_bump | transfer_bound | truncation_step | kappa_schedule
//! lambda = 1e-3
//! m = [1, 2]
//! x_grid = [1.0, 10.0, 100.0]
//! t_grid = [-1.0, 0.0, 1.0]
//! terms = [10, 100]              # n range for the kappa schedule
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{PearsonPotential, PotentialSpec};
use crate::propagate::IntegratorSettings;
use crate::tolerances::{DEFAULT_STEPS_PER_BUMP, DET_DRIFT_PER_LENGTH, MIN_STEPS_PER_BUMP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    KernelSweep,
    Clock,
    Dos,
    Verify,
    HatnSearch,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::KernelSweep => "kernel-sweep",
            ExperimentKind::Clock => "clock",
            ExperimentKind::Dos => "dos",
            ExperimentKind::Verify => "verify",
            ExperimentKind::HatnSearch => "hatn-search",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            ExperimentKind::KernelSweep,
            ExperimentKind::Clock,
            ExperimentKind::Dos,
            ExperimentKind::Verify,
            ExperimentKind::HatnSearch,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| config_err("kind", format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "default_steps")]
    pub steps_per_bump: usize,
    #[serde(default = "default_det")]
    pub det_tolerance: f64,
}

fn default_steps() -> usize {
    DEFAULT_STEPS_PER_BUMP
}

fn default_det() -> f64 {
    DET_DRIFT_PER_LENGTH
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            steps_per_bump: default_steps(),
            det_tolerance: default_det(),
        }
    }
}

impl From<IntegratorConfig> for IntegratorSettings {
    fn from(c: IntegratorConfig) -> Self {
        IntegratorSettings {
            steps_per_bump: c.steps_per_bump,
            det_tolerance: c.det_tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub xi: Vec<f64>,
    pub lengths: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub ell: Vec<usize>,
    pub depth: usize,
    pub interval: [f64; 2],
    pub bins: usize,
    pub methods: Vec<String>,
    pub tolerance: f64,
    pub ab_bound: f64,
    pub window: [f64; 2],
    pub max_length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            xi: vec![1.0],
            lengths: vec![100.0],
            a: vec![0.0],
            b: vec![0.0],
            ell: vec![0],
            depth: 3,
            interval: [1.0, 4.0],
            bins: 10,
            methods: vec!["ratio".into()],
            tolerance: 0.1,
            ab_bound: 2.0,
            window: [0.5, 2.0],
            max_length: 1e5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub probes: Vec<String>,
    pub lambda: f64,
    pub m: Vec<usize>,
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub terms: [usize; 2],
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            probes: vec!["one_bump".into()],
            lambda: 1e-3,
            m: vec![1, 2],
            x_grid: crate::verify::default_x_grid(),
            t_grid: crate::verify::default_t_grid(),
            terms: [10, 100],
        }
    }
}

pub const KERNEL_METHODS: [&str; 3] = ["ratio", "quadrature", "cd_formula"];
pub const PROBES: [&str; 4] = [
    "one_bump",
    "transfer_bound",
    "truncation_step",
    "kappa_schedule",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn config_err(location: &str, message: impl Into<String>) -> Error {
    Error::Config {
        location: location.to_string(),
        message: message.into(),
    }
}

fn positive(values: &[f64]) -> bool {
    values.iter().all(|&v| v > 0.0 && v.is_finite())
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            out: None,
            workers: None,
            potential: None,
            integrator: IntegratorConfig::default(),
            grid: GridConfig::default(),
            verify: VerifyConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config {
            location: e
                .span()
                .map(|s| format!("line {}", crate::potential::line_of(text, s.start)))
                .unwrap_or_else(|| "config".into()),
            message: e.message().to_string(),
        })?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The configured potential with the integrator settings attached.
    pub fn build_potential(&self) -> Result<PearsonPotential> {
        let v = match &self.potential {
            Some(spec) => spec.build()?,
            None => PearsonPotential::zero(),
        };
        Ok(v.with_settings(self.integrator.into()))
    }

    /// Checks the invariants shared by every experiment kind.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        let nonempty = [
            ("grid.xi", g.xi.is_empty()),
            ("grid.lengths", g.lengths.is_empty()),
            ("grid.a", g.a.is_empty()),
            ("grid.b", g.b.is_empty()),
            ("grid.ell", g.ell.is_empty()),
            ("grid.methods", g.methods.is_empty()),
            ("verify.probes", self.verify.probes.is_empty()),
            ("verify.m", self.verify.m.is_empty()),
            ("verify.x_grid", self.verify.x_grid.is_empty()),
            ("verify.t_grid", self.verify.t_grid.is_empty()),
        ];
        if let Some((key, _)) = nonempty.iter().find(|(_, empty)| *empty) {
            return Err(config_err(key, "grid must not be empty"));
        }
        if !positive(&g.xi) {
            return Err(config_err("grid.xi", "energies must be positive"));
        }
        if !positive(&g.lengths) || g.lengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err(
                "grid.lengths",
                "lengths must be positive and strictly increasing",
            ));
        }
        if g.depth == 0 {
            return Err(config_err("grid.depth", "depth must be at least 1"));
        }
        if !(g.interval[0] > 0.0 && g.interval[1] > g.interval[0]) || g.bins == 0 {
            return Err(config_err(
                "grid.interval",
                "need 0 < lo < hi and at least one bin",
            ));
        }
        if !(g.window[0] > 0.0 && g.window[1] >= g.window[0]) {
            return Err(config_err("grid.window", "need 0 < lo <= hi"));
        }
        if !(g.tolerance > 0.0) {
            return Err(config_err("grid.tolerance", "tolerance must be positive"));
        }
        if let Some(m) = g
            .methods
            .iter()
            .find(|m| !KERNEL_METHODS.contains(&m.as_str()))
        {
            return Err(config_err("grid.methods", format!("unknown method `{m}`")));
        }
        if let Some(p) = self
            .verify
            .probes
            .iter()
            .find(|p| !PROBES.contains(&p.as_str()))
        {
            return Err(config_err("verify.probes", format!("unknown probe `{p}`")));
        }
        if self.verify.terms[0] == 0 || self.verify.terms[1] < self.verify.terms[0] {
            return Err(config_err("verify.terms", "need 1 <= first <= last"));
        }
        if self.integrator.steps_per_bump < MIN_STEPS_PER_BUMP {
            return Err(config_err(
                "integrator.steps_per_bump",
                format!("at least {MIN_STEPS_PER_BUMP} steps required"),
            ));
        }
        if self.workers == Some(0) {
            return Err(config_err("workers", "worker count must be positive"));
        }
        self.build_potential().map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_full_example() {
        let text = r#"
kind = "clock"
out = "clock.csv"

[potential]
count = 2
amplitudes = { rule = "explicit", values = [0.5, 0.25] }
centers = { rule = "geometric", first = 10.0, ratio = 10.0 }

[grid]
lengths = [100.0, 1000.0]
depth = 2
"#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        c.validate().unwrap();
        assert_eq!(c.kind, ExperimentKind::Clock);
        assert_eq!(c.build_potential().unwrap().centers(), &[10.0, 100.0]);
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_invalid_grids() {
        let mut c = ExperimentConfig::new(ExperimentKind::KernelSweep);
        c.grid.xi.clear();
        assert!(
            matches!(c.validate(), Err(Error::Config { location, .. }) if location == "grid.xi")
        );
        let mut c = ExperimentConfig::new(ExperimentKind::Clock);
        c.grid.lengths = vec![1000.0, 100.0];
        assert!(
            matches!(c.validate(), Err(Error::Config { location, .. }) if location == "grid.lengths")
        );
        let err =
            ExperimentConfig::from_toml_str("kind = \"clock\"\n[grid]\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { location, .. } if location == "line 3"));
        assert!("dos".parse::<ExperimentKind>().is_ok());
        assert!("plot".parse::<ExperimentKind>().is_err());
    }
}
