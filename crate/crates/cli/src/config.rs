use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sandwich::divergence::{OptimizerConfig, RenyiOrder};
use sandwich::equality::RecoverableKind;
use sandwich::linalg::MatrixJson;
use sandwich::C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Divergence,
    DpiScan,
    EqualityScan,
    RecoveryTest,
    VariationalCheck,
    IntegralCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Divergence,
        Scenario::DpiScan,
        Scenario::EqualityScan,
        Scenario::RecoveryTest,
        Scenario::VariationalCheck,
        Scenario::IntegralCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Divergence => "divergence",
            Scenario::DpiScan => "dpi-scan",
            Scenario::EqualityScan => "equality-scan",
            Scenario::RecoveryTest => "recovery-test",
            Scenario::VariationalCheck => "variational-check",
            Scenario::IntegralCheck => "integral-check",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Scenario::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown scenario '{s}'")))
    }
}

/// Channel used by the scans that take a generic triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelChoice {
    /// `Tr_B` on `A ⊗ B`.
    PartialTrace,
    /// Random Kraus channel `AB → A` with `d_B` Kraus operators.
    RandomKraus,
    /// Partial trace on even trials, random Kraus on odd ones.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed negative DPI gap.
    pub dpi: f64,
    /// Residual bound on saturating triples.
    pub saturation: f64,
    pub variational_value: f64,
    pub variational_distance: f64,
    pub integral: f64,
    /// A gap above this must come with a `t3` residual above
    /// `copositivity_residual`, and conversely.
    pub copositivity_gap: f64,
    pub copositivity_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dpi: 1e-9,
            saturation: 1e-8,
            variational_value: 1e-6,
            variational_distance: 1e-4,
            integral: 1e-6,
            copositivity_gap: 1e-4,
            copositivity_residual: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    /// `(d_A, d_B)`. Single-system scenarios (variational, integral,
    /// random divergence pairs) use dimension `d_A`.
    pub dims: (usize, usize),
    pub alpha_grid: Vec<f64>,
    /// Empty means the default grid for each `α`.
    pub beta_grid: Vec<C64>,
    pub trials: usize,
    pub tolerances: Tolerances,
    pub channel: ChannelChoice,
    pub triple_kind: RecoverableKind,
    pub optimizer: OptimizerConfig,
    pub quadrature_nodes: usize,
    /// Fixed states for the divergence scenario.
    pub rho: Option<MatrixJson>,
    pub sigma: Option<MatrixJson>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: Scenario::DpiScan,
            seed: 0,
            dims: (2, 2),
            alpha_grid: vec![-0.9, -0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7, 0.9],
            beta_grid: Vec::new(),
            trials: 20,
            tolerances: Tolerances::default(),
            channel: ChannelChoice::PartialTrace,
            triple_kind: RecoverableKind::Product,
            optimizer: OptimizerConfig::default(),
            quadrature_nodes: 200,
            rho: None,
            sigma: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        if self.dims.0 < 2 || self.dims.1 < 2 {
            return bad(format!("dims must be at least 2 each, got {:?}", self.dims));
        }
        if self.alpha_grid.is_empty() {
            return bad("alpha_grid is empty".into());
        }
        for &a in &self.alpha_grid {
            if RenyiOrder::new(a).is_err() {
                return bad(format!("alpha {a} outside [-1, 0) U (0, 1)"));
            }
        }
        if self.beta_grid.iter().any(|b| !(b.re.is_finite() && b.im.is_finite())) {
            return bad("beta_grid contains a non-finite value".into());
        }
        if self.quadrature_nodes == 0 {
            return bad("quadrature_nodes must be positive".into());
        }
        if self.rho.is_some() != self.sigma.is_some() {
            return bad("rho and sigma must be given together".into());
        }
        Ok(())
    }

    /// Parses a JSON config file as a partial override of `base`: keys
    /// present in the file replace the corresponding fields.
    pub fn overlay_file(base: &ExperimentConfig, path: &Path) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::overlay_json(base, &text)
    }

    pub fn overlay_json(base: &ExperimentConfig, text: &str) -> Result<ExperimentConfig, CliError> {
        let file: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        let Value::Object(file) = file else {
            return Err(CliError::Config("config must be a JSON object".into()));
        };
        let mut merged = serde_json::to_value(base).map_err(|e| CliError::Config(e.to_string()))?;
        let obj = merged.as_object_mut().expect("config serializes to an object");
        for (k, v) in file {
            if k == "tolerances" {
                if let (Some(Value::Object(dst)), Value::Object(src)) = (obj.get_mut("tolerances"), &v) {
                    for (tk, tv) in src {
                        dst.insert(tk.clone(), tv.clone());
                    }
                    continue;
                }
            }
            obj.insert(k, v);
        }
        serde_json::from_value(merged).map_err(|e| CliError::Config(format!("config: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = ExperimentConfig { trials: 0, ..Default::default() };
        assert!(c.validate().is_err());
        c.trials = 1;
        c.dims = (1, 2);
        assert!(c.validate().is_err());
        c.dims = (2, 2);
        c.alpha_grid = vec![1.0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn overlay_replaces_only_present_keys() {
        let base = ExperimentConfig { trials: 7, seed: 3, ..Default::default() };
        let c = ExperimentConfig::overlay_json(&base, r#"{"alpha_grid": [0.5], "tolerances": {"dpi": 1e-6}}"#)
            .unwrap();
        assert_eq!(c.trials, 7);
        assert_eq!(c.alpha_grid, vec![0.5]);
        assert_eq!(c.tolerances.dpi, 1e-6);
        assert_eq!(c.tolerances.saturation, 1e-8);
        assert!(ExperimentConfig::overlay_json(&base, r#"{"bogus": 1}"#).is_err());
        assert!(ExperimentConfig::overlay_json(&base, "[1]").is_err());
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
    }
}
