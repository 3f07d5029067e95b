//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calculus::ScalarSymbol;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::lab::{default_lambdas, Pipeline, TestFunctionSpec, TestKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    Norm,
    Rbound,
    Maximal,
    Hormander,
    Equivalence,
}

fn default_p() -> f64 {
    2.0
}
fn default_trials() -> usize {
    32
}
fn default_lambda_count() -> usize {
    8
}
fn default_samples() -> usize {
    400
}
fn default_mu_range() -> [f64; 2] {
    [1e-3, 1e3]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub kind: ProbeKind,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Explicit λ set; otherwise `lambda_count` log-uniform draws from [1/4, 4].
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default = "default_lambda_count")]
    pub lambda_count: usize,
    /// Symbol for the Hörmander probe.
    #[serde(default)]
    pub symbol: Option<String>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default = "default_mu_range")]
    pub mu_range: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl ProbeConfig {
    pub fn lambda_set(&self) -> Vec<f64> {
        self.lambdas
            .clone()
            .unwrap_or_else(|| default_lambdas(self.lambda_count, self.seed))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// Grid file to read; when absent the test function below is synthesized.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub stem: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GFunctionConfig {
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// Reduced sizes, minutes in total.
    #[default]
    Base,
    /// Sizes named by the acceptance criteria.
    Full,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestConfig {
    #[serde(default)]
    pub scale: Scale,
    /// Suite numbers to run; all when empty.
    #[serde(default)]
    pub suites: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    #[serde(rename = "K")]
    pub k: usize,
    /// Operator stages applied left to right.
    #[serde(default)]
    pub operator: Vec<String>,
    #[serde(default)]
    pub gfunc: Option<GFunctionConfig>,
    pub test_function: TestFunctionSpec,
    #[serde(default)]
    pub probe: Option<ProbeConfig>,
    #[serde(default)]
    pub input: InputConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub selftest: SelftestConfig,
}

fn keyed(prefix: &str, e: Error) -> Error {
    match e {
        Error::Config { key, message } => Error::config(format!("{prefix}.{key}"), message),
        other => Error::config(prefix, other.to_string()),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn pipeline(&self) -> Result<Pipeline> {
        Pipeline::parse(&self.operator)
    }

    /// Range checks with the offending key path.
    pub fn validate(&self) -> Result<()> {
        self.grid.validate().map_err(|e| keyed("grid", e))?;
        let tf = &self.test_function;
        if tf.m_max == 0 || tf.m_max >= self.grid.nt / 2 {
            return Err(Error::config("test_function.m_max", format!("must lie in 1..{}", self.grid.nt / 2)));
        }
        if tf.k_max > self.k {
            return Err(Error::config("test_function.k_max", format!("exceeds K = {}", self.k)));
        }
        if !(tf.decay.is_finite() && tf.decay >= 0.0) {
            return Err(Error::config("test_function.decay", "must be finite and non-negative"));
        }
        if tf.kind == TestKind::Bump && tf.decay != 1.0 {
            return Err(Error::config("test_function.decay", "only random Hermite coefficients are damped"));
        }
        for (i, s) in self.operator.iter().enumerate() {
            let stage =
                crate::lab::Stage::parse(s).map_err(|e| Error::config(format!("operator[{i}]"), e.to_string()))?;
            if stage.min_dim() > self.grid.n {
                return Err(Error::config(
                    format!("operator[{i}]"),
                    format!("{s} needs n >= {}, grid has n = {}", stage.min_dim(), self.grid.n),
                ));
            }
        }
        if let Some(g) = &self.gfunc {
            if g.k == 0 {
                return Err(Error::config("gfunc.k", "must be at least 1"));
            }
        }
        if let Some(p) = &self.probe {
            self.validate_probe(p)?;
        }
        if self.selftest.suites.iter().any(|s| !(1..=12).contains(s)) {
            return Err(Error::config("selftest.suites", "suite numbers run from 1 to 12"));
        }
        if let Some(stem) = &self.output.stem {
            if stem.is_empty() || stem.contains(['/', '\\']) {
                return Err(Error::config("output.stem", "must be a plain file name"));
            }
        }
        Ok(())
    }

    fn validate_probe(&self, p: &ProbeConfig) -> Result<()> {
        if !(p.p > 1.0 && p.p.is_finite()) {
            return Err(Error::config("probe.p", format!("{} outside (1, inf)", p.p)));
        }
        if p.trials == 0 {
            return Err(Error::config("probe.trials", "must be positive"));
        }
        if let Some(l) = &p.lambdas {
            if l.is_empty() || l.iter().any(|v| !v.is_finite() || *v == 0.0) {
                return Err(Error::config("probe.lambdas", "need a non-empty list of finite nonzero values"));
            }
        } else if p.lambda_count == 0 {
            return Err(Error::config("probe.lambda_count", "must be positive"));
        }
        let [lo, hi] = p.mu_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::config("probe.mu_range", "need 0 < lo < hi < inf"));
        }
        if p.samples < 2 {
            return Err(Error::config("probe.samples", "need at least 2"));
        }
        match p.kind {
            ProbeKind::Norm | ProbeKind::Rbound if self.operator.is_empty() => {
                Err(Error::config("operator", "probe needs at least one stage"))
            }
            ProbeKind::Hormander => {
                let s = p.symbol.as_deref().ok_or_else(|| Error::config("probe.symbol", "required for hormander"))?;
                ScalarSymbol::parse(s).map_err(|e| Error::config("probe.symbol", e.to_string()))?;
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
K = 8
operator = ["riesz:1"]

[grid]
n = 1
nx = 64
x_extent = 8.0
nt = 16
t_extent = 6.283185307179586

[test_function]
kind = "hermite-random"
k_max = 6
m_max = 3
seed = 1
"#;

    #[test]
    fn parses_minimal() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.k, 8);
        assert_eq!(c.selftest.scale, Scale::Base);
    }

    fn key_of(text: &str) -> String {
        match RunConfig::parse(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_report_path() {
        assert_eq!(key_of(&format!("{BASE}\n[probe]\nkind = \"norm\"\nbogus = 1\n")), "probe.bogus");
        assert_eq!(key_of(&BASE.replace("nx = 64", "nx = 64\nny = 3")), "grid.ny");
        assert_eq!(key_of(&format!("extra = 1\n{BASE}")), "extra");
    }

    #[test]
    fn range_errors_report_path() {
        assert_eq!(key_of(&BASE.replace("nx = 64", "nx = 60")), "grid.nx");
        assert_eq!(key_of(&BASE.replace("m_max = 3", "m_max = 8")), "test_function.m_max");
        assert_eq!(key_of(&BASE.replace("riesz:1", "riesz:0")), "operator[0]");
        assert_eq!(key_of(&BASE.replace("riesz:1", "riesz:2")), "operator[0]");
        assert_eq!(key_of(&format!("{BASE}\n[probe]\nkind = \"norm\"\np = 1.0\n")), "probe.p");
        assert_eq!(key_of(&format!("{BASE}\n[probe]\nkind = \"hormander\"\n")), "probe.symbol");
        assert_eq!(key_of(&format!("{BASE}\n[probe]\nkind = \"sideways\"\n")), "probe.kind");
    }
}
