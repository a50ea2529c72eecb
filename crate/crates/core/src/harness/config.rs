use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::libsvm::LabelPolicy;

/// Experiment description, read from TOML.
///
/// ```toml
/// output = "runs/quadratic.csv"
/// seeds = [0, 1, 2]
///
/// [problem]
/// kind = "synth_quadratic"
/// d = 600
/// n = 500
/// kappa = 100.0
/// lambda = 1.0
///
/// [options]
/// max_iters = 2000
/// target_subopt = 1e-10
///
/// [[algorithm]]
/// kind = "arssn"
/// fraction = 0.05
/// c = 0.85
///
/// [[algorithm]]
/// kind = "rssn"
/// fraction = 0.05
/// c = 0.85
/// ```
///
/// Relative paths are resolved against the directory of the config file,
/// so the echo holds absolute paths.
/// After resolution every optional field is filled in; that form is what
/// gets echoed next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output: PathBuf,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub options: OptionsConfig,
    #[serde(rename = "algorithm")]
    pub algorithms: Vec<AlgorithmConfig>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Ridge regression with a prescribed spectrum and known optimum.
    SynthQuadratic {
        d: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        kappa: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        /// Seed of the generated data (run seeds drive the algorithms).
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        homogeneous: Option<bool>,
    },
    Ridge {
        data: PathBuf,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        /// `λ = lambda_times_n / n`.
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda_times_n: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        labels: Option<LabelPolicy>,
    },
    Logistic {
        data: PathBuf,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda_times_n: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsConfig {
    /// Defaults to 1e-10 for quadratic problems and 1e-8 for logistic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Fill `elapsed_seconds`. Off by default so the CSV is reproducible.
    #[serde(default)]
    pub timing: bool,
    /// Stop a run once `F(x) − F*` reaches this (known-optimum problems only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_subopt: Option<f64>,
    #[serde(default)]
    pub subsolver: SubsolverConfig,
}

fn default_max_iters() -> usize {
    1000
}
fn default_record_every() -> usize {
    1
}

impl Default for OptionsConfig {
    fn default() -> Self {
        OptionsConfig {
            grad_tol: None,
            max_iters: default_max_iters(),
            record_every: default_record_every(),
            timing: false,
            target_subopt: None,
            subsolver: SubsolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubsolverConfig {
    #[default]
    Woodbury,
    Cg { rel_tol: f64, max_iters: usize },
    /// Sketch-preconditioned CG with either a fixed iteration count or one
    /// derived from the target accuracy `eps1`.
    FastPcg {
        #[serde(skip_serializing_if = "Option::is_none")]
        iters: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        eps1: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgorithmConfig {
    Arssn(NewtonConfig),
    Rssn(NewtonConfig),
    Agd(AgdConfig),
    Svrg(SvrgConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingName {
    #[default]
    RowNorm,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerName {
    /// `α = c‖B‖²`.
    #[default]
    FactorNorm,
    /// `α = c‖∇²F‖`.
    HessianNorm,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingName>,
    /// Sample size as a fraction of `n`; exclusive with `samples`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularizer: Option<RegularizerName>,
    /// Regularizer constant in `(0, 1)`; exclusive with `alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Fixed `α`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// ARSSN only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<MomentumConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MomentumConfig {
    Fixed { theta: f64 },
    /// `θ_t = t/(t + k)`; `k` defaults to 16 for dense data and 30 for
    /// sparse data.
    Anneal {
        #[serde(default)]
        k: Option<f64>,
    },
    Optimal {
        pi: f64,
        #[serde(default)]
        eps0: f64,
    },
    /// `Optimal` with `π = 2cκ/(1 + 2cκ)` from the regularizer constant and
    /// the problem's condition number.
    Theory {
        #[serde(default)]
        eps0: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgdConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Gradient Lipschitz constant; estimated at `x0` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    /// Strong convexity; the regularizer curvature when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvrgConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Defaults to `1/(10·L_max)` over the component functions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Defaults to `2n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch_len: Option<usize>,
}

impl AlgorithmConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            AlgorithmConfig::Arssn(_) => "arssn",
            AlgorithmConfig::Rssn(_) => "rssn",
            AlgorithmConfig::Agd(_) => "agd",
            AlgorithmConfig::Svrg(_) => "svrg",
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            AlgorithmConfig::Arssn(c) | AlgorithmConfig::Rssn(c) => c.name.as_deref(),
            AlgorithmConfig::Agd(c) => c.name.as_deref(),
            AlgorithmConfig::Svrg(c) => c.name.as_deref(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config and resolves relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let base = std::fs::canonicalize(dir).map_err(|e| Error::io(dir, e))?;
        cfg.rebase(&base);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output);
        match &mut self.problem {
            ProblemConfig::Ridge { data, .. } | ProblemConfig::Logistic { data, .. } => fix(data),
            ProblemConfig::SynthQuadratic { .. } => {}
        }
    }

    /// Checks everything that does not need the data loaded.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.algorithms.is_empty() {
            return bad("at least one [[algorithm]] is required".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        match &self.problem {
            ProblemConfig::SynthQuadratic { d, n, kappa, lambda, .. } => {
                if *d < 2 || n.is_some_and(|n| n == 0) {
                    return bad("synth_quadratic needs d >= 2 and n >= 1".into());
                }
                if !(*kappa >= 1.0) || !kappa.is_finite() {
                    return bad(format!("kappa must be finite and >= 1, got {kappa}"));
                }
                check_lambda(*lambda, None)?;
            }
            ProblemConfig::Ridge { data, lambda, lambda_times_n, .. }
            | ProblemConfig::Logistic { data, lambda, lambda_times_n } => {
                check_lambda(*lambda, *lambda_times_n)?;
                if !data.exists() {
                    return bad(format!("data file {} does not exist", data.display()));
                }
            }
        }
        let o = &self.options;
        if o.grad_tol.is_some_and(|t| !(t > 0.0)) {
            return bad("options.grad_tol must be positive".into());
        }
        if o.record_every == 0 {
            return bad("options.record_every must be at least 1".into());
        }
        if o.target_subopt.is_some_and(|t| !(t > 0.0)) {
            return bad("options.target_subopt must be positive".into());
        }
        match o.subsolver {
            SubsolverConfig::Cg { rel_tol, .. } if !(rel_tol > 0.0) => {
                return bad("cg rel_tol must be positive".into())
            }
            SubsolverConfig::FastPcg { iters, eps1 } if iters.is_some() == eps1.is_some() => {
                return bad("fast_pcg needs exactly one of iters or eps1".into())
            }
            _ => {}
        }
        for (i, alg) in self.algorithms.iter().enumerate() {
            validate_algorithm(alg).map_err(|e| Error::Config(format!("algorithm {}: {e}", i + 1)))?;
        }
        Ok(())
    }
}

fn check_lambda(lambda: Option<f64>, times_n: Option<f64>) -> Result<()> {
    if lambda.is_some() && times_n.is_some() {
        return Err(Error::Config("give lambda or lambda_times_n, not both".into()));
    }
    for v in [lambda, times_n].into_iter().flatten() {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Config(format!("lambda must be finite and nonnegative, got {v}")));
        }
    }
    Ok(())
}

fn validate_algorithm(alg: &AlgorithmConfig) -> std::result::Result<(), String> {
    match alg {
        AlgorithmConfig::Arssn(c) | AlgorithmConfig::Rssn(c) => {
            if matches!(alg, AlgorithmConfig::Rssn(_)) && c.momentum.is_some() {
                return Err("rssn takes no momentum".into());
            }
            match (c.fraction, c.samples) {
                (Some(_), Some(_)) => return Err("give fraction or samples, not both".into()),
                (Some(f), None) if !(f > 0.0 && f <= 1.0) => {
                    return Err(format!("fraction must lie in (0, 1], got {f}"))
                }
                (None, Some(0)) => return Err("samples must be at least 1".into()),
                (None, None) => return Err("a sample size (fraction or samples) is required".into()),
                _ => {}
            }
            if c.c.is_some() && c.alpha.is_some() {
                return Err("give c or alpha, not both".into());
            }
            if let Some(v) = c.c {
                if !(v > 0.0 && v < 1.0) {
                    return Err(format!("c must lie in (0, 1), got {v}"));
                }
            }
            if c.alpha.is_some_and(|a| !(a >= 0.0) || !a.is_finite()) {
                return Err("alpha must be finite and nonnegative".into());
            }
            if c.alpha.is_some() && matches!(c.momentum, Some(MomentumConfig::Theory { .. })) {
                return Err("theory momentum needs c rather than a fixed alpha".into());
            }
            Ok(())
        }
        AlgorithmConfig::Agd(c) => {
            for v in [c.l, c.mu].into_iter().flatten() {
                if !(v > 0.0) || !v.is_finite() {
                    return Err("agd l and mu must be finite and positive".into());
                }
            }
            Ok(())
        }
        AlgorithmConfig::Svrg(c) => {
            if c.step.is_some_and(|s| !(s > 0.0) || !s.is_finite()) {
                return Err("svrg step must be finite and positive".into());
            }
            if c.epoch_len == Some(0) {
                return Err("svrg epoch_len must be at least 1".into());
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
output = "out.csv"
seeds = [1, 2]

[problem]
kind = "synth_quadratic"
d = 20
kappa = 10.0

[options]
max_iters = 5

[[algorithm]]
kind = "arssn"
fraction = 0.5
momentum = { kind = "anneal", k = 8.0 }

[[algorithm]]
kind = "agd"
"#;

    #[test]
    fn parses_example() {
        let cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.seeds, vec![1, 2]);
        assert_eq!(cfg.options.max_iters, 5);
        assert_eq!(cfg.options.grad_tol, None);
        assert_eq!(cfg.algorithms.len(), 2);
        assert_eq!(cfg.algorithms[1].kind(), "agd");
        cfg.validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = EXAMPLE.replace("max_iters = 5", "max_iter = 5");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = EXAMPLE.replace("fraction = 0.5", "fraction = 0.5\nfractoin = 0.1");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn validation_failures() {
        let cases = [
            EXAMPLE.replace("fraction = 0.5", "fraction = 1.5"),
            EXAMPLE.replace("fraction = 0.5", "samples = 3\nfraction = 0.5"),
            EXAMPLE.replace("kappa = 10.0", "kappa = 0.5"),
            EXAMPLE.replace("seeds = [1, 2]", "seeds = []"),
            EXAMPLE.replace("kind = \"arssn\"", "kind = \"rssn\""),
            EXAMPLE.replace("fraction = 0.5", "fraction = 0.5\nc = 1.0"),
        ];
        for text in cases {
            let cfg = ExperimentConfig::from_toml(&text).unwrap();
            assert!(cfg.validate().is_err(), "{text}");
        }
    }

    #[test]
    fn missing_data_file() {
        let text = r#"
output = "o.csv"
[problem]
kind = "ridge"
data = "/nonexistent/file.libsvm"
[[algorithm]]
kind = "agd"
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
