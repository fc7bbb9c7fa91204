//! Flat TOML experiment configuration for the survey subcommand.
//!
//! Every key lives at the top level so a config file doubles as a plain
//! key-value record of the run. `symbreak print-config` dumps the defaults.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use symbreak::kernel::KernelKind;
use symbreak::loss::{laplacian_circulant, LossProblem};
use symbreak::optimize::{GDConfig, StepPolicy, DEFAULT_EPS_G, DEFAULT_EPS_H, DEFAULT_MAX_ITERS};
use symbreak::symmetry::DEFAULT_ISO_TOL;
use symbreak::tensor::WeightMatrix;

/// One survey experiment. Field order is the serialization order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Kernel id: "poly:<odd r>", "cubic-gaussian", or "relu".
    pub kernel: String,
    /// Target: "identity", "laplacian-circulant", or "matrix:<csv path>".
    pub target: String,
    /// Ambient dimension for generated targets; ignored for matrix files.
    pub d: usize,
    /// Number of model rows.
    pub k: usize,
    pub n_starts: u64,
    /// Base RNG seed; start i draws from seed + i.
    pub seed: u64,
    /// Step rule: "backtracking" (Armijo, uses eta0/beta/c1) or "fixed".
    pub step: String,
    pub eta0: f64,
    pub beta: f64,
    pub c1: f64,
    /// Step size when `step = "fixed"`.
    pub fixed_eta: f64,
    pub max_iters: u64,
    /// Gradient-norm stopping tolerance.
    pub eps_g: f64,
    /// Hessian PSD tolerance for classification.
    pub eps_h: f64,
    /// Entry-clustering tolerance for isotropy detection.
    pub iso_tol: f64,
    /// One-half scale convention on the loss.
    pub half: bool,
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kernel: "poly:3".into(),
            target: "identity".into(),
            d: 12,
            k: 12,
            n_starts: 100,
            seed: 2024,
            step: "backtracking".into(),
            eta0: 0.5,
            beta: 0.5,
            c1: 1e-4,
            fixed_eta: 0.05,
            max_iters: DEFAULT_MAX_ITERS,
            eps_g: DEFAULT_EPS_G,
            eps_h: DEFAULT_EPS_H,
            iso_tol: DEFAULT_ISO_TOL,
            half: true,
            out_dir: "runs/survey".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        KernelKind::parse(&self.kernel).with_context(|| format!("kernel {:?}", self.kernel))?;
        if self.k == 0 {
            bail!("k must be >= 1");
        }
        match self.target.as_str() {
            "identity" => {
                if self.d == 0 {
                    bail!("identity target needs d >= 1");
                }
            }
            "laplacian-circulant" => {
                if self.d < 3 {
                    bail!("laplacian-circulant target needs d >= 3");
                }
            }
            other => {
                let path = other
                    .strip_prefix("matrix:")
                    .with_context(|| format!("unknown target {other:?}"))?;
                if !Path::new(path).is_file() {
                    bail!("target matrix file not found: {path}");
                }
            }
        }
        if !(self.eta0 > 0.0) || !(self.beta > 0.0 && self.beta < 1.0) || !(self.c1 > 0.0) {
            bail!("backtracking parameters need eta0 > 0, 0 < beta < 1, c1 > 0");
        }
        if !(self.fixed_eta > 0.0) {
            bail!("fixed_eta must be > 0");
        }
        match self.step.as_str() {
            "backtracking" | "fixed" => {}
            other => bail!("unknown step rule {other:?} (want \"backtracking\" or \"fixed\")"),
        }
        if self.max_iters == 0 {
            bail!("max_iters must be >= 1");
        }
        for (name, v) in [
            ("eps_g", self.eps_g),
            ("eps_h", self.eps_h),
            ("iso_tol", self.iso_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                bail!("{name} must be a positive finite number");
            }
        }
        Ok(())
    }

    pub fn target_matrix(&self) -> Result<WeightMatrix> {
        match self.target.as_str() {
            "identity" => Ok(WeightMatrix::identity(self.d)),
            "laplacian-circulant" => Ok(laplacian_circulant(self.d)),
            other => {
                let path = other
                    .strip_prefix("matrix:")
                    .with_context(|| format!("unknown target {other:?}"))?;
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading target matrix {path}"))?;
                Ok(WeightMatrix::from_csv(&text)?)
            }
        }
    }

    pub fn build_problem(&self) -> Result<LossProblem> {
        let kind = KernelKind::parse(&self.kernel)?;
        let target = self.target_matrix()?;
        Ok(LossProblem::with_options(kind, target, self.half, false)?)
    }

    pub fn gd_config(&self) -> GDConfig {
        let step = match self.step.as_str() {
            "fixed" => StepPolicy::Fixed(self.fixed_eta),
            _ => StepPolicy::Backtracking {
                eta0: self.eta0,
                beta: self.beta,
                c1: self.c1,
            },
        };
        GDConfig {
            step,
            max_iters: self.max_iters,
            eps_g: self.eps_g,
            seed: self.seed,
        }
    }
}
