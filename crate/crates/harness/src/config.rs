use std::f64::consts::FRAC_PI_8;

use geodp::{ChainConfig, Mechanism};

use crate::error::{HarnessError, Result};
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    Sphere,
    Spd,
}

impl ManifoldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ManifoldKind::Sphere => "sphere",
            ManifoldKind::Spd => "spd",
        }
    }

    pub fn supports(self, m: Mechanism) -> bool {
        match self {
            ManifoldKind::Sphere => matches!(
                m,
                Mechanism::Kng
                    | Mechanism::ManifoldLaplace
                    | Mechanism::EuclideanLaplace
                    | Mechanism::ProjectedEuclideanLaplace
            ),
            ManifoldKind::Spd => matches!(m, Mechanism::Kng | Mechanism::ManifoldLaplace | Mechanism::EuclideanLaplace),
        }
    }
}

/// Chain length and step overrides; `None` keeps the manifold default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChainOverrides {
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub step: Option<f64>,
    /// Accept on the bare target ratio, skipping the kernel's reverse-move term.
    pub plain_ratio: bool,
}

impl ChainOverrides {
    pub fn apply(&self, base: ChainConfig) -> Result<ChainConfig> {
        Ok(ChainConfig::new(
            self.burn_in.unwrap_or(base.burn_in),
            self.thin.unwrap_or(base.thin),
            self.step.unwrap_or(base.t()),
            base.seed,
        )?
        .with_plain_ratio(self.plain_ratio || base.plain_ratio))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub manifold: ManifoldKind,
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub epsilon: f64,
    pub radius: f64,
    pub mechanisms: Vec<Mechanism>,
    pub seed: u64,
    pub chain: ChainOverrides,
    /// Matrix size for SPD runs.
    pub spd_k: usize,
    pub execution: Execution,
    pub record_timing: bool,
}

impl BenchmarkConfig {
    pub fn sphere_default() -> Self {
        BenchmarkConfig {
            manifold: ManifoldKind::Sphere,
            sizes: vec![25, 50, 100, 200, 400],
            replicates: 2000,
            epsilon: 1.0,
            radius: FRAC_PI_8,
            mechanisms: vec![
                Mechanism::Kng,
                Mechanism::ManifoldLaplace,
                Mechanism::EuclideanLaplace,
                Mechanism::ProjectedEuclideanLaplace,
            ],
            seed: 1,
            chain: ChainOverrides::default(),
            spd_k: 2,
            execution: Execution::Parallel,
            record_timing: false,
        }
    }

    pub fn spd_default() -> Self {
        BenchmarkConfig {
            manifold: ManifoldKind::Spd,
            sizes: vec![50, 100, 225],
            replicates: 200,
            radius: 1.5,
            mechanisms: vec![Mechanism::Kng, Mechanism::ManifoldLaplace, Mechanism::EuclideanLaplace],
            ..Self::sphere_default()
        }
    }

    pub fn default_for(kind: ManifoldKind) -> Self {
        match kind {
            ManifoldKind::Sphere => Self::sphere_default(),
            ManifoldKind::Spd => Self::spd_default(),
        }
    }

    pub fn base_chain(&self) -> ChainConfig {
        match self.manifold {
            ManifoldKind::Sphere => ChainConfig::sphere_default(self.seed),
            ManifoldKind::Spd => ChainConfig::spd_default(self.seed),
        }
    }

    pub fn chain_config(&self) -> Result<ChainConfig> {
        self.chain.apply(self.base_chain())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.sizes.is_empty() {
            return bad("no sample sizes given".into());
        }
        if self.sizes.contains(&0) {
            return bad("sample sizes must be positive".into());
        }
        if self.mechanisms.is_empty() {
            return bad("no mechanisms given".into());
        }
        if let Some(m) = self.mechanisms.iter().find(|m| !self.manifold.supports(**m)) {
            return bad(format!("mechanism '{m}' is not available on {}", self.manifold.as_str()));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.manifold == ManifoldKind::Sphere && !(self.radius > 0.0 && self.radius <= FRAC_PI_8 * 2.0) {
            return bad(format!("sphere radius {} outside (0, pi/4]", self.radius));
        }
        if self.spd_k == 0 {
            return bad("SPD matrix size must be positive".into());
        }
        self.chain_config()?;
        Ok(())
    }
}
