//! Versioned experiment configuration. The reference instance lives in
//! `config/default.toml` and is embedded as the default.

use crate::cgo::BetaChoice;
use crate::error::{LabError, Result};
use crate::grid::{Field, Grid};
use crate::presets::PotentialSpec;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TOML: &str = include_str!("../config/default.toml");

/// A potential given analytically or as a Field binary file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSource {
    File { file: PathBuf, p: f64 },
    Analytic(PotentialSpec),
}

impl PotentialSource {
    pub fn p(&self) -> f64 {
        match self {
            PotentialSource::File { p, .. } => *p,
            PotentialSource::Analytic(s) => s.p,
        }
    }

    pub fn load(&self, grid: Grid) -> Result<Field> {
        match self {
            PotentialSource::Analytic(s) => {
                s.validate(&grid)?;
                Ok(s.sample(grid))
            }
            PotentialSource::File { file, p } => {
                if !(*p > 1.0 && *p < 2.0) {
                    return Err(LabError::Config(format!("potential exponent p={p} outside (1,2)")));
                }
                let f = Field::read_binary(&mut std::io::BufReader::new(std::fs::File::open(file)?))?;
                if f.grid != grid {
                    return Err(LabError::Mismatch(format!("{} was sampled on a different grid", file.display())));
                }
                Ok(f)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub half_width: f64,
    pub omega_radius: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.n, self.half_width, self.omega_radius)
    }

    pub fn with_n(&self, n: usize) -> Result<Grid> {
        Grid::new(n, self.half_width, self.omega_radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppendixConfig {
    pub a_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub taus: Vec<f64>,
    pub rel_tol: f64,
    pub scaling_taus: Vec<f64>,
    pub bump_ps: Vec<f64>,
    pub h_ps: Vec<f64>,
    pub h_grad_ps: Vec<f64>,
    pub direction: [f64; 2],
    pub exponent_tol: f64,
    pub budget_lattice_seconds: f64,
    pub budget_scaling_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyConfig {
    pub disc_radius: f64,
    pub edge_gap: f64,
    pub fields: usize,
    pub left_inverse_tol: f64,
    pub budget_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub taus: Vec<f64>,
    pub z0: [f64; 2],
    pub p_star_inf: f64,
    pub pairs: Vec<[f64; 2]>,
    pub slack: f64,
    pub ibp_tau: f64,
    pub ibp_z0: [f64; 2],
    pub ibp_sizes: [usize; 2],
    pub ibp_tol: f64,
    pub s_z0: [f64; 2],
    pub s_modes: usize,
    pub s_potential: String,
    pub budget_ibp_seconds: f64,
    pub budget_t_seconds: f64,
    pub budget_s_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPotential {
    pub name: String,
    #[serde(flatten)]
    pub source: PotentialSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CgoConfig {
    pub tau: f64,
    pub z0: [f64; 2],
    pub sizes: [usize; 2],
    pub tol: f64,
    pub m_max: usize,
    pub residual_tol: f64,
    pub alpha_taus: Vec<f64>,
    pub alpha_tol: f64,
    pub alpha_m_max: usize,
    pub envelope_slack: f64,
    pub alpha_potential: String,
    pub beta_width_cells: f64,
    pub budget_seconds: f64,
    pub potentials: Vec<NamedPotential>,
}

impl CgoConfig {
    pub fn potential(&self, name: &str) -> Result<&PotentialSource> {
        self.potentials
            .iter()
            .find(|p| p.name == name)
            .map(|p| &p.source)
            .ok_or_else(|| LabError::Config(format!("no potential named {name:?} in cgo.potentials")))
    }

    pub fn beta(&self, grid: &Grid) -> BetaChoice {
        BetaChoice::SmoothedCauchy { width: self.beta_width_cells * grid.h }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryConfig {
    pub taus: Vec<f64>,
    pub unitarity_samples: usize,
    pub unitarity_n: usize,
    pub unitarity_tol: f64,
    pub wide_n: usize,
    pub wide_half_width: f64,
    pub wide_omega_radius: f64,
    pub narrow_variance: f64,
    pub rate_slack: f64,
    pub budget_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DnConfig {
    pub sizes: [usize; 2],
    pub modes: usize,
    pub symmetry_tol: f64,
    pub budget_seconds: f64,
    pub q1: PotentialSource,
    pub q2: PotentialSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    pub taus: Vec<f64>,
    pub stride: usize,
    pub k_max: usize,
    pub beta_width: f64,
    pub beta_refine: f64,
    pub single_taus: Vec<f64>,
    pub order_slack: f64,
    pub envelope_slack: f64,
    pub budget_seconds: f64,
    pub q1: PotentialSource,
    pub q2: PotentialSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub grid: GridConfig,
    pub appendix: AppendixConfig,
    pub cauchy: CauchyConfig,
    pub decay: DecayConfig,
    pub cgo: CgoConfig,
    pub stationary: StationaryConfig,
    pub dn: DnConfig,
    pub reconstruct: ReconstructConfig,
}

fn ladder(name: &str, taus: &[f64], min_len: usize) -> Result<()> {
    if taus.len() < min_len {
        return Err(LabError::Config(format!("{name}: need at least {min_len} values, got {}", taus.len())));
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) || taus.iter().any(|t| !t.is_finite()) {
        return Err(LabError::Config(format!("{name}: must be finite and strictly increasing")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn default_config() -> ExperimentConfig {
        ExperimentConfig::parse(DEFAULT_TOML).expect("embedded default config is valid")
    }

    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LabError::Config(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let g = self.grid.build()?;
        let a = &self.appendix;
        ladder("appendix.taus", &a.taus, 1)?;
        ladder("appendix.scaling_taus", &a.scaling_taus, 2)?;
        for &x in &a.a_values {
            for &p in &a.p_values {
                if !(x * p > 2.0) {
                    return Err(LabError::Config(format!("appendix lattice: a={x}, p={p} needs p > 2/a")));
                }
            }
        }
        ladder("decay.taus", &self.decay.taus, 2)?;
        ladder("cgo.alpha_taus", &self.cgo.alpha_taus, 2)?;
        ladder("stationary.taus", &self.stationary.taus, 2)?;
        ladder("reconstruct.taus", &self.reconstruct.taus, 2)?;
        ladder("reconstruct.single_taus", &self.reconstruct.single_taus, 2)?;
        if self.cgo.potentials.is_empty() {
            return Err(LabError::Config("cgo.potentials is empty".into()));
        }
        self.cgo.potential(&self.cgo.alpha_potential)?;
        self.cgo.potential(&self.decay.s_potential)?;
        let r = &self.reconstruct;
        if r.stride < 4 {
            return Err(LabError::Config(format!("reconstruct.stride must be >= 4, got {}", r.stride)));
        }
        if !(r.beta_refine > 0.0 && r.beta_refine < 1.0) {
            return Err(LabError::Config("reconstruct.beta_refine must lie in (0,1)".into()));
        }
        for src in [&r.q1, &r.q2] {
            if !(src.p() > 4.0 / 3.0 && src.p() < 2.0) {
                return Err(LabError::Config(format!("reconstruction needs 4/3 < p < 2, got {}", src.p())));
            }
        }
        if let Some(&t) = r.taus.last() {
            if 8.0 * t * g.half_width * g.h > std::f64::consts::PI {
                return Err(LabError::Config(format!("reconstruct tau {t} exceeds the Nyquist limit {:.1}", g.tau_max())));
            }
        }
        Ok(())
    }
}
