//! Experiment configuration: TOML files, JSON artifacts carrying an embedded
//! config, and validation.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic_hecke::smith::is_prime;
use crate::verify::VerifyConfig;

/// Environment variable that overrides the seed.
pub const SEED_ENV: &str = "HECKE_SPECTRA_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolInputs {
    pub vol_m: f64,
    pub vol_mk: f64,
    pub d_sigma: u32,
    pub n_z: u32,
    /// Dimension `N` of the ambient `SL(N)`; `n^2 - 1` when absent.
    pub ambient: Option<u32>,
}

impl Default for VolInputs {
    fn default() -> Self {
        VolInputs { vol_m: 1.0, vol_mk: 1.0, d_sigma: 1, n_z: 1, ambient: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub grid: usize,
    pub tolerance: f64,
    pub mc_samples: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = crate::measures::Quadrature::default();
        QuadratureConfig { grid: q.grid, tolerance: q.tolerance, mc_samples: q.mc_samples }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    pub strict_tempered: bool,
    pub raw_density: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CosetsSection {
    pub omega: Option<Vec<i64>>,
    /// Include the representatives, not only the count.
    pub list: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SatakeSection {
    /// Hecke eigenvalues `lambda_1 .. lambda_{n-1}` as `[re, im]`.
    pub lambdas: Option<Vec<Complex64>>,
    /// Transform `tau_omega` instead.
    pub omega: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSection {
    /// `plancherel` or `sato_tate`.
    pub kind: String,
    pub samples: usize,
    pub convergence_primes: Vec<u64>,
    /// Points per axis of the density plot data.
    pub plot_points: usize,
}

impl Default for MeasureSection {
    fn default() -> Self {
        MeasureSection { kind: "plancherel".into(), samples: 0, convergence_primes: vec![], plot_points: 64 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySection {
    pub sigma: Option<String>,
    pub max_forms: Option<usize>,
    /// Eigenvalue table to ingest instead of simulating.
    pub ingest: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowlyingSection {
    pub beta: f64,
    /// Single-column CSV of ordinates with a JSON sidecar.
    pub zeros: Option<String>,
    pub sigma: Option<String>,
}

impl Default for LowlyingSection {
    fn default() -> Self {
        LowlyingSection { beta: 0.5, zeros: None, sigma: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeylSection {
    pub mu_grid: Vec<f64>,
    pub epsilon: f64,
}

impl Default for WeylSection {
    fn default() -> Self {
        WeylSection { mu_grid: vec![10.0, 20.0, 40.0, 80.0], epsilon: 0.0 }
    }
}

/// Resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub primes: Vec<u64>,
    /// Excluded primes `S_0`.
    pub bad_primes: Vec<u64>,
    pub kappa: u32,
    pub mu: f64,
    pub seed: u64,
    pub vol_inputs: VolInputs,
    pub quadrature: QuadratureConfig,
    pub flags: Flags,
    pub cosets: CosetsSection,
    pub satake: SatakeSection,
    pub measure: MeasureSection,
    pub family: FamilySection,
    pub lowlying: LowlyingSection,
    pub weyl: WeylSection,
    pub verify: VerifyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 2,
            primes: vec![3],
            bad_primes: vec![],
            kappa: 1,
            mu: 50.0,
            seed: 1,
            vol_inputs: VolInputs::default(),
            quadrature: QuadratureConfig::default(),
            flags: Flags::default(),
            cosets: CosetsSection::default(),
            satake: SatakeSection::default(),
            measure: MeasureSection::default(),
            family: FamilySection::default(),
            lowlying: LowlyingSection::default(),
            weyl: WeylSection::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads a TOML config, or a JSON artifact and takes its `config` field.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        if is_json {
            let mut v: serde_json::Value = serde_json::from_str(&text)?;
            let inner = v
                .get_mut("config")
                .map(serde_json::Value::take)
                .ok_or_else(|| Error::invalid(format!("{} has no embedded config", path.display())))?;
            Ok(serde_json::from_value(inner)?)
        } else {
            toml::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("n must be at least 2"));
        }
        for (i, &p) in self.primes.iter().enumerate() {
            if !is_prime(p) {
                return Err(Error::invalid(format!("{p} is not prime")));
            }
            if self.primes[..i].contains(&p) {
                return Err(Error::invalid(format!("prime {p} listed twice")));
            }
            if self.bad_primes.contains(&p) {
                return Err(Error::invalid(format!("prime {p} lies in the excluded set S_0")));
            }
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid("mu must be finite and nonnegative"));
        }
        let q = &self.quadrature;
        if !(q.tolerance > 0.0) || q.grid < 4 || !q.grid.is_multiple_of(2) || q.mc_samples < 2 {
            return Err(Error::invalid("quadrature needs an even grid >= 4, tolerance > 0, mc_samples >= 2"));
        }
        let v = &self.vol_inputs;
        if !(v.vol_m > 0.0 && v.vol_mk > 0.0) || v.d_sigma < 1 {
            return Err(Error::invalid("volumes must be positive and d_sigma >= 1"));
        }
        if !(self.lowlying.beta > 0.0) {
            return Err(Error::invalid("beta must be positive"));
        }
        if !(self.weyl.epsilon >= 0.0) || self.weyl.mu_grid.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::invalid("weyl grid must be positive and epsilon nonnegative"));
        }
        if !matches!(self.measure.kind.as_str(), "plancherel" | "sato_tate") {
            return Err(Error::invalid(format!("unknown measure kind {:?}", self.measure.kind)));
        }
        let v = &self.verify;
        if v.grid < 4 || !v.grid.is_multiple_of(2) || v.count_checkpoints == 0 || v.sato_tate_primes.is_empty() {
            return Err(Error::invalid("invalid verify settings"));
        }
        Ok(())
    }

    pub fn quadrature(&self) -> crate::measures::Quadrature {
        crate::measures::Quadrature {
            grid: self.quadrature.grid,
            tolerance: self.quadrature.tolerance,
            mc_samples: self.quadrature.mc_samples,
            mc_seed: crate::measures::mix_seed(self.seed, 0x7175_6164),
        }
    }
}
