use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Family, KType, Provenance, SyntheticForm};
use crate::error::{Error, Result};
use crate::measures::{mix_seed, sample_streams, MeasureSpec, Sampler};
use crate::padic_hecke::smith::is_prime;
use crate::weyl_law::{count_prediction, CountKind, GroupDims, MainTermParams};

/// Largest family simulated without an explicit `max_forms` cap.
pub const HARD_FORM_LIMIT: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub n: usize,
    pub mu: f64,
    pub sigma: Option<KType>,
    pub primes: Vec<u64>,
    /// Primes excluded from the construction.
    #[serde(default)]
    pub bad_primes: Vec<u64>,
    pub dims: GroupDims,
    pub params: MainTermParams,
    pub seed: u64,
    /// Simulate an evenly spread subset of this size for larger families.
    #[serde(default)]
    pub max_forms: Option<usize>,
}

impl FamilyConfig {
    pub fn kind(&self) -> CountKind {
        if self.sigma.is_some() {
            CountKind::Equivariant
        } else {
            CountKind::Nonequivariant
        }
    }

    fn count_params(&self) -> MainTermParams {
        match self.sigma {
            Some(k) => MainTermParams { d_sigma: k.dim(), ..self.params },
            None => self.params,
        }
    }

    /// Weyl-law prediction `C t^e`, returned as `(C, e)`.
    pub fn weyl_constant(&self) -> Result<(f64, u32)> {
        let kind = self.kind();
        let c = count_prediction(kind, &self.dims, &self.count_params(), 1.0)?;
        Ok((c, self.dims.leading_exponent(kind)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.dims.n as usize != self.n {
            return Err(Error::invalid("family rank must match the group dimensions"));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid("cutoff must be finite and nonnegative"));
        }
        for (i, p) in self.primes.iter().enumerate() {
            if !is_prime(*p) {
                return Err(Error::invalid(format!("{p} is not prime")));
            }
            if self.primes[..i].contains(p) {
                return Err(Error::invalid(format!("prime {p} listed twice")));
            }
            if self.bad_primes.contains(p) {
                return Err(Error::invalid(format!("prime {p} lies in the excluded set")));
            }
        }
        if self.max_forms == Some(0) {
            return Err(Error::invalid("max_forms must be positive"));
        }
        self.params.validate()
    }
}

/// Members `j = 1..N` with `N = round(C mu^e)` sit at `t_j = ((j - 1/2) / C)^{1/e}`,
/// so `#{t_j <= t}` is within `1/2` of `C t^e`. Parameters at `p` come from
/// stream `j` of a generator keyed by `(seed, p)`.
pub fn generate_family(cfg: &FamilyConfig) -> Result<Family> {
    cfg.validate()?;
    let (c, e) = cfg.weyl_constant()?;
    let pred = if cfg.mu > 0.0 { c * cfg.mu.powi(e as i32) } else { 0.0 };
    if pred > 1e18 && cfg.max_forms.is_none() {
        return Err(Error::BudgetExceeded { what: "family size".into(), budget: HARD_FORM_LIMIT });
    }
    let represented = pred.round() as u64;
    let simulated = match cfg.max_forms {
        Some(m) => represented.min(m as u64),
        None if represented > HARD_FORM_LIMIT => {
            return Err(Error::BudgetExceeded { what: format!("family of {represented} forms"), budget: HARD_FORM_LIMIT })
        }
        None => represented,
    };
    let indices: Vec<u64> = if simulated == represented {
        (1..=represented).collect()
    } else {
        (0..simulated).map(|k| 1 + ((k as u128 * represented as u128) / simulated as u128) as u64).collect()
    };
    let inv = 1.0 / f64::from(e);
    let mus: Vec<f64> = indices.iter().map(|&j| ((j as f64 - 0.5) / c).powf(inv).min(cfg.mu)).collect();
    let mut per_prime = Vec::with_capacity(cfg.primes.len());
    for &p in &cfg.primes {
        let spec = MeasureSpec::plancherel(cfg.n, p)?;
        let mut sampler = Sampler::new(&spec);
        let set = sample_streams(&mut sampler, mix_seed(cfg.seed, p), &indices)?;
        per_prime.push(set.points);
    }
    let forms: Vec<SyntheticForm> = (0..indices.len())
        .into_par_iter()
        .map(|k| SyntheticForm {
            mu: mus[k],
            ktype: cfg.sigma,
            params: cfg
                .primes
                .iter()
                .zip(&per_prime)
                .map(|(&p, pts)| (p, pts[k].to_parameter()))
                .collect::<BTreeMap<_, _>>(),
        })
        .collect();
    Ok(Family {
        n: cfg.n,
        mu: cfg.mu,
        sigma: cfg.sigma,
        primes: cfg.primes.clone(),
        represented,
        forms,
        provenance: Provenance::Synthetic { seed: cfg.seed },
    })
}
