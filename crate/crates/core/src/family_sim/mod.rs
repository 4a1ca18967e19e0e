//! Synthetic automorphic families: spectral parameters laid out along the
//! Weyl law and Satake parameters drawn from the Plancherel measures, plus
//! ingestion of eigenvalue tables into the same statistics.

mod generate;
mod ingest;
mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::satake::{SatakeParameter, DEFAULT_TEMPERED_TOL};

pub use generate::{generate_family, FamilyConfig, HARD_FORM_LIMIT};
pub use ingest::{fit_leading_constant, ingest_dataset, write_family_csv, FitReport, IngestOptions, Quarantined};
pub use stats::{
    empirical_pairing, multi_prime_pairing, sato_tate_run, PairingStat, SatoTateConfig, SatoTateRow, SatoTateTable,
};

/// `K`-type label of a form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KType {
    Trivial,
    Det,
    Dim2,
    Custom(u32),
}

impl KType {
    pub fn dim(&self) -> u32 {
        match self {
            KType::Trivial | KType::Det => 1,
            KType::Dim2 => 2,
            KType::Custom(d) => *d,
        }
    }
}

impl fmt::Display for KType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KType::Trivial => f.write_str("trivial"),
            KType::Det => f.write_str("det"),
            KType::Dim2 => f.write_str("dim2"),
            KType::Custom(d) => write!(f, "custom({d})"),
        }
    }
}

impl FromStr for KType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "trivial" => Ok(KType::Trivial),
            "det" => Ok(KType::Det),
            "dim2" => Ok(KType::Dim2),
            _ => s
                .strip_prefix("custom(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|d| d.parse::<u32>().ok())
                .filter(|d| *d >= 1)
                .map(KType::Custom)
                .ok_or_else(|| Error::invalid(format!("unknown K-type {s:?}"))),
        }
    }
}

impl Serialize for KType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One counted member of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticForm {
    pub mu: f64,
    /// `None` when the family is not filtered by `K`-type.
    pub ktype: Option<KType>,
    pub params: BTreeMap<u64, SatakeParameter>,
}

impl SyntheticForm {
    pub fn is_tempered(&self) -> bool {
        self.params.values().all(|u| u.is_tempered(DEFAULT_TEMPERED_TOL))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Synthetic { seed: u64 },
    Ingested { path: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub n: usize,
    pub mu: f64,
    pub sigma: Option<KType>,
    pub primes: Vec<u64>,
    /// Number of members the Weyl law assigns to the family.
    pub represented: u64,
    /// Simulated members; all of them unless the family was thinned.
    pub forms: Vec<SyntheticForm>,
    pub provenance: Provenance,
}

impl Family {
    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn is_thinned(&self) -> bool {
        (self.forms.len() as u64) < self.represented
    }

    pub fn non_tempered(&self) -> usize {
        self.forms.iter().filter(|f| !f.is_tempered()).count()
    }

    /// `#{j : mu_j <= t}` over the simulated members.
    pub fn counting_function(&self, t: f64) -> u64 {
        self.forms.partition_point(|f| f.mu <= t) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ktype_labels_round_trip() {
        for k in [KType::Trivial, KType::Det, KType::Dim2, KType::Custom(5)] {
            assert_eq!(k.to_string().parse::<KType>().unwrap(), k);
            let j = serde_json::to_string(&k).unwrap();
            assert_eq!(serde_json::from_str::<KType>(&j).unwrap(), k);
        }
        assert_eq!(KType::Custom(4).dim(), 4);
        assert!("custom(0)".parse::<KType>().is_err());
        assert!("sym2".parse::<KType>().is_err());
    }
}
