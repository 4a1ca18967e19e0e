use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::torus::TorusPoint;
use crate::error::{Error, Result};
use crate::satake::{SatakeParameter, SymLaurent, DEFAULT_TEMPERED_TOL};

/// Uniform probability measure on a multiset of Satake parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    n: usize,
    atoms: Vec<SatakeParameter>,
    tempered: Vec<bool>,
}

impl EmpiricalMeasure {
    pub fn new(n: usize, atoms: Vec<SatakeParameter>) -> Result<Self> {
        if atoms.iter().any(|a| a.rank() != n) {
            return Err(Error::invalid("atom has wrong rank"));
        }
        let tempered = atoms.iter().map(|a| a.is_tempered(DEFAULT_TEMPERED_TOL)).collect();
        Ok(EmpiricalMeasure { n, atoms, tempered })
    }

    pub fn from_points(n: usize, points: &[TorusPoint]) -> Result<Self> {
        Self::new(n, points.iter().map(TorusPoint::to_parameter).collect())
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[SatakeParameter] {
        &self.atoms
    }

    /// Weight of each atom.
    pub fn weight(&self) -> f64 {
        1.0 / self.atoms.len() as f64
    }

    /// Atoms off the unit torus.
    pub fn non_tempered(&self) -> usize {
        self.tempered.iter().filter(|t| !**t).count()
    }

    pub fn is_tempered(&self, i: usize) -> bool {
        self.tempered[i]
    }

    /// Mean of `f` over the atoms and the standard error of that mean.
    pub fn pair(&self, f: &SymLaurent) -> Result<(Complex64, f64)> {
        if f.rank() != self.n {
            return Err(Error::invalid("test function has wrong rank"));
        }
        if self.atoms.is_empty() {
            return Err(Error::invalid("empirical measure has no atoms"));
        }
        let ev = f.torus_evaluator();
        let vals: Vec<Complex64> = self.atoms.par_iter().map(|a| ev.eval_values(a.values())).collect();
        Ok(mean_and_stderr(&vals))
    }
}

/// Sample mean and its standard error, summed in index order.
pub fn mean_and_stderr(vals: &[Complex64]) -> (Complex64, f64) {
    let m = vals.len() as f64;
    let mut mean = Complex64::new(0.0, 0.0);
    for v in vals {
        mean += v;
    }
    mean /= m;
    if vals.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let mut var = 0.0;
    for v in vals {
        var += (v - mean).norm_sqr();
    }
    (mean, (var / (m - 1.0) / m).sqrt())
}
