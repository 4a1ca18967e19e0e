use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate_family, FamilyConfig};
use super::Family;
use crate::error::{Error, Result};
use crate::measures::{mean_and_stderr, pair_with, normalize_with, MeasureSpec, Quadrature, TestFunction};
use crate::satake::SymLaurent;
use crate::weyl_law::{GroupDims, MainTermParams};

/// Mean of a statistic over a family with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingStat {
    pub mean: Complex64,
    pub stderr: f64,
    pub count: usize,
}

fn check_rank(fam: &Family, f: &SymLaurent) -> Result<()> {
    if f.rank() != fam.n {
        return Err(Error::invalid("test function rank differs from the family rank"));
    }
    Ok(())
}

/// Average of `f` at the parameters at `p`.
pub fn empirical_pairing(fam: &Family, p: u64, f: &SymLaurent) -> Result<PairingStat> {
    multi_prime_pairing(fam, &[(p, f.clone())])
}

/// Average of `prod_{p in S} f_p(u_p)`; the empty product is one.
pub fn multi_prime_pairing(fam: &Family, factors: &[(u64, SymLaurent)]) -> Result<PairingStat> {
    for (p, f) in factors {
        check_rank(fam, f)?;
        if fam.forms.iter().any(|form| !form.params.contains_key(p)) {
            return Err(Error::MissingPrime(*p));
        }
    }
    if fam.forms.is_empty() {
        return Err(Error::invalid("family is empty"));
    }
    let evs: Vec<_> = factors.iter().map(|(p, f)| (*p, f.torus_evaluator())).collect();
    let vals: Vec<Complex64> = fam
        .forms
        .par_iter()
        .map(|form| {
            evs.iter()
                .map(|(p, ev)| ev.eval_values(form.params[p].values()))
                .fold(Complex64::new(1.0, 0.0), |a, b| a * b)
        })
        .collect();
    let (mean, stderr) = mean_and_stderr(&vals);
    Ok(PairingStat { mean, stderr: if vals.len() < 2 { 0.0 } else { stderr }, count: vals.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatoTateConfig {
    pub n: usize,
    /// Pairs `(p_k, mu_k)` with `p_k` increasing.
    pub sequence: Vec<(u64, f64)>,
    pub dims: GroupDims,
    pub params: MainTermParams,
    pub seed: u64,
    pub max_forms: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatoTateRow {
    pub p: u64,
    pub mu: f64,
    pub represented: u64,
    pub simulated: usize,
    pub discrepancy: Vec<f64>,
    pub stderr: Vec<f64>,
    pub max_discrepancy: f64,
    /// `4 * max stderr + 10 / p`.
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatoTateTable {
    pub labels: Vec<String>,
    pub sato_tate: Vec<f64>,
    pub rows: Vec<SatoTateRow>,
    pub warnings: Vec<String>,
    pub final_within_tolerance: bool,
    /// Largest discrepancy strictly decreasing from the second row on.
    pub decreasing_after_first: bool,
}

fn sequence_warnings(seq: &[(u64, f64)]) -> Result<Vec<String>> {
    if seq.is_empty() {
        return Err(Error::invalid("empty prime sequence"));
    }
    if seq.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::invalid("primes in the sequence must increase strictly"));
    }
    if let Some((p, mu)) = seq.iter().find(|(_, mu)| !(*mu > 1.0)) {
        return Err(Error::invalid(format!("cutoff {mu} at p = {p} must exceed 1")));
    }
    let ratios: Vec<f64> = seq.iter().map(|(p, mu)| mu.ln() / (*p as f64).ln()).collect();
    let mut warnings = Vec::new();
    if ratios.len() >= 2 && !ratios.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-9)) {
        let max = ratios.iter().copied().fold(0.0, f64::max);
        warnings.push(format!(
            "log mu_k / log p_k does not grow on the tested range (max {max:.3}); \
             p_k^l / mu_k -> 0 fails for l > {max:.3}"
        ));
    }
    Ok(warnings)
}

/// Discrepancy between the family at `p_k` and the Sato-Tate measure, per
/// test function and step.
pub fn sato_tate_run(cfg: &SatoTateConfig, testset: &[TestFunction], q: &Quadrature) -> Result<SatoTateTable> {
    let warnings = sequence_warnings(&cfg.sequence)?;
    let st_spec = normalize_with(&MeasureSpec::sato_tate(cfg.n)?, q)?;
    let sato_tate: Vec<f64> =
        testset.iter().map(|t| pair_with(&st_spec, &t.f, q).map(|v| v.re)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(cfg.sequence.len());
    for &(p, mu) in &cfg.sequence {
        let fam = generate_family(&FamilyConfig {
            n: cfg.n,
            mu,
            sigma: None,
            primes: vec![p],
            bad_primes: vec![],
            dims: cfg.dims,
            params: cfg.params,
            seed: cfg.seed,
            max_forms: cfg.max_forms,
        })?;
        if fam.len() < 2 {
            return Err(Error::invalid(format!("family at p = {p} has fewer than two members")));
        }
        let mut discrepancy = Vec::with_capacity(testset.len());
        let mut stderr = Vec::with_capacity(testset.len());
        for (t, st) in testset.iter().zip(&sato_tate) {
            let s = empirical_pairing(&fam, p, &t.f)?;
            discrepancy.push((s.mean.re - st).abs());
            stderr.push(s.stderr);
        }
        let max_discrepancy = discrepancy.iter().copied().fold(0.0, f64::max);
        let max_err = stderr.iter().copied().fold(0.0, f64::max);
        rows.push(SatoTateRow {
            p,
            mu,
            represented: fam.represented,
            simulated: fam.len(),
            discrepancy,
            stderr,
            max_discrepancy,
            tolerance: 4.0 * max_err + 10.0 / p as f64,
        });
    }
    let last = rows.last().expect("sequence is nonempty");
    let final_within_tolerance = last.max_discrepancy <= last.tolerance;
    let decreasing_after_first =
        rows.iter().skip(1).collect::<Vec<_>>().windows(2).all(|w| w[1].max_discrepancy < w[0].max_discrepancy);
    Ok(SatoTateTable {
        labels: testset.iter().map(|t| t.label.clone()).collect(),
        sato_tate,
        rows,
        warnings,
        final_within_tolerance,
        decreasing_after_first,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::default_testset;
    use crate::padic_hecke::{Cocharacter, HeckeElement};
    use crate::satake::satake_transform;

    fn family(mu: f64, primes: Vec<u64>, seed: u64) -> Family {
        generate_family(&FamilyConfig {
            n: 2,
            mu,
            sigma: None,
            primes,
            bad_primes: vec![],
            dims: GroupDims::adjoint(2).unwrap(),
            params: MainTermParams::default(),
            seed,
            max_forms: None,
        })
        .unwrap()
    }

    fn tau(a: i64, p: u64) -> HeckeElement {
        HeckeElement::basis(&Cocharacter::new(vec![a, 0]).unwrap(), p)
    }

    #[test]
    fn plancherel_density_on_a_family() {
        let fam = family(60.0, vec![2, 3], 4);
        let one = empirical_pairing(&fam, 3, &SymLaurent::one(2, 3)).unwrap();
        assert_eq!((one.mean, one.stderr), (Complex64::new(1.0, 0.0), 0.0));
        let t1 = satake_transform(&tau(1, 3)).unwrap();
        let s = empirical_pairing(&fam, 3, &t1).unwrap();
        assert!(s.mean.norm() < 4.0 * s.stderr, "{s:?}");
        let shifted = satake_transform(&tau(0, 3).add(&tau(1, 3)).unwrap()).unwrap();
        let s1 = empirical_pairing(&fam, 3, &shifted).unwrap();
        assert!((s1.mean - 1.0).norm() < 4.0 * s1.stderr);
        assert!(matches!(empirical_pairing(&fam, 5, &t1), Err(Error::MissingPrime(5))));
    }

    #[test]
    fn products_over_primes() {
        let fam = family(60.0, vec![2, 3], 4);
        assert_eq!(multi_prime_pairing(&fam, &[]).unwrap().mean, Complex64::new(1.0, 0.0));
        let f2 = satake_transform(&tau(1, 2)).unwrap();
        let f3 = satake_transform(&tau(1, 3)).unwrap();
        let single = multi_prime_pairing(&fam, &[(2, f2.clone())]).unwrap();
        assert_eq!(single, empirical_pairing(&fam, 2, &f2).unwrap());
        let both = multi_prime_pairing(&fam, &[(2, f2), (3, f3)]).unwrap();
        assert!(both.mean.norm() < 4.0 * both.stderr, "{both:?}");
    }

    #[test]
    fn sato_tate_sequence() {
        let cfg = SatoTateConfig {
            n: 2,
            sequence: [5u64, 11, 23, 47, 97].iter().map(|&p| (p, (p as f64).powi(3))).collect(),
            dims: GroupDims::adjoint(2).unwrap(),
            params: MainTermParams::default(),
            seed: 1,
            max_forms: Some(20_000),
        };
        let t = default_testset(2).unwrap();
        let table = sato_tate_run(&cfg, &t, &Quadrature::default()).unwrap();
        assert!(table.rows.iter().all(|r| r.discrepancy[0] < 1e-12));
        assert!(table.final_within_tolerance);
        assert_eq!(table.warnings.len(), 1);
        let bad = SatoTateConfig { sequence: vec![(5, 100.0), (3, 1000.0)], ..cfg };
        assert!(sato_tate_run(&bad, &t, &Quadrature::default()).is_err());
    }
}
