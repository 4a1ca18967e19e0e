use serde::{Deserialize, Serialize};

use super::quadrature::{Quadrature, TorusRule};
use super::torus::MeasureSpec;
use crate::error::{Error, Result};
use crate::padic_hecke::Cocharacter;
use crate::satake::SymLaurent;

/// Discrepancies below this are treated as quadrature noise.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Labelled test function.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub label: String,
    pub f: SymLaurent,
}

/// Irreducible characters `s_lambda` of `SU(n)` with small `lambda_1`:
/// up to 4 for `n = 2`, 2 for `n = 3`, 1 beyond.
pub fn default_testset(n: usize) -> Result<Vec<TestFunction>> {
    let top = match n {
        2 => 4,
        3 => 2,
        _ => 1,
    };
    let mut out = Vec::new();
    for lambda in Cocharacter::all_up_to_height(n, 0).into_iter().chain(dominant_up_to(n, top)) {
        let label = format!("s{lambda}");
        if out.iter().any(|t: &TestFunction| t.label == label) {
            continue;
        }
        out.push(TestFunction { f: SymLaurent::schur(n, 2, lambda.parts())?, label });
    }
    Ok(out)
}

fn dominant_up_to(n: usize, top: i64) -> Vec<Cocharacter> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; n];
    fn rec(i: usize, cap: i64, cur: &mut Vec<i64>, out: &mut Vec<Cocharacter>) {
        if i + 1 == cur.len() {
            cur[i] = 0;
            out.push(Cocharacter::new(cur.clone()).expect("valid rank"));
            return;
        }
        for v in 0..=cap {
            cur[i] = v;
            rec(i + 1, v, cur, out);
        }
    }
    rec(0, top, &mut cur, &mut out);
    out.sort_by_key(|c| (c.size(), c.parts().to_vec()));
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub label: String,
    pub sato_tate: f64,
    pub plancherel: Vec<f64>,
    pub discrepancy: Vec<f64>,
    /// Strictly decreasing over primes `>= 5`, or identically below the
    /// noise floor.
    pub decreasing: bool,
    /// `max_p p * discrepancy(p)`.
    pub fitted_constant: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n: usize,
    pub primes: Vec<u64>,
    pub rows: Vec<ConvergenceRow>,
    /// Largest discrepancy over the test set at each prime.
    pub max_discrepancy: Vec<f64>,
    pub max_decreasing: bool,
    pub fitted_constant: f64,
}

fn strictly_decreasing(primes: &[u64], d: &[f64]) -> bool {
    if d.iter().all(|&x| x < NOISE_FLOOR) {
        return true;
    }
    let tail: Vec<f64> = primes.iter().zip(d).filter(|(p, _)| **p >= 5).map(|(_, x)| *x).collect();
    tail.windows(2).all(|w| w[1] < w[0])
}

/// `|integral f dm_p - integral f dm_ST|` for each prime and test function.
pub fn weak_convergence_report(
    n: usize,
    primes: &[u64],
    testset: &[TestFunction],
    q: &Quadrature,
) -> Result<ConvergenceReport> {
    if primes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("primes must be increasing"));
    }
    let st_rule = TorusRule::for_spec(&MeasureSpec::sato_tate(n)?, q)?;
    let st: Vec<f64> = testset.iter().map(|t| st_rule.pair(&t.f).map(|v| v.re)).collect::<Result<_>>()?;
    let mut pl = vec![Vec::with_capacity(primes.len()); testset.len()];
    for &p in primes {
        let rule = TorusRule::for_spec(&MeasureSpec::plancherel(n, p)?, q)?;
        for (row, t) in pl.iter_mut().zip(testset) {
            row.push(rule.pair(&t.f)?.re);
        }
    }
    let rows: Vec<ConvergenceRow> = testset
        .iter()
        .zip(st)
        .zip(pl)
        .map(|((t, s), vals)| {
            let discrepancy: Vec<f64> = vals.iter().map(|v| (v - s).abs()).collect();
            let fitted_constant =
                primes.iter().zip(&discrepancy).map(|(&p, d)| p as f64 * d).fold(0.0, f64::max);
            ConvergenceRow {
                label: t.label.clone(),
                sato_tate: s,
                decreasing: strictly_decreasing(primes, &discrepancy),
                plancherel: vals,
                discrepancy,
                fitted_constant,
            }
        })
        .collect();
    let max_discrepancy: Vec<f64> = (0..primes.len())
        .map(|k| rows.iter().map(|r| r.discrepancy[k]).fold(0.0, f64::max))
        .collect();
    let fitted_constant = rows.iter().map(|r| r.fitted_constant).fold(0.0, f64::max);
    Ok(ConvergenceReport {
        n,
        max_decreasing: strictly_decreasing(primes, &max_discrepancy),
        primes: primes.to_vec(),
        rows,
        max_discrepancy,
        fitted_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn testset_labels() {
        let t = default_testset(2).unwrap();
        let labels: Vec<&str> = t.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, ["s(0,0)", "s(1,0)", "s(2,0)", "s(3,0)", "s(4,0)"]);
        assert_eq!(default_testset(3).unwrap().len(), 6);
    }

    #[test]
    fn rank_two_rates() {
        let t = default_testset(2).unwrap();
        let primes = [5, 11, 23, 47, 97];
        let r = weak_convergence_report(2, &primes, &t, &Quadrature::default()).unwrap();
        assert!(r.rows[0].discrepancy.iter().all(|d| *d < 1e-12));
        // chi_2 has Plancherel mass 1/p and Sato-Tate mass 0.
        for (k, &p) in primes.iter().enumerate() {
            assert!((r.rows[2].discrepancy[k] - 1.0 / p as f64).abs() < 1e-12);
            assert!((r.max_discrepancy[k] - 1.0 / p as f64).abs() < 1e-12);
        }
        assert!(r.max_decreasing && r.rows.iter().all(|row| row.decreasing));
        assert!(r.fitted_constant <= 1.0 + 1e-9);
        assert!(weak_convergence_report(2, &[5, 3], &t, &Quadrature::default()).is_err());
    }

    #[test]
    fn doubling_the_prime_halves_e1_squared() {
        let e1 = SymLaurent::elementary(2, 2, 1).unwrap();
        let t = [TestFunction { label: "e1^2".into(), f: e1.mul(&e1).unwrap() }];
        let r = weak_convergence_report(2, &[7, 14, 1_000_000], &t, &Quadrature::default()).unwrap();
        let ratio = r.rows[0].discrepancy[0] / r.rows[0].discrepancy[1];
        assert!((1.5..=2.5).contains(&ratio), "{ratio}");
        assert!(r.rows[0].discrepancy[2] <= 1e-4);
    }
}
