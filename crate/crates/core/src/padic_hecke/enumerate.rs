//! Left-coset representatives of `K omega(p) K / K` as Hermite normal forms.
//!
//! A left coset `gK` is a lattice `g Z_p^n`. Each lattice of the right
//! elementary-divisor type has a unique upper-triangular basis with diagonal
//! `p^{b_i}` and entry `(i, j)` reduced modulo `p^{b_i}` (column operations
//! only ever add multiples of earlier columns). The search walks these bases
//! column by column. Every leading block spans `L` intersected with the first
//! coordinates, whose cotype must be contained in the target cotype, and that
//! is used to prune.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use super::cocharacter::Cocharacter;
use super::smith::{checked_pow, is_prime, SmithWorkspace};
use crate::error::{Error, Result};

/// Default number of candidate matrices an enumeration may inspect.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// One left-coset representative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CosetRep {
    pub prime: u64,
    pub n: usize,
    /// Row-major `n x n` upper-triangular matrix.
    pub matrix: Vec<i64>,
    pub diag_valuations: Vec<u32>,
}

impl CosetRep {
    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.matrix[i * self.n + j]
    }
}

/// Weak compositions of `total` into `n` parts each at most `max`, in
/// lexicographic order.
pub(crate) fn compositions(total: u32, n: usize, max: u32) -> Vec<Vec<u32>> {
    fn rec(i: usize, left: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let n = cur.len();
        if i == n - 1 {
            if left <= max {
                cur[i] = left;
                out.push(cur.clone());
            }
            return;
        }
        let room = max * (n - 1 - i) as u32;
        for v in 0..=left.min(max) {
            if left - v > room {
                continue;
            }
            cur[i] = v;
            rec(i + 1, left - v, max, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    rec(0, total, max, &mut cur, &mut out);
    out
}

pub(crate) fn validate(omega: &Cocharacter, p: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    let prec = omega.size() + 1;
    if checked_pow(p, prec).is_none() {
        return Err(Error::BudgetExceeded {
            what: format!("working precision p^{prec} for omega={omega}, p={p}"),
            budget: 1 << 62,
        });
    }
    Ok(prec)
}

struct Search<'a> {
    n: usize,
    target: Vec<u32>,
    diag: &'a [u32],
    powers: Vec<i64>,
    ws: SmithWorkspace,
    mat: Vec<i64>,
    counter: &'a AtomicU64,
    budget: u64,
}

impl Search<'_> {
    fn charge(&self) -> Result<()> {
        if self.counter.fetch_add(1, Ordering::Relaxed) + 1 > self.budget {
            return Err(Error::BudgetExceeded {
                what: "coset enumeration".into(),
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// Fill entry `(i, j)` (column-major over the strict upper triangle).
    fn fill(&mut self, i: usize, j: usize, visit: &mut dyn FnMut(&[i64])) -> Result<()> {
        let n = self.n;
        if i == j {
            let k = j + 1;
            self.charge()?;
            let exps = self.ws.block_exponents(&self.mat, k);
            if k == n {
                if exps == self.target.as_slice() {
                    visit(&self.mat);
                }
                return Ok(());
            }
            if exps.iter().zip(&self.target).any(|(e, t)| e > t) {
                return Ok(());
            }
            return self.fill(0, j + 1, visit);
        }
        let modulus = self.powers[self.diag[i] as usize];
        for x in 0..modulus {
            self.mat[i * n + j] = x;
            self.fill(i + 1, j, visit)?;
        }
        self.mat[i * n + j] = 0;
        Ok(())
    }
}

fn search_diagonal(
    omega: &Cocharacter,
    p: u64,
    prec: u32,
    diag: &[u32],
    counter: &AtomicU64,
    budget: u64,
    visit: &mut dyn FnMut(&[i64]),
) -> Result<()> {
    let n = omega.rank();
    let powers: Vec<i64> = (0..=omega.largest()).map(|e| checked_pow(p, e).unwrap()).collect();
    let mut mat = vec![0i64; n * n];
    for (i, &b) in diag.iter().enumerate() {
        mat[i * n + i] = powers[b as usize];
    }
    let target: Vec<u32> = omega.parts().iter().map(|&a| a as u32).collect();
    let mut search = Search {
        n,
        target,
        diag,
        powers,
        ws: SmithWorkspace::new(n, p, prec),
        mat,
        counter,
        budget,
    };
    search.fill(0, 0, visit)
}

/// Run `job` for every admissible diagonal, in lexicographic order of the
/// diagonal. Jobs run in parallel; the output order does not depend on the
/// thread count.
fn per_diagonal<T, F>(omega: &Cocharacter, p: u64, budget: u64, job: F) -> Result<Vec<(Vec<u32>, T)>>
where
    T: Send,
    F: Fn(&[u32], &mut dyn FnMut(&mut dyn FnMut(&[i64])) -> Result<()>) -> Result<T> + Sync,
{
    let prec = validate(omega, p)?;
    let diagonals = compositions(omega.size(), omega.rank(), omega.largest());
    let counter = AtomicU64::new(0);
    diagonals
        .into_par_iter()
        .map(|diag| {
            let mut run = |visit: &mut dyn FnMut(&[i64])| {
                search_diagonal(omega, p, prec, &diag, &counter, budget, visit)
            };
            let value = job(&diag, &mut run)?;
            Ok((diag, value))
        })
        .collect()
}

/// Complete, duplicate-free list of left-coset representatives of the
/// double coset `K omega(p) K`, ordered by diagonal and then by the
/// off-diagonal entries in column-major order.
pub fn enumerate_cosets_with_budget(omega: &Cocharacter, p: u64, budget: u64) -> Result<Vec<CosetRep>> {
    let n = omega.rank();
    let blocks = per_diagonal(omega, p, budget, |diag, run| {
        let mut reps = Vec::new();
        run(&mut |m: &[i64]| {
            reps.push(CosetRep {
                prime: p,
                n,
                matrix: m.to_vec(),
                diag_valuations: diag.to_vec(),
            })
        })?;
        Ok(reps)
    })?;
    Ok(blocks.into_iter().flat_map(|(_, r)| r).collect())
}

pub fn enumerate_cosets(omega: &Cocharacter, p: u64) -> Result<Vec<CosetRep>> {
    enumerate_cosets_with_budget(omega, p, DEFAULT_BUDGET)
}

/// Number of representatives with each diagonal; diagonals with no
/// representative are dropped.
pub fn diagonal_profile(omega: &Cocharacter, p: u64, budget: u64) -> Result<Vec<(Vec<u32>, u64)>> {
    let blocks = per_diagonal(omega, p, budget, |_, run| {
        let mut count = 0u64;
        run(&mut |_| count += 1)?;
        Ok(count)
    })?;
    Ok(blocks.into_iter().filter(|(_, c)| *c > 0).collect())
}

/// `|K omega(p) K / K|`.
pub fn degree_with_budget(omega: &Cocharacter, p: u64, budget: u64) -> Result<u64> {
    Ok(diagonal_profile(omega, p, budget)?.iter().map(|(_, c)| c).sum())
}

pub fn degree(omega: &Cocharacter, p: u64) -> Result<u64> {
    degree_with_budget(omega, p, DEFAULT_BUDGET)
}

/// Gaussian binomial `[n choose t]_p`.
pub fn gaussian_binomial(n: u32, t: u32, p: u64) -> u64 {
    if t > n {
        return 0;
    }
    let q = p as u128;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..t {
        num *= q.pow(n - i) - 1;
        den *= q.pow(i + 1) - 1;
    }
    (num / den) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[i64]) -> Cocharacter {
        Cocharacter::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identity_coset() {
        for p in [2, 3, 5] {
            let reps = enumerate_cosets(&Cocharacter::zero(3), p).unwrap();
            assert_eq!(reps.len(), 1);
            assert_eq!(reps[0].matrix, vec![1, 0, 0, 0, 1, 0, 0, 0, 1]);
        }
    }

    #[test]
    fn hecke_tp_for_pgl2() {
        let reps = enumerate_cosets(&w(&[1, 0]), 3).unwrap();
        assert_eq!(reps.len(), 4);
        // diag (1, p) once, then (p, 1) with entry x in 0..p.
        assert_eq!(reps[0].diag_valuations, vec![0, 1]);
        assert_eq!(reps[0].matrix, vec![1, 0, 0, 3]);
        for (x, rep) in reps[1..].iter().enumerate() {
            assert_eq!(rep.matrix, vec![3, x as i64, 0, 1]);
        }
    }

    #[test]
    fn minuscule_degrees() {
        assert_eq!(degree(&w(&[1, 0, 0]), 2).unwrap(), 7);
        assert_eq!(degree(&w(&[1, 1, 0]), 2).unwrap(), 7);
        assert_eq!(degree(&w(&[1, 1]), 3).unwrap(), 1);
        for n in 2..=4usize {
            for p in [2u64, 3, 5] {
                for t in 1..n {
                    let g = Cocharacter::minuscule(n, t).unwrap();
                    assert_eq!(degree(&g, p).unwrap(), gaussian_binomial(n as u32, t as u32, p));
                }
            }
        }
    }

    #[test]
    fn representatives_are_reduced_and_typed() {
        let omega = w(&[2, 1, 0]);
        let reps = enumerate_cosets(&omega, 2).unwrap();
        for r in &reps {
            let dsum: u32 = r.diag_valuations.iter().sum();
            assert_eq!(dsum, omega.size());
            for i in 0..3 {
                for j in i + 1..3 {
                    let e = r.entry(i, j);
                    assert!(e >= 0 && e < 2i64.pow(r.diag_valuations[i]));
                    assert_eq!(r.entry(j, i), 0);
                }
            }
            let exps = super::super::smith::smith_exponents(&r.matrix, 3, 2, 5);
            assert_eq!(exps, vec![2, 1, 0]);
        }
    }

    /// `x^{-1} y` lies in `GL_n(Z_p)` iff `adj(x) y` is divisible by `det x`.
    fn equivalent(x: &CosetRep, y: &CosetRep) -> bool {
        let n = x.n;
        assert_eq!(n, 3);
        let m = &x.matrix;
        let c = |i: usize, j: usize| m[i * 3 + j] as i128;
        let det = c(0, 0) * c(1, 1) * c(2, 2);
        let adj = [
            [c(1, 1) * c(2, 2), -c(0, 1) * c(2, 2), c(0, 1) * c(1, 2) - c(0, 2) * c(1, 1)],
            [0, c(0, 0) * c(2, 2), -c(0, 0) * c(1, 2)],
            [0, 0, c(0, 0) * c(1, 1)],
        ];
        adj.iter().all(|row| {
            (0..3).all(|j| {
                let s: i128 = row.iter().enumerate().map(|(k, a)| a * y.matrix[k * 3 + j] as i128).sum();
                s % det == 0
            })
        })
    }

    #[test]
    fn representatives_pairwise_inequivalent() {
        for omega in [w(&[1, 0, 0]), w(&[2, 1, 0]), w(&[2, 0, 0])] {
            let reps = enumerate_cosets(&omega, 2).unwrap();
            for (a, x) in reps.iter().enumerate() {
                for (b, y) in reps.iter().enumerate() {
                    assert_eq!(equivalent(x, y), a == b, "{omega} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let err = enumerate_cosets_with_budget(&w(&[2, 1, 0]), 3, 10).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(degree(&w(&[1, 0]), 4).is_err());
    }

    #[test]
    fn gaussian_binomials() {
        assert_eq!(gaussian_binomial(2, 1, 3), 4);
        assert_eq!(gaussian_binomial(3, 1, 2), 7);
        assert_eq!(gaussian_binomial(4, 2, 2), 35);
        assert_eq!(gaussian_binomial(3, 0, 5), 1);
    }

    #[test]
    fn composition_listing() {
        assert_eq!(compositions(2, 2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(compositions(3, 2, 2), vec![vec![1, 2], vec![2, 1]]);
    }
}
