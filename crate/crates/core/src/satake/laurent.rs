use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;

use super::surd::Surd;
use crate::error::{Error, Result};

/// Symmetric Laurent polynomial in `u_1..u_n` on the torus `u_1 ... u_n = 1`,
/// with coefficients in `Q(sqrt p)`.
///
/// Stored in the monomial-symmetric basis: the key `lambda` (weakly
/// decreasing, last entry zero) carries the coefficient of
/// `m_lambda = sum of u^alpha over the distinct permutations alpha of lambda`.
#[derive(Clone, PartialEq, Eq)]
pub struct SymLaurent {
    n: usize,
    p: u64,
    coeffs: BTreeMap<Vec<i64>, Surd>,
}

fn normalize(mut e: Vec<i64>) -> Vec<i64> {
    let min = *e.iter().min().unwrap();
    for x in &mut e {
        *x -= min;
    }
    e
}

fn dominant(e: &[i64]) -> Vec<i64> {
    let mut v = e.to_vec();
    v.sort_unstable_by(|a, b| b.cmp(a));
    normalize(v)
}

/// Distinct permutations of `v`, each normalized.
pub(crate) fn orbit(v: &[i64]) -> Vec<Vec<i64>> {
    let mut cur = v.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    // next_permutation over the ascending start
    loop {
        let n = cur.len();
        let Some(i) = (0..n - 1).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
    out
}

fn partitions(k: i64, parts: usize, max: i64) -> Vec<Vec<i64>> {
    if parts == 0 {
        return if k == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=k.min(max)).rev() {
        for mut rest in partitions(k - first, parts - 1, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl SymLaurent {
    pub fn zero(n: usize, p: u64) -> Self {
        SymLaurent { n, p, coeffs: BTreeMap::new() }
    }

    pub fn constant(n: usize, p: u64, c: Surd) -> Self {
        let mut s = SymLaurent::zero(n, p);
        s.add_coeff(vec![0; n], c);
        s
    }

    pub fn one(n: usize, p: u64) -> Self {
        Self::constant(n, p, Surd::one())
    }

    /// `m_lambda` for an arbitrary exponent vector (canonicalized).
    pub fn monomial_symmetric(n: usize, p: u64, lambda: &[i64]) -> Result<Self> {
        if lambda.len() != n {
            return Err(Error::invalid(format!("exponent {lambda:?} does not have {n} entries")));
        }
        let mut s = SymLaurent::zero(n, p);
        s.add_coeff(dominant(lambda), Surd::one());
        Ok(s)
    }

    /// Build from coefficients of individual monomials `u^e`. Fails when the
    /// input is not symmetric.
    pub fn from_monomials(n: usize, p: u64, terms: impl IntoIterator<Item = (Vec<i64>, Surd)>) -> Result<Self> {
        let mut full: HashMap<Vec<i64>, Surd> = HashMap::new();
        for (e, c) in terms {
            if e.len() != n {
                return Err(Error::invalid("exponent length does not match rank"));
            }
            let key = normalize(e);
            let entry = full.entry(key).or_default();
            *entry = *entry + c;
        }
        full.retain(|_, c| !c.is_zero());
        let mut out = SymLaurent::zero(n, p);
        for (e, c) in &full {
            let dom = dominant(e);
            for member in orbit(&dom) {
                let member = normalize(member);
                let other = full.get(&member).copied().unwrap_or_default();
                if other != *c {
                    return Err(Error::invalid(format!(
                        "not symmetric: coefficient of u^{e:?} is {c}, of u^{member:?} is {other}"
                    )));
                }
            }
            if *e == dom {
                out.add_coeff(dom, *c);
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&Vec<i64>, &Surd)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, lambda: &[i64]) -> Surd {
        self.coeffs.get(&dominant(lambda)).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_coeff(&mut self, key: Vec<i64>, c: Surd) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(key.clone()).or_default();
        *entry = *entry + c;
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    fn check(&self, other: &SymLaurent) -> Result<()> {
        if self.n != other.n || self.p != other.p {
            return Err(Error::invalid("incompatible symmetric Laurent polynomials"));
        }
        Ok(())
    }

    /// Every monomial with its coefficient.
    pub fn expand(&self) -> Vec<(Vec<i64>, Surd)> {
        let mut out = Vec::new();
        for (lambda, c) in &self.coeffs {
            for e in orbit(lambda) {
                out.push((normalize(e), *c));
            }
        }
        out
    }

    pub fn add(&self, other: &SymLaurent) -> Result<SymLaurent> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_coeff(k.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SymLaurent) -> Result<SymLaurent> {
        self.add(&other.scale(Surd::from_integer(-1)))
    }

    pub fn scale(&self, c: Surd) -> SymLaurent {
        let mut out = SymLaurent::zero(self.n, self.p);
        for (k, v) in &self.coeffs {
            out.add_coeff(k.clone(), v.mul(&c, self.p));
        }
        out
    }

    /// Product; the coefficient of `m_nu` is read off at the dominant
    /// monomial `u^nu` of the expanded product.
    pub fn mul(&self, other: &SymLaurent) -> Result<SymLaurent> {
        self.check(other)?;
        let p = self.p;
        let right = other.expand();
        let mut out = SymLaurent::zero(self.n, p);
        let mut acc: HashMap<Vec<i64>, Surd> = HashMap::new();
        for (lambda, a) in &self.coeffs {
            for e in orbit(lambda) {
                for (f, b) in &right {
                    let sum: Vec<i64> = e.iter().zip(f).map(|(x, y)| x + y).collect();
                    let key = normalize(sum);
                    if key.windows(2).all(|w| w[0] >= w[1]) {
                        let entry = acc.entry(key).or_default();
                        *entry = *entry + a.mul(b, p);
                    }
                }
            }
        }
        let mut keys: Vec<_> = acc.into_iter().collect();
        keys.sort_by(|x, y| x.0.cmp(&y.0));
        for (k, c) in keys {
            out.add_coeff(k, c);
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<SymLaurent> {
        let mut acc = SymLaurent::one(self.n, self.p);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Value at `u`; meaningful when `u_1 ... u_n = 1`.
    pub fn eval(&self, u: &[Complex64]) -> Complex64 {
        assert_eq!(u.len(), self.n, "point has wrong rank");
        let mut total = Complex64::new(0.0, 0.0);
        for (e, c) in self.expand() {
            let mut term = Complex64::new(c.to_f64(self.p), 0.0);
            for (x, &k) in u.iter().zip(&e) {
                term *= x.powi(k as i32);
            }
            total += term;
        }
        total
    }

    /// Precomputed evaluation on the compact torus.
    pub fn torus_evaluator(&self) -> TorusEvaluator {
        TorusEvaluator {
            terms: self.expand().into_iter().map(|(e, c)| (e, c.to_f64(self.p))).collect(),
        }
    }

    /// Elementary symmetric polynomial `e_k`.
    pub fn elementary(n: usize, p: u64, k: usize) -> Result<SymLaurent> {
        if k > n {
            return Ok(SymLaurent::zero(n, p));
        }
        let lambda: Vec<i64> = (0..n).map(|i| i64::from(i < k)).collect();
        Self::monomial_symmetric(n, p, &lambda)
    }

    /// Complete homogeneous symmetric polynomial `h_k`.
    pub fn complete(n: usize, p: u64, k: i64) -> SymLaurent {
        let mut out = SymLaurent::zero(n, p);
        if k < 0 {
            return out;
        }
        for lambda in partitions(k, n, k) {
            out.add_coeff(dominant(&lambda), Surd::one());
        }
        out
    }

    /// Schur polynomial `s_lambda` through the Jacobi-Trudi determinant.
    /// On the torus these are the irreducible characters of `SU(n)`.
    pub fn schur(n: usize, p: u64, lambda: &[i64]) -> Result<SymLaurent> {
        if lambda.len() != n {
            return Err(Error::invalid("partition length does not match rank"));
        }
        let lam = dominant(lambda);
        let len = lam.iter().take_while(|&&x| x > 0).count();
        if len == 0 {
            return Ok(SymLaurent::one(n, p));
        }
        let entries: Vec<Vec<SymLaurent>> = (0..len)
            .map(|i| {
                (0..len)
                    .map(|j| SymLaurent::complete(n, p, lam[i] - i as i64 + j as i64))
                    .collect()
            })
            .collect();
        determinant(&entries, n, p)
    }
}

fn determinant(m: &[Vec<SymLaurent>], n: usize, p: u64) -> Result<SymLaurent> {
    let k = m.len();
    if k == 1 {
        return Ok(m[0][0].clone());
    }
    let mut acc = SymLaurent::zero(n, p);
    for col in 0..k {
        if m[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<SymLaurent>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = m[0][col].mul(&determinant(&minor, n, p)?)?;
        acc = if col % 2 == 0 { acc.add(&term)? } else { acc.sub(&term)? };
    }
    Ok(acc)
}

/// Flattened monomial list for fast evaluation at `u_i = e^{i theta_i}`.
#[derive(Clone, Debug)]
pub struct TorusEvaluator {
    terms: Vec<(Vec<i64>, f64)>,
}

impl TorusEvaluator {
    pub fn eval(&self, angles: &[f64]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let phase: f64 = e.iter().zip(angles).map(|(&k, t)| k as f64 * t).sum();
            total += Complex64::from_polar(*c, phase);
        }
        total
    }

    /// Value at an arbitrary point `u` of `(C^*)^n`.
    pub fn eval_values(&self, u: &[Complex64]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut term = Complex64::new(*c, 0.0);
            for (x, &k) in u.iter().zip(e) {
                term *= x.powi(k as i32);
            }
            total += term;
        }
        total
    }
}

impl fmt::Debug for SymLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SymLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})m{k:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(a: i128) -> Surd {
        Surd::from_integer(a)
    }

    #[test]
    fn orbits() {
        assert_eq!(orbit(&[1, 0, 0]).len(), 3);
        assert_eq!(orbit(&[2, 1, 0]).len(), 6);
        assert_eq!(orbit(&[1, 1]).len(), 1);
    }

    #[test]
    fn e1_squared_pgl2() {
        // (u1 + u2)^2 = m_(2,0) + 2 m_(1,1) and m_(1,1) = 1 on the torus.
        let e1 = SymLaurent::elementary(2, 3, 1).unwrap();
        let sq = e1.mul(&e1).unwrap();
        assert_eq!(sq.coefficient(&[2, 0]), c(1));
        assert_eq!(sq.coefficient(&[0, 0]), c(2));
    }

    #[test]
    fn rejects_asymmetric_input() {
        assert!(SymLaurent::from_monomials(2, 2, [(vec![1, 0], c(1))]).is_err());
        let ok = SymLaurent::from_monomials(2, 2, [(vec![1, 0], c(1)), (vec![0, 1], c(1)), (vec![3, 3], c(2))]).unwrap();
        assert_eq!(ok.coefficient(&[0, 0]), c(2));
    }

    #[test]
    fn schur_two_variables() {
        // s_(k,0)(e^{it}, e^{-it}) = sin((k+1)t) / sin t
        for k in 0..5 {
            let s = SymLaurent::schur(2, 2, &[k, 0]).unwrap();
            let t = 0.37;
            let u = [Complex64::from_polar(1.0, t), Complex64::from_polar(1.0, -t)];
            let expected = ((k as f64 + 1.0) * t).sin() / t.sin();
            assert!((s.eval(&u).re - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn schur_three_variables() {
        // s_(2,1,0) = m_(2,1,0) + 2 m_(1,1,1)
        let s = SymLaurent::schur(3, 2, &[2, 1, 0]).unwrap();
        assert_eq!(s.coefficient(&[2, 1, 0]), c(1));
        assert_eq!(s.coefficient(&[0, 0, 0]), c(2));
        // s_(1,1,0) = e_2
        assert_eq!(SymLaurent::schur(3, 2, &[1, 1, 0]).unwrap(), SymLaurent::elementary(3, 2, 2).unwrap());
    }

    #[test]
    fn evaluator_agrees_with_eval() {
        let s = SymLaurent::schur(3, 5, &[2, 1, 0]).unwrap().scale(Surd::half_power(5, 1));
        let th = [0.3, 1.9, -2.2];
        let u: Vec<Complex64> = th.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let a = s.eval(&u);
        let b = s.torus_evaluator().eval(&th);
        assert!((a - b).norm() < 1e-12);
        let _ = PI;
    }
}
