use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::cocharacter::Cocharacter;
use super::enumerate::{self, CosetRep, DEFAULT_BUDGET};
use super::smith::{checked_pow, is_prime, mat_mul_mod, SmithWorkspace};
use crate::error::{Error, Result};
use crate::Rational;

/// Finite linear combination of double-coset indicators `tau_omega`.
#[derive(Clone, PartialEq, Eq)]
pub struct HeckeElement {
    n: usize,
    prime: u64,
    terms: BTreeMap<Cocharacter, Rational>,
}

impl HeckeElement {
    pub fn zero(n: usize, prime: u64) -> Self {
        HeckeElement { n, prime, terms: BTreeMap::new() }
    }

    /// The unit `tau_0`.
    pub fn one(n: usize, prime: u64) -> Self {
        Self::basis(&Cocharacter::zero(n), prime)
    }

    pub fn basis(omega: &Cocharacter, prime: u64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(omega.clone(), Rational::one());
        HeckeElement { n: omega.rank(), prime, terms }
    }

    pub fn from_terms(
        n: usize,
        prime: u64,
        terms: impl IntoIterator<Item = (Cocharacter, Rational)>,
    ) -> Result<Self> {
        let mut out = HeckeElement::zero(n, prime);
        for (omega, c) in terms {
            if omega.rank() != n {
                return Err(Error::invalid(format!("term {omega} has rank != {n}")));
            }
            out.add_term(omega, c);
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Cocharacter, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, omega: &Cocharacter) -> Rational {
        self.terms.get(omega).copied().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `f(1)`: only `tau_0` is supported at the identity.
    pub fn value_at_identity(&self) -> Rational {
        self.coefficient(&Cocharacter::zero(self.n))
    }

    pub fn max_height(&self) -> u32 {
        self.terms.keys().map(Cocharacter::height).max().unwrap_or(0)
    }

    pub(crate) fn add_term(&mut self, omega: Cocharacter, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(omega).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    fn check_compatible(&self, other: &HeckeElement) -> Result<()> {
        if self.n != other.n || self.prime != other.prime {
            return Err(Error::invalid(format!(
                "incompatible Hecke elements: (n={}, p={}) vs (n={}, p={})",
                self.n, self.prime, other.n, other.prime
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &HeckeElement) -> Result<HeckeElement> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), *c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: Rational) -> HeckeElement {
        let mut out = HeckeElement::zero(self.n, self.prime);
        for (w, v) in &self.terms {
            out.add_term(w.clone(), *v * c);
        }
        out
    }
}

impl fmt::Debug for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*tau{w}")?;
        }
        Ok(())
    }
}

type Profile = Arc<Vec<(Vec<u32>, u64)>>;

/// The spherical Hecke algebra of `PGL(n, Q_p)` with memoized coset data.
///
/// Caches are shared behind mutexes, so one instance can serve several
/// threads. All results are independent of the order in which the caches
/// fill up.
pub struct HeckeAlgebra {
    n: usize,
    p: u64,
    budget: u64,
    reps: Mutex<HashMap<Cocharacter, Arc<Vec<CosetRep>>>>,
    profiles: Mutex<HashMap<Cocharacter, Profile>>,
    products: Mutex<HashMap<(Cocharacter, Cocharacter), Arc<HeckeElement>>>,
}

impl HeckeAlgebra {
    pub fn new(n: usize, p: u64) -> Result<Self> {
        Self::with_budget(n, p, DEFAULT_BUDGET)
    }

    pub fn with_budget(n: usize, p: u64, budget: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("rank must be at least 2"));
        }
        if !is_prime(p) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        Ok(HeckeAlgebra {
            n,
            p,
            budget,
            reps: Mutex::default(),
            profiles: Mutex::default(),
            products: Mutex::default(),
        })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    fn check_rank(&self, omega: &Cocharacter) -> Result<()> {
        if omega.rank() != self.n {
            return Err(Error::invalid(format!("{omega} does not have rank {}", self.n)));
        }
        Ok(())
    }

    pub fn cosets(&self, omega: &Cocharacter) -> Result<Arc<Vec<CosetRep>>> {
        self.check_rank(omega)?;
        if let Some(r) = self.reps.lock().unwrap().get(omega) {
            return Ok(r.clone());
        }
        let reps = Arc::new(enumerate::enumerate_cosets_with_budget(omega, self.p, self.budget)?);
        self.reps.lock().unwrap().insert(omega.clone(), reps.clone());
        Ok(reps)
    }

    /// Representative counts per diagonal, see [`enumerate::diagonal_profile`].
    pub fn profile(&self, omega: &Cocharacter) -> Result<Profile> {
        self.check_rank(omega)?;
        if let Some(r) = self.profiles.lock().unwrap().get(omega) {
            return Ok(r.clone());
        }
        let prof = Arc::new(enumerate::diagonal_profile(omega, self.p, self.budget)?);
        self.profiles.lock().unwrap().insert(omega.clone(), prof.clone());
        Ok(prof)
    }

    pub fn degree(&self, omega: &Cocharacter) -> Result<u64> {
        Ok(self.profile(omega)?.iter().map(|(_, c)| c).sum())
    }

    /// `tau_lambda * tau_nu`, by classifying all products `x y` of coset
    /// representatives by elementary-divisor type. The coefficient of
    /// `tau_mu` is the number of products of type `mu` divided by
    /// `deg(mu)`.
    pub fn basis_product(&self, lambda: &Cocharacter, nu: &Cocharacter) -> Result<Arc<HeckeElement>> {
        self.check_rank(lambda)?;
        self.check_rank(nu)?;
        let key = (lambda.clone(), nu.clone());
        if let Some(r) = self.products.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let result = Arc::new(self.count_products(lambda, nu)?);
        self.products.lock().unwrap().insert(key, result.clone());
        Ok(result)
    }

    fn count_products(&self, lambda: &Cocharacter, nu: &Cocharacter) -> Result<HeckeElement> {
        if lambda.is_zero() {
            return Ok(HeckeElement::basis(nu, self.p));
        }
        if nu.is_zero() {
            return Ok(HeckeElement::basis(lambda, self.p));
        }
        let n = self.n;
        let xs = self.cosets(lambda)?;
        let ys = self.cosets(nu)?;
        let pairs = xs.len() as u64 * ys.len() as u64;
        if pairs > self.budget {
            return Err(Error::BudgetExceeded {
                what: format!("convolution tau{lambda} * tau{nu} ({pairs} products)"),
                budget: self.budget,
            });
        }
        let prec = lambda.size() + nu.size() + 1;
        let modulus = checked_pow(self.p, prec).ok_or_else(|| Error::BudgetExceeded {
            what: format!("working precision p^{prec}"),
            budget: 1 << 62,
        })?;
        let p = self.p;
        let counts: HashMap<Vec<u32>, u64> = xs
            .par_iter()
            .fold(
                || (HashMap::new(), SmithWorkspace::new(n, p, prec), vec![0i64; n * n]),
                |(mut acc, mut ws, mut prod), x| {
                    for y in ys.iter() {
                        mat_mul_mod(&x.matrix, &y.matrix, n, modulus, &mut prod);
                        let exps = ws.exponents(&prod);
                        *acc.entry(exps.to_vec()).or_insert(0u64) += 1;
                    }
                    (acc, ws, prod)
                },
            )
            .map(|(acc, _, _)| acc)
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });
        let mut out = HeckeElement::zero(n, p);
        let mut keys: Vec<_> = counts.into_iter().collect();
        keys.sort();
        for (exps, count) in keys {
            let mu = Cocharacter::new(exps.iter().map(|&e| i64::from(e)).collect::<Vec<_>>())?;
            let deg = self.degree(&mu)?;
            if count % deg != 0 {
                return Err(Error::CheckFailed(format!(
                    "product count {count} for tau{mu} is not a multiple of its degree {deg}"
                )));
            }
            out.add_term(mu, Rational::from_integer((count / deg) as i128));
        }
        Ok(out)
    }

    pub fn convolve(&self, f: &HeckeElement, g: &HeckeElement) -> Result<HeckeElement> {
        for h in [f, g] {
            if h.rank() != self.n || h.prime() != self.p {
                return Err(Error::invalid("Hecke element does not belong to this algebra"));
            }
        }
        let mut out = HeckeElement::zero(self.n, self.p);
        for (lambda, a) in f.terms() {
            for (nu, b) in g.terms() {
                let prod = self.basis_product(lambda, nu)?;
                for (mu, c) in prod.terms() {
                    out.add_term(mu.clone(), *a * *b * *c);
                }
            }
        }
        Ok(out)
    }
}

/// `f * g` with a fresh algebra and the default budget.
pub fn convolve(f: &HeckeElement, g: &HeckeElement) -> Result<HeckeElement> {
    f.check_compatible(g)?;
    HeckeAlgebra::new(f.rank(), f.prime())?.convolve(f, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[i64]) -> Cocharacter {
        Cocharacter::new(v.to_vec()).unwrap()
    }

    fn int(k: i128) -> Rational {
        Rational::from_integer(k)
    }

    #[test]
    fn unit_acts_trivially() {
        let alg = HeckeAlgebra::new(3, 2).unwrap();
        let f = HeckeElement::from_terms(3, 2, [(w(&[1, 0, 0]), int(2)), (w(&[2, 1, 0]), int(-1))]).unwrap();
        assert_eq!(alg.convolve(&HeckeElement::one(3, 2), &f).unwrap(), f);
        assert_eq!(alg.convolve(&f, &HeckeElement::one(3, 2)).unwrap(), f);
    }

    #[test]
    fn tp_squared_pgl2() {
        // T_p^2 = T_{p^2} + (p + 1) T_{(1,1)} and T_{(1,1)} is the identity in PGL.
        for p in [2u64, 3, 5] {
            let alg = HeckeAlgebra::new(2, p).unwrap();
            let t = HeckeElement::basis(&w(&[1, 0]), p);
            let sq = alg.convolve(&t, &t).unwrap();
            let expected =
                HeckeElement::from_terms(2, p, [(w(&[2, 0]), int(1)), (w(&[0, 0]), int(p as i128 + 1))]).unwrap();
            assert_eq!(sq, expected, "p={p}");
        }
    }

    #[test]
    fn central_element_is_identity() {
        let alg = HeckeAlgebra::new(3, 3).unwrap();
        let central = HeckeElement::basis(&w(&[1, 1, 1]), 3);
        let f = HeckeElement::basis(&w(&[2, 1, 0]), 3);
        assert_eq!(alg.convolve(&central, &f).unwrap(), f);
    }

    /// Direct evaluation `(tau_l * tau_v)(t_mu) = #{x in cosets(l) : x^{-1} t_mu in K v K}`
    /// for a GL lift `mu`, independent of the pair-counting route.
    /// Uses `adj(x) = det(x) x^{-1}`, whose type is shifted by `size(l)`.
    fn direct_constant(alg: &HeckeAlgebra, l: &Cocharacter, v: &Cocharacter, mu: &[i64]) -> u64 {
        let p = alg.prime() as i128;
        let t: Vec<i128> = mu.iter().map(|&a| p.pow(a as u32)).collect();
        let prec = l.size() + mu.iter().sum::<i64>() as u32 + 2;
        let target: Vec<u32> = v.parts().iter().map(|&a| a as u32 + l.size()).collect();
        let mut count = 0;
        for x in alg.cosets(l).unwrap().iter() {
            let c = |i: usize, j: usize| x.matrix[i * 3 + j] as i128;
            let adj = [
                [c(1, 1) * c(2, 2), -c(0, 1) * c(2, 2), c(0, 1) * c(1, 2) - c(0, 2) * c(1, 1)],
                [0, c(0, 0) * c(2, 2), -c(0, 0) * c(1, 2)],
                [0, 0, c(0, 0) * c(1, 1)],
            ];
            let m: Vec<i64> = (0..9).map(|k| (adj[k / 3][k % 3] * t[k % 3]) as i64).collect();
            if super::super::smith::smith_exponents(&m, 3, alg.prime(), prec) == target {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn structure_constants_match_direct_evaluation() {
        let alg = HeckeAlgebra::new(3, 2).unwrap();
        let basis = Cocharacter::all_up_to_height(3, 1);
        for l in &basis {
            for v in &basis {
                let prod = alg.basis_product(l, v).unwrap();
                for (mu, c) in prod.terms() {
                    let shift = (i64::from(l.size() + v.size()) - i64::from(mu.size())) / 3;
                    let gl: Vec<i64> = mu.parts().iter().map(|a| a + shift).collect();
                    let direct = direct_constant(&alg, l, v, &gl);
                    assert_eq!(Rational::from_integer(direct as i128), *c, "{l} * {v} at {mu}");
                }
            }
        }
    }

    #[test]
    fn commutative_on_small_basis() {
        let alg = HeckeAlgebra::new(3, 2).unwrap();
        let basis = Cocharacter::all_up_to_height(3, 1);
        for a in &basis {
            for b in &basis {
                assert_eq!(alg.basis_product(a, b).unwrap(), alg.basis_product(b, a).unwrap());
            }
        }
    }

    #[test]
    fn rejects_mixed_primes() {
        let f = HeckeElement::one(2, 2);
        let g = HeckeElement::one(2, 3);
        assert!(convolve(&f, &g).is_err());
    }

    #[test]
    fn convolution_budget() {
        let alg = HeckeAlgebra::with_budget(3, 3, 1000).unwrap();
        let f = HeckeElement::basis(&w(&[2, 1, 0]), 3);
        assert!(matches!(alg.convolve(&f, &f), Err(Error::BudgetExceeded { .. })));
    }
}
