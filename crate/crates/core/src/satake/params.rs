use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance on `| |u_i| - 1 |` for calling a parameter tempered.
pub const DEFAULT_TEMPERED_TOL: f64 = 1e-6;
/// Allowed deviation of `u_1 ... u_n` from one.
pub const PRODUCT_TOL: f64 = 1e-10;
/// Iteration cap of the companion-matrix eigenvalue solver.
pub const ROOT_ITERATION_CAP: usize = 500;
/// Largest accepted relative residual of a returned root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-12;

/// Unordered `n`-tuple of nonzero complex numbers with product one.
///
/// Kept sorted by argument in `[0, 2 pi)`, ties broken by `log |u|`, which
/// picks one representative of each symmetric-group orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatakeParameter {
    values: Vec<Complex64>,
}

fn canonical_arg(z: &Complex64) -> f64 {
    let a = z.arg().rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

impl SatakeParameter {
    pub fn new(mut values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid("Satake parameter needs at least two entries"));
        }
        let prod: Complex64 = values.iter().product();
        if (prod - 1.0).norm() > PRODUCT_TOL {
            return Err(Error::invalid(format!("entries multiply to {prod}, not 1")));
        }
        values.sort_by(|a, b| {
            canonical_arg(a)
                .total_cmp(&canonical_arg(b))
                .then(a.norm().ln().total_cmp(&b.norm().ln()))
        });
        Ok(SatakeParameter { values })
    }

    /// Tempered parameter `(e^{i theta_1}, ..., e^{i theta_n})`; the angles
    /// must sum to a multiple of `2 pi`.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        Self::new(angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect())
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn angles(&self) -> Vec<f64> {
        self.values.iter().map(canonical_arg).collect()
    }

    pub fn log_moduli(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm().ln()).collect()
    }

    pub fn max_modulus_deviation(&self) -> f64 {
        self.values.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn is_tempered(&self, tol: f64) -> bool {
        self.max_modulus_deviation() <= tol
    }

    /// Elementary symmetric polynomial `e_t` of the entries.
    pub fn elementary(&self, t: usize) -> Complex64 {
        let mut e = vec![Complex64::new(0.0, 0.0); self.values.len() + 1];
        e[0] = Complex64::new(1.0, 0.0);
        for (k, &x) in self.values.iter().enumerate() {
            for j in (1..=k + 1).rev() {
                let prev = e[j - 1];
                e[j] += prev * x;
            }
        }
        e[t]
    }

    /// Multiset distance: smallest maximal entry error over all matchings.
    pub fn distance(&self, other: &SatakeParameter) -> f64 {
        assert_eq!(self.rank(), other.rank());
        let n = self.rank();
        let mut idx: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut idx, 0, &mut |perm| {
            let d = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| (self.values[i] - other.values[j]).norm())
                .fold(0.0, f64::max);
            best = best.min(d);
        });
        best
    }
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

pub fn is_tempered(u: &SatakeParameter, tol: f64) -> bool {
    u.is_tempered(tol)
}

/// Hecke eigenvalue of `tau_{gamma_t}` at the unramified representation with
/// parameter `u`: `p^{(n-t) t / 2} e_t(u)`.
pub fn eigenvalue_from_parameter(u: &SatakeParameter, t: usize, p: u64) -> Result<Complex64> {
    let n = u.rank();
    if t == 0 || t >= n {
        return Err(Error::invalid(format!("index t={t} outside 1..{}", n - 1)));
    }
    let scale = (p as f64).powf(((n - t) * t) as f64 / 2.0);
    Ok(u.elementary(t) * scale)
}

/// Output of [`satake_params_from_eigenvalues`].
#[derive(Clone, Debug)]
pub struct Extraction {
    pub parameter: SatakeParameter,
    /// Largest relative residual `|P(r)| / sum |c_k| |r|^k` over the roots.
    pub residual: f64,
    /// Monic coefficients, constant term first.
    pub polynomial: Vec<Complex64>,
}

/// The monic polynomial
/// `x^n + sum_t (-1)^t p^{-(n-t)t/2} lambda_t x^{n-t} + (-1)^n`,
/// returned constant term first.
pub fn extraction_polynomial(lambdas: &[Complex64], p: u64) -> Vec<Complex64> {
    let n = lambdas.len() + 1;
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    c[0] = Complex64::new(if n.is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0);
    for (i, &lam) in lambdas.iter().enumerate() {
        let t = i + 1;
        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
        let scale = (p as f64).powf(-(((n - t) * t) as f64) / 2.0);
        c[n - t] = lam * (sign * scale);
    }
    c
}

fn horner(c: &[Complex64], x: Complex64) -> (Complex64, Complex64, f64) {
    let mut val = Complex64::new(0.0, 0.0);
    let mut der = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let r = x.norm();
    for (k, &ck) in c.iter().enumerate().rev() {
        der = der * x + val;
        val = val * x + ck;
        scale += ck.norm() * r.powi(k as i32);
    }
    (val, der, scale)
}

/// Roots of the extraction polynomial, i.e. the Satake parameter whose
/// Hecke eigenvalues are `lambdas[t-1] = lambda(tau_{gamma_t})`.
pub fn satake_params_from_eigenvalues(lambdas: &[Complex64], p: u64) -> Result<Extraction> {
    if lambdas.is_empty() {
        return Err(Error::invalid("need n - 1 >= 1 eigenvalues"));
    }
    let coeffs = extraction_polynomial(lambdas, p);
    let n = lambdas.len() + 1;
    // Companion matrix, last column = -c_0 .. -c_{n-1}.
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i];
    }
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, ROOT_ITERATION_CAP)
        .ok_or(Error::RootFinding { residual: f64::NAN })?;
    let eig = schur.eigenvalues().ok_or(Error::RootFinding { residual: f64::NAN })?;
    let mut roots: Vec<Complex64> = eig.iter().copied().collect();
    let mut residual: f64 = 0.0;
    for r in &mut roots {
        for _ in 0..3 {
            let (v, d, _) = horner(&coeffs, *r);
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
        let (v, _, scale) = horner(&coeffs, *r);
        residual = residual.max(v.norm() / scale.max(f64::MIN_POSITIVE));
    }
    if !(residual <= ROOT_RESIDUAL_TOL) {
        return Err(Error::RootFinding { residual });
    }
    let parameter = SatakeParameter::new(roots)?;
    Ok(Extraction { parameter, residual, polynomial: coeffs })
}
