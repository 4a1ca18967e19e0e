//! Dimension bookkeeping for Weyl laws with Hecke operators on compact
//! quotients of `PGL(n, R)`: main terms, remainder exponents and the
//! constants that control the dependence on the Hecke operator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountKind {
    /// Full spectrum on `Gamma \ G`; exponent `d`.
    Nonequivariant,
    /// One `K`-type on `Gamma \ G`; exponent `d - dim K`.
    Equivariant,
}

/// Dimensions attached to `G = PGL(n, R)` and an embedding into `SL(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDims {
    pub n: u32,
    pub d: u32,
    pub dim_k: u32,
    pub ambient: u32,
}

impl GroupDims {
    pub fn new(n: u32, ambient: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("rank must be at least 2"));
        }
        if ambient < 1 {
            return Err(Error::invalid("ambient dimension must be positive"));
        }
        Ok(GroupDims { n, d: n * n - 1, dim_k: n * (n - 1) / 2, ambient })
    }

    /// Embedding through the adjoint representation, `N = n^2 - 1`.
    pub fn adjoint(n: u32) -> Result<Self> {
        Self::new(n, n.saturating_mul(n).saturating_sub(1))
    }

    /// Dimension of `G / K`.
    pub fn symmetric_dim(&self) -> u32 {
        self.d - self.dim_k
    }

    pub fn leading_exponent(&self, kind: CountKind) -> u32 {
        match kind {
            CountKind::Nonequivariant => self.d,
            CountKind::Equivariant => self.symmetric_dim(),
        }
    }

    /// The equivariant count needs `N >= d - dim K + 1`.
    pub fn check_equivariant(&self) -> Result<()> {
        if self.ambient < self.symmetric_dim() + 1 {
            return Err(Error::invalid(format!(
                "ambient dimension {} is below d - dim K + 1 = {}",
                self.ambient,
                self.symmetric_dim() + 1
            )));
        }
        Ok(())
    }
}

/// Global inputs of the main term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainTermParams {
    /// `vol(M)` for the full count, `vol(M / K)` for one `K`-type.
    pub vol: f64,
    pub d_sigma: u32,
    /// One when the Hecke operator contains the identity coset.
    pub delta_alpha: u8,
    /// Number of central elements in the support of the operator.
    pub n_z_alpha: u32,
}

impl Default for MainTermParams {
    fn default() -> Self {
        MainTermParams { vol: 1.0, d_sigma: 1, delta_alpha: 1, n_z_alpha: 1 }
    }
}

impl MainTermParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.vol > 0.0 && self.vol.is_finite()) {
            return Err(Error::invalid("volume must be positive"));
        }
        if self.d_sigma < 1 {
            return Err(Error::invalid("K-type dimension must be at least 1"));
        }
        if self.delta_alpha > 1 {
            return Err(Error::invalid("delta_alpha must be 0 or 1"));
        }
        Ok(())
    }
}

/// `pi^{m/2} / Gamma(1 + m/2)`, the volume of the unit ball in `R^m`.
pub fn sphere_volume(m: u32) -> f64 {
    let (mut v, start) = if m.is_multiple_of(2) { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= m {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// Coefficient of `mu^e` in the main term.
pub fn leading_coefficient(kind: CountKind, dims: &GroupDims, params: &MainTermParams) -> Result<f64> {
    params.validate()?;
    let e = dims.leading_exponent(kind);
    let base = params.vol * sphere_volume(e) / (2.0 * PI).powi(e as i32);
    Ok(match kind {
        CountKind::Nonequivariant => f64::from(params.delta_alpha) * base,
        CountKind::Equivariant => f64::from(params.n_z_alpha) * f64::from(params.d_sigma) * base,
    })
}

pub fn main_term(kind: CountKind, dims: &GroupDims, params: &MainTermParams, mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::invalid("mu must be positive"));
    }
    let c = leading_coefficient(kind, dims, params)?;
    Ok(c * mu.powi(dims.leading_exponent(kind) as i32))
}

/// Predicted number of eigenvalues up to `mu`: the main term for the
/// identity operator.
pub fn count_prediction(kind: CountKind, dims: &GroupDims, params: &MainTermParams, mu: f64) -> Result<f64> {
    let unit = MainTermParams { delta_alpha: 1, n_z_alpha: 1, ..*params };
    main_term(kind, dims, &unit, mu)
}

/// Exponent of `mu` in the remainder for `epsilon = 0`.
pub fn remainder_exponent_exact(kind: CountKind, dims: &GroupDims) -> Rational {
    match kind {
        CountKind::Nonequivariant => Rational::from_integer(i128::from(dims.d) - 1),
        CountKind::Equivariant => {
            let s = i128::from(dims.symmetric_dim());
            Rational::from_integer(s) - Rational::new(s - 1, s + 1)
        }
    }
}

pub fn remainder_exponent(kind: CountKind, dims: &GroupDims, epsilon: f64) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid("epsilon must be nonnegative"));
    }
    let r = remainder_exponent_exact(kind, dims);
    let base = *r.numer() as f64 / *r.denom() as f64;
    Ok(match kind {
        CountKind::Nonequivariant => base,
        CountKind::Equivariant => base + epsilon,
    })
}

/// Intermediate constants bounding the Hecke dependence of the remainder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantBudget {
    pub c3: u64,
    pub c5: f64,
    pub c6: u64,
    pub c_bound: u64,
}

pub fn constant_budget(dims: &GroupDims) -> Result<ConstantBudget> {
    let (d, n) = (u64::from(dims.d), u64::from(dims.ambient));
    let c3 = n * (n + 1);
    let c5 = c3 as f64 + (d as f64 - 1.0) / 2.0;
    let c6 = d + n - 1 + n * (n + 1) / 2;
    let c_bound = d + n * (n + 1);
    if !(c5 < c_bound as f64) || c6 >= c_bound {
        return Err(Error::CheckFailed(format!(
            "constant budget violated: c5={c5}, c6={c6}, bound={c_bound}"
        )));
    }
    Ok(ConstantBudget { c3, c5, c6, c_bound })
}

/// Exponent of `p` in the remainder: the stated bound `c kappa` with
/// `c < d + N(N+1)`.
pub fn prime_exponent_bound(dims: &GroupDims, kappa: u32) -> Result<u64> {
    Ok(constant_budget(dims)?.c_bound * u64::from(kappa))
}

/// Exponent `n^4 kappa`, the adjoint specialization of the bound above.
pub fn prime_exponent_adjoint(n: u32, kappa: u32) -> u64 {
    u64::from(n).pow(4) * u64::from(kappa)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert_eq!(sphere_volume(0), 1.0);
        assert_eq!(sphere_volume(1), 2.0);
        assert!((sphere_volume(2) - PI).abs() < 1e-15);
        assert!((sphere_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((sphere_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn main_terms() {
        let g = GroupDims::adjoint(2).unwrap();
        let p = MainTermParams::default();
        let off = MainTermParams { delta_alpha: 0, ..p };
        assert_eq!(main_term(CountKind::Nonequivariant, &g, &off, 7.0).unwrap(), 0.0);
        let a = main_term(CountKind::Nonequivariant, &g, &p, 1.0).unwrap();
        assert!((a - 1.0 / (6.0 * PI * PI)).abs() < 1e-16);
        let b = main_term(CountKind::Equivariant, &g, &p, 1.0).unwrap();
        assert!((b - 1.0 / (4.0 * PI)).abs() < 1e-16);
        let c = count_prediction(CountKind::Nonequivariant, &g, &off, 10.0).unwrap();
        assert!((c - 1000.0 / (6.0 * PI * PI)).abs() < 1e-12);
        let e = count_prediction(CountKind::Equivariant, &g, &p, 10.0).unwrap();
        assert!((e - 100.0 / (4.0 * PI)).abs() < 1e-12);
        assert!(main_term(CountKind::Equivariant, &g, &p, 0.0).is_err());
        assert!(main_term(CountKind::Equivariant, &g, &MainTermParams { vol: -1.0, ..p }, 1.0).is_err());
    }

    #[test]
    fn exponents() {
        let g2 = GroupDims::adjoint(2).unwrap();
        let g3 = GroupDims::adjoint(3).unwrap();
        assert_eq!(remainder_exponent(CountKind::Nonequivariant, &g2, 0.0).unwrap(), 2.0);
        assert_eq!(remainder_exponent_exact(CountKind::Equivariant, &g2), Rational::new(5, 3));
        assert_eq!(remainder_exponent_exact(CountKind::Equivariant, &g3), Rational::new(13, 3));
        assert!(remainder_exponent(CountKind::Equivariant, &g2, -0.1).is_err());
    }

    #[test]
    fn budget_for_pgl2_in_sl3() {
        let b = constant_budget(&GroupDims::new(2, 3).unwrap()).unwrap();
        assert_eq!((b.c3, b.c5, b.c6, b.c_bound), (12, 13.0, 11, 15));
    }

    #[test]
    fn adjoint_budget_sits_below_n4() {
        for n in 2..=6 {
            let g = GroupDims::adjoint(n).unwrap();
            g.check_equivariant().unwrap();
            let b = constant_budget(&g).unwrap();
            assert!(b.c5 < b.c_bound as f64 && b.c6 < b.c_bound);
            assert!(prime_exponent_bound(&g, 1).unwrap() < prime_exponent_adjoint(n, 1));
        }
        assert!(GroupDims::new(3, 4).unwrap().check_equivariant().is_err());
    }
}
