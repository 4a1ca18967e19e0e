use super::laurent::SymLaurent;
use super::surd::Surd;
use crate::error::Result;
use crate::padic_hecke::{HeckeAlgebra, HeckeElement};

/// Half the sum of the positive roots of `GL(n)`, stored doubled so it stays
/// integral: `(n-1, n-3, ..., -(n-1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RhoShift {
    n: usize,
}

impl RhoShift {
    pub fn new(n: usize) -> Self {
        RhoShift { n }
    }

    pub fn doubled(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.n as i64 - 1 - 2 * i as i64).collect()
    }

    /// `2 <rho, b>`.
    pub fn doubled_pairing(&self, b: &[u32]) -> i64 {
        self.doubled().iter().zip(b).map(|(r, &x)| r * i64::from(x)).sum()
    }
}

/// Satake transform computed inside an existing algebra (reusing its caches).
///
/// Each coset `gK` with `g` upper triangular of diagonal `p^b` contributes
/// `p^{-<rho, b>} u^b`.
pub fn satake_transform_in(alg: &HeckeAlgebra, f: &HeckeElement) -> Result<SymLaurent> {
    let n = f.rank();
    let p = f.prime();
    let rho = RhoShift::new(n);
    let mut out = SymLaurent::zero(n, p);
    for (omega, coeff) in f.terms() {
        let profile = alg.profile(omega)?;
        let monomials = profile.iter().map(|(b, count)| {
            let weight = Surd::half_power(p, -rho.doubled_pairing(b)).scale(crate::Rational::from_integer(*count as i128));
            (b.iter().map(|&x| i64::from(x)).collect::<Vec<_>>(), weight)
        });
        let image = SymLaurent::from_monomials(n, p, monomials)?;
        out = out.add(&image.scale(Surd::new(*coeff, crate::Rational::from_integer(0))))?;
    }
    Ok(out)
}

pub fn satake_transform(f: &HeckeElement) -> Result<SymLaurent> {
    let alg = HeckeAlgebra::new(f.rank(), f.prime())?;
    satake_transform_in(&alg, f)
}
