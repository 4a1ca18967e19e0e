use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::satake::SatakeParameter;

/// Point of the compact torus `theta_1 + ... + theta_n = 0 (mod 2 pi)`,
/// with angles reduced to `[0, 2 pi)` and sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    angles: Vec<f64>,
}

fn reduce(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl TorusPoint {
    /// From all `n` angles; their sum must vanish modulo `2 pi`.
    pub fn new(angles: &[f64]) -> Result<Self> {
        if angles.len() < 2 {
            return Err(Error::invalid("torus point needs rank >= 2"));
        }
        let s: f64 = angles.iter().sum();
        let off = (s / TAU).round() * TAU - s;
        if off.abs() > 1e-12 * (1.0 + s.abs()) {
            return Err(Error::invalid(format!("angles sum to {s}, not a multiple of 2 pi")));
        }
        let mut a: Vec<f64> = angles.iter().map(|&t| reduce(t)).collect();
        a.sort_by(f64::total_cmp);
        Ok(TorusPoint { angles: a })
    }

    /// From the chart coordinates `theta_1..theta_{n-1}`, with
    /// `theta_n = -sum`.
    pub fn from_chart(free: &[f64]) -> Self {
        let mut a: Vec<f64> = free.to_vec();
        a.push(-free.iter().sum::<f64>());
        let mut a: Vec<f64> = a.into_iter().map(reduce).collect();
        a.sort_by(f64::total_cmp);
        TorusPoint { angles: a }
    }

    pub fn rank(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn to_parameter(&self) -> SatakeParameter {
        SatakeParameter::from_angles(&self.angles).expect("torus points have product one")
    }
}

/// Which measure on the torus modulo the symmetric group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureKind {
    Plancherel { p: u64 },
    SatoTate,
}

impl MeasureKind {
    pub fn label(&self) -> &'static str {
        match self {
            MeasureKind::Plancherel { .. } => "plancherel",
            MeasureKind::SatoTate => "sato_tate",
        }
    }

    pub fn prime(&self) -> Option<u64> {
        match self {
            MeasureKind::Plancherel { p } => Some(*p),
            MeasureKind::SatoTate => None,
        }
    }

    /// Unnormalized density in the chart `d theta_1 ... d theta_{n-1}`:
    /// `prod_{k<j} |e^{i t_k} - e^{i t_j}|^2`, divided for Plancherel by
    /// `prod_{k<j} |p^{-1} e^{i t_k} - e^{i t_j}|^2`.
    pub fn raw_density(&self, angles: &[f64]) -> f64 {
        let u: Vec<Complex64> = angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let q = match self {
            MeasureKind::Plancherel { p } => Some(1.0 / *p as f64),
            MeasureKind::SatoTate => None,
        };
        let mut acc = 1.0;
        for k in 0..u.len() {
            for j in k + 1..u.len() {
                let num = (u[k] - u[j]).norm_sqr();
                acc *= match q {
                    Some(q) => num / (u[k] * q - u[j]).norm_sqr(),
                    None => num,
                };
            }
        }
        acc
    }
}

/// A measure kind together with its normalizing constant once known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    pub n: usize,
    /// `c_p` or `c_infinity`, filled by normalization.
    pub normalization: Option<f64>,
    /// Standard error of the constant when it came from Monte Carlo.
    pub normalization_stderr: Option<f64>,
}

impl MeasureSpec {
    pub fn new(kind: MeasureKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("rank must be at least 2"));
        }
        if let MeasureKind::Plancherel { p } = kind {
            if p < 2 {
                return Err(Error::invalid("Plancherel measure needs p >= 2"));
            }
        }
        Ok(MeasureSpec { kind, n, normalization: None, normalization_stderr: None })
    }

    pub fn plancherel(n: usize, p: u64) -> Result<Self> {
        Self::new(MeasureKind::Plancherel { p }, n)
    }

    pub fn sato_tate(n: usize) -> Result<Self> {
        Self::new(MeasureKind::SatoTate, n)
    }

    pub fn raw_density(&self, x: &TorusPoint) -> f64 {
        self.kind.raw_density(x.angles())
    }

    /// Normalized density; errors until [`super::normalize`] has run.
    pub fn density(&self, x: &TorusPoint) -> Result<f64> {
        let c = self
            .normalization
            .ok_or_else(|| Error::invalid("measure is not normalized; use raw_density"))?;
        Ok(c * self.raw_density(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sato_tate_values() {
        let st = MeasureSpec::sato_tate(2).unwrap();
        assert_eq!(st.raw_density(&TorusPoint::new(&[0.0, 0.0]).unwrap()), 0.0);
        let x = TorusPoint::new(&[PI / 2.0, -PI / 2.0]).unwrap();
        assert!((st.raw_density(&x) - 4.0).abs() < 1e-14);
        assert!(st.density(&x).is_err());
    }

    #[test]
    fn plancherel_tends_to_sato_tate() {
        let x = TorusPoint::from_chart(&[0.7, 2.1]);
        let st = MeasureKind::SatoTate.raw_density(x.angles());
        for (p, tol) in [(1_000u64, 1e-2), (1_000_000, 1e-5)] {
            let pl = MeasureKind::Plancherel { p }.raw_density(x.angles());
            assert!((pl / st - 1.0).abs() < tol, "p={p}");
        }
    }

    #[test]
    fn permutation_invariance() {
        let angles = [0.4, 1.3, -1.7];
        let kinds = [MeasureKind::SatoTate, MeasureKind::Plancherel { p: 2 }];
        for kind in kinds {
            let base = kind.raw_density(&angles);
            for perm in [[1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0]] {
                let a: Vec<f64> = perm.iter().map(|&i| angles[i]).collect();
                assert!((kind.raw_density(&a) - base).abs() < 1e-12 * base.max(1.0));
            }
        }
    }

    #[test]
    fn chart_closes_the_sum() {
        let x = TorusPoint::from_chart(&[0.5, 4.0, 6.0]);
        assert_eq!(x.rank(), 4);
        let s: f64 = x.angles().iter().sum();
        assert!(((s / TAU).round() * TAU - s).abs() < 1e-12);
        assert!(TorusPoint::new(&[0.1, 0.2]).is_err());
        assert!(MeasureSpec::plancherel(2, 1).is_err());
    }
}
