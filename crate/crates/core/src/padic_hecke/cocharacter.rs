use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dominant cocharacter of the diagonal torus of `PGL(n)`.
///
/// Stored as a weakly decreasing integer vector whose last entry is zero.
/// PGL identifies `(a_i)` with `(a_i + c)`, so every vector has exactly one
/// such representative; asking for `(a_i)` in any order (or shifted) yields
/// the same value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Cocharacter {
    parts: Vec<i64>,
}

impl Cocharacter {
    /// Canonicalize an arbitrary integer vector: sort descending, shift so
    /// the minimum is zero.
    pub fn new(parts: impl Into<Vec<i64>>) -> Result<Self> {
        let mut parts = parts.into();
        if parts.len() < 2 {
            return Err(Error::invalid(format!(
                "cocharacter needs rank n >= 2, got {} parts",
                parts.len()
            )));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let min = *parts.last().unwrap();
        for a in &mut parts {
            *a -= min;
        }
        Ok(Cocharacter { parts })
    }

    pub fn zero(n: usize) -> Self {
        assert!(n >= 2, "rank must be at least 2");
        Cocharacter { parts: vec![0; n] }
    }

    /// `gamma_t = diag(p, .., p, 1, .., 1)` with `t` copies of `p`.
    pub fn minuscule(n: usize, t: usize) -> Result<Self> {
        if t > n {
            return Err(Error::invalid(format!("minuscule index {t} exceeds rank {n}")));
        }
        let parts: Vec<i64> = (0..n).map(|i| i64::from(i < t)).collect();
        Cocharacter::new(parts)
    }

    pub fn rank(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[i64] {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts[0] == 0
    }

    /// Determinant valuation of the lifted GL representative.
    pub fn size(&self) -> u32 {
        self.parts.iter().sum::<i64>() as u32
    }

    pub fn largest(&self) -> u32 {
        self.parts[0] as u32
    }

    /// Height of the double coset: `min_c max_i |a_i + c|`.
    ///
    /// With `a_n = 0` the optimal shift sits at the midpoint of the range, so
    /// the value is `ceil(a_1 / 2)`.
    pub fn height(&self) -> u32 {
        ((self.parts[0] + 1) / 2) as u32
    }

    /// Componentwise sum followed by canonicalization.
    pub fn add(&self, other: &Cocharacter) -> Result<Cocharacter> {
        if self.rank() != other.rank() {
            return Err(Error::invalid("rank mismatch in cocharacter sum"));
        }
        let v: Vec<i64> = self.parts.iter().zip(&other.parts).map(|(a, b)| a + b).collect();
        Cocharacter::new(v)
    }

    /// All dominant cocharacters of rank `n` with height at most `kappa`,
    /// in lexicographic order of their parts.
    pub fn all_up_to_height(n: usize, kappa: u32) -> Vec<Cocharacter> {
        let max = i64::from(2 * kappa);
        let mut out = Vec::new();
        let mut current = vec![0i64; n];
        fn rec(i: usize, upper: i64, cur: &mut Vec<i64>, out: &mut Vec<Cocharacter>) {
            let n = cur.len();
            if i == n - 1 {
                cur[i] = 0;
                out.push(Cocharacter { parts: cur.clone() });
                return;
            }
            for a in 0..=upper {
                cur[i] = a;
                rec(i + 1, a, cur, out);
            }
        }
        rec(0, max, &mut current, &mut out);
        out.sort();
        out
    }

    /// Parse a comma-separated list such as `"2,1,0"`.
    pub fn parse(text: &str) -> Result<Cocharacter> {
        let parts = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::invalid(format!("bad cocharacter entry {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Cocharacter::new(parts)
    }
}

impl TryFrom<Vec<i64>> for Cocharacter {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        Cocharacter::new(v)
    }
}

impl From<Cocharacter> for Vec<i64> {
    fn from(c: Cocharacter) -> Vec<i64> {
        c.parts
    }
}

impl fmt::Debug for Cocharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cocharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_height(parts: &[i64]) -> i64 {
        (-20..=20)
            .map(|c| parts.iter().map(|a| (a + c).abs()).max().unwrap())
            .min()
            .unwrap()
    }

    #[test]
    fn canonical_form() {
        let w = Cocharacter::new(vec![1, 3, 2]).unwrap();
        assert_eq!(w.parts(), &[2, 1, 0]);
        let shifted = Cocharacter::new(vec![5, 5]).unwrap();
        assert!(shifted.is_zero());
        assert!(Cocharacter::new(vec![1]).is_err());
    }

    #[test]
    fn height_examples() {
        assert_eq!(Cocharacter::zero(2).height(), 0);
        assert_eq!(Cocharacter::new(vec![1, 0]).unwrap().height(), 1);
        assert_eq!(Cocharacter::new(vec![2, 1, 0]).unwrap().height(), 1);
    }

    #[test]
    fn height_matches_shift_minimum() {
        for n in 2..=4 {
            for w in Cocharacter::all_up_to_height(n, 3) {
                assert_eq!(i64::from(w.height()), brute_height(w.parts()), "{w}");
            }
        }
    }

    #[test]
    fn height_shift_invariant() {
        let a = Cocharacter::new(vec![7, 4, 3]).unwrap();
        let b = Cocharacter::new(vec![4, 1, 0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.height(), 2);
    }

    #[test]
    fn basis_listing() {
        let basis = Cocharacter::all_up_to_height(3, 1);
        let parts: Vec<Vec<i64>> = basis.iter().map(|w| w.parts().to_vec()).collect();
        assert_eq!(
            parts,
            vec![
                vec![0, 0, 0],
                vec![1, 0, 0],
                vec![1, 1, 0],
                vec![2, 0, 0],
                vec![2, 1, 0],
                vec![2, 2, 0]
            ]
        );
        assert_eq!(Cocharacter::all_up_to_height(2, 2).len(), 5);
        assert_eq!(Cocharacter::all_up_to_height(3, 2).len(), 15);
    }

    #[test]
    fn minuscule_vectors() {
        assert_eq!(Cocharacter::minuscule(3, 2).unwrap().parts(), &[1, 1, 0]);
        assert!(Cocharacter::minuscule(3, 3).unwrap().is_zero());
    }
}
