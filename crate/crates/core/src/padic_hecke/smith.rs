//! Elementary-divisor exponents of square integer matrices over `Z_p`.
//!
//! All work happens in `Z / p^prec`. When the determinant has valuation
//! `D < prec` every elementary divisor exponent is at most `D`, so the
//! truncated computation is exact.

/// `p^e`, or `None` when it would not fit comfortably in an `i64`
/// (products of two residues are formed in `i128`).
pub fn checked_pow(p: u64, e: u32) -> Option<i64> {
    let mut acc: i64 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(p as i64)?;
        if acc > (1i64 << 62) {
            return None;
        }
    }
    Some(acc)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// p-adic valuation of a residue in `[0, modulus)`; zero maps to `prec`.
#[inline]
fn valuation(mut x: i64, p: i64, prec: u32) -> u32 {
    if x == 0 {
        return prec;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn inverse_mod(a: i64, m: i64) -> i64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "not a unit");
    (old_s.rem_euclid(m as i128)) as i64
}

/// Reusable scratch space for repeated Smith computations of one size.
#[derive(Clone, Debug)]
pub struct SmithWorkspace {
    n: usize,
    p: i64,
    prec: u32,
    modulus: i64,
    buf: Vec<i64>,
    exps: Vec<u32>,
}

impl SmithWorkspace {
    /// Panics if `p^prec` does not fit; callers check with [`checked_pow`].
    pub fn new(n: usize, p: u64, prec: u32) -> Self {
        let modulus = checked_pow(p, prec).expect("working precision overflows i64");
        SmithWorkspace {
            n,
            p: p as i64,
            prec,
            modulus,
            buf: vec![0; n * n],
            exps: Vec::with_capacity(n),
        }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Elementary divisor exponents of the leading `k x k` block of the
    /// row-major `n x n` matrix `m`, sorted descending (capped at `prec`).
    pub fn block_exponents(&mut self, m: &[i64], k: usize) -> &[u32] {
        let n = self.n;
        let md = self.modulus;
        for i in 0..k {
            for j in 0..k {
                self.buf[i * k + j] = m[i * n + j].rem_euclid(md);
            }
        }
        self.reduce(k)
    }

    /// Exponents of the full matrix, sorted descending.
    pub fn exponents(&mut self, m: &[i64]) -> &[u32] {
        self.block_exponents(m, self.n)
    }

    fn reduce(&mut self, k: usize) -> &[u32] {
        let (p, prec, md) = (self.p, self.prec, self.modulus);
        let a = &mut self.buf;
        self.exps.clear();
        for step in 0..k {
            let mut best = (prec, step, step);
            'search: for i in step..k {
                for j in step..k {
                    let v = valuation(a[i * k + j], p, prec);
                    if v < best.0 {
                        best = (v, i, j);
                        if v == 0 {
                            break 'search;
                        }
                    }
                }
            }
            let (v, pi, pj) = best;
            if v == prec {
                for _ in step..k {
                    self.exps.push(prec);
                }
                break;
            }
            if pi != step {
                for j in 0..k {
                    a.swap(pi * k + j, step * k + j);
                }
            }
            if pj != step {
                for i in 0..k {
                    a.swap(i * k + pj, i * k + step);
                }
            }
            let pv = checked_pow(p as u64, v).unwrap();
            let unit = a[step * k + step] / pv;
            let unit_inv = inverse_mod(unit.rem_euclid(md), md) as i128;
            for i in step + 1..k {
                let entry = a[i * k + step];
                if entry == 0 {
                    continue;
                }
                let factor = ((entry / pv) as i128 * unit_inv).rem_euclid(md as i128);
                for j in step..k {
                    let r = a[i * k + j] as i128 - factor * a[step * k + j] as i128;
                    a[i * k + j] = r.rem_euclid(md as i128) as i64;
                }
            }
            self.exps.push(v);
        }
        self.exps.sort_unstable_by(|x, y| y.cmp(x));
        &self.exps
    }
}

/// One-shot convenience wrapper around [`SmithWorkspace`].
pub fn smith_exponents(m: &[i64], n: usize, p: u64, prec: u32) -> Vec<u32> {
    SmithWorkspace::new(n, p, prec).exponents(m).to_vec()
}

/// Row-major product of two `n x n` matrices reduced into `[0, modulus)`.
pub fn mat_mul_mod(a: &[i64], b: &[i64], n: usize, modulus: i64, out: &mut [i64]) {
    for i in 0..n {
        for j in 0..n {
            let mut acc: i128 = 0;
            for k in 0..n {
                acc += a[i * n + k] as i128 * b[k * n + j] as i128;
            }
            out[i * n + j] = acc.rem_euclid(modulus as i128) as i64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let m = [9, 0, 0, 0, 1, 0, 0, 0, 3];
        assert_eq!(smith_exponents(&m, 3, 3, 4), vec![2, 1, 0]);
    }

    #[test]
    fn mixes_entries() {
        // [[p, 1], [0, p]] has elementary divisors 1, p^2.
        let m = [3, 1, 0, 3];
        assert_eq!(smith_exponents(&m, 2, 3, 3), vec![2, 0]);
        // [[p, 0], [0, p]] stays (1, 1).
        assert_eq!(smith_exponents(&[3, 0, 0, 3], 2, 3, 3), vec![1, 1]);
    }

    #[test]
    fn leading_block() {
        let m = [4, 2, 1, 0, 4, 3, 0, 0, 1];
        let mut ws = SmithWorkspace::new(3, 2, 6);
        assert_eq!(ws.block_exponents(&m, 2), &[3, 1]);
        assert_eq!(ws.block_exponents(&m, 1), &[2]);
    }

    #[test]
    fn primes_and_powers() {
        assert!(is_prime(2) && is_prime(97) && !is_prime(1) && !is_prime(91));
        assert_eq!(checked_pow(5, 3), Some(125));
        assert_eq!(checked_pow(2, 70), None);
        assert_eq!(inverse_mod(2, 9), 5);
    }
}
