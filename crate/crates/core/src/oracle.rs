//! Slow reference computations used as independent checks of the fast
//! paths: sublattice counting by exhaustive search with exact integer
//! determinantal divisors, Gaussian binomials by the q-Pascal recursion, and
//! elementary symmetric functions by subset sums.

use num_complex::Complex64;

use crate::padic_hecke::Cocharacter;

fn valuation(mut x: i64, p: i64) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn det(m: &[i64], rows: &[usize], cols: &[usize], n: usize) -> i64 {
    let a = |i: usize, j: usize| m[rows[i] * n + cols[j]];
    match rows.len() {
        0 => 1,
        1 => a(0, 0),
        2 => a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0),
        3 => {
            a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
        }
        _ => {
            let mut acc = 0;
            for (k, &c) in cols.iter().enumerate() {
                let a = m[rows[0] * n + c];
                if a == 0 {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let minor = det(m, &rows[1..], &rest, n);
                acc += if k % 2 == 0 { a * minor } else { -a * minor };
            }
            acc
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Elementary-divisor exponents of an integer matrix at `p`, ascending,
/// from `v_k = min v_p(k x k minor)`.
pub fn elementary_divisor_exponents(m: &[i64], n: usize, p: u64) -> Vec<u32> {
    let subs: Vec<Vec<Vec<usize>>> = (1..=n).map(|k| subsets(n, k)).collect();
    exponents_with(m, n, p, &subs)
}

fn exponents_with(m: &[i64], n: usize, p: u64, subs: &[Vec<Vec<usize>>]) -> Vec<u32> {
    let p = p as i64;
    let mut prev = 0u32;
    let mut out = Vec::with_capacity(n);
    for idx in subs {
        let mut vk = u32::MAX;
        for r in idx {
            for c in idx {
                vk = vk.min(valuation(det(m, r, c, n), p));
            }
        }
        out.push(vk - prev);
        prev = vk;
    }
    out
}

/// Reduced cocharacter of `omega^{-1}`; both index double cosets of the
/// same degree.
pub fn dual(omega: &Cocharacter) -> Cocharacter {
    let a = omega.parts();
    let top = a[0];
    Cocharacter::new(a.iter().rev().map(|x| top - x).collect::<Vec<_>>()).expect("same rank")
}

/// Number of lattices `L` with `p^{a_1} Z_p^n <= L <= Z_p^n` and
/// `Z_p^n / L` of type `omega`, by exhaustive search over lower-triangular
/// column Hermite forms. Works on whichever of `omega` and its dual is
/// smaller.
pub fn sublattice_count(omega: &Cocharacter, p: u64) -> u64 {
    let d = dual(omega);
    let w = if d.size() < omega.size() { d } else { omega.clone() };
    let n = w.rank();
    let top = w.largest();
    let mut target: Vec<u32> = w.parts().iter().map(|&x| x as u32).collect();
    target.sort_unstable();
    let bound = (1..=n as u32).map(u128::from).product::<u128>() * u128::from(p).pow(top * n as u32);
    assert!(bound < 1 << 62, "minors of omega={w} at p={p} overflow 64 bits");
    let subs: Vec<Vec<Vec<usize>>> = (1..=n).map(|k| subsets(n, k)).collect();
    let mut count = 0u64;
    let mut diag = vec![0u32; n];
    fn diagonals(i: usize, left: u32, top: u32, diag: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if i + 1 == diag.len() {
            if left <= top {
                diag[i] = left;
                f(diag);
            }
            return;
        }
        for v in 0..=left.min(top) {
            diag[i] = v;
            diagonals(i + 1, left - v, top, diag, f);
        }
    }
    diagonals(0, w.size(), top, &mut diag, &mut |c: &[u32]| {
        // Free entries (i, j) with j < i range over [0, p^{c_i}).
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        let mods: Vec<i64> = slots.iter().map(|&(i, _)| (p as i64).pow(c[i])).collect();
        let mut m = vec![0i64; n * n];
        for i in 0..n {
            m[i * n + i] = (p as i64).pow(c[i]);
        }
        let mut digits = vec![0i64; slots.len()];
        loop {
            for (s, &(i, j)) in slots.iter().enumerate() {
                m[i * n + j] = digits[s];
            }
            if exponents_with(&m, n, p, &subs) == target {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == digits.len() {
                    return;
                }
                digits[k] += 1;
                if digits[k] < mods[k] {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
        }
    });
    count
}

/// `[n choose t]_p` from `[n, t] = [n-1, t-1] + p^t [n-1, t]`.
pub fn gaussian_binomial(n: u32, t: u32, p: u64) -> u128 {
    if t > n {
        return 0;
    }
    if t == 0 || t == n {
        return 1;
    }
    gaussian_binomial(n - 1, t - 1, p) + (p as u128).pow(t) * gaussian_binomial(n - 1, t, p)
}

/// `e_t(u)` as a sum over `t`-subsets.
pub fn elementary_symmetric(u: &[Complex64], t: usize) -> Complex64 {
    subsets(u.len(), t)
        .iter()
        .map(|s| s.iter().map(|&i| u[i]).product::<Complex64>())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisors_of_small_matrices() {
        // diag(1, p) and [[p, 1], [0, p]] have types (0, 1) and (0, 2).
        assert_eq!(elementary_divisor_exponents(&[1, 0, 0, 3], 2, 3), vec![0, 1]);
        assert_eq!(elementary_divisor_exponents(&[3, 1, 0, 3], 2, 3), vec![0, 2]);
        assert_eq!(elementary_divisor_exponents(&[3, 0, 0, 3], 2, 3), vec![1, 1]);
    }

    #[test]
    fn counts_for_pgl2() {
        let c = |a: Vec<i64>, p| sublattice_count(&Cocharacter::new(a).unwrap(), p);
        assert_eq!(c(vec![1, 0], 3), 4);
        // Cyclic index-p^2 sublattices: p^2 + p.
        assert_eq!(c(vec![2, 0], 3), 12);
        assert_eq!(gaussian_binomial(3, 1, 2), 7);
        assert_eq!(gaussian_binomial(4, 2, 3), 130);
    }

    #[test]
    fn dual_shape() {
        assert_eq!(dual(&Cocharacter::new(vec![4, 4, 0]).unwrap()).parts(), &[4, 0, 0]);
    }
}
