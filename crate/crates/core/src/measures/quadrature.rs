use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::torus::MeasureSpec;
use crate::error::{Error, Result};
use crate::satake::SymLaurent;

/// Points per axis of the tensor trapezoidal rule.
pub const DEFAULT_GRID: usize = 256;
/// Allowed disagreement between the grid and its half-resolution subgrid.
pub const REFINEMENT_TOL: f64 = 1e-8;
/// Largest rank handled by the tensor grid; above it Monte Carlo is used.
pub const MAX_GRID_RANK: usize = 3;
pub const DEFAULT_MC_SAMPLES: usize = 400_000;
pub const DEFAULT_MC_SEED: u64 = 0x5eed_0f70_5a3e;

/// Quadrature settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub grid: usize,
    pub tolerance: f64,
    pub mc_samples: usize,
    pub mc_seed: u64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            grid: DEFAULT_GRID,
            tolerance: REFINEMENT_TOL,
            mc_samples: DEFAULT_MC_SAMPLES,
            mc_seed: DEFAULT_MC_SEED,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Grid,
    MonteCarlo,
}

/// Nodes of the sum-zero chart with raw density values.
///
/// For the grid, `coarse` marks the nodes of the half-resolution subgrid,
/// which gives the refinement check for free.
pub struct TorusRule {
    n: usize,
    method: Method,
    nodes: Vec<Vec<f64>>,
    raw: Vec<f64>,
    coarse: Vec<bool>,
    /// Mass of the raw density on the full torus chart.
    integral: f64,
    raw_sum: f64,
    coarse_raw_sum: f64,
    /// Standard error of `integral` (Monte Carlo only).
    integral_stderr: Option<f64>,
    tolerance: f64,
}

fn chart_axes(n: usize) -> usize {
    n - 1
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit seed from `seed` and `salt`.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    splitmix(splitmix(seed) ^ splitmix(salt.wrapping_add(0x632b_e59b_d9b4_e019)))
}

fn full_angles(free: &[f64]) -> Vec<f64> {
    let mut a = free.to_vec();
    a.push(-free.iter().sum::<f64>());
    a
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn sum(values: impl Iterator<Item = f64>) -> f64 {
    // Neumaier summation, sequential so results do not depend on threads.
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

fn sum_complex(values: impl Iterator<Item = Complex64>) -> Complex64 {
    let v: Vec<Complex64> = values.collect();
    Complex64::new(sum(v.iter().map(|z| z.re)), sum(v.iter().map(|z| z.im)))
}

impl TorusRule {
    /// Tensor trapezoidal grid with `grid` points per chart axis.
    pub fn grid(spec: &MeasureSpec, grid: usize, tolerance: f64) -> Result<Self> {
        if spec.n > MAX_GRID_RANK {
            return Err(Error::invalid(format!("tensor grid supports rank <= {MAX_GRID_RANK}")));
        }
        if grid < 4 || !grid.is_multiple_of(2) {
            return Err(Error::invalid("grid size must be even and at least 4"));
        }
        let axes = chart_axes(spec.n);
        let total = grid.pow(axes as u32);
        let step = TAU / grid as f64;
        let mut nodes = Vec::with_capacity(total);
        let mut coarse = Vec::with_capacity(total);
        let mut idx = vec![0usize; axes];
        for _ in 0..total {
            let free: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
            nodes.push(full_angles(&free));
            coarse.push(idx.iter().all(|i| i % 2 == 0));
            for d in (0..axes).rev() {
                idx[d] += 1;
                if idx[d] < grid {
                    break;
                }
                idx[d] = 0;
            }
        }
        let kind = spec.kind;
        let raw: Vec<f64> = nodes.par_iter().map(|a| kind.raw_density(a)).collect();
        let cell = step.powi(axes as i32);
        let raw_sum = sum(raw.iter().copied());
        let coarse_raw_sum = sum(raw.iter().zip(&coarse).filter(|(_, &c)| c).map(|(r, _)| *r));
        let integral = cell * raw_sum;
        let coarse_integral = cell * 2f64.powi(axes as i32) * coarse_raw_sum;
        let rule = TorusRule {
            n: spec.n,
            method: Method::Grid,
            nodes,
            raw,
            coarse,
            integral,
            raw_sum,
            coarse_raw_sum,
            integral_stderr: None,
            tolerance,
        };
        if (integral - coarse_integral).abs() > tolerance * integral.abs() {
            return Err(Error::Quadrature(format!(
                "mass {integral} vs {coarse_integral} on the half grid"
            )));
        }
        Ok(rule)
    }

    /// Uniform Monte Carlo nodes, one counter-based stream per node.
    pub fn monte_carlo(spec: &MeasureSpec, samples: usize, seed: u64) -> Result<Self> {
        if samples < 2 {
            return Err(Error::invalid("Monte Carlo needs at least two samples"));
        }
        let axes = chart_axes(spec.n);
        let key = mix_seed(seed, spec.n as u64);
        let nodes: Vec<Vec<f64>> = (0..samples as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(key);
                rng.set_stream(i);
                let free: Vec<f64> = (0..axes).map(|_| TAU * rng.random::<f64>()).collect();
                full_angles(&free)
            })
            .collect();
        let kind = spec.kind;
        let raw: Vec<f64> = nodes.par_iter().map(|a| kind.raw_density(a)).collect();
        let vol = TAU.powi(axes as i32);
        let raw_sum = sum(raw.iter().copied());
        let mean = raw_sum / samples as f64;
        let var = sum(raw.iter().map(|r| (r - mean) * (r - mean))) / (samples as f64 - 1.0);
        let integral = vol * mean;
        Ok(TorusRule {
            n: spec.n,
            method: Method::MonteCarlo,
            coarse: vec![false; nodes.len()],
            nodes,
            raw,
            integral,
            raw_sum,
            coarse_raw_sum: raw_sum,
            integral_stderr: Some(vol * (var / samples as f64).sqrt()),
            tolerance: f64::INFINITY,
        })
    }

    /// Grid for ranks up to [`MAX_GRID_RANK`], Monte Carlo above.
    pub fn for_spec(spec: &MeasureSpec, q: &Quadrature) -> Result<Self> {
        if spec.n <= MAX_GRID_RANK {
            Self::grid(spec, q.grid, q.tolerance)
        } else {
            Self::monte_carlo(spec, q.mc_samples, q.mc_seed)
        }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Normalizing constant `c` with `c / n! * integral = 1`.
    pub fn normalization(&self) -> f64 {
        factorial(self.n) / self.integral
    }

    pub fn normalization_stderr(&self) -> Option<f64> {
        self.integral_stderr.map(|s| self.normalization() * s / self.integral)
    }

    /// Mass of the measure with constant `c` under this rule.
    pub fn mass(&self, c: f64) -> f64 {
        c / factorial(self.n) * self.integral
    }

    /// `integral f dm` for the probability measure of this rule.
    pub fn expectation(&self, f: impl Fn(&[f64]) -> Complex64 + Sync) -> Result<Complex64> {
        let values: Vec<Complex64> = self
            .nodes
            .par_iter()
            .zip(self.raw.par_iter())
            .map(|(a, &r)| if r == 0.0 { Complex64::new(0.0, 0.0) } else { f(a) * r })
            .collect();
        let fine = sum_complex(values.iter().copied()) / self.raw_sum;
        if self.method == Method::Grid {
            let coarse = sum_complex(values.iter().zip(&self.coarse).filter(|(_, &c)| c).map(|(v, _)| *v))
                / self.coarse_raw_sum;
            if (fine - coarse).norm() > self.tolerance * fine.norm().max(1.0) {
                return Err(Error::Quadrature(format!(
                    "pairing {fine} vs {coarse} on the half grid"
                )));
            }
        }
        Ok(fine)
    }

    /// `integral f dm` for a symmetric Laurent polynomial.
    pub fn pair(&self, f: &SymLaurent) -> Result<Complex64> {
        if f.rank() != self.n {
            return Err(Error::invalid("test function has wrong rank"));
        }
        let ev = f.torus_evaluator();
        self.expectation(|a| ev.eval(a))
    }

    /// Monte Carlo standard error of [`Self::pair`], `None` for the grid.
    pub fn pair_stderr(&self, f: &SymLaurent) -> Option<f64> {
        self.integral_stderr?;
        let ev = f.torus_evaluator();
        let m = self.raw.len() as f64;
        let mean_r = self.raw_sum / m;
        let vals: Vec<Complex64> = self.nodes.iter().map(|a| ev.eval(a)).collect();
        let est = sum_complex(vals.iter().zip(&self.raw).map(|(v, r)| v * *r)) / (m * mean_r);
        // Delta method for the ratio estimator.
        let var = sum(vals.iter().zip(&self.raw).map(|(v, r)| ((v - est) * *r).norm_sqr())) / (m - 1.0);
        Some((var / m).sqrt() / mean_r)
    }
}

/// Fills in the normalizing constant so the total mass is one.
pub fn normalize(spec: &MeasureSpec) -> Result<MeasureSpec> {
    normalize_with(spec, &Quadrature::default())
}

pub fn normalize_with(spec: &MeasureSpec, q: &Quadrature) -> Result<MeasureSpec> {
    let rule = TorusRule::for_spec(spec, q)?;
    let mut out = spec.clone();
    out.normalization = Some(rule.normalization());
    out.normalization_stderr = rule.normalization_stderr();
    Ok(out)
}

/// Total mass of a normalized measure on an independent grid.
pub fn total_mass(spec: &MeasureSpec, grid: usize) -> Result<f64> {
    let c = spec.normalization.ok_or_else(|| Error::invalid("measure is not normalized"))?;
    Ok(TorusRule::grid(spec, grid, REFINEMENT_TOL)?.mass(c))
}

/// `integral f dm` over the normalized measure.
pub fn pair(spec: &MeasureSpec, f: &SymLaurent) -> Result<Complex64> {
    pair_with(spec, f, &Quadrature::default())
}

pub fn pair_with(spec: &MeasureSpec, f: &SymLaurent, q: &Quadrature) -> Result<Complex64> {
    if spec.normalization.is_none() {
        return Err(Error::invalid("measure is not normalized"));
    }
    TorusRule::for_spec(spec, q)?.pair(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic_hecke::{Cocharacter, HeckeElement};
    use crate::satake::satake_transform;

    fn e1(n: usize) -> SymLaurent {
        SymLaurent::elementary(n, 2, 1).unwrap()
    }

    fn abs2(f: &SymLaurent) -> impl Fn(&[f64]) -> Complex64 + Sync {
        let ev = f.torus_evaluator();
        move |a: &[f64]| Complex64::new(ev.eval(a).norm_sqr(), 0.0)
    }

    #[test]
    fn sato_tate_constants() {
        // Weyl integration: the raw density has mass n! (2 pi)^{n-1}.
        for n in [2, 3] {
            let spec = normalize(&MeasureSpec::sato_tate(n).unwrap()).unwrap();
            let expected = 1.0 / TAU.powi(n as i32 - 1);
            assert!((spec.normalization.unwrap() / expected - 1.0).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn sato_tate_second_moments() {
        for n in [2, 3] {
            let spec = MeasureSpec::sato_tate(n).unwrap();
            let rule = TorusRule::grid(&spec, DEFAULT_GRID, REFINEMENT_TOL).unwrap();
            let m = rule.expectation(abs2(&e1(n))).unwrap();
            assert!((m.re - 1.0).abs() < 1e-12 && m.im.abs() < 1e-12, "n={n}: {m}");
            let odd = rule.pair(&e1(n)).unwrap();
            assert!(odd.norm() < 1e-12);
        }
    }

    #[test]
    fn plancherel_pairing_examples() {
        let spec = normalize(&MeasureSpec::plancherel(2, 3).unwrap()).unwrap();
        let one = pair(&spec, &SymLaurent::one(2, 3)).unwrap();
        assert!((one - 1.0).norm() < 1e-12);
        let t = HeckeElement::basis(&Cocharacter::new(vec![1, 0]).unwrap(), 3);
        let v = pair(&spec, &satake_transform(&t).unwrap()).unwrap();
        assert!(v.norm() < 1e-6);
        assert!((total_mass(&spec, 200).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn kesten_mckay_moment() {
        // For n = 2 the Plancherel measure gives chi_{2m} mass p^{-m}.
        let spec = MeasureSpec::plancherel(2, 5).unwrap();
        let rule = TorusRule::grid(&spec, DEFAULT_GRID, REFINEMENT_TOL).unwrap();
        for m in 1..=2 {
            let chi = SymLaurent::schur(2, 5, &[2 * m, 0]).unwrap();
            let v = rule.pair(&chi).unwrap();
            assert!((v.re - 5f64.powi(-(m as i32))).abs() < 1e-12, "m={m}: {v}");
        }
    }

    #[test]
    fn unnormalized_pairing_is_rejected() {
        let spec = MeasureSpec::sato_tate(2).unwrap();
        assert!(pair(&spec, &e1(2)).is_err());
        assert!(TorusRule::grid(&spec, 7, 1e-8).is_err());
    }

    #[test]
    fn monte_carlo_for_rank_four() {
        let q = Quadrature { mc_samples: 100_000, ..Quadrature::default() };
        let spec = normalize_with(&MeasureSpec::sato_tate(4).unwrap(), &q).unwrap();
        let c = spec.normalization.unwrap();
        let se = spec.normalization_stderr.unwrap();
        let exact = 1.0 / TAU.powi(3);
        assert!((c - exact).abs() < 5.0 * se, "{c} vs {exact} +- {se}");
        let rule = TorusRule::monte_carlo(&spec, 100_000, 1).unwrap();
        let f = e1(4);
        let v = rule.pair(&f).unwrap();
        let s = rule.pair_stderr(&f).unwrap();
        assert!(v.norm() < 5.0 * s, "{v} +- {s}");
    }

    #[test]
    fn seeds_mix() {
        assert_ne!(mix_seed(1, 2), mix_seed(2, 1));
        assert_eq!(mix_seed(7, 9), mix_seed(7, 9));
    }
}
