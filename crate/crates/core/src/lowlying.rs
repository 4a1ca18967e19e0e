//! One-level densities of low-lying zeros: the four symmetry-type densities,
//! a Paley-Wiener test function, pairings and empirical sums over zero
//! datasets.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-width of the integration window is `WINDOW_SCALE / beta`.
pub const WINDOW_SCALE: f64 = 2000.0;
/// Allowed gap between the two Gauss rules on the same panels.
pub const QUADRATURE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryType {
    U,
    #[serde(rename = "SO_even")]
    SoEven,
    #[serde(rename = "SO_odd")]
    SoOdd,
    O,
}

impl SymmetryType {
    pub const ALL: [SymmetryType; 4] = [SymmetryType::U, SymmetryType::SoEven, SymmetryType::SoOdd, SymmetryType::O];

    pub fn label(&self) -> &'static str {
        match self {
            SymmetryType::U => "U",
            SymmetryType::SoEven => "SO_even",
            SymmetryType::SoOdd => "SO_odd",
            SymmetryType::O => "O",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown symmetry type {s:?}")))
    }
}

/// `sin(x) / x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Smooth part of a density plus the weight of its atom at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityValue {
    pub smooth: f64,
    pub atom: f64,
}

pub fn density_value(s: SymmetryType, x: f64) -> DensityValue {
    let k = sinc(2.0 * PI * x);
    match s {
        SymmetryType::U => DensityValue { smooth: 1.0, atom: 0.0 },
        SymmetryType::SoEven => DensityValue { smooth: 1.0 + k, atom: 0.0 },
        SymmetryType::SoOdd => DensityValue { smooth: 1.0 - k, atom: 1.0 },
        SymmetryType::O => DensityValue { smooth: 1.0, atom: 0.5 },
    }
}

/// `Phi(x) = (sin(pi beta x) / (pi beta x))^2`, whose Fourier transform
/// `(1/beta) max(0, 1 - |y|/beta)` is supported in `[-beta, beta]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PwTestFunction {
    beta: f64,
}

impl PwTestFunction {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid("support radius must be positive"));
        }
        Ok(PwTestFunction { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Closed forms of the pairings are only valid for `beta < 1`.
    pub fn in_verified_regime(&self) -> bool {
        self.beta < 1.0
    }

    pub fn value(&self, x: f64) -> f64 {
        let s = sinc(PI * self.beta * x);
        s * s
    }

    pub fn fourier(&self, y: f64) -> f64 {
        (1.0 - y.abs() / self.beta).max(0.0) / self.beta
    }
}

fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `pi/2 - Si(x)` for large `x` from the auxiliary-function expansions.
fn si_complement(x: f64) -> f64 {
    debug_assert!(x >= 40.0);
    let x2 = x * x;
    let (mut f, mut g) = (0.0, 0.0);
    let (mut tf, mut tg) = (1.0 / x, 1.0 / x2);
    for k in 0..20 {
        f += tf;
        g += tg;
        let (a, b) = ((2 * k + 1) as f64 * (2 * k + 2) as f64, (2 * k + 2) as f64 * (2 * k + 3) as f64);
        let (nf, ng) = (-tf * a / x2, -tg * b / x2);
        if nf.abs() > tf.abs() {
            break;
        }
        tf = nf;
        tg = ng;
    }
    f * x.cos() + g * x.sin()
}

/// `int_{|x| > t} Phi(x) dx`.
fn phi_tail(phi: &PwTestFunction, t: f64) -> f64 {
    let a = PI * phi.beta;
    let y = a * t;
    2.0 / a * (y.sin().powi(2) / y + si_complement(2.0 * y))
}

/// Even integral over the line from composite Gauss rules on `[0, t]`.
fn integrate_even(f: impl Fn(f64) -> f64 + Sync, t: f64, h: f64) -> Result<f64> {
    let panels = (t / h).ceil() as usize;
    let h = t / panels as f64;
    let fine = gauss_legendre(10);
    let coarse = gauss_legendre(7);
    let parts: Vec<(f64, f64)> = (0..panels)
        .into_par_iter()
        .map(|k| {
            let mid = (k as f64 + 0.5) * h;
            let rule = |r: &[(f64, f64)]| r.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h;
            (rule(&fine), rule(&coarse))
        })
        .collect();
    let a = compensated(parts.iter().map(|p| p.0));
    let b = compensated(parts.iter().map(|p| p.1));
    if (a - b).abs() > QUADRATURE_TOL * a.abs().max(1.0) {
        return Err(Error::Quadrature(format!("Gauss rules disagree: {a} vs {b}")));
    }
    Ok(2.0 * a)
}

fn compensated(values: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + c
}

fn window(phi: &PwTestFunction) -> (f64, f64) {
    (WINDOW_SCALE / phi.beta, 0.25 / phi.beta.max(1.0))
}

/// `int Phi(x) dx` with the tail beyond the window added in closed form.
pub fn integrate_phi(phi: &PwTestFunction) -> Result<f64> {
    let (t, h) = window(phi);
    Ok(integrate_even(|x| phi.value(x), t, h)? + phi_tail(phi, t))
}

/// `int Phi(x) W(x) dx`, atom included.
///
/// The `Phi` tail beyond the window is exact; the tail of
/// `Phi(x) sin(2 pi x) / (2 pi x)` is below `1 / (4 pi^3 (beta T)^2)`.
pub fn pair_density(s: SymmetryType, phi: &PwTestFunction) -> Result<f64> {
    let mass = integrate_phi(phi)?;
    let (t, h) = window(phi);
    let oscillating = || integrate_even(|x| phi.value(x) * sinc(2.0 * PI * x), t, h);
    let atom = density_value(s, 0.0).atom * phi.value(0.0);
    Ok(match s {
        SymmetryType::U => mass,
        SymmetryType::SoEven => mass + oscillating()?,
        SymmetryType::SoOdd => mass - oscillating()? + atom,
        SymmetryType::O => mass + atom,
    })
}

/// Limits predicted for `beta < 1`: `Phi^(0)` for U, `Phi^(0) + Phi(0)/2`
/// otherwise.
pub fn closed_form_pairing(s: SymmetryType, phi: &PwTestFunction) -> Result<f64> {
    if !phi.in_verified_regime() {
        return Err(Error::invalid(format!("beta = {} is outside the range beta < 1", phi.beta)));
    }
    Ok(match s {
        SymmetryType::U => phi.fourier(0.0),
        _ => phi.fourier(0.0) + 0.5 * phi.value(0.0),
    })
}

/// Symmetry type of the family of forms of `K`-type `sigma`.
///
/// For `n = 2` the labels are `trivial`, `det` and `dim2`; every `K`-type
/// gives U from `n = 3` on.
pub fn sigma_to_symmetry(n: usize, sigma: &str) -> Result<SymmetryType> {
    match n {
        0 | 1 => Err(Error::invalid("rank must be at least 2")),
        2 => match sigma {
            "trivial" => Ok(SymmetryType::SoEven),
            "det" => Ok(SymmetryType::SoOdd),
            "dim2" => Ok(SymmetryType::O),
            _ => Err(Error::invalid(format!("unknown K-type label {sigma:?}"))),
        },
        _ => Ok(SymmetryType::U),
    }
}

/// Ordinates of low-lying zeros of a family, pooled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroDataset {
    pub gammas: Vec<f64>,
    /// `n` in the conductor model `log C = n log mu`.
    pub conductor_exponent: f64,
    pub mu: f64,
    pub family_size: usize,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    mu: f64,
    conductor_exponent: f64,
    family_size: usize,
}

impl ZeroDataset {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 1.0) {
            return Err(Error::invalid("mu must exceed 1"));
        }
        if self.family_size < 1 {
            return Err(Error::invalid("family size must be at least 1"));
        }
        if !(self.conductor_exponent > 0.0) {
            return Err(Error::invalid("conductor exponent must be positive"));
        }
        if let Some(g) = self.gammas.iter().find(|g| !g.is_finite()) {
            return Err(Error::invalid(format!("non-finite ordinate {g}")));
        }
        Ok(())
    }

    pub fn log_conductor(&self) -> f64 {
        self.conductor_exponent * self.mu.ln()
    }

    /// Sidecar path next to a CSV of ordinates.
    pub fn sidecar_path(csv: &Path) -> PathBuf {
        csv.with_extension("json")
    }

    /// Reads a single-column CSV (optional header) and its JSON sidecar.
    pub fn read(csv_path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(csv_path)?;
        let mut gammas = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = rec.get(0).unwrap_or("").trim();
            if rec.len() != 1 {
                return Err(Error::Parse { line: i + 1, message: "expected one column".into() });
            }
            match field.parse::<f64>() {
                Ok(v) => gammas.push(v),
                Err(_) if i == 0 => continue,
                Err(_) => return Err(Error::Parse { line: i + 1, message: format!("bad ordinate {field:?}") }),
            }
        }
        let side: Sidecar = serde_json::from_str(&fs::read_to_string(Self::sidecar_path(csv_path))?)?;
        let z = ZeroDataset {
            gammas,
            conductor_exponent: side.conductor_exponent,
            mu: side.mu,
            family_size: side.family_size,
        };
        z.validate()?;
        Ok(z)
    }

    pub fn write(&self, csv_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(csv_path)?;
        w.write_record(["gamma"])?;
        for g in &self.gammas {
            w.write_record([format!("{g:e}")])?;
        }
        w.flush()?;
        let side = Sidecar { mu: self.mu, conductor_exponent: self.conductor_exponent, family_size: self.family_size };
        fs::write(Self::sidecar_path(csv_path), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    /// Uniform zeros with unit density per form after rescaling by
    /// `log C / 2 pi`, on the rescaled window `[-half_width, half_width]`.
    pub fn synthetic_unitary(family_size: usize, mu: f64, conductor_exponent: f64, half_width: f64, seed: u64) -> Self {
        let l = conductor_exponent * mu.ln() / (2.0 * PI);
        let total = (family_size as f64 * 2.0 * half_width).round() as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gammas = (0..total).map(|_| half_width * (2.0 * rng.random::<f64>() - 1.0) / l).collect();
        ZeroDataset { gammas, conductor_exponent, mu, family_size }
    }
}

/// `(1 / |F|) sum_gamma Phi(gamma log C / 2 pi)`.
pub fn empirical_one_level(z: &ZeroDataset, phi: &PwTestFunction) -> Result<f64> {
    z.validate()?;
    let scale = z.log_conductor() / (2.0 * PI);
    let vals: Vec<f64> = z.gammas.par_iter().map(|g| phi.value(g * scale)).collect();
    Ok(compensated(vals.into_iter()) / z.family_size as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BETAS: [f64; 4] = [0.1, 0.3, 0.5, 0.9];

    #[test]
    fn density_values() {
        assert_eq!(density_value(SymmetryType::U, 3.7).smooth, 1.0);
        assert_eq!(density_value(SymmetryType::SoEven, 0.0).smooth, 2.0);
        assert_eq!(density_value(SymmetryType::SoOdd, 0.0), DensityValue { smooth: 0.0, atom: 1.0 });
        for i in -400..=400 {
            let x = i as f64 * 0.0137;
            let o = density_value(SymmetryType::O, x);
            let e = density_value(SymmetryType::SoEven, x);
            let d = density_value(SymmetryType::SoOdd, x);
            assert!((2.0 * o.smooth - e.smooth - d.smooth).abs() <= 1e-14);
            assert!((2.0 * o.atom - e.atom - d.atom).abs() <= 1e-14);
        }
    }

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let r = gauss_legendre(10);
        let w: f64 = r.iter().map(|p| p.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
        let m: f64 = r.iter().map(|(x, w)| w * x.powi(18)).sum();
        assert!((m - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn si_tail_matches_known_value() {
        // Si(100) = 1.5622254668890563...
        assert!((PI / 2.0 - si_complement(100.0) - 1.562_225_466_889_056_3).abs() < 1e-14);
    }

    #[test]
    fn pairings_match_closed_forms() {
        for beta in BETAS {
            let phi = PwTestFunction::new(beta).unwrap();
            assert!((integrate_phi(&phi).unwrap() - 1.0 / beta).abs() < 1e-8);
            let u = pair_density(SymmetryType::U, &phi).unwrap();
            assert!((u - closed_form_pairing(SymmetryType::U, &phi).unwrap()).abs() < 1e-8);
            for s in [SymmetryType::SoEven, SymmetryType::SoOdd, SymmetryType::O] {
                let v = pair_density(s, &phi).unwrap();
                assert!((v - closed_form_pairing(s, &phi).unwrap()).abs() < 1e-6, "{s:?} {beta}");
            }
        }
        let phi = PwTestFunction::new(0.5).unwrap();
        assert!((pair_density(SymmetryType::SoEven, &phi).unwrap() - 2.5).abs() < 1e-6);
        assert!(closed_form_pairing(SymmetryType::U, &PwTestFunction::new(1.5).unwrap()).is_err());
        assert!(PwTestFunction::new(0.0).is_err());
    }

    #[test]
    fn k_type_symmetries() {
        assert_eq!(sigma_to_symmetry(5, "anything").unwrap(), SymmetryType::U);
        assert_eq!(sigma_to_symmetry(2, "trivial").unwrap(), SymmetryType::SoEven);
        assert_eq!(sigma_to_symmetry(2, "det").unwrap(), SymmetryType::SoOdd);
        assert_eq!(sigma_to_symmetry(2, "dim2").unwrap(), SymmetryType::O);
        assert!(sigma_to_symmetry(2, "sym3").is_err());
        assert_eq!(SymmetryType::parse("so_odd").unwrap(), SymmetryType::SoOdd);
    }

    #[test]
    fn empirical_sums() {
        let phi = PwTestFunction::new(0.5).unwrap();
        let mut z = ZeroDataset { gammas: vec![], conductor_exponent: 2.0, mu: 10.0, family_size: 4 };
        assert_eq!(empirical_one_level(&z, &phi).unwrap(), 0.0);
        z.gammas.push(0.0);
        assert_eq!(empirical_one_level(&z, &phi).unwrap(), 0.25);
        let big = ZeroDataset::synthetic_unitary(2000, 1e3, 2.0, 200.0, 9);
        let v = empirical_one_level(&big, &phi).unwrap();
        assert!((v - 2.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zeros.csv");
        let z = ZeroDataset { gammas: vec![0.5, -1.25, 3.0e-3], conductor_exponent: 2.0, mu: 50.0, family_size: 3 };
        z.write(&path).unwrap();
        assert_eq!(ZeroDataset::read(&path).unwrap(), z);
        fs::write(&path, "gamma\n1.0\nfoo\n").unwrap();
        assert!(matches!(ZeroDataset::read(&path), Err(Error::Parse { line: 3, .. })));
    }
}
