//! Command-line front end. Every subcommand writes one JSON artifact that
//! embeds the resolved configuration, so rerunning with `--config artifact`
//! reproduces it.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, SEED_ENV};
use crate::error::{Error, Result};
use crate::family_sim::{
    empirical_pairing, fit_leading_constant, generate_family, ingest_dataset, write_family_csv, Family, FamilyConfig,
    IngestOptions, KType,
};
use crate::lowlying::{
    closed_form_pairing, empirical_one_level, pair_density, sigma_to_symmetry, PwTestFunction, SymmetryType, ZeroDataset,
};
use crate::measures::{
    default_testset, normalize_with, sample, total_mass, weak_convergence_report, MeasureKind, MeasureSpec, TorusPoint,
    TorusRule,
};
use crate::padic_hecke::{Cocharacter, HeckeAlgebra, HeckeElement};
use crate::satake::{satake_params_from_eigenvalues, satake_transform_in, SymLaurent, DEFAULT_TEMPERED_TOL};
use crate::verify::Verifier;
use crate::weyl_law::{
    constant_budget, count_prediction, leading_coefficient, prime_exponent_adjoint, prime_exponent_bound,
    remainder_exponent, remainder_exponent_exact, CountKind, GroupDims, MainTermParams,
};

#[derive(Debug, Parser)]
#[command(name = "hecke-spectra", version, about = "Hecke algebras, Satake parameters and spectral statistics")]
pub struct Cli {
    /// TOML config, or a JSON artifact whose embedded config is reused.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed from the config and the environment.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Artifact path; stdout when absent.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Left cosets of a double coset and its degree.
    Cosets(CosetsArgs),
    /// Satake parameters from Hecke eigenvalues, or the Satake transform.
    Satake(SatakeArgs),
    /// Normalization, pairings, samples and the large-p table of a measure.
    Measure(MeasureArgs),
    /// Synthetic or ingested family statistics.
    Family(FamilyArgs),
    /// One-level density pairings.
    Lowlying(LowlyingArgs),
    /// Weyl-law main terms, exponents and constants.
    Weyl(WeylArgs),
    /// Full acceptance suite.
    VerifyAll(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct CosetsArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<u64>,
    /// Comma-separated cocharacter, e.g. `1,0`.
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct SatakeArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<u64>,
    /// Comma-separated eigenvalues `lambda_1..lambda_{n-1}`, real or `a+bi`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambdas: Option<String>,
    #[arg(long)]
    pub omega: Option<String>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// `plancherel` or `sato-tate`.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub kappa: Option<u32>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Comma-separated increasing primes for the convergence table.
    #[arg(long)]
    pub convergence: Option<String>,
    #[arg(long)]
    pub raw_density: bool,
    #[arg(long)]
    pub samples_csv: Option<PathBuf>,
    /// `x,y` density values along the slice `(t, -t, 0, ...)`.
    #[arg(long)]
    pub plot_csv: Option<PathBuf>,
    /// `x,y` pairs of prime and largest discrepancy.
    #[arg(long)]
    pub convergence_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub primes: Option<String>,
    #[arg(long)]
    pub kappa: Option<u32>,
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub max_forms: Option<usize>,
    #[arg(long)]
    pub ingest: Option<String>,
    #[arg(long)]
    pub strict_tempered: bool,
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LowlyingArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub zeros: Option<String>,
}

#[derive(Debug, Args)]
pub struct WeylArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub ambient: Option<u32>,
    #[arg(long)]
    pub mu_grid: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub vol_m: Option<f64>,
    #[arg(long)]
    pub vol_mk: Option<f64>,
    #[arg(long)]
    pub d_sigma: Option<u32>,
    #[arg(long)]
    pub n_z: Option<u32>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub grid: Option<usize>,
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<T>().map_err(|_| Error::invalid(format!("bad {what} entry {x:?}"))))
        .collect()
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    s.parse::<f64>()
        .map(|x| Complex64::new(x, 0.0))
        .or_else(|_| Complex64::from_str(s))
        .map_err(|_| Error::invalid(format!("bad eigenvalue {s:?}")))
}

/// Defaults, then the config file, then the seed variable, then flags.
pub fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Ok(s) = std::env::var(SEED_ENV) {
        cfg.seed = s.trim().parse().map_err(|_| Error::invalid(format!("{SEED_ENV}={s:?} is not a 64-bit seed")))?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match &cli.command {
        Command::Cosets(a) => {
            set(&mut cfg.n, a.n);
            if let Some(p) = a.p {
                cfg.primes = vec![p];
            }
            if let Some(w) = &a.omega {
                cfg.cosets.omega = Some(parse_list(w, "omega")?);
            }
            cfg.cosets.list |= a.list;
        }
        Command::Satake(a) => {
            set(&mut cfg.n, a.n);
            if let Some(p) = a.p {
                cfg.primes = vec![p];
            }
            if let Some(l) = &a.lambdas {
                cfg.satake.lambdas = Some(l.split(',').map(parse_complex).collect::<Result<_>>()?);
                cfg.satake.omega = None;
            }
            if let Some(w) = &a.omega {
                cfg.satake.omega = Some(parse_list(w, "omega")?);
                cfg.satake.lambdas = None;
            }
        }
        Command::Measure(a) => {
            if let Some(k) = &a.kind {
                cfg.measure.kind = k.replace('-', "_");
            }
            set(&mut cfg.n, a.n);
            if let Some(p) = a.p {
                cfg.primes = vec![p];
            }
            set(&mut cfg.kappa, a.kappa);
            set(&mut cfg.quadrature.grid, a.grid);
            set(&mut cfg.measure.samples, a.samples);
            if let Some(c) = &a.convergence {
                cfg.measure.convergence_primes = parse_list(c, "prime")?;
            }
            cfg.flags.raw_density |= a.raw_density;
        }
        Command::Family(a) => {
            set(&mut cfg.n, a.n);
            set(&mut cfg.mu, a.mu);
            set(&mut cfg.kappa, a.kappa);
            if let Some(p) = &a.primes {
                cfg.primes = parse_list(p, "prime")?;
            }
            if a.sigma.is_some() {
                cfg.family.sigma = a.sigma.clone();
            }
            if a.max_forms.is_some() {
                cfg.family.max_forms = a.max_forms;
            }
            if a.ingest.is_some() {
                cfg.family.ingest = a.ingest.clone();
            }
            cfg.flags.strict_tempered |= a.strict_tempered;
        }
        Command::Lowlying(a) => {
            set(&mut cfg.lowlying.beta, a.beta);
            set(&mut cfg.n, a.n);
            if a.sigma.is_some() {
                cfg.lowlying.sigma = a.sigma.clone();
            }
            if a.zeros.is_some() {
                cfg.lowlying.zeros = a.zeros.clone();
            }
        }
        Command::Weyl(a) => {
            set(&mut cfg.n, a.n);
            if a.ambient.is_some() {
                cfg.vol_inputs.ambient = a.ambient;
            }
            if let Some(g) = &a.mu_grid {
                cfg.weyl.mu_grid = parse_list(g, "mu")?;
            }
            set(&mut cfg.weyl.epsilon, a.epsilon);
            set(&mut cfg.vol_inputs.vol_m, a.vol_m);
            set(&mut cfg.vol_inputs.vol_mk, a.vol_mk);
            set(&mut cfg.vol_inputs.d_sigma, a.d_sigma);
            set(&mut cfg.vol_inputs.n_z, a.n_z);
        }
        Command::VerifyAll(a) => {
            set(&mut cfg.verify.grid, a.grid);
            cfg.verify.seed = cfg.seed;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn first_prime(cfg: &ExperimentConfig) -> Result<u64> {
    cfg.primes.first().copied().ok_or_else(|| Error::invalid("no prime configured"))
}

fn cocharacter(parts: &Option<Vec<i64>>, n: usize) -> Result<Cocharacter> {
    let parts = parts.as_ref().ok_or_else(|| Error::invalid("omega is required"))?;
    if parts.len() != n {
        return Err(Error::invalid(format!("omega has {} entries, expected n = {n}", parts.len())));
    }
    Cocharacter::new(parts.clone())
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn laurent_json(f: &SymLaurent) -> Value {
    Value::Array(
        f.coefficients()
            .map(|(k, c)| json!({"monomial": k, "rational": c.rational.to_string(), "radical": c.radical.to_string()}))
            .collect(),
    )
}

fn dims_for(cfg: &ExperimentConfig) -> Result<GroupDims> {
    let n = cfg.n as u32;
    match cfg.vol_inputs.ambient {
        Some(a) => GroupDims::new(n, a),
        None => GroupDims::adjoint(n),
    }
}

fn weyl_params(cfg: &ExperimentConfig, kind: CountKind) -> MainTermParams {
    let v = &cfg.vol_inputs;
    MainTermParams {
        vol: match kind {
            CountKind::Nonequivariant => v.vol_m,
            CountKind::Equivariant => v.vol_mk,
        },
        d_sigma: v.d_sigma,
        delta_alpha: 1,
        n_z_alpha: v.n_z,
    }
}

fn run_cosets(cfg: &ExperimentConfig) -> Result<Value> {
    let p = first_prime(cfg)?;
    let omega = cocharacter(&cfg.cosets.omega, cfg.n)?;
    let alg = HeckeAlgebra::new(cfg.n, p)?;
    let profile: Vec<Value> =
        alg.profile(&omega)?.iter().map(|(d, c)| json!({"diagonal": d, "count": c})).collect();
    let mut out = json!({
        "config": cfg,
        "n": cfg.n, "p": p, "omega": omega.to_string(), "height": omega.height(),
        "degree": alg.degree(&omega)?, "diagonal_profile": profile,
    });
    if cfg.cosets.list {
        let reps: Vec<Value> = alg
            .cosets(&omega)?
            .iter()
            .map(|r| Value::Array((0..r.n).map(|i| json!(&r.matrix[i * r.n..(i + 1) * r.n])).collect()))
            .collect();
        out["cosets"] = Value::Array(reps);
    }
    Ok(out)
}

fn run_satake(cfg: &ExperimentConfig) -> Result<Value> {
    let p = first_prime(cfg)?;
    if let Some(lambdas) = &cfg.satake.lambdas {
        if lambdas.len() + 1 != cfg.n {
            return Err(Error::invalid(format!("need n - 1 = {} eigenvalues, got {}", cfg.n - 1, lambdas.len())));
        }
        let ex = satake_params_from_eigenvalues(lambdas, p)?;
        let u = &ex.parameter;
        return Ok(json!({
            "config": cfg,
            "n": cfg.n, "p": p,
            "lambdas": lambdas.iter().copied().map(complex).collect::<Vec<_>>(),
            "polynomial": ex.polynomial.iter().copied().map(complex).collect::<Vec<_>>(),
            "roots": u.values().iter().copied().map(complex).collect::<Vec<_>>(),
            "moduli": u.values().iter().map(|z| z.norm()).collect::<Vec<_>>(),
            "tempered": u.is_tempered(DEFAULT_TEMPERED_TOL),
            "tempered_tolerance": DEFAULT_TEMPERED_TOL,
            "residual": ex.residual,
        }));
    }
    let omega = cocharacter(&cfg.satake.omega, cfg.n)?;
    let alg = HeckeAlgebra::new(cfg.n, p)?;
    let f = satake_transform_in(&alg, &HeckeElement::basis(&omega, p))?;
    Ok(json!({
        "config": cfg,
        "n": cfg.n, "p": p, "omega": omega.to_string(),
        "transform": f.to_string(), "coefficients": laurent_json(&f),
    }))
}

fn write_xy(path: &Path, rows: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y"])?;
    for (x, y) in rows {
        w.write_record([x.to_string(), y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn run_measure(cfg: &ExperimentConfig, a: Option<&MeasureArgs>) -> Result<Value> {
    let n = cfg.n;
    let kind = match cfg.measure.kind.as_str() {
        "plancherel" => MeasureKind::Plancherel { p: first_prime(cfg)? },
        _ => MeasureKind::SatoTate,
    };
    let q = cfg.quadrature();
    let spec = normalize_with(&MeasureSpec::new(kind, n)?, &q)?;
    let rule = TorusRule::for_spec(&spec, &q)?;
    let mut pairings = Vec::new();
    let alg = match kind {
        MeasureKind::Plancherel { p } => Some(HeckeAlgebra::new(n, p)?),
        MeasureKind::SatoTate => None,
    };
    for omega in Cocharacter::all_up_to_height(n, cfg.kappa) {
        let (label, f) = match (&alg, kind) {
            (Some(alg), MeasureKind::Plancherel { p }) => {
                ("Sat(tau)", satake_transform_in(alg, &HeckeElement::basis(&omega, p))?)
            }
            _ => ("schur", SymLaurent::schur(n, 2, omega.parts())?),
        };
        let v = rule.pair(&f)?;
        pairings.push(json!({
            "omega": omega.to_string(), "function": label, "value": complex(v),
            "expected": if omega.is_zero() { 1.0 } else { 0.0 },
            "stderr": rule.pair_stderr(&f),
        }));
    }
    let independent_grid = if n <= crate::measures::MAX_GRID_RANK { Some(cfg.quadrature.grid / 2 + 2) } else { None };
    let mass = match independent_grid {
        Some(g) => Some(total_mass(&spec, g - g % 2)?),
        None => None,
    };
    let mut out = json!({
        "config": cfg,
        "kind": kind.label(), "n": n, "p": kind.prime(),
        "method": rule.method(),
        "normalization": spec.normalization, "normalization_stderr": spec.normalization_stderr,
        "mass_on_independent_grid": mass,
        "pairings": pairings,
    });
    if cfg.measure.samples > 0 {
        let s = sample(&spec, cfg.measure.samples, cfg.seed)?;
        let mut moments = Vec::new();
        for t in default_testset(n)? {
            let ev = t.f.torus_evaluator();
            let vals: Vec<Complex64> = s.points.iter().map(|x| ev.eval(x.angles())).collect();
            let (m, se) = crate::measures::mean_and_stderr(&vals);
            moments.push(json!({"function": t.label, "mean": complex(m), "stderr": se, "quadrature": complex(rule.pair(&t.f)?)}));
        }
        out["samples"] = json!({
            "count": s.points.len(), "proposals": s.proposals, "acceptance_rate": s.acceptance_rate,
            "envelope": s.envelope, "envelope_recomputations": s.envelope_recomputations, "moments": moments,
        });
        if let Some(path) = a.and_then(|a| a.samples_csv.as_ref()) {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record((1..=n).map(|i| format!("theta_{i}")))?;
            for x in &s.points {
                w.write_record(x.angles().iter().map(|t| t.to_string()))?;
            }
            w.flush()?;
        }
    }
    if let Some(path) = a.and_then(|a| a.plot_csv.as_ref()) {
        let m = cfg.measure.plot_points.max(2);
        let rows = (0..m).map(|i| {
            let t = std::f64::consts::TAU * i as f64 / m as f64;
            let mut free = vec![0.0; n - 1];
            free[0] = t;
            if n > 2 {
                free[1] = -t;
            }
            let x = TorusPoint::from_chart(&free);
            let y = if cfg.flags.raw_density { spec.raw_density(&x) } else { spec.density(&x).unwrap_or(f64::NAN) };
            (t, y)
        });
        write_xy(path, rows.collect::<Vec<_>>())?;
    }
    if !cfg.measure.convergence_primes.is_empty() {
        let r = weak_convergence_report(n, &cfg.measure.convergence_primes, &default_testset(n)?, &q)?;
        if let Some(path) = a.and_then(|a| a.convergence_csv.as_ref()) {
            write_xy(path, r.primes.iter().map(|&p| p as f64).zip(r.max_discrepancy.iter().copied()))?;
        }
        out["convergence_table"] = serde_json::to_value(&r)?;
    }
    Ok(out)
}

fn family_experiments(cfg: &ExperimentConfig, fam: &Family) -> Result<Vec<Value>> {
    let mut out = Vec::new();
    if fam.is_empty() {
        return Ok(out);
    }
    for &p in &fam.primes {
        let alg = HeckeAlgebra::new(fam.n, p)?;
        let mut labels = Vec::new();
        let mut means = Vec::new();
        let mut errs = Vec::new();
        let mut expected = Vec::new();
        let mut pass = true;
        for omega in Cocharacter::all_up_to_height(fam.n, cfg.kappa) {
            let f = satake_transform_in(&alg, &HeckeElement::basis(&omega, p))?;
            let s = empirical_pairing(fam, p, &f)?;
            let e = if omega.is_zero() { 1.0 } else { 0.0 };
            pass &= (s.mean - e).norm() <= crate::verify::SIGMAS * s.stderr + 1e-12;
            labels.push(format!("Sat(tau{omega})"));
            means.push(complex(s.mean));
            errs.push(s.stderr);
            expected.push(e);
        }
        out.push(json!({
            "prime": p, "testset": labels, "mean": means, "stderr": errs, "expected": expected,
            "verdict": if pass { "pass" } else { "fail" },
        }));
    }
    Ok(out)
}

fn run_family(cfg: &ExperimentConfig, a: Option<&FamilyArgs>) -> Result<Value> {
    let sigma = cfg.family.sigma.as_deref().map(KType::from_str).transpose()?;
    let (fam, extra) = if let Some(path) = &cfg.family.ingest {
        let (fam, quarantined) =
            ingest_dataset(Path::new(path), &IngestOptions { n: cfg.n, strict_tempered: cfg.flags.strict_tempered })?;
        let exponent = dims_for(cfg)?.leading_exponent(if fam.sigma.is_some() {
            CountKind::Equivariant
        } else {
            CountKind::Nonequivariant
        });
        let fit = if fam.is_empty() { None } else { Some(fit_leading_constant(&fam, exponent)?) };
        (fam, json!({"quarantined": quarantined, "fit": fit}))
    } else {
        let dims = dims_for(cfg)?;
        let kind = if sigma.is_some() { CountKind::Equivariant } else { CountKind::Nonequivariant };
        let fc = FamilyConfig {
            n: cfg.n,
            mu: cfg.mu,
            sigma,
            primes: cfg.primes.clone(),
            bad_primes: cfg.bad_primes.clone(),
            dims,
            params: weyl_params(cfg, kind),
            seed: cfg.seed,
            max_forms: cfg.family.max_forms,
        };
        let fam = generate_family(&fc)?;
        let (c, e) = fc.weyl_constant()?;
        let mut worst = 0.0f64;
        if !fam.is_thinned() {
            for k in 1..=20 {
                let t = cfg.mu * k as f64 / 20.0;
                worst = worst.max((fam.counting_function(t) as f64 - c * t.powi(e as i32)).abs());
            }
        }
        let note = if fam.is_empty() { Some("cutoff too small: the family is empty") } else { None };
        (fam, json!({"weyl_constant": c, "exponent": e, "max_count_deviation": worst, "note": note}))
    };
    if let Some(path) = a.and_then(|a| a.dump.as_ref()) {
        write_family_csv(&fam, fs::File::create(path)?)?;
    }
    Ok(json!({
        "config": cfg,
        "provenance": fam.provenance, "n": fam.n, "mu": fam.mu, "primes": fam.primes,
        "represented": fam.represented, "simulated": fam.len(), "thinned": fam.is_thinned(),
        "non_tempered": fam.non_tempered(),
        "details": extra,
        "experiments": family_experiments(cfg, &fam)?,
    }))
}

fn run_lowlying(cfg: &ExperimentConfig) -> Result<Value> {
    let phi = PwTestFunction::new(cfg.lowlying.beta)?;
    let mut pairings = Vec::new();
    for s in SymmetryType::ALL {
        let v = pair_density(s, &phi)?;
        let closed = closed_form_pairing(s, &phi).ok();
        pairings.push(json!({
            "symmetry": s.label(), "quadrature": v, "closed_form": closed,
            "error": closed.map(|c| (v - c).abs()),
        }));
    }
    let symmetry = match &cfg.lowlying.sigma {
        Some(sigma) => Some(sigma_to_symmetry(cfg.n, sigma)?.label()),
        None if cfg.n >= 3 => Some(SymmetryType::U.label()),
        None => None,
    };
    let empirical = match &cfg.lowlying.zeros {
        Some(path) => {
            let z = ZeroDataset::read(Path::new(path))?;
            Some(json!({
                "value": empirical_one_level(&z, &phi)?, "zeros": z.gammas.len(),
                "family_size": z.family_size, "log_conductor": z.log_conductor(),
            }))
        }
        None => None,
    };
    Ok(json!({
        "config": cfg,
        "beta": phi.beta(), "verified_regime": phi.in_verified_regime(),
        "phi_at_zero": phi.value(0.0), "phi_hat_at_zero": phi.fourier(0.0),
        "symmetry": symmetry, "pairings": pairings, "empirical": empirical,
    }))
}

fn run_weyl(cfg: &ExperimentConfig) -> Result<Value> {
    let dims = dims_for(cfg)?;
    let mut kinds = Vec::new();
    for (label, kind) in [("nonequivariant", CountKind::Nonequivariant), ("equivariant", CountKind::Equivariant)] {
        let params = weyl_params(cfg, kind);
        let predictions: Vec<Value> = cfg
            .weyl
            .mu_grid
            .iter()
            .map(|&mu| Ok(json!({"mu": mu, "count": count_prediction(kind, &dims, &params, mu)?})))
            .collect::<Result<_>>()?;
        kinds.push(json!({
            "kind": label, "params": params,
            "leading_exponent": dims.leading_exponent(kind),
            "leading_coefficient": leading_coefficient(kind, &dims, &params)?,
            "remainder_exponent": remainder_exponent(kind, &dims, cfg.weyl.epsilon)?,
            "remainder_exponent_exact": remainder_exponent_exact(kind, &dims).to_string(),
            "predictions": predictions,
        }));
    }
    Ok(json!({
        "config": cfg,
        "dims": dims,
        "equivariant_dimension_condition": dims.check_equivariant().is_ok(),
        "counts": kinds,
        "budget": constant_budget(&dims)?,
        "prime_exponents": {
            "bound": prime_exponent_bound(&dims, cfg.kappa)?,
            "adjoint": prime_exponent_adjoint(dims.n, cfg.kappa),
        },
    }))
}

fn run_verify(cfg: &ExperimentConfig) -> Result<Value> {
    let v = Verifier::new(cfg.verify.clone());
    let report = v.run(&crate::verify::CHECK_IDS, &mut |r, elapsed| {
        let secs = elapsed.as_secs_f64();
        let slow = r.runtime_limit_secs.is_some_and(|l| secs > l);
        let verdict = if r.passed && !slow { "PASS" } else { "FAIL" };
        eprintln!("{verdict} {} {} ({secs:.2}s)", r.id, r.name);
    });
    let passed = report.passed;
    let out = json!({"config": cfg, "report": report});
    if !passed {
        return Err(Error::CheckFailed(serde_json::to_string(&out)?));
    }
    Ok(out)
}

/// Runs the subcommand and returns the artifact.
pub fn execute(cli: &Cli, cfg: &ExperimentConfig) -> Result<Value> {
    match &cli.command {
        Command::Cosets(_) => run_cosets(cfg),
        Command::Satake(_) => run_satake(cfg),
        Command::Measure(a) => run_measure(cfg, Some(a)),
        Command::Family(a) => run_family(cfg, Some(a)),
        Command::Lowlying(_) => run_lowlying(cfg),
        Command::Weyl(_) => run_weyl(cfg),
        Command::VerifyAll(_) => run_verify(cfg),
    }
}

fn emit(out: Option<&Path>, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn diagnostic(e: &Error) -> Value {
    json!({"error": {"kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()}})
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let run = || -> Result<()> {
        if let Some(t) = cli.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        }
        let cfg = resolve(&cli)?;
        match execute(&cli, &cfg) {
            Ok(v) => emit(cli.out.as_deref(), &v),
            Err(Error::CheckFailed(report)) => {
                if let Ok(v) = serde_json::from_str::<Value>(&report) {
                    emit(cli.out.as_deref(), &v)?;
                }
                Err(Error::CheckFailed("one or more acceptance checks failed".into()))
            }
            Err(e) => Err(e),
        }
    };
    match run() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", diagnostic(&e));
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn artifact(args: &[&str]) -> Result<Value> {
        let cli = Cli::try_parse_from(std::iter::once("hecke-spectra").chain(args.iter().copied()))
            .map_err(|e| Error::invalid(e.to_string()))?;
        let cfg = resolve(&cli)?;
        execute(&cli, &cfg)
    }

    #[test]
    fn cosets_degree() {
        let v = artifact(&["cosets", "--n", "2", "--p", "3", "--omega", "1,0"]).unwrap();
        assert_eq!(v["degree"], 4);
        assert_eq!(v["config"]["cosets"]["omega"], json!([1, 0]));
    }

    #[test]
    fn satake_extraction() {
        let v = artifact(&["satake", "--n", "2", "--p", "3", "--lambdas", "4"]).unwrap();
        assert_eq!(v["tempered"], false);
        let mut moduli: Vec<f64> = v["moduli"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        moduli.sort_by(f64::total_cmp);
        assert!((moduli[0] - 3f64.powf(-0.5)).abs() < 1e-12 && (moduli[1] - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn validation_errors_map_to_exit_one() {
        let e = artifact(&["cosets", "--n", "2", "--p", "4", "--omega", "1,0"]).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert_eq!(diagnostic(&e)["error"]["kind"], "invalid_input");
    }

    #[test]
    fn weyl_and_lowlying_artifacts() {
        let v = artifact(&["weyl", "--n", "2", "--ambient", "3"]).unwrap();
        assert_eq!(v["budget"]["c6"], 11);
        let v = artifact(&["lowlying", "--beta", "0.5", "--n", "2", "--sigma", "det"]).unwrap();
        assert_eq!(v["symmetry"], "SO_odd");
    }
}
