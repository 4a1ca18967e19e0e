//! End-to-end checks with pinned tolerances, shared by the `verify-all`
//! subcommand and the acceptance test target.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::family_sim::{
    empirical_pairing, generate_family, sato_tate_run, FamilyConfig, SatoTateConfig,
};
use crate::lowlying::{closed_form_pairing, density_value, pair_density, PwTestFunction, SymmetryType};
use crate::measures::{default_testset, mix_seed, weak_convergence_report, MeasureSpec, Quadrature, TorusRule};
use crate::oracle;
use crate::padic_hecke::{Cocharacter, HeckeAlgebra, HeckeElement};
use crate::satake::{satake_params_from_eigenvalues, satake_transform_in, SatakeParameter, DEFAULT_TEMPERED_TOL};
use crate::weyl_law::{
    constant_budget, main_term, remainder_exponent_exact, CountKind, GroupDims, MainTermParams,
};
use crate::Rational;

pub const DEGREE_RUNTIME_SECS: f64 = 60.0;
pub const HOMOMORPHISM_RUNTIME_SECS: f64 = 120.0;
pub const TRACE_RUNTIME_SECS: f64 = 60.0;
pub const TRACE_TOL: f64 = 1e-6;
pub const ROUND_TRIP_TOL: f64 = 1e-8;
pub const TRIVIAL_ROUND_TRIP_TOL: f64 = 1e-9;
pub const RATE_CONSTANT: f64 = 10.0;
pub const SIGMAS: f64 = 4.0;
pub const COUNT_SLACK: f64 = 1.0;
pub const UNITARY_TOL: f64 = 1e-8;
pub const ORTHOGONAL_TOL: f64 = 1e-6;
pub const AVERAGING_TOL: f64 = 1e-14;
pub const BETAS: [f64; 4] = [0.1, 0.3, 0.5, 0.9];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    pub grid: usize,
    pub extraction_samples: usize,
    pub family_forms: u64,
    pub family_prime: u64,
    pub count_checkpoints: usize,
    pub sato_tate_primes: Vec<u64>,
    pub sato_tate_max_forms: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 1,
            grid: crate::measures::DEFAULT_GRID,
            extraction_samples: 1000,
            family_forms: 100_000,
            family_prime: 3,
            count_checkpoints: 20,
            sato_tate_primes: vec![5, 11, 23, 47, 97],
            sato_tate_max_forms: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub tolerance: String,
    pub runtime_limit_secs: Option<f64>,
    pub details: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

pub const CHECK_IDS: [u32; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

fn check_name(id: u32) -> &'static str {
    match id {
        1 => "coset degrees",
        2 => "Satake homomorphism",
        3 => "Plancherel trace identity",
        4 => "extraction round trip",
        5 => "Sato-Tate limit",
        6 => "synthetic Plancherel density",
        7 => "low-lying identities",
        8 => "Weyl bookkeeping",
        9 => "determinism",
        _ => "unknown",
    }
}

fn tolerance(id: u32) -> String {
    match id {
        1 => "exact".into(),
        2 => "exact in Q(sqrt p)".into(),
        3 => format!("{TRACE_TOL:e}"),
        4 => format!("{ROUND_TRIP_TOL:e}; trivial {TRIVIAL_ROUND_TRIP_TOL:e}"),
        5 => format!("discrepancy <= {RATE_CONSTANT}/p; final <= {SIGMAS} stderr + {RATE_CONSTANT}/p"),
        6 => format!("{SIGMAS} stderr; count +-{COUNT_SLACK}"),
        7 => format!("U {UNITARY_TOL:e}; SO/O {ORTHOGONAL_TOL:e}; averaging {AVERAGING_TOL:e}"),
        8 => "exact".into(),
        9 => "byte-identical".into(),
        _ => String::new(),
    }
}

fn runtime_limit(id: u32) -> Option<f64> {
    match id {
        1 => Some(DEGREE_RUNTIME_SECS),
        2 => Some(HOMOMORPHISM_RUNTIME_SECS),
        3 => Some(TRACE_RUNTIME_SECS),
        _ => None,
    }
}

fn digest(v: &Value) -> String {
    let bytes = serde_json::to_vec(v).expect("json values serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs the checks, caching Hecke algebras between them.
pub struct Verifier {
    cfg: VerifyConfig,
    algebras: Mutex<BTreeMap<(usize, u64), Arc<HeckeAlgebra>>>,
}

impl Verifier {
    pub fn new(cfg: VerifyConfig) -> Self {
        Verifier { cfg, algebras: Mutex::new(BTreeMap::new()) }
    }

    pub fn config(&self) -> &VerifyConfig {
        &self.cfg
    }

    fn algebra(&self, n: usize, p: u64) -> Result<Arc<HeckeAlgebra>> {
        let mut map = self.algebras.lock().expect("algebra cache poisoned");
        if let Some(a) = map.get(&(n, p)) {
            return Ok(a.clone());
        }
        let a = Arc::new(HeckeAlgebra::new(n, p)?);
        map.insert((n, p), a.clone());
        Ok(a)
    }

    /// One check; failures to compute are reported as a failed check.
    pub fn check(&self, id: u32) -> CheckResult {
        let outcome = match id {
            1 => self.coset_degrees(),
            2 => self.satake_homomorphism(),
            3 => self.trace_identity(),
            4 => self.extraction_round_trip(),
            5 => self.sato_tate_limit(),
            6 => self.plancherel_density(),
            7 => self.low_lying(),
            8 => self.weyl_bookkeeping(),
            9 => self.determinism(),
            _ => Err(Error::invalid(format!("no check with id {id}"))),
        };
        let (passed, details) = match outcome {
            Ok(v) => v,
            Err(e) => (false, json!({ "error": e.to_string(), "kind": e.kind() })),
        };
        CheckResult {
            id,
            name: check_name(id).into(),
            passed,
            tolerance: tolerance(id),
            runtime_limit_secs: runtime_limit(id),
            details,
        }
    }

    /// Runs `ids` in order, reporting each result and its wall time.
    pub fn run(&self, ids: &[u32], observer: &mut dyn FnMut(&CheckResult, Duration)) -> VerifyReport {
        let mut checks = Vec::with_capacity(ids.len());
        for &id in ids {
            let start = Instant::now();
            let r = self.check(id);
            observer(&r, start.elapsed());
            checks.push(r);
        }
        VerifyReport { config: self.cfg.clone(), passed: checks.iter().all(|c| c.passed), checks }
    }

    pub fn run_all(&self) -> VerifyReport {
        self.run(&CHECK_IDS, &mut |_, _| {})
    }

    fn coset_degrees(&self) -> Result<(bool, Value)> {
        let mut mismatches = Vec::new();
        let mut cases = 0;
        let mut totals = Vec::new();
        for n in [2usize, 3] {
            for p in [2u64, 3, 5] {
                let alg = self.algebra(n, p)?;
                let mut total = 0u64;
                for omega in Cocharacter::all_up_to_height(n, 2) {
                    let got = alg.degree(&omega)?;
                    let want = oracle::sublattice_count(&omega, p);
                    cases += 1;
                    total += got;
                    if got != want {
                        mismatches.push(json!({"n": n, "p": p, "omega": omega.to_string(), "got": got, "oracle": want}));
                    }
                }
                for t in 1..n {
                    let omega = Cocharacter::minuscule(n, t)?;
                    let got = alg.degree(&omega)?;
                    let want = oracle::gaussian_binomial(n as u32, t as u32, p);
                    cases += 1;
                    if u128::from(got) != want {
                        mismatches.push(json!({"n": n, "p": p, "omega": omega.to_string(), "got": got, "gaussian": want.to_string()}));
                    }
                }
                totals.push(json!({"n": n, "p": p, "total_degree": total}));
            }
        }
        Ok((mismatches.is_empty(), json!({"cases": cases, "totals": totals, "mismatches": mismatches})))
    }

    fn satake_homomorphism(&self) -> Result<(bool, Value)> {
        let mut failures = Vec::new();
        let mut pairs = 0;
        for n in [2usize, 3] {
            for p in [2u64, 3] {
                let alg = self.algebra(n, p)?;
                let basis = Cocharacter::all_up_to_height(n, 1);
                let sats: Vec<_> = basis
                    .iter()
                    .map(|w| satake_transform_in(&alg, &HeckeElement::basis(w, p)))
                    .collect::<Result<_>>()?;
                for i in 0..basis.len() {
                    for j in i..basis.len() {
                        let prod = alg.basis_product(&basis[i], &basis[j])?;
                        let lhs = satake_transform_in(&alg, &prod)?;
                        let rhs = sats[i].mul(&sats[j])?;
                        pairs += 1;
                        if lhs != rhs {
                            failures.push(json!({"n": n, "p": p, "f": basis[i].to_string(), "g": basis[j].to_string()}));
                        }
                    }
                }
            }
        }
        Ok((failures.is_empty(), json!({"pairs": pairs, "failures": failures})))
    }

    fn trace_identity(&self) -> Result<(bool, Value)> {
        let mut worst = 0.0f64;
        let mut rows = Vec::new();
        for n in [2usize, 3] {
            for p in [2u64, 3, 5] {
                let alg = self.algebra(n, p)?;
                let rule = TorusRule::grid(&MeasureSpec::plancherel(n, p)?, self.cfg.grid, crate::measures::REFINEMENT_TOL)?;
                let mut max_err = 0.0f64;
                for omega in Cocharacter::all_up_to_height(n, 2) {
                    let f = satake_transform_in(&alg, &HeckeElement::basis(&omega, p))?;
                    let v = rule.pair(&f)?;
                    let target = if omega.is_zero() { 1.0 } else { 0.0 };
                    max_err = max_err.max((v - target).norm());
                }
                worst = worst.max(max_err);
                rows.push(json!({"n": n, "p": p, "max_error": max_err}));
            }
        }
        Ok((worst <= TRACE_TOL, json!({"grid": self.cfg.grid, "max_error": worst, "cases": rows})))
    }

    fn extraction_round_trip(&self) -> Result<(bool, Value)> {
        let mut ok = true;
        let mut rows = Vec::new();
        for n in [2usize, 3] {
            for p in [2u64, 3, 5] {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.cfg.seed, (n as u64) << 32 | p));
                let mut worst = 0.0f64;
                let mut failures = 0usize;
                for _ in 0..self.cfg.extraction_samples {
                    let mut angles: Vec<f64> = (0..n - 1).map(|_| TAU * rng.random::<f64>()).collect();
                    angles.push(-angles.iter().sum::<f64>());
                    let u = SatakeParameter::from_angles(&angles)?;
                    let lambdas = hecke_eigenvalues(u.values(), p);
                    match satake_params_from_eigenvalues(&lambdas, p) {
                        Ok(ex) => worst = worst.max(ex.parameter.distance(&u)),
                        Err(_) => failures += 1,
                    }
                }
                let trivial: Vec<Complex64> = (0..n)
                    .map(|t| Complex64::new((p as f64).powf((n as f64 - 1.0) / 2.0 - t as f64), 0.0))
                    .collect();
                let ex = satake_params_from_eigenvalues(&hecke_eigenvalues(&trivial, p), p)?;
                let tdist = ex.parameter.distance(&SatakeParameter::new(trivial)?);
                let flagged = !ex.parameter.is_tempered(DEFAULT_TEMPERED_TOL);
                let pass = failures == 0 && worst <= ROUND_TRIP_TOL && tdist <= TRIVIAL_ROUND_TRIP_TOL && flagged;
                ok &= pass;
                rows.push(json!({
                    "n": n, "p": p, "max_distance": worst, "solver_failures": failures,
                    "trivial_distance": tdist, "trivial_flagged_non_tempered": flagged,
                }));
            }
        }
        Ok((ok, json!({"samples_per_case": self.cfg.extraction_samples, "cases": rows})))
    }

    fn quadrature(&self) -> Quadrature {
        Quadrature { grid: self.cfg.grid, ..Quadrature::default() }
    }

    fn sato_tate_limit(&self) -> Result<(bool, Value)> {
        let primes = &self.cfg.sato_tate_primes;
        let tests = default_testset(2)?;
        let report = weak_convergence_report(2, primes, &tests, &self.quadrature())?;
        let bounded = primes
            .iter()
            .zip(&report.max_discrepancy)
            .all(|(&p, d)| *d <= RATE_CONSTANT / p as f64);
        let run = sato_tate_run(
            &SatoTateConfig {
                n: 2,
                sequence: primes.iter().map(|&p| (p, (p as f64).powi(3))).collect(),
                dims: GroupDims::adjoint(2)?,
                params: MainTermParams::default(),
                seed: self.cfg.seed,
                max_forms: Some(self.cfg.sato_tate_max_forms),
            },
            &tests,
            &self.quadrature(),
        )?;
        let passed = report.max_decreasing && bounded && run.final_within_tolerance;
        Ok((
            passed,
            json!({
                "primes": primes,
                "max_discrepancy": report.max_discrepancy,
                "strictly_decreasing": report.max_decreasing,
                "bounded_by_c_over_p": bounded,
                "fitted_constant": report.fitted_constant,
                "rows": report.rows,
                "family_run": run,
            }),
        ))
    }

    fn plancherel_density(&self) -> Result<(bool, Value)> {
        let p = self.cfg.family_prime;
        let dims = GroupDims::adjoint(2)?;
        let params = MainTermParams::default();
        let c = crate::weyl_law::count_prediction(CountKind::Nonequivariant, &dims, &params, 1.0)?;
        let mu = (self.cfg.family_forms as f64 / c).cbrt();
        let fam = generate_family(&FamilyConfig {
            n: 2,
            mu,
            sigma: None,
            primes: vec![p],
            bad_primes: vec![],
            dims,
            params,
            seed: self.cfg.seed,
            max_forms: None,
        })?;
        let alg = self.algebra(2, p)?;
        let f = satake_transform_in(&alg, &HeckeElement::basis(&Cocharacter::new(vec![1, 0])?, p))?;
        let s = empirical_pairing(&fam, p, &f)?;
        let mean_ok = s.mean.norm() <= SIGMAS * s.stderr;
        let k = self.cfg.count_checkpoints;
        let mut worst = 0.0f64;
        for i in 1..=k {
            let t = mu * i as f64 / k as f64;
            let pred = crate::weyl_law::count_prediction(CountKind::Nonequivariant, &dims, &params, t)?;
            worst = worst.max((fam.counting_function(t) as f64 - pred).abs());
        }
        let count_ok = worst <= COUNT_SLACK;
        Ok((
            mean_ok && count_ok && fam.len() as u64 == self.cfg.family_forms,
            json!({
                "forms": fam.len(), "mu": mu, "prime": p,
                "mean": [s.mean.re, s.mean.im], "stderr": s.stderr,
                "checkpoints": k, "max_count_deviation": worst,
            }),
        ))
    }

    fn low_lying(&self) -> Result<(bool, Value)> {
        let mut ok = true;
        let mut rows = Vec::new();
        for beta in BETAS {
            let phi = PwTestFunction::new(beta)?;
            let mut errs = BTreeMap::new();
            for s in SymmetryType::ALL {
                let e = (pair_density(s, &phi)? - closed_form_pairing(s, &phi)?).abs();
                let tol = if s == SymmetryType::U { UNITARY_TOL } else { ORTHOGONAL_TOL };
                ok &= e <= tol;
                errs.insert(s.label(), e);
            }
            rows.push(json!({"beta": beta, "errors": errs}));
        }
        let mut avg = 0.0f64;
        for i in -20_000..=20_000 {
            let x = i as f64 * 5e-4;
            let o = density_value(SymmetryType::O, x);
            let e = density_value(SymmetryType::SoEven, x);
            let d = density_value(SymmetryType::SoOdd, x);
            avg = avg.max((2.0 * o.smooth - e.smooth - d.smooth).abs());
            avg = avg.max((2.0 * o.atom - e.atom - d.atom).abs());
        }
        ok &= avg <= AVERAGING_TOL;
        Ok((ok, json!({"betas": rows, "max_averaging_defect": avg})))
    }

    fn weyl_bookkeeping(&self) -> Result<(bool, Value)> {
        let g2 = GroupDims::adjoint(2)?;
        let r = remainder_exponent_exact(CountKind::Equivariant, &g2);
        let exponent_ok = r == Rational::new(5, 3);
        let mut budgets = Vec::new();
        let mut budget_ok = true;
        let mut homogeneous = true;
        for n in 2..=6 {
            let g = GroupDims::adjoint(n)?;
            match constant_budget(&g) {
                Ok(b) => budgets.push(json!({"n": n, "ambient": g.ambient, "budget": b})),
                Err(e) => {
                    budget_ok = false;
                    budgets.push(json!({"n": n, "error": e.to_string()}));
                }
            }
            let params = MainTermParams { vol: 0.37, ..MainTermParams::default() };
            for kind in [CountKind::Nonequivariant, CountKind::Equivariant] {
                let e = g.leading_exponent(kind) as i32;
                for mu in [0.75, 1.5, 3.0, 10.0] {
                    let base = main_term(kind, &g, &params, mu)?;
                    for k in [0.5f64, 2.0, 4.0] {
                        homogeneous &= main_term(kind, &g, &params, k * mu)? == k.powi(e) * base;
                    }
                }
            }
        }
        Ok((
            exponent_ok && budget_ok && homogeneous,
            json!({
                "equivariant_exponent_n2": r.to_string(),
                "budgets": budgets,
                "homogeneity_exact": homogeneous,
            }),
        ))
    }

    /// Reruns the parallel randomized checks on a pool of another size and
    /// compares digests of their details.
    fn determinism(&self) -> Result<(bool, Value)> {
        let ids = [3u32, 4, 5, 6];
        let here: Vec<String> = ids.iter().map(|&i| digest(&self.check(i).details)).collect();
        let alt = if rayon::current_num_threads() == 1 { 4 } else { 1 };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(alt)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        let there: Vec<String> = pool.install(|| ids.iter().map(|&i| digest(&self.check(i).details)).collect());
        Ok((here == there, json!({"checks": ids, "digests": here, "identical": here == there})))
    }
}

/// `lambda_t = p^{t(n-t)/2} e_t(u)` with `e_t` from subset sums.
pub fn hecke_eigenvalues(u: &[Complex64], p: u64) -> Vec<Complex64> {
    let n = u.len();
    (1..n)
        .map(|t| oracle::elementary_symmetric(u, t) * (p as f64).powf((t * (n - t)) as f64 / 2.0))
        .collect()
}
