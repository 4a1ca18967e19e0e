use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Family, KType, Provenance, SyntheticForm};
use crate::error::{Error, Result};
use crate::padic_hecke::smith::is_prime;
use crate::satake::{satake_params_from_eigenvalues, SatakeParameter, DEFAULT_TEMPERED_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub n: usize,
    /// Quarantine rows whose parameters are off the unit torus.
    pub strict_tempered: bool,
}

/// A data row left out of the family, with its CSV line number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quarantined {
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Lambda,
    Theta,
    LogAbs,
}

struct Column {
    index: usize,
    kind: ColKind,
    prime: u64,
    t: usize,
}

/// Columns present for one prime: eigenvalues, or angles with optional log-moduli.
#[derive(Clone, Copy, PartialEq, Eq)]
enum PrimeLayout {
    Eigenvalues,
    Parameters { moduli: bool },
}

type Header = (usize, Option<usize>, Vec<(u64, PrimeLayout)>, Vec<Column>);

fn parse_header(header: &csv::StringRecord, n: usize) -> Result<Header> {
    let bad = |m: String| Error::Parse { line: 1, message: m };
    let mut mu = None;
    let mut ktype = None;
    let mut cols = Vec::new();
    for (i, name) in header.iter().enumerate() {
        let name = name.trim();
        match name {
            "mu" => mu = Some(i),
            "ktype" => ktype = Some(i),
            _ => {
                let parts: Vec<&str> = name.split('_').collect();
                let (kind, p, t) = match parts.as_slice() {
                    ["lambda", p, t] => (ColKind::Lambda, p.parse::<u64>(), t.parse::<usize>()),
                    ["theta", p, t] => (ColKind::Theta, p.parse::<u64>(), t.parse::<usize>()),
                    ["logabs", p, t] => (ColKind::LogAbs, p.parse::<u64>(), t.parse::<usize>()),
                    _ => return Err(bad(format!("unexpected column {name:?}"))),
                };
                let (p, t) = match (p, t) {
                    (Ok(p), Ok(t)) if is_prime(p) => (p, t),
                    _ => return Err(bad(format!("malformed column {name:?}"))),
                };
                let top = if kind == ColKind::Lambda { n - 1 } else { n };
                if t == 0 || t > top {
                    return Err(Error::invalid(format!("column {name:?} does not fit rank {n}")));
                }
                cols.push(Column { index: i, kind, prime: p, t });
            }
        }
    }
    let mu = mu.ok_or_else(|| bad("missing mu column".into()))?;
    let mut primes: Vec<u64> = cols.iter().map(|c| c.prime).collect();
    primes.sort_unstable();
    primes.dedup();
    let indices = |p: u64, kind: ColKind| {
        let mut ts: Vec<usize> = cols.iter().filter(|c| c.prime == p && c.kind == kind).map(|c| c.t).collect();
        ts.sort_unstable();
        ts
    };
    let mut layouts = Vec::new();
    for &p in &primes {
        let (lambda, theta, logabs) = (indices(p, ColKind::Lambda), indices(p, ColKind::Theta), indices(p, ColKind::LogAbs));
        let layout = if theta.is_empty() && logabs.is_empty() && lambda == (1..n).collect::<Vec<_>>() {
            PrimeLayout::Eigenvalues
        } else if lambda.is_empty() && theta == (1..=n).collect::<Vec<_>>() && (logabs.is_empty() || logabs == theta) {
            PrimeLayout::Parameters { moduli: !logabs.is_empty() }
        } else {
            return Err(Error::invalid(format!(
                "prime {p} needs lambda_{p}_1 .. lambda_{p}_{} or theta_{p}_1 .. theta_{p}_{n}",
                n - 1
            )));
        };
        layouts.push((p, layout));
    }
    Ok((mu, ktype, layouts, cols))
}

fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    s.parse::<f64>().ok().map(|x| Complex64::new(x, 0.0)).or_else(|| Complex64::from_str(s).ok())
}

/// Reads tables `mu, [ktype,]` followed per prime by Hecke eigenvalues
/// `lambda_p_t`, or by parameter angles `theta_p_i` with optional
/// `logabs_p_i` as written by [`write_family_csv`]. Eigenvalues are turned
/// into Satake parameters row by row. Rows that fail extraction, or are not
/// tempered in strict mode, are quarantined.
pub fn ingest_dataset(path: &Path, opts: &IngestOptions) -> Result<(Family, Vec<Quarantined>)> {
    if opts.n < 2 {
        return Err(Error::invalid("rank must be at least 2"));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let header = rdr.headers()?.clone();
    let n = opts.n;
    let (mu_col, ktype_col, layouts, cols) = parse_header(&header, n)?;
    let primes: Vec<u64> = layouts.iter().map(|&(p, _)| p).collect();
    let mut forms = Vec::new();
    let mut quarantined = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let mu: f64 = field(mu_col)
            .parse()
            .ok()
            .filter(|m: &f64| *m >= 0.0 && m.is_finite())
            .ok_or_else(|| Error::Parse { line, message: format!("bad mu {:?}", field(mu_col)) })?;
        let ktype = match ktype_col {
            Some(i) if field(i) == "any" => None,
            Some(i) => Some(KType::from_str(field(i)).map_err(|e| Error::Parse { line, message: e.to_string() })?),
            None => None,
        };
        let mut params = BTreeMap::new();
        let mut reason = None;
        for &(p, layout) in &layouts {
            let mut values = vec![Complex64::new(0.0, 0.0); if layout == PrimeLayout::Eigenvalues { n - 1 } else { n }];
            let mut logabs = vec![0.0f64; n];
            for c in cols.iter().filter(|c| c.prime == p) {
                let text = field(c.index);
                let bad = || Error::Parse { line, message: format!("bad value {text:?} in column {}", &header[c.index]) };
                match c.kind {
                    ColKind::Lambda => values[c.t - 1] = parse_complex(text).ok_or_else(bad)?,
                    ColKind::Theta => values[c.t - 1] = Complex64::new(text.parse().map_err(|_| bad())?, 0.0),
                    ColKind::LogAbs => logabs[c.t - 1] = text.parse().map_err(|_| bad())?,
                }
            }
            let parameter = match layout {
                PrimeLayout::Eigenvalues => satake_params_from_eigenvalues(&values, p).map(|ex| ex.parameter),
                PrimeLayout::Parameters { .. } => SatakeParameter::new(
                    values.iter().zip(&logabs).map(|(t, r)| Complex64::from_polar(r.exp(), t.re)).collect(),
                ),
            };
            match parameter {
                Ok(u) if opts.strict_tempered && !u.is_tempered(DEFAULT_TEMPERED_TOL) => {
                    reason = Some(format!("parameter at p = {p} is not tempered"));
                    break;
                }
                Ok(u) => {
                    params.insert(p, u);
                }
                Err(e) => {
                    reason = Some(format!("extraction at p = {p} failed: {e}"));
                    break;
                }
            }
        }
        match reason {
            Some(reason) => quarantined.push(Quarantined { line, reason }),
            None => forms.push(SyntheticForm { mu, ktype, params }),
        }
    }
    forms.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    let mu = forms.last().map_or(0.0, |f| f.mu);
    let sigma = match forms.first().and_then(|f| f.ktype) {
        Some(k) if forms.iter().all(|f| f.ktype == Some(k)) => Some(k),
        _ => None,
    };
    let family = Family {
        n: opts.n,
        mu,
        sigma,
        primes,
        represented: forms.len() as u64,
        forms,
        provenance: Provenance::Ingested { path: path.display().to_string() },
    };
    Ok((family, quarantined))
}

/// CSV dump: `mu, ktype`, then `theta_p_i` and, when some parameter is off
/// the unit torus, `logabs_p_i`.
pub fn write_family_csv(fam: &Family, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let with_moduli = fam.non_tempered() > 0;
    let mut header = vec!["mu".to_string(), "ktype".to_string()];
    for p in &fam.primes {
        header.extend((1..=fam.n).map(|i| format!("theta_{p}_{i}")));
    }
    if with_moduli {
        for p in &fam.primes {
            header.extend((1..=fam.n).map(|i| format!("logabs_{p}_{i}")));
        }
    }
    w.write_record(&header)?;
    for f in &fam.forms {
        let mut row = vec![f.mu.to_string(), f.ktype.map_or_else(|| "any".to_string(), |k| k.to_string())];
        for p in &fam.primes {
            let u = f.params.get(p).ok_or(Error::MissingPrime(*p))?;
            row.extend(u.angles().iter().map(|t| t.to_string()));
        }
        if with_moduli {
            for p in &fam.primes {
                row.extend(f.params[p].log_moduli().iter().map(|t| t.to_string()));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub exponent: u32,
    /// Least-squares `C` in `#{mu_j <= t} ~ C t^e`.
    pub constant: f64,
    pub max_abs_residual: f64,
}

/// Fits the leading constant of the counting function, sampled at the
/// midpoint `j - 1/2` of each jump.
pub fn fit_leading_constant(fam: &Family, exponent: u32) -> Result<FitReport> {
    if fam.forms.is_empty() {
        return Err(Error::invalid("cannot fit an empty family"));
    }
    let pts: Vec<(f64, f64)> = fam
        .forms
        .iter()
        .enumerate()
        .map(|(j, f)| (f.mu.powi(exponent as i32), j as f64 + 0.5))
        .collect();
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x * y, b + x * x));
    if den == 0.0 {
        return Err(Error::invalid("all spectral parameters vanish"));
    }
    let constant = num / den;
    let max_abs_residual = pts.iter().map(|(x, y)| (y - constant * x).abs()).fold(0.0, f64::max);
    Ok(FitReport { exponent, constant, max_abs_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn ingest(text: &str, n: usize, strict: bool) -> Result<(Family, Vec<Quarantined>)> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eig.csv");
        fs::write(&path, text).unwrap();
        ingest_dataset(&path, &IngestOptions { n, strict_tempered: strict })
    }

    #[test]
    fn empty_and_simple_rows() {
        let (fam, q) = ingest("mu,lambda_3_1\n", 2, false).unwrap();
        assert!(fam.is_empty() && q.is_empty());
        let (fam, _) = ingest("mu,lambda_3_1\n10,0\n", 2, false).unwrap();
        let u = &fam.forms[0].params[&3];
        assert!((u.values()[0] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((u.values()[1] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn non_tempered_rows() {
        let text = "mu,lambda_3_1\n10,4\n12,1\n";
        let (fam, q) = ingest(text, 2, true).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(q, vec![Quarantined { line: 2, reason: "parameter at p = 3 is not tempered".into() }]);
        let (fam, q) = ingest(text, 2, false).unwrap();
        assert!(q.is_empty());
        assert_eq!(fam.non_tempered(), 1);
        let mut out = Vec::new();
        write_family_csv(&fam, &mut out).unwrap();
        let dump = String::from_utf8(out).unwrap();
        assert!(dump.starts_with("mu,ktype,theta_3_1,theta_3_2,logabs_3_1,logabs_3_2\n"));

        let (back, q) = ingest(&dump, 2, false).unwrap();
        assert!(q.is_empty());
        assert_eq!(back.non_tempered(), 1);
        for (a, b) in fam.forms.iter().zip(&back.forms) {
            assert_eq!(a.ktype, b.ktype);
            assert!(a.params[&3].distance(&b.params[&3]) < 1e-12);
        }
        let (_, q) = ingest(&dump, 2, true).unwrap();
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn diagnostics() {
        assert!(matches!(ingest("mu,lambda_3_1\n10,x\n", 2, false), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(ingest("mu,lambda_4_1\n", 2, false), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(ingest("lambda_3_1\n", 2, false), Err(Error::Parse { line: 1, .. })));
        // Rank three needs both lambda_p_1 and lambda_p_2.
        assert!(ingest("mu,lambda_2_1\n", 3, false).is_err());
        assert!(ingest("mu,lambda_2_2\n", 2, false).is_err());
        assert!(ingest("mu,theta_2_1\n", 2, false).is_err());
        assert!(ingest("mu,theta_2_1,theta_2_2,lambda_2_1\n", 2, false).is_err());
        let (_, q) = ingest("mu,theta_2_1,theta_2_2\n1,0.5,0.5\n", 2, false).unwrap();
        assert_eq!(q.len(), 1, "angles must sum to zero");
        let (fam, _) = ingest("mu,ktype,lambda_2_1,lambda_2_2\n3,dim2,1+1i,1-1i\n", 3, false).unwrap();
        assert_eq!(fam.sigma, Some(KType::Dim2));
    }

    #[test]
    fn leading_constant_fit() {
        let forms = (1..=200)
            .map(|j| SyntheticForm { mu: ((j as f64 - 0.5) / 3.0).sqrt(), ktype: None, params: BTreeMap::new() })
            .collect();
        let fam = Family {
            n: 2,
            mu: 10.0,
            sigma: None,
            primes: vec![],
            represented: 200,
            forms,
            provenance: Provenance::Synthetic { seed: 0 },
        };
        let fit = fit_leading_constant(&fam, 2).unwrap();
        assert!((fit.constant - 3.0).abs() < 1e-9, "{fit:?}");
        assert!(fit.max_abs_residual < 1e-9);
    }
}
