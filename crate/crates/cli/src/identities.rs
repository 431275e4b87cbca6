use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use spingeo_core::algebra::{build_dirac_basis, verify_basis, ComplexMatrix4, DiracBasis};
use spingeo_core::io::{parse_json, read_text, to_json, write_text};
use spingeo_core::report::IdentityReport;
use spingeo_core::suites::{bilinear_suite, lorentz_suite, majorana_suite, tetrad_suite};
use spingeo_core::{Error, Result};

use crate::{Outcome, RunConfig};

type MatrixDoc = [[[f64; 2]; 4]; 4];

/// Replacement matrices for the reference basis; absent entries keep the
/// built-in value. `swap_alpha` exchanges two of `alpha_1..alpha_3`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisDoc {
    alpha: Option<Vec<MatrixDoc>>,
    rho: Option<Vec<MatrixDoc>>,
    sigma: Option<Vec<MatrixDoc>>,
    beta: Option<MatrixDoc>,
    gamma5: Option<MatrixDoc>,
    charge_conj: Option<MatrixDoc>,
    swap_alpha: Option<[usize; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdentitiesDoc {
    #[serde(default = "default_samples")]
    n_samples: usize,
    #[serde(default = "default_small")]
    lorentz_samples: usize,
    #[serde(default = "default_small")]
    tetrad_samples: usize,
    #[serde(default = "default_small")]
    majorana_samples: usize,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    basis: Option<BasisDoc>,
}

fn default_samples() -> usize {
    10_000
}

fn default_small() -> usize {
    1_000
}

fn matrix(m: &MatrixDoc) -> ComplexMatrix4 {
    ComplexMatrix4::from_fn(|i, j| Complex64::new(m[i][j][0], m[i][j][1]))
}

fn matrices<const N: usize>(v: &[MatrixDoc], name: &str) -> Result<[ComplexMatrix4; N]> {
    if v.len() != N {
        return Err(Error::Format(format!("basis.{name} needs {N} matrices, got {}", v.len())));
    }
    Ok(std::array::from_fn(|i| matrix(&v[i])))
}

fn apply_overrides(doc: &BasisDoc) -> Result<DiracBasis> {
    let mut b = build_dirac_basis();
    if let Some(v) = &doc.alpha {
        b.alpha = matrices::<4>(v, "alpha")?;
    }
    if let Some(v) = &doc.rho {
        b.rho = matrices::<3>(v, "rho")?;
    }
    if let Some(v) = &doc.sigma {
        b.sigma = matrices::<3>(v, "sigma")?;
    }
    if let Some(m) = &doc.beta {
        b.beta = matrix(m);
    }
    if let Some(m) = &doc.gamma5 {
        b.gamma5 = matrix(m);
    }
    if let Some(m) = &doc.charge_conj {
        b.charge_conj = matrix(m);
    }
    if let Some([i, j]) = doc.swap_alpha {
        if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
            return Err(Error::Format("swap_alpha indices must be 1, 2 or 3".into()));
        }
        b.alpha.swap(i, j);
    }
    Ok(b)
}

#[derive(Serialize)]
struct CheckLine {
    name: String,
    max_residual: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SuiteReport {
    suite: &'static str,
    samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    degenerate_samples: Option<usize>,
    checks: Vec<CheckLine>,
}

#[derive(Serialize)]
struct Report {
    seed: u64,
    n_samples: usize,
    suites: Vec<SuiteReport>,
    failing: Vec<String>,
    pass: bool,
}

fn suite(
    config: &RunConfig,
    name: &'static str,
    samples: usize,
    default_tol: f64,
    report: IdentityReport,
) -> SuiteReport {
    let mut degenerate = None;
    let checks = report
        .checks
        .iter()
        .filter_map(|c| {
            if c.name == "degenerate_samples" {
                degenerate = Some(c.max_violation as usize);
                return None;
            }
            // the reciprocal relations have a tighter default than orthonormality
            let fallback = if c.name.starts_with("reciprocal") { default_tol.min(1e-10) } else { default_tol };
            let tol = config.tolerance(&[c.name.as_str(), name], fallback);
            Some(CheckLine {
                name: c.name.clone(),
                max_residual: c.max_violation,
                tolerance: tol,
                pass: c.max_violation <= tol,
            })
        })
        .collect();
    SuiteReport { suite: name, samples, degenerate_samples: degenerate, checks }
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let doc: IdentitiesDoc = parse_json(&read_text(&config.input)?)?;
    let seed = config.seed.or(doc.seed).unwrap_or(0);
    let basis = apply_overrides(&doc.basis.unwrap_or_default())?;

    let suites = vec![
        suite(config, "basis", 1, 1e-14, verify_basis(&basis)),
        suite(config, "bilinear", doc.n_samples, 1e-12, bilinear_suite(seed, doc.n_samples)),
        suite(config, "lorentz", doc.lorentz_samples, 1e-10, lorentz_suite(seed, doc.lorentz_samples)),
        suite(config, "tetrad", doc.tetrad_samples, 1e-9, tetrad_suite(seed, doc.tetrad_samples)),
        suite(config, "majorana", doc.majorana_samples, 1e-12, majorana_suite(seed, doc.majorana_samples)),
    ];
    let failing: Vec<String> = suites
        .iter()
        .flat_map(|s| s.checks.iter().filter(|c| !c.pass).map(move |c| format!("{}.{}", s.suite, c.name)))
        .collect();
    let report = Report { seed, n_samples: doc.n_samples, pass: failing.is_empty(), failing, suites };
    write_text(&config.output, &to_json(&report))?;
    if report.pass {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::Fail(format!("failing identities: {}", report.failing.join(", "))))
    }
}
