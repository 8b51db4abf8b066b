//! Suite implementations and their artifact writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hspec_core::fock::{fock_norm, split_contraction_trace};
use hspec_core::restrict::{
    compare_moduli, double_orthogonality, gram_matrix, semigroup_deformation, top_eigenpairs,
    DeformationTable, EigenPair,
};
use hspec_core::spectra::{fit_k, singular_values, SingularSpectrum};
use hspec_core::wco::{build_wco, compose_check};
use hspec_core::HoloMap64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Resolved;

/// One invariant check in the suite summary.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub invariant: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(invariant: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check { invariant: invariant.into(), pass, detail: detail.into() }
    }
}

pub fn write_manifest(out: &Path, suite: &str, r: &Resolved) -> anyhow::Result<()> {
    let canonical = serde_json::to_string(&r.config)?;
    let hash = format!("{:x}", Sha256::digest(canonical.as_bytes()));
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "suite": suite,
        "input_sha256": hash,
        "resolved": { "n_c": r.n_c, "n_r": r.n_r, "m": r.m,
                      "t_grid": r.t_grid, "threshold": r.threshold },
        "config": serde_json::to_value(&r.config)?,
    });
    let f = File::create(out.join("manifest.json"))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_summary(out: &Path, checks: &[Check]) -> anyhow::Result<()> {
    let f = File::create(out.join("summary.json"))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, checks)?;
    w.write_all(b"\n")?;
    for c in checks {
        println!(
            "{} {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.invariant,
            c.detail
        );
    }
    Ok(())
}

fn spectrum_csv(path: &Path, spec: &SingularSpectrum<f64>) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "n,s_n,stab_n,trusted")?;
    for (k, s) in spec.values.iter().enumerate() {
        writeln!(
            w,
            "{},{:.17e},{:.17e},{}",
            k + 1,
            s,
            spec.stab[k],
            u8::from(spec.trusted(k))
        )?;
    }
    Ok(())
}

fn eigenpairs_csv(path: &Path, pairs: &[EigenPair<f64>]) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "n,lambda,residual,trusted,degenerate")?;
    for (k, p) in pairs.iter().enumerate() {
        writeln!(
            w,
            "{},{:.17e},{:.17e},{},{}",
            k + 1,
            p.lambda,
            p.residual,
            u8::from(p.trusted),
            u8::from(p.degenerate)
        )?;
    }
    Ok(())
}

fn eigenfunction_json(path: &Path, pair: &EigenPair<f64>) -> anyhow::Result<()> {
    let coeffs: Vec<[f64; 2]> = pair.f.coeffs.iter().map(|z| [z.re, z.im]).collect();
    let doc = serde_json::json!({ "lambda": pair.lambda, "coeffs": coeffs });
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &doc)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn deformation_csv(path: &Path, table: &DeformationTable<f64>) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,n,s_n,lambda_n,zero_count,trusted")?;
    for row in &table.rows {
        for (k, s) in row.spectrum.values.iter().enumerate() {
            let lambda = row
                .pairs
                .get(k)
                .map(|p| format!("{:.17e}", p.lambda))
                .unwrap_or_default();
            let zeros = row
                .zero_counts
                .get(k)
                .and_then(|z| *z)
                .map(|z| z.to_string())
                .unwrap_or_default();
            writeln!(
                w,
                "{:.17e},{},{:.17e},{},{},{}",
                row.t,
                k + 1,
                s,
                lambda,
                zeros,
                u8::from(row.spectrum.trusted(k))
            )?;
        }
    }
    Ok(())
}

pub fn singular(r: &Resolved, out: &Path) -> anyhow::Result<Vec<Check>> {
    let w = build_wco(&r.map, r.n_c, r.n_r, r.m)?;
    let spec = singular_values(&w)?;
    spectrum_csv(&out.join("spectrum.csv"), &spec)?;
    let mut csv = BufWriter::new(File::create(out.join("matrix.csv"))?);
    w.write_csv(&mut csv)?;
    w.write_binary_file(&out.join("matrix.hspm"))?;

    let mut checks = Vec::new();
    let descending = spec.values.windows(2).all(|p| p[1] <= p[0] + 1e-14);
    checks.push(Check::new("singular values descending", descending, ""));
    let nonneg = spec.values.iter().all(|s| *s >= 0.0);
    checks.push(Check::new("singular values non-negative", nonneg, ""));
    let k_hat = fit_k(&spec);
    let bound_ok = spec
        .trusted_values()
        .iter()
        .filter(|(n, _)| *n >= 4)
        .all(|(n, s)| *s <= 1.0 + k_hat / *n as f64 + 1e-6);
    checks.push(Check::new(
        "trusted s_n <= 1 + K/n",
        bound_ok,
        format!("fitted K = {k_hat:.6}"),
    ));
    Ok(checks)
}

pub fn fock(r: &Resolved, out: &Path) -> anyhow::Result<Vec<Check>> {
    let w = build_wco(&r.map, r.n_c, r.n_r, r.m)?;
    let spec = singular_values(&w)?;
    spectrum_csv(&out.join("spectrum.csv"), &spec)?;
    let report = fock_norm(&spec);
    let mut f = BufWriter::new(File::create(out.join("fock.json"))?);
    serde_json::to_writer_pretty(&mut f, &report)?;
    f.write_all(b"\n")?;

    let mut checks = Vec::new();
    let modulus = w.modulus()?;
    let (a, x) = split_contraction_trace(&modulus)?;
    let recon = ((&a.mat + &x.mat) - &modulus.mat).norm();
    checks.push(Check::new(
        "trichotomy split reconstructs |W|",
        recon <= 1e-10,
        format!("error {recon:.3e}"),
    ));
    let a_norm = a.operator_norm()?;
    checks.push(Check::new(
        "contraction part has norm <= 1",
        a_norm <= 1.0 + 1e-8,
        format!("||A|| = {a_norm:.12}"),
    ));
    let mut excess = 0.0;
    let mut bounded = true;
    for (k, p) in report.partial_products.iter().enumerate() {
        excess += (spec.values[k] - 1.0).max(0.0);
        bounded &= *p <= excess.exp() + 1e-12;
    }
    checks.push(Check::new(
        "partial products below exp(sum (s_n - 1)+)",
        bounded,
        format!("verdict {:?}", report.verdict),
    ));
    Ok(checks)
}

pub fn restrict(r: &Resolved, out: &Path) -> anyhow::Result<Vec<Check>> {
    let g = gram_matrix(&r.map, r.n_c, r.m)?;
    let worst = compare_moduli(&r.map, r.n_c, r.m)?;
    let pairs = top_eigenpairs(&g, r.threshold)?;
    eigenpairs_csv(&out.join("eigenpairs.csv"), &pairs)?;
    for (k, p) in pairs.iter().enumerate() {
        eigenfunction_json(&out.join(format!("eigenfunction_{}.json", k + 1)), p)?;
    }

    let mut checks = Vec::new();
    checks.push(Check::new(
        "Gram eigenvalues match squared singular values",
        worst <= 1e-6,
        format!("max relative mismatch {worst:.3e}"),
    ));
    let residual_ok = pairs.iter().all(|p| p.residual <= 1e-8);
    checks.push(Check::new(
        "eigenpair residuals below 1e-8",
        residual_ok,
        format!("{} pairs above threshold {}", pairs.len(), r.threshold),
    ));
    let trusted: Vec<EigenPair<f64>> =
        pairs.iter().filter(|p| p.trusted).cloned().collect();
    if trusted.len() >= 2 {
        let (res_v, res_u) = double_orthogonality(&trusted, &r.map, r.m)?;
        checks.push(Check::new(
            "double orthogonality",
            res_v <= 1e-6 && res_u <= 1e-6,
            format!("resV {res_v:.3e}, resU {res_u:.3e}"),
        ));
        let simple = trusted.windows(2).all(|w| w[0].lambda - w[1].lambda > 1e-8);
        checks.push(Check::new("trusted eigenvalues simple", simple, ""));
    }
    Ok(checks)
}

pub fn fisher(r: &Resolved, out: &Path) -> anyhow::Result<Vec<Check>> {
    let table = semigroup_deformation(&r.map, &r.t_grid, r.n_c, r.m, r.threshold)?;
    deformation_csv(&out.join("deformation.csv"), &table)?;
    if let Some(last) = table.rows.last() {
        for (k, p) in last.pairs.iter().enumerate() {
            eigenfunction_json(&out.join(format!("eigenfunction_{}.json", k + 1)), p)?;
        }
    }
    let mut checks = Vec::new();
    checks.push(Check::new(
        "interior deformations: eigenfunction n has n zeros",
        table.compact_counts_ok,
        "",
    ));
    checks.push(Check::new(
        "boundary case: zero count at most the index",
        table.contact_counts_ok,
        "",
    ));
    if let Some(last) = table.rows.last() {
        let trusted: Vec<&EigenPair<f64>> =
            last.pairs.iter().filter(|p| p.trusted).collect();
        let simple = trusted.windows(2).all(|w| w[0].lambda - w[1].lambda > 1e-8);
        checks.push(Check::new(
            "trusted eigenvalues at t = 1 are simple",
            simple,
            format!("{} trusted pairs", trusted.len()),
        ));
    }
    Ok(checks)
}

pub fn semigroup(r: &Resolved, out: &Path) -> anyhow::Result<Vec<Check>> {
    let table = semigroup_deformation(&r.map, &r.t_grid, r.n_c, r.m, r.threshold)?;
    deformation_csv(&out.join("deformation.csv"), &table)?;
    let mut checks = Vec::new();
    checks.push(Check::new(
        "trusted s_n non-decreasing in t",
        table.monotone_ok,
        "",
    ));
    // Semigroup functoriality: phi_t = phi o scale(t), so the operator
    // factors as W_{scale(t)} W_phi up to truncation.
    let t0 = r.t_grid[0];
    let n = std::cmp::min(r.n_c, 32);
    let discrepancy = compose_check(&HoloMap64::scale(t0), &r.map, n, 4 * n)?;
    checks.push(Check::new(
        "composition functoriality of the deformation",
        discrepancy <= 1e-6,
        format!("t = {t0}, discrepancy {discrepancy:.3e}"),
    ));
    Ok(checks)
}
