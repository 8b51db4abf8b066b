//! Built-in oracle checks: one documented example per operation, at small
//! sizes, runnable without any configuration.

use hspec_core::coeffs::{
    default_grid_size, kernel, normalized_kernel, taylor_coeffs, BoundaryGrid, CoeffVec,
};
use hspec_core::corpus::corpus;
use hspec_core::fock::{
    exterior_power, fock_norm, lambda_norm_formula_check, split_contraction_trace, FockVerdict,
};
use hspec_core::linalg::{hermitian_eigen_desc, svd_values};
use hspec_core::map::{boundary_peak, has_boundary_contact, validate, HoloMap, MapSpec, Prim};
use hspec_core::quad::{gauss_legendre, integrate_log_weight, littlewood_paley_norm};
use hspec_core::restrict::{
    compare_moduli, count_zeros, double_orthogonality, eval_eigenfunction, gram_matrix,
    semigroup_deformation, top_eigenpairs,
};
use hspec_core::spectra::{
    essential_norm_estimate, fit_k, julia_caratheodory_probe, schwarz_pick_check, singular_values,
};
use hspec_core::wco::{
    adjoint_kernel_action, build_proof_split, build_shift_integral, build_wco, compose_check,
    psi_sup_norm, OperatorMatrix,
};
use num_complex::Complex;

type C = Complex<f64>;
type CheckFn = fn() -> Result<(), String>;

fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

fn ensure(cond: bool, detail: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(detail.into())
    }
}

fn near(a: f64, b: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((a - b).abs() < tol, format!("{what}: {a} vs {b}"))
}

fn half_shift() -> HoloMap<f64> {
    HoloMap::new(vec![Prim::Poly(vec![c(0.5, 0.0), c(0.5, 0.0)])], 1)
}

fn map_checks() -> Result<(), String> {
    let s = HoloMap::scale(0.5);
    near(s.eval(c(0.6, 0.0)).map_err(|e| e.to_string())?.re, 0.3, 1e-15, "eval")?;
    near(s.derivative(c(0.2, 0.1)).map_err(|e| e.to_string())?.re, 0.5, 1e-15, "derivative")?;
    let cusp = HoloMap::new(
        vec![Prim::Poly(vec![c(0.0, 0.0), c(1.0 / 1.4, 0.0), c(0.4 / 1.4, 0.0)])],
        1,
    );
    near(
        cusp.second_derivative(c(0.0, 0.0)).map_err(|e| e.to_string())?.re,
        0.8 / 1.4,
        1e-14,
        "second derivative",
    )?;
    let sq = s.sqrt_derivative(c(0.3, 0.0)).map_err(|e| e.to_string())?;
    near(sq.re, 0.5f64.sqrt(), 1e-14, "sqrt derivative")?;
    let psi = s.psi(c(0.3, 0.2)).map_err(|e| e.to_string())?;
    ensure(psi.norm() < 1e-14, "psi of an affine map must vanish")?;
    let comp = s.then(&HoloMap::scale(0.4)).map_err(|e| e.to_string())?;
    near(comp.eval(c(1.0, 0.0)).map_err(|e| e.to_string())?.re, 0.2, 1e-15, "then")?;
    let report = validate(&half_shift(), 512).map_err(|e| e.to_string())?;
    ensure(report.max_boundary_modulus <= 1.0 + 1e-12, "validate")?;
    let (peak, _) = boundary_peak(&s, 512).map_err(|e| e.to_string())?;
    near(peak, 0.5, 1e-12, "boundary peak")?;
    ensure(
        has_boundary_contact(&half_shift(), 1024).map_err(|e| e.to_string())?,
        "contact detection",
    )?;
    ensure(
        !has_boundary_contact(&s, 1024).map_err(|e| e.to_string())?,
        "no-contact detection",
    )?;
    let spec = MapSpec::from_map(&s);
    let back: HoloMap<f64> = spec.to_map().map_err(|e| e.to_string())?;
    near(back.eval(c(0.6, 0.0)).map_err(|e| e.to_string())?.re, 0.3, 1e-15, "JSON round trip")
}

fn coeffs_checks() -> Result<(), String> {
    let m = 64usize;
    let samples: Vec<C> = (0..m)
        .map(|j| Complex::from_polar(1.0, 3.0 * std::f64::consts::TAU * j as f64 / m as f64))
        .collect();
    let f = taylor_coeffs(&samples, 8).map_err(|e| e.to_string())?;
    ensure((f.coeffs[3] - c(1.0, 0.0)).norm() < 1e-13, "taylor coefficients of e^{3 i theta}")?;
    let k = kernel(c(0.0, 0.0), c(0.4, 0.2)).map_err(|e| e.to_string())?;
    ensure((k - c(1.0, 0.0)).norm() < 1e-15, "kernel at the origin")?;
    let nk = normalized_kernel(c(0.5, 0.0), 256).map_err(|e| e.to_string())?;
    near(nk.norm(), (1.0 - 0.25f64.powi(256)).sqrt(), 1e-12, "normalized kernel norm")?;
    let grid = BoundaryGrid::new(&half_shift(), 256).map_err(|e| e.to_string())?;
    for j in [0usize, 63, 150] {
        let sq = grid.sqrt_dphi[j];
        ensure((sq * sq - grid.dphi[j]).norm() < 1e-12, "grid sqrt branch")?;
    }
    ensure(default_grid_size(32) >= 1024, "default grid size floor")
}

fn quad_checks() -> Result<(), String> {
    let (_, ws) = gauss_legendre::<f64>(12);
    near(ws.iter().sum::<f64>(), 2.0, 1e-13, "Gauss-Legendre weights")?;
    let moment = 4.0 * integrate_log_weight(|r: f64| r.powi(5), 16);
    near(moment, 1.0 / 9.0, 1e-12, "log-weight moment")?;
    let f = CoeffVec::<f64>::basis(7, 8);
    near(littlewood_paley_norm(&f, 16), 1.0, 1e-10, "area-integral norm of z^7")
}

fn linalg_checks() -> Result<(), String> {
    let m = nalgebra_diag(&[3.0, 2.0, 1.0]);
    let vals = svd_values(&m).map_err(|e| e.to_string())?;
    near(vals[0], 3.0, 1e-13, "svd of a diagonal")?;
    let (e, _) = hermitian_eigen_desc(&m).map_err(|e| e.to_string())?;
    near(e[2], 1.0, 1e-13, "Hermitian eigenvalues")
}

fn nalgebra_diag(d: &[f64]) -> nalgebra::DMatrix<C> {
    nalgebra::DMatrix::from_fn(d.len(), d.len(), |i, j| {
        if i == j { c(d[i], 0.0) } else { c(0.0, 0.0) }
    })
}

fn wco_checks() -> Result<(), String> {
    let w = build_wco(&HoloMap::<f64>::identity(), 8, 16, 1024).map_err(|e| e.to_string())?;
    ensure((w.mat[(3, 3)] - c(1.0, 0.0)).norm() < 1e-13, "identity operator")?;
    let a = build_shift_integral::<f64>(8, 9).map_err(|e| e.to_string())?;
    let s = svd_values(&a.mat).map_err(|e| e.to_string())?;
    near(s[1], 0.5, 1e-14, "shift-integral singular values")?;
    let cusp = HoloMap::new(
        vec![Prim::Poly(vec![c(0.0, 0.0), c(1.0 / 1.4, 0.0), c(0.4 / 1.4, 0.0)])],
        1,
    );
    let (t, x) = build_proof_split(&cusp, 16, 64, 1024).map_err(|e| e.to_string())?;
    ensure(t.operator_norm().map_err(|e| e.to_string())? <= 1.0 + 1e-6, "||T|| <= 1")?;
    let psi_sup = psi_sup_norm(&cusp, 1024).map_err(|e| e.to_string())?;
    let sx = svd_values(&x.mat).map_err(|e| e.to_string())?;
    ensure(sx[0] <= psi_sup + 1e-6, "s_1(X) <= psi sup")?;
    near(psi_sup_norm(&HoloMap::scale(0.5), 512).map_err(|e| e.to_string())?, 0.0, 1e-14, "psi of affine")?;
    let d = compose_check(&HoloMap::scale(0.8), &HoloMap::scale(0.5), 16, 64)
        .map_err(|e| e.to_string())?;
    ensure(d <= 1e-8, format!("composition discrepancy {d:.3e}"))?;
    let (pred, comp) = adjoint_kernel_action(&HoloMap::scale(0.5), c(0.0, 0.0), 8)
        .map_err(|e| e.to_string())?;
    ensure(
        (pred.coeffs[0] - comp.coeffs[0]).norm() < 1e-12,
        "adjoint kernel action at the origin",
    )?;
    // Modulus and gram agree: |W|^2 = W^H W.
    let w = build_wco(&HoloMap::scale(0.5), 8, 32, 1024).map_err(|e| e.to_string())?;
    let modulus = w.modulus().map_err(|e| e.to_string())?;
    let gram = w.gram();
    ensure(
        (&modulus.mat * &modulus.mat - &gram.mat).norm() < 1e-12,
        "modulus squares to the gram",
    )?;
    let mut buf = Vec::new();
    w.write_binary(&mut buf).map_err(|e| e.to_string())?;
    let back = OperatorMatrix::<f64>::read_binary(&mut buf.as_slice()).map_err(|e| e.to_string())?;
    ensure(back.mat == w.mat, "binary round trip")?;
    let mut csv = Vec::new();
    w.write_csv(&mut csv).map_err(|e| e.to_string())?;
    ensure(!csv.is_empty(), "csv export")
}

fn spectra_checks() -> Result<(), String> {
    let w = build_wco(&HoloMap::scale(0.5), 16, 64, 1024).map_err(|e| e.to_string())?;
    let spec = singular_values(&w).map_err(|e| e.to_string())?;
    near(spec.values[0], 0.5f64.sqrt(), 1e-13, "diagonal oracle s_1")?;
    near(spec.values[1], 0.35355339059327376, 1e-12, "diagonal oracle s_2")?;
    near(fit_k(&spec), 0.0, 1e-15, "K of a strict contraction")?;
    let mobius = HoloMap::new(vec![Prim::Mobius { a: c(0.3, 0.0), theta: 0.0 }], 1);
    let est = essential_norm_estimate(&mobius, &[16, 32, 64]).map_err(|e| e.to_string())?;
    near(est.estimate, 1.0, 1e-6, "essential norm of an automorphism")?;
    let sp = schwarz_pick_check(&HoloMap::<f64>::identity(), 200).map_err(|e| e.to_string())?;
    near(sp.max_quotient, 1.0, 1e-12, "Schwarz-Pick identity case")?;
    let probe = julia_caratheodory_probe(&HoloMap::<f64>::identity(), &[0.9, 0.99])
        .map_err(|e| e.to_string())?;
    near(probe.quotients[1], 1.0, 1e-12, "Julia quotient of the identity")
}

fn fock_checks() -> Result<(), String> {
    let m = OperatorMatrix::new(nalgebra_diag(&[3.0, 2.0, 1.0]));
    let e2 = exterior_power(&m, 2).map_err(|e| e.to_string())?;
    near(
        e2.operator_norm().map_err(|e| e.to_string())?,
        6.0,
        1e-12,
        "exterior power of a diagonal",
    )?;
    let (lhs, rhs) = lambda_norm_formula_check(&m, 2).map_err(|e| e.to_string())?;
    near(lhs, rhs, 1e-12, "norm-product formula")?;
    let w = build_wco(&HoloMap::scale(0.5), 16, 64, 1024).map_err(|e| e.to_string())?;
    let report = fock_norm(&singular_values(&w).map_err(|e| e.to_string())?);
    ensure(
        report.verdict == FockVerdict::BoundedTrivially,
        "contraction Fock norm verdict",
    )?;
    let (a, x) = split_contraction_trace(&OperatorMatrix::new(nalgebra_diag(&[1.5, 0.5])))
        .map_err(|e| e.to_string())?;
    near(a.mat[(0, 0)].re, 1.0, 1e-13, "contraction part")?;
    near(x.mat[(0, 0)].re, 0.5, 1e-13, "trace part")
}

fn restrict_checks() -> Result<(), String> {
    let map = HoloMap::scale(0.5);
    let g = gram_matrix(&map, 8, 128).map_err(|e| e.to_string())?;
    near(g.mat[(2, 2)].re, 0.5f64.powi(5), 1e-13, "Gram diagonal")?;
    let id = gram_matrix(&HoloMap::<f64>::identity(), 8, 128).map_err(|e| e.to_string())?;
    near(id.mat[(5, 5)].re, 1.0, 1e-13, "Gram of the identity")?;
    let worst = compare_moduli(&map, 16, 256).map_err(|e| e.to_string())?;
    ensure(worst <= 1e-10, format!("modulus identity mismatch {worst:.3e}"))?;
    let pairs = top_eigenpairs(&g, 0.0).map_err(|e| e.to_string())?;
    near(pairs[1].lambda, 0.5f64.powi(3), 1e-13, "eigenvalue oracle")?;
    let (res_v, res_u) = double_orthogonality(&pairs, &map, 128).map_err(|e| e.to_string())?;
    ensure(res_v <= 1e-10 && res_u <= 1e-10, "double orthogonality")?;
    let (direct, boot) =
        eval_eigenfunction(&pairs[0], c(0.3, 0.0), &map, 1024).map_err(|e| e.to_string())?;
    ensure((direct - boot).norm() < 1e-10, "bootstrap evaluation")?;
    let zc = count_zeros(&CoeffVec::<f64>::basis(3, 4), 0.9).map_err(|e| e.to_string())?;
    ensure(zc.count == 3, "argument-principle count")?;
    let table = semigroup_deformation(&HoloMap::<f64>::identity(), &[0.8, 1.0], 8, 128, 1.001)
        .map_err(|e| e.to_string())?;
    ensure(
        table.monotone_ok && table.compact_counts_ok && table.contact_counts_ok,
        "deformation scan of the identity",
    )
}

fn corpus_checks() -> Result<(), String> {
    let entries = corpus::<f64>();
    ensure(entries.iter().filter(|e| e.contact).count() >= 3, "contact maps")?;
    ensure(entries.iter().filter(|e| !e.contact).count() >= 3, "non-contact maps")?;
    for e in &entries {
        let ok = has_boundary_contact(&e.map, 2048).map_err(|e| e.to_string())?;
        ensure(ok == e.contact, format!("contact tag for {}", e.name))?;
    }
    Ok(())
}

/// Run every check; returns the number of failures.
pub fn run() -> usize {
    let checks: Vec<(&str, CheckFn)> = vec![
        ("holomorphic maps", map_checks),
        ("coefficients and grids", coeffs_checks),
        ("quadrature", quad_checks),
        ("linear algebra", linalg_checks),
        ("operator construction", wco_checks),
        ("spectra", spectra_checks),
        ("second quantization", fock_checks),
        ("restriction operator", restrict_checks),
        ("corpus", corpus_checks),
    ];
    let mut failures = 0;
    for (name, f) in checks {
        match f() {
            Ok(()) => println!("PASS selftest {name}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL selftest {name}: {detail}");
            }
        }
    }
    failures
}
