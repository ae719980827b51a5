//! The default verification suite: a fixed, deterministic battery of
//! desk-scale checks over the spectral core, the symbol checkers, the
//! atoms and the moment/equivalence harnesses.  Checks run fail-soft:
//! every check executes and reports, and the suite verdict is the
//! conjunction.

use num_complex::Complex64;

use crate::atoms::{bump, default_battery, derivative_atom, omega_atom, AtomBattery};
use crate::config::RunConfig;
use crate::error::Result;
use crate::grid::{forward, inverse, make_grid, sample};
use crate::multiplier::{
    apply, check_pointwise_decay, tail_majorant, Algorithm, MultiplierPlan,
};
use crate::report::fmt_bool;
use crate::symbols::builtins::{
    one, riesz_product_default, riesz_single, sigma0, sigma1, sigma2, sigma3,
    sigma_hessian_general, smooth_test, sum_sq_1d,
};
use crate::symbols::checks::check_cancellation;
use crate::symbols::expr::SymbolExpr;
use crate::symbols::numeric::BlackBoxSymbol;
use crate::symbols::sampler::SamplerSpec;
use crate::verify::{
    equivalence_harness, identity_check, moment_lhs, moment_passes, moment_scale, weakconv_demo,
    QuadSpec,
};

use super::{base_doc, OutDir};

fn check_spectral_roundtrip() -> Result<bool> {
    let g = make_grid(1, 8.0, 256)?;
    let pi = std::f64::consts::PI;
    let f = sample(|x| (-pi * x[0] * x[0]).exp(), g)?;
    let fh = forward(&f)?;
    let mut xi = [0.0];
    let mut worst: f64 = 0.0;
    for (i, v) in fh.values.iter().enumerate() {
        g.freq_point(i, &mut xi);
        worst = worst.max((v - Complex64::new((-pi * xi[0] * xi[0]).exp(), 0.0)).norm());
    }
    let gauss_ok = worst <= 1e-8;

    let h = g.spacing();
    let dxi = g.freq_spacing();
    let phys: f64 = f.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h;
    let spec: f64 = fh.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dxi;
    let parseval_ok = (phys - spec).abs() <= 1e-10 * phys;

    let back = inverse(&fh)?;
    let rt = f
        .values
        .iter()
        .zip(&back.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    Ok(gauss_ok && parseval_ok && rt <= 1e-12)
}

fn check_symbolic_vs_fd() -> Result<bool> {
    let sym = sigma0();
    let alpha = [1u32, 1];
    let d = sym.diff(1, &alpha)?;
    let boxed = {
        let s = sym.clone();
        BlackBoxSymbol::new(sym.arity, move |p| s.evaluate(p).unwrap_or(f64::NAN))
    };
    let points: [[f64; 4]; 4] = [
        [0.3, -0.7, 0.9, 0.4],
        [1.2, 0.1, -0.5, 0.8],
        [-0.6, 0.9, 0.7, -1.1],
        [0.8, 0.8, -0.9, 0.3],
    ];
    for p in &points {
        let exact = d.evaluate(p)?;
        let fd = boxed.fd_diff(1, &alpha, p, 1e-3);
        if (exact - fd).abs() > 1e-6 * exact.abs().max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_cancellation_verdicts() -> Result<bool> {
    let sampler = SamplerSpec::default();
    let s0 = check_cancellation(&sigma0(), 0, &sampler, 1)?;
    let s2 = check_cancellation(&sigma2(), 1, &sampler, 1)?;
    let id = check_cancellation(&one(2, 2), 0, &sampler, 1)?;
    let ss = check_cancellation(&sum_sq_1d(), 1, &sampler, 1)?;
    Ok(s0.verdict && s2.verdict && !id.verdict && ss.verdict)
}

fn check_identity_bilinear() -> Result<bool> {
    let g = make_grid(1, 8.0, 512)?;
    let a1 = derivative_atom(&[2], &[0.0], 1.0)?;
    let a2 = derivative_atom(&[2], &[0.3], 0.8)?;
    let sym = smooth_test(2, 1);
    for alpha in [[0u32], [1]] {
        let rep = identity_check(
            &sym,
            &[a1.clone(), a2.clone()],
            &alpha,
            g,
            Algorithm::FftLastBlock,
            QuadSpec::default(),
            &[2.0, 2.0],
        )?;
        if !rep.pass {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_linear_moments() -> Result<bool> {
    let g = make_grid(1, 8.0, 1024)?;
    let atom = derivative_atom(&[3], &[0.0], 1.0)?;
    let sym = riesz_single(1, 0)?;
    for alpha in [[0u32], [1], [2]] {
        let lhs = moment_lhs(
            &sym,
            &[atom.clone()],
            &alpha,
            g,
            Algorithm::FftLastBlock,
            &[1.0],
        )?;
        let s = moment_scale(&[atom.clone()], &alpha, g)?;
        if !moment_passes(&lhs, s).0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Expects the cancellation verdict, the moment verdict and their
/// agreement to all match `expect`.
fn equivalence_expect(
    sym: &SymbolExpr,
    id: &str,
    battery: &AtomBattery,
    grid: crate::grid::Grid,
    expect: bool,
) -> Result<bool> {
    let rep = equivalence_harness(
        sym,
        id,
        battery,
        &SamplerSpec::default(),
        grid,
        Algorithm::FftLastBlock,
    )?;
    Ok(rep.agree && rep.cancellation.verdict == expect && rep.all_moments_pass == expect)
}

fn check_equivalence_1d() -> Result<bool> {
    let g = make_grid(1, 8.0, 1024)?;
    let battery = default_battery(2, 1, 0, &[2.0, 2.0])?;
    Ok(equivalence_expect(&sum_sq_1d(), "sum_sq_1d", &battery, g, true)?
        && equivalence_expect(&one(2, 1), "one", &battery, g, false)?)
}

/// Reduced 2-d battery: first-order-above-cap derivative atoms at both
/// radii plus one shifted center; keeps the 2-d harness desk-scale.
fn battery_2d(cap: u32, p: &[f64]) -> Result<AtomBattery> {
    let mut beta = vec![0u32; 2];
    for i in 0..cap + 1 {
        beta[(i as usize) % 2] += 1;
    }
    let tuples = vec![
        vec![derivative_atom(&beta, &[0.0, 0.0], 0.5)?; 2],
        vec![derivative_atom(&beta, &[0.0, 0.0], 1.0)?; 2],
        vec![derivative_atom(&beta, &[1.0, 0.0], 1.0)?; 2],
    ];
    Ok(AtomBattery {
        tuples,
        p: p.to_vec(),
    })
}

fn check_equivalence_2d() -> Result<bool> {
    let g = make_grid(2, 3.0, 64)?;
    let p2 = [2.0, 2.0];
    let p43 = [4.0 / 3.0, 4.0 / 3.0];
    let b0 = battery_2d(0, &p2)?;
    let b1 = battery_2d(1, &p43)?;
    Ok(equivalence_expect(&sigma0(), "sigma0", &b0, g, true)?
        && equivalence_expect(&sigma1(), "sigma1", &b0, g, true)?
        && equivalence_expect(&riesz_product_default(), "riesz_product", &b0, g, true)?
        && equivalence_expect(&one(2, 2), "one", &b0, g, false)?
        && equivalence_expect(&sigma2(), "sigma2", &b1, g, true)?
        && equivalence_expect(&sigma3(), "sigma3", &b1, g, true)?
        && equivalence_expect(
            &sigma_hessian_general(&[1, 1])?,
            "sigma_hessian_general",
            &b1,
            g,
            true,
        )?)
}

fn check_atom_construction() -> Result<bool> {
    let g = make_grid(1, 4.0, 2048)?;
    let a = derivative_atom(&[2], &[0.0], 1.0)?;
    crate::atoms::certify(&a, g)?;
    let gz = make_grid(1, 4.0, 1024)?;
    let omega = omega_atom(1, 1, gz)?;
    Ok(omega.vanishing_order == 1)
}

fn check_tail_majorant() -> Result<bool> {
    let g = make_grid(1, 8.0, 256)?;
    let atoms = vec![
        derivative_atom(&[1], &[0.0], 1.0)?,
        derivative_atom(&[1], &[0.3], 0.8)?,
    ];
    let b = tail_majorant(&atoms, &[2.0, 2.0], 0)?;
    // far-field ratio b(2R)/b(R) ~ 2^{-(mn+N+1)} = 2^{-3}
    let r1 = b.far_term(&[40.0]);
    let r2 = b.far_term(&[80.0]);
    let ratio = r2 / r1;
    if !(ratio > 0.5 * 0.125 && ratio < 2.0 * 0.125) {
        return Ok(false);
    }
    let plan = MultiplierPlan::new(smooth_test(2, 1), g, Algorithm::FftLastBlock)?;
    let fields = atoms
        .iter()
        .map(|a| a.sample_on(g))
        .collect::<Result<Vec<_>>>()?;
    let t = apply(&plan, &fields)?;
    let (c, _) = check_pointwise_decay(&t, &b, f64::INFINITY)?;
    if !(c.is_finite() && c > 0.0) {
        return Ok(false);
    }
    let (_, violations) = check_pointwise_decay(&t, &b, 2.0 * c)?;
    Ok(violations == 0)
}

fn check_weakconv_gap() -> Result<bool> {
    let g = make_grid(1, 4.0, 512)?;
    let b = |c: f64, r: f64| {
        let bmp = bump(&[c], r);
        sample(move |x| bmp.eval(x), g)
    };
    let rep = weakconv_demo(
        &one(2, 1),
        &b(0.0, 1.0)?,
        &b(0.0, 1.5)?,
        &b(0.2, 1.0)?,
        &b(-0.1, 1.5)?,
        &b(0.0, 2.0)?,
        &[4.0, 8.0, 16.0],
        g,
        Algorithm::FftLastBlock,
    )?;
    let last = *rep.gaps.last().unwrap();
    Ok(rep.predicted_gap > 0.0 && (last - rep.predicted_gap).abs() <= 0.1 * rep.predicted_gap)
}

pub(super) fn cmd_suite(cfg: &RunConfig, out: &OutDir) -> Result<bool> {
    let checks: Vec<(&str, fn() -> Result<bool>)> = vec![
        ("spectral-roundtrip", check_spectral_roundtrip),
        ("symbolic-vs-fd", check_symbolic_vs_fd),
        ("cancellation-verdicts", check_cancellation_verdicts),
        ("identity-bilinear", check_identity_bilinear),
        ("linear-moments", check_linear_moments),
        ("equivalence-1d", check_equivalence_1d),
        ("equivalence-2d", check_equivalence_2d),
        ("atom-construction", check_atom_construction),
        ("tail-majorant", check_tail_majorant),
        ("weakconv-gap", check_weakconv_gap),
    ];
    let mut doc = base_doc("suite", cfg);
    doc.open("checks");
    let mut csv = String::from("check,verdict\n");
    let mut all = true;
    for (name, check) in checks {
        let (verdict, detail) = match check() {
            Ok(v) => (v, fmt_bool(v).to_string()),
            Err(e) => (false, format!("error {e}")),
        };
        all &= verdict;
        println!("suite {name} {}", if verdict { "pass" } else { "FAIL" });
        doc.kv(name, &detail);
        csv.push_str(&format!(
            "{name},{}\n",
            if verdict { "pass" } else { "fail" }
        ));
    }
    doc.close();
    doc.kv("verdict", fmt_bool(all));
    out.write("suite.report.txt", doc.finish().as_bytes())?;
    out.write("suite.csv", csv.as_bytes())?;
    println!("suite {}", fmt_bool(all));
    Ok(all)
}
