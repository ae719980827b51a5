//! Both sides of the moment identity: physical-side moments of the
//! operator output and the frequency-side integral over the
//! antidiagonal, plus the report comparing them.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::atoms::SmoothAtom;
use crate::error::{Error, Result};
use crate::grid::{forward, moment, Grid, SpectralField};
use crate::multiplier::{apply, tail_majorant, Algorithm, MultiplierPlan, TailMajorant};
use crate::symbols::expr::SymbolExpr;
use crate::util::{binomial, mi_sub, order, sub_multiindices};

/// Identity pass threshold on the relative error (two independent
/// quadratures of the same quantity).
pub const IDENTITY_REL_TOL: f64 = 1e-2;

/// Frequency-side quadrature parameters.
#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    /// Tube half-width around the symbol's singular set, in units of
    /// the frequency spacing.
    pub delta_factor: f64,
}

impl Default for QuadSpec {
    fn default() -> QuadSpec {
        QuadSpec { delta_factor: 2.0 }
    }
}

/// A one-sided moment value with its out-of-box truncation estimate.
#[derive(Debug, Clone, Copy)]
pub struct MomentSide {
    pub value: Complex64,
    pub tail_estimate: f64,
}

/// Natural magnitude of a moment on this atom tuple:
/// `Π‖a_j‖_∞ · |support| · diam^{|α|}`.
pub fn moment_scale(atoms: &[SmoothAtom], alpha: &[u32], grid: Grid) -> Result<f64> {
    let n = grid.dim() as i32;
    let mut sup_product = 1.0;
    let mut vol: f64 = f64::INFINITY;
    let mut diam: f64 = 0.0;
    for a in atoms {
        sup_product *= a.sample_on(grid)?.max_abs();
        vol = vol.min(a.support_side.powi(n));
        diam = diam.max(a.support_side * (grid.dim() as f64).sqrt());
    }
    Ok(sup_product * vol * diam.powi(order(alpha) as i32))
}

/// Integrates the tail majorant's far term against `|2πx|^{|α|}`
/// outside the box `[-L, L)^n`, bounding the truncation error of the
/// physical-side quadrature.
pub fn tail_outside_box(b: &TailMajorant, alpha_order: u32, half_extent: f64) -> f64 {
    let n = b.dim;
    let surf = |r: f64| match n {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI * r,
        _ => 4.0 * std::f64::consts::PI * r * r,
    };
    let e = b.factor_exponent();
    let nn = b.moment_order as f64 + 1.0;
    let m = b.centers.len() as f64;
    let integrand = |r: f64| {
        let mut val = (2.0 * std::f64::consts::PI * r).powi(alpha_order as i32) * surf(r);
        for ((c, &side), &pk) in b.centers.iter().zip(&b.sides).zip(&b.p) {
            let cn = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let vol = side.powi(n as i32);
            let dist = (r - cn).max(0.0);
            val *= vol.powf(1.0 - 1.0 / pk + nn / (n as f64 * m)) / (dist + side).powf(e);
        }
        val
    };
    // log-spaced trapezoid over r in [L, 1e6 L]
    let steps = 512;
    let lo = half_extent.ln();
    let hi = (half_extent * 1e6).ln();
    let du = (hi - lo) / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let r = (lo + du * i as f64).exp();
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        acc += w * integrand(r) * r * du;
    }
    acc
}

fn min_vanishing_order(atoms: &[SmoothAtom]) -> u32 {
    atoms.iter().map(|a| a.vanishing_order).min().unwrap_or(0)
}

/// `∫ (−2πi x)^α T_σ(a₁,…,a_m)(x) dx` by direct quadrature of the
/// operator output.
pub fn moment_lhs(
    sym: &SymbolExpr,
    atoms: &[SmoothAtom],
    alpha: &[u32],
    grid: Grid,
    algorithm: Algorithm,
    p: &[f64],
) -> Result<MomentSide> {
    let cap = min_vanishing_order(atoms);
    if order(alpha) > cap {
        return Err(Error::Config(format!(
            "moment order {} exceeds the atoms' certified vanishing order {cap}",
            order(alpha)
        )));
    }
    let plan = MultiplierPlan::new(sym.clone(), grid, algorithm)?;
    let fields: Vec<_> = atoms
        .iter()
        .map(|a| a.sample_on(grid))
        .collect::<Result<_>>()?;
    let out = apply(&plan, &fields)?;
    let raw = moment(&out, alpha)?;
    let k = order(alpha);
    // (-2πi)^{|α|}
    let factor = Complex64::new(0.0, -2.0 * std::f64::consts::PI).powi(k as i32);
    let b = tail_majorant(atoms, p, cap)?;
    Ok(MomentSide {
        value: factor * raw,
        tail_estimate: tail_outside_box(&b, k, grid.half_extent()),
    })
}

/// The frequency side of the identity:
/// `Σ_{β≤α} C(α,β) ∫ â₁(ξ₁)⋯â_{m−1}(ξ_{m−1})
///  ∂^{α−β}â_m(−Σξ) ∂^β_mσ(ξ⃗, −Σξ) dξ`.
///
/// Lattice points within `δ` of the symbol's singular set are excluded
/// only when some required derivative actually fails to evaluate
/// somewhere in the tube; for symbols smooth across Γ the quadrature
/// keeps every point (and is Parseval-exact for σ ≡ 1).
pub fn moment_rhs(
    sym: &SymbolExpr,
    atoms: &[SmoothAtom],
    alpha: &[u32],
    grid: Grid,
    quad: QuadSpec,
) -> Result<Complex64> {
    let m = sym.arity.blocks;
    let n = grid.dim();
    if atoms.len() != m {
        return Err(Error::Config(format!(
            "symbol arity {m} does not match {} atoms",
            atoms.len()
        )));
    }
    let len = grid.len();
    let delta = quad.delta_factor * grid.freq_spacing();

    // transforms of the first m-1 atoms, and the weighted transforms
    // ∂^γ â_m = forward((-2πi x)^γ a_m)
    let mut hats: Vec<SpectralField> = Vec::with_capacity(m - 1);
    for a in &atoms[..m - 1] {
        hats.push(forward(&a.sample_on(grid)?)?);
    }
    let mut dhats: BTreeMap<Vec<u32>, SpectralField> = BTreeMap::new();
    let last = atoms[m - 1].sample_on(grid)?;
    for gamma in sub_multiindices(alpha) {
        let mut weighted = last.clone();
        let k = order(&gamma);
        let factor = Complex64::new(0.0, -2.0 * std::f64::consts::PI).powi(k as i32);
        let mut x = vec![0.0; n];
        for (i, v) in weighted.values.iter_mut().enumerate() {
            grid.phys_point(i, &mut x);
            let mut w = 1.0;
            for (c, &g) in gamma.iter().enumerate() {
                w *= x[c].powi(g as i32);
            }
            *v *= factor * w;
        }
        dhats.insert(gamma, forward(&weighted)?);
    }

    let betas = sub_multiindices(alpha);
    let mut dsigmas = Vec::with_capacity(betas.len());
    for beta in &betas {
        dsigmas.push((
            binomial(alpha, beta),
            mi_sub(alpha, beta),
            sym.diff(m - 1, beta)?,
        ));
    }

    // lattice frequency indices per point
    let mm = grid.points_per_axis() as i64;
    let mut jcoord = vec![0i64; len * n];
    let mut axes = vec![0usize; n];
    for i in 0..len {
        grid.decode(i, &mut axes);
        for c in 0..n {
            jcoord[i * n + c] = axes[c] as i64 - mm / 2;
        }
    }
    let mut freq = vec![0.0; len * n];
    for i in 0..len {
        grid.freq_point(i, &mut freq[i * n..(i + 1) * n]);
    }

    let outer_count = len.pow((m - 1) as u32);
    let decode_outer = |o: usize, qs: &mut Vec<usize>| {
        let mut rem = o;
        for q in qs.iter_mut() {
            *q = rem % len;
            rem /= len;
        }
    };

    let block_norms = |point: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|j| {
                point[j * n..(j + 1) * n]
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    };

    // first pass: does any required derivative fail inside the tubes?
    let mut qs = vec![0usize; m - 1];
    let mut point = vec![0.0; m * n];
    let mut jsum = vec![0i64; n];
    let mut tube_singular = false;
    'probe: for o in 0..outer_count {
        decode_outer(o, &mut qs);
        for c in 0..n {
            jsum[c] = 0;
        }
        for (j, &q) in qs.iter().enumerate() {
            point[j * n..(j + 1) * n].copy_from_slice(&freq[q * n..(q + 1) * n]);
            for c in 0..n {
                jsum[c] += jcoord[q * n + c];
            }
        }
        let neg: Vec<i64> = jsum.iter().map(|v| -v).collect();
        let Some(qm) = grid.freq_index(&neg) else {
            continue;
        };
        point[(m - 1) * n..m * n].copy_from_slice(&freq[qm * n..(qm + 1) * n]);
        if block_norms(&point).iter().any(|&b| b <= delta) {
            for (_, _, d) in &dsigmas {
                if matches!(d.evaluate(&point), Err(Error::SingularPoint { .. })) {
                    tube_singular = true;
                    break 'probe;
                }
            }
        }
    }

    let mut acc = Complex64::new(0.0, 0.0);
    for o in 0..outer_count {
        decode_outer(o, &mut qs);
        for c in 0..n {
            jsum[c] = 0;
        }
        let mut w = Complex64::new(1.0, 0.0);
        for (j, &q) in qs.iter().enumerate() {
            point[j * n..(j + 1) * n].copy_from_slice(&freq[q * n..(q + 1) * n]);
            for c in 0..n {
                jsum[c] += jcoord[q * n + c];
            }
            w *= hats[j].values[q];
        }
        let neg: Vec<i64> = jsum.iter().map(|v| -v).collect();
        let Some(qm) = grid.freq_index(&neg) else {
            continue;
        };
        point[(m - 1) * n..m * n].copy_from_slice(&freq[qm * n..(qm + 1) * n]);
        let in_tube = block_norms(&point).iter().any(|&b| b <= delta);
        if in_tube && tube_singular {
            continue;
        }
        if w == Complex64::new(0.0, 0.0) && m > 1 {
            continue;
        }
        for (coeff, gamma, d) in &dsigmas {
            let s = match d.evaluate(&point) {
                Ok(v) => v,
                Err(Error::SingularPoint { point, what }) => {
                    return Err(Error::SingularPoint { point, what });
                }
                Err(e) => return Err(e),
            };
            acc += *coeff * w * dhats[gamma].values[qm] * s;
        }
    }
    let scale = grid.freq_spacing().powi(((m - 1) * n) as i32);
    Ok(acc * scale)
}

/// Comparison of the two sides of the moment identity.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub alpha: Vec<u32>,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
    pub tail_estimate: f64,
    pub floor_scale: f64,
    pub grid_dim: usize,
    pub grid_half_extent: f64,
    pub grid_points: usize,
    pub delta: f64,
}

/// Runs both quadratures and compares them;
/// `rel_err = |lhs − rhs| / max(|lhs|, |rhs|, floor_scale)` with
/// `floor_scale = 1e−12·S` so 0-vs-0 comparisons pass.
pub fn identity_check(
    sym: &SymbolExpr,
    atoms: &[SmoothAtom],
    alpha: &[u32],
    grid: Grid,
    algorithm: Algorithm,
    quad: QuadSpec,
    p: &[f64],
) -> Result<MomentReport> {
    let lhs = moment_lhs(sym, atoms, alpha, grid, algorithm, p)?;
    let rhs = moment_rhs(sym, atoms, alpha, grid, quad)?;
    let s = moment_scale(atoms, alpha, grid)?;
    let floor_scale = 1e-12 * s;
    let abs_err = (lhs.value - rhs).norm();
    let rel_err = abs_err / lhs.value.norm().max(rhs.norm()).max(floor_scale);
    // when both sides sit at quadrature-noise level the relative error
    // is meaningless; accept if the gap is below the noise threshold
    let noise = (1e-6 * s).max(lhs.tail_estimate);
    Ok(MomentReport {
        alpha: alpha.to_vec(),
        lhs: lhs.value,
        rhs,
        abs_err,
        rel_err,
        pass: rel_err <= IDENTITY_REL_TOL || abs_err <= noise,
        tail_estimate: lhs.tail_estimate,
        floor_scale,
        grid_dim: grid.dim(),
        grid_half_extent: grid.half_extent(),
        grid_points: grid.points_per_axis(),
        delta: quad.delta_factor * grid.freq_spacing(),
    })
}

/// The numeric "this moment vanishes" rule:
/// `|lhs| ≤ max(1e−6·S, tail_estimate)`.
pub fn moment_passes(lhs: &MomentSide, scale: f64) -> (bool, f64) {
    let threshold = (1e-6 * scale).max(lhs.tail_estimate);
    (lhs.value.norm() <= threshold, threshold)
}
