//! Weak-convergence demonstration: pairings of `B(f_k, g_k)` against a
//! fixed smooth test function for oscillating sequences
//! `f_k = f + h·cos(2πk x)`, `g_k = g + e·cos(2πk x)`.
//!
//! Symbols vanishing on the antidiagonal preserve the weak limit; for
//! σ ≡ 1 the half-angle identity leaves the persistent gap
//! `½ ∫ h·e·φ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledField};
use crate::multiplier::{apply, Algorithm, MultiplierPlan};
use crate::symbols::expr::SymbolExpr;

#[derive(Debug, Clone)]
pub struct WeakConvReport {
    pub k_list: Vec<f64>,
    pub pairings: Vec<Complex64>,
    pub limit: Complex64,
    pub gaps: Vec<f64>,
    /// `½ ∫ h·e·φ` — the analytic gap of the σ ≡ 1 counterexample.
    pub predicted_gap: f64,
}

fn pairing(b: &SampledField, phi: &SampledField, grid: Grid) -> Complex64 {
    let hn = grid.spacing().powi(grid.dim() as i32);
    b.values
        .iter()
        .zip(&phi.values)
        .map(|(x, y)| x * y)
        .sum::<Complex64>()
        * hn
}

fn oscillate(base: &SampledField, env: &SampledField, k: f64, grid: Grid) -> SampledField {
    let mut out = base.clone();
    let mut x = vec![0.0; grid.dim()];
    for i in 0..grid.len() {
        grid.phys_point(i, &mut x);
        let c = (2.0 * std::f64::consts::PI * k * x[0]).cos();
        out.values[i] += env.values[i] * c;
    }
    out
}

/// Computes the pairings `⟨B(f_k, g_k), φ⟩` for each `k`, the limit
/// pairing `⟨B(f, g), φ⟩`, and the gaps between them.
#[allow(clippy::too_many_arguments)]
pub fn weakconv_demo(
    sym: &SymbolExpr,
    f: &SampledField,
    h_env: &SampledField,
    g: &SampledField,
    e_env: &SampledField,
    phi_test: &SampledField,
    k_list: &[f64],
    grid: Grid,
    algorithm: Algorithm,
) -> Result<WeakConvReport> {
    if grid.dim() != 1 {
        return Err(Error::Config(
            "the weak-convergence demo is fixed to n = 1".into(),
        ));
    }
    if sym.arity.blocks != 2 || sym.arity.block_dim != 1 {
        return Err(Error::Config("demo needs a bilinear symbol with n = 1".into()));
    }
    let dxi = grid.freq_spacing();
    for &k in k_list {
        if !(k > 0.0) {
            return Err(Error::Config(format!("oscillation frequency {k} must be positive")));
        }
        if k >= grid.freq_half_extent() {
            return Err(Error::Config(format!(
                "oscillation frequency {k} is at or beyond the Nyquist limit {}",
                grid.freq_half_extent()
            )));
        }
        let steps = k / dxi;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "oscillation frequency {k} is not a multiple of the frequency spacing {dxi}"
            )));
        }
    }

    let plan = MultiplierPlan::new(sym.clone(), grid, algorithm)?;
    let limit = pairing(&apply(&plan, &[f.clone(), g.clone()])?, phi_test, grid);

    let mut pairings = Vec::with_capacity(k_list.len());
    let mut gaps = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let fk = oscillate(f, h_env, k, grid);
        let gk = oscillate(g, e_env, k, grid);
        let pk = pairing(&apply(&plan, &[fk, gk])?, phi_test, grid);
        gaps.push((pk - limit).norm());
        pairings.push(pk);
    }

    let hn = grid.spacing();
    let predicted_gap = 0.5
        * hn
        * h_env
            .values
            .iter()
            .zip(&e_env.values)
            .zip(&phi_test.values)
            .map(|((a, b), c)| (a * b * c).re)
            .sum::<f64>();

    Ok(WeakConvReport {
        k_list: k_list.to_vec(),
        pairings,
        limit,
        gaps,
        predicted_gap: predicted_gap.abs(),
    })
}
