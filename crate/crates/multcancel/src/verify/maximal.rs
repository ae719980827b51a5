//! Smooth maximal function `Mf(x) = sup_t |φ_t ∗ f(x)|` over a dyadic
//! scale list, and the desk-scale Hardy quasinorm surrogate built on
//! it.

use crate::atoms::bump;
use crate::error::{Error, Result};
use crate::grid::{forward, inverse, moment, sample, Grid, SampledField};

/// Kernel and scale list for the maximal function.
#[derive(Debug, Clone)]
pub struct MaximalSpec {
    /// Radius of the bump kernel before dilation.
    pub kernel_radius: f64,
    /// Dilation scales `t`; each must satisfy `2h ≤ t ≤ L/2`.
    pub scales: Vec<f64>,
}

impl MaximalSpec {
    /// Dyadic scales `2^j`, `j ∈ [−4, 2]`, relative to unit scale.
    pub fn unit_default() -> MaximalSpec {
        MaximalSpec {
            kernel_radius: 1.0,
            scales: (-4..=2).map(|j| 2f64.powi(j)).collect(),
        }
    }

    /// The unit-default ladder clipped to the grid's resolvable range.
    pub fn for_grid(grid: Grid) -> MaximalSpec {
        let mut spec = MaximalSpec::unit_default();
        let lo = 2.0 * grid.spacing();
        let hi = grid.half_extent() / 2.0;
        spec.scales.retain(|&t| t >= lo && t <= hi);
        spec
    }
}

/// Samples `φ_t = t^{−n} φ(·/t)` with exactly unit discrete mass.
fn kernel_at_scale(spec: &MaximalSpec, t: f64, grid: Grid) -> Result<SampledField> {
    let b = bump(&vec![0.0; grid.dim()], spec.kernel_radius * t);
    let mut f = sample(|x| b.eval(x), grid)?;
    let mass = moment(&f, &vec![0u32; grid.dim()])?;
    if mass.norm() == 0.0 {
        return Err(Error::Degenerate(
            "maximal kernel has zero mass at this scale".into(),
        ));
    }
    for v in f.values.iter_mut() {
        *v /= mass;
    }
    Ok(f)
}

/// `Mf`: pointwise max over scales of `|φ_t ∗ f|`, each convolution
/// done spectrally.
pub fn maximal(f: &SampledField, spec: &MaximalSpec, grid: Grid) -> Result<SampledField> {
    if f.grid != grid {
        return Err(Error::Grid("maximal input grid mismatch".into()));
    }
    if spec.scales.is_empty() {
        return Err(Error::Config("maximal scale list is empty".into()));
    }
    let lo = 2.0 * grid.spacing();
    let hi = grid.half_extent() / 2.0;
    for &t in &spec.scales {
        if !(t >= lo && t <= hi) {
            return Err(Error::Config(format!(
                "maximal scale {t} outside the resolvable range [{lo}, {hi}]"
            )));
        }
    }
    let f_hat = forward(f)?;
    let mut out = SampledField::zeros(grid);
    for &t in &spec.scales {
        let k_hat = forward(&kernel_at_scale(spec, t, grid)?)?;
        let mut prod = f_hat.clone();
        for (v, k) in prod.values.iter_mut().zip(&k_hat.values) {
            *v *= k;
        }
        let conv = inverse(&prod)?;
        for (o, c) in out.values.iter_mut().zip(&conv.values) {
            let a = c.norm();
            if a > o.re {
                o.re = a;
            }
        }
    }
    Ok(out)
}

/// `(hⁿ Σ Mf^p)^{1/p}` — a desk-scale surrogate, not a certified norm.
pub fn hp_quasinorm(f: &SampledField, p: f64, spec: &MaximalSpec, grid: Grid) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!("p must lie in (0, 1], got {p}")));
    }
    let mf = maximal(f, spec, grid)?;
    let hn = grid.spacing().powi(grid.dim() as i32);
    let sum: f64 = mf.values.iter().map(|v| v.re.powf(p)).sum();
    Ok((hn * sum).powf(1.0 / p))
}
