//! Cancellation and decay checkers: derivative vanishing on the
//! antidiagonal, block symmetry, and the two derivative-decay suprema.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::util::{multiindex_tuples, multiindices, order};

use super::expr::SymbolExpr;
use super::sampler::{sample_diagonal, sample_shells, SamplerSpec};

/// Symbolic-zero threshold: sampled derivative magnitudes below this
/// (after scale normalization) count as exact cancellation.
pub const SYMBOLIC_ZERO_TOL: f64 = 1e-12;

/// Per-point derivative magnitudes on sampled `Δ_n` points.
#[derive(Debug, Clone)]
pub struct DiagonalSample {
    pub point: Vec<f64>,
    /// `(α, |∂^α_k σ| · (Σ|ξ_j|)^{|α|})` for every checked α.
    pub per_alpha: Vec<(Vec<u32>, f64)>,
}

/// Verdict of the derivative-cancellation check on `Δ_n \ Γ`.
#[derive(Debug, Clone)]
pub struct CancellationReport {
    pub max_order: u32,
    pub block: usize,
    pub seed: u64,
    pub samples: Vec<DiagonalSample>,
    pub per_alpha_max: BTreeMap<Vec<u32>, f64>,
    pub verdict: bool,
}

fn block_norm_sum(point: &[f64], m: usize, n: usize) -> f64 {
    (0..m)
        .map(|j| point[j * n..(j + 1) * n].iter().map(|x| x * x).sum::<f64>().sqrt())
        .sum()
}

/// Evaluates `∂^α_k σ` for all `|α| <= max_order` on sampled
/// `Δ_n \ Γ` points.  Values are normalized by `(Σ|ξ_j|)^{|α|}` so the
/// threshold is scale-free; the verdict passes iff every per-α maximum
/// stays below [`SYMBOLIC_ZERO_TOL`].
pub fn check_cancellation(
    sym: &SymbolExpr,
    max_order: u32,
    sampler: &SamplerSpec,
    block: usize,
) -> Result<CancellationReport> {
    let m = sym.arity.blocks;
    let n = sym.arity.block_dim;
    let alphas = multiindices(n, max_order);
    let derivs: Vec<(Vec<u32>, SymbolExpr)> = alphas
        .iter()
        .map(|a| Ok((a.clone(), sym.diff(block, a)?)))
        .collect::<Result<_>>()?;

    let points = sample_diagonal(sampler, sym)?;
    let mut samples = Vec::with_capacity(points.len());
    let mut per_alpha_max: BTreeMap<Vec<u32>, f64> =
        alphas.iter().map(|a| (a.clone(), 0.0)).collect();

    for point in points {
        let scale = block_norm_sum(&point, m, n);
        let mut per_alpha = Vec::with_capacity(derivs.len());
        for (a, d) in &derivs {
            let raw = d.evaluate(&point)?;
            let normalized = raw.abs() * scale.powi(order(a) as i32);
            per_alpha.push((a.clone(), normalized));
            let e = per_alpha_max.get_mut(a).expect("alpha present");
            if normalized > *e {
                *e = normalized;
            }
        }
        samples.push(DiagonalSample { point, per_alpha });
    }

    let verdict = per_alpha_max.values().all(|&v| v <= SYMBOLIC_ZERO_TOL);
    Ok(CancellationReport {
        max_order,
        block,
        seed: sampler.seed,
        samples,
        per_alpha_max,
        verdict,
    })
}

/// Runs [`check_cancellation`] for every block and reports whether all
/// verdicts coincide.
pub fn check_block_symmetry(
    sym: &SymbolExpr,
    max_order: u32,
    sampler: &SamplerSpec,
) -> Result<bool> {
    let mut verdicts = Vec::with_capacity(sym.arity.blocks);
    for k in 0..sym.arity.blocks {
        verdicts.push(check_cancellation(sym, max_order, sampler, k)?.verdict);
    }
    Ok(verdicts.windows(2).all(|w| w[0] == w[1]))
}

/// Sampled suprema of the two normalized derivative quantities.
#[derive(Debug, Clone)]
pub struct DecayReport {
    /// `sup |∂^{α⃗}σ| · (Σ|ξ_j|)^{|α⃗|}` per block-multiindex tuple.
    pub per_alpha_sup_cm: BTreeMap<Vec<Vec<u32>>, f64>,
    /// `sup |∂^{α⃗}σ| · Π|ξ_j|^{|α_j|}` per tuple.
    pub per_alpha_sup_weak: BTreeMap<Vec<Vec<u32>>, f64>,
    /// Shell radii the suprema were taken over.
    pub sample_domain: Vec<f64>,
    /// Per-shell CM suprema, keyed by tuple, in shell order.
    pub per_shell_cm: BTreeMap<Vec<Vec<u32>>, Vec<f64>>,
    /// All entries finite with per-shell variation within a factor 10.
    pub cm_consistent: bool,
}

/// Samples the Coifman-Meyer and weak-decay quantities on shells.
pub fn estimate_decay(
    sym: &SymbolExpr,
    max_order: u32,
    sampler: &SamplerSpec,
) -> Result<DecayReport> {
    let m = sym.arity.blocks;
    let n = sym.arity.block_dim;
    let tuples = multiindex_tuples(m, n, max_order);
    let mut derivs = Vec::with_capacity(tuples.len());
    for t in &tuples {
        let mut d = sym.clone();
        for (k, a) in t.iter().enumerate() {
            d = d.diff(k, a)?;
        }
        derivs.push((t.clone(), d));
    }

    let points = sample_shells(sampler, sym)?;
    let mut sup_cm: BTreeMap<Vec<Vec<u32>>, f64> =
        tuples.iter().map(|t| (t.clone(), 0.0)).collect();
    let mut sup_weak = sup_cm.clone();
    let mut per_shell: BTreeMap<Vec<Vec<u32>>, BTreeMap<u64, f64>> =
        tuples.iter().map(|t| (t.clone(), BTreeMap::new())).collect();

    for (r, point) in &points {
        let norm_sum = block_norm_sum(point, m, n);
        for (t, d) in &derivs {
            let raw = match d.evaluate(point) {
                Ok(v) => v.abs(),
                // a derivative can be singular at a point where σ is not;
                // skip such samples rather than poison the supremum
                Err(_) => continue,
            };
            let total: u32 = t.iter().map(|a| order(a)).sum();
            let cm = raw * norm_sum.powi(total as i32);
            let mut weak = raw;
            for (j, a) in t.iter().enumerate() {
                let bn = point[j * n..(j + 1) * n]
                    .iter()
                    .map(|x| x * x)
                    .sum::<f64>()
                    .sqrt();
                weak *= bn.powi(order(a) as i32);
            }
            let e = sup_cm.get_mut(t).expect("tuple present");
            *e = e.max(cm);
            let e = sup_weak.get_mut(t).expect("tuple present");
            *e = e.max(weak);
            let shell = per_shell.get_mut(t).expect("tuple present");
            let key = r.to_bits();
            let s = shell.entry(key).or_insert(0.0);
            *s = s.max(cm);
        }
    }

    let mut cm_consistent = true;
    let mut per_shell_cm = BTreeMap::new();
    for (t, shells) in per_shell {
        let vals: Vec<f64> = shells.values().copied().collect();
        let hi = vals.iter().copied().fold(0.0, f64::max);
        if !hi.is_finite() {
            cm_consistent = false;
        } else if hi > SYMBOLIC_ZERO_TOL {
            let lo = vals
                .iter()
                .copied()
                .filter(|v| *v > 0.0)
                .fold(f64::INFINITY, f64::min);
            if hi / lo > 10.0 {
                cm_consistent = false;
            }
        }
        per_shell_cm.insert(t, vals);
    }

    Ok(DecayReport {
        per_alpha_sup_cm: sup_cm,
        per_alpha_sup_weak: sup_weak,
        sample_domain: sampler.radii.clone(),
        per_shell_cm,
        cm_consistent,
    })
}
