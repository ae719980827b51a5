//! The two-sided equivalence harness: derivative cancellation on the
//! antidiagonal versus vanishing moments of the operator output on an
//! atom battery, with the agree verdict.

use rayon::prelude::*;

use crate::atoms::{normalize, AtomBattery, SmoothAtom};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::multiplier::Algorithm;
use crate::symbols::checks::{check_cancellation, CancellationReport};
use crate::symbols::expr::SymbolExpr;
use crate::symbols::sampler::SamplerSpec;
use crate::util::multiindices;

use super::moments::{moment_lhs, moment_passes, moment_scale};

/// One battery measurement: the physical-side moment magnitude of a
/// tuple at a multiindex, against its pass threshold.
#[derive(Debug, Clone)]
pub struct MomentEntry {
    pub tuple_index: usize,
    pub alpha: Vec<u32>,
    pub lhs_abs: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub symbol_id: String,
    pub p: Vec<f64>,
    pub p_total: f64,
    pub moment_cap: u32,
    pub cancellation: CancellationReport,
    pub entries: Vec<MomentEntry>,
    pub all_moments_pass: bool,
    pub agree: bool,
}

/// Validates `Σ 1/p_j = 1/p` with `0 < p ≤ 1` and returns
/// `(p, L = ⌊n(1/p − 1)⌋)`.
pub fn holder_exponents(p: &[f64], n: usize) -> Result<(f64, u32)> {
    if p.is_empty() {
        return Err(Error::Config("empty exponent vector".into()));
    }
    for &pj in p {
        if !(pj > 0.0) || !pj.is_finite() {
            return Err(Error::Config(format!("exponent {pj} is not positive")));
        }
    }
    let inv: f64 = p.iter().map(|pj| 1.0 / pj).sum();
    let p_total = 1.0 / inv;
    if !(p_total > 0.0 && p_total <= 1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "Hölder total p = {p_total:.6} must lie in (0, 1]"
        )));
    }
    let l = (n as f64 * (inv - 1.0) + 1e-9).floor();
    if l < 0.0 {
        return Err(Error::Config("negative moment cap".into()));
    }
    Ok((p_total.min(1.0), l as u32))
}

/// Runs condition (a) (cancellation up to order L on the last block)
/// and condition (b) (battery moments up to order L) and reports
/// whether the verdicts coincide.
pub fn equivalence_harness(
    sym: &SymbolExpr,
    symbol_id: &str,
    battery: &AtomBattery,
    sampler: &SamplerSpec,
    grid: Grid,
    algorithm: Algorithm,
) -> Result<EquivalenceReport> {
    let m = sym.arity.blocks;
    let n = sym.arity.block_dim;
    if grid.dim() != n {
        return Err(Error::Config("grid dimension does not match symbol".into()));
    }
    if battery.p.len() != m {
        return Err(Error::Config(
            "battery exponent vector length does not match symbol arity".into(),
        ));
    }
    let (p_total, cap) = holder_exponents(&battery.p, n)?;

    let cancellation = check_cancellation(sym, cap, sampler, m - 1)?;

    // (p, ∞)-normalization of every slot
    let mut tuples: Vec<Vec<SmoothAtom>> = Vec::with_capacity(battery.tuples.len());
    for tuple in &battery.tuples {
        if tuple.len() != m {
            return Err(Error::Config("battery tuple length mismatch".into()));
        }
        let normed: Vec<SmoothAtom> = tuple
            .iter()
            .zip(&battery.p)
            .map(|(a, &pj)| normalize(a, pj.min(1.0), grid))
            .collect::<Result<_>>()?;
        tuples.push(normed);
    }

    let alphas = multiindices(n, cap);
    let jobs: Vec<(usize, Vec<u32>)> = (0..tuples.len())
        .flat_map(|t| alphas.iter().map(move |a| (t, a.clone())))
        .collect();

    let entries: Vec<Result<MomentEntry>> = jobs
        .par_iter()
        .map(|(t, alpha)| {
            let atoms = &tuples[*t];
            let lhs = moment_lhs(sym, atoms, alpha, grid, algorithm, &battery.p)?;
            let scale = moment_scale(atoms, alpha, grid)?;
            let (pass, threshold) = moment_passes(&lhs, scale);
            Ok(MomentEntry {
                tuple_index: *t,
                alpha: alpha.clone(),
                lhs_abs: lhs.value.norm(),
                threshold,
                pass,
            })
        })
        .collect();
    let entries: Vec<MomentEntry> = entries.into_iter().collect::<Result<_>>()?;

    let all_moments_pass = entries.iter().all(|e| e.pass);
    Ok(EquivalenceReport {
        symbol_id: symbol_id.to_string(),
        p: battery.p.clone(),
        p_total,
        moment_cap: cap,
        agree: cancellation.verdict == all_moments_pass,
        cancellation,
        entries,
        all_moments_pass,
    })
}
