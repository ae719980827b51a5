//! Application of the multilinear operator
//! `T(x) ≈ Δξ^{mn} Σ_{ξ⃗} σ(ξ⃗) Π f̂_j(ξ_j) e^{2πi x·(ξ₁+⋯+ξ_m)}`
//! to tuples of sampled fields, plus the tail-majorant decay
//! diagnostic.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::atoms::SmoothAtom;
use crate::error::{Error, Result};
use crate::grid::{forward, inverse, Grid, SampledField, SpectralField};
use crate::symbols::expr::SymbolExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Direct sum over all `M^{mn}` frequency tuples per output point.
    Naive,
    /// One inverse transform over the last block per outer tuple:
    /// cost `M^{(m-1)n}` transforms of size `M^n`.
    FftLastBlock,
}

#[derive(Debug, Clone)]
pub struct MultiplierPlan {
    pub symbol: SymbolExpr,
    pub grid: Grid,
    pub algorithm: Algorithm,
    /// Value assigned on the symbol's singular lattice points.  A
    /// single cell contributes `O(Δξ^{mn})`, so zero is a benign
    /// quadrature choice.
    pub singular_value: Complex64,
}

impl MultiplierPlan {
    pub fn new(symbol: SymbolExpr, grid: Grid, algorithm: Algorithm) -> Result<MultiplierPlan> {
        if symbol.arity.block_dim != grid.dim() {
            return Err(Error::Config(format!(
                "symbol block dimension {} does not match grid dimension {}",
                symbol.arity.block_dim,
                grid.dim()
            )));
        }
        if symbol.arity.blocks < 1 || symbol.arity.blocks > 3 {
            return Err(Error::Config(
                "apply supports m in 1..=3 (desk-scale envelope)".into(),
            ));
        }
        Ok(MultiplierPlan {
            symbol,
            grid,
            algorithm,
            singular_value: Complex64::new(0.0, 0.0),
        })
    }
}

/// Relative spectral-tail level above which an input counts as
/// under-resolved at the frequency boundary.
const ALIAS_WARN_LEVEL: f64 = 1e-10;

fn boundary_tail_ratio(hat: &SpectralField) -> f64 {
    let g = hat.grid;
    let m = g.points_per_axis();
    let sup = hat.max_abs();
    if sup == 0.0 {
        return 0.0;
    }
    let mut axes = vec![0usize; g.dim()];
    let mut worst: f64 = 0.0;
    for i in 0..g.len() {
        g.decode(i, &mut axes);
        // raster index 0 is the most negative frequency after centering
        if axes.iter().any(|&k| k == 0 || k == m - 1) {
            worst = worst.max(hat.values[i].norm());
        }
    }
    worst / sup
}

fn sigma_at(plan: &MultiplierPlan, point: &[f64]) -> Result<Complex64> {
    match plan.symbol.evaluate(point) {
        Ok(v) => Ok(Complex64::new(v, 0.0)),
        Err(Error::SingularPoint { .. }) => Ok(plan.singular_value),
        Err(e) => Err(e),
    }
}

/// Applies `T_σ` to `fields`; output is sampled on `plan.grid`.
pub fn apply(plan: &MultiplierPlan, fields: &[SampledField]) -> Result<SampledField> {
    let m = plan.symbol.arity.blocks;
    if fields.len() != m {
        return Err(Error::Config(format!(
            "plan expects {m} input fields, got {}",
            fields.len()
        )));
    }
    for f in fields {
        if f.grid != plan.grid {
            return Err(Error::Grid("input field grid does not match the plan".into()));
        }
        f.check_finite()?;
    }
    let hats: Vec<SpectralField> = fields.iter().map(forward).collect::<Result<_>>()?;
    for (j, hat) in hats.iter().enumerate() {
        let tail = boundary_tail_ratio(hat);
        if tail > ALIAS_WARN_LEVEL {
            eprintln!(
                "warning: input {} has spectral tail {tail:.2e} at the frequency boundary; \
                 output may be aliased",
                j + 1
            );
        }
    }
    let out = match plan.algorithm {
        Algorithm::Naive => apply_naive(plan, &hats)?,
        Algorithm::FftLastBlock => apply_fft_last_block(plan, &hats)?,
    };
    out.check_finite()?;
    Ok(out)
}

/// Odometer over `count` digits in base `len`; returns false on wrap.
fn advance(digits: &mut [usize], len: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < len {
            return true;
        }
        *d = 0;
    }
    false
}

fn apply_naive(plan: &MultiplierPlan, hats: &[SpectralField]) -> Result<SampledField> {
    let g = plan.grid;
    let m = hats.len();
    let n = g.dim();
    let len = g.len();

    // frequency coordinates per lattice index
    let mut freq = vec![0.0; len * n];
    for i in 0..len {
        g.freq_point(i, &mut freq[i * n..(i + 1) * n]);
    }
    let mut phys = vec![0.0; len * n];
    for i in 0..len {
        g.phys_point(i, &mut phys[i * n..(i + 1) * n]);
    }

    let mut out = SampledField::zeros(g);
    let mut tuple = vec![0usize; m];
    let mut point = vec![0.0; m * n];
    loop {
        let mut weight = Complex64::new(1.0, 0.0);
        for (j, &q) in tuple.iter().enumerate() {
            point[j * n..(j + 1) * n].copy_from_slice(&freq[q * n..(q + 1) * n]);
            weight *= hats[j].values[q];
        }
        if weight != Complex64::new(0.0, 0.0) {
            weight *= sigma_at(plan, &point)?;
            if weight != Complex64::new(0.0, 0.0) {
                // total output frequency of this tuple
                let mut s = vec![0.0; n];
                for j in 0..m {
                    for c in 0..n {
                        s[c] += point[j * n + c];
                    }
                }
                for i in 0..len {
                    let x = &phys[i * n..(i + 1) * n];
                    let phase: f64 = x.iter().zip(&s).map(|(a, b)| a * b).sum();
                    out.values[i] +=
                        weight * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase);
                }
            }
        }
        if !advance(&mut tuple, len) {
            break;
        }
    }
    let scale = g.freq_spacing().powi((m * n) as i32);
    for v in out.values.iter_mut() {
        *v *= scale;
    }
    Ok(out)
}

/// Per-axis table of `e^{2πi x_k ξ_j}` for the outer phases.
fn phase_table(g: Grid) -> Vec<Complex64> {
    let m = g.points_per_axis();
    let h = g.spacing();
    let dxi = g.freq_spacing();
    let l = g.half_extent();
    let mm = m as i64;
    let mut table = vec![Complex64::new(0.0, 0.0); m * m];
    for k in 0..m {
        let x = -l + h * k as f64;
        for j in 0..m {
            let xi = dxi * (j as i64 - mm / 2) as f64;
            table[k * m + j] = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x * xi);
        }
    }
    table
}

/// Number of fixed accumulation chunks; results are bit-reproducible
/// for any thread count because chunk boundaries and the final fold
/// order do not depend on scheduling.
const REDUCE_CHUNKS: usize = 64;

fn apply_fft_last_block(plan: &MultiplierPlan, hats: &[SpectralField]) -> Result<SampledField> {
    let g = plan.grid;
    let m = hats.len();
    let n = g.dim();
    let len = g.len();
    let outer_count = len.pow((m - 1) as u32);
    let table = phase_table(g);
    let mpts = g.points_per_axis();

    let mut freq = vec![0.0; len * n];
    for i in 0..len {
        g.freq_point(i, &mut freq[i * n..(i + 1) * n]);
    }

    let chunk = outer_count.div_ceil(REDUCE_CHUNKS);
    let starts: Vec<usize> = (0..outer_count).step_by(chunk.max(1)).collect();

    let partials: Vec<Result<Vec<Complex64>>> = starts
        .par_iter()
        .map(|&start| {
            let stop = (start + chunk).min(outer_count);
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            let mut point = vec![0.0; m * n];
            let mut outer_axes = vec![0usize; (m - 1) * n];
            let mut inner = SpectralField::zeros(g);
            for o in start..stop {
                // decode the outer tuple and its product of transforms
                let mut weight = Complex64::new(1.0, 0.0);
                let mut rem = o;
                for j in 0..m - 1 {
                    let q = rem % len;
                    rem /= len;
                    point[j * n..(j + 1) * n].copy_from_slice(&freq[q * n..(q + 1) * n]);
                    weight *= hats[j].values[q];
                    g.decode(q, &mut outer_axes[j * n..(j + 1) * n]);
                }
                if weight == Complex64::new(0.0, 0.0) {
                    continue;
                }
                // inner transform over the last block
                for q in 0..len {
                    point[(m - 1) * n..m * n].copy_from_slice(&freq[q * n..(q + 1) * n]);
                    let s = sigma_at(plan, &point)?;
                    inner.values[q] = s * hats[m - 1].values[q];
                }
                let inner_x = inverse(&inner)?;
                // accumulate with the outer phase, factored per axis
                let mut x_axes = vec![0usize; n];
                for i in 0..len {
                    g.decode(i, &mut x_axes);
                    let mut phase = Complex64::new(1.0, 0.0);
                    for j in 0..m - 1 {
                        for c in 0..n {
                            phase *= table[x_axes[c] * mpts + outer_axes[j * n + c]];
                        }
                    }
                    acc[i] += weight * phase * inner_x.values[i];
                }
            }
            Ok(acc)
        })
        .collect();

    let mut out = SampledField::zeros(g);
    for p in partials {
        let p = p?;
        for (o, v) in out.values.iter_mut().zip(&p) {
            *o += v;
        }
    }
    let scale = g.freq_spacing().powi(((m - 1) * n) as i32);
    for v in out.values.iter_mut() {
        *v *= scale;
    }
    Ok(out)
}

/// Cyclically shifts a field by whole lattice steps per axis; for
/// fields supported away from the box boundary this is translation by
/// `h·shift`.
pub fn translate_field(f: &SampledField, shift: &[i64]) -> Result<SampledField> {
    let g = f.grid;
    if shift.len() != g.dim() {
        return Err(Error::Config("shift dimension mismatch".into()));
    }
    let m = g.points_per_axis() as i64;
    let mut out = SampledField::zeros(g);
    let mut axes = vec![0usize; g.dim()];
    let mut src = vec![0usize; g.dim()];
    for i in 0..g.len() {
        g.decode(i, &mut axes);
        for c in 0..g.dim() {
            src[c] = (axes[c] as i64 - shift[c]).rem_euclid(m) as usize;
        }
        out.values[i] = f.values[g.encode(&src)];
    }
    Ok(out)
}

/// The decay envelope dominating `|T_σ(a₁,…,a_m)|`: inside the doubled
/// support cubes it is `|T|` itself; outside, the product
/// `Π_k |Q_k|^{1-1/p_k+(N+1)/(nm)} / (|x-c_k| + ℓ(Q_k))^{n+(N+1)/m}`.
#[derive(Debug, Clone)]
pub struct TailMajorant {
    pub centers: Vec<Vec<f64>>,
    pub sides: Vec<f64>,
    pub p: Vec<f64>,
    pub moment_order: u32,
    pub dim: usize,
}

impl TailMajorant {
    /// Per-factor decay exponent `n + (N+1)/m`.
    pub fn factor_exponent(&self) -> f64 {
        self.dim as f64 + (self.moment_order as f64 + 1.0) / self.centers.len() as f64
    }

    /// True inside the union of doubled cubes `Q_k*`.
    pub fn inside_doubled_cubes(&self, x: &[f64]) -> bool {
        self.centers.iter().zip(&self.sides).any(|(c, &side)| {
            x.iter()
                .zip(c)
                .all(|(xi, ci)| (xi - ci).abs() <= side)
        })
    }

    /// The off-cube product term; strictly positive everywhere.
    pub fn far_term(&self, x: &[f64]) -> f64 {
        let n = self.dim as f64;
        let m = self.centers.len() as f64;
        let nn = self.moment_order as f64 + 1.0;
        let e = self.factor_exponent();
        let mut b = 1.0;
        for ((c, &side), &pk) in self.centers.iter().zip(&self.sides).zip(&self.p) {
            let vol = side.powi(self.dim as i32);
            let dist = x
                .iter()
                .zip(c)
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum::<f64>()
                .sqrt();
            b *= vol.powf(1.0 - 1.0 / pk + nn / (n * m)) / (dist + side).powf(e);
        }
        b
    }

    /// The majorant against grid output values.
    pub fn eval(&self, x: &[f64], t_abs: f64) -> f64 {
        if self.inside_doubled_cubes(x) {
            t_abs
        } else {
            self.far_term(x)
        }
    }
}

pub fn tail_majorant(atoms: &[SmoothAtom], p: &[f64], moment_order: u32) -> Result<TailMajorant> {
    if atoms.is_empty() || atoms.len() != p.len() {
        return Err(Error::Config(
            "tail_majorant needs one exponent per atom".into(),
        ));
    }
    let dim = atoms[0].dim;
    for a in atoms {
        if a.dim != dim {
            return Err(Error::Config("atoms have mixed dimensions".into()));
        }
    }
    Ok(TailMajorant {
        centers: atoms.iter().map(|a| a.support_center.clone()).collect(),
        sides: atoms.iter().map(|a| a.support_side).collect(),
        p: p.to_vec(),
        moment_order,
        dim,
    })
}

/// `C = max |T|/b` over the lattice, and the number of points where
/// `|T| > c_ref · b`.
pub fn check_pointwise_decay(
    t_out: &SampledField,
    b: &TailMajorant,
    c_ref: f64,
) -> Result<(f64, usize)> {
    let g = t_out.grid;
    if g.dim() != b.dim {
        return Err(Error::Grid("majorant dimension does not match output".into()));
    }
    let mut x = vec![0.0; g.dim()];
    let mut c: f64 = 0.0;
    let mut violations = 0usize;
    for i in 0..g.len() {
        g.phys_point(i, &mut x);
        let t = t_out.values[i].norm();
        let bv = b.eval(&x, t);
        if bv == 0.0 {
            // inside a cube where |T| itself vanishes: 0/0 counts as 0
            continue;
        }
        let ratio = t / bv;
        c = c.max(ratio);
        if t > c_ref * bv {
            violations += 1;
        }
    }
    Ok((c, violations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{bump, derivative_atom};
    use crate::grid::{make_grid, sample};
    use crate::symbols::builtins::{one, sigma0, sum_sq_1d};

    fn bump_field(g: Grid, center: &[f64], radius: f64) -> SampledField {
        let b = bump(center, radius);
        sample(|x| b.eval(x), g).unwrap()
    }

    #[test]
    fn identity_symbol_gives_pointwise_product() {
        let g = make_grid(1, 8.0, 256).unwrap();
        let f = bump_field(g, &[0.0], 1.0);
        let plan = MultiplierPlan::new(one(2, 1), g, Algorithm::FftLastBlock).unwrap();
        let t = apply(&plan, &[f.clone(), f.clone()]).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..g.len() {
            let exact = f.values[i] * f.values[i];
            worst = worst.max((t.values[i] - exact).norm());
        }
        assert!(worst <= 1e-8, "max error {worst:.3e}");
    }

    #[test]
    fn multilinearity() {
        let g = make_grid(1, 8.0, 128).unwrap();
        let f = bump_field(g, &[0.5], 1.0);
        let h = bump_field(g, &[-0.5], 0.8);
        let plan = MultiplierPlan::new(sum_sq_1d(), g, Algorithm::FftLastBlock).unwrap();

        let mut f2 = f.clone();
        for v in f2.values.iter_mut() {
            *v *= 2.0;
        }
        let t = apply(&plan, &[f.clone(), h.clone()]).unwrap();
        let t2 = apply(&plan, &[f2, h.clone()]).unwrap();
        let sup = t.max_abs();
        for i in 0..g.len() {
            assert!((t2.values[i] - 2.0 * t.values[i]).norm() <= 1e-12 * sup.max(1.0));
        }

        // additivity in the second slot
        let k = bump_field(g, &[1.0], 0.6);
        let mut hk = h.clone();
        for (a, b) in hk.values.iter_mut().zip(&k.values) {
            *a += b;
        }
        let t_h = apply(&plan, &[f.clone(), h]).unwrap();
        let t_k = apply(&plan, &[f.clone(), k]).unwrap();
        let t_sum = apply(&plan, &[f, hk]).unwrap();
        for i in 0..g.len() {
            assert!((t_sum.values[i] - t_h.values[i] - t_k.values[i]).norm() <= 1e-12 * sup.max(1.0));
        }
    }

    #[test]
    fn algorithms_agree_1d() {
        let g = make_grid(1, 6.0, 64).unwrap();
        let f = bump_field(g, &[0.3], 1.0);
        let h = bump_field(g, &[-0.4], 0.9);
        let naive = MultiplierPlan::new(sum_sq_1d(), g, Algorithm::Naive).unwrap();
        let fast = MultiplierPlan::new(sum_sq_1d(), g, Algorithm::FftLastBlock).unwrap();
        let a = apply(&naive, &[f.clone(), h.clone()]).unwrap();
        let b = apply(&fast, &[f, h]).unwrap();
        let sup = a.max_abs();
        for i in 0..g.len() {
            assert!((a.values[i] - b.values[i]).norm() <= 1e-10 * sup);
        }
    }

    #[test]
    fn algorithms_agree_2d() {
        let g = make_grid(2, 4.0, 16).unwrap();
        let f = bump_field(g, &[0.0, 0.2], 1.0);
        let h = bump_field(g, &[0.3, -0.1], 1.0);
        let naive = MultiplierPlan::new(sigma0(), g, Algorithm::Naive).unwrap();
        let fast = MultiplierPlan::new(sigma0(), g, Algorithm::FftLastBlock).unwrap();
        let a = apply(&naive, &[f.clone(), h.clone()]).unwrap();
        let b = apply(&fast, &[f, h]).unwrap();
        let sup = a.max_abs().max(1e-300);
        for i in 0..g.len() {
            assert!((a.values[i] - b.values[i]).norm() <= 1e-10 * sup);
        }
    }

    #[test]
    fn algorithms_agree_trilinear() {
        let g = make_grid(1, 4.0, 32).unwrap();
        let f = bump_field(g, &[0.0], 1.0);
        let h = bump_field(g, &[0.5], 0.8);
        let k = bump_field(g, &[-0.5], 0.9);
        let sym = one(3, 1);
        let naive = MultiplierPlan::new(sym.clone(), g, Algorithm::Naive).unwrap();
        let fast = MultiplierPlan::new(sym, g, Algorithm::FftLastBlock).unwrap();
        let a = apply(&naive, &[f.clone(), h.clone(), k.clone()]).unwrap();
        let b = apply(&fast, &[f, h, k]).unwrap();
        let sup = a.max_abs();
        for i in 0..g.len() {
            assert!((a.values[i] - b.values[i]).norm() <= 1e-10 * sup);
        }
    }

    #[test]
    fn translation_covariance() {
        let g = make_grid(1, 8.0, 128).unwrap();
        let f = bump_field(g, &[0.0], 1.0);
        let h = bump_field(g, &[0.5], 0.8);
        let plan = MultiplierPlan::new(sum_sq_1d(), g, Algorithm::FftLastBlock).unwrap();
        let t = apply(&plan, &[f.clone(), h.clone()]).unwrap();

        let shift = [16i64];
        let fs = translate_field(&f, &shift).unwrap();
        let hs = translate_field(&h, &shift).unwrap();
        let ts = apply(&plan, &[fs, hs]).unwrap();
        let expected = translate_field(&t, &shift).unwrap();
        let sup = t.max_abs();
        for i in 0..g.len() {
            assert!((ts.values[i] - expected.values[i]).norm() <= 1e-10 * sup);
        }
    }

    #[test]
    fn real_output_for_real_symmetric_symbol() {
        // resolved inputs: the one unpaired row at frequency -M/(4L)
        // otherwise breaks Hermitian symmetry at the spectral-tail level
        let g = make_grid(1, 4.0, 2048).unwrap();
        let f = bump_field(g, &[0.4], 1.0);
        let h = bump_field(g, &[-0.2], 1.2);
        let plan = MultiplierPlan::new(sum_sq_1d(), g, Algorithm::FftLastBlock).unwrap();
        let t = apply(&plan, &[f, h]).unwrap();
        let sup = t.max_abs();
        for v in &t.values {
            assert!(v.im.abs() <= 1e-10 * sup);
        }
    }

    #[test]
    fn deterministic_under_thread_count() {
        let g = make_grid(1, 6.0, 64).unwrap();
        let f = bump_field(g, &[0.0], 1.0);
        let plan = MultiplierPlan::new(sum_sq_1d(), g, Algorithm::FftLastBlock).unwrap();
        let a = apply(&plan, &[f.clone(), f.clone()]).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| apply(&plan, &[f.clone(), f])).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn zero_fields_give_zero_c() {
        let g = make_grid(1, 4.0, 64).unwrap();
        let a = derivative_atom(&[2], &[0.0], 1.0).unwrap();
        let b = tail_majorant(&[a.clone(), a], &[1.0, 1.0], 1).unwrap();
        let z = SampledField::zeros(g);
        let (c, violations) = check_pointwise_decay(&z, &b, 2.0).unwrap();
        assert_eq!(c, 0.0);
        assert_eq!(violations, 0);
    }

    #[test]
    fn majorant_far_field_ratio() {
        // m=2, n=1, N=1: per-factor exponent 2, product decay |x|^-4,
        // so b(2R)/b(R) ~ 2^-(mn+N+1) = 2^-4
        let a = derivative_atom(&[2], &[0.0], 0.5).unwrap();
        let b = tail_majorant(&[a.clone(), a], &[0.5, 0.5], 1).unwrap();
        assert_eq!(b.factor_exponent(), 2.0);
        for r in [50.0, 200.0] {
            let ratio = b.far_term(&[2.0 * r]) / b.far_term(&[r]);
            let target = 2.0f64.powi(-4);
            assert!(ratio / target < 2.0 && target / ratio < 2.0);
        }
        assert!(b.far_term(&[1000.0]) > 0.0);
    }

    #[test]
    fn majorant_matches_output_inside_cubes() {
        let a = derivative_atom(&[2], &[0.0], 0.5).unwrap();
        let b = tail_majorant(&[a.clone(), a], &[1.0, 1.0], 1).unwrap();
        assert!(b.inside_doubled_cubes(&[0.9]));
        assert!(!b.inside_doubled_cubes(&[1.1]));
        assert_eq!(b.eval(&[0.2], 0.37), 0.37);
    }

    #[test]
    fn arity_and_grid_mismatches_error() {
        let g = make_grid(1, 8.0, 64).unwrap();
        assert!(MultiplierPlan::new(sigma0(), g, Algorithm::Naive).is_err());
        let plan = MultiplierPlan::new(sum_sq_1d(), g, Algorithm::Naive).unwrap();
        let f = bump_field(g, &[0.0], 1.0);
        assert!(apply(&plan, &[f.clone()]).is_err());
        let g2 = make_grid(1, 4.0, 64).unwrap();
        let f2 = bump_field(g2, &[0.0], 1.0);
        assert!(apply(&plan, &[f.clone(), f2]).is_err());
    }
}
