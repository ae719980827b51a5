//! Deterministic seeded sampling of the antidiagonal hyperplane
//! `Δ_n = {ξ_1 + … + ξ_m = 0}` and of full shells, staying away from
//! the coordinate-block zero sets Γ and a symbol's singular set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::expr::SymbolExpr;

/// Shell radii, directions per shell, rejection margin and seed.
#[derive(Debug, Clone)]
pub struct SamplerSpec {
    pub radii: Vec<f64>,
    pub directions_per_shell: usize,
    pub reject_radius: f64,
    pub seed: u64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        // 17 log-spaced shells in [1e-2, 1e2]
        let radii = (0..17)
            .map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 16.0))
            .collect();
        SamplerSpec {
            radii,
            directions_per_shell: 32,
            reject_radius: 1e-3,
            seed: 42,
        }
    }
}

impl SamplerSpec {
    pub fn with_seed(seed: u64) -> SamplerSpec {
        SamplerSpec {
            seed,
            ..SamplerSpec::default()
        }
    }

    pub fn total_samples(&self) -> usize {
        self.radii.len() * self.directions_per_shell
    }
}

/// Relative margin kept between samples and Γ; tighter points amplify
/// round-off in the derivative trees beyond the symbolic-zero tolerance.
const RELATIVE_GAMMA_MARGIN: f64 = 0.1;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn unit_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn block_norms(point: &[f64], m: usize, n: usize) -> Vec<f64> {
    (0..m)
        .map(|j| point[j * n..(j + 1) * n].iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect()
}

fn accepted(point: &[f64], radius: f64, sym: &SymbolExpr, spec: &SamplerSpec) -> bool {
    let m = sym.arity.blocks;
    let n = sym.arity.block_dim;
    let floor = spec.reject_radius.max(RELATIVE_GAMMA_MARGIN * radius);
    if block_norms(point, m, n).iter().any(|&r| r < floor) {
        return false;
    }
    !sym.is_singular(point)
}

/// Sampled points on `Δ_n \ Γ` avoiding the singular set of `sym`.
///
/// Identical specs (same seed) produce identical points bit-for-bit.
pub fn sample_diagonal(spec: &SamplerSpec, sym: &SymbolExpr) -> Result<Vec<Vec<f64>>> {
    let m = sym.arity.blocks;
    let n = sym.arity.block_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points = Vec::with_capacity(spec.total_samples());
    for &r in &spec.radii {
        for _ in 0..spec.directions_per_shell {
            let mut ok = false;
            for _attempt in 0..100 {
                let dir = unit_direction(&mut rng, (m - 1) * n);
                let mut point = vec![0.0; m * n];
                for (i, &v) in dir.iter().enumerate() {
                    point[i] = r * v;
                }
                for c in 0..n {
                    let mut s = 0.0;
                    for j in 0..m - 1 {
                        s += point[j * n + c];
                    }
                    point[(m - 1) * n + c] = -s;
                }
                if accepted(&point, r, sym, spec) {
                    points.push(point);
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(Error::Sampler(format!(
                    "could not place a Δ_n sample on shell r={r} away from Γ \
                     and the singular set after 100 attempts"
                )));
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Sampler("all samples rejected".into()));
    }
    Ok(points)
}

/// Sampled points on full shells `|ξ| = r` in `R^{mn}`, same rejection
/// rules as [`sample_diagonal`].
pub fn sample_shells(spec: &SamplerSpec, sym: &SymbolExpr) -> Result<Vec<(f64, Vec<f64>)>> {
    let m = sym.arity.blocks;
    let n = sym.arity.block_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5EED_0511);
    let mut points = Vec::with_capacity(spec.total_samples());
    for &r in &spec.radii {
        for _ in 0..spec.directions_per_shell {
            let mut ok = false;
            for _attempt in 0..100 {
                let dir = unit_direction(&mut rng, m * n);
                let point: Vec<f64> = dir.iter().map(|&v| r * v).collect();
                if accepted(&point, r, sym, spec) {
                    points.push((r, point));
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(Error::Sampler(format!(
                    "could not place a shell sample at r={r} after 100 attempts"
                )));
            }
        }
    }
    Ok(points)
}
