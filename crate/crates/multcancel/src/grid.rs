//! Sampled fields on centered lattices and the discrete Fourier transform
//! in the convention `f^(ξ) = ∫ f(x) e^{-2πi x·ξ} dx`.
//!
//! The physical lattice is `x = -L + h k`, `k = 0..M-1` per axis, with
//! `h = 2L/M`; the frequency lattice is `ξ = Δξ j`, `j = -M/2..M/2-1`,
//! with `Δξ = 1/(2L)`.  The forward transform is the rectangle rule
//! `h^n Σ_k f(x_k) e^{-2πi x_k·ξ_j}`, realized as a scaled and
//! phase-corrected fast transform, so `inverse(forward(f)) = f` up to
//! round-off.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Hard cap on the moment order accepted by [`moment`].
pub const MAX_MOMENT_ORDER: u32 = 16;

/// A centered physical/frequency lattice on `[-L, L)^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    half_extent: f64,
    points_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, half_extent: f64, points_per_axis: usize) -> Result<Grid> {
        if dim < 1 || dim > 3 {
            return Err(Error::Config(format!(
                "grid dim must be in 1..=3, got {dim}"
            )));
        }
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(Error::Config(format!(
                "grid half_extent must be positive and finite, got {half_extent}"
            )));
        }
        if points_per_axis < 8 || points_per_axis % 2 != 0 {
            return Err(Error::Config(format!(
                "points_per_axis must be even and >= 8, got {points_per_axis}"
            )));
        }
        Ok(Grid {
            dim,
            half_extent,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Physical lattice spacing `h = 2L/M`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.points_per_axis as f64
    }

    /// Frequency lattice spacing `Δξ = 1/(2L)`.
    pub fn freq_spacing(&self) -> f64 {
        1.0 / (2.0 * self.half_extent)
    }

    /// Largest resolved frequency `M/(4L)`.
    pub fn freq_half_extent(&self) -> f64 {
        self.points_per_axis as f64 / (4.0 * self.half_extent)
    }

    /// Total number of lattice points `M^n`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Decodes a flat row-major index into per-axis indices (axis 0 slowest).
    pub fn decode(&self, mut idx: usize, out: &mut [usize]) {
        let m = self.points_per_axis;
        for a in (0..self.dim).rev() {
            out[a] = idx % m;
            idx /= m;
        }
    }

    pub fn encode(&self, axes: &[usize]) -> usize {
        let m = self.points_per_axis;
        let mut idx = 0;
        for &k in axes.iter() {
            idx = idx * m + k;
        }
        idx
    }

    /// Physical point for a flat index.
    pub fn phys_point(&self, idx: usize, out: &mut [f64]) {
        let mut axes = [0usize; 3];
        self.decode(idx, &mut axes[..self.dim]);
        let h = self.spacing();
        for a in 0..self.dim {
            out[a] = -self.half_extent + h * axes[a] as f64;
        }
    }

    /// Frequency point for a flat index (index 0 maps to `j = -M/2`).
    pub fn freq_point(&self, idx: usize, out: &mut [f64]) {
        let mut axes = [0usize; 3];
        self.decode(idx, &mut axes[..self.dim]);
        let d = self.freq_spacing();
        let half = (self.points_per_axis / 2) as i64;
        for a in 0..self.dim {
            out[a] = d * (axes[a] as i64 - half) as f64;
        }
    }

    /// Flat index of the frequency lattice point with signed per-axis
    /// indices `j`, or `None` if any falls outside `-M/2..M/2`.
    pub fn freq_index(&self, j: &[i64]) -> Option<usize> {
        let m = self.points_per_axis as i64;
        let mut idx: usize = 0;
        for &ja in j.iter() {
            if ja < -m / 2 || ja >= m / 2 {
                return None;
            }
            idx = idx * self.points_per_axis + (ja + m / 2) as usize;
        }
        Some(idx)
    }
}

/// Construct a grid; see [`Grid::new`].
pub fn make_grid(dim: usize, half_extent: f64, points_per_axis: usize) -> Result<Grid> {
    Grid::new(dim, half_extent, points_per_axis)
}

/// Complex values on the physical lattice of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

/// Complex values on the frequency lattice of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn zeros(grid: Grid) -> SampledField {
        SampledField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `h^n Σ |f|` — the rectangle-rule L1 norm.
    pub fn l1_norm(&self) -> f64 {
        let w = self.grid.spacing().powi(self.grid.dim() as i32);
        w * self.values.iter().map(|v| v.norm()).sum::<f64>()
    }

    pub fn check_finite(&self) -> Result<()> {
        check_finite(&self.grid, &self.values, true)
    }
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> SpectralField {
        SpectralField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn check_finite(grid: &Grid, values: &[Complex64], physical: bool) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !v.re.is_finite() || !v.im.is_finite() {
            let mut pt = vec![0.0; grid.dim()];
            if physical {
                grid.phys_point(i, &mut pt);
            } else {
                grid.freq_point(i, &mut pt);
            }
            return Err(Error::NonFinite { point: pt });
        }
    }
    Ok(())
}

/// Evaluates `f` at every physical lattice point.
pub fn sample<F>(f: F, grid: Grid) -> Result<SampledField>
where
    F: Fn(&[f64]) -> f64,
{
    sample_complex(|x| Complex64::new(f(x), 0.0), grid)
}

pub fn sample_complex<F>(f: F, grid: Grid) -> Result<SampledField>
where
    F: Fn(&[f64]) -> Complex64,
{
    let mut values = Vec::with_capacity(grid.len());
    let mut x = vec![0.0; grid.dim()];
    for i in 0..grid.len() {
        grid.phys_point(i, &mut x);
        let v = f(&x);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite { point: x });
        }
        values.push(v);
    }
    Ok(SampledField { grid, values })
}

/// Runs the length-M transform along every axis of a row-major cube.
fn fft_all_axes(grid: &Grid, data: &mut [Complex64], forward: bool) {
    let m = grid.points_per_axis();
    let n = grid.dim();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if forward {
        planner.plan_fft_forward(m)
    } else {
        planner.plan_fft_inverse(m)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let total = grid.len();
    for axis in 0..n {
        // stride between consecutive elements along `axis`
        let stride = m.pow((n - 1 - axis) as u32);
        let lines = total / m;
        for l in 0..lines {
            // base index of the l-th line along `axis`
            let block = l / stride;
            let offset = l % stride;
            let base = block * stride * m + offset;
            for k in 0..m {
                line[k] = data[base + k * stride];
            }
            fft.process(&mut line);
            for k in 0..m {
                data[base + k * stride] = line[k];
            }
        }
    }
}

/// Centered-convention reindex with the per-axis sign `(-1)^j`.
///
/// `to_centered`: raw DFT order -> centered order (forward direction);
/// otherwise the inverse permutation.
fn recenter(grid: &Grid, src: &[Complex64], to_centered: bool) -> Vec<Complex64> {
    let m = grid.points_per_axis();
    let n = grid.dim();
    let half = m / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    let mut axes = [0usize; 3];
    for p in 0..src.len() {
        grid.decode(p, &mut axes[..n]);
        let mut raw = 0usize;
        let mut sign = 1.0;
        for a in 0..n {
            let r = (axes[a] + half) % m;
            raw = raw * m + r;
            // j = p_a - M/2; parity of j equals parity of p_a + M/2
            if (axes[a] + half) % 2 == 1 {
                sign = -sign;
            }
        }
        if to_centered {
            out[p] = src[raw] * sign;
        } else {
            out[raw] = src[p] * sign;
        }
    }
    out
}

/// Forward transform: rectangle-rule approximation of the Fourier integral.
pub fn forward(f: &SampledField) -> Result<SpectralField> {
    f.check_finite()?;
    let grid = f.grid;
    let mut data = f.values.clone();
    fft_all_axes(&grid, &mut data, true);
    let mut values = recenter(&grid, &data, true);
    let scale = grid.spacing().powi(grid.dim() as i32);
    for v in values.iter_mut() {
        *v *= scale;
    }
    check_finite(&grid, &values, false)?;
    Ok(SpectralField { grid, values })
}

/// Inverse transform; exact inverse of [`forward`] up to round-off.
pub fn inverse(big_f: &SpectralField) -> Result<SampledField> {
    let grid = big_f.grid;
    let mut data = recenter(&grid, &big_f.values, false);
    fft_all_axes(&grid, &mut data, false);
    let scale = grid.freq_spacing().powi(grid.dim() as i32);
    for v in data.iter_mut() {
        *v *= scale;
    }
    check_finite(&grid, &data, true)?;
    Ok(SampledField { grid, values: data })
}

/// Rectangle-rule moment `h^n Σ_k x_k^α f(x_k)`.
pub fn moment(f: &SampledField, alpha: &[u32]) -> Result<Complex64> {
    let grid = f.grid;
    if alpha.len() != grid.dim() {
        return Err(Error::Config(format!(
            "moment multiindex length {} does not match grid dim {}",
            alpha.len(),
            grid.dim()
        )));
    }
    let order: u32 = alpha.iter().sum();
    if order > MAX_MOMENT_ORDER {
        return Err(Error::Config(format!(
            "moment order {order} exceeds cap {MAX_MOMENT_ORDER}"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut x = vec![0.0; grid.dim()];
    for i in 0..grid.len() {
        grid.phys_point(i, &mut x);
        let mut w = 1.0;
        for a in 0..grid.dim() {
            w *= x[a].powi(alpha[a] as i32);
        }
        acc += f.values[i] * w;
    }
    Ok(acc * grid.spacing().powi(grid.dim() as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::bump;

    fn gaussian(x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (-std::f64::consts::PI * r2).exp()
    }

    #[test]
    fn make_grid_spacings() {
        let g = make_grid(1, 8.0, 256).unwrap();
        assert_eq!(g.spacing(), 1.0 / 16.0);
        assert_eq!(g.freq_spacing(), 1.0 / 16.0);
        let g = make_grid(2, 4.0, 128).unwrap();
        assert_eq!(g.spacing(), 1.0 / 16.0);
        assert_eq!(g.freq_spacing(), 1.0 / 8.0);
    }

    #[test]
    fn make_grid_rejects_odd() {
        assert!(make_grid(1, 8.0, 255).is_err());
        assert!(make_grid(1, 8.0, 4).is_err());
        assert!(make_grid(0, 8.0, 256).is_err());
        assert!(make_grid(1, -1.0, 256).is_err());
    }

    #[test]
    fn sample_constant_zero() {
        let g = make_grid(1, 8.0, 256).unwrap();
        let f = sample(|_| 0.0, g).unwrap();
        assert!(f.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn sample_gaussian_peak() {
        let g = make_grid(1, 8.0, 256).unwrap();
        let f = sample(gaussian, g).unwrap();
        assert_eq!(f.max_abs(), 1.0); // x = 0 is a lattice point
    }

    #[test]
    fn sample_bump_support() {
        let g = make_grid(1, 8.0, 256).unwrap();
        let b = bump(&[0.0], 1.0);
        let f = sample(|x| b.eval(x), g).unwrap();
        let mut x = [0.0];
        for i in 0..g.len() {
            g.phys_point(i, &mut x);
            if x[0].abs() >= 1.0 {
                assert_eq!(f.values[i].norm(), 0.0);
            }
        }
    }

    #[test]
    fn sample_rejects_non_finite() {
        let g = make_grid(1, 8.0, 256).unwrap();
        let r = sample(|x| 1.0 / x[0], g); // hits x = 0 exactly
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn gaussian_self_duality() {
        let g = make_grid(1, 8.0, 256).unwrap();
        let f = sample(gaussian, g).unwrap();
        let fh = forward(&f).unwrap();
        let mut xi = [0.0];
        let mut max_err: f64 = 0.0;
        for i in 0..g.len() {
            g.freq_point(i, &mut xi);
            let expect = gaussian(&xi);
            max_err = max_err.max((fh.values[i] - expect).norm());
        }
        assert!(max_err <= 1e-8, "max err {max_err}");
    }

    #[test]
    fn forward_zero_and_real_even() {
        let g = make_grid(1, 8.0, 128).unwrap();
        let z = sample(|_| 0.0, g).unwrap();
        assert_eq!(forward(&z).unwrap().max_abs(), 0.0);

        let f = sample(gaussian, g).unwrap();
        let fh = forward(&f).unwrap();
        let scale = fh.max_abs();
        for v in &fh.values {
            assert!(v.im.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn round_trip_bump() {
        let g = make_grid(1, 8.0, 256).unwrap();
        let b = bump(&[0.0], 1.0);
        let f = sample(|x| b.eval(x), g).unwrap();
        let back = inverse(&forward(&f).unwrap()).unwrap();
        let sup = f.max_abs();
        for (a, b) in f.values.iter().zip(back.values.iter()) {
            assert!((a - b).norm() <= 1e-12 * sup);
        }
    }

    #[test]
    fn round_trip_2d() {
        let g = make_grid(2, 4.0, 32).unwrap();
        let f = sample(gaussian, g).unwrap();
        let back = inverse(&forward(&f).unwrap()).unwrap();
        for (a, b) in f.values.iter().zip(back.values.iter()) {
            assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn delta_spike_constant_magnitude() {
        let g = make_grid(1, 8.0, 64).unwrap();
        let mut f = SampledField::zeros(g);
        f.values[13] = Complex64::new(1.0, 0.0);
        let fh = forward(&f).unwrap();
        let h = g.spacing();
        // direct DFT: |f^(ξ)| = h everywhere
        for v in &fh.values {
            assert!((v.norm() - h).abs() <= 1e-14);
        }
        let back = inverse(&fh).unwrap();
        for (i, v) in back.values.iter().enumerate() {
            let expect = if i == 13 { 1.0 } else { 0.0 };
            assert!((v.re - expect).abs() <= 1e-12 && v.im.abs() <= 1e-12);
        }
    }

    #[test]
    fn parseval() {
        let g = make_grid(1, 8.0, 256).unwrap();
        let b = bump(&[0.3], 0.7);
        let f = sample(|x| b.eval(x), g).unwrap();
        let fh = forward(&f).unwrap();
        let lhs: f64 = g.spacing() * f.values.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let rhs: f64 = g.freq_spacing() * fh.values.iter().map(|v| v.norm_sqr()).sum::<f64>();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(rhs));
    }

    #[test]
    fn forward_linearity() {
        let g = make_grid(1, 6.0, 128).unwrap();
        let b1 = bump(&[0.0], 1.0);
        let b2 = bump(&[0.5], 0.5);
        let f1 = sample(|x| b1.eval(x), g).unwrap();
        let f2 = sample(|x| b2.eval(x), g).unwrap();
        let combo = sample(|x| 2.0 * b1.eval(x) - 3.0 * b2.eval(x), g).unwrap();
        let lhs = forward(&combo).unwrap();
        let t1 = forward(&f1).unwrap();
        let t2 = forward(&f2).unwrap();
        let scale = lhs.max_abs();
        for i in 0..g.len() {
            let rhs = t1.values[i] * 2.0 - t2.values[i] * 3.0;
            assert!((lhs.values[i] - rhs).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn moment_examples() {
        let g = make_grid(1, 8.0, 256).unwrap();
        let b = bump(&[0.0], 1.0);
        let db = crate::atoms::derivative_atom(&[1], &[0.0], 1.0).unwrap();
        let fb = sample(|x| b.eval(x), g).unwrap();
        let fdb = sample(|x| db.eval(x), g).unwrap();

        // integral of a derivative vanishes
        assert!(moment(&fdb, &[0]).unwrap().norm() <= 1e-10);
        // bump has positive mass
        let m0 = moment(&fb, &[0]).unwrap();
        assert!(m0.re > 0.0 && m0.im.abs() <= 1e-14);
        // odd integrand
        assert!(moment(&fb, &[1]).unwrap().norm() <= 1e-10);
        // order cap
        assert!(moment(&fb, &[MAX_MOMENT_ORDER + 1]).is_err());
    }
}
