//! Smooth compactly supported functions with certified vanishing
//! moments: derivative-of-bump atoms, the spectral ζ construction and
//! its (N+1)-fold self-convolution, and sup-norm normalization.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{forward, inverse, moment, sample, Grid, SampledField, SpectralField};
use crate::symbols::expr::{self, Arity, SymbolExpr};
use crate::util::multiindices;

/// Moment tolerance for atoms with closed-form derivatives.
pub const CLOSED_FORM_MOMENT_TOL: f64 = 1e-8;
/// Moment tolerance for spectrally constructed atoms (quadrature-limited).
pub const SPECTRAL_MOMENT_TOL: f64 = 1e-6;

/// `(N, L)` with `L = ⌊n(1/p - 1)⌋` and `N = L + 1`: the atom moment order
/// and the cancellation cap required for exponent `p` in dimension `n`.
pub fn required_n(p: f64, n: usize) -> Result<(u32, u32)> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!("p must lie in (0, 1], got {p}")));
    }
    let l = (n as f64 * (1.0 / p - 1.0) + 1e-9).floor() as u32;
    Ok((l + 1, l))
}

/// The standard mollifier `exp(-1/(1-|u|^2))` scaled to a ball.
#[derive(Debug, Clone)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Values below `1 - |u|^2 = CUT` are flushed to zero; the mollifier is
/// below 1e-400 there, far under every tolerance in this crate.
const EDGE_CUT: f64 = 1e-3;

impl Bump {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(xi, ci)| {
                let u = (xi - ci) / self.radius;
                u * u
            })
            .sum();
        let q = 1.0 - r2;
        if q <= EDGE_CUT {
            0.0
        } else {
            (-1.0 / q).exp()
        }
    }
}

pub fn bump(center: &[f64], radius: f64) -> Bump {
    Bump {
        center: center.to_vec(),
        radius,
    }
}

/// `∂^β` of a (scaled) bump in closed form: a rational prefactor in the
/// normalized coordinate times the mollifier, built by the chain rule
/// on the expression tree.
#[derive(Debug, Clone)]
pub struct DerivativeBump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub beta: Vec<u32>,
    prefactor: SymbolExpr,
    scale: f64,
}

impl DerivativeBump {
    fn new(beta: &[u32], center: &[f64], radius: f64) -> Result<DerivativeBump> {
        let n = beta.len();
        if n != center.len() {
            return Err(Error::Config(
                "derivative multiindex and center dimension mismatch".into(),
            ));
        }
        if !(radius > 0.0) {
            return Err(Error::Config("bump radius must be positive".into()));
        }
        let arity = Arity::new(1, n);
        // g(u) = -1 / (1 - |u|^2); ∂(P e^g) = (∂P + P ∂g) e^g
        let one_minus = expr::sub(
            expr::constant(1.0),
            expr::add((0..n).map(|c| expr::int_pow(expr::var(0, c), 2)).collect()),
        );
        let g = expr::quot(expr::constant(-1.0), one_minus);
        let mut p = expr::constant(1.0);
        for (c, &ord) in beta.iter().enumerate() {
            let mut e_c = vec![0u32; n];
            e_c[c] = 1;
            for _ in 0..ord {
                let dp = SymbolExpr::new(arity, p.clone()).diff(0, &e_c)?.root;
                let dg = SymbolExpr::new(arity, g.clone()).diff(0, &e_c)?.root;
                p = expr::add(vec![dp, expr::mul(vec![p, dg])]);
            }
        }
        let total: u32 = beta.iter().sum();
        Ok(DerivativeBump {
            center: center.to_vec(),
            radius,
            beta: beta.to_vec(),
            prefactor: SymbolExpr::new(arity, p),
            scale: radius.powi(-(total as i32)),
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.center.len();
        let mut u = vec![0.0; n];
        let mut r2 = 0.0;
        for c in 0..n {
            u[c] = (x[c] - self.center[c]) / self.radius;
            r2 += u[c] * u[c];
        }
        let q = 1.0 - r2;
        if q <= EDGE_CUT {
            return 0.0;
        }
        let pref = self
            .prefactor
            .evaluate(&u)
            .expect("prefactor is regular away from the support edge");
        pref * (-1.0 / q).exp() * self.scale
    }
}

/// How an atom's values are produced.
#[derive(Debug, Clone)]
pub enum AtomKind {
    /// Closed-form callable (derivative of a bump), scaled by `factor`.
    Closed { db: DerivativeBump, factor: f64 },
    /// Grid-resident values (spectral constructions), scaled by `factor`.
    Sampled { field: SampledField, factor: f64 },
}

/// A compactly supported smooth function with certified vanishing
/// moments up to `vanishing_order` and a declared support cube.
#[derive(Debug, Clone)]
pub struct SmoothAtom {
    pub dim: usize,
    pub kind: AtomKind,
    pub support_center: Vec<f64>,
    pub support_side: f64,
    pub vanishing_order: u32,
    pub sup_bound: f64,
}

impl SmoothAtom {
    /// Pointwise value; for grid-resident atoms this is nearest-lattice
    /// lookup, valid only on the construction grid.
    pub fn sample_on(&self, grid: Grid) -> Result<SampledField> {
        match &self.kind {
            AtomKind::Closed { db, factor } => {
                let f = *factor;
                sample(|x| db.eval(x) * f, grid)
            }
            AtomKind::Sampled { field, factor } => {
                if field.grid != grid {
                    return Err(Error::Grid(
                        "grid-resident atom sampled on a different grid".into(),
                    ));
                }
                let mut out = field.clone();
                for v in out.values.iter_mut() {
                    *v *= *factor;
                }
                Ok(out)
            }
        }
    }

    /// Closed-form evaluation; errors for grid-resident atoms.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            AtomKind::Closed { db, factor } => db.eval(x) * factor,
            AtomKind::Sampled { .. } => {
                panic!("grid-resident atoms have no closed-form evaluation")
            }
        }
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.kind, AtomKind::Closed { .. })
    }

    /// The moment tolerance this atom must meet, by construction route.
    pub fn moment_tol(&self) -> f64 {
        if self.is_closed_form() {
            CLOSED_FORM_MOMENT_TOL
        } else {
            SPECTRAL_MOMENT_TOL
        }
    }

    /// Support-cube half side.
    pub fn half_side(&self) -> f64 {
        self.support_side / 2.0
    }
}

/// Scans a fine local lattice over the support for the sup norm.
fn scan_sup(db: &DerivativeBump) -> f64 {
    let n = db.center.len();
    let pts_per_axis = match n {
        1 => 4097,
        2 => 257,
        _ => 65,
    };
    let mut sup: f64 = 0.0;
    let total = (pts_per_axis as usize).pow(n as u32);
    let mut x = vec![0.0; n];
    for idx in 0..total {
        let mut rem = idx;
        for c in 0..n {
            let k = rem % pts_per_axis;
            rem /= pts_per_axis;
            x[c] = db.center[c] + db.radius * (2.0 * k as f64 / (pts_per_axis - 1) as f64 - 1.0);
        }
        sup = sup.max(db.eval(&x).abs());
    }
    sup * 1.05
}

/// `∂^β bump`: an atom with vanishing moments up to order `|β| - 1`.
pub fn derivative_atom(beta: &[u32], center: &[f64], radius: f64) -> Result<SmoothAtom> {
    let total: u32 = beta.iter().sum();
    if total == 0 {
        return Err(Error::Config(
            "derivative_atom needs |β| >= 1; the plain bump has no vanishing moments".into(),
        ));
    }
    if beta.is_empty() || beta.len() > 3 || center.len() != beta.len() {
        return Err(Error::Config(format!(
            "atom dimension {} outside the supported range 1..=3",
            beta.len()
        )));
    }
    if total > 16 {
        return Err(Error::Config(format!(
            "derivative order |β| = {total} exceeds the supported maximum 16; \
             the symbolic prefactor grows too large beyond that"
        )));
    }
    if !(radius > 0.0 && radius <= 1e3) || !radius.is_finite() {
        return Err(Error::Config(format!(
            "atom radius {radius} outside the supported range (0, 1e3]"
        )));
    }
    if center.iter().any(|c| !c.is_finite() || c.abs() > 1e6) {
        return Err(Error::Config("atom center component out of range".into()));
    }
    let db = DerivativeBump::new(beta, center, radius)?;
    let sup_bound = scan_sup(&db);
    Ok(SmoothAtom {
        dim: beta.len(),
        kind: AtomKind::Closed { db, factor: 1.0 },
        support_center: center.to_vec(),
        support_side: 2.0 * radius,
        vanishing_order: total - 1,
        sup_bound,
    })
}

/// Scales an atom so its grid sup norm is 1; `p` is validated as a
/// Hardy exponent but does not enter the scaling.
pub fn normalize(atom: &SmoothAtom, p: f64, grid: Grid) -> Result<SmoothAtom> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!("p must lie in (0, 1], got {p}")));
    }
    let f = atom.sample_on(grid)?;
    let sup = f.max_abs();
    if sup == 0.0 {
        return Err(Error::Degenerate("cannot normalize the zero atom".into()));
    }
    let mut out = atom.clone();
    match &mut out.kind {
        AtomKind::Closed { factor, .. } | AtomKind::Sampled { factor, .. } => {
            *factor /= sup;
        }
    }
    out.sup_bound = (atom.sup_bound / sup).max(1.0);
    Ok(out)
}

/// Max normalized moment over `|α| <= max_order`:
/// `|∫ x^α a| / (h^n Σ|a| · diam^{|α|})`.
pub fn verify_moments(atom: &SmoothAtom, max_order: u32, grid: Grid) -> Result<f64> {
    let f = atom.sample_on(grid)?;
    let l1 = f.l1_norm();
    if l1 == 0.0 {
        return Ok(0.0);
    }
    let diam = atom.support_side * (atom.dim as f64).sqrt();
    let mut worst: f64 = 0.0;
    for alpha in multiindices(atom.dim, max_order) {
        let order: u32 = alpha.iter().sum();
        let m = moment(&f, &alpha)?;
        worst = worst.max(m.norm() / (l1 * diam.powi(order as i32)));
    }
    Ok(worst)
}

/// Certifies an atom's advertised vanishing order on the given grid.
pub fn certify(atom: &SmoothAtom, grid: Grid) -> Result<()> {
    let worst = verify_moments(atom, atom.vanishing_order, grid)?;
    if worst > atom.moment_tol() {
        return Err(Error::Construction(format!(
            "atom advertises vanishing order {} but worst normalized moment is {worst:.3e}",
            atom.vanishing_order
        )));
    }
    Ok(())
}

/// The ζ construction: `ζ^ = Φ^ · w` with
/// `w(ξ) = ((cos|ξ| - 1)/|ξ|)^{n+1}`, dilated until ζ^ is zero-free on
/// the punctured unit ball.
#[derive(Debug, Clone)]
pub struct ZetaFunction {
    pub atom: SmoothAtom,
    pub hat: SpectralField,
    /// Dilation applied to the frequency argument (bump radius used).
    pub dilation: f64,
}

fn w_profile(r: f64, n: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    ((r.cos() - 1.0) / r).powi(n as i32 + 1)
}

/// Smallest dilation attempted before giving up.
const MIN_ZETA_DILATION: f64 = 1.0 / 64.0;

pub fn zeta(dim: usize, grid: Grid) -> Result<ZetaFunction> {
    if grid.dim() != dim {
        return Err(Error::Config("zeta grid dimension mismatch".into()));
    }
    if grid.spacing() > 1.0 / 16.0 {
        return Err(Error::Grid(
            "zeta needs the unit ball resolved with at least 32 points per axis".into(),
        ));
    }
    let eps0 = 2.0 * grid.freq_spacing();
    let mut s = 1.0;
    while s >= MIN_ZETA_DILATION {
        let phi = bump(&vec![0.0; dim], s);
        let phi_field = sample(|x| phi.eval(x), grid)?;
        let mass = moment(&phi_field, &vec![0u32; dim])?.re;
        let phi_hat = forward(&phi_field)?;

        let mut hat = SpectralField::zeros(grid);
        let mut xi = vec![0.0; dim];
        for i in 0..grid.len() {
            grid.freq_point(i, &mut xi);
            let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            hat.values[i] = phi_hat.values[i] / mass * w_profile(s * r, dim);
        }

        // zero-free on the punctured ball up to 1.05, with margin
        let mut min_inside = f64::INFINITY;
        let mut max_abs: f64 = 0.0;
        for i in 0..grid.len() {
            grid.freq_point(i, &mut xi);
            let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let a = hat.values[i].norm();
            max_abs = max_abs.max(a);
            if r >= eps0 && r <= 1.05 {
                min_inside = min_inside.min(a);
            }
        }
        if min_inside > 1e-6 * max_abs {
            let z = inverse(&hat)?;
            let side = measure_support_side(&z);
            let sup = z.max_abs();
            let atom = SmoothAtom {
                dim,
                kind: AtomKind::Sampled {
                    field: z,
                    factor: 1.0,
                },
                support_center: vec![0.0; dim],
                support_side: side,
                vanishing_order: 0,
                sup_bound: sup * 1.0000001,
            };
            return Ok(ZetaFunction {
                atom,
                hat,
                dilation: s,
            });
        }
        s *= 0.5;
    }
    Err(Error::Construction(
        "zeta: no dilation kept the transform zero-free on the punctured unit ball".into(),
    ))
}

/// Smallest centered cube side containing all values above
/// `1e-6 · sup`.  The threshold sits well above the spectral aliasing
/// floor (~1e-8 relative on the grids we use) so truncation ringing
/// outside the true support does not inflate the measurement.
fn measure_support_side(f: &SampledField) -> f64 {
    let sup = f.max_abs();
    if sup == 0.0 {
        return 0.0;
    }
    let g = f.grid;
    let mut x = vec![0.0; g.dim()];
    let mut half: f64 = 0.0;
    for i in 0..g.len() {
        if f.values[i].norm() > 1e-6 * sup {
            g.phys_point(i, &mut x);
            for &c in x.iter() {
                half = half.max(c.abs());
            }
        }
    }
    2.0 * (half + g.spacing())
}

/// `Ω_N` member: the (N+1)-fold self-convolution of ζ, built
/// spectrally as `inverse(ζ^{N+1})`.
pub fn omega_atom(n_order: u32, dim: usize, grid: Grid) -> Result<SmoothAtom> {
    let z = zeta(dim, grid)?;
    let zeta_side = z.atom.support_side;
    let total_side = (n_order as f64 + 1.0) * zeta_side;
    if total_side / 2.0 >= grid.half_extent() {
        return Err(Error::Grid(format!(
            "omega_atom support (side {total_side:.2}) does not fit in [-L, L) with L={}",
            grid.half_extent()
        )));
    }
    let mut hat = z.hat.clone();
    for v in hat.values.iter_mut() {
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..=n_order {
            acc *= *v;
        }
        *v = acc;
    }
    let g = inverse(&hat)?;
    let sup = g.max_abs();
    let side = measure_support_side(&g);
    let atom = SmoothAtom {
        dim,
        kind: AtomKind::Sampled {
            field: g,
            factor: 1.0,
        },
        support_center: vec![0.0; dim],
        support_side: side,
        vanishing_order: n_order,
        sup_bound: sup * 1.0000001,
    };
    certify(&atom, grid)?;
    Ok(atom)
}

/// Translates a closed-form atom; moments up to its order still vanish.
pub fn translate(atom: &SmoothAtom, offset: &[f64]) -> Result<SmoothAtom> {
    match &atom.kind {
        AtomKind::Closed { db, factor } => {
            let mut db = db.clone();
            for (c, o) in db.center.iter_mut().zip(offset) {
                *c += o;
            }
            let mut out = atom.clone();
            out.support_center = db.center.clone();
            out.kind = AtomKind::Closed {
                db,
                factor: *factor,
            };
            Ok(out)
        }
        AtomKind::Sampled { .. } => Err(Error::Config(
            "only closed-form atoms support translation".into(),
        )),
    }
}

/// A list of m-tuples of certified atoms with per-slot target exponents.
#[derive(Debug, Clone)]
pub struct AtomBattery {
    pub tuples: Vec<Vec<SmoothAtom>>,
    pub p: Vec<f64>,
}

/// Canonical multiindex of a given total order, spread across axes.
fn spread_index(order: u32, n: usize) -> Vec<u32> {
    let mut beta = vec![0u32; n];
    for i in 0..order {
        beta[(i as usize) % n] += 1;
    }
    beta
}

/// The default battery: derivative atoms with `|β| ∈ {N+1, N+2}`,
/// radii `{1/2, 1}`, centers `{0, e_1}` — 8 tuples, identical slots.
pub fn default_battery(m: usize, n: usize, moment_order: u32, p: &[f64]) -> Result<AtomBattery> {
    let mut tuples = Vec::new();
    for &extra in &[1u32, 2u32] {
        for &radius in &[0.5f64, 1.0] {
            for &shift in &[0.0f64, 1.0] {
                let mut center = vec![0.0; n];
                center[0] = shift;
                let beta = spread_index(moment_order + extra, n);
                let atom = derivative_atom(&beta, &center, radius)?;
                tuples.push(vec![atom; m]);
            }
        }
    }
    Ok(AtomBattery {
        tuples,
        p: p.to_vec(),
    })
}
