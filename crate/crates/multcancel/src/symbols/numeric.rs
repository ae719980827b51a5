//! Black-box adapter for user symbols given as plain callables.
//!
//! Derivatives here are central finite differences with one Richardson
//! step, not exact tree derivatives; verdicts derived from this path
//! are lower-confidence than the symbolic route and use the looser
//! finite-difference tolerance.

use super::expr::Arity;

pub struct BlackBoxSymbol {
    pub arity: Arity,
    f: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl BlackBoxSymbol {
    pub fn new<F>(arity: Arity, f: F) -> BlackBoxSymbol
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        BlackBoxSymbol { arity, f: Box::new(f) }
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        (self.f)(point)
    }

    /// `∂^α_k` at `point` by nested Richardson-extrapolated central
    /// differences with base step `step`.
    pub fn fd_diff(&self, block: usize, alpha: &[u32], point: &[f64], step: f64) -> f64 {
        let n = self.arity.block_dim;
        let mut vars = Vec::new();
        for (c, &ord) in alpha.iter().enumerate() {
            for _ in 0..ord {
                vars.push(block * n + c);
            }
        }
        fd_nested(&|p| (self.f)(p), point, &vars, step)
    }
}

/// Nested first-order differences over the flat variable list `vars`.
pub fn fd_nested(f: &dyn Fn(&[f64]) -> f64, point: &[f64], vars: &[usize], step: f64) -> f64 {
    match vars.split_last() {
        None => f(point),
        Some((&v, rest)) => {
            let d = |h: f64| {
                let mut p = point.to_vec();
                p[v] += h;
                let hi = fd_nested(f, &p, rest, step);
                p[v] -= 2.0 * h;
                let lo = fd_nested(f, &p, rest, step);
                (hi - lo) / (2.0 * h)
            };
            let coarse = d(step);
            let fine = d(step / 2.0);
            (4.0 * fine - coarse) / 3.0
        }
    }
}
