//! The builtin multiplier symbols: the determinant/Hessian family on
//! `R^2 x R^2`, Riesz-symbol products, and a few smooth test symbols.

use crate::error::{Error, Result};

use super::expr::{
    add, constant, int_pow, mul, quot, sqrt, sub, var, Arity, Expr, SymbolExpr,
};

/// Parameters accepted by [`builtin`].  Families that need no
/// parameters ignore the irrelevant fields.
#[derive(Debug, Clone)]
pub struct BuiltinParams {
    /// Block count for arity-generic families (`one`, `smooth_test`).
    pub blocks: usize,
    /// Block dimension for arity-generic families.
    pub block_dim: usize,
    /// Exponents `n_1..n_N` for `sigma_hessian_general`.
    pub exponents: Vec<u32>,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        BuiltinParams {
            blocks: 2,
            block_dim: 2,
            exponents: vec![1, 1],
        }
    }
}

/// `|ξ_j|^2` as an expression: sum of squared components of block `j`.
fn block_norm_sq(block: usize, n: usize) -> Expr {
    add((0..n).map(|c| int_pow(var(block, c), 2)).collect())
}

/// Sum of `|ξ_j|^2` over all blocks.
fn total_norm_sq(m: usize, n: usize) -> Expr {
    add((0..m).map(|j| block_norm_sq(j, n)).collect())
}

/// `det(ξ^p; η^p)` on two 2-d blocks: `ξ_1^p η_2^p - ξ_2^p η_1^p`.
fn det_pow(p: u32) -> Expr {
    sub(
        mul(vec![int_pow(var(0, 0), p), int_pow(var(1, 1), p)]),
        mul(vec![int_pow(var(0, 1), p), int_pow(var(1, 0), p)]),
    )
}

/// σ ≡ 1 with the given arity.
pub fn one(m: usize, n: usize) -> SymbolExpr {
    SymbolExpr::new(Arity::new(m, n), constant(1.0))
}

/// The everywhere-smooth test symbol `1 / (1 + Σ_j |ξ_j|^2)`.
pub fn smooth_test(m: usize, n: usize) -> SymbolExpr {
    let den = add(vec![constant(1.0), total_norm_sq(m, n)]);
    SymbolExpr::new(Arity::new(m, n), quot(constant(1.0), den))
}

/// `det(ξ; η) / (|ξ|^2 + |η|^2)`; singular only at the origin.
pub fn sigma0() -> SymbolExpr {
    SymbolExpr::new(Arity::new(2, 2), quot(det_pow(1), total_norm_sq(2, 2)))
}

/// `det(ξ; η) / (|ξ| |η|)`; singular on the coordinate-block zero sets.
pub fn sigma1() -> SymbolExpr {
    let den = mul(vec![
        sqrt(block_norm_sq(0, 2)),
        sqrt(block_norm_sq(1, 2)),
    ]);
    SymbolExpr::new(Arity::new(2, 2), quot(det_pow(1), den))
}

/// `det(ξ; η)^2 / (|ξ|^2 + |η|^2)^2`; singular only at the origin.
pub fn sigma2() -> SymbolExpr {
    SymbolExpr::new(
        Arity::new(2, 2),
        quot(int_pow(det_pow(1), 2), int_pow(total_norm_sq(2, 2), 2)),
    )
}

/// `det(ξ; η)^2 / (|ξ|^2 |η|^2)`; singular on the block zero sets.
pub fn sigma3() -> SymbolExpr {
    let den = mul(vec![block_norm_sq(0, 2), block_norm_sq(1, 2)]);
    SymbolExpr::new(Arity::new(2, 2), quot(int_pow(det_pow(1), 2), den))
}

/// The generalized Hessian family: `Π_j det(ξ^{n_j}; η^{n_j})` over
/// `(|ξ|^2 + |η|^2)^{n_1+…+n_N}`.  Cancellation holds up to order `N-1`.
pub fn sigma_hessian_general(exponents: &[u32]) -> Result<SymbolExpr> {
    if exponents.is_empty() || exponents.iter().any(|&e| e == 0) {
        return Err(Error::Config(
            "sigma_hessian_general requires a nonempty list of positive exponents".into(),
        ));
    }
    let num = mul(exponents.iter().map(|&p| det_pow(p)).collect());
    let total: u32 = exponents.iter().sum();
    let den = int_pow(total_norm_sq(2, 2), total);
    Ok(SymbolExpr::new(Arity::new(2, 2), quot(num, den)))
}

/// One term of a Riesz-symbol product: `coeff · Π_k ξ_{k,comp_k} / |ξ_k|`.
#[derive(Debug, Clone)]
pub struct RieszTerm {
    pub coeff: f64,
    /// One component index (0-based) per block.
    pub comps: Vec<usize>,
}

/// Product-form symbol built from Riesz factors `ξ_c / |ξ|`, one factor
/// per block, summed over terms.
pub fn riesz_product(terms: &[RieszTerm], n: usize) -> Result<SymbolExpr> {
    if terms.is_empty() {
        return Err(Error::Config("riesz_product needs at least one term".into()));
    }
    let m = terms[0].comps.len();
    if m == 0 || terms.iter().any(|t| t.comps.len() != m) {
        return Err(Error::Config(
            "riesz_product terms must all have one component per block".into(),
        ));
    }
    if terms.iter().any(|t| t.comps.iter().any(|&c| c >= n)) {
        return Err(Error::Config("riesz_product component index out of range".into()));
    }
    let mut sum_terms = Vec::new();
    for t in terms {
        let mut factors = vec![constant(t.coeff)];
        for (k, &c) in t.comps.iter().enumerate() {
            factors.push(quot(var(k, c), sqrt(block_norm_sq(k, n))));
        }
        sum_terms.push(mul(factors));
    }
    Ok(SymbolExpr::new(Arity::new(m, n), add(sum_terms)))
}

/// The default Riesz product: `R_1(ξ) R_2(η) - R_2(ξ) R_1(η)`, which is
/// exactly `det(ξ; η)/(|ξ||η|)`.
pub fn riesz_product_default() -> SymbolExpr {
    riesz_product(
        &[
            RieszTerm { coeff: 1.0, comps: vec![0, 1] },
            RieszTerm { coeff: -1.0, comps: vec![1, 0] },
        ],
        2,
    )
    .expect("static terms are valid")
}

/// `(ξ + η)^2 / (ξ^2 + η^2)` on two 1-d blocks: a 1-d demo symbol that
/// vanishes to second order on the antidiagonal.
pub fn sum_sq_1d() -> SymbolExpr {
    let num = int_pow(add(vec![var(0, 0), var(1, 0)]), 2);
    let den = add(vec![int_pow(var(0, 0), 2), int_pow(var(1, 0), 2)]);
    SymbolExpr::new(Arity::new(2, 1), quot(num, den))
}

/// `ξ_c / |ξ|` as a one-block symbol (a single Riesz factor).
pub fn riesz_single(n: usize, comp: usize) -> Result<SymbolExpr> {
    if comp >= n {
        return Err(Error::Config("riesz component out of range".into()));
    }
    Ok(SymbolExpr::new(
        Arity::new(1, n),
        quot(var(0, comp), sqrt(block_norm_sq(0, n))),
    ))
}

/// Names understood by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &[
    "one",
    "smooth_test",
    "sigma0",
    "sigma1",
    "sigma2",
    "sigma3",
    "sigma_hessian_general",
    "riesz_product",
    "sum_sq_1d",
    "riesz_single",
];

/// Looks up a builtin symbol family by name.
pub fn builtin(name: &str, params: &BuiltinParams) -> Result<SymbolExpr> {
    match name {
        "one" => Ok(one(params.blocks, params.block_dim)),
        "smooth_test" => Ok(smooth_test(params.blocks, params.block_dim)),
        "sigma0" => Ok(sigma0()),
        "sigma1" => Ok(sigma1()),
        "sigma2" => Ok(sigma2()),
        "sigma3" => Ok(sigma3()),
        "sigma_hessian_general" => sigma_hessian_general(&params.exponents),
        "riesz_product" => Ok(riesz_product_default()),
        "sum_sq_1d" => Ok(sum_sq_1d()),
        "riesz_single" => riesz_single(params.block_dim, 0),
        other => Err(Error::Config(format!("unknown builtin symbol '{other}'"))),
    }
}
