//! Expression trees for multiplier symbols `σ(ξ_1,…,ξ_m)` with exact
//! symbolic differentiation.
//!
//! A symbol has `m` frequency blocks of dimension `n`; variable `(j, c)`
//! is component `c` of block `j` (0-based internally).  The node set is
//! deliberately small: constants, variables, sums, products, quotients,
//! integer powers and square roots.  No normalization beyond constant
//! folding and zero pruning is attempted.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// `(m, n)`: number of frequency blocks and the dimension of each block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arity {
    pub blocks: usize,
    pub block_dim: usize,
}

impl Arity {
    pub fn new(blocks: usize, block_dim: usize) -> Arity {
        Arity { blocks, block_dim }
    }

    pub fn total_dim(&self) -> usize {
        self.blocks * self.block_dim
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    Const(f64),
    Var { block: usize, comp: usize },
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Quot(Expr, Expr),
    IntPow(Expr, u32),
    Sqrt(Expr),
}

/// A reference-counted expression node; cheap to clone and share.
#[derive(Debug, Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }
}

pub fn constant(v: f64) -> Expr {
    Expr(Arc::new(Node::Const(v)))
}

pub fn var(block: usize, comp: usize) -> Expr {
    Expr(Arc::new(Node::Var { block, comp }))
}

fn as_const(e: &Expr) -> Option<f64> {
    match e.node() {
        Node::Const(v) => Some(*v),
        _ => None,
    }
}

/// Sum with zero pruning and constant folding.
pub fn add(terms: Vec<Expr>) -> Expr {
    let mut out = Vec::new();
    let mut k = 0.0;
    for t in terms {
        match t.node() {
            Node::Const(v) => k += v,
            Node::Sum(inner) => {
                for e in inner {
                    match as_const(e) {
                        Some(v) => k += v,
                        None => out.push(e.clone()),
                    }
                }
            }
            _ => out.push(t),
        }
    }
    if k != 0.0 {
        out.push(constant(k));
    }
    match out.len() {
        0 => constant(0.0),
        1 => out.pop().unwrap(),
        _ => Expr(Arc::new(Node::Sum(out))),
    }
}

/// Product with annihilation by zero and constant folding.
pub fn mul(factors: Vec<Expr>) -> Expr {
    let mut out = Vec::new();
    let mut k = 1.0;
    for f in factors {
        match f.node() {
            Node::Const(v) => {
                if *v == 0.0 {
                    return constant(0.0);
                }
                k *= v;
            }
            Node::Prod(inner) => {
                for e in inner {
                    match as_const(e) {
                        Some(v) => k *= v,
                        None => out.push(e.clone()),
                    }
                }
            }
            _ => out.push(f),
        }
    }
    if k == 0.0 {
        return constant(0.0);
    }
    if k != 1.0 {
        out.insert(0, constant(k));
    }
    match out.len() {
        0 => constant(1.0),
        1 => out.pop().unwrap(),
        _ => Expr(Arc::new(Node::Prod(out))),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    add(vec![a, mul(vec![constant(-1.0), b])])
}

pub fn quot(num: Expr, den: Expr) -> Expr {
    if let Some(v) = as_const(&num) {
        if v == 0.0 {
            return constant(0.0);
        }
        if let Some(d) = as_const(&den) {
            if d != 0.0 {
                return constant(v / d);
            }
        }
    }
    if let Some(d) = as_const(&den) {
        if d == 1.0 {
            return num;
        }
    }
    Expr(Arc::new(Node::Quot(num, den)))
}

pub fn int_pow(base: Expr, exp: u32) -> Expr {
    match exp {
        0 => constant(1.0),
        1 => base,
        _ => {
            if let Some(v) = as_const(&base) {
                return constant(v.powi(exp as i32));
            }
            Expr(Arc::new(Node::IntPow(base, exp)))
        }
    }
}

pub fn sqrt(arg: Expr) -> Expr {
    if let Some(v) = as_const(&arg) {
        if v >= 0.0 {
            return constant(v.sqrt());
        }
    }
    Expr(Arc::new(Node::Sqrt(arg)))
}

/// A multiplier symbol: an expression tree with a fixed arity.
#[derive(Debug, Clone)]
pub struct SymbolExpr {
    pub arity: Arity,
    pub root: Expr,
}

impl SymbolExpr {
    pub fn new(arity: Arity, root: Expr) -> SymbolExpr {
        SymbolExpr { arity, root }
    }

    /// Pointwise evaluation at `point` of length `m*n`.
    ///
    /// Errors on vanishing denominators and negative square-root
    /// arguments, identifying the offending subexpression.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        debug_assert_eq!(point.len(), self.arity.total_dim());
        eval_node(&self.root, point, self.arity.block_dim)
    }

    /// True where a denominator or square-root argument (numerically)
    /// vanishes: the discrete stand-in for the singular-set predicate.
    pub fn is_singular(&self, point: &[f64]) -> bool {
        !singular_guard(&self.root, point, self.arity.block_dim)
    }

    /// Symbolic derivative `∂^α_k` with respect to block `k` (0-based).
    pub fn diff(&self, block: usize, alpha: &[u32]) -> Result<SymbolExpr> {
        if block >= self.arity.blocks {
            return Err(Error::Config(format!(
                "block index {block} out of range for arity m={}",
                self.arity.blocks
            )));
        }
        if alpha.len() != self.arity.block_dim {
            return Err(Error::Config(format!(
                "multiindex length {} does not match block dimension {}",
                alpha.len(),
                self.arity.block_dim
            )));
        }
        let mut root = self.root.clone();
        for (comp, &ord) in alpha.iter().enumerate() {
            for _ in 0..ord {
                root = diff_node(&root, block, comp);
            }
        }
        Ok(SymbolExpr {
            arity: self.arity,
            root,
        })
    }

    /// Restriction to the hyperplane `ξ_m = -(ξ_1 + … + ξ_{m-1})`:
    /// returns a closure over the first `m-1` blocks.
    pub fn restrict_diag(&self) -> impl Fn(&[f64]) -> Result<f64> + '_ {
        let m = self.arity.blocks;
        let n = self.arity.block_dim;
        move |head: &[f64]| {
            debug_assert_eq!(head.len(), (m - 1) * n);
            let mut full = vec![0.0; m * n];
            full[..(m - 1) * n].copy_from_slice(head);
            for c in 0..n {
                let mut s = 0.0;
                for j in 0..m - 1 {
                    s += head[j * n + c];
                }
                full[(m - 1) * n + c] = -s;
            }
            self.evaluate(&full)
        }
    }
}

fn eval_node(e: &Expr, point: &[f64], n: usize) -> Result<f64> {
    match e.node() {
        Node::Const(v) => Ok(*v),
        Node::Var { block, comp } => Ok(point[block * n + comp]),
        Node::Sum(terms) => {
            let mut s = 0.0;
            for t in terms {
                s += eval_node(t, point, n)?;
            }
            Ok(s)
        }
        Node::Prod(factors) => {
            let mut p = 1.0;
            for f in factors {
                p *= eval_node(f, point, n)?;
            }
            Ok(p)
        }
        Node::Quot(num, den) => {
            let d = eval_node(den, point, n)?;
            if d == 0.0 {
                return Err(Error::SingularPoint {
                    point: point.to_vec(),
                    what: "vanishing denominator".into(),
                });
            }
            Ok(eval_node(num, point, n)? / d)
        }
        Node::IntPow(base, exp) => Ok(eval_node(base, point, n)?.powi(*exp as i32)),
        Node::Sqrt(arg) => {
            let a = eval_node(arg, point, n)?;
            if a < 0.0 {
                return Err(Error::SingularPoint {
                    point: point.to_vec(),
                    what: "negative square-root argument".into(),
                });
            }
            Ok(a.sqrt())
        }
    }
}

/// Returns false when any denominator or sqrt argument vanishes.
fn singular_guard(e: &Expr, point: &[f64], n: usize) -> bool {
    match e.node() {
        Node::Const(_) | Node::Var { .. } => true,
        Node::Sum(terms) => terms.iter().all(|t| singular_guard(t, point, n)),
        Node::Prod(factors) => factors.iter().all(|f| singular_guard(f, point, n)),
        Node::Quot(num, den) => {
            if !singular_guard(num, point, n) || !singular_guard(den, point, n) {
                return false;
            }
            matches!(eval_node(den, point, n), Ok(d) if d != 0.0)
        }
        Node::IntPow(base, _) => singular_guard(base, point, n),
        Node::Sqrt(arg) => {
            if !singular_guard(arg, point, n) {
                return false;
            }
            matches!(eval_node(arg, point, n), Ok(a) if a > 0.0)
        }
    }
}

fn diff_node(e: &Expr, block: usize, comp: usize) -> Expr {
    match e.node() {
        Node::Const(_) => constant(0.0),
        Node::Var { block: b, comp: c } => {
            if *b == block && *c == comp {
                constant(1.0)
            } else {
                constant(0.0)
            }
        }
        Node::Sum(terms) => add(terms.iter().map(|t| diff_node(t, block, comp)).collect()),
        Node::Prod(factors) => {
            let mut terms = Vec::new();
            for i in 0..factors.len() {
                let mut fs: Vec<Expr> = factors.to_vec();
                fs[i] = diff_node(&factors[i], block, comp);
                terms.push(mul(fs));
            }
            add(terms)
        }
        Node::Quot(num, den) => {
            let dn = diff_node(num, block, comp);
            let dd = diff_node(den, block, comp);
            let top = sub(mul(vec![dn, den.clone()]), mul(vec![num.clone(), dd]));
            quot(top, int_pow(den.clone(), 2))
        }
        Node::IntPow(base, exp) => {
            let db = diff_node(base, block, comp);
            mul(vec![
                constant(*exp as f64),
                int_pow(base.clone(), exp - 1),
                db,
            ])
        }
        Node::Sqrt(arg) => {
            let da = diff_node(arg, block, comp);
            quot(da, mul(vec![constant(2.0), sqrt(arg.clone())]))
        }
    }
}

/// Remaps block indices: block `j` of `expr` becomes block
/// `assignment[j]` of a new symbol with `new_blocks` blocks.  This is
/// the partition combinator used to build mixed-type symbols.
pub fn embed_blocks(sym: &SymbolExpr, assignment: &[usize], new_blocks: usize) -> Result<SymbolExpr> {
    if assignment.len() != sym.arity.blocks {
        return Err(Error::Config(
            "block assignment length must equal the symbol's block count".into(),
        ));
    }
    if assignment.iter().any(|&b| b >= new_blocks) {
        return Err(Error::Config("block assignment index out of range".into()));
    }
    fn remap(e: &Expr, assignment: &[usize]) -> Expr {
        match e.node() {
            Node::Const(v) => constant(*v),
            Node::Var { block, comp } => var(assignment[*block], *comp),
            Node::Sum(ts) => add(ts.iter().map(|t| remap(t, assignment)).collect()),
            Node::Prod(fs) => mul(fs.iter().map(|f| remap(f, assignment)).collect()),
            Node::Quot(a, b) => quot(remap(a, assignment), remap(b, assignment)),
            Node::IntPow(a, p) => int_pow(remap(a, assignment), *p),
            Node::Sqrt(a) => sqrt(remap(a, assignment)),
        }
    }
    Ok(SymbolExpr {
        arity: Arity::new(new_blocks, sym.arity.block_dim),
        root: remap(&sym.root, assignment),
    })
}

/// Pointwise sum of two symbols with identical arity.
pub fn symbol_add(a: &SymbolExpr, b: &SymbolExpr) -> Result<SymbolExpr> {
    if a.arity != b.arity {
        return Err(Error::Config("arity mismatch in symbol sum".into()));
    }
    Ok(SymbolExpr {
        arity: a.arity,
        root: add(vec![a.root.clone(), b.root.clone()]),
    })
}

/// Pointwise product of two symbols with identical arity.
pub fn symbol_mul(a: &SymbolExpr, b: &SymbolExpr) -> Result<SymbolExpr> {
    if a.arity != b.arity {
        return Err(Error::Config("arity mismatch in symbol product".into()));
    }
    Ok(SymbolExpr {
        arity: a.arity,
        root: mul(vec![a.root.clone(), b.root.clone()]),
    })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(v) => write!(f, "{v}"),
            Node::Var { block, comp } => write!(f, "x[{}][{}]", block + 1, comp + 1),
            Node::Sum(ts) => {
                write!(f, "(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Node::Prod(fs) => {
                write!(f, "(")?;
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Node::Quot(a, b) => write!(f, "({a} / {b})"),
            Node::IntPow(a, p) => write!(f, "{a}^{p}"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}
