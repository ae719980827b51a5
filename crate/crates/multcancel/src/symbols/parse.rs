//! Text grammar for user-supplied symbols.
//!
//! Infix grammar with variables `x[j][c]` (1-based block and component),
//! operators `+ - * / ^`, `sqrt(...)`, parentheses and float literals:
//!
//! ```text
//! (x[1][1] + x[2][1])^2 / (x[1][1]^2 + x[2][1]^2)
//! ```

use crate::error::{Error, Result};

use super::expr::{add, constant, int_pow, mul, quot, sqrt, sub, var, Arity, Expr, SymbolExpr};

/// Parses `text` into a symbol with the given arity.
pub fn parse_symbol(text: &str, blocks: usize, block_dim: usize) -> Result<SymbolExpr> {
    if blocks == 0 || block_dim == 0 {
        return Err(Error::Parse("arity components must be positive".into()));
    }
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        blocks,
        block_dim,
        depth: 0,
    };
    let root = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Parse(format!(
            "unexpected trailing input at token {}",
            p.pos
        )));
    }
    Ok(SymbolExpr::new(Arity::new(blocks, block_dim), root))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize, usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Sqrt,
    LParen,
    RParen,
}

const MAX_TOKENS: usize = 1 << 16;
const MAX_DEPTH: usize = 128;

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let b = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if toks.len() > MAX_TOKENS {
            return Err(Error::Parse("expression too long".into()));
        }
        let c = b[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            b'-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            b'*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            b'/' => {
                toks.push(Tok::Slash);
                i += 1;
            }
            b'^' => {
                toks.push(Tok::Caret);
                i += 1;
            }
            b'(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            b')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < b.len()
                    && (b[i].is_ascii_digit() || b[i] == b'.' || b[i] == b'e' || b[i] == b'E'
                        || ((b[i] == b'+' || b[i] == b'-')
                            && i > start
                            && (b[i - 1] == b'e' || b[i - 1] == b'E')))
                {
                    i += 1;
                }
                let s = std::str::from_utf8(&b[start..i]).expect("ascii digits");
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number literal '{s}'")))?;
                if !v.is_finite() {
                    return Err(Error::Parse(format!("non-finite literal '{s}'")));
                }
                toks.push(Tok::Num(v));
            }
            b's' => {
                if b[i..].starts_with(b"sqrt") {
                    toks.push(Tok::Sqrt);
                    i += 4;
                } else {
                    return Err(Error::Parse(format!("unexpected byte '{}' at {i}", c as char)));
                }
            }
            b'x' => {
                let (tok, next) = parse_var(b, i)?;
                toks.push(tok);
                i = next;
            }
            _ => {
                return Err(Error::Parse(format!(
                    "unexpected byte 0x{c:02x} at offset {i}"
                )))
            }
        }
    }
    Ok(toks)
}

fn parse_var(b: &[u8], start: usize) -> Result<(Tok, usize)> {
    // x[j][c]
    let mut i = start + 1;
    let read_index = |i: &mut usize| -> Result<usize> {
        if *i >= b.len() || b[*i] != b'[' {
            return Err(Error::Parse(format!("expected '[' at offset {i}", i = *i)));
        }
        *i += 1;
        let s = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        if s == *i || *i >= b.len() || b[*i] != b']' {
            return Err(Error::Parse(format!(
                "expected digits and ']' after offset {s}"
            )));
        }
        let text = std::str::from_utf8(&b[s..*i]).expect("ascii digits");
        let v: usize = text
            .parse()
            .map_err(|_| Error::Parse(format!("bad index '{text}'")))?;
        *i += 1;
        Ok(v)
    };
    let j = read_index(&mut i)?;
    let c = read_index(&mut i)?;
    if j == 0 || c == 0 {
        return Err(Error::Parse("variable indices are 1-based".into()));
    }
    Ok((Tok::Var(j - 1, c - 1), i))
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
    blocks: usize,
    block_dim: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Error::Parse("expression nesting too deep".into()));
        }
        let mut acc = self.term()?;
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.next();
                    let rhs = self.term()?;
                    acc = add(vec![acc, rhs]);
                }
                Tok::Minus => {
                    self.next();
                    let rhs = self.term()?;
                    acc = sub(acc, rhs);
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Star => {
                    self.next();
                    let rhs = self.factor()?;
                    acc = mul(vec![acc, rhs]);
                }
                Tok::Slash => {
                    self.next();
                    let rhs = self.factor()?;
                    acc = quot(acc, rhs);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.next();
            match self.next() {
                Some(Tok::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                    Ok(int_pow(base, v as u32))
                }
                other => Err(Error::Parse(format!(
                    "exponent must be a nonnegative integer, got {other:?}"
                ))),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Error::Parse("expression nesting too deep".into()));
        }
        let out = match self.next() {
            Some(Tok::Num(v)) => Ok(constant(v)),
            Some(Tok::Var(j, c)) => {
                if j >= self.blocks || c >= self.block_dim {
                    Err(Error::Parse(format!(
                        "variable x[{}][{}] out of range for arity ({}, {})",
                        j + 1,
                        c + 1,
                        self.blocks,
                        self.block_dim
                    )))
                } else {
                    Ok(var(j, c))
                }
            }
            Some(Tok::Minus) => Ok(mul(vec![constant(-1.0), self.atom()?])),
            Some(Tok::Sqrt) => {
                if self.next() != Some(Tok::LParen) {
                    return Err(Error::Parse("expected '(' after sqrt".into()));
                }
                let inner = self.expr()?;
                if self.next() != Some(Tok::RParen) {
                    return Err(Error::Parse("expected ')' to close sqrt".into()));
                }
                Ok(sqrt(inner))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                if self.next() != Some(Tok::RParen) {
                    return Err(Error::Parse("unbalanced parentheses".into()));
                }
                Ok(inner)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        };
        self.depth -= 1;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::builtins::sum_sq_1d;

    #[test]
    fn parses_sum_sq() {
        let s = parse_symbol(
            "(x[1][1] + x[2][1])^2 / (x[1][1]^2 + x[2][1]^2)",
            2,
            1,
        )
        .unwrap();
        let reference = sum_sq_1d();
        for pt in [[1.0, 2.0], [0.5, -0.3], [-2.0, 7.0]] {
            let a = s.evaluate(&pt).unwrap();
            let b = reference.evaluate(&pt).unwrap();
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn parses_sqrt_and_unary_minus() {
        let s = parse_symbol("-x[1][1] / sqrt(x[1][1]^2)", 1, 1).unwrap();
        assert_eq!(s.evaluate(&[2.0]).unwrap(), -1.0);
        assert_eq!(s.evaluate(&[-3.0]).unwrap(), 1.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_symbol("x[0][1]", 2, 1).is_err());
        assert!(parse_symbol("x[3][1]", 2, 1).is_err());
        assert!(parse_symbol("1 +", 2, 1).is_err());
        assert!(parse_symbol("(1", 2, 1).is_err());
        assert!(parse_symbol("x[1][1] ^ 1.5", 1, 1).is_err());
        assert!(parse_symbol("sin(x[1][1])", 1, 1).is_err());
    }
}
