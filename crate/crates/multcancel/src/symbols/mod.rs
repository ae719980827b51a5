//! Multiplier symbols: expression trees, symbolic differentiation,
//! builtin families, antidiagonal sampling, and the cancellation and
//! decay checkers.

pub mod builtins;
pub mod checks;
pub mod expr;
pub mod numeric;
pub mod parse;
pub mod sampler;

pub use builtins::{builtin, BuiltinParams, RieszTerm, BUILTIN_NAMES};
pub use checks::{
    check_block_symmetry, check_cancellation, estimate_decay, CancellationReport, DecayReport,
    SYMBOLIC_ZERO_TOL,
};
pub use expr::{embed_blocks, symbol_add, symbol_mul, Arity, SymbolExpr};
pub use numeric::BlackBoxSymbol;
pub use parse::parse_symbol;
pub use sampler::SamplerSpec;

#[cfg(test)]
mod tests {
    use super::builtins::*;
    use super::checks::*;
    use super::expr::*;
    use super::sampler::SamplerSpec;

    #[test]
    fn sigma0_closed_form_values() {
        let s = sigma0();
        // (1,0,0,1): (1*1 - 0*0)/(1+0+0+1) = 1/2
        assert!((s.evaluate(&[1.0, 0.0, 0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);
        // on the antidiagonal
        assert_eq!(s.evaluate(&[1.0, 0.0, -1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(one(2, 2).evaluate(&[3.0, 1.0, 4.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn evaluate_rejects_singular_point() {
        let s = sigma0();
        assert!(s.evaluate(&[0.0; 4]).is_err());
        assert!(s.is_singular(&[0.0; 4]));
        assert!(!s.is_singular(&[1.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn diff_constant_is_zero() {
        let s = one(2, 2);
        let d = s.diff(0, &[1, 0]).unwrap();
        assert_eq!(d.evaluate(&[0.3, 0.4, 0.5, 0.6]).unwrap(), 0.0);
    }

    #[test]
    fn diff_sigma0_vanishes_on_diagonal() {
        let s = sigma0();
        let d = s.diff(1, &[1, 0]).unwrap();
        // first-order derivative of σ0 does NOT have to vanish on Δ
        // (σ0 passes only at order 0); but σ0 itself does
        assert!(s.evaluate(&[1.0, 0.0, -1.0, 0.0]).unwrap().abs() < 1e-15);
        // derivative is finite there
        assert!(d.evaluate(&[1.0, 0.0, -1.0, 0.0]).unwrap().is_finite());
    }

    #[test]
    fn diff_sigma2_first_order_on_diagonal() {
        let s = sigma2();
        for alpha in [[1, 0], [0, 1]] {
            let d = s.diff(1, &alpha).unwrap();
            for pt in [
                [1.0, 0.0, -1.0, 0.0],
                [0.3, -0.7, -0.3, 0.7],
                [2.0, 5.0, -2.0, -5.0],
            ] {
                assert!(d.evaluate(&pt).unwrap().abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn restrict_diag_examples() {
        let f = sigma0();
        let r = f.restrict_diag();
        assert!(r(&[1.0, 0.0]).unwrap().abs() < 1e-15);
        assert!(r(&[0.2, -0.9]).unwrap().abs() < 1e-15);

        let u = one(2, 2);
        let r = u.restrict_diag();
        assert_eq!(r(&[1.0, 2.0]).unwrap(), 1.0);

        let s = sum_sq_1d();
        let r = s.restrict_diag();
        assert!(r(&[0.7]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn diff_commutes() {
        let s = sigma0();
        let d1 = s.diff(1, &[1, 0]).unwrap().diff(1, &[0, 1]).unwrap();
        let d2 = s.diff(1, &[1, 1]).unwrap();
        for pt in [[1.0, 0.5, 0.2, -0.3], [0.1, 2.0, -0.4, 0.8]] {
            let a = d1.evaluate(&pt).unwrap();
            let b = d2.evaluate(&pt).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0));
        }
    }

    #[test]
    fn homogeneity_degree_zero() {
        let symbols: Vec<SymbolExpr> = vec![
            sigma0(),
            sigma1(),
            sigma2(),
            sigma3(),
            sigma_hessian_general(&[1, 1]).unwrap(),
            riesz_product_default(),
        ];
        let pts = [[1.0, 0.5, 0.2, -0.3], [-0.7, 0.3, 1.1, 0.9]];
        for s in &symbols {
            for pt in &pts {
                let base = s.evaluate(pt).unwrap();
                for lambda in [2.0, 10.0] {
                    let scaled: Vec<f64> = pt.iter().map(|v| v * lambda).collect();
                    let v = s.evaluate(&scaled).unwrap();
                    assert!((v - base).abs() <= 1e-12, "{v} vs {base}");
                }
            }
        }
        let s = sum_sq_1d();
        for pt in [[1.0, 0.4], [-0.3, 0.9]] {
            let base = s.evaluate(&pt).unwrap();
            for lambda in [2.0, 10.0] {
                let scaled: Vec<f64> = pt.iter().map(|v| v * lambda).collect();
                assert!((s.evaluate(&scaled).unwrap() - base).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn cancellation_verdicts() {
        let spec = SamplerSpec::default();
        assert!(check_cancellation(&sigma0(), 0, &spec, 1).unwrap().verdict);
        assert!(check_cancellation(&sigma1(), 0, &spec, 1).unwrap().verdict);
        assert!(check_cancellation(&sigma3(), 1, &spec, 1).unwrap().verdict);
        let rep = check_cancellation(&one(2, 2), 0, &spec, 1).unwrap();
        assert!(!rep.verdict);
        let max = rep.per_alpha_max.get(&vec![0, 0]).unwrap();
        assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hessian_general_order_boundary() {
        // exponents (1,1): N = 2 factors, cancellation up to order 1,
        // and some order-2 derivative is nonzero on Δ
        let s = sigma_hessian_general(&[1, 1]).unwrap();
        let spec = SamplerSpec::default();
        assert!(check_cancellation(&s, 1, &spec, 1).unwrap().verdict);
        let rep = check_cancellation(&s, 2, &spec, 1).unwrap();
        assert!(!rep.verdict);
    }

    #[test]
    fn block_symmetry() {
        let spec = SamplerSpec::default();
        assert!(check_block_symmetry(&sigma0(), 0, &spec).unwrap());
        assert!(check_block_symmetry(&one(2, 2), 0, &spec).unwrap());
        assert!(check_block_symmetry(&sigma2(), 1, &spec).unwrap());
    }

    #[test]
    fn decay_entries() {
        let spec = SamplerSpec::default();
        let rep = estimate_decay(&sigma0(), 1, &spec).unwrap();
        assert!(rep.per_alpha_sup_cm.values().all(|v| v.is_finite()));
        assert!(rep.cm_consistent);

        let rep = estimate_decay(&one(2, 2), 1, &spec).unwrap();
        for (t, v) in &rep.per_alpha_sup_cm {
            let total: u32 = t.iter().flat_map(|a| a.iter()).sum();
            if total >= 1 {
                assert_eq!(*v, 0.0);
            }
        }

        let rep = estimate_decay(&sigma1(), 1, &spec).unwrap();
        assert!(rep.per_alpha_sup_weak.values().all(|v| v.is_finite()));
        assert!(rep.per_alpha_sup_cm.values().all(|v| v.is_finite()));
    }

    #[test]
    fn sampler_determinism() {
        let spec = SamplerSpec::default();
        let a = check_cancellation(&sigma0(), 1, &spec, 1).unwrap();
        let b = check_cancellation(&sigma0(), 1, &spec, 1).unwrap();
        assert_eq!(a.per_alpha_max, b.per_alpha_max);
        for (x, y) in a.samples.iter().zip(b.samples.iter()) {
            assert_eq!(x.point, y.point);
        }
    }

    #[test]
    fn embed_blocks_mixed_type() {
        // lift a 1-block Riesz factor onto block 2 of a bilinear symbol
        let r = riesz_single(2, 0).unwrap();
        let lifted = embed_blocks(&r, &[1], 2).unwrap();
        let v = lifted.evaluate(&[9.0, 9.0, 3.0, 4.0]).unwrap();
        assert!((v - 0.6).abs() < 1e-15);
    }

    #[test]
    fn unknown_builtin_is_config_error() {
        let p = BuiltinParams::default();
        assert!(builtin("sigma9", &p).is_err());
        assert!(builtin("sigma0", &p).is_ok());
    }
}
