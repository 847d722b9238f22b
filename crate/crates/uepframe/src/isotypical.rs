//! Isotypical and polyphase decompositions of a mask, and the sub-QMF
//! polynomial `f = 1 - Σ_σ p^{σ*} p^σ`.
//!
//! The isotypical component `p_χ` collects the terms of `p` with exponent in
//! the coset `χ ∈ Z^d/MZ^d`; its monomial lift `z^{-α_χ} p_χ` is G-invariant.

use crate::lattice::DilationContext;
use crate::laurent::{LaurentPoly, MultiIndex, TorusPoint};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("mask dimension {poly} does not match dilation context dimension {ctx}")]
    DimensionMismatch { poly: usize, ctx: usize },
    #[error("mask is not normalized: |p(1) - 1| = {0:.3e}")]
    NotNormalized(f64),
}

/// A subdivision mask: a dilation context together with the symbol `p`.
/// Unless built with [`Mask::new_unnormalized`], `p(1) = 1` is enforced.
#[derive(Clone, Debug)]
pub struct Mask {
    ctx: DilationContext,
    poly: LaurentPoly,
}

impl Mask {
    pub fn new(ctx: DilationContext, poly: LaurentPoly) -> Result<Self, MaskError> {
        if poly.dim() != ctx.dim() {
            return Err(MaskError::DimensionMismatch {
                poly: poly.dim(),
                ctx: ctx.dim(),
            });
        }
        let at_one = poly.evaluate(&TorusPoint::origin(poly.dim()));
        let dev = (at_one - 1.0).norm();
        if dev > 1e-10 {
            return Err(MaskError::NotNormalized(dev));
        }
        Ok(Mask { ctx, poly })
    }

    /// Skips the `p(1) = 1` check.
    pub fn new_unnormalized(ctx: DilationContext, poly: LaurentPoly) -> Result<Self, MaskError> {
        if poly.dim() != ctx.dim() {
            return Err(MaskError::DimensionMismatch {
                poly: poly.dim(),
                ctx: ctx.dim(),
            });
        }
        Ok(Mask { ctx, poly })
    }

    pub fn ctx(&self) -> &DilationContext {
        &self.ctx
    }

    pub fn poly(&self) -> &LaurentPoly {
        &self.poly
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }
}

/// The `m` isotypical components of a polynomial, indexed like the context's
/// coset representatives, together with the lift exponents `α_χ`.
#[derive(Clone, Debug)]
pub struct IsotypicalSplit {
    pub components: Vec<LaurentPoly>,
    pub lift_exponents: Vec<MultiIndex>,
}

impl IsotypicalSplit {
    /// G-invariant polyphase components `z^{-α_χ} p_χ`.
    pub fn polyphase(&self) -> Vec<LaurentPoly> {
        self.components
            .iter()
            .zip(&self.lift_exponents)
            .map(|(c, a)| {
                &LaurentPoly::monomial(a.negated(), 1.0) * c
            })
            .collect()
    }
}

/// Partitions the terms of `p` by the coset of their exponent. The lift
/// exponent for class `χ` is the stored coset representative itself.
pub fn split_poly(ctx: &DilationContext, p: &LaurentPoly) -> IsotypicalSplit {
    assert_eq!(p.dim(), ctx.dim(), "dimension mismatch in split");
    let m = ctx.order();
    let mut buckets: Vec<Vec<(MultiIndex, num_complex::Complex64)>> = vec![Vec::new(); m];
    for (e, c) in p.terms() {
        buckets[ctx.coset_index(e)].push((e.clone(), *c));
    }
    IsotypicalSplit {
        components: buckets
            .into_iter()
            .map(|b| LaurentPoly::from_terms(p.dim(), b))
            .collect(),
        lift_exponents: ctx.coset_reps().to_vec(),
    }
}

pub fn split(mask: &Mask) -> IsotypicalSplit {
    split_poly(mask.ctx(), mask.poly())
}

/// True iff `|p_χ(1) - 1/m| ≤ tol` for all `χ`.
pub fn check_partition_of_unity(mask: &Mask, tol: f64) -> bool {
    let m = mask.ctx().order() as f64;
    let origin = TorusPoint::origin(mask.dim());
    split(mask)
        .components
        .iter()
        .all(|c| (c.evaluate(&origin) - 1.0 / m).norm() <= tol)
}

/// `f = 1 - m·Σ_χ p_χ* p_χ`, the isotypical route. Agrees with the shift
/// route [`subqmf_poly_shift_route`] coefficientwise.
pub fn subqmf_poly(mask: &Mask) -> LaurentPoly {
    let d = mask.dim();
    let mut acc = LaurentPoly::zero(d);
    for comp in split(mask).components {
        acc = &acc + &(&comp.involution() * &comp);
    }
    &LaurentPoly::one(d) - &acc.scaled(mask.ctx().order() as f64)
}

/// `f = 1 - Σ_{σ∈G} p^{σ*} p^σ`, kept as a cross-check of the isotypical
/// route.
pub fn subqmf_poly_shift_route(mask: &Mask) -> LaurentPoly {
    let d = mask.dim();
    let mut acc = LaurentPoly::zero(d);
    for s in 0..mask.ctx().order() {
        let ps = mask.ctx().shift_action(mask.poly(), s);
        acc = &acc + &(&ps.involution() * &ps);
    }
    &LaurentPoly::one(d) - &acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::IntMatrix;
    use crate::laurent::{sin_poly, DROP_TOLERANCE};
    use num_complex::Complex64;

    fn mi(v: &[i64]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    fn box_spline_mask() -> Mask {
        let ctx = DilationContext::build(IntMatrix::identity_scaled(2, 2)).unwrap();
        let one = LaurentPoly::one(2);
        let z1 = LaurentPoly::monomial(mi(&[1, 0]), 1.0);
        let z2 = LaurentPoly::monomial(mi(&[0, 1]), 1.0);
        let z12 = LaurentPoly::monomial(mi(&[1, 1]), 1.0);
        let p = (&(&(&one + &z1) * &(&one + &z2)) * &(&one + &z12)).scaled(0.125);
        Mask::new(ctx, p).unwrap()
    }

    fn daubechies_mask() -> Mask {
        let ctx = DilationContext::build(IntMatrix::new(vec![vec![2]]).unwrap()).unwrap();
        let s3 = 3f64.sqrt();
        let p = LaurentPoly::from_terms(
            1,
            [
                (mi(&[0]), Complex64::new((1.0 + s3) / 8.0, 0.0)),
                (mi(&[1]), Complex64::new((3.0 + s3) / 8.0, 0.0)),
                (mi(&[2]), Complex64::new((3.0 - s3) / 8.0, 0.0)),
                (mi(&[3]), Complex64::new((1.0 - s3) / 8.0, 0.0)),
            ],
        );
        Mask::new(ctx, p).unwrap()
    }

    #[test]
    fn mask_normalization_enforced() {
        let ctx = DilationContext::build(IntMatrix::new(vec![vec![2]]).unwrap()).unwrap();
        let p = LaurentPoly::constant(1, 0.5);
        assert!(matches!(
            Mask::new(ctx.clone(), p.clone()),
            Err(MaskError::NotNormalized(_))
        ));
        assert!(Mask::new_unnormalized(ctx, p).is_ok());
    }

    #[test]
    fn split_box_spline() {
        let mask = box_spline_mask();
        let s = split(&mask);
        // reconstruction
        let mut sum = LaurentPoly::zero(2);
        for c in &s.components {
            sum = &sum + c;
        }
        assert!((&sum - mask.poly()).max_coeff_norm() < DROP_TOLERANCE);
        // p_{(0,0)} = (1/8)(1 + z1² z2²)
        let i00 = mask.ctx().coset_index(&mi(&[0, 0]));
        let expect = LaurentPoly::from_terms(
            2,
            [
                (mi(&[0, 0]), Complex64::new(0.125, 0.0)),
                (mi(&[2, 2]), Complex64::new(0.125, 0.0)),
            ],
        );
        assert!((&s.components[i00] - &expect).max_coeff_norm() < 1e-15);
        // every lifted component is G-invariant
        for lifted in s.polyphase() {
            assert!(mask.ctx().is_g_invariant(&lifted, 1e-12));
        }
    }

    #[test]
    fn split_daubechies_halves() {
        let mask = daubechies_mask();
        let s = split(&mask);
        let origin = TorusPoint::origin(1);
        for c in &s.components {
            assert!((c.evaluate(&origin) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        }
        assert!(check_partition_of_unity(&mask, 1e-12));
    }

    #[test]
    fn partition_of_unity_fails_for_constant_one() {
        let ctx = DilationContext::build(IntMatrix::new(vec![vec![2]]).unwrap()).unwrap();
        let mask = Mask::new(ctx, LaurentPoly::one(1)).unwrap();
        assert!(!check_partition_of_unity(&mask, 1e-9));
    }

    #[test]
    fn subqmf_routes_agree_and_match_closed_form() {
        let mask = box_spline_mask();
        let f1 = subqmf_poly(&mask);
        let f2 = subqmf_poly_shift_route(&mask);
        assert!((&f1 - &f2).max_coeff_norm() < 1e-13);

        // f = (1/4)(sin²ω1 + sin²ω2 + sin²(ω1+ω2))
        let s1 = sin_poly(&mi(&[1, 0]));
        let s2 = sin_poly(&mi(&[0, 1]));
        let s12 = sin_poly(&mi(&[1, 1]));
        let closed = (&(&(&s1 * &s1) + &(&s2 * &s2)) + &(&s12 * &s12)).scaled(0.25);
        assert!((&f1 - &closed).max_coeff_norm() < 1e-14);
        assert!(f1.is_hermitian(1e-12));
        for s in 0..4 {
            let shifted = mask.ctx().shift_action(&f1, s);
            assert!((&shifted - &f1).max_coeff_norm() < 1e-12);
        }
    }

    #[test]
    fn subqmf_vanishes_at_origin_for_daubechies() {
        let mask = daubechies_mask();
        let f = subqmf_poly(&mask);
        assert!(f.evaluate(&TorusPoint::origin(1)).norm() < 1e-12);
    }

    #[test]
    fn eigenspace_property_of_components() {
        // (p_χ)^σ equals conj(⟨σ,χ⟩)·p_χ: exponents α ≡ χ pick up e^{-iα·σ}
        let mask = box_spline_mask();
        let s = split(&mask);
        let ctx = mask.ctx();
        for (chi, comp) in s.components.iter().enumerate() {
            for sigma in 0..ctx.order() {
                let shifted = ctx.shift_action(comp, sigma);
                let scaled = comp.scaled(ctx.pairing(sigma, chi).conj());
                assert!((&shifted - &scaled).max_coeff_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lemma_isotypical_sum_identity_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let ctx = DilationContext::build(IntMatrix::new(vec![vec![1, 2], vec![-2, -1]]).unwrap())
            .unwrap();
        for _ in 0..25 {
            let mut terms = Vec::new();
            for _ in 0..7 {
                terms.push((
                    mi(&[rng.gen_range(-3..=3), rng.gen_range(-3..=3)]),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ));
            }
            let p = LaurentPoly::from_terms(2, terms);
            let mask = Mask::new_unnormalized(ctx.clone(), p.clone()).unwrap();
            let lhs = subqmf_poly_shift_route(&mask);
            let rhs = subqmf_poly(&mask);
            assert!((&lhs - &rhs).max_coeff_norm() < 1e-10);
        }
    }
}
