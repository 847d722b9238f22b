//! Constructive frame generation from sums of hermitian squares.
//!
//! Given a certificate `f = Σ_j h_j* h_j` for the sub-QMF polynomial of a
//! mask, the generators are
//!
//! ```text
//! q_k      = m^{-1/2} z^{α_{χ_k}} (1 - m·p·p_{χ_k}*),   1 ≤ k ≤ m,
//! q_{mj+k} = p · h̃_{j,χ_k}*,
//! ```
//!
//! where `h̃_{j,χ}` are the G-invariant lifted polyphase components of the
//! `h_j`. Identically-zero generators are pruned, so the emitted count is
//! `m` plus the number of nonzero lifted components.

use crate::isotypical::{check_partition_of_unity, split, split_poly, subqmf_poly, Mask};
use crate::laurent::{cos_poly, sin_poly, LaurentPoly, MultiIndex};
use crate::verify::{check_uep, FrameError, FrameSystem};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

/// Max coefficient residual allowed when a certificate is attached to a mask.
pub const CERT_TOL: f64 = 1e-10;
/// Generators with all coefficients below this are dropped.
pub const PRUNE_TOL: f64 = 1e-13;
/// Tolerance for the mandatory post-construction UEP check.
pub const POST_VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CertError {
    #[error("certificate square {index} has dimension {found}, expected {expected}")]
    Dimension {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("certificate does not reproduce f: residual {0:.3e}")]
    Residual(f64),
    #[error("mask does not satisfy the partition of unity")]
    PartitionOfUnity,
    #[error("constructed frame failed the UEP check: residual {0:.3e}")]
    PostVerification(f64),
    #[error("unknown builtin certificate '{0}'")]
    UnknownBuiltin(String),
    #[error("unknown parameter '{0}' for builtin certificate '{1}'")]
    UnknownParam(String, String),
    #[error("parameter {name} = {value} outside the valid range {range}")]
    ParamOutOfRange {
        name: String,
        value: f64,
        range: String,
    },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// A list of Laurent polynomials `h_j` intended to satisfy
/// `Σ_j h_j* h_j = f` for some mask's sub-QMF polynomial `f`.
#[derive(Clone, Debug)]
pub struct SosCertificate {
    squares: Vec<LaurentPoly>,
}

impl SosCertificate {
    pub fn new(squares: Vec<LaurentPoly>) -> Self {
        SosCertificate { squares }
    }

    pub fn squares(&self) -> &[LaurentPoly] {
        &self.squares
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    /// Squares that are not numerically zero.
    pub fn nonzero_len(&self) -> usize {
        self.squares
            .iter()
            .filter(|h| h.max_coeff_norm() > PRUNE_TOL)
            .count()
    }

    fn check_dims(&self, dim: usize) -> Result<(), CertError> {
        for (index, h) in self.squares.iter().enumerate() {
            if h.dim() != dim {
                return Err(CertError::Dimension {
                    index,
                    found: h.dim(),
                    expected: dim,
                });
            }
        }
        Ok(())
    }
}

/// Max coefficient residual of `f - Σ_j h_j* h_j`.
pub fn verify_sos(mask: &Mask, cert: &SosCertificate) -> Result<f64, CertError> {
    cert.check_dims(mask.dim())?;
    let f = subqmf_poly(mask);
    let mut acc = LaurentPoly::zero(mask.dim());
    for h in &cert.squares {
        acc = &acc + &(&h.involution() * h);
    }
    Ok((&f - &acc).max_coeff_norm())
}

/// Replaces each square by its nonzero lifted polyphase components
/// `h̃_{j,χ} = z^{-α_χ} h_{j,χ}`. The output is G-invariant termwise and
/// still reproduces `f`.
pub fn polyphase_lift_cert(mask: &Mask, cert: &SosCertificate) -> Result<SosCertificate, CertError> {
    let residual = verify_sos(mask, cert)?;
    if residual > CERT_TOL {
        return Err(CertError::Residual(residual));
    }
    Ok(lift_unchecked(mask, cert))
}

fn lift_unchecked(mask: &Mask, cert: &SosCertificate) -> SosCertificate {
    let ctx = mask.ctx();
    let mut out = Vec::new();
    for h in &cert.squares {
        let s = split_poly(ctx, h);
        for (comp, alpha) in s.components.iter().zip(&s.lift_exponents) {
            if comp.max_coeff_norm() > PRUNE_TOL {
                out.push(&LaurentPoly::monomial(alpha.negated(), 1.0) * comp);
            }
        }
    }
    SosCertificate::new(out)
}

/// Runs the constructive pipeline: verify the certificate, lift it, emit the
/// generators, prune, canonicalize phases, and re-verify the frame.
pub fn construct_from_sos(mask: &Mask, cert: &SosCertificate) -> Result<FrameSystem, CertError> {
    if !check_partition_of_unity(mask, 1e-9) {
        return Err(CertError::PartitionOfUnity);
    }
    let lifted = polyphase_lift_cert(mask, cert)?;

    let ctx = mask.ctx();
    let p = mask.poly();
    let d = mask.dim();
    let m = ctx.order();
    let scale = 1.0 / (m as f64).sqrt();
    let mut generators = Vec::new();
    let comps = split(mask);
    for k in 0..m {
        let inner = &LaurentPoly::one(d) - &(p * &comps.components[k].involution()).scaled(m as f64);
        let g = (&LaurentPoly::monomial(comps.lift_exponents[k].clone(), 1.0) * &inner)
            .scaled(scale);
        generators.push(g);
    }
    for ht in lifted.squares() {
        generators.push(p * &ht.involution());
    }
    generators.retain(|g| g.max_coeff_norm() > PRUNE_TOL);
    let generators = generators
        .into_iter()
        .map(|g| phase_canonicalized(&g))
        .collect();

    let frame = FrameSystem::new(mask.clone(), generators)?;
    let report = check_uep(&frame, POST_VERIFY_TOL);
    if !report.passed {
        return Err(CertError::PostVerification(
            report.max_residual_uep.unwrap_or(f64::INFINITY),
        ));
    }
    Ok(frame)
}

/// Scales by a unimodular factor so the lexicographically first nonzero
/// coefficient is real and nonnegative.
pub fn phase_canonicalized(p: &LaurentPoly) -> LaurentPoly {
    for (_, c) in p.terms() {
        if c.norm() > PRUNE_TOL {
            return p.scaled(c.conj() / c.norm());
        }
    }
    p.clone()
}

fn mi(v: &[i64]) -> MultiIndex {
    MultiIndex(v.to_vec())
}

/// Certificates printed alongside the catalog masks. `interp3d` takes the
/// tension parameter `lambda ∈ [0, 1/16]`; `sqrt3-partial` is an empty
/// placeholder since no decomposition is known for that scheme.
pub fn builtin_certificate(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<SosCertificate, CertError> {
    let reject_params = |cert: SosCertificate| -> Result<SosCertificate, CertError> {
        if let Some(k) = params.keys().next() {
            return Err(CertError::UnknownParam(k.clone(), name.to_string()));
        }
        Ok(cert)
    };
    match name {
        "boxspline111" => reject_params(boxspline111_certificate()),
        "butterfly" => reject_params(butterfly_certificate()),
        "sqrt3-partial" => reject_params(SosCertificate::new(Vec::new())),
        "interp3d" => {
            let mut lambda = 1.0 / 16.0;
            for (k, &v) in params {
                if k != "lambda" {
                    return Err(CertError::UnknownParam(k.clone(), name.to_string()));
                }
                if !(0.0..=1.0 / 16.0).contains(&v) {
                    return Err(CertError::ParamOutOfRange {
                        name: k.clone(),
                        value: v,
                        range: "[0, 0.0625]".to_string(),
                    });
                }
                lambda = v;
            }
            Ok(interp3d_certificate(lambda))
        }
        other => Err(CertError::UnknownBuiltin(other.to_string())),
    }
}

/// `f = (1/4)(sin²ω₁ + sin²ω₂ + sin²(ω₁+ω₂))`: three squares.
pub fn boxspline111_certificate() -> SosCertificate {
    SosCertificate::new(vec![
        sin_poly(&mi(&[1, 0])).scaled(0.5),
        sin_poly(&mi(&[0, 1])).scaled(0.5),
        sin_poly(&mi(&[1, 1])).scaled(0.5),
    ])
}

/// The nine squares for the butterfly mask, in the variables
/// `u₁ = sin ω₁`, `u₂ = sin ω₂`, `v = sin(ω₁+ω₂)`, `v' = sin(ω₁-ω₂)`,
/// `w = sin(ω₁+2ω₂)`, `w' = sin(2ω₁+ω₂)`.
pub fn butterfly_certificate() -> SosCertificate {
    let u1 = sin_poly(&mi(&[1, 0]));
    let u2 = sin_poly(&mi(&[0, 1]));
    let v = sin_poly(&mi(&[1, 1]));
    let vp = sin_poly(&mi(&[1, -1]));
    let w = sin_poly(&mi(&[1, 2]));
    let wp = sin_poly(&mi(&[2, 1]));
    let u1s = &u1 * &u1;
    let u2s = &u2 * &u2;
    let vs = &v * &v;
    SosCertificate::new(vec![
        (&u1 * &u2).scaled(0.5),
        (&u1 * &v).scaled(0.5),
        (&u2 * &v).scaled(0.5),
        (&u1 * &w).scaled(0.25),
        (&u2 * &wp).scaled(0.25),
        (&v * &vp).scaled(0.25),
        (&u1 * &(&u2s + &vs)).scaled(0.25),
        (&u2 * &(&u1s + &vs)).scaled(0.25),
        (&v * &(&u1s + &u2s)).scaled(0.25),
    ])
}

/// 33 squares covering `f` for the trivariate interpolatory family:
/// seven per face class and three per edge class, each supported on a
/// single coset.
pub fn interp3d_certificate(lambda: f64) -> SosCertificate {
    let r8 = 8f64.sqrt();
    let sl = lambda.sqrt();

    // face base class (1,1,0): u = cos(ω₁+ω₂), v = cos(ω₁+ω₃), w = cos(ω₂+ω₃)
    let u = cos_poly(&mi(&[1, 1, 0]));
    let ut = sin_poly(&mi(&[1, 1, 0]));
    let v = cos_poly(&mi(&[1, 0, 1]));
    let w = cos_poly(&mi(&[0, 1, 1]));
    // g*g = 1/16 - λ cos²θ along one diagonal direction
    let root = (1.0 / 16.0 - lambda).sqrt();
    let ga = (root + 0.25) / 2.0;
    let gb = (root - 0.25) / 2.0;
    let gv = &LaurentPoly::constant(3, ga) + &LaurentPoly::monomial(mi(&[2, 0, 2]), gb);
    let gw = &LaurentPoly::constant(3, ga) + &LaurentPoly::monomial(mi(&[0, 2, 2]), gb);
    let v_uw = &v - &(&u * &w);
    let w_uv = &w - &(&u * &v);
    let face_base = vec![
        (&(&v * &v) - &(&w * &w)).scaled(r8 * lambda),
        &gv * &ut,
        (&gv * &v_uw).scaled(r8 * sl),
        (&gv * &w_uv).scaled(r8 * sl),
        &gw * &ut,
        (&gw * &v_uw).scaled(r8 * sl),
        (&gw * &w_uv).scaled(r8 * sl),
    ];

    // edge base class (1,0,0)
    let s1 = sin_poly(&mi(&[1, 0, 0]));
    let c1 = cos_poly(&mi(&[1, 0, 0]));
    let a = crate::catalog::interp3d_a_poly();
    let edge_base = [
        (&s1 * &s1).scaled(r8 * (3.0 * lambda).sqrt() / 4.0),
        (&s1.scaled(2.0) - &(&a * &c1)).scaled(r8 * sl / 8.0),
        (&s1 * &(&LaurentPoly::one(3) + &a.scaled(Complex64::new(0.0, sl))))
            .scaled(r8 * (1.0 - 16.0 * lambda).max(0.0).sqrt() / 8.0),
    ];

    let mut squares = face_base.clone();
    for b in [crate::catalog::b_face_101(), crate::catalog::b_face_011()] {
        squares.extend(face_base.iter().map(|h| h.substitute_monomial(&b)));
    }
    squares.extend(edge_base.iter().cloned());
    for b in [
        crate::catalog::b_edge_010(),
        crate::catalog::b_edge_001(),
        crate::catalog::b_edge_111(),
    ] {
        squares.extend(edge_base.iter().map(|h| h.substitute_monomial(&b)));
    }
    SosCertificate::new(squares)
}
