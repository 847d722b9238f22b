//! Built-in masks with exact constructors, parameterized where a family is
//! parameterized.

use crate::isotypical::Mask;
use crate::lattice::{DilationContext, IntMatrix};
use crate::laurent::{cos_poly, sin_poly, LaurentPoly, MultiIndex};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog mask '{0}'")]
    UnknownName(String),
    #[error("unknown parameter '{0}' for mask '{1}'")]
    UnknownParam(String, String),
    #[error("parameter {name} = {value} outside the valid range {range}")]
    ParamOutOfRange {
        name: String,
        value: f64,
        range: String,
    },
    #[error("mask failed its load-time check: {0}")]
    LoadCheck(String),
    #[error(transparent)]
    Mask(#[from] crate::isotypical::MaskError),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
}

/// Parameter accepted by a catalog entry.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
    pub min_exclusive: bool,
    pub default: f64,
}

/// Static description of one catalog entry.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub dim: usize,
    pub param: Option<ParamSpec>,
    pub description: &'static str,
}

pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "daubechies4",
            dim: 1,
            param: None,
            description: "orthonormal 4-tap mask with two vanishing moments, M = (2)",
        },
        CatalogEntry {
            name: "boxspline111",
            dim: 2,
            param: None,
            description: "three-directional piecewise linear box spline, M = 2I",
        },
        CatalogEntry {
            name: "butterfly",
            dim: 2,
            param: None,
            description: "interpolatory butterfly subdivision mask, M = 2I",
        },
        CatalogEntry {
            name: "interp3d",
            dim: 3,
            param: Some(ParamSpec {
                name: "lambda",
                min: 0.0,
                max: 1.0 / 16.0,
                min_exclusive: false,
                default: 1.0 / 16.0,
            }),
            description: "trivariate interpolatory family with tension parameter, M = 2I",
        },
        CatalogEntry {
            name: "sqrt3",
            dim: 2,
            param: None,
            description: "interpolatory subdivision for M = [1 2; -2 -1], m = 3",
        },
        CatalogEntry {
            name: "motzkin",
            dim: 3,
            param: Some(ParamSpec {
                name: "c",
                min: 0.0,
                max: 1.0 / 3.0,
                min_exclusive: true,
                default: 1.0 / 3.0,
            }),
            description: "sub-QMF mask whose deficit polynomial starts with a Motzkin form",
        },
        CatalogEntry {
            name: "nosubqmf3d",
            dim: 3,
            param: None,
            description: "trivariate mask violating the sub-QMF condition",
        },
    ]
}

/// Builds a catalog mask. Unknown parameter names and out-of-range values
/// are rejected.
pub fn get(name: &str, params: &BTreeMap<String, f64>) -> Result<Mask, CatalogError> {
    let entry = entries()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CatalogError::UnknownName(name.to_string()))?;
    let mut value = entry.param.as_ref().map(|p| p.default);
    for (k, &v) in params {
        match &entry.param {
            Some(spec) if spec.name == k => {
                let below = if spec.min_exclusive {
                    v <= spec.min
                } else {
                    v < spec.min
                };
                if below || v > spec.max {
                    let open = if spec.min_exclusive { "(" } else { "[" };
                    return Err(CatalogError::ParamOutOfRange {
                        name: k.clone(),
                        value: v,
                        range: format!("{open}{}, {}]", spec.min, spec.max),
                    });
                }
                value = Some(v);
            }
            _ => {
                return Err(CatalogError::UnknownParam(k.clone(), name.to_string()));
            }
        }
    }
    match name {
        "daubechies4" => daubechies4(),
        "boxspline111" => boxspline111(),
        "butterfly" => butterfly(),
        "interp3d" => interp3d(value.unwrap()),
        "sqrt3" => sqrt3(),
        "motzkin" => motzkin(value.unwrap()),
        "nosubqmf3d" => nosubqmf3d(),
        _ => unreachable!(),
    }
}

fn mi(v: &[i64]) -> MultiIndex {
    MultiIndex(v.to_vec())
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn daubechies4() -> Result<Mask, CatalogError> {
    let ctx = DilationContext::build(IntMatrix::new(vec![vec![2]])?)?;
    let s3 = 3f64.sqrt();
    let p = LaurentPoly::from_terms(
        1,
        [
            (mi(&[0]), re((1.0 + s3) / 8.0)),
            (mi(&[1]), re((3.0 + s3) / 8.0)),
            (mi(&[2]), re((3.0 - s3) / 8.0)),
            (mi(&[3]), re((1.0 - s3) / 8.0)),
        ],
    );
    Ok(Mask::new(ctx, p)?)
}

pub fn boxspline111() -> Result<Mask, CatalogError> {
    let ctx = DilationContext::build(IntMatrix::identity_scaled(2, 2))?;
    let one = LaurentPoly::one(2);
    let z1 = LaurentPoly::monomial(mi(&[1, 0]), 1.0);
    let z2 = LaurentPoly::monomial(mi(&[0, 1]), 1.0);
    let z12 = LaurentPoly::monomial(mi(&[1, 1]), 1.0);
    let p = (&(&(&one + &z1) * &(&one + &z2)) * &(&one + &z12)).scaled(0.125);
    Ok(Mask::new(ctx, p)?)
}

pub fn butterfly() -> Result<Mask, CatalogError> {
    let ctx = DilationContext::build(IntMatrix::identity_scaled(2, 2))?;
    let mut terms: Vec<(MultiIndex, Complex64)> = vec![(mi(&[0, 0]), re(0.25))];
    let both = |e: [i64; 2], c: f64, terms: &mut Vec<(MultiIndex, Complex64)>| {
        terms.push((mi(&e), re(c)));
        terms.push((mi(&[-e[0], -e[1]]), re(c)));
    };
    for e in [[1, 0], [0, 1], [1, 1]] {
        both(e, 1.0 / 8.0, &mut terms);
    }
    for e in [[2, 1], [1, 2], [1, -1]] {
        both(e, 1.0 / 32.0, &mut terms);
    }
    for e in [[3, 1], [3, 2], [2, 3], [1, 3], [2, -1], [1, -2]] {
        both(e, -1.0 / 64.0, &mut terms);
    }
    let p = LaurentPoly::from_terms(2, terms);
    Ok(Mask::new(ctx, p)?)
}

// Coordinate images shared by the trivariate interpolatory family and its
// certificate: substitution matrices B with term exponent α ↦ Bα.
pub(crate) fn b_edge_010() -> Vec<Vec<i64>> {
    vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]
}
pub(crate) fn b_edge_001() -> Vec<Vec<i64>> {
    vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]
}
pub(crate) fn b_edge_111() -> Vec<Vec<i64>> {
    vec![vec![1, -1, 0], vec![1, 0, -1], vec![1, 0, 0]]
}
pub(crate) fn b_face_101() -> Vec<Vec<i64>> {
    vec![vec![1, 0, 0], vec![0, 0, 1], vec![0, 1, 0]]
}
pub(crate) fn b_face_011() -> Vec<Vec<i64>> {
    vec![vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]]
}

/// Component of the trivariate family on the coset of `(1,0,0)`:
/// `(1/8)cos ω₁ + (λ/2) sin ω₁ · A` with
/// `A = sin 2(ω₁+ω₂+ω₃) - sin 2ω₂ - sin 2ω₃`.
pub(crate) fn interp3d_edge_component(lambda: f64) -> LaurentPoly {
    let c1 = cos_poly(&mi(&[1, 0, 0]));
    let s1 = sin_poly(&mi(&[1, 0, 0]));
    let a = interp3d_a_poly();
    &c1.scaled(0.125) + &(&s1 * &a).scaled(lambda / 2.0)
}

pub(crate) fn interp3d_a_poly() -> LaurentPoly {
    let s222 = sin_poly(&mi(&[2, 2, 2]));
    let s020 = sin_poly(&mi(&[0, 2, 0]));
    let s002 = sin_poly(&mi(&[0, 0, 2]));
    &(&s222 - &s020) - &s002
}

/// Component on the coset of `(1,1,0)`:
/// `(1/8)u - λ·u·(v² + w²) + 2λ·v·w` with `u = cos(ω₁+ω₂)`,
/// `v = cos(ω₁+ω₃)`, `w = cos(ω₂+ω₃)`.
pub(crate) fn interp3d_face_component(lambda: f64) -> LaurentPoly {
    let u = cos_poly(&mi(&[1, 1, 0]));
    let v = cos_poly(&mi(&[1, 0, 1]));
    let w = cos_poly(&mi(&[0, 1, 1]));
    let v2w2 = &(&v * &v) + &(&w * &w);
    let t1 = u.scaled(0.125);
    let t2 = (&u * &v2w2).scaled(-lambda);
    let t3 = (&v * &w).scaled(2.0 * lambda);
    &(&t1 + &t2) + &t3
}

pub fn interp3d(lambda: f64) -> Result<Mask, CatalogError> {
    let ctx = DilationContext::build(IntMatrix::identity_scaled(3, 2))?;
    let p100 = interp3d_edge_component(lambda);
    let p110 = interp3d_face_component(lambda);
    let mut p = LaurentPoly::constant(3, 0.125);
    p = &p + &p100;
    p = &p + &p100.substitute_monomial(&b_edge_010());
    p = &p + &p100.substitute_monomial(&b_edge_001());
    p = &p + &p100.substitute_monomial(&b_edge_111());
    p = &p + &p110;
    p = &p + &p110.substitute_monomial(&b_face_101());
    p = &p + &p110.substitute_monomial(&b_face_011());
    Ok(Mask::new(ctx, p)?)
}

/// The component of the √3 mask on the coset of `(0,1)` as printed:
/// `(4/27)(z₂ + z₁⁻¹ + z₁z₂⁻¹) - (1/27)(z₁⁻²z₂² + z₁² + z₂⁻²)`.
pub fn sqrt3_component_01() -> LaurentPoly {
    LaurentPoly::from_terms(
        2,
        [
            (mi(&[0, 1]), re(4.0 / 27.0)),
            (mi(&[-1, 0]), re(4.0 / 27.0)),
            (mi(&[1, -1]), re(4.0 / 27.0)),
            (mi(&[-2, 2]), re(-1.0 / 27.0)),
            (mi(&[2, 0]), re(-1.0 / 27.0)),
            (mi(&[0, -2]), re(-1.0 / 27.0)),
        ],
    )
}

pub fn sqrt3() -> Result<Mask, CatalogError> {
    let ctx = DilationContext::build(IntMatrix::new(vec![vec![1, 2], vec![-2, -1]])?)?;
    let p01 = sqrt3_component_01();
    let p10 = p01.substitute_monomial(&[vec![0, 1], vec![1, 0]]);
    let p = &(&LaurentPoly::constant(2, 1.0 / 3.0) + &p01) + &p10;
    Ok(Mask::new(ctx, p)?)
}

/// Univariate orthonormal scaling symbol with 8 vanishing moments
/// (16 taps, extremal phase), normalized to `m₈(1) = 1`.
pub const M8_COEFFS: [f64; 16] = [
    0.03847781105407624,
    0.22123362357612492,
    0.4777430752138737,
    0.4139082662111959,
    -0.011192867666880218,
    -0.20082931639048904,
    0.00033409704622011877,
    0.09103817842365775,
    -0.012281950522848408,
    -0.03117510332513943,
    0.00988607964835076,
    0.006184422409815923,
    -0.003443859628441809,
    -0.00027700227447938935,
    0.00047761485564962614,
    -8.306863068661269e-05,
];

pub fn m8_univariate() -> LaurentPoly {
    LaurentPoly::from_terms(
        1,
        M8_COEFFS
            .iter()
            .enumerate()
            .map(|(k, &c)| (mi(&[k as i64]), re(c))),
    )
}

/// Load-time checks on the `m₈` literals: `|m₈(1) - 1| ≤ 1e-10` and the
/// QMF identity `|m₈(ω)|² + |m₈(ω+π)|² = 1` to `1e-8`.
fn check_m8(m8: &LaurentPoly) -> Result<(), CatalogError> {
    let at_one: f64 = M8_COEFFS.iter().sum();
    if (at_one - 1.0).abs() > 1e-10 {
        return Err(CatalogError::LoadCheck(format!(
            "m8(1) deviates by {:.3e}",
            (at_one - 1.0).abs()
        )));
    }
    // |m8|² + |m8(·+π)|² = 1 ⟺ the even part of g = m8* m8 is 1/2
    let g = &m8.involution() * m8;
    for (e, c) in g.terms() {
        let k = e.0[0];
        if k % 2 != 0 {
            continue;
        }
        let expect = if k == 0 { 0.5 } else { 0.0 };
        if (c - expect).norm() > 5e-9 {
            return Err(CatalogError::LoadCheck(format!(
                "QMF identity violated at lag {k}: {:.3e}",
                (c - expect).norm()
            )));
        }
    }
    Ok(())
}

pub fn motzkin(c: f64) -> Result<Mask, CatalogError> {
    let ctx = DilationContext::build(IntMatrix::identity_scaled(3, 2))?;
    let m8 = m8_univariate();
    check_m8(&m8)?;
    // tensor product a(z) = m8(z1) m8(z2) m8(z3)
    let a1 = m8.substitute_monomial(&[vec![1], vec![0], vec![0]]);
    let a2 = m8.substitute_monomial(&[vec![0], vec![1], vec![0]]);
    let a3 = m8.substitute_monomial(&[vec![0], vec![0], vec![1]]);
    let a = &(&a1 * &a2) * &a3;
    // Motzkin form in y_j = sin ω_j: y1⁴y2² + y1²y2⁴ + y3⁶ - 3 y1²y2²y3²
    let y1 = sin_poly(&mi(&[1, 0, 0]));
    let y2 = sin_poly(&mi(&[0, 1, 0]));
    let y3 = sin_poly(&mi(&[0, 0, 1]));
    let y1s = &y1 * &y1;
    let y2s = &y2 * &y2;
    let y3s = &y3 * &y3;
    let m = &(&(&(&y1s * &y1s) * &y2s) + &(&y1s * &(&y2s * &y2s)))
        + &(&(&(&y3s * &y3s) * &y3s) - &(&(&y1s * &y2s) * &y3s).scaled(3.0));
    let p = &(&LaurentPoly::one(3) - &m.scaled(c)) * &a;
    Ok(Mask::new(ctx, p)?)
}

pub fn nosubqmf3d() -> Result<Mask, CatalogError> {
    let ctx = DilationContext::build(IntMatrix::identity_scaled(3, 2))?;
    let one = LaurentPoly::one(3);
    let a: Vec<LaurentPoly> = (0..3)
        .map(|j| (&one + &LaurentPoly::monomial(MultiIndex::unit(3, j), 1.0)).scaled(0.5))
        .collect();
    let b = (&one + &LaurentPoly::monomial(mi(&[1, 1, 1]), 1.0)).scaled(0.5);
    let pow = |q: &LaurentPoly, k: usize| -> LaurentPoly {
        let mut acc = LaurentPoly::one(3);
        for _ in 0..k {
            acc = &acc * q;
        }
        acc
    };
    let z1 = LaurentPoly::monomial(mi(&[1, 0, 0]), 1.0);
    let z2 = LaurentPoly::monomial(mi(&[0, 1, 0]), 1.0);
    let z3 = LaurentPoly::monomial(mi(&[0, 0, 1]), 1.0);
    let z123 = LaurentPoly::monomial(mi(&[1, 1, 1]), 1.0);
    let t1 = (&(&z123 * &pow(&a[0], 2)) * &(&pow(&a[1], 2) * &(&pow(&a[2], 2) * &pow(&b, 2))))
        .scaled(6.0);
    let t2 = (&(&z1 * &a[0]) * &(&pow(&a[1], 3) * &(&pow(&a[2], 3) * &pow(&b, 3))))
        .scaled(-1.25);
    let t3 = (&(&z2 * &a[1]) * &(&pow(&a[0], 3) * &(&pow(&a[2], 3) * &pow(&b, 3))))
        .scaled(-1.25);
    let t4 = (&(&z3 * &a[2]) * &(&pow(&a[0], 3) * &(&pow(&a[1], 3) * &pow(&b, 3))))
        .scaled(-1.25);
    let t5 = (&(&z123 * &b) * &(&pow(&a[0], 3) * &(&pow(&a[1], 3) * &pow(&a[2], 3))))
        .scaled(-1.25);
    let p = &(&(&t1 + &t2) + &(&t3 + &t4)) + &t5;
    Ok(Mask::new(ctx, p)?)
}
