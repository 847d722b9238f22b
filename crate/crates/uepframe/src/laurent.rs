//! Sparse Laurent-polynomial arithmetic on the complexified torus.
//!
//! A Laurent polynomial `p = Σ_α p(α) z^α` with `α ∈ Z^d` is identified via
//! `z = e^{-iω}` with the trigonometric polynomial `ω ↦ Σ_α p(α) e^{-iα·ω}`.
//! The involution `*` sends `z_j` to `z_j^{-1}` and conjugates coefficients,
//! so that `p*(e^{-iω}) = conj(p(e^{-iω}))` on the real torus.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficients with magnitude below this are dropped after every
/// arithmetic operation.
pub const DROP_TOLERANCE: f64 = 1e-16;

/// Output boxes larger than this never use the dense multiplication buffer.
const DENSE_MUL_MAX_CELLS: usize = 1 << 22;

/// Exponent vector `α ∈ Z^d`. Ordering and hashing are componentwise;
/// the derived `Ord` is the lexicographic term order used everywhere.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// Standard basis vector `e_k`.
    pub fn unit(dim: usize, k: usize) -> Self {
        let mut v = vec![0; dim];
        v[k] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn negated(&self) -> Self {
        MultiIndex(self.0.iter().map(|x| -x).collect())
    }

    pub fn added(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn subtracted(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex(v)
    }
}

/// A point `ω ∈ R^d` on the torus, components in radians mod `2π`.
#[derive(Clone, PartialEq, Debug)]
pub struct TorusPoint(pub Vec<f64>);

impl TorusPoint {
    pub fn origin(dim: usize) -> Self {
        TorusPoint(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Componentwise reduction to `[0, 2π)`.
    pub fn reduced(&self) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        TorusPoint(
            self.0
                .iter()
                .map(|&w| {
                    let r = w.rem_euclid(two_pi);
                    if (r - two_pi).abs() < 1e-12 {
                        0.0
                    } else {
                        r
                    }
                })
                .collect(),
        )
    }

    /// Max componentwise circular distance to `other`.
    pub fn circular_distance(&self, other: &Self) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| {
                let d = (a - b).rem_euclid(two_pi);
                d.min(two_pi - d)
            })
            .fold(0.0, f64::max)
    }
}

/// Sparse Laurent polynomial over `C` in `dim` variables.
///
/// Terms are kept in a `BTreeMap` so iteration (and serialization) is always
/// in lexicographic exponent order. Stored coefficients never have magnitude
/// below [`DROP_TOLERANCE`].
#[derive(Clone, PartialEq, Debug)]
pub struct LaurentPoly {
    dim: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl LaurentPoly {
    pub fn zero(dim: usize) -> Self {
        LaurentPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: impl Into<Complex64>) -> Self {
        Self::monomial(MultiIndex::zero(dim), c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, 1.0)
    }

    /// The single term `c·z^α`.
    pub fn monomial(exp: MultiIndex, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if c.norm() >= DROP_TOLERANCE {
            terms.insert(exp.clone(), c);
        }
        LaurentPoly {
            dim: exp.dim(),
            terms,
        }
    }

    /// Builds from `(exponent, coefficient)` pairs, summing duplicates.
    pub fn from_terms<I>(dim: usize, iter: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut terms: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (e, c) in iter {
            assert_eq!(e.dim(), dim, "exponent dimension mismatch");
            *terms.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        terms.retain(|_, c| c.norm() >= DROP_TOLERANCE);
        LaurentPoly { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &MultiIndex) -> Complex64 {
        self.terms
            .get(exp)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Iterates terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    /// Largest coefficient magnitude, `0` for the zero polynomial.
    pub fn max_coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        let mut terms = self.terms.clone();
        for c in terms.values_mut() {
            *c *= s;
        }
        terms.retain(|_, c| c.norm() >= DROP_TOLERANCE);
        LaurentPoly {
            dim: self.dim,
            terms,
        }
    }

    /// The involution `p*`: `p*(α) = conj(p(-α))`.
    pub fn involution(&self) -> Self {
        LaurentPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.negated(), c.conj()))
                .collect(),
        }
    }

    /// True iff `max_α |p(-α) - conj(p(α))| ≤ tol`, i.e. `p` is fixed by the
    /// involution and hence real-valued on the torus.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.iter().all(|(e, c)| {
            let mirrored = self.coeff(&e.negated());
            (mirrored - c.conj()).norm() <= tol
        })
    }

    /// `Σ_α p(α) e^{-iα·ω}`.
    pub fn evaluate(&self, w: &TorusPoint) -> Complex64 {
        assert_eq!(w.dim(), self.dim, "point dimension mismatch");
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let phase: f64 = e.0.iter().zip(&w.0).map(|(&a, &x)| a as f64 * x).sum();
            acc += c * Complex64::from_polar(1.0, -phase);
        }
        acc
    }

    /// Partial derivative `D^μ` of `ω ↦ p(e^{-iω})` evaluated at `w`:
    /// `Σ_α p(α) Π_k (-i α_k)^{μ_k} e^{-iα·ω}`.
    pub fn derivative_eval(&self, mu: &MultiIndex, w: &TorusPoint) -> Complex64 {
        assert_eq!(mu.dim(), self.dim);
        assert!(mu.0.iter().all(|&m| m >= 0), "derivative orders must be >= 0");
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut weight = Complex64::new(1.0, 0.0);
            for (&a, &m) in e.0.iter().zip(&mu.0) {
                let base = Complex64::new(0.0, -(a as f64));
                for _ in 0..m {
                    weight *= base;
                }
            }
            if weight.norm() == 0.0 {
                continue;
            }
            let phase: f64 = e.0.iter().zip(&w.0).map(|(&a, &x)| a as f64 * x).sum();
            acc += c * weight * Complex64::from_polar(1.0, -phase);
        }
        acc
    }

    /// Monomial substitution: every term `c·w^α` maps to `c·z^{Bα}`, where
    /// column `j` of `B` is the exponent of the image of the `j`-th variable.
    /// `B` has shape `d_out × dim` given as rows.
    pub fn substitute_monomial(&self, b: &[Vec<i64>]) -> Self {
        let d_out = b.len();
        assert!(
            b.iter().all(|row| row.len() == self.dim),
            "substitution matrix must have {} columns",
            self.dim
        );
        let mut terms: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (e, c) in &self.terms {
            let img: Vec<i64> = b
                .iter()
                .map(|row| row.iter().zip(&e.0).map(|(&m, &a)| m * a).sum())
                .collect();
            *terms
                .entry(MultiIndex(img))
                .or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        terms.retain(|_, c| c.norm() >= DROP_TOLERANCE);
        LaurentPoly { dim: d_out, terms }
    }

    fn support_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let mut lo = first.0.clone();
        let mut hi = first.0.clone();
        for e in it {
            for k in 0..self.dim {
                lo[k] = lo[k].min(e.0[k]);
                hi[k] = hi[k].max(e.0[k]);
            }
        }
        Some((lo, hi))
    }

    /// Per-axis `[min, max]` exponent bounds of the support.
    pub fn bounding_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        self.support_box()
    }
}

fn add_impl(a: &LaurentPoly, b: &LaurentPoly, sign: f64) -> LaurentPoly {
    assert_eq!(a.dim, b.dim, "dimension mismatch in add");
    let mut terms = a.terms.clone();
    for (e, c) in &b.terms {
        *terms.entry(e.clone()).or_insert(Complex64::new(0.0, 0.0)) += c * sign;
    }
    terms.retain(|_, c| c.norm() >= DROP_TOLERANCE);
    LaurentPoly { dim: a.dim, terms }
}

fn mul_impl(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    assert_eq!(a.dim, b.dim, "dimension mismatch in mul");
    if a.is_zero() || b.is_zero() {
        return LaurentPoly::zero(a.dim);
    }
    let (alo, ahi) = a.support_box().unwrap();
    let (blo, bhi) = b.support_box().unwrap();
    let lo: Vec<i64> = alo.iter().zip(&blo).map(|(x, y)| x + y).collect();
    let hi: Vec<i64> = ahi.iter().zip(&bhi).map(|(x, y)| x + y).collect();
    let mut cells: usize = 1;
    let mut overflow = false;
    for k in 0..a.dim {
        let side = (hi[k] - lo[k] + 1) as usize;
        cells = match cells.checked_mul(side) {
            Some(c) if c <= DENSE_MUL_MAX_CELLS => c,
            _ => {
                overflow = true;
                break;
            }
        };
    }
    let nnz_prod = a.terms.len().saturating_mul(b.terms.len());
    if !overflow && cells <= nnz_prod.saturating_mul(16) {
        mul_dense(a, b, &lo, &hi, cells)
    } else {
        mul_sparse(a, b)
    }
}

/// Accumulates products into a dense buffer over the Minkowski-sum box.
fn mul_dense(
    a: &LaurentPoly,
    b: &LaurentPoly,
    lo: &[i64],
    hi: &[i64],
    cells: usize,
) -> LaurentPoly {
    let dim = a.dim;
    let mut strides = vec![1usize; dim];
    for k in (0..dim.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * (hi[k + 1] - lo[k + 1] + 1) as usize;
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); cells];
    let b_flat: Vec<(Vec<i64>, Complex64)> =
        b.terms.iter().map(|(e, c)| (e.0.clone(), *c)).collect();
    for (ea, ca) in &a.terms {
        for (eb, cb) in &b_flat {
            let mut idx = 0usize;
            for k in 0..dim {
                idx += ((ea.0[k] + eb[k] - lo[k]) as usize) * strides[k];
            }
            buf[idx] += ca * cb;
        }
    }
    let mut terms = BTreeMap::new();
    let mut exp = lo.to_vec();
    for c in buf {
        if c.norm() >= DROP_TOLERANCE {
            terms.insert(MultiIndex(exp.clone()), c);
        }
        for k in (0..dim).rev() {
            exp[k] += 1;
            if exp[k] <= hi[k] {
                break;
            }
            exp[k] = lo[k];
        }
    }
    LaurentPoly { dim, terms }
}

fn mul_sparse(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    let mut terms: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
    for (ea, ca) in &a.terms {
        for (eb, cb) in &b.terms {
            *terms
                .entry(ea.added(eb))
                .or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
        }
    }
    terms.retain(|_, c| c.norm() >= DROP_TOLERANCE);
    LaurentPoly { dim: a.dim, terms }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        add_impl(self, rhs, 1.0)
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        add_impl(self, rhs, -1.0)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        mul_impl(self, rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scaled(-1.0)
    }
}

/// `sin(l·ω)` as a Laurent polynomial: `(z^{-l} - z^{l}) / 2i`.
pub fn sin_poly(l: &MultiIndex) -> LaurentPoly {
    let half_i = Complex64::new(0.0, -0.5); // 1/(2i)
    LaurentPoly::from_terms(
        l.dim(),
        [(l.negated(), half_i), (l.clone(), -half_i)],
    )
}

/// `cos(l·ω)` as a Laurent polynomial: `(z^{-l} + z^{l}) / 2`.
pub fn cos_poly(l: &MultiIndex) -> LaurentPoly {
    let half = Complex64::new(0.5, 0.0);
    LaurentPoly::from_terms(l.dim(), [(l.negated(), half), (l.clone(), half)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[i64]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn add_basic() {
        let a = LaurentPoly::monomial(mi(&[1]), 1.0);
        let b = LaurentPoly::monomial(mi(&[-1]), 1.0);
        let s = &a + &b;
        assert_eq!(s.coeff(&mi(&[1])), Complex64::new(1.0, 0.0));
        assert_eq!(s.coeff(&mi(&[-1])), Complex64::new(1.0, 0.0));
        let z = LaurentPoly::zero(1);
        assert_eq!(&a + &z, a);
    }

    #[test]
    fn mul_basic() {
        let z = LaurentPoly::monomial(mi(&[1]), 1.0);
        let zinv = LaurentPoly::monomial(mi(&[-1]), 1.0);
        assert_eq!(&z * &zinv, LaurentPoly::one(1));

        let one = LaurentPoly::one(1);
        let p = &(&one + &z) * &(&one - &z);
        assert_eq!(p.coeff(&mi(&[0])), Complex64::new(1.0, 0.0));
        assert_eq!(p.coeff(&mi(&[1])), Complex64::new(0.0, 0.0));
        assert_eq!(p.coeff(&mi(&[2])), Complex64::new(-1.0, 0.0));
    }

    fn box_spline() -> LaurentPoly {
        let one = LaurentPoly::one(2);
        let z1 = LaurentPoly::monomial(mi(&[1, 0]), 1.0);
        let z2 = LaurentPoly::monomial(mi(&[0, 1]), 1.0);
        let z12 = LaurentPoly::monomial(mi(&[1, 1]), 1.0);
        (&(&(&one + &z1) * &(&one + &z2)) * &(&one + &z12)).scaled(0.125)
    }

    fn daubechies4() -> LaurentPoly {
        let s3 = 3f64.sqrt();
        LaurentPoly::from_terms(
            1,
            [
                (mi(&[0]), Complex64::new((1.0 + s3) / 8.0, 0.0)),
                (mi(&[1]), Complex64::new((3.0 + s3) / 8.0, 0.0)),
                (mi(&[2]), Complex64::new((3.0 - s3) / 8.0, 0.0)),
                (mi(&[3]), Complex64::new((1.0 - s3) / 8.0, 0.0)),
            ],
        )
    }

    #[test]
    fn box_spline_expansion_coeff() {
        let p = box_spline();
        assert!((p.coeff(&mi(&[1, 1])) - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert_eq!(p.num_terms(), 7);
    }

    #[test]
    fn daubechies_self_product_constant() {
        let p = daubechies4();
        let pp = &p.involution() * &p;
        assert!((pp.coeff(&mi(&[0])).re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn involution_involutive_and_hermitian() {
        let p = daubechies4();
        assert_eq!(p.involution().involution(), p);
        let s3 = 3f64.sqrt();
        assert!(
            (p.involution().coeff(&mi(&[0])) - Complex64::new((1.0 + s3) / 8.0, 0.0)).norm()
                < 1e-15
        );

        let z1 = LaurentPoly::monomial(mi(&[1]), 1.0);
        assert!(!z1.is_hermitian(1e-12));
        let sym = &z1 + &z1.involution();
        assert!(sym.is_hermitian(1e-12));
    }

    #[test]
    fn evaluate_examples() {
        let p = daubechies4();
        let v = p.evaluate(&TorusPoint(vec![0.0]));
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);

        let b = box_spline();
        let v = b.evaluate(&TorusPoint(vec![std::f64::consts::PI, std::f64::consts::PI]));
        assert!(v.norm() < 1e-14);

        let c = LaurentPoly::constant(2, Complex64::new(2.5, -1.0));
        let v = c.evaluate(&TorusPoint(vec![0.7, 1.9]));
        assert!((v - Complex64::new(2.5, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn derivative_eval_examples() {
        let b = box_spline();
        let origin = TorusPoint::origin(2);
        // μ = 0 reduces to evaluate
        let v0 = b.derivative_eval(&mi(&[0, 0]), &origin);
        assert!((v0 - b.evaluate(&origin)).norm() < 1e-15);
        // Σ p(α) α₁ = 1
        let v1 = b.derivative_eval(&mi(&[1, 0]), &origin);
        assert!((v1 - Complex64::new(0.0, -1.0)).norm() < 1e-13);
        // Σ p(α) α₁² = 3/2
        let v2 = b.derivative_eval(&mi(&[2, 0]), &origin);
        assert!((v2 - Complex64::new(-1.5, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for _ in 0..20 {
            let mut terms = Vec::new();
            for _ in 0..6 {
                let e = mi(&[rng.gen_range(-3..=3), rng.gen_range(-3..=3)]);
                terms.push((
                    e,
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ));
            }
            let p = LaurentPoly::from_terms(2, terms);
            let w = TorusPoint(vec![rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..std::f64::consts::TAU)]);
            let exact = p.derivative_eval(&mi(&[1, 0]), &w);
            let wp = TorusPoint(vec![w.0[0] + h, w.0[1]]);
            let wm = TorusPoint(vec![w.0[0] - h, w.0[1]]);
            let fd = (p.evaluate(&wp) - p.evaluate(&wm)) / (2.0 * h);
            let scale = exact.norm().max(1.0);
            assert!(
                (exact - fd).norm() / scale < 1e-6,
                "finite difference mismatch: {exact} vs {fd}"
            );
        }
    }

    #[test]
    fn substitute_monomial_examples() {
        let b = box_spline();
        let id = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(b.substitute_monomial(&id), b);

        // B encoding (z1 z2 z3, z1^{-1}, z2^{-1}) maps (1,0,0) to (1,1,1)
        let b3 = vec![vec![1, -1, 0], vec![1, 0, -1], vec![1, 0, 0]];
        let m = LaurentPoly::monomial(mi(&[1, 0, 0]), 1.0);
        let im = m.substitute_monomial(&b3);
        assert_eq!(im.coeff(&mi(&[1, 1, 1])), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn substitution_commutes_with_involution() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let swap = vec![vec![0, 1], vec![1, 0]];
        for _ in 0..20 {
            let mut terms = Vec::new();
            for _ in 0..5 {
                terms.push((
                    mi(&[rng.gen_range(-2..=2), rng.gen_range(-2..=2)]),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ));
            }
            let p = LaurentPoly::from_terms(2, terms);
            let lhs = p.involution().substitute_monomial(&swap);
            let rhs = p.substitute_monomial(&swap).involution();
            assert!((&lhs - &rhs).max_coeff_norm() < 1e-13);
        }
    }

    #[test]
    fn trig_constructors() {
        assert!(sin_poly(&mi(&[0, 0])).is_zero());
        assert_eq!(cos_poly(&mi(&[0, 0])), LaurentPoly::one(2));

        let s = sin_poly(&mi(&[1, 0]));
        let c = cos_poly(&mi(&[1, 0]));
        let pyth = &(&s * &s) + &(&c * &c);
        assert!((&pyth - &LaurentPoly::one(2)).max_coeff_norm() < 1e-15);

        let s11 = sin_poly(&mi(&[1, 1]));
        let v = s11.evaluate(&TorusPoint(vec![
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_4,
        ]));
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn involution_antihomomorphism() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut ta = Vec::new();
            let mut tb = Vec::new();
            for _ in 0..5 {
                ta.push((
                    mi(&[rng.gen_range(-3..=3), rng.gen_range(-3..=3)]),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ));
                tb.push((
                    mi(&[rng.gen_range(-3..=3), rng.gen_range(-3..=3)]),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ));
            }
            let a = LaurentPoly::from_terms(2, ta);
            let b = LaurentPoly::from_terms(2, tb);
            let lhs = (&a * &b).involution();
            let rhs = &a.involution() * &b.involution();
            assert!((&lhs - &rhs).max_coeff_norm() < 1e-12);

            let w = TorusPoint(vec![rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..std::f64::consts::TAU)]);
            let ev = a.involution().evaluate(&w);
            assert!((ev - a.evaluate(&w).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn dense_and_sparse_mul_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let mut ta = Vec::new();
            let mut tb = Vec::new();
            for _ in 0..8 {
                ta.push((
                    mi(&[rng.gen_range(-4..=4), rng.gen_range(-4..=4)]),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ));
                tb.push((
                    mi(&[rng.gen_range(-4..=4), rng.gen_range(-4..=4)]),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ));
            }
            let a = LaurentPoly::from_terms(2, ta);
            let b = LaurentPoly::from_terms(2, tb);
            let dense = mul_impl(&a, &b);
            let sparse = mul_sparse(&a, &b);
            assert!((&dense - &sparse).max_coeff_norm() < 1e-13);
        }
    }
}
