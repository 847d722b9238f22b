//! Dilation-matrix machinery: the finite group `G = 2πM^{-T}Z^d / 2πZ^d`,
//! coset representatives of its character group `G' = Z^d / MZ^d`, the
//! pairing `⟨σ,χ⟩ = e^{iσ·χ}`, and the shift action `p ↦ p^σ`.

use crate::laurent::{LaurentPoly, MultiIndex, TorusPoint};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("dilation matrix must be square and non-empty")]
    NotSquare,
    #[error("dilation matrix is singular")]
    Singular,
    #[error("pairing table failed the inversion identity A·A*/m = I (residual {0:.3e})")]
    PairingDegenerate(f64),
}

/// Square integer matrix stored as rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    pub rows: Vec<Vec<i64>>,
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, LatticeError> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(LatticeError::NotSquare);
        }
        Ok(IntMatrix { rows })
    }

    pub fn identity_scaled(d: usize, s: i64) -> Self {
        let mut rows = vec![vec![0; d]; d];
        for (k, row) in rows.iter_mut().enumerate() {
            row[k] = s;
        }
        IntMatrix { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim();
        IntMatrix {
            rows: (0..d)
                .map(|j| (0..d).map(|i| self.rows[i][j]).collect())
                .collect(),
        }
    }

    pub fn det(&self) -> i128 {
        det_rec(
            &self
                .rows
                .iter()
                .map(|r| r.iter().map(|&x| x as i128).collect())
                .collect::<Vec<Vec<i128>>>(),
        )
    }

    /// Adjugate: `adj(M)·M = det(M)·I`.
    pub fn adjugate(&self) -> Vec<Vec<i128>> {
        let d = self.dim();
        let m: Vec<Vec<i128>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        if d == 1 {
            return vec![vec![1]];
        }
        let mut adj = vec![vec![0i128; d]; d];
        for i in 0..d {
            for j in 0..d {
                let minor: Vec<Vec<i128>> = (0..d)
                    .filter(|&r| r != i)
                    .map(|r| {
                        (0..d)
                            .filter(|&c| c != j)
                            .map(|c| m[r][c])
                            .collect()
                    })
                    .collect();
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                adj[j][i] = sign * det_rec(&minor);
            }
        }
        adj
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }
}

fn det_rec(m: &[Vec<i128>]) -> i128 {
    let d = m.len();
    match d {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            let mut acc = 0i128;
            for j in 0..d {
                if m[0][j] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i128>> = (1..d)
                    .map(|r| (0..d).filter(|&c| c != j).map(|c| m[r][c]).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                acc += sign * m[0][j] * det_rec(&minor);
            }
            acc
        }
    }
}

/// An element of `G` stored both as a torus point and as the exact rational
/// `σ = 2π·num/den`, so roots of unity `e^{-iα·σ}` are computed from an
/// integer residue.
#[derive(Clone, Debug)]
pub struct GroupPoint {
    pub omega: TorusPoint,
    num: Vec<i64>,
    den: i64,
}

impl GroupPoint {
    /// `e^{-i α·σ}` as an exact root of unity.
    pub fn character_factor(&self, alpha: &MultiIndex) -> Complex64 {
        let mut t: i128 = 0;
        for (&a, &n) in alpha.0.iter().zip(&self.num) {
            t += a as i128 * n as i128;
        }
        let t = t.rem_euclid(self.den as i128) as f64;
        Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * t / self.den as f64)
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|&n| n == 0)
    }
}

/// Everything derived from one dilation matrix `M` with `m = |det M|`:
/// the group `G` of `m` torus points, one coset representative per class of
/// `Z^d/MZ^d`, and the `m×m` pairing table `⟨σ,χ⟩`.
#[derive(Clone, Debug)]
pub struct DilationContext {
    matrix: IntMatrix,
    dim: usize,
    order: usize,
    group: Vec<GroupPoint>,
    coset_reps: Vec<MultiIndex>,
    pairing: Vec<Vec<Complex64>>,
    adjugate: Vec<Vec<i128>>,
    det: i128,
    expansive: bool,
}

impl DilationContext {
    pub fn build(matrix: IntMatrix) -> Result<Self, LatticeError> {
        let d = matrix.dim();
        let det = matrix.det();
        if det == 0 {
            return Err(LatticeError::Singular);
        }
        let m = det.unsigned_abs() as usize;
        let adj = matrix.adjugate();

        let coset_reps = enumerate_coset_reps(&matrix, &adj, det, m);
        debug_assert_eq!(coset_reps.len(), m);

        // G ≅ Z^d / M^T Z^d via σ = 2π M^{-T} r, components reduced to [0, 2π)
        let mt = matrix.transpose();
        let adj_t = mt.adjugate();
        let reps_t = enumerate_coset_reps(&mt, &adj_t, det, m);
        let den = det.unsigned_abs() as i64;
        let group: Vec<GroupPoint> = reps_t
            .iter()
            .map(|r| {
                // M^{-T} r = adj(M^T) r / det; reduce each component mod 1
                let num: Vec<i64> = adj_t
                    .iter()
                    .map(|row| {
                        let mut s: i128 = 0;
                        for (&a, &b) in row.iter().zip(&r.0) {
                            s += a * b as i128;
                        }
                        if det < 0 {
                            s = -s;
                        }
                        s.rem_euclid(den as i128) as i64
                    })
                    .collect();
                let omega = TorusPoint(
                    num.iter()
                        .map(|&n| 2.0 * std::f64::consts::PI * n as f64 / den as f64)
                        .collect(),
                );
                GroupPoint { omega, num, den }
            })
            .collect();

        let pairing: Vec<Vec<Complex64>> = group
            .iter()
            .map(|sigma| {
                coset_reps
                    .iter()
                    .map(|chi| sigma.character_factor(chi).conj())
                    .collect()
            })
            .collect();

        // inversion identity A·A*/m = I
        let mut residual = 0f64;
        for i in 0..m {
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    acc += pairing[i][k] * pairing[j][k].conj();
                }
                let expect = if i == j { m as f64 } else { 0.0 };
                residual = residual.max((acc - expect).norm());
            }
        }
        if residual > 1e-12 * m as f64 {
            return Err(LatticeError::PairingDegenerate(residual));
        }

        let expansive = is_certainly_expansive(&matrix, &adj, det);
        if !expansive {
            log::warn!(
                "dilation matrix could not be certified expansive; \
                 symbol-level identities remain valid"
            );
        }

        Ok(DilationContext {
            matrix,
            dim: d,
            order: m,
            group,
            coset_reps,
            pairing,
            adjugate: adj,
            det,
            expansive,
        })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `m = |det M|`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn group(&self) -> &[GroupPoint] {
        &self.group
    }

    pub fn coset_reps(&self) -> &[MultiIndex] {
        &self.coset_reps
    }

    pub fn is_expansive_certified(&self) -> bool {
        self.expansive
    }

    /// `⟨σ_i, χ_j⟩ = e^{i σ_i · χ_j}`.
    pub fn pairing(&self, sigma_index: usize, chi_index: usize) -> Complex64 {
        self.pairing[sigma_index][chi_index]
    }

    /// True iff `a ≡ b mod MZ^d`.
    pub fn same_coset(&self, a: &MultiIndex, b: &MultiIndex) -> bool {
        // M k = a - b solvable over Z iff det | adj(M)(a-b) componentwise
        for row in &self.adjugate {
            let mut s: i128 = 0;
            for (&m, (&x, &y)) in row.iter().zip(a.0.iter().zip(&b.0)) {
                s += m * (x - y) as i128;
            }
            if s.rem_euclid(self.det.abs()) != 0 {
                return false;
            }
        }
        true
    }

    /// Index of the coset representative of `alpha`'s class.
    pub fn coset_index(&self, alpha: &MultiIndex) -> usize {
        self.coset_reps
            .iter()
            .position(|r| self.same_coset(alpha, r))
            .expect("coset representatives cover Z^d/MZ^d")
    }

    /// The shift action `p^σ(e^{-iω}) = p(e^{-i(ω+σ)})`, i.e. coefficientwise
    /// `p(α) ↦ p(α)·e^{-iα·σ}`.
    pub fn shift_action(&self, p: &LaurentPoly, sigma_index: usize) -> LaurentPoly {
        assert_eq!(p.dim(), self.dim, "dimension mismatch in shift_action");
        let sigma = &self.group[sigma_index];
        LaurentPoly::from_terms(
            p.dim(),
            p.terms()
                .map(|(e, c)| (e.clone(), c * sigma.character_factor(e))),
        )
    }

    /// True iff `max_σ` coefficientwise distance between `p^σ` and `p` is
    /// within `tol`.
    pub fn is_g_invariant(&self, p: &LaurentPoly, tol: f64) -> bool {
        self.group.iter().all(|sigma| {
            p.terms().all(|(e, c)| {
                let f = sigma.character_factor(e);
                (c * (f - 1.0)).norm() <= tol
            })
        })
    }
}

/// Lexicographically smallest nonnegative representative per class of
/// `Z^d / MZ^d`, found by scanning the box `[0, L)^d`.
fn enumerate_coset_reps(
    matrix: &IntMatrix,
    adj: &[Vec<i128>],
    det: i128,
    m: usize,
) -> Vec<MultiIndex> {
    let d = matrix.dim();
    let max_entry = matrix
        .rows
        .iter()
        .flat_map(|r| r.iter().map(|x| x.unsigned_abs()))
        .max()
        .unwrap_or(1);
    let l = (m as u64 * max_entry).max(1) as i64 + 1;
    let same = |a: &[i64], b: &[i64]| -> bool {
        for row in adj {
            let mut s: i128 = 0;
            for (&mm, (&x, &y)) in row.iter().zip(a.iter().zip(b)) {
                s += mm * (x - y) as i128;
            }
            if s.rem_euclid(det.abs()) != 0 {
                return false;
            }
        }
        true
    };
    let mut reps: Vec<MultiIndex> = Vec::with_capacity(m);
    let mut v = vec![0i64; d];
    'scan: loop {
        if !reps.iter().any(|r| same(&r.0, &v)) {
            reps.push(MultiIndex(v.clone()));
            if reps.len() == m {
                break;
            }
        }
        // odometer in lexicographic order: last coordinate fastest
        for k in (0..d).rev() {
            v[k] += 1;
            if v[k] < l {
                continue 'scan;
            }
            v[k] = 0;
        }
        break;
    }
    reps
}

/// Sufficient certificate for expansiveness: `‖(M^{-1})^64‖_∞ < 1` implies
/// `ρ(M^{-1}) < 1`.
fn is_certainly_expansive(matrix: &IntMatrix, adj: &[Vec<i128>], det: i128) -> bool {
    let d = matrix.dim();
    let mut b = vec![vec![0f64; d]; d];
    for i in 0..d {
        for j in 0..d {
            b[i][j] = adj[i][j] as f64 / det as f64;
        }
    }
    for _ in 0..6 {
        let mut sq = vec![vec![0f64; d]; d];
        for i in 0..d {
            for j in 0..d {
                sq[i][j] = (0..d).map(|k| b[i][k] * b[k][j]).sum();
            }
        }
        b = sq;
    }
    let norm = b
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    norm < 1.0
}
