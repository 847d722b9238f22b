//! Dense complex matrices and a cyclic Jacobi eigensolver for hermitian
//! matrices.
//!
//! Pivots are visited in a fixed row-major order and eigenvectors get a
//! canonical phase, so decompositions are reproducible across runs.

use num_complex::Complex64;

const MAX_SWEEPS: usize = 100;

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            m[(k, k)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        CMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn hermitian_residual(&self) -> f64 {
        let mut r = 0f64;
        for i in 0..self.n {
            for j in 0..=i {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    /// Averages with the conjugate transpose.
    pub fn hermitized(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    /// Frobenius inner product `Re tr(A* B)`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigendecomposition `A = V diag(λ) V*` of a hermitian matrix, eigenvalues
/// descending, eigenvectors in the columns of `vectors` with the
/// largest-magnitude entry made real positive.
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.dim())
            .map(|i| self.vectors[(i, k)])
            .collect()
    }

    /// `V diag(g(λ)) V*` for a spectral map `g`.
    pub fn reassemble(&self, g: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.dim();
        let mut out = CMatrix::zeros(n);
        for k in 0..n {
            let lam = g(self.eigenvalues[k]);
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)];
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj() * lam;
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi eigendecomposition of a hermitian matrix.
pub fn eigh(a: &CMatrix) -> EigenDecomposition {
    let n = a.dim();
    let mut m = a.hermitized();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm();
    let tol = 1e-15 * scale.max(f64::MIN_POSITIVE);

    if n > 1 && scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let mut off = 0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += m[(i, j)].norm_sqr();
                }
            }
            if off.sqrt() <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut m, &mut v, p, q, tol);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(j, j)]
            .re
            .partial_cmp(&m[(i, i)].re)
            .unwrap()
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| m[(k, k)].re).collect();
    let mut vectors = CMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        // canonical phase: largest-magnitude entry real positive
        let mut best = 0usize;
        let mut best_norm = -1.0;
        for i in 0..n {
            let nm = v[(i, k)].norm();
            if nm > best_norm * (1.0 + 1e-12) {
                best_norm = nm;
                best = i;
            }
        }
        let z = v[(best, k)];
        let phase = if z.norm() > 0.0 {
            z.conj() / z.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            vectors[(i, col)] = v[(i, k)] * phase;
        }
    }
    EigenDecomposition {
        eigenvalues,
        vectors,
    }
}

/// One plane rotation annihilating `m[(p,q)]`; updates `v` by the same
/// unitary on the right.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, tol: f64) {
    let n = m.dim();
    let apq = m[(p, q)];
    let r = apq.norm();
    if r <= tol * 1e-3 {
        return;
    }
    let phase = apq / r;
    let theta = (m[(q, q)].re - m[(p, p)].re) / (2.0 * r);
    let t = if theta >= 0.0 {
        -1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let se_pos = phase * s; //  s·e^{iφ}
    let se_neg = phase.conj() * s; //  s·e^{-iφ}

    // A ← A·G with G = I except G[p][p]=c, G[p][q]=-s·e^{iφ},
    //                           G[q][p]=s·e^{-iφ}, G[q][q]=c
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * c + akq * se_neg;
        m[(k, q)] = -akp * se_pos + akq * c;
    }
    // A ← G*·A
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * c + aqk * se_pos;
        m[(q, k)] = -apk * se_neg + aqk * c;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * se_neg;
        v[(k, q)] = -vkp * se_pos + vkq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(rng.gen_range(-2.0..2.0), 0.0);
            for j in (i + 1)..n {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    fn reconstruct(d: &EigenDecomposition) -> CMatrix {
        d.reassemble(|x| x)
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for n in [1usize, 2, 3, 5, 8] {
            for _ in 0..10 {
                let a = random_hermitian(n, &mut rng);
                let d = eigh(&a);
                let err = reconstruct(&d).sub(&a).max_abs();
                assert!(err < 1e-12, "n={n} reconstruction error {err}");
                // descending order
                for k in 1..n {
                    assert!(d.eigenvalues[k - 1] >= d.eigenvalues[k] - 1e-13);
                }
                // unitary columns
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..n {
                            acc += d.vectors[(k, i)].conj() * d.vectors[(k, j)];
                        }
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((acc - expect).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn eigh_real_diagonal() {
        let mut a = CMatrix::zeros(2);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        a[(1, 1)] = Complex64::new(-1.0, 0.0);
        let d = eigh(&a);
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((d.eigenvalues[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigh_zero_and_scalar() {
        let z = CMatrix::zeros(3);
        let d = eigh(&z);
        assert!(d.eigenvalues.iter().all(|&l| l == 0.0));

        let mut one = CMatrix::zeros(1);
        one[(0, 0)] = Complex64::new(4.0, 0.0);
        let d = eigh(&one);
        assert!((d.eigenvalues[0] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn eigh_known_complex_pair() {
        // [[0, i], [-i, 0]] has eigenvalues ±1
        let mut a = CMatrix::zeros(2);
        a[(0, 1)] = Complex64::new(0.0, 1.0);
        a[(1, 0)] = Complex64::new(0.0, -1.0);
        let d = eigh(&a);
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((d.eigenvalues[1] + 1.0).abs() < 1e-14);
        let err = reconstruct(&d).sub(&a).max_abs();
        assert!(err < 1e-13);
    }

    #[test]
    fn eigh_deterministic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a = random_hermitian(6, &mut rng);
        let d1 = eigh(&a);
        let d2 = eigh(&a);
        assert_eq!(d1.eigenvalues, d2.eigenvalues);
        assert_eq!(d1.vectors, d2.vectors);
    }
}
