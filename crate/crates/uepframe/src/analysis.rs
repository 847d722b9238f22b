//! Zero-finding for the sub-QMF polynomial on the torus, Hessians of
//! trigonometric polynomials, the Hessian shortcut at the origin, and the
//! sufficient-condition verdict for frame existence.

use crate::isotypical::{subqmf_poly, Mask};
use crate::laurent::{LaurentPoly, MultiIndex, TorusPoint};
use crate::linalg::{eigh, CMatrix};
use crate::verify::{check_subqmf_grid, default_grid_points, grid_values, sum_rules_order};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Zero-level tolerance for `f` on the grid and at refined points.
pub const ZERO_TOL: f64 = 1e-9;
/// A Hessian counts as positive definite when its smallest eigenvalue
/// exceeds this.
pub const PD_THRESHOLD: f64 = 1e-8;
/// Refined zeros closer than this (componentwise circular distance) are
/// merged.
pub const DEDUP_RADIUS: f64 = 1e-6;

const NEWTON_MAX_STEPS: usize = 50;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("f is negative on the grid: {min_value:.3e} at {at:?}")]
    NecessaryViolated { min_value: f64, at: Vec<f64> },
    #[error("mask has complex coefficients (max |Im| = {0:.3e})")]
    ComplexMask(f64),
    #[error("mask satisfies sum rules only to order {0}, need 2")]
    SumRulesTooLow(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "SUFFICIENT_HOLDS")]
    SufficientHolds,
    #[serde(rename = "NECESSARY_VIOLATED")]
    NecessaryViolated,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

/// Zeros of `f`, the Hessian of `f` at each, its smallest eigenvalue, and
/// the resulting verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ZeroReport {
    pub zeros: Vec<Vec<f64>>,
    pub hessians: Vec<Vec<Vec<f64>>>,
    pub min_eigenvalues: Vec<f64>,
    pub verdict: Verdict,
    pub grid_min: f64,
}

/// Matrix of second partials of `ω ↦ q(e^{-iω})` at `w`.
pub fn hessian_at(q: &LaurentPoly, w: &TorusPoint) -> Vec<Vec<Complex64>> {
    let d = q.dim();
    let mut h = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for i in 0..d {
        for j in i..d {
            let mut mu = vec![0i64; d];
            mu[i] += 1;
            mu[j] += 1;
            let v = q.derivative_eval(&MultiIndex(mu), w);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    h
}

fn gradient_at(q: &LaurentPoly, w: &TorusPoint) -> Vec<Complex64> {
    let d = q.dim();
    (0..d)
        .map(|k| q.derivative_eval(&MultiIndex::unit(d, k), w))
        .collect()
}

/// `Hess(f)(1) = -2·Hess(p)(1) - 2·∇p(1)*∇p(1)` for a real mask with sum
/// rules of order two.
pub fn hessian_f_via_lemma(mask: &Mask) -> Result<Vec<Vec<f64>>, AnalysisError> {
    let max_im = mask
        .poly()
        .terms()
        .map(|(_, c)| c.im.abs())
        .fold(0.0, f64::max);
    if max_im > 1e-12 {
        return Err(AnalysisError::ComplexMask(max_im));
    }
    let order = sum_rules_order(mask, 2);
    if order < 2 {
        return Err(AnalysisError::SumRulesTooLow(order));
    }
    let d = mask.dim();
    let origin = TorusPoint::origin(d);
    let grad = gradient_at(mask.poly(), &origin);
    let hess = hessian_at(mask.poly(), &origin);
    let mut out = vec![vec![0f64; d]; d];
    for i in 0..d {
        for j in 0..d {
            let v = -2.0 * hess[i][j] - 2.0 * grad[i].conj() * grad[j];
            debug_assert!(v.im.abs() <= 1e-10);
            out[i][j] = v.re;
        }
    }
    Ok(out)
}

fn solve_linear(h: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = h.to_vec();
    let mut b = rhs.to_vec();
    let scale = a
        .iter()
        .flat_map(|r| r.iter().map(|x| x.abs()))
        .fold(0.0, f64::max)
        .max(1e-300);
    for col in 0..n {
        let (piv, mag) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if mag < 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..n {
            let factor = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0f64; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in (r + 1)..n {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

enum Refined {
    Converged(TorusPoint),
    Dropped,
    Negative { value: f64, at: Vec<f64> },
}

/// Damped Newton on `∇f` from a grid candidate. Accepts immediately when
/// `|f| ≤ tol` and `‖∇f‖ ≤ √tol`; aborts the whole analysis when a visited
/// point has `f < -tol`.
fn refine_candidate(f: &LaurentPoly, start: TorusPoint, tol: f64) -> Refined {
    let mut x = start;
    for _ in 0..NEWTON_MAX_STEPS {
        let val = f.evaluate(&x).re;
        if val < -tol {
            return Refined::Negative {
                value: val,
                at: x.0.clone(),
            };
        }
        let grad: Vec<f64> = gradient_at(f, &x).iter().map(|g| g.re).collect();
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if val.abs() <= tol && gnorm <= tol.sqrt() {
            return Refined::Converged(x.reduced());
        }
        let hess: Vec<Vec<f64>> = hessian_at(f, &x)
            .into_iter()
            .map(|row| row.into_iter().map(|c| c.re).collect())
            .collect();
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let Some(step) = solve_linear(&hess, &neg_grad) else {
            log::warn!("dropping zero candidate at {:?}: singular Hessian", x.0);
            return Refined::Dropped;
        };
        // halve until f decreases
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = TorusPoint(
                x.0.iter()
                    .zip(&step)
                    .map(|(&xi, &si)| xi + t * si)
                    .collect(),
            );
            let cval = f.evaluate(&cand).re;
            if cval < val {
                x = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // stationary but not a zero of f
            log::warn!("dropping zero candidate at {:?}: no descent", x.0);
            return Refined::Dropped;
        }
    }
    log::warn!("dropping zero candidate: Newton did not converge");
    Refined::Dropped
}

fn zeros_of(f: &LaurentPoly, n: usize, tol: f64) -> Result<Vec<TorusPoint>, AnalysisError> {
    let d = f.dim();
    let vals = grid_values(f, n);
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let point_of = |mut idx: usize| -> TorusPoint {
        let mut w = vec![0f64; d];
        for k in (0..d).rev() {
            w[k] = step * (idx % n) as f64;
            idx /= n;
        }
        TorusPoint(w)
    };
    for (idx, v) in vals.iter().enumerate() {
        if v.re < -tol {
            return Err(AnalysisError::NecessaryViolated {
                min_value: v.re,
                at: point_of(idx).0,
            });
        }
    }
    let mut zeros: Vec<TorusPoint> = Vec::new();
    for (idx, v) in vals.iter().enumerate() {
        if v.re >= 100.0 * tol {
            continue;
        }
        match refine_candidate(f, point_of(idx), tol) {
            Refined::Converged(z) => {
                if !zeros.iter().any(|u| u.circular_distance(&z) <= DEDUP_RADIUS) {
                    zeros.push(z);
                }
            }
            Refined::Dropped => {}
            Refined::Negative { value, at } => {
                return Err(AnalysisError::NecessaryViolated {
                    min_value: value,
                    at,
                });
            }
        }
    }
    zeros.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(zeros)
}

/// Grid candidates refined by Newton; every returned point has `f ≤ tol`
/// and `‖∇f‖ ≤ √tol`. Fails with [`AnalysisError::NecessaryViolated`] if a
/// grid point or iterate has `f < -tol`.
pub fn find_zeros_f(
    mask: &Mask,
    grid_points_per_axis: usize,
    tol: f64,
) -> Result<Vec<TorusPoint>, AnalysisError> {
    let f = subqmf_poly(mask);
    zeros_of(&f, grid_points_per_axis, tol)
}

/// Runs the full analysis: grid nonnegativity, zero finding, Hessians.
/// `SUFFICIENT_HOLDS` needs every Hessian positive definite; a grid
/// violation gives `NECESSARY_VIOLATED`; everything else (in particular a
/// singular Hessian from higher-order vanishing) is `INCONCLUSIVE`.
pub fn existence_verdict(mask: &Mask) -> ZeroReport {
    let n = default_grid_points(mask.dim());
    let grid = check_subqmf_grid(mask, n);
    if grid.min_value < -ZERO_TOL {
        return ZeroReport {
            zeros: Vec::new(),
            hessians: Vec::new(),
            min_eigenvalues: Vec::new(),
            verdict: Verdict::NecessaryViolated,
            grid_min: grid.min_value,
        };
    }
    let f = subqmf_poly(mask);
    let zeros = match zeros_of(&f, n, ZERO_TOL) {
        Ok(z) => z,
        Err(AnalysisError::NecessaryViolated { min_value, .. }) => {
            return ZeroReport {
                zeros: Vec::new(),
                hessians: Vec::new(),
                min_eigenvalues: Vec::new(),
                verdict: Verdict::NecessaryViolated,
                grid_min: min_value,
            };
        }
        Err(_) => unreachable!(),
    };
    let d = mask.dim();
    let mut hessians = Vec::new();
    let mut min_eigenvalues = Vec::new();
    for z in &zeros {
        let h = hessian_at(&f, z);
        let real: Vec<Vec<f64>> = h
            .iter()
            .map(|row| row.iter().map(|c| c.re).collect())
            .collect();
        let mut cm = CMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                cm[(i, j)] = Complex64::new(real[i][j], 0.0);
            }
        }
        let eigs = eigh(&cm).eigenvalues;
        min_eigenvalues.push(eigs.last().copied().unwrap_or(0.0));
        hessians.push(real);
    }
    let verdict = if !min_eigenvalues.is_empty() && min_eigenvalues.iter().all(|&l| l > PD_THRESHOLD)
    {
        Verdict::SufficientHolds
    } else {
        Verdict::Inconclusive
    };
    ZeroReport {
        zeros: zeros.into_iter().map(|z| z.0).collect(),
        hessians,
        min_eigenvalues,
        verdict,
        grid_min: grid.min_value,
    }
}
