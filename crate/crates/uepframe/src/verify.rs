//! Frame verification: the UEP identity checkers in shift, polyphase, and
//! matrix form, the sub-QMF grid check, and sum-rules order computation.
//!
//! Identity checking is coefficientwise on Laurent polynomials, which is
//! complete for polynomial identities. Grids are used only for the
//! nonnegativity inequality, where no finite certificate is attempted.

use crate::isotypical::{split, split_poly, subqmf_poly, Mask};
use crate::laurent::{LaurentPoly, MultiIndex, TorusPoint};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default coefficientwise tolerance for the identity checkers.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Derivative-magnitude threshold used by [`sum_rules_order`].
pub const SUM_RULES_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("frame needs at least one generator")]
    Empty,
    #[error("generator {index} has dimension {found}, expected {expected}")]
    GeneratorDimension {
        index: usize,
        found: usize,
        expected: usize,
    },
}

/// A mask together with frame generator symbols `q_1..q_N`.
#[derive(Clone, Debug)]
pub struct FrameSystem {
    mask: Mask,
    generators: Vec<LaurentPoly>,
}

impl FrameSystem {
    pub fn new(mask: Mask, generators: Vec<LaurentPoly>) -> Result<Self, FrameError> {
        if generators.is_empty() {
            return Err(FrameError::Empty);
        }
        for (index, g) in generators.iter().enumerate() {
            if g.dim() != mask.dim() {
                return Err(FrameError::GeneratorDimension {
                    index,
                    found: g.dim(),
                    expected: mask.dim(),
                });
            }
        }
        Ok(FrameSystem { mask, generators })
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn generators(&self) -> &[LaurentPoly] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Residuals of the UEP identity checks. A `None` residual means the
/// corresponding identity was not run; `passed` covers the ones that were.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    #[serde(rename = "maxResidualUEP")]
    pub max_residual_uep: Option<f64>,
    pub max_residual_polyphase: Option<f64>,
    pub max_residual_matrix: Option<f64>,
    pub vanishing_moment_max: f64,
    pub passed: bool,
    pub tolerance: f64,
}

impl VerificationReport {
    fn assemble(
        uep: Option<f64>,
        poly: Option<f64>,
        matrix: Option<f64>,
        frame: &FrameSystem,
        tolerance: f64,
    ) -> Self {
        let origin = TorusPoint::origin(frame.mask().dim());
        let vanishing_moment_max = frame
            .generators()
            .iter()
            .map(|q| q.evaluate(&origin).norm())
            .fold(0.0, f64::max);
        let passed = [uep, poly, matrix]
            .iter()
            .flatten()
            .all(|&r| r <= tolerance);
        VerificationReport {
            max_residual_uep: uep,
            max_residual_polyphase: poly,
            max_residual_matrix: matrix,
            vanishing_moment_max,
            passed,
            tolerance,
        }
    }
}

fn uep_residual(frame: &FrameSystem) -> f64 {
    let mask = frame.mask();
    let ctx = mask.ctx();
    let d = mask.dim();
    let p = mask.poly();
    let mut worst = 0f64;
    // identities for τ ∈ G are redundant; σ ranges over G with τ = 0
    for s in 0..ctx.order() {
        let ps = ctx.shift_action(p, s);
        let delta = if ctx.group()[s].is_zero() {
            LaurentPoly::one(d)
        } else {
            LaurentPoly::zero(d)
        };
        let mut residual = &delta - &(&ps.involution() * p);
        for q in frame.generators() {
            let qs = ctx.shift_action(q, s);
            residual = &residual - &(&qs.involution() * q);
        }
        worst = worst.max(residual.max_coeff_norm());
    }
    worst
}

fn polyphase_residual(frame: &FrameSystem) -> f64 {
    let mask = frame.mask();
    let ctx = mask.ctx();
    let d = mask.dim();
    let m = ctx.order();
    let p_comps = split(mask).components;
    let q_comps: Vec<Vec<LaurentPoly>> = frame
        .generators()
        .iter()
        .map(|q| split_poly(ctx, q).components)
        .collect();
    let mut worst = 0f64;
    for chi in 0..m {
        for eta in chi..m {
            let mut acc = &p_comps[chi].involution() * &p_comps[eta];
            for qc in &q_comps {
                acc = &acc + &(&qc[chi].involution() * &qc[eta]);
            }
            let target = if chi == eta {
                LaurentPoly::constant(d, 1.0 / m as f64)
            } else {
                LaurentPoly::zero(d)
            };
            worst = worst.max((&acc - &target).max_coeff_norm());
        }
    }
    worst
}

fn matrix_residual(frame: &FrameSystem) -> f64 {
    let mask = frame.mask();
    let ctx = mask.ctx();
    let d = mask.dim();
    let m = ctx.order();
    // rows of U over σ: (p^σ, q_1^σ, …, q_N^σ); U*U entry (σ,τ) is
    // p^{σ*}p^τ + Σ_j q_j^{σ*} q_j^τ
    let mut shifted: Vec<Vec<LaurentPoly>> = Vec::with_capacity(m);
    for s in 0..m {
        let mut col = Vec::with_capacity(frame.len() + 1);
        col.push(ctx.shift_action(mask.poly(), s));
        for q in frame.generators() {
            col.push(ctx.shift_action(q, s));
        }
        shifted.push(col);
    }
    let mut worst = 0f64;
    for s in 0..m {
        for t in s..m {
            let mut acc = LaurentPoly::zero(d);
            for row in 0..=frame.len() {
                acc = &acc + &(&shifted[s][row].involution() * &shifted[t][row]);
            }
            let target = if s == t {
                LaurentPoly::one(d)
            } else {
                LaurentPoly::zero(d)
            };
            worst = worst.max((&acc - &target).max_coeff_norm());
        }
    }
    worst
}

/// Checks the τ=0 slice of the UEP identities `δ_{σ,0} - p^{σ*}p = Σ_j q_j^{σ*} q_j`.
pub fn check_uep(frame: &FrameSystem, tol: f64) -> VerificationReport {
    VerificationReport::assemble(Some(uep_residual(frame)), None, None, frame, tol)
}

/// Checks the polyphase identities `p_χ* p_η + Σ_j q_{j,χ}* q_{j,η} = δ_{χ,η}/m`.
pub fn check_uep_polyphase(frame: &FrameSystem, tol: f64) -> VerificationReport {
    VerificationReport::assemble(None, Some(polyphase_residual(frame)), None, frame, tol)
}

/// Checks the matrix form `U*U = I_m` entrywise over all `(σ,τ)`.
pub fn check_uep_matrix(frame: &FrameSystem, tol: f64) -> VerificationReport {
    VerificationReport::assemble(None, None, Some(matrix_residual(frame)), frame, tol)
}

/// Runs all three checkers and assembles the full report.
pub fn verify_frame(frame: &FrameSystem, tol: f64) -> VerificationReport {
    VerificationReport::assemble(
        Some(uep_residual(frame)),
        Some(polyphase_residual(frame)),
        Some(matrix_residual(frame)),
        frame,
        tol,
    )
}

/// Result of sampling `f` on a uniform grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubQmfGridResult {
    pub min_value: f64,
    pub argmin: Vec<f64>,
    pub grid_points_per_axis: usize,
}

/// Default grid resolution per axis: 64 for `d ≤ 2`, 32 for `d = 3`,
/// 16 beyond.
pub fn default_grid_points(dim: usize) -> usize {
    match dim {
        0..=2 => 64,
        3 => 32,
        _ => 16,
    }
}

/// Values of `p` on the uniform grid `ω ∈ (2π/n)·{0..n-1}^d`, row-major with
/// the last axis fastest. Exact DFT of the coefficient array folded mod `n`.
pub fn grid_values(p: &LaurentPoly, n: usize) -> Vec<Complex64> {
    let d = p.dim();
    let total = n.pow(d as u32);
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    for (e, c) in p.terms() {
        let mut idx = 0usize;
        for k in 0..d {
            idx = idx * n + (e.0[k].rem_euclid(n as i64) as usize);
        }
        buf[idx] += c;
    }
    // twiddles w[t] = e^{-2πi t/n}
    let w: Vec<Complex64> = (0..n)
        .map(|t| {
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * t as f64 / n as f64)
        })
        .collect();
    // per-axis DFT, last axis has stride 1
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for base in 0..total / block {
            for off in 0..stride {
                let start = base * block + off;
                for (j, s) in scratch.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += buf[start + k * stride] * w[(j * k) % n];
                    }
                    *s = acc;
                }
                for (j, s) in scratch.iter().enumerate() {
                    buf[start + j * stride] = *s;
                }
            }
        }
    }
    buf
}

/// Evaluates `f` (real part) on the uniform grid and returns the minimum and
/// its location. The imaginary part stays below `1e-10` for hermitian `f`.
pub fn check_subqmf_grid(mask: &Mask, grid_points_per_axis: usize) -> SubQmfGridResult {
    assert!(grid_points_per_axis >= 2);
    let f = subqmf_poly(mask);
    let vals = grid_values(&f, grid_points_per_axis);
    let d = mask.dim();
    let mut min_value = f64::INFINITY;
    let mut arg = 0usize;
    for (i, v) in vals.iter().enumerate() {
        debug_assert!(v.im.abs() < 1e-10);
        if v.re < min_value {
            min_value = v.re;
            arg = i;
        }
    }
    let mut argmin = vec![0f64; d];
    let mut rest = arg;
    for k in (0..d).rev() {
        argmin[k] =
            2.0 * std::f64::consts::PI * (rest % grid_points_per_axis) as f64
                / grid_points_per_axis as f64;
        rest /= grid_points_per_axis;
    }
    SubQmfGridResult {
        min_value,
        argmin,
        grid_points_per_axis,
    }
}

/// Largest `k ≤ max_order` such that `|D^μ p(e^{-iσ})| ≤ 1e-9` for all
/// `|μ| < k` and `σ ∈ G \ {0}`; `0` if even `k = 1` fails.
pub fn sum_rules_order(mask: &Mask, max_order: usize) -> usize {
    assert!(max_order >= 1);
    let ctx = mask.ctx();
    let p = mask.poly();
    let d = mask.dim();
    let mut best = 0;
    for k in 1..=max_order {
        for mu in multi_indices_of_order(d, k - 1) {
            for g in ctx.group() {
                if g.is_zero() {
                    continue;
                }
                if p.derivative_eval(&mu, &g.omega).norm() > SUM_RULES_TOL {
                    return best;
                }
            }
        }
        best = k;
    }
    best
}

/// All `μ ∈ N_0^d` with `|μ| = total`.
pub fn multi_indices_of_order(d: usize, total: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; d];
    fn rec(k: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<MultiIndex>) {
        if k + 1 == cur.len() {
            cur[k] = left;
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for v in 0..=left {
            cur[k] = v;
            rec(k + 1, left - v, cur, out);
        }
    }
    if d == 0 {
        return out;
    }
    rec(0, total as i64, &mut cur, &mut out);
    out
}
