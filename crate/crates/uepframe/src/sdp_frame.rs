//! Semidefinite feasibility route to frame generators.
//!
//! Over an ordered support set `𝒩 ⊇ supp(p)` the seed matrix is
//! `R = diag(Re p) - p* p`. A frame with generator coefficients supported on
//! `𝒩` exists iff some hermitian `O` with vanishing coset/lag group sums
//! makes `S = R + O` positive semidefinite; any factorization
//! `S = Σ_j q_j* q_j` then yields the generators.
//!
//! The feasibility search alternates reflections between the affine set
//! `{R + O}` and the PSD cone (Douglas–Rachford splitting). Both projections
//! are closed-form: the affine one subtracts per-group means, the conic one
//! clips negative eigenvalues.

use crate::isotypical::{check_partition_of_unity, Mask};
use crate::laurent::{LaurentPoly, MultiIndex};
use crate::linalg::{eigh, CMatrix};
use crate::sos_frame::phase_canonicalized;
use crate::verify::{check_uep, FrameSystem};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("support set is missing exponent {0:?} of the mask")]
    MissingExponent(MultiIndex),
    #[error("mask does not satisfy the partition of unity")]
    PartitionOfUnity,
    #[error("no feasible Gram matrix found (status {status:?} after {iterations} iterations)")]
    Infeasible {
        status: SolveStatus,
        iterations: usize,
    },
    #[error("factorization produced no generators")]
    NoGenerators,
    #[error(
        "frame from a feasible Gram matrix failed verification (residual {0:.3e}); \
         rerun with a smaller rank tolerance"
    )]
    PostVerification(f64),
    #[error(transparent)]
    Frame(#[from] crate::verify::FrameError),
}

/// Ordered (lexicographic) set of exponents carrying the Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportSet {
    points: Vec<MultiIndex>,
}

impl SupportSet {
    pub fn new(mut points: Vec<MultiIndex>) -> Self {
        points.sort();
        points.dedup();
        SupportSet { points }
    }

    pub fn from_poly(p: &LaurentPoly) -> Self {
        Self::new(p.terms().map(|(e, _)| e.clone()).collect())
    }

    /// Every lattice point in the box `[lo, hi]` componentwise.
    pub fn from_box(lo: &[i64], hi: &[i64]) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(hi).all(|(a, b)| a <= b), "empty box");
        let d = lo.len();
        let mut points = Vec::new();
        let mut cur = lo.to_vec();
        'outer: loop {
            points.push(MultiIndex(cur.clone()));
            for k in (0..d).rev() {
                cur[k] += 1;
                if cur[k] <= hi[k] {
                    continue 'outer;
                }
                cur[k] = lo[k];
            }
            break;
        }
        SupportSet { points }
    }

    /// Full box over the current bounding box dilated by one in every
    /// coordinate.
    pub fn enlarged_by_one(&self) -> Self {
        let d = self.points[0].dim();
        let mut lo = self.points[0].0.clone();
        let mut hi = lo.clone();
        for p in &self.points {
            for k in 0..d {
                lo[k] = lo[k].min(p.0[k]);
                hi[k] = hi[k].max(p.0[k]);
            }
        }
        for k in 0..d {
            lo[k] -= 1;
            hi[k] += 1;
        }
        Self::from_box(&lo, &hi)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[MultiIndex] {
        &self.points
    }

    pub fn index_of(&self, e: &MultiIndex) -> Option<usize> {
        self.points.binary_search(e).ok()
    }
}

/// Entry pairs `(row, col)` of the Gram matrix sharing the coset class of
/// the row exponent and the lag `col - row`; the null-matrix constraint is
/// that each group of `O` sums to zero.
#[derive(Clone, Debug)]
pub struct ConstraintGroup {
    pub chi_index: usize,
    pub lag: MultiIndex,
    pub entries: Vec<(usize, usize)>,
}

/// The semidefinite feasibility instance.
#[derive(Clone, Debug)]
pub struct GramProblem {
    support: SupportSet,
    seed: CMatrix,
    groups: Vec<ConstraintGroup>,
}

impl GramProblem {
    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn seed(&self) -> &CMatrix {
        &self.seed
    }

    pub fn groups(&self) -> &[ConstraintGroup] {
        &self.groups
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub rank_tol: f64,
    pub stall_window: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 20_000,
            residual_tol: 1e-10,
            rank_tol: 1e-9,
            stall_window: 500,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible,
    Stalled,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub matrix: CMatrix,
    pub iterations: usize,
}

/// `R[i][j] = δ_ij·Re(p(α_i)) - conj(p(α_i))·p(α_j)` over the support,
/// with the constraint groups enumerated per `(class(α), lag)`.
pub fn build_gram_seed(mask: &Mask, support: &SupportSet) -> Result<GramProblem, SdpError> {
    for (e, _) in mask.poly().terms() {
        if support.index_of(e).is_none() {
            return Err(SdpError::MissingExponent(e.clone()));
        }
    }
    let n = support.len();
    let coeffs: Vec<Complex64> = support
        .points()
        .iter()
        .map(|e| mask.poly().coeff(e))
        .collect();
    let mut seed = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut v = -coeffs[i].conj() * coeffs[j];
            if i == j {
                v += coeffs[i].re;
            }
            seed[(i, j)] = v;
        }
    }
    let ctx = mask.ctx();
    let mut map: BTreeMap<(usize, MultiIndex), Vec<(usize, usize)>> = BTreeMap::new();
    for (i, a) in support.points().iter().enumerate() {
        let chi = ctx.coset_index(a);
        for (j, b) in support.points().iter().enumerate() {
            map.entry((chi, b.subtracted(a)))
                .or_default()
                .push((i, j));
        }
    }
    let groups = map
        .into_iter()
        .map(|((chi_index, lag), entries)| ConstraintGroup {
            chi_index,
            lag,
            entries,
        })
        .collect();
    Ok(GramProblem {
        support: support.clone(),
        seed,
        groups,
    })
}

/// Orthogonal projection onto the affine set `{R + O : all group sums of O
/// vanish}`: each group of `S - R` is shifted by its negated mean.
pub fn project_affine(s: &CMatrix, prob: &GramProblem) -> CMatrix {
    let mut x = s.sub(&prob.seed);
    for g in &prob.groups {
        let mut mean = Complex64::new(0.0, 0.0);
        for &(i, j) in &g.entries {
            mean += x[(i, j)];
        }
        mean /= g.entries.len() as f64;
        for &(i, j) in &g.entries {
            x[(i, j)] -= mean;
        }
    }
    prob.seed.add(&x)
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clipped.
pub fn project_psd(s: &CMatrix) -> CMatrix {
    eigh(s).reassemble(|l| l.max(0.0))
}

fn min_eigenvalue(s: &CMatrix) -> f64 {
    eigh(s).eigenvalues.last().copied().unwrap_or(0.0)
}

/// Douglas–Rachford alternating reflections between the PSD cone and the
/// affine constraint set, started from `R`. Returns the affine-exact
/// candidate; it is feasible when its smallest eigenvalue is above
/// `-residual_tol`. The `observer` sees `(iteration, governing iterate,
/// affine candidate)`.
pub fn solve_feasibility_observed(
    prob: &GramProblem,
    opts: &SolveOptions,
    mut observer: impl FnMut(usize, &CMatrix, &CMatrix),
) -> SolveResult {
    let mut z = prob.seed.clone();
    let mut x = project_affine(&z, prob);
    let mut best = f64::INFINITY;
    let mut best_iter = 0usize;
    for it in 1..=opts.max_iterations {
        let y = project_psd(&z);
        x = project_affine(&y.scaled(2.0).sub(&z), prob);
        z = z.add(&x.sub(&y));
        observer(it, &z, &x);
        let defect = (-min_eigenvalue(&x)).max(0.0);
        if defect <= opts.residual_tol {
            return SolveResult {
                status: SolveStatus::Feasible,
                matrix: x,
                iterations: it,
            };
        }
        if defect < best - opts.residual_tol / 100.0 {
            best = defect;
            best_iter = it;
        } else if it - best_iter >= opts.stall_window {
            return SolveResult {
                status: SolveStatus::Stalled,
                matrix: x,
                iterations: it,
            };
        }
    }
    SolveResult {
        status: SolveStatus::Stalled,
        matrix: x,
        iterations: opts.max_iterations,
    }
}

pub fn solve_feasibility(prob: &GramProblem, opts: &SolveOptions) -> SolveResult {
    solve_feasibility_observed(prob, opts, |_, _, _| {})
}

/// Rank-revealing factorization `S = Σ_j q_j* q_j`: eigenvalues above
/// `rank_tol·λ_max` are kept, row `j` is `sqrt(λ_j)` times the conjugated
/// eigenvector.
pub fn factor_psd(s: &CMatrix, rank_tol: f64) -> Vec<Vec<Complex64>> {
    let d = eigh(s);
    let lam_max = d.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    if lam_max == 0.0 {
        return Vec::new();
    }
    let mut rows = Vec::new();
    for (k, &lam) in d.eigenvalues.iter().enumerate() {
        if lam > rank_tol * lam_max {
            let root = lam.sqrt();
            rows.push(
                d.eigenvector(k)
                    .into_iter()
                    .map(|v| v.conj() * root)
                    .collect(),
            );
        }
    }
    rows
}

fn rows_to_polys(support: &SupportSet, rows: Vec<Vec<Complex64>>, dim: usize) -> Vec<LaurentPoly> {
    rows.into_iter()
        .map(|row| {
            LaurentPoly::from_terms(
                dim,
                support
                    .points()
                    .iter()
                    .cloned()
                    .zip(row),
            )
        })
        .filter(|q| !q.is_zero())
        .map(|q| phase_canonicalized(&q))
        .collect()
}

/// Tolerance for the mandatory UEP check on SDP-constructed frames.
pub const SDP_POST_VERIFY_TOL: f64 = 1e-8;

/// Full pipeline: seed, solve, factor, post-verify. A stalled solve (or an
/// empty factorization) triggers one retry with the support box dilated by
/// one before reporting failure.
pub fn construct_frame_sdp(
    mask: &Mask,
    support: &SupportSet,
    opts: &SolveOptions,
) -> Result<FrameSystem, SdpError> {
    if !check_partition_of_unity(mask, 1e-9) {
        return Err(SdpError::PartitionOfUnity);
    }
    match attempt(mask, support, opts) {
        Ok(frame) => Ok(frame),
        Err(e) if retryable(&e) => {
            log::info!("retrying with enlarged support after: {e}");
            attempt(mask, &support.enlarged_by_one(), opts)
        }
        Err(e) => Err(e),
    }
}

fn retryable(e: &SdpError) -> bool {
    matches!(e, SdpError::Infeasible { .. } | SdpError::NoGenerators)
}

fn attempt(mask: &Mask, support: &SupportSet, opts: &SolveOptions) -> Result<FrameSystem, SdpError> {
    let prob = build_gram_seed(mask, support)?;
    let solved = solve_feasibility(&prob, opts);
    if solved.status != SolveStatus::Feasible {
        return Err(SdpError::Infeasible {
            status: solved.status,
            iterations: solved.iterations,
        });
    }
    let rows = factor_psd(&solved.matrix, opts.rank_tol);
    let generators = rows_to_polys(&prob.support, rows, mask.dim());
    if generators.is_empty() {
        return Err(SdpError::NoGenerators);
    }
    let frame = FrameSystem::new(mask.clone(), generators)?;
    let report = check_uep(&frame, SDP_POST_VERIFY_TOL);
    if !report.passed {
        return Err(SdpError::PostVerification(
            report.max_residual_uep.unwrap_or(f64::INFINITY),
        ));
    }
    Ok(frame)
}

/// The worked 4x4 example data: seed entries and the known null matrix `O`
/// making `R + O` PSD of rank one.
#[cfg(test)]
pub(crate) mod daubechies_example {
    use super::*;

    pub fn r_matrix() -> CMatrix {
        let s3 = 3f64.sqrt();
        let rows: Vec<Vec<f64>> = vec![
            vec![4.0 + 6.0 * s3, -6.0 - 4.0 * s3, -2.0 * s3, 2.0],
            vec![-6.0 - 4.0 * s3, 12.0 + 2.0 * s3, -6.0, 2.0 * s3],
            vec![-2.0 * s3, -6.0, 12.0 - 2.0 * s3, -6.0 + 4.0 * s3],
            vec![2.0, 2.0 * s3, -6.0 + 4.0 * s3, 4.0 - 6.0 * s3],
        ];
        CMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| Complex64::new(x / 64.0, 0.0)).collect())
                .collect(),
        )
    }

    pub fn o_matrix() -> CMatrix {
        let s3 = 3f64.sqrt();
        let rows: Vec<Vec<f64>> = vec![
            vec![-8.0 * s3, 8.0 * s3, 0.0, 0.0],
            vec![8.0 * s3, -8.0 * s3, 0.0, 0.0],
            vec![0.0, 0.0, 8.0 * s3, -8.0 * s3],
            vec![0.0, 0.0, -8.0 * s3, 8.0 * s3],
        ];
        CMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| Complex64::new(x / 64.0, 0.0)).collect())
                .collect(),
        )
    }

    pub fn q1_coeffs() -> Vec<f64> {
        let s3 = 3f64.sqrt();
        vec![
            (1.0 - s3) / 8.0,
            (-3.0 + s3) / 8.0,
            (3.0 + s3) / 8.0,
            (-1.0 - s3) / 8.0,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::daubechies_example as ex;
    use super::*;
    use crate::catalog;
    use crate::verify::check_uep_polyphase;
    use rand::{Rng, SeedableRng};

    fn daubechies_problem() -> (Mask, GramProblem) {
        let mask = catalog::daubechies4().unwrap();
        let support = SupportSet::from_poly(mask.poly());
        let prob = build_gram_seed(&mask, &support).unwrap();
        (mask, prob)
    }

    #[test]
    fn gram_seed_matches_worked_example() {
        let (_, prob) = daubechies_problem();
        assert_eq!(prob.support().len(), 4);
        let err = prob.seed().sub(&ex::r_matrix()).max_abs();
        assert!(err < 1e-15, "seed deviates by {err}");
        assert!(prob.seed().hermitian_residual() < 1e-15);
    }

    #[test]
    fn gram_seed_trace_identity() {
        // trace(R) = 1 - Σ p(α)² for a real normalized mask
        let (mask, prob) = daubechies_problem();
        let trace: f64 = (0..4).map(|i| prob.seed()[(i, i)].re).sum();
        let sum_sq: f64 = mask.poly().terms().map(|(_, c)| c.norm_sqr()).sum();
        assert!((trace - (1.0 - sum_sq)).abs() < 1e-14);
    }

    #[test]
    fn groups_partition_pairs_and_match_example() {
        let (_, prob) = daubechies_problem();
        let total: usize = prob.groups().iter().map(|g| g.entries.len()).sum();
        assert_eq!(total, 16);
        // group (χ=even(0), τ=0) = {(0,0), (2,2)}
        let g = prob
            .groups()
            .iter()
            .find(|g| g.lag.0 == vec![0] && g.entries.contains(&(0, 0)))
            .unwrap();
        assert_eq!(g.entries, vec![(0, 0), (2, 2)]);
    }

    #[test]
    fn reference_null_matrix_satisfies_group_sums() {
        let (_, prob) = daubechies_problem();
        let o = ex::o_matrix();
        for g in prob.groups() {
            let mut sum = Complex64::new(0.0, 0.0);
            for &(i, j) in &g.entries {
                sum += o[(i, j)];
            }
            assert!(sum.norm() < 1e-14, "group {:?} sums to {sum}", g.lag);
        }
    }

    #[test]
    fn projections_fix_feasible_points() {
        let (_, prob) = daubechies_problem();
        let s = ex::r_matrix().add(&ex::o_matrix());
        assert!(project_affine(&s, &prob).sub(&s).max_abs() < 1e-12);
        assert!(project_affine(&prob.seed().clone(), &prob)
            .sub(prob.seed())
            .max_abs()
            < 1e-12);
        assert!(project_psd(&s).sub(&s).max_abs() < 1e-12);
    }

    #[test]
    fn affine_projection_resets_singleton_groups() {
        let (_, prob) = daubechies_problem();
        // (0,2) is a singleton group (lag 2 from an even exponent)
        let mut s = prob.seed().clone();
        s[(0, 2)] += Complex64::new(0.3, 0.0);
        let back = project_affine(&s, &prob);
        assert!((back[(0, 2)] - prob.seed()[(0, 2)]).norm() < 1e-14);
    }

    #[test]
    fn affine_projection_idempotent_selfadjoint_hermiticity() {
        let (_, prob) = daubechies_problem();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let mut x = CMatrix::zeros(4);
            let mut y = CMatrix::zeros(4);
            for i in 0..4 {
                for j in 0..4 {
                    x[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    y[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let x = x.hermitized();
            let y = y.hermitized();
            let px = project_affine(&x, &prob);
            assert!(project_affine(&px, &prob).sub(&px).max_abs() < 1e-12);
            assert!(px.hermitian_residual() < 1e-12);
            // self-adjointness of the linear part on the hermitian space
            let py = project_affine(&y, &prob);
            let zero = project_affine(&CMatrix::zeros(4), &prob);
            let lx = px.sub(&zero);
            let ly = py.sub(&zero);
            let lhs = lx.inner(&y);
            let rhs = x.inner(&ly);
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn psd_projection_examples() {
        let mut d = CMatrix::zeros(2);
        d[(0, 0)] = Complex64::new(1.0, 0.0);
        d[(1, 1)] = Complex64::new(-1.0, 0.0);
        let p = project_psd(&d);
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(p[(1, 1)].norm() < 1e-14);
        assert!(project_psd(&p).sub(&p).max_abs() < 1e-13);
        assert!(min_eigenvalue(&p) >= -1e-12);

        // distance realized by the clipped eigenvalue
        let r = ex::r_matrix();
        let pr = project_psd(&r);
        let eigs = eigh(&r).eigenvalues;
        let clipped: f64 = eigs.iter().filter(|&&l| l < 0.0).map(|l| l * l).sum();
        let dist = pr.sub(&r).frobenius_norm();
        assert!((dist - clipped.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reference_feasible_point_is_rank_one_and_factors_to_q1() {
        let s = ex::r_matrix().add(&ex::o_matrix());
        let eigs = eigh(&s).eigenvalues;
        assert!(eigs[0] > 0.4);
        assert!(eigs[1].abs() <= 1e-10 * eigs[0]);
        let rows = factor_psd(&s, 1e-9);
        assert_eq!(rows.len(), 1);
        let got = phase_canonicalized(&LaurentPoly::from_terms(
            1,
            rows[0]
                .iter()
                .enumerate()
                .map(|(k, &c)| (MultiIndex(vec![k as i64]), c)),
        ));
        let expect = phase_canonicalized(&LaurentPoly::from_terms(
            1,
            ex::q1_coeffs()
                .iter()
                .enumerate()
                .map(|(k, &c)| (MultiIndex(vec![k as i64]), Complex64::new(c, 0.0))),
        ));
        assert!((&got - &expect).max_coeff_norm() < 1e-10);
    }

    #[test]
    fn factor_edge_cases() {
        assert!(factor_psd(&CMatrix::zeros(3), 1e-9).is_empty());
        let mut m = CMatrix::zeros(1);
        m[(0, 0)] = Complex64::new(4.0, 0.0);
        let rows = factor_psd(&m, 1e-9);
        assert_eq!(rows.len(), 1);
        assert!((rows[0][0].norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn daubechies_solve_and_construct() {
        let (mask, prob) = daubechies_problem();
        let opts = SolveOptions::default();
        let solved = solve_feasibility(&prob, &opts);
        assert_eq!(solved.status, SolveStatus::Feasible);
        assert!(solved.iterations <= 20_000);

        let support = SupportSet::from_poly(mask.poly());
        let frame = construct_frame_sdp(&mask, &support, &opts).unwrap();
        assert!(frame.len() <= 4);
        assert!(check_uep(&frame, 1e-8).passed);
        assert!(check_uep_polyphase(&frame, 1e-8).passed);
    }

    #[test]
    fn box_spline_sdp_pipeline() {
        let mask = catalog::boxspline111().unwrap();
        let support = SupportSet::from_poly(mask.poly());
        let frame = construct_frame_sdp(&mask, &support, &SolveOptions::default()).unwrap();
        assert!(check_uep(&frame, 1e-8).passed);
        assert!(check_uep_polyphase(&frame, 1e-8).passed);
    }

    #[test]
    fn constant_one_mask_reports_failure() {
        let ctx = crate::lattice::DilationContext::build(
            crate::lattice::IntMatrix::new(vec![vec![2]]).unwrap(),
        )
        .unwrap();
        let mask = Mask::new(ctx, LaurentPoly::one(1)).unwrap();
        let support = SupportSet::from_poly(mask.poly());
        let err = construct_frame_sdp(&mask, &support, &SolveOptions::default()).unwrap_err();
        assert!(
            matches!(err, SdpError::PartitionOfUnity),
            "unexpected error {err:?}"
        );
    }

    #[test]
    fn missing_support_exponent_rejected() {
        let mask = catalog::daubechies4().unwrap();
        let support = SupportSet::from_box(&[0], &[2]);
        assert!(matches!(
            build_gram_seed(&mask, &support),
            Err(SdpError::MissingExponent(_))
        ));
    }

    #[test]
    fn support_set_operations() {
        let s = SupportSet::from_box(&[0, 0], &[1, 1]);
        assert_eq!(s.len(), 4);
        let e = s.enlarged_by_one();
        assert_eq!(e.len(), 16);
        assert_eq!(s.index_of(&MultiIndex(vec![1, 0])), Some(2));
        assert_eq!(s.index_of(&MultiIndex(vec![5, 0])), None);
    }
}
