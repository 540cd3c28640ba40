//! Steady states of the Liouvillian and truncation control.
//!
//! The primary solver replaces the row of `L` belonging to the
//! `(vacuum, vacuum)` diagonal element with the trace functional and solves
//! `A x = e₀` by sparse LU. If the factorization fails or the solution
//! does not meet the residual bound, a dense SVD null vector is used
//! instead; that path also diagnoses degenerate steady states.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, LuRef, NumericLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat, MatRef, Par, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::correlations::{self, CorrelationKind};
use crate::error::{Error, Result};
use crate::hilbert::{
    dense_hermiticity_defect, dense_trace, unvectorize, vectorize, CsOperator, Ladders, TruncatedSpace,
};
use crate::model::{liouvillian_from_ladders, EffectiveParams};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;
/// Per-dimension bound on `‖L vec(ρ)‖∞`.
pub const RESIDUAL_TOL_PER_DIM: f64 = 1e-10;
/// Second-smallest singular value below which the steady state is not unique.
pub const DEGENERACY_TOL: f64 = 1e-8;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-4;
pub const MAX_CONVERGENCE_DIM: usize = 4096;
/// Cap used by [`converge_truncation`]; sparse LU fill-in makes larger
/// spaces cost gigabytes.
pub const DEFAULT_CONVERGENCE_CAP: usize = 200;
/// Largest superoperator dimension for which the dense SVD fallback runs.
pub const MAX_DENSE_FALLBACK_DIM: usize = 4096;

/// Trace-one, Hermitian, positive semidefinite state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: TruncatedSpace,
    entries: Mat<C64>,
}

impl DensityMatrix {
    /// Validates and wraps `entries`. The Hermitian part is stored after
    /// the Hermiticity check passes; no positivity projection is applied.
    pub fn new(space: TruncatedSpace, entries: Mat<C64>) -> Result<Self> {
        let dim = space.dim();
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::Shape(format!(
                "{}x{} density matrix on a space of dimension {dim}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let herm = dense_hermiticity_defect(entries.as_ref());
        if !(herm < HERMITIAN_TOL) {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian: defect {herm:.3e}")));
        }
        let entries = Mat::from_fn(dim, dim, |r, c| 0.5 * (entries[(r, c)] + entries[(c, r)].conj()));
        let tr = dense_trace(entries.as_ref());
        if !((tr - C64::new(1.0, 0.0)).norm() < TRACE_TOL) {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
        }
        let eigs = entries
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Backend(format!("{e:?}")))?;
        let min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_eig >= -PSD_TOL) {
            return Err(Error::InvalidDensityMatrix(format!(
                "minimum eigenvalue {min_eig:.3e} below −{PSD_TOL:e}"
            )));
        }
        Ok(Self { space, entries })
    }

    /// Projector onto |n, m⟩.
    pub fn fock(space: TruncatedSpace, n: usize, m: usize) -> Result<Self> {
        space.validate()?;
        if n > space.n_photon_max || m > space.n_phonon_max {
            return Err(Error::Domain(format!("|{n},{m}⟩ outside truncation {space}")));
        }
        let dim = space.dim();
        let mut rho = Mat::<C64>::zeros(dim, dim);
        let i = space.index(n, m);
        rho[(i, i)] = C64::new(1.0, 0.0);
        Self::new(space, rho)
    }

    pub fn vacuum(space: TruncatedSpace) -> Result<Self> {
        Self::fock(space, 0, 0)
    }

    /// Photon vacuum times a thermal phonon state of mean `n_bar`,
    /// renormalized on the truncated space.
    pub fn thermal_phonon(space: TruncatedSpace, n_bar: f64) -> Result<Self> {
        space.validate()?;
        if !(n_bar >= 0.0) {
            return Err(Error::Domain(format!(
                "thermal occupation {n_bar} must be non-negative"
            )));
        }
        let ratio = n_bar / (1.0 + n_bar);
        let weights: Vec<f64> = (0..=space.n_phonon_max).map(|m| ratio.powi(m as i32)).collect();
        let norm: f64 = weights.iter().sum();
        let dim = space.dim();
        let mut rho = Mat::<C64>::zeros(dim, dim);
        for (m, w) in weights.iter().enumerate() {
            let i = space.index(0, m);
            rho[(i, i)] = C64::new(w / norm, 0.0);
        }
        Self::new(space, rho)
    }

    /// Pure product of truncated coherent states with amplitudes
    /// `alpha` (photon) and `beta` (phonon), renormalized.
    pub fn coherent(space: TruncatedSpace, alpha: C64, beta: C64) -> Result<Self> {
        space.validate()?;
        let amplitudes = |amp: C64, n_max: usize| -> Vec<C64> {
            let mut out = Vec::with_capacity(n_max + 1);
            let mut c = C64::new(1.0, 0.0);
            for k in 0..=n_max {
                if k > 0 {
                    c *= amp / (k as f64).sqrt();
                }
                out.push(c);
            }
            out
        };
        let pa = amplitudes(alpha, space.n_photon_max);
        let pb = amplitudes(beta, space.n_phonon_max);
        let mut psi = vec![C64::new(0.0, 0.0); space.dim()];
        for (n, ca) in pa.iter().enumerate() {
            for (m, cb) in pb.iter().enumerate() {
                psi[space.index(n, m)] = ca * cb;
            }
        }
        Self::from_pure(space, &psi)
    }

    /// `|ψ⟩⟨ψ|` after normalizing `psi`.
    pub fn from_pure(space: TruncatedSpace, psi: &[C64]) -> Result<Self> {
        let dim = space.dim();
        if psi.len() != dim {
            return Err(Error::Shape(format!(
                "state of length {} on dimension {dim}",
                psi.len()
            )));
        }
        let norm_sq: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sq > 0.0) {
            return Err(Error::Domain("zero state vector".into()));
        }
        let rho = Mat::from_fn(dim, dim, |r, c| psi[r] * psi[c].conj() / norm_sq);
        Self::new(space, rho)
    }

    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    pub fn entries(&self) -> MatRef<'_, C64> {
        self.entries.as_ref()
    }

    pub fn into_entries(self) -> Mat<C64> {
        self.entries
    }

    /// `Tr[op · ρ]`.
    pub fn expect(&self, op: &CsOperator) -> C64 {
        op.expect(self.entries.as_ref())
    }

    pub fn trace(&self) -> C64 {
        dense_trace(self.entries.as_ref())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eigs = self
            .entries
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Backend(format!("{e:?}")))?;
        Ok(eigs.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

/// `‖L vec(ρ)‖∞`.
pub fn residual_norm(l: &CsOperator, rho: &DensityMatrix) -> f64 {
    l.matvec(&vectorize(rho.entries()))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

pub(crate) fn residual_tolerance(space: TruncatedSpace) -> f64 {
    RESIDUAL_TOL_PER_DIM * space.dim() as f64
}

fn finish(l: &CsOperator, space: TruncatedSpace, x: &[C64]) -> Result<DensityMatrix> {
    let dim = space.dim();
    let tr: C64 = (0..dim).map(|k| x[k * dim + k]).sum();
    if !(tr.norm() > 0.0) || !x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Singular("steady-state solution is not finite".into()));
    }
    let scaled: Vec<C64> = x.iter().map(|v| v / tr).collect();
    let rho = DensityMatrix::new(space, unvectorize(&scaled, dim)?)?;
    let residual = residual_norm(l, &rho);
    let tolerance = residual_tolerance(space);
    if !(residual < tolerance) {
        return Err(Error::Residual { residual, tolerance });
    }
    Ok(rho)
}

/// Steady state via trace-row replacement and sparse LU, with dense
/// null-space fallback.
pub fn steady_state(l: &CsOperator) -> Result<DensityMatrix> {
    l.require_super()?;
    match steady_state_lu(l) {
        Ok(rho) => Ok(rho),
        Err(_) if l.dim() <= MAX_DENSE_FALLBACK_DIM => steady_state_nullspace(l),
        Err(e) => Err(e),
    }
}

/// The sparse LU path on its own, without fallback.
pub fn steady_state_lu(l: &CsOperator) -> Result<DensityMatrix> {
    let space = l.require_super()?;
    let dim = space.dim();
    let n = dim * dim;
    // row 0 of vec(ρ) is ρ[0, 0], the (vacuum, vacuum) population
    let trace_row = 0usize;
    let mut triplets: Vec<Triplet<usize, usize, C64>> = l
        .iter()
        .filter(|&(r, _, _)| r != trace_row)
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    triplets.extend((0..dim).map(|k| Triplet::new(trace_row, k * dim + k, C64::new(1.0, 0.0))));
    let a = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Backend(format!("{e:?}")))?;

    let symbolic =
        factorize_symbolic_lu(a.symbolic(), Default::default()).map_err(|e| Error::Backend(format!("{e:?}")))?;
    let par = Par::Seq;
    let mut numeric = NumericLu::<usize, C64>::new();
    let mut mem = MemBuffer::try_new(
        symbolic
            .factorize_numeric_lu_scratch::<C64>(par, Default::default())
            .or(symbolic.solve_in_place_scratch::<C64>(1, par)),
    )
    .map_err(|e| Error::Backend(format!("{e:?}")))?;
    symbolic
        .factorize_numeric_lu(
            &mut numeric,
            a.as_ref(),
            par,
            MemStack::new(&mut mem),
            Default::default(),
        )
        .map_err(|e| Error::Singular(format!("{e:?}")))?;

    let mut rhs = Mat::<C64>::zeros(n, 1);
    rhs[(trace_row, 0)] = C64::new(1.0, 0.0);
    LuRef::new_unchecked(&symbolic, &numeric).solve_in_place_with_conj(
        Conj::No,
        rhs.as_mut(),
        par,
        MemStack::new(&mut mem),
    );
    let x: Vec<C64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    finish(l, space, &x)
}

/// Steady state as the right singular vector of the smallest singular
/// value of the dense generator.
pub fn steady_state_nullspace(l: &CsOperator) -> Result<DensityMatrix> {
    let space = l.require_super()?;
    let dense = l.to_dense();
    let svd = dense.svd().map_err(|e| Error::Backend(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&i, &j| s[i].re.total_cmp(&s[j].re));
    let (smallest, next) = (s[order[0]].re, s[order[1]].re);
    if next < DEGENERACY_TOL {
        return Err(Error::DegenerateSteadyState { smallest, next });
    }
    let v = svd.V();
    let x: Vec<C64> = (0..v.nrows()).map(|i| v[(i, order[0])]).collect();
    finish(l, space, &x)
}

/// `(⟨a†a⟩, ⟨b†b⟩)`.
pub fn occupations(rho: &DensityMatrix) -> Result<(f64, f64)> {
    let l = Ladders::new(rho.space())?;
    Ok(occupations_with(rho, &l))
}

pub(crate) fn occupations_with(rho: &DensityMatrix, l: &Ladders) -> (f64, f64) {
    (rho.expect(&l.n_a).re, rho.expect(&l.n_b).re)
}

/// Outcome of growing the truncation until observables settle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// The smallest space whose observables matched the next larger one.
    pub final_space: TruncatedSpace,
    /// Relative change of each observable at the last growth step.
    pub observable_deltas: Vec<(String, f64)>,
    pub converged: bool,
    /// Every space that was solved, in order.
    pub spaces_tried: Vec<TruncatedSpace>,
}

/// Observables compared between successive truncations.
pub const CONVERGENCE_OBSERVABLES: [&str; 5] = ["n_a", "n_b", "g2_aa_0", "g2_bb_0", "g2_ab_0"];

/// Values below this magnitude count as exact zeros when comparing.
const ZERO_FLOOR: f64 = 1e-12;

fn observables(rho: &DensityMatrix, l: &Ladders) -> [f64; 5] {
    let (n_a, n_b) = occupations_with(rho, l);
    let g2 = |kind| correlations::g2_zero_with(rho, l, kind).unwrap_or(0.0);
    [
        n_a,
        n_b,
        g2(CorrelationKind::Aa),
        g2(CorrelationKind::Bb),
        g2(CorrelationKind::Ab),
    ]
}

fn relative_change(old: f64, new: f64) -> f64 {
    let scale = old.abs().max(new.abs());
    if scale < ZERO_FLOOR {
        0.0
    } else {
        (new - old).abs() / scale
    }
}

/// Each cutoff grows by 50 %, rounded up.
pub fn grow(space: TruncatedSpace) -> TruncatedSpace {
    let up = |n: usize| (3 * n).div_ceil(2);
    TruncatedSpace {
        n_photon_max: up(space.n_photon_max),
        n_phonon_max: up(space.n_phonon_max),
    }
}

fn solve_at(ep: &EffectiveParams, space: TruncatedSpace) -> Result<(DensityMatrix, [f64; 5])> {
    let l = Ladders::new(space)?;
    let gen = liouvillian_from_ladders(ep, &l)?;
    let rho = steady_state(&gen)?;
    let obs = observables(&rho, &l);
    Ok((rho, obs))
}

pub fn converge_truncation(
    ep: &EffectiveParams,
    start: TruncatedSpace,
    tol: f64,
) -> Result<(DensityMatrix, ConvergenceReport)> {
    converge_truncation_capped(ep, start, tol, DEFAULT_CONVERGENCE_CAP)
}

/// [`converge_truncation`] with an explicit dimension cap (at most
/// [`MAX_CONVERGENCE_DIM`]).
pub fn converge_truncation_capped(
    ep: &EffectiveParams,
    start: TruncatedSpace,
    tol: f64,
    max_dim: usize,
) -> Result<(DensityMatrix, ConvergenceReport)> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("convergence tolerance {tol} must be positive")));
    }
    start.validate()?;
    let max_dim = max_dim.min(MAX_CONVERGENCE_DIM);
    if start.dim() > max_dim {
        return Err(Error::InvalidTruncation(format!(
            "starting space {start} exceeds the dimension cap {max_dim}"
        )));
    }
    let mut space = start;
    let (mut rho, mut obs) = solve_at(ep, space)?;
    let mut report = ConvergenceReport {
        final_space: space,
        observable_deltas: Vec::new(),
        converged: false,
        spaces_tried: vec![space],
    };
    loop {
        let next = grow(space);
        if next.dim() > max_dim {
            return Err(Error::TruncationDivergence(Box::new(report)));
        }
        let (next_rho, next_obs) = solve_at(ep, next)?;
        report.spaces_tried.push(next);
        report.observable_deltas = CONVERGENCE_OBSERVABLES
            .iter()
            .zip(obs.iter().zip(next_obs.iter()))
            .map(|(name, (&o, &n))| (name.to_string(), relative_change(o, n)))
            .collect();
        if report.observable_deltas.iter().all(|(_, d)| *d < tol) {
            report.final_space = space;
            report.converged = true;
            return Ok((rho, report));
        }
        space = next;
        rho = next_rho;
        obs = next_obs;
        report.final_space = space;
    }
}
