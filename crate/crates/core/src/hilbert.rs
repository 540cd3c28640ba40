//! Fock-space and operator algebra on the truncated photon ⊗ phonon space.
//!
//! Basis ordering is fixed for the whole crate: the state |n, m⟩ with `n`
//! photons and `m` phonons sits at index `n * (n_phonon_max + 1) + m`.
//! Superoperators act on column-stacked density matrices, so
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)` and the vectorized index of `ρ[r, c]`
//! is `c * dim + r`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries with magnitude at or below this are dropped from sparse storage.
pub const PRUNE_TOLERANCE: f64 = 1e-15;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Photon and phonon Fock cutoffs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncatedSpace {
    pub n_photon_max: usize,
    pub n_phonon_max: usize,
}

impl TruncatedSpace {
    pub const MIN_PHOTON: usize = 2;
    pub const MIN_PHONON: usize = 4;

    pub fn new(n_photon_max: usize, n_phonon_max: usize) -> Result<Self> {
        let space = Self {
            n_photon_max,
            n_phonon_max,
        };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_photon_max < Self::MIN_PHOTON {
            return Err(Error::InvalidTruncation(format!(
                "n_photon_max = {} (need at least {})",
                self.n_photon_max,
                Self::MIN_PHOTON
            )));
        }
        if self.n_phonon_max < Self::MIN_PHONON {
            return Err(Error::InvalidTruncation(format!(
                "n_phonon_max = {} (need at least {})",
                self.n_phonon_max,
                Self::MIN_PHONON
            )));
        }
        Ok(())
    }

    pub fn photon_dim(&self) -> usize {
        self.n_photon_max + 1
    }

    pub fn phonon_dim(&self) -> usize {
        self.n_phonon_max + 1
    }

    pub fn dim(&self) -> usize {
        self.photon_dim() * self.phonon_dim()
    }

    /// Index of |n, m⟩.
    pub fn index(&self, n: usize, m: usize) -> usize {
        debug_assert!(n <= self.n_photon_max && m <= self.n_phonon_max);
        n * self.phonon_dim() + m
    }

    /// Inverse of [`TruncatedSpace::index`].
    pub fn state(&self, index: usize) -> (usize, usize) {
        (index / self.phonon_dim(), index % self.phonon_dim())
    }

    pub fn mode_dim(&self, mode: Mode) -> usize {
        match mode {
            Mode::Photon => self.photon_dim(),
            Mode::Phonon => self.phonon_dim(),
        }
    }
}

impl Default for TruncatedSpace {
    fn default() -> Self {
        Self {
            n_photon_max: 3,
            n_phonon_max: 11,
        }
    }
}

impl fmt::Display for TruncatedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n_photon_max, self.n_phonon_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Photon,
    Phonon,
}

/// What an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorShape {
    /// A single bosonic mode truncated at `n_max`.
    SingleMode { n_max: usize },
    /// The two-mode space.
    Full(TruncatedSpace),
    /// Vectorized density matrices on the two-mode space.
    Super(TruncatedSpace),
}

impl OperatorShape {
    pub fn dim(&self) -> usize {
        match *self {
            OperatorShape::SingleMode { n_max } => n_max + 1,
            OperatorShape::Full(space) => space.dim(),
            OperatorShape::Super(space) => space.dim() * space.dim(),
        }
    }
}

/// Square complex sparse matrix in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct CsOperator {
    shape: OperatorShape,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsOperator {
    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// near-zero results pruned.
    pub fn from_triplets<I>(shape: OperatorShape, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let n = shape.dim();
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); n];
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            *rows[r].entry(c).or_insert(ZERO) += v;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v.norm() > PRUNE_TOLERANCE {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            shape,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn zeros(shape: OperatorShape) -> Self {
        Self::from_triplets(shape, std::iter::empty())
    }

    pub fn identity(shape: OperatorShape) -> Self {
        Self::from_triplets(shape, (0..shape.dim()).map(|i| (i, i, ONE)))
    }

    pub fn from_dense(shape: OperatorShape, m: MatRef<'_, C64>) -> Result<Self> {
        let n = shape.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Shape(format!(
                "dense {}x{} does not match operator dimension {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self::from_triplets(
            shape,
            (0..n).flat_map(|r| (0..n).map(move |c| (r, c, m[(r, c)]))),
        ))
    }

    pub fn shape(&self) -> OperatorShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_superoperator(&self) -> bool {
        matches!(self.shape, OperatorShape::Super(_))
    }

    /// The two-mode space this operator (or superoperator) lives on.
    pub fn space(&self) -> Option<TruncatedSpace> {
        match self.shape {
            OperatorShape::Full(s) | OperatorShape::Super(s) => Some(s),
            OperatorShape::SingleMode { .. } => None,
        }
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[span.clone()].binary_search(&col) {
            Ok(k) => self.values[span.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.shape, self.iter().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.shape, self.iter().map(|(r, c, v)| (c, r, v)))
    }

    pub fn conj(&self) -> Self {
        Self::from_triplets(self.shape, self.iter().map(|(r, c, v)| (r, c, v.conj())))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_triplets(self.shape, self.iter().map(|(r, c, v)| (r, c, v * factor)))
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!("{what}: {:?} vs {:?}", self.shape, other.shape)));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        Ok(Self::from_triplets(self.shape, self.iter().chain(other.iter())))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        Ok(Self::from_triplets(
            self.shape,
            self.iter().chain(other.iter().map(|(r, c, v)| (r, c, -v))),
        ))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "mul")?;
        let mut out = Vec::new();
        for (r, k, a) in self.iter() {
            for idx in other.row_ptr[k]..other.row_ptr[k + 1] {
                out.push((r, other.col_idx[idx], a * other.values[idx]));
            }
        }
        Ok(Self::from_triplets(self.shape, out))
    }

    /// `self · x` for a dense vector.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    /// `self · m` for a dense matrix.
    pub fn mul_dense(&self, m: MatRef<'_, C64>) -> Mat<C64> {
        assert_eq!(m.nrows(), self.dim());
        let mut out = Mat::<C64>::zeros(self.dim(), m.ncols());
        for (r, k, v) in self.iter() {
            for c in 0..m.ncols() {
                out[(r, c)] += v * m[(k, c)];
            }
        }
        out
    }

    /// `m · self` for a dense matrix.
    pub fn dense_mul(&self, m: MatRef<'_, C64>) -> Mat<C64> {
        assert_eq!(m.ncols(), self.dim());
        let mut out = Mat::<C64>::zeros(m.nrows(), self.dim());
        for (k, c, v) in self.iter() {
            for r in 0..m.nrows() {
                out[(r, c)] += m[(r, k)] * v;
            }
        }
        out
    }

    /// `Tr[self · rho]`.
    pub fn expect(&self, rho: MatRef<'_, C64>) -> C64 {
        self.iter().map(|(r, c, v)| v * rho[(c, r)]).sum()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.dim(), self.dim());
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        match self.try_sub(other) {
            Ok(d) => d.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        }
    }

    /// `max |M − M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() < tol
    }

    /// For a superoperator: the largest `|Tr[unvec(L e_j)]|` over basis
    /// vectors `e_j`. Zero for trace-preserving generators.
    pub fn trace_row_defect(&self) -> Result<f64> {
        let space = self.require_super()?;
        let d = space.dim();
        let mut cols = vec![ZERO; self.dim()];
        for k in 0..d {
            let row = k * d + k;
            for idx in self.row_ptr[row]..self.row_ptr[row + 1] {
                cols[self.col_idx[idx]] += self.values[idx];
            }
        }
        Ok(cols.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    pub(crate) fn require_super(&self) -> Result<TruncatedSpace> {
        match self.shape {
            OperatorShape::Super(s) => Ok(s),
            other => Err(Error::OperatorType(format!("expected a superoperator, got {other:?}"))),
        }
    }

    pub(crate) fn require_full(&self) -> Result<TruncatedSpace> {
        match self.shape {
            OperatorShape::Full(s) => Ok(s),
            other => Err(Error::OperatorType(format!(
                "expected an operator on the two-mode space, got {other:?}"
            ))),
        }
    }

    /// Raw compressed-row parts: (row pointers, column indices, values).
    pub fn csr_parts(&self) -> (&[usize], &[usize], &[C64]) {
        (&self.row_ptr, &self.col_idx, &self.values)
    }
}

impl Add for &CsOperator {
    type Output = CsOperator;
    fn add(self, rhs: &CsOperator) -> CsOperator {
        self.try_add(rhs).expect("operator shapes must match")
    }
}

impl Sub for &CsOperator {
    type Output = CsOperator;
    fn sub(self, rhs: &CsOperator) -> CsOperator {
        self.try_sub(rhs).expect("operator shapes must match")
    }
}

impl Mul for &CsOperator {
    type Output = CsOperator;
    fn mul(self, rhs: &CsOperator) -> CsOperator {
        self.try_mul(rhs).expect("operator shapes must match")
    }
}

impl Mul<&CsOperator> for C64 {
    type Output = CsOperator;
    fn mul(self, rhs: &CsOperator) -> CsOperator {
        rhs.scale(self)
    }
}

impl Mul<&CsOperator> for f64 {
    type Output = CsOperator;
    fn mul(self, rhs: &CsOperator) -> CsOperator {
        rhs.scale(C64::new(self, 0.0))
    }
}

/// Single-mode annihilation operator: `√k` at `(k − 1, k)`.
pub fn annihilation(n_max: usize) -> Result<CsOperator> {
    if n_max < 1 {
        return Err(Error::InvalidTruncation(format!(
            "single-mode cutoff {n_max} (need at least 1)"
        )));
    }
    Ok(CsOperator::from_triplets(
        OperatorShape::SingleMode { n_max },
        (1..=n_max).map(|k| (k - 1, k, C64::new((k as f64).sqrt(), 0.0))),
    ))
}

/// Kronecker product of two square sparse matrices, tagged with `shape`.
fn kron_into(shape: OperatorShape, a: &CsOperator, b: &CsOperator) -> CsOperator {
    let nb = b.dim();
    assert_eq!(a.dim() * nb, shape.dim());
    let mut out = Vec::with_capacity(a.nnz() * b.nnz());
    for (ra, ca, va) in a.iter() {
        for (rb, cb, vb) in b.iter() {
            out.push((ra * nb + rb, ca * nb + cb, va * vb));
        }
    }
    CsOperator::from_triplets(shape, out)
}

/// Lifts a single-mode operator to the two-mode space:
/// `op ⊗ I` for the photon, `I ⊗ op` for the phonon.
pub fn embed(op: &CsOperator, mode: Mode, space: TruncatedSpace) -> Result<CsOperator> {
    let OperatorShape::SingleMode { n_max } = op.shape() else {
        return Err(Error::OperatorType("embed expects a single-mode operator".into()));
    };
    if n_max + 1 != space.mode_dim(mode) {
        return Err(Error::Shape(format!(
            "single-mode dimension {} does not match {mode:?} dimension {}",
            n_max + 1,
            space.mode_dim(mode)
        )));
    }
    let shape = OperatorShape::Full(space);
    Ok(match mode {
        Mode::Photon => {
            let id = CsOperator::identity(OperatorShape::SingleMode {
                n_max: space.n_phonon_max,
            });
            kron_into(shape, op, &id)
        }
        Mode::Phonon => {
            let id = CsOperator::identity(OperatorShape::SingleMode {
                n_max: space.n_photon_max,
            });
            kron_into(shape, &id, op)
        }
    })
}

/// Ladder operators of both modes on one space.
#[derive(Clone, Debug)]
pub struct Ladders {
    pub space: TruncatedSpace,
    pub a: CsOperator,
    pub a_dag: CsOperator,
    pub b: CsOperator,
    pub b_dag: CsOperator,
    pub n_a: CsOperator,
    pub n_b: CsOperator,
}

impl Ladders {
    pub fn new(space: TruncatedSpace) -> Result<Self> {
        space.validate()?;
        let a = embed(&annihilation(space.n_photon_max)?, Mode::Photon, space)?;
        let b = embed(&annihilation(space.n_phonon_max)?, Mode::Phonon, space)?;
        let a_dag = a.adjoint();
        let b_dag = b.adjoint();
        let n_a = &a_dag * &a;
        let n_b = &b_dag * &b;
        Ok(Self {
            space,
            a,
            a_dag,
            b,
            b_dag,
            n_a,
            n_b,
        })
    }

    /// Mechanical quadrature `q = (b† + b)/√2`.
    pub fn position(&self) -> CsOperator {
        std::f64::consts::FRAC_1_SQRT_2 * &(&self.b_dag + &self.b)
    }

    /// Mechanical quadrature `p = i(b† − b)/√2`.
    pub fn momentum(&self) -> CsOperator {
        C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2) * &(&self.b_dag - &self.b)
    }
}

/// `X ρ` as a superoperator: `I ⊗ X`.
pub fn spre(x: &CsOperator) -> Result<CsOperator> {
    let space = x.require_full()?;
    let id = CsOperator::identity(x.shape());
    Ok(kron_into(OperatorShape::Super(space), &id, x))
}

/// `ρ X` as a superoperator: `Xᵀ ⊗ I`.
pub fn spost(x: &CsOperator) -> Result<CsOperator> {
    let space = x.require_full()?;
    let id = CsOperator::identity(x.shape());
    Ok(kron_into(OperatorShape::Super(space), &x.transpose(), &id))
}

/// `A ρ B` as a superoperator: `Bᵀ ⊗ A`.
pub fn sprepost(a: &CsOperator, b: &CsOperator) -> Result<CsOperator> {
    let space = a.require_full()?;
    if b.shape() != a.shape() {
        return Err(Error::Shape("sprepost operands differ in shape".into()));
    }
    Ok(kron_into(OperatorShape::Super(space), &b.transpose(), a))
}

/// `−i[H, ·]` as a superoperator: `−i(I ⊗ H − Hᵀ ⊗ I)`.
pub fn hamiltonian_superop(h: &CsOperator) -> Result<CsOperator> {
    let comm = spre(h)?.try_sub(&spost(h)?)?;
    Ok(comm.scale(C64::new(0.0, -1.0)))
}

/// Dissipator `D[c]ρ = c ρ c† − (c†c ρ + ρ c†c)/2` as a superoperator.
pub fn lindblad_superop(c: &CsOperator) -> Result<CsOperator> {
    if c.is_superoperator() {
        return Err(Error::OperatorType(
            "lindblad_superop expects an operator, got a superoperator".into(),
        ));
    }
    c.require_full()?;
    let c_dag = c.adjoint();
    let cdc = &c_dag * c;
    let jump = sprepost(c, &c_dag)?;
    let anti = spre(&cdc)?.try_add(&spost(&cdc)?)?;
    jump.try_sub(&anti.scale(C64::new(0.5, 0.0)))
}

/// Column-stacks a square matrix.
pub fn vectorize(m: MatRef<'_, C64>) -> Vec<C64> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            v.push(m[(r, c)]);
        }
    }
    v
}

/// Inverse of [`vectorize`] for a `dim × dim` matrix.
pub fn unvectorize(v: &[C64], dim: usize) -> Result<Mat<C64>> {
    if v.len() != dim * dim {
        return Err(Error::Shape(format!(
            "vector of length {} cannot be reshaped to {dim}x{dim}",
            v.len()
        )));
    }
    Ok(Mat::from_fn(dim, dim, |r, c| v[c * dim + r]))
}

/// Largest entry magnitude of a dense matrix.
pub fn max_abs(m: MatRef<'_, C64>) -> f64 {
    let mut best = 0.0f64;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            best = best.max(m[(r, c)].norm());
        }
    }
    best
}

/// `max |M − M†|` of a dense square matrix.
pub fn dense_hermiticity_defect(m: MatRef<'_, C64>) -> f64 {
    let mut best = 0.0f64;
    for c in 0..m.ncols() {
        for r in 0..=c.min(m.nrows() - 1) {
            best = best.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    best
}

pub fn dense_trace(m: MatRef<'_, C64>) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}
