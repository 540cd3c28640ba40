//! Time propagation under a Liouvillian and two-time correlations by the
//! quantum regression theorem.

pub mod expm;
pub mod rk45;

use std::collections::HashMap;

use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::correlations::{guard, CorrelationKind};
use crate::error::{Error, Result};
use crate::hilbert::{
    dense_hermiticity_defect, dense_trace, unvectorize, vectorize, CsOperator, Ladders, OperatorShape,
};
use crate::steady::{occupations_with, residual_norm, residual_tolerance, DensityMatrix};

pub use expm::expm;

/// Largest superoperator dimension for which `Auto` uses the dense
/// exponential.
pub const EXPM_AUTO_MAX_DIM: usize = 1024;
/// Tolerance on imaginary parts and negativity of correlation values.
pub const REALITY_TOL: f64 = 1e-8;
const SEED_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMethod {
    #[default]
    Auto,
    MatrixExponential,
    RungeKutta,
}

impl PropagationMethod {
    fn resolve(self, super_dim: usize) -> Self {
        match self {
            PropagationMethod::Auto if super_dim <= EXPM_AUTO_MAX_DIM => PropagationMethod::MatrixExponential,
            PropagationMethod::Auto => PropagationMethod::RungeKutta,
            m => m,
        }
    }
}

/// Repeated forward propagation of a vectorized operator.
pub struct Propagator<'a> {
    gen: &'a CsOperator,
    method: PropagationMethod,
    dense: Option<Mat<C64>>,
    cache: HashMap<u64, Mat<C64>>,
    rk: Option<rk45::Integrator<'a>>,
}

impl<'a> Propagator<'a> {
    pub fn new(gen: &'a CsOperator, method: PropagationMethod) -> Result<Self> {
        gen.require_super()?;
        let method = method.resolve(gen.dim());
        Ok(Self {
            gen,
            method,
            dense: None,
            cache: HashMap::new(),
            rk: None,
        })
    }

    pub fn method(&self) -> PropagationMethod {
        self.method
    }

    /// `y ← exp(L dt) y`.
    pub fn advance(&mut self, y: &mut [C64], dt: f64) -> Result<()> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::Domain(format!(
                "propagation time must be finite and non-negative, got {dt}"
            )));
        }
        if dt == 0.0 {
            return Ok(());
        }
        match self.method {
            PropagationMethod::MatrixExponential => {
                let gen = self.gen;
                let dense = self.dense.get_or_insert_with(|| gen.to_dense());
                let step = self.cache.entry(dt.to_bits()).or_insert_with(|| {
                    let scaled = Mat::from_fn(dense.nrows(), dense.ncols(), |i, j| dense[(i, j)] * dt);
                    expm(scaled.as_ref())
                });
                let out = dense_matvec(step.as_ref(), y);
                y.copy_from_slice(&out);
                Ok(())
            }
            _ => {
                let gen = self.gen;
                let rk = self
                    .rk
                    .get_or_insert_with(|| rk45::Integrator::new(gen, rk45::DEFAULT_RTOL, rk45::DEFAULT_ATOL));
                rk.advance(y, dt)
            }
        }
    }
}

fn dense_matvec(m: MatRef<'_, C64>, x: &[C64]) -> Vec<C64> {
    let mut y = vec![C64::new(0.0, 0.0); m.nrows()];
    for (j, xj) in x.iter().enumerate() {
        if *xj == C64::new(0.0, 0.0) {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += m[(i, j)] * xj;
        }
    }
    y
}

/// `unvec(exp(L t) vec(X))` for a dense operator `X`.
pub fn propagate_dense(l: &CsOperator, x: MatRef<'_, C64>, t: f64, method: PropagationMethod) -> Result<Mat<C64>> {
    let space = l.require_super()?;
    if x.nrows() != space.dim() || x.ncols() != space.dim() {
        return Err(Error::Shape(format!(
            "operator is {}x{}, generator acts on dimension {}",
            x.nrows(),
            x.ncols(),
            space.dim()
        )));
    }
    if t < 0.0 {
        return Err(Error::Domain(format!("negative propagation time {t}")));
    }
    let mut y = vectorize(x);
    Propagator::new(l, method)?.advance(&mut y, t)?;
    unvectorize(&y, space.dim())
}

/// `unvec(exp(L t) vec(X))` with the automatically selected method.
pub fn propagate(l: &CsOperator, x: &CsOperator, t: f64) -> Result<CsOperator> {
    propagate_with(l, x, t, PropagationMethod::Auto)
}

pub fn propagate_with(l: &CsOperator, x: &CsOperator, t: f64, method: PropagationMethod) -> Result<CsOperator> {
    let space = l.require_super()?;
    let xs = x.require_full()?;
    if xs != space {
        return Err(Error::Shape(format!("operator lives on {xs}, generator on {space}")));
    }
    let out = propagate_dense(l, x.to_dense().as_ref(), t, method)?;
    CsOperator::from_dense(OperatorShape::Full(space), out.as_ref())
}

/// Sampled two-time correlation function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub kind: CorrelationKind,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
}

/// `Tr[O X]` with `X` stored column-stacked.
fn trace_against(op: &CsOperator, x: &[C64], dim: usize) -> C64 {
    op.iter().map(|(r, c, v)| v * x[r * dim + c]).sum()
}

/// `Tr[O e^(L τ) S]` at each τ, with `S` the unit-trace regression seed.
fn regression_branch(
    prop: &mut Propagator<'_>,
    seed: &[C64],
    observable: &CsOperator,
    dim: usize,
    taus: &[f64],
) -> Result<Vec<C64>> {
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&i, &j| taus[i].total_cmp(&taus[j]));
    let mut out = vec![C64::new(0.0, 0.0); taus.len()];
    let mut state = seed.to_vec();
    let mut now = 0.0;
    for i in order {
        prop.advance(&mut state, taus[i] - now)?;
        now = taus[i];
        out[i] = trace_against(observable, &state, dim);
    }
    Ok(out)
}

fn seed(jump: &CsOperator, jump_dag: &CsOperator, rho: MatRef<'_, C64>) -> Result<Vec<C64>> {
    let s = jump_dag.dense_mul(jump.mul_dense(rho).as_ref());
    let defect = dense_hermiticity_defect(s.as_ref());
    if defect > SEED_HERMITIAN_TOL {
        return Err(Error::InvalidDensityMatrix(format!(
            "regression seed not Hermitian (defect {defect:.3e})"
        )));
    }
    let tr = dense_trace(s.as_ref()).re;
    let mut v = vectorize(s.as_ref());
    for x in &mut v {
        *x /= tr;
    }
    Ok(v)
}

/// `g²(τ)` by the quantum regression theorem.
pub fn g2_tau(
    l: &CsOperator,
    rho_ss: &DensityMatrix,
    kind: CorrelationKind,
    taus: &[f64],
) -> Result<CorrelationSeries> {
    g2_tau_with(l, rho_ss, kind, taus, PropagationMethod::Auto)
}

pub fn g2_tau_with(
    l: &CsOperator,
    rho_ss: &DensityMatrix,
    kind: CorrelationKind,
    taus: &[f64],
    method: PropagationMethod,
) -> Result<CorrelationSeries> {
    let space = l.require_super()?;
    if rho_ss.space() != space {
        return Err(Error::Shape(format!(
            "state lives on {}, generator on {space}",
            rho_ss.space()
        )));
    }
    if let Some(t) = taus.iter().find(|t| !t.is_finite()) {
        return Err(Error::Domain(format!("non-finite delay {t}")));
    }
    if kind != CorrelationKind::Ab {
        if let Some(t) = taus.iter().find(|t| **t < 0.0) {
            return Err(Error::Domain(format!(
                "{kind} correlation needs non-negative delays, got {t}"
            )));
        }
    }
    let dim = space.dim();
    let residual = residual_norm(l, rho_ss);
    let tolerance = residual_tolerance(space);
    if !(residual <= tolerance) {
        return Err(Error::Residual { residual, tolerance });
    }
    let lad = Ladders::new(space)?;
    let (n_a, n_b) = occupations_with(rho_ss, &lad);
    let rho = rho_ss.entries();
    let mut prop = Propagator::new(l, method)?;
    let raw: Vec<f64> = match kind {
        CorrelationKind::Aa => {
            guard(kind, n_a)?;
            let s = seed(&lad.a, &lad.a_dag, rho)?;
            finish(regression_branch(&mut prop, &s, &lad.n_a, dim, taus)?, 1.0 / n_a)?
        }
        CorrelationKind::Bb => {
            guard(kind, n_b)?;
            let s = seed(&lad.b, &lad.b_dag, rho)?;
            finish(regression_branch(&mut prop, &s, &lad.n_b, dim, taus)?, 1.0 / n_b)?
        }
        CorrelationKind::Ab => {
            guard(kind, n_a.min(n_b))?;
            let (pos, neg): (Vec<usize>, Vec<usize>) = (0..taus.len()).partition(|&i| taus[i] >= 0.0);
            let mut out = vec![0.0; taus.len()];
            if !pos.is_empty() {
                let s = seed(&lad.a, &lad.a_dag, rho)?;
                let t: Vec<f64> = pos.iter().map(|&i| taus[i]).collect();
                let v = finish(regression_branch(&mut prop, &s, &lad.n_b, dim, &t)?, 1.0 / n_b)?;
                for (k, &i) in pos.iter().enumerate() {
                    out[i] = v[k];
                }
            }
            if !neg.is_empty() {
                // roles swap: phonon detected first, photon τ later
                let mut prop = Propagator::new(l, method)?;
                let s = seed(&lad.b, &lad.b_dag, rho)?;
                let t: Vec<f64> = neg.iter().map(|&i| -taus[i]).collect();
                let v = finish(regression_branch(&mut prop, &s, &lad.n_a, dim, &t)?, 1.0 / n_a)?;
                for (k, &i) in neg.iter().enumerate() {
                    out[i] = v[k];
                }
            }
            out
        }
    };
    Ok(CorrelationSeries {
        kind,
        taus: taus.to_vec(),
        values: raw,
    })
}

fn finish(values: Vec<C64>, norm: f64) -> Result<Vec<f64>> {
    values
        .into_iter()
        .map(|v| {
            let v = v * norm;
            if v.im.abs() > REALITY_TOL {
                Err(Error::NonRealCorrelation { imag: v.im })
            } else if v.re < -REALITY_TOL {
                Err(Error::Integration(format!("negative correlation value {:.3e}", v.re)))
            } else {
                Ok(v.re)
            }
        })
        .collect()
}

/// Strongest spectral component of a uniformly sampled series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPeak {
    /// Cycles per unit time.
    pub frequency: f64,
    /// Width of one frequency bin.
    pub resolution: f64,
    pub bin: usize,
}

/// Locates the dominant oscillation frequency of `values` sampled at
/// spacing `dt`. The series is first differenced to suppress slow
/// relaxation, then Hann windowed.
pub fn dominant_frequency(values: &[f64], dt: f64) -> Result<SpectralPeak> {
    if values.len() < 8 {
        return Err(Error::Domain(format!("need at least 8 samples, got {}", values.len())));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("sample spacing must be positive, got {dt}")));
    }
    let diff: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let n = diff.len();
    let mean = diff.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<C64> = diff
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos();
            C64::new((v - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bin = (1..=n / 2)
        .max_by(|&i, &j| buf[i].norm_sqr().total_cmp(&buf[j].norm_sqr()))
        .unwrap_or(1);
    let resolution = 1.0 / (n as f64 * dt);
    Ok(SpectralPeak {
        frequency: bin as f64 * resolution,
        resolution,
        bin,
    })
}
