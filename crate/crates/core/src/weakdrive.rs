//! Weak-drive wavefunction ansatz truncated at two photons and four
//! phonons, and the excitation-manifold spectrum of the undriven
//! Hamiltonian.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EffectiveParams;

/// Ratio each hierarchy tier must stay under relative to the tier above.
pub const HIERARCHY_RATIO: f64 = 0.5;
const PIVOT_TOL: f64 = 1e-14;

/// Amplitudes `C_nm` of `|n photons, m phonons⟩` with `c00 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzCoefficients {
    pub c00: C64,
    pub c01: C64,
    pub c02: C64,
    pub c10: C64,
    pub c03: C64,
    pub c11: C64,
    pub c04: C64,
    pub c12: C64,
    pub c20: C64,
}

impl AnsatzCoefficients {
    /// Amplitudes grouped by perturbative order.
    pub fn tiers(&self) -> [Vec<C64>; 5] {
        [
            vec![self.c00],
            vec![self.c01],
            vec![self.c02, self.c10],
            vec![self.c03, self.c11],
            vec![self.c04, self.c12, self.c20],
        ]
    }

    /// Every tier is at most `HIERARCHY_RATIO` times the largest amplitude
    /// of the tier above.
    pub fn hierarchy_holds(&self) -> bool {
        let maxes: Vec<f64> = self
            .tiers()
            .iter()
            .map(|t| t.iter().map(|c| c.norm()).fold(0.0, f64::max))
            .collect();
        maxes.windows(2).all(|w| w[1] <= HIERARCHY_RATIO * w[0])
    }

    fn unknowns(&self) -> [C64; 8] {
        [
            self.c01, self.c10, self.c02, self.c11, self.c03, self.c20, self.c12, self.c04,
        ]
    }
}

/// Coefficient system `A x = rhs` over
/// `x = (c01, c10, c02, c11, c03, c20, c12, c04)` with `c00 = 1`.
fn system(ep: &EffectiveParams) -> ([[C64; 8]; 8], [C64; 8]) {
    let i = C64::new(0.0, 1.0);
    let (gc, gm, eps) = (ep.gamma_c, ep.gamma_m, ep.epsilon);
    let (j, jc) = (ep.j, ep.j.conj());
    let (s2, s3, s6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    let r = |x: f64| C64::new(x, 0.0);
    let z = C64::new(0.0, 0.0);
    let mut a = [[z; 8]; 8];
    let mut rhs = [z; 8];

    a[0][0] = r(-gm / 2.0);
    rhs[0] = i * eps;

    a[1][1] = r(-gc / 2.0);
    a[1][2] = -i * s2 * j;

    a[2][2] = r(-gm);
    a[2][1] = -i * s2 * jc;
    a[2][0] = -i * s2 * eps;

    a[3][3] = r(-(gc + gm) / 2.0);
    a[3][4] = -i * s6 * j;
    a[3][1] = -i * eps;

    a[4][4] = r(-1.5 * gm);
    a[4][3] = -i * s6 * jc;
    a[4][2] = -i * s3 * eps;

    a[5][5] = r(-gc);
    a[5][6] = -i * 2.0 * j;

    a[6][6] = r(-(gc + 2.0 * gm) / 2.0);
    a[6][7] = -i * 2.0 * s3 * j;
    a[6][5] = -i * 2.0 * jc;
    a[6][3] = -i * s2 * eps;

    a[7][7] = r(-2.0 * gm);
    a[7][6] = -i * 2.0 * s3 * jc;
    a[7][4] = -i * 2.0 * eps;
    (a, rhs)
}

fn gauss_solve(mut a: [[C64; 8]; 8], mut b: [C64; 8]) -> Result<[C64; 8]> {
    let scale = a.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    for col in 0..8 {
        let p = (col..8)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .unwrap();
        if a[p][col].norm() <= PIVOT_TOL * scale {
            return Err(Error::Singular(format!(
                "coefficient system has no pivot in column {col}"
            )));
        }
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..8 {
            let f = a[row][col] / a[col][col];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for k in col..8 {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = [C64::new(0.0, 0.0); 8];
    for row in (0..8).rev() {
        let s: C64 = (row + 1..8).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

fn require_resonant(ep: &EffectiveParams) -> Result<()> {
    ep.validate()?;
    if ep.delta != 0.0 || ep.delta_m != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ansatz requires resonant driving, got delta = {}, delta_m = {}",
            ep.delta, ep.delta_m
        )));
    }
    if !(ep.epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ansatz requires epsilon > 0, got {}",
            ep.epsilon
        )));
    }
    Ok(())
}

/// Steady-state amplitudes of the truncated ansatz at resonance.
pub fn solve_coefficients(ep: &EffectiveParams) -> Result<AnsatzCoefficients> {
    require_resonant(ep)?;
    let (a, rhs) = system(ep);
    let x = gauss_solve(a, rhs)?;
    Ok(AnsatzCoefficients {
        c00: C64::new(1.0, 0.0),
        c01: x[0],
        c10: x[1],
        c02: x[2],
        c11: x[3],
        c03: x[4],
        c20: x[5],
        c12: x[6],
        c04: x[7],
    })
}

/// Left-hand sides of the eight steady-state equations evaluated at
/// `coeffs` (zero for an exact solution).
pub fn residuals(ep: &EffectiveParams, coeffs: &AnsatzCoefficients) -> [C64; 8] {
    let (a, rhs) = system(ep);
    let x = coeffs.unknowns();
    let mut out = [C64::new(0.0, 0.0); 8];
    for (k, row) in a.iter().enumerate() {
        let s: C64 = row.iter().zip(&x).map(|(p, q)| p * q).sum();
        out[k] = s - rhs[k] * coeffs.c00;
    }
    out
}

/// Pure-state occupations and correlations implied by the ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzStatistics {
    pub n_a: f64,
    pub n_b: f64,
    pub g2_aa_0: f64,
    pub g2_bb_0: f64,
    pub g2_ab_0: f64,
    pub hierarchy_ok: bool,
}

pub fn ansatz_g2(c: &AnsatzCoefficients) -> AnsatzStatistics {
    let p = |x: C64| x.norm_sqr();
    let (p01, p02, p03, p04) = (p(c.c01), p(c.c02), p(c.c03), p(c.c04));
    let (p10, p11, p12, p20) = (p(c.c10), p(c.c11), p(c.c12), p(c.c20));
    let n_a = p10 + p11 + p12 + 2.0 * p20;
    let n_b = p01 + 2.0 * p02 + 3.0 * p03 + p11 + 4.0 * p04 + 2.0 * p12;
    AnsatzStatistics {
        n_a,
        n_b,
        g2_aa_0: 2.0 * p20 / (n_a * n_a),
        g2_bb_0: (2.0 * p02 + 6.0 * p03 + 2.0 * p11 + 12.0 * p04 + 2.0 * p12) / (n_b * n_b),
        g2_ab_0: (p11 + 2.0 * p12) / (n_a * n_b),
        hierarchy_ok: c.hierarchy_holds(),
    }
}

/// Eigen-decomposition of the undriven resonant Hamiltonian on the
/// manifold `2 n_a + n_b = N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub manifold: usize,
    /// `(n_a, n_b)` labels of the basis, photon number ascending.
    pub basis: Vec<(usize, usize)>,
    /// In units of `J`, ascending.
    pub eigenvalues: Vec<f64>,
    /// One unit vector per eigenvalue, first non-negligible entry positive.
    pub eigenvectors: Vec<Vec<f64>>,
}

pub const MAX_MANIFOLD: usize = 4;

pub fn manifold_basis(n: usize) -> Vec<(usize, usize)> {
    (0..=n / 2).map(|na| (na, n - 2 * na)).collect()
}

pub fn manifold_spectrum(j: f64, n: usize) -> Result<SpectrumReport> {
    if n > MAX_MANIFOLD {
        return Err(Error::Domain(format!("manifold {n} outside 0..={MAX_MANIFOLD}")));
    }
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "J must be positive and finite, got {j}"
        )));
    }
    let basis = manifold_basis(n);
    let d = basis.len();
    // ⟨n_a+1, n_b−2| a†b² |n_a, n_b⟩ = √(n_a+1) √(n_b (n_b−1))
    let h = Mat::<f64>::from_fn(d, d, |r, c| {
        let (lo, hi) = if r < c { (r, c) } else { (c, r) };
        if hi != lo + 1 {
            return 0.0;
        }
        let (na, nb) = basis[lo];
        j * ((na + 1) as f64).sqrt() * ((nb * (nb - 1)) as f64).sqrt()
    });
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Backend(format!("{e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..d)
        .map(|k| {
            let mut v: Vec<f64> = (0..d).map(|i| u[(i, k)]).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let lead = v.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
            let sign = lead.signum() / norm;
            v.iter_mut().for_each(|x| *x *= sign);
            (s[k] / j, v)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(SpectrumReport {
        manifold: n,
        basis,
        eigenvalues,
        eigenvectors,
    })
}
