//! Adaptive Dormand–Prince 5(4) integration of linear systems `y' = L y`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::CsOperator;

pub const DEFAULT_RTOL: f64 = 1e-9;
pub const DEFAULT_ATOL: f64 = 1e-12;
const MAX_STEPS: usize = 10_000_000;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (equal to the last row of `A`).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrator state that can be advanced through successive output times,
/// carrying its step size across calls.
pub struct Integrator<'a> {
    gen: &'a CsOperator,
    rtol: f64,
    atol: f64,
    h: Option<f64>,
    k: Vec<Vec<C64>>,
    stage: Vec<C64>,
}

impl<'a> Integrator<'a> {
    pub fn new(gen: &'a CsOperator, rtol: f64, atol: f64) -> Self {
        let n = gen.dim();
        Self {
            gen,
            rtol,
            atol,
            h: None,
            k: vec![vec![C64::new(0.0, 0.0); n]; 7],
            stage: vec![C64::new(0.0, 0.0); n],
        }
    }

    fn initial_step(&mut self, y: &[C64], span: f64) -> f64 {
        // Hairer–Wanner starting step estimate
        let scale: Vec<f64> = y.iter().map(|v| self.atol + self.rtol * v.norm()).collect();
        let rms = |v: &[C64]| -> f64 {
            (v.iter().zip(&scale).map(|(x, s)| (x.norm() / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
        };
        self.gen.matvec_into(y, &mut self.k[0]);
        let d0 = rms(y);
        let d1 = rms(&self.k[0]);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1: Vec<C64> = y.iter().zip(&self.k[0]).map(|(a, b)| a + b * h0).collect();
        self.gen.matvec_into(&y1, &mut self.stage);
        let diff: Vec<C64> = self.stage.iter().zip(&self.k[0]).map(|(a, b)| (a - b) / h0).collect();
        let d2 = rms(&diff);
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Advances `y` in place by `span ≥ 0`.
    pub fn advance(&mut self, y: &mut [C64], span: f64) -> Result<()> {
        if span == 0.0 {
            return Ok(());
        }
        let n = y.len();
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(y, span),
        };
        let mut t = 0.0;
        let mut y5 = vec![C64::new(0.0, 0.0); n];
        let mut steps = 0usize;
        while t < span {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Integration(format!("step budget exhausted at t = {t}")));
            }
            let last = t + h >= span;
            let step = if last { span - t } else { h };
            for s in 0..7 {
                if s == 0 {
                    self.stage.copy_from_slice(y);
                } else {
                    for i in 0..n {
                        let mut acc = y[i];
                        for (j, a) in A[s].iter().enumerate().take(s) {
                            if *a != 0.0 {
                                acc += self.k[j][i] * (a * step);
                            }
                        }
                        self.stage[i] = acc;
                    }
                }
                self.gen.matvec_into(&self.stage, &mut self.k[s]);
            }
            let mut err_sq = 0.0;
            for i in 0..n {
                let mut hi = y[i];
                let mut lo = y[i];
                for s in 0..7 {
                    hi += self.k[s][i] * (B5[s] * step);
                    lo += self.k[s][i] * (B4[s] * step);
                }
                y5[i] = hi;
                let sc = self.atol + self.rtol * y[i].norm().max(hi.norm());
                err_sq += ((hi - lo).norm() / sc).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration("non-finite error estimate".into()));
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { span } else { t + step };
                y.copy_from_slice(&y5);
                if !last || step >= h {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(1.0);
                if h < 1e-14 * span.max(1.0) {
                    return Err(Error::Integration(format!("step size underflow at t = {t}")));
                }
            }
        }
        self.h = Some(h);
        Ok(())
    }
}

/// `exp(L t) y0` by adaptive integration.
pub fn integrate(gen: &CsOperator, y0: &[C64], t: f64, rtol: f64, atol: f64) -> Result<Vec<C64>> {
    let mut y = y0.to_vec();
    Integrator::new(gen, rtol, atol).advance(&mut y, t)?;
    Ok(y)
}
