//! Parameters of the driven quadratic optomechanical system, the
//! linearization to the effective two-mode Hamiltonian, and the Lindblad
//! generator built from it.
//!
//! Units: ħ = 1 and every rate or frequency is a plain real. The CLI fixes
//! `gamma_c = 1`, so sweep axes read directly as multiples of the cavity
//! linewidth.
//!
//! The effective Hamiltonian is
//!
//! ```text
//! H = Δ a†a + Δ_m b†b + J a†b² + J* a b†² + ε (b† + b)
//! ```
//!
//! with `Δ = Δ_c − 2ω_d`, `Δ_m = ω_m + 2g|α|² − ω_d` and `J = gα`. The
//! steady mechanical means vanish at the linearization point (`Q_s = P_s
//! = 0` for `g > 0`), so only the optical mean field `α` enters. The
//! dropped `g a†a (b† + b)²` term and the counter-rotating terms are not
//! represented; their validity conditions are reported as warnings.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{hamiltonian_superop, lindblad_superop, CsOperator, Ladders, TruncatedSpace};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Ratio below which `x ≪ y` is considered satisfied.
const MUCH_LESS: f64 = 0.1;

/// Laboratory-frame parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega_c: f64,
    pub omega_l: f64,
    pub omega_m: f64,
    pub omega_d: f64,
    /// Quadratic optomechanical coupling, `> 0`.
    pub g: f64,
    /// Optical drive amplitude Ω.
    pub omega_drive: C64,
    /// Mechanical drive amplitude ε.
    pub epsilon: f64,
    pub gamma_c: f64,
    pub gamma_m: f64,
    pub n_th: f64,
}

impl PhysicalParams {
    /// `Δ_c = ω_c − ω_L`.
    pub fn delta_c(&self) -> f64 {
        self.omega_c - self.omega_l
    }

    /// Rejects invalid values and returns advisory warnings.
    pub fn validate(&self) -> Result<Vec<ValidityWarning>> {
        check_rate("gamma_c", self.gamma_c)?;
        check_rate("gamma_m", self.gamma_m)?;
        check_rate("g", self.g)?;
        check_n_th(self.n_th)?;
        let mut warnings = Vec::new();
        if self.epsilon.abs() >= MUCH_LESS * self.gamma_c {
            warnings.push(ValidityWarning::StrongMechanicalDrive {
                epsilon: self.epsilon,
                gamma_c: self.gamma_c,
            });
        }
        Ok(warnings)
    }
}

/// Rotating-frame parameters of the effective Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    /// Optical detuning Δ.
    pub delta: f64,
    /// Mechanical detuning Δ_m.
    pub delta_m: f64,
    /// Effective coupling J = gα.
    pub j: C64,
    pub epsilon: f64,
    pub gamma_c: f64,
    pub gamma_m: f64,
    pub n_th: f64,
    /// Optical mean field, present when derived from physical parameters.
    pub alpha: Option<C64>,
    /// Shifted mechanical frequency `ω_m + 2g|α|²`, when derived.
    pub omega_0: Option<f64>,
    #[serde(skip)]
    pub warnings: Vec<ValidityWarning>,
}

impl EffectiveParams {
    /// Direct entry with a real coupling, as used by all sweeps.
    pub fn new(delta: f64, delta_m: f64, j: f64, epsilon: f64, gamma_c: f64, gamma_m: f64, n_th: f64) -> Result<Self> {
        let ep = Self {
            delta,
            delta_m,
            j: C64::new(j, 0.0),
            epsilon,
            gamma_c,
            gamma_m,
            n_th,
            alpha: None,
            omega_0: None,
            warnings: Vec::new(),
        };
        ep.validate()?;
        Ok(ep)
    }

    /// Resonant operating point `Δ = Δ_m = 0` with `γ_c = 1`.
    pub fn resonant(j: f64, epsilon: f64, gamma_m: f64, n_th: f64) -> Result<Self> {
        Self::new(0.0, 0.0, j, epsilon, 1.0, gamma_m, n_th)
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("gamma_c", self.gamma_c)?;
        check_rate("gamma_m", self.gamma_m)?;
        check_n_th(self.n_th)?;
        for (name, v) in [
            ("delta", self.delta),
            ("delta_m", self.delta_m),
            ("epsilon", self.epsilon),
            ("J", self.j.re),
            ("J", self.j.im),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    /// Flags a linearization whose mean field does not dominate the
    /// fluctuations, given a computed photon number.
    pub fn fluctuation_warning(&self, n_a: f64) -> Option<ValidityWarning> {
        let alpha = self.alpha?;
        let alpha_sq = alpha.norm_sqr();
        (alpha_sq * MUCH_LESS <= n_a).then_some(ValidityWarning::WeakMeanField { alpha_sq, n_a })
    }
}

/// Advisory conditions of the linearized model. Never fatal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ValidityWarning {
    StrongMechanicalDrive { epsilon: f64, gamma_c: f64 },
    LargeOpticalDetuning { delta: f64, omega_m: f64 },
    LargeMechanicalDetuning { delta_m: f64, omega_m: f64 },
    WeakMeanField { alpha_sq: f64, n_a: f64 },
}

impl fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::StrongMechanicalDrive { epsilon, gamma_c } => {
                write!(
                    f,
                    "mechanical drive ε = {epsilon} is not much weaker than γ_c = {gamma_c}"
                )
            }
            Self::LargeOpticalDetuning { delta, omega_m } => {
                write!(f, "|Δ| = {} is not much smaller than ω_m = {omega_m}", delta.abs())
            }
            Self::LargeMechanicalDetuning { delta_m, omega_m } => {
                write!(f, "|Δ_m| = {} is not much smaller than ω_m = {omega_m}", delta_m.abs())
            }
            Self::WeakMeanField { alpha_sq, n_a } => {
                write!(f, "|α|² = {alpha_sq} does not dominate ⟨a†a⟩ = {n_a}")
            }
        }
    }
}

fn check_rate(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidRate { name, value })
    }
}

fn check_n_th(n_th: f64) -> Result<()> {
    if n_th >= 0.0 && n_th.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("n_th = {n_th} must be non-negative")))
    }
}

/// Steady optical mean field `α = −2iΩ / (γ_c + 2iΔ_c)`.
pub fn mean_field_alpha(omega_drive: C64, delta_c: f64, gamma_c: f64) -> Result<C64> {
    check_rate("gamma_c", gamma_c)?;
    Ok(C64::new(0.0, -2.0) * omega_drive / C64::new(gamma_c, 2.0 * delta_c))
}

pub fn derive_effective(p: &PhysicalParams) -> Result<EffectiveParams> {
    let mut warnings = p.validate()?;
    let alpha = mean_field_alpha(p.omega_drive, p.delta_c(), p.gamma_c)?;
    let shift = 2.0 * p.g * alpha.norm_sqr();
    let omega_0 = p.omega_m + shift;
    let delta = p.delta_c() - 2.0 * p.omega_d;
    let delta_m = omega_0 - p.omega_d;
    if delta.abs() >= MUCH_LESS * p.omega_m {
        warnings.push(ValidityWarning::LargeOpticalDetuning {
            delta,
            omega_m: p.omega_m,
        });
    }
    if delta_m.abs() >= MUCH_LESS * p.omega_m {
        warnings.push(ValidityWarning::LargeMechanicalDetuning {
            delta_m,
            omega_m: p.omega_m,
        });
    }
    Ok(EffectiveParams {
        delta,
        delta_m,
        j: alpha * p.g,
        epsilon: p.epsilon,
        gamma_c: p.gamma_c,
        gamma_m: p.gamma_m,
        n_th: p.n_th,
        alpha: Some(alpha),
        omega_0: Some(omega_0),
        warnings,
    })
}

pub fn build_h_eff(ep: &EffectiveParams, space: TruncatedSpace) -> Result<CsOperator> {
    ep.validate()?;
    let l = Ladders::new(space)?;
    Ok(h_eff_from_ladders(ep, &l))
}

pub(crate) fn h_eff_from_ladders(ep: &EffectiveParams, l: &Ladders) -> CsOperator {
    let b2 = &l.b * &l.b;
    let bd2 = &l.b_dag * &l.b_dag;
    let terms = [
        ep.delta * &l.n_a,
        ep.delta_m * &l.n_b,
        ep.j * &(&l.a_dag * &b2),
        ep.j.conj() * &(&l.a * &bd2),
        ep.epsilon * &(&l.b_dag + &l.b),
    ];
    let h = terms.iter().skip(1).fold(terms[0].clone(), |acc, t| &acc + t);
    let defect = h.hermiticity_defect();
    assert!(defect < 1e-12, "effective Hamiltonian not Hermitian: defect {defect:e}");
    h
}

/// `L = −i[H, ·] + γ_c D[a] + γ_m(n_th + 1) D[b] + γ_m n_th D[b†]`.
///
/// The optical bath is taken at zero temperature.
pub fn build_liouvillian(ep: &EffectiveParams, space: TruncatedSpace) -> Result<CsOperator> {
    ep.validate()?;
    let l = Ladders::new(space)?;
    liouvillian_from_ladders(ep, &l)
}

pub(crate) fn liouvillian_from_ladders(ep: &EffectiveParams, l: &Ladders) -> Result<CsOperator> {
    let h = h_eff_from_ladders(ep, l);
    let mut gen = hamiltonian_superop(&h)?;
    gen = &gen + &(ep.gamma_c * &lindblad_superop(&l.a)?);
    gen = &gen + &(ep.gamma_m * (ep.n_th + 1.0) * &lindblad_superop(&l.b)?);
    if ep.n_th > 0.0 {
        gen = &gen + &(ep.gamma_m * ep.n_th * &lindblad_superop(&l.b_dag)?);
    }
    Ok(gen)
}

/// Coupling at which the two-photon amplitude of the weak-drive ansatz
/// vanishes: `√[(2γ_m + γ_c)(γ_m + γ_c)/8]`.
pub fn j_opt(gamma_c: f64, gamma_m: f64) -> Result<f64> {
    check_rate("gamma_c", gamma_c)?;
    check_rate("gamma_m", gamma_m)?;
    Ok(((2.0 * gamma_m + gamma_c) * (gamma_m + gamma_c) / 8.0).sqrt())
}

/// Bose–Einstein occupation `1/(exp(ħω_m / k_B T) − 1)`; `omega_m` in rad/s,
/// `temperature` in kelvin.
pub fn n_th_from_temperature(omega_m: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!("temperature {temperature} must be positive")));
    }
    if !(omega_m > 0.0) {
        return Err(Error::Domain(format!("omega_m {omega_m} must be positive")));
    }
    let x = HBAR * omega_m / (K_B * temperature);
    Ok(1.0 / x.exp_m1())
}
