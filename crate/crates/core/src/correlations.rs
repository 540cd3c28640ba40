//! Equal-time photon/phonon statistics of a steady state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{CsOperator, Ladders, TruncatedSpace};
use crate::model::{liouvillian_from_ladders, EffectiveParams};
use crate::steady::{occupations_with, steady_state, DensityMatrix};

/// Occupations below this make a normalized correlation undefined.
pub const OCCUPATION_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    Aa,
    Bb,
    Ab,
}

impl fmt::Display for CorrelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationKind::Aa => "aa",
            CorrelationKind::Bb => "bb",
            CorrelationKind::Ab => "ab",
        })
    }
}

pub(crate) fn guard(kind: CorrelationKind, occupation: f64) -> Result<()> {
    if occupation < OCCUPATION_GUARD {
        Err(Error::UndefinedCorrelation { kind, occupation })
    } else {
        Ok(())
    }
}

/// Normally ordered `g²(0)`:
/// `Tr[a†a†aa ρ]/n_a²`, `Tr[b†b†bb ρ]/n_b²`, `Tr[a†a b†b ρ]/(n_a n_b)`.
pub fn g2_zero(rho: &DensityMatrix, kind: CorrelationKind) -> Result<f64> {
    let l = Ladders::new(rho.space())?;
    g2_zero_with(rho, &l, kind)
}

pub(crate) fn g2_zero_with(rho: &DensityMatrix, l: &Ladders, kind: CorrelationKind) -> Result<f64> {
    let (n_a, n_b) = occupations_with(rho, l);
    let pair = |op_dag: &CsOperator, op: &CsOperator| {
        let num = &(op_dag * op_dag) * &(op * op);
        rho.expect(&num).re
    };
    match kind {
        CorrelationKind::Aa => {
            guard(kind, n_a)?;
            Ok(pair(&l.a_dag, &l.a) / (n_a * n_a))
        }
        CorrelationKind::Bb => {
            guard(kind, n_b)?;
            Ok(pair(&l.b_dag, &l.b) / (n_b * n_b))
        }
        CorrelationKind::Ab => {
            guard(kind, n_a.min(n_b))?;
            Ok(rho.expect(&(&l.n_a * &l.n_b)).re / (n_a * n_b))
        }
    }
}

/// Occupations and equal-time correlations at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub params: EffectiveParams,
    pub n_a: f64,
    pub n_b: f64,
    pub g2_aa_0: f64,
    pub g2_bb_0: f64,
    pub g2_ab_0: f64,
    pub space: TruncatedSpace,
}

impl CorrelationRecord {
    /// Builds the record from an already solved steady state.
    pub fn from_state(params: &EffectiveParams, rho: &DensityMatrix) -> Result<Self> {
        let l = Ladders::new(rho.space())?;
        Self::from_state_with(params, rho, &l)
    }

    fn from_state_with(params: &EffectiveParams, rho: &DensityMatrix, l: &Ladders) -> Result<Self> {
        let (n_a, n_b) = occupations_with(rho, l);
        Ok(Self {
            params: params.clone(),
            n_a,
            n_b,
            g2_aa_0: g2_zero_with(rho, l, CorrelationKind::Aa)?,
            g2_bb_0: g2_zero_with(rho, l, CorrelationKind::Bb)?,
            g2_ab_0: g2_zero_with(rho, l, CorrelationKind::Ab)?,
            space: rho.space(),
        })
    }

    pub fn g2(&self, kind: CorrelationKind) -> f64 {
        match kind {
            CorrelationKind::Aa => self.g2_aa_0,
            CorrelationKind::Bb => self.g2_bb_0,
            CorrelationKind::Ab => self.g2_ab_0,
        }
    }
}

/// One steady-state solve feeding all five observables.
pub fn record(ep: &EffectiveParams, space: TruncatedSpace) -> Result<CorrelationRecord> {
    let l = Ladders::new(space)?;
    let gen = liouvillian_from_ladders(ep, &l)?;
    let rho = steady_state(&gen)?;
    CorrelationRecord::from_state_with(ep, &rho, &l)
}
