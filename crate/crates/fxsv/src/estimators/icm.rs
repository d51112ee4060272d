//! Implied-central-moment estimates of ω and ρ.

use serde::{Deserialize, Serialize};

use super::{clamp_rho, lower_median, EstimatorError, Flag, Result};
use crate::moments::ImpliedMomentSet;

/// Denominators relating E[Y²], E[XY] to ω², ρω.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IcmDenominator {
    /// κ → 0 limits: I₁ = ½μ2τ, I₂ = ⅓μ2τ².
    #[default]
    Limit,
    /// Full integrals over the expected CIR path.
    Exact { v0: f64, theta: f64, kappa: f64 },
}

impl IcmDenominator {
    /// (I₁, I₂) for one tenor.
    pub fn integrals(&self, mu2: f64, tau: f64) -> (f64, f64) {
        match *self {
            IcmDenominator::Limit => (0.5 * mu2 * tau, mu2 * tau * tau / 3.0),
            IcmDenominator::Exact { v0, theta, kappa } => {
                let (k, x) = (kappa, kappa * tau);
                let e1 = (-x).exp();
                let i1 = (e1 * (2.0 * theta - v0 - x * (v0 - theta)) + (v0 + theta * (x - 2.0))) / (k * k);
                let i2 = ((theta * (2.0 * x - 5.0) + 2.0 * v0)
                    + 4.0 * e1 * (theta * (x + 1.0) - x * v0)
                    + (theta - 2.0 * v0) * e1 * e1)
                    / (2.0 * k.powi(3));
                (i1, i2)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TenorEstimate {
    pub tau: f64,
    pub omega2: f64,
    pub rho_omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcmEstimate {
    pub omega: f64,
    pub rho: f64,
    pub per_tenor: Vec<TenorEstimate>,
    pub flags: Vec<Flag>,
}

fn aggregate(per_tenor: Vec<TenorEstimate>) -> Result<IcmEstimate> {
    let w2 = lower_median(&per_tenor.iter().map(|t| t.omega2).collect::<Vec<_>>())
        .ok_or_else(|| EstimatorError::DegenerateMoments("no tenors".into()))?;
    let rw = lower_median(&per_tenor.iter().map(|t| t.rho_omega).collect::<Vec<_>>()).unwrap();
    if !(w2 > 0.0) || !rw.is_finite() {
        return Err(EstimatorError::DegenerateMoments(format!("median ω² = {w2}")));
    }
    let omega = w2.sqrt();
    let mut flags = Vec::new();
    let rho = clamp_rho(rw / omega, &mut flags);
    Ok(IcmEstimate { omega, rho, per_tenor, flags })
}

/// Heston ω, ρ: ω_τ² = E[Y²]/I₂ and ρ_τω_τ = E[XY]/I₁ per tenor,
/// median-aggregated.
pub fn icm_heston(sets: &[ImpliedMomentSet], denom: IcmDenominator) -> Result<IcmEstimate> {
    let per_tenor = sets
        .iter()
        .map(|m| {
            let (i1, i2) = denom.integrals(m.mu2, m.tau);
            TenorEstimate { tau: m.tau, omega2: m.ey2 / i2, rho_omega: m.exy / i1 }
        })
        .collect();
    aggregate(per_tenor)
}

/// How the Schöbel-Zhu covariances E[Y²], E[XY] relate to ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SzIcmForm {
    /// E[Y²] = 4ω²(ω²τ²/2 + ν0²τ), E[XY] = 2ρω(ω²τ²/2 + ν0²τ).
    #[default]
    Printed,
    /// κ → 0 limit keeping the (T − s) kernels:
    /// E[Y²] = 4ω²(ν0²τ³/3 + ω²τ⁴/12), E[XY] = 2ρω(ν0²τ²/2 + ω²τ³/6).
    Kernel,
}

/// Schöbel-Zhu ω, ρ given the initial volatility ν0.
pub fn icm_sz(sets: &[ImpliedMomentSet], nu0: f64) -> Result<IcmEstimate> {
    icm_sz_with(sets, nu0, SzIcmForm::Printed)
}

pub fn icm_sz_with(sets: &[ImpliedMomentSet], nu0: f64, form: SzIcmForm) -> Result<IcmEstimate> {
    if !(nu0 > 0.0) {
        return Err(EstimatorError::DegenerateMoments(format!("ν0 = {nu0}")));
    }
    let n2 = nu0 * nu0;
    let per_tenor = sets
        .iter()
        .map(|m| {
            let t = m.tau;
            let (omega2, den) = match form {
                SzIcmForm::Printed => {
                    let w2 = (-n2 + (n2 * n2 + 0.5 * m.ey2).sqrt()) / t;
                    (w2, w2 * t * t + 2.0 * n2 * t)
                }
                SzIcmForm::Kernel => {
                    let w2 = -2.0 * n2 / t + (4.0 * n2 * n2 * t * t + 3.0 * m.ey2).sqrt() / (t * t);
                    (w2, n2 * t * t + w2 * t.powi(3) / 3.0)
                }
            };
            TenorEstimate { tau: t, omega2, rho_omega: m.exy / den }
        })
        .collect();
    aggregate(per_tenor)
}

/// ω_SZ ≈ ½ω_H, ρ_SZ ≈ ρ_H.
pub fn sz_from_heston(omega_h: f64, rho_h: f64) -> (f64, f64) {
    (0.5 * omega_h, rho_h)
}
