//! Starting points for two-factor models from one-factor ω, ρ estimates.

use serde::{Deserialize, Serialize};

use super::{EstimatorError, Flag, Result};
use crate::charfn::{Factor, TwoFactorParams};

/// Variance term-structure parameters of a one-factor fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermStructure {
    pub v0: f64,
    pub theta: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoFactorStart {
    pub params: TwoFactorParams,
    /// ρ₁, ρ₂ pinned at ±0.99 for a restricted calibration.
    pub pinned_rho: bool,
    pub flags: Vec<Flag>,
}

pub const OMEGA_FLOOR: f64 = 0.001;
pub const PINNED_RHO: f64 = 0.99;

/// Equal-variance split for Bates two-factor: halves ν0 and θ, keeps κ, ω, ρ.
pub fn evp_split(omega: f64, rho: f64, ts: &TermStructure) -> TwoFactorStart {
    let f = Factor::new(ts.v0 / 2.0, ts.theta / 2.0, ts.kappa, omega, rho);
    TwoFactorStart { params: TwoFactorParams::bates(f, f), pinned_rho: false, flags: Vec::new() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MevpTarget {
    /// Inputs are Schöbel-Zhu ω, ρ and vol term structure.
    Ouou,
    /// Inputs are Heston ω, ρ and variance term structure.
    BatesFeller,
}

/// Modified equal-variance split: ω₁,₂ = ω(√(1−ρ²) ± ρ) with ρ₁,₂ = ±0.99.
pub fn mevp_split(omega: f64, rho: f64, ts: &TermStructure, target: MevpTarget) -> TwoFactorStart {
    let mut flags = Vec::new();
    let (omega, v0, theta) = match target {
        MevpTarget::Ouou => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            (omega * r, ts.v0 * r, ts.theta * r)
        }
        MevpTarget::BatesFeller => (omega, ts.v0 / 2.0, ts.theta / 2.0),
    };
    let m = (1.0 - rho * rho).max(0.0).sqrt();
    let mut w = [omega * (m + rho), omega * (m - rho)];
    for x in w.iter_mut() {
        if *x < OMEGA_FLOOR {
            *x = OMEGA_FLOOR;
            flags.push(Flag::OmegaFloored);
        }
    }
    if target == MevpTarget::BatesFeller {
        let cap = (1.99 * theta * ts.kappa).sqrt();
        for x in w.iter_mut() {
            if *x > cap {
                *x = cap;
                flags.push(Flag::OmegaTruncated);
            }
        }
    }
    let f1 = Factor::new(v0, theta, ts.kappa, w[0], PINNED_RHO);
    let f2 = Factor::new(v0, theta, ts.kappa, w[1], -PINNED_RHO);
    let params = match target {
        MevpTarget::Ouou => TwoFactorParams::ouou(f1, f2),
        MevpTarget::BatesFeller => TwoFactorParams::bates(f1, f2),
    };
    TwoFactorStart { params, pinned_rho: true, flags }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureStats {
    pub omega: f64,
    pub rho: f64,
    pub v_r: f64,
}

/// Effective one-factor ω, ρ of a two-factor mixture with factor
/// variances v1, v2.
pub fn two_factor_mixture_stats(v1: f64, v2: f64, w1: f64, w2: f64, r1: f64, r2: f64) -> Result<MixtureStats> {
    let v = v1 + v2;
    if !(v > 0.0) || v1 < 0.0 || v2 < 0.0 {
        return Err(EstimatorError::ZeroTotalVariance);
    }
    let s = v1 * w1 * w1 + v2 * w2 * w2;
    let rho = if s > 0.0 { (v1 * w1 * r1 + v2 * w2 * r2) / (s.sqrt() * v.sqrt()) } else { 0.0 };
    Ok(MixtureStats { omega: (s / v).sqrt(), rho, v_r: v1 / v })
}
