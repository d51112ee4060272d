//! Model-free implied quantities from option strips, and model-implied
//! variance and volatility term structures.

use serde::{Deserialize, Serialize};

use crate::market_data::TenorSlice;
use crate::pricer::{gk_price, OptionSpec, Side};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MomentsError {
    #[error("need at least 3 strikes spanning K0, got {0}")]
    InsufficientStrikes(usize),
    #[error("non-positive implied variance {0}")]
    NonPositiveVariance(f64),
    #[error("convexity adjustment {0} exceeds 1")]
    NegativeAdjusted(f64),
    #[error("expected variance {0} must be positive")]
    NonPositiveExpectation(f64),
}

pub type Result<T> = std::result::Result<T, MomentsError>;

/// Out-of-the-money strip: strikes ascending, Q(K) puts below K0, calls
/// above, the call/put average at K0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub strikes: Vec<f64>,
    pub prices: Vec<f64>,
    pub k0: f64,
    pub forward: f64,
    pub r_d: f64,
    pub r_f: f64,
    pub tau: f64,
}

impl Strip {
    /// Strip from GK prices at the given vols, with K0 taken as the strike
    /// at index `k0_index`.
    pub fn from_vols(spot: f64, strikes: &[f64], vols: &[f64], k0_index: usize, tau: f64, r_d: f64, r_f: f64) -> Strip {
        let k0 = strikes[k0_index];
        let prices = strikes
            .iter()
            .zip(vols)
            .map(|(&k, &v)| {
                let c = OptionSpec::call(spot, k, tau, r_d, r_f);
                match k.partial_cmp(&k0).unwrap() {
                    std::cmp::Ordering::Less => gk_price(&c.with_side(Side::Put), v),
                    std::cmp::Ordering::Greater => gk_price(&c, v),
                    std::cmp::Ordering::Equal => 0.5 * (gk_price(&c, v) + gk_price(&c.with_side(Side::Put), v)),
                }
            })
            .collect();
        Strip { strikes: strikes.to_vec(), prices, k0, forward: spot * ((r_d - r_f) * tau).exp(), r_d, r_f, tau }
    }

    /// The five-pillar strip of a surface slice, K0 = ATM strike.
    pub fn from_slice(spot: f64, s: &TenorSlice) -> Strip {
        let vols = s.smile().vols;
        Strip::from_vols(spot, &s.strikes(), &vols, 2, s.tau, s.r_d, s.r_f)
    }

    fn check(&self) -> Result<()> {
        let n = self.strikes.len();
        let spans =
            self.strikes.first().is_some_and(|&k| k <= self.k0) && self.strikes.last().is_some_and(|&k| k >= self.k0);
        if n < 3 || !spans {
            return Err(MomentsError::InsufficientStrikes(n));
        }
        Ok(())
    }
}

/// ΔK_i = ½(K_{i+1} − K_{i−1}); one-sided at the ends.
pub fn delta_k(strikes: &[f64]) -> Vec<f64> {
    let n = strikes.len();
    (0..n)
        .map(|i| match i {
            0 => strikes[1] - strikes[0],
            _ if i == n - 1 => strikes[n - 1] - strikes[n - 2],
            _ => 0.5 * (strikes[i + 1] - strikes[i - 1]),
        })
        .collect()
}

/// Expected powers of the log-return (not annualized).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPortfolio {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

pub fn power_portfolios(strip: &Strip) -> Result<PowerPortfolio> {
    strip.check()?;
    let dk = delta_k(&strip.strikes);
    let growth = (strip.r_d * strip.tau).exp();
    let (mut p2, mut p3, mut p4) = (0.0, 0.0, 0.0);
    for ((&k, &q), &d) in strip.strikes.iter().zip(&strip.prices).zip(&dk) {
        let l = (k / strip.forward).ln();
        let w = q * d / (k * k);
        p2 += 2.0 * (1.0 - l) * w;
        p3 += 3.0 * (2.0 * l - l * l) * w;
        p4 += 4.0 * (3.0 * l * l - l * l * l) * w;
    }
    let (p2, p3, p4) = (growth * p2, growth * p3, growth * p4);
    let p1 = ((strip.r_d - strip.r_f) * strip.tau).exp_m1() - p2 / 2.0 - p3 / 6.0 - p4 / 24.0;
    Ok(PowerPortfolio { p1, p2, p3, p4 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralMoments {
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
}

pub fn central_moments(p: &PowerPortfolio) -> Result<CentralMoments> {
    let PowerPortfolio { p1, p2, p3, p4 } = *p;
    let mu2 = p2 - p1 * p1;
    if !(mu2 > 0.0) {
        return Err(MomentsError::NonPositiveVariance(mu2));
    }
    Ok(CentralMoments {
        mu2,
        mu3: p3 - 3.0 * p1 * p2 + 2.0 * p1.powi(3),
        mu4: p4 - 4.0 * p1 * p3 + 6.0 * p1 * p1 * p2 - 3.0 * p1.powi(4),
    })
}

/// (skewness, kurtosis)
pub fn skew_kurt(mu2: f64, mu3: f64, mu4: f64) -> (f64, f64) {
    (mu3 / mu2.powf(1.5), mu4 / (mu2 * mu2))
}

/// Annualized VIX-style implied variance of the strip.
pub fn implied_variance_vix(strip: &Strip) -> Result<f64> {
    strip.check()?;
    let dk = delta_k(&strip.strikes);
    let growth = (strip.r_d * strip.tau).exp();
    let sum: f64 =
        strip.strikes.iter().zip(&strip.prices).zip(&dk).map(|((&k, &q), &d)| d / (k * k) * growth * q).sum();
    let adj = strip.forward / strip.k0 - 1.0;
    Ok((2.0 * sum - adj * adj) / strip.tau)
}

/// Ṽ² = V²(1 − ½ρωτ + ω²τ²/12).
pub fn corrected_variance(v2: f64, rho: f64, omega: f64, tau: f64) -> f64 {
    v2 * (1.0 - 0.5 * rho * omega * tau + omega * omega * tau * tau / 12.0)
}

/// Annualized expected integrated variance of a CIR factor.
pub fn heston_total_variance(v0: f64, theta: f64, kappa: f64, tau: f64) -> f64 {
    let x = kappa * tau;
    if x < 1e-8 {
        v0 + (theta - v0) * x / 2.0
    } else {
        theta + (v0 - theta) * (-(-x).exp_m1()) / x
    }
}

/// E[ν_t²] for an OU volatility factor.
pub fn sz_instantaneous_variance(v0: f64, theta: f64, kappa: f64, omega: f64, t: f64) -> f64 {
    let e1 = (kappa * t).exp_m1();
    let e2 = (-2.0 * kappa * t).exp();
    omega * omega / (2.0 * kappa) * (-(-2.0 * kappa * t).exp_m1())
        + e2 * v0 * v0
        + theta * e2 * e1 * (theta * e1 + 2.0 * v0)
}

/// Annualized expected integrated variance E[v̄/τ] of an OU volatility factor.
pub fn sz_total_variance(v0: f64, theta: f64, kappa: f64, omega: f64, tau: f64) -> f64 {
    let x = kappa * tau;
    if x < 1e-6 {
        // τ → 0: integrate the Taylor expansion of E[ν_t²] to second order.
        let d1 = omega * omega + 2.0 * kappa * v0 * (theta - v0);
        return v0 * v0 + d1 * tau / 2.0;
    }
    let w = omega * omega / (2.0 * kappa);
    let e1 = x.exp();
    let e2 = (-2.0 * x).exp();
    let inner = e2.recip() * (theta * theta * (2.0 * x - 3.0) + 2.0 * theta * v0 + w * (2.0 * x - 1.0) + v0 * v0)
        + 4.0 * theta * (theta - v0) * e1
        - (theta - v0) * (theta - v0)
        + w;
    e2 * inner / (2.0 * x)
}

/// Variance of v̄/τ for a CIR factor, used in the convexity adjustment.
pub fn heston_integrated_variance_var(v0: f64, theta: f64, kappa: f64, omega: f64, tau: f64) -> f64 {
    let x = kappa * tau;
    if x < 1e-3 {
        // The closed form cancels to O(x³)/κ³; first-order series instead.
        return omega * omega * tau / 2.0 * (2.0 * v0 / 3.0 + x * (theta / 6.0 - 2.0 * v0 / 3.0));
    }
    let e1 = (-x).exp();
    let e2 = (-2.0 * x).exp();
    omega * omega / (2.0 * tau * tau * kappa.powi(3))
        * (2.0 * (v0 - theta) * (1.0 - 2.0 * x * e1 - e2) + theta * (4.0 * e1 - 3.0 + 2.0 * x - e2))
}

/// E[√(v̄/τ)] ≈ √E (1 − σ²/(8E²)), with σ² from Heston parameters
/// (ν0, θ, κ) and the historical ω.
pub fn sz_expected_vol(expected_var: f64, v0: f64, theta: f64, kappa: f64, omega_h: f64, tau: f64) -> Result<f64> {
    if !(expected_var > 0.0) {
        return Err(MomentsError::NonPositiveExpectation(expected_var));
    }
    let s2 = heston_integrated_variance_var(v0, theta, kappa, omega_h, tau);
    let adj = s2 / (8.0 * expected_var * expected_var);
    if adj > 1.0 {
        return Err(MomentsError::NegativeAdjusted(adj));
    }
    Ok(expected_var.sqrt() * (1.0 - adj))
}

/// (E[Y²], E[XY]) from central moments of the log-return.
pub fn icm_moment_combinations(mu2: f64, mu3: f64, mu4: f64) -> (f64, f64) {
    let a = (1.0 + mu2).sqrt();
    let ap = |n: i32| a.powi(n);
    let inv6 = ap(-6);
    let ey2 = inv6
        * (4.0 * ap(8) - 8.0 * ap(7)
            + 4.0 * ap(6)
            + (4.0 * ap(6) - 8.0 * ap(5) + 4.0 * ap(3)) * mu2
            + (4.0 * ap(2) - 4.0 * ap(3)) * mu3
            + mu4);
    let exy = inv6
        * (2.0 * ap(8) - 4.0 * ap(7)
            + 2.0 * ap(6)
            + (2.0 * ap(3) - 2.0 * ap(5)) * mu2
            + (2.0 * ap(2) - ap(3)) * mu3
            + 0.5 * mu4);
    (ey2, exy)
}

/// Everything the ICM estimators need for one tenor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpliedMomentSet {
    pub tau: f64,
    pub power: PowerPortfolio,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub skew: f64,
    pub kurt: f64,
    pub a: f64,
    pub ey2: f64,
    pub exy: f64,
}

pub fn implied_moment_set(strip: &Strip) -> Result<ImpliedMomentSet> {
    let power = power_portfolios(strip)?;
    let m = central_moments(&power)?;
    let (skew, kurt) = skew_kurt(m.mu2, m.mu3, m.mu4);
    let (ey2, exy) = icm_moment_combinations(m.mu2, m.mu3, m.mu4);
    Ok(ImpliedMomentSet {
        tau: strip.tau,
        power,
        mu2: m.mu2,
        mu3: m.mu3,
        mu4: m.mu4,
        skew,
        kurt,
        a: (1.0 + m.mu2).sqrt(),
        ey2,
        exy,
    })
}
