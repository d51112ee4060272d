//! Closed-form parameter estimates, used mainly as calibration starting
//! points.

mod durrleman;
mod gauthier_rivaille;
mod historical;
mod icm;
mod two_factor;

pub use durrleman::{durrleman, durrleman_from_shape, smile_shape, DurrlemanEstimate, SmileShape};
pub use gauthier_rivaille::{gauthier_rivaille, gr_coefficients, GrCoefficients};
pub use historical::{
    ewma, guillaume_schoutens, historical_omega_rho, HistoricalEstimate, HistoricalModel, MovingAverage,
};
pub use icm::{icm_heston, icm_sz, icm_sz_with, sz_from_heston, IcmDenominator, IcmEstimate, SzIcmForm, TenorEstimate};
pub use two_factor::{
    evp_split, mevp_split, two_factor_mixture_stats, MevpTarget, MixtureStats, TermStructure, TwoFactorStart,
    OMEGA_FLOOR, PINNED_RHO,
};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimatorError {
    #[error("degenerate moments: {0}")]
    DegenerateMoments(String),
    #[error("negative radicand {0} in smile inversion")]
    NegativeRadicand(f64),
    #[error("singular smile regression")]
    SingularRegression,
    #[error("no admissible root")]
    NoValidRoot,
    #[error("strikes must differ")]
    EqualStrikes,
    #[error("series too short: {0}")]
    ShortSeries(usize),
    #[error("series lengths differ: {0} vs {1}")]
    Misaligned(usize, usize),
    #[error("total variance must be positive")]
    ZeroTotalVariance,
    #[error("surface needs at least {0} tenors")]
    TooFewTenors(usize),
}

pub type Result<T> = std::result::Result<T, EstimatorError>;

/// Conditions worth reporting alongside an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    RhoClamped,
    RhoUndefined,
    OmegaFloored,
    OmegaTruncated,
    ExpansionDenominator,
}

/// Lower median: for even counts the smaller of the two middle values.
pub fn lower_median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

pub(crate) const RHO_CAP: f64 = 0.99;

pub(crate) fn clamp_rho(rho: f64, flags: &mut Vec<Flag>) -> f64 {
    if rho.abs() > RHO_CAP {
        flags.push(Flag::RhoClamped);
        rho.clamp(-RHO_CAP, RHO_CAP)
    } else {
        rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_rules() {
        assert_eq!(lower_median(&[]), None);
        assert_eq!(lower_median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(lower_median(&[4.0, 1.0, 3.0, 2.0]), Some(2.0));
    }
}
