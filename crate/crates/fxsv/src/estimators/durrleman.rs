//! Smile slope/curvature inversion for Heston ω, ρ.

use serde::{Deserialize, Serialize};

use super::{EstimatorError, Flag, Result};
use crate::market_data::VolSurface;

/// Slope 𝕊, curvature ℂ and ATM term premium 𝕄 (vol per year).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmileShape {
    pub slope: f64,
    pub curvature: f64,
    pub term_premium: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurrlemanEstimate {
    pub shape: SmileShape,
    pub omega: f64,
    pub rho: f64,
    /// Diagnostic only; never used downstream.
    pub kappa: Option<f64>,
    pub flags: Vec<Flag>,
}

/// Least squares of y = 𝕊x + ½ℂx² through the origin, with x = K/S − 1 and
/// y = σ(K) − σ_ATM over all five pillars of the shortest tenor.
pub fn smile_shape(surface: &VolSurface) -> Result<SmileShape> {
    let [s1, s2, ..] = surface.tenors.as_slice() else {
        return Err(EstimatorError::TooFewTenors(2));
    };
    let atm = s1.atm().vol;
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for n in &s1.nodes {
        let x = n.strike / surface.spot - 1.0;
        let y = n.vol - atm;
        let z = 0.5 * x * x;
        a11 += x * x;
        a12 += x * z;
        a22 += z * z;
        b1 += x * y;
        b2 += z * y;
    }
    let det = a11 * a22 - a12 * a12;
    if !(det.abs() > 1e-14 * a11 * a22) {
        return Err(EstimatorError::SingularRegression);
    }
    Ok(SmileShape {
        slope: (a22 * b1 - a12 * b2) / det,
        curvature: (a11 * b2 - a12 * b1) / det,
        term_premium: (s2.atm().vol - atm) / (s2.tau - s1.tau),
    })
}

/// Inverts the short-maturity slope/curvature relations. `theta`, when
/// given, enables the κ diagnostic.
pub fn durrleman_from_shape(shape: SmileShape, nu0: f64, theta: Option<f64>) -> Result<DurrlemanEstimate> {
    let (s, c, m) = (shape.slope, shape.curvature, shape.term_premium);
    let sv = nu0.sqrt();
    let radicand = 3.0 * sv * c + 3.0 * sv * s + 10.0 * s * s;
    if radicand < 0.0 {
        return Err(EstimatorError::NegativeRadicand(radicand));
    }
    let mut flags = Vec::new();
    let omega = 2.0 * sv * radicand.sqrt();
    let rho = if radicand == 0.0 {
        flags.push(Flag::RhoUndefined);
        0.0
    } else {
        super::clamp_rho(2.0 * s / radicand.sqrt(), &mut flags)
    };
    let kappa = theta.filter(|&t| t != nu0).map(|t| {
        (8.0 * m * sv + omega * omega / (6.0 * nu0) * (2.0 - rho * rho / 2.0) + omega * rho * nu0) / (2.0 * (t - nu0))
    });
    Ok(DurrlemanEstimate { shape, omega, rho, kappa, flags })
}

pub fn durrleman(surface: &VolSurface, nu0: f64, theta: Option<f64>) -> Result<DurrlemanEstimate> {
    durrleman_from_shape(smile_shape(surface)?, nu0, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{flat_surface, MarketContext};

    #[test]
    fn flat_smile() {
        let s = flat_surface(&MarketContext::default(), 0.1);
        let e = durrleman(&s, 0.01, Some(0.02)).unwrap();
        assert_eq!((e.shape.slope, e.shape.curvature, e.shape.term_premium), (0.0, 0.0, 0.0));
        assert_eq!((e.omega, e.rho), (0.0, 0.0));
        assert_eq!(e.flags, vec![Flag::RhoUndefined]);
    }

    #[test]
    fn linear_skew() {
        let shape = SmileShape { slope: -0.2, curvature: 0.0, term_premium: 0.0 };
        let e = durrleman_from_shape(shape, 0.01, None).unwrap();
        assert!(e.rho < 0.0 && e.omega > 0.0);
        // Forward relation 𝕊 = ωρ/(4√ν).
        assert!((e.omega * e.rho / (4.0 * 0.1) + 0.2).abs() < 1e-14);
    }

    #[test]
    fn inverts_forward_relations() {
        let (w, r, v, k, th): (f64, f64, f64, f64, f64) = (0.35, -0.3, 0.012, 1.8, 0.02);
        let sv = v.sqrt();
        let s = w * r / (4.0 * sv);
        let c = w * w / (24.0 * sv.powi(3)) * (2.0 - 5.0 * r * r) - s;
        let m = k / (4.0 * sv) * (th - v) - w * w / (48.0 * sv.powi(3)) * (2.0 - r * r / 2.0) + w * r * sv / 8.0;
        let e = durrleman_from_shape(SmileShape { slope: s, curvature: c, term_premium: m }, v, Some(th)).unwrap();
        assert!((e.omega - w).abs() < 1e-13 && (e.rho - r).abs() < 1e-13);
        // κ as printed carries +ωρν where the inversion gives −ωρν.
        let kappa_printed = k + 2.0 * w * r * v / (2.0 * (th - v));
        assert!((e.kappa.unwrap() - kappa_printed).abs() < 1e-10, "{:?}", e.kappa);
    }

    #[test]
    fn negative_radicand() {
        let shape = SmileShape { slope: 0.0, curvature: -1.0, term_premium: 0.0 };
        assert!(matches!(durrleman_from_shape(shape, 0.01, None), Err(EstimatorError::NegativeRadicand(_))));
    }

    /// A smile generated exactly by the parabola is recovered once the ATM
    /// point sits at x = 0.
    #[test]
    fn parabola_recovered() {
        let ctx = MarketContext::default();
        let mut surf = flat_surface(&ctx, 0.1);
        surf.tenors[0].nodes[2].strike = ctx.spot;
        let (s, c) = (-0.15, 0.8);
        for n in surf.tenors[0].nodes.iter_mut() {
            let x = n.strike / ctx.spot - 1.0;
            n.vol = 0.1 + s * x + 0.5 * c * x * x;
        }
        let shape = smile_shape(&surf).unwrap();
        assert!((shape.slope - s).abs() < 1e-12 && (shape.curvature - c).abs() < 1e-12, "{shape:?}");
    }
}
