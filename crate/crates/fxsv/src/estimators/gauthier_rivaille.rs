//! Two-strike inversion of the small-ω expansion of Heston put prices,
//! P ≈ A + Bω² + Cρω + Dρ²ω².

use serde::{Deserialize, Serialize};

use super::{EstimatorError, Result, TermStructure};
use crate::normal;
use crate::pricer::{gk_price, OptionSpec, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Total Black-Scholes variance.
    pub w: f64,
}

impl GrCoefficients {
    pub fn price(&self, omega: f64, rho: f64) -> f64 {
        self.a + self.b * omega * omega + self.c * rho * omega + self.d * rho * rho * omega * omega
    }
}

struct Weights {
    r0: f64,
    r1: f64,
    p0: f64,
    p1: f64,
    q0: f64,
    q1: f64,
}

fn weights(kappa: f64, tau: f64) -> Weights {
    let x = kappa * tau;
    let e = (-x).exp();
    let (k2, k3) = (kappa * kappa, kappa.powi(3));
    Weights {
        r0: 0.25 / k3 * (-4.0 * e * x + 2.0 - 2.0 * e * e),
        r1: 0.25 / k3 * (4.0 * e * (x + 1.0) + (2.0 * x - 5.0) + e * e),
        p0: (-e * x + 1.0 - e) / k2,
        p1: (e * x + (x - 2.0) + 2.0 * e) / k2,
        q0: 0.5 / k3 * (-e * x * (x + 2.0) + 2.0 - 2.0 * e),
        q1: 0.5 / k3 * (2.0 * (x - 3.0) + e * x * (x + 4.0) + 6.0 * e),
    }
}

/// Expansion coefficients for a put. The Black-Scholes partials in
/// (x = ln F, w) come from x-derivatives of ∂P/∂w via ∂_w = ½(∂_xx − ∂_x).
pub fn gr_coefficients(spec: &OptionSpec, ts: &TermStructure) -> GrCoefficients {
    let TermStructure { v0, theta, kappa } = *ts;
    let tau = spec.tau;
    let w = theta * tau + (v0 - theta) * (-(-kappa * tau).exp_m1()) / kappa;
    let sw = w.sqrt();
    let put = spec.with_side(Side::Put);
    let a = gk_price(&put, (w / tau).sqrt());
    let d2 = (spec.forward() / spec.strike).ln() / sw - 0.5 * sw;
    let base = spec.df_d() * spec.strike * normal::pdf(d2) / 2.0;
    let he = [1.0, d2, d2 * d2 - 1.0, d2.powi(3) - 3.0 * d2, d2.powi(4) - 6.0 * d2 * d2 + 3.0];
    // ∂_x^k ∂_w P
    let dh = |k: usize| base * if k.is_multiple_of(2) { 1.0 } else { -1.0 } * he[k] / sw.powi(k as i32 + 1);
    let p_xw = dh(1);
    let p_ww = 0.5 * (dh(2) - dh(1));
    let p_xxw = dh(2);
    let p_xxww = 0.5 * (dh(4) - dh(3));
    let wt = weights(kappa, tau);
    let a1 = v0 * wt.p0 + theta * wt.p1;
    GrCoefficients {
        a,
        b: (v0 * wt.r0 + theta * wt.r1) * p_ww,
        c: a1 * p_xw,
        d: (v0 * wt.q0 + theta * wt.q1) * p_xxw + 0.5 * a1 * a1 * p_xxww,
        w,
    }
}

/// (ω, ρ) from two put prices of one maturity.
pub fn gauthier_rivaille(puts: [(OptionSpec, f64); 2], ts: &TermStructure) -> Result<(f64, f64)> {
    let [(s1, pr1), (s2, pr2)] = puts;
    if s1.strike == s2.strike {
        return Err(EstimatorError::EqualStrikes);
    }
    let (g1, g2) = (gr_coefficients(&s1, ts), gr_coefficients(&s2, ts));
    let (r1, r2) = (pr1 - g1.a, pr2 - g2.a);
    // Unknowns a = ω², b = ρω. Eliminating b² leaves a linear relation
    // β·a + γ·b = δ; substituting into the first equation gives a quadratic.
    let beta = g1.b * g2.d - g2.b * g1.d;
    let gamma = g1.c * g2.d - g2.c * g1.d;
    let delta = r1 * g2.d - r2 * g1.d;
    if beta == 0.0 {
        return Err(EstimatorError::NoValidRoot);
    }
    let qa = g1.d;
    let qb = g1.c - g1.b * gamma / beta;
    let qc = g1.b * delta / beta - r1;
    let roots: Vec<f64> = if qa.abs() < 1e-300 {
        vec![-qc / qb]
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return Err(EstimatorError::NoValidRoot);
        }
        // Stable pair of roots.
        let q = -0.5 * (qb + qb.signum() * disc.sqrt());
        vec![q / qa, qc / q]
    };
    roots
        .into_iter()
        .filter_map(|b| {
            let a = (delta - gamma * b) / beta;
            (a > 0.0 && b.is_finite()).then(|| (a.sqrt(), b / a.sqrt()))
        })
        .filter(|&(_, rho)| rho.abs() <= 1.0)
        .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .ok_or(EstimatorError::NoValidRoot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::{Factor, ModelParams};
    use crate::pricer::{attari_price, IntegrationGrid};

    const TS: TermStructure = TermStructure { v0: 0.0082, theta: 0.0143, kappa: 2.07 };

    fn specs(tau: f64) -> [OptionSpec; 2] {
        let s = OptionSpec::call(1.365, 1.30, tau, 0.002, 0.001).with_side(Side::Put);
        [s, OptionSpec { strike: 1.40, ..s }]
    }

    #[test]
    fn partials_match_finite_differences() {
        let s = specs(0.5)[0];
        let (x0, w0) = (s.forward().ln(), 0.006);
        let p = |x: f64, w: f64| {
            let spot = (x - (s.r_d - s.r_f) * s.tau).exp();
            gk_price(&OptionSpec { spot, ..s }, (w / s.tau).sqrt())
        };
        let (hx, hw) = (1e-3, 1e-5);
        // ∂²P/∂x∂w via central differences.
        let pxw =
            (p(x0 + hx, w0 + hw) - p(x0 + hx, w0 - hw) - p(x0 - hx, w0 + hw) + p(x0 - hx, w0 - hw)) / (4.0 * hx * hw);
        let pww = (p(x0, w0 + hw) - 2.0 * p(x0, w0) + p(x0, w0 - hw)) / (hw * hw);
        // Closed forms used by the coefficient builder.
        let sw = w0.sqrt();
        let d2 = (s.forward() / s.strike).ln() / sw - 0.5 * sw;
        let base = s.df_d() * s.strike * normal::pdf(d2) / 2.0;
        let dh1 = -base * d2 / w0;
        let dh2 = base * (d2 * d2 - 1.0) / w0.powf(1.5);
        assert!((pxw / dh1 - 1.0).abs() < 2e-4, "{pxw} vs {dh1}");
        assert!((pww / (0.5 * (dh2 - dh1)) - 1.0).abs() < 1e-4, "{pww}");
    }

    #[test]
    fn exact_on_own_expansion() {
        let ss = specs(0.5);
        for &(w, r) in &[(0.3, -0.4), (0.1, 0.2), (0.5, -0.7)] {
            let puts = ss.map(|s| (s, gr_coefficients(&s, &TS).price(w, r)));
            let (wo, ro) = gauthier_rivaille(puts, &TS).unwrap();
            assert!((wo - w).abs() < 1e-10 && (ro - r).abs() < 1e-10, "({w}, {r}) -> ({wo}, {ro})");
        }
    }

    #[test]
    fn equal_strikes() {
        let s = specs(0.5)[0];
        assert_eq!(gauthier_rivaille([(s, 0.01), (s, 0.01)], &TS), Err(EstimatorError::EqualStrikes));
    }

    /// Small ω: the expansion tracks the Fourier price to O(ω³).
    #[test]
    fn expansion_tracks_heston() {
        let grid = IntegrationGrid::fine();
        for &(w, r) in &[(0.1, -0.4), (0.05, -0.4)] {
            let m = ModelParams::Heston(Factor::new(TS.v0, TS.theta, TS.kappa, w, r));
            for s in specs(0.5) {
                let exact = attari_price(&m, &s, &grid).unwrap();
                let err = (gr_coefficients(&s, &TS).price(w, r) - exact).abs();
                assert!(err < 2.0 * w.powi(3) * 1e-2, "ω = {w}, K = {}: {err:e}", s.strike);
            }
        }
        let m = ModelParams::Heston(Factor::new(TS.v0, TS.theta, TS.kappa, 0.1, -0.4));
        let puts = specs(0.5).map(|s| (s, attari_price(&m, &s, &grid).unwrap()));
        let (wo, ro) = gauthier_rivaille(puts, &TS).unwrap();
        assert!((wo - 0.1).abs() < 0.01 && (ro + 0.4).abs() < 0.05, "({wo}, {ro})");
    }
}
