//! Characteristic functions of the log-price for the four affine models.
//!
//! Every model is exp(iu x0 + Σ_k (A_k + B_k v_k + C_k v_k²)) with one term
//! set per variance factor. Heston-type factors (Heston, Bates2F) use the
//! Albrecher et al. "little trap" form with e^{-dτ} and G = (β-d)/(β+d);
//! Schöbel-Zhu-type factors (SZ, OUOU) add the C term in the volatility
//! square. The square root `d` is taken on the principal branch.

pub mod ode;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use ode::ode_oracle_terms;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CfError {
    #[error("characteristic function overflow at u = {u}, tau = {tau}")]
    NumericOverflow { u: C64, tau: f64 },
    #[error("ODE step count {0} is below the minimum of 1000")]
    StepUnderflow(usize),
}

pub type Result<T> = std::result::Result<T, CfError>;

const I: C64 = C64::new(0.0, 1.0);

/// Parameters of one variance (or volatility) factor.
///
/// For Heston and Bates2F factors `v0`, `theta` are variances; for SZ and
/// OUOU factors they are volatilities. The variance risk premium is fixed
/// at zero, so b_1 = κ − ωρ and b_2 = κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub v0: f64,
    pub theta: f64,
    pub kappa: f64,
    pub omega: f64,
    pub rho: f64,
}

pub type HestonParams = Factor;
pub type SchobelZhuParams = Factor;

impl Factor {
    pub const fn new(v0: f64, theta: f64, kappa: f64, omega: f64, rho: f64) -> Self {
        Factor { v0, theta, kappa, omega, rho }
    }

    /// 2κθ − ω² > 0.
    pub fn feller(&self) -> bool {
        2.0 * self.kappa * self.theta - self.omega * self.omega > 0.0
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.v0, self.theta, self.kappa, self.omega, self.rho]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Factor { v0: x[0], theta: x[1], kappa: x[2], omega: x[3], rho: x[4] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpParams {
    pub lambda: f64,
    pub k_hat: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoFactorKind {
    Bates2F,
    Ouou,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoFactorParams {
    pub kind: TwoFactorKind,
    pub factors: [Factor; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<JumpParams>,
}

impl TwoFactorParams {
    pub fn bates(f1: Factor, f2: Factor) -> Self {
        TwoFactorParams { kind: TwoFactorKind::Bates2F, factors: [f1, f2], jumps: None }
    }

    pub fn ouou(f1: Factor, f2: Factor) -> Self {
        TwoFactorParams { kind: TwoFactorKind::Ouou, factors: [f1, f2], jumps: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Heston,
    SchobelZhu,
    #[serde(rename = "bates2f")]
    Bates2F,
    Ouou,
}

impl ModelKind {
    /// Variance process is square-root (CIR) rather than Gaussian OU.
    pub fn is_cir(self) -> bool {
        matches!(self, ModelKind::Heston | ModelKind::Bates2F)
    }

    pub fn factor_count(self) -> usize {
        match self {
            ModelKind::Heston | ModelKind::SchobelZhu => 1,
            ModelKind::Bates2F | ModelKind::Ouou => 2,
        }
    }
}

/// Tagged union of model parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    Heston(Factor),
    SchobelZhu(Factor),
    #[serde(rename = "bates2f")]
    Bates2F(TwoFactorParams),
    Ouou(TwoFactorParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Heston(_) => ModelKind::Heston,
            ModelParams::SchobelZhu(_) => ModelKind::SchobelZhu,
            ModelParams::Bates2F(_) => ModelKind::Bates2F,
            ModelParams::Ouou(_) => ModelKind::Ouou,
        }
    }

    pub fn factors(&self) -> &[Factor] {
        match self {
            ModelParams::Heston(f) | ModelParams::SchobelZhu(f) => std::slice::from_ref(f),
            ModelParams::Bates2F(p) | ModelParams::Ouou(p) => &p.factors,
        }
    }

    /// Flat parameter vector, factor by factor in (v0, θ, κ, ω, ρ) order.
    pub fn to_vec(&self) -> Vec<f64> {
        self.factors().iter().flat_map(|f| f.to_array()).collect()
    }

    pub fn from_vec(kind: ModelKind, x: &[f64]) -> Self {
        match kind {
            ModelKind::Heston => ModelParams::Heston(Factor::from_slice(x)),
            ModelKind::SchobelZhu => ModelParams::SchobelZhu(Factor::from_slice(x)),
            ModelKind::Bates2F => {
                ModelParams::Bates2F(TwoFactorParams::bates(Factor::from_slice(&x[..5]), Factor::from_slice(&x[5..])))
            }
            ModelKind::Ouou => {
                ModelParams::Ouou(TwoFactorParams::ouou(Factor::from_slice(&x[..5]), Factor::from_slice(&x[5..])))
            }
        }
    }

    /// Feller condition on every CIR factor; always true for OU factors.
    pub fn feller(&self) -> bool {
        !self.kind().is_cir() || self.factors().iter().all(Factor::feller)
    }

    /// Log-price characteristic function under measure `j`.
    pub fn cf(&self, u: C64, x0: f64, tau: f64, r_d: f64, r_f: f64, j: J) -> Result<C64> {
        match self {
            ModelParams::Heston(p) => heston_cf(u, x0, tau, r_d, r_f, p, j),
            ModelParams::SchobelZhu(p) => sz_cf(u, x0, tau, r_d, r_f, p, j),
            ModelParams::Bates2F(p) => bates2f_cf(u, x0, tau, r_d, r_f, p, j),
            ModelParams::Ouou(p) => ouou_cf(u, x0, tau, r_d, r_f, p, j),
        }
    }

    /// Closed-form exponent terms, one per factor.
    pub fn terms(&self, u: C64, tau: f64, r_d: f64, r_f: f64, j: J) -> Vec<CfTerms> {
        let mu = r_d - r_f;
        match self {
            ModelParams::Heston(p) => vec![heston_terms(u, tau, mu, p, j, 1.0)],
            ModelParams::SchobelZhu(p) => vec![sz_terms(u, tau, mu, p, j, 1.0, SzForm::Standard)],
            ModelParams::Bates2F(p) => p.factors.iter().map(|f| heston_terms(u, tau, mu, f, j, 0.5)).collect(),
            ModelParams::Ouou(p) => {
                p.factors.iter().map(|f| sz_terms(u, tau, mu, f, j, 0.5, SzForm::Standard)).collect()
            }
        }
    }
}

/// Measure index of the characteristic function: `One` is the share
/// measure (a = ½, b = κ − ωρ), `Two` the domestic risk-neutral measure
/// (a = −½, b = κ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum J {
    One,
    Two,
}

impl J {
    pub fn a(self) -> f64 {
        match self {
            J::One => 0.5,
            J::Two => -0.5,
        }
    }

    pub fn b(self, f: &Factor) -> f64 {
        match self {
            J::One => f.kappa - f.omega * f.rho,
            J::Two => f.kappa,
        }
    }
}

/// Exponent terms of one factor, plus the internals they were built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfTerms {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub beta: C64,
    pub d: C64,
    pub g: C64,
}

impl CfTerms {
    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        CfTerms { a: z, b: z, c: z, beta: z, d: z, g: z }
    }

    pub fn exponent(&self, v0: f64) -> C64 {
        self.a + self.b * v0 + self.c * v0 * v0
    }
}

/// Principal root with Re ≥ 0, negated when β + d vanishes (the solution is
/// even in d, and the other sign keeps G finite).
fn root_d(beta: C64, disc: C64) -> C64 {
    let mut d = disc.sqrt();
    if d.re < 0.0 {
        d = -d;
    }
    if (beta + d).norm() <= 1e-14 * (beta.norm() + d.norm()) {
        d = -d;
    }
    d
}

/// ln((1 − G e)/(1 − G)) written as ln(1 + z), accurate for small G.
fn log_ratio(g: C64, e: C64) -> C64 {
    let z = g * (1.0 - e) / (1.0 - g);
    if z.norm() < 1e-4 {
        z * (1.0 - z * (0.5 - z * (1.0 / 3.0 - 0.25 * z)))
    } else {
        (1.0 + z).ln()
    }
}

/// Heston-factor terms. `share` is the weight of the (r_d − r_f)iuτ drift
/// carried by this factor (1 for one-factor models, ½ per factor otherwise).
pub fn heston_terms(u: C64, tau: f64, mu: f64, p: &Factor, j: J, share: f64) -> CfTerms {
    let iu = I * u;
    let w2 = p.omega * p.omega;
    let beta = j.b(p) - p.rho * p.omega * iu;
    let q = 2.0 * j.a() * iu - u * u;
    let d = root_d(beta, beta * beta - w2 * q);
    // β − d without cancellation when ω is small.
    let bmd = w2 * q / (beta + d);
    let g = bmd / (beta + d);
    let e = (-d * tau).exp();
    let a = share * mu * iu * tau + p.kappa * p.theta / w2 * (bmd * tau - 2.0 * log_ratio(g, e));
    let b = bmd / w2 * (1.0 - e) / (1.0 - g * e);
    CfTerms { a, b, c: C64::new(0.0, 0.0), beta, d, g }
}

/// Which algebraic form of Â to use for Schöbel-Zhu factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SzForm {
    Standard,
    LordKahl,
}

pub fn sz_terms(u: C64, tau: f64, mu: f64, p: &Factor, j: J, share: f64, form: SzForm) -> CfTerms {
    let iu = I * u;
    let w2 = p.omega * p.omega;
    let beta = 2.0 * (j.b(p) - I * p.omega * p.rho * u);
    let q = 2.0 * j.a() * iu - u * u;
    let d = root_d(beta, beta * beta - 4.0 * w2 * q);
    let bmd = 4.0 * w2 * q / (beta + d);
    let g = bmd / (beta + d);
    let e = (-d * tau).exp();
    let eh = (-d * tau * 0.5).exp();
    let den = 1.0 - g * e;
    let kt = p.kappa * p.theta;
    let c = bmd / (4.0 * w2) * (1.0 - e) / den;
    let b = kt * bmd * (1.0 - eh) * (1.0 - eh) / (d * w2 * den);
    let a_hat = match form {
        SzForm::Standard => {
            kt * kt * bmd / (d * d * w2)
                * (tau * (beta + d) * 0.5 + (4.0 * beta * eh - (2.0 * beta - d) * e - 2.0 * beta - d) / (d * den))
        }
        SzForm::LordKahl => {
            bmd * kt * kt / (2.0 * d * d * d * w2)
                * (beta * (d * tau - 4.0)
                    + d * (d * tau - 2.0)
                    + ((d * d - 2.0 * beta * beta) / (beta + d) * eh + 2.0 * beta) * 4.0 * eh / den)
        }
    };
    let a = a_hat + share * mu * iu * tau + 0.25 * bmd * tau - 0.5 * log_ratio(g, e);
    CfTerms { a, b, c, beta, d, g }
}

fn finish(u: C64, x0: f64, tau: f64, exponent: C64) -> Result<C64> {
    let v = (I * u * x0 + exponent).exp();
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(CfError::NumericOverflow { u, tau })
    }
}

pub fn heston_cf(u: C64, x0: f64, tau: f64, r_d: f64, r_f: f64, p: &HestonParams, j: J) -> Result<C64> {
    let t = heston_terms(u, tau, r_d - r_f, p, j, 1.0);
    finish(u, x0, tau, t.exponent(p.v0))
}

pub fn sz_cf(u: C64, x0: f64, tau: f64, r_d: f64, r_f: f64, p: &SchobelZhuParams, j: J) -> Result<C64> {
    let t = sz_terms(u, tau, r_d - r_f, p, j, 1.0, SzForm::Standard);
    finish(u, x0, tau, t.exponent(p.v0))
}

pub fn bates2f_cf(u: C64, x0: f64, tau: f64, r_d: f64, r_f: f64, p: &TwoFactorParams, j: J) -> Result<C64> {
    debug_assert_eq!(p.kind, TwoFactorKind::Bates2F);
    let mu = r_d - r_f;
    let mut ex: C64 = p.factors.iter().map(|f| heston_terms(u, tau, mu, f, j, 0.5).exponent(f.v0)).sum();
    if let Some(jp) = &p.jumps {
        ex += jump_exponent(u, tau, jp, j);
    }
    finish(u, x0, tau, ex)
}

pub fn ouou_cf(u: C64, x0: f64, tau: f64, r_d: f64, r_f: f64, p: &TwoFactorParams, j: J) -> Result<C64> {
    debug_assert_eq!(p.kind, TwoFactorKind::Ouou);
    let mu = r_d - r_f;
    let mut ex: C64 = p.factors.iter().map(|f| sz_terms(u, tau, mu, f, j, 0.5, SzForm::Standard).exponent(f.v0)).sum();
    if let Some(jp) = &p.jumps {
        ex += jump_exponent(u, tau, jp, j);
    }
    finish(u, x0, tau, ex)
}

/// Exponent of the lognormal jump factor. The power of (1 + k̂) is taken in
/// the transform variable iu, which keeps φ₂(−i) equal to the forward.
fn jump_exponent(u: C64, tau: f64, jp: &JumpParams, j: J) -> C64 {
    let z = I * u;
    let a = j.a();
    let base = 1.0 + jp.k_hat;
    let pow = (z * base.ln()).exp();
    jp.lambda * tau * base.powf(a + 0.5) * (pow * (jp.delta * jp.delta * (a * z + z * z * 0.5)).exp() - 1.0)
        - jp.lambda * jp.k_hat * z * tau
}

pub fn bates_jump_multiplier(u: C64, tau: f64, jp: &JumpParams, j: J) -> Result<C64> {
    let v = jump_exponent(u, tau, jp, j).exp();
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(CfError::NumericOverflow { u, tau })
    }
}

/// Parameters of the constrained Heston model equivalent to an SZ factor
/// with θ = 0.
pub fn sz_to_heston(p: &Factor) -> Factor {
    debug_assert!(p.theta == 0.0);
    Factor {
        v0: p.v0 * p.v0,
        theta: p.omega * p.omega / (2.0 * p.kappa),
        kappa: 2.0 * p.kappa,
        omega: 2.0 * p.omega,
        rho: p.rho,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: Factor = Factor::new(0.0082, 0.0143, 2.07, 0.3, -0.38);
    const Z: Factor = Factor::new(0.09, 0.11, 1.5, 0.15, -0.4);

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unit_at_zero() {
        let z = c(0.0, 0.0);
        assert_eq!(heston_cf(z, 0.3, 1.0, 0.01, 0.02, &H, J::Two).unwrap(), c(1.0, 0.0));
        assert_eq!(sz_cf(z, 0.3, 1.0, 0.01, 0.02, &Z, J::Two).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn heston_forward_at_minus_i() {
        let (x0, tau, rd, rf) = (1.3f64.ln(), 0.75, 0.012, 0.004);
        let v = heston_cf(c(0.0, -1.0), x0, tau, rd, rf, &H, J::Two).unwrap();
        let fwd = (x0 + (rd - rf) * tau).exp();
        assert!((v - fwd).norm() < 1e-12);
    }

    #[test]
    fn heston_black_scholes_limit() {
        let p = Factor::new(0.04, 0.04, 1.0, 1e-6, -0.5);
        let (x0, tau, rd, rf) = (0.1, 1.0, 0.03, 0.01);
        for k in 0..20 {
            let u = c(0.3 * k as f64, 0.0);
            let bs = (I * u * x0 + I * u * (rd - rf - 0.02) * tau - u * u * 0.04 * tau / 2.0).exp();
            let v = heston_cf(u, x0, tau, rd, rf, &p, J::Two).unwrap();
            assert!((v - bs).norm() <= 1e-6 * bs.norm().max(1e-300), "u = {u}");
        }
    }

    #[test]
    fn sz_forms_agree() {
        for &(ur, ui) in &[(0.5, 0.0), (3.0, 0.0), (12.0, 0.0), (2.0, -1.0), (1.0, -0.3)] {
            for j in [J::One, J::Two] {
                let s = sz_terms(c(ur, ui), 0.8, 0.01, &Z, j, 1.0, SzForm::Standard);
                let l = sz_terms(c(ur, ui), 0.8, 0.01, &Z, j, 1.0, SzForm::LordKahl);
                assert!((s.a - l.a).norm() < 1e-12, "{ur} {ui}: {} vs {}", s.a, l.a);
            }
        }
    }

    #[test]
    fn jump_multiplier_identities() {
        let jp = JumpParams { lambda: 0.5, k_hat: -0.02, delta: 0.1 };
        let one = c(1.0, 0.0);
        assert_eq!(bates_jump_multiplier(c(2.0, 0.0), 1.0, &JumpParams { lambda: 0.0, ..jp }, J::Two).unwrap(), one);
        assert_eq!(bates_jump_multiplier(c(2.0, 0.0), 0.0, &jp, J::Two).unwrap(), one);
        assert!((bates_jump_multiplier(c(0.0, -1.0), 1.3, &jp, J::Two).unwrap() - one).norm() < 1e-15);
    }

    /// Term-by-term evaluation written out separately from `jump_exponent`.
    #[test]
    fn jump_multiplier_expression() {
        let (lam, k, dl, tau) = (0.5f64, -0.02f64, 0.1f64, 1.0f64);
        // u = 1, j = 2: z = i, a = -1/2, (1 + k)^0 = 1.
        let z = c(0.0, 1.0);
        let pw = c((z.im * (1.0 + k).ln()).cos(), (z.im * (1.0 + k).ln()).sin());
        // δ²(a z + z²/2) with a z + z²/2 = -1/2 - i/2
        let q = c(-0.5 * dl * dl, -0.5 * dl * dl);
        let expo = lam * tau * (pw * q.exp() - 1.0) - c(0.0, lam * k * tau);
        let want = expo.exp();
        let got =
            bates_jump_multiplier(c(1.0, 0.0), tau, &JumpParams { lambda: lam, k_hat: k, delta: dl }, J::Two).unwrap();
        assert!((got - want).norm() < 1e-15, "{got} vs {want}");
    }

    #[test]
    fn serde_round_trip() {
        let m = ModelParams::Bates2F(TwoFactorParams::bates(H, Z));
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"model\":\"bates2f\""), "{s}");
        let back: ModelParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
