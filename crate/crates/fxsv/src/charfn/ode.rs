//! Classical RK4 integration of the Riccati systems behind the closed
//! forms. Used only as a test oracle.

use num_complex::Complex64 as C64;

use super::{CfError, CfTerms, Factor, ModelParams, Result, J};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy)]
struct Rhs {
    iu: C64,
    u2: C64,
    drift: C64,
    a: f64,
    b: f64,
    kt: f64,
    rwiu: C64,
    w2: f64,
    sz: bool,
}

impl Rhs {
    fn new(u: C64, mu: f64, f: &Factor, j: J, share: f64, sz: bool) -> Self {
        let iu = I * u;
        Rhs {
            iu,
            u2: u * u,
            drift: share * mu * iu,
            a: j.a(),
            b: j.b(f),
            kt: f.kappa * f.theta,
            rwiu: f.rho * f.omega * iu,
            w2: f.omega * f.omega,
            sz,
        }
    }

    fn eval(&self, y: [C64; 3]) -> [C64; 3] {
        let [_, b, c] = y;
        let src = self.a * self.iu - 0.5 * self.u2;
        if self.sz {
            [
                self.drift + self.kt * b + 0.5 * self.w2 * b * b + self.w2 * c,
                -self.b * b + self.rwiu * b + 2.0 * self.w2 * b * c + 2.0 * self.kt * c,
                -2.0 * self.b * c + 2.0 * self.rwiu * c + src + 2.0 * self.w2 * c * c,
            ]
        } else {
            [self.drift + self.kt * b, src + (self.rwiu - self.b) * b + 0.5 * self.w2 * b * b, C64::new(0.0, 0.0)]
        }
    }
}

fn axpy(y: [C64; 3], h: f64, k: [C64; 3]) -> [C64; 3] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}

fn integrate(rhs: &Rhs, tau: f64, steps: usize) -> [C64; 3] {
    let h = tau / steps as f64;
    let mut y = [C64::new(0.0, 0.0); 3];
    for _ in 0..steps {
        let k1 = rhs.eval(y);
        let k2 = rhs.eval(axpy(y, 0.5 * h, k1));
        let k3 = rhs.eval(axpy(y, 0.5 * h, k2));
        let k4 = rhs.eval(axpy(y, h, k3));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Numerically integrated A, B, C for each factor of `params`, starting
/// from zero at τ = 0. The internals (β, d, G) are left at zero.
pub fn ode_oracle_terms(
    params: &ModelParams,
    u: C64,
    tau: f64,
    r_d: f64,
    r_f: f64,
    j: J,
    steps: usize,
) -> Result<Vec<CfTerms>> {
    if steps < 1000 {
        return Err(CfError::StepUnderflow(steps));
    }
    let mu = r_d - r_f;
    let (share, sz) = match params {
        ModelParams::Heston(_) => (1.0, false),
        ModelParams::SchobelZhu(_) => (1.0, true),
        ModelParams::Bates2F(_) => (0.5, false),
        ModelParams::Ouou(_) => (0.5, true),
    };
    Ok(params
        .factors()
        .iter()
        .map(|f| {
            if tau == 0.0 {
                return CfTerms::zero();
            }
            let [a, b, c] = integrate(&Rhs::new(u, mu, f, j, share, sz), tau, steps);
            CfTerms { a, b, c, ..CfTerms::zero() }
        })
        .collect())
}
