//! Nelder-Mead simplex search with the classic coefficients.

use serde::{Deserialize, Serialize};

use super::{CalibError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadConfig {
    /// Reflection.
    pub alpha: f64,
    /// Expansion.
    pub gamma: f64,
    /// Contraction.
    pub rho: f64,
    /// Shrink.
    pub sigma: f64,
    /// Tolerance on f(worst) − f(best).
    pub eps_f: f64,
    /// Tolerance on the simplex volume.
    pub eps_vol: f64,
    pub max_iter: usize,
    /// Stop when either tolerance is met instead of both.
    pub stop_any: bool,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig {
            alpha: 1.0,
            gamma: 2.0,
            rho: 0.5,
            sigma: 0.5,
            eps_f: 1e-10,
            eps_vol: 1e-12,
            max_iter: 1600,
            stop_any: false,
        }
    }
}

impl NelderMeadConfig {
    /// Settings for surface calibrations. With ten parameters the initial
    /// simplex volume (0.05¹⁰/10!) is already below `eps_vol`, so the
    /// spread test alone decides; it is tightened accordingly.
    pub fn calibration() -> Self {
        NelderMeadConfig { eps_f: 1e-14, ..Self::default() }
    }

    pub fn with_max_iter(self, max_iter: usize) -> Self {
        NelderMeadConfig { max_iter, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha > 0.0
            && self.gamma > 1.0
            && self.rho > 0.0
            && self.rho <= 0.5
            && self.sigma > 0.0
            && self.sigma < 1.0;
        if ok {
            Ok(())
        } else {
            Err(CalibError::InvalidConfig(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    pub evaluations: usize,
    /// Best vertex value after each ordering step.
    pub best_history: Vec<f64>,
}

/// Initial step per coordinate: 0.05, or 0.00025 for a zero coordinate.
pub fn initial_step(x: f64) -> f64 {
    if x != 0.0 {
        0.05
    } else {
        0.00025
    }
}

/// Volume of the simplex: |det(x_i − x_1)| / n!.
pub fn simplex_volume(pts: &[Vec<f64>]) -> f64 {
    let n = pts.len() - 1;
    let mut m: Vec<Vec<f64>> = pts[1..].iter().map(|p| p.iter().zip(&pts[0]).map(|(a, b)| a - b).collect()).collect();
    let mut det = 1.0;
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            m.swap(piv, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let k = m[r][c] / m[c][c];
            let (top, rest) = m.split_at_mut(r);
            for (x, y) in rest[0][c..n].iter_mut().zip(&top[c][c..n]) {
                *x -= k * y;
            }
        }
    }
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    det.abs() / fact
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `x_start`. Non-finite values away from the start are
/// treated as +∞.
pub fn nelder_mead<F>(mut f: F, x_start: &[f64], cfg: &NelderMeadConfig) -> Result<NmResult>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let n = x_start.len();
    let f0 = f(x_start);
    if !f0.is_finite() {
        return Err(CalibError::NonFiniteObjective(f0));
    }
    let mut evals = 1;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        sanitize(f(x))
    };
    // Vertices x_1..x_n are the start stepped along each axis; the start
    // itself is the last vertex.
    let mut pts: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|i| {
            let mut x = x_start.to_vec();
            x[i] += initial_step(x_start[i]);
            let v = eval(&x, &mut evals);
            (x, v)
        })
        .collect();
    pts.push((x_start.to_vec(), f0));

    let mut history = Vec::new();
    let mut iterations = 0;
    let converged = loop {
        // Stable sort keeps the original index as tie-break.
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        history.push(pts[0].1);
        let spread = (pts[n].1 - pts[0].1).abs() < cfg.eps_f;
        let flat = {
            let xs: Vec<Vec<f64>> = pts.iter().map(|p| p.0.clone()).collect();
            simplex_volume(&xs) < cfg.eps_vol
        };
        if (spread && flat) || (cfg.stop_any && (spread || flat)) {
            break true;
        }
        if iterations >= cfg.max_iter {
            break false;
        }
        iterations += 1;

        let mut xo = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in xo.iter_mut().zip(&p.0) {
                *c += v / n as f64;
            }
        }
        let towards =
            |a: &[f64], t: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect() };
        let worst = pts[n].0.clone();
        // x_r = x_o + α(x_o − x_{n+1})
        let xr = towards(&xo, -cfg.alpha, &worst);
        let fr = eval(&xr, &mut evals);
        if pts[0].1 <= fr && fr <= pts[n - 1].1 {
            pts[n] = (xr, fr);
            continue;
        }
        if fr <= pts[0].1 {
            let xe = towards(&xo, cfg.gamma, &xr);
            let fe = eval(&xe, &mut evals);
            pts[n] = if fe <= fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        let xc = towards(&xo, cfg.rho, &worst);
        let fc = eval(&xc, &mut evals);
        if fc <= pts[n].1 {
            pts[n] = (xc, fc);
            continue;
        }
        let best = pts[0].0.clone();
        for p in pts.iter_mut().skip(1) {
            p.0 = towards(&best, cfg.sigma, &p.0);
            p.1 = eval(&p.0, &mut evals);
        }
    };
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = pts.swap_remove(0);
    Ok(NmResult { x, f: fx, iterations, converged, evaluations: evals, best_history: history })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosen(x: &[f64]) -> f64 {
        100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
    }

    #[test]
    fn quadratic() {
        let r = nelder_mead(|x| x.iter().map(|v| v * v).sum(), &[1.0, 1.0], &NelderMeadConfig::default()).unwrap();
        assert!(r.f < 1e-10 && r.converged, "{r:?}");
    }

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(rosen, &[-1.2, 1.0], &NelderMeadConfig::default().with_max_iter(500)).unwrap();
        assert!(r.f < 1e-6, "{} after {}", r.f, r.iterations);
        assert!(r.best_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn optimal_start() {
        let r = nelder_mead(rosen, &[1.0, 1.0], &NelderMeadConfig::default()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn zero_coordinate_step() {
        assert_eq!(initial_step(0.0), 0.00025);
        assert_eq!(initial_step(-3.0), 0.05);
    }

    #[test]
    fn volume_of_unit_simplex() {
        let v = simplex_volume(&[vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert!((v - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!(simplex_volume(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]), 0.0);
    }

    #[test]
    fn non_finite_start() {
        assert!(matches!(
            nelder_mead(|_| f64::NAN, &[0.0], &NelderMeadConfig::default()),
            Err(CalibError::NonFiniteObjective(_))
        ));
    }

    #[test]
    fn stop_any_stops_earlier() {
        let cfg = NelderMeadConfig { eps_f: 1e-3, ..NelderMeadConfig::default() };
        let and = nelder_mead(rosen, &[-1.2, 1.0], &cfg).unwrap();
        let any = nelder_mead(rosen, &[-1.2, 1.0], &NelderMeadConfig { stop_any: true, ..cfg }).unwrap();
        assert!(any.iterations < and.iterations);
    }
}
