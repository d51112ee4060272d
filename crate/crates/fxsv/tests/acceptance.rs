//! Acceptance criteria 1–10. Each criterion prints one PASS/FAIL line; the
//! process fails if any criterion fails. Pass criterion numbers as
//! arguments to run a subset, e.g. `cargo test --test acceptance -- 3 9`.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use fxsv::calibrate::{calibration_risk, nelder_mead, CostKind, NelderMeadConfig};
use fxsv::charfn::{ode_oracle_terms, sz_to_heston, JumpParams, J};
use fxsv::estimators::SzIcmForm;
use fxsv::market_data::VolSurface;
use fxsv::moments::{implied_variance_vix, sz_instantaneous_variance, sz_total_variance, Strip};
use fxsv::pipeline::{
    analyze_dates, calibrate_date, cmd_pipeline, estimate_date, CalibSettings, EstimateMethod, ModelChoice,
    RunManifest, StartMethod,
};
use fxsv::pricer::{
    attari_price, carr_madan_price, gk_price, heston_two_integral_price, IntegrationGrid, OptionSpec, Side,
};
use fxsv::synthetic::{flat_surface, surface_from_model, surface_from_vols, MarketContext};
use fxsv::{Factor, ModelParams, TwoFactorParams};

type Outcome = (bool, String);
type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn cir_factor(rng: &mut ChaCha8Rng) -> Factor {
    Factor::new(
        rng.gen_range(0.002..0.05),
        rng.gen_range(0.002..0.05),
        rng.gen_range(0.2..5.0),
        rng.gen_range(0.05..0.8),
        rng.gen_range(-0.9..0.9),
    )
}

fn ou_factor(rng: &mut ChaCha8Rng) -> Factor {
    Factor::new(
        rng.gen_range(0.03..0.25),
        rng.gen_range(0.03..0.25),
        rng.gen_range(0.2..5.0),
        rng.gen_range(0.02..0.4),
        rng.gen_range(-0.9..0.9),
    )
}

fn draw_model(rng: &mut ChaCha8Rng, which: usize) -> ModelParams {
    match which {
        0 => ModelParams::Heston(cir_factor(rng)),
        1 => ModelParams::SchobelZhu(ou_factor(rng)),
        2 => ModelParams::Bates2F(TwoFactorParams::bates(cir_factor(rng), cir_factor(rng))),
        _ => ModelParams::Ouou(TwoFactorParams::ouou(ou_factor(rng), ou_factor(rng))),
    }
}

/// CF normalization, martingale property and closed form against RK4.
fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (spot, r_d, r_f) = (1.3f64, 0.02, 0.01);
    let mut worst_fwd: f64 = 0.0;
    let mut worst_ode: f64 = 0.0;
    let mut unit = true;
    for which in 0..4 {
        for i in 0..100 {
            let mut m = draw_model(&mut rng, which);
            if let (ModelParams::Bates2F(p), true) = (&mut m, i % 2 == 0) {
                p.jumps = Some(JumpParams {
                    lambda: rng.gen_range(0.0..1.0),
                    k_hat: rng.gen_range(-0.1..0.05),
                    delta: rng.gen_range(0.01..0.15),
                });
            }
            let tau = rng.gen_range(0.05..2.0);
            let u = C64::new(rng.gen_range(-8.0..8.0), 0.0);
            let x0 = spot.ln();
            unit &= m.cf(C64::new(0.0, 0.0), x0, tau, r_d, r_f, J::Two).unwrap() == C64::new(1.0, 0.0);
            let fwd = spot * ((r_d - r_f) * tau).exp();
            let at = m.cf(C64::new(0.0, -1.0), x0, tau, r_d, r_f, J::Two).unwrap();
            worst_fwd = worst_fwd.max((at - fwd).norm());

            if let ModelParams::Bates2F(p) = &mut m {
                p.jumps = None;
            }
            for j in [J::One, J::Two] {
                let closed = m.terms(u, tau, r_d, r_f, j);
                let rk = ode_oracle_terms(&m, u, tau, r_d, r_f, j, 4000).unwrap();
                for (c, o) in closed.iter().zip(&rk) {
                    for (x, y) in [(c.a, o.a), (c.b, o.b), (c.c, o.c)] {
                        worst_ode = worst_ode.max((x - y).norm() / y.norm().max(1.0));
                    }
                }
            }
        }
    }
    let pass = unit && worst_fwd < 1e-8 && worst_ode < 1e-8;
    (pass, format!("phi(0)=1 exact: {unit}, max |phi(-i)-F| {worst_fwd:.1e}, max A/B/C vs RK4 {worst_ode:.1e}"))
}

/// SZ with θ = 0 is a constrained Heston; symmetric Bates2F is Heston.
fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (x0, r_d, r_f) = (1.3f64.ln(), 0.02, 0.01);
    let (mut sz_err, mut bates_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let tau = rng.gen_range(0.05..2.0);
        let u = C64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-1.0..0.0));
        let mut s = ou_factor(&mut rng);
        s.theta = 0.0;
        let h = sz_to_heston(&s);
        let a = ModelParams::SchobelZhu(s).cf(u, x0, tau, r_d, r_f, J::Two).unwrap();
        let b = ModelParams::Heston(h).cf(u, x0, tau, r_d, r_f, J::Two).unwrap();
        sz_err = sz_err.max((a - b).norm());

        let f = cir_factor(&mut rng);
        let half = Factor { v0: f.v0 / 2.0, theta: f.theta / 2.0, ..f };
        let a = ModelParams::Bates2F(TwoFactorParams::bates(half, half)).cf(u, x0, tau, r_d, r_f, J::Two).unwrap();
        let b = ModelParams::Heston(f).cf(u, x0, tau, r_d, r_f, J::Two).unwrap();
        bates_err = bates_err.max((a - b).norm());
    }
    let pass = sz_err < 1e-10 && bates_err < 1e-10;
    (pass, format!("max |SZ(theta=0) - Heston| {sz_err:.1e}, max |symmetric Bates2F - Heston| {bates_err:.1e}"))
}

/// Attari, Gil-Pelaez and Carr-Madan agree; degenerate Heston is GK;
/// put-call parity.
fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (spot, r_d, r_f) = (1.3, 0.012, 0.004);
    let grid = IntegrationGrid::default();
    let fine = IntegrationGrid::fine();
    let taus = [1.0 / 12.0, 2.0 / 12.0, 0.25, 0.5, 1.0, 2.0];
    let moneyness = [-1.5, -0.75, 0.0, 0.75, 1.5];
    let (mut agree, mut agree_fine, mut parity): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..50 {
        // Quartile ranges of the calibrated term structure, full calibrated
        // ranges of ω and ρ.
        let f = Factor::new(
            rng.gen_range(0.0055..0.0144),
            rng.gen_range(0.0112..0.0227),
            rng.gen_range(1.552..4.747),
            rng.gen_range(0.211..0.465),
            rng.gen_range(-0.462..-0.315),
        );
        let m = ModelParams::Heston(f);
        for &tau in &taus {
            for &z in &moneyness {
                let k = spot * ((r_d - r_f) * tau + z * 0.1 * f64::sqrt(tau)).exp();
                let call = OptionSpec::call(spot, k, tau, r_d, r_f);
                let put = call.with_side(Side::Put);
                let a = attari_price(&m, &call, &grid).unwrap();
                let others = [
                    heston_two_integral_price(&m, &call, &fine).unwrap(),
                    carr_madan_price(&m, &call, 1.1, &fine).unwrap(),
                    carr_madan_price(&m, &call, 1.5, &fine).unwrap(),
                ];
                let af = attari_price(&m, &call, &fine).unwrap();
                for o in others {
                    agree = agree.max((a - o).abs() / spot);
                    agree_fine = agree_fine.max((af - o).abs() / spot);
                }
                let pa = attari_price(&m, &put, &grid).unwrap();
                let pg = heston_two_integral_price(&m, &put, &fine).unwrap();
                let pc = carr_madan_price(&m, &put, 1.5, &fine).unwrap();
                let cg = others[0];
                let cc = others[2];
                for (c, p) in [(a, pa), (cg, pg), (cc, pc)] {
                    parity = parity.max((c - p - call.parity()).abs() / spot);
                }
            }
        }
    }
    let mut degenerate: f64 = 0.0;
    for &tau in &taus {
        let v = 0.01;
        let m = ModelParams::Heston(Factor::new(v, v, 2.0, 1e-6, -0.3));
        for &z in &moneyness {
            let k = spot * ((r_d - r_f) * tau + z * 0.1 * f64::sqrt(tau)).exp();
            let spec = OptionSpec::call(spot, k, tau, r_d, r_f);
            degenerate =
                degenerate.max((attari_price(&m, &spec, &grid).unwrap() - gk_price(&spec, v.sqrt())).abs() / spot);
        }
    }
    let pass = agree < 1e-5 && degenerate < 1e-5 && parity < 1e-9;
    (pass, format!(
        "max pricer spread {agree:.1e}*S (attari on the fine grid: {agree_fine:.1e}*S), degenerate vs GK {degenerate:.1e}*S, parity {parity:.1e}*S"
    ))
}

/// d/dτ[τ E[v̄/τ]] = E[ν_τ²] for the OU volatility factor.
fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let f = ou_factor(&mut rng);
        let total = |t: f64| t * sz_total_variance(f.v0, f.theta, f.kappa, f.omega, t);
        for i in 0..=59 {
            let tau = 0.05 + 2.95 * i as f64 / 59.0;
            let h = 1e-4;
            let d = (total(tau + h) - total(tau - h)) / (2.0 * h);
            worst = worst.max((d - sz_instantaneous_variance(f.v0, f.theta, f.kappa, f.omega, tau)).abs());
        }
    }
    (worst < 1e-8, format!("max |d/dtau total - E[nu^2]| {worst:.1e} over tau in [0.05, 3]"))
}

fn five_strike_truncation(sigma: f64) -> f64 {
    let surface = flat_surface(&MarketContext::default(), sigma);
    let s = &surface.tenors[3];
    implied_variance_vix(&Strip::from_slice(surface.spot, s)).unwrap() / (sigma * sigma) - 1.0
}

/// Dense-strike implied variance oracle and the five-strike truncation.
fn criterion_5() -> Outcome {
    let (spot, tau, r_d, r_f, sigma): (f64, f64, f64, f64, f64) = (1.3, 0.5, 0.012, 0.004, 0.1);
    let fwd = spot * ((r_d - r_f) * tau).exp();
    let n = 401;
    let width = 8.0 * sigma * tau.sqrt();
    let strikes: Vec<f64> = (0..n).map(|i| fwd * (-width + 2.0 * width * i as f64 / (n - 1) as f64).exp()).collect();
    let dense = Strip::from_vols(spot, &strikes, &vec![sigma; n], n / 2, tau, r_d, r_f);
    let v2 = implied_variance_vix(&dense).unwrap();
    let dense_err = v2 / (sigma * sigma) - 1.0;
    let runs: Vec<String> = (0..3).map(|_| format!("{:.2e}", five_strike_truncation(sigma))).collect();
    let stable = runs.iter().all(|r| r == &runs[0]);
    let pass = dense_err.abs() < 1e-3 && stable;
    (
        pass,
        format!(
            "dense strip ({n} strikes) rel error {dense_err:.1e}, 5-strike 6M truncation {} (stable: {stable})",
            runs[0]
        ),
    )
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct EstimatorSweep {
    seed: u64,
    surfaces: usize,
    icm_sign_recovered: usize,
    durrleman_sign_recovered: usize,
    icm_abs_rho_error: f64,
    durrleman_abs_rho_error: f64,
    icm_omega_bias: f64,
    durrleman_omega_bias: f64,
}

fn estimator_sweep(seed: u64, surfaces: usize) -> EstimatorSweep {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = EstimatorSweep {
        seed,
        surfaces,
        icm_sign_recovered: 0,
        durrleman_sign_recovered: 0,
        icm_abs_rho_error: 0.0,
        durrleman_abs_rho_error: 0.0,
        icm_omega_bias: 0.0,
        durrleman_omega_bias: 0.0,
    };
    let n = surfaces as f64;
    for _ in 0..surfaces {
        // Interquartile ranges of Heston parameters calibrated to EURUSD.
        let f = Factor::new(
            rng.gen_range(0.0055..0.0144),
            rng.gen_range(0.0112..0.0227),
            rng.gen_range(1.552..4.747),
            rng.gen_range(0.211..0.465),
            rng.gen_range(-0.462..-0.315),
        );
        let s = surface_from_model(&ModelParams::Heston(f), &MarketContext::default(), &IntegrationGrid::default())
            .unwrap();
        let a = analyze_dates(&[s]).pop().unwrap().unwrap();
        let est = |m| estimate_date(&a, m, ModelChoice::Heston, SzIcmForm::Kernel, &[]).unwrap();
        let (i, d) = (est(EstimateMethod::Icm), est(EstimateMethod::Durrleman));
        let (wi, ri, wd, rd) = (i.omega.unwrap(), i.rho.unwrap(), d.omega.unwrap(), d.rho.unwrap());
        out.icm_sign_recovered += usize::from(ri.signum() == f.rho.signum());
        out.durrleman_sign_recovered += usize::from(rd.signum() == f.rho.signum());
        out.icm_abs_rho_error += (ri.abs() - f.rho.abs()).abs() / n;
        out.durrleman_abs_rho_error += (rd.abs() - f.rho.abs()).abs() / n;
        out.icm_omega_bias += (wi - f.omega) / n;
        out.durrleman_omega_bias += (wd - f.omega) / n;
    }
    out
}

/// ICM and Durrleman on synthetic Heston surfaces: sign of ρ and the
/// ordering seen on market data (ICM closer in |ρ|, ω biased high).
fn criterion_6() -> Outcome {
    let sweep = estimator_sweep(6, 30);
    let path = fixtures().join("estimator_sweep.json");
    if std::env::var_os("FXSV_UPDATE_FIXTURES").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(&sweep).unwrap() + "\n").unwrap();
    }
    let committed: EstimatorSweep = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.abs().max(1e-12);
    let matches_oracle = sweep.icm_sign_recovered == committed.icm_sign_recovered
        && sweep.durrleman_sign_recovered == committed.durrleman_sign_recovered
        && rel(sweep.icm_abs_rho_error, committed.icm_abs_rho_error)
        && rel(sweep.durrleman_abs_rho_error, committed.durrleman_abs_rho_error)
        && rel(sweep.icm_omega_bias, committed.icm_omega_bias)
        && rel(sweep.durrleman_omega_bias, committed.durrleman_omega_bias);
    let signs = sweep.icm_sign_recovered == sweep.surfaces && sweep.durrleman_sign_recovered == sweep.surfaces;
    let rho_order = sweep.icm_abs_rho_error < sweep.durrleman_abs_rho_error;
    let omega_high = sweep.icm_omega_bias > 0.0;
    let pass = matches_oracle && signs && rho_order && omega_high;
    (
        pass,
        format!(
            "{} surfaces: sign(rho) icm {}/{n} durrleman {}/{n}; mean ||rho|-|rho*|| icm {:.3} vs durrleman {:.3} \
             (icm closer: {rho_order}); mean omega bias icm {:+.3} (high: {omega_high}); matches committed sweep: {matches_oracle}",
            sweep.surfaces,
            sweep.icm_sign_recovered,
            sweep.durrleman_sign_recovered,
            sweep.icm_abs_rho_error,
            sweep.durrleman_abs_rho_error,
            sweep.icm_omega_bias,
            n = sweep.surfaces,
        ),
    )
}

fn round_trip_truths(rng: &mut ChaCha8Rng, model: ModelChoice) -> ModelParams {
    let mut r = |lo: f64, hi: f64| rng.gen_range(lo..hi);
    match model {
        ModelChoice::Heston => ModelParams::Heston(Factor::new(
            r(0.0055, 0.0144),
            r(0.0112, 0.0227),
            r(1.552, 4.747),
            r(0.211, 0.465),
            r(-0.462, -0.315),
        )),
        ModelChoice::Sz => {
            ModelParams::SchobelZhu(Factor::new(r(0.075, 0.12), r(0.1, 0.15), r(1.0, 3.0), r(0.08, 0.2), r(-0.5, -0.2)))
        }
        ModelChoice::Bates2F => {
            let mut f = || Factor::new(r(0.003, 0.007), r(0.005, 0.011), r(1.0, 3.0), r(0.1, 0.3), r(-0.7, 0.2));
            ModelParams::Bates2F(TwoFactorParams::bates(f(), f()))
        }
        ModelChoice::Bates2FFeller => {
            // Inside the calibrated family: Feller holds, ρ pinned at ±0.99.
            let mut f = |rho: f64| {
                let (v0, theta, kappa) = (r(0.003, 0.007), r(0.005, 0.011), r(1.0, 3.0));
                let cap = (1.9 * kappa * theta).sqrt();
                Factor::new(v0, theta, kappa, r(0.05, cap), rho)
            };
            ModelParams::Bates2F(TwoFactorParams::bates(f(0.99), f(-0.99)))
        }
        ModelChoice::Ouou => {
            let mut f = |rho: f64| Factor::new(r(0.055, 0.075), r(0.065, 0.09), r(1.2, 3.0), r(0.07, 0.17), rho);
            ModelParams::Ouou(TwoFactorParams::ouou(f(0.99), f(-0.99)))
        }
    }
}

/// Round trips from the method-appropriate start within the iteration caps.
fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cases = [
        (ModelChoice::Heston, StartMethod::Icm),
        (ModelChoice::Sz, StartMethod::Icm),
        (ModelChoice::Bates2F, StartMethod::Evp),
        (ModelChoice::Bates2FFeller, StartMethod::Mevp),
        (ModelChoice::Ouou, StartMethod::Mevp),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (model, start) in cases {
        let cap = if model.kind().factor_count() == 1 { 1600 } else { 800 };
        let mut worst: f64 = 0.0;
        let mut feller_ok = true;
        let mut within_cap = true;
        for _ in 0..3 {
            let truth = round_trip_truths(&mut rng, model);
            let s = surface_from_model(&truth, &MarketContext::default(), &IntegrationGrid::default()).unwrap();
            let a = analyze_dates(&[s]).pop().unwrap().unwrap();
            let (_, r, _) = calibrate_date(&a, &CalibSettings::new(model, start)).unwrap();
            worst = worst.max(r.rmse.vol.unwrap_or(f64::INFINITY));
            within_cap &= r.iterations <= cap;
            if model == ModelChoice::Bates2FFeller {
                feller_ok &= r.params.factors().iter().all(Factor::feller);
            }
        }
        let ok = worst < 1e-4 && within_cap && feller_ok;
        pass &= ok;
        parts.push(format!("{} {}: {worst:.1e}{}", model.label(), start.label(), if ok { "" } else { " (fail)" }));
    }
    // Feller mode on a Heston surface that violates the condition.
    let truth = ModelParams::Heston(Factor::new(0.0082, 0.0143, 2.07, 0.3, -0.38));
    let s = surface_from_model(&truth, &MarketContext::default(), &IntegrationGrid::default()).unwrap();
    let a = analyze_dates(&[s]).pop().unwrap().unwrap();
    let settings = CalibSettings { feller: true, ..CalibSettings::new(ModelChoice::Heston, StartMethod::Icm) };
    let (_, r, _) = calibrate_date(&a, &settings).unwrap();
    let heston_feller = r.params.factors().iter().all(Factor::feller);
    pass &= heston_feller;
    parts.push(format!("heston feller mode satisfied: {heston_feller}"));
    (pass, format!("worst vol RMSE of 3 truths: {}", parts.join(", ")))
}

fn perturbed(surface: &VolSurface) -> VolSurface {
    let vols: Vec<_> = surface
        .tenors
        .iter()
        .enumerate()
        .map(|(i, t)| (t.tenor, std::array::from_fn(|j| t.nodes[j].vol + 0.002 * ((3 * i + j) as f64).sin())))
        .collect();
    surface_from_vols(&MarketContext::default(), &vols).unwrap()
}

/// Calibration risk across MSE, MAE and MAPE.
fn criterion_8() -> Outcome {
    let grid = IntegrationGrid::default();
    let truth = ModelParams::Heston(Factor::new(0.0082, 0.0143, 2.07, 0.3, -0.38));
    let surface = surface_from_model(&truth, &MarketContext::default(), &grid).unwrap();
    let kinds = [CostKind::Mse, CostKind::Mae, CostKind::Mape];
    let nm = NelderMeadConfig::calibration();
    let exact = calibration_risk(&surface, &truth, &kinds, &nm, &grid).unwrap();
    let exact_max = exact.v0.max(exact.theta).max(exact.kappa);
    let bumped = perturbed(&surface);
    let p1 = calibration_risk(&bumped, &truth, &kinds, &nm, &grid).unwrap();
    let p2 = calibration_risk(&bumped, &truth, &kinds, &nm, &grid).unwrap();
    let bits = |r: &fxsv::calibrate::CalibrationRisk| {
        let mut v = vec![r.v0.to_bits(), r.theta.to_bits(), r.kappa.to_bits()];
        for (_, p) in &r.fits {
            v.extend(p.to_vec().iter().map(|x| x.to_bits()));
        }
        v
    };
    let positive = p1.v0 > 0.0 && p1.theta > 0.0 && p1.kappa > 0.0;
    let reproducible = bits(&p1) == bits(&p2);
    let pass = exact_max < 1e-6 && positive && reproducible;
    (
        pass,
        format!(
            "attainable max risk {exact_max:.1e}; perturbed risk v0 {:.1e} theta {:.1e} kappa {:.1e}, bit-reproducible: {reproducible}",
            p1.v0, p1.theta, p1.kappa
        ),
    )
}

/// Nelder-Mead on Rosenbrock.
fn criterion_9() -> Outcome {
    let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
    let cfg = NelderMeadConfig::default().with_max_iter(500);
    let r = nelder_mead(rosen, &[-1.2, 1.0], &cfg).unwrap();
    let monotone = r.best_history.windows(2).all(|w| w[1] <= w[0]);
    let pass = r.f < 1e-6 && r.iterations <= 500 && monotone;
    (pass, format!("f = {:.1e} after {} iterations, best vertex never increases: {monotone}", r.f, r.iterations))
}

fn read_dir_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

/// Re-running the pipeline on the fixtures is byte-identical.
fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut m = RunManifest::new(fixtures().join("heston_5d.csv"), &out);
    m.model = ModelChoice::Heston;
    cmd_pipeline(&m).unwrap();
    let first = read_dir_bytes(&out);
    std::fs::remove_dir_all(&out).unwrap();
    cmd_pipeline(&m).unwrap();
    let second = read_dir_bytes(&out);
    let pass = !first.is_empty() && first == second;
    (pass, format!("{} files compared across two runs, identical: {}", first.len(), first == second))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "characteristic functions", criterion_1, Some(Duration::from_secs(30))),
        (2, "model nesting", criterion_2, Some(Duration::from_secs(5))),
        (3, "pricer agreement", criterion_3, Some(Duration::from_secs(120))),
        (4, "variance derivative identity", criterion_4, None),
        (5, "implied variance oracle", criterion_5, None),
        (6, "ICM and Durrleman behaviour", criterion_6, None),
        (7, "round-trip calibration", criterion_7, None),
        (8, "calibration risk", criterion_8, None),
        (9, "optimizer sanity", criterion_9, None),
        (10, "determinism", criterion_10, None),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, name, run, limit) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = run();
        let took = t.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let pass = ok && in_time;
        let budget = limit.map(|l| format!(", limit {}s", l.as_secs())).unwrap_or_default();
        println!(
            "criterion {n:>2} {}: {name}: {detail} [{:.2}s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
        if !pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
