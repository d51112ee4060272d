use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::analysis::{analyze_dates, calibrate_date, estimate_date, start_point, CalibSettings, DateAnalysis};
use super::report::{summary_stats, to_json_string, SummaryStats};
use super::{EstimateMethod, ModelChoice, PipelineError, Result, StartMethod};
use crate::calibrate::{
    calibrate_full, calibration_risk, outlier_flags, CalibrationResult, CostKind, NelderMeadConfig, Residual,
};
use crate::charfn::ModelParams;
use crate::estimators::SzIcmForm;
use crate::market_data::{build_surfaces, ingest_csv, VolSurface};
use crate::pricer::IntegrationGrid;

/// Everything that determines a batch run. Results depend on nothing else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub input: PathBuf,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
    pub model: ModelChoice,
    pub start: StartMethod,
    pub cost: CostKind,
    pub feller: bool,
    pub max_iter: Option<usize>,
    pub stop_any: bool,
    pub grid: IntegrationGrid,
    pub vols_decimal: bool,
    pub out_dir: PathBuf,
    pub jobs: Option<usize>,
    pub sz_icm: SzIcmForm,
}

impl RunManifest {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        RunManifest {
            input: input.into(),
            from: None,
            to: None,
            model: ModelChoice::Heston,
            start: StartMethod::Icm,
            cost: CostKind::Mse,
            feller: false,
            max_iter: None,
            stop_any: false,
            grid: IntegrationGrid::default(),
            vols_decimal: false,
            out_dir: out_dir.into(),
            jobs: None,
            sz_icm: SzIcmForm::Kernel,
        }
    }

    pub fn settings(&self) -> CalibSettings {
        CalibSettings {
            model: self.model,
            start: self.start,
            cost: self.cost,
            feller: self.feller,
            max_iter: self.max_iter,
            nm: NelderMeadConfig { stop_any: self.stop_any, ..NelderMeadConfig::calibration() },
            grid: self.grid,
            sz_icm: self.sz_icm,
        }
    }

    fn in_range(&self, d: NaiveDate) -> bool {
        self.from.is_none_or(|f| d >= f) && self.to.is_none_or(|t| d <= t)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            b = b.num_threads(j.max(1));
        }
        b.build().map_err(|e| PipelineError::Invalid(e.to_string()))
    }
}

/// Files written and per-date failures of a command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub failures: Vec<(NaiveDate, String)>,
    pub warnings: Vec<String>,
}

impl Outcome {
    /// 0 when every date succeeded, 1 on partial failure.
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }

    fn write(&mut self, path: PathBuf, contents: &str) -> Result<()> {
        std::fs::write(&path, contents)?;
        self.written.push(path);
        Ok(())
    }
}

/// Reads the quote CSV and builds one surface per date, all dates when the
/// range is open. Any invalid row or surface fails the whole load.
pub fn load_surfaces(path: &Path, vols_decimal: bool) -> Result<(Vec<VolSurface>, Vec<String>)> {
    let ing = ingest_csv(path, vols_decimal)?;
    let surfaces = build_surfaces(&ing.rows)?;
    for s in &surfaces {
        s.validate()?;
    }
    Ok((surfaces, ing.warnings))
}

/// Ingest: one JSON file per date plus `validation.json`.
pub fn cmd_ingest(input: &Path, out_dir: &Path, vols_decimal: bool) -> Result<Outcome> {
    let (surfaces, warnings) = load_surfaces(input, vols_decimal)?;
    std::fs::create_dir_all(out_dir)?;
    let mut out = Outcome { warnings: warnings.clone(), ..Outcome::default() };
    for s in &surfaces {
        out.write(out_dir.join(format!("surface_{}.json", s.date)), &to_json_string(s)?)?;
    }
    let report = serde_json::json!({
        "input": input,
        "dates": surfaces.iter().map(|s| s.date.to_string()).collect::<Vec<_>>(),
        "cells": surfaces.iter().map(VolSurface::cell_count).sum::<usize>(),
        "warnings": warnings,
    });
    out.write(out_dir.join("validation.json"), &to_json_string(&report)?)?;
    Ok(out)
}

fn selected(m: &RunManifest) -> Result<(Vec<VolSurface>, Vec<String>)> {
    let (surfaces, warnings) = load_surfaces(&m.input, m.vols_decimal)?;
    Ok((surfaces.into_iter().filter(|s| m.in_range(s.date)).collect(), warnings))
}

/// Surfaces (strikes and vols per pillar) for the selected dates.
pub fn cmd_surface(m: &RunManifest) -> Result<String> {
    let (surfaces, _) = selected(m)?;
    to_json_string(&surfaces)
}

type DatedAnalyses = Vec<(NaiveDate, Result<DateAnalysis>)>;

/// Analyses every date of the file (the historical estimators need the
/// full history) and keeps the selected range.
fn analyses(m: &RunManifest) -> Result<(DatedAnalyses, Vec<String>)> {
    let (surfaces, warnings) = load_surfaces(&m.input, m.vols_decimal)?;
    let dates: Vec<NaiveDate> = surfaces.iter().map(|s| s.date).collect();
    let all = m.pool()?.install(|| analyze_dates(&surfaces));
    Ok((dates.into_iter().zip(all).filter(|(d, _)| m.in_range(*d)).collect(), warnings))
}

/// Implied-variance table as CSV.
pub fn cmd_vix(m: &RunManifest) -> Result<(String, Outcome)> {
    let (rows, warnings) = analyses(m)?;
    let mut out = Outcome { warnings, ..Outcome::default() };
    let mut csv = String::from("date,tenor,tau,v2,corrected_v2,sz_vol,skew,kurt\n");
    for (d, r) in rows {
        match r {
            Ok(a) => {
                for v in &a.vix {
                    let f = |x: f64| format!("{:.11e}", x).parse::<f64>().unwrap_or(x);
                    writeln!(
                        csv,
                        "{d},{},{},{},{},{},{},{}",
                        v.tenor,
                        f(v.tau),
                        f(v.v2),
                        f(v.corrected),
                        f(v.sz_vol),
                        f(v.skew),
                        f(v.kurt)
                    )
                    .expect("write to string");
                }
            }
            Err(e) => out.failures.push((d, e.to_string())),
        }
    }
    Ok((csv, out))
}

/// Closed-form estimates, one JSON document per date in an array.
pub fn cmd_estimate(m: &RunManifest, method: EstimateMethod) -> Result<(String, Outcome)> {
    if m.model.kind().factor_count() != 1 {
        return Err(PipelineError::Invalid("estimate supports heston and sz".into()));
    }
    let (rows, warnings) = analyses(m)?;
    let mut out = Outcome { warnings, ..Outcome::default() };
    let mut history = Vec::new();
    let mut docs = Vec::new();
    for (d, r) in rows {
        let row = r.and_then(|a| {
            history.push(a.vix[0].v2.sqrt());
            estimate_date(&a, method, m.model, m.sz_icm, &history)
        });
        match row {
            Ok(x) => docs.push(x),
            Err(e) => out.failures.push((d, e.to_string())),
        }
    }
    Ok((to_json_string(&docs)?, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub params: ModelParams,
    pub cost: f64,
    pub iterations: usize,
}

/// Per-date output of a calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub date: NaiveDate,
    pub model: ModelChoice,
    pub start: StartMethod,
    pub cost_kind: CostKind,
    pub feller: bool,
    pub start_params: ModelParams,
    pub params: ModelParams,
    pub cost: f64,
    pub start_cost: f64,
    pub rmse_vol: Option<f64>,
    pub rmse_vega: f64,
    pub iterations: usize,
    pub converged: bool,
    pub feller_satisfied: bool,
    pub flags: Vec<String>,
    pub residuals: Vec<Residual>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage1: Option<StageSummary>,
    /// The other result of an outlier recalibration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outlier_alternative: Option<StageSummary>,
}

impl CalibrationRecord {
    fn new(
        m: &RunManifest,
        date: NaiveDate,
        start_flags: Vec<String>,
        r: CalibrationResult,
        stage1: Option<CalibrationResult>,
    ) -> Self {
        let mut flags = start_flags;
        flags.extend(r.flags.iter().cloned());
        CalibrationRecord {
            date,
            model: m.model,
            start: m.start,
            cost_kind: m.cost,
            feller: m.settings().feller_mode(),
            start_params: stage1.as_ref().map_or(r.start, |s| s.start),
            params: r.params,
            cost: r.cost,
            start_cost: r.start_cost,
            rmse_vol: r.rmse.vol,
            rmse_vega: r.rmse.vega,
            iterations: r.iterations,
            converged: r.converged,
            feller_satisfied: r.feller_satisfied,
            flags,
            residuals: r.residuals,
            stage1: stage1.map(|s| StageSummary { params: s.params, cost: s.cost, iterations: s.iterations }),
            outlier_alternative: None,
        }
    }
}

/// ν0, θ and ω outliers of one-factor calibrations are refit once from a
/// start with that parameter doubled (and κ ×100 for θ in Feller mode);
/// the lower-cost result is kept and the other stored alongside.
fn refit_outliers(m: &RunManifest, analyses: &[&DateAnalysis], records: &mut [Option<CalibrationRecord>]) {
    if m.model.kind().factor_count() != 1 {
        return;
    }
    let ok: Vec<usize> = (0..records.len()).filter(|&i| records[i].is_some()).collect();
    let series = |slot: usize| -> Vec<f64> {
        ok.iter().map(|&i| records[i].as_ref().expect("ok").params.to_vec()[slot]).collect()
    };
    let mut todo: Vec<(usize, usize)> = Vec::new();
    for slot in [0usize, 1, 3] {
        for (k, f) in outlier_flags(&series(slot)).into_iter().enumerate() {
            if f {
                todo.push((ok[k], slot));
            }
        }
    }
    todo.sort_unstable();
    todo.dedup_by_key(|t| t.0);
    let refits: Vec<(usize, usize, Option<CalibrationResult>)> = todo
        .par_iter()
        .map(|&(i, slot)| {
            let rec = records[i].as_ref().expect("ok");
            let mut x = rec.start_params.to_vec();
            x[slot] *= 2.0;
            if slot == 1 && rec.feller {
                x[2] *= 100.0;
            }
            let opts = m.settings().full_options();
            let start = ModelParams::from_vec(m.model.kind(), &x);
            (i, slot, calibrate_full(&analyses[i].surface, &start, &opts).ok())
        })
        .collect();
    let names = ["v0", "theta", "kappa", "omega", "rho"];
    for (i, slot, r) in refits {
        let rec = records[i].as_mut().expect("ok");
        rec.flags.push(format!("outlier_{}", names[slot]));
        let Some(r) = r else { continue };
        let alt = StageSummary { params: r.params, cost: r.cost, iterations: r.iterations };
        if r.cost < rec.cost {
            let prev = StageSummary { params: rec.params, cost: rec.cost, iterations: rec.iterations };
            let mut next = CalibrationRecord::new(m, rec.date, rec.flags.clone(), r, None);
            next.stage1 = rec.stage1.take();
            next.start_params = rec.start_params;
            next.outlier_alternative = Some(prev);
            next.flags.push("outlier_refit_kept".into());
            *rec = next;
        } else {
            rec.outlier_alternative = Some(alt);
        }
    }
}

fn file_stem(m: &RunManifest, d: NaiveDate) -> String {
    let cost = serde_json::to_value(m.cost).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
    format!("{d}_{}_{}_{cost}", m.model.label(), m.start.label())
}

/// Summary table rows: one per quantity with mean, sd, min, quartiles, max.
fn summary_csv(rows: &[(String, Vec<f64>)]) -> String {
    let mut s = String::from("quantity,n,mean,sd,min,q1,median,q3,max\n");
    let f = |x: f64| format!("{:.11e}", x).parse::<f64>().unwrap_or(x);
    for (name, xs) in rows {
        match summary_stats(xs) {
            Some(SummaryStats { n, mean, sd, min, q1, median, q3, max }) => {
                writeln!(s, "{name},{n},{},{},{},{},{},{},{}", f(mean), f(sd), f(min), f(q1), f(median), f(q3), f(max))
            }
            None => writeln!(s, "{name},0,,,,,,,"),
        }
        .expect("write to string");
    }
    s
}

fn record_columns(records: &[CalibrationRecord]) -> Vec<(String, Vec<f64>)> {
    let mut cols: Vec<(String, Vec<f64>)> = vec![
        ("rmse_vol".into(), records.iter().map(|r| r.rmse_vol.unwrap_or(f64::NAN)).collect()),
        ("rmse_vega".into(), records.iter().map(|r| r.rmse_vega).collect()),
        ("cost".into(), records.iter().map(|r| r.cost).collect()),
        ("iterations".into(), records.iter().map(|r| r.iterations as f64).collect()),
    ];
    let names = ["v0", "theta", "kappa", "omega", "rho"];
    let width = records.iter().map(|r| r.params.to_vec().len()).max().unwrap_or(0);
    for j in 0..width {
        let label = if width > 5 { format!("{}_{}", names[j % 5], j / 5 + 1) } else { names[j].to_string() };
        cols.push((label, records.iter().filter_map(|r| r.params.to_vec().get(j).copied()).collect()));
    }
    cols
}

/// Full protocol per date: implied variance, historical ω/ρ, corrected
/// variance, term-structure fit, estimator start, calibration and RMSE.
/// Writes one JSON per date, `summary.csv` and `manifest.json`.
pub fn cmd_pipeline(m: &RunManifest) -> Result<Outcome> {
    let (rows, warnings) = analyses(m)?;
    std::fs::create_dir_all(&m.out_dir)?;
    let mut out = Outcome { warnings, ..Outcome::default() };
    out.write(m.out_dir.join("manifest.json"), &to_json_string(m)?)?;

    let mut ok: Vec<&DateAnalysis> = Vec::new();
    for (d, r) in &rows {
        match r {
            Ok(a) => ok.push(a),
            Err(e) => out.failures.push((*d, e.to_string())),
        }
    }
    let results: Vec<Result<CalibrationRecord>> = m.pool()?.install(|| {
        ok.par_iter()
            .map(|a| {
                let (start, r, stage1) = calibrate_date(a, &m.settings())?;
                Ok(CalibrationRecord::new(m, a.date(), start.flags, r, stage1))
            })
            .collect()
    });
    let mut records: Vec<Option<CalibrationRecord>> = Vec::with_capacity(results.len());
    for (a, r) in ok.iter().zip(results) {
        match r {
            Ok(x) => records.push(Some(x)),
            Err(e) => {
                out.failures.push((a.date(), e.to_string()));
                records.push(None);
            }
        }
    }
    m.pool()?.install(|| refit_outliers(m, &ok, &mut records));
    let records: Vec<CalibrationRecord> = records.into_iter().flatten().collect();
    for r in &records {
        out.write(m.out_dir.join(format!("{}.json", file_stem(m, r.date))), &to_json_string(r)?)?;
    }
    out.write(m.out_dir.join("summary.csv"), &summary_csv(&record_columns(&records)))?;
    out.failures.sort();
    if !out.failures.is_empty() {
        let f: Vec<_> = out.failures.iter().map(|(d, e)| serde_json::json!({"date": d, "error": e})).collect();
        out.write(m.out_dir.join("failures.json"), &to_json_string(&f)?)?;
    }
    Ok(out)
}

/// Alias of [`cmd_pipeline`] used by the `calibrate` subcommand.
pub fn cmd_calibrate(m: &RunManifest) -> Result<Outcome> {
    cmd_pipeline(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RiskRecord {
    date: NaiveDate,
    model: ModelChoice,
    start: StartMethod,
    base: ModelParams,
    v0: f64,
    theta: f64,
    kappa: f64,
    fits: Vec<(CostKind, ModelParams)>,
}

/// Calibration risk per date: ω, ρ from the start method, (ν0, θ, κ)
/// calibrated under MSE, MAE and MAPE.
pub fn cmd_risk(m: &RunManifest) -> Result<Outcome> {
    if m.model.kind().factor_count() != 1 {
        return Err(PipelineError::Invalid("risk supports heston and sz".into()));
    }
    let (rows, warnings) = analyses(m)?;
    std::fs::create_dir_all(&m.out_dir)?;
    let mut out = Outcome { warnings, ..Outcome::default() };
    out.write(m.out_dir.join("manifest.json"), &to_json_string(m)?)?;
    let kinds = [CostKind::Mse, CostKind::Mae, CostKind::Mape];
    let nm = m.settings().full_options().nm;
    let results: Vec<(NaiveDate, Result<RiskRecord>)> = m.pool()?.install(|| {
        rows.par_iter()
            .map(|(d, r)| {
                let rec = match r {
                    Ok(a) => start_point(a, m.model, m.start, m.sz_icm).and_then(|s| {
                        let risk = calibration_risk(&a.surface, &s.params, &kinds, &nm, &m.grid)?;
                        Ok(RiskRecord {
                            date: *d,
                            model: m.model,
                            start: m.start,
                            base: s.params,
                            v0: risk.v0,
                            theta: risk.theta,
                            kappa: risk.kappa,
                            fits: risk.fits,
                        })
                    }),
                    Err(e) => Err(PipelineError::Invalid(e.to_string())),
                };
                (*d, rec)
            })
            .collect()
    });
    let mut ok = Vec::new();
    for (d, r) in results {
        match r {
            Ok(x) => {
                out.write(
                    m.out_dir.join(format!("{d}_{}_{}_risk.json", m.model.label(), m.start.label())),
                    &to_json_string(&x)?,
                )?;
                ok.push(x);
            }
            Err(e) => out.failures.push((d, e.to_string())),
        }
    }
    let cols = vec![
        ("risk_v0".to_string(), ok.iter().map(|r| r.v0).collect()),
        ("risk_theta".to_string(), ok.iter().map(|r| r.theta).collect()),
        ("risk_kappa".to_string(), ok.iter().map(|r| r.kappa).collect()),
    ];
    out.write(m.out_dir.join("risk_summary.csv"), &summary_csv(&cols))?;
    Ok(out)
}

/// Aggregates every calibration record JSON in `dir` into summary
/// statistics, grouped by (model, start, cost).
pub fn cmd_report(dir: &Path) -> Result<String> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut groups: std::collections::BTreeMap<String, Vec<CalibrationRecord>> = Default::default();
    for p in paths {
        let text = std::fs::read_to_string(&p)?;
        if let Ok(r) = serde_json::from_str::<CalibrationRecord>(&text) {
            let cost = serde_json::to_value(r.cost_kind)?.as_str().unwrap_or_default().to_owned();
            groups.entry(format!("{}/{}/{cost}", r.model.label(), r.start.label())).or_default().push(r);
        }
    }
    let mut s = String::from("group,quantity,n,mean,sd,min,q1,median,q3,max\n");
    for (g, recs) in &groups {
        for line in summary_csv(&record_columns(recs)).lines().skip(1) {
            writeln!(s, "{g},{line}").expect("write to string");
        }
    }
    Ok(s)
}
