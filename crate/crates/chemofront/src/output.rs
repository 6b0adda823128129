//! Deterministic artifact writers.
//!
//! Identical inputs must yield byte-identical files, so everything here
//! avoids timestamps, hash iteration order, and locale-dependent
//! formatting.  Floats print with 17 significant digits, enough to
//! reproduce an `f64` bit-for-bit on read-back.

use std::path::Path;

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::dispersion::{c_star, choose_epsilon, front_constants, lambda_threshold};
use crate::error::Result;

/// 17 significant digits in scientific notation; non-finite values print
/// lowercase (`nan`, `inf`, `-inf`).
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// CSV accumulator: one header row, then numeric rows.
pub struct Csv {
    buf: String,
    cols: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Csv { buf, cols: header.len() }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.cols, "CSV row width mismatch");
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(&fmt_float(*v));
        }
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value).expect("report serialization");
    body.push('\n');
    write_text(path, &body)
}

/// Spectral quantities and barrier constants for one scenario at its
/// configured decay rate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DispersionReport {
    /// Critical rate allowed by chemotaxis; `sqrt(lambda)` when `chi = 0`.
    pub kappa_chi: f64,
    pub kappa_star: f64,
    pub c_star: f64,
    pub epsilon: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    pub d: f64,
    pub delta0: f64,
    /// Degradation threshold for the pure-KPP speed; `a_lower` when
    /// `chi = 0`.
    pub lambda_chi: f64,
    pub h1_margin: f64,
}

impl DispersionReport {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self> {
        let pair = cfg.pair()?;
        let chemo = cfg.chemo()?;
        let spectral = c_star(&chemo, &pair)?;
        let epsilon = choose_epsilon(&pair, &chemo, cfg.kappa)?;
        let params = front_constants(&pair, &chemo, cfg.kappa, epsilon)?;
        let lam = lambda_threshold(&chemo, &pair)?;
        let hyp = crate::coefficients::check_hypotheses(&pair, chemo.chi_mu());
        Ok(DispersionReport {
            kappa_chi: spectral.kappa_chi.value,
            kappa_star: spectral.kappa_star,
            c_star: spectral.c_star,
            epsilon: params.epsilon,
            a0: params.a0,
            a1: params.a1,
            a2: params.a2,
            d: params.d,
            delta0: params.delta0,
            lambda_chi: lam.value,
            h1_margin: hyp.h1_margin,
        })
    }
}

/// Summary sidecar for a constructed wave; the profile slices go to CSV.
#[derive(Debug, Clone, Serialize)]
pub struct WaveReport {
    pub kappa: f64,
    pub epsilon: f64,
    pub period: Option<f64>,
    pub amplitude: f64,
    pub anchor: f64,
    pub half_level_crossing: f64,
    pub least_mean_speed: f64,
    pub residual_linf: f64,
    pub periodicity_defect: f64,
    pub left_defect: f64,
    pub right_defect: f64,
    pub outer_iterations: usize,
    pub uniqueness_gap: Option<f64>,
}

impl WaveReport {
    pub fn from_solution(w: &crate::wave::WaveSolution<f64>) -> Self {
        WaveReport {
            kappa: w.kappa,
            epsilon: w.epsilon,
            period: w.period,
            amplitude: w.amplitude,
            anchor: w.anchor,
            half_level_crossing: w.half_level_crossing,
            least_mean_speed: w.least_mean_speed,
            residual_linf: w.residual_linf,
            periodicity_defect: w.periodicity_defect,
            left_defect: w.left_defect,
            right_defect: w.right_defect,
            outer_iterations: w.outer_iterations,
            uniqueness_gap: w.uniqueness_gap,
        }
    }
}

/// Verdict sidecar for a spreading-speed run; the crossing series goes to
/// CSV.
#[derive(Debug, Clone, Serialize)]
pub struct SpeedReport {
    pub theta: f64,
    pub burn_in: f64,
    pub w_min: f64,
    pub least_mean_speed: f64,
    pub fit_speed: f64,
    pub fit_residual: f64,
    pub monotone: bool,
    /// `2 sqrt(a_lower)`, the spectral floor being tested.
    pub bound: f64,
    pub pass: bool,
}

impl SpeedReport {
    pub fn from_outcome(o: &crate::speed::SpreadingOutcome<f64>) -> Self {
        let e = &o.estimate;
        SpeedReport {
            theta: e.theta,
            burn_in: e.burn_in,
            w_min: e.w_min,
            least_mean_speed: e.least_mean_speed,
            fit_speed: e.fit_speed,
            fit_residual: e.fit_residual,
            monotone: e.monotone,
            bound: o.bound,
            pass: o.pass,
        }
    }
}

/// Run provenance: resolved configuration echo plus the pinned numerical
/// constants.  Deliberately no timestamps or host details, so reruns with
/// the same inputs produce identical bytes.
pub fn provenance(cfg: &ScenarioConfig, subcommand: &str) -> serde_json::Value {
    serde_json::json!({
        "tool": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "subcommand": subcommand,
        "config": cfg.to_text(),
        "constants": {
            "undershoot_slack_dx2": 10.0,
            "cfl_fraction": 0.5,
            "peclet_limit": 2.0,
            "slices_per_period": 64,
            "inner_tol_fraction": 0.1,
            "periodicity_gate": 1.0e-3,
        },
    })
}
