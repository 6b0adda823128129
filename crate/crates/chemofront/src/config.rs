//! Scenario configuration: a flat `key = value` text format with dotted
//! section prefixes, chosen so configs diff cleanly in review.
//!
//! Unknown keys are rejected rather than ignored; a typo silently falling
//! back to a default would invalidate a whole measurement run.  Every
//! field has a documented default (see [`default_config_text`]), so the
//! empty file is the reference constant scenario.

use crate::coefficients::{
    check_hypotheses, Coefficient, CoefficientKind, CoefficientPair, SinusoidTerm,
};
use crate::dispersion::ChemoParams;
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Fully resolved scenario, concrete in `f64` for the command-line layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub a: CoefficientKind<f64>,
    pub b: CoefficientKind<f64>,
    pub chi: f64,
    pub mu: f64,
    pub lambda: f64,
    pub x0: f64,
    pub x_end: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record: f64,
    pub kappa: f64,
    pub tol_wave: f64,
    pub theta: f64,
    pub w_min: f64,
    pub burn_in: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    /// The reference constant scenario.
    fn default() -> Self {
        Self {
            a: CoefficientKind::Constant(1.0),
            b: CoefficientKind::Constant(1.0),
            chi: 0.2,
            mu: 1.0,
            lambda: 1.0,
            x0: -60.0,
            x_end: 60.0,
            dx: 0.05,
            dt: 5e-3,
            t_end: 60.0,
            record: 0.1,
            kappa: 0.5,
            tol_wave: 1e-4,
            theta: 0.5,
            w_min: 20.0,
            burn_in: 15.0,
            seed: 42,
        }
    }
}

/// Reference configuration file: every key with its default, annotated.
pub fn default_config_text() -> String {
    let d = ScenarioConfig::default();
    format!(
        "\
# Scenario configuration. Omitted keys take the defaults shown here.
# Coefficient kinds: constant (value), periodic (mean, period, terms),
# sampled (times, values). Terms are amplitude:frequency:phase triples
# separated by ';' with frequency in cycles per period.

coefficients.a.kind = constant
coefficients.a.value = {}
coefficients.b.kind = constant
coefficients.b.value = {}

chemo.chi = {}
chemo.mu = {}
chemo.lambda = {}

grid.x0 = {}
grid.x_end = {}
grid.dx = {}

time.dt = {}
time.t_end = {}
time.record = {}

wave.kappa = {}
wave.tol = {}

speed.theta = {}
speed.w_min = {}
speed.burn_in = {}

seed = {}
",
        d.chi_value(&d.a),
        d.chi_value(&d.b),
        d.chi,
        d.mu,
        d.lambda,
        d.x0,
        d.x_end,
        d.dx,
        d.dt,
        d.t_end,
        d.record,
        d.kappa,
        d.tol_wave,
        d.theta,
        d.w_min,
        d.burn_in,
        d.seed
    )
}

impl ScenarioConfig {
    fn chi_value(&self, k: &CoefficientKind<f64>) -> f64 {
        match k {
            CoefficientKind::Constant(v) => *v,
            _ => unreachable!("defaults are constant"),
        }
    }
}

#[derive(Default)]
struct CoeffDraft {
    kind: Option<String>,
    value: Option<f64>,
    mean: Option<f64>,
    period: Option<f64>,
    terms: Option<Vec<SinusoidTerm<f64>>>,
    times: Option<Vec<f64>>,
    values: Option<Vec<f64>>,
}

impl CoeffDraft {
    fn is_empty(&self) -> bool {
        self.kind.is_none()
            && self.value.is_none()
            && self.mean.is_none()
            && self.period.is_none()
            && self.terms.is_none()
            && self.times.is_none()
            && self.values.is_none()
    }

    fn build(self, name: &str) -> Result<CoefficientKind<f64>> {
        let kind = match self.kind {
            Some(k) => k,
            // Kind inference keeps minimal configs short: a bare value is
            // a constant.
            None if self.value.is_some() => "constant".to_string(),
            None => {
                return Err(Error::ConfigInvalid {
                    key: format!("coefficients.{name}.kind"),
                    msg: "missing kind (constant, periodic, sampled)".into(),
                });
            }
        };
        let invalid = |key: &str, msg: &str| Error::ConfigInvalid {
            key: format!("coefficients.{name}.{key}"),
            msg: msg.into(),
        };
        match kind.as_str() {
            "constant" => {
                let v = self.value.ok_or_else(|| invalid("value", "required for constant"))?;
                Ok(CoefficientKind::Constant(v))
            }
            "periodic" => {
                let mean = self.mean.ok_or_else(|| invalid("mean", "required for periodic"))?;
                let period =
                    self.period.ok_or_else(|| invalid("period", "required for periodic"))?;
                let terms = self.terms.unwrap_or_default();
                Ok(CoefficientKind::Periodic { mean, period, terms })
            }
            "sampled" => {
                let times = self.times.ok_or_else(|| invalid("times", "required for sampled"))?;
                let values =
                    self.values.ok_or_else(|| invalid("values", "required for sampled"))?;
                if times.len() != values.len() {
                    return Err(invalid("values", "times and values must match in length"));
                }
                Ok(CoefficientKind::Sampled { times, values })
            }
            other => Err(invalid("kind", &format!("unknown kind {other:?}"))),
        }
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::ConfigParse {
        line,
        msg: format!("{key}: not a number: {v:?}"),
    })
}

fn parse_u64(line: usize, key: &str, v: &str) -> Result<u64> {
    v.parse::<u64>().map_err(|_| Error::ConfigParse {
        line,
        msg: format!("{key}: not a nonnegative integer: {v:?}"),
    })
}

fn parse_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| parse_f64(line, key, s.trim()))
        .collect()
}

fn parse_terms(line: usize, v: &str) -> Result<Vec<SinusoidTerm<f64>>> {
    let mut out = Vec::new();
    for piece in v.split(';') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let parts: Vec<&str> = piece.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::ConfigParse {
                line,
                msg: format!("term {piece:?} is not amplitude:frequency:phase"),
            });
        }
        out.push(SinusoidTerm {
            amplitude: parse_f64(line, "terms", parts[0].trim())?,
            frequency: parse_f64(line, "terms", parts[1].trim())?,
            phase: parse_f64(line, "terms", parts[2].trim())?,
        });
    }
    Ok(out)
}

/// Parses configuration text over the defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    let mut a = CoeffDraft::default();
    let mut b = CoeffDraft::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(Error::ConfigParse {
                line,
                msg: format!("expected key = value, got {body:?}"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(Error::ConfigParse { line, msg: format!("{key}: empty value") });
        }

        if let Some(rest) = key.strip_prefix("coefficients.") {
            let (which, field) = rest.split_once('.').ok_or_else(|| Error::ConfigParse {
                line,
                msg: format!("coefficient key {key:?} needs a field"),
            })?;
            let draft = match which {
                "a" => &mut a,
                "b" => &mut b,
                other => {
                    return Err(Error::ConfigParse {
                        line,
                        msg: format!("unknown coefficient {other:?} (expected a or b)"),
                    });
                }
            };
            match field {
                "kind" => draft.kind = Some(value.to_string()),
                "value" => draft.value = Some(parse_f64(line, key, value)?),
                "mean" => draft.mean = Some(parse_f64(line, key, value)?),
                "period" => draft.period = Some(parse_f64(line, key, value)?),
                "terms" => draft.terms = Some(parse_terms(line, value)?),
                "times" => draft.times = Some(parse_list(line, key, value)?),
                "values" => draft.values = Some(parse_list(line, key, value)?),
                other => {
                    return Err(Error::ConfigParse {
                        line,
                        msg: format!("unknown coefficient field {other:?}"),
                    });
                }
            }
            continue;
        }

        match key {
            "chemo.chi" => cfg.chi = parse_f64(line, key, value)?,
            "chemo.mu" => cfg.mu = parse_f64(line, key, value)?,
            "chemo.lambda" => cfg.lambda = parse_f64(line, key, value)?,
            "grid.x0" => cfg.x0 = parse_f64(line, key, value)?,
            "grid.x_end" => cfg.x_end = parse_f64(line, key, value)?,
            "grid.dx" => cfg.dx = parse_f64(line, key, value)?,
            "time.dt" => cfg.dt = parse_f64(line, key, value)?,
            "time.t_end" => cfg.t_end = parse_f64(line, key, value)?,
            "time.record" => cfg.record = parse_f64(line, key, value)?,
            "wave.kappa" => cfg.kappa = parse_f64(line, key, value)?,
            "wave.tol" => cfg.tol_wave = parse_f64(line, key, value)?,
            "speed.theta" => cfg.theta = parse_f64(line, key, value)?,
            "speed.w_min" => cfg.w_min = parse_f64(line, key, value)?,
            "speed.burn_in" => cfg.burn_in = parse_f64(line, key, value)?,
            "seed" => cfg.seed = parse_u64(line, key, value)?,
            other => {
                return Err(Error::ConfigParse {
                    line,
                    msg: format!("unknown key {other:?}"),
                });
            }
        }
    }

    if !a.is_empty() {
        cfg.a = a.build("a")?;
    }
    if !b.is_empty() {
        cfg.b = b.build("b")?;
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn positive(key: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::ConfigInvalid { key: key.into(), msg: format!("must be positive, got {v}") });
    }
    Ok(())
}

fn validate(cfg: &ScenarioConfig) -> Result<()> {
    positive("grid.dx", cfg.dx)?;
    if !(cfg.x_end > cfg.x0) {
        return Err(Error::ConfigInvalid {
            key: "grid.x_end".into(),
            msg: format!("domain [{}, {}] is empty", cfg.x0, cfg.x_end),
        });
    }
    positive("time.dt", cfg.dt)?;
    positive("time.t_end", cfg.t_end)?;
    positive("time.record", cfg.record)?;
    positive("wave.kappa", cfg.kappa)?;
    positive("wave.tol", cfg.tol_wave)?;
    positive("speed.w_min", cfg.w_min)?;
    if !(cfg.theta > 0.0 && cfg.theta < 1.0) {
        return Err(Error::ConfigInvalid {
            key: "speed.theta".into(),
            msg: format!("tracking level must lie in (0, 1), got {}", cfg.theta),
        });
    }
    if !(cfg.burn_in >= 0.0) {
        return Err(Error::ConfigInvalid {
            key: "speed.burn_in".into(),
            msg: format!("must be nonnegative, got {}", cfg.burn_in),
        });
    }
    // Constructing the domain objects performs their own deeper checks.
    cfg.pair()?;
    cfg.chemo()?;
    cfg.grid()?;
    Ok(())
}

impl ScenarioConfig {
    pub fn pair(&self) -> Result<CoefficientPair<f64>> {
        CoefficientPair::new(
            Coefficient::new(self.a.clone())?,
            Coefficient::new(self.b.clone())?,
        )
    }

    pub fn chemo(&self) -> Result<ChemoParams<f64>> {
        ChemoParams::new(self.chi, self.mu, self.lambda)
    }

    pub fn grid(&self) -> Result<GridSpec<f64>> {
        GridSpec::new(self.x0, self.x_end, self.dx)
    }

    /// Extra gate for wave construction: the saturation hypothesis and a
    /// domain wide enough to hold several decay lengths of the front.
    pub fn wave_gate(&self) -> Result<()> {
        let pair = self.pair()?;
        let chemo = self.chemo()?;
        let hyp = check_hypotheses(&pair, chemo.chi_mu());
        if !hyp.h1 {
            return Err(Error::ConfigInvalid {
                key: "chemo.chi".into(),
                msg: format!(
                    "saturation must dominate chemotaxis: \
                     b_inf > chi mu (1 + a_sup/a_inf) fails by {}",
                    -hyp.h1_margin
                ),
            });
        }
        let span = self.x_end - self.x0;
        let need = 40.0 / self.kappa;
        if span < need {
            return Err(Error::ConfigInvalid {
                key: "grid.x_end".into(),
                msg: format!(
                    "wave construction needs a span of at least 40/kappa = {need}, got {span}"
                ),
            });
        }
        Ok(())
    }

    /// Canonical text form, echoed into provenance files.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let coeff = |out: &mut String, name: &str, k: &CoefficientKind<f64>| match k {
            CoefficientKind::Constant(v) => {
                out.push_str(&format!(
                    "coefficients.{name}.kind = constant\ncoefficients.{name}.value = {v:e}\n"
                ));
            }
            CoefficientKind::Periodic { mean, period, terms } => {
                out.push_str(&format!(
                    "coefficients.{name}.kind = periodic\ncoefficients.{name}.mean = {mean:e}\n\
                     coefficients.{name}.period = {period:e}\n"
                ));
                if !terms.is_empty() {
                    let body: Vec<String> = terms
                        .iter()
                        .map(|t| format!("{:e}:{:e}:{:e}", t.amplitude, t.frequency, t.phase))
                        .collect();
                    out.push_str(&format!(
                        "coefficients.{name}.terms = {}\n",
                        body.join("; ")
                    ));
                }
            }
            CoefficientKind::Sampled { times, values } => {
                let list = |v: &[f64]| {
                    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ")
                };
                out.push_str(&format!(
                    "coefficients.{name}.kind = sampled\ncoefficients.{name}.times = {}\n\
                     coefficients.{name}.values = {}\n",
                    list(times),
                    list(values)
                ));
            }
        };
        coeff(&mut out, "a", &self.a);
        coeff(&mut out, "b", &self.b);
        out.push_str(&format!(
            "chemo.chi = {:e}\nchemo.mu = {:e}\nchemo.lambda = {:e}\n\
             grid.x0 = {:e}\ngrid.x_end = {:e}\ngrid.dx = {:e}\n\
             time.dt = {:e}\ntime.t_end = {:e}\ntime.record = {:e}\n\
             wave.kappa = {:e}\nwave.tol = {:e}\n\
             speed.theta = {:e}\nspeed.w_min = {:e}\nspeed.burn_in = {:e}\n\
             seed = {}\n",
            self.chi,
            self.mu,
            self.lambda,
            self.x0,
            self.x_end,
            self.dx,
            self.dt,
            self.t_end,
            self.record,
            self.kappa,
            self.tol_wave,
            self.theta,
            self.w_min,
            self.burn_in,
            self.seed
        ));
        out
    }
}
