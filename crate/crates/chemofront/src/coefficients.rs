//! Time-dependent growth/saturation coefficients and the logistic entire
//! solution.
//!
//! The reaction term of the model is `u (a(t) - b(t) u)` with coefficients
//! that are constant, periodic (a mean plus sinusoid terms), or sampled data
//! with linear interpolation.  Everything downstream needs uniform bounds
//! `a_inf, a_sup, b_inf, b_sup` and the least mean
//!
//! ```text
//! lower_mean(f) = liminf_{t-s -> inf} (1/(t-s)) * int_s^t f
//! ```
//!
//! which for periodic coefficients equals the period average and for sampled
//! data is estimated over a finite horizon.  The spatially uniform attractor
//! of the logistic equation `u' = u (a(t) - b(t) u)` (the "entire" solution
//! bounded away from 0 and infinity for all time) supplies the back state of
//! every front; it is computed by relaxing from a generous initial condition
//! until the orbit is indistinguishable from its translate by one period.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::scalar::{golden_min, Real};

/// One sinusoidal term `amplitude * sin(2 pi frequency t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidTerm<T> {
    pub amplitude: T,
    pub frequency: T,
    pub phase: T,
}

impl<T: Real> SinusoidTerm<T> {
    pub fn omega(&self) -> T {
        T::of(2.0) * T::PI() * self.frequency
    }

    pub fn eval(&self, t: T) -> T {
        self.amplitude * (self.omega() * t + self.phase).sin()
    }
}

/// Structural description of one coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientKind<T> {
    Constant(T),
    /// `mean + sum of terms`; every term must run an integral number of
    /// cycles per `period` so the period average equals `mean`.
    Periodic {
        mean: T,
        period: T,
        terms: Vec<SinusoidTerm<T>>,
    },
    /// Piecewise-linear samples, clamped to the end values outside the span.
    Sampled { times: Vec<T>, values: Vec<T> },
}

impl<T: Real> CoefficientKind<T> {
    pub fn eval(&self, t: T) -> T {
        match self {
            CoefficientKind::Constant(c) => *c,
            CoefficientKind::Periodic { mean, terms, .. } => {
                let mut v = *mean;
                for term in terms {
                    v += term.eval(t);
                }
                v
            }
            CoefficientKind::Sampled { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let i = match times.partition_point(|&s| s <= t) {
                    0 => 0,
                    p => p - 1,
                };
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] + (values[i + 1] - values[i]) * w
            }
        }
    }

    /// Exact antiderivative `int_0^t f(s) ds` (signed for `t < 0`).
    pub fn integral_from_zero(&self, t: T) -> T {
        match self {
            CoefficientKind::Constant(c) => *c * t,
            CoefficientKind::Periodic { mean, terms, .. } => {
                let mut v = *mean * t;
                for term in terms {
                    let w = term.omega();
                    v += term.amplitude * (term.phase.cos() - (w * t + term.phase).cos()) / w;
                }
                v
            }
            CoefficientKind::Sampled { .. } => {
                if t >= T::zero() {
                    self.integral(T::zero(), t)
                } else {
                    -self.integral(t, T::zero())
                }
            }
        }
    }

    /// Exact integral over `[from, to]` (`from <= to`) of the clamped
    /// piecewise-linear extension; for analytic kinds defers to the closed
    /// form.
    pub fn integral(&self, from: T, to: T) -> T {
        debug_assert!(to >= from);
        match self {
            CoefficientKind::Sampled { times, values } => {
                sampled_integral(times, values, from, to)
            }
            _ => self.integral_from_zero(to) - self.integral_from_zero(from),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CoefficientKind::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::Domain("constant coefficient must be finite".into()));
                }
            }
            CoefficientKind::Periodic { mean, period, terms } => {
                if !(*period > T::zero()) || !mean.is_finite() {
                    return Err(Error::Domain("periodic coefficient needs period > 0".into()));
                }
                for term in terms {
                    if !(term.frequency > T::zero()) || !term.amplitude.is_finite() {
                        return Err(Error::Domain(
                            "sinusoid terms need frequency > 0 and finite amplitude".into(),
                        ));
                    }
                    let cycles = term.frequency * *period;
                    if (cycles - cycles.round()).abs() > T::of(1e-9) {
                        return Err(Error::Domain(format!(
                            "term frequency {} does not complete whole cycles over period {}",
                            term.frequency, period
                        )));
                    }
                }
            }
            CoefficientKind::Sampled { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return Err(Error::Domain(
                        "sampled coefficient needs matching times/values, length >= 2".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Domain("sample times must be strictly increasing".into()));
                }
                if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::Domain("sampled coefficient has non-finite entries".into()));
                }
            }
        }
        Ok(())
    }

    pub fn period(&self) -> Option<T> {
        match self {
            CoefficientKind::Periodic { period, .. } => Some(*period),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoefficientKind::Constant(_))
    }
}

/// Exact integral of the clamped piecewise-linear interpolant.
fn sampled_integral<T: Real>(times: &[T], values: &[T], from: T, to: T) -> T {
    let n = times.len();
    let half = T::of(0.5);
    let mut acc = T::zero();
    // Clamped flat pieces outside the sample span.
    if from < times[0] {
        acc += values[0] * (to.min(times[0]) - from);
    }
    if to > times[n - 1] {
        acc += values[n - 1] * (to - from.max(times[n - 1]));
    }
    let lo = from.max(times[0]);
    let hi = to.min(times[n - 1]);
    if hi <= lo {
        return acc;
    }
    for i in 0..n - 1 {
        let (t0, t1) = (times[i], times[i + 1]);
        if t1 <= lo || t0 >= hi {
            continue;
        }
        let a = lo.max(t0);
        let b = hi.min(t1);
        let slope = (values[i + 1] - values[i]) / (t1 - t0);
        let va = values[i] + slope * (a - t0);
        let vb = values[i] + slope * (b - t0);
        acc += half * (va + vb) * (b - a);
    }
    acc
}

/// Least (or greatest) mean value and whether it is a finite-horizon
/// estimate rather than an exact quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanValue<T> {
    pub value: T,
    pub estimate: bool,
}

/// Least mean of a coefficient.
///
/// Constant and periodic kinds are exact (the period average for periodic
/// kinds, which requires `window_min >= period`).  Sampled kinds are
/// estimated as the minimum window average over start times in
/// `[-horizon, horizon - w]` and window lengths `w` running over multiples of
/// `window_min` up to `horizon`; restricting lengths to multiples of
/// `window_min` keeps period-commensurate data exact.
pub fn least_mean<T: Real>(kind: &CoefficientKind<T>, window_min: T, horizon: T) -> Result<MeanValue<T>> {
    scan_mean(kind, window_min, horizon, false)
}

/// Greatest mean, the mirror image of [`least_mean`].
pub fn greatest_mean<T: Real>(
    kind: &CoefficientKind<T>,
    window_min: T,
    horizon: T,
) -> Result<MeanValue<T>> {
    scan_mean(kind, window_min, horizon, true)
}

fn scan_mean<T: Real>(
    kind: &CoefficientKind<T>,
    window_min: T,
    horizon: T,
    take_max: bool,
) -> Result<MeanValue<T>> {
    if !(window_min > T::zero()) {
        return Err(Error::InvalidWindow("window_min must be positive".into()));
    }
    if horizon < T::of(4.0) * window_min {
        return Err(Error::InvalidWindow(format!(
            "horizon {horizon} must be at least 4 * window_min = {}",
            T::of(4.0) * window_min
        )));
    }
    match kind {
        CoefficientKind::Constant(c) => Ok(MeanValue { value: *c, estimate: false }),
        CoefficientKind::Periodic { mean, period, .. } => {
            if window_min < *period * (T::one() - T::of(1e-9)) {
                return Err(Error::InvalidWindow(format!(
                    "window_min {window_min} is below the period {period}"
                )));
            }
            Ok(MeanValue { value: *mean, estimate: false })
        }
        CoefficientKind::Sampled { .. } => {
            let lattice = window_min / T::of(8.0);
            let mut best: Option<T> = None;
            let mut w = window_min;
            while w <= horizon * (T::one() + T::of(1e-12)) {
                let mut s = -horizon;
                let s_max = horizon - w;
                loop {
                    let avg = kind.integral(s, s + w) / w;
                    best = Some(match best {
                        None => avg,
                        Some(b) => {
                            if take_max {
                                b.max(avg)
                            } else {
                                b.min(avg)
                            }
                        }
                    });
                    if s >= s_max {
                        break;
                    }
                    s = (s + lattice).min(s_max);
                }
                w += window_min;
            }
            Ok(MeanValue {
                value: best.expect("window scan is non-empty"),
                estimate: true,
            })
        }
    }
}

/// One coefficient with its cached uniform bounds and mean values.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient<T> {
    kind: CoefficientKind<T>,
    inf: T,
    sup: T,
    lower_mean: T,
    upper_mean: T,
    mean_estimate: bool,
}

/// Window parameters used when a sampled coefficient needs its mean
/// estimated at construction time.
#[derive(Debug, Clone, Copy)]
pub struct MeanWindow<T> {
    pub window_min: T,
    pub horizon: T,
}

impl<T: Real> Coefficient<T> {
    pub fn new(kind: CoefficientKind<T>) -> Result<Self> {
        let window = match &kind {
            CoefficientKind::Sampled { times, .. } => {
                let span = *times.last().unwrap() - times[0];
                MeanWindow {
                    window_min: span / T::of(8.0),
                    horizon: span.half(),
                }
            }
            CoefficientKind::Periodic { period, .. } => MeanWindow {
                window_min: *period,
                horizon: T::of(4.0) * *period,
            },
            CoefficientKind::Constant(_) => MeanWindow {
                window_min: T::one(),
                horizon: T::of(4.0),
            },
        };
        Self::with_mean_window(kind, window)
    }

    pub fn with_mean_window(kind: CoefficientKind<T>, window: MeanWindow<T>) -> Result<Self> {
        kind.validate()?;
        let (inf, sup) = extremes(&kind);
        let lower = least_mean(&kind, window.window_min, window.horizon)?;
        let upper = greatest_mean(&kind, window.window_min, window.horizon)?;
        Ok(Self {
            kind,
            inf,
            sup,
            lower_mean: lower.value,
            upper_mean: upper.value,
            mean_estimate: lower.estimate,
        })
    }

    pub fn constant(value: T) -> Result<Self> {
        Self::new(CoefficientKind::Constant(value))
    }

    pub fn kind(&self) -> &CoefficientKind<T> {
        &self.kind
    }

    pub fn eval(&self, t: T) -> T {
        self.kind.eval(t)
    }

    pub fn integral(&self, from: T, to: T) -> T {
        self.kind.integral(from, to)
    }

    pub fn inf(&self) -> T {
        self.inf
    }

    pub fn sup(&self) -> T {
        self.sup
    }

    /// Least mean; exact unless the coefficient is sampled.
    pub fn lower_mean(&self) -> T {
        self.lower_mean
    }

    pub fn upper_mean(&self) -> T {
        self.upper_mean
    }

    pub fn mean_is_estimate(&self) -> bool {
        self.mean_estimate
    }

    pub fn period(&self) -> Option<T> {
        self.kind.period()
    }

    pub fn is_constant(&self) -> bool {
        self.kind.is_constant()
    }
}

/// Pointwise extremes.  Periodic kinds are sampled densely over one period
/// and each candidate extremum is polished by golden-section search.
fn extremes<T: Real>(kind: &CoefficientKind<T>) -> (T, T) {
    match kind {
        CoefficientKind::Constant(c) => (*c, *c),
        CoefficientKind::Sampled { values, .. } => {
            let mut lo = values[0];
            let mut hi = values[0];
            for &v in values {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (lo, hi)
        }
        CoefficientKind::Periodic { period, .. } => {
            let samples = 4096usize;
            let h = *period / T::of(samples as f64);
            let mut min_i = 0usize;
            let mut max_i = 0usize;
            let mut min_v = kind.eval(T::zero());
            let mut max_v = min_v;
            for i in 1..=samples {
                let v = kind.eval(h * T::of(i as f64));
                if v < min_v {
                    min_v = v;
                    min_i = i;
                }
                if v > max_v {
                    max_v = v;
                    max_i = i;
                }
            }
            let refine = |i: usize, sign: T| -> T {
                let lo = h * T::of(i as f64 - 1.0);
                let hi = h * T::of(i as f64 + 1.0);
                let t = golden_min(lo, hi, |t| sign * kind.eval(t), 90);
                kind.eval(t)
            };
            (refine(min_i, T::one()), refine(max_i, -T::one()))
        }
    }
}

/// The pair `(a, b)` of growth and saturation coefficients.
///
/// Construction enforces the standing positivity assumption
/// `inf a > 0, inf b > 0` and, when both are periodic, a common period.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPair<T> {
    pub a: Coefficient<T>,
    pub b: Coefficient<T>,
}

impl<T: Real> CoefficientPair<T> {
    pub fn new(a: Coefficient<T>, b: Coefficient<T>) -> Result<Self> {
        if !(a.inf() > T::zero()) {
            return Err(Error::Hypothesis(format!(
                "growth coefficient must be bounded below by a positive constant, inf = {}",
                a.inf()
            )));
        }
        if !(b.inf() > T::zero()) {
            return Err(Error::Hypothesis(format!(
                "saturation coefficient must be bounded below by a positive constant, inf = {}",
                b.inf()
            )));
        }
        if let (Some(pa), Some(pb)) = (a.period(), b.period()) {
            if (pa - pb).abs() > T::of(1e-9) * pa.max(pb) {
                return Err(Error::UnsupportedCoefficient(format!(
                    "periodic coefficients must share one period, got {pa} and {pb}"
                )));
            }
        }
        Ok(Self { a, b })
    }

    pub fn constants(a: T, b: T) -> Result<Self> {
        Self::new(Coefficient::constant(a)?, Coefficient::constant(b)?)
    }

    pub fn a_inf(&self) -> T {
        self.a.inf()
    }

    pub fn a_sup(&self) -> T {
        self.a.sup()
    }

    pub fn b_inf(&self) -> T {
        self.b.inf()
    }

    pub fn b_sup(&self) -> T {
        self.b.sup()
    }

    /// Least mean of the growth coefficient, written `a_lower` throughout.
    pub fn a_lower_mean(&self) -> T {
        self.a.lower_mean()
    }

    pub fn a_upper_mean(&self) -> T {
        self.a.upper_mean()
    }

    /// Common period when any coefficient is periodic.
    pub fn period(&self) -> Option<T> {
        self.a.period().or_else(|| self.b.period())
    }

    pub fn is_constant(&self) -> bool {
        self.a.is_constant() && self.b.is_constant()
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.a.kind(), CoefficientKind::Sampled { .. })
            || matches!(self.b.kind(), CoefficientKind::Sampled { .. })
    }
}

/// Report of the standing assumptions for a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport<T> {
    /// Coefficients bounded and positive (checked at construction; repeated
    /// here for reporting).
    pub bounded_positive: bool,
    /// Strong saturation dominance `b_inf > chi mu (1 + a_sup / a_inf)`.
    pub h1: bool,
    /// `b_inf - chi mu (1 + a_sup / a_inf)`; positive iff `h1`.
    pub h1_margin: T,
}

/// Evaluates the standing assumptions for given chemotaxis strength
/// `chi_mu = chi * mu`.
pub fn check_hypotheses<T: Real>(pair: &CoefficientPair<T>, chi_mu: T) -> HypothesisReport<T> {
    let bounded_positive = pair.a_inf() > T::zero()
        && pair.b_inf() > T::zero()
        && pair.a_sup().is_finite()
        && pair.b_sup().is_finite();
    let h1_margin = pair.b_inf() - chi_mu * (T::one() + pair.a_sup() / pair.a_inf());
    HypothesisReport {
        bounded_positive,
        h1: h1_margin > T::zero(),
        h1_margin,
    }
}

/// Options for the entire-solution relaxation.
#[derive(Debug, Clone, Copy)]
pub struct LogisticOptions<T> {
    /// Periodicity / accuracy target for the orbit.
    pub tol_ode: T,
    /// Relaxation span before the first requested time; defaults to
    /// `40 / a_inf`, enough to forget the initial condition at the slowest
    /// admissible growth rate.
    pub t_relax: Option<T>,
}

impl<T: Real> Default for LogisticOptions<T> {
    fn default() -> Self {
        Self { tol_ode: T::of(1e-8), t_relax: None }
    }
}

/// The positive entire solution of `u' = u (a(t) - b(t) u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntireLogistic<T> {
    repr: LogisticRepr<T>,
}

#[derive(Debug, Clone, PartialEq)]
enum LogisticRepr<T> {
    Constant(T),
    /// One period `[0, period]`, sampled uniformly; evaluation wraps.
    Periodic { period: T, grid: TimeGrid<T>, values: Vec<T> },
    /// Finite window, clamped outside.
    Gridded { grid: TimeGrid<T>, values: Vec<T> },
}

impl<T: Real> EntireLogistic<T> {
    pub fn eval(&self, t: T) -> T {
        match &self.repr {
            LogisticRepr::Constant(c) => *c,
            LogisticRepr::Periodic { period, grid, values } => {
                let mut s = t - (t / *period).floor() * *period;
                if s < T::zero() {
                    s += *period;
                }
                interp_time(grid, values, s)
            }
            LogisticRepr::Gridded { grid, values } => interp_time(grid, values, t),
        }
    }

    pub fn inf(&self) -> T {
        match &self.repr {
            LogisticRepr::Constant(c) => *c,
            LogisticRepr::Periodic { values, .. } | LogisticRepr::Gridded { values, .. } => {
                values.iter().fold(values[0], |m, &v| m.min(v))
            }
        }
    }

    pub fn sup(&self) -> T {
        match &self.repr {
            LogisticRepr::Constant(c) => *c,
            LogisticRepr::Periodic { values, .. } | LogisticRepr::Gridded { values, .. } => {
                values.iter().fold(values[0], |m, &v| m.max(v))
            }
        }
    }
}

fn interp_time<T: Real>(grid: &TimeGrid<T>, values: &[T], t: T) -> T {
    let s = (t - grid.t0) / grid.dt;
    if s <= T::zero() {
        return values[0];
    }
    let last = T::of((values.len() - 1) as f64);
    if s >= last {
        return values[values.len() - 1];
    }
    let i = s.floor().as_f64() as usize;
    let w = s - T::of(i as f64);
    values[i] + (values[i + 1] - values[i]) * w
}

/// Computes the entire logistic solution sampled over `t_grid`.
///
/// Constant coefficients yield the exact equilibrium `a / b`.  Otherwise the
/// ODE is integrated with an adaptive embedded Runge-Kutta pair from
/// `t_grid.t0 - t_relax` with initial value `a_sup / b_inf`; for periodic
/// coefficients the relaxation span is doubled (at most twice) until
/// `|u(t + period) - u(t)| < tol_ode`, and failure to converge is an error.
pub fn entire_logistic<T: Real>(
    pair: &CoefficientPair<T>,
    t_grid: TimeGrid<T>,
    opts: LogisticOptions<T>,
) -> Result<EntireLogistic<T>> {
    if pair.is_constant() {
        let a = pair.a.eval(T::zero());
        let b = pair.b.eval(T::zero());
        return Ok(EntireLogistic { repr: LogisticRepr::Constant(a / b) });
    }
    let base_relax = opts.t_relax.unwrap_or(T::of(40.0) / pair.a_inf());
    let inner_tol = opts.tol_ode * T::of(1e-2);
    let u0 = pair.a_sup() / pair.b_inf();
    let rhs = |t: T, u: T| u * (pair.a.eval(t) - pair.b.eval(t) * u);

    if let Some(period) = pair.period() {
        // Sample one period densely; evaluation wraps.
        let n = 2048usize;
        let dt = period / T::of(n as f64);
        let grid = TimeGrid::new(T::zero(), dt, n + 1)?;
        let mut relax = base_relax;
        for _ in 0..3 {
            let mut u = integrate_adaptive(&rhs, -relax, T::zero(), u0, inner_tol)?;
            let mut values = Vec::with_capacity(n + 1);
            values.push(u);
            for i in 0..n {
                u = integrate_adaptive(&rhs, grid.t(i), grid.t(i + 1), u, inner_tol)?;
                values.push(u);
            }
            if (values[n] - values[0]).abs() < opts.tol_ode {
                return Ok(EntireLogistic {
                    repr: LogisticRepr::Periodic { period, grid, values },
                });
            }
            relax = relax * T::of(2.0);
        }
        return Err(Error::RelaxationFailure(format!(
            "periodic orbit defect stayed above {} after doubling the relaxation span twice",
            opts.tol_ode
        )));
    }

    // Sampled coefficients: relax once and record over the requested window.
    let mut u = integrate_adaptive(&rhs, t_grid.t0 - base_relax, t_grid.t0, u0, inner_tol)?;
    let mut values = Vec::with_capacity(t_grid.n);
    values.push(u);
    for i in 0..t_grid.n - 1 {
        u = integrate_adaptive(&rhs, t_grid.t(i), t_grid.t(i + 1), u, inner_tol)?;
        values.push(u);
    }
    Ok(EntireLogistic { repr: LogisticRepr::Gridded { grid: t_grid, values } })
}

/// Adaptive Dormand-Prince 5(4) integration of a scalar ODE.
fn integrate_adaptive<T: Real>(
    rhs: &impl Fn(T, T) -> T,
    t0: T,
    t1: T,
    u0: T,
    tol: T,
) -> Result<T> {
    if t1 <= t0 {
        return Ok(u0);
    }
    let mut t = t0;
    let mut u = u0;
    let mut h = (t1 - t0).min(T::of(0.1));
    let h_min = (t1 - t0) * T::of(1e-14);
    let mut steps = 0u64;
    while t < t1 {
        if steps > 50_000_000 {
            return Err(Error::Divergence("ODE step budget exhausted".into()));
        }
        steps += 1;
        h = h.min(t1 - t);
        let (u5, err) = dp45(rhs, t, u, h);
        let scale = tol * (T::one() + u.abs());
        if err <= scale || h <= h_min {
            t += h;
            u = u5;
            if !u.is_finite() {
                return Err(Error::Divergence("ODE solution became non-finite".into()));
            }
        }
        let ratio = if err > T::zero() {
            (scale / err).powf(T::of(0.2))
        } else {
            T::of(5.0)
        };
        h = h * (T::of(0.9) * ratio).max(T::of(0.2)).min(T::of(5.0));
        h = h.max(h_min);
    }
    Ok(u)
}

/// One Dormand-Prince 5(4) step; returns the 5th-order value and the
/// embedded error estimate.
fn dp45<T: Real>(rhs: &impl Fn(T, T) -> T, t: T, u: T, h: T) -> (T, T) {
    let c = |v: f64| T::of(v);
    let k1 = rhs(t, u);
    let k2 = rhs(t + h * c(0.2), u + h * (c(0.2) * k1));
    let k3 = rhs(t + h * c(0.3), u + h * (c(3.0 / 40.0) * k1 + c(9.0 / 40.0) * k2));
    let k4 = rhs(
        t + h * c(0.8),
        u + h * (c(44.0 / 45.0) * k1 - c(56.0 / 15.0) * k2 + c(32.0 / 9.0) * k3),
    );
    let k5 = rhs(
        t + h * c(8.0 / 9.0),
        u + h
            * (c(19372.0 / 6561.0) * k1 - c(25360.0 / 2187.0) * k2 + c(64448.0 / 6561.0) * k3
                - c(212.0 / 729.0) * k4),
    );
    let k6 = rhs(
        t + h,
        u + h
            * (c(9017.0 / 3168.0) * k1 - c(355.0 / 33.0) * k2 + c(46732.0 / 5247.0) * k3
                + c(49.0 / 176.0) * k4
                - c(5103.0 / 18656.0) * k5),
    );
    let u5 = u + h
        * (c(35.0 / 384.0) * k1 + c(500.0 / 1113.0) * k3 + c(125.0 / 192.0) * k4
            - c(2187.0 / 6784.0) * k5
            + c(11.0 / 84.0) * k6);
    let k7 = rhs(t + h, u5);
    let u4 = u + h
        * (c(5179.0 / 57600.0) * k1 + c(7571.0 / 16695.0) * k3 + c(393.0 / 640.0) * k4
            - c(92097.0 / 339200.0) * k5
            + c(187.0 / 2100.0) * k6
            + c(1.0 / 40.0) * k7);
    (u5, (u5 - u4).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sin_growth(mean: f64, amplitude: f64) -> CoefficientKind<f64> {
        CoefficientKind::Periodic {
            mean,
            period: 1.0,
            terms: vec![SinusoidTerm { amplitude, frequency: 1.0, phase: 0.0 }],
        }
    }

    #[test]
    fn constant_coefficient_stats() {
        let c = Coefficient::constant(1.5f64).unwrap();
        assert_eq!(c.inf(), 1.5);
        assert_eq!(c.sup(), 1.5);
        assert_eq!(c.lower_mean(), 1.5);
        assert!(!c.mean_is_estimate());
    }

    #[test]
    fn periodic_extremes_hit_mean_plus_minus_amplitude() {
        let c = Coefficient::new(sin_growth(1.0, 0.5)).unwrap();
        assert!((c.inf() - 0.5).abs() < 1e-10);
        assert!((c.sup() - 1.5).abs() < 1e-10);
        assert_eq!(c.lower_mean(), 1.0);
        assert_eq!(c.upper_mean(), 1.0);
    }

    #[test]
    fn periodic_least_mean_is_the_period_average() {
        // The period average is exact regardless of phase.
        let kind = CoefficientKind::Periodic {
            mean: 2.0f64,
            period: 0.5,
            terms: vec![SinusoidTerm { amplitude: 0.3, frequency: 4.0, phase: 1.1 }],
        };
        let m = least_mean(&kind, 0.5, 2.0).unwrap();
        assert_eq!(m.value, 2.0);
        assert!(!m.estimate);
    }

    #[test]
    fn periodic_least_mean_rejects_short_windows() {
        let kind = sin_growth(1.0, 0.5);
        assert!(matches!(
            least_mean(&kind, 0.25, 4.0),
            Err(Error::InvalidWindow(_))
        ));
    }

    #[test]
    fn least_mean_rejects_short_horizon() {
        let kind = CoefficientKind::Constant(1.0f64);
        assert!(least_mean(&kind, 1.0, 2.0).is_err());
    }

    #[test]
    fn sampled_alternating_least_mean_is_two() {
        // Step pattern alternating between 1 and 3 with period 2, pre-sampled
        // over the whole scan range [-8, 8].  Every window whose length is a
        // multiple of the period averages to exactly 2, so the scan over
        // window_min multiples must return 2 (oracle: exact piecewise
        // integral of the pattern).
        let eps = 1e-9f64;
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut t = -8.0f64;
        while t < 8.0 - 1e-12 {
            let lo = ((t - 1e-12).div_euclid(1.0) as i64).rem_euclid(2) == 0;
            let v = if lo { 1.0 } else { 3.0 };
            times.extend_from_slice(&[t, t + 1.0 - eps]);
            values.extend_from_slice(&[v, v]);
            t += 1.0;
        }
        let kind = CoefficientKind::Sampled { times, values };
        let m = least_mean(&kind, 2.0, 8.0).unwrap();
        assert!(m.estimate);
        assert!((m.value - 2.0).abs() < 1e-6, "least mean {}", m.value);
    }

    #[test]
    fn sampled_integral_matches_hand_value() {
        let kind = CoefficientKind::Sampled {
            times: vec![0.0f64, 1.0, 2.0],
            values: vec![0.0, 1.0, 1.0],
        };
        // Triangle over [0,1] plus plateau over [1,2] plus clamped pieces.
        assert!((kind.integral(0.0, 2.0) - 1.5).abs() < 1e-14);
        assert!((kind.integral(-1.0, 0.5) - 0.125).abs() < 1e-14);
        assert!((kind.integral(1.5, 3.0) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn pair_requires_positive_bounds() {
        let a = Coefficient::new(sin_growth(0.4, 0.5)).unwrap(); // inf < 0
        let b = Coefficient::constant(1.0f64).unwrap();
        assert!(matches!(CoefficientPair::new(a, b), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn h1_margin_matches_hand_computation() {
        // a in [0.5, 1.5], b = 1, chi mu = 0.1:
        // margin = 1 - 0.1 (1 + 1.5/0.5) = 0.6.
        let a = Coefficient::new(sin_growth(1.0, 0.5)).unwrap();
        let b = Coefficient::constant(1.0f64).unwrap();
        let pair = CoefficientPair::new(a, b).unwrap();
        let rep = check_hypotheses(&pair, 0.1);
        assert!(rep.h1);
        assert!((rep.h1_margin - 0.6).abs() < 1e-9);
    }

    #[test]
    fn entire_logistic_constant_is_a_over_b() {
        let pair = CoefficientPair::constants(2.0f64, 4.0).unwrap();
        let grid = TimeGrid::new(0.0, 0.1, 11).unwrap();
        let u = entire_logistic(&pair, grid, LogisticOptions::default()).unwrap();
        assert_eq!(u.eval(3.7), 0.5);
    }

    #[test]
    fn entire_logistic_periodic_matches_closed_form_quadrature() {
        // Closed form: u*(t) = 1 / int_{-inf}^t b exp(-int_s^t a) ds with
        // analytic antiderivative of a(t) = 1 + 0.5 sin(2 pi t).  The oracle
        // truncates at depth 45 and integrates by Simpson's rule.
        let pair = CoefficientPair::new(
            Coefficient::new(sin_growth(1.0, 0.5)).unwrap(),
            Coefficient::constant(1.0f64).unwrap(),
        )
        .unwrap();
        let grid = TimeGrid::new(0.0, 0.25, 5).unwrap();
        let u = entire_logistic(&pair, grid, LogisticOptions::default()).unwrap();

        let anti = |t: f64| t - (2.0 * std::f64::consts::PI * t).cos() / (4.0 * std::f64::consts::PI);
        let oracle = |t: f64| {
            let depth = 45.0;
            let n = 90_000usize;
            let h = depth / n as f64;
            let f = |s: f64| (-(anti(t) - anti(s))).exp();
            let mut acc = f(t - depth) + f(t);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(t - depth + i as f64 * h);
            }
            1.0 / (acc * h / 3.0)
        };

        for &t in &[0.0, 0.25, 0.5, 0.75, 1.0, 2.3] {
            let expect = oracle(t);
            assert!(
                (u.eval(t) - expect).abs() < 2e-6,
                "t = {t}: {} vs oracle {expect}",
                u.eval(t)
            );
        }
    }

    #[test]
    fn entire_logistic_periodicity_survives_relax_doubling() {
        let pair = CoefficientPair::new(
            Coefficient::new(sin_growth(1.0, 0.5)).unwrap(),
            Coefficient::constant(1.0f64).unwrap(),
        )
        .unwrap();
        let grid = TimeGrid::new(0.0, 0.1, 11).unwrap();
        let short = entire_logistic(
            &pair,
            grid,
            LogisticOptions { tol_ode: 1e-8, t_relax: Some(40.0) },
        )
        .unwrap();
        let long = entire_logistic(
            &pair,
            grid,
            LogisticOptions { tol_ode: 1e-8, t_relax: Some(80.0) },
        )
        .unwrap();
        for &t in &[0.0, 0.31, 0.77, 1.0] {
            assert!((short.eval(t) - long.eval(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn entire_logistic_wraps_periodically() {
        let pair = CoefficientPair::new(
            Coefficient::new(sin_growth(1.0, 0.5)).unwrap(),
            Coefficient::constant(1.0f64).unwrap(),
        )
        .unwrap();
        let grid = TimeGrid::new(0.0, 0.1, 11).unwrap();
        let u = entire_logistic(&pair, grid, LogisticOptions::default()).unwrap();
        assert!((u.eval(0.3) - u.eval(5.3)).abs() < 1e-9);
        assert!((u.eval(0.3) - u.eval(-1.7)).abs() < 1e-9);
    }
}
