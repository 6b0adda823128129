//! Scalar front constants: decay rates, speeds, and the sub/super-solution
//! parameters.
//!
//! The linearization of the model at the invaded state selects exponential
//! profiles `e^{-kappa x}` moving at speed `c_kappa(t) = (a(t)+kappa^2)/kappa`.
//! Chemotaxis restricts the admissible decay rates through the increasing
//! function
//!
//! ```text
//! eta(kappa) = kappa (sqrt(lambda - kappa^2) + kappa) / (lambda - kappa^2)
//! ```
//!
//! whose level set at `(b_inf - chi mu)/(chi mu)` defines the critical rate
//! `kappa_chi`.  Fronts exist for every `kappa < min{kappa_chi, sqrt(a_lower)}`
//! and the least admissible mean speed is `c_star = (a_lower + k*^2)/k*` at
//! `k* = min{kappa_chi, sqrt(a_lower)}`.  The remaining constants
//! (`epsilon, A0, A1, A2, d, delta0` and the exponent shift `A(t)`) calibrate
//! the explicit sub- and super-solutions that trap a front.

use crate::coefficients::{check_hypotheses, Coefficient, CoefficientKind, CoefficientPair, SinusoidTerm};
use crate::error::{Error, Result};
use crate::scalar::{bisect, golden_min, Real};

/// Chemotaxis parameters: sensitivity `chi`, production `mu`, degradation
/// `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChemoParams<T> {
    pub chi: T,
    pub mu: T,
    pub lambda: T,
}

impl<T: Real> ChemoParams<T> {
    pub fn new(chi: T, mu: T, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !(mu > T::zero()) || !(chi >= T::zero()) {
            return Err(Error::Domain(format!(
                "need lambda > 0, mu > 0, chi >= 0; got lambda={lambda}, mu={mu}, chi={chi}"
            )));
        }
        Ok(Self { chi, mu, lambda })
    }

    /// The product `chi * mu`, the only combination entering the estimates.
    pub fn chi_mu(&self) -> T {
        self.chi * self.mu
    }
}

/// `eta(kappa) = kappa (sqrt(lambda-kappa^2)+kappa)/(lambda-kappa^2)`,
/// strictly increasing from 0 to infinity on `(0, sqrt(lambda))`.
pub fn eta<T: Real>(kappa: T, lambda: T) -> Result<T> {
    if !(kappa > T::zero()) || !(kappa * kappa < lambda) {
        return Err(Error::Domain(format!(
            "eta needs 0 < kappa < sqrt(lambda); got kappa={kappa}, lambda={lambda}"
        )));
    }
    let den = lambda - kappa * kappa;
    Ok(kappa * (den.sqrt() + kappa) / den)
}

/// Critical decay rate allowed by chemotaxis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaChi<T> {
    pub value: T,
    /// `chi = 0`: the constraint is vacuous and `value` is the sentinel
    /// `sqrt(lambda)`.
    pub chemotaxis_absent: bool,
}

/// Solves `eta(kappa) = (b_inf - chi mu)/(chi mu)` on `(0, sqrt(lambda))`.
pub fn kappa_chi<T: Real>(params: &ChemoParams<T>, b_inf: T) -> Result<KappaChi<T>> {
    let chi_mu = params.chi_mu();
    if chi_mu == T::zero() {
        return Ok(KappaChi { value: params.lambda.sqrt(), chemotaxis_absent: true });
    }
    if !(b_inf > chi_mu) {
        return Err(Error::Hypothesis(format!(
            "need b_inf > chi mu; got b_inf={b_inf}, chi mu={chi_mu}"
        )));
    }
    let ratio = (b_inf - chi_mu) / chi_mu;
    let root_l = params.lambda.sqrt();
    // eta runs from 0 to infinity across the bracket, so the sign change is
    // guaranteed; bisection runs down to the last representable midpoint.
    // The margins stay an epsilon multiple away from the endpoints so the
    // bracket survives rounding in single precision as well.
    let margin = T::of(1e-15).max(T::epsilon() * T::of(4.0));
    let lo = root_l * T::of(1e-12).max(T::epsilon());
    let hi = root_l * (T::one() - margin);
    let value = bisect(lo, hi, |k| eta(k, params.lambda).unwrap() - ratio, T::zero());
    Ok(KappaChi { value, chemotaxis_absent: false })
}

/// Least mean wave speed and the rate achieving it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CStar<T> {
    pub kappa_star: T,
    pub c_star: T,
    pub kappa_chi: KappaChi<T>,
}

/// `kappa* = min{kappa_chi, sqrt(a_lower)}` and
/// `c_star = (a_lower + kappa*^2)/kappa*`; the branch `kappa_chi >=
/// sqrt(a_lower)` returns `2 sqrt(a_lower)` exactly.
pub fn c_star<T: Real>(params: &ChemoParams<T>, pair: &CoefficientPair<T>) -> Result<CStar<T>> {
    let report = check_hypotheses(pair, params.chi_mu());
    if !report.h1 {
        return Err(Error::Hypothesis(format!(
            "saturation dominance fails: b_inf - chi mu (1 + a_sup/a_inf) = {}",
            report.h1_margin
        )));
    }
    let kc = kappa_chi(params, pair.b_inf())?;
    let root_a = pair.a_lower_mean().sqrt();
    if kc.value >= root_a {
        Ok(CStar { kappa_star: root_a, c_star: T::of(2.0) * root_a, kappa_chi: kc })
    } else {
        let k = kc.value;
        Ok(CStar {
            kappa_star: k,
            c_star: (pair.a_lower_mean() + k * k) / k,
            kappa_chi: kc,
        })
    }
}

/// The speed `c_kappa(t) = (a(t) + kappa^2)/kappa` of the exponential
/// profile with decay rate `kappa`, with its least mean and displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSpeed<T> {
    a: Coefficient<T>,
    kappa: T,
}

impl<T: Real> WaveSpeed<T> {
    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn eval(&self, t: T) -> T {
        (self.a.eval(t) + self.kappa * self.kappa) / self.kappa
    }

    /// `(a_lower + kappa^2)/kappa`.
    pub fn least_mean(&self) -> T {
        (self.a.lower_mean() + self.kappa * self.kappa) / self.kappa
    }

    /// Displacement `C(t) = int_0^t c_kappa(s) ds`, exact through the
    /// coefficient antiderivative.
    pub fn displacement(&self, t: T) -> T {
        (self.a.kind().integral_from_zero(t) + self.kappa * self.kappa * t) / self.kappa
    }
}

pub fn wave_speed_fn<T: Real>(pair: &CoefficientPair<T>, kappa: T) -> Result<WaveSpeed<T>> {
    if !(kappa > T::zero()) {
        return Err(Error::Domain(format!("wave speed needs kappa > 0, got {kappa}")));
    }
    Ok(WaveSpeed { a: pair.a.clone(), kappa })
}

/// Midpoint of the feasible interval for the secondary decay rate gap
/// `epsilon`.
///
/// Feasibility requires `epsilon < min{kappa, (a_lower - kappa^2)/kappa}`
/// and, when chemotaxis is active, that the secondary rate keep the
/// saturation excess positive:
///
/// ```text
/// (b_inf - chi mu)/(chi mu) > ((kappa+eps)(sqrt(lambda-kappa^2)+kappa) - lambda)/(lambda-kappa^2)
/// ```
///
/// The right side is affine in `epsilon`, so its cap is explicit; the
/// returned value is half the combined cap and satisfies both conditions
/// strictly.
pub fn choose_epsilon<T: Real>(
    pair: &CoefficientPair<T>,
    params: &ChemoParams<T>,
    kappa: T,
) -> Result<T> {
    let a_low = pair.a_lower_mean();
    let kc = kappa_chi(params, pair.b_inf())?;
    if !(kappa > T::zero()) || !(kappa < kc.value.min(a_low.sqrt())) {
        return Err(Error::Domain(format!(
            "need 0 < kappa < min(kappa_chi, sqrt(a_lower)) = {}; got {kappa}",
            kc.value.min(a_low.sqrt())
        )));
    }
    let mut cap = kappa.min((a_low - kappa * kappa) / kappa);
    let chi_mu = params.chi_mu();
    if chi_mu > T::zero() {
        let ratio = (pair.b_inf() - chi_mu) / chi_mu;
        let den = params.lambda - kappa * kappa;
        let cap2 = (ratio * den + params.lambda) / (den.sqrt() + kappa) - kappa;
        cap = cap.min(cap2);
    }
    assert!(cap > T::zero(), "feasible interval for epsilon is empty");
    Ok(cap.half())
}

/// Bounded periodic exponent shift `A(t)` compensating the oscillation of
/// the growth coefficient: `A(t) = (eps/kappa) int_0^t (a_mean - a(s)) ds`,
/// identically zero for constant coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentShift<T> {
    scale: T,
    terms: Vec<SinusoidTerm<T>>,
    sup_norm: T,
    max_value: T,
}

impl<T: Real> ExponentShift<T> {
    fn zero() -> Self {
        Self { scale: T::zero(), terms: Vec::new(), sup_norm: T::zero(), max_value: T::zero() }
    }

    fn from_growth(kind: &CoefficientKind<T>, scale: T, period: T) -> Self {
        let terms = match kind {
            CoefficientKind::Periodic { terms, .. } => terms.clone(),
            _ => Vec::new(),
        };
        let mut shift = Self { scale, terms, sup_norm: T::zero(), max_value: T::zero() };
        if shift.terms.is_empty() {
            return shift;
        }
        // A(0) = 0, so the extremes over one period straddle 0.
        let samples = 2048usize;
        let h = period / T::of(samples as f64);
        let (mut max_i, mut min_i) = (0usize, 0usize);
        let (mut max_v, mut min_v) = (T::zero(), T::zero());
        for i in 1..=samples {
            let v = shift.eval(h * T::of(i as f64));
            if v > max_v {
                max_v = v;
                max_i = i;
            }
            if v < min_v {
                min_v = v;
                min_i = i;
            }
        }
        let polish = |i: usize, sign: T| {
            let lo = h * T::of(i as f64 - 1.0);
            let hi = h * T::of(i as f64 + 1.0);
            let t = golden_min(lo, hi, |t| sign * shift.eval(t), 90);
            shift.eval(t)
        };
        let hi = polish(max_i, -T::one()).max(T::zero());
        let lo = polish(min_i, T::one()).min(T::zero());
        shift.max_value = hi;
        shift.sup_norm = hi.max(-lo);
        shift
    }

    pub fn eval(&self, t: T) -> T {
        let mut v = T::zero();
        for term in &self.terms {
            let w = term.omega();
            // int_0^t -amp sin(w s + phase) ds
            v += term.amplitude * ((w * t + term.phase).cos() - term.phase.cos()) / w;
        }
        self.scale * v
    }

    pub fn derivative(&self, t: T) -> T {
        let mut v = T::zero();
        for term in &self.terms {
            v -= term.eval(t);
        }
        self.scale * v
    }

    pub fn sup_norm(&self) -> T {
        self.sup_norm
    }

    /// `sup_t A(t)` (nonnegative since `A(0) = 0`).
    pub fn max_value(&self) -> T {
        self.max_value
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Calibrated constants of the sub/super-solution family for one decay rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontParams<T> {
    pub kappa: T,
    pub epsilon: T,
    pub kappa_chi: T,
    pub c_star: T,
    pub a0: T,
    pub a1: T,
    pub a2: T,
    pub d: T,
    pub delta0: T,
    pub shift: ExponentShift<T>,
}

impl<T: Real> FrontParams<T> {
    /// Left crossing of the lower profile: `x^-(t) = (ln d + A(t))/epsilon`.
    pub fn x_minus(&self, t: T) -> T {
        (self.d.ln() + self.shift.eval(t)) / self.epsilon
    }

    /// Interior maximum: `x^+(t) = (ln((kappa+eps) d / kappa) + A(t))/epsilon`.
    pub fn x_plus(&self, t: T) -> T {
        let k = self.kappa;
        let e = self.epsilon;
        (((k + e) * self.d / k).ln() + self.shift.eval(t)) / e
    }

    /// `x^+ - x^- = ln((kappa+eps)/kappa)/epsilon`, independent of time.
    pub fn gap(&self) -> T {
        ((self.kappa + self.epsilon) / self.kappa).ln() / self.epsilon
    }

    /// Crest height estimate `(eps/kappa) e^{A(t) - (kappa+eps) x^+(t)}` of
    /// the lower profile.  The profile's actual value at `x^+(t)` is `d`
    /// times this; since `d >= 1` the estimate never overshoots the crest,
    /// so every level below it is guaranteed to be crossed on the rising
    /// flank.
    pub fn peak(&self, t: T) -> T {
        let k = self.kappa;
        let e = self.epsilon;
        (e / k) * (self.shift.eval(t) - (k + e) * self.x_plus(t)).exp()
    }

    /// `inf_t` of the peak; the shift enters as `e^{-(kappa/eps) A(t)}`, so
    /// the infimum sits at the maximum of `A`.
    pub fn peak_inf(&self) -> T {
        let k = self.kappa;
        let e = self.epsilon;
        let base = (e / k) * (((k + e) * self.d / k).ln() * (-(k + e) / e)).exp();
        base * (-(k / e) * self.shift.max_value()).exp()
    }
}

/// Builds the calibrated [`FrontParams`] for a decay rate and gap chosen by
/// [`choose_epsilon`].
///
/// `A0 = (eps/2 kappa)(a_lower - kappa(kappa+eps))`; `A1`/`A2` are the
/// saturation-excess constants controlling the super/sub-solution
/// corrections; `d = e^{|A|_inf}(1 + A0/A1)`; `delta0` is half the smaller
/// of its two caps (uniform-positivity cap and the peak infimum).  Sampled
/// coefficients are rejected: the exponent shift needs a closed-form
/// antiderivative.
pub fn front_constants<T: Real>(
    pair: &CoefficientPair<T>,
    params: &ChemoParams<T>,
    kappa: T,
    epsilon: T,
) -> Result<FrontParams<T>> {
    if pair.is_sampled() {
        return Err(Error::UnsupportedCoefficient(
            "front constants need constant or periodic coefficients".into(),
        ));
    }
    let report = check_hypotheses(pair, params.chi_mu());
    if !report.h1 {
        return Err(Error::Hypothesis(format!(
            "saturation dominance fails: margin = {}",
            report.h1_margin
        )));
    }
    let a_low = pair.a_lower_mean();
    let k = kappa;
    let e = epsilon;
    if !(k > T::zero()) || !(e > T::zero()) || !(e < k.min((a_low - k * k) / k)) {
        return Err(Error::Domain(format!(
            "epsilon {e} outside (0, min(kappa, (a_lower-kappa^2)/kappa)) at kappa {k}"
        )));
    }
    let a0 = (e / (T::of(2.0) * k)) * (a_low - k * (k + e));
    debug_assert!(a0 > T::zero());

    let chi_mu = params.chi_mu();
    let (a1, a2) = if chi_mu > T::zero() {
        let den = params.lambda - k * k;
        if !(den > T::zero()) {
            return Err(Error::Domain(format!(
                "active chemotaxis needs kappa < sqrt(lambda); got kappa={k}, lambda={}",
                params.lambda
            )));
        }
        let s = den.sqrt();
        (
            pair.b_sup() - chi_mu + chi_mu * (k * (s + k) + params.lambda) / den,
            pair.b_inf() - chi_mu + chi_mu * (params.lambda - (k + e) * (s + k)) / den,
        )
    } else {
        (pair.b_sup(), pair.b_inf())
    };
    if !(a1 > T::zero()) || !(a2 > T::zero()) {
        return Err(Error::ConstantSign(format!(
            "correction constants must be positive, got A1={a1}, A2={a2}; \
             the secondary rate gap is too large"
        )));
    }

    let shift = match pair.period() {
        None => ExponentShift::zero(),
        Some(period) => ExponentShift::from_growth(pair.a.kind(), e / k, period),
    };
    let d = shift.sup_norm().exp() * (T::one() + a0 / a1);

    let kc = kappa_chi(params, pair.b_inf())?;
    let cs = c_star(params, pair)?;

    let mut front = FrontParams {
        kappa: k,
        epsilon: e,
        kappa_chi: kc.value,
        c_star: cs.c_star,
        a0,
        a1,
        a2,
        d,
        delta0: T::zero(),
        shift,
    };

    let cap_pos = report.h1_margin / ((pair.b_inf() - chi_mu) * (pair.b_sup() - chi_mu));
    front.delta0 = cap_pos.min(front.peak_inf()).half();

    // The shift must make the drift inequality hold with margin:
    // A'(t) + eps (c_kappa(t) - 2 kappa - eps) >= 2 A0 at all times.  The
    // construction gives equality analytically; sampling guards the
    // implementation.
    let speed = wave_speed_fn(pair, k)?;
    let period = pair.period().unwrap_or(T::one());
    let samples = 10_000usize;
    let floor = (T::of(2.0) * a0) * (T::one() - T::of(1e-9));
    for i in 0..=samples {
        let t = period * T::of(i as f64) / T::of(samples as f64);
        let drift = front.shift.derivative(t) + e * (speed.eval(t) - T::of(2.0) * k - e);
        if drift < floor {
            return Err(Error::ConstantSign(format!(
                "exponent shift fails the drift inequality at t={t}: {drift} < {floor}"
            )));
        }
    }
    Ok(front)
}

/// Degradation threshold above which the least mean speed equals
/// `2 sqrt(a_lower)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaChi<T> {
    pub value: T,
    /// `chi = 0`: every `lambda` qualifies; `value` is the sentinel
    /// `a_lower`.
    pub chemotaxis_absent: bool,
}

/// Solves `sqrt(a_lower)(sqrt(lambda - a_lower) + sqrt(a_lower)) /
/// (lambda - a_lower) = (b_inf - chi mu)/(chi mu)` for `lambda`; the left
/// side decreases strictly from infinity to 0 on `(a_lower, inf)`.
pub fn lambda_threshold<T: Real>(
    params: &ChemoParams<T>,
    pair: &CoefficientPair<T>,
) -> Result<LambdaChi<T>> {
    let chi_mu = params.chi_mu();
    let a_low = pair.a_lower_mean();
    if chi_mu == T::zero() {
        return Ok(LambdaChi { value: a_low, chemotaxis_absent: true });
    }
    if !(pair.b_inf() > chi_mu) {
        return Err(Error::Hypothesis(format!(
            "need b_inf > chi mu; got b_inf={}, chi mu={chi_mu}",
            pair.b_inf()
        )));
    }
    let ratio = (pair.b_inf() - chi_mu) / chi_mu;
    let root_a = a_low.sqrt();
    let g = |lam: T| root_a * ((lam - a_low).sqrt() + root_a) / (lam - a_low) - ratio;
    // epsilon-scaled margin: keeps the left endpoint strictly above a_lower
    // in every working precision.
    let lo = a_low * (T::one() + T::of(1e-13).max(T::epsilon() * T::of(4.0)));
    let mut hi = a_low + a_low.max(T::one());
    while g(hi) > T::zero() {
        hi = a_low + (hi - a_low) * T::of(2.0);
    }
    Ok(LambdaChi { value: bisect(lo, hi, g, T::zero()), chemotaxis_absent: false })
}

/// Sufficient smallness criterion on `chi mu` for the least mean speed to
/// equal `2 sqrt(a_lower)` when `lambda > a_lower`:
///
/// ```text
/// chi mu < min{ a_inf b_inf / (a_inf + a_sup),
///               b_inf (lambda - a_lower) /
///                 (lambda - a_lower + sqrt(a_lower)(sqrt(lambda - a_lower) + sqrt(a_lower))) }
/// ```
pub fn small_chi_criterion<T: Real>(
    params: &ChemoParams<T>,
    pair: &CoefficientPair<T>,
) -> Result<bool> {
    let a_low = pair.a_lower_mean();
    if !(params.lambda > a_low) {
        return Err(Error::Domain(format!(
            "criterion needs lambda > a_lower; got lambda={}, a_lower={a_low}",
            params.lambda
        )));
    }
    let chi_mu = params.chi_mu();
    if chi_mu == T::zero() {
        return Ok(true);
    }
    let cap1 = pair.a_inf() * pair.b_inf() / (pair.a_inf() + pair.a_sup());
    let gap = params.lambda - a_low;
    let root_a = a_low.sqrt();
    let cap2 = pair.b_inf() * gap / (gap + root_a * (gap.sqrt() + root_a));
    Ok(chi_mu < cap1.min(cap2))
}
