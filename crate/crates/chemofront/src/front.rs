//! The explicit sub/super-solution family trapping a front, and the
//! discrete evolution operator used to verify it.
//!
//! In the frame moving with speed `c_kappa(t)` the relevant profiles are
//!
//! ```text
//! phi_kappa(x)      = e^{-kappa x}                     (linear-front envelope)
//! phi_plus(x)       = min{phi_kappa, a_sup/(b_inf - chi mu)}   (upper barrier)
//! phi_lower(x, t)   = phi_kappa(x) - d e^{A(t)} e^{-(kappa+eps) x}
//! phi_minus(x, t)   = delta0 left of the junction, phi_lower right of it
//! ```
//!
//! `phi_lower` crosses zero at `x^-(t)`, peaks at `x^+(t)` and matches the
//! `e^{-kappa x}` decay at infinity; `phi_minus` splices the plateau
//! `delta0` onto the rising flank to form a positive lower barrier.  The
//! operator
//!
//! ```text
//! L(u) = u_t - u_xx - (c_kappa(t) - chi psi_x) u_x
//!        - (a(t) - chi lambda psi - (b(t) - chi mu) u) u
//! ```
//!
//! with `psi` the chemoattractant field of a comparison profile `phi`, has a
//! sign on each family member (nonnegative on the barriers from above,
//! nonpositive on those from below); [`residual_l`] evaluates it with
//! central differences so those signs can be checked to `O(dx^2)`.

use crate::coefficients::CoefficientPair;
use crate::dispersion::{
    choose_epsilon, front_constants, wave_speed_fn, ChemoParams, FrontParams, WaveSpeed,
};
use crate::elliptic::{green_convolve, EllipticField};
use crate::error::{Error, Result};
use crate::grid::{GridProfile, TailSpec};
use crate::scalar::{bisect, Real};

/// `e^{-kappa x}`.
pub fn phi_kappa<T: Real>(x: T, kappa: T) -> T {
    (-kappa * x).exp()
}

/// One decay rate's worth of front machinery: calibrated constants plus the
/// scenario they were built from.
#[derive(Debug, Clone)]
pub struct FrontFamily<T> {
    pub params: FrontParams<T>,
    pub chemo: ChemoParams<T>,
    pub coeffs: CoefficientPair<T>,
    speed: WaveSpeed<T>,
}

/// Turning points of the lower profile at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoints<T> {
    pub x_minus: T,
    pub x_plus: T,
    /// Guaranteed hump height: `phi_lower(x_plus, t)` equals `d` times
    /// this, so any level below `peak` is crossed on the rising flank.
    pub peak: T,
}

impl<T: Real> FrontFamily<T> {
    /// Builds the family at rate `kappa` with the gap `epsilon` chosen
    /// automatically (midpoint of its feasible interval).
    pub fn new(coeffs: CoefficientPair<T>, chemo: ChemoParams<T>, kappa: T) -> Result<Self> {
        let epsilon = choose_epsilon(&coeffs, &chemo, kappa)?;
        Self::with_epsilon(coeffs, chemo, kappa, epsilon)
    }

    pub fn with_epsilon(
        coeffs: CoefficientPair<T>,
        chemo: ChemoParams<T>,
        kappa: T,
        epsilon: T,
    ) -> Result<Self> {
        let params = front_constants(&coeffs, &chemo, kappa, epsilon)?;
        let speed = wave_speed_fn(&coeffs, kappa)?;
        Ok(Self { params, chemo, coeffs, speed })
    }

    pub fn speed(&self) -> &WaveSpeed<T> {
        &self.speed
    }

    /// Saturation plateau `a_sup/(b_inf - chi mu)` capping every profile.
    pub fn plateau(&self) -> T {
        self.coeffs.a_sup() / (self.coeffs.b_inf() - self.chemo.chi_mu())
    }

    /// Upper barrier `min{e^{-kappa x}, plateau}`.
    pub fn phi_plus(&self, x: T) -> T {
        phi_kappa(x, self.params.kappa).min(self.plateau())
    }

    /// Lower comparison profile, negative left of `x^-(t)`.
    pub fn phi_lower(&self, x: T, t: T) -> T {
        let p = &self.params;
        phi_kappa(x, p.kappa) - p.d * (p.shift.eval(t) - (p.kappa + p.epsilon) * x).exp()
    }

    /// Analytic time derivative of [`Self::phi_lower`].
    pub fn phi_lower_dt(&self, x: T, t: T) -> T {
        let p = &self.params;
        -p.d * p.shift.derivative(t) * (p.shift.eval(t) - (p.kappa + p.epsilon) * x).exp()
    }

    pub fn turning_points(&self, t: T) -> TurningPoints<T> {
        TurningPoints {
            x_minus: self.params.x_minus(t),
            x_plus: self.params.x_plus(t),
            peak: self.params.peak(t),
        }
    }

    /// The junction `x(t; delta0)`: unique root of `phi_lower(., t) =
    /// delta0` on the rising flank `(x^-(t), x^+(t))`.
    pub fn junction(&self, t: T) -> Result<T> {
        let tp = self.turning_points(t);
        let delta0 = self.params.delta0;
        // Gate on the conservative height estimate: below it, the level is
        // certain to be crossed before the crest.
        if !(delta0 < tp.peak) {
            return Err(Error::JunctionNotFound(format!(
                "plateau level {delta0} is not below the guaranteed hump height {}",
                tp.peak
            )));
        }
        Ok(bisect(
            tp.x_minus,
            tp.x_plus,
            |x| self.phi_lower(x, t) - delta0,
            T::zero(),
        ))
    }

    /// Lower barrier: `delta0` left of the junction, `phi_lower` right of
    /// it.  Continuous, positive, and below [`Self::phi_plus`].
    pub fn phi_minus(&self, x: T, t: T) -> Result<T> {
        let j = self.junction(t)?;
        Ok(if x <= j { self.params.delta0 } else { self.phi_lower(x, t) })
    }
}

/// Source of the time derivative entering the discrete operator.
pub enum TimeDeriv<'a, T> {
    /// Profile steady in the moving frame.
    Zero,
    /// Analytic derivative sampled on the grid.
    Profile(&'a GridProfile<T>),
    /// Backward difference `(u - prev)/h`.
    Backward { prev: &'a GridProfile<T>, h: T },
}

/// Evaluates the operator residual of `u` at time `t` with the
/// chemoattractant field generated by `phi`.
///
/// Interior nodes use central differences; the two boundary entries carry
/// no estimate and are set to zero.
pub fn residual_l<T: Real>(
    u: &GridProfile<T>,
    t: T,
    phi: &GridProfile<T>,
    phi_tails: &TailSpec<T>,
    dt: TimeDeriv<'_, T>,
    family: &FrontFamily<T>,
) -> Result<GridProfile<T>> {
    if !u.same_grid(phi) {
        return Err(Error::Shape("comparison profile lives on a different grid".into()));
    }
    let field = green_convolve(phi, phi_tails, family.chemo.lambda, family.chemo.mu)?;
    residual_l_with_field(u, t, &field, dt, family)
}

/// Same as [`residual_l`] with a precomputed field, for callers that hold
/// `phi` fixed across evaluations.
pub fn residual_l_with_field<T: Real>(
    u: &GridProfile<T>,
    t: T,
    field: &EllipticField<T>,
    dt: TimeDeriv<'_, T>,
    family: &FrontFamily<T>,
) -> Result<GridProfile<T>> {
    if !u.same_grid(&field.psi) {
        return Err(Error::Shape("field lives on a different grid".into()));
    }
    match &dt {
        TimeDeriv::Profile(p) if !u.same_grid(p) => {
            return Err(Error::Shape("time derivative lives on a different grid".into()));
        }
        TimeDeriv::Backward { prev, .. } if !u.same_grid(prev) => {
            return Err(Error::Shape("previous step lives on a different grid".into()));
        }
        _ => {}
    }

    let n = u.n();
    let dx = u.dx();
    let chi = family.chemo.chi;
    let chi_mu = family.chemo.chi_mu();
    let lambda = family.chemo.lambda;
    let c = family.speed.eval(t);
    let a = family.coeffs.a.eval(t);
    let b = family.coeffs.b.eval(t);
    let vals = u.values();
    let psi = field.psi.values();
    let dpsi = field.dpsi.values();

    let mut out = vec![T::zero(); n];
    let two_dx = T::of(2.0) * dx;
    let dx2 = dx * dx;
    for i in 1..n - 1 {
        let ut = match &dt {
            TimeDeriv::Zero => T::zero(),
            TimeDeriv::Profile(p) => p.values()[i],
            TimeDeriv::Backward { prev, h } => (vals[i] - prev.values()[i]) / *h,
        };
        let d1 = (vals[i + 1] - vals[i - 1]) / two_dx;
        let d2 = (vals[i + 1] - T::of(2.0) * vals[i] + vals[i - 1]) / dx2;
        let drift = c - chi * dpsi[i];
        let growth = a - chi * lambda * psi[i] - (b - chi_mu) * vals[i];
        out[i] = ut - d2 - drift * d1 - growth * vals[i];
    }
    GridProfile::new(u.x0(), dx, out)
}
