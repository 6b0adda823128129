//! Front profile construction in the moving frame.
//!
//! The profile solves a fixed-point problem: the equation for the density
//! contains the chemoattractant of the profile itself.  The construction
//! splits that circularity into two nested loops.
//!
//! * Inner loop ([`inner_limit`]): freeze the chemoattractant at the field
//!   of the current comparison profile and run the parabolic evolution from
//!   that profile until it settles, either to a steady state (constant
//!   coefficients) or to a fixed point of the period map (periodic
//!   coefficients).  Starting from the upper barrier the evolution is
//!   monotone decreasing, so settling is guaranteed; a pullback window that
//!   fails to settle after its doubling budget is a hard error.
//! * Outer loop ([`fixed_point`]): feed the settled profile back in as the
//!   new comparison profile and repeat until successive settled profiles
//!   agree within `tol_wave`.
//!
//! Every iterate must stay inside the invariant set bounded by the lower
//! and upper barriers; an escape means the inputs violate the construction
//! hypotheses and is reported as such rather than patched over.

use crate::coefficients::{entire_logistic, CoefficientPair, EntireLogistic, LogisticOptions};
use crate::dispersion::ChemoParams;
use crate::elliptic::{green_convolve, EllipticField};
use crate::error::{Error, Result};
use crate::front::{residual_l_with_field, FrontFamily, TimeDeriv};
use crate::grid::{GridProfile, GridSpec, TailSpec, TimeGrid};
use crate::parabolic::{LeftBc, MovingStepper, PhiSource, RightBc, SolverState};
use crate::scalar::Real;

/// Knobs of the construction.  The defaults reproduce the reference
/// configuration: `tol_wave = 1e-4` on the outer fixed point, a tenth of
/// that on the inner settling, 64 phase slices per period, and a pullback
/// window starting at `40 / a_inf` with at most 4 doublings.
#[derive(Debug, Clone, Copy)]
pub struct WaveOptions<T> {
    pub tol_wave: T,
    pub max_outer: usize,
    pub slices_per_period: usize,
    /// Initial settling window; `None` resolves to `40 / a_inf`.
    pub back_window: Option<T>,
    pub max_doublings: u32,
    /// Target time step; periodic runs shrink it so slices align exactly.
    pub dt: T,
    /// Rerun the whole construction from a second seed and record the gap.
    pub check_uniqueness: bool,
}

impl<T: Real> Default for WaveOptions<T> {
    fn default() -> Self {
        Self {
            tol_wave: T::of(1e-4),
            max_outer: 50,
            slices_per_period: 64,
            back_window: None,
            max_doublings: 4,
            dt: T::of(5e-3),
            check_uniqueness: false,
        }
    }
}

impl<T: Real> WaveOptions<T> {
    fn tol_inner(&self) -> T {
        self.tol_wave / T::of(10.0)
    }

    fn window_cap(&self, a_inf: T) -> T {
        let w0 = self.back_window.unwrap_or(T::of(40.0) / a_inf);
        w0 * T::of(f64::powi(2.0, self.max_doublings as i32))
    }
}

/// A constructed front profile in the moving frame, with its quality
/// measurements.
///
/// `profiles[j]` is the density at phase `times[j]`; constant coefficients
/// give a single steady slice.  `attractant[j]` is the chemoattractant of
/// `profiles[j]`.  The right tail is normalized to `amplitude e^{-kappa x}`
/// by the construction's boundary pin.
#[derive(Debug, Clone)]
pub struct WaveSolution<T> {
    pub kappa: T,
    pub epsilon: T,
    pub period: Option<T>,
    pub times: Vec<T>,
    pub profiles: Vec<GridProfile<T>>,
    pub attractant: Vec<GridProfile<T>>,
    pub amplitude: T,
    pub least_mean_speed: T,
    /// Sup of the discrete operator residual over interior nodes and all
    /// slices.  For periodic coefficients the time derivative comes from
    /// centered slice differences, so this carries an `O(slice_dt^2)`
    /// floor on top of the spatial one.
    pub residual_linf: T,
    /// Periodic: `sup |U(., period) - U(., 0)|` after settling.  Constant:
    /// the final per-step change, a steadiness defect.
    pub periodicity_defect: T,
    /// Worst relative mismatch against `u*(t)` at the left station.
    pub left_defect: T,
    /// Worst relative mismatch against the pinned exponential at the right
    /// station.
    pub right_defect: T,
    /// `U(0, 0)`, fixing the representative among translates.
    pub anchor: T,
    /// Where `U(., 0)` falls through half of `u*(0)`.
    pub half_level_crossing: T,
    pub outer_iterations: usize,
    /// Successive outer distances, for convergence diagnostics.
    pub outer_history: Vec<T>,
    /// Sup distance to the profile rebuilt from a second seed, when
    /// requested.  A gap above `10 tol_wave` suggests the configuration
    /// admits distinct fixed points and deserves scrutiny.
    pub uniqueness_gap: Option<T>,
}

impl<T: Real> WaveSolution<T> {
    /// Profile value at `(x, t)`, interpolating linearly in space and in
    /// phase (wrapping over the period).
    pub fn eval(&self, x: T, t: T) -> T {
        match self.period {
            None => self.profiles[0].interp(x),
            Some(p) => {
                let m = self.profiles.len();
                let mut s = t / p;
                s -= s.floor();
                let pos = s * T::of(m as f64);
                let k = (pos.floor().as_f64() as usize).min(m - 1);
                let w = pos - T::of(k as f64);
                let lo = self.profiles[k].interp(x);
                let hi = self.profiles[(k + 1) % m].interp(x);
                lo + (hi - lo) * w
            }
        }
    }
}

/// Asymptotic quality of a profile: relative defects against the connected
/// states, measured a fixed margin inside each end of the domain.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticReport<T> {
    pub x_left: T,
    pub x_right: T,
    pub left_defect: T,
    pub right_defect: T,
}

/// Measures how well the profile attains `u*(t)` on the left (station
/// `x0 + 5`) and the pinned exponential decay on the right (station
/// `x_end - 10`).
pub fn check_asymptotics<T: Real>(
    wave: &WaveSolution<T>,
    star: &EntireLogistic<T>,
) -> AsymptoticReport<T> {
    let grid = &wave.profiles[0];
    let x_left = grid.x0() + T::of(5.0);
    let x_right = grid.x_end() - T::of(10.0);
    let mut left = T::zero();
    let mut right = T::zero();
    for (j, u) in wave.profiles.iter().enumerate() {
        let t = wave.times[j];
        let l = (u.interp(x_left) / star.eval(t) - T::one()).abs();
        let tail = wave.amplitude * (-wave.kappa * x_right).exp();
        let r = (u.interp(x_right) / tail - T::one()).abs();
        left = left.max(l);
        right = right.max(r);
    }
    AsymptoticReport { x_left, x_right, left_defect: left, right_defect: right }
}

/// Leading-edge amplitude read a little inside the right boundary, where
/// the pin has not flattened genuine profile shape.
fn refit_amplitude<T: Real>(u: &GridProfile<T>, kappa: T) -> T {
    let x_ref = u.x_end() - T::of(5.0);
    u.interp(x_ref) * (kappa * x_ref).exp()
}

fn fields_of<T: Real>(
    family: &FrontFamily<T>,
    slices: &[GridProfile<T>],
) -> Result<Vec<EllipticField<T>>> {
    slices
        .iter()
        .map(|s| {
            let tails = TailSpec::plateau_left_exponential_right(s, family.params.kappa);
            green_convolve(s, &tails, family.chemo.lambda, family.chemo.mu)
        })
        .collect()
}

fn sup_change<T: Real>(u: &[T], prev: &[T]) -> T {
    let mut m = T::zero();
    for i in 0..u.len() {
        m = m.max((u[i] - prev[i]).abs());
    }
    m
}

/// Settles the evolution under the frozen field of `slices`, starting from
/// its phase-0 slice.  Returns the settled slices and the defect of the
/// settling (period-map distance, or final step change for steady runs).
pub fn inner_limit<T: Real>(
    family: &FrontFamily<T>,
    star: &EntireLogistic<T>,
    slices: &[GridProfile<T>],
    opts: &WaveOptions<T>,
) -> Result<(Vec<GridProfile<T>>, T)> {
    let fields = fields_of(family, slices)?;
    let amplitude = refit_amplitude(&slices[0], family.params.kappa);
    let right = RightBc::PinnedExponential { amplitude, rate: family.params.kappa };
    let left = LeftBc::DirichletEntire(star.clone());
    let tol = opts.tol_inner();
    let w_cap = opts.window_cap(family.coeffs.a_inf());

    match family.coeffs.period() {
        None => {
            let mut stepper =
                MovingStepper::new(family, PhiSource::Steady(&fields[0]), left, right);
            let mut state = SolverState::new(slices[0].clone(), T::zero());
            let dt = opts.dt;
            let cap = (w_cap / dt).as_f64().ceil() as usize;
            let mut prev = slices[0].values().to_vec();
            let mut change;
            let mut k = 0usize;
            loop {
                stepper.step(&mut state, dt)?;
                change = sup_change(state.u.values(), &prev);
                if change < tol * dt {
                    break;
                }
                k += 1;
                if k > cap {
                    return Err(Error::BackWindow(format!(
                        "no steady state within the window budget {w_cap}; \
                         last step change {change}"
                    )));
                }
                prev.copy_from_slice(state.u.values());
            }
            Ok((vec![state.u], change))
        }
        Some(period) => {
            let m = opts.slices_per_period;
            let slice_dt = period / T::of(m as f64);
            let substeps = (slice_dt / opts.dt).as_f64().ceil().max(1.0) as usize;
            let dt_eff = slice_dt / T::of(substeps as f64);
            let mut stepper = MovingStepper::new(
                family,
                PhiSource::Periodic { period, fields: &fields },
                left,
                right,
            );
            let mut state = SolverState::new(slices[0].clone(), T::zero());
            let max_periods = (w_cap / period).as_f64().ceil() as usize;
            let mut prev_end = slices[0].values().to_vec();
            let mut periods = 0usize;
            loop {
                stepper.evolve_steps(&mut state, m * substeps, dt_eff)?;
                periods += 1;
                let diff = sup_change(state.u.values(), &prev_end);
                if diff < tol {
                    break;
                }
                if periods >= max_periods {
                    return Err(Error::BackWindow(format!(
                        "period map not settled after {periods} periods \
                         (window budget {w_cap}); last distance {diff}"
                    )));
                }
                prev_end.copy_from_slice(state.u.values());
            }
            // One more period, captured slice by slice; the extra slice at
            // phase `period` measures the periodicity defect.
            let mut out = Vec::with_capacity(m);
            out.push(state.u.clone());
            for _ in 1..m {
                stepper.evolve_steps(&mut state, substeps, dt_eff)?;
                out.push(state.u.clone());
            }
            stepper.evolve_steps(&mut state, substeps, dt_eff)?;
            let defect = sup_change(state.u.values(), out[0].values());
            Ok((out, defect))
        }
    }
}

fn phase_times<T: Real>(period: Option<T>, m: usize) -> Vec<T> {
    match period {
        None => vec![T::zero()],
        Some(p) => (0..m).map(|j| p * T::of(j as f64) / T::of(m as f64)).collect(),
    }
}

/// Every slice must stay between the barriers, up to discretization slack.
fn check_sandwich<T: Real>(
    family: &FrontFamily<T>,
    slices: &[GridProfile<T>],
    times: &[T],
) -> Result<()> {
    let dx = slices[0].dx();
    let slack = T::of(10.0) * dx * dx;
    for (slice, &t) in slices.iter().zip(times) {
        let junction = family.junction(t)?;
        for (x, v) in slice.iter_points() {
            let lower = if x <= junction {
                family.params.delta0
            } else {
                family.phi_lower(x, t)
            };
            let upper = family.phi_plus(x);
            if v < lower - slack || v > upper + slack {
                return Err(Error::SetEscape(format!(
                    "iterate left the barrier set at x = {x}, t = {t}: \
                     {v} outside [{lower}, {upper}]"
                )));
            }
        }
    }
    Ok(())
}

struct SolveOutcome<T> {
    slices: Vec<GridProfile<T>>,
    defect: T,
    outer_iterations: usize,
    outer_history: Vec<T>,
}

fn solve_from<T: Real>(
    family: &FrontFamily<T>,
    star: &EntireLogistic<T>,
    seed: Vec<GridProfile<T>>,
    opts: &WaveOptions<T>,
) -> Result<SolveOutcome<T>> {
    let period = family.coeffs.period();
    let times = phase_times(period, seed.len());
    let mut iterate = seed;
    let mut history = Vec::new();
    for outer in 1..=opts.max_outer {
        let (next, defect) = inner_limit(family, star, &iterate, opts)?;
        check_sandwich(family, &next, &times)?;
        let mut dist = T::zero();
        for (a, b) in next.iter().zip(&iterate) {
            dist = dist.max(a.sup_distance(b)?);
        }
        history.push(dist);
        iterate = next;
        if dist < opts.tol_wave {
            return Ok(SolveOutcome {
                slices: iterate,
                defect,
                outer_iterations: outer,
                outer_history: history,
            });
        }
    }
    Err(Error::FixedPointStall(format!(
        "comparison profile still moving by {} after {} outer iterations \
         (tolerance {})",
        history.last().copied().unwrap_or_else(T::zero),
        opts.max_outer,
        opts.tol_wave
    )))
}

fn residual_of<T: Real>(
    family: &FrontFamily<T>,
    slices: &[GridProfile<T>],
    times: &[T],
    fields: &[EllipticField<T>],
    period: Option<T>,
) -> Result<T> {
    let mut worst = T::zero();
    match period {
        None => {
            let r = residual_l_with_field(
                &slices[0],
                T::zero(),
                &fields[0],
                TimeDeriv::Zero,
                family,
            )?;
            worst = r.values().iter().fold(worst, |m, &v| m.max(v.abs()));
        }
        Some(p) => {
            let m = slices.len();
            let slice_dt = p / T::of(m as f64);
            for j in 0..m {
                let up = &slices[(j + 1) % m];
                let dn = &slices[(j + m - 1) % m];
                let ud = GridProfile::from_fn(
                    slices[j].x0(),
                    slices[j].dx(),
                    slices[j].n(),
                    |_| T::zero(),
                )?;
                let mut ud = ud;
                for i in 0..ud.n() {
                    ud.values_mut()[i] =
                        (up.values()[i] - dn.values()[i]) / (T::of(2.0) * slice_dt);
                }
                let r = residual_l_with_field(
                    &slices[j],
                    times[j],
                    &fields[j],
                    TimeDeriv::Profile(&ud),
                    family,
                )?;
                worst = r.values().iter().fold(worst, |m, &v| m.max(v.abs()));
            }
        }
    }
    Ok(worst)
}

fn half_crossing<T: Real>(u: &GridProfile<T>, level: T) -> Result<T> {
    let vals = u.values();
    for i in (0..u.n() - 1).rev() {
        if vals[i] >= level && vals[i + 1] < level {
            let frac = (vals[i] - level) / (vals[i] - vals[i + 1]);
            return Ok(u.x(i) + u.dx() * frac);
        }
    }
    Err(Error::TrackingLoss(format!(
        "profile never falls through the level {level}"
    )))
}

/// Full construction: fixed point of the field iteration, then quality
/// measurements.  `fixed_point` is the core; [`wave`] wraps it with the
/// family and entire-solution setup.
pub fn fixed_point<T: Real>(
    family: &FrontFamily<T>,
    star: &EntireLogistic<T>,
    spec: &GridSpec<T>,
    opts: &WaveOptions<T>,
) -> Result<WaveSolution<T>> {
    let period = family.coeffs.period();
    let m = if period.is_some() { opts.slices_per_period } else { 1 };
    let plus = spec.profile_from(|x| family.phi_plus(x))?;
    let seed = vec![plus; m];
    let out = solve_from(family, star, seed, opts)?;
    let times = phase_times(period, m);

    let uniqueness_gap = if opts.check_uniqueness {
        // Second seed: the lower barrier lifted to half the upper one,
        // well separated from the first seed inside the invariant set.
        let mut seed2 = Vec::with_capacity(m);
        for &t in &times {
            let junction = family.junction(t)?;
            seed2.push(spec.profile_from(|x| {
                let lower = if x <= junction {
                    family.params.delta0
                } else {
                    family.phi_lower(x, t)
                };
                lower.max(family.phi_plus(x).half())
            })?);
        }
        let alt = solve_from(family, star, seed2, opts)?;
        let mut gap = T::zero();
        for (a, b) in out.slices.iter().zip(&alt.slices) {
            gap = gap.max(a.sup_distance(b)?);
        }
        Some(gap)
    } else {
        None
    };

    let fields = fields_of(family, &out.slices)?;
    let residual_linf = residual_of(family, &out.slices, &times, &fields, period)?;
    let amplitude = refit_amplitude(&out.slices[0], family.params.kappa);
    let anchor = out.slices[0].interp(T::zero());
    let half_level_crossing = half_crossing(&out.slices[0], star.eval(T::zero()).half())?;

    let mut wave = WaveSolution {
        kappa: family.params.kappa,
        epsilon: family.params.epsilon,
        period,
        times,
        profiles: out.slices,
        attractant: fields.into_iter().map(|f| f.psi).collect(),
        amplitude,
        least_mean_speed: family.speed().least_mean(),
        residual_linf,
        periodicity_defect: out.defect,
        left_defect: T::zero(),
        right_defect: T::zero(),
        anchor,
        half_level_crossing,
        outer_iterations: out.outer_iterations,
        outer_history: out.outer_history,
        uniqueness_gap,
    };
    let report = check_asymptotics(&wave, star);
    wave.left_defect = report.left_defect;
    wave.right_defect = report.right_defect;
    Ok(wave)
}

/// Constructs the front profile at decay rate `kappa` for the given
/// coefficients, building the comparison family and the entire solution
/// internally.  Rejects `kappa` outside the admissible range through the
/// family construction.
pub fn wave<T: Real>(
    pair: &CoefficientPair<T>,
    chemo: ChemoParams<T>,
    kappa: T,
    spec: &GridSpec<T>,
    opts: &WaveOptions<T>,
) -> Result<WaveSolution<T>> {
    let family = FrontFamily::new(pair.clone(), chemo, kappa)?;
    let star = entire_logistic(pair, TimeGrid::new(T::zero(), T::one(), 2)?, LogisticOptions::default())?;
    fixed_point(&family, &star, spec, opts)
}

/// [`wave`] restricted to constant coefficients, the case with a genuinely
/// steady profile.
pub fn constant_wave<T: Real>(
    pair: &CoefficientPair<T>,
    chemo: ChemoParams<T>,
    kappa: T,
    spec: &GridSpec<T>,
    opts: &WaveOptions<T>,
) -> Result<WaveSolution<T>> {
    if !pair.is_constant() {
        return Err(Error::Domain(
            "constant_wave needs constant coefficients; use wave instead".into(),
        ));
    }
    wave(pair, chemo, kappa, spec, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{Coefficient, CoefficientKind, SinusoidTerm};

    fn constant_setup() -> (CoefficientPair<f64>, ChemoParams<f64>) {
        (
            CoefficientPair::constants(1.0, 1.0).unwrap(),
            ChemoParams::new(0.2, 1.0, 1.0).unwrap(),
        )
    }

    fn periodic_setup() -> (CoefficientPair<f64>, ChemoParams<f64>) {
        let a = Coefficient::new(CoefficientKind::Periodic {
            mean: 1.0,
            period: 1.0,
            terms: vec![SinusoidTerm { amplitude: 0.5, frequency: 1.0, phase: 0.0 }],
        })
        .unwrap();
        let b = Coefficient::new(CoefficientKind::Constant(1.0)).unwrap();
        (
            CoefficientPair::new(a, b).unwrap(),
            ChemoParams::new(0.1, 1.0, 2.0).unwrap(),
        )
    }

    #[test]
    fn constant_wave_settles_with_small_residual() {
        let (pair, chemo) = constant_setup();
        let spec = GridSpec::new(-60.0, 60.0, 0.05).unwrap();
        let opts = WaveOptions::default();
        let w = constant_wave(&pair, chemo, 0.5, &spec, &opts).unwrap();

        assert_eq!(w.profiles.len(), 1);
        assert!(w.outer_iterations <= 50, "outer iterations {}", w.outer_iterations);
        assert!(w.residual_linf < 1e-4, "residual {}", w.residual_linf);
        assert!(w.left_defect < 0.01, "left defect {}", w.left_defect);
        assert!(w.right_defect < 0.05, "right defect {}", w.right_defect);
        assert!((w.least_mean_speed - 2.5).abs() < 1e-14);

        // Monotone decreasing profile between the connected states.
        let vals = w.profiles[0].values();
        assert!(vals[0] > 0.99 && vals[0] < 1.26);
        for i in 1..vals.len() {
            assert!(vals[i] <= vals[i - 1] + 1e-9, "not monotone at node {i}");
        }
        // Anchor and half crossing are consistent with the profile.
        assert!((w.eval(w.half_level_crossing, 0.0) - 0.5).abs() < 1e-6);
        assert!(w.anchor > 0.0 && w.anchor < 1.26);
    }

    #[test]
    fn constant_wave_is_grid_placement_invariant() {
        // The boundary pin fixes the absolute exponential e^{-kappa x}, so
        // shifting the window must reproduce the same function.
        let (pair, chemo) = constant_setup();
        let opts = WaveOptions::default();
        let w1 = constant_wave(
            &pair,
            chemo,
            0.5,
            &GridSpec::new(-60.0, 60.0, 0.05).unwrap(),
            &opts,
        )
        .unwrap();
        let w2 = constant_wave(
            &pair,
            chemo,
            0.5,
            &GridSpec::new(-57.0, 63.0, 0.05).unwrap(),
            &opts,
        )
        .unwrap();
        let mut worst = 0.0f64;
        for i in 0..800 {
            let x = -20.0 + i as f64 * 0.05;
            worst = worst.max((w1.eval(x, 0.0) - w2.eval(x, 0.0)).abs());
        }
        assert!(worst < 1e-3, "windows disagree by {worst}");
    }

    #[test]
    fn periodic_wave_is_time_periodic() {
        let (pair, chemo) = periodic_setup();
        let spec = GridSpec::new(-60.0, 60.0, 0.05).unwrap();
        let opts = WaveOptions::default();
        let w = wave(&pair, chemo, 0.5, &spec, &opts).unwrap();

        assert_eq!(w.profiles.len(), 64);
        assert!(w.periodicity_defect < 1e-3, "periodicity defect {}", w.periodicity_defect);
        assert!(w.left_defect < 0.02, "left defect {}", w.left_defect);
        assert!(w.right_defect < 0.05, "right defect {}", w.right_defect);
        assert!((w.least_mean_speed - 2.5).abs() < 1e-14);
        // The slices genuinely move over the period: the entire state the
        // left edge follows swings with a(t).
        let left0 = w.profiles[0].values()[0];
        let mut swing = 0.0f64;
        for p in &w.profiles {
            swing = swing.max((p.values()[0] - left0).abs());
        }
        assert!(swing > 0.05, "profiles barely move ({swing}); not a periodic front");
    }

    #[test]
    fn inadmissible_decay_rates_are_refused() {
        let (pair, chemo) = constant_setup();
        let spec = GridSpec::new(-60.0, 60.0, 0.05).unwrap();
        let opts = WaveOptions::default();
        // kappa_chi ~ 0.8421 for this scenario; sqrt(a_lower) = 1.
        for bad in [0.9, 1.0, 1.5] {
            assert!(constant_wave(&pair, chemo, bad, &spec, &opts).is_err());
        }
    }

    #[test]
    fn uniqueness_gap_is_small_for_the_reference_scenario() {
        let (pair, chemo) = constant_setup();
        let spec = GridSpec::new(-40.0, 40.0, 0.05).unwrap();
        let opts = WaveOptions { check_uniqueness: true, ..Default::default() };
        let w = constant_wave(&pair, chemo, 0.5, &spec, &opts).unwrap();
        let gap = w.uniqueness_gap.unwrap();
        assert!(gap < 10.0 * opts.tol_wave, "two seeds disagree by {gap}");
    }
}
