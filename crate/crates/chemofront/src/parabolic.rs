//! Time stepping for the front evolution, in the moving frame and the lab
//! frame.
//!
//! Both frames share one scalar equation shape,
//!
//! ```text
//! u_t = u_xx + adv(x, t) u_x + (growth(x, t) - (b(t) - chi mu) u) u
//! ```
//!
//! with `adv = c_kappa(t) - chi psi_x, growth = a(t) - chi lambda psi` in
//! the moving frame (where `psi` belongs to a frozen comparison profile) and
//! `adv = -chi v_x, growth = a(t) - chi lambda v` in the lab frame (where
//! `v` is refreshed from `u` each step; the flux term `-chi (u v_x)_x` is
//! expanded through the elliptic identity `v_xx = lambda v - mu u`).
//!
//! The step is IMEX Euler: diffusion implicit (tridiagonal solve keeps it
//! unconditionally stable), advection and reaction explicit with central
//! differences (second order in space, so profile residuals can reach the
//! `O(dx^2)` floor).  Explicit advection demands `dt <= dx / (2 max|adv|)`
//! and a cell Peclet number at most 1; violations are hard errors, not
//! warnings, because the comparison structure of the scheme is what the
//! front construction leans on.

use crate::coefficients::{CoefficientPair, EntireLogistic};
use crate::dispersion::ChemoParams;
use crate::elliptic::{green_convolve, EllipticField};
use crate::error::{Error, Result};
use crate::front::FrontFamily;
use crate::grid::{GridProfile, LeftTail, RightTail, TailSpec};
use crate::scalar::Real;

/// Left boundary condition.
#[derive(Debug, Clone)]
pub enum LeftBc<T> {
    /// Pin to the spatially uniform entire solution `u*(t)`.
    DirichletEntire(EntireLogistic<T>),
    /// Mirror node: `u_x = 0`.
    NeumannZero,
}

/// Right boundary condition.
#[derive(Debug, Clone, Copy)]
pub enum RightBc<T> {
    /// Pin to `amplitude e^{-rate x_end}`, the front's leading-edge decay.
    PinnedExponential { amplitude: T, rate: T },
    DirichletZero,
}

impl<T: Real> RightBc<T> {
    fn value(&self, x_end: T) -> T {
        match self {
            RightBc::PinnedExponential { amplitude, rate } => {
                *amplitude * (-*rate * x_end).exp()
            }
            RightBc::DirichletZero => T::zero(),
        }
    }
}

/// A profile advancing in time, with the undershoot-clip tally.
#[derive(Debug, Clone)]
pub struct SolverState<T> {
    pub u: GridProfile<T>,
    pub t: T,
    pub clip_count: u64,
}

impl<T: Real> SolverState<T> {
    pub fn new(u: GridProfile<T>, t: T) -> Self {
        Self { u, t, clip_count: 0 }
    }
}

/// Chemoattractant field of the frozen comparison profile, either steady or
/// periodic (slice `k` at `k period / len`, linear in time, wrapping).
pub enum PhiSource<'a, T> {
    Steady(&'a EllipticField<T>),
    Periodic { period: T, fields: &'a [EllipticField<T>] },
}

impl<'a, T: Real> PhiSource<'a, T> {
    fn fill(&self, t: T, psi: &mut [T], dpsi: &mut [T]) {
        match self {
            PhiSource::Steady(f) => {
                psi.copy_from_slice(f.psi.values());
                dpsi.copy_from_slice(f.dpsi.values());
            }
            PhiSource::Periodic { period, fields } => {
                let m = fields.len();
                let mut s = t / *period;
                s -= s.floor();
                let pos = s * T::of(m as f64);
                let k = (pos.floor().as_f64() as usize).min(m - 1);
                let w = pos - T::of(k as f64);
                let k1 = (k + 1) % m;
                let (f0, f1) = (&fields[k], &fields[k1]);
                for i in 0..psi.len() {
                    psi[i] = f0.psi.values()[i]
                        + (f1.psi.values()[i] - f0.psi.values()[i]) * w;
                    dpsi[i] = f0.dpsi.values()[i]
                        + (f1.dpsi.values()[i] - f0.dpsi.values()[i]) * w;
                }
            }
        }
    }

    fn n(&self) -> usize {
        match self {
            PhiSource::Steady(f) => f.psi.n(),
            PhiSource::Periodic { fields, .. } => fields[0].psi.n(),
        }
    }
}

/// Shared IMEX machinery: explicit advection/reaction into `rhs`, implicit
/// diffusion by the Thomas solve, boundary rows, undershoot policy.
struct ImexCore<T> {
    rhs: Vec<T>,
    cp: Vec<T>,
}

impl<T: Real> ImexCore<T> {
    fn new(n: usize) -> Self {
        Self { rhs: vec![T::zero(); n], cp: vec![T::zero(); n] }
    }

    /// One step of the scalar equation; `adv` and `growth` are nodewise
    /// coefficient profiles at the current time, `b_eff = b(t) - chi mu`.
    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        state: &mut SolverState<T>,
        dt: T,
        adv: &[T],
        growth: &[T],
        b_eff: T,
        left: &LeftBc<T>,
        right: &RightBc<T>,
    ) -> Result<()> {
        let n = state.u.n();
        let dx = state.u.dx();
        let u = state.u.values();

        let mut max_adv = T::zero();
        for &a in adv {
            max_adv = max_adv.max(a.abs());
        }
        if dt * max_adv > dx.half() * (T::one() + T::of(1e-12)) {
            return Err(Error::Timestep(format!(
                "dt {dt} exceeds dx/(2 max|adv|) = {}; shrink the step",
                dx.half() / max_adv
            )));
        }
        if max_adv * dx > T::of(2.0) {
            return Err(Error::Timestep(format!(
                "cell Peclet number {} above 1; refine dx",
                max_adv * dx * T::of(0.5)
            )));
        }

        let two_dx = T::of(2.0) * dx;
        for i in 1..n - 1 {
            let d1 = (u[i + 1] - u[i - 1]) / two_dx;
            self.rhs[i] = u[i] + dt * (adv[i] * d1 + (growth[i] - b_eff * u[i]) * u[i]);
        }
        let t_next = state.t + dt;
        let r = dt / (dx * dx);
        let one = T::one();
        let two_r = T::of(2.0) * r;

        // Thomas forward sweep.  Row 0 depends on the left condition; the
        // last row is always Dirichlet.
        let (b0, c0, d0) = match left {
            LeftBc::DirichletEntire(star) => (one, T::zero(), star.eval(t_next)),
            LeftBc::NeumannZero => {
                // Mirror ghost: u_{-1} = u_1 in both operators.
                let d1 = T::zero();
                let rhs0 = u[0] + dt * (adv[0] * d1 + (growth[0] - b_eff * u[0]) * u[0]);
                (one + two_r, -two_r, rhs0)
            }
        };
        self.cp[0] = c0 / b0;
        self.rhs[0] = d0 / b0;
        let diag = one + two_r;
        for i in 1..n - 1 {
            let m = diag + r * self.cp[i - 1];
            self.cp[i] = -r / m;
            self.rhs[i] = (self.rhs[i] + r * self.rhs[i - 1]) / m;
        }
        let d_last = right.value(state.u.x_end());
        self.rhs[n - 1] = d_last; // Dirichlet row: b = 1, a = 0.

        let vals = state.u.values_mut();
        vals[n - 1] = self.rhs[n - 1];
        for i in (0..n - 1).rev() {
            vals[i] = self.rhs[i] - self.cp[i] * vals[i + 1];
        }

        // Undershoot policy: truncation noise in (-10 dx^2, 0) clips to 0;
        // anything deeper means the scheme lost stability.
        let floor = -T::of(10.0) * dx * dx;
        for v in vals.iter_mut() {
            if !v.is_finite() {
                return Err(Error::Divergence("solution left the finite range".into()));
            }
            if *v < T::zero() {
                if *v <= floor {
                    return Err(Error::Divergence(format!(
                        "undershoot {v} beyond the clip threshold {floor}"
                    )));
                }
                *v = T::zero();
                state.clip_count += 1;
            }
        }
        state.t = t_next;
        Ok(())
    }
}

/// Moving-frame stepper: the comparison field is frozen across steps.
pub struct MovingStepper<'a, T> {
    family: &'a FrontFamily<T>,
    source: PhiSource<'a, T>,
    pub left: LeftBc<T>,
    pub right: RightBc<T>,
    core: ImexCore<T>,
    psi: Vec<T>,
    dpsi: Vec<T>,
    adv: Vec<T>,
    growth: Vec<T>,
}

impl<'a, T: Real> MovingStepper<'a, T> {
    pub fn new(
        family: &'a FrontFamily<T>,
        source: PhiSource<'a, T>,
        left: LeftBc<T>,
        right: RightBc<T>,
    ) -> Self {
        let n = source.n();
        Self {
            family,
            source,
            left,
            right,
            core: ImexCore::new(n),
            psi: vec![T::zero(); n],
            dpsi: vec![T::zero(); n],
            adv: vec![T::zero(); n],
            growth: vec![T::zero(); n],
        }
    }

    pub fn step(&mut self, state: &mut SolverState<T>, dt: T) -> Result<()> {
        let n = state.u.n();
        if n != self.psi.len() {
            return Err(Error::Shape("state grid does not match the field source".into()));
        }
        let t = state.t;
        self.source.fill(t, &mut self.psi, &mut self.dpsi);
        let chi = self.family.chemo.chi;
        let lambda = self.family.chemo.lambda;
        let c = self.family.speed().eval(t);
        let a = self.family.coeffs.a.eval(t);
        for i in 0..n {
            self.adv[i] = c - chi * self.dpsi[i];
            self.growth[i] = a - chi * lambda * self.psi[i];
        }
        let b_eff = self.family.coeffs.b.eval(t) - self.family.chemo.chi_mu();
        self.core.step(state, dt, &self.adv, &self.growth, b_eff, &self.left, &self.right)
    }

    pub fn evolve_steps(&mut self, state: &mut SolverState<T>, steps: usize, dt: T) -> Result<()> {
        for _ in 0..steps {
            self.step(state, dt)?;
        }
        Ok(())
    }

    /// Steps to `t_end` on the schedule `t0 + k dt` with a shortened final
    /// step; `on_step` observes every accepted state.
    pub fn evolve_to(
        &mut self,
        state: &mut SolverState<T>,
        t_end: T,
        dt: T,
        mut on_step: impl FnMut(&SolverState<T>),
    ) -> Result<()> {
        let t0 = state.t;
        if t_end <= t0 {
            return Ok(());
        }
        let mut k = 0u64;
        while state.t < t_end - dt * T::of(1e-9) {
            k += 1;
            let target = (t0 + dt * T::of(k as f64)).min(t_end);
            let h = target - state.t;
            self.step(state, h)?;
            on_step(state);
        }
        Ok(())
    }
}

/// Lab-frame stepper: the chemoattractant is regenerated from the current
/// density every step.
pub struct LabStepper<'a, T> {
    pair: &'a CoefficientPair<T>,
    chemo: ChemoParams<T>,
    pub left: LeftBc<T>,
    pub right: RightBc<T>,
    core: ImexCore<T>,
    adv: Vec<T>,
    growth: Vec<T>,
    /// Field of the last accepted step, for output and level tracking.
    pub field: Option<EllipticField<T>>,
}

impl<'a, T: Real> LabStepper<'a, T> {
    pub fn new(
        pair: &'a CoefficientPair<T>,
        chemo: ChemoParams<T>,
        left: LeftBc<T>,
        right: RightBc<T>,
        n: usize,
    ) -> Self {
        Self {
            pair,
            chemo,
            left,
            right,
            core: ImexCore::new(n),
            adv: vec![T::zero(); n],
            growth: vec![T::zero(); n],
            field: None,
        }
    }

    /// Elliptic solve for the current density.  Tails extend the boundary
    /// conditions: flat on the left, and on the right whatever the pin
    /// prescribes.
    pub fn field_of(&self, u: &GridProfile<T>) -> Result<EllipticField<T>> {
        let right = match self.right {
            RightBc::PinnedExponential { amplitude, rate } => {
                RightTail::Exponential { amplitude, rate }
            }
            RightBc::DirichletZero => RightTail::Zero,
        };
        let tails = TailSpec::new(LeftTail::Constant(u.values()[0]), right);
        green_convolve(u, &tails, self.chemo.lambda, self.chemo.mu)
    }

    pub fn step(&mut self, state: &mut SolverState<T>, dt: T) -> Result<()> {
        let n = state.u.n();
        if n != self.adv.len() {
            return Err(Error::Shape("state grid does not match the stepper size".into()));
        }
        let field = self.field_of(&state.u)?;
        let chi = self.chemo.chi;
        let lambda = self.chemo.lambda;
        let t = state.t;
        let a = self.pair.a.eval(t);
        for i in 0..n {
            self.adv[i] = -chi * field.dpsi.values()[i];
            self.growth[i] = a - chi * lambda * field.psi.values()[i];
        }
        let b_eff = self.pair.b.eval(t) - self.chemo.chi_mu();
        self.core
            .step(state, dt, &self.adv, &self.growth, b_eff, &self.left, &self.right)?;
        self.field = Some(field);
        Ok(())
    }

    pub fn evolve_steps(&mut self, state: &mut SolverState<T>, steps: usize, dt: T) -> Result<()> {
        for _ in 0..steps {
            self.step(state, dt)?;
        }
        Ok(())
    }

    pub fn evolve_to(
        &mut self,
        state: &mut SolverState<T>,
        t_end: T,
        dt: T,
        mut on_step: impl FnMut(&SolverState<T>, &EllipticField<T>),
    ) -> Result<()> {
        let t0 = state.t;
        if t_end <= t0 {
            return Ok(());
        }
        let mut k = 0u64;
        while state.t < t_end - dt * T::of(1e-9) {
            k += 1;
            let target = (t0 + dt * T::of(k as f64)).min(t_end);
            let h = target - state.t;
            self.step(state, h)?;
            on_step(state, self.field.as_ref().expect("field set by step"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{entire_logistic, LogisticOptions};
    use crate::grid::{GridSpec, TimeGrid};

    fn family(chi: f64, lambda: f64) -> FrontFamily<f64> {
        let pair = CoefficientPair::constants(1.0, 1.0).unwrap();
        let chemo = ChemoParams::new(chi, 1.0, lambda).unwrap();
        FrontFamily::new(pair, chemo, 0.5).unwrap()
    }

    fn steady_field(fam: &FrontFamily<f64>, spec: &GridSpec<f64>) -> EllipticField<f64> {
        let phi = spec.profile_from(|x| fam.phi_plus(x)).unwrap();
        let tails = TailSpec::plateau_left_exponential_right(&phi, fam.params.kappa);
        green_convolve(&phi, &tails, fam.chemo.lambda, fam.chemo.mu).unwrap()
    }

    fn u_star(fam: &FrontFamily<f64>) -> EntireLogistic<f64> {
        entire_logistic(
            &fam.coeffs,
            TimeGrid::new(0.0, 0.1, 11).unwrap(),
            LogisticOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn zero_is_an_equilibrium() {
        let fam = family(0.2, 1.0);
        let spec = GridSpec::new(-20.0, 20.0, 0.05).unwrap();
        let field = steady_field(&fam, &spec);
        let mut stepper = MovingStepper::new(
            &fam,
            PhiSource::Steady(&field),
            LeftBc::NeumannZero,
            RightBc::DirichletZero,
        );
        let u0 = spec.profile_from(|_| 0.0).unwrap();
        let mut state = SolverState::new(u0, 0.0);
        stepper.evolve_steps(&mut state, 50, 0.005).unwrap();
        assert!(state.u.sup_norm() == 0.0);
        assert_eq!(state.clip_count, 0);
    }

    #[test]
    fn uniform_entire_state_is_stationary_in_the_moving_frame() {
        // a = b = lambda = mu = 1, chi = 0.2: with phi = 1 the reaction at
        // u = 1 cancels exactly and the uniform state persists.
        let fam = family(0.2, 1.0);
        let spec = GridSpec::new(-20.0, 20.0, 0.05).unwrap();
        let ones = spec.profile_from(|_| 1.0).unwrap();
        let tails = TailSpec::new(
            LeftTail::Constant(1.0),
            RightTail::Exponential { amplitude: 1.0, rate: 0.0 },
        );
        let field = green_convolve(&ones, &tails, 1.0, 1.0).unwrap();
        let mut stepper = MovingStepper::new(
            &fam,
            PhiSource::Steady(&field),
            LeftBc::DirichletEntire(u_star(&fam)),
            RightBc::PinnedExponential { amplitude: 1.0, rate: 0.0 },
        );
        let mut state = SolverState::new(ones.clone(), 0.0);
        for _ in 0..100 {
            stepper.step(&mut state, 0.005).unwrap();
        }
        assert!(state.u.sup_distance(&ones).unwrap() < 1e-10);
    }

    #[test]
    fn uniform_entire_state_is_stationary_in_the_lab_frame() {
        let pair = CoefficientPair::constants(1.0, 1.0).unwrap();
        let chemo = ChemoParams::new(0.2, 1.0, 2.0).unwrap();
        let spec = GridSpec::new(-20.0, 20.0, 0.05).unwrap();
        let ones = spec.profile_from(|_| 1.0).unwrap();
        let star = entire_logistic(
            &pair,
            TimeGrid::new(0.0, 0.1, 11).unwrap(),
            LogisticOptions::default(),
        )
        .unwrap();
        let mut stepper = LabStepper::new(
            &pair,
            chemo,
            LeftBc::DirichletEntire(star),
            RightBc::PinnedExponential { amplitude: 1.0, rate: 0.0 },
            ones.n(),
        );
        let mut state = SolverState::new(ones.clone(), 0.0);
        stepper.evolve_steps(&mut state, 100, 0.005).unwrap();
        assert!(state.u.sup_distance(&ones).unwrap() < 1e-10);
        let v = &stepper.field.unwrap().psi;
        // v = mu a / (lambda b) = 0.5 throughout.
        for &p in v.values() {
            assert!((p - 0.5_f64).abs() < 1e-10);
        }
    }

    #[test]
    fn evolution_is_deterministic_and_splittable() {
        let fam = family(0.2, 1.0);
        let spec = GridSpec::new(-30.0, 30.0, 0.05).unwrap();
        let field = steady_field(&fam, &spec);
        let u0 = spec.profile_from(|x| fam.phi_plus(x)).unwrap();
        let bc_amp = 1.0;

        let run = |plan: &[usize]| {
            let mut stepper = MovingStepper::new(
                &fam,
                PhiSource::Steady(&field),
                LeftBc::DirichletEntire(u_star(&fam)),
                RightBc::PinnedExponential { amplitude: bc_amp, rate: 0.5 },
            );
            let mut state = SolverState::new(u0.clone(), 0.0);
            for &steps in plan {
                stepper.evolve_steps(&mut state, steps, 0.005).unwrap();
            }
            state
        };
        let full = run(&[200]);
        let split = run(&[100, 100]);
        assert_eq!(full.u.values(), split.u.values());
        assert_eq!(full.t, split.t);

        // The clamped-schedule variant lands on the same states.
        let mut stepper = MovingStepper::new(
            &fam,
            PhiSource::Steady(&field),
            LeftBc::DirichletEntire(u_star(&fam)),
            RightBc::PinnedExponential { amplitude: bc_amp, rate: 0.5 },
        );
        let mut state = SolverState::new(u0.clone(), 0.0);
        stepper.evolve_to(&mut state, 1.0, 0.005, |_| {}).unwrap();
        assert!(state.u.sup_distance(&full.u).unwrap() < 1e-12);
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let fam = family(0.2, 1.0);
        let spec = GridSpec::new(-20.0, 20.0, 0.05).unwrap();
        let field = steady_field(&fam, &spec);
        let mut stepper = MovingStepper::new(
            &fam,
            PhiSource::Steady(&field),
            LeftBc::NeumannZero,
            RightBc::DirichletZero,
        );
        let u0 = spec.profile_from(|x| fam.phi_plus(x)).unwrap();
        let mut state = SolverState::new(u0, 0.0);
        // max adv ~ c = 2.5, so dt must stay below 0.05/5 = 0.01.
        assert!(matches!(
            stepper.step(&mut state, 0.02),
            Err(Error::Timestep(_))
        ));
    }

    #[test]
    fn discrete_comparison_principle() {
        let fam = family(0.2, 1.0);
        let spec = GridSpec::new(-20.0, 20.0, 0.05).unwrap();
        let field = steady_field(&fam, &spec);
        let slack = 10.0 * 0.05 * 0.05;
        let mut state = 0x2545f4914f6cdd1du64;
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..4 {
            let (c1, c2, w1, w2) = (rand() * 6.0 - 3.0, rand() * 6.0 - 3.0, rand() + 0.5, rand() + 0.5);
            let lo = spec
                .profile_from(|x| 0.4 * (-(x - c1) * (x - c1) / (2.0 * w1)).exp())
                .unwrap();
            let hi = spec
                .profile_from(|x| {
                    0.4 * (-(x - c1) * (x - c1) / (2.0 * w1)).exp()
                        + 0.5 * (-(x - c2) * (x - c2) / (2.0 * w2)).exp()
                })
                .unwrap();
            let run = |u0: &GridProfile<f64>| {
                let mut stepper = MovingStepper::new(
                    &fam,
                    PhiSource::Steady(&field),
                    LeftBc::NeumannZero,
                    RightBc::DirichletZero,
                );
                let mut s = SolverState::new(u0.clone(), 0.0);
                stepper.evolve_steps(&mut s, 1000, 0.005).unwrap();
                s.u
            };
            let u = run(&lo);
            let w = run(&hi);
            for i in 0..u.n() {
                assert!(
                    u.values()[i] <= w.values()[i] + slack,
                    "ordering lost at node {i}: {} vs {}",
                    u.values()[i],
                    w.values()[i]
                );
            }
        }
    }

    #[test]
    fn barrier_sandwich_holds_from_the_upper_profile() {
        // Starting at the upper barrier, the evolution stays between the
        // spliced lower barrier and the upper one.
        let fam = family(0.2, 1.0);
        let spec = GridSpec::new(-40.0, 40.0, 0.05).unwrap();
        let field = steady_field(&fam, &spec);
        let mut stepper = MovingStepper::new(
            &fam,
            PhiSource::Steady(&field),
            LeftBc::DirichletEntire(u_star(&fam)),
            RightBc::PinnedExponential { amplitude: 1.0, rate: 0.5 },
        );
        let u0 = spec.profile_from(|x| fam.phi_plus(x)).unwrap();
        let mut state = SolverState::new(u0, 0.0);
        stepper.evolve_to(&mut state, 5.0, 0.005, |_| {}).unwrap();
        let slack = 10.0 * 0.05 * 0.05;
        for (i, (x, v)) in state.u.iter_points().enumerate() {
            let lower = fam.phi_minus(x, state.t).unwrap();
            let upper = fam.phi_plus(x);
            assert!(
                v >= lower - slack && v <= upper + slack,
                "node {i} at x={x}: {v} outside [{lower}, {upper}]"
            );
        }
    }

    #[test]
    fn lab_front_data_stays_bounded_under_saturation_dominance() {
        let pair = CoefficientPair::constants(1.0, 1.0).unwrap();
        let chemo = ChemoParams::new(0.2, 1.0, 1.0).unwrap();
        let spec = GridSpec::new(-30.0, 30.0, 0.05).unwrap();
        let star = entire_logistic(
            &pair,
            TimeGrid::new(0.0, 0.1, 11).unwrap(),
            LogisticOptions::default(),
        )
        .unwrap();
        let u0 = spec.profile_from(|x: f64| (-2.0 * x).exp().min(1.0)).unwrap();
        let mut stepper = LabStepper::new(
            &pair,
            chemo,
            LeftBc::DirichletEntire(star),
            RightBc::DirichletZero,
            u0.n(),
        );
        let mut state = SolverState::new(u0, 0.0);
        let plateau = 1.0 / 0.8;
        let slack = 10.0 * 0.05 * 0.05;
        stepper
            .evolve_to(&mut state, 2.0, 0.005, |s, _| {
                for &v in s.u.values() {
                    assert!((0.0..=plateau + slack).contains(&v), "value {v} escaped");
                }
            })
            .unwrap();
    }

    #[test]
    fn self_convergence_first_order_in_dt() {
        let fam = family(0.2, 1.0);
        let spec = GridSpec::new(-40.0, 40.0, 0.05).unwrap();
        let field = steady_field(&fam, &spec);
        let u0 = spec.profile_from(|x| 1.0 / (1.0 + (0.5 * (x - 2.0)).exp())).unwrap();
        let amp = std::f64::consts::E; // e^{kappa * 2} fits u0's right tail
        let run = |dt: f64| {
            let mut stepper = MovingStepper::new(
                &fam,
                PhiSource::Steady(&field),
                LeftBc::DirichletEntire(u_star(&fam)),
                RightBc::PinnedExponential { amplitude: amp, rate: 0.5 },
            );
            let mut state = SolverState::new(u0.clone(), 0.0);
            let steps = (1.0 / dt.abs()).round() as usize;
            stepper.evolve_steps(&mut state, steps, dt).unwrap();
            state.u
        };
        let a = run(0.008);
        let b = run(0.004);
        let c = run(0.002);
        let e1 = a.sup_distance(&b).unwrap();
        let e2 = b.sup_distance(&c).unwrap();
        let ratio = e1 / e2;
        assert!((1.7..2.3).contains(&ratio), "dt refinement ratio {ratio}");
    }

    #[test]
    fn self_convergence_second_order_in_dx() {
        let fam = family(0.2, 1.0);
        let dt = 5e-4_f64;
        let run = |dx: f64| {
            let spec = GridSpec::new(-40.0, 40.0, dx).unwrap();
            let field = steady_field(&fam, &spec);
            let u0 = spec.profile_from(|x| 1.0 / (1.0 + (0.5 * (x - 2.0)).exp())).unwrap();
            let mut stepper = MovingStepper::new(
                &fam,
                PhiSource::Steady(&field),
                LeftBc::DirichletEntire(u_star(&fam)),
                RightBc::PinnedExponential { amplitude: std::f64::consts::E, rate: 0.5 },
            );
            let mut state = SolverState::new(u0, 0.0);
            stepper.evolve_steps(&mut state, (1.0 / dt).round() as usize, dt).unwrap();
            state.u
        };
        let coarse = run(0.2);
        let mid = run(0.1);
        let fine = run(0.05);
        // Compare each run against the next finer one at its own nodes.
        let mut e1 = 0.0f64;
        let mut e2 = 0.0f64;
        for i in 0..coarse.n() {
            let x = coarse.x(i);
            e1 = e1.max((coarse.values()[i] - mid.interp(x)).abs());
        }
        for i in 0..mid.n() {
            let x = mid.x(i);
            e2 = e2.max((mid.values()[i] - fine.interp(x)).abs());
        }
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "dx refinement ratio {ratio}");
    }
}
