//! Randomized verification of the barrier inequalities.
//!
//! The comparison argument behind the front construction rests on sign
//! statements that hold against *every* member of the invariant set, not
//! just the iterates the solver happens to visit: the exponential
//! envelope and the plateau keep a nonnegative operator residual, the
//! lower profile (right of its zero) and any small positive constant a
//! nonpositive one, and the attractant field of any member obeys
//! pointwise bounds.  This module samples random smooth members, checks
//! every sign with a slack of `10 dx^2` for the spatial discretization,
//! and aggregates the worst margins into a serializable report.
//!
//! Samples are drawn from per-index ChaCha streams, so the report is
//! identical for a given seed no matter how many worker threads run.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::{green_convolve, verify_psi_bounds, EllipticField};
use crate::error::Result;
use crate::front::{phi_kappa, residual_l_with_field, FrontFamily, TimeDeriv};
use crate::grid::{GridProfile, GridSpec, TailSpec};

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Random comparison profiles to draw.
    pub samples: usize,
    /// Evaluation times per sample, spread over one period (a single
    /// `t = 0` for constant coefficients).
    pub times_per_sample: usize,
    pub grid: GridSpec<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 20,
            times_per_sample: 5,
            grid: GridSpec::new(-60.0, 60.0, 0.05).unwrap(),
        }
    }
}

/// One aggregated inequality: `worst` is the extreme value seen across
/// all samples and times, to be compared with `threshold` in the
/// direction given by `direction`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub direction: &'static str,
    pub worst: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckResult {
    fn at_least(name: &'static str, worst: f64, threshold: f64) -> Self {
        CheckResult { name, direction: "at_least", worst, threshold, pass: worst >= threshold }
    }

    fn at_most(name: &'static str, worst: f64, threshold: f64) -> Self {
        CheckResult { name, direction: "at_most", worst, threshold, pass: worst <= threshold }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub samples: usize,
    pub times_per_sample: usize,
    pub slack: f64,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

/// Thread pool honoring the `CHEMOFRONT_THREADS` cap; unset or invalid
/// values fall back to one worker per core.
pub fn worker_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CHEMOFRONT_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                builder = builder.num_threads(n);
            }
        }
    }
    builder.build().expect("worker pool construction cannot fail")
}

/// A smooth random member of the invariant set: the upper barrier
/// modulated by a slowly varying factor in `[0, 1]`.  The extension
/// beyond the grid (constant left, rate-`kappa` exponential right) stays
/// inside the set, so the field bounds apply on the whole line.
pub fn random_member(
    family: &FrontFamily<f64>,
    grid: &GridSpec<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<GridProfile<f64>> {
    let scale: f64 = 0.2 + 0.8 * rng.gen::<f64>();
    let om1: f64 = 0.2 + 1.3 * rng.gen::<f64>();
    let om2: f64 = 0.2 + 1.3 * rng.gen::<f64>();
    let p1: f64 = core::f64::consts::TAU * rng.gen::<f64>();
    let p2: f64 = core::f64::consts::TAU * rng.gen::<f64>();
    grid.profile_from(|x| {
        let r = scale * (0.5 + 0.5 * (om1 * x + p1).sin() * (om2 * x + p2).sin());
        r * family.phi_plus(x)
    })
}

struct SampleWorst {
    envelope_min: f64,
    plateau_min: f64,
    lower_max: f64,
    delta_max: f64,
    psi_min: f64,
    plateau_margin: f64,
    decay_margin: f64,
    dpsi_margin: f64,
}

fn sample_worst(
    family: &FrontFamily<f64>,
    opts: &VerifyOptions,
    envelope: &GridProfile<f64>,
    plateau: &GridProfile<f64>,
    delta: &GridProfile<f64>,
    times: &[f64],
    field: &EllipticField<f64>,
) -> Result<SampleWorst> {
    let psi = verify_psi_bounds(field, family.params.kappa, &family.chemo, &family.coeffs)?;

    let mut w = SampleWorst {
        envelope_min: f64::INFINITY,
        plateau_min: f64::INFINITY,
        lower_max: f64::NEG_INFINITY,
        delta_max: f64::NEG_INFINITY,
        psi_min: psi.psi_min,
        plateau_margin: psi.plateau_margin,
        decay_margin: psi.decay_margin,
        dpsi_margin: psi.dpsi_margin,
    };
    let x_cut = opts.grid.x_end - 1.0;

    for &t in times {
        let r = residual_l_with_field(envelope, t, field, TimeDeriv::Zero, family)?;
        w.envelope_min = r.values().iter().cloned().fold(w.envelope_min, f64::min);

        let r = residual_l_with_field(plateau, t, field, TimeDeriv::Zero, family)?;
        w.plateau_min = r.values().iter().cloned().fold(w.plateau_min, f64::min);

        let r = residual_l_with_field(delta, t, field, TimeDeriv::Zero, family)?;
        w.delta_max = r.values().iter().cloned().fold(w.delta_max, f64::max);

        let lower = opts.grid.profile_from(|x| family.phi_lower(x, t))?;
        let dt = if family.coeffs.period().is_some() {
            Some(opts.grid.profile_from(|x| family.phi_lower_dt(x, t))?)
        } else {
            None
        };
        let deriv = match &dt {
            Some(p) => TimeDeriv::Profile(p),
            None => TimeDeriv::Zero,
        };
        let r = residual_l_with_field(&lower, t, field, deriv, family)?;
        // The sign statement for the lower profile holds right of its
        // zero; the last grid cells are excluded because the probe's tail
        // model error concentrates there.
        let x_minus = family.turning_points(t).x_minus;
        for (x, v) in r.iter_points() {
            if x >= x_minus && x <= x_cut {
                w.lower_max = w.lower_max.max(v);
            }
        }
    }
    Ok(w)
}

/// Runs the full randomized suite for one front family.
pub fn barrier_suite(
    family: &FrontFamily<f64>,
    opts: &VerifyOptions,
    seed: u64,
) -> Result<VerifyReport> {
    let dx = opts.grid.dx;
    let slack = 10.0 * dx * dx;
    let kappa = family.params.kappa;

    let envelope = opts.grid.profile_from(|x| phi_kappa(x, kappa))?;
    let plateau_value = family.plateau();
    let plateau = opts.grid.profile_from(|_| plateau_value)?;
    let delta = opts.grid.profile_from(|_| family.params.delta0)?;

    let times: Vec<f64> = match family.coeffs.period() {
        Some(p) => (0..opts.times_per_sample.max(1))
            .map(|j| p * j as f64 / opts.times_per_sample.max(1) as f64)
            .collect(),
        None => vec![0.0],
    };

    let pool = worker_pool();
    let worsts: Vec<Result<SampleWorst>> = pool.install(|| {
        (0..opts.samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let phi = random_member(family, &opts.grid, &mut rng)?;
                let tails = TailSpec::plateau_left_exponential_right(&phi, kappa);
                let field =
                    green_convolve(&phi, &tails, family.chemo.lambda, family.chemo.mu)?;
                sample_worst(family, opts, &envelope, &plateau, &delta, &times, &field)
            })
            .collect()
    });

    let mut env_min = f64::INFINITY;
    let mut plat_min = f64::INFINITY;
    let mut lower_max = f64::NEG_INFINITY;
    let mut delta_max = f64::NEG_INFINITY;
    let mut psi_min = f64::INFINITY;
    let mut margin_plateau = f64::INFINITY;
    let mut margin_decay = f64::INFINITY;
    let mut margin_dpsi = f64::INFINITY;
    for w in worsts {
        let w = w?;
        env_min = env_min.min(w.envelope_min);
        plat_min = plat_min.min(w.plateau_min);
        lower_max = lower_max.max(w.lower_max);
        delta_max = delta_max.max(w.delta_max);
        psi_min = psi_min.min(w.psi_min);
        margin_plateau = margin_plateau.min(w.plateau_margin);
        margin_decay = margin_decay.min(w.decay_margin);
        margin_dpsi = margin_dpsi.min(w.dpsi_margin);
    }

    let checks = vec![
        CheckResult::at_least("envelope_residual", env_min, -slack),
        CheckResult::at_least("plateau_residual", plat_min, -slack),
        CheckResult::at_most("lower_profile_residual", lower_max, slack),
        CheckResult::at_most("small_constant_residual", delta_max, slack),
        CheckResult::at_least("field_nonnegative", psi_min, -slack),
        CheckResult::at_least("field_plateau_bound", margin_plateau, -slack),
        CheckResult::at_least("field_decay_bound", margin_decay, -slack),
        CheckResult::at_least("field_gradient_bound", margin_dpsi, -slack),
    ];
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        seed,
        samples: opts.samples,
        times_per_sample: times.len(),
        slack,
        checks,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{Coefficient, CoefficientKind, CoefficientPair, SinusoidTerm};
    use crate::dispersion::ChemoParams;

    fn constant_family() -> FrontFamily<f64> {
        let pair = CoefficientPair::constants(1.0, 1.0).unwrap();
        let chemo = ChemoParams::new(0.2, 1.0, 1.0).unwrap();
        FrontFamily::new(pair, chemo, 0.5).unwrap()
    }

    fn periodic_family() -> FrontFamily<f64> {
        let a = Coefficient::new(CoefficientKind::Periodic {
            mean: 1.0,
            period: 1.0,
            terms: vec![SinusoidTerm { amplitude: 0.5, frequency: 1.0, phase: 0.0 }],
        })
        .unwrap();
        let pair = CoefficientPair::new(a, Coefficient::constant(1.0).unwrap()).unwrap();
        let chemo = ChemoParams::new(0.1, 1.0, 2.0).unwrap();
        FrontFamily::new(pair, chemo, 0.5).unwrap()
    }

    #[test]
    fn random_members_stay_inside_the_set() {
        let fam = constant_family();
        let grid = GridSpec::new(-30.0, 30.0, 0.05).unwrap();
        for s in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            rng.set_stream(s);
            let phi = random_member(&fam, &grid, &mut rng).unwrap();
            for (x, v) in phi.iter_points() {
                assert!(v >= 0.0 && v <= fam.phi_plus(x) + 1e-15);
            }
        }
    }

    #[test]
    fn constant_scenario_suite_passes() {
        let fam = constant_family();
        let opts = VerifyOptions { samples: 8, ..VerifyOptions::default() };
        let report = barrier_suite(&fam, &opts, 42).unwrap();
        assert!(report.all_pass, "{report:?}");
        assert_eq!(report.checks.len(), 8);
        assert_eq!(report.times_per_sample, 1);
    }

    #[test]
    fn periodic_scenario_suite_passes() {
        let fam = periodic_family();
        let opts =
            VerifyOptions { samples: 6, times_per_sample: 4, ..VerifyOptions::default() };
        let report = barrier_suite(&fam, &opts, 1).unwrap();
        assert!(report.all_pass, "{report:?}");
        assert_eq!(report.times_per_sample, 4);
    }

    #[test]
    fn report_is_independent_of_worker_count() {
        let fam = constant_family();
        let opts = VerifyOptions { samples: 6, ..VerifyOptions::default() };
        let a = barrier_suite(&fam, &opts, 9).unwrap();
        let before = std::env::var("CHEMOFRONT_THREADS").ok();
        std::env::set_var("CHEMOFRONT_THREADS", "1");
        let b = barrier_suite(&fam, &opts, 9).unwrap();
        match before {
            Some(v) => std::env::set_var("CHEMOFRONT_THREADS", v),
            None => std::env::remove_var("CHEMOFRONT_THREADS"),
        }
        let sa = serde_json::to_string(&a).unwrap();
        let sb = serde_json::to_string(&b).unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn a_biased_profile_breaks_the_lower_sign() {
        // Sanity check that the suite can fail: pushing the small constant
        // above its cap flips the saturation sign.
        let fam = constant_family();
        let grid = GridSpec::new(-30.0, 30.0, 0.05).unwrap();
        let phi = grid.profile_from(|x| fam.phi_plus(x)).unwrap();
        let tails = TailSpec::plateau_left_exponential_right(&phi, 0.5);
        let field = green_convolve(&phi, &tails, 1.0, 1.0).unwrap();
        let too_big = grid.profile_from(|_| 1.2).unwrap();
        let r = residual_l_with_field(&too_big, 0.0, &field, TimeDeriv::Zero, &fam).unwrap();
        let max = r.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max > 10.0 * 0.05 * 0.05, "expected a sign violation, max = {max}");
    }
}
