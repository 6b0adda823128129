//! Property tests: invariants that must hold across the whole admissible
//! parameter space, not just at the frozen reference scenarios.  Each block
//! states the invariant in its doc comment; tolerances are rounding-level
//! slack, never modelling error.

use chemofront::coefficients::{
    entire_logistic, Coefficient, CoefficientKind, CoefficientPair, LogisticOptions, SinusoidTerm,
};
use chemofront::config::{parse_config, ScenarioConfig};
use chemofront::dispersion::{
    c_star, choose_epsilon, eta, front_constants, kappa_chi, ChemoParams,
};
use chemofront::elliptic::green_convolve;
use chemofront::grid::{GridProfile, GridSpec, LeftTail, RightTail, TailSpec, TimeGrid};
use chemofront::output::fmt_float;
use proptest::prelude::*;

/// Scenario coefficient kinds covering every branch of the text format.
fn coeff_strategy() -> impl Strategy<Value = CoefficientKind<f64>> {
    let constant = (0.5f64..3.0).prop_map(CoefficientKind::Constant);
    let periodic = (0.8f64..2.0, prop::collection::vec((0.05f64..0.25, 1u32..4, 0.0f64..6.2), 1..3))
        .prop_map(|(mean, terms)| CoefficientKind::Periodic {
            mean,
            period: 1.0,
            terms: terms
                .into_iter()
                .map(|(rel, freq, phase)| SinusoidTerm {
                    amplitude: rel * mean,
                    frequency: freq as f64,
                    phase,
                })
                .collect(),
        });
    let sampled = prop::collection::vec((0.5f64..5.0, 0.5f64..2.0), 3..6).prop_map(|steps| {
        let mut t = -10.0;
        let (mut times, mut values) = (Vec::new(), Vec::new());
        for (gap, v) in steps {
            t += gap;
            times.push(t);
            values.push(v);
        }
        CoefficientKind::Sampled { times, values }
    });
    prop_oneof![constant, periodic, sampled]
}

proptest! {
    /// `eta` is strictly increasing on `(0, sqrt(lambda))`.
    #[test]
    fn eta_is_strictly_increasing(
        lambda in 0.3f64..8.0,
        f1 in 0.02f64..0.97,
        frac in 0.02f64..1.0,
    ) {
        let root = lambda.sqrt();
        let f2 = f1 + (0.98 - f1) * frac;
        let (lo, hi) = (eta(root * f1, lambda).unwrap(), eta(root * f2, lambda).unwrap());
        prop_assert!(hi > lo, "eta({f2}*root) = {hi} <= eta({f1}*root) = {lo}");
    }

    /// `kappa_chi` inverts `eta`: the computed rate reproduces the
    /// saturation ratio it was solved for.
    #[test]
    fn kappa_chi_inverts_eta(
        lambda in 0.3f64..6.0,
        chi_mu in 0.05f64..2.0,
        ratio in 0.1f64..25.0,
    ) {
        let params = ChemoParams::new(chi_mu, 1.0, lambda).unwrap();
        let kc = kappa_chi(&params, chi_mu * (1.0 + ratio)).unwrap();
        prop_assert!(!kc.chemotaxis_absent);
        prop_assert!(kc.value > 0.0 && kc.value < lambda.sqrt());
        let back = eta(kc.value, lambda).unwrap();
        prop_assert!(
            (back - ratio).abs() <= 1e-9 * (1.0 + ratio),
            "eta({}) = {back} vs ratio {ratio}",
            kc.value
        );
    }

    /// The least mean speed never drops below the reaction-diffusion floor
    /// `2 sqrt(a_lower)`, the floor is attained bitwise whenever the
    /// chemotaxis cap is inactive, and the minimizing rate respects both
    /// caps.
    #[test]
    fn c_star_respects_the_speed_floor(
        a in 0.3f64..2.5,
        chi_mu in 0.01f64..0.5,
        excess in 0.1f64..3.0,
        lambda in 0.3f64..5.0,
    ) {
        // b > chi mu (1 + a_sup/a_inf) = 2 chi mu for constant growth.
        let pair = CoefficientPair::constants(a, 2.0 * chi_mu + excess).unwrap();
        let params = ChemoParams::new(chi_mu, 1.0, lambda).unwrap();
        let cs = c_star(&params, &pair).unwrap();
        prop_assert!(cs.kappa_star <= a.sqrt() + 1e-12);
        prop_assert!(cs.kappa_star <= cs.kappa_chi.value + 1e-12);
        prop_assert!(cs.c_star >= 2.0 * a.sqrt() - 1e-12);
        if cs.kappa_chi.value >= a.sqrt() {
            prop_assert_eq!(cs.c_star, 2.0 * a.sqrt());
        }
    }

    /// The calibrated sub/super-solution family is well formed over random
    /// admissible scenarios: positive correction constants, `d >= 1`, a
    /// positive uniform level below the crest, and the crossing-point
    /// identity `x^+ - x^- = gap`.
    #[test]
    fn front_calibration_is_well_formed(
        a in 0.4f64..2.0,
        chi_mu in 0.01f64..0.4,
        excess in 0.2f64..2.0,
        lambda in 0.5f64..4.0,
        frac in 0.15f64..0.85,
    ) {
        let pair = CoefficientPair::constants(a, 2.0 * chi_mu + excess).unwrap();
        let params = ChemoParams::new(chi_mu, 1.0, lambda).unwrap();
        let cs = c_star(&params, &pair).unwrap();
        let kappa = frac * cs.kappa_star;
        let eps = choose_epsilon(&pair, &params, kappa).unwrap();
        prop_assert!(eps > 0.0 && eps < kappa);
        let f = front_constants(&pair, &params, kappa, eps).unwrap();
        prop_assert!(f.a0 > 0.0 && f.a1 > 0.0 && f.a2 > 0.0);
        prop_assert!(f.d >= 1.0);
        prop_assert!(f.delta0 > 0.0 && f.delta0 < f.peak_inf());
        prop_assert!(f.x_minus(0.0) < f.x_plus(0.0));
        prop_assert!((f.x_plus(0.0) - f.x_minus(0.0) - f.gap()).abs() <= 1e-10);
    }

    /// The screened-Poisson solve is linear in the source, node for node,
    /// even for rough data.
    #[test]
    fn green_convolution_is_linear(
        v1 in prop::collection::vec(0.0f64..1.0, 99),
        v2 in prop::collection::vec(0.0f64..1.0, 99),
        alpha in 0.1f64..3.0,
        beta in 0.1f64..3.0,
        lambda in 0.3f64..4.0,
        mu in 0.3f64..3.0,
    ) {
        // Taper to zero at both ends so the zero tails are consistent.
        let pad = |v: &[f64]| {
            let mut w = vec![0.0];
            w.extend_from_slice(v);
            w.push(0.0);
            w
        };
        let (u1, u2) = (pad(&v1), pad(&v2));
        let combo: Vec<f64> = u1.iter().zip(&u2).map(|(x, y)| alpha * x + beta * y).collect();
        let tails = TailSpec::new(LeftTail::Constant(0.0), RightTail::Zero);
        let f1 = green_convolve(&GridProfile::new(-5.0, 0.1, u1).unwrap(), &tails, lambda, mu).unwrap();
        let f2 = green_convolve(&GridProfile::new(-5.0, 0.1, u2).unwrap(), &tails, lambda, mu).unwrap();
        let fc = green_convolve(&GridProfile::new(-5.0, 0.1, combo).unwrap(), &tails, lambda, mu).unwrap();
        for i in 0..fc.psi.n() {
            let psi = alpha * f1.psi.values()[i] + beta * f2.psi.values()[i];
            prop_assert!((fc.psi.values()[i] - psi).abs() <= 1e-10);
            let dpsi = alpha * f1.dpsi.values()[i] + beta * f2.dpsi.values()[i];
            prop_assert!((fc.dpsi.values()[i] - dpsi).abs() <= 1e-10);
        }
    }

    /// Nonnegative sources produce strictly positive fields; Gaussian bumps
    /// keep the cubic interpolant nonnegative, so no quadrature undershoot
    /// can be blamed.
    #[test]
    fn screened_fields_of_bump_sources_are_positive(
        bumps in prop::collection::vec((0.2f64..2.0, -4.0f64..4.0, 0.3f64..1.0), 1..4),
        lambda in 0.3f64..4.0,
        mu in 0.3f64..3.0,
    ) {
        let grid = GridSpec::new(-10.0, 10.0, 0.1).unwrap();
        let u = grid
            .profile_from(|x| {
                bumps
                    .iter()
                    .map(|&(amp, c, w)| amp * (-(x - c) * (x - c) / (2.0 * w * w)).exp())
                    .sum()
            })
            .unwrap();
        let tails = TailSpec::new(LeftTail::Constant(0.0), RightTail::Zero);
        let field = green_convolve(&u, &tails, lambda, mu).unwrap();
        for &v in field.psi.values() {
            prop_assert!(v > 0.0);
        }
    }

    /// A constant source with matching constant tails yields the uniform
    /// field `mu c / lambda` and a vanishing gradient.
    #[test]
    fn constant_source_yields_the_uniform_field(
        c in 0.2f64..3.0,
        lambda in 0.3f64..4.0,
        mu in 0.3f64..3.0,
    ) {
        let grid = GridSpec::new(-5.0, 5.0, 0.1).unwrap();
        let u = grid.profile_from(|_| c).unwrap();
        let tails = TailSpec::new(
            LeftTail::Constant(c),
            RightTail::Exponential { amplitude: c, rate: 0.0 },
        );
        let field = green_convolve(&u, &tails, lambda, mu).unwrap();
        let plateau = mu * c / lambda;
        for i in 0..field.psi.n() {
            prop_assert!((field.psi.values()[i] - plateau).abs() <= 1e-10 * plateau);
            prop_assert!(field.dpsi.values()[i].abs() <= 1e-10 * plateau);
        }
    }

    /// Periodic coefficients stay inside their reported pointwise bounds
    /// and their least mean is the period average.
    #[test]
    fn periodic_coefficients_stay_within_their_bounds(
        mean in 0.8f64..2.5,
        rel1 in 0.05f64..0.3,
        rel2 in 0.0f64..0.25,
        freq1 in 1u32..4,
        freq2 in 1u32..4,
        ph1 in 0.0f64..6.2,
        ph2 in 0.0f64..6.2,
        ts in prop::collection::vec(-20.0f64..20.0, 8),
    ) {
        let c = Coefficient::new(CoefficientKind::Periodic {
            mean,
            period: 1.0,
            terms: vec![
                SinusoidTerm { amplitude: rel1 * mean, frequency: freq1 as f64, phase: ph1 },
                SinusoidTerm { amplitude: rel2 * mean, frequency: freq2 as f64, phase: ph2 },
            ],
        })
        .unwrap();
        prop_assert!(c.inf() > 0.0);
        let slack = 1e-9 * mean;
        for &t in &ts {
            let v = c.eval(t);
            prop_assert!(v >= c.inf() - slack && v <= c.sup() + slack);
        }
        prop_assert!((c.lower_mean() - mean).abs() <= 1e-12 * mean);
        prop_assert!((c.upper_mean() - mean).abs() <= 1e-12 * mean);
        prop_assert!(!c.mean_is_estimate());
    }

    /// Constant coefficients admit exactly one bounded positive orbit: the
    /// equilibrium `a/b`.
    #[test]
    fn constant_logistic_is_the_equilibrium(
        a in 0.2f64..3.0,
        b in 0.2f64..3.0,
        t in -20.0f64..20.0,
    ) {
        let pair = CoefficientPair::constants(a, b).unwrap();
        let star = entire_logistic(
            &pair,
            TimeGrid::new(0.0, 1.0, 2).unwrap(),
            LogisticOptions::default(),
        )
        .unwrap();
        prop_assert_eq!(star.eval(t), a / b);
        prop_assert_eq!(star.inf(), star.sup());
    }

    /// The canonical text form is a fixed point: serialize, parse, compare
    /// structurally and textually.
    #[test]
    fn config_text_round_trips(
        a in coeff_strategy(),
        b_value in 0.5f64..3.0,
        chi in 0.0f64..0.5,
        mu in 0.2f64..2.0,
        lambda in 0.3f64..4.0,
        dx in 0.01f64..0.3,
        dt in 1e-4f64..0.05,
        kappa in 0.1f64..1.5,
        theta in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let cfg = ScenarioConfig {
            a,
            b: CoefficientKind::Constant(b_value),
            chi,
            mu,
            lambda,
            x0: -50.0,
            x_end: 50.0,
            dx,
            dt,
            t_end: 30.0,
            record: 0.5,
            kappa,
            tol_wave: 1e-4,
            theta,
            w_min: 10.0,
            burn_in: 5.0,
            seed,
        };
        let text = cfg.to_text();
        let parsed = parse_config(&text).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(parsed.to_text(), text);
    }

    /// 17 significant digits round-trip every finite double bitwise.
    #[test]
    fn float_format_round_trips_bitwise(v in any::<f64>()) {
        prop_assume!(v.is_finite());
        let back: f64 = fmt_float(v).parse().unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }

    /// Profile interpolation reproduces node values and clamps outside the
    /// grid.
    #[test]
    fn interp_is_node_exact_and_clamped(
        values in prop::collection::vec(-5.0f64..5.0, 16..40),
        x0 in -10.0f64..10.0,
        dx in 0.01f64..1.0,
        off in 0.1f64..50.0,
    ) {
        let p = GridProfile::new(x0, dx, values.clone()).unwrap();
        for (i, &v) in values.iter().enumerate() {
            prop_assert!((p.interp(p.x(i)) - v).abs() <= 1e-9 * (1.0 + v.abs()));
        }
        prop_assert_eq!(p.interp(x0 - off), values[0]);
        prop_assert_eq!(p.interp(p.x_end() + off), *values.last().unwrap());
    }
}
