//! Command-line driver: scenario text in, deterministic artifacts out.
//!
//! Every subcommand reads one scenario file (or the built-in reference
//! scenario), writes its artifacts plus a `provenance.json` under
//! `--out`, and prints a short summary.  Exit codes: 0 on success, 1 when
//! the configuration or a standing hypothesis is rejected, 2 when a
//! numerical run breaks down.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chemofront::coefficients::{entire_logistic, LogisticOptions};
use chemofront::config::{default_config_text, parse_config, ScenarioConfig};
use chemofront::grid::TimeGrid;
use chemofront::error::{Error, Result};
use chemofront::front::FrontFamily;
use chemofront::output::{
    provenance, write_json, write_text, Csv, DispersionReport, SpeedReport, WaveReport,
};
use chemofront::parabolic::{LabStepper, LeftBc, RightBc, SolverState};
use chemofront::speed::{spreading_experiment, SpreadingOptions, TrackOptions};
use chemofront::verify::{barrier_suite, VerifyOptions};
use chemofront::wave::{wave, WaveOptions};

#[derive(Parser)]
#[command(
    name = "chemofront",
    version,
    about = "Transition fronts of a chemotaxis system with logistic growth: \
             spectral constants, wave construction, simulation, spreading \
             speeds, and barrier verification"
)]
struct Cli {
    /// Scenario configuration file; omitted means the built-in reference
    /// scenario (see `defaults`).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Directory receiving all artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spectral relation, critical speed, and barrier constants.
    Dispersion,
    /// Construct the transition front for the configured decay rate.
    Wave {
        /// Override the configured decay rate.
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Evolve the system in the laboratory frame from front-like data.
    Simulate,
    /// Release front-like data and measure its spreading speed.
    Speed,
    /// Randomized residual-sign and field-bound verification.
    Verify {
        /// Override the number of random comparison profiles.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Print the reference configuration with documented defaults.
    Defaults,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ScenarioConfig> {
    match path {
        None => Ok(ScenarioConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::ConfigInvalid {
                key: "scenario".into(),
                msg: format!("cannot read {}: {e}", p.display()),
            })?;
            parse_config(&text)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Cmd::Defaults = cli.command {
        print!("{}", default_config_text());
        return Ok(());
    }
    let cfg = load_config(&cli.scenario)?;
    std::fs::create_dir_all(&cli.out)?;
    match cli.command {
        Cmd::Dispersion => cmd_dispersion(&cfg, &cli.out),
        Cmd::Wave { kappa } => cmd_wave(cfg, &cli.out, kappa),
        Cmd::Simulate => cmd_simulate(&cfg, &cli.out),
        Cmd::Speed => cmd_speed(&cfg, &cli.out),
        Cmd::Verify { samples } => cmd_verify(&cfg, &cli.out, samples),
        Cmd::Defaults => unreachable!("handled above"),
    }
}

fn cmd_dispersion(cfg: &ScenarioConfig, out: &Path) -> Result<()> {
    let report = DispersionReport::build(cfg)?;
    write_json(&out.join("dispersion.json"), &report)?;
    write_json(&out.join("provenance.json"), &provenance(cfg, "dispersion"))?;
    println!(
        "dispersion: kappa_chi = {:.9e}, kappa_star = {:.9e}, c_star = {:.9e}",
        report.kappa_chi, report.kappa_star, report.c_star
    );
    println!(
        "front constants at kappa = {}: epsilon = {:.9e}, d = {:.9e}, delta0 = {:.9e}",
        cfg.kappa, report.epsilon, report.d, report.delta0
    );
    println!(
        "lambda_chi = {:.9e}, h1_margin = {:.9e}",
        report.lambda_chi, report.h1_margin
    );
    Ok(())
}

fn cmd_wave(mut cfg: ScenarioConfig, out: &Path, kappa: Option<f64>) -> Result<()> {
    if let Some(k) = kappa {
        cfg.kappa = k;
    }
    cfg.wave_gate()?;
    let pair = cfg.pair()?;
    let chemo = cfg.chemo()?;
    let opts = WaveOptions { tol_wave: cfg.tol_wave, dt: cfg.dt, ..WaveOptions::default() };
    let sol = wave(&pair, chemo, cfg.kappa, &cfg.grid()?, &opts)?;

    let mut csv = Csv::new(&["t", "x", "u", "v"]);
    for (j, u) in sol.profiles.iter().enumerate() {
        let t = sol.times[j];
        let v = sol.attractant[j].values();
        for (i, (x, uv)) in u.iter_points().enumerate() {
            csv.row(&[t, x, uv, v[i]]);
        }
    }
    write_text(&out.join("wave.csv"), &csv.into_string())?;
    write_json(&out.join("wave.json"), &WaveReport::from_solution(&sol))?;
    write_json(&out.join("provenance.json"), &provenance(&cfg, "wave"))?;
    println!(
        "wave: kappa = {}, residual = {:.3e}, periodicity defect = {:.3e}",
        sol.kappa, sol.residual_linf, sol.periodicity_defect
    );
    println!(
        "asymptotics: left defect = {:.3e}, right defect = {:.3e}; least mean speed = {:.9e}",
        sol.left_defect, sol.right_defect, sol.least_mean_speed
    );
    println!("fixed point reached in {} outer iterations", sol.outer_iterations);
    Ok(())
}

fn cmd_simulate(cfg: &ScenarioConfig, out: &Path) -> Result<()> {
    let pair = cfg.pair()?;
    let chemo = cfg.chemo()?;
    let star = entire_logistic(&pair, TimeGrid::new(0.0, 1.0, 2)?, LogisticOptions::default())?;
    let spec = cfg.grid()?;
    let u0 = spec.profile_from(|x| star.eval(0.0) * 1.0f64.min((-2.0 * x).exp()))?;
    let mut stepper = LabStepper::new(
        &pair,
        chemo,
        LeftBc::DirichletEntire(star.clone()),
        RightBc::DirichletZero,
        spec.n(),
    );
    let mut state = SolverState::new(u0, 0.0);

    let mut csv = Csv::new(&["t", "x", "u", "v"]);
    let mut frame = |state: &SolverState<f64>, field: &chemofront::elliptic::EllipticField<f64>| {
        let psi = field.psi.values();
        for (i, (x, u)) in state.u.iter_points().enumerate() {
            csv.row(&[state.t, x, u, psi[i]]);
        }
    };
    let f0 = stepper.field_of(&state.u)?;
    frame(&state, &f0);
    let marks = (cfg.t_end / cfg.record).ceil() as usize;
    for k in 1..=marks {
        let target = (cfg.record * k as f64).min(cfg.t_end);
        stepper.evolve_to(&mut state, target, cfg.dt, |_, _| {})?;
        let f = stepper.field_of(&state.u)?;
        frame(&state, &f);
        if target >= cfg.t_end {
            break;
        }
    }
    write_text(&out.join("simulate.csv"), &csv.into_string())?;
    write_json(&out.join("provenance.json"), &provenance(cfg, "simulate"))?;
    println!(
        "simulate: reached t = {}, {} undershoot clips, mass sup = {:.6e}",
        state.t,
        state.clip_count,
        state.u.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    );
    Ok(())
}

fn cmd_speed(cfg: &ScenarioConfig, out: &Path) -> Result<()> {
    let pair = cfg.pair()?;
    let chemo = cfg.chemo()?;
    let opts = SpreadingOptions {
        grid: cfg.grid()?,
        dt: cfg.dt,
        t_end: cfg.t_end,
        record_dt: cfg.record,
        track: TrackOptions { theta: cfg.theta, burn_in: cfg.burn_in, w_min: cfg.w_min },
    };
    let outcome = spreading_experiment(&pair, chemo, &opts)?;

    let mut csv = Csv::new(&["t", "x_cross", "window_speed"]);
    let e = &outcome.estimate;
    for (i, t) in e.times.iter().enumerate() {
        let w = e.window_speeds[i].unwrap_or(f64::NAN);
        csv.row(&[*t, e.crossings[i], w]);
    }
    write_text(&out.join("speed.csv"), &csv.into_string())?;
    write_json(&out.join("speed.json"), &SpeedReport::from_outcome(&outcome))?;
    write_json(&out.join("provenance.json"), &provenance(cfg, "speed"))?;
    println!(
        "speed: fit = {:.9e}, least mean = {:.9e}, bound = {:.9e} [{}]",
        e.fit_speed,
        e.least_mean_speed,
        outcome.bound,
        if outcome.pass { "PASS" } else { "FAIL" }
    );
    Ok(())
}

fn cmd_verify(cfg: &ScenarioConfig, out: &Path, samples: Option<usize>) -> Result<()> {
    let family = FrontFamily::new(cfg.pair()?, cfg.chemo()?, cfg.kappa)?;
    let mut opts = VerifyOptions { grid: cfg.grid()?, ..VerifyOptions::default() };
    if let Some(s) = samples {
        opts.samples = s;
    }
    let report = barrier_suite(&family, &opts, cfg.seed)?;
    write_json(&out.join("verify.json"), &report)?;
    write_json(&out.join("provenance.json"), &provenance(cfg, "verify"))?;
    for c in &report.checks {
        println!(
            "{:24} worst = {:+.6e} ({} {:+.6e}) [{}]",
            c.name,
            c.worst,
            if c.direction == "at_least" { ">=" } else { "<=" },
            c.threshold,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    if !report.all_pass {
        let failed = report.checks.iter().filter(|c| !c.pass).count();
        return Err(Error::Hypothesis(format!(
            "verification suite failed {failed} of {} checks",
            report.checks.len()
        )));
    }
    println!("verification suite passed all {} checks", report.checks.len());
    Ok(())
}
