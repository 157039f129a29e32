//! Command-line front end: argument parsing, config files, CSV + manifest
//! emission and exit codes (0 ok, 1 runtime / invariant failure, 2 usage).

mod output;
mod settings;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::error::{Error, Result};
use crate::experiments::{
    check_closure, check_equivalence, config_hash, run_scenario, sweep_decoherence, sweep_duration,
};
use crate::spectral::{adiabaticity_ratio, numeric_eigensystem, reduced_h0, TRACKING_MIN_POWER};

pub use output::{
    fmt_g12, manifest_path, trajectory_csv, DURATION_HEADER, HEATMAP_HEADER, SPECTRUM_HEADER, TRAJECTORY_HEADER,
};
pub use settings::{load_config, parse_config, resolve, Command, Plan, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "cavity-shortcut", version, about = "Shortcut-to-adiabaticity simulations for two Λ atoms in a two-mode cavity")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    settings: Settings,
    /// Output CSV (a `<out>.manifest` is written next to it) [default: <command>.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Population transfer |φ₁⟩ → |φ₅⟩ (sin⁴ pulses)
    Transfer(RunArgs),
    /// Bell-state creation (Gaussian pulses)
    Entangle(RunArgs),
    /// Final fidelity vs operation time T for several modes
    SweepDuration(RunArgs),
    /// Final fidelity on a Γ × κ grid
    SweepDecoherence(RunArgs),
    /// Reachable-subspace sizes from |φ₁⟩
    CheckClosure(RunArgs),
    /// Flip-flop approximation and counter-diabatic reconstruction gaps
    CheckEquivalence(RunArgs),
    /// Instantaneous eigenvalues and adiabaticity ratio of the reference drive
    Spectrum(RunArgs),
}

impl Sub {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Sub::Transfer(a) => (Command::Transfer, a),
            Sub::Entangle(a) => (Command::Entangle, a),
            Sub::SweepDuration(a) => (Command::SweepDuration, a),
            Sub::SweepDecoherence(a) => (Command::SweepDecoherence, a),
            Sub::CheckClosure(a) => (Command::CheckClosure, a),
            Sub::CheckEquivalence(a) => (Command::CheckEquivalence, a),
            Sub::Spectrum(a) => (Command::Spectrum, a),
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let (command, args) = cli.command.split();
    let plan = match resolve(command, args.settings, args.config.as_deref(), args.out) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(&plan) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

/// Run a resolved plan, write its CSV and manifest, print a summary.
pub fn execute(plan: &Plan) -> Result<i32> {
    let sc = &plan.scenario;
    let hash = config_hash(&plan.resolved);
    let mut notes = Vec::new();
    let mut code = EXIT_OK;
    let csv = match plan.command {
        Command::Transfer | Command::Entangle => {
            let r = run_scenario(sc)?;
            println!(
                "{} ({} mode, {} states): final fidelity {}",
                sc.task.name(),
                sc.mode,
                r.dim,
                fmt_g12(r.final_fidelity)
            );
            trajectory_csv(&r.trajectory)
        }
        Command::SweepDuration => {
            let s = sweep_duration(sc, &plan.modes, &plan.t_values, plan.jobs)?;
            for &m in &plan.modes {
                match s.first_crossing(m, 0.98) {
                    Some(t) => println!("{m}: F >= 0.98 first at T = {t}"),
                    None => println!("{m}: F < 0.98 over the whole grid"),
                }
            }
            code = report_failures(&s, &mut notes);
            output::sweep_csv(&s)
        }
        Command::SweepDecoherence => {
            let s = sweep_decoherence(sc, &plan.gammas, &plan.kappas, plan.jobs)?;
            code = report_failures(&s, &mut notes);
            output::sweep_csv(&s)
        }
        Command::CheckClosure => {
            let r = check_closure(sc)?;
            let (a, b, c) = r.sizes();
            println!("reachable from |φ₁⟩: H₀ {a}, H₀+H̃ {b}, with jumps {c}");
            output::closure_csv(&r)
        }
        Command::CheckEquivalence => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(plan.jobs)
                .build()
                .map_err(|e| Error::param("jobs", e.to_string()))?;
            let r = pool.install(|| check_equivalence(sc))?;
            for p in &r.points {
                println!(
                    "detunings x{}: max |ΔP1| = {}, max |ΔP5| = {}",
                    p.scale,
                    fmt_g12(p.max_dp1),
                    fmt_g12(p.max_dp5)
                );
            }
            for (o, g) in &r.reconstruction {
                println!("Ω₀ = {o}: counter-diabatic reconstruction gap {}", fmt_g12(*g));
            }
            output::equivalence_csv(&r)
        }
        Command::Spectrum => spectrum_csv(plan)?,
    };
    output::write_file(&plan.out, &csv)?;
    let manifest = manifest_path(&plan.out);
    output::write_file(
        &manifest,
        &output::manifest_text(plan.command.name(), &hash, &plan.out, &plan.resolved, &notes),
    )?;
    info!("wrote {} and {}", plan.out.display(), manifest.display());
    Ok(code)
}

fn report_failures(s: &crate::experiments::SweepResult, notes: &mut Vec<String>) -> i32 {
    let mut code = EXIT_OK;
    for (i, e) in s.failures() {
        eprintln!("error: grid point {i} failed: {e}");
        notes.push(format!("failed point {i}: {e}"));
        code = EXIT_FAILURE;
    }
    code
}

fn spectrum_csv(plan: &Plan) -> Result<String> {
    use std::fmt::Write as _;
    let pulses = plan.scenario.pulses()?;
    let h = reduced_h0(&pulses)?;
    let (w0, w1) = pulses.window();
    let n = plan.scenario.integrator.samples;
    let mut s = String::from(SPECTRUM_HEADER);
    s.push('\n');
    for k in 0..=n {
        let t = if k == n { w1 } else { w0 + (w1 - w0) * k as f64 / n as f64 };
        let [o1, o2] = pulses.omegas(t);
        let snap = numeric_eigensystem(&h.evaluate(t), t)?;
        let _ = write!(s, "{},{},{}", fmt_g12(t), fmt_g12(o1), fmt_g12(o2));
        for label in 1..=5 {
            let _ = write!(s, ",{}", fmt_g12(snap.by_label(label).expect("five labels").0));
        }
        let _ = write!(s, ",{},", fmt_g12(pulses.cdd_coupling(t)));
        let interior = t - w0 > 2e-4 * (w1 - w0) && w1 - t > 2e-4 * (w1 - w0);
        if interior && o1 * o1 + o2 * o2 > TRACKING_MIN_POWER {
            let mut worst: f64 = 0.0;
            for m in 2..=5 {
                worst = worst.max(adiabaticity_ratio(t, &pulses, m)?);
            }
            s.push_str(&fmt_g12(worst));
        }
        s.push('\n');
    }
    Ok(s)
}
