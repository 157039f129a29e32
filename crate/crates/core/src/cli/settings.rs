//! Flag / config-file settings and their resolution into run plans.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use crate::dynamics::Method;
use crate::error::{Error, Result};
use crate::experiments::{duration_grid, uniform_grid, HamiltonianMode, ScenarioConfig};
use crate::hamiltonians::DecoherenceParams;
use crate::pulses::{DetuningParams, Task};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Transfer,
    Entangle,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Transfer => Task::Transfer,
            TaskArg::Entangle => Task::Entangle,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Dopri,
}

/// Every tunable, all optional so that defaults, file and flags can be layered.
#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct Settings {
    /// Task for commands that serve both (sweeps, closure, spectrum)
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    /// Peak Rabi frequency Ω₀ (transfer) or Ω₀′ (entangle), units of g
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Operation time T, units of 1/g
    #[arg(long = "big-t")]
    pub big_t: Option<f64>,
    /// Pulse delay τ/T (transfer) [default: 0.22]
    #[arg(long = "tau-frac")]
    pub tau_frac: Option<f64>,
    /// Gaussian offset θ (entangle) [default: 17/120]
    #[arg(long)]
    pub theta: Option<f64>,
    /// Gaussian width w (entangle) [default: 23/120]
    #[arg(long)]
    pub w: Option<f64>,
    /// Detuning Δ₁ [default: 6]
    #[arg(long, allow_negative_numbers = true)]
    pub delta1: Option<f64>,
    /// Detuning Δ₂ [default: 7]
    #[arg(long, allow_negative_numbers = true)]
    pub delta2: Option<f64>,
    /// Atomic decay rate Γ
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Cavity decay rate κ
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Photon cutoff for mode a [default: 1]
    #[arg(long = "nmax-a")]
    pub nmax_a: Option<usize>,
    /// Photon cutoff for mode b [default: 1]
    #[arg(long = "nmax-b")]
    pub nmax_b: Option<usize>,
    /// adiabatic | cdd | aux | aux-only | effective | effective-only
    /// (comma-separated list for sweep-duration)
    #[arg(long)]
    pub mode: Option<String>,
    /// Output samples; rows = samples + 1 [default: 1000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Integrator tolerance (absolute and relative) [default: 1e-8]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Integrator [default: dopri]
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Override the automatic step ceiling
    #[arg(long = "max-step")]
    pub max_step: Option<f64>,
    /// Integrate on the whole truncated basis instead of the reachable set
    #[arg(long = "full-space", num_args = 0..=1, default_missing_value = "true")]
    pub full_space: Option<bool>,
    /// Shortest T of a duration sweep [default: 10]
    #[arg(long = "t-min")]
    pub t_min: Option<f64>,
    /// Longest T of a duration sweep [default: 200]
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// T increment of a duration sweep [default: 5]
    #[arg(long = "t-step")]
    pub t_step: Option<f64>,
    /// Largest Γ of a decoherence sweep [default: 0.01]
    #[arg(long = "gamma-max")]
    pub gamma_max: Option<f64>,
    /// Largest κ of a decoherence sweep [default: 0.01]
    #[arg(long = "kappa-max")]
    pub kappa_max: Option<f64>,
    /// Points per axis of a decoherence sweep [default: 11]
    #[arg(long = "grid-points")]
    pub grid_points: Option<usize>,
    /// Worker threads for sweeps [default: available cores]
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Transfer,
    Entangle,
    SweepDuration,
    SweepDecoherence,
    CheckClosure,
    CheckEquivalence,
    Spectrum,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Transfer => "transfer",
            Command::Entangle => "entangle",
            Command::SweepDuration => "sweep-duration",
            Command::SweepDecoherence => "sweep-decoherence",
            Command::CheckClosure => "check-closure",
            Command::CheckEquivalence => "check-equivalence",
            Command::Spectrum => "spectrum",
        }
    }

    /// Task fixed by the command itself, if any.
    fn fixed_task(self) -> Option<Task> {
        match self {
            Command::Transfer | Command::CheckEquivalence => Some(Task::Transfer),
            Command::Entangle => Some(Task::Entangle),
            _ => None,
        }
    }

    /// Keys the command reads, given the resolved task.
    fn accepts(self, key: &str, task: Task) -> bool {
        let pulse = match task {
            Task::Transfer => matches!(key, "omega0" | "big-t" | "tau-frac"),
            Task::Entangle => matches!(key, "omega0" | "big-t" | "theta" | "w"),
        };
        let integ = matches!(key, "samples" | "tol" | "method" | "max-step" | "full-space");
        let det = matches!(key, "delta1" | "delta2");
        let trunc = matches!(key, "nmax-a" | "nmax-b");
        let rates = matches!(key, "gamma" | "kappa");
        if matches!(key, "jobs" | "task") {
            return true;
        }
        match self {
            Command::Transfer | Command::Entangle => pulse || integ || det || trunc || rates || key == "mode",
            Command::SweepDuration => {
                (pulse && key != "big-t")
                    || integ
                    || det
                    || trunc
                    || rates
                    || matches!(key, "mode" | "t-min" | "t-max" | "t-step")
            }
            Command::SweepDecoherence => {
                pulse || integ || det || trunc || matches!(key, "mode" | "gamma-max" | "kappa-max" | "grid-points")
            }
            Command::CheckClosure => pulse || det || trunc,
            Command::CheckEquivalence => pulse || integ || det || trunc,
            Command::Spectrum => pulse || key == "samples",
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("invalid value `{value}` for `{key}`: {e}"))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> std::result::Result<T, String> {
    T::from_str(value, false).map_err(|_| {
        let names: Vec<String> = T::value_variants()
            .iter()
            .filter_map(|v| v.to_possible_value().map(|p| p.get_name().to_string()))
            .collect();
        format!("invalid value `{value}` for `{key}` (expected one of {})", names.join(", "))
    })
}

fn render_enum<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

enum SetError {
    Unknown,
    Invalid(String),
}

impl Settings {
    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), SetError> {
        use SetError::Invalid;
        match key {
            "task" => self.task = Some(parse_enum(key, value).map_err(Invalid)?),
            "mode" => self.mode = Some(value.to_string()),
            "omega0" => self.omega0 = Some(parse_value(key, value).map_err(Invalid)?),
            "big-t" => self.big_t = Some(parse_value(key, value).map_err(Invalid)?),
            "tau-frac" => self.tau_frac = Some(parse_value(key, value).map_err(Invalid)?),
            "theta" => self.theta = Some(parse_value(key, value).map_err(Invalid)?),
            "w" => self.w = Some(parse_value(key, value).map_err(Invalid)?),
            "delta1" => self.delta1 = Some(parse_value(key, value).map_err(Invalid)?),
            "delta2" => self.delta2 = Some(parse_value(key, value).map_err(Invalid)?),
            "gamma" => self.gamma = Some(parse_value(key, value).map_err(Invalid)?),
            "kappa" => self.kappa = Some(parse_value(key, value).map_err(Invalid)?),
            "nmax-a" => self.nmax_a = Some(parse_value(key, value).map_err(Invalid)?),
            "nmax-b" => self.nmax_b = Some(parse_value(key, value).map_err(Invalid)?),
            "samples" => self.samples = Some(parse_value(key, value).map_err(Invalid)?),
            "tol" => self.tol = Some(parse_value(key, value).map_err(Invalid)?),
            "method" => self.method = Some(parse_enum(key, value).map_err(Invalid)?),
            "max-step" => self.max_step = Some(parse_value(key, value).map_err(Invalid)?),
            "full-space" => self.full_space = Some(parse_value(key, value).map_err(Invalid)?),
            "t-min" => self.t_min = Some(parse_value(key, value).map_err(Invalid)?),
            "t-max" => self.t_max = Some(parse_value(key, value).map_err(Invalid)?),
            "t-step" => self.t_step = Some(parse_value(key, value).map_err(Invalid)?),
            "gamma-max" => self.gamma_max = Some(parse_value(key, value).map_err(Invalid)?),
            "kappa-max" => self.kappa_max = Some(parse_value(key, value).map_err(Invalid)?),
            "grid-points" => self.grid_points = Some(parse_value(key, value).map_err(Invalid)?),
            "jobs" => self.jobs = Some(parse_value(key, value).map_err(Invalid)?),
            _ => return Err(SetError::Unknown),
        }
        Ok(())
    }

    /// Present values as `(key, value)` in canonical order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        fn push<T: ToString>(out: &mut Vec<(&'static str, String)>, k: &'static str, v: &Option<T>) {
            if let Some(v) = v {
                out.push((k, v.to_string()));
            }
        }
        let mut out = Vec::new();
        if let Some(t) = &self.task {
            out.push(("task", render_enum(t)));
        }
        push(&mut out, "mode", &self.mode);
        push(&mut out, "omega0", &self.omega0);
        push(&mut out, "big-t", &self.big_t);
        push(&mut out, "tau-frac", &self.tau_frac);
        push(&mut out, "theta", &self.theta);
        push(&mut out, "w", &self.w);
        push(&mut out, "delta1", &self.delta1);
        push(&mut out, "delta2", &self.delta2);
        push(&mut out, "gamma", &self.gamma);
        push(&mut out, "kappa", &self.kappa);
        push(&mut out, "nmax-a", &self.nmax_a);
        push(&mut out, "nmax-b", &self.nmax_b);
        push(&mut out, "samples", &self.samples);
        push(&mut out, "tol", &self.tol);
        if let Some(m) = &self.method {
            out.push(("method", render_enum(m)));
        }
        push(&mut out, "max-step", &self.max_step);
        push(&mut out, "full-space", &self.full_space);
        push(&mut out, "t-min", &self.t_min);
        push(&mut out, "t-max", &self.t_max);
        push(&mut out, "t-step", &self.t_step);
        push(&mut out, "gamma-max", &self.gamma_max);
        push(&mut out, "kappa-max", &self.kappa_max);
        push(&mut out, "grid-points", &self.grid_points);
        push(&mut out, "jobs", &self.jobs);
        out
    }

    /// `self` wins wherever it has a value.
    pub fn overlay(self, base: Settings) -> Settings {
        Settings {
            task: self.task.or(base.task),
            omega0: self.omega0.or(base.omega0),
            big_t: self.big_t.or(base.big_t),
            tau_frac: self.tau_frac.or(base.tau_frac),
            theta: self.theta.or(base.theta),
            w: self.w.or(base.w),
            delta1: self.delta1.or(base.delta1),
            delta2: self.delta2.or(base.delta2),
            gamma: self.gamma.or(base.gamma),
            kappa: self.kappa.or(base.kappa),
            nmax_a: self.nmax_a.or(base.nmax_a),
            nmax_b: self.nmax_b.or(base.nmax_b),
            mode: self.mode.or(base.mode),
            samples: self.samples.or(base.samples),
            tol: self.tol.or(base.tol),
            method: self.method.or(base.method),
            max_step: self.max_step.or(base.max_step),
            full_space: self.full_space.or(base.full_space),
            t_min: self.t_min.or(base.t_min),
            t_max: self.t_max.or(base.t_max),
            t_step: self.t_step.or(base.t_step),
            gamma_max: self.gamma_max.or(base.gamma_max),
            kappa_max: self.kappa_max.or(base.kappa_max),
            grid_points: self.grid_points.or(base.grid_points),
            jobs: self.jobs.or(base.jobs),
        }
    }
}

/// Parse a flat `key = value` file; `#` starts a comment. Keys use the flag
/// spelling (underscores are accepted for hyphens).
pub fn load_config(path: &Path) -> Result<Settings> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

pub fn parse_config(text: &str, path: &Path) -> Result<Settings> {
    let mut settings = Settings::default();
    let mut seen: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::ConfigParse {
            path: path.to_path_buf(),
            line: line_no,
            reason,
        };
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(format!("expected `key = value`, got `{line}`")));
        };
        let (key_raw, value) = (key.trim(), value.trim());
        let key = key_raw.replace('_', "-");
        if value.is_empty() {
            return Err(parse_err(format!("missing value for `{key_raw}`")));
        }
        if seen.contains(&key) {
            return Err(parse_err(format!("duplicate key `{key_raw}`")));
        }
        match settings.set(&key, value) {
            Ok(()) => seen.push(key),
            Err(SetError::Unknown) => {
                return Err(Error::UnknownKey {
                    path: path.to_path_buf(),
                    line: line_no,
                    key: key_raw.to_string(),
                })
            }
            Err(SetError::Invalid(reason)) => return Err(parse_err(reason)),
        }
    }
    Ok(settings)
}

/// Fully resolved inputs of one command.
#[derive(Clone, Debug)]
pub struct Plan {
    pub command: Command,
    pub scenario: ScenarioConfig,
    /// Modes for duration sweeps.
    pub modes: Vec<HamiltonianMode>,
    pub t_values: Vec<f64>,
    pub gammas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub jobs: usize,
    pub out: PathBuf,
    /// Everything that determines the output, in canonical order.
    pub resolved: Vec<(&'static str, String)>,
}

fn usage(msg: String) -> Error {
    Error::Usage(msg)
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Layer defaults ← config file ← flags and check that every supplied key
/// is meaningful for the command.
pub fn resolve(command: Command, flags: Settings, config: Option<&Path>, out: Option<PathBuf>) -> Result<Plan> {
    let file = match config {
        Some(p) => load_config(p)?,
        None => Settings::default(),
    };
    let merged = flags.overlay(file);

    let task = match (command.fixed_task(), merged.task) {
        (Some(fixed), Some(given)) if Task::from(given) != fixed => {
            return Err(usage(format!(
                "`{}` always runs the {} task (got --task {})",
                command.name(),
                fixed.name(),
                Task::from(given).name()
            )))
        }
        (Some(fixed), _) => fixed,
        (None, given) => given.map_or(Task::Transfer, Task::from),
    };
    for (key, _) in merged.pairs() {
        if !command.accepts(key, task) {
            let hint = match key {
                "theta" | "w" => " (entangle only)".to_string(),
                "tau-frac" => " (transfer only)".to_string(),
                "big-t" if command == Command::SweepDuration => " (use --t-min/--t-max/--t-step)".to_string(),
                "gamma" | "kappa" if command == Command::SweepDecoherence => {
                    " (use --gamma-max/--kappa-max/--grid-points)".to_string()
                }
                _ => String::new(),
            };
            return Err(usage(format!(
                "`--{key}` does not apply to `{}` with task {}{hint}",
                command.name(),
                task.name()
            )));
        }
    }

    let mut sc = ScenarioConfig::for_task(task);
    if let Some(v) = merged.omega0 {
        sc.omega0 = v;
    }
    if let Some(v) = merged.big_t {
        sc.big_t = v;
    }
    if let Some(v) = merged.tau_frac {
        sc.tau_frac = v;
    }
    if let Some(v) = merged.theta {
        sc.theta = v;
    }
    if let Some(v) = merged.w {
        sc.w = v;
    }
    let (d1, d2) = (
        merged.delta1.unwrap_or(sc.detuning.delta1),
        merged.delta2.unwrap_or(sc.detuning.delta2),
    );
    sc.detuning = DetuningParams::new(d1, d2)?;
    sc.decoherence = DecoherenceParams::new(merged.kappa.unwrap_or(0.0), merged.gamma.unwrap_or(0.0))?;
    if let Some(v) = merged.nmax_a {
        sc.n_max_a = v;
    }
    if let Some(v) = merged.nmax_b {
        sc.n_max_b = v;
    }
    if let Some(v) = merged.samples {
        sc.integrator.samples = v;
    }
    if let Some(v) = merged.tol {
        sc.integrator.tol = v;
    }
    if let Some(m) = merged.method {
        sc.integrator.method = match m {
            MethodArg::Rk4 => Method::Rk4,
            MethodArg::Dopri => Method::DormandPrince,
        };
    }
    sc.integrator.max_step = merged.max_step;
    sc.full_space = merged.full_space.unwrap_or(false);

    let mode_list = merged.mode.clone();
    let mut modes = Vec::new();
    match command {
        Command::SweepDuration => {
            let spec = mode_list.unwrap_or_else(|| "adiabatic,cdd,aux".to_string());
            for m in spec.split(',') {
                let m: HamiltonianMode = m.trim().parse()?;
                if modes.contains(&m) {
                    return Err(usage(format!("mode `{m}` listed twice")));
                }
                modes.push(m);
            }
        }
        _ => {
            if let Some(m) = mode_list {
                sc.mode = m.trim().parse()?;
            }
        }
    }
    sc.validate()?;
    if command == Command::SweepDuration {
        for &m in &modes {
            sc.clone().with_mode(m).validate()?;
        }
    }
    let probe = |c: &ScenarioConfig| -> Result<()> { c.hamiltonian(&c.space()).map(|_| ()) };
    match command {
        Command::SweepDuration => {}
        Command::CheckClosure | Command::CheckEquivalence => {
            probe(&sc.clone().with_mode(HamiltonianMode::AuxOnly))?;
        }
        Command::Spectrum => {}
        _ => probe(&sc)?,
    }

    let t_values = if command == Command::SweepDuration {
        duration_grid(
            merged.t_min.unwrap_or(10.0),
            merged.t_max.unwrap_or(200.0),
            merged.t_step.unwrap_or(5.0),
        )?
    } else {
        Vec::new()
    };
    let (gammas, kappas) = if command == Command::SweepDecoherence {
        let n = merged.grid_points.unwrap_or(11);
        let (gm, km) = (merged.gamma_max.unwrap_or(0.01), merged.kappa_max.unwrap_or(0.01));
        if n == 0 || !(gm >= 0.0) || !(km >= 0.0) {
            return Err(usage("decoherence grid needs grid-points >= 1 and nonnegative maxima".into()));
        }
        (uniform_grid(gm, n), uniform_grid(km, n))
    } else {
        (Vec::new(), Vec::new())
    };
    let jobs = merged.jobs.unwrap_or_else(default_jobs);
    if jobs == 0 {
        return Err(usage("`--jobs` must be at least 1".into()));
    }

    // Canonical resolved settings: every key the command reads, with its
    // effective value. `jobs` is excluded since it cannot change results.
    let mut full = Settings {
        task: Some(match task {
            Task::Transfer => TaskArg::Transfer,
            Task::Entangle => TaskArg::Entangle,
        }),
        mode: Some(match command {
            Command::SweepDuration => modes.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
            _ => sc.mode.name().to_string(),
        }),
        omega0: Some(sc.omega0),
        big_t: Some(sc.big_t),
        tau_frac: Some(sc.tau_frac),
        theta: Some(sc.theta),
        w: Some(sc.w),
        delta1: Some(sc.detuning.delta1),
        delta2: Some(sc.detuning.delta2),
        gamma: Some(sc.decoherence.gamma),
        kappa: Some(sc.decoherence.kappa),
        nmax_a: Some(sc.n_max_a),
        nmax_b: Some(sc.n_max_b),
        samples: Some(sc.integrator.samples),
        tol: Some(sc.integrator.tol),
        method: Some(match sc.integrator.method {
            Method::Rk4 => MethodArg::Rk4,
            Method::DormandPrince => MethodArg::Dopri,
        }),
        max_step: sc.integrator.max_step,
        full_space: Some(sc.full_space),
        t_min: merged.t_min.or(Some(10.0)),
        t_max: merged.t_max.or(Some(200.0)),
        t_step: merged.t_step.or(Some(5.0)),
        gamma_max: merged.gamma_max.or(Some(0.01)),
        kappa_max: merged.kappa_max.or(Some(0.01)),
        grid_points: merged.grid_points.or(Some(11)),
        jobs: None,
    };
    if command.fixed_task().is_some() {
        full.task = None;
    }
    let resolved = full
        .pairs()
        .into_iter()
        .filter(|(k, _)| *k != "task" || command.fixed_task().is_none())
        .filter(|(k, _)| command.accepts(k, task) && *k != "jobs")
        .collect();

    Ok(Plan {
        command,
        scenario: sc,
        modes,
        t_values,
        gammas,
        kappas,
        jobs,
        out: out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", command.name()))),
        resolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test.conf")
    }

    #[test]
    fn config_parsing() {
        let s = parse_config("# comment\n\nomega0 = 0.2  # trailing\nbig_t=40\n", p()).unwrap();
        assert_eq!(s.omega0, Some(0.2));
        assert_eq!(s.big_t, Some(40.0));
        assert_eq!(parse_config("", p()).unwrap(), Settings::default());
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        match parse_config("omega0 = 0.2\nomega_zero = 0.2\n", p()) {
            Err(Error::UnknownKey { line, key, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(key, "omega_zero");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_config("\nomega0 0.2", p()),
            Err(Error::ConfigParse { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("omega0 = x", p()),
            Err(Error::ConfigParse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("w = 1\nw = 2", p()),
            Err(Error::ConfigParse { line: 2, .. })
        ));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(&path, "omega0 = 0.2\nbig-t = 40\n").unwrap();
        let flags = Settings {
            omega0: Some(0.3),
            ..Default::default()
        };
        let plan = resolve(Command::Transfer, flags, Some(&path), None).unwrap();
        assert_eq!(plan.scenario.omega0, 0.3);
        assert_eq!(plan.scenario.big_t, 40.0);
        assert_eq!(plan.out, PathBuf::from("transfer.csv"));
    }

    #[test]
    fn defaults_per_command() {
        let plan = resolve(Command::Transfer, Settings::default(), None, None).unwrap();
        assert_eq!(plan.scenario, ScenarioConfig::transfer());
        let plan = resolve(Command::SweepDuration, Settings::default(), None, None).unwrap();
        assert_eq!(plan.t_values.len(), 39);
        assert_eq!(plan.modes.len(), 3);
        let plan = resolve(Command::SweepDecoherence, Settings::default(), None, None).unwrap();
        assert_eq!((plan.gammas.len(), plan.kappas.len()), (11, 11));
    }

    #[test]
    fn mismatches_are_rejected() {
        let theta = Settings {
            theta: Some(0.1),
            ..Default::default()
        };
        assert!(resolve(Command::Transfer, theta.clone(), None, None).is_err());
        assert!(resolve(Command::Entangle, theta, None, None).is_ok());
        let task = Settings {
            task: Some(TaskArg::Entangle),
            ..Default::default()
        };
        assert!(resolve(Command::Transfer, task, None, None).is_err());
        let same = Settings {
            delta1: Some(6.0),
            delta2: Some(6.0),
            ..Default::default()
        };
        assert!(resolve(Command::Transfer, same, None, None).is_err());
        let flipped = Settings {
            delta1: Some(7.0),
            delta2: Some(6.0),
            ..Default::default()
        };
        assert!(matches!(
            resolve(Command::Transfer, flipped, None, None),
            Err(Error::SignMismatch { .. })
        ));
    }

    #[test]
    fn resolved_pairs_round_trip_through_config() {
        let flags = Settings {
            omega0: Some(0.1 + 0.2),
            gamma: Some(0.004),
            ..Default::default()
        };
        let plan = resolve(Command::Entangle, flags, None, None).unwrap();
        let text: String = plan.resolved.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let again = resolve(Command::Entangle, parse_config(&text, p()).unwrap(), None, None).unwrap();
        assert_eq!(again.scenario, plan.scenario);
        assert_eq!(again.resolved, plan.resolved);
    }
}
