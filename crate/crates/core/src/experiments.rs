//! Named scenarios: single transfer / entanglement runs, duration and
//! decoherence sweeps, and the closure and equivalence checks.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use log::{debug, warn};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::dynamics::{
    bell_target, propagate_lindblad, propagate_schrodinger, reduce_to_reachable, IntegratorConfig, Method, Target,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::hamiltonians::{
    build_h0, build_h1_analytic, build_h_aux, build_h_eff, build_jump_operators, DecoherenceParams,
    TimeDependentHamiltonian,
};
use crate::pulses::{DetuningParams, EntanglePulseParams, PulseSet, Task, TransferPulseParams};
use crate::spectral::cdd_reconstruction_gap;
use crate::statespace::{
    reachable_subspace, BasisLabel, DensityMatrix, Space, StateVector, DEFAULT_REACH_THRESHOLD,
};

/// Which Hamiltonian drives the evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HamiltonianMode {
    /// H₀ alone.
    Adiabatic,
    /// Analytic H₁ alone.
    Cdd,
    /// H₀ + H̃.
    Aux,
    /// H̃ alone.
    AuxOnly,
    /// H₀ + H̃_eff.
    Effective,
    /// H̃_eff alone.
    EffectiveOnly,
}

impl HamiltonianMode {
    pub const ALL: [HamiltonianMode; 6] = [
        HamiltonianMode::Adiabatic,
        HamiltonianMode::Cdd,
        HamiltonianMode::Aux,
        HamiltonianMode::AuxOnly,
        HamiltonianMode::Effective,
        HamiltonianMode::EffectiveOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HamiltonianMode::Adiabatic => "adiabatic",
            HamiltonianMode::Cdd => "cdd",
            HamiltonianMode::Aux => "aux",
            HamiltonianMode::AuxOnly => "aux-only",
            HamiltonianMode::Effective => "effective",
            HamiltonianMode::EffectiveOnly => "effective-only",
        }
    }

    /// Modes that involve the auxiliary excited level and mode b.
    pub fn needs_mode_b(self) -> bool {
        !matches!(self, HamiltonianMode::Adiabatic | HamiltonianMode::Cdd)
    }
}

impl fmt::Display for HamiltonianMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HamiltonianMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HamiltonianMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = HamiltonianMode::ALL.iter().map(|m| m.name()).collect();
                Error::param("mode", format!("unknown mode `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub task: Task,
    pub mode: HamiltonianMode,
    /// Ω₀ for transfer, Ω₀′ for entanglement.
    pub omega0: f64,
    pub big_t: f64,
    /// τ/T, transfer only.
    pub tau_frac: f64,
    /// Gaussian offset and width, entanglement only.
    pub theta: f64,
    pub w: f64,
    pub detuning: DetuningParams,
    pub decoherence: DecoherenceParams,
    pub n_max_a: usize,
    pub n_max_b: usize,
    pub integrator: IntegratorConfig,
    /// Propagate on the whole truncated basis instead of the reachable set.
    pub full_space: bool,
}

impl ScenarioConfig {
    pub fn transfer() -> Self {
        ScenarioConfig {
            task: Task::Transfer,
            mode: HamiltonianMode::Aux,
            omega0: 0.2,
            big_t: 50.0,
            tau_frac: 0.22,
            theta: 17.0 / 120.0,
            w: 23.0 / 120.0,
            detuning: DetuningParams::standard(),
            decoherence: DecoherenceParams::none(),
            n_max_a: 1,
            n_max_b: 1,
            integrator: IntegratorConfig::default(),
            full_space: false,
        }
    }

    pub fn entangle() -> Self {
        ScenarioConfig {
            task: Task::Entangle,
            omega0: 0.3,
            big_t: 30.0,
            ..ScenarioConfig::transfer()
        }
    }

    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Transfer => ScenarioConfig::transfer(),
            Task::Entangle => ScenarioConfig::entangle(),
        }
    }

    pub fn with_mode(mut self, mode: HamiltonianMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_duration(mut self, big_t: f64) -> Self {
        self.big_t = big_t;
        self
    }

    pub fn with_decoherence(mut self, kappa: f64, gamma: f64) -> Result<Self> {
        self.decoherence = DecoherenceParams::new(kappa, gamma)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.pulses()?;
        DetuningParams::new(self.detuning.delta1, self.detuning.delta2)?;
        DecoherenceParams::new(self.decoherence.kappa, self.decoherence.gamma)?;
        self.integrator.validate()?;
        if self.mode.needs_mode_b() && self.n_max_b == 0 {
            return Err(Error::Truncation { n_max_b: 0 });
        }
        Ok(())
    }

    pub fn pulses(&self) -> Result<PulseSet> {
        Ok(match self.task {
            Task::Transfer => PulseSet::transfer(TransferPulseParams::new(
                self.omega0,
                self.big_t,
                self.tau_frac * self.big_t,
            )?),
            Task::Entangle => PulseSet::entangle(EntanglePulseParams::new(self.omega0, self.big_t, self.theta, self.w)?),
        })
    }

    pub fn space(&self) -> Arc<Space> {
        Space::product(self.n_max_a, self.n_max_b)
    }

    /// Hamiltonian for the configured mode on `space`.
    pub fn hamiltonian(&self, space: &Arc<Space>) -> Result<TimeDependentHamiltonian> {
        let pulses = self.pulses()?;
        let det = &self.detuning;
        match self.mode {
            HamiltonianMode::Adiabatic => Ok(build_h0(space, &pulses)),
            HamiltonianMode::Cdd => build_h1_analytic(space, &pulses),
            HamiltonianMode::Aux => build_h0(space, &pulses).plus(build_h_aux(space, &pulses, det)?),
            HamiltonianMode::AuxOnly => build_h_aux(space, &pulses, det),
            HamiltonianMode::Effective => build_h0(space, &pulses).plus(build_h_eff(space, &pulses, det)?),
            HamiltonianMode::EffectiveOnly => build_h_eff(space, &pulses, det),
        }
    }

    /// Ideal final state: |φ₅⟩ for transfer, the Bell state for entanglement.
    pub fn target(&self, space: &Arc<Space>) -> Result<StateVector> {
        match self.task {
            Task::Transfer => StateVector::basis_state(space, &BasisLabel::PHI5),
            Task::Entangle => bell_target(space),
        }
    }

    /// Resolved parameters as `key = value` pairs (keys mirror CLI flags).
    /// Only keys meaningful for the task are listed.
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        let mut kv = vec![
            ("task", self.task.name().to_string()),
            ("mode", self.mode.name().to_string()),
            ("omega0", self.omega0.to_string()),
            ("big-t", self.big_t.to_string()),
        ];
        match self.task {
            Task::Transfer => kv.push(("tau-frac", self.tau_frac.to_string())),
            Task::Entangle => {
                kv.push(("theta", self.theta.to_string()));
                kv.push(("w", self.w.to_string()));
            }
        }
        kv.extend([
            ("delta1", self.detuning.delta1.to_string()),
            ("delta2", self.detuning.delta2.to_string()),
            ("gamma", self.decoherence.gamma.to_string()),
            ("kappa", self.decoherence.kappa.to_string()),
            ("nmax-a", self.n_max_a.to_string()),
            ("nmax-b", self.n_max_b.to_string()),
            ("samples", self.integrator.samples.to_string()),
            ("tol", self.integrator.tol.to_string()),
        ]);
        if self.integrator.method == Method::Rk4 {
            kv.push(("method", "rk4".into()));
        }
        if let Some(h) = self.integrator.max_step {
            kv.push(("max-step", h.to_string()));
        }
        if self.full_space {
            kv.push(("full-space", "true".into()));
        }
        kv
    }

    /// SHA-256 over the canonical `key = value` rendering.
    pub fn hash(&self) -> String {
        config_hash(&self.key_values())
    }
}

pub fn config_hash(kv: &[(&str, String)]) -> String {
    let mut hasher = Sha256::new();
    for (k, v) in kv {
        hasher.update(k.as_bytes());
        hasher.update(b" = ");
        hasher.update(v.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

/// One completed scenario.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub trajectory: Trajectory,
    pub final_fidelity: f64,
    /// Dimension of the space actually integrated.
    pub dim: usize,
}

impl RunResult {
    pub fn final_population(&self, label: &BasisLabel) -> f64 {
        self.trajectory
            .population(label)
            .and_then(|p| p.last().copied())
            .unwrap_or(0.0)
    }
}

/// Run the configured task: Schrödinger evolution when all rates vanish,
/// Lindblad otherwise. Starts in |φ₁⟩.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult> {
    cfg.validate()?;
    let space = cfg.space();
    let h = cfg.hamiltonian(&space)?;
    let window = cfg.pulses()?.window();
    let psi0 = StateVector::basis_state(&space, &BasisLabel::PHI1)?;
    let target = cfg.target(&space)?;
    let jumps = if cfg.decoherence.is_zero() {
        Vec::new()
    } else {
        build_jump_operators(&space, &cfg.decoherence)
    };

    let (space, h, jumps) = if cfg.full_space {
        (space, h, jumps)
    } else {
        reduce_to_reachable(&h, &jumps, &psi0)?
    };
    let psi0 = psi0.project_onto(&space)?;
    let target = Target::Pure(target.project_onto(&space)?);
    debug!(
        "{} / {}: integrating on {} states over {:?}",
        cfg.task.name(),
        cfg.mode,
        space.dim(),
        window
    );

    let trajectory = if jumps.is_empty() {
        propagate_schrodinger(&h, &psi0, window, &cfg.integrator, Some(&target))?.0
    } else {
        propagate_lindblad(&h, &jumps, &DensityMatrix::from_pure(&psi0), window, &cfg.integrator, Some(&target))?.0
    };
    let final_fidelity = trajectory.final_fidelity().expect("target supplied");
    Ok(RunResult {
        trajectory,
        final_fidelity,
        dim: space.dim(),
    })
}

pub fn run_transfer(cfg: &ScenarioConfig) -> Result<RunResult> {
    if cfg.task != Task::Transfer {
        return Err(Error::param("task", "run_transfer needs a transfer configuration"));
    }
    run_scenario(cfg)
}

pub fn run_entangle(cfg: &ScenarioConfig) -> Result<RunResult> {
    if cfg.task != Task::Entangle {
        return Err(Error::param("task", "run_entangle needs an entangle configuration"));
    }
    run_scenario(cfg)
}

/// Grid definition of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepAxes {
    /// Points ordered mode-major, then by T.
    Duration {
        modes: Vec<HamiltonianMode>,
        t_values: Vec<f64>,
    },
    /// Points ordered Γ-major, then by κ.
    Decoherence { gammas: Vec<f64>, kappas: Vec<f64> },
}

/// Final fidelities over a grid. A failed point keeps its error message.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub task: Task,
    pub axes: SweepAxes,
    pub fidelity: Vec<std::result::Result<f64, String>>,
    pub config_hash: String,
}

impl SweepResult {
    pub fn failures(&self) -> impl Iterator<Item = (usize, &str)> {
        self.fidelity
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.as_ref().err().map(|e| (i, e.as_str())))
    }

    /// Fidelity vs T for one mode of a duration sweep.
    pub fn curve(&self, mode: HamiltonianMode) -> Option<Vec<(f64, Option<f64>)>> {
        let SweepAxes::Duration { modes, t_values } = &self.axes else {
            return None;
        };
        let m = modes.iter().position(|&x| x == mode)?;
        let n = t_values.len();
        Some(
            t_values
                .iter()
                .enumerate()
                .map(|(k, &t)| (t, self.fidelity[m * n + k].as_ref().ok().copied()))
                .collect(),
        )
    }

    /// Smallest T on the grid whose fidelity reaches `threshold`.
    pub fn first_crossing(&self, mode: HamiltonianMode, threshold: f64) -> Option<f64> {
        self.curve(mode)?
            .into_iter()
            .find(|(_, f)| f.is_some_and(|f| f >= threshold))
            .map(|(t, _)| t)
    }

    /// Heat-map value at grid indices (Γ, κ).
    pub fn heat(&self, gi: usize, ki: usize) -> Option<f64> {
        let SweepAxes::Decoherence { kappas, .. } = &self.axes else {
            return None;
        };
        self.fidelity.get(gi * kappas.len() + ki)?.as_ref().ok().copied()
    }
}

fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(Error::param("jobs", "must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::param("jobs", e.to_string()))
}

fn run_points(configs: Vec<ScenarioConfig>, jobs: usize) -> Result<Vec<std::result::Result<f64, String>>> {
    let pool = worker_pool(jobs)?;
    Ok(pool.install(|| {
        configs
            .par_iter()
            .map(|c| {
                run_scenario(c).map(|r| r.final_fidelity).map_err(|e| {
                    warn!("grid point failed: {e}");
                    e.to_string()
                })
            })
            .collect()
    }))
}

/// Final fidelity vs operation time T for each mode. For transfer τ scales
/// as `tau_frac`·T. Trajectory sampling is irrelevant here, so only the end
/// point is kept.
pub fn sweep_duration(
    base: &ScenarioConfig,
    modes: &[HamiltonianMode],
    t_values: &[f64],
    jobs: usize,
) -> Result<SweepResult> {
    if t_values.is_empty() || modes.is_empty() {
        return Err(Error::param("t_values", "need at least one mode and one duration"));
    }
    if t_values.iter().any(|&t| !(t > 0.0)) || t_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("t_values", "durations must be positive and strictly ascending"));
    }
    let mut configs = Vec::with_capacity(modes.len() * t_values.len());
    for &mode in modes {
        for &t in t_values {
            let c = base.clone().with_mode(mode).with_duration(t);
            c.validate()?;
            configs.push(c);
        }
    }
    let fidelity = run_points(configs, jobs)?;
    let mut kv = base.key_values();
    kv.retain(|(k, _)| !matches!(*k, "mode" | "big-t"));
    let modes_list: Vec<_> = modes.iter().map(|m| m.name()).collect();
    let t_list: Vec<_> = t_values.iter().map(|t| t.to_string()).collect();
    kv.push(("modes", modes_list.join(",")));
    kv.push(("t-values", t_list.join(",")));
    Ok(SweepResult {
        task: base.task,
        axes: SweepAxes::Duration {
            modes: modes.to_vec(),
            t_values: t_values.to_vec(),
        },
        fidelity,
        config_hash: config_hash(&kv),
    })
}

/// Final fidelity on a Γ × κ grid.
pub fn sweep_decoherence(
    base: &ScenarioConfig,
    gammas: &[f64],
    kappas: &[f64],
    jobs: usize,
) -> Result<SweepResult> {
    if gammas.is_empty() || kappas.is_empty() {
        return Err(Error::param("grid", "need at least one Γ and one κ"));
    }
    let mut configs = Vec::with_capacity(gammas.len() * kappas.len());
    for &gamma in gammas {
        for &kappa in kappas {
            configs.push(base.clone().with_decoherence(kappa, gamma)?);
        }
    }
    base.validate()?;
    let fidelity = run_points(configs, jobs)?;
    let mut kv = base.key_values();
    kv.retain(|(k, _)| !matches!(*k, "gamma" | "kappa"));
    let g_list: Vec<_> = gammas.iter().map(|t| t.to_string()).collect();
    let k_list: Vec<_> = kappas.iter().map(|t| t.to_string()).collect();
    kv.push(("gammas", g_list.join(",")));
    kv.push(("kappas", k_list.join(",")));
    Ok(SweepResult {
        task: base.task,
        axes: SweepAxes::Decoherence {
            gammas: gammas.to_vec(),
            kappas: kappas.to_vec(),
        },
        fidelity,
        config_hash: config_hash(&kv),
    })
}

/// `n` evenly spaced points on [0, max].
pub fn uniform_grid(max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| max * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Durations `t_min, t_min + step, …` up to and including `t_max`.
pub fn duration_grid(t_min: f64, t_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max >= t_min && step > 0.0) {
        return Err(Error::param("t-grid", format!("need 0 < t-min <= t-max and step > 0 (got {t_min}, {t_max}, {step})")));
    }
    let n = ((t_max - t_min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| t_min + step * k as f64).collect())
}

/// Sizes of the states reachable from |φ₁⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureReport {
    pub reference: Vec<BasisLabel>,
    pub with_aux: Vec<BasisLabel>,
    pub with_jumps: Vec<BasisLabel>,
}

impl ClosureReport {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.reference.len(), self.with_aux.len(), self.with_jumps.len())
    }
}

/// Reachable sets under H₀, H₀ + H̃, and H₀ + H̃ plus every jump channel
/// (regardless of the configured rates).
pub fn check_closure(cfg: &ScenarioConfig) -> Result<ClosureReport> {
    let space = cfg.space();
    let pulses = cfg.pulses()?;
    let seed = StateVector::basis_state(&space, &BasisLabel::PHI1)?;
    let labels = |gens: &[crate::statespace::Operator]| -> Result<Vec<BasisLabel>> {
        Ok(reachable_subspace(gens, &seed, DEFAULT_REACH_THRESHOLD)?
            .into_iter()
            .map(|i| space.label(i))
            .collect())
    };
    let mut gens = build_h0(&space, &pulses).generators();
    let reference = labels(&gens)?;
    gens.extend(build_h_aux(&space, &pulses, &cfg.detuning)?.generators());
    let with_aux = labels(&gens)?;
    let unit = DecoherenceParams::new(1.0, 1.0)?;
    gens.extend(build_jump_operators(&space, &unit).into_iter().map(|j| j.operator));
    let with_jumps = labels(&gens)?;
    Ok(ClosureReport {
        reference,
        with_aux,
        with_jumps,
    })
}

/// Detuning scale factors used by the equivalence check.
pub const EQUIVALENCE_SCALES: [f64; 3] = [1.0, 2.0, 4.0];
/// Drive strengths at which the numerical counter-diabatic term is compared.
pub const RECONSTRUCTION_OMEGAS: [f64; 3] = [0.2, 0.1, 0.05];

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalencePoint {
    pub scale: f64,
    /// max over t of |P₁(aux-only) − P₁(effective-only)|
    pub max_dp1: f64,
    /// max over t of |P₅(aux-only) − P₅(effective-only)|
    pub max_dp5: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub points: Vec<EquivalencePoint>,
    /// (Ω₀, relative gap) at mid-window.
    pub reconstruction: Vec<(f64, f64)>,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Integrator tolerance ceiling for the equivalence runs: at ×4 detunings
/// the carriers are fast and Ω̃ large, and the compared differences are small.
pub const EQUIVALENCE_TOL: f64 = 1e-10;

/// Compare H̃ alone against its flip-flop approximation with the detunings
/// scaled ×1, ×2, ×4 (Ω̃ re-derived each time), and the numerical
/// counter-diabatic term against the analytic one at decreasing Ω₀.
pub fn check_equivalence(cfg: &ScenarioConfig) -> Result<EquivalenceReport> {
    let mut base = ScenarioConfig {
        task: Task::Transfer,
        decoherence: DecoherenceParams::none(),
        ..cfg.clone()
    };
    base.integrator.tol = base.integrator.tol.min(EQUIVALENCE_TOL);
    let points = EQUIVALENCE_SCALES
        .par_iter()
        .map(|&k| {
            let mut c = base.clone();
            c.detuning = base.detuning.scaled(k)?;
            let aux = run_scenario(&c.clone().with_mode(HamiltonianMode::AuxOnly))?;
            let eff = run_scenario(&c.with_mode(HamiltonianMode::EffectiveOnly))?;
            let pop = |r: &RunResult, l| r.trajectory.population(&l).expect("tracked");
            Ok(EquivalencePoint {
                scale: k,
                max_dp1: max_abs_diff(&pop(&aux, BasisLabel::PHI1), &pop(&eff, BasisLabel::PHI1)),
                max_dp5: max_abs_diff(&pop(&aux, BasisLabel::PHI5), &pop(&eff, BasisLabel::PHI5)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let reconstruction = RECONSTRUCTION_OMEGAS
        .iter()
        .map(|&omega0| {
            let c = ScenarioConfig { omega0, ..base.clone() };
            let pulses = c.pulses()?;
            let (w0, w1) = pulses.window();
            Ok((omega0, cdd_reconstruction_gap(&pulses, 0.5 * (w0 + w1))?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceReport { points, reconstruction })
}
