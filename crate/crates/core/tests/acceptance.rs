//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the report is printed whether or not output capture is on; exits nonzero
//! if any criterion fails. Pass substrings as arguments to run a subset.

mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cavity_shortcut::dynamics::{
    propagate_lindblad, propagate_schrodinger, reduce_to_reachable, IntegratorConfig, POSITIVITY_TOL,
};
use cavity_shortcut::experiments::{
    check_closure, check_equivalence, duration_grid, run_scenario, sweep_decoherence, sweep_duration, uniform_grid,
    HamiltonianMode, ScenarioConfig, SweepResult,
};
use cavity_shortcut::hamiltonians::{build_jump_operators, DecoherenceParams};
use cavity_shortcut::pulses::{PulseSet, Task, TransferPulseParams};
use cavity_shortcut::spectral::{analytic_eigensystem, reduced_h0};
use cavity_shortcut::statespace::{BasisLabel, DensityMatrix, StateVector, C64};
use num_complex::Complex64;

/// Aux-mode Bell fidelity of the default entangling run, from the
/// independent fixed-step oracle (step 1e-3 g⁻¹).
const ENTANGLE_AUX_REGRESSION: f64 = 0.99550857;
const REGRESSION_TOL: f64 = 1e-6;

struct Verdict {
    pass: bool,
    detail: String,
}

/// Collects clause results for one criterion.
#[derive(Default)]
struct Clauses(Vec<(bool, String)>);

impl Clauses {
    fn check(&mut self, ok: bool, text: impl Into<String>) {
        self.0.push((ok, text.into()));
    }

    fn verdict(self) -> Verdict {
        let pass = self.0.iter().all(|(ok, _)| *ok);
        let detail = self
            .0
            .into_iter()
            .map(|(ok, t)| if ok { t } else { format!("NOT {t}") })
            .collect::<Vec<_>>()
            .join("; ");
        Verdict { pass, detail }
    }
}

type Criterion = fn() -> Verdict;

fn transfer_pulses(omega0: f64) -> PulseSet {
    PulseSet::transfer(TransferPulseParams::new(omega0, 50.0, 11.0).unwrap())
}

fn dark_state_exactness() -> Verdict {
    let pulses = transfer_pulses(0.2);
    let reference = oracle::Pulses::transfer(0.2, 50.0);
    let h0 = reduced_h0(&pulses).unwrap();
    let phi = h0.space().clone();
    let (w0, w1) = pulses.window();
    let mut worst_lib: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut sampled = 0;
    for k in 0..200 {
        let t = w0 + (w1 - w0) * (k as f64 + 0.5) / 200.0;
        let [o1, o2] = pulses.omegas(t);
        if o1 * o1 + o2 * o2 < 1e-18 {
            continue;
        }
        sampled += 1;
        let h = h0.evaluate(t);
        let snap = analytic_eigensystem(t, &pulses, &phi).unwrap();
        worst_lib = worst_lib.max(h.apply(snap.by_label(1).unwrap().1).norm());
        let terms: Vec<(C64, BasisLabel)> = oracle::dark_state(&reference, t).into_iter().zip(BasisLabel::PHI).collect();
        let v = StateVector::from_labels(&phi, &terms).unwrap();
        worst_oracle = worst_oracle.max(h.apply(&v).norm());
    }
    let mut c = Clauses::default();
    c.check(worst_lib <= 1e-12, format!("max ‖H₀ψ₁‖ = {worst_lib:.2e} ≤ 1e-12 over {sampled} samples"));
    c.check(worst_oracle <= 1e-12, format!("hand-built dark state: {worst_oracle:.2e} ≤ 1e-12"));
    c.verdict()
}

fn cdd_rotation() -> Verdict {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut c = Clauses::default();
    let areas: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&o| oracle::Pulses::transfer(o, 50.0).cdd_area(20_000).abs())
        .collect();
    c.check(
        (0.98 * half_pi..=1.02 * half_pi).contains(&areas[0]),
        format!("|∫C dt| = {:.6} within 2% of π/2 at Ω₀ = 0.2", areas[0]),
    );
    // Library coupling integrated the same way agrees with the oracle.
    let pulses = transfer_pulses(0.2);
    let (w0, w1) = pulses.window();
    let n = 20_000;
    let h = (w1 - w0) / n as f64;
    let lib: f64 = (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            w * pulses.cdd_coupling(w0 + k as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    c.check(
        (lib.abs() - areas[0]).abs() <= 1e-6,
        format!("library C(t) integrates to {:.6}", lib.abs()),
    );
    let gaps: Vec<f64> = areas.iter().map(|a| (a - half_pi).abs()).collect();
    c.check(
        gaps[1] < gaps[0] && gaps[2] < gaps[1],
        format!("|∫C| − π/2 gaps {:.2e}, {:.2e}, {:.2e} shrink as Ω₀ = 0.2, 0.1, 0.05", gaps[0], gaps[1], gaps[2]),
    );
    let r = run_scenario(&ScenarioConfig::transfer().with_mode(HamiltonianMode::Cdd)).unwrap();
    let p5 = r.final_population(&BasisLabel::PHI5);
    c.check(p5 >= 0.995, format!("P₅(T) = {p5:.6} ≥ 0.995 under H₁ alone"));
    c.verdict()
}

fn fast_transfer() -> Verdict {
    let mut c = Clauses::default();
    let start = Instant::now();
    let aux = run_scenario(&ScenarioConfig::transfer()).unwrap();
    let elapsed = start.elapsed();
    let p5 = aux.final_population(&BasisLabel::PHI5);
    c.check(p5 >= 0.98, format!("aux P₅ = {p5:.6} ≥ 0.98"));
    let only = run_scenario(&ScenarioConfig::transfer().with_mode(HamiltonianMode::AuxOnly)).unwrap();
    let p5o = only.final_population(&BasisLabel::PHI5);
    c.check(p5o >= 0.98, format!("aux-only P₅ = {p5o:.6} ≥ 0.98"));
    c.check(elapsed <= Duration::from_secs(10), format!("aux run took {:.2?} ≤ 10 s", elapsed));
    c.verdict()
}

fn adiabatic_slowdown() -> Verdict {
    let mut c = Clauses::default();
    let start = Instant::now();
    let aux = run_scenario(&ScenarioConfig::transfer()).unwrap().final_fidelity;
    let adi = run_scenario(&ScenarioConfig::transfer().with_mode(HamiltonianMode::Adiabatic))
        .unwrap()
        .final_fidelity;
    c.check(adi <= aux - 0.05, format!("F_adiabatic(50) = {adi:.4} ≤ F_aux − 0.05 = {:.4}", aux - 0.05));
    let grid = duration_grid(10.0, 200.0, 5.0).unwrap();
    let modes = [HamiltonianMode::Adiabatic, HamiltonianMode::Aux];
    let sweep = sweep_duration(&ScenarioConfig::transfer(), &modes, &grid, 4).unwrap();
    c.check(sweep.failures().count() == 0, "every grid point ran");
    let t_adi = sweep.first_crossing(HamiltonianMode::Adiabatic, 0.98);
    let t_aux = sweep.first_crossing(HamiltonianMode::Aux, 0.98);
    match (t_adi, t_aux) {
        (Some(a), Some(x)) => c.check(a / x >= 2.5, format!("crossings {a} / {x} = {:.2} ≥ 2.5", a / x)),
        _ => c.check(false, format!("crossings found (adiabatic {t_adi:?}, aux {t_aux:?})")),
    }
    let elapsed = start.elapsed();
    c.check(elapsed <= Duration::from_secs(300), format!("took {elapsed:.2?} ≤ 5 min"));
    c.verdict()
}

fn entanglement_creation() -> Verdict {
    let mut c = Clauses::default();
    let aux = run_scenario(&ScenarioConfig::entangle()).unwrap();
    let f = aux.final_fidelity;
    let (p1, p5) = (aux.final_population(&BasisLabel::PHI1), aux.final_population(&BasisLabel::PHI5));
    c.check(f >= 0.97, format!("aux F = {f:.6} ≥ 0.97"));
    c.check((p1 - p5).abs() <= 0.03, format!("aux |P₁ − P₅| = {:.4} ≤ 0.03", (p1 - p5).abs()));

    let pulses = oracle::Pulses::entangle(0.3, 30.0);
    let reference = oracle::bell_fidelity(&oracle::evolve_aux(&pulses, 6.0, 7.0, 1e-3));
    c.check(
        (f - reference).abs() <= REGRESSION_TOL,
        format!("matches fixed-step oracle {reference:.10} (Δ = {:.1e})", (f - reference).abs()),
    );
    c.check(
        (reference - ENTANGLE_AUX_REGRESSION).abs() <= REGRESSION_TOL,
        format!("oracle equals pinned {ENTANGLE_AUX_REGRESSION}"),
    );

    let adi = run_scenario(&ScenarioConfig::entangle().with_mode(HamiltonianMode::Adiabatic)).unwrap();
    let d = adi.final_population(&BasisLabel::PHI1) - adi.final_population(&BasisLabel::PHI5);
    c.check(d > 0.1, format!("adiabatic P₁ − P₅ = {d:.4} > 0.1"));
    c.verdict()
}

fn monotone_violations(s: &SweepResult, n: usize) -> Vec<String> {
    let mut bad = Vec::new();
    for gi in 0..n {
        for ki in 0..n {
            let Some(f) = s.heat(gi, ki) else {
                bad.push(format!("({gi},{ki}) failed"));
                continue;
            };
            for (dg, dk) in [(1, 0), (0, 1)] {
                if gi + dg < n && ki + dk < n {
                    if let Some(next) = s.heat(gi + dg, ki + dk) {
                        if next > f {
                            bad.push(format!("({gi},{ki})→({},{}) rises by {:.1e}", gi + dg, ki + dk, next - f));
                        }
                    }
                }
            }
        }
    }
    bad
}

fn decoherence_robustness() -> Verdict {
    let mut c = Clauses::default();
    let start = Instant::now();
    let grid = uniform_grid(0.01, 11);
    for task in [Task::Transfer, Task::Entangle] {
        let base = ScenarioConfig::for_task(task);
        let f = run_scenario(&base.clone().with_decoherence(0.004, 0.004).unwrap())
            .unwrap()
            .final_fidelity;
        c.check(f >= 0.98, format!("{} F(Γ = κ = 0.004) = {f:.5} ≥ 0.98", task.name()));
        let s = sweep_decoherence(&base, &grid, &grid, 4).unwrap();
        let bad = monotone_violations(&s, grid.len());
        c.check(
            bad.is_empty(),
            format!("{} heat map nonincreasing in Γ and κ ({} violations{})", task.name(), bad.len(),
                bad.first().map(|b| format!(", first {b}")).unwrap_or_default()),
        );
    }
    let elapsed = start.elapsed();
    c.check(elapsed <= Duration::from_secs(900), format!("took {elapsed:.2?} ≤ 15 min"));
    c.verdict()
}

fn open_system_invariants() -> Verdict {
    let mut c = Clauses::default();
    let mut worst_trace: f64 = 0.0;
    let mut worst_herm: f64 = 0.0;
    let mut worst_eig: f64 = f64::INFINITY;
    let mut runs = 0;
    for task in [Task::Transfer, Task::Entangle] {
        for (kappa, gamma) in [(0.004, 0.004), (0.01, 0.0), (0.0, 0.01), (0.01, 0.01)] {
            let cfg = ScenarioConfig::for_task(task).with_decoherence(kappa, gamma).unwrap();
            let space = cfg.space();
            let h = cfg.hamiltonian(&space).unwrap();
            let jumps = build_jump_operators(&space, &cfg.decoherence);
            let psi0 = StateVector::basis_state(&space, &BasisLabel::PHI1).unwrap();
            let (space, h, jumps) = reduce_to_reachable(&h, &jumps, &psi0).unwrap();
            let rho0 = DensityMatrix::from_pure(&psi0.project_onto(&space).unwrap());
            let (traj, rho) =
                propagate_lindblad(&h, &jumps, &rho0, cfg.pulses().unwrap().window(), &cfg.integrator, None).unwrap();
            runs += 1;
            worst_trace = worst_trace.max(traj.max_norm_drift()).max((rho.trace() - 1.0).abs());
            worst_herm = worst_herm.max(rho.hermiticity_deviation());
            worst_eig = worst_eig.min(rho.min_eigenvalue());
        }
    }
    c.check(worst_trace <= 1e-6, format!("trace drift {worst_trace:.1e} ≤ 1e-6 over {runs} runs"));
    c.check(worst_herm <= 1e-10, format!("Hermiticity {worst_herm:.1e} ≤ 1e-10"));
    c.check(worst_eig >= -POSITIVITY_TOL, format!("min eigenvalue {worst_eig:.1e} ≥ −1e-7"));

    let mut worst_gap: f64 = 0.0;
    for task in [Task::Transfer, Task::Entangle] {
        let cfg = ScenarioConfig::for_task(task);
        let space = cfg.space();
        let h = cfg.hamiltonian(&space).unwrap();
        let psi0 = StateVector::basis_state(&space, &BasisLabel::PHI1).unwrap();
        let (space, h, _) = reduce_to_reachable(&h, &[], &psi0).unwrap();
        let psi0 = psi0.project_onto(&space).unwrap();
        let jumps: Vec<_> = build_jump_operators(&space, &DecoherenceParams::none());
        let window = cfg.pulses().unwrap().window();
        let (u, _) = propagate_schrodinger(&h, &psi0, window, &cfg.integrator, None).unwrap();
        let (l, _) =
            propagate_lindblad(&h, &jumps, &DensityMatrix::from_pure(&psi0), window, &cfg.integrator, None).unwrap();
        for (a, b) in u.populations.iter().zip(&l.populations) {
            for (x, y) in a.iter().zip(b) {
                worst_gap = worst_gap.max((x - y).abs());
            }
        }
    }
    c.check(worst_gap <= 1e-6, format!("zero-rate Lindblad vs unitary: {worst_gap:.1e} ≤ 1e-6"));
    c.verdict()
}

fn effective_equivalence() -> Verdict {
    let mut c = Clauses::default();
    let r = check_equivalence(&ScenarioConfig::transfer()).unwrap();
    let d: Vec<f64> = r.points.iter().map(|p| p.max_dp1).collect();
    let d5: Vec<f64> = r.points.iter().map(|p| p.max_dp5).collect();
    c.check(d[0] <= 0.1, format!("×1 max |ΔP₁| = {:.4} ≤ 0.1 (max |ΔP₅| = {:.4})", d[0], d5[0]));
    c.check(
        d[1] < d[0] && d[2] < d[1],
        format!("discrepancy decreases ×1, ×2, ×4: {:.4}, {:.4}, {:.4}", d[0], d[1], d[2]),
    );
    c.verdict()
}

fn dense(op: &cavity_shortcut::statespace::Operator) -> Vec<Vec<Complex64>> {
    let m = op.matrix();
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
}

fn closure_oracle() -> Verdict {
    let mut c = Clauses::default();
    let cfg = ScenarioConfig::transfer();
    let report = check_closure(&cfg).unwrap();
    let sizes = report.sizes();
    c.check(sizes == (5, 8, 9), format!("sizes {sizes:?} = (5, 8, 9)"));

    let space = cfg.space();
    let pulses = cfg.pulses().unwrap();
    let seed = space.position(&BasisLabel::PHI1).unwrap();
    let h0 = cavity_shortcut::hamiltonians::build_h0(&space, &pulses);
    let aux = cavity_shortcut::hamiltonians::build_h_aux(&space, &pulses, &cfg.detuning).unwrap();
    let jumps = build_jump_operators(&space, &DecoherenceParams::new(1.0, 1.0).unwrap());
    let mut gens: Vec<_> = h0.generators().iter().map(dense).collect();
    let mut expected: Vec<BasisLabel> = BasisLabel::PHI.to_vec();
    let mut sets = vec![(oracle::closure(&gens, seed), expected.clone(), &report.reference)];
    gens.extend(aux.generators().iter().map(dense));
    expected.extend([BasisLabel::EF, BasisLabel::FFB, BasisLabel::FE]);
    sets.push((oracle::closure(&gens, seed), expected.clone(), &report.with_aux));
    gens.extend(jumps.iter().map(|j| dense(&j.operator)));
    expected.push(BasisLabel::FF);
    sets.push((oracle::closure(&gens, seed), expected.clone(), &report.with_jumps));
    let sorted = |mut v: Vec<BasisLabel>| {
        v.sort();
        v
    };
    let agree = sets.into_iter().all(|(idx, want, got)| {
        let from_oracle: Vec<BasisLabel> = idx.into_iter().map(|i| space.label(i)).collect();
        sorted(from_oracle.clone()) == sorted(want.clone()) && sorted(got.clone()) == sorted(want)
    });
    c.check(agree, "state sets match the brute-force closure and the hand-listed states");

    let mut worst: f64 = 0.0;
    let runs = [
        ScenarioConfig::transfer(),
        ScenarioConfig::entangle(),
        ScenarioConfig::transfer().with_decoherence(0.004, 0.004).unwrap().with_duration(20.0),
    ];
    for base in runs {
        let mut base = base;
        base.integrator.samples = 200;
        let reduced = run_scenario(&base).unwrap();
        let full = run_scenario(&ScenarioConfig { full_space: true, ..base }).unwrap();
        c.check(full.dim == 64 && reduced.dim < 64, format!("dims {} vs {}", full.dim, reduced.dim));
        for (a, b) in full.trajectory.populations.iter().zip(&reduced.trajectory.populations) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    c.check(worst <= 1e-8, format!("full vs reduced populations within {worst:.1e} ≤ 1e-8"));
    c.verdict()
}

fn cdd_reconstruction() -> Verdict {
    let mut c = Clauses::default();
    let r = check_equivalence(&ScenarioConfig {
        integrator: IntegratorConfig {
            samples: 50,
            ..IntegratorConfig::default()
        },
        ..ScenarioConfig::transfer()
    })
    .unwrap();
    let g: Vec<f64> = r.reconstruction.iter().map(|(_, g)| *g).collect();
    c.check(g[0] <= 0.1, format!("gap at Ω₀ = 0.2: {:.5} ≤ 0.1", g[0]));
    c.check(
        g[1] < g[0] && g[2] < g[1],
        format!("gaps decrease at Ω₀ = 0.1, 0.05: {:.5}, {:.5}", g[1], g[2]),
    );
    c.verdict()
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-shortcut"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn without_output_line(p: &Path) -> String {
    String::from_utf8(read(p))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("# output:"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Verdict {
    let mut c = Clauses::default();
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name);
    let s = |p: &Path| p.to_str().unwrap().to_string();

    let runs: [(&str, &[&str]); 4] = [
        ("transfer", &["transfer", "--samples", "300"]),
        ("entangle", &["entangle", "--samples", "300", "--gamma", "0.004", "--kappa", "0.004"]),
        ("sweep-duration", &["sweep-duration", "--t-min", "10", "--t-max", "60", "--t-step", "10"]),
        ("sweep-decoherence", &["sweep-decoherence", "--task", "entangle", "--grid-points", "3"]),
    ];
    for (name, args) in runs {
        let first = path(&format!("{name}-1.csv"));
        let again = path(&format!("{name}-2.csv"));
        let mut a: Vec<String> = args.iter().map(|x| x.to_string()).collect();
        a.extend(["--jobs".into(), "1".into(), "--out".into(), s(&first)]);
        let out = cli(&a.iter().map(String::as_str).collect::<Vec<_>>());
        c.check(out.status.success(), format!("{name} exits 0"));
        let manifest = path(&format!("{name}-1.csv.manifest"));
        let out = cli(&[name, "--config", &s(&manifest), "--jobs", "3", "--out", &s(&again)]);
        c.check(out.status.success(), format!("{name} re-run from manifest exits 0"));
        if first.exists() && again.exists() {
            c.check(read(&first) == read(&again), format!("{name} CSV byte-identical (jobs 1 vs 3)"));
            c.check(
                without_output_line(&manifest) == without_output_line(&path(&format!("{name}-2.csv.manifest"))),
                format!("{name} manifest reproduced"),
            );
        }
    }
    c.verdict()
}

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, Criterion); 11] = [
        ("dark-state exactness", dark_state_exactness),
        ("counter-diabatic rotation", cdd_rotation),
        ("fast transfer", fast_transfer),
        ("adiabatic slowdown", adiabatic_slowdown),
        ("entanglement creation", entanglement_creation),
        ("decoherence robustness", decoherence_robustness),
        ("open-system invariants", open_system_invariants),
        ("effective-Hamiltonian equivalence", effective_equivalence),
        ("closure oracle", closure_oracle),
        ("counter-diabatic reconstruction", cdd_reconstruction),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        if !filters.is_empty() && !filters.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| Verdict {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
        });
        if !verdict.pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name} ({:.1?}): {}",
            if verdict.pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed(),
            verdict.detail
        );
    }
    println!("\nacceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
