//! Time evolution: coherent (Schrödinger) and dissipative (Lindblad).
//!
//! Both propagators integrate on whatever space the Hamiltonian lives on;
//! callers shrink that space with [`reduce_to_reachable`] first. Outputs are
//! sampled on a uniform grid of `samples + 1` points that the integrator hits
//! exactly.

mod ode;

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::hamiltonians::{JumpOperator, TimeDependentHamiltonian};
use crate::statespace::{
    reachable_subspace, BasisLabel, CMatrix, DensityMatrix, Space, StateVector, C64, DEFAULT_REACH_THRESHOLD, I,
    ZERO,
};

pub use ode::{Method, StepStats};

/// Allowed drift of ⟨ψ|ψ⟩ or Tr ρ over a run.
pub const NORM_DRIFT_TOL: f64 = 1e-6;
/// Final density matrices must not have eigenvalues below this.
pub const POSITIVITY_TOL: f64 = 1e-7;
/// Below this the run is aborted as unphysical.
pub const POSITIVITY_ABORT: f64 = -1e-5;
/// Populations reported in every trajectory, in column order.
pub const TRACKED_STATES: [BasisLabel; 9] = [
    BasisLabel::PHI1,
    BasisLabel::PHI2,
    BasisLabel::PHI3,
    BasisLabel::PHI4,
    BasisLabel::PHI5,
    BasisLabel::EF,
    BasisLabel::FFB,
    BasisLabel::FE,
    BasisLabel::FF,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Used as both absolute and relative tolerance.
    pub tol: f64,
    /// Overrides the automatic step ceiling when set.
    pub max_step: Option<f64>,
    pub samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::DormandPrince,
            tol: 1e-8,
            max_step: None,
            samples: 1000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::param("tol", format!("must lie in (0, 1), got {}", self.tol)));
        }
        if self.samples == 0 {
            return Err(Error::param("samples", "must be at least 1"));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::param("max_step", format!("must be positive, got {h}")));
            }
        }
        Ok(())
    }

    /// Step ceiling: a twentieth of the fastest carrier period, and never
    /// more than 1/2000 of the window.
    pub fn step_ceiling(&self, window: (f64, f64), max_frequency: f64) -> f64 {
        if let Some(h) = self.max_step {
            return h;
        }
        let span = window.1 - window.0;
        let mut h = span / 2000.0;
        if max_frequency > 0.0 {
            h = h.min(2.0 * PI / (20.0 * max_frequency));
        }
        h
    }

    fn stepping(&self, window: (f64, f64), max_frequency: f64) -> ode::Stepping {
        let max_step = self.step_ceiling(window, max_frequency);
        ode::Stepping {
            method: self.method,
            tol: self.tol,
            max_step,
            min_step: (1e-10 * (window.1 - window.0)).min(max_step * 1e-6),
        }
    }

    fn grid(&self, window: (f64, f64)) -> Vec<f64> {
        let n = self.samples;
        (0..=n)
            .map(|k| {
                if k == n {
                    window.1
                } else {
                    window.0 + (window.1 - window.0) * k as f64 / n as f64
                }
            })
            .collect()
    }
}

/// What fidelity is measured against.
#[derive(Clone, Debug)]
pub enum Target {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl Target {
    fn project_onto(&self, space: &Arc<Space>) -> Result<Target> {
        Ok(match self {
            Target::Pure(psi) => Target::Pure(psi.project_onto(space)?),
            Target::Mixed(rho) => Target::Mixed(rho.project_onto(space)?),
        })
    }

    fn weight(&self) -> f64 {
        match self {
            Target::Pure(psi) => psi.norm().powi(2),
            Target::Mixed(rho) => rho.trace(),
        }
    }
}

/// Sampled output of one propagation.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// One row per sample, columns as in [`TRACKED_STATES`].
    pub populations: Vec<[f64; 9]>,
    /// ⟨ψ|ψ⟩ for pure evolution, Tr ρ for mixed.
    pub norm: Vec<f64>,
    pub fidelity: Option<Vec<f64>>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn population(&self, label: &BasisLabel) -> Option<Vec<f64>> {
        let col = TRACKED_STATES.iter().position(|l| l == label)?;
        Some(self.populations.iter().map(|row| row[col]).collect())
    }

    pub fn final_fidelity(&self) -> Option<f64> {
        self.fidelity.as_ref().and_then(|f| f.last().copied())
    }

    pub fn max_norm_drift(&self) -> f64 {
        let first = self.norm.first().copied().unwrap_or(1.0);
        self.norm.iter().map(|n| (n - first).abs()).fold(0.0, f64::max)
    }
}

fn tracked_positions(space: &Space) -> [Option<usize>; 9] {
    TRACKED_STATES.map(|l| space.position(&l))
}

/// (−i|φ₁⟩ + |φ₅⟩)/√2
pub fn bell_target(space: &Arc<Space>) -> Result<StateVector> {
    let s = FRAC_1_SQRT_2;
    StateVector::from_labels(
        space,
        &[(C64::new(0.0, -s), BasisLabel::PHI1), (C64::new(s, 0.0), BasisLabel::PHI5)],
    )
}

/// |⟨a|b⟩|²
pub fn fidelity_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    if **a.space() != **b.space() {
        return Err(Error::SpaceMismatch);
    }
    Ok(a.inner(b).norm_sqr())
}

/// Uhlmann fidelity (Tr √(√σ ρ √σ))². Falls back to ⟨ψ|ρ|ψ⟩ when σ is pure.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if **rho.space() != **sigma.space() {
        return Err(Error::SpaceMismatch);
    }
    for (name, m) in [("rho", rho), ("sigma", sigma)] {
        if (m.trace() - 1.0).abs() > 1e-3 {
            return Err(Error::NonPhysicalInput(format!("{name} has trace {}", m.trace())));
        }
    }
    let mut s = sigma.matrix().clone();
    crate::statespace::symmetrize_matrix(&mut s);
    let eig = SymmetricEigen::new(s);
    let (imax, pmax) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });
    if (pmax - 1.0).abs() < 1e-10 {
        let v = eig.eigenvectors.column(imax);
        return Ok(v.dotc(&(rho.matrix() * v)).re);
    }
    let sqrt_diag = CMatrix::from_diagonal(&eig.eigenvalues.map(|p| C64::new(p.max(0.0).sqrt(), 0.0)));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.adjoint();
    let mut m = &root * rho.matrix() * &root;
    crate::statespace::symmetrize_matrix(&mut m);
    let mu = SymmetricEigen::new(m).eigenvalues;
    let tr: f64 = mu.iter().map(|&x| x.max(0.0).sqrt()).sum();
    Ok(tr * tr)
}

/// Shrink a propagation problem to the states reachable from `seed` under the
/// Hamiltonian's constant generators (and the jump operators, if any).
/// Returns the reduced space together with projected copies.
pub fn reduce_to_reachable(
    h: &TimeDependentHamiltonian,
    jumps: &[JumpOperator],
    seed: &StateVector,
) -> Result<(Arc<Space>, TimeDependentHamiltonian, Vec<JumpOperator>)> {
    let mut gens = h.generators();
    gens.extend(jumps.iter().filter(|j| j.rate > 0.0).map(|j| j.operator.clone()));
    let positions = reachable_subspace(&gens, seed, DEFAULT_REACH_THRESHOLD)?;
    let space = h.space().restrict(&positions)?;
    let hr = h.project_onto(&space)?;
    let jr = jumps.iter().map(|j| j.project_onto(&space)).collect::<Result<Vec<_>>>()?;
    Ok((space, hr, jr))
}

fn check_window(window: (f64, f64)) -> Result<()> {
    if !(window.0.is_finite() && window.1.is_finite() && window.1 > window.0) {
        return Err(Error::param("window", format!("need t0 < t1, got {window:?}")));
    }
    Ok(())
}

/// Integrate iψ̇ = H(t)ψ over `window`.
pub fn propagate_schrodinger(
    h: &TimeDependentHamiltonian,
    psi0: &StateVector,
    window: (f64, f64),
    cfg: &IntegratorConfig,
    target: Option<&Target>,
) -> Result<(Trajectory, StateVector)> {
    cfg.validate()?;
    check_window(window)?;
    let space = h.space().clone();
    if **psi0.space() != *space {
        return Err(Error::SpaceMismatch);
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::NonPhysicalInput(format!("initial state has norm {}", psi0.norm())));
    }
    let target = match target {
        Some(t) => Some(t.project_onto(&space)?),
        None => None,
    };

    let n = space.dim();
    let mut hm = CMatrix::zeros(n, n);
    let rhs = |t: f64, y: &CMatrix, out: &mut CMatrix| {
        h.evaluate_into(t, &mut hm);
        hm.mul_to(y, out);
        *out *= -I;
    };
    let mut integ = ode::Integrator::new(rhs, cfg.stepping(window, h.max_frequency()), (n, 1));
    let mut y = CMatrix::from_column_slice(n, 1, psi0.amplitudes().as_slice());

    let pos = tracked_positions(&space);
    let times = cfg.grid(window);
    let mut traj = Trajectory {
        times: times.clone(),
        populations: Vec::with_capacity(times.len()),
        norm: Vec::with_capacity(times.len()),
        fidelity: target.as_ref().map(|_| Vec::with_capacity(times.len())),
        stats: StepStats::default(),
    };
    let record = |y: &CMatrix, traj: &mut Trajectory| -> Result<()> {
        let psi = StateVector::from_amplitudes(&space, y.column(0).into_owned())?;
        traj.populations.push(pos.map(|p| p.map_or(0.0, |i| y[(i, 0)].norm_sqr())));
        traj.norm.push(y.column(0).norm_squared());
        if let (Some(f), Some(t)) = (traj.fidelity.as_mut(), target.as_ref()) {
            f.push(match t {
                Target::Pure(phi) => phi.inner(&psi).norm_sqr(),
                Target::Mixed(sigma) => sigma.expectation_pure(&psi),
            });
        }
        Ok(())
    };

    record(&y, &mut traj)?;
    for w in times.windows(2) {
        integ.advance(&mut y, w[0], w[1])?;
        record(&y, &mut traj)?;
    }
    traj.stats = integ.stats;

    let drift = traj.max_norm_drift();
    if drift > NORM_DRIFT_TOL {
        return Err(Error::InvariantViolation {
            check: "norm",
            detail: format!("norm drifted by {drift:.3e}"),
        });
    }
    let psi = StateVector::from_amplitudes(&space, y.column(0).into_owned())?;
    Ok((traj, psi))
}

/// Integrate ρ̇ = −i[H, ρ] + Σ rate (LρL† − ½{L†L, ρ}) over `window`.
pub fn propagate_lindblad(
    h: &TimeDependentHamiltonian,
    jumps: &[JumpOperator],
    rho0: &DensityMatrix,
    window: (f64, f64),
    cfg: &IntegratorConfig,
    target: Option<&Target>,
) -> Result<(Trajectory, DensityMatrix)> {
    cfg.validate()?;
    check_window(window)?;
    let space = h.space().clone();
    if **rho0.space() != *space || jumps.iter().any(|j| **j.operator.space() != *space) {
        return Err(Error::SpaceMismatch);
    }
    if (rho0.trace() - 1.0).abs() > NORM_DRIFT_TOL {
        return Err(Error::NonPhysicalInput(format!("initial trace {}", rho0.trace())));
    }
    if rho0.hermiticity_deviation() > 1e-10 {
        return Err(Error::NonPhysicalInput("initial density matrix is not Hermitian".into()));
    }
    if rho0.min_eigenvalue() < -POSITIVITY_TOL {
        return Err(Error::NonPhysicalInput(format!(
            "initial density matrix has eigenvalue {}",
            rho0.min_eigenvalue()
        )));
    }
    if let Some(j) = jumps.iter().find(|j| !(j.rate >= 0.0 && j.rate.is_finite())) {
        return Err(Error::param("rate", format!("channel {} has rate {}", j.name, j.rate)));
    }
    let target = match target {
        Some(t) => {
            let t = t.project_onto(&space)?;
            if (t.weight() - 1.0).abs() > 1e-3 {
                return Err(Error::NonPhysicalInput("target has weight outside the propagation space".into()));
            }
            Some(t)
        }
        None => None,
    };

    let n = space.dim();
    // Jump operators are sparse (a handful of entries each); LρL† is summed
    // entry by entry.
    let mut damping = CMatrix::zeros(n, n);
    let mut sparse_jumps: Vec<Vec<(usize, usize, C64)>> = Vec::new();
    for j in jumps.iter().filter(|j| j.rate > 0.0) {
        let l = j.operator.matrix() * C64::new(j.rate.sqrt(), 0.0);
        damping += l.adjoint() * &l;
        let entries: Vec<_> = (0..n)
            .flat_map(|c| (0..n).map(move |r| (r, c)))
            .filter(|&(r, c)| l[(r, c)] != ZERO)
            .map(|(r, c)| (r, c, l[(r, c)]))
            .collect();
        sparse_jumps.push(entries);
    }
    let half_damping = damping * C64::new(0.0, -0.5);

    let mut heff = CMatrix::zeros(n, n);
    let mut scratch = CMatrix::zeros(n, n);
    let rhs = |t: f64, rho: &CMatrix, out: &mut CMatrix| {
        h.evaluate_into(t, &mut heff);
        heff += &half_damping;
        // out = −i Heff ρ + i ρ Heff†
        heff.mul_to(rho, out);
        rho.mul_to(&heff.adjoint(), &mut scratch);
        out.zip_apply(&scratch, |o, s| *o = I * (s - *o));
        for entries in &sparse_jumps {
            for &(i, j, x) in entries {
                for &(k, l, y) in entries {
                    out[(i, k)] += x * rho[(j, l)] * y.conj();
                }
            }
        }
    };
    let mut integ = ode::Integrator::new(rhs, cfg.stepping(window, h.max_frequency()), (n, n));
    let mut y = rho0.matrix().clone();

    let pos = tracked_positions(&space);
    let times = cfg.grid(window);
    let mut traj = Trajectory {
        times: times.clone(),
        populations: Vec::with_capacity(times.len()),
        norm: Vec::with_capacity(times.len()),
        fidelity: target.as_ref().map(|_| Vec::with_capacity(times.len())),
        stats: StepStats::default(),
    };
    let record = |y: &CMatrix, traj: &mut Trajectory| -> Result<()> {
        traj.populations.push(pos.map(|p| p.map_or(0.0, |i| y[(i, i)].re)));
        traj.norm.push(y.trace().re);
        if let (Some(f), Some(t)) = (traj.fidelity.as_mut(), target.as_ref()) {
            let rho = DensityMatrix::from_matrix(&space, y.clone())?;
            f.push(match t {
                Target::Pure(phi) => rho.expectation_pure(phi),
                Target::Mixed(sigma) => fidelity_unchecked(&rho, sigma),
            });
        }
        Ok(())
    };

    record(&y, &mut traj)?;
    for w in times.windows(2) {
        integ.advance(&mut y, w[0], w[1])?;
        crate::statespace::symmetrize_matrix(&mut y);
        integ.reset();
        record(&y, &mut traj)?;
    }
    traj.stats = integ.stats;

    let rho = DensityMatrix::from_matrix(&space, y)?;
    let drift = traj.max_norm_drift();
    if drift > NORM_DRIFT_TOL {
        return Err(Error::InvariantViolation {
            check: "trace",
            detail: format!("trace drifted by {drift:.3e}"),
        });
    }
    let min_eig = rho.min_eigenvalue();
    if min_eig < POSITIVITY_ABORT {
        return Err(Error::PositivityLoss { min_eigenvalue: min_eig });
    }
    if min_eig < -POSITIVITY_TOL {
        return Err(Error::InvariantViolation {
            check: "positivity",
            detail: format!("final density matrix has eigenvalue {min_eig:.3e}"),
        });
    }
    Ok((traj, rho))
}

/// Mid-run fidelity where the trace may differ from one by integration error.
fn fidelity_unchecked(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    fidelity(rho, sigma).unwrap_or(f64::NAN)
}

/// Unit column in `space` at `label` as a density matrix.
pub fn pure_density(space: &Arc<Space>, label: &BasisLabel) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_pure(&StateVector::basis_state(space, label)?))
}
