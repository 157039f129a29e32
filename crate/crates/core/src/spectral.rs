//! Instantaneous eigensystem of the reference Hamiltonian, the weak-driving
//! approximate eigenstates, the adiabaticity diagnostic and the numerical
//! transitionless-tracking Hamiltonian i Σₘ |∂ₜψₘ⟩⟨ψₘ|.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::{build_h0, TimeDependentHamiltonian};
use crate::pulses::PulseSet;
use crate::statespace::{
    hermiticity_deviation, symmetrize_matrix, BasisLabel, CMatrix, CVector, Operator, ProductBasis, Space,
    StateVector, C64, I, ZERO,
};

/// Region where both pulses are this weak (Ω₁² + Ω₂² in g²) has a
/// degenerate zero eigenvalue; tracking is skipped there.
pub const TRACKING_MIN_POWER: f64 = 1e-6;
/// Consecutive-overlap floor below which a track is considered broken.
pub const GAUGE_BREAK_OVERLAP: f64 = 0.9;

/// Label (1-based, dark state = 1) of the ascending eigenvalue positions of
/// H₀ on the single-excitation space: λ₄ < λ₂ < λ₁ = 0 < λ₃ < λ₅.
pub const ASCENDING_LABELS: [usize; 5] = [4, 2, 1, 3, 5];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    /// Largest-modulus component made real and positive.
    Raw,
    /// Printed weak-driving expressions.
    Analytic,
    /// Phase-continuous along a track.
    Continuity,
}

#[derive(Clone, Debug)]
pub struct EigenSnapshot {
    pub t: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
    pub gauge: Gauge,
}

impl EigenSnapshot {
    /// (λₙ, ψₙ) using the dark-state-first labelling; valid on the
    /// single-excitation space where the five eigenvalues are distinct.
    pub fn by_label(&self, n: usize) -> Option<(f64, &StateVector)> {
        let pos = ASCENDING_LABELS.iter().position(|&l| l == n)?;
        Some((self.eigenvalues[pos], &self.eigenvectors[pos]))
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// The single-excitation states φ₁…φ₅ as a subspace of `basis`.
pub fn phi_space(basis: &Arc<ProductBasis>) -> Result<Arc<Space>> {
    let mut idx: Vec<usize> = BasisLabel::PHI
        .iter()
        .map(|l| {
            basis
                .index_of(l)
                .ok_or_else(|| Error::param("basis", "needs n_max_a >= 1 to hold φ₃"))
        })
        .collect::<Result<_>>()?;
    idx.sort_unstable();
    Space::subset(basis.clone(), &idx)
}

/// H₀ restricted to φ₁…φ₅.
pub fn reduced_h0(pulses: &PulseSet) -> Result<TimeDependentHamiltonian> {
    let full = Space::product(1, 0);
    let phi = phi_space(full.basis())?;
    build_h0(&full, pulses).project_onto(&phi)
}

fn fix_phase_largest(v: &mut CVector) {
    let (k, _) = v
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 + 1e-12 { (i, z.norm()) } else { best });
    let z = v[k];
    if z.norm() > 0.0 {
        *v *= z.conj() / z.norm();
    }
}

/// Dense Hermitian eigensolve; ascending eigenvalues, orthonormal vectors.
pub fn numeric_eigensystem(h: &Operator, t: f64) -> Result<EigenSnapshot> {
    let scale = h.max_abs().max(1.0);
    let dev = h.hermiticity_deviation();
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let mut m = h.matrix().clone();
    symmetrize_matrix(&mut m);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| {
            let mut v: CVector = eig.eigenvectors.column(k).into_owned();
            fix_phase_largest(&mut v);
            StateVector::from_amplitudes(h.space(), v).expect("eigenvector length matches space")
        })
        .collect();
    Ok(EigenSnapshot {
        t,
        eigenvalues,
        eigenvectors,
        gauge: Gauge::Raw,
    })
}

/// The printed weak-driving eigenstates on φ₁…φ₅ (order: ascending
/// eigenvalue, see [`ASCENDING_LABELS`]). ψ₁ is exact; ψ₂…ψ₅ are
/// re-normalized numerically.
pub fn analytic_eigensystem(t: f64, pulses: &PulseSet, phi: &Arc<Space>) -> Result<EigenSnapshot> {
    let [o1, o2] = pulses.omegas(t);
    let g = pulses.g();
    let s = o1 * o1 + o2 * o2;
    if s < crate::pulses::PULSE_OFF_EPS {
        return Err(Error::DegenerateInput(format!("both pulses vanish at t = {t}")));
    }
    let r = |x: f64| C64::new(x, 0.0);
    let ri = |x: f64| C64::new(0.0, x);
    let root2s = (2.0 * s).sqrt();
    let sq2 = std::f64::consts::SQRT_2;

    let psi1 = [ri(-o2), ZERO, ri(o1 * o2 / g), ZERO, r(o1)];
    let psi2 = [ri(o1 / root2s), ri(-0.5), ZERO, ri(0.5), r(o2 / root2s)];
    let psi3 = [ri(o1 / root2s), ri(0.5), ZERO, ri(-0.5), r(o2 / root2s)];
    let psi4 = [ri(-o1 / g), ri(sq2), ri(-2.0), ri(sq2), r(o2 / g)];
    let psi5 = [ri(-o1 / g), ri(-sq2), ri(-2.0), ri(-sq2), r(o2 / g)];

    let lam = (s / 2.0).sqrt();
    let by_label = [
        (0.0, psi1),
        (-lam, psi2),
        (lam, psi3),
        (-sq2 * g, psi4),
        (sq2 * g, psi5),
    ];

    let mut eigenvalues = Vec::with_capacity(5);
    let mut eigenvectors = Vec::with_capacity(5);
    for label in ASCENDING_LABELS {
        let (l, coeffs) = by_label[label - 1];
        let terms: Vec<(C64, BasisLabel)> = coeffs.iter().copied().zip(BasisLabel::PHI).collect();
        let v = StateVector::from_labels(phi, &terms)?.normalized()?;
        eigenvalues.push(l);
        eigenvectors.push(v);
    }
    Ok(EigenSnapshot {
        t,
        eigenvalues,
        eigenvectors,
        gauge: Gauge::Analytic,
    })
}

/// Eigen-decompositions on a time grid with labels matched by maximal
/// overlap and phases made continuous.
#[derive(Clone, Debug)]
pub struct EigenTrack {
    pub snapshots: Vec<EigenSnapshot>,
    /// Smallest |⟨vₙ(tⱼ)|vₙ(tⱼ₊₁)⟩| over the track.
    pub min_overlap: f64,
}

impl EigenTrack {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

fn best_permutation(overlap: &[Vec<f64>]) -> Vec<usize> {
    let n = overlap.len();
    if n <= 7 {
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let mut perm: Vec<usize> = (0..n).collect();
        permute(&mut perm, 0, &mut |p| {
            let score: f64 = p.iter().enumerate().map(|(i, &j)| overlap[i][j]).sum();
            if score > best.0 + 1e-14 {
                best = (score, p.to_vec());
            }
        });
        best.1
    } else {
        // greedy: largest overlaps first
        let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        pairs.sort_by(|a, b| overlap[b.0][b.1].total_cmp(&overlap[a.0][a.1]));
        let mut assign = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for (i, j) in pairs {
            if assign[i] == usize::MAX && !used[j] {
                assign[i] = j;
                used[j] = true;
            }
        }
        assign
    }
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// Track the eigensystem of `h` over `times` (ascending). Snapshots are
/// computed in parallel; matching and phase fixing run in order.
pub fn track_eigensystem(h: &TimeDependentHamiltonian, times: &[f64]) -> Result<EigenTrack> {
    let mut snapshots = times
        .par_iter()
        .map(|&t| numeric_eigensystem(&h.evaluate(t), t))
        .collect::<Result<Vec<_>>>()?;
    let mut min_overlap: f64 = 1.0;
    for j in 1..snapshots.len() {
        let (done, rest) = snapshots.split_at_mut(j);
        let prev = &done[j - 1];
        let cur = &mut rest[0];
        let n = cur.dim();
        let overlap: Vec<Vec<f64>> = (0..n)
            .map(|a| (0..n).map(|b| prev.eigenvectors[a].inner(&cur.eigenvectors[b]).norm()).collect())
            .collect();
        let perm = best_permutation(&overlap);
        let old_vals = cur.eigenvalues.clone();
        let old_vecs = cur.eigenvectors.clone();
        for (a, &b) in perm.iter().enumerate() {
            let ov = prev.eigenvectors[a].inner(&old_vecs[b]);
            min_overlap = min_overlap.min(ov.norm());
            let phase = if ov.norm() > 0.0 { ov.conj() / ov.norm() } else { C64::new(1.0, 0.0) };
            let v = old_vecs[b].amplitudes() * phase;
            cur.eigenvectors[a] = StateVector::from_amplitudes(old_vecs[b].space(), v)?;
            cur.eigenvalues[a] = old_vals[b];
        }
        cur.gauge = Gauge::Continuity;
    }
    if let Some(first) = snapshots.first_mut() {
        first.gauge = Gauge::Continuity;
    }
    Ok(EigenTrack {
        snapshots,
        min_overlap,
    })
}

/// |⟨ψₙ|∂ₜψ₁⟩| / |λₙ| with ∂ₜψ₁ from a central difference of step
/// 10⁻⁴ × (window length), on the single-excitation space.
pub fn adiabaticity_ratio(t: f64, pulses: &PulseSet, n: usize) -> Result<f64> {
    if !(2..=5).contains(&n) {
        return Err(Error::param("n", format!("need 2 <= n <= 5, got {n}")));
    }
    let h0 = reduced_h0(pulses)?;
    let (w0, w1) = pulses.window();
    let step = 1e-4 * (w1 - w0);
    let track = track_eigensystem(&h0, &[t - step, t, t + step])?;
    let [before, mid, after] = [&track.snapshots[0], &track.snapshots[1], &track.snapshots[2]];
    let (lambda_n, psi_n) = mid.by_label(n).expect("label in range");
    if lambda_n.abs() < 1e-9 * pulses.g() {
        return Err(Error::DegenerateInput(format!("|λ{n}| = {:e} at t = {t}", lambda_n.abs())));
    }
    let d_psi1 = (after.by_label(1).unwrap().1.amplitudes() - before.by_label(1).unwrap().1.amplitudes())
        / C64::new(2.0 * step, 0.0);
    Ok(psi_n.amplitudes().dotc(&d_psi1).norm() / lambda_n.abs())
}

/// Worst adiabaticity ratio over `samples` points of the window, skipping
/// the degenerate edges. Returns (t, ratio).
pub fn worst_adiabaticity(pulses: &PulseSet, n: usize, samples: usize) -> Result<(f64, f64)> {
    let (w0, w1) = pulses.window();
    let points: Vec<f64> = (1..samples)
        .map(|k| w0 + (w1 - w0) * k as f64 / samples as f64)
        .filter(|&t| {
            let [o1, o2] = pulses.omegas(t);
            o1 * o1 + o2 * o2 > TRACKING_MIN_POWER
        })
        .collect();
    let ratios = points
        .par_iter()
        .map(|&t| adiabaticity_ratio(t, pulses, n).map(|r| (t, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ratios.into_iter().fold((w0, 0.0), |a, b| if b.1 > a.1 { b } else { a }))
}

/// Numerically reconstructed counter-diabatic Hamiltonian at the interior
/// samples of a track.
#[derive(Clone, Debug)]
pub struct SampledHamiltonian {
    pub times: Vec<f64>,
    pub operators: Vec<Operator>,
}

impl SampledHamiltonian {
    /// Linear interpolation between samples; clamped at the ends.
    pub fn at(&self, t: f64) -> Option<Operator> {
        let n = self.times.len();
        if n == 0 {
            return None;
        }
        if t <= self.times[0] {
            return Some(self.operators[0].clone());
        }
        if t >= self.times[n - 1] {
            return Some(self.operators[n - 1].clone());
        }
        let k = self.times.partition_point(|&x| x <= t) - 1;
        let f = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        let a = self.operators[k].scale(C64::new(1.0 - f, 0.0));
        let b = self.operators[k + 1].scale(C64::new(f, 0.0));
        Some(&a + &b)
    }
}

/// H₁ = i Σₘ |∂ₜψₘ⟩⟨ψₘ| in the parallel-transport gauge (diagonal
/// ⟨ψₘ|∂ₜψₘ⟩ removed), from central differences along the track.
/// Samples whose neighbours straddle a degenerate region are returned as
/// zero. `power` reports Ω₁² + Ω₂² at each track time.
pub fn cdd_numeric(track: &EigenTrack, power: impl Fn(f64) -> f64) -> Result<SampledHamiltonian> {
    if track.min_overlap < GAUGE_BREAK_OVERLAP {
        let worst = track
            .snapshots
            .windows(2)
            .find(|w| {
                w[0].eigenvectors
                    .iter()
                    .zip(&w[1].eigenvectors)
                    .any(|(a, b)| a.inner(b).norm() < GAUGE_BREAK_OVERLAP)
            })
            .map_or(track.snapshots[0].t, |w| w[1].t);
        return Err(Error::GaugeBreak {
            t: worst,
            overlap: track.min_overlap,
        });
    }
    let snaps = &track.snapshots;
    let mut times = Vec::new();
    let mut operators = Vec::new();
    for j in 1..snaps.len().saturating_sub(1) {
        let (prev, cur, next) = (&snaps[j - 1], &snaps[j], &snaps[j + 1]);
        let space = cur.eigenvectors[0].space();
        let n = space.dim();
        let mut m = CMatrix::zeros(n, n);
        let live = [prev.t, cur.t, next.t].iter().all(|&t| power(t) > TRACKING_MIN_POWER);
        if live {
            let dt = C64::new(next.t - prev.t, 0.0);
            for k in 0..n {
                let psi = cur.eigenvectors[k].amplitudes();
                let mut d = (next.eigenvectors[k].amplitudes() - prev.eigenvectors[k].amplitudes()) / dt;
                let along = psi.dotc(&d);
                d -= psi * along;
                m += (d * psi.adjoint()) * I;
            }
            debug_assert!(hermiticity_deviation(&m) < 1e-3);
            symmetrize_matrix(&mut m);
        }
        times.push(cur.t);
        operators.push(Operator::from_matrix(space, m)?);
    }
    Ok(SampledHamiltonian { times, operators })
}

/// Relative Frobenius gap between the numerical H₁ restricted to
/// span{φ₁, φ₅} and C(t)(|φ₁⟩⟨φ₅| + h.c.) at time `t`.
pub fn cdd_reconstruction_gap(pulses: &PulseSet, t: f64) -> Result<f64> {
    let h0 = reduced_h0(pulses)?;
    let (w0, w1) = pulses.window();
    let step = 1e-4 * (w1 - w0);
    let track = track_eigensystem(&h0, &[t - step, t, t + step])?;
    let p = pulses.clone();
    let sampled = cdd_numeric(&track, move |x| {
        let [a, b] = p.omegas(x);
        a * a + b * b
    })?;
    let h1 = &sampled.operators[0];
    let c = pulses.cdd_coupling(t);
    let (p1, p5) = (BasisLabel::PHI1, BasisLabel::PHI5);
    let block = [
        [h1.element(&p1, &p1), h1.element(&p1, &p5)],
        [h1.element(&p5, &p1), h1.element(&p5, &p5)],
    ];
    let reference = [[ZERO, C64::new(c, 0.0)], [C64::new(c, 0.0), ZERO]];
    let mut diff = 0.0;
    let mut norm = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            diff += (block[i][j] - reference[i][j]).norm_sqr();
            norm += reference[i][j].norm_sqr();
        }
    }
    if norm == 0.0 {
        return Err(Error::DegenerateInput(format!("C(t) = 0 at t = {t}")));
    }
    Ok((diff / norm).sqrt())
}
