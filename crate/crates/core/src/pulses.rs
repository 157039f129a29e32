//! Drive envelopes and the derived counter-diabatic controls.
//!
//! All frequencies are in units of the cavity coupling `g`, times in `1/g`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use log::warn;

use crate::error::{Error, Result};

/// Below this value of Ω₁² + Ω₂² (in g² units) both pulses count as off.
pub const PULSE_OFF_EPS: f64 = 1e-18;
/// Negative auxiliary-Rabi radicands above this are rounding noise.
pub const RADICAND_CLAMP: f64 = 1e-12;

/// A pair of real, nonnegative drive envelopes with analytic derivatives.
pub trait PulseShape: Send + Sync + fmt::Debug {
    /// [Ω₁(t), Ω₂(t)]
    fn omegas(&self, t: f64) -> [f64; 2];
    /// [∂ₜΩ₁(t), ∂ₜΩ₂(t)]
    fn derivatives(&self, t: f64) -> [f64; 2];
    /// Control window [t_start, t_end].
    fn window(&self) -> (f64, f64);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Task {
    Transfer,
    Entangle,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Transfer => "transfer",
            Task::Entangle => "entangle",
        }
    }
}

/// sin⁴ pulses: Ω₂ on [0, T], Ω₁ delayed by τ on [τ, T + τ].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferPulseParams {
    pub omega0: f64,
    pub big_t: f64,
    pub tau: f64,
}

impl TransferPulseParams {
    pub fn new(omega0: f64, big_t: f64, tau: f64) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::param("omega0", format!("must be > 0, got {omega0}")));
        }
        if !(big_t > 0.0 && big_t.is_finite()) {
            return Err(Error::param("big-t", format!("must be > 0, got {big_t}")));
        }
        if !(0.0..big_t).contains(&tau) {
            return Err(Error::param("tau", format!("need 0 <= tau < T, got tau = {tau}, T = {big_t}")));
        }
        if omega0 > 0.5 {
            warn!("omega0 = {omega0} g is not weak driving (|Ω| << g)");
        }
        Ok(TransferPulseParams { omega0, big_t, tau })
    }

    /// Standard operating point for the given duration: Ω₀ = 0.2, τ = 0.22 T.
    pub fn with_duration(big_t: f64) -> Result<Self> {
        TransferPulseParams::new(0.2, big_t, 0.22 * big_t)
    }

    fn sin4(&self, t: f64, start: f64) -> (f64, f64) {
        if t < start || t > start + self.big_t {
            return (0.0, 0.0);
        }
        let k = PI / self.big_t;
        let (s, c) = (k * (t - start)).sin_cos();
        let s3 = s * s * s;
        (self.omega0 * s3 * s, 4.0 * k * self.omega0 * s3 * c)
    }

    pub fn omega1(&self, t: f64) -> f64 {
        self.sin4(t, self.tau).0
    }

    pub fn omega2(&self, t: f64) -> f64 {
        self.sin4(t, 0.0).0
    }

    pub fn d_omega1(&self, t: f64) -> f64 {
        self.sin4(t, self.tau).1
    }

    pub fn d_omega2(&self, t: f64) -> f64 {
        self.sin4(t, 0.0).1
    }
}

impl PulseShape for TransferPulseParams {
    fn omegas(&self, t: f64) -> [f64; 2] {
        [self.omega1(t), self.omega2(t)]
    }

    fn derivatives(&self, t: f64) -> [f64; 2] {
        [self.d_omega1(t), self.d_omega2(t)]
    }

    fn window(&self) -> (f64, f64) {
        (0.0, self.big_t + self.tau)
    }
}

/// Gaussian pair: Ω₁ is half the late Gaussian, Ω₂ adds an early one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntanglePulseParams {
    pub omega0p: f64,
    pub big_t: f64,
    pub theta: f64,
    pub w: f64,
}

impl EntanglePulseParams {
    pub fn new(omega0p: f64, big_t: f64, theta: f64, w: f64) -> Result<Self> {
        if !(omega0p > 0.0 && omega0p.is_finite()) {
            return Err(Error::param("omega0", format!("must be > 0, got {omega0p}")));
        }
        if !(big_t > 0.0 && big_t.is_finite()) {
            return Err(Error::param("big-t", format!("must be > 0, got {big_t}")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::param("w", format!("must be > 0, got {w}")));
        }
        if !(theta > 0.0 && theta < 0.5) {
            return Err(Error::param("theta", format!("need 0 < theta < 1/2, got {theta}")));
        }
        if omega0p > 0.5 {
            warn!("omega0 = {omega0p} g is not weak driving (|Ω| << g)");
        }
        Ok(EntanglePulseParams {
            omega0p,
            big_t,
            theta,
            w,
        })
    }

    /// Standard operating point for the given duration: Ω₀′ = 0.3, θ = 17/120, w = 23/120.
    pub fn with_duration(big_t: f64) -> Result<Self> {
        EntanglePulseParams::new(0.3, big_t, 17.0 / 120.0, 23.0 / 120.0)
    }

    /// exp(-(t - c)²/(wT)²) and its derivative.
    fn gauss(&self, t: f64, center: f64) -> (f64, f64) {
        let s2 = (self.w * self.big_t).powi(2);
        let x = t - center;
        let e = (-x * x / s2).exp();
        (e, -2.0 * x / s2 * e)
    }

    fn late(&self, t: f64) -> (f64, f64) {
        self.gauss(t, (self.theta + 0.5) * self.big_t)
    }

    fn early(&self, t: f64) -> (f64, f64) {
        self.gauss(t, (0.5 - self.theta) * self.big_t)
    }

    pub fn omega1(&self, t: f64) -> f64 {
        0.5 * self.omega0p * self.late(t).0
    }

    pub fn omega2(&self, t: f64) -> f64 {
        self.omega0p * (self.early(t).0 + 0.5 * self.late(t).0)
    }

    pub fn d_omega1(&self, t: f64) -> f64 {
        0.5 * self.omega0p * self.late(t).1
    }

    pub fn d_omega2(&self, t: f64) -> f64 {
        self.omega0p * (self.early(t).1 + 0.5 * self.late(t).1)
    }
}

impl PulseShape for EntanglePulseParams {
    fn omegas(&self, t: f64) -> [f64; 2] {
        [self.omega1(t), self.omega2(t)]
    }

    fn derivatives(&self, t: f64) -> [f64; 2] {
        [self.d_omega1(t), self.d_omega2(t)]
    }

    fn window(&self) -> (f64, f64) {
        (0.0, self.big_t)
    }
}

type EnvelopeFn = dyn Fn(f64) -> [f64; 4] + Send + Sync;

/// User-supplied envelopes: the closure returns [Ω₁, Ω₂, ∂Ω₁, ∂Ω₂].
/// Nothing about the result is validated.
#[derive(Clone)]
pub struct CustomPulses {
    f: Arc<EnvelopeFn>,
    window: (f64, f64),
}

impl CustomPulses {
    pub fn new(window: (f64, f64), f: impl Fn(f64) -> [f64; 4] + Send + Sync + 'static) -> Self {
        CustomPulses {
            f: Arc::new(f),
            window,
        }
    }
}

impl fmt::Debug for CustomPulses {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPulses").field("window", &self.window).finish()
    }
}

impl PulseShape for CustomPulses {
    fn omegas(&self, t: f64) -> [f64; 2] {
        let v = (self.f)(t);
        [v[0], v[1]]
    }

    fn derivatives(&self, t: f64) -> [f64; 2] {
        let v = (self.f)(t);
        [v[2], v[3]]
    }

    fn window(&self) -> (f64, f64) {
        self.window
    }
}

/// Detunings Δ₁ (laser on g–e) and Δ₂ (mode b on f–e); δ = Δ₁ − Δ₂ keeps its sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetuningParams {
    pub delta1: f64,
    pub delta2: f64,
}

impl DetuningParams {
    pub fn new(delta1: f64, delta2: f64) -> Result<Self> {
        if !(delta1.is_finite() && delta2.is_finite()) || delta1 == 0.0 || delta2 == 0.0 {
            return Err(Error::param("delta1/delta2", "detunings must be finite and nonzero"));
        }
        if delta1 + delta2 == 0.0 {
            return Err(Error::param("delta1/delta2", "delta1 + delta2 must be nonzero"));
        }
        if delta1 == delta2 {
            return Err(Error::param(
                "delta1/delta2",
                format!("delta = delta1 - delta2 = 0 (both {delta1}); the flip-flop coupling η²/δ needs delta1 != delta2"),
            ));
        }
        if delta1.abs().min(delta2.abs()) < 5.0 {
            warn!("detunings ({delta1}, {delta2}) are not large compared to g; the effective flip-flop picture degrades");
        }
        Ok(DetuningParams { delta1, delta2 })
    }

    pub fn standard() -> Self {
        DetuningParams {
            delta1: 6.0,
            delta2: 7.0,
        }
    }

    /// δ = Δ₁ − Δ₂ (signed).
    pub fn delta(&self) -> f64 {
        self.delta1 - self.delta2
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        DetuningParams::new(self.delta1 * k, self.delta2 * k)
    }

    /// Prefactor 2Δ₁Δ₂/(Δ₁ + Δ₂).
    fn harmonic(&self) -> f64 {
        2.0 * self.delta1 * self.delta2 / (self.delta1 + self.delta2)
    }
}

/// Drive envelopes plus the coupling scale, with the derived controls C(t),
/// Ω̃(t) and η(t).
#[derive(Clone, Debug)]
pub struct PulseSet {
    task: Option<Task>,
    shape: Arc<dyn PulseShape>,
    g: f64,
}

impl PulseSet {
    pub fn new(task: Option<Task>, shape: Arc<dyn PulseShape>, g: f64) -> Self {
        PulseSet { task, shape, g }
    }

    pub fn transfer(params: TransferPulseParams) -> Self {
        PulseSet::new(Some(Task::Transfer), Arc::new(params), 1.0)
    }

    pub fn entangle(params: EntanglePulseParams) -> Self {
        PulseSet::new(Some(Task::Entangle), Arc::new(params), 1.0)
    }

    pub fn custom(pulses: CustomPulses, g: f64) -> Self {
        PulseSet::new(None, Arc::new(pulses), g)
    }

    pub fn task(&self) -> Option<Task> {
        self.task
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn window(&self) -> (f64, f64) {
        self.shape.window()
    }

    pub fn omega1(&self, t: f64) -> f64 {
        self.shape.omegas(t)[0]
    }

    pub fn omega2(&self, t: f64) -> f64 {
        self.shape.omegas(t)[1]
    }

    pub fn omegas(&self, t: f64) -> [f64; 2] {
        self.shape.omegas(t)
    }

    pub fn derivatives(&self, t: f64) -> [f64; 2] {
        self.shape.derivatives(t)
    }

    /// Counter-diabatic coupling
    /// C = (Ω₁∂Ω₂ − Ω₂∂Ω₁)/(Ω₁² + Ω₂² + Ω₁²Ω₂²/g²), zero when both pulses are off.
    pub fn cdd_coupling(&self, t: f64) -> f64 {
        let [o1, o2] = self.shape.omegas(t);
        let [d1, d2] = self.shape.derivatives(t);
        let sum = o1 * o1 + o2 * o2;
        if sum < PULSE_OFF_EPS {
            return 0.0;
        }
        (o1 * d2 - o2 * d1) / (sum + o1 * o1 * o2 * o2 / (self.g * self.g))
    }

    /// (Ω₁∂Ω₂ − Ω₂∂Ω₁)δ / ((Ω₁² + Ω₂²)g² + Ω₁²Ω₂²), i.e. C·δ/g².
    pub fn aux_radicand(&self, t: f64, det: &DetuningParams) -> f64 {
        let [o1, o2] = self.shape.omegas(t);
        let [d1, d2] = self.shape.derivatives(t);
        let sum = o1 * o1 + o2 * o2;
        if sum < PULSE_OFF_EPS {
            return 0.0;
        }
        (o1 * d2 - o2 * d1) * det.delta() / (sum * self.g * self.g + o1 * o1 * o2 * o2)
    }

    /// Auxiliary Rabi frequency Ω̃(t) that makes η²/δ equal C(t).
    pub fn aux_rabi(&self, t: f64, det: &DetuningParams) -> Result<f64> {
        let r = self.aux_radicand(t, det);
        if r < -RADICAND_CLAMP {
            return Err(Error::SignMismatch { t, radicand: r });
        }
        Ok(det.harmonic() * r.max(0.0).sqrt())
    }

    /// Ω̃(t) with the radicand clamped at zero; never fails. Used inside
    /// Hamiltonian coefficients after [`PulseSet::check_aux_realizable`].
    pub fn aux_rabi_clamped(&self, t: f64, det: &DetuningParams) -> f64 {
        det.harmonic() * self.aux_radicand(t, det).max(0.0).sqrt()
    }

    /// η = ½(1/Δ₁ + 1/Δ₂)·g·Ω̃
    pub fn eta(&self, t: f64, det: &DetuningParams) -> Result<f64> {
        Ok(eta_from_aux(self.aux_rabi(t, det)?, det, self.g))
    }

    /// Scan the window and fail with `SignMismatch` at the first sample where
    /// the chosen δ cannot realize C(t).
    pub fn check_aux_realizable(&self, det: &DetuningParams, samples: usize) -> Result<()> {
        let (t0, t1) = self.window();
        let n = samples.max(2);
        for k in 0..=n {
            let t = t0 + (t1 - t0) * k as f64 / n as f64;
            self.aux_rabi(t, det)?;
        }
        Ok(())
    }
}

pub fn eta_from_aux(aux_rabi: f64, det: &DetuningParams, g: f64) -> f64 {
    0.5 * (1.0 / det.delta1 + 1.0 / det.delta2) * g * aux_rabi
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Composite Simpson on n (even) panels; test-only quadrature oracle.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + k as f64 * h);
        }
        s * h / 3.0
    }

    fn transfer(omega0: f64) -> PulseSet {
        PulseSet::transfer(TransferPulseParams::new(omega0, 50.0, 11.0).unwrap())
    }

    fn entangle(omega0: f64) -> PulseSet {
        PulseSet::entangle(EntanglePulseParams::new(omega0, 30.0, 17.0 / 120.0, 23.0 / 120.0).unwrap())
    }

    #[test]
    fn transfer_envelope_values() {
        let p = TransferPulseParams::new(0.2, 50.0, 11.0).unwrap();
        assert!((p.omega2(25.0) - 0.2).abs() < 1e-15);
        assert_eq!(p.omega1(11.0), 0.0);
        assert!((p.omega1(11.0 + 25.0) - 0.2).abs() < 1e-15);
        assert_eq!(p.omega1(5.0), 0.0);
        assert_eq!(p.omega2(55.0), 0.0);
        // Ω₂ peaks first; the two overlap in between
        assert!(p.omega2(20.0) > p.omega1(20.0));
        assert!(p.omega1(45.0) > p.omega2(45.0));
        assert!(p.omega1(30.5) > 0.01 && p.omega2(30.5) > 0.01);
    }

    #[test]
    fn transfer_edges_are_c1() {
        let p = TransferPulseParams::new(0.2, 50.0, 11.0).unwrap();
        for t in [0.0, 50.0] {
            assert!(p.omega2(t).abs() < 1e-15 && p.d_omega2(t).abs() < 1e-15);
        }
        for t in [11.0, 61.0] {
            assert!(p.omega1(t).abs() < 1e-15 && p.d_omega1(t).abs() < 1e-15);
        }
    }

    #[test]
    fn entangle_envelope_values() {
        let (theta, w) = (17.0 / 120.0, 23.0 / 120.0);
        let p = EntanglePulseParams::new(0.3, 30.0, theta, w).unwrap();
        assert!((p.omega1((theta + 0.5) * 30.0) - 0.15).abs() < 1e-15);
        let want = 0.3 * (1.0 + 0.5 * (-4.0 * theta * theta / (w * w)).exp());
        assert!((p.omega2((0.5 - theta) * 30.0) - want).abs() < 1e-14);
        assert!((p.omega1(30.0) / p.omega2(30.0) - 1.0).abs() < 0.02);
        assert!(p.omega1(0.0) / p.omega2(0.0) < 1e-2);
    }

    #[test]
    fn parameter_validation() {
        assert!(TransferPulseParams::new(0.0, 50.0, 1.0).is_err());
        assert!(TransferPulseParams::new(0.2, 50.0, 50.0).is_err());
        assert!(EntanglePulseParams::new(0.3, 30.0, 0.5, 0.2).is_err());
        assert!(EntanglePulseParams::new(0.3, 30.0, 0.1, 0.0).is_err());
        assert!(DetuningParams::new(6.0, 6.0).is_err());
        assert_eq!(DetuningParams::standard().delta(), -1.0);
    }

    #[test]
    fn analytic_derivatives_match_central_differences() {
        let sets = [transfer(0.2), entangle(0.3)];
        for ps in &sets {
            let (t0, t1) = ps.window();
            let h = 1e-5 * (t1 - t0);
            for k in 1..40 {
                let t = t0 + (t1 - t0) * k as f64 / 40.0;
                let d = ps.derivatives(t);
                for i in 0..2 {
                    let fd = (ps.omegas(t + h)[i] - ps.omegas(t - h)[i]) / (2.0 * h);
                    let scale = d[i].abs().max(1e-3);
                    assert!((fd - d[i]).abs() / scale < 1e-6, "t={t} i={i} fd={fd} an={}", d[i]);
                }
            }
        }
    }

    #[test]
    fn cdd_zero_for_proportional_pulses_and_outside_support() {
        let ps = PulseSet::custom(
            CustomPulses::new((0.0, 10.0), |t| {
                let s = (t / 3.0).sin().powi(2);
                let ds = 2.0 * (t / 3.0).sin() * (t / 3.0).cos() / 3.0;
                [0.7 * s, s, 0.7 * ds, ds]
            }),
            1.0,
        );
        for k in 0..50 {
            assert!(ps.cdd_coupling(0.2 * k as f64).abs() < 1e-15);
        }
        let tr = transfer(0.2);
        assert_eq!(tr.cdd_coupling(-1.0), 0.0);
        assert_eq!(tr.cdd_coupling(70.0), 0.0);
    }

    #[test]
    fn cdd_area_transfer() {
        let ps = transfer(0.2);
        let area = simpson(|t| ps.cdd_coupling(t), 0.0, 61.0, 20_000);
        assert!(area < 0.0);
        assert!((area.abs() / (PI / 2.0) - 1.0).abs() < 0.02, "area {area}");
    }

    #[test]
    fn cdd_area_converges_in_weak_driving() {
        let tr = simpson(|t| transfer(0.01).cdd_coupling(t), 0.0, 61.0, 20_000);
        assert!((tr.abs() - PI / 2.0).abs() < 1e-3, "{tr}");
        let en = simpson(|t| entangle(0.01).cdd_coupling(t), 0.0, 30.0, 20_000);
        assert!((en.abs() - PI / 4.0).abs() < 2e-3, "{en}");
    }

    #[test]
    fn aux_rabi_real_for_standard_detunings() {
        let ps = transfer(0.2);
        let det = DetuningParams::standard();
        ps.check_aux_realizable(&det, 4000).unwrap();
        assert_eq!(ps.aux_rabi(-3.0, &det).unwrap(), 0.0);
        let flipped = DetuningParams::new(7.0, 6.0).unwrap();
        assert!(matches!(
            ps.check_aux_realizable(&flipped, 4000),
            Err(Error::SignMismatch { .. })
        ));
        entangle(0.3).check_aux_realizable(&det, 4000).unwrap();
    }

    #[test]
    fn aux_rabi_round_trips_matching_condition() {
        let ps = transfer(0.2);
        let det = DetuningParams::standard();
        for k in 1..200 {
            let t = 61.0 * k as f64 / 200.0;
            let c = ps.cdd_coupling(t);
            if c == 0.0 {
                continue;
            }
            let eta = ps.eta(t, &det).unwrap();
            assert!((eta * eta / det.delta() - c).abs() <= 1e-10 * c.abs(), "t={t}");
        }
    }

    proptest! {
        #[test]
        fn envelopes_nonnegative(t in -10.0f64..80.0, om in 0.01f64..0.5, frac in 0.0f64..0.9) {
            let p = TransferPulseParams::new(om, 50.0, frac * 50.0).unwrap();
            prop_assert!(p.omega1(t) >= 0.0 && p.omega2(t) >= 0.0);
            let e = EntanglePulseParams::new(om, 30.0, 17.0 / 120.0, 23.0 / 120.0).unwrap();
            prop_assert!(e.omega1(t) >= 0.0 && e.omega2(t) >= 0.0);
        }

        #[test]
        fn matching_condition_holds(t in 0.5f64..60.5, k in 1.0f64..5.0) {
            let ps = transfer(0.2);
            let det = DetuningParams::new(6.0 * k, 7.0 * k).unwrap();
            let c = ps.cdd_coupling(t);
            let eta = ps.eta(t, &det).unwrap();
            prop_assert!((eta * eta / det.delta() - c).abs() <= 1e-10 * c.abs().max(1e-300));
        }
    }
}
