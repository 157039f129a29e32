//! Reference, counter-diabatic, auxiliary and effective Hamiltonians, plus
//! the jump operators of the master equation.
//!
//! Every Hamiltonian is a sum of `coefficient(t) × constant operator` terms.
//! Couplings are always entered together with their conjugate-transpose
//! partner so that H(t) is Hermitian at every t.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pulses::{eta_from_aux, DetuningParams, PulseSet};
use crate::statespace::{
    atomic_projector, mode_annihilator, Atom, AtomLevel, BasisLabel, CMatrix, Mode, Operator, Space, C64, I, ONE,
};

/// Samples used to check that δ can realize C(t) over the window.
const REALIZABILITY_SAMPLES: usize = 4000;

pub type Coefficient = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

#[derive(Clone)]
struct Term {
    coefficient: Coefficient,
    operator: Operator,
}

#[derive(Clone)]
pub struct TimeDependentHamiltonian {
    space: Arc<Space>,
    terms: Vec<Term>,
    window: (f64, f64),
    max_frequency: f64,
}

impl fmt::Debug for TimeDependentHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentHamiltonian")
            .field("dim", &self.space.dim())
            .field("terms", &self.terms.len())
            .field("window", &self.window)
            .field("max_frequency", &self.max_frequency)
            .finish()
    }
}

impl TimeDependentHamiltonian {
    pub fn new(space: &Arc<Space>, window: (f64, f64)) -> Self {
        TimeDependentHamiltonian {
            space: space.clone(),
            terms: Vec::new(),
            window,
            max_frequency: 0.0,
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Fastest explicit carrier frequency among the coefficients (0 if none).
    pub fn max_frequency(&self) -> f64 {
        self.max_frequency
    }

    /// Raw term. The caller is responsible for Hermiticity.
    pub fn add_term(&mut self, coefficient: Coefficient, operator: Operator) {
        assert_eq!(**operator.space(), *self.space, "term on a different space");
        self.terms.push(Term {
            coefficient,
            operator,
        });
    }

    /// c(t)·O + c(t)*·O†
    pub fn add_coupling(&mut self, coefficient: Coefficient, operator: Operator) {
        let adjoint = operator.dagger();
        let conj = coefficient.clone();
        self.add_term(coefficient, operator);
        self.add_term(Arc::new(move |t| conj(t).conj()), adjoint);
    }

    /// Real coefficient times a Hermitian operator.
    pub fn add_hermitian(&mut self, coefficient: impl Fn(f64) -> f64 + Send + Sync + 'static, operator: Operator) {
        self.add_term(Arc::new(move |t| C64::new(coefficient(t), 0.0)), operator);
    }

    pub fn note_frequency(&mut self, omega: f64) {
        self.max_frequency = self.max_frequency.max(omega.abs());
    }

    /// H(t) as a matrix on this Hamiltonian's space.
    pub fn evaluate_into(&self, t: f64, out: &mut CMatrix) {
        out.fill(C64::new(0.0, 0.0));
        for term in &self.terms {
            let c = (term.coefficient)(t);
            if c != C64::new(0.0, 0.0) {
                out.zip_apply(term.operator.matrix(), |o, m| *o += c * m);
            }
        }
    }

    pub fn evaluate(&self, t: f64) -> Operator {
        let n = self.space.dim();
        let mut m = CMatrix::zeros(n, n);
        self.evaluate_into(t, &mut m);
        Operator::from_matrix(&self.space, m).expect("dimension fixed by space")
    }

    /// Sum of two Hamiltonians on the same space; the window is the union.
    pub fn plus(mut self, other: TimeDependentHamiltonian) -> Result<Self> {
        if *self.space != *other.space {
            return Err(Error::SpaceMismatch);
        }
        self.terms.extend(other.terms);
        self.window = (self.window.0.min(other.window.0), self.window.1.max(other.window.1));
        self.max_frequency = self.max_frequency.max(other.max_frequency);
        Ok(self)
    }

    /// Restrict every term onto `target` (a subspace of this space).
    pub fn project_onto(&self, target: &Arc<Space>) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|term| {
                Ok(Term {
                    coefficient: term.coefficient.clone(),
                    operator: term.operator.project_onto(target)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TimeDependentHamiltonian {
            space: target.clone(),
            terms,
            window: self.window,
            max_frequency: self.max_frequency,
        })
    }

    /// The constant operators of all terms, for reachability analysis.
    pub fn generators(&self) -> Vec<Operator> {
        self.terms.iter().map(|t| t.operator.clone()).collect()
    }
}

/// Reference Hamiltonian
/// H₀ = Ω₁|s⟩₁⟨g| − iΩ₂|s⟩₂⟨g| + g·a(|s⟩₁⟨f| + |s⟩₂⟨f|) + h.c.
pub fn build_h0(space: &Arc<Space>, pulses: &PulseSet) -> TimeDependentHamiltonian {
    let mut h = TimeDependentHamiltonian::new(space, pulses.window());

    let p1 = pulses.clone();
    h.add_coupling(
        Arc::new(move |t| C64::new(p1.omega1(t), 0.0)),
        atomic_projector(space, Atom::One, AtomLevel::G, AtomLevel::S),
    );
    let p2 = pulses.clone();
    h.add_coupling(
        Arc::new(move |t| -I * p2.omega2(t)),
        atomic_projector(space, Atom::Two, AtomLevel::G, AtomLevel::S),
    );

    let a = mode_annihilator(space, Mode::A);
    let raise = &atomic_projector(space, Atom::One, AtomLevel::F, AtomLevel::S)
        + &atomic_projector(space, Atom::Two, AtomLevel::F, AtomLevel::S);
    let cavity = (&a * &raise).scale(C64::new(pulses.g(), 0.0));
    h.add_coupling(Arc::new(|_| ONE), cavity);
    h
}

/// Analytic counter-diabatic Hamiltonian H₁ = C(t)(|φ₁⟩⟨φ₅| + |φ₅⟩⟨φ₁|).
pub fn build_h1_analytic(space: &Arc<Space>, pulses: &PulseSet) -> Result<TimeDependentHamiltonian> {
    let flip = flip_operator(space, &BasisLabel::PHI1, &BasisLabel::PHI5)?;
    let mut h = TimeDependentHamiltonian::new(space, pulses.window());
    let p = pulses.clone();
    h.add_hermitian(move |t| p.cdd_coupling(t), flip);
    Ok(h)
}

fn flip_operator(space: &Arc<Space>, a: &BasisLabel, b: &BasisLabel) -> Result<Operator> {
    let (i, j) = match (space.position(a), space.position(b)) {
        (Some(i), Some(j)) => (i, j),
        _ => return Err(Error::param("space", format!("{a} and {b} must both be in the space"))),
    };
    let mut m = CMatrix::zeros(space.dim(), space.dim());
    m[(i, j)] = ONE;
    m[(j, i)] = ONE;
    Operator::from_matrix(space, m)
}

/// Auxiliary Hamiltonian
/// H̃ = Σᵢ (Ω̃(t)e^{iΔ₁t}|g⟩ᵢ⟨e| + g·e^{iΔ₂t} b†|f⟩ᵢ⟨e| + h.c.)
/// with Ω̃ reverse-engineered from the matching condition.
pub fn build_h_aux(
    space: &Arc<Space>,
    pulses: &PulseSet,
    det: &DetuningParams,
) -> Result<TimeDependentHamiltonian> {
    let n_max_b = space.basis().n_max_b();
    if n_max_b == 0 {
        return Err(Error::Truncation { n_max_b });
    }
    pulses.check_aux_realizable(det, REALIZABILITY_SAMPLES)?;

    let mut h = TimeDependentHamiltonian::new(space, pulses.window());
    let b_dag = mode_annihilator(space, Mode::B).dagger();
    let g = pulses.g();
    for atom in Atom::BOTH {
        let p = pulses.clone();
        let d = *det;
        h.add_coupling(
            Arc::new(move |t| C64::from_polar(p.aux_rabi_clamped(t, &d), d.delta1 * t)),
            atomic_projector(space, atom, AtomLevel::E, AtomLevel::G),
        );
        let d2 = det.delta2;
        h.add_coupling(
            Arc::new(move |t| C64::from_polar(g, d2 * t)),
            &b_dag * &atomic_projector(space, atom, AtomLevel::E, AtomLevel::F),
        );
    }
    h.note_frequency(det.delta1);
    h.note_frequency(det.delta2);
    Ok(h)
}

/// Effective flip-flop Hamiltonian (η²/δ)(S₁⁺S₂⁻ + S₂⁺S₁⁻) with
/// S⁺ = |f⟩⟨g|, S⁻ = |g⟩⟨f| and η from the matched Ω̃.
pub fn build_h_eff(
    space: &Arc<Space>,
    pulses: &PulseSet,
    det: &DetuningParams,
) -> Result<TimeDependentHamiltonian> {
    pulses.check_aux_realizable(det, REALIZABILITY_SAMPLES)?;
    let s_plus = |atom| atomic_projector(space, atom, AtomLevel::G, AtomLevel::F);
    let s_minus = |atom| atomic_projector(space, atom, AtomLevel::F, AtomLevel::G);
    let flip_flop = &(&s_plus(Atom::One) * &s_minus(Atom::Two)) + &(&s_plus(Atom::Two) * &s_minus(Atom::One));

    let mut h = TimeDependentHamiltonian::new(space, pulses.window());
    let p = pulses.clone();
    let d = *det;
    h.add_hermitian(
        move |t| {
            let eta = eta_from_aux(p.aux_rabi_clamped(t, &d), &d, p.g());
            eta * eta / d.delta()
        },
        flip_flop,
    );
    Ok(h)
}

/// Cavity leakage κ (both modes) and atomic spontaneous emission Γ, split
/// evenly as Γ/2 over every excited→ground channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoherenceParams {
    pub kappa: f64,
    pub gamma: f64,
}

impl DecoherenceParams {
    pub fn new(kappa: f64, gamma: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::param("kappa", format!("must be >= 0, got {kappa}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", format!("must be >= 0, got {gamma}")));
        }
        Ok(DecoherenceParams { kappa, gamma })
    }

    pub fn none() -> Self {
        DecoherenceParams {
            kappa: 0.0,
            gamma: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.kappa == 0.0 && self.gamma == 0.0
    }
}

/// One dissipative channel; contributes rate·(LρL† − ½{L†L, ρ}).
#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub name: String,
    pub rate: f64,
    pub operator: Operator,
}

impl JumpOperator {
    pub fn project_onto(&self, target: &Arc<Space>) -> Result<Self> {
        Ok(JumpOperator {
            name: self.name.clone(),
            rate: self.rate,
            operator: self.operator.project_onto(target)?,
        })
    }
}

/// The ten channels: a, b (rate κ) and |m⟩ₖ⟨n| for k ∈ {1,2}, n ∈ {s,e},
/// m ∈ {g,f} (rate Γ/2 each).
pub fn build_jump_operators(space: &Arc<Space>, dec: &DecoherenceParams) -> Vec<JumpOperator> {
    let mut out = vec![
        JumpOperator {
            name: "a".into(),
            rate: dec.kappa,
            operator: mode_annihilator(space, Mode::A),
        },
        JumpOperator {
            name: "b".into(),
            rate: dec.kappa,
            operator: mode_annihilator(space, Mode::B),
        },
    ];
    for (k, atom) in Atom::BOTH.into_iter().enumerate() {
        for n in [AtomLevel::S, AtomLevel::E] {
            for m in [AtomLevel::G, AtomLevel::F] {
                out.push(JumpOperator {
                    name: format!("atom{}:{}->{}", k + 1, n.symbol(), m.symbol()),
                    rate: dec.gamma / 2.0,
                    operator: atomic_projector(space, atom, n, m),
                });
            }
        }
    }
    out
}
