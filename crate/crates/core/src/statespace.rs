//! Truncated product space of two four-level atoms and two bosonic modes.
//!
//! Labels are `(level₁, level₂, n_a, n_b)` ordered lexicographically with
//! `G < F < S < E`. A [`Space`] is either the full product basis or a sorted
//! subset of its indices; every operator and state carries the space it lives
//! on, so reduced-space dynamics keep their physical labels.

use std::collections::VecDeque;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Default magnitude below which a matrix element does not connect two states.
pub const DEFAULT_REACH_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomLevel {
    /// ground |g⟩
    G,
    /// ground |f⟩
    F,
    /// excited |s⟩
    S,
    /// auxiliary excited |e⟩
    E,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 4] = [AtomLevel::G, AtomLevel::F, AtomLevel::S, AtomLevel::E];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> char {
        match self {
            AtomLevel::G => 'g',
            AtomLevel::F => 'f',
            AtomLevel::S => 's',
            AtomLevel::E => 'e',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    One,
    Two,
}

impl Atom {
    pub const BOTH: [Atom; 2] = [Atom::One, Atom::Two];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel {
    pub atom1: AtomLevel,
    pub atom2: AtomLevel,
    pub n_a: usize,
    pub n_b: usize,
}

impl BasisLabel {
    pub const fn new(atom1: AtomLevel, atom2: AtomLevel, n_a: usize, n_b: usize) -> Self {
        BasisLabel {
            atom1,
            atom2,
            n_a,
            n_b,
        }
    }

    /// |g f 0 0⟩, the initial state.
    pub const PHI1: BasisLabel = BasisLabel::new(AtomLevel::G, AtomLevel::F, 0, 0);
    /// |s f 0 0⟩
    pub const PHI2: BasisLabel = BasisLabel::new(AtomLevel::S, AtomLevel::F, 0, 0);
    /// |f f 1 0⟩, one photon in mode a.
    pub const PHI3: BasisLabel = BasisLabel::new(AtomLevel::F, AtomLevel::F, 1, 0);
    /// |f s 0 0⟩
    pub const PHI4: BasisLabel = BasisLabel::new(AtomLevel::F, AtomLevel::S, 0, 0);
    /// |f g 0 0⟩, the transfer target.
    pub const PHI5: BasisLabel = BasisLabel::new(AtomLevel::F, AtomLevel::G, 0, 0);
    pub const EF: BasisLabel = BasisLabel::new(AtomLevel::E, AtomLevel::F, 0, 0);
    /// |f f 0 1⟩, one photon in mode b.
    pub const FFB: BasisLabel = BasisLabel::new(AtomLevel::F, AtomLevel::F, 0, 1);
    pub const FE: BasisLabel = BasisLabel::new(AtomLevel::F, AtomLevel::E, 0, 0);
    /// |f f 0 0⟩, reached only through decay.
    pub const FF: BasisLabel = BasisLabel::new(AtomLevel::F, AtomLevel::F, 0, 0);

    /// The single-excitation states φ₁…φ₅ in order.
    pub const PHI: [BasisLabel; 5] = [
        BasisLabel::PHI1,
        BasisLabel::PHI2,
        BasisLabel::PHI3,
        BasisLabel::PHI4,
        BasisLabel::PHI5,
    ];

    pub fn level(&self, atom: Atom) -> AtomLevel {
        match atom {
            Atom::One => self.atom1,
            Atom::Two => self.atom2,
        }
    }

    pub fn with_level(mut self, atom: Atom, level: AtomLevel) -> Self {
        match atom {
            Atom::One => self.atom1 = level,
            Atom::Two => self.atom2 = level,
        }
        self
    }

    pub fn photons(&self, mode: Mode) -> usize {
        match mode {
            Mode::A => self.n_a,
            Mode::B => self.n_b,
        }
    }

    pub fn with_photons(mut self, mode: Mode, n: usize) -> Self {
        match mode {
            Mode::A => self.n_a = n,
            Mode::B => self.n_b = n,
        }
        self
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|{} {} {} {}⟩",
            self.atom1.symbol(),
            self.atom2.symbol(),
            self.n_a,
            self.n_b
        )
    }
}

/// Full product basis with Fock cutoffs on both modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductBasis {
    n_max_a: usize,
    n_max_b: usize,
    labels: Vec<BasisLabel>,
}

impl ProductBasis {
    pub fn new(n_max_a: usize, n_max_b: usize) -> Self {
        let mut labels = Vec::with_capacity(16 * (n_max_a + 1) * (n_max_b + 1));
        for atom1 in AtomLevel::ALL {
            for atom2 in AtomLevel::ALL {
                for n_a in 0..=n_max_a {
                    for n_b in 0..=n_max_b {
                        labels.push(BasisLabel::new(atom1, atom2, n_a, n_b));
                    }
                }
            }
        }
        ProductBasis {
            n_max_a,
            n_max_b,
            labels,
        }
    }

    pub fn n_max_a(&self) -> usize {
        self.n_max_a
    }

    pub fn n_max_b(&self) -> usize {
        self.n_max_b
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Option<BasisLabel> {
        self.labels.get(index).copied()
    }

    pub fn index_of(&self, label: &BasisLabel) -> Option<usize> {
        if label.n_a > self.n_max_a || label.n_b > self.n_max_b {
            return None;
        }
        let na = self.n_max_a + 1;
        let nb = self.n_max_b + 1;
        Some(((label.atom1.index() * 4 + label.atom2.index()) * na + label.n_a) * nb + label.n_b)
    }
}

/// A sorted subset of product-basis indices. The full space is the subset
/// containing every index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Space {
    basis: Arc<ProductBasis>,
    indices: Vec<usize>,
}

impl Space {
    pub fn full(basis: Arc<ProductBasis>) -> Arc<Space> {
        let indices = (0..basis.dim()).collect();
        Arc::new(Space { basis, indices })
    }

    /// Convenience for `Space::full(Arc::new(ProductBasis::new(..)))`.
    pub fn product(n_max_a: usize, n_max_b: usize) -> Arc<Space> {
        Space::full(Arc::new(ProductBasis::new(n_max_a, n_max_b)))
    }

    /// Subspace spanned by the given basis indices (of the full basis).
    pub fn subset(basis: Arc<ProductBasis>, indices: &[usize]) -> Result<Arc<Space>> {
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::param("indices", "must be strictly ascending"));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= basis.dim() {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    dim: basis.dim(),
                });
            }
        }
        Ok(Arc::new(Space {
            basis,
            indices: indices.to_vec(),
        }))
    }

    pub fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    /// Full-basis indices of this space's states.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.basis.dim()
    }

    pub fn label(&self, position: usize) -> BasisLabel {
        self.basis.labels[self.indices[position]]
    }

    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        self.indices.iter().map(|&i| self.basis.labels[i])
    }

    /// Position of `label` within this space, if present.
    pub fn position(&self, label: &BasisLabel) -> Option<usize> {
        let full = self.basis.index_of(label)?;
        if self.is_full() {
            Some(full)
        } else {
            self.indices.binary_search(&full).ok()
        }
    }

    /// Restrict to the given positions (relative to this space).
    pub fn restrict(&self, positions: &[usize]) -> Result<Arc<Space>> {
        let mut full = Vec::with_capacity(positions.len());
        for &p in positions {
            let idx = *self.indices.get(p).ok_or(Error::IndexOutOfRange {
                index: p,
                dim: self.dim(),
            })?;
            full.push(idx);
        }
        Space::subset(self.basis.clone(), &full)
    }

    /// Positions of `other`'s states within `self`; fails when `other` is not
    /// contained in `self`.
    fn positions_of(&self, other: &Space) -> Result<Vec<usize>> {
        if self.basis != other.basis {
            return Err(Error::SpaceMismatch);
        }
        other
            .labels()
            .map(|l| self.position(&l).ok_or(Error::SpaceMismatch))
            .collect()
    }
}

fn same_space(a: &Arc<Space>, b: &Arc<Space>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[derive(Clone, Debug)]
pub struct Operator {
    space: Arc<Space>,
    matrix: CMatrix,
}

impl Operator {
    pub fn zeros(space: &Arc<Space>) -> Self {
        let n = space.dim();
        Operator {
            space: space.clone(),
            matrix: CMatrix::zeros(n, n),
        }
    }

    pub fn identity(space: &Arc<Space>) -> Self {
        let n = space.dim();
        Operator {
            space: space.clone(),
            matrix: CMatrix::identity(n, n),
        }
    }

    pub fn from_matrix(space: &Arc<Space>, matrix: CMatrix) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Operator {
            space: space.clone(),
            matrix,
        })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Operator {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * c,
        }
    }

    /// ⟨row|O|col⟩ by label; zero when either label is outside the space.
    pub fn element(&self, row: &BasisLabel, col: &BasisLabel) -> C64 {
        match (self.space.position(row), self.space.position(col)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => ZERO,
        }
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        assert!(
            same_space(&self.space, &psi.space),
            "operator and state on different spaces"
        );
        StateVector {
            space: self.space.clone(),
            amplitudes: &self.matrix * &psi.amplitudes,
        }
    }

    /// max |O - O†| elementwise.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Restriction onto the given positions (sorted, relative to this space).
    pub fn project(&self, positions: &[usize]) -> Result<Operator> {
        let space = self.space.restrict(positions)?;
        let matrix = self.matrix.select_rows(positions).select_columns(positions);
        Ok(Operator { space, matrix })
    }

    /// Restriction onto a subspace given as a [`Space`].
    pub fn project_onto(&self, target: &Arc<Space>) -> Result<Operator> {
        let positions = self.space.positions_of(target)?;
        let matrix = self.matrix.select_rows(&positions).select_columns(&positions);
        Ok(Operator {
            space: target.clone(),
            matrix,
        })
    }

    /// Embed into a larger space, filling zeros outside this operator's space.
    pub fn embed(&self, target: &Arc<Space>) -> Result<Operator> {
        let positions = target.positions_of(&self.space)?;
        let mut matrix = CMatrix::zeros(target.dim(), target.dim());
        for (a, &i) in positions.iter().enumerate() {
            for (b, &j) in positions.iter().enumerate() {
                matrix[(i, j)] = self.matrix[(a, b)];
            }
        }
        Ok(Operator {
            space: target.clone(),
            matrix,
        })
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert!(same_space(&self.space, &rhs.space), "space mismatch in +");
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert!(same_space(&self.space, &rhs.space), "space mismatch in -");
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert!(same_space(&self.space, &rhs.space), "space mismatch in *");
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

pub(crate) fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct StateVector {
    space: Arc<Space>,
    amplitudes: CVector,
}

impl StateVector {
    pub fn zeros(space: &Arc<Space>) -> Self {
        StateVector {
            space: space.clone(),
            amplitudes: CVector::zeros(space.dim()),
        }
    }

    pub fn basis_state(space: &Arc<Space>, label: &BasisLabel) -> Result<Self> {
        let pos = space
            .position(label)
            .ok_or_else(|| Error::param("label", format!("{label} is not in this space")))?;
        let mut psi = StateVector::zeros(space);
        psi.amplitudes[pos] = ONE;
        Ok(psi)
    }

    /// Superposition Σ cₖ |labelₖ⟩ (not normalized).
    pub fn from_labels(space: &Arc<Space>, terms: &[(C64, BasisLabel)]) -> Result<Self> {
        let mut psi = StateVector::zeros(space);
        for (c, label) in terms {
            let pos = space
                .position(label)
                .ok_or_else(|| Error::param("label", format!("{label} is not in this space")))?;
            psi.amplitudes[pos] += *c;
        }
        Ok(psi)
    }

    pub fn from_amplitudes(space: &Arc<Space>, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: amplitudes.len(),
            });
        }
        Ok(StateVector {
            space: space.clone(),
            amplitudes,
        })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, label: &BasisLabel) -> C64 {
        self.space
            .position(label)
            .map_or(ZERO, |p| self.amplitudes[p])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NonPhysicalInput(format!("cannot normalize state of norm {n}")));
        }
        Ok(StateVector {
            space: self.space.clone(),
            amplitudes: &self.amplitudes / C64::new(n, 0.0),
        })
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert!(same_space(&self.space, &other.space), "space mismatch in ⟨·|·⟩");
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn population(&self, label: &BasisLabel) -> f64 {
        self.amplitude(label).norm_sqr()
    }

    pub fn project(&self, positions: &[usize]) -> Result<StateVector> {
        let space = self.space.restrict(positions)?;
        Ok(StateVector {
            space,
            amplitudes: self.amplitudes.select_rows(positions),
        })
    }

    pub fn project_onto(&self, target: &Arc<Space>) -> Result<StateVector> {
        let positions = self.space.positions_of(target)?;
        Ok(StateVector {
            space: target.clone(),
            amplitudes: self.amplitudes.select_rows(&positions),
        })
    }

    pub fn embed(&self, target: &Arc<Space>) -> Result<StateVector> {
        let positions = target.positions_of(&self.space)?;
        let mut amplitudes = CVector::zeros(target.dim());
        for (a, &i) in positions.iter().enumerate() {
            amplitudes[i] = self.amplitudes[a];
        }
        Ok(StateVector {
            space: target.clone(),
            amplitudes,
        })
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: Arc<Space>,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Self {
        let v = &psi.amplitudes;
        DensityMatrix {
            space: psi.space.clone(),
            matrix: v * v.adjoint(),
        }
    }

    pub fn from_matrix(space: &Arc<Space>, matrix: CMatrix) -> Result<Self> {
        let op = Operator::from_matrix(space, matrix)?;
        Ok(DensityMatrix {
            space: op.space,
            matrix: op.matrix,
        })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn population(&self, label: &BasisLabel) -> f64 {
        self.space
            .position(label)
            .map_or(0.0, |p| self.matrix[(p, p)].re)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    /// ρ ← (ρ + ρ†)/2
    pub fn symmetrize(&mut self) {
        let adj = self.matrix.adjoint();
        self.matrix = (&self.matrix + adj) * C64::new(0.5, 0.0);
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut m = self.matrix.clone();
        symmetrize_matrix(&mut m);
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// ⟨ψ|ρ|ψ⟩
    pub fn expectation_pure(&self, psi: &StateVector) -> f64 {
        assert!(same_space(&self.space, &psi.space), "space mismatch");
        let v = &psi.amplitudes;
        v.dotc(&(&self.matrix * v)).re
    }

    pub fn project_onto(&self, target: &Arc<Space>) -> Result<DensityMatrix> {
        let positions = self.space.positions_of(target)?;
        Ok(DensityMatrix {
            space: target.clone(),
            matrix: self.matrix.select_rows(&positions).select_columns(&positions),
        })
    }

    pub fn embed(&self, target: &Arc<Space>) -> Result<DensityMatrix> {
        let op = Operator {
            space: self.space.clone(),
            matrix: self.matrix.clone(),
        }
        .embed(target)?;
        Ok(DensityMatrix {
            space: op.space,
            matrix: op.matrix,
        })
    }
}

pub(crate) fn symmetrize_matrix(m: &mut CMatrix) {
    let adj = m.adjoint();
    *m += adj;
    *m *= C64::new(0.5, 0.0);
}

/// |to⟩ₖ⟨from| on atom `k`, identity on everything else.
pub fn atomic_projector(space: &Arc<Space>, atom: Atom, from: AtomLevel, to: AtomLevel) -> Operator {
    let mut op = Operator::zeros(space);
    for (col, label) in space.labels().enumerate() {
        if label.level(atom) != from {
            continue;
        }
        if let Some(row) = space.position(&label.with_level(atom, to)) {
            op.matrix[(row, col)] = ONE;
        }
    }
    op
}

/// Truncated annihilation operator of `mode`.
pub fn mode_annihilator(space: &Arc<Space>, mode: Mode) -> Operator {
    let mut op = Operator::zeros(space);
    for (col, label) in space.labels().enumerate() {
        let n = label.photons(mode);
        if n == 0 {
            continue;
        }
        if let Some(row) = space.position(&label.with_photons(mode, n - 1)) {
            op.matrix[(row, col)] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    op
}

/// Breadth-first closure of `seed`'s support under the generators: state `i`
/// is reachable from `j` when ⟨i|G|j⟩ is nonzero for some generator. Pass
/// Hermitian terms and jump operators as they are; a jump only leads
/// downhill. Returns sorted positions within the generators' space.
pub fn reachable_subspace(generators: &[Operator], seed: &StateVector, threshold: f64) -> Result<Vec<usize>> {
    let n = seed.space.dim();
    for g in generators {
        if !same_space(&g.space, &seed.space) {
            return Err(Error::SpaceMismatch);
        }
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for g in generators {
        for j in 0..n {
            for i in 0..n {
                if i != j && g.matrix[(i, j)].norm() > threshold {
                    adjacency[j].push(i);
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for (i, a) in seed.amplitudes.iter().enumerate() {
        if a.norm() > threshold {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(j) = queue.pop_front() {
        for &i in &adjacency[j] {
            if !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    Ok((0..n).filter(|&i| seen[i]).collect())
}
