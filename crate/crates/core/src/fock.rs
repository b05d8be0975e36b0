//! Truncated multimode Fock space and the exact bosonic operator algebra.
//!
//! Each mode keeps the levels `0..cutoff`; the creation operator sends the
//! top level out of the space. Basis states are ordered with mode 1 as the
//! most significant digit, so `(n₁, …, n_k)` sits at `Σ nᵢ·cutoff^(k−i)`.
//! Mode numbers in this module are 1-based, matching `a₁, a₂, …`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, ONE, ZERO};
use crate::sparse::SparseMatrix;

pub const DEFAULT_DIM_BUDGET: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeSpace {
    n_modes: usize,
    cutoff: usize,
    dim: usize,
}

impl ModeSpace {
    pub fn new(n_modes: usize, cutoff: usize) -> Result<Self> {
        Self::with_budget(n_modes, cutoff, DEFAULT_DIM_BUDGET)
    }

    pub fn with_budget(n_modes: usize, cutoff: usize, budget: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidSpace("need at least one mode".into()));
        }
        if cutoff < 2 {
            return Err(Error::InvalidSpace(format!(
                "cutoff must be at least 2, got {cutoff}"
            )));
        }
        let dim = u32::try_from(n_modes)
            .ok()
            .and_then(|n| cutoff.checked_pow(n))
            .ok_or(Error::DimensionBudget {
                dim: usize::MAX,
                budget,
            })?;
        if dim > budget {
            return Err(Error::DimensionBudget { dim, budget });
        }
        Ok(Self {
            n_modes,
            cutoff,
            dim,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Place value of a mode's occupation digit.
    fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.n_modes - mode) as u32)
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                found: occupations.len(),
            });
        }
        let mut idx = 0;
        for &n in occupations {
            if n >= self.cutoff {
                return Err(Error::Validation(format!(
                    "occupation {n} is outside the truncated space (cutoff {})",
                    self.cutoff
                )));
            }
            idx = idx * self.cutoff + n;
        }
        Ok(idx)
    }

    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.n_modes];
        for slot in occ.iter_mut().rev() {
            *slot = index % self.cutoff;
            index /= self.cutoff;
        }
        occ
    }

    /// Occupation of one (1-based) mode in the basis state `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.cutoff
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.n_modes {
            return Err(Error::ModeOutOfRange {
                mode,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }
}

impl fmt::Display for ModeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mode(s) × cutoff {} (dim {})", self.n_modes, self.cutoff, self.dim)
    }
}

pub fn make_space(n_modes: usize, cutoff: usize) -> Result<ModeSpace> {
    ModeSpace::new(n_modes, cutoff)
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Sparse(SparseMatrix),
    Dense(CMatrix),
}

/// A square complex matrix over the basis of a [`ModeSpace`].
///
/// Ladder-operator polynomials keep a sparse representation; anything that
/// touches a dense matrix (exponentials, user input) becomes dense. The
/// two are interchangeable everywhere in the public API.
#[derive(Clone, Debug, PartialEq)]
pub struct Op {
    space: ModeSpace,
    repr: Repr,
}

impl Op {
    pub(crate) fn from_sparse(space: ModeSpace, m: SparseMatrix) -> Self {
        debug_assert_eq!(m.dim(), space.dim());
        Self {
            space,
            repr: Repr::Sparse(m),
        }
    }

    pub fn from_dense(space: ModeSpace, m: CMatrix) -> Result<Self> {
        if m.nrows() != space.dim() || m.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(Self {
            space,
            repr: Repr::Dense(m),
        })
    }

    pub fn identity(space: ModeSpace) -> Self {
        Self::from_sparse(space, SparseMatrix::identity(space.dim()))
    }

    pub fn zero(space: ModeSpace) -> Self {
        Self::from_sparse(space, SparseMatrix::zeros(space.dim()))
    }

    pub fn diagonal(space: ModeSpace, diag: impl IntoIterator<Item = C64>) -> Result<Self> {
        let diag: Vec<C64> = diag.into_iter().collect();
        if diag.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: diag.len(),
            });
        }
        Ok(Self::from_sparse(space, SparseMatrix::diagonal(diag)))
    }

    pub fn space(&self) -> ModeSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.repr, Repr::Sparse(_))
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        match &self.repr {
            Repr::Sparse(s) => s.get(row, col),
            Repr::Dense(d) => d[(row, col)],
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match &self.repr {
            Repr::Sparse(s) => s.to_dense(),
            Repr::Dense(d) => d.clone(),
        }
    }

    pub fn into_dense(self) -> CMatrix {
        match self.repr {
            Repr::Sparse(s) => s.to_dense(),
            Repr::Dense(d) => d,
        }
    }

    /// Sparse view, extracting the nonzero pattern from dense storage.
    pub(crate) fn to_sparse(&self) -> SparseMatrix {
        match &self.repr {
            Repr::Sparse(s) => s.clone(),
            Repr::Dense(d) => SparseMatrix::from_dense(d),
        }
    }

    pub fn adjoint(&self) -> Op {
        let repr = match &self.repr {
            Repr::Sparse(s) => Repr::Sparse(s.adjoint()),
            Repr::Dense(d) => Repr::Dense(d.adjoint()),
        };
        Op {
            space: self.space,
            repr,
        }
    }

    fn same_space(&self, other: &Op) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    /// Operator product `self · rhs` (rhs acts first).
    pub fn compose(&self, rhs: &Op) -> Result<Op> {
        self.same_space(rhs)?;
        let repr = match (&self.repr, &rhs.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => Repr::Sparse(a.matmul(b)),
            (Repr::Sparse(a), Repr::Dense(b)) => Repr::Dense(a.mul_dense(b)),
            (Repr::Dense(a), Repr::Sparse(b)) => Repr::Dense(b.dense_mul(a)),
            (Repr::Dense(a), Repr::Dense(b)) => Repr::Dense(linalg::matmul(a, b)),
        };
        Ok(Op {
            space: self.space,
            repr,
        })
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Op, s: C64) -> Result<Op> {
        self.same_space(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => Repr::Sparse(a.add_scaled(b, s)),
            _ => Repr::Dense(self.to_dense() + other.to_dense() * s),
        };
        Ok(Op {
            space: self.space,
            repr,
        })
    }

    pub fn add(&self, other: &Op) -> Result<Op> {
        self.add_scaled(other, ONE)
    }

    pub fn sub(&self, other: &Op) -> Result<Op> {
        self.add_scaled(other, -ONE)
    }

    pub fn scale(&self, s: C64) -> Op {
        let repr = match &self.repr {
            Repr::Sparse(a) => Repr::Sparse(a.scale(s)),
            Repr::Dense(d) => Repr::Dense(d * s),
        };
        Op {
            space: self.space,
            repr,
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.repr {
            Repr::Sparse(s) => s.max_abs(),
            Repr::Dense(d) => linalg::max_abs(d),
        }
    }

    pub fn frobenius(&self) -> f64 {
        match &self.repr {
            Repr::Sparse(s) => s.frobenius(),
            Repr::Dense(d) => linalg::frobenius(d),
        }
    }

    pub fn norm1(&self) -> f64 {
        match &self.repr {
            Repr::Sparse(s) => s.norm1(),
            Repr::Dense(d) => linalg::norm1(d),
        }
    }

    /// `max |X + X†|` entrywise.
    pub fn anti_hermitian_defect(&self) -> f64 {
        match &self.repr {
            Repr::Sparse(s) => s.add_scaled(&s.adjoint(), ONE).max_abs(),
            Repr::Dense(d) => linalg::anti_hermitian_defect(d),
        }
    }

    /// `max |X − X†|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        self.scale(linalg::I).anti_hermitian_defect()
    }

    /// `‖U†U − 1‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.to_dense())
    }

    pub fn is_diagonal(&self) -> bool {
        match &self.repr {
            Repr::Sparse(s) => s.is_diagonal(),
            Repr::Dense(d) => {
                let n = d.nrows();
                (0..n).all(|j| (0..n).all(|i| i == j || d[(i, j)] == ZERO))
            }
        }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.space != self.space {
            return Err(Error::SpaceMismatch);
        }
        let col = DMatrix::from_column_slice(self.dim(), 1, state.amplitudes.as_slice());
        let out = match &self.repr {
            Repr::Sparse(s) => s.mul_dense(&col),
            Repr::Dense(d) => linalg::matmul(d, &col),
        };
        Ok(StateVector {
            space: self.space,
            amplitudes: DVector::from_column_slice(out.as_slice()),
        })
    }

    /// `⟨row|self|col⟩` between basis states given by occupations.
    pub fn element(&self, row: &[usize], col: &[usize]) -> Result<C64> {
        Ok(self.get(self.space.index_of(row)?, self.space.index_of(col)?))
    }
}

/// Amplitudes over the basis of a [`ModeSpace`]. Not normalized unless a
/// constructor says so.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: ModeSpace,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(space: ModeSpace, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { space, amplitudes })
    }

    /// Normalized Fock basis state `|n₁, …, n_k⟩`.
    pub fn basis(space: ModeSpace, occupations: &[usize]) -> Result<Self> {
        let idx = space.index_of(occupations)?;
        let mut amplitudes = DVector::zeros(space.dim());
        amplitudes[idx] = ONE;
        Ok(Self { space, amplitudes })
    }

    pub fn space(&self) -> ModeSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<C64> {
        Ok(self.amplitudes[self.space.index_of(occupations)?])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// `aᵢ`: `a|n⟩ = √n |n−1⟩` on mode `mode`, identity elsewhere.
pub fn annihilator(space: ModeSpace, mode: usize) -> Result<Op> {
    space.check_mode(mode)?;
    let stride = space.stride(mode);
    let triplets = (0..space.dim()).filter_map(|idx| {
        let n = space.occupation(idx, mode);
        (n > 0).then(|| (idx - stride, idx, C64::new((n as f64).sqrt(), 0.0)))
    });
    Ok(Op::from_sparse(
        space,
        SparseMatrix::from_triplets(space.dim(), triplets),
    ))
}

/// `aᵢ†`, the exact adjoint of [`annihilator`]; the top level maps to zero.
pub fn creator(space: ModeSpace, mode: usize) -> Result<Op> {
    Ok(annihilator(space, mode)?.adjoint())
}

/// `Nᵢ = aᵢ†aᵢ`, diagonal with integer entries.
pub fn number_op(space: ModeSpace, mode: usize) -> Result<Op> {
    space.check_mode(mode)?;
    Op::diagonal(
        space,
        (0..space.dim()).map(|idx| C64::new(space.occupation(idx, mode) as f64, 0.0)),
    )
}

/// `xy − yx`.
pub fn commutator(x: &Op, y: &Op) -> Result<Op> {
    x.compose(y)?.sub(&y.compose(x)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algebra {
    /// `u(n)`: `E_ij = aᵢ†aⱼ`.
    Un,
    /// `u(n−1,1)` with the last mode as the distinguished one:
    /// `E_in = aᵢ†a_n†`, `E_ni = a_n aᵢ`, `E_nn = a_n†a_n + 1`.
    Un11,
}

/// Boson-represented Weyl generator `E_ij` (1-based indices).
pub fn weyl_generator(space: ModeSpace, i: usize, j: usize, algebra: Algebra) -> Result<Op> {
    space.check_mode(i)?;
    space.check_mode(j)?;
    let n = space.n_modes();
    let ad = |k| creator(space, k);
    let a = |k| annihilator(space, k);
    match algebra {
        Algebra::Un => ad(i)?.compose(&a(j)?),
        Algebra::Un11 => match (i == n, j == n) {
            (false, false) => ad(i)?.compose(&a(j)?),
            (false, true) => ad(i)?.compose(&ad(n)?),
            (true, false) => a(n)?.compose(&a(j)?),
            (true, true) => number_op(space, n)?.add(&Op::identity(space)),
        },
    }
}

/// Metric `η = diag(1, …, 1, ∓1)` entry for the chosen algebra.
pub fn algebra_metric(algebra: Algebra, n_modes: usize, i: usize, j: usize) -> f64 {
    if i != j {
        return 0.0;
    }
    match algebra {
        Algebra::Un11 if i == n_modes => -1.0,
        _ => 1.0,
    }
}

/// Projector onto the basis states selected by `keep(occupations)`.
pub fn occupation_projector(space: ModeSpace, keep: impl Fn(&[usize]) -> bool) -> Op {
    let diag = (0..space.dim()).map(|idx| {
        if keep(&space.occupations(idx)) {
            ONE
        } else {
            ZERO
        }
    });
    Op::diagonal(space, diag).expect("diagonal length equals dim")
}

/// Projector onto states with every occupation `≤ cutoff − 1 − margin`.
pub fn protected_projector(space: ModeSpace, margin: usize) -> Result<Op> {
    if margin >= space.cutoff() {
        return Err(Error::Validation(format!(
            "protection margin {margin} must be below the cutoff {}",
            space.cutoff()
        )));
    }
    let top = space.cutoff() - 1 - margin;
    Ok(occupation_projector(space, |occ| occ.iter().all(|&n| n <= top)))
}

/// Projector onto states with total occupation `≤ max_total`.
pub fn total_occupation_projector(space: ModeSpace, max_total: usize) -> Op {
    occupation_projector(space, |occ| occ.iter().sum::<usize>() <= max_total)
}

/// Schwinger su(2) generators `(J₊, J₋, J₃)` on modes `(i, j)`.
pub fn schwinger_su2(space: ModeSpace, i: usize, j: usize) -> Result<[Op; 3]> {
    let jp = creator(space, i)?.compose(&annihilator(space, j)?)?;
    let jm = creator(space, j)?.compose(&annihilator(space, i)?)?;
    let j3 = number_op(space, i)?
        .sub(&number_op(space, j)?)?
        .scale(C64::new(0.5, 0.0));
    Ok([jp, jm, j3])
}

/// Schwinger su(1,1) generators `(K₊, K₋, K₃)` on modes `(i, j)`.
pub fn schwinger_su11(space: ModeSpace, i: usize, j: usize) -> Result<[Op; 3]> {
    let kp = creator(space, i)?.compose(&creator(space, j)?)?;
    let km = annihilator(space, j)?.compose(&annihilator(space, i)?)?;
    let k3 = number_op(space, i)?
        .add(&number_op(space, j)?)?
        .add(&Op::identity(space))?
        .scale(C64::new(0.5, 0.0));
    Ok([kp, km, k3])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_dimensions_and_indexing() {
        assert_eq!(make_space(1, 16).unwrap().dim(), 16);
        assert_eq!(make_space(2, 8).unwrap().dim(), 64);
        let s = make_space(3, 4).unwrap();
        assert_eq!(s.dim(), 64);
        assert_eq!(s.index_of(&[1, 2, 3]).unwrap(), 27);
        assert_eq!(s.occupations(27), vec![1, 2, 3]);
    }

    #[test]
    fn space_rejects_bad_shapes() {
        assert!(matches!(make_space(0, 4), Err(Error::InvalidSpace(_))));
        assert!(matches!(make_space(2, 1), Err(Error::InvalidSpace(_))));
        match make_space(4, 16) {
            Err(Error::DimensionBudget { dim, budget }) => {
                assert_eq!(dim, 65536);
                assert_eq!(budget, DEFAULT_DIM_BUDGET);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        assert!(ModeSpace::with_budget(4, 16, 70_000).is_ok());
    }

    #[test]
    fn annihilator_actions() {
        let s = make_space(1, 8).unwrap();
        let a = annihilator(s, 1).unwrap();
        let one = a.apply(&StateVector::basis(s, &[1]).unwrap()).unwrap();
        assert_eq!(one.amplitude(&[0]).unwrap(), ONE);
        let vac = a.apply(&StateVector::basis(s, &[0]).unwrap()).unwrap();
        assert_eq!(vac.norm(), 0.0);
        let four = a.apply(&StateVector::basis(s, &[4]).unwrap()).unwrap();
        assert_eq!(four.amplitude(&[3]).unwrap(), C64::new(2.0, 0.0));
    }

    #[test]
    fn creator_actions_and_boundary() {
        let s = make_space(1, 6).unwrap();
        let ad = creator(s, 1).unwrap();
        let up = ad.apply(&StateVector::basis(s, &[0]).unwrap()).unwrap();
        assert_eq!(up.amplitude(&[1]).unwrap(), ONE);
        let three = ad.apply(&StateVector::basis(s, &[3]).unwrap()).unwrap();
        assert_eq!(three.amplitude(&[4]).unwrap(), C64::new(2.0, 0.0));
        let top = ad.apply(&StateVector::basis(s, &[5]).unwrap()).unwrap();
        assert_eq!(top.norm(), 0.0);
    }

    #[test]
    fn creator_is_exact_adjoint() {
        let s = make_space(3, 4).unwrap();
        for m in 1..=3 {
            let a = annihilator(s, m).unwrap().to_dense();
            let ad = creator(s, m).unwrap().to_dense();
            assert_eq!(ad, a.adjoint());
        }
    }

    #[test]
    fn number_operator_diagonal() {
        let s = make_space(1, 8).unwrap();
        let n = number_op(s, 1).unwrap();
        assert_eq!(n.element(&[3], &[3]).unwrap(), C64::new(3.0, 0.0));
        assert_eq!(n.element(&[0], &[0]).unwrap(), ZERO);
        let s2 = make_space(2, 4).unwrap();
        let n2 = number_op(s2, 2).unwrap();
        assert_eq!(n2.element(&[1, 2], &[1, 2]).unwrap(), C64::new(2.0, 0.0));
    }

    #[test]
    fn number_equals_creator_annihilator_to_rounding() {
        let s = make_space(2, 16).unwrap();
        for m in 1..=2 {
            let prod = creator(s, m).unwrap().compose(&annihilator(s, m).unwrap()).unwrap();
            let d = prod.sub(&number_op(s, m).unwrap()).unwrap();
            // sqrt(n)·sqrt(n) differs from n by at most a few ulps
            assert!(d.max_abs() <= 16.0 * f64::EPSILON * 16.0);
            assert!(prod.is_diagonal());
        }
    }

    #[test]
    fn mode_range_errors() {
        let s = make_space(2, 4).unwrap();
        assert!(matches!(annihilator(s, 0), Err(Error::ModeOutOfRange { .. })));
        assert!(matches!(creator(s, 3), Err(Error::ModeOutOfRange { .. })));
        assert!(matches!(number_op(s, 3), Err(Error::ModeOutOfRange { .. })));
        assert!(weyl_generator(s, 1, 3, Algebra::Un).is_err());
    }

    #[test]
    fn commutator_space_mismatch() {
        let a = annihilator(make_space(1, 4).unwrap(), 1).unwrap();
        let b = annihilator(make_space(1, 5).unwrap(), 1).unwrap();
        assert!(matches!(commutator(&a, &b), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn single_mode_relations_on_protected_levels() {
        let s = make_space(1, 16).unwrap();
        let p = protected_projector(s, 1).unwrap();
        let a = annihilator(s, 1).unwrap();
        let ad = creator(s, 1).unwrap();
        let n = number_op(s, 1).unwrap();
        let sandwich = |x: Op| p.compose(&x).unwrap().compose(&p).unwrap();
        let caa = commutator(&a, &ad).unwrap().sub(&Op::identity(s)).unwrap();
        assert!(sandwich(caa).max_abs() <= 1e-12);
        let cna = commutator(&n, &ad).unwrap().sub(&ad).unwrap();
        assert!(sandwich(cna).max_abs() <= 1e-12);
        let cnm = commutator(&n, &a).unwrap().add(&a).unwrap();
        assert!(sandwich(cnm).max_abs() <= 1e-12);
        // without protection the top level breaks [a, a†] = 1
        let raw = commutator(&a, &ad).unwrap().sub(&Op::identity(s)).unwrap();
        assert!(raw.max_abs() > 1.0);
    }

    #[test]
    fn weyl_generators_match_schwinger() {
        let s = make_space(2, 6).unwrap();
        let [jp, _, _] = schwinger_su2(s, 1, 2).unwrap();
        assert_eq!(weyl_generator(s, 1, 2, Algebra::Un).unwrap(), jp);
        let [kp, km, _] = schwinger_su11(s, 1, 2).unwrap();
        assert_eq!(weyl_generator(s, 1, 2, Algebra::Un11).unwrap(), kp);
        assert_eq!(weyl_generator(s, 2, 1, Algebra::Un11).unwrap(), km);
        let enn = weyl_generator(s, 2, 2, Algebra::Un11).unwrap();
        let want = number_op(s, 2).unwrap().add(&Op::identity(s)).unwrap();
        assert_eq!(enn, want);
    }

    #[test]
    fn protected_projector_examples() {
        let s = make_space(2, 4).unwrap();
        assert_eq!(protected_projector(s, 0).unwrap(), Op::identity(s));
        let one = make_space(1, 4).unwrap();
        let p = protected_projector(one, 1).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| p.get(k, k).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, 1.0, 0.0]);
        let vac = protected_projector(s, 3).unwrap();
        assert_eq!(vac.frobenius(), 1.0);
        assert_eq!(vac.element(&[0, 0], &[0, 0]).unwrap(), ONE);
        assert!(protected_projector(s, 4).is_err());
    }
}
