//! Kerr reference Hamiltonian, the degenerate vacuum frame, the isospectral
//! family and the canonical connection `A = ⟨vac|W⁻¹dW|vac⟩` with its
//! curvature `F = dA + A∧A`.
//!
//! Components are indexed by real coordinates of the parameter manifold:
//! `A_μ` is the coefficient of `dμ`, and `F_{μν} = ∂_μA_ν − ∂_νA_μ + [A_μ, A_ν]`.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::action::Generator;
use crate::error::{Error, Result};
use crate::fock::{ModeSpace, Op};
use crate::linalg::{self, CMatrix, C64, I, ONE};
use crate::optics::{
    anti_hermitian_combination, composite_w, expm_antihermitian, factor_generator, qubit_basis_indices,
    vacuum_frame, Factor, ModelSpec, ParamPoint,
};

/// Default step for finite differences of the connection.
pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Eigenvalues below this count as zero on the integer Kerr spectrum.
pub const KERNEL_TOL: f64 = 1e-9;

/// `m` orthonormal columns in the truncated Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    space: ModeSpace,
    columns: CMatrix,
}

impl Frame {
    pub fn new(space: ModeSpace, columns: CMatrix) -> Result<Self> {
        if columns.nrows() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: columns.nrows(),
            });
        }
        let defect = linalg::unitarity_defect(&columns);
        if defect > 1e-12 {
            return Err(Error::Validation(format!(
                "frame columns are not orthonormal (‖V†V − 1‖ = {defect:.3e})"
            )));
        }
        Ok(Self { space, columns })
    }

    pub fn space(&self) -> ModeSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.columns
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    /// The frame `V·g` for a constant unitary `g`.
    pub fn rotated(&self, g: &CMatrix) -> Result<Frame> {
        if g.nrows() != self.rank() || g.ncols() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: g.nrows(),
            });
        }
        let defect = linalg::unitarity_defect(g);
        if defect > 1e-10 {
            return Err(Error::Validation(format!("gauge matrix is not unitary ({defect:.3e})")));
        }
        Frame::new(self.space, linalg::matmul(&self.columns, g))
    }
}

/// Rank-`m` orthogonal projector.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    space: ModeSpace,
    matrix: CMatrix,
}

impl Projector {
    pub fn from_frame_columns(space: ModeSpace, columns: &CMatrix) -> Self {
        Self {
            space,
            matrix: linalg::matmul(columns, &columns.adjoint()),
        }
    }

    pub fn space(&self) -> ModeSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `max |X² − X|`.
    pub fn idempotency_defect(&self) -> f64 {
        linalg::max_abs(&(linalg::matmul(&self.matrix, &self.matrix) - &self.matrix))
    }

    /// `max |X − X†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        linalg::max_abs(&(&self.matrix - self.matrix.adjoint()))
    }
}

/// `F_{j}⋯F_K·V` for the trailing factors `j ≥ end`, evaluated once.
#[derive(Clone, Debug)]
pub(crate) struct FrozenTail {
    end: usize,
    block: CMatrix,
}

/// `A_μ` for every real coordinate at one point.
#[derive(Clone, Debug, Serialize)]
pub struct ConnectionSample {
    pub point: ParamPoint,
    #[serde(skip)]
    pub components: Vec<CMatrix>,
}

impl ConnectionSample {
    pub fn component(&self, mu: usize) -> &CMatrix {
        &self.components[mu]
    }

    /// `Σ_μ A_μ d^μ`.
    pub fn contract(&self, direction: &[f64]) -> CMatrix {
        let m = self.components[0].nrows();
        let mut out = CMatrix::zeros(m, m);
        for (a, &d) in self.components.iter().zip(direction) {
            if d != 0.0 {
                out += a * C64::from(d);
            }
        }
        out
    }

    pub fn max_anti_hermitian_defect(&self) -> f64 {
        self.components
            .iter()
            .map(linalg::anti_hermitian_defect)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct CurvatureSample {
    pub point: ParamPoint,
    pub mu: usize,
    pub nu: usize,
    pub value: CMatrix,
}

/// `H₀ = Σᵢ Nᵢ(Nᵢ − 1)` with `ħ = X = 1`.
pub fn kerr_hamiltonian(spec: &ModelSpec) -> Op {
    let space = spec.space();
    let diag = (0..space.dim()).map(|idx| {
        let e: usize = space.occupations(idx).iter().map(|&n| n * n.saturating_sub(1)).sum();
        C64::new(e as f64, 0.0)
    });
    Op::diagonal(space, diag).expect("diagonal length equals dim")
}

/// Orthonormal frame of the eigenvalue-0 eigenspace of `h0`, ordered to
/// follow the qubit basis `|0…0⟩, …, |1…1⟩`.
pub fn degenerate_kernel(h0: &Op, tol: f64) -> Result<Frame> {
    let space = h0.space();
    let expected = 1usize << space.n_modes();
    let columns = if h0.is_diagonal() {
        let idx: Vec<usize> = (0..space.dim()).filter(|&k| h0.get(k, k).norm() < tol).collect();
        if idx.len() != expected {
            return Err(Error::KernelDimension {
                found: idx.len(),
                expected,
            });
        }
        let mut m = CMatrix::zeros(space.dim(), expected);
        for (c, &r) in idx.iter().enumerate() {
            m[(r, c)] = ONE;
        }
        m
    } else {
        let defect = h0.hermitian_defect();
        if defect > 1e-10 {
            return Err(Error::Validation(format!(
                "kernel extraction needs a Hermitian operator (defect {defect:.3e})"
            )));
        }
        let eig = SymmetricEigen::new(h0.to_dense());
        let keep: Vec<usize> = (0..space.dim())
            .filter(|&k| eig.eigenvalues[k].abs() < tol)
            .collect();
        if keep.len() != expected {
            return Err(Error::KernelDimension {
                found: keep.len(),
                expected,
            });
        }
        let kernel = eig.eigenvectors.select_columns(&keep);
        align_to_qubit_basis(space, &kernel)
    };
    Frame::new(space, columns)
}

/// Gram–Schmidt on the kernel projections of the qubit basis states, so a
/// kernel spanned by those states comes back as exactly those states.
fn align_to_qubit_basis(space: ModeSpace, kernel: &CMatrix) -> CMatrix {
    let m = kernel.ncols();
    let mut out: Vec<nalgebra::DVector<C64>> = Vec::with_capacity(m);
    let mut seeds: Vec<nalgebra::DVector<C64>> = qubit_basis_indices(space)
        .into_iter()
        .map(|r| kernel.row(r).adjoint())
        .map(|coeffs| kernel * coeffs)
        .collect();
    // any remaining kernel directions
    seeds.extend(kernel.column_iter().map(|c| c.into_owned()));
    for mut v in seeds {
        if out.len() == m {
            break;
        }
        for _ in 0..2 {
            for u in &out {
                let c = u.dotc(&v);
                v -= u * c;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            out.push(v / C64::from(n));
        }
    }
    CMatrix::from_columns(&out)
}

/// `H_λ = W H₀ W†`. The truncated `W` is exactly unitary, so the spectrum
/// of `H_λ` is that of `H₀`; truncation shows up in eigenvectors near the
/// top levels rather than in eigenvalues.
pub fn isospectral_hamiltonian(spec: &ModelSpec, point: &ParamPoint) -> Result<Op> {
    let w = composite_w(spec, point)?;
    let h0 = kerr_hamiltonian(spec);
    w.compose(&h0)?.compose(&w.adjoint())
}

/// `P(λ) = W V V† W†`.
pub fn projector_at(spec: &ModelSpec, point: &ParamPoint) -> Result<Projector> {
    let field = ConnectionField::new(spec)?;
    let t = field.transported_frame(point)?;
    Ok(Projector::from_frame_columns(spec.space(), &t))
}

/// Dense `(exp X, ∂exp(X)[E])` from the upper blocks of
/// `exp([[X, E], [0, X]])`.
pub fn expm_frechet(x: &CMatrix, e: &CMatrix) -> (CMatrix, CMatrix) {
    let n = x.nrows();
    let mut aug = CMatrix::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(x);
    aug.view_mut((n, n), (n, n)).copy_from(x);
    aug.view_mut((0, n), (n, n)).copy_from(e);
    let ex = linalg::expm(&aug);
    (ex.view((0, 0), (n, n)).into_owned(), ex.view((0, n), (n, n)).into_owned())
}

/// Generator direction of real coordinate `coord` within its factor:
/// `∂X/∂Re z = G − G†`, `∂X/∂Im z = i(G + G†)`, i.e. `wG − w̄G†` with
/// `w = 1` or `w = i`.
fn coordinate_direction(coord: usize) -> C64 {
    if coord % 2 == 0 {
        ONE
    } else {
        I
    }
}

/// Dense `∂W/∂μ` by the product rule, each factor differentiated exactly
/// through [`expm_frechet`].
pub fn w_partial(spec: &ModelSpec, point: &ParamPoint, coord: usize) -> Result<Op> {
    spec.check_point(point)?;
    let n_real = spec.kind().n_real();
    if coord >= n_real {
        return Err(Error::InvalidCoordinate { index: coord, n_real });
    }
    let space = spec.space();
    let target = coord / 2;
    let mut acc: Option<CMatrix> = None;
    for f in spec.factors() {
        let z = point.complex(f.param);
        let factor = if f.param == target {
            let g = factor_generator(space, f.kind)?;
            let x = anti_hermitian_combination(&g, z).into_dense();
            let e = anti_hermitian_combination(&g, coordinate_direction(coord)).into_dense();
            expm_frechet(&x, &e).1
        } else if z == C64::new(0.0, 0.0) {
            continue;
        } else {
            let g = factor_generator(space, f.kind)?;
            expm_antihermitian(&anti_hermitian_combination(&g, z))?.into_dense()
        };
        acc = Some(match acc {
            None => factor,
            Some(a) => linalg::matmul(&a, &factor),
        });
    }
    Op::from_dense(space, acc.expect("the differentiated factor is always present"))
}

/// Connection of a model with a fixed frame, evaluated through the action
/// of each factor on the frame columns.
///
/// With `W = F₁⋯F_K` and `R_k = F_{k+1}⋯F_K V`, a coordinate of factor `k`
/// contributes `A_μ = (F_k R_k)† (∂_μF_k R_k)`. Nothing of size `dim × dim`
/// is ever formed.
#[derive(Clone, Debug)]
pub struct ConnectionField {
    spec: ModelSpec,
    frame: Frame,
    factors: Vec<(Factor, Generator)>,
}

impl ConnectionField {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        Self::with_frame(spec, vacuum_frame(spec))
    }

    pub fn with_frame(spec: &ModelSpec, frame: Frame) -> Result<Self> {
        if frame.space() != spec.space() {
            return Err(Error::SpaceMismatch);
        }
        let factors = spec
            .factors()
            .into_iter()
            .map(|f| Ok((f, Generator::new(factor_generator(spec.space(), f.kind)?.to_sparse()))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: *spec,
            frame,
            factors,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn fiber_dim(&self) -> usize {
        self.frame.rank()
    }

    fn check_coord(&self, coord: usize) -> Result<()> {
        let n_real = self.spec.kind().n_real();
        if coord >= n_real {
            return Err(Error::InvalidCoordinate { index: coord, n_real });
        }
        Ok(())
    }

    /// `W(λ)·b`.
    pub fn apply_w(&self, point: &ParamPoint, b: &CMatrix) -> Result<CMatrix> {
        self.spec.check_point(point)?;
        let mut r = b.clone();
        for (f, gen) in self.factors.iter().rev() {
            r = gen.exp_action(point.complex(f.param), &r)?;
        }
        Ok(r)
    }

    /// `W(λ)·V`.
    pub fn transported_frame(&self, point: &ParamPoint) -> Result<CMatrix> {
        self.apply_w(point, self.frame.matrix())
    }

    /// Dense `W(λ)`, built column by column from the factor actions.
    pub fn w_matrix(&self, point: &ParamPoint) -> Result<CMatrix> {
        let d = self.spec.space().dim();
        self.apply_w(point, &CMatrix::identity(d, d))
    }

    /// `∂_μW · V` by the product rule over the factor actions.
    pub fn frame_derivative(&self, point: &ParamPoint, coord: usize) -> Result<CMatrix> {
        self.spec.check_point(point)?;
        self.check_coord(coord)?;
        let target = coord / 2;
        let mut r = self.frame.matrix().clone();
        let mut derivative: Option<CMatrix> = None;
        for (f, gen) in self.factors.iter().rev() {
            let z = point.complex(f.param);
            if let Some(t) = derivative.as_mut() {
                *t = gen.exp_action(z, t)?;
            } else if f.param == target {
                let (_, mut ders) = gen.exp_action_with_derivatives(z, &[coordinate_direction(coord)], &r)?;
                derivative = ders.pop();
            } else {
                r = gen.exp_action(z, &r)?;
            }
        }
        Ok(derivative.expect("target factor visited"))
    }

    /// All components `A_μ` at a point.
    pub fn connection_at(&self, point: &ParamPoint) -> Result<ConnectionSample> {
        self.spec.check_point(point)?;
        let n_real = self.spec.kind().n_real();
        let m = self.fiber_dim();
        let mut components = vec![CMatrix::zeros(m, m); n_real];
        let mut r = self.frame.matrix().clone();
        for (f, gen) in self.factors.iter().rev() {
            let z = point.complex(f.param);
            let (s, ders) = gen.exp_action_with_derivatives(z, &[ONE, I], &r)?;
            let sd = s.adjoint();
            components[2 * f.param] = linalg::matmul(&sd, &ders[0]);
            components[2 * f.param + 1] = linalg::matmul(&sd, &ders[1]);
            r = s;
        }
        Ok(ConnectionSample {
            point: point.clone(),
            components,
        })
    }

    /// `Σ_μ A_μ d^μ` at a point. Only factors the direction touches are
    /// differentiated, and factors to the left of the last of them cancel
    /// in `W†∂W`, so they are never applied.
    pub fn connection_along(&self, point: &ParamPoint, direction: &[f64]) -> Result<CMatrix> {
        self.along(point, direction, self.factors.len(), self.frame.matrix())
    }

    /// Pre-applies the trailing factors whose parameters are fixed
    /// (`varying[k]` false for complex parameter `k`) at `point`. Valid for
    /// every point that agrees with `point` on those parameters.
    pub(crate) fn frozen_tail(&self, point: &ParamPoint, varying: &[bool]) -> Result<FrozenTail> {
        self.spec.check_point(point)?;
        let end = self
            .factors
            .iter()
            .rposition(|(f, _)| varying[f.param])
            .map_or(0, |k| k + 1);
        let mut block = self.frame.matrix().clone();
        for (f, gen) in self.factors[end..].iter().rev() {
            block = gen.exp_action(point.complex(f.param), &block)?;
        }
        Ok(FrozenTail { end, block })
    }

    /// [`Self::connection_along`] starting from a frozen tail.
    pub(crate) fn connection_along_from(&self, tail: &FrozenTail, point: &ParamPoint, direction: &[f64]) -> Result<CMatrix> {
        self.along(point, direction, tail.end, &tail.block)
    }

    fn along(&self, point: &ParamPoint, direction: &[f64], end: usize, start_block: &CMatrix) -> Result<CMatrix> {
        self.spec.check_point(point)?;
        if direction.len() != self.spec.kind().n_real() {
            return Err(Error::DimensionMismatch {
                expected: self.spec.kind().n_real(),
                found: direction.len(),
            });
        }
        let m = self.fiber_dim();
        let mut acc = CMatrix::zeros(m, m);
        let touched = |f: &Factor| direction[2 * f.param] != 0.0 || direction[2 * f.param + 1] != 0.0;
        let Some(first) = self.factors.iter().position(|(f, _)| touched(f)) else {
            return Ok(acc);
        };
        if self.factors[end..].iter().any(|(f, _)| touched(f)) {
            return Err(Error::Validation("direction moves a frozen parameter".into()));
        }
        let mut r = start_block.clone();
        for (f, gen) in self.factors[first..end].iter().rev() {
            let z = point.complex(f.param);
            let w = C64::new(direction[2 * f.param], direction[2 * f.param + 1]);
            if w == C64::new(0.0, 0.0) {
                r = gen.exp_action(z, &r)?;
                continue;
            }
            let (s, ders) = gen.exp_action_with_derivatives(z, &[w], &r)?;
            acc += linalg::matmul(&s.adjoint(), &ders[0]);
            r = s;
        }
        Ok(acc)
    }

    fn unit(&self, coord: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.spec.kind().n_real()];
        e[coord] = 1.0;
        e
    }

    /// `∂_μ A_ν` by central differences with one Richardson level.
    fn connection_derivative(&self, point: &ParamPoint, mu: usize, nu: usize, step: f64) -> Result<CMatrix> {
        let e_nu = self.unit(nu);
        let central = |h: f64| -> Result<CMatrix> {
            let plus = self.connection_along(&point.shifted(mu, h), &e_nu)?;
            let minus = self.connection_along(&point.shifted(mu, -h), &e_nu)?;
            Ok((plus - minus) / C64::from(2.0 * h))
        };
        let coarse = central(step)?;
        let fine = central(step / 2.0)?;
        Ok((fine * C64::from(4.0) - coarse) / C64::from(3.0))
    }

    /// `F_{μν} = ∂_μA_ν − ∂_νA_μ + [A_μ, A_ν]`.
    pub fn curvature_at(&self, point: &ParamPoint, mu: usize, nu: usize, step: f64) -> Result<CurvatureSample> {
        self.check_coord(mu)?;
        self.check_coord(nu)?;
        if mu == nu {
            return Err(Error::DegeneratePair(mu));
        }
        if !(step > 0.0) {
            return Err(Error::Validation(format!("finite-difference step must be positive, got {step}")));
        }
        self.spec.check_point(point)?;
        let d_mu_a_nu = self.connection_derivative(point, mu, nu, step)?;
        let d_nu_a_mu = self.connection_derivative(point, nu, mu, step)?;
        let a_mu = self.connection_along(point, &self.unit(mu))?;
        let a_nu = self.connection_along(point, &self.unit(nu))?;
        let value = d_mu_a_nu - d_nu_a_mu + linalg::commutator(&a_mu, &a_nu);
        Ok(CurvatureSample {
            point: point.clone(),
            mu,
            nu,
            value,
        })
    }
}

pub fn connection_at(spec: &ModelSpec, point: &ParamPoint) -> Result<ConnectionSample> {
    ConnectionField::new(spec)?.connection_at(point)
}

pub fn curvature_at(spec: &ModelSpec, point: &ParamPoint, mu: usize, nu: usize, step: f64) -> Result<CurvatureSample> {
    ConnectionField::new(spec)?.curvature_at(point, mu, nu, step)
}
