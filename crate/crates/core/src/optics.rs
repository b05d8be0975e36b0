//! Optical unitaries and the composite family `W(λ)`.
//!
//! Operator products are written in standard composition order: the
//! leftmost factor acts last on states. The two-qubit family is
//! `W = D₁(α₁)S₁(β₁)·U(λ)V(μ)·D₂(α₂)S₂(β₂)`; the n-qubit family is
//! `W = W₁ₙ W₂ₙ ⋯ Wₙₙ` with `Wⱼₙ = Dⱼ Sⱼ Uⱼ Vⱼ` and `Wₙₙ = Dₙ Sₙ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::connection::Frame;
use crate::error::{Error, Result};
use crate::fock::{annihilator, creator, ModeSpace, Op, DEFAULT_DIM_BUDGET};
use crate::linalg::{self, CMatrix, C64};

/// Hard limit on every complex parameter magnitude unless overridden.
pub const DEFAULT_PARAM_LIMIT: f64 = 2.0;
/// Squeezing strengths above this populate levels near a typical cutoff.
pub const SQUEEZE_WARN: f64 = 1.0;

/// Serialized by name: `single_mode`, `two_qubit` or `n_qubit:N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ModelKind {
    /// One oscillator driven by `D(α)` only.
    SingleMode,
    TwoQubit,
    NQubit(usize),
}

impl ModelKind {
    pub fn n_modes(&self) -> usize {
        match *self {
            ModelKind::SingleMode => 1,
            ModelKind::TwoQubit => 2,
            ModelKind::NQubit(n) => n,
        }
    }

    /// Fiber dimension `m = 2ⁿ`.
    pub fn fiber_dim(&self) -> usize {
        1 << self.n_modes()
    }

    /// Complex parameters in coordinate order.
    pub fn params(&self) -> Vec<Param> {
        match *self {
            ModelKind::SingleMode => vec![Param::new(ParamKind::Alpha, 1)],
            ModelKind::TwoQubit => qubit_chain_params(2),
            ModelKind::NQubit(n) => qubit_chain_params(n),
        }
    }

    pub fn n_complex(&self) -> usize {
        match *self {
            ModelKind::SingleMode => 1,
            ModelKind::TwoQubit => 6,
            ModelKind::NQubit(n) => 4 * n - 2,
        }
    }

    pub fn n_real(&self) -> usize {
        2 * self.n_complex()
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelKind::NQubit(n) if n < 2 => Err(Error::Validation(format!(
                "n_qubit model needs n ≥ 2, got {n}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn coordinate_name(&self, index: usize) -> Result<String> {
        let params = self.params();
        let p = params.get(index / 2).ok_or(Error::InvalidCoordinate {
            index,
            n_real: self.n_real(),
        })?;
        Ok(format!("{}_{}", p, if index % 2 == 0 { "re" } else { "im" }))
    }

    pub fn coordinate_names(&self) -> Vec<String> {
        (0..self.n_real())
            .map(|k| self.coordinate_name(k).expect("index in range"))
            .collect()
    }

    /// Index of a coordinate named like `alpha1_re` or `mu2_im`.
    pub fn coordinate_index(&self, name: &str) -> Result<usize> {
        let unknown = || Error::UnknownCoordinate {
            name: name.to_string(),
            model: self.to_string(),
        };
        let (head, part) = name.rsplit_once('_').ok_or_else(unknown)?;
        let offset = match part {
            "re" => 0,
            "im" => 1,
            _ => return Err(unknown()),
        };
        let digits = head.trim_start_matches(|c: char| c.is_ascii_alphabetic());
        let kind = match &head[..head.len() - digits.len()] {
            "alpha" => ParamKind::Alpha,
            "beta" => ParamKind::Beta,
            "lambda" => ParamKind::Lambda,
            "mu" => ParamKind::Mu,
            _ => return Err(unknown()),
        };
        let j: usize = digits.parse().map_err(|_| unknown())?;
        self.params()
            .iter()
            .position(|p| *p == Param::new(kind, j))
            .map(|k| 2 * k + offset)
            .ok_or_else(unknown)
    }
}

fn qubit_chain_params(n: usize) -> Vec<Param> {
    let mut out = Vec::with_capacity(4 * n - 2);
    for j in 1..n {
        out.push(Param::new(ParamKind::Alpha, j));
        out.push(Param::new(ParamKind::Beta, j));
        out.push(Param::new(ParamKind::Lambda, j));
        out.push(Param::new(ParamKind::Mu, j));
    }
    out.push(Param::new(ParamKind::Alpha, n));
    out.push(Param::new(ParamKind::Beta, n));
    out
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::SingleMode => f.write_str("single_mode"),
            ModelKind::TwoQubit => f.write_str("two_qubit"),
            ModelKind::NQubit(n) => write!(f, "n_qubit:{n}"),
        }
    }
}

impl From<ModelKind> for String {
    fn from(m: ModelKind) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "single_mode" => ModelKind::SingleMode,
            "two_qubit" => ModelKind::TwoQubit,
            _ => {
                let n = s
                    .strip_prefix("n_qubit:")
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| {
                        Error::Validation(format!(
                            "unknown model `{s}` (expected two_qubit, n_qubit:N or single_mode)"
                        ))
                    })?;
                ModelKind::NQubit(n)
            }
        };
        kind.validate()?;
        Ok(kind)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamKind {
    Alpha,
    Beta,
    Lambda,
    Mu,
}

/// One complex parameter, e.g. `β₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Param {
    pub kind: ParamKind,
    pub index: usize,
}

impl Param {
    pub fn new(kind: ParamKind, index: usize) -> Self {
        Self { kind, index }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            ParamKind::Alpha => "alpha",
            ParamKind::Beta => "beta",
            ParamKind::Lambda => "lambda",
            ParamKind::Mu => "mu",
        };
        write!(f, "{name}{}", self.index)
    }
}

/// A point of the parameter manifold, stored as real coordinates
/// `(re, im)` per complex parameter. The origin is the reference point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    model: ModelKind,
    coords: Vec<f64>,
}

impl ParamPoint {
    pub fn origin(model: ModelKind) -> Self {
        Self {
            model,
            coords: vec![0.0; model.n_real()],
        }
    }

    pub fn from_coords(model: ModelKind, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != model.n_real() {
            return Err(Error::DimensionMismatch {
                expected: model.n_real(),
                found: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("non-finite coordinate".into()));
        }
        Ok(Self { model, coords })
    }

    /// Builds a point from `(name, value)` pairs; unnamed coordinates are 0.
    pub fn from_named<'a>(model: ModelKind, named: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let mut p = Self::origin(model);
        for (name, value) in named {
            let k = model.coordinate_index(name)?;
            p.coords[k] = value;
        }
        Ok(p)
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coord(&self, index: usize) -> f64 {
        self.coords[index]
    }

    pub fn complex(&self, k: usize) -> C64 {
        C64::new(self.coords[2 * k], self.coords[2 * k + 1])
    }

    pub fn set(&mut self, index: usize, value: f64) {
        self.coords[index] = value;
    }

    /// `self + t·direction`.
    pub fn offset(&self, direction: &[f64], t: f64) -> Self {
        let coords = self
            .coords
            .iter()
            .zip(direction)
            .map(|(x, d)| x + t * d)
            .collect();
        Self {
            model: self.model,
            coords,
        }
    }

    /// Shift along a single coordinate.
    pub fn shifted(&self, index: usize, delta: f64) -> Self {
        let mut p = self.clone();
        p.coords[index] += delta;
        p
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.model.n_complex())
            .map(|k| self.complex(k).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    Displacement { mode: usize },
    Squeeze { mode: usize },
    BeamSplitter { i: usize, j: usize },
    TwoModeSqueeze { i: usize, j: usize },
}

/// One exponential factor of `W`, driven by complex parameter `param`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Factor {
    pub kind: FactorKind,
    pub param: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    kind: ModelKind,
    space: ModeSpace,
    param_limit: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, cutoff: usize) -> Result<Self> {
        Self::with_budget(kind, cutoff, DEFAULT_DIM_BUDGET)
    }

    pub fn with_budget(kind: ModelKind, cutoff: usize, budget: usize) -> Result<Self> {
        kind.validate()?;
        let space = ModeSpace::with_budget(kind.n_modes(), cutoff, budget)?;
        Ok(Self {
            kind,
            space,
            param_limit: DEFAULT_PARAM_LIMIT,
        })
    }

    pub fn with_param_limit(mut self, limit: f64) -> Self {
        self.param_limit = limit;
        self
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn space(&self) -> ModeSpace {
        self.space
    }

    pub fn cutoff(&self) -> usize {
        self.space.cutoff()
    }

    pub fn n_modes(&self) -> usize {
        self.space.n_modes()
    }

    pub fn fiber_dim(&self) -> usize {
        self.kind.fiber_dim()
    }

    pub fn param_limit(&self) -> f64 {
        self.param_limit
    }

    /// Same model on a different cutoff.
    pub fn at_cutoff(&self, cutoff: usize) -> Result<Self> {
        Ok(Self::new(self.kind, cutoff)?.with_param_limit(self.param_limit))
    }

    /// Factors of `W` in operator order (leftmost first).
    pub fn factors(&self) -> Vec<Factor> {
        let n = self.n_modes();
        self.kind
            .params()
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let kind = match p.kind {
                    ParamKind::Alpha => FactorKind::Displacement { mode: p.index },
                    ParamKind::Beta => FactorKind::Squeeze { mode: p.index },
                    ParamKind::Lambda => FactorKind::BeamSplitter { i: p.index, j: n },
                    ParamKind::Mu => FactorKind::TwoModeSqueeze { i: p.index, j: n },
                };
                Factor { kind, param: k }
            })
            .collect()
    }

    pub fn check_point(&self, point: &ParamPoint) -> Result<()> {
        if point.model() != self.kind {
            return Err(Error::ModelMismatch {
                expected: self.kind.to_string(),
                found: point.model().to_string(),
            });
        }
        let mag = point.max_magnitude();
        if mag > self.param_limit {
            return Err(Error::ParameterBudget {
                magnitude: mag,
                limit: self.param_limit,
            });
        }
        Ok(())
    }

    /// Logs a warning when squeezing parameters leave the well-converged range.
    pub fn warn_if_strong_squeezing(&self, point: &ParamPoint) {
        for (k, p) in self.kind.params().iter().enumerate() {
            if matches!(p.kind, ParamKind::Beta | ParamKind::Mu) && point.complex(k).norm() > SQUEEZE_WARN {
                log::warn!(
                    "|{p}| = {:.3} exceeds {SQUEEZE_WARN}; truncation error grows with squeezing",
                    point.complex(k).norm()
                );
            }
        }
    }
}

/// Raising part `G` of a factor generator `zG − z̄G†`.
pub fn factor_generator(space: ModeSpace, kind: FactorKind) -> Result<Op> {
    match kind {
        FactorKind::Displacement { mode } => creator(space, mode),
        FactorKind::Squeeze { mode } => {
            let ad = creator(space, mode)?;
            Ok(ad.compose(&ad)?.scale(C64::new(0.5, 0.0)))
        }
        FactorKind::BeamSplitter { i, j } => {
            distinct(i, j)?;
            creator(space, i)?.compose(&annihilator(space, j)?)
        }
        FactorKind::TwoModeSqueeze { i, j } => {
            distinct(i, j)?;
            creator(space, i)?.compose(&creator(space, j)?)
        }
    }
}

fn distinct(i: usize, j: usize) -> Result<()> {
    if i == j {
        return Err(Error::Validation(format!(
            "two-mode operator needs distinct modes, got {i} twice"
        )));
    }
    Ok(())
}

/// `zG − z̄G†`, exactly anti-Hermitian because `G†` is the exact adjoint.
pub fn anti_hermitian_combination(g: &Op, z: C64) -> Op {
    g.scale(z)
        .sub(&g.adjoint().scale(z.conj()))
        .expect("same space")
}

/// `exp(X)` for anti-Hermitian `X`: the input is symmetrized to
/// `(X − X†)/2` and exponentiated by Padé scaling and squaring.
pub fn expm_antihermitian(x: &Op) -> Result<Op> {
    let defect = x.anti_hermitian_defect();
    let tol = 1e-10 * x.max_abs().max(1.0);
    if defect > tol {
        return Err(Error::NotAntiHermitian { defect });
    }
    let sym = linalg::anti_hermitian_part(&x.to_dense());
    Op::from_dense(x.space(), linalg::expm(&sym))
}

fn factor_unitary(space: ModeSpace, kind: FactorKind, z: C64) -> Result<Op> {
    let g = factor_generator(space, kind)?;
    if z == C64::new(0.0, 0.0) {
        return Ok(Op::identity(space));
    }
    expm_antihermitian(&anti_hermitian_combination(&g, z))
}

/// Coherent operator `D(α) = exp(αa† − ᾱa)`.
pub fn displacement(space: ModeSpace, mode: usize, alpha: C64) -> Result<Op> {
    factor_unitary(space, FactorKind::Displacement { mode }, alpha)
}

/// Squeezed operator `S(β) = exp(β(a†)²/2 − β̄a²/2)`.
pub fn squeeze(space: ModeSpace, mode: usize, beta: C64) -> Result<Op> {
    factor_unitary(space, FactorKind::Squeeze { mode }, beta)
}

/// su(2) exponential `exp(λaᵢ†aⱼ − λ̄aⱼ†aᵢ)`.
pub fn beam_splitter(space: ModeSpace, i: usize, j: usize, lambda: C64) -> Result<Op> {
    factor_unitary(space, FactorKind::BeamSplitter { i, j }, lambda)
}

/// su(1,1) exponential `exp(μaᵢ†aⱼ† − μ̄aⱼaᵢ)`.
pub fn two_mode_squeeze(space: ModeSpace, i: usize, j: usize, mu: C64) -> Result<Op> {
    factor_unitary(space, FactorKind::TwoModeSqueeze { i, j }, mu)
}

/// Dense `W(λ)` as the ordered product of its factor exponentials.
pub fn composite_w(spec: &ModelSpec, point: &ParamPoint) -> Result<Op> {
    spec.check_point(point)?;
    spec.warn_if_strong_squeezing(point);
    let space = spec.space();
    let mut w: Option<CMatrix> = None;
    for f in spec.factors() {
        let z = point.complex(f.param);
        if z == C64::new(0.0, 0.0) {
            continue;
        }
        let u = factor_unitary(space, f.kind, z)?.into_dense();
        w = Some(match w {
            None => u,
            Some(acc) => linalg::matmul(&acc, &u),
        });
    }
    match w {
        Some(m) => Op::from_dense(space, m),
        None => Ok(Op::identity(space)),
    }
}

/// Basis indices of the qubit states `|0…00⟩, |0…01⟩, …, |1…11⟩` in
/// lexicographic order (mode 1 most significant).
pub fn qubit_basis_indices(space: ModeSpace) -> Vec<usize> {
    let n = space.n_modes();
    (0..1usize << n)
        .map(|bits| {
            let occ: Vec<usize> = (0..n).map(|i| (bits >> (n - 1 - i)) & 1).collect();
            space.index_of(&occ).expect("cutoff ≥ 2 holds qubit levels")
        })
        .collect()
}

/// The degenerate vacuum `(v₁, …, v_m)` as a frame of qubit basis states.
pub fn vacuum_frame(spec: &ModelSpec) -> Frame {
    let space = spec.space();
    let idx = qubit_basis_indices(space);
    let mut m = CMatrix::zeros(space.dim(), idx.len());
    for (col, &row) in idx.iter().enumerate() {
        m[(row, col)] = C64::new(1.0, 0.0);
    }
    Frame::new(space, m).expect("distinct basis columns are orthonormal")
}
