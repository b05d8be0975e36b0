//! Loops in parameter space and their path-ordered holonomies.
//!
//! Ordering convention: the loop is cut into pieces with increments
//! `X_k = A(λ_k)[Δλ_k]` (midpoint rule) and
//!
//! ```text
//! Γ = exp(X₁)·exp(X₂)···exp(X_N)
//! ```
//!
//! so later pieces multiply on the right. This is the solution of
//! `U′ = U·A[γ′]`, `U(0) = 1`, and it is the ordering for which a small
//! plaquette gives `Γ ≈ 1 + ε²F` with `F = dA + A∧A`. Reversal still
//! inverts the gate, and concatenation reads `Γ(γ₂∘γ₁) = Γ(γ₁)Γ(γ₂)`.

use std::f64::consts::TAU;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::ConnectionField;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::optics::{ModelKind, ModelSpec, ParamPoint};

/// Closure and continuity tolerance on loop endpoints.
pub const CLOSURE_TOL: f64 = 1e-12;
pub const MIN_SEGMENTS: usize = 8;
// Arc samples used when checking the parameter budget along a loop.
const ARC_BUDGET_SAMPLES: usize = 512;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Line {
        from: Vec<f64>,
        to: Vec<f64>,
    },
    /// `center + radius·(cos θ e_p + sin θ e_q)` for θ from `start_angle`
    /// to `end_angle`, with `plane = (p, q)`.
    Arc {
        center: Vec<f64>,
        radius: f64,
        plane: (usize, usize),
        start_angle: f64,
        end_angle: f64,
    },
}

impl Segment {
    fn dim(&self) -> usize {
        match self {
            Segment::Line { from, .. } => from.len(),
            Segment::Arc { center, .. } => center.len(),
        }
    }

    /// Point at parameter `t ∈ [0, 1]`.
    pub fn point(&self, t: f64) -> Vec<f64> {
        match self {
            Segment::Line { from, to } => from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect(),
            Segment::Arc {
                center,
                radius,
                plane: (p, q),
                start_angle,
                end_angle,
            } => {
                let th = start_angle + t * (end_angle - start_angle);
                let mut x = center.clone();
                x[*p] += radius * th.cos();
                x[*q] += radius * th.sin();
                x
            }
        }
    }

    /// `dγ/dt` at parameter `t`.
    pub fn tangent(&self, t: f64) -> Vec<f64> {
        match self {
            Segment::Line { from, to } => from.iter().zip(to).map(|(a, b)| b - a).collect(),
            Segment::Arc {
                center,
                radius,
                plane: (p, q),
                start_angle,
                end_angle,
            } => {
                let sweep = end_angle - start_angle;
                let th = start_angle + t * sweep;
                let mut d = vec![0.0; center.len()];
                d[*p] = -radius * sweep * th.sin();
                d[*q] = radius * sweep * th.cos();
                d
            }
        }
    }

    pub fn start(&self) -> Vec<f64> {
        self.point(0.0)
    }

    pub fn end(&self) -> Vec<f64> {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        match self {
            Segment::Line { from, to } => distance(from, to),
            Segment::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => radius.abs() * (end_angle - start_angle).abs(),
        }
    }

    pub fn reversed(&self) -> Segment {
        match self.clone() {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc {
                center,
                radius,
                plane,
                start_angle,
                end_angle,
            } => Segment::Arc {
                center,
                radius,
                plane,
                start_angle: end_angle,
                end_angle: start_angle,
            },
        }
    }

    fn validate(&self, n_real: usize) -> Result<()> {
        if self.dim() != n_real {
            return Err(Error::DimensionMismatch {
                expected: n_real,
                found: self.dim(),
            });
        }
        let finite = match self {
            Segment::Line { from, to } => from.iter().chain(to).all(|x| x.is_finite()),
            Segment::Arc {
                center,
                radius,
                plane: (p, q),
                start_angle,
                end_angle,
            } => {
                if p == q || *p >= n_real || *q >= n_real {
                    return Err(Error::Validation(format!(
                        "arc plane ({p}, {q}) must name two distinct coordinates below {n_real}"
                    )));
                }
                if *radius < 0.0 {
                    return Err(Error::Validation(format!("arc radius must be non-negative, got {radius}")));
                }
                center.iter().all(|x| x.is_finite())
                    && radius.is_finite()
                    && start_angle.is_finite()
                    && end_angle.is_finite()
            }
        };
        if !finite {
            return Err(Error::Validation("non-finite loop coordinate".into()));
        }
        Ok(())
    }

    /// Largest complex-parameter magnitude reached on the segment.
    fn max_magnitude(&self, model: ModelKind) -> f64 {
        let mag = |x: &[f64]| {
            x.chunks(2)
                .map(|c| c[0].hypot(c[1]))
                .fold(0.0, f64::max)
        };
        match self {
            // |z(t)| is convex along a line
            Segment::Line { from, to } => mag(from).max(mag(to)),
            Segment::Arc { .. } => {
                debug_assert_eq!(self.dim(), model.n_real());
                (0..=ARC_BUDGET_SAMPLES)
                    .map(|k| mag(&self.point(k as f64 / ARC_BUDGET_SAMPLES as f64)))
                    .fold(0.0, f64::max)
            }
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// A closed, continuous, piecewise-smooth loop.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopPath {
    model: ModelKind,
    segments: Vec<Segment>,
}

impl LoopPath {
    pub fn new(model: ModelKind, segments: Vec<Segment>) -> Result<Self> {
        model.validate()?;
        if segments.is_empty() {
            return Err(Error::Validation("a loop needs at least one segment".into()));
        }
        let n_real = model.n_real();
        for s in &segments {
            s.validate(n_real)?;
        }
        for (k, pair) in segments.windows(2).enumerate() {
            let gap = distance(&pair[0].end(), &pair[1].start());
            if gap > CLOSURE_TOL {
                return Err(Error::Discontinuous {
                    segment: k,
                    next: k + 1,
                    gap,
                });
            }
        }
        let gap = distance(&segments[segments.len() - 1].end(), &segments[0].start());
        if gap > CLOSURE_TOL {
            return Err(Error::OpenLoop { gap });
        }
        Ok(Self { model, segments })
    }

    /// Zero-length loop sitting at `point`.
    pub fn constant(point: &ParamPoint) -> Self {
        let x = point.coords().to_vec();
        Self {
            model: point.model(),
            segments: vec![Segment::Line { from: x.clone(), to: x }],
        }
    }

    /// Full counter-clockwise circle in the `(p, q)` plane, starting and
    /// ending at `center + radius·e_p`.
    pub fn circle(center: &ParamPoint, plane: (usize, usize), radius: f64) -> Result<Self> {
        Self::new(
            center.model(),
            vec![Segment::Arc {
                center: center.coords().to_vec(),
                radius,
                plane,
                start_angle: 0.0,
                end_angle: TAU,
            }],
        )
    }

    /// Axis-aligned rectangle from `corner`: `+a·e_μ`, `+b·e_ν`, `−a·e_μ`, `−b·e_ν`.
    pub fn rectangle(corner: &ParamPoint, mu: usize, nu: usize, a: f64, b: f64) -> Result<Self> {
        let p0 = corner.clone();
        let p1 = p0.shifted(mu, a);
        let p2 = p1.shifted(nu, b);
        let p3 = p2.shifted(mu, -a);
        let line = |x: &ParamPoint, y: &ParamPoint| Segment::Line {
            from: x.coords().to_vec(),
            to: y.coords().to_vec(),
        };
        Self::new(
            corner.model(),
            vec![line(&p0, &p1), line(&p1, &p2), line(&p2, &p3), line(&p3, &p0)],
        )
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn base_point(&self) -> Vec<f64> {
        self.segments[0].start()
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    pub fn reversed(&self) -> Self {
        Self {
            model: self.model,
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
        }
    }

    /// `self` followed by `other`; both must share the base point.
    pub fn then(&self, other: &LoopPath) -> Result<Self> {
        if self.model != other.model {
            return Err(Error::ModelMismatch {
                expected: self.model.to_string(),
                found: other.model.to_string(),
            });
        }
        let gap = distance(&self.base_point(), &other.base_point());
        if gap > CLOSURE_TOL {
            return Err(Error::Discontinuous {
                segment: self.segments.len() - 1,
                next: self.segments.len(),
                gap,
            });
        }
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        Ok(Self {
            model: self.model,
            segments,
        })
    }

    pub fn max_magnitude(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.max_magnitude(self.model))
            .fold(0.0, f64::max)
    }

    pub fn check_against(&self, spec: &ModelSpec) -> Result<()> {
        if self.model != spec.kind() {
            return Err(Error::ModelMismatch {
                expected: spec.kind().to_string(),
                found: self.model.to_string(),
            });
        }
        let mag = self.max_magnitude();
        if mag > spec.param_limit() {
            return Err(Error::ParameterBudget {
                magnitude: mag,
                limit: spec.param_limit(),
            });
        }
        Ok(())
    }

    /// Complex parameters that change somewhere along the loop.
    fn varying_params(&self) -> Vec<bool> {
        let mut moving = vec![false; self.model.n_real()];
        for s in &self.segments {
            match s {
                Segment::Line { from, to } => {
                    for (c, (a, b)) in from.iter().zip(to).enumerate() {
                        moving[c] |= a != b;
                    }
                }
                Segment::Arc { radius, plane: (p, q), start_angle, end_angle, .. } => {
                    if *radius != 0.0 && start_angle != end_angle {
                        moving[*p] = true;
                        moving[*q] = true;
                    }
                }
            }
        }
        moving.chunks(2).map(|c| c[0] || c[1]).collect()
    }

    /// Splits the loop into about `n` pieces `(segment, t₀, t₁)`, allotted
    /// in proportion to segment length. Every segment of positive length
    /// gets at least one piece; zero-length segments get none.
    fn pieces(&self, n: usize) -> Vec<(usize, f64, f64)> {
        let lengths: Vec<f64> = self.segments.iter().map(Segment::length).collect();
        let total: f64 = lengths.iter().sum();
        if total == 0.0 {
            return Vec::new();
        }
        let quotas: Vec<f64> = lengths.iter().map(|l| n as f64 * l / total).collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let assigned: usize = counts.iter().sum();
        // largest remainders first; ties keep path order
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        for &k in order.iter().take(n.saturating_sub(assigned)) {
            counts[k] += 1;
        }
        for (c, l) in counts.iter_mut().zip(&lengths) {
            if *l > 0.0 && *c == 0 {
                *c = 1;
            }
        }
        counts
            .iter()
            .enumerate()
            .flat_map(|(s, &c)| (0..c).map(move |j| (s, j as f64 / c as f64, (j + 1) as f64 / c as f64)))
            .collect()
    }
}

/// Result of transporting the fiber once around a loop.
#[derive(Clone, Debug, Serialize)]
pub struct HolonomyReport {
    #[serde(serialize_with = "linalg::serialize_rows")]
    pub gate: CMatrix,
    pub segments_used: usize,
    pub unitarity_defect: f64,
    pub det_phase: f64,
    /// `Im Σ_k tr X_k`, the midpoint value of `Im ∮ tr A`.
    pub trace_integral: f64,
    /// `(cutoff, ‖Γ_cutoff − Γ_final‖_F)`; filled by cutoff sweeps.
    pub cutoff_history: Vec<(usize, f64)>,
    /// `(k, ‖Γ_k − Γ_2k‖_F)` for `k = n/2` and `k = n`.
    pub discretization_history: Vec<(usize, f64)>,
}

/// Midpoint increments `X_k`, exactly anti-Hermitian, in path order.
pub fn path_increments(field: &ConnectionField, path: &LoopPath, n_segments: usize) -> Result<Vec<CMatrix>> {
    path.check_against(field.spec())?;
    let model = path.model();
    let base = ParamPoint::from_coords(model, path.base_point())?;
    let tail = field.frozen_tail(&base, &path.varying_params())?;
    path.pieces(n_segments)
        .into_par_iter()
        .map(|(s, t0, t1)| {
            let seg = &path.segments[s];
            let tm = 0.5 * (t0 + t1);
            let point = ParamPoint::from_coords(model, seg.point(tm))?;
            let step: Vec<f64> = seg.tangent(tm).iter().map(|d| d * (t1 - t0)).collect();
            let x = field.connection_along_from(&tail, &point, &step)?;
            Ok(linalg::anti_hermitian_part(&x))
        })
        .collect()
}

/// `exp(X₁)·exp(X₂)···exp(X_N)`.
pub fn ordered_product(m: usize, increments: &[CMatrix]) -> CMatrix {
    increments
        .iter()
        .fold(linalg::identity(m), |acc, x| linalg::matmul(&acc, &linalg::expm(x)))
}

/// Gate and number of pieces actually used.
pub fn holonomy_gate(field: &ConnectionField, path: &LoopPath, n_segments: usize) -> Result<(CMatrix, usize)> {
    let xs = path_increments(field, path, n_segments)?;
    Ok((ordered_product(field.fiber_dim(), &xs), xs.len()))
}

fn check_segments(n_segments: usize) -> Result<()> {
    if n_segments < MIN_SEGMENTS {
        return Err(Error::Validation(format!(
            "need at least {MIN_SEGMENTS} segments, got {n_segments}"
        )));
    }
    Ok(())
}

/// Holonomy at `n_segments`, with the gates at `n/2` and `2n` for the
/// discretization history.
pub fn holonomy(field: &ConnectionField, path: &LoopPath, n_segments: usize) -> Result<HolonomyReport> {
    check_segments(n_segments)?;
    let (half, _) = holonomy_gate(field, path, n_segments / 2)?;
    let xs = path_increments(field, path, n_segments)?;
    let gate = ordered_product(field.fiber_dim(), &xs);
    let (double, _) = holonomy_gate(field, path, 2 * n_segments)?;
    let dist = |a: &CMatrix, b: &CMatrix| linalg::frobenius(&(a - b));
    Ok(HolonomyReport {
        unitarity_defect: linalg::unitarity_defect(&gate),
        det_phase: linalg::det_phase(&gate),
        trace_integral: xs.iter().map(|x| x.trace().im).sum(),
        segments_used: xs.len(),
        cutoff_history: Vec::new(),
        discretization_history: vec![(n_segments / 2, dist(&half, &gate)), (n_segments, dist(&gate, &double))],
        gate,
    })
}

/// `Im ∮ tr A` by the same midpoint rule; equals `arg det Γ` modulo 2π.
pub fn det_phase_integral(field: &ConnectionField, path: &LoopPath, n_segments: usize) -> Result<f64> {
    check_segments(n_segments)?;
    let xs = path_increments(field, path, n_segments)?;
    Ok(xs.iter().map(|x| x.trace().im).sum())
}

/// Pieces per side of an ε-plaquette.
pub fn plaquette_pieces_per_side(eps: f64) -> usize {
    ((0.64 / eps).ceil() as usize).max(4)
}

/// The ε×ε coordinate square centred on `point`, based at `point`: a
/// straight tether out to the corner `point − ε/2·(e_μ + e_ν)`, the square
/// `+ε e_μ, +ε e_ν, −ε e_μ, −ε e_ν`, and the tether back.
///
/// The tethers cancel to the last bit under the midpoint rule, so the gate
/// is the corner holonomy transported to the centre. That removes the
/// `O(ε)` commutator term a corner-based square carries and leaves
/// `Γ = 1 + ε²F_{μν}(point) + O(ε⁴)`.
pub fn plaquette_loop(point: &ParamPoint, mu: usize, nu: usize, eps: f64) -> Result<LoopPath> {
    let corner = point.shifted(mu, -0.5 * eps).shifted(nu, -0.5 * eps);
    let square = LoopPath::rectangle(&corner, mu, nu, eps, eps)?;
    let here = point.coords().to_vec();
    let there = corner.coords().to_vec();
    let mut segments = vec![Segment::Line {
        from: here.clone(),
        to: there.clone(),
    }];
    segments.extend(square.segments.iter().cloned());
    segments.push(Segment::Line { from: there, to: here });
    LoopPath::new(point.model(), segments)
}

/// Holonomy of [`plaquette_loop`], with the piece count scaled as `1/ε`.
pub fn plaquette_holonomy(field: &ConnectionField, point: &ParamPoint, mu: usize, nu: usize, eps: f64) -> Result<CMatrix> {
    let n_real = field.spec().kind().n_real();
    for c in [mu, nu] {
        if c >= n_real {
            return Err(Error::InvalidCoordinate { index: c, n_real });
        }
    }
    if mu == nu {
        return Err(Error::DegeneratePair(mu));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Validation(format!("plaquette size must be positive, got {eps}")));
    }
    let path = plaquette_loop(point, mu, nu, eps)?;
    let side = plaquette_pieces_per_side(eps);
    let tether = (side as f64 * std::f64::consts::FRAC_1_SQRT_2).ceil() as usize;
    let (gate, _) = holonomy_gate(field, &path, 4 * side + 2 * tether)?;
    Ok(gate)
}

/// `Γ·x`.
pub fn apply_gate(gate: &CMatrix, x: &DVector<C64>) -> Result<DVector<C64>> {
    if gate.nrows() != gate.ncols() || gate.ncols() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: gate.ncols(),
            found: x.len(),
        });
    }
    Ok(gate * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_qubit(cutoff: usize) -> ConnectionField {
        ConnectionField::new(&ModelSpec::new(ModelKind::TwoQubit, cutoff).unwrap()).unwrap()
    }

    #[test]
    fn constant_loop_is_identity() {
        let f = two_qubit(6);
        let p = ParamPoint::from_named(ModelKind::TwoQubit, [("alpha1_re", 0.1)]).unwrap();
        let r = holonomy(&f, &LoopPath::constant(&p), 16).unwrap();
        assert!(linalg::max_abs(&(r.gate - linalg::identity(4))) < 1e-12);
        assert_eq!(r.segments_used, 0);
        assert_eq!(det_phase_integral(&f, &LoopPath::constant(&p), 16).unwrap(), 0.0);
    }

    #[test]
    fn open_and_broken_loops_rejected() {
        let m = ModelKind::SingleMode;
        let open = LoopPath::new(m, vec![Segment::Line { from: vec![0.0, 0.0], to: vec![0.1, 0.0] }]);
        assert!(matches!(open, Err(Error::OpenLoop { .. })));
        let broken = LoopPath::new(
            m,
            vec![
                Segment::Line { from: vec![0.0, 0.0], to: vec![0.1, 0.0] },
                Segment::Line { from: vec![0.1, 0.1], to: vec![0.0, 0.0] },
            ],
        );
        assert!(matches!(broken, Err(Error::Discontinuous { segment: 0, next: 1, .. })));
    }

    #[test]
    fn pieces_follow_length() {
        let p = ParamPoint::origin(ModelKind::SingleMode);
        let r = LoopPath::rectangle(&p, 0, 1, 0.3, 0.1).unwrap();
        let pieces = r.pieces(16);
        let per: Vec<usize> = (0..4).map(|s| pieces.iter().filter(|q| q.0 == s).count()).collect();
        assert_eq!(per.iter().sum::<usize>(), 16);
        assert_eq!(per, vec![6, 2, 6, 2]);
    }

    #[test]
    fn budget_is_enforced_along_arcs() {
        let spec = ModelSpec::new(ModelKind::SingleMode, 6).unwrap().with_param_limit(0.5);
        let f = ConnectionField::new(&spec).unwrap();
        let c = ParamPoint::from_coords(ModelKind::SingleMode, vec![0.3, 0.0]).unwrap();
        let circle = LoopPath::circle(&c, (0, 1), 0.3).unwrap();
        assert!(matches!(holonomy(&f, &circle, 16), Err(Error::ParameterBudget { .. })));
    }
}
