//! Numerical estimate of the holonomy Lie algebra.
//!
//! Small plaquettes at random points give generators `log(Γ)/ε² ≈ F_{μν}`.
//! Their real span is closed under commutators, and the dimension of the
//! result is compared with `su(m)` (m² − 1) and `u(m)` (m²). The trace of
//! the generators is reported separately because it alone separates the
//! two: `su(m)` is exactly the traceless part of `u(m)`.
//!
//! Thresholds:
//! * singular values above `1e−7·σ_max` count toward a dimension;
//! * `full_u` needs rank `m²` and some generator with `|tr| > 1e−6`;
//! * `at_most_su` needs every `|tr| < 1e−8` over at least 200 samples;
//! * anything else is `inconclusive`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::ConnectionField;
use crate::error::{Error, Result};
use crate::holonomy::plaquette_holonomy;
use crate::linalg::{self, CMatrix, C64};
use crate::optics::ParamPoint;

pub const RANK_REL_TOL: f64 = 1e-7;
pub const FULL_U_TRACE: f64 = 1e-6;
pub const SU_TRACE: f64 = 1e-8;
pub const SU_MIN_SAMPLES: usize = 200;
/// Radius of the ball the sample points are drawn from.
pub const SAMPLE_RADIUS: f64 = 0.2;
pub const DEFAULT_RANK_EPS: f64 = 0.1;
/// Accepted range of `‖Γ(ε) − 1‖ / ‖Γ(ε/2) − 1‖` (4 in the quadratic regime).
pub const RATIO_RANGE: (f64, f64) = (3.0, 5.3);
// Plaquettes with ‖Γ(ε) − 1‖ below FLAT_FRACTION·ε² carry no curvature
// worth a ratio test; their generator is kept as is.
const FLAT_FRACTION: f64 = 1e-6;
const MAX_CLOSURE_ROUNDS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AtMostSu,
    FullU,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub fiber_dim: usize,
    /// Real dimension of the commutator closure.
    pub rank: usize,
    /// Real dimension spanned by the raw generators.
    pub initial_rank: usize,
    pub closure_rounds: usize,
    pub su_dim: usize,
    pub u_dim: usize,
    pub max_abs_trace: f64,
    pub mean_abs_trace: f64,
    pub verdict: Verdict,
    pub samples: usize,
    /// Samples too flat for the ε-ratio test.
    pub flat_samples: usize,
    pub eps: f64,
    pub seed: u64,
    pub singular_values: Vec<f64>,
}

/// Outcome of closing a set of matrices under commutators.
#[derive(Clone, Debug)]
pub struct LieClosure {
    pub rank: usize,
    pub initial_rank: usize,
    pub rounds: usize,
    /// Orthonormal basis (real Frobenius inner product) of the closure.
    pub basis: Vec<CMatrix>,
    pub singular_values: Vec<f64>,
}

fn vectorize(x: &CMatrix) -> Vec<f64> {
    x.iter().map(|z| z.re).chain(x.iter().map(|z| z.im)).collect()
}

fn devectorize(v: &[f64], m: usize) -> CMatrix {
    let n = m * m;
    CMatrix::from_iterator(m, m, (0..n).map(|k| C64::new(v[k], v[n + k])))
}

/// Orthonormal basis of the real span of `mats`, cut at `rel_tol·σ_max`.
fn span_basis(mats: &[CMatrix], m: usize, rel_tol: f64) -> (Vec<CMatrix>, Vec<f64>) {
    if mats.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let cols: Vec<Vec<f64>> = mats.iter().map(vectorize).collect();
    let a = DMatrix::from_fn(2 * m * m, cols.len(), |i, j| cols[j][i]);
    let svd = a.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].partial_cmp(&svd.singular_values[x]).unwrap());
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let top = sv.first().copied().unwrap_or(0.0);
    let basis = order
        .iter()
        .filter(|&&k| top > 0.0 && svd.singular_values[k] > rel_tol * top)
        .map(|&k| devectorize(u.column(k).as_slice(), m))
        .collect();
    (basis, sv)
}

/// Real dimension of the Lie algebra generated by `generators`.
pub fn lie_closure(generators: &[CMatrix], rel_tol: f64) -> Result<LieClosure> {
    let m = match generators.first() {
        Some(g) => g.nrows(),
        None => {
            return Ok(LieClosure {
                rank: 0,
                initial_rank: 0,
                rounds: 0,
                basis: Vec::new(),
                singular_values: Vec::new(),
            })
        }
    };
    if let Some(bad) = generators.iter().find(|g| g.nrows() != m || g.ncols() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: bad.nrows().max(bad.ncols()),
        });
    }
    let (mut basis, mut sv) = span_basis(generators, m, rel_tol);
    let initial_rank = basis.len();
    let mut rounds = 0;
    while rounds < MAX_CLOSURE_ROUNDS {
        rounds += 1;
        let mut set = basis.clone();
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                set.push(linalg::commutator(&basis[i], &basis[j]));
            }
        }
        let (next, next_sv) = span_basis(&set, m, rel_tol);
        let grew = next.len() > basis.len();
        basis = next;
        sv = next_sv;
        if !grew {
            break;
        }
    }
    Ok(LieClosure {
        rank: basis.len(),
        initial_rank,
        rounds,
        basis,
        singular_values: sv,
    })
}

/// Rank of the closure with the default threshold.
pub fn lie_closure_rank(generators: &[CMatrix]) -> Result<usize> {
    Ok(lie_closure(generators, RANK_REL_TOL)?.rank)
}

#[derive(Clone, Debug)]
struct Draw {
    mu: usize,
    nu: usize,
    point: ParamPoint,
}

/// Draws the sample pairs and points; depends only on the seed.
fn draw_samples(base: &ParamPoint, samples: usize, seed: u64) -> Vec<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = base.coords().len();
    (0..samples)
        .map(|_| {
            let mu = rng.gen_range(0..d);
            let mut nu = rng.gen_range(0..d - 1);
            if nu >= mu {
                nu += 1;
            }
            let mut dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let u: f64 = rng.gen();
            let r = SAMPLE_RADIUS * u.powf(1.0 / d as f64);
            dir.iter_mut().for_each(|x| *x *= r / norm);
            Draw {
                mu,
                nu,
                point: base.offset(&dir, 1.0),
            }
        })
        .collect()
}

/// One plaquette generator and whether it was too flat to ratio-test.
fn generator(field: &ConnectionField, draw: &Draw, eps: f64) -> Result<(CMatrix, bool)> {
    let m = field.fiber_dim();
    let id = linalg::identity(m);
    let full = plaquette_holonomy(field, &draw.point, draw.mu, draw.nu, eps)?;
    let d_full = linalg::frobenius(&(&full - &id));
    let flat = d_full < FLAT_FRACTION * eps * eps;
    if !flat {
        let half = plaquette_holonomy(field, &draw.point, draw.mu, draw.nu, 0.5 * eps)?;
        let ratio = d_full / linalg::frobenius(&(&half - &id));
        if !(RATIO_RANGE.0..=RATIO_RANGE.1).contains(&ratio) {
            return Err(Error::Accuracy(format!(
                "plaquette ε-ratio {ratio:.3} outside [{}, {}] at coordinates ({}, {}); reduce eps",
                RATIO_RANGE.0, RATIO_RANGE.1, draw.mu, draw.nu
            )));
        }
    }
    let g = linalg::log_near_identity(&full)? / C64::from(eps * eps);
    Ok((linalg::anti_hermitian_part(&g), flat))
}

pub fn holonomy_algebra_rank(
    field: &ConnectionField,
    base: &ParamPoint,
    samples: usize,
    eps: f64,
    seed: u64,
) -> Result<RankReport> {
    if samples == 0 {
        return Err(Error::Validation("rank probe needs at least one sample".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Validation(format!("plaquette size must be positive, got {eps}")));
    }
    field.spec().check_point(base)?;
    if base.coords().len() < 2 {
        return Err(Error::Validation("rank probe needs at least two real coordinates".into()));
    }
    let draws = draw_samples(base, samples, seed);
    let results = draws
        .par_iter()
        .map(|d| generator(field, d, eps))
        .collect::<Result<Vec<_>>>()?;
    let flat_samples = results.iter().filter(|r| r.1).count();
    let generators: Vec<CMatrix> = results.into_iter().map(|r| r.0).collect();
    let traces: Vec<f64> = generators.iter().map(|g| g.trace().norm()).collect();
    let max_abs_trace = traces.iter().copied().fold(0.0, f64::max);
    let mean_abs_trace = traces.iter().sum::<f64>() / traces.len() as f64;
    let closure = lie_closure(&generators, RANK_REL_TOL)?;
    let m = field.fiber_dim();
    let u_dim = m * m;
    let verdict = if closure.rank == u_dim && max_abs_trace > FULL_U_TRACE {
        Verdict::FullU
    } else if max_abs_trace < SU_TRACE && samples >= SU_MIN_SAMPLES {
        Verdict::AtMostSu
    } else {
        Verdict::Inconclusive
    };
    Ok(RankReport {
        fiber_dim: m,
        rank: closure.rank,
        initial_rank: closure.initial_rank,
        closure_rounds: closure.rounds,
        su_dim: u_dim - 1,
        u_dim,
        max_abs_trace,
        mean_abs_trace,
        verdict,
        samples,
        flat_samples,
        eps,
        seed,
        singular_values: closure.singular_values,
    })
}
