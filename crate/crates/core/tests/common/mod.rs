//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use holonomy_core::connection::ConnectionField;
use holonomy_core::holonomy::{LoopPath, Segment};
use holonomy_core::linalg::{self, CMatrix, C64};
use holonomy_core::optics::{ModelKind, ParamPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random point with every complex parameter inside the disc of radius `r`.
pub fn random_point(model: ModelKind, r: f64, rng: &mut ChaCha8Rng) -> ParamPoint {
    let mut x = Vec::with_capacity(model.n_real());
    for _ in 0..model.n_complex() {
        let rad = r * rng.gen::<f64>().sqrt();
        let th = rng.gen::<f64>() * std::f64::consts::TAU;
        x.push(rad * th.cos());
        x.push(rad * th.sin());
    }
    ParamPoint::from_coords(model, x).unwrap()
}

/// Haar-ish random unitary: exponential of a random anti-Hermitian matrix.
pub fn random_unitary(m: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let h = CMatrix::from_fn(m, m, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let x = (&h - h.adjoint()) * c(0.5, 0.0);
    linalg::expm(&x)
}

/// `A(γ(t))[γ′(t)]` on a loop parametrised by `t ∈ [0, n_segments]`.
pub fn loop_generator(field: &ConnectionField, path: &LoopPath, t: f64) -> CMatrix {
    let segs = path.segments();
    let k = (t.floor() as usize).min(segs.len() - 1);
    let s: &Segment = &segs[k];
    let local = t - k as f64;
    let point = ParamPoint::from_coords(path.model(), s.point(local)).unwrap();
    field.connection_along(&point, &s.tangent(local)).unwrap()
}

/// Adaptive Dormand–Prince 5(4) integration of `U′ = U·G(t)` from `U(t0) = u0`.
pub fn transport_ode(g: impl Fn(f64) -> CMatrix, u0: CMatrix, t0: f64, t1: f64, rtol: f64, atol: f64) -> CMatrix {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const CS: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let f = |t: f64, u: &CMatrix| u * g(t);
    let mut t = t0;
    let mut u = u0;
    let mut h = (t1 - t0) / 64.0;
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        let mut k: Vec<CMatrix> = Vec::with_capacity(7);
        k.push(f(t, &u));
        for s in 1..7 {
            let mut y = u.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[s - 1][j];
                if a != 0.0 {
                    y += kj * c(h * a, 0.0);
                }
            }
            k.push(f(t + CS[s] * h, &y));
        }
        let mut y5 = u.clone();
        let mut err = CMatrix::zeros(u.nrows(), u.ncols());
        for j in 0..7 {
            y5 += &k[j] * c(h * B5[j], 0.0);
            err += &k[j] * c(h * (B5[j] - B4[j]), 0.0);
        }
        let scale = atol + rtol * linalg::max_abs(&y5);
        let e = linalg::max_abs(&err) / scale;
        if e <= 1.0 {
            t += h;
            u = y5;
        }
        let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    u
}

/// Closed-form connection of the single-mode displacement model on the
/// frame (|0⟩, |1⟩): `D⁻¹dD = dα a† − dᾱ a + ½(ᾱdα − αdᾱ)`.
pub fn displacement_connection(alpha: C64) -> [CMatrix; 2] {
    let (x, y) = (alpha.re, alpha.im);
    // coefficient of dx: a† − a − i y;  of dy: i(a† + a) + i x
    let ax = CMatrix::from_row_slice(2, 2, &[c(0.0, -y), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, -y)]);
    let ay = CMatrix::from_row_slice(2, 2, &[c(0.0, x), c(0.0, 1.0), c(0.0, 1.0), c(0.0, x)]);
    [ax, ay]
}

pub fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::frobenius(&(a - b))
}
