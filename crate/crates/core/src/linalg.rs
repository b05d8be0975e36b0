//! Dense complex linear-algebra helpers shared by the engine.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

// Below this many scalar multiply-adds the plain complex kernel is faster
// than splitting into four real products.
const SPLIT_GEMM_WORK: usize = 32 * 32 * 32;

/// Complex matrix product routed through the real (blocked) gemm kernel.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    if a.nrows() * a.ncols() * b.ncols() < SPLIT_GEMM_WORK {
        return a * b;
    }
    let ar = a.map(|z| z.re);
    let ai = a.map(|z| z.im);
    let br = b.map(|z| z.re);
    let bi = b.map(|z| z.im);
    let mut re = &ar * &br;
    re -= &ai * &bi;
    let mut im = &ar * &bi;
    im += &ai * &br;
    re.zip_map(&im, C64::new)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Maximum absolute column sum.
pub fn norm1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖U†U − 1‖_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let mut g = matmul(&u.adjoint(), u);
    for k in 0..g.nrows() {
        g[(k, k)] -= ONE;
    }
    frobenius(&g)
}

/// `max |X + X†|` entrywise.
pub fn anti_hermitian_defect(x: &CMatrix) -> f64 {
    let n = x.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            worst = worst.max((x[(i, j)] + x[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(X − X†)/2`, which is exactly anti-Hermitian.
pub fn anti_hermitian_part(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(0.0, x[(i, i)].im)
        } else {
            (x[(i, j)] - x[(j, i)].conj()) * 0.5
        }
    })
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    matmul(a, b) - matmul(b, a)
}

const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
    (13, 5.371_920_351_148_152),
];

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const PADE9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with diagonal Padé
/// approximants of degree 3, 5, 7, 9 or 13, selected from the 1-norm
/// (Higham 2005). Deterministic: the degree and squaring count depend only
/// on `‖A‖₁`.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let norm = norm1(a);
    if norm == 0.0 {
        return identity(n);
    }
    for &(m, theta) in &THETA[..4] {
        if norm <= theta {
            return pade_low(a, m);
        }
    }
    let theta13 = THETA[4].1;
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scaled = a.map(|z| z / 2f64.powi(s as i32));
    let mut r = pade13(&scaled);
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    r
}

fn pade_solve(u: CMatrix, v: CMatrix) -> CMatrix {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular inside the θ bound")
}

fn pade_low(a: &CMatrix, m: usize) -> CMatrix {
    let b: &[f64] = match m {
        3 => &PADE3,
        5 => &PADE5,
        7 => &PADE7,
        _ => &PADE9,
    };
    let n = a.nrows();
    let a2 = matmul(a, a);
    let mut even = vec![identity(n)];
    for k in 1..=m / 2 {
        let next = matmul(&even[k - 1], &a2);
        even.push(next);
    }
    let mut u_inner = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    for (k, pow) in even.iter().enumerate() {
        u_inner += pow * C64::from(b[2 * k + 1]);
        v += pow * C64::from(b[2 * k]);
    }
    let u = matmul(a, &u_inner);
    pade_solve(u, v)
}

fn pade13(a: &CMatrix) -> CMatrix {
    let b = &PADE13;
    let n = a.nrows();
    let id = identity(n);
    let a2 = matmul(a, a);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);
    let c = |k: usize| C64::from(b[k]);

    let u_hi = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let u_inner = matmul(&a6, &u_hi) + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &id * c(1);
    let u = matmul(a, &u_inner);

    let v_hi = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = matmul(&a6, &v_hi) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);
    pade_solve(u, v)
}

/// Principal logarithm of a matrix close to the identity, by the Mercator
/// series. Rejects inputs with `‖U − 1‖_F ≥ 0.5`.
pub fn log_near_identity(u: &CMatrix) -> Result<CMatrix> {
    let n = u.nrows();
    let y = u - identity(n);
    let r = frobenius(&y);
    if r >= 0.5 {
        return Err(Error::Accuracy(format!(
            "matrix too far from identity for the logarithm series (‖U − 1‖ = {r:.3e})"
        )));
    }
    let mut acc = y.clone();
    let mut pow = y.clone();
    for k in 2..200 {
        pow = matmul(&pow, &y);
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let term = &pow * C64::from(sign / k as f64);
        let small = frobenius(&term) <= f64::EPSILON * 0.25 * frobenius(&acc).max(f64::MIN_POSITIVE);
        acc += term;
        if small {
            break;
        }
    }
    Ok(acc)
}

/// Number of singular values above `rel_tol · σ_max`, together with the
/// singular values in descending order. Columns are the vectors.
pub fn numerical_rank(columns: &DMatrix<f64>, rel_tol: f64) -> (usize, Vec<f64>) {
    if columns.ncols() == 0 || columns.nrows() == 0 {
        return (0, Vec::new());
    }
    let svd = columns.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return (0, sv);
    }
    let rank = sv.iter().filter(|&&s| s > rel_tol * top).count();
    (rank, sv)
}

/// `arg det(U)` in `(−π, π]`.
pub fn det_phase(u: &CMatrix) -> f64 {
    u.clone().determinant().arg()
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

/// Row-major `[re, im]` pairs, the interchange layout for reports.
pub fn to_rows(a: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    a.row_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: bad.len(),
        });
    }
    Ok(CMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

/// `serialize_with` adapter writing a matrix via [`to_rows`].
pub fn serialize_rows<S: serde::Serializer>(a: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&to_rows(a), s)
}
