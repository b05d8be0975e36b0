//! Action of generator exponentials on blocks of vectors.
//!
//! Every optical factor has the form `exp(zG − z̄G†)` with a sparse ladder
//! polynomial `G`. The connection only needs these exponentials (and their
//! directional derivatives) applied to the `m` frame columns, so instead of
//! forming dense `dim × dim` exponentials we run a scaled Taylor series on
//! the block directly. The derivative uses the block-augmented generator
//! `[[X, E], [0, X]]`, whose exponential carries `∂exp(X)[E]` in the
//! upper-right block.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ZERO};
use crate::sparse::SparseMatrix;

// Per-step norm bound for the scaled Taylor series.
const STEP_NORM: f64 = 4.0;
const MAX_TERMS: usize = 120;

#[derive(Clone, Debug)]
pub(crate) struct Generator {
    g: SparseMatrix,
    gd: SparseMatrix,
    // ‖G‖₁ + ‖G†‖₁ bounds ‖zG − z̄G†‖₁ / |z|.
    norm: f64,
}

impl Generator {
    pub fn new(g: SparseMatrix) -> Self {
        let gd = g.adjoint();
        let norm = g.norm1() + gd.norm1();
        Self { g, gd, norm }
    }

    #[cfg(test)]
    pub fn raising(&self) -> &SparseMatrix {
        &self.g
    }

    /// `(zG − z̄G†)·x`.
    pub fn apply(&self, z: C64, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.nrows(), x.ncols());
        self.apply_into(z, x, &mut out, true);
        out
    }

    fn apply_into(&self, z: C64, x: &CMatrix, out: &mut CMatrix, accumulate: bool) {
        self.g.mul_dense_into(x, out, z, accumulate);
        self.gd.mul_dense_into(x, out, -z.conj(), true);
    }

    fn steps(&self, weight: f64) -> usize {
        ((weight * self.norm) / STEP_NORM).ceil().max(1.0) as usize
    }

    /// `zG − z̄G†` as one sparse matrix.
    fn combination(&self, z: C64) -> SparseMatrix {
        self.g.scale(z).add_scaled(&self.gd, -z.conj())
    }

    /// `exp(zG − z̄G†)·b`.
    pub fn exp_action(&self, z: C64, b: &CMatrix) -> Result<CMatrix> {
        if z == ZERO {
            return Ok(b.clone());
        }
        let s = self.steps(z.norm());
        let x = self.combination(z / s as f64);
        let mut v = b.clone();
        for _ in 0..s {
            let mut acc = v.clone();
            let mut term = v;
            let mut quiet = 0;
            let mut converged = false;
            for k in 1..=MAX_TERMS {
                let mut next = CMatrix::zeros(term.nrows(), term.ncols());
                x.mul_dense_into(&term, &mut next, C64::from(1.0 / k as f64), true);
                acc += &next;
                term = next;
                if small(&term, &acc) {
                    quiet += 1;
                    if quiet == 2 {
                        converged = true;
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            if !converged {
                return Err(Error::Accuracy("Taylor action did not converge".into()));
            }
            v = acc;
        }
        Ok(v)
    }

    /// Returns `(F·b, [∂F[w₁]·b, ∂F[w₂]·b, …])` where `F = exp(zG − z̄G†)`
    /// and each derivative is taken along the generator direction
    /// `wG − w̄G†`. All directions share one augmented series.
    pub fn exp_action_with_derivatives(
        &self,
        z: C64,
        directions: &[C64],
        b: &CMatrix,
    ) -> Result<(CMatrix, Vec<CMatrix>)> {
        if z == ZERO {
            // exp(0) = 1 and its derivative along E is E itself.
            let ders = directions.iter().map(|&w| self.apply(w, b)).collect();
            return Ok((b.clone(), ders));
        }
        let wmax = directions.iter().fold(0.0_f64, |m, w| m.max(w.norm()));
        let s = self.steps(z.norm() + wmax);
        let x = self.combination(z / s as f64);
        let es: Vec<SparseMatrix> = directions.iter().map(|&w| self.combination(w / s as f64)).collect();
        let (rows, cols) = (b.nrows(), b.ncols());
        // augmented vector [top₁; …; top_d; bottom] starts at [0; …; 0; b]
        let mut tops: Vec<CMatrix> = directions.iter().map(|_| CMatrix::zeros(rows, cols)).collect();
        let mut bot = b.clone();
        for _ in 0..s {
            let mut acc_tops = tops.clone();
            let mut acc_bot = bot.clone();
            let mut term_tops = tops;
            let mut term_bot = bot;
            let mut quiet = 0;
            let mut converged = false;
            for k in 1..=MAX_TERMS {
                let inv = C64::from(1.0 / k as f64);
                // [[X, E], [0, X]] · [t; u] = [X t + E u; X u]
                let mut all_small = true;
                for (d, e) in es.iter().enumerate() {
                    let mut next = CMatrix::zeros(rows, cols);
                    x.mul_dense_into(&term_tops[d], &mut next, inv, true);
                    e.mul_dense_into(&term_bot, &mut next, inv, true);
                    acc_tops[d] += &next;
                    all_small &= small(&next, &acc_tops[d]);
                    term_tops[d] = next;
                }
                let mut next_bot = CMatrix::zeros(rows, cols);
                x.mul_dense_into(&term_bot, &mut next_bot, inv, true);
                acc_bot += &next_bot;
                all_small &= small(&next_bot, &acc_bot);
                term_bot = next_bot;
                if all_small {
                    quiet += 1;
                    if quiet == 2 {
                        converged = true;
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            if !converged {
                return Err(Error::Accuracy("augmented Taylor action did not converge".into()));
            }
            tops = acc_tops;
            bot = acc_bot;
        }
        Ok((bot, tops))
    }
}

fn small(term: &CMatrix, acc: &CMatrix) -> bool {
    let t = term.iter().fold(0.0_f64, |m, z| m.max(z.norm_sqr()));
    if t == 0.0 {
        return true;
    }
    let a = acc.iter().fold(0.0_f64, |m, z| m.max(z.norm_sqr()));
    t <= 0.25 * f64::EPSILON * f64::EPSILON * a
}
