//! Hermitian matrix variables for real conic solvers.
//!
//! An `n×n` Hermitian `X` is represented by a free real symmetric `2n×2n`
//! PSD matrix `Y`. Every linear function of `X` reads `Y` through its
//! symmetrization `[[R, −I], [I, R]]` with `R = (Y₁₁ + Y₂₂)/2` and
//! `I = (Y₂₁ − Y₁₂)/2`, which is PSD whenever `Y` is, so nothing is lost.
//! Letting the off-structure part of `Y` float keeps interior-point
//! iterates far better conditioned than pinning `Y` to the embedding.

use super::conic::{ConicProgram, LinExpr};
use crate::linalg::{c, CMat};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianVar {
    pub offset: usize,
    pub n: usize,
    /// The represented matrix is `scale · X'`, with `X'` the solver variable.
    pub scale: f64,
}

impl HermitianVar {
    pub fn new(prog: &mut ConicProgram, n: usize, scale: f64) -> Self {
        let m = 2 * n;
        let r = prog.add_vars(m * (m + 1) / 2);
        let v = Self { offset: r.start, n, scale };
        let r2 = std::f64::consts::SQRT_2;
        let mut entries = Vec::with_capacity(m * (m + 1) / 2);
        for col in 0..m {
            for row in 0..=col {
                let e = LinExpr::var(v.y(row, col));
                entries.push(if row == col { e } else { e.scaled(r2) });
            }
        }
        prog.add_psd(m, &entries);
        v
    }

    /// Variable holding `Y_{rc}` (symmetric, upper triangle column-major).
    fn y(&self, r: usize, c: usize) -> usize {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        self.offset + c * (c + 1) / 2 + r
    }

    /// `Re X'_{ij} = (Y_{ij} + Y_{n+i,n+j}) / 2`.
    fn re(&self, i: usize, j: usize) -> LinExpr {
        let n = self.n;
        let mut e = LinExpr::constant(0.0);
        e.add_term(self.y(i, j), 0.5);
        e.add_term(self.y(n + i, n + j), 0.5);
        e
    }

    /// `Im X'_{ij} = (Y_{n+i,j} − Y_{i,n+j}) / 2`.
    fn im(&self, i: usize, j: usize) -> LinExpr {
        let n = self.n;
        let mut e = LinExpr::constant(0.0);
        if i != j {
            e.add_term(self.y(n + i, j), 0.5);
            e.add_term(self.y(i, n + j), -0.5);
        }
        e
    }

    /// `Re Tr(A X)` for Hermitian `A`, in terms of the solver variables.
    pub fn trace_expr(&self, a: &CMat) -> LinExpr {
        let mut e = LinExpr::constant(0.0);
        for i in 0..self.n {
            e.add_scaled(&self.re(i, i), self.scale * a[(i, i)].re);
            for j in i + 1..self.n {
                e.add_scaled(&self.re(i, j), 2.0 * self.scale * a[(i, j)].re);
                e.add_scaled(&self.im(i, j), 2.0 * self.scale * a[(i, j)].im);
            }
        }
        e
    }

    /// `Tr X`.
    pub fn trace(&self) -> LinExpr {
        let mut e = LinExpr::constant(0.0);
        for i in 0..self.n {
            e.add_scaled(&self.re(i, i), self.scale);
        }
        e
    }

    /// Reads `X = scale · X'` from a solver point.
    pub fn extract(&self, x: &[f64]) -> CMat {
        let n = self.n;
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(self.scale * self.re(i, i).eval(x), 0.0);
            for j in i + 1..n {
                let z = c(self.scale * self.re(i, j).eval(x), self.scale * self.im(i, j).eval(x));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    /// Writes the embedding of `X / scale` into a solver point (inverse of
    /// [`extract`](Self::extract)).
    pub fn store(&self, m: &CMat, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)] / self.scale;
                x[self.y(i, j)] = z.re;
                x[self.y(n + i, n + j)] = z.re;
                x[self.y(n + i, j)] = z.im;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{outer, trace_prod, CVec};
    use crate::convex::conic::SolveStatus;

    fn sample(n: usize, seed: u64) -> CMat {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = CMat::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        &a * a.adjoint()
    }

    #[test]
    fn store_extract_round_trip_and_trace() {
        let mut prog = ConicProgram::new();
        let v = HermitianVar::new(&mut prog, 4, 3.0);
        let x0 = sample(4, 1);
        let a = sample(4, 2);
        let mut x = vec![0.0; prog.n_vars];
        v.store(&x0, &mut x);
        assert!((v.extract(&x) - &x0).norm() < 1e-12);
        assert!((v.trace_expr(&a).eval(&x) - trace_prod(&a, &x0)).abs() < 1e-12);
    }

    #[test]
    fn stored_embedding_has_doubled_spectrum() {
        let mut prog = ConicProgram::new();
        let v = HermitianVar::new(&mut prog, 3, 1.0);
        let x0 = sample(3, 5);
        let mut x = vec![0.0; prog.n_vars];
        v.store(&x0, &mut x);
        let emb = nalgebra::DMatrix::<f64>::from_fn(6, 6, |r, c| x[v.y(r, c)]);
        let mut ev: Vec<f64> = emb.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let hv = crate::linalg::eigh_desc(&x0).unwrap().values;
        for i in 0..3 {
            assert!((ev[2 * i] - hv[i]).abs() < 1e-10);
            assert!((ev[2 * i + 1] - hv[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn unstructured_psd_block_reads_as_hermitian_psd() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let b = nalgebra::DMatrix::<f64>::from_fn(8, 3, |_, _| rng.random::<f64>() - 0.5);
        let y = &b * b.transpose();
        let mut prog = ConicProgram::new();
        let v = HermitianVar::new(&mut prog, 4, 2.0);
        let mut x = vec![0.0; prog.n_vars];
        for r in 0..8 {
            for c in r..8 {
                x[v.y(r, c)] = y[(r, c)];
            }
        }
        let m = v.extract(&x);
        let e = crate::linalg::eigh_desc(&m).unwrap();
        assert!(*e.values.last().unwrap() > -1e-12);
        let a = sample(4, 6);
        assert!((v.trace_expr(&a).eval(&x) - trace_prod(&a, &m)).abs() < 1e-12);
        assert!((v.trace().eval(&x) - crate::linalg::trace_re(&m)).abs() < 1e-12);
    }

    #[test]
    fn maximize_quadratic_form_over_trace_ball() {
        // max hᴴXh s.t. Tr X ≤ 2 → 2‖h‖², X = 2 hhᴴ/‖h‖²
        let h = CVec::from_vec(vec![c(1.0, 1.0), c(0.0, -2.0), c(0.5, 0.0)]);
        let mut prog = ConicProgram::new();
        let v = HermitianVar::new(&mut prog, 3, 1.0);
        let mut cap = LinExpr::constant(2.0);
        cap.add_scaled(&v.trace(), -1.0);
        prog.add_nonneg(&cap);
        prog.add_objective(&v.trace_expr(&outer(&h)), -1.0);
        let s = prog.solve().unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        let hn = h.norm_squared();
        assert!((-s.objective - 2.0 * hn).abs() < 1e-6);
        let x = v.extract(&s.x);
        let expected = outer(&h) * c(2.0 / hn, 0.0);
        assert!((x - expected).norm() < 1e-4);
    }
}
