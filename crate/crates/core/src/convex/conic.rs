//! Small conic-program builder and the interior-point backend.
//!
//! Programs are stated as `min qᵀx` subject to `b − Ax ∈ K`, where `K` is a
//! product of zero, nonnegative, exponential and PSD-triangle cones.

use std::fmt::Write as _;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default solver accuracy (gap and feasibility).
pub const SOLVER_EPS: f64 = 1e-9;
/// Accuracy accepted when the solver reports a nearly solved program.
pub const SOLVER_FALLBACK_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy)]
struct Attempt {
    eps: f64,
    static_reg: f64,
    max_step: f64,
}

const DEFAULT_ATTEMPT: Attempt = Attempt { eps: SOLVER_EPS, static_reg: 1e-8, max_step: 0.99 };

const RETRIES: [Attempt; 2] = [
    Attempt { eps: SOLVER_EPS, static_reg: 1e-7, max_step: 0.9 },
    Attempt { eps: SOLVER_EPS, static_reg: 1e-6, max_step: 0.8 },
];

/// Affine expression `c + Σ aᵢ xᵢ`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }

    pub fn var(i: usize) -> Self {
        Self { constant: 0.0, terms: vec![(i, 1.0)] }
    }

    pub fn add_term(&mut self, i: usize, a: f64) -> &mut Self {
        if a != 0.0 {
            self.terms.push((i, a));
        }
        self
    }

    pub fn add_const(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_scaled(&mut self, other: &LinExpr, s: f64) -> &mut Self {
        self.constant += s * other.constant;
        for &(i, a) in &other.terms {
            self.add_term(i, s * a);
        }
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut e = LinExpr::constant(0.0);
        e.add_scaled(self, s);
        e
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, a)| a * x[i]).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    Zero(usize),
    Nonneg(usize),
    /// `(x, y, z)` with `y·exp(x/y) ≤ z`.
    Exp,
    /// Upper triangle of an `n×n` symmetric matrix, column-major, off-diagonal
    /// entries scaled by √2.
    PsdTriangle(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Zero(n) | Cone::Nonneg(n) => n,
            Cone::Exp => 3,
            Cone::PsdTriangle(n) => n * (n + 1) / 2,
        }
    }

    fn to_clarabel(self) -> SupportedConeT<f64> {
        match self {
            Cone::Zero(n) => SupportedConeT::ZeroConeT(n),
            Cone::Nonneg(n) => SupportedConeT::NonnegativeConeT(n),
            Cone::Exp => SupportedConeT::ExponentialConeT(),
            Cone::PsdTriangle(n) => SupportedConeT::PSDTriangleConeT(n),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConicProgram {
    pub n_vars: usize,
    pub q: Vec<f64>,
    /// Objective constant (not passed to the solver).
    pub q0: f64,
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub cones: Vec<Cone>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// `qᵀx + q0` at the returned point.
    pub objective: f64,
    pub iterations: u32,
    /// The solver met only the reduced (`SOLVER_FALLBACK_EPS`) tolerances.
    pub almost: bool,
    pub raw_status: String,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self) -> usize {
        self.n_vars += 1;
        self.q.push(0.0);
        self.n_vars - 1
    }

    pub fn add_vars(&mut self, k: usize) -> std::ops::Range<usize> {
        let start = self.n_vars;
        for _ in 0..k {
            self.add_var();
        }
        start..self.n_vars
    }

    /// Adds `s·expr` to the (minimized) objective.
    pub fn add_objective(&mut self, expr: &LinExpr, s: f64) {
        self.q0 += s * expr.constant;
        for &(i, a) in &expr.terms {
            self.q[i] += s * a;
        }
    }

    fn push_row(&mut self, expr: &LinExpr) {
        let r = self.b.len();
        self.b.push(expr.constant);
        for &(i, a) in &expr.terms {
            debug_assert!(i < self.n_vars);
            self.a.push((r, i, -a));
        }
    }

    fn push_cone(&mut self, cone: Cone) {
        match (self.cones.last_mut(), cone) {
            (Some(Cone::Nonneg(n)), Cone::Nonneg(k)) => *n += k,
            (Some(Cone::Zero(n)), Cone::Zero(k)) => *n += k,
            _ => self.cones.push(cone),
        }
    }

    /// `expr ≥ 0`.
    pub fn add_nonneg(&mut self, expr: &LinExpr) {
        self.push_row(expr);
        self.push_cone(Cone::Nonneg(1));
    }

    /// `expr = 0`.
    pub fn add_eq(&mut self, expr: &LinExpr) {
        self.push_row(expr);
        self.push_cone(Cone::Zero(1));
    }

    /// `(x, y, z) ∈ K_exp`.
    pub fn add_exp(&mut self, x: &LinExpr, y: &LinExpr, z: &LinExpr) {
        self.push_row(x);
        self.push_row(y);
        self.push_row(z);
        self.push_cone(Cone::Exp);
    }

    /// `t ≤ ln(z)`.
    pub fn add_log_epigraph(&mut self, t: usize, z: &LinExpr) {
        self.add_exp(&LinExpr::var(t), &LinExpr::constant(1.0), z);
    }

    /// PSD-triangle cone over `n(n+1)/2` scaled upper-triangle entries.
    pub fn add_psd(&mut self, n: usize, entries: &[LinExpr]) {
        assert_eq!(entries.len(), n * (n + 1) / 2);
        for e in entries {
            self.push_row(e);
        }
        self.push_cone(Cone::PsdTriangle(n));
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.q0 + self.q.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Solves at `SOLVER_EPS`, accepting an almost-solved answer (accurate to
    /// `SOLVER_FALLBACK_EPS`). A stalled run is retried on the same program
    /// with shorter steps and more regularization.
    pub fn solve(&self) -> Result<ConicSolution> {
        let mut out = self.solve_with_eps(SOLVER_EPS)?;
        for attempt in &RETRIES {
            if out.status != SolveStatus::NumericalFailure {
                break;
            }
            log::debug!("solver returned {}; retrying with {attempt:?}", out.raw_status);
            out = self.solve_with(attempt)?;
        }
        Ok(out)
    }

    pub fn solve_with_eps(&self, eps: f64) -> Result<ConicSolution> {
        self.solve_with(&Attempt { eps, ..DEFAULT_ATTEMPT })
    }

    fn solve_with(&self, attempt: &Attempt) -> Result<ConicSolution> {
        let eps = attempt.eps;
        let m = self.n_rows();
        let n = self.n_vars;
        let (mut ii, mut jj, mut vv) = (Vec::new(), Vec::new(), Vec::new());
        for &(r, c, v) in &self.a {
            ii.push(r);
            jj.push(c);
            vv.push(v);
        }
        let a = CscMatrix::new_from_triplets(m, n, ii, jj, vv);
        let p = CscMatrix::zeros((n, n));
        let cones: Vec<_> = self.cones.iter().map(|c| c.to_clarabel()).collect();
        let settings = DefaultSettingsBuilder::default()
            .verbose(std::env::var_os("HCSSA_SOLVER_VERBOSE").is_some())
            .tol_gap_abs(eps)
            .tol_gap_rel(eps)
            .tol_feas(eps)
            .max_iter(300)
            .reduced_tol_feas(SOLVER_FALLBACK_EPS)
            .reduced_tol_gap_abs(SOLVER_FALLBACK_EPS)
            .reduced_tol_gap_rel(SOLVER_FALLBACK_EPS)
            .max_step_fraction(attempt.max_step)
            .static_regularization_constant(attempt.static_reg)
            .build()
            .map_err(|e| Error::Numerical(format!("solver settings: {e}")))?;
        let mut solver = DefaultSolver::new(&p, &self.q, &a, &self.b, &cones, settings)
            .map_err(|e| Error::Numerical(format!("solver setup: {e:?}")))?;
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
            _ => SolveStatus::NumericalFailure,
        };
        let x = sol.x.clone();
        let objective = self.objective_at(&x);
        Ok(ConicSolution {
            status,
            x,
            objective,
            iterations: sol.iterations,
            almost: sol.status == SolverStatus::AlmostSolved,
            raw_status: format!("{:?}", sol.status),
        })
    }

    /// Writes the program in the Conic Benchmark Format (CBF v3), as a
    /// minimization with `Ax + b'` in the cone (signs adjusted accordingly).
    pub fn to_cbf(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "VER\n3\n\nOBJSENSE\nMIN\n");
        let _ = writeln!(out, "VAR\n{} 1\nF {}\n", self.n_vars, self.n_vars);
        // CBF orders exponential-cone members as (z, y, x); PSD triangles are
        // exported as PSDCON blocks with lower-triangle coordinates.
        let mut scalar_rows: Vec<(usize, usize)> = Vec::new(); // (cbf row, our row, sign applied later)
        let mut psd_blocks: Vec<(usize, usize)> = Vec::new(); // (first row, n)
        let mut con_lines = Vec::new();
        let mut row = 0usize;
        let mut cbf_row = 0usize;
        let mut map: Vec<Option<(usize, f64)>> = vec![None; self.n_rows()];
        for cone in &self.cones {
            match *cone {
                Cone::Zero(k) | Cone::Nonneg(k) => {
                    con_lines.push(format!("{} {}", if matches!(cone, Cone::Zero(_)) { "L=" } else { "L+" }, k));
                    for i in 0..k {
                        map[row + i] = Some((cbf_row + i, 1.0));
                        scalar_rows.push((cbf_row + i, row + i));
                    }
                    row += k;
                    cbf_row += k;
                }
                Cone::Exp => {
                    con_lines.push("EXP 3".to_string());
                    for (i, r) in [row + 2, row + 1, row].into_iter().enumerate() {
                        map[r] = Some((cbf_row + i, 1.0));
                        scalar_rows.push((cbf_row + i, r));
                    }
                    row += 3;
                    cbf_row += 3;
                }
                Cone::PsdTriangle(n) => {
                    psd_blocks.push((row, n));
                    row += n * (n + 1) / 2;
                }
            }
        }
        let _ = writeln!(out, "CON\n{} {}", cbf_row, con_lines.len());
        for l in &con_lines {
            let _ = writeln!(out, "{l}");
        }
        let _ = writeln!(out);
        if !psd_blocks.is_empty() {
            let _ = writeln!(out, "PSDCON\n{}", psd_blocks.len());
            for (_, n) in &psd_blocks {
                let _ = writeln!(out, "{n}");
            }
            let _ = writeln!(out);
        }
        let obj: Vec<_> = self.q.iter().enumerate().filter(|(_, v)| **v != 0.0).collect();
        let _ = writeln!(out, "OBJACOORD\n{}", obj.len());
        for (i, v) in obj {
            let _ = writeln!(out, "{i} {v:e}");
        }
        let _ = writeln!(out, "\nOBJBCOORD\n{:e}\n", self.q0);
        // scalar cone rows: s = b − A x
        let mut acoord = Vec::new();
        let mut bcoord = Vec::new();
        for &(r, c, v) in &self.a {
            if let Some((cr, _)) = map[r] {
                acoord.push(format!("{cr} {c} {:e}", -v));
            }
        }
        for &(cr, r) in &scalar_rows {
            if self.b[r] != 0.0 {
                bcoord.push(format!("{cr} {:e}", self.b[r]));
            }
        }
        let _ = writeln!(out, "ACOORD\n{}", acoord.len());
        for l in &acoord {
            let _ = writeln!(out, "{l}");
        }
        let _ = writeln!(out, "\nBCOORD\n{}", bcoord.len());
        for l in &bcoord {
            let _ = writeln!(out, "{l}");
        }
        if !psd_blocks.is_empty() {
            let mut hcoord = Vec::new();
            let mut dcoord = Vec::new();
            let mut row_of: std::collections::HashMap<usize, (usize, usize, usize, f64)> = Default::default();
            for (k, &(start, n)) in psd_blocks.iter().enumerate() {
                let mut r = start;
                for col in 0..n {
                    for rr in 0..=col {
                        let scale = if rr == col { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
                        row_of.insert(r, (k, col, rr, scale));
                        r += 1;
                    }
                }
            }
            for &(r, c, v) in &self.a {
                if let Some(&(k, i, j, s)) = row_of.get(&r) {
                    hcoord.push(format!("{k} {c} {i} {j} {:e}", -v * s));
                }
            }
            for (&r, &(k, i, j, s)) in &row_of {
                if self.b[r] != 0.0 {
                    dcoord.push(format!("{k} {i} {j} {:e}", self.b[r] * s));
                }
            }
            hcoord.sort();
            dcoord.sort();
            let _ = writeln!(out, "\nHCOORD\n{}", hcoord.len());
            for l in &hcoord {
                let _ = writeln!(out, "{l}");
            }
            let _ = writeln!(out, "\nDCOORD\n{}", dcoord.len());
            for l in &dcoord {
                let _ = writeln!(out, "{l}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_epigraph() {
        // max t s.t. t ≤ ln x, x ≤ 2
        let mut p = ConicProgram::new();
        let t = p.add_var();
        let x = p.add_var();
        p.add_log_epigraph(t, &LinExpr::var(x));
        let mut cap = LinExpr::constant(2.0);
        cap.add_term(x, -1.0);
        p.add_nonneg(&cap);
        p.add_objective(&LinExpr::var(t), -1.0);
        let s = p.solve().unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.x[t] - 2f64.ln()).abs() < 1e-6);
        assert!((s.objective + 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn psd_triangle() {
        // min x11 + x22 s.t. x12 = 1, [[x11,x12],[x12,x22]] ⪰ 0 → 2
        let mut p = ConicProgram::new();
        let v = p.add_vars(3);
        let mut eq = LinExpr::constant(-1.0);
        eq.add_term(v.start + 1, 1.0);
        p.add_eq(&eq);
        let r2 = 2f64.sqrt();
        let entries = [
            LinExpr::var(v.start),
            LinExpr::var(v.start + 1).scaled(r2),
            LinExpr::var(v.start + 2),
        ];
        p.add_psd(2, &entries);
        p.add_objective(&LinExpr::var(v.start), 1.0);
        p.add_objective(&LinExpr::var(v.start + 2), 1.0);
        let s = p.solve().unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-6);
        let cbf = p.to_cbf();
        assert!(cbf.contains("PSDCON\n1\n2"));
    }

    #[test]
    fn infeasible_detected() {
        let mut p = ConicProgram::new();
        let x = p.add_var();
        let mut a = LinExpr::constant(-1.0);
        a.add_term(x, 1.0);
        p.add_nonneg(&a); // x ≥ 1
        let mut b = LinExpr::constant(0.0);
        b.add_term(x, -1.0);
        p.add_nonneg(&b); // x ≤ 0
        assert_eq!(p.solve().unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn same_program_same_answer() {
        let mut p = ConicProgram::new();
        let t = p.add_var();
        let x = p.add_var();
        let mut z = LinExpr::constant(1.0);
        z.add_term(x, 3.0);
        p.add_log_epigraph(t, &z);
        let mut cap = LinExpr::constant(5.0);
        cap.add_term(x, -1.0);
        p.add_nonneg(&cap);
        p.add_objective(&LinExpr::var(t), -1.0);
        let a = p.solve().unwrap();
        let b = p.solve().unwrap();
        assert!((a.objective - b.objective).abs() < 1e-8);
    }
}
