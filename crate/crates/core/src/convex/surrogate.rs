//! First-order surrogates used by the successive convex approximation.

use crate::error::Result;
use crate::linalg::{outer, top_eig, trace_re, CMat, CVec};

/// Tangent of `e^u` at `point`; a global minorant because `e^u` is convex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTangent {
    pub point: f64,
}

impl ExpTangent {
    pub fn new(point: f64) -> Self {
        Self { point }
    }

    pub fn value(&self, u: f64) -> f64 {
        self.point.exp() * (u - self.point + 1.0)
    }
}

/// Linearization of the top eigenvalue at an anchor matrix:
/// `η̄(X) = Tr(θθᴴ(X − X_t)) + η(X_t) = θᴴXθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigTangent {
    pub theta: CVec,
    pub eta: f64,
}

impl EigTangent {
    pub fn at(anchor: &CMat) -> Result<Self> {
        let (eta, theta) = top_eig(anchor)?;
        Ok(Self { theta, eta })
    }

    pub fn value(&self, x: &CMat) -> f64 {
        self.theta.dotc(&(x * &self.theta)).re
    }

    /// `I − θθᴴ`: the matrix whose trace pairing gives `Tr X − η̄(X)`.
    pub fn penalty_matrix(&self) -> CMat {
        let n = self.theta.len();
        CMat::identity(n, n) - outer(&self.theta)
    }

    pub fn penalty(&self, x: &CMat) -> f64 {
        trace_re(x) - self.value(x)
    }
}

/// `F̄(X; anchor)` summed over a set of matrices and their tangents.
pub fn penalty_surrogate<'a>(mats: impl Iterator<Item = &'a CMat>, tangents: &[EigTangent]) -> f64 {
    mats.zip(tangents).map(|(m, t)| t.penalty(m)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CMat};
    use proptest::prelude::*;

    fn psd_from(entries: &[f64], n: usize) -> CMat {
        let a = CMat::from_fn(n, n, |i, j| c(entries[2 * (i * n + j)], entries[2 * (i * n + j) + 1]));
        &a * a.adjoint()
    }

    #[test]
    fn exp_tangent_minorant_on_grid() {
        for &ut in &[-3.0, 0.0, 1.7, 12.0] {
            let t = ExpTangent::new(ut);
            assert_eq!(t.value(ut), f64::exp(ut));
            for k in 0..=200 {
                let u = ut - 5.0 + 10.0 * k as f64 / 200.0;
                assert!(t.value(u) <= u.exp() * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn eig_tangent_exact_at_anchor() {
        let x = psd_from(&(0..32).map(|i| (i as f64 * 0.37).sin()).collect::<Vec<_>>(), 4);
        let t = EigTangent::at(&x).unwrap();
        assert!((t.value(&x) - t.eta).abs() < 1e-10 * t.eta);
        let f = trace_re(&x) - t.eta;
        assert!((t.penalty(&x) - f).abs() < 1e-10 * trace_re(&x));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn eig_tangent_underestimates(a in proptest::collection::vec(-1.0f64..1.0, 32),
                                      b in proptest::collection::vec(-1.0f64..1.0, 32)) {
            let anchor = psd_from(&a, 4);
            let x = psd_from(&b, 4);
            let t = EigTangent::at(&anchor).unwrap();
            let (eta_x, _) = top_eig(&x).unwrap();
            prop_assert!(t.value(&x) <= eta_x + 1e-9);
            // hence F̄(X; anchor) ≥ F(X)
            prop_assert!(t.penalty(&x) >= trace_re(&x) - eta_x - 1e-9);
        }
    }
}
