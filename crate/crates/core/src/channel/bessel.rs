//! Bessel functions of the first kind for the satellite beam pattern.
//!
//! Ascending series below [`SERIES_LIMIT`], Hankel asymptotic expansion
//! above it.

use std::f64::consts::PI;

/// Series/asymptotic switch point. The series loses about `x / ln 10`
/// digits to cancellation; at 12 that is under four.
pub const SERIES_LIMIT: f64 = 12.0;

/// `J_n(x)` for integer order `n ≥ 0`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 1 { -v } else { v };
    }
    if x < SERIES_LIMIT {
        (x / 2.0).powi(n as i32) * reduced_series(n, x)
    } else {
        hankel_asymptotic(n, x)
    }
}

/// `Σ_k (-1)^k (x/2)^{2k} / (k! (k+n)!)`, i.e. `J_n(x) / (x/2)^n`.
/// Finite at `x = 0`, which the beam pattern relies on.
pub fn reduced_series(n: u32, x: f64) -> f64 {
    let q = (x / 2.0) * (x / 2.0);
    let mut term = 1.0 / factorial(n);
    let mut sum = term;
    for k in 1..200u32 {
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn hankel_asymptotic(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let chi = x - (n as f64 / 2.0 + 0.25) * PI;
    // a_k / x^k with a_k = Π_{i=1..k} (mu - (2i-1)^2) / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..40u32 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from standard tables (Abramowitz & Stegun 9.1).
    #[test]
    fn table_values() {
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_j(3, 2.0) - 0.128_943_249_474_402).abs() < 1e-13);
        assert!((bessel_j(1, 10.0) - 0.043_472_746_168_861_44).abs() < 1e-12);
    }

    #[test]
    fn branches_agree_at_switch() {
        for n in [1, 3] {
            let a = (SERIES_LIMIT / 2.0).powi(n as i32) * reduced_series(n, SERIES_LIMIT);
            let b = hankel_asymptotic(n, SERIES_LIMIT);
            assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
        }
    }
}
