use std::f64::consts::PI;

use num_complex::Complex64;

use super::bessel::{bessel_j, reduced_series, SERIES_LIMIT};
use crate::error::{invalid, Result};
use crate::linalg::CVec;

/// Uniform linear array response: entry `i` is `exp(j 2π (d̄/λ) i sin(angle))`.
pub fn steering_vector(angle: f64, dim: usize, sep_ratio: f64) -> Result<CVec> {
    if dim == 0 {
        return Err(invalid("steering vector dimension must be at least 1"));
    }
    let step = 2.0 * PI * sep_ratio * angle.sin();
    Ok(CVec::from_fn(dim, |i, _| Complex64::from_polar(1.0, step * i as f64)))
}

fn check_link(d: f64, f: f64) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid(format!("distance must be positive, got {d}")));
    }
    if !(f > 0.0 && f.is_finite()) {
        return Err(invalid(format!("carrier frequency must be positive, got {f}")));
    }
    Ok(())
}

/// LoS path loss in dB for distance `d` (m) and carrier `f` (GHz).
pub fn los_path_loss_db(d: f64, f: f64) -> Result<f64> {
    check_link(d, f)?;
    Ok(28.0 + 22.0 * d.log10() + 20.0 * f.log10())
}

/// NLoS path loss in dB for distance `d` (m) and carrier `f` (GHz).
pub fn nlos_path_loss_db(d: f64, f: f64) -> Result<f64> {
    check_link(d, f)?;
    Ok(22.7 + 36.7 * d.log10() + 26.0 * f.log10())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Satellite beam pattern `b_max (J1(u)/(2u) + 36 J3(u)/u³)²` with
/// `u = 2.07123 sin φ / sin φ_3dB`; angles in degrees, gain linear.
/// Evaluated through the reduced series near the beam centre so `φ = 0`
/// returns `b_max`.
pub fn beam_gain(phi_deg: f64, phi_3db_deg: f64, b_max: f64) -> Result<f64> {
    if !(phi_deg >= 0.0) {
        return Err(invalid(format!("beam angle must be non-negative, got {phi_deg}")));
    }
    if !(phi_3db_deg > 0.0) {
        return Err(invalid(format!("3-dB angle must be positive, got {phi_3db_deg}")));
    }
    let u = 2.07123 * phi_deg.to_radians().sin() / phi_3db_deg.to_radians().sin();
    let bracket = if u.abs() < SERIES_LIMIT {
        // J1(u)/(2u) = S1/4, 36 J3(u)/u³ = 36 S3/8
        reduced_series(1, u) / 4.0 + 4.5 * reduced_series(3, u)
    } else {
        bessel_j(1, u) / (2.0 * u) + 36.0 * bessel_j(3, u) / (u * u * u)
    };
    Ok(b_max * bracket * bracket)
}

/// Sine of the departure angle from a ULA laid along the x axis at `from`
/// towards `to`.
pub fn array_angle(from: [f64; 3], to: [f64; 3]) -> Result<f64> {
    let d = distance(from, to)?;
    Ok(((to[0] - from[0]) / d).clamp(-1.0, 1.0).asin())
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> Result<f64> {
    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    if d > 0.0 {
        Ok(d)
    } else {
        Err(invalid(format!("coincident positions {a:?} and {b:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steering_examples() {
        let a = steering_vector(0.0, 4, 0.5).unwrap();
        assert!(a.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));

        let a = steering_vector(PI / 2.0, 2, 0.5).unwrap();
        assert!((a[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);

        let a = steering_vector(PI / 6.0, 3, 0.5).unwrap();
        let phases: Vec<f64> = a.iter().map(|z| z.arg()).collect();
        assert!(phases[0].abs() < 1e-12);
        assert!((phases[1] - PI / 2.0).abs() < 1e-12);
        assert!((phases[2].abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn steering_rejects_zero_dim() {
        assert!(steering_vector(0.3, 0, 0.5).is_err());
    }

    #[test]
    fn path_loss_examples() {
        assert!((los_path_loss_db(1.0, 1.0).unwrap() - 28.0).abs() < 1e-12);
        assert!((los_path_loss_db(10_000.0, 18.0).unwrap() - 141.105).abs() < 1e-3);
        assert!((los_path_loss_db(100.0, 18.0).unwrap() - 97.105).abs() < 1e-3);
        assert!((nlos_path_loss_db(1.0, 1.0).unwrap() - 22.7).abs() < 1e-12);
        assert!((nlos_path_loss_db(100.0, 18.0).unwrap() - 128.737).abs() < 1e-3);
        assert!((nlos_path_loss_db(1000.0, 18.0).unwrap() - 165.437).abs() < 1e-3);
        assert!(los_path_loss_db(0.0, 1.0).is_err());
        assert!(nlos_path_loss_db(1.0, -2.0).is_err());
    }

    #[test]
    fn beam_gain_centre_and_falloff() {
        let bmax = db_to_linear(52.1);
        assert_eq!(beam_gain(0.0, 0.4, bmax).unwrap(), bmax);
        let near = beam_gain(0.01, 0.4, bmax).unwrap() / bmax;
        assert!((0.998..=1.0).contains(&near), "{near}");
        let edge = beam_gain(0.4, 0.4, bmax).unwrap();
        let outer = beam_gain(0.8, 0.4, bmax).unwrap();
        assert!(outer < edge);
        assert!(beam_gain(-0.1, 0.4, bmax).is_err());
        assert!(beam_gain(0.1, 0.0, bmax).is_err());
    }

    #[test]
    fn beam_gain_three_db_point() {
        // the 2.07123 constant places the half-power point at φ_3dB
        let g = beam_gain(0.4, 0.4, 1.0).unwrap();
        assert!((linear_to_db(g) + 3.0).abs() < 0.05, "{}", linear_to_db(g));
    }
}
