//! Seeded random channel draws.
//!
//! Every link gets its own ChaCha8 stream keyed by `(master seed, trial,
//! link)`, so a realization does not depend on the order links are drawn
//! in or on which worker thread draws it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::geometry::{db_to_linear, los_path_loss_db, nlos_path_loss_db};
use super::FadingParams;
use crate::error::{invalid, Result};
use crate::linalg::CVec;

/// Identifies one random stream within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    BsToSatTerminal(usize),
    BsToAerialUser(usize),
    BsToTerminal { bs: usize, terminal: usize },
    AerialBsToSatTerminal,
    AerialBsToAerialUser,
    AerialBsToTerminal(usize),
    SatToAerialUser,
    SatToTerminal(usize),
    SatToSatTerminal,
    /// Free-form stream for algorithm randomness (initial points etc).
    Aux(u32),
}

impl Link {
    fn code(self) -> u64 {
        let (tag, a, b): (u64, u64, u64) = match self {
            Link::BsToSatTerminal(n) => (1, n as u64, 0),
            Link::BsToAerialUser(n) => (2, n as u64, 0),
            Link::BsToTerminal { bs, terminal } => (3, bs as u64, terminal as u64),
            Link::AerialBsToSatTerminal => (4, 0, 0),
            Link::AerialBsToAerialUser => (5, 0, 0),
            Link::AerialBsToTerminal(j) => (6, j as u64, 0),
            Link::SatToAerialUser => (7, 0, 0),
            Link::SatToTerminal(j) => (8, j as u64, 0),
            Link::SatToSatTerminal => (9, 0, 0),
            Link::Aux(k) => (10, k as u64, 0),
        };
        (tag << 56) | (a << 28) | b
    }
}

/// The `(master seed, trial)` key from which all per-link streams derive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SeedState {
    pub master: u64,
    pub trial: u64,
}

impl SeedState {
    pub fn new(master: u64, trial: u64) -> Self {
        Self { master, trial }
    }

    pub fn rng(&self, link: Link) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let words = [
            splitmix(self.master),
            splitmix(self.master ^ 0x9e37_79b9_7f4a_7c15),
            splitmix(self.trial.wrapping_add(0x6a09_e667_f3bc_c909)),
            splitmix(self.trial ^ self.master.rotate_left(17)),
        ];
        for (i, w) in words.iter().enumerate() {
            key[8 * i..8 * i + 8].copy_from_slice(&w.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(link.code());
        rng
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One `CN(0, 1)` draw.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Rician vector `sqrt(L⁻¹)(sqrt(κ/(1+κ)) a + sqrt(1/(1+κ)) n)`; `κ = ∞`
/// gives the pure LoS term.
pub fn sample_rician<R: Rng + ?Sized>(
    rng: &mut R,
    los_direction: &CVec,
    d: f64,
    f: f64,
    kappa: f64,
) -> Result<CVec> {
    if !(kappa > 0.0) {
        return Err(invalid(format!("Rician factor must be positive, got {kappa}")));
    }
    let gain = (1.0 / db_to_linear(los_path_loss_db(d, f)?)).sqrt();
    let (w_los, w_nlos) = if kappa.is_infinite() {
        (1.0, 0.0)
    } else {
        ((kappa / (1.0 + kappa)).sqrt(), (1.0 / (1.0 + kappa)).sqrt())
    };
    let mut out = los_direction.map(|z| z * w_los);
    if w_nlos > 0.0 {
        for z in out.iter_mut() {
            *z += complex_gaussian(rng) * w_nlos;
        }
    }
    Ok(out.map(|z| z * gain))
}

/// Rayleigh vector `sqrt(L_NLoS⁻¹) n`, `n ~ CN(0, I)`.
pub fn sample_rayleigh<R: Rng + ?Sized>(rng: &mut R, dim: usize, d: f64, f: f64) -> Result<CVec> {
    if dim == 0 {
        return Err(invalid("channel dimension must be at least 1"));
    }
    let gain = (1.0 / db_to_linear(nlos_path_loss_db(d, f)?)).sqrt();
    Ok(CVec::from_fn(dim, |_, _| complex_gaussian(rng) * gain))
}

/// One shadowed-Rician fading coefficient: Nakagami-m LoS amplitude with
/// mean power Ω and uniform phase, plus `CN(0, 2b)` scatter.
pub fn shadowed_rician_entry<R: Rng + ?Sized>(rng: &mut R, params: &FadingParams) -> Complex64 {
    let amp = if params.sr_m.is_infinite() {
        params.sr_omega.sqrt()
    } else {
        let gamma = Gamma::new(params.sr_m, params.sr_omega / params.sr_m)
            .expect("validated shadowed-Rician parameters");
        gamma.sample(rng).sqrt()
    };
    let phase = rng.random::<f64>() * 2.0 * PI;
    Complex64::from_polar(amp, phase) + complex_gaussian(rng) * (2.0 * params.sr_b).sqrt()
}

/// Satellite vector `sqrt(L_LoS⁻¹ b(φ)) f̃` with i.i.d. shadowed-Rician entries.
pub fn sample_shadowed_rician<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    d: f64,
    f: f64,
    phi_deg: f64,
    params: &FadingParams,
) -> Result<CVec> {
    if dim == 0 {
        return Err(invalid("channel dimension must be at least 1"));
    }
    params.validate()?;
    let gain = super::geometry::beam_gain(phi_deg, params.phi_3db_deg, db_to_linear(params.b_max_db))?;
    let scale = (gain / db_to_linear(los_path_loss_db(d, f)?)).sqrt();
    Ok(CVec::from_fn(dim, |_, _| shadowed_rician_entry(rng, params) * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::geometry::steering_vector;

    fn power_mean(draws: impl Iterator<Item = f64>, n: usize) -> f64 {
        draws.take(n).sum::<f64>() / n as f64
    }

    #[test]
    fn rician_second_moment() {
        let mut rng = SeedState::new(7, 0).rng(Link::Aux(0));
        let a = steering_vector(0.3, 1, 0.5).unwrap();
        let expected = 1.0 / db_to_linear(los_path_loss_db(100.0, 18.0).unwrap());
        let m = power_mean(
            std::iter::repeat_with(|| sample_rician(&mut rng, &a, 100.0, 18.0, 10.0).unwrap()[0].norm_sqr()),
            100_000,
        );
        assert!((m / expected - 1.0).abs() < 0.02, "{}", m / expected);
    }

    #[test]
    fn rician_infinite_kappa_is_pure_los() {
        let mut rng = SeedState::new(1, 1).rng(Link::Aux(0));
        let a = steering_vector(0.7, 4, 0.5).unwrap();
        let h = sample_rician(&mut rng, &a, 50.0, 2.0, f64::INFINITY).unwrap();
        let g = (1.0 / db_to_linear(los_path_loss_db(50.0, 2.0).unwrap())).sqrt();
        for (x, y) in h.iter().zip(a.iter()) {
            assert_eq!(*x, *y * g);
        }
    }

    #[test]
    fn rayleigh_unit_link_variance() {
        let mut rng = SeedState::new(3, 0).rng(Link::Aux(1));
        let m = power_mean(
            std::iter::repeat_with(|| sample_rayleigh(&mut rng, 1, 1.0, 1.0).unwrap()[0].norm_sqr()),
            100_000,
        );
        let expected = 10f64.powf(-2.27);
        assert!((m / expected - 1.0).abs() < 0.02, "{}", m / expected);
    }

    #[test]
    fn shadowed_rician_power_identity() {
        let params = FadingParams::default();
        let mut rng = SeedState::new(11, 0).rng(Link::Aux(2));
        let m = power_mean(
            std::iter::repeat_with(|| shadowed_rician_entry(&mut rng, &params).norm_sqr()),
            100_000,
        );
        assert!((m / 1.087 - 1.0).abs() < 0.02, "{m}");
    }

    #[test]
    fn nakagami_limit_is_deterministic_amplitude() {
        let params = FadingParams { sr_m: f64::INFINITY, sr_b: 0.0, ..FadingParams::default() };
        let mut rng = SeedState::new(0, 0).rng(Link::Aux(3));
        for _ in 0..10 {
            let z = shadowed_rician_entry(&mut rng, &params);
            assert!((z.norm() - params.sr_omega.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = SeedState::new(42, 3);
        let a = sample_rayleigh(&mut s.rng(Link::BsToAerialUser(0)), 4, 10.0, 2.0).unwrap();
        let b = sample_rayleigh(&mut s.rng(Link::BsToAerialUser(0)), 4, 10.0, 2.0).unwrap();
        let c = sample_rayleigh(&mut s.rng(Link::BsToAerialUser(1)), 4, 10.0, 2.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
