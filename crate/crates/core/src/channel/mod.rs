//! Channel models: array geometry, path loss, satellite beam pattern and
//! seeded sampling of every link in the network.

pub mod bessel;
pub mod geometry;
pub mod sampling;

use serde::{Deserialize, Serialize};

pub use geometry::{beam_gain, los_path_loss_db, nlos_path_loss_db, steering_vector};
pub use sampling::{sample_rayleigh, sample_rician, sample_shadowed_rician, Link, SeedState};

use crate::error::{invalid, Result};
use crate::linalg::{norm2_sq, CVec};
use crate::network::ScenarioConfig;

/// Node positions (metres), carrier and beam angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub satellite: [f64; 3],
    pub aerial_bs: [f64; 3],
    pub aerial_user: [f64; 3],
    pub sat_terminal: [f64; 3],
    /// One entry per cell.
    pub terrestrial_bs: Vec<[f64; 3]>,
    /// `terminals[n][k]`: terminal `k` of cell `n`.
    pub terminals: Vec<Vec<[f64; 3]>>,
    pub carrier_ghz: f64,
    /// Antenna separation over wavelength, d̄/λ.
    pub sep_ratio: f64,
    pub phi_sat_terminal_deg: f64,
    pub phi_aerial_user_deg: f64,
    /// `phi_terminals_deg[n][k]`
    pub phi_terminals_deg: Vec<Vec<f64>>,
}

impl GeometryConfig {
    pub fn validate(&self, terminals_per_cell: &[usize]) -> Result<()> {
        if self.terrestrial_bs.len() != terminals_per_cell.len() {
            return Err(invalid("one terrestrial BS position per cell is required"));
        }
        if self.terminals.len() != terminals_per_cell.len()
            || self.terminals.iter().zip(terminals_per_cell).any(|(t, &k)| t.len() != k)
        {
            return Err(invalid("terminal positions do not match K_n"));
        }
        if self.phi_terminals_deg.len() != terminals_per_cell.len()
            || self.phi_terminals_deg.iter().zip(terminals_per_cell).any(|(t, &k)| t.len() != k)
        {
            return Err(invalid("terminal beam angles do not match K_n"));
        }
        if !(self.sep_ratio > 0.0) {
            return Err(invalid("antenna separation ratio must be positive"));
        }
        if !(self.carrier_ghz > 0.0) {
            return Err(invalid("carrier frequency must be positive"));
        }
        let angles = [self.phi_sat_terminal_deg, self.phi_aerial_user_deg];
        if angles.iter().chain(self.phi_terminals_deg.iter().flatten()).any(|&a| !(a >= 0.0)) {
            return Err(invalid("beam angles must be non-negative"));
        }
        let receivers: Vec<[f64; 3]> = [self.sat_terminal, self.aerial_user]
            .into_iter()
            .chain(self.terminals.iter().flatten().copied())
            .collect();
        let transmitters: Vec<[f64; 3]> = [self.satellite, self.aerial_bs]
            .into_iter()
            .chain(self.terrestrial_bs.iter().copied())
            .collect();
        for tx in &transmitters {
            for rx in &receivers {
                geometry::distance(*tx, *rx)?;
            }
        }
        Ok(())
    }
}

/// Fading constants. Defaults are the reference simulation values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FadingParams {
    /// Rician factor κ (linear).
    pub kappa: f64,
    /// Shadowed-Rician LoS power Ω.
    pub sr_omega: f64,
    /// Shadowed-Rician half scatter power b.
    pub sr_b: f64,
    /// Nakagami-m parameter.
    pub sr_m: f64,
    pub b_max_db: f64,
    pub phi_3db_deg: f64,
}

impl Default for FadingParams {
    fn default() -> Self {
        Self { kappa: 10.0, sr_omega: 0.835, sr_b: 0.126, sr_m: 10.0, b_max_db: 52.1, phi_3db_deg: 0.4 }
    }
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(invalid("Rician factor must be positive"));
        }
        if !(self.sr_omega > 0.0 && self.sr_b > 0.0 && self.sr_m >= 1.0) {
            return Err(invalid("shadowed-Rician parameters need Ω > 0, b > 0, m ≥ 1"));
        }
        if !(self.phi_3db_deg > 0.0) {
            return Err(invalid("3-dB angle must be positive"));
        }
        Ok(())
    }
}

/// One random draw of every channel in the network. Terminal-indexed
/// vectors use the flat terminal index (cell-major).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub seed: SeedState,
    /// BS n → satellite terminal, `M_G`.
    pub h_sat: Vec<CVec>,
    /// BS n → aerial user, `M_G`.
    pub h_aerial: Vec<CVec>,
    /// `h[n][j]`: BS n → terminal j, `M_G`.
    pub h: Vec<Vec<CVec>>,
    /// Aerial BS → satellite terminal, `M_A`.
    pub g_sat: CVec,
    /// Aerial BS → aerial user, `M_A`.
    pub g_aerial: CVec,
    /// Aerial BS → terminal j, `M_A`.
    pub g: Vec<CVec>,
    /// Satellite → aerial user, `M_S`.
    pub f_aerial: CVec,
    /// Satellite → terminal j, `M_S`.
    pub f: Vec<CVec>,
    /// Satellite → satellite terminal, `M_S`.
    pub f_sat: CVec,
    /// Fixed satellite beamformer, `‖u‖² = p_s`.
    pub u_sat: CVec,
}

/// Draws a full realization: Rician for links to the aerial user, Rayleigh
/// for ground receivers of the BSs, shadowed-Rician for satellite links.
pub fn draw_realization(seed: SeedState, scenario: &ScenarioConfig) -> Result<ChannelRealization> {
    scenario.validate()?;
    let geo = &scenario.geometry;
    let fad = &scenario.fading;
    let f = geo.carrier_ghz;
    let terminals: Vec<[f64; 3]> = geo.terminals.iter().flatten().copied().collect();
    let phis: Vec<f64> = geo.phi_terminals_deg.iter().flatten().copied().collect();
    let dist = geometry::distance;

    let mut h_sat = Vec::with_capacity(scenario.n_cells);
    let mut h_aerial = Vec::with_capacity(scenario.n_cells);
    let mut h = Vec::with_capacity(scenario.n_cells);
    for (n, &bs) in geo.terrestrial_bs.iter().enumerate() {
        h_sat.push(sample_rayleigh(
            &mut seed.rng(Link::BsToSatTerminal(n)),
            scenario.m_g,
            dist(bs, geo.sat_terminal)?,
            f,
        )?);
        let los = steering_vector(geometry::array_angle(bs, geo.aerial_user)?, scenario.m_g, geo.sep_ratio)?;
        h_aerial.push(sample_rician(
            &mut seed.rng(Link::BsToAerialUser(n)),
            &los,
            dist(bs, geo.aerial_user)?,
            f,
            fad.kappa,
        )?);
        let row = terminals
            .iter()
            .enumerate()
            .map(|(j, &rx)| {
                sample_rayleigh(&mut seed.rng(Link::BsToTerminal { bs: n, terminal: j }), scenario.m_g, dist(bs, rx)?, f)
            })
            .collect::<Result<Vec<_>>>()?;
        h.push(row);
    }

    let g_sat = sample_rayleigh(
        &mut seed.rng(Link::AerialBsToSatTerminal),
        scenario.m_a,
        dist(geo.aerial_bs, geo.sat_terminal)?,
        f,
    )?;
    let los = steering_vector(geometry::array_angle(geo.aerial_bs, geo.aerial_user)?, scenario.m_a, geo.sep_ratio)?;
    let g_aerial = sample_rician(
        &mut seed.rng(Link::AerialBsToAerialUser),
        &los,
        dist(geo.aerial_bs, geo.aerial_user)?,
        f,
        fad.kappa,
    )?;
    let g = terminals
        .iter()
        .enumerate()
        .map(|(j, &rx)| sample_rayleigh(&mut seed.rng(Link::AerialBsToTerminal(j)), scenario.m_a, dist(geo.aerial_bs, rx)?, f))
        .collect::<Result<Vec<_>>>()?;

    let f_aerial = sample_shadowed_rician(
        &mut seed.rng(Link::SatToAerialUser),
        scenario.m_s,
        dist(geo.satellite, geo.aerial_user)?,
        f,
        geo.phi_aerial_user_deg,
        fad,
    )?;
    let f_term = terminals
        .iter()
        .zip(&phis)
        .enumerate()
        .map(|(j, (&rx, &phi))| {
            sample_shadowed_rician(&mut seed.rng(Link::SatToTerminal(j)), scenario.m_s, dist(geo.satellite, rx)?, f, phi, fad)
        })
        .collect::<Result<Vec<_>>>()?;
    let f_sat = sample_shadowed_rician(
        &mut seed.rng(Link::SatToSatTerminal),
        scenario.m_s,
        dist(geo.satellite, geo.sat_terminal)?,
        f,
        geo.phi_sat_terminal_deg,
        fad,
    )?;
    let u_sat = f_sat.map(|z| z * (scenario.p_s / norm2_sq(&f_sat)).sqrt());

    Ok(ChannelRealization { seed, h_sat, h_aerial, h, g_sat, g_aerial, g, f_aerial, f: f_term, f_sat, u_sat })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_dimensions_and_satellite_power() {
        let sc = ScenarioConfig::default();
        let ch = draw_realization(SeedState::new(5, 0), &sc).unwrap();
        assert_eq!(ch.h_aerial[0].len(), 8);
        assert_eq!(ch.g_aerial.len(), 8);
        assert_eq!(ch.f_aerial.len(), 7);
        assert_eq!(ch.h.len(), 2);
        assert_eq!(ch.h[1].len(), 4);
        assert_eq!(ch.g.len(), 4);
        let p = norm2_sq(&ch.u_sat);
        assert!((p / 40.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn realization_is_deterministic() {
        let sc = ScenarioConfig::default();
        let a = draw_realization(SeedState::new(9, 2), &sc).unwrap();
        let b = draw_realization(SeedState::new(9, 2), &sc).unwrap();
        assert_eq!(a, b);
        let c = draw_realization(SeedState::new(9, 3), &sc).unwrap();
        assert_ne!(a, c);
    }
}
