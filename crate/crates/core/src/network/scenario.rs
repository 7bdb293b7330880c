use serde::{Deserialize, Serialize};

use crate::channel::{FadingParams, GeometryConfig};
use crate::error::{Error, Result};

/// Spectrum sharing architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Mode {
    /// Aerial user protected by a rate floor; terrestrial sum rate maximized.
    #[serde(rename = "HCSSA", alias = "hcssa")]
    Hcssa,
    /// Aerial and terrestrial rates summed; no aerial floor.
    #[serde(rename = "TCSSA", alias = "tcssa")]
    Tcssa,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Hcssa => "HCSSA",
            Mode::Tcssa => "TCSSA",
        }
    }

    /// Weight of the aerial rate in the objective.
    pub fn aerial_weight(self) -> f64 {
        match self {
            Mode::Hcssa => 0.0,
            Mode::Tcssa => 1.0,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HCSSA" => Ok(Mode::Hcssa),
            "TCSSA" => Ok(Mode::Tcssa),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

/// Full static description of one network scenario.
///
/// Powers are in W, rates in bps/Hz, angles in degrees. The interference
/// temperature is configured in mW and converted by [`Self::interference_cap_w`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Mode,
    #[serde(rename = "N")]
    pub n_cells: usize,
    #[serde(rename = "K_n")]
    pub terminals_per_cell: Vec<usize>,
    #[serde(rename = "M_S")]
    pub m_s: usize,
    #[serde(rename = "M_A")]
    pub m_a: usize,
    #[serde(rename = "M_G")]
    pub m_g: usize,
    /// Interference temperature of the satellite terminal, mW.
    #[serde(rename = "I_S")]
    pub interference_temp_mw: f64,
    /// Per-cell terrestrial BS power budgets.
    #[serde(rename = "p_n")]
    pub bs_power: Vec<f64>,
    /// Aerial BS power budget. `p_0` is accepted as an alias.
    #[serde(rename = "q", alias = "p_0")]
    pub aerial_power: f64,
    /// Aerial rate floor.
    #[serde(rename = "R_A")]
    pub aerial_rate_floor: f64,
    pub p_s: f64,
    /// Boltzmann constant, J/K.
    pub kappa_bar: f64,
    /// Noise temperature, K.
    #[serde(rename = "T")]
    pub noise_temp_k: f64,
    /// Bandwidth, Hz.
    #[serde(rename = "B")]
    pub bandwidth_hz: f64,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub fading: FadingParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let bs = vec![[-250.0, 0.0, 0.0], [250.0, 0.0, 0.0]];
        let terminals = vec![
            vec![[-130.0, 80.0, 0.0], [-310.0, -150.0, 0.0]],
            vec![[340.0, -110.0, 0.0], [110.0, 100.0, 0.0]],
        ];
        Self {
            mode: Mode::Hcssa,
            n_cells: 2,
            terminals_per_cell: vec![2, 2],
            m_s: 7,
            m_a: 8,
            m_g: 8,
            interference_temp_mw: 2e-12,
            bs_power: vec![60.0, 60.0],
            aerial_power: 60.0,
            aerial_rate_floor: 3.0,
            p_s: 40.0,
            kappa_bar: 1.38e-23,
            noise_temp_k: 300.0,
            bandwidth_hz: 0.5e6,
            geometry: GeometryConfig {
                satellite: [0.0, 0.0, 3.5786e7],
                aerial_bs: [0.0, 0.0, 0.0],
                aerial_user: [1000.0, 500.0, 10_000.0],
                sat_terminal: [0.0, 1000.0, 0.0],
                terrestrial_bs: bs,
                terminals,
                carrier_ghz: 18.0,
                sep_ratio: 0.5,
                phi_sat_terminal_deg: 0.01,
                phi_aerial_user_deg: 0.4,
                phi_terminals_deg: vec![vec![0.8, 0.8], vec![0.8, 0.8]],
            },
            fading: FadingParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_cells == 0 || self.terminals_per_cell.len() != self.n_cells {
            return cfg("K_n must list one terminal count per cell");
        }
        if self.terminals_per_cell.contains(&0) {
            return cfg("every cell needs at least one terminal");
        }
        if self.bs_power.len() != self.n_cells {
            return cfg("p_n must list one budget per cell");
        }
        if self.m_s == 0 || self.m_a == 0 || self.m_g == 0 {
            return cfg("antenna counts must be positive");
        }
        let positive = [
            self.interference_temp_mw,
            self.aerial_power,
            self.p_s,
            self.kappa_bar,
            self.noise_temp_k,
            self.bandwidth_hz,
        ];
        if positive.iter().chain(&self.bs_power).any(|&x| !(x > 0.0 && x.is_finite())) {
            return cfg("powers, thresholds and noise constants must be positive and finite");
        }
        if !(self.aerial_rate_floor >= 0.0 && self.aerial_rate_floor.is_finite()) {
            return cfg("R_A must be non-negative");
        }
        self.geometry
            .validate(&self.terminals_per_cell)
            .map_err(|e| Error::Config(e.to_string()))?;
        self.fading.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let sc: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// σ² = κ̄ T B.
    pub fn noise_power(&self) -> f64 {
        self.kappa_bar * self.noise_temp_k * self.bandwidth_hz
    }

    /// β̄ = 2^{R̄_A} − 1.
    pub fn beta_bar(&self) -> f64 {
        self.aerial_rate_floor.exp2() - 1.0
    }

    /// Ī_S in W.
    pub fn interference_cap_w(&self) -> f64 {
        self.interference_temp_mw * 1e-3
    }

    pub fn total_terminals(&self) -> usize {
        self.terminals_per_cell.iter().sum()
    }

    /// Cell of each flat terminal index.
    pub fn terminal_cells(&self) -> Vec<usize> {
        self.terminals_per_cell
            .iter()
            .enumerate()
            .flat_map(|(n, &k)| std::iter::repeat_n(n, k))
            .collect()
    }

    /// Flat index of terminal `k` in cell `n`.
    pub fn flat_index(&self, n: usize, k: usize) -> usize {
        self.terminals_per_cell[..n].iter().sum::<usize>() + k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_noise_and_beta() {
        let sc = ScenarioConfig::default();
        assert!((sc.noise_power() - 2.07e-15).abs() < 1e-20);
        assert!((sc.beta_bar() - 7.0).abs() < 1e-12);
        assert!(((1.0 + sc.beta_bar()).log2() - sc.aerial_rate_floor).abs() < 1e-12);
        assert!((sc.interference_cap_w() - 2e-15).abs() < 1e-27);
        sc.validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let sc = ScenarioConfig::default();
        let text = sc.to_toml_string().unwrap();
        assert!(text.contains("K_n"));
        assert!(text.contains("I_S"));
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(sc, back);
    }

    #[test]
    fn p0_alias_is_accepted() {
        let text = ScenarioConfig::default().to_toml_string().unwrap().replace("\nq = ", "\np_0 = ");
        let sc = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(sc.aerial_power, 60.0);
    }

    #[test]
    fn rejects_inconsistent_counts() {
        let mut sc = ScenarioConfig::default();
        sc.bs_power.pop();
        assert!(sc.validate().is_err());
        let mut sc = ScenarioConfig::default();
        sc.interference_temp_mw = 0.0;
        assert!(sc.validate().is_err());
    }
}
