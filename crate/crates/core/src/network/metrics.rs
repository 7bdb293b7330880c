//! Vector-domain SINR, rate, interference and constraint evaluation.

use serde::{Deserialize, Serialize};

use super::{Mode, ScenarioConfig};
use crate::channel::ChannelRealization;
use crate::error::{invalid, Result};
use crate::linalg::{abs2_inner, norm2_sq, CVec};

/// Relative tolerance for every feasibility check.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Beamforming decision: aerial vector `v` and one terrestrial vector per
/// terminal (flat index).
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    pub v: CVec,
    pub w: Vec<CVec>,
}

impl BeamformerSet {
    pub fn zeros(sc: &ScenarioConfig) -> Self {
        Self { v: CVec::zeros(sc.m_a), w: vec![CVec::zeros(sc.m_g); sc.total_terminals()] }
    }

    pub fn check_dims(&self, sc: &ScenarioConfig) -> Result<()> {
        if self.v.len() != sc.m_a || self.w.len() != sc.total_terminals() || self.w.iter().any(|w| w.len() != sc.m_g) {
            return Err(invalid("beamformer dimensions do not match the scenario"));
        }
        if self.v.iter().chain(self.w.iter().flatten()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("beamformer entries must be finite"));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { v: self.v.map(|z| z * c), w: self.w.iter().map(|w| w.map(|z| z * c)).collect() }
    }
}

/// Noise plus satellite interference at every secondary receiver (W).
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveNoise {
    pub terminals: Vec<f64>,
    pub aerial: f64,
}

/// `σ̄² = σ² + |fᴴu|²` for each terminal and for the aerial user.
pub fn effective_noise(ch: &ChannelRealization, sigma2: f64) -> EffectiveNoise {
    EffectiveNoise {
        terminals: ch.f.iter().map(|f| sigma2 + abs2_inner(f, &ch.u_sat)).collect(),
        aerial: sigma2 + abs2_inner(&ch.f_aerial, &ch.u_sat),
    }
}

/// Received powers at terminal `j`: `(signal, interference excluding noise)`.
fn terminal_powers(cells: &[usize], ch: &ChannelRealization, bf: &BeamformerSet, j: usize) -> (f64, f64) {
    let mut interference = abs2_inner(&ch.g[j], &bf.v);
    let mut signal = 0.0;
    for (jp, w) in bf.w.iter().enumerate() {
        let p = abs2_inner(&ch.h[cells[jp]][j], w);
        if jp == j {
            signal = p;
        } else {
            interference += p;
        }
    }
    (signal, interference)
}

/// Linear SINR of terminal `j` (flat index).
pub fn terminal_sinr(sc: &ScenarioConfig, ch: &ChannelRealization, bf: &BeamformerSet, noise: &EffectiveNoise, j: usize) -> f64 {
    let (s, i) = terminal_powers(&sc.terminal_cells(), ch, bf, j);
    s / (noise.terminals[j] + i)
}

/// SINR of terminal `k` in cell `n`.
pub fn terrestrial_sinr(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    bf: &BeamformerSet,
    noise: &EffectiveNoise,
    n: usize,
    k: usize,
) -> f64 {
    terminal_sinr(sc, ch, bf, noise, sc.flat_index(n, k))
}

pub fn terminal_rates(sc: &ScenarioConfig, ch: &ChannelRealization, bf: &BeamformerSet, noise: &EffectiveNoise) -> Vec<f64> {
    (0..sc.total_terminals()).map(|j| (1.0 + terminal_sinr(sc, ch, bf, noise, j)).log2()).collect()
}

/// Aerial user SINR β.
pub fn aerial_sinr(sc: &ScenarioConfig, ch: &ChannelRealization, bf: &BeamformerSet, noise: &EffectiveNoise) -> f64 {
    let cells = sc.terminal_cells();
    let interference: f64 = bf.w.iter().enumerate().map(|(j, w)| abs2_inner(&ch.h_aerial[cells[j]], w)).sum();
    abs2_inner(&ch.g_aerial, &bf.v) / (noise.aerial + interference)
}

pub fn aerial_rate(sc: &ScenarioConfig, ch: &ChannelRealization, bf: &BeamformerSet, noise: &EffectiveNoise) -> f64 {
    (1.0 + aerial_sinr(sc, ch, bf, noise)).log2()
}

/// Interference received by the satellite terminal (W).
pub fn satellite_interference(sc: &ScenarioConfig, ch: &ChannelRealization, bf: &BeamformerSet) -> f64 {
    let cells = sc.terminal_cells();
    let terr: f64 = bf.w.iter().enumerate().map(|(j, w)| abs2_inner(&ch.h_sat[cells[j]], w)).sum();
    terr + abs2_inner(&ch.g_sat, &bf.v)
}

/// Slack of every constraint of the beamforming problem. Positive slack
/// means satisfied; each is relative to its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// `(Ī_S − I) / Ī_S`
    pub interference_slack: f64,
    /// `(p̄_n − Σ_k ‖w_{n,k}‖²) / p̄_n`
    pub bs_power_slack: Vec<f64>,
    /// `(q̄ − ‖v‖²) / q̄`
    pub aerial_power_slack: f64,
    /// `(β − β̄) / max(β̄, 1)`; `None` in TCSSA.
    pub rate_slack: Option<f64>,
    pub feasible: bool,
}

impl FeasibilityReport {
    pub fn violated(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.interference_slack < -FEASIBILITY_TOL {
            out.push("interference");
        }
        if self.bs_power_slack.iter().any(|&s| s < -FEASIBILITY_TOL) {
            out.push("bs_power");
        }
        if self.aerial_power_slack < -FEASIBILITY_TOL {
            out.push("aerial_power");
        }
        if self.rate_slack.is_some_and(|s| s < -FEASIBILITY_TOL) {
            out.push("aerial_rate");
        }
        out
    }
}

/// Checks the interference cap, power budgets and (HCSSA only) the aerial
/// rate floor, each at relative tolerance [`FEASIBILITY_TOL`].
pub fn check_constraints(sc: &ScenarioConfig, ch: &ChannelRealization, bf: &BeamformerSet) -> FeasibilityReport {
    let noise = effective_noise(ch, sc.noise_power());
    let cap = sc.interference_cap_w();
    let interference_slack = (cap - satellite_interference(sc, ch, bf)) / cap;
    let cells = sc.terminal_cells();
    let bs_power_slack = (0..sc.n_cells)
        .map(|n| {
            let used: f64 = bf.w.iter().zip(&cells).filter(|(_, &c)| c == n).map(|(w, _)| norm2_sq(w)).sum();
            (sc.bs_power[n] - used) / sc.bs_power[n]
        })
        .collect();
    let aerial_power_slack = (sc.aerial_power - norm2_sq(&bf.v)) / sc.aerial_power;
    let rate_slack = match sc.mode {
        Mode::Hcssa => {
            let beta_bar = sc.beta_bar();
            Some((aerial_sinr(sc, ch, bf, &noise) - beta_bar) / beta_bar.max(1.0))
        }
        Mode::Tcssa => None,
    };
    let mut report =
        FeasibilityReport { interference_slack, bs_power_slack, aerial_power_slack, rate_slack, feasible: false };
    report.feasible = report.violated().is_empty();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_realization, SeedState};
    use crate::linalg::c;

    fn setup() -> (ScenarioConfig, ChannelRealization) {
        let sc = ScenarioConfig::default();
        let ch = draw_realization(SeedState::new(1, 0), &sc).unwrap();
        (sc, ch)
    }

    #[test]
    fn zero_satellite_beam_leaves_plain_noise() {
        let (_, mut ch) = setup();
        ch.u_sat.fill(c(0.0, 0.0));
        let noise = effective_noise(&ch, 2.0);
        assert!(noise.terminals.iter().all(|&x| x == 2.0));
        assert_eq!(noise.aerial, 2.0);
    }

    #[test]
    fn effective_noise_never_below_thermal() {
        let sc = ScenarioConfig::default();
        for seed in 0..100 {
            let ch = draw_realization(SeedState::new(seed, 0), &sc).unwrap();
            let noise = effective_noise(&ch, sc.noise_power());
            assert!(noise.terminals.iter().all(|&x| x >= sc.noise_power()));
            assert!(noise.aerial >= sc.noise_power());
        }
    }

    #[test]
    fn unit_sinr_single_link() {
        let (mut sc, mut ch) = setup();
        sc.n_cells = 1;
        sc.terminals_per_cell = vec![1];
        ch.h = vec![vec![ch.h[0][0].clone()]];
        ch.g = vec![ch.g[0].clone()];
        ch.f = vec![ch.f[0].clone()];
        let noise = effective_noise(&ch, sc.noise_power());
        let h = &ch.h[0][0];
        // w along h with |hᴴw|² = σ̄²
        let w = h.map(|z| z * (noise.terminals[0].sqrt() / h.norm().powi(2)));
        let bf = BeamformerSet { v: CVec::zeros(sc.m_a), w: vec![w] };
        let gamma = terrestrial_sinr(&sc, &ch, &bf, &noise, 0, 0);
        assert!((gamma - 1.0).abs() < 1e-12);
        assert!(((1.0 + gamma).log2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_vectors() {
        let (sc, ch) = setup();
        let noise = effective_noise(&ch, sc.noise_power());
        let bf = BeamformerSet::zeros(&sc);
        assert_eq!(terrestrial_sinr(&sc, &ch, &bf, &noise, 0, 1), 0.0);
        assert_eq!(aerial_sinr(&sc, &ch, &bf, &noise), 0.0);
        assert_eq!(satellite_interference(&sc, &ch, &bf), 0.0);
    }

    #[test]
    fn unit_aerial_sinr() {
        let (sc, ch) = setup();
        let noise = effective_noise(&ch, sc.noise_power());
        let g = &ch.g_aerial;
        let v = g.map(|z| z * (noise.aerial.sqrt() / g.norm().powi(2)));
        let bf = BeamformerSet { v, w: vec![CVec::zeros(sc.m_g); 4] };
        assert!((aerial_sinr(&sc, &ch, &bf, &noise) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_beamformers_feasibility_by_mode() {
        let (mut sc, ch) = setup();
        let bf = BeamformerSet::zeros(&sc);
        let r = check_constraints(&sc, &ch, &bf);
        assert!(!r.feasible);
        assert_eq!(r.violated(), vec!["aerial_rate"]);
        sc.mode = Mode::Tcssa;
        assert!(check_constraints(&sc, &ch, &bf).feasible);
    }
}
