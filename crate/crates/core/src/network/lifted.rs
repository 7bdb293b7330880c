//! Matrix-lifted representation: `V = vvᴴ`, `W = wwᴴ`, the rank-one
//! penalty and the merit function tracked by the penalty iterations.

use super::{BeamformerSet, EffectiveNoise, ScenarioConfig};
use crate::channel::ChannelRealization;
use crate::error::{invalid, Result};
use crate::linalg::{eigh_desc, is_hermitian, outer, top_eig, trace_re, CMat, CVec};

pub const HERMITIAN_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-8;
/// Eigenvalue floor relative to a matrix's power budget for solver output;
/// matches the accuracy accepted from a nearly solved program.
pub const BUDGET_PSD_TOL: f64 = 1e-7;

/// Lifted iterate: PSD matrices plus the auxiliary log-interference
/// variables `u` (nats, absolute units: `u = ln α` with α in W).
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedIterate {
    pub v: CMat,
    pub w: Vec<CMat>,
    pub u: Vec<f64>,
    /// Aerial auxiliary, present when the aerial rate is in the objective.
    pub u_aerial: Option<f64>,
}

impl LiftedIterate {
    /// Rank-one lift of a beamformer set; auxiliaries left at zero.
    pub fn from_beamformers(bf: &BeamformerSet) -> Self {
        Self { v: outer(&bf.v), w: bf.w.iter().map(outer).collect(), u: vec![0.0; bf.w.len()], u_aerial: None }
    }

    pub fn matrices(&self) -> impl Iterator<Item = &CMat> {
        std::iter::once(&self.v).chain(self.w.iter())
    }

    /// Hermitian within [`HERMITIAN_TOL`] and `λ_min ≥ −PSD_TOL·max(1, λ_max)`.
    pub fn validate(&self) -> Result<()> {
        self.validate_scaled(&[])
    }

    /// As [`validate`](Self::validate), but the eigenvalue floor is at least
    /// `BUDGET_PSD_TOL·scales[i]` (the power budget of matrix `i`) where
    /// given. Interior-point solutions carry eigenvalue noise proportional
    /// to the variable's scale.
    pub fn validate_scaled(&self, scales: &[f64]) -> Result<()> {
        for (i, m) in self.matrices().enumerate() {
            if !is_hermitian(m, HERMITIAN_TOL) {
                return Err(invalid("lifted matrix is not Hermitian"));
            }
            let e = eigh_desc(m)?;
            let floor = (PSD_TOL * e.values[0].abs().max(1.0)).max(BUDGET_PSD_TOL * scales.get(i).copied().unwrap_or(0.0));
            if *e.values.last().unwrap() < -floor {
                return Err(invalid("lifted matrix is not positive semidefinite"));
            }
        }
        Ok(())
    }
}

/// `hᴴ X h`, i.e. `Tr(hhᴴ X)`.
pub fn quad(h: &CVec, x: &CMat) -> f64 {
    h.dotc(&(x * h)).re
}

/// Interference-plus-noise term α_j of terminal `j`.
pub fn alpha_terminal(
    cells: &[usize],
    ch: &ChannelRealization,
    noise: &EffectiveNoise,
    it: &LiftedIterate,
    j: usize,
) -> f64 {
    let mut a = noise.terminals[j] + quad(&ch.g[j], &it.v);
    for (jp, w) in it.w.iter().enumerate() {
        if jp != j {
            a += quad(&ch.h[cells[jp]][j], w);
        }
    }
    a
}

/// `s_j = ln(α_j + Tr(H_{jj} W_j))`.
pub fn s_terminal(cells: &[usize], ch: &ChannelRealization, noise: &EffectiveNoise, it: &LiftedIterate, j: usize) -> f64 {
    (alpha_terminal(cells, ch, noise, it, j) + quad(&ch.h[cells[j]][j], &it.w[j])).ln()
}

/// Aerial interference-plus-noise `σ̄²_A + Σ Tr(H_A W)`.
pub fn alpha_aerial(cells: &[usize], ch: &ChannelRealization, noise: &EffectiveNoise, it: &LiftedIterate) -> f64 {
    noise.aerial + it.w.iter().enumerate().map(|(j, w)| quad(&ch.h_aerial[cells[j]], w)).sum::<f64>()
}

pub fn s_aerial(cells: &[usize], ch: &ChannelRealization, noise: &EffectiveNoise, it: &LiftedIterate) -> f64 {
    (alpha_aerial(cells, ch, noise, it) + quad(&ch.g_aerial, &it.v)).ln()
}

/// Rank-one penalty `Σ (Tr X − η(X))` over all lifted matrices.
pub fn penalty_f(it: &LiftedIterate) -> Result<f64> {
    let mut f = 0.0;
    for m in it.matrices() {
        if !is_hermitian(m, HERMITIAN_TOL) {
            return Err(invalid("penalty requires Hermitian matrices"));
        }
        let (eta, _) = top_eig(m)?;
        f += trace_re(m) - eta;
    }
    Ok(f)
}

/// Terrestrial (plus weighted aerial) rate in nats evaluated on a lifted
/// iterate: `Σ (s_j − ln α_j) + w_A (s_A − ln α_A)`.
pub fn lifted_rate_nats(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    noise: &EffectiveNoise,
    it: &LiftedIterate,
    aerial_weight: f64,
) -> f64 {
    let cells = sc.terminal_cells();
    let mut total = 0.0;
    for j in 0..sc.total_terminals() {
        total += s_terminal(&cells, ch, noise, it, j) - alpha_terminal(&cells, ch, noise, it, j).ln();
    }
    if aerial_weight != 0.0 {
        total += aerial_weight * (s_aerial(&cells, ch, noise, it) - alpha_aerial(&cells, ch, noise, it).ln());
    }
    total
}

/// Merit `μ = Σ (s − ln α) − ξ F`, with the aerial term weighted by the
/// scenario's mode.
pub fn merit_mu(sc: &ScenarioConfig, ch: &ChannelRealization, it: &LiftedIterate, xi: f64) -> Result<f64> {
    merit_mu_weighted(sc, ch, it, xi, sc.mode.aerial_weight())
}

pub fn merit_mu_weighted(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    it: &LiftedIterate,
    xi: f64,
    aerial_weight: f64,
) -> Result<f64> {
    let noise = super::effective_noise(ch, sc.noise_power());
    let cells = sc.terminal_cells();
    for j in 0..sc.total_terminals() {
        if !(alpha_terminal(&cells, ch, &noise, it, j) > 0.0) {
            return Err(invalid("merit requires positive α"));
        }
    }
    Ok(lifted_rate_nats(sc, ch, &noise, it, aerial_weight) - xi * penalty_f(it)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_realization, SeedState};
    use crate::linalg::{c, CVec};
    use crate::network::{effective_noise, satellite_interference, terminal_rates};
    use rand::{Rng, SeedableRng};

    fn random_bf(sc: &ScenarioConfig, seed: u64) -> BeamformerSet {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rv = |n: usize| CVec::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        BeamformerSet { v: rv(sc.m_a), w: (0..sc.total_terminals()).map(|_| rv(sc.m_g)).collect() }
    }

    #[test]
    fn rank_one_penalty_is_zero() {
        let sc = ScenarioConfig::default();
        let it = LiftedIterate::from_beamformers(&random_bf(&sc, 3));
        assert!(penalty_f(&it).unwrap().abs() < 1e-10);
    }

    #[test]
    fn identity_penalty() {
        let it = LiftedIterate {
            v: CMat::identity(8, 8),
            w: vec![CMat::zeros(8, 8)],
            u: vec![0.0],
            u_aerial: None,
        };
        assert!((penalty_f(&it).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn penalty_rejects_non_hermitian() {
        let mut v = CMat::zeros(2, 2);
        v[(0, 1)] = c(1.0, 0.0);
        let it = LiftedIterate { v, w: vec![], u: vec![], u_aerial: None };
        assert!(penalty_f(&it).is_err());
    }

    #[test]
    fn merit_equals_ln_sum_rate_on_rank_one() {
        let sc = ScenarioConfig::default();
        let ch = draw_realization(SeedState::new(4, 0), &sc).unwrap();
        let bf = random_bf(&sc, 8);
        let it = LiftedIterate::from_beamformers(&bf);
        let noise = effective_noise(&ch, sc.noise_power());
        let rates: f64 = terminal_rates(&sc, &ch, &bf, &noise).iter().sum();
        let mu0 = merit_mu(&sc, &ch, &it, 0.0).unwrap();
        assert!((mu0 - std::f64::consts::LN_2 * rates).abs() < 1e-9 * mu0.abs().max(1.0));
        let mu_big = merit_mu(&sc, &ch, &it, 1e6).unwrap();
        assert!((mu_big - mu0).abs() < 1e-9 * mu0.abs().max(1.0) + 1e6 * 1e-10);
        // lifted satellite interference equals the vector form
        let cells = sc.terminal_cells();
        let lifted: f64 = it.w.iter().enumerate().map(|(j, w)| quad(&ch.h_sat[cells[j]], w)).sum::<f64>()
            + quad(&ch.g_sat, &it.v);
        let direct = satellite_interference(&sc, &ch, &bf);
        assert!((lifted - direct).abs() <= 1e-10 * direct);
    }
}
