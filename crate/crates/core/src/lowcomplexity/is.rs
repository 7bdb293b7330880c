//! Interference-suppression directions: a generalized Rayleigh quotient with
//! an interference cap, solved by alternating between the quotient's top
//! generalized eigenvector and the slack variable ρ.

use log::debug;

use super::types::NormalizedBeamformers;
use super::IsSettings;
use crate::channel::ChannelRealization;
use crate::error::{invalid, Error, Result};
use crate::linalg::{c, generalized_top_eig, outer, trace_re, CMat, CVec};
use crate::network::lifted::quad;
use crate::network::ScenarioConfig;

/// Relative floor on the ψ convergence test.
pub const PSI_REL_FLOOR: f64 = 1e-12;

/// Rounding level of ψ: the pencil's condition number is about
/// `1 + tr(D/χ)/ρ`, and the eigen-solve error scales with it, so once the
/// iteration settles successive ψ differ by that much and no less.
fn psi_noise(psi: f64, d_trace: f64, rho: f64) -> f64 {
    let cond = if rho > 0.0 { 1.0 + d_trace / rho } else { 1.0 };
    psi.abs() * PSI_REL_FLOOR.max(16.0 * f64::EPSILON * cond)
}

/// Relative diagonal jitter keeping the pencil matrix positive definite when
/// ρ = 0 and the interference Gram matrix is singular.
pub const PENCIL_JITTER: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IsDirection {
    pub w: CVec,
    /// Top generalized eigenvalue ψ at every iteration, starting at ρ⁽⁰⁾ = 0.
    pub psi: Vec<f64>,
    /// ρ used for the returned vector.
    pub rho: f64,
    /// `wᴴ D w` of the returned vector.
    pub interference: f64,
}

fn pencil(d_scaled: &CMat, rho: f64, jitter: f64) -> CMat {
    let n = d_scaled.nrows();
    d_scaled + CMat::identity(n, n) * c(rho + jitter, 0.0)
}

/// Maximizes `wᴴHw` over unit `w` with `wᴴDw ≤ χ`.
pub fn is_direction(h: &CMat, d: &CMat, chi: f64, eps3: f64, cap: usize) -> Result<IsDirection> {
    if !(chi > 0.0 && chi.is_finite()) {
        return Err(invalid("interference threshold χ must be positive"));
    }
    if h.nrows() != d.nrows() || !h.is_square() || !d.is_square() {
        return Err(invalid("desired and interference matrices must be square and equal-sized"));
    }
    if !(trace_re(h) > 0.0) {
        return Err(invalid("desired-channel Gram matrix must be nonzero"));
    }
    let d_scaled = d.map(|z| z / chi);
    let d_trace = trace_re(&d_scaled);
    let jitter = PENCIL_JITTER * d_trace.max(1.0);
    let mut rho = 0.0;
    let (mut psi, mut w) = generalized_top_eig(h, &pencil(&d_scaled, rho, jitter))?;
    let mut trace = vec![psi];
    // wᴴDw grows with ρ, so the fixed point of ρ ↦ 1 − wᴴDw/χ is bracketed
    // by the iterates; an update that leaves the bracket or reverses without
    // halving is replaced by the bracket midpoint
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut last_step = 0.0f64;
    for _ in 0..cap {
        let raw = 1.0 - quad(&w, d) / chi;
        let mut next = raw.clamp(0.0, 1.0);
        if next != raw {
            debug!("ρ update {raw:e} left [0, 1]; clamped to {next}");
        }
        if next > rho {
            lo = lo.max(rho);
        } else if next < rho {
            hi = hi.min(rho);
        }
        let step = next - rho;
        let stalls = step * last_step < 0.0 && step.abs() >= 0.5 * last_step.abs();
        if step != 0.0 && (next < lo || next > hi || stalls) {
            next = 0.5 * (lo + hi);
            debug!("ρ update oscillates; bisecting to {next}");
        }
        last_step = next - rho;
        rho = next;
        let j = if rho == 0.0 { jitter } else { 0.0 };
        let (p, v) = generalized_top_eig(h, &pencil(&d_scaled, rho, j))?;
        let prev = psi;
        psi = p;
        w = v;
        trace.push(psi);
        if (psi - prev).abs() <= eps3.max(psi_noise(psi, d_trace, rho)) {
            let interference = quad(&w, d);
            return Ok(IsDirection { w, psi: trace, rho, interference });
        }
    }
    Err(Error::Numerical(format!("interference-suppression iteration did not converge in {cap} steps")))
}

/// Interference Gram matrix of terminal `j`'s serving BS: its aerial-user
/// channel plus every other terminal's channel from the same BS.
pub fn terminal_interference(sc: &ScenarioConfig, ch: &ChannelRealization, j: usize) -> CMat {
    let n = sc.terminal_cells()[j];
    let mut d = outer(&ch.h_aerial[n]);
    for (jp, hh) in ch.h[n].iter().enumerate() {
        if jp != j {
            d += outer(hh);
        }
    }
    d
}

/// Interference Gram matrix of the aerial BS toward all terrestrial terminals.
pub fn aerial_interference(ch: &ChannelRealization) -> CMat {
    let m = ch.g_aerial.len();
    ch.g.iter().fold(CMat::zeros(m, m), |acc, g| acc + outer(g))
}

/// Step-1 directions with their iteration traces (aerial first).
pub fn is_step1(sc: &ScenarioConfig, ch: &ChannelRealization, settings: &IsSettings) -> Result<(NormalizedBeamformers, Vec<IsDirection>)> {
    settings.validate()?;
    let cells = sc.terminal_cells();
    let mut dirs = Vec::with_capacity(1 + cells.len());
    dirs.push(is_direction(&outer(&ch.g_aerial), &aerial_interference(ch), settings.chi, settings.eps3, settings.is_cap)?);
    for (j, &n) in cells.iter().enumerate() {
        let d = terminal_interference(sc, ch, j);
        dirs.push(is_direction(&outer(&ch.h[n][j]), &d, settings.chi, settings.eps3, settings.is_cap)?);
    }
    let nb = NormalizedBeamformers { v: dirs[0].w.clone(), w: dirs[1..].iter().map(|d| d.w.clone()).collect() };
    Ok((nb, dirs))
}
