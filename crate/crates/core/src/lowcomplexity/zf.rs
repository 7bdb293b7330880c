//! Zero-forcing directions: projection of the desired channel onto the
//! orthogonal complement of the interference channels.

use super::types::NormalizedBeamformers;
use crate::channel::ChannelRealization;
use crate::error::{invalid, Error, Result};
use crate::linalg::{c, CMat, CVec};
use crate::network::ScenarioConfig;

/// Relative threshold on the QR diagonal below which the interference
/// matrix is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of the column space of `t`, or `None` when `t` is
/// numerically rank deficient.
fn column_basis(t: &CMat) -> Option<CMat> {
    let qr = t.clone().qr();
    let r = qr.r();
    let scale = (0..r.ncols()).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    if !(scale > 0.0) || (0..r.ncols()).any(|i| r[(i, i)].norm() <= RANK_TOL * scale) {
        return None;
    }
    Some(qr.q())
}

/// `(I − T(TᴴT)⁻¹Tᴴ) h`, normalized.
pub fn null_space_direction(t: &CMat, h: &CVec) -> Result<CVec> {
    if t.nrows() != h.len() {
        return Err(invalid("interference matrix and channel dimensions differ"));
    }
    if t.ncols() >= t.nrows() {
        return Err(Error::NotApplicable(format!(
            "zero forcing needs more antennas ({}) than interference channels ({})",
            t.nrows(),
            t.ncols()
        )));
    }
    let q = column_basis(t).ok_or_else(|| Error::NotApplicable("interference channels are rank deficient".into()))?;
    let mut w = h.clone();
    // second pass cleans up rounding left by the first
    for _ in 0..2 {
        let coef = q.adjoint() * &w;
        w -= &q * coef;
    }
    let nrm = w.norm();
    if !(nrm > RANK_TOL * h.norm()) {
        return Err(Error::NotApplicable("desired channel lies in the interference span".into()));
    }
    Ok(w / c(nrm, 0.0))
}

/// Interference channels of terminal `j`'s serving BS: every other
/// terminal's channel, then the aerial user's.
pub fn terminal_interference_matrix(sc: &ScenarioConfig, ch: &ChannelRealization, j: usize) -> CMat {
    let n = sc.terminal_cells()[j];
    let cols: Vec<CVec> = ch.h[n]
        .iter()
        .enumerate()
        .filter(|&(jp, _)| jp != j)
        .map(|(_, h)| h.clone())
        .chain(std::iter::once(ch.h_aerial[n].clone()))
        .collect();
    CMat::from_columns(&cols)
}

pub fn aerial_interference_matrix(ch: &ChannelRealization) -> CMat {
    CMat::from_columns(&ch.g)
}

pub fn zf_step1(sc: &ScenarioConfig, ch: &ChannelRealization) -> Result<NormalizedBeamformers> {
    let kt = sc.total_terminals();
    if kt >= sc.m_g.min(sc.m_a) {
        return Err(Error::NotApplicable(format!(
            "{kt} terminals need fewer than min(M_G, M_A) = {} antennas",
            sc.m_g.min(sc.m_a)
        )));
    }
    let cells = sc.terminal_cells();
    let v = null_space_direction(&aerial_interference_matrix(ch), &ch.g_aerial)?;
    let w = (0..kt)
        .map(|j| null_space_direction(&terminal_interference_matrix(sc, ch, j), &ch.h[cells[j]][j]))
        .collect::<Result<_>>()?;
    Ok(NormalizedBeamformers { v, w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    #[test]
    fn hand_projection() {
        let t = CMat::from_columns(&[CVec::from_vec(vec![c(1.0, 0.0), ZERO])]);
        let h = CVec::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let w = null_space_direction(&t, &h).unwrap();
        assert!(w[0].norm() < 1e-15);
        assert!((w[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn orthogonal_channel_passes_through() {
        let t = CMat::from_columns(&[CVec::from_vec(vec![c(1.0, 0.0), ZERO, ZERO])]);
        let h = CVec::from_vec(vec![ZERO, c(0.0, 3.0), c(4.0, 0.0)]);
        let w = null_space_direction(&t, &h).unwrap();
        assert!((&w - &h / c(5.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn too_many_columns_is_not_applicable() {
        let t = CMat::identity(2, 2);
        let h = CVec::from_vec(vec![c(1.0, 0.0), ZERO]);
        assert!(matches!(null_space_direction(&t, &h), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn rank_deficient_is_not_applicable() {
        let col = CVec::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0), ZERO]);
        let t = CMat::from_columns(&[col.clone(), col * c(2.0, 0.0)]);
        let h = CVec::from_vec(vec![ZERO, ZERO, c(1.0, 0.0)]);
        assert!(matches!(null_space_direction(&t, &h), Err(Error::NotApplicable(_))));
    }
}
