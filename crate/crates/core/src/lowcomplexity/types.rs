use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{c, CVec};
use crate::network::{BeamformerSet, ScenarioConfig};

/// Unit-norm directions for the aerial BS and every terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedBeamformers {
    pub v: CVec,
    pub w: Vec<CVec>,
}

impl NormalizedBeamformers {
    pub fn check(&self, sc: &ScenarioConfig) -> Result<()> {
        if self.v.len() != sc.m_a || self.w.len() != sc.total_terminals() || self.w.iter().any(|w| w.len() != sc.m_g) {
            return Err(invalid("normalized beamformer dimensions do not match the scenario"));
        }
        if std::iter::once(&self.v).chain(&self.w).any(|x| (x.norm() - 1.0).abs() > 1e-10) {
            return Err(invalid("normalized beamformers must have unit norm"));
        }
        Ok(())
    }
}

/// Transmit powers `q` (aerial) and `p` (per terminal, flat index), in W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub q: f64,
    pub p: Vec<f64>,
}

/// `v = √q v̄`, `w = √p w̄`.
pub fn recombine(nb: &NormalizedBeamformers, pa: &PowerAllocation) -> BeamformerSet {
    let scale = |x: &CVec, s: f64| x.map(|z| z * c(s.max(0.0).sqrt(), 0.0));
    BeamformerSet { v: scale(&nb.v, pa.q), w: nb.w.iter().zip(&pa.p).map(|(w, &p)| scale(w, p)).collect() }
}
