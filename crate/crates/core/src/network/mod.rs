//! Scenario configuration, link metrics, constraint checks and the lifted
//! (matrix) view of the beamforming problem.

pub mod lifted;
pub mod metrics;
pub mod scenario;

pub use lifted::{merit_mu, merit_mu_weighted, penalty_f, LiftedIterate};
pub use metrics::{
    aerial_rate, aerial_sinr, check_constraints, effective_noise, satellite_interference, terminal_rates, terminal_sinr,
    terrestrial_sinr, BeamformerSet, EffectiveNoise, FeasibilityReport, FEASIBILITY_TOL,
};
pub use scenario::{Mode, ScenarioConfig};
