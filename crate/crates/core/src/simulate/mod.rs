//! Synthetic participants.
//!
//! Every simulator draws from a known ground-truth density so that the whole
//! pipeline can be checked against the answer it should recover. Behaviour is
//! deliberately simple and fully determined by the participant's seed.

mod density;
mod participant;
mod sims;

pub use density::{GaussianComponent, GroundTruthDensity, Peak};
pub use participant::{cohort, stream_rng, SyntheticParticipant};
pub use sims::{sample_fixations, sim_annotation, sim_bubble, sim_codecharts, sim_zoom};
