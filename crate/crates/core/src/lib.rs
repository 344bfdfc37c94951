//! Information-freshness optimal downlink scheduling for a base station
//! that switches between NOMA and OMA.
//!
//! * [`channel`]: closed-form outage models (OMA, two-user NOMA, K-user SIC).
//! * [`mdp2`]: the exact two-client MDP solved by relative value iteration.
//! * [`scheduler`]: per-slot decision rules (max-weight, adaptive NOMA/OMA,
//!   baselines).
//! * [`allocator`]: the convex-envelope power allocator for many clients.
//! * [`sim`]: slotted Monte Carlo evaluation of policies.
//! * [`cli`]: experiment files, sweeps and CSV output.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod allocator;
pub mod channel;
pub mod cli;
pub mod error;
pub mod mdp2;
pub mod scheduler;
pub mod sim;

pub use error::{Error, Result};
