//! Exact information measures of elementary cellular automata on rings and
//! the two-species annihilating particle model that explains their
//! critical behaviour.
//!
//! * [`rules`]: rule tables, bit-packed ring states and rule symmetries.
//! * [`necklaces`]: rotation orbits, their enumeration and the binary cache.
//! * [`evolution`]: orbit-mass distributions and deterministic push-forward.
//! * [`info`]: entropies and bipartite mutual information.
//! * [`rwanalytic`]: closed-form particle-model statistics.
//! * [`rwsim`]: particle simulator, valley-annihilation oracle and box counting.

pub mod error;
pub mod evolution;
pub mod fit;
pub mod info;
pub mod necklaces;
pub mod quadrature;
pub mod rules;
pub mod rwanalytic;
pub mod rwsim;

pub use error::{Error, Result};
pub use evolution::{ReducedDistribution, SuccessorMap};
pub use fit::LinearFit;
pub use info::{InfoReport, Region, StepMeasures};
pub use necklaces::NecklaceIndex;
pub use rules::{RingState, RuleTable};
pub use rwanalytic::{RWAnalyticResult, RWModelParams};
