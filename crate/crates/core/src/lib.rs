//! Most-stable matchings for the Hospitals/Residents problem with Couples.
//!
//! An instance has single residents, couples applying jointly for pairs of
//! hospitals, and capacitated hospitals with strict rankings. When no stable
//! matching exists the solver returns one with the fewest blocking pairs and,
//! among those, the most assigned residents.

#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod error;
pub mod experiment;
pub mod generate;
pub mod ip;
pub mod model;
pub mod preprocess;
pub mod search;
pub mod stability;

pub use error::{GenError, IpError, ModelError, SolveError};
pub use model::{
    parse_instance, parse_matching, serialize_instance, serialize_matching, Agent, Couple, Hospital,
    HospitalId, Instance, Matching, ResidentId, Single,
};
pub use search::{brute_force_oracle, solve_most_stable, Solution, SolveOptions};
pub use stability::{blocking_pairs, is_stable, BlockingPair, BlockingType, StabilityMode};
