//! Noisy permutation channels.
//!
//! A codeword of length `n` is sent through a discrete memoryless channel and
//! the outputs are then shuffled by a uniformly random permutation, so only
//! the output histogram reaches the receiver. This crate provides channel
//! analytics, degradation witnesses, capacity bounds, lattice coding schemes,
//! exact small-`n` oracles and a reproducible Monte Carlo harness.
//!
//! The numerical core is generic over [`Scalar`] (`f64` or `f32`); capacity
//! bounds are exact rationals.
//!
//! ```
//! use permchan::{build_profile, capacity_bounds, Channel64};
//!
//! let bsc = Channel64::bsc(0.3).unwrap();
//! let bounds = capacity_bounds(&bsc, &build_profile(&bsc).unwrap());
//! assert!(bounds.exact);
//! assert_eq!(bounds.lower_f64(), 0.5);
//! ```

pub mod analysis;
pub mod capacity;
pub mod channel;
pub mod coding;
pub mod degradation;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod oracle;
pub mod scalar;
pub mod sim;
pub mod verify;

pub use analysis::{build_profile, build_profile_with, extreme_rows, numerical_rank, ChannelProfile};
pub use capacity::{capacity_bounds, rate_of, CapacityBounds};
pub use channel::{
    empirical_distribution, load_channel, push_forward, transmit, CanonicalKind, Channel, ChannelFile,
    ChannelSampler, Codeword, DistVector, Histogram, Order,
};
pub use coding::{
    decode_erasure_symmetrized, decode_ml_lattice, decode_permutation_channel, decode_threshold, encode_composition,
    encode_randomized, CodeConfig, Decision, LatticeMessage, MessageLattice,
};
pub use degradation::{degradation_feasibility, doeblin_witness, symmetric_dominator, DegradationWitness};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use oracle::{analytic_error_bounds, exact_output_law, test_bounds, verify_equivalent_model};
pub use scalar::Scalar;
pub use sim::{run_experiment, ExperimentConfig, Scheme, SimResult};

pub type Channel64 = Channel<f64>;
pub type Channel32 = Channel<f32>;
pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type Dist64 = DistVector<f64>;
pub type Dist32 = DistVector<f32>;
pub type Profile64 = ChannelProfile<f64>;
pub type Profile32 = ChannelProfile<f32>;
pub type CodeConfig64 = CodeConfig<f64>;
