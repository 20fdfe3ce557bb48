//! Equivalent content delivery rates of cache-aided multi-antenna downlinks.
//!
//! The crate models a base station with `nt` antennas serving `K` single-antenna
//! users whose caches hold a fraction `m` of the library. Four delivery schemes
//! are covered:
//!
//! - coded caching over a wireless multicast link ([`multicast`]), optionally
//!   spread over `L` parallel sub-channels;
//! - multicast to a threshold-selected subset of users ([`selection`]);
//! - zero-forcing spatial multiplexing under imperfect CSIT ([`multiplex`]);
//! - a common multicast stream superposed on ZF private streams ([`mixed`]).
//!
//! Every expectation is estimated by seeded, sharded Monte Carlo
//! ([`estimate`]); asymptotic closed forms sit next to the estimators so the
//! two can be compared. All rates are in nats.

// NaN must fall into the rejecting branch of every domain check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod caching;
pub mod channel;
pub mod error;
pub mod estimate;
pub mod linalg;
pub mod mathx;
pub mod mixed;
pub mod multicast;
pub mod multiplex;
pub mod rng;
pub mod selection;

pub use caching::Placement;
pub use channel::{ChannelDraw, SystemConfig};
pub use error::{Error, Result};
pub use estimate::{Execution, MonteCarlo, RateEstimate};
pub use mathx::ToleranceSpec;
pub use rng::RngStream;

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
