//! Joint beamforming and power-splitting design for a two-user cooperative
//! SWIPT-NOMA downlink.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod channel;
pub mod conic;
pub mod error;
pub mod harness;
pub mod miso;
pub mod siso;
pub mod system;
