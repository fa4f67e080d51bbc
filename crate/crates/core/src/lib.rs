//! Private joint-type estimation over a vertically partitioned database.
//!
//! Two curators each hold one column of the same respondents. They agree on a
//! random sample of `m` rows, one-time-pad their sampled columns and send the
//! ciphertexts to a server. The server perturbs joint symbols with a
//! `γ`-diagonal PRAM channel without ever seeing plaintext. The researcher
//! removes the pads and inverts the channel to get an unbiased estimate of the
//! joint type. Sampling amplifies the channel's privacy to
//! `ε = ln((n + m(γ − 1)) / n)`.

pub mod calculus;
pub mod data;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod oracle;
pub mod otp;
pub mod pram;
pub mod protocol;
pub mod sampling;
pub mod seed;
pub mod stats;
pub mod typestats;

pub use error::{Error, Result};
