//! Time-resolved two-photon interference of Gaussian single-photon wavepackets.
//!
//! The crate covers the whole chain from theory to data:
//!
//! * [`wavepacket`]: Gaussian spatiotemporal modes and single-detector densities.
//! * [`interference`]: beam-splitter correlation functions, closed-form joint
//!   detection probabilities and the quadrature oracle that checks them.
//! * [`jitter`]: jitter-averaged probabilities, the `T1`/`T2` width algebra and
//!   the inversion of measured widths into the (frequency jitter, emission-time
//!   jitter) locus.
//! * [`synthesis`]: seeded Monte Carlo generation of time-tagged detection events.
//! * [`histogram`], [`fit`], [`characterize`]: coincidence histograms, background
//!   correction, the two-step peak/dip fit, the beat fit and the physical report.
//!
//! All widths use the Gaussian `exp(-x²/w²)` convention rather than the
//! standard-deviation convention, so a width `w` corresponds to a standard
//! deviation of `w/√2`. Quantities are SI (seconds, rad/s) throughout.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod characterize;
pub mod error;
pub mod fit;
pub mod histogram;
pub mod interference;
pub mod jitter;
pub mod oracle;
pub mod quad;
pub mod synthesis;
pub mod units;
pub mod wavepacket;

pub use error::{Error, Result};
pub use interference::{BeamSplitterMatrix, G2Components, PairConfig};
pub use jitter::{LocusPoint, PureCase, WidthPair};
pub use wavepacket::{GaussianMode, JitterSpec};
