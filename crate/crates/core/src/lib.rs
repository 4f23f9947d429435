//! Polar and convolutional Polar codes.
//!
//! The crate builds the CNOT encoding circuits of both code families, encodes
//! over GF(2), decodes with a successive-cancellation tensor contraction, and
//! analyses erasure channels exactly through a finite algebra of knowledge
//! states. A Monte Carlo harness ties the pieces together.

pub mod channel;
pub mod circuit;
pub mod erasure_exact;
pub mod error;
pub mod gf2;
pub mod scdecode;
pub mod simulate;


pub use channel::Channel;
pub use circuit::{build_circuit, encode, encoding_matrix, Boundary, CodeFamily, CodeKind, Gate, GateList};
pub use error::{Error, Result};
pub use gf2::{BitVec, Gf2Matrix};
pub use scdecode::{sc_decode, Decoder, ProbTensor};
pub use simulate::{run_mc, CodeSpec, SimReport};


