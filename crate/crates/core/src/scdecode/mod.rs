//! Successive-cancellation decoding as a tensor-network contraction.

mod decoder;
mod plan;
mod simplify;
mod tensor;

pub use decoder::{decode_bit_marginal, frozen_map, sc_decode, DecodeOutcome, Decoder};
pub use plan::{
    bottom_expr, check_window, child_window, contract_kernel, contract_kernel_with, window_len, Expr, Kernel,
    KernelKind, Plan,
};
pub use simplify::{apply_identity, simplify, LineState, Schedule, Step};
pub use tensor::ProbTensor;
