//! Channels: dense Kraus families, measurements, structured builders and
//! the circuit form used to evaluate large product-structured schemes.

pub mod circuit;
pub mod factored;
pub mod kraus;
pub mod povm;
pub mod structured;

pub use circuit::{classical_kraus, flat_index, permutation_unitary, split_index, Circuit, CircuitBuilder, Op};
pub use factored::{FactoredOp, DEFAULT_BLOCK_CAP};
pub use kraus::{apply_channel, compose_channels, tensor_channels, validate_channel, Diagnostics, KrausChannel};
pub use povm::{cgm_of_channel, povm_of_channel, Povm};
pub use structured::{and_flag, classical_function, or_flag, structured_channel, StructuredKind};
