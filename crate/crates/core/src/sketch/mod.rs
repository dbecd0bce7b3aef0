//! Minwise and b-bit minwise hashing of sparse binary data.

mod file;
mod hashing;
mod minwise;
mod set;
mod theory;

pub use file::{pack_record, unpack_record, SketchFile, SketchHeader, SketchWriter, HEADER_LEN, MAGIC, VERSION};
pub use hashing::{
    is_prime, next_prime_above, ExplicitPermutationFamily, MinwiseHasher, TwoUniversalHashFamily, MAX_UNIVERSE,
};
pub use minwise::{
    estimate_pb, estimate_resemblance_full, minwise_sketch, truncate_to_b_bits, BBitSketch, MinwiseSketch, MAX_BITS,
};
pub use set::{resemblance, SparseBinarySet};
pub use theory::{estimate_resemblance_bbit, variance_bbit, variance_full, BBitEstimate, BBitParams};
