//! Finite partial structures and the ST/STV structure-transformation language:
//! interpreter, variant checker, size bounds, program generators, and
//! compilers from recurrence definitions and Turing transducers.

pub mod structure;
pub mod syntax;
pub mod interp;
pub mod analysis;
pub mod stdlib;
pub mod prc;
pub mod tm;
pub use num_bigint;
