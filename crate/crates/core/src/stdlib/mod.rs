//! Generators for example and structure-expansion programs.

mod chain;
mod expansion;
mod strings;

use thiserror::Error;

use crate::structure::Vocabulary;
use crate::syntax::Script;

pub use chain::dup_chain;
pub use expansion::{
    duplicate_functions, enumerator, expansion, expansion_within, quasi_inverse, EnumeratorWitness, Expansion,
    ExpansionOptions,
};
pub use strings::{
    chain_length, concat_copy, concat_input, concat_splice, exponentiation, mult_input, string_dup, string_mult,
    stv_concat_copy, stv_concat_splice, stv_mult, unary, BAR_BITS, BITS, HAT_BITS,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StdlibError {
    #[error("unknown program `{0}`")]
    Unknown(String),
    #[error("program `{0}` needs a vocabulary")]
    NeedsVocabulary(String),
}

/// Names accepted by [`generate`]; the last three take a vocabulary.
pub const PROGRAMS: [&str; 11] = [
    "concat-splice",
    "concat-copy",
    "string-mult",
    "string-dup",
    "stv-concat-splice",
    "stv-concat-copy",
    "stv-mult",
    "exponentiation",
    "enumerator",
    "quasi-inverse",
    "duplicate-functions",
];

/// Looks up a generator by name.
pub fn generate(name: &str, vocab: Option<&Vocabulary>) -> Result<Script, StdlibError> {
    let need = || vocab.ok_or_else(|| StdlibError::NeedsVocabulary(name.to_string()));
    Ok(match name {
        "concat-splice" => concat_splice(),
        "concat-copy" => concat_copy(),
        "string-mult" => string_mult(),
        "string-dup" => string_dup(),
        "stv-concat-splice" => stv_concat_splice(),
        "stv-concat-copy" => stv_concat_copy(),
        "stv-mult" => stv_mult(),
        "exponentiation" => exponentiation(),
        "enumerator" => enumerator(need()?).script,
        "quasi-inverse" => quasi_inverse(need()?).script,
        "duplicate-functions" => duplicate_functions(need()?).script,
        other => return Err(StdlibError::Unknown(other.to_string())),
    })
}
