//! Exact enumeration, counting and construction of t-ary trees classified
//! by path length, together with the LZ78 incremental parser whose parse
//! trees realize those trees as universal types of sequences.

pub mod constructions;
pub mod counting;
pub mod error;
pub mod formulas;
pub mod lz78;
pub mod tree;

pub use counting::{build_series, build_table, CountTable, SeriesTable};
pub use error::{Error, Result};
pub use num_bigint::BigUint;
pub use tree::{decode, encode, CanonicalForm, Measure, Profile, Tree};

/// Serializes big counts as decimal strings.
pub(crate) mod decimal {
    use num_bigint::BigUint;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }
}
