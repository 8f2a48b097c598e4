//! Serialization helpers shared by reports.

use num_bigint::BigUint;
use serde::Serializer;

/// Big values are written as decimal strings.
pub(crate) fn big_string<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}
