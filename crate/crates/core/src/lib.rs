//! Recursive Möbius values, the rectified Legendre prime count, cascade
//! tabulations, square-free divisor collections and finite-scale Mertens /
//! Liouville statistics.
//!
//! Every quantity computed by the recursive routes in [`recursion`],
//! [`legendre`] and [`cascade`] can be cross-checked against the
//! smallest-prime-factor sieve in [`sieve`].

pub mod cache;
pub mod cascade;
pub mod combinatorics;
mod error;
pub mod growth;
pub mod legendre;
pub mod recursion;
pub mod sieve;
pub mod verify;

pub use error::{CacheError, Error, Result};

/// Default cap on the number of entries any table or series may hold.
pub const DEFAULT_MAX_ENTRIES: u64 = 1 << 31;

/// Integer square root: the largest `r` with `r * r <= n`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    // Start from the float estimate and correct; the post-check is what
    // guarantees the result, not the estimate.
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Formats a signed value the way the printed tables do: `+5`, `-3`, `0`.
pub fn signed(v: i64) -> String {
    if v > 0 {
        format!("+{v}")
    } else {
        v.to_string()
    }
}
