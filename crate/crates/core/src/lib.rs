//! Kazhdan–Lusztig polynomials for symmetric groups, their alternating sums
//! over block parabolic subgroups, and combinatorics of Boolean permutations.

pub mod cache;
pub mod cosets;
pub mod deodhar;
pub mod kl;
pub mod parabolic;
pub mod patterns;
pub mod perm;
pub mod poly;

pub use perm::{PairKey, PermError, Permutation};
pub use kl::{KlError, KlStore};
pub use poly::{Laurent, Poly};

/// Integer polynomial in `q` with unsigned 64-bit coefficients.
pub type IntPolynomial = Poly<u64>;
/// Laurent polynomial in `q` with signed 64-bit coefficients.
pub type LaurentPolynomial = Laurent<i64>;
/// KL store with unsigned 64-bit coefficients.
pub type KLStore = KlStore<u64>;
