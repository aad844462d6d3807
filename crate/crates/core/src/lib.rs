//! Randomized algorithms, hash families, probabilistic data structures, and
//! the seeded statistical harness that checks them against their
//! closed-form expectations.

pub mod bloom;
pub mod bounds;
pub mod count_min;
pub mod cuckoo;
pub mod fks;
pub mod harness;
pub mod hashing;
pub mod lsh;
pub mod mincut;
pub mod rng;
pub mod skiplist;
pub mod sorting;
pub mod treap;

pub use rng::{Method, RandomSource};
