//! Exact arithmetic for sums of powers on Cantor sets.

pub mod numerics;
pub mod cantor;
pub mod bounds;
pub mod multiset;
pub mod powersum;
pub mod coverage;
pub mod dust;
pub mod padic;
