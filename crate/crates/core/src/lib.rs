//! Exact-arithmetic toolkit for analyzing multi-player XOR-style games:
//! F2^n linear algebra, Fourier analysis over affine cosets, exhaustive game
//! values, affine partition refinement and bow-tie distribution analysis.

pub mod bowtie;
pub mod decomposition;
pub mod f2;
pub mod fourier;
pub mod games;
pub mod rat;

pub use f2::{AffineCoset, BitWord, Bitset, Subspace};
pub use rat::Rational;
