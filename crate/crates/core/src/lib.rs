//! Dense finite-dimensional machinery for the quantum relative entropy method:
//! Hermitian linear algebra, many-body tensor bookkeeping, entropies,
//! Lindblad and Hartree dynamics, fluctuation moments, pattern combinatorics
//! and a one-dimensional semiclassical toy.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod combinatorics;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod fluctuation;
pub mod linalg;
pub mod random;
pub mod semiclassical;
pub mod tensor;

pub use error::{Error, Result};
pub use linalg::{CMatrix, Hermitian, SpectralDecomposition};
pub use tensor::ManyBodySpace;

/// Two sides of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
}

impl Comparison {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs }
    }

    /// `rhs − lhs`; nonnegative when the inequality holds exactly.
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}
