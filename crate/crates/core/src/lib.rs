//! Exact and floating-point machinery for studying the average error term
//! of the Bateman–Horn conjecture over families of integer polynomials.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; IO, threading and file formats live in the `bhlab`
//! companion crate.
//!
//! Modules, bottom-up:
//!
//! - [`arith`]: prime tables, the von Mangoldt function, Möbius, totient,
//!   primorials and a deterministic 64-bit primality test.
//! - [`poly`]: integer polynomials, root counts modulo primes and squarefree
//!   moduli, and traversal of the family `Poly_d(H)`.
//! - [`euler`]: truncated singular series and related Euler products.
//! - [`identities`]: exact averaging identities over residue polynomials.
//! - [`sieve`]: Bonferroni/Brun sieve weights and Hooley neutraliser bounds.
//! - [`moments`]: ψ-sums, progression error terms and the second moment.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod arith;
pub mod error;
pub mod euler;
pub mod identities;
pub mod moments;
pub mod poly;
pub mod sieve;
pub mod sum;

pub use error::{Error, Result};
