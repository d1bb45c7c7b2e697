//! Exact invariants of F-crystals over finite fields and over polynomial
//! families.
//!
//! The crate is organised bottom-up:
//!
//! - [`field`]: finite fields `F_{p^deg}`, Frobenius, embeddings.
//! - [`witt`]: truncated Witt vectors `W_s(F_{p^deg})` realised as the
//!   unramified ring `(Z/p^s)[X]/(f)`, plus a coordinate-wise backend.
//! - [`newton`]: Newton polygons and their combinatorics.
//! - [`crystal`]: F^n-crystals as matrices over `W_s`, with Newton and Hodge
//!   polygons, p-rank, exterior powers, iterates, slope splitting and the
//!   Hom group into a slope-b line.
//! - [`artin_schreier`]: generalized Artin–Schreier systems and their fiber
//!   counts.
//! - [`family`]: crystals over affine space, point sweeps and strata.
//! - [`oracles`]: brute-force verifiers.

#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod arith;
pub mod artin_schreier;
pub mod crystal;
pub mod error;
pub mod family;
pub mod field;
pub mod linalg;
pub mod newton;
pub mod oracles;
pub mod svg;
pub mod wire;
pub mod witt;

pub use error::{Error, Result};
