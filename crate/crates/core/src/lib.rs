//! Exact middle convolution of monodromy tuples.
//!
//! The crate works over three kinds of exact scalar fields (rationals,
//! cyclotomic fields and small finite fields) and provides the pieces needed
//! to compute with local systems on the punctured affine line at the level of
//! their monodromy tuples: braid actions, parabolic cohomology, the middle
//! convolution and Katz's `MC_λ`, local monodromy predictions, reduction modulo
//! a prime with finite group recognition, and point counts on a K3 fibre.

pub mod convolution;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod k3count;
pub mod linalg;
pub mod modgroup;
pub mod poly;
pub mod scalar;
pub mod tuples;

pub use error::{Error, Result};
pub use linalg::{JordanBlock, JordanData, Matrix};
pub use poly::Poly;
pub use scalar::{FieldDescriptor, FiniteField, Scalar};
pub use tuples::{BraidWord, CohomologySpaces, MonodromyTuple};
