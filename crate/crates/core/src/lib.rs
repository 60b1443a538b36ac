//! Hörmander index of symmetric periodic orbits and their iterates.
//!
//! The index of the `k`-th iterate is computed by a closed Chebyshev-matrix
//! formula ([`hormander::hormander_index_formula`]) and checked against two
//! independent constructions: a quadratic form built from generic linear
//! solves ([`hormander::hormander_index_quadratic_form`]) and the difference
//! of two crossing-form Maslov indices along a symplectic path
//! ([`maslov::hormander_via_paths`]). The [`orbit`] module produces real
//! return maps from reversible Hamiltonian systems.

pub mod chebyshev;
pub mod darwin;
pub mod error;
pub mod half_integer;
pub mod hormander;
pub mod linalg;
pub mod maslov;
pub mod orbit;
pub mod paths;
pub mod verify;

pub use error::{Error, Result};
pub use half_integer::HalfInteger;
