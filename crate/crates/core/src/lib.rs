//! Computational core for twisted Morava K-theory at the prime 2.
//!
//! The crate works entirely over finite fields with `v_n` set to 1, so every
//! `K(n)_*`-module is a vector space graded by `Z/2(p^n - 1)`.
//!
//! - [`algebra`]: presented graded-commutative algebras (the Ravenel–Wilson
//!   factors `R(a_k)`, `R(b_k)` and truncated polynomial rings)
//! - [`module`]: modules over them, characters, `M ⊗_A F_p(χ)` and freeness
//! - [`catalog`]: Eilenberg–MacLane algebras, twist characters, space documents
//! - [`uct`]: twisted homology through the universal coefficient theorem
//! - [`steenrod`]: Steenrod squares and Milnor primitives on mod 2 cohomology rings
//! - [`ahss`]: the first twisted Atiyah–Hirzebruch differential
//! - [`abgrp`]: finitely generated abelian groups and the mod 2 comparison sequence

pub mod abgrp;
pub mod ahss;
pub mod algebra;
pub mod catalog;
pub mod expr;
pub mod field;
pub mod graded;
pub mod linalg;
pub mod module;
pub mod steenrod;
pub mod uct;

pub use algebra::{AlgebraPresentation, Element, Generator, Monomial, Rule};
pub use graded::{GradedDims, Height};
pub use module::{enumerate_characters, freeness_certificate, tensor_character, Character, ModuleOverAlgebra};
pub use steenrod::{Poly, SteenrodRing};
pub use abgrp::{FinAbGroup, Sandwich};
pub use ahss::{AhssPage, TwistClass};
pub use catalog::{em_algebra, twist_character, SpaceDescriptor};
pub use uct::{TwistSpec, Verdict};
