//! Exact tools for square-tiled surfaces and their cyclic branched covers.
//!
//! The crate is organized around a pipeline:
//!
//! * [`cyclic`] checks, over `Z/k`, which branch data `(kappa, a)` define
//!   covers whose cylinders come in twin pairs, and enumerates such data.
//! * [`surface`] is the combinatorial model of a square-tiled translation or
//!   half-translation surface, with exact cone angles and genus.
//! * [`origami`] converts to the permutation model `(h, v)`, builds the
//!   orientation double cover, and applies `SL(2,Z)` re-tilings.
//! * [`cylinder`] computes cylinder decompositions in rational directions,
//!   core-curve homology, and twin matchings.
//! * [`cover`] constructs the cyclic covers themselves from a branched
//!   genus-zero base and certifies the twin, involution, and boundary
//!   properties direction by direction.
//! * [`trace`] follows geodesics with exact rational arithmetic for the
//!   finite-blocking checks.
//! * [`geminal`] searches for representations `F_2 -> Sym(4d)` sending every
//!   primitive element to a `(2d,2d)`-cycle, and analyzes their subgroup
//!   structure.

pub mod cyclic;
pub mod cylinder;
pub mod cover;
pub mod geminal;
pub mod origami;
pub mod perm;
pub mod surface;
pub mod trace;

pub use perm::Perm;
