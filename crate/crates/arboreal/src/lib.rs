//! Exact constructions for arboreal front singularities.
//!
//! The crate builds the canonical front models indexed by signed rooted
//! trees, computes their tangency stratifications, and mechanically checks
//! every polynomial identity the stability argument for these models rests
//! on.  All core arithmetic is exact: polynomial coefficients are
//! arbitrary-precision rationals and set-level claims are decided by
//! rational evaluation, never by floating point alone.
//!
//! Module layout:
//!
//! * [`poly`] - sparse multivariate polynomials over the rationals.
//! * [`trees`] - signed rooted trees, canonical forms, automorphisms.
//! * [`fronts`] - the h-family, quadrant models, tree fronts, conormal
//!   parametrizations and mesh export.
//! * [`tangency`] - tangency loci of front pieces as semi-algebraic cell
//!   lists, plus a numeric brute-force oracle.
//! * [`symlin`] - exact symplectic linear algebra: definiteness order of
//!   Lagrangian triples, coisotropic reduction, edge signs.
//! * [`verify`] - the identity checks behind the stability argument and a
//!   small normalization-flow demonstrator.
//! * [`cli`] - command line front end.

pub mod cli;
pub mod fronts;
pub mod poly;
pub mod symlin;
pub mod tangency;
pub mod trees;
pub mod verify;
