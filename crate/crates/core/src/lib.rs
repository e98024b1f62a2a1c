//! Exact polynomial toolkit for momentum maps of Poisson-Lie group actions.
//!
//! The crate models everything on rational box charts with sparse
//! rational-coefficient polynomials, so each of the defining identities
//! (Jacobi, cocycle, Maurer-Cartan, bracket morphism, multiplicativity,
//! deformation equations) is decidable exactly. Floating point appears only
//! in the fixed-step lifting of leaves and in grid sup-norm diagnostics.
//!
//! Module map:
//!
//! * [`bialgebra`]: structure constants, cobrackets, coadjoint action.
//! * [`chart`], [`poly`], [`parse`], [`fields`], [`calculus`]: the exact
//!   exterior-calculus substrate and the polynomial input grammar.
//! * [`poisson`]: brackets, Hamiltonian fields, the action residual.
//! * [`group`]: dual-group models, coframes, multiplicative bivectors.
//! * [`imm`]: the infinitesimal momentum map, gauge transformations, and
//!   verification of candidate maps.
//! * [`reconstruct`]: involutivity, leaf lifting, the obstruction function,
//!   and the abelian / Heisenberg closed-form analyses.
//! * [`deform`]: first-order deformations and Hamiltonian generation.

pub mod bialgebra;
pub mod calculus;
pub mod chart;
pub mod deform;
pub mod error;
pub mod fields;
pub mod group;
pub mod imm;
pub mod linalg;
pub mod ode;
pub mod parse;
pub mod poisson;
pub mod poly;
pub mod rat;
pub mod reconstruct;
pub mod sample;

pub use bialgebra::{LieAlgebraData, LieBialgebraData};
pub use chart::{Chart, ChartDomain};
pub use error::{AlgebraError, CalcError, GroupError, ReconstructError};
pub use fields::{BivectorField, FormField, VectorField};
pub use group::{AbelianPi, BuiltinGroup, GroupModel};
pub use imm::{AlphaMap, MomentumCandidate};
pub use parse::parse_poly;
pub use poisson::PoissonManifold;
pub use poly::PolyExpr;
pub use rat::Rat;
pub use reconstruct::{LeafSpec, MomentumLeaf};
