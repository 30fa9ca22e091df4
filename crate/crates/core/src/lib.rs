//! Twisted Dolbeault and Morse–Novikov cohomology, twisted Dirac operators
//! and the Hirzebruch χ_y-genus, computed as exact or spectral linear algebra
//! on finite models of compact complex manifolds.
//!
//! Two kinds of model are supported:
//!
//! * invariant complexes of Lie-algebra models (flat tori, nilmanifolds,
//!   the Hopf surface), where every operator is a finite matrix over
//!   [`GaussRational`] or [`Complex64`];
//! * Fourier-truncated forms on flat tori with position-dependent twisting
//!   forms ([`fourier`]).

pub mod curvature;
pub mod error;
pub mod exterior;
pub mod fourier;
pub mod genus;
pub mod linalg;
pub mod model;
pub mod parallel;
pub mod sampling;
pub mod scalar;
pub mod twisted;

pub use error::{Error, Result};
pub use exterior::{InvariantForm, MultiIndexPQ, OneForm01, OneForm10};
pub use linalg::{Matrix, RankInfo};
pub use model::{GradedOperator, LieComplexModel, ValidatedModel};
pub use parallel::Execution;
pub use num_complex::Complex64;

pub use scalar::{GaussRational, Mode, Scalar};
