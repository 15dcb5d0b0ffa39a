//! Distributional Hessian and divdiv finite element complexes on simplicial
//! meshes, assembled as exact sparse rational matrices.
//!
//! The crate builds the eight main complexes (2D/3D × Hessian/divdiv × with
//! or without boundary conditions), their auxiliary piecewise-polynomial
//! distribution complexes and the trimmed 3D divdiv complexes, and certifies
//! their structure: vanishing composites, cohomology dimensions against
//! simplicial Betti numbers, commuting diagrams, dual pairings and an
//! independent exact-quadrature adjointness oracle.
//!
//! ```
//! use distfe::{generate_mesh, ComplexKind, GeneratorKind};
//!
//! let mesh = generate_mesh(GeneratorKind::CrissCrossSquare, 1).unwrap();
//! let asm = distfe::assemble(ComplexKind::Hessian2d, &mesh).unwrap();
//! assert!(distfe::check_complex(&asm).unwrap());
//! assert_eq!(distfe::cohomology_dims(&asm), vec![3, 0, 0]);
//! ```

#![allow(clippy::needless_range_loop)]

pub mod functionals;
pub mod geometry;
pub mod homology;
pub mod linalg;
pub mod maps;
pub mod mesh;
pub mod operators;
pub mod oracle;
pub mod poly;
pub mod report;
pub mod spaces;
pub mod verification;
pub mod weighted;

pub use homology::{expected_cohomology, homology_dims, BettiVector, CoefficientSpace, ComplexKind};
pub use linalg::{ExactMatrix, Rational};
pub use mesh::{generate_mesh, load_mesh, GeneratorKind, OrientationVariant, SimplexId, SimplicialComplex};
pub use operators::{assemble, ComplexAssembly};
pub use spaces::{build_space, BasisAtom, SpaceBasis, SpaceId};
pub use verification::{check_complex, cohomology_dims};

/// Errors raised by mesh handling, assembly and certification.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
