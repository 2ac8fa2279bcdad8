//! Entanglement measures on finite-dimensional multipartite density operators
//! and randomized certification that a measure satisfies the operational
//! monotonicity conditions expected of it.
//!
//! The crate is organised in layers:
//!
//! * [`matrix`], [`tensor`], [`eigen`], [`entropy`], [`sample`]: dense complex
//!   linear algebra, multipartite index gymnastics, a Hermitian eigensolver,
//!   entropic functionals, and seeded random ensembles.
//! * [`states`]: labelled multipartite density operators, ensembles, flag
//!   bases, and the standard state families.
//! * [`locc`]: Kraus instruments, measurement trees, dephasing and twirling
//!   channels, and seeded sampling of local-operation protocols.
//! * [`measures`]: negativity, relative entropy of entanglement (upper bound
//!   via conditional-gradient descent, lower bound via a positive partial
//!   transpose relaxation), and two deliberately non-monotone controls.
//! * [`certify`]: randomized property checks for convexity, local unitary
//!   invariance, flag monotonicity, the elementary local operations, and
//!   strong/weak monotonicity under sampled protocols, with replayable
//!   witnesses and a combined certification verdict.

pub mod certify;
pub mod eigen;
pub mod entropy;
pub mod error;
pub mod locc;
pub mod matrix;
pub mod measures;
pub mod sample;
pub mod states;
pub mod tensor;

pub use certify::{
    certify_measure, default_config_for, verdict_from_reports, CertificationVerdict, CheckConfig,
    CheckReport, Witness, CHECK_SEQUENCE,
};
pub use eigen::{hermitian_eigensystem, trace_norm, HermitianSpectrum};
pub use entropy::{relative_entropy, von_neumann_entropy};
pub use error::{CoreError, Result};
pub use matrix::ComplexMatrix;
pub use sample::{haar_unitary, random_density, SeededRng};
pub use states::{DensityOperator, Ensemble, FlagBasis, Party, Register};
