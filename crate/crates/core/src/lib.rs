//! Polarization tensors of smooth, simply connected planar domains.
//!
//! The crate evaluates the 2x2 polarization tensor M(mu) of a domain as a
//! function of the (complex) admittivity contrast mu, using a Nystrom
//! discretization of the single and double layer boundary operators. On top
//! of the forward evaluation it provides the spectral-measure decomposition
//! of M, rational pole/residue fitting of sampled tensors, detection and
//! recovery of elliptical inclusions from two-pole tensor structure, and an
//! audit of the Hashin-Shtrikman trace bounds.

pub mod analysis;
pub mod config;
pub mod geometry;
pub mod io;
pub mod layerops;
pub mod oracle;
pub mod rational;
pub mod shape;
pub mod spectral;
pub mod tensor;

pub use geometry::{area, discretize, normalize, BoundaryCurve, DiscreteBoundary};
pub use layerops::{assemble_a, assemble_k, assemble_s, sqrt_s, DenseOperator, OperatorKind};
pub use spectral::{build_spectral_data, dirichlet_density, eig_a, SpectralData};
pub use tensor::{pol_direct, pol_dual, pol_spectral, transform_tensor, EvalMethod, PolTensor};

/// Library version string, embedded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
