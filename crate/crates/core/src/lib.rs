//! Cosine, sine and Radon transforms on real Grassmannians, their SO(n)
//! spectral decomposition, translation-invariant valuations and a small
//! segment calculus for the associated degenerate principal series.

pub mod error;
pub mod function;
pub mod grassmann;
pub mod harmonics;
pub mod quadrature;
pub mod sampler;
pub mod transforms;
pub mod valuations;
pub mod verify;
pub mod zelevinsky;

pub use error::{Error, Result};
pub use function::{GrassmannFunction, PolynomialObservable};
pub use grassmann::{
    act, complement, cos_angle, haar_rotation, haar_subspace, make_subspace, principal_angles,
    sin_angle, PrincipalAngles, Rotation, Subspace,
};
pub use quadrature::{Estimate, Estimator, QuadratureSpec};
pub use sampler::SeededSampler;
pub use transforms::{TransformKind, TransformOp};
pub use valuations::{check_axioms, hull_volume, klain_section, projected_volume, projection_valuation, bridge_residual, AxiomReport, BridgeResidual, Polytope, ProbeShape, Valuation};
pub use zelevinsky::{classify_image, transform_segments, socle_quotient, ImageClassification, ModuleDescriptor, ModuleKind, Multisegment, Segment};
