//! SO(n) representation theory on Grassmannians: highest weights, Weyl
//! characters and dimensions, isotypic projection and Schur scalars of the
//! angle transforms.

pub mod character;
pub mod projection;
pub mod spherical;
pub mod weights;

pub use character::{character_value, eigen_angles, CharacterTable};
pub use projection::{isotypic_project, probe_norm, GroupSamples, IsotypicProjector, PreparedProjector};
pub use spherical::{
    schur_scalar, schur_scalars, spherical_coefficients, stabilizer_multiplicity, stabilizer_overlap,
    SchurScalar, SphericalCoefficients,
};
pub use weights::{
    admissible_weights, occurs_on, range_predicate, weyl_dimension, HighestWeight, WeightClass,
};
