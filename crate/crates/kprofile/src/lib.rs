//! Kappa-profiles of point clouds: worst-case projected secant norms under
//! secant-optimal linear projections.
//!
//! The profile entry for target dimension m is the minimum norm among all
//! normalized secants after projecting with the best orthonormal n x m
//! basis; a value of at least 0.2 marks m as a good embedding dimension.
//! The crate bundles the minimax optimizer, a PCA/Grassmannian comparison
//! toolkit, time-delay embedding with sliding-window monitoring, a
//! Kuramoto-Sivashinsky data generator, and CSV/WAV ingestion.

pub mod error;
pub mod ks;
pub mod sap;
pub mod secants;
pub mod subspace;

pub use error::{Error, Result};
pub use ks::{ks_residual, ks_simulate, KsConfig, KsInit, KsSolver, KsTrajectory};
pub use sap::{
    is_good_embedding, kappa_profile, kappa_profile_results, sap_optimize, KappaProfile,
    ProfileEntry, ProjectionBasis, SapConfig, SapInit, SapResult, DEFAULT_KAPPA_THRESHOLD,
};
pub use secants::{build_secants, min_projected_norm, DataMatrix, SecantSet, DEFAULT_SECANT_CAP};
pub use subspace::{
    geodesic_distance, pca_basis, pca_basis_with, principal_angles, principal_vectors,
    PrincipalAngles, PrincipalVectorPairs, SingularSpectrum,
};
