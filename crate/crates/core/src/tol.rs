//! Numerical tolerances shared by constructors, operations and tests.
//!
//! Every "numerically true" check in the crate reads one of these values.

/// Self-adjointness at construction (`‖M − M†‖_max`).
pub const HERMITIAN: f64 = 1e-12;
/// Unitarity (`‖U†U − I‖_max`).
pub const UNITARY: f64 = 1e-10;
/// Idempotence of projectors (`‖P² − P‖_max`).
pub const IDEMPOTENT: f64 = 1e-10;
/// Completeness and mutual orthogonality of a resolution of the identity.
pub const COMPLETENESS: f64 = 1e-9;
/// Orthonormality of eigenvector matrices.
pub const ORTHONORMAL: f64 = 1e-10;
/// Reconstruction `‖V diag(λ) V† − M‖_max`.
pub const RECONSTRUCTION: f64 = 1e-9;
/// Distance below which an eigenphase is snapped onto an arc endpoint.
pub const ARC_SNAP: f64 = 1e-12;
/// Minimum distance between a unitary spectrum and −1 for the inverse Cayley map.
pub const CAYLEY_SINGULAR: f64 = 1e-8;
/// Trace and positivity checks for density matrices.
pub const TRACE: f64 = 1e-10;
/// Negative eigenvalues above this are clamped to zero; below it they are errors.
pub const PSD_CLAMP: f64 = 1e-10;
/// Trace preservation of Kraus sets.
pub const CPTP: f64 = 1e-10;
/// Probability vectors must sum to one within this.
pub const PROBABILITY: f64 = 1e-12;

/// The tolerance set as a value, so that self-tests can run against a
/// deliberately corrupted copy.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Tolerances {
    pub hermitian: f64,
    pub unitary: f64,
    pub idempotent: f64,
    pub completeness: f64,
    pub semigroup: f64,
    pub entropy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: HERMITIAN,
            unitary: UNITARY,
            idempotent: IDEMPOTENT,
            completeness: COMPLETENESS,
            semigroup: COMPLETENESS,
            entropy: COMPLETENESS,
        }
    }
}
