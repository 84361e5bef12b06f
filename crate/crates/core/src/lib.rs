//! Humbert-Edge curves of type n: point counts, quotients, and the isogeny
//! decomposition of their Jacobians.

pub mod counting;
pub mod curve;
pub mod decomp;
pub mod field;
pub mod verifier;

pub use counting::{Budget, CountCache, CountError, CountRecord, CountSource, Method};
pub use curve::{
    random_smooth_curve, CurveDocument, CurveError, CurveMatrix, QuotientCurve, SubsetMask,
};
pub use decomp::{decompose, DecompError, DecompositionReport};
pub use field::{ExtField, FieldError, PrimeField};
pub use verifier::{full_verify, Verdict, VerificationReport, VerifyError, VerifyOptions};
