//! Learning-theoretic analysis of continuous-time linear systems driven by
//! band-limited inputs: exact responses, complexity bounds and shattering
//! constructions.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod integrals;
pub mod learn;
pub mod response;
pub mod rng;
pub mod schema;
pub mod selftest;
pub mod shatter;
pub mod verify;

pub use error::{BoundsError, IntegralError, LearnError, ResponseError, SchemaError, ShatterError};
pub use integrals::{
    integrate_monomial, integrate_xi_times_basis, quadrature::integrate_quadrature, Branch, ExpTrigMonomial,
    IntegralResult, Trig,
};
pub use response::{
    loss_eval, precompute_lambda_j, response_full, sign_observe, BasisFamily, BasisFunction, CompactSystemParams,
    ControlMatrix, FullSystemParams, JordanTag, SystemParams,
};
