//! Near-field wideband channel estimation for extremely large antenna
//! arrays: spherical-wave steering models, a polar-domain (angle x distance)
//! dictionary with coherence audits, whitened multi-carrier observations, and
//! the P-SOMP / P-SIGW estimators with far-field and least-squares baselines.

pub mod array_channel;
pub mod bench;
pub mod error;
pub mod estimators;
pub mod fresnel;
pub mod linalg;
pub mod observation;
pub mod polar_dictionary;
pub mod rng;

pub use error::{Error, Result};
