//! Exact algebra for graded Floer chain complexes built from finite
//! critical-point and flow-line data: cyclic and lifted gradings, the
//! filtration spectral sequence between them, Novikov coefficients over
//! `Z[[t]]` and `Q((t))`, and the pairing used to glue relative invariants.

pub mod direct_sum;
pub mod floer_datum;
pub mod graded_complex;
pub mod linalg;
pub mod novikov_floer;
pub mod oracle;
pub mod pairing_gluing;
pub mod series;
pub mod spectral_engine;
