//! Numerical toolkit for prequantum line bundles, Kahler quantisation
//! equations and moment maps on flat tori.

pub mod chern;
pub mod conventions;
pub mod cym;
pub mod cym_forms;
pub mod error;
pub mod fields;
pub mod gma;
pub mod higgs;
pub mod linalg;
pub mod moment;
pub mod spectral;

pub use error::{LabError, Result};
pub use fields::{ScalarField, TopForm, TorusGrid};
