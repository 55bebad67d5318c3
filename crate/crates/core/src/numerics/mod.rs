//! Numerical building blocks shared by the model, form and sampler modules.

pub mod quad;
pub mod richardson;
pub mod special;
pub mod sum;
