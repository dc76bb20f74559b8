//! Small-strain elastoplasticity with constraint-preserving neural hardening laws.

pub mod constitutive;
pub mod data;
pub mod diff;
pub mod error;
pub mod nets;
pub mod path;
pub mod reference;
pub mod return_map;
pub mod scalar;
pub mod tensor;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SymTensor = tensor::SymTensor3<f64>;
pub type SymTensor32 = tensor::SymTensor3<f32>;
pub type Dual8 = diff::Dual<f64, { diff::CHUNK }>;
pub type Dual8f32 = diff::Dual<f32, { diff::CHUNK }>;
