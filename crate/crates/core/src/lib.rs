#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod gf2;
pub mod codes;
pub mod adinkra;
pub mod origami;
pub mod embedding;
pub mod quad;
pub mod hyperbolic;
pub mod spectral;
pub mod transfer;
pub mod torus;

pub use error::{Error, Result};
