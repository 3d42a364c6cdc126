//! File formats, multi-threaded drivers and the command-line front end for
//! [`adinkra_core`].

pub mod cli;
pub mod formats;
pub mod parallel;

pub use adinkra_core;
