#![no_std]

extern crate alloc;

mod error;

pub use error::{Error, Result};

pub mod bounds;
pub mod contnet;
pub mod exec;
pub mod oracle;
pub mod quantnet;
pub mod rng;
pub mod sampler;
pub mod special;
pub mod stats;
pub mod teacher;
