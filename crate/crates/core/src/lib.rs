//! Exact rates of metastability for fixed-point iterations of continuous
//! self-maps of the unit interval, with a brute-force verification oracle.

pub mod bounds;
pub mod corpus;
pub mod error;
pub mod functions;
pub mod iterations;
pub mod numerics;
pub mod oracle;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod schedules;

pub use error::{Error, Result};
