//! Dempster-Shafer belief functions over finite frames, and recovery of
//! tree and polytree belief networks from set-valued data.

pub mod cli;
pub mod dense;
pub mod dependence;
pub mod error;
pub mod frames;
pub mod learners;
pub mod mass;
pub mod network;
pub mod population;

pub use error::{DsError, ErrorClass, Result};
pub use frames::{Bits, ConfigSet, Frame, Scope, Variable};
pub use mass::{MassFunction, MassKind};
pub use population::{sample_population, Dataset};
