pub mod circuit;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod geometry;
pub mod machine;
pub mod metrics;
pub mod pipeline;
pub mod placement;
pub mod schedule;
pub mod scheduler;
pub mod verify;

pub use error::{Error, Result};
