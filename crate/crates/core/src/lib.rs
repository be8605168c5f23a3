pub mod allocation;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod game;
pub mod lp;
pub mod model;
pub mod partition;
pub mod policy;
pub mod report;
pub mod scenario;
pub mod shapley;

pub use error::{Error, Result};
