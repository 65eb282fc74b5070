pub mod aligners;
pub mod attmath;
pub mod earth;
pub mod error;
pub mod harness;
pub mod propagation;
pub mod simulator;

pub use error::AlignError;
