pub mod baselines;
pub mod config;
pub mod dichotomy;
pub mod error;
pub mod eval;
pub mod features;
pub mod sson;
pub mod stereotype;
pub mod trust;
pub mod world;
