pub mod augment;
pub mod config;
pub mod coverage;
pub mod displacement;
pub mod forcefield;
pub mod geo;
pub mod io;
pub mod metrics;
pub mod scenario;
pub mod vessel;
