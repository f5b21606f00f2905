//! Plane-wave Kohn-Sham toy solver and a benchmark of learned charge-density
//! initializations against atomic-charge superposition.

pub mod crystal;
pub mod solver;
pub mod initdens;
pub mod predictor;
pub mod bench;
pub mod densio;
pub mod pipeline;
