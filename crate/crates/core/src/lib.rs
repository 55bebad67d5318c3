//! Kinetic phonon transport with a thermostatted interface, its α-stable limit and the associated Dirichlet forms.

pub mod forms;
pub mod grid;
pub mod kinetic_mc;
pub mod levy_limit;
pub mod model;
pub mod numerics;
pub mod report;
pub mod rng;
pub mod solver;
pub mod stats;
