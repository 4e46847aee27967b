//! Ternary hard-sphere kinetics: collision algebra, phase-space geometry,
//! exact particle dynamics, a Monte Carlo solver for the ternary Boltzmann
//! equation, pseudo-trajectories and a particle-to-kinetic convergence study.

pub mod algebra;
pub mod convergence;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod histogram;
pub mod io;
pub mod kinetic;
pub mod pseudo;
pub mod rng;
pub mod verify;

pub use algebra::{
    classify, collide, cross_section_b, c_factor, impact_pair_for_solution, is_conservation_solution, CollisionClass,
    ImpactPair, SpatialVector, VelocityTriple,
};
pub use dynamics::{advance, advance_in_place, next_collision, CollisionEvent, DynamicsOptions, Scheduler, SimulationState};
pub use error::{Error, ErrorKind, Result};
pub use geometry::{Boundary, Configuration};
pub use histogram::{l1_distance, HistogramSpec, MarginalHistogram};
pub use kinetic::{CollisionKernel, MaxwellianParams, VelocityEnsemble, VelocityLaw};
