//! Simulation and exact verification of stochastic local algorithms for
//! self-organizing particle systems on the triangular lattice.
//!
//! Particles hop between adjacent lattice vertices under a Metropolis filter
//! biased toward more neighbors (compression). With light sources shining up
//! from below, particles in shadow activate less often, which drives the whole
//! configuration away from the light (phototaxing).
//!
//! * [`lattice`]: axial coordinates, heights, columns.
//! * [`system`]: configurations and the connectivity-preserving move rule.
//! * [`light`]: occlusion along vertical rays.
//! * [`dynamics`]: kernels, seeded runs, continuous-time runs.
//! * [`oracle`]: exact state enumeration, transition matrices, drifts.
//! * [`metrics`]: centroid, mean squared displacement, exponent fits.
//! * [`io`]: config, CSV and snapshot files, rendering.
//! * [`verify`]: the acceptance checks behind `amoebot verify`.

pub mod dynamics;
pub mod io;
pub mod lattice;
pub mod light;
pub mod metrics;
pub mod oracle;
pub mod system;
pub mod verify;

pub use dynamics::{DynamicsParams, Kernel, Mode, Record, Trajectory};
pub use lattice::AxialCoord;
pub use light::LightField;
pub use system::ParticleSystem;
