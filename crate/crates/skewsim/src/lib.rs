//! Simulation and statistics for skew-product random walks driven by an
//! intermittent interval map.
//!
//! The base dynamics is a one-parameter family of expanding maps of `[0, 1]`
//! with a neutral fixed point at the origin (parameter `gamma = 0` is the
//! uniformly expanding doubling map; `gamma` close to 1 gives long laminar
//! episodes near 0). On top of the base orbit the library accumulates
//! displacements in three kinds of fibre:
//!
//! * translations of `R^d` driven by an affine observable of the base point
//!   ([`ensemble::SystemSpec::Anisotropic`]),
//! * planar rigid motions, where the step direction is rotated by a phase
//!   that itself advances with the orbit ([`ensemble::SystemSpec::EuclideanPlane`]),
//! * spatial rigid motions, with a full rotation matrix advanced by an
//!   axis-rate observable ([`ensemble::SystemSpec::EuclideanSpace`]).
//!
//! Periodic ("regular") driven analogues of the planar and spatial systems
//! are available in closed form for baseline comparisons.
//!
//! The [`stats`] module estimates drifts, growth exponents of the
//! displacement, tail indices of block increments, laminar-episode
//! statistics, correlation decay, and closeness to a normal limit -
//! everything needed to classify a run as bounded, diffusive,
//! superdiffusive, or ballistic.
//!
//! All randomness flows from explicit 64-bit seeds through SplitMix64
//! streams; rerunning any configuration with the same seed reproduces every
//! trajectory bit for bit, independent of thread count.

pub mod ensemble;
pub mod error;
pub mod map;
pub mod observable;
pub mod regular;
pub mod rotation;
pub mod stats;
pub mod stepper;
pub mod synthetic;

pub use error::{Error, Result};
