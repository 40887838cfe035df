//! Quickest detection of a hidden target crossed by a one-dimensional
//! diffusion.
//!
//! A diffusion `Z` passes a level `ℓ` drawn independently from a known law.
//! Working with `X = 2F(Z) - 1` turns the detection problem into an optimal
//! stopping problem for the triple (running minimum, position, running
//! maximum). This crate
//!
//! * computes the scale and speed data of `X` ([`diffusion`]),
//! * solves for the extremal stopping surfaces `f*` and `g*` ([`surface`]),
//! * evaluates the value function on each region ([`value`]),
//! * checks results against a discrete dynamic-programming solution
//!   ([`oracle`]) and by Monte Carlo ([`sim`]).

pub mod cli;
pub mod diffusion;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod sim;
pub mod surface;
pub mod value;

pub use error::{Error, Result};
