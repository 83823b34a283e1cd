//! Shape and stiffness reconstruction of deformable objects from
//! force-controlled surface probes.
//!
//! The pipeline turns probe records (contact point, inward normal, force,
//! punch radius) into a signed distance field of the *undeformed* object:
//!
//! 1. [`contact`] estimates Young's modulus from pairs of probes at one site
//!    and converts each probe's indentation into a target value of the
//!    undeformed distance field.
//! 2. [`recon`] interpolates the measured normals over a grid and solves a
//!    Poisson problem for a pseudo signed distance field that honours the
//!    point targets.
//! 3. [`reinit`] evolves the pseudo field into a true distance field while
//!    keeping its zero level set in place.
//!
//! [`sim`] generates synthetic probe campaigns on analytic shapes and
//! [`metrics`] compares level sets. [`pipeline`] wires the stages together
//! and [`cli`] exposes them as the `palpate` command.

pub mod cli;
pub mod contact;
pub mod error;
pub mod grid;
pub mod mesh;
pub mod metrics;
pub mod pipeline;
pub mod recon;
pub mod reinit;
pub mod sim;

pub use error::{Error, Result};
