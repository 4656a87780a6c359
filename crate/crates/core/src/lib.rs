//! Occupancy-map inpainting and navigation benchmarking.
//!
//! The pipeline runs end to end on procedurally generated rooms:
//!
//! - [`worldgen`] builds rectangular rooms with axis-aligned obstacles.
//! - [`sensor`] casts planar depth rays and turns them into labeled points.
//! - [`occupancy`] bins points into log-odds grids, fuses the three rig views
//!   and converts between log-odds and probability maps.
//! - [`dataset`] sweeps robot poses and stores (input, target) map pairs.
//! - [`nn`] is a small dense numeric kernel with hand-written backward passes.
//! - [`models`] assembles the encoder-decoder generator and the patch
//!   discriminator, trains them and computes the inpainting metrics.
//! - [`navsim`] runs navigation episodes with cost-map planning and scores
//!   them with success weighted by normalized inverse path duration (SPD).
//!
//! The [`cli`] module backs the `occnav` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod binio;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod models;
pub mod navsim;
pub mod nn;
pub mod occupancy;
pub mod render;
pub mod rng;
pub mod sensor;
pub mod worldgen;

pub use error::{Error, Result};
