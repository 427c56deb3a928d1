//! Build word-association (WA) and word-embedding (WE) networks over the same
//! vocabulary, cluster both, and measure how far the two partitions agree.
//!
//! The pipeline runs in this order:
//!
//! 1. [`embed`] reads `.vec` embedding files. [`norms`] turns raw cue/response
//!    counts into a symmetric association table and handles screening and
//!    strength classes.
//! 2. [`graph`] builds weighted networks: association strengths, or thresholded
//!    cosines.
//! 3. [`cluster`] provides Infomap and average-linkage agglomeration with a tree
//!    cut.
//! 4. [`converge`] scores agreement as informational convergence (normalized
//!    mutual information) and structural convergence (network statistics).
//! 5. [`studies`] runs the full designs. [`commands`] backs the `conceptmap`
//!    binary.
//!
//! [`synth`] plants known clusters so every stage can be checked against
//! ground truth. The `examples/` directory walks through each stage.
//! `cargo run --example study1_synthetic` is a good place to start.

pub mod cluster;
pub mod commands;
pub mod converge;
pub mod embed;
pub mod error;
pub mod graph;
pub mod manifest;
pub mod norms;
pub mod studies;
pub mod synth;

pub use error::{Error, Result};
