//! Random dyadic tilings.
//!
//! Each order-`n` dyadic tile of the unit square is available independently
//! with probability `p`; the question is whether the available tiles contain a
//! tiling of the square. This crate decides that exactly, samples it, builds
//! the chain-tree witnesses of non-tileability, and verifies exponential decay
//! certificates for the blocking probability with exact rational and
//! outward-rounded interval arithmetic.

pub mod bounds;
pub mod chains;
pub mod config;
pub mod error;
pub mod exact_poly;
pub mod genfun;
pub mod interval;
pub mod rational;
pub mod simulate;
pub mod tile;
pub mod tileability;

pub use chains::{
    build_principal_chain_tree, enumerate_chain_trees, enumerate_successors, verify_chain_tree, Chain, ChainTree,
    Successor, TreeStats, VerifyReport,
};
pub use config::AvailabilityConfig;
pub use error::{Error, Result};
pub use exact_poly::{count_tilings, exact_t, UniPoly};
pub use genfun::{f_eval, f_poly, BivariatePoly, DecayCertificate, Outcome};
pub use interval::{Dyadic, Interval};
pub use rational::parse_rational;
pub use simulate::{estimate_t, sample_config, Estimate};
pub use tile::{enumerate_tiles, Axis, Tile, MAX_ORDER};
pub use tileability::{extract_tiling, is_tileable, unit_square_tileable, Cell, TileabilityTable, Tiling};
