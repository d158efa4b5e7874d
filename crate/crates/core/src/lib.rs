//! Forward modeling, inverse design and optimization of two-order Helmholtz
//! resonators (THRs).
//!
//! A THR is a pair of neck-and-cavity substructures in cascade. Mounted as a
//! side branch on a duct it produces two sound-transmission-loss peaks at its
//! two resonant frequencies. This crate provides:
//!
//! * the lumped-parameter forward model (geometry → equivalent electrical
//!   parameters → branch impedance → STL spectrum) and its exact algebraic
//!   inverse ([`geometry`], [`branch`], [`resonance`]),
//! * a transfer-matrix model of ducts carrying several side branches
//!   ([`tmm`]),
//! * deterministic training-corpus generation ([`dataset`]),
//! * a from-scratch dense/batch-norm/dropout network with Adam and early
//!   stopping that maps STL spectra back to circuit parameters ([`nn`]),
//! * the spectrum-synthesis inverse-design pipeline ([`design`]), and
//! * a real-coded genetic optimizer that can be seeded with surrogate
//!   designs ([`ga`]).
//!
//! Everything is pure computation over value types; file formats and the
//! command-line front end live in the companion `thr-cli` crate. The crate is
//! `no_std`-compatible (with `alloc`): disable default features and enable
//! `libm` for float math.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod branch;
pub mod constants;
pub mod dataset;
pub mod design;
mod error;
pub mod ga;
pub mod geometry;
pub mod nn;
pub mod resonance;
pub mod tmm;

pub use error::{Error, Result};
