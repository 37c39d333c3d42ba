//! Core library for an integrable four-wave mixing model: conserved-charge
//! sector reduction, dual Hahn spectral tables, quantum propagation,
//! classical closed-form dynamics, the Kummer-shape reduction, coherent
//! state tooling and the spin-chain representations.

pub mod classical;
pub mod coherent;
pub mod dualhahn;
pub mod error;
pub mod fock;
pub mod kummer;
pub mod quantum;
pub mod report;
pub mod sector;
pub mod special;
pub mod spinrep;
pub mod tridiag;

pub use error::{FwmError, Result};
pub use sector::{FourWaveParams, SectorLabel, SectorShape, Subcase};
