//! Simulation and estimation toolkit for a reconfigurable three-mode
//! integrated interferometer with thermo-optic phase control.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characterization;
pub mod cli;
pub mod config;
pub mod device;
pub mod error;
pub mod estimation;
pub mod grid;
pub mod matrix;
pub mod optimize;
pub mod photonics;
pub mod thermal;
pub mod unitary;

pub use config::DeviceConfig;
pub use device::DeviceParams;
pub use error::{Error, Result};
pub use grid::PhaseGrid;
pub use matrix::ComplexMatrix;
pub use photonics::{DistinguishabilityModel, FockState, OutputDistribution};
pub use thermal::{ResistorBank, ResistorId, VoltageSetting};
pub use unitary::{PhaseVector, TritterParams};
