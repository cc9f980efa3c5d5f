//! Lumped-parameter simulator for electrostatic cantilever RF-MEMS switches
//! operated between room temperature and liquid-helium temperatures.
//!
//! The crate is split along the physical pipeline:
//!
//! * [`params`] and [`model`]: parameter sets and temperature-dependent derived
//!   quantities (gap, pull-in voltage, on-resistance, package pressure).
//! * [`calibrate`]: derives the default parameter set from measured targets.
//! * [`dynamics`]: 1-DOF transient integration with penalty contact.
//! * [`waveform`] and [`optimize`]: gate programs and soft-landing search.
//! * [`rf`]: series-element S-parameters.
//! * [`network`]: SP4T routing and two-switch logic gates.
//! * [`harness`]: scenario runner, presets, sweeps and cycling reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` is used on purpose: it also rejects NaN.

pub mod calibrate;
pub mod dynamics;
pub mod harness;
pub mod model;
pub mod network;
pub mod optimize;
pub mod params;
pub mod rf;
pub mod waveform;

pub use params::{Environment, SwitchParams};
