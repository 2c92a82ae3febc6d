//! Adaptive pilot-pattern selection for OFDM channel estimation.
//!
//! The crate is organised as a small link-level simulator:
//! [`grid`] lays out the time-frequency resource grid, [`phy`] moves it to
//! and from the time domain, [`channel`] applies a time-varying multipath
//! channel with AWGN, [`estimation`] turns received pilots into channel
//! estimates, [`controller`] chooses the pilot pattern, and [`harness`]
//! runs links and studies.

pub mod channel;
pub mod controller;
pub mod error;
pub mod estimation;
pub mod grid;
pub mod harness;
pub mod phy;

pub use channel::{ChannelProfile, ChannelState, StationarityMode};
pub use controller::{BoundarySet, Controller, ControllerParams, Feedback, PatternSpec};
pub use error::{Error, Result};
pub use estimation::ChannelEstimate;
pub use grid::{CellRole, LinkConfig, OfdmGrid, PilotArrangement, PilotLayout};
pub use harness::link::{run_link, LinkMode, LinkSimulator, RunMetrics};
pub use phy::constellation::Modulation;
