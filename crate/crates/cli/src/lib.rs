//! Command-line front end for the `omffm` solver: single runs, benchmark
//! campaigns, offline metrics and performance profiles.

pub mod bench;
pub mod commands;
pub mod error;
pub mod front;

pub use bench::{cell_seed, run_campaign_with, CampaignSpec, Cell, CellRecord, Solver};
pub use error::{CliError, CliResult};
pub use front::{write_atomic, FrontFile};
