//! Command-line front end for the skew-product simulator: TOML run configs,
//! reproducible run directories (CSV + manifest), a JSON analysis report,
//! and plot-ready figure data files.

pub mod analysis;
pub mod classify;
pub mod config;
pub mod csvio;
pub mod error;
pub mod excursion;
pub mod figures;
pub mod manifest;
