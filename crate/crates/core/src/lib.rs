//! Data-driven analysis and control with the fundamental-lemma
//! parameterizer as the state.

pub mod analysis;
pub mod behavior;
pub mod cli;
pub mod error;
pub mod io;
pub mod numerics;
pub mod plant;
pub mod plot;
pub mod synthesis;

pub use error::{Error, Result};
