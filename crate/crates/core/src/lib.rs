//! Finite-domain situation-calculus workbench: basic action theories,
//! ConGolog programs, refinement mappings between a high-level and a
//! low-level theory, abstraction checks, planning and monitoring.

pub mod abstraction;
pub mod bat;
pub mod congolog;
pub mod error;
pub mod fixtures;
pub mod frontend;
pub mod kernel;
pub mod mapping;
pub mod monitor;
pub mod planning;

pub use error::{Error, Result};
