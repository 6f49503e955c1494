//! Averages of randomized class functions over symmetric groups and their
//! relatives, computed by exact partition sums, generating-function
//! coefficient extraction, the Feller coupling and closed-form asymptotics.

// series recurrences read most naturally with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod asymptotics;
pub mod classfun;
pub mod error;
pub mod feller;
pub mod groups;
pub mod mc;
pub mod partitions;
pub mod series;
pub mod verify;

pub use error::{Error, ErrorClass, Result};
