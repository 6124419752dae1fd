//! Measures with locally constant densities against normalized Haar measure.

mod cell;
mod step;

pub use cell::{mix, CellMeasure};
pub use step::{Coefficient, StepFunction};
