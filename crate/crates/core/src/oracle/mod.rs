//! Brute-force numerical checks, independent of the symbolic operators.

mod conservation;
mod crosscheck;
mod fd;
mod gateaux;

pub use conservation::{conservation_check, ConservationConfig, ConservationReport};
pub use crosscheck::{symbolic_numeric_crosscheck, CrossCheck, TAU_EQ};
pub use fd::{fornberg, SampledSection, RADIUS};
pub use gateaux::{gateaux_check, GateauxConfig, GateauxReport};
