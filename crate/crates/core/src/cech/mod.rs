//! Čech-type gluing of local variational data over an atlas.

mod atlas;
mod classes;
mod cochain;
mod cycle;
mod numeric;
mod presentation;
mod report;
mod sections;

pub use atlas::*;
pub use classes::*;
pub use cochain::*;
pub use cycle::*;
pub use numeric::*;
pub use presentation::*;
pub use report::*;
pub use sections::*;

#[cfg(test)]
mod tests;
