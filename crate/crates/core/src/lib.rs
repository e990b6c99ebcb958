//! Symbolic-numeric workbench for locally variational field equations.
//!
//! Given source forms (field equations) on finite-order jet coordinates and an
//! atlas of the configuration bundle, the crate computes Euler-Lagrange
//! expressions, Helmholtz residuals, local (Tonti) Lagrangians, Noether-type
//! currents, and the Čech-de Rham classes that obstruct gluing local
//! Lagrangians and local currents into global ones. Classes are evaluated by
//! their periods over user-supplied cycles.
//!
//! Layout:
//! - [`expr`]: exact expressions, parsing, differentiation, substitution, equality;
//! - [`quad`]: tensor-product Gauss-Legendre quadrature;
//! - [`jet`]: jet spaces, total derivatives, horizontal forms, vector fields, sections;
//! - [`varcalc`]: Euler-Lagrange, Helmholtz, Tonti, horizontal homotopy, Noether currents;
//! - [`cech`]: atlases, cochains, cycles and obstruction classes;
//! - [`oracle`]: finite-difference and integrator cross-checks;
//! - [`cli`]: problem files, commands and reports.

pub mod cech;
pub mod cli;
mod error;
pub mod expr;
pub mod jet;
pub mod oracle;
pub mod quad;
pub mod varcalc;

pub use error::{Error, ErrorKind, Result};
pub use expr::{Expr, Symbol};
pub use jet::JetSpace;
