//! Lie-series normal forms near elliptic equilibria of polynomial Hamiltonians,
//! Lyapounov orbits, and the estimates that control the construction.

pub mod bounds;
pub mod error;
pub mod io;
pub mod normalform;
pub mod orbit;
pub mod poly;
pub mod resonance;

pub use error::{Error, Result};
pub use normalform::{normalize, NormalFormResult, NormalizeOptions};
pub use poly::{ExponentPair, GradedSeries, PolydiskGeometry, Polynomial};
pub use resonance::{Mode, Spectrum};
