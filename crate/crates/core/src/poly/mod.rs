//! Sparse complex polynomials in canonical variables, Poisson brackets and
//! Lie series.

mod exponent;
mod geometry;
mod polynomial;
mod series;
mod text;

pub use exponent::{ExponentPair, MAX_DEGREE};
pub use geometry::PolydiskGeometry;
pub use polynomial::{lie_derivative, poisson_bracket, Polynomial};
pub use series::{lie_series_apply, substitute, GradedSeries};
pub use text::parse_polynomial;

pub(crate) use series::lie_derivative_truncated;
