//! Construction, exact order verification, numerical testing and
//! coefficient search for exponential splitting methods.
//!
//! The crate is layered bottom-up:
//!
//! * [`series`]: truncated noncommutative power series with exact rational
//!   coefficients;
//! * [`schemes`]: the factor-list scheme model, catalog, file format and
//!   compilers to series;
//! * [`order`]: exact propagator series, order determination and
//!   order-condition residuals;
//! * [`numerics`]: matrix exponentials and empirical convergence orders on
//!   linear test problems;
//! * [`search`]: multi-start positivity-constrained coefficient search and
//!   the feasibility experiments built on it;
//! * [`config`]: TOML run configuration shared by the command-line tool.

pub mod series;
pub mod schemes;
pub mod order;
pub mod numerics;
pub mod search;
pub mod config;
