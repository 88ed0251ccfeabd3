pub mod compare;
pub mod darboux_diff;
pub mod darboux_int;
pub mod error;
pub mod field;
pub mod gse;
pub mod jet;
pub mod models;
pub mod tridiag;

pub use error::{Error, Result};
pub use field::{derive, integrate_cumulative, make_grid, sample, wronskian, Grid, ScalarField};
pub use jet::Jet;
