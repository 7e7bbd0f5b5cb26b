pub mod carleman;
pub mod closed_form;
pub mod error;
pub mod flow;
pub mod io;
pub mod iterate;
pub mod series;
pub mod spectral;
pub mod tol;
pub mod verify;

pub use carleman::{build_matrix, build_matrix_quadrature, CarlemanMatrix, ShiftTransform};
pub use error::{Error, Result};
pub use series::{find_fixed_point, FixedPointFrame, MapSpec, PowerSeries};
pub use spectral::{diagonalize, SpectralFactorization};
pub use iterate::{build_chart, build_expansion, IterateExpansion, SchroederChart};
pub use flow::{build_field, integrate_flow, lyapunov_logistic, validity_window, FlowField};
