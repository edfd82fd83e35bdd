//! Special functions and quadrature.

pub mod contour;
pub mod diff;
pub mod gamma;
pub mod hypergeometric;
pub mod quadrature;

pub use contour::{cauchy_derivative, circle_mean, contour_residue, ContourSpec};
pub use diff::{fd_derivative, fd_derivative_c};
pub use gamma::{gamma, gamma_ratio, log_gamma, rgamma};
pub use hypergeometric::{gauss_2f1, gauss_2f1_detailed, Hyp2F1, Route};
pub use quadrature::{
    gauss_legendre, integrate_adaptive, integrate_halfline, integrate_vertical_line, CompositeRule,
    QuadratureSpec,
};
