//! Special functions and quadrature.

pub mod bessel;
pub mod quadrature;
mod stable;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_i_scaled_row};
pub use quadrature::{integrate, integrate_panels, Domain, Estimate, QuadratureSpec};
pub use stable::{
    eta_bound, eta_bound_with, eta_c1, ln_eta_profile, stable_density, unit_stable_density,
    EtaConstants, StableDensityParams,
};
