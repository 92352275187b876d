//! Domains, samplers, importance resampling and quadrature rules.

mod batch;
mod domain;
mod quadrature;
mod resample;

pub use batch::{augment_points, PointBatch};
pub use domain::{unit_ball_volume, Domain, SubRegion};
pub use quadrature::{gauss_legendre, Quadrature};
pub use resample::resample_from_indicator;
