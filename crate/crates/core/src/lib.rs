//! Discriminant contours, signed chambers and connected-component counts for
//! real exponential sums.

pub mod bounds;
pub mod contour;
pub mod error;
pub mod fixtures;
pub mod gale;
pub mod linalg;
pub mod spectrum;
pub mod zeroset;

pub use contour::{
    chambers, completed_contour, locate, sample_contour, sign_class, xi, BoxRegion, ChamberMap, ContourCloud,
    ContourSampler, SignReading, SignVector,
};
pub use error::{Error, Result};
pub use spectrum::{NullBasis, Spectrum};
