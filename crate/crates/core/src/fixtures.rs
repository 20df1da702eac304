//! Bundled worked examples: the pentagon, the parallelogram (a triangle with
//! two extra edge points) and the two "circles" coefficient vectors on it.

use crate::spectrum::{parse_coefficients, NullBasis, Spectrum};

pub const PENTAGON_TXT: &str = include_str!("../data/pentagon.txt");
pub const PARALLELOGRAM_TXT: &str = include_str!("../data/parallelogram.txt");
pub const CIRCLES_G1_TXT: &str = include_str!("../data/circles_g1.txt");
pub const CIRCLES_G2_TXT: &str = include_str!("../data/circles_g2.txt");

pub fn pentagon() -> Spectrum {
    Spectrum::parse(PENTAGON_TXT).expect("bundled pentagon spectrum")
}

pub fn parallelogram() -> Spectrum {
    Spectrum::parse(PARALLELOGRAM_TXT).expect("bundled parallelogram spectrum")
}

/// `(e^{y1} + 1/2)^2 + (e^{y2} - 2)^2 - 1`.
pub fn circles_g1() -> Vec<f64> {
    parse_coefficients(CIRCLES_G1_TXT, 5).expect("bundled coefficients")
}

/// `(e^{y1} + 3/2)^2 + (e^{y2} - 3/2)^2 - 1`.
pub fn circles_g2() -> Vec<f64> {
    parse_coefficients(CIRCLES_G2_TXT, 5).expect("bundled coefficients")
}

/// A four-digit reference null basis for the pentagon.
pub fn pentagon_reference_basis() -> NullBasis {
    NullBasis::from_rows(&[
        &[0.5079, 0.5420],
        &[-0.8069, 0.1199],
        &[0.1721, -0.7974],
        &[0.2267, -0.0851],
        &[-0.0997, 0.2206],
    ])
}

/// A four-digit reference null basis for the parallelogram.
pub fn parallelogram_reference_basis() -> NullBasis {
    NullBasis::from_rows(&[
        &[0.4335, 0.3127],
        &[-0.8035, 0.2002],
        &[-0.0635, -0.8256],
        &[0.4018, -0.1001],
        &[0.0317, 0.4128],
    ])
}

/// Nonempty pentagon sign classes in their customary listing order.
pub const PENTAGON_CLASS_ORDER: [&str; 5] = ["++--+", "-+++-", "+--++", "-++-+", "+-++-"];
