//! Numerical machinery for fixed-angle inverse scattering in the Born regime.
//!
//! The crate evaluates the double dispersion operator of fixed-angle
//! scattering on the Fourier side, splits it into its spherical
//! (Ewald-sphere) and principal-value parts, averages it over incidence
//! directions, and builds the radial counterexample potentials `g_β` used to
//! probe how much regularity `q - q_θ` can gain over `q`.
//!
//! Module map:
//!
//! - [`spectral`]: grids, fields, FFTs, radial transforms, Sobolev norms.
//! - [`potentials`]: Gaussians, bumps `φ = ψ∗ψ` and the family `g_β`.
//! - [`geometry`]: the fixed-angle chart, cones, sphere rules, Ewald spheres.
//! - [`dispersion`]: cutoff, `S_{θ,r}`, `K_r`, `dS/dr`, principal value, `B_{θ,2}`, `Q_{θ,2}`, `Q_{F,2}`.
//! - [`bounds`]: closed-form exponents and regularity thresholds.
//! - [`analysis`]: decay fits, refinement scans and verdicts.
//! - [`oracle`]: brute-force references used to cross-check the operators.
//! - [`experiments`]: JSON-configured desk-scale studies (driven by the CLI).
//!
//! Fourier convention throughout: `f̂(ξ) = ∫ e^{-ix·ξ} f(x) dx`, inverse with
//! `(2π)^{-n}`. The operator formulas carry no extra normalization constants.

pub mod analysis;
pub mod bounds;
pub mod dispersion;
mod error;
pub mod exec;
pub mod experiments;
pub mod geometry;
pub mod oracle;
pub mod potentials;
pub mod quad;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Points in frequency or physical space. Two-dimensional problems keep the
/// third component at zero.
pub type Point = nalgebra::Vector3<f64>;

/// Builds a [`Point`] from a slice of length 2 or 3.
pub fn point(coords: &[f64]) -> Point {
    match coords.len() {
        2 => Point::new(coords[0], coords[1], 0.0),
        3 => Point::new(coords[0], coords[1], coords[2]),
        len => panic!("points must have 2 or 3 coordinates, got {len}"),
    }
}

/// Volume of the unit sphere `S^{n-1}`: `2π` for `n = 2`, `4π` for `n = 3`.
pub fn sphere_measure(n: usize) -> f64 {
    match n {
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => panic!("dimension {n} not supported"),
    }
}

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "n",
            reason: format!("dimension must be 2 or 3, got {n}"),
        })
    }
}
