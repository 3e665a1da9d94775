//! Test potentials: Gaussians with exact transforms, the self-convolved bump
//! `φ = ψ∗ψ`, and the radial counterexample family `g_β = φ·G_β`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{
    fourier, japanese, radial_transform_fn, Field, Grid, RadialProfile, TransformDirection,
};
use crate::{check_dimension, Error, Point, Result};

/// Gradient of a complex-valued function of a point.
pub type ComplexGradient = Vector3<Complex64>;

/// Closure type for user-supplied evaluators.
pub type PointFn = Arc<dyn Fn(&Point) -> Complex64 + Send + Sync>;

/// Largest `⟨Ξ⟩^{-n/2-β}` accepted when synthesizing `g_β` on a grid.
pub const ALIASING_LIMIT: f64 = 1e-2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialFlags {
    pub is_real: bool,
    pub is_radial: bool,
    pub fourier_nonneg: bool,
}

#[derive(Clone)]
enum Model {
    /// `e^{-a|x|²}`
    Gaussian { a: f64 },
    /// Radial tables in both domains; the space table is cut at the support.
    Radial {
        space: RadialProfile,
        frequency: RadialProfile,
    },
    Custom {
        space: Option<PointFn>,
        frequency: PointFn,
        width: f64,
    },
}

/// A potential `q` with paired space and Fourier evaluators.
#[derive(Clone)]
pub struct Potential {
    label: String,
    dimension: usize,
    model: Model,
    amplitude: f64,
    support_radius: f64,
    flags: PotentialFlags,
    beta: Option<f64>,
    warned: Arc<AtomicBool>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .field("amplitude", &self.amplitude)
            .field("support_radius", &self.support_radius)
            .field("flags", &self.flags)
            .field("beta", &self.beta)
            .finish_non_exhaustive()
    }
}

/// JSON descriptor of a potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialDescriptor {
    pub label: String,
    pub dimension: usize,
    pub flags: PotentialFlags,
    pub beta: Option<f64>,
    /// `None` for unbounded support.
    pub support_radius: Option<f64>,
    pub amplitude: f64,
}

impl Potential {
    /// `q(x) = e^{-a|x|²}`, `q̂(ξ) = (π/a)^{n/2} e^{-|ξ|²/(4a)}`.
    pub fn gaussian(n: usize, a: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("Gaussian width parameter must be positive, got {a}"),
            });
        }
        Ok(Self {
            label: format!("gaussian(a={a})"),
            dimension: n,
            model: Model::Gaussian { a },
            amplitude: 1.0,
            support_radius: f64::INFINITY,
            flags: PotentialFlags {
                is_real: true,
                is_radial: true,
                fourier_nonneg: true,
            },
            beta: None,
            warned: Arc::default(),
        })
    }

    /// Radial potential from tables of `q` (on `[0, support]`) and `q̂`.
    pub fn radial(
        label: impl Into<String>,
        n: usize,
        space: RadialProfile,
        frequency: RadialProfile,
        support_radius: f64,
        fourier_nonneg: bool,
    ) -> Result<Self> {
        check_dimension(n)?;
        Ok(Self {
            label: label.into(),
            dimension: n,
            model: Model::Radial { space, frequency },
            amplitude: 1.0,
            support_radius,
            flags: PotentialFlags {
                is_real: true,
                is_radial: true,
                fourier_nonneg,
            },
            beta: None,
            warned: Arc::default(),
        })
    }

    /// Potential given by closures. `width` is the radius scale on which `q̂`
    /// varies, used to size sphere quadratures.
    pub fn custom(
        label: impl Into<String>,
        n: usize,
        space: Option<PointFn>,
        frequency: PointFn,
        flags: PotentialFlags,
        width: f64,
    ) -> Result<Self> {
        check_dimension(n)?;
        Ok(Self {
            label: label.into(),
            dimension: n,
            model: Model::Custom {
                space,
                frequency,
                width,
            },
            amplitude: 1.0,
            support_radius: f64::INFINITY,
            flags,
            beta: None,
            warned: Arc::default(),
        })
    }

    /// The same potential multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.amplitude *= factor;
        out.flags.fourier_nonneg = self.flags.fourier_nonneg && factor >= 0.0;
        out.label = format!("{}*{}", factor, self.label);
        out
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn flags(&self) -> PotentialFlags {
        self.flags
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Fourier profile of a radial tabulated potential.
    pub fn frequency_profile(&self) -> Option<&RadialProfile> {
        match &self.model {
            Model::Radial { frequency, .. } => Some(frequency),
            _ => None,
        }
    }

    /// Space profile of a radial tabulated potential.
    pub fn space_profile(&self) -> Option<&RadialProfile> {
        match &self.model {
            Model::Radial { space, .. } => Some(space),
            _ => None,
        }
    }

    /// Whether `q̂` has an analytic evaluator (no tables involved).
    pub fn has_analytic_fourier(&self) -> bool {
        matches!(self.model, Model::Gaussian { .. })
    }

    /// `q(x)`.
    pub fn eval_space(&self, x: &Point) -> Complex64 {
        let r = x.norm();
        let v = match &self.model {
            Model::Gaussian { a } => Complex64::new((-a * r * r).exp(), 0.0),
            Model::Radial { space, .. } => {
                if r >= self.support_radius {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(space.eval(r), 0.0)
                }
            }
            Model::Custom { space, .. } => match space {
                Some(f) => f(x),
                None => Complex64::new(f64::NAN, 0.0),
            },
        };
        v * self.amplitude
    }

    /// `q̂(ξ)`.
    pub fn eval_fourier(&self, xi: &Point) -> Complex64 {
        let v = match &self.model {
            Model::Gaussian { a } => {
                let c = (PI / a).powf(0.5 * self.dimension as f64);
                Complex64::new(c * (-xi.norm_squared() / (4.0 * a)).exp(), 0.0)
            }
            Model::Radial { frequency, .. } => {
                let rho = xi.norm();
                self.note_extrapolation(rho, frequency);
                Complex64::new(frequency.eval(rho), 0.0)
            }
            Model::Custom { frequency, .. } => frequency(xi),
        };
        v * self.amplitude
    }

    /// `∇q̂(ξ)`; radial tables use the spline derivative, closures a central
    /// difference.
    pub fn fourier_gradient(&self, xi: &Point) -> ComplexGradient {
        let zero = Complex64::new(0.0, 0.0);
        match &self.model {
            Model::Gaussian { a } => {
                let v = self.eval_fourier(xi) * (-0.5 / a);
                Vector3::new(v * xi[0], v * xi[1], v * xi[2])
            }
            Model::Radial { frequency, .. } => {
                let rho = xi.norm();
                if rho == 0.0 {
                    return Vector3::new(zero, zero, zero);
                }
                self.note_extrapolation(rho, frequency);
                let d = frequency.derivative(rho) * self.amplitude / rho;
                Vector3::new(
                    Complex64::new(d * xi[0], 0.0),
                    Complex64::new(d * xi[1], 0.0),
                    Complex64::new(d * xi[2], 0.0),
                )
            }
            Model::Custom { .. } => {
                let step = 1e-5 * xi.norm().max(1.0);
                let mut g = Vector3::new(zero, zero, zero);
                for axis in 0..self.dimension {
                    let mut e = Point::zeros();
                    e[axis] = step;
                    g[axis] = (self.eval_fourier(&(xi + e)) - self.eval_fourier(&(xi - e))) / (2.0 * step);
                }
                g
            }
        }
    }

    /// Radius at which `|q̂|` falls to half its value at the origin.
    pub fn fourier_half_width(&self) -> f64 {
        match &self.model {
            Model::Gaussian { a } => 2.0 * (a * 2f64.ln()).sqrt(),
            Model::Radial { frequency, .. } => {
                let v0 = frequency.eval(0.0).abs();
                frequency
                    .radii()
                    .iter()
                    .zip(frequency.values())
                    .find(|(_, v)| v.abs() <= 0.5 * v0)
                    .map(|(r, _)| *r)
                    .unwrap_or_else(|| frequency.max_radius())
                    .max(1e-3)
            }
            Model::Custom { width, .. } => *width,
        }
    }

    fn note_extrapolation(&self, rho: f64, profile: &RadialProfile) {
        if rho > profile.max_radius() && !self.warned.swap(true, Ordering::Relaxed) {
            log::warn!(
                "{}: evaluating Fourier profile at |ξ| = {rho:.3} beyond the table (max {:.3}); using the fitted tail",
                self.label,
                profile.max_radius()
            );
        }
    }

    /// Samples `q̂` on the frequency lattice of `grid`.
    pub fn frequency_field(&self, grid: Grid) -> Result<Field> {
        self.check_grid(&grid)?;
        Ok(Field::from_frequency_fn(grid, |xi| self.eval_fourier(xi)))
    }

    /// Samples `q` on the space lattice of `grid`.
    pub fn space_field(&self, grid: Grid) -> Result<Field> {
        self.check_grid(&grid)?;
        Ok(Field::from_space_fn(grid, |x| self.eval_space(x)))
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dimension() != self.dimension {
            return Err(Error::InvalidGrid(format!(
                "potential is {}-dimensional, grid is {}-dimensional",
                self.dimension,
                grid.dimension()
            )));
        }
        Ok(())
    }

    pub fn descriptor(&self) -> PotentialDescriptor {
        PotentialDescriptor {
            label: self.label.clone(),
            dimension: self.dimension,
            flags: self.flags,
            beta: self.beta,
            support_radius: self.support_radius.is_finite().then_some(self.support_radius),
            amplitude: self.amplitude,
        }
    }

    /// Writes the JSON descriptor.
    pub fn write_descriptor<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &self.descriptor())?;
        Ok(())
    }

    /// Writes the Fourier profile as `radius,value` CSV.
    pub fn write_profile_csv<W: Write>(&self, w: W) -> Result<()> {
        match self.frequency_profile() {
            Some(p) => p.write_csv(w),
            None => Err(Error::Unsupported(format!(
                "{} has no tabulated radial profile",
                self.label
            ))),
        }
    }
}

/// `q̂(ξ)`; free-function form of [`Potential::eval_fourier`].
pub fn eval_fourier(q: &Potential, xi: &Point) -> Complex64 {
    q.eval_fourier(xi)
}

/// `Ĝ_β(ξ) = ⟨ξ⟩^{-n/2-β}`.
pub fn bessel_kernel_hat(xi: &Point, beta: f64, n: usize) -> f64 {
    (1.0 + xi.norm_squared()).powf(-0.5 * (0.5 * n as f64 + beta))
}

/// `exp(-1/(1-(r/R)²))` for `r < R`, zero beyond.
pub fn mollifier(r: f64, radius: f64) -> f64 {
    let s = r / radius;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

// The mollifier flattens toward its edge; graded breaks keep the adaptive
// quadrature cheap there.
fn mollifier_breaks(radius: f64) -> Vec<f64> {
    [0.0, 0.5, 0.75, 0.875, 1.0].iter().map(|s| s * radius).collect()
}

pub fn gaussian_potential(a: f64, grid: &Grid) -> Result<Potential> {
    Potential::gaussian(grid.dimension(), a)
}

fn check_bump(radius: f64, grid: &Grid) -> Result<()> {
    if !(radius > 0.0) || 2.0 * radius > 0.5 * grid.half_extent() {
        return Err(Error::InvalidParameter {
            name: "bump_radius",
            reason: format!(
                "need 0 < 2·radius ≤ L/2 (radius {radius}, L {})",
                grid.half_extent()
            ),
        });
    }
    Ok(())
}

/// `φ = ψ∗ψ` sampled on the grid through the FFT, so its discrete transform
/// is the exact square of a real transform.
fn bump_space_field(radius: f64, grid: Grid) -> Result<Field> {
    let psi = Field::from_space_fn(grid, |x| Complex64::new(mollifier(x.norm(), radius), 0.0));
    let mut psi_hat = fourier(&psi, TransformDirection::Forward)?;
    for v in psi_hat.samples_mut() {
        *v = *v * *v;
    }
    fourier(&psi_hat, TransformDirection::Inverse)
}

/// Profile of a radial field along the positive first axis.
fn axis_profile(field: &Field, cut: f64) -> Result<RadialProfile> {
    let grid = field.grid();
    let n = grid.samples_per_axis();
    let h = grid.spacing();
    let stride = n.pow(grid.dimension() as u32 - 1);
    let origin = grid.origin_index();
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for j in 0..n / 2 {
        let r = j as f64 * h;
        radii.push(r);
        values.push(if r >= cut { 0.0 } else { field.samples()[origin + j * stride].re });
        if r >= cut + 2.0 * h {
            break;
        }
    }
    RadialProfile::new(radii, values)
}

/// Fourier radii used when tabulating analytic radial transforms.
fn frequency_table(grid: &Grid) -> Vec<f64> {
    let step = 0.25 * grid.frequency_spacing();
    let count = (grid.nyquist() / step).ceil() as usize;
    (0..=count).map(|i| i as f64 * step).collect()
}

/// The bump `φ = ψ∗ψ` with `ψ` the standard mollifier of the given radius.
/// `φ̂ = ψ̂²` comes from the radial transform of `ψ`.
pub fn make_bump(radius: f64, grid: &Grid) -> Result<Potential> {
    check_bump(radius, grid)?;
    let n = grid.dimension();
    let phi = bump_space_field(radius, *grid)?;
    let space = axis_profile(&phi, 2.0 * radius)?;
    let radii = frequency_table(grid);
    let breaks = mollifier_breaks(radius);
    let psi_hat = radial_transform_fn(|r| mollifier(r, radius), n, TransformDirection::Forward, &breaks, &radii)?;
    let values: Vec<f64> = psi_hat.iter().map(|v| v * v).collect();
    let frequency = RadialProfile::new(radii, values)?;
    Potential::radial(format!("bump(R={radius})"), n, space, frequency, 2.0 * radius, true)
}

/// Smallest radius beyond which `φ̂ = ψ̂²` stays below `level·φ̂(0)`.
pub fn bump_spectral_width(radius: f64, n: usize, level: f64) -> Result<f64> {
    let step = 0.05 / radius;
    let radii: Vec<f64> = (0..=400).map(|i| i as f64 * step).collect();
    let breaks = mollifier_breaks(radius);
    let psi_hat = radial_transform_fn(|r| mollifier(r, radius), n, TransformDirection::Forward, &breaks, &radii)?;
    let peak = psi_hat[0] * psi_hat[0];
    let last_above = psi_hat.iter().rposition(|v| v * v > level * peak).unwrap_or(0);
    Ok(radii[(last_above + 1).min(radii.len() - 1)])
}

/// Parameters of the counterexample potential `g_β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GBetaSpec {
    pub beta: f64,
    pub bump_radius: f64,
    pub grid: Grid,
}

impl GBetaSpec {
    pub fn new(beta: f64, bump_radius: f64, grid: Grid) -> Self {
        Self {
            beta,
            bump_radius,
            grid,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("must be positive, got {}", self.beta),
            });
        }
        check_bump(self.bump_radius, &self.grid)?;
        let n = self.grid.dimension() as f64;
        let edge = japanese(self.grid.nyquist()).powf(-0.5 * n - self.beta);
        if edge > ALIASING_LIMIT {
            return Err(Error::Aliasing(format!(
                "⟨Ξ⟩^(-n/2-β) = {edge:.3e} exceeds {ALIASING_LIMIT:e}; refine the grid (Ξ = {:.3})",
                self.grid.nyquist()
            )));
        }
        Ok(())
    }
}

/// `g_β` together with diagnostics of its synthesis.
#[derive(Clone, Debug)]
pub struct GBetaSynthesis {
    pub potential: Potential,
    /// `min ĝ_β / ĝ_β(0)` over the whole frequency lattice.
    pub min_ratio: f64,
    /// `max |Im ĝ_β| / ĝ_β(0)`.
    pub max_imag_ratio: f64,
    /// `max |Im g_β| / max |g_β|` in space.
    pub space_imag_ratio: f64,
    /// Largest `|g_β|` found outside `support + h`.
    pub outside_support: f64,
    pub frequency: Field,
}

/// Runs the `g_β` pipeline: `Ĝ_β` on the lattice, inverse transform,
/// multiplication by `φ`, forward transform, shell-averaged profile with a
/// fitted power-law tail.
pub fn synthesize_gbeta(spec: &GBetaSpec) -> Result<GBetaSynthesis> {
    spec.validate()?;
    let grid = spec.grid;
    let n = grid.dimension();
    let g_hat = Field::from_frequency_fn(grid, |xi| Complex64::new(bessel_kernel_hat(xi, spec.beta, n), 0.0));
    let mut g = fourier(&g_hat, TransformDirection::Inverse)?;
    let phi = bump_space_field(spec.bump_radius, grid)?;
    for (v, p) in g.samples_mut().iter_mut().zip(phi.samples()) {
        *v *= p.re;
    }
    let support = 2.0 * spec.bump_radius;
    let h = grid.spacing();
    let scale = g.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let space_imag_ratio = g.samples().iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale;
    let outside_support = (0..grid.len())
        .filter(|&i| grid.space_point(i).norm() > support + h)
        .map(|i| g.samples()[i].norm())
        .fold(0.0, f64::max);
    let space = axis_profile(&g, support)?;
    let freq = fourier(&g, TransformDirection::Forward)?;
    // The lattice convolution with φ̂ wraps around the periodic frequency box,
    // which inflates shells within the spectral width of φ̂ from the edge.
    let margin = bump_spectral_width(spec.bump_radius, n, 1e-2)?;
    let (radii, values) = shell_average(&freq, grid.nyquist() - margin);
    let v0 = freq.samples()[grid.origin_index()].re;
    let min_ratio = freq.samples().iter().map(|z| z.re).fold(f64::INFINITY, f64::min) / v0;
    let max_imag_ratio = freq.samples().iter().map(|z| z.im.abs()).fold(0.0, f64::max) / v0;
    let frequency = RadialProfile::new(radii, values)?;
    let mut potential = Potential::radial(
        format!("g_beta(beta={}, n={n})", spec.beta),
        n,
        space,
        frequency,
        support,
        true,
    )?;
    potential.beta = Some(spec.beta);
    Ok(GBetaSynthesis {
        potential,
        min_ratio,
        max_imag_ratio,
        space_imag_ratio,
        outside_support,
        frequency: freq,
    })
}

pub fn make_gbeta(spec: &GBetaSpec) -> Result<Potential> {
    Ok(synthesize_gbeta(spec)?.potential)
}

/// Averages the real part of a frequency field over lattice shells of width
/// `Δξ`. Each shell is placed at the mean radius of its points; only shells
/// with mean radius up to `max_radius` are kept.
pub fn shell_average(field: &Field, max_radius: f64) -> (Vec<f64>, Vec<f64>) {
    let grid = field.grid();
    let d = grid.frequency_spacing();
    let shells = (grid.nyquist() * (grid.dimension() as f64).sqrt() / d).ceil() as usize + 2;
    let mut sum_r = vec![0.0; shells];
    let mut sum_v = vec![0.0; shells];
    let mut count = vec![0usize; shells];
    for (i, z) in field.samples().iter().enumerate() {
        let r = grid.frequency_point(i).norm();
        let s = (r / d).round() as usize;
        sum_r[s] += r;
        sum_v[s] += z.re;
        count[s] += 1;
    }
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for s in 0..shells {
        if count[s] == 0 {
            continue;
        }
        let r = sum_r[s] / count[s] as f64;
        if r > max_radius.min(grid.nyquist()) {
            break;
        }
        radii.push(r);
        values.push(sum_v[s] / count[s] as f64);
    }
    (radii, values)
}

/// Estimated constants of `q̂(ξ) ≥ C⟨ξ⟩^{-n/2-β}` for `|ξ| > c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundEstimate {
    pub constant: f64,
    pub threshold: f64,
}

/// Smallest ratio `q̂(ρ)⟨ρ⟩^{n/2+β}` over the tabulated radii beyond
/// `threshold`.
pub fn estimate_lower_bound(q: &Potential, beta: f64, threshold: f64) -> Result<LowerBoundEstimate> {
    let profile = q.frequency_profile().ok_or_else(|| {
        Error::Unsupported(format!("{} has no tabulated radial profile", q.label()))
    })?;
    let p = 0.5 * q.dimension() as f64 + beta;
    let constant = profile
        .radii()
        .iter()
        .zip(profile.values())
        .filter(|(r, _)| **r > threshold)
        .map(|(r, v)| v * q.amplitude() * japanese(*r).powf(p))
        .fold(f64::INFINITY, f64::min);
    if !constant.is_finite() {
        return Err(Error::InsufficientSamples { got: 0, need: 1 });
    }
    Ok(LowerBoundEstimate { constant, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use nalgebra::Rotation3;
    use proptest::prelude::*;

    #[test]
    fn kernel_values() {
        assert_eq!(bessel_kernel_hat(&Point::zeros(), 1.0, 3), 1.0);
        let xi = Point::new(1.0, 1.0, 1.0);
        assert!((bessel_kernel_hat(&xi, 1.0, 3) - 2f64.powf(-2.5)).abs() < 1e-15);
        assert!(bessel_kernel_hat(&Point::new(2.0, 0.0, 0.0), 0.5, 2) < bessel_kernel_hat(&Point::new(1.0, 0.0, 0.0), 0.5, 2));
    }

    #[test]
    fn gaussian_values_and_errors() {
        let grid = make_grid(2, 16, 4.0).unwrap();
        let q = gaussian_potential(0.5, &grid).unwrap();
        assert!((q.eval_fourier(&Point::zeros()).re - 2.0 * PI).abs() < 1e-14);
        assert!(q.flags().fourier_nonneg);
        let q3 = Potential::gaussian(3, 2.0).unwrap();
        assert!((q3.eval_fourier(&Point::zeros()).re - (PI / 2.0).powf(1.5)).abs() < 1e-14);
        assert!(gaussian_potential(0.0, &grid).is_err());
        assert!(gaussian_potential(-1.0, &grid).is_err());
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let q = Potential::gaussian(3, 0.7).unwrap();
        let xi = Point::new(0.3, -1.1, 0.8);
        let g = q.fourier_gradient(&xi);
        for axis in 0..3 {
            let mut e = Point::zeros();
            e[axis] = 1e-6;
            let fd = (q.eval_fourier(&(xi + e)) - q.eval_fourier(&(xi - e))) / 2e-6;
            assert!((g[axis] - fd).norm() < 1e-8);
        }
    }

    #[test]
    fn scaling_multiplies_both_sides() {
        let q = Potential::gaussian(2, 1.0).unwrap();
        let q2 = q.scaled(2.0);
        let xi = Point::new(0.4, 0.2, 0.0);
        assert!((q2.eval_fourier(&xi) - q.eval_fourier(&xi) * 2.0).norm() < 1e-15);
        assert!((q2.eval_space(&xi) - q.eval_space(&xi) * 2.0).norm() < 1e-15);
        assert!(!q.scaled(-1.0).flags().fourier_nonneg);
    }

    #[test]
    fn bump_properties() {
        let grid = make_grid(2, 64, 8.0).unwrap();
        let phi = make_bump(1.0, &grid).unwrap();
        let f0 = phi.eval_fourier(&Point::zeros()).re;
        assert!(f0 > 0.0);
        let psi0 = radial_transform_fn(|r| mollifier(r, 1.0), 2, TransformDirection::Forward, &[0.0, 0.5, 1.0], &[0.0])
            .unwrap()[0];
        assert!((f0 - psi0 * psi0).abs() < 1e-10 * f0);
        for i in 0..200 {
            let xi = Point::new(i as f64 * 0.1, 0.0, 0.0);
            assert!(phi.eval_fourier(&xi).re >= 0.0);
        }
        assert!(phi.eval_space(&Point::zeros()).re > 0.0);
        let h = grid.spacing();
        assert_eq!(phi.eval_space(&Point::new(2.0 + h, 0.0, 0.0)).re, 0.0);
        assert_eq!(phi.support_radius(), 2.0);
        // grid convolution agrees with the analytic transform at the origin
        assert!((phi.eval_space(&Point::zeros()).re - phi.space_profile().unwrap().values()[0]).abs() < 1e-15);
    }

    #[test]
    fn bump_rejects_large_radius() {
        let grid = make_grid(2, 32, 4.0).unwrap();
        assert!(make_bump(1.5, &grid).is_err());
    }

    #[test]
    fn gbeta_two_dimensional_synthesis() {
        let grid = make_grid(2, 128, 16.0).unwrap();
        let s = synthesize_gbeta(&GBetaSpec::new(1.0, 2.0, grid)).unwrap();
        let q = &s.potential;
        assert!(q.eval_fourier(&Point::zeros()).re > 0.0);
        assert!(s.min_ratio >= -1e-8);
        assert!(s.max_imag_ratio < 1e-9);
        assert!(s.space_imag_ratio < 1e-9);
        assert!(s.outside_support < 1e-12);
        assert_eq!(q.beta(), Some(1.0));
        let flags = q.flags();
        assert!(flags.is_real && flags.is_radial && flags.fourier_nonneg);
        let lb = estimate_lower_bound(q, 1.0, 1.0).unwrap();
        assert!(lb.constant > 0.0);
    }

    #[test]
    fn gbeta_far_tail_matches_finer_grid() {
        let coarse = make_grid(2, 128, 16.0).unwrap();
        let fine = make_grid(2, 256, 16.0).unwrap();
        let qc = make_gbeta(&GBetaSpec::new(1.0, 2.0, coarse)).unwrap();
        let qf = make_gbeta(&GBetaSpec::new(1.0, 2.0, fine)).unwrap();
        let last = qc.frequency_profile().unwrap().max_radius();
        let xi = Point::new(2.0 * last, 0.0, 0.0);
        let a = qc.eval_fourier(&xi).re;
        let b = qf.eval_fourier(&xi).re;
        assert!((a - b).abs() <= 0.05 * b, "{a} vs {b}");
    }

    #[test]
    fn gbeta_rejects_coarse_grid_and_bad_beta() {
        let grid = make_grid(2, 16, 16.0).unwrap();
        assert!(matches!(
            make_gbeta(&GBetaSpec::new(0.2, 2.0, grid)),
            Err(Error::Aliasing(_))
        ));
        let grid = make_grid(2, 128, 16.0).unwrap();
        assert!(make_gbeta(&GBetaSpec::new(0.0, 2.0, grid)).is_err());
        assert!(make_gbeta(&GBetaSpec::new(1.0, 5.0, grid)).is_err());
    }

    #[test]
    fn descriptor_and_csv_export() {
        let grid = make_grid(2, 64, 8.0).unwrap();
        let phi = make_bump(1.0, &grid).unwrap();
        let mut json = Vec::new();
        phi.write_descriptor(&mut json).unwrap();
        let d: PotentialDescriptor = serde_json::from_slice(&json).unwrap();
        assert_eq!(d.support_radius, Some(2.0));
        assert!(d.flags.is_radial);
        let mut csv = Vec::new();
        phi.write_profile_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("radius,value\n"));
        assert!(Potential::gaussian(2, 1.0).unwrap().write_profile_csv(Vec::new()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn radial_potentials_are_rotation_invariant(
            x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0,
            ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -1.0f64..1.0, angle in 0.0f64..6.28,
        ) {
            let q = Potential::gaussian(3, 0.5).unwrap();
            let axis = nalgebra::Unit::new_normalize(Vector3::new(ax, ay, az + 1e-3));
            let rot = Rotation3::from_axis_angle(&axis, angle);
            let xi = Point::new(x, y, z);
            let a = q.eval_fourier(&xi);
            let b = q.eval_fourier(&(rot * xi));
            prop_assert!((a - b).norm() <= 1e-8 * q.eval_fourier(&Point::zeros()).norm());
            prop_assert!(a.im.abs() <= 1e-8);
        }
    }
}
