//! Uniform grids, discrete Fourier transforms, radial transforms and weighted
//! Sobolev norms.
//!
//! Samples are stored row-major with the last axis fastest. Space samples sit
//! at `x_j = -L + j h`; frequency samples sit at `ξ_m = m Δξ` with
//! `m ∈ [-N/2, N/2)` stored at index `m + N/2`.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::quad::{pairwise_sum, Adaptive};
use crate::special::bessel_j0;
use crate::{check_dimension, Error, Point, Result};

/// Uniform sample lattice on `[-L, L)^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dimension: usize,
    samples_per_axis: usize,
    half_extent: f64,
}

pub fn make_grid(n: usize, samples_per_axis: usize, half_extent: f64) -> Result<Grid> {
    Grid::new(n, samples_per_axis, half_extent)
}

impl Grid {
    pub fn new(n: usize, samples_per_axis: usize, half_extent: f64) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {n}")));
        }
        if samples_per_axis < 8 || samples_per_axis % 2 == 1 {
            return Err(Error::InvalidGrid(format!(
                "samples per axis must be even and at least 8, got {samples_per_axis}"
            )));
        }
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half extent must be positive, got {half_extent}"
            )));
        }
        Ok(Self {
            dimension: n,
            samples_per_axis,
            half_extent,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    /// `h = 2L/N`
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.samples_per_axis as f64
    }

    /// `Δξ = π/L`
    pub fn frequency_spacing(&self) -> f64 {
        PI / self.half_extent
    }

    /// `Ξ = πN/(2L)`
    pub fn nyquist(&self) -> f64 {
        PI * self.samples_per_axis as f64 / (2.0 * self.half_extent)
    }

    pub fn len(&self) -> usize {
        self.samples_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn axis_indices(&self, index: usize) -> [usize; 3] {
        let n = self.samples_per_axis;
        let mut out = [0usize; 3];
        let mut rem = index;
        for axis in (0..self.dimension).rev() {
            out[axis] = rem % n;
            rem /= n;
        }
        out
    }

    /// Physical coordinates of sample `index`.
    pub fn space_point(&self, index: usize) -> Point {
        let ids = self.axis_indices(index);
        let h = self.spacing();
        let mut p = Point::zeros();
        for axis in 0..self.dimension {
            p[axis] = -self.half_extent + ids[axis] as f64 * h;
        }
        p
    }

    /// Frequency coordinates of sample `index`.
    pub fn frequency_point(&self, index: usize) -> Point {
        let ids = self.axis_indices(index);
        let d = self.frequency_spacing();
        let half = (self.samples_per_axis / 2) as f64;
        let mut p = Point::zeros();
        for axis in 0..self.dimension {
            p[axis] = (ids[axis] as f64 - half) * d;
        }
        p
    }

    /// Index of the sample at the origin (same slot in both domains).
    pub fn origin_index(&self) -> usize {
        let half = self.samples_per_axis / 2;
        (0..self.dimension).fold(0, |acc, _| acc * self.samples_per_axis + half)
    }

    /// `h^n`
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    /// `Δξ^n`
    pub fn frequency_cell_volume(&self) -> f64 {
        self.frequency_spacing().powi(self.dimension as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Space,
    Frequency,
}

impl Domain {
    fn name(self) -> &'static str {
        match self {
            Domain::Space => "space",
            Domain::Frequency => "frequency",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformDirection {
    Forward,
    Inverse,
}

/// Complex samples on a [`Grid`] in one of the two domains.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    samples: Vec<Complex64>,
    domain: Domain,
}

impl Field {
    pub fn new(grid: Grid, samples: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        Ok(Self {
            grid,
            samples,
            domain,
        })
    }

    pub fn zeros(grid: Grid, domain: Domain) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
            domain,
        }
    }

    /// Samples `f` at the physical lattice points.
    pub fn from_space_fn(grid: Grid, f: impl Fn(&Point) -> Complex64 + Sync + Send) -> Self {
        let idx: Vec<usize> = (0..grid.len()).collect();
        let samples = Exec::Parallel.map(&idx, |&i| f(&grid.space_point(i)));
        Self {
            grid,
            samples,
            domain: Domain::Space,
        }
    }

    /// Samples `f` at the frequency lattice points.
    pub fn from_frequency_fn(grid: Grid, f: impl Fn(&Point) -> Complex64 + Sync + Send) -> Self {
        let idx: Vec<usize> = (0..grid.len()).collect();
        let samples = Exec::Parallel.map(&idx, |&i| f(&grid.frequency_point(i)));
        Self {
            grid,
            samples,
            domain: Domain::Frequency,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Coordinates of sample `index` in this field's domain.
    pub fn point(&self, index: usize) -> Point {
        match self.domain {
            Domain::Space => self.grid.space_point(index),
            Domain::Frequency => self.grid.frequency_point(index),
        }
    }

    /// Pointwise multiplication by a function of the sample coordinates.
    pub fn map_with_point(&mut self, f: impl Fn(&Point, Complex64) -> Complex64) {
        for i in 0..self.samples.len() {
            let p = self.point(i);
            self.samples[i] = f(&p, self.samples[i]);
        }
    }

    /// Riemann-sum L² norm in the field's own domain, with the `(2π)^{-n}`
    /// factor on the frequency side so both domains agree (Plancherel).
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.samples.iter().map(|z| z.norm_sqr()).collect();
        let total = pairwise_sum(&sq);
        let scale = match self.domain {
            Domain::Space => self.grid.cell_volume(),
            Domain::Frequency => {
                self.grid.frequency_cell_volume() / (2.0 * PI).powi(self.grid.dimension as i32)
            }
        };
        (total * scale).sqrt()
    }

    /// Writes the flat binary container: `n` (u8), `N` (u32), `L` (f64),
    /// domain tag (u8, 0 = space, 1 = frequency), then `N^n` complex64
    /// samples (f32 real, f32 imaginary), all little-endian, row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&[self.grid.dimension as u8])?;
        w.write_all(&(self.grid.samples_per_axis as u32).to_le_bytes())?;
        w.write_all(&self.grid.half_extent.to_le_bytes())?;
        w.write_all(&[match self.domain {
            Domain::Space => 0u8,
            Domain::Frequency => 1u8,
        }])?;
        let mut buf = Vec::with_capacity(self.samples.len() * 8);
        for z in &self.samples {
            buf.extend_from_slice(&(z.re as f32).to_le_bytes());
            buf.extend_from_slice(&(z.im as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut b1 = [0u8; 1];
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b1)?;
        let n = b1[0] as usize;
        r.read_exact(&mut b4)?;
        let samples_per_axis = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let half_extent = f64::from_le_bytes(b8);
        r.read_exact(&mut b1)?;
        let domain = match b1[0] {
            0 => Domain::Space,
            1 => Domain::Frequency,
            tag => return Err(Error::InvalidGrid(format!("unknown domain tag {tag}"))),
        };
        let grid = Grid::new(n, samples_per_axis, half_extent)?;
        let mut raw = vec![0u8; grid.len() * 8];
        r.read_exact(&mut raw)?;
        let samples = raw
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                Complex64::new(re as f64, im as f64)
            })
            .collect();
        Field::new(grid, samples, domain)
    }
}

/// Continuum-scaled DFT between the two domains.
///
/// Forward approximates `∫ e^{-ix·ξ} f(x) dx` (factor `h^n`); inverse
/// approximates `(2π)^{-n} ∫ e^{ix·ξ} f̂(ξ) dξ`. The pair is an exact
/// discrete inverse.
pub fn fourier(field: &Field, direction: TransformDirection) -> Result<Field> {
    let (expected, target) = match direction {
        TransformDirection::Forward => (Domain::Space, Domain::Frequency),
        TransformDirection::Inverse => (Domain::Frequency, Domain::Space),
    };
    if field.domain != expected {
        return Err(Error::DomainMismatch {
            expected: expected.name(),
            found: field.domain.name(),
        });
    }
    let grid = field.grid;
    let n_axis = grid.samples_per_axis;
    let mut planner = FftPlanner::<f64>::new();
    let fft: Arc<dyn Fft<f64>> = match direction {
        TransformDirection::Forward => planner.plan_fft_forward(n_axis),
        TransformDirection::Inverse => planner.plan_fft_inverse(n_axis),
    };
    let scale = match direction {
        TransformDirection::Forward => grid.spacing(),
        TransformDirection::Inverse => 1.0 / (n_axis as f64 * grid.spacing()),
    };
    let mut data = field.samples.clone();
    for axis in 0..grid.dimension {
        transform_axis(&mut data, &grid, axis, &fft, direction, scale);
    }
    Ok(Field {
        grid,
        samples: data,
        domain: target,
    })
}

fn transform_axis(
    data: &mut [Complex64],
    grid: &Grid,
    axis: usize,
    fft: &Arc<dyn Fft<f64>>,
    direction: TransformDirection,
    scale: f64,
) {
    let n = grid.samples_per_axis;
    let half = n / 2;
    let stride = n.pow((grid.dimension - 1 - axis) as u32);
    let outer = data.len() / (n * stride);
    let bases: Vec<usize> = (0..outer)
        .flat_map(|o| (0..stride).map(move |i| o * n * stride + i))
        .collect();
    // (-1)^{i - N/2} for centered index i
    let sign = |i: usize| if (i + half) % 2 == 0 { 1.0 } else { -1.0 };
    let src: &[Complex64] = data;
    let lanes: Vec<Vec<Complex64>> = Exec::Parallel.map(&bases, |&base| {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        match direction {
            TransformDirection::Forward => {
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = src[base + j * stride];
                }
                fft.process(&mut buf);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = buf[(i + half) % n] * (sign(i) * scale);
                }
            }
            TransformDirection::Inverse => {
                for i in 0..n {
                    buf[(i + half) % n] = src[base + i * stride] * sign(i);
                }
                fft.process(&mut buf);
                for (j, o) in out.iter_mut().enumerate() {
                    *o = buf[j] * scale;
                }
            }
        }
        out
    });
    for (base, lane) in bases.iter().zip(lanes) {
        for (j, v) in lane.into_iter().enumerate() {
            data[base + j * stride] = v;
        }
    }
}

/// `⟨ξ⟩^α = (1 + |ξ|²)^{α/2}`
pub fn bessel_weight(xi: &Point, alpha: f64) -> f64 {
    (1.0 + xi.norm_squared()).powf(0.5 * alpha)
}

/// Japanese bracket of a scalar radius.
pub fn japanese(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

/// Smoothness order `α` and weight order `δ` of `W^{α,2}_δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    pub alpha: f64,
    pub delta: f64,
}

impl SobolevIndex {
    pub fn new(alpha: f64, delta: f64) -> Self {
        Self { alpha, delta }
    }
}

/// Discrete `‖⟨x⟩^δ ⟨D⟩^α f‖_{L²}`.
pub fn sobolev_norm(field: &Field, idx: SobolevIndex) -> Result<f64> {
    let mut freq = match field.domain {
        Domain::Space => fourier(field, TransformDirection::Forward)?,
        Domain::Frequency => field.clone(),
    };
    if idx.alpha != 0.0 {
        freq.map_with_point(|xi, v| v * bessel_weight(xi, idx.alpha));
    }
    if idx.delta == 0.0 {
        return Ok(freq.l2_norm());
    }
    let mut space = fourier(&freq, TransformDirection::Inverse)?;
    space.map_with_point(|x, v| v * bessel_weight(x, idx.delta));
    Ok(space.l2_norm())
}

/// Tabulated radial function with a natural cubic spline inside the table
/// and a power-law tail `c·⟨ρ⟩^{-p}` beyond the last radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
    tail_exponent: f64,
    tail_coefficient: f64,
}

impl RadialProfile {
    /// Builds the spline and fits the tail on the last quarter of the table.
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 4 {
            return Err(Error::InvalidParameter {
                name: "radii",
                reason: format!(
                    "need at least 4 radii with matching values (got {} radii, {} values)",
                    radii.len(),
                    values.len()
                ),
            });
        }
        if radii[0] < 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                name: "radii",
                reason: "radii must be nonnegative and strictly increasing".into(),
            });
        }
        let second = spline_second_derivatives(&radii, &values);
        let (p, c) = fit_tail(&radii, &values);
        Ok(Self {
            radii,
            values,
            second,
            tail_exponent: p,
            tail_coefficient: c,
        })
    }

    /// Accepts complex samples whose imaginary parts are negligible.
    pub fn from_complex(radii: Vec<f64>, values: &[Complex64], tol: f64) -> Result<Self> {
        let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        if let Some(z) = values.iter().find(|z| z.im.abs() > tol * scale) {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!("radial profile must be real, found imaginary part {:e}", z.im),
            });
        }
        Self::new(radii, values.iter().map(|z| z.re).collect())
    }

    /// Replaces the fitted tail exponent; the coefficient is reset so the
    /// tail stays continuous at the last radius.
    pub fn with_tail_exponent(mut self, p: f64) -> Self {
        let last = *self.radii.last().unwrap();
        self.tail_exponent = p;
        self.tail_coefficient = *self.values.last().unwrap() * japanese(last).powf(p);
        self
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_exponent(&self) -> f64 {
        self.tail_exponent
    }

    pub fn tail_coefficient(&self) -> f64 {
        self.tail_coefficient
    }

    pub fn max_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    fn segment(&self, rho: f64) -> usize {
        let k = self.radii.partition_point(|&r| r <= rho);
        k.clamp(1, self.radii.len() - 1) - 1
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let rho = rho.abs();
        if rho > self.max_radius() {
            return self.tail_coefficient * japanese(rho).powf(-self.tail_exponent);
        }
        if rho <= self.radii[0] {
            return self.values[0];
        }
        let i = self.segment(rho);
        let (x0, x1) = (self.radii[i], self.radii[i + 1]);
        let hseg = x1 - x0;
        let a = (x1 - rho) / hseg;
        let b = (rho - x0) / hseg;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * hseg * hseg
                / 6.0
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        let rho = rho.abs();
        if rho > self.max_radius() {
            let p = self.tail_exponent;
            return -p * self.tail_coefficient * rho * japanese(rho).powf(-p - 2.0);
        }
        if rho <= self.radii[0] {
            return 0.0;
        }
        let i = self.segment(rho);
        let (x0, x1) = (self.radii[i], self.radii[i + 1]);
        let hseg = x1 - x0;
        let a = (x1 - rho) / hseg;
        let b = (rho - x0) / hseg;
        (self.values[i + 1] - self.values[i]) / hseg
            + (-(3.0 * a * a - 1.0) * self.second[i] + (3.0 * b * b - 1.0) * self.second[i + 1]) * hseg
                / 6.0
    }

    /// Writes `radius,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "radius,value")?;
        for (r, v) in self.radii.iter().zip(&self.values) {
            writeln!(w, "{r},{v}")?;
        }
        Ok(())
    }
}

// Clamped (zero slope) at a radius-zero start, natural elsewhere.
fn spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    if x[0] == 0.0 {
        let h0 = x[1] - x[0];
        diag[0] = h0 / 3.0;
        sup[0] = h0 / 6.0;
        rhs[0] = (y[1] - y[0]) / h0;
    } else {
        diag[0] = 1.0;
    }
    for i in 1..n - 1 {
        let hl = x[i] - x[i - 1];
        let hr = x[i + 1] - x[i];
        sub[i] = hl / 6.0;
        diag[i] = (hl + hr) / 3.0;
        sup[i] = hr / 6.0;
        rhs[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
    }
    diag[n - 1] = 1.0;
    // Thomas algorithm
    for i in 1..n {
        let m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    let mut out = vec![0.0; n];
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = (rhs[i] - sup[i] * out[i + 1]) / diag[i];
    }
    out
}

fn fit_tail(radii: &[f64], values: &[f64]) -> (f64, f64) {
    let n = radii.len();
    let last_r = radii[n - 1];
    let last_v = values[n - 1];
    let start = n - (n / 4).max(4).min(n);
    let pts: Vec<(f64, f64)> = radii[start..]
        .iter()
        .zip(&values[start..])
        .filter(|(&r, &v)| r > 0.0 && v != 0.0)
        .map(|(&r, &v)| (japanese(r).ln(), v.abs().ln()))
        .collect();
    let mut p = 1.0;
    if pts.len() >= 3 {
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let den = m * sxx - sx * sx;
        if den > 0.0 {
            let slope = (m * sxy - sx * sy) / den;
            if slope < 0.0 && slope.is_finite() {
                p = -slope;
            } else {
                log::debug!("radial tail fit is not decaying (slope {slope}); using p = 1");
            }
        }
    }
    (p, last_v * japanese(last_r).powf(p))
}

/// Radial profile of the `n`-dimensional Fourier transform of a tabulated
/// radial function, on the profile's own radii.
pub fn radial_fourier(profile: &RadialProfile, n: usize, direction: TransformDirection) -> Result<RadialProfile> {
    radial_fourier_at(profile, n, direction, profile.radii())
}

/// As [`radial_fourier`], at the given output radii. The integral covers the
/// tabulated range only.
pub fn radial_fourier_at(
    profile: &RadialProfile,
    n: usize,
    direction: TransformDirection,
    out_radii: &[f64],
) -> Result<RadialProfile> {
    let values = radial_transform_fn(
        |r| profile.eval(r),
        n,
        direction,
        profile.radii(),
        out_radii,
    )?;
    RadialProfile::new(out_radii.to_vec(), values)
}

/// Radial Fourier transform of a radial function `f` supported on
/// `[breaks[0], breaks.last()]`, evaluated at `out_radii`.
///
/// `n = 3`: `4π ∫ r² sinc(ρr) f(r) dr`; `n = 2`: `2π ∫ r J₀(ρr) f(r) dr`.
/// The inverse carries the extra `(2π)^{-n}`. `breaks` mark points where
/// `f` is not smooth (knots, support edges).
pub fn radial_transform_fn(
    f: impl Fn(f64) -> f64 + Sync + Send,
    n: usize,
    direction: TransformDirection,
    breaks: &[f64],
    out_radii: &[f64],
) -> Result<Vec<f64>> {
    check_dimension(n)?;
    if breaks.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "breaks",
            reason: "need at least the two ends of the support".into(),
        });
    }
    let scale = match direction {
        TransformDirection::Forward => 1.0,
        TransformDirection::Inverse => (2.0 * PI).powi(-(n as i32)),
    };
    let settings = Adaptive {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_intervals: breaks.len() + 400,
    };
    let out = Exec::Parallel.map(out_radii, |&rho| {
        let res = if n == 3 {
            settings.integrate_breaks(
                |r: f64| {
                    let x = rho * r;
                    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
                    r * r * sinc * f(r)
                },
                breaks,
            )
        } else {
            settings.integrate_breaks(|r: f64| r * bessel_j0(rho * r) * f(r), breaks)
        };
        let kernel = if n == 3 { 4.0 * PI } else { 2.0 * PI };
        kernel * res.value * scale
    });
    Ok(out)
}
