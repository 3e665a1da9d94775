//! Brute-force references used to cross-check the operators.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{chart, graded_rule, sphere_rule, Direction, Frame};
use crate::potentials::Potential;
use crate::quad::{integrate_to_infinity, pairwise_sum, Adaptive};
use crate::spectral::{fourier, Field, Grid, TransformDirection};
use crate::{check_dimension, sphere_measure, Error, Point, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E₁(x) = -γ - ln x - Σ_{k≥1} (-x)^k/(k·k!)` for `0 < x ≤ 5`.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0 && x <= 5.0, "series is used for 0 < x ≤ 5");
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < 1e-18 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Sample counts of the brute-force evaluation of `B_{θ,2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruteResolution {
    /// Trapezoid nodes on each circle.
    pub angular: usize,
    /// Midpoint cells on the paired window and Simpson cells beyond it.
    pub radial: usize,
}

impl Default for BruteResolution {
    fn default() -> Self {
        Self {
            angular: 2048,
            radial: 4000,
        }
    }
}

/// Direct evaluation of `B_{θ,2}(q)(η)` in two dimensions:
/// `iπ S_{θ,1} - p.v.∫ q̂(ξ)q̂(η-ξ)/(ξ·(ξ+2kθ)) dξ`.
///
/// The sphere term uses `(π/2) ∫ q̂(kθ′-kω) q̂(kω-kθ) dσ(ω)` by a dense
/// trapezoid rule. The principal value is taken in polar coordinates
/// `ξ = -kθ + tω`, where the denominator becomes `t² - k²`; the radial
/// singularity at `t = k` is removed by pairing `t = k ± s`.
pub fn brute_b_theta2(q: &Potential, theta: &Direction, eta: &Point, res: BruteResolution) -> Result<Complex64> {
    brute_b_theta2_with_progress(q, theta, eta, res, |_| {})
}

/// [`brute_b_theta2`] reporting progress in `[0, 1]`.
pub fn brute_b_theta2_with_progress(
    q: &Potential,
    theta: &Direction,
    eta: &Point,
    res: BruteResolution,
    progress: impl Fn(f64),
) -> Result<Complex64> {
    if q.dimension() != 2 {
        return Err(Error::Unsupported("brute-force reference is two-dimensional only".into()));
    }
    if !q.has_analytic_fourier() {
        return Err(Error::Unsupported(format!(
            "{} has no analytic Fourier transform",
            q.label()
        )));
    }
    if res.angular < 8 || res.radial < 8 {
        return Err(Error::InvalidParameter {
            name: "resolution",
            reason: "need at least 8 angular and radial samples".into(),
        });
    }
    if !(eta.dot(theta.vector()) < 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let c = chart(eta, theta)?;
    let k = c.k;
    let th = *theta.vector();
    let m = res.angular;
    let circle: Vec<Point> = (0..m)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / m as f64;
            Point::new(a.cos(), a.sin(), 0.0)
        })
        .collect();
    let dw = 2.0 * PI / m as f64;

    let sphere_terms: Vec<Complex64> = circle
        .iter()
        .map(|w| q.eval_fourier(&((c.theta_prime - w) * k)) * q.eval_fourier(&((w - th) * k)))
        .collect();
    let s1 = pairwise_sum(&sphere_terms) * (0.5 * dw);

    // A(t) = ∫ q̂(-kθ + tω) q̂(η + kθ - tω) dσ(ω), F(t) = t A(t)/(k + t)
    let a_of = |t: f64| -> Complex64 {
        let terms: Vec<Complex64> = circle
            .iter()
            .map(|w| {
                let xi = w * t - th * k;
                q.eval_fourier(&xi) * q.eval_fourier(&(eta - xi))
            })
            .collect();
        pairwise_sum(&terms) * dw
    };
    let f_of = |t: f64| a_of(t) * (t / (k + t));

    let cells = res.radial;
    let hs = k / cells as f64;
    let mut paired = Vec::with_capacity(cells);
    for i in 0..cells {
        let s = (i as f64 + 0.5) * hs;
        paired.push((f_of(k - s) - f_of(k + s)) * (hs / s));
        if i % 256 == 0 {
            progress(0.5 * i as f64 / cells as f64);
        }
    }
    let window = pairwise_sum(&paired);

    let t_end = 2.0 * k + eta.norm() + 12.0 * q.fourier_half_width() + 10.0;
    let cells = res.radial + res.radial % 2;
    let ht = (t_end - 2.0 * k) / cells as f64;
    let mut simpson = Vec::with_capacity(cells + 1);
    for i in 0..=cells {
        let t = 2.0 * k + i as f64 * ht;
        let wgt = if i == 0 || i == cells {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        simpson.push(f_of(t) * (wgt * ht / 3.0 / (k - t)));
        if i % 256 == 0 {
            progress(0.5 + 0.5 * i as f64 / cells as f64);
        }
    }
    let beyond = pairwise_sum(&simpson);
    progress(1.0);
    Ok(Complex64::new(0.0, PI) * s1 + window + beyond)
}

/// Principal value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PvOracle {
    pub value: f64,
    pub error: f64,
}

/// `p.v. ∫_a^b f(x)/(x - c) dx` for `a < c < b` (`b` may be `+∞`): the
/// symmetric part `∫_0^d [f(c+s) - f(c-s)]/s ds` plus the regular remainder.
pub fn pv_1d(f: impl Fn(f64) -> f64, c: f64, a: f64, b: f64, tol: f64) -> Result<PvOracle> {
    if !(a < c && c < b) {
        return Err(Error::InvalidParameter {
            name: "singularity",
            reason: format!("need a < c < b, got a = {a}, c = {c}, b = {b}"),
        });
    }
    let settings = Adaptive {
        abs_tol: 0.1 * tol,
        rel_tol: 1e-14,
        max_intervals: 2000,
    };
    let d = (c - a).min(b - c);
    let sym = settings.integrate(|s: f64| if s == 0.0 { 0.0 } else { (f(c + s) - f(c - s)) / s }, 0.0, d);
    let mut value = sym.value;
    let mut error = sym.error;
    if c - d > a {
        let r = settings.integrate(|x: f64| f(x) / (x - c), a, c - d);
        value += r.value;
        error += r.error;
    }
    if c + d < b {
        let r = if b.is_infinite() {
            integrate_to_infinity(&settings, |x: f64| f(x) / (x - c), c + d)
        } else {
            settings.integrate(|x: f64| f(x) / (x - c), c + d, b)
        };
        value += r.value;
        error += r.error;
    }
    if !(error <= tol) {
        return Err(Error::ToleranceNotReached { tol, estimate: error });
    }
    Ok(PvOracle { value, error })
}

/// `f(x) = Σ c_j e^{-a_j|x - x_j|²}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub n: usize,
    pub terms: Vec<MixtureTerm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureTerm {
    pub coefficient: f64,
    pub a: f64,
    pub center: Point,
}

impl GaussianMixture {
    pub fn new(n: usize, terms: Vec<MixtureTerm>) -> Result<Self> {
        check_dimension(n)?;
        if terms.iter().any(|t| !(t.a > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: "mixture widths must be positive".into(),
            });
        }
        Ok(Self { n, terms })
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * (-t.a * (x - t.center).norm_squared()).exp())
            .sum()
    }

    pub fn fourier(&self, xi: &Point) -> Complex64 {
        let half_n = 0.5 * self.n as f64;
        self.terms
            .iter()
            .map(|t| {
                let mag = t.coefficient * (PI / t.a).powf(half_n) * (-xi.norm_squared() / (4.0 * t.a)).exp();
                Complex64::from_polar(mag, -t.center.dot(xi))
            })
            .sum()
    }
}

/// `∫_{|x|=ρ}|f|² dσ / (∫|f|² + ∫|∇f|²)`. The numerator uses a sphere rule
/// of the given level; the denominator is the frequency-side sum
/// `(2π)^{-n} Σ (1 + |ξ|²)|f̂|² Δξ^n` of the FFT of the grid samples. Zero
/// for `f ≡ 0`.
pub fn trace_ratio(f: &GaussianMixture, rho: f64, grid: &Grid, level: u32) -> Result<f64> {
    if grid.dimension() != f.n {
        return Err(Error::InvalidGrid("grid and mixture dimensions differ".into()));
    }
    let rule = sphere_rule(f.n, level)?;
    let num = rule.integrate(|w| f.eval(&(w * rho)).powi(2)) * rho.powi(f.n as i32 - 1);
    let field = Field::from_space_fn(*grid, |x| Complex64::new(f.eval(x), 0.0));
    let fh = fourier(&field, TransformDirection::Forward)?;
    let terms: Vec<f64> = fh
        .samples()
        .iter()
        .enumerate()
        .map(|(i, z)| (1.0 + grid.frequency_point(i).norm_squared()) * z.norm_sqr())
        .collect();
    let den = pairwise_sum(&terms) * grid.frequency_cell_volume() / (2.0 * PI).powi(f.n as i32);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

/// Resolution of [`sphere_kernel_bound`].
pub fn kernel_rule_nodes(level: u32) -> (usize, usize) {
    (4 + 2 * level as usize, 1 << (level + 3))
}

/// `ρ^{-2λ} ∫_{|y|=ρ} |x - y|^{-(n-1-2λ)} dσ(y)`, with a rule graded toward
/// the point of the sphere nearest to `x`.
pub fn sphere_kernel_bound(x: &Point, rho: f64, lambda: f64, n: usize, level: u32) -> Result<f64> {
    check_dimension(n)?;
    let top = 0.5 * (n as f64 - 1.0);
    if !(lambda > 0.0 && lambda <= top) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must lie in (0, {top}], got {lambda}"),
        });
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: format!("must be positive, got {rho}"),
        });
    }
    let p = n as f64 - 1.0 - 2.0 * lambda;
    let pole = if x.norm() > 0.0 {
        Direction::new(n, *x)?
    } else {
        Direction::axis(n, if n == 2 { 0 } else { 2 }, 1.0)
    };
    let (per_panel, azimuths) = kernel_rule_nodes(level);
    let rule = graded_rule(n, 1e-12, per_panel, azimuths)?.rotated(&Frame::to(&pole));
    let value = rule.integrate(|w| {
        let d = (x - w * rho).norm();
        if p == 0.0 {
            1.0
        } else if d == 0.0 {
            0.0
        } else {
            d.powf(-p)
        }
    }) * rho.powi(n as i32 - 1);
    Ok(value / rho.powf(2.0 * lambda))
}

/// Reference values consumed by the test suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleFixtures {
    pub e1_at_one: f64,
    /// `p.v. ∫_0^∞ e^{-(1-r)²}/(1-r) dr`
    pub pv_gaussian_window: f64,
    /// Trace ratio of `e^{-|x|²/2}` at `ρ = 1`, `n = 3`, closed form.
    pub trace_gaussian_ratio: f64,
    pub brute_b: Vec<BruteFixture>,
}

/// One brute-force `B_{θ,2}` value for the Gaussian `e^{-a|x|²}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruteFixture {
    pub a: f64,
    pub theta: [f64; 2],
    pub eta: [f64; 2],
    pub re: f64,
    pub im: f64,
}

/// Recomputes the fixtures from scratch.
pub fn generate_fixtures(res: BruteResolution) -> Result<OracleFixtures> {
    let e1 = exp_integral_e1(1.0);
    let pv = pv_1d(|r| -(-(1.0 - r) * (1.0 - r)).exp(), 1.0, 0.0, f64::INFINITY, 1e-10)?;
    let q = Potential::gaussian(2, 0.5)?;
    let theta = Direction::axis(2, 0, -1.0);
    let mut brute_b = Vec::new();
    for t in [3.0, 5.0, 8.0] {
        let eta = Point::new(t, 0.0, 0.0);
        let b = brute_b_theta2(&q, &theta, &eta, res)?;
        brute_b.push(BruteFixture {
            a: 0.5,
            theta: [-1.0, 0.0],
            eta: [t, 0.0],
            re: b.re,
            im: b.im,
        });
    }
    Ok(OracleFixtures {
        e1_at_one: e1,
        pv_gaussian_window: pv.value,
        trace_gaussian_ratio: 4.0 * PI * (-1.0f64).exp() / (2.5 * PI.powf(1.5)),
        brute_b,
    })
}

/// `|S^{n-1}|`, the ratio of [`sphere_kernel_bound`] at the center.
pub fn kernel_center_ratio(n: usize) -> f64 {
    sphere_measure(n)
}
