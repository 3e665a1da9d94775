//! The double dispersion operator on the Fourier side.
//!
//! For `η ∈ H_θ` with chart `(k, θ′)`:
//!
//! - `S_{θ,r}(η) = r^{n-1}k^{n-2}/(1+r) ∫_{S^{n-1}} q̂(rkω - kθ) q̂(η - rkω + kθ) dσ(ω)`
//! - `P_θ(η) = p.v. ∫_0^∞ S_{θ,r}(η)/(1-r) dr`
//! - `B_{θ,2}(η) = iπ S_{θ,1}(η) + P_θ(η)`, zero outside `H_θ`
//! - `Q̃_{θ,2}(η) = χ(η)[B_{θ,2}(η) + B_{-θ,2}(η)]`
//! - `Q̃_{F,2}(η) = χ(η)(2/|S^{n-1}|) ∫_{θ·η<0} B_{θ,2}(η) dσ(θ)`

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::geometry::{chart, graded_rule, hemisphere_rule, Chart, Direction, Frame, SphereRule};
use crate::potentials::Potential;
use crate::quad::{pairwise_sum, Adaptive, GaussLegendre};
use crate::{sphere_measure, Error, Point, Result};

/// Smooth radial cutoff: 0 below `C0`, 1 above `2·C0`, quintic smoothstep
/// in between.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub c0: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { c0: 2.0 }
    }
}

impl CutoffSpec {
    pub fn new(c0: f64) -> Result<Self> {
        if !(c0 > 1.0 && c0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "C0",
                reason: format!("cutoff radius must exceed 1, got {c0}"),
            });
        }
        Ok(Self { c0 })
    }
}

pub fn cutoff_chi(xi: &Point, spec: &CutoffSpec) -> f64 {
    let t = ((xi.norm() - spec.c0) / spec.c0).clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Principal-value quadrature settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PVParams {
    /// Half-width of the symmetric window `|1 - r| < δ`.
    pub delta: f64,
    /// Gauss–Legendre nodes per panel of the graded window rule.
    pub inner_nodes: usize,
    /// Relative tolerance of the adaptive outer integrals.
    pub outer_tol: f64,
    /// Initial truncation radius.
    pub r_max: f64,
    /// Double `r_max` until the tail bound drops below `tail_ratio·|value|`.
    pub auto_extend: bool,
    pub tail_ratio: f64,
    /// Hard ceiling for `r_max` when extending.
    pub r_limit: f64,
}

impl Default for PVParams {
    fn default() -> Self {
        Self {
            delta: 0.5,
            inner_nodes: 16,
            outer_tol: 1e-8,
            r_max: 4.0,
            auto_extend: true,
            tail_ratio: 1e-3,
            r_limit: 256.0,
        }
    }
}

impl PVParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("must lie in (0, 1), got {}", self.delta),
            });
        }
        if self.inner_nodes == 0 {
            return Err(Error::InvalidParameter {
                name: "inner_nodes",
                reason: "must be positive".into(),
            });
        }
        if !(self.outer_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "outer_tol",
                reason: format!("must be positive, got {}", self.outer_tol),
            });
        }
        if !(self.r_max > 1.0 + self.delta) {
            return Err(Error::InvalidParameter {
                name: "r_max",
                reason: format!("must exceed 1 + δ = {}, got {}", 1.0 + self.delta, self.r_max),
            });
        }
        Ok(())
    }
}

/// Result of [`principal_value_op`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PvResult {
    /// Window plus outer contributions; the tail is not included.
    pub value: Complex64,
    pub inner: Complex64,
    pub outer: Complex64,
    /// Bound on `|∫_{r_max}^∞ S/(1-r) dr|` from a power-law fit of `|S|`.
    pub tail_bound: f64,
    pub r_max: f64,
    pub outer_error: f64,
    pub evaluations: usize,
}

/// `p.v. ∫_0^∞ S(r)/(1-r) dr`.
///
/// The window `|1-r| < δ` is folded into `∫_0^δ [S(1-s) - S(1+s)]/s ds` and
/// integrated with Gauss–Legendre panels graded geometrically toward `s = 0`
/// from `δ·min(1, 1/k)`. The rest is adaptive Gauss–Kronrod up to `r_max`.
pub fn principal_value_op(
    provider: impl Fn(f64) -> Result<Complex64> + Sync + Send,
    k: f64,
    params: &PVParams,
) -> Result<PvResult> {
    params.validate()?;
    let delta = params.delta;
    let gl = GaussLegendre::new(params.inner_nodes);
    let s0 = delta * (1.0 / k.max(1e-300)).min(1.0);
    let mut edges = vec![0.0, s0];
    while *edges.last().unwrap() < delta {
        edges.push((2.0 * edges.last().unwrap()).min(delta));
    }
    let mut nodes = Vec::new();
    for w in edges.windows(2) {
        nodes.extend(gl.mapped(w[0], w[1]));
    }
    let mut evaluations = 0usize;
    let mut inner_terms = Vec::with_capacity(nodes.len());
    let mut scale = 0.0f64;
    for &(s, w) in &nodes {
        let lo = provider(1.0 - s)?;
        let hi = provider(1.0 + s)?;
        evaluations += 2;
        scale = scale.max(lo.norm()).max(hi.norm());
        inner_terms.push((lo - hi) * (w / s));
    }
    let inner = pairwise_sum(&inner_terms);

    // Provider failures inside the adaptive loop are captured and re-raised.
    let failure = std::sync::Mutex::new(None);
    let count = std::sync::atomic::AtomicUsize::new(0);
    let integrand = |r: f64| -> Complex64 {
        count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        match provider(r) {
            Ok(v) => v / (1.0 - r),
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let settings = |scale: f64| Adaptive {
        abs_tol: 1e-15 * scale + 1e-300,
        rel_tol: params.outer_tol,
        max_intervals: 200,
    };
    let left = settings(scale).integrate(&integrand, 0.0, 1.0 - delta);
    let mut outer = left.value;
    let mut outer_error = left.error;
    let mut lower = 1.0 + delta;
    let mut r_max = params.r_max;
    let mut tail_bound;
    loop {
        let seg = settings(scale).integrate(&integrand, lower, r_max);
        outer += seg.value;
        outer_error += seg.error;
        if let Some(e) = failure.lock().unwrap().take() {
            return Err(e);
        }
        let s_end = provider(r_max)?.norm();
        let s_mid = provider(0.5 * r_max)?.norm();
        evaluations += 2;
        tail_bound = tail_estimate(s_mid, s_end, r_max);
        let value = (inner + outer).norm();
        if !params.auto_extend || tail_bound <= params.tail_ratio * value || tail_bound == 0.0 {
            break;
        }
        if 2.0 * r_max > params.r_limit {
            log::warn!(
                "principal value tail bound {tail_bound:.3e} still above {:.1e}·|value| at r_max = {r_max}",
                params.tail_ratio
            );
            break;
        }
        lower = r_max;
        r_max *= 2.0;
    }
    evaluations += count.into_inner();
    Ok(PvResult {
        value: inner + outer,
        inner,
        outer,
        tail_bound,
        r_max,
        outer_error,
        evaluations,
    })
}

// |S(r)| ≈ |S(R)|(r/R)^{-p} beyond R gives ∫_R^∞ |S|/(r-1) ≤ |S(R)|/(p(1-1/R)).
fn tail_estimate(s_mid: f64, s_end: f64, r_max: f64) -> f64 {
    if s_end == 0.0 {
        return 0.0;
    }
    if s_mid <= s_end {
        return f64::INFINITY;
    }
    let p = (s_mid / s_end).log2();
    s_end / (p * (1.0 - 1.0 / r_max))
}

/// How the unit sphere is discretized for Ewald-sphere integrals.
#[derive(Clone, Debug, PartialEq)]
pub enum EwaldScheme {
    /// One rule, rotated so its reference pole points along `θ`.
    Fixed(SphereRule),
    /// Two rules graded toward the points of the sphere nearest to `ξ = 0`
    /// and to `ξ = η`, blended by a smooth partition of unity.
    Resonant { level: u32 },
}

impl Default for EwaldScheme {
    fn default() -> Self {
        EwaldScheme::Resonant { level: 2 }
    }
}

impl EwaldScheme {
    pub fn fixed(rule: SphereRule) -> Self {
        EwaldScheme::Fixed(rule)
    }

    /// The same scheme one refinement level up.
    pub fn refined(&self) -> Result<Self> {
        Ok(match self {
            EwaldScheme::Fixed(rule) => {
                let level = (rule.len() as f64).log2().round() as u32;
                let level = if rule.n == 2 { level - 4 } else { (level - 5) / 2 };
                EwaldScheme::Fixed(crate::geometry::sphere_rule(rule.n, level + 1)?)
            }
            EwaldScheme::Resonant { level } => EwaldScheme::Resonant { level: level + 1 },
        })
    }
}

/// Everything fixed for one `(q, θ, η)`.
struct Setting<'a> {
    q: &'a Potential,
    n: usize,
    theta: Direction,
    eta: Point,
    chart: Chart,
    width: f64,
    scheme: &'a EwaldScheme,
}

impl<'a> Setting<'a> {
    fn new(q: &'a Potential, theta: &Direction, eta: &Point, scheme: &'a EwaldScheme) -> Result<Self> {
        check_dims(q, theta)?;
        let chart = chart(eta, theta)?;
        Ok(Self {
            q,
            n: q.dimension(),
            theta: *theta,
            eta: *eta,
            chart,
            width: q.fourier_half_width(),
            scheme,
        })
    }

    /// Unit-sphere nodes and weights for radius parameter `r`.
    fn unit_rule(&self, r: f64) -> Result<(Vec<Point>, Vec<f64>)> {
        match self.scheme {
            EwaldScheme::Fixed(rule) => {
                if rule.n != self.n {
                    return Err(Error::InvalidParameter {
                        name: "rule",
                        reason: format!("rule is for n = {}, potential has n = {}", rule.n, self.n),
                    });
                }
                let rot = rule.rotated(&Frame::to(&self.theta));
                Ok((rot.nodes, rot.weights))
            }
            EwaldScheme::Resonant { level } => {
                resonant_rule(self.n, *level, &self.theta, &self.eta, self.chart.k, r, self.width)
            }
        }
    }

    fn k(&self) -> f64 {
        self.chart.k
    }

    fn xi(&self, omega: &Point, r: f64) -> Point {
        (omega * r - self.theta.vector()) * self.k()
    }

    /// `∫_{S^{n-1}} f₁(ξ) f₂(η - ξ) dσ(ω)` with `ξ = rkω - kθ`.
    fn sphere_integral(
        &self,
        r: f64,
        f: impl Fn(&Point, &Point) -> Complex64,
    ) -> Result<Complex64> {
        let (omegas, weights) = self.unit_rule(r)?;
        let terms: Vec<Complex64> = omegas
            .iter()
            .zip(&weights)
            .map(|(w, &wt)| f(w, &self.xi(w, r)) * wt)
            .collect();
        Ok(pairwise_sum(&terms))
    }

    fn spherical(&self, r: f64) -> Result<Complex64> {
        let integral = self.sphere_integral(r, |_, xi| {
            self.q.eval_fourier(xi) * self.q.eval_fourier(&(self.eta - xi))
        })?;
        Ok(integral * self.prefactor(r))
    }

    fn prefactor(&self, r: f64) -> f64 {
        let n = self.n as i32;
        r.powi(n - 1) * self.k().powi(n - 2) / (1.0 + r)
    }
}

fn check_dims(q: &Potential, theta: &Direction) -> Result<()> {
    if q.dimension() != theta.dimension() {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!(
                "direction is {}-dimensional, potential is {}-dimensional",
                theta.dimension(),
                q.dimension()
            ),
        });
    }
    Ok(())
}

fn resonant_rule(
    n: usize,
    level: u32,
    theta: &Direction,
    eta: &Point,
    k: f64,
    r: f64,
    width: f64,
) -> Result<(Vec<Point>, Vec<f64>)> {
    let radius = r * k;
    let psi0 = (0.5 * width / radius).min(0.25 * PI);
    let per_panel = 4 + 2 * level as usize;
    let azimuths = 1usize << (level + 3);
    let base = graded_rule(n, psi0, per_panel, azimuths)?;
    let toward_eta = eta + theta.vector() * k;
    let pole_b = if toward_eta.norm() > 0.0 {
        Direction::new(n, toward_eta)?
    } else {
        *theta
    };
    let eta_norm = eta.norm();
    let eta_hat = if eta_norm > 0.0 { eta / eta_norm } else { Point::zeros() };
    let tau = (eta_norm / 16.0).max(0.5 * width);
    // p₀ ≈ 1 near ξ = 0, ≈ 0 near ξ = η
    let p0 = |omega: &Point| {
        let xi = (omega * r - theta.vector()) * k;
        let z = (0.5 * eta_norm - xi.dot(&eta_hat)) / tau;
        1.0 / (1.0 + (-z).exp())
    };
    let mut nodes = Vec::with_capacity(2 * base.len());
    let mut weights = Vec::with_capacity(2 * base.len());
    let fa = Frame::to(theta);
    for (w, &wt) in base.nodes.iter().zip(&base.weights) {
        let om = fa.apply(w);
        nodes.push(om);
        weights.push(wt * p0(&om));
    }
    let fb = Frame::to(&pole_b);
    for (w, &wt) in base.nodes.iter().zip(&base.weights) {
        let om = fb.apply(w);
        nodes.push(om);
        weights.push(wt * (1.0 - p0(&om)));
    }
    Ok((nodes, weights))
}

/// `S_{θ,r}(q)(η)`.
pub fn spherical_op(q: &Potential, theta: &Direction, r: f64, eta: &Point, scheme: &EwaldScheme) -> Result<Complex64> {
    check_radius(r)?;
    Setting::new(q, theta, eta, scheme)?.spherical(r)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("must be positive, got {r}"),
        });
    }
    Ok(())
}

/// `K_r(f₁, f₂)(η) = r^{n-1}k^{n-2} ∫ |f₁(ξ)||f₂(η-ξ)| dσ(ω)`. `width` sizes
/// the resonant scheme (ignored by fixed rules).
#[allow(clippy::too_many_arguments)]
pub fn bilinear_k(
    f1: impl Fn(&Point) -> Complex64,
    f2: impl Fn(&Point) -> Complex64,
    theta: &Direction,
    r: f64,
    eta: &Point,
    scheme: &EwaldScheme,
    width: f64,
) -> Result<f64> {
    check_radius(r)?;
    let n = theta.dimension();
    let c = chart(eta, theta)?;
    let (omegas, weights) = match scheme {
        EwaldScheme::Fixed(rule) => {
            let rot = rule.rotated(&Frame::to(theta));
            (rot.nodes, rot.weights)
        }
        EwaldScheme::Resonant { level } => resonant_rule(n, *level, theta, eta, c.k, r, width)?,
    };
    let terms: Vec<f64> = omegas
        .iter()
        .zip(&weights)
        .map(|(w, &wt)| {
            let xi = (w * r - theta.vector()) * c.k;
            f1(&xi).norm() * f2(&(eta - xi)).norm() * wt
        })
        .collect();
    let ni = n as i32;
    Ok(pairwise_sum(&terms) * r.powi(ni - 1) * c.k.powi(ni - 2))
}

/// `d/dr S_{θ,r}(q)(η)` by differentiating under the integral:
/// the prefactor derivative times the sphere integral, plus
/// `k r^{n-1}k^{n-2}/(1+r) ∫ [ω·∇q̂(ξ) q̂(η-ξ) - q̂(ξ) ω·∇q̂(η-ξ)] dσ(ω)`.
pub fn ds_dr(q: &Potential, theta: &Direction, r: f64, eta: &Point, scheme: &EwaldScheme) -> Result<Complex64> {
    check_radius(r)?;
    let s = Setting::new(q, theta, eta, scheme)?;
    let n = s.n as f64;
    let k = s.k();
    let base = s.sphere_integral(r, |_, xi| q.eval_fourier(xi) * q.eval_fourier(&(eta - xi)))?;
    let grad = s.sphere_integral(r, |w, xi| {
        let rest = eta - xi;
        let g1 = q.fourier_gradient(xi);
        let g2 = q.fourier_gradient(&rest);
        let d1 = g1[0] * w[0] + g1[1] * w[1] + g1[2] * w[2];
        let d2 = g2[0] * w[0] + g2[1] * w[1] + g2[2] * w[2];
        d1 * q.eval_fourier(&rest) - q.eval_fourier(xi) * d2
    })?;
    let kp = k.powf(n - 2.0);
    let dpre = kp * ((n - 1.0) * r.powf(n - 2.0) * (1.0 + r) - r.powf(n - 1.0)) / (1.0 + r).powi(2);
    Ok(base * dpre + grad * (k * kp * r.powf(n - 1.0) / (1.0 + r)))
}

/// Parts of `B_{θ,2}(q)(η)` for `η ∈ H_θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BParts {
    pub k: f64,
    /// `S_{θ,1}(q)(η)`
    pub s: Complex64,
    /// `P_θ(q)(η)`
    pub pv: PvResult,
}

impl BParts {
    pub fn value(&self) -> Complex64 {
        Complex64::new(0.0, PI) * self.s + self.pv.value
    }
}

/// `S_{θ,1}` and `P_θ` at `η`; `None` outside `H_θ`.
pub fn b_theta2_parts(
    q: &Potential,
    theta: &Direction,
    eta: &Point,
    scheme: &EwaldScheme,
    pv: &PVParams,
) -> Result<Option<BParts>> {
    check_dims(q, theta)?;
    if !(eta.dot(theta.vector()) < 0.0) {
        return Ok(None);
    }
    let setting = Setting::new(q, theta, eta, scheme)?;
    let s = setting.spherical(1.0)?;
    let pv = principal_value_op(|r| setting.spherical(r), setting.k(), pv)?;
    Ok(Some(BParts {
        k: setting.k(),
        s,
        pv,
    }))
}

/// `B_{θ,2}(q)(η) = iπ S_{θ,1}(q)(η) + P_θ(q)(η)` on `H_θ`, zero elsewhere.
pub fn b_theta2(q: &Potential, theta: &Direction, eta: &Point, scheme: &EwaldScheme, pv: &PVParams) -> Result<Complex64> {
    Ok(b_theta2_parts(q, theta, eta, scheme, pv)?
        .map(|b| b.value())
        .unwrap_or_default())
}

/// `χ(η)[B_{θ,2}(q)(η) + B_{-θ,2}(q)(η)]`.
pub fn q_theta2_hat(
    q: &Potential,
    theta: &Direction,
    eta: &Point,
    scheme: &EwaldScheme,
    pv: &PVParams,
    cut: &CutoffSpec,
) -> Result<Complex64> {
    let chi = cutoff_chi(eta, cut);
    if chi == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let plus = b_theta2(q, theta, eta, scheme, pv)?;
    let minus = b_theta2(q, &theta.negate(), eta, scheme, pv)?;
    Ok((plus + minus) * chi)
}

/// `χ(η)(2/|S^{n-1}|) ∫_{θ·η<0} B_{θ,2}(q)(η) dσ(θ)`, with the hemisphere
/// rule of the given level oriented toward `-η/|η|`.
pub fn q_full2_hat(
    q: &Potential,
    eta: &Point,
    theta_level: u32,
    scheme: &EwaldScheme,
    pv: &PVParams,
    cut: &CutoffSpec,
) -> Result<Complex64> {
    let n = q.dimension();
    let chi = cutoff_chi(eta, cut);
    if chi == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let pole = Direction::new(n, -eta)?;
    let rule = hemisphere_rule(n, theta_level)?.rotated(&Frame::to(&pole));
    let terms: Vec<Complex64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(t, &w)| -> Result<Complex64> {
            let theta = Direction::new(n, *t)?;
            Ok(b_theta2(q, &theta, eta, scheme, pv)? * w)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&terms) * (2.0 / sphere_measure(n) * chi))
}

/// One row of a batch evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    pub eta: Point,
    /// Chart frequency of the half-space that contains `η` (`H_θ` or
    /// `H_{-θ}`); zero when `η·θ = 0`.
    pub k: f64,
    /// `S_{θ,1}(η)`, zero outside `H_θ`.
    pub s: Complex64,
    /// `P_θ(η)`, zero outside `H_θ`.
    pub p: Complex64,
    /// `B_{θ,2}(η)`
    pub b: Complex64,
    /// `Q̃_{θ,2}(η)`
    pub q: Complex64,
    pub in_h_theta: bool,
    pub tail_bound: f64,
}

/// Evaluates all operators at one `η`.
pub fn dispersion_sample(
    q: &Potential,
    theta: &Direction,
    eta: &Point,
    scheme: &EwaldScheme,
    pv: &PVParams,
    cut: &CutoffSpec,
) -> Result<DispersionSample> {
    let zero = Complex64::new(0.0, 0.0);
    let chi = cutoff_chi(eta, cut);
    let plus = b_theta2_parts(q, theta, eta, scheme, pv)?;
    let mut sample = DispersionSample {
        eta: *eta,
        k: 0.0,
        s: zero,
        p: zero,
        b: zero,
        q: zero,
        in_h_theta: plus.is_some(),
        tail_bound: 0.0,
    };
    if let Some(parts) = plus {
        sample.k = parts.k;
        sample.s = parts.s;
        sample.p = parts.pv.value;
        sample.b = parts.value();
        sample.q = sample.b * chi;
        sample.tail_bound = parts.pv.tail_bound;
    } else if chi > 0.0 {
        if let Some(parts) = b_theta2_parts(q, &theta.negate(), eta, scheme, pv)? {
            sample.k = parts.k;
            sample.q = parts.value() * chi;
            sample.tail_bound = parts.pv.tail_bound;
        }
    } else if let Ok(c) = chart(eta, &theta.negate()) {
        sample.k = c.k;
    }
    Ok(sample)
}

/// [`dispersion_sample`] over many points; results are in input order and
/// independent of the worker count.
pub fn dispersion_batch(
    q: &Potential,
    theta: &Direction,
    etas: &[Point],
    scheme: &EwaldScheme,
    pv: &PVParams,
    cut: &CutoffSpec,
    exec: Exec,
) -> Result<Vec<DispersionSample>> {
    exec.try_map(etas, |eta| dispersion_sample(q, theta, eta, scheme, pv, cut))
}

/// CSV with columns `eta_1..eta_n,k,S_re,S_im,P_re,P_im,B_re,B_im,Q_re,Q_im`.
pub fn write_samples_csv<W: Write>(samples: &[DispersionSample], n: usize, mut w: W) -> Result<()> {
    let mut header: Vec<String> = (1..=n).map(|i| format!("eta_{i}")).collect();
    header.extend(
        ["k", "S_re", "S_im", "P_re", "P_im", "B_re", "B_im", "Q_re", "Q_im"]
            .iter()
            .map(|s| s.to_string()),
    );
    writeln!(w, "{}", header.join(","))?;
    for s in samples {
        let mut row: Vec<String> = (0..n).map(|i| format!("{:e}", s.eta[i])).collect();
        for v in [
            s.k, s.s.re, s.s.im, s.p.re, s.p.im, s.b.re, s.b.im, s.q.re, s.q.im,
        ] {
            row.push(format!("{v:e}"));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
