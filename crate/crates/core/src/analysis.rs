//! Decay fits along rays, refinement scans of weighted norms and pass/fail
//! verdicts against the predicted exponents.

use std::io::Write;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::bounds::alpha0;
use crate::dispersion::{q_theta2_hat, spherical_op, CutoffSpec, EwaldScheme, PVParams};
use crate::exec::Exec;
use crate::geometry::{in_cone, Direction};
use crate::potentials::Potential;
use crate::quad::{pairwise_sum, GaussLegendre};
use crate::spectral::japanese;
use crate::{Error, Point, Result};

/// Minimum number of usable samples in a fit.
pub const MIN_FIT_SAMPLES: usize = 8;
/// Final growth ratio at or below which a norm counts as saturated.
pub const SATURATION_RATIO: f64 = 1.1;
/// Growth ratio every level must reach for a norm to count as diverging.
pub const GROWTH_RATIO: f64 = 1.15;
/// Slack subtracted from the predicted decay exponent.
pub const DECAY_SLACK: f64 = 0.15;

/// Least-squares line through `(ln t, ln value)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub log_constant: f64,
    /// RMS of the log-log residuals.
    pub residual: f64,
    /// Smallest and largest `t` actually used.
    pub window: (f64, f64),
    pub sample_count: usize,
}

/// Fits `value ≈ C t^p` to the samples with `t` in `window`. Nonpositive
/// values are skipped.
pub fn fit_decay(samples: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "t must be strictly increasing".into(),
        });
    }
    let inside: Vec<&(f64, f64)> = samples
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect();
    let used: Vec<(f64, f64)> = inside
        .iter()
        .filter(|(t, v)| *t > 0.0 && *v > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    let skipped = inside.len() - used.len();
    if skipped > 0 {
        debug!("fit_decay: skipped {skipped} nonpositive samples");
    }
    if used.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: used.len(),
            need: MIN_FIT_SAMPLES,
        });
    }
    let m = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / m;
    let my = used.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = used
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(DecayFit {
        exponent: slope,
        log_constant: intercept,
        residual: (ss / m).sqrt(),
        window: (used[0].0.exp(), used[used.len() - 1].0.exp()),
        sample_count: used.len(),
    })
}

/// Outcome of a check against a predicted bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub claim: String,
    pub pass: bool,
    /// Distance to the threshold, nonnegative exactly when `pass`.
    pub margin: f64,
    pub details: String,
}

impl Verdict {
    fn from_margin(claim: &str, margin: f64, details: String) -> Self {
        Self {
            claim: claim.to_string(),
            pass: margin >= 0.0,
            margin,
            details,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `count` log-spaced points `t·d` with `t ∈ [t_min, t_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub direction: Direction,
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl Ray {
    pub fn new(direction: Direction, t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) || count < 2 {
            return Err(Error::InvalidParameter {
                name: "ray",
                reason: format!("need 0 < t_min < t_max and count ≥ 2, got [{t_min}, {t_max}] × {count}"),
            });
        }
        Ok(Self {
            direction,
            t_min,
            t_max,
            count,
        })
    }

    pub fn radii(&self) -> Vec<f64> {
        let step = (self.t_max / self.t_min).ln() / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.t_max
                } else {
                    self.t_min * (step * i as f64).exp()
                }
            })
            .collect()
    }

    pub fn points(&self) -> Vec<Point> {
        self.radii()
            .into_iter()
            .map(|t| self.direction.vector() * t)
            .collect()
    }
}

/// `(t, value)` samples as CSV.
pub fn write_samples_csv<W: Write>(samples: &[(f64, f64)], mut w: W) -> Result<()> {
    writeln!(w, "t,value")?;
    for (t, v) in samples {
        writeln!(w, "{t:e},{v:e}")?;
    }
    Ok(())
}

/// `min(β + n/2 + 1, 2β + 2)`.
pub fn lemma52_rate(n: usize, beta: f64) -> f64 {
    (beta + n as f64 / 2.0 + 1.0).min(2.0 * beta + 2.0)
}

/// Samples, fit and verdict of one ray probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayProbe {
    pub samples: Vec<(f64, f64)>,
    pub fit: DecayFit,
    pub verdict: Verdict,
}

/// Fits the decay of `S_{θ,1}(q)` along a ray in the cone
/// `η·θ ≤ -a|η|` and passes when the exponent is at least
/// `-min(β + n/2 + 1, 2β + 2) - 0.15`.
pub fn lemma52_check(
    q: &Potential,
    beta: f64,
    theta: &Direction,
    a: f64,
    ray: &Ray,
    scheme: &EwaldScheme,
    exec: Exec,
) -> Result<RayProbe> {
    let flags = q.flags();
    if !(flags.is_real && flags.is_radial && flags.fourier_nonneg) {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: "needs a real radial potential with nonnegative Fourier transform".into(),
        });
    }
    if !in_cone(ray.direction.vector(), theta, a)? {
        return Err(Error::InvalidParameter {
            name: "ray",
            reason: format!("direction is outside the cone of aperture {a}"),
        });
    }
    let radii = ray.radii();
    let values = exec.try_map(&radii, |&t| {
        spherical_op(q, theta, 1.0, &(ray.direction.vector() * t), scheme).map(|s| s.re)
    })?;
    let samples: Vec<(f64, f64)> = radii.into_iter().zip(values).collect();
    let fit = fit_decay(&samples, (ray.t_min, ray.t_max))?;
    let threshold = -lemma52_rate(q.dimension(), beta) - DECAY_SLACK;
    let verdict = Verdict::from_margin(
        "lemma52",
        fit.exponent - threshold,
        format!(
            "n = {}, beta = {beta}, exponent {:.4} vs threshold {threshold:.4}, residual {:.2e}",
            q.dimension(),
            fit.exponent,
            fit.residual
        ),
    );
    Ok(RayProbe {
        samples,
        fit,
        verdict,
    })
}

/// The cone axis `-θ` and, for `extra > 0`, `extra` further directions
/// halfway to the cone boundary.
pub fn cone_rays(theta: &Direction, a: f64, extra: usize) -> Result<Vec<Direction>> {
    let axis = theta.negate();
    let mut out = vec![axis.clone()];
    if extra == 0 {
        return Ok(out);
    }
    let half = 0.5 * a.acos();
    let (e1, e2) = perpendiculars(theta);
    for i in 0..extra {
        let phi = 2.0 * std::f64::consts::PI * i as f64 / extra as f64;
        let side = if theta.dimension() == 2 {
            e1 * if i % 2 == 0 { 1.0 } else { -1.0 }
        } else {
            e1 * phi.cos() + e2 * phi.sin()
        };
        let v = axis.vector() * half.cos() + side * half.sin();
        out.push(Direction::new(theta.dimension(), v)?);
    }
    Ok(out)
}

fn perpendiculars(theta: &Direction) -> (Point, Point) {
    let t = theta.vector();
    if theta.dimension() == 2 {
        return (Point::new(-t[1], t[0], 0.0), Point::zeros());
    }
    let seed = if t[0].abs() < 0.9 {
        Point::new(1.0, 0.0, 0.0)
    } else {
        Point::new(0.0, 1.0, 0.0)
    };
    let e1 = (seed - t * seed.dot(t)).normalize();
    (e1, t.cross(&e1))
}

/// Polar lattice on the cone `η·θ ≤ -a|η|`. In `|η|` the panels are
/// `[0, base]` and the octaves `[2^j base, 2^{j+1} base]` up to the largest
/// extent, each with Gauss–Legendre nodes; the polar angle also uses
/// Gauss–Legendre nodes. For radial `q` the integrand is symmetric about the
/// `θ` axis, so in three dimensions the azimuth contributes a factor `2π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeLattice {
    pub aperture: f64,
    pub angular_nodes: usize,
    pub radial_nodes: usize,
    pub base: f64,
    /// Increasing frequency extents, one per level, each `base` times a
    /// power of two.
    pub extents: Vec<f64>,
}

impl Default for ConeLattice {
    fn default() -> Self {
        Self {
            aperture: 0.5,
            angular_nodes: 6,
            radial_nodes: 8,
            base: 1.0,
            extents: vec![64.0, 128.0, 256.0],
        }
    }
}

struct LatticePoint {
    eta: Point,
    t: f64,
    weight: f64,
}

impl ConeLattice {
    fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::InvalidParameter {
                name: "lattice",
                reason: reason.to_string(),
            })
        };
        if !(self.aperture > 0.0 && self.aperture < 1.0) {
            return bad("aperture must lie in (0, 1)");
        }
        if self.angular_nodes == 0 || self.radial_nodes == 0 || !(self.base > 0.0) {
            return bad("need positive base and node counts");
        }
        if self.extents.len() < 3 {
            return bad("need at least 3 levels");
        }
        if self.extents.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("extents must be increasing");
        }
        for e in &self.extents {
            let octaves = (e / self.base).log2();
            if !(octaves >= 0.0) || (octaves - octaves.round()).abs() > 1e-9 {
                return bad("extents must be the base times a power of two");
            }
        }
        Ok(())
    }

    fn panels(&self) -> Vec<(f64, f64)> {
        let top = self.extents[self.extents.len() - 1];
        let mut out = vec![(0.0, self.base)];
        let mut a = self.base;
        while a < top * (1.0 - 1e-12) {
            out.push((a, 2.0 * a));
            a *= 2.0;
        }
        out
    }

    fn points(&self, theta: &Direction) -> Vec<LatticePoint> {
        let n = theta.dimension();
        let axis = -theta.vector();
        let (e1, _) = perpendiculars(theta);
        let gl = GaussLegendre::new(self.angular_nodes);
        let angular: Vec<(f64, f64)> = if n == 2 {
            let psi = self.aperture.acos();
            gl.mapped(-psi, psi).collect()
        } else {
            gl.mapped(self.aperture, 1.0)
                .map(|(c, w)| (c.acos(), w * 2.0 * std::f64::consts::PI))
                .collect()
        };
        let radial = GaussLegendre::new(self.radial_nodes);
        let mut out = Vec::new();
        for (a, b) in self.panels() {
            for (t, wt) in radial.mapped(a, b) {
                for &(psi, w) in &angular {
                    out.push(LatticePoint {
                        eta: (axis * psi.cos() + e1 * psi.sin()) * t,
                        t,
                        weight: w * wt * t.powi(n as i32 - 1),
                    });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanLevel {
    pub descriptor: String,
    pub extent: f64,
    pub norm: f64,
}

/// Weighted norms of one order `α` under growing frequency extent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementScan {
    pub alpha: f64,
    pub levels: Vec<ScanLevel>,
    pub growth_ratios: Vec<f64>,
}

impl RefinementScan {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `Σ ⟨η⟩^{2α}|Q̃_{θ,2}(q)(η)|² Δη` over the cone lattice truncated at each
/// extent. `Q̃` is evaluated once on the largest lattice.
#[allow(clippy::too_many_arguments)]
pub fn gain_scan(
    q: &Potential,
    theta: &Direction,
    alphas: &[f64],
    lattice: &ConeLattice,
    scheme: &EwaldScheme,
    pv: &PVParams,
    cut: &CutoffSpec,
    exec: Exec,
) -> Result<Vec<RefinementScan>> {
    lattice.validate()?;
    if !q.flags().is_radial {
        return Err(Error::Unsupported("a radial potential for the axisymmetric lattice".into()));
    }
    if q.dimension() != theta.dimension() {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: "dimension differs from the potential".into(),
        });
    }
    let points = lattice.points(theta);
    let values = exec.try_map(&points, |p| {
        q_theta2_hat(q, theta, &p.eta, scheme, pv, cut).map(|z| z.norm_sqr())
    })?;
    let scans = alphas
        .iter()
        .map(|&alpha| {
            let levels: Vec<ScanLevel> = lattice
                .extents
                .iter()
                .map(|&extent| {
                    let terms: Vec<f64> = points
                        .iter()
                        .zip(&values)
                        .filter(|(p, _)| p.t <= extent)
                        .map(|(p, v)| japanese(p.t).powf(2.0 * alpha) * v * p.weight)
                        .collect();
                    ScanLevel {
                        descriptor: format!(
                            "cone a={} angular={} radial={} extent={}",
                            lattice.aperture, lattice.angular_nodes, lattice.radial_nodes, extent
                        ),
                        extent,
                        norm: pairwise_sum(&terms),
                    }
                })
                .collect();
            let growth_ratios = levels.windows(2).map(|w| w[1].norm / w[0].norm).collect();
            RefinementScan {
                alpha,
                levels,
                growth_ratios,
            }
        })
        .collect();
    Ok(scans)
}

/// Below `α₀` the norm must saturate (final ratio ≤ 1.1); above it every
/// ratio must be at least 1.15.
pub fn scan_verdict(scan: &RefinementScan, n: usize, beta: f64) -> Verdict {
    let a0 = alpha0(n, beta);
    let ratios = &scan.growth_ratios;
    if scan.alpha < a0 {
        let last = ratios.last().copied().unwrap_or(f64::NAN);
        Verdict::from_margin(
            "gain-saturates",
            SATURATION_RATIO - last,
            format!("alpha = {} < alpha0 = {a0}, ratios {ratios:?}", scan.alpha),
        )
    } else {
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        Verdict::from_margin(
            "gain-grows",
            min - GROWTH_RATIO,
            format!("alpha = {} >= alpha0 = {a0}, ratios {ratios:?}", scan.alpha),
        )
    }
}

/// Decay of `|Q̃_{θ,2}(q)|` along a ray.
pub fn q_theta_decay(
    q: &Potential,
    theta: &Direction,
    ray: &Ray,
    scheme: &EwaldScheme,
    pv: &PVParams,
    cut: &CutoffSpec,
    exec: Exec,
) -> Result<(Vec<(f64, f64)>, DecayFit)> {
    let radii = ray.radii();
    let values = exec.try_map(&radii, |&t| {
        q_theta2_hat(q, theta, &(ray.direction.vector() * t), scheme, pv, cut).map(|z| z.norm())
    })?;
    let samples: Vec<(f64, f64)> = radii.into_iter().zip(values).collect();
    let fit = fit_decay(&samples, (ray.t_min, ray.t_max))?;
    Ok((samples, fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..40).map(|i| 1.0 + 2.0 * i as f64).map(|t| (t, f(t))).collect()
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_decay(&grid(|t| t.powi(-2)), (0.0, 100.0)).unwrap();
        assert!((fit.exponent + 2.0).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
        assert_eq!(fit.sample_count, 40);
        assert_eq!(fit.window, (1.0, 79.0));
    }

    #[test]
    fn japanese_power_law() {
        let s: Vec<(f64, f64)> = (0..60).map(|i| 8.0 + i as f64).map(|t| (t, 5.0 * japanese(t).powf(-2.5))).collect();
        let fit = fit_decay(&s, (8.0, 64.0)).unwrap();
        assert!((fit.exponent + 2.5).abs() < 0.02);
    }

    #[test]
    fn perturbed_power_law() {
        let fit = fit_decay(&grid(|t| t.powi(-2) * (1.0 + 0.1 * t.sin())), (0.0, 100.0)).unwrap();
        assert!((fit.exponent + 2.0).abs() < 0.05);
        assert!(fit.residual > 0.0);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let few = grid(|t| t.powi(-2));
        assert!(matches!(
            fit_decay(&few, (1.0, 10.0)),
            Err(Error::InsufficientSamples { got: 5, need: 8 })
        ));
        let zeros = grid(|t| if t < 40.0 { 0.0 } else { t.powi(-2) });
        let fit = fit_decay(&zeros, (0.0, 100.0)).unwrap();
        assert_eq!(fit.sample_count, 20);
        let mut unordered = grid(|t| t.powi(-2));
        unordered.swap(3, 4);
        assert!(fit_decay(&unordered, (0.0, 100.0)).is_err());
    }

    #[test]
    fn decay_rates() {
        assert_eq!(lemma52_rate(3, 1.0), 3.5);
        assert_eq!(lemma52_rate(2, 1.0), 3.0);
        assert_eq!(lemma52_rate(3, 3.0), 5.5);
    }

    #[test]
    fn ray_radii_are_log_spaced() {
        let ray = Ray::new(Direction::axis(3, 0, 1.0), 8.0, 48.0, 16).unwrap();
        let r = ray.radii();
        assert_eq!(r.len(), 16);
        assert_eq!((r[0], r[15]), (8.0, 48.0));
        assert!((r[1] / r[0] - r[15] / r[14]).abs() < 1e-12);
        assert!(Ray::new(Direction::axis(3, 0, 1.0), 8.0, 4.0, 16).is_err());
    }

    #[test]
    fn cone_rays_lie_in_cone() {
        for n in [2, 3] {
            let theta = Direction::axis(n, 0, -1.0);
            let rays = cone_rays(&theta, 0.5, 4).unwrap();
            assert_eq!(rays.len(), 5);
            for d in rays {
                assert!(in_cone(d.vector(), &theta, 0.5).unwrap());
            }
        }
    }

    #[test]
    fn lattice_weights_cover_cone_volume() {
        for n in [2, 3] {
            let theta = Direction::axis(n, 0, -1.0);
            let lattice = ConeLattice {
                angular_nodes: 8,
                extents: vec![8.0, 16.0, 32.0],
                ..ConeLattice::default()
            };
            let pts = lattice.points(&theta);
            let vol: f64 = pts.iter().map(|p| p.weight).sum();
            let r = 32.0f64;
            let exact = if n == 2 {
                0.5f64.acos() * r * r
            } else {
                2.0 * std::f64::consts::PI * 0.5 * r.powi(3) / 3.0
            };
            assert!((vol - exact).abs() < 1e-10 * exact, "n = {n}: {vol} vs {exact}");
            for p in &pts {
                assert!(in_cone(&p.eta, &theta, 0.4999).unwrap());
            }
        }
    }

    #[test]
    fn lattice_rejects_misaligned_extents() {
        let lattice = ConeLattice {
            extents: vec![8.0, 12.0, 16.0],
            ..ConeLattice::default()
        };
        assert!(lattice.validate().is_err());
        let short = ConeLattice {
            extents: vec![8.0, 16.0],
            ..ConeLattice::default()
        };
        assert!(short.validate().is_err());
    }

    #[test]
    fn lemma52_rejects_rays_outside_cone() {
        let q = Potential::gaussian(3, 0.5).unwrap();
        let theta = Direction::axis(3, 0, -1.0);
        let ray = Ray::new(Direction::axis(3, 1, 1.0), 8.0, 48.0, 16).unwrap();
        assert!(lemma52_check(&q, 1.0, &theta, 0.5, &ray, &EwaldScheme::default(), Exec::Sequential).is_err());
    }

    #[test]
    fn gaussian_norms_saturate() {
        let q = Potential::gaussian(2, 0.5).unwrap();
        let theta = Direction::axis(2, 0, -1.0);
        let lattice = ConeLattice {
            angular_nodes: 4,
            radial_nodes: 6,
            extents: vec![4.0, 8.0, 16.0],
            ..ConeLattice::default()
        };
        let scans = gain_scan(
            &q,
            &theta,
            &[0.0, 1.0],
            &lattice,
            &EwaldScheme::default(),
            &PVParams::default(),
            &CutoffSpec::new(1.5).unwrap(),
            Exec::Parallel,
        )
        .unwrap();
        for s in &scans {
            assert_eq!(s.levels.len(), 3);
            let last = *s.growth_ratios.last().unwrap();
            assert!((last - 1.0).abs() < 0.1, "{s:?}");
            assert!(scan_verdict(s, 2, 10.0).pass);
        }
        for (a, b) in scans[0].levels.iter().zip(&scans[1].levels) {
            assert!(b.norm >= a.norm);
        }
    }

    #[test]
    fn verdict_json_round_trip() {
        let v = Verdict::from_margin("x", -0.5, "d".into());
        assert!(!v.pass);
        let back: Verdict = serde_json::from_str(&v.to_json().unwrap()).unwrap();
        assert_eq!(back, v);
    }

    proptest! {
        #[test]
        fn fit_recovers_any_power(p in -6.0f64..0.0, c in 0.1f64..10.0) {
            let fit = fit_decay(&grid(|t| c * t.powf(p)), (0.0, 100.0)).unwrap();
            prop_assert!((fit.exponent - p).abs() < 1e-9);
            prop_assert!((fit.log_constant - c.ln()).abs() < 1e-8);
        }
    }
}
