//! The fixed-angle chart, half-spaces and cones, unit-sphere quadrature and
//! Ewald spheres.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::quad::GaussLegendre;
use crate::{check_dimension, sphere_measure, Error, Point, Result};

/// A unit vector in `ℝ^n`, `n ∈ {2, 3}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    v: Point,
    n: usize,
}

impl Direction {
    /// Normalizes `v`; fails on the zero vector or when `n = 2` and the
    /// third component is nonzero.
    pub fn new(n: usize, v: Point) -> Result<Self> {
        check_dimension(n)?;
        if n == 2 && v[2] != 0.0 {
            return Err(Error::InvalidParameter {
                name: "direction",
                reason: "two-dimensional directions must have zero third component".into(),
            });
        }
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "direction",
                reason: format!("cannot normalize {v:?}"),
            });
        }
        Ok(Self { v: v / norm, n })
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        if coords.len() != 2 && coords.len() != 3 {
            return Err(Error::InvalidParameter {
                name: "direction",
                reason: format!("expected 2 or 3 components, got {}", coords.len()),
            });
        }
        Self::new(coords.len(), crate::point(coords))
    }

    /// `±e_axis`.
    pub fn axis(n: usize, axis: usize, sign: f64) -> Self {
        let mut v = Point::zeros();
        v[axis] = sign.signum();
        Self { v, n }
    }

    /// `(cos φ, sin φ)` in the plane.
    pub fn planar(angle: f64) -> Self {
        Self {
            v: Point::new(angle.cos(), angle.sin(), 0.0),
            n: 2,
        }
    }

    pub fn vector(&self) -> &Point {
        &self.v
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn negate(&self) -> Self {
        Self { v: -self.v, n: self.n }
    }
}

/// `k > 0` and `θ′` with `η = k(θ′ - θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub k: f64,
    pub theta_prime: Point,
}

/// `k = -|η|²/(2θ·η)`, `θ′ = (η + kθ)/k`, defined on `H_θ = {η·θ < 0}`.
pub fn chart(eta: &Point, theta: &Direction) -> Result<Chart> {
    let dot = eta.dot(theta.vector());
    if !(dot < 0.0) {
        return Err(Error::NotInHalfSpace { dot });
    }
    let k = -eta.norm_squared() / (2.0 * dot);
    let theta_prime = (eta + theta.vector() * k) / k;
    Ok(Chart { k, theta_prime })
}

/// `η·θ ≤ -a|η|`.
pub fn in_cone(eta: &Point, theta: &Direction, a: f64) -> Result<bool> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: format!("cone aperture must lie in (0, 1), got {a}"),
        });
    }
    Ok(eta.dot(theta.vector()) <= -a * eta.norm())
}

/// Quadrature on the unit sphere (or a part of it) with unit-vector nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereRule {
    pub n: usize,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly (0 if not a polynomial rule).
    pub degree: usize,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        crate::quad::pairwise_sum(&self.weights)
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(x, w)| f(x) * w).collect();
        crate::quad::pairwise_sum(&terms)
    }

    /// The rule with every node mapped by `frame`.
    pub fn rotated(&self, frame: &Frame) -> Self {
        Self {
            n: self.n,
            nodes: self.nodes.iter().map(|p| frame.apply(p)).collect(),
            weights: self.weights.clone(),
            degree: self.degree,
        }
    }
}

fn check_level(level: u32) -> Result<()> {
    if !(1..=12).contains(&level) {
        return Err(Error::InvalidParameter {
            name: "level",
            reason: format!("sphere rule level must lie in 1..=12, got {level}"),
        });
    }
    Ok(())
}

/// Full-sphere rule. `n = 2`: `2^{level+4}` equally spaced angles starting at
/// angle 0. `n = 3`: Gauss–Legendre in `cos` of the polar angle (pole `e₃`)
/// with `2^{level+2}` nodes times `2^{level+3}` azimuths.
pub fn sphere_rule(n: usize, level: u32) -> Result<SphereRule> {
    check_dimension(n)?;
    check_level(level)?;
    if n == 2 {
        let m = 1usize << (level + 4);
        let w = 2.0 * PI / m as f64;
        let nodes = (0..m).map(|i| Direction::planar(i as f64 * w).v).collect();
        return Ok(SphereRule {
            n,
            nodes,
            weights: vec![w; m],
            degree: m - 1,
        });
    }
    let polar = GaussLegendre::new(1 << (level + 2));
    let m_az = 1usize << (level + 3);
    let mut nodes = Vec::with_capacity(polar.len() * m_az);
    let mut weights = Vec::with_capacity(polar.len() * m_az);
    let dphi = 2.0 * PI / m_az as f64;
    for (&c, &wc) in polar.nodes.iter().zip(&polar.weights) {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for j in 0..m_az {
            let phi = j as f64 * dphi;
            nodes.push(Point::new(s * phi.cos(), s * phi.sin(), c));
            weights.push(wc * dphi);
        }
    }
    Ok(SphereRule {
        n,
        nodes,
        weights,
        degree: (2 * polar.len() - 1).min(m_az - 1),
    })
}

/// Rule on the open hemisphere `{ω·p > 0}` for the reference pole `p`
/// (`e₁` for `n = 2`, `e₃` for `n = 3`). `n = 2`: Gauss–Legendre in the angle
/// on `(-π/2, π/2)` with `2^{level+3}` nodes. `n = 3`: Gauss–Legendre in
/// `cos ∈ (0, 1)` with `2^{level+1}` nodes times `2^{level+3}` azimuths.
pub fn hemisphere_rule(n: usize, level: u32) -> Result<SphereRule> {
    check_dimension(n)?;
    check_level(level)?;
    if n == 2 {
        let gl = GaussLegendre::new(1 << (level + 3));
        let (nodes, weights) = gl
            .mapped(-0.5 * PI, 0.5 * PI)
            .map(|(a, w)| (Direction::planar(a).v, w))
            .unzip();
        return Ok(SphereRule {
            n,
            nodes,
            weights,
            degree: 0,
        });
    }
    let polar = GaussLegendre::new(1 << (level + 1));
    let m_az = 1usize << (level + 3);
    let dphi = 2.0 * PI / m_az as f64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (c, wc) in polar.mapped(0.0, 1.0) {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for j in 0..m_az {
            let phi = j as f64 * dphi;
            nodes.push(Point::new(s * phi.cos(), s * phi.sin(), c));
            weights.push(wc * dphi);
        }
    }
    Ok(SphereRule {
        n,
        nodes,
        weights,
        degree: 0,
    })
}

/// Full-sphere rule refined geometrically toward the reference pole: polar
/// panels `[0, ψ₀], [ψ₀, 2ψ₀], [2ψ₀, 4ψ₀], …` up to `π`, each with `per_panel`
/// Gauss–Legendre nodes in the polar angle. `n = 3` adds `azimuths`
/// equally spaced azimuths; `n = 2` mirrors each node to `±ψ`.
pub fn graded_rule(n: usize, psi0: f64, per_panel: usize, azimuths: usize) -> Result<SphereRule> {
    check_dimension(n)?;
    if !(psi0 > 0.0) || per_panel == 0 || (n == 3 && azimuths == 0) {
        return Err(Error::InvalidParameter {
            name: "graded_rule",
            reason: format!("need ψ₀ > 0 and nonzero node counts (ψ₀ = {psi0})"),
        });
    }
    let psi0 = psi0.min(PI);
    let mut edges = vec![0.0, psi0];
    while *edges.last().unwrap() < PI {
        let next = (2.0 * edges.last().unwrap()).min(PI);
        edges.push(next);
    }
    let gl = GaussLegendre::new(per_panel);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in edges.windows(2) {
        for (psi, wp) in gl.mapped(w[0], w[1]) {
            if n == 2 {
                for sign in [1.0, -1.0] {
                    nodes.push(Direction::planar(sign * psi).v);
                    weights.push(wp);
                }
            } else {
                let (s, c) = psi.sin_cos();
                let dphi = 2.0 * PI / azimuths as f64;
                for j in 0..azimuths {
                    let phi = j as f64 * dphi;
                    nodes.push(Point::new(s * phi.cos(), s * phi.sin(), c));
                    weights.push(wp * s * dphi);
                }
            }
        }
    }
    Ok(SphereRule {
        n,
        nodes,
        weights,
        degree: 0,
    })
}

/// Rotation taking the reference pole (`e₁` for `n = 2`, `e₃` for `n = 3`)
/// to a target direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    rotation: Rotation3<f64>,
}

impl Frame {
    pub fn to(target: &Direction) -> Self {
        let t = *target.vector();
        let rotation = if target.dimension() == 2 {
            Rotation3::from_axis_angle(&Vector3::z_axis(), t[1].atan2(t[0]))
        } else {
            let pole = Vector3::z();
            match Rotation3::rotation_between(&pole, &t) {
                Some(r) => r,
                // antiparallel: half turn about e₁
                None => Rotation3::from_axis_angle(&Unit::new_unchecked(Vector3::x()), PI),
            }
        };
        Self { rotation }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Rotation3::identity(),
        }
    }

    pub fn apply(&self, p: &Point) -> Point {
        self.rotation * p
    }
}

/// `Γ_r(-2kθ)`: center `-kθ`, radius `rk`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EwaldSphere {
    pub center: Point,
    pub radius: f64,
    pub r: f64,
    pub k: f64,
    pub theta: Direction,
}

impl EwaldSphere {
    pub fn new(k: f64, r: f64, theta: &Direction) -> Result<Self> {
        if !(k > 0.0 && r > 0.0) {
            return Err(Error::InvalidParameter {
                name: "k, r",
                reason: format!("need k > 0 and r > 0, got k = {k}, r = {r}"),
            });
        }
        Ok(Self {
            center: -theta.vector() * k,
            radius: r * k,
            r,
            k,
            theta: *theta,
        })
    }

    /// `ξ = -kθ + rkω`.
    pub fn point(&self, omega: &Point) -> Point {
        self.center + omega * self.radius
    }

    /// Pushed-forward weight factor `(rk)^{n-1}`.
    pub fn jacobian(&self) -> f64 {
        self.radius.powi(self.theta.dimension() as i32 - 1)
    }
}

/// Nodes `ξ_i = -kθ + rkω_i` and weights `w_i (rk)^{n-1}`.
pub fn ewald_nodes(k: f64, r: f64, theta: &Direction, rule: &SphereRule) -> Result<(Vec<Point>, Vec<f64>)> {
    let sphere = EwaldSphere::new(k, r, theta)?;
    let jac = sphere.jacobian();
    Ok((
        rule.nodes.iter().map(|w| sphere.point(w)).collect(),
        rule.weights.iter().map(|w| w * jac).collect(),
    ))
}

/// Uniformly random direction from three standard normal draws.
pub fn direction_from_normals(n: usize, g: [f64; 3]) -> Result<Direction> {
    let v = if n == 2 {
        Point::new(g[0], g[1], 0.0)
    } else {
        Point::new(g[0], g[1], g[2])
    };
    Direction::new(n, v)
}

/// Measure of the full sphere `S^{n-1}`; re-exported for rule checks.
pub fn full_measure(n: usize) -> f64 {
    sphere_measure(n)
}
