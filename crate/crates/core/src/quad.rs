//! One-dimensional quadrature: Gauss–Legendre rules, adaptive Gauss–Kronrod
//! (7/15) and pairwise summation.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Values a quadrature can accumulate.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Sums `values` by recursive halving. The summation tree depends only on the
/// length, which keeps reductions reproducible.
pub fn pairwise_sum<V: QuadValue>(values: &[V]) -> V {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        let mut acc = V::zero();
        for &v in values {
            acc = acc + v;
        }
        acc
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `m`-point rule by Newton iteration on `P_m`.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<V: QuadValue>(&self, a: f64, b: f64, f: impl Fn(f64) -> V) -> V {
        let terms: Vec<V> = self.mapped(a, b).map(|(x, w)| f(x) * w).collect();
        pairwise_sum(&terms)
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<V: QuadValue>(f: &impl Fn(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        kronrod = kronrod + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).magnitude();
    (value, err)
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult<V> {
    pub value: V,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

/// Adaptive Gauss–Kronrod settings.
#[derive(Clone, Copy, Debug)]
pub struct Adaptive {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            max_intervals: 400,
        }
    }
}

impl Adaptive {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// Globally adaptive bisection: the interval with the largest error
    /// estimate is split until the tolerance is met.
    pub fn integrate<V: QuadValue>(&self, f: impl Fn(f64) -> V, a: f64, b: f64) -> QuadResult<V> {
        self.integrate_breaks(f, &[a, b])
    }

    /// Like [`Adaptive::integrate`], starting from the panels delimited by
    /// `breaks` (sorted).
    pub fn integrate_breaks<V: QuadValue>(&self, f: impl Fn(f64) -> V, breaks: &[f64]) -> QuadResult<V> {
        assert!(breaks.len() >= 2);
        let mut panels: Vec<(f64, f64, V, f64)> = breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let (v, e) = gk15(&f, w[0], w[1]);
                (w[0], w[1], v, e)
            })
            .collect();
        if panels.is_empty() {
            return QuadResult {
                value: V::zero(),
                error: 0.0,
                intervals: 0,
                converged: true,
            };
        }
        loop {
            let values: Vec<V> = panels.iter().map(|p| p.2).collect();
            let total = pairwise_sum(&values);
            let err: f64 = panels.iter().map(|p| p.3).sum();
            let target = self.abs_tol.max(self.rel_tol * total.magnitude());
            if err <= target || panels.len() >= self.max_intervals {
                return QuadResult {
                    value: total,
                    error: err,
                    intervals: panels.len(),
                    converged: err <= target,
                };
            }
            let (worst, _) = panels
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, be), (i, p)| {
                    if p.3 > be {
                        (i, p.3)
                    } else {
                        (bi, be)
                    }
                });
            let (a, b, _, _) = panels[worst];
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                return QuadResult {
                    value: total,
                    error: err,
                    intervals: panels.len(),
                    converged: false,
                };
            }
            let (v1, e1) = gk15(&f, a, m);
            let (v2, e2) = gk15(&f, m, b);
            panels[worst] = (a, m, v1, e1);
            panels.insert(worst + 1, (m, b, v2, e2));
        }
    }
}

/// `∫_a^∞ f` through the substitution `x = a + u/(1-u)`.
pub fn integrate_to_infinity<V: QuadValue>(
    settings: &Adaptive,
    f: impl Fn(f64) -> V,
    a: f64,
) -> QuadResult<V> {
    settings.integrate(
        |u| {
            if u >= 1.0 {
                return V::zero();
            }
            let one_minus = 1.0 - u;
            let x = a + u / one_minus;
            f(x) * (1.0 / (one_minus * one_minus))
        },
        0.0,
        1.0,
    )
}
