//! Bessel functions of the first kind of integer order.
//!
//! Moderate arguments use the trapezoid rule on Bessel's integral
//! `J_m(x) = (2π)^{-1} ∫_{-π}^{π} cos(mτ - x sin τ) dτ`, which converges
//! geometrically for a periodic analytic integrand. Large arguments use the
//! Hankel asymptotic expansion.

use std::f64::consts::PI;

const ASYMPTOTIC_FROM: f64 = 30.0;

pub fn bessel_j(order: u32, x: f64) -> f64 {
    let (sign, ax) = if x < 0.0 && order % 2 == 1 {
        (-1.0, -x)
    } else {
        (1.0, x.abs())
    };
    let v = if ax < ASYMPTOTIC_FROM {
        bessel_trapezoid(order, ax)
    } else {
        bessel_asymptotic(order, ax)
    };
    sign * v
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel_j(0, x)
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel_j(1, x)
}

fn bessel_trapezoid(order: u32, x: f64) -> f64 {
    let m = (x.ceil() as usize + order as usize + 40).next_multiple_of(2);
    let step = 2.0 * PI / m as f64;
    let nf = order as f64;
    // symmetric in τ → -τ: sum over [0, π] with half weights at the ends
    let half = m / 2;
    let mut acc = 0.5 * (1.0 + (nf * PI - x * PI.sin()).cos());
    for j in 1..half {
        let t = j as f64 * step;
        acc += (nf * t - x * t.sin()).cos();
    }
    acc * 2.0 / m as f64
}

fn bessel_asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if term.abs() > last || term.abs() < 1e-17 {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    let chi = x - (order as f64 * 0.5 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(order: u32, x: f64) -> f64 {
        // Σ (-1)^k (x/2)^{2k+m} / (k! (k+m)!)
        let mut term = (x / 2.0).powi(order as i32) / (1..=order).map(|v| v as f64).product::<f64>();
        let mut sum = term;
        for k in 1..200 {
            term *= -(x * x / 4.0) / (k as f64 * (k + order as usize) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }

    #[test]
    fn matches_power_series_for_moderate_arguments() {
        for &x in &[0.0, 0.3, 1.0, 2.404_825_557_695_773, 5.0, 9.7] {
            for order in 0..3 {
                let a = bessel_j(order, x);
                let b = series(order, x);
                assert!((a - b).abs() < 1e-12, "J_{order}({x}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn branches_agree_at_the_switch() {
        for order in 0..3 {
            let x = ASYMPTOTIC_FROM;
            let a = bessel_trapezoid(order, x);
            let b = bessel_asymptotic(order, x);
            assert!((a - b).abs() < 1e-12, "order {order}: {a} vs {b}");
        }
    }

    #[test]
    fn known_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-15);
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-13);
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_j0(100.0) - 0.019_985_850_304_223_12).abs() < 1e-13);
        assert!((bessel_j1(-1.0) + 0.440_050_585_744_933_5).abs() < 1e-14);
    }
}
