//! Closed-form exponents and thresholds for the recovery of singularities.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `m = (n-4)/2 + 2/(n+1)`.
pub fn m_threshold(n: usize) -> f64 {
    let n = n as f64;
    (n - 4.0) / 2.0 + 2.0 / (n + 1.0)
}

/// Regularity gained by the `j`-th Born term:
/// `α_j = β - 1/2 + (j-1) - (j-1)(n-1)/2 · max(0, 1/2 - β/n)`.
pub fn alpha_j(n: usize, beta: f64, j: usize) -> Result<f64> {
    if j < 2 {
        return Err(Error::InvalidParameter {
            name: "j",
            reason: format!("terms start at j = 2, got {j}"),
        });
    }
    let floor = m_threshold(n).max(0.0);
    if !(beta >= floor) {
        return Err(Error::OutOfRange {
            what: "alpha_j",
            reason: format!("β = {beta} is below max(0, m) = {floor}"),
        });
    }
    let nf = n as f64;
    let jm = (j - 1) as f64;
    Ok(beta - 0.5 + jm - jm * (nf - 1.0) / 2.0 * (0.5 - beta / nf).max(0.0))
}

/// `min(β + 1, 2β - (n-4)/2)`, the ceiling on the gain of the quadratic term.
pub fn alpha0(n: usize, beta: f64) -> f64 {
    (beta + 1.0).min(2.0 * beta - (n as f64 - 4.0) / 2.0)
}

/// Largest `α` with `q - q_θ ∈ W^{α,2}`: `2β - (n-4)/2` for
/// `m ≤ β < (n-2)/2`, `β + 1` for `β ≥ (n-2)/2`.
pub fn thm11_max(n: usize, beta: f64) -> Option<f64> {
    let nf = n as f64;
    if beta < m_threshold(n) || beta < 0.0 {
        None
    } else if beta < (nf - 2.0) / 2.0 {
        Some(2.0 * beta - (nf - 4.0) / 2.0)
    } else {
        Some(beta + 1.0)
    }
}

/// Supremum of the positive range: `2β - (n-3)/2` for
/// `(n-3)/2 < β < (n-1)/2`, `β + 1` for `β ≥ (n-1)/2`.
pub fn thm13_sup(n: usize, beta: f64) -> Option<f64> {
    let nf = n as f64;
    if beta <= (nf - 3.0) / 2.0 || beta < 0.0 {
        None
    } else if beta < (nf - 1.0) / 2.0 {
        Some(2.0 * beta - (nf - 3.0) / 2.0)
    } else {
        Some(beta + 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub beta: f64,
    pub m: f64,
    /// `α_j` for `j = 2..=5`; empty below `max(0, m)`.
    pub alpha_j: BTreeMap<usize, f64>,
    pub thm11_max: Option<f64>,
    pub thm13_sup: Option<f64>,
    pub alpha0: f64,
}

pub fn thm_limits(n: usize, beta: f64) -> BoundReport {
    let alpha_j = (2..=5)
        .filter_map(|j| alpha_j(n, beta, j).ok().map(|v| (j, v)))
        .collect();
    BoundReport {
        n,
        beta,
        m: m_threshold(n),
        alpha_j,
        thm11_max: thm11_max(n, beta),
        thm13_sup: thm13_sup(n, beta),
        alpha0: alpha0(n, beta),
    }
}

impl BoundReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// The piecewise bounds on a `β` grid as CSV: `beta,m,thm11_max,thm13_sup,alpha0`,
/// empty cells where a bound makes no statement.
pub fn write_bounds_table<W: Write>(n: usize, betas: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "beta,m,thm11_max,thm13_sup,alpha0")?;
    let cell = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for &beta in betas {
        let r = thm_limits(n, beta);
        writeln!(
            w,
            "{:e},{:e},{},{},{:e}",
            beta,
            r.m,
            cell(r.thm11_max),
            cell(r.thm13_sup),
            r.alpha0
        )?;
    }
    Ok(())
}
