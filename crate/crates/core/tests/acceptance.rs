//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use born_dispersion::analysis::RefinementScan;
use born_dispersion::bounds::{alpha0, alpha_j, m_threshold, thm11_max};
use born_dispersion::dispersion::{principal_value_op, q_full2_hat, CutoffSpec, EwaldScheme, PVParams};
use born_dispersion::exec::with_threads;
use born_dispersion::experiments::{run_in, Config, RunOutcome};
use born_dispersion::geometry::{chart, direction_from_normals};
use born_dispersion::oracle::{
    exp_integral_e1, kernel_center_ratio, sphere_kernel_bound, trace_ratio, GaussianMixture, MixtureTerm,
};
use born_dispersion::potentials::Potential;
use born_dispersion::spectral::make_grid;
use born_dispersion::{Complex64, Point, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    pass: bool,
    details: String,
}

impl Check {
    fn new(pass: bool, details: impl Into<String>) -> Self {
        Self {
            pass,
            details: details.into(),
        }
    }
}

struct Suite {
    work: PathBuf,
    failures: usize,
}

impl Suite {
    fn criterion(&mut self, id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce(&Path) -> Result<Check>) {
        let dir = self.work.join(format!("c{id}"));
        let start = Instant::now();
        let result = f(&dir);
        let elapsed = start.elapsed();
        let (mut pass, mut details) = match result {
            Ok(c) => (c.pass, c.details),
            Err(e) => (false, format!("error: {e}")),
        };
        if let Some(limit) = limit {
            if elapsed > limit {
                pass = false;
                details.push_str(&format!("; over the {:.0} s limit", limit.as_secs_f64()));
            }
        }
        println!(
            "criterion {id:>2} {name:<28} {} ({:.1} s) {details}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            self.failures += 1;
        }
    }
}

fn run_config(json: &str, dir: &Path, threads: usize) -> Result<RunOutcome> {
    let config = Config::from_json(json.as_bytes())?;
    with_threads(threads, || run_in(&config, "acceptance", dir))
}

const ORACLE_CONFIG: &str = r#"{
    "experiment": "dispersion-ray", "n": 2, "theta": [-1, 0],
    "potential": {"kind": "gaussian", "a": 0.5},
    "etas": [[3, 0], [5, 0], [8, 0]], "compare_brute": true
}"#;

const DECAY3_CONFIG: &str = r#"{
    "experiment": "lemma52", "n": 3, "beta": 1.0, "theta": [-1, 0, 0],
    "grid": {"N": 128, "L": 16},
    "ray": {"direction": [1, 0, 0], "t_min": 8, "t_max": 48, "count": 16}
}"#;

const DECAY2_CONFIG: &str = r#"{
    "experiment": "lemma52", "n": 2, "beta": 1.0, "theta": [-1, 0],
    "grid": {"N": 128, "L": 16},
    "ray": {"direction": [1, 0], "t_min": 8, "t_max": 48, "count": 16}
}"#;

const GAIN_CONFIG: &str = r#"{
    "experiment": "gain-scan", "n": 3, "beta": 1.0, "theta": [-1, 0, 0],
    "grid": {"N": 128, "L": 16}, "alphas": [1.7, 2.3]
}"#;

const GBETA_CONFIG: &str = r#"{
    "experiment": "gbeta", "n": 3, "beta": 1.0, "grid": {"N": 128, "L": 16}, "fit_window": [8, 25]
}"#;

fn chart_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = (0.0f64, 0.0f64, f64::INFINITY);
    for n in [2, 3] {
        let mut done = 0;
        while done < 1000 {
            let g: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if g.iter().map(|x| x * x).sum::<f64>() < 1e-4 {
                continue;
            }
            let theta = direction_from_normals(n, g).unwrap();
            let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
            let mut eta = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0) * scale;
            if n == 3 {
                eta[2] = rng.gen_range(-1.0..1.0) * scale;
            }
            let dot = eta.dot(theta.vector());
            if dot.abs() < 1e-3 * eta.norm() {
                continue;
            }
            if dot > 0.0 {
                eta = -eta;
            }
            let c = chart(&eta, &theta).unwrap();
            let back = (c.theta_prime - theta.vector()) * c.k;
            worst.0 = worst.0.max((back - eta).norm() / eta.norm());
            worst.1 = worst.1.max((c.theta_prime.norm() - 1.0).abs());
            worst.2 = worst.2.min(2.0 * c.k / eta.norm());
            done += 1;
        }
    }
    Check::new(
        worst.0 <= 1e-12 && worst.1 <= 1e-12 && worst.2 >= 1.0,
        format!(
            "max |k(θ′-θ)-η|/|η| = {:.2e}, max ||θ′|-1| = {:.2e}, min 2k/|η| = {:.6}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn gbeta_decay(dir: &Path) -> Result<Check> {
    let out = run_config(GBETA_CONFIG, dir, 1)?;
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("gbeta_report.json"))?)?;
    let exponent = report["fit"]["exponent"].as_f64().unwrap();
    let min_ratio = report["min_ratio"].as_f64().unwrap();
    let count = report["fit"]["sample_count"].as_u64().unwrap();
    let window = &report["fit"]["window"];
    Ok(Check::new(
        out.passed() && (exponent + 2.5).abs() <= 0.1 && min_ratio >= -1e-8,
        format!(
            "exponent {exponent:.4} over [{:.2}, {:.2}] ({count} shells), min ĝ/ĝ(0) = {min_ratio:.2e}",
            window[0].as_f64().unwrap(),
            window[1].as_f64().unwrap()
        ),
    ))
}

fn oracle_equivalence(dir: &Path) -> Result<Check> {
    let out = run_config(ORACLE_CONFIG, dir, 4)?;
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("oracle_comparison.json"))?)?;
    let errors: Vec<f64> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["relative_error"].as_f64().unwrap())
        .collect();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    Ok(Check::new(
        out.passed() && errors.len() == 3 && worst <= 0.05,
        format!("relative errors {:?}", errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()),
    ))
}

fn pv_machinery() -> Result<Check> {
    let params = PVParams {
        tail_ratio: 1e-7,
        ..PVParams::default()
    };
    let r = principal_value_op(|r| Ok(Complex64::new((-(1.0 - r) * (1.0 - r)).exp(), 0.0)), 1.0, &params)?;
    let target = -0.5 * exp_integral_e1(1.0);
    let err = (r.value.re - target).abs();
    Ok(Check::new(
        err <= 1e-6,
        format!("{:.10} vs {target:.10} (error {err:.1e}, r_max {})", r.value.re, r.r_max),
    ))
}

fn spherical_decay(dir: &Path) -> Result<Check> {
    let mut parts = Vec::new();
    let mut pass = true;
    for (config, sub, threshold) in [(DECAY3_CONFIG, "n3", -3.65), (DECAY2_CONFIG, "n2", -3.15)] {
        let d = dir.join(sub);
        let out = run_config(config, &d, 4)?;
        let verdict: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("lemma52_verdict.json"))?)?;
        let samples = fs::read_to_string(d.join("lemma52_samples.csv"))?;
        let rows: Vec<(f64, f64)> = samples
            .lines()
            .skip(1)
            .map(|l| {
                let mut it = l.split(',').map(|v| v.parse::<f64>().unwrap());
                (it.next().unwrap(), it.next().unwrap())
            })
            .collect();
        let fit = born_dispersion::analysis::fit_decay(&rows, (8.0, 48.0))?;
        pass &= out.passed() && verdict["pass"] == true && rows.len() == 16 && fit.exponent >= threshold;
        parts.push(format!("{sub}: exponent {:.4} (≥ {threshold})", fit.exponent));
    }
    Ok(Check::new(pass, parts.join(", ")))
}

fn gain_trend(dir: &Path) -> Result<Check> {
    run_config(GAIN_CONFIG, dir, 4)?;
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("gain_scan.json"))?)?;
    let scans: Vec<RefinementScan> = serde_json::from_value(report["scans"].clone())?;
    let below = scans.iter().find(|s| s.alpha == 1.7).unwrap();
    let above = scans.iter().find(|s| s.alpha == 2.3).unwrap();
    let saturates = below.levels.len() == 3 && *below.growth_ratios.last().unwrap() <= 1.1;
    let grows = above.levels.len() == 3 && above.growth_ratios.iter().all(|r| *r >= 1.15);
    Ok(Check::new(
        saturates && grows,
        format!(
            "α = 1.7 ratios {:.3?}, α = 2.3 ratios {:.3?}, extents {:?}",
            below.growth_ratios,
            above.growth_ratios,
            below.levels.iter().map(|l| l.extent).collect::<Vec<_>>()
        ),
    ))
}

fn trace_constant() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in [2usize, 3] {
        let grid = make_grid(n, if n == 2 { 256 } else { 64 }, 8.0)?;
        for _ in 0..50 {
            let terms = (0..rng.gen_range(1..=4))
                .map(|_| {
                    let mut c = [0.0; 3];
                    for x in c.iter_mut().take(n) {
                        *x = rng.gen_range(-2.0..2.0);
                    }
                    MixtureTerm {
                        coefficient: rng.gen_range(-1.0..1.0),
                        a: rng.gen_range(0.3..3.0),
                        center: Point::from(c),
                    }
                })
                .collect();
            let f = GaussianMixture::new(n, terms)?;
            for rho in [0.5, 1.0, 2.0, 4.0] {
                worst = worst.max(trace_ratio(&f, rho, &grid, 5)?);
                cases += 1;
            }
        }
    }
    let gaussian = GaussianMixture::new(
        3,
        vec![MixtureTerm {
            coefficient: 1.0,
            a: 0.5,
            center: Point::zeros(),
        }],
    )?;
    let r = trace_ratio(&gaussian, 1.0, &make_grid(3, 64, 8.0)?, 5)?;
    Ok(Check::new(
        worst <= 1.0 + 1e-6 && (r - 0.3319).abs() <= 1e-3,
        format!("max ratio {worst:.4} over {cases} cases, Gaussian ratio {r:.5}"),
    ))
}

fn sphere_kernel() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, lambdas) in [(2usize, vec![0.25, 0.5]), (3, vec![0.25, 0.5, 1.0])] {
        let rho = 1.5;
        let xs: Vec<Point> = (0..100)
            .map(|i| {
                let mut v = Point::zeros();
                for j in 0..n {
                    v[j] = rng.gen_range(-1.0..1.0);
                }
                let v = v.normalize();
                let r = match i % 3 {
                    0 => rho * rng.gen_range(0.0..0.99),
                    1 => rho,
                    _ => rho * rng.gen_range(1.01..2.0),
                };
                v * r
            })
            .collect();
        for &lambda in &lambdas {
            let max_at = |level: u32| -> Result<f64> {
                xs.iter()
                    .map(|x| sphere_kernel_bound(x, rho, lambda, n, level))
                    .try_fold(0.0f64, |m, v| Ok(m.max(v?)))
            };
            let (a, b) = (max_at(2)?, max_at(3)?);
            let spread = (a - b).abs() / b;
            pass &= b.is_finite() && spread <= 0.02;
            parts.push(format!("n{n} λ={lambda}: max {b:.4} (Δ {spread:.1e})"));
        }
        for lambda in &lambdas {
            let center = sphere_kernel_bound(&Point::zeros(), rho, *lambda, n, 3)?;
            pass &= (center - kernel_center_ratio(n)).abs() <= 1e-10;
        }
    }
    let flat = sphere_kernel_bound(&Point::new(0.3, -2.0, 0.7), 2.5, 1.0, 3, 3)?;
    pass &= (flat - 4.0 * PI).abs() <= 1e-10;
    Ok(Check::new(pass, parts.join(", ")))
}

fn bound_calculators() -> Result<Check> {
    let eps = 4.0 * f64::EPSILON;
    let checks = [
        (m_threshold(3), 0.0),
        (m_threshold(5), 5.0 / 6.0),
        (alpha_j(3, 1.0, 2)?, 4.0 / 3.0),
        (alpha_j(3, 1.0, 3)?, 13.0 / 6.0),
        (thm11_max(3, 1.0).unwrap(), 2.0),
        (thm11_max(5, 1.0).unwrap(), 1.5),
        (alpha0(3, 1.0), 2.0),
    ];
    let worst = checks
        .iter()
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(Check::new(worst <= eps, format!("max deviation {worst:.1e}")))
}

fn directional_average_radial() -> Result<Check> {
    let q = Potential::gaussian(2, 0.5)?;
    let at = |deg: f64| {
        let a = deg.to_radians();
        q_full2_hat(
            &q,
            &(Point::new(a.cos(), a.sin(), 0.0) * 4.0),
            5,
            &EwaldScheme::default(),
            &PVParams::default(),
            &CutoffSpec::default(),
        )
    };
    let (a, b) = (at(0.0)?, at(73.0)?);
    let diff = (a - b).norm() / a.norm();
    Ok(Check::new(diff <= 1e-4, format!("relative difference {diff:.1e}")))
}

fn determinism(work: &Path) -> Result<Check> {
    let mut parts = Vec::new();
    let mut pass = true;
    let cases = [
        (ORACLE_CONFIG, "c3", "dispersion.csv"),
        (DECAY3_CONFIG, "c5/n3", "lemma52_samples.csv"),
        (DECAY2_CONFIG, "c5/n2", "lemma52_samples.csv"),
        (GAIN_CONFIG, "c6", "gain_scan.csv"),
    ];
    for (config, sub, file) in cases {
        let first = fs::read(work.join(sub).join(file))?;
        let again = work.join("c11").join(sub);
        run_config(config, &again, 1)?;
        let second = fs::read(again.join(file))?;
        let same = first == second;
        pass &= same;
        parts.push(format!("{sub}/{file} {}", if same { "identical" } else { "DIFFERS" }));
    }
    Ok(Check::new(pass, parts.join(", ")))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let mut suite = Suite {
        work: tmp.path().to_path_buf(),
        failures: 0,
    };
    let secs = Duration::from_secs;
    suite.criterion(1, "chart round trip", Some(secs(1)), |_| Ok(chart_round_trip()));
    suite.criterion(2, "g_beta decay", Some(secs(60)), gbeta_decay);
    suite.criterion(3, "brute-force equivalence", Some(secs(300)), oracle_equivalence);
    suite.criterion(4, "principal value", Some(secs(1)), |_| pv_machinery());
    suite.criterion(5, "spherical term decay", Some(secs(600)), spherical_decay);
    suite.criterion(6, "gain trend", Some(secs(1800)), gain_trend);
    suite.criterion(7, "trace constant", None, |_| trace_constant());
    suite.criterion(8, "sphere kernel bound", None, |_| sphere_kernel());
    suite.criterion(9, "bound calculators", None, |_| bound_calculators());
    suite.criterion(10, "directional average radial", None, |_| directional_average_radial());
    let work = suite.work.clone();
    suite.criterion(11, "determinism", None, |_| determinism(&work));
    if suite.failures > 0 {
        println!("{} acceptance criteria failed", suite.failures);
        std::process::exit(1);
    }
    println!("all 11 acceptance criteria passed");
}
