//! JSON-configured studies: each run writes CSV/JSON outputs and a manifest
//! into an output directory.
//!
//! ```json
//! { "experiment": "lemma52", "n": 3, "beta": 1.0, "theta": [-1, 0, 0],
//!   "grid": { "N": 128, "L": 16 },
//!   "ray": { "direction": [1, 0, 0], "t_min": 8, "t_max": 48, "count": 16 },
//!   "out_dir": "out/lemma52" }
//! ```
//!
//! `BORN_DISPERSION_OUT`, when set, replaces `out_dir`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    fit_decay, gain_scan, lemma52_check, scan_verdict, write_samples_csv, ConeLattice, Ray, RefinementScan, Verdict,
};
use crate::bounds::{thm_limits, write_bounds_table};
use crate::dispersion::{dispersion_batch, q_full2_hat, write_samples_csv as write_dispersion_csv, CutoffSpec, EwaldScheme, PVParams};
use crate::exec::{workers, Exec};
use crate::geometry::{chart, Direction};
use crate::oracle::{brute_b_theta2, generate_fixtures, BruteResolution};
use crate::potentials::{synthesize_gbeta, GBetaSpec, Potential};
use crate::spectral::Grid;
use crate::{point, Error, Point, Result};

/// Environment variable that overrides `out_dir`.
pub const OUT_ENV: &str = "BORN_DISPERSION_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ChartSelftest,
    Gbeta,
    DispersionRay,
    Lemma52,
    GainScan,
    QfullRadial,
    BoundsTable,
    OracleFixtures,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub samples: usize,
    #[serde(rename = "L")]
    pub half_extent: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvConfig {
    pub delta: Option<f64>,
    pub inner_nodes: Option<usize>,
    pub r_max: Option<f64>,
    pub outer_tol: Option<f64>,
    pub tail_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayConfig {
    pub direction: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    Gaussian { a: f64 },
    Gbeta,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub aperture: Option<f64>,
    pub angular_nodes: Option<usize>,
    pub radial_nodes: Option<usize>,
    pub base: Option<f64>,
    pub extents: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Experiment,
    pub n: Option<usize>,
    pub beta: Option<f64>,
    pub theta: Option<Vec<f64>>,
    #[serde(rename = "C0")]
    pub c0: Option<f64>,
    pub grid: Option<GridConfig>,
    pub bump_radius: Option<f64>,
    pub potential: Option<PotentialConfig>,
    /// Level of the Ewald-sphere rule.
    pub rule_level: Option<u32>,
    /// Level of the incidence-direction rule (`qfull-radial`).
    pub theta_level: Option<u32>,
    pub pv: Option<PvConfig>,
    pub ray: Option<RayConfig>,
    /// Explicit evaluation points (`dispersion-ray`), used instead of `ray`.
    pub etas: Option<Vec<Vec<f64>>>,
    pub compare_brute: Option<bool>,
    pub alphas: Option<Vec<f64>>,
    pub lattice: Option<LatticeConfig>,
    pub fit_window: Option<[f64; 2]>,
    pub cone_aperture: Option<f64>,
    pub radius: Option<f64>,
    pub angles_deg: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

fn missing(path: &str) -> Error {
    Error::Config {
        path: path.to_string(),
        message: "missing required field".into(),
    }
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl Config {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    fn dimension(&self) -> Result<usize> {
        match self.n {
            Some(n @ (2 | 3)) => Ok(n),
            Some(n) => Err(invalid("n", format!("must be 2 or 3, got {n}"))),
            None => Err(missing("n")),
        }
    }

    fn beta(&self) -> Result<f64> {
        self.beta.ok_or_else(|| missing("beta"))
    }

    fn theta(&self, n: usize) -> Result<Direction> {
        let v = self.theta.as_ref().ok_or_else(|| missing("theta"))?;
        if v.len() != n {
            return Err(invalid("theta", format!("expected {n} components, got {}", v.len())));
        }
        Direction::from_slice(v).map_err(|e| invalid("theta", e.to_string()))
    }

    fn grid(&self, n: usize) -> Result<Grid> {
        let g = self.grid.as_ref().ok_or_else(|| missing("grid"))?;
        Grid::new(n, g.samples, g.half_extent).map_err(|e| invalid("grid", e.to_string()))
    }

    fn cutoff(&self) -> Result<CutoffSpec> {
        match self.c0 {
            Some(c0) => CutoffSpec::new(c0).map_err(|e| invalid("C0", e.to_string())),
            None => Ok(CutoffSpec::default()),
        }
    }

    fn scheme(&self) -> EwaldScheme {
        match self.rule_level {
            Some(level) => EwaldScheme::Resonant { level },
            None => EwaldScheme::default(),
        }
    }

    fn pv(&self) -> Result<PVParams> {
        let mut p = PVParams::default();
        if let Some(c) = &self.pv {
            if let Some(v) = c.delta {
                p.delta = v;
            }
            if let Some(v) = c.inner_nodes {
                p.inner_nodes = v;
            }
            if let Some(v) = c.r_max {
                p.r_max = v;
            }
            if let Some(v) = c.outer_tol {
                p.outer_tol = v;
            }
            if let Some(v) = c.tail_ratio {
                p.tail_ratio = v;
            }
        }
        p.validate().map_err(|e| invalid("pv", e.to_string()))?;
        Ok(p)
    }

    fn ray(&self, n: usize) -> Result<Ray> {
        let r = self.ray.as_ref().ok_or_else(|| missing("ray"))?;
        if r.direction.len() != n {
            return Err(invalid("ray.direction", format!("expected {n} components")));
        }
        let d = Direction::from_slice(&r.direction).map_err(|e| invalid("ray.direction", e.to_string()))?;
        Ray::new(d, r.t_min, r.t_max, r.count).map_err(|e| invalid("ray", e.to_string()))
    }

    fn gbeta_spec(&self, n: usize) -> Result<GBetaSpec> {
        Ok(GBetaSpec::new(self.beta()?, self.bump_radius.unwrap_or(2.0), self.grid(n)?))
    }

    fn potential(&self, n: usize) -> Result<Potential> {
        match self.potential.as_ref().unwrap_or(&PotentialConfig::Gbeta) {
            PotentialConfig::Gaussian { a } => Potential::gaussian(n, *a).map_err(|e| invalid("potential.a", e.to_string())),
            PotentialConfig::Gbeta => Ok(synthesize_gbeta(&self.gbeta_spec(n)?)?.potential),
        }
    }

    fn lattice(&self) -> ConeLattice {
        let mut l = ConeLattice::default();
        if let Some(c) = &self.lattice {
            if let Some(v) = c.aperture {
                l.aperture = v;
            }
            if let Some(v) = c.angular_nodes {
                l.angular_nodes = v;
            }
            if let Some(v) = c.radial_nodes {
                l.radial_nodes = v;
            }
            if let Some(v) = c.base {
                l.base = v;
            }
            if let Some(v) = &c.extents {
                l.extents = v.clone();
            }
        }
        l
    }
}

/// Per-run metadata written next to the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub config_sha256: String,
    pub version: String,
    pub workers: usize,
    pub timings: Vec<(String, f64)>,
    pub outputs: Vec<String>,
    pub verdicts: Vec<Verdict>,
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub verdicts: Vec<Verdict>,
    /// Lines meant for the terminal.
    pub summary: Vec<String>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// `0` when every verdict passes, `2` on a failed verdict, `1` on error.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) if o.passed() => 0,
        Ok(_) => 2,
        Err(_) => 1,
    }
}

struct Run {
    dir: PathBuf,
    outputs: Vec<PathBuf>,
    verdicts: Vec<Verdict>,
    summary: Vec<String>,
    timings: Vec<(String, f64)>,
    clock: Instant,
}

impl Run {
    fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(fs::File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        self.outputs.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    fn lap(&mut self, stage: &str) {
        self.timings.push((stage.to_string(), self.clock.elapsed().as_secs_f64()));
        self.clock = Instant::now();
    }
}

/// Reads, validates and runs a config file.
pub fn run_file(path: &Path) -> Result<RunOutcome> {
    let bytes = fs::read(path)?;
    run_bytes(&bytes)
}

/// Runs a config given as raw JSON.
pub fn run_bytes(bytes: &[u8]) -> Result<RunOutcome> {
    let config = Config::from_json(bytes)?;
    let hash = format!("{:x}", Sha256::digest(bytes));
    run(&config, &hash)
}

/// Runs a parsed config; `config_hash` goes into the manifest.
pub fn run(config: &Config, config_hash: &str) -> Result<RunOutcome> {
    let dir = match std::env::var_os(OUT_ENV) {
        Some(d) => PathBuf::from(d),
        None => config.out_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
    };
    run_in(config, config_hash, &dir)
}

/// [`run`] writing into `dir`, ignoring `out_dir` and the environment.
pub fn run_in(config: &Config, config_hash: &str, dir: &Path) -> Result<RunOutcome> {
    fs::create_dir_all(dir)?;
    let mut run = Run {
        dir: dir.to_path_buf(),
        outputs: Vec::new(),
        verdicts: Vec::new(),
        summary: Vec::new(),
        timings: Vec::new(),
        clock: Instant::now(),
    };
    info!("running {:?} into {}", config.experiment, run.dir.display());
    match config.experiment {
        Experiment::ChartSelftest => chart_selftest(config, &mut run)?,
        Experiment::Gbeta => gbeta(config, &mut run)?,
        Experiment::DispersionRay => dispersion_ray(config, &mut run)?,
        Experiment::Lemma52 => lemma52(config, &mut run)?,
        Experiment::GainScan => gain(config, &mut run)?,
        Experiment::QfullRadial => qfull_radial(config, &mut run)?,
        Experiment::BoundsTable => bounds_table(config, &mut run)?,
        Experiment::OracleFixtures => oracle_fixtures(config, &mut run)?,
    }
    let manifest = Manifest {
        experiment: config.experiment,
        config_sha256: config_hash.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        workers: workers(),
        timings: run.timings.clone(),
        outputs: run
            .outputs
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
        verdicts: run.verdicts.clone(),
    };
    run.json("manifest.json", &manifest)?;
    for v in &run.verdicts {
        run.summary
            .push(format!("{}: {} (margin {:.4})", v.claim, if v.pass { "pass" } else { "FAIL" }, v.margin));
    }
    Ok(RunOutcome {
        out_dir: run.dir,
        outputs: run.outputs,
        verdicts: run.verdicts,
        summary: run.summary,
    })
}

#[derive(Serialize)]
struct ChartReport {
    n: usize,
    count: usize,
    max_residual: f64,
    max_norm_defect: f64,
    min_two_k_over_eta: f64,
}

fn chart_selftest(config: &Config, run: &mut Run) -> Result<()> {
    let dims = match config.n {
        Some(_) => vec![config.dimension()?],
        None => vec![2, 3],
    };
    let count = config.count.unwrap_or(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.unwrap_or(7));
    let mut reports = Vec::new();
    for n in dims {
        let mut report = ChartReport {
            n,
            count,
            max_residual: 0.0,
            max_norm_defect: 0.0,
            min_two_k_over_eta: f64::INFINITY,
        };
        let mut done = 0;
        while done < count {
            let (theta, eta) = random_pair(n, &mut rng);
            if !(eta.dot(theta.vector()) < -1e-3 * eta.norm()) {
                continue;
            }
            let c = chart(&eta, &theta)?;
            let back = (c.theta_prime - theta.vector()) * c.k;
            report.max_residual = report.max_residual.max((back - eta).norm() / eta.norm());
            report.max_norm_defect = report.max_norm_defect.max((c.theta_prime.norm() - 1.0).abs());
            report.min_two_k_over_eta = report.min_two_k_over_eta.min(2.0 * c.k / eta.norm());
            done += 1;
        }
        let margin = (1e-12 - report.max_residual)
            .min(1e-12 - report.max_norm_defect)
            .min(report.min_two_k_over_eta - 1.0);
        run.verdicts.push(Verdict {
            claim: format!("chart-roundtrip-n{n}"),
            pass: margin >= 0.0,
            margin,
            details: format!(
                "{count} round trips, max error {:.3e}, max | |θ′| - 1 | {:.3e}",
                report.max_residual, report.max_norm_defect
            ),
        });
        run.summary.push(format!("n = {n}: max round-trip error {:.3e}", report.max_residual));
        reports.push(report);
    }
    run.lap("chart");
    run.json("chart_selftest.json", &reports)
}

fn random_pair(n: usize, rng: &mut ChaCha8Rng) -> (Direction, Point) {
    loop {
        let mut v = [0.0; 3];
        let mut e = [0.0; 3];
        for i in 0..n {
            v[i] = rng.gen_range(-1.0..1.0);
            e[i] = rng.gen_range(-1.0..1.0);
        }
        let v = point(&v[..n]);
        let r = v.norm();
        if !(r > 0.05 && r <= 1.0) {
            continue;
        }
        let theta = Direction::new(n, v).expect("nonzero vector");
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let mut eta = point(&e[..n]) * scale;
        if eta.dot(theta.vector()) > 0.0 {
            eta = -eta;
        }
        return (theta, eta);
    }
}

#[derive(Serialize)]
struct GbetaReport {
    beta: f64,
    n: usize,
    expected_exponent: f64,
    fit: crate::analysis::DecayFit,
    min_ratio: f64,
    max_imag_ratio: f64,
    space_imag_ratio: f64,
    outside_support: f64,
    tail_exponent: f64,
}

fn gbeta(config: &Config, run: &mut Run) -> Result<()> {
    let n = config.dimension()?;
    let spec = config.gbeta_spec(n)?;
    let synth = synthesize_gbeta(&spec)?;
    run.lap("synthesis");
    let profile = synth
        .potential
        .frequency_profile()
        .expect("g_β carries a frequency profile");
    let window = config.fit_window.unwrap_or([8.0, 25.0]);
    let samples: Vec<(f64, f64)> = profile
        .radii()
        .iter()
        .copied()
        .zip(profile.values().iter().copied())
        .collect();
    let fit = fit_decay(&samples, (window[0], window[1]))?;
    let expected = -(n as f64 / 2.0 + spec.beta);
    run.verdicts.push(Verdict {
        claim: "gbeta-decay".into(),
        pass: (fit.exponent - expected).abs() <= 0.1,
        margin: 0.1 - (fit.exponent - expected).abs(),
        details: format!(
            "exponent {:.4} vs {expected} over [{:.3}, {:.3}] ({} shells)",
            fit.exponent, fit.window.0, fit.window.1, fit.sample_count
        ),
    });
    run.verdicts.push(Verdict {
        claim: "gbeta-nonnegative".into(),
        pass: synth.min_ratio >= -1e-8,
        margin: synth.min_ratio + 1e-8,
        details: format!("min ĝ_β/ĝ_β(0) = {:.3e}", synth.min_ratio),
    });
    let report = GbetaReport {
        beta: spec.beta,
        n,
        expected_exponent: expected,
        fit,
        min_ratio: synth.min_ratio,
        max_imag_ratio: synth.max_imag_ratio,
        space_imag_ratio: synth.space_imag_ratio,
        outside_support: synth.outside_support,
        tail_exponent: profile.tail_exponent(),
    };
    run.summary.push(format!("fitted exponent {:.4} (expected {expected})", fit.exponent));
    run.write("gbeta_profile.csv", |w| profile.write_csv(w))?;
    run.json("gbeta_descriptor.json", &synth.potential.descriptor())?;
    run.json("gbeta_report.json", &report)
}

#[derive(Serialize)]
struct OracleComparison {
    eta: Vec<f64>,
    b_re: f64,
    b_im: f64,
    brute_re: f64,
    brute_im: f64,
    relative_error: f64,
}

fn dispersion_ray(config: &Config, run: &mut Run) -> Result<()> {
    let n = config.dimension()?;
    let theta = config.theta(n)?;
    let q = config.potential(n)?;
    let etas: Vec<Point> = match &config.etas {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, e)| {
                if e.len() == n {
                    Ok(point(e))
                } else {
                    Err(invalid(&format!("etas[{i}]"), format!("expected {n} components")))
                }
            })
            .collect::<Result<_>>()?,
        None => config.ray(n)?.points(),
    };
    let scheme = config.scheme();
    let pv = config.pv()?;
    let cut = config.cutoff()?;
    run.lap("setup");
    let samples = dispersion_batch(&q, &theta, &etas, &scheme, &pv, &cut, Exec::Parallel)?;
    run.lap("dispersion");
    run.write("dispersion.csv", |w| write_dispersion_csv(&samples, n, w))?;
    if config.compare_brute.unwrap_or(false) {
        let res = BruteResolution::default();
        let rows = Exec::Parallel.try_map(&samples, |s| {
            let brute = brute_b_theta2(&q, &theta, &s.eta, res)?;
            Ok::<_, Error>(OracleComparison {
                eta: (0..n).map(|i| s.eta[i]).collect(),
                b_re: s.b.re,
                b_im: s.b.im,
                brute_re: brute.re,
                brute_im: brute.im,
                relative_error: (s.b - brute).norm() / brute.norm(),
            })
        })?;
        run.lap("oracle");
        let worst = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
        run.verdicts.push(Verdict {
            claim: "oracle-agreement".into(),
            pass: worst <= 0.05,
            margin: 0.05 - worst,
            details: format!("max relative error {worst:.3e} over {} points", rows.len()),
        });
        run.json("oracle_comparison.json", &rows)?;
    }
    Ok(())
}

fn lemma52(config: &Config, run: &mut Run) -> Result<()> {
    let n = config.dimension()?;
    let beta = config.beta()?;
    let theta = config.theta(n)?;
    let ray = config.ray(n)?;
    let q = config.potential(n)?;
    run.lap("synthesis");
    let probe = lemma52_check(
        &q,
        beta,
        &theta,
        config.cone_aperture.unwrap_or(0.5),
        &ray,
        &config.scheme(),
        Exec::Parallel,
    )?;
    run.lap("ray");
    run.summary.push(probe.verdict.details.clone());
    run.write("lemma52_samples.csv", |w| write_samples_csv(&probe.samples, w))?;
    run.json("lemma52_verdict.json", &probe.verdict)?;
    run.verdicts.push(probe.verdict);
    Ok(())
}

#[derive(Serialize)]
struct GainReport {
    alpha0: f64,
    scans: Vec<RefinementScan>,
    verdicts: Vec<Verdict>,
}

fn gain(config: &Config, run: &mut Run) -> Result<()> {
    let n = config.dimension()?;
    let beta = config.beta()?;
    let theta = config.theta(n)?;
    let alphas = config.alphas.clone().ok_or_else(|| missing("alphas"))?;
    let q = config.potential(n)?;
    run.lap("synthesis");
    let scans = gain_scan(
        &q,
        &theta,
        &alphas,
        &config.lattice(),
        &config.scheme(),
        &config.pv()?,
        &config.cutoff()?,
        Exec::Parallel,
    )?;
    run.lap("scan");
    let verdicts: Vec<Verdict> = scans.iter().map(|s| scan_verdict(s, n, beta)).collect();
    run.write("gain_scan.csv", |w| {
        writeln!(w, "alpha,extent,norm,growth_ratio")?;
        for s in &scans {
            for (i, l) in s.levels.iter().enumerate() {
                let ratio = if i == 0 {
                    String::new()
                } else {
                    format!("{:e}", s.growth_ratios[i - 1])
                };
                writeln!(w, "{:e},{:e},{:e},{ratio}", s.alpha, l.extent, l.norm)?;
            }
        }
        Ok(())
    })?;
    for v in &verdicts {
        run.summary.push(v.details.clone());
    }
    let report = GainReport {
        alpha0: crate::bounds::alpha0(n, beta),
        scans,
        verdicts: verdicts.clone(),
    };
    run.json("gain_scan.json", &report)?;
    run.verdicts.extend(verdicts);
    Ok(())
}

fn qfull_radial(config: &Config, run: &mut Run) -> Result<()> {
    let n = config.dimension()?;
    let q = config.potential(n)?;
    let radius = config.radius.unwrap_or(4.0);
    let angles = config.angles_deg.clone().unwrap_or_else(|| vec![0.0, 73.0]);
    if angles.len() < 2 {
        return Err(invalid("angles_deg", "need at least two angles"));
    }
    let level = config.theta_level.unwrap_or(5);
    let scheme = config.scheme();
    let pv = config.pv()?;
    let cut = config.cutoff()?;
    let values = Exec::Parallel.try_map(&angles, |deg| {
        let a = deg.to_radians();
        let eta = Point::new(a.cos(), a.sin(), 0.0) * radius;
        q_full2_hat(&q, &eta, level, &scheme, &pv, &cut)
    })?;
    run.lap("qfull");
    let reference = values[0];
    let worst = values
        .iter()
        .map(|v| (v - reference).norm() / reference.norm())
        .fold(0.0, f64::max);
    run.verdicts.push(Verdict {
        claim: "qfull-radial".into(),
        pass: worst <= 1e-4,
        margin: 1e-4 - worst,
        details: format!("max relative spread {worst:.3e} at |η| = {radius}, level {level}"),
    });
    run.write("qfull_radial.csv", |w| {
        writeln!(w, "angle_deg,Q_re,Q_im")?;
        for (a, v) in angles.iter().zip(&values) {
            writeln!(w, "{a:e},{:e},{:e}", v.re, v.im)?;
        }
        Ok(())
    })
}

fn bounds_table(config: &Config, run: &mut Run) -> Result<()> {
    let n = config.n.ok_or_else(|| missing("n"))?;
    if n < 2 {
        return Err(invalid("n", "must be at least 2"));
    }
    let betas = config
        .betas
        .clone()
        .unwrap_or_else(|| (0..=80).map(|i| i as f64 * 0.05).collect());
    run.write("bounds_table.csv", |w| write_bounds_table(n, &betas, w))?;
    if let Some(beta) = config.beta {
        let report = thm_limits(n, beta);
        run.summary.push(format!("alpha0 = {}", report.alpha0));
        run.json("bounds_report.json", &report)?;
    }
    Ok(())
}

fn oracle_fixtures(config: &Config, run: &mut Run) -> Result<()> {
    let _ = config;
    let fixtures = generate_fixtures(BruteResolution::default())?;
    run.lap("oracle");
    run.json("oracle_fixtures.json", &fixtures)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_errors_name_the_field() {
        let err = Config::from_json(br#"{"experiment": "lemma52", "n": "three"}"#).unwrap_err();
        assert!(matches!(&err, Error::Config { path, .. } if path == "n"), "{err}");
        let err = Config::from_json(br#"{"experiment": "nope"}"#).unwrap_err();
        assert!(matches!(&err, Error::Config { path, .. } if path == "experiment"));
        let err = Config::from_json(br#"{"experiment": "gbeta", "grid": {"N": 64, "L": 8, "M": 1}}"#).unwrap_err();
        assert!(err.to_string().contains("grid"), "{err}");
        let c = Config::from_json(br#"{"experiment": "gbeta", "n": 3}"#).unwrap();
        assert!(matches!(c.beta(), Err(Error::Config { path, .. }) if path == "beta"));
    }

    #[test]
    fn potential_kinds_parse() {
        let c = Config::from_json(br#"{"experiment": "dispersion-ray", "potential": {"kind": "gaussian", "a": 0.5}}"#).unwrap();
        assert_eq!(c.potential, Some(PotentialConfig::Gaussian { a: 0.5 }));
    }

    #[test]
    fn exit_codes() {
        let ok = RunOutcome {
            out_dir: PathBuf::new(),
            outputs: vec![],
            verdicts: vec![],
            summary: vec![],
        };
        assert_eq!(exit_code(&Ok(ok.clone())), 0);
        let mut bad = ok;
        bad.verdicts.push(Verdict {
            claim: "x".into(),
            pass: false,
            margin: -1.0,
            details: String::new(),
        });
        assert_eq!(exit_code(&Ok(bad)), 2);
        assert_eq!(exit_code(&Err(missing("beta"))), 1);
    }
}
