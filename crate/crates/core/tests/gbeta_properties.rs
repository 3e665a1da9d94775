use born_dispersion::analysis::{cone_rays, lemma52_check, q_theta_decay, Ray};
use born_dispersion::bounds::alpha0;
use born_dispersion::dispersion::{CutoffSpec, EwaldScheme, PVParams};
use born_dispersion::exec::Exec;
use born_dispersion::geometry::Direction;
use born_dispersion::potentials::{estimate_lower_bound, synthesize_gbeta, GBetaSpec};
use born_dispersion::spectral::{make_grid, sobolev_norm, SobolevIndex};
use born_dispersion::Point;

#[test]
fn lower_bound_conditions_hold() {
    for n in [2, 3] {
        let grid = make_grid(n, if n == 2 { 128 } else { 64 }, 16.0).unwrap();
        let synth = synthesize_gbeta(&GBetaSpec::new(1.0, 2.0, grid)).unwrap();
        let q = &synth.potential;
        let flags = q.flags();
        assert!(flags.is_real && flags.is_radial && flags.fourier_nonneg);
        assert!(q.eval_fourier(&Point::zeros()).re > 0.0);
        assert!(synth.min_ratio >= -1e-8, "n = {n}: {}", synth.min_ratio);
        assert!(synth.space_imag_ratio < 1e-9);
        assert!(synth.outside_support < 1e-12);
        let est = estimate_lower_bound(q, 1.0, 2.0).unwrap();
        assert!(est.constant > 0.0 && est.threshold > 0.0);
    }
}

#[test]
fn sobolev_norms_under_grid_refinement() {
    let norms = |gamma: f64| -> Vec<f64> {
        [64, 128, 256]
            .iter()
            .map(|&samples| {
                let grid = make_grid(2, samples, 8.0).unwrap();
                let synth = synthesize_gbeta(&GBetaSpec::new(1.0, 2.0, grid)).unwrap();
                sobolev_norm(&synth.frequency, SobolevIndex::new(gamma, 0.0)).unwrap()
            })
            .collect()
    };
    let below = norms(0.5);
    for w in below.windows(2) {
        let r = w[1] / w[0];
        assert!((0.9..=1.1).contains(&r), "γ < β: ratio {r}");
    }
    let above = norms(1.5);
    for w in above.windows(2) {
        assert!(w[1] / w[0] > 1.1, "γ > β: {above:?}");
    }
}

#[test]
fn q_theta_decay_matches_the_gain_ceiling() {
    let grid = make_grid(3, 128, 16.0).unwrap();
    let q = synthesize_gbeta(&GBetaSpec::new(1.0, 2.0, grid)).unwrap().potential;
    let theta = Direction::axis(3, 0, -1.0);
    let ray = Ray::new(theta.negate(), 8.0, 48.0, 16).unwrap();
    let (_, fit) = q_theta_decay(
        &q,
        &theta,
        &ray,
        &EwaldScheme::default(),
        &PVParams::default(),
        &CutoffSpec::default(),
        Exec::Parallel,
    )
    .unwrap();
    let gamma = -fit.exponent - 1.5;
    assert!((gamma - alpha0(3, 1.0)).abs() <= 0.2, "γ = {gamma}");
}

#[test]
fn spherical_decay_on_several_rays() {
    let grid = make_grid(2, 128, 16.0).unwrap();
    let q = synthesize_gbeta(&GBetaSpec::new(1.0, 2.0, grid)).unwrap().potential;
    let theta = Direction::axis(2, 0, -1.0);
    for d in cone_rays(&theta, 0.5, 4).unwrap() {
        let ray = Ray::new(d, 8.0, 48.0, 16).unwrap();
        let probe = lemma52_check(&q, 1.0, &theta, 0.5, &ray, &EwaldScheme::default(), Exec::Parallel).unwrap();
        assert!(probe.verdict.pass, "{}", probe.verdict.details);
    }
}
