use asymkde::bandwidth::{
    cv_profile, gamma_overlap, loo_cv_score, plugin_bandwidth, plugin_from_samples,
    proper_gamma_square_integral,
};
use asymkde::kernels::pdf_gamma;
use asymkde::oracle::{integrate_positive_with_breaks, QuadratureOptions};
use asymkde::{DensityEstimate, Error, KernelFamily, KernelSpec, LogNormalRef, Role, SampleSet};
use proptest::prelude::*;

const PLUGIN_REFERENCE: &str = include_str!("data/plugin_reference.csv");

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn overlap_matches_quadrature(xi in 0.0f64..10.0, xj in 0.0f64..10.0, sigma in 0.1f64..1.0) {
        let s2 = sigma * sigma;
        let (ki, kj) = (1.0 + xi / s2, 1.0 + xj / s2);
        let breaks = [xi + s2, xj + s2];
        let opts = QuadratureOptions::with_tolerances(1e-300, 1e-12);
        let q = integrate_positive_with_breaks(
            |t| pdf_gamma(t, ki, s2).unwrap() * pdf_gamma(t, kj, s2).unwrap(),
            &breaks,
            &opts,
        )
        .unwrap()
        .value;
        let c = gamma_overlap(xi, xj, sigma).unwrap();
        prop_assert!((q - c).abs() <= 1e-8 * c, "({xi}, {xj}, {sigma}): {q} vs {c}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn square_integral_matches_quadrature(seed in any::<u64>(), sigma in 0.1f64..0.8) {
        let samples = LogNormalRef::new(1.0, 1.0).unwrap().sample(20, seed).unwrap();
        let closed = proper_gamma_square_integral(&samples, sigma).unwrap();
        let spec = KernelSpec::new(KernelFamily::Gamma, Role::Proper, sigma).unwrap();
        let est = DensityEstimate::new(spec, samples).unwrap();
        let q = est.integral_of_square(&QuadratureOptions::with_tolerances(1e-300, 1e-10)).unwrap().value;
        prop_assert!((q - closed).abs() <= 1e-7 * closed, "{q} vs {closed}");
    }
}

#[test]
fn pinned_overlaps() {
    assert!((gamma_overlap(0.0, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
    assert!((gamma_overlap(0.0, 0.0, 0.5).unwrap() - 2.0).abs() < 1e-13);
}

#[test]
fn plugin_matches_high_precision_table() {
    let mut rows = 0;
    for line in PLUGIN_REFERENCE.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let fam = KernelFamily::parse(f[0]).unwrap();
        let role = Role::parse(f[1]).unwrap();
        let (mu, big): (f64, f64) = (f[2].parse().unwrap(), f[3].parse().unwrap());
        let n: usize = f[4].parse().unwrap();
        let want: f64 = f[5].parse().unwrap();
        let got = plugin_bandwidth(fam, role, mu, big, n).unwrap();
        assert!((got - want).abs() <= 1e-10 * want, "{line}: {got}");
        rows += 1;
    }
    assert_eq!(rows, 243);
}

#[test]
fn plugin_reference_points() {
    let g = plugin_bandwidth(KernelFamily::Gamma, Role::Improper, 1.0, 1.0, 300).unwrap();
    assert!((g - 0.285_374_432_192_219).abs() < 1e-12);
    let p = plugin_bandwidth(KernelFamily::Gamma, Role::Proper, 1.0, 1.0, 300).unwrap();
    assert!((p - 0.340_315_748_829_32).abs() < 1e-12);
}

#[test]
fn degenerate_sample_is_rejected_by_plugin() {
    let e = std::f64::consts::E;
    let s = SampleSet::new(vec![e, e]).unwrap();
    assert_eq!(s.log_std(), 0.0);
    assert!(plugin_from_samples(KernelFamily::Gamma, Role::Proper, &s).is_err());
}

#[test]
fn cross_validation_needs_two_samples() {
    let spec = KernelSpec::new(KernelFamily::Gamma, Role::Proper, 0.3).unwrap();
    let one = SampleSet::new(vec![1.5]).unwrap();
    assert!(matches!(
        loo_cv_score(&spec, &one, 0.3),
        Err(Error::InsufficientSamples { needed: 2, got: 1 })
    ));
}

#[test]
fn closed_form_and_quadrature_scores_agree() {
    // The proper gamma score uses overlaps; the improper one quadrature. With
    // the same samples both scores are finite and the profile has an argmin.
    let samples = LogNormalRef::new(1.0, 1.0).unwrap().sample(60, 3).unwrap();
    let grid: Vec<f64> = (1..=12).map(|i| 0.05 * i as f64).collect();
    for role in [Role::Proper, Role::Improper] {
        let spec = KernelSpec::new(KernelFamily::Gamma, role, 0.3).unwrap();
        let p = cv_profile(&spec, &samples, &grid).unwrap();
        assert!(p.cv_scores.iter().all(|v| v.is_finite()));
        assert!(grid.contains(&p.cv_argmin));
        assert!(p.plugin_sigma.is_some());
    }
    let spec = KernelSpec::new(KernelFamily::Gamma, Role::Proper, 0.3).unwrap();
    let closed = loo_cv_score(&spec, &samples, 0.3).unwrap();
    let est = DensityEstimate::new(spec, samples.clone()).unwrap();
    let square = est
        .integral_of_square(&QuadratureOptions::default())
        .unwrap()
        .value;
    let square_closed = proper_gamma_square_integral(&samples, 0.3).unwrap();
    assert!((square - square_closed).abs() < 1e-7 * square_closed);
    assert!(closed < square_closed);
}
