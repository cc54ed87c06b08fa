use asymkde::bandwidth::gamma_overlap;
use asymkde::kernels::pdf_gamma;
use asymkde::oracle::{
    fit_rate, integrate_positive, integrate_positive_with_breaks, mc_estimator_summary, McOptions,
    QuadratureOptions,
};
use asymkde::reference::{open_unit, substream};
use asymkde::{KernelFamily, KernelSpec, LogNormalRef, Role};
use rand_core::RngCore;

#[test]
fn exponential_integral() {
    let r = integrate_positive(
        |x| (-x).exp(),
        &QuadratureOptions::with_tolerances(1e-14, 1e-13),
    )
    .unwrap();
    assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
}

#[test]
fn lognormal_normalization() {
    let f = LogNormalRef::new(1.0, 1.0).unwrap();
    let r = integrate_positive(|x| f.pdf(x), &QuadratureOptions::default()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-8, "{r:?}");
    assert!(r.error_estimate <= 1e-8);
}

#[test]
fn squared_gamma_density_is_the_overlap() {
    let s: f64 = 0.5;
    let s2 = s * s;
    let r = integrate_positive_with_breaks(
        |x| pdf_gamma(x, 1.0 + 1.0 / s2, s2).unwrap().powi(2),
        &[1.0 + s2],
        &QuadratureOptions::default(),
    )
    .unwrap();
    let c = gamma_overlap(1.0, 1.0, s).unwrap();
    assert!((r.value - c).abs() < 1e-8 * c);
}

#[test]
fn rate_of_noisy_power_law() {
    let xs: Vec<f64> = (0..8).map(|i| 100.0 * 2f64.powi(i)).collect();
    let mut rng = substream(11, 0, 0);
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| 2.5 * x.powf(-0.8) * (1.0 + 0.02 * (open_unit(rng.next_u64()) - 0.5)))
        .collect();
    let slope = fit_rate(&xs, &ys).unwrap();
    assert!((slope + 0.8).abs() < 0.05, "{slope}");
    assert!(fit_rate(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
}

#[test]
fn standard_errors_shrink_by_root_two() {
    let spec = KernelSpec::new(KernelFamily::Gamma, Role::Improper, 0.3).unwrap();
    let g = LogNormalRef::new(1.0, 1.0).unwrap();
    let pts = [0.5, 1.0, 2.0, 4.0];
    let a = mc_estimator_summary(&spec, &g, 200, &pts, &McOptions::new(1000, 8)).unwrap();
    let b = mc_estimator_summary(&spec, &g, 200, &pts, &McOptions::new(2000, 8)).unwrap();
    for (i, x) in pts.iter().enumerate() {
        assert!(a.point_bias[i].std_error > 0.0 && a.point_variance[i].std_error > 0.0);
        let ratio = b.point_bias[i].std_error / a.point_bias[i].std_error;
        assert!((ratio - 0.5f64.sqrt()).abs() < 0.07, "x={x}: {ratio}");
    }
}

#[cfg(feature = "parallel")]
#[test]
fn summaries_do_not_depend_on_worker_count() {
    let spec = KernelSpec::new(KernelFamily::Gamma, Role::Proper, 0.3).unwrap();
    let g = LogNormalRef::new(0.0, 1.0).unwrap();
    let opts = McOptions::new(16, 21).with_mise();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_estimator_summary(&spec, &g, 5000, &[0.5, 1.0, 3.0], &opts).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}
