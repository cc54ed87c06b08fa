use asymkde::estimators::{
    evaluate_shifted, integrate_shifted, ShiftedEstimatorDescriptor, ShiftedVariant,
};
use asymkde::kernels::{effective_bandwidth, shift_term, SymmetricKernel};
use asymkde::oracle::{integrate_positive_with_breaks, QuadratureOptions};
use asymkde::special::normal_pdf;
use asymkde::{DensityEstimate, KernelFamily, KernelSpec, LogNormalRef, Role, SampleSet};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = KernelFamily> {
    prop::sample::select(KernelFamily::ASYMMETRIC.to_vec())
}

/// Log-uniform samples on `[0.7, 30]`, above σ² for every σ used here.
fn samples(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0.7f64.ln()..30f64.ln()).prop_map(f64::exp), 2..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn proper_estimates_integrate_to_one(fam in family(), xs in samples(30), sigma in 0.05f64..0.8) {
        let spec = KernelSpec::new(fam, Role::Proper, sigma).unwrap();
        let est = DensityEstimate::new(spec, SampleSet::new(xs).unwrap()).unwrap();
        let r = est.integral(&QuadratureOptions::default()).unwrap();
        prop_assert!((r.value - 1.0).abs() < 1e-6, "{fam} sigma={sigma}: {}", r.value);
    }

    #[test]
    fn sample_smoothing_integrates_to_one(xs in samples(30), sigma in 0.05f64..0.8) {
        let s2 = sigma * sigma;
        let desc = ShiftedEstimatorDescriptor::new(
            ShiftedVariant::SampleSmoothing,
            SymmetricKernel::Gaussian,
            move |y: f64| sigma * (y.abs() + s2).sqrt(),
            move |y: f64| 1.0 / (y.abs() + s2),
        )
        .unwrap();
        let r = integrate_shifted(&desc, &xs, &QuadratureOptions::default()).unwrap();
        prop_assert!((r.value - 1.0).abs() < 1e-6, "sigma={sigma}: {}", r.value);
    }

    #[test]
    fn estimates_are_non_negative(
        fam in family(),
        proper in any::<bool>(),
        xs in samples(20),
        sigma in 0.05f64..0.8,
        x in prop_oneof![Just(0.0), 0.0f64..1e-3, 1e-3f64..100.0],
    ) {
        let role = if proper { Role::Proper } else { Role::Improper };
        let spec = KernelSpec::new(fam, role, sigma).unwrap();
        let est = DensityEstimate::new(spec, SampleSet::new(xs).unwrap()).unwrap();
        if let Ok(v) = est.evaluate(x) {
            prop_assert!(v >= 0.0 && v.is_finite(), "{fam} {role} x={x}: {v}");
        }
    }

    #[test]
    fn merge_is_the_mixture(
        fam in family(),
        proper in any::<bool>(),
        a in samples(15),
        b in samples(15),
        sigma in 0.1f64..0.6,
        x in 0.7f64..20.0,
    ) {
        let role = if proper { Role::Proper } else { Role::Improper };
        let spec = KernelSpec::new(fam, role, sigma).unwrap();
        let sa = SampleSet::new(a).unwrap();
        let sb = SampleSet::new(b).unwrap();
        let (na, nb) = (sa.len() as f64, sb.len() as f64);
        let merged = DensityEstimate::new(spec, sa.merge(&sb)).unwrap().evaluate(x).unwrap();
        let fa = DensityEstimate::new(spec, sa).unwrap().evaluate(x).unwrap();
        let fb = DensityEstimate::new(spec, sb).unwrap().evaluate(x).unwrap();
        let mix = (na * fa + nb * fb) / (na + nb);
        prop_assert!((merged - mix).abs() <= 1e-14 * mix.abs() + 1e-300, "{merged} vs {mix}");
    }
}

#[test]
fn rig_proper_rejects_small_samples() {
    let spec = KernelSpec::new(KernelFamily::ReciprocalInverseGaussian, Role::Proper, 0.8).unwrap();
    let s = SampleSet::new(vec![0.5, 2.0]).unwrap();
    assert!(matches!(
        DensityEstimate::new(spec, s),
        Err(asymkde::Error::Domain(_))
    ));
}

/// `E f̂(x)` for the improper gamma estimator and for its Gaussian
/// approximation with matching mean and variance, under `LN(1, 1)`.
fn expected_estimates(sigma: f64, x: f64) -> (f64, f64) {
    let f = LogNormalRef::new(1.0, 1.0).unwrap();
    let spec = KernelSpec::new(KernelFamily::Gamma, Role::Improper, sigma).unwrap();
    let k = spec.freeze(x).unwrap();
    let h = effective_bandwidth(&spec, x).unwrap();
    let centre = x + shift_term(&spec, x).unwrap();
    let opts = QuadratureOptions::with_tolerances(1e-14, 1e-12);
    let breaks = [centre, centre - 3.0 * h, centre + 3.0 * h];
    let exact = integrate_positive_with_breaks(|y| k.pdf(y) * f.pdf(y), &breaks, &opts)
        .unwrap()
        .value;
    let approx = integrate_positive_with_breaks(
        |y| normal_pdf((y - centre) / h) / h * f.pdf(y),
        &breaks,
        &opts,
    )
    .unwrap()
    .value;
    (exact, approx)
}

#[test]
fn gaussian_approximation_improves_with_sigma() {
    let xs: Vec<f64> = (0..8).map(|i| 0.5 * 8f64.powf(i as f64 / 7.0)).collect();
    let ratios: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&s| {
            xs.iter()
                .map(|&x| {
                    let (e, a) = expected_estimates(s, x);
                    (e - a).abs()
                })
                .fold(0.0, f64::max)
                / s
        })
        .collect();
    assert!(ratios[1] < ratios[0] && ratios[2] < ratios[1], "{ratios:?}");
}

#[test]
fn balloon_without_shift_is_the_standard_kde() {
    let xs = [0.4, 1.1, 2.5, 3.0];
    let desc = ShiftedEstimatorDescriptor::new(
        ShiftedVariant::Balloon,
        SymmetricKernel::Gaussian,
        |_| 0.3,
        |_| 0.0,
    )
    .unwrap();
    for x in [0.0, 1.0, 2.7] {
        let a = evaluate_shifted(&desc, &xs, x).unwrap();
        let b = asymkde::estimators::evaluate_standard_kde(&xs, &SymmetricKernel::Gaussian, 0.3, x)
            .unwrap();
        assert!((a - b).abs() < 1e-15);
    }
}
