use asymkde::kernels::{effective_bandwidth, shift_term, weight};
use asymkde::oracle::{integrate_positive_with_breaks, QuadratureOptions};
use asymkde::{KernelFamily, KernelSpec, Role};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = KernelFamily> {
    prop::sample::select(KernelFamily::ASYMMETRIC.to_vec())
}

fn moments(spec: &KernelSpec, x: f64, powers: &[i32], centre: f64, scale: f64) -> Vec<f64> {
    let k = spec.freeze(x).unwrap();
    let opts = QuadratureOptions::with_tolerances(1e-14, 1e-12);
    let breaks = [
        k.mean(),
        (k.mean() - 4.0 * scale).max(0.0),
        k.mean() + 4.0 * scale,
    ];
    powers
        .iter()
        .map(|&p| {
            integrate_positive_with_breaks(
                |t| k.pdf(t) * ((t - centre) / scale).powi(p),
                &breaks,
                &opts,
            )
            .unwrap()
            .value
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_pdf_normalizes(fam in family(), anchor in 0.05f64..20.0, sigma in 0.05f64..1.0) {
        prop_assume!(fam != KernelFamily::ReciprocalInverseGaussian || anchor > sigma * sigma * 1.01);
        let spec = KernelSpec::new(fam, Role::Improper, sigma).unwrap();
        let h = effective_bandwidth(&spec, anchor).unwrap();
        let m = moments(&spec, anchor, &[0], 0.0, h);
        prop_assert!((m[0] - 1.0).abs() < 1e-8, "{fam} a={anchor} s={sigma}: {}", m[0]);
    }

    #[test]
    fn weight_is_continuous(fam in family(), y in 0.1f64..10.0, x in 0.5f64..10.0, sigma in 0.1f64..0.6) {
        for role in [Role::Improper, Role::Proper] {
            let spec = KernelSpec::new(fam, role, sigma).unwrap();
            let (Ok(w), Ok(wy), Ok(wx)) = (
                weight(&spec, y, x),
                weight(&spec, y * (1.0 + 1e-9), x),
                weight(&spec, y, x * (1.0 + 1e-9)),
            ) else {
                continue;
            };
            let scale = w.max(1e-300);
            prop_assert!((wy - w).abs() <= 1e-5 * scale + 1e-300);
            prop_assert!((wx - w).abs() <= 1e-5 * scale + 1e-300);
        }
    }
}

#[test]
fn moments_match_bandwidth_and_shift() {
    for fam in KernelFamily::ASYMMETRIC {
        for sigma in [0.05, 0.2] {
            let spec = KernelSpec::new(fam, Role::Improper, sigma).unwrap();
            for x in [0.5, 1.0, 4.0] {
                let h = effective_bandwidth(&spec, x).unwrap();
                let mean = x + shift_term(&spec, x).unwrap();
                let m = moments(&spec, x, &[0, 1, 2], 0.0, 1.0);
                let var = moments(&spec, x, &[2], mean, 1.0)[0];
                assert!(
                    (m[1] - mean).abs() <= 1e-7 * mean,
                    "{fam} x={x} s={sigma}: mean {} vs {mean}",
                    m[1]
                );
                assert!(
                    (var - h * h).abs() <= 1e-7 * h * h,
                    "{fam} x={x} s={sigma}: var {var} vs {}",
                    h * h
                );
            }
        }
    }
}

#[test]
fn rig_mean_is_the_evaluation_point() {
    let spec =
        KernelSpec::new(KernelFamily::ReciprocalInverseGaussian, Role::Improper, 0.2).unwrap();
    for x in [0.5, 1.0, 4.0] {
        assert!((spec.freeze(x).unwrap().mean() - x).abs() < 1e-14 * x);
        assert_eq!(shift_term(&spec, x).unwrap(), 0.0);
    }
}

#[test]
fn small_sigma_limit_is_normal() {
    let sigma = 0.05;
    for fam in KernelFamily::ASYMMETRIC {
        let spec = KernelSpec::new(fam, Role::Improper, sigma).unwrap();
        for x in [0.5, 1.0, 4.0] {
            let h = effective_bandwidth(&spec, x).unwrap();
            let centre = x + shift_term(&spec, x).unwrap();
            let m = moments(&spec, x, &[1, 2, 3, 4], centre, h);
            assert!(m[0].abs() < 1e-7, "{fam} x={x}: m1 {}", m[0]);
            assert!((m[1] - 1.0).abs() < 1e-7, "{fam} x={x}: m2 {}", m[1]);
            assert!(
                m[2].abs() < 10.0 * sigma * x.sqrt().max(1.0),
                "{fam} x={x}: m3 {}",
                m[2]
            );
            assert!(
                (m[3] - 3.0).abs() < 10.0 * sigma * x.max(1.0),
                "{fam} x={x}: m4 {}",
                m[3]
            );
        }
    }
}

#[test]
fn rig_rejects_small_anchor() {
    let spec =
        KernelSpec::new(KernelFamily::ReciprocalInverseGaussian, Role::Improper, 0.5).unwrap();
    assert!(spec.freeze(0.25).is_err());
    assert!(spec.freeze(0.2).is_err());
    assert!(spec.freeze(0.26).is_ok());
}
