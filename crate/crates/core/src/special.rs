//! Special functions: log-gamma and the standard normal density and quantile.

// Coefficients are kept as published.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

/// ln(2π) / 2
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// 1 / sqrt(2π)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

const LANCZOS_R: f64 = 10.900511;
const LANCZOS_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];
/// ln(2 sqrt(e / π))
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;

// Bernoulli-number coefficients B_{2k} / (2k (2k - 1)) of the Stirling series.
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

/// Natural logarithm of the gamma function for `x > 0`.
///
/// Uses the Lanczos approximation below 10 and the Stirling series above,
/// where the series truncation error is below 1e-17 relative. Returns NaN for
/// non-positive or NaN input.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    if x >= 10.0 {
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        let mut series = 0.0;
        let mut pow = inv;
        for c in STIRLING {
            series += c * pow;
            pow *= inv2;
        }
        return (x - 0.5) * x.ln() - x + HALF_LN_2PI + series;
    }
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum in its accurate range.
        return ln_gamma(x + 1.0) - x.ln();
    }
    let s = LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |s, (i, &d)| s + d / (x + i as f64 - 1.0));
    LN_2_SQRT_E_OVER_PI + s.ln() + (x - 0.5) * ((x - 0.5 + LANCZOS_R) / std::f64::consts::E).ln()
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Normal density with mean `mean` and standard deviation `sd`.
#[inline]
pub fn normal_pdf_scaled(t: f64, mean: f64, sd: f64) -> f64 {
    normal_pdf((t - mean) / sd) / sd
}

fn horner(coeffs: &[f64; 8], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
}

// Wichura, Algorithm AS 241 (PPND16): rational approximations accurate to
// about 1e-16, monotone in p.
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

/// Standard normal quantile Φ⁻¹(p) for `p` in (0, 1).
///
/// Returns ∓∞ at p = 0 / 1 and NaN outside [0, 1].
pub fn normal_quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        horner(&C, r) / horner(&D, r)
    } else {
        r -= 5.0;
        horner(&E, r) / horner(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Complementary error function (W. J. Cody's rational Chebyshev fits),
/// accurate to roughly 1e-15 relative.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let r = if ax < 0.5 {
        return 1.0 - erf_small(x);
    } else if ax < 4.0 {
        erfc_mid(ax)
    } else {
        erfc_large(ax)
    };
    if x < 0.0 {
        2.0 - r
    } else {
        r
    }
}

fn erf_small(x: f64) -> f64 {
    const P: [f64; 5] = [
        3.161_123_743_870_565_6,
        1.138_641_541_510_501_6e2,
        3.774_852_376_853_020_2e2,
        3.209_377_589_138_469_5e3,
        1.857_777_061_846_031_5e-1,
    ];
    const Q: [f64; 4] = [
        2.360_129_095_234_412_1e1,
        2.440_246_379_344_441_7e2,
        1.282_616_526_077_372_3e3,
        2.844_236_833_439_170_6e3,
    ];
    let z = x * x;
    let mut num = P[4] * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + P[i]) * z;
        den = (den + Q[i]) * z;
    }
    x * (num + P[3]) / (den + Q[3])
}

fn erfc_mid(ax: f64) -> f64 {
    const P: [f64; 9] = [
        5.641_884_969_886_700_9e-1,
        8.883_149_794_388_376,
        6.611_919_063_714_163e1,
        2.986_351_381_974_001_3e2,
        8.819_522_212_417_691e2,
        1.712_047_612_634_070_7e3,
        2.051_078_377_826_071_6e3,
        1.230_339_354_797_997_2e3,
        2.153_115_354_744_038_5e-8,
    ];
    const Q: [f64; 8] = [
        1.574_492_611_070_983_5e1,
        1.176_939_508_913_125e2,
        5.371_811_018_620_098_6e2,
        1.621_389_574_566_690_2e3,
        3.290_799_235_733_459_7e3,
        4.362_619_090_143_247e3,
        3.439_367_674_143_721_6e3,
        1.230_339_354_803_749_5e3,
    ];
    let mut num = P[8] * ax;
    let mut den = ax;
    for i in 0..7 {
        num = (num + P[i]) * ax;
        den = (den + Q[i]) * ax;
    }
    let r = (num + P[7]) / (den + Q[7]);
    scaled_exp_neg_sq(ax) * r
}

fn erfc_large(ax: f64) -> f64 {
    const P: [f64; 6] = [
        3.053_266_349_612_323_4e-1,
        3.603_448_999_498_044_4e-1,
        1.257_817_261_112_292_6e-1,
        1.608_378_514_874_227_5e-2,
        6.587_491_615_298_378_5e-4,
        1.631_538_713_730_709_6e-2,
    ];
    const Q: [f64; 5] = [
        2.568_520_192_289_822_4,
        1.872_952_849_923_460_4,
        5.279_051_029_514_284_1e-1,
        6.051_834_131_244_132e-2,
        2.335_204_976_268_691_8e-3,
    ];
    let z = 1.0 / (ax * ax);
    let mut num = P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + P[i]) * z;
        den = (den + Q[i]) * z;
    }
    let r = z * (num + P[4]) / (den + Q[4]);
    let r = (1.0 / PI.sqrt() - r) / ax;
    scaled_exp_neg_sq(ax) * r
}

// exp(-x²) evaluated as exp(-y²) exp(-(x - y)(x + y)) with y = x rounded to
// 1/16, which avoids the cancellation in x² for large x.
fn scaled_exp_neg_sq(x: f64) -> f64 {
    let y = (x * 16.0).trunc() / 16.0;
    let del = (x - y) * (x + y);
    (-y * y).exp() * (-del).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values from 40-digit evaluation of log Γ.
    const LN_GAMMA_REF: [(f64, f64); 10] = [
        (0.25, 1.288_022_524_698_077_457_4),
        (1.5, -0.120_782_237_635_245_222_35),
        (3.7, 1.428_072_326_665_387_921_9),
        (9.99, 12.779_315_214_350_192_88),
        (10.01, 12.824_350_262_448_247_762),
        (12.5, 18.734_347_511_936_445_702),
        (1001.0, 5_912.128_178_488_163_348_9),
        (10_000.3, 82_102.480_588_053_900_131),
        (1.0e6, 12_815_504.569_147_611_66),
        (5_000_000.5, 72_124_743.270_930_397_265),
    ];

    #[test]
    fn ln_gamma_matches_reference_values() {
        for (x, expected) in LN_GAMMA_REF {
            assert!(rel(ln_gamma(x), expected) < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn ln_gamma_zeros_and_factorials() {
        assert!(ln_gamma(1.0).abs() < 1e-15);
        assert!(ln_gamma(2.0).abs() < 1e-15);
        let mut fact = 1.0f64;
        for k in 1..20 {
            fact *= k as f64;
            let (a, b) = (ln_gamma(k as f64 + 1.0), fact.ln());
            assert!((a - b).abs() < 1e-14 * b.abs().max(1.0), "k = {k}");
        }
    }

    #[test]
    fn ln_gamma_recurrence_across_branch_points() {
        for &x in &[0.1, 0.49, 0.5, 0.51, 9.5, 9.999, 10.0, 37.2, 2.0e5] {
            let lhs = ln_gamma(x + 1.0);
            let rhs = ln_gamma(x) + x.ln();
            assert!((lhs - rhs).abs() < 1e-13 * lhs.abs().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn ln_gamma_rejects_non_positive() {
        assert!(ln_gamma(0.0).is_nan());
        assert!(ln_gamma(-1.5).is_nan());
    }

    #[test]
    fn normal_quantile_reference_values() {
        // Quantiles of the f64 nearest each nominal p.
        let cases = [
            (1e-10, -6.361_340_902_404_056_199_1),
            (0.025, -1.959_963_984_540_054_211_8),
            (0.3, -0.524_400_512_708_040_815_97),
            (0.975, 1.959_963_984_540_053_855_6),
            (0.99999, 4.264_890_793_923_840_769_9),
        ];
        for (p, z) in cases {
            assert!(rel(normal_quantile(p), z) < 1e-13, "p = {p}");
        }
        assert_eq!(normal_quantile(0.5), 0.0);
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let z = normal_quantile(p);
            assert!((normal_cdf(z) - p).abs() < 1e-14, "p = {p}");
        }
    }

    #[test]
    fn normal_quantile_is_monotone() {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..100_000 {
            let z = normal_quantile(i as f64 / 100_000.0);
            assert!(z > prev);
            prev = z;
        }
    }

    #[test]
    fn erfc_known_values() {
        assert!(rel(erfc(0.0), 1.0) < 1e-15);
        assert!(rel(erfc(1.0), 0.157_299_207_050_285_13) < 1e-14);
        assert!(rel(erfc(3.0), 2.209_049_699_858_544e-5) < 1e-13);
        assert!(rel(erfc(6.0), 2.151_973_671_249_891_3e-17) < 1e-12);
        assert!(rel(erfc(-1.0), 1.842_700_792_949_714_9) < 1e-15);
    }
}
