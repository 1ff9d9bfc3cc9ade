//! Closed-form trace of the variant-I symbol for linear D1Q2 transport, as an
//! even polynomial of degree 36 in `mu = sin(kappa xi dx)` with rational
//! coefficients in `C = a dt / (kappa dx)`.

use num_rational::Ratio;

use super::dd::{DoubleDouble, FourierScalar};

/// `(mu power, sign, denominator, [(C power, integer coefficient)])`.
type Row = (u32, i64, i64, &'static [(u32, i64)]);

const ROWS: &[Row] = &[
    (36, -1, 101_559_956_668_416, &[(18, 1), (16, -576)]),
    (34, 1, 203_119_913_336_832, &[(18, 17), (16, -17 * 576)]),
    (32, -1, 25_389_989_167_104, &[(18, 8), (16, -4491), (14, -67_392)]),
    (30, 1, 50_779_978_334_208, &[(18, 35), (16, -18_414), (14, -1_005_696)]),
    (28, -1, 50_779_978_334_208, &[(18, 49), (16, -22_554), (14, -3_223_152), (12, -24_634_368)]),
    (26, 1, 101_559_956_668_416, &[(18, 91), (16, -31_500), (14, -11_499_408), (12, -315_767_808)]),
    (24, -1, 25_389_989_167_104, &[(18, 14), (16, -2079), (14, -3_074_112), (12, -213_077_952), (10, -1_108_546_560)]),
    (22, 1, 50_779_978_334_208, &[(18, 11), (16, 2358), (14, -3_889_944), (12, -623_464_128), (10, -11_824_496_640)]),
    (
        20,
        -1,
        101_559_956_668_416,
        &[(18, 5), (16, 4932), (14, -2_516_832), (12, -1_053_025_920), (10, -51_399_608_832), (8, -203_166_351_360)],
    ),
    (
        18,
        1,
        203_119_913_336_832,
        &[(18, 1), (16, 3384), (14, -204_768), (12, -992_466_432), (10, -115_473_600_000), (8, -1_712_402_104_320)],
    ),
    (
        16,
        -1,
        470_184_984_576,
        &[(16, 1), (14, 792), (12, -494_208), (10, -160_807_680), (8, -6_429_570_048), (6, -20_316_635_136)],
    ),
    (14, 1, 8_707_129_344, &[(14, 3), (12, 8), (10, -871_200), (8, -91_228_032), (6, -1_128_701_952)]),
    (12, -1, 120_932_352, &[(12, 3), (10, -1100), (8, -445_392), (6, -15_894_144), (4, -41_803_776)]),
    (10, 1, 20_155_392, &[(10, 11), (8, -9720), (6, -997_920), (4, -10_450_944)]),
    (8, 1, 31_104, &[(8, 1), (6, 224), (4, 2496), (2, 13_824)]),
    (6, -1, 2592, &[(6, 7), (4, -24), (2, -2304)]),
    (4, 1, 12, &[(4, 1), (2, -4)]),
    (2, -1, 1, &[(2, 1)]),
    (0, 1, 1, &[(0, 2)]),
];

/// Exact rational coefficient of `C^i mu^j`.
pub fn trace_poly_coefficient(c_power: u32, mu_power: u32) -> Ratio<i64> {
    ROWS.iter()
        .filter(|r| r.0 == mu_power)
        .flat_map(|&(_, sign, den, terms)| {
            terms.iter().filter(move |t| t.0 == c_power).map(move |&(_, num)| Ratio::new(sign * num, den))
        })
        .sum()
}

fn powi(x: DoubleDouble, n: u32) -> DoubleDouble {
    let mut acc = DoubleDouble::new(1.0);
    for _ in 0..n {
        acc = acc * x;
    }
    acc
}

/// Trace polynomial in double-double arithmetic.
pub fn trace_polynomial_dd(c: DoubleDouble, mu: DoubleDouble) -> DoubleDouble {
    let mut total = DoubleDouble::new(0.0);
    for &(mu_pow, sign, den, terms) in ROWS {
        let mut coeff = DoubleDouble::new(0.0);
        for &(c_pow, num) in terms {
            coeff = coeff + DoubleDouble::new((sign * num) as f64) * powi(c, c_pow);
        }
        total = total + coeff / DoubleDouble::new(den as f64) * powi(mu, mu_pow);
    }
    total
}

/// `tr(phi(dt)(xi dx))` for variant I from the closed-form polynomial.
pub fn trace_polynomial(c: f64, mu: f64) -> f64 {
    trace_polynomial_dd(DoubleDouble::new(c), DoubleDouble::new(mu)).to_f64()
}
