//! Standard normal density, distribution function, quantile and Mills ratio.
//!
//! The distribution function is built on the `libm` complementary error
//! function (a port of the musl implementation), so results are
//! bit-identical across platforms.

use libm::erfc;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ(x), accurate to full relative precision in both tails.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// 1 − Φ(x) without cancellation.
pub fn sf(x: f64) -> f64 {
    cdf(-x)
}

/// φ(x)/Φ(x). Uses the Laplace continued fraction for the Mills ratio once
/// Φ(x) gets close to underflow.
pub fn mills_ratio(x: f64) -> f64 {
    if x > -8.0 {
        return pdf(x) / cdf(x);
    }
    // φ(x)/Φ(x) = 1/R(t), t = −x, R(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...))))
    let t = -x;
    let mut tail = t;
    for k in (1..=80).rev() {
        tail = t + k as f64 / tail;
    }
    tail
}

/// Φ⁻¹(p) by Acklam's rational approximation followed by one Halley step.
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement against the erfc-based distribution function.
    let e = if x < 0.0 { cdf(x) - p } else { (1.0 - p) - sf(x) };
    let u = e / pdf(x);
    x - u / (1.0 + 0.5 * x * u)
}

/// Two-sided normal critical value z_{α/2}.
pub fn two_sided_critical(alpha: f64) -> f64 {
    quantile(1.0 - 0.5 * alpha)
}
