//! Closed-form Bessel reference spectra: first Dirichlet eigenvalues of the
//! flat disc and of the concentric annulus, used as comparison baselines and
//! a priori bounds everywhere else.
//!
//! `J0`/`Y0` follow the classical Cephes evaluation: a rational fit of the
//! power series with the two leading zeros factored out on `[0, 5]`, and the
//! Hankel asymptotic expansion with rational `P`/`Q` modulus-phase corrections
//! beyond. Absolute accuracy is a few ulps across the range used here.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use crate::error::Error;
use crate::Result;

const SQRT_TWO_OVER_PI: f64 = 0.797_884_560_802_865_4;
const TWO_OVER_PI: f64 = 0.636_619_772_367_581_3;

/// Concentric annulus with inner radius `a` and outer radius `b`, `0 < a < b`.
#[derive(Debug, Clone, Copy)]
pub struct AnnulusSpec {
    inner: f64,
    outer: f64,
}

impl AnnulusSpec {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) || !inner.is_finite() || !outer.is_finite() {
            return Err(Error::Domain(format!(
                "annulus radii must satisfy 0 < a < b, got a = {inner}, b = {outer}"
            )));
        }
        Ok(Self { inner, outer })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }
}

fn polevl(x: f64, coef: &[f64]) -> f64 {
    coef.iter().fold(0.0, |acc, &c| acc * x + c)
}

fn p1evl(x: f64, coef: &[f64]) -> f64 {
    coef.iter().fold(1.0, |acc, &c| acc * x + c)
}

// Squares of the first two zeros of J0.
const DR1: f64 = 5.783_185_962_946_784;
const DR2: f64 = 30.471_262_343_662_087;

static RP: [f64; 4] = [
    -4.794_432_209_782_018e9,
    1.956_174_919_465_565_7e12,
    -2.492_483_443_609_677_2e14,
    9.708_622_510_473_064e15,
];
static RQ: [f64; 8] = [
    4.995_631_471_526_51e2,
    1.737_854_016_763_747e5,
    4.844_096_583_399_621e7,
    1.118_555_370_453_568_3e10,
    2.112_775_201_154_892e12,
    3.105_182_298_574_225_6e14,
    3.181_219_559_432_049_6e16,
    1.710_862_940_810_431_5e18,
];
static PP: [f64; 7] = [
    7.969_367_292_973_471e-4,
    8.283_523_921_074_408e-2,
    1.239_533_716_464_143,
    5.447_250_030_587_687,
    8.747_165_001_998_17,
    5.303_240_382_353_949,
    1.0,
];
static PQ: [f64; 7] = [
    9.244_088_105_588_637e-4,
    8.562_884_743_544_745e-2,
    1.253_527_439_010_589_5,
    5.470_977_403_304_171,
    8.761_908_832_370_695,
    5.306_052_882_353_947,
    1.0,
];
static QP: [f64; 8] = [
    -1.136_638_388_984_691_6e-2,
    -1.282_527_186_705_093_1,
    -1.955_395_442_577_359_7e1,
    -9.320_601_521_237_683e1,
    -1.776_811_679_804_880_6e2,
    -1.470_775_051_549_511_8e2,
    -5.141_053_267_665_993e1,
    -6.050_143_506_007_285,
];
static QQ: [f64; 7] = [
    6.431_782_561_181_78e1,
    8.564_300_259_769_806e2,
    3.882_401_836_054_016_3e3,
    7.240_467_741_956_525e3,
    5.930_727_011_873_169e3,
    2.062_093_316_603_278_3e3,
    2.420_057_402_402_914e2,
];
static YP: [f64; 8] = [
    1.559_243_678_552_357_4e4,
    -1.466_392_959_039_716e7,
    5.435_264_770_518_765e9,
    -9.821_360_657_179_115e11,
    8.759_063_943_953_67e13,
    -3.466_283_033_847_297e15,
    4.427_332_685_725_698_4e16,
    -1.849_508_004_369_866_8e16,
];
static YQ: [f64; 7] = [
    1.041_283_536_642_598_4e3,
    6.261_073_301_371_35e5,
    2.689_196_333_938_141_5e8,
    8.640_024_871_039_35e10,
    2.029_796_127_501_055_5e13,
    3.171_577_528_429_750_5e15,
    2.505_962_561_726_530_6e17,
];

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 5.0 {
        let z = x * x;
        if x < 1e-5 {
            return 1.0 - z / 4.0;
        }
        let p = (z - DR1) * (z - DR2);
        return p * polevl(z, &RP) / p1evl(z, &RQ);
    }
    let w = 5.0 / x;
    let z = 25.0 / (x * x);
    let p = polevl(z, &PP) / polevl(z, &PQ);
    let q = polevl(z, &QP) / p1evl(z, &QQ);
    let xn = x - FRAC_PI_4;
    (p * xn.cos() - w * q * xn.sin()) * SQRT_TWO_OVER_PI / x.sqrt()
}

/// Bessel function of the second kind, order zero. Domain error for `x <= 0`.
pub fn bessel_y0(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("y0 requires x > 0, got {x}")));
    }
    if x <= 5.0 {
        let z = x * x;
        let w = polevl(z, &YP) / p1evl(z, &YQ);
        return Ok(w + TWO_OVER_PI * x.ln() * bessel_j0(x));
    }
    let w = 5.0 / x;
    let z = 25.0 / (x * x);
    let p = polevl(z, &PP) / polevl(z, &PQ);
    let q = polevl(z, &QP) / p1evl(z, &QQ);
    let xn = x - FRAC_PI_4;
    Ok((p * xn.sin() + w * q * xn.cos()) * SQRT_TWO_OVER_PI / x.sqrt())
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    debug_assert!(flo * f(hi) <= 0.0);
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if flo * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

/// First positive zero of `J0` (~2.404825557695773), bisected once and cached.
pub fn j0_first_zero() -> f64 {
    static ZERO: OnceLock<f64> = OnceLock::new();
    *ZERO.get_or_init(|| bisect(2.0, 3.0, bessel_j0))
}

/// First Dirichlet eigenvalue of the flat disc of radius `R`: `(j_{0,1}/R)^2`.
pub fn disc_lambda1(radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("disc radius must be > 0, got {radius}")));
    }
    let j01 = j0_first_zero();
    Ok((j01 / radius) * (j01 / radius))
}

/// Bessel cross-product `J0(ka) Y0(kb) - J0(kb) Y0(ka)`; its smallest positive
/// root in `k` squared is the first Dirichlet eigenvalue of the annulus.
pub fn cross_product(k: f64, a: f64, b: f64) -> Result<f64> {
    if !(k > 0.0 && a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!(
            "cross product requires positive arguments, got k = {k}, a = {a}, b = {b}"
        )));
    }
    Ok(bessel_j0(k * a) * bessel_y0(k * b)? - bessel_j0(k * b) * bessel_y0(k * a)?)
}

/// First Dirichlet eigenvalue of the concentric annulus.
///
/// The smallest positive root of the cross-product is isolated by a scan in
/// steps of a quarter of the asymptotic zero spacing `pi/(b-a)` (the first
/// root always lies below `pi/(b-a)`), then bisected to full precision.
pub fn annulus_lambda1(spec: &AnnulusSpec) -> Result<f64> {
    let (a, b) = (spec.inner(), spec.outer());
    let step = PI / (4.0 * (b - a));
    // cross -> (2/pi) ln(b/a) > 0 as k -> 0.
    let mut prev_k = 0.0f64;
    let mut prev_positive = true;
    for j in 1..=6 {
        let k = j as f64 * step;
        let value = cross_product(k, a, b)?;
        if prev_positive && value <= 0.0 {
            let lo = if prev_k > 0.0 { prev_k } else { 1e-12 * step };
            let root = bisect(lo, k, |k| cross_product(k, a, b).unwrap());
            return Ok(root * root);
        }
        prev_positive = value > 0.0;
        prev_k = k;
    }
    Err(Error::NoBracket(format!(
        "annulus cross-product root not found for a = {a}, b = {b} below k = {}",
        6.0 * step
    )))
}

/// First zero above `r0` of the radial wave `J0(kr) Y0(k r0) - Y0(kr) J0(k r0)`.
///
/// This is where the outward cylinder-reduction solution of the critical
/// system first vanishes; by Sturm comparison the zero lies within `pi/k`.
pub fn radial_wave_first_zero(k: f64, r0: f64) -> Result<f64> {
    if !(k > 0.0 && r0 > 0.0) {
        return Err(Error::Domain(format!(
            "radial wave requires k > 0 and r0 > 0, got k = {k}, r0 = {r0}"
        )));
    }
    let y0_r0 = bessel_y0(k * r0)?;
    let j0_r0 = bessel_j0(k * r0);
    let wave = |r: f64| bessel_j0(k * r) * y0_r0 - bessel_y0(k * r).unwrap() * j0_r0;
    // wave(r0) = 0 with derivative -2/(pi r0) < 0, so it starts negative.
    let step = PI / (4.0 * k);
    let mut prev = r0 + 1e-9 * step;
    for j in 1..=9 {
        let r = r0 + j as f64 * step;
        if wave(r) >= 0.0 {
            return Ok(bisect(prev, r, wave));
        }
        prev = r;
    }
    Err(Error::NoBracket(format!(
        "radial wave zero not found above r0 = {r0} for k = {k}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Independent brute-force series evaluator (A&S 9.1.12), reliable to
    /// ~1e-13 absolute for x <= 10.
    fn j0_series(x: f64) -> f64 {
        let q = 0.25 * x * x;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for m in 1..200 {
            term *= -q / ((m * m) as f64);
            sum += term;
            if term.abs() < 1e-20 {
                break;
            }
        }
        sum
    }

    /// Series for Y0 (A&S 9.1.13) with harmonic-number weights.
    fn y0_series(x: f64) -> f64 {
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        let q = 0.25 * x * x;
        let mut term = 1.0f64;
        let mut h = 0.0f64;
        let mut sum = 0.0f64;
        for m in 1..200 {
            term *= -q / ((m * m) as f64);
            h += 1.0 / m as f64;
            sum += -term * h; // (-1)^{m+1} q^m / (m!)^2 * H_m
            if term.abs() < 1e-20 {
                break;
            }
        }
        TWO_OVER_PI * (((0.5 * x).ln() + EULER_GAMMA) * j0_series(x) + sum)
    }

    #[test]
    fn j0_matches_series_oracle() {
        let mut x = 0.05;
        while x <= 10.0 {
            assert_relative_eq!(bessel_j0(x), j0_series(x), epsilon = 1e-13);
            x += 0.173;
        }
        assert_eq!(bessel_j0(0.0), 1.0);
    }

    #[test]
    fn y0_matches_series_oracle() {
        let mut x = 0.05;
        while x <= 10.0 {
            assert_relative_eq!(bessel_y0(x).unwrap(), y0_series(x), epsilon = 1e-12);
            x += 0.173;
        }
    }

    #[test]
    fn asymptotic_and_series_branches_agree_at_the_split() {
        for x in [4.9990, 4.9995, 5.0, 5.0005, 5.0010] {
            assert_relative_eq!(bessel_j0(x), j0_series(x), epsilon = 1e-13);
            assert_relative_eq!(bessel_y0(x).unwrap(), y0_series(x), epsilon = 1e-13);
        }
    }

    #[test]
    fn first_j0_zero_by_bisection() {
        let root = bisect(2.0, 3.0, bessel_j0);
        assert_relative_eq!(root, 2.404_825_557_695_773, epsilon = 1e-13);
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-12);
    }

    #[test]
    fn first_y0_zero_by_bisection() {
        let root = bisect(0.5, 1.5, |x| bessel_y0(x).unwrap());
        assert_relative_eq!(root, 0.893_576_966_279_167_5, epsilon = 1e-12);
        assert!(bessel_y0(0.893_576_966_279_167_5).unwrap().abs() < 1e-10);
    }

    #[test]
    fn y0_rejects_nonpositive_arguments() {
        assert!(bessel_y0(0.0).is_err());
        assert!(bessel_y0(-1.0).is_err());
    }

    #[test]
    fn disc_eigenvalue_unit_radius() {
        assert_relative_eq!(disc_lambda1(1.0).unwrap(), 5.783_185_962_946_785, epsilon = 1e-9);
    }

    #[test]
    fn disc_eigenvalue_scaling() {
        let l1 = disc_lambda1(1.0).unwrap();
        let l2 = disc_lambda1(2.0).unwrap();
        assert_relative_eq!(l2, l1 / 4.0, epsilon = 1e-14);
        // Doubling R halves sqrt(lambda).
        assert_relative_eq!(l2.sqrt() * 2.0, l1.sqrt(), epsilon = 1e-14);
        assert!(disc_lambda1(0.0).is_err());
        assert!(disc_lambda1(-1.0).is_err());
    }

    #[test]
    fn thin_annulus_approaches_the_interval_eigenvalue() {
        // b - a -> 0 with midpoint fixed: lambda ~ pi^2/(b-a)^2.
        let spec = AnnulusSpec::new(0.995, 1.005).unwrap();
        let lambda = annulus_lambda1(&spec).unwrap();
        let ratio = lambda * (0.01f64).powi(2) / (PI * PI);
        assert!((ratio - 1.0).abs() < 0.01, "ratio = {ratio}");
    }

    #[test]
    fn annulus_monotone_in_inner_radius() {
        // Shrinking the inner radius toward 0 strictly lowers lambda1 ...
        let grid = [0.5, 0.2, 0.1, 0.01];
        let values: Vec<f64> = grid
            .iter()
            .map(|&a| annulus_lambda1(&AnnulusSpec::new(a, 1.0).unwrap()).unwrap())
            .collect();
        for w in values.windows(2) {
            assert!(w[1] < w[0], "expected strict decrease, got {values:?}");
        }
        // ... while staying above the disc value, with a shrinking gap.
        let disc = disc_lambda1(1.0).unwrap();
        let mut prev_gap = f64::INFINITY;
        for v in &values {
            let gap = v - disc;
            assert!(gap > 0.0);
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
    }

    #[test]
    fn cross_product_root_is_symmetric_in_the_radii() {
        let (a, b) = (0.6, 1.7);
        let root_ab = annulus_lambda1(&AnnulusSpec::new(a, b).unwrap()).unwrap().sqrt();
        // Same bracketing scan with the roles of a and b exchanged.
        let step = PI / (4.0 * (b - a));
        let mut prev = 1e-12 * step;
        let mut root_ba = None;
        for j in 1..=6 {
            let k = j as f64 * step;
            if cross_product(k, b, a).unwrap() >= 0.0 {
                root_ba = Some(bisect(prev, k, |k| cross_product(k, b, a).unwrap()));
                break;
            }
            prev = k;
        }
        // cross(k, b, a) = -cross(k, a, b), so the scan sees flipped signs but
        // the same root.
        assert_relative_eq!(root_ba.unwrap(), root_ab, epsilon = 1e-12);
    }

    #[test]
    fn radial_wave_zero_matches_annulus_root() {
        // If k is exactly the annulus root for (a, b), the radial wave started
        // at r0 = a must first vanish at r = b.
        let spec = AnnulusSpec::new(0.5, 1.0).unwrap();
        let k = annulus_lambda1(&spec).unwrap().sqrt();
        let r = radial_wave_first_zero(k, 0.5).unwrap();
        assert_relative_eq!(r, 1.0, epsilon = 1e-11);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn prop_annulus_scaling(a in 0.05f64..1.0, width in 0.05f64..2.0, c in 0.5f64..3.0) {
            let b = a + width;
            let base = annulus_lambda1(&AnnulusSpec::new(a, b).unwrap()).unwrap();
            let scaled = annulus_lambda1(&AnnulusSpec::new(c * a, c * b).unwrap()).unwrap();
            prop_assert!((scaled - base / (c * c)).abs() <= 1e-10 * base);
        }

        #[test]
        fn prop_cross_product_antisymmetry(k in 0.5f64..20.0, a in 0.1f64..1.0, w in 0.1f64..2.0) {
            let b = a + w;
            let fwd = cross_product(k, a, b).unwrap();
            let rev = cross_product(k, b, a).unwrap();
            prop_assert!((fwd + rev).abs() <= 1e-13 * (fwd.abs() + rev.abs()).max(1e-6));
        }
    }
}
