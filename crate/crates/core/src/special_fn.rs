//! Gamma and Mittag-Leffler functions.
//!
//! The Mittag-Leffler function
//!
//! ```text
//! E_{α,β}(Z) = Σ_{k≥0} Z^k / Γ(αk + β)
//! ```
//!
//! is summed directly from its power series, for scalar (1×1) and square
//! matrix arguments. The series method is only meant for moderate arguments
//! (‖Z‖ up to roughly 10); larger arguments hit the term budget and report
//! non-convergence instead of returning garbage.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::norm_inf;

/// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest argument whose gamma value is representable as an `f64`.
const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

/// `1/Γ(1+z) = Σ c_k z^k`, accurate to rounding for `0 ≤ z < 1` (mpmath, 50 digits).
const RECIP_GAMMA_TAYLOR: [f64; 30] = [
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
    -2.298_745_684_435_370_206_6e-19,
    1.714_406_321_927_337_433_4e-20,
];

fn lanczos_sum(z: f64) -> f64 {
    // z is the shifted argument x - 1
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    acc
}

/// Gamma function for positive arguments.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("gamma requires x > 0, got {x}")));
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::Overflow(format!("gamma({x}) exceeds f64 range")));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x == x.trunc() && x <= 23.0 {
        // (x-1)! is exact in f64 up to 22!
        return (2..x as u32).map(f64::from).product();
    }
    if x > GAMMA_MAX_ARG {
        return f64::INFINITY;
    }
    // Γ(x) = Γ(1+z) · (1+z)(2+z)···(x-1) with z = frac(x), or Γ(1+x)/x below 1
    let z = x.fract();
    let mut scale = 1.0;
    if x < 1.0 {
        scale /= x;
    } else {
        let mut k = 1.0 + z;
        while k < x - 0.5 {
            scale *= k;
            k += 1.0;
        }
    }
    scale / RECIP_GAMMA_TAYLOR.iter().rev().fold(0.0, |acc, c| acc * z + c)
}

/// Natural logarithm of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 160.0 {
        return gamma_unchecked(x).ln();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// Euler Beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b).
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if a + b < 170.0 {
        Ok(gamma(a)? * gamma(b)? / gamma(a + b)?)
    } else {
        Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
    }
}

/// Γ(x) / Γ(x + d) for x, d > 0 without intermediate overflow.
fn gamma_ratio(x: f64, d: f64) -> f64 {
    if x + d < 160.0 {
        gamma_unchecked(x) / gamma_unchecked(x + d)
    } else {
        (ln_gamma_unchecked(x) - ln_gamma_unchecked(x + d)).exp()
    }
}

/// Parameters of a truncated Mittag-Leffler series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams {
    pub alpha: f64,
    pub beta: f64,
    /// Absolute truncation tolerance.
    pub tol: f64,
    pub max_terms: usize,
}

impl MlParams {
    /// Terms must fall below `tol * STOP_SAFETY` twice in a row before the sum stops.
    pub const STOP_SAFETY: f64 = 0.1;

    pub fn new(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            tol: 1e-14,
            max_terms: 2000,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 2], got {}", self.alpha)));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::domain(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_terms == 0 {
            return Err(Error::domain("max_terms must be at least 1"));
        }
        Ok(())
    }
}

/// Matrix Mittag-Leffler function E_{α,β}(Z) for a square matrix `z`.
pub fn mittag_leffler(params: &MlParams, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    params.validate()?;
    if !z.is_square() {
        return Err(Error::domain(format!(
            "Mittag-Leffler argument must be square, got {}x{}",
            z.nrows(),
            z.ncols()
        )));
    }
    let n = z.nrows();
    let threshold = params.tol * MlParams::STOP_SAFETY;

    let mut term = DMatrix::<f64>::identity(n, n) / gamma(params.beta)?;
    let mut sum = term.clone();
    let mut arg = params.beta;
    for _ in 1..params.max_terms {
        let next = (&term * z) * gamma_ratio(arg, params.alpha);
        arg += params.alpha;
        sum += &next;
        let small = norm_inf(&term) < threshold && norm_inf(&next) < threshold;
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::Overflow("Mittag-Leffler series terms overflowed".into()));
        }
        if small {
            return Ok(sum);
        }
        term = next;
    }
    Err(Error::NonConvergence {
        what: "Mittag-Leffler series",
        iterations: params.max_terms,
        residual: norm_inf(&term),
    })
}

/// Scalar E_{α,β}(z).
pub fn mittag_leffler_scalar(params: &MlParams, z: f64) -> Result<f64> {
    let m = DMatrix::from_element(1, 1, z);
    Ok(mittag_leffler(params, &m)?[(0, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_table() {
        // (x, Γ(x)) from factorials, half-integer closed forms and mpmath
        let table = [
            (1.0, 1.0),
            (2.0, 1.0),
            (5.0, 24.0),
            (0.5, PI.sqrt()),
            (1.5, 0.5 * PI.sqrt()),
            (2.5, 1.329_340_388_179_137_020_5),
            (0.001, 999.423_772_484_595_466_11),
            (0.1, 9.513_507_698_668_731_836_3),
            (7.3, 1_271.423_633_663_909_273_1),
            (30.0, 8.841_761_993_739_701_954_5e30),
            (50.5, 4.290_462_912_351_959_810_9e63),
            (100.25, 2.948_466_281_838_769_97e156),
            (170.5, 5.562_092_414_559_999_610_7e305),
        ];
        for (x, expected) in table {
            assert_relative_eq!(gamma(x).unwrap(), expected, max_relative = 4e-15);
        }
    }

    #[test]
    fn gamma_recurrence_holds_on_range() {
        let mut x = 0.1;
        while x < 30.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
            x += 0.37;
        }
    }

    #[test]
    fn gamma_rejects_bad_arguments() {
        assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
        assert!(matches!(gamma(200.0), Err(Error::Overflow(_))));
        assert!(ln_gamma(200.0).unwrap() > 0.0);
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for x in [0.2, 0.7, 3.3, 12.0, 50.5] {
            assert_relative_eq!(ln_gamma(x).unwrap(), gamma(x).unwrap().ln(), max_relative = 1e-13);
        }
    }

    #[test]
    fn beta_half_half_is_pi() {
        assert_relative_eq!(beta(0.5, 0.5).unwrap(), PI, max_relative = 1e-14);
    }

    #[test]
    fn ml_reduces_to_exp() {
        let p = MlParams::new(1.0, 1.0).with_tol(1e-14);
        assert_relative_eq!(
            mittag_leffler_scalar(&p, 1.0).unwrap(),
            std::f64::consts::E,
            max_relative = 1e-14
        );
        let mut z = -5.0;
        while z <= 5.0 {
            let v = mittag_leffler_scalar(&p, z).unwrap();
            assert!((v - z.exp()).abs() <= 1e-10, "z = {z}");
            z += 0.1;
        }
    }

    #[test]
    fn ml_at_zero_is_inverse_gamma_beta() {
        let p = MlParams::new(0.5, 0.5);
        let v = mittag_leffler_scalar(&p, 0.0).unwrap();
        assert_relative_eq!(v, 0.564_189_583_547_756_3, max_relative = 1e-15);
        let z = DMatrix::<f64>::zeros(3, 3);
        let m = mittag_leffler(&MlParams::new(0.7, 1.3), &z).unwrap();
        let expected = DMatrix::<f64>::identity(3, 3) / gamma(1.3).unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn ml_reference_values() {
        // mpmath, 40 digits (scripts/reference_values.py)
        let cases = [
            (0.5, 0.5, 1.0, 5.573_169_664_310_039_8),
            (0.5, 1.0, -1.0, 0.427_583_576_155_807),
            (0.5, 1.0, 1.0, 5.008_980_080_762_283_5),
            (0.3, 0.3, 0.7, 2.344_788_211_608_422_9),
            (0.7, 1.2, -2.0, 0.289_536_409_852_645_87),
        ];
        for (a, b, z, expected) in cases {
            let v = mittag_leffler_scalar(&MlParams::new(a, b).with_tol(1e-13), z).unwrap();
            assert!((v - expected).abs() <= 1e-12, "E_({a},{b})({z}) = {v}, want {expected}");
        }
    }

    #[test]
    fn ml_half_half_matches_erfc_form() {
        // E_{1/2,1}(z) = exp(z^2) erfc(-z); at z = -1 this is e·erfc(1).
        let v = mittag_leffler_scalar(&MlParams::new(0.5, 1.0), -1.0).unwrap();
        let erfc1 = 0.157_299_207_050_285_13;
        assert_relative_eq!(v, std::f64::consts::E * erfc1, max_relative = 1e-13);
    }

    #[test]
    fn ml_matrix_acts_on_eigenvectors() {
        // Z = V diag(-1.5, 0.4) V^-1
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 2.0]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.5, 0.4]));
        let z = &v * d * v.clone().try_inverse().unwrap();
        let tol = 1e-12;
        let p = MlParams::new(0.6, 0.9).with_tol(tol);
        let m = mittag_leffler(&p, &z).unwrap();
        for (col, lambda) in [(0, -1.5), (1, 0.4)] {
            let ev = v.column(col).into_owned();
            let lhs = &m * &ev;
            let rhs = &ev * mittag_leffler_scalar(&p, lambda).unwrap();
            assert!((lhs - rhs).amax() <= 10.0 * tol * ev.amax());
        }
    }

    #[test]
    fn ml_reports_non_convergence() {
        let p = MlParams::new(0.5, 1.0).with_tol(1e-12).with_max_terms(20);
        let err = mittag_leffler_scalar(&p, 8.0).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
        assert!(err.is_numerical());
    }

    #[test]
    fn ml_rejects_bad_params() {
        let z = DMatrix::<f64>::zeros(2, 3);
        assert!(mittag_leffler(&MlParams::new(0.5, 1.0), &z).is_err());
        assert!(mittag_leffler_scalar(&MlParams::new(0.0, 1.0), 1.0).is_err());
        assert!(mittag_leffler_scalar(&MlParams::new(0.5, -1.0), 1.0).is_err());
        assert!(mittag_leffler_scalar(&MlParams::new(0.5, 1.0).with_tol(0.0), 1.0).is_err());
    }

    #[test]
    fn ml_more_terms_never_moves_converged_value() {
        let tol = 1e-12;
        for z in [-3.0, -0.5, 0.8, 2.5] {
            let base = mittag_leffler_scalar(&MlParams::new(0.4, 0.7).with_tol(tol), z).unwrap();
            let more = mittag_leffler_scalar(&MlParams::new(0.4, 0.7).with_tol(tol).with_max_terms(10_000), z).unwrap();
            assert!((base - more).abs() <= 2.0 * tol);
        }
    }
}
