//! Reference computations that the production modules are checked against.
//!
//! Nothing here calls into `special_fn`, `frac_ops` quadrature or `gauss-quad`:
//! gamma comes from `statrs`, quadrature from [`adaptive_quad`], series are summed
//! with compensation.

mod quad;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

pub use quad::{adaptive_quad, JacobiRule, Neumaier, QuadSpec};

const SERIES_MAX_TERMS: usize = 2000;

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `Σ_k Z^k / Γ(αk + β)` with compensated summation per entry. Stops once a run of
/// terms is negligible past the point where the term sizes start to shrink.
///
/// Large arguments with cancelling terms are refused: when `ε Σ|terms|` exceeds
/// `1e-10 max(1, |sum|)` the result would carry no trustworthy digits at that level.
pub fn ml_series(alpha: f64, beta: f64, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !(alpha > 0.0) || !(beta > 0.0) || !z.is_square() {
        return Err(Error::domain(
            "series oracle needs alpha, beta > 0 and a square argument",
        ));
    }
    let n = z.nrows();
    let mut acc = vec![Neumaier::default(); n * n];
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::zeros(n, n);
    let mut quiet = 0;
    let mut magnitude = vec![0.0f64; n * n];
    for k in 0..SERIES_MAX_TERMS {
        let arg = alpha * k as f64 + beta;
        if k > 0 {
            power = &power * z;
        }
        // Z^k / Γ directly while both stay in range, then term-to-term ratios
        term = if arg < 170.0 && power.iter().all(|v| v.is_finite()) {
            &power / gamma(arg)
        } else if k == 0 {
            &power * (-ln_gamma(arg)).exp()
        } else {
            &term * z * (ln_gamma(arg - alpha) - ln_gamma(arg)).exp()
        };
        if !term.iter().all(|v| v.is_finite()) {
            return Err(Error::Overflow(format!("series term {k} overflowed")));
        }
        for ((a, m), v) in acc.iter_mut().zip(magnitude.iter_mut()).zip(term.iter()) {
            a.add(*v);
            *m += v.abs();
        }
        let size = inf_norm(&term);
        let total: f64 = acc.iter().map(|a| a.total().abs()).fold(0.0, f64::max);
        // terms keep growing while k is below roughly ‖Z‖^{1/α}
        if size <= 1e-18 * total.max(1e-300) && arg > 2.0 * inf_norm(z).powf(1.0 / alpha) {
            quiet += 1;
            if quiet >= 3 {
                let lost = acc
                    .iter()
                    .zip(&magnitude)
                    .map(|(a, m)| 4.0 * f64::EPSILON * m / a.total().abs().max(1.0))
                    .fold(0.0, f64::max);
                if lost > 1e-10 {
                    return Err(Error::NonConvergence {
                        what: "Mittag-Leffler series oracle (cancellation)",
                        iterations: k,
                        residual: lost,
                    });
                }
                return Ok(DMatrix::from_iterator(n, n, acc.iter().map(Neumaier::total)));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "Mittag-Leffler series oracle",
        iterations: SERIES_MAX_TERMS,
        residual: f64::NAN,
    })
}

/// `F(s + dt, s)` for `A ≡ A₀`: `E_{α,α}(dt^α A₀)`, the identity over `Γ(α)` at `dt = 0`.
pub fn constant_coeff_f(a0: &DMatrix<f64>, alpha: f64, dt: f64) -> Result<DMatrix<f64>> {
    if !(dt >= 0.0) {
        return Err(Error::domain(format!("dt must be non-negative, got {dt}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let n = a0.nrows();
    if dt == 0.0 {
        return Ok(DMatrix::identity(n, n) / gamma(alpha));
    }
    ml_series(alpha, alpha, &(a0 * dt.powf(alpha)))
}

/// Matrix exponential by scaling and squaring a Taylor polynomial.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::domain("expm needs a square matrix"));
    }
    let n = a.nrows();
    let norm = inf_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings);
    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Least-squares slope of `log err` against `log(1/N)`.
pub fn convergence_order(errors: &[(usize, f64)]) -> Result<f64> {
    if errors.len() < 3 {
        return Err(Error::domain("convergence order needs at least three grids"));
    }
    if let Some((n, e)) = errors.iter().find(|(n, e)| !(*e > 0.0) || *n == 0) {
        return Err(Error::domain(format!(
            "errors must be positive on a non-empty grid, got ({n}, {e})"
        )));
    }
    if errors.windows(2).any(|w| w[1].0 != 2 * w[0].0) {
        return Err(Error::domain("grid sizes must double"));
    }
    let pts: Vec<(f64, f64)> = errors.iter().map(|&(n, e)| (-(n as f64).ln(), e.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// `K(ξ, τ) = τ^{α-1} ∫_0^1 η^α (1-η)^{-α} (τ + η(ξ-τ))^{-α} dη` by adaptive quadrature.
pub fn kernel_k_quad(xi: f64, tau: f64, alpha: f64, tol: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < xi) || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("kernel needs 0 < tau < xi and alpha in (0, 1)"));
    }
    let scale = tau.powf(alpha - 1.0);
    let f = |eta: f64| eta.powf(alpha) * (1.0 - eta).powf(-alpha) * (tau + eta * (xi - tau)).powf(-alpha);
    let spec = QuadSpec::new(f, 0.0, 1.0, tol / scale).singular(alpha, -alpha);
    Ok(scale * adaptive_quad(&spec)?)
}

/// `sin(απ)/π ∫_{t₀}^{t★} (t★-τ)^α φ(τ)/(t-τ) dτ` for scalar `φ` and `t ≥ t★`.
pub fn psi_star_quad(phi: impl Fn(f64) -> f64, alpha: f64, t0: f64, t_star: f64, t: f64, tol: f64) -> Result<f64> {
    if t < t_star {
        return Err(Error::domain("psi needs t ≥ t_star"));
    }
    let c = (alpha * PI).sin() / PI;
    let p_hi = if t == t_star { alpha - 1.0 } else { alpha };
    let f = |tau: f64| (t_star - tau).powf(alpha) * phi(tau) / (t - tau);
    Ok(c * adaptive_quad(&QuadSpec::new(f, t0, t_star, tol / c).singular(0.0, p_hi))?)
}

/// `b★(t)` straight from its history form,
/// `α/Γ(1-α) ∫_{t₀}^{t★} (w(τ)-w(t₀))/(t-τ)^{1+α} dτ - (w(t★)-w(t₀))/(Γ(1-α)(t-t★)^α) + b(t)`,
/// for scalar `w` and `t > t★`.
pub fn b_star_quad(
    w: impl Fn(f64) -> f64,
    alpha: f64,
    t0: f64,
    t_star: f64,
    t: f64,
    b_t: f64,
    tol: f64,
) -> Result<f64> {
    if !(t > t_star) {
        return Err(Error::domain("b_star needs t > t_star"));
    }
    let g = gamma(1.0 - alpha);
    let w0 = w(t0);
    let f = |tau: f64| (w(tau) - w0) * (t - tau).powf(-1.0 - alpha);
    let integral = adaptive_quad(&QuadSpec::new(f, t0, t_star, tol * g / alpha))?;
    Ok(alpha / g * integral - (w(t_star) - w0) / (g * (t - t_star).powf(alpha)) + b_t)
}

/// `1/Γ(α) ∫_a^t f(τ) (t-τ)^{α-1} dτ` by adaptive quadrature; `p_lo` declares the behaviour of `f` at `a`.
pub fn rl_integral_quad(f: impl Fn(f64) -> f64, alpha: f64, a: f64, t: f64, p_lo: f64, tol: f64) -> Result<f64> {
    let g = gamma(alpha);
    let h = |tau: f64| f(tau) * (t - tau).powf(alpha - 1.0);
    Ok(adaptive_quad(&QuadSpec::new(h, a, t, tol * g).singular(p_lo, alpha - 1.0))? / g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn series_reference_values() {
        // mpmath, 40 digits (scripts/reference_values.py)
        let cases = [
            (0.5, 0.5, 1.0, 5.573_169_664_310_039_8),
            (0.5, 1.0, -1.0, 0.427_583_576_155_807),
            (0.5, 1.0, 1.0, 5.008_980_080_762_283_5),
            (0.3, 0.3, 0.7, 2.344_788_211_608_422_9),
            (0.7, 1.2, -2.0, 0.289_536_409_852_645_87),
        ];
        for (a, b, z, v) in cases {
            let got = ml_series(a, b, &scalar(z)).unwrap()[(0, 0)];
            assert!((got - v).abs() < 1e-12, "E({a},{b};{z}) = {got}");
        }
    }

    #[test]
    fn cancelling_series_is_refused() {
        assert!(matches!(
            ml_series(0.5, 0.5, &scalar(-8.0)),
            Err(Error::NonConvergence { .. })
        ));
        assert!(matches!(ml_series(0.5, 0.5, &scalar(-30.0)), Err(Error::Overflow(_))));
        assert!(ml_series(0.5, 0.5, &scalar(-3.0)).is_ok());
    }

    #[test]
    fn constant_coeff_at_zero_lag() {
        let a0 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let f = constant_coeff_f(&a0, 0.5, 0.0).unwrap();
        assert_eq!(f, DMatrix::identity(2, 2) / gamma(0.5));
        let z = constant_coeff_f(&DMatrix::zeros(2, 2), 0.5, 0.7).unwrap();
        assert!((z - DMatrix::identity(2, 2) / gamma(0.5)).amax() < 1e-15);
    }

    #[test]
    fn order_one_is_the_matrix_exponential() {
        let a0 = DMatrix::from_row_slice(2, 2, &[-0.3, 1.2, -0.8, 0.1]);
        for dt in [0.1, 0.5, 1.0, 2.5] {
            let f = constant_coeff_f(&a0, 1.0, dt).unwrap();
            let e = expm(&(&a0 * dt)).unwrap();
            assert!((f - e).amax() < 1e-10, "dt {dt}");
        }
    }

    #[test]
    fn expm_of_rotation() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, -3.0, 0.0]);
        let e = expm(&a).unwrap();
        let exact = DMatrix::from_row_slice(2, 2, &[3f64.cos(), 3f64.sin(), -(3f64.sin()), 3f64.cos()]);
        assert!((e - exact).amax() < 1e-13);
    }

    #[test]
    fn orders_of_constructed_sequences() {
        let o = convergence_order(&[(64, 1e-2), (128, 5e-3), (256, 2.5e-3)]).unwrap();
        assert!((o - 1.0).abs() < 1e-12);
        let e = 0.37;
        let o = convergence_order(&[(64, e), (128, e / 2f64.sqrt()), (256, e / 2.0)]).unwrap();
        assert!((o - 0.5).abs() < 1e-12);
        assert!(convergence_order(&[(64, 1e-2), (128, 0.0), (256, 1e-3)]).is_err());
        assert!(convergence_order(&[(64, 1e-2), (128, 1e-3)]).is_err());
        assert!(convergence_order(&[(64, 1e-2), (100, 1e-3), (256, 1e-4)]).is_err());
    }

    #[test]
    fn kernel_reference_values() {
        // mpmath, 40 digits
        let cases = [
            (0.5, 1.0, 0.5, 2.396_280_469_471_184_4),
            (0.5, 1.0, 0.01, 19.778_528_715_057_074),
            (0.3, 2.0, 0.7, 1.328_933_151_561_742_5),
            (0.7, 1.0, 0.999, 2.719_357_069_036_288_4),
            (0.5, 1.0, 1e-6, 1_999.993_205_942_622_9),
        ];
        for (alpha, xi, tau, v) in cases {
            let got = kernel_k_quad(xi, tau, alpha, 1e-12 * v).unwrap();
            assert!((got / v - 1.0).abs() < 1e-11, "K({xi},{tau}; {alpha}) = {got}");
        }
    }

    #[test]
    fn psi_and_b_star_reference_values() {
        // w = t^α/Γ(α+1) on [0, 1/2], so φ ≡ 1; b ≡ 0
        let alpha = 0.5;
        let w = |t: f64| t.powf(alpha) / gamma(alpha + 1.0);
        let cases = [
            (0.6, 0.218_591_039_092_619_69, -0.732_279_527_198_769_99),
            (0.8, 0.132_243_212_654_915_83, -0.580_430_623_255_166_24),
            (1.0, 0.096_604_767_485_279_273, -0.5),
        ];
        for (t, psi, bs) in cases {
            let p = psi_star_quad(|_| 1.0, alpha, 0.0, 0.5, t, 1e-13).unwrap();
            assert!((p - psi).abs() < 1e-12, "psi({t}) = {p}");
            let b = b_star_quad(w, alpha, 0.0, 0.5, t, 0.0, 1e-12).unwrap();
            assert!((b - bs).abs() < 1e-8, "b_star({t}) = {b}");
        }
        let p = psi_star_quad(|_| 1.0, alpha, 0.0, 0.5, 0.5, 1e-13).unwrap();
        assert!((p - 0.450_158_158_078_553_03).abs() < 1e-12);
    }

    #[test]
    fn psi_has_two_history_forms() {
        // ψ(t) = (t-t★)^α α/Γ(1-α) ∫ x(τ)/(t-τ)^{1+α} dτ with x = I^α φ, φ ≡ 1 (x(0) = 0)
        let alpha = 0.4;
        let x = |t: f64| t.powf(alpha) / gamma(alpha + 1.0);
        for t in [0.55, 0.7, 1.0] {
            let lhs = psi_star_quad(|_| 1.0, alpha, 0.0, 0.5, t, 1e-13).unwrap();
            let f = |tau: f64| x(tau) * (t - tau).powf(-1.0 - alpha);
            let integral = adaptive_quad(&QuadSpec::new(f, 0.0, 0.5, 1e-13).singular(alpha, 0.0)).unwrap();
            let rhs = (t - 0.5f64).powf(alpha) * alpha / gamma(1.0 - alpha) * integral;
            assert!((lhs - rhs).abs() < 1e-11, "t {t}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn rl_integral_of_power() {
        // I^α τ^β = Γ(β+1)/Γ(β+α+1) t^{β+α}
        let (alpha, beta) = (0.3, 0.5);
        let v = rl_integral_quad(|t| t.powf(beta), alpha, 0.0, 0.8, beta, 1e-13).unwrap();
        let exact = gamma(beta + 1.0) / gamma(beta + alpha + 1.0) * 0.8f64.powf(beta + alpha);
        assert!((v - exact).abs() < 1e-12);
    }
}
