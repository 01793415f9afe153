//! Adaptive quadrature with endpoint singularities, written from scratch so it
//! shares nothing with the production rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `∫_lo^hi f(x) dx` where `f` behaves like `(x-lo)^p_lo` and `(hi-x)^p_hi` at the ends.
/// `integrand` is the whole of `f`; the endpoint factors only steer the rules.
pub struct QuadSpec<F> {
    pub integrand: F,
    pub lo: f64,
    pub hi: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub tol: f64,
}

impl<F: Fn(f64) -> f64> QuadSpec<F> {
    /// Smooth integrand on `[lo, hi]`.
    pub fn new(integrand: F, lo: f64, hi: f64, tol: f64) -> Self {
        Self {
            integrand,
            lo,
            hi,
            p_lo: 0.0,
            p_hi: 0.0,
            tol,
        }
    }

    pub fn singular(mut self, p_lo: f64, p_hi: f64) -> Self {
        self.p_lo = p_lo;
        self.p_hi = p_hi;
        self
    }
}

/// Gauss-Jacobi rule for the weight `(1-x)^a (1+x)^b` on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `(P_n, P_{n-1})` of the Jacobi family at `x`.
fn jacobi_pair(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for k in 1..n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let lead = 2.0 * (k + 1.0) * (k + a + b + 1.0) * s;
        let mid = (s + 1.0) * ((s + 2.0) * s * x + a * a - b * b);
        let back = 2.0 * (k + a) * (k + b) * (s + 2.0);
        let next = (mid * cur - back * prev) / lead;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn jacobi_value_and_slope(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let p = jacobi_pair(n, a, b, x).0;
    let dp = if n == 0 {
        0.0
    } else {
        0.5 * (n as f64 + a + b + 1.0) * jacobi_pair(n - 1, a + 1.0, b + 1.0, x).0
    };
    (p, dp)
}

impl JacobiRule {
    /// Roots are bracketed by sign changes on a fine angular grid, then polished by
    /// safeguarded Newton steps.
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 || !(a > -1.0) || !(b > -1.0) {
            return Err(Error::domain(format!(
                "Gauss-Jacobi rule needs n ≥ 1 and exponents > -1, got n = {n}, a = {a}, b = {b}"
            )));
        }
        let samples = 64 * n;
        let f = |x: f64| jacobi_pair(n, a, b, x).0;
        let mut nodes = Vec::with_capacity(n);
        let mut x_prev = 1.0f64;
        let mut f_prev = f(x_prev);
        for s in 1..=samples {
            let x = (std::f64::consts::PI * s as f64 / samples as f64).cos();
            let fx = f(x);
            if f_prev == 0.0 {
                nodes.push(x_prev);
            } else if fx.signum() != f_prev.signum() && fx != 0.0 {
                nodes.push(polish(&f, n, a, b, x, x_prev));
            }
            x_prev = x;
            f_prev = fx;
        }
        if nodes.len() != n {
            return Err(Error::NonConvergence {
                what: "Gauss-Jacobi root bracketing",
                iterations: samples,
                residual: (n as f64 - nodes.len() as f64).abs(),
            });
        }
        nodes.reverse();
        let nf = n as f64;
        let log_c = ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0) - ln_gamma(nf + a + b + 1.0) - ln_gamma(nf + 1.0)
            + (a + b + 1.0) * std::f64::consts::LN_2;
        let weights = nodes
            .iter()
            .map(|&x| {
                let dp = jacobi_value_and_slope(n, a, b, x).1;
                log_c.exp() / ((1.0 - x * x) * dp * dp)
            })
            .collect();
        Ok(Self { a, b, nodes, weights })
    }

    /// `∫_lo^hi g(x) (hi-x)^a (x-lo)^b dx`.
    pub fn integrate(&self, lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let jac = half.powf(1.0 + self.a + self.b);
        let mut sum = Neumaier::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum.add(w * g(mid + half * x));
        }
        jac * sum.total()
    }
}

fn polish(f: &impl Fn(f64) -> f64, n: usize, a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = f(lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (p, dp) = jacobi_value_and_slope(n, a, b, x);
        if p == 0.0 {
            return x;
        }
        if p.signum() == f_lo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let step = x - p / dp;
        let next = if dp != 0.0 && step > lo.min(hi) && step < lo.max(hi) {
            step
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-16 * x.abs().max(1e-300) + f64::MIN_POSITIVE {
            return next;
        }
        x = next;
    }
    x
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

const COARSE: usize = 10;
const FINE: usize = 21;
const PANEL_BUDGET: usize = 5000;

struct Rules {
    coarse: JacobiRule,
    fine: JacobiRule,
}

impl Rules {
    fn new(a: f64, b: f64) -> Result<Self> {
        Ok(Self {
            coarse: JacobiRule::new(COARSE, a, b)?,
            fine: JacobiRule::new(FINE, a, b)?,
        })
    }
}

/// Global adaptive bisection: the panel with the largest error estimate is split until the
/// summed estimate is below `tol`. Panels touching a singular end use the matching
/// Gauss-Jacobi pair, the rest Gauss-Legendre; the estimate is the coarse/fine difference.
pub fn adaptive_quad<F: Fn(f64) -> f64>(spec: &QuadSpec<F>) -> Result<f64> {
    let (lo, hi, p_lo, p_hi, tol) = (spec.lo, spec.hi, spec.p_lo, spec.p_hi, spec.tol);
    if !(p_lo > -1.0) || !(p_hi > -1.0) {
        return Err(Error::domain(format!(
            "endpoint exponents must exceed -1, got {p_lo}, {p_hi}"
        )));
    }
    if !(tol > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("quadrature needs a finite interval and tol > 0"));
    }
    if lo == hi {
        return Ok(0.0);
    }
    if lo > hi {
        return bisect(&spec.integrand, hi, lo, p_hi, p_lo, tol).map(|v| -v);
    }
    bisect(&spec.integrand, lo, hi, p_lo, p_hi, tol)
}

fn bisect(integrand: &dyn Fn(f64) -> f64, lo: f64, hi: f64, p_lo: f64, p_hi: f64, tol: f64) -> Result<f64> {
    let plain = Rules::new(0.0, 0.0)?;
    let left = Rules::new(0.0, p_lo)?;
    let right = Rules::new(p_hi, 0.0)?;
    let both = Rules::new(p_hi, p_lo)?;

    let eval = |a: f64, b: f64| -> Panel {
        let touches_lo = a == lo && p_lo != 0.0;
        let touches_hi = b == hi && p_hi != 0.0;
        let (rules, ea, eb) = match (touches_lo, touches_hi) {
            (true, true) => (&both, p_hi, p_lo),
            (true, false) => (&left, 0.0, p_lo),
            (false, true) => (&right, p_hi, 0.0),
            (false, false) => (&plain, 0.0, 0.0),
        };
        // divide the declared endpoint behaviour out of the integrand
        let g = |x: f64| {
            let mut v = integrand(x);
            if eb != 0.0 {
                v /= (x - a).powf(eb);
            }
            if ea != 0.0 {
                v /= (b - x).powf(ea);
            }
            v
        };
        let coarse = rules.coarse.integrate(a, b, g);
        let fine = rules.fine.integrate(a, b, g);
        Panel {
            lo: a,
            hi: b,
            value: fine,
            err: (fine - coarse).abs(),
        }
    };

    let mut heap = BinaryHeap::new();
    heap.push(eval(lo, hi));
    let mut count = 1;
    loop {
        let total_err: f64 = heap.iter().map(|p| p.err).sum();
        if total_err <= tol {
            let mut sum = Neumaier::default();
            heap.iter().for_each(|p| sum.add(p.value));
            return Ok(sum.total());
        }
        if count >= PANEL_BUDGET {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                iterations: count,
                residual: total_err,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature (panel below resolution)",
                iterations: count,
                residual: total_err,
            });
        }
        heap.push(eval(worst.lo, mid));
        heap.push(eval(mid, worst.hi));
        count += 1;
    }
}
