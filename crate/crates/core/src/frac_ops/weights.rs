//! Product-integration weights on uniform grids.
//!
//! Every integral in the library has the form `∫ k(τ) φ(τ) dτ` with a weakly
//! singular kernel `k` and a grid function `φ` that is interpolated piecewise
//! linearly. The weights below integrate the kernel against the hat functions
//! of the grid, so each quadrature is exact for affine `φ`. All tables are in
//! unit-step coordinates; callers apply the `h`-scaling.

use gauss_quad::{GaussJacobi, GaussLegendre};
use rayon::prelude::*;

/// A Gauss rule for `∫_lo^hi (x - lo)^left (hi - x)^right f(x) dx`.
#[derive(Debug, Clone)]
pub(crate) struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    left: f64,
    right: f64,
}

impl PanelRule {
    pub(crate) fn legendre(n: usize) -> Self {
        let rule = GaussLegendre::new(n.try_into().expect("rule size must be nonzero"));
        let (nodes, weights) = rule.iter().map(|(x, w)| (*x, *w)).unzip();
        Self {
            nodes,
            weights,
            left: 0.0,
            right: 0.0,
        }
    }

    /// Jacobi weight `(x - lo)^left (hi - x)^right`; both exponents must exceed -1.
    pub(crate) fn jacobi(n: usize, left: f64, right: f64) -> Self {
        if left == 0.0 && right == 0.0 {
            return Self::legendre(n);
        }
        // gauss-quad's `alpha` multiplies (1 - x), `beta` multiplies (1 + x)
        let rule = GaussJacobi::new(
            n.try_into().expect("rule size must be nonzero"),
            right.try_into().expect("exponent must exceed -1"),
            left.try_into().expect("exponent must exceed -1"),
        );
        let (nodes, weights) = rule.iter().map(|(x, w)| (*x, *w)).unzip();
        Self {
            nodes,
            weights,
            left,
            right,
        }
    }

    #[inline]
    pub(crate) fn integrate(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half.powf(1.0 + self.left + self.right)
    }

    /// Moments against the two hat functions of the panel:
    /// returns `(∫ w f (hi - x)/(hi - lo), ∫ w f (x - lo)/(hi - lo))`.
    #[inline]
    pub(crate) fn hat_moments(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let (mut m_lo, mut m_hi) = (0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = w * f(mid + half * x);
            let s = 0.5 * (1.0 + x);
            m_lo += v * (1.0 - s);
            m_hi += v * s;
        }
        let scale = half.powf(1.0 + self.left + self.right);
        (m_lo * scale, m_hi * scale)
    }
}

/// `d^p - (d-1)^p` for `d ≥ 1`, without cancellation for large `d`.
fn pow_step_diff(d: f64, p: f64) -> f64 {
    if d <= 1.0 {
        return d.powf(p) - (d - 1.0).max(0.0).powf(p);
    }
    -d.powf(p) * (p * (-1.0 / d).ln_1p()).exp_m1()
}

/// Hat-function moments of the Abel kernel `u^{α-1}` over the unit panel
/// `u ∈ [d-1, d]`: returns `(far, near)` where `far` belongs to the node at
/// `u = d` and `near` to the node at `u = d-1`.
pub(crate) fn abel_panel(d: usize, alpha: f64) -> (f64, f64) {
    debug_assert!(d >= 1);
    let df = d as f64;
    let s0 = pow_step_diff(df, alpha) / alpha;
    let s1 = pow_step_diff(df, alpha + 1.0) / (alpha + 1.0);
    let far = s1 - (df - 1.0) * s0;
    let near = df * s0 - s1;
    (far, near)
}

/// Per-distance Abel panel moments for `d = 1..=n`, index `d`.
#[derive(Debug, Clone)]
pub(crate) struct AbelTable {
    far: Vec<f64>,
    near: Vec<f64>,
}

impl AbelTable {
    pub(crate) fn new(n: usize, alpha: f64) -> Self {
        let mut far = vec![0.0; n + 1];
        let mut near = vec![0.0; n + 1];
        for d in 1..=n {
            let (f, nr) = abel_panel(d, alpha);
            far[d] = f;
            near[d] = nr;
        }
        Self { far, near }
    }

    /// Weight of node `k` in `∫_{lo}^{i} (i - v)^{α-1} φ(v) dv`, unit step, where
    /// the integration starts at node `lo ≤ k ≤ i`.
    #[inline]
    pub(crate) fn weight(&self, i: usize, lo: usize, k: usize) -> f64 {
        let mut w = 0.0;
        if k < i {
            w += self.far[i - k];
        }
        if k > lo {
            w += self.near[i - k + 1];
        }
        w
    }

    /// Weight of node `k` when only the panels in `[lo, hi]` are integrated (target `i ≥ hi`).
    #[inline]
    pub(crate) fn partial_weight(&self, i: usize, lo: usize, hi: usize, k: usize) -> f64 {
        let mut w = 0.0;
        if k < hi {
            w += self.far[i - k];
        }
        if k > lo {
            w += self.near[i - k + 1];
        }
        w
    }
}

/// Hat-function moments of `v^p (m - v)^q` over `[0, m]`, for every `m` up to a bound.
///
/// Row `m` holds `m + 1` weights. Panels touching a singular end use Gauss-Jacobi
/// rules carrying that end's exponent; interior panels use Gauss-Legendre.
#[derive(Debug, Clone)]
pub(crate) struct WeightedMomentTable {
    offsets: Vec<usize>,
    data: Vec<f64>,
}

pub(crate) const SINGULAR_PANEL_NODES: usize = 32;
const INTERIOR_PANEL_NODES: usize = 12;

impl WeightedMomentTable {
    pub(crate) fn new(max_m: usize, p: f64, q: f64) -> Self {
        let both = PanelRule::jacobi(SINGULAR_PANEL_NODES, p, q);
        let left = PanelRule::jacobi(SINGULAR_PANEL_NODES, p, 0.0);
        let right = PanelRule::jacobi(SINGULAR_PANEL_NODES, 0.0, q);
        let interior = PanelRule::legendre(INTERIOR_PANEL_NODES);

        let rows: Vec<Vec<f64>> = (0..=max_m)
            .into_par_iter()
            .map(|m| {
                if m == 0 {
                    return vec![0.0];
                }
                let mf = m as f64;
                let mut row = vec![0.0; m + 1];
                if m == 1 {
                    let (a, b) = both.hat_moments(0.0, 1.0, |_| 1.0);
                    row[0] = a;
                    row[1] = b;
                    return row;
                }
                for k in 0..m {
                    let lo = k as f64;
                    let hi = lo + 1.0;
                    let (a, b) = if k == 0 {
                        left.hat_moments(lo, hi, |v| (mf - v).powf(q))
                    } else if k == m - 1 {
                        right.hat_moments(lo, hi, |v| v.powf(p))
                    } else {
                        interior.hat_moments(lo, hi, |v| v.powf(p) * (mf - v).powf(q))
                    };
                    row[k] += a;
                    row[k + 1] += b;
                }
                row
            })
            .collect();

        let mut offsets = Vec::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        for row in rows {
            offsets.push(data.len());
            data.extend(row);
        }
        Self { offsets, data }
    }

    #[inline]
    pub(crate) fn row(&self, m: usize) -> &[f64] {
        &self.data[self.offsets[m]..self.offsets[m] + m + 1]
    }
}
