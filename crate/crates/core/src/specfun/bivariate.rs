//! Extended generalized bivariate Meijer G function.
//!
//! G[x, y] = (1/(2πi)²) ∫∫ Φ_outer(u + v) Φ_1(u) Φ_2(v) x^{−u} y^{−v} du dv,
//!
//! where each Φ is the Mellin–Barnes kernel of a univariate parameter block
//! (see [`MeijerGSpec::log_kernel`]). With u = c₁ + it₁ and v = c₂ + it₂ the
//! integral becomes (1/4π²) ∫∫ (…) dt₁ dt₂ over the plane, and conjugate
//! symmetry of the integrand lets the t₂ < 0 half be folded onto t₂ > 0.
//!
//! Evaluation is a plain tensor product of Gauss–Legendre panels over the
//! truncated square |t₁|, |t₂| ≤ T, refined by halving the panel width until
//! two successive levels agree.

use num_complex::Complex64;

use super::meijer::MeijerGSpec;
use super::quad::gauss_legendre;
use super::{QuadratureConfig, Result, SpecfunError};

const POINTS_PER_PANEL: usize = 8;
const INITIAL_PANEL_WIDTH: f64 = 0.5;
const INITIAL_TRUNCATION: f64 = 32.0;
const REFINEMENT_TOL: f64 = 1e-6;
const MAX_NODES: usize = 1 << 25;

/// Three parameter blocks: the kernel of u + v and the kernels of u and v.
#[derive(Debug, Clone, PartialEq)]
pub struct EgbmgfSpec {
    pub outer: MeijerGSpec,
    pub inner1: MeijerGSpec,
    pub inner2: MeijerGSpec,
}

impl EgbmgfSpec {
    pub fn new(outer: MeijerGSpec, inner1: MeijerGSpec, inner2: MeijerGSpec) -> Self {
        Self { outer, inner1, inner2 }
    }

    /// Contour abscissae (c₁, c₂): each inner line inside its own interval,
    /// their sum inside the outer block's interval, with the smallest slack
    /// to any bound made as large as possible.
    pub fn contour_abscissae(&self) -> Result<(f64, f64)> {
        let (lo1, hi1) = self.inner1.contour_interval()?;
        let (lo2, hi2) = self.inner2.contour_interval()?;
        let (lo_o, hi_o) = self.outer.raw_contour_interval();
        let slack = [
            0.5 * (hi1 - lo1),
            0.5 * (hi2 - lo2),
            (hi_o - lo1 - lo2) / 3.0,
            (hi1 + hi2 - lo_o) / 3.0,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        if !(slack > 0.0) {
            return Err(SpecfunError::EmptyContour { left: lo_o, right: hi_o });
        }
        let base1 = lo1 + slack;
        let base2 = lo2 + slack;
        let room1 = (hi1 - slack) - base1;
        let room2 = (hi2 - slack) - base2;
        let sum_lo = (lo_o + slack).max(base1 + base2);
        let sum_hi = (hi_o - slack).min(base1 + base2 + room1 + room2);
        let target = if sum_lo.is_finite() && sum_hi.is_finite() {
            0.5 * (sum_lo + sum_hi)
        } else {
            // Unconstrained sum: centre both lines in their own intervals.
            base1 + base2 + 0.5 * (room1 + room2)
        };
        let extra = target - base1 - base2;
        let share = if room1 + room2 > 0.0 { room1 / (room1 + room2) } else { 0.5 };
        Ok((base1 + extra * share, base2 + extra * (1.0 - share)))
    }
}

/// Values of ln(Φ(c + it) w^{−c−it}) at the nodes of one axis.
fn axis_factor(
    spec: &MeijerGSpec,
    c: f64,
    ln_w: f64,
    nodes: &[f64],
) -> Result<Vec<Option<Complex64>>> {
    nodes
        .iter()
        .map(|&t| {
            let s = Complex64::new(c, t);
            Ok(spec.log_kernel(s)?.map(|lk| lk - s * ln_w))
        })
        .collect()
}

struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn composite_grid(lo: f64, hi: f64, width: f64, rule: &(Vec<f64>, Vec<f64>)) -> Grid {
    let panels = ((hi - lo) / width).round() as usize;
    let half = 0.5 * width;
    let mut nodes = Vec::with_capacity(panels * rule.0.len());
    let mut weights = Vec::with_capacity(panels * rule.0.len());
    for k in 0..panels {
        let mid = lo + (k as f64 + 0.5) * width;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    Grid { nodes, weights }
}

/// Integral over |t₁| ≤ T, 0 ≤ t₂ ≤ T, with the contribution of nodes
/// outside the inner square max(|t₁|, t₂) ≤ T/2 reported separately.
fn tensor_sum(
    spec: &EgbmgfSpec,
    (c1, c2): (f64, f64),
    (ln_x, ln_y): (f64, f64),
    truncation: f64,
    width: f64,
) -> Result<(Complex64, Complex64)> {
    let rule = gauss_legendre(POINTS_PER_PANEL);
    let g1 = composite_grid(-truncation, truncation, width, &rule);
    let g2 = composite_grid(0.0, truncation, width, &rule);
    let nodes = g1.nodes.len() * g2.nodes.len();
    if nodes > MAX_NODES {
        return Err(SpecfunError::CostCeiling { nodes });
    }
    let f1 = axis_factor(&spec.inner1, c1, ln_x, &g1.nodes)?;
    let f2 = axis_factor(&spec.inner2, c2, ln_y, &g2.nodes)?;
    let half = 0.5 * truncation;

    let mut total = Complex64::new(0.0, 0.0);
    let mut ring = Complex64::new(0.0, 0.0);
    for (j, (&t2, &w2)) in g2.nodes.iter().zip(&g2.weights).enumerate() {
        let Some(l2) = f2[j] else { continue };
        let mut row = Complex64::new(0.0, 0.0);
        let mut row_ring = Complex64::new(0.0, 0.0);
        for (i, (&t1, &w1)) in g1.nodes.iter().zip(&g1.weights).enumerate() {
            let Some(l1) = f1[i] else { continue };
            let s = Complex64::new(c1 + c2, t1 + t2);
            let Some(lo) = spec.outer.log_kernel(s)? else { continue };
            let v = (lo + l1 + l2).exp() * w1;
            row += v;
            if t1.abs() > half || t2 > half {
                row_ring += v;
            }
        }
        total += row * w2;
        ring += row_ring * w2;
    }
    Ok((total, ring))
}

/// Extended generalized bivariate Meijer G function at x, y > 0.
pub fn egbmgf(spec: &EgbmgfSpec, x: f64, y: f64, cfg: &QuadratureConfig) -> Result<f64> {
    for (what, v) in [("EGBMGF first argument", x), ("EGBMGF second argument", y)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(SpecfunError::Domain { what, value: v });
        }
    }
    let contour = spec.contour_abscissae()?;
    let logs = (x.ln(), y.ln());
    let tol = cfg.contour_truncation_tol.max(1e-15);

    // Truncation first, at the coarse panel width.
    let mut truncation = INITIAL_TRUNCATION;
    let mut width = INITIAL_PANEL_WIDTH;
    let (mut coarse, ring) = tensor_sum(spec, contour, logs, truncation, width)?;
    let mut ring = ring;
    while ring.norm() > tol * coarse.norm() {
        truncation *= 2.0;
        if truncation > 4096.0 {
            return Err(SpecfunError::NotConverged { ceiling: 4096.0 });
        }
        (coarse, ring) = tensor_sum(spec, contour, logs, truncation, width)?;
    }

    // Then refinement doubling of the node density.
    loop {
        width *= 0.5;
        let (fine, _) = tensor_sum(spec, contour, logs, truncation, width)?;
        let change = (fine.re - coarse.re).abs();
        if change <= REFINEMENT_TOL * fine.re.abs() {
            return finish(fine);
        }
        coarse = fine;
    }
}

fn finish(total: Complex64) -> Result<f64> {
    // Folding t₂ < 0 onto t₂ > 0 doubles the real part.
    let value = 2.0 * total.re / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
    if !value.is_finite() {
        return Err(SpecfunError::NonFiniteIntegrand { at: f64::NAN });
    }
    Ok(value)
}
