//! Gauss-Legendre panels and a globally adaptive integrator.
//!
//! Each panel is estimated by comparing one Gauss-Legendre application on the
//! whole panel against the same rule on its two halves. The refined value is
//! kept and the difference is the panel's error estimate. The panel with the
//! largest estimate is split until the total meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let m = order;
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(m, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[m - 1 - i] = x;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub error: f64,
}

impl Panel {
    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

struct Queued(Panel);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .error
            .total_cmp(&other.0.error)
            .then_with(|| other.0.a.total_cmp(&self.0.a))
    }
}

#[derive(Debug, Clone)]
pub struct QuadOutput {
    pub value: f64,
    pub error: f64,
    /// Accepted panels sorted by left endpoint.
    pub panels: Vec<Panel>,
}

#[derive(Debug, Clone)]
pub struct AdaptiveQuad {
    rule: GaussLegendre,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl AdaptiveQuad {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            rule: GaussLegendre::new(10),
            abs_tol,
            rel_tol,
            max_panels: 20_000,
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.rule = GaussLegendre::new(order);
        self
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    fn panel<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Result<Panel> {
        let mid = 0.5 * (a + b);
        let coarse = self.rule.integrate(f, a, b);
        let fine = self.rule.integrate(f, a, mid) + self.rule.integrate(f, mid, b);
        if !coarse.is_finite() || !fine.is_finite() {
            return Err(Error::QuadratureNonconvergence {
                worst_index: None,
                error_estimate: f64::NAN,
                target: self.abs_tol,
            });
        }
        Ok(Panel {
            a,
            b,
            value: fine,
            error: (fine - coarse).abs(),
        })
    }

    /// Integrates `f` over `[breakpoints[0], breakpoints.last()]`, always
    /// keeping a panel edge at every breakpoint.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, breakpoints: &[f64]) -> Result<QuadOutput> {
        let breaks = sorted_breaks(breakpoints);
        if breaks.len() < 2 {
            return Err(Error::InvalidParameter(
                "integration needs at least two distinct breakpoints".into(),
            ));
        }

        let mut heap = BinaryHeap::new();
        let mut done = Vec::new();
        let mut value = 0.0;
        let mut error = 0.0;
        for w in breaks.windows(2) {
            let p = self.panel(&f, w[0], w[1])?;
            value += p.value;
            error += p.error;
            heap.push(Queued(p));
        }

        let mut count = heap.len();
        loop {
            let target = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= target {
                break;
            }
            let Some(Queued(worst)) = heap.pop() else {
                return Err(Error::QuadratureNonconvergence {
                    worst_index: None,
                    error_estimate: error,
                    target,
                });
            };
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) || worst.width() <= 1e-15 * worst.a.abs().max(1e-300)
            {
                done.push(worst);
                continue;
            }
            if count >= self.max_panels {
                return Err(Error::QuadratureNonconvergence {
                    worst_index: None,
                    error_estimate: error,
                    target,
                });
            }
            let left = self.panel(&f, worst.a, mid)?;
            let right = self.panel(&f, mid, worst.b)?;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            count += 1;
            heap.push(Queued(left));
            heap.push(Queued(right));
        }

        done.extend(heap.into_iter().map(|q| q.0));
        done.sort_by(|p, q| p.a.total_cmp(&q.a));
        // re-sum in a fixed order so results do not depend on heap history
        let value = done.iter().map(|p| p.value).sum();
        let error = done.iter().map(|p| p.error).sum();
        Ok(QuadOutput {
            value,
            error,
            panels: done,
        })
    }
}

fn sorted_breaks(points: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = points.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1.0));
    v
}
