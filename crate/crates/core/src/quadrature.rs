//! Composite Simpson quadrature on boxes.
//!
//! Axis rules may be split at breakpoints so that piecewise-smooth integrands
//! (partition-of-unity ramps, clamped densities) keep the full Simpson order.
//! Tensor sums run in parallel over the first axis and are combined by a
//! pairwise reduction in a fixed order, so results do not depend on the
//! thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::{Error, Result};

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisRule {
    /// Composite Simpson on `[a, b]` with `n` nodes (odd, at least 3).
    pub fn simpson(a: f64, b: f64, n: usize) -> AxisRule {
        assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd node count >= 3, got {n}");
        let h = (b - a) / (n - 1) as f64;
        let nodes = (0..n)
            .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
            .collect();
        let weights = (0..n)
            .map(|i| {
                let w = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * h / 3.0
            })
            .collect();
        AxisRule { nodes, weights }
    }

    /// Simpson on each segment between consecutive `breaks`, with
    /// `intervals` (even) subintervals per segment; shared endpoints merged.
    pub fn piecewise(breaks: &[f64], intervals: usize) -> AxisRule {
        assert!(breaks.len() >= 2);
        assert!(intervals >= 2 && intervals % 2 == 0);
        let mut nodes: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for seg in breaks.windows(2) {
            if seg[1] <= seg[0] {
                continue;
            }
            let r = AxisRule::simpson(seg[0], seg[1], intervals + 1);
            let skip = if nodes.is_empty() {
                0
            } else {
                *weights.last_mut().unwrap() += r.weights[0];
                1
            };
            nodes.extend_from_slice(&r.nodes[skip..]);
            weights.extend_from_slice(&r.weights[skip..]);
        }
        AxisRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Tensor-product Simpson grid on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes: Vec<usize>,
}

/// Node count per axis used when none is configured.
pub const DEFAULT_NODES: usize = 201;

impl QuadratureGrid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, nodes: Vec<usize>) -> Result<QuadratureGrid> {
        if lower.len() != upper.len() || lower.len() != nodes.len() || lower.is_empty() {
            return Err(Error::Invalid("grid bounds and node counts must have equal, nonzero length".into()));
        }
        for ((a, b), n) in lower.iter().zip(&upper).zip(&nodes) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Invalid(format!("grid axis [{a}, {b}] is empty or not finite")));
            }
            if *n < 3 || n % 2 == 0 {
                return Err(Error::Invalid(format!("grid node count {n} must be odd and at least 3")));
            }
        }
        Ok(QuadratureGrid { lower, upper, nodes })
    }

    pub fn uniform(lower: Vec<f64>, upper: Vec<f64>, nodes: usize) -> Result<QuadratureGrid> {
        let n = vec![nodes; lower.len()];
        QuadratureGrid::new(lower, upper, n)
    }

    /// Halve every spacing: `n` nodes become `2n - 1`.
    pub fn refined(&self) -> QuadratureGrid {
        QuadratureGrid {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            nodes: self.nodes.iter().map(|n| 2 * n - 1).collect(),
        }
    }

    pub fn contains_box(&self, lower: &[f64], upper: &[f64]) -> bool {
        lower.len() == self.lower.len()
            && lower.iter().zip(&self.lower).all(|(a, g)| a >= g)
            && upper.iter().zip(&self.upper).all(|(b, g)| b <= g)
    }

    pub fn axes(&self) -> Vec<AxisRule> {
        self.lower
            .iter()
            .zip(&self.upper)
            .zip(&self.nodes)
            .map(|((&a, &b), &n)| AxisRule::simpson(a, b, n))
            .collect()
    }

    pub fn integrate<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(&[f64]) -> Result<Complex64> + Sync,
    {
        integrate_tensor(&self.axes(), f)
    }
}

/// Sum `w(x) f(x)` over the tensor product of the axis rules.
pub fn integrate_tensor<F>(axes: &[AxisRule], f: F) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Result<Complex64> + Sync,
{
    assert!(!axes.is_empty());
    let first = &axes[0];
    let rest = &axes[1..];
    let rows: Vec<Complex64> = (0..first.len())
        .into_par_iter()
        .map(|i| {
            let mut point = vec![0.0; axes.len()];
            point[0] = first.nodes[i];
            let inner = sum_rest(rest, &mut point, 1, &f)?;
            Ok(inner * first.weights[i])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&rows))
}

fn sum_rest<F>(rest: &[AxisRule], point: &mut [f64], axis: usize, f: &F) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Result<Complex64>,
{
    if rest.is_empty() {
        return f(point);
    }
    let rule = &rest[0];
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        point[axis] = *x;
        acc += sum_rest(&rest[1..], point, axis + 1, f)? * *w;
    }
    Ok(acc)
}

/// Pairwise (tree) summation in index order.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let r = AxisRule::simpson(-1.0, 2.0, 5);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(3)).sum();
        assert!((s - (16.0 - 1.0) / 4.0).abs() < 1e-13);
    }

    #[test]
    fn piecewise_rule_merges_endpoints() {
        let r = AxisRule::piecewise(&[0.0, 1.0, 3.0], 4);
        assert_eq!(r.len(), 9);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 3.0).abs() < 1e-14);
    }

    #[test]
    fn tensor_integral_of_product() {
        let g = QuadratureGrid::uniform(vec![0.0, 0.0], vec![1.0, 2.0], 21).unwrap();
        let v = g
            .integrate(|x| Ok(Complex64::new(x[0] * x[1] * x[1], x[0])))
            .unwrap();
        assert!((v.re - 0.5 * 8.0 / 3.0).abs() < 1e-13);
        assert!((v.im - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_even_node_counts() {
        assert!(QuadratureGrid::uniform(vec![0.0], vec![1.0], 4).is_err());
    }
}
