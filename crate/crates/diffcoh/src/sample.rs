//! Sampling smooth forms on the unit torus and circle into cochains.
//!
//! Each simplex integral uses the midpoint rule on a uniformly refined
//! subdivision with one Richardson step, refined until two successive
//! levels agree to within the per-simplex share of `STABILITY`.

use crate::cochain::RealCochain;
use crate::{Error, Result, SimplicialComplex};

/// Target for the summed change between the last two refinement levels.
pub const STABILITY: f64 = 1e-9;
const MAX_LEVEL: u32 = 8;

/// Midpoint rule on `4^level` congruent subtriangles of the triangle
/// `p0, p0 + a, p0 + b`.
fn triangle_midpoint(f: &dyn Fn(f64, f64) -> f64, p0: [f64; 2], a: [f64; 2], b: [f64; 2], level: u32) -> f64 {
    let n = 1usize << level;
    let h = 1.0 / n as f64;
    let area = 0.5 * (a[0] * b[1] - a[1] * b[0]);
    let at = |s: f64, t: f64| f(p0[0] + s * a[0] + t * b[0], p0[1] + s * a[1] + t * b[1]);
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n - i {
            let (s, t) = (i as f64 * h, j as f64 * h);
            sum += at(s + h / 3.0, t + h / 3.0);
            if i + j + 1 < n {
                sum += at(s + 2.0 * h / 3.0, t + 2.0 * h / 3.0);
            }
        }
    }
    sum * area * h * h
}

fn segment_midpoint(f: &dyn Fn(f64) -> f64, level: u32) -> f64 {
    let n = 1usize << level;
    let h = 1.0 / n as f64;
    (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Refines until the Richardson-extrapolated values settle.
fn refine(rule: impl Fn(u32) -> f64, tolerance: f64, what: &str) -> Result<f64> {
    let mut coarse = rule(0);
    let mut previous: Option<f64> = None;
    for level in 1..=MAX_LEVEL {
        let fine = rule(level);
        let extrapolated = (4.0 * fine - coarse) / 3.0;
        if !extrapolated.is_finite() {
            return Err(Error::Sampling(format!("{what}: non-finite integrand")));
        }
        if let Some(p) = previous {
            if (extrapolated - p).abs() <= tolerance {
                return Ok(extrapolated);
            }
        }
        previous = Some(extrapolated);
        coarse = fine;
    }
    Err(Error::Sampling(format!("{what}: not stable after {MAX_LEVEL} refinements")))
}

/// Integrates `f(x, y) dx ^ dy` over each triangle of the `m x n` torus
/// grid, with vertex `(i, j)` at `(i / m, j / n)` in the unit square.
pub fn torus_two_form(m: usize, n: usize, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<(SimplicialComplex, RealCochain)> {
    let complex = SimplicialComplex::torus(m, n)?;
    let (dx, dy) = (1.0 / m as f64, 1.0 / n as f64);
    let tolerance = STABILITY / complex.count(2) as f64;
    let mut values = Vec::with_capacity(complex.count(2));
    for i in 0..m {
        for j in 0..n {
            let p0 = [i as f64 * dx, j as f64 * dy];
            let lower = refine(|l| triangle_midpoint(&f, p0, [dx, 0.0], [dx, dy], l), tolerance, "triangle")?;
            let upper = refine(|l| triangle_midpoint(&f, p0, [dx, dy], [0.0, dy], l), tolerance, "triangle")?;
            values.push(lower);
            values.push(upper);
        }
    }
    let w = RealCochain::from_f64s(&complex, 2, &values)?;
    Ok((complex, w))
}

/// Integrates `ax dx + ay dy` along each oriented edge of the torus grid.
pub fn torus_one_form(
    m: usize,
    n: usize,
    ax: impl Fn(f64, f64) -> f64,
    ay: impl Fn(f64, f64) -> f64,
) -> Result<(SimplicialComplex, RealCochain)> {
    let complex = SimplicialComplex::torus(m, n)?;
    let (dx, dy) = (1.0 / m as f64, 1.0 / n as f64);
    let tolerance = STABILITY / complex.count(1) as f64;
    let mut values = Vec::with_capacity(complex.count(1));
    for i in 0..m {
        for j in 0..n {
            let (x0, y0) = (i as f64 * dx, j as f64 * dy);
            for (ex, ey) in [(dx, 0.0), (0.0, dy), (dx, dy)] {
                let g = |t: f64| {
                    let (x, y) = (x0 + t * ex, y0 + t * ey);
                    ax(x, y) * ex + ay(x, y) * ey
                };
                values.push(refine(|l| segment_midpoint(&g, l), tolerance, "edge")?);
            }
        }
    }
    let a = RealCochain::from_f64s(&complex, 1, &values)?;
    Ok((complex, a))
}

/// Integrates `a(t) dt` along the edges of the `n`-gon circle, with vertex
/// `i` at `t = i / n` on the unit-period circle.
pub fn circle_one_form(n: usize, a: impl Fn(f64) -> f64) -> Result<(SimplicialComplex, RealCochain)> {
    let complex = SimplicialComplex::circle(n)?;
    let h = 1.0 / n as f64;
    let tolerance = STABILITY / n as f64;
    let values = (0..n)
        .map(|i| {
            let g = |t: f64| a((i as f64 + t) * h) * h;
            refine(|l| segment_midpoint(&g, l), tolerance, "edge")
        })
        .collect::<Result<Vec<_>>>()?;
    let c = RealCochain::from_f64s(&complex, 1, &values)?;
    Ok((complex, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn subtriangles_cover_the_triangle() {
        let one = |_: f64, _: f64| 1.0;
        for l in 0..4 {
            let a = triangle_midpoint(&one, [0.0, 0.0], [0.5, 0.0], [0.5, 0.25], l);
            assert!((a - 0.0625).abs() < 1e-15);
        }
    }

    #[test]
    fn periodic_form_total() {
        let (_, w) = torus_two_form(4, 4, |x, y| 2.0 + (2.0 * PI * x).sin() * (2.0 * PI * y).cos()).unwrap();
        let total: f64 = w.to_f64s().iter().sum();
        assert!((total - 2.0).abs() < 1e-9);
    }
}
