//! Seeded random functions, fields and sections for the property suites.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{ComplexExpr, Expression, Variables};
use crate::geometry::{Chart, VectorField};
use crate::prequantum::Section;
use crate::sampling;

pub struct Corpus {
    rng: ChaCha8Rng,
}

impl Corpus {
    pub fn new(seed: u64) -> Corpus {
        Corpus {
            rng: sampling::rng(seed),
        }
    }

    fn coefficient(&mut self) -> f64 {
        // keep coefficients away from zero so terms do not silently vanish
        let m: f64 = self.rng.gen_range(0.25..1.0);
        if self.rng.gen_bool(0.5) {
            m
        } else {
            -m
        }
    }

    fn monomial(&mut self, vars: &Variables, degree: usize) -> Expression {
        let mut e = Expression::constant(self.coefficient(), vars);
        for _ in 0..degree {
            let i = self.rng.gen_range(0..vars.len());
            e = e * Expression::coordinate(i, vars);
        }
        e
    }

    /// Sum of `terms` monomials of degree at most `max_degree`.
    pub fn polynomial(&mut self, vars: &Variables, max_degree: usize, terms: usize) -> Expression {
        let mut e = Expression::zero(vars);
        for _ in 0..terms {
            let d = self.rng.gen_range(1..=max_degree);
            e = e + self.monomial(vars, d);
        }
        e
    }

    /// A polynomial in the listed coordinates only.
    pub fn polynomial_in(&mut self, vars: &Variables, indices: &[usize], max_degree: usize, terms: usize) -> Expression {
        let mut e = Expression::constant(self.coefficient(), vars);
        for _ in 0..terms {
            let d = self.rng.gen_range(1..=max_degree);
            let mut m = Expression::constant(self.coefficient(), vars);
            for _ in 0..d {
                let i = indices[self.rng.gen_range(0..indices.len())];
                m = m * Expression::coordinate(i, vars);
            }
            e = e + m;
        }
        e
    }

    fn linear(&mut self, vars: &Variables) -> Expression {
        let mut e = Expression::constant(self.rng.gen_range(-0.5..0.5), vars);
        for i in 0..vars.len() {
            e = e + Expression::coordinate(i, vars).scale(self.rng.gen_range(-1.0..1.0));
        }
        e
    }

    /// A polynomial plus bounded transcendental terms.
    pub fn smooth(&mut self, vars: &Variables) -> Expression {
        let p = self.polynomial(vars, 3, 3);
        let s = self.linear(vars).sin().scale(self.coefficient());
        let x = self.linear(vars).scale(0.3).exp().scale(self.coefficient());
        let c = self.linear(vars).cos().scale(self.coefficient());
        p + s + x + c
    }

    /// A vector field with polynomial components.
    pub fn vector_field(&mut self, chart: &Arc<Chart>, max_degree: usize) -> VectorField {
        let vars = chart.variables().clone();
        let comps = (0..chart.dimension())
            .map(|_| self.polynomial(&vars, max_degree, 2))
            .collect();
        VectorField::new(chart, comps).expect("components over the chart")
    }

    /// A smooth complex section without support restriction.
    pub fn section(&mut self, chart: &Arc<Chart>) -> Section {
        let vars = chart.variables().clone();
        let re = self.polynomial(&vars, 2, 2) + self.linear(&vars).sin();
        let im = self.polynomial(&vars, 2, 2) + self.linear(&vars).scale(0.3).exp();
        Section::symbolic(chart, ComplexExpr::new(re, im)).expect("section over the chart")
    }

    /// `a(q) p + b(q)` on a one-degree-of-freedom chart `(q, p)`.
    pub fn affine_in_momentum(&mut self, vars: &Variables) -> Expression {
        let a = self.polynomial_in(vars, &[0], 3, 2);
        let b = self.polynomial_in(vars, &[0], 3, 2);
        a * Expression::coordinate(1, vars) + b
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
