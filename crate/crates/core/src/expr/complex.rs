use std::ops;

use num_complex::Complex64;

use super::{EvalError, Expression, Variables};

/// A complex-valued function of the coordinates, stored as real and
/// imaginary parts.
#[derive(Debug, Clone)]
pub struct ComplexExpr {
    pub re: Expression,
    pub im: Expression,
}

impl ComplexExpr {
    pub fn new(re: Expression, im: Expression) -> ComplexExpr {
        assert!(re.same_variables(&im), "real and imaginary parts over different coordinates");
        ComplexExpr { re, im }
    }

    pub fn real(re: Expression) -> ComplexExpr {
        let im = Expression::zero(re.variables());
        ComplexExpr { re, im }
    }

    pub fn constant(z: Complex64, vars: &Variables) -> ComplexExpr {
        ComplexExpr {
            re: Expression::constant(z.re, vars),
            im: Expression::constant(z.im, vars),
        }
    }

    pub fn zero(vars: &Variables) -> ComplexExpr {
        ComplexExpr::constant(Complex64::new(0.0, 0.0), vars)
    }

    pub fn variables(&self) -> &Variables {
        self.re.variables()
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<Complex64, EvalError> {
        Ok(Complex64::new(self.re.evaluate(point)?, self.im.evaluate(point)?))
    }

    pub fn conj(&self) -> ComplexExpr {
        ComplexExpr {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    pub fn partial(&self, index: usize) -> ComplexExpr {
        ComplexExpr {
            re: self.re.partial(index),
            im: self.im.partial(index),
        }
    }

    /// Multiply by a real-valued expression.
    pub fn scale_by(&self, f: &Expression) -> ComplexExpr {
        ComplexExpr {
            re: f * &self.re,
            im: f * &self.im,
        }
    }

    /// Multiply by `i * f` for a real expression `f`.
    pub fn times_i(&self, f: &Expression) -> ComplexExpr {
        ComplexExpr {
            re: -(f * &self.im),
            im: f * &self.re,
        }
    }

    pub fn scale_complex(&self, z: Complex64) -> ComplexExpr {
        ComplexExpr {
            re: self.re.scale(z.re) - self.im.scale(z.im),
            im: self.re.scale(z.im) + self.im.scale(z.re),
        }
    }

    /// Directional derivative `X(s) = sum_i X^i d_i s`.
    pub fn directional(&self, components: &[Expression]) -> ComplexExpr {
        assert_eq!(components.len(), self.re.dimension());
        let mut re = Expression::zero(self.variables());
        let mut im = Expression::zero(self.variables());
        for (i, x) in components.iter().enumerate() {
            if x.as_constant() == Some(0.0) {
                continue;
            }
            re = re + x * self.re.partial(i);
            im = im + x * self.im.partial(i);
        }
        ComplexExpr { re, im }
    }

    pub fn node_count(&self) -> usize {
        super::Tape::compile(&[self.re.clone(), self.im.clone()]).len()
    }
}

impl ops::Add<&ComplexExpr> for &ComplexExpr {
    type Output = ComplexExpr;
    fn add(self, rhs: &ComplexExpr) -> ComplexExpr {
        ComplexExpr {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl ops::Sub<&ComplexExpr> for &ComplexExpr {
    type Output = ComplexExpr;
    fn sub(self, rhs: &ComplexExpr) -> ComplexExpr {
        ComplexExpr {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl ops::Mul<&ComplexExpr> for &ComplexExpr {
    type Output = ComplexExpr;
    fn mul(self, rhs: &ComplexExpr) -> ComplexExpr {
        ComplexExpr {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl ops::Neg for &ComplexExpr {
    type Output = ComplexExpr;
    fn neg(self) -> ComplexExpr {
        ComplexExpr {
            re: -&self.re,
            im: -&self.im,
        }
    }
}
