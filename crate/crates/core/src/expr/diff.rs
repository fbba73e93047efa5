use std::sync::Arc;

use super::{add, c, call, div, mul, neg, pow, sub, Func, Node};

/// Exact partial derivative of `node` with respect to variable `var`.
pub(crate) fn derivative(node: &Arc<Node>, var: usize) -> Arc<Node> {
    if !node.mentions(var) {
        return c(0.0);
    }
    match &**node {
        Node::Const(_) => c(0.0),
        Node::Var(i) => c(if *i == var { 1.0 } else { 0.0 }),
        Node::Add(a, b) => add(derivative(a, var), derivative(b, var)),
        Node::Sub(a, b) => sub(derivative(a, var), derivative(b, var)),
        Node::Mul(a, b) => add(
            mul(derivative(a, var), b.clone()),
            mul(a.clone(), derivative(b, var)),
        ),
        Node::Div(a, b) => {
            // (a/b)' = a'/b - a b' / b^2
            let da = derivative(a, var);
            let db = derivative(b, var);
            sub(
                div(da, b.clone()),
                div(mul(a.clone(), db), pow(b.clone(), 2.0)),
            )
        }
        Node::Neg(a) => neg(derivative(a, var)),
        Node::Pow(a, r) => mul(
            mul(c(*r), pow(a.clone(), r - 1.0)),
            derivative(a, var),
        ),
        Node::Call(f, a) => {
            let inner = derivative(a, var);
            let outer = match f {
                Func::Sin => call(Func::Cos, a.clone()),
                Func::Cos => neg(call(Func::Sin, a.clone())),
                Func::Exp => node.clone(),
                Func::Log => div(c(1.0), a.clone()),
                Func::Sqrt => div(c(0.5), node.clone()),
            };
            mul(outer, inner)
        }
    }
}
