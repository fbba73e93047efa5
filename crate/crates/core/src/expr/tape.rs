use std::collections::HashMap;
use std::sync::Arc;

use super::{finite, pow_checked, EvalError, Expression, Func, Node};

#[derive(Debug, Clone, Copy)]
enum Instr {
    Const(f64),
    Var(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Pow(usize, f64),
    Call(Func, usize),
}

/// Straight-line program evaluating one or more expressions, with shared
/// subtrees computed once.
#[derive(Debug, Clone)]
pub struct Tape {
    instrs: Vec<Instr>,
    outputs: Vec<usize>,
    dim: usize,
}

impl Tape {
    /// Compile several expressions over the same coordinates into one tape.
    pub fn compile(exprs: &[Expression]) -> Tape {
        let dim = exprs.first().map_or(0, |e| e.dimension());
        let mut instrs = Vec::new();
        let mut seen: HashMap<*const Node, usize> = HashMap::new();
        let outputs = exprs
            .iter()
            .map(|e| {
                assert_eq!(e.dimension(), dim, "tape expressions must share coordinates");
                emit(&e.root, &mut instrs, &mut seen)
            })
            .collect();
        Tape { instrs, outputs, dim }
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluate every output at `point`, writing into `out`. `regs` is scratch
    /// space reused across calls.
    pub fn eval_into(&self, point: &[f64], regs: &mut Vec<f64>, out: &mut [f64]) -> Result<(), EvalError> {
        if point.len() != self.dim {
            return Err(EvalError::PointDimension {
                expected: self.dim,
                got: point.len(),
            });
        }
        regs.clear();
        regs.reserve(self.instrs.len());
        for instr in &self.instrs {
            let v = match *instr {
                Instr::Const(v) => v,
                Instr::Var(i) => point[i],
                Instr::Add(a, b) => regs[a] + regs[b],
                Instr::Sub(a, b) => regs[a] - regs[b],
                Instr::Mul(a, b) => regs[a] * regs[b],
                Instr::Div(a, b) => {
                    if regs[b] == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    regs[a] / regs[b]
                }
                Instr::Neg(a) => -regs[a],
                Instr::Pow(a, r) => pow_checked(regs[a], r)?,
                Instr::Call(f, a) => f.apply(regs[a])?,
            };
            regs.push(finite(v)?);
        }
        for (slot, &idx) in out.iter_mut().zip(&self.outputs) {
            *slot = regs[idx];
        }
        Ok(())
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut regs = Vec::new();
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(point, &mut regs, &mut out)?;
        Ok(out)
    }

    pub fn eval_scalar(&self, point: &[f64]) -> Result<f64, EvalError> {
        let mut regs = Vec::new();
        let mut out = [0.0];
        self.eval_into(point, &mut regs, &mut out)?;
        Ok(out[0])
    }
}

fn emit(node: &Arc<Node>, instrs: &mut Vec<Instr>, seen: &mut HashMap<*const Node, usize>) -> usize {
    let key = Arc::as_ptr(node);
    if let Some(&i) = seen.get(&key) {
        return i;
    }
    let instr = match &**node {
        Node::Const(v) => Instr::Const(*v),
        Node::Var(i) => Instr::Var(*i),
        Node::Add(a, b) => {
            let (a, b) = (emit(a, instrs, seen), emit(b, instrs, seen));
            Instr::Add(a, b)
        }
        Node::Sub(a, b) => {
            let (a, b) = (emit(a, instrs, seen), emit(b, instrs, seen));
            Instr::Sub(a, b)
        }
        Node::Mul(a, b) => {
            let (a, b) = (emit(a, instrs, seen), emit(b, instrs, seen));
            Instr::Mul(a, b)
        }
        Node::Div(a, b) => {
            let (a, b) = (emit(a, instrs, seen), emit(b, instrs, seen));
            Instr::Div(a, b)
        }
        Node::Neg(a) => Instr::Neg(emit(a, instrs, seen)),
        Node::Pow(a, r) => Instr::Pow(emit(a, instrs, seen), *r),
        Node::Call(f, a) => Instr::Call(*f, emit(a, instrs, seen)),
    };
    instrs.push(instr);
    let idx = instrs.len() - 1;
    seen.insert(key, idx);
    idx
}
