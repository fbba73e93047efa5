use super::Node;

// Binding strength used to decide where parentheses are needed.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn strength(node: &Node) -> u8 {
    match node {
        Node::Const(v) if v.is_sign_negative() => UNARY,
        Node::Const(_) | Node::Var(_) | Node::Call(..) => ATOM,
        Node::Add(..) | Node::Sub(..) => SUM,
        Node::Mul(..) | Node::Div(..) => PRODUCT,
        Node::Neg(_) => UNARY,
        Node::Pow(..) => POWER,
    }
}

pub(crate) fn render(node: &Node, vars: &[String]) -> String {
    let mut out = String::new();
    write_node(node, vars, &mut out);
    out
}

fn write_child(node: &Node, min: u8, vars: &[String], out: &mut String) {
    if strength(node) < min {
        out.push('(');
        write_node(node, vars, out);
        out.push(')');
    } else {
        write_node(node, vars, out);
    }
}

fn write_number(v: f64, out: &mut String) {
    out.push_str(&format!("{v}"));
}

fn write_node(node: &Node, vars: &[String], out: &mut String) {
    match node {
        Node::Const(v) => write_number(*v, out),
        Node::Var(i) => out.push_str(&vars[*i]),
        Node::Add(a, b) | Node::Sub(a, b) => {
            write_child(a, SUM, vars, out);
            out.push_str(if matches!(node, Node::Add(..)) { " + " } else { " - " });
            write_child(b, PRODUCT, vars, out);
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            write_child(a, PRODUCT, vars, out);
            out.push(if matches!(node, Node::Mul(..)) { '*' } else { '/' });
            write_child(b, UNARY, vars, out);
        }
        Node::Neg(a) => {
            out.push('-');
            write_child(a, UNARY, vars, out);
        }
        Node::Pow(a, r) => {
            write_child(a, ATOM, vars, out);
            out.push('^');
            write_number(*r, out);
        }
        Node::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_node(a, vars, out);
            out.push(')');
        }
    }
}
