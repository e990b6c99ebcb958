use num_traits::ToPrimitive;

use super::{Atom, Expr, Func, Symbol};

#[derive(Clone, Debug)]
enum Node {
    Sum(Vec<(f64, Vec<(Factor, i32)>)>),
}

#[derive(Clone, Debug)]
enum Factor {
    Slot(usize),
    Func(Func, Box<Node>),
    Recip(Box<Node>),
}

/// An expression lowered to floating point with symbols bound to slot indices.
#[derive(Clone, Debug)]
pub struct Compiled {
    node: Node,
    slots: Vec<Symbol>,
}

impl Compiled {
    /// Compiles with slots for exactly the symbols of `expr`, in sorted order.
    pub fn new(expr: &Expr) -> Self {
        let slots: Vec<Symbol> = expr.symbols().into_iter().collect();
        Compiled::with_slots(expr, &slots).expect("all symbols present")
    }

    /// Compiles against a caller-provided slot layout; `None` if a symbol is missing.
    pub fn with_slots(expr: &Expr, slots: &[Symbol]) -> Option<Self> {
        Some(Compiled { node: lower(expr, slots)?, slots: slots.to_vec() })
    }

    pub fn slots(&self) -> &[Symbol] {
        &self.slots
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        eval_node(&self.node, values)
    }

    /// Evaluates with values looked up per slot; `None` when a symbol is unbound.
    pub fn eval_with(&self, lookup: impl Fn(&Symbol) -> Option<f64>) -> Option<f64> {
        let values: Option<Vec<f64>> = self.slots.iter().map(&lookup).collect();
        Some(self.eval(&values?))
    }
}

impl Expr {
    pub fn eval(&self, lookup: impl Fn(&Symbol) -> Option<f64>) -> Option<f64> {
        Compiled::new(self).eval_with(lookup)
    }
}

fn lower(expr: &Expr, slots: &[Symbol]) -> Option<Node> {
    let mut terms = Vec::with_capacity(expr.num_terms());
    for (m, c) in expr.terms() {
        let mut factors = Vec::with_capacity(m.factors().len());
        for (atom, e) in m.factors() {
            let f = match atom {
                Atom::Sym(s) => Factor::Slot(slots.iter().position(|x| x == s)?),
                Atom::Func(func, arg) => Factor::Func(*func, Box::new(lower(arg, slots)?)),
                Atom::Recip(sum) => Factor::Recip(Box::new(lower(sum, slots)?)),
            };
            factors.push((f, *e));
        }
        terms.push((c.to_f64().unwrap_or(f64::NAN), factors));
    }
    Some(Node::Sum(terms))
}

fn eval_node(node: &Node, values: &[f64]) -> f64 {
    let Node::Sum(terms) = node;
    let mut acc = 0.0;
    for (c, factors) in terms {
        let mut p = *c;
        for (f, e) in factors {
            let v = match f {
                Factor::Slot(i) => values[*i],
                Factor::Func(Func::Sin, a) => eval_node(a, values).sin(),
                Factor::Func(Func::Cos, a) => eval_node(a, values).cos(),
                Factor::Func(Func::Exp, a) => eval_node(a, values).exp(),
                Factor::Recip(a) => 1.0 / eval_node(a, values),
            };
            p *= v.powi(*e);
        }
        acc += p;
    }
    acc
}
