//! Closed-form expressions in a handful of real variables.
//!
//! Expressions are parsed from infix text, kept in a light normal form
//! (constant folding, 0/1 elimination, flattened sums and products), and
//! differentiated exactly. Every derivative used downstream (Jacobians, the
//! signed area density and its gradient, second partials) comes from here.

mod diff;
mod eval;
mod parse;
mod render;

pub use eval::Tape;
pub use parse::parse;

use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            _ => return None,
        })
    }

    /// `None` outside the real domain.
    pub fn apply(self, x: f64) -> Option<f64> {
        let y = match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Log if x > 0.0 => x.ln(),
            Func::Sqrt if x >= 0.0 => x.sqrt(),
            Func::Atan => x.atan(),
            _ => return None,
        };
        y.is_finite().then_some(y)
    }
}

/// Expression tree. Values are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Variable slot `index`, displayed as `name`.
    Var(usize, Arc<str>),
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Quotient(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

/// Declared variable names; the position of a name is its slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Vars(Vec<Arc<str>>);

impl Vars {
    pub fn new(names: &[&str]) -> Self {
        assert!(!names.is_empty(), "at least one variable must be declared");
        Vars(names.iter().map(|n| Arc::from(*n)).collect())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| &**n == name)
    }

    pub fn var(&self, index: usize) -> Expr {
        Expr::Var(index, self.0[index].clone())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|n| &**n)
    }
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e)).normalized()
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Sum(vec![a, b]).normalized()
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sum(vec![a, Expr::Neg(Box::new(b))]).normalized()
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Product(vec![a, b]).normalized()
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Quotient(Box::new(a), Box::new(b)).normalized()
    }

    pub fn powi(a: Expr, n: i32) -> Expr {
        Expr::Pow(Box::new(a), n).normalized()
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a)).normalized()
    }

    /// Highest variable slot referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i, _) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
            Expr::Quotient(a, b) => a.max_var().max(b.max_var()),
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().filter_map(Expr::max_var).max(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Var(..) => 0,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.node_count(),
            Expr::Quotient(a, b) => a.node_count() + b.node_count(),
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().map(Expr::node_count).sum(),
        }
    }

    /// Replace variable slot `i` by `replacements[i]`, then renormalize.
    pub fn substitute(&self, replacements: &[Expr]) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(i, _) => replacements[*i].clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(replacements))),
            Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| x.substitute(replacements)).collect()),
            Expr::Product(xs) => {
                Expr::Product(xs.iter().map(|x| x.substitute(replacements)).collect())
            }
            Expr::Quotient(a, b) => Expr::Quotient(
                Box::new(a.substitute(replacements)),
                Box::new(b.substitute(replacements)),
            ),
            Expr::Pow(a, n) => Expr::Pow(Box::new(a.substitute(replacements)), *n),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute(replacements))),
        }
        .normalized()
    }

    /// Bring a tree into the normal form: constants folded, additive and
    /// multiplicative identities removed, nested sums and products flattened,
    /// the numeric coefficient of a product moved to the front and the
    /// constant term of a sum moved to the back.
    pub fn normalized(self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(..) => self,
            Expr::Neg(a) => match a.normalized() {
                Expr::Const(c) => Expr::Const(-c),
                Expr::Neg(inner) => *inner,
                other => Expr::Neg(Box::new(other)),
            },
            Expr::Sum(xs) => normalize_sum(xs),
            Expr::Product(xs) => normalize_product(xs),
            Expr::Quotient(a, b) => {
                let a = a.normalized();
                let b = b.normalized();
                match (a.as_const(), b.as_const()) {
                    (Some(x), Some(y)) if y != 0.0 && (x / y).is_finite() => Expr::Const(x / y),
                    (Some(x), _) if x == 0.0 && b.as_const() != Some(0.0) => Expr::zero(),
                    (_, Some(1.0)) => a,
                    _ => Expr::Quotient(Box::new(a), Box::new(b)),
                }
            }
            Expr::Pow(a, n) => {
                let a = a.normalized();
                match (n, a.as_const()) {
                    (0, _) => Expr::one(),
                    (1, _) => a,
                    (_, Some(c)) if (c != 0.0 || n > 0) && c.powi(n).is_finite() => {
                        Expr::Const(c.powi(n))
                    }
                    _ => Expr::Pow(Box::new(a), n),
                }
            }
            Expr::Call(f, a) => {
                let a = a.normalized();
                if let Some(y) = a.as_const().and_then(|c| f.apply(c)) {
                    Expr::Const(y)
                } else {
                    Expr::Call(f, Box::new(a))
                }
            }
        }
    }
}

fn normalize_sum(xs: Vec<Expr>) -> Expr {
    let mut terms = Vec::with_capacity(xs.len());
    let mut constant = 0.0;
    let mut stack: Vec<Expr> = xs.into_iter().rev().collect();
    while let Some(x) = stack.pop() {
        match x.normalized() {
            Expr::Const(c) => constant += c,
            Expr::Sum(inner) => stack.extend(inner.into_iter().rev()),
            other => terms.push(other),
        }
    }
    if constant != 0.0 {
        terms.push(Expr::Const(constant));
    }
    match terms.len() {
        0 => Expr::zero(),
        1 => terms.pop().unwrap(),
        _ => Expr::Sum(terms),
    }
}

fn normalize_product(xs: Vec<Expr>) -> Expr {
    let mut factors = Vec::with_capacity(xs.len());
    let mut coefficient = 1.0;
    let mut stack: Vec<Expr> = xs.into_iter().rev().collect();
    while let Some(x) = stack.pop() {
        match x.normalized() {
            Expr::Const(c) => coefficient *= c,
            Expr::Product(inner) => stack.extend(inner.into_iter().rev()),
            other => factors.push(other),
        }
    }
    if coefficient == 0.0 {
        return Expr::zero();
    }
    if factors.is_empty() {
        return Expr::Const(coefficient);
    }
    if coefficient != 1.0 {
        factors.insert(0, Expr::Const(coefficient));
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Product(factors)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render::render(self))
    }
}
