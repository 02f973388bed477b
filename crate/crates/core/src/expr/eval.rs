use super::{Expr, Func};
use crate::error::{Error, Result};

fn violation(e: &Expr) -> Error {
    Error::DomainViolation { expr: e.to_string() }
}

impl Expr {
    /// Evaluate at `point` (one value per declared variable slot).
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let y = match self {
            Expr::Const(c) => *c,
            Expr::Var(i, _) => point[*i],
            Expr::Neg(a) => -a.eval(point)?,
            Expr::Sum(xs) => {
                let mut s = 0.0;
                for x in xs {
                    s += x.eval(point)?;
                }
                s
            }
            Expr::Product(xs) => {
                let mut s = 1.0;
                for x in xs {
                    s *= x.eval(point)?;
                }
                s
            }
            Expr::Quotient(a, b) => {
                let den = b.eval(point)?;
                if den == 0.0 {
                    return Err(violation(self));
                }
                a.eval(point)? / den
            }
            Expr::Pow(a, n) => {
                let base = a.eval(point)?;
                if base == 0.0 && *n < 0 {
                    return Err(violation(self));
                }
                base.powi(*n)
            }
            Expr::Call(f, a) => f.apply(a.eval(point)?).ok_or_else(|| violation(self))?,
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(violation(self))
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Neg,
    Add(usize),
    Mul(usize),
    Div,
    Pow(i32),
    Call(Func),
}

/// Postfix program compiled from an [`Expr`] for the hot evaluation loops.
///
/// Produces the same values as [`Expr::eval`]; on a domain violation the tree
/// is re-walked to name the offending sub-expression.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    depth: usize,
    source: Expr,
}

impl Tape {
    pub fn new(e: &Expr) -> Tape {
        let mut ops = Vec::with_capacity(e.node_count());
        compile(e, &mut ops);
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) => depth += 1,
                Op::Add(n) | Op::Mul(n) => depth -= n - 1,
                Op::Div => depth -= 1,
                _ => {}
            }
            max_depth = max_depth.max(depth);
        }
        Tape { ops, depth: max_depth, source: e.clone() }
    }

    pub fn expr(&self) -> &Expr {
        &self.source
    }

    pub fn is_const(&self) -> Option<f64> {
        self.source.as_const()
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if let [Op::Const(c)] = self.ops[..] {
            return Ok(c);
        }
        let mut inline = [0.0f64; 32];
        let mut heap;
        let stack: &mut [f64] = if self.depth <= inline.len() {
            &mut inline
        } else {
            heap = vec![0.0; self.depth];
            &mut heap
        };
        let mut sp = 0usize;
        let mut ok = true;
        for op in &self.ops {
            match *op {
                Op::Const(c) => {
                    stack[sp] = c;
                    sp += 1;
                }
                Op::Var(i) => {
                    stack[sp] = point[i];
                    sp += 1;
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::Add(n) => {
                    let base = sp - n;
                    let mut s = stack[base];
                    for v in &stack[base + 1..sp] {
                        s += v;
                    }
                    stack[base] = s;
                    sp = base + 1;
                }
                Op::Mul(n) => {
                    let base = sp - n;
                    let mut s = stack[base];
                    for v in &stack[base + 1..sp] {
                        s *= v;
                    }
                    stack[base] = s;
                    sp = base + 1;
                }
                Op::Div => {
                    let den = stack[sp - 1];
                    ok &= den != 0.0;
                    stack[sp - 2] /= den;
                    sp -= 1;
                }
                Op::Pow(n) => {
                    ok &= !(n < 0 && stack[sp - 1] == 0.0);
                    stack[sp - 1] = stack[sp - 1].powi(n);
                }
                Op::Call(f) => match f.apply(stack[sp - 1]) {
                    Some(y) => stack[sp - 1] = y,
                    None => {
                        ok = false;
                        stack[sp - 1] = f64::NAN;
                    }
                },
            }
        }
        let y = stack[0];
        if ok && y.is_finite() {
            Ok(y)
        } else {
            Err(self.source.eval(point).err().unwrap_or_else(|| violation(&self.source)))
        }
    }
}

fn compile(e: &Expr, ops: &mut Vec<Op>) {
    match e {
        Expr::Const(c) => ops.push(Op::Const(*c)),
        Expr::Var(i, _) => ops.push(Op::Var(*i)),
        Expr::Neg(a) => {
            compile(a, ops);
            ops.push(Op::Neg);
        }
        Expr::Sum(xs) => {
            xs.iter().for_each(|x| compile(x, ops));
            ops.push(Op::Add(xs.len()));
        }
        Expr::Product(xs) => {
            xs.iter().for_each(|x| compile(x, ops));
            ops.push(Op::Mul(xs.len()));
        }
        Expr::Quotient(a, b) => {
            compile(a, ops);
            compile(b, ops);
            ops.push(Op::Div);
        }
        Expr::Pow(a, n) => {
            compile(a, ops);
            ops.push(Op::Pow(*n));
        }
        Expr::Call(f, a) => {
            compile(a, ops);
            ops.push(Op::Call(*f));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Vars};
    use super::*;

    fn uv() -> Vars {
        Vars::new(&["u", "v"])
    }

    #[test]
    fn simple_values() {
        let vars = uv();
        assert_eq!(parse("2*v", &vars).unwrap().eval(&[1.0, 3.0]).unwrap(), 6.0);
        assert_eq!(parse("3*(u^2 - v)", &vars).unwrap().eval(&[1.0, 1.0]).unwrap(), 0.0);
        let c = parse("2+3", &vars).unwrap();
        assert_eq!(c.eval(&[-7.0, 1e6]).unwrap(), 5.0);
    }

    #[test]
    fn sqrt_of_negative_is_a_domain_violation() {
        let e = parse("1 + sqrt(u)", &uv()).unwrap();
        match e.eval(&[-1.0, 0.0]) {
            Err(Error::DomainViolation { expr }) => assert_eq!(expr, "sqrt(u)"),
            other => panic!("unexpected {other:?}"),
        }
        let t = Tape::new(&e);
        assert!(matches!(t.eval(&[-1.0, 0.0]), Err(Error::DomainViolation { .. })));
    }

    #[test]
    fn division_by_zero() {
        let e = parse("u/v", &uv()).unwrap();
        assert!(e.eval(&[1.0, 0.0]).is_err());
        assert!(Tape::new(&e).eval(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn tape_matches_tree() {
        let e = parse("exp(u)*sin(u*v)^2 - log(1 + v^2)/(u - 3) + atan(v)*sqrt(2 + u)", &uv())
            .unwrap();
        let t = Tape::new(&e);
        for &(u, v) in &[(0.1, 0.2), (-1.3, 2.0), (1.7, -0.4)] {
            assert_eq!(t.eval(&[u, v]).unwrap(), e.eval(&[u, v]).unwrap());
        }
    }
}
