use super::{Expr, Func};

impl Expr {
    /// Exact partial derivative with respect to variable slot `var`, in normal form.
    pub fn differentiate(&self, var: usize) -> Expr {
        self.d(var).normalized()
    }

    fn d(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(i, _) => Expr::Const(if *i == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::Neg(Box::new(a.d(var))),
            Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| x.d(var)).collect()),
            Expr::Product(xs) => {
                let mut terms = Vec::with_capacity(xs.len());
                for i in 0..xs.len() {
                    let di = xs[i].d(var).normalized();
                    if di.is_zero() {
                        continue;
                    }
                    let mut factors = xs.clone();
                    factors[i] = di;
                    terms.push(Expr::Product(factors));
                }
                Expr::Sum(terms)
            }
            Expr::Quotient(a, b) => {
                let da = a.d(var).normalized();
                let db = b.d(var).normalized();
                if db.is_zero() {
                    return Expr::Quotient(Box::new(da), b.clone());
                }
                // (a'b - ab') / b^2
                Expr::Quotient(
                    Box::new(Expr::Sum(vec![
                        Expr::Product(vec![da, (**b).clone()]),
                        Expr::Neg(Box::new(Expr::Product(vec![(**a).clone(), db]))),
                    ])),
                    Box::new(Expr::Pow(b.clone(), 2)),
                )
            }
            Expr::Pow(a, n) => Expr::Product(vec![
                Expr::Const(*n as f64),
                a.d(var),
                Expr::Pow(a.clone(), n - 1),
            ]),
            Expr::Call(f, a) => {
                let da = a.d(var);
                let outer = match f {
                    Func::Sin => Expr::Call(Func::Cos, a.clone()),
                    Func::Cos => Expr::Neg(Box::new(Expr::Call(Func::Sin, a.clone()))),
                    Func::Exp => Expr::Call(Func::Exp, a.clone()),
                    Func::Log => Expr::Pow(a.clone(), -1),
                    Func::Sqrt => Expr::Quotient(
                        Box::new(Expr::Const(0.5)),
                        Box::new(Expr::Call(Func::Sqrt, a.clone())),
                    ),
                    Func::Atan => Expr::Pow(
                        Box::new(Expr::Sum(vec![Expr::one(), Expr::Pow(a.clone(), 2)])),
                        -1,
                    ),
                };
                Expr::Product(vec![da, outer])
            }
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

    fn d(text: &str, var: usize) -> Expr {
        parse(text, &uv()).unwrap().differentiate(var)
    }

    fn p(text: &str) -> Expr {
        parse(text, &uv()).unwrap()
    }

    #[test]
    fn textbook_derivatives() {
        assert_eq!(d("v^2", 1), p("2*v"));
        assert_eq!(d("u^3 - 3*u*v", 0), p("3*u^2 - 3*v"));
        assert_eq!(d("sin(u*v)", 0), p("v*cos(u*v)"));
    }

    #[test]
    fn constants_differentiate_to_zero() {
        assert_eq!(d("3 + pi", 0), Expr::zero());
        assert_eq!(d("exp(2)", 1), Expr::zero());
        assert_eq!(d("u", 1), Expr::zero());
    }

    #[test]
    fn linear_over_sums() {
        let a = p("sin(u)*v");
        let b = p("u^2/v");
        let sum = Expr::add(a.clone(), b.clone());
        let lhs = sum.differentiate(0);
        let rhs = Expr::Sum(vec![a.differentiate(0), b.differentiate(0)]).normalized();
        assert_eq!(lhs, rhs);
    }
}
