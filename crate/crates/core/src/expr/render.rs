//! Infix rendering that re-parses to the same normal form.

use super::Expr;

pub(super) fn render(e: &Expr) -> String {
    let mut s = String::new();
    write_sum_level(e, &mut s);
    s
}

fn write_const(c: f64, out: &mut String) {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        out.push_str(&format!("(-{})", -c));
    } else {
        out.push_str(&format!("{c}"));
    }
}

fn write_paren(e: &Expr, out: &mut String) {
    out.push('(');
    write_sum_level(e, out);
    out.push(')');
}

fn write_sum_level(e: &Expr, out: &mut String) {
    match e {
        Expr::Sum(terms) => {
            for (i, t) in terms.iter().enumerate() {
                match t {
                    Expr::Neg(inner) if i == 0 => {
                        out.push('-');
                        write_negated(inner, out);
                    }
                    // `a - b*c` parses as a sum with a negated product.
                    Expr::Neg(inner) => {
                        out.push_str(" - ");
                        match **inner {
                            Expr::Const(c) if c < 0.0 => write_paren(inner, out),
                            _ => write_term_level(inner, out),
                        }
                    }
                    _ => {
                        if i > 0 {
                            out.push_str(" + ");
                        }
                        write_term_level(t, out);
                    }
                }
            }
        }
        Expr::Neg(inner) => {
            out.push('-');
            write_negated(inner, out);
        }
        other => write_term_level(other, out),
    }
}

/// Operand of a unary minus.
fn write_negated(e: &Expr, out: &mut String) {
    match e {
        Expr::Sum(_) | Expr::Product(_) | Expr::Quotient(..) | Expr::Neg(_) => write_paren(e, out),
        Expr::Const(c) if *c < 0.0 => write_paren(e, out),
        other => write_atomic(other, out),
    }
}

fn write_term_level(e: &Expr, out: &mut String) {
    match e {
        Expr::Product(factors) => {
            for (i, f) in factors.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                match f {
                    Expr::Sum(_) | Expr::Quotient(..) | Expr::Neg(_) | Expr::Product(_) => {
                        write_paren(f, out)
                    }
                    other => write_atomic(other, out),
                }
            }
        }
        Expr::Quotient(a, b) => {
            match **a {
                Expr::Sum(_) => write_paren(a, out),
                Expr::Neg(ref inner) => {
                    out.push('-');
                    write_negated(inner, out);
                }
                Expr::Product(_) | Expr::Quotient(..) => write_term_level(a, out),
                _ => write_atomic(a, out),
            }
            out.push('/');
            match **b {
                Expr::Sum(_) | Expr::Product(_) | Expr::Quotient(..) | Expr::Neg(_) => {
                    write_paren(b, out)
                }
                _ => write_atomic(b, out),
            }
        }
        Expr::Sum(_) | Expr::Neg(_) => write_paren(e, out),
        other => write_atomic(other, out),
    }
}

fn write_atomic(e: &Expr, out: &mut String) {
    match e {
        Expr::Const(c) => write_const(*c, out),
        Expr::Var(_, name) => out.push_str(name),
        Expr::Pow(base, n) => {
            match **base {
                Expr::Var(..) | Expr::Call(..) => write_atomic(base, out),
                Expr::Const(c) if c >= 0.0 => write_const(c, out),
                _ => write_paren(base, out),
            }
            out.push_str(&format!("^{n}"));
        }
        Expr::Call(f, a) => {
            out.push_str(f.name());
            write_paren(a, out);
        }
        other => write_paren(other, out),
    }
}
