//! Recursive-descent parser.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' '-'? INTEGER)*
//! atom  := NUMBER | 'pi' | VAR | FUNC '(' expr ')' | '(' expr ')'
//! ```

use super::{Expr, Func, Vars};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(x, _) => format!("number {x}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                let mut integral = true;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    integral = false;
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        integral = false;
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let lit = &text[i..j];
                let value: f64 = lit.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    expected: "a numeric literal".into(),
                })?;
                i = j;
                out.push((Tok::Num(value, integral), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let name = text[i..j].to_string();
                i = j;
                out.push((Tok::Ident(name), start));
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    expected: "an operator, number, identifier or parenthesis".into(),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a Vars,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            expected: format!("{expected}, found {}", describe(self.peek())),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(Expr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = match acc {
                        Expr::Product(mut xs) => {
                            xs.push(rhs);
                            Expr::Product(xs)
                        }
                        other => Expr::Product(vec![other, rhs]),
                    };
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = Expr::Quotient(Box::new(acc), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.atom()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let negative = if *self.peek() == Tok::Minus {
                self.bump();
                true
            } else {
                false
            };
            match self.peek().clone() {
                Tok::Num(n, true) if n <= i32::MAX as f64 => {
                    self.bump();
                    let n = n as i32;
                    base = Expr::Pow(Box::new(base), if negative { -n } else { n });
                }
                _ => return self.fail("an integer exponent"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(x, _) => {
                self.bump();
                Ok(Expr::Const(x))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.fail("`)`");
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(f) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return self.fail("`(` after function name");
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() != Tok::RParen {
                        return self.fail("`)`");
                    }
                    self.bump();
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if let Some(i) = self.vars.index_of(&name) {
                    return Ok(self.vars.var(i));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    _ => Err(Error::UnknownIdentifier { name, offset }),
                }
            }
            _ => self.fail("an expression"),
        }
    }
}

/// Parse `text` over the declared variables and return it in normal form.
pub fn parse(text: &str, vars: &Vars) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, vars };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("an operator or end of input");
    }
    Ok(e.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uv() -> Vars {
        Vars::new(&["u", "v"])
    }

    #[test]
    fn cusp_component_shape() {
        let vars = uv();
        let e = parse("u^3 - 3*u*v", &vars).unwrap();
        let expected = Expr::Sum(vec![
            Expr::Pow(Box::new(vars.var(0)), 3),
            Expr::Neg(Box::new(Expr::Product(vec![Expr::Const(3.0), vars.var(0), vars.var(1)]))),
        ]);
        assert_eq!(e, expected);
    }

    #[test]
    fn misplaced_operator_reports_offset() {
        match parse("u + * v", &uv()) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier() {
        assert!(matches!(
            parse("u + w", &uv()),
            Err(Error::UnknownIdentifier { offset: 4, .. })
        ));
    }

    #[test]
    fn exponents_must_be_integers() {
        assert!(matches!(parse("u^1.5", &uv()), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("u^v", &uv()), Err(Error::Syntax { .. })));
        let e = parse("u^-2", &uv()).unwrap();
        assert_eq!(e, Expr::Pow(Box::new(uv().var(0)), -2));
    }

    #[test]
    fn precedence() {
        let vars = uv();
        // -u^2 is -(u^2)
        let e = parse("-u^2", &vars).unwrap();
        assert_eq!(e, Expr::Neg(Box::new(Expr::Pow(Box::new(vars.var(0)), 2))));
        assert!(matches!(parse("(u", &vars), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("", &vars), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse("u v", &vars), Err(Error::Syntax { offset: 2, .. })));
    }

    #[test]
    fn scientific_literals() {
        let e = parse("1.5e-3 * 2E2", &uv()).unwrap();
        assert!((e.as_const().unwrap() - 0.3).abs() < 1e-15);
    }
}
