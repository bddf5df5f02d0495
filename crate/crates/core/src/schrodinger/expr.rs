//! Potential expressions such as `2i*gauss(4, 0.5) + x^2 - (1+0.5i)`.
//!
//! Grammar (usual precedence, `^` binds tightest and right-associates):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('+' | '-') unary | power
//! power := atom ('^' unary)?
//! atom  := number ['i'] | 'i' | 'x' | 'y' | 'r' | 'pi' | name '(' args ')' | '(' expr ')'
//! ```
//!
//! Functions: `gauss(a[, c1[, c2]]) = exp(-a |r - c|^2)`, `ind(lo, hi)` (1 for
//! `lo <= x < hi`), `exp`, `sin`, `cos`, `sqrt`, `abs`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Complex64),
    X,
    Y,
    R,
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

impl Expr {
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let re = |v: f64| Complex64::new(v, 0.0);
        match self {
            Expr::Const(c) => *c,
            Expr::X => re(x),
            Expr::Y => re(y),
            Expr::R => re((x * x + y * y).sqrt()),
            Expr::Neg(e) => -e.eval(x, y),
            Expr::Bin(op, a, b) => {
                let (u, v) = (a.eval(x, y), b.eval(x, y));
                match op {
                    '+' => u + v,
                    '-' => u - v,
                    '*' => u * v,
                    '/' => u / v,
                    _ => power(u, v),
                }
            }
            Expr::Call(name, args) => {
                let a: Vec<Complex64> = args.iter().map(|e| e.eval(x, y)).collect();
                match name.as_str() {
                    "gauss" => {
                        let c1 = a.get(1).map_or(0.0, |c| c.re);
                        let c2 = a.get(2).map_or(0.0, |c| c.re);
                        (-a[0] * re((x - c1).powi(2) + (y - c2).powi(2))).exp()
                    }
                    "ind" => re(if a[0].re <= x && x < a[1].re { 1.0 } else { 0.0 }),
                    "exp" => a[0].exp(),
                    "sin" => a[0].sin(),
                    "cos" => a[0].cos(),
                    "sqrt" => a[0].sqrt(),
                    _ => re(a[0].norm()),
                }
            }
        }
    }
}

fn power(u: Complex64, v: Complex64) -> Complex64 {
    if v.im == 0.0 && v.re.fract() == 0.0 && v.re.abs() <= 64.0 {
        return u.powi(v.re as i32);
    }
    if u == Complex64::new(0.0, 0.0) {
        return u;
    }
    (v * u.ln()).exp()
}

fn arity(name: &str) -> Option<(usize, usize)> {
    Some(match name {
        "gauss" => (1, 3),
        "ind" => (2, 2),
        "exp" | "sin" | "cos" | "sqrt" | "abs" => (1, 1),
        _ => return None,
    })
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("{msg} at position {} in potential expression", self.pos)))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat(b'+') {
                e = Expr::Bin('+', Box::new(e), Box::new(self.term()?));
            } else if self.eat(b'-') {
                e = Expr::Bin('-', Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat(b'*') {
                e = Expr::Bin('*', Box::new(e), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                e = Expr::Bin('/', Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Expr::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => self.err("unexpected end"),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or_default().to_string();
                match name.as_str() {
                    "x" => return Ok(Expr::X),
                    "y" => return Ok(Expr::Y),
                    "r" => return Ok(Expr::R),
                    "i" => return Ok(Expr::Const(Complex64::new(0.0, 1.0))),
                    "pi" => return Ok(Expr::Const(Complex64::new(std::f64::consts::PI, 0.0))),
                    _ => {}
                }
                let Some((lo, hi)) = arity(&name) else {
                    self.pos = start;
                    return self.err(&format!("unknown name '{name}'"));
                };
                if !self.eat(b'(') {
                    return self.err(&format!("expected '(' after {name}"));
                }
                let mut args = vec![self.expr()?];
                while self.eat(b',') {
                    args.push(self.expr()?);
                }
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                if args.len() < lo || args.len() > hi {
                    return self.err(&format!("{name} takes {lo}..={hi} arguments, got {}", args.len()));
                }
                Ok(Expr::Call(name, args))
            }
            Some(c) => self.err(&format!("unexpected character '{}'", c as char)),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.s;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < s.len() && (s[p] == b'+' || s[p] == b'-') {
                p += 1;
            }
            if p < s.len() && s[p].is_ascii_digit() {
                while p < s.len() && s[p].is_ascii_digit() {
                    p += 1;
                }
                self.pos = p;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or_default();
        let v: f64 = match text.parse() {
            Ok(v) => v,
            Err(_) => return self.err(&format!("bad number '{text}'")),
        };
        let imaginary = self.pos < s.len()
            && s[self.pos] == b'i'
            && !s.get(self.pos + 1).is_some_and(|c| c.is_ascii_alphanumeric());
        if imaginary {
            self.pos += 1;
            return Ok(Expr::Const(Complex64::new(0.0, v)));
        }
        Ok(Expr::Const(Complex64::new(v, 0.0)))
    }
}

pub fn parse_expression(src: &str) -> Result<Expr> {
    let mut p = Parser { s: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}
