use num_bigint::BigInt;

use super::atom::{Atom, LinForm};
use super::expr::JetExpr;
use super::var::JetVar;
use crate::error::{Error, Result};
use crate::Rational;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mut digits = src[start..i].to_string();
            let mut scale = 0u32;
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let frac = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                digits.push_str(&src[frac..i]);
                scale = (i - frac) as u32;
            }
            if digits.is_empty() {
                return Err(Error::Syntax {
                    offset: start,
                    msg: "malformed number".into(),
                });
            }
            let n: BigInt = digits.parse().map_err(|_| Error::Syntax {
                offset: start,
                msg: "malformed number".into(),
            })?;
            let d = num_traits::pow(BigInt::from(10), scale as usize);
            out.push((Tok::Num(Rational::new(n, d)), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    msg: format!("unexpected character `{}`", &src[start..].chars().next().unwrap()),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<JetExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<JetExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    let at = self.offset();
                    let rhs = self.unary()?;
                    acc = acc.div_expr(&rhs).map_err(|e| match e {
                        Error::SumDenominator(s) if rhs.is_zero() => Error::Syntax {
                            offset: at,
                            msg: format!("division by zero `{s}`"),
                        },
                        other => other,
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<JetExpr> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(-self.unary()?);
        }
        if *self.peek() == Tok::Op('+') {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<JetExpr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let neg = if *self.peek() == Tok::Op('-') {
            self.bump();
            true
        } else {
            false
        };
        let n = match self.bump() {
            (Tok::Num(n), at) => {
                if !n.is_integer() {
                    return Err(Error::Syntax {
                        offset: at,
                        msg: "exponent must be an integer".into(),
                    });
                }
                u32::try_from(n.to_integer()).map_err(|_| Error::Syntax {
                    offset: at,
                    msg: "exponent too large".into(),
                })?
            }
            (_, at) => {
                return Err(Error::Syntax {
                    offset: at,
                    msg: "expected integer exponent".into(),
                })
            }
        };
        let p = base.pow(n);
        if neg {
            p.recip()
        } else {
            Ok(p)
        }
    }

    fn args(&mut self) -> Result<Vec<JetExpr>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.expr()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(out)
    }

    fn primary(&mut self) -> Result<JetExpr> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(n) => Ok(JetExpr::constant(n)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let args = self.args()?;
                    function(&name, at, &args)
                } else {
                    variable(&name, at).map(JetExpr::var)
                }
            }
            Tok::End => Err(Error::Syntax {
                offset: at,
                msg: "unexpected end of input".into(),
            }),
            _ => Err(Error::Syntax {
                offset: at,
                msg: "expected a number, variable or `(`".into(),
            }),
        }
    }
}

fn variable(name: &str, at: usize) -> Result<JetVar> {
    let unknown = || Error::UnknownSymbol {
        name: name.to_string(),
        offset: at,
    };
    match name {
        "x" => return Ok(JetVar::X),
        "t" => return Ok(JetVar::T),
        _ => {}
    }
    let (head, idx) = name.split_at(1);
    if idx.len() != 1 || !idx.as_bytes()[0].is_ascii_digit() {
        return Err(unknown());
    }
    let i = idx.parse::<u8>().unwrap();
    match (head, i) {
        ("u", _) => Ok(JetVar::U(i)),
        ("w", 0) | ("v", 0) => Err(Error::UnknownSymbol {
            name: format!("{name} (alias of {}; write it in u-form)", if head == "w" { "u0" } else { "u1" }),
            offset: at,
        }),
        ("w", _) => Ok(JetVar::W(i)),
        ("v", _) => Ok(JetVar::V(i)),
        _ => Err(unknown()),
    }
}

fn order_suffix(s: &str) -> Option<u32> {
    if s.is_empty() {
        Some(0)
    } else if s.bytes().all(|b| b.is_ascii_digit()) {
        s.parse().ok()
    } else {
        None
    }
}

fn linear_form(e: &JetExpr) -> Option<LinForm> {
    if !e.den.is_empty() {
        return None;
    }
    let mut l = LinForm::new();
    for (m, c) in e.num.terms() {
        if !m.exp.is_empty() || m.atoms.len() != 1 {
            return None;
        }
        match m.atoms.iter().next() {
            Some((Atom::Var(v), 1)) => l.add_term(*v, c.clone()),
            _ => return None,
        }
    }
    Some(l)
}

fn function(name: &str, at: usize, args: &[JetExpr]) -> Result<JetExpr> {
    let bad_args = |want: &str| Error::Syntax {
        offset: at,
        msg: format!("`{name}` expects argument {want}"),
    };
    let u0 = JetExpr::u(0);
    let u1 = JetExpr::u(1);
    let one_arg = |want: &JetExpr, label: &str| -> Result<()> {
        if args.len() == 1 && args[0] == *want {
            Ok(())
        } else {
            Err(bad_args(label))
        }
    };
    match name {
        "exp" => {
            if args.len() != 1 {
                return Err(bad_args("a linear form"));
            }
            let l = linear_form(&args[0]).ok_or_else(|| bad_args("a linear form without constant term"))?;
            return Ok(JetExpr::exp(l));
        }
        "sin" => {
            one_arg(&u0, "u0")?;
            return Ok(JetExpr::sin_u0());
        }
        "cos" => {
            one_arg(&u0, "u0")?;
            return Ok(JetExpr::cos_u0());
        }
        _ => {}
    }
    if let Some(rest) = name.strip_prefix("phi1") {
        let (a, b) = if rest.is_empty() {
            (0, 0)
        } else {
            let mut parts = rest.strip_prefix('_').unwrap_or("x").splitn(2, '_');
            let a = parts.next().and_then(|s| s.parse::<u32>().ok());
            let b = parts.next().and_then(|s| s.parse::<u32>().ok());
            match (a, b) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::UnknownSymbol {
                        name: name.into(),
                        offset: at,
                    })
                }
            }
        };
        if args.len() != 2 || args[0] != u0 || args[1] != u1 {
            return Err(bad_args("(u0,u1)"));
        }
        return Ok(JetExpr::atom(Atom::Phi1(a, b)));
    }
    if let Some(k) = name.strip_prefix("vphi").and_then(order_suffix) {
        one_arg(&u0, "u0")?;
        return Ok(JetExpr::atom(Atom::VPhi(k)));
    }
    if let Some(k) = name.strip_prefix('f').and_then(order_suffix) {
        one_arg(&(&u0 - &JetExpr::u(2)), "u0-u2")?;
        return Ok(JetExpr::atom(Atom::F(k)));
    }
    Err(Error::UnknownSymbol {
        name: name.into(),
        offset: at,
    })
}

/// Parse an expression in the jet grammar and normalize it.
pub fn parse_expr(text: &str) -> Result<JetExpr> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("trailing input");
    }
    Ok(e)
}
