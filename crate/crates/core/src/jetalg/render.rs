use std::fmt;

use num_traits::{One, Signed};

use super::expr::{JetExpr, Monomial};

fn factors(m: &Monomial) -> Vec<String> {
    let mut out: Vec<String> = m
        .atoms()
        .map(|(a, p)| if *p == 1 { a.to_string() } else { format!("{a}^{p}") })
        .collect();
    if !m.exp_arg().is_empty() {
        out.push(format!("exp({})", m.exp_arg()));
    }
    out
}

fn write_poly(f: &mut fmt::Formatter<'_>, e: &JetExpr) -> fmt::Result {
    if e.num.is_zero() {
        return write!(f, "0");
    }
    for (n, (m, c)) in e.num.terms().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if n == 0 {
            if neg {
                write!(f, "-")?;
            }
        } else if neg {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let fs = factors(m);
        if fs.is_empty() {
            write!(f, "{mag}")?;
        } else if mag.is_one() {
            write!(f, "{}", fs.join("*"))?;
        } else {
            write!(f, "{mag}*{}", fs.join("*"))?;
        }
    }
    Ok(())
}

/// Renders in the input grammar; `parse_expr(e.to_string()) == e`.
impl fmt::Display for JetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write_poly(f, self);
        }
        write!(f, "(")?;
        write_poly(f, self)?;
        let den: Vec<String> = self
            .den
            .iter()
            .map(|(a, p)| if *p == 1 { a.to_string() } else { format!("{a}^{p}") })
            .collect();
        write!(f, ")/({})", den.join("*"))
    }
}
