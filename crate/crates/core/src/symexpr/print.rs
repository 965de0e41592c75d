use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::expr::{Atom, Expr, Rational};

fn write_rational(out: &mut impl Write, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        write!(out, "{}", c.numer())
    } else {
        write!(out, "{}/{}", c.numer(), c.denom())
    }
}

fn write_atom(out: &mut impl Write, a: &Atom) -> fmt::Result {
    match a {
        Atom::Sym(s) => out.write_str(s),
        Atom::Elem(f, arg) => write!(out, "{}({})", f.name(), arg),
        Atom::Opaque { name, order, arg } => {
            out.write_str(name)?;
            for _ in 0..*order {
                out.write_char('\'')?;
            }
            write!(out, "({})", arg)
        }
        Atom::Sum(d) => write!(out, "({})", d),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (mono, c)) in self.terms().iter().enumerate() {
            match (i, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            if mono.is_empty() {
                write_rational(f, &mag)?;
                continue;
            }
            let mut first = true;
            if !mag.is_one() {
                write_rational(f, &mag)?;
                first = false;
            }
            for (a, &k) in mono {
                if !first {
                    f.write_char('*')?;
                }
                first = false;
                write_atom(f, a)?;
                match k {
                    1 => {}
                    k if k > 1 => write!(f, "^{}", k)?,
                    k => write!(f, "^({})", k)?,
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}
