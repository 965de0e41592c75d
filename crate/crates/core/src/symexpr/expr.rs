use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ExprError;

/// Exact rational constant.
pub type Rational = BigRational;

/// Elementary unary functions understood by the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElemFn {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl ElemFn {
    pub fn name(self) -> &'static str {
        match self {
            ElemFn::Sin => "sin",
            ElemFn::Cos => "cos",
            ElemFn::Exp => "exp",
            ElemFn::Log => "log",
            ElemFn::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => ElemFn::Sin,
            "cos" => ElemFn::Cos,
            "exp" => ElemFn::Exp,
            "log" => ElemFn::Log,
            "sqrt" => ElemFn::Sqrt,
            _ => return None,
        })
    }
}

/// An indivisible factor of a monomial.
///
/// `Sum` atoms only ever carry negative exponents: positive powers of sums
/// are expanded on construction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Atom {
    Sym(Arc<str>),
    Elem(ElemFn, Expr),
    Opaque { name: Arc<str>, order: u32, arg: Expr },
    Sum(Expr),
}

pub(crate) type Monomial = BTreeMap<Atom, i64>;
pub(crate) type Terms = BTreeMap<Monomial, Rational>;

/// A normalized scalar expression.
///
/// The representation is a sum of rational multiples of monomials over
/// atoms (symbols, function calls, and inverted sums). Every constructor
/// returns normal form, so structural equality is the equality used by the
/// zero test's first stage.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(pub(crate) Arc<Terms>);

/// Read-only view of the top-level shape of an [`Expr`].
#[derive(Clone, Debug, PartialEq)]
pub enum ExprView {
    Constant(Rational),
    Symbol(Arc<str>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, i64),
    Elem(ElemFn, Expr),
    Opaque { name: Arc<str>, order: u32, arg: Expr },
}

fn add_into(acc: &mut Terms, mono: Monomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    match acc.entry(mono) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get() + c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = a.clone();
    for (atom, &k) in b {
        let e = out.get(atom).copied().unwrap_or(0) + k;
        if e == 0 {
            out.remove(atom);
        } else {
            out.insert(atom.clone(), e);
        }
    }
    out
}

fn mul_raw(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            add_into(&mut out, mono_mul(ma, mb), ca * cb);
        }
    }
    out
}

fn pow_raw(t: &Terms, k: u32) -> Terms {
    let mut result = constant_terms(Rational::one());
    let mut base = t.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            result = mul_raw(&result, &base);
        }
        k >>= 1;
        if k > 0 {
            base = mul_raw(&base, &base);
        }
    }
    result
}

fn constant_terms(c: Rational) -> Terms {
    let mut t = Terms::new();
    add_into(&mut t, Monomial::new(), c);
    t
}

fn rational_pow(c: &Rational, k: i64) -> Rational {
    let mut r = Rational::one();
    for _ in 0..k.unsigned_abs() {
        r *= c;
    }
    if k < 0 {
        r.recip()
    } else {
        r
    }
}

/// Builds `coeff * prod(atom^k)`, expanding sums raised to positive powers.
fn expand_factors<'a>(coeff: Rational, factors: impl IntoIterator<Item = (&'a Atom, i64)>) -> Terms {
    let mut mono = Monomial::new();
    let mut expansions = Vec::new();
    for (atom, k) in factors {
        match atom {
            Atom::Sum(d) if k > 0 => expansions.push(pow_raw(&d.0, k as u32)),
            _ => {
                let e = mono.get(atom).copied().unwrap_or(0) + k;
                if e == 0 {
                    mono.remove(atom);
                } else {
                    mono.insert(atom.clone(), e);
                }
            }
        }
    }
    let mut out = Terms::new();
    add_into(&mut out, mono, coeff);
    for t in expansions {
        out = mul_raw(&out, &t);
    }
    out
}

/// Exact division of `r` by `d`, treating the atoms of `d` as polynomial
/// variables under lex order and every other atom as part of the
/// coefficient ring. `None` when the division leaves a remainder or when
/// either operand is not polynomial in those variables.
fn exact_div(r: &Terms, d: &Terms) -> Option<Terms> {
    let vars: Vec<Atom> = d
        .keys()
        .flat_map(|m| m.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if vars.is_empty() {
        return None;
    }
    let split = |mono: &Monomial| -> Option<(Vec<i64>, Monomial)> {
        let mut exps = vec![0i64; vars.len()];
        let mut rest = Monomial::new();
        for (a, &k) in mono {
            match vars.binary_search(a) {
                Ok(i) => {
                    if k < 0 {
                        return None;
                    }
                    exps[i] = k;
                }
                Err(_) => {
                    rest.insert(a.clone(), k);
                }
            }
        }
        Some((exps, rest))
    };
    let mut dgroups: Vec<(Vec<i64>, Rational)> = Vec::new();
    for (m, c) in d {
        let (e, rest) = split(m)?;
        if !rest.is_empty() {
            return None;
        }
        dgroups.push((e, c.clone()));
    }
    let (lead, lc) = dgroups.iter().max_by(|a, b| a.0.cmp(&b.0))?.clone();

    let mut rem: BTreeMap<Vec<i64>, Terms> = BTreeMap::new();
    for (m, c) in r {
        let (e, rest) = split(m)?;
        add_into(rem.entry(e).or_default(), rest, c.clone());
    }
    rem.retain(|_, t| !t.is_empty());

    let join = |exps: &[i64], rest: &Monomial| -> Monomial {
        let mut m = rest.clone();
        for (a, &k) in vars.iter().zip(exps) {
            if k != 0 {
                m.insert(a.clone(), k);
            }
        }
        m
    };

    let mut quotient = Terms::new();
    while let Some((lm, coeff)) = rem.pop_last() {
        if lm.iter().zip(&lead).any(|(a, b)| a < b) {
            return None;
        }
        let qv: Vec<i64> = lm.iter().zip(&lead).map(|(a, b)| a - b).collect();
        let qcoef: Terms = coeff.iter().map(|(m, c)| (m.clone(), c / &lc)).collect();
        for (m, c) in &qcoef {
            add_into(&mut quotient, join(&qv, m), c.clone());
        }
        for (dv, dc) in &dgroups {
            if *dv == lead {
                continue;
            }
            let key: Vec<i64> = qv.iter().zip(dv).map(|(a, b)| a + b).collect();
            let slot = rem.entry(key.clone()).or_default();
            for (m, c) in &qcoef {
                add_into(slot, m.clone(), -(c * dc));
            }
            if slot.is_empty() {
                rem.remove(&key);
            }
        }
    }
    Some(quotient)
}

/// Cancels inverted sums against polynomial multiples of themselves.
fn cancel(mut terms: Terms) -> Terms {
    let mut failed: BTreeSet<Expr> = BTreeSet::new();
    loop {
        let mut counts: BTreeMap<&Expr, usize> = BTreeMap::new();
        for m in terms.keys() {
            for a in m.keys() {
                if let Atom::Sum(d) = a {
                    *counts.entry(d).or_default() += 1;
                }
            }
        }
        let Some(d) = counts
            .into_iter()
            .find(|(d, n)| *n >= 2 && !failed.contains(*d))
            .map(|(d, _)| d.clone())
        else {
            return terms;
        };
        let key = Atom::Sum(d.clone());
        let (with, rest): (Terms, Terms) = terms.into_iter().partition(|(m, _)| m.contains_key(&key));
        let depth = with.keys().map(|m| -m[&key]).max().unwrap_or(0);
        let mut lifted = Terms::new();
        for (m, c) in &with {
            let e = m[&key];
            let mut mm = m.clone();
            mm.remove(&key);
            let factor = pow_raw(&d.0, (depth + e) as u32);
            for (fm, fc) in factor {
                add_into(&mut lifted, mono_mul(&mm, &fm), c * fc);
            }
        }
        let mut divided = 0;
        while divided < depth {
            match exact_div(&lifted, &d.0) {
                Some(q) => {
                    lifted = q;
                    divided += 1;
                }
                None => break,
            }
        }
        terms = rest;
        if divided == 0 {
            failed.insert(d);
            for (m, c) in with {
                add_into(&mut terms, m, c);
            }
            continue;
        }
        let remaining = depth - divided;
        for (m, c) in lifted {
            let mut mm = m;
            if remaining > 0 {
                mm = mono_mul(&mm, &Monomial::from([(key.clone(), -remaining)]));
            }
            add_into(&mut terms, mm, c);
        }
    }
}

fn needs_cancel(t: &Terms) -> bool {
    t.len() >= 2 && t.keys().any(|m| m.keys().any(|a| matches!(a, Atom::Sum(_))))
}

impl Expr {
    pub(crate) fn from_terms(t: Terms) -> Expr {
        let t = if needs_cancel(&t) { cancel(t) } else { t };
        Expr(Arc::new(t))
    }

    pub(crate) fn terms(&self) -> &Terms {
        &self.0
    }

    pub fn zero() -> Expr {
        Expr(Arc::new(Terms::new()))
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(Rational::from_integer(BigInt::from(n)))
    }

    /// `num/den`; panics on a zero denominator.
    pub fn frac(num: i64, den: i64) -> Expr {
        Expr::rational(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn rational(c: Rational) -> Expr {
        Expr(Arc::new(constant_terms(c)))
    }

    pub fn symbol(name: &str) -> Expr {
        Expr::atom(Atom::Sym(Arc::from(name)))
    }

    pub(crate) fn atom(a: Atom) -> Expr {
        Expr(Arc::new(Terms::from([(Monomial::from([(a, 1)]), Rational::one())])))
    }

    /// Opaque unary function `name` differentiated `order` times, at `arg`.
    pub fn opaque(name: &str, order: u32, arg: Expr) -> Expr {
        Expr::atom(Atom::Opaque { name: Arc::from(name), order, arg })
    }

    /// Applies an elementary function, folding the exact special values.
    pub fn apply(f: ElemFn, arg: Expr) -> Expr {
        if let Some(c) = arg.as_rational() {
            match f {
                ElemFn::Sin if c.is_zero() => return Expr::zero(),
                ElemFn::Cos | ElemFn::Exp if c.is_zero() => return Expr::one(),
                ElemFn::Log if c.is_one() => return Expr::zero(),
                ElemFn::Sqrt if !c.is_negative() => {
                    let (n, d) = (c.numer(), c.denom());
                    let (rn, rd) = (n.sqrt(), d.sqrt());
                    if &(&rn * &rn) == n && &(&rd * &rd) == d {
                        return Expr::rational(Rational::new(rn, rd));
                    }
                }
                _ => {}
            }
        }
        Expr::atom(Atom::Elem(f, arg))
    }

    pub fn sin(self) -> Expr {
        Expr::apply(ElemFn::Sin, self)
    }
    pub fn cos(self) -> Expr {
        Expr::apply(ElemFn::Cos, self)
    }
    pub fn exp(self) -> Expr {
        Expr::apply(ElemFn::Exp, self)
    }
    pub fn log(self) -> Expr {
        Expr::apply(ElemFn::Log, self)
    }
    pub fn sqrt(self) -> Expr {
        Expr::apply(ElemFn::Sqrt, self)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// The constant value, when the expression is a constant.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.0.iter().next()?;
                m.is_empty().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// The symbol name, when the expression is a bare symbol.
    pub fn as_symbol(&self) -> Option<&str> {
        let (m, c) = self.single_term()?;
        if !c.is_one() || m.len() != 1 {
            return None;
        }
        match m.iter().next()? {
            (Atom::Sym(s), 1) => Some(s),
            _ => None,
        }
    }

    fn single_term(&self) -> Option<(&Monomial, &Rational)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    /// Top-level summands, each a normalized single-term expression.
    pub fn summands(&self) -> Vec<Expr> {
        self.0
            .iter()
            .map(|(m, c)| Expr(Arc::new(Terms::from([(m.clone(), c.clone())]))))
            .collect()
    }

    /// Number of top-level terms.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn view(&self) -> ExprView {
        if self.0.len() != 1 {
            return if self.0.is_empty() {
                ExprView::Constant(Rational::zero())
            } else {
                ExprView::Sum(self.summands())
            };
        }
        let (m, c) = self.0.iter().next().expect("one term");
        if m.is_empty() {
            return ExprView::Constant(c.clone());
        }
        if c.is_one() && m.len() == 1 {
            let (a, &k) = m.iter().next().expect("one factor");
            if k != 1 {
                let base = match a {
                    Atom::Sum(d) => d.clone(),
                    _ => Expr::atom(a.clone()),
                };
                return ExprView::Pow(base, k);
            }
            return match a {
                Atom::Sym(s) => ExprView::Symbol(s.clone()),
                Atom::Elem(f, arg) => ExprView::Elem(*f, arg.clone()),
                Atom::Opaque { name, order, arg } => {
                    ExprView::Opaque { name: name.clone(), order: *order, arg: arg.clone() }
                }
                Atom::Sum(_) => unreachable!("sum atoms carry negative exponents"),
            };
        }
        let mut factors = Vec::new();
        if !c.is_one() {
            factors.push(Expr::rational(c.clone()));
        }
        for (a, &k) in m {
            factors.push(Expr::from_terms(expand_factors(Rational::one(), [(a, k)])));
        }
        ExprView::Product(factors)
    }

    /// Integer power. Negative powers of zero are an error.
    pub fn powi(&self, k: i64) -> Result<Expr, ExprError> {
        match k {
            0 => Ok(Expr::one()),
            k if k > 0 => {
                if let Some((m, c)) = self.single_term() {
                    let f = m.iter().map(|(a, &e)| (a, e * k));
                    return Ok(Expr::from_terms(expand_factors(rational_pow(c, k), f)));
                }
                Ok(Expr::from_terms(pow_raw(&self.0, k as u32)))
            }
            k => self.pow_neg(-k, 0),
        }
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        self.powi(-1)
    }

    pub fn checked_div(&self, rhs: &Expr) -> Result<Expr, ExprError> {
        Ok(self * &rhs.recip()?)
    }

    fn pow_neg(&self, k: i64, depth: usize) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if let Some((m, c)) = self.single_term() {
            let f = m.iter().map(|(a, &e)| (a, -e * k));
            return Ok(Expr::from_terms(expand_factors(rational_pow(c, -k), f)));
        }
        // Pull out the monomial content so the inverted sum is primitive.
        let mut content: BTreeMap<Atom, i64> = BTreeMap::new();
        let all_atoms: BTreeSet<&Atom> = self.0.keys().flat_map(|m| m.keys()).collect();
        for a in all_atoms {
            let e = self.0.keys().map(|m| m.get(a).copied().unwrap_or(0)).min().unwrap_or(0);
            if e != 0 {
                content.insert(a.clone(), e);
            }
        }
        let mut primitive = Terms::new();
        for (m, c) in self.0.iter() {
            let factors = m.iter().map(|(a, &e)| (a, e - content.get(a).copied().unwrap_or(0)));
            for (pm, pc) in expand_factors(c.clone(), factors) {
                add_into(&mut primitive, pm, pc);
            }
        }
        let lead = match primitive.values().next() {
            Some(c) => c.clone(),
            None => return Err(ExprError::DivisionByZero),
        };
        let primitive: Terms = primitive.into_iter().map(|(m, c)| (m, c / &lead)).collect();
        let primitive = Expr::from_terms(primitive);
        let outer = expand_factors(rational_pow(&lead, -k), content.iter().map(|(a, &e)| (a, -e * k)));
        let outer = Expr::from_terms(outer);
        if primitive.len() >= 2 && ((content.is_empty() && lead.is_one()) || depth > 8) {
            let atom = Atom::Sum(primitive);
            let inv = Expr::from_terms(Terms::from([(Monomial::from([(atom, -k)]), Rational::one())]));
            return Ok(&outer * &inv);
        }
        Ok(&outer * &primitive.pow_neg(k, depth + 1)?)
    }

    /// Rebuilds the expression, replacing every atom by `f(atom)`.
    pub(crate) fn map_atoms<E>(&self, mut f: impl FnMut(&Atom) -> Result<Expr, E>) -> Result<Expr, E>
    where
        E: From<ExprError>,
    {
        let mut acc = Terms::new();
        for (m, c) in self.0.iter() {
            let mut term = Expr::rational(c.clone());
            for (a, &k) in m {
                let img = f(a)?;
                term = &term * &img.powi(k)?;
            }
            for (tm, tc) in term.0.iter() {
                add_into(&mut acc, tm.clone(), tc.clone());
            }
        }
        Ok(Expr::from_terms(acc))
    }

    /// Simultaneous substitution of symbols.
    pub fn substitute(&self, bindings: &BTreeMap<String, Expr>) -> Result<Expr, ExprError> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        self.map_atoms(|a| subst_atom(a, bindings))
    }

    /// Convenience form of [`Expr::substitute`] over `(name, value)` pairs.
    pub fn subs<'a>(&self, pairs: impl IntoIterator<Item = (&'a str, Expr)>) -> Result<Expr, ExprError> {
        let map: BTreeMap<String, Expr> = pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        self.substitute(&map)
    }

    /// Partial derivative with respect to the symbol `s`.
    pub fn diff(&self, s: &str) -> Expr {
        let mut acc = Terms::new();
        for (m, c) in self.0.iter() {
            for (a, &k) in m {
                let da = diff_atom(a, s);
                if da.is_zero() {
                    continue;
                }
                let rest = m.iter().map(|(b, &e)| if b == a { (b, e - 1) } else { (b, e) });
                let coeff = c * Rational::from_integer(BigInt::from(k));
                let part = Expr::from_terms(expand_factors(coeff, rest));
                for (tm, tc) in mul_raw(&part.0, &da.0) {
                    add_into(&mut acc, tm, tc);
                }
            }
        }
        Expr::from_terms(acc)
    }

    pub fn free_symbols(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Arc<str>>) {
        for m in self.0.keys() {
            for a in m.keys() {
                match a {
                    Atom::Sym(s) => {
                        out.insert(s.clone());
                    }
                    Atom::Elem(_, e) | Atom::Opaque { arg: e, .. } | Atom::Sum(e) => e.collect_symbols(out),
                }
            }
        }
    }

    /// Names of the opaque functions referenced anywhere in the expression.
    pub fn opaque_names(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_opaques(&mut out);
        out
    }

    fn collect_opaques(&self, out: &mut BTreeSet<Arc<str>>) {
        for m in self.0.keys() {
            for a in m.keys() {
                match a {
                    Atom::Sym(_) => {}
                    Atom::Opaque { name, arg, .. } => {
                        out.insert(name.clone());
                        arg.collect_opaques(out);
                    }
                    Atom::Elem(_, e) | Atom::Sum(e) => e.collect_opaques(out),
                }
            }
        }
    }

    pub fn depends_on(&self, s: &str) -> bool {
        self.free_symbols().iter().any(|x| &**x == s)
    }
}

fn subst_atom(a: &Atom, bindings: &BTreeMap<String, Expr>) -> Result<Expr, ExprError> {
    Ok(match a {
        Atom::Sym(s) => bindings.get(&**s).cloned().unwrap_or_else(|| Expr::atom(a.clone())),
        Atom::Elem(f, arg) => Expr::apply(*f, arg.substitute(bindings)?),
        Atom::Opaque { name, order, arg } => {
            Expr::atom(Atom::Opaque { name: name.clone(), order: *order, arg: arg.substitute(bindings)? })
        }
        Atom::Sum(d) => d.substitute(bindings)?,
    })
}

fn diff_atom(a: &Atom, s: &str) -> Expr {
    match a {
        Atom::Sym(x) => {
            if &**x == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Atom::Sum(d) => d.diff(s),
        Atom::Opaque { name, order, arg } => {
            let du = arg.diff(s);
            if du.is_zero() {
                return du;
            }
            let next = Expr::atom(Atom::Opaque { name: name.clone(), order: order + 1, arg: arg.clone() });
            &next * &du
        }
        Atom::Elem(f, u) => {
            let du = u.diff(s);
            if du.is_zero() {
                return du;
            }
            let outer = match f {
                ElemFn::Sin => u.clone().cos(),
                ElemFn::Cos => -u.clone().sin(),
                ElemFn::Exp => u.clone().exp(),
                ElemFn::Log => u.recip().expect("log argument with nonzero derivative is nonzero"),
                ElemFn::Sqrt => {
                    let r = Expr::atom(Atom::Elem(ElemFn::Sqrt, u.clone()));
                    &Expr::frac(1, 2) * &r.recip().expect("sqrt atom is nonzero")
                }
            };
            &outer * &du
        }
    }
}

impl fmt::Display for ElemFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let mut t = (*self.0).clone();
        for (m, c) in rhs.0.iter() {
            add_into(&mut t, m.clone(), c.clone());
        }
        Expr::from_terms(t)
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        if rhs.is_zero() {
            return self.clone();
        }
        let mut t = (*self.0).clone();
        for (m, c) in rhs.0.iter() {
            add_into(&mut t, m.clone(), -c.clone());
        }
        Expr::from_terms(t)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        Expr::from_terms(mul_raw(&self.0, &rhs.0))
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr(Arc::new(self.0.iter().map(|(m, c)| (m.clone(), -c.clone())).collect()))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                (&self).$method(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        let mut t = Terms::new();
        for e in iter {
            for (m, c) in e.0.iter() {
                add_into(&mut t, m.clone(), c.clone());
            }
        }
        Expr::from_terms(t)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

pub(crate) fn rational_to_f64(c: &Rational) -> f64 {
    match (c.numer().to_f64(), c.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => c.to_f64().unwrap_or(f64::NAN),
    }
}
