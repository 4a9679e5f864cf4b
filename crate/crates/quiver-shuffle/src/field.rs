//! The coefficient field `Frac(Z[q^±1, t_e^±1])`, its specializations and
//! numeric evaluation.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::int::Int;
use crate::poly::{exp_zero, Exp, Poly};

/// Laurent polynomial in the parameters.
pub type ParamPoly = Poly;

/// Ordered list of parameter names; index `i` is variable `x_i` of every
/// [`ParamPoly`] and [`RatFunc`] over this space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Params {
    names: Vec<String>,
}

impl Params {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if !is_ident(n) {
                return Err(Error::Invalid(format!("bad parameter name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(Error::Invalid(format!("duplicate parameter name {n:?}")));
            }
        }
        Ok(Params { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn var(&self, name: &str) -> Result<RatFunc> {
        let i = self.index(name).ok_or_else(|| Error::UnknownParameter(name.into()))?;
        Ok(RatFunc::from_poly(Poly::var(self.len(), i)))
    }

    pub fn parse(&self, s: &str) -> Result<RatFunc> {
        Parser::new(s, self).parse_all()
    }

    pub fn fmt_poly(&self, p: &ParamPoly) -> String {
        fmt_poly(p, &self.names)
    }

    pub fn fmt(&self, x: &RatFunc) -> String {
        let num = fmt_poly(&x.num, &self.names);
        if x.den.is_one() {
            return num;
        }
        let den = fmt_poly(&x.den, &self.names);
        let num = if x.num.len() == 1 { num } else { format!("({num})") };
        let den = if x.den.len() == 1 && !den.starts_with('-') { den } else { format!("({den})") };
        format!("{num}/{den}")
    }
}

fn is_ident(s: &str) -> bool {
    let mut ch = s.chars();
    match ch.next() {
        Some(c) if c.is_ascii_alphabetic() => ch.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

fn fmt_poly(p: &Poly, names: &[String]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (e, c)) in p.terms().iter().rev().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        for (i, &x) in e.iter().enumerate() {
            match x {
                0 => {}
                1 => factors.push(names[i].clone()),
                _ => factors.push(format!("{}^{}", names[i], x)),
            }
        }
        if factors.is_empty() {
            let _ = write!(out, "{a}");
        } else {
            if !a.is_one() {
                let _ = write!(out, "{a}*");
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}

/// Element of the coefficient field in canonical form.
///
/// The numerator is a Laurent polynomial; the denominator is a genuine polynomial
/// with no monomial factor, coprime to the numerator, with positive leading coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl core::fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "({:?})/({:?})", self.num, self.den)
    }
}

impl RatFunc {
    pub fn zero(nvars: usize) -> Self {
        RatFunc { num: Poly::zero(nvars), den: Poly::one(nvars) }
    }

    pub fn one(nvars: usize) -> Self {
        RatFunc { num: Poly::one(nvars), den: Poly::one(nvars) }
    }

    pub fn from_int(nvars: usize, c: impl Into<Int>) -> Self {
        RatFunc { num: Poly::constant(nvars, c.into()), den: Poly::one(nvars) }
    }

    pub fn from_poly(p: Poly) -> Self {
        let n = p.nvars();
        RatFunc { num: p, den: Poly::one(n) }
    }

    /// Builds `num / den` in canonical form.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        let n = num.nvars();
        if num.is_zero() {
            return RatFunc::zero(n);
        }
        let (shift, mut d) = den.strip_monomial();
        let mut num = if shift.iter().any(|&x| x != 0) {
            let neg: Exp = shift.iter().map(|x| -x).collect();
            num.mul_monomial(&neg, &Int::ONE)
        } else {
            num
        };
        if let Some(c) = d.as_constant() {
            let g = num.content_int().gcd(&c);
            let g = if c.is_negative() { -g } else { g };
            num = num.div_int_exact(&g).unwrap();
            d = Poly::constant(n, c.div_exact(&g).unwrap());
            return RatFunc { num, den: d };
        }
        let g = num.gcd(&d);
        if !g.is_one() {
            num = num.div_exact(&g).expect("gcd divides numerator");
            d = d.div_exact(&g).expect("gcd divides denominator");
        }
        if let Some(c) = d.as_constant() {
            if c.is_negative() {
                num = num.neg();
                d = d.neg();
            }
            return RatFunc { num, den: d };
        }
        if d.leading_sign() < 0 {
            num = num.neg();
            d = d.neg();
        }
        RatFunc { num, den: d }
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn into_parts(self) -> (Poly, Poly) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFunc::from_poly(self.num.add(&o.num));
        }
        if self.den == o.den {
            return Self::canonical(self.num.add(&o.num), self.den.clone());
        }
        Self::canonical(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero(self.nvars());
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFunc::from_poly(self.num.mul(&o.num));
        }
        Self::canonical(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn mul_poly(&self, p: &Poly) -> RatFunc {
        if self.den.is_one() {
            return RatFunc::from_poly(self.num.mul(p));
        }
        Self::canonical(self.num.mul(p), self.den.clone())
    }

    pub fn inv(&self) -> Result<RatFunc> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::canonical(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &RatFunc) -> Result<RatFunc> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::canonical(self.num.mul(&o.den), self.den.mul(&o.num)))
    }

    pub fn pow(&self, k: i32) -> Result<RatFunc> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let k = k.unsigned_abs();
        Ok(RatFunc { num: base.num.pow(k), den: base.den.pow(k) })
    }

    /// Exact value at a rational point.
    pub fn eval(&self, point: &[BigRational]) -> Result<BigRational> {
        if point.len() != self.nvars() {
            return Err(Error::Arity { expected: self.nvars(), found: point.len() });
        }
        let d = self.den.eval(point).ok_or(Error::EvaluationPole)?;
        if d.is_zero() {
            return Err(Error::EvaluationPole);
        }
        let n = self.num.eval(point).ok_or(Error::EvaluationPole)?;
        Ok(n / d)
    }
}

/// `numeric_eval`: exact value of `x` under a rational assignment of all parameters.
pub fn numeric_eval(x: &RatFunc, assignment: &[BigRational]) -> Result<BigRational> {
    x.eval(assignment)
}

/// A declared root variable `var` with `var^power = q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootAdjunction {
    pub var: String,
    pub power: u32,
}

/// Ring homomorphism sending every source parameter to a monomial in target parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Specialization {
    source: Params,
    target: Params,
    images: Vec<Exp>,
    roots: Vec<RootAdjunction>,
}

impl Specialization {
    pub fn identity(params: &Params) -> Self {
        let n = params.len();
        let images = (0..n)
            .map(|i| {
                let mut e = exp_zero(n);
                e[i] = 1;
                e
            })
            .collect();
        Specialization { source: params.clone(), target: params.clone(), images, roots: Vec::new() }
    }

    pub fn new(source: Params, target: Params, images: Vec<Exp>, roots: Vec<RootAdjunction>) -> Result<Self> {
        if images.len() != source.len() {
            return Err(Error::Arity { expected: source.len(), found: images.len() });
        }
        if let Some(e) = images.iter().find(|e| e.len() != target.len()) {
            return Err(Error::Arity { expected: target.len(), found: e.len() });
        }
        for r in &roots {
            let u = target.index(&r.var).ok_or_else(|| Error::UnknownParameter(r.var.clone()))?;
            if r.power == 0 {
                return Err(Error::Invalid("root power must be positive".into()));
            }
            if let Some(qi) = source.index("q") {
                let mut want = exp_zero(target.len());
                want[u] = r.power as i32;
                if images[qi] != want {
                    return Err(Error::Invalid(format!(
                        "root adjunction {}^{} = q does not match the image of q",
                        r.var, r.power
                    )));
                }
            }
        }
        Ok(Specialization { source, target, images, roots })
    }

    /// Parses `"q=u2^2, ta=u2"`; unlisted source parameters map to themselves.
    /// Target variables named `u<k>` declare the root adjunction `u<k>^k = q`.
    pub fn parse(source: &Params, text: &str) -> Result<Self> {
        let mut assigned: Vec<Option<Vec<(String, i32)>>> = alloc::vec![None; source.len()];
        let mut target_names: Vec<String> = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (lhs, rhs) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected name=monomial in {part:?}")))?;
            let lhs = lhs.trim();
            let si = source.index(lhs).ok_or_else(|| Error::UnknownParameter(lhs.into()))?;
            if assigned[si].is_some() {
                return Err(Error::Parse(format!("{lhs} assigned twice")));
            }
            let mono = parse_monomial(rhs.trim())?;
            for (n, _) in &mono {
                if !target_names.contains(n) {
                    target_names.push(n.clone());
                }
            }
            assigned[si] = Some(mono);
        }
        for (i, a) in assigned.iter().enumerate() {
            if a.is_none() {
                let n = &source.names()[i];
                if !target_names.contains(n) {
                    target_names.push(n.clone());
                }
            }
        }
        target_names.sort_by(|a, b| (a != "q").cmp(&(b != "q")).then(core::cmp::Ordering::Equal));
        let target = Params::new(target_names.clone())?;
        let mut images = Vec::with_capacity(source.len());
        for (i, a) in assigned.into_iter().enumerate() {
            let mut e = exp_zero(target.len());
            match a {
                Some(mono) => {
                    for (n, k) in mono {
                        e[target.index(&n).unwrap()] += k;
                    }
                }
                None => e[target.index(&source.names()[i]).unwrap()] = 1,
            }
            images.push(e);
        }
        let mut roots = Vec::new();
        for n in &target_names {
            if let Some(k) = n.strip_prefix('u').and_then(|k| k.parse::<u32>().ok()) {
                roots.push(RootAdjunction { var: n.clone(), power: k });
            }
        }
        Specialization::new(source.clone(), target, images, roots)
    }

    pub fn source(&self) -> &Params {
        &self.source
    }

    pub fn target(&self) -> &Params {
        &self.target
    }

    pub fn images(&self) -> &[Exp] {
        &self.images
    }

    pub fn roots(&self) -> &[RootAdjunction] {
        &self.roots
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && *self == Specialization::identity(&self.source)
    }

    /// Image of a source exponent vector.
    pub fn map_exp(&self, e: &[i32]) -> Exp {
        let mut out = exp_zero(self.target.len());
        for (k, img) in e.iter().zip(&self.images) {
            if *k != 0 {
                for (o, v) in out.iter_mut().zip(img) {
                    *o += k * v;
                }
            }
        }
        out
    }

    pub fn apply_poly(&self, p: &Poly) -> Poly {
        p.map_monomials(&self.images, self.target.len())
    }

    /// `specialize`: ring-homomorphism image of `x`.
    pub fn apply(&self, x: &RatFunc) -> Result<RatFunc> {
        if x.nvars() != self.source.len() {
            return Err(Error::Arity { expected: self.source.len(), found: x.nvars() });
        }
        let den = self.apply_poly(x.den());
        if den.is_zero() {
            return Err(Error::SpecializationPole);
        }
        RatFunc::new(self.apply_poly(x.num()), den)
    }

    /// Text form `q=u2^2, ta=u2`, listing only non-identity images.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (i, img) in self.images.iter().enumerate() {
            let name = &self.source.names()[i];
            let identity = self.target.index(name).map(|t| {
                let mut e = exp_zero(self.target.len());
                e[t] = 1;
                e == *img
            });
            if identity == Some(true) {
                continue;
            }
            let p = Poly::monomial(img.clone(), Int::ONE);
            parts.push(format!("{name}={}", self.target.fmt_poly(&p)));
        }
        if parts.is_empty() {
            "identity".to_string()
        } else {
            parts.join(", ")
        }
    }
}

pub fn specialize(x: &RatFunc, s: &Specialization) -> Result<RatFunc> {
    s.apply(x)
}

/// Checks `0 < |q| < |t_e| < 1` for the values induced by a witness of the target parameters.
pub fn validate_torus_witness(s: &Specialization, witness: &[BigRational]) -> bool {
    if witness.len() != s.target.len() {
        return false;
    }
    let mut values = Vec::with_capacity(s.source.len());
    for img in &s.images {
        match Poly::monomial(img.clone(), Int::ONE).eval(witness) {
            Some(v) => values.push(v.abs()),
            None => return false,
        }
    }
    let qi = match s.source.index("q") {
        Some(i) => i,
        None => return false,
    };
    let q = &values[qi];
    let one = BigRational::one();
    if q.is_zero() || *q >= one {
        return false;
    }
    s.source
        .names()
        .iter()
        .enumerate()
        .filter(|(i, n)| *i != qi && n.starts_with('t'))
        .all(|(i, _)| values[i] > *q && values[i] < one)
}

/// Parses `u2=1/2, q=-3` into values for every parameter of `target`.
pub fn parse_witness(target: &Params, text: &str) -> Result<Vec<BigRational>> {
    let mut out: Vec<Option<BigRational>> = alloc::vec![None; target.len()];
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part.split_once('=').ok_or_else(|| Error::Parse(format!("expected name=value, found {part:?}")))?;
        let i = target.index(name.trim()).ok_or_else(|| Error::UnknownParameter(name.trim().into()))?;
        let v: BigRational = value.trim().parse().map_err(|_| Error::Parse(format!("bad rational {value:?}")))?;
        if out[i].replace(v).is_some() {
            return Err(Error::DuplicateBinding(name.trim().into()));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Invalid(format!("witness misses parameter {}", target.names()[i]))))
        .collect()
}

fn parse_monomial(s: &str) -> Result<Vec<(String, i32)>> {
    let mut out = Vec::new();
    for f in s.split('*').map(str::trim) {
        let (name, pow) = match f.split_once('^') {
            Some((n, p)) => {
                let p: i32 = p.trim().parse().map_err(|_| Error::Parse(format!("bad exponent in {f:?}")))?;
                (n.trim(), p)
            }
            None => (f, 1),
        };
        if !is_ident(name) {
            return Err(Error::Parse(format!("expected a parameter monomial, found {s:?}")));
        }
        out.push((name.to_string(), pow));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    params: &'a Params,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str, params: &'a Params) -> Self {
        Parser { src: s.as_bytes(), pos: 0, params }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("{msg} at offset {}", self.pos)))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse_all(mut self) -> Result<RatFunc> {
        let v = self.expr()?;
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(v)
    }

    fn expr(&mut self) -> Result<RatFunc> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatFunc> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                b'/' => {
                    self.pos += 1;
                    acc = acc.div(&self.unary()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RatFunc> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RatFunc> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = match self.peek() {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                _ => false,
            };
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return self.err("expected integer exponent");
            }
            let k: i32 = core::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| Error::Parse("exponent out of range".into()))?;
            return base.pow(if neg { -k } else { k });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFunc> {
        let n = self.params.len();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let s = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let b: num_bigint::BigInt = s.parse().map_err(|_| Error::Parse("bad integer".into()))?;
                Ok(RatFunc::from_int(n, Int::from(b)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let s = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                self.params.var(s)
            }
            _ => self.err("unexpected token"),
        }
    }
}
