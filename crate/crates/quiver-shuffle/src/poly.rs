//! Sparse Laurent polynomials over `Z` with a fixed number of variables.
//!
//! Terms are kept sorted by exponent vector in ascending lexicographic order,
//! so translating by a monomial preserves the order and terms sharing a prefix
//! of exponents are contiguous.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::HashMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use smallvec::SmallVec;

use crate::int::Int;
use crate::packed::{self, Division, Packed, Packing};

/// Largest dense accumulator used by [`Poly::sum_of_products`].
const DENSE_CELLS: i64 = 1 << 22;

/// Exponent vector of a monomial.
pub type Exp = SmallVec<[i32; 8]>;

pub fn exp_zero(n: usize) -> Exp {
    smallvec::smallvec![0; n]
}

pub fn exp_add(a: &[i32], b: &[i32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn exp_sub(a: &[i32], b: &[i32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Sparse Laurent polynomial with integer coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: Vec<(Exp, Int)>,
}

impl core::fmt::Debug for Poly {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("Poly[")?;
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*{:?}", e.as_slice())?;
        }
        f.write_str("]")
    }
}

/// Hash-based accumulator for building polynomials term by term.
#[derive(Clone, Debug)]
pub struct PolyAcc {
    nvars: usize,
    map: HashMap<Exp, Int>,
}

impl PolyAcc {
    pub fn new(nvars: usize) -> Self {
        PolyAcc { nvars, map: HashMap::new() }
    }

    pub fn with_capacity(nvars: usize, cap: usize) -> Self {
        PolyAcc { nvars, map: HashMap::with_capacity(cap) }
    }

    pub fn add_term(&mut self, e: Exp, c: &Int) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.map.entry(e) {
            hashbrown::hash_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
            }
            hashbrown::hash_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
        }
    }

    pub fn add_poly(&mut self, p: &Poly) {
        for (e, c) in &p.terms {
            self.add_term(e.clone(), c);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.map.values().all(|c| c.is_zero())
    }

    pub fn finish(self) -> Poly {
        let mut terms: Vec<(Exp, Int)> = self.map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Poly { nvars: self.nvars, terms }
    }
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: Int) -> Self {
        if c.is_zero() {
            return Poly::zero(nvars);
        }
        Poly { nvars, terms: vec![(exp_zero(nvars), c)] }
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Int::ONE)
    }

    pub fn monomial(e: Exp, c: Int) -> Self {
        let nvars = e.len();
        if c.is_zero() {
            return Poly::zero(nvars);
        }
        Poly { nvars, terms: vec![(e, c)] }
    }

    /// The variable `x_i` raised to the power `k`.
    pub fn var_pow(nvars: usize, i: usize, k: i32) -> Self {
        let mut e = exp_zero(nvars);
        e[i] = k;
        Poly::monomial(e, Int::ONE)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Poly::var_pow(nvars, i, 1)
    }

    /// Builds a polynomial from arbitrary terms, combining duplicates.
    pub fn from_terms(nvars: usize, mut terms: Vec<(Exp, Int)>) -> Self {
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Exp, Int)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            debug_assert_eq!(e.len(), nvars);
            if let Some(last) = out.last_mut() {
                if last.0 == e {
                    last.1 += &c;
                    continue;
                }
            }
            out.push((e, c));
        }
        out.retain(|t| !t.1.is_zero());
        Poly { nvars, terms: out }
    }

    /// Wraps terms that are already sorted, distinct and nonzero.
    pub fn from_sorted_terms(nvars: usize, terms: Vec<(Exp, Int)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(terms.iter().all(|t| !t.1.is_zero() && t.0.len() == nvars));
        Poly { nvars, terms }
    }

    /// Sum of many polynomials by balanced merging.
    pub fn sum(nvars: usize, polys: impl IntoIterator<Item = Poly>) -> Poly {
        let mut slots: Vec<Poly> = Vec::new();
        for (n, p) in polys.into_iter().enumerate() {
            // binary counter: slot sizes follow the bits of n
            let mut carry = p;
            let mut k = n;
            while k & 1 == 1 {
                carry = slots.pop().unwrap().add(&carry);
                k >>= 1;
            }
            slots.push(carry);
        }
        slots.into_iter().fold(Poly::zero(nvars), |a, b| a.add(&b))
    }

    /// `Σ a_k · b_k`, accumulated in a dense array when the exponent box is small.
    pub fn sum_of_products(nvars: usize, pairs: &[(&Poly, &Poly)]) -> Poly {
        let pairs: Vec<&(&Poly, &Poly)> = pairs.iter().filter(|(a, b)| !a.is_zero() && !b.is_zero()).collect();
        let dense = (|| {
            let first = pairs.first()?;
            let mut lo = exp_add(&first.0.min_exps(), &first.1.min_exps());
            let mut hi = exp_add(&first.0.max_exps(), &first.1.max_exps());
            for (a, b) in &pairs[1..] {
                let (l, h) = (exp_add(&a.min_exps(), &b.min_exps()), exp_add(&a.max_exps(), &b.max_exps()));
                for v in 0..nvars {
                    lo[v] = lo[v].min(l[v]);
                    hi[v] = hi[v].max(h[v]);
                }
            }
            // lex order = index order: variable 0 gets the largest stride
            let mut strides = alloc::vec![0i64; nvars];
            let mut cells: i64 = 1;
            for v in (0..nvars).rev() {
                strides[v] = cells;
                cells = cells.checked_mul(i64::from(hi[v]) - i64::from(lo[v]) + 1)?;
                if cells > DENSE_CELLS {
                    return None;
                }
            }
            let index = |e: &[i32]| -> i64 { e.iter().zip(&strides).map(|(&x, &s)| i64::from(x) * s).sum() };
            let base = index(&lo);
            let mut acc = alloc::vec![0i128; cells as usize];
            for (a, b) in &pairs {
                let bs: Vec<(i64, i128)> = b.terms.iter().map(|(e, c)| Some((index(e), i128::from(c.to_i64()?)))).collect::<Option<_>>()?;
                for (ea, ca) in &a.terms {
                    let (ia, ca) = (index(ea) - base, i128::from(ca.to_i64()?));
                    for &(ib, cb) in &bs {
                        let slot = &mut acc[(ia + ib) as usize];
                        *slot = slot.checked_add(ca * cb)?;
                    }
                }
            }
            let mut terms = Vec::new();
            for (k, &c) in acc.iter().enumerate() {
                if c != 0 {
                    let mut rest = k as i64;
                    let e: Exp = (0..nvars)
                        .map(|v| {
                            let x = rest / strides[v];
                            rest %= strides[v];
                            lo[v] + x as i32
                        })
                        .collect();
                    let c = match i64::try_from(c) {
                        Ok(x) => Int::from(x),
                        Err(_) => Int::from(BigInt::from(c)),
                    };
                    terms.push((e, c));
                }
            }
            Some(Poly { nvars, terms })
        })();
        dense.unwrap_or_else(|| Poly::sum(nvars, pairs.iter().map(|(a, b)| a.mul(b))))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Exp, Int)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Exp, Int)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.iter().all(|&x| x == 0))
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].1.is_one() && self.terms[0].0.iter().all(|&x| x == 0)
    }

    /// The constant value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Int> {
        if self.terms.is_empty() {
            Some(Int::ZERO)
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Coefficient of the exponent `e`.
    pub fn coeff(&self, e: &[i32]) -> Int {
        match self.terms.binary_search_by(|t| t.0.as_slice().cmp(e)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Int::ZERO,
        }
    }

    /// Lexicographically largest term.
    pub fn leading(&self) -> Option<&(Exp, Int)> {
        self.terms.last()
    }

    /// Lexicographically smallest term.
    pub fn trailing(&self) -> Option<&(Exp, Int)> {
        self.terms.first()
    }

    pub fn neg(&self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        debug_assert_eq!(self.nvars, other.nvars);
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        Poly { nvars: self.nvars, terms: out }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        if other.is_zero() {
            return self.clone();
        }
        self.merge(other, true)
    }

    pub fn scale(&self, c: &Int) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        if c.is_one() {
            return self.clone();
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect() }
    }

    /// Multiplication by `c * x^e`; term order is preserved.
    pub fn mul_monomial(&self, e: &[i32], c: &Int) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(x, y)| (exp_add(x, e), y * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, other.nvars);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.nvars);
        }
        if other.terms.len() == 1 {
            return self.mul_monomial(&other.terms[0].0, &other.terms[0].1);
        }
        if self.terms.len() == 1 {
            return other.mul_monomial(&self.terms[0].0, &self.terms[0].1);
        }
        let (small, big) = if self.terms.len() <= other.terms.len() { (self, other) } else { (other, self) };
        if small.terms.len() * big.terms.len() <= 32 {
            let mut terms = Vec::with_capacity(small.terms.len() * big.terms.len());
            for (ea, ca) in &small.terms {
                for (eb, cb) in &big.terms {
                    terms.push((exp_add(ea, eb), ca * cb));
                }
            }
            return Poly::from_terms(self.nvars, terms);
        }
        let (la, ha) = (small.min_exps(), small.max_exps());
        let (lb, hb) = (big.min_exps(), big.max_exps());
        if let Some(p) = Packing::new(&exp_add(&la, &lb), &exp_add(&ha, &hb)) {
            let pair = |e: &Exp, c: &Int, base: &Exp| Some((p.pack_from(e, base), c.to_i64()?));
            let keys: Option<Packed> = big.terms.iter().map(|(e, c)| pair(e, c, &lb)).collect();
            let offsets: Option<Packed> = small.terms.iter().map(|(e, c)| pair(e, c, &la)).collect();
            if let Some(prod) = keys.zip(offsets).and_then(|(k, o)| packed::mul_offsets(&k, &o)) {
                return p.to_poly(prod);
            }
        }
        let mut acc = PolyAcc::with_capacity(self.nvars, big.terms.len() * 2);
        for (ea, ca) in &small.terms {
            for (eb, cb) in &big.terms {
                acc.add_term(exp_add(ea, eb), &(ca * cb));
            }
        }
        acc.finish()
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Componentwise minimum of the exponents (zero vector for the zero polynomial).
    pub fn min_exps(&self) -> Exp {
        let mut m = match self.terms.first() {
            Some(t) => t.0.clone(),
            None => return exp_zero(self.nvars),
        };
        for (e, _) in &self.terms[1..] {
            for (a, b) in m.iter_mut().zip(e) {
                if *b < *a {
                    *a = *b;
                }
            }
        }
        m
    }

    pub fn max_exps(&self) -> Exp {
        let mut m = match self.terms.first() {
            Some(t) => t.0.clone(),
            None => return exp_zero(self.nvars),
        };
        for (e, _) in &self.terms[1..] {
            for (a, b) in m.iter_mut().zip(e) {
                if *b > *a {
                    *a = *b;
                }
            }
        }
        m
    }

    /// Splits off the largest monomial factor: `self = x^shift * rest` with `rest` a
    /// genuine polynomial not divisible by any variable.
    pub fn strip_monomial(&self) -> (Exp, Poly) {
        let m = self.min_exps();
        if m.iter().all(|&x| x == 0) {
            return (m, self.clone());
        }
        let neg: Exp = m.iter().map(|x| -x).collect();
        (m, self.mul_monomial(&neg, &Int::ONE))
    }

    /// Non-negative gcd of the coefficients.
    pub fn content_int(&self) -> Int {
        let mut g = Int::ZERO;
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn div_int_exact(&self, d: &Int) -> Option<Poly> {
        if d.is_one() {
            return Some(self.clone());
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            terms.push((e.clone(), c.div_exact(d)?));
        }
        Some(Poly { nvars: self.nvars, terms })
    }

    /// Exact quotient `self / d` in the Laurent ring, or `None` when `d` does not divide.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero(self.nvars));
        }
        if d.terms.len() == 1 {
            let (e, c) = &d.terms[0];
            let neg: Exp = e.iter().map(|x| -x).collect();
            let mut terms = Vec::with_capacity(self.terms.len());
            for (x, y) in &self.terms {
                terms.push((exp_add(x, &neg), y.div_exact(c)?));
            }
            return Some(Poly { nvars: self.nvars, terms });
        }
        if let Some(q) = self.div_exact_packed(d) {
            return q;
        }
        let (dl, dc) = d.leading().unwrap();
        let lowest = exp_sub(&self.trailing().unwrap().0, &d.trailing().unwrap().0);
        let mut rem = self.clone();
        let mut quot: Vec<(Exp, Int)> = Vec::new();
        while let Some((rl, rc)) = rem.leading() {
            let e = exp_sub(rl, dl);
            if e < lowest {
                return None;
            }
            let c = rc.div_exact(dc)?;
            rem = rem.sub(&d.mul_monomial(&e, &c));
            quot.push((e, c));
        }
        quot.reverse();
        Some(Poly { nvars: self.nvars, terms: quot })
    }

    /// Sign making the leading (lex largest) coefficient positive.
    pub fn leading_sign(&self) -> i32 {
        self.leading().map(|t| t.1.signum()).unwrap_or(0)
    }

    pub fn normalize_sign(self) -> Poly {
        if self.leading_sign() < 0 {
            self.neg()
        } else {
            self
        }
    }

    /// Greatest common divisor in the Laurent ring, normalized as a genuine
    /// polynomial without monomial factors and with positive leading coefficient.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (_, a) = self.strip_monomial();
        let (_, b) = other.strip_monomial();
        if coprime_mod(&a, &b) {
            return Poly::constant(self.nvars, a.content_int().gcd(&b.content_int()));
        }
        if let Some(g) = heu_gcd(&a, &b) {
            return g.normalize_sign();
        }
        gcd_poly(&a, &b).normalize_sign()
    }

    /// Whether the variable `v` occurs.
    pub fn has_var(&self, v: usize) -> bool {
        self.terms.iter().any(|(e, _)| e[v] != 0)
    }

    /// Image under the monomial map sending `x_i` to `x^{images[i]}` in `target` variables.
    pub fn map_monomials(&self, images: &[Exp], target: usize) -> Poly {
        debug_assert_eq!(images.len(), self.nvars);
        if let Some(p) = self.map_monomials_packed(images, target) {
            return p;
        }
        let mut acc = PolyAcc::with_capacity(target, self.terms.len());
        for (e, c) in &self.terms {
            let mut ne = exp_zero(target);
            for (k, img) in e.iter().zip(images) {
                if *k != 0 {
                    for (slot, v) in ne.iter_mut().zip(img) {
                        *slot += k * v;
                    }
                }
            }
            acc.add_term(ne, c);
        }
        acc.finish()
    }

    /// `map_monomials` on packed keys: the image key is affine in the source exponents.
    fn map_monomials_packed(&self, images: &[Exp], target: usize) -> Option<Poly> {
        if self.terms.is_empty() {
            return Some(Poly::zero(target));
        }
        let (lo, hi) = (self.min_exps(), self.max_exps());
        let (mut tlo, mut thi) = (exp_zero(target), exp_zero(target));
        for (i, img) in images.iter().enumerate() {
            for (v, &k) in img.iter().enumerate() {
                let (a, b) = (k.checked_mul(lo[i])?, k.checked_mul(hi[i])?);
                tlo[v] = tlo[v].checked_add(a.min(b))?;
                thi[v] = thi[v].checked_add(a.max(b))?;
            }
        }
        let src = Packing::new(&lo, &hi)?;
        let dst = Packing::new(&tlo, &thi)?;
        let base = dst.pack(&(0..target).map(|v| (0..self.nvars).map(|i| images[i][v] * lo[i]).sum()).collect::<Exp>());
        let steps: Vec<u64> = images.iter().map(|img| dst.offset(img)).collect();
        let terms: Option<Packed> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let k = src.pack(e);
                let key = (0..self.nvars).fold(base, |acc, i| acc.wrapping_add(steps[i].wrapping_mul(src.field(k, i))));
                Some((key, c.to_i64()?))
            })
            .collect();
        Some(dst.to_poly(packed::normalize(terms?)?))
    }

    /// Re-embeds into `target` variables, sending variable `i` to `positions[i]`.
    pub fn embed(&self, target: usize, positions: &[usize]) -> Poly {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut ne = exp_zero(target);
                for (k, &p) in e.iter().zip(positions) {
                    ne[p] += k;
                }
                (ne, c.clone())
            })
            .collect();
        Poly::from_terms(target, terms)
    }

    /// Exact evaluation; `None` when a variable with a negative exponent is zero.
    pub fn eval(&self, point: &[BigRational]) -> Option<BigRational> {
        debug_assert_eq!(point.len(), self.nvars);
        let mut total = BigRational::zero();
        for (e, c) in &self.terms {
            let mut v = BigRational::from_integer(c.to_big());
            for (k, x) in e.iter().zip(point) {
                if *k == 0 {
                    continue;
                }
                if *k < 0 && x.is_zero() {
                    return None;
                }
                let p = num_traits::pow(x.clone(), k.unsigned_abs() as usize);
                if *k > 0 {
                    v *= p;
                } else {
                    v /= p;
                }
            }
            total += v;
        }
        Some(total)
    }

    /// Evaluation modulo a prime `p` at integer points; `None` on a vanishing inverse.
    pub fn eval_mod(&self, point: &[u64], p: u64) -> Option<u64> {
        let mut total: u64 = 0;
        for (e, c) in &self.terms {
            let cm = {
                let b = c.to_big() % BigInt::from(p);
                let b = if b < BigInt::zero() { b + BigInt::from(p) } else { b };
                num_traits::ToPrimitive::to_u64(&b).unwrap()
            };
            let mut v = cm;
            for (k, x) in e.iter().zip(point) {
                if *k == 0 {
                    continue;
                }
                let base = if *k < 0 { inv_mod(*x, p)? } else { *x };
                v = mulmod(v, powmod(base, k.unsigned_abs() as u64, p), p);
            }
            total = (total + v) % p;
        }
        Some(total)
    }
}

impl Poly {
    /// Exact quotient by the binomial `x_v - m`, where the monomial `m = c·x^e` does not
    /// involve `x_v`. Returns `None` when the remainder `self|_{x_v = m}` is nonzero.
    pub fn div_linear(&self, v: usize, e: &[i32], c: &Int) -> Option<Poly> {
        debug_assert_eq!(e[v], 0);
        if self.is_zero() {
            return Some(self.clone());
        }
        let lo = self.terms.iter().map(|t| t.0[v]).min().unwrap();
        let hi = self.terms.iter().map(|t| t.0[v]).max().unwrap();
        let width = (hi - lo + 1) as usize;
        if let Some(q) = self.div_linear_packed(v, e, c, width) {
            return q;
        }
        let mut by_deg: Vec<Vec<(Exp, Int)>> = vec![Vec::new(); width];
        for (x, k) in &self.terms {
            let mut x = x.clone();
            let d = x[v];
            x[v] = 0;
            by_deg[(d - lo) as usize].push((x, k.clone()));
        }
        let by_deg: Vec<Poly> = by_deg.into_iter().map(|t| Poly::from_terms(self.nvars, t)).collect();
        // Q_{k-1} = P_k + m Q_k from the top down; the last carry is the remainder.
        let mut quot: Vec<Poly> = vec![Poly::zero(self.nvars); width];
        let mut carry = Poly::zero(self.nvars);
        for k in (0..width).rev() {
            let qk = by_deg[k].add(&carry);
            if k == 0 {
                if !qk.is_zero() {
                    return None;
                }
                break;
            }
            carry = qk.mul_monomial(e, c);
            quot[k - 1] = qk;
        }
        let mut acc = PolyAcc::with_capacity(self.nvars, self.terms.len());
        for (k, qk) in quot.iter().enumerate() {
            for (x, a) in &qk.terms {
                let mut x = x.clone();
                x[v] = lo + k as i32;
                acc.add_term(x, a);
            }
        }
        Some(acc.finish())
    }

    /// `div_linear` on packed keys; `None` when the exponent ranges do not fit.
    fn div_exact_packed(&self, d: &Poly) -> Option<Option<Poly>> {
        let n = self.nvars;
        let (lo, hi) = (self.min_exps(), self.max_exps());
        let qlo = exp_sub(&lo, &d.min_exps());
        let qhi = exp_sub(&hi, &d.max_exps());
        if (0..n).any(|v| qlo[v] > qhi[v]) {
            return Some(None);
        }
        let p = Packing::new(&lo, &hi)?;
        let f = p.pack_poly(self)?;
        let d0 = &d.leading().unwrap().0;
        let base = p.offset(d0);
        let e: Packed = d.terms.iter().rev().map(|(x, c)| Some((p.offset(x).wrapping_sub(base), c.to_i64()?))).collect::<Option<_>>()?;
        let admissible = |k: u64| {
            (0..n).all(|v| {
                let x = p.exponent(k, v) - d0[v];
                qlo[v] <= x && x <= qhi[v]
            })
        };
        match packed::div_exact(&f, &e, admissible) {
            Division::Exact(q) => {
                let terms = q.into_iter().rev().map(|(k, c)| (exp_sub(&p.unpack(k), d0), Int::from(c))).collect();
                Some(Some(Poly::from_sorted_terms(n, terms)))
            }
            Division::Remainder => Some(None),
            Division::Overflow => None,
        }
    }

    fn div_linear_packed(&self, v: usize, e: &[i32], c: &Int, width: usize) -> Option<Option<Poly>> {
        let (mut lo, mut hi) = (self.min_exps(), self.max_exps());
        let w = i32::try_from(width).ok()?;
        for i in 0..self.nvars {
            let reach = e[i].checked_mul(w)?;
            lo[i] = lo[i].checked_add(reach.min(0))?;
            hi[i] = hi[i].checked_add(reach.max(0))?;
        }
        let p = Packing::new(&lo, &hi)?;
        let keys = p.pack_poly(self)?;
        match packed::div_linear(&p, keys, v, p.offset(e), c.to_i64()?) {
            Division::Exact(q) => Some(Some(p.to_poly(q))),
            Division::Remainder => Some(None),
            Division::Overflow => None,
        }
    }

    /// Renames variables: variable `i` becomes variable `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Poly {
        let (lo, hi) = (self.min_exps(), self.max_exps());
        let (mut plo, mut phi) = (lo.clone(), hi.clone());
        for (i, &q) in perm.iter().enumerate() {
            plo[q] = lo[i];
            phi[q] = hi[i];
        }
        if let Some(p) = Packing::new(&plo, &phi) {
            let keys: Option<Packed> = self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut ne = e.clone();
                    for (i, &q) in perm.iter().enumerate() {
                        ne[q] = e[i];
                    }
                    Some((p.pack(&ne), c.to_i64()?))
                })
                .collect();
            if let Some(mut keys) = keys {
                keys.sort_unstable_by_key(|t| t.0);
                return p.to_poly(keys);
            }
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut ne = e.clone();
                for (i, &p) in perm.iter().enumerate() {
                    ne[p] = e[i];
                }
                (ne, c.clone())
            })
            .collect();
        Poly::from_terms(self.nvars, terms)
    }
}

pub(crate) fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    r
}

pub(crate) fn inv_mod(a: u64, p: u64) -> Option<u64> {
    if a % p == 0 {
        None
    } else {
        Some(powmod(a, p - 2, p))
    }
}

/// Coefficients of `p` viewed as a polynomial in `x_v` (index = degree).
/// Requires non-negative exponents in `x_v`.
fn to_univ(p: &Poly, v: usize) -> Vec<Poly> {
    let deg = p.terms.iter().map(|(e, _)| e[v]).max().unwrap_or(0);
    debug_assert!(p.terms.iter().all(|(e, _)| e[v] >= 0));
    let mut buckets: Vec<Vec<(Exp, Int)>> = vec![Vec::new(); deg as usize + 1];
    for (e, c) in &p.terms {
        let mut ne = e.clone();
        let d = ne[v] as usize;
        ne[v] = 0;
        buckets[d].push((ne, c.clone()));
    }
    buckets.into_iter().map(|t| Poly::from_terms(p.nvars, t)).collect()
}

fn from_univ(coeffs: &[Poly], v: usize, nvars: usize) -> Poly {
    let mut terms = Vec::new();
    for (d, c) in coeffs.iter().enumerate() {
        for (e, x) in &c.terms {
            let mut ne = e.clone();
            ne[v] = d as i32;
            terms.push((ne, x.clone()));
        }
    }
    Poly::from_terms(nvars, terms)
}

fn trim(c: &mut Vec<Poly>) {
    while c.len() > 1 && c.last().unwrap().is_zero() {
        c.pop();
    }
}

fn content_of(coeffs: &[Poly]) -> Poly {
    let nvars = coeffs[0].nvars;
    let mut g = Poly::zero(nvars);
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        g = gcd_poly(&g, c);
        if g.is_constant() && g.as_constant().map(|x| x.abs().is_one()).unwrap_or(false) {
            return Poly::one(nvars);
        }
    }
    g
}

fn univ_div(coeffs: &[Poly], d: &Poly) -> Vec<Poly> {
    coeffs.iter().map(|c| c.div_exact(d).expect("content divides coefficients")).collect()
}

/// Pseudo-remainder of `a` by `b` in the univariate view.
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let nb = b.len() - 1;
    let lc = &b[nb];
    let mut r: Vec<Poly> = a.to_vec();
    trim(&mut r);
    while r.len() > nb && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        let top = r[dr].clone();
        let shift = dr - nb;
        for c in r.iter_mut() {
            *c = c.mul(lc);
        }
        for (k, bc) in b.iter().enumerate() {
            let t = top.mul(bc);
            r[k + shift] = r[k + shift].sub(&t);
        }
        debug_assert!(r[dr].is_zero());
        r.pop();
        trim(&mut r);
        if r.is_empty() {
            r.push(Poly::zero(lc.nvars));
        }
    }
    r
}

/// Image of `p` in `F_prime[x_v]` with every other variable set to `point`; coefficients are
/// indexed by the exponent of `x_v`, which must be nonnegative.
fn univ_image(p: &Poly, v: usize, point: &[u64], prime: u64) -> Vec<u64> {
    let deg = p.terms.iter().map(|t| t.0[v]).max().unwrap_or(0) as usize;
    let mut out = vec![0u64; deg + 1];
    let pm = BigInt::from(prime);
    for (e, c) in &p.terms {
        let b = c.to_big() % &pm;
        let b = if b < BigInt::zero() { b + &pm } else { b };
        let mut x = num_traits::ToPrimitive::to_u64(&b).unwrap();
        for (u, (&k, &pt)) in e.iter().zip(point).enumerate() {
            if u != v && k != 0 {
                x = mulmod(x, powmod(pt, k as u64, prime), prime);
            }
        }
        let slot = &mut out[e[v] as usize];
        *slot = (*slot + x) % prime;
    }
    out
}

/// Degree of the gcd of two univariate polynomials over `F_prime`.
fn univ_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>, prime: u64) -> usize {
    let trim = |x: &mut Vec<u64>| {
        while x.last() == Some(&0) {
            x.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let inv = inv_mod(*b.last().unwrap(), prime).expect("nonzero leading coefficient");
        while a.len() >= b.len() {
            let f = mulmod(*a.last().unwrap(), inv, prime);
            let off = a.len() - b.len();
            for (k, &y) in b.iter().enumerate() {
                a[off + k] = (a[off + k] + prime - mulmod(f, y, prime)) % prime;
            }
            trim(&mut a);
        }
        core::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Certifies that two polynomials (nonnegative exponents) have a constant gcd: for each
/// shared variable, an image at a point keeping the leading coefficient nonzero has
/// coprime univariate images. `false` means undecided.
fn coprime_mod(a: &Poly, b: &Poly) -> bool {
    const SEED: u64 = 0x6763_645f_7072_6f62;
    let prime = crate::linalg::PROBE_PRIME;
    if a.is_zero() || b.is_zero() {
        return false;
    }
    let point = crate::linalg::probe_point(a.nvars, SEED);
    (0..a.nvars).filter(|&v| a.has_var(v) && b.has_var(v)).all(|v| {
        let ia = univ_image(a, v, &point, prime);
        *ia.last().unwrap() != 0 && univ_gcd_degree(ia, univ_image(b, v, &point, prime), prime) == 0
    })
}

/// `p` with `x_v` set to the integer `xi`.
fn eval_at(p: &Poly, v: usize, xi: &BigInt) -> Poly {
    let deg = p.terms.iter().map(|t| t.0[v]).max().unwrap_or(0) as usize;
    let mut powers = vec![BigInt::one()];
    for k in 0..deg {
        let next = &powers[k] * xi;
        powers.push(next);
    }
    let terms = p
        .terms
        .iter()
        .map(|(e, c)| {
            let mut ne = e.clone();
            ne[v] = 0;
            (ne, Int::from(c.to_big() * &powers[e[v] as usize]))
        })
        .collect();
    Poly::from_terms(p.nvars, terms)
}

/// Inverse of [`eval_at`] for small coefficients: balanced base-`xi` digits of each
/// coefficient become the coefficients of powers of `x_v`.
fn lift_digits(p: &Poly, v: usize, xi: &BigInt) -> Poly {
    let half = xi / BigInt::from(2);
    let mut terms = Vec::new();
    for (e, c) in &p.terms {
        let mut c = c.to_big();
        let mut k = 0;
        while !c.is_zero() {
            let mut d = &c % xi;
            if d > half {
                d -= xi;
            } else if d < -&half {
                d += xi;
            }
            c = (&c - &d) / xi;
            if !d.is_zero() {
                let mut ne = e.clone();
                ne[v] = k;
                terms.push((ne, Int::from(d)));
            }
            k += 1;
        }
    }
    Poly::from_terms(p.nvars, terms)
}

fn max_norm(p: &Poly) -> BigInt {
    p.terms.iter().map(|t| t.1.abs().to_big()).max().unwrap_or_default()
}

/// Heuristic gcd of genuine polynomials: evaluates one variable at a large integer, takes the
/// gcd of the images recursively and reconstructs a candidate from its digits. A candidate is
/// returned only after it divides both inputs; `None` when all evaluation points fail.
fn heu_gcd(a: &Poly, b: &Poly) -> Option<Poly> {
    let nvars = a.nvars;
    if a.is_zero() || b.is_zero() {
        return Some(if a.is_zero() { b.clone() } else { a.clone() });
    }
    let (ca, cb) = (a.content_int(), b.content_int());
    let content = Poly::constant(nvars, ca.gcd(&cb));
    let Some(v) = (0..nvars).rev().find(|&v| a.has_var(v) || b.has_var(v)) else {
        return Some(content);
    };
    let a = a.div_int_exact(&ca)?;
    let b = b.div_int_exact(&cb)?;
    let norm = max_norm(&a).min(max_norm(&b));
    let mut xi = BigInt::from(2) * norm + BigInt::from(29);
    for _ in 0..6 {
        let (ea, eb) = (eval_at(&a, v, &xi), eval_at(&b, v, &xi));
        if !ea.is_zero() && !eb.is_zero() {
            let g = lift_digits(&heu_gcd(&ea, &eb)?, v, &xi);
            if !g.is_zero() {
                let g = g.div_int_exact(&g.content_int())?;
                if a.div_exact(&g).is_some() && b.div_exact(&g).is_some() {
                    return Some(g.mul(&content));
                }
            }
        }
        xi = xi * BigInt::from(73794) / BigInt::from(27011);
    }
    None
}

/// Gcd of genuine polynomials (non-negative exponents), up to sign.
fn gcd_poly(a: &Poly, b: &Poly) -> Poly {
    let nvars = a.nvars;
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        return Poly::constant(nvars, x.gcd(&y));
    }
    if a == b {
        return a.clone();
    }
    let v = (0..nvars).find(|&v| a.has_var(v) || b.has_var(v)).unwrap();
    let (ina, inb) = (a.has_var(v), b.has_var(v));
    if !ina {
        return gcd_poly(a, &content_of(&to_univ(b, v)));
    }
    if !inb {
        return gcd_poly(&content_of(&to_univ(a, v)), b);
    }
    let ua = to_univ(a, v);
    let ub = to_univ(b, v);
    let ca = content_of(&ua);
    let cb = content_of(&ub);
    let c = gcd_poly(&ca, &cb);
    let mut p = univ_div(&ua, &ca);
    let mut q = univ_div(&ub, &cb);
    if p.len() < q.len() {
        core::mem::swap(&mut p, &mut q);
    }
    loop {
        if q.len() == 1 {
            // q is a nonzero primitive constant in x_v: the x_v-part of the gcd is trivial.
            return c;
        }
        let r = prem(&p, &q);
        if r.len() == 1 && r[0].is_zero() {
            let g = from_univ(&q, v, nvars);
            return g.mul(&c);
        }
        let cr = content_of(&r);
        p = q;
        q = univ_div(&r, &cr);
    }
}

impl Poly {
    /// Lexicographic comparison of the leading terms, used for canonical orderings.
    pub fn cmp_terms(&self, other: &Poly) -> Ordering {
        let a = self.terms.iter().rev();
        let b = other.terms.iter().rev();
        for (x, y) in a.zip(b) {
            match x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl Default for Poly {
    fn default() -> Self {
        Poly::zero(0)
    }
}

/// Value of `x` as an exact rational.
pub fn rat_from_int(x: &Int) -> BigRational {
    BigRational::from_integer(x.to_big())
}

pub fn rat_one() -> BigRational {
    BigRational::one()
}
