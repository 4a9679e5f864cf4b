//! Symmetric Laurent polynomials in grouped variables `z_{i,a}` with coefficients in the
//! parameter field.
//!
//! An element stores one numerator [`Poly`] over the variables `z` (grouped by vertex, slots
//! in order) followed by the parameters, and one common denominator in the parameters.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::field::{Params, RatFunc};
use crate::int::Int;
use crate::poly::{exp_zero, Exp, Poly, PolyAcc};
use crate::quiver::Twist;

/// `n ∈ N^I`, indexed by vertex position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeVector {
    counts: Vec<u32>,
}

impl DegreeVector {
    pub fn new(counts: Vec<u32>) -> Self {
        DegreeVector { counts }
    }

    pub fn zero(nv: usize) -> Self {
        DegreeVector { counts: alloc::vec![0; nv] }
    }

    /// `ς_i`.
    pub fn unit(nv: usize, i: usize) -> Self {
        let mut d = Self::zero(nv);
        d.counts[i] = 1;
        d
    }

    /// Degree vector of a color sequence.
    pub fn of_colors(nv: usize, colors: &[usize]) -> Self {
        let mut d = Self::zero(nv);
        for &c in colors {
            d.counts[c] += 1;
        }
        d
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, i: usize) -> usize {
        self.counts[i] as usize
    }

    pub fn num_vertices(&self) -> usize {
        self.counts.len()
    }

    /// Total number of variables `Σ n_i`.
    pub fn len(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of the first slot of vertex `i`.
    pub fn offset(&self, i: usize) -> usize {
        self.counts[..i].iter().map(|&c| c as usize).sum()
    }

    /// Flat index of `z_{i,a}` (0-based slot `a`).
    pub fn index(&self, i: usize, a: usize) -> usize {
        debug_assert!(a < self.count(i));
        self.offset(i) + a
    }

    /// Vertex of every flat variable.
    pub fn colors(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        for (i, &c) in self.counts.iter().enumerate() {
            out.extend(core::iter::repeat(i).take(c as usize));
        }
        out
    }

    pub fn add(&self, o: &DegreeVector) -> DegreeVector {
        DegreeVector { counts: self.counts.iter().zip(&o.counts).map(|(a, b)| a + b).collect() }
    }
}

/// Splits a flat numerator into `(z-exponent, parameter polynomial)` groups.
pub(crate) fn split_coeffs(num: &Poly, nz: usize) -> Vec<(Exp, Poly)> {
    let np = num.nvars() - nz;
    let mut out: Vec<(Exp, Poly)> = Vec::new();
    let mut cur: Option<Exp> = None;
    let mut buf: Vec<(Exp, Int)> = Vec::new();
    for (e, c) in num.terms() {
        let z = &e[..nz];
        if cur.as_deref() != Some(z) {
            if let Some(ze) = cur.take() {
                out.push((ze, Poly::from_sorted_terms(np, core::mem::take(&mut buf))));
            }
            cur = Some(Exp::from_slice(z));
        }
        buf.push((Exp::from_slice(&e[nz..]), c.clone()));
    }
    if let Some(ze) = cur {
        out.push((ze, Poly::from_sorted_terms(np, buf)));
    }
    out
}

pub(crate) fn join_coeffs(nz: usize, np: usize, groups: &[(Exp, Poly)]) -> Poly {
    let mut terms = Vec::new();
    for (z, p) in groups {
        for (e, c) in p.terms() {
            let mut x = Exp::with_capacity(nz + np);
            x.extend_from_slice(z);
            x.extend_from_slice(e);
            terms.push((x, c.clone()));
        }
    }
    Poly::from_terms(nz + np, terms)
}

/// Embeds a parameter polynomial into the flat `(z, params)` ring.
pub(crate) fn lift_param(p: &Poly, nz: usize) -> Poly {
    let np = p.nvars();
    let terms = p
        .terms()
        .iter()
        .map(|(e, c)| {
            let mut x = exp_zero(nz);
            x.extend_from_slice(e);
            (x, c.clone())
        })
        .collect();
    Poly::from_sorted_terms(nz + np, terms)
}

/// Canonical `(num, den)`: `den` is a genuine polynomial in the parameters without monomial
/// factors, with positive leading coefficient and no common factor with the numerator.
pub(crate) fn normalize_frac(num: Poly, den: Poly, nz: usize) -> (Poly, Poly) {
    let np = den.nvars();
    if num.is_zero() {
        return (num, Poly::one(np));
    }
    let (shift, mut den) = den.strip_monomial();
    let mut num = if shift.iter().any(|&x| x != 0) {
        let mut e = exp_zero(nz);
        e.extend(shift.iter().map(|x| -x));
        num.mul_monomial(&e, &Int::ONE)
    } else {
        num
    };
    if den.is_one() {
        return (num, den);
    }
    if !den.is_constant() {
        let groups = split_coeffs(&num, nz);
        let mut g = den.clone();
        for (_, c) in &groups {
            g = g.gcd(c);
            if g.is_constant() {
                break;
            }
        }
        if !g.is_constant() {
            den = den.div_exact(&g).expect("gcd divides");
            let groups: Vec<(Exp, Poly)> =
                groups.into_iter().map(|(z, c)| (z, c.div_exact(&g).expect("gcd divides"))).collect();
            num = join_coeffs(nz, np, &groups);
        }
    }
    let ci = num.content_int().gcd(&den.content_int());
    if !ci.is_one() {
        num = num.div_int_exact(&ci).unwrap();
        den = den.div_int_exact(&ci).unwrap();
    }
    if den.leading_sign() < 0 {
        num = num.neg();
        den = den.neg();
    }
    (num, den)
}

fn lcm(a: &Poly, b: &Poly) -> Poly {
    if a == b || b.is_one() {
        return a.clone();
    }
    if a.is_one() {
        return b.clone();
    }
    let g = a.gcd(b);
    a.mul(&b.div_exact(&g).expect("gcd divides"))
}

/// Orders `z`-exponents by total degree, then lexicographically.
pub fn monomial_cmp(a: &[i32], b: &[i32]) -> Ordering {
    let da: i64 = a.iter().map(|&x| x as i64).sum();
    let db: i64 = b.iter().map(|&x| x as i64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// Sparse Laurent polynomial in the grouped variables, not necessarily symmetric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawLaurent {
    pub degree: DegreeVector,
    pub twist: Twist,
    pub params: Arc<Params>,
    /// Arity `degree.len() + params.len()`.
    pub num: Poly,
    /// Arity `params.len()`.
    pub den: Poly,
}

impl RawLaurent {
    pub fn new(degree: DegreeVector, twist: Twist, params: Arc<Params>, num: Poly, den: Poly) -> Result<Self> {
        let nz = degree.len();
        if num.nvars() != nz + params.len() {
            return Err(Error::Arity { expected: nz + params.len(), found: num.nvars() });
        }
        if den.nvars() != params.len() {
            return Err(Error::Arity { expected: params.len(), found: den.nvars() });
        }
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RawLaurent { degree, twist, params, num, den })
    }

    /// A single term `c · z^e`.
    pub fn monomial(degree: DegreeVector, twist: Twist, params: Arc<Params>, e: &[i32], c: &RatFunc) -> Result<Self> {
        let nz = degree.len();
        if e.len() != nz {
            return Err(Error::Arity { expected: nz, found: e.len() });
        }
        let mut z = Exp::from_slice(e);
        z.extend(core::iter::repeat(0).take(params.len()));
        let num = c.num().mul_monomial(&[], &Int::ONE);
        let num = lift_param(&num, nz).mul_monomial(&z, &Int::ONE);
        RawLaurent::new(degree, twist, params, num, c.den().clone())
    }
}

/// Element of `V_n`: symmetric in the slots of each vertex separately.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedLaurent {
    degree: DegreeVector,
    twist: Twist,
    params: Arc<Params>,
    num: Poly,
    den: Poly,
}

impl GradedLaurent {
    pub fn zero(degree: DegreeVector, twist: Twist, params: Arc<Params>) -> Self {
        let n = degree.len() + params.len();
        let np = params.len();
        GradedLaurent { degree, twist, params, num: Poly::zero(n), den: Poly::one(np) }
    }

    /// The constant `c` in degree `degree`.
    pub fn constant(degree: DegreeVector, twist: Twist, params: Arc<Params>, c: &RatFunc) -> Self {
        let nz = degree.len();
        let (num, den) = (lift_param(c.num(), nz), c.den().clone());
        GradedLaurent { degree, twist, params, num, den }
    }

    /// The unit of the shuffle algebra (degree zero).
    pub fn unit(nv: usize, twist: Twist, params: Arc<Params>) -> Self {
        let np = params.len();
        GradedLaurent::constant(DegreeVector::zero(nv), twist, params, &RatFunc::one(np))
    }

    /// Checks symmetry and normalizes.
    pub fn from_raw(raw: RawLaurent) -> Result<Self> {
        let RawLaurent { degree, twist, params, num, den } = raw;
        for perm in adjacent_transpositions(&degree, params.len()) {
            if num.permute(&perm) != num {
                return Err(Error::NotSymmetric);
            }
        }
        Ok(Self::from_parts_unchecked(degree, twist, params, num, den))
    }

    /// Builds from `(z-exponent, coefficient)` terms; the term map must be symmetric.
    pub fn from_terms(
        degree: DegreeVector,
        twist: Twist,
        params: Arc<Params>,
        terms: &[(Exp, RatFunc)],
    ) -> Result<Self> {
        let nz = degree.len();
        let np = params.len();
        let mut den = Poly::one(np);
        for (e, c) in terms {
            if e.len() != nz {
                return Err(Error::Arity { expected: nz, found: e.len() });
            }
            if c.nvars() != np {
                return Err(Error::Arity { expected: np, found: c.nvars() });
            }
            den = lcm(&den, c.den());
        }
        let mut acc = PolyAcc::new(nz + np);
        for (e, c) in terms {
            let scale = den.div_exact(c.den()).expect("lcm is a multiple");
            let p = c.num().mul(&scale);
            for (pe, pc) in p.terms() {
                let mut x = e.clone();
                x.extend_from_slice(pe);
                acc.add_term(x, pc);
            }
        }
        Self::from_raw(RawLaurent::new(degree, twist, params, acc.finish(), den)?)
    }

    pub(crate) fn from_parts_unchecked(degree: DegreeVector, twist: Twist, params: Arc<Params>, num: Poly, den: Poly) -> Self {
        let nz = degree.len();
        let (num, den) = normalize_frac(num, den, nz);
        GradedLaurent { degree, twist, params, num, den }
    }

    pub fn degree(&self) -> &DegreeVector {
        &self.degree
    }

    pub fn twist(&self) -> Twist {
        self.twist
    }

    pub fn params(&self) -> &Arc<Params> {
        &self.params
    }

    pub fn nz(&self) -> usize {
        self.degree.len()
    }

    /// Flat numerator over `(z, params)`.
    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    /// Common denominator in the parameters.
    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_raw(&self) -> RawLaurent {
        RawLaurent {
            degree: self.degree.clone(),
            twist: self.twist,
            params: self.params.clone(),
            num: self.num.clone(),
            den: self.den.clone(),
        }
    }

    /// Terms sorted by total degree, then lexicographically.
    pub fn terms(&self) -> Vec<(Exp, RatFunc)> {
        let mut out: Vec<(Exp, RatFunc)> = split_coeffs(&self.num, self.nz())
            .into_iter()
            .map(|(z, c)| (z, RatFunc::new(c, self.den.clone()).expect("nonzero denominator")))
            .collect();
        out.sort_by(|a, b| monomial_cmp(&a.0, &b.0));
        out
    }

    pub fn num_terms(&self) -> usize {
        split_coeffs(&self.num, self.nz()).len()
    }

    /// Coefficient of `z^e`.
    pub fn coeff(&self, e: &[i32]) -> RatFunc {
        let np = self.params.len();
        let nz = self.nz();
        let terms: Vec<(Exp, Int)> = self
            .num
            .terms()
            .iter()
            .filter(|(x, _)| x[..nz] == *e)
            .map(|(x, c)| (Exp::from_slice(&x[nz..]), c.clone()))
            .collect();
        if terms.is_empty() {
            return RatFunc::zero(np);
        }
        RatFunc::new(Poly::from_sorted_terms(np, terms), self.den.clone()).expect("nonzero denominator")
    }

    /// Distinct `z`-exponent vectors.
    pub fn monomials(&self) -> Vec<Exp> {
        split_coeffs(&self.num, self.nz()).into_iter().map(|(z, _)| z).collect()
    }

    /// The total `z`-degree when homogeneous.
    pub fn homogeneous_degree(&self) -> Option<i32> {
        let nz = self.nz();
        let mut it = self.num.terms().iter().map(|(e, _)| e[..nz].iter().sum::<i32>());
        let first = it.next()?;
        if it.all(|d| d == first) {
            Some(first)
        } else {
            None
        }
    }

    fn check_same(&self, o: &GradedLaurent) -> Result<()> {
        if self.degree != o.degree {
            return Err(Error::DegreeMismatch);
        }
        if self.twist != o.twist || self.params != o.params {
            return Err(Error::ContextMismatch("twist or parameter set differs".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &GradedLaurent) -> Result<GradedLaurent> {
        self.check_same(o)?;
        if o.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(o.clone());
        }
        let nz = self.nz();
        let (num, den) = if self.den == o.den {
            (self.num.add(&o.num), self.den.clone())
        } else {
            let l = lcm(&self.den, &o.den);
            let a = lift_param(&l.div_exact(&self.den).unwrap(), nz);
            let b = lift_param(&l.div_exact(&o.den).unwrap(), nz);
            (self.num.mul(&a).add(&o.num.mul(&b)), l)
        };
        Ok(Self::from_parts_unchecked(self.degree.clone(), self.twist, self.params.clone(), num, den))
    }

    pub fn neg(&self) -> GradedLaurent {
        GradedLaurent { num: self.num.neg(), ..self.clone() }
    }

    pub fn sub(&self, o: &GradedLaurent) -> Result<GradedLaurent> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &RatFunc) -> GradedLaurent {
        if c.is_zero() {
            return GradedLaurent::zero(self.degree.clone(), self.twist, self.params.clone());
        }
        if c.is_one() {
            return self.clone();
        }
        let nz = self.nz();
        let num = self.num.mul(&lift_param(c.num(), nz));
        let den = self.den.mul(c.den());
        Self::from_parts_unchecked(self.degree.clone(), self.twist, self.params.clone(), num, den)
    }

    /// Ordinary polynomial product of two elements in the same variables.
    pub fn mul(&self, o: &GradedLaurent) -> Result<GradedLaurent> {
        self.check_same(o)?;
        let num = self.num.mul(&o.num);
        let den = self.den.mul(&o.den);
        Ok(Self::from_parts_unchecked(self.degree.clone(), self.twist, self.params.clone(), num, den))
    }

    /// `substitute`: image under a partial substitution of slots by scaled fresh variables.
    pub fn substitute(&self, bindings: &[Binding], fresh: usize) -> Result<Substituted> {
        substitute_raw(&self.degree, self.params.len(), &self.num, &self.den, bindings, fresh)
    }
}

/// Adjacent transpositions within each vertex block, as variable permutations of the flat ring.
fn adjacent_transpositions(degree: &DegreeVector, np: usize) -> Vec<Vec<usize>> {
    let nz = degree.len();
    let mut out = Vec::new();
    for i in 0..degree.num_vertices() {
        let off = degree.offset(i);
        for a in 0..degree.count(i).saturating_sub(1) {
            let mut p: Vec<usize> = (0..nz + np).collect();
            p.swap(off + a, off + a + 1);
            out.push(p);
        }
    }
    out
}

/// All products of per-vertex slot permutations, as permutations of the flat ring.
pub(crate) fn block_permutations(degree: &DegreeVector, np: usize) -> Vec<Vec<usize>> {
    let nz = degree.len();
    let mut out: Vec<Vec<usize>> = alloc::vec![(0..nz + np).collect()];
    for i in 0..degree.num_vertices() {
        let off = degree.offset(i);
        let k = degree.count(i);
        if k < 2 {
            continue;
        }
        let perms = permutations(k);
        let mut next = Vec::with_capacity(out.len() * perms.len());
        for base in &out {
            for p in &perms {
                let mut b = base.clone();
                for (a, &pa) in p.iter().enumerate() {
                    b[off + a] = base[off + pa];
                }
                next.push(b);
            }
        }
        out = next;
    }
    out
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// `symmetrize`: sum over all per-vertex slot permutations (no `n_i!` normalization).
pub fn symmetrize(raw: &RawLaurent) -> GradedLaurent {
    let np = raw.params.len();
    let mut acc = PolyAcc::with_capacity(raw.num.nvars(), raw.num.len() * 2);
    for perm in block_permutations(&raw.degree, np) {
        acc.add_poly(&raw.num.permute(&perm));
    }
    GradedLaurent::from_parts_unchecked(raw.degree.clone(), raw.twist, raw.params.clone(), acc.finish(), raw.den.clone())
}

/// `z_{vertex,slot} ↦ scale · x_fresh` with `scale` a parameter monomial (exponents over the
/// active parameters).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub vertex: usize,
    pub slot: usize,
    pub fresh: usize,
    pub scale: Exp,
}

/// Result of [`GradedLaurent::substitute`]: a Laurent polynomial in the unbound slots
/// (in flat order), then `fresh` new variables, then the parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substituted {
    /// Flat indices `(vertex, slot)` of the remaining variables.
    pub remaining: Vec<(usize, usize)>,
    pub fresh: usize,
    pub num: Poly,
    pub den: Poly,
}

impl Substituted {
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Variable index of the `k`-th remaining slot.
    pub fn remaining_var(&self, k: usize) -> usize {
        k
    }

    /// Variable index of fresh variable `k`.
    pub fn fresh_var(&self, k: usize) -> usize {
        self.remaining.len() + k
    }

    /// Variable index of parameter `k`.
    pub fn param_var(&self, k: usize) -> usize {
        self.remaining.len() + self.fresh + k
    }
}

pub(crate) fn substitute_raw(
    degree: &DegreeVector,
    np: usize,
    num: &Poly,
    den: &Poly,
    bindings: &[Binding],
    fresh: usize,
) -> Result<Substituted> {
    let nz = degree.len();
    let mut bound: Vec<Option<&Binding>> = alloc::vec![None; nz];
    for b in bindings {
        if b.vertex >= degree.num_vertices() || b.slot >= degree.count(b.vertex) {
            return Err(Error::Invalid("binding refers to a missing slot".into()));
        }
        if b.fresh >= fresh || b.scale.len() != np {
            return Err(Error::Arity { expected: np, found: b.scale.len() });
        }
        let k = degree.index(b.vertex, b.slot);
        if bound[k].is_some() {
            return Err(Error::DuplicateBinding(alloc::format!("z_{},{}", b.vertex, b.slot + 1)));
        }
        bound[k] = Some(b);
    }
    let colors = degree.colors();
    let mut remaining = Vec::new();
    let mut counter: Vec<usize> = alloc::vec![0; degree.num_vertices()];
    let mut slot_of = Vec::with_capacity(nz);
    for &c in &colors {
        slot_of.push(counter[c]);
        counter[c] += 1;
    }
    let rem_count = bound.iter().filter(|b| b.is_none()).count();
    let target = rem_count + fresh + np;
    let mut images: Vec<Exp> = Vec::with_capacity(nz + np);
    let mut r = 0;
    for k in 0..nz {
        let mut e = exp_zero(target);
        match bound[k] {
            None => {
                e[r] = 1;
                remaining.push((colors[k], slot_of[k]));
                r += 1;
            }
            Some(b) => {
                e[rem_count + b.fresh] = 1;
                for (p, &s) in b.scale.iter().enumerate() {
                    e[rem_count + fresh + p] += s;
                }
            }
        }
        images.push(e);
    }
    for p in 0..np {
        let mut e = exp_zero(target);
        e[rem_count + fresh + p] = 1;
        images.push(e);
    }
    Ok(Substituted { remaining, fresh, num: num.map_monomials(&images, target), den: den.clone() })
}

/// `divisible_by`: whether `(x_z - c·x_x)^mult` divides `p`, with `c` a monomial in the
/// other variables given as an exponent vector of `p`'s arity.
pub fn divisible_by(p: &Poly, z: usize, c: &[i32], mult: u32) -> bool {
    let mut cur = p.clone();
    for _ in 0..mult {
        match cur.div_linear(z, c, &Int::ONE) {
            Some(q) => cur = q,
            None => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn params() -> Arc<Params> {
        Arc::new(Params::new(["q"]).unwrap())
    }

    fn deg(c: &[u32]) -> DegreeVector {
        DegreeVector::new(c.to_vec())
    }

    fn raw(d: &DegreeVector, t: &[(&[i32], i64)]) -> RawLaurent {
        let p = params();
        let nz = d.len();
        let terms = t
            .iter()
            .map(|(e, c)| {
                let mut x = Exp::from_slice(e);
                x.push(0);
                (x, Int::from(*c))
            })
            .collect();
        RawLaurent::new(d.clone(), Twist::Plain, p, Poly::from_terms(nz + 1, terms), Poly::one(1)).unwrap()
    }

    #[test]
    fn symmetrize_examples() {
        let d = deg(&[2]);
        assert_eq!(symmetrize(&raw(&d, &[(&[1, 0], 1)])), GradedLaurent::from_raw(raw(&d, &[(&[1, 0], 1), (&[0, 1], 1)])).unwrap());
        assert_eq!(symmetrize(&raw(&d, &[(&[1, 1], 1)])), GradedLaurent::from_raw(raw(&d, &[(&[1, 1], 2)])).unwrap());
        assert_eq!(symmetrize(&raw(&d, &[(&[2, 0], 1)])), GradedLaurent::from_raw(raw(&d, &[(&[2, 0], 1), (&[0, 2], 1)])).unwrap());
        let d3 = deg(&[1, 2]);
        let s = symmetrize(&raw(&d3, &[(&[5, 1, 0], 1)]));
        assert_eq!(s.num_terms(), 2);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let d = deg(&[2]);
        assert_eq!(GradedLaurent::from_raw(raw(&d, &[(&[1, 0], 1)])), Err(Error::NotSymmetric));
        // different vertices need not be symmetric with each other
        assert!(GradedLaurent::from_raw(raw(&deg(&[1, 1]), &[(&[1, 0], 1)])).is_ok());
    }

    #[test]
    fn arithmetic_examples() {
        let d = deg(&[2]);
        let p = GradedLaurent::from_raw(raw(&d, &[(&[1, 0], 1), (&[0, 1], 1)])).unwrap();
        let z = GradedLaurent::zero(d.clone(), Twist::Plain, params());
        assert_eq!(p.add(&z).unwrap(), p);
        let sq = p.mul(&p).unwrap();
        assert_eq!(sq, GradedLaurent::from_raw(raw(&d, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)])).unwrap());
        assert_eq!(sq.homogeneous_degree(), Some(2));
        let pp = params();
        let a = pp.parse("q/(1-q)").unwrap();
        let b = pp.parse("(1+q)/(1-q)").unwrap();
        let lhs = p.scale(&a).mul(&p.scale(&b)).unwrap();
        assert_eq!(lhs, sq.scale(&a.mul(&b)));
        assert!(p.scale(&a).sub(&p.scale(&a)).unwrap().is_zero());
        assert_eq!(p.add(&GradedLaurent::zero(deg(&[1, 1]), Twist::Plain, params())), Err(Error::DegreeMismatch));
    }

    #[test]
    fn common_denominator_is_canonical() {
        let pp = params();
        let d = deg(&[1]);
        let e = |k: i32| Exp::from_slice(&[k]);
        let x = GradedLaurent::from_terms(d.clone(), Twist::Plain, pp.clone(), &[(e(0), pp.parse("1/(1-q)").unwrap()), (e(1), pp.parse("q/(1-q^2)").unwrap())]).unwrap();
        let y = GradedLaurent::from_terms(d.clone(), Twist::Plain, pp.clone(), &[(e(1), pp.parse("-q/(1-q^2) - 1/(1-q)").unwrap())]).unwrap();
        let s = x.add(&y).unwrap();
        assert_eq!(s.coeff(&[0]), pp.parse("1/(1-q)").unwrap());
        assert_eq!(s.coeff(&[1]), pp.parse("-1/(1-q)").unwrap());
        assert_eq!(s.denominator(), &pp.parse("q-1").unwrap().num().clone());
        let t = s.terms();
        assert_eq!(t[0].0, e(0));
    }

    #[test]
    fn substitute_examples() {
        let d = deg(&[2]);
        let c = GradedLaurent::constant(d.clone(), Twist::Plain, params(), &RatFunc::from_int(1, 7));
        let b = |slot: usize, qe: i32| Binding { vertex: 0, slot, fresh: 0, scale: Exp::from_slice(&[qe]) };
        let s = c.substitute(&[b(0, 1)], 1).unwrap();
        assert_eq!(s.num, Poly::constant(3, Int::from(7)));
        let p = GradedLaurent::from_raw(raw(&d, &[(&[1, 0], 1), (&[0, 1], 1)])).unwrap();
        let s = p.substitute(&[b(0, 1)], 1).unwrap();
        // remaining z_{1,2} is var 0, x is var 1, q is var 2
        assert_eq!(s.remaining, vec![(0, 1)]);
        assert_eq!(s.num, Poly::from_terms(3, vec![(Exp::from_slice(&[0, 1, 1]), Int::ONE), (Exp::from_slice(&[1, 0, 0]), Int::ONE)]));
        let m = RawLaurent::new(d.clone(), Twist::Plain, params(), Poly::from_terms(3, vec![(Exp::from_slice(&[1, -1, 0]), Int::ONE)]), Poly::one(1)).unwrap();
        let s = substitute_raw(&m.degree, 1, &m.num, &m.den, &[b(0, 1), b(1, 0)], 1).unwrap();
        assert_eq!(s.num, Poly::var(2, 1));
        assert!(matches!(p.substitute(&[b(0, 1), b(0, 1)], 1), Err(Error::DuplicateBinding(_))));
    }

    #[test]
    fn divisibility_examples() {
        // variables z, x, q
        let z = Poly::var(3, 0);
        let x = Poly::var(3, 1);
        let q = Poly::var(3, 2);
        let f = z.sub(&q.mul(&x));
        let p = f.mul(&f).mul(&z.add(&x));
        assert!(divisible_by(&p, 0, &[0, 1, 1], 2));
        assert!(!divisible_by(&p, 0, &[0, 1, 1], 3));
        assert!(!divisible_by(&z.sub(&x), 0, &[0, 1, 1], 1));
    }

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(block_permutations(&deg(&[2, 3]), 0).len(), 12);
    }
}
