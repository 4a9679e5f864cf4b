//! Component bases: Gram matrices, standard words, dual bases, peeling decompositions,
//! the canonical tensor and the constructive check that wheel solutions are spanned.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::field::RatFunc;
use crate::int::Int;
use crate::laurent::{symmetrize, DegreeVector, GradedLaurent, RawLaurent};
use crate::latticegraph::{component, is_vertex, Component, Variant};
use crate::linalg::{independent_rows, independent_rows_probe, inverse, nullspace, probe_point};
use crate::poly::{exp_zero, Exp, Poly, PolyAcc};
use crate::quiver::Twist;
use crate::shuffle::{ShuffleContext, WheelRegime};
use crate::words::{canonical_monomial, leading_word, words_with_exponents, Word};

/// Iteration bound for the peeling loop.
pub const PEEL_CAP: usize = 100_000;

/// Words, Gram matrix, standard words and dual basis of one graph component in one degree.
#[derive(Clone, Debug)]
pub struct ComponentBasis {
    pub degree: DegreeVector,
    pub component: Component,
    /// Non-increasing words with exponents in the component, in descending order.
    pub words: Vec<Word>,
    /// `gram[v][w] = ⟨e_v, f_w⟩` over `words`.
    pub gram: Vec<Vec<RatFunc>>,
    /// Indices into `words` of the standard words, in descending order.
    pub standard: Vec<usize>,
    /// `dual_coeffs[k][l]`: coefficient of `e_{standard[l]}` in `e^{standard[k]}`.
    pub dual_coeffs: Vec<Vec<RatFunc>>,
    /// `e^w` for each standard `w`.
    pub dual: Vec<GradedLaurent>,
    /// Whether the standard set was certified by exact elimination.
    pub exact: bool,
}

impl ComponentBasis {
    pub fn standard_words(&self) -> Vec<&Word> {
        self.standard.iter().map(|&k| &self.words[k]).collect()
    }

    /// Position of `w` among the standard words.
    pub fn standard_index(&self, w: &Word) -> Option<usize> {
        self.standard.iter().position(|&k| self.words[k] == *w)
    }
}

/// The graph variant used for a twist.
pub fn variant_for(twist: Twist) -> Variant {
    match twist {
        Twist::Plain => Variant::G,
        Twist::Prime => Variant::GPrime,
    }
}

/// One element of a decomposition: `coeff · e^word`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub word: Word,
    pub coeff: RatFunc,
}

/// Per-component summary in a [`TheoremReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentSummary {
    pub seed: Vec<i32>,
    pub words: usize,
    pub standard: usize,
}

/// Decomposition outcome for one basis vector of the wheel solution space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementReport {
    pub terms: Vec<Term>,
    pub residual_zero: bool,
}

/// Outcome of [`ShuffleContext::theorem_main_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremReport {
    pub orbit_count: usize,
    pub dimension: usize,
    pub components: Vec<ComponentSummary>,
    pub elements: Vec<ElementReport>,
    pub success: bool,
}

impl ShuffleContext {
    /// `build_component_basis` for the component of `seed` (a vertex of `G` for the plain
    /// twist, of `G′` for the prime twist).
    pub fn build_component_basis(&self, degree: &DegreeVector, seed: &[i32]) -> Result<Arc<ComponentBasis>> {
        self.component_basis(degree, seed, false)
    }

    fn component_basis(&self, degree: &DegreeVector, seed: &[i32], force_exact: bool) -> Result<Arc<ComponentBasis>> {
        let key = (degree.counts().to_vec(), seed.to_vec());
        if let Some(b) = self.bases.borrow().get(&key) {
            if b.exact || !force_exact {
                return Ok(b.clone());
            }
        }
        if degree.num_vertices() != self.num_vertices() {
            return Err(Error::ContextMismatch("vertex count differs from the context".into()));
        }
        if seed.len() != degree.len() {
            return Err(Error::Arity { expected: degree.len(), found: seed.len() });
        }
        let variant = variant_for(self.twist());
        let m = self.quiver().m();
        if !is_vertex(seed, m, variant) {
            return Err(Error::Invalid(format!("{seed:?} is not a vertex of {}", variant.as_str())));
        }
        let comp = component(seed, m, variant, self.cap())?;
        let mut words = Vec::new();
        for t in &comp.vertices {
            words.extend(words_with_exponents(self.quiver(), degree, t, self.twist()));
        }
        words.sort_by(|a, b| b.cmp(a));
        let rows: Vec<GradedLaurent> = words.iter().map(|v| self.e_word(v)).collect::<Result<_>>()?;
        let gram: Vec<Vec<RatFunc>> = rows.iter().map(|r| words.iter().map(|w| self.pair(r, w)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        let probe = if force_exact || self.paranoid() { None } else { self.probe_seed() };
        let (standard, exact) = match probe.and_then(|s| independent_rows_probe(&gram, &probe_point(self.np(), s))) {
            Some(s) => (s, false),
            None => (independent_rows(&gram), true),
        };
        let block: Vec<Vec<RatFunc>> = standard.iter().map(|&v| standard.iter().map(|&w| gram[v][w].clone()).collect()).collect();
        let dual_coeffs = inverse(&block).map_err(|_| {
            Error::Degenerate(format!("standard Gram block of component {:?} is singular", comp.vertices[0]))
        })?;
        let mut dual = Vec::with_capacity(standard.len());
        for coeffs in &dual_coeffs {
            let mut acc = self.zero(degree.clone());
            for (c, &u) in coeffs.iter().zip(&standard) {
                if !c.is_zero() {
                    acc = acc.add(&rows[u].scale(c))?;
                }
            }
            dual.push(acc);
        }
        let cb = Arc::new(ComponentBasis { degree: degree.clone(), component: comp, words, gram, standard, dual_coeffs, dual, exact });
        let mut cache = self.bases.borrow_mut();
        for t in &cb.component.vertices {
            cache.insert((degree.counts().to_vec(), t.clone()), cb.clone());
        }
        Ok(cb)
    }

    /// `decompose`: coefficients `α_w` with `R = Σ α_w e^w` over standard words `w`, found by
    /// repeatedly removing the leading word.
    pub fn decompose(&self, r: &GradedLaurent) -> Result<Vec<Term>> {
        self.check(r)?;
        let report = self.wheel_check(r)?;
        if !report.passes {
            return Err(Error::NotInShuffleAlgebra(format!("wheel condition fails at {}", report.first_failure.unwrap_or_default())));
        }
        let mut rest = r.clone();
        let mut terms: Vec<Term> = Vec::new();
        let mut steps = 0;
        while !rest.is_zero() {
            steps += 1;
            if steps > PEEL_CAP {
                return Err(Error::CapExceeded { cap: PEEL_CAP });
            }
            let v = leading_word(self.quiver(), &rest)?;
            let mut cb = self.component_basis(r.degree(), &v.exps(), false)?;
            if cb.standard_index(&v).is_none() && !cb.exact {
                cb = self.component_basis(r.degree(), &v.exps(), true)?;
            }
            let k = cb.standard_index(&v).ok_or_else(|| {
                Error::NotInShuffleAlgebra(format!("leading word {} is not standard", v.display(self.quiver())))
            })?;
            let dual = &cb.dual[k];
            let mono = canonical_monomial(self.quiver(), &v, self.twist());
            let lead = dual.coeff(&mono);
            if lead.is_zero() {
                return Err(Error::Degenerate(format!("dual element of {} misses its leading monomial", v.display(self.quiver()))));
            }
            let alpha = rest.coeff(&mono).div(&lead)?;
            rest = rest.sub(&dual.scale(&alpha))?;
            match terms.iter_mut().find(|t| t.word == v) {
                Some(t) => t.coeff = t.coeff.add(&alpha),
                None => terms.push(Term { word: v, coeff: alpha }),
            }
        }
        terms.retain(|t| !t.coeff.is_zero());
        Ok(terms)
    }

    /// `Σ α_w e^w` for a decomposition.
    pub fn reconstruct(&self, degree: &DegreeVector, terms: &[Term]) -> Result<GradedLaurent> {
        let mut acc = self.zero(degree.clone());
        for t in terms {
            let cb = self.component_basis(degree, &t.word.exps(), false)?;
            let k = cb.standard_index(&t.word).ok_or_else(|| Error::Invalid(format!("{} is not standard", t.word.display(self.quiver()))))?;
            acc = acc.add(&cb.dual[k].scale(&t.coeff))?;
        }
        Ok(acc)
    }

    /// `canonical_tensor`: `(w, e^w, f_w)` for every standard word of the component.
    pub fn canonical_tensor(&self, cb: &ComponentBasis) -> Result<Vec<(Word, GradedLaurent, GradedLaurent)>> {
        cb.standard
            .iter()
            .zip(&cb.dual)
            .map(|(&k, e)| {
                let w = cb.words[k].clone();
                let f = self.f_word(&w)?;
                Ok((w, e.clone(), f))
            })
            .collect()
    }

    /// Symmetric orbit sums of monomials of `degree` with exponents in `[lo, hi]` summing to `total`.
    pub fn orbit_basis(&self, degree: &DegreeVector, total: i32, lo: i32, hi: i32) -> Vec<GradedLaurent> {
        let np = self.np();
        let nz = degree.len();
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(nz);
        orbit_rec(degree, 0, total, lo, hi, &mut cur, &mut |e: &[i32]| {
            let mut x = Exp::from_slice(e);
            x.extend(core::iter::repeat(0).take(np));
            let raw = RawLaurent::new(degree.clone(), self.twist(), self.params().clone(), Poly::monomial(x, Int::ONE), Poly::one(np)).expect("valid arity");
            out.push(symmetrize(&raw));
        });
        out
    }

    /// Linear conditions on coefficients over `elements` expressing the wheel conditions
    /// of the context's regime.
    pub fn wheel_constraints(&self, degree: &DegreeVector, elements: &[GradedLaurent]) -> Vec<Vec<RatFunc>> {
        let np = self.np();
        let ncols = elements.len();
        let mut rows: Vec<Vec<RatFunc>> = Vec::new();
        let mut push_group = |images: Vec<Poly>, dens: &[Poly], nparams_tail: usize| {
            // images[λ] is a polynomial whose last `nparams_tail` variables are parameters
            let mut keyed: HashMap<Exp, Vec<Vec<(Exp, Int)>>> = HashMap::new();
            for (l, p) in images.iter().enumerate() {
                let split = p.nvars() - nparams_tail;
                for (e, c) in p.terms() {
                    let key = Exp::from_slice(&e[..split]);
                    let slot = keyed.entry(key).or_insert_with(|| vec![Vec::new(); ncols]);
                    slot[l].push((Exp::from_slice(&e[split..]), c.clone()));
                }
            }
            let mut keys: Vec<&Exp> = keyed.keys().collect();
            keys.sort();
            for k in keys {
                let row = keyed[k]
                    .iter()
                    .zip(dens)
                    .map(|(t, d)| RatFunc::new(Poly::from_terms(np, t.clone()), d.clone()).expect("nonzero denominator"))
                    .collect();
                rows.push(row);
            }
        };
        let dens: Vec<Poly> = elements.iter().map(|e| e.denominator().clone()).collect();
        match self.regime() {
            WheelRegime::ThreeVariable => {
                for (_, bindings) in self.wheel_substitutions(degree, self.paranoid()) {
                    let images = elements.iter().map(|e| e.substitute(&bindings, 1).expect("valid bindings").num).collect();
                    push_group(images, &dens, np);
                }
            }
            WheelRegime::Restricted => {
                for (_, bindings, _, factors) in self.restricted_substitutions(degree) {
                    let subs: Vec<_> = elements.iter().map(|e| e.substitute(&bindings, 1).expect("valid bindings")).collect();
                    for (v, fs) in factors.iter().enumerate() {
                        for (c, mult) in fs {
                            for order in 0..*mult {
                                let images = subs
                                    .iter()
                                    .map(|s| {
                                        let mut e = exp_zero(s.num.nvars());
                                        e[s.fresh_var(0)] = 1;
                                        for (p, &x) in c.iter().enumerate() {
                                            e[s.param_var(p)] = x;
                                        }
                                        taylor(&s.num, s.remaining_var(v), &e, order)
                                    })
                                    .collect();
                                push_group(images, &dens, np);
                            }
                        }
                    }
                }
            }
        }
        rows
    }

    /// `theorem_main_check`: solves the wheel conditions on the orbit sums with exponents in
    /// `[lo, hi]` and total degree `total`, then decomposes every solution.
    pub fn theorem_main_check(&self, degree: &DegreeVector, total: i32, lo: i32, hi: i32) -> Result<TheoremReport> {
        if lo > hi {
            return Err(Error::Invalid("empty exponent window".into()));
        }
        let orbits = self.orbit_basis(degree, total, lo, hi);
        let rows = self.wheel_constraints(degree, &orbits);
        let ns = nullspace(&rows, orbits.len(), self.np());
        let mut elements = Vec::new();
        let mut components: Vec<ComponentSummary> = Vec::new();
        let mut success = true;
        for v in &ns {
            let mut r = self.zero(degree.clone());
            for (c, o) in v.iter().zip(&orbits) {
                if !c.is_zero() {
                    r = r.add(&o.scale(c))?;
                }
            }
            let terms = self.decompose(&r)?;
            let back = self.reconstruct(degree, &terms)?;
            let residual_zero = back == r;
            success &= residual_zero;
            for t in &terms {
                let cb = self.component_basis(degree, &t.word.exps(), false)?;
                let seed = cb.component.vertices[0].clone();
                if !components.iter().any(|c| c.seed == seed) {
                    components.push(ComponentSummary { seed, words: cb.words.len(), standard: cb.standard.len() });
                }
            }
            elements.push(ElementReport { terms, residual_zero });
        }
        components.sort_by(|a, b| a.seed.cmp(&b.seed));
        Ok(TheoremReport { orbit_count: orbits.len(), dimension: ns.len(), components, elements, success })
    }
}

fn orbit_rec(degree: &DegreeVector, vertex: usize, left: i32, lo: i32, hi: i32, cur: &mut Vec<i32>, emit: &mut dyn FnMut(&[i32])) {
    if vertex == degree.num_vertices() {
        if left == 0 {
            emit(cur);
        }
        return;
    }
    let k = degree.count(vertex);
    let mut block = Vec::with_capacity(k);
    fn multisets(k: usize, lo: i32, hi: i32, block: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if block.len() == k {
            out.push(block.clone());
            return;
        }
        let start = block.last().copied().unwrap_or(lo);
        for x in start..=hi {
            block.push(x);
            multisets(k, lo, hi, block, out);
            block.pop();
        }
    }
    let mut choices = Vec::new();
    multisets(k, lo, hi, &mut block, &mut choices);
    let later: i64 = (vertex + 1..degree.num_vertices()).map(|i| degree.count(i) as i64).sum();
    for ch in choices {
        let s: i32 = ch.iter().sum();
        let rest = (left - s) as i64;
        if rest < later * lo as i64 || rest > later * hi as i64 {
            continue;
        }
        let n = cur.len();
        cur.extend_from_slice(&ch);
        orbit_rec(degree, vertex + 1, left - s, lo, hi, cur, emit);
        cur.truncate(n);
    }
}

/// `∂^order p / ∂x_v^order` evaluated at `x_v = x^e` (`e` a monomial free of `x_v`).
fn taylor(p: &Poly, v: usize, e: &[i32], order: u32) -> Poly {
    let mut acc = PolyAcc::with_capacity(p.nvars(), p.len());
    for (x, c) in p.terms() {
        let k = x[v];
        let mut ff = Int::ONE;
        for s in 0..order as i32 {
            ff = &ff * &Int::from((k - s) as i64);
        }
        if ff.is_zero() {
            continue;
        }
        let mut y = x.clone();
        y[v] = 0;
        let shift = k - order as i32;
        for (a, &b) in y.iter_mut().zip(e) {
            *a += shift * b;
        }
        acc.add_term(y, &(c * &ff));
    }
    acc.finish()
}
