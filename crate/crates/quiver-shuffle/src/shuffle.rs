//! The twisted shuffle product, wheel conditions and generators.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::field::{Params, RatFunc, Specialization};
use crate::int::Int;
use crate::laurent::{substitute_raw, Binding, DegreeVector, GradedLaurent};
use crate::packed::{self, Division, MergeAcc, Packed, Packing};
use crate::poly::{exp_add, exp_zero, Exp, Poly};
use crate::quiver::{Quiver, Twist, ZetaKernel};
use crate::words::{Letter, Word};

/// Which wheel conditions define membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WheelRegime {
    ThreeVariable,
    Restricted,
}

impl WheelRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            WheelRegime::ThreeVariable => "three_variable",
            WheelRegime::Restricted => "restricted",
        }
    }
}

/// The algebra a generator or product lives in: `S` (side `E`) or its opposite (side `F`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    E,
    F,
}

/// Outcome of [`ShuffleContext::wheel_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WheelReport {
    pub passes: bool,
    pub first_failure: Option<String>,
}

/// Component bases keyed by degree counts and seed tuple.
pub(crate) type BasisCache = HashMap<(Vec<u32>, Vec<i32>), Arc<crate::basis::ComponentBasis>>;

/// Quiver, twist, optional specialization and wheel regime, plus memo tables.
pub struct ShuffleContext {
    kernel: ZetaKernel,
    params: Arc<Params>,
    regime: WheelRegime,
    paranoid: bool,
    /// Memoized products, bounded by `WORD_MEMO_TERMS` numerator terms in total.
    words: RefCell<HashMap<Vec<Letter>, GradedLaurent>>,
    memo_terms: Cell<usize>,
    pub(crate) series: RefCell<HashMap<Vec<usize>, crate::pairing::SeriesCache>>,
    pub(crate) bases: RefCell<BasisCache>,
    probe_seed: Option<u64>,
    cap: usize,
}

/// Default bound on the number of vertices explored in one graph component.
pub const DEFAULT_COMPONENT_CAP: usize = 10_000;

/// Budget of numerator terms held by the product memo.
pub const WORD_MEMO_TERMS: usize = 2_000_000;

impl ShuffleContext {
    pub fn new(quiver: Quiver, twist: Twist, spec: Option<Specialization>, regime: WheelRegime) -> Result<Self> {
        if regime == WheelRegime::Restricted && spec.is_none() {
            return Err(Error::Invalid("the restricted wheel regime requires a specialization".into()));
        }
        let kernel = ZetaKernel::new(quiver, twist, spec)?;
        let params = Arc::new(kernel.params().clone());
        Ok(ShuffleContext {
            kernel,
            params,
            regime,
            paranoid: false,
            words: RefCell::new(HashMap::new()),
            memo_terms: Cell::new(0),
            series: RefCell::new(HashMap::new()),
            bases: RefCell::new(HashMap::new()),
            probe_seed: None,
            cap: DEFAULT_COMPONENT_CAP,
        })
    }

    /// Enables exhaustive checks (all wheel triples, extra truncation and symbolic verification).
    pub fn with_paranoid(mut self, paranoid: bool) -> Self {
        self.paranoid = paranoid;
        self
    }

    pub fn paranoid(&self) -> bool {
        self.paranoid
    }

    /// Selects standard words by rank probes at a random point derived from `seed`.
    pub fn with_probe(mut self, seed: Option<u64>) -> Self {
        self.probe_seed = seed;
        self
    }

    pub fn probe_seed(&self) -> Option<u64> {
        self.probe_seed
    }

    /// Bounds the size of graph components explored by basis construction.
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn kernel(&self) -> &ZetaKernel {
        &self.kernel
    }

    pub fn quiver(&self) -> &Quiver {
        self.kernel.quiver()
    }

    pub fn twist(&self) -> Twist {
        self.kernel.twist()
    }

    pub fn regime(&self) -> WheelRegime {
        self.regime
    }

    pub fn specialization(&self) -> Option<&Specialization> {
        self.kernel.specialization()
    }

    pub fn params(&self) -> &Arc<Params> {
        &self.params
    }

    pub fn np(&self) -> usize {
        self.params.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.quiver().num_vertices()
    }

    /// Parses a coefficient over the active parameters.
    pub fn parse_coeff(&self, s: &str) -> Result<RatFunc> {
        self.params.parse(s)
    }

    pub(crate) fn check(&self, r: &GradedLaurent) -> Result<()> {
        if r.twist() != self.twist() {
            return Err(Error::ContextMismatch("twist differs from the context".into()));
        }
        if **r.params() != *self.params {
            return Err(Error::ContextMismatch("parameters differ from the context".into()));
        }
        if r.degree().num_vertices() != self.num_vertices() {
            return Err(Error::ContextMismatch("vertex count differs from the context".into()));
        }
        Ok(())
    }

    /// The unit in degree zero.
    pub fn unit(&self) -> GradedLaurent {
        GradedLaurent::unit(self.num_vertices(), self.twist(), self.params.clone())
    }

    pub fn zero(&self, degree: DegreeVector) -> GradedLaurent {
        GradedLaurent::zero(degree, self.twist(), self.params.clone())
    }

    /// `generator`: `z_{i,1}^d` in degree `ς_i`; both sides use the same function.
    pub fn generator(&self, i: usize, d: i32, _side: Side) -> Result<GradedLaurent> {
        let nv = self.num_vertices();
        if i >= nv {
            return Err(Error::UnknownVertex(format!("{i}")));
        }
        let degree = DegreeVector::unit(nv, i);
        let np = self.np();
        let mut e = exp_zero(1 + np);
        e[0] = d;
        Ok(GradedLaurent::from_parts_unchecked(degree, self.twist(), self.params.clone(), Poly::monomial(e, Int::ONE), Poly::one(np)))
    }

    /// `shuffle_product`; side `F` multiplies in the opposite algebra.
    pub fn shuffle_product(&self, r: &GradedLaurent, s: &GradedLaurent, side: Side) -> Result<GradedLaurent> {
        self.check(r)?;
        self.check(s)?;
        match side {
            Side::E => Ok(self.product(r, s)),
            Side::F => Ok(self.product(s, r)),
        }
    }

    fn product(&self, r: &GradedLaurent, s: &GradedLaurent) -> GradedLaurent {
        if r.degree().is_empty() {
            return s.scale(&self.constant_of(r));
        }
        if s.degree().is_empty() {
            return r.scale(&self.constant_of(s));
        }
        let nv = self.num_vertices();
        let np = self.np();
        let (dr, ds) = (r.degree(), s.degree());
        let degree = dr.add(ds);
        let nz = degree.len();
        let target = nz + np;
        let mut pos_r = Vec::with_capacity(dr.len() + np);
        let mut pos_s = Vec::with_capacity(ds.len() + np);
        // (flat index, vertex) of every variable in each block
        let mut block_r = Vec::new();
        let mut block_s = Vec::new();
        for i in 0..nv {
            for a in 0..dr.count(i) {
                pos_r.push(degree.index(i, a));
                block_r.push((degree.index(i, a), i));
            }
        }
        for i in 0..nv {
            for b in 0..ds.count(i) {
                pos_s.push(degree.index(i, dr.count(i) + b));
                block_s.push((degree.index(i, dr.count(i) + b), i));
            }
        }
        for p in 0..np {
            pos_r.push(nz + p);
            pos_s.push(nz + p);
        }
        let base = r.numerator().embed(target, &pos_r).mul(&s.numerator().embed(target, &pos_s));
        let mut factors = Vec::new();
        let mut flips = 0usize;
        let mut zb = exp_zero(target);
        for &(a, i) in &block_r {
            for &(b, j) in &block_s {
                factors.extend(self.cross_factors(i, j, a, b, target));
                if i == j {
                    flips += 1;
                    zb[b] += 1;
                }
            }
        }
        let sign = if flips % 2 == 0 { Int::ONE } else { -Int::ONE };
        for i in 0..nv {
            let off = degree.offset(i);
            factors.extend(vandermonde_factors(target, off, dr.count(i)));
            factors.extend(vandermonde_factors(target, off + dr.count(i), ds.count(i)));
        }
        let cosets = coset_representatives(dr, ds, np);
        let num = match numerator_packed(&degree, &base, &factors, &zb, &sign, &cosets) {
            Some(num) => num,
            None => numerator_generic(&degree, base, &factors, &zb, &sign, &cosets),
        };
        let den = r.denominator().mul(s.denominator());
        GradedLaurent::from_parts_unchecked(degree, self.twist(), self.params.clone(), num, den)
    }

    fn constant_of(&self, r: &GradedLaurent) -> RatFunc {
        let np = self.np();
        let num = Poly::from_terms(np, r.numerator().terms().iter().map(|(e, c)| (Exp::from_slice(&e[e.len() - np..]), c.clone())).collect());
        RatFunc::new(num, r.denominator().clone()).expect("nonzero denominator")
    }

    /// Linear factors of the numerator of `ζ_ij(z_a / z_b)` in the flat ring of arity `target`.
    fn cross_factors(&self, i: usize, j: usize, a: usize, b: usize, target: usize) -> Vec<Poly> {
        let np = self.np();
        let nz = target - np;
        let mut images = Vec::with_capacity(1 + np);
        let mut x = exp_zero(target);
        x[a] += 1;
        x[b] -= 1;
        images.push(x);
        for p in 0..np {
            let mut e = exp_zero(target);
            e[nz + p] = 1;
            images.push(e);
        }
        self.kernel.zeta(i, j).factors.iter().map(|f| f.map_monomials(&images, target)).collect()
    }

    /// Product of generators `e_{i_1,d_1} * … * e_{i_n,d_n}`, memoized by prefix.
    pub fn e_word(&self, w: &Word) -> Result<GradedLaurent> {
        let letters = w.letters();
        if letters.is_empty() {
            return Ok(self.unit());
        }
        if let Some(x) = self.words.borrow().get(letters) {
            return Ok(x.clone());
        }
        let last = letters[letters.len() - 1];
        let g = self.generator(last.vertex, last.exp, Side::E)?;
        let out = if letters.len() == 1 {
            g
        } else {
            let prefix = self.e_word(&Word::new(letters[..letters.len() - 1].to_vec()))?;
            self.product(&prefix, &g)
        };
        let held = self.memo_terms.get() + out.numerator().len();
        if held <= WORD_MEMO_TERMS {
            self.memo_terms.set(held);
            self.words.borrow_mut().insert(letters.to_vec(), out.clone());
        }
        Ok(out)
    }

    /// `f_w = f_{i_1,-d_1} * … * f_{i_n,-d_n}` in the opposite algebra, as a function.
    pub fn f_word(&self, w: &Word) -> Result<GradedLaurent> {
        self.e_word(&w.reverse_negate())
    }

    /// `is_spherical_witness`: whether `Σ c_k e_{w_k}` equals `r`.
    pub fn is_spherical_witness(&self, r: &GradedLaurent, expression: &[(RatFunc, Word)]) -> Result<bool> {
        self.check(r)?;
        let mut acc = self.zero(r.degree().clone());
        for (c, w) in expression {
            if w.degree(self.num_vertices()) != *r.degree() {
                return Ok(false);
            }
            acc = acc.add(&self.e_word(w)?.scale(c))?;
        }
        Ok(acc == *r)
    }

    /// `wheel_check` in the context's regime.
    pub fn wheel_check(&self, r: &GradedLaurent) -> Result<WheelReport> {
        self.check(r)?;
        match self.regime {
            WheelRegime::ThreeVariable => Ok(self.wheel_three_variable(r)),
            WheelRegime::Restricted => Ok(self.wheel_restricted(r)),
        }
    }

    /// The substitutions of the three-variable wheel conditions that apply in `degree`.
    pub fn wheel_substitutions(&self, degree: &DegreeVector, all_triples: bool) -> Vec<(String, Vec<Binding>)> {
        let quiver = self.quiver();
        let nsrc = quiver.params().len();
        let mut out = Vec::new();
        for (k, edge) in quiver.edges().iter().enumerate() {
            let (i, j) = (edge.src, edge.tgt);
            let tp = quiver.edge_param(k);
            let mono = |qe: i32, te: i32| {
                let mut e = exp_zero(nsrc);
                e[0] += qe;
                e[tp] += te;
                self.kernel.param_monomial(&e)
            };
            // case 1: z_{ia} = q s, z_{jb} = t s, z_{ic} = s; case 2 mirrors it with q/t at vertex i
            let cases = [(i, j, mono(1, 0), mono(0, 1), mono(0, 0)), (j, i, mono(1, 0), mono(1, -1), mono(0, 0))];
            for (u, v, sa, sb, sc) in cases {
                for (a, b, c) in index_triples(degree, u, v, all_triples) {
                    let bindings = vec![
                        Binding { vertex: u, slot: a, fresh: 0, scale: sa.clone() },
                        Binding { vertex: v, slot: b, fresh: 0, scale: sb.clone() },
                        Binding { vertex: u, slot: c, fresh: 0, scale: sc.clone() },
                    ];
                    let desc = format!(
                        "edge {}->{} ({}): {}",
                        quiver.vertex_name(i),
                        quiver.vertex_name(j),
                        if edge.label.is_empty() { "t".into() } else { format!("t{}", edge.label) },
                        bindings.iter().map(|b| self.describe_binding(b, "s")).collect::<Vec<_>>().join(", ")
                    );
                    out.push((desc, bindings));
                }
            }
        }
        out
    }

    fn describe_binding(&self, b: &Binding, var: &str) -> String {
        let m = Poly::monomial(b.scale.clone(), Int::ONE);
        let c = self.params.fmt_poly(&m);
        let name = self.quiver().vertex_name(b.vertex);
        if c == "1" {
            format!("z_{{{},{}}} = {var}", name, b.slot + 1)
        } else {
            format!("z_{{{},{}}} = {c}*{var}", name, b.slot + 1)
        }
    }

    fn wheel_three_variable(&self, r: &GradedLaurent) -> WheelReport {
        for (desc, bindings) in self.wheel_substitutions(r.degree(), self.paranoid) {
            let s = substitute_raw(r.degree(), self.np(), r.numerator(), r.denominator(), &bindings, 1).expect("valid bindings");
            if !s.is_zero() {
                return WheelReport { passes: false, first_failure: Some(desc) };
            }
        }
        WheelReport { passes: true, first_failure: None }
    }

    /// Restricted substitutions: for vertex `j` and `k`, the bindings and, per remaining
    /// variable, the linear factors `z - c·x` (as `c`-exponents over the active parameters)
    /// with multiplicities.
    #[allow(clippy::type_complexity)]
    pub fn restricted_substitutions(&self, degree: &DegreeVector) -> Vec<(String, Vec<Binding>, Vec<(usize, usize)>, Vec<Vec<(Exp, u32)>>)> {
        let quiver = self.quiver();
        let nsrc = quiver.params().len();
        let np = self.np();
        let nv = self.num_vertices();
        let mut out = Vec::new();
        for j in 0..nv {
            for k in 1..=degree.count(j) {
                let bindings: Vec<Binding> = (0..k)
                    .map(|s| {
                        let mut e = exp_zero(nsrc);
                        e[0] = s as i32;
                        Binding { vertex: j, slot: s, fresh: 0, scale: self.kernel.param_monomial(&e) }
                    })
                    .collect();
                let mut remaining = Vec::new();
                let mut factors = Vec::new();
                for i in 0..nv {
                    let start = if i == j { k } else { 0 };
                    let mut fs: Vec<(Exp, u32)> = Vec::new();
                    let mut push = |c: Exp| match fs.iter_mut().find(|x| x.0 == c) {
                        Some(x) => x.1 += 1,
                        None => fs.push((c, 1)),
                    };
                    for s in 1..k as i32 {
                        for (ei, edge) in quiver.edges().iter().enumerate() {
                            let tp = quiver.edge_param(ei);
                            if edge.src == i && edge.tgt == j {
                                let mut e = exp_zero(nsrc);
                                e[0] = s;
                                e[tp] -= 1;
                                push(self.kernel.param_monomial(&e));
                            }
                            if edge.src == j && edge.tgt == i {
                                let mut e = exp_zero(nsrc);
                                e[0] = s - 1;
                                e[tp] += 1;
                                push(self.kernel.param_monomial(&e));
                            }
                        }
                    }
                    debug_assert!(fs.iter().all(|f| f.0.len() == np));
                    for a in start..degree.count(i) {
                        remaining.push((i, a));
                        factors.push(fs.clone());
                    }
                }
                let desc = format!(
                    "vertex {}, k = {}: {}",
                    quiver.vertex_name(j),
                    k,
                    bindings.iter().map(|b| self.describe_binding(b, "x")).collect::<Vec<_>>().join(", ")
                );
                out.push((desc, bindings, remaining, factors));
            }
        }
        out
    }

    fn wheel_restricted(&self, r: &GradedLaurent) -> WheelReport {
        let np = self.np();
        for (desc, bindings, _, factors) in self.restricted_substitutions(r.degree()) {
            let s = substitute_raw(r.degree(), np, r.numerator(), r.denominator(), &bindings, 1).expect("valid bindings");
            let arity = s.num.nvars();
            let mut cur = s.num.clone();
            for (v, fs) in factors.iter().enumerate() {
                for (c, mult) in fs {
                    let mut e = exp_zero(arity);
                    e[s.fresh_var(0)] = 1;
                    for (p, &x) in c.iter().enumerate() {
                        e[s.param_var(p)] = x;
                    }
                    for _ in 0..*mult {
                        match cur.div_linear(s.remaining_var(v), &e, &Int::ONE) {
                            Some(qt) => cur = qt,
                            None => {
                                let (vi, va) = s.remaining[v];
                                let f = self.params.fmt_poly(&Poly::monomial(c.clone(), Int::ONE));
                                return WheelReport {
                                    passes: false,
                                    first_failure: Some(format!(
                                        "{desc}: not divisible by (z_{{{},{}}} - {f}*x)^{mult}",
                                        self.quiver().vertex_name(vi),
                                        va + 1
                                    )),
                                };
                            }
                        }
                    }
                }
            }
        }
        WheelReport { passes: true, first_failure: None }
    }

    /// Both sides of the quadratic relation between `e_{i,a}` and `e_{j,b}`, with coefficients
    /// read off from the ζ numerators. For `i ≠ j`:
    /// `Σ_k p_k e_{i,a-k} * e_{j,b+k} = Σ_k r_k e_{j,b-k} * e_{i,a+k}` with
    /// `Σ p_k x^k = num ζ_ji(x)` and `Σ r_k x^k = num ζ_ij(x)`. For `i = j`, with
    /// `num ζ_ii(x) = (1 - x/q) Σ p_k x^k`:
    /// `Σ_k (p_k - p_{k-1}/q) e_{a-k} * e_{b+k} = Σ_k (p_{k-1}/q - p_k) e_{b+1-k} * e_{a-1+k}`.
    pub fn quadratic_relation_sides(&self, i: usize, j: usize, a: i32, b: i32) -> Result<(GradedLaurent, GradedLaurent)> {
        let nv = self.num_vertices();
        if i >= nv || j >= nv {
            return Err(Error::UnknownVertex(format!("{}", i.max(j))));
        }
        let degree = DegreeVector::unit(nv, i).add(&DegreeVector::unit(nv, j));
        let mut lhs = self.zero(degree.clone());
        let mut rhs = self.zero(degree);
        let term = |c: &Poly, x: (usize, i32), y: (usize, i32)| -> Result<GradedLaurent> {
            let w = Word::new(vec![Letter::new(x.0, x.1), Letter::new(y.0, y.1)]);
            Ok(self.e_word(&w)?.scale(&RatFunc::from_poly(c.clone())))
        };
        if i != j {
            for (k, p) in x_coefficients(&self.kernel.zeta(j, i).num) {
                lhs = lhs.add(&term(&p, (i, a - k), (j, b + k))?)?;
            }
            for (k, rk) in x_coefficients(&self.kernel.zeta(i, j).num) {
                rhs = rhs.add(&term(&rk, (j, b - k), (i, a + k))?)?;
            }
        } else {
            let np = self.np();
            let mut qe = exp_zero(1 + np);
            let mut src = exp_zero(self.quiver().params().len());
            src[0] = 1;
            qe[1..].copy_from_slice(&self.kernel.param_monomial(&src));
            // num = (1 - x/q) P(x) = -(x - q) P(x) / q
            let num = &self.kernel.zeta(i, i).num;
            let quot = num.div_linear(0, &qe, &Int::ONE).expect("ζ_ii vanishes at x = q");
            let mut neg_q = exp_zero(1 + np);
            neg_q[1..].copy_from_slice(&qe[1..]);
            let pk = x_coefficients(&quot.mul_monomial(&neg_q, &-Int::ONE));
            let get = |k: i32| pk.iter().find(|x| x.0 == k).map(|x| x.1.clone()).unwrap_or_else(|| Poly::zero(np));
            let inv_q: Exp = qe[1..].iter().map(|x| -x).collect();
            let lo = pk.first().map(|x| x.0).unwrap_or(0);
            let hi = pk.last().map(|x| x.0).unwrap_or(0) + 1;
            for k in lo..=hi {
                let shifted = get(k - 1).mul_monomial(&inv_q, &Int::ONE);
                let c = get(k).sub(&shifted);
                if !c.is_zero() {
                    lhs = lhs.add(&term(&c, (i, a - k), (i, b + k))?)?;
                }
                let s = shifted.sub(&get(k));
                if !s.is_zero() {
                    rhs = rhs.add(&term(&s, (i, b + 1 - k), (i, a - 1 + k))?)?;
                }
            }
        }
        Ok((lhs, rhs))
    }
}

/// `(k, coefficient of x^k)` of a polynomial in `x` (variable 0) and parameters.
pub(crate) fn x_coefficients(p: &Poly) -> Vec<(i32, Poly)> {
    let np = p.nvars() - 1;
    let mut out: Vec<(i32, Vec<(Exp, Int)>)> = Vec::new();
    for (e, c) in p.terms() {
        let k = e[0];
        let rest = Exp::from_slice(&e[1..]);
        match out.iter_mut().find(|x| x.0 == k) {
            Some(x) => x.1.push((rest, c.clone())),
            None => out.push((k, vec![(rest, c.clone())])),
        }
    }
    out.sort_by_key(|x| x.0);
    out.into_iter().map(|(k, t)| (k, Poly::from_terms(np, t))).collect()
}

/// Antisymmetrizes `base · ∏ factors · sign · z^zb` over `cosets` and divides by the
/// Vandermonde of each vertex block, on packed keys. `None` when the exponents do not fit.
fn numerator_packed(
    degree: &DegreeVector,
    base: &Poly,
    factors: &[Poly],
    zb: &[i32],
    sign: &Int,
    cosets: &[(Vec<usize>, bool)],
) -> Option<Poly> {
    let target = base.nvars();
    let (mut lo, mut hi) = (exp_add(&base.min_exps(), zb), exp_add(&base.max_exps(), zb));
    for g in factors {
        let (gl, gh) = (g.min_exps(), g.max_exps());
        for v in 0..target {
            lo[v] = lo[v].checked_add(gl[v].min(0))?;
            hi[v] = hi[v].checked_add(gh[v].max(0))?;
        }
    }
    // one range per vertex block so that permuting variables only moves fields
    for i in 0..degree.num_vertices() {
        let block = degree.offset(i)..degree.offset(i) + degree.count(i);
        if block.is_empty() {
            continue;
        }
        let l = block.clone().map(|v| lo[v]).min()?;
        let h = block.clone().map(|v| hi[v]).max()?;
        for v in block {
            lo[v] = l;
            hi[v] = h;
        }
    }
    let p = Packing::new(&lo, &hi)?;
    let mut f = p.pack_poly(base)?;
    for g in factors {
        f = packed::mul_offsets(&f, &p.offsets_of(g)?)?;
    }
    let shift = p.offset(zb);
    let sign = sign.to_i64()?;
    for t in f.iter_mut() {
        t.0 = t.0.wrapping_add(shift);
        t.1 = t.1.checked_mul(sign)?;
    }
    let mut acc = MergeAcc::default();
    for (perm, odd) in cosets {
        let sign = if *odd { -1 } else { 1 };
        let g: Option<Packed> = f.iter().map(|&(k, c)| Some((p.remap(k, perm), c.checked_mul(sign)?))).collect();
        let mut g = g?;
        g.sort_unstable_by_key(|t| t.0);
        acc.push(g)?;
    }
    let mut num = acc.finish()?;
    for i in 0..degree.num_vertices() {
        let off = degree.offset(i);
        let k = degree.count(i);
        for x in 0..k {
            for y in x + 1..k {
                let mut e = exp_zero(target);
                e[off + y] = 1;
                num = match packed::div_linear(&p, num, off + x, p.offset(&e), 1) {
                    Division::Exact(q) => q,
                    Division::Remainder => panic!("shuffle product: poles did not cancel"),
                    Division::Overflow => return None,
                };
            }
        }
    }
    Some(p.to_poly(num))
}

fn numerator_generic(
    degree: &DegreeVector,
    base: Poly,
    factors: &[Poly],
    zb: &[i32],
    sign: &Int,
    cosets: &[(Vec<usize>, bool)],
) -> Poly {
    let target = base.nvars();
    let f = factors.iter().fold(base, |f, g| f.mul(g)).mul_monomial(zb, sign);
    let terms = cosets.iter().map(|(perm, odd)| {
        let g = f.permute(perm);
        if *odd {
            g.neg()
        } else {
            g
        }
    });
    let mut num = Poly::sum(target, terms);
    for i in 0..degree.num_vertices() {
        let off = degree.offset(i);
        let k = degree.count(i);
        for x in 0..k {
            for y in x + 1..k {
                let mut e = exp_zero(target);
                e[off + y] = 1;
                num = num.div_linear(off + x, &e, &Int::ONE).expect("shuffle product: poles did not cancel");
            }
        }
    }
    num
}

/// Factors `z_{off+a} - z_{off+b}`, `a < b`, of the Vandermonde of `k` consecutive variables.
fn vandermonde_factors(target: usize, off: usize, k: usize) -> Vec<Poly> {
    let mut out = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            out.push(Poly::var(target, off + a).sub(&Poly::var(target, off + b)));
        }
    }
    out
}

/// Representatives of the per-vertex shuffle cosets, as permutations of the flat ring of
/// `degree(r) + degree(s)`, with their parity.
fn coset_representatives(dr: &DegreeVector, ds: &DegreeVector, np: usize) -> Vec<(Vec<usize>, bool)> {
    let degree = dr.add(ds);
    let nz = degree.len();
    let mut out: Vec<(Vec<usize>, bool)> = vec![((0..nz + np).collect(), false)];
    for i in 0..degree.num_vertices() {
        let off = degree.offset(i);
        let (n1, n2) = (dr.count(i), ds.count(i));
        if n1 == 0 || n2 == 0 {
            continue;
        }
        let subsets = subsets_of_size(n1 + n2, n1);
        let mut next = Vec::with_capacity(out.len() * subsets.len());
        for (base, odd) in &out {
            for set in &subsets {
                let comp: Vec<usize> = (0..n1 + n2).filter(|x| !set.contains(x)).collect();
                let mut p = base.clone();
                for (a, &x) in set.iter().enumerate() {
                    p[off + a] = off + x;
                }
                for (b, &x) in comp.iter().enumerate() {
                    p[off + n1 + b] = off + x;
                }
                let inv = set.iter().map(|&x| comp.iter().filter(|&&y| y < x).count()).sum::<usize>();
                next.push((p, *odd ^ (inv % 2 == 1)));
            }
        }
        out = next;
    }
    out
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Slot triples `(a, b, c)` for a wheel substitution with `a, c` at vertex `u` and `b` at `v`.
fn index_triples(degree: &DegreeVector, u: usize, v: usize, all: bool) -> Vec<(usize, usize, usize)> {
    let (nu, nvv) = (degree.count(u), degree.count(v));
    let mut out = Vec::new();
    for a in 0..nu {
        for c in 0..nu {
            for b in 0..nvv {
                let distinct = a != c && (u != v || (b != a && b != c));
                if distinct {
                    out.push((a, b, c));
                }
            }
        }
    }
    if !all {
        // lowest slots: (0, 0, 1) off the diagonal, (0, 1, 2) for loops
        out.sort_by_key(|&(a, b, c)| if u == v { (a, b, c) } else { (a, c, b) });
        out.truncate(1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::RawLaurent;

    fn ctx(q: Quiver, t: Twist) -> ShuffleContext {
        ShuffleContext::new(q, t, None, WheelRegime::ThreeVariable).unwrap()
    }

    fn w(c: &ShuffleContext, s: &str) -> Word {
        Word::parse(c.quiver(), s).unwrap()
    }

    /// Symmetric element from `(exponents, coefficient text)` terms.
    fn elem(c: &ShuffleContext, counts: &[u32], terms: &[(&[i32], &str)]) -> GradedLaurent {
        let t: Vec<(Exp, RatFunc)> = terms.iter().map(|(e, s)| (Exp::from_slice(e), c.parse_coeff(s).unwrap())).collect();
        GradedLaurent::from_terms(DegreeVector::new(counts.to_vec()), c.twist(), c.params().clone(), &t).unwrap()
    }

    #[test]
    fn generators() {
        let c = ctx(Quiver::two_vertex(1), Twist::Plain);
        let g = c.generator(0, 0, Side::E).unwrap();
        assert_eq!(g, elem(&c, &[1, 0], &[(&[0], "1")]));
        assert_eq!(c.generator(0, 3, Side::E).unwrap(), elem(&c, &[1, 0], &[(&[3], "1")]));
        assert_eq!(c.generator(1, -1, Side::F).unwrap(), elem(&c, &[0, 1], &[(&[-1], "1")]));
        assert!(matches!(c.generator(2, 0, Side::E), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn unit_is_neutral() {
        let c = ctx(Quiver::loops(1), Twist::Plain);
        let r = c.e_word(&w(&c, "[1^0 1^2]")).unwrap();
        assert_eq!(c.shuffle_product(&c.unit(), &r, Side::E).unwrap(), r);
        assert_eq!(c.shuffle_product(&r, &c.unit(), Side::E).unwrap(), r);
    }

    #[test]
    fn jordan_square_matches_rational_oracle() {
        // ζ(x) = (1 - x/q)(1 - t x)(1 - q x/t) / (1 - x); clear denominators by hand:
        // ζ(z/w) + ζ(w/z) = [w·N(z/w) - z·N(w/z)] / (w - z) with N the numerator.
        let c = ctx(Quiver::loops(1), Twist::Plain);
        let p = c.e_word(&w(&c, "[1^0 1^0]")).unwrap();
        let np = c.np();
        let zeta = &c.kernel().zeta(0, 0).num;
        let n = 2 + np;
        let img = |a: usize, b: usize| {
            let mut x = exp_zero(n);
            x[a] = 1;
            x[b] = -1;
            let mut imgs = vec![x];
            for k in 0..np {
                let mut e = exp_zero(n);
                e[2 + k] = 1;
                imgs.push(e);
            }
            zeta.map_monomials(&imgs, n)
        };
        let (z, wv) = (Poly::var(n, 0), Poly::var(n, 1));
        let top = wv.mul(&img(0, 1)).sub(&z.mul(&img(1, 0)));
        let quot = top.div_linear(1, &Exp::from_slice(&[1, 0, 0, 0]), &Int::ONE).expect("exact");
        // top / (w - z) = quot
        let expected = GradedLaurent::from_raw(RawLaurent::new(DegreeVector::new(vec![2]), Twist::Plain, c.params().clone(), quot, Poly::one(np)).unwrap()).unwrap();
        assert_eq!(p, expected);
        assert!(p.denominator().is_one());
        assert_eq!(p.degree().counts(), &[2]);
    }

    #[test]
    fn commuting_vertices_without_edges() {
        let q = Quiver::new(&["1", "2"], &[]).unwrap();
        let c = ctx(q, Twist::Plain);
        let a = c.generator(0, 2, Side::E).unwrap();
        let b = c.generator(1, -1, Side::E).unwrap();
        let ab = c.shuffle_product(&a, &b, Side::E).unwrap();
        assert_eq!(ab, c.shuffle_product(&b, &a, Side::E).unwrap());
        assert_eq!(ab, elem(&c, &[1, 1], &[(&[2, -1], "1")]));
        assert_eq!(c.shuffle_product(&a, &b, Side::F).unwrap(), ab);
    }

    #[test]
    fn associativity() {
        for t in [Twist::Plain, Twist::Prime] {
            let c = ctx(Quiver::new(&["1", "2"], &[("1", "2", "a"), ("1", "1", "b")]).unwrap(), t);
            let a = c.generator(0, 1, Side::E).unwrap();
            let b = c.generator(1, -1, Side::E).unwrap();
            let d = c.generator(0, 0, Side::E).unwrap();
            let ab = c.shuffle_product(&a, &b, Side::E).unwrap();
            let bd = c.shuffle_product(&b, &d, Side::E).unwrap();
            assert_eq!(c.shuffle_product(&ab, &d, Side::E).unwrap(), c.shuffle_product(&a, &bd, Side::E).unwrap());
        }
    }

    #[test]
    fn wheel_examples() {
        let c = ctx(Quiver::loops(1), Twist::Plain);
        let one3 = elem(&c, &[3], &[(&[0, 0, 0], "1")]);
        let rep = c.wheel_check(&one3).unwrap();
        assert!(!rep.passes);
        assert!(rep.first_failure.unwrap().contains("z_{1,1} = q*s"));
        let one2 = elem(&c, &[2], &[(&[0, 0], "1")]);
        assert!(c.wheel_check(&one2).unwrap().passes);
        let cube = c.e_word(&w(&c, "[1^0 1^0 1^0]")).unwrap();
        assert!(c.wheel_check(&cube).unwrap().passes);
        let paranoid = ctx(Quiver::loops(1), Twist::Plain).with_paranoid(true);
        let cube = paranoid.e_word(&w(&paranoid, "[1^0 1^1 1^-1]")).unwrap();
        assert!(paranoid.wheel_check(&cube).unwrap().passes);
        assert!(!paranoid.wheel_check(&elem(&paranoid, &[3], &[(&[0, 0, 0], "1")])).unwrap().passes);
    }

    #[test]
    fn wheel_two_vertices() {
        for t in [Twist::Plain, Twist::Prime] {
            let c = ctx(Quiver::two_vertex(1), t);
            let x = c.e_word(&w(&c, "[1^0 2^1 1^-1]")).unwrap();
            assert!(c.wheel_check(&x).unwrap().passes);
            let bad = elem(&c, &[2, 1], &[(&[0, 0, 0], "1")]);
            assert!(!c.wheel_check(&bad).unwrap().passes);
        }
    }

    #[test]
    fn restricted_regime() {
        let q = Quiver::loops(1);
        let spec = Specialization::parse(&q.params(), "q=u2^2, t=u2").unwrap();
        assert!(ShuffleContext::new(q.clone(), Twist::Plain, None, WheelRegime::Restricted).is_err());
        let c = ShuffleContext::new(q, Twist::Plain, Some(spec), WheelRegime::Restricted).unwrap();
        let x = c.e_word(&w(&c, "[1^0 1^1 1^0]")).unwrap();
        assert!(c.wheel_check(&x).unwrap().passes);
        let bad = elem(&c, &[3], &[(&[0, 0, 0], "1")]);
        let rep = c.wheel_check(&bad).unwrap();
        assert!(!rep.passes);
        assert!(rep.first_failure.unwrap().contains("k = 2"));
    }

    #[test]
    fn spherical_witness() {
        let c = ctx(Quiver::loops(1), Twist::Plain);
        let one = RatFunc::one(c.np());
        let g = c.generator(0, 5, Side::E).unwrap();
        assert!(c.is_spherical_witness(&g, &[(one.clone(), w(&c, "[1^5]"))]).unwrap());
        let p = c.e_word(&w(&c, "[1^0 1^1]")).unwrap();
        assert!(c.is_spherical_witness(&p, &[(one.clone(), w(&c, "[1^0 1^1]"))]).unwrap());
        assert!(!c.is_spherical_witness(&p, &[(one, w(&c, "[1^1 1^0]"))]).unwrap());
    }

    #[test]
    fn quadratic_relations() {
        for t in [Twist::Plain, Twist::Prime] {
            let c = ctx(Quiver::new(&["1", "2"], &[("1", "2", "a"), ("2", "2", "b")]).unwrap(), t);
            for (i, j) in [(0, 1), (1, 0), (1, 1), (0, 0)] {
                for (a, b) in [(0, 0), (1, -2), (-1, 3)] {
                    let (l, r) = c.quadratic_relation_sides(i, j, a, b).unwrap();
                    assert_eq!(l, r, "i={i} j={j} a={a} b={b} {t:?}");
                }
            }
        }
    }
}
