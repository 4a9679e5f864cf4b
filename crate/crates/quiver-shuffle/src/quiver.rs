//! Quivers, arrow counts and the ζ kernels of both twists.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{Params, RatFunc, Specialization};
use crate::int::Int;
use crate::poly::{exp_zero, Exp, Poly};

/// Which ζ function twists the shuffle product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Twist {
    Plain,
    Prime,
}

impl Twist {
    pub fn as_str(self) -> &'static str {
        match self {
            Twist::Plain => "plain",
            Twist::Prime => "prime",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Twist::Plain),
            "prime" => Ok(Twist::Prime),
            _ => Err(Error::Parse(format!("unknown twist {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: usize,
    pub tgt: usize,
    pub label: String,
}

/// Finite oriented graph with ordered vertices; loops and parallel edges allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quiver {
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

impl Quiver {
    /// Builds a quiver from vertex names (in order) and `(src, tgt, label)` triples.
    /// Edge `label` owns the parameter `t<label>`.
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(S, S, S)]) -> Result<Self> {
        let vertices: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        for (k, v) in vertices.iter().enumerate() {
            if v.is_empty() || v.chars().any(|c| c.is_whitespace() || "[]^".contains(c)) {
                return Err(Error::Invalid(format!("bad vertex name {v:?}")));
            }
            if vertices[..k].contains(v) {
                return Err(Error::Invalid(format!("duplicate vertex {v:?}")));
            }
        }
        let find = |name: &str| {
            vertices.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVertex(name.to_string()))
        };
        let mut out = Vec::with_capacity(edges.len());
        for (s, t, l) in edges {
            let label = l.as_ref().to_string();
            if !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Invalid(format!("bad edge label {label:?}")));
            }
            out.push(Edge { src: find(s.as_ref())?, tgt: find(t.as_ref())?, label });
        }
        out.sort_by(|a, b| (a.src, a.tgt, &a.label).cmp(&(b.src, b.tgt, &b.label)));
        for w in out.windows(2) {
            if w[0].label == w[1].label {
                return Err(Error::Invalid(format!("duplicate edge label {:?}", w[0].label)));
            }
        }
        let labels: Vec<&String> = out.iter().map(|e| &e.label).collect();
        for (k, l) in labels.iter().enumerate() {
            if labels[..k].contains(l) {
                return Err(Error::Invalid(format!("duplicate edge label {l:?}")));
            }
        }
        Ok(Quiver { vertices, edges: out })
    }

    /// One vertex `1` with `g` loops labelled `""` (g = 1) or `1..g`.
    pub fn loops(g: usize) -> Self {
        let labels: Vec<String> = if g == 1 { alloc::vec![String::new()] } else { (1..=g).map(|k| k.to_string()).collect() };
        let edges: Vec<(String, String, String)> = labels.into_iter().map(|l| ("1".into(), "1".into(), l)).collect();
        Quiver::new(&["1".to_string()], &edges).unwrap()
    }

    /// Vertices `1`, `2` and `k` parallel edges `1 → 2` labelled `1..k`.
    pub fn two_vertex(k: usize) -> Self {
        let edges: Vec<(String, String, String)> = (1..=k).map(|l| ("1".into(), "2".into(), l.to_string())).collect();
        Quiver::new(&["1".to_string(), "2".to_string()], &edges).unwrap()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.vertices.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn vertex_name(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    /// `#→ij` when `directed`, otherwise `#ij = #→ij + #→ji`.
    pub fn arrow_count(&self, i: usize, j: usize, directed: bool) -> i32 {
        let d = self.edges.iter().filter(|e| e.src == i && e.tgt == j).count() as i32;
        if directed {
            d
        } else {
            d + self.edges.iter().filter(|e| e.src == j && e.tgt == i).count() as i32
        }
    }

    pub fn arrow_count_named(&self, i: &str, j: &str, directed: bool) -> Result<i32> {
        Ok(self.arrow_count(self.vertex_index(i)?, self.vertex_index(j)?, directed))
    }

    /// `m = 2|E|`.
    pub fn m(&self) -> i32 {
        2 * self.edges.len() as i32
    }

    /// `q` followed by `t<label>` for each edge in sorted edge order.
    pub fn params(&self) -> Params {
        let mut names = alloc::vec!["q".to_string()];
        names.extend(self.edges.iter().map(|e| format!("t{}", e.label)));
        Params::new(names).expect("edge labels are validated")
    }

    /// Index of the parameter `t_e` of edge number `e`.
    pub fn edge_param(&self, e: usize) -> usize {
        1 + e
    }
}

/// A rational function `num(x)/den(x)` over the parameter field; `x` is variable 0 and the
/// parameters follow.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Zeta {
    pub num: Poly,
    pub den: Poly,
    /// Linear factors whose product is `num`.
    pub factors: Vec<Poly>,
}

/// Truncated Laurent series `Σ coeffs[k] x^{low+k}` with Laurent polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XSeries {
    pub low: i32,
    pub coeffs: Vec<Poly>,
}

impl XSeries {
    pub fn coeff(&self, k: i32) -> Option<&Poly> {
        if k < self.low {
            return None;
        }
        self.coeffs.get((k - self.low) as usize)
    }

    /// Highest exponent carried.
    pub fn high(&self) -> i32 {
        self.low + self.coeffs.len() as i32 - 1
    }
}

/// Source of ζ factors for one quiver, twist and optional specialization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZetaKernel {
    quiver: Quiver,
    twist: Twist,
    spec: Option<Specialization>,
    params: Params,
    table: Vec<Zeta>,
}

impl ZetaKernel {
    pub fn new(quiver: Quiver, twist: Twist, spec: Option<Specialization>) -> Result<Self> {
        let source = quiver.params();
        if let Some(s) = &spec {
            if *s.source() != source {
                return Err(Error::ContextMismatch(format!(
                    "specialization source {:?} differs from quiver parameters {:?}",
                    s.source().names(),
                    source.names()
                )));
            }
        }
        let params = spec.as_ref().map(|s| s.target().clone()).unwrap_or_else(|| source.clone());
        let nv = quiver.num_vertices();
        let mut table = Vec::with_capacity(nv * nv);
        for i in 0..nv {
            for j in 0..nv {
                let z = raw_zeta(&quiver, twist, i, j);
                table.push(match &spec {
                    None => z,
                    Some(s) => {
                        let mut images: Vec<Exp> = Vec::with_capacity(source.len() + 1);
                        let mut x = exp_zero(params.len() + 1);
                        x[0] = 1;
                        images.push(x);
                        for img in s.images() {
                            let mut e = exp_zero(params.len() + 1);
                            e[1..].copy_from_slice(img);
                            images.push(e);
                        }
                        Zeta {
                            num: z.num.map_monomials(&images, params.len() + 1),
                            den: z.den.map_monomials(&images, params.len() + 1),
                            factors: z.factors.iter().map(|f| f.map_monomials(&images, params.len() + 1)).collect(),
                        }
                    }
                });
            }
        }
        Ok(ZetaKernel { quiver, twist, spec, params, table })
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn twist(&self) -> Twist {
        self.twist
    }

    pub fn specialization(&self) -> Option<&Specialization> {
        self.spec.as_ref()
    }

    /// The active parameter set (the specialization target when present).
    pub fn params(&self) -> &Params {
        &self.params
    }

    /// `ζ_ij(x)` (or `ζ′_ij`) as numerator/denominator in `x` and the active parameters.
    pub fn zeta(&self, i: usize, j: usize) -> &Zeta {
        &self.table[i * self.quiver.num_vertices() + j]
    }

    /// Image of a source parameter monomial in the active parameters.
    pub fn param_monomial(&self, e: &[i32]) -> Exp {
        match &self.spec {
            None => Exp::from_slice(e),
            Some(s) => s.map_exp(e),
        }
    }

    /// Expansion of `1/ζ_ij(x)` at `x = 0` through exponent `high`.
    pub fn inverse_series(&self, i: usize, j: usize, high: i32) -> XSeries {
        let z = self.zeta(i, j);
        series_div(&z.den, &z.num, high)
    }

    /// `zeta_ratio_series`: expansion of `ζ_ij(1/x)/ζ_ji(x)` at `x = 0` through exponent `order`.
    pub fn zeta_ratio_series(&self, i: usize, j: usize, order: i32) -> XSeries {
        let a = self.zeta(i, j);
        let b = self.zeta(j, i);
        let num = invert_x(&a.num).mul(&b.den);
        let den = invert_x(&a.den).mul(&b.num);
        series_div(&num, &den, order)
    }

    /// Value of `ζ′_ij(x)/ζ′_ji(1/x)` at `x = 0`: `q^δ ∏_{i→j} t_e^{-1} ∏_{j→i} t_e/q`.
    pub fn constant_term_zero(&self, i: usize, j: usize) -> RatFunc {
        let np = self.quiver.params().len();
        let mut e = exp_zero(np);
        if i == j {
            e[0] += 1;
        }
        for (k, edge) in self.quiver.edges.iter().enumerate() {
            if edge.src == i && edge.tgt == j {
                e[self.quiver.edge_param(k)] -= 1;
            }
            if edge.src == j && edge.tgt == i {
                e[self.quiver.edge_param(k)] += 1;
                e[0] -= 1;
            }
        }
        self.monomial_value(&e)
    }

    /// Value of `ζ′_ij(x)/ζ′_ji(1/x)` at `x = ∞`: `q^{-δ} ∏_{i→j} q/t_e ∏_{j→i} t_e`.
    pub fn constant_term_infinity(&self, i: usize, j: usize) -> RatFunc {
        let np = self.quiver.params().len();
        let mut e = exp_zero(np);
        if i == j {
            e[0] -= 1;
        }
        for (k, edge) in self.quiver.edges.iter().enumerate() {
            if edge.src == i && edge.tgt == j {
                e[self.quiver.edge_param(k)] -= 1;
                e[0] += 1;
            }
            if edge.src == j && edge.tgt == i {
                e[self.quiver.edge_param(k)] += 1;
            }
        }
        self.monomial_value(&e)
    }

    fn monomial_value(&self, e: &[i32]) -> RatFunc {
        RatFunc::from_poly(Poly::monomial(self.param_monomial(e), Int::ONE))
    }
}

/// `ζ` over the quiver's own parameters, arity `1 + np`.
fn raw_zeta(quiver: &Quiver, twist: Twist, i: usize, j: usize) -> Zeta {
    let n = quiver.params().len() + 1;
    let one = Poly::one(n);
    let x = Poly::var(n, 0);
    let q = 1;
    let mono = |xe: i32, qe: i32, te: Option<(usize, i32)>, c: i64| {
        let mut e = exp_zero(n);
        e[0] = xe;
        e[q] = qe;
        if let Some((t, k)) = te {
            e[t] += k;
        }
        Poly::monomial(e, Int::from(c))
    };
    let mut factors = Vec::new();
    let mut den = one.clone();
    if i == j {
        factors.push(one.sub(&mono(1, -1, None, 1)));
        den = den.sub(&x);
    }
    for (k, e) in quiver.edges.iter().enumerate() {
        let t = 1 + quiver.edge_param(k);
        if e.src == i && e.tgt == j {
            factors.push(match twist {
                Twist::Plain => one.sub(&mono(1, 0, Some((t, 1)), 1)),
                Twist::Prime => mono(0, 0, Some((t, -1)), 1).sub(&x),
            });
        }
        if e.src == j && e.tgt == i {
            factors.push(match twist {
                Twist::Plain => one.sub(&mono(1, 1, Some((t, -1)), 1)),
                Twist::Prime => one.sub(&mono(-1, -1, Some((t, 1)), 1)),
            });
        }
    }
    let num = factors.iter().fold(one, |a, f| a.mul(f));
    Zeta { num, den, factors }
}

/// Substitutes `x ↦ 1/x` (variable 0).
fn invert_x(p: &Poly) -> Poly {
    let terms = p
        .terms()
        .iter()
        .map(|(e, c)| {
            let mut e = e.clone();
            e[0] = -e[0];
            (e, c.clone())
        })
        .collect();
    Poly::from_terms(p.nvars(), terms)
}

/// Splits a Laurent polynomial in `x` into coefficient polynomials (arity `nvars - 1`).
fn x_coeffs(p: &Poly) -> (i32, Vec<Poly>) {
    let n = p.nvars() - 1;
    let lo = p.terms().iter().map(|t| t.0[0]).min().unwrap_or(0);
    let hi = p.terms().iter().map(|t| t.0[0]).max().unwrap_or(0);
    let mut out: Vec<Vec<(Exp, Int)>> = alloc::vec![Vec::new(); (hi - lo + 1) as usize];
    for (e, c) in p.terms() {
        out[(e[0] - lo) as usize].push((Exp::from_slice(&e[1..]), c.clone()));
    }
    (lo, out.into_iter().map(|t| Poly::from_terms(n, t)).collect())
}

/// Series of `a/b` at `x = 0` through exponent `high`. The lowest `x`-coefficient of `b`
/// must be a unit (`±` a parameter monomial), which holds for every ζ quotient.
fn series_div(a: &Poly, b: &Poly, high: i32) -> XSeries {
    let (alo, ac) = x_coeffs(a);
    let (blo, bc) = x_coeffs(b);
    let low = alo - blo;
    let np = a.nvars() - 1;
    if high < low {
        return XSeries { low, coeffs: Vec::new() };
    }
    let len = (high - low + 1) as usize;
    let b0 = &bc[0];
    assert!(b0.is_monomial(), "ζ series: lowest coefficient must be a unit");
    let (be, bcoef) = &b0.terms()[0];
    assert!(bcoef.abs().is_one(), "ζ series: lowest coefficient must be a unit");
    let inv_e: Exp = be.iter().map(|x| -x).collect();
    let inv_c = bcoef.clone();
    let mut out: Vec<Poly> = Vec::with_capacity(len);
    for k in 0..len {
        let mut s = ac.get(k).cloned().unwrap_or_else(|| Poly::zero(np));
        for l in 1..=k.min(bc.len() - 1) {
            s = s.sub(&bc[l].mul(&out[k - l]));
        }
        out.push(s.mul_monomial(&inv_e, &inv_c));
    }
    XSeries { low, coeffs: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(k: &ZetaKernel, s: &str) -> RatFunc {
        k.params().parse(s).unwrap()
    }

    /// Evaluates a ζ in `x` given as text by reading it as a rational function in `x`.
    fn zeta_as_text(k: &ZetaKernel, i: usize, j: usize) -> (Params, RatFunc) {
        let mut names = alloc::vec!["x".to_string()];
        names.extend(k.params().names().iter().cloned());
        let p = Params::new(names).unwrap();
        let z = k.zeta(i, j);
        (p, RatFunc::new(z.num.clone(), z.den.clone()).unwrap())
    }

    #[test]
    fn arrow_counts() {
        let j = Quiver::loops(1);
        assert_eq!(j.arrow_count(0, 0, false), 2);
        assert_eq!(j.arrow_count(0, 0, true), 1);
        let a = Quiver::two_vertex(1);
        assert_eq!(a.arrow_count_named("1", "2", true).unwrap(), 1);
        assert_eq!(a.arrow_count_named("2", "1", true).unwrap(), 0);
        assert_eq!(a.arrow_count_named("2", "1", false).unwrap(), 1);
        let e = Quiver::two_vertex(0);
        for i in 0..2 {
            for k in 0..2 {
                assert_eq!(e.arrow_count(i, k, false), 0);
            }
        }
        assert!(matches!(a.arrow_count_named("3", "1", true), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn quiver_validation() {
        assert!(Quiver::new(&["1", "1"], &[]).is_err());
        assert!(Quiver::new(&["1"], &[("1", "2", "a")]).is_err());
        assert!(Quiver::new(&["1"], &[("1", "1", "a"), ("1", "1", "a")]).is_err());
        let q = Quiver::new(&["a", "b"], &[("b", "a", "z"), ("a", "b", "y")]).unwrap();
        assert_eq!(q.edges()[0].label, "y");
        assert_eq!(q.params().names(), ["q", "ty", "tz"]);
    }

    #[test]
    fn zeta_examples() {
        let k = ZetaKernel::new(Quiver::loops(1), Twist::Plain, None).unwrap();
        let (p, z) = zeta_as_text(&k, 0, 0);
        assert_eq!(z, p.parse("(1 - x/q)*(1 - t*x)*(1 - q*x/t)/(1 - x)").unwrap());
        let k2 = ZetaKernel::new(Quiver::two_vertex(0), Twist::Plain, None).unwrap();
        assert_eq!(zeta_as_text(&k2, 0, 1).1, RatFunc::one(2));
        let kp = ZetaKernel::new(Quiver::loops(1), Twist::Prime, None).unwrap();
        let (p, z) = zeta_as_text(&kp, 0, 0);
        assert_eq!(z, p.parse("(1 - x/q)*(1/t - x)*(1 - t/(q*x))/(1 - x)").unwrap());
    }

    #[test]
    fn zeta_vanishes_at_q() {
        for g in 0..3 {
            let k = ZetaKernel::new(Quiver::loops(g), Twist::Plain, None).unwrap();
            let z = k.zeta(0, 0);
            let mut img: Vec<Exp> = Vec::new();
            let n = z.num.nvars();
            let mut x = exp_zero(n);
            x[1] = 1;
            img.push(x);
            for v in 1..n {
                let mut e = exp_zero(n);
                e[v] = 1;
                img.push(e);
            }
            assert!(z.num.map_monomials(&img, n).is_zero());
        }
    }

    #[test]
    fn ratio_series_lowest_order_plain() {
        let k = ZetaKernel::new(Quiver::loops(1), Twist::Plain, None).unwrap();
        let s = k.zeta_ratio_series(0, 0, 4);
        assert_eq!(s.low, -2);
        assert!(!s.coeffs[0].is_zero());
        let k2 = ZetaKernel::new(Quiver::two_vertex(0), Twist::Plain, None).unwrap();
        let s2 = k2.zeta_ratio_series(0, 1, 5);
        assert_eq!(s2.low, 0);
        assert!(s2.coeffs[0].is_one() && s2.coeffs[1..].iter().all(Poly::is_zero));
    }

    #[test]
    fn series_is_stable_and_exact() {
        let k = ZetaKernel::new(Quiver::two_vertex(2), Twist::Plain, None).unwrap();
        let a = k.zeta_ratio_series(1, 0, 3);
        let b = k.zeta_ratio_series(1, 0, 8);
        assert_eq!(a.coeffs[..], b.coeffs[..a.coeffs.len()]);
        let inv = k.inverse_series(0, 0, 6);
        let z = k.zeta(0, 0);
        // den = num * series up to the truncation order
        let n = z.num.nvars();
        let mut s = Poly::zero(n);
        for (d, c) in inv.coeffs.iter().enumerate() {
            let mut e = exp_zero(n);
            e[0] = inv.low + d as i32;
            s = s.add(&c.embed(n, &(1..n).collect::<Vec<_>>()).mul_monomial(&e, &Int::ONE));
        }
        let prod = s.mul(&z.num).sub(&z.den);
        assert!(prod.terms().iter().all(|(e, _)| e[0] > 6));
    }

    #[test]
    fn prime_constant_terms() {
        let k = ZetaKernel::new(Quiver::loops(1), Twist::Prime, None).unwrap();
        assert_eq!(k.constant_term_zero(0, 0), rf(&k, "1"));
        let k = ZetaKernel::new(Quiver::two_vertex(1), Twist::Prime, None).unwrap();
        assert_eq!(k.constant_term_zero(0, 1), rf(&k, "1/t1"));
        assert_eq!(k.constant_term_zero(1, 0), rf(&k, "t1/q"));
        assert_eq!(k.constant_term_zero(0, 0), rf(&k, "q"));
        let s = k.zeta_ratio_series(0, 1, 3);
        assert_eq!(s.low, 0);
        assert_eq!(RatFunc::from_poly(s.coeffs[0].clone()), k.constant_term_infinity(0, 1));
    }

    #[test]
    fn specialized_kernel() {
        let q = Quiver::loops(1);
        let s = Specialization::parse(&q.params(), "q=u2^2, t=u2").unwrap();
        let k = ZetaKernel::new(q, Twist::Plain, Some(s)).unwrap();
        let (p, z) = zeta_as_text(&k, 0, 0);
        assert_eq!(z, p.parse("(1 - x/u2^2)*(1 - u2*x)*(1 - u2*x)/(1 - x)").unwrap());
    }
}
