//! Exact linear algebra over the parameter field, and modular rank probes.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::field::RatFunc;
use crate::poly::{inv_mod, mulmod, Poly};

/// Prime used for rank probes.
pub const PROBE_PRIME: u64 = (1 << 61) - 1;

fn cost(x: &RatFunc) -> usize {
    x.num().len() + x.den().len()
}

/// Row echelon form built one row at a time; each stored row has a unit pivot.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(usize, Vec<RatFunc>)>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon { rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the stored rows; keeps it and returns `true` when it is
    /// independent of them.
    pub fn insert(&mut self, row: &[RatFunc]) -> bool {
        let mut r = row.to_vec();
        for (p, basis) in &self.rows {
            if r[*p].is_zero() {
                continue;
            }
            let f = r[*p].clone();
            for (x, b) in r.iter_mut().zip(basis) {
                if !b.is_zero() {
                    *x = x.sub(&f.mul(b));
                }
            }
        }
        let Some(p) = (0..r.len()).filter(|&k| !r[k].is_zero()).min_by_key(|&k| cost(&r[k])) else {
            return false;
        };
        let inv = r[p].inv().expect("nonzero pivot");
        for x in r.iter_mut() {
            if !x.is_zero() {
                *x = x.mul(&inv);
            }
        }
        self.rows.push((p, r));
        true
    }
}

/// Rows over the polynomial ring, each scaled by the product of its distinct denominators,
/// together with those scale factors.
fn cleared_rows(rows: &[Vec<RatFunc>]) -> (Vec<Vec<Poly>>, Vec<Poly>) {
    let mut scales = Vec::with_capacity(rows.len());
    let cleared = rows
        .iter()
        .map(|r| {
            let nv = r.first().map_or(0, RatFunc::nvars);
            let mut dens: Vec<&Poly> = Vec::new();
            for x in r {
                if !x.den().is_one() && !dens.contains(&x.den()) {
                    dens.push(x.den());
                }
            }
            scales.push(dens.iter().fold(Poly::one(nv), |acc, d| acc.mul(d)));
            r.iter()
                .map(|x| dens.iter().filter(|d| **d != x.den()).fold(x.num().clone(), |acc, d| acc.mul(d)))
                .collect()
        })
        .collect();
    (cleared, scales)
}

/// `(piv·x - f·y) / prev`, exact by the Bareiss identity.
fn bareiss_step(x: &Poly, y: &Poly, piv: &Poly, f: &Poly, prev: Option<&Poly>) -> Poly {
    let mut v = if x.is_zero() { x.clone() } else { x.mul(piv) };
    if !f.is_zero() && !y.is_zero() {
        v = v.sub(&f.mul(y));
    }
    match prev {
        Some(d) => v.div_exact(d).expect("Bareiss division is exact"),
        None => v,
    }
}

fn cheapest_nonzero(r: &[Poly]) -> Option<usize> {
    (0..r.len()).filter(|&k| !r[k].is_zero()).min_by_key(|&k| r[k].len())
}

/// Indices of rows, in order, that are independent of all earlier rows.
pub fn independent_rows(rows: &[Vec<RatFunc>]) -> Vec<usize> {
    // fraction-free elimination: stored row s holds (s+1)-minors, so each step divides exactly
    let mut basis: Vec<(usize, Vec<Poly>)> = Vec::new();
    let mut out = Vec::new();
    for (k, mut r) in cleared_rows(rows).0.into_iter().enumerate() {
        for s in 0..basis.len() {
            let (p, b) = &basis[s];
            let prev = s.checked_sub(1).map(|t| &basis[t].1[basis[t].0]);
            let f = r[*p].clone();
            r = r.iter().zip(b).map(|(x, y)| bareiss_step(x, y, &b[*p], &f, prev)).collect();
        }
        if let Some(p) = cheapest_nonzero(&r) {
            basis.push((p, r));
            out.push(k);
        }
    }
    out
}

/// Inverse of a square matrix; `Degenerate` when singular.
pub fn inverse(m: &[Vec<RatFunc>]) -> Result<Vec<Vec<RatFunc>>> {
    let n = m.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nv = m[0][0].nvars();
    // fraction-free Gauss-Jordan on [A | I] ends at [det·I | det·A⁻¹]
    let (cleared, scales) = cleared_rows(m);
    let mut a: Vec<Vec<Poly>> = cleared
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.extend((0..n).map(|j| if i == j { Poly::one(nv) } else { Poly::zero(nv) }));
            r
        })
        .collect();
    let mut prev: Option<Poly> = None;
    for col in 0..n {
        let piv = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .min_by_key(|&r| a[r][col].len())
            .ok_or_else(|| Error::Degenerate("singular matrix".into()))?;
        a.swap(col, piv);
        let pivot_row = a[col].clone();
        let pv = pivot_row[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col {
                continue;
            }
            let f = row[col].clone();
            *row = row.iter().zip(&pivot_row).map(|(x, y)| bareiss_step(x, y, &pv, &f, prev.as_ref())).collect();
        }
        prev = Some(pv);
    }
    let det = prev.expect("nonempty matrix");
    // A = diag(scales)⁻¹·A', so A⁻¹ = A'⁻¹·diag(scales)
    a.into_iter()
        .map(|r| (0..n).map(|j| RatFunc::new(r[n + j].mul(&scales[j]), det.clone())).collect())
        .collect()
}

/// Basis of `{x : M x = 0}` for an `r × ncols` matrix.
pub fn nullspace(m: &[Vec<RatFunc>], ncols: usize, nvars: usize) -> Vec<Vec<RatFunc>> {
    let mut e = Echelon::new();
    for row in m {
        e.insert(row);
    }
    // reduced form: eliminate each pivot from the other rows
    let mut rows = e.rows;
    for k in 0..rows.len() {
        let (p, pivot_row) = rows[k].clone();
        for (j, (_, row)) in rows.iter_mut().enumerate() {
            if j == k || row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (x, b) in row.iter_mut().zip(&pivot_row) {
                if !b.is_zero() {
                    *x = x.sub(&f.mul(b));
                }
            }
        }
    }
    let pivots: Vec<usize> = rows.iter().map(|r| r.0).collect();
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![RatFunc::zero(nvars); ncols];
        v[free] = RatFunc::one(nvars);
        for (p, row) in &rows {
            v[*p] = row[free].neg();
        }
        out.push(v);
    }
    out
}

/// A random point in the probe field, deterministic in `seed`.
pub fn probe_point(nvars: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..nvars).map(|_| 2 + rng.next_u64() % (PROBE_PRIME - 3)).collect()
}

/// Value of `x` at `point` modulo [`PROBE_PRIME`]; `None` at a pole.
pub fn eval_probe(x: &RatFunc, point: &[u64]) -> Option<u64> {
    let n = x.num().eval_mod(point, PROBE_PRIME)?;
    let d = x.den().eval_mod(point, PROBE_PRIME)?;
    Some(mulmod(n, inv_mod(d, PROBE_PRIME)?, PROBE_PRIME))
}

/// Rows independent of all earlier rows after evaluation at `point`. Independence at a point
/// implies independence over the field, so every returned index is certified; rows missing
/// from the result may still be independent at an unlucky point.
pub fn independent_rows_probe(rows: &[Vec<RatFunc>], point: &[u64]) -> Option<Vec<usize>> {
    let p = PROBE_PRIME;
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut out = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        let mut r: Vec<u64> = row.iter().map(|x| eval_probe(x, point)).collect::<Option<_>>()?;
        for (piv, b) in &basis {
            let f = r[*piv];
            if f == 0 {
                continue;
            }
            for (x, y) in r.iter_mut().zip(b) {
                *x = (*x + p - mulmod(f, *y, p)) % p;
            }
        }
        if let Some(piv) = r.iter().position(|&x| x != 0) {
            let inv = inv_mod(r[piv], p)?;
            for x in r.iter_mut() {
                *x = mulmod(*x, inv, p);
            }
            basis.push((piv, r));
            out.push(k);
        }
    }
    Some(out)
}
