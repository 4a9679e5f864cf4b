//! The graphs `G` (non-decreasing tuples, `c ≥ -m`) and `G′` (`d_a ≤ d_{a+1} + m`, `c ≥ 0`).

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::laurent::permutations;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    G,
    GPrime,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::G => "G",
            Variant::GPrime => "Gprime",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    GToGPrime,
    GPrimeToG,
}

/// `σ` and the coefficients `c_{a,b}` (0-based `a < b` with `σ(a) > σ(b)`) of one edge:
/// `d′_a = d_{σ(a)} + Σ_{t>a} c_{a,t} - Σ_{s<a} c_{s,a}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeWitness {
    pub sigma: Vec<usize>,
    pub c: Vec<((usize, usize), i32)>,
}

impl EdgeWitness {
    /// The target obtained by applying the witness to `d`.
    pub fn apply(&self, d: &[i32]) -> Vec<i32> {
        let mut out: Vec<i32> = self.sigma.iter().map(|&s| d[s]).collect();
        for &((a, b), c) in &self.c {
            out[a] += c;
            out[b] -= c;
        }
        out
    }

    /// The witness of the reverse edge: `σ′ = σ^{-1}`, `c′_{a,b} = c_{σ^{-1}(b), σ^{-1}(a)}`.
    pub fn reverse(&self) -> EdgeWitness {
        let n = self.sigma.len();
        let mut inv = vec![0; n];
        for (a, &s) in self.sigma.iter().enumerate() {
            inv[s] = a;
        }
        let mut c: Vec<((usize, usize), i32)> =
            self.c.iter().map(|&((a, b), x)| ((self.sigma[b], self.sigma[a]), x)).collect();
        c.sort();
        EdgeWitness { sigma: inv, c }
    }
}

/// A connected component with vertices sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<Vec<i32>>,
    pub m: i32,
    pub variant: Variant,
    pub edge_count: usize,
}

impl Component {
    pub fn contains(&self, v: &[i32]) -> bool {
        self.vertices.binary_search_by(|x| x.as_slice().cmp(v)).is_ok()
    }
}

/// Whether `v` is a vertex of the variant.
pub fn is_vertex(v: &[i32], m: i32, variant: Variant) -> bool {
    !v.is_empty()
        && v.windows(2).all(|p| match variant {
            Variant::G => p[0] <= p[1],
            Variant::GPrime => p[0] <= p[1] + m,
        })
}

/// Inversions `(a, b)`, `a < b`, `σ(a) > σ(b)`, in lexicographic order.
pub fn inversions(sigma: &[usize]) -> Vec<(usize, usize)> {
    let n = sigma.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if sigma[a] > sigma[b] {
                out.push((a, b));
            }
        }
    }
    out
}

/// Decides whether `target = source∘σ + Σ_{inversions} c_{a,b} (e_a - e_b)` has a solution with
/// `c_{a,b} ≥ lower(a, b)`, returning one. Feasibility is the supply/demand condition for an
/// uncapacitated flow on the inversion arcs `a → b`, checked on all successor-closed sets.
pub fn edge_witness(source: &[i32], target: &[i32], sigma: &[usize], lower: impl Fn(usize, usize) -> i32) -> Option<EdgeWitness> {
    let n = sigma.len();
    let inv = inversions(sigma);
    let lows: Vec<i32> = inv.iter().map(|&(a, b)| lower(a, b)).collect();
    let mut supply: Vec<i64> = (0..n).map(|a| target[a] as i64 - source[sigma[a]] as i64).collect();
    for (&(a, b), &l) in inv.iter().zip(&lows) {
        supply[a] -= l as i64;
        supply[b] += l as i64;
    }
    if supply.iter().sum::<i64>() != 0 {
        return None;
    }
    let mut succ = vec![0u32; n];
    for &(a, b) in &inv {
        succ[a] |= 1 << b;
    }
    for x in 1u32..(1 << n) {
        let closed = (0..n).all(|a| x & (1 << a) == 0 || succ[a] & !x == 0);
        if closed {
            let s: i64 = (0..n).filter(|&a| x & (1 << a) != 0).map(|a| supply[a]).sum();
            if s > 0 {
                return None;
            }
        }
    }
    let flow = max_flow(n, &inv, &supply)?;
    let c = inv.iter().zip(&lows).zip(flow).map(|((&ab, &l), f)| (ab, l + f as i32)).collect();
    Some(EdgeWitness { sigma: sigma.to_vec(), c })
}

/// Edmonds-Karp on `source → a` (supply), `a → b` (arcs, unbounded), `b → sink` (demand).
/// Returns per-arc flows if all supply is routed.
fn max_flow(n: usize, arcs: &[(usize, usize)], supply: &[i64]) -> Option<Vec<i64>> {
    let (s, t) = (n, n + 1);
    let nn = n + 2;
    let total: i64 = supply.iter().filter(|&&x| x > 0).sum();
    let mut cap = vec![vec![0i64; nn]; nn];
    for &(a, b) in arcs {
        cap[a][b] = total + 1;
    }
    for (a, &x) in supply.iter().enumerate() {
        if x > 0 {
            cap[s][a] = x;
        } else if x < 0 {
            cap[a][t] = -x;
        }
    }
    let orig = cap.clone();
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; nn];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..nn {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            break;
        }
        let mut bottleneck = i64::MAX;
        let mut v = t;
        while v != s {
            bottleneck = bottleneck.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            cap[prev[v]][v] -= bottleneck;
            cap[v][prev[v]] += bottleneck;
            v = prev[v];
        }
        flow += bottleneck;
    }
    if flow != total {
        return None;
    }
    Some(arcs.iter().map(|&(a, b)| orig[a][b] - cap[a][b]).collect())
}

/// Tuples of length `n` in `[lo, hi]` with the given sum satisfying the variant's ordering.
fn candidates(n: usize, lo: i32, hi: i32, sum: i32, m: i32, variant: Variant) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    #[allow(clippy::too_many_arguments)]
    fn rec(n: usize, lo: i32, hi: i32, sum: i32, m: i32, variant: Variant, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        let left = (n - cur.len()) as i64;
        if left == 0 {
            if sum == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let start = match (variant, cur.last()) {
            (Variant::G, Some(&p)) => p,
            (Variant::GPrime, Some(&p)) => (p - m).max(lo),
            _ => lo,
        };
        for x in start..=hi {
            let rest = sum as i64 - x as i64;
            let rest_left = left - 1;
            let min_rest = if variant == Variant::G { rest_left * x as i64 } else { rest_left * lo as i64 };
            if rest < min_rest {
                break;
            }
            if rest > rest_left * hi as i64 {
                continue;
            }
            cur.push(x);
            rec(n, lo, hi, rest as i32, m, variant, cur, out);
            cur.pop();
        }
    }
    rec(n, lo, hi, sum, m, variant, &mut cur, &mut out);
    out
}

/// Neighbors in `G` found inside the box `[min v - b, max v + b]`.
fn neighbors_in_box(v: &[i32], m: i32, b: i32, variant: Variant) -> Vec<(Vec<i32>, EdgeWitness)> {
    let n = v.len();
    let lo = v.iter().min().unwrap() - b;
    let hi = v.iter().max().unwrap() + b;
    let sum: i32 = v.iter().sum();
    let bound = if variant == Variant::G { -m } else { 0 };
    let perms: Vec<Vec<usize>> = permutations(n).into_iter().filter(|p| p.iter().enumerate().any(|(a, &x)| a != x)).collect();
    let mut out = Vec::new();
    for target in candidates(n, lo, hi, sum, m, variant) {
        for sigma in &perms {
            if let Some(wit) = edge_witness(v, &target, sigma, |_, _| bound) {
                out.push((target.clone(), wit));
                break;
            }
        }
    }
    out
}

/// `neighbors`: every vertex joined to `v` by one edge, each with one witness.
pub fn neighbors(v: &[i32], m: i32, variant: Variant) -> Result<Vec<(Vec<i32>, EdgeWitness)>> {
    if !is_vertex(v, m, variant) {
        return Err(Error::Invalid("tuple is not a vertex of the graph".into()));
    }
    let n = v.len();
    if n == 1 {
        return Ok(Vec::new());
    }
    match variant {
        Variant::G => {
            // every neighbor lies within m(n-1) of the range of v; grow until nothing touches the box
            let mut b = m * (n as i32 - 1) + 1;
            loop {
                let out = neighbors_in_box(v, m, b, Variant::G);
                let lo = v.iter().min().unwrap() - b;
                let hi = v.iter().max().unwrap() + b;
                if out.iter().all(|(t, _)| t.iter().all(|&x| x > lo && x < hi)) {
                    return Ok(out);
                }
                b *= 2;
            }
        }
        Variant::GPrime => {
            let base = shift_iso(v, m, Direction::GPrimeToG);
            let mut out: Vec<(Vec<i32>, EdgeWitness)> = neighbors(&base, m, Variant::G)?
                .into_iter()
                .map(|(t, w)| {
                    let c = w.c.iter().map(|&(ab, x)| (ab, x + m)).collect();
                    (shift_iso(&t, m, Direction::GToGPrime), EdgeWitness { sigma: w.sigma, c })
                })
                .collect();
            out.sort_by(|a, b| a.0.cmp(&b.0));
            Ok(out)
        }
    }
}

/// Neighbors by exhaustive search in the box of half-width `b`, for either variant.
pub fn neighbors_brute_force(v: &[i32], m: i32, b: i32, variant: Variant) -> Vec<(Vec<i32>, EdgeWitness)> {
    if v.len() < 2 {
        return Vec::new();
    }
    neighbors_in_box(v, m, b, variant)
}

/// `component`: breadth-first search from `v`; fails once more than `cap` vertices are found.
pub fn component(v: &[i32], m: i32, variant: Variant, cap: usize) -> Result<Component> {
    if !is_vertex(v, m, variant) {
        return Err(Error::Invalid("tuple is not a vertex of the graph".into()));
    }
    let mut seen: BTreeSet<Vec<i32>> = BTreeSet::new();
    let mut edges: BTreeSet<(Vec<i32>, Vec<i32>)> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(v.to_vec());
    queue.push_back(v.to_vec());
    while let Some(u) = queue.pop_front() {
        for (t, _) in neighbors(&u, m, variant)? {
            if t != u {
                let key = if u < t { (u.clone(), t.clone()) } else { (t.clone(), u.clone()) };
                edges.insert(key);
            }
            if seen.insert(t.clone()) {
                if seen.len() > cap {
                    return Err(Error::CapExceeded { cap });
                }
                queue.push_back(t);
            }
        }
    }
    Ok(Component { vertices: seen.into_iter().collect(), m, variant, edge_count: edges.len() })
}

/// `shift_iso`: `d_a ↦ d_a + m(n - 2a + 1)/2` (1-based `a`) and its inverse. `m` must be even.
pub fn shift_iso(v: &[i32], m: i32, direction: Direction) -> Vec<i32> {
    let n = v.len() as i32;
    let sign = match direction {
        Direction::GToGPrime => 1,
        Direction::GPrimeToG => -1,
    };
    v.iter().enumerate().map(|(a, &d)| d + sign * m * (n - 2 * (a as i32 + 1) + 1) / 2).collect()
}

/// Groups tuples by component: maps each tuple to the smallest vertex of its component.
pub fn component_labels(tuples: &[Vec<i32>], m: i32, variant: Variant, cap: usize) -> Result<BTreeMap<Vec<i32>, Vec<i32>>> {
    let mut out = BTreeMap::new();
    for t in tuples {
        if out.contains_key(t) {
            continue;
        }
        let c = component(t, m, variant, cap)?;
        let label = c.vertices[0].clone();
        for x in &c.vertices {
            out.insert(x.clone(), label.clone());
        }
    }
    Ok(out)
}
