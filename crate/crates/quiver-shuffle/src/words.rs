//! Letters `i^(d)`, words, their order, non-increasing predicates and leading words.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::laurent::{DegreeVector, GradedLaurent};
use crate::poly::Exp;
use crate::quiver::{Quiver, Twist};

/// The letter `i^(d)`; `vertex` is the position of `i` in the vertex order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub vertex: usize,
    pub exp: i32,
}

impl Letter {
    pub fn new(vertex: usize, exp: i32) -> Self {
        Letter { vertex, exp }
    }
}

/// `i^(d) < j^(e)` iff `d > e`, or `d = e` and `i < j`.
pub fn letter_cmp(x: &Letter, y: &Letter) -> Ordering {
    y.exp.cmp(&x.exp).then(x.vertex.cmp(&y.vertex))
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        letter_cmp(self, other)
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A finite sequence of letters, ordered lexicographically with proper prefixes smaller.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

pub fn word_cmp(v: &Word, w: &Word) -> Ordering {
    v.cmp(w)
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    pub fn from_pairs(pairs: &[(usize, i32)]) -> Self {
        Word { letters: pairs.iter().map(|&(v, d)| Letter::new(v, d)).collect() }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn colors(&self) -> Vec<usize> {
        self.letters.iter().map(|l| l.vertex).collect()
    }

    pub fn exps(&self) -> Vec<i32> {
        self.letters.iter().map(|l| l.exp).collect()
    }

    pub fn degree(&self, nv: usize) -> DegreeVector {
        DegreeVector::of_colors(nv, &self.colors())
    }

    /// Sum of the exponents.
    pub fn total(&self) -> i32 {
        self.letters.iter().map(|l| l.exp).sum()
    }

    pub fn concat(&self, o: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&o.letters);
        Word { letters }
    }

    /// The reversed word with negated exponents.
    pub fn reverse_negate(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| Letter::new(l.vertex, -l.exp)).collect() }
    }

    /// Literal syntax `[1^2 1^-1 3^0]`.
    pub fn parse(quiver: &Quiver, s: &str) -> Result<Word> {
        let s = s.trim();
        let inner = s
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("word literal must be bracketed: {s:?}")))?;
        let mut letters = Vec::new();
        for tok in inner.split_whitespace() {
            let (v, d) = tok
                .rsplit_once('^')
                .ok_or_else(|| Error::Parse(format!("letter {tok:?} must look like vertex^exponent")))?;
            let exp: i32 = d.parse().map_err(|_| Error::Parse(format!("bad exponent in letter {tok:?}")))?;
            letters.push(Letter::new(quiver.vertex_index(v)?, exp));
        }
        Ok(Word { letters })
    }

    pub fn display(&self, quiver: &Quiver) -> String {
        let parts: Vec<String> =
            self.letters.iter().map(|l| format!("{}^{}", quiver.vertex_name(l.vertex), l.exp)).collect();
        format!("[{}]", parts.join(" "))
    }
}

/// `is_nonincreasing` for either twist.
pub fn is_nonincreasing(quiver: &Quiver, w: &Word, twist: Twist) -> bool {
    let l = w.letters();
    match twist {
        Twist::Plain => l.windows(2).all(|p| p[0] >= p[1]),
        Twist::Prime => {
            for b in 1..l.len() {
                let mut shift = 0;
                for a in (0..b).rev() {
                    shift += quiver.arrow_count(l[a].vertex, l[b].vertex, false);
                    let bound = l[b].exp + shift;
                    let ok = l[a].exp < bound || (l[a].exp == bound && l[a].vertex >= l[b].vertex);
                    if !ok {
                        return false;
                    }
                }
            }
            true
        }
    }
}

/// Exponent shift of position `a` in an arrangement of colors: `d_a - k_a`.
fn prime_shift(quiver: &Quiver, colors: &[usize], a: usize) -> i32 {
    let ia = colors[a];
    let before: i32 = colors[..a].iter().map(|&is| quiver.arrow_count(ia, is, true)).sum();
    let after: i32 = colors[a + 1..].iter().map(|&it| quiver.arrow_count(it, ia, true)).sum();
    after - before
}

/// The word attached to an arrangement of `(vertex, monomial exponent)` factors.
pub fn arrangement_word(quiver: &Quiver, factors: &[Letter], twist: Twist) -> Word {
    match twist {
        Twist::Plain => Word::new(factors.to_vec()),
        Twist::Prime => {
            let colors: Vec<usize> = factors.iter().map(|l| l.vertex).collect();
            Word::new(
                factors
                    .iter()
                    .enumerate()
                    .map(|(a, l)| Letter::new(l.vertex, l.exp + prime_shift(quiver, &colors, a)))
                    .collect(),
            )
        }
    }
}

/// Monomial factors `(vertex, exponent)` of a flat exponent vector.
pub fn monomial_factors(degree: &DegreeVector, exps: &[i32]) -> Vec<Letter> {
    degree.colors().into_iter().zip(exps).map(|(c, &k)| Letter::new(c, k)).collect()
}

/// Distinct permutations of a multiset in increasing order.
fn multiset_permutations(items: &[Letter]) -> Vec<Vec<Letter>> {
    let key = |l: &Letter| (l.vertex, l.exp);
    let mut cur = items.to_vec();
    cur.sort_by_key(key);
    let mut out = Vec::new();
    let k = cur.len();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..k).rev().find(|&i| key(&cur[i - 1]) < key(&cur[i])) else {
            break;
        };
        let j = (i..k).rev().find(|&j| key(&cur[j]) > key(&cur[i - 1])).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// `associated_words`: every arrangement of the monomial's factors (same-vertex variables
/// taken in slot order) together with its associated word.
pub fn associated_words(quiver: &Quiver, degree: &DegreeVector, exps: &[i32], twist: Twist) -> Vec<(Vec<Letter>, Word)> {
    multiset_permutations(&monomial_factors(degree, exps))
        .into_iter()
        .map(|arr| {
            let w = arrangement_word(quiver, &arr, twist);
            (arr, w)
        })
        .collect()
}

/// Leading word of a single monomial.
pub fn monomial_leading_word(quiver: &Quiver, degree: &DegreeVector, exps: &[i32], twist: Twist) -> Word {
    match twist {
        Twist::Plain => {
            let mut f = monomial_factors(degree, exps);
            f.sort_by(|a, b| b.cmp(a));
            Word::new(f)
        }
        Twist::Prime => associated_words(quiver, degree, exps, twist).into_iter().map(|(_, w)| w).max().unwrap_or_default(),
    }
}

/// `leading_word`: maximum over monomials of `r` and their associated words.
pub fn leading_word(quiver: &Quiver, r: &GradedLaurent) -> Result<Word> {
    if r.is_zero() {
        return Err(Error::ZeroInput);
    }
    Ok(r.monomials().iter().map(|e| monomial_leading_word(quiver, r.degree(), e, r.twist())).max().unwrap())
}

/// The monomial whose leading word is `w`, with the `a`-th letter placed in the next free slot
/// of its vertex.
pub fn canonical_monomial(quiver: &Quiver, w: &Word, twist: Twist) -> Exp {
    let nv = quiver.num_vertices();
    let degree = w.degree(nv);
    let colors = w.colors();
    let mut next: Vec<usize> = (0..nv).map(|i| degree.offset(i)).collect();
    let mut e = crate::poly::exp_zero(degree.len());
    for (a, l) in w.letters().iter().enumerate() {
        let k = match twist {
            Twist::Plain => l.exp,
            Twist::Prime => l.exp - prime_shift(quiver, &colors, a),
        };
        e[next[l.vertex]] = k;
        next[l.vertex] += 1;
    }
    e
}

/// `enumerate_nonincreasing`: all non-increasing words of the given degree with exponents in
/// `[lo, hi]`, sorted in descending order.
pub fn enumerate_nonincreasing(quiver: &Quiver, degree: &DegreeVector, total: i32, lo: i32, hi: i32, twist: Twist) -> Vec<Word> {
    let mut out = Vec::new();
    if lo > hi {
        return out;
    }
    let mut remaining: Vec<usize> = degree.counts().iter().map(|&c| c as usize).collect();
    let mut cur: Vec<Letter> = Vec::new();
    enum_rec(quiver, &mut remaining, degree.len(), total, lo, hi, twist, &mut cur, &mut out);
    out.sort_by(|a, b| b.cmp(a));
    out
}

#[allow(clippy::too_many_arguments)]
fn enum_rec(
    quiver: &Quiver,
    remaining: &mut [usize],
    left: usize,
    sum_left: i32,
    lo: i32,
    hi: i32,
    twist: Twist,
    cur: &mut Vec<Letter>,
    out: &mut Vec<Word>,
) {
    if left == 0 {
        if sum_left == 0 {
            out.push(Word::new(cur.clone()));
        }
        return;
    }
    for v in 0..remaining.len() {
        if remaining[v] == 0 {
            continue;
        }
        for d in lo..=hi {
            let rest = sum_left - d;
            let k = (left - 1) as i32;
            if rest < k * lo || rest > k * hi {
                continue;
            }
            cur.push(Letter::new(v, d));
            if is_nonincreasing_suffix(quiver, cur, twist) {
                remaining[v] -= 1;
                enum_rec(quiver, remaining, left - 1, rest, lo, hi, twist, cur, out);
                remaining[v] += 1;
            }
            cur.pop();
        }
    }
}

/// Checks the non-increasing conditions involving the last letter only.
fn is_nonincreasing_suffix(quiver: &Quiver, l: &[Letter], twist: Twist) -> bool {
    let b = l.len() - 1;
    if b == 0 {
        return true;
    }
    match twist {
        Twist::Plain => l[b - 1] >= l[b],
        Twist::Prime => {
            let mut shift = 0;
            for a in (0..b).rev() {
                shift += quiver.arrow_count(l[a].vertex, l[b].vertex, false);
                let bound = l[b].exp + shift;
                if !(l[a].exp < bound || (l[a].exp == bound && l[a].vertex >= l[b].vertex)) {
                    return false;
                }
            }
            true
        }
    }
}

/// Non-increasing words whose exponent sequence is exactly `exps` and whose colors realize
/// `degree`, sorted in descending order.
pub fn words_with_exponents(quiver: &Quiver, degree: &DegreeVector, exps: &[i32], twist: Twist) -> Vec<Word> {
    let mut out = Vec::new();
    let mut remaining: Vec<usize> = degree.counts().iter().map(|&c| c as usize).collect();
    if exps.len() != degree.len() {
        return out;
    }
    let mut cur = Vec::new();
    colors_rec(quiver, &mut remaining, exps, twist, &mut cur, &mut out);
    out.sort_by(|a, b| b.cmp(a));
    out
}

fn colors_rec(quiver: &Quiver, remaining: &mut [usize], exps: &[i32], twist: Twist, cur: &mut Vec<Letter>, out: &mut Vec<Word>) {
    let a = cur.len();
    if a == exps.len() {
        out.push(Word::new(cur.clone()));
        return;
    }
    for v in 0..remaining.len() {
        if remaining[v] == 0 {
            continue;
        }
        cur.push(Letter::new(v, exps[a]));
        if is_nonincreasing_suffix(quiver, cur, twist) {
            remaining[v] -= 1;
            colors_rec(quiver, remaining, exps, twist, cur, out);
            remaining[v] += 1;
        }
        cur.pop();
    }
}
