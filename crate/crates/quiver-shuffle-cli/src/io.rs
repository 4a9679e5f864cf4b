//! JSON formats for quivers and elements.

use std::collections::BTreeMap;
use std::fs;

use quiver_shuffle::field::RatFunc;
use quiver_shuffle::laurent::{DegreeVector, GradedLaurent};
use quiver_shuffle::poly::Exp;
use quiver_shuffle::quiver::Quiver;
use quiver_shuffle::shuffle::ShuffleContext;
use quiver_shuffle::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    src: String,
    tgt: String,
    #[serde(default)]
    label: String,
}

#[derive(Serialize, Deserialize)]
struct QuiverJson {
    vertices: Vec<String>,
    #[serde(default)]
    edges: Vec<EdgeJson>,
}

#[derive(Deserialize)]
struct TermJson {
    exp: BTreeMap<String, Vec<i32>>,
    coeff: String,
}

#[derive(Deserialize)]
struct ElementJson {
    degree: BTreeMap<String, u32>,
    twist: String,
    terms: Vec<TermJson>,
}

pub fn read_text(path: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &str, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|source| CliError::Json { path: path.into(), source })
}

pub fn load_quiver(path: &str) -> CliResult<Quiver> {
    let q: QuiverJson = parse_json(path, &read_text(path)?)?;
    let edges: Vec<(String, String, String)> = q.edges.into_iter().map(|e| (e.src, e.tgt, e.label)).collect();
    Ok(Quiver::new(&q.vertices, &edges)?)
}

/// Canonical JSON of a quiver (edges sorted).
pub fn quiver_json(q: &Quiver) -> Value {
    let edges: Vec<Value> = q
        .edges()
        .iter()
        .map(|e| json!({"src": q.vertex_name(e.src), "tgt": q.vertex_name(e.tgt), "label": e.label}))
        .collect();
    json!({"vertices": q.vertices(), "edges": edges})
}

pub fn quiver_hash(q: &Quiver) -> String {
    let text = serde_json::to_string(&quiver_json(q)).expect("serializable");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses `1:2,2:0` (vertex name : count); unlisted vertices get zero.
pub fn parse_degree(q: &Quiver, text: &str) -> CliResult<DegreeVector> {
    let mut counts = vec![0u32; q.num_vertices()];
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (v, c) = part
            .rsplit_once(':')
            .ok_or_else(|| CliError::Usage(format!("degree entries look like vertex:count, found {part:?}")))?;
        let i = q.vertex_index(v.trim())?;
        counts[i] = c.trim().parse().map_err(|_| CliError::Usage(format!("bad count in {part:?}")))?;
    }
    Ok(DegreeVector::new(counts))
}

/// Parses a comma-separated integer tuple.
pub fn parse_tuple(text: &str) -> CliResult<Vec<i32>> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| CliError::Usage(format!("bad integer {p:?}"))))
        .collect()
}

pub fn load_element(ctx: &ShuffleContext, path: &str) -> CliResult<GradedLaurent> {
    let e: ElementJson = parse_json(path, &read_text(path)?)?;
    let q = ctx.quiver();
    if e.twist != ctx.twist().as_str() {
        return Err(Error::ContextMismatch(format!("element twist {:?} differs from {:?}", e.twist, ctx.twist().as_str())).into());
    }
    let mut counts = vec![0u32; q.num_vertices()];
    for (v, c) in &e.degree {
        counts[q.vertex_index(v)?] = *c;
    }
    let degree = DegreeVector::new(counts);
    let mut terms: Vec<(Exp, RatFunc)> = Vec::with_capacity(e.terms.len());
    for t in &e.terms {
        let mut exp = Exp::from_elem(0, degree.len());
        let mut seen = vec![false; q.num_vertices()];
        for (v, xs) in &t.exp {
            let i = q.vertex_index(v)?;
            if xs.len() != degree.count(i) {
                return Err(Error::Arity { expected: degree.count(i), found: xs.len() }.into());
            }
            seen[i] = true;
            for (a, &x) in xs.iter().enumerate() {
                exp[degree.index(i, a)] = x;
            }
        }
        if let Some(i) = (0..q.num_vertices()).find(|&i| !seen[i] && degree.count(i) > 0) {
            return Err(Error::Invalid(format!("term misses exponents for vertex {}", q.vertex_name(i))).into());
        }
        terms.push((exp, ctx.parse_coeff(&t.coeff)?));
    }
    Ok(GradedLaurent::from_terms(degree, ctx.twist(), ctx.params().clone(), &terms)?)
}

pub fn degree_json(q: &Quiver, d: &DegreeVector) -> Value {
    let m: BTreeMap<&str, u32> = (0..q.num_vertices()).map(|i| (q.vertex_name(i), d.counts()[i])).collect();
    json!(m)
}

/// Element JSON with terms in monomial order.
pub fn element_json(ctx: &ShuffleContext, r: &GradedLaurent) -> Value {
    let q = ctx.quiver();
    let d = r.degree();
    let terms: Vec<Value> = r
        .terms()
        .iter()
        .map(|(e, c)| {
            let exp: BTreeMap<&str, Vec<i32>> = (0..q.num_vertices())
                .filter(|&i| d.count(i) > 0)
                .map(|i| (q.vertex_name(i), (0..d.count(i)).map(|a| e[d.index(i, a)]).collect()))
                .collect();
            json!({"exp": exp, "coeff": ctx.params().fmt(c)})
        })
        .collect();
    json!({"degree": degree_json(q, d), "twist": ctx.twist().as_str(), "terms": terms})
}
