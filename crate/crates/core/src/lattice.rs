//! The twin order, model inclusion, and neighbouring submodels.
//!
//! The twin order compares quadruplets componentwise, so meet and join are
//! set intersection and union. Model inclusion is checked directly on the
//! quadruplets without materializing colour-class partitions.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeBlock, PairedVertexSet, Pdcg, Vertex};

/// Largest `p` accepted by [`enumerate_all`] (1,000,000 graphs).
pub const ENUMERATION_CAP: u32 = 6;

/// The seven ways of producing a neighbouring submodel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Merge two atomic vertex classes into a twin pair.
    #[serde(rename = "i")]
    I,
    /// Merge two atomic edge classes into a twin pair.
    #[serde(rename = "ii")]
    II,
    /// Drop the left edge of an atomic twin pair.
    #[serde(rename = "iii")]
    III,
    /// Drop the right edge of an atomic twin pair.
    #[serde(rename = "iv")]
    IV,
    /// Drop an edge whose twin is absent.
    #[serde(rename = "v")]
    V,
    /// Drop an edge joining a vertex to its twin.
    #[serde(rename = "vi")]
    VI,
    /// Drop an edge twin-pairing class.
    #[serde(rename = "vii")]
    VII,
}

impl Rule {
    pub fn layer(self) -> Layer {
        match self {
            Rule::III | Rule::IV => Layer::Lower,
            _ => Layer::Upper,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::I => "i",
            Rule::II => "ii",
            Rule::III => "iii",
            Rule::IV => "iv",
            Rule::V => "v",
            Rule::VI => "vi",
            Rule::VII => "vii",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Upper,
    Lower,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::Upper => "upper",
            Layer::Lower => "lower",
        })
    }
}

/// The vertex or edge a rule consumed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Vertex(Vertex),
    Edge(Edge),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Vertex(v) => write!(f, "{v}"),
            Provenance::Edge(e) => write!(f, "{e}"),
        }
    }
}

/// A rule together with what it consumed; applying it to a parent yields
/// one neighbouring submodel.
///
/// Provenance conventions: (i) the left vertex; (ii)–(iv) and (vii) the left
/// representative of the twin pair; (v) the removed edge; (vi) the removed
/// edge `(i, τ(i))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Move {
    pub rule: Rule,
    pub provenance: Provenance,
}

impl Move {
    pub fn layer(&self) -> Layer {
        self.rule.layer()
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.rule, self.provenance)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighbourRecord {
    pub graph: Pdcg,
    pub rule: Rule,
    pub layer: Layer,
    pub provenance: Provenance,
}

impl NeighbourRecord {
    pub fn mv(&self) -> Move {
        Move { rule: self.rule, provenance: self.provenance }
    }
}

fn same_vset(a: &Pdcg, b: &Pdcg) -> Result<PairedVertexSet> {
    if a.vset() != b.vset() {
        return Err(Error::VertexSetMismatch(a.p(), b.p()));
    }
    Ok(a.vset())
}

/// `h ⪯_t g`: componentwise inclusion of `(E, LL, EE)`.
pub fn twin_leq(h: &Pdcg, g: &Pdcg) -> Result<bool> {
    same_vset(h, g)?;
    Ok(h.edges().is_subset(g.edges())
        && h.atomic_vertices().is_subset(g.atomic_vertices())
        && h.atomic_edges().is_subset(g.atomic_edges()))
}

/// Rank in the twin lattice, `|E| + |LL| + |EE|`.
pub fn twin_rank(g: &Pdcg) -> usize {
    g.edges().len() + g.atomic_vertices().len() + g.atomic_edges().len()
}

/// `h ≺·_t g`. The twin lattice is graded by [`twin_rank`].
pub fn twin_covers(h: &Pdcg, g: &Pdcg) -> Result<bool> {
    Ok(twin_leq(h, g)? && twin_rank(h) + 1 == twin_rank(g))
}

pub fn twin_meet(g: &Pdcg, h: &Pdcg) -> Result<Pdcg> {
    let vset = same_vset(g, h)?;
    Ok(Pdcg::from_parts(
        vset,
        g.edges().intersection(h.edges()).copied().collect(),
        g.atomic_vertices().intersection(h.atomic_vertices()).copied().collect(),
        g.atomic_edges().intersection(h.atomic_edges()).copied().collect(),
    ))
}

pub fn twin_join(g: &Pdcg, h: &Pdcg) -> Result<Pdcg> {
    let vset = same_vset(g, h)?;
    Ok(Pdcg::from_parts(
        vset,
        g.edges().union(h.edges()).copied().collect(),
        g.atomic_vertices().union(h.atomic_vertices()).copied().collect(),
        g.atomic_edges().union(h.atomic_edges()).copied().collect(),
    ))
}

/// `h ⪯_s g`: the model of `h` is a submodel of the model of `g`.
///
/// Holds iff `E_h ⊆ E_g`, `LL_h ⊆ LL_g`, and every edge twin-pairing class of
/// `g` is either absent from `h` or present in `h` as the same pair.
pub fn submodel_leq(h: &Pdcg, g: &Pdcg) -> Result<bool> {
    let vset = same_vset(h, g)?;
    if !h.edges().is_subset(g.edges()) || !h.atomic_vertices().is_subset(g.atomic_vertices()) {
        return Ok(false);
    }
    for e in g.paired_edges() {
        let t = vset.twin_edge(e);
        let (in_e, in_t) = (h.has_edge(e), h.has_edge(t));
        let ok = match (in_e, in_t) {
            (false, false) => true,
            (true, true) => !h.atomic_edges().contains(&e),
            _ => false,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Applies a move to `g`, failing if the rule does not apply there.
pub fn apply_move(g: &Pdcg, mv: Move) -> Result<Pdcg> {
    let vset = g.vset();
    let bad = || Error::InvalidArgument(format!("move {mv} does not apply to {g}"));
    let mut h = g.clone();
    {
        let (edges, ll, ee) = h.parts_mut();
        match (mv.rule, mv.provenance) {
            (Rule::I, Provenance::Vertex(v)) => {
                if !ll.remove(&v) {
                    return Err(bad());
                }
            }
            (Rule::II, Provenance::Edge(e)) => {
                if !ee.remove(&e) {
                    return Err(bad());
                }
            }
            (Rule::III, Provenance::Edge(e)) => {
                if !ee.remove(&e) {
                    return Err(bad());
                }
                edges.remove(&e);
            }
            (Rule::IV, Provenance::Edge(e)) => {
                if !ee.remove(&e) {
                    return Err(bad());
                }
                edges.remove(&vset.twin_edge(e));
            }
            (Rule::V, Provenance::Edge(e)) => {
                let t = vset.twin_edge(e);
                if t == e || edges.contains(&t) || !edges.remove(&e) {
                    return Err(bad());
                }
            }
            (Rule::VI, Provenance::Edge(e)) => {
                if vset.block(e) != EdgeBlock::Twin || !edges.remove(&e) {
                    return Err(bad());
                }
            }
            (Rule::VII, Provenance::Edge(e)) => {
                if !g.paired_edges().contains(&e) {
                    return Err(bad());
                }
                edges.remove(&e);
                edges.remove(&vset.twin_edge(e));
            }
            _ => return Err(bad()),
        }
    }
    debug_assert!(crate::graph::validate(&h.to_quadruplet()).is_ok());
    Ok(h)
}

/// All applicable moves at `g`, in rule order and then provenance order.
pub fn neighbour_moves(g: &Pdcg) -> Vec<Move> {
    let vset = g.vset();
    let mut out = Vec::new();
    let mv = |rule, provenance| Move { rule, provenance };
    for &v in g.atomic_vertices() {
        out.push(mv(Rule::I, Provenance::Vertex(v)));
    }
    for rule in [Rule::II, Rule::III, Rule::IV] {
        for &e in g.atomic_edges() {
            out.push(mv(rule, Provenance::Edge(e)));
        }
    }
    for &e in g.edges() {
        let t = vset.twin_edge(e);
        if t != e && !g.has_edge(t) {
            out.push(mv(Rule::V, Provenance::Edge(e)));
        }
    }
    for &e in g.edges() {
        if vset.block(e) == EdgeBlock::Twin {
            out.push(mv(Rule::VI, Provenance::Edge(e)));
        }
    }
    for e in g.paired_edges() {
        out.push(mv(Rule::VII, Provenance::Edge(e)));
    }
    out
}

/// Every neighbouring submodel of `g` (the graphs covered by `g` under
/// model inclusion), tagged with rule, layer and provenance.
pub fn neighbour_submodels(g: &Pdcg) -> Vec<NeighbourRecord> {
    let out: Vec<NeighbourRecord> = neighbour_moves(g)
        .into_iter()
        .map(|mv| NeighbourRecord {
            graph: apply_move(g, mv).expect("enumerated move applies"),
            rule: mv.rule,
            layer: mv.layer(),
            provenance: mv.provenance,
        })
        .collect();
    debug_assert!({
        let distinct: BTreeSet<&Pdcg> = out.iter().map(|r| &r.graph).collect();
        distinct.len() == out.len()
    });
    out
}

/// Recovers which move takes `g` to `h`, if `h` is a neighbouring submodel.
pub fn identify_move(h: &Pdcg, g: &Pdcg) -> Option<Move> {
    if h.vset() != g.vset() || !h.edges().is_subset(g.edges()) {
        return None;
    }
    let vset = g.vset();
    let removed: Vec<Edge> = g.edges().difference(h.edges()).copied().collect();
    let lost_ll: Vec<Vertex> = g.atomic_vertices().difference(h.atomic_vertices()).copied().collect();
    let lost_ee: Vec<Edge> = g.atomic_edges().difference(h.atomic_edges()).copied().collect();
    let candidate = match (removed.as_slice(), lost_ll.as_slice(), lost_ee.as_slice()) {
        ([], [v], []) => Move { rule: Rule::I, provenance: Provenance::Vertex(*v) },
        ([], [], [e]) => Move { rule: Rule::II, provenance: Provenance::Edge(*e) },
        ([x], [], [e]) if x == e => Move { rule: Rule::III, provenance: Provenance::Edge(*e) },
        ([x], [], [e]) if *x == vset.twin_edge(*e) => {
            Move { rule: Rule::IV, provenance: Provenance::Edge(*e) }
        }
        ([x], [], []) if vset.block(*x) == EdgeBlock::Twin => {
            Move { rule: Rule::VI, provenance: Provenance::Edge(*x) }
        }
        ([x], [], []) => Move { rule: Rule::V, provenance: Provenance::Edge(*x) },
        ([a, b], [], []) if vset.twin_edge(*a) == *b => {
            Move { rule: Rule::VII, provenance: Provenance::Edge(vset.representative(*a)) }
        }
        _ => return None,
    };
    match apply_move(g, candidate) {
        Ok(x) if x == *h => Some(candidate),
        _ => None,
    }
}

/// Twin-order relation between two graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TwinRelation {
    Equal,
    /// first ≺_t second
    Below,
    /// first ≻_t second
    Above,
    Incomparable,
}

pub fn twin_relation(a: &Pdcg, b: &Pdcg) -> Result<TwinRelation> {
    Ok(match (twin_leq(a, b)?, twin_leq(b, a)?) {
        (true, true) => TwinRelation::Equal,
        (true, false) => TwinRelation::Below,
        (false, true) => TwinRelation::Above,
        (false, false) => TwinRelation::Incomparable,
    })
}

/// One entry of [`classify_pairs`]: indices into the record slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairRelation {
    pub first: usize,
    pub second: usize,
    pub relation: TwinRelation,
    /// Set when the smaller graph is twin-covered by the larger.
    pub covered: bool,
}

/// Twin-order relation for every unordered pair of neighbour records.
pub fn classify_pairs(records: &[NeighbourRecord]) -> Vec<PairRelation> {
    let mut out = Vec::new();
    for i in 0..records.len() {
        for j in i + 1..records.len() {
            let (a, b) = (&records[i].graph, &records[j].graph);
            let relation = twin_relation(a, b).expect("records share a parent");
            let covered = match relation {
                TwinRelation::Below => twin_covers(a, b).unwrap_or(false),
                TwinRelation::Above => twin_covers(b, a).unwrap_or(false),
                _ => false,
            };
            out.push(PairRelation { first: i, second: j, relation, covered });
        }
    }
    out
}

/// Model-inclusion meet of two neighbouring submodels of `parent`, computed
/// with twin-lattice operations only.
pub fn meet_for_search(h1: &Pdcg, h2: &Pdcg, parent: &Pdcg) -> Result<Pdcg> {
    let m1 = identify_move(h1, parent).ok_or_else(|| {
        Error::InvalidArgument(format!("{h1} is not a neighbouring submodel of {parent}"))
    })?;
    let m2 = identify_move(h2, parent).ok_or_else(|| {
        Error::InvalidArgument(format!("{h2} is not a neighbouring submodel of {parent}"))
    })?;
    match twin_relation(h1, h2)? {
        TwinRelation::Equal => Ok(h1.clone()),
        TwinRelation::Incomparable => twin_meet(h1, h2),
        TwinRelation::Below | TwinRelation::Above => {
            // only a rule (iii)/(iv) graph sits below the rule (ii) graph of the same edge
            let lower = if m1.layer() == Layer::Lower { m1 } else { m2 };
            let Provenance::Edge(e) = lower.provenance else {
                unreachable!("lower-layer moves consume edges")
            };
            let left = apply_move(parent, Move { rule: Rule::III, provenance: Provenance::Edge(e) })?;
            let right = apply_move(parent, Move { rule: Rule::IV, provenance: Provenance::Edge(e) })?;
            twin_meet(&left, &right)
        }
    }
}

/// Number of pdCGs on `p` vertices:
/// `2^{p/2} Σ_i C(m, i) 2^{C(p,2) - 2i}` with `m = p(p-2)/4`.
pub fn count_models(p: u32) -> Result<BigUint> {
    if p == 0 || !p.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("p must be even, got {p}")));
    }
    let p = p as u64;
    let m = p * (p - 2) / 4;
    let pairs = p * (p - 1) / 2;
    let mut sum = BigUint::from(0u32);
    let mut binom = BigUint::from(1u32);
    for i in 0..=m {
        sum += &binom * (BigUint::from(1u32) << (pairs - 2 * i));
        // C(m, i+1) = C(m, i) (m - i) / (i + 1)
        binom = binom * BigUint::from(m - i) / BigUint::from(i + 1);
    }
    let total = sum << (p / 2);
    debug_assert_eq!(total, {
        // closed form 2^{p/2 + C(p,2) - 2m} 5^m
        BigUint::from(5u32).pow(m as u32) << (p / 2 + pairs - 2 * m)
    });
    Ok(total)
}

/// Every compatible quadruplet on `p <= ENUMERATION_CAP` vertices, each once.
pub fn enumerate_all(p: u32) -> Result<impl Iterator<Item = Pdcg>> {
    let vset = PairedVertexSet::new(p)?;
    if p > ENUMERATION_CAP {
        return Err(Error::InvalidArgument(format!(
            "refusing to enumerate p={p}; the cap is {ENUMERATION_CAP}"
        )));
    }
    let all: Vec<Edge> = vset.all_edges().collect();
    let left: Vec<Vertex> = vset.left().collect();
    let n_edge_sets = 1u64 << all.len();
    let n_ll = 1u64 << left.len();
    Ok((0..n_edge_sets).flat_map(move |emask| {
        let edges: BTreeSet<Edge> =
            all.iter().enumerate().filter(|(k, _)| emask >> k & 1 == 1).map(|(_, e)| *e).collect();
        let probe = Pdcg::from_parts(vset, edges.clone(), BTreeSet::new(), BTreeSet::new());
        let twinned: Vec<Edge> = probe.twinned_edges().into_iter().collect();
        let left = left.clone();
        (0..n_ll).flat_map(move |lmask| {
            let ll: BTreeSet<Vertex> =
                left.iter().enumerate().filter(|(k, _)| lmask >> k & 1 == 1).map(|(_, v)| *v).collect();
            let edges = edges.clone();
            let twinned = twinned.clone();
            (0..1u64 << twinned.len()).map(move |xmask| {
                let ee: BTreeSet<Edge> = twinned
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| xmask >> k & 1 == 1)
                    .map(|(_, e)| *e)
                    .collect();
                Pdcg::from_parts(vset, edges.clone(), ll.clone(), ee)
            })
        })
    }))
}

/// Two-row DOT fragment of the twin-lattice Hasse diagram around `parent`:
/// the parent on top, upper-layer neighbours in the middle row, lower-layer
/// neighbours at the bottom, with twin covers drawn as edges.
pub fn hasse_fragment_dot(parent: &Pdcg, records: &[NeighbourRecord]) -> String {
    let mut s = String::from("digraph hasse {\n  rankdir=TB;\n  edge [dir=none];\n");
    s.push_str(&format!("  parent [shape=box, label=\"{}\"];\n", escape(&parent.to_string())));
    for layer in [Layer::Upper, Layer::Lower] {
        s.push_str("  { rank=same;");
        for (k, r) in records.iter().enumerate() {
            if r.layer == layer {
                s.push_str(&format!(" n{k};"));
            }
        }
        s.push_str(" }\n");
    }
    for (k, r) in records.iter().enumerate() {
        s.push_str(&format!(
            "  n{k} [shape=box, label=\"{} {}\\n{}\"];\n",
            r.rule,
            r.provenance,
            escape(&r.graph.to_string())
        ));
    }
    for (k, r) in records.iter().enumerate() {
        if r.layer == Layer::Upper {
            s.push_str(&format!("  parent -> n{k};\n"));
        }
    }
    for pr in classify_pairs(records) {
        if !pr.covered {
            continue;
        }
        let (lo, hi) = match pr.relation {
            TwinRelation::Below => (pr.first, pr.second),
            _ => (pr.second, pr.first),
        };
        s.push_str(&format!("  n{hi} -> n{lo};\n"));
    }
    s.push_str("}\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('"', "\\\"")
}
