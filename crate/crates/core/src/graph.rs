//! Paired vertex sets, the twin function, and coloured graphs for paired data.
//!
//! Vertices are numbered `1..=p` with the left group `L = {1..p/2}` and the
//! right group `R = {p/2+1..p}`; the twin of `i <= p/2` is `i + p/2`. Every
//! coloured graph is stored in quadruplet form `(V, E, LL, EE)`:
//!
//! * `E` is the uncoloured edge set,
//! * `LL ⊆ L` lists the left vertices whose colour class is atomic,
//! * `EE ⊆ E_L ∩ τ(E_R)` lists the left representatives of twin edge pairs
//!   whose two edges are both atomic.
//!
//! Everything else (vertex pairs `{i, τ(i)}` with `i ∈ L \ LL`, edge pairs
//! `{e, τ(e)}` with `e ∈ (E_L ∩ τ(E_R)) \ EE`) is a twin-pairing class.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based vertex label.
pub type Vertex = u32;

/// Largest supported number of variables. Edge sets are `O(p^2)`.
pub const MAX_VERTICES: u32 = 128;

/// An unordered vertex pair, stored with its endpoints sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[Vertex; 2]", into = "[Vertex; 2]")]
pub struct Edge(Vertex, Vertex);

impl Edge {
    /// Builds the edge `{a, b}`; panics on a loop.
    pub fn new(a: Vertex, b: Vertex) -> Edge {
        Edge::try_new(a, b).expect("edge endpoints must differ")
    }

    pub fn try_new(a: Vertex, b: Vertex) -> Result<Edge> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Edge(a, b)),
            std::cmp::Ordering::Greater => Ok(Edge(b, a)),
            std::cmp::Ordering::Equal => {
                Err(Error::InvalidArgument(format!("({a},{a}) is a loop, not an edge")))
            }
        }
    }

    pub fn lo(self) -> Vertex {
        self.0
    }

    pub fn hi(self) -> Vertex {
        self.1
    }
}

impl TryFrom<[Vertex; 2]> for Edge {
    type Error = Error;
    fn try_from(v: [Vertex; 2]) -> Result<Edge> {
        Edge::try_new(v[0], v[1])
    }
}

impl From<Edge> for [Vertex; 2] {
    fn from(e: Edge) -> [Vertex; 2] {
        [e.0, e.1]
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

/// Which block of the edge-set partition an edge falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeBlock {
    /// `i < τ(j)`
    Left,
    /// `i > τ(j)`
    Right,
    /// `i = τ(j)`: the edge joins a vertex to its twin.
    Twin,
}

/// The vertex set `{1..p}` with its canonical twin function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairedVertexSet {
    p: u32,
}

impl PairedVertexSet {
    pub fn new(p: u32) -> Result<Self> {
        if p == 0 || !p.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("p must be even and positive, got {p}")));
        }
        if p > MAX_VERTICES {
            return Err(Error::InvalidArgument(format!(
                "p={p} exceeds the supported maximum of {MAX_VERTICES}"
            )));
        }
        Ok(PairedVertexSet { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `|L| = p/2`.
    pub fn half(&self) -> u32 {
        self.p / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        1..=self.p
    }

    pub fn left(&self) -> impl Iterator<Item = Vertex> {
        1..=self.half()
    }

    pub fn right(&self) -> impl Iterator<Item = Vertex> {
        self.half() + 1..=self.p
    }

    pub fn contains(&self, v: Vertex) -> bool {
        (1..=self.p).contains(&v)
    }

    pub fn is_left(&self, v: Vertex) -> bool {
        (1..=self.half()).contains(&v)
    }

    /// Twin of an in-range vertex.
    pub fn twin(&self, v: Vertex) -> Vertex {
        debug_assert!(self.contains(v));
        if v <= self.half() {
            v + self.half()
        } else {
            v - self.half()
        }
    }

    pub fn try_twin(&self, v: Vertex) -> Result<Vertex> {
        if !self.contains(v) {
            return Err(Error::InvalidArgument(format!("vertex {v} outside 1..={}", self.p)));
        }
        Ok(self.twin(v))
    }

    /// Twin of an edge, renormalized so the smaller endpoint comes first.
    pub fn twin_edge(&self, e: Edge) -> Edge {
        Edge::new(self.twin(e.0), self.twin(e.1))
    }

    pub fn try_twin_edge(&self, e: Edge) -> Result<Edge> {
        self.check_edge(e)?;
        Ok(self.twin_edge(e))
    }

    pub fn twin_set(&self, vs: &BTreeSet<Vertex>) -> Result<BTreeSet<Vertex>> {
        vs.iter().map(|&v| self.try_twin(v)).collect()
    }

    pub fn twin_edge_set(&self, es: &BTreeSet<Edge>) -> Result<BTreeSet<Edge>> {
        es.iter().map(|&e| self.try_twin_edge(e)).collect()
    }

    pub fn check_edge(&self, e: Edge) -> Result<()> {
        if self.contains(e.0) && self.contains(e.1) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("edge {e} outside 1..={}", self.p)))
        }
    }

    pub fn block(&self, e: Edge) -> EdgeBlock {
        let t = self.twin(e.1);
        match e.0.cmp(&t) {
            std::cmp::Ordering::Less => EdgeBlock::Left,
            std::cmp::Ordering::Greater => EdgeBlock::Right,
            std::cmp::Ordering::Equal => EdgeBlock::Twin,
        }
    }

    /// The `F_L` member of an edge's twin class (`F_T` edges map to themselves).
    pub fn representative(&self, e: Edge) -> Edge {
        match self.block(e) {
            EdgeBlock::Right => self.twin_edge(e),
            _ => e,
        }
    }

    /// The edge `(i, τ(i))` for any vertex.
    pub fn twin_link(&self, v: Vertex) -> Edge {
        Edge::new(v, self.twin(v))
    }

    /// Every pair `(i, j)` with `i < j`, in lexicographic order.
    pub fn all_edges(&self) -> impl Iterator<Item = Edge> {
        let p = self.p;
        (1..=p).flat_map(move |i| (i + 1..=p).map(move |j| Edge(i, j)))
    }

    /// `|F_L| = p(p-2)/4`.
    pub fn left_block_size(&self) -> usize {
        (self.p as usize) * (self.p as usize - 2) / 4
    }

    pub fn partition(&self) -> EdgeSetPartition {
        let mut part = EdgeSetPartition::default();
        for e in self.all_edges() {
            part.f_v.insert(e);
            match self.block(e) {
                EdgeBlock::Left => part.f_l.insert(e),
                EdgeBlock::Right => part.f_r.insert(e),
                EdgeBlock::Twin => part.f_t.insert(e),
            };
        }
        part
    }
}

/// The partition `F_V = F_L ∪ F_R ∪ F_T` of the complete edge set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeSetPartition {
    pub f_v: BTreeSet<Edge>,
    pub f_l: BTreeSet<Edge>,
    pub f_r: BTreeSet<Edge>,
    pub f_t: BTreeSet<Edge>,
}

/// A single failed compatibility condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    BadVertexCount(u32),
    VertexOutOfRange(Vertex),
    EdgeOutOfRange(Edge),
    /// A vertex listed in `LL` is not in `L`.
    AtomicVertexNotLeft(Vertex),
    /// An edge listed in `EE` is not in `E_L ∩ τ(E_R)`.
    AtomicEdgeNotTwinned(Edge),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadVertexCount(p) => write!(f, "p={p} is not a positive even number"),
            Violation::VertexOutOfRange(v) => write!(f, "vertex {v} out of range"),
            Violation::EdgeOutOfRange(e) => write!(f, "edge {e} out of range"),
            Violation::AtomicVertexNotLeft(v) => write!(f, "𝕃 ⊄ L: vertex {v} is not in L"),
            Violation::AtomicEdgeNotTwinned(e) => write!(f, "{e} ∉ E_L∩τ(E_R)"),
        }
    }
}

/// Raw quadruplet as read from a model file; not necessarily compatible.
///
/// This is also the on-disk model format:
/// `{"p": int, "edges": [[i,j],...], "LL": [i,...], "EE": [[i,j],...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadruplet {
    pub p: u32,
    #[serde(default)]
    pub edges: Vec<Edge>,
    #[serde(rename = "LL", default)]
    pub ll: Vec<Vertex>,
    #[serde(rename = "EE", default)]
    pub ee: Vec<Edge>,
}

impl Quadruplet {
    pub fn from_json(text: &str) -> Result<Quadruplet> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Lists every compatibility condition the quadruplet violates.
pub fn validate(q: &Quadruplet) -> std::result::Result<(), Vec<Violation>> {
    let vset = match PairedVertexSet::new(q.p) {
        Ok(v) => v,
        Err(_) => return Err(vec![Violation::BadVertexCount(q.p)]),
    };
    let mut out = Vec::new();
    let edges: BTreeSet<Edge> = q.edges.iter().copied().collect();
    for e in &edges {
        if vset.check_edge(*e).is_err() {
            out.push(Violation::EdgeOutOfRange(*e));
        }
    }
    for &v in &q.ll {
        if !vset.contains(v) {
            out.push(Violation::VertexOutOfRange(v));
        } else if !vset.is_left(v) {
            out.push(Violation::AtomicVertexNotLeft(v));
        }
    }
    for &e in &q.ee {
        if vset.check_edge(e).is_err() {
            out.push(Violation::EdgeOutOfRange(e));
            continue;
        }
        let ok = vset.block(e) == EdgeBlock::Left
            && edges.contains(&e)
            && edges.contains(&vset.twin_edge(e));
        if !ok {
            out.push(Violation::AtomicEdgeNotTwinned(e));
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// A coloured graph for paired data in quadruplet form. Always compatible.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Quadruplet", try_from = "Quadruplet")]
pub struct Pdcg {
    vset: PairedVertexSet,
    edges: BTreeSet<Edge>,
    ll: BTreeSet<Vertex>,
    ee: BTreeSet<Edge>,
}

impl Pdcg {
    pub fn new(
        vset: PairedVertexSet,
        edges: BTreeSet<Edge>,
        ll: BTreeSet<Vertex>,
        ee: BTreeSet<Edge>,
    ) -> Result<Pdcg> {
        let q = Quadruplet {
            p: vset.p(),
            edges: edges.iter().copied().collect(),
            ll: ll.iter().copied().collect(),
            ee: ee.iter().copied().collect(),
        };
        validate(&q).map_err(Error::Incompatible)?;
        Ok(Pdcg { vset, edges, ll, ee })
    }

    /// Skips the compatibility check; callers must guarantee it.
    pub(crate) fn from_parts(
        vset: PairedVertexSet,
        edges: BTreeSet<Edge>,
        ll: BTreeSet<Vertex>,
        ee: BTreeSet<Edge>,
    ) -> Pdcg {
        let g = Pdcg { vset, edges, ll, ee };
        debug_assert!(validate(&g.to_quadruplet()).is_ok(), "incompatible {g:?}");
        g
    }

    /// Unit of the twin lattice: the uncoloured complete graph `(V, F_V, L, F_L)`.
    pub fn unit(vset: PairedVertexSet) -> Pdcg {
        let part = vset.partition();
        Pdcg { vset, edges: part.f_v, ll: vset.left().collect(), ee: part.f_l }
    }

    /// Zero of the twin lattice: no edges, every vertex twin-paired.
    pub fn zero(vset: PairedVertexSet) -> Pdcg {
        Pdcg { vset, edges: BTreeSet::new(), ll: BTreeSet::new(), ee: BTreeSet::new() }
    }

    pub fn vset(&self) -> PairedVertexSet {
        self.vset
    }

    pub fn p(&self) -> u32 {
        self.vset.p()
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    /// `LL`: left vertices in atomic classes.
    pub fn atomic_vertices(&self) -> &BTreeSet<Vertex> {
        &self.ll
    }

    /// `EE`: left representatives of twin edge pairs with both edges atomic.
    pub fn atomic_edges(&self) -> &BTreeSet<Edge> {
        &self.ee
    }

    pub(crate) fn parts_mut(
        &mut self,
    ) -> (&mut BTreeSet<Edge>, &mut BTreeSet<Vertex>, &mut BTreeSet<Edge>) {
        (&mut self.edges, &mut self.ll, &mut self.ee)
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    fn block_edges(&self, b: EdgeBlock) -> BTreeSet<Edge> {
        self.edges.iter().copied().filter(|&e| self.vset.block(e) == b).collect()
    }

    pub fn e_left(&self) -> BTreeSet<Edge> {
        self.block_edges(EdgeBlock::Left)
    }

    pub fn e_right(&self) -> BTreeSet<Edge> {
        self.block_edges(EdgeBlock::Right)
    }

    pub fn e_twin(&self) -> BTreeSet<Edge> {
        self.block_edges(EdgeBlock::Twin)
    }

    /// `E_L ∩ τ(E_R)`: left edges whose twin is also present.
    pub fn twinned_edges(&self) -> BTreeSet<Edge> {
        self.edges
            .iter()
            .copied()
            .filter(|&e| {
                self.vset.block(e) == EdgeBlock::Left
                    && self.edges.contains(&self.vset.twin_edge(e))
            })
            .collect()
    }

    /// Left representatives of the edge twin-pairing classes.
    pub fn paired_edges(&self) -> BTreeSet<Edge> {
        self.twinned_edges().difference(&self.ee).copied().collect()
    }

    /// Left vertices of the vertex twin-pairing classes, `L \ LL`.
    pub fn paired_vertices(&self) -> BTreeSet<Vertex> {
        self.vset.left().filter(|v| !self.ll.contains(v)).collect()
    }

    /// Whether a present edge belongs to a twin-pairing class.
    pub fn is_edge_paired(&self, e: Edge) -> bool {
        if !self.edges.contains(&e) || self.vset.block(e) == EdgeBlock::Twin {
            return false;
        }
        let r = self.vset.representative(e);
        let t = self.vset.twin_edge(r);
        self.edges.contains(&r) && self.edges.contains(&t) && !self.ee.contains(&r)
    }

    pub fn is_vertex_paired(&self, v: Vertex) -> bool {
        let l = if self.vset.is_left(v) { v } else { self.vset.twin(v) };
        !self.ll.contains(&l)
    }

    /// Number of free concentration parameters (colour classes).
    pub fn num_classes(&self) -> usize {
        let p = self.p() as usize;
        let vertex_classes = p - self.paired_vertices().len();
        let edge_classes = self.edges.len() - self.paired_edges().len();
        vertex_classes + edge_classes
    }

    pub fn to_quadruplet(&self) -> Quadruplet {
        Quadruplet {
            p: self.p(),
            edges: self.edges.iter().copied().collect(),
            ll: self.ll.iter().copied().collect(),
            ee: self.ee.iter().copied().collect(),
        }
    }

    /// Canonical model-file text: sorted sets, one key per line.
    pub fn to_json(&self) -> String {
        fn edges(es: &BTreeSet<Edge>) -> String {
            let items: Vec<String> = es.iter().map(|e| format!("[{},{}]", e.0, e.1)).collect();
            format!("[{}]", items.join(","))
        }
        let ll: Vec<String> = self.ll.iter().map(|v| v.to_string()).collect();
        format!(
            "{{\n  \"p\": {},\n  \"edges\": {},\n  \"LL\": [{}],\n  \"EE\": {}\n}}\n",
            self.p(),
            edges(&self.edges),
            ll.join(","),
            edges(&self.ee)
        )
    }

    pub fn from_json(text: &str) -> Result<Pdcg> {
        Pdcg::try_from(Quadruplet::from_json(text)?)
    }

    /// Colour-class view.
    pub fn to_colour_classes(&self) -> ColourClasses {
        let vset = self.vset;
        let mut vertex_classes = Vec::new();
        for v in vset.vertices() {
            if vset.is_left(v) && !self.ll.contains(&v) {
                vertex_classes.push(vec![v, vset.twin(v)]);
            } else if !self.is_vertex_paired(v) {
                vertex_classes.push(vec![v]);
            }
        }
        let paired = self.paired_edges();
        let mut edge_classes = Vec::new();
        for &e in &self.edges {
            if paired.contains(&e) {
                edge_classes.push(vec![e, vset.twin_edge(e)]);
            } else if !paired.contains(&vset.representative(e)) || vset.block(e) == EdgeBlock::Twin
            {
                edge_classes.push(vec![e]);
            }
        }
        let mut cc = ColourClasses { p: vset.p(), vertex_classes, edge_classes };
        cc.canonicalize();
        cc
    }

    /// Rebuilds the quadruplet from a colouring.
    pub fn from_colour_classes(cc: &ColourClasses) -> Result<Pdcg> {
        let vset = PairedVertexSet::new(cc.p)?;
        let mut seen = BTreeSet::new();
        let mut ll = BTreeSet::new();
        for class in &cc.vertex_classes {
            for &v in class {
                if !vset.contains(v) {
                    return Err(Error::InvalidArgument(format!("vertex {v} out of range")));
                }
                if !seen.insert(v) {
                    return Err(Error::InvalidArgument(format!("vertex {v} in two classes")));
                }
            }
            match class.as_slice() {
                [v] => {
                    if vset.is_left(*v) {
                        ll.insert(*v);
                    }
                }
                [a, b] if vset.twin(*a) == *b => {}
                other => {
                    return Err(Error::NotAPdcg(format!("vertex class {other:?}")));
                }
            }
        }
        if seen.len() != vset.p() as usize {
            return Err(Error::InvalidArgument("vertex classes do not cover V".into()));
        }
        // a left vertex is atomic only if its twin is atomic as well
        for v in vset.left() {
            let left_atomic = ll.contains(&v);
            let right_atomic = cc.vertex_classes.iter().any(|c| c.as_slice() == [vset.twin(v)]);
            if left_atomic != right_atomic {
                return Err(Error::NotAPdcg(format!("vertex {v} and its twin disagree")));
            }
        }

        let mut edges = BTreeSet::new();
        let mut atomic = BTreeSet::new();
        for class in &cc.edge_classes {
            for &e in class {
                vset.check_edge(e)?;
                if !edges.insert(e) {
                    return Err(Error::InvalidArgument(format!("edge {e} in two classes")));
                }
            }
            match class.as_slice() {
                [e] => {
                    atomic.insert(*e);
                }
                [a, b] if *a != *b && vset.twin_edge(*a) == *b => {}
                other => {
                    let shown: Vec<String> = other.iter().map(|e| e.to_string()).collect();
                    return Err(Error::NotAPdcg(format!("edge class {{{}}}", shown.join(","))));
                }
            }
        }
        let ee: BTreeSet<Edge> = atomic
            .iter()
            .copied()
            .filter(|&e| {
                vset.block(e) == EdgeBlock::Left && atomic.contains(&vset.twin_edge(e))
            })
            .collect();
        // a pair where only one side is atomic is not a valid colouring
        for &e in &atomic {
            if vset.block(e) == EdgeBlock::Twin {
                continue;
            }
            let t = vset.twin_edge(e);
            if edges.contains(&t) && !atomic.contains(&t) {
                return Err(Error::NotAPdcg(format!("edge {e} atomic but its twin is paired")));
            }
        }
        Ok(Pdcg::from_parts(vset, edges, ll, ee))
    }

    /// Graphviz rendering: twin-pairing classes gray, atomic classes black.
    pub fn to_dot(&self) -> String {
        let vset = self.vset;
        let mut s = String::from("graph pdcg {\n  layout=neato;\n  node [shape=circle];\n");
        let q = vset.half() as f64;
        for v in vset.vertices() {
            let (x, y) = if vset.is_left(v) {
                (0.0, q - v as f64)
            } else {
                (3.0, q - vset.twin(v) as f64)
            };
            let colour = if self.is_vertex_paired(v) { "gray" } else { "black" };
            s.push_str(&format!(
                "  {v} [pos=\"{x},{y}!\", color={colour}, fontcolor={colour}];\n"
            ));
        }
        for &e in &self.edges {
            let colour = if self.is_edge_paired(e) { "gray" } else { "black" };
            s.push_str(&format!("  {} -- {} [color={colour}];\n", e.0, e.1));
        }
        s.push_str("}\n");
        s
    }
}

impl TryFrom<Quadruplet> for Pdcg {
    type Error = Error;

    fn try_from(q: Quadruplet) -> Result<Pdcg> {
        validate(&q).map_err(Error::Incompatible)?;
        let vset = PairedVertexSet::new(q.p)?;
        Ok(Pdcg {
            vset,
            edges: q.edges.into_iter().collect(),
            ll: q.ll.into_iter().collect(),
            ee: q.ee.into_iter().collect(),
        })
    }
}

impl From<Pdcg> for Quadruplet {
    fn from(g: Pdcg) -> Quadruplet {
        g.to_quadruplet()
    }
}

impl fmt::Display for Pdcg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.edges.iter().map(|e| e.to_string()).collect();
        let ll: Vec<String> = self.ll.iter().map(|v| v.to_string()).collect();
        let ee: Vec<String> = self.ee.iter().map(|e| e.to_string()).collect();
        write!(f, "E={{{}}} LL={{{}}} EE={{{}}}", edges.join(","), ll.join(","), ee.join(","))
    }
}

/// A pdCG colouring: vertex and edge colour classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColourClasses {
    pub p: u32,
    pub vertex_classes: Vec<Vec<Vertex>>,
    pub edge_classes: Vec<Vec<Edge>>,
}

impl ColourClasses {
    /// Sorts members within classes and classes by their first member.
    pub fn canonicalize(&mut self) {
        for c in &mut self.vertex_classes {
            c.sort_unstable();
        }
        for c in &mut self.edge_classes {
            c.sort_unstable();
        }
        self.vertex_classes.sort();
        self.edge_classes.sort();
    }
}
