//! Reference implementations used by the integration tests. Nothing here
//! calls into the library's lattice or graph algorithms: colour classes are
//! rebuilt from the raw quadruplet with plain twin arithmetic.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use pdrcon::graph::{Quadruplet, Vertex};
use pdrcon::{Edge, Pdcg};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A cell of the concentration matrix: `(v, v)` for a vertex, `(i, j)`
/// with `i < j` for an edge.
pub type Cell = (Vertex, Vertex);

pub fn tw(p: u32, v: Vertex) -> Vertex {
    let h = p / 2;
    if v <= h {
        v + h
    } else {
        v - h
    }
}

pub fn tw_edge(p: u32, a: Vertex, b: Vertex) -> Cell {
    let (x, y) = (tw(p, a), tw(p, b));
    (x.min(y), x.max(y))
}

/// Left representative of a non-link twin pair: the member `(i, j)` with `i < τ(j)`.
pub fn left_rep(p: u32, e: Cell) -> Cell {
    let t = tw_edge(p, e.0, e.1);
    if e.0 < tw(p, e.1) {
        e
    } else {
        t
    }
}

/// Colour classes read directly off the quadruplet.
pub fn classes(q: &Quadruplet) -> Vec<BTreeSet<Cell>> {
    let p = q.p;
    let h = p / 2;
    let ll: BTreeSet<Vertex> = q.ll.iter().copied().collect();
    let e: BTreeSet<Cell> = q.edges.iter().map(|x| (x.lo(), x.hi())).collect();
    let ee: BTreeSet<Cell> = q.ee.iter().map(|x| (x.lo(), x.hi())).collect();
    let mut out = Vec::new();
    for i in 1..=h {
        if ll.contains(&i) {
            out.push([(i, i)].into());
            out.push([(i + h, i + h)].into());
        } else {
            out.push([(i, i), (i + h, i + h)].into());
        }
    }
    let mut seen = BTreeSet::new();
    for &c in &e {
        if seen.contains(&c) {
            continue;
        }
        let t = tw_edge(p, c.0, c.1);
        if t == c || !e.contains(&t) || ee.contains(&c) || ee.contains(&t) {
            out.push([c].into());
            seen.insert(c);
        } else {
            out.push([c, t].into());
            seen.insert(c);
            seen.insert(t);
        }
    }
    out
}

/// Model inclusion: every zero of `g` is a zero of `h`, and every class of
/// `g` is either absent from `h` or lies inside a single class of `h`.
pub fn submodel(h: &[BTreeSet<Cell>], g: &[BTreeSet<Cell>]) -> bool {
    let mut owner: BTreeMap<Cell, usize> = BTreeMap::new();
    for (k, c) in h.iter().enumerate() {
        for &x in c {
            owner.insert(x, k);
        }
    }
    let g_cells: BTreeSet<Cell> = g.iter().flatten().copied().collect();
    if owner.keys().any(|x| !g_cells.contains(x)) {
        return false;
    }
    g.iter().all(|c| {
        let ids: BTreeSet<Option<&usize>> = c.iter().map(|x| owner.get(x)).collect();
        ids.len() == 1
    })
}

/// Componentwise inclusion of `(E, LL, EE)`.
pub fn twin_below(h: &Quadruplet, g: &Quadruplet) -> bool {
    let sub = |a: &[Edge], b: &[Edge]| a.iter().all(|x| b.contains(x));
    sub(&h.edges, &g.edges) && h.ll.iter().all(|v| g.ll.contains(v)) && sub(&h.ee, &g.ee)
}

pub fn twin_rank(q: &Quadruplet) -> usize {
    q.edges.len() + q.ll.len() + q.ee.len()
}

fn build(p: u32, edges: &BTreeSet<Cell>, ll: Vec<Vertex>, ee: Vec<Cell>) -> Pdcg {
    let q = Quadruplet {
        p,
        edges: edges.iter().map(|&(a, b)| Edge::new(a, b)).collect(),
        ll,
        ee: ee.into_iter().map(|(a, b)| Edge::new(a, b)).collect(),
    };
    Pdcg::try_from(q).expect("oracle builds valid quadruplets")
}

fn all_cells(p: u32) -> Vec<Cell> {
    let mut v = Vec::new();
    for i in 1..=p {
        for j in i + 1..=p {
            v.push((i, j));
        }
    }
    v
}

/// Left representatives of the twin pairs fully present in `edges`.
fn full_pairs(p: u32, edges: &BTreeSet<Cell>) -> Vec<Cell> {
    edges
        .iter()
        .copied()
        .filter(|&c| {
            let t = tw_edge(p, c.0, c.1);
            t != c && edges.contains(&t) && left_rep(p, c) == c
        })
        .collect()
}

/// Every coloured graph for paired data on `p` vertices, by brute force.
pub fn enumerate(p: u32) -> Vec<Pdcg> {
    let cells = all_cells(p);
    let h = p / 2;
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << cells.len()) {
        let edges: BTreeSet<Cell> =
            cells.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, c)| *c).collect();
        let pairs = full_pairs(p, &edges);
        for lmask in 0u32..(1 << h) {
            let ll: Vec<Vertex> = (1..=h).filter(|i| lmask >> (i - 1) & 1 == 1).collect();
            for emask in 0u64..(1u64 << pairs.len()) {
                let ee: Vec<Cell> =
                    pairs.iter().enumerate().filter(|(k, _)| emask >> k & 1 == 1).map(|(_, c)| *c).collect();
                out.push(build(p, &edges, ll.clone(), ee));
            }
        }
    }
    out
}

/// A random graph: each edge with probability `density`, then random
/// atomic vertices and atomic pairs.
pub fn random_graph(p: u32, density: f64, rng: &mut ChaCha8Rng) -> Pdcg {
    let edges: BTreeSet<Cell> = all_cells(p).into_iter().filter(|_| rng.random_bool(density)).collect();
    let ll: Vec<Vertex> = (1..=p / 2).filter(|_| rng.random_bool(0.5)).collect();
    let ee: Vec<Cell> = full_pairs(p, &edges).into_iter().filter(|_| rng.random_bool(0.5)).collect();
    build(p, &edges, ll, ee)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The whole space on `p` vertices with the model-inclusion relation and its covers.
pub struct Space {
    pub graphs: Vec<Pdcg>,
    pub index: BTreeMap<Pdcg, usize>,
    pub quads: Vec<Quadruplet>,
    pub classes: Vec<Vec<BTreeSet<Cell>>>,
    /// `leq[a][b]`: graph `a` is a submodel of graph `b`.
    pub leq: Vec<Vec<bool>>,
    /// `covers[b]`: the graphs covered by `b`.
    pub covers: Vec<Vec<usize>>,
}

impl Space {
    pub fn new(p: u32) -> Space {
        let graphs = enumerate(p);
        let index = graphs.iter().cloned().enumerate().map(|(k, g)| (g, k)).collect();
        let quads: Vec<Quadruplet> = graphs.iter().map(|g| g.to_quadruplet()).collect();
        let classes: Vec<_> = quads.iter().map(classes).collect();
        let n = graphs.len();
        let leq: Vec<Vec<bool>> =
            (0..n).map(|a| (0..n).map(|b| submodel(&classes[a], &classes[b])).collect()).collect();
        let covers = (0..n)
            .map(|b| {
                let below: Vec<usize> = (0..n).filter(|&a| a != b && leq[a][b]).collect();
                below
                    .iter()
                    .copied()
                    .filter(|&a| !below.iter().any(|&c| c != a && leq[a][c]))
                    .collect()
            })
            .collect();
        Space { graphs, index, quads, classes, leq, covers }
    }

    pub fn id(&self, g: &Pdcg) -> usize {
        self.index[g]
    }

    /// Greatest common lower bound under model inclusion.
    pub fn meet(&self, a: usize, b: usize) -> usize {
        let lower: Vec<usize> = (0..self.graphs.len()).filter(|&c| self.leq[c][a] && self.leq[c][b]).collect();
        let top: Vec<usize> = lower.iter().copied().filter(|&c| lower.iter().all(|&d| self.leq[d][c])).collect();
        assert_eq!(top.len(), 1, "meet must exist and be unique");
        top[0]
    }

    pub fn covered_by(&self, h: usize, g: usize) -> bool {
        self.covers[g].contains(&h)
    }
}

/// `ln Γ(k/2)` from the factorial identities for integer and half-integer arguments.
fn ln_gamma_half(k: u32) -> f64 {
    if k.is_multiple_of(2) {
        (1..k / 2).map(|i| (i as f64).ln()).sum()
    } else {
        // Γ(m + 1/2) = (2m)! √π / (4^m m!)
        let m = (k - 1) / 2;
        let ln_fact = |n: u32| (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
        ln_fact(2 * m) + 0.5 * std::f64::consts::PI.ln() - m as f64 * 4f64.ln() - ln_fact(m)
    }
}

/// Chi-square density after substituting `t = u²`, which removes the
/// singularity at zero for one degree of freedom.
fn density_u(u: f64, k: u32) -> f64 {
    if u <= 0.0 {
        return if k == 1 { (2.0 / std::f64::consts::PI).sqrt() } else { 0.0 };
    }
    let kf = k as f64;
    (2f64.ln() + (kf - 1.0) * u.ln() - 0.5 * u * u - 0.5 * kf * 2f64.ln() - ln_gamma_half(k)).exp()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

pub fn sf_by_quadrature(x: f64, k: u32) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let ux = x.sqrt();
    let mode = ((k as f64) - 1.0).max(0.0).sqrt();
    let step = 1e-3;
    if ux < mode {
        let n = (ux / step).ceil() as usize + 2;
        1.0 - simpson(|u| density_u(u, k), 0.0, ux, n)
    } else {
        let top = ux + 40.0;
        let n = ((top - ux) / step).ceil() as usize + 2;
        simpson(|u| density_u(u, k), ux, top, n)
    }
}
