//! Synthetic benchmark: random coloured graphs, concentration matrices
//! adapted to them, Gaussian samples, and selection scores.
//!
//! All randomness comes from ChaCha8 seeded with the master seed; replicate
//! `r` runs on stream `r` of that generator, so replicates are independent of
//! scheduling.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use nalgebra::{Cholesky, DMatrix};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_pdcg, FitOptions, SampleMoments};
use crate::graph::{Edge, PairedVertexSet, Pdcg};
use crate::search::{backward_search, Procedure, SearchConfig};

/// Nominal sample size used when fitting the equicorrelation matrix.
pub const NOMINAL_N: usize = 100;
pub const EQUICORRELATION: f64 = 0.5;
pub const FALLBACK_EQUICORRELATION: f64 = 0.45;

/// How the true graph of each replicate is drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Structure {
    /// Exact counts.
    Counts {
        /// `|E|`
        edges: usize,
        /// `|E_T|`, edges joining a vertex to its twin
        twin_links: usize,
        /// `|E_L ∩ τ(E_R)|`, edge pairs with both twins present
        twin_pairs: usize,
        /// `|EE|`, twin pairs whose edges stay atomic
        atomic_edge_pairs: usize,
        /// `|LL|`, left vertices whose class stays atomic
        atomic_vertices: usize,
    },
    /// Independent draws.
    Probabilities {
        /// each `(i, τ(i))` edge
        twin_link: f64,
        /// both edges of a potential twin pair
        pair: f64,
        /// exactly one edge of a pair not drawn as a whole (side uniform)
        single: f64,
        /// a present pair stays atomic
        atomic_edge_pair: f64,
        /// a left vertex stays atomic
        atomic_vertex: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub name: String,
    pub p: u32,
    pub structure: Structure,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<ScenarioSpec> {
        let spec: ScenarioSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let vset = PairedVertexSet::new(self.p)?;
        let half = vset.half() as usize;
        let blocks = vset.left_block_size();
        let bad = |field: &str, why: String| Err(Error::InvalidArgument(format!("{field}: {why}")));
        if self.n < 2 {
            return bad("n", format!("need at least 2 observations, got {}", self.n));
        }
        match self.structure {
            Structure::Counts { edges, twin_links, twin_pairs, atomic_edge_pairs, atomic_vertices } => {
                if twin_links > half {
                    return bad("twin_links", format!("{twin_links} > p/2 = {half}"));
                }
                if twin_pairs > blocks {
                    return bad("twin_pairs", format!("{twin_pairs} > {blocks} potential pairs"));
                }
                if atomic_edge_pairs > twin_pairs {
                    return bad("atomic_edge_pairs", format!("{atomic_edge_pairs} > twin_pairs = {twin_pairs}"));
                }
                if atomic_vertices > half {
                    return bad("atomic_vertices", format!("{atomic_vertices} > p/2 = {half}"));
                }
                let fixed = twin_links + 2 * twin_pairs;
                if edges < fixed {
                    return bad("edges", format!("{edges} < twin_links + 2*twin_pairs = {fixed}"));
                }
                if edges - fixed > blocks - twin_pairs {
                    return bad(
                        "edges",
                        format!("{} unpaired edges do not fit in {} free pairs", edges - fixed, blocks - twin_pairs),
                    );
                }
            }
            Structure::Probabilities { twin_link, pair, single, atomic_edge_pair, atomic_vertex } => {
                for (field, v) in [
                    ("twin_link", twin_link),
                    ("pair", pair),
                    ("single", single),
                    ("atomic_edge_pair", atomic_edge_pair),
                    ("atomic_vertex", atomic_vertex),
                ] {
                    if !(0.0..=1.0).contains(&v) {
                        return bad(field, format!("probability {v} outside [0,1]"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Expected `|E| / |F_V|`.
    pub fn expected_density(&self) -> f64 {
        let p = self.p as f64;
        let half = p / 2.0;
        let blocks = p * (p - 2.0) / 4.0;
        let total = p * (p - 1.0) / 2.0;
        let edges = match self.structure {
            Structure::Counts { edges, .. } => edges as f64,
            Structure::Probabilities { twin_link, pair, single, .. } => {
                half * twin_link + blocks * (2.0 * pair + (1.0 - pair) * single)
            }
        };
        edges / total
    }
}

fn chance(rng: &mut ChaCha8Rng, prob: f64) -> bool {
    rng.random::<f64>() < prob
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T], k: usize) -> Vec<T> {
    let mut idx = index::sample(rng, items.len(), k).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| items[i]).collect()
}

/// Draws a compatible graph following the scenario's structure.
pub fn random_pdcg(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<Pdcg> {
    spec.validate()?;
    let vset = PairedVertexSet::new(spec.p)?;
    let left: Vec<u32> = vset.left().collect();
    let links: Vec<Edge> = left.iter().map(|&i| vset.twin_link(i)).collect();
    let reps: Vec<Edge> = vset.partition().f_l.into_iter().collect();

    let mut edges = BTreeSet::new();
    let mut ll = BTreeSet::new();
    let mut ee = BTreeSet::new();
    match spec.structure {
        Structure::Counts { edges: n_edges, twin_links, twin_pairs, atomic_edge_pairs, atomic_vertices } => {
            ll.extend(pick(rng, &left, atomic_vertices));
            edges.extend(pick(rng, &links, twin_links));
            let mut shuffled = reps.clone();
            let order = index::sample(rng, reps.len(), reps.len()).into_vec();
            for (slot, &i) in order.iter().enumerate() {
                shuffled[slot] = reps[i];
            }
            let (paired, rest) = shuffled.split_at(twin_pairs);
            for &e in paired {
                edges.insert(e);
                edges.insert(vset.twin_edge(e));
            }
            let mut paired_sorted = paired.to_vec();
            paired_sorted.sort();
            ee.extend(pick(rng, &paired_sorted, atomic_edge_pairs));
            let singles = n_edges - twin_links - 2 * twin_pairs;
            for &e in &rest[..singles] {
                edges.insert(if rng.random::<bool>() { e } else { vset.twin_edge(e) });
            }
        }
        Structure::Probabilities { twin_link, pair, single, atomic_edge_pair, atomic_vertex } => {
            for &i in &left {
                if chance(rng, atomic_vertex) {
                    ll.insert(i);
                }
            }
            for &e in &links {
                if chance(rng, twin_link) {
                    edges.insert(e);
                }
            }
            for &e in &reps {
                if chance(rng, pair) {
                    edges.insert(e);
                    edges.insert(vset.twin_edge(e));
                    if chance(rng, atomic_edge_pair) {
                        ee.insert(e);
                    }
                } else if chance(rng, single) {
                    edges.insert(if rng.random::<bool>() { e } else { vset.twin_edge(e) });
                }
            }
        }
    }
    Pdcg::new(vset, edges, ll, ee)
}

fn equicorrelation(p: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho })
}

/// Concentration matrix in the model of `g`: the fit of `g` to the
/// equicorrelation matrix with unit diagonal and 0.5 off the diagonal.
pub fn concentration_for(g: &Pdcg) -> Result<DMatrix<f64>> {
    let p = g.p() as usize;
    let mut last = String::new();
    for rho in [EQUICORRELATION, FALLBACK_EQUICORRELATION] {
        let s = SampleMoments::new(equicorrelation(p, rho), NOMINAL_N)?;
        match fit_pdcg(g, &s, &FitOptions::default()) {
            Ok(fit) if fit.converged => return Ok(fit.theta_hat),
            Ok(fit) => last = format!("no convergence after {} iterations", fit.iterations),
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::FitFailed(format!("concentration for {g}: {last}")))
}

/// `n` rows drawn i.i.d. from `N(0, Θ⁻¹)`.
pub fn sample_gaussian_with(theta: &DMatrix<f64>, n: usize, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    let chol = Cholesky::new(theta.clone())
        .ok_or_else(|| Error::NumericDomain("concentration matrix is not positive definite".into()))?;
    let sigma = chol.inverse();
    let l = Cholesky::new(sigma)
        .ok_or_else(|| Error::NumericDomain("covariance is not positive definite".into()))?
        .unpack();
    let p = theta.nrows();
    let z = DMatrix::from_fn(p, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok((l * z).transpose())
}

pub fn sample_gaussian(theta: &DMatrix<f64>, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    sample_gaussian_with(theta, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Confusion counts over a finite universe.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    fn of<T: Ord>(selected: &BTreeSet<T>, truth: &BTreeSet<T>, universe: usize) -> Confusion {
        let tp = selected.intersection(truth).count();
        let fp = selected.len() - tp;
        let fn_ = truth.len() - tp;
        Confusion { tp, fp, fn_, tn: universe - tp - fp - fn_ }
    }

    pub fn selected(&self) -> usize {
        self.tp + self.fp
    }

    pub fn ppv(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn tpr(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn tnr(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }
}

fn ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| 100.0 * a as f64 / b as f64)
}

/// Edge and symmetry recovery of a selected graph against the truth.
///
/// Edges range over all vertex pairs. Symmetries are edge twin-pairing
/// classes, identified by their left representative, over all potential
/// pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionScore {
    pub edges: Confusion,
    pub sym: Confusion,
}

impl SelectionScore {
    pub fn rates(&self) -> [Option<f64>; 6] {
        [
            self.edges.ppv(),
            self.edges.tpr(),
            self.edges.tnr(),
            self.sym.ppv(),
            self.sym.tpr(),
            self.sym.tnr(),
        ]
    }
}

pub fn score_selection(selected: &Pdcg, truth: &Pdcg) -> Result<SelectionScore> {
    if selected.vset() != truth.vset() {
        return Err(Error::VertexSetMismatch(selected.p(), truth.p()));
    }
    let vset = truth.vset();
    let p = vset.p() as usize;
    Ok(SelectionScore {
        edges: Confusion::of(selected.edges(), truth.edges(), p * (p - 1) / 2),
        sym: Confusion::of(&selected.paired_edges(), &truth.paired_edges(), vset.left_block_size()),
    })
}

/// Outcome of one procedure on one replicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub replicate: usize,
    pub procedure: Procedure,
    pub selected: Option<Pdcg>,
    pub score: Option<SelectionScore>,
    pub fitted_models: usize,
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub truth: Option<Pdcg>,
    pub runs: Vec<RunRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Mean and standard deviation over defined values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Summary> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Summary { mean, sd, count: v.len() })
    }
}

/// Aggregated performance of one procedure on one scenario. Rates are
/// percentages averaged over the replicates where they are defined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub p: u32,
    pub procedure: Procedure,
    pub runs: usize,
    pub failures: usize,
    pub edge_count: Option<Summary>,
    pub eppv: Option<f64>,
    pub etpr: Option<f64>,
    pub etnr: Option<f64>,
    pub sym_count: Option<Summary>,
    pub sppv: Option<f64>,
    pub stpr: Option<f64>,
    pub stnr: Option<f64>,
    pub fitted_models: Option<f64>,
    pub wall_seconds: Option<f64>,
}

impl MetricsReport {
    fn aggregate(spec: &ScenarioSpec, procedure: Procedure, runs: &[&RunRecord]) -> MetricsReport {
        let ok: Vec<&RunRecord> = runs.iter().copied().filter(|r| r.score.is_some()).collect();
        let scores: Vec<SelectionScore> = ok.iter().filter_map(|r| r.score).collect();
        let mean_rate = |k: usize| Summary::of(scores.iter().filter_map(|s| s.rates()[k])).map(|s| s.mean);
        MetricsReport {
            scenario: spec.name.clone(),
            p: spec.p,
            procedure,
            runs: ok.len(),
            failures: runs.len() - ok.len(),
            edge_count: Summary::of(scores.iter().map(|s| s.edges.selected() as f64)),
            eppv: mean_rate(0),
            etpr: mean_rate(1),
            etnr: mean_rate(2),
            sym_count: Summary::of(scores.iter().map(|s| s.sym.selected() as f64)),
            sppv: mean_rate(3),
            stpr: mean_rate(4),
            stnr: mean_rate(5),
            fitted_models: Summary::of(ok.iter().map(|r| r.fitted_models as f64)).map(|s| s.mean),
            wall_seconds: Summary::of(ok.iter().map(|r| r.wall_seconds)).map(|s| s.mean),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub spec: ScenarioSpec,
    pub rows: Vec<MetricsReport>,
    pub replicates: Vec<ReplicateRecord>,
}

#[derive(Clone, Copy, Debug)]
pub struct BenchOptions {
    pub search: SearchConfig,
    /// Replicates run concurrently on this many threads.
    pub jobs: usize,
    /// Divide by `n - 1` instead of `n` when forming `S`.
    pub unbiased: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { search: SearchConfig::default(), jobs: 1, unbiased: false }
    }
}

/// Generator for replicate `r` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

/// True graph, concentration matrix and sample moments of replicate `r`.
pub fn replicate_data(spec: &ScenarioSpec, r: usize, unbiased: bool) -> Result<(Pdcg, DMatrix<f64>, SampleMoments)> {
    let mut rng = replicate_rng(spec.seed, r);
    let truth = random_pdcg(spec, &mut rng)?;
    let theta = concentration_for(&truth)?;
    let data = sample_gaussian_with(&theta, spec.n, &mut rng)?;
    let moments = SampleMoments::from_data(&data, unbiased)?;
    Ok((truth, theta, moments))
}

fn run_replicate(spec: &ScenarioSpec, r: usize, procedures: &[Procedure], opts: &BenchOptions) -> ReplicateRecord {
    let (truth, _, moments) = match replicate_data(spec, r, opts.unbiased) {
        Ok(x) => x,
        Err(e) => return ReplicateRecord { replicate: r, truth: None, runs: vec![], error: Some(e.to_string()) },
    };
    let runs = procedures
        .iter()
        .map(|&procedure| {
            let start = Instant::now();
            match backward_search(procedure, &moments, &opts.search) {
                Ok((selected, trace)) => RunRecord {
                    replicate: r,
                    procedure,
                    score: score_selection(&selected, &truth).ok(),
                    selected: Some(selected),
                    fitted_models: trace.fitted_models,
                    wall_seconds: trace.wall_seconds,
                    error: None,
                },
                Err(e) => RunRecord {
                    replicate: r,
                    procedure,
                    selected: None,
                    score: None,
                    fitted_models: 0,
                    wall_seconds: start.elapsed().as_secs_f64(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    ReplicateRecord { replicate: r, truth: Some(truth), runs, error: None }
}

/// Runs every procedure on every replicate and aggregates the scores.
/// Per-replicate failures are recorded and do not stop the run.
pub fn run_benchmark(spec: &ScenarioSpec, procedures: &[Procedure], opts: &BenchOptions) -> Result<BenchReport> {
    spec.validate()?;
    opts.search.validate()?;
    let work = |r: usize| run_replicate(spec, r, procedures, opts);
    let replicates: Vec<ReplicateRecord> = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| (0..spec.replicates).into_par_iter().map(work).collect())
    } else {
        (0..spec.replicates).map(work).collect()
    };
    // no replicates, no rows: the report is empty rather than undefined
    let measured = if spec.replicates == 0 { &[][..] } else { procedures };
    let rows = measured
        .iter()
        .map(|&procedure| {
            let runs: Vec<&RunRecord> =
                replicates.iter().flat_map(|r| r.runs.iter()).filter(|x| x.procedure == procedure).collect();
            let mut row = MetricsReport::aggregate(spec, procedure, &runs);
            row.failures += replicates.iter().filter(|r| r.error.is_some()).count();
            row
        })
        .collect();
    Ok(BenchReport { spec: spec.clone(), rows, replicates })
}

pub const CSV_HEADER: [&str; 15] = [
    "scenario",
    "p",
    "procedure",
    "#edges",
    "#edges_sd",
    "ePPV%",
    "eTPR%",
    "eTNR%",
    "#sym",
    "#sym_sd",
    "sPPV%",
    "sTPR%",
    "sTNR%",
    "Time(s)",
    "#models",
];

/// Writes the table in CSV. Undefined values are empty cells; timing is
/// omitted when `with_timing` is false so reruns compare byte for byte.
pub fn write_csv<W: Write>(rows: &[MetricsReport], with_timing: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let f = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.p.to_string(),
            r.procedure.to_string(),
            f(r.edge_count.map(|s| s.mean)),
            f(r.edge_count.map(|s| s.sd)),
            f(r.eppv),
            f(r.etpr),
            f(r.etnr),
            f(r.sym_count.map(|s| s.mean)),
            f(r.sym_count.map(|s| s.sd)),
            f(r.sppv),
            f(r.stpr),
            f(r.stnr),
            if with_timing { r.wall_seconds.map(|v| format!("{v:.4}")).unwrap_or_default() } else { String::new() },
            f(r.fitted_models),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_a() -> ScenarioSpec {
        ScenarioSpec {
            name: "A".into(),
            p: 8,
            structure: Structure::Counts {
                edges: 5,
                twin_links: 0,
                twin_pairs: 2,
                atomic_edge_pairs: 1,
                atomic_vertices: 3,
            },
            n: 100,
            replicates: 2,
            seed: 7,
        }
    }

    #[test]
    fn counts_are_exact() {
        let spec = spec_a();
        for r in 0..20 {
            let g = random_pdcg(&spec, &mut replicate_rng(1, r)).unwrap();
            assert_eq!(g.edges().len(), 5);
            assert_eq!(g.e_twin().len(), 0);
            assert_eq!(g.twinned_edges().len(), 2);
            assert_eq!(g.atomic_edges().len(), 1);
            assert_eq!(g.atomic_vertices().len(), 3);
        }
    }

    #[test]
    fn infeasible_counts() {
        let mut spec = spec_a();
        spec.structure = Structure::Counts {
            edges: 3,
            twin_links: 0,
            twin_pairs: 2,
            atomic_edge_pairs: 1,
            atomic_vertices: 3,
        };
        assert!(matches!(spec.validate(), Err(Error::InvalidArgument(m)) if m.starts_with("edges")));
        spec.structure = Structure::Counts {
            edges: 5,
            twin_links: 0,
            twin_pairs: 2,
            atomic_edge_pairs: 1,
            atomic_vertices: 5,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn seeded_graphs_repeat() {
        let spec = spec_a();
        let a = random_pdcg(&spec, &mut replicate_rng(3, 4)).unwrap();
        let b = random_pdcg(&spec, &mut replicate_rng(3, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_density() {
        let mut spec = spec_a();
        spec.structure = Structure::Counts {
            edges: 0,
            twin_links: 0,
            twin_pairs: 0,
            atomic_edge_pairs: 0,
            atomic_vertices: 2,
        };
        let g = random_pdcg(&spec, &mut replicate_rng(0, 0)).unwrap();
        assert!(g.edges().is_empty());
        assert_eq!(g.atomic_vertices().len(), 2);
    }

    #[test]
    fn concentration_examples() {
        let v = PairedVertexSet::new(4).unwrap();
        let unit = concentration_for(&Pdcg::unit(v)).unwrap();
        let inv = equicorrelation(4, 0.5).try_inverse().unwrap();
        assert!((&unit - &inv).norm() < 1e-8);
        let zero = concentration_for(&Pdcg::zero(v)).unwrap();
        assert!((&zero - DMatrix::<f64>::identity(4, 4)).norm() < 1e-10);
    }

    #[test]
    fn sampling_is_seeded() {
        let theta = DMatrix::identity(3, 3) * 2.0;
        let a = sample_gaussian(&theta, 5, 9).unwrap();
        let b = sample_gaussian(&theta, 5, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shape(), (5, 3));
        let one = sample_gaussian(&theta, 1, 1).unwrap();
        assert!(one.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn scores() {
        let v = PairedVertexSet::new(4).unwrap();
        let truth = Pdcg::zero(v);
        let s = score_selection(&truth, &truth).unwrap();
        assert_eq!(s.edges.tnr(), Some(100.0));
        assert_eq!(s.edges.ppv(), None);
        let s = score_selection(&Pdcg::unit(v), &truth).unwrap();
        assert_eq!(s.edges.tnr(), Some(0.0));
        assert_eq!(s.edges.tpr(), None);
    }

    #[test]
    fn empty_benchmark() {
        let mut spec = spec_a();
        spec.replicates = 0;
        let report = run_benchmark(&spec, &[Procedure::Coherent], &BenchOptions::default()).unwrap();
        assert!(report.replicates.is_empty());
        assert!(report.rows.is_empty());
        let mut buf = Vec::new();
        write_csv(&report.rows, true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("scenario,p,procedure,#edges"));
    }
}
