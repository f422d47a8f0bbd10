//! Stepwise backward elimination: the coherent search on the twin lattice
//! and a baseline that walks model inclusion directly.
//!
//! Every candidate is tested against the saturated model and accepted when its
//! p-value exceeds `alpha`. The best model in a set is the one with the
//! largest p-value; ties go to the lower rule tag, then to the lower
//! provenance, then to the smaller graph in canonical order.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_pdcg, FitOptions, SampleMoments};
use crate::graph::{Edge, PairedVertexSet, Pdcg};
use crate::lattice::{
    apply_move, identify_move, neighbour_submodels, submodel_leq, twin_meet, twin_relation, Layer,
    Move, Provenance, Rule, TwinRelation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Procedure {
    Coherent,
    Naive,
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Procedure::Coherent => "coherent",
            Procedure::Naive => "naive",
        })
    }
}

impl std::str::FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Procedure> {
        match s {
            "coherent" => Ok(Procedure::Coherent),
            "naive" => Ok(Procedure::Naive),
            _ => Err(Error::InvalidArgument(format!("unknown procedure {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub alpha: f64,
    /// Maximum number of steps `K`.
    pub max_steps: usize,
    /// Concurrent candidate fits; 1 fits on the calling thread.
    pub parallel_fits: usize,
    #[serde(skip)]
    pub fit: FitOptions,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { alpha: 0.05, max_steps: 1000, parallel_fits: 1, fit: FitOptions::default() }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidArgument("max_steps must be >= 1".into()));
        }
        if self.parallel_fits < 1 {
            return Err(Error::InvalidArgument("parallel_fits must be >= 1".into()));
        }
        Ok(())
    }
}

/// One fitted candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub graph: Pdcg,
    /// How the candidate arises from the step's parent.
    pub rule: Option<Rule>,
    pub layer: Option<Layer>,
    pub provenance: Option<Provenance>,
    pub df: usize,
    pub deviance: Option<f64>,
    pub p_value: Option<f64>,
    pub converged: bool,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Candidate {
    pub fn mv(&self) -> Option<Move> {
        Some(Move { rule: self.rule?, provenance: self.provenance? })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub parent: Pdcg,
    pub candidates: Vec<Candidate>,
    /// Best accepted candidate of this step, if any.
    pub chosen: Option<Pdcg>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub procedure: Procedure,
    pub alpha: f64,
    pub max_steps: usize,
    pub steps: Vec<SearchStep>,
    pub selected: Pdcg,
    pub fitted_models: usize,
    pub wall_seconds: f64,
}

impl SearchTrace {
    pub fn empty(procedure: Procedure, selected: Pdcg) -> SearchTrace {
        SearchTrace {
            procedure,
            alpha: 0.05,
            max_steps: 0,
            steps: vec![],
            selected,
            fitted_models: 0,
            wall_seconds: 0.0,
        }
    }

    pub fn candidates(&self) -> impl Iterator<Item = &Candidate> {
        self.steps.iter().flat_map(|s| s.candidates.iter())
    }
}

struct Fitter<'a> {
    moments: &'a SampleMoments,
    config: SearchConfig,
    pool: Option<rayon::ThreadPool>,
}

impl<'a> Fitter<'a> {
    fn new(moments: &'a SampleMoments, config: SearchConfig) -> Result<Fitter<'a>> {
        config.validate()?;
        if !moments.p().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("p must be even, got {}", moments.p())));
        }
        let pool = if config.parallel_fits > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(config.parallel_fits)
                    .build()
                    .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Fitter { moments, config, pool })
    }

    fn one(&self, graph: &Pdcg, mv: Option<Move>) -> Candidate {
        let p = graph.p() as usize;
        let df = p * (p + 1) / 2 - graph.num_classes();
        let mut c = Candidate {
            graph: graph.clone(),
            rule: mv.map(|m| m.rule),
            layer: mv.map(|m| m.layer()),
            provenance: mv.map(|m| m.provenance),
            df,
            deviance: None,
            p_value: None,
            converged: false,
            accepted: false,
            error: None,
        };
        match fit_pdcg(graph, self.moments, &self.config.fit) {
            Ok(fit) => {
                c.deviance = Some(fit.deviance);
                c.p_value = Some(fit.p_value);
                c.converged = fit.converged;
                c.accepted = fit.converged && fit.p_value > self.config.alpha;
            }
            Err(e) => c.error = Some(e.to_string()),
        }
        c
    }

    /// Fits every item, concurrently when configured; output keeps input order.
    fn fit_all(&self, items: &[(Pdcg, Option<Move>)]) -> Vec<Candidate> {
        match &self.pool {
            Some(pool) => pool.install(|| items.par_iter().map(|(g, m)| self.one(g, *m)).collect()),
            None => items.iter().map(|(g, m)| self.one(g, *m)).collect(),
        }
    }
}

fn cmp_best(a: &Candidate, b: &Candidate) -> Ordering {
    let pa = a.p_value.unwrap_or(f64::NEG_INFINITY);
    let pb = b.p_value.unwrap_or(f64::NEG_INFINITY);
    pb.total_cmp(&pa)
        .then_with(|| a.mv().cmp(&b.mv()))
        .then_with(|| a.graph.cmp(&b.graph))
}

/// The best accepted candidate, if any.
pub fn best_of<'c>(cands: impl IntoIterator<Item = &'c Candidate>) -> Option<&'c Candidate> {
    cands.into_iter().filter(|c| c.accepted).min_by(|a, b| cmp_best(a, b))
}

fn without_edges(g: &Pdcg, drop_edges: &[Edge], drop_ee: &[Edge]) -> Result<Pdcg> {
    let mut q = g.to_quadruplet();
    q.edges.retain(|e| !drop_edges.contains(e));
    q.ee.retain(|e| !drop_ee.contains(e));
    Pdcg::try_from(q)
}

/// Candidate set for the step after `best` was chosen from `accepted`.
///
/// `accepted` is the accepted set of the previous step (it contains `best`),
/// `old` its parent. Returns the distinct graphs `F ∧ best` in canonical
/// order, with `meet` supplying the operation.
pub fn update_candidates<M>(accepted: &[Pdcg], old: &Pdcg, best: &Pdcg, meet: M) -> Result<Vec<Pdcg>>
where
    M: Fn(&Pdcg, &Pdcg) -> Result<Pdcg>,
{
    let vset = old.vset();
    let mut set: BTreeSet<Pdcg> = accepted.iter().cloned().collect();
    let removed: Vec<Edge> = old.edges().difference(best.edges()).copied().collect();
    if let [e] = removed[..] {
        let t = vset.twin_edge(e);
        if t != e {
            // the mirror image of best would meet it below a rejected merge
            let h = without_edges(old, &[t], &[e, t])?;
            set.remove(&h);
        }
    } else if removed.is_empty() && old.atomic_edges() != best.atomic_edges() {
        let merged: Vec<Edge> = old.atomic_edges().difference(best.atomic_edges()).copied().collect();
        if let [e] = merged[..] {
            // the pair just merged may now be dropped as a whole
            let h = without_edges(old, &[e, vset.twin_edge(e)], &[e])?;
            set.insert(h);
        }
    }
    set.remove(best);
    let mut out = BTreeSet::new();
    for f in &set {
        out.insert(meet(f, best)?);
    }
    Ok(out.into_iter().collect())
}

fn step_record(parent: &Pdcg, mut candidates: Vec<Candidate>) -> SearchStep {
    candidates.sort_by(|a, b| a.mv().cmp(&b.mv()).then_with(|| a.graph.cmp(&b.graph)));
    let chosen = best_of(&candidates).map(|c| c.graph.clone());
    SearchStep { parent: parent.clone(), candidates, chosen }
}

fn first_step(fitter: &Fitter, unit: &Pdcg) -> Result<Vec<Candidate>> {
    let vset = unit.vset();
    let item = |rule, provenance| -> Result<(Pdcg, Option<Move>)> {
        let mv = Move { rule, provenance };
        Ok((apply_move(unit, mv)?, Some(mv)))
    };
    let mut upper = Vec::new();
    for i in vset.left() {
        upper.push(item(Rule::I, Provenance::Vertex(i))?);
        upper.push(item(Rule::VI, Provenance::Edge(vset.twin_link(i)))?);
    }
    let left_block: Vec<Edge> = unit.atomic_edges().iter().copied().collect();
    for &e in &left_block {
        upper.push(item(Rule::II, Provenance::Edge(e))?);
    }
    let mut fitted = fitter.fit_all(&upper);

    // lower layer only below rejected merges
    let mut lower = Vec::new();
    for c in &fitted {
        if let (Some(Rule::II), Some(prov), false) = (c.rule, c.provenance, c.accepted) {
            lower.push(item(Rule::III, prov)?);
            lower.push(item(Rule::IV, prov)?);
        }
    }
    fitted.extend(fitter.fit_all(&lower));
    Ok(fitted)
}

/// Coherent backward elimination on the twin lattice, starting from the
/// saturated model.
pub fn coherent_backward_search(moments: &SampleMoments, config: &SearchConfig) -> Result<(Pdcg, SearchTrace)> {
    let start = Instant::now();
    let fitter = Fitter::new(moments, *config)?;
    let vset = PairedVertexSet::new(moments.p() as u32)?;
    let unit = Pdcg::unit(vset);

    let mut steps = vec![step_record(&unit, first_step(&fitter, &unit)?)];
    let mut best = unit;
    let mut k = 1;
    while k < config.max_steps {
        let last = steps.last().expect("at least one step");
        let Some(next) = last.chosen.clone() else { break };
        let accepted: Vec<Pdcg> =
            last.candidates.iter().filter(|c| c.accepted).map(|c| c.graph.clone()).collect();
        let cands = update_candidates(&accepted, &best, &next, twin_meet)?;
        debug_assert!(closure_violations(&next, &cands).is_empty(), "{:?}", closure_violations(&next, &cands));
        let items: Vec<(Pdcg, Option<Move>)> =
            cands.into_iter().map(|h| { let m = identify_move(&h, &next); (h, m) }).collect();
        best = next;
        steps.push(step_record(&best, fitter.fit_all(&items)));
        k += 1;
    }
    if let Some(g) = steps.last().and_then(|s| s.chosen.clone()) {
        best = g;
    }
    Ok(finish(Procedure::Coherent, config, steps, best, start))
}

/// Backward elimination over model inclusion: every step fits all
/// neighbouring submodels of the current model except those below a model
/// already rejected.
pub fn naive_backward_search(moments: &SampleMoments, config: &SearchConfig) -> Result<(Pdcg, SearchTrace)> {
    let start = Instant::now();
    let fitter = Fitter::new(moments, *config)?;
    let vset = PairedVertexSet::new(moments.p() as u32)?;
    let mut best = Pdcg::unit(vset);
    let mut rejected: Vec<Pdcg> = Vec::new();
    let mut steps = Vec::new();
    for _ in 0..config.max_steps {
        let mut items = Vec::new();
        for r in neighbour_submodels(&best) {
            let mut pruned = false;
            for x in &rejected {
                if submodel_leq(&r.graph, x)? {
                    pruned = true;
                    break;
                }
            }
            if !pruned {
                let mv = r.mv();
                items.push((r.graph, Some(mv)));
            }
        }
        let step = step_record(&best, fitter.fit_all(&items));
        rejected.extend(step.candidates.iter().filter(|c| !c.accepted).map(|c| c.graph.clone()));
        let next = step.chosen.clone();
        steps.push(step);
        match next {
            Some(g) => best = g,
            None => break,
        }
    }
    Ok(finish(Procedure::Naive, config, steps, best, start))
}

fn finish(procedure: Procedure, config: &SearchConfig, steps: Vec<SearchStep>, selected: Pdcg, start: Instant) -> (Pdcg, SearchTrace) {
    let fitted_models = steps.iter().map(|s| s.candidates.len()).sum();
    let trace = SearchTrace {
        procedure,
        alpha: config.alpha,
        max_steps: config.max_steps,
        steps,
        selected: selected.clone(),
        fitted_models,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    (selected, trace)
}

pub fn backward_search(procedure: Procedure, moments: &SampleMoments, config: &SearchConfig) -> Result<(Pdcg, SearchTrace)> {
    match procedure {
        Procedure::Coherent => coherent_backward_search(moments, config),
        Procedure::Naive => naive_backward_search(moments, config),
    }
}

/// Conditions a candidate set must meet so that twin meets compute
/// model-inclusion meets: every candidate is a neighbouring submodel of the
/// parent, and candidates are pairwise incomparable in the twin order.
pub fn closure_violations(parent: &Pdcg, candidates: &[Pdcg]) -> Vec<String> {
    let mut out = Vec::new();
    for h in candidates {
        if identify_move(h, parent).is_none() {
            out.push(format!("{h} is not a neighbouring submodel of {parent}"));
        }
    }
    for (i, a) in candidates.iter().enumerate() {
        for b in &candidates[i + 1..] {
            if !matches!(twin_relation(a, b), Ok(TwinRelation::Incomparable)) {
                out.push(format!("{a} and {b} are comparable"));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CoherenceViolation {
    /// `accepted` was accepted although `rejected`, a supermodel, was rejected.
    AcceptedBelowRejected { accepted: Pdcg, rejected: Pdcg },
    /// A lower-layer candidate was fitted in a step whose merge of the same
    /// edge pair was accepted.
    LowerLayerAfterAcceptedMerge { step: usize, edge: Edge },
}

impl fmt::Display for CoherenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoherenceViolation::AcceptedBelowRejected { accepted, rejected } => {
                write!(f, "accepted [{accepted}] lies below rejected [{rejected}]")
            }
            CoherenceViolation::LowerLayerAfterAcceptedMerge { step, edge } => {
                write!(f, "step {step}: lower-layer candidate on {edge} although its merge was accepted")
            }
        }
    }
}

/// Checks a trace for coherence; an empty result means it is coherent.
///
/// No accepted model may lie below a rejected one under model inclusion. For
/// coherent traces, no lower-layer candidate may share a step with the
/// accepted merge of the same edge pair.
pub fn verify_coherence(trace: &SearchTrace) -> Vec<CoherenceViolation> {
    let mut out = Vec::new();
    let accepted: BTreeSet<&Pdcg> = trace.candidates().filter(|c| c.accepted).map(|c| &c.graph).collect();
    let rejected: BTreeSet<&Pdcg> = trace.candidates().filter(|c| !c.accepted).map(|c| &c.graph).collect();
    for a in &accepted {
        for r in &rejected {
            if a != r && submodel_leq(a, r).unwrap_or(false) {
                out.push(CoherenceViolation::AcceptedBelowRejected {
                    accepted: (*a).clone(),
                    rejected: (*r).clone(),
                });
            }
        }
    }
    // the baseline fits every neighbour by design; layer pruning is a property
    // of the coherent procedure only
    if trace.procedure != Procedure::Coherent {
        return out;
    }
    for (k, step) in trace.steps.iter().enumerate() {
        let merged: BTreeSet<Provenance> = step
            .candidates
            .iter()
            .filter(|c| c.accepted && c.rule == Some(Rule::II))
            .filter_map(|c| c.provenance)
            .collect();
        for c in &step.candidates {
            if let (Some(Layer::Lower), Some(Provenance::Edge(e))) = (c.layer, c.provenance) {
                if merged.contains(&Provenance::Edge(e)) {
                    out.push(CoherenceViolation::LowerLayerAfterAcceptedMerge { step: k + 1, edge: e });
                }
            }
        }
    }
    out
}
