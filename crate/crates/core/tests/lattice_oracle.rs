//! The p = 4 model space checked exhaustively against brute-force oracles.

mod common;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use common::Space;
use pdrcon::lattice::{
    enumerate_all, identify_move, meet_for_search, neighbour_submodels, submodel_leq, twin_covers, twin_leq,
    twin_meet, twin_relation, TwinRelation,
};
use pdrcon::search::{closure_violations, update_candidates};
use pdrcon::{Layer, PairedVertexSet, Pdcg, Provenance, Rule};

fn space() -> &'static Space {
    static SPACE: OnceLock<Space> = OnceLock::new();
    SPACE.get_or_init(|| Space::new(4))
}

#[test]
fn enumeration_agrees() {
    let s = space();
    assert_eq!(s.graphs.len(), 400);
    let lib: BTreeSet<Pdcg> = enumerate_all(4).unwrap().collect();
    let oracle: BTreeSet<Pdcg> = s.graphs.iter().cloned().collect();
    assert_eq!(lib, oracle);
    assert_eq!(common::enumerate(2).len(), 4);
    assert_eq!(enumerate_all(2).unwrap().count(), 4);
}

#[test]
fn class_counts_agree() {
    for (g, c) in space().graphs.iter().zip(&space().classes) {
        assert_eq!(g.num_classes(), c.len(), "{g}");
    }
}

#[test]
fn submodel_relation_agrees() {
    let s = space();
    for a in 0..s.graphs.len() {
        for b in 0..s.graphs.len() {
            assert_eq!(submodel_leq(&s.graphs[a], &s.graphs[b]).unwrap(), s.leq[a][b], "{} vs {}", s.graphs[a], s.graphs[b]);
        }
    }
}

#[test]
fn covers_drop_exactly_one_class() {
    let s = space();
    for g in 0..s.graphs.len() {
        for &h in &s.covers[g] {
            assert_eq!(s.classes[h].len() + 1, s.classes[g].len());
        }
        for h in 0..s.graphs.len() {
            if s.leq[h][g] && s.classes[h].len() + 1 == s.classes[g].len() {
                assert!(s.covered_by(h, g));
            }
        }
    }
}

#[test]
fn twin_order_agrees() {
    let s = space();
    for a in 0..s.graphs.len() {
        for b in 0..s.graphs.len() {
            let below = common::twin_below(&s.quads[a], &s.quads[b]);
            assert_eq!(twin_leq(&s.graphs[a], &s.graphs[b]).unwrap(), below);
            let cover = below && common::twin_rank(&s.quads[a]) + 1 == common::twin_rank(&s.quads[b]);
            assert_eq!(twin_covers(&s.graphs[a], &s.graphs[b]).unwrap(), cover);
        }
    }
}

#[test]
fn submodels_lie_below_in_twin_order() {
    let s = space();
    for h in 0..s.graphs.len() {
        for g in 0..s.graphs.len() {
            if !s.leq[h][g] {
                continue;
            }
            assert!(twin_leq(&s.graphs[h], &s.graphs[g]).unwrap());
            if twin_covers(&s.graphs[h], &s.graphs[g]).unwrap() {
                assert!(s.covered_by(h, g), "{} under {}", s.graphs[h], s.graphs[g]);
            }
        }
    }
}

#[test]
fn neighbours_are_the_covers() {
    let s = space();
    for g in 0..s.graphs.len() {
        let records = neighbour_submodels(&s.graphs[g]);
        let found: BTreeSet<usize> = records.iter().map(|r| s.id(&r.graph)).collect();
        assert_eq!(found.len(), records.len(), "duplicate neighbours of {}", s.graphs[g]);
        let expected: BTreeSet<usize> = s.covers[g].iter().copied().collect();
        assert_eq!(found, expected, "neighbours of {}", s.graphs[g]);
        for r in &records {
            assert_eq!(r.layer, r.rule.layer());
            assert_eq!(identify_move(&r.graph, &s.graphs[g]), Some(r.mv()));
        }
    }
}

#[test]
fn unit_has_ten_neighbours_in_two_layers() {
    let unit = Pdcg::unit(PairedVertexSet::new(4).unwrap());
    let records = neighbour_submodels(&unit);
    assert_eq!(records.len(), 10);
    assert_eq!(records.iter().filter(|r| r.layer == Layer::Upper).count(), 6);
    assert_eq!(records.iter().filter(|r| r.layer == Layer::Lower).count(), 4);
}

#[test]
fn neighbour_pairs_comparable_only_across_layers() {
    let s = space();
    for g in 0..s.graphs.len() {
        let records = neighbour_submodels(&s.graphs[g]);
        for a in &records {
            for b in &records {
                if a == b {
                    continue;
                }
                let rel = twin_relation(&a.graph, &b.graph).unwrap();
                let same_edge = a.provenance == b.provenance;
                let expect_below = same_edge && a.layer == Layer::Lower && b.rule == Rule::II;
                let expect_above = same_edge && b.layer == Layer::Lower && a.rule == Rule::II;
                let expected = if expect_below {
                    TwinRelation::Below
                } else if expect_above {
                    TwinRelation::Above
                } else {
                    TwinRelation::Incomparable
                };
                assert_eq!(rel, expected, "{} / {}", a.mv(), b.mv());
                if expect_below {
                    assert!(twin_covers(&a.graph, &b.graph).unwrap());
                }
            }
        }
    }
}

#[test]
fn twin_meets_compute_inclusion_meets_of_neighbours() {
    let s = space();
    for g in 0..s.graphs.len() {
        let records = neighbour_submodels(&s.graphs[g]);
        for (i, a) in records.iter().enumerate() {
            for b in &records[i + 1..] {
                let want = &s.graphs[s.meet(s.id(&a.graph), s.id(&b.graph))];
                assert_eq!(&meet_for_search(&a.graph, &b.graph, &s.graphs[g]).unwrap(), want);
                if twin_relation(&a.graph, &b.graph).unwrap() == TwinRelation::Incomparable {
                    assert_eq!(&twin_meet(&a.graph, &b.graph).unwrap(), want);
                } else {
                    // comparable pair: the meet comes from the two single-edge removals
                    let Provenance::Edge(e) = a.provenance else { panic!("edge moves only") };
                    let lo = |rule| pdrcon::lattice::apply_move(&s.graphs[g], pdrcon::Move { rule, provenance: Provenance::Edge(e) }).unwrap();
                    assert_eq!(&twin_meet(&lo(Rule::III), &lo(Rule::IV)).unwrap(), want);
                }
            }
        }
    }
}

/// All twin-incomparable subsets of `records` with at least two members.
fn antichains(graphs: &[Pdcg]) -> Vec<Vec<usize>> {
    let n = graphs.len();
    let mut comparable = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            comparable[a][b] = a != b && twin_relation(&graphs[a], &graphs[b]).unwrap() != TwinRelation::Incomparable;
        }
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        if members.len() >= 2 && members.iter().all(|&a| members.iter().all(|&b| !comparable[a][b])) {
            out.push(members);
        }
    }
    out
}

#[test]
fn meets_with_a_chosen_neighbour_stay_closed() {
    let s = space();
    let mut checked = 0usize;
    for g in 0..s.graphs.len() {
        let hs: Vec<Pdcg> = neighbour_submodels(&s.graphs[g]).into_iter().map(|r| r.graph).collect();
        for a in antichains(&hs) {
            for &k in &a {
                let h = &hs[k];
                let b: BTreeSet<Pdcg> =
                    a.iter().filter(|&&f| f != k).map(|&f| twin_meet(&hs[f], h).unwrap()).collect();
                let b: Vec<Pdcg> = b.into_iter().collect();
                for m in &b {
                    assert!(s.covered_by(s.id(m), s.id(h)), "{m} not covered by {h}");
                }
                assert!(closure_violations(h, &b).is_empty());
                checked += 1;
            }
        }
    }
    assert!(checked > 10_000, "only {checked} cases");
}

#[test]
fn candidate_update_matches_brute_force_meet() {
    let s = space();
    let oracle = |a: &Pdcg, b: &Pdcg| Ok(s.graphs[s.meet(s.id(a), s.id(b))].clone());
    for g in 0..s.graphs.len() {
        let old = &s.graphs[g];
        let hs: Vec<Pdcg> = neighbour_submodels(old).into_iter().map(|r| r.graph).collect();
        for a in antichains(&hs) {
            let accepted: Vec<Pdcg> = a.iter().map(|&k| hs[k].clone()).collect();
            for best in &accepted {
                let lib = update_candidates(&accepted, old, best, twin_meet).unwrap();
                let reference = update_candidates(&accepted, old, best, oracle).unwrap();
                assert_eq!(lib, reference, "parent {old}, best {best}");
                assert!(closure_violations(best, &lib).is_empty(), "parent {old}, best {best}");
            }
        }
    }
}
