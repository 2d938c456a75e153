mod common;

use std::collections::BTreeSet;

use common::*;
use downclose::ftt::builder_downward;
use downclose::pipeline::{downward_closure_regular, emptiness_via_sup, Bounds, LanguageHandle, TriState};
use downclose::schemes::bohm_prefix;
use downclose::stre::{is_irreducible, normalize, stre_equivalent, to_nfta};
use downclose::trees::{downward_closure_of_tree, embeds_unchecked};
use downclose::{Nfta, Scheme, Tree};

fn finite_language(r: &mut Rng8) -> BTreeSet<Tree> {
    (0..3).map(|_| tree(r, 5)).collect()
}

#[test]
fn bohm_prefix_refines_with_depth_and_fuel() {
    for name in ["pair_chains.scm", "word.scm"] {
        let g = Scheme::parse(&input(name)).unwrap();
        let shallow = bohm_prefix(&g, 5, 10_000);
        let deep = bohm_prefix(&g, 9, 100_000);
        assert!(shallow.agrees_with(&deep), "{name}: {shallow} vs {deep}");
        assert!(deep.decided_nodes() >= shallow.decided_nodes());
        assert!(bohm_prefix(&g, 5, 100_000).agrees_with(&deep));
    }
}

#[test]
fn transducer_on_automaton_matches_tree_by_tree() {
    let alpha = alphabet();
    let down = builder_downward(&alpha);
    assert!(down.is_linear());
    let mut r = rng(21);
    for _ in 0..30 {
        let l = finite_language(&mut r);
        let img = down.apply_to_nfta(&Nfta::from_trees(&alpha, &l).unwrap()).unwrap();
        let by_tree: BTreeSet<Tree> = l.iter().flat_map(|t| down.apply_to_tree(t, 50)).collect();
        let by_nfta: BTreeSet<Tree> = img.enumerate(12).into_iter().collect();
        assert_eq!(by_tree, by_nfta, "language {l:?}");
    }
}

#[test]
fn regular_closure_of_finite_language() {
    let alpha = alphabet();
    let mut r = rng(22);
    for _ in 0..30 {
        let l = finite_language(&mut r);
        let want: BTreeSet<Tree> = l.iter().flat_map(downward_closure_of_tree).collect();
        let dc = downward_closure_regular(&Nfta::from_trees(&alpha, &l).unwrap()).unwrap();
        let got: BTreeSet<Tree> = dc.enumerate(12).into_iter().collect();
        assert_eq!(got, want);
        assert!(got.iter().all(|s| l.iter().any(|t| embeds_unchecked(s, t))));
    }
}

#[test]
fn normalize_is_irreducible_and_equivalent() {
    let mut r = rng(23);
    for _ in 0..80 {
        let s = any(&mut r, 3);
        let n = normalize(&s);
        assert!(is_irreducible(&n), "{s} -> {n}");
        assert!(stre_equivalent(&s, &n), "{s} -> {n}");
    }
}

#[test]
fn stre_automata_are_downward_closed() {
    let mut r = rng(24);
    for _ in 0..40 {
        let s = any(&mut r, 3);
        let a = to_nfta(&s);
        for t in a.enumerate(7) {
            for u in downward_closure_of_tree(&t) {
                assert!(a.member(&u), "{s}: {u} below {t}");
            }
        }
    }
}

#[test]
fn emptiness_of_finite_handles() {
    let mut r = rng(25);
    let l = finite_language(&mut r);
    let h = LanguageHandle::finite(l).unwrap();
    let rep = emptiness_via_sup(&h, Bounds::default()).unwrap();
    assert_eq!(rep.verdict, TriState::Yes);
    assert!(rep.exact);
}
