//! Seeded random generators shared by integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use downclose::stre::{Ctx, Pre, Slot, Stre};
use downclose::{Nfta, RankedAlphabet, RegularTree, Tree};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn input(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "inputs", name].iter().collect();
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn letters() -> Vec<(&'static str, usize)> {
    vec![("a", 2), ("b", 1), ("c", 0), ("d", 0)]
}

pub fn alphabet() -> RankedAlphabet {
    RankedAlphabet::from_pairs(&letters()).unwrap()
}

/// Random tree with roughly `budget` nodes.
pub fn tree(r: &mut Rng8, budget: usize) -> Tree {
    let ls = letters();
    let pool: Vec<&(&str, usize)> = if budget <= 1 {
        ls.iter().filter(|(_, k)| *k == 0).collect()
    } else {
        ls.iter().collect()
    };
    let (l, k) = **pool.choose(r).unwrap();
    let share = budget.saturating_sub(1) / k.max(1);
    Tree::node(
        l,
        (0..k)
            .map(|_| {
                let b = r.gen_range(1..=share.max(1));
                tree(r, b)
            })
            .collect(),
    )
}

/// A tree that embeds into `t`: nodes are randomly replaced by one of their children.
pub fn shrink(r: &mut Rng8, t: &Tree) -> Tree {
    if !t.children.is_empty() && r.gen_bool(0.3) {
        let i = r.gen_range(0..t.children.len());
        return shrink(r, &t.children[i]);
    }
    Tree::node(&t.label, t.children.iter().map(|c| shrink(r, c)).collect())
}

/// A tree into which `t` embeds: `t` is placed below a random context.
pub fn grow(r: &mut Rng8, t: &Tree) -> Tree {
    let mut cur = t.clone();
    for _ in 0..r.gen_range(1..=2) {
        cur = if r.gen_bool(0.5) {
            Tree::node("b", vec![cur])
        } else if r.gen_bool(0.5) {
            Tree::node("a", vec![cur, tree(r, 3)])
        } else {
            Tree::node("a", vec![tree(r, 3), cur])
        };
    }
    cur
}

fn pure_pre(r: &mut Rng8, depth: usize) -> Pre {
    let ls = letters();
    if depth == 0 || r.gen_bool(0.35) {
        let leaves: Vec<&(&str, usize)> = ls.iter().filter(|(_, k)| *k == 0).collect();
        let inner: Vec<&(&str, usize)> = ls.iter().filter(|(_, k)| *k > 0).collect();
        let (l, k) = if depth == 0 { **leaves.choose(r).unwrap() } else { **inner.choose(r).unwrap() };
        return Pre::Opt(l.into(), (0..k).map(|_| Stre::single(pure_pre(r, depth.saturating_sub(1)))).collect());
    }
    let n = r.gen_range(1..=2);
    let mut cs: Vec<Ctx> = (0..n).map(|_| pure_ctx(r, depth - 1)).collect();
    cs.sort();
    cs.dedup();
    Pre::Iter(cs, Box::new(Stre::single(pure_pre(r, depth - 1))))
}

fn pure_ctx(r: &mut Rng8, depth: usize) -> Ctx {
    if r.gen_bool(0.5) {
        return Ctx::new("b", vec![Slot::Hole]);
    }
    let hole_at = r.gen_range(0..2);
    let two = r.gen_bool(0.3);
    let args = (0..2)
        .map(|i| {
            if i == hole_at || two {
                Slot::Hole
            } else {
                Slot::Expr(Stre::single(pure_pre(r, depth.min(1))))
            }
        })
        .collect();
    Ctx::new("a", args)
}

/// Random pure product over `a/2 b/1 c/0 d/0`.
pub fn pure_product(r: &mut Rng8, depth: usize) -> Stre {
    Stre::single(pure_pre(r, depth))
}

fn any_pre(r: &mut Rng8, depth: usize) -> Pre {
    if depth == 0 || r.gen_bool(0.45) {
        let (l, k) = *letters().choose(r).unwrap();
        let k = if depth == 0 { 0 } else { k };
        let l = if depth == 0 && k == 0 { *["c", "d"].choose(r).unwrap() } else { l };
        return Pre::Opt(l.into(), (0..k).map(|_| any(r, depth.saturating_sub(1))).collect());
    }
    let n = r.gen_range(0..=2);
    let cs = (0..n)
        .map(|_| {
            let (l, k) = *[("a", 2), ("b", 1)].choose(r).unwrap();
            let args = (0..k)
                .map(|_| if r.gen_bool(0.6) { Slot::Hole } else { Slot::Expr(any(r, 0)) })
                .collect();
            Ctx::new(l, args)
        })
        .collect();
    Pre::Iter(cs, Box::new(any(r, depth - 1)))
}

/// Random expression, including `0`, sums and hole-free contexts.
pub fn any(r: &mut Rng8, depth: usize) -> Stre {
    if r.gen_bool(0.08) {
        return Stre::zero();
    }
    let n = if r.gen_bool(0.3) { 2 } else { 1 };
    Stre((0..n).map(|_| any_pre(r, depth)).collect())
}

/// Random automaton over `a/2 b/1 c/0`.
pub fn nfta(r: &mut Rng8) -> Nfta {
    let alpha = RankedAlphabet::from_pairs(&[("a", 2), ("b", 1), ("c", 0)]).unwrap();
    let mut a = Nfta::new(alpha);
    let n = r.gen_range(1..=4);
    for i in 0..n {
        a.add_state(format!("q{i}"));
    }
    for _ in 0..r.gen_range(0..=6) {
        match r.gen_range(0..3) {
            0 => a.add_transition("c", vec![], r.gen_range(0..n)),
            1 => a.add_transition("b", vec![r.gen_range(0..n)], r.gen_range(0..n)),
            _ => a.add_transition("a", vec![r.gen_range(0..n), r.gen_range(0..n)], r.gen_range(0..n)),
        }
    }
    a.set_final(r.gen_range(0..n));
    a
}

/// Random regular tree with nondeterminism nodes over `nd/2 bot/0 a/2 b1/1 b2/1 c/0`.
pub fn nd_regular_tree(r: &mut Rng8) -> RegularTree {
    let n = r.gen_range(2..=5);
    let name = |i: usize| format!("N{i}");
    let mut src = String::from("root N0\n");
    for i in 0..n {
        let pick = |r: &mut Rng8| name(r.gen_range(0..n));
        let rhs = match if i == 0 { 0 } else { r.gen_range(0..10) } {
            0..=3 => format!("nd({}, {})", pick(r), pick(r)),
            4 => format!("b1({})", pick(r)),
            5 => format!("b2({})", pick(r)),
            6 => format!("a({}, {})", pick(r), pick(r)),
            7 => "bot".to_string(),
            _ => "c".to_string(),
        };
        src.push_str(&format!("{} = {rhs}\n", name(i)));
    }
    RegularTree::parse(&src).unwrap()
}
