//! Top-level reductions: the diagonal problem, SUP, emptiness through SUP and the
//! search for a downward closure as a sum of pure products.

use std::collections::BTreeSet;
use std::fmt;

use crate::cost::{Act, BAutomaton, Dir, Triple};
use crate::error::{Error, Result};
use crate::fta::{saturate_with_witness, Nfta};
use crate::ftt::{builder_chain, builder_downward, builder_intersect, builder_mark, builder_pad};
use crate::schemes::{language_enumerate, Scheme};
use crate::stre::{
    canonical_versatile_tree, diversify, iterator_roots, member, to_nfta, versatile_nfta, Ctx,
    Diversified, Slot, Stre,
};
use crate::trees::{embeds_unchecked, largeness, RankedAlphabet, Tree};

/// Size bound used when a regular answer is cross-checked against enumeration.
const CROSS_CHECK_SIZE: usize = 9;
/// Largest `n` at which the cross-check compares witnesses.
const CROSS_CHECK_N: usize = 3;
/// Candidate products examined by the search before it gives up.
const SEARCH_BUDGET: usize = 200_000;

/// A language given exactly, by a scheme with enumeration bounds, or as a finite set.
#[derive(Debug, Clone)]
pub enum LanguageHandle {
    Exact(Nfta),
    Scheme { scheme: Scheme, size: usize, depth: usize, fuel: usize },
    Finite { alphabet: RankedAlphabet, trees: BTreeSet<Tree> },
}

/// Members found by bounded enumeration.
#[derive(Debug, Clone)]
pub struct Members {
    pub trees: BTreeSet<Tree>,
    /// Every member of size at most `size` is listed.
    pub saturated: bool,
    pub size: usize,
}

impl LanguageHandle {
    pub fn finite(trees: impl IntoIterator<Item = Tree>) -> Result<Self> {
        let trees: BTreeSet<Tree> = trees.into_iter().collect();
        let mut alphabet = RankedAlphabet::new();
        for t in &trees {
            for (l, r) in t.letter_ranks()? {
                alphabet.add(&l, r)?;
            }
        }
        Ok(LanguageHandle::Finite { alphabet, trees })
    }

    /// Letters that can occur in members.
    pub fn alphabet(&self) -> RankedAlphabet {
        match self {
            LanguageHandle::Exact(a) => plain(&a.alphabet),
            LanguageHandle::Scheme { scheme, .. } => plain(&scheme.alphabet),
            LanguageHandle::Finite { alphabet, .. } => alphabet.clone(),
        }
    }

    /// Members of size at most `size`; schemes use their own size bound.
    pub fn members(&self, size: usize) -> Members {
        match self {
            LanguageHandle::Exact(a) => Members { trees: a.enumerate(size).into_iter().collect(), saturated: true, size },
            LanguageHandle::Finite { trees, .. } => Members {
                trees: trees.iter().filter(|t| t.size() <= size).cloned().collect(),
                saturated: true,
                size,
            },
            LanguageHandle::Scheme { scheme, size, depth, fuel } => {
                let e = language_enumerate(scheme, *size, *depth, *fuel);
                Members { trees: e.members, saturated: e.saturated, size: *size }
            }
        }
    }

    /// An automaton for the whole language, when one is available.
    pub fn exact(&self) -> Option<Nfta> {
        match self {
            LanguageHandle::Exact(a) => Some(a.clone()),
            LanguageHandle::Finite { alphabet, trees } => Nfta::from_trees(alphabet, trees).ok(),
            LanguageHandle::Scheme { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            LanguageHandle::Exact(a) => format!("automaton with {} states", a.num_states()),
            LanguageHandle::Finite { trees, .. } => format!("finite set of {} trees", trees.len()),
            LanguageHandle::Scheme { size, depth, fuel, .. } => {
                format!("scheme (size {size}, depth {depth}, fuel {fuel})")
            }
        }
    }
}

fn plain(a: &RankedAlphabet) -> RankedAlphabet {
    let mut out = RankedAlphabet::new();
    for (l, r) in a.plain_letters() {
        out.add(&l, r).expect("letters of one alphabet");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TriState {
    Yes,
    No,
    /// Reason, including the bounds that were not enough.
    Unknown(String),
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TriState::Yes => write!(f, "yes"),
            TriState::No => write!(f, "no"),
            TriState::Unknown(_) => write!(f, "unknown"),
        }
    }
}

/// A verdict with its transcript. `exact` is false when the answer only holds up to bounds.
#[derive(Debug, Clone)]
pub struct Report {
    pub verdict: TriState,
    pub exact: bool,
    pub lines: Vec<String>,
}

impl Report {
    fn new(verdict: TriState, exact: bool, lines: Vec<String>) -> Self {
        Report { verdict, exact, lines }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        if let TriState::Unknown(r) = &self.verdict {
            writeln!(f, "reason: {r}")?;
        }
        writeln!(f, "exact: {}", self.exact)?;
        write!(f, "VERDICT {}", self.verdict)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Size bound for enumerating automaton and finite-set members.
    pub size: usize,
    pub n_max: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { size: 12, n_max: 6 }
    }
}

// ---------------------------------------------------------------- diagonal problem

/// Largest `n ≤ n_max` such that some enumerated member is `n`-large, and whether every
/// `n ≤ n_max` is witnessed.
pub fn diagonal_bruteforce(l: &LanguageHandle, sigma: &BTreeSet<String>, n_max: usize, bounds: Bounds) -> (usize, Report) {
    let m = l.members(bounds.size);
    let best = m.trees.iter().map(|t| largeness(t, sigma).min(n_max)).max();
    let mut lines = vec![
        format!("language: {}", l.describe()),
        format!("members enumerated: {} (saturated: {})", m.trees.len(), m.saturated),
        format!("n_max: {n_max}"),
    ];
    let Some(best) = best else {
        lines.push("no member within bounds".into());
        return (0, Report::new(TriState::No, false, lines));
    };
    lines.push(format!("witnessed_max: {best}"));
    let finite = matches!(l, LanguageHandle::Finite { .. }) && !sigma.is_empty();
    if best >= n_max {
        (best, Report::new(TriState::Yes, false, lines))
    } else {
        (best, Report::new(TriState::No, finite, lines))
    }
}

/// `wit[n]` is a tree of `L(b)` that is `n`-large w.r.t. `sigma`, for `n ≤ cap`.
pub fn large_witnesses(b: &Nfta, sigma: &BTreeSet<String>, cap: usize) -> Vec<Option<Tree>> {
    let b = b.without_eps();
    let sig: Vec<&String> = sigma.iter().collect();
    let rules: Vec<(Vec<usize>, usize, usize)> = b
        .transitions
        .iter()
        .enumerate()
        .map(|(i, t)| (t.children.clone(), t.target, i))
        .collect();
    let sat = saturate_with_witness(
        b.states.len(),
        &rules,
        |&i, kids: &[&Vec<usize>]| {
            let letter = &b.transitions[i].letter;
            let v = sig
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    let below = kids.iter().map(|k| k[j]).min().unwrap_or(0);
                    (below + usize::from(*s == letter)).min(cap)
                })
                .collect();
            vec![v]
        },
        |&i| b.transitions[i].letter.clone(),
    );
    let mut wit: Vec<Option<Tree>> = vec![None; cap + 1];
    for &f in &b.finals {
        for (v, t) in &sat[f] {
            let n = v.iter().copied().min().unwrap_or(cap);
            for slot in wit.iter_mut().take(n + 1) {
                if slot.as_ref().is_none_or(|w| w.size() > t.size()) {
                    *slot = Some(t.clone());
                }
            }
        }
    }
    wit
}

/// Decides whether `L(b)` has `n`-large members for every `n`, testing up to the
/// threshold `|Q|·|Σ| + 1`. A `yes` relies on the threshold and is reported as inexact.
pub fn diagonal_regular(b: &Nfta, sigma: &BTreeSet<String>) -> Report {
    let b = b.without_eps().trim();
    let mut lines = vec![format!("automaton: {} states, {} transitions", b.num_states(), b.transitions.len())];
    if sigma.is_empty() {
        let v = if b.is_empty() { TriState::No } else { TriState::Yes };
        return Report::new(v, true, lines);
    }
    let n_star = b.num_states() * sigma.len() + 1;
    lines.push(format!("threshold n*: {n_star}"));
    let wit = large_witnesses(&b, sigma, n_star);
    for (n, w) in wit.iter().enumerate() {
        if let Some(w) = w {
            if !b.member(w) || largeness(w, sigma) < n {
                lines.push(format!("witness check failed at n = {n}: {w}"));
                return Report::new(TriState::Unknown("witness check failed".into()), false, lines);
            }
        }
    }
    let brute: Vec<Tree> = b.enumerate(CROSS_CHECK_SIZE);
    for n in 0..=CROSS_CHECK_N.min(n_star) {
        let bf = brute.iter().any(|t| largeness(t, sigma) >= n);
        let small_witness = wit[n].as_ref().is_some_and(|w| w.size() <= CROSS_CHECK_SIZE);
        if bf != small_witness {
            lines.push(format!("cross-check disagrees at n = {n}"));
            return Report::new(TriState::Unknown(format!("cross-check disagrees at n = {n}")), false, lines);
        }
    }
    lines.push(format!("cross-checked against enumeration up to size {CROSS_CHECK_SIZE}, n <= {CROSS_CHECK_N}"));
    let best = wit.iter().rposition(Option::is_some);
    match best {
        Some(n) if n >= n_star => {
            lines.push(format!("{n_star}-large member: {}", wit[n_star].as_ref().unwrap()));
            Report::new(TriState::Yes, false, lines)
        }
        Some(n) => {
            lines.push(format!("largest n with an n-large member: {n}"));
            Report::new(TriState::No, true, lines)
        }
        None => {
            lines.push("language is empty".into());
            Report::new(TriState::No, true, lines)
        }
    }
}

/// One-way B-automaton with one counter per letter of `sigma` that `(n-1)`-accepts a tree
/// `T` iff no resolution of the nondeterminism letters in `T` is `n`-large.
///
/// Adam resolves `nd` nodes. Eve keeps a set of candidate letters, counting each on the
/// branch she follows; she may drop a candidate (resetting its counter) while another
/// remains, or switch to claiming the branch never ends. Reaching `⊥` or an infinite
/// branch is a win for Eve.
pub fn diagonal_automaton(sigma: &BTreeSet<String>, alphabet: &RankedAlphabet) -> Result<BAutomaton> {
    if sigma.is_empty() {
        return Err(Error::Precondition("the letter set is empty".into()));
    }
    let (Some(nd), Some(bot)) = (alphabet.nd(), alphabet.bot()) else {
        return Err(Error::Precondition("alphabet needs nondeterminism and bottom letters".into()));
    };
    if sigma.contains(nd) || sigma.contains(bot) {
        return Err(Error::Precondition("counted letters must be ordinary letters".into()));
    }
    let sig: Vec<&String> = sigma.iter().collect();
    let k = sig.len();
    let mut a = BAutomaton::new(k);
    a.alphabet = alphabet.clone();
    let full = (1usize << k) - 1;
    let mut by_mask = vec![usize::MAX; full + 1];
    // initial state first
    for mask in (1..=full).rev() {
        let names: Vec<&str> = (0..k).filter(|j| mask >> j & 1 == 1).map(|j| sig[j].as_str()).collect();
        by_mask[mask] = a.add_state(&format!("S{{{}}}", names.join(",")), 0);
    }
    a.init = by_mask[full];
    let inf = a.add_state("Inf", 0);
    let win = a.add_state("Win", 0);
    let act = |j: Option<usize>, x: Act| -> Vec<Act> {
        (0..k).map(|i| if Some(i) == j { x } else { Act::Eps }).collect()
    };
    let tr = |dir: Dir, act: Vec<Act>, state: usize| Triple { dir, act, state };
    for (l, r) in alphabet.letters() {
        let l = l.to_string();
        a.add_disjunct(win, &l, Vec::new());
        if l == bot {
            for mask in 1..=full {
                a.add_disjunct(by_mask[mask], &l, Vec::new());
            }
            a.add_disjunct(inf, &l, Vec::new());
            continue;
        }
        if l == nd {
            for mask in 1..=full {
                let q = by_mask[mask];
                a.add_disjunct(q, &l, (1..=r).map(|i| tr(Dir::Down(i), act(None, Act::Eps), q)).collect());
            }
            a.add_disjunct(inf, &l, (1..=r).map(|i| tr(Dir::Down(i), act(None, Act::Eps), inf)).collect());
            continue;
        }
        let j = sig.iter().position(|s| **s == l);
        for mask in 1..=full {
            let q = by_mask[mask];
            let counted = j.filter(|&j| mask >> j & 1 == 1);
            let mut moves: Vec<(Vec<Act>, usize)> = Vec::new();
            match counted {
                Some(j) => {
                    moves.push((act(Some(j), Act::Inc), q));
                    if mask.count_ones() >= 2 {
                        moves.push((act(Some(j), Act::Reset), by_mask[mask & !(1 << j)]));
                    }
                }
                None => moves.push((act(None, Act::Eps), q)),
            }
            if r == 0 {
                for (ac, _) in moves {
                    a.add_disjunct(q, &l, vec![tr(Dir::Stay, ac, win)]);
                }
            } else {
                for (ac, q2) in moves {
                    for i in 1..=r {
                        a.add_disjunct(q, &l, vec![tr(Dir::Down(i), ac.clone(), q2)]);
                    }
                }
                a.add_disjunct(q, &l, vec![tr(Dir::Stay, act(None, Act::Eps), inf)]);
            }
        }
        // Inf loses at leaves: no disjuncts
        for i in 1..=r {
            a.add_disjunct(inf, &l, vec![tr(Dir::Down(i), act(None, Act::Eps), inf)]);
        }
    }
    Ok(a)
}

// ---------------------------------------------------------------- SUP

/// Whether `⟦P⟧ ⊆ ↓L` for a diversified pure product `P`, assuming `L ⊆ ⟦P⟧`.
pub fn sup_check(d: &Diversified, l: &LanguageHandle, bounds: Bounds) -> Result<Report> {
    let p_nfta = to_nfta(&d.product);
    match l.exact() {
        Some(m) => {
            if let Some(w) = p_nfta.inclusion_counterexample(&m)? {
                return Err(Error::Precondition(format!("{w} is in the language but not in {}", d.product)));
            }
            sup_core(d, &m, true, bounds)
        }
        None => {
            let mem = l.members(bounds.size);
            if let Some(w) = mem.trees.iter().find(|t| !p_nfta.member(t)) {
                return Err(Error::Precondition(format!("{w} is in the language but not in {}", d.product)));
            }
            let m = Nfta::from_trees(&l.alphabet(), &mem.trees)?;
            let mut r = sup_core(d, &m, false, Bounds { size: mem.size, ..bounds })?;
            r.lines.insert(0, format!("members enumerated: {} (saturated: {})", mem.trees.len(), mem.saturated));
            Ok(r)
        }
    }
}

/// Whether `⟦P⟧ ⊆ ↓L` for a pure product `P` over the letters of `L`: diversifies `P`,
/// marks `↓L` and keeps the marked trees inside `⟦P'⟧` before running SUP.
pub fn sup_unmarked(p: &Stre, l: &LanguageHandle, bounds: Bounds) -> Result<Report> {
    let d = diversify(p);
    let (base, exact, b, note) = match l.exact() {
        Some(m) => (downward_closure_regular(&m)?, true, bounds, l.describe()),
        None => {
            let mem = l.members(bounds.size);
            let note = format!("{}; {} members (saturated: {})", l.describe(), mem.trees.len(), mem.saturated);
            let m = Nfta::from_trees(&l.alphabet(), &mem.trees)?;
            (downward_closure_regular(&m)?, false, Bounds { size: mem.size, ..bounds }, note)
        }
    };
    let marked = builder_mark(&d).apply_to_nfta(&base)?;
    let restricted = builder_intersect(&to_nfta(&d.product)).apply_to_nfta(&marked)?.trim();
    let mut r = sup_core(&d, &restricted, exact, b)?;
    r.lines.insert(0, format!("language: {note}"));
    Ok(r)
}

/// SUP on an automaton. With `exact` unset the automaton stands for a sample of the
/// language and only `n ≤ n_max` is tested.
fn sup_core(d: &Diversified, m: &Nfta, exact: bool, bounds: Bounds) -> Result<Report> {
    let ld = downward_closure_regular(m)?;
    let ct = versatile_nfta(&d.product)?;
    let l1 = builder_intersect(&ct).apply_to_nfta(&ld)?.trim();
    let l2 = builder_pad(d).apply_to_nfta(&l1)?.trim();
    let sigma: BTreeSet<String> = iterator_roots(&d.product).into_iter().map(|(a, _)| a).collect();
    let mut lines = vec![
        format!("product: {}", d.product),
        format!("closure ∩ versatile: {} states; padded: {} states", l1.num_states(), l2.num_states()),
        format!("iterator roots: {{{}}}", sigma.iter().cloned().collect::<Vec<_>>().join(",")),
    ];
    if exact {
        let r = diagonal_regular(&l2, &sigma);
        lines.extend(r.lines);
        return Ok(Report::new(r.verdict, r.exact, lines));
    }
    // Members beyond the size bound may still witness, so a shortfall is `unknown`.
    if sigma.is_empty() {
        let v = if l2.is_empty() {
            TriState::Unknown(format!("no witness among members of size <= {}", bounds.size))
        } else {
            TriState::Yes
        };
        let ex = v == TriState::Yes;
        return Ok(Report::new(v, ex, lines));
    }
    let n_eff = effective_n(&d.product, bounds);
    lines.push(format!("n tested up to {n_eff} (n_max {}, size {})", bounds.n_max, bounds.size));
    let wit = large_witnesses(&l2, &sigma, n_eff.max(1));
    let best = wit.iter().rposition(Option::is_some).unwrap_or(0);
    lines.push(format!("largest n witnessed: {best}"));
    let v = if n_eff >= 1 && best >= n_eff {
        TriState::Yes
    } else {
        TriState::Unknown(format!("largest n witnessed {best} < {} within size {}", n_eff.max(1), bounds.size))
    };
    Ok(Report::new(v, false, lines))
}

/// Largest `n ≤ n_max` whose canonical `n`-large tree fits the size bound.
fn effective_n(p: &Stre, bounds: Bounds) -> usize {
    (1..=bounds.n_max)
        .take_while(|&n| canonical_versatile_tree(p, n).is_ok_and(|t| t.size() <= bounds.size))
        .last()
        .unwrap_or(0)
}

fn fresh(alpha: &RankedAlphabet, base: &str) -> String {
    let mut s = base.to_string();
    while alpha.contains(&s) {
        s.push('\'');
    }
    s
}

/// `yes` iff `L` is nonempty, via SUP on the chain image of `L`.
pub fn emptiness_via_sup(l: &LanguageHandle, bounds: Bounds) -> Result<Report> {
    let alpha = l.alphabet();
    let a = fresh(&alpha, "chain");
    let e = fresh(&alpha, "end");
    let chain = builder_chain(&alpha, &a, &e);
    let product = Stre::iter(vec![Ctx::new(&a, vec![Slot::Hole])], Stre::opt(&e, Vec::new()));
    let marks = [(a.clone(), a.clone()), (e.clone(), e.clone())].into_iter().collect();
    let d = Diversified { product, marks };
    let (m, exact, note) = match l.exact() {
        Some(m) => (m, true, l.describe()),
        None => {
            let mem = l.members(bounds.size);
            let note = format!("{}; {} members (saturated: {})", l.describe(), mem.trees.len(), mem.saturated);
            (Nfta::from_trees(&alpha, &mem.trees)?, false, note)
        }
    };
    let image = chain.apply_to_nfta(&m)?;
    let mut r = sup_core(&d, &image, true, bounds)?;
    r.lines.insert(0, format!("language: {note}"));
    // a member found by enumeration settles nonemptiness
    r.exact = exact || r.verdict == TriState::Yes;
    Ok(r)
}

/// `↓L(b)`, through the downward transducer.
pub fn downward_closure_regular(b: &Nfta) -> Result<Nfta> {
    builder_downward(&b.alphabet).apply_to_nfta(b).map(|a| a.trim())
}

// ---------------------------------------------------------------- search

#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Sum of pure products; `None` when the search was inconclusive.
    pub candidate: Option<Stre>,
    pub report: Report,
}

/// Inclusion of a product in the closure, exactly or through sample embeddings.
enum Closure {
    Exact { complement: Nfta },
    Sampled { members: BTreeSet<Tree>, bounds: Bounds },
}

impl Closure {
    fn admits(&self, p: &Stre) -> bool {
        match self {
            Closure::Exact { complement } => to_nfta(p).product(complement).is_ok_and(|x| x.is_empty()),
            Closure::Sampled { members, bounds } => {
                let n_eff = effective_n(p, *bounds);
                let ns: Vec<usize> = if n_eff == 0 { vec![0] } else { (1..=n_eff).collect() };
                ns.into_iter().all(|n| match canonical_versatile_tree(p, n) {
                    Ok(t) => t.size() <= bounds.size && members.iter().any(|m| embeds_unchecked(&t, m)),
                    Err(_) => false,
                })
            }
        }
    }
}

/// Searches sums of pure products, smallest first, for `↓L`.
pub fn downward_closure_search(l: &LanguageHandle, stre_size_bound: usize, bounds: Bounds) -> Result<SearchResult> {
    let alpha = l.alphabet();
    let mut lines = vec![format!("language: {}", l.describe()), format!("product size bound: {stre_size_bound}")];
    let exact = l.exact();
    let (closure, members, ld) = match &exact {
        Some(m) => {
            let ld = downward_closure_regular(m)?;
            let complement = ld.complement_over(&alpha)?;
            (Closure::Exact { complement }, BTreeSet::new(), Some(ld))
        }
        None => {
            let mem = l.members(bounds.size);
            lines.push(format!("members enumerated: {} (saturated: {})", mem.trees.len(), mem.saturated));
            let b = Bounds { size: mem.size, ..bounds };
            (Closure::Sampled { members: mem.trees.clone(), bounds: b }, mem.trees, None)
        }
    };
    let empty = match &ld {
        Some(ld) => ld.is_empty(),
        None => members.is_empty(),
    };
    if empty {
        lines.push("no members: the closure is 0".into());
        let v = if exact.is_some() { TriState::Yes } else { TriState::Unknown("no member within bounds".into()) };
        let cand = exact.is_some().then(Stre::zero);
        return Ok(SearchResult { candidate: cand, report: Report::new(v, exact.is_some(), lines) });
    }

    let (passing, examined, exhausted) = enumerate_passing(&alpha, stre_size_bound, &closure);
    lines.push(format!("products examined: {examined}; admitted: {}", passing.len()));
    let maximal = maximal_products(passing);
    let sum = Stre(maximal.iter().map(|p| p.0[0].clone()).collect());
    lines.push(format!("maximal admitted products: {}", maximal.len()));

    // (a) the closure lies inside the sum
    let covered = match &ld {
        Some(ld) => {
            let u = to_nfta(&sum);
            match u.inclusion_counterexample(ld)? {
                None => Ok(()),
                Some(w) => Err(w),
            }
        }
        None => match members.iter().find(|t| !member(t, &sum)) {
            None => Ok(()),
            Some(w) => Err(w.clone()),
        },
    };
    if let Err(w) = covered {
        lines.push(format!("uncovered member: {w}"));
        lines.push(format!("frontier: {sum}"));
        let why = if exhausted { "search budget exhausted" } else { "size bound too small" };
        return Ok(SearchResult {
            candidate: None,
            report: Report::new(TriState::Unknown(format!("{why}; uncovered {w}")), false, lines),
        });
    }
    lines.push(format!("candidate: {sum}"));
    lines.push("(a) closure ⊆ candidate: ok".into());

    // (b) each product lies in the closure, through SUP on marked trees
    let mut all_yes = true;
    for p in &maximal {
        let r = sup_unmarked(p, l, bounds)?;
        lines.push(format!("(b) {p}: {}", r.verdict));
        if r.verdict != TriState::Yes {
            all_yes = false;
        }
    }
    let v = if all_yes { TriState::Yes } else { TriState::Unknown("SUP did not confirm every product".into()) };
    let ex = ld.is_some() && all_yes;
    Ok(SearchResult { candidate: Some(sum), report: Report::new(v, ex, lines) })
}

/// Pure products admitted by `closure`, built only from admitted parts, in size order.
fn enumerate_passing(alpha: &RankedAlphabet, bound: usize, closure: &Closure) -> (Vec<Stre>, usize, bool) {
    let letters = alpha.plain_letters();
    let mut passing: Vec<Vec<Stre>> = vec![Vec::new(); bound + 1];
    let mut ctxs: Vec<Vec<Ctx>> = vec![Vec::new(); bound + 1];
    let mut examined = 0usize;
    for s in 1..=bound {
        if s >= 3 {
            ctxs[s - 1] = contexts_of_size(&letters, &passing, s - 1);
        }
        let mut cands: Vec<Stre> = Vec::new();
        for (a, r) in &letters {
            if *r == 0 {
                if s == 1 {
                    cands.push(Stre::opt(a, Vec::new()));
                }
                continue;
            }
            for parts in compositions(s - 1, *r) {
                for kids in choose_each(&parts, &passing) {
                    cands.push(Stre::opt(a, kids));
                }
            }
        }
        for b in 1..s {
            if s < b + 3 {
                break;
            }
            let flat: Vec<&Ctx> = ctxs.iter().flatten().collect();
            let mut sets = Vec::new();
            context_sets(&flat, 0, s - 1 - b, &mut Vec::new(), &mut sets);
            for cs in sets {
                for body in &passing[b] {
                    cands.push(Stre::iter(cs.clone(), body.clone()));
                }
            }
        }
        for c in cands {
            examined += 1;
            if examined > SEARCH_BUDGET {
                return (passing.into_iter().flatten().collect(), examined - 1, true);
            }
            if closure.admits(&c) {
                passing[s].push(c);
            }
        }
    }
    (passing.into_iter().flatten().collect(), examined, false)
}

fn contexts_of_size(letters: &[(String, usize)], passing: &[Vec<Stre>], size: usize) -> Vec<Ctx> {
    let mut out = Vec::new();
    for (a, r) in letters {
        if *r == 0 {
            continue;
        }
        for parts in compositions(size - 1, *r) {
            let choices: Vec<Vec<Slot>> = parts
                .iter()
                .map(|&k| {
                    let mut v: Vec<Slot> = passing[k].iter().cloned().map(Slot::Expr).collect();
                    if k == 1 {
                        v.push(Slot::Hole);
                    }
                    v
                })
                .collect();
            for args in cartesian(&choices) {
                if args.iter().any(|s| matches!(s, Slot::Hole)) {
                    out.push(Ctx::new(a, args));
                }
            }
        }
    }
    out
}

fn context_sets(flat: &[&Ctx], from: usize, left: usize, cur: &mut Vec<Ctx>, out: &mut Vec<Vec<Ctx>>) {
    if left == 0 {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        return;
    }
    for i in from..flat.len() {
        let sz = flat[i].size();
        if sz <= left {
            cur.push(flat[i].clone());
            context_sets(flat, i + 1, left - sz, cur, out);
            cur.pop();
        }
    }
}

/// Ordered ways to write `total` as `parts` positive summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn choose_each(parts: &[usize], passing: &[Vec<Stre>]) -> Vec<Vec<Stre>> {
    let choices: Vec<Vec<Stre>> = parts.iter().map(|&k| passing[k].clone()).collect();
    cartesian(&choices)
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for x in c {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Products not included in another one, keeping the first of each equivalence class.
fn maximal_products(mut ps: Vec<Stre>) -> Vec<Stre> {
    ps.sort_by_key(|p| (p.size(), p.to_string()));
    let autos: Vec<Nfta> = ps.iter().map(to_nfta).collect();
    let incl = |j: usize, i: usize| autos[j].includes(&autos[i]).unwrap_or(false);
    (0..ps.len())
        .filter(|&i| !(0..ps.len()).any(|j| j != i && incl(j, i) && (j < i || !incl(i, j))))
        .map(|i| ps[i].clone())
        .collect()
}

/// Letters of the language grouped for reporting.
pub fn letter_set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{accepts_bounded, Acceptance};
    use crate::schemes::tests::EX21;
    use crate::trees::{all_trees, branch_count_ok, embeds, nd_resolutions, RegularTree};

    fn t(x: &str) -> Tree {
        Tree::parse(x).unwrap()
    }

    fn sig(xs: &[&str]) -> BTreeSet<String> {
        letter_set(xs)
    }

    const WORD: &str = "letters nd/2 bot/0 b1/1 c/0\ntypes S : o\nstart S\nS = nd c (b1 S)\n";

    fn scheme(src: &str, size: usize) -> LanguageHandle {
        LanguageHandle::Scheme { scheme: Scheme::parse(src).unwrap(), size, depth: 12, fuel: 100_000 }
    }

    fn chain_nfta(b: &str, c: &str) -> Nfta {
        Nfta::parse(&format!("{c} -> q\n{b}(q) -> q\nfinal q\n")).unwrap()
    }

    #[test]
    fn bruteforce_oracle() {
        let (w, r) = diagonal_bruteforce(&scheme(EX21, 12), &sig(&["b1"]), 6, Bounds::default());
        assert_eq!((w, r.verdict), (0, TriState::No));
        let (w, r) = diagonal_bruteforce(&scheme(WORD, 12), &sig(&["b1"]), 6, Bounds::default());
        assert_eq!((w, r.verdict), (6, TriState::Yes));
        let (_, r) = diagonal_bruteforce(&scheme(EX21, 12), &BTreeSet::new(), 6, Bounds::default());
        assert_eq!(r.verdict, TriState::Yes);
    }

    #[test]
    fn regular_oracle() {
        let b = chain_nfta("b1", "c");
        assert_eq!(diagonal_regular(&b, &sig(&["b1"])).verdict, TriState::Yes);
        let fin = Nfta::from_trees(&b.alphabet, &[t("b1(b1(c))"), t("c")]).unwrap();
        let r = diagonal_regular(&fin, &sig(&["b1"]));
        assert_eq!((r.verdict, r.exact), (TriState::No, true));
        assert_eq!(diagonal_regular(&fin, &BTreeSet::new()).verdict, TriState::Yes);
        let none = Nfta::empty(b.alphabet.clone());
        assert_eq!(diagonal_regular(&none, &BTreeSet::new()).verdict, TriState::No);
        // both letters must grow on every branch
        let two = Nfta::parse("c -> q\nb1(q) -> q\nb2(q) -> q\nfinal q\n").unwrap();
        assert_eq!(diagonal_regular(&two, &sig(&["b1", "b2"])).verdict, TriState::Yes);
        let split = Nfta::parse("c -> p\nb1(p) -> p\nc -> r\nb2(r) -> r\nfinal p r\n").unwrap();
        assert_eq!(diagonal_regular(&split, &sig(&["b1", "b2"])).verdict, TriState::No);
    }

    fn game(tree: &RegularTree, s: &BTreeSet<String>, n: u64) -> bool {
        let alpha = RankedAlphabet::parse_decls("nd/2 bot/0 a/2 b1/1 b2/1 c/0").unwrap();
        let mut alpha = alpha;
        alpha.set_nd("nd").unwrap();
        alpha.set_bot("bot").unwrap();
        let a = diagonal_automaton(s, &alpha).unwrap();
        matches!(accepts_bounded(&a, tree, n, 0).unwrap(), Acceptance::AcceptedAt(k) if k <= n)
    }

    fn reg(src: &str) -> RegularTree {
        RegularTree::parse(&format!("root X\n{src}")).unwrap()
    }

    #[test]
    fn diagonal_automaton_examples() {
        let all_c = reg("X = nd(X, Y)\nY = c\n");
        assert!(game(&all_c, &sig(&["b1"]), 0));
        let chain = reg("X = nd(C, B)\nC = c\nB = b1(X)\n");
        for n in 1..=4u64 {
            assert!(!game(&chain, &sig(&["b1"]), n - 1), "n = {n}");
        }
        assert!(game(&chain, &sig(&["b2"]), 0));
    }

    #[test]
    fn diagonal_automaton_matches_resolutions() {
        let trees = [
            "X = nd(C, B)\nC = c\nB = b1(X)\n",
            "X = nd(A, B)\nA = a(C, C)\nC = c\nB = b1(X)\n",
            "X = a(Y, Z)\nY = nd(C, B)\nB = b1(Y)\nZ = nd(C, D)\nD = b2(Z)\nC = c\n",
            "X = nd(X, Y)\nY = b1(C)\nC = c\n",
            "X = nd(U, B)\nU = bot\nB = b1(X)\n",
        ];
        for src in trees {
            let tree = reg(src);
            let pref = tree.unfold(14, Some("bot"));
            let mut alpha = RankedAlphabet::parse_decls("nd/2 bot/0 a/2 b1/1 b2/1 c/0").unwrap();
            alpha.set_nd("nd").unwrap();
            alpha.set_bot("bot").unwrap();
            let members = nd_resolutions(&pref, &alpha, 12);
            for s in [sig(&["b1"]), sig(&["b2"]), sig(&["b1", "b2"])] {
                for n in 1..=3usize {
                    let large = members.iter().any(|m| branch_count_ok(m, &s, n));
                    assert_eq!(game(&tree, &s, n as u64 - 1), !large, "{src} {s:?} n={n}");
                }
            }
        }
    }

    fn marked_chain() -> Diversified {
        diversify(&Stre::parse("(b1(#))*.c?()").unwrap())
    }

    #[test]
    fn sup_examples() {
        let d = marked_chain();
        let l = LanguageHandle::Exact(chain_nfta("b1_1", "c_1"));
        assert_eq!(sup_check(&d, &l, Bounds::default()).unwrap().verdict, TriState::Yes);
        let l = LanguageHandle::finite([t("c_1")]).unwrap();
        assert_eq!(sup_check(&d, &l, Bounds::default()).unwrap().verdict, TriState::No);
        let bad = LanguageHandle::finite([t("c")]).unwrap();
        assert!(matches!(sup_check(&d, &bad, Bounds::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn sup_on_words() {
        let d = diversify(&Stre::parse("(a(#))*.(b(#))*.e?()").unwrap());
        assert_eq!(d.product.to_string(), "(a_1(#))*.(b_1(#))*.e_1?()");
        let all = Nfta::parse("e_1 -> q\nb_1(q) -> q\na_1(q) -> p\na_1(p) -> p\nfinal p q\n").unwrap();
        let r = sup_check(&d, &LanguageHandle::Exact(all), Bounds::default()).unwrap();
        assert_eq!(r.verdict, TriState::Yes);
        let short = Nfta::parse(
            "e_1 -> q0\nb_1(q0) -> q1\nb_1(q1) -> q2\na_1(q0) -> p\na_1(q1) -> p\na_1(q2) -> p\na_1(p) -> p\nfinal p q0 q1 q2\n",
        )
        .unwrap();
        let r = sup_check(&d, &LanguageHandle::Exact(short), Bounds::default()).unwrap();
        assert_eq!(r.verdict, TriState::No);
    }

    #[test]
    fn sup_on_scheme_sample() {
        let d = marked_chain();
        let src = "letters nd/2 bot/0 b1_1/1 c_1/0\ntypes S : o\nstart S\nS = nd c_1 (b1_1 S)\n";
        let r = sup_check(&d, &scheme(src, 12), Bounds::default()).unwrap();
        assert_eq!((r.verdict, r.exact), (TriState::Yes, false));
    }

    #[test]
    fn emptiness() {
        let b = Bounds::default();
        let c = LanguageHandle::finite([t("c")]).unwrap();
        assert_eq!(emptiness_via_sup(&c, b).unwrap().verdict, TriState::Yes);
        let e = LanguageHandle::Exact(Nfta::empty(RankedAlphabet::parse_decls("c/0").unwrap()));
        assert_eq!(emptiness_via_sup(&e, b).unwrap().verdict, TriState::No);
        let r = emptiness_via_sup(&scheme(EX21, 9), b).unwrap();
        assert_eq!((r.verdict, r.exact), (TriState::Yes, true));
    }

    #[test]
    fn closure_of_one_tree() {
        let x = t("a(b1(c),b2(c))");
        let alpha = RankedAlphabet::parse_decls("a/2 b1/1 b2/1 c/0").unwrap();
        let d = downward_closure_regular(&Nfta::from_trees(&alpha, [&x]).unwrap()).unwrap();
        let got: BTreeSet<Tree> = d.enumerate(5).into_iter().collect();
        let want: BTreeSet<Tree> =
            all_trees(&alpha, 5).into_iter().filter(|s| embeds(s, &x).unwrap()).collect();
        assert_eq!(got, want);
        assert_eq!(got.len(), 7);
        assert!(downward_closure_regular(&Nfta::empty(alpha)).unwrap().is_empty());
    }

    #[test]
    fn search_small_finite() {
        let r = downward_closure_search(&LanguageHandle::finite([t("c")]).unwrap(), 6, Bounds::default()).unwrap();
        assert_eq!(r.candidate.unwrap().to_string(), "c?()");
        let l = LanguageHandle::finite([t("b1(c)"), t("c")]).unwrap();
        let r = downward_closure_search(&l, 6, Bounds::default()).unwrap();
        assert_eq!(r.report.verdict, TriState::Yes);
        assert!(r.report.exact);
        assert_eq!(r.candidate.unwrap().to_string(), "b1?(c?())");
    }

    #[test]
    fn search_regular_chain() {
        let l = LanguageHandle::Exact(Nfta::parse("c -> q\nb1(q) -> p\nb1(p) -> p\nfinal p\n").unwrap());
        let r = downward_closure_search(&l, 6, Bounds::default()).unwrap();
        let want = Stre::parse("(b1(#))*.c?()").unwrap();
        assert!(crate::stre::stre_equivalent(r.candidate.as_ref().unwrap(), &want));
        assert_eq!(r.report.verdict, TriState::Yes);
    }

    #[test]
    fn search_example_scheme() {
        let l = scheme(EX21, 15);
        let r = downward_closure_search(&l, 9, Bounds { size: 15, n_max: 6 }).unwrap();
        let want = Stre::parse("a?((b1(#))*.c?(), (b2(#))*.c?())").unwrap();
        let got = r.candidate.expect("candidate");
        assert!(crate::stre::stre_equivalent(&got, &want), "{got}\n{}", r.report);
    }
}
