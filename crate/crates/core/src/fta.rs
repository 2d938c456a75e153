//! Bottom-up nondeterministic finite tree automata.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;

use crate::error::{parse_err, Error, Result};
use crate::trees::{strip_comment, RankedAlphabet, TermParser, Tree};

pub type State = usize;

/// Transition `letter(children) -> target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub letter: String,
    pub children: Vec<State>,
    pub target: State,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfta {
    pub alphabet: RankedAlphabet,
    pub states: Vec<String>,
    pub finals: BTreeSet<State>,
    pub transitions: Vec<Transition>,
    /// `(p, q)`: every tree accepted in `p` is also accepted in `q`.
    pub eps: Vec<(State, State)>,
}

impl Nfta {
    pub fn new(alphabet: RankedAlphabet) -> Self {
        Nfta {
            alphabet,
            states: Vec::new(),
            finals: BTreeSet::new(),
            transitions: Vec::new(),
            eps: Vec::new(),
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> State {
        self.states.push(name.into());
        self.states.len() - 1
    }

    pub fn add_transition(&mut self, letter: &str, children: Vec<State>, target: State) {
        self.transitions.push(Transition {
            letter: letter.to_string(),
            children,
            target,
        });
    }

    pub fn add_eps(&mut self, from: State, to: State) {
        if from != to {
            self.eps.push((from, to));
        }
    }

    pub fn set_final(&mut self, q: State) {
        self.finals.insert(q);
    }

    /// Automaton with no final states.
    pub fn empty(alphabet: RankedAlphabet) -> Self {
        Nfta::new(alphabet)
    }

    /// Accepts every tree over `alphabet`.
    pub fn universal(alphabet: &RankedAlphabet) -> Self {
        let mut a = Nfta::new(alphabet.clone());
        let q = a.add_state("all");
        for (l, r) in alphabet.letters() {
            a.add_transition(l, vec![q; r], q);
        }
        a.set_final(q);
        a
    }

    /// Accepts exactly the given trees; shared subtrees share states.
    pub fn from_trees<'a>(alphabet: &RankedAlphabet, trees: impl IntoIterator<Item = &'a Tree>) -> Result<Self> {
        let mut a = Nfta::new(alphabet.clone());
        let mut ids: HashMap<Tree, State> = HashMap::new();
        fn go(a: &mut Nfta, t: &Tree, ids: &mut HashMap<Tree, State>) -> State {
            if let Some(&q) = ids.get(t) {
                return q;
            }
            let cs: Vec<State> = t.children.iter().map(|c| go(a, c, ids)).collect();
            let q = a.add_state(t.to_string());
            a.add_transition(&t.label, cs, q);
            ids.insert(t.clone(), q);
            q
        }
        for t in trees {
            for (l, r) in t.letter_ranks()? {
                a.alphabet.add(&l, r)?;
            }
            let q = go(&mut a, t, &mut ids);
            a.set_final(q);
        }
        Ok(a)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Reflexive-transitive closure of the epsilon edges, per state.
    fn eps_closure(&self) -> Vec<Vec<State>> {
        let n = self.states.len();
        let mut succ = vec![Vec::new(); n];
        for &(p, q) in &self.eps {
            succ[p].push(q);
        }
        (0..n)
            .map(|s| {
                let mut seen = vec![false; n];
                let mut stack = vec![s];
                seen[s] = true;
                let mut out = Vec::new();
                while let Some(p) = stack.pop() {
                    out.push(p);
                    for &q in &succ[p] {
                        if !seen[q] {
                            seen[q] = true;
                            stack.push(q);
                        }
                    }
                }
                out.sort_unstable();
                out
            })
            .collect()
    }

    /// Equivalent automaton without epsilon edges.
    pub fn without_eps(&self) -> Nfta {
        if self.eps.is_empty() {
            return self.clone();
        }
        let cl = self.eps_closure();
        let mut out = Nfta {
            alphabet: self.alphabet.clone(),
            states: self.states.clone(),
            finals: self.finals.clone(),
            transitions: Vec::new(),
            eps: Vec::new(),
        };
        let mut seen = BTreeSet::new();
        for t in &self.transitions {
            for &q in &cl[t.target] {
                let nt = Transition {
                    letter: t.letter.clone(),
                    children: t.children.clone(),
                    target: q,
                };
                if seen.insert(nt.clone()) {
                    out.transitions.push(nt);
                }
            }
        }
        out
    }

    /// States reached by `t`.
    pub fn run(&self, t: &Tree) -> BTreeSet<State> {
        let cl = self.eps_closure();
        self.run_with(t, &cl)
    }

    fn run_with(&self, t: &Tree, cl: &[Vec<State>]) -> BTreeSet<State> {
        let kids: Vec<BTreeSet<State>> = t.children.iter().map(|c| self.run_with(c, cl)).collect();
        let mut out = BTreeSet::new();
        for tr in &self.transitions {
            if tr.letter == t.label
                && tr.children.len() == kids.len()
                && tr.children.iter().zip(&kids).all(|(q, s)| s.contains(q))
            {
                out.extend(cl[tr.target].iter().copied());
            }
        }
        out
    }

    pub fn member(&self, t: &Tree) -> bool {
        self.run(t).iter().any(|q| self.finals.contains(q))
    }

    /// States accepting at least one tree.
    pub fn inhabited(&self) -> Vec<bool> {
        let a = self.without_eps();
        let mut inh = vec![false; a.states.len()];
        loop {
            let mut changed = false;
            for t in &a.transitions {
                if !inh[t.target] && t.children.iter().all(|&c| inh[c]) {
                    inh[t.target] = true;
                    changed = true;
                }
            }
            if !changed {
                return inh;
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        let inh = self.inhabited();
        !self.finals.iter().any(|&q| inh[q])
    }

    /// A smallest accepted tree, if any.
    pub fn witness(&self) -> Option<Tree> {
        let w = self.smallest_per_state();
        self.finals
            .iter()
            .filter_map(|&q| w[q].clone())
            .min_by(|a, b| a.size().cmp(&b.size()).then(a.cmp(b)))
    }

    /// A smallest tree for every state.
    pub fn smallest_per_state(&self) -> Vec<Option<Tree>> {
        let a = self.without_eps();
        let mut best: Vec<Option<Tree>> = vec![None; a.states.len()];
        loop {
            let mut changed = false;
            for t in &a.transitions {
                if let Some(cs) = t
                    .children
                    .iter()
                    .map(|&c| best[c].clone())
                    .collect::<Option<Vec<Tree>>>()
                {
                    let cand = Tree::node(&t.letter, cs);
                    let better = match &best[t.target] {
                        None => true,
                        Some(b) => (cand.size(), &cand) < (b.size(), b),
                    };
                    if better {
                        best[t.target] = Some(cand);
                        changed = true;
                    }
                }
            }
            if !changed {
                return best;
            }
        }
    }

    /// Accepts every tree embedding into an accepted tree: a node may be replaced by
    /// one of its children whenever the siblings are inhabited.
    pub fn downward_closure(&self) -> Nfta {
        let inh = self.inhabited();
        let mut out = self.clone();
        for t in &self.transitions {
            for (i, &c) in t.children.iter().enumerate() {
                let siblings_ok = t
                    .children
                    .iter()
                    .enumerate()
                    .all(|(j, &d)| j == i || inh[d]);
                if siblings_ok && inh[c] {
                    out.add_eps(c, t.target);
                }
            }
        }
        out.eps.sort_unstable();
        out.eps.dedup();
        out
    }

    /// Removes states that are uninhabited or cannot reach a final state.
    pub fn trim(&self) -> Nfta {
        let a = self.without_eps();
        let inh = a.inhabited();
        let n = a.states.len();
        let mut useful = vec![false; n];
        for &q in &a.finals {
            if inh[q] {
                useful[q] = true;
            }
        }
        loop {
            let mut changed = false;
            for t in &a.transitions {
                if useful[t.target] && t.children.iter().all(|&c| inh[c]) {
                    for &c in &t.children {
                        if !useful[c] {
                            useful[c] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut map = vec![usize::MAX; n];
        let mut out = Nfta::new(a.alphabet.clone());
        for q in 0..n {
            if useful[q] {
                map[q] = out.add_state(a.states[q].clone());
            }
        }
        for t in &a.transitions {
            if useful[t.target] && t.children.iter().all(|&c| useful[c]) {
                out.add_transition(&t.letter, t.children.iter().map(|&c| map[c]).collect(), map[t.target]);
            }
        }
        for &q in &a.finals {
            if useful[q] {
                out.set_final(map[q]);
            }
        }
        out
    }

    /// Disjoint union.
    pub fn union(&self, other: &Nfta) -> Result<Nfta> {
        let mut out = self.clone();
        out.alphabet = self.alphabet.union(&other.alphabet)?;
        let off = out.states.len();
        out.states.extend(other.states.iter().map(|s| format!("r.{s}")));
        for t in &other.transitions {
            out.add_transition(&t.letter, t.children.iter().map(|c| c + off).collect(), t.target + off);
        }
        for &(p, q) in &other.eps {
            out.eps.push((p + off, q + off));
        }
        for &q in &other.finals {
            out.finals.insert(q + off);
        }
        Ok(out)
    }

    /// Intersection over the union of both alphabets; only reachable pairs are built.
    pub fn product(&self, other: &Nfta) -> Result<Nfta> {
        let alphabet = self.alphabet.union(&other.alphabet)?;
        let a = self.without_eps();
        let b = other.without_eps();
        let mut by_letter: HashMap<(&str, usize), Vec<&Transition>> = HashMap::new();
        for t in &b.transitions {
            by_letter.entry((t.letter.as_str(), t.children.len())).or_default().push(t);
        }
        let rules: Vec<(Vec<State>, State, usize)> = a
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (t.children.clone(), t.target, i))
            .collect();
        let sat = saturate(a.states.len(), &rules, |&i, kids: &[&State]| {
            let t = &a.transitions[i];
            by_letter
                .get(&(t.letter.as_str(), t.children.len()))
                .map(|v| {
                    v.iter()
                        .filter(|bt| bt.children.iter().zip(kids).all(|(x, y)| x == *y))
                        .map(|bt| bt.target)
                        .collect()
                })
                .unwrap_or_default()
        });
        let mut out = Nfta::new(alphabet);
        let mut ids: HashMap<(State, State), State> = HashMap::new();
        for (p, qs) in sat.iter().enumerate() {
            for &q in qs {
                let id = out.add_state(format!("({},{})", a.states[p], b.states[q]));
                ids.insert((p, q), id);
                if a.finals.contains(&p) && b.finals.contains(&q) {
                    out.set_final(id);
                }
            }
        }
        for ta in &a.transitions {
            for tb in by_letter
                .get(&(ta.letter.as_str(), ta.children.len()))
                .into_iter()
                .flatten()
            {
                let kids: Option<Vec<State>> = ta
                    .children
                    .iter()
                    .zip(&tb.children)
                    .map(|(&p, &q)| ids.get(&(p, q)).copied())
                    .collect();
                if let (Some(kids), Some(&tgt)) = (kids, ids.get(&(ta.target, tb.target))) {
                    out.add_transition(&ta.letter, kids, tgt);
                }
            }
        }
        Ok(out)
    }

    /// Deterministic complete automaton over `alphabet` (subset construction,
    /// reachable subsets only; the empty subset is the sink).
    pub fn determinize_over(&self, alphabet: &RankedAlphabet) -> Result<Nfta> {
        let alphabet = alphabet.union(&self.alphabet)?;
        let a = self.without_eps();
        let letters: Vec<(String, usize)> = alphabet.letters().map(|(l, r)| (l.to_string(), r)).collect();
        let rules: Vec<(Vec<State>, State, usize)> =
            letters.iter().enumerate().map(|(i, (_, r))| (vec![0; *r], 0, i)).collect();
        let step = |i: usize, kids: &[&BTreeSet<State>]| -> BTreeSet<State> {
            let (l, r) = &letters[i];
            a.transitions
                .iter()
                .filter(|t| {
                    t.letter == *l
                        && t.children.len() == *r
                        && t.children.iter().zip(kids).all(|(q, s)| s.contains(q))
                })
                .map(|t| t.target)
                .collect()
        };
        let sat = saturate(1, &rules, |&i, kids: &[&BTreeSet<State>]| vec![step(i, kids)]);
        let subsets = &sat[0];
        let index: HashMap<&BTreeSet<State>, State> =
            subsets.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut out = Nfta::new(alphabet.clone());
        for s in subsets {
            let name = format!(
                "{{{}}}",
                s.iter().map(|&q| a.states[q].as_str()).collect::<Vec<_>>().join(",")
            );
            let id = out.add_state(name);
            if s.iter().any(|q| a.finals.contains(q)) {
                out.set_final(id);
            }
        }
        for (i, (l, r)) in letters.iter().enumerate() {
            for tuple in tuples(subsets.len(), *r) {
                let kids: Vec<&BTreeSet<State>> = tuple.iter().map(|&k| &subsets[k]).collect();
                let tgt = index[&step(i, &kids)];
                out.add_transition(l, tuple, tgt);
            }
        }
        Ok(out)
    }

    /// Complement with respect to all trees over the automaton's alphabet.
    pub fn complement(&self) -> Nfta {
        self.complement_over(&self.alphabet.clone()).expect("own alphabet is consistent")
    }

    pub fn complement_over(&self, alphabet: &RankedAlphabet) -> Result<Nfta> {
        let mut d = self.determinize_over(alphabet)?;
        let all: BTreeSet<State> = (0..d.states.len()).collect();
        d.finals = all.difference(&d.finals).copied().collect();
        Ok(d)
    }

    /// `L(other) ⊆ L(self)`, decided without building the full complement.
    pub fn includes(&self, other: &Nfta) -> Result<bool> {
        Ok(self.inclusion_counterexample(other)?.is_none())
    }

    /// A tree of `L(other) \ L(self)`, if one exists.
    pub fn inclusion_counterexample(&self, other: &Nfta) -> Result<Option<Tree>> {
        self.alphabet.union(&other.alphabet)?;
        let a = self.without_eps();
        let b = other.without_eps();
        let rules: Vec<(Vec<State>, State, usize)> = b
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (t.children.clone(), t.target, i))
            .collect();
        let mut a_by_letter: HashMap<(&str, usize), Vec<&Transition>> = HashMap::new();
        for t in &a.transitions {
            a_by_letter.entry((t.letter.as_str(), t.children.len())).or_default().push(t);
        }
        // values: (subset of A-states, a witness tree)
        let sat = saturate_with_witness(
            b.states.len(),
            &rules,
            |&i, kids: &[&BTreeSet<State>]| {
                let t = &b.transitions[i];
                let s: BTreeSet<State> = a_by_letter
                    .get(&(t.letter.as_str(), t.children.len()))
                    .into_iter()
                    .flatten()
                    .filter(|at| at.children.iter().zip(kids).all(|(q, s)| s.contains(q)))
                    .map(|at| at.target)
                    .collect();
                vec![s]
            },
            |&i| b.transitions[i].letter.clone(),
        );
        for &q in &b.finals {
            for (s, w) in &sat[q] {
                if !s.iter().any(|p| a.finals.contains(p)) {
                    return Ok(Some(w.clone()));
                }
            }
        }
        Ok(None)
    }

    pub fn equivalent(&self, other: &Nfta) -> Result<bool> {
        Ok(self.includes(other)? && other.includes(self)?)
    }

    pub fn is_deterministic(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.eps.is_empty()
            && self
                .transitions
                .iter()
                .all(|t| seen.insert((t.letter.clone(), t.children.clone())))
    }

    /// Every letter/children combination has a transition.
    pub fn is_complete(&self) -> bool {
        let have: BTreeSet<(&str, &Vec<State>)> =
            self.transitions.iter().map(|t| (t.letter.as_str(), &t.children)).collect();
        self.alphabet.letters().all(|(l, r)| {
            tuples(self.states.len(), r)
                .iter()
                .all(|tu| have.contains(&(l, tu)))
        })
    }

    /// Accepted trees with at most `max_size` nodes, sorted by size then lexicographically.
    pub fn enumerate(&self, max_size: usize) -> Vec<Tree> {
        let a = self.without_eps().trim();
        let n = a.states.len();
        // by[q][k] = trees of size k accepted in q
        let mut by: Vec<Vec<BTreeSet<Tree>>> = vec![vec![BTreeSet::new(); max_size + 1]; n];
        for k in 1..=max_size {
            for t in &a.transitions {
                let parts = split_sizes(&by, &t.children, k - 1);
                for cs in parts {
                    by[t.target][k].insert(Tree::node(&t.letter, cs));
                }
            }
        }
        let mut out: BTreeSet<(usize, Tree)> = BTreeSet::new();
        for &q in &a.finals {
            for (k, set) in by[q].iter().enumerate() {
                for t in set {
                    out.insert((k, t.clone()));
                }
            }
        }
        out.into_iter().map(|(_, t)| t).collect()
    }

    /// Renames letters; `f` must preserve ranks.
    pub fn map_letters(&self, alphabet: RankedAlphabet, f: impl Fn(&str) -> String) -> Nfta {
        let mut out = self.clone();
        out.alphabet = alphabet;
        for t in &mut out.transitions {
            t.letter = f(&t.letter);
        }
        out
    }

    /// Parses the automaton file format.
    pub fn parse(src: &str) -> Result<Self> {
        let mut alphabet = RankedAlphabet::new();
        let mut a = Nfta::new(RankedAlphabet::new());
        let mut ids: HashMap<String, State> = HashMap::new();
        let mut declared_letters = false;
        let state = |a: &mut Nfta, ids: &mut HashMap<String, State>, n: &str| -> State {
            if let Some(&q) = ids.get(n) {
                return q;
            }
            let q = a.add_state(n);
            ids.insert(n.to_string(), q);
            q
        };
        for (i, raw) in src.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match kw {
                "states" => {
                    for n in rest.split_whitespace() {
                        state(&mut a, &mut ids, n);
                    }
                }
                "final" => {
                    for n in rest.split_whitespace() {
                        let q = state(&mut a, &mut ids, n);
                        a.set_final(q);
                    }
                }
                "letters" => {
                    declared_letters = true;
                    alphabet = alphabet
                        .union(&RankedAlphabet::parse_decls(rest)?)
                        .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
                }
                _ => {
                    let Some((lhs, rhs)) = line.split_once("->") else {
                        return parse_err(i + 1, format!("expected a transition, got `{line}`"));
                    };
                    let tgt = state(&mut a, &mut ids, rhs.trim());
                    let t = {
                        let mut p = TermParser::new(lhs.trim());
                        let t = p.tree().and_then(|t| p.end().map(|_| t));
                        t.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?
                    };
                    if t.children.iter().any(|c| !c.children.is_empty()) {
                        return parse_err(i + 1, "transition children must be states");
                    }
                    if t.children.is_empty() && ids.contains_key(&t.label) && !lhs.contains('(') {
                        let from = ids[&t.label];
                        a.add_eps(from, tgt);
                        continue;
                    }
                    let kids: Vec<State> =
                        t.children.iter().map(|c| state(&mut a, &mut ids, &c.label)).collect();
                    if declared_letters {
                        match alphabet.rank(&t.label) {
                            Some(r) if r == kids.len() => {}
                            _ => {
                                return parse_err(
                                    i + 1,
                                    format!("letter {}/{} not declared", t.label, kids.len()),
                                )
                            }
                        }
                    } else {
                        alphabet
                            .add(&t.label, kids.len())
                            .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
                    }
                    a.add_transition(&t.label, kids, tgt);
                }
            }
        }
        a.alphabet = alphabet;
        Ok(a)
    }
}

impl fmt::Display for Nfta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "letters {}", self.alphabet)?;
        let names: Vec<String> = (0..self.states.len()).map(|q| format!("q{q}")).collect();
        writeln!(f, "states {}", names.join(" "))?;
        let fin: Vec<&str> = self.finals.iter().map(|&q| names[q].as_str()).collect();
        writeln!(f, "final {}", fin.join(" "))?;
        for t in &self.transitions {
            if t.children.is_empty() {
                writeln!(f, "{}() -> {}", t.letter, names[t.target])?;
            } else {
                let cs: Vec<&str> = t.children.iter().map(|&c| names[c].as_str()).collect();
                writeln!(f, "{}({}) -> {}", t.letter, cs.join(","), names[t.target])?;
            }
        }
        for &(p, q) in &self.eps {
            writeln!(f, "{} -> {}", names[p], names[q])?;
        }
        Ok(())
    }
}

fn split_sizes(by: &[Vec<BTreeSet<Tree>>], children: &[State], total: usize) -> Vec<Vec<Tree>> {
    if children.is_empty() {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for k in 1..=total {
        if by[children[0]][k].is_empty() {
            continue;
        }
        let rests = split_sizes(by, &children[1..], total - k);
        for t in &by[children[0]][k] {
            for r in &rests {
                let mut v = vec![t.clone()];
                v.extend(r.iter().cloned());
                out.push(v);
            }
        }
    }
    out
}

/// All tuples of length `r` over `0..n`.
pub(crate) fn tuples(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..r {
        let mut next = Vec::with_capacity(out.len() * n);
        for p in &out {
            for i in 0..n {
                let mut v = p.clone();
                v.push(i);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Semi-naive bottom-up saturation. Each rule `(children, target, data)` combines
/// one value from each child key into new values for `target`. Returns the values
/// per key in discovery order.
pub(crate) fn saturate<V, R, F>(keys: usize, rules: &[(Vec<usize>, usize, R)], mut combine: F) -> Vec<Vec<V>>
where
    V: Clone + Eq + Hash,
    F: FnMut(&R, &[&V]) -> Vec<V>,
{
    saturate_with_witness(keys, rules, |r, kids| combine(r, kids), |_| String::new())
        .into_iter()
        .map(|vs| vs.into_iter().map(|(v, _)| v).collect())
        .collect()
}

/// As [`saturate`], also building for every value a witness tree labeled via `label`.
pub(crate) fn saturate_with_witness<V, R, F, L>(
    keys: usize,
    rules: &[(Vec<usize>, usize, R)],
    mut combine: F,
    label: L,
) -> Vec<Vec<(V, Tree)>>
where
    V: Clone + Eq + Hash,
    F: FnMut(&R, &[&V]) -> Vec<V>,
    L: Fn(&R) -> String,
{
    let mut lists: Vec<Vec<(V, Tree)>> = vec![Vec::new(); keys];
    let mut seen: Vec<HashMap<V, ()>> = vec![HashMap::new(); keys];
    let mut old_end = vec![0usize; keys]; // end of values older than the current delta
    let mut delta_end = vec![0usize; keys];
    let mut first = true;
    loop {
        let mut found: Vec<(usize, V, Tree)> = Vec::new();
        for (children, target, data) in rules {
            if children.is_empty() {
                if first {
                    for v in combine(data, &[]) {
                        found.push((*target, v, Tree::leaf(&label(data))));
                    }
                }
                continue;
            }
            for i in 0..children.len() {
                // child i from the delta, earlier ones old, later ones old or delta
                let ranges: Vec<(usize, usize)> = children
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| {
                        if j < i {
                            (0, old_end[k])
                        } else if j == i {
                            (old_end[k], delta_end[k])
                        } else {
                            (0, delta_end[k])
                        }
                    })
                    .collect();
                if ranges.iter().any(|(a, b)| a >= b) {
                    continue;
                }
                let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
                loop {
                    let kids: Vec<&V> = idx
                        .iter()
                        .zip(children)
                        .map(|(&x, &k)| &lists[k][x].0)
                        .collect();
                    for v in combine(data, &kids) {
                        let sub: Vec<Tree> = idx
                            .iter()
                            .zip(children)
                            .map(|(&x, &k)| lists[k][x].1.clone())
                            .collect();
                        found.push((*target, v, Tree::node(&label(data), sub)));
                    }
                    let mut done = true;
                    for p in (0..idx.len()).rev() {
                        idx[p] += 1;
                        if idx[p] < ranges[p].1 {
                            done = false;
                            break;
                        }
                        idx[p] = ranges[p].0;
                    }
                    if done {
                        break;
                    }
                }
            }
        }
        first = false;
        old_end[..keys].copy_from_slice(&delta_end[..keys]);
        let mut any = false;
        for (k, v, w) in found {
            if !seen[k].contains_key(&v) {
                seen[k].insert(v.clone(), ());
                lists[k].push((v, w));
                any = true;
            }
        }
        for k in 0..keys {
            delta_end[k] = lists[k].len();
        }
        if !any {
            return lists;
        }
    }
}

/// Language size restricted to trees of at most `max_size` nodes, grouped by size.
pub fn size_profile(a: &Nfta, max_size: usize) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for t in a.enumerate(max_size) {
        *m.entry(t.size()).or_insert(0) += 1;
    }
    m
}
