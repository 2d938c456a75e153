//! Alternating B-automata with counters, counter valuations, game arenas over
//! regular trees and bounded acceptance checks.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use crate::error::{parse_err, Error, Result};
use crate::parity::{solve_parity, Player};
use crate::trees::{strip_comment, RankedAlphabet, RegularTree};

/// Action on one counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Act {
    Inc,
    Reset,
    Eps,
}

/// One action per counter.
pub type CounterAction = Vec<Act>;

impl fmt::Display for Act {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Act::Inc => "i",
            Act::Reset => "r",
            Act::Eps => "e",
        })
    }
}

fn parse_act(s: &str) -> Option<Act> {
    match s {
        "i" | "ic" => Some(Act::Inc),
        "r" => Some(Act::Reset),
        "e" | "eps" => Some(Act::Eps),
        _ => None,
    }
}

/// Natural number or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Fin(u64),
    Inf,
}

/// A finite sequence, or a prefix followed by a cycle repeated forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionWord {
    Finite(Vec<CounterAction>),
    Lasso(Vec<CounterAction>, Vec<CounterAction>),
}

fn simulate(steps: &[&CounterAction], counters: usize) -> u64 {
    let mut cur = vec![0u64; counters];
    let mut best = 0;
    for s in steps {
        for (c, a) in s.iter().enumerate() {
            match a {
                Act::Inc => {
                    cur[c] += 1;
                    best = best.max(cur[c]);
                }
                Act::Reset => cur[c] = 0,
                Act::Eps => {}
            }
        }
    }
    best
}

/// Supremum of the counter values reached along the word, maximized over counters.
pub fn val(w: &ActionWord) -> Value {
    match w {
        ActionWord::Finite(xs) => {
            let k = xs.first().map_or(0, Vec::len);
            Value::Fin(simulate(&xs.iter().collect::<Vec<_>>(), k))
        }
        ActionWord::Lasso(pre, cyc) => {
            if cyc.is_empty() {
                return val(&ActionWord::Finite(pre.clone()));
            }
            let k = cyc[0].len();
            for c in 0..k {
                let inc = cyc.iter().any(|s| s[c] == Act::Inc);
                let reset = cyc.iter().any(|s| s[c] == Act::Reset);
                if inc && !reset {
                    return Value::Inf;
                }
            }
            // Two unfoldings cover the wrap-around from one cycle into the next.
            let steps: Vec<&CounterAction> = pre.iter().chain(cyc.iter()).chain(cyc.iter()).collect();
            Value::Fin(simulate(&steps, k))
        }
    }
}

/// Parses a single-counter word such as `ic ic r e ic e`.
pub fn parse_word(s: &str) -> Result<Vec<CounterAction>> {
    s.split_whitespace()
        .map(|t| {
            t.split(',')
                .map(|x| parse_act(x).ok_or_else(|| Error::Invalid(format!("bad action `{x}`"))))
                .collect()
        })
        .collect()
}

/// Movement of a triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Up,
    Stay,
    /// 1-based child index.
    Down(usize),
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dir::Up => write!(f, "up"),
            Dir::Stay => write!(f, "stay"),
            Dir::Down(i) => write!(f, "down{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub dir: Dir,
    pub act: CounterAction,
    pub state: usize,
}

/// Conjunction of triples; the empty conjunction is `true`.
pub type Disjunct = Vec<Triple>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BAutomaton {
    /// Declared alphabet; empty means "whatever letters appear in the transitions".
    pub alphabet: RankedAlphabet,
    pub states: Vec<String>,
    pub priorities: Vec<usize>,
    pub init: usize,
    pub counters: usize,
    /// Missing entries mean `false`.
    pub delta: BTreeMap<(usize, String), Vec<Disjunct>>,
}

impl BAutomaton {
    pub fn new(counters: usize) -> Self {
        BAutomaton {
            alphabet: RankedAlphabet::new(),
            states: Vec::new(),
            priorities: Vec::new(),
            init: 0,
            counters,
            delta: BTreeMap::new(),
        }
    }

    pub fn add_state(&mut self, name: &str, priority: usize) -> usize {
        self.states.push(name.to_string());
        self.priorities.push(priority);
        self.states.len() - 1
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn add_disjunct(&mut self, q: usize, letter: &str, d: Disjunct) {
        self.delta.entry((q, letter.to_string())).or_default().push(d);
    }

    pub fn disjuncts(&self, q: usize, letter: &str) -> &[Disjunct] {
        self.delta
            .get(&(q, letter.to_string()))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn is_one_way(&self) -> bool {
        self.delta
            .values()
            .flatten()
            .flatten()
            .all(|t| t.dir != Dir::Up)
    }

    /// Letters known to the automaton.
    pub fn knows_letter(&self, l: &str) -> bool {
        if self.alphabet.is_empty() {
            self.delta.keys().any(|(_, a)| a == l)
        } else {
            self.alphabet.contains(l)
        }
    }

    /// Checks action widths, state indices, child indices against declared ranks,
    /// and that every entry using `up` also has an `up`-free disjunct.
    pub fn validate(&self) -> Result<()> {
        for ((q, a), ds) in &self.delta {
            if *q >= self.states.len() {
                return Err(Error::Invalid(format!("state index {q} out of range")));
            }
            let rank = self.alphabet.rank(a);
            for t in ds.iter().flatten() {
                if t.act.len() != self.counters {
                    return Err(Error::Invalid(format!(
                        "transition ({}, {a}) has {} actions for {} counters",
                        self.states[*q],
                        t.act.len(),
                        self.counters
                    )));
                }
                if t.state >= self.states.len() {
                    return Err(Error::Invalid("target state out of range".into()));
                }
                if let (Dir::Down(i), Some(r)) = (t.dir, rank) {
                    if i == 0 || i > r {
                        return Err(Error::Invalid(format!(
                            "down{i} at letter {a} of rank {r}"
                        )));
                    }
                }
            }
            let uses_up = ds.iter().flatten().any(|t| t.dir == Dir::Up);
            if uses_up && !ds.iter().any(|d| d.iter().all(|t| t.dir != Dir::Up)) {
                return Err(Error::Invalid(format!(
                    "transition ({}, {a}) has no disjunct free of up",
                    self.states[*q]
                )));
            }
        }
        Ok(())
    }

    /// Parses the B-automaton file format.
    pub fn parse(src: &str) -> Result<Self> {
        let mut a = BAutomaton::new(0);
        let mut init = None;
        let mut lines = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match kw {
                "states" => {
                    for tok in rest.split_whitespace() {
                        let (n, p) = tok.split_once(':').unwrap_or((tok, "0"));
                        let p: usize = match p.parse() {
                            Ok(p) => p,
                            Err(_) => return parse_err(i + 1, format!("bad priority in `{tok}`")),
                        };
                        if a.state_index(n).is_some() {
                            return parse_err(i + 1, format!("state {n} declared twice"));
                        }
                        a.add_state(n, p);
                    }
                }
                "counters" => match rest.trim().parse() {
                    Ok(k) => a.counters = k,
                    Err(_) => return parse_err(i + 1, "bad counter count"),
                },
                "init" => init = Some((i + 1, rest.trim().to_string())),
                "letters" => {
                    a.alphabet = RankedAlphabet::parse_decls(rest)
                        .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?
                }
                _ => lines.push((i + 1, line)),
            }
        }
        for (ln, line) in lines {
            let Some((lhs, rhs)) = line.split_once("->") else {
                return parse_err(ln, format!("expected `q, a -> formula`, got `{line}`"));
            };
            let Some((q, letter)) = lhs.split_once(',') else {
                return parse_err(ln, "expected `state, letter` before `->`");
            };
            let Some(q) = a.state_index(q.trim()) else {
                return parse_err(ln, format!("unknown state `{}`", q.trim()));
            };
            let letter = letter.trim().to_string();
            let key = (q, letter.clone());
            a.delta.entry(key.clone()).or_default();
            let rhs = rhs.trim();
            if rhs == "false" {
                continue;
            }
            for dis in rhs.split('|') {
                let dis = dis.trim().trim_start_matches('(').trim_end_matches(')').trim();
                let mut conj = Vec::new();
                if dis != "true" {
                    for tri in dis.split('&') {
                        let toks: Vec<&str> = tri.split_whitespace().collect();
                        if toks.len() != 3 {
                            return parse_err(ln, format!("expected `dir action state`, got `{}`", tri.trim()));
                        }
                        let dir = match toks[0] {
                            "up" => Dir::Up,
                            "stay" => Dir::Stay,
                            d => match d.strip_prefix("down").and_then(|k| k.parse().ok()) {
                                Some(k) => Dir::Down(k),
                                None => return parse_err(ln, format!("bad direction `{d}`")),
                            },
                        };
                        let act: Option<CounterAction> = if a.counters == 0 && (toks[1] == "e" || toks[1] == "-") {
                            Some(Vec::new())
                        } else {
                            toks[1].split(',').map(parse_act).collect()
                        };
                        let Some(act) = act else {
                            return parse_err(ln, format!("bad action `{}`", toks[1]));
                        };
                        let Some(state) = a.state_index(toks[2]) else {
                            return parse_err(ln, format!("unknown state `{}`", toks[2]));
                        };
                        conj.push(Triple { dir, act, state });
                    }
                }
                a.delta.get_mut(&key).unwrap().push(conj);
            }
        }
        let Some((ln, init)) = init else {
            return parse_err(1, "missing `init` line");
        };
        a.init = match a.state_index(&init) {
            Some(q) => q,
            None => return parse_err(ln, format!("unknown initial state `{init}`")),
        };
        a.validate().map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
        Ok(a)
    }
}

impl fmt::Display for BAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let st: Vec<String> = self
            .states
            .iter()
            .zip(&self.priorities)
            .map(|(s, p)| format!("{s}:{p}"))
            .collect();
        writeln!(f, "states {}", st.join(" "))?;
        writeln!(f, "counters {}", self.counters)?;
        writeln!(f, "init {}", self.states[self.init])?;
        if !self.alphabet.is_empty() {
            writeln!(f, "letters {}", self.alphabet)?;
        }
        for ((q, a), ds) in &self.delta {
            let body = if ds.is_empty() {
                "false".to_string()
            } else {
                ds.iter()
                    .map(|d| {
                        if d.is_empty() {
                            "(true)".to_string()
                        } else {
                            let ts: Vec<String> = d
                                .iter()
                                .map(|t| {
                                    let act = if t.act.is_empty() {
                                        "e".to_string()
                                    } else {
                                        t.act.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                                    };
                                    format!("{} {} {}", t.dir, act, self.states[t.state])
                                })
                                .collect();
                            format!("({})", ts.join(" & "))
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" | ")
            };
            writeln!(f, "{}, {} -> {}", self.states[*q], a, body)?;
        }
        Ok(())
    }
}

/// Position of the acceptance game on a regular tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Position {
    Eve { node: String, state: usize },
    Adam { node: String, state: usize, disjunct: usize },
    /// Stuck Adam: Eve wins.
    EveWins,
    /// Stuck Eve: Adam wins.
    AdamWins,
}

/// Finite game graph. Edges carry the counter action performed.
#[derive(Debug, Clone)]
pub struct GameArena {
    pub positions: Vec<Position>,
    pub owner: Vec<Player>,
    pub priority: Vec<usize>,
    pub edges: Vec<Vec<(usize, CounterAction)>>,
    pub init: usize,
    pub counters: usize,
}

impl GameArena {
    pub fn eve_positions(&self) -> usize {
        self.positions.iter().filter(|p| matches!(p, Position::Eve { .. })).count()
    }

    /// Winner of the plain parity game, ignoring counters.
    pub fn solve_plain(&self) -> bool {
        let succ: Vec<Vec<usize>> = self.edges.iter().map(|es| es.iter().map(|e| e.0).collect()).collect();
        solve_parity(&self.owner, &self.priority, &succ)[self.init] == Player::Eve
    }
}

/// Builds the finite arena of a one-way automaton on a regular tree.
pub fn build_arena(a: &BAutomaton, t: &RegularTree) -> Result<GameArena> {
    if !a.is_one_way() {
        return Err(Error::NotOneWay("automaton uses direction up".into()));
    }
    for (l, _) in t.eqs.values() {
        if !a.knows_letter(l) {
            return Err(Error::Alphabet(format!("tree letter {l} unknown to the automaton")));
        }
    }
    if !a.alphabet.is_empty() {
        t.check(&a.alphabet)?;
    }
    let mut ar = GameArena {
        positions: Vec::new(),
        owner: Vec::new(),
        priority: Vec::new(),
        edges: Vec::new(),
        init: 0,
        counters: a.counters,
    };
    let mut ids: HashMap<Position, usize> = HashMap::new();
    let eps = vec![Act::Eps; a.counters];
    let mut add = |ar: &mut GameArena, p: Position, queue: &mut VecDeque<usize>| -> usize {
        if let Some(&i) = ids.get(&p) {
            return i;
        }
        let (owner, prio) = match &p {
            Position::Eve { state, .. } => (Player::Eve, a.priorities[*state]),
            Position::Adam { .. } => (Player::Adam, 0),
            Position::EveWins => (Player::Eve, 0),
            Position::AdamWins => (Player::Eve, 1),
        };
        let i = ar.positions.len();
        ar.positions.push(p.clone());
        ar.owner.push(owner);
        ar.priority.push(prio);
        ar.edges.push(Vec::new());
        ids.insert(p, i);
        queue.push_back(i);
        i
    };
    let mut queue = VecDeque::new();
    ar.init = add(
        &mut ar,
        Position::Eve { node: t.root.clone(), state: a.init },
        &mut queue,
    );
    while let Some(i) = queue.pop_front() {
        let p = ar.positions[i].clone();
        let mut out = Vec::new();
        match p {
            Position::EveWins | Position::AdamWins => out.push((i, eps.clone())),
            Position::Eve { node, state } => {
                let ds = a.disjuncts(state, t.label(&node));
                if ds.is_empty() {
                    let j = add(&mut ar, Position::AdamWins, &mut queue);
                    out.push((j, eps.clone()));
                }
                for d in 0..ds.len() {
                    let j = add(
                        &mut ar,
                        Position::Adam { node: node.clone(), state, disjunct: d },
                        &mut queue,
                    );
                    out.push((j, eps.clone()));
                }
            }
            Position::Adam { node, state, disjunct } => {
                let d = &a.disjuncts(state, t.label(&node))[disjunct];
                if d.is_empty() {
                    let j = add(&mut ar, Position::EveWins, &mut queue);
                    out.push((j, eps.clone()));
                }
                for tr in d {
                    let target = match tr.dir {
                        Dir::Stay => node.clone(),
                        Dir::Down(k) => match t.children(&node).get(k - 1) {
                            Some(c) => c.clone(),
                            None => {
                                return Err(Error::Invalid(format!(
                                    "down{k} at node {node} with fewer children"
                                )))
                            }
                        },
                        Dir::Up => unreachable!(),
                    };
                    let j = add(&mut ar, Position::Eve { node: target, state: tr.state }, &mut queue);
                    out.push((j, tr.act.clone()));
                }
            }
        }
        ar.edges[i] = out;
    }
    Ok(ar)
}

/// Counter-capped product game. Returns owners, priorities, successors and the
/// initial node. Node 0 is the losing sink.
fn capped_product(
    owner: &[Player],
    priority: &[usize],
    edges: &[Vec<(usize, CounterAction)>],
    init: usize,
    counters: usize,
    n: u64,
) -> (Vec<Player>, Vec<usize>, Vec<Vec<usize>>, usize) {
    let mut ids: HashMap<(usize, Vec<u64>), usize> = HashMap::new();
    let mut nodes: Vec<(usize, Vec<u64>)> = vec![(usize::MAX, Vec::new())];
    let mut own = vec![Player::Adam];
    let mut pr = vec![1];
    let mut succ: Vec<Vec<usize>> = vec![vec![0]];
    let start = (init, vec![0u64; counters]);
    ids.insert(start.clone(), 1);
    nodes.push(start);
    own.push(owner[init]);
    pr.push(priority[init]);
    succ.push(Vec::new());
    let mut i = 1;
    while i < nodes.len() {
        let (p, cs) = nodes[i].clone();
        let mut out = Vec::new();
        for (q, act) in &edges[p] {
            let mut next = cs.clone();
            let mut lost = false;
            for (c, a) in act.iter().enumerate() {
                match a {
                    Act::Inc => {
                        next[c] += 1;
                        if next[c] > n {
                            lost = true;
                        }
                    }
                    Act::Reset => next[c] = 0,
                    Act::Eps => {}
                }
            }
            if lost {
                out.push(0);
                continue;
            }
            let key = (*q, next);
            let j = match ids.get(&key) {
                Some(&j) => j,
                None => {
                    let j = nodes.len();
                    ids.insert(key.clone(), j);
                    nodes.push(key);
                    own.push(owner[*q]);
                    pr.push(priority[*q]);
                    succ.push(Vec::new());
                    j
                }
            };
            out.push(j);
        }
        succ[i] = out;
        i += 1;
    }
    (own, pr, succ, 1)
}

/// Whether Eve wins while keeping every counter at most `n`.
pub fn n_wins(arena: &GameArena, n: u64) -> bool {
    let (own, pr, succ, init) = capped_product(
        &arena.owner,
        &arena.priority,
        &arena.edges,
        arena.init,
        arena.counters,
        n,
    );
    solve_parity(&own, &pr, &succ)[init] == Player::Eve
}

/// Three-valued acceptance verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceptance {
    AcceptedAt(u64),
    RejectedUpTo(u64),
    Unknown,
}

impl fmt::Display for Acceptance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Acceptance::AcceptedAt(n) => write!(f, "accepted_at {n}"),
            Acceptance::RejectedUpTo(n) => write!(f, "rejected_up_to {n}"),
            Acceptance::Unknown => write!(f, "unknown"),
        }
    }
}

/// Smallest `n ≤ n_max` at which `a` n-accepts `t`. Exact for one-way automata;
/// two-way automata use a path-tracking exploration limited to `fuel` positions.
pub fn accepts_bounded(a: &BAutomaton, t: &RegularTree, n_max: u64, fuel: usize) -> Result<Acceptance> {
    if a.is_one_way() {
        let arena = build_arena(a, t)?;
        for n in 0..=n_max {
            if n_wins(&arena, n) {
                return Ok(Acceptance::AcceptedAt(n));
            }
        }
        return Ok(Acceptance::RejectedUpTo(n_max));
    }
    for (l, _) in t.eqs.values() {
        if !a.knows_letter(l) {
            return Err(Error::Alphabet(format!("tree letter {l} unknown to the automaton")));
        }
    }
    for n in 0..=n_max {
        match explore_two_way(a, t, n, fuel) {
            Some(true) => return Ok(Acceptance::AcceptedAt(n)),
            Some(false) => continue,
            None => return Ok(Acceptance::Unknown),
        }
    }
    Ok(Acceptance::RejectedUpTo(n_max))
}

/// Bounded game on explicit paths. `Some(b)` when both treatments of the
/// unexplored frontier agree.
fn explore_two_way(a: &BAutomaton, t: &RegularTree, n: u64, fuel: usize) -> Option<bool> {
    #[derive(Clone, PartialEq, Eq, Hash)]
    enum P {
        Eve(Vec<usize>, usize, Vec<u64>),
        Adam(Vec<usize>, usize, usize, Vec<u64>),
        Lose,
        Win,
    }
    let node_of = |path: &[usize]| -> String {
        let mut cur = t.root.clone();
        for &k in path {
            cur = t.children(&cur)[k].clone();
        }
        cur
    };
    let mut ids: HashMap<P, usize> = HashMap::new();
    let mut nodes: Vec<P> = vec![P::Lose, P::Win];
    ids.insert(P::Lose, 0);
    ids.insert(P::Win, 1);
    let mut own = vec![Player::Adam, Player::Eve];
    let mut pr = vec![1, 0];
    let mut succ: Vec<Option<Vec<usize>>> = vec![Some(vec![0]), Some(vec![1])];
    let start = P::Eve(Vec::new(), a.init, vec![0; a.counters]);
    ids.insert(start.clone(), 2);
    nodes.push(start);
    own.push(Player::Eve);
    pr.push(a.priorities[a.init]);
    succ.push(None);
    let mut i = 2;
    while i < nodes.len() && i < fuel {
        let p = nodes[i].clone();
        let mut out = Vec::new();
        let mut push = |q: P, nodes: &mut Vec<P>, own: &mut Vec<Player>, pr: &mut Vec<usize>, succ: &mut Vec<Option<Vec<usize>>>| -> usize {
            if let Some(&j) = ids.get(&q) {
                return j;
            }
            let j = nodes.len();
            let (o, r) = match &q {
                P::Eve(_, s, _) => (Player::Eve, a.priorities[*s]),
                P::Adam(..) => (Player::Adam, 0),
                P::Lose => (Player::Adam, 1),
                P::Win => (Player::Eve, 0),
            };
            ids.insert(q.clone(), j);
            nodes.push(q);
            own.push(o);
            pr.push(r);
            succ.push(None);
            j
        };
        match p {
            P::Eve(path, s, cs) => {
                let label = t.label(&node_of(&path)).to_string();
                let ds = a.disjuncts(s, &label);
                for (d, dis) in ds.iter().enumerate() {
                    if path.is_empty() && dis.iter().any(|tr| tr.dir == Dir::Up) {
                        continue;
                    }
                    out.push(push(P::Adam(path.clone(), s, d, cs.clone()), &mut nodes, &mut own, &mut pr, &mut succ));
                }
                if out.is_empty() {
                    out.push(0);
                }
            }
            P::Adam(path, s, d, cs) => {
                let node = node_of(&path);
                let dis = &a.disjuncts(s, t.label(&node))[d];
                if dis.is_empty() {
                    out.push(1);
                }
                for tr in dis {
                    let mut next = cs.clone();
                    let mut lost = false;
                    for (c, x) in tr.act.iter().enumerate() {
                        match x {
                            Act::Inc => {
                                next[c] += 1;
                                lost |= next[c] > n;
                            }
                            Act::Reset => next[c] = 0,
                            Act::Eps => {}
                        }
                    }
                    if lost {
                        out.push(0);
                        continue;
                    }
                    let mut np = path.clone();
                    match tr.dir {
                        Dir::Stay => {}
                        Dir::Up => {
                            np.pop();
                        }
                        Dir::Down(k) => {
                            if k == 0 || k > t.children(&node).len() {
                                out.push(0);
                                continue;
                            }
                            np.push(k - 1);
                        }
                    }
                    out.push(push(P::Eve(np, tr.state, next), &mut nodes, &mut own, &mut pr, &mut succ));
                }
            }
            P::Lose | P::Win => unreachable!(),
        }
        succ[i] = Some(out);
        i += 1;
    }
    let solve = |frontier_wins: bool| -> bool {
        let s: Vec<Vec<usize>> = succ
            .iter()
            .map(|x| x.clone().unwrap_or_else(|| vec![if frontier_wins { 1 } else { 0 }]))
            .collect();
        solve_parity(&own, &pr, &s)[2] == Player::Eve
    };
    let pessimistic = solve(false);
    if pessimistic {
        return Some(true);
    }
    let optimistic = solve(true);
    if !optimistic {
        return Some(false);
    }
    None
}
