//! Lambda-trees, the deterministic walk that reads their derived trees, the
//! safety-based order reduction of schemes, and the one-way to two-way lift of
//! B-automata.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use indexmap::IndexMap;

use crate::cost::{Act, BAutomaton, Dir, Disjunct, Triple};
use crate::error::{Error, Result};
use crate::schemes::{LambdaTerm, Rule, Scheme, SimpleType};
use crate::trees::{PartialTree, RankedAlphabet, RegularTree, Tree};

pub const APP: &str = "app";

pub fn con(a: &str) -> String {
    format!("con_{a}")
}

pub fn var(x: &str) -> String {
    format!("var_{x}")
}

pub fn lam(x: &str) -> String {
    format!("lam_{x}")
}

/// `Σ_X`: constants for base letters, `var_x`, `lam_x` and `app`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaAlphabet {
    pub base: RankedAlphabet,
    pub vars: BTreeSet<String>,
    pub s: usize,
}

/// Role of a lambda-tree letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LLabel {
    Con(String),
    Var(String),
    Lam(String),
    App,
}

impl LambdaAlphabet {
    pub fn new(base: RankedAlphabet, vars: impl IntoIterator<Item = String>, s: usize) -> Self {
        LambdaAlphabet {
            base,
            vars: vars.into_iter().collect(),
            s,
        }
    }

    pub fn ranked(&self) -> RankedAlphabet {
        let mut a = RankedAlphabet::new();
        for (l, _) in self.base.letters() {
            a.add(&con(l), 0).expect("fresh");
        }
        for x in &self.vars {
            a.add(&var(x), 0).expect("fresh");
            a.add(&lam(x), 1).expect("fresh");
        }
        a.add(APP, 2).expect("fresh");
        a
    }

    pub fn classify(&self, label: &str) -> Option<LLabel> {
        if label == APP {
            return Some(LLabel::App);
        }
        if let Some(a) = label.strip_prefix("con_") {
            if self.base.contains(a) {
                return Some(LLabel::Con(a.to_string()));
            }
        }
        if let Some(x) = label.strip_prefix("var_") {
            if self.vars.contains(x) {
                return Some(LLabel::Var(x.to_string()));
            }
        }
        if let Some(x) = label.strip_prefix("lam_") {
            if self.vars.contains(x) {
                return Some(LLabel::Lam(x.to_string()));
            }
        }
        None
    }

    /// All walk tokens.
    pub fn tokens(&self) -> Vec<WalkToken> {
        let mut v = vec![WalkToken::Down];
        v.extend(self.vars.iter().map(|x| WalkToken::UpVar(x.clone())));
        v.extend((1..=self.s).map(WalkToken::UpArg));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WalkToken {
    Down,
    UpVar(String),
    /// 1-based argument index.
    UpArg(usize),
}

impl fmt::Display for WalkToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WalkToken::Down => write!(f, "D"),
            WalkToken::UpVar(x) => write!(f, "^{x}"),
            WalkToken::UpArg(i) => write!(f, "^{i}"),
        }
    }
}

/// Node addressed by its path of 0-based child indices from the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WalkState {
    pub token: WalkToken,
    pub node: Vec<usize>,
}

/// What a tree shows at a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeView<'a> {
    Letter(&'a str, usize),
    Bot,
    Unknown,
}

/// Trees navigable by paths.
pub trait PathTree {
    fn view(&self, path: &[usize]) -> NodeView<'_>;
}

impl PathTree for Tree {
    fn view(&self, path: &[usize]) -> NodeView<'_> {
        let mut t = self;
        for &k in path {
            t = &t.children[k];
        }
        NodeView::Letter(&t.label, t.children.len())
    }
}

impl PathTree for PartialTree {
    fn view(&self, path: &[usize]) -> NodeView<'_> {
        let mut t = self;
        for &k in path {
            match t {
                PartialTree::Node(_, cs) => t = &cs[k],
                _ => unreachable!("paths only pass through letter nodes"),
            }
        }
        match t {
            PartialTree::Node(l, cs) => NodeView::Letter(l, cs.len()),
            PartialTree::Bot => NodeView::Bot,
            PartialTree::Unknown => NodeView::Unknown,
        }
    }
}

impl PathTree for RegularTree {
    fn view(&self, path: &[usize]) -> NodeView<'_> {
        let mut n = &self.root;
        for &k in path {
            n = &self.children(n)[k];
        }
        NodeView::Letter(self.label(n), self.children(n).len())
    }
}

/// The walk step: exactly the seven successor clauses.
pub fn successor<T: PathTree + ?Sized>(t: &T, la: &LambdaAlphabet, st: &WalkState) -> Option<WalkState> {
    let NodeView::Letter(label, _) = t.view(&st.node) else {
        return None;
    };
    let lab = la.classify(label)?;
    let parent = || {
        let mut p = st.node.clone();
        p.pop().map(|_| p)
    };
    let child = |i: usize| {
        let mut p = st.node.clone();
        p.push(i);
        p
    };
    match (&st.token, &lab) {
        (WalkToken::Down, LLabel::Lam(_) | LLabel::App) => Some(WalkState {
            token: WalkToken::Down,
            node: child(0),
        }),
        (WalkToken::Down, LLabel::Var(x)) => Some(WalkState {
            token: WalkToken::UpVar(x.clone()),
            node: st.node.clone(),
        }),
        (WalkToken::Down, LLabel::Con(_)) => None,
        (WalkToken::UpVar(x), LLabel::Lam(y)) if x == y => Some(WalkState {
            token: WalkToken::UpArg(1),
            node: parent()?,
        }),
        (WalkToken::UpVar(x), _) => Some(WalkState {
            token: WalkToken::UpVar(x.clone()),
            node: parent()?,
        }),
        (WalkToken::UpArg(i), LLabel::Lam(_)) if *i < la.s => Some(WalkState {
            token: WalkToken::UpArg(i + 1),
            node: parent()?,
        }),
        (WalkToken::UpArg(i), LLabel::App) if *i > 1 => Some(WalkState {
            token: WalkToken::UpArg(i - 1),
            node: parent()?,
        }),
        (WalkToken::UpArg(1), LLabel::App) => Some(WalkState {
            token: WalkToken::Down,
            node: child(1),
        }),
        _ => None,
    }
}

/// Where a maximal walk ends.
enum WalkEnd {
    /// `(Down, w)` with `w` labeled `con_a`.
    Letter(String, Vec<usize>),
    Dies,
    Cycle,
    Unknown,
    OutOfFuel,
}

fn walk<T: PathTree + ?Sized>(t: &T, la: &LambdaAlphabet, start: WalkState, fuel: &mut usize) -> WalkEnd {
    let mut seen = HashSet::new();
    let mut cur = start;
    loop {
        match t.view(&cur.node) {
            NodeView::Unknown => return WalkEnd::Unknown,
            NodeView::Bot => return WalkEnd::Dies,
            NodeView::Letter(..) => {}
        }
        if !seen.insert(cur.clone()) {
            return WalkEnd::Cycle;
        }
        if *fuel == 0 {
            return WalkEnd::OutOfFuel;
        }
        *fuel -= 1;
        match successor(t, la, &cur) {
            Some(next) => cur = next,
            None => {
                if cur.token == WalkToken::Down {
                    if let NodeView::Letter(l, _) = t.view(&cur.node) {
                        if let Some(LLabel::Con(a)) = la.classify(l) {
                            return WalkEnd::Letter(a, cur.node);
                        }
                    }
                }
                return WalkEnd::Dies;
            }
        }
    }
}

/// Derived tree down to `depth` (root at depth 1). The i-th child of an emitted
/// `a` at node `w` is read from `(UpArg i, parent(w))`.
pub fn derived_tree<T: PathTree + ?Sized>(t: &T, la: &LambdaAlphabet, depth: usize, walk_fuel: usize) -> PartialTree {
    let mut fuel = walk_fuel;
    derive_from(
        t,
        la,
        WalkState {
            token: WalkToken::Down,
            node: Vec::new(),
        },
        depth,
        &mut fuel,
    )
}

fn derive_from<T: PathTree + ?Sized>(
    t: &T,
    la: &LambdaAlphabet,
    start: WalkState,
    depth: usize,
    fuel: &mut usize,
) -> PartialTree {
    if depth == 0 {
        return PartialTree::Unknown;
    }
    match walk(t, la, start, fuel) {
        WalkEnd::Letter(a, w) => {
            if Some(a.as_str()) == la.base.bot() {
                return PartialTree::Bot;
            }
            let rank = la.base.rank(&a).unwrap_or(0);
            let mut parent = w.clone();
            let has_parent = parent.pop().is_some();
            let children = (1..=rank)
                .map(|i| {
                    if !has_parent {
                        return PartialTree::Bot;
                    }
                    derive_from(
                        t,
                        la,
                        WalkState {
                            token: WalkToken::UpArg(i),
                            node: parent.clone(),
                        },
                        depth - 1,
                        fuel,
                    )
                })
                .collect();
            PartialTree::Node(a, children)
        }
        WalkEnd::Dies | WalkEnd::Cycle => PartialTree::Bot,
        WalkEnd::Unknown | WalkEnd::OutOfFuel => PartialTree::Unknown,
    }
}

/// Result of [`reduce_scheme`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduced {
    pub scheme: Scheme,
    pub vars: Vec<String>,
    pub s: usize,
    pub base: RankedAlphabet,
}

impl Reduced {
    pub fn lambda_alphabet(&self) -> LambdaAlphabet {
        LambdaAlphabet::new(self.base.clone(), self.vars.iter().cloned(), self.s)
    }

    /// Scheme file text preceded by the sidecar header.
    pub fn to_file_string(&self) -> String {
        format!(
            "-- X: {}  s: {}\n-- base: {}\n{}",
            self.vars.join(","),
            self.s,
            self.base,
            self.scheme
        )
    }
}

/// Reads the `-- X: ...  s: ...` and `-- base: ...` header lines.
pub fn parse_sidecar(src: &str) -> Option<LambdaAlphabet> {
    let mut vars = None;
    let mut s = None;
    let mut base = None;
    for line in src.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("-- X:") {
            let (xs, srest) = rest.split_once("s:")?;
            vars = Some(
                xs.split(',')
                    .map(|x| x.trim().to_string())
                    .filter(|x| !x.is_empty())
                    .collect::<Vec<_>>(),
            );
            s = srest.trim().parse().ok();
        } else if let Some(rest) = line.strip_prefix("-- base:") {
            base = RankedAlphabet::parse_decls(rest).ok();
        }
    }
    Some(LambdaAlphabet::new(base?, vars?, s?))
}

fn fresh(base: &str, taken: &HashSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}{k}"))
        .find(|n| !taken.contains(n))
        .unwrap()
}

/// Number of order-0 arguments of a type (a suffix, for homogeneous types).
fn ground_args(t: &SimpleType) -> usize {
    t.args().iter().filter(|a| a.order() == 0).count()
}

/// Keeps only the positive-order arguments, recursively.
pub fn reduce_type(t: &SimpleType) -> SimpleType {
    SimpleType::from_args(
        t.args()
            .into_iter()
            .filter(|a| a.order() > 0)
            .map(reduce_type)
            .collect(),
    )
}

/// Order reduction of a safe scheme with homogeneous types.
pub fn reduce_scheme(g: &Scheme) -> Result<Reduced> {
    g.typecheck()?;
    if g.order() == 0 {
        return Err(Error::OrderZero);
    }
    let rep = g.check_safety();
    if !rep.safe {
        let (r, p, x) = rep.witness.unwrap_or_default();
        return Err(Error::Unsafe(format!("rule {r}, path {p}, variable {x}")));
    }
    for (x, t) in &g.nonterminals {
        if !t.is_homogeneous() {
            return Err(Error::NotHomogeneous(format!("{x} : {t}")));
        }
    }
    let g = add_dummy_params(g)?;
    let g = rename_apart(&g);

    let mut vars = Vec::new();
    let mut s = g.alphabet.max_rank();
    for (x, rule) in &g.rules {
        s = s.max(ground_args(&g.nonterminals[x]));
        for (p, t) in &rule.params {
            s = s.max(ground_args(t));
            if t.order() == 0 {
                vars.push(p.clone());
            }
        }
        collect_arities(&g, &rule.body, &mut s);
    }

    let mut alphabet = RankedAlphabet::new();
    for (l, _) in g.alphabet.letters() {
        alphabet.add(&con(l), 0)?;
    }
    for x in &vars {
        alphabet.add(&var(x), 0)?;
        alphabet.add(&lam(x), 1)?;
    }
    alphabet.add(APP, 2)?;

    let nonterminals: IndexMap<String, SimpleType> = g
        .nonterminals
        .iter()
        .map(|(x, t)| (x.clone(), reduce_type(t)))
        .collect();
    let mut rules = IndexMap::new();
    for (x, rule) in &g.rules {
        let params: Vec<(String, SimpleType)> = rule
            .params
            .iter()
            .filter(|(_, t)| t.order() > 0)
            .map(|(p, t)| (p.clone(), reduce_type(t)))
            .collect();
        let mut body = translate(&g, &rule.body)?;
        for (p, t) in rule.params.iter().rev() {
            if t.order() == 0 {
                body = LambdaTerm::app(LambdaTerm::letter(&lam(p)), body);
            }
        }
        rules.insert(x.clone(), Rule { params, body });
    }
    let scheme = Scheme {
        alphabet,
        nonterminals,
        initial: g.initial.clone(),
        rules,
    };
    scheme.typecheck()?;
    Ok(Reduced {
        scheme,
        vars,
        s,
        base: g.alphabet.clone(),
    })
}

fn collect_arities(g: &Scheme, t: &LambdaTerm, s: &mut usize) {
    if let Ok(ty) = g.type_of(t) {
        *s = (*s).max(ground_args(&ty));
    }
    if let LambdaTerm::App(f, a) = t {
        collect_arities(g, f, s);
        collect_arities(g, a, s);
    }
}

fn translate(g: &Scheme, t: &LambdaTerm) -> Result<LambdaTerm> {
    Ok(match t {
        LambdaTerm::Letter(a) => LambdaTerm::letter(&con(a)),
        LambdaTerm::Var(x, ty) if ty.order() == 0 => LambdaTerm::letter(&var(x)),
        LambdaTerm::Var(x, ty) => LambdaTerm::Var(x.clone(), reduce_type(ty)),
        LambdaTerm::Nonterminal(x) => LambdaTerm::Nonterminal(x.clone()),
        LambdaTerm::App(f, a) => {
            let tf = translate(g, f)?;
            let ta = translate(g, a)?;
            if g.type_of(a)?.order() == 0 {
                LambdaTerm::apps(LambdaTerm::letter(APP), [tf, ta])
            } else {
                LambdaTerm::app(tf, ta)
            }
        }
        LambdaTerm::Lam(..) => {
            return Err(Error::Precondition("rule bodies must be applicative".into()))
        }
    })
}

/// Appends an unused order-0 parameter to positive-order nonterminals lacking one;
/// fully applied occurrences receive the bottom letter (or another rank-0 letter).
fn add_dummy_params(g: &Scheme) -> Result<Scheme> {
    let needy: Vec<String> = g
        .nonterminals
        .iter()
        .filter(|(_, t)| t.order() > 0 && t.args().iter().all(|a| a.order() > 0))
        .map(|(x, _)| x.clone())
        .collect();
    if needy.is_empty() {
        return Ok(g.clone());
    }
    let filler = match g.alphabet.bot() {
        Some(b) => b.to_string(),
        None => match g.alphabet.letters().find(|(_, r)| *r == 0) {
            Some((l, _)) => l.to_string(),
            None => {
                return Err(Error::Precondition(
                    "a dummy parameter needs a rank-0 letter to pass".into(),
                ))
            }
        },
    };
    let mut out = g.clone();
    let mut taken: HashSet<String> = g.nonterminals.keys().cloned().collect();
    taken.extend(g.alphabet.letters().map(|(l, _)| l.to_string()));
    for r in g.rules.values() {
        taken.extend(r.params.iter().map(|(p, _)| p.clone()));
    }
    for x in &needy {
        let d = fresh("u", &taken);
        taken.insert(d.clone());
        let mut args: Vec<SimpleType> = g.nonterminals[x].args().into_iter().cloned().collect();
        args.push(SimpleType::O);
        out.nonterminals.insert(x.clone(), SimpleType::from_args(args));
        out.rules.get_mut(x).unwrap().params.push((d, SimpleType::O));
    }
    let arity = |x: &str| g.nonterminals[x].arity();
    fn fix(
        t: &LambdaTerm,
        needy: &[String],
        arity: &dyn Fn(&str) -> usize,
        filler: &str,
    ) -> Result<LambdaTerm> {
        let (h, args) = t.spine();
        let args: Vec<LambdaTerm> = args
            .into_iter()
            .map(|a| fix(a, needy, arity, filler))
            .collect::<Result<_>>()?;
        if let LambdaTerm::Nonterminal(x) = h {
            if needy.contains(x) {
                if args.len() != arity(x) {
                    return Err(Error::Precondition(format!(
                        "nonterminal {x} needs a dummy parameter but occurs partially applied"
                    )));
                }
                return Ok(LambdaTerm::apps(
                    h.clone(),
                    args.into_iter().chain([LambdaTerm::letter(filler)]),
                ));
            }
        }
        Ok(LambdaTerm::apps(h.clone(), args))
    }
    for rule in out.rules.values_mut() {
        rule.body = fix(&rule.body, &needy, &arity, &filler)?;
    }
    out.typecheck()?;
    Ok(out)
}

/// Gives every order-0 parameter a name distinct from all others.
fn rename_apart(g: &Scheme) -> Scheme {
    let mut out = g.clone();
    let mut taken: HashSet<String> = HashSet::new();
    for rule in out.rules.values_mut() {
        for i in 0..rule.params.len() {
            let (p, t) = rule.params[i].clone();
            if t.order() > 0 {
                continue;
            }
            let n = fresh(&p, &taken);
            taken.insert(n.clone());
            if n != p {
                rule.body = rule.body.rename_var(&p, &n);
                rule.params[i].0 = n;
            }
        }
    }
    out
}

/// Regular tree generated by an order-0 scheme.
pub fn order0_tree(g: &Scheme) -> Result<RegularTree> {
    if g.order() != 0 {
        return Err(Error::Precondition("scheme is not of order 0".into()));
    }
    let mut eqs: Vec<(String, String, Vec<String>)> = Vec::new();
    let mut counter = 0usize;
    fn node(
        t: &LambdaTerm,
        eqs: &mut Vec<(String, String, Vec<String>)>,
        counter: &mut usize,
    ) -> Result<String> {
        let (h, args) = t.spine();
        match h {
            LambdaTerm::Nonterminal(x) if args.is_empty() => Ok(x.clone()),
            LambdaTerm::Letter(a) => {
                let kids = args
                    .into_iter()
                    .map(|c| node(c, eqs, counter))
                    .collect::<Result<Vec<_>>>()?;
                *counter += 1;
                let name = format!("n{counter}");
                eqs.push((name.clone(), a.clone(), kids));
                Ok(name)
            }
            _ => Err(Error::Precondition(format!("unexpected term `{t}` in order-0 scheme"))),
        }
    }
    for (x, rule) in &g.rules {
        let (h, args) = rule.body.spine();
        let LambdaTerm::Letter(a) = h else {
            return Err(Error::Precondition(format!("rule for {x} must start with a letter")));
        };
        let kids = args
            .into_iter()
            .map(|c| node(c, &mut eqs, &mut counter))
            .collect::<Result<Vec<_>>>()?;
        eqs.push((x.clone(), a.clone(), kids));
    }
    let mut m = std::collections::BTreeMap::new();
    for (n, l, cs) in eqs {
        m.insert(n, (l, cs));
    }
    Ok(RegularTree {
        root: g.initial.clone(),
        eqs: m,
    })
}

/// Two-way automaton over `Σ_X` that runs `a` on the derived tree of its input.
/// Exact on normalizing lambda-trees.
pub fn lift_automaton(a: &BAutomaton, la: &LambdaAlphabet) -> Result<BAutomaton> {
    if !a.is_one_way() {
        return Err(Error::NotOneWay("lift expects a one-way automaton".into()));
    }
    let tokens = la.tokens();
    let mut out = BAutomaton::new(a.counters);
    out.alphabet = la.ranked();
    let idx = |q: usize, d: &WalkToken| q * tokens.len() + tokens.iter().position(|t| t == d).unwrap();
    for (q, name) in a.states.iter().enumerate() {
        for d in &tokens {
            out.add_state(&format!("{name}|{d}"), a.priorities[q]);
        }
    }
    let dead = out.add_state("dead", 1);
    out.init = idx(a.init, &WalkToken::Down);
    let eps = vec![Act::Eps; a.counters];
    let tri = |dir: Dir, act: &Vec<Act>, state: usize| Triple {
        dir,
        act: act.clone(),
        state,
    };
    let letters: Vec<(String, usize)> = out.alphabet.letters().map(|(l, r)| (l.to_string(), r)).collect();
    for (l, _) in &letters {
        out.add_disjunct(dead, l, vec![tri(Dir::Stay, &eps, dead)]);
    }
    for q in 0..a.states.len() {
        for d in &tokens {
            let me = idx(q, d);
            for (l, _) in &letters {
                let lab = la.classify(l).expect("own letter");
                let step = match (d, &lab) {
                    (WalkToken::Down, LLabel::Lam(_) | LLabel::App) => Some((Dir::Down(1), WalkToken::Down)),
                    (WalkToken::Down, LLabel::Var(x)) => Some((Dir::Stay, WalkToken::UpVar(x.clone()))),
                    (WalkToken::UpVar(x), LLabel::Lam(y)) if x == y => Some((Dir::Up, WalkToken::UpArg(1))),
                    (WalkToken::UpVar(x), _) => Some((Dir::Up, WalkToken::UpVar(x.clone()))),
                    (WalkToken::UpArg(i), LLabel::Lam(_)) if *i < la.s => {
                        Some((Dir::Up, WalkToken::UpArg(i + 1)))
                    }
                    (WalkToken::UpArg(i), LLabel::App) if *i > 1 => Some((Dir::Up, WalkToken::UpArg(i - 1))),
                    (WalkToken::UpArg(1), LLabel::App) => Some((Dir::Down(2), WalkToken::Down)),
                    _ => None,
                };
                match (step, &lab) {
                    (Some((dir, nd)), _) => {
                        out.add_disjunct(me, l, vec![tri(dir, &eps, idx(q, &nd))]);
                        if dir == Dir::Up {
                            out.add_disjunct(me, l, vec![tri(Dir::Stay, &eps, dead)]);
                        }
                    }
                    (None, LLabel::Con(b)) if *d == WalkToken::Down => {
                        let mut any_up = false;
                        let ds = a.disjuncts(q, b).to_vec();
                        if ds.is_empty() {
                            out.delta.entry((me, l.clone())).or_default();
                        }
                        for dis in ds {
                            let conj: Disjunct = dis
                                .iter()
                                .map(|t| match t.dir {
                                    Dir::Down(i) => {
                                        any_up = true;
                                        tri(Dir::Up, &t.act, idx(t.state, &WalkToken::UpArg(i)))
                                    }
                                    _ => tri(Dir::Stay, &t.act, idx(t.state, &WalkToken::Down)),
                                })
                                .collect();
                            out.add_disjunct(me, l, conj);
                        }
                        if any_up {
                            out.add_disjunct(me, l, vec![tri(Dir::Stay, &eps, dead)]);
                        }
                    }
                    _ => out.add_disjunct(me, l, vec![tri(Dir::Stay, &eps, dead)]),
                }
            }
        }
    }
    out.validate()?;
    Ok(out)
}

/// Parses a lambda-tree file: `letters` (base alphabet), `vars x y`, `s 2`, then either
/// `tree <literal>` or regular-tree equations. The reduce sidecar header is also accepted
/// in place of the first three lines.
pub fn parse_lambda_tree_file(src: &str) -> Result<(LambdaAlphabet, LambdaTreeInput)> {
    let mut base = None;
    let mut vars: Option<Vec<String>> = None;
    let mut s = None;
    let mut tree = None;
    let mut rest = String::new();
    for (i, raw) in src.lines().enumerate() {
        let line = crate::trees::strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (kw, r) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match kw {
            "letters" => base = Some(RankedAlphabet::parse_decls(r)?),
            "vars" => vars = Some(r.split_whitespace().map(str::to_string).collect()),
            "s" => {
                s = Some(r.trim().parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: "bad s".into(),
                })?)
            }
            "tree" => tree = Some(Tree::parse(r)?),
            _ => {
                rest.push_str(line);
                rest.push('\n');
            }
        }
    }
    let la = match (base, vars, s) {
        (Some(b), Some(v), Some(s)) => LambdaAlphabet::new(b, v, s),
        _ => parse_sidecar(src).ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing `letters`, `vars` or `s`".into(),
        })?,
    };
    let input = match tree {
        Some(t) => LambdaTreeInput::Finite(t),
        None => LambdaTreeInput::Regular(RegularTree::parse(&rest)?),
    };
    Ok((la, input))
}

#[derive(Debug, Clone)]
pub enum LambdaTreeInput {
    Finite(Tree),
    Regular(RegularTree),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::bohm_prefix;

    const EX21: &str = "\
letters a/2 nd/2 b1/1 b2/1 bot/0 c/0
types S : o
types A : (o->o)->(o->o)->o->o->o
start S
S = A b1 b2 c c
A f g x y = nd (a x y) (A f g (f x) (g y))
";

    fn small_lambda_tree() -> (Tree, LambdaAlphabet) {
        let t = Tree::parse("app(app(lam_x(lam_y(app(app(con_a,var_x),var_y))),con_c1),con_c2)").unwrap();
        let base = RankedAlphabet::parse_decls("a/2 c1/0 c2/0").unwrap();
        (t, LambdaAlphabet::new(base, ["x".to_string(), "y".to_string()], 2))
    }

    #[test]
    fn figure_three() {
        let (t, la) = small_lambda_tree();
        assert_eq!(derived_tree(&t, &la, 10, 1000).to_string(), "a(c1,c2)");
    }

    #[test]
    fn single_constant_and_free_variable() {
        let base = RankedAlphabet::parse_decls("a/0").unwrap();
        let la = LambdaAlphabet::new(base, ["x".to_string()], 1);
        assert_eq!(derived_tree(&Tree::leaf("con_a"), &la, 3, 100).to_string(), "a");
        assert_eq!(derived_tree(&Tree::leaf("var_x"), &la, 3, 100).to_string(), "bot");
    }

    #[test]
    fn successor_rules() {
        let (t, la) = small_lambda_tree();
        let st = |token, node: &[usize]| WalkState { token, node: node.to_vec() };
        assert_eq!(successor(&t, &la, &st(WalkToken::Down, &[])), Some(st(WalkToken::Down, &[0])));
        let vx = [0, 0, 0, 0, 0, 1];
        assert_eq!(
            successor(&t, &la, &st(WalkToken::Down, &vx)),
            Some(st(WalkToken::UpVar("x".into()), &vx))
        );
        assert_eq!(
            successor(&t, &la, &st(WalkToken::UpVar("x".into()), &[0, 0])),
            Some(st(WalkToken::UpArg(1), &[0]))
        );
        assert_eq!(successor(&t, &la, &st(WalkToken::UpArg(1), &[])), Some(st(WalkToken::Down, &[1])));
        assert_eq!(successor(&t, &la, &st(WalkToken::UpArg(2), &[0, 0])), None);
    }

    #[test]
    fn reduce_example() {
        let g = Scheme::parse(EX21).unwrap();
        let r = reduce_scheme(&g).unwrap();
        assert_eq!(r.vars, vec!["x", "y"]);
        assert_eq!(r.s, 2);
        assert_eq!(r.scheme.order(), 1);
        assert_eq!(r.scheme.rules["S"].body.to_string(), "app (app (A con_b1 con_b2) con_c) con_c");
        assert_eq!(
            r.scheme.rules["A"].body.to_string(),
            "lam_x (lam_y (app (app con_nd (app (app con_a var_x) var_y)) (app (app (A f g) (app f var_x)) (app g var_y))))"
        );
        assert!(r.scheme.check_safety().safe);
        assert!(r.to_file_string().starts_with("-- X: x,y  s: 2\n"));
        assert_eq!(parse_sidecar(&r.to_file_string()), Some(r.lambda_alphabet()));
    }

    #[test]
    fn round_trip_prefix() {
        let g = Scheme::parse(EX21).unwrap();
        let r = reduce_scheme(&g).unwrap();
        let lt = bohm_prefix(&r.scheme, 60, 100_000);
        let d = derived_tree(&lt, &r.lambda_alphabet(), 6, 100_000);
        let bt = bohm_prefix(&g, 12, 100_000);
        assert_eq!(d.truncate(4), bt.truncate(4));
        assert!(!d.truncate(4).to_string().contains("bot"));
    }

    #[test]
    fn twice_reduced_to_order_zero() {
        let g = Scheme::parse(EX21).unwrap();
        let r = reduce_scheme(&g).unwrap();
        let r2 = reduce_scheme(&r.scheme).unwrap();
        assert_eq!(r2.scheme.order(), 0);
        let lt2 = order0_tree(&r2.scheme).unwrap();
        let d1 = derived_tree(&lt2, &r2.lambda_alphabet(), 200, 1_000_000);
        let d0 = derived_tree(&d1, &r.lambda_alphabet(), 6, 1_000_000);
        let bt = bohm_prefix(&g, 12, 100_000);
        assert_eq!(d0.truncate(4), bt.truncate(4));
    }

    #[test]
    fn order_zero_rejected() {
        let g = Scheme::parse("letters c/0\ntypes S : o\nS = c\n").unwrap();
        assert_eq!(reduce_scheme(&g), Err(Error::OrderZero));
    }

    #[test]
    fn dummy_parameter_added() {
        let src = "letters b/1 c/0 bot/0\ntypes S : o; F : (o->o)->o\nS = F b\nF f = f (F f)\n";
        let g = Scheme::parse(src).unwrap();
        let r = reduce_scheme(&g).unwrap();
        assert_eq!(r.scheme.order(), 1);
        assert_eq!(r.vars, vec!["u"]);
        let lt = bohm_prefix(&r.scheme, 40, 10_000);
        let d = derived_tree(&lt, &r.lambda_alphabet(), 4, 10_000);
        assert_eq!(d.to_string(), bohm_prefix(&g, 40, 10_000).truncate(4).to_string());
    }

    const COUNT_B: &str = "states q:0\ncounters 1\ninit q\nletters b/1 c/0\nq, b -> (down1 i q)\nq, c -> (true)\n";
    const RESET_B: &str = "states q:0\ncounters 1\ninit q\nletters b/1 c/0\nq, b -> (down1 r q)\nq, c -> (true)\n";

    fn b_chain_lambda() -> (RegularTree, LambdaAlphabet) {
        let src = "letters b/1 c/0\ntypes S : o; F : o->o\nS = F c\nF x = b (F x)\n";
        let r = reduce_scheme(&Scheme::parse(src).unwrap()).unwrap();
        (order0_tree(&r.scheme).unwrap(), r.lambda_alphabet())
    }

    #[test]
    fn lifted_automaton_on_b_chain() {
        use crate::cost::{accepts_bounded, Acceptance};
        let (t, la) = b_chain_lambda();
        assert_eq!(derived_tree(&t, &la, 5, 10_000).to_string(), "b(b(b(b(b(unknown)))))");
        let count = lift_automaton(&BAutomaton::parse(COUNT_B).unwrap(), &la).unwrap();
        let res = accepts_bounded(&count, &t, 3, 20_000).unwrap();
        assert_eq!(res, Acceptance::RejectedUpTo(3));
        let reset = lift_automaton(&BAutomaton::parse(RESET_B).unwrap(), &la).unwrap();
        let res = accepts_bounded(&reset, &t, 3, 4_000).unwrap();
        assert!(!matches!(res, Acceptance::RejectedUpTo(_)), "{res}");
    }

    #[test]
    fn lifted_automaton_on_finite_tree() {
        use crate::cost::{accepts_bounded, Acceptance};
        let (t, la) = small_lambda_tree();
        let a = BAutomaton::parse(
            "states q:0\ncounters 1\ninit q\nletters a/2 c1/0 c2/0\nq, a -> (down1 i q & down2 e q)\nq, c1 -> (true)\nq, c2 -> (true)\n",
        )
        .unwrap();
        let rt = RegularTree::from_tree(&t);
        let lifted = lift_automaton(&a, &la).unwrap();
        let direct = accepts_bounded(&a, &RegularTree::from_tree(&Tree::parse("a(c1,c2)").unwrap()), 3, 1000).unwrap();
        assert_eq!(direct, Acceptance::AcceptedAt(1));
        assert_eq!(accepts_bounded(&lifted, &rt, 3, 200_000).unwrap(), Acceptance::AcceptedAt(1));
    }
}
