//! Top-down finite tree transducers with letter rules `(p, a(x1..xr)) -> V` and
//! variable rules `(p, x) -> V`, and the builders used by the closure pipeline.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::fta::{Nfta, State};
use crate::stre::{iterator_roots, Diversified};
use crate::trees::{strip_comment, RankedAlphabet, Tree};

fn perr(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}

/// Right-hand side tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rhs {
    Out(String, Vec<Rhs>),
    /// `(state, variable)`; variable 0 is `x` of a variable rule, `i ≥ 1` is `x_i`.
    Call(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Lhs {
    Letter(String),
    Var,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FttRule {
    pub state: usize,
    pub lhs: Lhs,
    pub rhs: Rhs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ftt {
    pub input: RankedAlphabet,
    pub output: RankedAlphabet,
    pub states: Vec<String>,
    pub init: usize,
    pub rules: Vec<FttRule>,
}

impl Rhs {
    pub fn out(a: &str, kids: Vec<Rhs>) -> Rhs {
        Rhs::Out(a.to_string(), kids)
    }

    fn calls(&self, out: &mut Vec<(usize, usize)>) {
        match self {
            Rhs::Out(_, ks) => ks.iter().for_each(|k| k.calls(out)),
            Rhs::Call(p, v) => out.push((*p, *v)),
        }
    }
}

impl Ftt {
    pub fn new(input: RankedAlphabet, output: RankedAlphabet) -> Self {
        Ftt {
            input,
            output,
            states: Vec::new(),
            init: 0,
            rules: Vec::new(),
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> usize {
        self.states.push(name.into());
        self.states.len() - 1
    }

    pub fn add_rule(&mut self, state: usize, lhs: Lhs, rhs: Rhs) {
        self.rules.push(FttRule { state, lhs, rhs });
    }

    /// At most one occurrence of each variable per right-hand side.
    pub fn is_linear(&self) -> bool {
        self.rules.iter().all(|r| {
            let mut cs = Vec::new();
            r.rhs.calls(&mut cs);
            let vars: BTreeSet<usize> = cs.iter().map(|c| c.1).collect();
            vars.len() == cs.len()
        })
    }

    /// States whose domain is a single leaf `c`: only letter rules on `c` and
    /// variable rules calling states guarded by the same leaf.
    fn leaf_guards(&self) -> Vec<Option<String>> {
        let n = self.states.len();
        let mut guard: Vec<Option<Option<String>>> = vec![None; n];
        // start optimistic: the leaf read by letter rules, if unique
        for p in 0..n {
            let mut leaves = BTreeSet::new();
            let mut ok = true;
            for r in self.rules.iter().filter(|r| r.state == p) {
                if let Lhs::Letter(a) = &r.lhs {
                    if self.input.rank(a) == Some(0) {
                        leaves.insert(a.clone());
                    } else {
                        ok = false;
                    }
                }
            }
            guard[p] = Some(if ok && leaves.len() == 1 { leaves.into_iter().next() } else { None });
        }
        loop {
            let mut changed = false;
            for r in &self.rules {
                if r.lhs != Lhs::Var {
                    continue;
                }
                let mut cs = Vec::new();
                r.rhs.calls(&mut cs);
                let mine = guard[r.state].clone().flatten();
                if mine.is_none() {
                    continue;
                }
                if cs.iter().any(|&(q, _)| guard[q].clone().flatten() != mine) {
                    guard[r.state] = Some(None);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        guard.into_iter().map(Option::flatten).collect()
    }

    /// Linear, or duplicating only calls into leaf-guarded states.
    fn duplication_is_safe(&self) -> bool {
        let guards = self.leaf_guards();
        self.rules.iter().all(|r| {
            let mut cs = Vec::new();
            r.rhs.calls(&mut cs);
            let mut count: BTreeMap<usize, usize> = BTreeMap::new();
            for &(_, v) in &cs {
                *count.entry(v).or_default() += 1;
            }
            cs.iter().all(|&(q, v)| count[&v] == 1 || guards[q].is_some())
        })
    }

    /// Outputs of size at most `bound` for input `t`.
    pub fn apply_to_tree(&self, t: &Tree, bound: usize) -> BTreeSet<Tree> {
        self.outputs(t, bound)[self.init].clone()
    }

    fn outputs(&self, t: &Tree, bound: usize) -> Vec<BTreeSet<Tree>> {
        let kids: Vec<Vec<BTreeSet<Tree>>> = t.children.iter().map(|c| self.outputs(c, bound)).collect();
        let n = self.states.len();
        let mut out: Vec<BTreeSet<Tree>> = vec![BTreeSet::new(); n];
        let letter_rules: Vec<&FttRule> = self
            .rules
            .iter()
            .filter(|r| matches!(&r.lhs, Lhs::Letter(a) if *a == t.label))
            .collect();
        for r in letter_rules {
            let got = instantiate(&r.rhs, &|q, v| kids[v - 1][q].clone(), bound);
            out[r.state].extend(got);
        }
        loop {
            let mut changed = false;
            for r in self.rules.iter().filter(|r| r.lhs == Lhs::Var) {
                let snapshot = out.clone();
                let got = instantiate(&r.rhs, &|q, _| snapshot[q].clone(), bound);
                for u in got {
                    changed |= out[r.state].insert(u);
                }
            }
            if !changed {
                return out;
            }
        }
    }

    /// Image of `L(b)`; the transducer must be linear, or duplicate only leaf-guarded calls.
    pub fn apply_to_nfta(&self, b: &Nfta) -> Result<Nfta> {
        if !self.is_linear() && !self.duplication_is_safe() {
            return Err(Error::NotLinear("transducer duplicates a variable".into()));
        }
        let b = b.without_eps();
        let inh = b.inhabited();
        let mut out = Nfta::new(self.output.clone());
        let mut pair: HashMap<(usize, State), State> = HashMap::new();
        let mut work: Vec<(usize, State)> = Vec::new();
        let mut get = |p: usize, q: State, out: &mut Nfta, work: &mut Vec<(usize, State)>| -> State {
            *pair.entry((p, q)).or_insert_with(|| {
                work.push((p, q));
                out.add_state(format!("{}@{}", self.states[p], b.states[q]))
            })
        };
        for &f in &b.finals {
            if inh[f] {
                let s = get(self.init, f, &mut out, &mut work);
                out.set_final(s);
            }
        }
        while let Some((p, q)) = work.pop() {
            let me = get(p, q, &mut out, &mut work);
            for r in self.rules.iter().filter(|r| r.state == p) {
                match &r.lhs {
                    Lhs::Var => {
                        let s = build(&r.rhs, &mut out, &mut |p2, _, out| get(p2, q, out, &mut work));
                        out.add_eps(s, me);
                    }
                    Lhs::Letter(a) => {
                        for t in b.transitions.iter().filter(|t| t.target == q && t.letter == *a) {
                            if !t.children.iter().all(|&c| inh[c]) {
                                continue;
                            }
                            let s = build(&r.rhs, &mut out, &mut |p2, v, out| {
                                get(p2, t.children[v - 1], out, &mut work)
                            });
                            out.add_eps(s, me);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn parse(src: &str) -> Result<Ftt> {
        let mut names: Vec<String> = Vec::new();
        let mut init = None;
        let mut input = RankedAlphabet::new();
        let mut output = RankedAlphabet::new();
        let mut raw_rules = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let line = strip_comment(raw).trim();
            let ln = i + 1;
            if line.is_empty() {
                continue;
            }
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match kw {
                "states" => names.extend(rest.split_whitespace().map(str::to_string)),
                "init" => init = Some(rest.trim().to_string()),
                "input" => input = input.union(&RankedAlphabet::parse_decls(rest)?)?,
                "output" => output = output.union(&RankedAlphabet::parse_decls(rest)?)?,
                "letters" => {
                    let a = RankedAlphabet::parse_decls(rest)?;
                    input = input.union(&a)?;
                    output = output.union(&a)?;
                }
                _ => {
                    let (l, r) = line.split_once("->").ok_or_else(|| perr(ln, "expected `->`"))?;
                    let (p, pat) = l.split_once(',').ok_or_else(|| perr(ln, "expected `state, pattern`"))?;
                    raw_rules.push((ln, p.trim().to_string(), pat.trim().to_string(), r.trim().to_string()));
                }
            }
        }
        let idx = |s: &str, ln: usize| {
            names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| perr(ln, &format!("unknown state {s}")))
        };
        let init = match init {
            Some(s) => idx(&s, 0)?,
            None => 0,
        };
        if names.is_empty() {
            return Err(perr(0, "no states"));
        }
        let mut ftt = Ftt {
            input,
            output,
            states: names.clone(),
            init,
            rules: Vec::new(),
        };
        for (ln, p, pat, rhs) in raw_rules {
            let state = idx(&p, ln)?;
            let pt = Tree::parse(&pat).map_err(|e| perr(ln, &e.to_string()))?;
            let (lhs, vars): (Lhs, Vec<String>) = if pt.label == "x" && pt.children.is_empty() {
                (Lhs::Var, vec!["x".into()])
            } else {
                let vars: Vec<String> = pt.children.iter().map(|c| c.label.clone()).collect();
                if pt.children.iter().any(|c| !c.children.is_empty()) {
                    return Err(perr(ln, "pattern arguments must be variables"));
                }
                ftt.input.add(&pt.label, vars.len())?;
                (Lhs::Letter(pt.label.clone()), vars)
            };
            let rhs = parse_rhs(&rhs, &vars, &names, &mut ftt.output, &lhs, ln)?;
            ftt.rules.push(FttRule { state, lhs, rhs });
        }
        Ok(ftt)
    }
}

fn parse_rhs(
    src: &str,
    vars: &[String],
    states: &[String],
    output: &mut RankedAlphabet,
    lhs: &Lhs,
    ln: usize,
) -> Result<Rhs> {
    let mut p = crate::trees::TermParser::new(src);
    fn go(
        p: &mut crate::trees::TermParser,
        vars: &[String],
        states: &[String],
        output: &mut RankedAlphabet,
        lhs: &Lhs,
    ) -> Result<Rhs> {
        if p.eat('(') {
            let s = p.ident()?;
            p.expect(',')?;
            let v = p.ident()?;
            p.expect(')')?;
            let q = states
                .iter()
                .position(|n| *n == s)
                .ok_or_else(|| Error::Invalid(format!("unknown state {s}")))?;
            let vi = vars
                .iter()
                .position(|n| *n == v)
                .ok_or_else(|| Error::Invalid(format!("unknown variable {v}")))?;
            return Ok(Rhs::Call(q, if *lhs == Lhs::Var { 0 } else { vi + 1 }));
        }
        let a = p.ident()?;
        let mut kids = Vec::new();
        if p.eat('(') && !p.eat(')') {
            loop {
                kids.push(go(p, vars, states, output, lhs)?);
                if p.eat(')') {
                    break;
                }
                p.expect(',')?;
            }
        }
        output.add(&a, kids.len())?;
        Ok(Rhs::Out(a, kids))
    }
    let r = go(&mut p, vars, states, output, lhs).map_err(|e| perr(ln, &e.to_string()))?;
    p.end().map_err(|e| perr(ln, &e.to_string()))?;
    Ok(r)
}

fn instantiate(rhs: &Rhs, sub: &dyn Fn(usize, usize) -> BTreeSet<Tree>, bound: usize) -> BTreeSet<Tree> {
    match rhs {
        Rhs::Call(q, v) => sub(*q, *v).into_iter().filter(|t| t.size() <= bound).collect(),
        Rhs::Out(a, ks) => {
            let mut acc: Vec<(usize, Vec<Tree>)> = vec![(1, Vec::new())];
            for k in ks {
                let opts = instantiate(k, sub, bound);
                let mut next = Vec::new();
                for (sz, prefix) in &acc {
                    for o in &opts {
                        if sz + o.size() <= bound {
                            let mut v = prefix.clone();
                            v.push(o.clone());
                            next.push((sz + o.size(), v));
                        }
                    }
                }
                acc = next;
            }
            acc.into_iter()
                .filter(|(sz, _)| *sz <= bound)
                .map(|(_, v)| Tree::node(a, v))
                .collect()
        }
    }
}

/// Adds states and transitions for `rhs`; returns the state of its root.
fn build(rhs: &Rhs, out: &mut Nfta, call: &mut dyn FnMut(usize, usize, &mut Nfta) -> State) -> State {
    match rhs {
        Rhs::Call(p, v) => call(*p, *v, out),
        Rhs::Out(a, ks) => {
            let cs: Vec<State> = ks.iter().map(|k| build(k, out, call)).collect();
            let s = out.add_state(format!("v{}", out.num_states()));
            out.add_transition(a, cs, s);
            s
        }
    }
}

impl fmt::Display for Ftt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "input {}", self.input)?;
        writeln!(f, "output {}", self.output)?;
        writeln!(f, "states {}", self.states.join(" "))?;
        writeln!(f, "init {}", self.states[self.init])?;
        for r in &self.rules {
            let (pat, vars): (String, Vec<String>) = match &r.lhs {
                Lhs::Var => ("x".into(), vec!["x".into()]),
                Lhs::Letter(a) => {
                    let k = self.input.rank(a).unwrap_or(0);
                    let vs: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
                    if k == 0 {
                        (a.clone(), vs)
                    } else {
                        (format!("{a}({})", vs.join(",")), vs)
                    }
                }
            };
            write!(f, "{}, {pat} -> ", self.states[r.state])?;
            write_rhs(f, &r.rhs, &self.states, &vars)?;
            writeln!(f)?;
        }
        Ok(())
    }
}

fn write_rhs(f: &mut fmt::Formatter<'_>, r: &Rhs, states: &[String], vars: &[String]) -> fmt::Result {
    match r {
        Rhs::Call(q, v) => write!(f, "({},{})", states[*q], vars[v.saturating_sub(1)]),
        Rhs::Out(a, ks) => {
            write!(f, "{a}")?;
            if !ks.is_empty() {
                write!(f, "(")?;
                for (i, k) in ks.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write_rhs(f, k, states, vars)?;
                }
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

fn copy_rule(a: &str, r: usize, child_state: impl Fn(usize) -> usize) -> Rhs {
    Rhs::out(a, (1..=r).map(|i| Rhs::Call(child_state(i), i)).collect())
}

/// Image of `L` is `↓L`: copy a node, or replace it by one of its children.
pub fn builder_downward(sigma: &RankedAlphabet) -> Ftt {
    let mut t = Ftt::new(sigma.clone(), sigma.clone());
    let p = t.add_state("p");
    for (a, r) in sigma.letters() {
        t.add_rule(p, Lhs::Letter(a.to_string()), copy_rule(a, r, |_| p));
        for i in 1..=r {
            t.add_rule(p, Lhs::Letter(a.to_string()), Rhs::Call(p, i));
        }
    }
    t
}

/// Image of `L` is `L ∩ L(r)`: copies the input while running `r`.
pub fn builder_intersect(r: &Nfta) -> Ftt {
    let r = r.without_eps();
    let mut t = Ftt::new(r.alphabet.clone(), r.alphabet.clone());
    for s in &r.states {
        t.add_state(s.clone());
    }
    let init = t.add_state("init");
    t.init = init;
    for tr in &r.transitions {
        t.add_rule(
            tr.target,
            Lhs::Letter(tr.letter.clone()),
            copy_rule(&tr.letter, tr.children.len(), |i| tr.children[i - 1]),
        );
    }
    for &f in &r.finals {
        t.add_rule(init, Lhs::Var, Rhs::Call(f, 0));
    }
    t
}

/// Replaces each letter by any of its marked copies.
pub fn builder_mark(d: &Diversified) -> Ftt {
    let out = d.marked_alphabet();
    let mut input = RankedAlphabet::new();
    for (m, a) in &d.marks {
        let r = out.rank(m).expect("marked letter");
        input.add(a, r).expect("ranks agree");
    }
    let mut t = Ftt::new(input, out.clone());
    let p = t.add_state("p");
    for (m, a) in &d.marks {
        let r = out.rank(m).unwrap();
        t.add_rule(p, Lhs::Letter(a.clone()), copy_rule(m, r, |_| p));
    }
    t
}

/// For each iterator `I*.P'`: on branches without `root(P')`, the final leaf may grow into
/// an arbitrarily tall tree of `root(I*.P')` nodes with copies of that leaf at the frontier.
pub fn builder_pad(d: &Diversified) -> Ftt {
    let sigma = d.marked_alphabet();
    let roots = iterator_roots(&d.product);
    let triggers: Vec<String> = roots.iter().map(|(_, b)| b.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut t = Ftt::new(sigma.clone(), sigma.clone());
    // walk states: subsets of triggers seen so far, as bitmasks
    let k = triggers.len();
    let walk: Vec<usize> = (0..1usize << k)
        .map(|m| t.add_state(format!("w{m}")))
        .collect();
    t.init = walk[0];
    let bit = |a: &str| triggers.iter().position(|x| x == a).map_or(0, |i| 1usize << i);
    let leaves: Vec<String> = sigma.letters().filter(|(_, r)| *r == 0).map(|(l, _)| l.to_string()).collect();
    for m in 0..1usize << k {
        for (a, r) in sigma.letters() {
            let m2 = m | bit(a);
            t.add_rule(walk[m], Lhs::Letter(a.to_string()), copy_rule(a, r, |_| walk[m2]));
        }
        for c in &leaves {
            let seen = m | bit(c);
            let fillers: Vec<&str> = roots
                .iter()
                .filter(|(_, b)| seen & bit(b) == 0)
                .map(|(a, _)| a.as_str())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if fillers.is_empty() {
                continue;
            }
            let f = t.add_state(format!("f{m}_{c}"));
            t.add_rule(walk[m], Lhs::Var, Rhs::Call(f, 0));
            t.add_rule(f, Lhs::Letter(c.clone()), Rhs::out(c, Vec::new()));
            for a in fillers {
                let r = sigma.rank(a).unwrap();
                t.add_rule(f, Lhs::Var, Rhs::out(a, (0..r).map(|_| Rhs::Call(f, 0)).collect()));
            }
        }
    }
    t
}

/// Ignores its input (which must exist) and outputs every chain `a^n(e)`.
pub fn builder_chain(input: &RankedAlphabet, a: &str, e: &str) -> Ftt {
    let out = RankedAlphabet::from_pairs(&[(a, 1), (e, 0)]).expect("distinct letters");
    let mut t = Ftt::new(input.clone(), out);
    let s = t.add_state("s");
    t.add_rule(s, Lhs::Var, Rhs::out(a, vec![Rhs::Call(s, 0)]));
    for (b, _) in input.letters() {
        t.add_rule(s, Lhs::Letter(b.to_string()), Rhs::out(e, Vec::new()));
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stre::{diversify, Stre};
    use crate::trees::downward_closure_of_tree;

    fn t(x: &str) -> Tree {
        Tree::parse(x).unwrap()
    }

    fn alpha() -> RankedAlphabet {
        RankedAlphabet::parse_decls("a/2 b1/1 b2/1 c/0").unwrap()
    }

    #[test]
    fn downward_on_tree() {
        let d = builder_downward(&alpha());
        let x = t("a(b1(c),b2(c))");
        let out = d.apply_to_tree(&x, 20);
        assert_eq!(out, downward_closure_of_tree(&x));
        assert!(out.contains(&t("b1(c)")) && out.contains(&t("c")) && out.contains(&t("a(c,b2(c))")));
        assert_eq!(out.len(), 7);
        assert!(d.is_linear());
    }

    #[test]
    fn downward_on_automaton() {
        let d = builder_downward(&alpha());
        let x = t("a(b1(c),b2(c))");
        let b = Nfta::from_trees(&alpha(), [&x]).unwrap();
        let img = d.apply_to_nfta(&b).unwrap();
        let got: BTreeSet<Tree> = img.enumerate(12).into_iter().collect();
        assert_eq!(got, downward_closure_of_tree(&x));
        assert!(d.apply_to_nfta(&Nfta::empty(alpha())).unwrap().is_empty());
    }

    #[test]
    fn identity_and_no_rule() {
        let id = builder_intersect(&Nfta::universal(&alpha()));
        let x = t("a(b1(c),c)");
        assert_eq!(id.apply_to_tree(&x, 20), BTreeSet::from([x.clone()]));
        let none = Ftt::parse("states p\ninit p\np, c -> c\n").unwrap();
        assert!(none.apply_to_tree(&t("b1(c)"), 10).is_empty());
        let empty = builder_intersect(&Nfta::empty(alpha()));
        assert!(empty.apply_to_tree(&x, 20).is_empty());
    }

    #[test]
    fn parse_display_and_linearity() {
        let src = "states p q\ninit p\np, a(x1,x2) -> a((p,x1),(q,x2))\np, a(x1,x2) -> (p,x1)\nq, c -> c\np, c -> c\nq, x -> b1((q,x))\n";
        let f = Ftt::parse(src).unwrap();
        assert!(f.is_linear());
        assert_eq!(Ftt::parse(&f.to_string()).unwrap(), f);
        let dup = Ftt::parse("states p\ninit p\np, b1(x1) -> a((p,x1),(p,x1))\np, c -> c\n").unwrap();
        assert!(!dup.is_linear());
        let b = Nfta::from_trees(&alpha(), [&t("b1(c)")]).unwrap();
        assert!(matches!(dup.apply_to_nfta(&b), Err(Error::NotLinear(_))));
    }

    #[test]
    fn nfta_image_matches_tree_images() {
        let f = Ftt::parse(
            "states p q\ninit p\np, a(x1,x2) -> a((p,x1),(q,x2))\np, a(x1,x2) -> (q,x2)\np, b1(x1) -> (p,x1)\np, c -> c\nq, x -> b2((q,x))\nq, c -> c\nq, b1(x1) -> b1((q,x1))\n",
        )
        .unwrap();
        let trees = [t("a(b1(c),b1(c))"), t("a(c,c)"), t("b1(a(c,b1(c)))")];
        let b = Nfta::from_trees(&alpha(), trees.iter()).unwrap();
        let img = f.apply_to_nfta(&b).unwrap();
        let bound = 7;
        let mut expected = BTreeSet::new();
        for x in &trees {
            expected.extend(f.apply_to_tree(x, bound));
        }
        let got: BTreeSet<Tree> = img.enumerate(bound).into_iter().collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn intersect_matches_product() {
        let r = crate::stre::to_nfta(&Stre::parse("(b1(#))*.c?()").unwrap());
        let l = crate::stre::to_nfta(&Stre::parse("a?((b1(#) + b2(#))*.c?(), c?())").unwrap());
        let img = builder_intersect(&r).apply_to_nfta(&l).unwrap();
        assert!(img.equivalent(&l.product(&r).unwrap()).unwrap());
    }

    #[test]
    fn marking() {
        let d = diversify(&Stre::parse("a?(b1?(c?()),b1?(c?()))").unwrap());
        let m = builder_mark(&d);
        let out = m.apply_to_tree(&t("a(b1(c),c)"), 10);
        assert_eq!(out.len(), 2 * 2 * 2);
        for u in &out {
            assert_eq!(d.unmark(u), t("a(b1(c),c)"));
        }
    }

    #[test]
    fn padding() {
        let d = diversify(&Stre::parse("a?((b(#))*.c?(), e?())").unwrap());
        let pad = builder_pad(&d);
        // right branch ends in e_1 without c_1: may grow b_1 nodes
        let x = t("a_1(b_1(c_1),e_1)");
        let outs = pad.apply_to_tree(&x, 12);
        assert!(outs.contains(&x));
        assert!(outs.contains(&t("a_1(b_1(c_1),b_1(b_1(e_1)))")));
        assert!(!outs.iter().any(|u| u.children[0] != x.children[0]));
        for n in 1..5 {
            assert!(outs.iter().any(|u| u.children[1].min_branch_count("b_1") >= n));
        }
        let img = pad.apply_to_nfta(&Nfta::from_trees(&d.marked_alphabet(), [&x]).unwrap()).unwrap();
        assert_eq!(img.enumerate(12).into_iter().collect::<BTreeSet<_>>(), outs);
    }

    #[test]
    fn padding_with_binary_filler() {
        let d = diversify(&Stre::parse("g?((a(#,#))*.c?(), e?())").unwrap());
        let pad = builder_pad(&d);
        let x = t("g_1(a_1(c_1,c_1),e_1)");
        let outs = pad.apply_to_tree(&x, 11);
        assert!(outs.contains(&t("g_1(a_1(c_1,c_1),a_1(a_1(e_1,e_1),a_1(e_1,e_1)))")));
        let img = pad.apply_to_nfta(&Nfta::from_trees(&d.marked_alphabet(), [&x]).unwrap()).unwrap();
        assert_eq!(img.enumerate(11).into_iter().collect::<BTreeSet<_>>(), outs);
    }

    #[test]
    fn chain_transducer() {
        let ch = builder_chain(&alpha(), "a", "e");
        let outs = ch.apply_to_tree(&t("b1(c)"), 4);
        assert_eq!(outs, BTreeSet::from([t("e"), t("a(e)"), t("a(a(e))"), t("a(a(a(e)))")]));
        assert!(ch.apply_to_nfta(&Nfta::empty(alpha())).unwrap().is_empty());
    }
}
