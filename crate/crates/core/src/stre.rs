//! Simple tree regular expressions: syntax, compilation to automata, the
//! one-step rewrite relation and its normal forms, pure products, versatile trees.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fta::{Nfta, State};
use crate::trees::{RankedAlphabet, Tree, HOLE};

/// A sum of pre-products; the empty sum is `0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stre(pub Vec<Pre>);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pre {
    /// `a?(S1,…,Sr)`
    Opt(String, Vec<Stre>),
    /// `(C1 + … + Ck)*.S`; an empty iterator prints as `0*.S`.
    Iter(Vec<Ctx>, Box<Stre>),
}

/// `a(S□1,…,S□r)`
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ctx {
    pub letter: String,
    pub args: Vec<Slot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Hole,
    Expr(Stre),
}

impl Stre {
    pub fn zero() -> Stre {
        Stre(Vec::new())
    }

    pub fn single(p: Pre) -> Stre {
        Stre(vec![p])
    }

    pub fn opt(a: &str, kids: Vec<Stre>) -> Stre {
        Stre::single(Pre::Opt(a.to_string(), kids))
    }

    pub fn iter(ctxs: Vec<Ctx>, body: Stre) -> Stre {
        Stre::single(Pre::Iter(ctxs, Box::new(body)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parse(src: &str) -> Result<Stre> {
        let mut p = Parser { s: src.as_bytes(), src, pos: 0 };
        let s = p.sum()?;
        p.ws();
        if p.pos != p.s.len() {
            return p.fail("trailing input");
        }
        s.alphabet()?;
        Ok(s)
    }

    /// Letters with ranks; `#` is included when holes occur.
    pub fn alphabet(&self) -> Result<RankedAlphabet> {
        let mut m: BTreeMap<String, usize> = BTreeMap::new();
        let mut holes = false;
        let mut add = |l: &str, r: usize| -> Result<()> {
            match m.insert(l.to_string(), r) {
                Some(old) if old != r => Err(Error::Alphabet(format!("letter {l} used with ranks {old} and {r}"))),
                _ => Ok(()),
            }
        };
        fn walk(s: &Stre, add: &mut dyn FnMut(&str, usize) -> Result<()>, holes: &mut bool) -> Result<()> {
            for p in &s.0 {
                match p {
                    Pre::Opt(a, kids) => {
                        add(a, kids.len())?;
                        for k in kids {
                            walk(k, add, holes)?;
                        }
                    }
                    Pre::Iter(cs, body) => {
                        for c in cs {
                            add(&c.letter, c.args.len())?;
                            for sl in &c.args {
                                match sl {
                                    Slot::Hole => *holes = true,
                                    Slot::Expr(e) => walk(e, add, holes)?,
                                }
                            }
                        }
                        walk(body, add, holes)?;
                    }
                }
            }
            Ok(())
        }
        walk(self, &mut add, &mut holes)?;
        let mut a = RankedAlphabet::new();
        for (l, r) in m {
            a.add(&l, r)?;
        }
        if holes {
            a.add(HOLE, 0)?;
        }
        Ok(a)
    }

    /// Letters, holes, plus one per iterator star.
    pub fn size(&self) -> usize {
        self.0.iter().map(Pre::size).sum()
    }

    /// Syntactic nonemptiness of the denotation.
    pub fn nonempty(&self) -> bool {
        self.0.iter().any(Pre::nonempty)
    }

    pub fn letters(&self) -> BTreeSet<String> {
        self.alphabet()
            .map(|a| a.letters().filter(|(l, _)| *l != HOLE).map(|(l, _)| l.to_string()).collect())
            .unwrap_or_default()
    }

    fn map_letters(&self, f: &mut dyn FnMut(&str) -> String) -> Stre {
        Stre(self.0.iter().map(|p| p.map_letters(f)).collect())
    }
}

impl Pre {
    pub fn size(&self) -> usize {
        match self {
            Pre::Opt(_, kids) => 1 + kids.iter().map(Stre::size).sum::<usize>(),
            Pre::Iter(cs, body) => 1 + cs.iter().map(Ctx::size).sum::<usize>() + body.size(),
        }
    }

    pub fn nonempty(&self) -> bool {
        match self {
            Pre::Opt(_, kids) => kids.iter().all(Stre::nonempty),
            Pre::Iter(cs, body) => {
                body.nonempty()
                    || cs.iter().any(|c| {
                        c.exprs_nonempty()
                            && (c.is_hole_free() || c.args.iter().any(|s| matches!(s, Slot::Expr(_))))
                    })
            }
        }
    }

    /// Label at the root of every versatile tree.
    pub fn root(&self) -> &str {
        match self {
            Pre::Opt(a, _) => a,
            Pre::Iter(cs, _) => &cs[0].letter,
        }
    }

    fn map_letters(&self, f: &mut dyn FnMut(&str) -> String) -> Pre {
        match self {
            Pre::Opt(a, kids) => {
                let a = f(a);
                Pre::Opt(a, kids.iter().map(|k| k.map_letters(f)).collect())
            }
            Pre::Iter(cs, body) => {
                let cs = cs
                    .iter()
                    .map(|c| {
                        let letter = f(&c.letter);
                        Ctx {
                            letter,
                            args: c
                                .args
                                .iter()
                                .map(|s| match s {
                                    Slot::Hole => Slot::Hole,
                                    Slot::Expr(e) => Slot::Expr(e.map_letters(f)),
                                })
                                .collect(),
                        }
                    })
                    .collect();
                Pre::Iter(cs, Box::new(body.map_letters(f)))
            }
        }
    }
}

impl Ctx {
    pub fn new(letter: &str, args: Vec<Slot>) -> Ctx {
        Ctx {
            letter: letter.to_string(),
            args,
        }
    }

    pub fn size(&self) -> usize {
        1 + self
            .args
            .iter()
            .map(|s| match s {
                Slot::Hole => 1,
                Slot::Expr(e) => e.size(),
            })
            .sum::<usize>()
    }

    pub fn holes(&self) -> usize {
        self.args.iter().filter(|s| matches!(s, Slot::Hole)).count()
    }

    pub fn is_hole_free(&self) -> bool {
        self.holes() == 0
    }

    pub fn is_linear(&self) -> bool {
        self.holes() <= 1
    }

    pub fn is_full(&self) -> bool {
        !self.args.is_empty() && self.holes() == self.args.len()
    }

    fn exprs_nonempty(&self) -> bool {
        self.args.iter().all(|s| match s {
            Slot::Hole => true,
            Slot::Expr(e) => e.nonempty(),
        })
    }
}

impl fmt::Display for Stre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

fn write_args<T: fmt::Display>(f: &mut fmt::Formatter<'_>, xs: &[T]) -> fmt::Result {
    write!(f, "(")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Pre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pre::Opt(a, kids) => {
                write!(f, "{a}?")?;
                write_args(f, kids)
            }
            Pre::Iter(cs, body) => {
                if cs.is_empty() {
                    write!(f, "0")?;
                } else {
                    write!(f, "(")?;
                    for (i, c) in cs.iter().enumerate() {
                        if i > 0 {
                            write!(f, " + ")?;
                        }
                        write!(f, "{c}")?;
                    }
                    write!(f, ")")?;
                }
                if body.0.len() == 1 {
                    write!(f, "*.{body}")
                } else {
                    write!(f, "*.({body})")
                }
            }
        }
    }
}

impl fmt::Display for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter)?;
        if self.args.is_empty() {
            Ok(())
        } else {
            write_args(f, &self.args)
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Hole => write!(f, "{HOLE}"),
            Slot::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl FromStr for Stre {
    type Err = Error;
    fn from_str(s: &str) -> Result<Stre> {
        Stre::parse(s)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(&format!("expected `{}`", c as char))
        }
    }

    fn fail<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Invalid(format!("{msg} at offset {} in `{}`", self.pos, self.src)))
    }

    fn ident(&mut self) -> Result<String> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return self.fail("expected letter");
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn sum(&mut self) -> Result<Stre> {
        let mut out = self.summand()?;
        while self.eat(b'+') {
            out.extend(self.summand()?);
        }
        Ok(Stre(out))
    }

    /// One summand; a parenthesized sum contributes all its pre-products.
    fn summand(&mut self) -> Result<Vec<Pre>> {
        match self.peek() {
            Some(b'0') => {
                self.pos += 1;
                if self.eat(b'*') {
                    self.expect(b'.')?;
                    let body = self.unit()?;
                    Ok(vec![Pre::Iter(Vec::new(), Box::new(body))])
                } else {
                    Ok(Vec::new())
                }
            }
            Some(b'{') => {
                self.pos += 1;
                let cs = self.contexts()?;
                self.expect(b'}')?;
                self.star_body(cs)
            }
            Some(b'(') => {
                let save = self.pos;
                self.pos += 1;
                if let Ok(cs) = self.contexts() {
                    if self.eat(b')') && self.peek() == Some(b'*') {
                        return self.star_body(cs);
                    }
                }
                self.pos = save + 1;
                let s = self.sum()?;
                self.expect(b')')?;
                Ok(s.0)
            }
            _ => {
                let a = self.ident()?;
                self.expect(b'?')?;
                let mut kids = Vec::new();
                if self.eat(b'(') && !self.eat(b')') {
                    loop {
                        kids.push(self.sum()?);
                        if self.eat(b')') {
                            break;
                        }
                        self.expect(b',')?;
                    }
                }
                Ok(vec![Pre::Opt(a, kids)])
            }
        }
    }

    fn star_body(&mut self, cs: Vec<Ctx>) -> Result<Vec<Pre>> {
        self.expect(b'*')?;
        self.expect(b'.')?;
        let body = self.unit()?;
        Ok(vec![Pre::Iter(cs, Box::new(body))])
    }

    fn unit(&mut self) -> Result<Stre> {
        Ok(Stre(self.summand()?))
    }

    fn contexts(&mut self) -> Result<Vec<Ctx>> {
        let mut cs = vec![self.context()?];
        while self.eat(b'+') {
            cs.push(self.context()?);
        }
        Ok(cs)
    }

    fn context(&mut self) -> Result<Ctx> {
        let letter = self.ident()?;
        let mut args = Vec::new();
        if self.eat(b'(') && !self.eat(b')') {
            loop {
                if self.eat(b'#') {
                    args.push(Slot::Hole);
                } else {
                    args.push(Slot::Expr(self.sum()?));
                }
                if self.eat(b')') {
                    break;
                }
                self.expect(b',')?;
            }
        }
        Ok(Ctx { letter, args })
    }
}

// ---------------------------------------------------------------- semantics

struct Compiler {
    a: Nfta,
    hole: Option<State>,
}

impl Compiler {
    fn new(alphabet: RankedAlphabet) -> Self {
        Compiler {
            a: Nfta::new(alphabet),
            hole: None,
        }
    }

    fn sum(&mut self, s: &Stre) -> State {
        let q = self.a.add_state(format!("s{}", self.a.num_states()));
        for p in &s.0 {
            let r = self.pre(p);
            self.a.add_eps(r, q);
        }
        q
    }

    fn pre(&mut self, p: &Pre) -> State {
        match p {
            Pre::Opt(l, kids) => {
                let ks: Vec<State> = kids.iter().map(|k| self.sum(k)).collect();
                let q = self.a.add_state(format!("o{}", self.a.num_states()));
                self.a.add_transition(l, ks, q);
                q
            }
            Pre::Iter(cs, body) => {
                let x = self.a.add_state(format!("x{}", self.a.num_states()));
                let b = self.sum(body);
                self.a.add_eps(b, x);
                for c in cs {
                    let ks = self.ctx(c, x);
                    // Dropping the context root leaves the non-hole arguments.
                    if c.exprs_nonempty() {
                        for (s, k) in c.args.iter().zip(ks) {
                            if matches!(s, Slot::Expr(_)) {
                                self.a.add_eps(k, x);
                            }
                        }
                    }
                }
                x
            }
        }
    }

    /// `c(...) -> target` with holes read in `hole_state`.
    fn ctx(&mut self, c: &Ctx, hole_state: State) -> Vec<State> {
        let ks: Vec<State> = c
            .args
            .iter()
            .map(|s| match s {
                Slot::Hole => hole_state,
                Slot::Expr(e) => self.sum(e),
            })
            .collect();
        self.a.add_transition(&c.letter, ks.clone(), hole_state);
        ks
    }

    fn hole_state(&mut self) -> State {
        if let Some(h) = self.hole {
            return h;
        }
        let h = self.a.add_state("hole");
        self.a.add_transition(HOLE, Vec::new(), h);
        self.hole = Some(h);
        h
    }
}

/// Automaton for the (downward-closed) denotation.
pub fn to_nfta(s: &Stre) -> Nfta {
    let alphabet = s.alphabet().expect("ranks checked at construction");
    let mut c = Compiler::new(alphabet);
    let q = c.sum(s);
    c.a.set_final(q);
    c.a.downward_closure()
}

/// Automaton for the denotation of a context; holes are the letter `#`.
pub fn ctx_to_nfta(ctx: &Ctx) -> Nfta {
    let s = Stre::iter(vec![ctx.clone()], Stre::zero());
    let mut alphabet = s.alphabet().expect("ranks checked at construction");
    alphabet.add(HOLE, 0).expect("hole is rank 0");
    let mut c = Compiler::new(alphabet);
    let h = c.hole_state();
    let ks: Vec<State> = ctx
        .args
        .iter()
        .map(|sl| match sl {
            Slot::Hole => h,
            Slot::Expr(e) => c.sum(e),
        })
        .collect();
    let q = c.a.add_state("ctx");
    c.a.add_transition(&ctx.letter, ks, q);
    c.a.set_final(q);
    c.a.downward_closure()
}

/// Compilation that applies the union formula locally at each optional and context
/// instead of one closure at the end.
pub fn to_nfta_by_star(s: &Stre) -> Nfta {
    fn sum(a: &mut Nfta, s: &Stre) -> State {
        let q = a.add_state(format!("s{}", a.num_states()));
        for p in &s.0 {
            let r = pre(a, p);
            a.add_eps(r, q);
        }
        q
    }
    fn pre(a: &mut Nfta, p: &Pre) -> State {
        let q = a.add_state(format!("p{}", a.num_states()));
        match p {
            Pre::Opt(l, kids) => {
                if !kids.iter().all(Stre::nonempty) {
                    return q;
                }
                let ks: Vec<State> = kids.iter().map(|k| sum(a, k)).collect();
                for &k in &ks {
                    a.add_eps(k, q);
                }
                a.add_transition(l, ks, q);
            }
            Pre::Iter(cs, body) => {
                let b = sum(a, body);
                a.add_eps(b, q);
                for c in cs {
                    if !c.exprs_nonempty() {
                        continue;
                    }
                    let ks: Vec<State> = c
                        .args
                        .iter()
                        .map(|sl| match sl {
                            Slot::Hole => q,
                            Slot::Expr(e) => sum(a, e),
                        })
                        .collect();
                    for &k in &ks {
                        a.add_eps(k, q);
                    }
                    a.add_transition(&c.letter, ks, q);
                }
            }
        }
        q
    }
    let mut a = Nfta::new(s.alphabet().expect("ranks checked at construction"));
    let q = sum(&mut a, s);
    a.set_final(q);
    a
}

pub fn member(t: &Tree, s: &Stre) -> bool {
    to_nfta(s).member(t)
}

/// `⟦s1⟧ ⊆ ⟦s2⟧`.
pub fn stre_includes(s1: &Stre, s2: &Stre) -> bool {
    to_nfta(s2).includes(&to_nfta(s1)).expect("alphabets agree on ranks")
}

pub fn stre_equivalent(s1: &Stre, s2: &Stre) -> bool {
    stre_includes(s1, s2) && stre_includes(s2, s1)
}

fn pre_includes(p: &Pre, q: &Pre) -> bool {
    stre_includes(&Stre::single(p.clone()), &Stre::single(q.clone()))
}

fn ctx_includes(c: &Ctx, d: &Ctx) -> bool {
    ctx_to_nfta(d).includes(&ctx_to_nfta(c)).unwrap_or(false)
}

// ---------------------------------------------------------------- rewriting

fn splits(n: usize) -> impl Iterator<Item = usize> {
    // index of the summand split off from the rest
    0..n
}

fn split_off(s: &Stre, k: usize) -> (Stre, Stre) {
    let one = Stre::single(s.0[k].clone());
    let mut rest = s.0.clone();
    rest.remove(k);
    (one, Stre(rest))
}

fn replace_at<T: Clone>(v: &[T], i: usize, x: T) -> Vec<T> {
    let mut out = v.to_vec();
    out[i] = x;
    out
}

fn is_full(cs: &[Ctx]) -> bool {
    cs.iter().all(Ctx::is_full)
}

fn is_linear(cs: &[Ctx]) -> bool {
    cs.iter().all(Ctx::is_linear)
}

/// Every result of one rewrite step anywhere in `s`.
pub fn all_steps(s: &Stre) -> Vec<Stre> {
    let mut out = BTreeSet::new();
    let ps = &s.0;
    // (1)
    for i in 0..ps.len() {
        for j in 0..ps.len() {
            if i != j && pre_includes(&ps[i], &ps[j]) {
                let mut v = ps.clone();
                v.remove(i);
                out.insert(Stre(v));
            }
        }
    }
    for i in 0..ps.len() {
        for r in pre_top_steps(&ps[i]) {
            let mut v = ps[..i].to_vec();
            v.extend(r.0);
            v.extend_from_slice(&ps[i + 1..]);
            out.insert(Stre(v));
        }
        for p in pre_inner_steps(&ps[i]) {
            out.insert(Stre(replace_at(ps, i, p)));
        }
    }
    out.into_iter().collect()
}

/// Steps rewriting a pre-product into a sum: rules (3), (4), (6), (8), (10).
fn pre_top_steps(p: &Pre) -> Vec<Stre> {
    let mut out = Vec::new();
    match p {
        Pre::Opt(a, kids) => {
            if kids.iter().any(Stre::is_zero) {
                out.push(Stre::zero());
            }
            for (j, k) in kids.iter().enumerate() {
                if k.0.len() >= 2 {
                    for m in splits(k.0.len()) {
                        let (one, rest) = split_off(k, m);
                        out.push(Stre(vec![
                            Pre::Opt(a.clone(), replace_at(kids, j, one)),
                            Pre::Opt(a.clone(), replace_at(kids, j, rest)),
                        ]));
                    }
                }
            }
        }
        Pre::Iter(cs, body) => {
            if cs.is_empty() {
                out.push((**body).clone());
            }
            if body.is_zero() && is_full(cs) {
                out.push(Stre::zero());
            }
            if body.0.len() >= 2 && is_linear(cs) {
                for m in splits(body.0.len()) {
                    let (one, rest) = split_off(body, m);
                    out.push(Stre(vec![
                        Pre::Iter(cs.clone(), Box::new(one)),
                        Pre::Iter(cs.clone(), Box::new(rest)),
                    ]));
                }
            }
        }
    }
    out
}

/// Steps rewriting a pre-product into one pre-product: rules (2), (5), (7), (9) and
/// steps inside subexpressions.
fn pre_inner_steps(p: &Pre) -> Vec<Pre> {
    let mut out = Vec::new();
    match p {
        Pre::Opt(a, kids) => {
            for (j, k) in kids.iter().enumerate() {
                for k2 in all_steps(k) {
                    out.push(Pre::Opt(a.clone(), replace_at(kids, j, k2)));
                }
            }
        }
        Pre::Iter(cs, body) => {
            let mk = |cs: Vec<Ctx>, b: Stre| Pre::Iter(cs, Box::new(b));
            for i in 0..cs.len() {
                let mut rest = cs.clone();
                let c = rest.remove(i);
                // (7)
                if c.is_hole_free() {
                    let kids = c
                        .args
                        .iter()
                        .map(|s| match s {
                            Slot::Expr(e) => e.clone(),
                            Slot::Hole => unreachable!(),
                        })
                        .collect();
                    let mut b = body.0.clone();
                    b.push(Pre::Opt(c.letter.clone(), kids));
                    out.push(mk(rest.clone(), Stre(b)));
                }
                // (2)
                for (j, d) in cs.iter().enumerate() {
                    if i != j && ctx_includes(&c, d) {
                        out.push(mk(rest.clone(), (**body).clone()));
                    }
                }
                for (j, sl) in c.args.iter().enumerate() {
                    let Slot::Expr(e) = sl else { continue };
                    // (5)
                    if e.is_zero() {
                        out.push(mk(rest.clone(), (**body).clone()));
                    }
                    // (9)
                    if e.0.len() >= 2 {
                        for m in splits(e.0.len()) {
                            let (one, other) = split_off(e, m);
                            let mut v = rest.clone();
                            v.insert(i, Ctx::new(&c.letter, replace_at(&c.args, j, Slot::Expr(other))));
                            v.insert(i, Ctx::new(&c.letter, replace_at(&c.args, j, Slot::Expr(one))));
                            out.push(mk(v, (**body).clone()));
                        }
                    }
                    for e2 in all_steps(e) {
                        let c2 = Ctx::new(&c.letter, replace_at(&c.args, j, Slot::Expr(e2)));
                        out.push(mk(replace_at(cs, i, c2), (**body).clone()));
                    }
                }
            }
            for b2 in all_steps(body) {
                out.push(mk(cs.clone(), b2));
            }
        }
    }
    out
}

/// Drops summands included in another summand (rule (1)).
fn absorb(ps: Vec<Pre>) -> Vec<Pre> {
    let mut v: Vec<Pre> = Vec::new();
    for p in ps {
        if !v.contains(&p) {
            v.push(p);
        }
    }
    'again: loop {
        for i in 0..v.len() {
            for j in 0..v.len() {
                if i != j && pre_includes(&v[i], &v[j]) {
                    v.remove(i);
                    continue 'again;
                }
            }
        }
        return v;
    }
}

fn absorb_ctx(cs: Vec<Ctx>) -> Vec<Ctx> {
    let mut v: Vec<Ctx> = Vec::new();
    for c in cs {
        if !v.contains(&c) {
            v.push(c);
        }
    }
    'again: loop {
        for i in 0..v.len() {
            for j in 0..v.len() {
                if i != j && ctx_includes(&v[i], &v[j]) {
                    v.remove(i);
                    continue 'again;
                }
            }
        }
        return v;
    }
}

/// Cartesian distribution of a sequence of sums.
fn distribute(kids: &[Stre]) -> Vec<Vec<Stre>> {
    let mut acc: Vec<Vec<Stre>> = vec![Vec::new()];
    for k in kids {
        let mut next = Vec::new();
        for prefix in &acc {
            for p in &k.0 {
                let mut v = prefix.clone();
                v.push(Stre::single(p.clone()));
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// An irreducible sum of products with the same denotation.
pub fn normalize(s: &Stre) -> Stre {
    let mut out = Vec::new();
    for p in &s.0 {
        out.extend(normalize_pre(p).0);
    }
    Stre(absorb(out))
}

fn normalize_pre(p: &Pre) -> Stre {
    match p {
        Pre::Opt(a, kids) => {
            let kids: Vec<Stre> = kids.iter().map(normalize).collect();
            if kids.iter().any(Stre::is_zero) {
                return Stre::zero();
            }
            Stre(
                distribute(&kids)
                    .into_iter()
                    .map(|ks| Pre::Opt(a.clone(), ks))
                    .collect(),
            )
        }
        Pre::Iter(cs, body) => {
            let mut ctxs = Vec::new();
            for c in cs {
                let slots: Vec<Stre> = c
                    .args
                    .iter()
                    .map(|sl| match sl {
                        Slot::Hole => Stre::zero(),
                        Slot::Expr(e) => normalize(e),
                    })
                    .collect();
                if c.args.iter().zip(&slots).any(|(sl, e)| matches!(sl, Slot::Expr(_)) && e.is_zero()) {
                    continue;
                }
                // distribute over expression slots only
                let mut acc: Vec<Vec<Slot>> = vec![Vec::new()];
                for (sl, e) in c.args.iter().zip(&slots) {
                    let mut next = Vec::new();
                    for prefix in &acc {
                        match sl {
                            Slot::Hole => {
                                let mut v = prefix.clone();
                                v.push(Slot::Hole);
                                next.push(v);
                            }
                            Slot::Expr(_) => {
                                for q in &e.0 {
                                    let mut v = prefix.clone();
                                    v.push(Slot::Expr(Stre::single(q.clone())));
                                    next.push(v);
                                }
                            }
                        }
                    }
                    acc = next;
                }
                ctxs.extend(acc.into_iter().map(|args| Ctx::new(&c.letter, args)));
            }
            let mut b = body.0.clone();
            let mut holey = Vec::new();
            for c in ctxs {
                if c.is_hole_free() {
                    let kids = c
                        .args
                        .into_iter()
                        .map(|s| match s {
                            Slot::Expr(e) => e,
                            Slot::Hole => unreachable!(),
                        })
                        .collect();
                    b.push(Pre::Opt(c.letter, kids));
                } else {
                    holey.push(c);
                }
            }
            let ctxs = absorb_ctx(holey);
            let body = normalize(&Stre(b));
            if ctxs.is_empty() {
                return body;
            }
            if body.is_zero() && is_full(&ctxs) {
                return Stre::zero();
            }
            if body.0.len() >= 2 && is_linear(&ctxs) {
                return Stre(
                    body.0
                        .into_iter()
                        .map(|q| Pre::Iter(ctxs.clone(), Box::new(Stre::single(q))))
                        .collect(),
                );
            }
            Stre::iter(ctxs, body)
        }
    }
}

pub fn is_irreducible(s: &Stre) -> bool {
    all_steps(s).is_empty()
}

// ---------------------------------------------------------------- pure products

/// Syntactic check: a single pre-product whose iterators are nonempty sums of
/// contexts with at least one hole each, all subexpressions pure.
pub fn is_pure_product(s: &Stre) -> bool {
    s.0.len() == 1 && is_pure_pre(&s.0[0])
}

fn is_pure_pre(p: &Pre) -> bool {
    match p {
        Pre::Opt(_, kids) => kids.iter().all(is_pure_product),
        Pre::Iter(cs, body) => {
            !cs.is_empty()
                && cs.iter().all(|c| {
                    c.holes() >= 1
                        && c.args.iter().all(|s| match s {
                            Slot::Hole => true,
                            Slot::Expr(e) => is_pure_product(e),
                        })
                })
                && is_pure_product(body)
        }
    }
}

/// Equivalent pure product of an irreducible product.
pub fn to_pure_product(p: &Stre) -> Result<Stre> {
    if p.0.len() != 1 || !is_irreducible(p) {
        return Err(Error::NotIrreducible(format!("{p} is not a product")));
    }
    pure(&p.0[0]).map(Stre::single)
}

fn pure_single(s: &Stre) -> Result<Pre> {
    if s.0.len() != 1 {
        return Err(Error::NotIrreducible(format!("expected a single product, found `{s}`")));
    }
    pure(&s.0[0])
}

fn pure(p: &Pre) -> Result<Pre> {
    match p {
        Pre::Opt(a, kids) => Ok(Pre::Opt(
            a.clone(),
            kids.iter()
                .map(|k| pure_single(k).map(Stre::single))
                .collect::<Result<_>>()?,
        )),
        Pre::Iter(cs, body) => {
            let ctxs: Vec<Ctx> = cs
                .iter()
                .map(|c| {
                    Ok(Ctx::new(
                        &c.letter,
                        c.args
                            .iter()
                            .map(|s| match s {
                                Slot::Hole => Ok(Slot::Hole),
                                Slot::Expr(e) => Ok(Slot::Expr(Stre::single(pure_single(e)?))),
                            })
                            .collect::<Result<_>>()?,
                    ))
                })
                .collect::<Result<_>>()?;
            let ps: Vec<Pre> = body.0.iter().map(pure).collect::<Result<_>>()?;
            let mk = |b: Stre| Pre::Iter(ctxs.clone(), Box::new(b));
            match ps.len() {
                1 => Ok(mk(Stre(ps))),
                0 => {
                    let e = ctxs
                        .iter()
                        .flat_map(|c| c.args.iter())
                        .find_map(|s| match s {
                            Slot::Expr(e) => Some(e.clone()),
                            Slot::Hole => None,
                        })
                        .ok_or_else(|| Error::NotIrreducible("full iterator over an empty body".into()))?;
                    Ok(mk(e))
                }
                k => {
                    let c = ctxs
                        .iter()
                        .find(|c| c.holes() >= 2)
                        .ok_or_else(|| Error::NotIrreducible("linear iterator over a sum".into()))?;
                    let holes: Vec<usize> = (0..c.args.len()).filter(|&i| matches!(c.args[i], Slot::Hole)).collect();
                    let fill = |first: Stre, rest: &Pre| -> Pre {
                        let kids = c
                            .args
                            .iter()
                            .enumerate()
                            .map(|(i, s)| match s {
                                Slot::Expr(e) => e.clone(),
                                Slot::Hole if i == holes[0] => first.clone(),
                                Slot::Hole => Stre::single(rest.clone()),
                            })
                            .collect();
                        Pre::Opt(c.letter.clone(), kids)
                    };
                    let mut r = fill(Stre::single(ps[0].clone()), &ps[0]);
                    for p in ps.iter().take(k).skip(1) {
                        r = fill(Stre::single(r), p);
                    }
                    Ok(mk(Stre::single(r)))
                }
            }
        }
    }
}

// ---------------------------------------------------------------- diversification

/// A pure product in which every letter occurs once, with the map back to the
/// original letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diversified {
    pub product: Stre,
    pub marks: BTreeMap<String, String>,
}

pub fn is_diversified(s: &Stre) -> bool {
    let mut seen = BTreeSet::new();
    let mut ok = true;
    s.map_letters(&mut |l| {
        ok &= seen.insert(l.to_string());
        l.to_string()
    });
    ok
}

/// Renames the k-th occurrence of `a` (left to right) to `a_k`.
pub fn diversify(p: &Stre) -> Diversified {
    let mut count: BTreeMap<String, usize> = BTreeMap::new();
    let mut marks = BTreeMap::new();
    let product = p.map_letters(&mut |l| {
        let k = count.entry(l.to_string()).or_insert(0);
        *k += 1;
        let m = format!("{l}_{k}");
        marks.insert(m.clone(), l.to_string());
        m
    });
    Diversified { product, marks }
}

impl Diversified {
    pub fn unmark(&self, t: &Tree) -> Tree {
        t.map_labels(&|l| self.marks.get(l).cloned().unwrap_or_else(|| l.to_string()))
    }

    pub fn marked_alphabet(&self) -> RankedAlphabet {
        self.product.alphabet().expect("ranks checked at construction")
    }
}

// ---------------------------------------------------------------- versatile trees

/// Automaton for the versatile trees of a pure product: contexts of each iterator are
/// stacked in their listed order, at least one full round, then the body.
pub fn versatile_nfta(p: &Stre) -> Result<Nfta> {
    if !is_pure_product(p) {
        return Err(Error::Precondition(format!("`{p}` is not a pure product")));
    }
    let mut a = Nfta::new(p.alphabet()?);
    let q = ct_pre(&mut a, &p.0[0]);
    a.set_final(q);
    Ok(a)
}

fn ct_pre(a: &mut Nfta, p: &Pre) -> State {
    match p {
        Pre::Opt(l, kids) => {
            let ks: Vec<State> = kids.iter().map(|k| ct_pre(a, &k.0[0])).collect();
            let q = a.add_state(format!("ct{}", a.num_states()));
            a.add_transition(l, ks, q);
            q
        }
        Pre::Iter(cs, body) => {
            let b = ct_pre(a, &body.0[0]);
            let z = a.add_state(format!("z{}", a.num_states()));
            let mut target = z;
            for c in cs.iter().rev() {
                let ks: Vec<State> = c
                    .args
                    .iter()
                    .map(|s| match s {
                        Slot::Hole => target,
                        Slot::Expr(e) => ct_pre(a, &e.0[0]),
                    })
                    .collect();
                let q = a.add_state(format!("c{}", a.num_states()));
                a.add_transition(&c.letter, ks, q);
                target = q;
            }
            a.add_eps(b, z);
            a.add_eps(target, z);
            target
        }
    }
}

/// The versatile tree in which every iterator contributes exactly `max(n,1)` rounds
/// on every branch.
pub fn canonical_versatile_tree(p: &Stre, n: usize) -> Result<Tree> {
    if !is_pure_product(p) {
        return Err(Error::Precondition(format!("`{p}` is not a pure product")));
    }
    Ok(ct_tree(&p.0[0], n))
}

fn ct_tree(p: &Pre, n: usize) -> Tree {
    match p {
        Pre::Opt(l, kids) => Tree::node(l, kids.iter().map(|k| ct_tree(&k.0[0], n)).collect()),
        Pre::Iter(cs, body) => {
            let mut t = ct_tree(&body.0[0], n);
            for _ in 0..n.max(1) {
                for c in cs.iter().rev() {
                    let kids = c
                        .args
                        .iter()
                        .map(|s| match s {
                            Slot::Hole => t.clone(),
                            Slot::Expr(e) => ct_tree(&e.0[0], n),
                        })
                        .collect();
                    t = Tree::node(&c.letter, kids);
                }
            }
            t
        }
    }
}

/// `(root(I*.P'), root(P'))` for every iterator subexpression.
pub fn iterator_roots(p: &Stre) -> Vec<(String, String)> {
    fn go(s: &Stre, out: &mut Vec<(String, String)>) {
        for p in &s.0 {
            match p {
                Pre::Opt(_, kids) => kids.iter().for_each(|k| go(k, out)),
                Pre::Iter(cs, body) => {
                    if let (Some(c), Some(b)) = (cs.first(), body.0.first()) {
                        out.push((c.letter.clone(), b.root().to_string()));
                    }
                    for c in cs {
                        for s in &c.args {
                            if let Slot::Expr(e) = s {
                                go(e, out);
                            }
                        }
                    }
                    go(body, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    go(p, &mut out);
    out
}

/// Every occurrence of `root(P')` has at least `n` proper ancestors labeled
/// `root(I*.P')`, for each iterator subexpression `I*.P'`.
pub fn is_n_large_wrt(t: &Tree, p: &Stre, n: usize) -> bool {
    iterator_roots(p).iter().all(|(above, below)| min_ancestors(t, above, below, 0) >= n)
}

fn min_ancestors(t: &Tree, above: &str, below: &str, seen: usize) -> usize {
    let here = if t.label == below { seen } else { usize::MAX };
    let inc = seen + usize::from(t.label == above);
    t.children
        .iter()
        .map(|c| min_ancestors(c, above, below, inc))
        .fold(here, usize::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{all_trees, embeds_unchecked};

    fn s(x: &str) -> Stre {
        Stre::parse(x).unwrap()
    }

    fn t(x: &str) -> Tree {
        Tree::parse(x).unwrap()
    }

    const NESTED_A: &str = "(a(b?(),#))*.c?()";

    #[test]
    fn parse_print_round_trip() {
        for src in [
            "0",
            "c?()",
            NESTED_A,
            "(a(#,#))*.(c?() + d?())",
            "{a(#) + b(#,c?())}*.0",
            "0*.c?()",
            "a?(b?() + c?(), 0)",
            "(a1(#))*.(a2(#))*.e?()",
            "(a(c?() + d?(),#) + k)*.c?()",
        ] {
            let e = s(src);
            assert_eq!(s(&e.to_string()), e, "{src}");
        }
        assert_eq!(s("{a(#)}*.c?()").to_string(), "(a(#))*.c?()");
        assert!(Stre::parse("a?(c?()) + a?()").is_err());
        assert!(Stre::parse("a?(").is_err());
    }

    #[test]
    fn example_membership() {
        let e = s(NESTED_A);
        for m in ["b", "c", "a(b,c)", "a(b,a(b,b))", "a(b,a(b,a(b,c)))"] {
            assert!(member(&t(m), &e), "{m}");
        }
        for m in ["a(c,b)", "a(a(b,b),c)"] {
            assert!(!member(&t(m), &e), "{m}");
        }
        assert!(member(&t("c"), &s("c?()")));
        assert!(to_nfta(&s("0")).is_empty());
        assert!(to_nfta(&s("a?(0)")).is_empty());
    }

    #[test]
    fn includes_examples() {
        let e = s(NESTED_A);
        assert!(stre_includes(&e, &e));
        assert!(stre_includes(&s("b?()"), &e));
        assert!(!stre_includes(&s("c?()"), &s("b?()")));
    }

    #[test]
    fn star_formula_agrees() {
        for src in [NESTED_A, "a?(b?(),c?() + d?())", "(a(#,#) + b(c?(),#))*.(d?() + e?(f?()))", "a?(0, c?())"] {
            let e = s(src);
            assert!(to_nfta(&e).equivalent(&to_nfta_by_star(&e)).unwrap(), "{src}");
        }
    }

    #[test]
    fn iterator_over_empty_body() {
        let e = s("(a(d?(),#))*.0");
        assert!(e.nonempty());
        assert!(member(&"d".parse().unwrap(), &e));
        assert!(member(&"a(d,a(d,d))".parse().unwrap(), &e));
        assert!(!member(&"a(a(d,d),d)".parse().unwrap(), &e));
        assert!(stre_equivalent(&e, &s("(a(d?(),#))*.d?()")));
        assert!(!s("(a(#,#))*.0").nonempty());
    }

    #[test]
    fn downward_closed() {
        let e = s("(a(#,b?(c?())) + d(#))*.(c?() + e?(c?(),c?()))");
        let alpha = e.alphabet().unwrap();
        let a = to_nfta(&e);
        let members: Vec<Tree> = all_trees(&alpha, 6).into_iter().filter(|x| a.member(x)).collect();
        assert!(!members.is_empty());
        for x in &members {
            for y in all_trees(&alpha, x.size()) {
                if embeds_unchecked(&y, x) {
                    assert!(a.member(&y), "{y} embeds into {x}");
                }
            }
        }
    }

    #[test]
    fn rewrite_examples() {
        assert_eq!(normalize(&s("0*.c?()")), s("c?()"));
        assert_eq!(normalize(&s("a?(b?(), 0, c?())")), s("0"));
        let r = all_steps(&s("(a(#) + b(c?()))*.d?()"));
        assert!(r.contains(&s("(a(#))*.(d?() + b?(c?()))")));
        assert_eq!(normalize(&s("(a(#,#))*.0")), s("0"));
    }

    #[test]
    fn normal_forms_are_irreducible_and_equivalent() {
        for src in [
            NESTED_A,
            "a?(b?() + c?(), d?() + b?())",
            "(a(#) + k(c?()))*.(b?() + c?())",
            "(a(#,#))*.(c?() + d?())",
            "(a(b?() + c?(),#))*.0",
            "b?() + b?() + a?(b?())",
            "(a(#) + a(#))*.c?()",
        ] {
            let e = s(src);
            let n = normalize(&e);
            assert!(is_irreducible(&n), "{src} -> {n}");
            assert!(stre_equivalent(&e, &n), "{src} -> {n}");
        }
    }

    #[test]
    fn single_steps_preserve_denotation() {
        let e = s("(a(#,b?() + c?()) + k)*.(a?(0,c?()) + c?())");
        let steps = all_steps(&e);
        assert!(steps.len() >= 3);
        for x in steps {
            assert!(stre_equivalent(&e, &x), "{e} -> {x}");
        }
    }

    #[test]
    fn pure_product_cases() {
        let p = s("a?(b?())");
        assert_eq!(to_pure_product(&p).unwrap(), p);
        let k0 = to_pure_product(&s("(a(b?(),#))*.0")).unwrap();
        assert_eq!(k0, s("(a(b?(),#))*.b?()"));
        let src = s("(a(#,#))*.(c?() + d?())");
        let k2 = to_pure_product(&src).unwrap();
        assert_eq!(k2, s("(a(#,#))*.a?(a?(c?(),c?()),d?())"));
        assert!(is_pure_product(&k2));
        assert!(stre_equivalent(&k2, &src));
        assert!(matches!(to_pure_product(&s("0*.c?()")), Err(Error::NotIrreducible(_))));
        assert!(!is_pure_product(&s("(a(b?()))*.c?()")));
        assert!(!is_pure_product(&s("c?() + d?()")));
    }

    #[test]
    fn diversify_examples() {
        let d = diversify(&s("a?(b?(),b?())"));
        assert_eq!(d.product, s("a_1?(b_1?(),b_2?())"));
        assert!(is_diversified(&d.product));
        assert_eq!(d.unmark(&t("a_1(b_2,b_1)")), t("a(b,b)"));
        assert!(is_diversified(&s("(a1(#))*.(a2(#))*.e?()")));
        assert!(!is_diversified(&s("a?(b?(),b?())")));
    }

    #[test]
    fn versatile_examples() {
        let p = s("(a(s?(),#,#) + b(#,u?()))*.c?()");
        let ct = versatile_nfta(&p).unwrap();
        assert!(ct.member(&t("a(s,b(c,u),b(c,u))")));
        assert!(!ct.member(&t("b(a(s,c,c),u)")));
        assert!(!ct.member(&t("c")));
        assert!(ct.member(&t("a(s,b(a(s,b(c,u),b(c,u)),u),b(c,u))")));
        assert!(to_nfta(&p).includes(&ct).unwrap());
    }

    #[test]
    fn largeness() {
        let p = s("(b1(#))*.c?()");
        assert!(is_n_large_wrt(&t("b1(b1(c))"), &p, 2));
        assert!(!is_n_large_wrt(&t("b1(c)"), &p, 2));
        assert!(is_n_large_wrt(&t("c"), &p, 0));
        let q = s("(a_1(#,#) + b_1(#,d_1?()))*.c_1?()");
        let big = canonical_versatile_tree(&q, 3).unwrap();
        assert!(versatile_nfta(&q).unwrap().member(&big));
        assert!(is_n_large_wrt(&big, &q, 3));
        let all = to_nfta(&q).enumerate(6);
        assert!(!all.is_empty());
        for x in all {
            assert!(embeds_unchecked(&x, &big), "{x}");
        }
    }
}
