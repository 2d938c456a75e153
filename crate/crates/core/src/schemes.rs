//! Simple types, lambda-terms, recursion schemes, safety, Böhm-tree prefixes and
//! bounded language enumeration.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use indexmap::IndexMap;

use crate::error::{parse_err, Error, Result};
use crate::trees::{
    is_ident_char, nd_resolutions, strip_comment, PartialTree, RankedAlphabet, TermParser, Tree,
};

/// `o` or `α → β`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SimpleType {
    O,
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn arrow(a: SimpleType, b: SimpleType) -> Self {
        SimpleType::Arrow(Box::new(a), Box::new(b))
    }

    /// `o^k → o`.
    pub fn o_k(k: usize) -> Self {
        (0..k).fold(SimpleType::O, |t, _| SimpleType::arrow(SimpleType::O, t))
    }

    /// Builds `α1 → … → αk → o`.
    pub fn from_args(args: Vec<SimpleType>) -> Self {
        args.into_iter()
            .rev()
            .fold(SimpleType::O, |t, a| SimpleType::arrow(a, t))
    }

    /// Argument types `α1, …, αk`.
    pub fn args(&self) -> Vec<&SimpleType> {
        let mut out = Vec::new();
        let mut t = self;
        while let SimpleType::Arrow(a, b) = t {
            out.push(a.as_ref());
            t = b;
        }
        out
    }

    pub fn arity(&self) -> usize {
        self.args().len()
    }

    pub fn order(&self) -> usize {
        match self {
            SimpleType::O => 0,
            _ => 1 + self.args().iter().map(|a| a.order()).max().unwrap_or(0),
        }
    }

    /// `α1 → … → αk → o` with non-increasing argument orders, recursively.
    pub fn is_homogeneous(&self) -> bool {
        let args = self.args();
        args.windows(2).all(|w| w[0].order() >= w[1].order())
            && args.iter().all(|a| a.is_homogeneous())
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut p = TermParser::new(s);
        let t = parse_type(&mut p)?;
        p.end()?;
        Ok(t)
    }

    /// Result after applying one argument.
    pub fn apply(&self) -> Option<&SimpleType> {
        match self {
            SimpleType::Arrow(_, b) => Some(b),
            SimpleType::O => None,
        }
    }
}

fn parse_type(p: &mut TermParser) -> Result<SimpleType> {
    let lhs = if p.eat('(') {
        let t = parse_type(p)?;
        p.expect(')')?;
        t
    } else {
        let id = p.ident()?;
        if id != "o" {
            return p.fail(&format!("unknown base type `{id}`"));
        }
        SimpleType::O
    };
    p.skip_ws();
    if p.src[p.pos..].starts_with("->") {
        p.pos += 2;
        Ok(SimpleType::arrow(lhs, parse_type(p)?))
    } else {
        Ok(lhs)
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::O => write!(f, "o"),
            SimpleType::Arrow(a, b) => {
                if matches!(**a, SimpleType::O) {
                    write!(f, "o->{b}")
                } else {
                    write!(f, "({a})->{b}")
                }
            }
        }
    }
}

/// Finite lambda-term. Nonterminal occurrences are kept apart from variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LambdaTerm {
    Letter(String),
    Var(String, SimpleType),
    Nonterminal(String),
    Lam(String, SimpleType, Box<LambdaTerm>),
    App(Box<LambdaTerm>, Box<LambdaTerm>),
}

impl LambdaTerm {
    pub fn app(f: LambdaTerm, a: LambdaTerm) -> Self {
        LambdaTerm::App(Box::new(f), Box::new(a))
    }

    pub fn apps(head: LambdaTerm, args: impl IntoIterator<Item = LambdaTerm>) -> Self {
        args.into_iter().fold(head, LambdaTerm::app)
    }

    pub fn letter(a: &str) -> Self {
        LambdaTerm::Letter(a.to_string())
    }

    pub fn var(x: &str, t: SimpleType) -> Self {
        LambdaTerm::Var(x.to_string(), t)
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&LambdaTerm, Vec<&LambdaTerm>) {
        let mut args = Vec::new();
        let mut t = self;
        while let LambdaTerm::App(f, a) = t {
            args.push(a.as_ref());
            t = f;
        }
        args.reverse();
        (t, args)
    }

    pub fn is_applicative(&self) -> bool {
        match self {
            LambdaTerm::Lam(..) => false,
            LambdaTerm::App(f, a) => f.is_applicative() && a.is_applicative(),
            _ => true,
        }
    }

    /// Free variables (nonterminals excluded), in first-occurrence order.
    pub fn free_vars(&self) -> Vec<(String, SimpleType)> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<(String, SimpleType)>) {
        match self {
            LambdaTerm::Var(x, t) => {
                if !bound.contains(x) && !out.iter().any(|(y, _)| y == x) {
                    out.push((x.clone(), t.clone()));
                }
            }
            LambdaTerm::Lam(x, _, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            LambdaTerm::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            _ => {}
        }
    }

    /// Renames free occurrences of variable `from` to `to`.
    pub fn rename_var(&self, from: &str, to: &str) -> LambdaTerm {
        match self {
            LambdaTerm::Var(x, t) if x == from => LambdaTerm::Var(to.to_string(), t.clone()),
            LambdaTerm::Lam(x, t, b) => {
                if x == from {
                    self.clone()
                } else {
                    LambdaTerm::Lam(x.clone(), t.clone(), Box::new(b.rename_var(from, to)))
                }
            }
            LambdaTerm::App(f, a) => LambdaTerm::app(f.rename_var(from, to), a.rename_var(from, to)),
            _ => self.clone(),
        }
    }

    /// Parses a term. Identifiers resolve, in order, to lambda-bound variables,
    /// entries of `vars`, nonterminals in `nts`, and letters of `alpha`.
    pub fn parse(
        src: &str,
        vars: &HashMap<String, SimpleType>,
        nts: &IndexMap<String, SimpleType>,
        alpha: &RankedAlphabet,
    ) -> Result<Self> {
        let mut p = TermParser::new(src);
        let mut scope = Vec::new();
        let t = parse_app(&mut p, &mut scope, vars, nts, alpha)?;
        p.end()?;
        Ok(t)
    }
}

fn parse_app(
    p: &mut TermParser,
    scope: &mut Vec<(String, SimpleType)>,
    vars: &HashMap<String, SimpleType>,
    nts: &IndexMap<String, SimpleType>,
    alpha: &RankedAlphabet,
) -> Result<LambdaTerm> {
    let mut head = parse_atom(p, scope, vars, nts, alpha)?;
    loop {
        match p.peek() {
            Some(c) if c == '(' || c == '\\' || is_ident_char(c) => {
                let a = parse_atom(p, scope, vars, nts, alpha)?;
                head = LambdaTerm::app(head, a);
            }
            _ => return Ok(head),
        }
    }
}

fn parse_atom(
    p: &mut TermParser,
    scope: &mut Vec<(String, SimpleType)>,
    vars: &HashMap<String, SimpleType>,
    nts: &IndexMap<String, SimpleType>,
    alpha: &RankedAlphabet,
) -> Result<LambdaTerm> {
    if p.eat('(') {
        let t = parse_app(p, scope, vars, nts, alpha)?;
        p.expect(')')?;
        return Ok(t);
    }
    if p.eat('\\') {
        let x = p.ident()?;
        let ty = if p.eat(':') {
            parse_type(p)?
        } else {
            match vars.get(&x) {
                Some(t) => t.clone(),
                None => return p.fail(&format!("binder {x} needs a type annotation")),
            }
        };
        p.expect('.')?;
        scope.push((x.clone(), ty.clone()));
        let body = parse_app(p, scope, vars, nts, alpha);
        scope.pop();
        return Ok(LambdaTerm::Lam(x, ty, Box::new(body?)));
    }
    let id = p.ident()?;
    if let Some((_, t)) = scope.iter().rev().find(|(x, _)| *x == id) {
        return Ok(LambdaTerm::Var(id, t.clone()));
    }
    if let Some(t) = vars.get(&id) {
        return Ok(LambdaTerm::Var(id, t.clone()));
    }
    if nts.contains_key(&id) {
        return Ok(LambdaTerm::Nonterminal(id));
    }
    if alpha.contains(&id) {
        return Ok(LambdaTerm::Letter(id));
    }
    p.fail(&format!("unbound identifier `{id}`"))
}

impl fmt::Display for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaTerm::Letter(a) | LambdaTerm::Var(a, _) | LambdaTerm::Nonterminal(a) => {
                write!(f, "{a}")
            }
            LambdaTerm::Lam(x, _, b) => write!(f, "\\{x}. {b}"),
            LambdaTerm::App(..) => {
                let (h, args) = self.spine();
                if matches!(h, LambdaTerm::Lam(..)) {
                    write!(f, "({h})")?;
                } else {
                    write!(f, "{h}")?;
                }
                for a in args {
                    match a {
                        LambdaTerm::App(..) | LambdaTerm::Lam(..) => write!(f, " ({a})")?,
                        _ => write!(f, " {a}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

/// Rule `X x1 … xk = body`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub params: Vec<(String, SimpleType)>,
    pub body: LambdaTerm,
}

impl Rule {
    /// `λx1.…λxk.body`.
    pub fn as_lambda(&self) -> LambdaTerm {
        self.params
            .iter()
            .rev()
            .fold(self.body.clone(), |b, (x, t)| {
                LambdaTerm::Lam(x.clone(), t.clone(), Box::new(b))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheme {
    pub alphabet: RankedAlphabet,
    pub nonterminals: IndexMap<String, SimpleType>,
    pub initial: String,
    pub rules: IndexMap<String, Rule>,
}

/// Outcome of the safety check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyReport {
    pub safe: bool,
    /// `(rule, path, variable)` of the first violation found.
    pub witness: Option<(String, String, String)>,
}

impl Scheme {
    /// Parses the scheme file format. `--` starts a comment.
    pub fn parse(src: &str) -> Result<Self> {
        let mut alphabet = RankedAlphabet::new();
        let mut nts: IndexMap<String, SimpleType> = IndexMap::new();
        let mut start = None;
        let mut rule_lines = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match kw {
                "letters" => {
                    let a = RankedAlphabet::parse_decls(rest).map_err(|e| Error::Parse {
                        line: i + 1,
                        msg: e.to_string(),
                    })?;
                    alphabet = alphabet.union(&a).map_err(|e| Error::Parse {
                        line: i + 1,
                        msg: e.to_string(),
                    })?;
                }
                "types" => {
                    for decl in rest.split(';').filter(|d| !d.trim().is_empty()) {
                        let Some((n, t)) = decl.split_once(':') else {
                            return parse_err(i + 1, "expected `types X : type`");
                        };
                        let t = SimpleType::parse(t.trim()).map_err(|e| Error::Parse {
                            line: i + 1,
                            msg: e.to_string(),
                        })?;
                        if nts.insert(n.trim().to_string(), t).is_some() {
                            return parse_err(i + 1, format!("nonterminal {} typed twice", n.trim()));
                        }
                    }
                }
                "start" => start = Some(rest.trim().to_string()),
                _ => rule_lines.push((i + 1, line)),
            }
        }
        let mut rules = IndexMap::new();
        for (ln, line) in rule_lines {
            let Some((lhs, rhs)) = line.split_once('=') else {
                return parse_err(ln, format!("expected a rule, got `{line}`"));
            };
            let mut words = lhs.split_whitespace();
            let Some(name) = words.next() else {
                return parse_err(ln, "rule without a nonterminal");
            };
            let Some(ty) = nts.get(name) else {
                return parse_err(ln, format!("nonterminal {name} has no `types` declaration"));
            };
            let names: Vec<&str> = words.collect();
            let arg_tys = ty.args();
            if names.len() != arg_tys.len() {
                return parse_err(
                    ln,
                    format!(
                        "rule for {name} has {} parameters but its type expects {}",
                        names.len(),
                        arg_tys.len()
                    ),
                );
            }
            let mut vars = HashMap::new();
            let mut params = Vec::new();
            for (x, t) in names.iter().zip(arg_tys) {
                if vars.insert(x.to_string(), t.clone()).is_some() {
                    return parse_err(ln, format!("parameter {x} repeated"));
                }
                params.push((x.to_string(), t.clone()));
            }
            let body = LambdaTerm::parse(rhs.trim(), &vars, &nts, &alphabet).map_err(|e| {
                Error::Parse {
                    line: ln,
                    msg: e.to_string(),
                }
            })?;
            if rules.insert(name.to_string(), Rule { params, body }).is_some() {
                return parse_err(ln, format!("second rule for {name}"));
            }
        }
        let initial = match start {
            Some(s) => s,
            None => match nts.keys().next() {
                Some(s) => s.clone(),
                None => return parse_err(1, "no nonterminals declared"),
            },
        };
        let g = Scheme {
            alphabet,
            nonterminals: nts,
            initial,
            rules,
        };
        g.typecheck()?;
        Ok(g)
    }

    /// Type of a term under the scheme's declarations.
    pub fn type_of(&self, t: &LambdaTerm) -> Result<SimpleType> {
        self.infer(t, "?", &mut Vec::new())
    }

    fn infer(&self, t: &LambdaTerm, rule: &str, path: &mut Vec<usize>) -> Result<SimpleType> {
        let err = |path: &Vec<usize>, msg: String| Error::Type {
            rule: rule.to_string(),
            path: render_path(path),
            msg,
        };
        match t {
            LambdaTerm::Letter(a) => match self.alphabet.rank(a) {
                Some(r) => Ok(SimpleType::o_k(r)),
                None => Err(err(path, format!("unknown letter {a}"))),
            },
            LambdaTerm::Var(_, ty) => Ok(ty.clone()),
            LambdaTerm::Nonterminal(x) => self
                .nonterminals
                .get(x)
                .cloned()
                .ok_or_else(|| err(path, format!("unknown nonterminal {x}"))),
            LambdaTerm::Lam(_, ty, b) => {
                path.push(0);
                let bt = self.infer(b, rule, path)?;
                path.pop();
                Ok(SimpleType::arrow(ty.clone(), bt))
            }
            LambdaTerm::App(f, a) => {
                path.push(0);
                let ft = self.infer(f, rule, path)?;
                path.pop();
                path.push(1);
                let at = self.infer(a, rule, path)?;
                path.pop();
                match ft {
                    SimpleType::Arrow(dom, cod) if *dom == at => Ok(*cod),
                    SimpleType::Arrow(dom, _) => Err(err(
                        path,
                        format!("argument `{a}` has type {at}, expected {dom}"),
                    )),
                    SimpleType::O => Err(err(path, format!("`{f}` of type o applied to `{a}`"))),
                }
            }
        }
    }

    /// Checks every rule against its declared type and the rule-shape invariants.
    pub fn typecheck(&self) -> Result<()> {
        let ty_err = |rule: &str, msg: String| Error::Type {
            rule: rule.to_string(),
            path: "root".into(),
            msg,
        };
        if !self.nonterminals.contains_key(&self.initial) {
            return Err(ty_err(&self.initial, "start symbol is not a nonterminal".into()));
        }
        if self.nonterminals[&self.initial] != SimpleType::O {
            return Err(ty_err(&self.initial, "start symbol must have type o".into()));
        }
        for (x, ty) in &self.nonterminals {
            if self.alphabet.contains(x) {
                return Err(ty_err(x, "name used both as letter and nonterminal".into()));
            }
            let Some(rule) = self.rules.get(x) else {
                return Err(ty_err(x, "nonterminal has no rule".into()));
            };
            let want: Vec<&SimpleType> = ty.args();
            if rule.params.len() != want.len()
                || rule.params.iter().zip(&want).any(|((_, a), b)| a != *b)
            {
                return Err(ty_err(x, "parameters disagree with the declared type".into()));
            }
            if !rule.body.is_applicative() {
                return Err(ty_err(x, "rule body contains a lambda-binder".into()));
            }
            if matches!(rule.body, LambdaTerm::Nonterminal(_)) {
                return Err(ty_err(x, "rule body is a bare nonterminal".into()));
            }
            for (v, _) in rule.body.free_vars() {
                if !rule.params.iter().any(|(p, _)| *p == v) {
                    return Err(ty_err(x, format!("unbound variable {v}")));
                }
            }
            let bt = self.infer(&rule.body, x, &mut Vec::new())?;
            if bt != SimpleType::O {
                return Err(ty_err(x, format!("body has type {bt}, expected o")));
            }
        }
        for x in self.rules.keys() {
            if !self.nonterminals.contains_key(x) {
                return Err(ty_err(x, "rule for an undeclared nonterminal".into()));
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.nonterminals.values().map(SimpleType::order).max().unwrap_or(0)
    }

    pub fn check_safety(&self) -> SafetyReport {
        for (x, rule) in &self.rules {
            let r = term_safety(&rule.as_lambda(), &|t| self.type_of(t).ok());
            if let Some((path, v)) = r {
                return SafetyReport {
                    safe: false,
                    witness: Some((x.clone(), path, v)),
                };
            }
        }
        SafetyReport {
            safe: true,
            witness: None,
        }
    }
}

fn render_path(p: &[usize]) -> String {
    if p.is_empty() {
        "root".into()
    } else {
        p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// Safety of a single term. Returns the path and variable of the first violation.
/// `type_of` gives the type of a subterm.
pub fn term_safety(
    t: &LambdaTerm,
    type_of: &dyn Fn(&LambdaTerm) -> Option<SimpleType>,
) -> Option<(String, String)> {
    fn superficial(
        t: &LambdaTerm,
        type_of: &dyn Fn(&LambdaTerm) -> Option<SimpleType>,
    ) -> Option<String> {
        let ord = type_of(t).map(|ty| ty.order()).unwrap_or(0);
        t.free_vars()
            .into_iter()
            .find(|(_, ty)| ty.order() < ord)
            .map(|(x, _)| x)
    }
    fn walk(
        t: &LambdaTerm,
        path: &mut Vec<usize>,
        type_of: &dyn Fn(&LambdaTerm) -> Option<SimpleType>,
    ) -> Option<(String, String)> {
        if let LambdaTerm::App(..) = t {
            let (h, args) = t.spine();
            for c in std::iter::once(h).chain(args) {
                if let Some(x) = superficial(c, type_of) {
                    return Some((render_path(path), x));
                }
            }
        }
        match t {
            LambdaTerm::Lam(_, _, b) => {
                path.push(0);
                let r = walk(b, path, type_of);
                path.pop();
                r
            }
            LambdaTerm::App(f, a) => {
                path.push(0);
                let r = walk(f, path, type_of);
                path.pop();
                if r.is_some() {
                    return r;
                }
                path.push(1);
                let r = walk(a, path, type_of);
                path.pop();
                r
            }
            _ => None,
        }
    }
    if let Some(x) = superficial(t, type_of) {
        return Some(("root".into(), x));
    }
    walk(t, &mut Vec::new(), type_of)
}

/// Safety of a standalone term whose letters and variables carry their own types.
pub fn check_term_safety(t: &LambdaTerm, alpha: &RankedAlphabet) -> SafetyReport {
    let g = Scheme {
        alphabet: alpha.clone(),
        nonterminals: IndexMap::new(),
        initial: String::new(),
        rules: IndexMap::new(),
    };
    match term_safety(t, &|s| g.type_of(s).ok()) {
        Some((path, x)) => SafetyReport {
            safe: false,
            witness: Some(("term".into(), path, x)),
        },
        None => SafetyReport {
            safe: true,
            witness: None,
        },
    }
}

// ---------------------------------------------------------------------------
// Evaluation

type Id = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Letter(u32),
    Nt(u32),
    /// Leaf standing for any tree whose smallest resolution has this size.
    Num(u32),
    App(Id, Id),
}

#[derive(Debug)]
enum Tpl {
    Param(usize),
    Letter(u32),
    Nt(u32),
    App(Box<Tpl>, Box<Tpl>),
}

struct Machine<'g> {
    g: &'g Scheme,
    letters: Vec<String>,
    letter_rank: Vec<usize>,
    bot: Option<u32>,
    nd: Option<u32>,
    nt_types: Vec<Rc<SimpleType>>,
    rules: Vec<Tpl>,
    nodes: Vec<Node>,
    types: Vec<Rc<SimpleType>>,
    table: HashMap<Node, Id>,
    o: Rc<SimpleType>,
}

impl<'g> Machine<'g> {
    fn new(g: &'g Scheme) -> Self {
        let letters: Vec<String> = g.alphabet.letters().map(|(l, _)| l.to_string()).collect();
        let letter_rank = g.alphabet.letters().map(|(_, r)| r).collect();
        let pos = |n: Option<&str>| n.and_then(|n| letters.iter().position(|l| l == n).map(|i| i as u32));
        let bot = pos(g.alphabet.bot());
        let nd = pos(g.alphabet.nd());
        let nt_names: Vec<&String> = g.nonterminals.keys().collect();
        let nt_types = g.nonterminals.values().map(|t| Rc::new(t.clone())).collect();
        let compile = |rule: &Rule| {
            fn go(t: &LambdaTerm, rule: &Rule, letters: &[String], nts: &[&String]) -> Tpl {
                match t {
                    LambdaTerm::Var(x, _) => {
                        Tpl::Param(rule.params.iter().position(|(p, _)| p == x).unwrap())
                    }
                    LambdaTerm::Letter(a) => {
                        Tpl::Letter(letters.iter().position(|l| l == a).unwrap() as u32)
                    }
                    LambdaTerm::Nonterminal(x) => {
                        Tpl::Nt(nts.iter().position(|n| *n == x).unwrap() as u32)
                    }
                    LambdaTerm::App(f, a) => Tpl::App(
                        Box::new(go(f, rule, letters, nts)),
                        Box::new(go(a, rule, letters, nts)),
                    ),
                    LambdaTerm::Lam(..) => unreachable!("typechecked rules are applicative"),
                }
            }
            go(&rule.body, rule, &letters, &nt_names)
        };
        let rules = g.nonterminals.keys().map(|x| compile(&g.rules[x])).collect();
        Machine {
            g,
            letters,
            letter_rank,
            bot,
            nd,
            nt_types,
            rules,
            nodes: Vec::new(),
            types: Vec::new(),
            table: HashMap::new(),
            o: Rc::new(SimpleType::O),
        }
    }

    fn intern(&mut self, n: Node) -> Id {
        if let Some(&id) = self.table.get(&n) {
            return id;
        }
        let ty = match n {
            Node::Letter(a) => Rc::new(SimpleType::o_k(self.letter_rank[a as usize])),
            Node::Nt(x) => self.nt_types[x as usize].clone(),
            Node::Num(_) => self.o.clone(),
            Node::App(f, _) => Rc::new(
                self.types[f as usize]
                    .apply()
                    .expect("well-typed application")
                    .clone(),
            ),
        };
        let id = self.nodes.len() as Id;
        self.nodes.push(n);
        self.types.push(ty);
        self.table.insert(n, id);
        id
    }

    fn instantiate(&mut self, x: u32, args: &[Id]) -> Id {
        fn go(m: &mut Machine, t: &Tpl, args: &[Id]) -> Id {
            match t {
                Tpl::Param(i) => args[*i],
                Tpl::Letter(a) => m.intern(Node::Letter(*a)),
                Tpl::Nt(x) => m.intern(Node::Nt(*x)),
                Tpl::App(f, a) => {
                    let f = go(m, f, args);
                    let a = go(m, a, args);
                    m.intern(Node::App(f, a))
                }
            }
        }
        let tpl = std::mem::replace(&mut self.rules[x as usize], Tpl::Param(0));
        let r = go(self, &tpl, args);
        self.rules[x as usize] = tpl;
        r
    }

    fn spine(&self, mut t: Id) -> (Node, Vec<Id>) {
        let mut args = Vec::new();
        while let Node::App(f, a) = self.nodes[t as usize] {
            args.push(a);
            t = f;
        }
        args.reverse();
        (self.nodes[t as usize], args)
    }

    fn start(&mut self) -> Id {
        let i = self.g.nonterminals.get_index_of(&self.g.initial).unwrap() as u32;
        self.intern(Node::Nt(i))
    }

    /// Head-reduces `t` and emits its prefix. `budget` bounds the nonterminal
    /// unfoldings on each branch.
    fn prefix(&mut self, t: Id, budget: usize, fuel: &mut usize) -> Pref {
        let mut seen = HashSet::new();
        let mut cur = t;
        let mut used = 0usize;
        loop {
            let (head, args) = self.spine(cur);
            match head {
                Node::Letter(a) => {
                    if Some(a) == self.bot {
                        return Pref::Bot;
                    }
                    let children = args
                        .iter()
                        .map(|&c| self.prefix(c, budget - used, fuel))
                        .collect();
                    return Pref::Node(self.letters[a as usize].clone(), children);
                }
                Node::Nt(x) => {
                    if !seen.insert(cur) {
                        return Pref::Bot;
                    }
                    if used == budget || *fuel == 0 {
                        return Pref::Unknown(cur);
                    }
                    *fuel -= 1;
                    used += 1;
                    cur = self.instantiate(x, &args);
                }
                Node::Num(_) | Node::App(..) => unreachable!("evaluation of abstract leaves"),
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Pref {
    Node(String, Vec<Pref>),
    Bot,
    Unknown(Id),
}

impl Pref {
    fn to_partial(&self) -> PartialTree {
        match self {
            Pref::Node(l, cs) => PartialTree::Node(l.clone(), cs.iter().map(Pref::to_partial).collect()),
            Pref::Bot => PartialTree::Bot,
            Pref::Unknown(_) => PartialTree::Unknown,
        }
    }

    fn unknowns(&self, out: &mut Vec<Id>) {
        match self {
            Pref::Node(_, cs) => cs.iter().for_each(|c| c.unknowns(out)),
            Pref::Unknown(t) => out.push(*t),
            Pref::Bot => {}
        }
    }
}

/// Size of the smallest finite nd-free resolution of a term, capped at `cap`.
/// Values start at `cap` and only decrease, so they are exact once a round
/// changes nothing. Order-0 subterms of nonterminal arguments are replaced by
/// `Num` leaves, which keeps the equation system finite in common cases.
struct MinSize<'m, 'g> {
    m: &'m mut Machine<'g>,
    cap: u32,
    val: HashMap<Id, u32>,
}

impl<'m, 'g> MinSize<'m, 'g> {
    fn get(&mut self, t: Id, order: &mut Vec<Id>) -> u32 {
        if let Some(&v) = self.val.get(&t) {
            return v;
        }
        self.val.insert(t, self.cap);
        order.push(t);
        self.cap
    }

    fn abstract_arg(&mut self, t: Id, order: &mut Vec<Id>) -> Id {
        if *self.m.types[t as usize] == SimpleType::O {
            if let Node::Num(_) = self.m.nodes[t as usize] {
                return t;
            }
            let v = self.get(t, order);
            return self.m.intern(Node::Num(v));
        }
        match self.m.nodes[t as usize] {
            Node::App(f, a) => {
                let f = self.abstract_arg(f, order);
                let a = self.abstract_arg(a, order);
                self.m.intern(Node::App(f, a))
            }
            _ => t,
        }
    }

    fn eval(&mut self, t: Id, order: &mut Vec<Id>) -> u32 {
        let (head, args) = self.m.spine(t);
        match head {
            Node::Num(k) => k.min(self.cap),
            Node::Letter(a) => {
                if Some(a) == self.m.bot {
                    self.cap
                } else if Some(a) == self.m.nd {
                    let x = self.get(args[0], order);
                    let y = self.get(args[1], order);
                    x.min(y)
                } else {
                    let mut s = 1u32;
                    for c in args {
                        s = s.saturating_add(self.get(c, order));
                    }
                    s.min(self.cap)
                }
            }
            Node::Nt(x) => {
                let abs: Vec<Id> = args.iter().map(|&c| self.abstract_arg(c, order)).collect();
                let next = self.m.instantiate(x, &abs);
                if next == t {
                    self.val[&t]
                } else {
                    self.get(next, order)
                }
            }
            Node::App(..) => unreachable!(),
        }
    }

    /// Round-robin iteration until stable; false when fuel runs out first.
    fn solve(&mut self, roots: &[Id], fuel: usize) -> bool {
        let mut order = Vec::new();
        for &r in roots {
            self.get(r, &mut order);
        }
        let mut spent = 0usize;
        loop {
            let mut changed = false;
            let mut i = 0;
            while i < order.len() {
                if spent >= fuel {
                    return false;
                }
                spent += 1;
                let t = order[i];
                let new = self.eval(t, &mut order);
                let old = self.val[&t];
                if new < old {
                    self.val.insert(t, new);
                    changed = true;
                }
                i += 1;
            }
            if !changed {
                return true;
            }
        }
    }
}

/// Prefix of the Böhm tree of the scheme: at most `depth` nonterminal unfoldings
/// along any branch and `step_fuel` unfoldings in total.
pub fn bohm_prefix(g: &Scheme, depth: usize, step_fuel: usize) -> PartialTree {
    let mut m = Machine::new(g);
    let s = m.start();
    let mut fuel = step_fuel;
    m.prefix(s, depth, &mut fuel).to_partial()
}

/// Members of the recognized language found by [`language_enumerate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub members: BTreeSet<Tree>,
    /// True when no `unknown` leaf of the prefix can contribute a member within the size bound.
    pub saturated: bool,
    pub prefix: PartialTree,
}

pub fn language_enumerate(g: &Scheme, size_bound: usize, depth: usize, step_fuel: usize) -> Enumeration {
    let mut m = Machine::new(g);
    let s = m.start();
    let mut fuel = step_fuel;
    let pref = m.prefix(s, depth, &mut fuel);
    let prefix = pref.to_partial();
    let members = nd_resolutions(&prefix, &g.alphabet, size_bound);
    let mut unknown = Vec::new();
    pref.unknowns(&mut unknown);
    let saturated = if unknown.is_empty() {
        true
    } else {
        let cap = (size_bound + 1).min(u32::MAX as usize) as u32;
        let mut ms = MinSize {
            m: &mut m,
            cap,
            val: HashMap::new(),
        };
        if ms.solve(&unknown, step_fuel.max(1000)) {
            let through = min_through_unknown(&pref, &g.alphabet, &|t| ms.val[&t] as usize);
            through.is_none_or(|k| k > size_bound)
        } else {
            false
        }
    };
    Enumeration {
        members,
        saturated,
        prefix,
    }
}

/// Smallest resolution size that passes through some unknown leaf, with the
/// leaf's own contribution given by `cost`.
fn min_through_unknown(
    p: &Pref,
    alpha: &RankedAlphabet,
    cost: &dyn Fn(Id) -> usize,
) -> Option<usize> {
    // (smallest complete resolution, smallest resolution through an unknown leaf)
    fn go(
        p: &Pref,
        alpha: &RankedAlphabet,
        cost: &dyn Fn(Id) -> usize,
    ) -> (Option<usize>, Option<usize>) {
        match p {
            Pref::Bot => (None, None),
            Pref::Unknown(t) => (None, Some(cost(*t))),
            Pref::Node(l, cs) => {
                let kids: Vec<_> = cs.iter().map(|c| go(c, alpha, cost)).collect();
                if Some(l.as_str()) == alpha.nd() && cs.len() == 2 {
                    let c = kids.iter().filter_map(|k| k.0).min();
                    let u = kids.iter().filter_map(|k| k.1).min();
                    return (c, u);
                }
                if Some(l.as_str()) == alpha.bot() {
                    return (None, None);
                }
                let complete = kids
                    .iter()
                    .try_fold(1usize, |acc, k| k.0.map(|v| acc + v));
                let mut through: Option<usize> = None;
                for i in 0..kids.len() {
                    let Some(via) = kids[i].1 else { continue };
                    let mut total = 1 + via;
                    let mut ok = true;
                    for (j, k) in kids.iter().enumerate() {
                        if j == i {
                            continue;
                        }
                        match (k.0, k.1) {
                            (Some(a), Some(b)) => total += a.min(b),
                            (Some(a), None) | (None, Some(a)) => total += a,
                            (None, None) => ok = false,
                        }
                    }
                    if ok {
                        through = Some(through.map_or(total, |b| b.min(total)));
                    }
                }
                (complete, through)
            }
        }
    }
    go(p, alpha, cost).1
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "letters {}", self.alphabet)?;
        for (x, t) in &self.nonterminals {
            writeln!(f, "types {x} : {t}")?;
        }
        writeln!(f, "start {}", self.initial)?;
        for (x, r) in &self.rules {
            write!(f, "{x}")?;
            for (p, _) in &r.params {
                write!(f, " {p}")?;
            }
            writeln!(f, " = {}", r.body)?;
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const EX21: &str = "\
letters a/2 nd/2 b1/1 b2/1 bot/0 c/0
types S : o
types A : (o->o)->(o->o)->o->o->o
start S
S = A b1 b2 c c
A f g x y = nd (a x y) (A f g (f x) (g y))
";

    #[test]
    fn types_and_order() {
        let t = SimpleType::parse("(o->o)->(o->o)->o->o->o").unwrap();
        assert_eq!(t.order(), 2);
        assert_eq!(t.arity(), 4);
        assert!(t.is_homogeneous());
        assert!(!SimpleType::parse("o->(o->o)->o").unwrap().is_homogeneous());
        assert_eq!(t.to_string(), "(o->o)->(o->o)->o->o->o");
    }

    #[test]
    fn parse_example_scheme() {
        let g = Scheme::parse(EX21).unwrap();
        assert_eq!(g.order(), 2);
        assert!(g.check_safety().safe);
        let again = Scheme::parse(&g.to_string()).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn typecheck_errors() {
        let bad = "letters a/2 c/0\ntypes S : o\nS = a\n";
        assert!(matches!(Scheme::parse(bad), Err(Error::Type { .. })));
        let unbound = "letters a/2 c/0\ntypes S : o\nS = a c z\n";
        assert!(Scheme::parse(unbound).is_err());
    }

    #[test]
    fn bohm_prefix_goldens() {
        let g = Scheme::parse(EX21).unwrap();
        assert_eq!(
            bohm_prefix(&g, 4, 100_000).to_string(),
            "nd(a(c,c),nd(a(b1(c),b2(c)),nd(a(b1(b1(c)),b2(b2(c))),unknown)))"
        );
        let g = Scheme::parse("letters nd/2 c/0\ntypes S : o\nS = nd S S\n").unwrap();
        assert_eq!(bohm_prefix(&g, 1, 100).to_string(), "nd(unknown,unknown)");
        let g = Scheme::parse("letters c/0\ntypes S : o\nS = c\n").unwrap();
        assert_eq!(bohm_prefix(&g, 1, 100).to_string(), "c");
    }

    #[test]
    fn divergence_gives_bot() {
        let g = Scheme::parse("letters nd/2 c/0\ntypes S : o; B : o -> o\nS = nd (B c) c\nB x = B x\n")
            .unwrap();
        assert_eq!(bohm_prefix(&g, 10, 100).to_string(), "nd(bot,c)");
    }

    #[test]
    fn enumerate_example() {
        let g = Scheme::parse(EX21).unwrap();
        let e = language_enumerate(&g, 9, 12, 100_000);
        let want: BTreeSet<Tree> = [
            "a(c,c)",
            "a(b1(c),b2(c))",
            "a(b1(b1(c)),b2(b2(c)))",
            "a(b1(b1(b1(c))),b2(b2(b2(c))))",
        ]
        .iter()
        .map(|s| Tree::parse(s).unwrap())
        .collect();
        assert_eq!(e.members, want);
        assert!(e.saturated);
        let g = Scheme::parse("letters nd/2 bot/0 c/0\ntypes S : o\nS = nd bot bot\n").unwrap();
        assert!(language_enumerate(&g, 5, 4, 100).members.is_empty());
    }

    #[test]
    fn unsaturated_when_unknown_can_matter() {
        let g = Scheme::parse("letters nd/2 b/1 c/0\ntypes S : o\nS = nd c (b S)\n").unwrap();
        let e = language_enumerate(&g, 5, 1, 100);
        assert!(!e.saturated);
        assert_eq!(e.members.len(), 1);
        let g = Scheme::parse("letters nd/2 c/0\ntypes S : o\nS = nd S S\n").unwrap();
        let e = language_enumerate(&g, 5, 1, 100);
        assert!(e.members.is_empty() && e.saturated);
    }

    #[test]
    fn safety_goldens() {
        let alpha = RankedAlphabet::parse_decls("f/2").unwrap();
        let o = SimpleType::O;
        let vars: HashMap<String, SimpleType> = [
            ("x", o.clone()),
            ("y", o.clone()),
            ("z", o.clone()),
            ("t", o.clone()),
            ("f", SimpleType::o_k(2)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let empty = IndexMap::new();
        let no_letters = RankedAlphabet::new();
        let safe = LambdaTerm::parse("(\\x.\\y.f x y) z t", &vars, &empty, &no_letters).unwrap();
        assert!(check_term_safety(&safe, &alpha).safe);
        let unsafe_t = LambdaTerm::parse("(\\y.f z y) t", &vars, &empty, &no_letters).unwrap();
        let r = check_term_safety(&unsafe_t, &alpha);
        assert!(!r.safe);
        assert_eq!(r.witness.unwrap().2, "z");
    }
}
