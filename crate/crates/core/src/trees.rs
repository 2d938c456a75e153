//! Ranked alphabets, finite trees, contexts, regular trees and the embedding order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{parse_err, Error, Result};

/// Reserved rank-0 letter standing for a hole in a context.
pub const HOLE: &str = "#";

/// A finite set of letters, each with a rank.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankedAlphabet {
    letters: BTreeMap<String, usize>,
    nd: Option<String>,
    bot: Option<String>,
}

impl RankedAlphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an alphabet from `(name, rank)` pairs. Letters named `nd` (rank 2)
    /// and `bot` (rank 0) are designated automatically.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, usize)]) -> Result<Self> {
        let mut a = Self::new();
        for (name, rank) in pairs {
            a.add(name.as_ref(), *rank)?;
        }
        a.designate_defaults();
        Ok(a)
    }

    /// Parses `a/2 nd/2 c/0` style declarations.
    pub fn parse_decls(s: &str) -> Result<Self> {
        let mut a = Self::new();
        for tok in s.split_whitespace() {
            let (name, rank) = tok
                .split_once('/')
                .ok_or_else(|| Error::Invalid(format!("expected letter/rank, got `{tok}`")))?;
            let rank: usize = rank
                .parse()
                .map_err(|_| Error::Invalid(format!("bad rank in `{tok}`")))?;
            a.add(name, rank)?;
        }
        a.designate_defaults();
        Ok(a)
    }

    pub fn add(&mut self, name: &str, rank: usize) -> Result<()> {
        match self.letters.get(name) {
            Some(&r) if r != rank => Err(Error::Alphabet(format!(
                "letter {name} declared with ranks {r} and {rank}"
            ))),
            _ => {
                self.letters.insert(name.to_string(), rank);
                Ok(())
            }
        }
    }

    fn designate_defaults(&mut self) {
        if self.nd.is_none() && self.letters.get("nd") == Some(&2) {
            self.nd = Some("nd".into());
        }
        if self.bot.is_none() && self.letters.get("bot") == Some(&0) {
            self.bot = Some("bot".into());
        }
    }

    pub fn set_nd(&mut self, name: &str) -> Result<()> {
        self.add(name, 2)?;
        self.nd = Some(name.to_string());
        Ok(())
    }

    pub fn set_bot(&mut self, name: &str) -> Result<()> {
        self.add(name, 0)?;
        self.bot = Some(name.to_string());
        Ok(())
    }

    pub fn nd(&self) -> Option<&str> {
        self.nd.as_deref()
    }

    pub fn bot(&self) -> Option<&str> {
        self.bot.as_deref()
    }

    pub fn rank(&self, name: &str) -> Option<usize> {
        self.letters.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.letters.contains_key(name)
    }

    pub fn letters(&self) -> impl Iterator<Item = (&str, usize)> {
        self.letters.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn max_rank(&self) -> usize {
        self.letters.values().copied().max().unwrap_or(0)
    }

    /// Copy of the alphabet extended with the hole letter.
    pub fn with_hole(&self) -> Self {
        let mut a = self.clone();
        a.letters.insert(HOLE.to_string(), 0);
        a
    }

    /// Union of two alphabets; fails when a shared letter has two ranks.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut a = self.clone();
        for (l, r) in other.letters() {
            a.add(l, r)?;
        }
        if a.nd.is_none() {
            a.nd = other.nd.clone();
        }
        if a.bot.is_none() {
            a.bot = other.bot.clone();
        }
        Ok(a)
    }

    /// Letters other than the nondeterminism, bottom and hole letters.
    pub fn plain_letters(&self) -> Vec<(String, usize)> {
        self.letters
            .iter()
            .filter(|(k, _)| {
                Some(k.as_str()) != self.nd() && Some(k.as_str()) != self.bot() && *k != HOLE
            })
            .map(|(k, &v)| (k.clone(), v))
            .collect()
    }
}

impl fmt::Display for RankedAlphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(|(k, v)| format!("{k}/{v}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A finite ranked tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    pub label: String,
    pub children: Vec<Tree>,
}

/// A tree that may contain hole leaves.
pub type Context = Tree;

impl Tree {
    pub fn leaf(label: &str) -> Self {
        Tree {
            label: label.to_string(),
            children: Vec::new(),
        }
    }

    pub fn node(label: &str, children: Vec<Tree>) -> Self {
        Tree {
            label: label.to_string(),
            children,
        }
    }

    pub fn hole() -> Self {
        Tree::leaf(HOLE)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut p = TermParser::new(s);
        let t = p.tree()?;
        p.end()?;
        Ok(t)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.children.iter().map(Tree::height).max().unwrap_or(0)
    }

    pub fn is_hole(&self) -> bool {
        self.label == HOLE && self.children.is_empty()
    }

    pub fn hole_count(&self) -> usize {
        if self.is_hole() {
            1
        } else {
            self.children.iter().map(Tree::hole_count).sum()
        }
    }

    /// Letter ranks used in the tree; fails on inconsistent ranks.
    pub fn letter_ranks(&self) -> Result<BTreeMap<String, usize>> {
        let mut m = BTreeMap::new();
        self.collect_ranks(&mut m)?;
        Ok(m)
    }

    fn collect_ranks(&self, m: &mut BTreeMap<String, usize>) -> Result<()> {
        match m.get(&self.label) {
            Some(&r) if r != self.children.len() => {
                return Err(Error::Alphabet(format!(
                    "letter {} used with ranks {} and {}",
                    self.label,
                    r,
                    self.children.len()
                )))
            }
            _ => {
                m.insert(self.label.clone(), self.children.len());
            }
        }
        for c in &self.children {
            c.collect_ranks(m)?;
        }
        Ok(())
    }

    /// Checks that every label belongs to `alpha` with the right rank. The hole
    /// letter is always accepted.
    pub fn check(&self, alpha: &RankedAlphabet) -> Result<()> {
        if !self.is_hole() {
            match alpha.rank(&self.label) {
                Some(r) if r == self.children.len() => {}
                Some(r) => {
                    return Err(Error::Alphabet(format!(
                        "letter {} has rank {r} but {} children",
                        self.label,
                        self.children.len()
                    )))
                }
                None => {
                    return Err(Error::Alphabet(format!(
                        "letter {} not in alphabet",
                        self.label
                    )))
                }
            }
        }
        self.children.iter().try_for_each(|c| c.check(alpha))
    }

    /// Number of nodes labeled `a` on each root-to-leaf branch, minimized over branches.
    pub fn min_branch_count(&self, a: &str) -> usize {
        let own = usize::from(self.label == a);
        own + self
            .children
            .iter()
            .map(|c| c.min_branch_count(a))
            .min()
            .unwrap_or(0)
    }

    /// Renames labels through `f`.
    pub fn map_labels(&self, f: &impl Fn(&str) -> String) -> Tree {
        Tree {
            label: f(&self.label),
            children: self.children.iter().map(|c| c.map_labels(f)).collect(),
        }
    }

    /// Preorder list of subtrees.
    pub fn subtrees(&self) -> Vec<&Tree> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let t = out[i];
            out.extend(t.children.iter());
            i += 1;
        }
        out
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            write!(f, "(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl FromStr for Tree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Tree::parse(s)
    }
}

/// Finite prefix of a possibly infinite tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartialTree {
    Node(String, Vec<PartialTree>),
    /// Proven dead end.
    Bot,
    /// Evaluation budget ran out here.
    Unknown,
}

impl PartialTree {
    pub fn leaf(label: &str) -> Self {
        PartialTree::Node(label.to_string(), Vec::new())
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(PartialTree::from_tree(&Tree::parse(s)?))
    }

    /// Converts a tree, reading `bot` and `unknown` leaves as markers.
    pub fn from_tree(t: &Tree) -> Self {
        match (t.label.as_str(), t.children.is_empty()) {
            ("bot", true) => PartialTree::Bot,
            ("unknown", true) => PartialTree::Unknown,
            _ => PartialTree::Node(
                t.label.clone(),
                t.children.iter().map(PartialTree::from_tree).collect(),
            ),
        }
    }

    /// The tree itself when it has no markers.
    pub fn to_tree(&self) -> Option<Tree> {
        match self {
            PartialTree::Node(l, cs) => Some(Tree::node(
                l,
                cs.iter().map(PartialTree::to_tree).collect::<Option<Vec<_>>>()?,
            )),
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            PartialTree::Node(_, cs) => 1 + cs.iter().map(PartialTree::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn has_unknown(&self) -> bool {
        match self {
            PartialTree::Node(_, cs) => cs.iter().any(PartialTree::has_unknown),
            PartialTree::Unknown => true,
            PartialTree::Bot => false,
        }
    }

    /// Replaces everything strictly below `depth` (root has depth 1) by `unknown`.
    pub fn truncate(&self, depth: usize) -> PartialTree {
        if depth == 0 {
            return PartialTree::Unknown;
        }
        match self {
            PartialTree::Node(l, cs) => {
                PartialTree::Node(l.clone(), cs.iter().map(|c| c.truncate(depth - 1)).collect())
            }
            other => other.clone(),
        }
    }

    /// True when the two prefixes agree wherever both are decided.
    pub fn agrees_with(&self, other: &PartialTree) -> bool {
        match (self, other) {
            (PartialTree::Unknown, _) | (_, PartialTree::Unknown) => true,
            (PartialTree::Bot, PartialTree::Bot) => true,
            (PartialTree::Node(a, xs), PartialTree::Node(b, ys)) => {
                a == b && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| x.agrees_with(y))
            }
            _ => false,
        }
    }

    /// Number of decided nodes.
    pub fn decided_nodes(&self) -> usize {
        match self {
            PartialTree::Node(_, cs) => 1 + cs.iter().map(PartialTree::decided_nodes).sum::<usize>(),
            PartialTree::Bot => 1,
            PartialTree::Unknown => 0,
        }
    }
}

impl fmt::Display for PartialTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartialTree::Bot => write!(f, "bot"),
            PartialTree::Unknown => write!(f, "unknown"),
            PartialTree::Node(l, cs) => {
                write!(f, "{l}")?;
                if !cs.is_empty() {
                    write!(f, "(")?;
                    for (i, c) in cs.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{c}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// A possibly infinite tree with finitely many distinct subtrees, given as an
/// equation system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularTree {
    pub root: String,
    pub eqs: BTreeMap<String, (String, Vec<String>)>,
}

impl RegularTree {
    pub fn new(root: &str, eqs: &[(&str, &str, &[&str])]) -> Result<Self> {
        let mut m = BTreeMap::new();
        for (n, l, cs) in eqs {
            m.insert(
                n.to_string(),
                (l.to_string(), cs.iter().map(|c| c.to_string()).collect()),
            );
        }
        let t = RegularTree {
            root: root.to_string(),
            eqs: m,
        };
        t.validate()?;
        Ok(t)
    }

    /// One equation per distinct subtree.
    pub fn from_tree(t: &Tree) -> Self {
        fn go(t: &Tree, names: &mut BTreeMap<Tree, String>, eqs: &mut BTreeMap<String, (String, Vec<String>)>) -> String {
            if let Some(n) = names.get(t) {
                return n.clone();
            }
            let cs = t.children.iter().map(|c| go(c, names, eqs)).collect();
            let n = format!("t{}", names.len());
            names.insert(t.clone(), n.clone());
            eqs.insert(n.clone(), (t.label.clone(), cs));
            n
        }
        let mut names = BTreeMap::new();
        let mut eqs = BTreeMap::new();
        let root = go(t, &mut names, &mut eqs);
        RegularTree { root, eqs }
    }

    /// Parses a file: `root N` followed by lines `N = a(M,K)`; `--` starts a comment.
    pub fn parse(src: &str) -> Result<Self> {
        let mut root = None;
        let mut eqs = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(r) = line.strip_prefix("root") {
                root = Some(r.trim().to_string());
                continue;
            }
            let Some((lhs, rhs)) = line.split_once('=') else {
                return parse_err(i + 1, format!("expected `Name = letter(...)`, got `{line}`"));
            };
            let t = Tree::parse(rhs.trim()).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            if t.children.iter().any(|c| !c.children.is_empty()) {
                return parse_err(i + 1, "children must be equation names");
            }
            let name = lhs.trim().to_string();
            if eqs.contains_key(&name) {
                return parse_err(i + 1, format!("name {name} defined twice"));
            }
            eqs.insert(
                name,
                (t.label, t.children.into_iter().map(|c| c.label).collect()),
            );
        }
        let Some(root) = root else {
            return parse_err(1, "missing `root` line");
        };
        let t = RegularTree { root, eqs };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        if !self.eqs.contains_key(&self.root) {
            return Err(Error::Invalid(format!("root {} undefined", self.root)));
        }
        let mut ranks: BTreeMap<&str, usize> = BTreeMap::new();
        for (n, (l, cs)) in &self.eqs {
            for c in cs {
                if !self.eqs.contains_key(c) {
                    return Err(Error::Invalid(format!("{n} refers to undefined {c}")));
                }
            }
            if let Some(&r) = ranks.get(l.as_str()) {
                if r != cs.len() {
                    return Err(Error::Alphabet(format!("letter {l} used with two ranks")));
                }
            }
            ranks.insert(l, cs.len());
        }
        Ok(())
    }

    pub fn label(&self, name: &str) -> &str {
        &self.eqs[name].0
    }

    pub fn children(&self, name: &str) -> &[String] {
        &self.eqs[name].1
    }

    /// Letters used, with ranks.
    pub fn alphabet(&self) -> RankedAlphabet {
        let mut a = RankedAlphabet::new();
        for (l, cs) in self.eqs.values() {
            let _ = a.add(l, cs.len());
        }
        a
    }

    pub fn check(&self, alpha: &RankedAlphabet) -> Result<()> {
        for (l, cs) in self.eqs.values() {
            match alpha.rank(l) {
                Some(r) if r == cs.len() => {}
                _ => return Err(Error::Alphabet(format!("letter {l}/{} not in alphabet", cs.len()))),
            }
        }
        Ok(())
    }

    /// Unfolds the tree down to `depth` (root at depth 1); deeper nodes become `unknown`.
    /// The alphabet's bottom letter, if given, becomes the `bot` marker.
    pub fn unfold(&self, depth: usize, bot: Option<&str>) -> PartialTree {
        self.unfold_from(&self.root, depth, bot)
    }

    fn unfold_from(&self, name: &str, depth: usize, bot: Option<&str>) -> PartialTree {
        if depth == 0 {
            return PartialTree::Unknown;
        }
        let (l, cs) = &self.eqs[name];
        if Some(l.as_str()) == bot && cs.is_empty() {
            return PartialTree::Bot;
        }
        PartialTree::Node(
            l.clone(),
            cs.iter().map(|c| self.unfold_from(c, depth - 1, bot)).collect(),
        )
    }
}

impl fmt::Display for RegularTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "root {}", self.root)?;
        for (n, (l, cs)) in &self.eqs {
            if cs.is_empty() {
                writeln!(f, "{n} = {l}")?;
            } else {
                writeln!(f, "{n} = {l}({})", cs.join(","))?;
            }
        }
        Ok(())
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find("--") {
        Some(i) => &line[..i],
        None => line,
    }
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '#'
}

/// Character-level cursor shared by the term-like parsers.
pub(crate) struct TermParser<'a> {
    pub src: &'a str,
    pub pos: usize,
}

impl<'a> TermParser<'a> {
    pub fn new(src: &'a str) -> Self {
        TermParser { src, pos: 0 }
    }

    pub fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    pub fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(&format!("expected `{c}`"))
        }
    }

    pub fn fail<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Invalid(format!(
            "{msg} at offset {} in `{}`",
            self.pos, self.src
        )))
    }

    pub fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek_raw() {
            if is_ident_char(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        if start == self.pos {
            return self.fail("expected identifier");
        }
        Ok(self.src[start..self.pos].to_string())
    }

    pub fn end(&mut self) -> Result<()> {
        if self.peek().is_some() {
            self.fail("trailing input")
        } else {
            Ok(())
        }
    }

    pub fn tree(&mut self) -> Result<Tree> {
        let label = self.ident()?;
        let mut children = Vec::new();
        if self.eat('(')
            && !self.eat(')') {
                loop {
                    children.push(self.tree()?);
                    if self.eat(')') {
                        break;
                    }
                    self.expect(',')?;
                }
            }
        Ok(Tree { label, children })
    }
}

/// Flattened preorder view of a tree used by the embedding check.
struct Flat<'a> {
    labels: Vec<&'a str>,
    children: Vec<Vec<usize>>,
}

impl<'a> Flat<'a> {
    fn new(t: &'a Tree) -> Self {
        let mut f = Flat {
            labels: Vec::new(),
            children: Vec::new(),
        };
        f.push(t);
        f
    }

    fn push(&mut self, t: &'a Tree) -> usize {
        let id = self.labels.len();
        self.labels.push(&t.label);
        self.children.push(Vec::new());
        let cs: Vec<usize> = t.children.iter().map(|c| self.push(c)).collect();
        self.children[id] = cs;
        id
    }
}

/// Homeomorphic embedding `s ⊑ t`. Fails when a letter is used with two ranks.
pub fn embeds(s: &Tree, t: &Tree) -> Result<bool> {
    let mut ranks = s.letter_ranks()?;
    for (l, r) in t.letter_ranks()? {
        if let Some(&r0) = ranks.get(&l) {
            if r0 != r {
                return Err(Error::Alphabet(format!(
                    "letter {l} has rank {r0} in one tree and {r} in the other"
                )));
            }
        }
        ranks.insert(l, r);
    }
    Ok(embeds_unchecked(s, t))
}

/// Embedding check without the rank-consistency validation.
pub fn embeds_unchecked(s: &Tree, t: &Tree) -> bool {
    if s.size() > t.size() {
        return false;
    }
    let fs = Flat::new(s);
    let ft = Flat::new(t);
    let ns = fs.labels.len();
    let nt = ft.labels.len();
    // memo[i * nt + j]: 0 unknown, 1 false, 2 true
    let mut memo = vec![0u8; ns * nt];
    // Process t nodes bottom-up (reverse preorder), s nodes bottom-up too.
    for j in (0..nt).rev() {
        for i in (0..ns).rev() {
            let via_child = ft.children[j].iter().any(|&c| memo[i * nt + c] == 2);
            let direct = fs.labels[i] == ft.labels[j]
                && fs.children[i].len() == ft.children[j].len()
                && fs.children[i]
                    .iter()
                    .zip(&ft.children[j])
                    .all(|(&a, &b)| memo[a * nt + b] == 2);
            memo[i * nt + j] = if via_child || direct { 2 } else { 1 };
        }
    }
    memo[0] == 2
}

/// `C[L]`: every hole replaced independently by a member of `l`.
pub fn substitute(c: &Context, l: &BTreeSet<Tree>) -> BTreeSet<Tree> {
    if c.is_hole() {
        return l.clone();
    }
    let mut acc: Vec<Vec<Tree>> = vec![Vec::new()];
    for ch in &c.children {
        let opts = substitute(ch, l);
        let mut next = Vec::new();
        for prefix in &acc {
            for o in &opts {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|children| Tree {
            label: c.label.clone(),
            children,
        })
        .collect()
}

/// True iff every letter of `sigma` occurs at least `n` times on every branch of `t`.
pub fn branch_count_ok(t: &Tree, sigma: &BTreeSet<String>, n: usize) -> bool {
    sigma.iter().all(|a| t.min_branch_count(a) >= n)
}

/// Largest `n` such that `t` is `n`-large with respect to `sigma` (infinite for empty `sigma`,
/// reported as `usize::MAX`).
pub fn largeness(t: &Tree, sigma: &BTreeSet<String>) -> usize {
    sigma
        .iter()
        .map(|a| t.min_branch_count(a))
        .min()
        .unwrap_or(usize::MAX)
}

/// Finite trees reachable from the prefix by resolving nondeterminism letters,
/// with at most `size_bound` nodes and free of markers, bottom and holes.
pub fn nd_resolutions(t: &PartialTree, alpha: &RankedAlphabet, size_bound: usize) -> BTreeSet<Tree> {
    let by_size = resolutions_by_size(t, alpha, size_bound);
    by_size.into_iter().flatten().collect()
}

fn resolutions_by_size(
    t: &PartialTree,
    alpha: &RankedAlphabet,
    budget: usize,
) -> Vec<BTreeSet<Tree>> {
    let mut out = vec![BTreeSet::new(); budget + 1];
    let PartialTree::Node(label, cs) = t else {
        return out;
    };
    if budget == 0 || Some(label.as_str()) == alpha.bot() || label == HOLE {
        return out;
    }
    if Some(label.as_str()) == alpha.nd() && cs.len() == 2 {
        for c in cs {
            for (k, set) in resolutions_by_size(c, alpha, budget).into_iter().enumerate() {
                out[k].extend(set);
            }
        }
        return out;
    }
    // Combine children: partial[k] = child vectors of total size k.
    let mut partial: Vec<Vec<Vec<Tree>>> = vec![Vec::new(); budget];
    partial[0].push(Vec::new());
    for c in cs {
        let child = resolutions_by_size(c, alpha, budget - 1);
        let mut next: Vec<Vec<Vec<Tree>>> = vec![Vec::new(); budget];
        for (k, prefixes) in partial.iter().enumerate() {
            if prefixes.is_empty() {
                continue;
            }
            for (m, set) in child.iter().enumerate() {
                if k + m >= budget || set.is_empty() {
                    continue;
                }
                for p in prefixes {
                    for t in set {
                        let mut v = p.clone();
                        v.push(t.clone());
                        next[k + m].push(v);
                    }
                }
            }
        }
        partial = next;
    }
    for (k, vs) in partial.into_iter().enumerate() {
        for children in vs {
            out[k + 1].insert(Tree {
                label: label.clone(),
                children,
            });
        }
    }
    out
}

/// Smallest size of a resolution that still passes through an `unknown` leaf
/// (the leaf counted as one node); `None` when no such resolution exists.
pub fn min_unknown_resolution(t: &PartialTree, alpha: &RankedAlphabet) -> Option<usize> {
    fn min_complete(t: &PartialTree, alpha: &RankedAlphabet, memo: &mut HashMap<*const PartialTree, Option<usize>>) -> Option<usize> {
        let key = t as *const PartialTree;
        if let Some(v) = memo.get(&key) {
            return *v;
        }
        let v = match t {
            PartialTree::Node(l, cs) => {
                if Some(l.as_str()) == alpha.bot() || l == HOLE {
                    None
                } else if Some(l.as_str()) == alpha.nd() && cs.len() == 2 {
                    cs.iter().filter_map(|c| min_complete(c, alpha, memo)).min()
                } else {
                    let mut total = 1usize;
                    let mut ok = true;
                    for c in cs {
                        match min_complete(c, alpha, memo) {
                            Some(k) => total += k,
                            None => ok = false,
                        }
                    }
                    ok.then_some(total)
                }
            }
            _ => None,
        };
        memo.insert(key, v);
        v
    }
    fn go(t: &PartialTree, alpha: &RankedAlphabet, memo: &mut HashMap<*const PartialTree, Option<usize>>) -> Option<usize> {
        match t {
            PartialTree::Unknown => Some(1),
            PartialTree::Bot => None,
            PartialTree::Node(l, cs) => {
                if Some(l.as_str()) == alpha.bot() || l == HOLE {
                    None
                } else if Some(l.as_str()) == alpha.nd() && cs.len() == 2 {
                    cs.iter().filter_map(|c| go(c, alpha, memo)).min()
                } else {
                    // one child passes through unknown, the others take their cheapest option
                    let cheap: Vec<Option<usize>> = cs
                        .iter()
                        .map(|c| {
                            let a = min_complete(c, alpha, memo);
                            let b = go(c, alpha, memo);
                            match (a, b) {
                                (Some(x), Some(y)) => Some(x.min(y)),
                                (x, y) => x.or(y),
                            }
                        })
                        .collect();
                    let mut best: Option<usize> = None;
                    for (i, c) in cs.iter().enumerate() {
                        let Some(via) = go(c, alpha, memo) else { continue };
                        let mut total = 1 + via;
                        let mut ok = true;
                        for (j, ch) in cheap.iter().enumerate() {
                            if j != i {
                                match ch {
                                    Some(k) => total += k,
                                    None => ok = false,
                                }
                            }
                        }
                        if ok {
                            best = Some(best.map_or(total, |b: usize| b.min(total)));
                        }
                    }
                    best
                }
            }
        }
    }
    let mut memo = HashMap::new();
    go(t, alpha, &mut memo)
}

/// All trees over the plain letters of `alpha` with at most `max_size` nodes.
pub fn all_trees(alpha: &RankedAlphabet, max_size: usize) -> Vec<Tree> {
    let letters: Vec<(String, usize)> = alpha.letters().map(|(l, r)| (l.to_string(), r)).collect();
    // by_size[k] = trees of exactly k nodes
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new(); max_size + 1];
    for k in 1..=max_size {
        let mut cur = Vec::new();
        for (l, r) in &letters {
            for children in tuples_of_total(&by_size, *r, k - 1) {
                cur.push(Tree::node(l, children));
            }
        }
        by_size[k] = cur;
    }
    by_size.into_iter().flatten().collect()
}

fn tuples_of_total(by_size: &[Vec<Tree>], arity: usize, total: usize) -> Vec<Vec<Tree>> {
    if arity == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=total {
        if first >= by_size.len() {
            break;
        }
        let rests = tuples_of_total(by_size, arity - 1, total - first);
        for t in &by_size[first] {
            for r in &rests {
                let mut v = Vec::with_capacity(arity);
                v.push(t.clone());
                v.extend(r.iter().cloned());
                out.push(v);
            }
        }
    }
    out
}

/// `↓T`: all trees embedding into `t`.
pub fn downward_closure_of_tree(t: &Tree) -> BTreeSet<Tree> {
    let mut out = BTreeSet::new();
    for c in &t.children {
        out.extend(downward_closure_of_tree(c));
    }
    let mut acc: Vec<Vec<Tree>> = vec![Vec::new()];
    for c in &t.children {
        let opts: Vec<Tree> = downward_closure_of_tree(c).into_iter().collect();
        let mut next = Vec::new();
        for p in &acc {
            for o in &opts {
                let mut v = p.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    for children in acc {
        out.insert(Tree::node(&t.label, children));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tree {
        Tree::parse(s).unwrap()
    }

    #[test]
    fn parse_and_print_roundtrip() {
        for s in ["c", "a(c1,c2)", "b(a(a(c1,c1),c2))", "a'(#,c)"] {
            assert_eq!(t(s).to_string(), s);
        }
        assert_eq!(t("a( b , c() )").to_string(), "a(b,c)");
    }

    #[test]
    fn embedding_examples() {
        assert!(embeds(&t("a(c1,c2)"), &t("b(a(a(c1,c1),c2))")).unwrap());
        assert!(!embeds(&t("a(c1,c2)"), &t("a(a'(c1,c2),c1)")).unwrap());
        assert!(embeds(&t("c"), &t("c")).unwrap());
        assert!(embeds(&t("a(c,c)"), &t("a(c,c)")).unwrap());
    }

    #[test]
    fn embedding_rank_mismatch_is_error() {
        assert!(embeds(&t("a(c)"), &t("a(c,c)")).is_err());
    }

    #[test]
    fn substitute_examples() {
        let l: BTreeSet<Tree> = [t("c")].into();
        assert_eq!(substitute(&t("a(b,#)"), &l), [t("a(b,c)")].into());
        assert_eq!(substitute(&t("c"), &BTreeSet::new()), [t("c")].into());
        let l2: BTreeSet<Tree> = [t("b"), t("c")].into();
        let got = substitute(&t("a(#,#)"), &l2);
        let want: BTreeSet<Tree> =
            [t("a(b,b)"), t("a(b,c)"), t("a(c,b)"), t("a(c,c)")].into();
        assert_eq!(got, want);
    }

    #[test]
    fn branch_counts() {
        let b1: BTreeSet<String> = ["b1".to_string()].into();
        assert!(!branch_count_ok(&t("a(b1(c),b2(c))"), &b1, 1));
        assert!(branch_count_ok(&t("a(b1(c),b2(c))"), &BTreeSet::new(), 7));
        assert!(branch_count_ok(&t("b1(b1(c))"), &b1, 2));
    }

    #[test]
    fn resolutions_examples() {
        let alpha = RankedAlphabet::parse_decls("a/2 nd/2 b1/1 b2/1 bot/0 c/0").unwrap();
        let p = PartialTree::parse("nd(a(c,c),nd(a(b1(c),b2(c)),unknown))").unwrap();
        let got = nd_resolutions(&p, &alpha, 9);
        let want: BTreeSet<Tree> = [t("a(c,c)"), t("a(b1(c),b2(c))")].into();
        assert_eq!(got, want);
        assert_eq!(nd_resolutions(&PartialTree::leaf("c"), &alpha, 3), [t("c")].into());
        let p2 = PartialTree::parse("nd(bot,c)").unwrap();
        assert_eq!(nd_resolutions(&p2, &alpha, 3), [t("c")].into());
        assert_eq!(min_unknown_resolution(&p, &alpha), Some(1));
    }

    #[test]
    fn regular_tree_parse_and_unfold() {
        let r = RegularTree::parse("root T\nT = b(T)\n").unwrap();
        assert_eq!(r.unfold(3, None).to_string(), "b(b(b(unknown)))");
        assert!(RegularTree::parse("root T\nT = b(U)\n").is_err());
    }

    #[test]
    fn closure_of_single_tree() {
        let d = downward_closure_of_tree(&t("a(b1(c),b2(c))"));
        assert_eq!(d.len(), 7);
        for s in &d {
            assert!(embeds_unchecked(s, &t("a(b1(c),b2(c))")));
        }
    }
}
