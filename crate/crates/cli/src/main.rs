use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use downclose::cost::{accepts_bounded, Acceptance, BAutomaton};
use downclose::order_reduce::{derived_tree, parse_lambda_tree_file, parse_sidecar, reduce_scheme, LambdaTreeInput};
use downclose::pipeline::{
    diagonal_bruteforce, diagonal_regular, downward_closure_regular, downward_closure_search, emptiness_via_sup,
    sup_unmarked, Bounds, LanguageHandle, Report, TriState,
};
use downclose::schemes::{bohm_prefix, language_enumerate};
use downclose::stre::{is_irreducible, normalize, to_pure_product, Stre};
use downclose::{Nfta, RegularTree, Scheme, Tree};

#[derive(Parser)]
#[command(name = "downclose", about = "Recursion schemes, cost games and downward closures of tree languages")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct BoundArgs {
    /// Unfolding depth for Böhm prefixes and derived trees
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,
    /// Reduction steps (or game positions) allowed
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    fuel: u64,
    /// Size bound for enumerating members
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    size: u64,
    /// Largest n tried by counter games and diagonal oracles
    #[arg(long, default_value_t = 6)]
    nmax: u64,
}

impl BoundArgs {
    fn bounds(&self) -> Bounds {
        Bounds { size: self.size as usize, n_max: self.nmax as usize }
    }

    fn echo(&self) -> String {
        format!("bounds: depth {} fuel {} size {} nmax {}", self.depth, self.fuel, self.size, self.nmax)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Typecheck a scheme and report safety and order
    Check { scheme: PathBuf },
    /// Böhm-tree prefix of a scheme
    Bt {
        scheme: PathBuf,
        #[command(flatten)]
        b: BoundArgs,
    },
    /// Members of the language of a scheme
    Enum {
        scheme: PathBuf,
        #[command(flatten)]
        b: BoundArgs,
    },
    /// Order reduction; prints the reduced scheme with its header
    Reduce {
        scheme: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derived tree of a lambda-tree file, or of a reduced scheme
    Derived {
        input: PathBuf,
        /// Unfolding depth of the lambda-tree when the input is a reduced scheme
        #[arg(long, default_value_t = 80)]
        prefix_depth: usize,
        #[command(flatten)]
        b: BoundArgs,
    },
    /// Smallest n at which a B-automaton n-accepts a regular tree
    Game {
        automaton: PathBuf,
        tree: PathBuf,
        #[command(flatten)]
        b: BoundArgs,
    },
    /// Normal form of a tree regular expression (file or literal)
    StreNorm { expr: String },
    /// Pure product equivalent to an irreducible product
    StrePure { expr: String },
    /// Downward closure of a tree automaton
    DcRegular {
        automaton: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search a sum of pure products denoting the downward closure
    DcSearch {
        language: PathBuf,
        #[arg(long, default_value_t = 9)]
        stre_bound: usize,
        #[command(flatten)]
        b: BoundArgs,
    },
    /// Diagonal problem for a set of letters
    Diagonal {
        language: PathBuf,
        /// Comma-separated letters
        #[arg(long, value_delimiter = ',')]
        sigma: Vec<String>,
        #[command(flatten)]
        b: BoundArgs,
    },
    /// Whether a pure product lies in the downward closure of a language
    Sup {
        product: String,
        language: PathBuf,
        #[command(flatten)]
        b: BoundArgs,
    },
    /// Emptiness through the SUP reduction
    Empty {
        language: PathBuf,
        #[command(flatten)]
        b: BoundArgs,
    },
}

/// Report text and whether the verdict was definite.
struct Outcome {
    text: String,
    definite: bool,
}

impl Outcome {
    fn plain(text: String) -> Self {
        Outcome { text, definite: true }
    }

    fn report(header: Vec<String>, r: &Report) -> Self {
        let mut text = header.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        text.push_str(&r.to_string());
        Outcome { text, definite: !matches!(r.verdict, TriState::Unknown(_)) }
    }
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
}

fn parse_with<T>(p: &Path, f: impl FnOnce(&str) -> downclose::Result<T>) -> Result<T> {
    let src = read(p)?;
    f(&src).with_context(|| format!("{}", p.display()))
}

fn scheme(p: &Path) -> Result<Scheme> {
    parse_with(p, Scheme::parse)
}

fn stre_arg(s: &str) -> Result<Stre> {
    let p = Path::new(s);
    let src = if p.is_file() { read(p)? } else { s.to_string() };
    let text: String = src.lines().filter(|l| !l.trim_start().starts_with("--")).collect::<Vec<_>>().join(" ");
    Stre::parse(text.trim()).with_context(|| format!("expression `{s}`"))
}

/// Scheme (`.scm`), automaton (`.nfta`/`.fta`) or finite tree list (`.trees`).
fn language(p: &Path, b: &BoundArgs) -> Result<LanguageHandle> {
    match p.extension().and_then(|e| e.to_str()) {
        Some("scm") => Ok(LanguageHandle::Scheme {
            scheme: scheme(p)?,
            size: b.size as usize,
            depth: b.depth as usize,
            fuel: b.fuel as usize,
        }),
        Some("nfta") | Some("fta") => Ok(LanguageHandle::Exact(parse_with(p, Nfta::parse)?)),
        Some("trees") => {
            let src = read(p)?;
            let mut trees = Vec::new();
            for (i, l) in src.lines().enumerate() {
                let l = l.split("--").next().unwrap_or("").trim();
                if !l.is_empty() {
                    trees.push(Tree::parse(l).with_context(|| format!("{}:{}", p.display(), i + 1))?);
                }
            }
            Ok(LanguageHandle::finite(trees)?)
        }
        _ => bail!("{}: expected a .scm, .nfta or .trees file", p.display()),
    }
}

fn run(cmd: Cmd) -> Result<Outcome> {
    match cmd {
        Cmd::Check { scheme: p } => {
            let g = scheme(&p)?;
            let s = g.check_safety();
            let mut out = if s.safe {
                format!("safe, order {}", g.order())
            } else {
                format!("unsafe, order {}", g.order())
            };
            if let Some((rule, path, v)) = s.witness {
                write!(out, "\nviolation: rule {rule} at {path}, variable {v}")?;
            }
            Ok(Outcome::plain(out))
        }
        Cmd::Bt { scheme: p, b } => {
            let g = scheme(&p)?;
            let t = bohm_prefix(&g, b.depth as usize, b.fuel as usize);
            Ok(Outcome::plain(format!("{}\n{t}", b.echo())))
        }
        Cmd::Enum { scheme: p, b } => {
            let g = scheme(&p)?;
            let e = language_enumerate(&g, b.size as usize, b.depth as usize, b.fuel as usize);
            let mut out = format!("{}\nmembers: {}\nsaturated: {}", b.echo(), e.members.len(), e.saturated);
            for m in &e.members {
                write!(out, "\n{m}")?;
            }
            Ok(Outcome { text: out, definite: e.saturated })
        }
        Cmd::Reduce { scheme: p, out } => {
            let g = scheme(&p)?;
            let r = reduce_scheme(&g).with_context(|| format!("{}", p.display()))?;
            let text = r.to_file_string();
            if let Some(o) = out {
                std::fs::write(&o, &text).with_context(|| format!("cannot write {}", o.display()))?;
            }
            Ok(Outcome::plain(text.trim_end().to_string()))
        }
        Cmd::Derived { input, prefix_depth, b } => {
            let src = read(&input)?;
            let depth = b.depth as usize;
            let fuel = b.fuel as usize;
            let t = if input.extension().and_then(|e| e.to_str()) == Some("scm") {
                let la = parse_sidecar(&src)
                    .with_context(|| format!("{}: missing the `-- X:` / `-- base:` header", input.display()))?;
                let g = Scheme::parse(&src).with_context(|| format!("{}", input.display()))?;
                let lt = bohm_prefix(&g, prefix_depth, fuel);
                derived_tree(&lt, &la, depth, fuel)
            } else {
                let (la, lt) = parse_lambda_tree_file(&src).with_context(|| format!("{}", input.display()))?;
                match lt {
                    LambdaTreeInput::Finite(t) => derived_tree(&t, &la, depth, fuel),
                    LambdaTreeInput::Regular(t) => derived_tree(&t, &la, depth, fuel),
                }
            };
            Ok(Outcome::plain(t.to_string()))
        }
        Cmd::Game { automaton, tree, b } => {
            let a = parse_with(&automaton, BAutomaton::parse)?;
            let t = parse_with(&tree, RegularTree::parse)?;
            let r = accepts_bounded(&a, &t, b.nmax, b.fuel as usize)?;
            let verdict = match r {
                Acceptance::AcceptedAt(_) => TriState::Yes,
                Acceptance::RejectedUpTo(_) => TriState::No,
                Acceptance::Unknown => TriState::Unknown("exploration fuel exhausted".into()),
            };
            let text = format!("{}\n{r}\nVERDICT {verdict}", b.echo());
            Ok(Outcome { text, definite: !matches!(verdict, TriState::Unknown(_)) })
        }
        Cmd::StreNorm { expr } => {
            let s = stre_arg(&expr)?;
            let n = normalize(&s);
            Ok(Outcome::plain(format!("{n}\nirreducible: {}", is_irreducible(&n))))
        }
        Cmd::StrePure { expr } => {
            let s = stre_arg(&expr)?;
            Ok(Outcome::plain(to_pure_product(&s)?.to_string()))
        }
        Cmd::DcRegular { automaton, out } => {
            let a = parse_with(&automaton, Nfta::parse)?;
            let d = downward_closure_regular(&a)?;
            let text = d.to_string();
            if let Some(o) = out {
                std::fs::write(&o, &text).with_context(|| format!("cannot write {}", o.display()))?;
            }
            Ok(Outcome::plain(text.trim_end().to_string()))
        }
        Cmd::DcSearch { language: p, stre_bound, b } => {
            let l = language(&p, &b)?;
            let r = downward_closure_search(&l, stre_bound, b.bounds())?;
            let mut header = vec![format!("{} stre-bound {stre_bound}", b.echo())];
            if let Some(c) = &r.candidate {
                header.push(format!("CANDIDATE {c}"));
            }
            Ok(Outcome::report(header, &r.report))
        }
        Cmd::Diagonal { language: p, sigma, b } => {
            let l = language(&p, &b)?;
            let sigma: BTreeSet<String> = sigma.into_iter().filter(|s| !s.is_empty()).collect();
            let header = vec![b.echo(), format!("sigma: {{{}}}", sigma.iter().cloned().collect::<Vec<_>>().join(","))];
            let r = match &l {
                LanguageHandle::Exact(a) => {
                    let mut r = diagonal_regular(a, &sigma);
                    let (w, bf) = diagonal_bruteforce(&l, &sigma, b.nmax as usize, b.bounds());
                    r.lines.push(format!("enumeration: witnessed_max {w}, {}", bf.verdict));
                    r
                }
                _ => diagonal_bruteforce(&l, &sigma, b.nmax as usize, b.bounds()).1,
            };
            Ok(Outcome::report(header, &r))
        }
        Cmd::Sup { product, language: p, b } => {
            let s = stre_arg(&product)?;
            let l = language(&p, &b)?;
            let r = sup_unmarked(&s, &l, b.bounds())?;
            Ok(Outcome::report(vec![b.echo()], &r))
        }
        Cmd::Empty { language: p, b } => {
            let l = language(&p, &b)?;
            let r = emptiness_via_sup(&l, b.bounds())?;
            let answer = match r.verdict {
                TriState::Yes => "nonempty",
                TriState::No => "empty",
                TriState::Unknown(_) => "undetermined",
            };
            Ok(Outcome::report(vec![b.echo(), format!("language is {answer}")], &r))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(o) => {
            println!("{}", o.text);
            if o.definite {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(10)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
