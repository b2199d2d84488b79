//! Prosodic types and linear lambda terms.
//!
//! Terms describe surface word order: they are built from concatenation `+`,
//! the empty string `eps`, word leaves and variables, with application and
//! abstraction on top. Every binder must bind exactly one occurrence of its
//! variable and every free variable occurs exactly once; under that
//! restriction beta reduction strictly shrinks terms and normal forms are
//! unique up to renaming.
//!
//! Concrete syntax (lexicon files, proof files, CLI): `\x.M` for abstraction,
//! juxtaposition for application (left associative), `M + N` for
//! concatenation (left associative, tighter than an abstraction body),
//! `eps` for the empty string, bare identifiers for words and variables,
//! parentheses for grouping.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

/// Simple types over the single base type `st`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProsType {
    St,
    Arrow(Box<ProsType>, Box<ProsType>),
}

impl ProsType {
    pub fn arrow(arg: ProsType, result: ProsType) -> ProsType {
        ProsType::Arrow(Box::new(arg), Box::new(result))
    }

    pub fn is_arrow(&self) -> bool {
        matches!(self, ProsType::Arrow(..))
    }
}

impl fmt::Display for ProsType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProsType::St => write!(f, "st"),
            ProsType::Arrow(a, b) => {
                if a.is_arrow() {
                    write!(f, "({}) -> {}", a, b)
                } else {
                    write!(f, "{} -> {}", a, b)
                }
            }
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("ill-typed term at {at}: expected {expected}, found {found}")]
    IllTyped {
        at: String,
        expected: String,
        found: String,
    },
    #[error("variable {0} has {1} occurrence(s); linear terms require exactly one")]
    NonLinear(String, usize),
    #[error("unbound identifier {0}")]
    Unbound(String),
    #[error("cannot infer a unique type for {0}")]
    Ambiguous(String),
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// A linear lambda term over `+`, `eps`, words and variables.
///
/// Words are a distinct leaf kind rather than free variables; a lexical
/// term carries the word it belongs to as a `Word` leaf, which keeps
/// substitution away from lexical material.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String, ProsType),
    Word(String),
    Eps,
    Plus(Box<Term>, Box<Term>),
    App(Box<Term>, Box<Term>),
    Abs(String, ProsType, Box<Term>),
}

/// Equality discipline for terms.
///
/// `AssocPlus` compares `+` spines after flattening, matching the usual
/// associative presentation of the calculus; `Strict` keeps the trees as
/// written (the non-associative variant).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermCmp {
    Strict,
    AssocPlus,
}

impl Term {
    pub fn var(name: impl Into<String>, ty: ProsType) -> Term {
        Term::Var(name.into(), ty)
    }

    pub fn word(w: impl Into<String>) -> Term {
        Term::Word(w.into())
    }

    pub fn plus(l: Term, r: Term) -> Term {
        Term::Plus(Box::new(l), Box::new(r))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn abs(x: impl Into<String>, ty: ProsType, body: Term) -> Term {
        Term::Abs(x.into(), ty, Box::new(body))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(..) | Term::Word(_) | Term::Eps => 1,
            Term::Plus(l, r) | Term::App(l, r) => 1 + l.size() + r.size(),
            Term::Abs(_, _, b) => 1 + b.size(),
        }
    }

    /// The unique simple type of the term, or the first typing conflict.
    pub fn ty(&self) -> Result<ProsType, TermError> {
        self.ty_at("root")
    }

    fn ty_at(&self, at: &str) -> Result<ProsType, TermError> {
        match self {
            Term::Var(_, ty) => Ok(ty.clone()),
            Term::Word(_) | Term::Eps => Ok(ProsType::St),
            Term::Plus(l, r) => {
                let lt = l.ty_at(&format!("{at}.left"))?;
                if lt != ProsType::St {
                    return Err(TermError::IllTyped {
                        at: format!("{at}.left"),
                        expected: "st".into(),
                        found: lt.to_string(),
                    });
                }
                let rt = r.ty_at(&format!("{at}.right"))?;
                if rt != ProsType::St {
                    return Err(TermError::IllTyped {
                        at: format!("{at}.right"),
                        expected: "st".into(),
                        found: rt.to_string(),
                    });
                }
                Ok(ProsType::St)
            }
            Term::App(fun, arg) => {
                let ft = fun.ty_at(&format!("{at}.fun"))?;
                let at_ = arg.ty_at(&format!("{at}.arg"))?;
                match ft {
                    ProsType::Arrow(a, b) if *a == at_ => Ok(*b),
                    ProsType::Arrow(a, _) => Err(TermError::IllTyped {
                        at: format!("{at}.arg"),
                        expected: a.to_string(),
                        found: at_.to_string(),
                    }),
                    ProsType::St => Err(TermError::IllTyped {
                        at: format!("{at}.fun"),
                        expected: "an arrow type".into(),
                        found: "st".into(),
                    }),
                }
            }
            Term::Abs(x, xty, body) => {
                // Occurrences of x in the body must carry the binder's type.
                body.check_var_ty(x, xty, at)?;
                let bt = body.ty_at(&format!("{at}.body"))?;
                Ok(ProsType::arrow(xty.clone(), bt))
            }
        }
    }

    fn check_var_ty(&self, x: &str, ty: &ProsType, at: &str) -> Result<(), TermError> {
        match self {
            Term::Var(y, yty) if y == x && yty != ty => Err(TermError::IllTyped {
                at: at.into(),
                expected: ty.to_string(),
                found: yty.to_string(),
            }),
            Term::Var(..) | Term::Word(_) | Term::Eps => Ok(()),
            Term::Plus(l, r) | Term::App(l, r) => {
                l.check_var_ty(x, ty, at)?;
                r.check_var_ty(x, ty, at)
            }
            Term::Abs(y, _, _) if y == x => Ok(()),
            Term::Abs(_, _, b) => b.check_var_ty(x, ty, at),
        }
    }

    /// Free variable occurrence counts (binders respected).
    pub fn free_var_counts(&self) -> BTreeMap<String, usize> {
        fn go(t: &Term, bound: &mut Vec<String>, acc: &mut BTreeMap<String, usize>) {
            match t {
                Term::Var(x, _) => {
                    if !bound.iter().any(|b| b == x) {
                        *acc.entry(x.clone()).or_insert(0) += 1;
                    }
                }
                Term::Word(_) | Term::Eps => {}
                Term::Plus(l, r) | Term::App(l, r) => {
                    go(l, bound, acc);
                    go(r, bound, acc);
                }
                Term::Abs(x, _, b) => {
                    bound.push(x.clone());
                    go(b, bound, acc);
                    bound.pop();
                }
            }
        }
        let mut acc = BTreeMap::new();
        go(self, &mut Vec::new(), &mut acc);
        acc
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.free_var_counts().into_keys().collect()
    }

    /// All variable names occurring anywhere (free or bound).
    pub fn all_var_names(&self) -> BTreeSet<String> {
        let mut acc = BTreeSet::new();
        fn go(t: &Term, acc: &mut BTreeSet<String>) {
            match t {
                Term::Var(x, _) => {
                    acc.insert(x.clone());
                }
                Term::Word(_) | Term::Eps => {}
                Term::Plus(l, r) | Term::App(l, r) => {
                    go(l, acc);
                    go(r, acc);
                }
                Term::Abs(x, _, b) => {
                    acc.insert(x.clone());
                    go(b, acc);
                }
            }
        }
        go(self, &mut acc);
        acc
    }

    /// Number of occurrences of the word `w`.
    pub fn word_count(&self, w: &str) -> usize {
        match self {
            Term::Word(v) if v == w => 1,
            Term::Var(..) | Term::Word(_) | Term::Eps => 0,
            Term::Plus(l, r) | Term::App(l, r) => l.word_count(w) + r.word_count(w),
            Term::Abs(_, _, b) => b.word_count(w),
        }
    }

    pub fn contains_eps(&self) -> bool {
        match self {
            Term::Eps => true,
            Term::Var(..) | Term::Word(_) => false,
            Term::Plus(l, r) | Term::App(l, r) => l.contains_eps() || r.contains_eps(),
            Term::Abs(_, _, b) => b.contains_eps(),
        }
    }

    /// Linearity check: every binder binds exactly one occurrence and no
    /// free variable occurs twice.
    pub fn check_linear(&self) -> Result<(), TermError> {
        fn go(t: &Term, bound: &mut Vec<String>) -> Result<(), TermError> {
            match t {
                Term::Var(..) | Term::Word(_) | Term::Eps => Ok(()),
                Term::Plus(l, r) | Term::App(l, r) => {
                    go(l, bound)?;
                    go(r, bound)
                }
                Term::Abs(x, _, b) => {
                    let n = count_unshadowed(b, x);
                    if n != 1 {
                        return Err(TermError::NonLinear(x.clone(), n));
                    }
                    bound.push(x.clone());
                    let r = go(b, bound);
                    bound.pop();
                    r
                }
            }
        }
        fn count_unshadowed(t: &Term, x: &str) -> usize {
            match t {
                Term::Var(y, _) => usize::from(y == x),
                Term::Word(_) | Term::Eps => 0,
                Term::Plus(l, r) | Term::App(l, r) => {
                    count_unshadowed(l, x) + count_unshadowed(r, x)
                }
                Term::Abs(y, _, _) if y == x => 0,
                Term::Abs(_, _, b) => count_unshadowed(b, x),
            }
        }
        go(self, &mut Vec::new())?;
        for (x, n) in self.free_var_counts() {
            if n > 1 {
                return Err(TermError::NonLinear(x, n));
            }
        }
        Ok(())
    }

    /// Capture-avoiding substitution of `name` by `replacement`; binders
    /// that would capture a free variable of the replacement are refreshed.
    pub fn substitute(&self, name: &str, replacement: &Term) -> Term {
        let free = replacement.free_vars();
        let mut taken: BTreeSet<String> = self.all_var_names();
        taken.extend(replacement.all_var_names());
        self.subst_inner(name, replacement, &free, &mut taken)
    }

    fn subst_inner(
        &self,
        name: &str,
        replacement: &Term,
        repl_free: &BTreeSet<String>,
        taken: &mut BTreeSet<String>,
    ) -> Term {
        match self {
            Term::Var(x, _) if x == name => replacement.clone(),
            Term::Var(..) | Term::Word(_) | Term::Eps => self.clone(),
            Term::Plus(l, r) => Term::plus(
                l.subst_inner(name, replacement, repl_free, taken),
                r.subst_inner(name, replacement, repl_free, taken),
            ),
            Term::App(l, r) => Term::app(
                l.subst_inner(name, replacement, repl_free, taken),
                r.subst_inner(name, replacement, repl_free, taken),
            ),
            Term::Abs(x, ty, b) => {
                if x == name {
                    self.clone()
                } else if repl_free.contains(x) {
                    let fresh = fresh_name(x, taken);
                    taken.insert(fresh.clone());
                    let renamed = b.rename_free(x, &fresh);
                    Term::Abs(
                        fresh,
                        ty.clone(),
                        Box::new(renamed.subst_inner(name, replacement, repl_free, taken)),
                    )
                } else {
                    Term::Abs(
                        x.clone(),
                        ty.clone(),
                        Box::new(b.subst_inner(name, replacement, repl_free, taken)),
                    )
                }
            }
        }
    }

    /// Rename free occurrences of `from` to `to` (no capture check; callers
    /// pick fresh names).
    pub fn rename_free(&self, from: &str, to: &str) -> Term {
        match self {
            Term::Var(x, ty) if x == from => Term::Var(to.into(), ty.clone()),
            Term::Var(..) | Term::Word(_) | Term::Eps => self.clone(),
            Term::Plus(l, r) => Term::plus(l.rename_free(from, to), r.rename_free(from, to)),
            Term::App(l, r) => Term::app(l.rename_free(from, to), r.rename_free(from, to)),
            Term::Abs(x, _, _) if x == from => self.clone(),
            Term::Abs(x, ty, b) => {
                Term::Abs(x.clone(), ty.clone(), Box::new(b.rename_free(from, to)))
            }
        }
    }

    /// Contract the leftmost-outermost beta redex, if any.
    pub fn beta_step(&self) -> Option<Term> {
        match self {
            Term::App(f, a) => {
                if let Term::Abs(x, _, body) = f.as_ref() {
                    return Some(body.substitute(x, a));
                }
                if let Some(f2) = f.beta_step() {
                    return Some(Term::app(f2, a.as_ref().clone()));
                }
                a.beta_step().map(|a2| Term::app(f.as_ref().clone(), a2))
            }
            Term::Plus(l, r) => {
                if let Some(l2) = l.beta_step() {
                    return Some(Term::plus(l2, r.as_ref().clone()));
                }
                r.beta_step().map(|r2| Term::plus(l.as_ref().clone(), r2))
            }
            Term::Abs(x, ty, b) => b
                .beta_step()
                .map(|b2| Term::Abs(x.clone(), ty.clone(), Box::new(b2))),
            _ => None,
        }
    }

    /// Contract the leftmost-outermost eta redex `\x.(M x)`, if any.
    /// For linear terms the side condition that `x` not occur in `M` is
    /// automatic, but it is checked anyway.
    pub fn eta_step(&self) -> Option<Term> {
        match self {
            Term::Abs(x, _, b) => {
                if let Term::App(f, a) = b.as_ref() {
                    if matches!(a.as_ref(), Term::Var(y, _) if y == x)
                        && !f.free_vars().contains(x)
                    {
                        return Some(f.as_ref().clone());
                    }
                }
                b.eta_step()
                    .map(|b2| Term::Abs(x.clone(), b2_ty(self), Box::new(b2)))
            }
            Term::App(f, a) => {
                if let Some(f2) = f.eta_step() {
                    return Some(Term::app(f2, a.as_ref().clone()));
                }
                a.eta_step().map(|a2| Term::app(f.as_ref().clone(), a2))
            }
            Term::Plus(l, r) => {
                if let Some(l2) = l.eta_step() {
                    return Some(Term::plus(l2, r.as_ref().clone()));
                }
                r.eta_step().map(|r2| Term::plus(l.as_ref().clone(), r2))
            }
            _ => None,
        }
    }

    pub fn has_beta_redex(&self) -> bool {
        match self {
            Term::App(f, _) if matches!(f.as_ref(), Term::Abs(..)) => true,
            Term::Plus(l, r) | Term::App(l, r) => l.has_beta_redex() || r.has_beta_redex(),
            Term::Abs(_, _, b) => b.has_beta_redex(),
            _ => false,
        }
    }

    /// Beta-normal, eta-reduced form. Terminates for linear terms because
    /// beta strictly shrinks the term.
    pub fn normal_form(&self) -> Term {
        let mut t = self.clone();
        loop {
            if let Some(t2) = t.beta_step() {
                t = t2;
                continue;
            }
            if let Some(t2) = t.eta_step() {
                t = t2;
                continue;
            }
            return t;
        }
    }

    /// Beta-normal eta-long form: every subterm of arrow type that is not
    /// an abstraction gets expanded.
    pub fn long_normal_form(&self) -> Result<Term, TermError> {
        fn expand(t: &Term, taken: &mut BTreeSet<String>) -> Result<Term, TermError> {
            let ty = t.ty()?;
            match t {
                _ if ty.is_arrow() && !matches!(t, Term::Abs(..)) => {
                    let ProsType::Arrow(a, _) = ty else { unreachable!() };
                    let x = fresh_name("p", taken);
                    taken.insert(x.clone());
                    let body = Term::app(t.clone(), Term::var(x.clone(), (*a.clone()).clone()));
                    Ok(Term::Abs(
                        x,
                        *a.clone(),
                        Box::new(expand_children(&body, taken)?),
                    ))
                }
                _ => expand_children(t, taken),
            }
        }
        fn expand_children(t: &Term, taken: &mut BTreeSet<String>) -> Result<Term, TermError> {
            Ok(match t {
                Term::Var(..) | Term::Word(_) | Term::Eps => t.clone(),
                Term::Plus(l, r) => Term::plus(expand(l, taken)?, expand(r, taken)?),
                Term::App(f, a) => {
                    // The head of an application spine stays un-expanded.
                    Term::app(expand_children(f, taken)?, expand(a, taken)?)
                }
                Term::Abs(x, ty, b) => {
                    Term::Abs(x.clone(), ty.clone(), Box::new(expand(b, taken)?))
                }
            })
        }
        let nf = self.normal_form();
        let mut taken = nf.all_var_names();
        expand(&nf, &mut taken)
    }

    /// Leaves of the `+` spine, left to right.
    pub fn plus_spine(&self) -> Vec<&Term> {
        match self {
            Term::Plus(l, r) => {
                let mut v = l.plus_spine();
                v.extend(r.plus_spine());
                v
            }
            _ => vec![self],
        }
    }

    /// Surface word sequence: flattens `+`, erases `eps`. Returns `None`
    /// if a non-word leaf remains.
    pub fn word_spine(&self) -> Option<Vec<String>> {
        let mut out = Vec::new();
        for leaf in self.plus_spine() {
            match leaf {
                Term::Word(w) => out.push(w.clone()),
                Term::Eps => {}
                _ => return None,
            }
        }
        Some(out)
    }

    /// Canonical form under the given comparison mode: binders renamed in
    /// traversal order and, in associative mode, `+` spines re-associated
    /// to the left.
    pub fn canonical(&self, cmp: TermCmp) -> Term {
        fn go(t: &Term, map: &mut Vec<(String, String)>, n: &mut usize, cmp: TermCmp) -> Term {
            match t {
                Term::Var(x, ty) => {
                    let name = map
                        .iter()
                        .rev()
                        .find(|(o, _)| o == x)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(|| x.clone());
                    Term::Var(name, ty.clone())
                }
                Term::Word(_) | Term::Eps => t.clone(),
                Term::Plus(..) if cmp == TermCmp::AssocPlus => {
                    let parts: Vec<Term> = t
                        .plus_spine()
                        .iter()
                        .map(|p| go(p, map, n, cmp))
                        .collect();
                    let mut it = parts.into_iter();
                    let first = it.next().expect("plus spine is nonempty");
                    it.fold(first, Term::plus)
                }
                Term::Plus(l, r) => Term::plus(go(l, map, n, cmp), go(r, map, n, cmp)),
                Term::App(f, a) => Term::app(go(f, map, n, cmp), go(a, map, n, cmp)),
                Term::Abs(x, ty, b) => {
                    let c = format!("v{n}");
                    *n += 1;
                    map.push((x.clone(), c.clone()));
                    let body = go(b, map, n, cmp);
                    map.pop();
                    Term::Abs(c, ty.clone(), Box::new(body))
                }
            }
        }
        go(self, &mut Vec::new(), &mut 0, cmp)
    }

    /// Alpha equivalence (strict `+` trees).
    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.canonical(TermCmp::Strict) == other.canonical(TermCmp::Strict)
    }

    /// Alpha equivalence under a comparison mode.
    pub fn alpha_eq_mod(&self, other: &Term, cmp: TermCmp) -> bool {
        self.canonical(cmp) == other.canonical(cmp)
    }

    /// Beta-eta equivalence under a comparison mode.
    pub fn beta_eta_eq(&self, other: &Term, cmp: TermCmp) -> bool {
        self.normal_form().alpha_eq_mod(&other.normal_form(), cmp)
    }
}

/// A term with one distinguished hole, represented by a reserved variable.
/// Plugging substitutes the hole; linearity is preserved when the plugged
/// term shares no free variables with the context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermContext {
    pub hole: String,
    pub body: Term,
}

impl TermContext {
    pub fn new(hole: impl Into<String>, body: Term) -> TermContext {
        TermContext {
            hole: hole.into(),
            body,
        }
    }

    pub fn plug(&self, t: &Term) -> Term {
        self.body.substitute(&self.hole, t)
    }
}

pub fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    let stem: String = base
        .chars()
        .take_while(|c| !c.is_ascii_digit())
        .collect::<String>();
    let stem = if stem.is_empty() { "x".to_string() } else { stem };
    for i in 1.. {
        let cand = format!("{stem}{i}");
        if !taken.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

fn b2_ty(abs: &Term) -> ProsType {
    match abs {
        Term::Abs(_, ty, _) => ty.clone(),
        _ => unreachable!("only called on Abs"),
    }
}

// ---------------------------------------------------------------------------
// Concrete syntax
// ---------------------------------------------------------------------------

/// Untyped surface syntax, elaborated against an environment. `AbsTyped`
/// never comes from the parser; graph readback uses it to pin down binder
/// types recorded on lambda links.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawTerm {
    Ident(String),
    Eps,
    Plus(Box<RawTerm>, Box<RawTerm>),
    App(Box<RawTerm>, Box<RawTerm>),
    Abs(String, Box<RawTerm>),
    AbsTyped(String, ProsType, Box<RawTerm>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Lambda,
    Dot,
    Plus,
    LParen,
    RParen,
    Eps,
}

fn tokenize_term(input: &str) -> Result<Vec<(usize, Tok)>, TermError> {
    let mut out = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '\\' => {
                out.push((i, Tok::Lambda));
                i += 1;
            }
            '.' => {
                out.push((i, Tok::Dot));
                i += 1;
            }
            '+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word = &input[start..i];
                if word == "eps" {
                    out.push((start, Tok::Eps));
                } else {
                    out.push((start, Tok::Ident(word.to_string())));
                }
            }
            other => {
                return Err(TermError::Syntax {
                    pos: i,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

struct TermParser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl TermParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), TermError> {
        let pos = self.here();
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            _ => Err(TermError::Syntax {
                pos,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn term(&mut self) -> Result<RawTerm, TermError> {
        if matches!(self.peek(), Some(Tok::Lambda)) {
            self.bump();
            let pos = self.here();
            let Some(Tok::Ident(x)) = self.bump() else {
                return Err(TermError::Syntax {
                    pos,
                    msg: "expected a variable after \\".into(),
                });
            };
            self.expect(Tok::Dot, "'.' after binder")?;
            let body = self.term()?;
            return Ok(RawTerm::Abs(x, Box::new(body)));
        }
        self.plus()
    }

    fn plus(&mut self) -> Result<RawTerm, TermError> {
        let mut acc = self.appl()?;
        while matches!(self.peek(), Some(Tok::Plus)) {
            self.bump();
            let rhs = self.appl()?;
            acc = RawTerm::Plus(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn appl(&mut self) -> Result<RawTerm, TermError> {
        let mut acc = self.atom()?;
        while matches!(self.peek(), Some(Tok::Ident(_) | Tok::Eps | Tok::LParen)) {
            let arg = self.atom()?;
            acc = RawTerm::App(Box::new(acc), Box::new(arg));
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<RawTerm, TermError> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Ident(x)) => Ok(RawTerm::Ident(x)),
            Some(Tok::Eps) => Ok(RawTerm::Eps),
            Some(Tok::LParen) => {
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => Err(TermError::Syntax {
                pos,
                msg: "expected a term".into(),
            }),
        }
    }
}

impl RawTerm {
    pub fn parse(input: &str) -> Result<RawTerm, TermError> {
        let toks = tokenize_term(input)?;
        let mut p = TermParser {
            toks,
            pos: 0,
            end: input.len(),
        };
        let t = p.term()?;
        if p.pos != p.toks.len() {
            return Err(TermError::Syntax {
                pos: p.here(),
                msg: "trailing input".into(),
            });
        }
        Ok(t)
    }
}

// --- elaboration: simple-type inference with metavariables ---------------

#[derive(Clone, Debug, PartialEq)]
enum MTy {
    St,
    Arrow(Box<MTy>, Box<MTy>),
    Var(u32),
}

impl MTy {
    fn of(ty: &ProsType) -> MTy {
        match ty {
            ProsType::St => MTy::St,
            ProsType::Arrow(a, b) => MTy::Arrow(Box::new(MTy::of(a)), Box::new(MTy::of(b))),
        }
    }
}

struct Unifier {
    subst: BTreeMap<u32, MTy>,
    next: u32,
}

impl Unifier {
    fn new() -> Unifier {
        Unifier {
            subst: BTreeMap::new(),
            next: 0,
        }
    }

    fn fresh(&mut self) -> MTy {
        let v = self.next;
        self.next += 1;
        MTy::Var(v)
    }

    fn resolve(&self, t: &MTy) -> MTy {
        match t {
            MTy::Var(v) => match self.subst.get(v) {
                Some(u) => self.resolve(u),
                None => t.clone(),
            },
            MTy::St => MTy::St,
            MTy::Arrow(a, b) => MTy::Arrow(
                Box::new(self.resolve(a)),
                Box::new(self.resolve(b)),
            ),
        }
    }

    fn occurs(&self, v: u32, t: &MTy) -> bool {
        match self.resolve(t) {
            MTy::Var(u) => u == v,
            MTy::St => false,
            MTy::Arrow(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
        }
    }

    fn unify(&mut self, a: &MTy, b: &MTy, at: &str) -> Result<(), TermError> {
        let a = self.resolve(a);
        let b = self.resolve(b);
        match (&a, &b) {
            (MTy::Var(v), _) => {
                if self.occurs(*v, &b) && a != b {
                    return Err(TermError::IllTyped {
                        at: at.into(),
                        expected: "a finite type".into(),
                        found: "a cyclic type".into(),
                    });
                }
                if a != b {
                    self.subst.insert(*v, b);
                }
                Ok(())
            }
            (_, MTy::Var(_)) => self.unify(&b, &a, at),
            (MTy::St, MTy::St) => Ok(()),
            (MTy::Arrow(a1, a2), MTy::Arrow(b1, b2)) => {
                self.unify(a1, b1, at)?;
                self.unify(a2, b2, at)
            }
            _ => Err(TermError::IllTyped {
                at: at.into(),
                expected: show_mty(&a),
                found: show_mty(&b),
            }),
        }
    }

    fn concretize(&self, t: &MTy, what: &str) -> Result<ProsType, TermError> {
        match self.resolve(t) {
            MTy::St => Ok(ProsType::St),
            MTy::Arrow(a, b) => Ok(ProsType::arrow(
                self.concretize(&a, what)?,
                self.concretize(&b, what)?,
            )),
            MTy::Var(_) => Err(TermError::Ambiguous(what.into())),
        }
    }
}

fn show_mty(t: &MTy) -> String {
    match t {
        MTy::St => "st".into(),
        MTy::Arrow(a, b) => format!("{} -> {}", show_mty(a), show_mty(b)),
        MTy::Var(v) => format!("?{v}"),
    }
}

/// Elaborate a raw term: identifiers in `words` become `Word` leaves,
/// identifiers in `env` become free variables of the recorded type, binders
/// receive inferred types. `expected`, when given, constrains the whole term.
pub fn elaborate(
    raw: &RawTerm,
    env: &BTreeMap<String, ProsType>,
    words: &HashSet<String>,
    expected: Option<&ProsType>,
) -> Result<Term, TermError> {
    enum Pre {
        Var(String, MTy),
        Word(String),
        Eps,
        Plus(Box<Pre>, Box<Pre>),
        App(Box<Pre>, Box<Pre>),
        Abs(String, MTy, Box<Pre>),
    }

    fn infer(
        raw: &RawTerm,
        env: &BTreeMap<String, ProsType>,
        words: &HashSet<String>,
        bound: &mut Vec<(String, MTy)>,
        uni: &mut Unifier,
    ) -> Result<(Pre, MTy), TermError> {
        match raw {
            RawTerm::Ident(x) => {
                if let Some((_, ty)) = bound.iter().rev().find(|(b, _)| b == x) {
                    return Ok((Pre::Var(x.clone(), ty.clone()), ty.clone()));
                }
                if words.contains(x) {
                    return Ok((Pre::Word(x.clone()), MTy::St));
                }
                if let Some(ty) = env.get(x) {
                    let m = MTy::of(ty);
                    return Ok((Pre::Var(x.clone(), m.clone()), m));
                }
                Err(TermError::Unbound(x.clone()))
            }
            RawTerm::Eps => Ok((Pre::Eps, MTy::St)),
            RawTerm::Plus(l, r) => {
                let (lp, lt) = infer(l, env, words, bound, uni)?;
                uni.unify(&lt, &MTy::St, "left of +")?;
                let (rp, rt) = infer(r, env, words, bound, uni)?;
                uni.unify(&rt, &MTy::St, "right of +")?;
                Ok((Pre::Plus(Box::new(lp), Box::new(rp)), MTy::St))
            }
            RawTerm::App(f, a) => {
                let (fp, ft) = infer(f, env, words, bound, uni)?;
                let (ap, at) = infer(a, env, words, bound, uni)?;
                let res = uni.fresh();
                uni.unify(
                    &ft,
                    &MTy::Arrow(Box::new(at), Box::new(res.clone())),
                    "application",
                )?;
                Ok((Pre::App(Box::new(fp), Box::new(ap)), res))
            }
            RawTerm::Abs(x, b) => {
                let xt = uni.fresh();
                bound.push((x.clone(), xt.clone()));
                let (bp, bt) = infer(b, env, words, bound, uni)?;
                bound.pop();
                Ok((
                    Pre::Abs(x.clone(), xt.clone(), Box::new(bp)),
                    MTy::Arrow(Box::new(xt), Box::new(bt)),
                ))
            }
            RawTerm::AbsTyped(x, ty, b) => {
                let xt = MTy::of(ty);
                bound.push((x.clone(), xt.clone()));
                let (bp, bt) = infer(b, env, words, bound, uni)?;
                bound.pop();
                Ok((
                    Pre::Abs(x.clone(), xt.clone(), Box::new(bp)),
                    MTy::Arrow(Box::new(xt), Box::new(bt)),
                ))
            }
        }
    }

    fn finish(p: &Pre, uni: &Unifier) -> Result<Term, TermError> {
        Ok(match p {
            Pre::Var(x, t) => Term::Var(x.clone(), uni.concretize(t, x)?),
            Pre::Word(w) => Term::Word(w.clone()),
            Pre::Eps => Term::Eps,
            Pre::Plus(l, r) => Term::plus(finish(l, uni)?, finish(r, uni)?),
            Pre::App(f, a) => Term::app(finish(f, uni)?, finish(a, uni)?),
            Pre::Abs(x, t, b) => Term::Abs(
                x.clone(),
                uni.concretize(t, x)?,
                Box::new(finish(b, uni)?),
            ),
        })
    }

    let mut uni = Unifier::new();
    let (pre, ty) = infer(raw, env, words, &mut Vec::new(), &mut uni)?;
    if let Some(exp) = expected {
        uni.unify(&ty, &MTy::of(exp), "root")?;
    }
    finish(&pre, &uni)
}

/// Parse and elaborate a term in one go.
pub fn parse_term(
    input: &str,
    env: &BTreeMap<String, ProsType>,
    words: &HashSet<String>,
    expected: Option<&ProsType>,
) -> Result<Term, TermError> {
    elaborate(&RawTerm::parse(input)?, env, words, expected)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence: atom > application > plus > abstraction body.
        fn show(t: &Term, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
            match t {
                Term::Var(x, _) => write!(f, "{x}"),
                Term::Word(w) => write!(f, "{w}"),
                Term::Eps => write!(f, "eps"),
                Term::Plus(l, r) => {
                    let need = prec > 1;
                    if need {
                        write!(f, "(")?;
                    }
                    show(l, f, 1)?;
                    write!(f, " + ")?;
                    show(r, f, 2)?;
                    if need {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                Term::App(fun, arg) => {
                    let need = prec > 2;
                    if need {
                        write!(f, "(")?;
                    }
                    show(fun, f, 2)?;
                    write!(f, " ")?;
                    show(arg, f, 3)?;
                    if need {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                Term::Abs(x, _, b) => {
                    let need = prec > 0;
                    if need {
                        write!(f, "(")?;
                    }
                    write!(f, "\\{x}.")?;
                    show(b, f, 0)?;
                    if need {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        show(self, f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st() -> ProsType {
        ProsType::St
    }

    fn st_st() -> ProsType {
        ProsType::arrow(st(), st())
    }

    #[test]
    fn type_of_spec_examples() {
        assert_eq!(Term::Eps.ty().unwrap(), st());
        // \z.(z + sleeps) : st -> st
        let t = Term::abs("z", st(), Term::plus(Term::var("z", st()), Term::word("sleeps")));
        assert_eq!(t.ty().unwrap(), st_st());
        // a base-typed term cannot be applied
        let t = Term::app(Term::word("a"), Term::word("b"));
        assert!(matches!(t.ty(), Err(TermError::IllTyped { .. })));
    }

    #[test]
    fn linearity_spec_examples() {
        // \P.(P everyone)
        let t = Term::abs(
            "P",
            st_st(),
            Term::app(Term::var("P", st_st()), Term::word("everyone")),
        );
        assert!(t.check_linear().is_ok());
        // \x.(x + x)
        let t = Term::abs(
            "x",
            st(),
            Term::plus(Term::var("x", st()), Term::var("x", st())),
        );
        assert_eq!(t.check_linear(), Err(TermError::NonLinear("x".into(), 2)));
        // \x.everyone
        let t = Term::abs("x", st(), Term::word("everyone"));
        assert_eq!(t.check_linear(), Err(TermError::NonLinear("x".into(), 0)));
    }

    #[test]
    fn beta_step_spec_examples() {
        // (\z.z + sleeps) everyone -> everyone + sleeps
        let f = Term::abs("z", st(), Term::plus(Term::var("z", st()), Term::word("sleeps")));
        let t = Term::app(f.clone(), Term::word("everyone"));
        let r = t.beta_step().unwrap();
        assert_eq!(r, Term::plus(Term::word("everyone"), Term::word("sleeps")));
        assert!(r.beta_step().is_none());
        // (\P.(P everyone)) (\z.z + sleeps) -> (\z.z + sleeps) everyone
        let outer = Term::abs(
            "P",
            st_st(),
            Term::app(Term::var("P", st_st()), Term::word("everyone")),
        );
        let t = Term::app(outer, f.clone());
        let one = t.beta_step().unwrap();
        assert_eq!(one, Term::app(f, Term::word("everyone")));
        // single step agrees with the normal-form oracle after one more step
        assert_eq!(
            one.beta_step().unwrap(),
            t.normal_form()
        );
    }

    #[test]
    fn eta_step_spec_examples() {
        let f = Term::var("f", st_st());
        let t = Term::abs("x", st(), Term::app(f.clone(), Term::var("x", st())));
        assert_eq!(t.eta_step().unwrap(), f);
        // \x.(x + a) has no eta redex
        let t = Term::abs("x", st(), Term::plus(Term::var("x", st()), Term::word("a")));
        assert!(t.eta_step().is_none());
        // \x.((g a) x) -> (g a), and the type is preserved
        let g = Term::var("g", ProsType::arrow(st(), st_st()));
        let ga = Term::app(g, Term::word("a"));
        let t = Term::abs("x", st(), Term::app(ga.clone(), Term::var("x", st())));
        let before = t.ty().unwrap();
        let after = t.eta_step().unwrap();
        assert_eq!(after, ga);
        assert_eq!(after.ty().unwrap(), before);
    }

    #[test]
    fn normal_form_spec_examples() {
        let sleeps = Term::abs("z", st(), Term::plus(Term::var("z", st()), Term::word("sleeps")));
        let everyone = Term::abs(
            "P",
            st_st(),
            Term::app(Term::var("P", st_st()), Term::word("everyone")),
        );
        let t = Term::app(everyone, sleeps);
        assert_eq!(
            t.normal_form(),
            Term::plus(Term::word("everyone"), Term::word("sleeps"))
        );
        let done = Term::plus(Term::word("everyone"), Term::word("sleeps"));
        assert_eq!(done.normal_form(), done);
        // (\x.x)(\y.y + eps) -> \y.y + eps
        let id = Term::abs("x", st_st(), Term::var("x", st_st()));
        let v = Term::abs("y", st(), Term::plus(Term::var("y", st()), Term::Eps));
        assert_eq!(Term::app(id, v.clone()).normal_form(), v);
    }

    #[test]
    fn alpha_eq_spec_examples() {
        let a = Term::abs("x", st(), Term::plus(Term::var("x", st()), Term::word("a")));
        let b = Term::abs("y", st(), Term::plus(Term::var("y", st()), Term::word("a")));
        assert!(a.alpha_eq(&b));
        let c = Term::abs("x", st(), Term::plus(Term::word("a"), Term::var("x", st())));
        assert!(!a.alpha_eq(&c));
        let w = Term::plus(Term::word("everyone"), Term::word("sleeps"));
        assert!(w.alpha_eq(&w.clone()));
    }

    #[test]
    fn assoc_comparison_flattens_plus() {
        let l = Term::plus(
            Term::plus(Term::word("a"), Term::word("b")),
            Term::word("c"),
        );
        let r = Term::plus(
            Term::word("a"),
            Term::plus(Term::word("b"), Term::word("c")),
        );
        assert!(!l.alpha_eq(&r));
        assert!(l.alpha_eq_mod(&r, TermCmp::AssocPlus));
    }

    #[test]
    fn parse_and_print_round_trip() {
        let env = BTreeMap::new();
        let mut words = HashSet::new();
        for w in ["everyone", "sleeps", "and"] {
            words.insert(w.to_string());
        }
        let t = parse_term("\\P.(P everyone)", &env, &words, Some(&ProsType::arrow(st_st(), st()))).unwrap();
        let printed = t.to_string();
        let back = parse_term(&printed, &env, &words, Some(&ProsType::arrow(st_st(), st()))).unwrap();
        assert!(t.alpha_eq(&back));
    }

    #[test]
    fn elaborate_coordination_entry() {
        // \Q.\P.\y.((P eps) + and + (Q y)) at (st->st)->(st->st)->(st->st)
        let env = BTreeMap::new();
        let mut words = HashSet::new();
        words.insert("and".to_string());
        let ty = ProsType::arrow(st_st(), ProsType::arrow(st_st(), st_st()));
        let t = parse_term(
            "\\Q.\\P.\\y.((P eps) + and + (Q y))",
            &env,
            &words,
            Some(&ty),
        )
        .unwrap();
        assert_eq!(t.ty().unwrap(), ty);
        assert!(t.check_linear().is_ok());
        assert_eq!(t.word_count("and"), 1);
    }

    #[test]
    fn substitution_refreshes_colliding_binders() {
        // (\y.x + y)[x := y] must not capture
        let body = Term::abs("y", st(), Term::plus(Term::var("x", st()), Term::var("y", st())));
        let out = body.substitute("x", &Term::var("y", st()));
        assert!(out.check_linear().is_ok());
        let Term::Abs(b, _, inner) = &out else { panic!() };
        assert_ne!(b, "y");
        assert_eq!(
            inner.as_ref(),
            &Term::plus(Term::var("y", st()), Term::var(b.clone(), st()))
        );
    }

    #[test]
    fn long_normal_form_expands_arrows() {
        let f = Term::var("f", st_st());
        let lnf = f.long_normal_form().unwrap();
        let Term::Abs(x, _, body) = &lnf else { panic!("expected abstraction") };
        assert_eq!(
            body.as_ref(),
            &Term::app(f.clone(), Term::var(x.clone(), st()))
        );
        // and eta-reduction undoes it
        assert_eq!(lnf.normal_form(), f);
    }
}
