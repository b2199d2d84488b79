//! Lexical entries and lexicon files.
//!
//! File format, one entry per line:
//!
//! ```text
//! # comment
//! @atoms n np s pp extra
//! word : FORMULA [:= TERM]
//! @schema name : FORMULA [:= TERM]     # FORMULA may use schema variables (uppercase)
//! @instantiate name AT FORMULA
//! ```
//!
//! Entries without a term get the default identity string term (the bare
//! word), which is only possible for Lambek-typed entries. Duplicate lines
//! create ambiguous entries, enumerated by the prover.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::formula::{Formula, FormulaError};
use crate::term::{parse_term, Term, TermError};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: {err}")]
    AtLine { line: usize, err: Box<LexiconError> },
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("formula: {0}")]
    Formula(#[from] FormulaError),
    #[error("term: {0}")]
    Term(#[from] TermError),
    #[error("undeclared atom {0}")]
    UndeclaredAtom(String),
    #[error("schema variable {0} in a plain entry; declare it with @schema and expand it with @instantiate")]
    SchemaInEntry(String),
    #[error("unknown schema {0}")]
    UnknownSchema(String),
    #[error("entry for {word}: term has type {found}, expected {expected}")]
    TypeMismatch {
        word: String,
        expected: String,
        found: String,
    },
    #[error("entry for {word}: {err}")]
    NonLinear { word: String, err: TermError },
    #[error("entry for {word}: the word must occur exactly once in the term (found {count})")]
    WordOccurrence { word: String, count: usize },
    #[error("entry for {word}: free variable {var} is not allowed in a lexical term")]
    FreeVariable { word: String, var: String },
    #[error("io: {0}")]
    Io(String),
}

/// A word paired with a formula and a linear prosodic term mentioning the
/// word exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexEntry {
    pub word: String,
    pub formula: Formula,
    pub term: Term,
}

impl fmt::Display for LexEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} := {}", self.word, self.formula, self.term)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LexOptions {
    /// Skip the `typeOf(term) = pros(formula)` check. Reproduces lexicalized
    /// grammar variants that decouple string types from formulas;
    /// experimental, the terms must still be well-typed and linear.
    pub lax_pros: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    entries: IndexMap<String, Vec<LexEntry>>,
    atoms: IndexSet<String>,
    pub lax_pros: bool,
}

pub const BUILTIN_ATOMS: [&str; 4] = ["n", "np", "s", "pp"];

impl Lexicon {
    pub fn new() -> Lexicon {
        let mut atoms = IndexSet::new();
        for a in BUILTIN_ATOMS {
            atoms.insert(a.to_string());
        }
        Lexicon {
            entries: IndexMap::new(),
            atoms,
            lax_pros: false,
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.atoms.iter().map(|s| s.as_str())
    }

    pub fn declare_atom(&mut self, a: impl Into<String>) {
        self.atoms.insert(a.into());
    }

    pub fn entries(&self, word: &str) -> &[LexEntry] {
        self.entries.get(word).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn all_entries(&self) -> impl Iterator<Item = &LexEntry> {
        self.entries.values().flatten()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Validate and insert an entry.
    pub fn add(&mut self, entry: LexEntry) -> Result<(), LexiconError> {
        self.check_atoms(&entry.formula)?;
        validate_entry_with(&entry, self.lax_pros)?;
        self.entries
            .entry(entry.word.clone())
            .or_default()
            .push(entry);
        Ok(())
    }

    fn check_atoms(&self, f: &Formula) -> Result<(), LexiconError> {
        for a in f.atoms() {
            if a.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                return Err(LexiconError::SchemaInEntry(a));
            }
            if !self.atoms.contains(&a) {
                return Err(LexiconError::UndeclaredAtom(a));
            }
        }
        Ok(())
    }

    /// Parse a goal or hypothesis formula against the declared atom set.
    pub fn parse_formula(&self, text: &str) -> Result<Formula, LexiconError> {
        let f = Formula::parse(text)?;
        self.check_atoms(&f)?;
        Ok(f)
    }

    pub fn load(path: impl AsRef<Path>, opts: LexOptions) -> Result<Lexicon, LexiconError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| LexiconError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Lexicon::parse_str(&text, opts)
    }

    pub fn parse_str(text: &str, opts: LexOptions) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::new();
        lex.lax_pros = opts.lax_pros;
        let mut schemas: BTreeMap<String, (Formula, Option<String>)> = BTreeMap::new();

        for (lineno, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(i) => &raw_line[..i],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let at = |err: LexiconError| LexiconError::AtLine {
                line: lineno + 1,
                err: Box::new(err),
            };

            if let Some(rest) = line.strip_prefix("@atoms") {
                for a in rest.split_whitespace() {
                    if !a.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
                    {
                        return Err(at(LexiconError::Syntax(format!(
                            "atom names are lowercase identifiers, got {a}"
                        ))));
                    }
                    lex.declare_atom(a);
                }
                continue;
            }

            if let Some(rest) = line.strip_prefix("@schema") {
                let (name, formula, term) = split_entry(rest).map_err(|e| at(e))?;
                let f = Formula::parse(&formula).map_err(|e| at(e.into()))?;
                schemas.insert(name, (f, term));
                continue;
            }

            if let Some(rest) = line.strip_prefix("@instantiate") {
                let Some((name, formula)) = rest.split_once(" AT ") else {
                    return Err(at(LexiconError::Syntax(
                        "expected `@instantiate NAME AT FORMULA`".into(),
                    )));
                };
                let name = name.trim().to_string();
                let Some((schema, term_src)) = schemas.get(&name).cloned() else {
                    return Err(at(LexiconError::UnknownSchema(name)));
                };
                let target = Formula::parse(formula.trim()).map_err(|e| at(e.into()))?;
                let mut inst = schema.clone();
                for v in schema.schema_vars() {
                    inst = inst.instantiate(&v, &target).map_err(|e| at(e.into()))?;
                }
                let entry = lex
                    .make_entry(name.clone(), inst, term_src.as_deref())
                    .map_err(|e| at(e))?;
                lex.add(entry).map_err(|e| at(e))?;
                continue;
            }

            if line.starts_with('@') {
                return Err(at(LexiconError::Syntax(format!(
                    "unknown directive {}",
                    line.split_whitespace().next().unwrap_or(line)
                ))));
            }

            let (word, formula, term) = split_entry(line).map_err(|e| at(e))?;
            let f = Formula::parse(&formula).map_err(|e| at(e.into()))?;
            let entry = lex
                .make_entry(word, f, term.as_deref())
                .map_err(|e| at(e))?;
            lex.add(entry).map_err(|e| at(e))?;
        }
        Ok(lex)
    }

    fn make_entry(
        &self,
        word: String,
        formula: Formula,
        term_src: Option<&str>,
    ) -> Result<LexEntry, LexiconError> {
        self.check_atoms(&formula)?;
        let term = match term_src {
            Some(src) => {
                let env = BTreeMap::new();
                let mut words = HashSet::new();
                words.insert(word.clone());
                let expected = formula.pros();
                let exp = if self.lax_pros { None } else { Some(&expected) };
                parse_term(src, &env, &words, exp)?
            }
            None => Term::word(word.clone()),
        };
        Ok(LexEntry {
            word,
            formula,
            term,
        })
    }
}

fn split_entry(line: &str) -> Result<(String, String, Option<String>), LexiconError> {
    let Some((word, rest)) = line.split_once(':') else {
        return Err(LexiconError::Syntax(
            "expected `word : FORMULA [:= TERM]`".into(),
        ));
    };
    let word = word.trim();
    if word.is_empty() || word.contains(char::is_whitespace) {
        return Err(LexiconError::Syntax(format!("bad word {word:?}")));
    }
    // `:=` splits formula from term; the first `:` above never belongs to it
    // because words cannot contain `:`.
    match rest.split_once(":=") {
        Some((f, t)) => {
            let f = f.trim();
            if let Some(stripped) = f.strip_suffix(':') {
                // guards against `word :: FORMULA` style typos
                return Err(LexiconError::Syntax(format!("unexpected `:` after {stripped}")));
            }
            Ok((word.to_string(), f.to_string(), Some(t.trim().to_string())))
        }
        None => Ok((word.to_string(), rest.trim().to_string(), None)),
    }
}

/// Check both entry invariants: the term is linear and well-typed with the
/// word as its only free leaf, and its type matches the formula's prosodic
/// type.
pub fn validate_entry(entry: &LexEntry) -> Result<(), LexiconError> {
    validate_entry_with(entry, false)
}

fn validate_entry_with(entry: &LexEntry, lax_pros: bool) -> Result<(), LexiconError> {
    let word = &entry.word;
    if let Some(var) = entry.term.free_vars().into_iter().next() {
        return Err(LexiconError::FreeVariable {
            word: word.clone(),
            var,
        });
    }
    entry
        .term
        .check_linear()
        .map_err(|err| LexiconError::NonLinear {
            word: word.clone(),
            err,
        })?;
    let n = entry.term.word_count(word);
    if n != 1 {
        return Err(LexiconError::WordOccurrence {
            word: word.clone(),
            count: n,
        });
    }
    let found = entry.term.ty().map_err(|err| LexiconError::NonLinear {
        word: word.clone(),
        err,
    })?;
    if !lax_pros {
        let expected = entry.formula.pros();
        if found != expected {
            return Err(LexiconError::TypeMismatch {
                word: word.clone(),
                expected: expected.to_string(),
                found: found.to_string(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::ProsType;

    fn st() -> ProsType {
        ProsType::St
    }

    #[test]
    fn validate_spec_examples() {
        // everyone |-> (np -o s) -o s, \P.(P everyone)
        let e = LexEntry {
            word: "everyone".into(),
            formula: Formula::parse("(np -o s) -o s").unwrap(),
            term: Term::abs(
                "P",
                ProsType::arrow(st(), st()),
                Term::app(
                    Term::var("P", ProsType::arrow(st(), st())),
                    Term::word("everyone"),
                ),
            ),
        };
        assert!(validate_entry(&e).is_ok());

        let e = LexEntry {
            word: "sleeps".into(),
            formula: Formula::parse("np -o s").unwrap(),
            term: Term::abs(
                "z",
                st(),
                Term::plus(Term::var("z", st()), Term::word("sleeps")),
            ),
        };
        assert!(validate_entry(&e).is_ok());

        // sleeps |-> np -o s, \z.(z + z): missing word occurrence (and non-linear)
        let e = LexEntry {
            word: "sleeps".into(),
            formula: Formula::parse("np -o s").unwrap(),
            term: Term::abs(
                "z",
                st(),
                Term::plus(Term::var("z", st()), Term::var("z", st())),
            ),
        };
        let err = validate_entry(&e).unwrap_err();
        assert!(matches!(
            err,
            LexiconError::NonLinear { .. } | LexiconError::WordOccurrence { .. }
        ));
    }

    #[test]
    fn default_term_is_the_bare_word() {
        let lex = Lexicon::parse_str("loves : (np\\s)/np\n", LexOptions::default()).unwrap();
        let e = &lex.entries("loves")[0];
        assert_eq!(e.term, Term::word("loves"));
        assert_eq!(e.term.ty().unwrap(), st());
    }

    #[test]
    fn schema_lines_must_be_instantiated() {
        let err = Lexicon::parse_str("and2 : (X\\X)/X\n", LexOptions::default()).unwrap_err();
        let LexiconError::AtLine { err, .. } = err else {
            panic!("expected line error")
        };
        assert!(matches!(*err, LexiconError::SchemaInEntry(_)));
    }

    #[test]
    fn coordination_entry_loads() {
        let src = "and : (np -o s) -o ((np -o s) -o (np -o s)) := \\Q.\\P.\\y.((P eps) + and + (Q y))\n";
        let lex = Lexicon::parse_str(src, LexOptions::default()).unwrap();
        let e = &lex.entries("and")[0];
        assert!(validate_entry(e).is_ok());
        assert_eq!(e.term.word_count("and"), 1);
    }

    #[test]
    fn instantiate_directive() {
        let src = "\
@schema and : (X\\X)/X
@instantiate and AT s/np
";
        let lex = Lexicon::parse_str(src, LexOptions::default()).unwrap();
        let e = &lex.entries("and")[0];
        assert_eq!(e.formula, Formula::parse("((s/np)\\(s/np))/(s/np)").unwrap());
        assert_eq!(e.term, Term::word("and"));
    }

    #[test]
    fn duplicate_lines_create_ambiguity() {
        let src = "bank : np\nbank : np/np\n@atoms np\n";
        let lex = Lexicon::parse_str(src, LexOptions::default()).unwrap();
        assert_eq!(lex.entries("bank").len(), 2);
    }

    #[test]
    fn undeclared_atom_rejected() {
        let err = Lexicon::parse_str("dog : zq\n", LexOptions::default()).unwrap_err();
        let LexiconError::AtLine { err, .. } = err else {
            panic!()
        };
        assert!(matches!(*err, LexiconError::UndeclaredAtom(_)));
    }

    #[test]
    fn eps_only_in_lexical_terms_is_loadable() {
        let src = "also : (np -o s) -o (np -o s) := \\P.\\x.((P eps) + also + x)\n";
        let lex = Lexicon::parse_str(src, LexOptions::default()).unwrap();
        assert!(lex.entries("also")[0].term.contains_eps());
    }

    #[test]
    fn lax_pros_skips_type_match_only() {
        // term st -> st against formula np: rejected normally...
        let src = "odd : np := \\x.(x + odd)\n";
        assert!(Lexicon::parse_str(src, LexOptions::default()).is_err());
        // ...accepted with lax_pros
        let lex = Lexicon::parse_str(src, LexOptions { lax_pros: true }).unwrap();
        assert_eq!(lex.entries("odd").len(), 1);
        // but non-linear terms are still rejected
        let bad = "odd : np := \\x.(x + x + odd)\n";
        assert!(Lexicon::parse_str(bad, LexOptions { lax_pros: true }).is_err());
    }
}
