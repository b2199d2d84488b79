//! The formula language and its translation to prosodic types.
//!
//! Directional implications `/` and `\` are restricted to Lambek-only
//! subformulas; the linear implication `-o` may combine any two formulas.
//! Concrete syntax: atoms are lowercase identifiers, `/` and `\` are
//! non-associative (nesting needs parentheses), `-o` is right associative.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::term::ProsType;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("ill-formed formula: {0} may not occur under a directional implication")]
    WellFormedness(String),
}

/// Hypothesis side vs conclusion side; flips on the argument of every
/// implication during unfolding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// `Over(b, a)` is `b/a` (result `b`, argument `a` to the right);
/// `Under(a, b)` is `a\b` (argument `a` to the left, result `b`);
/// `Limp(a, b)` is `a -o b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Over(Box<Formula>, Box<Formula>),
    Under(Box<Formula>, Box<Formula>),
    Limp(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    /// `result / arg`; both sides must be Lambek-only.
    pub fn over(result: Formula, arg: Formula) -> Result<Formula, FormulaError> {
        if !result.is_lambek() {
            return Err(FormulaError::WellFormedness(result.to_string()));
        }
        if !arg.is_lambek() {
            return Err(FormulaError::WellFormedness(arg.to_string()));
        }
        Ok(Formula::Over(Box::new(result), Box::new(arg)))
    }

    /// `arg \ result`; both sides must be Lambek-only.
    pub fn under(arg: Formula, result: Formula) -> Result<Formula, FormulaError> {
        if !arg.is_lambek() {
            return Err(FormulaError::WellFormedness(arg.to_string()));
        }
        if !result.is_lambek() {
            return Err(FormulaError::WellFormedness(result.to_string()));
        }
        Ok(Formula::Under(Box::new(arg), Box::new(result)))
    }

    pub fn limp(arg: Formula, result: Formula) -> Formula {
        Formula::Limp(Box::new(arg), Box::new(result))
    }

    /// True iff the formula contains no linear implication.
    pub fn is_lambek(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Over(a, b) | Formula::Under(a, b) => a.is_lambek() && b.is_lambek(),
            Formula::Limp(..) => false,
        }
    }

    /// Prosodic type: Lambek formulas are strings, the linear implication
    /// becomes an arrow.
    pub fn pros(&self) -> ProsType {
        match self {
            Formula::Atom(_) | Formula::Over(..) | Formula::Under(..) => ProsType::St,
            Formula::Limp(a, b) => ProsType::arrow(a.pros(), b.pros()),
        }
    }

    /// Tree height, atoms at height 1.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Over(a, b) | Formula::Under(a, b) | Formula::Limp(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn connective_count(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Over(a, b) | Formula::Under(a, b) | Formula::Limp(a, b) => {
                1 + a.connective_count() + b.connective_count()
            }
        }
    }

    /// The subformula closure, including the formula itself.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        fn go(f: &Formula, out: &mut BTreeSet<Formula>) {
            out.insert(f.clone());
            match f {
                Formula::Atom(_) => {}
                Formula::Over(a, b) | Formula::Under(a, b) | Formula::Limp(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        fn go(f: &Formula, out: &mut BTreeSet<String>) {
            match f {
                Formula::Atom(a) => {
                    out.insert(a.clone());
                }
                Formula::Over(a, b) | Formula::Under(a, b) | Formula::Limp(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    /// Count signed atom occurrences: result positions keep the polarity,
    /// argument positions flip it.
    pub fn atom_polarities(&self, pol: Polarity, acc: &mut std::collections::BTreeMap<(String, Polarity), usize>) {
        match self {
            Formula::Atom(a) => {
                *acc.entry((a.clone(), pol)).or_insert(0) += 1;
            }
            Formula::Over(res, arg) => {
                res.atom_polarities(pol, acc);
                arg.atom_polarities(pol.flip(), acc);
            }
            Formula::Under(arg, res) | Formula::Limp(arg, res) => {
                arg.atom_polarities(pol.flip(), acc);
                res.atom_polarities(pol, acc);
            }
        }
    }

    /// Substitute a schema variable (an uppercase atom) by a formula.
    /// Fails when the result puts a linear implication under `/` or `\`.
    pub fn instantiate(&self, var: &str, at: &Formula) -> Result<Formula, FormulaError> {
        match self {
            Formula::Atom(a) if a == var => Ok(at.clone()),
            Formula::Atom(_) => Ok(self.clone()),
            Formula::Over(a, b) => Formula::over(a.instantiate(var, at)?, b.instantiate(var, at)?),
            Formula::Under(a, b) => {
                Formula::under(a.instantiate(var, at)?, b.instantiate(var, at)?)
            }
            Formula::Limp(a, b) => Ok(Formula::limp(
                a.instantiate(var, at)?,
                b.instantiate(var, at)?,
            )),
        }
    }

    /// Schema variables: atoms spelled with a leading uppercase letter.
    pub fn schema_vars(&self) -> BTreeSet<String> {
        self.atoms()
            .into_iter()
            .filter(|a| a.chars().next().is_some_and(|c| c.is_ascii_uppercase()))
            .collect()
    }

    pub fn parse(input: &str) -> Result<Formula, FormulaError> {
        parse_formula(input)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn slash_operand(x: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match x {
                Formula::Atom(a) => write!(f, "{a}"),
                _ => write!(f, "({x})"),
            }
        }
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Over(res, arg) => {
                slash_operand(res, f)?;
                write!(f, "/")?;
                slash_operand(arg, f)
            }
            Formula::Under(arg, res) => {
                slash_operand(arg, f)?;
                write!(f, "\\")?;
                slash_operand(res, f)
            }
            Formula::Limp(a, b) => {
                match a.as_ref() {
                    Formula::Atom(x) => write!(f, "{x}")?,
                    other => write!(f, "({other})")?,
                }
                write!(f, " -o ")?;
                match b.as_ref() {
                    Formula::Atom(x) => write!(f, "{x}"),
                    Formula::Limp(..) => write!(f, "{b}"),
                    other => write!(f, "({other})"),
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Over,
    Under,
    Limp,
    LParen,
    RParen,
}

fn tokenize(input: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '/' => {
                out.push((i, Tok::Over));
                i += 1;
            }
            '\\' => {
                out.push((i, Tok::Under));
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
            '-' => {
                if bytes.get(i + 1) == Some(&b'o') {
                    out.push((i, Tok::Limp));
                    i += 2;
                } else {
                    return Err(FormulaError::Syntax {
                        pos: i,
                        msg: "expected -o".into(),
                    });
                }
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
                out.push((start, Tok::Ident(input[start..i].to_string())));
            }
            other => {
                return Err(FormulaError::Syntax {
                    pos: i,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
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

    // formula := slashes ('-o' formula)?
    fn formula(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.slashes()?;
        if matches!(self.peek(), Some(Tok::Limp)) {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::limp(lhs, rhs));
        }
        Ok(lhs)
    }

    // slashes := atomic (('/'|'\') atomic)?   -- non-associative
    fn slashes(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.atomic()?;
        match self.peek() {
            Some(Tok::Over) => {
                self.bump();
                let rhs = self.atomic()?;
                let out = Formula::over(lhs, rhs)?;
                self.no_more_slashes()?;
                Ok(out)
            }
            Some(Tok::Under) => {
                self.bump();
                let rhs = self.atomic()?;
                let out = Formula::under(lhs, rhs)?;
                self.no_more_slashes()?;
                Ok(out)
            }
            _ => Ok(lhs),
        }
    }

    fn no_more_slashes(&mut self) -> Result<(), FormulaError> {
        if matches!(self.peek(), Some(Tok::Over | Tok::Under)) {
            return Err(FormulaError::Syntax {
                pos: self.here(),
                msg: "directional implications are non-associative; add parentheses".into(),
            });
        }
        Ok(())
    }

    fn atomic(&mut self) -> Result<Formula, FormulaError> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Ident(a)) => Ok(Formula::Atom(a)),
            Some(Tok::LParen) => {
                let f = self.formula()?;
                let pos = self.here();
                match self.bump() {
                    Some(Tok::RParen) => Ok(f),
                    _ => Err(FormulaError::Syntax {
                        pos,
                        msg: "expected ')'".into(),
                    }),
                }
            }
            _ => Err(FormulaError::Syntax {
                pos,
                msg: "expected a formula".into(),
            }),
        }
    }
}

pub fn parse_formula(input: &str) -> Result<Formula, FormulaError> {
    let toks = tokenize(input)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: input.len(),
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return Err(FormulaError::Syntax {
            pos: p.here(),
            msg: "trailing input".into(),
        });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn np() -> Formula {
        Formula::atom("np")
    }

    fn s() -> Formula {
        Formula::atom("s")
    }

    #[test]
    fn pros_spec_examples() {
        let f = Formula::parse("(np\\s)/np").unwrap();
        assert_eq!(f.pros(), ProsType::St);
        let f = Formula::parse("(np -o s) -o s").unwrap();
        assert_eq!(
            f.pros(),
            ProsType::arrow(ProsType::arrow(ProsType::St, ProsType::St), ProsType::St)
        );
        assert_eq!(np().pros(), ProsType::St);
    }

    #[test]
    fn is_lambek_spec_examples() {
        assert!(Formula::parse("((np\\s)/np)/np").unwrap().is_lambek());
        assert!(!Formula::parse("np -o (np -o s)").unwrap().is_lambek());
        assert!(s().is_lambek());
    }

    #[test]
    fn pros_is_st_iff_lambek() {
        let fs = [
            "np",
            "(np\\s)/np",
            "np -o s",
            "(np -o s) -o s",
            "s/(np\\s)",
            "np -o (s/np)",
        ];
        for f in fs {
            let f = Formula::parse(f).unwrap();
            assert_eq!(f.pros() == ProsType::St, f.is_lambek(), "{f}");
        }
    }

    #[test]
    fn parse_spec_examples() {
        assert_eq!(
            Formula::parse("(np\\s)/np").unwrap(),
            Formula::Over(
                Box::new(Formula::Under(Box::new(np()), Box::new(s()))),
                Box::new(np())
            )
        );
        assert_eq!(
            Formula::parse("np -o s").unwrap(),
            Formula::limp(np(), s())
        );
        assert!(matches!(
            Formula::parse("(np -o s)/np"),
            Err(FormulaError::WellFormedness(_))
        ));
    }

    #[test]
    fn slashes_are_non_associative() {
        assert!(matches!(
            Formula::parse("a/b/c"),
            Err(FormulaError::Syntax { .. })
        ));
        assert!(Formula::parse("(a/b)/c").is_ok());
    }

    #[test]
    fn limp_is_right_associative() {
        let f = Formula::parse("np -o np -o s").unwrap();
        assert_eq!(f, Formula::limp(np(), Formula::limp(np(), s())));
        let g = Formula::parse("(np -o np) -o s").unwrap();
        assert_ne!(f, g);
    }

    #[test]
    fn print_parse_round_trip_exhaustive_small() {
        // all formulas of height <= 3 over two atoms
        let mut level: Vec<Vec<Formula>> = vec![vec![np(), s()]];
        for h in 1..3 {
            let prev: Vec<Formula> = level.iter().flatten().cloned().collect();
            let mut next = Vec::new();
            for a in &prev {
                for b in &prev {
                    if a.depth().max(b.depth()) != h {
                        continue;
                    }
                    if let Ok(f) = Formula::over(a.clone(), b.clone()) {
                        next.push(f);
                    }
                    if let Ok(f) = Formula::under(a.clone(), b.clone()) {
                        next.push(f);
                    }
                    next.push(Formula::limp(a.clone(), b.clone()));
                }
            }
            level.push(next);
        }
        let all: Vec<Formula> = level.into_iter().flatten().collect();
        assert!(all.len() > 350);
        for f in all {
            let back = Formula::parse(&f.to_string()).unwrap();
            assert_eq!(f, back, "round trip failed for {f}");
        }
    }

    #[test]
    fn subformula_closure_is_finite() {
        let f = Formula::parse("((np\\s)/np) -o (np -o s)").unwrap();
        let subs = f.subformulas();
        assert!(subs.contains(&np()));
        assert!(subs.contains(&f));
        assert_eq!(subs.len(), 6);
    }

    #[test]
    fn schema_instantiation() {
        let schema = Formula::Over(
            Box::new(Formula::Under(
                Box::new(Formula::atom("X")),
                Box::new(Formula::atom("X")),
            )),
            Box::new(Formula::atom("X")),
        );
        assert_eq!(schema.schema_vars().len(), 1);
        let at = Formula::parse("s/np").unwrap();
        let inst = schema.instantiate("X", &at).unwrap();
        assert_eq!(inst, Formula::parse("((s/np)\\(s/np))/(s/np)").unwrap());
        // instantiating at a linear type under a slash is rejected
        let bad = schema.instantiate("X", &Formula::parse("np -o s").unwrap());
        assert!(bad.is_err());
    }
}
