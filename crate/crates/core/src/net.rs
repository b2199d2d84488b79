//! Proof structures: tensor/par links over formula occurrences,
//! polarity-driven unfolding, axiom-link enumeration and vertex contraction.
//!
//! A proof structure is locally rule-shaped but not necessarily a proof;
//! whether it is one is decided by the contraction engine in [`crate::aps`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Formula, Polarity};
use crate::lexicon::LexEntry;

pub type VertexId = usize;
pub type LinkId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkKind {
    Tensor,
    Par,
}

/// The index names the link family: `+` for the directional implications,
/// `@` and `λ` for the linear implication, `ε` for the empty string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkIndex {
    Eps,
    Plus,
    App,
    Lambda,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub kind: LinkKind,
    pub index: LinkIndex,
    pub premisses: Vec<VertexId>,
    pub conclusions: Vec<VertexId>,
    pub main: Option<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    /// A lexical hypothesis; carries its entry and sentence position.
    Lexical { token: usize, entry: LexEntry },
    /// A logical hypothesis named by a variable.
    Hypothesis { var: String },
    /// The goal occurrence.
    Goal,
    /// Produced while unfolding.
    Internal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub formula: Formula,
    pub origin: Origin,
}

/// Classification of a formula occurrence by how many links it is the
/// main formula of: two makes a cut, none an axiomatic formula, exactly
/// one a flow formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OccurrenceClass {
    Cut,
    Axiomatic,
    Flow,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("atom {atom}: {pos} positive vs {neg} negative occurrences")]
    CountMismatch { atom: String, pos: usize, neg: usize },
    #[error("not contractible: {0}")]
    NotContractible(String),
    #[error("unknown word {0}")]
    UnknownWord(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProofStructure {
    vertices: BTreeMap<VertexId, Vertex>,
    links: BTreeMap<LinkId, Link>,
    next_vertex: usize,
    next_link: usize,
}

impl ProofStructure {
    pub fn new() -> ProofStructure {
        ProofStructure::default()
    }

    pub fn add_vertex(&mut self, formula: Formula, origin: Origin) -> VertexId {
        let id = self.next_vertex;
        self.next_vertex += 1;
        self.vertices.insert(id, Vertex { formula, origin });
        id
    }

    pub fn add_link(&mut self, link: Link) -> LinkId {
        let id = self.next_link;
        self.next_link += 1;
        self.links.insert(id, link);
        id
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[&v]
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &Vertex)> {
        self.vertices.iter().map(|(id, v)| (*id, v))
    }

    pub fn links(&self) -> impl Iterator<Item = (LinkId, &Link)> {
        self.links.iter().map(|(id, l)| (*id, l))
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[&id]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// The link of which `v` is a premiss, if any (at most one).
    pub fn link_below(&self, v: VertexId) -> Option<LinkId> {
        self.links
            .iter()
            .find(|(_, l)| l.premisses.contains(&v))
            .map(|(id, _)| *id)
    }

    /// The link of which `v` is a conclusion, if any (at most one).
    pub fn link_above(&self, v: VertexId) -> Option<LinkId> {
        self.links
            .iter()
            .find(|(_, l)| l.conclusions.contains(&v))
            .map(|(id, _)| *id)
    }

    /// Hypotheses: vertices that are not the conclusion of any link.
    pub fn hypotheses(&self) -> Vec<VertexId> {
        self.vertices
            .keys()
            .copied()
            .filter(|v| self.link_above(*v).is_none())
            .collect()
    }

    /// Conclusions: vertices that are not the premiss of any link.
    pub fn conclusions(&self) -> Vec<VertexId> {
        self.vertices
            .keys()
            .copied()
            .filter(|v| self.link_below(*v).is_none())
            .collect()
    }

    pub fn is_lexical(&self, v: VertexId) -> bool {
        matches!(self.vertex(v).origin, Origin::Lexical { .. })
    }

    pub fn classify(&self, v: VertexId) -> OccurrenceClass {
        let mains = self.links.values().filter(|l| l.main == Some(v)).count();
        match mains {
            0 => OccurrenceClass::Axiomatic,
            1 => OccurrenceClass::Flow,
            _ => OccurrenceClass::Cut,
        }
    }

    /// Check the two proof-structure invariants.
    pub fn well_formed(&self) -> Result<(), NetError> {
        for v in self.vertices.keys() {
            let prem = self
                .links
                .values()
                .filter(|l| l.premisses.contains(v))
                .count();
            let conc = self
                .links
                .values()
                .filter(|l| l.conclusions.contains(v))
                .count();
            if prem > 1 {
                return Err(NetError::NotContractible(format!(
                    "vertex {v} is the premiss of {prem} links"
                )));
            }
            if conc > 1 {
                return Err(NetError::NotContractible(format!(
                    "vertex {v} is the conclusion of {conc} links"
                )));
            }
        }
        Ok(())
    }

    /// Identify a logical hypothesis `x` with a conclusion `y` carrying the
    /// same formula. The merged vertex keeps `y`'s id, `y`'s conclusion role
    /// and `x`'s premiss role.
    pub fn contract_vertices(&mut self, x: VertexId, y: VertexId) -> Result<VertexId, NetError> {
        if x == y {
            return Err(NetError::NotContractible(
                "a vertex cannot be identified with itself".into(),
            ));
        }
        if self.is_lexical(x) {
            return Err(NetError::NotContractible(
                "identification applies to logical hypotheses only".into(),
            ));
        }
        if self.link_above(x).is_some() {
            return Err(NetError::NotContractible(format!(
                "vertex {x} is not a hypothesis"
            )));
        }
        if self.link_below(y).is_some() {
            return Err(NetError::NotContractible(format!(
                "vertex {y} is not a conclusion"
            )));
        }
        let fx = &self.vertex(x).formula;
        let fy = &self.vertex(y).formula;
        if fx != fy {
            return Err(NetError::NotContractible(format!(
                "formula mismatch: {fx} vs {fy}"
            )));
        }
        // y keeps its origin unless x was the goal or a named hypothesis and
        // y is internal.
        let xo = self.vertices[&x].origin.clone();
        let keep_x_origin = matches!(xo, Origin::Hypothesis { .. } | Origin::Goal)
            && matches!(self.vertices[&y].origin, Origin::Internal);
        for l in self.links.values_mut() {
            for p in &mut l.premisses {
                if *p == x {
                    *p = y;
                }
            }
            if l.main == Some(x) {
                l.main = Some(y);
            }
        }
        self.vertices.remove(&x);
        if keep_x_origin {
            self.vertices.get_mut(&y).unwrap().origin = xo;
        }
        Ok(y)
    }

    /// Unfold a formula occurrence of the given polarity into links, placing
    /// the formula itself at a fresh vertex. Returns the root vertex.
    pub fn unfold(&mut self, f: &Formula, pol: Polarity, origin: Origin) -> VertexId {
        let root = self.add_vertex(f.clone(), origin);
        self.unfold_at(root, pol);
        root
    }

    fn unfold_at(&mut self, v: VertexId, pol: Polarity) {
        let formula = self.vertex(v).formula.clone();
        match (&formula, pol) {
            (Formula::Atom(_), _) => {}
            // positive C/B: tensor with premisses [C/B, B-], conclusion C+
            (Formula::Over(c, b), Polarity::Positive) => {
                let bv = self.add_vertex((**b).clone(), Origin::Internal);
                let cv = self.add_vertex((**c).clone(), Origin::Internal);
                self.add_link(Link {
                    kind: LinkKind::Tensor,
                    index: LinkIndex::Plus,
                    premisses: vec![v, bv],
                    conclusions: vec![cv],
                    main: Some(v),
                });
                self.unfold_at(bv, Polarity::Negative);
                self.unfold_at(cv, Polarity::Positive);
            }
            // positive A\C: tensor with premisses [A-, A\C], conclusion C+
            (Formula::Under(a, c), Polarity::Positive) => {
                let av = self.add_vertex((**a).clone(), Origin::Internal);
                let cv = self.add_vertex((**c).clone(), Origin::Internal);
                self.add_link(Link {
                    kind: LinkKind::Tensor,
                    index: LinkIndex::Plus,
                    premisses: vec![av, v],
                    conclusions: vec![cv],
                    main: Some(v),
                });
                self.unfold_at(av, Polarity::Negative);
                self.unfold_at(cv, Polarity::Positive);
            }
            // positive B -o C: application tensor [B -o C, B-] with conclusion C+
            (Formula::Limp(b, c), Polarity::Positive) => {
                let bv = self.add_vertex((**b).clone(), Origin::Internal);
                let cv = self.add_vertex((**c).clone(), Origin::Internal);
                self.add_link(Link {
                    kind: LinkKind::Tensor,
                    index: LinkIndex::App,
                    premisses: vec![v, bv],
                    conclusions: vec![cv],
                    main: Some(v),
                });
                self.unfold_at(bv, Polarity::Negative);
                self.unfold_at(cv, Polarity::Positive);
            }
            // negative C/B: par with premiss C-, conclusions [C/B (main), B+]
            (Formula::Over(c, b), Polarity::Negative) => {
                let cv = self.add_vertex((**c).clone(), Origin::Internal);
                let bv = self.add_vertex((**b).clone(), Origin::Internal);
                self.add_link(Link {
                    kind: LinkKind::Par,
                    index: LinkIndex::Plus,
                    premisses: vec![cv],
                    conclusions: vec![v, bv],
                    main: Some(v),
                });
                self.unfold_at(cv, Polarity::Negative);
                self.unfold_at(bv, Polarity::Positive);
            }
            // negative A\C: par with premiss C-, conclusions [A+, A\C (main)]
            (Formula::Under(a, c), Polarity::Negative) => {
                let cv = self.add_vertex((**c).clone(), Origin::Internal);
                let av = self.add_vertex((**a).clone(), Origin::Internal);
                self.add_link(Link {
                    kind: LinkKind::Par,
                    index: LinkIndex::Plus,
                    premisses: vec![cv],
                    conclusions: vec![av, v],
                    main: Some(v),
                });
                self.unfold_at(cv, Polarity::Negative);
                self.unfold_at(av, Polarity::Positive);
            }
            // negative B -o C: lambda par with premiss C-,
            // conclusions [B -o C (main), B+]
            (Formula::Limp(b, c), Polarity::Negative) => {
                let cv = self.add_vertex((**c).clone(), Origin::Internal);
                let bv = self.add_vertex((**b).clone(), Origin::Internal);
                self.add_link(Link {
                    kind: LinkKind::Par,
                    index: LinkIndex::Lambda,
                    premisses: vec![cv],
                    conclusions: vec![v, bv],
                    main: Some(v),
                });
                self.unfold_at(cv, Polarity::Negative);
                self.unfold_at(bv, Polarity::Positive);
            }
        }
    }

    /// Atomic leaves with a recorded polarity.
    fn atom_leaves(&self, polarity_of: &BTreeMap<VertexId, Polarity>) -> Vec<(VertexId, Polarity)> {
        let mut out = Vec::new();
        for (id, v) in &self.vertices {
            if matches!(v.formula, Formula::Atom(_)) {
                if let Some(p) = polarity_of.get(id) {
                    out.push((*id, *p));
                }
            }
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graph proof_structure {{");
        let _ = writeln!(s, "  node [fontsize=11];");
        for (id, v) in &self.vertices {
            let label = match &v.origin {
                Origin::Lexical { entry, .. } => format!("{}\\n{}", entry.word, v.formula),
                Origin::Hypothesis { var } => format!("{}:{}", var, v.formula),
                _ => v.formula.to_string(),
            };
            let label = label.replace('\\', "\\\\");
            let _ = writeln!(s, "  v{id} [shape=plaintext, label=\"{label}\"];");
        }
        for (lid, l) in &self.links {
            let idx = match l.index {
                LinkIndex::Eps => "ε",
                LinkIndex::Plus => "+",
                LinkIndex::App => "@",
                LinkIndex::Lambda => "λ",
            };
            let style = match l.kind {
                LinkKind::Tensor => format!("shape=circle, label=\"{idx}\""),
                LinkKind::Par => format!(
                    "shape=circle, style=filled, fillcolor=black, fontcolor=white, label=\"{idx}\""
                ),
            };
            let _ = writeln!(s, "  l{lid} [{style}, width=0.3, fixedsize=true];");
            for p in &l.premisses {
                let _ = writeln!(s, "  v{p} -- l{lid};");
            }
            for c in &l.conclusions {
                if Some(*c) == l.main {
                    let _ = writeln!(s, "  l{lid} -- v{c} [dir=forward, arrowhead=normal];");
                } else {
                    let _ = writeln!(s, "  l{lid} -- v{c};");
                }
            }
        }
        let _ = writeln!(s, "}}");
        s
    }
}

/// A hypothesis for the net prover: a plain formula (logical hypothesis)
/// or a lexical entry at a sentence position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NetHyp {
    Logical { var: String, formula: Formula },
    Lexical { token: usize, entry: LexEntry },
}

impl NetHyp {
    pub fn formula(&self) -> &Formula {
        match self {
            NetHyp::Logical { formula, .. } => formula,
            NetHyp::Lexical { entry, .. } => &entry.formula,
        }
    }
}

/// The unfolded template shared by all linkings of one sequent.
#[derive(Clone, Debug)]
pub struct Unfolding {
    pub structure: ProofStructure,
    pub goal: VertexId,
    /// positive and negative atomic leaves grouped by atom name, in
    /// creation (sentence) order.
    pos: BTreeMap<String, Vec<VertexId>>,
    neg: BTreeMap<String, Vec<VertexId>>,
}

/// Unfold all hypotheses positively and the goal negatively.
pub fn unfold_sequent(hyps: &[NetHyp], goal: &Formula) -> Unfolding {
    let mut ps = ProofStructure::new();
    let mut polarity = BTreeMap::new();
    for h in hyps {
        let origin = match h {
            NetHyp::Logical { var, .. } => Origin::Hypothesis { var: var.clone() },
            NetHyp::Lexical { token, entry } => Origin::Lexical {
                token: *token,
                entry: entry.clone(),
            },
        };
        let before: BTreeSet<VertexId> = ps.vertices.keys().copied().collect();
        let root = ps.unfold(h.formula(), Polarity::Positive, origin);
        mark_polarities(&ps, &before, root, Polarity::Positive, &mut polarity);
    }
    let before: BTreeSet<VertexId> = ps.vertices.keys().copied().collect();
    let goal_v = ps.unfold(goal, Polarity::Negative, Origin::Goal);
    mark_polarities(&ps, &before, goal_v, Polarity::Negative, &mut polarity);

    let mut pos: BTreeMap<String, Vec<VertexId>> = BTreeMap::new();
    let mut neg: BTreeMap<String, Vec<VertexId>> = BTreeMap::new();
    for (v, p) in ps.atom_leaves(&polarity) {
        let Formula::Atom(name) = &ps.vertex(v).formula else {
            continue;
        };
        match p {
            Polarity::Positive => pos.entry(name.clone()).or_default().push(v),
            Polarity::Negative => neg.entry(name.clone()).or_default().push(v),
        }
    }
    for list in pos.values_mut().chain(neg.values_mut()) {
        list.sort_unstable();
    }
    Unfolding {
        structure: ps,
        goal: goal_v,
        pos,
        neg,
    }
}

/// Record the polarity of every vertex created by one unfold call by
/// replaying the polarity flips down from the root.
fn mark_polarities(
    ps: &ProofStructure,
    before: &BTreeSet<VertexId>,
    root: VertexId,
    pol: Polarity,
    out: &mut BTreeMap<VertexId, Polarity>,
) {
    fn go(
        ps: &ProofStructure,
        before: &BTreeSet<VertexId>,
        v: VertexId,
        pol: Polarity,
        out: &mut BTreeMap<VertexId, Polarity>,
    ) {
        out.insert(v, pol);
        let f = &ps.vertex(v).formula;
        if matches!(f, Formula::Atom(_)) {
            return;
        }
        let Some((_, link)) = ps.links().find(|(_, l)| l.main == Some(v)) else {
            return;
        };
        match pol {
            Polarity::Positive => {
                // tensor: the other premiss is the flipped argument, the
                // conclusion keeps the polarity
                for p in &link.premisses {
                    if *p != v && !before.contains(p) {
                        go(ps, before, *p, pol.flip(), out);
                    }
                }
                for c in &link.conclusions {
                    if !before.contains(c) {
                        go(ps, before, *c, pol, out);
                    }
                }
            }
            Polarity::Negative => {
                // par: premiss keeps the polarity, the other conclusion flips
                for p in &link.premisses {
                    if !before.contains(p) {
                        go(ps, before, *p, pol, out);
                    }
                }
                for c in &link.conclusions {
                    if *c != v && !before.contains(c) {
                        go(ps, before, *c, pol.flip(), out);
                    }
                }
            }
        }
    }
    go(ps, before, root, pol, out);
}

/// Iterator over all axiom linkings: every bijection between positive and
/// negative occurrences of each atom, realized by vertex contraction.
#[derive(Debug)]
pub struct Linkings {
    template: ProofStructure,
    /// per atom: (negative leaves, permutations of positive leaves)
    perms: Vec<(Vec<VertexId>, Vec<Vec<VertexId>>)>,
    counter: Vec<usize>,
    done: bool,
}

impl Linkings {
    pub fn total(&self) -> usize {
        self.perms.iter().map(|(_, p)| p.len()).product()
    }

    pub fn template(&self) -> &ProofStructure {
        &self.template
    }
}

pub fn enumerate_linkings(hyps: &[NetHyp], goal: &Formula) -> Result<Linkings, NetError> {
    let unfolding = unfold_sequent(hyps, goal);
    let mut atoms: BTreeSet<String> = unfolding.pos.keys().cloned().collect();
    atoms.extend(unfolding.neg.keys().cloned());
    let mut perms = Vec::new();
    for atom in atoms {
        let pos = unfolding.pos.get(&atom).cloned().unwrap_or_default();
        let neg = unfolding.neg.get(&atom).cloned().unwrap_or_default();
        if pos.len() != neg.len() {
            return Err(NetError::CountMismatch {
                atom,
                pos: pos.len(),
                neg: neg.len(),
            });
        }
        perms.push((neg, permutations(&pos)));
    }
    Ok(Linkings {
        template: unfolding.structure,
        counter: vec![0; perms.len()],
        perms,
        done: false,
    })
}

fn permutations(items: &[VertexId]) -> Vec<Vec<VertexId>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut items = items.to_vec();
    permute(&mut items, 0, &mut out);
    out.sort();
    out
}

fn permute(items: &mut Vec<VertexId>, k: usize, out: &mut Vec<Vec<VertexId>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

impl Iterator for Linkings {
    type Item = ProofStructure;

    fn next(&mut self) -> Option<ProofStructure> {
        if self.done {
            return None;
        }
        let mut ps = self.template.clone();
        for (i, (neg, perms)) in self.perms.iter().enumerate() {
            let pos = &perms[self.counter[i]];
            for (n, p) in neg.iter().zip(pos.iter()) {
                // the negative occurrence is the hypothesis side, the
                // positive one the conclusion side
                ps.contract_vertices(*n, *p)
                    .expect("matched atom occurrences are contractible");
            }
        }
        // odometer
        let mut i = 0;
        loop {
            if i == self.counter.len() {
                self.done = true;
                break;
            }
            self.counter[i] += 1;
            if self.counter[i] < self.perms[i].1.len() {
                break;
            }
            self.counter[i] = 0;
            i += 1;
        }
        Some(ps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{LexOptions, Lexicon};

    fn demo_lexicon() -> Lexicon {
        Lexicon::parse_str(
            "everyone : (np -o s) -o s := \\P.(P everyone)\n\
             sleeps : np -o s := \\z.(z + sleeps)\n",
            LexOptions::default(),
        )
        .unwrap()
    }

    fn lex_hyp(lex: &Lexicon, word: &str, token: usize) -> NetHyp {
        NetHyp::Lexical {
            token,
            entry: lex.entries(word)[0].clone(),
        }
    }

    #[test]
    fn unfold_quantifier_fragment() {
        // (np -o s) -o s positively: an application tensor below a lambda par
        let mut ps = ProofStructure::new();
        let f = Formula::parse("(np -o s) -o s").unwrap();
        ps.unfold(&f, Polarity::Positive, Origin::Goal);
        let tensors: Vec<_> = ps
            .links()
            .filter(|(_, l)| l.kind == LinkKind::Tensor)
            .collect();
        let pars: Vec<_> = ps.links().filter(|(_, l)| l.kind == LinkKind::Par).collect();
        assert_eq!(tensors.len(), 1);
        assert_eq!(pars.len(), 1);
        assert_eq!(tensors[0].1.index, LinkIndex::App);
        assert_eq!(pars[0].1.index, LinkIndex::Lambda);
        // the par's main is the np -o s vertex, which is also the tensor's
        // right premiss
        let main = pars[0].1.main.unwrap();
        assert!(tensors[0].1.premisses.contains(&main));
        assert_eq!(ps.vertex(main).formula, Formula::parse("np -o s").unwrap());
    }

    #[test]
    fn unfold_negative_atom_is_a_leaf() {
        let mut ps = ProofStructure::new();
        ps.unfold(&Formula::atom("np"), Polarity::Negative, Origin::Goal);
        assert_eq!(ps.vertex_count(), 1);
        assert_eq!(ps.link_count(), 0);
    }

    #[test]
    fn unfold_transitive_verb() {
        // (np\s)/np positively: two + tensors, leaves np-, np-, s+
        let mut ps = ProofStructure::new();
        let f = Formula::parse("(np\\s)/np").unwrap();
        ps.unfold(&f, Polarity::Positive, Origin::Goal);
        assert_eq!(ps.link_count(), 2);
        let atoms: Vec<_> = ps
            .vertices()
            .filter(|(_, v)| matches!(v.formula, Formula::Atom(_)))
            .collect();
        assert_eq!(atoms.len(), 3);
        // link count equals connective count
        assert_eq!(ps.link_count(), f.connective_count());
    }

    #[test]
    fn linking_counts() {
        let lex = demo_lexicon();
        let hyps = vec![lex_hyp(&lex, "everyone", 0), lex_hyp(&lex, "sleeps", 1)];
        let goal = Formula::atom("s");
        let linkings = enumerate_linkings(&hyps, &goal).unwrap();
        assert_eq!(linkings.total(), 2);
        assert_eq!(linkings.count(), 2);

        let hyps = vec![NetHyp::Logical {
            var: "x".into(),
            formula: Formula::atom("np"),
        }];
        let linkings = enumerate_linkings(&hyps, &Formula::atom("np")).unwrap();
        assert_eq!(linkings.total(), 1);

        let hyps = vec![NetHyp::Logical {
            var: "x".into(),
            formula: Formula::atom("np"),
        }];
        let err = enumerate_linkings(&hyps, &Formula::atom("s")).unwrap_err();
        assert!(matches!(err, NetError::CountMismatch { .. }));
    }

    #[test]
    fn linkings_have_input_hypotheses_and_goal_conclusion() {
        let lex = demo_lexicon();
        let hyps = vec![lex_hyp(&lex, "everyone", 0), lex_hyp(&lex, "sleeps", 1)];
        let goal = Formula::atom("s");
        for ps in enumerate_linkings(&hyps, &goal).unwrap() {
            ps.well_formed().unwrap();
            let hs = ps.hypotheses();
            let lexical: Vec<_> = hs.iter().filter(|v| ps.is_lexical(**v)).collect();
            assert_eq!(lexical.len(), 2);
            // after full linking the only conclusion left is the goal side
            assert_eq!(ps.conclusions().len(), 1);
        }
    }

    #[test]
    fn classification_spec_examples() {
        let lex = demo_lexicon();
        let hyps = vec![lex_hyp(&lex, "everyone", 0), lex_hyp(&lex, "sleeps", 1)];
        let goal = Formula::atom("s");
        let unfolding = unfold_sequent(&hyps, &goal);
        let ps = &unfolding.structure;
        for (v, data) in ps.vertices() {
            match data.formula {
                Formula::Atom(_) => assert_eq!(ps.classify(v), OccurrenceClass::Axiomatic),
                _ => assert_eq!(ps.classify(v), OccurrenceClass::Flow),
            }
        }
    }

    #[test]
    fn contraction_restrictions() {
        let lex = demo_lexicon();
        let hyps = vec![lex_hyp(&lex, "everyone", 0), lex_hyp(&lex, "sleeps", 1)];
        let goal = Formula::atom("s");
        let unfolding = unfold_sequent(&hyps, &goal);
        let mut ps = unfolding.structure.clone();
        // lexical hypotheses are not contractible
        let lexical = ps
            .vertices()
            .find(|(_, v)| matches!(v.origin, Origin::Lexical { .. }))
            .map(|(id, _)| id)
            .unwrap();
        let concl = ps.conclusions()[0];
        assert!(matches!(
            ps.contract_vertices(lexical, concl),
            Err(NetError::NotContractible(_))
        ));
        let hyp = unfolding.goal;
        assert!(matches!(
            ps.contract_vertices(hyp, hyp),
            Err(NetError::NotContractible(_))
        ));
    }

    #[test]
    fn linking_count_is_product_of_factorials() {
        let lex = Lexicon::parse_str("loves : (np\\s)/np\n", LexOptions::default()).unwrap();
        let hyps = vec![
            NetHyp::Logical {
                var: "x".into(),
                formula: Formula::atom("np"),
            },
            lex_hyp(&lex, "loves", 1),
            NetHyp::Logical {
                var: "y".into(),
                formula: Formula::atom("np"),
            },
        ];
        let linkings = enumerate_linkings(&hyps, &Formula::atom("s")).unwrap();
        // np: 2 positive, 2 negative; s: 1/1 => 2! * 1! = 2
        assert_eq!(linkings.total(), 2);
    }
}
