//! Abstract proof structures and the contraction engine.
//!
//! An abstract proof structure forgets internal formula labels and replaces
//! every lexical hypothesis by the term graph of its lexical lambda term;
//! what remains is a hypergraph of `+`, `@`, `λ` and `ε` links plus the
//! three labeling functions (words on lexical hypotheses, formulas on
//! logical hypotheses and on conclusions).
//!
//! The engine rewrites such graphs with the structural rules (beta, eta,
//! empty-string elimination, associative flattening) and the logical
//! contractions for the three implications. A proof structure is a proof
//! net precisely when this process ends in a lambda graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::net::{Link, LinkId, LinkIndex, LinkKind, NetError, Origin, ProofStructure, VertexId};
use crate::term::{elaborate, ProsType, RawTerm, Term, TermError};

/// Structural regime for `+`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// n-ary `+` links, flattened by the associativity rule; `ε` is the
    /// zero-premiss `+` link. The default.
    #[default]
    Associative,
    /// binary `+` links and explicit `ε` links with left/right elimination.
    NonAssociative,
}

/// Hypothesis labels: the word function and the formula function of an
/// abstract proof structure, with enough typing to read terms back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HypLabel {
    Word {
        word: String,
        token: usize,
    },
    Var {
        name: String,
        ty: ProsType,
        formula: Option<Formula>,
    },
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ApsError {
    #[error("rewrite site does not match {0}")]
    SiteMismatch(String),
    #[error("not a lambda graph: {0}")]
    NotALambdaGraph(String),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewriteRule {
    Beta,
    Eta,
    EpsL,
    EpsR,
    Assoc,
    OverI,
    UnderI,
    LimpI,
}

/// One applied rewrite, identified by the links it consumed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteStep {
    pub rule: RewriteRule,
    pub links: Vec<LinkId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionStats {
    pub steps: usize,
    pub initial_vertices: usize,
    pub initial_links: usize,
}

impl ContractionStats {
    pub fn initial_size(&self) -> usize {
        self.initial_vertices + self.initial_links
    }
}

/// Why a par link could not be contracted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StuckPar {
    pub link: LinkId,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionFailure {
    pub stuck: Vec<StuckPar>,
    pub aps: Aps,
}

pub type ContractionResult = Result<LambdaGraph, Box<ContractionFailure>>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Aps {
    vertices: BTreeSet<VertexId>,
    links: BTreeMap<LinkId, Link>,
    labels: BTreeMap<VertexId, HypLabel>,
    con: BTreeMap<VertexId, Formula>,
    /// binder types for the variable conclusion of `λ` links
    var_ty: BTreeMap<VertexId, ProsType>,
    next_vertex: usize,
    next_link: usize,
}

impl Aps {
    pub fn new() -> Aps {
        Aps::default()
    }

    pub fn add_vertex(&mut self) -> VertexId {
        let id = self.next_vertex;
        self.next_vertex += 1;
        self.vertices.insert(id);
        id
    }

    pub fn add_link(&mut self, link: Link) -> LinkId {
        let id = self.next_link;
        self.next_link += 1;
        self.links.insert(id, link);
        id
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn size(&self) -> usize {
        self.vertices.len() + self.links.len()
    }

    pub fn links(&self) -> impl Iterator<Item = (LinkId, &Link)> {
        self.links.iter().map(|(id, l)| (*id, l))
    }

    pub fn get_link(&self, id: LinkId) -> Option<&Link> {
        self.links.get(&id)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn label(&self, v: VertexId) -> Option<&HypLabel> {
        self.labels.get(&v)
    }

    pub fn labels(&self) -> impl Iterator<Item = (VertexId, &HypLabel)> {
        self.labels.iter().map(|(v, l)| (*v, l))
    }

    pub fn conclusion_formula(&self, v: VertexId) -> Option<&Formula> {
        self.con.get(&v)
    }

    pub fn set_label(&mut self, v: VertexId, label: HypLabel) {
        self.labels.insert(v, label);
    }

    pub fn set_conclusion(&mut self, v: VertexId, f: Formula) {
        self.con.insert(v, f);
    }

    pub fn set_var_ty(&mut self, v: VertexId, ty: ProsType) {
        self.var_ty.insert(v, ty);
    }

    pub fn link_above(&self, v: VertexId) -> Option<LinkId> {
        self.links
            .iter()
            .find(|(_, l)| l.conclusions.contains(&v))
            .map(|(id, _)| *id)
    }

    pub fn link_below(&self, v: VertexId) -> Option<LinkId> {
        self.links
            .iter()
            .find(|(_, l)| l.premisses.contains(&v))
            .map(|(id, _)| *id)
    }

    /// Hypothesis vertices: not the conclusion of any link.
    pub fn hypotheses(&self) -> Vec<VertexId> {
        self.vertices
            .iter()
            .copied()
            .filter(|v| self.link_above(*v).is_none())
            .collect()
    }

    /// Conclusion vertices: not the premiss of any link.
    pub fn conclusions(&self) -> Vec<VertexId> {
        self.vertices
            .iter()
            .copied()
            .filter(|v| self.link_below(*v).is_none())
            .collect()
    }

    fn remove_link(&mut self, id: LinkId) {
        self.links.remove(&id);
    }

    fn remove_vertex(&mut self, v: VertexId) {
        self.vertices.remove(&v);
        self.labels.remove(&v);
        self.con.remove(&v);
        self.var_ty.remove(&v);
    }

    /// Merge `gone` into `keep`: all link references move, labels are
    /// unioned (each role can be present on at most one side).
    fn merge(&mut self, keep: VertexId, gone: VertexId) {
        if keep == gone {
            return;
        }
        for l in self.links.values_mut() {
            for p in &mut l.premisses {
                if *p == gone {
                    *p = keep;
                }
            }
            for c in &mut l.conclusions {
                if *c == gone {
                    *c = keep;
                }
            }
            if l.main == Some(gone) {
                l.main = Some(keep);
            }
        }
        if let Some(lbl) = self.labels.remove(&gone) {
            self.labels.entry(keep).or_insert(lbl);
        }
        if let Some(f) = self.con.remove(&gone) {
            self.con.entry(keep).or_insert(f);
        }
        if let Some(t) = self.var_ty.remove(&gone) {
            self.var_ty.entry(keep).or_insert(t);
        }
        self.vertices.remove(&gone);
    }

    // -- construction -------------------------------------------------------

    /// Build the term graph of a linear lambda term inside this structure.
    /// Returns the root (conclusion) vertex; free variable and word
    /// occurrences are reported through the out-parameters.
    pub fn insert_term(
        &mut self,
        t: &Term,
        mode: Mode,
        free: &mut Vec<(String, VertexId)>,
        words: &mut Vec<(String, VertexId)>,
        bound: &mut Vec<(String, VertexId)>,
    ) -> VertexId {
        match t {
            Term::Var(x, _) => {
                if let Some((_, v)) = bound.iter().rev().find(|(b, _)| b == x) {
                    *v
                } else {
                    let v = self.add_vertex();
                    free.push((x.clone(), v));
                    v
                }
            }
            Term::Word(w) => {
                let v = self.add_vertex();
                words.push((w.clone(), v));
                v
            }
            Term::Eps => {
                let v = self.add_vertex();
                let index = match mode {
                    Mode::Associative => LinkIndex::Plus,
                    Mode::NonAssociative => LinkIndex::Eps,
                };
                self.add_link(Link {
                    kind: LinkKind::Tensor,
                    index,
                    premisses: vec![],
                    conclusions: vec![v],
                    main: None,
                });
                v
            }
            Term::Plus(l, r) => {
                let lv = self.insert_term(l, mode, free, words, bound);
                let rv = self.insert_term(r, mode, free, words, bound);
                let v = self.add_vertex();
                self.add_link(Link {
                    kind: LinkKind::Tensor,
                    index: LinkIndex::Plus,
                    premisses: vec![lv, rv],
                    conclusions: vec![v],
                    main: None,
                });
                v
            }
            Term::App(fun, arg) => {
                let fv = self.insert_term(fun, mode, free, words, bound);
                let av = self.insert_term(arg, mode, free, words, bound);
                let v = self.add_vertex();
                self.add_link(Link {
                    kind: LinkKind::Tensor,
                    index: LinkIndex::App,
                    premisses: vec![fv, av],
                    conclusions: vec![v],
                    main: None,
                });
                v
            }
            Term::Abs(x, ty, body) => {
                let var = self.add_vertex();
                self.set_var_ty(var, ty.clone());
                bound.push((x.clone(), var));
                let bv = self.insert_term(body, mode, free, words, bound);
                bound.pop();
                let v = self.add_vertex();
                self.add_link(Link {
                    kind: LinkKind::Tensor,
                    index: LinkIndex::Lambda,
                    premisses: vec![bv],
                    conclusions: vec![v, var],
                    main: Some(v),
                });
                v
            }
        }
    }

    // -- rewriting ----------------------------------------------------------

    /// All sites where a given rule currently applies, ordered by link id.
    pub fn find_sites(&self, rule: RewriteRule, mode: Mode) -> Vec<RewriteStep> {
        let mut out = Vec::new();
        match rule {
            RewriteRule::Beta => {
                for (aid, app) in &self.links {
                    if app.kind != LinkKind::Tensor || app.index != LinkIndex::App {
                        continue;
                    }
                    let shared = app.premisses[0];
                    if let Some((lid, _)) = self.links.iter().find(|(_, l)| {
                        l.kind == LinkKind::Tensor
                            && l.index == LinkIndex::Lambda
                            && l.conclusions.first() == Some(&shared)
                    }) {
                        out.push(RewriteStep {
                            rule,
                            links: vec![*lid, *aid],
                        });
                    }
                }
            }
            RewriteRule::Eta => {
                for (lid, lam) in &self.links {
                    if lam.kind != LinkKind::Tensor || lam.index != LinkIndex::Lambda {
                        continue;
                    }
                    let mid = lam.premisses[0];
                    let var = lam.conclusions[1];
                    if let Some((aid, _)) = self.links.iter().find(|(_, l)| {
                        l.kind == LinkKind::Tensor
                            && l.index == LinkIndex::App
                            && l.conclusions.first() == Some(&mid)
                            && l.premisses.len() == 2
                            && l.premisses[1] == var
                    }) {
                        out.push(RewriteStep {
                            rule,
                            links: vec![*aid, *lid],
                        });
                    }
                }
            }
            RewriteRule::EpsL | RewriteRule::EpsR => {
                if mode != Mode::NonAssociative {
                    return out;
                }
                let side = usize::from(rule == RewriteRule::EpsR);
                for (pid, plus) in &self.links {
                    if plus.kind != LinkKind::Tensor
                        || plus.index != LinkIndex::Plus
                        || plus.premisses.len() != 2
                    {
                        continue;
                    }
                    let v = plus.premisses[side];
                    if let Some((eid, _)) = self.links.iter().find(|(_, l)| {
                        l.index == LinkIndex::Eps && l.conclusions.first() == Some(&v)
                    }) {
                        out.push(RewriteStep {
                            rule,
                            links: vec![*eid, *pid],
                        });
                    }
                }
            }
            RewriteRule::Assoc => {
                if mode != Mode::Associative {
                    return out;
                }
                for (pid, parent) in &self.links {
                    if parent.kind != LinkKind::Tensor || parent.index != LinkIndex::Plus {
                        continue;
                    }
                    for v in &parent.premisses {
                        if let Some((cid, _)) = self.links.iter().find(|(cid, l)| {
                            **cid != *pid
                                && l.kind == LinkKind::Tensor
                                && l.index == LinkIndex::Plus
                                && l.conclusions.first() == Some(v)
                        }) {
                            out.push(RewriteStep {
                                rule,
                                links: vec![*pid, *cid],
                            });
                        }
                    }
                }
                out.dedup();
            }
            RewriteRule::OverI | RewriteRule::UnderI => {
                for (pid, par) in &self.links {
                    if par.kind != LinkKind::Par || par.index != LinkIndex::Plus {
                        continue;
                    }
                    // main left marks /I, main right marks \I
                    let is_over = par.main == Some(par.conclusions[0]);
                    if is_over != (rule == RewriteRule::OverI) {
                        continue;
                    }
                    let aux = if is_over {
                        par.conclusions[1]
                    } else {
                        par.conclusions[0]
                    };
                    let mid = par.premisses[0];
                    let Some((tid, tensor)) = self.links.iter().find(|(_, l)| {
                        l.kind == LinkKind::Tensor
                            && l.index == LinkIndex::Plus
                            && l.conclusions.first() == Some(&mid)
                    }) else {
                        continue;
                    };
                    if tensor.premisses.is_empty() {
                        continue;
                    }
                    let edge = if is_over {
                        *tensor.premisses.last().unwrap()
                    } else {
                        tensor.premisses[0]
                    };
                    if edge != aux {
                        continue;
                    }
                    if mode == Mode::Associative && tensor.premisses.len() < 2 {
                        continue;
                    }
                    if !self.component_has_other_hypothesis(*tid, aux) {
                        continue;
                    }
                    out.push(RewriteStep {
                        rule,
                        links: vec![*pid, *tid],
                    });
                }
            }
            RewriteRule::LimpI => {
                for (pid, par) in &self.links {
                    if par.kind != LinkKind::Par || par.index != LinkIndex::Lambda {
                        continue;
                    }
                    let body = par.premisses[0];
                    let var = par.conclusions[1];
                    if self.tensor_reachable_up(body, var) {
                        out.push(RewriteStep {
                            rule,
                            links: vec![*pid],
                        });
                    }
                }
            }
        }
        out
    }

    /// The empty-antecedent side condition: the tensor component of the
    /// redex must have a hypothesis other than the auxiliary conclusion of
    /// the par link.
    fn component_has_other_hypothesis(&self, tensor: LinkId, aux: VertexId) -> bool {
        let mut seen_links = BTreeSet::new();
        let mut seen_vertices = BTreeSet::new();
        let mut queue = VecDeque::new();
        queue.push_back(tensor);
        while let Some(lid) = queue.pop_front() {
            if !seen_links.insert(lid) {
                continue;
            }
            let l = &self.links[&lid];
            if l.kind != LinkKind::Tensor {
                continue;
            }
            for v in l.premisses.iter().chain(l.conclusions.iter()) {
                if !seen_vertices.insert(*v) {
                    continue;
                }
                for (other, ol) in &self.links {
                    if ol.kind == LinkKind::Tensor
                        && (ol.premisses.contains(v) || ol.conclusions.contains(v))
                    {
                        queue.push_back(*other);
                    }
                }
            }
        }
        seen_vertices.iter().any(|v| {
            *v != aux
                && !self
                    .links
                    .iter()
                    .any(|(lid, l)| seen_links.contains(lid) && l.conclusions.contains(v))
        })
    }

    /// Is `target` reachable from `from` walking upward (conclusion to
    /// premisses) through tensor links only?
    fn tensor_reachable_up(&self, from: VertexId, target: VertexId) -> bool {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            if !seen.insert(v) {
                continue;
            }
            if let Some(lid) = self.link_above(v) {
                let l = &self.links[&lid];
                if l.kind == LinkKind::Tensor {
                    for p in &l.premisses {
                        if *p == target {
                            return true;
                        }
                        queue.push_back(*p);
                    }
                }
            }
        }
        false
    }

    /// Apply a rewrite at a previously found site.
    pub fn apply_rewrite(&mut self, step: &RewriteStep, mode: Mode) -> Result<(), ApsError> {
        // re-validate so that stale sites are rejected
        let current = self.find_sites(step.rule, mode);
        if !current.contains(step) {
            return Err(ApsError::SiteMismatch(format!("{step:?}")));
        }
        match step.rule {
            RewriteRule::Beta => {
                let lam = self.links[&step.links[0]].clone();
                let app = self.links[&step.links[1]].clone();
                let shared = app.premisses[0];
                let arg = app.premisses[1];
                let var = lam.conclusions[1];
                let body = lam.premisses[0];
                let out = app.conclusions[0];
                self.remove_link(step.links[0]);
                self.remove_link(step.links[1]);
                self.remove_vertex(shared);
                let mut resolve = BTreeMap::new();
                // the argument root absorbs the bound variable
                self.merge_tracked(arg, var, &mut resolve);
                // the body root absorbs the application output
                let body = *resolve.get(&body).unwrap_or(&body);
                let out = *resolve.get(&out).unwrap_or(&out);
                self.merge_tracked(body, out, &mut resolve);
            }
            RewriteRule::Eta => {
                let app = self.links[&step.links[0]].clone();
                let lam = self.links[&step.links[1]].clone();
                let fun = app.premisses[0];
                let var = app.premisses[1];
                let mid = app.conclusions[0];
                let result = lam.conclusions[0];
                self.remove_link(step.links[0]);
                self.remove_link(step.links[1]);
                self.remove_vertex(mid);
                self.remove_vertex(var);
                self.merge(fun, result);
            }
            RewriteRule::EpsL | RewriteRule::EpsR => {
                let plus = self.links[&step.links[1]].clone();
                let side = usize::from(step.rule == RewriteRule::EpsR);
                let eps_v = plus.premisses[side];
                let other = plus.premisses[1 - side];
                let out = plus.conclusions[0];
                self.remove_link(step.links[0]);
                self.remove_link(step.links[1]);
                self.remove_vertex(eps_v);
                self.merge(other, out);
            }
            RewriteRule::Assoc => {
                let child = self.links[&step.links[1]].clone();
                let shared = child.conclusions[0];
                let parent = self.links.get_mut(&step.links[0]).unwrap();
                let k = parent
                    .premisses
                    .iter()
                    .position(|v| *v == shared)
                    .ok_or_else(|| ApsError::SiteMismatch("assoc premiss moved".into()))?;
                let mut fused = Vec::with_capacity(parent.premisses.len() + child.premisses.len());
                fused.extend_from_slice(&parent.premisses[..k]);
                fused.extend_from_slice(&child.premisses);
                fused.extend_from_slice(&parent.premisses[k + 1..]);
                parent.premisses = fused;
                self.remove_link(step.links[1]);
                self.remove_vertex(shared);
            }
            RewriteRule::OverI | RewriteRule::UnderI => {
                let par = self.links[&step.links[0]].clone();
                let is_over = step.rule == RewriteRule::OverI;
                let (main, aux) = if is_over {
                    (par.conclusions[0], par.conclusions[1])
                } else {
                    (par.conclusions[1], par.conclusions[0])
                };
                let mid = par.premisses[0];
                self.remove_link(step.links[0]);
                match mode {
                    Mode::NonAssociative => {
                        let tensor = self.links[&step.links[1]].clone();
                        let other = if is_over {
                            tensor.premisses[0]
                        } else {
                            tensor.premisses[1]
                        };
                        self.remove_link(step.links[1]);
                        self.remove_vertex(mid);
                        self.remove_vertex(aux);
                        self.merge(other, main);
                    }
                    Mode::Associative => {
                        let tensor = self.links.get_mut(&step.links[1]).unwrap();
                        if is_over {
                            tensor.premisses.pop();
                        } else {
                            tensor.premisses.remove(0);
                        }
                        tensor.conclusions[0] = main;
                        let single = (tensor.premisses.len() == 1).then(|| tensor.premisses[0]);
                        self.remove_vertex(mid);
                        self.remove_vertex(aux);
                        // a one-premiss concatenation is the identity
                        if let Some(p) = single {
                            self.remove_link(step.links[1]);
                            self.merge(p, main);
                        }
                    }
                }
            }
            RewriteRule::LimpI => {
                let l = self.links.get_mut(&step.links[0]).unwrap();
                l.kind = LinkKind::Tensor;
            }
        }
        Ok(())
    }

    fn merge_tracked(
        &mut self,
        keep: VertexId,
        gone: VertexId,
        resolve: &mut BTreeMap<VertexId, VertexId>,
    ) {
        let keep = *resolve.get(&keep).unwrap_or(&keep);
        let gone = *resolve.get(&gone).unwrap_or(&gone);
        if keep == gone {
            return;
        }
        self.merge(keep, gone);
        resolve.insert(gone, keep);
        for v in resolve.values_mut() {
            if *v == gone {
                *v = keep;
            }
        }
    }

    /// Run the contraction strategy: beta eagerly, then empty-string and
    /// associativity cleanups, then one par contraction at a time, until no
    /// par links remain or nothing applies.
    pub fn contract(
        &self,
        mode: Mode,
        use_eta: bool,
    ) -> (ContractionResult, Vec<RewriteStep>, ContractionStats) {
        let mut g = self.clone();
        let mut trace = Vec::new();
        let mut stats = ContractionStats {
            steps: 0,
            initial_vertices: g.vertex_count(),
            initial_links: g.link_count(),
        };
        loop {
            // structural phase
            let mut progressed = true;
            while progressed {
                progressed = false;
                let mut structural = vec![RewriteRule::Beta];
                match mode {
                    Mode::Associative => structural.push(RewriteRule::Assoc),
                    Mode::NonAssociative => {
                        structural.push(RewriteRule::EpsL);
                        structural.push(RewriteRule::EpsR);
                    }
                }
                if use_eta {
                    structural.push(RewriteRule::Eta);
                }
                for rule in structural {
                    if let Some(site) = g.find_sites(rule, mode).into_iter().next() {
                        g.apply_rewrite(&site, mode).expect("found site applies");
                        trace.push(site);
                        stats.steps += 1;
                        progressed = true;
                        break;
                    }
                }
            }
            // par contraction phase
            let mut applied = false;
            for rule in [RewriteRule::OverI, RewriteRule::UnderI, RewriteRule::LimpI] {
                if let Some(site) = g.find_sites(rule, mode).into_iter().next() {
                    g.apply_rewrite(&site, mode).expect("found site applies");
                    trace.push(site);
                    stats.steps += 1;
                    applied = true;
                    break;
                }
            }
            if applied {
                continue;
            }
            let pars: Vec<LinkId> = g
                .links
                .iter()
                .filter(|(_, l)| l.kind == LinkKind::Par)
                .map(|(id, _)| *id)
                .collect();
            if pars.is_empty() {
                return match LambdaGraph::validate(g) {
                    Ok(lg) => (Ok(lg), trace, stats),
                    Err((g, e)) => (
                        Err(Box::new(ContractionFailure {
                            stuck: vec![StuckPar {
                                link: usize::MAX,
                                reason: e.to_string(),
                            }],
                            aps: g,
                        })),
                        trace,
                        stats,
                    ),
                };
            }
            let stuck = pars
                .iter()
                .map(|id| StuckPar {
                    link: *id,
                    reason: g.stuck_reason(*id),
                })
                .collect();
            return (
                Err(Box::new(ContractionFailure { stuck, aps: g })),
                trace,
                stats,
            );
        }
    }

    fn stuck_reason(&self, par: LinkId) -> String {
        let l = &self.links[&par];
        match l.index {
            LinkIndex::Lambda => {
                let body = l.premisses[0];
                let var = l.conclusions[1];
                if self.tensor_reachable_up(body, var) {
                    "lambda par not contracted".into()
                } else {
                    "variable conclusion of the lambda par is not connected to its \
                     premiss through tensor links"
                        .into()
                }
            }
            LinkIndex::Plus => {
                let is_over = l.main == Some(l.conclusions[0]);
                let mid = l.premisses[0];
                match self.link_above(mid) {
                    None => "par premiss is not the conclusion of a concatenation".into(),
                    Some(t) => {
                        let tl = &self.links[&t];
                        if tl.index != LinkIndex::Plus || tl.kind != LinkKind::Tensor {
                            "par premiss is not the conclusion of a concatenation".into()
                        } else {
                            let aux = if is_over {
                                l.conclusions[1]
                            } else {
                                l.conclusions[0]
                            };
                            let edge = if is_over {
                                tl.premisses.last().copied()
                            } else {
                                tl.premisses.first().copied()
                            };
                            if edge != Some(aux) {
                                "auxiliary conclusion is not at the required edge of the \
                                 concatenation"
                                    .into()
                            } else {
                                "empty-antecedent condition: the tensor component has no \
                                 other hypothesis"
                                    .into()
                            }
                        }
                    }
                }
            }
            _ => "unexpected par link".into(),
        }
    }

    /// Replay a recorded trace on a fresh copy.
    pub fn replay(&self, trace: &[RewriteStep], mode: Mode) -> Result<Aps, ApsError> {
        let mut g = self.clone();
        for step in trace {
            g.apply_rewrite(step, mode)
                .map_err(|e| ApsError::InvalidTrace(e.to_string()))?;
        }
        Ok(g)
    }

    /// A canonical text form, stable under vertex/link renumbering: used
    /// for isomorphism checks and deduplication.
    pub fn signature(&self) -> String {
        let mut order: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut queue: VecDeque<VertexId> = VecDeque::new();
        let mut concs = self.conclusions();
        concs.sort_by_key(|v| self.vertex_sort_key(*v));
        let mut hyps = self.hypotheses();
        hyps.sort_by_key(|v| self.vertex_sort_key(*v));
        queue.extend(concs);
        queue.extend(hyps);
        queue.extend(self.vertices.iter());
        while let Some(v) = queue.pop_front() {
            if order.contains_key(&v) {
                continue;
            }
            let n = order.len();
            order.insert(v, n);
            for l in [self.link_above(v), self.link_below(v)].into_iter().flatten() {
                for p in &self.links[&l].premisses {
                    queue.push_back(*p);
                }
                for c in &self.links[&l].conclusions {
                    queue.push_back(*c);
                }
            }
        }
        let mut lines = Vec::new();
        for (_, l) in self.links() {
            let prem: Vec<String> = l.premisses.iter().map(|v| order[v].to_string()).collect();
            let conc: Vec<String> = l.conclusions.iter().map(|v| order[v].to_string()).collect();
            lines.push(format!(
                "{:?}:{:?} [{}] -> [{}]",
                l.kind,
                l.index,
                prem.join(","),
                conc.join(",")
            ));
        }
        lines.sort();
        let mut labels = Vec::new();
        for (v, lbl) in &self.labels {
            let tag = match lbl {
                HypLabel::Word { word, .. } => format!("w:{word}"),
                HypLabel::Var { formula, .. } => format!(
                    "v:{}",
                    formula.as_ref().map(|f| f.to_string()).unwrap_or_default()
                ),
            };
            labels.push(format!("{}={}", order[v], tag));
        }
        for (v, f) in &self.con {
            labels.push(format!("{}=c:{}", order[v], f));
        }
        labels.sort();
        format!("{} | {}", lines.join("; "), labels.join("; "))
    }

    fn vertex_sort_key(&self, v: VertexId) -> (usize, String) {
        match self.labels.get(&v) {
            Some(HypLabel::Word { token, word }) => (*token, word.clone()),
            Some(HypLabel::Var { name, .. }) => (usize::MAX - 1, name.clone()),
            None => (usize::MAX, format!("{v}")),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graph aps {{");
        for v in &self.vertices {
            let label = match self.labels.get(v) {
                Some(HypLabel::Word { word, .. }) => word.clone(),
                Some(HypLabel::Var { name, .. }) => name.clone(),
                None => match self.con.get(v) {
                    Some(f) => f.to_string().replace('\\', "\\\\"),
                    None => String::new(),
                },
            };
            let _ = writeln!(s, "  v{v} [shape=point, xlabel=\"{label}\"];");
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
            let _ = writeln!(s, "  l{lid} [{style}, width=0.25, fixedsize=true];");
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

/// Convert a (linked) proof structure to its abstract proof structure:
/// internal formula labels are dropped, each lexical hypothesis is replaced
/// by the term graph of its lexical term, and the labeling functions are
/// populated.
pub fn to_aps(ps: &ProofStructure, mode: Mode) -> Aps {
    let mut aps = Aps::new();
    let mut max_v = 0;
    for (v, _) in ps.vertices() {
        aps.vertices.insert(v);
        max_v = max_v.max(v + 1);
    }
    aps.next_vertex = max_v;
    let mut max_l = 0;
    for (lid, l) in ps.links() {
        aps.links.insert(lid, l.clone());
        max_l = max_l.max(lid + 1);
    }
    aps.next_link = max_l;
    // binder types for lambda pars, read off the formula labels
    for (_, l) in ps.links() {
        if l.kind == LinkKind::Par && l.index == LinkIndex::Lambda {
            let var = l.conclusions[1];
            let ty = ps.vertex(var).formula.pros();
            aps.set_var_ty(var, ty);
        }
    }
    for (v, data) in ps.vertices() {
        let is_hyp = ps.link_above(v).is_none();
        let is_con = ps.link_below(v).is_none();
        if is_con {
            aps.set_conclusion(v, data.formula.clone());
        }
        if !is_hyp {
            continue;
        }
        match &data.origin {
            Origin::Lexical { token, entry } => {
                let mut free = Vec::new();
                let mut words = Vec::new();
                let root =
                    aps.insert_term(&entry.term, mode, &mut free, &mut words, &mut Vec::new());
                debug_assert!(free.is_empty(), "lexical terms are closed");
                for (w, wv) in words {
                    aps.set_label(
                        wv,
                        HypLabel::Word {
                            word: w,
                            token: *token,
                        },
                    );
                }
                // the entry's root becomes the old lexical vertex
                aps.merge(v, root);
            }
            Origin::Hypothesis { var } => {
                aps.set_label(
                    v,
                    HypLabel::Var {
                        name: var.clone(),
                        ty: data.formula.pros(),
                        formula: Some(data.formula.clone()),
                    },
                );
            }
            Origin::Goal | Origin::Internal => {}
        }
    }
    aps
}

/// Build the term graph of a standalone term; free variables become logical
/// hypotheses typed by the term.
pub fn term_to_graph(t: &Term, mode: Mode) -> Result<Aps, ApsError> {
    t.check_linear()?;
    let mut aps = Aps::new();
    let mut free = Vec::new();
    let mut words = Vec::new();
    let _root = aps.insert_term(t, mode, &mut free, &mut words, &mut Vec::new());
    for (name, v) in free {
        let ty = var_type_in(t, &name).expect("free variable occurs in the term");
        aps.set_label(
            v,
            HypLabel::Var {
                name,
                ty,
                formula: None,
            },
        );
    }
    for (w, v) in words {
        aps.set_label(v, HypLabel::Word { word: w, token: 0 });
    }
    Ok(aps)
}

fn var_type_in(t: &Term, name: &str) -> Option<ProsType> {
    match t {
        Term::Var(x, ty) if x == name => Some(ty.clone()),
        Term::Var(..) | Term::Word(_) | Term::Eps => None,
        Term::Plus(l, r) | Term::App(l, r) => var_type_in(l, name).or_else(|| var_type_in(r, name)),
        Term::Abs(x, _, _) if x == name => None,
        Term::Abs(_, _, b) => var_type_in(b, name),
    }
}

/// A validated lambda graph: a single conclusion, tensor links only, binder
/// variables inside their bodies, and acyclic and connected once the binder
/// edges are set aside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaGraph(Aps);

impl LambdaGraph {
    pub fn validate(aps: Aps) -> Result<LambdaGraph, (Aps, ApsError)> {
        match LambdaGraph::check(&aps) {
            Ok(()) => Ok(LambdaGraph(aps)),
            Err(e) => Err((aps, e)),
        }
    }

    fn check(aps: &Aps) -> Result<(), ApsError> {
        let conclusions = aps.conclusions();
        if conclusions.len() != 1 {
            return Err(ApsError::NotALambdaGraph(format!(
                "expected a single conclusion, found {}",
                conclusions.len()
            )));
        }
        for (_, l) in aps.links() {
            if l.kind != LinkKind::Tensor {
                return Err(ApsError::NotALambdaGraph("par links remain".into()));
            }
        }
        for (_, l) in aps.links() {
            if l.index == LinkIndex::Lambda {
                let body = l.premisses[0];
                let var = l.conclusions[1];
                if !aps.tensor_reachable_up(body, var) {
                    return Err(ApsError::NotALambdaGraph(
                        "a binder variable is not an ancestor of its body".into(),
                    ));
                }
            }
        }
        // acyclicity and connectedness of the incidence graph with the
        // binder edges removed
        let mut index: BTreeMap<(bool, usize), usize> = BTreeMap::new();
        for v in aps.vertices() {
            let n = index.len();
            index.insert((false, v), n);
        }
        for (lid, _) in aps.links() {
            let n = index.len();
            index.insert((true, lid), n);
        }
        let mut parent: Vec<usize> = (0..index.len()).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (lid, l) in aps.links() {
            let ln = index[&(true, lid)];
            let mut neigh: Vec<VertexId> = l.premisses.clone();
            for (i, c) in l.conclusions.iter().enumerate() {
                if l.index == LinkIndex::Lambda && i == 1 {
                    continue; // binder edge set aside
                }
                neigh.push(*c);
            }
            let mut seen = BTreeSet::new();
            for v in neigh {
                if !seen.insert(v) {
                    return Err(ApsError::NotALambdaGraph(
                        "cyclic: a vertex meets the same link twice".into(),
                    ));
                }
                let vn = index[&(false, v)];
                let (a, b) = (find(&mut parent, ln), find(&mut parent, vn));
                if a == b {
                    return Err(ApsError::NotALambdaGraph("cyclic".into()));
                }
                parent[a] = b;
            }
        }
        let mut roots = BTreeSet::new();
        for i in 0..parent.len() {
            roots.insert(find(&mut parent, i));
        }
        if roots.len() > 1 {
            return Err(ApsError::NotALambdaGraph("disconnected".into()));
        }
        Ok(())
    }

    pub fn aps(&self) -> &Aps {
        &self.0
    }

    pub fn root(&self) -> VertexId {
        self.0.conclusions()[0]
    }

    /// Read the linear lambda term back; inverse of [`term_to_graph`] up to
    /// renaming.
    pub fn to_term(&self) -> Result<Term, ApsError> {
        let aps = &self.0;
        let mut binders: BTreeMap<LinkId, String> = BTreeMap::new();
        let mut taken: BTreeSet<String> = aps
            .labels
            .values()
            .map(|l| match l {
                HypLabel::Word { word, .. } => word.clone(),
                HypLabel::Var { name, .. } => name.clone(),
            })
            .collect();
        for (lid, l) in aps.links() {
            if l.index == LinkIndex::Lambda {
                let name = crate::term::fresh_name("x", &taken);
                taken.insert(name.clone());
                binders.insert(lid, name);
            }
        }
        let raw = self.read(self.root(), &binders, &mut BTreeSet::new())?;
        let mut env = BTreeMap::new();
        let mut words = std::collections::HashSet::new();
        for lbl in aps.labels.values() {
            match lbl {
                HypLabel::Word { word, .. } => {
                    words.insert(word.clone());
                }
                HypLabel::Var { name, ty, .. } => {
                    env.insert(name.clone(), ty.clone());
                }
            }
        }
        let expected = aps.con.get(&self.root()).map(|f| f.pros());
        Ok(elaborate(&raw, &env, &words, expected.as_ref())?)
    }

    fn read(
        &self,
        v: VertexId,
        binders: &BTreeMap<LinkId, String>,
        visiting: &mut BTreeSet<VertexId>,
    ) -> Result<RawTerm, ApsError> {
        if !visiting.insert(v) {
            return Err(ApsError::NotALambdaGraph("cyclic term graph".into()));
        }
        let aps = &self.0;
        let out = match aps.link_above(v) {
            None => match aps.labels.get(&v) {
                Some(HypLabel::Word { word, .. }) => RawTerm::Ident(word.clone()),
                Some(HypLabel::Var { name, .. }) => RawTerm::Ident(name.clone()),
                None => {
                    return Err(ApsError::NotALambdaGraph(format!(
                        "unlabeled hypothesis vertex {v}"
                    )))
                }
            },
            Some(lid) => {
                let l = aps.links[&lid].clone();
                match l.index {
                    LinkIndex::Lambda if l.conclusions[1] == v && l.conclusions[0] != v => {
                        RawTerm::Ident(binders[&lid].clone())
                    }
                    LinkIndex::Lambda => {
                        let body = self.read(l.premisses[0], binders, visiting)?;
                        match aps.var_ty.get(&l.conclusions[1]) {
                            Some(ty) => RawTerm::AbsTyped(
                                binders[&lid].clone(),
                                ty.clone(),
                                Box::new(body),
                            ),
                            None => RawTerm::Abs(binders[&lid].clone(), Box::new(body)),
                        }
                    }
                    LinkIndex::App => {
                        let f = self.read(l.premisses[0], binders, visiting)?;
                        let a = self.read(l.premisses[1], binders, visiting)?;
                        RawTerm::App(Box::new(f), Box::new(a))
                    }
                    LinkIndex::Plus if l.premisses.is_empty() => RawTerm::Eps,
                    LinkIndex::Plus => {
                        let mut parts = Vec::new();
                        for p in &l.premisses {
                            parts.push(self.read(*p, binders, visiting)?);
                        }
                        let mut it = parts.into_iter();
                        let first = it.next().unwrap();
                        it.fold(first, |acc, x| RawTerm::Plus(Box::new(acc), Box::new(x)))
                    }
                    LinkIndex::Eps => RawTerm::Eps,
                }
            }
        };
        visiting.remove(&v);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Polarity;
    use crate::lexicon::{LexOptions, Lexicon};
    use crate::net::{enumerate_linkings, NetHyp};
    use crate::term::{parse_term, TermCmp};

    fn st() -> ProsType {
        ProsType::St
    }

    fn cmp_for(mode: Mode) -> TermCmp {
        match mode {
            Mode::Associative => TermCmp::AssocPlus,
            Mode::NonAssociative => TermCmp::Strict,
        }
    }

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

    fn parse_closed(src: &str, words: &[&str], expected: Option<&ProsType>) -> Term {
        let env = BTreeMap::new();
        let mut ws = std::collections::HashSet::new();
        for w in words {
            ws.insert(w.to_string());
        }
        parse_term(src, &env, &ws, expected).unwrap()
    }

    #[test]
    fn term_graph_round_trip() {
        let st_st = ProsType::arrow(st(), st());
        let quant = ProsType::arrow(st_st.clone(), st());
        let coord = ProsType::arrow(st_st.clone(), ProsType::arrow(st_st.clone(), st_st.clone()));
        let cases = [
            ("\\P.(P everyone)", vec!["everyone"], Some(quant)),
            ("\\z.(z + sleeps)", vec!["sleeps"], None),
            ("(a + b) + c", vec!["a", "b", "c"], None),
            ("\\Q.\\P.\\y.((P eps) + and + (Q y))", vec!["and"], Some(coord)),
        ];
        for (src, words, expected) in cases {
            for mode in [Mode::Associative, Mode::NonAssociative] {
                let t = parse_closed(src, &words, expected.as_ref());
                let g = term_to_graph(&t, mode).unwrap();
                let lg = LambdaGraph::validate(g)
                    .unwrap_or_else(|(_, e)| panic!("{src} should be a lambda graph: {e}"));
                let back = lg.to_term().unwrap();
                assert!(t.alpha_eq_mod(&back, cmp_for(mode)), "{src}: {t} vs {back}");
            }
        }
    }

    #[test]
    fn single_variable_is_a_single_vertex() {
        let t = Term::var("x", st());
        let g = term_to_graph(&t, Mode::Associative).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.link_count(), 0);
        let lg = LambdaGraph::validate(g).unwrap();
        assert!(lg.to_term().unwrap().alpha_eq(&t));
    }

    #[test]
    fn vacuous_binder_graph_is_rejected() {
        // a lambda tensor whose variable conclusion hangs loose
        let mut g = Aps::new();
        let var = g.add_vertex();
        let body = g.add_vertex();
        let out = g.add_vertex();
        g.set_label(
            body,
            HypLabel::Var {
                name: "y".into(),
                ty: st(),
                formula: None,
            },
        );
        g.add_link(Link {
            kind: LinkKind::Tensor,
            index: LinkIndex::Lambda,
            premisses: vec![body],
            conclusions: vec![out, var],
            main: Some(out),
        });
        let err = LambdaGraph::validate(g).unwrap_err().1;
        assert!(matches!(err, ApsError::NotALambdaGraph(_)));
    }

    #[test]
    fn eps_elimination() {
        let t = Term::plus(Term::Eps, Term::var("x", st()));
        for mode in [Mode::Associative, Mode::NonAssociative] {
            let g = term_to_graph(&t, mode).unwrap();
            let (res, trace, _) = g.contract(mode, false);
            let lg = res.unwrap_or_else(|f| panic!("stuck: {:?}", f.stuck));
            let back = lg.to_term().unwrap();
            assert!(back.alpha_eq(&Term::var("x", st())), "mode {mode:?}: {back}");
            assert!(!trace.is_empty());
        }
    }

    #[test]
    fn beta_rewrite_agrees_with_term_beta() {
        let cases = [
            "(\\z.(z + sleeps)) everyone",
            "(\\P.(P everyone)) (\\z.(z + sleeps))",
            "(\\x.x) (\\y.(y + a))",
        ];
        for src in cases {
            let t = parse_closed(src, &["everyone", "sleeps", "a"], None);
            let g = term_to_graph(&t, Mode::Associative).unwrap();
            let (res, _, _) = g.contract(Mode::Associative, false);
            let lg = res.unwrap_or_else(|f| panic!("{src} stuck: {:?}", f.stuck));
            let back = lg.to_term().unwrap();
            assert!(
                back.alpha_eq_mod(&t.normal_form(), TermCmp::AssocPlus),
                "{src}: graph {back} vs term {}",
                t.normal_form()
            );
        }
    }

    #[test]
    fn everyone_sleeps_contraction_golden() {
        let lex = demo_lexicon();
        let hyps = vec![lex_hyp(&lex, "everyone", 0), lex_hyp(&lex, "sleeps", 1)];
        let goal = Formula::atom("s");
        let mut outcomes = Vec::new();
        for ps in enumerate_linkings(&hyps, &goal).unwrap() {
            let aps = to_aps(&ps, Mode::Associative);
            let (res, trace, stats) = aps.contract(Mode::Associative, false);
            assert!(stats.steps <= stats.initial_size());
            outcomes.push((res, trace));
        }
        assert_eq!(outcomes.len(), 2);
        let successes: Vec<_> = outcomes.iter().filter(|(r, _)| r.is_ok()).collect();
        assert_eq!(successes.len(), 1, "exactly one linking is a proof net");
        let (res, trace) = successes[0];
        let lg = res.as_ref().unwrap();
        let term = lg.to_term().unwrap();
        assert_eq!(term.to_string(), "everyone + sleeps");
        // rule pattern: two beta steps, the lambda contraction, a final beta
        let rules: Vec<RewriteRule> = trace.iter().map(|s| s.rule).collect();
        assert_eq!(
            rules,
            vec![
                RewriteRule::Beta,
                RewriteRule::Beta,
                RewriteRule::LimpI,
                RewriteRule::Beta
            ]
        );
        // the failing linking reports the lambda-par condition
        let failure = outcomes.iter().find(|(r, _)| r.is_err()).unwrap();
        let (Err(f), _) = failure else { unreachable!() };
        assert_eq!(f.stuck.len(), 1);
        assert!(f.stuck[0].reason.contains("lambda par"));
    }

    #[test]
    fn replay_reproduces_contraction() {
        let lex = demo_lexicon();
        let hyps = vec![lex_hyp(&lex, "everyone", 0), lex_hyp(&lex, "sleeps", 1)];
        let goal = Formula::atom("s");
        for ps in enumerate_linkings(&hyps, &goal).unwrap() {
            let aps = to_aps(&ps, Mode::Associative);
            let (res, trace, _) = aps.contract(Mode::Associative, false);
            if let Ok(lg) = res {
                let replayed = aps.replay(&trace, Mode::Associative).unwrap();
                assert_eq!(replayed.signature(), lg.aps().signature());
            }
        }
    }

    #[test]
    fn trivial_graph_contracts_in_zero_steps() {
        let mut g = Aps::new();
        let v = g.add_vertex();
        g.set_label(
            v,
            HypLabel::Var {
                name: "x".into(),
                ty: st(),
                formula: Some(Formula::atom("np")),
            },
        );
        g.set_conclusion(v, Formula::atom("np"));
        let (res, trace, _) = g.contract(Mode::Associative, false);
        assert!(res.is_ok());
        assert!(trace.is_empty());
    }

    #[test]
    fn eta_rewrite() {
        let f = Term::var("f", ProsType::arrow(st(), st()));
        let t = Term::abs("x", st(), Term::app(f.clone(), Term::var("x", st())));
        let g = term_to_graph(&t, Mode::Associative).unwrap();
        let (res, trace, _) = g.contract(Mode::Associative, true);
        let lg = res.unwrap();
        assert!(lg.to_term().unwrap().alpha_eq(&f));
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].rule, RewriteRule::Eta);
        // without eta the lambda tensor stays, and it is still a lambda graph
        let g = term_to_graph(&t, Mode::Associative).unwrap();
        let (res, trace, _) = g.contract(Mode::Associative, false);
        assert!(res.is_ok());
        assert!(trace.is_empty());
    }

    #[test]
    fn assoc_flattening_builds_nary_links() {
        let t = parse_closed("(a + b) + (c + d)", &["a", "b", "c", "d"], None);
        let g = term_to_graph(&t, Mode::Associative).unwrap();
        let (res, _, _) = g.contract(Mode::Associative, false);
        let lg = res.unwrap();
        let plus_links: Vec<_> = lg
            .aps()
            .links()
            .filter(|(_, l)| l.index == LinkIndex::Plus)
            .collect();
        assert_eq!(plus_links.len(), 1);
        assert_eq!(plus_links[0].1.premisses.len(), 4);
        assert_eq!(
            lg.to_term().unwrap().word_spine().unwrap(),
            vec!["a", "b", "c", "d"]
        );
    }

    #[test]
    fn contraction_strategy_order_independent_on_small_inputs() {
        // exhaustively enumerate maximal rewrite sequences; success/failure
        // and the final signature must agree across strategies
        let lex = demo_lexicon();
        let hyps = vec![lex_hyp(&lex, "everyone", 0), lex_hyp(&lex, "sleeps", 1)];
        let goal = Formula::atom("s");
        for ps in enumerate_linkings(&hyps, &goal).unwrap() {
            let aps = to_aps(&ps, Mode::Associative);
            let mut finals = BTreeSet::new();
            let mut stack = vec![aps.clone()];
            let mut seen = BTreeSet::new();
            while let Some(g) = stack.pop() {
                if !seen.insert(g.signature()) {
                    continue;
                }
                let mut any = false;
                for rule in [
                    RewriteRule::Beta,
                    RewriteRule::Assoc,
                    RewriteRule::OverI,
                    RewriteRule::UnderI,
                    RewriteRule::LimpI,
                ] {
                    for site in g.find_sites(rule, Mode::Associative) {
                        let mut g2 = g.clone();
                        g2.apply_rewrite(&site, Mode::Associative).unwrap();
                        stack.push(g2);
                        any = true;
                    }
                }
                if !any {
                    let has_par = g.links().any(|(_, l)| l.kind == LinkKind::Par);
                    finals.insert((has_par, g.signature()));
                }
            }
            assert_eq!(finals.len(), 1, "all maximal strategies must agree");
        }
    }

    #[test]
    fn lexical_expansion_labels_words() {
        let lex = demo_lexicon();
        let hyps = vec![lex_hyp(&lex, "everyone", 0), lex_hyp(&lex, "sleeps", 1)];
        let unfolding = crate::net::unfold_sequent(&hyps, &Formula::atom("s"));
        let aps = to_aps(&unfolding.structure, Mode::Associative);
        let lam_tensors = aps
            .links()
            .filter(|(_, l)| l.kind == LinkKind::Tensor && l.index == LinkIndex::Lambda)
            .count();
        let lam_pars = aps
            .links()
            .filter(|(_, l)| l.kind == LinkKind::Par && l.index == LinkIndex::Lambda)
            .count();
        assert_eq!(lam_tensors, 2);
        assert_eq!(lam_pars, 1);
        let words: Vec<String> = aps
            .labels
            .values()
            .filter_map(|l| match l {
                HypLabel::Word { word, .. } => Some(word.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(words.len(), 2);
    }

    #[test]
    fn bare_structure_with_labels_erased() {
        let mut ps = ProofStructure::new();
        ps.unfold(&Formula::atom("np"), Polarity::Negative, Origin::Goal);
        let aps = to_aps(&ps, Mode::Associative);
        assert_eq!(aps.vertex_count(), 1);
        assert_eq!(aps.link_count(), 0);
    }
}
