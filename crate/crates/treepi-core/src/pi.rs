//! Polyadic pi-calculus: agents, free names, substitution, the labelled
//! transition system, behaviour-preserving normalization, and sort checking.
//!
//! The calculus is the asynchronous polyadic pi-calculus extended with
//! synchronous output prefixes (outputs with a continuation) and replicated
//! outputs, which the strong call-by-name encoding needs.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub type Name = String;

/// Pi-agents: processes and abstractions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PiAgent {
    Nil,
    Input {
        subj: Name,
        params: Vec<Name>,
        cont: Box<PiAgent>,
    },
    Output {
        subj: Name,
        args: Vec<Name>,
        cont: Option<Box<PiAgent>>,
    },
    Par(Box<PiAgent>, Box<PiAgent>),
    Res(Name, Box<PiAgent>),
    RepInput {
        subj: Name,
        params: Vec<Name>,
        cont: Box<PiAgent>,
    },
    RepOutput {
        subj: Name,
        args: Vec<Name>,
        cont: Box<PiAgent>,
    },
    /// Application `F<a>` of an abstraction to a name.
    Apply { fun: Box<PiAgent>, arg: Name },
    /// Unary abstraction `(\a) P`.
    Abs { param: Name, body: Box<PiAgent> },
    /// Indexed context hole standing for an abstraction. Only appears inside
    /// `PiContext` values, never in processes given to the LTS.
    Hole(usize),
}

/// Transition labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Tau,
    In { subj: Name, params: Vec<Name> },
    Out {
        subj: Name,
        extruded: BTreeSet<Name>,
        args: Vec<Name>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PiError {
    /// A bare abstraction or hole in process position.
    NotAProcess(String),
}

impl fmt::Display for PiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PiError::NotAProcess(what) => write!(f, "not a process: {what}"),
        }
    }
}

impl Label {
    pub fn is_output(&self) -> bool {
        matches!(self, Label::Out { .. })
    }

    pub fn bound_names(&self) -> BTreeSet<Name> {
        match self {
            Label::Tau => BTreeSet::new(),
            Label::In { params, .. } => params.iter().cloned().collect(),
            Label::Out { extruded, .. } => extruded.clone(),
        }
    }

    pub fn mentions(&self, a: &str) -> bool {
        match self {
            Label::Tau => false,
            Label::In { subj, params } => subj == a || params.iter().any(|p| p == a),
            Label::Out {
                subj,
                extruded,
                args,
            } => subj == a || args.iter().any(|p| p == a) || extruded.contains(a),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => write!(f, "tau"),
            Label::In { subj, params } => write!(f, "{subj}({})", params.join(",")),
            Label::Out {
                subj,
                extruded,
                args,
            } => {
                if extruded.is_empty() {
                    write!(f, "{subj}<{}>", args.join(","))
                } else {
                    let ex: Vec<_> = extruded.iter().cloned().collect();
                    write!(f, "(new {}) {subj}<{}>", ex.join(","), args.join(","))
                }
            }
        }
    }
}

impl PiAgent {
    pub fn par(l: PiAgent, r: PiAgent) -> PiAgent {
        PiAgent::Par(Box::new(l), Box::new(r))
    }

    pub fn res(a: &str, body: PiAgent) -> PiAgent {
        PiAgent::Res(a.to_owned(), Box::new(body))
    }

    pub fn res_many(names: &[&str], body: PiAgent) -> PiAgent {
        names
            .iter()
            .rev()
            .fold(body, |acc, a| PiAgent::res(a, acc))
    }

    pub fn input(subj: &str, params: &[&str], cont: PiAgent) -> PiAgent {
        PiAgent::Input {
            subj: subj.to_owned(),
            params: params.iter().map(|s| (*s).to_owned()).collect(),
            cont: Box::new(cont),
        }
    }

    pub fn rep_input(subj: &str, params: &[&str], cont: PiAgent) -> PiAgent {
        PiAgent::RepInput {
            subj: subj.to_owned(),
            params: params.iter().map(|s| (*s).to_owned()).collect(),
            cont: Box::new(cont),
        }
    }

    pub fn output(subj: &str, args: &[&str]) -> PiAgent {
        PiAgent::Output {
            subj: subj.to_owned(),
            args: args.iter().map(|s| (*s).to_owned()).collect(),
            cont: None,
        }
    }

    pub fn output_cont(subj: &str, args: &[&str], cont: PiAgent) -> PiAgent {
        PiAgent::Output {
            subj: subj.to_owned(),
            args: args.iter().map(|s| (*s).to_owned()).collect(),
            cont: Some(Box::new(cont)),
        }
    }

    pub fn abs(param: &str, body: PiAgent) -> PiAgent {
        PiAgent::Abs {
            param: param.to_owned(),
            body: Box::new(body),
        }
    }

    pub fn apply(fun: PiAgent, arg: &str) -> PiAgent {
        PiAgent::Apply {
            fun: Box::new(fun),
            arg: arg.to_owned(),
        }
    }

    pub fn is_process(&self) -> bool {
        !matches!(self, PiAgent::Abs { .. } | PiAgent::Hole(_))
    }

    /// True iff no output carries a continuation and there is no replicated
    /// output anywhere in the agent.
    pub fn is_async(&self) -> bool {
        match self {
            PiAgent::Nil | PiAgent::Hole(_) => true,
            PiAgent::Output { cont, .. } => cont.is_none(),
            PiAgent::RepOutput { .. } => false,
            PiAgent::Input { cont, .. } | PiAgent::RepInput { cont, .. } => cont.is_async(),
            PiAgent::Par(l, r) => l.is_async() && r.is_async(),
            PiAgent::Res(_, b) => b.is_async(),
            PiAgent::Apply { fun, .. } => fun.is_async(),
            PiAgent::Abs { body, .. } => body.is_async(),
        }
    }

    pub fn contains_hole(&self) -> bool {
        match self {
            PiAgent::Hole(_) => true,
            PiAgent::Nil => false,
            PiAgent::Output { cont, .. } => {
                cont.as_ref().map(|c| c.contains_hole()).unwrap_or(false)
            }
            PiAgent::Input { cont, .. }
            | PiAgent::RepInput { cont, .. }
            | PiAgent::RepOutput { cont, .. } => cont.contains_hole(),
            PiAgent::Par(l, r) => l.contains_hole() || r.contains_hole(),
            PiAgent::Res(_, b) => b.contains_hole(),
            PiAgent::Apply { fun, .. } => fun.contains_hole(),
            PiAgent::Abs { body, .. } => body.contains_hole(),
        }
    }
}

pub fn free_names(a: &PiAgent) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free(a, &mut Vec::new(), &mut out);
    out
}

fn note(n: &Name, bound: &[Name], out: &mut BTreeSet<Name>) {
    if !bound.iter().any(|b| b == n) {
        out.insert(n.clone());
    }
}

fn collect_free(a: &PiAgent, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match a {
        PiAgent::Nil | PiAgent::Hole(_) => {}
        PiAgent::Input { subj, params, cont } | PiAgent::RepInput { subj, params, cont } => {
            note(subj, bound, out);
            let base = bound.len();
            bound.extend(params.iter().cloned());
            collect_free(cont, bound, out);
            bound.truncate(base);
        }
        PiAgent::Output { subj, args, cont } => {
            note(subj, bound, out);
            for x in args {
                note(x, bound, out);
            }
            if let Some(c) = cont {
                collect_free(c, bound, out);
            }
        }
        PiAgent::RepOutput { subj, args, cont } => {
            note(subj, bound, out);
            for x in args {
                note(x, bound, out);
            }
            collect_free(cont, bound, out);
        }
        PiAgent::Par(l, r) => {
            collect_free(l, bound, out);
            collect_free(r, bound, out);
        }
        PiAgent::Res(n, b) => {
            bound.push(n.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        PiAgent::Apply { fun, arg } => {
            collect_free(fun, bound, out);
            note(arg, bound, out);
        }
        PiAgent::Abs { param, body } => {
            bound.push(param.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
    }
}

fn apply_map(n: &Name, sigma: &BTreeMap<Name, Name>) -> Name {
    sigma.get(n).cloned().unwrap_or_else(|| n.clone())
}

/// Capture-avoiding simultaneous name substitution.
pub fn pi_subst(a: &PiAgent, sigma: &BTreeMap<Name, Name>) -> PiAgent {
    if sigma.is_empty() {
        return a.clone();
    }
    match a {
        PiAgent::Nil => PiAgent::Nil,
        PiAgent::Hole(i) => PiAgent::Hole(*i),
        PiAgent::Output { subj, args, cont } => PiAgent::Output {
            subj: apply_map(subj, sigma),
            args: args.iter().map(|x| apply_map(x, sigma)).collect(),
            cont: cont.as_ref().map(|c| Box::new(pi_subst(c, sigma))),
        },
        PiAgent::RepOutput { subj, args, cont } => PiAgent::RepOutput {
            subj: apply_map(subj, sigma),
            args: args.iter().map(|x| apply_map(x, sigma)).collect(),
            cont: Box::new(pi_subst(cont, sigma)),
        },
        PiAgent::Par(l, r) => PiAgent::par(pi_subst(l, sigma), pi_subst(r, sigma)),
        PiAgent::Apply { fun, arg } => PiAgent::Apply {
            fun: Box::new(pi_subst(fun, sigma)),
            arg: apply_map(arg, sigma),
        },
        PiAgent::Input { subj, params, cont } => {
            let (params2, cont2) = subst_binders(params, cont, sigma);
            PiAgent::Input {
                subj: apply_map(subj, sigma),
                params: params2,
                cont: Box::new(cont2),
            }
        }
        PiAgent::RepInput { subj, params, cont } => {
            let (params2, cont2) = subst_binders(params, cont, sigma);
            PiAgent::RepInput {
                subj: apply_map(subj, sigma),
                params: params2,
                cont: Box::new(cont2),
            }
        }
        PiAgent::Res(n, body) => {
            let (ns, body2) = subst_binders(core::slice::from_ref(n), body, sigma);
            PiAgent::Res(ns.into_iter().next().unwrap(), Box::new(body2))
        }
        PiAgent::Abs { param, body } => {
            let (ps, body2) = subst_binders(core::slice::from_ref(param), body, sigma);
            PiAgent::Abs {
                param: ps.into_iter().next().unwrap(),
                body: Box::new(body2),
            }
        }
    }
}

fn subst_binders(
    binders: &[Name],
    body: &PiAgent,
    sigma: &BTreeMap<Name, Name>,
) -> (Vec<Name>, PiAgent) {
    // drop mappings for the binders themselves, rename binders that would
    // capture an incoming name
    let mut inner: BTreeMap<Name, Name> = sigma
        .iter()
        .filter(|(k, _)| !binders.contains(k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let body_free = free_names(body);
    let incoming: BTreeSet<Name> = inner
        .iter()
        .filter(|(k, _)| body_free.contains(*k))
        .map(|(_, v)| v.clone())
        .collect();
    let mut avoid: BTreeSet<Name> = body_free.clone();
    avoid.extend(incoming.iter().cloned());
    avoid.extend(inner.values().cloned());
    avoid.extend(inner.keys().cloned());
    let mut new_binders = Vec::with_capacity(binders.len());
    for b in binders {
        if incoming.contains(b) {
            let b2 = crate::lambda::fresh_name(b, &avoid);
            avoid.insert(b2.clone());
            inner.insert(b.clone(), b2.clone());
            new_binders.push(b2);
        } else {
            avoid.insert(b.clone());
            new_binders.push(b.clone());
        }
    }
    let body2 = if inner.is_empty() {
        body.clone()
    } else {
        pi_subst(body, &inner)
    };
    (new_binders, body2)
}

/// Alpha-invariant canonical key: bound names are replaced by binder indices
/// in traversal order, free names kept. Structure-sensitive; used for
/// alpha-equality of agents.
pub fn alpha_key(a: &PiAgent) -> String {
    let mut out = String::new();
    let mut counter = 0usize;
    key(a, &mut Vec::new(), &mut counter, &mut out);
    out
}

fn keyed(n: &Name, bound: &[(Name, usize)], out: &mut String) {
    match bound.iter().rev().find(|(b, _)| b == n) {
        Some((_, i)) => out.push_str(&format!("${i}")),
        None => out.push_str(n),
    }
}

fn key(a: &PiAgent, bound: &mut Vec<(Name, usize)>, counter: &mut usize, out: &mut String) {
    match a {
        PiAgent::Nil => out.push('0'),
        PiAgent::Hole(i) => out.push_str(&format!("[{i}]")),
        PiAgent::Output { subj, args, cont } => {
            keyed(subj, bound, out);
            out.push('<');
            for x in args {
                keyed(x, bound, out);
                out.push(',');
            }
            out.push('>');
            if let Some(c) = cont {
                out.push('.');
                key(c, bound, counter, out);
            }
        }
        PiAgent::RepOutput { subj, args, cont } => {
            out.push('!');
            keyed(subj, bound, out);
            out.push('<');
            for x in args {
                keyed(x, bound, out);
                out.push(',');
            }
            out.push_str(">.");
            key(cont, bound, counter, out);
        }
        PiAgent::Input { subj, params, cont } | PiAgent::RepInput { subj, params, cont } => {
            if matches!(a, PiAgent::RepInput { .. }) {
                out.push('!');
            }
            keyed(subj, bound, out);
            out.push('(');
            let base = bound.len();
            for p in params {
                bound.push((p.clone(), *counter));
                out.push_str(&format!("${}", *counter));
                out.push(',');
                *counter += 1;
            }
            out.push_str(").");
            key(cont, bound, counter, out);
            bound.truncate(base);
        }
        PiAgent::Par(l, r) => {
            out.push('(');
            key(l, bound, counter, out);
            out.push('|');
            key(r, bound, counter, out);
            out.push(')');
        }
        PiAgent::Res(n, b) => {
            out.push_str(&format!("new ${}.", *counter));
            bound.push((n.clone(), *counter));
            *counter += 1;
            key(b, bound, counter, out);
            bound.pop();
        }
        PiAgent::Apply { fun, arg } => {
            out.push('(');
            key(fun, bound, counter, out);
            out.push_str(")<");
            keyed(arg, bound, out);
            out.push('>');
        }
        PiAgent::Abs { param, body } => {
            out.push_str(&format!("(\\${})", *counter));
            bound.push((param.clone(), *counter));
            *counter += 1;
            key(body, bound, counter, out);
            bound.pop();
        }
    }
}

pub fn alpha_eq_pi(a: &PiAgent, b: &PiAgent) -> bool {
    alpha_key(a) == alpha_key(b)
}

// ---------------------------------------------------------------------------
// labelled transition system (Fig.-style rules inp, rep, out, par, com, res,
// open, app, plus the symmetric replicated-output rule)
// ---------------------------------------------------------------------------

/// All transitions of a process, with deterministically freshened bound
/// names in labels: input parameters are canonicalized to `?0, ?1, ...` and
/// extruded names to `#0, #1, ...`, skipping any that clash with free names
/// of `p`.
pub fn transitions(p: &PiAgent) -> Result<Vec<(Label, PiAgent)>, PiError> {
    if !p.is_process() {
        return Err(PiError::NotAProcess(print_pi(p)));
    }
    let fns = free_names(p);
    let mut out = Vec::new();
    for (label, succ) in raw_transitions(p)? {
        out.push(canonicalize_label(label, succ, &fns));
    }
    out.sort_by(|(l1, s1), (l2, s2)| {
        format!("{l1}")
            .cmp(&format!("{l2}"))
            .then_with(|| alpha_key(s1).cmp(&alpha_key(s2)))
    });
    out.dedup_by(|(l1, s1), (l2, s2)| l1 == l2 && alpha_key(s1) == alpha_key(s2));
    Ok(out)
}

fn canonical_series(prefix: char, count: usize, avoid: &BTreeSet<Name>) -> Vec<Name> {
    let mut names = Vec::with_capacity(count);
    let mut i = 0usize;
    while names.len() < count {
        let cand = format!("{prefix}{i}");
        if !avoid.contains(&cand) {
            names.push(cand);
        }
        i += 1;
    }
    names
}

fn canonicalize_label(label: Label, succ: PiAgent, fns: &BTreeSet<Name>) -> (Label, PiAgent) {
    match label {
        Label::Tau => (Label::Tau, succ),
        Label::In { subj, params } => {
            let fresh = canonical_series('?', params.len(), fns);
            let sigma: BTreeMap<Name, Name> =
                params.iter().cloned().zip(fresh.iter().cloned()).collect();
            let succ2 = pi_subst(&succ, &sigma);
            (
                Label::In {
                    subj,
                    params: fresh,
                },
                succ2,
            )
        }
        Label::Out {
            subj,
            extruded,
            args,
        } => {
            if extruded.is_empty() {
                return (
                    Label::Out {
                        subj,
                        extruded,
                        args,
                    },
                    succ,
                );
            }
            // rename extruded names in order of first appearance in args
            let ordered: Vec<Name> = args
                .iter()
                .filter(|a| extruded.contains(*a))
                .cloned()
                .collect();
            let mut seen = BTreeSet::new();
            let ordered: Vec<Name> = ordered
                .into_iter()
                .filter(|a| seen.insert(a.clone()))
                .collect();
            let fresh = canonical_series('#', ordered.len(), fns);
            let sigma: BTreeMap<Name, Name> =
                ordered.iter().cloned().zip(fresh.iter().cloned()).collect();
            let succ2 = pi_subst(&succ, &sigma);
            let args2: Vec<Name> = args.iter().map(|x| apply_map(x, &sigma)).collect();
            (
                Label::Out {
                    subj,
                    extruded: fresh.into_iter().collect(),
                    args: args2,
                },
                succ2,
            )
        }
    }
}

fn rename_label_bound(
    label: &Label,
    succ: &PiAgent,
    avoid: &BTreeSet<Name>,
) -> (Label, PiAgent) {
    let bn = label.bound_names();
    let clash: Vec<Name> = bn.iter().filter(|n| avoid.contains(*n)).cloned().collect();
    if clash.is_empty() {
        return (label.clone(), succ.clone());
    }
    let mut full_avoid = avoid.clone();
    full_avoid.extend(free_names(succ));
    match label {
        Label::Tau => (Label::Tau, succ.clone()),
        Label::In { subj, params } => {
            full_avoid.insert(subj.clone());
            full_avoid.extend(params.iter().cloned());
            let mut sigma = BTreeMap::new();
            for c in &clash {
                let f = crate::lambda::fresh_name(c, &full_avoid);
                full_avoid.insert(f.clone());
                sigma.insert(c.clone(), f);
            }
            let params2: Vec<Name> = params.iter().map(|x| apply_map(x, &sigma)).collect();
            (
                Label::In {
                    subj: subj.clone(),
                    params: params2,
                },
                pi_subst(succ, &sigma),
            )
        }
        Label::Out {
            subj,
            extruded,
            args,
        } => {
            full_avoid.insert(subj.clone());
            full_avoid.extend(args.iter().cloned());
            let mut sigma = BTreeMap::new();
            for c in &clash {
                let f = crate::lambda::fresh_name(c, &full_avoid);
                full_avoid.insert(f.clone());
                sigma.insert(c.clone(), f);
            }
            let args2: Vec<Name> = args.iter().map(|x| apply_map(x, &sigma)).collect();
            let extr2: BTreeSet<Name> = extruded.iter().map(|x| apply_map(x, &sigma)).collect();
            (
                Label::Out {
                    subj: subj.clone(),
                    extruded: extr2,
                    args: args2,
                },
                pi_subst(succ, &sigma),
            )
        }
    }
}

fn raw_transitions(p: &PiAgent) -> Result<Vec<(Label, PiAgent)>, PiError> {
    let mut out = Vec::new();
    match p {
        PiAgent::Nil => {}
        PiAgent::Hole(_) | PiAgent::Abs { .. } => {
            return Err(PiError::NotAProcess(print_pi(p)));
        }
        PiAgent::Input { subj, params, cont } => {
            out.push((
                Label::In {
                    subj: subj.clone(),
                    params: params.clone(),
                },
                cont.as_ref().clone(),
            ));
        }
        PiAgent::RepInput { subj, params, cont } => {
            if !params.contains(subj) {
                out.push((
                    Label::In {
                        subj: subj.clone(),
                        params: params.clone(),
                    },
                    PiAgent::par(cont.as_ref().clone(), p.clone()),
                ));
            }
        }
        PiAgent::Output { subj, args, cont } => {
            out.push((
                Label::Out {
                    subj: subj.clone(),
                    extruded: BTreeSet::new(),
                    args: args.clone(),
                },
                cont.as_ref()
                    .map(|c| c.as_ref().clone())
                    .unwrap_or(PiAgent::Nil),
            ));
        }
        PiAgent::RepOutput { subj, args, cont } => {
            out.push((
                Label::Out {
                    subj: subj.clone(),
                    extruded: BTreeSet::new(),
                    args: args.clone(),
                },
                PiAgent::par(cont.as_ref().clone(), p.clone()),
            ));
        }
        PiAgent::Par(l, r) => {
            let lt = raw_transitions(l)?;
            let rt = raw_transitions(r)?;
            let lf = free_names(l);
            let rf = free_names(r);
            // par, both sides, avoiding bound-name capture of the idle side
            for (label, succ) in &lt {
                let (label, succ) = rename_label_bound(label, succ, &rf);
                out.push((label, PiAgent::par(succ, r.as_ref().clone())));
            }
            for (label, succ) in &rt {
                let (label, succ) = rename_label_bound(label, succ, &lf);
                out.push((label, PiAgent::par(l.as_ref().clone(), succ)));
            }
            // com, both orientations
            for (inp_side, out_side, in_tr, out_tr, in_is_left) in
                [(&lf, &rf, &lt, &rt, true), (&rf, &lf, &rt, &lt, false)]
            {
                let _ = out_side;
                for (il, isucc) in in_tr.iter() {
                    let (subj_i, params) = match il {
                        Label::In { subj, params } => (subj, params),
                        _ => continue,
                    };
                    for (ol, osucc) in out_tr.iter() {
                        let (ol, osucc) = rename_label_bound(ol, osucc, inp_side);
                        let (subj_o, extruded, args) = match &ol {
                            Label::Out {
                                subj,
                                extruded,
                                args,
                            } => (subj, extruded, args),
                            _ => continue,
                        };
                        if subj_i != subj_o || params.len() != args.len() {
                            continue;
                        }
                        let sigma: BTreeMap<Name, Name> = params
                            .iter()
                            .cloned()
                            .zip(args.iter().cloned())
                            .collect();
                        let isubst = pi_subst(isucc, &sigma);
                        let body = if in_is_left {
                            PiAgent::par(isubst, osucc.clone())
                        } else {
                            PiAgent::par(osucc.clone(), isubst)
                        };
                        let wrapped = extruded
                            .iter()
                            .rev()
                            .fold(body, |acc, d| PiAgent::res(d, acc));
                        out.push((Label::Tau, wrapped));
                    }
                }
            }
        }
        PiAgent::Res(a, body) => {
            for (label, succ) in raw_transitions(body)? {
                // alpha-rename bound label names equal to the restricted name
                let mut avoid = BTreeSet::new();
                avoid.insert(a.clone());
                let (label, succ) = rename_label_bound(&label, &succ, &avoid);
                match &label {
                    Label::Out {
                        subj,
                        extruded,
                        args,
                    } if subj != a && args.iter().any(|x| x == a) && !extruded.contains(a) => {
                        // open: extrude the restricted name
                        let mut ex = extruded.clone();
                        ex.insert(a.clone());
                        out.push((
                            Label::Out {
                                subj: subj.clone(),
                                extruded: ex,
                                args: args.clone(),
                            },
                            succ,
                        ));
                    }
                    l if !l.mentions(a) => {
                        out.push((label.clone(), PiAgent::res(a, succ)));
                    }
                    _ => {} // blocked: restricted subject
                }
            }
        }
        PiAgent::Apply { fun, arg } => match fun.as_ref() {
            PiAgent::Abs { param, body } => {
                let mut sigma = BTreeMap::new();
                sigma.insert(param.clone(), arg.clone());
                let inst = pi_subst(body, &sigma);
                out.extend(raw_transitions(&inst)?);
            }
            other => return Err(PiError::NotAProcess(print_pi(other))),
        },
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// normalization
// ---------------------------------------------------------------------------

/// Canonical behaviour-preserving normal form: applications resolved,
/// parallel compositions flattened and sorted, inert garbage collected,
/// bound names renamed canonically. Every rewrite is a strong-bisimilarity
/// law, so transitions are preserved modulo normalization of successors.
pub fn normalize(p: &PiAgent) -> PiAgent {
    let mut cur = rewrite_fix(p);
    // sorting parallel components and renaming bound names interact, so
    // iterate to a fixpoint
    for _ in 0..32 {
        let sorted = sort_pars(&cur);
        let renamed = rename_bound_canonical(&sorted);
        if alpha_key(&renamed) == alpha_key(&cur) && print_pi(&renamed) == print_pi(&cur) {
            return renamed;
        }
        cur = renamed;
    }
    cur
}

/// Canonical state identity string.
pub fn state_key(p: &PiAgent) -> String {
    print_pi(&normalize(p))
}

fn rewrite_fix(p: &PiAgent) -> PiAgent {
    let mut cur = p.clone();
    loop {
        let next = rewrite_once(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn rewrite_once(p: &PiAgent) -> PiAgent {
    match p {
        PiAgent::Nil | PiAgent::Hole(_) => p.clone(),
        PiAgent::Apply { fun, arg } => match fun.as_ref() {
            PiAgent::Abs { param, body } => {
                let mut sigma = BTreeMap::new();
                sigma.insert(param.clone(), arg.clone());
                rewrite_once(&pi_subst(body, &sigma))
            }
            other => PiAgent::Apply {
                fun: Box::new(rewrite_once(other)),
                arg: arg.clone(),
            },
        },
        PiAgent::Abs { param, body } => PiAgent::Abs {
            param: param.clone(),
            body: Box::new(rewrite_once(body)),
        },
        PiAgent::Input { subj, params, cont } => PiAgent::Input {
            subj: subj.clone(),
            params: params.clone(),
            cont: Box::new(rewrite_once(cont)),
        },
        PiAgent::RepInput { subj, params, cont } => PiAgent::RepInput {
            subj: subj.clone(),
            params: params.clone(),
            cont: Box::new(rewrite_once(cont)),
        },
        PiAgent::Output { subj, args, cont } => PiAgent::Output {
            subj: subj.clone(),
            args: args.clone(),
            cont: cont.as_ref().map(|c| Box::new(rewrite_once(c))),
        },
        PiAgent::RepOutput { subj, args, cont } => PiAgent::RepOutput {
            subj: subj.clone(),
            args: args.clone(),
            cont: Box::new(rewrite_once(cont)),
        },
        PiAgent::Par(l, r) => {
            let l2 = rewrite_once(l);
            let r2 = rewrite_once(r);
            match (l2, r2) {
                (PiAgent::Nil, x) | (x, PiAgent::Nil) => x,
                (a, b) => PiAgent::par(a, b),
            }
        }
        PiAgent::Res(a, body) => {
            let body2 = rewrite_once(body);
            if !free_names(&body2).contains(a) {
                return body2;
            }
            let body3 = gc_dead_under_restriction(a, &body2);
            if body3 != body2 {
                return PiAgent::Res(a.clone(), Box::new(body3));
            }
            if let Some(fused) = try_forwarder_fusion(a, &body2) {
                return fused;
            }
            if let Some(stepped) = try_deterministic_com(a, &body2) {
                return stepped;
            }
            if let Some(shrunk) = try_scope_shrink(a, &body2) {
                return shrunk;
            }
            if let Some(linked) = try_link_fusion(a, &body2) {
                return linked;
            }
            PiAgent::Res(a.clone(), Box::new(body2))
        }
    }
}

/// Usage of a name inside a process, ignoring positions where it is shadowed.
#[derive(Default)]
struct Usage {
    input_subject: bool,
    output_subject: bool,
    transmitted: bool, // appears among output arguments or as an Apply argument
}

fn usage_of(n: &Name, p: &PiAgent, u: &mut Usage) {
    match p {
        PiAgent::Nil | PiAgent::Hole(_) => {}
        PiAgent::Input { subj, params, cont } | PiAgent::RepInput { subj, params, cont } => {
            if subj == n {
                u.input_subject = true;
            }
            if !params.contains(n) {
                usage_of(n, cont, u);
            }
        }
        PiAgent::Output { subj, args, cont } => {
            if subj == n {
                u.output_subject = true;
            }
            if args.contains(n) {
                u.transmitted = true;
            }
            if let Some(c) = cont {
                usage_of(n, c, u);
            }
        }
        PiAgent::RepOutput { subj, args, cont } => {
            if subj == n {
                u.output_subject = true;
            }
            if args.contains(n) {
                u.transmitted = true;
            }
            usage_of(n, cont, u);
        }
        PiAgent::Par(l, r) => {
            usage_of(n, l, u);
            usage_of(n, r, u);
        }
        PiAgent::Res(a, body) => {
            if a != n {
                usage_of(n, body, u);
            }
        }
        PiAgent::Apply { fun, arg } => {
            if arg == n {
                u.transmitted = true;
            }
            usage_of(n, fun, u);
        }
        PiAgent::Abs { param, body } => {
            if param != n {
                usage_of(n, body, u);
            }
        }
    }
}

/// Removes top-level parallel factors prefixed on a restricted name that can
/// never find a communication partner. If `a` is never transmitted and never
/// used as an output subject, inputs at `a` are inert; dually for outputs.
fn gc_dead_under_restriction(a: &Name, body: &PiAgent) -> PiAgent {
    let mut u = Usage::default();
    usage_of(a, body, &mut u);
    if u.transmitted {
        return body.clone();
    }
    let kill_inputs = !u.output_subject;
    let kill_outputs = !u.input_subject;
    if !kill_inputs && !kill_outputs {
        return body.clone();
    }
    // Dead factors may sit below further restrictions; peel the inner binder
    // telescope so they become visible, then rebuild it around the survivors.
    let mut inner: Vec<Name> = Vec::new();
    let mut core = body;
    while let PiAgent::Res(b, inner_body) = core {
        if b == a {
            return body.clone();
        }
        inner.push(b.clone());
        core = inner_body;
    }
    let mut factors = Vec::new();
    flatten_par(core, &mut factors);
    let kept: Vec<PiAgent> = factors
        .into_iter()
        .filter(|f| match f {
            PiAgent::Input { subj, .. } | PiAgent::RepInput { subj, .. } => {
                !(kill_inputs && subj == a)
            }
            PiAgent::Output { subj, .. } | PiAgent::RepOutput { subj, .. } => {
                !(kill_outputs && subj == a)
            }
            _ => true,
        })
        .collect();
    let mut rebuilt = rebuild_par(kept);
    for b in inner.iter().rev() {
        if free_names(&rebuilt).contains(b) {
            rebuilt = PiAgent::Res(b.clone(), Box::new(rebuilt));
        }
    }
    rebuilt
}

/// Counted usage of a name: how many times it appears as an output subject
/// and how many times it is transmitted, plus whether it is an input subject.
#[derive(Default)]
struct CountedUsage {
    input_subject: usize,
    output_subject: usize,
    /// Outputs with subject `n`, no continuation, and not under any
    /// replication — the ones guaranteed to emit at most one message.
    bare_output_subject: usize,
    transmitted: usize,
}

fn counted_usage_of(n: &Name, p: &PiAgent, u: &mut CountedUsage, under_rep: bool) {
    match p {
        PiAgent::Nil | PiAgent::Hole(_) => {}
        PiAgent::Input { subj, params, cont } => {
            if subj == n {
                u.input_subject += 1;
            }
            if !params.contains(n) {
                counted_usage_of(n, cont, u, under_rep);
            }
        }
        PiAgent::RepInput { subj, params, cont } => {
            if subj == n {
                u.input_subject += 1;
            }
            if !params.contains(n) {
                counted_usage_of(n, cont, u, true);
            }
        }
        PiAgent::Output { subj, args, cont } => {
            if subj == n {
                u.output_subject += 1;
                if cont.is_none() && !under_rep {
                    u.bare_output_subject += 1;
                }
            }
            u.transmitted += args.iter().filter(|x| *x == n).count();
            if let Some(c) = cont {
                counted_usage_of(n, c, u, under_rep);
            }
        }
        PiAgent::RepOutput { subj, args, cont } => {
            if subj == n {
                u.output_subject += 1;
            }
            u.transmitted += args.iter().filter(|x| *x == n).count();
            counted_usage_of(n, cont, u, true);
        }
        PiAgent::Par(l, r) => {
            counted_usage_of(n, l, u, under_rep);
            counted_usage_of(n, r, u, under_rep);
        }
        PiAgent::Res(a, body) => {
            if a != n {
                counted_usage_of(n, body, u, under_rep);
            }
        }
        PiAgent::Apply { fun, arg } => {
            if arg == n {
                u.transmitted += 1;
            }
            counted_usage_of(n, fun, u, under_rep);
        }
        PiAgent::Abs { param, body } => {
            if param != n {
                counted_usage_of(n, body, u, under_rep);
            }
        }
    }
}

/// Splits the body of a restriction `new a. body` into its chain of inner
/// binders and the parallel factors underneath, so the rewrite laws can see
/// factors hidden below further restrictions. Returns `None` when an inner
/// binder shadows `a`. All returned factors live under all returned binders,
/// so names bound by the telescope may be used freely inside them.
fn peel_telescope(a: &Name, body: &PiAgent) -> Option<(Vec<Name>, Vec<PiAgent>)> {
    let mut inner: Vec<Name> = Vec::new();
    let mut core = body;
    while let PiAgent::Res(b, ib) = core {
        if b == a {
            return None;
        }
        inner.push(b.clone());
        core = ib;
    }
    let mut factors = Vec::new();
    flatten_par(core, &mut factors);
    Some((inner, factors))
}

/// Rebuilds a peeled telescope, dropping binders that are no longer used.
fn rebuild_telescope(inner: &[Name], factors: Vec<PiAgent>) -> PiAgent {
    let mut p = rebuild_par(factors);
    for b in inner.iter().rev() {
        if free_names(&p).contains(b) {
            p = PiAgent::Res(b.clone(), Box::new(p));
        }
    }
    p
}

/// Inlines restricted forwarders, i.e. processes under `new a` whose sole job
/// is to relay every message received at `a` to some other name `x`.
///
/// Two shapes are handled:
/// - a replicated forwarder `!a(q~).x<q~>`, fused when `a` is neither
///   transmitted nor an input subject elsewhere, by substituting `x` for `a`
///   in the remaining factors;
/// - a one-shot forwarder `a(q~).x<q~>` with at least one parameter, fused
///   when the only other use of `a` is a single transmission or a single
///   output at `a` (so at most one message can ever reach the forwarder).
///
/// Both rewrites remove internal relay steps only, so the result expands
/// below the original and is weakly bisimilar to it.
fn try_forwarder_fusion(a: &Name, body: &PiAgent) -> Option<PiAgent> {
    let (inner, factors) = peel_telescope(a, body)?;
    if factors.len() < 2 {
        return None;
    }
    for idx in 0..factors.len() {
        let target = match &factors[idx] {
            PiAgent::RepInput { subj, params, cont } if subj == a => match cont.as_ref() {
                PiAgent::Output { subj: x, args, cont: None }
                    if x != a && !params.contains(x) && args == params =>
                {
                    Some((x.clone(), true))
                }
                _ => None,
            },
            PiAgent::Input { subj, params, cont } if subj == a && !params.is_empty() => {
                match cont.as_ref() {
                    PiAgent::Output { subj: x, args, cont: None }
                        if x != a && !params.contains(x) && args == params =>
                    {
                        Some((x.clone(), false))
                    }
                    _ => None,
                }
            }
            _ => None,
        };
        let Some((x, replicated)) = target else { continue };
        let mut u = CountedUsage::default();
        for (j, f) in factors.iter().enumerate() {
            if j != idx {
                counted_usage_of(a, f, &mut u, false);
            }
        }
        let ok = if replicated {
            u.input_subject == 0 && u.transmitted == 0
        } else {
            // one-shot: the only other use of `a` must be a single message
            // already committed to it — one bare output, never transmitted
            u.input_subject == 0
                && u.transmitted == 0
                && u.output_subject == 1
                && u.bare_output_subject == 1
        };
        if !ok {
            continue;
        }
        let mut sigma = BTreeMap::new();
        sigma.insert(a.clone(), x);
        let rest: Vec<PiAgent> = factors
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, f)| pi_subst(f, &sigma))
            .collect();
        return Some(rebuild_telescope(&inner, rest));
    }
    None
}

/// Pre-executes an inevitable internal communication on a restricted name.
///
/// If `a` has exactly one input occurrence and one output occurrence in the
/// whole body, both as unguarded top-level factors, is never transmitted, and
/// the exchange carries at least one name, then the communication on `a` is
/// the only event `a` can ever take part in and commutes with every other
/// action. Executing it eagerly keeps the result weakly bisimilar to (and
/// expanded by) the original and strictly shrinks the term. A replicated
/// participant is consumed too: after the step its subject has no partner
/// left, so the replication is inert.
fn try_deterministic_com(a: &Name, body: &PiAgent) -> Option<PiAgent> {
    let mut u = CountedUsage::default();
    counted_usage_of(a, body, &mut u, false);
    if u.input_subject != 1 || u.output_subject != 1 || u.transmitted != 0 {
        return None;
    }
    let (inner, factors) = peel_telescope(a, body)?;
    let mut in_idx = None;
    let mut out_idx = None;
    for (i, f) in factors.iter().enumerate() {
        match f {
            PiAgent::Input { subj, .. } | PiAgent::RepInput { subj, .. } if subj == a => {
                in_idx = Some(i);
            }
            PiAgent::Output { subj, .. } | PiAgent::RepOutput { subj, .. } if subj == a => {
                out_idx = Some(i);
            }
            _ => {}
        }
    }
    let (i, o) = (in_idx?, out_idx?);
    // two replicated participants form a persistent tau loop; executing it
    // eagerly would erase an observable divergence
    if matches!(&factors[i], PiAgent::RepInput { .. })
        && matches!(&factors[o], PiAgent::RepOutput { .. })
    {
        return None;
    }
    let (params, in_cont) = match &factors[i] {
        PiAgent::Input { params, cont, .. } | PiAgent::RepInput { params, cont, .. } => {
            (params.clone(), cont.as_ref().clone())
        }
        _ => return None,
    };
    let (args, out_cont) = match &factors[o] {
        PiAgent::Output { args, cont, .. } => {
            (args.clone(), cont.as_ref().map(|c| c.as_ref().clone()))
        }
        PiAgent::RepOutput { args, cont, .. } => (args.clone(), Some(cont.as_ref().clone())),
        _ => return None,
    };
    if params.is_empty() || params.len() != args.len() {
        return None;
    }
    let sigma: BTreeMap<Name, Name> =
        params.iter().cloned().zip(args.iter().cloned()).collect();
    let mut rest: Vec<PiAgent> = factors
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i && *j != o)
        .map(|(_, f)| f.clone())
        .collect();
    rest.push(pi_subst(&in_cont, &sigma));
    if let Some(k) = out_cont {
        rest.push(k);
    }
    let merged = rebuild_telescope(&inner, rest);
    if free_names(&merged).contains(a) {
        Some(PiAgent::Res(a.clone(), Box::new(merged)))
    } else {
        Some(merged)
    }
}

/// Shrinks the scope of a restriction onto the unique parallel factor that
/// mentions the restricted name. Scope intrusion over parallel composition
/// preserves strong bisimilarity and lets the factor-local rewrites below see
/// self-contained resources.
fn try_scope_shrink(a: &Name, body: &PiAgent) -> Option<PiAgent> {
    let (inner, mut factors) = peel_telescope(a, body)?;
    if factors.len() < 2 {
        return None;
    }
    let mut holder = None;
    for (i, f) in factors.iter().enumerate() {
        if free_names(f).contains(a) {
            if holder.is_some() {
                return None;
            }
            holder = Some(i);
        }
    }
    let i = holder?;
    factors[i] = PiAgent::Res(a.clone(), Box::new(factors[i].clone()));
    Some(rebuild_telescope(&inner, factors))
}

/// Detects a restricted name `a` whose only resource is a replicated link
/// `new m. !a<m>.y(w).w(u~).m<u~>`: every lookup of `a` is served by fetching
/// `y`'s content and relaying it. Since `a` is restricted, no other resource
/// for it can ever appear, so `a` behaves like `y` up to the relay's internal
/// steps; the link is removed and `y` substituted for `a`.
fn try_link_fusion(a: &Name, body: &PiAgent) -> Option<PiAgent> {
    let (binders, factors) = peel_telescope(a, body)?;
    if factors.len() < 2 {
        return None;
    }
    for idx in 0..factors.len() {
        let PiAgent::Res(m, inner) = &factors[idx] else { continue };
        let PiAgent::RepOutput { subj, args, cont } = inner.as_ref() else { continue };
        if subj != a || args.len() != 1 || &args[0] != m || m == a {
            continue;
        }
        let PiAgent::Input { subj: y, params, cont: c2 } = cont.as_ref() else { continue };
        if y == a || y == m || params.len() != 1 {
            continue;
        }
        let w = &params[0];
        let PiAgent::Input { subj: ws, params: us, cont: c3 } = c2.as_ref() else { continue };
        if ws != w || us.contains(m) || us.contains(w) {
            continue;
        }
        let PiAgent::Output { subj: ms, args: fin, cont: None } = c3.as_ref() else { continue };
        if ms != m || fin != us {
            continue;
        }
        let mut u = CountedUsage::default();
        for (j, f) in factors.iter().enumerate() {
            if j != idx {
                counted_usage_of(a, f, &mut u, false);
            }
        }
        if u.output_subject != 0 {
            continue;
        }
        let mut sigma = BTreeMap::new();
        sigma.insert(a.clone(), y.clone());
        let rest: Vec<PiAgent> = factors
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, f)| pi_subst(f, &sigma))
            .collect();
        return Some(rebuild_telescope(&binders, rest));
    }
    None
}

fn flatten_par(p: &PiAgent, out: &mut Vec<PiAgent>) {
    match p {
        PiAgent::Par(l, r) => {
            flatten_par(l, out);
            flatten_par(r, out);
        }
        PiAgent::Nil => {}
        other => out.push(other.clone()),
    }
}

fn rebuild_par(mut factors: Vec<PiAgent>) -> PiAgent {
    match factors.len() {
        0 => PiAgent::Nil,
        1 => factors.pop().unwrap(),
        _ => {
            let last = factors.pop().unwrap();
            factors
                .into_iter()
                .rev()
                .fold(last, |acc, f| PiAgent::par(f, acc))
        }
    }
}

fn sort_pars(p: &PiAgent) -> PiAgent {
    match p {
        PiAgent::Par(..) => {
            let mut factors = Vec::new();
            flatten_par(p, &mut factors);
            let mut factors: Vec<PiAgent> = factors.iter().map(sort_pars).collect();
            factors.sort_by_key(alpha_key);
            rebuild_par(factors)
        }
        PiAgent::Nil | PiAgent::Hole(_) => p.clone(),
        PiAgent::Input { subj, params, cont } => PiAgent::Input {
            subj: subj.clone(),
            params: params.clone(),
            cont: Box::new(sort_pars(cont)),
        },
        PiAgent::RepInput { subj, params, cont } => PiAgent::RepInput {
            subj: subj.clone(),
            params: params.clone(),
            cont: Box::new(sort_pars(cont)),
        },
        PiAgent::Output { subj, args, cont } => PiAgent::Output {
            subj: subj.clone(),
            args: args.clone(),
            cont: cont.as_ref().map(|c| Box::new(sort_pars(c))),
        },
        PiAgent::RepOutput { subj, args, cont } => PiAgent::RepOutput {
            subj: subj.clone(),
            args: args.clone(),
            cont: Box::new(sort_pars(cont)),
        },
        PiAgent::Res(a, body) => PiAgent::Res(a.clone(), Box::new(sort_pars(body))),
        PiAgent::Apply { fun, arg } => PiAgent::Apply {
            fun: Box::new(sort_pars(fun)),
            arg: arg.clone(),
        },
        PiAgent::Abs { param, body } => PiAgent::Abs {
            param: param.clone(),
            body: Box::new(sort_pars(body)),
        },
    }
}

fn rename_bound_canonical(p: &PiAgent) -> PiAgent {
    let free = free_names(p);
    let mut counter = 0usize;
    rename_bound(p, &mut BTreeMap::new(), &mut counter, &free)
}

fn next_canonical(counter: &mut usize, free: &BTreeSet<Name>) -> Name {
    loop {
        let cand = format!("v{}", *counter);
        *counter += 1;
        if !free.contains(&cand) {
            return cand;
        }
    }
}

fn rename_bound(
    p: &PiAgent,
    env: &mut BTreeMap<Name, Vec<Name>>,
    counter: &mut usize,
    free: &BTreeSet<Name>,
) -> PiAgent {
    let look = |n: &Name, env: &BTreeMap<Name, Vec<Name>>| -> Name {
        env.get(n)
            .and_then(|v| v.last().cloned())
            .unwrap_or_else(|| n.clone())
    };
    let push = |n: &Name,
                env: &mut BTreeMap<Name, Vec<Name>>,
                counter: &mut usize|
     -> Name {
        let fresh = next_canonical(counter, free);
        env.entry(n.clone()).or_default().push(fresh.clone());
        fresh
    };
    let pop = |n: &Name, env: &mut BTreeMap<Name, Vec<Name>>| {
        if let Some(v) = env.get_mut(n) {
            v.pop();
            if v.is_empty() {
                env.remove(n);
            }
        }
    };
    match p {
        PiAgent::Nil => PiAgent::Nil,
        PiAgent::Hole(i) => PiAgent::Hole(*i),
        PiAgent::Output { subj, args, cont } => PiAgent::Output {
            subj: look(subj, env),
            args: args.iter().map(|x| look(x, env)).collect(),
            cont: cont
                .as_ref()
                .map(|c| Box::new(rename_bound(c, env, counter, free))),
        },
        PiAgent::RepOutput { subj, args, cont } => PiAgent::RepOutput {
            subj: look(subj, env),
            args: args.iter().map(|x| look(x, env)).collect(),
            cont: Box::new(rename_bound(cont, env, counter, free)),
        },
        PiAgent::Input { subj, params, cont } | PiAgent::RepInput { subj, params, cont } => {
            let subj2 = look(subj, env);
            let params2: Vec<Name> = params.iter().map(|x| push(x, env, counter)).collect();
            let cont2 = rename_bound(cont, env, counter, free);
            for x in params.iter().rev() {
                pop(x, env);
            }
            if matches!(p, PiAgent::RepInput { .. }) {
                PiAgent::RepInput {
                    subj: subj2,
                    params: params2,
                    cont: Box::new(cont2),
                }
            } else {
                PiAgent::Input {
                    subj: subj2,
                    params: params2,
                    cont: Box::new(cont2),
                }
            }
        }
        PiAgent::Par(l, r) => PiAgent::par(
            rename_bound(l, env, counter, free),
            rename_bound(r, env, counter, free),
        ),
        PiAgent::Res(a, body) => {
            let a2 = push(a, env, counter);
            let body2 = rename_bound(body, env, counter, free);
            pop(a, env);
            PiAgent::Res(a2, Box::new(body2))
        }
        PiAgent::Apply { fun, arg } => PiAgent::Apply {
            fun: Box::new(rename_bound(fun, env, counter, free)),
            arg: look(arg, env),
        },
        PiAgent::Abs { param, body } => {
            let p2 = push(param, env, counter);
            let body2 = rename_bound(body, env, counter, free);
            pop(param, env);
            PiAgent::Abs {
                param: p2,
                body: Box::new(body2),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// sorting system
// ---------------------------------------------------------------------------

/// A sorting: a (possibly partial) sort assignment for names, and for each
/// sort the sequence of object sorts its tuples carry.
#[derive(Debug, Clone, Default)]
pub struct Sorting {
    pub sort_of: BTreeMap<Name, String>,
    pub obj: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortError {
    pub location: String,
    pub message: String,
}

impl fmt::Display for SortError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sort error at {}: {}", self.location, self.message)
    }
}

/// Checks arity/sort agreement of every prefix in `a` under `s`, inferring
/// sorts for names `s` leaves unassigned. Returns the full assignment.
pub fn sort_check(a: &PiAgent, s: &Sorting) -> Result<BTreeMap<Name, String>, SortError> {
    // make binders unique so the assignment can be a flat map
    let unique = rename_bound_canonical(a);
    let mut constraints = Vec::new();
    collect_sort_constraints(&unique, &String::from("top"), &mut constraints);
    let mut asn = s.sort_of.clone();
    // keep only names mentioned
    let mentioned: BTreeSet<Name> = constraints
        .iter()
        .flat_map(|c: &SortConstraint| {
            let mut v = vec![c.subject.clone()];
            v.extend(c.objects.iter().cloned());
            v
        })
        .collect();
    asn.retain(|k, _| mentioned.contains(k));
    solve_sorts(&constraints, s, &mut asn)?;
    Ok(asn)
}

struct SortConstraint {
    location: String,
    subject: Name,
    objects: Vec<Name>,
}

fn collect_sort_constraints(a: &PiAgent, loc: &String, out: &mut Vec<SortConstraint>) {
    match a {
        PiAgent::Nil | PiAgent::Hole(_) => {}
        PiAgent::Input { subj, params, cont } | PiAgent::RepInput { subj, params, cont } => {
            out.push(SortConstraint {
                location: format!("{loc}/in {subj}"),
                subject: subj.clone(),
                objects: params.clone(),
            });
            collect_sort_constraints(cont, &format!("{loc}/in {subj}"), out);
        }
        PiAgent::Output { subj, args, cont } => {
            out.push(SortConstraint {
                location: format!("{loc}/out {subj}"),
                subject: subj.clone(),
                objects: args.clone(),
            });
            if let Some(c) = cont {
                collect_sort_constraints(c, &format!("{loc}/out {subj}"), out);
            }
        }
        PiAgent::RepOutput { subj, args, cont } => {
            out.push(SortConstraint {
                location: format!("{loc}/out {subj}"),
                subject: subj.clone(),
                objects: args.clone(),
            });
            collect_sort_constraints(cont, &format!("{loc}/out {subj}"), out);
        }
        PiAgent::Par(l, r) => {
            collect_sort_constraints(l, loc, out);
            collect_sort_constraints(r, loc, out);
        }
        PiAgent::Res(_, body) | PiAgent::Abs { body, .. } => {
            collect_sort_constraints(body, loc, out);
        }
        PiAgent::Apply { fun, .. } => collect_sort_constraints(fun, loc, out),
    }
}

fn solve_sorts(
    constraints: &[SortConstraint],
    s: &Sorting,
    asn: &mut BTreeMap<Name, String>,
) -> Result<(), SortError> {
    // propagate from known subjects; on a stuck point, branch over the
    // declared sort alphabet
    loop {
        let mut progress = false;
        for c in constraints {
            if let Some(subj_sort) = asn.get(&c.subject).cloned() {
                let objs = s.obj.get(&subj_sort).ok_or_else(|| SortError {
                    location: c.location.clone(),
                    message: format!("sort {subj_sort} has no object declaration"),
                })?;
                if objs.len() != c.objects.len() {
                    return Err(SortError {
                        location: c.location.clone(),
                        message: format!(
                            "arity mismatch: sort {subj_sort} carries {} names, found {}",
                            objs.len(),
                            c.objects.len()
                        ),
                    });
                }
                for (name, want) in c.objects.iter().zip(objs.iter()) {
                    match asn.get(name) {
                        Some(have) if have != want => {
                            return Err(SortError {
                                location: c.location.clone(),
                                message: format!(
                                    "name {name} has sort {have}, expected {want}"
                                ),
                            });
                        }
                        Some(_) => {}
                        None => {
                            asn.insert(name.clone(), want.clone());
                            progress = true;
                        }
                    }
                }
            }
        }
        if !progress {
            break;
        }
    }
    // find an unknown subject, branch
    if let Some(c) = constraints.iter().find(|c| !asn.contains_key(&c.subject)) {
        let mut last_err = SortError {
            location: c.location.clone(),
            message: format!("cannot determine a sort for {}", c.subject),
        };
        for sort in s.obj.keys() {
            let mut trial = asn.clone();
            trial.insert(c.subject.clone(), sort.clone());
            match solve_sorts(constraints, s, &mut trial) {
                Ok(()) => {
                    *asn = trial;
                    return Ok(());
                }
                Err(e) => last_err = e,
            }
        }
        return Err(last_err);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// parsing and printing
// ---------------------------------------------------------------------------

pub use crate::lambda::ParseError;

struct PLexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> PLexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(kw) {
            let after = &self.src[self.pos + kw.len()..];
            let boundary = after
                .chars()
                .next()
                .map(|c| !(c.is_ascii_alphanumeric() || c == '_' || c == '\''))
                .unwrap_or(true);
            if boundary {
                self.pos += kw.len();
                return true;
            }
        }
        false
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        let mut chars = self.src[self.pos..].char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() || c == '?' || c == '#' => {}
            _ => return None,
        }
        let mut end = start + 1;
        for (i, c) in chars {
            if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                end = start + i + c.len_utf8();
            } else {
                break;
            }
        }
        self.pos = end;
        Some(self.src[start..end].to_owned())
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.pos,
            message: msg.to_owned(),
        })
    }

    fn name_list(&mut self, close: char) -> Result<Vec<Name>, ParseError> {
        let mut names = Vec::new();
        if self.peek() == Some(close) {
            self.pos += 1;
            return Ok(names);
        }
        loop {
            match self.ident() {
                Some(n) => names.push(n),
                None => return self.err("expected name"),
            }
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.pos += 1;
                }
                Some(c) if c == close => {
                    self.pos += 1;
                    return Ok(names);
                }
                _ => return self.err("expected ',' or close"),
            }
        }
    }
}

/// Parses the pi grammar
/// `P := 0 | a(x,..).P | a<x,..> | a<x,..>.P | P|P | new a,... P | !a(x,..).P | F<a>`
/// with `F := (\a) P`. Replicated outputs `!a<x,..>.P` are also accepted.
pub fn parse_pi(text: &str) -> Result<PiAgent, ParseError> {
    let mut lx = PLexer { src: text, pos: 0 };
    let a = parse_par(&mut lx)?;
    lx.skip_ws();
    if lx.pos != lx.src.len() {
        return lx.err("trailing input");
    }
    Ok(a)
}

fn parse_par(lx: &mut PLexer) -> Result<PiAgent, ParseError> {
    let mut parts = vec![parse_prefix(lx)?];
    while lx.eat("|") {
        parts.push(parse_prefix(lx)?);
    }
    let mut it = parts.into_iter();
    let first = it.next().unwrap();
    Ok(it.fold(first, PiAgent::par))
}

fn parse_prefix(lx: &mut PLexer) -> Result<PiAgent, ParseError> {
    lx.skip_ws();
    if lx.eat_kw("new") {
        let mut names = Vec::new();
        loop {
            match lx.ident() {
                Some(n) => names.push(n),
                None => return lx.err("expected name after new"),
            }
            if !lx.eat(",") {
                break;
            }
        }
        if !lx.eat(".") {
            return lx.err("expected '.' after new binders");
        }
        let body = parse_par(lx)?;
        return Ok(names
            .into_iter()
            .rev()
            .fold(body, |acc, n| PiAgent::Res(n, Box::new(acc))));
    }
    if lx.eat("0") {
        return Ok(PiAgent::Nil);
    }
    if lx.eat("!") {
        return parse_prefixed_name(lx, true);
    }
    if lx.peek() == Some('(') {
        lx.eat("(");
        // abstraction or grouping
        if lx.eat("\\") {
            let param = match lx.ident() {
                Some(n) => n,
                None => return lx.err("expected abstraction parameter"),
            };
            if !lx.eat(")") {
                return lx.err("expected ')' after abstraction parameter");
            }
            let body = parse_prefix(lx)?;
            let abs = PiAgent::Abs {
                param,
                body: Box::new(body),
            };
            return parse_apply_suffix(lx, abs);
        }
        let inner = parse_par(lx)?;
        if !lx.eat(")") {
            return lx.err("expected ')'");
        }
        return parse_apply_suffix(lx, inner);
    }
    parse_prefixed_name(lx, false)
}

fn parse_apply_suffix(lx: &mut PLexer, agent: PiAgent) -> Result<PiAgent, ParseError> {
    lx.skip_ws();
    if lx.src[lx.pos..].starts_with('<') {
        lx.pos += 1;
        let arg = match lx.ident() {
            Some(n) => n,
            None => return lx.err("expected application argument"),
        };
        if !lx.eat(">") {
            return lx.err("expected '>'");
        }
        return Ok(PiAgent::Apply {
            fun: Box::new(agent),
            arg,
        });
    }
    Ok(agent)
}

fn parse_prefixed_name(lx: &mut PLexer, replicated: bool) -> Result<PiAgent, ParseError> {
    let subj = match lx.ident() {
        Some(n) => n,
        None => return lx.err("expected process"),
    };
    lx.skip_ws();
    match lx.peek() {
        Some('(') => {
            lx.eat("(");
            let params = lx.name_list(')')?;
            if !lx.eat(".") {
                return lx.err("expected '.' after input prefix");
            }
            let cont = parse_prefix(lx)?;
            if replicated {
                Ok(PiAgent::RepInput {
                    subj,
                    params,
                    cont: Box::new(cont),
                })
            } else {
                Ok(PiAgent::Input {
                    subj,
                    params,
                    cont: Box::new(cont),
                })
            }
        }
        Some('<') => {
            lx.eat("<");
            let args = lx.name_list('>')?;
            let save = lx.pos;
            if lx.eat(".") {
                let cont = parse_prefix(lx)?;
                if replicated {
                    Ok(PiAgent::RepOutput {
                        subj,
                        args,
                        cont: Box::new(cont),
                    })
                } else {
                    Ok(PiAgent::Output {
                        subj,
                        args,
                        cont: Some(Box::new(cont)),
                    })
                }
            } else {
                lx.pos = save;
                if replicated {
                    Ok(PiAgent::RepOutput {
                        subj,
                        args,
                        cont: Box::new(PiAgent::Nil),
                    })
                } else {
                    Ok(PiAgent::Output {
                        subj,
                        args,
                        cont: None,
                    })
                }
            }
        }
        _ => lx.err("expected '(' or '<' after name"),
    }
}

pub fn print_pi(a: &PiAgent) -> String {
    let mut s = String::new();
    print_agent(a, &mut s, false);
    s
}

fn print_agent(a: &PiAgent, out: &mut String, atomic: bool) {
    match a {
        PiAgent::Nil => out.push('0'),
        PiAgent::Hole(i) => out.push_str(&format!("[{i}]")),
        PiAgent::Input { subj, params, cont } => {
            out.push_str(subj);
            out.push('(');
            out.push_str(&params.join(","));
            out.push_str(").");
            print_agent(cont, out, true);
        }
        PiAgent::RepInput { subj, params, cont } => {
            out.push('!');
            out.push_str(subj);
            out.push('(');
            out.push_str(&params.join(","));
            out.push_str(").");
            print_agent(cont, out, true);
        }
        PiAgent::Output { subj, args, cont } => {
            out.push_str(subj);
            out.push('<');
            out.push_str(&args.join(","));
            out.push('>');
            if let Some(c) = cont {
                out.push('.');
                print_agent(c, out, true);
            }
        }
        PiAgent::RepOutput { subj, args, cont } => {
            out.push('!');
            out.push_str(subj);
            out.push('<');
            out.push_str(&args.join(","));
            out.push_str(">.");
            print_agent(cont, out, true);
        }
        PiAgent::Par(l, r) => {
            // the parser is left-associative, so a left Par child may stay
            // bare while a right Par child needs parentheses
            if atomic {
                out.push('(');
            }
            match l.as_ref() {
                PiAgent::Par(..) => print_agent(l, out, false),
                other => print_agent(other, out, true),
            }
            out.push_str(" | ");
            print_agent(r, out, true);
            if atomic {
                out.push(')');
            }
        }
        PiAgent::Res(..) => {
            if atomic {
                out.push('(');
            }
            let mut names = Vec::new();
            let mut cur = a;
            while let PiAgent::Res(n, b) = cur {
                names.push(n.clone());
                cur = b;
            }
            out.push_str("new ");
            out.push_str(&names.join(","));
            out.push_str(". ");
            print_agent(cur, out, false);
            if atomic {
                out.push(')');
            }
        }
        PiAgent::Apply { fun, arg } => {
            out.push('(');
            print_agent(fun, out, false);
            out.push_str(")<");
            out.push_str(arg);
            out.push('>');
        }
        PiAgent::Abs { param, body } => {
            if atomic {
                out.push('(');
            }
            out.push_str("(\\");
            out.push_str(param);
            out.push_str(") ");
            print_agent(body, out, true);
            if atomic {
                out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PiAgent {
        parse_pi(s).unwrap()
    }

    fn labels_of(src: &str) -> Vec<String> {
        transitions(&p(src))
            .unwrap()
            .into_iter()
            .map(|(l, _)| format!("{l}"))
            .collect()
    }

    #[test]
    fn parse_shapes() {
        assert_eq!(p("0"), PiAgent::Nil);
        assert_eq!(p("a<b>"), PiAgent::output("a", &["b"]));
        assert_eq!(
            p("a(x).x<x>"),
            PiAgent::input("a", &["x"], PiAgent::output("x", &["x"]))
        );
        assert_eq!(
            p("a<b>.c<d>"),
            PiAgent::output_cont("a", &["b"], PiAgent::output("c", &["d"]))
        );
        assert_eq!(
            p("new a,b. a<b>"),
            PiAgent::res("a", PiAgent::res("b", PiAgent::output("a", &["b"])))
        );
        assert_eq!(
            p("!a(x).x<x>"),
            PiAgent::rep_input("a", &["x"], PiAgent::output("x", &["x"]))
        );
        assert_eq!(
            p("a<b> | c(y).0"),
            PiAgent::par(
                PiAgent::output("a", &["b"]),
                PiAgent::input("c", &["y"], PiAgent::Nil)
            )
        );
        assert_eq!(p("a<>"), PiAgent::output("a", &[]));
        assert_eq!(p("a().0"), PiAgent::input("a", &[], PiAgent::Nil));
        // abstraction and application
        assert_eq!(
            p("((\\q) q(x).0)<a>"),
            PiAgent::apply(
                PiAgent::abs("q", PiAgent::input("q", &["x"], PiAgent::Nil)),
                "a"
            )
        );
        // prefix binds tighter than parallel
        assert_eq!(
            p("a(x).b<x> | c<d>"),
            PiAgent::par(
                PiAgent::input("a", &["x"], PiAgent::output("b", &["x"])),
                PiAgent::output("c", &["d"])
            )
        );
        // new scopes to the right
        assert_eq!(
            p("new a. a<b> | b<a>"),
            PiAgent::res(
                "a",
                PiAgent::par(PiAgent::output("a", &["b"]), PiAgent::output("b", &["a"]))
            )
        );
    }

    #[test]
    fn parse_errors_have_positions() {
        assert!(parse_pi("a<b").is_err());
        assert!(parse_pi("new . 0").is_err());
        assert!(parse_pi("a(x) 0").is_err());
        let e = parse_pi("a<b> |").unwrap_err();
        assert!(e.position >= 5);
    }

    #[test]
    fn free_names_examples() {
        let fv = free_names(&p("new a. (a<b> | c(x).x<a>)"));
        assert_eq!(
            fv,
            ["b", "c"].iter().map(|s| s.to_string()).collect()
        );
        assert!(free_names(&p("(\\q) q(x).y<x>")).contains("y"));
    }

    #[test]
    fn subst_avoids_capture() {
        // (new b. a<b>){b/a} must not capture the incoming b
        let mut sigma = BTreeMap::new();
        sigma.insert("a".to_string(), "b".to_string());
        let r = pi_subst(&p("new b. a<b>"), &sigma);
        if let PiAgent::Res(n, body) = &r {
            assert_ne!(n, "b");
            assert_eq!(
                **body,
                PiAgent::Output {
                    subj: "b".to_string(),
                    args: vec![n.clone()],
                    cont: None
                }
            );
        } else {
            panic!("expected restriction, got {r:?}");
        }
    }

    #[test]
    fn transitions_output() {
        let ts = transitions(&p("a<b>")).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(format!("{}", ts[0].0), "a<b>");
        assert_eq!(ts[0].1, PiAgent::Nil);
    }

    #[test]
    fn transitions_bound_output() {
        let ts = transitions(&p("new b. a<b>")).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(format!("{}", ts[0].0), "(new #0) a<#0>");
        assert_eq!(ts[0].1, PiAgent::Nil);
    }

    #[test]
    fn transitions_com() {
        let ts = transitions(&p("new a. (a<b> | a(x).x<x>)")).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].0, Label::Tau);
        assert_eq!(state_key(&ts[0].1), state_key(&p("b<b>")));
    }

    #[test]
    fn transitions_com_extrudes_scope() {
        // communication of a restricted name re-installs the restriction
        let ts = transitions(&p("new c. (a<c> | 0) | a(x).x<d>")).unwrap();
        let taus: Vec<_> = ts.iter().filter(|(l, _)| *l == Label::Tau).collect();
        assert_eq!(taus.len(), 1);
        assert_eq!(state_key(&taus[0].1), state_key(&p("new c. c<d>")));
    }

    #[test]
    fn transitions_rep_input() {
        let ts = transitions(&p("!a(x).x<x>")).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(format!("{}", ts[0].0), "a(?0)");
        assert_eq!(
            state_key(&ts[0].1),
            state_key(&p("?0<?0> | !a(x).x<x>"))
        );
    }

    #[test]
    fn transitions_rep_output() {
        let ts = transitions(&p("!a<b>.c<d>")).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(format!("{}", ts[0].0), "a<b>");
        assert_eq!(
            state_key(&ts[0].1),
            state_key(&p("c<d> | !a<b>.c<d>"))
        );
    }

    #[test]
    fn restricted_subject_blocked() {
        assert!(transitions(&p("new a. a<b>")).unwrap().is_empty());
        assert!(transitions(&p("new a. a(x).x<x>")).unwrap().is_empty());
    }

    #[test]
    fn input_params_fresh_for_source() {
        // the canonical input parameter must avoid free names of the source
        let mut q = p("a(x).b<x>");
        let mut sigma = BTreeMap::new();
        sigma.insert("b".to_string(), "?0".to_string());
        q = pi_subst(&q, &sigma);
        let ts = transitions(&q).unwrap();
        assert_eq!(format!("{}", ts[0].0), "a(?1)");
    }

    #[test]
    fn application_transitions() {
        let ts = transitions(&p("((\\q) q(x).x<x>)<a>")).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(format!("{}", ts[0].0), "a(?0)");
    }

    #[test]
    fn bare_abstraction_is_not_a_process() {
        assert!(transitions(&p("(\\q) q(x).0")).is_err());
    }

    #[test]
    fn print_parse_roundtrip_examples() {
        for s in [
            "0",
            "a<b>",
            "a(x,y).x<y>",
            "new a,b. (a<b> | !b(x).x<a>)",
            "a<b>.c<d>",
            "!a<b>.0",
            "((\\q) q(x).0)<a>",
            "a<>",
        ] {
            let t = p(s);
            assert_eq!(parse_pi(&print_pi(&t)).unwrap(), t, "roundtrip of {s}");
        }
    }

    #[test]
    fn normalize_laws() {
        // unit, flatten, sort
        assert_eq!(
            state_key(&p("(a<b> | 0) | c<d>")),
            state_key(&p("c<d> | a<b>"))
        );
        // unused restriction dropped
        assert_eq!(state_key(&p("new z. a<b>")), state_key(&p("a<b>")));
        // dead replicated input on a restricted name
        assert_eq!(state_key(&p("new x. !x(q).y<q>")), state_key(&p("0")));
        // dead plain input, dead output
        assert_eq!(state_key(&p("new x. x(q).y<q>")), state_key(&p("0")));
        assert_eq!(state_key(&p("new x. x<y>.a<b>")), state_key(&p("0")));
        // not dead when the name is transmitted
        assert_ne!(
            state_key(&p("new x. (c<x> | !x(q).y<q>)")),
            state_key(&p("new x. c<x>"))
        );
        // application resolved
        assert_eq!(
            state_key(&p("((\\q) q(x).0)<a>")),
            state_key(&p("a(x).0"))
        );
        // alpha canonical
        assert_eq!(
            state_key(&p("new a. a(x).x<b>")),
            state_key(&p("new z. z(w).w<b>"))
        );
    }

    #[test]
    fn normalize_idempotent_examples() {
        for s in [
            "new a. (a<b> | a(x).x<x>)",
            "(a<b> | 0) | new z. (c<d> | z(q).0)",
            "!a(x). (x<b> | new c. c(y).0)",
            "new r,x. (r(z,q).z<q> | r<x,p> | !x(q).y<q>)",
        ] {
            let n = normalize(&p(s));
            assert_eq!(normalize(&n), n, "normalize not idempotent on {s}");
        }
    }

    #[test]
    fn is_async_examples() {
        assert!(p("a<b> | !c(x).x<y>").is_async());
        assert!(!p("a<b>.0").is_async());
        assert!(!p("!a<b>.0").is_async());
    }

    #[test]
    fn sort_check_example() {
        let mut s = Sorting::default();
        s.obj.insert("Loc".into(), vec!["Var".into(), "Loc".into()]);
        s.obj.insert("Var".into(), vec!["Loc".into()]);
        s.sort_of.insert("p".into(), "Loc".into());
        let asn = sort_check(&p("p<x,q>"), &s).unwrap();
        assert_eq!(asn.get("p").map(String::as_str), Some("Loc"));
        assert_eq!(asn.get("x").map(String::as_str), Some("Var"));
        assert_eq!(asn.get("q").map(String::as_str), Some("Loc"));
    }

    #[test]
    fn sort_check_arity_mismatch() {
        let mut s = Sorting::default();
        s.obj.insert("Loc".into(), vec!["Var".into(), "Loc".into()]);
        s.obj.insert("Var".into(), vec!["Loc".into()]);
        s.sort_of.insert("p".into(), "Loc".into());
        let e = sort_check(&p("p<x>"), &s).unwrap_err();
        assert!(e.message.contains("arity"));
    }

    #[test]
    fn sort_check_infers_through_binders() {
        let mut s = Sorting::default();
        s.obj.insert("Loc".into(), vec!["Var".into(), "Loc".into()]);
        s.obj.insert("Var".into(), vec!["Loc".into()]);
        s.sort_of.insert("p".into(), "Loc".into());
        // p(x,q).x<q>: x gets Var, q gets Loc, and x<q> agrees
        assert!(sort_check(&p("p(x,q).x<q>"), &s).is_ok());
        // p(x,q).q<x>: q is Loc, so q carries (Var,Loc), a single x has wrong arity
        assert!(sort_check(&p("p(x,q).q<x>"), &s).is_err());
    }

    // property tests ------------------------------------------------------

    fn arb_name() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["a", "b", "c", "x", "y", "z"])
            .prop_map(|s| s.to_string())
    }

    fn arb_agent() -> impl Strategy<Value = PiAgent> {
        let leaf = prop_oneof![
            Just(PiAgent::Nil),
            (arb_name(), prop::collection::vec(arb_name(), 0..3)).prop_map(|(s, args)| {
                PiAgent::Output {
                    subj: s,
                    args,
                    cont: None,
                }
            }),
        ];
        leaf.prop_recursive(3, 24, 4, |inner| {
            prop_oneof![
                (arb_name(), prop::collection::vec(arb_name(), 0..3), inner.clone())
                    .prop_map(|(s, ps, c)| PiAgent::Input {
                        subj: s,
                        params: ps,
                        cont: Box::new(c),
                    }),
                (arb_name(), prop::collection::vec(arb_name(), 0..3), inner.clone())
                    .prop_map(|(s, ps, c)| PiAgent::RepInput {
                        subj: s,
                        params: ps,
                        cont: Box::new(c),
                    }),
                (arb_name(), prop::collection::vec(arb_name(), 0..3), inner.clone())
                    .prop_map(|(s, args, c)| PiAgent::Output {
                        subj: s,
                        args,
                        cont: Some(Box::new(c)),
                    }),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| PiAgent::par(l, r)),
                (arb_name(), inner).prop_map(|(n, b)| PiAgent::Res(n, Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(a in arb_agent()) {
            let printed = print_pi(&a);
            let back = parse_pi(&printed).unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn normalize_idempotent(a in arb_agent()) {
            let n = normalize(&a);
            prop_assert_eq!(normalize(&n), n);
        }

        #[test]
        fn normalize_preserves_free_names_modulo_gc(a in arb_agent()) {
            // gc only removes names, never invents them
            let n = normalize(&a);
            prop_assert!(free_names(&n).is_subset(&free_names(&a)));
        }

        #[test]
        fn transitions_deterministic(a in arb_agent()) {
            let t1 = transitions(&a).unwrap();
            let t2 = transitions(&a).unwrap();
            prop_assert_eq!(t1, t2);
        }

        #[test]
        fn label_bound_names_fresh(a in arb_agent()) {
            let fns = free_names(&a);
            for (label, _) in transitions(&a).unwrap() {
                for b in label.bound_names() {
                    prop_assert!(!fns.contains(&b));
                }
            }
        }

        #[test]
        fn normalize_alpha_invariant(a in arb_agent()) {
            let renamed = rename_bound_canonical(&a);
            prop_assert_eq!(state_key(&a), state_key(&renamed));
        }
    }
}
