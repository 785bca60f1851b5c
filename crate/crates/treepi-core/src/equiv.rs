//! Bounded behavioural checks: strong/weak bisimilarity, expansion and its
//! divergence-sensitive variant, barbs, divergence, a bounded may/must
//! harness, and an up-to-candidate certificate checker.
//!
//! Every check is three-valued. `Proved` is only reported when the explored
//! state spaces closed within the configured bounds; `Refuted` verdicts carry
//! a witness that replays against the transition system.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::pi::{
    alpha_key, free_names, normalize, pi_subst, print_pi, transitions, Label, Name, PiAgent,
    PiError,
};

/// Budgets for all bounded checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    /// Cap on distinct canonical states per explored process.
    pub max_states: usize,
    /// Cap on tau steps inside one weak move (and one tau closure).
    pub tau_budget: usize,
    /// Cap on greatest-fixpoint refinement rounds.
    pub max_rounds: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_states: 4096,
            tau_budget: 64,
            max_rounds: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// One attacker move in a refutation: from the pair `(left, right)`, the
/// process on `side` performs `label` reaching `successor`, and the other
/// side has no adequate answer (directly or further down the trace).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessStep {
    pub side: Side,
    pub left: PiAgent,
    pub right: PiAgent,
    pub label: Label,
    pub successor: PiAgent,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Witness {
    pub steps: Vec<WitnessStep>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Proved,
    Refuted(Witness),
    Unknown(String),
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved)
    }
    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted(_))
    }
    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Proved => "Proved",
            Verdict::Refuted(_) => "Refuted",
            Verdict::Unknown(_) => "Unknown",
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.kind())
    }
}

// ---------------------------------------------------------------------------
// lazily explored transition graph over canonical states
// ---------------------------------------------------------------------------

struct Lts {
    states: Vec<PiAgent>,
    keys: BTreeMap<String, usize>,
    succs: Vec<Option<Vec<(Label, usize)>>>,
    tau_closures: Vec<Option<(Vec<usize>, bool)>>,
    /// finite input-instantiation universe; empty = symbolic input labels
    universe: Vec<Name>,
    max_states: usize,
    truncated: bool,
    error: Option<PiError>,
}

impl Lts {
    fn new(p: &PiAgent, max_states: usize, universe: Vec<Name>) -> Lts {
        let mut lts = Lts {
            states: Vec::new(),
            keys: BTreeMap::new(),
            succs: Vec::new(),
            tau_closures: Vec::new(),
            universe,
            max_states,
            truncated: false,
            error: None,
        };
        lts.intern(normalize(p));
        lts
    }

    fn intern(&mut self, normalized: PiAgent) -> Option<usize> {
        let key = print_pi(&normalized);
        if let Some(&i) = self.keys.get(&key) {
            return Some(i);
        }
        if self.states.len() >= self.max_states {
            self.truncated = true;
            return None;
        }
        let i = self.states.len();
        self.states.push(normalized);
        self.keys.insert(key, i);
        self.succs.push(None);
        self.tau_closures.push(None);
        Some(i)
    }

    /// Successor moves of a state: transitions with inputs instantiated over
    /// the universe when one is set. Returns None if the state table filled
    /// up before all successors could be interned.
    fn succ(&mut self, i: usize) -> Option<Vec<(Label, usize)>> {
        if let Some(s) = &self.succs[i] {
            return Some(s.clone());
        }
        let moves = match moves_of(&self.states[i], &self.universe) {
            Ok(m) => m,
            Err(e) => {
                self.error = Some(e);
                self.truncated = true;
                return None;
            }
        };
        let mut out = Vec::with_capacity(moves.len());
        for (label, succ) in moves {
            match self.intern(normalize(&succ)) {
                Some(j) => out.push((label, j)),
                None => return None,
            }
        }
        out.sort();
        out.dedup();
        self.succs[i] = Some(out.clone());
        Some(out)
    }

    /// States reachable by at most `budget` tau steps, including `i`.
    /// The flag is false when the closure was cut off by any bound.
    fn tau_closure(&mut self, i: usize, budget: usize) -> (Vec<usize>, bool) {
        if let Some(c) = &self.tau_closures[i] {
            return c.clone();
        }
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        seen.insert(i);
        let mut frontier = vec![i];
        let mut complete = true;
        for _ in 0..budget {
            if frontier.is_empty() {
                break;
            }
            let mut next = Vec::new();
            for s in frontier.drain(..) {
                match self.succ(s) {
                    Some(edges) => {
                        for (l, t) in edges {
                            if l == Label::Tau && seen.insert(t) {
                                next.push(t);
                            }
                        }
                    }
                    None => complete = false,
                }
            }
            frontier = next;
        }
        if !frontier.is_empty() {
            complete = false;
        }
        let res = (seen.into_iter().collect::<Vec<_>>(), complete);
        self.tau_closures[i] = Some(res.clone());
        res
    }

    /// Tau-lasso search from state `i`: Proved on a cycle, Refuted when the
    /// tau-reachable region is closed and acyclic, Unknown otherwise.
    fn diverges_from(&mut self, i: usize) -> Verdict {
        // iterative DFS with colouring for cycle detection
        let mut colour: BTreeMap<usize, u8> = BTreeMap::new(); // 1 = on stack, 2 = done
        let mut stack: Vec<(usize, usize, Vec<usize>)> = Vec::new();
        let mut complete = true;
        let tsuccs = |lts: &mut Lts, s: usize, complete: &mut bool| -> Vec<usize> {
            match lts.succ(s) {
                Some(edges) => edges
                    .into_iter()
                    .filter(|(l, _)| *l == Label::Tau)
                    .map(|(_, t)| t)
                    .collect(),
                None => {
                    *complete = false;
                    Vec::new()
                }
            }
        };
        let first = tsuccs(self, i, &mut complete);
        colour.insert(i, 1);
        stack.push((i, 0, first));
        while let Some((s, idx, succs)) = stack.last_mut() {
            if *idx >= succs.len() {
                colour.insert(*s, 2);
                stack.pop();
                continue;
            }
            let t = succs[*idx];
            *idx += 1;
            match colour.get(&t).copied() {
                Some(1) => return Verdict::Proved,
                Some(_) => {}
                None => {
                    let next = tsuccs(self, t, &mut complete);
                    colour.insert(t, 1);
                    stack.push((t, 0, next));
                }
            }
        }
        if complete {
            Verdict::Refuted(Witness {
                steps: Vec::new(),
                reason: "tau-reachable region is closed and acyclic".to_owned(),
            })
        } else {
            Verdict::Unknown("tau region exceeded state budget".to_owned())
        }
    }
}

/// Raw moves of a state. With a non-empty universe, input transitions are
/// instantiated early-style: each parameter ranges over the whole universe.
fn moves_of(p: &PiAgent, universe: &[Name]) -> Result<Vec<(Label, PiAgent)>, PiError> {
    let base = transitions(p)?;
    if universe.is_empty() {
        return Ok(base);
    }
    let mut out = Vec::new();
    for (label, succ) in base {
        match &label {
            Label::In { subj, params } if !params.is_empty() => {
                let mut tuples: Vec<Vec<Name>> = vec![Vec::new()];
                for _ in 0..params.len() {
                    let mut next = Vec::new();
                    for t in &tuples {
                        for u in universe {
                            let mut t2 = t.clone();
                            t2.push(u.clone());
                            next.push(t2);
                        }
                    }
                    tuples = next;
                }
                for tuple in tuples {
                    let sigma: BTreeMap<Name, Name> = params
                        .iter()
                        .cloned()
                        .zip(tuple.iter().cloned())
                        .collect();
                    out.push((
                        Label::In {
                            subj: subj.clone(),
                            params: tuple,
                        },
                        pi_subst(&succ, &sigma),
                    ));
                }
            }
            _ => out.push((label, succ)),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// explore
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Graph {
    pub states: Vec<PiAgent>,
    pub edges: Vec<(usize, Label, usize)>,
    pub initial: usize,
    pub complete: bool,
}

/// BFS over normalize-canonical states, bounded by `max_states`.
pub fn explore(p: &PiAgent, b: &Bounds) -> Result<Graph, PiError> {
    explore_with_universe(p, b, Vec::new())
}

pub fn explore_with_universe(
    p: &PiAgent,
    b: &Bounds,
    universe: Vec<Name>,
) -> Result<Graph, PiError> {
    let mut lts = Lts::new(p, b.max_states, universe);
    let mut edges = Vec::new();
    let mut complete = true;
    let mut next = 0usize;
    while next < lts.states.len() {
        match lts.succ(next) {
            Some(es) => {
                for (l, t) in es {
                    edges.push((next, l, t));
                }
            }
            None => complete = false,
        }
        next += 1;
    }
    if let Some(e) = lts.error.take() {
        return Err(e);
    }
    if lts.truncated {
        complete = false;
    }
    Ok(Graph {
        states: lts.states,
        edges,
        initial: 0,
        complete,
    })
}

// ---------------------------------------------------------------------------
// label matching between the two explored graphs
// ---------------------------------------------------------------------------

/// Matches a defender label against an attacker label, allowing the bound
/// names to differ. On success returns the renaming to apply to the
/// defender's successor. `None` means no match.
fn match_label(att: &Label, def: &Label) -> Option<BTreeMap<Name, Name>> {
    match (att, def) {
        (Label::Tau, Label::Tau) => Some(BTreeMap::new()),
        (
            Label::In {
                subj: sa,
                params: pa,
            },
            Label::In {
                subj: sd,
                params: pd,
            },
        ) => {
            if sa != sd || pa.len() != pd.len() {
                return None;
            }
            let mut sigma = BTreeMap::new();
            for (d, a) in pd.iter().zip(pa.iter()) {
                if d == a {
                    continue;
                }
                match sigma.get(d) {
                    Some(prev) if prev != a => return None,
                    _ => {
                        sigma.insert(d.clone(), a.clone());
                    }
                }
            }
            // injectivity of the combined renaming
            let targets: BTreeSet<&Name> = sigma.values().collect();
            if targets.len() != sigma.len() {
                return None;
            }
            Some(sigma)
        }
        (
            Label::Out {
                subj: sa,
                extruded: ea,
                args: aa,
            },
            Label::Out {
                subj: sd,
                extruded: ed,
                args: ad,
            },
        ) => {
            if sa != sd || aa.len() != ad.len() || ea.len() != ed.len() {
                return None;
            }
            let mut sigma = BTreeMap::new();
            for (d, a) in ad.iter().zip(aa.iter()) {
                let d_bound = ed.contains(d);
                let a_bound = ea.contains(a);
                if d_bound != a_bound {
                    return None;
                }
                if !d_bound {
                    if d != a {
                        return None;
                    }
                    continue;
                }
                match sigma.get(d) {
                    Some(prev) if prev != a => return None,
                    _ => {
                        sigma.insert(d.clone(), a.clone());
                    }
                }
            }
            let targets: BTreeSet<&Name> = sigma.values().collect();
            if targets.len() != sigma.len() {
                return None;
            }
            Some(sigma)
        }
        _ => None,
    }
}

/// Renames the defender successor along `sigma`, refusing when a target name
/// is already free in the successor outside the renamed set (which would
/// conflate two distinct names).
fn rename_successor(succ: &PiAgent, sigma: &BTreeMap<Name, Name>) -> Option<PiAgent> {
    if sigma.is_empty() {
        return Some(succ.clone());
    }
    let fns = free_names(succ);
    for (from, to) in sigma {
        if fns.contains(to) && !sigma.contains_key(to) && to != from {
            return None;
        }
    }
    Some(pi_subst(succ, sigma))
}

// ---------------------------------------------------------------------------
// the equivalence game
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Strong,
    Weak,
    Expansion,
    DExpansion,
}

/// How the defender may answer an attacker move.
#[derive(Debug, Clone, Copy)]
enum AnswerKind {
    /// exactly one matching transition
    Strong,
    /// tau* mu tau* for visible mu; tau* (possibly zero steps) for tau
    Weak,
    /// tau* mu tau* for visible mu; at least one tau for tau
    AtLeast,
    /// a single mu step for visible mu; zero or one tau for tau
    AtMostOne,
}

struct Attack {
    side: Side,
    label: Label,
    att_succ: usize,
    /// defender successor states (in the defender's graph)
    replies: Vec<usize>,
    replies_complete: bool,
}

struct PairInfo {
    attacks: Vec<Attack>,
    /// some attack or divergence check could not be fully evaluated
    tainted: bool,
    /// certain divergence mismatch (dexpansion only)
    div_bad: bool,
}

struct Game {
    left: Lts,
    right: Lts,
    mode: Mode,
    bounds: Bounds,
}

impl Game {
    fn lts(&mut self, side: Side) -> &mut Lts {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    fn answer_kind(&self, attacker: Side) -> AnswerKind {
        match self.mode {
            Mode::Strong => AnswerKind::Strong,
            Mode::Weak => AnswerKind::Weak,
            // left is the smaller side: right answers with at least the
            // action, left answers with at most one step
            Mode::Expansion | Mode::DExpansion => match attacker {
                Side::Left => AnswerKind::AtLeast,
                Side::Right => AnswerKind::AtMostOne,
            },
        }
    }

    /// All defender answers to `label` from defender state `j`.
    fn defender_replies(
        &mut self,
        def_side: Side,
        j: usize,
        label: &Label,
        kind: AnswerKind,
    ) -> (Vec<usize>, bool) {
        let budget = self.bounds.tau_budget;
        let mut complete = true;
        let mut out: BTreeSet<usize> = BTreeSet::new();
        let def = self.lts(def_side);
        match kind {
            AnswerKind::Strong => match def.succ(j) {
                Some(edges) => {
                    for (l, t) in edges {
                        if let Some(sigma) = match_label(label, &l) {
                            let succ = def.states[t].clone();
                            if let Some(renamed) = rename_successor(&succ, &sigma) {
                                match def.intern(normalize(&renamed)) {
                                    Some(t2) => {
                                        out.insert(t2);
                                    }
                                    None => complete = false,
                                }
                            }
                        }
                    }
                }
                None => complete = false,
            },
            AnswerKind::AtMostOne => {
                if *label == Label::Tau {
                    out.insert(j);
                }
                match def.succ(j) {
                    Some(edges) => {
                        for (l, t) in edges {
                            if let Some(sigma) = match_label(label, &l) {
                                let succ = def.states[t].clone();
                                if let Some(renamed) = rename_successor(&succ, &sigma) {
                                    match def.intern(normalize(&renamed)) {
                                        Some(t2) => {
                                            out.insert(t2);
                                        }
                                        None => complete = false,
                                    }
                                }
                            }
                        }
                    }
                    None => complete = false,
                }
            }
            AnswerKind::Weak | AnswerKind::AtLeast => {
                let (pre, pre_ok) = def.tau_closure(j, budget);
                complete &= pre_ok;
                if *label == Label::Tau {
                    for &s in &pre {
                        if matches!(kind, AnswerKind::Weak) && s == j {
                            out.insert(s);
                        } else if s != j {
                            out.insert(s);
                        } else {
                            // s == j under AtLeast: only allowed when j is
                            // tau-reachable from itself in >= 1 step
                            match def.succ(j) {
                                Some(edges) => {
                                    let self_loop = edges.iter().any(|(l, t)| {
                                        *l == Label::Tau && {
                                            let (cl, ok) = {
                                                let c = def.tau_closure(*t, budget);
                                                c
                                            };
                                            complete &= ok;
                                            cl.contains(&j)
                                        }
                                    });
                                    if self_loop {
                                        out.insert(j);
                                    }
                                }
                                None => complete = false,
                            }
                        }
                    }
                } else {
                    for &s in &pre.clone() {
                        match def.succ(s) {
                            Some(edges) => {
                                for (l, t) in edges {
                                    if let Some(sigma) = match_label(label, &l) {
                                        let succ = def.states[t].clone();
                                        if let Some(renamed) = rename_successor(&succ, &sigma) {
                                            match def.intern(normalize(&renamed)) {
                                                Some(t2) => {
                                                    let (post, post_ok) =
                                                        def.tau_closure(t2, budget);
                                                    complete &= post_ok;
                                                    out.extend(post);
                                                }
                                                None => complete = false,
                                            }
                                        }
                                    }
                                }
                            }
                            None => complete = false,
                        }
                    }
                }
            }
        }
        (out.into_iter().collect(), complete)
    }

    fn divergence_check(&mut self, i: usize, j: usize) -> (bool, bool) {
        // returns (certainly_bad, uncertain)
        let dq = self.right.diverges_from(j);
        if dq.is_refuted() {
            return (false, false);
        }
        let dp = self.left.diverges_from(i);
        match (dq, dp) {
            (Verdict::Proved, Verdict::Refuted(_)) => (true, false),
            (Verdict::Proved, Verdict::Proved) => (false, false),
            _ => (false, true),
        }
    }

    fn run(&mut self) -> Verdict {
        // pair discovery
        let init = (0usize, 0usize);
        let mut pairs: BTreeMap<(usize, usize), PairInfo> = BTreeMap::new();
        let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
        queue.push_back(init);
        while let Some((i, j)) = queue.pop_front() {
            if pairs.contains_key(&(i, j)) {
                continue;
            }
            let mut info = PairInfo {
                attacks: Vec::new(),
                tainted: false,
                div_bad: false,
            };
            if self.mode == Mode::DExpansion {
                let (bad, uncertain) = self.divergence_check(i, j);
                info.div_bad = bad;
                info.tainted |= uncertain;
            }
            if !info.div_bad {
                for att_side in [Side::Left, Side::Right] {
                    let (att_state, def_state) = match att_side {
                        Side::Left => (i, j),
                        Side::Right => (j, i),
                    };
                    let kind = self.answer_kind(att_side);
                    let moves = match self.lts(att_side).succ(att_state) {
                        Some(m) => m,
                        None => {
                            info.tainted = true;
                            continue;
                        }
                    };
                    for (label, att_succ) in moves {
                        let (replies, replies_complete) = self.defender_replies(
                            att_side.flip(),
                            def_state,
                            &label,
                            kind,
                        );
                        for &r in &replies {
                            let pair = match att_side {
                                Side::Left => (att_succ, r),
                                Side::Right => (r, att_succ),
                            };
                            if !pairs.contains_key(&pair) {
                                queue.push_back(pair);
                            }
                        }
                        info.attacks.push(Attack {
                            side: att_side,
                            label,
                            att_succ,
                            replies,
                            replies_complete,
                        });
                    }
                }
            }
            pairs.insert((i, j), info);
        }
        // greatest-fixpoint refinement; removal is always certain
        let mut removed: BTreeMap<(usize, usize), (usize, usize, usize)> = BTreeMap::new();
        // value: (round, attack index, 0) — attack index usize::MAX marks a
        // divergence kill
        for (&pq, info) in &pairs {
            if info.div_bad {
                removed.insert(pq, (0, usize::MAX, 0));
            }
        }
        let mut rounds_exhausted = false;
        let mut round = 1usize;
        loop {
            if round > self.bounds.max_rounds {
                rounds_exhausted = true;
                break;
            }
            let mut changed = false;
            for (&pq, info) in &pairs {
                if removed.contains_key(&pq) {
                    continue;
                }
                for (ai, att) in info.attacks.iter().enumerate() {
                    if !att.replies_complete {
                        continue; // cannot be certain the defender is stuck
                    }
                    let answered = att.replies.iter().any(|&r| {
                        let pair = match att.side {
                            Side::Left => (att.att_succ, r),
                            Side::Right => (r, att.att_succ),
                        };
                        !removed.contains_key(&pair)
                    });
                    if !answered {
                        removed.insert(pq, (round, ai, 0));
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
            round += 1;
        }
        if removed.contains_key(&init) {
            return Verdict::Refuted(self.build_witness(&pairs, &removed, init));
        }
        // Proved needs full certainty on the surviving portion
        let truncated = self.left.truncated || self.right.truncated;
        let uncertain = pairs.iter().any(|(pq, info)| {
            !removed.contains_key(pq)
                && (info.tainted
                    || info
                        .attacks
                        .iter()
                        .any(|a| !att_has_live_reply_or_complete(a, &removed)))
        });
        if truncated {
            return Verdict::Unknown("state budget exceeded".to_owned());
        }
        if rounds_exhausted {
            return Verdict::Unknown("refinement round budget exceeded".to_owned());
        }
        if uncertain {
            return Verdict::Unknown("tau budget exceeded inside a weak move".to_owned());
        }
        Verdict::Proved
    }

    fn build_witness(
        &self,
        pairs: &BTreeMap<(usize, usize), PairInfo>,
        removed: &BTreeMap<(usize, usize), (usize, usize, usize)>,
        init: (usize, usize),
    ) -> Witness {
        let mut steps = Vec::new();
        let mut cur = init;
        let reason;
        loop {
            let (round, ai, _) = removed[&cur];
            let info = &pairs[&cur];
            if ai == usize::MAX {
                reason = "right side diverges, left side does not".to_owned();
                break;
            }
            let att = &info.attacks[ai];
            steps.push(WitnessStep {
                side: att.side,
                left: self.left.states[cur.0].clone(),
                right: self.right.states[cur.1].clone(),
                label: att.label.clone(),
                successor: match att.side {
                    Side::Left => self.left.states[att.att_succ].clone(),
                    Side::Right => self.right.states[att.att_succ].clone(),
                },
            });
            if att.replies.is_empty() {
                reason = format!("no answer to {} on the other side", att.label);
                break;
            }
            // follow the reply whose pair died earliest
            let next = att
                .replies
                .iter()
                .map(|&r| match att.side {
                    Side::Left => (att.att_succ, r),
                    Side::Right => (r, att.att_succ),
                })
                .min_by_key(|p| removed.get(p).map(|(r, _, _)| *r).unwrap_or(usize::MAX))
                .unwrap();
            if removed.get(&next).map(|(r, _, _)| *r >= round).unwrap_or(true) {
                reason = "every answer leads to a distinguished pair".to_owned();
                break;
            }
            cur = next;
        }
        Witness { steps, reason }
    }
}

fn att_has_live_reply_or_complete(
    a: &Attack,
    removed: &BTreeMap<(usize, usize), (usize, usize, usize)>,
) -> bool {
    if a.replies_complete {
        return true;
    }
    a.replies.iter().any(|&r| {
        let pair = match a.side {
            Side::Left => (a.att_succ, r),
            Side::Right => (r, a.att_succ),
        };
        !removed.contains_key(&pair)
    })
}

fn game_universe(p: &PiAgent, q: &PiAgent) -> Vec<Name> {
    if p.is_async() && q.is_async() {
        return Vec::new();
    }
    // early-style finite instantiation for the synchronous fragment: the
    // free names of both processes plus a few reserved fresh names
    let mut names: BTreeSet<Name> = free_names(p);
    names.extend(free_names(q));
    let mut out: Vec<Name> = names.iter().cloned().collect();
    let mut i = 0usize;
    let mut fresh = 0usize;
    while fresh < 2 {
        let cand = format!("?u{i}");
        i += 1;
        if !names.contains(&cand) {
            out.push(cand);
            fresh += 1;
        }
    }
    out
}

fn run_game(p: &PiAgent, q: &PiAgent, b: &Bounds, mode: Mode) -> Verdict {
    if !p.is_process() || !q.is_process() {
        return Verdict::Unknown("not a process".to_owned());
    }
    let universe = game_universe(p, q);
    let mut game = Game {
        left: Lts::new(p, b.max_states, universe.clone()),
        right: Lts::new(q, b.max_states, universe),
        mode,
        bounds: b.clone(),
    };
    let verdict = game.run();
    if let Some(e) = game.left.error.or(game.right.error) {
        return Verdict::Unknown(format!("{e}"));
    }
    verdict
}

pub fn strong_bisim(p: &PiAgent, q: &PiAgent, b: &Bounds) -> Verdict {
    run_game(p, q, b, Mode::Strong)
}

pub fn weak_bisim(p: &PiAgent, q: &PiAgent, b: &Bounds) -> Verdict {
    run_game(p, q, b, Mode::Weak)
}

/// Checks P <= Q in the expansion preorder: Q can simulate P using at least
/// as many steps, P simulates Q using at most one step per move.
pub fn expansion_leq(p: &PiAgent, q: &PiAgent, b: &Bounds) -> Verdict {
    run_game(p, q, b, Mode::Expansion)
}

/// Expansion plus divergence sensitivity: whenever (a reachable) Q diverges,
/// the matching P must diverge.
pub fn dexpansion_leq(p: &PiAgent, q: &PiAgent, b: &Bounds) -> Verdict {
    run_game(p, q, b, Mode::DExpansion)
}

// ---------------------------------------------------------------------------
// barbs, divergence, may/must harness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BarbReport {
    pub sync: Verdict,
    pub async_barb: Verdict,
}

/// Reachability (through tau steps) of any visible action (sync) or of any
/// output action (async).
pub fn barbs(p: &PiAgent, b: &Bounds) -> BarbReport {
    let mut lts = Lts::new(p, b.max_states, Vec::new());
    let mut sync_found = false;
    let mut async_found = false;
    let mut complete = true;
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut queue = VecDeque::new();
    queue.push_back(0usize);
    seen.insert(0);
    while let Some(s) = queue.pop_front() {
        match lts.succ(s) {
            Some(edges) => {
                for (l, t) in edges {
                    match l {
                        Label::Tau => {
                            if seen.insert(t) {
                                queue.push_back(t);
                            }
                        }
                        Label::In { .. } => sync_found = true,
                        Label::Out { .. } => {
                            sync_found = true;
                            async_found = true;
                        }
                    }
                }
            }
            None => complete = false,
        }
        if sync_found && async_found {
            break;
        }
    }
    let verdict = |found: bool| -> Verdict {
        if found {
            Verdict::Proved
        } else if complete {
            Verdict::Refuted(Witness {
                steps: Vec::new(),
                reason: "no such action reachable in the complete graph".to_owned(),
            })
        } else {
            Verdict::Unknown("graph incomplete and no such action found".to_owned())
        }
    };
    BarbReport {
        sync: verdict(sync_found),
        async_barb: verdict(async_found),
    }
}

/// Tau-lasso search: Proved on a cycle, Refuted when the tau-reachable
/// region is closed and acyclic, Unknown otherwise.
pub fn diverges(p: &PiAgent, b: &Bounds) -> Verdict {
    if !p.is_process() {
        return Verdict::Unknown("not a process".to_owned());
    }
    let mut lts = Lts::new(p, b.max_states, Vec::new());
    let v = lts.diverges_from(0);
    if let Some(e) = lts.error {
        return Verdict::Unknown(format!("{e}"));
    }
    v
}

/// Replaces every hole of a process context with `fill`.
pub fn fill_hole(ctx: &PiAgent, fill: &PiAgent) -> PiAgent {
    map_holes(ctx, &|_| fill.clone())
}

fn map_holes(a: &PiAgent, f: &dyn Fn(usize) -> PiAgent) -> PiAgent {
    match a {
        PiAgent::Hole(i) => f(*i),
        PiAgent::Nil => PiAgent::Nil,
        PiAgent::Input { subj, params, cont } => PiAgent::Input {
            subj: subj.clone(),
            params: params.clone(),
            cont: alloc::boxed::Box::new(map_holes(cont, f)),
        },
        PiAgent::RepInput { subj, params, cont } => PiAgent::RepInput {
            subj: subj.clone(),
            params: params.clone(),
            cont: alloc::boxed::Box::new(map_holes(cont, f)),
        },
        PiAgent::Output { subj, args, cont } => PiAgent::Output {
            subj: subj.clone(),
            args: args.clone(),
            cont: cont
                .as_ref()
                .map(|c| alloc::boxed::Box::new(map_holes(c, f))),
        },
        PiAgent::RepOutput { subj, args, cont } => PiAgent::RepOutput {
            subj: subj.clone(),
            args: args.clone(),
            cont: alloc::boxed::Box::new(map_holes(cont, f)),
        },
        PiAgent::Par(l, r) => PiAgent::par(map_holes(l, f), map_holes(r, f)),
        PiAgent::Res(n, body) => PiAgent::Res(n.clone(), alloc::boxed::Box::new(map_holes(body, f))),
        PiAgent::Apply { fun, arg } => PiAgent::Apply {
            fun: alloc::boxed::Box::new(map_holes(fun, f)),
            arg: arg.clone(),
        },
        PiAgent::Abs { param, body } => PiAgent::Abs {
            param: param.clone(),
            body: alloc::boxed::Box::new(map_holes(body, f)),
        },
    }
}

/// Bounded may-testing refutation: some context separates the processes on
/// reachability of a visible action. Never Proves.
pub fn may_harness(p: &PiAgent, q: &PiAgent, contexts: &[PiAgent], b: &Bounds) -> Verdict {
    for ctx in contexts {
        let cp = barbs(&fill_hole(ctx, p), b);
        let cq = barbs(&fill_hole(ctx, q), b);
        let separated = |a: &Verdict, b2: &Verdict| {
            (a.is_proved() && b2.is_refuted()) || (a.is_refuted() && b2.is_proved())
        };
        if separated(&cp.sync, &cq.sync) {
            return Verdict::Refuted(Witness {
                steps: Vec::new(),
                reason: format!("context {} separates barbs", print_pi(ctx)),
            });
        }
    }
    Verdict::Unknown("no separating context found; may testing is not enumerable".to_owned())
}

/// Bounded must-variant: additionally separates on divergence. Never Proves.
pub fn must_harness(p: &PiAgent, q: &PiAgent, contexts: &[PiAgent], b: &Bounds) -> Verdict {
    for ctx in contexts {
        let cp = fill_hole(ctx, p);
        let cq = fill_hole(ctx, q);
        let dp = diverges(&cp, b);
        let dq = diverges(&cq, b);
        if (dp.is_proved() && dq.is_refuted()) || (dp.is_refuted() && dq.is_proved()) {
            return Verdict::Refuted(Witness {
                steps: Vec::new(),
                reason: format!("context {} separates divergence", print_pi(ctx)),
            });
        }
        let bp = barbs(&cp, b);
        let bq = barbs(&cq, b);
        if (bp.sync.is_proved() && bq.sync.is_refuted())
            || (bp.sync.is_refuted() && bq.sync.is_proved())
        {
            return Verdict::Refuted(Witness {
                steps: Vec::new(),
                reason: format!("context {} separates barbs", print_pi(ctx)),
            });
        }
    }
    Verdict::Unknown("no separating context found; must testing is not enumerable".to_owned())
}

// ---------------------------------------------------------------------------
// up-to-candidate certificate checking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoleFlag {
    /// the two fills must be related by the supplied equivalence oracle
    ClaimEquiv,
    /// the two fills must occur as a pair of the candidate relation
    InRelation,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub pair_index: usize,
    pub side: Side,
    pub label: Label,
    pub successor: PiAgent,
    /// the defender's state after the claimed weak answer
    pub answer: PiAgent,
    /// context with indexed holes; each index occurs exactly once
    pub context: PiAgent,
    pub fill_left: Vec<PiAgent>,
    pub fill_right: Vec<PiAgent>,
    pub hole_flags: Vec<HoleFlag>,
    /// substitutions to re-test for holes occurring under an input prefix
    pub subst_tests: Vec<BTreeMap<Name, Name>>,
}

#[derive(Debug, Clone, Default)]
pub struct UpToCandidate {
    pub pairs: Vec<(PiAgent, PiAgent)>,
    pub certificates: Vec<Certificate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeqKind {
    Expansion,
    DExpansion,
}

fn leq_check(kind: LeqKind, p: &PiAgent, q: &PiAgent, b: &Bounds) -> Verdict {
    match kind {
        LeqKind::Expansion => expansion_leq(p, q, b),
        LeqKind::DExpansion => dexpansion_leq(p, q, b),
    }
}

fn fill_indexed(ctx: &PiAgent, fills: &[PiAgent]) -> PiAgent {
    map_holes(ctx, &|i| fills.get(i).cloned().unwrap_or(PiAgent::Hole(i)))
}

fn hole_indices(ctx: &PiAgent) -> BTreeSet<usize> {
    fn walk(a: &PiAgent, out: &mut BTreeSet<usize>) {
        match a {
            PiAgent::Hole(i) => {
                out.insert(*i);
            }
            PiAgent::Nil => {}
            PiAgent::Input { cont, .. }
            | PiAgent::RepInput { cont, .. }
            | PiAgent::RepOutput { cont, .. } => walk(cont, out),
            PiAgent::Output { cont, .. } => {
                if let Some(c) = cont {
                    walk(c, out);
                }
            }
            PiAgent::Par(l, r) => {
                walk(l, out);
                walk(r, out);
            }
            PiAgent::Res(_, b) => walk(b, out),
            PiAgent::Apply { fun, .. } => walk(fun, out),
            PiAgent::Abs { body, .. } => walk(body, out),
        }
    }
    let mut out = BTreeSet::new();
    walk(ctx, &mut out);
    out
}

/// Hole indices that occur under an input prefix of the context.
pub fn holes_under_input(ctx: &PiAgent) -> BTreeSet<usize> {
    fn walk(a: &PiAgent, under: bool, out: &mut BTreeSet<usize>) {
        match a {
            PiAgent::Hole(i) => {
                if under {
                    out.insert(*i);
                }
            }
            PiAgent::Nil => {}
            PiAgent::Input { cont, .. } | PiAgent::RepInput { cont, .. } => {
                walk(cont, true, out)
            }
            PiAgent::Output { cont, .. } => {
                if let Some(c) = cont {
                    walk(c, under, out);
                }
            }
            PiAgent::RepOutput { cont, .. } => walk(cont, under, out),
            PiAgent::Par(l, r) => {
                walk(l, under, out);
                walk(r, under, out);
            }
            PiAgent::Res(_, b) => walk(b, under, out),
            PiAgent::Apply { fun, .. } => walk(fun, under, out),
            PiAgent::Abs { body, .. } => walk(body, under, out),
        }
    }
    let mut out = BTreeSet::new();
    walk(ctx, false, &mut out);
    out
}

fn in_relation(pairs: &[(PiAgent, PiAgent)], l: &PiAgent, r: &PiAgent) -> bool {
    let (kl, kr) = (alpha_key(&normalize(l)), alpha_key(&normalize(r)));
    pairs
        .iter()
        .any(|(a, b)| alpha_key(&normalize(a)) == kl && alpha_key(&normalize(b)) == kr)
}

/// Verifies whether a claimed weak answer `answer` is reachable from `from`
/// by a (possibly empty for tau) weak move with label `label`.
fn weak_answer_reaches(from: &PiAgent, label: &Label, answer: &PiAgent, b: &Bounds) -> bool {
    let mut lts = Lts::new(from, b.max_states, Vec::new());
    let target = print_pi(&normalize(answer));
    let (pre, _) = lts.tau_closure(0, b.tau_budget);
    if *label == Label::Tau {
        return pre.iter().any(|&s| print_pi(&lts.states[s]) == target);
    }
    for &s in &pre.clone() {
        if let Some(edges) = lts.succ(s) {
            for (l, t) in edges {
                if let Some(sigma) = match_label(label, &l) {
                    if let Some(renamed) = rename_successor(&lts.states[t].clone(), &sigma) {
                        if let Some(t2) = lts.intern(normalize(&renamed)) {
                            let (post, _) = lts.tau_closure(t2, b.tau_budget);
                            if post.iter().any(|&u| print_pi(&lts.states[u]) == target) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
    }
    false
}

/// Checks an up-to candidate: every transition of every pair must carry a
/// certificate whose weak answer replays, whose context decomposition is
/// below both successors in the chosen preorder, and whose hole fills
/// satisfy their flags (re-tested under the supplied substitutions when a
/// hole sits under an input prefix).
pub fn check_up_to(
    c: &UpToCandidate,
    leq: LeqKind,
    equiv_oracle: fn(&PiAgent, &PiAgent, &Bounds) -> Verdict,
    b: &Bounds,
) -> Verdict {
    for (pi, (p, q)) in c.pairs.iter().enumerate() {
        for side in [Side::Left, Side::Right] {
            let (mover, other) = match side {
                Side::Left => (p, q),
                Side::Right => (q, p),
            };
            let moved = match transitions(&normalize(mover)) {
                Ok(m) => m,
                Err(e) => return Verdict::Unknown(format!("{e}")),
            };
            for (label, succ) in moved {
                let succ_n = normalize(&succ);
                let cert = c.certificates.iter().find(|cert| {
                    cert.pair_index == pi
                        && cert.side == side
                        && cert.label == label
                        && alpha_key(&normalize(&cert.successor)) == alpha_key(&succ_n)
                });
                let cert = match cert {
                    Some(cc) => cc,
                    None => {
                        return Verdict::Refuted(Witness {
                            steps: Vec::new(),
                            reason: format!(
                                "missing certificate for pair {pi}, move {label}"
                            ),
                        })
                    }
                };
                let holes = hole_indices(&cert.context);
                if holes.len() != cert.fill_left.len()
                    || holes.len() != cert.fill_right.len()
                    || holes.len() != cert.hole_flags.len()
                {
                    return Verdict::Refuted(Witness {
                        steps: Vec::new(),
                        reason: format!("hole-count mismatch in certificate for pair {pi}"),
                    });
                }
                // 1. the claimed answer must be a real weak move
                if !weak_answer_reaches(&normalize(other), &label, &cert.answer, b) {
                    return Verdict::Refuted(Witness {
                        steps: Vec::new(),
                        reason: format!(
                            "claimed answer to {label} does not replay for pair {pi}"
                        ),
                    });
                }
                // 2. successor decompositions: successors sit above C[fills]
                let cl = fill_indexed(&cert.context, &cert.fill_left);
                let cr = fill_indexed(&cert.context, &cert.fill_right);
                let (mover_succ, other_succ) = (&succ_n, &cert.answer);
                let (left_proc, right_proc) = match side {
                    Side::Left => (mover_succ, other_succ),
                    Side::Right => (other_succ, mover_succ),
                };
                for (low, high, what) in
                    [(&cl, left_proc, "left"), (&cr, right_proc, "right")]
                {
                    match leq_check(leq, low, high, b) {
                        Verdict::Proved => {}
                        other_v => {
                            return match other_v {
                                Verdict::Refuted(w) => Verdict::Refuted(Witness {
                                    steps: w.steps,
                                    reason: format!(
                                        "{what} decomposition not below successor (pair {pi}, move {label}): {}",
                                        w.reason
                                    ),
                                }),
                                _ => other_v,
                            }
                        }
                    }
                }
                // 3. hole obligations
                let input_holes = holes_under_input(&cert.context);
                for (hi, &h) in holes.iter().enumerate() {
                    let fl = &cert.fill_left[hi];
                    let fr = &cert.fill_right[hi];
                    let mut variants: Vec<(PiAgent, PiAgent)> = vec![(fl.clone(), fr.clone())];
                    if input_holes.contains(&h) {
                        for sigma in &cert.subst_tests {
                            variants.push((pi_subst(fl, sigma), pi_subst(fr, sigma)));
                        }
                    }
                    for (vl, vr) in variants {
                        let ok = match cert.hole_flags[hi] {
                            HoleFlag::ClaimEquiv => {
                                equiv_oracle(&vl, &vr, b).is_proved()
                            }
                            HoleFlag::InRelation => in_relation(&c.pairs, &vl, &vr),
                        };
                        if !ok {
                            return Verdict::Refuted(Witness {
                                steps: Vec::new(),
                                reason: format!(
                                    "hole {h} obligation failed for pair {pi}, move {label}"
                                ),
                            });
                        }
                    }
                }
            }
        }
    }
    Verdict::Proved
}

// ---------------------------------------------------------------------------
// rendez-vous cancellation
// ---------------------------------------------------------------------------

/// Recognizes `new btilde. (a<ctilde> | b(r).R)` with `b` among the
/// restricted names, every restricted name transmitted in the output, and
/// `a`, `b` not free in `R`; returns `R`.
pub fn strip_rendezvous(p: &PiAgent) -> Option<PiAgent> {
    let mut restricted = Vec::new();
    let mut cur = p;
    while let PiAgent::Res(n, body) = cur {
        restricted.push(n.clone());
        cur = body;
    }
    if restricted.is_empty() {
        return None;
    }
    let (l, r) = match cur {
        PiAgent::Par(l, r) => (l.as_ref(), r.as_ref()),
        _ => return None,
    };
    let try_shape = |outp: &PiAgent, inp: &PiAgent| -> Option<PiAgent> {
        let (a, args) = match outp {
            PiAgent::Output {
                subj,
                args,
                cont: None,
            } => (subj, args),
            _ => return None,
        };
        let (b, params, body) = match inp {
            PiAgent::Input { subj, params, cont } if params.len() == 1 => {
                (subj, params, cont.as_ref())
            }
            _ => return None,
        };
        if !restricted.contains(b) || restricted.contains(a) {
            return None;
        }
        if !restricted.iter().all(|n| args.contains(n)) {
            return None;
        }
        let body_free = free_names(body);
        // a, b fresh to R (the input parameter itself stays free in R)
        if body_free.contains(a) || (body_free.contains(b) && b != &params[0]) {
            return None;
        }
        Some(body.clone())
    };
    try_shape(l, r).or_else(|| try_shape(r, l))
}

/// Replays a refutation witness against the transition system: each step's
/// (label, successor) must be derivable from the step's source pair, and
/// consecutive steps must chain.
pub fn replay_witness(w: &Witness, b: &Bounds) -> bool {
    for step in &w.steps {
        let src = match step.side {
            Side::Left => &step.left,
            Side::Right => &step.right,
        };
        let mut lts = Lts::new(src, b.max_states, game_universe(&step.left, &step.right));
        let target = print_pi(&normalize(&step.successor));
        let found = match lts.succ(0) {
            Some(edges) => edges
                .iter()
                .any(|(l, t)| *l == step.label && print_pi(&lts.states[*t]) == target),
            None => false,
        };
        if !found {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pi::parse_pi;

    fn p(s: &str) -> PiAgent {
        parse_pi(s).unwrap()
    }

    fn b() -> Bounds {
        Bounds::default()
    }

    #[test]
    fn explore_trivial() {
        let g = explore(&p("0"), &b()).unwrap();
        assert_eq!(g.states.len(), 1);
        assert_eq!(g.edges.len(), 0);
        assert!(g.complete);
        let g = explore(&p("a<b>"), &b()).unwrap();
        assert_eq!(g.states.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert!(g.complete);
    }

    #[test]
    fn weak_bisim_examples() {
        assert!(weak_bisim(&p("new a.(a<> | a().0)"), &p("0"), &b()).is_proved());
        assert!(weak_bisim(&p("a<b>"), &p("0"), &b()).is_refuted());
        assert!(weak_bisim(&p("a<b>"), &p("a<b>"), &b()).is_proved());
        // tau-prefixed equal behaviour
        assert!(weak_bisim(
            &p("new i.(i<> | i().a<b>)"),
            &p("a<b>"),
            &b()
        )
        .is_proved());
    }

    #[test]
    fn strong_bisim_examples() {
        assert!(strong_bisim(&p("a<b> | 0"), &p("a<b>"), &b()).is_proved());
        assert!(strong_bisim(&p("a<b>"), &p("0"), &b()).is_refuted());
        assert!(strong_bisim(&p("a<b> | c<d>"), &p("c<d> | a<b>"), &b()).is_proved());
        // strong distinguishes a tau prefix that weak absorbs
        assert!(strong_bisim(&p("new i.(i<> | i().a<b>)"), &p("a<b>"), &b()).is_refuted());
    }

    #[test]
    fn expansion_examples() {
        assert!(expansion_leq(&p("a<b>"), &p("a<b>"), &b()).is_proved());
        // the comm law: P{b/x} <= new a.(a<b> | a(x).P) for P = x<x>
        assert!(expansion_leq(&p("b<b>"), &p("new a.(a<b> | a(x).x<x>)"), &b()).is_proved());
        // direction matters: the left needs a tau the right cannot precede
        assert!(expansion_leq(&p("new a.(a<> | a().b<>)"), &p("b<>"), &b()).is_refuted());
    }

    #[test]
    fn dexpansion_examples() {
        assert!(dexpansion_leq(&p("b<b>"), &p("new a.(a<b> | a(x).x<x>)"), &b()).is_proved());
        assert!(dexpansion_leq(&p("a<b>"), &p("a<b>"), &b()).is_proved());
        // right diverges, left does not
        let omega_ish = "new c.(c<> | !c().c<>)";
        assert!(dexpansion_leq(&p("0"), &p(omega_ish), &b()).is_refuted());
        // left diverging below a diverging right is fine
        assert!(dexpansion_leq(&p(omega_ish), &p(omega_ish), &b()).is_proved());
    }

    #[test]
    fn barbs_examples() {
        let r = barbs(&p("a(x).0"), &b());
        assert!(r.sync.is_proved());
        assert!(r.async_barb.is_refuted());
        let r = barbs(&p("0"), &b());
        assert!(r.sync.is_refuted());
        assert!(r.async_barb.is_refuted());
        let r = barbs(&p("new i.(i<> | i().a<b>)"), &b());
        assert!(r.sync.is_proved());
        assert!(r.async_barb.is_proved());
    }

    #[test]
    fn diverges_examples() {
        assert!(diverges(&p("0"), &b()).is_refuted());
        assert!(diverges(&p("a<b>"), &b()).is_refuted());
        assert!(diverges(&p("new c.(c<> | !c().c<>)"), &b()).is_proved());
    }

    #[test]
    fn may_must_examples() {
        let hole = PiAgent::Hole(0);
        assert!(may_harness(&p("a<b>"), &p("0"), &[hole.clone()], &b()).is_refuted());
        assert!(may_harness(&p("a<b>"), &p("a<b>"), &[hole.clone()], &b()).is_unknown());
        assert!(
            must_harness(&p("0"), &p("new c.(c<> | !c().c<>)"), &[hole], &b()).is_refuted()
        );
    }

    #[test]
    fn witnesses_replay() {
        for (l, r) in [
            ("a<b>", "0"),
            ("a<b>", "a<c>"),
            ("a(x).x<x>", "a(x).0"),
            ("new b. a<b>", "a<c>"),
        ] {
            if let Verdict::Refuted(w) = weak_bisim(&p(l), &p(r), &b()) {
                assert!(replay_witness(&w, &b()), "witness replay failed for {l} vs {r}");
                assert!(!w.steps.is_empty());
            } else {
                panic!("expected refutation for {l} vs {r}");
            }
        }
    }

    #[test]
    fn weak_bisim_symmetric_on_decided() {
        for (l, r) in [("a<b>", "a<b>"), ("a<b>", "0"), ("new a.(a<>|a().0)", "0")] {
            let v1 = weak_bisim(&p(l), &p(r), &b());
            let v2 = weak_bisim(&p(r), &p(l), &b());
            assert_eq!(v1.kind(), v2.kind());
        }
    }

    #[test]
    fn inclusion_chain_examples() {
        // strong => expansion both ways => weak
        let cases = [("a<b> | 0", "a<b>"), ("c<d> | a<b>", "a<b> | c<d>")];
        for (l, r) in cases {
            assert!(strong_bisim(&p(l), &p(r), &b()).is_proved());
            assert!(expansion_leq(&p(l), &p(r), &b()).is_proved());
            assert!(expansion_leq(&p(r), &p(l), &b()).is_proved());
            assert!(weak_bisim(&p(l), &p(r), &b()).is_proved());
        }
    }

    #[test]
    fn sync_fragment_instantiates_inputs() {
        // synchronous outputs force early instantiation; receiving the free
        // name c distinguishes these two
        let l = p("a(x).x<>.0");
        let r = p("a(x).0");
        assert!(weak_bisim(&l, &r, &b()).is_refuted());
    }

    #[test]
    fn strip_rendezvous_examples() {
        let wrapped = p("new b. (a<b,c> | b(z). q<z>)");
        assert_eq!(strip_rendezvous(&wrapped), Some(p("q<z>")));
        assert_eq!(strip_rendezvous(&p("0")), None);
        // a free in R blocks the cancellation
        assert_eq!(strip_rendezvous(&p("new b. (a<b> | b(z). a<z>)")), None);
        // both parallel orders are recognized
        let flipped = p("new b. (b(z). q<z> | a<b,c>)");
        assert_eq!(strip_rendezvous(&flipped), Some(p("q<z>")));
    }

    #[test]
    fn up_to_identity_candidate() {
        let proc = p("new a.(a<b> | a(x).x<x>)");
        let moved = transitions(&normalize(&proc)).unwrap();
        let mut certs = Vec::new();
        for (label, succ) in moved {
            let succ_n = normalize(&succ);
            certs.push(Certificate {
                pair_index: 0,
                side: Side::Left,
                label: label.clone(),
                successor: succ_n.clone(),
                answer: succ_n.clone(),
                context: PiAgent::Hole(0),
                fill_left: vec![succ_n.clone()],
                fill_right: vec![succ_n.clone()],
                hole_flags: vec![HoleFlag::ClaimEquiv],
                subst_tests: Vec::new(),
            });
            certs.push(Certificate {
                pair_index: 0,
                side: Side::Right,
                label,
                successor: succ_n.clone(),
                answer: succ_n.clone(),
                context: PiAgent::Hole(0),
                fill_left: vec![succ_n.clone()],
                fill_right: vec![succ_n],
                hole_flags: vec![HoleFlag::ClaimEquiv],
                subst_tests: Vec::new(),
            });
        }
        let cand = UpToCandidate {
            pairs: vec![(proc.clone(), proc)],
            certificates: certs,
        };
        assert!(check_up_to(&cand, LeqKind::Expansion, weak_bisim, &b()).is_proved());
    }

    #[test]
    fn up_to_missing_certificate_refuted() {
        let cand = UpToCandidate {
            pairs: vec![(p("a<b>"), p("a<b>"))],
            certificates: Vec::new(),
        };
        assert!(check_up_to(&cand, LeqKind::Expansion, weak_bisim, &b()).is_refuted());
    }
}
