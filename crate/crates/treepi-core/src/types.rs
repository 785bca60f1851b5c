//! Linear type system for the asynchronous polyadic π-calculus.
//!
//! Link types carry input/output capabilities, each in a plain (unrestricted)
//! and a linear flavour, plus products, recursive types and type variables.
//! Agents are typed against the behaviour type `proc` (processes) or an
//! abstraction type `L -> proc`. Linear names must be used exactly once on
//! each capability; a linear connection splits into its linear input and
//! linear output halves across a parallel composition.
//!
//! The checker is syntax-directed. Environment splitting at parallel
//! composition backtracks over assignments of the linear names to the two
//! sides (non-linear names are copied to both); recursive types are handled
//! equi-recursively, with type equality and subtyping decided coinductively
//! over unfoldings with a visited-pair memo.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::encode::{encode, Encoding};
use crate::equiv::{Verdict, Witness};
use crate::lambda::LambdaTerm;
use crate::pi::{alpha_key, free_names, transitions, Label, Name, PiAgent};

/// Types: link types, the behaviour type of processes, and abstraction types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PiType {
    /// Basic type `unit`.
    Unit,
    /// Connection `#L`: both capabilities, unrestricted.
    Conn(Box<PiType>),
    /// Input capability `iL`, unrestricted.
    In(Box<PiType>),
    /// Output capability `oL`, unrestricted.
    Out(Box<PiType>),
    /// Linear connection `l#L`: one input and one output use.
    LinConn(Box<PiType>),
    /// Linear input capability `liL`: exactly one input use.
    LinIn(Box<PiType>),
    /// Linear output capability `loL`: exactly one output use.
    LinOut(Box<PiType>),
    /// Product `(L1,...,Ln)` with n >= 2.
    Product(Vec<PiType>),
    /// Type variable.
    TypeVar(String),
    /// Recursive type `mu X. L`; the body must be contractive in `X`.
    Mu(String, Box<PiType>),
    /// Behaviour type of processes, written `proc`.
    Behaviour,
    /// Abstraction type `L -> proc`.
    AbsType(Box<PiType>),
}

impl PiType {
    pub fn conn(t: PiType) -> PiType {
        PiType::Conn(Box::new(t))
    }
    pub fn inp(t: PiType) -> PiType {
        PiType::In(Box::new(t))
    }
    pub fn out(t: PiType) -> PiType {
        PiType::Out(Box::new(t))
    }
    pub fn lin_conn(t: PiType) -> PiType {
        PiType::LinConn(Box::new(t))
    }
    pub fn lin_in(t: PiType) -> PiType {
        PiType::LinIn(Box::new(t))
    }
    pub fn lin_out(t: PiType) -> PiType {
        PiType::LinOut(Box::new(t))
    }
    pub fn mu(x: &str, body: PiType) -> PiType {
        PiType::Mu(x.to_string(), Box::new(body))
    }
    pub fn var(x: &str) -> PiType {
        PiType::TypeVar(x.to_string())
    }
    pub fn abs_type(t: PiType) -> PiType {
        PiType::AbsType(Box::new(t))
    }

    /// Whether the type is linear (possibly under `mu` unfoldings).
    pub fn is_linear(&self) -> bool {
        matches!(
            head(self),
            PiType::LinConn(_) | PiType::LinIn(_) | PiType::LinOut(_)
        )
    }

    /// Whether a `mu`-body is contractive in `x`: every occurrence of `x`
    /// sits under a link-type constructor.
    pub fn is_contractive(&self, x: &str) -> bool {
        match self {
            PiType::TypeVar(y) => y != x,
            PiType::Mu(y, body) => y == x || body.is_contractive(x),
            _ => true,
        }
    }
}

fn type_subst(t: &PiType, x: &str, repl: &PiType) -> PiType {
    match t {
        PiType::Unit | PiType::Behaviour => t.clone(),
        PiType::TypeVar(y) => {
            if y == x {
                repl.clone()
            } else {
                t.clone()
            }
        }
        PiType::Conn(s) => PiType::conn(type_subst(s, x, repl)),
        PiType::In(s) => PiType::inp(type_subst(s, x, repl)),
        PiType::Out(s) => PiType::out(type_subst(s, x, repl)),
        PiType::LinConn(s) => PiType::lin_conn(type_subst(s, x, repl)),
        PiType::LinIn(s) => PiType::lin_in(type_subst(s, x, repl)),
        PiType::LinOut(s) => PiType::lin_out(type_subst(s, x, repl)),
        PiType::Product(ts) => PiType::Product(ts.iter().map(|s| type_subst(s, x, repl)).collect()),
        PiType::Mu(y, body) => {
            if y == x {
                t.clone()
            } else {
                PiType::Mu(y.clone(), Box::new(type_subst(body, x, repl)))
            }
        }
        PiType::AbsType(s) => PiType::abs_type(type_subst(s, x, repl)),
    }
}

/// One unfolding of EQ-UNFOLD: `mu X. T  =  T{mu X. T / X}`.
pub fn unfold(t: &PiType) -> PiType {
    match t {
        PiType::Mu(x, body) => type_subst(body, x, t),
        _ => t.clone(),
    }
}

/// Head-normalizes a type by unfolding top-level `mu` binders (contractive
/// bodies guarantee termination; a depth cap guards pathological input).
pub fn head(t: &PiType) -> PiType {
    let mut cur = t.clone();
    for _ in 0..64 {
        match cur {
            PiType::Mu(_, _) => cur = unfold(&cur),
            _ => return cur,
        }
    }
    cur
}

fn render(t: &PiType, out: &mut String) {
    match t {
        PiType::Unit => out.push_str("unit"),
        PiType::Behaviour => out.push_str("proc"),
        PiType::Conn(s) => {
            out.push('#');
            render(s, out);
        }
        PiType::In(s) => {
            out.push('i');
            render(s, out);
        }
        PiType::Out(s) => {
            out.push('o');
            render(s, out);
        }
        PiType::LinConn(s) => {
            out.push_str("l#");
            render(s, out);
        }
        PiType::LinIn(s) => {
            out.push_str("li");
            render(s, out);
        }
        PiType::LinOut(s) => {
            out.push_str("lo");
            render(s, out);
        }
        PiType::Product(ts) => {
            out.push('(');
            for (i, s) in ts.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                render(s, out);
            }
            out.push(')');
        }
        PiType::TypeVar(x) => out.push_str(x),
        PiType::Mu(x, body) => {
            out.push_str("mu ");
            out.push_str(x);
            out.push_str(". ");
            render(body, out);
        }
        PiType::AbsType(s) => {
            render(s, out);
            out.push_str(" -> proc");
        }
    }
}

impl core::fmt::Display for PiType {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let mut s = String::new();
        render(self, &mut s);
        write!(f, "{s}")
    }
}

/// Coinductive type equality up to EQ-UNFOLD: compare head-normal forms,
/// assuming already-visited pairs equal.
pub fn type_eq(s: &PiType, t: &PiType) -> bool {
    let mut memo = BTreeSet::new();
    eq_rec(s, t, &mut memo)
}

fn eq_rec(s: &PiType, t: &PiType, memo: &mut BTreeSet<(String, String)>) -> bool {
    if s == t {
        return true;
    }
    let key = (s.to_string(), t.to_string());
    if !memo.insert(key) {
        return true;
    }
    match (head(s), head(t)) {
        (PiType::Unit, PiType::Unit) | (PiType::Behaviour, PiType::Behaviour) => true,
        (PiType::TypeVar(x), PiType::TypeVar(y)) => x == y,
        (PiType::Conn(a), PiType::Conn(b))
        | (PiType::In(a), PiType::In(b))
        | (PiType::Out(a), PiType::Out(b))
        | (PiType::LinConn(a), PiType::LinConn(b))
        | (PiType::LinIn(a), PiType::LinIn(b))
        | (PiType::LinOut(a), PiType::LinOut(b))
        | (PiType::AbsType(a), PiType::AbsType(b)) => eq_rec(&a, &b, memo),
        (PiType::Product(xs), PiType::Product(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(&ys).all(|(a, b)| eq_rec(a, b, memo))
        }
        _ => false,
    }
}

/// Coinductive subtyping: reflexivity up to EQ-UNFOLD, `#T <= iT` and
/// `#T <= oT` (connections can be weakened to either capability), input
/// covariant, output contravariant, connections invariant, products
/// componentwise. Linear types are related only by equality.
pub fn subtype(s: &PiType, t: &PiType) -> bool {
    let mut memo = BTreeSet::new();
    sub_rec(s, t, &mut memo)
}

fn sub_rec(s: &PiType, t: &PiType, memo: &mut BTreeSet<(String, String)>) -> bool {
    if s == t {
        return true;
    }
    let key = (s.to_string(), t.to_string());
    if !memo.insert(key) {
        return true;
    }
    match (head(s), head(t)) {
        (PiType::Unit, PiType::Unit) | (PiType::Behaviour, PiType::Behaviour) => true,
        (PiType::TypeVar(x), PiType::TypeVar(y)) => x == y,
        (PiType::Conn(a), PiType::In(b)) | (PiType::In(a), PiType::In(b)) => {
            sub_rec(&a, &b, memo)
        }
        (PiType::Conn(a), PiType::Out(b)) | (PiType::Out(a), PiType::Out(b)) => {
            sub_rec(&b, &a, memo)
        }
        (PiType::Conn(a), PiType::Conn(b)) => {
            sub_rec(&a, &b, memo) && sub_rec(&b, &a, memo)
        }
        (PiType::Product(xs), PiType::Product(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(&ys).all(|(a, b)| sub_rec(a, b, memo))
        }
        (PiType::LinConn(a), PiType::LinConn(b))
        | (PiType::LinIn(a), PiType::LinIn(b))
        | (PiType::LinOut(a), PiType::LinOut(b))
        | (PiType::AbsType(a), PiType::AbsType(b)) => {
            let mut m = BTreeSet::new();
            eq_rec(&a, &b, &mut m)
        }
        _ => false,
    }
}

/// Errors raised by type combination and type checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeError {
    /// `S ⊎ T` undefined: two linear types that are not complementary
    /// halves, or unequal types.
    Combine(String, String),
    /// A name used by the process is not bound in the environment.
    Unbound(Name),
    /// Subject lacks the needed capability.
    NoCapability {
        name: Name,
        needed: &'static str,
        found: String,
    },
    /// Prefix arity does not match the carried type.
    Arity {
        name: Name,
        expected: usize,
        got: usize,
    },
    /// An argument's type is not a subtype of the expected object type.
    Argument {
        name: Name,
        expected: String,
        found: String,
    },
    /// A linear name is left unused on some branch.
    LinearUnused(Vec<Name>),
    /// A linear name is used more than once in a single thread.
    LinearReuse(Name),
    /// No assignment of the linear names to the two sides of a parallel
    /// composition type checks.
    NoSplit(Vec<Name>),
    /// The agent lies outside the typed fragment (output continuations,
    /// replicated outputs, context holes).
    UntypedFragment(&'static str),
    /// A restricted name is used but carries no type annotation.
    MissingAnnotation(Name),
    /// The goal type does not match the agent's sort.
    GoalMismatch { goal: String, agent: &'static str },
    /// A `mu` type with a non-contractive body.
    NotContractive(String),
    /// Syntax error in the textual type syntax.
    Parse(String),
}

impl core::fmt::Display for TypeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TypeError::Combine(s, t) => write!(f, "cannot combine {s} with {t}"),
            TypeError::Unbound(n) => write!(f, "unbound name {n}"),
            TypeError::NoCapability { name, needed, found } => {
                write!(f, "{name} : {found} lacks {needed} capability")
            }
            TypeError::Arity { name, expected, got } => {
                write!(f, "{name} carries {expected} objects, prefix has {got}")
            }
            TypeError::Argument { name, expected, found } => {
                write!(f, "argument {name} : {found} is not a subtype of {expected}")
            }
            TypeError::LinearUnused(ns) => write!(f, "linear names left unused: {ns:?}"),
            TypeError::LinearReuse(n) => write!(f, "linear name {n} used twice"),
            TypeError::NoSplit(ns) => {
                write!(f, "no split of linear names {ns:?} type checks the composition")
            }
            TypeError::UntypedFragment(what) => write!(f, "outside the typed fragment: {what}"),
            TypeError::MissingAnnotation(n) => {
                write!(f, "restricted name {n} has no type annotation")
            }
            TypeError::GoalMismatch { goal, agent } => {
                write!(f, "goal {goal} does not fit a {agent}")
            }
            TypeError::NotContractive(x) => write!(f, "mu-body not contractive in {x}"),
            TypeError::Parse(msg) => write!(f, "type syntax: {msg}"),
        }
    }
}

/// `S ⊎ T`: complementary linear input/output halves combine into a linear
/// connection; equal non-linear types combine into themselves; anything else
/// is an error.
pub fn combine(s: &PiType, t: &PiType) -> Result<PiType, TypeError> {
    match (head(s), head(t)) {
        (PiType::LinIn(a), PiType::LinOut(b)) | (PiType::LinOut(b), PiType::LinIn(a))
            if type_eq(&a, &b) =>
        {
            Ok(PiType::LinConn(a))
        }
        _ => {
            if !s.is_linear() && !t.is_linear() && type_eq(s, t) {
                Ok(s.clone())
            } else {
                Err(TypeError::Combine(s.to_string(), t.to_string()))
            }
        }
    }
}

/// A type environment: a finite map from names to link types.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypeEnv(pub BTreeMap<Name, PiType>);

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv(BTreeMap::new())
    }

    pub fn from_pairs(pairs: &[(&str, PiType)]) -> Self {
        TypeEnv(
            pairs
                .iter()
                .map(|(n, t)| (n.to_string(), t.clone()))
                .collect(),
        )
    }

    pub fn get(&self, n: &str) -> Option<&PiType> {
        self.0.get(n)
    }

    pub fn insert(&mut self, n: &str, t: PiType) {
        self.0.insert(n.to_string(), t);
    }

    pub fn remove(&mut self, n: &str) -> Option<PiType> {
        self.0.remove(n)
    }

    /// `Lin(Γ)`: the names assigned a linear type.
    pub fn lin(&self) -> Vec<Name> {
        self.0
            .iter()
            .filter(|(_, t)| t.is_linear())
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// `Lin_i(Γ)`: the names holding a linear input capability.
    pub fn lin_i(&self) -> Vec<Name> {
        self.0
            .iter()
            .filter(|(_, t)| matches!(head(t), PiType::LinIn(_) | PiType::LinConn(_)))
            .map(|(n, _)| n.clone())
            .collect()
    }
}

/// `Γ1 ⊎ Γ2`, lifted pointwise: names defined on one side keep their type,
/// names defined on both combine (or fail).
pub fn combine_env(g1: &TypeEnv, g2: &TypeEnv) -> Result<TypeEnv, TypeError> {
    let mut out = g1.0.clone();
    for (n, t) in &g2.0 {
        match out.get(n) {
            None => {
                out.insert(n.clone(), t.clone());
            }
            Some(u) => {
                let c = combine(u, t)?;
                out.insert(n.clone(), c);
            }
        }
    }
    Ok(TypeEnv(out))
}

fn input_object(name: &str, t: &PiType) -> Result<PiType, TypeError> {
    match head(t) {
        PiType::In(s) | PiType::LinIn(s) | PiType::Conn(s) => Ok(*s),
        other => Err(TypeError::NoCapability {
            name: name.to_string(),
            needed: "input",
            found: other.to_string(),
        }),
    }
}

fn output_object(name: &str, t: &PiType) -> Result<PiType, TypeError> {
    match head(t) {
        PiType::Out(s) | PiType::LinOut(s) | PiType::Conn(s) => Ok(*s),
        other => Err(TypeError::NoCapability {
            name: name.to_string(),
            needed: "output",
            found: other.to_string(),
        }),
    }
}

fn replicated_input_object(name: &str, t: &PiType) -> Result<PiType, TypeError> {
    match head(t) {
        PiType::In(s) | PiType::Conn(s) => Ok(*s),
        other => Err(TypeError::NoCapability {
            name: name.to_string(),
            needed: "unrestricted input",
            found: other.to_string(),
        }),
    }
}

fn components(name: &str, obj: &PiType, arity: usize) -> Result<Vec<PiType>, TypeError> {
    match head(obj) {
        PiType::Product(ts) if ts.len() == arity => Ok(ts),
        _ if arity == 1 => Ok(vec![obj.clone()]),
        PiType::Product(ts) => Err(TypeError::Arity {
            name: name.to_string(),
            expected: ts.len(),
            got: arity,
        }),
        _ => Err(TypeError::Arity {
            name: name.to_string(),
            expected: 1,
            got: arity,
        }),
    }
}

fn require_all_consumed(env: &TypeEnv) -> Result<(), TypeError> {
    let lin = env.lin();
    if lin.is_empty() {
        Ok(())
    } else {
        Err(TypeError::LinearUnused(lin))
    }
}

fn check_value(env: &mut TypeEnv, arg: &str, expected: &PiType) -> Result<(), TypeError> {
    let found = env
        .get(arg)
        .cloned()
        .ok_or_else(|| TypeError::Unbound(arg.to_string()))?;
    if !(type_eq(&found, expected) || subtype(&found, expected)) {
        return Err(TypeError::Argument {
            name: arg.to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    if found.is_linear() {
        env.remove(arg);
    }
    Ok(())
}

fn check_process(env: TypeEnv, p: &PiAgent, annots: &TypeEnv) -> Result<(), TypeError> {
    match p {
        PiAgent::Nil => require_all_consumed(&env),
        PiAgent::Hole(_) => Err(TypeError::UntypedFragment("context hole")),
        PiAgent::Input { subj, params, cont } => {
            let mut env = env;
            let st = env
                .get(subj)
                .cloned()
                .ok_or_else(|| TypeError::Unbound(subj.clone()))?;
            let obj = input_object(subj, &st)?;
            if st.is_linear() {
                env.remove(subj);
            }
            let tys = components(subj, &obj, params.len())?;
            for (b, t) in params.iter().zip(tys) {
                env.insert(b, t);
            }
            check_process(env, cont, annots)
        }
        PiAgent::RepInput { subj, params, cont } => {
            let mut env = env;
            let st = env
                .get(subj)
                .cloned()
                .ok_or_else(|| TypeError::Unbound(subj.clone()))?;
            let obj = replicated_input_object(subj, &st)?;
            // T-REP: the residual environment under the replication must
            // hold no linear names — a replicated body may run any number
            // of times.
            require_all_consumed(&env)?;
            let tys = components(subj, &obj, params.len())?;
            for (b, t) in params.iter().zip(tys) {
                env.insert(b, t);
            }
            check_process(env, cont, annots)
        }
        PiAgent::Output { subj, args, cont } => {
            if cont.is_some() {
                return Err(TypeError::UntypedFragment(
                    "output continuation (the typed calculus is asynchronous)",
                ));
            }
            let mut env = env;
            let st = env
                .get(subj)
                .cloned()
                .ok_or_else(|| TypeError::Unbound(subj.clone()))?;
            let obj = output_object(subj, &st)?;
            if st.is_linear() {
                env.remove(subj);
            }
            let tys = components(subj, &obj, args.len())?;
            for (b, t) in args.iter().zip(&tys) {
                check_value(&mut env, b, t)?;
            }
            require_all_consumed(&env)
        }
        PiAgent::RepOutput { .. } => Err(TypeError::UntypedFragment("replicated output")),
        PiAgent::Par(l, r) => check_par(env, l, r, annots),
        PiAgent::Res(a, body) => {
            if !free_names(body).contains(a) {
                // T-RES': the restricted name is unused, no annotation needed.
                return check_process(env, body, annots);
            }
            let ann = annots
                .get(a)
                .cloned()
                .ok_or_else(|| TypeError::MissingAnnotation(a.clone()))?;
            let mut env = env;
            env.insert(a, ann);
            check_process(env, body, annots)
        }
        PiAgent::Apply { fun, arg } => {
            let mut env = env;
            let at = env
                .get(arg)
                .cloned()
                .ok_or_else(|| TypeError::Unbound(arg.clone()))?;
            if at.is_linear() {
                env.remove(arg);
            }
            match fun.as_ref() {
                PiAgent::Abs { param, body } => {
                    env.insert(param, at);
                    check_process(env, body, annots)
                }
                PiAgent::Hole(_) => Err(TypeError::UntypedFragment("context hole")),
                _ => Err(TypeError::GoalMismatch {
                    goal: "T -> proc".to_string(),
                    agent: "non-abstraction in application position",
                }),
            }
        }
        PiAgent::Abs { .. } => Err(TypeError::GoalMismatch {
            goal: PiType::Behaviour.to_string(),
            agent: "abstraction",
        }),
    }
}

/// How one linear name is distributed over `P | Q`.
enum SplitChoice {
    Left,
    Right,
    /// A linear connection splits into `li` for one side and `lo` for the
    /// other; the flag says which side receives the input half.
    Halves { input_left: bool },
}

fn check_par(env: TypeEnv, l: &PiAgent, r: &PiAgent, annots: &TypeEnv) -> Result<(), TypeError> {
    let lin = env.lin();
    let fnl = free_names(l);
    let fnr = free_names(r);
    let mut options: Vec<(Name, Vec<SplitChoice>)> = Vec::new();
    for n in &lin {
        let t = env.get(n).unwrap();
        let conn = matches!(head(t), PiType::LinConn(_));
        let mut choices = Vec::new();
        if fnl.contains(n) && !fnr.contains(n) {
            choices.push(SplitChoice::Left);
        } else if fnr.contains(n) && !fnl.contains(n) {
            choices.push(SplitChoice::Right);
        } else if fnl.contains(n) && fnr.contains(n) {
            if conn {
                choices.push(SplitChoice::Halves { input_left: true });
                choices.push(SplitChoice::Halves { input_left: false });
            }
            // A whole linear capability cannot serve both sides.
        }
        if choices.is_empty() {
            return Err(TypeError::LinearUnused(vec![n.clone()]));
        }
        options.push((n.clone(), choices));
    }

    let mut base = env.clone();
    for n in &lin {
        base.remove(n);
    }

    // Backtracking over the linear-name assignments.
    fn try_assign(
        options: &[(Name, Vec<SplitChoice>)],
        idx: usize,
        env: &TypeEnv,
        left: TypeEnv,
        right: TypeEnv,
        l: &PiAgent,
        r: &PiAgent,
        annots: &TypeEnv,
    ) -> Result<(), TypeError> {
        if idx == options.len() {
            check_process(left, l, annots)?;
            return check_process(right, r, annots);
        }
        let (n, choices) = &options[idx];
        let t = env.get(n).unwrap().clone();
        let mut last = None;
        for c in choices {
            let mut le = left.clone();
            let mut re = right.clone();
            match c {
                SplitChoice::Left => le.insert(n, t.clone()),
                SplitChoice::Right => re.insert(n, t.clone()),
                SplitChoice::Halves { input_left } => {
                    let obj = match head(&t) {
                        PiType::LinConn(s) => *s,
                        _ => unreachable!("Halves is only offered for linear connections"),
                    };
                    if *input_left {
                        le.insert(n, PiType::LinIn(Box::new(obj.clone())));
                        re.insert(n, PiType::LinOut(Box::new(obj)));
                    } else {
                        le.insert(n, PiType::LinOut(Box::new(obj.clone())));
                        re.insert(n, PiType::LinIn(Box::new(obj)));
                    }
                }
            }
            match try_assign(options, idx + 1, env, le, re, l, r, annots) {
                Ok(()) => return Ok(()),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or_else(|| TypeError::NoSplit(vec![n.clone()])))
    }

    try_assign(&options, 0, &env, base.clone(), base, l, r, annots)
}

/// Type checks an agent against a goal type under a closed environment.
/// Restricted names take their types from `annots` (the `new a : L` type
/// annotations of the typed syntax, keyed by binder name); a restriction
/// whose name is unused needs no annotation (T-RES').
pub fn type_check(
    env: &TypeEnv,
    agent: &PiAgent,
    goal: &PiType,
    annots: &TypeEnv,
) -> Result<(), TypeError> {
    match head(goal) {
        PiType::Behaviour => check_process(env.clone(), agent, annots),
        PiType::AbsType(t) => match agent {
            PiAgent::Abs { param, body } => {
                let mut env = env.clone();
                env.insert(param, *t);
                check_process(env, body, annots)
            }
            _ => Err(TypeError::GoalMismatch {
                goal: goal.to_string(),
                agent: "process (expected an abstraction)",
            }),
        },
        _ => Err(TypeError::GoalMismatch {
            goal: goal.to_string(),
            agent: "agent (goal must be proc or L -> proc)",
        }),
    }
}

/// The address type of encoded λ-terms: `T_b = mu X. li(#X, X)`.
pub fn t_b() -> PiType {
    PiType::mu(
        "X",
        PiType::lin_in(PiType::Product(vec![
            PiType::conn(PiType::var("X")),
            PiType::var("X"),
        ])),
    )
}

/// The application rendezvous type: `T_b' = l#(#T_b, T_b)`.
pub fn t_b_prime() -> PiType {
    PiType::lin_conn(PiType::Product(vec![PiType::conn(t_b()), t_b()]))
}

/// Reconstructs the `new a : L` annotations of the typed call-by-name
/// encoding from the shape of the process: a restricted name used as the
/// subject of a replicated input is an argument trigger (`#T_b`), every
/// other restricted name is an application rendezvous (`T_b'`). The
/// classification is stable under τ-steps, which never remove a replication.
pub fn milner_annotations(p: &PiAgent) -> TypeEnv {
    let mut rep_subjects = BTreeSet::new();
    collect_rep_subjects(p, &mut rep_subjects);
    let mut out = TypeEnv::new();
    collect_res_annots(p, &rep_subjects, &mut out);
    out
}

fn collect_rep_subjects(p: &PiAgent, out: &mut BTreeSet<Name>) {
    match p {
        PiAgent::RepInput { subj, cont, .. } => {
            out.insert(subj.clone());
            collect_rep_subjects(cont, out);
        }
        PiAgent::Input { cont, .. } => collect_rep_subjects(cont, out),
        PiAgent::Output { cont: Some(c), .. } => collect_rep_subjects(c, out),
        PiAgent::RepOutput { cont, .. } => collect_rep_subjects(cont, out),
        PiAgent::Par(l, r) => {
            collect_rep_subjects(l, out);
            collect_rep_subjects(r, out);
        }
        PiAgent::Res(_, b) => collect_rep_subjects(b, out),
        PiAgent::Apply { fun, .. } => collect_rep_subjects(fun, out),
        PiAgent::Abs { body, .. } => collect_rep_subjects(body, out),
        _ => {}
    }
}

fn collect_res_annots(p: &PiAgent, reps: &BTreeSet<Name>, out: &mut TypeEnv) {
    match p {
        PiAgent::Res(a, b) => {
            if reps.contains(a) {
                out.insert(a, PiType::conn(t_b()));
            } else {
                out.insert(a, t_b_prime());
            }
            collect_res_annots(b, reps, out);
        }
        PiAgent::Input { cont, .. } | PiAgent::RepInput { cont, .. } => {
            collect_res_annots(cont, reps, out)
        }
        PiAgent::Output { cont: Some(c), .. } => collect_res_annots(c, reps, out),
        PiAgent::RepOutput { cont, .. } => collect_res_annots(cont, reps, out),
        PiAgent::Par(l, r) => {
            collect_res_annots(l, reps, out);
            collect_res_annots(r, reps, out);
        }
        PiAgent::Apply { fun, .. } => collect_res_annots(fun, reps, out),
        PiAgent::Abs { body, .. } => collect_res_annots(body, reps, out),
        _ => {}
    }
}

/// Checks the call-by-name encoding of `m` against `T_b -> proc`, with the
/// free variables of `m` typed `#T_b` and restricted names annotated per the
/// typed encoding (`r : T_b'`, argument triggers `x : #T_b`).
pub fn check_encoding_typed(m: &LambdaTerm) -> Result<(), TypeError> {
    let agent = encode(Encoding::MilnerCBN, m);
    let mut env = TypeEnv::new();
    for v in m.free_vars() {
        env.insert(&v, PiType::conn(t_b()));
    }
    let annots = milner_annotations(&agent);
    type_check(&env, &agent, &PiType::abs_type(t_b()), &annots)
}

/// Subject-reduction probe: every τ-derivative of a well-typed process must
/// stay typed under `Γ`, or under `Γ` minus one name of linear-connection
/// type whose interaction the step consumed. Explores τ-derivatives up to
/// `steps` deep; annotations for restricted names are reconstructed from
/// each derivative's shape.
pub fn subject_reduction_probe(env: &TypeEnv, p: &PiAgent, steps: usize) -> Verdict {
    let annots = milner_annotations(p);
    if let Err(e) = type_check(env, p, &PiType::Behaviour, &annots) {
        return Verdict::Unknown(format!("initial process is ill-typed: {e}"));
    }
    let mut frontier = vec![p.clone()];
    let mut seen = BTreeSet::new();
    seen.insert(alpha_key(p));
    for _ in 0..steps {
        let mut next = Vec::new();
        for q in &frontier {
            let succs = match transitions(q) {
                Ok(s) => s,
                Err(e) => return Verdict::Unknown(format!("transition error: {e:?}")),
            };
            for (label, q2) in succs {
                if label != Label::Tau {
                    continue;
                }
                let ann2 = milner_annotations(&q2);
                let direct = type_check(env, &q2, &PiType::Behaviour, &ann2);
                let ok = direct.is_ok() || {
                    env.0.iter().any(|(a, t)| {
                        matches!(head(t), PiType::LinConn(_)) && {
                            let mut g = env.clone();
                            g.remove(a);
                            type_check(&g, &q2, &PiType::Behaviour, &ann2).is_ok()
                        }
                    })
                };
                if !ok {
                    return Verdict::Refuted(Witness {
                        steps: Vec::new(),
                        reason: format!(
                            "tau-derivative loses typability: {}",
                            direct.err().map(|e| e.to_string()).unwrap_or_default()
                        ),
                    });
                }
                let k = alpha_key(&q2);
                if seen.insert(k) {
                    next.push(q2);
                }
            }
        }
        if next.is_empty() {
            return Verdict::Proved;
        }
        frontier = next;
    }
    Verdict::Proved
}

/// Runtime type errors of the untyped transition system: a prefix whose
/// subject stands for a non-name value (unit or a product) steps to the
/// error process. On the name-based syntax this arises only through names
/// bound at a non-link type; `type_check` rejects every such use, so these
/// errors are unreachable from well-typed terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuntimeError {
    /// `a(b~).P --tau--> wrong` when `a` is not a (link-typed) name.
    InpErr(Name),
    /// `a<b~> --tau--> wrong` when `a` is not a (link-typed) name.
    OutErr(Name),
}

/// Flags the prefixes of `p` that can take an `inpErr`/`outErr` step to
/// `wrong`, given the known types of names (environment, restriction
/// annotations, and input bindings).
pub fn runtime_errors(env: &TypeEnv, p: &PiAgent, annots: &TypeEnv) -> Vec<RuntimeError> {
    let mut known = env.clone();
    let mut out = Vec::new();
    scan_wrong(&mut known, p, annots, &mut out);
    out
}

fn non_link(t: &PiType) -> bool {
    matches!(head(t), PiType::Unit | PiType::Product(_) | PiType::Behaviour)
}

fn scan_wrong(known: &mut TypeEnv, p: &PiAgent, annots: &TypeEnv, out: &mut Vec<RuntimeError>) {
    match p {
        PiAgent::Input { subj, params, cont } | PiAgent::RepInput { subj, params, cont } => {
            if known.get(subj).map(non_link).unwrap_or(false) {
                out.push(RuntimeError::InpErr(subj.clone()));
            }
            let mut inner = known.clone();
            if let Some(obj) = known
                .get(subj)
                .and_then(|t| input_object(subj, t).ok())
                .and_then(|obj| components(subj, &obj, params.len()).ok())
            {
                for (b, t) in params.iter().zip(obj) {
                    inner.insert(b, t);
                }
            }
            scan_wrong(&mut inner, cont, annots, out);
        }
        PiAgent::Output { subj, cont, .. } => {
            if known.get(subj).map(non_link).unwrap_or(false) {
                out.push(RuntimeError::OutErr(subj.clone()));
            }
            if let Some(c) = cont {
                scan_wrong(known, c, annots, out);
            }
        }
        PiAgent::RepOutput { subj, cont, .. } => {
            if known.get(subj).map(non_link).unwrap_or(false) {
                out.push(RuntimeError::OutErr(subj.clone()));
            }
            scan_wrong(known, cont, annots, out);
        }
        PiAgent::Par(l, r) => {
            scan_wrong(known, l, annots, out);
            scan_wrong(known, r, annots, out);
        }
        PiAgent::Res(a, b) => {
            let mut inner = known.clone();
            if let Some(t) = annots.get(a) {
                inner.insert(a, t.clone());
            }
            scan_wrong(&mut inner, b, annots, out);
        }
        PiAgent::Apply { fun, arg } => {
            if let PiAgent::Abs { param, body } = fun.as_ref() {
                let mut inner = known.clone();
                if let Some(t) = known.get(arg) {
                    inner.insert(param, t.clone());
                }
                scan_wrong(&mut inner, body, annots, out);
            }
        }
        PiAgent::Abs { body, .. } => scan_wrong(known, body, annots, out),
        _ => {}
    }
}

/// Parses the textual type syntax:
/// `unit, #L, iL, oL, l#L, liL, loL, (L1,...,Ln), X, mu X. L, proc`,
/// with an optional trailing `-> proc` for abstraction types. Type
/// variables are identifiers starting with an uppercase letter.
pub fn parse_type(text: &str) -> Result<PiType, TypeError> {
    let mut p = TyParser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let t = p.parse_full()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(TypeError::Parse(format!(
            "trailing input at offset {}",
            p.pos
        )));
    }
    Ok(t)
}

struct TyParser {
    chars: Vec<char>,
    pos: usize,
}

impl TyParser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> Result<(), TypeError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(TypeError::Parse(format!(
                "expected '{c}' at offset {}",
                self.pos
            )))
        }
    }

    fn word(&mut self) -> String {
        let mut w = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                w.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        w
    }

    fn parse_full(&mut self) -> Result<PiType, TypeError> {
        let t = self.parse_link()?;
        self.skip_ws();
        if self.pos + 1 < self.chars.len()
            && self.chars[self.pos] == '-'
            && self.chars[self.pos + 1] == '>'
        {
            self.pos += 2;
            self.skip_ws();
            let w = self.word();
            if w != "proc" {
                return Err(TypeError::Parse("'->' must be followed by 'proc'".into()));
            }
            return Ok(PiType::abs_type(t));
        }
        Ok(t)
    }

    fn parse_link(&mut self) -> Result<PiType, TypeError> {
        self.skip_ws();
        match self.peek() {
            Some('#') => {
                self.pos += 1;
                Ok(PiType::conn(self.parse_link()?))
            }
            Some('(') => {
                self.pos += 1;
                let mut ts = vec![self.parse_link()?];
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => {
                            self.pos += 1;
                            ts.push(self.parse_link()?);
                        }
                        Some(')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => {
                            return Err(TypeError::Parse(format!(
                                "expected ',' or ')' at offset {}",
                                self.pos
                            )))
                        }
                    }
                }
                if ts.len() == 1 {
                    Ok(ts.pop().unwrap())
                } else {
                    Ok(PiType::Product(ts))
                }
            }
            Some(c) if c == 'l' => {
                // l#L, liL or loL.
                if self.chars.get(self.pos + 1) == Some(&'#') {
                    self.pos += 2;
                    return Ok(PiType::lin_conn(self.parse_link()?));
                }
                match self.chars.get(self.pos + 1) {
                    Some('i') => {
                        self.pos += 2;
                        Ok(PiType::lin_in(self.parse_link()?))
                    }
                    Some('o') => {
                        self.pos += 2;
                        Ok(PiType::lin_out(self.parse_link()?))
                    }
                    _ => Err(TypeError::Parse(format!(
                        "expected 'l#', 'li' or 'lo' at offset {}",
                        self.pos
                    ))),
                }
            }
            Some('i') => {
                self.pos += 1;
                Ok(PiType::inp(self.parse_link()?))
            }
            Some('o') => {
                self.pos += 1;
                Ok(PiType::out(self.parse_link()?))
            }
            Some(c) if c.is_alphabetic() => {
                let start = self.pos;
                let w = self.word();
                match w.as_str() {
                    "unit" => Ok(PiType::Unit),
                    "proc" => Ok(PiType::Behaviour),
                    "mu" => {
                        self.skip_ws();
                        let x = self.word();
                        if x.is_empty() {
                            return Err(TypeError::Parse("mu needs a variable".into()));
                        }
                        self.eat('.')?;
                        let body = self.parse_link()?;
                        if !body.is_contractive(&x) {
                            return Err(TypeError::NotContractive(x));
                        }
                        Ok(PiType::mu(&x, body))
                    }
                    _ if w.chars().next().map(|c| c.is_uppercase()).unwrap_or(false) => {
                        Ok(PiType::var(&w))
                    }
                    _ => Err(TypeError::Parse(format!(
                        "unknown type token '{w}' at offset {start}"
                    ))),
                }
            }
            other => Err(TypeError::Parse(format!(
                "unexpected {other:?} at offset {}",
                self.pos
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::encode_at;
    use crate::lambda::parse_lambda;
    use proptest::prelude::*;

    fn lam(s: &str) -> LambdaTerm {
        parse_lambda(s).unwrap()
    }

    fn nl_pair() -> PiType {
        // Non-linear carried product used by the small hand examples.
        PiType::Product(vec![
            PiType::conn(PiType::Unit),
            PiType::conn(PiType::Unit),
        ])
    }

    #[test]
    fn combine_rule_instances() {
        let t = PiType::conn(PiType::Unit);
        // li T ⊎ lo T = l# T, both orders.
        assert_eq!(
            combine(&PiType::lin_in(t.clone()), &PiType::lin_out(t.clone())),
            Ok(PiType::lin_conn(t.clone()))
        );
        assert_eq!(
            combine(&PiType::lin_out(t.clone()), &PiType::lin_in(t.clone())),
            Ok(PiType::lin_conn(t.clone()))
        );
        // T ⊎ T = T for non-linear T.
        assert_eq!(
            combine(&PiType::inp(t.clone()), &PiType::inp(t.clone())),
            Ok(PiType::inp(t.clone()))
        );
        assert_eq!(combine(&PiType::Unit, &PiType::Unit), Ok(PiType::Unit));
        // Everything else errors.
        assert!(combine(&PiType::lin_in(t.clone()), &PiType::lin_in(t.clone())).is_err());
        assert!(combine(&PiType::lin_conn(t.clone()), &PiType::lin_conn(t.clone())).is_err());
        assert!(combine(&PiType::inp(t.clone()), &PiType::out(t.clone())).is_err());
        // ⊎ sees through mu: T_b combines with the lo half into l#.
        assert_eq!(
            combine(
                &t_b(),
                &PiType::lin_out(PiType::Product(vec![PiType::conn(t_b()), t_b()]))
            ),
            Ok(PiType::lin_conn(PiType::Product(vec![
                PiType::conn(t_b()),
                t_b()
            ])))
        );
    }

    #[test]
    fn combine_env_four_cases() {
        let t = PiType::conn(PiType::Unit);
        let g1 = TypeEnv::from_pairs(&[("a", PiType::lin_in(t.clone())), ("b", t.clone())]);
        let g2 = TypeEnv::from_pairs(&[("a", PiType::lin_out(t.clone())), ("c", t.clone())]);
        let g = combine_env(&g1, &g2).unwrap();
        assert_eq!(g.get("a"), Some(&PiType::lin_conn(t.clone())));
        assert_eq!(g.get("b"), Some(&t));
        assert_eq!(g.get("c"), Some(&t));
        assert_eq!(g.get("d"), None);
        let clash = TypeEnv::from_pairs(&[("b", PiType::inp(t.clone()))]);
        assert!(combine_env(&g1, &clash).is_err());
    }

    #[test]
    fn lin_extraction() {
        let t = PiType::conn(PiType::Unit);
        let g = TypeEnv::from_pairs(&[
            ("a", PiType::lin_in(t.clone())),
            ("b", PiType::lin_out(t.clone())),
            ("c", PiType::lin_conn(t.clone())),
            ("d", t.clone()),
            ("p", t_b()),
        ]);
        assert_eq!(g.lin(), vec!["a", "b", "c", "p"]);
        assert_eq!(g.lin_i(), vec!["a", "c", "p"]);
    }

    #[test]
    fn subtype_rule_instances() {
        let s = PiType::conn(PiType::Unit);
        let t = PiType::inp(PiType::Unit);
        // SUB-REFL (up to EQ-UNFOLD).
        assert!(subtype(&t_b(), &unfold(&t_b())));
        assert!(subtype(&unfold(&t_b()), &t_b()));
        // SUB-#I and SUB-#O.
        assert!(subtype(&PiType::conn(s.clone()), &PiType::inp(s.clone())));
        assert!(subtype(&PiType::conn(s.clone()), &PiType::out(s.clone())));
        // SUB-II: covariant (with s <= t by #I).
        assert!(subtype(&s, &t));
        assert!(subtype(&PiType::inp(s.clone()), &PiType::inp(t.clone())));
        assert!(!subtype(&PiType::inp(t.clone()), &PiType::inp(s.clone())));
        // SUB-OO: contravariant.
        assert!(subtype(&PiType::out(t.clone()), &PiType::out(s.clone())));
        assert!(!subtype(&PiType::out(s.clone()), &PiType::out(t.clone())));
        // SUB-PRODUCT componentwise.
        assert!(subtype(
            &PiType::Product(vec![s.clone(), s.clone()]),
            &PiType::Product(vec![t.clone(), s.clone()])
        ));
        // SUB-BB needs both directions: #s <= #t fails since t <= s fails.
        assert!(!subtype(&PiType::conn(s.clone()), &PiType::conn(t.clone())));
        assert!(subtype(&PiType::conn(s.clone()), &PiType::conn(s.clone())));
        // Linear types relate only by equality.
        assert!(!subtype(&PiType::lin_in(s.clone()), &PiType::lin_in(t.clone())));
        assert!(subtype(&PiType::lin_in(s.clone()), &PiType::lin_in(s.clone())));
    }

    #[test]
    fn type_eq_unfolds() {
        assert!(type_eq(&t_b(), &unfold(&t_b())));
        assert!(type_eq(&t_b(), &unfold(&unfold(&t_b()))));
        assert!(!type_eq(&t_b(), &PiType::conn(t_b())));
    }

    #[test]
    fn nil_needs_empty_linear_part() {
        let annots = TypeEnv::new();
        let ok = TypeEnv::from_pairs(&[("a", PiType::conn(PiType::Unit))]);
        assert!(type_check(&ok, &PiAgent::Nil, &PiType::Behaviour, &annots).is_ok());
        let bad = TypeEnv::from_pairs(&[("a", PiType::lin_in(PiType::Unit))]);
        assert!(matches!(
            type_check(&bad, &PiAgent::Nil, &PiType::Behaviour, &annots),
            Err(TypeError::LinearUnused(_))
        ));
    }

    #[test]
    fn linear_connection_splits_across_parallel() {
        // p : l#(#unit, #unit) ⊢ p(x,q).0 | p<a,b> via the li/lo split.
        let env = TypeEnv::from_pairs(&[
            ("p", PiType::lin_conn(nl_pair())),
            ("a", PiType::conn(PiType::Unit)),
            ("b", PiType::conn(PiType::Unit)),
        ]);
        let proc = PiAgent::par(
            PiAgent::input("p", &["x", "q"], PiAgent::Nil),
            PiAgent::output("p", &["a", "b"]),
        );
        assert!(type_check(&env, &proc, &PiType::Behaviour, &TypeEnv::new()).is_ok());
    }

    #[test]
    fn linear_input_used_twice_rejected() {
        // p : li(...) ⊢ p(x,q).0 | p(x,q).0 has no valid split.
        let env = TypeEnv::from_pairs(&[("p", PiType::lin_in(nl_pair()))]);
        let proc = PiAgent::par(
            PiAgent::input("p", &["x", "q"], PiAgent::Nil),
            PiAgent::input("p", &["x", "q"], PiAgent::Nil),
        );
        assert!(type_check(&env, &proc, &PiType::Behaviour, &TypeEnv::new()).is_err());
        // Same with the connection: both sides need input, no li/lo split fits.
        let env2 = TypeEnv::from_pairs(&[("p", PiType::lin_conn(nl_pair()))]);
        assert!(type_check(&env2, &proc, &PiType::Behaviour, &TypeEnv::new()).is_err());
    }

    #[test]
    fn replication_rejects_linear_residue() {
        // !a(x).0 with a linear name left over in the environment.
        let env = TypeEnv::from_pairs(&[
            ("a", PiType::conn(nl_pair())),
            ("z", PiType::lin_in(PiType::Unit)),
        ]);
        let proc = PiAgent::rep_input("a", &["x", "q"], PiAgent::Nil);
        assert!(matches!(
            type_check(&env, &proc, &PiType::Behaviour, &TypeEnv::new()),
            Err(TypeError::LinearUnused(_))
        ));
        // A linear subject cannot be replicated.
        let env2 = TypeEnv::from_pairs(&[("a", PiType::lin_in(nl_pair()))]);
        assert!(matches!(
            type_check(&env2, &proc, &PiType::Behaviour, &TypeEnv::new()),
            Err(TypeError::NoCapability { .. })
        ));
    }

    #[test]
    fn output_checks_argument_subtyping() {
        // a : o(i unit) accepts an argument of type #unit (by SUB-#I).
        let env = TypeEnv::from_pairs(&[
            ("a", PiType::out(PiType::inp(PiType::Unit))),
            ("b", PiType::conn(PiType::Unit)),
        ]);
        let proc = PiAgent::output("a", &["b"]);
        assert!(type_check(&env, &proc, &PiType::Behaviour, &TypeEnv::new()).is_ok());
        // But not an argument of type o unit.
        let env2 = TypeEnv::from_pairs(&[
            ("a", PiType::out(PiType::inp(PiType::Unit))),
            ("b", PiType::out(PiType::Unit)),
        ]);
        assert!(matches!(
            type_check(&env2, &proc, &PiType::Behaviour, &TypeEnv::new()),
            Err(TypeError::Argument { .. })
        ));
    }

    #[test]
    fn typed_encoding_accepts_core_terms() {
        for src in ["x", "\\x. x", "x y", "(\\x. x) y", "\\x. \\y. x y", "(\\x. x x)(\\z. z)"] {
            let v = check_encoding_typed(&lam(src));
            assert!(v.is_ok(), "{src}: {v:?}");
        }
    }

    #[test]
    fn location_used_twice_rejected() {
        // The address p : T_b is linear input; two inputs at p cannot split.
        let env = TypeEnv::from_pairs(&[("p", t_b())]);
        let proc = PiAgent::par(
            PiAgent::input("p", &["x", "q"], PiAgent::Nil),
            PiAgent::input("p", &["x", "q"], PiAgent::Nil),
        );
        assert!(type_check(&env, &proc, &PiType::Behaviour, &TypeEnv::new()).is_err());
    }

    #[test]
    fn eq_unfold_invariance_in_env_and_goal() {
        let m = lam("(\\x. x) y");
        let agent = encode_at(Encoding::MilnerCBN, &m, "p");
        let annots = milner_annotations(&agent);
        let g1 = TypeEnv::from_pairs(&[("p", t_b()), ("y", PiType::conn(t_b()))]);
        let g2 = TypeEnv::from_pairs(&[("p", unfold(&t_b())), ("y", PiType::conn(unfold(&t_b())))]);
        let r1 = type_check(&g1, &agent, &PiType::Behaviour, &annots);
        let r2 = type_check(&g2, &agent, &PiType::Behaviour, &annots);
        assert!(r1.is_ok(), "{r1:?}");
        assert_eq!(r1.is_ok(), r2.is_ok());
        // Goal side: the abstraction checks against both T_b -> proc and its
        // unfolding.
        let f = encode(Encoding::MilnerCBN, &m);
        let fa = milner_annotations(&f);
        let env = TypeEnv::from_pairs(&[("y", PiType::conn(t_b()))]);
        assert!(type_check(&env, &f, &PiType::abs_type(t_b()), &fa).is_ok());
        assert!(type_check(&env, &f, &PiType::abs_type(unfold(&t_b())), &fa).is_ok());
    }

    #[test]
    fn subject_reduction_on_typed_encoding() {
        let m = lam("(\\x. x) y");
        let p = encode_at(Encoding::MilnerCBN, &m, "p");
        let env = TypeEnv::from_pairs(&[("p", t_b()), ("y", PiType::conn(t_b()))]);
        let v = subject_reduction_probe(&env, &p, 5);
        assert!(v.is_proved(), "{v:?}");
    }

    #[test]
    fn subject_reduction_trivial_and_ill_typed() {
        let env = TypeEnv::new();
        assert!(subject_reduction_probe(&env, &PiAgent::Nil, 3).is_proved());
        // An ill-typed seed is rejected before probing.
        let bad_env = TypeEnv::from_pairs(&[("p", PiType::Unit)]);
        let bad = PiAgent::input("p", &["x"], PiAgent::Nil);
        assert!(subject_reduction_probe(&bad_env, &bad, 3).is_unknown());
    }

    #[test]
    fn wrong_is_unreachable_from_well_typed_terms() {
        let m = lam("(\\x. x) y");
        let p = encode_at(Encoding::MilnerCBN, &m, "p");
        let env = TypeEnv::from_pairs(&[("p", t_b()), ("y", PiType::conn(t_b()))]);
        let annots = milner_annotations(&p);
        assert!(type_check(&env, &p, &PiType::Behaviour, &annots).is_ok());
        assert!(runtime_errors(&env, &p, &annots).is_empty());
        // A name standing for a product value used as a subject steps to
        // wrong, and type checking rejects it.
        let bad_env = TypeEnv::from_pairs(&[("v", nl_pair())]);
        let bad = PiAgent::output("v", &["v"]);
        assert_eq!(
            runtime_errors(&bad_env, &bad, &TypeEnv::new()),
            vec![RuntimeError::OutErr("v".to_string())]
        );
        assert!(matches!(
            type_check(&bad_env, &bad, &PiType::Behaviour, &TypeEnv::new()),
            Err(TypeError::NoCapability { .. })
        ));
    }

    #[test]
    fn parse_and_print_round_trip() {
        for src in [
            "unit",
            "#unit",
            "i#unit",
            "o(#unit,unit)",
            "l#(#unit,unit)",
            "li(#X,X)",
            "lo unit",
            "mu X. li(#X,X)",
            "#mu X. li(#X,X)",
            "mu X. li(#X,X) -> proc",
            "proc",
        ] {
            let t = parse_type(src).unwrap();
            let printed = t.to_string();
            let again = parse_type(&printed).unwrap();
            assert_eq!(t, again, "{src} -> {printed}");
        }
        assert_eq!(parse_type("mu X. li(#X, X)").unwrap(), t_b());
        assert_eq!(
            parse_type("l#(#mu X. li(#X,X), mu X. li(#X,X))").unwrap(),
            t_b_prime()
        );
        assert!(matches!(
            parse_type("mu X. X"),
            Err(TypeError::NotContractive(_))
        ));
        assert!(parse_type("li").is_err());
        assert!(parse_type("unit junk").is_err());
    }

    fn arb_type() -> impl Strategy<Value = PiType> {
        let leaf = prop_oneof![
            Just(PiType::Unit),
            Just(PiType::conn(PiType::Unit)),
            Just(PiType::inp(PiType::Unit)),
        ];
        leaf.prop_recursive(3, 16, 4, |inner| {
            prop_oneof![
                inner.clone().prop_map(PiType::conn),
                inner.clone().prop_map(PiType::inp),
                inner.clone().prop_map(PiType::out),
                inner.clone().prop_map(PiType::lin_in),
                inner.clone().prop_map(PiType::lin_out),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| PiType::Product(vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn combine_is_commutative(s in arb_type(), t in arb_type()) {
            // Commutative in definedness and value; error payloads may
            // mention the operands in either order.
            prop_assert_eq!(combine(&s, &t).ok(), combine(&t, &s).ok());
        }

        #[test]
        fn subtype_is_reflexive(t in arb_type()) {
            prop_assert!(subtype(&t, &t));
        }

        #[test]
        fn subtype_is_transitive(t in arb_type()) {
            // #T <= iT and #T <= oT give seed inequalities; closing them
            // under the constructors must stay consistent with subtype.
            let c = PiType::conn(t.clone());
            let i = PiType::inp(t.clone());
            prop_assert!(subtype(&c, &i));
            prop_assert!(subtype(&PiType::inp(c.clone()), &PiType::inp(i.clone())));
            prop_assert!(subtype(&PiType::out(i), &PiType::out(c)));
        }

        #[test]
        fn parse_print_round_trip_generated(t in arb_type()) {
            let printed = t.to_string();
            let back = parse_type(&printed).unwrap();
            prop_assert_eq!(t, back);
        }
    }
}
