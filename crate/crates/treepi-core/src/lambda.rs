//! Named lambda-terms, capture-avoiding substitution, the call-by-name /
//! strong call-by-name / head reduction strategies, and bounded
//! solvability classification.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Lambda-terms over named variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LambdaTerm {
    Var(String),
    Abs(String, Box<LambdaTerm>),
    App(Box<LambdaTerm>, Box<LambdaTerm>),
}

/// Reduction strategies. Call-by-name uses beta and mu only; strong
/// call-by-name adds xi (reduction under binders); head reduction always
/// contracts the head redex, including under binders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    CallByName,
    StrongCallByName,
    Head,
}

/// Result of running head reduction with a fuel bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeadOutcome {
    /// Head normal form `\x~. y M~`.
    Hnf {
        binders: Vec<String>,
        head: String,
        args: Vec<LambdaTerm>,
    },
    /// Fuel ran out before reaching an hnf or a cycle.
    Exhausted {
        uncovered_binders: usize,
        residual: LambdaTerm,
    },
    /// A previously visited term recurred up to alpha-conversion.
    CycleDetected { uncovered_binders: usize },
}

/// Order of an unsolvable: a natural number or the limit ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Finite(usize),
    Omega,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Omega => write!(f, "omega"),
        }
    }
}

/// Bounded solvability classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderEstimate {
    ConfirmedUnsolvable(Order),
    Solvable(HeadOutcome),
    Unknown { fuel_spent: usize },
}

impl LambdaTerm {
    pub fn var(x: &str) -> Self {
        LambdaTerm::Var(x.to_owned())
    }

    pub fn abs(x: &str, body: LambdaTerm) -> Self {
        LambdaTerm::Abs(x.to_owned(), Box::new(body))
    }

    pub fn app(f: LambdaTerm, a: LambdaTerm) -> Self {
        LambdaTerm::App(Box::new(f), Box::new(a))
    }

    /// `(\x. x x)(\x. x x)`, the purely divergent term.
    pub fn omega() -> Self {
        let half = Self::abs("x", Self::app(Self::var("x"), Self::var("x")));
        Self::app(half.clone(), half)
    }

    /// The fixed-point combinator `\f. (\x. f (x x)) (\x. f (x x))`.
    pub fn fix() -> Self {
        let half = Self::abs(
            "x",
            Self::app(Self::var("f"), Self::app(Self::var("x"), Self::var("x"))),
        );
        Self::abs("f", Self::app(half.clone(), half))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            LambdaTerm::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            LambdaTerm::Abs(x, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            LambdaTerm::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
        }
    }

    /// Canonical de-Bruijn-style rendering, used for alpha-equality and for
    /// cycle detection in head reduction.
    pub fn canonical_key(&self) -> String {
        let mut s = String::new();
        self.canon(&mut Vec::new(), &mut s);
        s
    }

    fn canon(&self, bound: &mut Vec<String>, out: &mut String) {
        match self {
            LambdaTerm::Var(x) => {
                match bound.iter().rev().position(|b| b == x) {
                    Some(i) => out.push_str(&format!("b{i}")),
                    None => out.push_str(&format!("f:{x}")),
                };
            }
            LambdaTerm::Abs(x, body) => {
                out.push('\\');
                bound.push(x.clone());
                body.canon(bound, out);
                bound.pop();
            }
            LambdaTerm::App(f, a) => {
                out.push('(');
                f.canon(bound, out);
                out.push(' ');
                a.canon(bound, out);
                out.push(')');
            }
        }
    }

    /// Splits leading abstractions from the body: `\x1..xk. N` with `N` not
    /// an abstraction.
    pub fn strip_binders(&self) -> (Vec<String>, &LambdaTerm) {
        let mut binders = Vec::new();
        let mut cur = self;
        while let LambdaTerm::Abs(x, body) = cur {
            binders.push(x.clone());
            cur = body;
        }
        (binders, cur)
    }
}

pub fn alpha_eq(a: &LambdaTerm, b: &LambdaTerm) -> bool {
    a.canonical_key() == b.canonical_key()
}

/// Picks a name based on `base` that is not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem: String = base
        .chars()
        .take_while(|c| !c.is_ascii_digit() && *c != '\'')
        .collect();
    let stem = if stem.is_empty() { "v".to_owned() } else { stem };
    if !avoid.contains(&stem) {
        return stem;
    }
    let mut i = 1usize;
    loop {
        let cand = format!("{stem}{i}");
        if !avoid.contains(&cand) {
            return cand;
        }
        i += 1;
    }
}

/// Capture-avoiding substitution `M{N/x}`.
pub fn subst(m: &LambdaTerm, x: &str, n: &LambdaTerm) -> LambdaTerm {
    match m {
        LambdaTerm::Var(y) => {
            if y == x {
                n.clone()
            } else {
                m.clone()
            }
        }
        LambdaTerm::Abs(y, body) => {
            if y == x {
                m.clone()
            } else if n.free_vars().contains(y) {
                // rename the binder away from the free variables of n
                let mut avoid = n.free_vars();
                avoid.extend(body.free_vars());
                avoid.insert(x.to_owned());
                let y2 = fresh_name(y, &avoid);
                let renamed = subst(body, y, &LambdaTerm::Var(y2.clone()));
                LambdaTerm::Abs(y2, Box::new(subst(&renamed, x, n)))
            } else {
                LambdaTerm::Abs(y.clone(), Box::new(subst(body, x, n)))
            }
        }
        LambdaTerm::App(f, a) => LambdaTerm::app(subst(f, x, n), subst(a, x, n)),
    }
}

/// One deterministic reduction step of the given strategy, or `None` on a
/// normal form of that strategy.
pub fn step(m: &LambdaTerm, s: Strategy) -> Option<LambdaTerm> {
    match s {
        Strategy::CallByName => cbn_step(m),
        Strategy::StrongCallByName | Strategy::Head => head_step(m),
    }
}

fn cbn_step(m: &LambdaTerm) -> Option<LambdaTerm> {
    match m {
        LambdaTerm::App(f, a) => match f.as_ref() {
            LambdaTerm::Abs(x, body) => Some(subst(body, x, a)),
            _ => cbn_step(f).map(|f2| LambdaTerm::app(f2, a.as_ref().clone())),
        },
        _ => None,
    }
}

/// Contracts the head redex, also under leading binders. This is exactly the
/// strong call-by-name step: beta at the head, mu down the left spine, xi
/// under abstractions.
fn head_step(m: &LambdaTerm) -> Option<LambdaTerm> {
    match m {
        LambdaTerm::Abs(x, body) => {
            head_step(body).map(|b2| LambdaTerm::Abs(x.clone(), Box::new(b2)))
        }
        LambdaTerm::App(f, a) => match f.as_ref() {
            LambdaTerm::Abs(x, body) => Some(subst(body, x, a)),
            _ => head_step(f).map(|f2| LambdaTerm::app(f2, a.as_ref().clone())),
        },
        LambdaTerm::Var(_) => None,
    }
}

fn hnf_decompose(m: &LambdaTerm) -> Option<(Vec<String>, String, Vec<LambdaTerm>)> {
    let (binders, body) = m.strip_binders();
    let mut args = Vec::new();
    let mut cur = body;
    loop {
        match cur {
            LambdaTerm::Var(y) => {
                args.reverse();
                return Some((binders, y.clone(), args));
            }
            LambdaTerm::App(f, a) => {
                args.push(a.as_ref().clone());
                cur = f;
            }
            LambdaTerm::Abs(..) => return None,
        }
    }
}

/// Iterated head reduction with whole-term cycle detection.
pub fn head_reduce(m: &LambdaTerm, fuel: usize) -> HeadOutcome {
    let mut cur = m.clone();
    let mut visited = BTreeSet::new();
    let mut spent = 0usize;
    loop {
        if let Some((binders, head, args)) = hnf_decompose(&cur) {
            return HeadOutcome::Hnf {
                binders,
                head,
                args,
            };
        }
        let uncovered = cur.strip_binders().0.len();
        if !visited.insert(cur.canonical_key()) {
            return HeadOutcome::CycleDetected {
                uncovered_binders: uncovered,
            };
        }
        if spent >= fuel {
            return HeadOutcome::Exhausted {
                uncovered_binders: uncovered,
                residual: cur,
            };
        }
        cur = head_step(&cur).expect("non-hnf terms always have a head step");
        spent += 1;
    }
}

/// Bounded solvability / order-of-unsolvability classification.
///
/// Divergence is certified only by alpha-cycle detection: a whole-term cycle
/// gives a finite order (the number of binders uncovered at that point),
/// while a body recurring with a strictly grown binder prefix certifies
/// order omega.
pub fn classify(m: &LambdaTerm, fuel: usize) -> OrderEstimate {
    let mut cur = m.clone();
    // whole-term keys, and body-modulo-leading-binders keys with the binder
    // count at first sight
    let mut whole: BTreeSet<String> = BTreeSet::new();
    let mut bodies: BTreeMap<String, usize> = BTreeMap::new();
    let mut spent = 0usize;
    loop {
        if let Some((binders, head, args)) = hnf_decompose(&cur) {
            return OrderEstimate::Solvable(HeadOutcome::Hnf {
                binders,
                head,
                args,
            });
        }
        let (binders, body) = cur.strip_binders();
        let k = binders.len();
        if !whole.insert(cur.canonical_key()) {
            return OrderEstimate::ConfirmedUnsolvable(Order::Finite(k));
        }
        let body_key = body.canonical_key();
        match bodies.get(&body_key) {
            Some(&k0) if k0 < k => {
                return OrderEstimate::ConfirmedUnsolvable(Order::Omega);
            }
            Some(_) => {}
            None => {
                bodies.insert(body_key, k);
            }
        }
        if spent >= fuel {
            return OrderEstimate::Unknown { fuel_spent: spent };
        }
        cur = head_step(&cur).expect("non-hnf terms always have a head step");
        spent += 1;
    }
}

// ---------------------------------------------------------------------------
// parsing and printing
// ---------------------------------------------------------------------------

/// Syntax error with a byte position into the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}: {}", self.position, self.message)
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.pos,
            message: msg.to_owned(),
        })
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        let mut chars = self.src[self.pos..].char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() => {}
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

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }
}

/// Parses `term := var | "\" var+ "." term | term term | "(" term ")"`.
/// A literal `λ` is accepted in place of the backslash. Application is
/// left-associative; `\x y. M` desugars to `\x.\y.M`.
pub fn parse_lambda(text: &str) -> Result<LambdaTerm, ParseError> {
    let mut lx = Lexer::new(text);
    let t = parse_term(&mut lx)?;
    lx.skip_ws();
    if lx.pos != lx.src.len() {
        return lx.err("trailing input");
    }
    Ok(t)
}

fn parse_term(lx: &mut Lexer) -> Result<LambdaTerm, ParseError> {
    lx.skip_ws();
    if lx.eat("\\") || lx.eat("λ") {
        let mut binders = Vec::new();
        while let Some(x) = lx.ident() {
            binders.push(x);
        }
        if binders.is_empty() {
            return lx.err("expected binder after lambda");
        }
        if !lx.eat(".") {
            return lx.err("expected '.' after binders");
        }
        let body = parse_term(lx)?;
        return Ok(binders
            .into_iter()
            .rev()
            .fold(body, |acc, x| LambdaTerm::Abs(x, Box::new(acc))));
    }
    let mut atoms = vec![parse_atom(lx)?];
    loop {
        lx.skip_ws();
        match lx.peek_char() {
            Some('(') => atoms.push(parse_atom(lx)?),
            Some('\\') | Some('λ') => atoms.push(parse_term(lx)?),
            Some(c) if c.is_ascii_alphabetic() => atoms.push(parse_atom(lx)?),
            _ => break,
        }
    }
    let mut it = atoms.into_iter();
    let first = it.next().unwrap();
    Ok(it.fold(first, LambdaTerm::app))
}

fn parse_atom(lx: &mut Lexer) -> Result<LambdaTerm, ParseError> {
    lx.skip_ws();
    if lx.eat("(") {
        let t = parse_term(lx)?;
        if !lx.eat(")") {
            return lx.err("expected ')'");
        }
        return Ok(t);
    }
    if matches!(lx.peek_char(), Some('\\') | Some('λ')) {
        return parse_term(lx);
    }
    match lx.ident() {
        Some(x) => Ok(LambdaTerm::Var(x)),
        None => lx.err("expected term"),
    }
}

/// As `parse_lambda`, but the free identifiers `OMEGA` and `FIX` expand to
/// the purely divergent term and the fixed-point combinator.
pub fn parse_lambda_with_builtins(text: &str) -> Result<LambdaTerm, ParseError> {
    let t = parse_lambda(text)?;
    let t = subst_free(&t, "OMEGA", &LambdaTerm::omega());
    Ok(subst_free(&t, "FIX", &LambdaTerm::fix()))
}

fn subst_free(m: &LambdaTerm, x: &str, n: &LambdaTerm) -> LambdaTerm {
    if m.free_vars().contains(x) {
        subst(m, x, n)
    } else {
        m.clone()
    }
}

impl fmt::Display for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, f, false, false)
    }
}

fn fmt_term(
    t: &LambdaTerm,
    f: &mut fmt::Formatter<'_>,
    in_app_fun: bool,
    in_app_arg: bool,
) -> fmt::Result {
    match t {
        LambdaTerm::Var(x) => write!(f, "{x}"),
        LambdaTerm::Abs(..) => {
            if in_app_fun || in_app_arg {
                write!(f, "(")?;
            }
            let (binders, body) = t.strip_binders();
            write!(f, "\\{}", binders.join(" "))?;
            write!(f, ". ")?;
            fmt_term(body, f, false, false)?;
            if in_app_fun || in_app_arg {
                write!(f, ")")?;
            }
            Ok(())
        }
        LambdaTerm::App(fun, arg) => {
            if in_app_arg {
                write!(f, "(")?;
            }
            fmt_term(fun, f, true, false)?;
            write!(f, " ")?;
            fmt_term(arg, f, false, true)?;
            if in_app_arg {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> LambdaTerm {
        parse_lambda(s).unwrap()
    }

    #[test]
    fn parse_shapes() {
        assert_eq!(
            p("\\x. x x"),
            LambdaTerm::abs(
                "x",
                LambdaTerm::app(LambdaTerm::var("x"), LambdaTerm::var("x"))
            )
        );
        assert_eq!(
            p("x y z"),
            LambdaTerm::app(
                LambdaTerm::app(LambdaTerm::var("x"), LambdaTerm::var("y")),
                LambdaTerm::var("z")
            )
        );
        assert_eq!(
            p("\\x.(\\y.y) x"),
            LambdaTerm::abs(
                "x",
                LambdaTerm::app(
                    LambdaTerm::abs("y", LambdaTerm::var("y")),
                    LambdaTerm::var("x")
                )
            )
        );
        // nested binders desugar
        assert!(alpha_eq(&p("\\x y. x"), &p("\\x. \\y. x")));
        // unicode lambda
        assert!(alpha_eq(&p("λx. x"), &p("\\x. x")));
    }

    #[test]
    fn parse_errors_have_positions() {
        let e = parse_lambda("\\. x").unwrap_err();
        assert!(e.position <= 4);
        assert!(parse_lambda("(x").is_err());
        assert!(parse_lambda("x )").is_err());
    }

    #[test]
    fn print_parse_roundtrip() {
        for s in [
            "\\x. x x",
            "x y z",
            "\\x.(\\y.y) x",
            "(\\x. x x) (\\x. x x)",
            "\\f. (\\x. f (x x)) (\\x. f (x x))",
            "x (\\y. y) z",
        ] {
            let t = p(s);
            let printed = format!("{t}");
            assert!(alpha_eq(&t, &p(&printed)), "roundtrip failed on {printed}");
        }
    }

    #[test]
    fn subst_capture_avoiding() {
        // subst(\y.x, x, y) renames y
        let m = p("\\y. x");
        let r = subst(&m, "x", &LambdaTerm::var("y"));
        assert!(alpha_eq(&r, &p("\\z. y")));
        // subst(x x, x, \z.z)
        let m = p("x x");
        let r = subst(&m, "x", &p("\\z. z"));
        assert!(alpha_eq(&r, &p("(\\z.z)(\\z.z)")));
        // bound occurrence shadowed
        let m = p("\\x. x");
        let r = subst(&m, "x", &p("y y"));
        assert!(alpha_eq(&r, &p("\\x. x")));
    }

    #[test]
    fn subst_commutes_with_alpha() {
        let m1 = p("\\y. x y");
        let m2 = p("\\z. x z");
        let n = p("\\w. w w");
        assert!(alpha_eq(&subst(&m1, "x", &n), &subst(&m2, "x", &n)));
    }

    #[test]
    fn step_examples() {
        let omega = LambdaTerm::omega();
        let s = step(&omega, Strategy::CallByName).unwrap();
        assert!(alpha_eq(&s, &omega));

        let m = p("\\x. (\\y. y) x");
        assert_eq!(step(&m, Strategy::CallByName), None);
        let s = step(&m, Strategy::StrongCallByName).unwrap();
        assert!(alpha_eq(&s, &p("\\x. x")));
    }

    #[test]
    fn cbn_redex_is_head_redex() {
        for s in ["(\\x. x) y", "(\\x. x x) (\\z. z) w", "(\\x. \\y. x) a b"] {
            let m = p(s);
            if !matches!(m, LambdaTerm::Abs(..)) {
                if let Some(m1) = step(&m, Strategy::CallByName) {
                    let m2 = step(&m, Strategy::Head).unwrap();
                    assert!(alpha_eq(&m1, &m2));
                }
            }
        }
    }

    #[test]
    fn head_reduce_examples() {
        // already hnf
        let m = p("\\x. y x z");
        match head_reduce(&m, 5) {
            HeadOutcome::Hnf {
                binders,
                head,
                args,
            } => {
                assert_eq!(binders, vec!["x"]);
                assert_eq!(head, "y");
                assert_eq!(args.len(), 2);
            }
            other => panic!("expected hnf, got {other:?}"),
        }
        // Omega loops syntactically
        assert_eq!(
            head_reduce(&LambdaTerm::omega(), 10),
            HeadOutcome::CycleDetected {
                uncovered_binders: 0
            }
        );
        // one beta step by hand: (\x.x)(y z) ->h y z
        match head_reduce(&p("(\\x. x) (y z)"), 10) {
            HeadOutcome::Hnf {
                binders,
                head,
                args,
            } => {
                assert!(binders.is_empty());
                assert_eq!(head, "y");
                assert_eq!(args, vec![LambdaTerm::var("z")]);
            }
            other => panic!("expected hnf, got {other:?}"),
        }
    }

    #[test]
    fn classify_examples() {
        use Order::*;
        assert_eq!(
            classify(&LambdaTerm::omega(), 20),
            OrderEstimate::ConfirmedUnsolvable(Finite(0))
        );
        let m = LambdaTerm::abs("x", LambdaTerm::omega());
        assert_eq!(classify(&m, 20), OrderEstimate::ConfirmedUnsolvable(Finite(1)));
        // Y K is unsolvable of order omega
        let yk = LambdaTerm::app(LambdaTerm::fix(), p("\\a. \\b. a"));
        assert_eq!(classify(&yk, 50), OrderEstimate::ConfirmedUnsolvable(Omega));
        // solvable
        assert!(matches!(
            classify(&p("\\x. x"), 5),
            OrderEstimate::Solvable(_)
        ));
        // fuel exhaustion is Unknown, not an error
        assert!(matches!(
            classify(&LambdaTerm::omega(), 0),
            OrderEstimate::Unknown { .. }
        ));
    }

    #[test]
    fn classify_sound_at_higher_fuel() {
        // ConfirmedUnsolvable terms never reach hnf at 10x the fuel
        let cases = [
            LambdaTerm::omega(),
            LambdaTerm::abs("x", LambdaTerm::omega()),
            LambdaTerm::app(LambdaTerm::fix(), p("\\a. \\b. a")),
        ];
        for m in cases {
            if let OrderEstimate::ConfirmedUnsolvable(_) = classify(&m, 50) {
                assert!(!matches!(
                    head_reduce(&m, 500),
                    HeadOutcome::Hnf { .. }
                ));
            } else {
                panic!("expected confirmed unsolvable");
            }
        }
    }

    #[test]
    fn builtins() {
        let t = parse_lambda_with_builtins("\\x. OMEGA").unwrap();
        assert!(alpha_eq(&t, &LambdaTerm::abs("x", LambdaTerm::omega())));
        let t = parse_lambda_with_builtins("FIX (\\a b. a)").unwrap();
        assert!(alpha_eq(
            &t,
            &LambdaTerm::app(LambdaTerm::fix(), p("\\a. \\b. a"))
        ));
    }

    #[test]
    fn determinism() {
        let m = p("(\\x. x x) ((\\y. y) z)");
        let a = step(&m, Strategy::CallByName);
        let b = step(&m, Strategy::CallByName);
        assert_eq!(a, b);
    }
}
