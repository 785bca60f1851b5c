//! The three call-by-name encodings of the λ-calculus into the π-calculus,
//! their abstraction/variable contexts, wire processes, and the uniformity
//! (substitution-commutation) check.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::lambda::{fresh_name, LambdaTerm};
use crate::pi::{alpha_eq_pi, pi_subst, Name, PiAgent, Sorting};

/// The three encodings. Milner's and the variant are asynchronous; the
/// strong call-by-name encoding uses synchronous (and replicated) outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Encoding {
    MilnerCBN,
    VariantCBN,
    StrongCBN,
}

pub const ALL_ENCODINGS: [Encoding; 3] =
    [Encoding::MilnerCBN, Encoding::VariantCBN, Encoding::StrongCBN];

impl Encoding {
    pub fn name(&self) -> &'static str {
        match self {
            Encoding::MilnerCBN => "milner",
            Encoding::VariantCBN => "variant",
            Encoding::StrongCBN => "strong",
        }
    }

    pub fn is_async(&self) -> bool {
        !matches!(self, Encoding::StrongCBN)
    }

    /// Sort discipline of the encoding. For Milner's and the strong
    /// encoding, locations carry a variable and a location and variables
    /// carry a location. The variant's locations instead carry a single
    /// handle name, which itself carries a variable and a location.
    pub fn sorting(&self) -> Sorting {
        let mut s = Sorting::default();
        match self {
            Encoding::MilnerCBN | Encoding::StrongCBN => {
                s.obj.insert(
                    "Loc".to_owned(),
                    alloc::vec!["Var".to_owned(), "Loc".to_owned()],
                );
                s.obj.insert("Var".to_owned(), alloc::vec!["Loc".to_owned()]);
            }
            Encoding::VariantCBN => {
                s.obj.insert("Loc".to_owned(), alloc::vec!["Val".to_owned()]);
                s.obj.insert(
                    "Val".to_owned(),
                    alloc::vec!["Var".to_owned(), "Loc".to_owned()],
                );
                s.obj.insert("Var".to_owned(), alloc::vec!["Loc".to_owned()]);
            }
        }
        s
    }
}

impl core::fmt::Display for Encoding {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// One-shot relay between two location names: forwards a single
/// (variable, location) message from `p` to `q`.
pub fn wire(p: &str, q: &str) -> PiAgent {
    PiAgent::input(p, &["u", "v"], PiAgent::output(q, &["u", "v"]))
}

fn wire_fresh(p: &Name, q: &Name, avoid: &mut BTreeSet<Name>) -> PiAgent {
    let u = take_fresh("u", avoid);
    let v = take_fresh("v", avoid);
    PiAgent::Input {
        subj: p.clone(),
        params: alloc::vec![u.clone(), v.clone()],
        cont: Box::new(PiAgent::Output {
            subj: q.clone(),
            args: alloc::vec![u, v],
            cont: None,
        }),
    }
}

fn take_fresh(stem: &str, avoid: &mut BTreeSet<Name>) -> Name {
    let n = fresh_name(stem, avoid);
    avoid.insert(n.clone());
    n
}

/// λ-terms extended with indexed holes standing for abstractions; contexts
/// are computed by encoding hole-marked terms.
#[derive(Debug, Clone)]
enum ETerm {
    Var(Name),
    Abs(Name, Box<ETerm>),
    App(Box<ETerm>, Box<ETerm>),
    Hole(usize),
}

impl ETerm {
    fn from_lambda(m: &LambdaTerm) -> ETerm {
        match m {
            LambdaTerm::Var(x) => ETerm::Var(x.clone()),
            LambdaTerm::Abs(x, b) => ETerm::Abs(x.clone(), Box::new(ETerm::from_lambda(b))),
            LambdaTerm::App(f, a) => ETerm::App(
                Box::new(ETerm::from_lambda(f)),
                Box::new(ETerm::from_lambda(a)),
            ),
        }
    }

    fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            ETerm::Var(x) => {
                out.insert(x.clone());
            }
            ETerm::Abs(x, b) => {
                out.insert(x.clone());
                b.all_names(out);
            }
            ETerm::App(f, a) => {
                f.all_names(out);
                a.all_names(out);
            }
            ETerm::Hole(_) => {}
        }
    }
}

struct Encoder {
    kind: Encoding,
    avoid: BTreeSet<Name>,
}

impl Encoder {
    fn fresh(&mut self, stem: &str) -> Name {
        take_fresh(stem, &mut self.avoid)
    }

    fn enc(&mut self, m: &ETerm, p: &Name) -> PiAgent {
        match self.kind {
            Encoding::MilnerCBN => self.enc_milner(m, p),
            Encoding::VariantCBN => self.enc_variant(m, p),
            Encoding::StrongCBN => self.enc_strong(m, p),
        }
    }

    fn enc_milner(&mut self, m: &ETerm, p: &Name) -> PiAgent {
        match m {
            ETerm::Hole(i) => PiAgent::Apply {
                fun: Box::new(PiAgent::Hole(*i)),
                arg: p.clone(),
            },
            ETerm::Var(x) => PiAgent::Output {
                subj: x.clone(),
                args: alloc::vec![p.clone()],
                cont: None,
            },
            ETerm::Abs(x, body) => {
                let q = self.fresh("q");
                let inner = self.enc_milner(body, &q);
                PiAgent::Input {
                    subj: p.clone(),
                    params: alloc::vec![x.clone(), q],
                    cont: Box::new(inner),
                }
            }
            ETerm::App(f, a) => {
                let r = self.fresh("r");
                let x = self.fresh("y");
                let q = self.fresh("q");
                let ef = self.enc_milner(f, &r);
                let ea = self.enc_milner(a, &q);
                PiAgent::Res(
                    r.clone(),
                    Box::new(PiAgent::Res(
                        x.clone(),
                        Box::new(PiAgent::par(
                            ef,
                            PiAgent::par(
                                PiAgent::Output {
                                    subj: r,
                                    args: alloc::vec![x.clone(), p.clone()],
                                    cont: None,
                                },
                                PiAgent::RepInput {
                                    subj: x,
                                    params: alloc::vec![q],
                                    cont: Box::new(ea),
                                },
                            ),
                        )),
                    )),
                )
            }
        }
    }

    fn enc_variant(&mut self, m: &ETerm, p: &Name) -> PiAgent {
        match m {
            ETerm::Hole(i) => PiAgent::Apply {
                fun: Box::new(PiAgent::Hole(*i)),
                arg: p.clone(),
            },
            ETerm::Var(x) => PiAgent::Output {
                subj: x.clone(),
                args: alloc::vec![p.clone()],
                cont: None,
            },
            ETerm::Abs(x, body) => {
                let v = self.fresh("v");
                let q = self.fresh("q");
                let inner = self.enc_variant(body, &q);
                PiAgent::Res(
                    v.clone(),
                    Box::new(PiAgent::par(
                        PiAgent::Output {
                            subj: p.clone(),
                            args: alloc::vec![v.clone()],
                            cont: None,
                        },
                        PiAgent::Input {
                            subj: v,
                            params: alloc::vec![x.clone(), q],
                            cont: Box::new(inner),
                        },
                    )),
                )
            }
            ETerm::App(f, a) => {
                let r = self.fresh("r");
                let v = self.fresh("v");
                let y = self.fresh("y");
                let q = self.fresh("q");
                let ef = self.enc_variant(f, &r);
                let ea = self.enc_variant(a, &q);
                PiAgent::Res(
                    r.clone(),
                    Box::new(PiAgent::par(
                        ef,
                        PiAgent::Input {
                            subj: r,
                            params: alloc::vec![v.clone()],
                            cont: Box::new(PiAgent::Res(
                                y.clone(),
                                Box::new(PiAgent::par(
                                    PiAgent::Output {
                                        subj: v,
                                        args: alloc::vec![y.clone(), p.clone()],
                                        cont: None,
                                    },
                                    PiAgent::RepInput {
                                        subj: y,
                                        params: alloc::vec![q],
                                        cont: Box::new(ea),
                                    },
                                )),
                            )),
                        },
                    )),
                )
            }
        }
    }

    fn enc_strong(&mut self, m: &ETerm, p: &Name) -> PiAgent {
        match m {
            ETerm::Hole(i) => PiAgent::Apply {
                fun: Box::new(PiAgent::Hole(*i)),
                arg: p.clone(),
            },
            ETerm::Var(x) => {
                let p2 = self.fresh("w");
                let fwd = wire_fresh(&p2, p, &mut self.avoid);
                PiAgent::Input {
                    subj: x.clone(),
                    params: alloc::vec![p2],
                    cont: Box::new(fwd),
                }
            }
            ETerm::Abs(x, body) => {
                let q = self.fresh("q");
                let inner = self.enc_strong(body, &q);
                PiAgent::Res(
                    x.clone(),
                    Box::new(PiAgent::Res(
                        q.clone(),
                        Box::new(PiAgent::par(
                            PiAgent::Output {
                                subj: p.clone(),
                                args: alloc::vec![x.clone(), q],
                                cont: None,
                            },
                            inner,
                        )),
                    )),
                )
            }
            ETerm::App(f, a) => {
                let q = self.fresh("q");
                let r = self.fresh("r");
                let y = self.fresh("y");
                let p2 = self.fresh("w");
                let ef = self.enc_strong(f, &q);
                let ea = self.enc_strong(a, &r);
                let fwd = wire_fresh(&p2, p, &mut self.avoid);
                PiAgent::Res(
                    q.clone(),
                    Box::new(PiAgent::Res(
                        r.clone(),
                        Box::new(PiAgent::par(
                            ef,
                            PiAgent::Input {
                                subj: q,
                                params: alloc::vec![y.clone(), p2],
                                cont: Box::new(PiAgent::par(
                                    fwd,
                                    PiAgent::RepOutput {
                                        subj: y,
                                        args: alloc::vec![r],
                                        cont: Box::new(ea),
                                    },
                                )),
                            },
                        )),
                    )),
                )
            }
        }
    }
}

fn encode_eterm(e: Encoding, m: &ETerm) -> PiAgent {
    let mut avoid = BTreeSet::new();
    m.all_names(&mut avoid);
    let mut enc = Encoder { kind: e, avoid };
    let p = enc.fresh("p");
    let body = enc.enc(m, &p);
    PiAgent::Abs {
        param: p,
        body: Box::new(body),
    }
}

/// Encodes a λ-term as a π-abstraction over its result location.
pub fn encode(e: Encoding, m: &LambdaTerm) -> PiAgent {
    encode_eterm(e, &ETerm::from_lambda(m))
}

/// `encode(e, m)` applied to a concrete location name.
pub fn encode_at(e: Encoding, m: &LambdaTerm, loc: &str) -> PiAgent {
    apply_abs(encode(e, m), loc)
}

/// Applies a π-abstraction to a name, resolving the application.
pub fn apply_abs(abs: PiAgent, loc: &str) -> PiAgent {
    match abs {
        PiAgent::Abs { param, body } => {
            let mut sigma = BTreeMap::new();
            sigma.insert(param, loc.to_owned());
            pi_subst(&body, &sigma)
        }
        other => PiAgent::Apply {
            fun: Box::new(other),
            arg: loc.to_owned(),
        },
    }
}

/// The abstraction context of the encoding: the image of `λx.[·]`.
pub fn abstraction_context(e: Encoding, x: &str) -> PiAgent {
    encode_eterm(
        e,
        &ETerm::Abs(x.to_owned(), Box::new(ETerm::Hole(0))),
    )
}

/// The variable context of the encoding: the image of `x [·]₀ ⋯ [·]ₙ₋₁`.
pub fn variable_context(e: Encoding, x: &str, n: usize) -> PiAgent {
    let mut t = ETerm::Var(x.to_owned());
    for i in 0..n {
        t = ETerm::App(Box::new(t), Box::new(ETerm::Hole(i)));
    }
    encode_eterm(e, &t)
}

/// True iff every hole of the context occurs under an input or output
/// prefix.
pub fn is_guarded(ctx: &PiAgent) -> bool {
    fn walk(a: &PiAgent, under: bool) -> bool {
        match a {
            PiAgent::Hole(_) => under,
            PiAgent::Nil => true,
            PiAgent::Input { cont, .. }
            | PiAgent::RepInput { cont, .. }
            | PiAgent::RepOutput { cont, .. } => walk(cont, true),
            PiAgent::Output { cont, .. } => {
                cont.as_ref().map(|c| walk(c, true)).unwrap_or(true)
            }
            PiAgent::Par(l, r) => walk(l, under) && walk(r, under),
            PiAgent::Res(_, b) => walk(b, under),
            PiAgent::Apply { fun, .. } => walk(fun, under),
            PiAgent::Abs { body, .. } => walk(body, under),
        }
    }
    walk(ctx, false)
}

/// Replaces each indexed hole with the corresponding abstraction.
pub fn fill_context(ctx: &PiAgent, fills: &[PiAgent]) -> PiAgent {
    fn walk(a: &PiAgent, fills: &[PiAgent]) -> PiAgent {
        match a {
            PiAgent::Hole(i) => fills.get(*i).cloned().unwrap_or(PiAgent::Hole(*i)),
            PiAgent::Nil => PiAgent::Nil,
            PiAgent::Input { subj, params, cont } => PiAgent::Input {
                subj: subj.clone(),
                params: params.clone(),
                cont: Box::new(walk(cont, fills)),
            },
            PiAgent::RepInput { subj, params, cont } => PiAgent::RepInput {
                subj: subj.clone(),
                params: params.clone(),
                cont: Box::new(walk(cont, fills)),
            },
            PiAgent::Output { subj, args, cont } => PiAgent::Output {
                subj: subj.clone(),
                args: args.clone(),
                cont: cont.as_ref().map(|c| Box::new(walk(c, fills))),
            },
            PiAgent::RepOutput { subj, args, cont } => PiAgent::RepOutput {
                subj: subj.clone(),
                args: args.clone(),
                cont: Box::new(walk(cont, fills)),
            },
            PiAgent::Par(l, r) => PiAgent::par(walk(l, fills), walk(r, fills)),
            PiAgent::Res(n, b) => PiAgent::Res(n.clone(), Box::new(walk(b, fills))),
            PiAgent::Apply { fun, arg } => PiAgent::Apply {
                fun: Box::new(walk(fun, fills)),
                arg: arg.clone(),
            },
            PiAgent::Abs { param, body } => PiAgent::Abs {
                param: param.clone(),
                body: Box::new(walk(body, fills)),
            },
        }
    }
    walk(ctx, fills)
}

/// Like [`fill_context`], but first alpha-renames binders of `ctx` that would
/// capture a free name of a fill. Names in `keep` are exempt: they are the
/// context's intended interface and are allowed to capture (for instance the
/// abstraction context deliberately binds the variable it abstracts).
pub fn fill_context_keeping(
    ctx: &PiAgent,
    fills: &[PiAgent],
    keep: &BTreeSet<Name>,
) -> PiAgent {
    use crate::pi::free_names;
    let mut clash: BTreeSet<Name> = BTreeSet::new();
    for f in fills {
        clash.extend(free_names(f));
    }
    for k in keep {
        clash.remove(k);
    }
    let mut avoid: BTreeSet<Name> = free_names(ctx);
    collect_binders(ctx, &mut avoid);
    for f in fills {
        avoid.extend(free_names(f));
        collect_binders(f, &mut avoid);
    }
    let renamed = freshen_clashing(ctx, &clash, &mut avoid);
    fill_context(&renamed, fills)
}

fn collect_binders(a: &PiAgent, out: &mut BTreeSet<Name>) {
    match a {
        PiAgent::Nil | PiAgent::Hole(_) => {}
        PiAgent::Input { params, cont, .. } | PiAgent::RepInput { params, cont, .. } => {
            out.extend(params.iter().cloned());
            collect_binders(cont, out);
        }
        PiAgent::Output { cont, .. } => {
            if let Some(c) = cont {
                collect_binders(c, out);
            }
        }
        PiAgent::RepOutput { cont, .. } => collect_binders(cont, out),
        PiAgent::Par(l, r) => {
            collect_binders(l, out);
            collect_binders(r, out);
        }
        PiAgent::Res(n, body) => {
            out.insert(n.clone());
            collect_binders(body, out);
        }
        PiAgent::Apply { fun, .. } => collect_binders(fun, out),
        PiAgent::Abs { param, body } => {
            out.insert(param.clone());
            collect_binders(body, out);
        }
    }
}

fn pick_fresh(stem: &str, clash: &BTreeSet<Name>, avoid: &mut BTreeSet<Name>) -> Name {
    let mut i = 0usize;
    loop {
        let cand = alloc::format!("{stem}_{i}");
        if !avoid.contains(&cand) && !clash.contains(&cand) {
            avoid.insert(cand.clone());
            return cand;
        }
        i += 1;
    }
}

fn freshen_params(
    params: &[Name],
    cont: &PiAgent,
    clash: &BTreeSet<Name>,
    avoid: &mut BTreeSet<Name>,
) -> (Vec<Name>, PiAgent) {
    let mut sigma = BTreeMap::new();
    let mut out = Vec::with_capacity(params.len());
    for p in params {
        if clash.contains(p) {
            let fresh = pick_fresh(p, clash, avoid);
            sigma.insert(p.clone(), fresh.clone());
            out.push(fresh);
        } else {
            out.push(p.clone());
        }
    }
    let body = if sigma.is_empty() {
        cont.clone()
    } else {
        pi_subst(cont, &sigma)
    };
    (out, freshen_clashing(&body, clash, avoid))
}

fn freshen_clashing(a: &PiAgent, clash: &BTreeSet<Name>, avoid: &mut BTreeSet<Name>) -> PiAgent {
    if clash.is_empty() {
        return a.clone();
    }
    match a {
        PiAgent::Nil | PiAgent::Hole(_) => a.clone(),
        PiAgent::Input { subj, params, cont } => {
            let (params, cont) = freshen_params(params, cont, clash, avoid);
            PiAgent::Input {
                subj: subj.clone(),
                params,
                cont: Box::new(cont),
            }
        }
        PiAgent::RepInput { subj, params, cont } => {
            let (params, cont) = freshen_params(params, cont, clash, avoid);
            PiAgent::RepInput {
                subj: subj.clone(),
                params,
                cont: Box::new(cont),
            }
        }
        PiAgent::Output { subj, args, cont } => PiAgent::Output {
            subj: subj.clone(),
            args: args.clone(),
            cont: cont
                .as_ref()
                .map(|c| Box::new(freshen_clashing(c, clash, avoid))),
        },
        PiAgent::RepOutput { subj, args, cont } => PiAgent::RepOutput {
            subj: subj.clone(),
            args: args.clone(),
            cont: Box::new(freshen_clashing(cont, clash, avoid)),
        },
        PiAgent::Par(l, r) => PiAgent::par(
            freshen_clashing(l, clash, avoid),
            freshen_clashing(r, clash, avoid),
        ),
        PiAgent::Res(n, body) => {
            let (names, body) =
                freshen_params(core::slice::from_ref(n), body, clash, avoid);
            PiAgent::Res(names.into_iter().next().unwrap(), Box::new(body))
        }
        PiAgent::Apply { fun, arg } => PiAgent::Apply {
            fun: Box::new(freshen_clashing(fun, clash, avoid)),
            arg: arg.clone(),
        },
        PiAgent::Abs { param, body } => {
            let (names, body) =
                freshen_params(core::slice::from_ref(param), body, clash, avoid);
            PiAgent::Abs {
                param: names.into_iter().next().unwrap(),
                body: Box::new(body),
            }
        }
    }
}

/// Applies an injective renaming to the free variables of a λ-term.
pub fn rename_lambda(m: &LambdaTerm, sigma: &BTreeMap<Name, Name>) -> LambdaTerm {
    use crate::lambda::subst;
    // two passes through temporaries keep the simultaneous renaming sound
    let mut avoid: BTreeSet<Name> = m.free_vars();
    avoid.extend(sigma.keys().cloned());
    avoid.extend(sigma.values().cloned());
    let mut temped = m.clone();
    let mut temps = Vec::new();
    for (k, v) in sigma {
        let t = take_fresh("t", &mut avoid);
        temped = subst(&temped, k, &LambdaTerm::Var(t.clone()));
        temps.push((t, v.clone()));
    }
    for (t, v) in temps {
        temped = subst(&temped, &t, &LambdaTerm::Var(v));
    }
    temped
}

/// The encoding commutes with injective renaming of free variables:
/// `encode(Mσ)` is alpha-equal to `encode(M)σ`.
pub fn uniformity_check(e: Encoding, m: &LambdaTerm, sigma: &BTreeMap<Name, Name>) -> bool {
    let lhs = encode(e, &rename_lambda(m, sigma));
    let rhs = pi_subst(&encode(e, m), sigma);
    alpha_eq_pi(&lhs, &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::{dexpansion_leq, weak_bisim, Bounds};
    use crate::lambda::parse_lambda;
    use crate::pi::{free_names, parse_pi, print_pi, sort_check, state_key};

    fn lam(s: &str) -> LambdaTerm {
        parse_lambda(s).unwrap()
    }

    #[test]
    fn milner_clauses() {
        assert!(alpha_eq_pi(
            &encode(Encoding::MilnerCBN, &lam("x")),
            &parse_pi("(\\p) x<p>").unwrap()
        ));
        assert!(alpha_eq_pi(
            &encode(Encoding::MilnerCBN, &lam("\\x. x")),
            &parse_pi("(\\p) p(x,q). x<q>").unwrap()
        ));
        assert!(alpha_eq_pi(
            &encode(Encoding::MilnerCBN, &lam("x y")),
            &parse_pi("(\\p) new r,z. (x<r> | (r<z,p> | !z(q). y<q>))").unwrap()
        ));
    }

    #[test]
    fn variant_clauses() {
        assert!(alpha_eq_pi(
            &encode(Encoding::VariantCBN, &lam("x")),
            &parse_pi("(\\p) x<p>").unwrap()
        ));
        assert!(alpha_eq_pi(
            &encode(Encoding::VariantCBN, &lam("\\x. x")),
            &parse_pi("(\\p) new v. (p<v> | v(x,q). x<q>)").unwrap()
        ));
    }

    #[test]
    fn strong_clauses() {
        assert!(alpha_eq_pi(
            &encode(Encoding::StrongCBN, &lam("x")),
            &parse_pi("(\\p) x(w). w(u,v). p<u,v>").unwrap()
        ));
        assert!(alpha_eq_pi(
            &encode(Encoding::StrongCBN, &lam("\\x. x")),
            &parse_pi("(\\p) new x,q. (p<x,q> | x(w). w(u,v). q<u,v>)").unwrap()
        ));
    }

    #[test]
    fn encode_is_abs_with_free_vars() {
        for e in ALL_ENCODINGS {
            for s in ["x", "\\x. x y", "(\\x. x x) z", "\\x.\\y. x"] {
                let m = lam(s);
                let a = encode(e, &m);
                assert!(matches!(a, PiAgent::Abs { .. }));
                assert_eq!(free_names(&a), m.free_vars(), "{e} on {s}");
            }
        }
    }

    #[test]
    fn async_split() {
        for s in ["x", "\\x. x", "x y", "(\\x. x x)(\\x. x x)"] {
            let m = lam(s);
            assert!(encode(Encoding::MilnerCBN, &m).is_async());
            assert!(encode(Encoding::VariantCBN, &m).is_async());
        }
        // strong outputs are synchronous only through wires and replication
        assert!(!encode(Encoding::StrongCBN, &lam("x y")).is_async());
    }

    #[test]
    fn sorts_check_on_encodings() {
        for e in ALL_ENCODINGS {
            let mut s = e.sorting();
            for src in ["\\x. x", "x y", "\\x. x (y y)"] {
                let m = lam(src);
                for v in m.free_vars() {
                    s.sort_of.insert(v, "Var".to_owned());
                }
                let a = encode_at(e, &m, "p");
                s.sort_of.insert("p".to_owned(), "Loc".to_owned());
                sort_check(&a, &s).unwrap_or_else(|err| {
                    panic!("sorting failed for {e} on {src}: {err}")
                });
            }
        }
    }

    #[test]
    fn wire_has_one_input_transition() {
        let w = wire("p", "q");
        let ts = crate::pi::transitions(&w).unwrap();
        assert_eq!(ts.len(), 1);
        assert!(matches!(&ts[0].0, crate::pi::Label::In { subj, .. } if subj == "p"));
    }

    #[test]
    fn contexts_and_guardedness() {
        let c = abstraction_context(Encoding::MilnerCBN, "x");
        assert!(print_pi(&c).contains("[0]"));
        assert!(is_guarded(&c));
        assert!(is_guarded(&variable_context(Encoding::MilnerCBN, "x", 1)));
        assert!(is_guarded(&abstraction_context(Encoding::VariantCBN, "x")));
        assert!(!is_guarded(&abstraction_context(Encoding::StrongCBN, "x")));
        let unguarded = parse_pi("(\\p) ([0])<p>");
        assert!(!is_guarded(&unguarded.unwrap_or(PiAgent::Apply {
            fun: alloc::boxed::Box::new(PiAgent::Hole(0)),
            arg: "p".to_owned(),
        })));
    }

    #[test]
    fn variable_context_zero_has_no_holes() {
        let c = variable_context(Encoding::MilnerCBN, "x", 0);
        assert!(!c.contains_hole());
        assert!(alpha_eq_pi(&c, &encode(Encoding::MilnerCBN, &lam("x"))));
    }

    #[test]
    fn compositionality_of_application() {
        for e in ALL_ENCODINGS {
            let m = lam("x (\\z. z)");
            let direct = encode(e, &m);
            let ctx = variable_context(e, "x", 1);
            let filled = fill_context(&ctx, &[encode(e, &lam("\\z. z"))]);
            assert_eq!(
                state_key(&apply_abs(direct, "p")),
                state_key(&apply_abs(filled, "p")),
                "compositionality under {e}"
            );
        }
    }

    #[test]
    fn uniformity_examples() {
        let mut sigma = BTreeMap::new();
        sigma.insert("x".to_owned(), "a".to_owned());
        sigma.insert("y".to_owned(), "b".to_owned());
        assert!(uniformity_check(Encoding::MilnerCBN, &lam("x y"), &sigma));
        assert!(uniformity_check(Encoding::MilnerCBN, &lam("\\x. x"), &BTreeMap::new()));
        let mut one = BTreeMap::new();
        one.insert("x".to_owned(), "z".to_owned());
        assert!(uniformity_check(Encoding::StrongCBN, &lam("x"), &one));
        assert!(uniformity_check(Encoding::VariantCBN, &lam("x y"), &sigma));
    }

    #[test]
    fn wire_law_for_strong_encoding() {
        // new r. (wire(r,p) | [[M]]<r>)  is dexpansion-above  [[M]]<p>
        let b = Bounds::default();
        for src in ["x", "\\x. x"] {
            let m = lam(src);
            let lhs = encode_at(Encoding::StrongCBN, &m, "p");
            let rhs = PiAgent::res(
                "r",
                PiAgent::par(wire("r", "p"), encode_at(Encoding::StrongCBN, &m, "r")),
            );
            let v = dexpansion_leq(&lhs, &rhs, &b);
            assert!(v.is_proved(), "wire law failed for {src}: {v}");
        }
    }

    #[test]
    fn omega_encodings_diverge_silently() {
        let b = Bounds::default();
        let omega = LambdaTerm::omega();
        for e in ALL_ENCODINGS {
            let p = encode_at(e, &omega, "p");
            let r = crate::equiv::barbs(&p, &b);
            assert!(r.sync.is_refuted(), "omega has a barb under {e}");
            assert!(crate::equiv::diverges(&p, &b).is_proved());
        }
    }

    #[test]
    fn beta_seed_weak_bisim() {
        // (\x.x) y  vs  y under Milner: weakly bisimilar encodings
        let b = Bounds::default();
        let lhs = encode_at(Encoding::MilnerCBN, &lam("(\\x. x) y"), "p");
        let rhs = encode_at(Encoding::MilnerCBN, &lam("y"), "p");
        assert!(weak_bisim(&lhs, &rhs, &b).is_proved());
    }
}
