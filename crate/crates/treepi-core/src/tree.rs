//! Finite-depth Levy-Longo and Bohm tree approximants.

use alloc::string::String;
use alloc::vec::Vec;

use crate::lambda::{classify, HeadOutcome, LambdaTerm, Order, OrderEstimate};

/// Finite tree approximant. `BotLeaf(n)` encodes `\x1..xn. bot` (n = 0 is
/// plain bot); `TopLeaf` stands for unsolvables of order omega and never
/// occurs in a BT.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    TopLeaf,
    BotLeaf(usize),
    Node {
        binders: Vec<String>,
        head: String,
        children: Vec<Tree>,
    },
    UnknownLeaf(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    LevyLongo,
    Bohm,
}

/// Three-valued tree comparison; `Different` carries the child-index path of
/// a concrete mismatch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeCmp {
    Equal,
    Different(Vec<usize>),
    Unknown,
}

/// Levy-Longo tree approximant of `m` down to `depth` node levels.
pub fn lt_approx(m: &LambdaTerm, depth: usize, fuel: usize) -> Tree {
    approx(m, depth, fuel, TreeKind::LevyLongo)
}

/// Bohm tree approximant: every confirmed unsolvable collapses to plain bot.
pub fn bt_approx(m: &LambdaTerm, depth: usize, fuel: usize) -> Tree {
    approx(m, depth, fuel, TreeKind::Bohm)
}

pub fn approx(m: &LambdaTerm, depth: usize, fuel: usize, kind: TreeKind) -> Tree {
    match classify(m, fuel) {
        OrderEstimate::ConfirmedUnsolvable(order) => match (kind, order) {
            (TreeKind::Bohm, _) => Tree::BotLeaf(0),
            (TreeKind::LevyLongo, Order::Omega) => Tree::TopLeaf,
            (TreeKind::LevyLongo, Order::Finite(n)) => Tree::BotLeaf(n),
        },
        OrderEstimate::Unknown { fuel_spent } => Tree::UnknownLeaf(fuel_spent),
        OrderEstimate::Solvable(HeadOutcome::Hnf {
            binders,
            head,
            args,
        }) => {
            let children = args
                .iter()
                .map(|a| {
                    if depth == 0 {
                        Tree::UnknownLeaf(0)
                    } else {
                        approx(a, depth - 1, fuel, kind)
                    }
                })
                .collect();
            Tree::Node {
                binders,
                head,
                children,
            }
        }
        OrderEstimate::Solvable(_) => unreachable!("Solvable always carries an Hnf"),
    }
}

/// Structural comparison modulo alpha-renaming of binder sequences.
pub fn tree_eq(t1: &Tree, t2: &Tree) -> TreeCmp {
    let mut path = Vec::new();
    cmp(t1, t2, &mut Vec::new(), &mut Vec::new(), &mut path)
}

fn resolve(binders: &[(String, usize)], name: &str) -> Option<usize> {
    binders
        .iter()
        .rev()
        .find(|(b, _)| b == name)
        .map(|(_, i)| *i)
}

fn cmp(
    t1: &Tree,
    t2: &Tree,
    env1: &mut Vec<(String, usize)>,
    env2: &mut Vec<(String, usize)>,
    path: &mut Vec<usize>,
) -> TreeCmp {
    match (t1, t2) {
        (Tree::UnknownLeaf(_), _) | (_, Tree::UnknownLeaf(_)) => TreeCmp::Unknown,
        (Tree::TopLeaf, Tree::TopLeaf) => TreeCmp::Equal,
        (Tree::BotLeaf(n), Tree::BotLeaf(m)) if n == m => TreeCmp::Equal,
        (
            Tree::Node {
                binders: b1,
                head: h1,
                children: c1,
            },
            Tree::Node {
                binders: b2,
                head: h2,
                children: c2,
            },
        ) => {
            if b1.len() != b2.len() || c1.len() != c2.len() {
                return TreeCmp::Different(path.clone());
            }
            let base = env1.len();
            for (i, (x, y)) in b1.iter().zip(b2.iter()).enumerate() {
                env1.push((x.clone(), base + i));
                env2.push((y.clone(), base + i));
            }
            let heads_match = match (resolve(env1, h1), resolve(env2, h2)) {
                (Some(i), Some(j)) => i == j,
                (None, None) => h1 == h2,
                _ => false,
            };
            let mut result = if heads_match {
                TreeCmp::Equal
            } else {
                TreeCmp::Different(path.clone())
            };
            if matches!(result, TreeCmp::Equal) {
                let mut saw_unknown = false;
                for (i, (u, v)) in c1.iter().zip(c2.iter()).enumerate() {
                    path.push(i);
                    match cmp(u, v, env1, env2, path) {
                        TreeCmp::Equal => {}
                        TreeCmp::Unknown => saw_unknown = true,
                        d @ TreeCmp::Different(_) => {
                            result = d;
                            path.pop();
                            break;
                        }
                    }
                    path.pop();
                }
                if matches!(result, TreeCmp::Equal) && saw_unknown {
                    result = TreeCmp::Unknown;
                }
            }
            env1.truncate(base);
            env2.truncate(base);
            result
        }
        _ => TreeCmp::Different(path.clone()),
    }
}

/// Maps every `TopLeaf` and `BotLeaf(n)` to `BotLeaf(0)`. On trees without
/// unknowns this turns an LT approximant into the BT one.
pub fn collapse_to_bohm(t: &Tree) -> Tree {
    match t {
        Tree::TopLeaf | Tree::BotLeaf(_) => Tree::BotLeaf(0),
        Tree::UnknownLeaf(f) => Tree::UnknownLeaf(*f),
        Tree::Node {
            binders,
            head,
            children,
        } => Tree::Node {
            binders: binders.clone(),
            head: head.clone(),
            children: children.iter().map(collapse_to_bohm).collect(),
        },
    }
}

/// Truncates a tree to `depth` node levels, replacing cut subtrees by
/// `UnknownLeaf(0)` markers.
pub fn truncate(t: &Tree, depth: usize) -> Tree {
    match t {
        Tree::Node {
            binders,
            head,
            children,
        } => Tree::Node {
            binders: binders.clone(),
            head: head.clone(),
            children: children
                .iter()
                .map(|c| {
                    if depth == 0 {
                        Tree::UnknownLeaf(0)
                    } else {
                        truncate(c, depth - 1)
                    }
                })
                .collect(),
        },
        other => other.clone(),
    }
}

impl Tree {
    pub fn has_unknown(&self) -> bool {
        match self {
            Tree::UnknownLeaf(_) => true,
            Tree::Node { children, .. } => children.iter().any(Tree::has_unknown),
            _ => false,
        }
    }

    /// Indented text rendering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.render(0, &mut out);
        out
    }

    fn render(&self, indent: usize, out: &mut String) {
        for _ in 0..indent {
            out.push_str("  ");
        }
        match self {
            Tree::TopLeaf => out.push_str("top\n"),
            Tree::BotLeaf(0) => out.push_str("bot\n"),
            Tree::BotLeaf(n) => {
                out.push('\\');
                for i in 0..*n {
                    if i > 0 {
                        out.push(' ');
                    }
                    out.push_str("_");
                }
                out.push_str(". bot\n");
            }
            Tree::UnknownLeaf(_) => out.push_str("?\n"),
            Tree::Node {
                binders,
                head,
                children,
            } => {
                if !binders.is_empty() {
                    out.push('\\');
                    out.push_str(&binders.join(" "));
                    out.push_str(". ");
                }
                out.push_str(head);
                out.push('\n');
                for c in children {
                    c.render(indent + 1, out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::parse_lambda;

    fn p(s: &str) -> LambdaTerm {
        parse_lambda(s).unwrap()
    }

    #[test]
    fn lt_examples() {
        assert_eq!(lt_approx(&LambdaTerm::omega(), 3, 20), Tree::BotLeaf(0));
        assert_eq!(
            lt_approx(&LambdaTerm::abs("x", LambdaTerm::omega()), 3, 20),
            Tree::BotLeaf(1)
        );
        // \x. x (\y. Omega) -> Node([x], x, [BotLeaf(1)])
        let m = LambdaTerm::abs(
            "x",
            LambdaTerm::app(
                LambdaTerm::var("x"),
                LambdaTerm::abs("y", LambdaTerm::omega()),
            ),
        );
        assert_eq!(
            lt_approx(&m, 2, 50),
            Tree::Node {
                binders: alloc::vec!["x".into()],
                head: "x".into(),
                children: alloc::vec![Tree::BotLeaf(1)],
            }
        );
    }

    #[test]
    fn bt_examples() {
        assert_eq!(
            bt_approx(&LambdaTerm::abs("x", LambdaTerm::omega()), 3, 20),
            Tree::BotLeaf(0)
        );
        let yk = LambdaTerm::app(LambdaTerm::fix(), p("\\a. \\b. a"));
        assert_eq!(bt_approx(&yk, 3, 50), Tree::BotLeaf(0));
        assert_eq!(
            bt_approx(&p("\\x. x"), 3, 20),
            Tree::Node {
                binders: alloc::vec!["x".into()],
                head: "x".into(),
                children: alloc::vec![],
            }
        );
        // Y K has order omega: its LT is top
        assert_eq!(lt_approx(&yk, 3, 50), Tree::TopLeaf);
    }

    #[test]
    fn tree_eq_examples() {
        assert_eq!(tree_eq(&Tree::BotLeaf(0), &Tree::BotLeaf(0)), TreeCmp::Equal);
        assert_eq!(
            tree_eq(&Tree::BotLeaf(1), &Tree::BotLeaf(0)),
            TreeCmp::Different(alloc::vec![])
        );
        let n1 = Tree::Node {
            binders: alloc::vec!["x".into()],
            head: "x".into(),
            children: alloc::vec![Tree::UnknownLeaf(0)],
        };
        let n2 = Tree::Node {
            binders: alloc::vec!["x".into()],
            head: "x".into(),
            children: alloc::vec![Tree::BotLeaf(0)],
        };
        assert_eq!(tree_eq(&n1, &n2), TreeCmp::Unknown);
    }

    #[test]
    fn tree_eq_alpha() {
        let t1 = lt_approx(&p("\\x. x y"), 3, 20);
        let t2 = lt_approx(&p("\\z. z y"), 3, 20);
        assert_eq!(tree_eq(&t1, &t2), TreeCmp::Equal);
        // free names must match exactly
        let t3 = lt_approx(&p("\\z. z w"), 3, 20);
        assert!(matches!(tree_eq(&t1, &t3), TreeCmp::Different(_)));
    }

    #[test]
    fn depth_zero_emits_unknown_children() {
        let t = lt_approx(&p("\\x. x y"), 0, 20);
        match t {
            Tree::Node { children, .. } => {
                assert_eq!(children, alloc::vec![Tree::UnknownLeaf(0)])
            }
            other => panic!("expected node, got {other:?}"),
        }
    }

    #[test]
    fn monotonicity_under_truncation() {
        for s in ["\\x. x (x y) (\\z. z z)", "\\x. x ((\\y. y) x)"] {
            let m = p(s);
            let deep = lt_approx(&m, 3, 50);
            let shallow = lt_approx(&m, 2, 50);
            assert_eq!(truncate(&deep, 2), shallow);
        }
    }

    #[test]
    fn collapse_law() {
        for s in ["\\x. x", "\\x. x y"] {
            let m = p(s);
            let lt = lt_approx(&m, 3, 50);
            let bt = bt_approx(&m, 3, 50);
            if !lt.has_unknown() {
                assert_eq!(collapse_to_bohm(&lt), bt);
            }
        }
        let m = LambdaTerm::abs("x", LambdaTerm::omega());
        assert_eq!(
            collapse_to_bohm(&lt_approx(&m, 3, 50)),
            bt_approx(&m, 3, 50)
        );
    }
}
