//! JSON views of the core data types. Every view is a plain serde struct
//! mirrored by a schema file under `schemas/`; conversions are total, so
//! serializing never fails for well-formed inputs.

use serde::{Deserialize, Serialize};
use treepi_core::audit::{AuditEntry, AuditReport};
use treepi_core::equiv::{Bounds, Side, Verdict, Witness};
use treepi_core::lambda::LambdaTerm;
use treepi_core::pi::{print_pi, Label, PiAgent};
use treepi_core::tree::Tree;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct BoundsJson {
    pub max_states: usize,
    pub tau_budget: usize,
    pub max_rounds: usize,
}

impl From<&Bounds> for BoundsJson {
    fn from(b: &Bounds) -> Self {
        BoundsJson {
            max_states: b.max_states,
            tau_budget: b.tau_budget,
            max_rounds: b.max_rounds,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct WitnessStepJson {
    /// Which side moved: "left" or "right".
    pub side: String,
    pub label: String,
    pub left: String,
    pub right: String,
    pub successor: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct WitnessJson {
    pub reason: String,
    pub steps: Vec<WitnessStepJson>,
}

impl From<&Witness> for WitnessJson {
    fn from(w: &Witness) -> Self {
        WitnessJson {
            reason: w.reason.clone(),
            steps: w
                .steps
                .iter()
                .map(|s| WitnessStepJson {
                    side: match s.side {
                        Side::Left => "left".to_string(),
                        Side::Right => "right".to_string(),
                    },
                    label: s.label.to_string(),
                    left: print_pi(&s.left),
                    right: print_pi(&s.right),
                    successor: print_pi(&s.successor),
                })
                .collect(),
        }
    }
}

/// `{verdict, witness?, bounds, states_explored}` (the spec'd verdict wire
/// format; `states_explored` is filled when the caller explored the graphs).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct VerdictJson {
    /// "proved", "refuted" or "unknown".
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub bounds: BoundsJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states_explored: Option<usize>,
}

pub fn verdict_json(v: &Verdict, b: &Bounds, states_explored: Option<usize>) -> VerdictJson {
    VerdictJson {
        verdict: v.kind().to_string(),
        witness: match v {
            Verdict::Refuted(w) => Some(WitnessJson::from(w)),
            _ => None,
        },
        reason: match v {
            Verdict::Unknown(r) => Some(r.clone()),
            _ => None,
        },
        bounds: BoundsJson::from(b),
        states_explored,
    }
}

/// Tagged-union tree view: `top`, `bot` (with the number of leading
/// binders), `unknown`, or an inner `node`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeJson {
    Top,
    Bot { binders: usize },
    Unknown { fuel_spent: usize },
    Node {
        binders: Vec<String>,
        head: String,
        children: Vec<TreeJson>,
    },
}

impl From<&Tree> for TreeJson {
    fn from(t: &Tree) -> Self {
        match t {
            Tree::TopLeaf => TreeJson::Top,
            Tree::BotLeaf(n) => TreeJson::Bot { binders: *n },
            Tree::UnknownLeaf(f) => TreeJson::Unknown { fuel_spent: *f },
            Tree::Node {
                binders,
                head,
                children,
            } => TreeJson::Node {
                binders: binders.clone(),
                head: head.clone(),
                children: children.iter().map(TreeJson::from).collect(),
            },
        }
    }
}

/// λ-term AST view.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaJson {
    Var { name: String },
    Abs { param: String, body: Box<LambdaJson> },
    App { fun: Box<LambdaJson>, arg: Box<LambdaJson> },
}

impl From<&LambdaTerm> for LambdaJson {
    fn from(m: &LambdaTerm) -> Self {
        match m {
            LambdaTerm::Var(x) => LambdaJson::Var { name: x.clone() },
            LambdaTerm::Abs(x, b) => LambdaJson::Abs {
                param: x.clone(),
                body: Box::new(LambdaJson::from(b.as_ref())),
            },
            LambdaTerm::App(f, a) => LambdaJson::App {
                fun: Box::new(LambdaJson::from(f.as_ref())),
                arg: Box::new(LambdaJson::from(a.as_ref())),
            },
        }
    }
}

/// π-agent AST view.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PiJson {
    Nil,
    Input {
        subj: String,
        params: Vec<String>,
        cont: Box<PiJson>,
    },
    Output {
        subj: String,
        args: Vec<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        cont: Option<Box<PiJson>>,
    },
    Par { left: Box<PiJson>, right: Box<PiJson> },
    Res { name: String, body: Box<PiJson> },
    RepInput {
        subj: String,
        params: Vec<String>,
        cont: Box<PiJson>,
    },
    RepOutput {
        subj: String,
        args: Vec<String>,
        cont: Box<PiJson>,
    },
    Apply { fun: Box<PiJson>, arg: String },
    Abs { param: String, body: Box<PiJson> },
    Hole { index: usize },
}

impl From<&PiAgent> for PiJson {
    fn from(p: &PiAgent) -> Self {
        match p {
            PiAgent::Nil => PiJson::Nil,
            PiAgent::Input { subj, params, cont } => PiJson::Input {
                subj: subj.clone(),
                params: params.clone(),
                cont: Box::new(PiJson::from(cont.as_ref())),
            },
            PiAgent::Output { subj, args, cont } => PiJson::Output {
                subj: subj.clone(),
                args: args.clone(),
                cont: cont.as_ref().map(|c| Box::new(PiJson::from(c.as_ref()))),
            },
            PiAgent::Par(l, r) => PiJson::Par {
                left: Box::new(PiJson::from(l.as_ref())),
                right: Box::new(PiJson::from(r.as_ref())),
            },
            PiAgent::Res(a, b) => PiJson::Res {
                name: a.clone(),
                body: Box::new(PiJson::from(b.as_ref())),
            },
            PiAgent::RepInput { subj, params, cont } => PiJson::RepInput {
                subj: subj.clone(),
                params: params.clone(),
                cont: Box::new(PiJson::from(cont.as_ref())),
            },
            PiAgent::RepOutput { subj, args, cont } => PiJson::RepOutput {
                subj: subj.clone(),
                args: args.clone(),
                cont: Box::new(PiJson::from(cont.as_ref())),
            },
            PiAgent::Apply { fun, arg } => PiJson::Apply {
                fun: Box::new(PiJson::from(fun.as_ref())),
                arg: arg.clone(),
            },
            PiAgent::Abs { param, body } => PiJson::Abs {
                param: param.clone(),
                body: Box::new(PiJson::from(body.as_ref())),
            },
            PiAgent::Hole(i) => PiJson::Hole { index: *i },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct AuditEntryJson {
    pub name: String,
    pub verdict: VerdictJson,
    pub evidence: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct AuditReportJson {
    pub encoding: String,
    pub relation: String,
    pub entries: Vec<AuditEntryJson>,
}

impl From<&AuditEntry> for AuditEntryJson {
    fn from(e: &AuditEntry) -> Self {
        AuditEntryJson {
            name: e.name.clone(),
            verdict: verdict_json(&e.verdict, &e.bounds, None),
            evidence: e.evidence.clone(),
        }
    }
}

impl From<&AuditReport> for AuditReportJson {
    fn from(r: &AuditReport) -> Self {
        AuditReportJson {
            encoding: r.encoding.name().to_string(),
            relation: r.relation.name().to_string(),
            entries: r.entries.iter().map(AuditEntryJson::from).collect(),
        }
    }
}

/// Transition-graph view used by `lts --format json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphJson {
    pub states: Vec<String>,
    pub edges: Vec<EdgeJson>,
    pub initial: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeJson {
    pub from: usize,
    pub label: String,
    pub to: usize,
}

pub fn graph_json(g: &treepi_core::equiv::Graph) -> GraphJson {
    GraphJson {
        states: g.states.iter().map(print_pi).collect(),
        edges: g
            .edges
            .iter()
            .map(|(f, l, t)| EdgeJson {
                from: *f,
                label: label_str(l),
                to: *t,
            })
            .collect(),
        initial: g.initial,
        complete: g.complete,
    }
}

pub fn label_str(l: &Label) -> String {
    l.to_string()
}
