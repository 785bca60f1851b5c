//! Command-line front door: parse, reduce, approximate trees, encode,
//! explore transition systems, compare behaviours, type check, and run the
//! encoding audits.
//!
//! Exit codes: 0 = ok/Proved, 1 = Refuted/Different/type error,
//! 2 = Unknown/undecided within bounds, 3+ = usage or parse errors.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use treepi_core::audit::{audit, AuditRelation};
use treepi_core::encode::{encode_at, Encoding};
use treepi_core::equiv::{
    dexpansion_leq, expansion_leq, explore, strong_bisim, weak_bisim, Bounds, Verdict,
};
use treepi_core::lambda::{parse_lambda_with_builtins, step, LambdaTerm, Strategy};
use treepi_core::pi::{parse_pi, print_pi, PiAgent};
use treepi_core::tree::{approx, TreeKind};
use treepi_core::types::{
    check_encoding_typed, milner_annotations, parse_type, type_check, PiType, TypeEnv,
};
use treepi::json;

#[derive(Parser, Debug)]
#[command(
    name = "treepi",
    version,
    about = "Lambda-calculus / pi-calculus workbench: trees, encodings, bounded equivalence checks",
    after_help = "Exit codes: 0 ok/Proved, 1 Refuted/Different, 2 Unknown, 3+ usage/parse error.\n\
                  Term arguments accept '-' to read from stdin. OMEGA and FIX are builtin lambda literals."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    opts: GlobalOpts,
}

#[derive(Args, Debug, Clone)]
struct GlobalOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text, env = "TREEPI_FORMAT")]
    format: Format,
    /// Cap on distinct states per explored process.
    #[arg(long, global = true, default_value_t = 4096, env = "TREEPI_MAX_STATES")]
    max_states: usize,
    /// Cap on tau steps inside one weak move.
    #[arg(long, global = true, default_value_t = 64, env = "TREEPI_TAU_BUDGET")]
    tau_budget: usize,
    /// Cap on fixpoint refinement rounds of the bisimulation games.
    #[arg(long, global = true, default_value_t = 512, env = "TREEPI_MAX_ROUNDS")]
    max_rounds: usize,
    /// Reduction fuel for lambda-term evaluation and tree approximants.
    #[arg(long, global = true, default_value_t = 64, env = "TREEPI_FUEL")]
    fuel: usize,
    /// Depth of tree approximants.
    #[arg(long, global = true, default_value_t = 3, env = "TREEPI_DEPTH")]
    depth: usize,
}

impl GlobalOpts {
    fn bounds(&self) -> Bounds {
        Bounds {
            max_states: self.max_states,
            tau_budget: self.tau_budget,
            max_rounds: self.max_rounds,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Calculus {
    Lambda,
    Pi,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EncodingArg {
    Milner,
    Variant,
    Strong,
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Encoding {
        match e {
            EncodingArg::Milner => Encoding::MilnerCBN,
            EncodingArg::Variant => Encoding::VariantCBN,
            EncodingArg::Strong => Encoding::StrongCBN,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StrategyArg {
    /// Lazy (weak head) call-by-name.
    Cbn,
    /// Call-by-name reducing under abstractions.
    StrongCbn,
    /// Head reduction.
    Head,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Cbn => Strategy::CallByName,
            StrategyArg::StrongCbn => Strategy::StrongCallByName,
            StrategyArg::Head => Strategy::Head,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TreeKindArg {
    /// Levy-Longo tree approximant.
    Lt,
    /// Bohm tree approximant.
    Bt,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RelArg {
    /// Strong bisimilarity.
    Sbisim,
    /// Weak bisimilarity.
    Wbisim,
    /// Expansion preorder (left expanded by right).
    Exp,
    /// Divergence-sensitive expansion preorder.
    Dexp,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SuiteArg {
    /// Levy-Longo tree conditions against weak bisimilarity.
    LtWbisim,
    /// Conditions against the expansion-pair relation.
    Expansion,
    /// Conditions against the divergence-sensitive expansion pair.
    Dexpansion,
    /// Bohm tree conditions against may testing.
    BtMay,
    /// Bohm tree conditions against must testing.
    BtMust,
}

impl From<SuiteArg> for AuditRelation {
    fn from(s: SuiteArg) -> AuditRelation {
        match s {
            SuiteArg::LtWbisim => AuditRelation::WeakBisim,
            SuiteArg::Expansion => AuditRelation::ExpansionPair,
            SuiteArg::Dexpansion => AuditRelation::DexpansionPair,
            SuiteArg::BtMay => AuditRelation::BarbsMay,
            SuiteArg::BtMust => AuditRelation::BarbsMust,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse a term and print it back in canonical syntax.
    Parse {
        #[arg(long, value_enum, default_value_t = Calculus::Lambda)]
        calculus: Calculus,
        term: String,
    },
    /// Reduce a lambda term, printing each step.
    Reduce {
        #[arg(long, value_enum, default_value_t = StrategyArg::Head)]
        strategy: StrategyArg,
        term: String,
    },
    /// Print a Levy-Longo or Bohm tree approximant.
    Tree {
        #[arg(long, value_enum, default_value_t = TreeKindArg::Lt)]
        kind: TreeKindArg,
        term: String,
    },
    /// Encode a lambda term into the pi-calculus.
    Encode {
        #[arg(long, value_enum, default_value_t = EncodingArg::Milner)]
        enc: EncodingArg,
        /// Location name the encoding is addressed at.
        #[arg(long, default_value = "p")]
        loc: String,
        term: String,
    },
    /// Explore the labelled transition system of a pi process.
    Lts { term: String },
    /// Compare two pi processes (or two lambda terms via --enc).
    Equiv {
        #[arg(long, value_enum, default_value_t = RelArg::Wbisim)]
        rel: RelArg,
        /// Treat the terms as lambda terms and compare their encodings.
        #[arg(long, value_enum)]
        enc: Option<EncodingArg>,
        left: String,
        right: String,
    },
    /// Type check a pi process under a linear type environment, or the
    /// typed call-by-name encoding of a lambda term.
    Typecheck {
        /// Environment as comma-separated `name:type` pairs
        /// (type syntax: unit, #L, iL, oL, l#L, liL, loL, (L1,...,Ln), X, mu X. L, proc).
        #[arg(long, default_value = "")]
        env: String,
        /// Goal type (default: proc).
        #[arg(long, default_value = "proc")]
        goal: String,
        /// Treat the argument as a lambda term and check its typed encoding.
        #[arg(long)]
        lambda: bool,
        term: String,
    },
    /// Run the encoding auditor: guardedness, beta-validity, collapses,
    /// discrimination, inverse contexts and barb separations.
    Audit {
        #[arg(long, value_enum, default_value_t = EncodingArg::Milner)]
        enc: EncodingArg,
        #[arg(long, value_enum, default_value_t = SuiteArg::LtWbisim)]
        suite: SuiteArg,
    },
}

#[derive(Debug)]
struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError {
            message: msg.into(),
            code: 3,
        }
    }
}

fn read_term(s: &str) -> Result<String, CliError> {
    if s == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::usage(format!("reading stdin: {e}")))?;
        Ok(buf.trim().to_string())
    } else {
        Ok(s.to_string())
    }
}

fn parse_lam(s: &str) -> Result<LambdaTerm, CliError> {
    let src = read_term(s)?;
    parse_lambda_with_builtins(&src).map_err(|e| CliError::usage(format!("lambda syntax: {e}")))
}

fn parse_proc(s: &str) -> Result<PiAgent, CliError> {
    let src = read_term(s)?;
    parse_pi(&src).map_err(|e| CliError::usage(format!("pi syntax: {e}")))
}

fn verdict_exit(v: &Verdict) -> u8 {
    match v {
        Verdict::Proved => 0,
        Verdict::Refuted(_) => 1,
        Verdict::Unknown(_) => 2,
    }
}

/// Splits `name:type` entries on commas that sit outside parentheses, so
/// product types such as `(L1,L2)` survive.
fn split_entries(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_env(s: &str) -> Result<TypeEnv, CliError> {
    let mut env = TypeEnv::new();
    for item in split_entries(s).into_iter().map(str::trim).filter(|i| !i.is_empty()) {
        let (name, ty) = item
            .split_once(':')
            .ok_or_else(|| CliError::usage(format!("environment entry '{item}' needs name:type")))?;
        let t = parse_type(ty.trim()).map_err(|e| CliError::usage(format!("{e}")))?;
        env.insert(name.trim(), t);
    }
    Ok(env)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let opts = &cli.opts;
    let b = opts.bounds();
    match cli.cmd {
        Cmd::Parse { calculus, term } => match calculus {
            Calculus::Lambda => {
                let m = parse_lam(&term)?;
                match opts.format {
                    Format::Json => println!(
                        "{}",
                        serde_json::to_string_pretty(&json::LambdaJson::from(&m)).unwrap()
                    ),
                    _ => println!("{m}"),
                }
                Ok(0)
            }
            Calculus::Pi => {
                let p = parse_proc(&term)?;
                match opts.format {
                    Format::Json => println!(
                        "{}",
                        serde_json::to_string_pretty(&json::PiJson::from(&p)).unwrap()
                    ),
                    _ => println!("{}", print_pi(&p)),
                }
                Ok(0)
            }
        },
        Cmd::Reduce { strategy, term } => {
            let mut cur = parse_lam(&term)?;
            let strat = Strategy::from(strategy);
            let mut steps = Vec::new();
            let mut normalized = false;
            for _ in 0..opts.fuel {
                match step(&cur, strat) {
                    Some(next) => {
                        steps.push(next.to_string());
                        cur = next;
                    }
                    None => {
                        normalized = true;
                        break;
                    }
                }
            }
            match opts.format {
                Format::Json => {
                    #[derive(serde::Serialize)]
                    struct ReduceJson {
                        steps: Vec<String>,
                        result: String,
                        normal_form: bool,
                    }
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&ReduceJson {
                            steps: steps.clone(),
                            result: cur.to_string(),
                            normal_form: normalized,
                        })
                        .unwrap()
                    );
                }
                _ => {
                    for s in &steps {
                        println!("-> {s}");
                    }
                    if !normalized {
                        println!("(fuel exhausted after {} steps)", steps.len());
                    }
                    println!("{cur}");
                }
            }
            Ok(if normalized { 0 } else { 2 })
        }
        Cmd::Tree { kind, term } => {
            let m = parse_lam(&term)?;
            let k = match kind {
                TreeKindArg::Lt => TreeKind::LevyLongo,
                TreeKindArg::Bt => TreeKind::Bohm,
            };
            let t = approx(&m, opts.depth, opts.fuel, k);
            match opts.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json::TreeJson::from(&t)).unwrap()
                ),
                _ => print!("{}", t.render_text()),
            }
            Ok(if t.has_unknown() { 2 } else { 0 })
        }
        Cmd::Encode { enc, loc, term } => {
            let m = parse_lam(&term)?;
            let e = Encoding::from(enc);
            let p = encode_at(e, &m, &loc);
            match opts.format {
                Format::Json => {
                    #[derive(serde::Serialize)]
                    struct EncodeJson {
                        encoding: String,
                        location: String,
                        agent: json::PiJson,
                        printed: String,
                        sorting: std::collections::BTreeMap<String, Vec<String>>,
                    }
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&EncodeJson {
                            encoding: e.name().to_string(),
                            location: loc,
                            agent: json::PiJson::from(&p),
                            printed: print_pi(&p),
                            sorting: e.sorting().obj.into_iter().collect(),
                        })
                        .unwrap()
                    );
                }
                _ => {
                    println!("{}", print_pi(&p));
                    for (sort, obj) in &e.sorting().obj {
                        println!("sort {sort} carries ({})", obj.join(", "));
                    }
                }
            }
            Ok(0)
        }
        Cmd::Lts { term } => {
            let p = parse_proc(&term)?;
            let g = explore(&p, &b)
                .map_err(|e| CliError::usage(format!("not an explorable process: {e}")))?;
            match opts.format {
                Format::Dot => print!("{}", treepi::graph_dot(&g)),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json::graph_json(&g)).unwrap()
                ),
                Format::Text => {
                    println!(
                        "states: {} ({})",
                        g.states.len(),
                        if g.complete { "complete" } else { "truncated" }
                    );
                    for (f, l, t) in &g.edges {
                        println!("  s{f} --{l}--> s{t}");
                    }
                    for (i, s) in g.states.iter().enumerate() {
                        println!("s{i} = {}", print_pi(s));
                    }
                }
            }
            Ok(if g.complete { 0 } else { 2 })
        }
        Cmd::Equiv {
            rel,
            enc,
            left,
            right,
        } => {
            let (p, q) = match enc {
                Some(e) => {
                    let e = Encoding::from(e);
                    let ml = parse_lam(&left)?;
                    let mr = parse_lam(&right)?;
                    let mut avoid = ml.free_vars();
                    avoid.extend(mr.free_vars());
                    let loc = treepi_core::lambda::fresh_name("p", &avoid);
                    (encode_at(e, &ml, &loc), encode_at(e, &mr, &loc))
                }
                None => (parse_proc(&left)?, parse_proc(&right)?),
            };
            let v = match rel {
                RelArg::Sbisim => strong_bisim(&p, &q, &b),
                RelArg::Wbisim => weak_bisim(&p, &q, &b),
                RelArg::Exp => expansion_leq(&p, &q, &b),
                RelArg::Dexp => dexpansion_leq(&p, &q, &b),
            };
            let states = explore(&p, &b)
                .ok()
                .and_then(|gl| explore(&q, &b).ok().map(|gr| gl.states.len() + gr.states.len()));
            match opts.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json::verdict_json(&v, &b, states)).unwrap()
                ),
                _ => match &v {
                    Verdict::Proved => println!("proved"),
                    Verdict::Refuted(w) => {
                        println!("refuted: {}", w.reason);
                        for s in &w.steps {
                            let side = match s.side {
                                treepi_core::equiv::Side::Left => "left",
                                treepi_core::equiv::Side::Right => "right",
                            };
                            println!("  [{side}] {} at {}", s.label, print_pi(&s.left));
                        }
                    }
                    Verdict::Unknown(r) => println!("unknown: {r}"),
                },
            }
            Ok(verdict_exit(&v))
        }
        Cmd::Typecheck {
            env,
            goal,
            lambda,
            term,
        } => {
            if lambda {
                let m = parse_lam(&term)?;
                return match check_encoding_typed(&m) {
                    Ok(()) => {
                        println!("ok: typed encoding checks at T_b -> proc");
                        Ok(0)
                    }
                    Err(e) => {
                        println!("type error: {e}");
                        Ok(1)
                    }
                };
            }
            let p = parse_proc(&term)?;
            let env = parse_env(&env)?;
            let goal: PiType =
                parse_type(&goal).map_err(|e| CliError::usage(format!("{e}")))?;
            let annots = milner_annotations(&p);
            match type_check(&env, &p, &goal, &annots) {
                Ok(()) => {
                    println!("ok");
                    Ok(0)
                }
                Err(e) => {
                    println!("type error: {e}");
                    Ok(1)
                }
            }
        }
        Cmd::Audit { enc, suite } => {
            let report = audit(Encoding::from(enc), AuditRelation::from(suite), &b);
            match opts.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json::AuditReportJson::from(&report)).unwrap()
                ),
                _ => {
                    println!("audit {} / {}", report.encoding.name(), report.relation.name());
                    for e in &report.entries {
                        println!("  {:<44} {:<8} {}", e.name, e.verdict.kind(), e.evidence);
                    }
                }
            }
            let unresolved = report
                .entries
                .iter()
                .any(|e| matches!(e.verdict, Verdict::Unknown(_)));
            Ok(if unresolved { 2 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(3)
                }
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
