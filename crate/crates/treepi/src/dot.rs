//! DOT (Graphviz) export of explored transition graphs.

use treepi_core::equiv::Graph;
use treepi_core::pi::print_pi;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the graph as a DOT digraph: nodes are the canonical state terms,
/// edges carry transition labels, the initial state is drawn doubled. An
/// incomplete exploration is flagged in the graph label.
pub fn graph_dot(g: &Graph) -> String {
    let mut out = String::from("digraph lts {\n");
    out.push_str("  rankdir=LR;\n");
    if !g.complete {
        out.push_str("  label=\"exploration truncated at the state bound\";\n");
    }
    for (i, s) in g.states.iter().enumerate() {
        let shape = if i == g.initial {
            "doublecircle"
        } else {
            "circle"
        };
        out.push_str(&format!(
            "  s{} [shape={},label=\"{}\"];\n",
            i,
            shape,
            escape(&print_pi(s))
        ));
    }
    for (f, l, t) in &g.edges {
        out.push_str(&format!(
            "  s{} -> s{} [label=\"{}\"];\n",
            f,
            t,
            escape(&l.to_string())
        ));
    }
    out.push_str("}\n");
    out
}
