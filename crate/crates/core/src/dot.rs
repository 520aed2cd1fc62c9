//! Hasse diagrams in DOT, one rank per level.

use std::fmt::Write as _;

use crate::retraction::RetractWitness;
use crate::sections::GridPoset;

/// DOT digraph of the cover relation of `grid`, edges pointing upwards.
///
/// With a witness, retract points are drawn hollow and every point moved by
/// the retraction gets a dashed edge to its image.
pub fn to_dot(grid: &GridPoset, witness: Option<&RetractWitness>) -> String {
    let p = grid.poset();
    let mut out = format!("digraph \"{}\" {{\n  rankdir=BT;\n  node [shape=circle, style=filled, fillcolor=black, fontcolor=white, fixedsize=true, width=0.5];\n", grid.code());
    for k in 0..=grid.height() {
        let _ = write!(out, "  {{ rank=same;");
        for x in grid.level(k) {
            let _ = write!(out, " \"{}\";", grid.name(x));
        }
        out.push_str(" }\n");
    }
    if let Some(w) = witness {
        for x in w.retract() {
            let _ = writeln!(out, "  \"{}\" [fillcolor=white, fontcolor=black, retract=true];", grid.name(x));
        }
    }
    for (x, y) in p.covers() {
        let _ = writeln!(out, "  \"{}\" -> \"{}\";", grid.name(x), grid.name(y));
    }
    if let Some(w) = witness {
        for x in w.domain() {
            let y = w.apply(x);
            if x != y {
                let _ = writeln!(out, "  \"{}\" -> \"{}\" [style=dashed, color=gray, constraint=false];", grid.name(x), grid.name(y));
            }
        }
    }
    out.push_str("}\n");
    out
}
