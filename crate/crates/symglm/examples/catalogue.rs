//! Walk the method registry and print what each entry provides: the
//! p/q/r/s signature, the symmetry involution, parasitism growth factors,
//! and the starting/finishing construction.
//!
//! ```bash
//! cargo run --example catalogue
//! ```

use symglm::analysis::parasitism_factors;
use symglm::tableau::{registry, FinishRule, StartScheme};

fn main() {
    for entry in registry().entries() {
        let m = &entry.tableau;
        println!(
            "{}  (order {}, stage order {}, r = {}, s = {})",
            entry.name, m.declared_order, m.declared_stage_order, m.r, m.s
        );
        let l = &m.floats().l;
        let diag: Vec<String> = (0..m.r).map(|i| format!("{:+.0}", l[i][i])).collect();
        println!("  L = diag({})", diag.join(", "));
        match parasitism_factors(m) {
            Ok(f) if f.is_empty() => println!("  single-value method: no parasitic modes"),
            Ok(f) => {
                let v: Vec<String> = f.iter().map(|c| c.to_string()).collect();
                println!("  parasitism growth factors: [{}]", v.join(", "));
            }
            Err(e) => println!("  parasitism: {e}"),
        }
        match &entry.start {
            StartScheme::Identity => println!("  start: identity (single-value)"),
            StartScheme::Triple(t) => {
                println!(
                    "  start: {:?} variant, {} forward stages, C = {}{}",
                    t.variant,
                    t.forward.s(),
                    t.c_scale,
                    if t.verified { "" } else { "  [unverified]" }
                );
            }
        }
        for alt in &entry.alternates {
            println!(
                "  alternate start `{}`: {}",
                alt.label,
                if alt.verified { "verified" } else { "fails its order conditions as printed" }
            );
        }
        match entry.finishing {
            FinishRule::TripleInverse => println!("  finish: averaged inverse tableau pair"),
            FinishRule::FirstComponent => println!("  finish: first component"),
        }
        if let Some(g) = &entry.gsym {
            println!(
                "  G-symplectic with G of size {}x{} and diagonal D",
                g.g.rows, g.g.cols
            );
        }
        println!();
    }
}
