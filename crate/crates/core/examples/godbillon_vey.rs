//! Integrability check and Godbillon–Vey integral of plane fields on T³.
//!
//! ```text
//! cargo run --example godbillon_vey
//! ```

use nchodge::tangential::{godbillon_vey, OmegaSpec};

fn main() {
    for name in ["dz", "dz+sin(2piz)dx", "(2+cos(2pix))dz", "dz+x dy"] {
        match godbillon_vey(&OmegaSpec::builtin(name), 16) {
            Ok(r) => {
                println!("{name:<18} GV = {:+.2e}  |ω∧dω| = {:.1e}  gauge Δ = {:.1e}", r.gv, r.integrability_residual, r.gauge_residual)
            }
            Err(e) => println!("{name:<18} {} ({})", e, e.code()),
        }
    }
}
