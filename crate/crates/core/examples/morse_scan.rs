//! Tangential singularities of leafwise functions on the (h, v) strip:
//! a Morse family for cos(2πh) and a birth–death point for h³/3 − vh.
//!
//! ```text
//! cargo run --example morse_scan
//! ```

use nchodge::tangential::morse::Classification;
use nchodge::tangential::{morse_scan, MorseFunction, ScanGrid};

fn main() -> nchodge::Result<()> {
    for f in [MorseFunction::CosH, MorseFunction::CubicBd, MorseFunction::Constant { c: 1.0 }] {
        let r = morse_scan(&f, &ScanGrid::default())?;
        println!(
            "{}: {} families, {} Morse, {} degenerate, index counts {:?}, almost Morse {}",
            f.name(),
            r.families,
            r.morse_count,
            r.degenerate_count,
            r.index_counts,
            r.almost_morse
        );
        for s in r.singularities.iter().filter(|s| s.classification == Classification::Degenerate).take(3) {
            println!("  degenerate at ({:.3}, {:.3}), birth–death rank ok: {:?}", s.h, s.v, s.birth_death_rank_ok);
        }
    }
    Ok(())
}
