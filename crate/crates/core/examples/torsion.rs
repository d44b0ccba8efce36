//! ζ-regularized determinants, Ray–Singer torsion and the abelian
//! Chern–Simons partition function of the twisted circle complex.
//!
//! ```text
//! cargo run --example torsion
//! ```

use num_complex::Complex64;

use nchodge::hodge::{abelian_cs_partition, hodge_package, rs_torsion, twisted_circle_complex};

fn main() -> nchodge::Result<()> {
    for (alpha, label) in [(Complex64::new(-1.0, 0.0), "-1"), (Complex64::new(0.0, 1.0), "i")] {
        for n in [3, 8, 17] {
            let c = twisted_circle_complex(alpha, n)?;
            let t = rs_torsion(&c)?;
            println!("α = {label:>2}, N = {n:>2}: det′Δ = {:.6?}, log T = {:+.6}, T = {:.6}", t.det_prime, t.log_torsion, t.torsion);
        }
    }
    let c = twisted_circle_complex(Complex64::new(-1.0, 0.0), 8)?;
    println!("Z = {:.12}", abelian_cs_partition(&c)?);

    let sum = c.direct_sum(&twisted_circle_complex(Complex64::new(0.0, 1.0), 5)?)?;
    let pkg = hodge_package(&sum);
    println!("direct sum: betti {:?}, log T = {:+.6}", pkg.betti, rs_torsion(&sum)?.log_torsion);
    Ok(())
}
