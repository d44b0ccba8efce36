//! Hodge decomposition of seeded random cochain complexes with
//! non-standard inner products.
//!
//! ```text
//! cargo run --example hodge_classical
//! ```

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nchodge::hodge::{hodge_package, inner, random_complex, rank_nullity_betti};

fn main() -> nchodge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let (c, built) = random_complex(&mut rng, 7);
        let pkg = hodge_package(&c);
        println!("dims {:?}: harmonic β {:?}, rank-nullity β {:?}, constructed {:?}", c.dims(), pkg.betti, rank_nullity_betti(&c), built);
        let k = 1.min(c.length());
        let v = DVector::from_fn(c.dims()[k], |_, _| Complex64::new(rng.random_range(-1.0..1.0), 0.0));
        let parts = pkg.decompose(&c, k, &v)?;
        println!(
            "  degree {k}: |h + e + c − v| = {:.1e}, ⟨e, c⟩ = {:.1e}",
            (&parts.harmonic + &parts.exact + &parts.coexact - &v).norm(),
            inner(&c, k, &parts.exact, &parts.coexact).norm()
        );
    }
    Ok(())
}
