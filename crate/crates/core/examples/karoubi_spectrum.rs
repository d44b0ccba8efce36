//! Spectrum of the Karoubi operator on M₂(ℂ), the harmonic projection P,
//! Green's operator G and the Hodge splitting of a random 1-form.
//!
//! ```text
//! cargo run --example karoubi_spectrum
//! ```

use std::sync::Arc;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nchodge::algebra::examples::m2;
use nchodge::checks::random_form;
use nchodge::forms::FormsWindow;
use nchodge::spectral::{greens_operator, hodge_split, projector_polynomial, SpectralConfig};

fn main() -> nchodge::Result<()> {
    let cfg = SpectralConfig::default();
    let w = FormsWindow::<BigRational>::new(Arc::new(m2()), 2)?;
    for n in 0..=2 {
        let data = greens_operator(&w, n, &cfg)?;
        println!("Ω^{n}: dim {}, rank P = {}, rank P⊥ = {}", w.dim(n), data.p.rank(), data.p_perp.rank());
        for e in &data.eigenvalue_report {
            println!("  λ = {:+.4}{:+.4}i  order {}  multiplicity {}", e.re, e.im, e.order, e.multiplicity);
        }
        println!("  P = r(k) with r of degree {:?}", projector_polynomial(n).degree());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let form = random_form(&w, 1, &mut rng);
    let s = hodge_split(&w, &form, &cfg)?;
    println!("harmonic {:?}", s.harmonic.component(1));
    println!("exact part in Im d: {}, coexact part in Im b: {}", s.d_part_exact, s.b_part_coexact);
    Ok(())
}
