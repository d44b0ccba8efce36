//! Operators d, b, k on noncommutative forms of the dual numbers and the
//! identities they satisfy.
//!
//! ```text
//! cargo run --example nc_forms
//! ```

use std::sync::Arc;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nchodge::algebra::examples::dual_numbers;
use nchodge::checks::product_checks;
use nchodge::forms::FormsWindow;

fn main() -> nchodge::Result<()> {
    let w = FormsWindow::<BigRational>::new(Arc::new(dual_numbers()), 3)?;
    println!("degree dims {:?}", w.degree_dims());

    let x_dx = w.basis_form(&[1, 1]);
    let k = w.apply_k(&x_dx)?;
    let d = w.apply_d(&x_dx)?;
    let b = w.apply_b(&x_dx)?;
    println!("k(x dx) = {:?}", k.component(1));
    println!("d(x dx) = {:?}", d.component(2));
    println!("b(x dx) = {:?}", b.component(0));

    let ops = w.operator_matrices()?;
    for n in 0..w.n_max() {
        println!("degree {n}: {:?}", ops.identity_residuals(n));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let checks = product_checks(&w, 100, &mut rng)?;
    println!("product checks exact: {}", checks.all_zero());
    Ok(())
}
