//! Tangential Betti numbers of a torus-leaf product foliation under the
//! Witten deformation d_τ = e^{−τφ} d e^{τφ}.
//!
//! ```text
//! cargo run --example witten_sweep
//! ```

use nchodge::tangential::{make_model, witten_betti_sweep, LeafSpec, PhiSpec};

fn main() -> nchodge::Result<()> {
    let model = make_model(LeafSpec::Torus { n: 8 }, vec![0.1, 0.6], vec![0.3, 0.7], Some(vec![1.0, 1.5]))?;
    for phi in [PhiSpec::Builtin("cos-h".into()), PhiSpec::Random { seed: 4, modes: 4 }] {
        let values = model.sample_phi(&phi)?;
        let r = witten_betti_sweep(&model, &values, &[0.0, 0.5, 1.0, 2.0, 5.0])?;
        println!("φ = {phi:?}");
        for (t, row) in r.tau_values.iter().zip(&r.betti_table) {
            println!("  τ = {t:<4} β = {row:?}");
        }
        println!("  constant: {}, rank U = β: {}, χ = {}", r.constant(), r.intertwiners_ok, r.euler_weighted);
    }
    Ok(())
}
