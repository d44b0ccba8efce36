//! Regenerates the bundled input files under `data/`.
//!
//! ```text
//! cargo run --example export_inputs
//! ```

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use num_rational::BigRational;

use nchodge::algebra::examples::suite;
use nchodge::hodge::twisted_circle_complex;
use nchodge::report::to_json;
use nchodge::tangential::model::{ModelFile, Transversal};
use nchodge::tangential::{LeafSpec, OmegaSpec, PhiSpec};

fn main() -> nchodge::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let save = |dir: &str, name: &str, text: String| {
        let d = root.join(dir);
        fs::create_dir_all(&d).unwrap();
        fs::write(d.join(name), text).unwrap();
        println!("wrote data/{dir}/{name}");
    };
    for (name, a) in suite::<BigRational>() {
        save("algebras", &format!("{name}.json"), to_json(&a.to_file()));
    }
    for (alpha, tag) in [(Complex64::new(-1.0, 0.0), "-1"), (Complex64::new(0.0, 1.0), "i")] {
        let c = twisted_circle_complex(alpha, 8)?;
        save("complexes", &format!("circle_alpha_{tag}_N8.json"), to_json(&c.to_file()));
    }
    let circle = ModelFile {
        leaf: LeafSpec::Circle { n: 16 },
        transversal: Transversal { samples: vec![0.0, 0.25, 0.5, 0.75], weights: vec![0.25; 4] },
        metric_scale: None,
        phi: Some(PhiSpec::Builtin("cos-h".into())),
        tau: Some(vec![0.0, 0.5, 1.0, 2.0, 5.0]),
    };
    save("models", "circle_cos.json", to_json(&circle));
    let torus = ModelFile {
        leaf: LeafSpec::Torus { n: 8 },
        transversal: Transversal { samples: vec![0.1, 0.6], weights: vec![0.3, 0.7] },
        metric_scale: Some(vec![1.0, 1.5]),
        phi: Some(PhiSpec::Random { seed: 9, modes: 4 }),
        tau: None,
    };
    save("models", "torus_random.json", to_json(&torus));
    let strip = ModelFile { phi: Some(PhiSpec::Builtin("cubic-bd".into())), ..circle };
    save("models", "strip_cubic.json", to_json(&strip));
    save("models", "omega_reeb_like.json", to_json(&OmegaSpec::builtin("dz+sin(2piz)dx")));
    Ok(())
}
