use std::sync::Arc;

use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nchodge::algebra::examples::suite;
use nchodge::checks::random_form;
use nchodge::forms::FormsWindow;
use nchodge::hodge::{rs_torsion, twisted_circle_complex};
use nchodge::spectral::{hodge_split, SpectralConfig};
use nchodge::tangential::{witten_betti_sweep, FoliationModel, LeafSpec, PhiSpec};

fn windows() -> Vec<FormsWindow<BigRational>> {
    suite::<BigRational>().into_iter().map(|(name, a)| FormsWindow::new(Arc::new(a), if name == "m2" { 2 } else { 3 }).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bd_plus_db_on_random_forms(seed in any::<u64>(), which in 0usize..4) {
        let w = &windows()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for n in 0..w.n_max() {
            let f = random_form(w, n, &mut rng);
            let lhs = w.apply_b(&w.apply_d(&f).unwrap()).unwrap().add(&w.apply_d(&w.apply_b(&f).unwrap()).unwrap());
            let rhs = f.sub(&w.apply_k(&f).unwrap());
            prop_assert!(lhs.sub(&rhs).is_zero());
        }
    }

    #[test]
    fn hodge_split_resums(seed in any::<u64>(), which in 0usize..4) {
        let w = &windows()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for n in 1..w.n_max() {
            let f = random_form(w, n, &mut rng);
            let s = hodge_split(w, &f, &SpectralConfig::default()).unwrap();
            prop_assert!(s.harmonic.add(&s.d_part).add(&s.b_part).sub(&f).is_zero());
            prop_assert!(s.d_part_exact && s.b_part_coexact);
        }
    }

    #[test]
    fn circle_determinant_is_independent_of_n(theta in 0.2f64..6.0, n in 3usize..14) {
        let alpha = Complex64::from_polar(1.0, theta);
        let t = rs_torsion(&twisted_circle_complex(alpha, n).unwrap()).unwrap();
        let expected = (Complex64::new(1.0, 0.0) - alpha).norm_sqr();
        prop_assert!((t.det_prime[0] - expected).abs() < 1e-9 * expected.max(1.0));
        prop_assert!((t.det_prime[1] - t.det_prime[0]).abs() < 1e-9 * expected.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn witten_betti_constant_for_random_phi(seed in any::<u64>(), modes in 1usize..5) {
        let m = FoliationModel::uniform(LeafSpec::Circle { n: 12 }, 3).unwrap();
        let phi = m.sample_phi(&PhiSpec::Random { seed, modes }).unwrap();
        let r = witten_betti_sweep(&m, &phi, &[0.0, 1.0, 4.0]).unwrap();
        prop_assert!(r.constant() && r.intertwiners_ok);
    }
}
