use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use reeb4::capacities::prepare;
use reeb4::flow::preserves_form;
use reeb4::num::{int, rat, Rat};
use reeb4::search::random_polytope;
use reeb4::sp2::DEFAULT_TOL;
use reeb4::{ehz, systolic_ratio, Vec4Q};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn capacity_is_translation_invariant_and_two_homogeneous(seed in any::<u64>(), num in 1i64..5, den in 1i64..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polytope(5, 10, &mut rng).unwrap();
        let c = ehz(&p).unwrap().value;
        let shift: Vec4Q = reeb4::linalg::Vec4([rat(1, 7), int(-2), rat(3, 5), int(1)]);
        prop_assert_eq!(ehz(&p.translate(&shift)).unwrap().value, c.clone());
        let r: Rat = rat(num, den);
        let scaled = p.scale(&r);
        prop_assert_eq!(ehz(&scaled).unwrap().value, &c * &r * &r);
        prop_assert_eq!(systolic_ratio(&scaled).unwrap(), systolic_ratio(&p).unwrap());
    }

    #[test]
    fn every_flow_map_is_symplectic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polytope(6, 10, &mut rng).unwrap();
        let g = prepare(&p, DEFAULT_TOL).unwrap().graph;
        for e in &g.edges {
            prop_assert!(preserves_form(e, &g), "edge {}", e.id);
        }
    }
}
